pub mod arith;
pub mod conditions;
pub mod cyclotomic;
pub mod global;
pub mod group;
pub mod local;
pub mod ordering;
pub mod euler;
pub mod poisson;
pub mod asymptotics;
