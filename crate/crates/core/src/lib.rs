pub mod algebra;
pub mod bundle;
pub mod charclass;
pub mod cocycle;
pub mod constants;
pub mod metric;
pub mod rational;
pub mod sampling;
