pub mod burgers;
pub mod fit;
pub mod gronwall;
pub mod ineq;
pub mod simulate;
