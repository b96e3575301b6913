//! Lightcone-tree iterations for regular graphs of large girth.

pub mod bitpath;
pub mod distribution;
pub mod finite;

pub use bitpath::BitPath;
pub use distribution::{PointSet, SiteDistribution};
pub use finite::{
    assumption_check, edge_expectation, f_value, fbar_table, h_iterate, objective_energy, FBarTable, FiniteFormula,
    HTable, PairExpectations,
};
pub mod infinite;

pub use infinite::{InfiniteFormula, NuReport, RescaledParams};
