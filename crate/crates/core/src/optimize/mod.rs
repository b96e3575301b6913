//! Parameter search: local minimizers, restart strategies and gauge fixing.
//! Every objective is minimized; maximization problems negate.

pub mod gauge;
pub mod local;
pub mod objective;
pub mod strategy;

pub use gauge::{gauge_fix, gauge_fix_with_tol};
pub use local::{minimize_local, LocalConfig, LocalMethod, LocalResult};
pub use objective::{
    FiniteFormulaObjective, FnObjective, InfiniteFormulaObjective, Objective, Sense, StatevectorObjective,
};
pub use strategy::{
    formula_degree, strategy_gi, strategy_gi_beam, strategy_ifp, strategy_random, InsertPolicy, LevelReport,
    StrategyReport,
};
