use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::Result;
use crate::formula::infinite::{self, InfiniteFormula, RescaledParams};
use crate::formula::{FiniteFormula, SiteDistribution};
use crate::graphs::InteractionGraph;
use crate::hamiltonians::{EdgeCoeffs, HamiltonianSpec, Operator};
use crate::simulator::{AnsatzSpec, Block, HqsEngine, ParamSchedule};

/// Whether the underlying quantity should be minimized or maximized.
/// Objectives always report a value to be minimized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    fn sign(self) -> f64 {
        match self {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        }
    }
}

/// A deterministic map from parameters to a value to be minimized. Any depth
/// is accepted; the depth is that of the schedule passed in.
pub trait Objective: Sync {
    fn evaluate(&self, params: &ParamSchedule) -> Result<f64>;

    /// Value and gradient in flat `[α, β, γ, δ]` order, when available
    /// analytically.
    fn value_and_gradient(&self, _params: &ParamSchedule) -> Result<Option<(f64, Vec<f64>)>> {
        Ok(None)
    }

    /// Which flat coordinates the optimizer may move.
    fn free_mask(&self, p: usize) -> Vec<bool> {
        vec![true; 4 * p]
    }

    /// Whether a block is `π`-periodic and may be wrapped.
    fn periodic(&self, _block: Block) -> bool {
        true
    }

    /// A random starting point: every angle uniform in `[-π/2, π/2)`.
    fn sample_init(&self, p: usize, rng: &mut ChaCha8Rng) -> ParamSchedule {
        let x: Vec<f64> = (0..4 * p).map(|_| rng.gen_range(-FRAC_PI_2..FRAC_PI_2)).collect();
        ParamSchedule::from_flat(p, &x).expect("finite angles")
    }

    fn describe(&self) -> Value;
}

/// Energy of the HamQAOA state on an explicit graph.
#[derive(Clone, Debug)]
pub struct StatevectorObjective {
    engine: HqsEngine,
    op: Operator,
    sense: Sense,
    label: String,
}

impl StatevectorObjective {
    pub fn new(spec: &HamiltonianSpec, ansatz: &AnsatzSpec, sense: Sense) -> Result<Self> {
        Ok(Self {
            engine: HqsEngine::new(spec.graph(), ansatz)?,
            op: spec.operator()?,
            sense,
            label: String::new(),
        })
    }

    /// Maximizes QMC energy on `g`.
    pub fn qmc(g: &InteractionGraph, ansatz: &AnsatzSpec) -> Result<Self> {
        Self::new(&HamiltonianSpec::qmc(g.clone()), ansatz, Sense::Maximize)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn engine(&self) -> &HqsEngine {
        &self.engine
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// The physical energy from an objective value.
    pub fn energy_of(&self, value: f64) -> f64 {
        self.sense.sign() * value
    }
}

impl Objective for StatevectorObjective {
    fn evaluate(&self, params: &ParamSchedule) -> Result<f64> {
        Ok(self.sense.sign() * self.engine.energy(&self.op, params)?)
    }

    fn value_and_gradient(&self, params: &ParamSchedule) -> Result<Option<(f64, Vec<f64>)>> {
        let s = self.sense.sign();
        let (e, mut g) = self.engine.energy_and_gradient(&self.op, params)?;
        g.iter_mut().for_each(|x| *x *= s);
        Ok(Some((s * e, g)))
    }

    fn describe(&self) -> Value {
        json!({
            "objective": "statevector",
            "graph": self.label,
            "n": self.engine.n_qubits(),
            "sense": self.sense,
        })
    }
}

/// Per-edge energy predicted by the finite-degree iteration.
#[derive(Clone, Debug)]
pub struct FiniteFormulaObjective {
    pub d: usize,
    pub coeffs: EdgeCoeffs,
    pub dist: SiteDistribution,
    pub sense: Sense,
}

impl FiniteFormulaObjective {
    pub fn new(d: usize, coeffs: EdgeCoeffs, dist: SiteDistribution, sense: Sense) -> Self {
        Self { d, coeffs, dist, sense }
    }

    /// Minimizes `⟨XX + YY + ZZ⟩` on an edge of a `(d+1)`-regular tree.
    pub fn heisenberg(d: usize) -> Self {
        Self::new(d, EdgeCoeffs::HEISENBERG, SiteDistribution::SignedX, Sense::Minimize)
    }

    /// Maximizes per-edge QMC energy.
    pub fn qmc(d: usize) -> Self {
        Self::new(d, EdgeCoeffs::QMC, SiteDistribution::SignedX, Sense::Maximize)
    }
}

impl Objective for FiniteFormulaObjective {
    fn evaluate(&self, params: &ParamSchedule) -> Result<f64> {
        let e = FiniteFormula::new(params, self.d, self.dist.clone())?
            .pair_expectations()?
            .energy(&self.coeffs);
        Ok(self.sense.sign() * e)
    }

    fn describe(&self) -> Value {
        json!({
            "objective": "formula-finite",
            "d": self.d,
            "coeffs": [self.coeffs.c_i, self.coeffs.c_xx, self.coeffs.c_yy, self.coeffs.c_zz],
            "sense": self.sense,
        })
    }
}

/// `-ν` on rescaled parameters stored in a schedule whose `alpha` holds `α̃`.
/// Only `α̃` and `δ` move; `β` stays on the `π/4` lattice it starts on and
/// `γ` stays zero.
#[derive(Clone, Debug, Default)]
pub struct InfiniteFormulaObjective {
    /// When set, every start uses this `β` pattern in quarter turns.
    pub beta_quarters: Option<Vec<i64>>,
}

impl InfiniteFormulaObjective {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_beta(beta_quarters: Vec<i64>) -> Self {
        Self {
            beta_quarters: Some(beta_quarters),
        }
    }

    /// The objective value of rescaled parameters (to be minimized).
    pub fn value_of(params: &RescaledParams) -> Result<f64> {
        Ok(-infinite::heisenberg_objective(params)?)
    }
}

impl Objective for InfiniteFormulaObjective {
    fn evaluate(&self, params: &ParamSchedule) -> Result<f64> {
        let r = RescaledParams::from_schedule(params);
        Ok(-InfiniteFormula::new(&r, &SiteDistribution::SignedX)?
            .heisenberg_objective()?
            .objective)
    }

    fn free_mask(&self, p: usize) -> Vec<bool> {
        (0..4 * p).map(|i| i < p || i >= 3 * p).collect()
    }

    fn periodic(&self, block: Block) -> bool {
        block != Block::Alpha
    }

    /// `α̃` uniform in `[-π/2, π/2)`, `δ` likewise, `β_j ∈ {0, π/4}`.
    fn sample_init(&self, p: usize, rng: &mut ChaCha8Rng) -> ParamSchedule {
        let alpha = (0..p).map(|_| rng.gen_range(-FRAC_PI_2..FRAC_PI_2)).collect();
        let delta = (0..p).map(|_| rng.gen_range(-FRAC_PI_2..FRAC_PI_2)).collect();
        let beta = match &self.beta_quarters {
            Some(q) => (0..p)
                .map(|j| q.get(j).copied().unwrap_or(0) as f64 * FRAC_PI_4)
                .collect(),
            None => (0..p)
                .map(|_| if rng.gen::<bool>() { FRAC_PI_4 } else { 0.0 })
                .collect(),
        };
        ParamSchedule {
            alpha,
            beta,
            gamma: vec![0.0; p],
            delta,
        }
    }

    fn describe(&self) -> Value {
        json!({ "objective": "formula-infinite", "beta_quarters": self.beta_quarters })
    }
}

/// An objective built from a closure, with an optional fixed free mask.
pub struct FnObjective<F> {
    f: F,
    mask: Option<Vec<bool>>,
}

impl<F: Fn(&ParamSchedule) -> Result<f64> + Sync> FnObjective<F> {
    pub fn new(f: F) -> Self {
        Self { f, mask: None }
    }

    pub fn with_mask(f: F, mask: Vec<bool>) -> Self {
        Self { f, mask: Some(mask) }
    }
}

impl<F: Fn(&ParamSchedule) -> Result<f64> + Sync> Objective for FnObjective<F> {
    fn evaluate(&self, params: &ParamSchedule) -> Result<f64> {
        (self.f)(params)
    }

    fn free_mask(&self, p: usize) -> Vec<bool> {
        match &self.mask {
            Some(m) if m.len() == 4 * p => m.clone(),
            _ => vec![true; 4 * p],
        }
    }

    fn describe(&self) -> Value {
        json!({ "objective": "closure" })
    }
}
