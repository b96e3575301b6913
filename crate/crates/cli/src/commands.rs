use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use hamqaoa::formula::distribution::PointSet;
use hamqaoa::formula::{FiniteFormula, InfiniteFormula, RescaledParams, SiteDistribution};
use hamqaoa::graphs::{self, choose_signs, GraphKind, SignPolicy};
use hamqaoa::optimize::{
    self, strategy_gi_beam, strategy_ifp, strategy_random, FiniteFormulaObjective, InfiniteFormulaObjective,
    InsertPolicy, LocalConfig, Objective, Sense, StatevectorObjective,
};
use hamqaoa::simulator::{agm_equivalent_params, agm_optimize};
use hamqaoa::{extremal_eigenspace, io, AnsatzSpec, EdgeCoeffs, Extremum, HamiltonianSpec, InteractionGraph};

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn read_graph(path: &Path) -> Result<InteractionGraph> {
    graphs::json::from_value(read_json(path)?).with_context(|| format!("graph in {}", path.display()))
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Kind {
    Ring,
    Path,
    Complete,
    Grid,
    RandomRegular,
    ErdosRenyi,
    Heawood,
}

#[derive(Args, Debug)]
pub struct GenGraphArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Vertex count.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Edge probability for Erdős–Rényi graphs.
    #[arg(long, default_value_t = 0.5)]
    probability: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn need(name: &str, v: Option<usize>) -> Result<usize> {
    v.with_context(|| format!("--{name} is required for this graph kind"))
}

pub fn gen_graph(a: GenGraphArgs) -> Result<Value> {
    let kind = match a.kind {
        Kind::Ring => GraphKind::Ring { n: need("n", a.n)? },
        Kind::Path => GraphKind::Path { n: need("n", a.n)? },
        Kind::Complete => GraphKind::Complete { n: need("n", a.n)? },
        Kind::Grid => GraphKind::Grid {
            rows: need("rows", a.rows)?,
            cols: need("cols", a.cols)?,
        },
        Kind::RandomRegular => GraphKind::RandomRegular {
            n: need("n", a.n)?,
            degree: a.degree,
        },
        Kind::ErdosRenyi => GraphKind::ErdosRenyi {
            n: need("n", a.n)?,
            probability: a.probability,
        },
        Kind::Heawood => GraphKind::Heawood,
    };
    let g = graphs::generate(&kind, a.seed)?;
    let mut v = graphs::json::to_value(&g);
    v["generator"] = serde_json::to_value(&kind)?;
    v["seed"] = a.seed.into();
    v["girth"] = serde_json::to_value(graphs::girth(&g))?;
    Ok(v)
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Policy {
    Exact,
    Local,
    Random,
}

#[derive(Args, Debug)]
pub struct MaxcutArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Defaults to exhaustive search when the graph is small enough.
    #[arg(long, value_enum)]
    policy: Option<Policy>,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn sign_policy(p: Option<Policy>, n: usize, restarts: usize) -> SignPolicy {
    match p {
        Some(Policy::Exact) => SignPolicy::Exact,
        Some(Policy::Local) => SignPolicy::LocalSearch { restarts },
        Some(Policy::Random) => SignPolicy::Random,
        None if n <= graphs::DEFAULT_EXHAUSTIVE_LIMIT => SignPolicy::Exact,
        None => SignPolicy::LocalSearch { restarts },
    }
}

pub fn maxcut(a: MaxcutArgs) -> Result<Value> {
    let g = read_graph(&a.graph)?;
    let policy = sign_policy(a.policy, g.n_vertices(), a.restarts);
    let s = choose_signs(&g, policy, a.seed)?;
    let cut = graphs::cut_value(&g, &s)?;
    Ok(json!({ "signs": s.as_slice(), "cut": cut, "policy": format!("{policy:?}"), "seed": a.seed }))
}

#[derive(Args, Debug, Clone)]
pub struct SpecArgs {
    /// A preset kind (qmc, heisenberg, xy, xxz) or a spec JSON file.
    #[arg(long, default_value = "qmc")]
    spec: String,
    /// Graph JSON file; required with a preset kind.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
}

impl SpecArgs {
    fn load(&self) -> Result<HamiltonianSpec> {
        let path = Path::new(&self.spec);
        if path.is_file() {
            ensure!(
                self.delta.is_none() && self.h.is_none(),
                "--delta and --h apply to preset kinds only"
            );
            return io::spec_from_value(read_json(path)?).with_context(|| format!("spec in {}", path.display()));
        }
        let graph = self
            .graph
            .as_deref()
            .context("--graph is required with a preset --spec")?;
        let kind = self.spec.parse().context("--spec is neither a file nor a preset kind")?;
        Ok(HamiltonianSpec::preset(
            kind,
            read_graph(graph)?,
            self.delta,
            self.h,
        )?)
    }

    /// QMC is maximized; every other family is minimized.
    fn default_target(&self) -> Extremum {
        if self.spec == "qmc" {
            Extremum::Max
        } else {
            Extremum::Min
        }
    }
}

#[derive(Args, Debug)]
pub struct ExactArgs {
    #[command(flatten)]
    spec: SpecArgs,
}

pub fn exact(a: ExactArgs) -> Result<Value> {
    let spec = a.spec.load()?;
    let hi = extremal_eigenspace(&spec, Extremum::Max)?;
    let lo = extremal_eigenspace(&spec, Extremum::Min)?;
    Ok(json!({
        "lambda_max": hi.value,
        "lambda_min": lo.value,
        "degeneracy_max": hi.degeneracy(),
        "degeneracy_min": lo.degeneracy(),
        "max_residual": hi.max_residual.max(lo.max_residual),
        "n": spec.n_qubits(),
    }))
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Target {
    Max,
    Min,
}

#[derive(Args, Debug, Clone)]
pub struct AnsatzArgs {
    /// Sign-string JSON for the simplified ansatz.
    #[arg(long, conflicts_with = "ansatz")]
    signs: Option<PathBuf>,
    /// Ansatz JSON (simplified or general).
    #[arg(long)]
    ansatz: Option<PathBuf>,
}

impl AnsatzArgs {
    /// Falls back to maximum-cut signs.
    fn load(&self, g: &InteractionGraph) -> Result<AnsatzSpec> {
        if let Some(p) = &self.ansatz {
            return Ok(io::ansatz_from_value(read_json(p)?)?);
        }
        if let Some(p) = &self.signs {
            return Ok(AnsatzSpec::Simplified(io::signs_from_value(read_json(p)?)?));
        }
        let policy = sign_policy(None, g.n_vertices(), 32);
        Ok(AnsatzSpec::Simplified(choose_signs(g, policy, 0)?))
    }
}

/// Fidelity is skipped above this many qubits.
const FIDELITY_LIMIT: usize = 20;

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    ansatz: AnsatzArgs,
    /// Parameter JSON `{"alpha","beta","gamma","delta"}`.
    #[arg(long)]
    params: PathBuf,
    /// Eigenspace for the fidelity; defaults to the one the family optimizes.
    #[arg(long, value_enum)]
    target: Option<Target>,
    #[arg(long)]
    no_fidelity: bool,
}

pub fn simulate(a: SimulateArgs) -> Result<Value> {
    let spec = a.spec.load()?;
    let ansatz = a.ansatz.load(spec.graph())?;
    let params = io::params_from_value(read_json(&a.params)?)?;
    let psi = hamqaoa::prepare_hqs(spec.graph(), &ansatz, &params)?;
    let mut out = json!({
        "energy": spec.energy(&psi)?,
        "norm_residual": (psi.norm() - 1.0).abs(),
        "p": params.depth(),
    });
    if !a.no_fidelity && spec.n_qubits() <= FIDELITY_LIMIT {
        let which = match a.target {
            Some(Target::Max) => Extremum::Max,
            Some(Target::Min) => Extremum::Min,
            None => a.spec.default_target(),
        };
        let gs = extremal_eigenspace(&spec, which)?;
        out["fidelity"] = gs.fidelity(&psi)?.into();
        out["eigenvalue"] = gs.value.into();
    }
    Ok(out)
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ObjectiveKind {
    Statevector,
    FormulaFinite,
    FormulaInfinite,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum StrategyKind {
    Random,
    Gi,
    Ifp,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Method {
    NelderMead,
    Lbfgs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Insert {
    End,
    AllPositions,
}

#[derive(Args, Debug, Clone)]
pub struct LocalArgs {
    #[arg(long, value_enum, default_value = "nelder-mead")]
    method: Method,
    #[arg(long, default_value_t = 20_000)]
    max_evals: usize,
}

impl LocalArgs {
    pub fn config(&self) -> LocalConfig {
        let base = match self.method {
            Method::NelderMead => LocalConfig::nelder_mead(),
            Method::Lbfgs => LocalConfig::lbfgs(),
        };
        base.with_max_evals(self.max_evals)
    }
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[arg(long, value_enum, default_value = "statevector")]
    objective: ObjectiveKind,
    #[arg(long, value_enum, default_value = "random")]
    strategy: StrategyKind,
    #[arg(long)]
    p: usize,
    /// Random restarts (level-1 samples for the greedy strategy).
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    ansatz: AnsatzArgs,
    /// Branching for the finite-degree objective.
    #[arg(long)]
    d: Option<usize>,
    /// Edge coefficients for the finite-degree objective.
    #[arg(long, default_value = "qmc")]
    coeffs: String,
    /// Fixed `β` pattern in quarter turns for the infinite-degree objective.
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<i64>>,
    #[arg(long, value_enum, default_value = "end")]
    insert: Insert,
    /// Distinct sets carried to the next depth by the greedy strategy.
    #[arg(long, default_value_t = 1)]
    keep: usize,
    #[command(flatten)]
    local: LocalArgs,
}

pub fn parse_coeffs(text: &str) -> Result<EdgeCoeffs> {
    if let Some(rest) = text.strip_prefix("custom:") {
        let value = if Path::new(rest).is_file() {
            read_json(Path::new(rest))?
        } else {
            serde_json::from_str(rest).context("parsing custom coefficients")?
        };
        return Ok(io::coeffs_from_value(value)?);
    }
    Ok(match text {
        "qmc" => EdgeCoeffs::QMC,
        "xy" => EdgeCoeffs::XY,
        "heisenberg" => EdgeCoeffs::HEISENBERG,
        other => bail!("unknown coefficients `{other}` (qmc, xy, heisenberg or custom:<json>)"),
    })
}

fn run_strategy<O: Objective>(obj: &O, a: &OptimizeArgs, cfg: &LocalConfig) -> Result<optimize::StrategyReport> {
    let insert = match a.insert {
        Insert::End => InsertPolicy::End,
        Insert::AllPositions => InsertPolicy::AllPositions,
    };
    Ok(match a.strategy {
        StrategyKind::Random => strategy_random(obj, a.p, a.restarts, a.seed, cfg)?,
        StrategyKind::Gi => strategy_gi_beam(obj, a.p, a.restarts, a.keep, insert, a.seed, cfg)?,
        StrategyKind::Ifp => bail!("the ifp strategy runs on the statevector objective"),
    })
}

pub fn optimize(a: OptimizeArgs) -> Result<Value> {
    ensure!(a.p >= 1, "--p must be at least 1");
    let cfg = a.local.config();
    let report = match a.objective {
        ObjectiveKind::Statevector => {
            let spec = a.spec.load()?;
            let ansatz = a.ansatz.load(spec.graph())?;
            let sense = match a.spec.default_target() {
                Extremum::Max => Sense::Maximize,
                Extremum::Min => Sense::Minimize,
            };
            match a.strategy {
                StrategyKind::Ifp => strategy_ifp(&spec, &ansatz, sense, a.p, a.restarts, a.seed, &cfg)?,
                _ => {
                    let mut obj = StatevectorObjective::new(&spec, &ansatz, sense)?;
                    if let Some(g) = &a.spec.graph {
                        obj = obj.with_label(g.display().to_string());
                    }
                    run_strategy(&obj, &a, &cfg)?
                }
            }
        }
        ObjectiveKind::FormulaFinite => {
            let d = a.d.context("--d is required for the finite-degree objective")?;
            let coeffs = parse_coeffs(&a.coeffs)?;
            let sense = if coeffs == EdgeCoeffs::QMC {
                Sense::Maximize
            } else {
                Sense::Minimize
            };
            let obj = FiniteFormulaObjective::new(d, coeffs, SiteDistribution::SignedX, sense);
            run_strategy(&obj, &a, &cfg)?
        }
        ObjectiveKind::FormulaInfinite => {
            let obj = match &a.beta {
                Some(q) => {
                    ensure!(q.len() == a.p, "--beta needs {} entries", a.p);
                    InfiniteFormulaObjective::with_beta(q.clone())
                }
                None => InfiniteFormulaObjective::new(),
            };
            let report = run_strategy(&obj, &a, &cfg)?;
            let best = RescaledParams::from_schedule(&report.best().params);
            let mut out = serde_json::to_value(&report)?;
            out["best_rescaled"] = io::rescaled_to_value(&best)?;
            return Ok(out);
        }
    };
    Ok(serde_json::to_value(report)?)
}

#[derive(Args, Debug)]
pub struct FormulaFiniteArgs {
    /// Expected depth; checked against the parameter file.
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    d: usize,
    /// `signed-x` or `pointset:<file>`.
    #[arg(long, default_value = "signed-x")]
    dist: String,
    #[arg(long, default_value = "qmc")]
    coeffs: String,
    #[arg(long)]
    params: PathBuf,
}

pub fn parse_dist(text: &str) -> Result<SiteDistribution> {
    if text == "signed-x" {
        return Ok(SiteDistribution::SignedX);
    }
    if let Some(file) = text.strip_prefix("pointset:") {
        let body = std::fs::read_to_string(file).with_context(|| format!("reading {file}"))?;
        return Ok(SiteDistribution::Aligned(PointSet::from_json(&body)?));
    }
    bail!("unknown distribution `{text}` (signed-x or pointset:<file>)")
}

pub fn formula_finite(a: FormulaFiniteArgs) -> Result<Value> {
    let params = io::params_from_value(read_json(&a.params)?)?;
    if let Some(p) = a.p {
        ensure!(
            p == params.depth(),
            "--p {p} but the parameter file has depth {}",
            params.depth()
        );
    }
    let coeffs = parse_coeffs(&a.coeffs)?;
    let e = FiniteFormula::new(&params, a.d, parse_dist(&a.dist)?)?.pair_expectations()?;
    Ok(json!({
        "edge_energy": e.energy(&coeffs),
        "expectations": e,
        "p": params.depth(),
        "d": a.d,
    }))
}

#[derive(Args, Debug)]
pub struct FormulaInfiniteArgs {
    /// `{"alpha_tilde", "beta" (quarter turns), "delta"}`.
    #[arg(long)]
    params: PathBuf,
    /// Also report the X-term residual at this branching.
    #[arg(long)]
    check_d: Option<usize>,
}

pub fn formula_infinite(a: FormulaInfiniteArgs) -> Result<Value> {
    let params = io::rescaled_from_value(read_json(&a.params)?)?;
    let report = InfiniteFormula::new(&params, &SiteDistribution::SignedX)?.heisenberg_objective()?;
    let mut out = serde_json::to_value(report)?;
    out["p"] = params.depth().into();
    if let Some(d) = a.check_d {
        out["x_term_residual"] = hamqaoa::formula::infinite::assumption_residual(&params, d)?.into();
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct GaugeFixArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = optimize::gauge::DEFAULT_TOL)]
    tol: f64,
}

pub fn gauge_fix(a: GaugeFixArgs) -> Result<Value> {
    let params = io::params_from_value(read_json(&a.params)?)?;
    Ok(io::params_to_value(&optimize::gauge_fix_with_tol(&params, a.d, a.tol)))
}

#[derive(Args, Debug)]
pub struct AgmArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    signs: Option<PathBuf>,
}

pub fn agm(a: AgmArgs) -> Result<Value> {
    let g = read_graph(&a.graph)?;
    let s = match &a.signs {
        Some(p) => io::signs_from_value(read_json(p)?)?,
        None => choose_signs(&g, sign_policy(None, g.n_vertices(), 32), 0)?,
    };
    let (theta, energy) = agm_optimize(&g, &s)?;
    Ok(json!({
        "theta": theta,
        "energy": energy,
        "signs": s.as_slice(),
        "equivalent_params": io::params_to_value(&agm_equivalent_params(theta)),
    }))
}
