use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::local::{minimize_local, LocalConfig, LocalResult};
use super::objective::{FiniteFormulaObjective, Objective, StatevectorObjective};
use crate::error::{Error, Result};
use crate::formula::SiteDistribution;
use crate::hamiltonians::HamiltonianSpec;
use crate::simulator::{AnsatzSpec, ParamSchedule};

/// Best result at one depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub p: usize,
    pub params: ParamSchedule,
    pub value: f64,
    /// Every local search run at this depth, in stream order.
    pub candidates: Vec<LocalResult>,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub strategy: String,
    pub objective: Value,
    pub seed: u64,
    pub restarts: usize,
    pub levels: Vec<LevelReport>,
    pub evaluations: usize,
    pub wall_time_s: f64,
}

impl StrategyReport {
    pub fn best(&self) -> &LevelReport {
        self.levels.last().expect("at least one level")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InsertPolicy {
    /// Append the zero layer after the last one.
    End,
    /// Try every insertion point and keep the best.
    AllPositions,
}

impl std::str::FromStr for InsertPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "end" => Ok(Self::End),
            "all-positions" | "all" => Ok(Self::AllPositions),
            _ => Err(Error::InvalidInput(format!("unknown insert policy `{s}`"))),
        }
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Lowest value wins; ties go to the earliest run.
fn pick_best(results: &[LocalResult]) -> usize {
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.value < results[best].value {
            best = i;
        }
    }
    best
}

fn level_from(p: usize, results: Vec<LocalResult>) -> LevelReport {
    let best = pick_best(&results);
    LevelReport {
        p,
        params: results[best].params.clone(),
        value: results[best].value,
        evaluations: results.iter().map(|r| r.evaluations).sum(),
        candidates: results,
    }
}

fn random_level<O: Objective + ?Sized>(
    obj: &O,
    p: usize,
    restarts: usize,
    seed: u64,
    config: &LocalConfig,
) -> Result<LevelReport> {
    if restarts == 0 {
        return Err(Error::InvalidInput("restarts must be at least 1".into()));
    }
    if p == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    let results = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let init = obj.sample_init(p, &mut stream_rng(seed, r as u64));
            minimize_local(obj, &init, config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(level_from(p, results))
}

/// Best of `restarts` local searches from uniform random starts.
pub fn strategy_random<O: Objective + ?Sized>(
    obj: &O,
    p: usize,
    restarts: usize,
    seed: u64,
    config: &LocalConfig,
) -> Result<StrategyReport> {
    let start = Instant::now();
    let level = random_level(obj, p, restarts, seed, config)?;
    Ok(StrategyReport {
        strategy: "random".into(),
        objective: obj.describe(),
        seed,
        restarts,
        evaluations: level.evaluations,
        levels: vec![level],
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Grows the circuit one layer at a time, seeding each depth from the best
/// schedule one layer shallower with a zero layer inserted.
pub fn strategy_gi<O: Objective + ?Sized>(
    obj: &O,
    p_max: usize,
    samples_level1: usize,
    insert: InsertPolicy,
    seed: u64,
    config: &LocalConfig,
) -> Result<StrategyReport> {
    strategy_gi_beam(obj, p_max, samples_level1, 1, insert, seed, config)
}

/// Indices of the `keep` best candidates with pairwise distinct values.
fn best_distinct(results: &[LocalResult], keep: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..results.len()).collect();
    // stable sort keeps the lowest index first among ties
    order.sort_by(|&a, &b| results[a].value.total_cmp(&results[b].value));
    let mut picked: Vec<usize> = Vec::new();
    for i in order {
        if picked.len() == keep {
            break;
        }
        if picked
            .iter()
            .all(|&j| (results[j].value - results[i].value).abs() > DISTINCT_TOL)
        {
            picked.push(i);
        }
    }
    picked
}

/// Values closer than this count as the same optimum when filling the beam.
const DISTINCT_TOL: f64 = 1e-7;

/// Greedy insertion: every depth starts from the `keep` best distinct sets
/// of the previous depth, each with a zero layer inserted.
pub fn strategy_gi_beam<O: Objective + ?Sized>(
    obj: &O,
    p_max: usize,
    samples_level1: usize,
    keep: usize,
    insert: InsertPolicy,
    seed: u64,
    config: &LocalConfig,
) -> Result<StrategyReport> {
    if keep == 0 {
        return Err(Error::InvalidInput("beam width must be at least 1".into()));
    }
    let start = Instant::now();
    let mut levels = vec![random_level(obj, 1, samples_level1, seed, config)?];
    for p in 1..p_max {
        let prev = levels.last().expect("level 1 exists");
        let positions: Vec<usize> = match insert {
            InsertPolicy::End => vec![p],
            InsertPolicy::AllPositions => (0..=p).collect(),
        };
        let seeds: Vec<ParamSchedule> = if keep == 1 {
            vec![prev.params.clone()]
        } else {
            best_distinct(&prev.candidates, keep)
                .into_iter()
                .map(|i| prev.candidates[i].params.clone())
                .collect()
        };
        let starts: Vec<ParamSchedule> = seeds
            .iter()
            .flat_map(|s| positions.iter().map(move |&at| s.with_zero_layer(at)))
            .collect();
        let results = starts
            .par_iter()
            .map(|init| minimize_local(obj, init, config))
            .collect::<Result<Vec<_>>>()?;
        let mut level = level_from(p + 1, results);
        if level.value > prev.value {
            // the seed itself is as good as the previous level
            level.params = prev.params.with_zero_layer(p);
            level.value = prev.value;
        }
        levels.push(level);
    }
    for w in levels.windows(2) {
        assert!(w[1].value <= w[0].value, "greedy levels must not get worse");
    }
    Ok(StrategyReport {
        strategy: if keep == 1 {
            "gi".into()
        } else {
            format!("gi_beam{keep}")
        },
        objective: obj.describe(),
        seed,
        restarts: samples_level1,
        evaluations: levels.iter().map(|l| l.evaluations).sum(),
        levels,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// The branching `d = round(avg degree) - 1` used to pick formula parameters.
pub fn formula_degree(avg_degree: f64) -> Result<usize> {
    let d = avg_degree.round() - 1.0;
    // NaN falls through to the error as well
    if avg_degree.is_nan() || avg_degree < 2.0 {
        return Err(Error::Precondition(format!(
            "average degree {avg_degree} is below 2; no formula branching applies"
        )));
    }
    Ok(d as usize)
}

/// Optimizes the finite-degree formula greedily up to depth `p`, then
/// polishes each level's formula optimum on the graph itself.
///
/// `levels` holds the polished graph values. The formula optimum per depth
/// is in `objective["formula_values"]`.
pub fn strategy_ifp(
    spec: &HamiltonianSpec,
    ansatz: &AnsatzSpec,
    sense: super::objective::Sense,
    p: usize,
    restarts: usize,
    seed: u64,
    config: &LocalConfig,
) -> Result<StrategyReport> {
    let start = Instant::now();
    let g = spec.graph();
    let d = formula_degree(g.average_degree())?;
    let coeffs = spec.edge_coeffs();
    let Some(first) = coeffs.first() else {
        return Err(Error::Precondition("graph has no edges".into()));
    };
    if coeffs.iter().any(|c| c != first) || spec.field().iter().any(|h| *h != 0.0) {
        return Err(Error::Precondition(
            "formula seeding needs identical edge coefficients and no field".into(),
        ));
    }
    let formula = FiniteFormulaObjective::new(d, *first, SiteDistribution::SignedX, sense);
    let seeded = strategy_gi(&formula, p, restarts, InsertPolicy::End, seed, config)?;
    let graph_obj = StatevectorObjective::new(spec, ansatz, sense)?;
    let polished = seeded
        .levels
        .par_iter()
        .map(|l| minimize_local(&graph_obj, &l.params, config))
        .collect::<Result<Vec<_>>>()?;
    let levels: Vec<LevelReport> = polished
        .into_iter()
        .zip(&seeded.levels)
        .map(|(r, f)| LevelReport {
            p: f.p,
            params: r.params.clone(),
            value: r.value,
            evaluations: r.evaluations,
            candidates: vec![r],
        })
        .collect();
    let mut objective = graph_obj.describe();
    objective["formula_d"] = d.into();
    objective["formula_values"] = seeded.levels.iter().map(|l| l.value).collect::<Vec<_>>().into();
    Ok(StrategyReport {
        strategy: "ifp".into(),
        objective,
        seed,
        restarts,
        evaluations: seeded.evaluations + levels.iter().map(|l| l.evaluations).sum::<usize>(),
        levels,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{InteractionGraph, SignString};
    use crate::optimize::objective::Sense;

    fn single_edge() -> StatevectorObjective {
        let g = InteractionGraph::new(2, [(0, 1)]).unwrap();
        StatevectorObjective::qmc(&g, &AnsatzSpec::Simplified(SignString::alternating(2))).unwrap()
    }

    #[test]
    fn single_edge_reaches_qmc_optimum() {
        let obj = single_edge();
        let r = strategy_random(&obj, 1, 20, 3, &LocalConfig::nelder_mead()).unwrap();
        assert!((obj.energy_of(r.best().value) - 2.0).abs() < 1e-6, "{}", r.best().value);
    }

    #[test]
    fn one_restart_is_one_local_search() {
        let obj = single_edge();
        let cfg = LocalConfig::lbfgs();
        let r = strategy_random(&obj, 1, 1, 11, &cfg).unwrap();
        let init = obj.sample_init(1, &mut stream_rng(11, 0));
        let direct = minimize_local(&obj, &init, &cfg).unwrap();
        assert_eq!(r.best().value, direct.value);
        assert_eq!(r.best().params, direct.params);
    }

    #[test]
    fn deterministic_per_seed() {
        let obj = single_edge();
        let a = strategy_random(&obj, 2, 4, 5, &LocalConfig::lbfgs()).unwrap();
        let b = strategy_random(&obj, 2, 4, 5, &LocalConfig::lbfgs()).unwrap();
        assert_eq!(a.levels, b.levels);
    }

    #[test]
    fn greedy_levels_are_monotone() {
        let g = InteractionGraph::ring(6).unwrap();
        let obj = StatevectorObjective::qmc(&g, &AnsatzSpec::Simplified(SignString::alternating(6))).unwrap();
        let r = strategy_gi(&obj, 3, 4, InsertPolicy::End, 1, &LocalConfig::lbfgs()).unwrap();
        assert_eq!(r.levels.len(), 3);
        for w in r.levels.windows(2) {
            assert!(w[1].value <= w[0].value);
        }
    }

    #[test]
    fn beam_starts_from_distinct_sets() {
        let g = InteractionGraph::ring(4).unwrap();
        let ring = StatevectorObjective::qmc(&g, &AnsatzSpec::Simplified(SignString::alternating(4))).unwrap();
        let r = strategy_gi_beam(&ring, 3, 6, 2, InsertPolicy::End, 2, &LocalConfig::lbfgs()).unwrap();
        assert_eq!(r.strategy, "gi_beam2");
        for w in r.levels.windows(2) {
            assert!(w[1].value <= w[0].value);
        }
        // one start per kept set
        assert!(r.levels[1].candidates.len() <= 2);
        assert!(strategy_gi_beam(&ring, 2, 2, 0, InsertPolicy::End, 0, &LocalConfig::lbfgs()).is_err());
        let same = strategy_gi(&ring, 3, 6, InsertPolicy::End, 2, &LocalConfig::lbfgs()).unwrap();
        let narrow = strategy_gi_beam(&ring, 3, 6, 1, InsertPolicy::End, 2, &LocalConfig::lbfgs()).unwrap();
        assert_eq!(same.levels, narrow.levels);
    }

    #[test]
    fn zero_layer_keeps_value() {
        let obj = single_edge();
        let s = ParamSchedule::from_layers(&[[0.3, 0.2, -0.1, 0.7]]).unwrap();
        let v = obj.evaluate(&s).unwrap();
        for at in 0..=1 {
            assert!((obj.evaluate(&s.with_zero_layer(at)).unwrap() - v).abs() < 1e-14);
        }
    }

    #[test]
    fn ifp_rejects_low_degree() {
        let g = InteractionGraph::path(4).unwrap();
        let spec = HamiltonianSpec::qmc(g);
        let ansatz = AnsatzSpec::Simplified(SignString::alternating(4));
        let err = strategy_ifp(&spec, &ansatz, Sense::Maximize, 1, 2, 0, &LocalConfig::lbfgs());
        assert!(matches!(err, Err(Error::Precondition(_))));
        assert!(formula_degree(2.0).is_ok());
    }
}
