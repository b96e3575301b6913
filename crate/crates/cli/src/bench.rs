//! Multi-graph sweeps at desk scale. Each suite expands into independent
//! points, every point gets a seed derived from the master seed and its
//! index, and rows come back in point order whatever the worker count.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use hamqaoa::formula::infinite::RescaledParams;
use hamqaoa::formula::{FiniteFormula, SiteDistribution};
use hamqaoa::hamiltonians::pauli_pair_expectation;
use hamqaoa::optimize::{
    minimize_local, strategy_gi, strategy_random, FiniteFormulaObjective, InfiniteFormulaObjective, InsertPolicy,
    LocalConfig, Sense, StatevectorObjective,
};
use hamqaoa::{
    extremal_eigenspace, graphs, AnsatzSpec, Extremum, HamiltonianSpec, InteractionGraph, ParamSchedule, Pauli,
    PresetKind, SignString,
};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Minutes on a laptop.
    Desk,
    /// Seconds; for checking the plumbing.
    Smoke,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long, value_enum, default_value = "desk")]
    scale: Scale,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output (`series,x,y,yerr,n,seed`).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Sidecar with sizes, seeds, substitutions and per-point errors.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub series: String,
    pub x: f64,
    pub y: f64,
    pub yerr: f64,
    pub n: usize,
    pub seed: u64,
}

impl Row {
    fn single(series: impl Into<String>, x: f64, y: f64, seed: u64) -> Self {
        Self {
            series: series.into(),
            x,
            y,
            yerr: 0.0,
            n: 1,
            seed,
        }
    }

    /// Mean and standard error over `ys`.
    fn mean(series: impl Into<String>, x: f64, ys: &[f64], seed: u64) -> Self {
        let n = ys.len();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let yerr = if n > 1 {
            let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            series: series.into(),
            x,
            y: mean,
            yerr,
            n,
            seed,
        }
    }
}

/// One unit of work.
struct Point {
    label: String,
    params: Value,
    job: Box<dyn Fn(u64) -> Result<Vec<Row>> + Send + Sync>,
}

fn point(label: String, params: Value, job: impl Fn(u64) -> Result<Vec<Row>> + Send + Sync + 'static) -> Point {
    Point {
        label,
        params,
        job: Box::new(job),
    }
}

pub fn derived_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64 + 1);
    rng.next_u64()
}

fn lbfgs() -> LocalConfig {
    LocalConfig::lbfgs()
}

fn ring_signs(g: &InteractionGraph) -> Result<SignString> {
    Ok(graphs::choose_signs(g, graphs::SignPolicy::Exact, 0)?)
}

/// Optimizes at depth `p` from `restarts` random starts, returns the best
/// energy and its fidelity with the targeted extremal eigenspace.
fn energy_and_fidelity(
    spec: &HamiltonianSpec,
    which: Extremum,
    p: usize,
    restarts: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let signs = ring_signs(spec.graph())?;
    let sense = match which {
        Extremum::Max => Sense::Maximize,
        Extremum::Min => Sense::Minimize,
    };
    let obj = StatevectorObjective::new(spec, &AnsatzSpec::Simplified(signs), sense)?;
    let r = strategy_random(&obj, p, restarts, seed, &lbfgs())?;
    let best = r.best();
    let gs = extremal_eigenspace(spec, which)?;
    let psi = obj.engine().state(&best.params)?;
    Ok((spec.energy(&psi)?, gs.fidelity(&psi)?))
}

fn fig2(scale: Scale) -> (Vec<Point>, Vec<String>) {
    let (ps, ds, restarts): (Vec<usize>, Vec<usize>, usize) = match scale {
        Scale::Desk => (vec![1, 2], vec![3, 5, 10, 33, 100], 10),
        Scale::Smoke => (vec![1], vec![3, 10], 2),
    };
    let mut pts = Vec::new();
    for &p in &ps {
        pts.push(point(
            format!("nu p={p}"),
            json!({ "p": p, "restarts": 4 * restarts }),
            move |seed| {
                let r = strategy_random(&InfiniteFormulaObjective::new(), p, 4 * restarts, seed, &lbfgs())?;
                Ok(vec![Row::single(format!("nu_p{p}"), 0.0, -r.best().value, seed)])
            },
        ));
        for &d in &ds {
            pts.push(point(
                format!("finite p={p} d={d}"),
                json!({ "p": p, "d": d, "restarts": restarts }),
                move |seed| {
                    // seeded from the rescaled optimum as well as random starts
                    let limit = strategy_random(&InfiniteFormulaObjective::new(), p, restarts, seed, &lbfgs())?;
                    let limit = RescaledParams::from_schedule(&limit.best().params);
                    let obj = FiniteFormulaObjective::heisenberg(d);
                    let random = strategy_random(&obj, p, restarts, seed, &lbfgs())?.best().value;
                    let seeded = minimize_local(&obj, &limit.at_degree(d), &lbfgs())?.value;
                    let scaled = -random.min(seeded) * (d as f64).sqrt() / 2.0;
                    Ok(vec![Row::single(format!("scaled_finite_p{p}"), d as f64, scaled, seed)])
                },
            ));
        }
    }
    let subs = vec![
        format!("d in {ds:?} instead of a dense sweep"),
        format!("{restarts} random restarts per point plus one start from the rescaled optimum"),
        "nu rows carry x = 0".into(),
    ];
    (pts, subs)
}

/// Exhaustive average of `⟨σσ⟩` on edge 0 over all sign strings.
fn sign_average(g: &InteractionGraph, params: &ParamSchedule) -> Result<[f64; 3]> {
    let n = g.n_vertices();
    let e = g.edges()[0];
    let mut acc = [0.0; 3];
    for mask in 0..1u64 << n {
        let psi = hamqaoa::prepare_hqs(g, &AnsatzSpec::Simplified(SignString::from_mask(n, mask)), params)?;
        for (k, s) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
            acc[k] += pauli_pair_expectation(&psi, e.u, s, e.v, s)?;
        }
    }
    Ok(acc.map(|x| x / (1u64 << n) as f64))
}

fn fig3(scale: Scale) -> (Vec<Point>, Vec<String>) {
    let (cases, samples): (Vec<(usize, usize)>, usize) = match scale {
        Scale::Desk => (vec![(1, 1), (1, 2), (1, 3), (2, 1)], 4),
        Scale::Smoke => (vec![(1, 1)], 2),
    };
    let mut pts = Vec::new();
    for (d, p) in cases {
        for k in 0..samples {
            pts.push(point(
                format!("d={d} p={p} sample {k}"),
                json!({ "d": d, "p": p, "sample": k }),
                move |seed| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let x: Vec<f64> = (0..4 * p).map(|_| rand::Rng::gen_range(&mut rng, -1.5..1.5)).collect();
                    let params = ParamSchedule::from_flat(p, &x)?;
                    let g = if d == 1 {
                        InteractionGraph::ring(2 * p + 2)?
                    } else {
                        InteractionGraph::heawood()
                    };
                    let f = FiniteFormula::new(&params, d, SiteDistribution::SignedX)?.pair_expectations()?;
                    let sim = sign_average(&g, &params)?;
                    let fx = k as f64;
                    let formula = f.xx + f.yy + f.zz;
                    let averaged: f64 = sim.iter().sum();
                    Ok(vec![
                        Row::single(format!("formula_d{d}_p{p}"), fx, formula, seed),
                        Row::single(format!("average_d{d}_p{p}"), fx, averaged, seed),
                        Row::single(format!("gap_d{d}_p{p}"), fx, (formula - averaged).abs(), seed),
                    ])
                },
            ));
        }
    }
    let subs = vec![
        "exhaustive average over all sign strings instead of 100 samples".into(),
        "ring(2p+2) for d=1 and the Heawood graph for d=2 (p=1 only at desk scale)".into(),
        format!("{samples} random parameter sets per case; y is the per-edge QMC expectation"),
    ];
    (pts, subs)
}

fn fig4(scale: Scale) -> (Vec<Point>, Vec<String>) {
    let (p_max, samples, ensembles): (usize, usize, Vec<(&'static str, usize, usize)>) = match scale {
        // (family, n, ensemble size)
        Scale::Desk => (
            5,
            8,
            vec![
                ("ring", 6, 1),
                ("ring", 8, 1),
                ("ring", 10, 1),
                ("regular3", 8, 4),
                ("erdos_renyi", 8, 4),
            ],
        ),
        Scale::Smoke => (2, 2, vec![("ring", 4, 1)]),
    };
    let mut pts = Vec::new();
    for (family, n, size) in ensembles {
        pts.push(point(
            format!("{family} n={n}"),
            json!({ "family": family, "n": n, "ensemble": size, "p_max": p_max }),
            move |seed| {
                let mut per_level: Vec<Vec<f64>> = vec![Vec::new(); p_max];
                let mut agm = Vec::new();
                for k in 0..size {
                    let gseed = seed.wrapping_add(k as u64);
                    let g = match family {
                        "ring" => InteractionGraph::ring(n)?,
                        "regular3" => InteractionGraph::random_regular(n, 3, gseed)?,
                        _ => InteractionGraph::erdos_renyi(n, 0.5, gseed)?,
                    };
                    let spec = HamiltonianSpec::qmc(g.clone());
                    let lmax = extremal_eigenspace(&spec, Extremum::Max)?.value;
                    let signs = graphs::choose_signs(&g, graphs::SignPolicy::Exact, 0)?;
                    let obj = StatevectorObjective::qmc(&g, &AnsatzSpec::Simplified(signs.clone()))?;
                    let r = strategy_gi(&obj, p_max, samples, InsertPolicy::End, gseed, &lbfgs())?;
                    for (l, level) in r.levels.iter().enumerate() {
                        per_level[l].push(-level.value / lmax);
                    }
                    agm.push(graphs_agm(&g, &signs)? / lmax);
                }
                let mut rows: Vec<Row> = per_level
                    .iter()
                    .enumerate()
                    .map(|(l, ys)| Row::mean(format!("{family}_n{n}"), (l + 1) as f64, ys, seed))
                    .collect();
                rows.push(Row::mean(format!("{family}_n{n}_agm"), 1.0, &agm, seed));
                Ok(rows)
            },
        ));
    }
    let subs = vec![
        "ensembles of 4 graphs instead of 8, at most 10 vertices".into(),
        "y is the QMC energy divided by the largest eigenvalue".into(),
        format!("greedy insertion with {samples} level-1 samples, depth up to {p_max}"),
    ];
    (pts, subs)
}

fn graphs_agm(g: &InteractionGraph, s: &SignString) -> Result<f64> {
    Ok(hamqaoa::simulator::agm_optimize(g, s)?.1)
}

/// Depth sweep of ground-space fidelity on rings.
fn fidelity_sweep(
    prefix: &'static str,
    spec_of: fn(usize) -> Result<HamiltonianSpec>,
    which: Extremum,
    cases: Vec<(usize, Vec<usize>, usize)>,
) -> Vec<Point> {
    let mut pts = Vec::new();
    for (n, ps, restarts) in cases {
        for p in ps {
            pts.push(point(
                format!("{prefix} n={n} p={p}"),
                json!({ "n": n, "p": p, "restarts": restarts }),
                move |seed| {
                    let (_, fid) = energy_and_fidelity(&spec_of(n)?, which, p, restarts, seed)?;
                    Ok(vec![Row::single(format!("{prefix}_n{n}"), p as f64, fid, seed)])
                },
            ));
        }
    }
    pts
}

fn qmc_ring(n: usize) -> Result<HamiltonianSpec> {
    Ok(HamiltonianSpec::qmc(InteractionGraph::ring(n)?))
}

fn xy_ring(n: usize) -> Result<HamiltonianSpec> {
    Ok(HamiltonianSpec::preset(
        PresetKind::Xy,
        InteractionGraph::ring(n)?,
        None,
        None,
    )?)
}

fn xxz_ring(n: usize) -> Result<HamiltonianSpec> {
    Ok(HamiltonianSpec::preset(
        PresetKind::Xxz,
        InteractionGraph::ring(n)?,
        Some(0.5),
        Some(0.5),
    )?)
}

fn fig5(scale: Scale) -> (Vec<Point>, Vec<String>) {
    let cases = match scale {
        Scale::Desk => vec![
            (4, (1..=8).collect(), 8),
            (6, (1..=12).collect(), 4),
            (8, vec![1, 2, 4, 8, 12, 16], 2),
        ],
        Scale::Smoke => vec![(4, vec![1, 2], 1)],
    };
    let subs = vec![
        "rings of 4, 6 and 8 vertices only".into(),
        "few random restarts per depth; N=8 at a subset of depths".into(),
        "y is the fidelity with the top eigenspace of QMC".into(),
    ];
    (fidelity_sweep("qmc", qmc_ring, Extremum::Max, cases), subs)
}

/// Smallest depth reaching fidelity `1 - 1e-6` on the XY ring.
fn fig6(scale: Scale) -> (Vec<Point>, Vec<String>) {
    let (ns, restarts): (Vec<usize>, usize) = match scale {
        Scale::Desk => (vec![4, 6, 8], 4),
        Scale::Smoke => (vec![4], 2),
    };
    let pts = ns
        .into_iter()
        .map(|n| {
            point(
                format!("xy n={n}"),
                json!({ "n": n, "restarts": restarts, "p_max": n }),
                move |seed| {
                    let spec = xy_ring(n)?;
                    let mut rows = Vec::new();
                    let mut found = f64::NAN;
                    for p in 1..=n {
                        let (_, fid) =
                            energy_and_fidelity(&spec, Extremum::Min, p, restarts, seed.wrapping_add(p as u64))?;
                        rows.push(Row::single(format!("xy_n{n}_fidelity"), p as f64, fid, seed));
                        if fid >= 1.0 - 1e-6 {
                            found = p as f64;
                            break;
                        }
                    }
                    rows.push(Row::single("xy_exact_depth", n as f64, found, seed));
                    Ok(rows)
                },
            )
        })
        .collect();
    let subs = vec![
        "rings up to 8 vertices; depth search stops at p = N".into(),
        "exact means fidelity at least 1 - 1e-6; NaN when not reached".into(),
    ];
    (pts, subs)
}

fn fig7(scale: Scale) -> (Vec<Point>, Vec<String>) {
    let cases = match scale {
        Scale::Desk => vec![(4, (1..=8).collect(), 8), (6, (1..=12).collect(), 4)],
        Scale::Smoke => vec![(4, vec![1, 2], 1)],
    };
    let subs = vec![
        "XXZ with delta = h = 0.5 on rings of 4 and 6 vertices".into(),
        "y is the fidelity with the ground space".into(),
    ];
    (fidelity_sweep("xxz", xxz_ring, Extremum::Min, cases), subs)
}

pub fn csv(rows: &[Row]) -> String {
    let mut out = String::from("series,x,y,yerr,n,seed\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{},{}", r.series, r.x, r.y, r.yerr, r.n, r.seed).unwrap();
    }
    out
}

pub fn run(a: BenchArgs) -> Result<Value> {
    let (points, substitutions) = match a.suite {
        Suite::Fig2 => fig2(a.scale),
        Suite::Fig3 => fig3(a.scale),
        Suite::Fig4 => fig4(a.scale),
        Suite::Fig5 => fig5(a.scale),
        Suite::Fig6 => fig6(a.scale),
        Suite::Fig7 => fig7(a.scale),
    };
    let outcomes: Vec<(u64, Result<Vec<Row>>)> = points
        .par_iter()
        .enumerate()
        .map(|(i, pt)| {
            let seed = derived_seed(a.seed, i);
            (seed, (pt.job)(seed))
        })
        .collect();

    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for (pt, (seed, outcome)) in points.iter().zip(outcomes) {
        match outcome {
            Ok(r) => {
                entries.push(json!({ "point": pt.label, "seed": seed, "params": pt.params, "rows": r.len() }));
                rows.extend(r);
            }
            Err(e) => {
                entries.push(json!({ "point": pt.label, "seed": seed, "params": pt.params, "rows": 0 }));
                errors.push(json!({ "point": pt.label, "seed": seed, "error": format!("{e:#}") }));
            }
        }
    }
    let manifest = json!({
        "suite": a.suite,
        "scale": a.scale,
        "master_seed": a.seed,
        "seed_derivation": "ChaCha8 seeded with the master seed, stream = point index + 1, first u64",
        "substitutions": substitutions,
        "points": entries,
        "errors": errors,
    });
    if let Some(path) = &a.csv {
        std::fs::write(path, csv(&rows)).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &a.manifest {
        std::fs::write(path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(json!({
        "suite": a.suite,
        "scale": a.scale,
        "seed": a.seed,
        "rows": rows,
        "errors": manifest["errors"],
    }))
}
