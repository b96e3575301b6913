//! Local minimizers over the free coordinates of a schedule.
//!
//! The search runs in unwrapped coordinates so simplex and quasi-Newton
//! geometry stay intact; every evaluation sees the periodic blocks wrapped
//! modulo `π`, and the returned point is wrapped the same way.

use serde::{Deserialize, Serialize};

use super::objective::Objective;
use crate::error::{Error, Result};
use crate::simulator::{wrap_angle, Block, ParamSchedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalMethod {
    /// Downhill simplex with dimension-adaptive coefficients.
    NelderMead,
    /// Limited-memory BFGS; uses the analytic gradient when the objective
    /// has one and central differences otherwise.
    Lbfgs,
}

impl std::str::FromStr for LocalMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nelder-mead" | "nm" => Ok(Self::NelderMead),
            "lbfgs" | "l-bfgs" => Ok(Self::Lbfgs),
            _ => Err(Error::InvalidInput(format!("unknown local method `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalConfig {
    pub method: LocalMethod,
    pub max_evals: usize,
    /// Simplex diameter (or step length) below which the search stops.
    pub xtol: f64,
    /// Relative decrease per L-BFGS step below which the search stops.
    pub ftol: f64,
    /// Gradient max-norm below which L-BFGS stops.
    pub gtol: f64,
    pub initial_step: f64,
    pub fd_step: f64,
    pub memory: usize,
}

impl Default for LocalConfig {
    fn default() -> Self {
        Self {
            method: LocalMethod::NelderMead,
            max_evals: 20_000,
            xtol: 1e-8,
            ftol: 1e-13,
            gtol: 1e-9,
            initial_step: 0.2,
            fd_step: 1e-6,
            memory: 10,
        }
    }
}

impl LocalConfig {
    pub fn nelder_mead() -> Self {
        Self::default()
    }

    pub fn lbfgs() -> Self {
        Self {
            method: LocalMethod::Lbfgs,
            ..Self::default()
        }
    }

    pub fn with_max_evals(mut self, n: usize) -> Self {
        self.max_evals = n;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalResult {
    pub params: ParamSchedule,
    pub value: f64,
    pub evaluations: usize,
    /// False when the evaluation budget ran out first.
    pub converged: bool,
}

/// Maps free coordinates to full schedules and counts evaluations.
struct Problem<'a, O: Objective + ?Sized> {
    obj: &'a O,
    p: usize,
    base: Vec<f64>,
    free: Vec<usize>,
    periodic: Vec<bool>,
    evals: usize,
}

impl<'a, O: Objective + ?Sized> Problem<'a, O> {
    fn new(obj: &'a O, init: &ParamSchedule) -> Result<Self> {
        init.validate()?;
        let p = init.depth();
        let mask = obj.free_mask(p);
        crate::error::check_len("free mask", 4 * p, mask.len())?;
        let periodic = (0..4 * p).map(|i| obj.periodic(Block::ALL[i / p.max(1)])).collect();
        Ok(Self {
            obj,
            p,
            base: init.flat(),
            free: (0..4 * p).filter(|&i| mask[i]).collect(),
            periodic,
            evals: 0,
        })
    }

    fn start(&self) -> Vec<f64> {
        self.free.iter().map(|&i| self.base[i]).collect()
    }

    fn schedule(&self, y: &[f64]) -> ParamSchedule {
        let mut x = self.base.clone();
        for (&i, &v) in self.free.iter().zip(y) {
            x[i] = if self.periodic[i] { wrap_angle(v) } else { v };
        }
        ParamSchedule::from_flat(self.p, &x).expect("free coordinates are finite")
    }

    fn value(&mut self, y: &[f64]) -> Result<f64> {
        self.evals += 1;
        if y.iter().any(|v| !v.is_finite()) {
            return Ok(f64::INFINITY);
        }
        let v = self.obj.evaluate(&self.schedule(y))?;
        Ok(if v.is_finite() { v } else { f64::INFINITY })
    }

    fn value_and_gradient(&mut self, y: &[f64], h: f64) -> Result<(f64, Vec<f64>)> {
        if let Some((v, g)) = self.obj.value_and_gradient(&self.schedule(y))? {
            self.evals += 1;
            return Ok((v, self.free.iter().map(|&i| g[i]).collect()));
        }
        let v = self.value(y)?;
        let mut g = vec![0.0; y.len()];
        let mut z = y.to_vec();
        for k in 0..y.len() {
            z[k] = y[k] + h;
            let fp = self.value(&z)?;
            z[k] = y[k] - h;
            let fm = self.value(&z)?;
            z[k] = y[k];
            g[k] = (fp - fm) / (2.0 * h);
        }
        Ok((v, g))
    }
}

/// Minimizes `obj` from `init`. The returned value never exceeds the value at
/// `init`; fixed coordinates are left as given.
pub fn minimize_local<O: Objective + ?Sized>(
    obj: &O,
    init: &ParamSchedule,
    config: &LocalConfig,
) -> Result<LocalResult> {
    let mut prob = Problem::new(obj, init)?;
    let y0 = prob.start();
    let (y, value, converged) = if y0.is_empty() {
        (y0.clone(), prob.value(&y0)?, true)
    } else {
        match config.method {
            LocalMethod::NelderMead => nelder_mead(&mut prob, y0, config)?,
            LocalMethod::Lbfgs => lbfgs(&mut prob, y0, config)?,
        }
    };
    Ok(LocalResult {
        params: prob.schedule(&y),
        value,
        evaluations: prob.evals,
        converged,
    })
}

fn nelder_mead<O: Objective + ?Sized>(
    prob: &mut Problem<'_, O>,
    y0: Vec<f64>,
    config: &LocalConfig,
) -> Result<(Vec<f64>, f64, bool)> {
    let n = y0.len();
    let nf = n as f64;
    // adaptive coefficients reduce to the standard ones at n = 2
    let nc = nf.max(2.0);
    let (rho, chi, psi, sigma) = (1.0, 1.0 + 2.0 / nc, 0.75 - 0.5 / nc, 1.0 - 1.0 / nc);

    let mut simplex = vec![y0.clone()];
    for k in 0..n {
        let mut v = y0.clone();
        v[k] += config.initial_step;
        simplex.push(v);
    }
    let mut values = Vec::with_capacity(n + 1);
    for v in &simplex {
        values.push(prob.value(v)?);
    }

    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter < config.xtol {
            return Ok((simplex.swap_remove(0), values[0], true));
        }
        if prob.evals >= config.max_evals {
            return Ok((simplex.swap_remove(0), values[0], false));
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            centroid.iter_mut().zip(v).for_each(|(c, x)| *c += x / nf);
        }
        let worst = simplex[n].clone();
        let reflected = lerp(&centroid, &worst, -rho);
        let fr = prob.value(&reflected)?;
        if fr < values[0] {
            let expanded = lerp(&centroid, &worst, -rho * chi);
            let fe = prob.value(&expanded)?;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = lerp(&centroid, &worst, -rho * psi);
            let f = prob.value(&c)?;
            (c, f)
        } else {
            let c = lerp(&centroid, &worst, psi);
            let f = prob.value(&c)?;
            (c, f)
        };
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for k in 1..=n {
            simplex[k] = lerp(&best, &simplex[k], sigma);
            values[k] = prob.value(&simplex[k])?;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lbfgs<O: Objective + ?Sized>(
    prob: &mut Problem<'_, O>,
    y0: Vec<f64>,
    config: &LocalConfig,
) -> Result<(Vec<f64>, f64, bool)> {
    let h = config.fd_step;
    let mut y = y0;
    let (mut f, mut g) = prob.value_and_gradient(&y, h)?;
    let mut history: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    loop {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < config.gtol {
            return Ok((y, f, true));
        }
        if prob.evals >= config.max_evals {
            return Ok((y, f, false));
        }
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, t, r) in history.iter().rev() {
            let a = r * dot(s, &q);
            q.iter_mut().zip(t).for_each(|(qi, ti)| *qi -= a * ti);
            alphas.push(a);
        }
        if let Some((s, t, _)) = history.last() {
            let scale = dot(s, t) / dot(t, t);
            q.iter_mut().for_each(|v| *v *= scale);
        } else {
            let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = (config.initial_step / gmax).min(1.0);
            q.iter_mut().for_each(|v| *v *= scale);
        }
        for ((s, t, r), a) in history.iter().zip(alphas.iter().rev()) {
            let b = r * dot(t, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 {
            history.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        // backtracking with Armijo condition
        let mut step = 1.0;
        let mut accepted = None;
        while prob.evals < config.max_evals {
            let trial: Vec<f64> = y.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            let ft = prob.value(&trial)?;
            if ft <= f + 1e-4 * step * slope {
                accepted = Some(trial);
                break;
            }
            step *= 0.5;
            if step * dir.iter().fold(0.0f64, |m, v| m.max(v.abs())) < config.xtol {
                break;
            }
        }
        let Some(trial) = accepted else {
            return Ok((y, f, prob.evals < config.max_evals));
        };
        let (ft, gt) = prob.value_and_gradient(&trial, h)?;
        if ft > f {
            // finite-difference noise; keep the better point
            return Ok((y, f, true));
        }
        let s: Vec<f64> = trial.iter().zip(&y).map(|(a, b)| a - b).collect();
        let t: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let st = dot(&s, &t);
        if st > 1e-16 {
            history.push((s.clone(), t, 1.0 / st));
            if history.len() > config.memory {
                history.remove(0);
            }
        }
        let small_step = s.iter().fold(0.0f64, |m, v| m.max(v.abs())) < config.xtol;
        let small_gain = f - ft <= config.ftol * f.abs().max(1.0);
        y = trial;
        f = ft;
        g = gt;
        if small_step || small_gain {
            return Ok((y, f, true));
        }
    }
}
