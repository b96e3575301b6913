//! The `d → ∞` limit of the finite iteration with rescaled edge angles
//! `α̃ = α√d`. The tree weights become Gaussian in the path variables, so
//! the state of the recursion is a `(2p+2)²` matrix of second moments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bitpath::path_len;
use super::distribution::SiteDistribution;
use super::finite::{
    assumption_check, fbar_table_with_limit, is_quarter_pi_multiple, phase_vector, FiniteFormula, PHASE_SIGN,
};
use crate::error::{check_len, Error, Result};
use crate::hamiltonians::Pauli;
use crate::simulator::ParamSchedule;

/// Default resource guard on the depth.
pub const DEFAULT_MAX_DEPTH: usize = 10;
const RESIDUE_TOL: f64 = 1e-9;

/// Angles of the rescaled problem; `γ` is identically zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledParams {
    pub alpha_tilde: Vec<f64>,
    pub beta: Vec<f64>,
    #[serde(default)]
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
}

impl RescaledParams {
    pub fn new(alpha_tilde: Vec<f64>, beta: Vec<f64>, delta: Vec<f64>) -> Self {
        let gamma = vec![0.0; alpha_tilde.len()];
        Self {
            alpha_tilde,
            beta,
            gamma,
            delta,
        }
    }

    /// `β_j = k_j π/4`.
    pub fn from_quarter_turns(alpha_tilde: Vec<f64>, beta_quarters: &[i64], delta: Vec<f64>) -> Self {
        let beta = beta_quarters
            .iter()
            .map(|&k| k as f64 * std::f64::consts::FRAC_PI_4)
            .collect();
        Self::new(alpha_tilde, beta, delta)
    }

    pub fn depth(&self) -> usize {
        self.alpha_tilde.len()
    }

    /// Reads a schedule whose `alpha` holds `α̃`.
    pub fn from_schedule(s: &ParamSchedule) -> Self {
        Self {
            alpha_tilde: s.alpha.clone(),
            beta: s.beta.clone(),
            gamma: s.gamma.clone(),
            delta: s.delta.clone(),
        }
    }

    /// The schedule with `alpha` holding `α̃` unscaled.
    pub fn as_schedule(&self) -> ParamSchedule {
        ParamSchedule {
            alpha: self.alpha_tilde.clone(),
            beta: self.beta.clone(),
            gamma: if self.gamma.is_empty() {
                vec![0.0; self.depth()]
            } else {
                self.gamma.clone()
            },
            delta: self.delta.clone(),
        }
    }

    /// Finite-degree schedule with `α = α̃/√d`.
    pub fn at_degree(&self, d: usize) -> ParamSchedule {
        let mut s = self.as_schedule();
        let scale = (d as f64).sqrt();
        s.alpha.iter_mut().for_each(|a| *a /= scale);
        s
    }
}

/// Checks the restrictions of the rescaled formula, reporting every violation.
pub fn validate(params: &RescaledParams, dist: &SiteDistribution) -> Result<()> {
    let p = params.depth();
    let mut problems = Vec::new();
    if p == 0 {
        problems.push("depth must be at least 1".to_string());
    }
    if params.beta.len() != p || params.delta.len() != p {
        problems.push(format!(
            "lengths differ: alpha_tilde {p}, beta {}, delta {}",
            params.beta.len(),
            params.delta.len()
        ));
    }
    if !params.gamma.is_empty() && params.gamma.len() != p {
        problems.push(format!("gamma has length {}, expected {p}", params.gamma.len()));
    }
    let all = params
        .alpha_tilde
        .iter()
        .chain(&params.beta)
        .chain(&params.gamma)
        .chain(&params.delta);
    if all.clone().any(|x| !x.is_finite()) {
        problems.push("angles must be finite".into());
    }
    for (j, g) in params.gamma.iter().enumerate() {
        if *g != 0.0 {
            problems.push(format!("gamma[{j}] = {g} must be 0"));
        }
    }
    for (j, b) in params.beta.iter().enumerate() {
        if !is_quarter_pi_multiple(*b) {
            problems.push(format!("beta[{j}] = {b} is not a multiple of π/4"));
        }
    }
    if !dist.initial_on_x_axis() {
        problems.push("initial states must lie on the ±x̂ axis".into());
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidInput(problems.join("; ")))
    }
}

/// One level of the second-moment recursion, indexed by storage position.
#[derive(Clone, Debug, PartialEq)]
pub struct GMatrix {
    level: usize,
    size: usize,
    entries: Vec<Complex64>,
}

impl GMatrix {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.entries[j * self.size + k]
    }
}

/// Per-position values `K^σ_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct KVector {
    pub sigma: Pauli,
    pub entries: Vec<Complex64>,
}

/// In-place Walsh–Hadamard transform: `out[y] = Σ_z w(z) Π_{l ∈ y} z_l`.
fn walsh_hadamard(w: &mut [Complex64]) {
    let mut h = 1;
    while h < w.len() {
        for base in (0..w.len()).step_by(h << 1) {
            for i in base..base + h {
                let (a, b) = (w[i], w[i + h]);
                w[i] = a + b;
                w[i + h] = a - b;
            }
        }
        h <<= 1;
    }
}

/// `exp(-½ Σ_{jk} G_jk ã_j ã_k z_j z_k)` for every path, by a Gray-code walk
/// that updates the quadratic form one flipped position at a time.
fn gaussian_weights(g: &GMatrix, a: &[f64]) -> Vec<Complex64> {
    let len = g.size;
    let m: Vec<Complex64> = (0..len * len)
        .map(|jk| g.entries[jk] * a[jk / len] * a[jk % len])
        .collect();
    let mut z = vec![1.0f64; len];
    // r_j = Σ_k M_jk z_k
    let mut r: Vec<Complex64> = (0..len).map(|j| (0..len).map(|k| m[j * len + k]).sum()).collect();
    let mut q: Complex64 = r.iter().sum();
    let dim = 1usize << len;
    let mut out = vec![Complex64::default(); dim];
    let mut code = 0usize;
    out[0] = (-0.5 * q).exp();
    for i in 1..dim {
        let l = i.trailing_zeros() as usize;
        code ^= 1 << l;
        let zl = z[l];
        q -= 4.0 * zl * (r[l] - m[l * len + l] * zl);
        for (k, rk) in r.iter_mut().enumerate() {
            *rk -= 2.0 * zl * m[k * len + l];
        }
        z[l] = -zl;
        out[code] = (-0.5 * q).exp();
    }
    out
}

fn second_moments(level: usize, len: usize, weighted: &[Complex64]) -> GMatrix {
    let mut w = weighted.to_vec();
    walsh_hadamard(&mut w);
    let mut entries = vec![Complex64::default(); len * len];
    for j in 0..len {
        for k in 0..len {
            let y = if j == k { 0 } else { 1 << j | 1 << k };
            entries[j * len + k] = w[y];
        }
    }
    GMatrix {
        level,
        size: len,
        entries,
    }
}

/// Cached tables for one parameter set.
#[derive(Clone, Debug)]
pub struct InfiniteFormula {
    params: RescaledParams,
    dist: SiteDistribution,
    phases: Vec<f64>,
    g: Vec<GMatrix>,
    top_weights: Vec<Complex64>,
}

impl InfiniteFormula {
    pub fn new(params: &RescaledParams, dist: &SiteDistribution) -> Result<Self> {
        Self::with_limit(params, dist, DEFAULT_MAX_DEPTH)
    }

    pub fn with_limit(params: &RescaledParams, dist: &SiteDistribution, max_depth: usize) -> Result<Self> {
        validate(params, dist)?;
        let p = params.depth();
        if p > max_depth {
            return Err(Error::SizeLimit {
                what: "infinite-degree formula depth",
                size: p,
                limit: max_depth,
            });
        }
        let len = path_len(p);
        let schedule = params.as_schedule();
        let fbar_i = fbar_table_with_limit(Pauli::I, &schedule, dist, max_depth)?;
        let phases = phase_vector(&params.alpha_tilde);
        let mut g = vec![second_moments(0, len, fbar_i.values())];
        let mut weights = gaussian_weights(&g[0], &phases);
        for m in 1..p {
            let w: Vec<Complex64> = fbar_i.values().iter().zip(&weights).map(|(f, h)| f * h).collect();
            g.push(second_moments(m, len, &w));
            weights = gaussian_weights(&g[m], &phases);
        }
        Ok(Self {
            params: params.clone(),
            dist: dist.clone(),
            phases,
            g,
            top_weights: weights,
        })
    }

    /// `G^{(0)}, …, G^{(p-1)}`.
    pub fn g_sequence(&self) -> &[GMatrix] {
        &self.g
    }

    pub fn k_vector(&self, sigma: Pauli) -> Result<KVector> {
        let schedule = self.params.as_schedule();
        let table = fbar_table_with_limit(sigma, &schedule, &self.dist, self.params.depth())?;
        let len = path_len(self.params.depth());
        let mut entries = vec![Complex64::default(); len];
        for (z, (f, h)) in table.values().iter().zip(&self.top_weights).enumerate() {
            let fh = f * h;
            if fh == Complex64::default() {
                continue;
            }
            for (i, e) in entries.iter_mut().enumerate() {
                if z >> i & 1 == 1 {
                    *e -= fh;
                } else {
                    *e += fh;
                }
            }
        }
        Ok(KVector { sigma, entries })
    }

    /// Limit of `-(√d/2) E⟨σ_L σ_R⟩`; zero whenever either label is `X`.
    pub fn nu(&self, sigma_l: Pauli, sigma_r: Pauli) -> Result<f64> {
        if sigma_l == Pauli::X || sigma_r == Pauli::X {
            return Ok(0.0);
        }
        if sigma_l == Pauli::I || sigma_r == Pauli::I {
            return Err(Error::InvalidInput("labels must be X, Y or Z".into()));
        }
        let kl = self.k_vector(sigma_l)?;
        let kr = if sigma_r == sigma_l {
            kl.clone()
        } else {
            self.k_vector(sigma_r)?
        };
        let sum: Complex64 = self
            .phases
            .iter()
            .zip(kl.entries.iter().zip(&kr.entries))
            .map(|(a, (x, y))| x * y * *a)
            .sum();
        let value = Complex64::new(0.0, -0.5 * PHASE_SIGN) * sum;
        if value.im.abs() > RESIDUE_TOL {
            return Err(Error::Residue {
                context: "ν imaginary part",
                residue: value.im.abs(),
                tolerance: RESIDUE_TOL,
            });
        }
        Ok(value.re)
    }

    /// `ν(Y,Y) + ν(Z,Z)`; the `X` term vanishes. Larger is better.
    pub fn heisenberg_objective(&self) -> Result<NuReport> {
        let nu_yy = self.nu(Pauli::Y, Pauli::Y)?;
        let nu_zz = self.nu(Pauli::Z, Pauli::Z)?;
        Ok(NuReport {
            nu_yy,
            nu_zz,
            objective: nu_yy + nu_zz,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuReport {
    pub nu_yy: f64,
    pub nu_zz: f64,
    pub objective: f64,
}

pub fn g_sequence(params: &RescaledParams) -> Result<Vec<GMatrix>> {
    Ok(InfiniteFormula::new(params, &SiteDistribution::SignedX)?.g)
}

pub fn k_vector(params: &RescaledParams, sigma: Pauli) -> Result<KVector> {
    InfiniteFormula::new(params, &SiteDistribution::SignedX)?.k_vector(sigma)
}

pub fn nu(params: &RescaledParams, sigma_l: Pauli, sigma_r: Pauli) -> Result<f64> {
    InfiniteFormula::new(params, &SiteDistribution::SignedX)?.nu(sigma_l, sigma_r)
}

pub fn heisenberg_objective(params: &RescaledParams) -> Result<f64> {
    Ok(InfiniteFormula::new(params, &SiteDistribution::SignedX)?
        .heisenberg_objective()?
        .objective)
}

/// Largest `|Σ f̄^X H^{(k)}|` over `k ≤ p` at branching `d`, the quantity the
/// `X` zero branch relies on.
pub fn assumption_residual(params: &RescaledParams, d: usize) -> Result<f64> {
    validate(params, &SiteDistribution::SignedX)?;
    let schedule = params.at_degree(d);
    let mut worst: f64 = 0.0;
    for k in 0..=params.depth() {
        worst = worst.max(assumption_check(&schedule, d, k)?);
    }
    Ok(worst)
}

/// Fails with a diagnostic when the `X` zero branch is not supported.
pub fn require_assumption(params: &RescaledParams, d: usize) -> Result<()> {
    let residual = assumption_residual(params, d)?;
    if residual > RESIDUE_TOL {
        return Err(Error::Residue {
            context: "X-term assumption residual",
            residue: residual,
            tolerance: RESIDUE_TOL,
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub d: usize,
    /// `2 ν / √d`.
    pub predicted: f64,
    /// `-(⟨XX⟩ + ⟨YY⟩ + ⟨ZZ⟩)` from the finite iteration at `α = α̃/√d`.
    pub finite: f64,
    pub relative_deviation: f64,
}

pub fn consistency_with_finite(params: &RescaledParams, d: usize) -> Result<ConsistencyReport> {
    let objective = heisenberg_objective(params)?;
    let predicted = 2.0 * objective / (d as f64).sqrt();
    let schedule = params.at_degree(d);
    check_len("rescaled depth", params.depth(), schedule.depth())?;
    let finite = -FiniteFormula::new(&schedule, d, SiteDistribution::SignedX)?
        .pair_expectations()?
        .heisenberg();
    Ok(ConsistencyReport {
        d,
        predicted,
        finite,
        relative_deviation: (predicted - finite).abs() / finite.abs().max(f64::MIN_POSITIVE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::distribution::PointSet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_params(p: usize, rng: &mut ChaCha8Rng) -> RescaledParams {
        RescaledParams::from_quarter_turns(
            (0..p).map(|_| rng.gen_range(-1.5..1.5)).collect(),
            &(0..p).map(|_| rng.gen_range(0..4)).collect::<Vec<_>>(),
            (0..p).map(|_| rng.gen_range(-1.5..1.5)).collect(),
        )
    }

    fn brute_second_moments(weights: &[Complex64], len: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); len * len];
        for (z, w) in weights.iter().enumerate() {
            for j in 0..len {
                for k in 0..len {
                    let s = if (z >> j ^ z >> k) & 1 == 1 { -1.0 } else { 1.0 };
                    out[j * len + k] += w * s;
                }
            }
        }
        out
    }

    #[test]
    fn validation_reports_violations() {
        let ok = RescaledParams::from_quarter_turns(vec![0.1, 0.2], &[1, 0], vec![0.3, 0.4]);
        assert!(validate(&ok, &SiteDistribution::SignedX).is_ok());
        let mut bad = ok.clone();
        bad.gamma = vec![0.1, 0.0];
        assert!(validate(&bad, &SiteDistribution::SignedX).is_err());
        let z = SiteDistribution::Aligned(PointSet::uniform(vec![[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).unwrap());
        assert!(validate(&ok, &z).is_err());
        let mut offgrid = ok;
        offgrid.beta[0] = 0.3;
        assert!(validate(&offgrid, &SiteDistribution::SignedX).is_err());
    }

    #[test]
    fn gaussian_weights_match_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let params = random_params(2, &mut rng);
        let f = InfiniteFormula::new(&params, &SiteDistribution::SignedX).unwrap();
        let g = &f.g_sequence()[0];
        let a = phase_vector(&params.alpha_tilde);
        let fast = gaussian_weights(g, &a);
        let len = g.size();
        for (z, w) in fast.iter().enumerate() {
            let s: Vec<f64> = (0..len).map(|l| if z >> l & 1 == 1 { -1.0 } else { 1.0 }).collect();
            let mut q = Complex64::default();
            for j in 0..len {
                for k in 0..len {
                    q += g.get(j, k) * a[j] * a[k] * s[j] * s[k];
                }
            }
            assert!((w - (-0.5 * q).exp()).norm() < 1e-12);
        }
    }

    #[test]
    fn walsh_moments_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w: Vec<Complex64> = (0..64).map(|_| Complex64::new(rng.gen(), rng.gen())).collect();
        let g = second_moments(0, 6, &w);
        let brute = brute_second_moments(&w, 6);
        assert_eq!(brute.len(), 36);
        for (a, b) in g.entries.iter().zip(&brute) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn base_level_is_symmetric_with_unit_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = random_params(3, &mut rng);
        let seq = g_sequence(&params).unwrap();
        assert_eq!(seq.len(), 3);
        let g = &seq[0];
        for j in 0..g.size() {
            assert!((g.get(j, j) - 1.0).norm() < 1e-10);
            for k in 0..g.size() {
                assert!((g.get(j, k) - g.get(k, j)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_alpha_cases() {
        let params = RescaledParams::from_quarter_turns(vec![0.0, 0.0], &[1, 0], vec![0.4, -0.2]);
        let seq = g_sequence(&params).unwrap();
        for (a, b) in seq[0].entries.iter().zip(&seq[1].entries) {
            assert!((a - b).norm() < 1e-14);
        }
        assert_eq!(nu(&params, Pauli::Z, Pauli::Z).unwrap(), 0.0);
        assert_eq!(nu(&params, Pauli::X, Pauli::Z).unwrap(), 0.0);
        let p1 = RescaledParams::from_quarter_turns(vec![0.5], &[0], vec![0.3]);
        assert_eq!(g_sequence(&p1).unwrap().len(), 1);
    }

    #[test]
    fn approaches_finite_degree_at_large_d() {
        let params = RescaledParams::from_quarter_turns(vec![0.6, 0.9], &[1, 0], vec![1.42, 0.47]);
        let near = consistency_with_finite(&params, 10_000).unwrap();
        assert!(near.relative_deviation < 1e-2, "{near:?}");
        let far = consistency_with_finite(&params, 100).unwrap();
        assert!(near.relative_deviation < far.relative_deviation);
    }
}
