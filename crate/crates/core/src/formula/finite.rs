//! Finite-degree lightcone iteration: expected two-site Pauli correlations
//! of the HamQAOA state on `(d+1)`-regular graphs of girth above `2p + 1`,
//! averaged over a per-vertex distribution of initial states and axes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bitpath::{path_len, t_of, BitPath, MAX_PATH_DEPTH};
use super::distribution::SiteDistribution;
use crate::error::{check_len, Error, Result};
use crate::hamiltonians::{EdgeCoeffs, Pauli};
use crate::reduce::pairwise;
use crate::simulator::ParamSchedule;
use crate::statevector::{bloch_state, mat2_mul, rotation, Mat2};

/// Default resource guard on the depth.
pub const DEFAULT_MAX_DEPTH: usize = 6;
/// Largest tree branching accepted.
pub const MAX_DEGREE: usize = 1_000_000;
/// Tolerance on imaginary parts of Hermitian expectations.
pub const RESIDUE_TOL: f64 = 1e-9;

/// Sign of the edge phase `exp(PHASE_SIGN · i 𝒜·(x z))`, fixed by the
/// circuit convention `e^{-iαA}` (checked against exact simulation).
pub(crate) const PHASE_SIGN: f64 = 1.0;

/// Per-position edge phase: `(α_1, …, α_p, 0, 0, -α_p, …, -α_1)`.
pub fn phase_vector(alpha: &[f64]) -> Vec<f64> {
    let p = alpha.len();
    let mut a = Vec::with_capacity(path_len(p));
    a.extend_from_slice(alpha);
    a.extend([0.0, 0.0]);
    a.extend(alpha.iter().rev().map(|x| -x));
    a
}

/// `f̄^σ` on every bit path of depth `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct FBarTable {
    sigma: Pauli,
    p: usize,
    values: Vec<Complex64>,
}

impl FBarTable {
    pub fn sigma(&self) -> Pauli {
        self.sigma
    }

    pub fn depth(&self) -> usize {
        self.p
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, z: &BitPath) -> Complex64 {
        self.values[z.bits() as usize]
    }

    pub fn sum(&self) -> Complex64 {
        pairwise(&self.values)
    }
}

/// `H_d^{(k)}` on every bit path.
#[derive(Clone, Debug, PartialEq)]
pub struct HTable {
    level: usize,
    values: Vec<Complex64>,
}

impl HTable {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, z: &BitPath) -> Complex64 {
        self.values[z.bits() as usize]
    }
}

fn check_depth(p: usize, limit: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidInput("the iteration needs depth p ≥ 1".into()));
    }
    let limit = limit.min(MAX_PATH_DEPTH);
    if p > limit {
        return Err(Error::SizeLimit {
            what: "formula depth",
            size: p,
            limit,
        });
    }
    Ok(())
}

fn check_degree(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DEGREE {
        return Err(Error::InvalidInput(format!(
            "branching d must be in 1..={MAX_DEGREE}, got {d}"
        )));
    }
    Ok(())
}

/// `E_j = e^{iβX} e^{iγZ} e^{iδ n·σ}` for `j = 1..p`.
fn layer_unitaries(params: &ParamSchedule, axis: [f64; 3]) -> Vec<Mat2> {
    (0..params.depth())
        .map(|j| {
            let bx = rotation([1.0, 0.0, 0.0], -params.beta[j]);
            let cz = rotation([0.0, 0.0, 1.0], -params.gamma[j]);
            let dn = rotation(axis, -params.delta[j]);
            mat2_mul(&mat2_mul(&bx, &cz), &dn)
        })
        .collect()
}

/// `⟨m|z_1⟩ Π_j ⟨z_j|E_j|z_{j+1}⟩` for every half path `(z_1, …, z_{p+1})`,
/// bit `k` holding `z_{k+1}`.
fn half_chain(m: [f64; 3], layers: &[Mat2]) -> Vec<Complex64> {
    let p = layers.len();
    let m_amp = bloch_state(m);
    let mut table = vec![Complex64::default(); 1 << (p + 1)];
    for (y, out) in table.iter_mut().enumerate() {
        let mut acc = m_amp[y & 1].conj();
        for (j, e) in layers.iter().enumerate() {
            acc *= e[y >> j & 1][y >> (j + 1) & 1];
        }
        *out = acc;
    }
    table
}

fn reverse_bits(x: usize, width: usize) -> usize {
    (0..width).fold(0, |acc, k| acc | ((x >> k & 1) << (width - 1 - k)))
}

/// Accumulates `weight · f^σ_{m,n}` into `out`.
fn accumulate_f(out: &mut [Complex64], sigma: Pauli, m: [f64; 3], n: [f64; 3], params: &ParamSchedule, weight: f64) {
    let p = params.depth();
    let half = p + 1;
    let left = half_chain(m, &layer_unitaries(params, n));
    let mask = (1usize << half) - 1;
    for (z, o) in out.iter_mut().enumerate() {
        let l = z & mask;
        let r = z >> half;
        // r holds (z_{-(p+1)}, …, z_{-1}); the mirrored chain reads it backwards
        let rl = reverse_bits(r, half);
        let mid = sigma.element(l >> p & 1, r & 1);
        if mid == Complex64::default() {
            continue;
        }
        *o += left[l] * mid * left[rl].conj() * weight;
    }
}

/// Single-vertex chain `f^σ_{m,n}(z)`.
pub fn f_value(sigma: Pauli, m: [f64; 3], n: [f64; 3], params: &ParamSchedule, z: &BitPath) -> Result<Complex64> {
    params.validate()?;
    check_depth(params.depth(), MAX_PATH_DEPTH)?;
    check_len("bit-path depth", params.depth(), z.depth())?;
    let layers = layer_unitaries(params, n);
    let p = params.depth();
    let bit = |j: i64| -> usize { (z.get(j).expect("valid index") == -1) as usize };
    let m_amp = bloch_state(m);
    let mut acc = m_amp[bit(1)].conj();
    for j in 1..=p as i64 {
        acc *= layers[j as usize - 1][bit(j)][bit(j + 1)];
    }
    let top = p as i64 + 1;
    acc *= sigma.element(bit(top), bit(-top));
    for j in (1..=p as i64).rev() {
        // ⟨z_{-(j+1)}|E_j†|z_{-j}⟩
        acc *= layers[j as usize - 1][bit(-j)][bit(-(j + 1))].conj();
    }
    acc *= m_amp[bit(-1)];
    Ok(acc)
}

/// `f̄^σ = E_{m,n}[f^σ_{m,n}]` as a table.
pub fn fbar_table(sigma: Pauli, params: &ParamSchedule, dist: &SiteDistribution) -> Result<FBarTable> {
    fbar_table_with_limit(sigma, params, dist, DEFAULT_MAX_DEPTH)
}

pub fn fbar_table_with_limit(
    sigma: Pauli,
    params: &ParamSchedule,
    dist: &SiteDistribution,
    max_depth: usize,
) -> Result<FBarTable> {
    params.validate()?;
    let p = params.depth();
    check_depth(p, max_depth)?;
    let mut values = vec![Complex64::default(); 1 << path_len(p)];
    for (m, n, w) in dist.samples() {
        if w != 0.0 {
            accumulate_f(&mut values, sigma, m, n, params, w);
        }
    }
    Ok(FBarTable { sigma, p, values })
}

/// `out(z) = Σ_x exp(PHASE_SIGN · i Σ_l 𝒜_l x_l z_l) w(x)`, one position at a time.
pub(crate) fn phase_transform(weights: &mut [Complex64], phases: &[f64]) {
    for (l, &a) in phases.iter().enumerate() {
        let stride = 1usize << l;
        let e = Complex64::from_polar(1.0, PHASE_SIGN * a);
        let ec = e.conj();
        for base in (0..weights.len()).step_by(stride << 1) {
            for i in base..base + stride {
                let plus = weights[i];
                let minus = weights[i + stride];
                weights[i] = e * plus + ec * minus;
                weights[i + stride] = ec * plus + e * minus;
            }
        }
    }
}

/// Levels `H^{(0)}, …, H^{(p)}` of the tree recursion.
pub fn h_iterate(fbar_i: &FBarTable, params: &ParamSchedule, d: usize) -> Result<Vec<HTable>> {
    if fbar_i.sigma() != Pauli::I {
        return Err(Error::InvalidInput("the recursion consumes the identity table".into()));
    }
    check_degree(d)?;
    let p = params.depth();
    check_len("table depth", p, fbar_i.depth())?;
    let phases = phase_vector(&params.alpha);
    let dim = fbar_i.values.len();
    let middle = super::bitpath::pair_mask(p, p + 1) as usize;
    let mut levels = vec![HTable {
        level: 0,
        values: vec![Complex64::new(1.0, 0.0); dim],
    }];
    for k in 1..=p {
        let prev = &levels[k - 1].values;
        let mut w: Vec<Complex64> = (0..dim)
            .map(|x| {
                let constrained = x & middle == 0 || x & middle == middle;
                if constrained {
                    prev[x] * fbar_i.values[x]
                } else {
                    Complex64::default()
                }
            })
            .collect();
        phase_transform(&mut w, &phases);
        let values = w.into_iter().map(|s| s.powu(d as u32)).collect();
        levels.push(HTable { level: k, values });
    }
    Ok(levels)
}

/// `Σ_{z_L, z_R} exp(±i𝒜·(z_L z_R)) H(z_L) H(z_R) f̄^{σ_L}(z_L) f̄^{σ_R}(z_R)`.
fn final_sum(h: &HTable, left: &FBarTable, right: &FBarTable, phases: &[f64]) -> Complex64 {
    let mut b: Vec<Complex64> = h.values.iter().zip(&right.values).map(|(h, f)| h * f).collect();
    phase_transform(&mut b, phases);
    let terms: Vec<Complex64> = (0..b.len()).map(|z| h.values[z] * left.values[z] * b[z]).collect();
    pairwise(&terms)
}

fn real_part(value: Complex64, context: &'static str) -> Result<f64> {
    if value.im.abs() > RESIDUE_TOL {
        return Err(Error::Residue {
            context,
            residue: value.im.abs(),
            tolerance: RESIDUE_TOL,
        });
    }
    Ok(value.re)
}

/// Expected `⟨σ_L σ_R⟩` on one edge.
pub fn edge_expectation(
    sigma_l: Pauli,
    sigma_r: Pauli,
    params: &ParamSchedule,
    d: usize,
    dist: &SiteDistribution,
) -> Result<f64> {
    FiniteFormula::new(params, d, dist.clone())?.expectation(sigma_l, sigma_r)
}

/// Expected `⟨XX⟩`, `⟨YY⟩`, `⟨ZZ⟩` on one edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairExpectations {
    #[serde(rename = "XX")]
    pub xx: f64,
    #[serde(rename = "YY")]
    pub yy: f64,
    #[serde(rename = "ZZ")]
    pub zz: f64,
}

impl PairExpectations {
    pub fn energy(&self, c: &EdgeCoeffs) -> f64 {
        c.c_i + c.c_xx * self.xx + c.c_yy * self.yy + c.c_zz * self.zz
    }

    pub fn heisenberg(&self) -> f64 {
        self.xx + self.yy + self.zz
    }
}

/// Per-edge energy `c_I + c_XX⟨XX⟩ + c_YY⟨YY⟩ + c_ZZ⟨ZZ⟩`.
pub fn objective_energy(coeffs: &EdgeCoeffs, params: &ParamSchedule, d: usize, dist: &SiteDistribution) -> Result<f64> {
    if coeffs.c_xx == 0.0 && coeffs.c_yy == 0.0 && coeffs.c_zz == 0.0 {
        return Ok(coeffs.c_i);
    }
    Ok(FiniteFormula::new(params, d, dist.clone())?
        .pair_expectations()?
        .energy(coeffs))
}

/// Shared tables for one `(Θ, d, distribution)`.
#[derive(Clone, Debug)]
pub struct FiniteFormula {
    params: ParamSchedule,
    d: usize,
    dist: SiteDistribution,
    phases: Vec<f64>,
    fbar_i: FBarTable,
    levels: Vec<HTable>,
}

impl FiniteFormula {
    pub fn new(params: &ParamSchedule, d: usize, dist: SiteDistribution) -> Result<Self> {
        Self::with_limit(params, d, dist, DEFAULT_MAX_DEPTH)
    }

    pub fn with_limit(params: &ParamSchedule, d: usize, dist: SiteDistribution, max_depth: usize) -> Result<Self> {
        check_degree(d)?;
        let fbar_i = fbar_table_with_limit(Pauli::I, params, &dist, max_depth)?;
        let levels = h_iterate(&fbar_i, params, d)?;
        Ok(Self {
            params: params.clone(),
            d,
            phases: phase_vector(&params.alpha),
            dist,
            fbar_i,
            levels,
        })
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn fbar_identity(&self) -> &FBarTable {
        &self.fbar_i
    }

    pub fn levels(&self) -> &[HTable] {
        &self.levels
    }

    pub fn top_level(&self) -> &HTable {
        self.levels.last().expect("p ≥ 1")
    }

    pub fn table(&self, sigma: Pauli) -> Result<FBarTable> {
        if sigma == Pauli::I {
            return Ok(self.fbar_i.clone());
        }
        fbar_table_with_limit(sigma, &self.params, &self.dist, MAX_PATH_DEPTH)
    }

    pub fn expectation(&self, sigma_l: Pauli, sigma_r: Pauli) -> Result<f64> {
        let left = self.table(sigma_l)?;
        let right = if sigma_r == sigma_l {
            left.clone()
        } else {
            self.table(sigma_r)?
        };
        real_part(
            final_sum(self.top_level(), &left, &right, &self.phases),
            "edge expectation imaginary part",
        )
    }

    pub fn pair_expectations(&self) -> Result<PairExpectations> {
        Ok(PairExpectations {
            xx: self.expectation(Pauli::X, Pauli::X)?,
            yy: self.expectation(Pauli::Y, Pauli::Y)?,
            zz: self.expectation(Pauli::Z, Pauli::Z)?,
        })
    }
}

/// True when `x` is within `1e-12` of a multiple of `π/4`.
pub fn is_quarter_pi_multiple(x: f64) -> bool {
    let k = x / std::f64::consts::FRAC_PI_4;
    (k - k.round()).abs() * std::f64::consts::FRAC_PI_4 <= 1e-12
}

/// `|Σ_a f̄^X(a) H^{(k)}(a)|` for `±x̂` initial states; requires `γ ≡ 0` and
/// every `β` a multiple of `π/4`.
pub fn assumption_check(params: &ParamSchedule, d: usize, k: usize) -> Result<f64> {
    params.validate()?;
    if let Some(g) = params.gamma.iter().find(|g| **g != 0.0) {
        return Err(Error::Precondition(format!("γ must vanish, found {g}")));
    }
    if let Some(b) = params.beta.iter().find(|b| !is_quarter_pi_multiple(**b)) {
        return Err(Error::Precondition(format!("β = {b} is not a multiple of π/4")));
    }
    if k > params.depth() {
        return Err(Error::InvalidInput(format!(
            "level {k} exceeds depth {}",
            params.depth()
        )));
    }
    let formula = FiniteFormula::new(params, d, SiteDistribution::SignedX)?;
    let fx = formula.table(Pauli::X)?;
    let terms: Vec<Complex64> = fx
        .values
        .iter()
        .zip(&formula.levels[k].values)
        .map(|(f, h)| f * h)
        .collect();
    Ok(pairwise(&terms).norm())
}

/// `T(a)` of a raw bit pattern at depth `p`.
pub fn bitpath_t(a: &BitPath) -> usize {
    t_of(a.depth(), a.bits())
}

/// The prime transform; an error on paths with `T = 0`.
pub fn bitpath_prime(a: &BitPath) -> Result<BitPath> {
    a.prime()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn random_params(p: usize, rng: &mut ChaCha8Rng) -> ParamSchedule {
        let flat: Vec<f64> = (0..4 * p).map(|_| rng.gen_range(-FRAC_PI_2..FRAC_PI_2)).collect();
        ParamSchedule::from_flat(p, &flat).unwrap()
    }

    /// Direct double sum over `(x, z)` for the recursion.
    fn h_naive(fbar: &FBarTable, params: &ParamSchedule, d: usize) -> Vec<Vec<Complex64>> {
        let p = params.depth();
        let len = path_len(p);
        let phases = phase_vector(&params.alpha);
        let dim = 1usize << len;
        let mut levels = vec![vec![Complex64::new(1.0, 0.0); dim]];
        for k in 1..=p {
            let mut next = vec![Complex64::default(); dim];
            for (z, out) in next.iter_mut().enumerate() {
                let mut s = Complex64::default();
                for (x, (&prev, &fx)) in levels[k - 1].iter().zip(&fbar.values).enumerate() {
                    let xs = BitPath::new(p, x as u64).unwrap().signs();
                    if xs[p] != xs[p + 1] {
                        continue;
                    }
                    let zs = BitPath::new(p, z as u64).unwrap().signs();
                    let dot: f64 = (0..len).map(|l| phases[l] * (xs[l] * zs[l]) as f64).sum();
                    s += Complex64::from_polar(1.0, PHASE_SIGN * dot) * prev * fx;
                }
                *out = s.powu(d as u32);
            }
            levels.push(next);
        }
        levels
    }

    #[test]
    fn phase_vector_layout() {
        assert_eq!(phase_vector(&[0.1, 0.2]), vec![0.1, 0.2, 0.0, 0.0, -0.2, -0.1]);
    }

    #[test]
    fn depth_guards() {
        let dist = SiteDistribution::SignedX;
        assert!(fbar_table(Pauli::I, &ParamSchedule::zeros(0), &dist).is_err());
        assert!(matches!(
            fbar_table(Pauli::I, &ParamSchedule::zeros(7), &dist),
            Err(Error::SizeLimit { .. })
        ));
        let t = fbar_table(Pauli::I, &ParamSchedule::zeros(1), &dist).unwrap();
        assert!(h_iterate(&t, &ParamSchedule::zeros(1), 0).is_err());
    }

    #[test]
    fn table_matches_pointwise_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let params = random_params(2, &mut rng);
        let m = [0.0, 0.6, 0.8];
        let n = [0.8, 0.0, -0.6];
        let ps = super::super::distribution::PointSet::new(vec![(m, 1.0)]).unwrap();
        let dist = SiteDistribution::Independent {
            initial: ps,
            axes: super::super::distribution::PointSet::new(vec![(n, 1.0)]).unwrap(),
        };
        for sigma in Pauli::ALL {
            let table = fbar_table(sigma, &params, &dist).unwrap();
            for bits in 0..64 {
                let z = BitPath::new(2, bits).unwrap();
                let direct = f_value(sigma, m, n, &params, &z).unwrap();
                assert!((table.get(&z) - direct).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn identity_table_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in 1..4 {
            let params = random_params(p, &mut rng);
            let t = fbar_table(Pauli::I, &params, &SiteDistribution::SignedX).unwrap();
            assert!((t.sum() - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn z_table_vanishes_off_diagonal_middle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let params = random_params(2, &mut rng);
        let t = fbar_table(Pauli::Z, &params, &SiteDistribution::SignedX).unwrap();
        for bits in 0..64u64 {
            let z = BitPath::new(2, bits).unwrap();
            if z.get(3).unwrap() != z.get(-3).unwrap() {
                assert_eq!(t.get(&z), Complex64::default());
            }
        }
    }

    #[test]
    fn butterfly_recursion_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (p, d) in [(1, 1), (2, 3)] {
            let params = random_params(p, &mut rng);
            let fbar = fbar_table(Pauli::I, &params, &SiteDistribution::SignedX).unwrap();
            let fast = h_iterate(&fbar, &params, d).unwrap();
            let slow = h_naive(&fbar, &params, d);
            for k in 0..=p {
                for (a, b) in fast[k].values.iter().zip(&slow[k]) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn identity_circuit_expectations() {
        let zero = ParamSchedule::zeros(1);
        let xx = edge_expectation(Pauli::X, Pauli::X, &zero, 2, &SiteDistribution::SignedX).unwrap();
        assert!(xx.abs() < 1e-14);
        let plus =
            SiteDistribution::Aligned(super::super::distribution::PointSet::new(vec![([1.0, 0.0, 0.0], 1.0)]).unwrap());
        let xx = edge_expectation(Pauli::X, Pauli::X, &zero, 2, &plus).unwrap();
        assert!((xx - 1.0).abs() < 1e-14);
        let xy = EdgeCoeffs::XY;
        assert!(
            objective_energy(&xy, &zero, 3, &SiteDistribution::SignedX)
                .unwrap()
                .abs()
                < 1e-14
        );
        let none = EdgeCoeffs {
            c_i: 0.25,
            ..EdgeCoeffs::default()
        };
        assert_eq!(
            objective_energy(&none, &zero, 3, &SiteDistribution::SignedX).unwrap(),
            0.25
        );
    }

    #[test]
    fn assumption_check_guards() {
        let ok = ParamSchedule::from_layers(&[[0.3, FRAC_PI_4, 0.0, 0.2], [0.1, 0.0, 0.0, -0.4]]).unwrap();
        assert!(assumption_check(&ok, 3, 2).unwrap() < 1e-9);
        let bad = ParamSchedule::from_layers(&[[0.3, 0.3, 0.0, 0.2]]).unwrap();
        assert!(matches!(assumption_check(&bad, 3, 1), Err(Error::Precondition(_))));
        assert_eq!(assumption_check(&ParamSchedule::zeros(2), 3, 1).unwrap(), 0.0);
        let idle = ParamSchedule::from_layers(&[[0.0, FRAC_PI_4, 0.0, 0.0]]).unwrap();
        assert!(assumption_check(&idle, 3, 1).unwrap() < 1e-15);
    }
}
