//! Exact preparation of HamQAOA states. Each layer applies, in order,
//! `e^{-iαA}`, `e^{-iβB}`, `e^{-iγC}`, `e^{-iδD}` with `A = Σ Z_u Z_v`,
//! `B = Σ X_v`, `C = Σ Z_v` and `D = Σ n_v·σ_v`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_8, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graphs::{InteractionGraph, SignString};
use crate::hamiltonians::{HamiltonianSpec, Operator};
use crate::reduce::{chunked_sum, CHUNK};
use crate::statevector::{apply_mat2, bloch_state, mat2_mul, rotation, spin, Mat2, Statevector};

/// Wraps `x` into `(-π/2, π/2]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x - PI * (x / PI).round();
    if r <= -FRAC_PI_2 {
        r + PI
    } else if r > FRAC_PI_2 {
        r - PI
    } else {
        r
    }
}

/// The four angle sequences of a depth-`p` circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSchedule {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
}

/// Angle families, in the order used by flat parameter vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Alpha,
    Beta,
    Gamma,
    Delta,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::Alpha, Block::Beta, Block::Gamma, Block::Delta];
}

impl ParamSchedule {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, gamma: Vec<f64>, delta: Vec<f64>) -> Result<Self> {
        let s = Self {
            alpha,
            beta,
            gamma,
            delta,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            alpha: vec![0.0; p],
            beta: vec![0.0; p],
            gamma: vec![0.0; p],
            delta: vec![0.0; p],
        }
    }

    /// Builds a schedule from rows `(α_j, β_j, γ_j, δ_j)`.
    pub fn from_layers(layers: &[[f64; 4]]) -> Result<Self> {
        Self::new(
            layers.iter().map(|l| l[0]).collect(),
            layers.iter().map(|l| l[1]).collect(),
            layers.iter().map(|l| l[2]).collect(),
            layers.iter().map(|l| l[3]).collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.alpha.len();
        check_len("beta length", p, self.beta.len())?;
        check_len("gamma length", p, self.gamma.len())?;
        check_len("delta length", p, self.delta.len())?;
        if !self.flat().iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("angles must be finite".into()));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.alpha.len()
    }

    pub fn block(&self, b: Block) -> &[f64] {
        match b {
            Block::Alpha => &self.alpha,
            Block::Beta => &self.beta,
            Block::Gamma => &self.gamma,
            Block::Delta => &self.delta,
        }
    }

    pub fn block_mut(&mut self, b: Block) -> &mut Vec<f64> {
        match b {
            Block::Alpha => &mut self.alpha,
            Block::Beta => &mut self.beta,
            Block::Gamma => &mut self.gamma,
            Block::Delta => &mut self.delta,
        }
    }

    /// `[α…, β…, γ…, δ…]`.
    pub fn flat(&self) -> Vec<f64> {
        [&self.alpha, &self.beta, &self.gamma, &self.delta]
            .into_iter()
            .flatten()
            .copied()
            .collect()
    }

    pub fn from_flat(p: usize, x: &[f64]) -> Result<Self> {
        check_len("flat parameter vector", 4 * p, x.len())?;
        Self::new(
            x[..p].to_vec(),
            x[p..2 * p].to_vec(),
            x[2 * p..3 * p].to_vec(),
            x[3 * p..].to_vec(),
        )
    }

    /// Inserts an all-zero layer before position `at` (`at = p` appends).
    pub fn with_zero_layer(&self, at: usize) -> Self {
        let mut out = self.clone();
        for b in Block::ALL {
            out.block_mut(b).insert(at.min(self.depth()), 0.0);
        }
        out
    }

    /// Every angle wrapped into `(-π/2, π/2]`.
    pub fn canonicalized(&self) -> Self {
        let mut out = self.clone();
        for b in Block::ALL {
            out.block_mut(b).iter_mut().for_each(|x| *x = wrap_angle(*x));
        }
        out
    }
}

/// Rotation axes and initial Bloch vectors of the ansatz.
#[derive(Clone, Debug, PartialEq)]
pub enum AnsatzSpec {
    /// `n_v = m_v = (s_v, 0, 0)`.
    Simplified(SignString),
    General {
        axes: Vec<[f64; 3]>,
        initial: Vec<[f64; 3]>,
    },
}

fn check_unit(v: &[f64; 3]) -> Result<()> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "Bloch vector {v:?} has norm {norm}, expected 1"
        )));
    }
    Ok(())
}

impl AnsatzSpec {
    pub fn general(axes: Vec<[f64; 3]>, initial: Vec<[f64; 3]>) -> Result<Self> {
        check_len("initial vectors", axes.len(), initial.len())?;
        for v in axes.iter().chain(&initial) {
            check_unit(v)?;
        }
        Ok(Self::General { axes, initial })
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Self::Simplified(s) => s.len(),
            Self::General { axes, .. } => axes.len(),
        }
    }

    pub fn axis(&self, v: usize) -> [f64; 3] {
        match self {
            Self::Simplified(s) => [s.get(v) as f64, 0.0, 0.0],
            Self::General { axes, .. } => axes[v],
        }
    }

    pub fn initial_vector(&self, v: usize) -> [f64; 3] {
        match self {
            Self::Simplified(s) => [s.get(v) as f64, 0.0, 0.0],
            Self::General { initial, .. } => initial[v],
        }
    }

    /// The same ansatz written in general form.
    pub fn to_general(&self) -> Self {
        let n = self.n_qubits();
        Self::General {
            axes: (0..n).map(|v| self.axis(v)).collect(),
            initial: (0..n).map(|v| self.initial_vector(v)).collect(),
        }
    }

    fn check_size(&self, n: usize) -> Result<()> {
        check_len("ansatz size", n, self.n_qubits())
    }
}

/// `⊗_v |m_v⟩`.
pub fn initial_state(spec: &AnsatzSpec, n: usize) -> Result<Statevector> {
    spec.check_size(n)?;
    let locals: Vec<_> = (0..n).map(|v| bloch_state(spec.initial_vector(v))).collect();
    Statevector::product(&locals)
}

/// `Σ_{u∼v} z_u z_v` for every basis index.
pub fn zz_diagonal(g: &InteractionGraph, weighted: bool) -> Vec<f64> {
    let dim = 1usize << g.n_vertices();
    let mut diag = vec![0.0; dim];
    diag.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        for (i, d) in chunk.iter_mut().enumerate() {
            let x = c * CHUNK + i;
            *d = g
                .edges()
                .iter()
                .map(|e| {
                    let w = if weighted { e.weight } else { 1.0 };
                    w * spin(x, e.u) * spin(x, e.v)
                })
                .sum();
        }
    });
    diag
}

fn apply_phase_diagonal(amps: &mut [Complex64], diag: &[f64], angle: f64) {
    amps.par_chunks_mut(CHUNK)
        .zip(diag.par_chunks(CHUNK))
        .for_each(|(a, d)| {
            for (a, d) in a.iter_mut().zip(d) {
                *a *= Complex64::from_polar(1.0, -angle * d);
            }
        });
}

fn check_register(psi: &Statevector, n: usize) -> Result<()> {
    check_len("statevector qubit count", n, psi.n_qubits())
}

/// `e^{-i·angle·Σ z_u z_v}` on unit-weight edges.
pub fn apply_a(psi: &mut Statevector, g: &InteractionGraph, angle: f64) -> Result<()> {
    check_register(psi, g.n_vertices())?;
    apply_phase_diagonal(psi.amplitudes_mut(), &zz_diagonal(g, false), angle);
    Ok(())
}

/// As [`apply_a`] with each edge term scaled by its weight.
pub fn apply_a_weighted(psi: &mut Statevector, g: &InteractionGraph, angle: f64) -> Result<()> {
    check_register(psi, g.n_vertices())?;
    apply_phase_diagonal(psi.amplitudes_mut(), &zz_diagonal(g, true), angle);
    Ok(())
}

fn apply_each(psi: &mut Statevector, u: impl Fn(usize) -> Mat2) {
    let n = psi.n_qubits();
    for q in 0..n {
        apply_mat2(psi.amplitudes_mut(), q, &u(q));
    }
}

/// `e^{-i·angle·X}` on every qubit.
pub fn apply_b(psi: &mut Statevector, angle: f64) {
    let u = rotation([1.0, 0.0, 0.0], angle);
    apply_each(psi, |_| u);
}

/// `e^{-i·angle·Z}` on every qubit.
pub fn apply_c(psi: &mut Statevector, angle: f64) {
    let u = rotation([0.0, 0.0, 1.0], angle);
    apply_each(psi, |_| u);
}

/// `e^{-i·angle·n_v·σ}` on every qubit.
pub fn apply_d(psi: &mut Statevector, spec: &AnsatzSpec, angle: f64) -> Result<()> {
    spec.check_size(psi.n_qubits())?;
    apply_each(psi, |q| rotation(spec.axis(q), angle));
    Ok(())
}

/// The HamQAOA state for `(g, spec, params)`.
pub fn prepare_hqs(g: &InteractionGraph, spec: &AnsatzSpec, params: &ParamSchedule) -> Result<Statevector> {
    HqsEngine::new(g, spec)?.state(params)
}

/// Reusable simulator for one graph and ansatz: caches the `A` diagonal.
#[derive(Clone, Debug)]
pub struct HqsEngine {
    n: usize,
    spec: AnsatzSpec,
    zz: Vec<f64>,
    initial: Statevector,
}

impl HqsEngine {
    pub fn new(g: &InteractionGraph, spec: &AnsatzSpec) -> Result<Self> {
        let n = g.n_vertices();
        spec.check_size(n)?;
        let initial = initial_state(spec, n)?;
        Ok(Self {
            n,
            spec: spec.clone(),
            zz: zz_diagonal(g, false),
            initial,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn ansatz(&self) -> &AnsatzSpec {
        &self.spec
    }

    fn layer_single(&self, beta: f64, gamma: f64, delta: f64) -> Vec<Mat2> {
        let b = rotation([1.0, 0.0, 0.0], beta);
        let c = rotation([0.0, 0.0, 1.0], gamma);
        let cb = mat2_mul(&c, &b);
        (0..self.n)
            .map(|q| mat2_mul(&rotation(self.spec.axis(q), delta), &cb))
            .collect()
    }

    pub fn state(&self, params: &ParamSchedule) -> Result<Statevector> {
        params.validate()?;
        let mut psi = self.initial.clone();
        for j in 0..params.depth() {
            apply_phase_diagonal(psi.amplitudes_mut(), &self.zz, params.alpha[j]);
            let singles = self.layer_single(params.beta[j], params.gamma[j], params.delta[j]);
            for (q, u) in singles.iter().enumerate() {
                apply_mat2(psi.amplitudes_mut(), q, u);
            }
        }
        Ok(psi)
    }

    pub fn energy(&self, op: &Operator, params: &ParamSchedule) -> Result<f64> {
        check_len("operator qubit count", self.n, op.n_qubits())?;
        Ok(op.expectation(self.state(params)?.amplitudes()))
    }

    /// Energy and its gradient in flat `[α, β, γ, δ]` order, by a single
    /// backward sweep over the circuit.
    pub fn energy_and_gradient(&self, op: &Operator, params: &ParamSchedule) -> Result<(f64, Vec<f64>)> {
        check_len("operator qubit count", self.n, op.n_qubits())?;
        let p = params.depth();
        let phi_final = self.state(params)?;
        let mut phi = phi_final.into_amplitudes();
        let mut lambda = vec![Complex64::default(); phi.len()];
        op.apply(&phi, &mut lambda);
        let energy = chunked_sum(phi.len(), |r| r.map(|x| (phi[x].conj() * lambda[x]).re).sum::<f64>());

        let mut grad = vec![0.0; 4 * p];
        let x_axis = [1.0, 0.0, 0.0];
        let z_axis = [0.0, 0.0, 1.0];
        for j in (0..p).rev() {
            // gates of layer j in reverse: D, C, B, A
            grad[3 * p + j] = 2.0 * self.single_generator_overlap(&lambda, &phi, |q| self.spec.axis(q)).im;
            self.undo_single(&mut phi, &mut lambda, |q| rotation(self.spec.axis(q), params.delta[j]));
            grad[2 * p + j] = 2.0 * self.single_generator_overlap(&lambda, &phi, |_| z_axis).im;
            self.undo_single(&mut phi, &mut lambda, |_| rotation(z_axis, params.gamma[j]));
            grad[p + j] = 2.0 * self.single_generator_overlap(&lambda, &phi, |_| x_axis).im;
            self.undo_single(&mut phi, &mut lambda, |_| rotation(x_axis, params.beta[j]));
            let zz = &self.zz;
            let overlap: Complex64 = chunked_sum(phi.len(), |r| {
                r.map(|x| lambda[x].conj() * phi[x] * zz[x]).sum::<Complex64>()
            });
            grad[j] = 2.0 * overlap.im;
            apply_phase_diagonal(&mut phi, zz, -params.alpha[j]);
            apply_phase_diagonal(&mut lambda, zz, -params.alpha[j]);
        }
        Ok((energy, grad))
    }

    /// `⟨λ| Σ_q n_q·σ_q |φ⟩`.
    fn single_generator_overlap(
        &self,
        lambda: &[Complex64],
        phi: &[Complex64],
        axis: impl Fn(usize) -> [f64; 3] + Sync,
    ) -> Complex64 {
        let gens: Vec<Mat2> = (0..self.n).map(|q| pauli_axis(axis(q))).collect();
        chunked_sum(phi.len(), |r| {
            let mut acc = Complex64::default();
            for x in r {
                let mut gx = Complex64::default();
                for (q, g) in gens.iter().enumerate() {
                    let b = x >> q & 1;
                    let y = x ^ (1 << q);
                    // (gφ)_x = g[b][b] φ_x + g[b][1-b] φ_y
                    gx += g[b][b] * phi[x] + g[b][1 - b] * phi[y];
                }
                acc += lambda[x].conj() * gx;
            }
            acc
        })
    }

    fn undo_single(&self, phi: &mut [Complex64], lambda: &mut [Complex64], u: impl Fn(usize) -> Mat2) {
        for q in 0..self.n {
            let inv = crate::statevector::mat2_adjoint(&u(q));
            apply_mat2(phi, q, &inv);
            apply_mat2(lambda, q, &inv);
        }
    }
}

/// `n·σ` as a matrix.
pub fn pauli_axis(n: [f64; 3]) -> Mat2 {
    let [x, y, z] = n;
    [
        [Complex64::new(z, 0.0), Complex64::new(x, -y)],
        [Complex64::new(x, y), Complex64::new(-z, 0.0)],
    ]
}

/// Baseline single-angle state `e^{-iθ Σ_{u∼v} P_u P_v} |s⟩` with
/// `P_v = (Z - s_v Y)/√2`; the edge factors commute, so each is applied as
/// `cos θ - i sin θ P_u P_v`.
pub fn agm_state(g: &InteractionGraph, s: &SignString, theta: f64) -> Result<Statevector> {
    let n = g.n_vertices();
    check_len("sign string length", n, s.len())?;
    let mut psi = initial_state(&AnsatzSpec::Simplified(s.clone()), n)?;
    let (sin, cos) = theta.sin_cos();
    let i = Complex64::i();
    for e in g.edges() {
        let pu = agm_pauli(s.get(e.u));
        let pv = agm_pauli(s.get(e.v));
        let amps = psi.amplitudes_mut();
        let mut next = amps.to_vec();
        next.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            for (k, out) in chunk.iter_mut().enumerate() {
                let x = c * CHUNK + k;
                let bu = x >> e.u & 1;
                let bv = x >> e.v & 1;
                let mut pp = Complex64::default();
                for (yu, &au) in pu[bu].iter().enumerate() {
                    for (yv, &av) in pv[bv].iter().enumerate() {
                        let y = (x & !(1 << e.u) & !(1 << e.v)) | yu << e.u | yv << e.v;
                        pp += au * av * amps[y];
                    }
                }
                *out = amps[x] * cos - i * sin * pp;
            }
        });
        amps.copy_from_slice(&next);
    }
    Ok(psi)
}

fn agm_pauli(s: i8) -> Mat2 {
    let r = FRAC_1_SQRT_2;
    let si = Complex64::new(0.0, s as f64 * r);
    [[Complex64::new(r, 0.0), si], [-si, Complex64::new(-r, 0.0)]]
}

/// The HamQAOA schedule equivalent to [`agm_state`] at angle `theta`.
pub fn agm_equivalent_params(theta: f64) -> ParamSchedule {
    ParamSchedule::from_layers(&[[theta, 0.0, 0.0, FRAC_PI_8]]).expect("finite angles")
}

/// Maximizes the QMC energy of the baseline state over `θ ∈ (-π/2, π/2]`
/// on a `1e-3` grid, then polishes with golden-section search.
pub fn agm_optimize(g: &InteractionGraph, s: &SignString) -> Result<(f64, f64)> {
    let op = HamiltonianSpec::qmc(g.clone()).operator()?;
    let energy = |t: f64| -> Result<f64> { Ok(op.expectation(agm_state(g, s, t)?.amplitudes())) };
    const STEP: f64 = 1e-3;
    let steps = (PI / STEP).ceil() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..steps {
        let t = FRAC_PI_2 - k as f64 * STEP;
        let e = energy(t)?;
        if e > best.0 {
            best = (e, t);
        }
    }
    let (mut lo, mut hi) = (best.1 - STEP, best.1 + STEP);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (energy(a)?, energy(b)?);
    while hi - lo > 1e-10 {
        if fa > fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = energy(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = energy(b)?;
        }
    }
    let t = 0.5 * (lo + hi);
    let e = energy(t)?;
    if e >= best.0 {
        Ok((wrap_angle(t), e))
    } else {
        Ok((wrap_angle(best.1), best.0))
    }
}
