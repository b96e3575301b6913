//! Extremal eigenpairs and eigenspaces: dense diagonalization for small
//! registers, restarted Lanczos with full reorthogonalization above that.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{HamiltonianSpec, Operator};
use crate::statevector::Statevector;

/// Which end of the spectrum to target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    Min,
    Max,
}

#[derive(Clone, Debug)]
pub struct EigenConfig {
    /// Largest register diagonalized densely.
    pub dense_limit: usize,
    /// Largest register handled by Lanczos.
    pub iterative_limit: usize,
    /// Eigenvalues closer than this are treated as one level.
    pub degeneracy_tol: f64,
    /// Target residual `‖Hv − λv‖`.
    pub residual_tol: f64,
    pub max_restarts: usize,
    /// Upper bound on the Krylov dimension; shrunk further by `memory_budget`.
    pub krylov_dim: usize,
    /// Bytes the Krylov basis may occupy.
    pub memory_budget: usize,
    /// Cap on the number of degenerate vectors collected.
    pub max_degeneracy: usize,
    pub seed: u64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            dense_limit: 10,
            iterative_limit: 24,
            degeneracy_tol: 1e-8,
            residual_tol: 1e-9,
            max_restarts: 200,
            krylov_dim: 60,
            memory_budget: 2 << 30,
            max_degeneracy: 64,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Statevector,
    pub residual: f64,
}

/// An extremal level with an orthonormal basis of its eigenspace.
#[derive(Clone, Debug)]
pub struct Eigenspace {
    pub value: f64,
    pub vectors: Vec<Statevector>,
    pub max_residual: f64,
}

impl Eigenspace {
    pub fn degeneracy(&self) -> usize {
        self.vectors.len()
    }

    /// Squared norm of the projection of `psi` onto the space.
    pub fn fidelity(&self, psi: &Statevector) -> Result<f64> {
        psi.subspace_fidelity(&self.vectors)
    }
}

pub fn extremal_eigenpair(spec: &HamiltonianSpec, which: Extremum) -> Result<Eigenpair> {
    extremal_eigenpair_with(spec, which, &EigenConfig::default())
}

pub fn extremal_eigenpair_with(spec: &HamiltonianSpec, which: Extremum, config: &EigenConfig) -> Result<Eigenpair> {
    let space = solve(spec, which, config, false)?;
    let vector = space.vectors.into_iter().next().expect("at least one vector");
    Ok(Eigenpair {
        value: space.value,
        vector,
        residual: space.max_residual,
    })
}

pub fn extremal_eigenspace(spec: &HamiltonianSpec, which: Extremum) -> Result<Eigenspace> {
    extremal_eigenspace_with(spec, which, &EigenConfig::default())
}

pub fn extremal_eigenspace_with(spec: &HamiltonianSpec, which: Extremum, config: &EigenConfig) -> Result<Eigenspace> {
    solve(spec, which, config, true)
}

fn solve(spec: &HamiltonianSpec, which: Extremum, config: &EigenConfig, whole_space: bool) -> Result<Eigenspace> {
    let n = spec.n_qubits();
    if n > config.iterative_limit {
        return Err(Error::SizeLimit {
            what: "eigensolver qubit count",
            size: n,
            limit: config.iterative_limit,
        });
    }
    let op = spec.operator()?;
    let sign = match which {
        Extremum::Min => 1.0,
        Extremum::Max => -1.0,
    };
    let (value, vectors) = if n <= config.dense_limit {
        dense_level(&op, sign, config, whole_space)
    } else {
        lanczos_level(&op, sign, config, whole_space)?
    };
    let mut max_residual: f64 = 0.0;
    let mut out = Vec::with_capacity(vectors.len());
    let mut hv = vec![0.0; op.dim()];
    for v in vectors {
        op.apply(&v, &mut hv);
        let r = hv
            .iter()
            .zip(&v)
            .map(|(h, x)| (h - value * x).powi(2))
            .sum::<f64>()
            .sqrt();
        max_residual = max_residual.max(r);
        out.push(Statevector::normalized(
            v.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        )?);
    }
    Ok(Eigenspace {
        value,
        vectors: out,
        max_residual,
    })
}

fn dense_level(op: &Operator, sign: f64, config: &EigenConfig, whole_space: bool) -> (f64, Vec<Vec<f64>>) {
    let dim = op.dim();
    let m = DMatrix::from_row_slice(dim, dim, &op.dense()).map(|x| sign * x);
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lowest = eig.eigenvalues[order[0]];
    let take = if whole_space {
        order
            .iter()
            .take_while(|&&i| eig.eigenvalues[i] - lowest <= config.degeneracy_tol)
            .count()
    } else {
        1
    };
    let vectors = order[..take]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (sign * lowest, vectors)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    crate::reduce::chunked_sum(a.len(), |r| r.map(|i| a[i] * b[i]).sum::<f64>())
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    // two passes keep the basis orthogonal to working precision
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            axpy(v, -c, b);
        }
    }
}

/// Lowest eigenpair of `sign · H` on the complement of `locked`.
fn lanczos_lowest(
    op: &Operator,
    sign: f64,
    locked: &[Vec<f64>],
    config: &EigenConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, Vec<f64>)> {
    let dim = op.dim();
    let vec_bytes = dim * std::mem::size_of::<f64>();
    let budget_vectors = (config.memory_budget / vec_bytes.max(1)).saturating_sub(locked.len() + 3);
    let krylov = config
        .krylov_dim
        .min(budget_vectors)
        .min(dim.saturating_sub(locked.len()))
        .max(2);

    let mut start: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
    let mut w = vec![0.0; dim];
    let mut best = (f64::INFINITY, start.clone(), f64::INFINITY);
    for _ in 0..config.max_restarts {
        orthogonalize(&mut start, locked);
        if normalize(&mut start) == 0.0 {
            return Err(Error::NoConvergence("Lanczos start vector vanished".into()));
        }
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alphas = Vec::with_capacity(krylov);
        let mut betas: Vec<f64> = Vec::with_capacity(krylov);
        loop {
            let j = basis.len() - 1;
            op.apply(&basis[j], &mut w);
            w.iter_mut().for_each(|x| *x *= sign);
            let a = dot(&basis[j], &w);
            alphas.push(a);
            orthogonalize(&mut w, locked);
            orthogonalize(&mut w, &basis);
            let b = normalize(&mut w);
            if basis.len() == krylov || b < 1e-12 * a.abs().max(1.0) {
                break;
            }
            betas.push(b);
            basis.push(w.clone());
        }
        let k = alphas.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alphas[i];
            if i + 1 < k {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let idx = (0..k)
            .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
            .expect("k ≥ 1");
        let theta = eig.eigenvalues[idx];
        let mut ritz = vec![0.0; dim];
        for (i, b) in basis.iter().enumerate() {
            axpy(&mut ritz, eig.eigenvectors[(i, idx)], b);
        }
        orthogonalize(&mut ritz, locked);
        normalize(&mut ritz);
        op.apply(&ritz, &mut w);
        w.iter_mut().for_each(|x| *x *= sign);
        let value = dot(&ritz, &w);
        axpy(&mut w, -value, &ritz);
        // components along locked vectors are not part of the restricted problem
        orthogonalize(&mut w, locked);
        let residual = dot(&w, &w).sqrt();
        let _ = theta;
        if residual < best.2 {
            best = (value, ritz.clone(), residual);
        }
        if residual <= config.residual_tol {
            return Ok((value, ritz));
        }
        start = ritz;
    }
    Err(Error::NoConvergence(format!(
        "Lanczos residual {:.3e} above {:.1e} after {} restarts",
        best.2, config.residual_tol, config.max_restarts
    )))
}

fn lanczos_level(op: &Operator, sign: f64, config: &EigenConfig, whole_space: bool) -> Result<(f64, Vec<Vec<f64>>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (lowest, first) = lanczos_lowest(op, sign, &[], config, &mut rng)?;
    let mut vectors = vec![first];
    if whole_space {
        while vectors.len() < config.max_degeneracy.min(op.dim()) {
            let (value, v) = lanczos_lowest(op, sign, &vectors, config, &mut rng)?;
            if value - lowest > config.degeneracy_tol {
                break;
            }
            vectors.push(v);
        }
    }
    Ok((sign * lowest, vectors))
}
