//! 2-local Hamiltonians built from Pauli pairs on graph edges plus a
//! longitudinal field, evaluated matrix-free on statevectors.
//!
//! Every supported term is real in the computational basis:
//! `XX` maps `|x⟩ → |x ⊕ m⟩` and `YY` maps `|x⟩ → -z_u z_v |x ⊕ m⟩`, so the
//! operator is `diag(x) + Σ_e (c_xx - c_yy z_u z_v) |x ⊕ m_e⟩⟨x|`.

use std::ops::{Add, Mul};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graphs::InteractionGraph;
use crate::reduce::{chunked_sum, CHUNK};
use crate::statevector::{spin, Statevector, MAX_QUBITS};

/// Coefficients of one edge term `c_i + c_xx XX + c_yy YY + c_zz ZZ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgeCoeffs {
    pub c_i: f64,
    pub c_xx: f64,
    pub c_yy: f64,
    pub c_zz: f64,
}

impl EdgeCoeffs {
    pub const QMC: EdgeCoeffs = EdgeCoeffs {
        c_i: 0.5,
        c_xx: -0.5,
        c_yy: -0.5,
        c_zz: -0.5,
    };
    pub const HEISENBERG: EdgeCoeffs = EdgeCoeffs {
        c_i: 0.0,
        c_xx: 1.0,
        c_yy: 1.0,
        c_zz: 1.0,
    };
    pub const XY: EdgeCoeffs = EdgeCoeffs {
        c_i: 0.0,
        c_xx: 1.0,
        c_yy: 1.0,
        c_zz: 0.0,
    };

    pub fn xxz(delta: f64) -> Self {
        Self {
            c_i: 0.0,
            c_xx: 1.0,
            c_yy: 1.0,
            c_zz: delta,
        }
    }

    fn scaled(self, w: f64) -> Self {
        Self {
            c_i: self.c_i * w,
            c_xx: self.c_xx * w,
            c_yy: self.c_yy * w,
            c_zz: self.c_zz * w,
        }
    }

    fn is_finite(&self) -> bool {
        [self.c_i, self.c_xx, self.c_yy, self.c_zz]
            .iter()
            .all(|c| c.is_finite())
    }
}

/// Named Hamiltonian families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetKind {
    Qmc,
    HeisenbergPauli,
    Xy,
    Xxz,
}

impl std::str::FromStr for PresetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qmc" => Ok(Self::Qmc),
            "heisenberg_pauli" | "heisenberg" => Ok(Self::HeisenbergPauli),
            "xy" => Ok(Self::Xy),
            "xxz" => Ok(Self::Xxz),
            other => Err(Error::InvalidInput(format!("unknown Hamiltonian kind {other:?}"))),
        }
    }
}

/// A 2-local Hamiltonian on a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    graph: InteractionGraph,
    edge_coeffs: Vec<EdgeCoeffs>,
    field: Vec<f64>,
}

impl HamiltonianSpec {
    pub fn new(graph: InteractionGraph, edge_coeffs: Vec<EdgeCoeffs>, field: Vec<f64>) -> Result<Self> {
        check_len("edge coefficients", graph.n_edges(), edge_coeffs.len())?;
        check_len("vertex field", graph.n_vertices(), field.len())?;
        if !edge_coeffs.iter().all(EdgeCoeffs::is_finite) || !field.iter().all(|h| h.is_finite()) {
            return Err(Error::InvalidInput("Hamiltonian coefficients must be finite".into()));
        }
        Ok(Self {
            graph,
            edge_coeffs,
            field,
        })
    }

    /// Same coefficients on every edge, scaled by the edge weight.
    pub fn uniform(graph: InteractionGraph, coeffs: EdgeCoeffs, field: f64) -> Result<Self> {
        let edge_coeffs = graph.edges().iter().map(|e| coeffs.scaled(e.weight)).collect();
        let field = vec![field; graph.n_vertices()];
        Self::new(graph, edge_coeffs, field)
    }

    pub fn preset(kind: PresetKind, graph: InteractionGraph, delta: Option<f64>, h: Option<f64>) -> Result<Self> {
        match (kind, delta, h) {
            (PresetKind::Xxz, Some(delta), Some(h)) => Self::uniform(graph, EdgeCoeffs::xxz(delta), h),
            (PresetKind::Xxz, _, _) => Err(Error::InvalidInput("xxz needs both delta and h".into())),
            (_, None, None) => {
                let coeffs = match kind {
                    PresetKind::Qmc => EdgeCoeffs::QMC,
                    PresetKind::HeisenbergPauli => EdgeCoeffs::HEISENBERG,
                    _ => EdgeCoeffs::XY,
                };
                Self::uniform(graph, coeffs, 0.0)
            }
            _ => Err(Error::InvalidInput(format!("{kind:?} takes no delta or h parameter"))),
        }
    }

    pub fn qmc(graph: InteractionGraph) -> Self {
        Self::uniform(graph, EdgeCoeffs::QMC, 0.0).expect("finite preset")
    }

    pub fn heisenberg(graph: InteractionGraph) -> Self {
        Self::uniform(graph, EdgeCoeffs::HEISENBERG, 0.0).expect("finite preset")
    }

    pub fn graph(&self) -> &InteractionGraph {
        &self.graph
    }

    pub fn n_qubits(&self) -> usize {
        self.graph.n_vertices()
    }

    pub fn edge_coeffs(&self) -> &[EdgeCoeffs] {
        &self.edge_coeffs
    }

    pub fn field(&self) -> &[f64] {
        &self.field
    }

    /// Sum of absolute coefficients, a bound on the operator norm.
    pub fn coefficient_scale(&self) -> f64 {
        let edges: f64 = self
            .edge_coeffs
            .iter()
            .map(|c| c.c_i.abs() + c.c_xx.abs() + c.c_yy.abs() + c.c_zz.abs())
            .sum();
        edges + self.field.iter().map(|h| h.abs()).sum::<f64>()
    }

    /// Precomputes the diagonal and the flip terms for repeated use.
    pub fn operator(&self) -> Result<Operator> {
        Operator::new(self)
    }

    /// `⟨ψ|H|ψ⟩`, streamed over amplitude chunks.
    pub fn energy(&self, psi: &Statevector) -> Result<f64> {
        check_len("energy qubit count", self.n_qubits(), psi.n_qubits())?;
        let a = psi.amplitudes();
        let edges = self.graph.edges();
        let value: Complex64 = chunked_sum(a.len(), |range| {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in range {
                let ax = a[x];
                if ax == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let mut diag = 0.0;
                let mut hx = Complex64::new(0.0, 0.0);
                for (e, c) in edges.iter().zip(&self.edge_coeffs) {
                    let zz = spin(x, e.u) * spin(x, e.v);
                    diag += c.c_i + c.c_zz * zz;
                    let flip = c.c_xx - c.c_yy * zz;
                    if flip != 0.0 {
                        hx += a[x ^ (1 << e.u) ^ (1 << e.v)] * flip;
                    }
                }
                for (v, h) in self.field.iter().enumerate() {
                    diag += h * spin(x, v);
                }
                acc += ax.conj() * (hx + ax * diag);
            }
            acc
        });
        let tol = 1e-10 * self.coefficient_scale().max(1.0);
        if value.im.abs() > tol {
            return Err(Error::Residue {
                context: "energy imaginary part",
                residue: value.im.abs(),
                tolerance: tol,
            });
        }
        Ok(value.re)
    }

    pub fn energy_density(&self, psi: &Statevector) -> Result<f64> {
        Ok(self.energy(psi)? / self.n_qubits() as f64)
    }
}

/// Two-site Pauli labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// `⟨a|σ|b⟩` for computational states `a, b ∈ {0, 1}`.
    pub fn element(self, a: usize, b: usize) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match (self, a, b) {
            (Pauli::I, a, b) => {
                if a == b {
                    one
                } else {
                    zero
                }
            }
            (Pauli::X, a, b) => {
                if a != b {
                    one
                } else {
                    zero
                }
            }
            (Pauli::Y, 0, 1) => Complex64::new(0.0, -1.0),
            (Pauli::Y, 1, 0) => Complex64::new(0.0, 1.0),
            (Pauli::Y, _, _) => zero,
            (Pauli::Z, 0, 0) => one,
            (Pauli::Z, 1, 1) => -one,
            (Pauli::Z, _, _) => zero,
        }
    }
}

/// `⟨ψ|σ_u ⊗ τ_v|ψ⟩` for distinct qubits.
pub fn pauli_pair_expectation(psi: &Statevector, u: usize, sigma: Pauli, v: usize, tau: Pauli) -> Result<f64> {
    let n = psi.n_qubits();
    if u >= n || v >= n || u == v {
        return Err(Error::InvalidInput(format!(
            "qubits ({u}, {v}) invalid for a {n}-qubit state"
        )));
    }
    let a = psi.amplitudes();
    let value: Complex64 = chunked_sum(a.len(), |range| {
        let mut acc = Complex64::new(0.0, 0.0);
        for x in range {
            // (σ⊗τ)|x⟩ = Σ_y ⟨y|σ⊗τ|x⟩ |y⟩ with a single nonzero y
            let bu = x >> u & 1;
            let bv = x >> v & 1;
            let yu = if matches!(sigma, Pauli::X | Pauli::Y) {
                bu ^ 1
            } else {
                bu
            };
            let yv = if matches!(tau, Pauli::X | Pauli::Y) { bv ^ 1 } else { bv };
            let y = (x & !(1 << u) & !(1 << v)) | yu << u | yv << v;
            let coeff = sigma.element(yu, bu) * tau.element(yv, bv);
            acc += a[y].conj() * coeff * a[x];
        }
        acc
    });
    if value.im.abs() > 1e-10 {
        return Err(Error::Residue {
            context: "Pauli pair expectation imaginary part",
            residue: value.im.abs(),
            tolerance: 1e-10,
        });
    }
    Ok(value.re)
}

/// Scalars the real-symmetric operator can act on.
pub trait Amplitude: Copy + Default + Send + Sync + Add<Output = Self> + Mul<f64, Output = Self> {}
impl Amplitude for f64 {}
impl Amplitude for Complex64 {}

#[derive(Clone, Copy, Debug)]
struct FlipTerm {
    mask: usize,
    u: usize,
    v: usize,
    c_xx: f64,
    c_yy: f64,
}

/// Materialized diagonal plus flip terms; applies `H` in `O(|E| 2^n)`.
#[derive(Clone, Debug)]
pub struct Operator {
    n_qubits: usize,
    diagonal: Vec<f64>,
    flips: Vec<FlipTerm>,
}

impl Operator {
    pub fn new(spec: &HamiltonianSpec) -> Result<Self> {
        let n = spec.n_qubits();
        if n > MAX_QUBITS {
            return Err(Error::SizeLimit {
                what: "operator qubit count",
                size: n,
                limit: MAX_QUBITS,
            });
        }
        let edges = spec.graph().edges();
        let mut diagonal = vec![0.0; 1 << n];
        diagonal.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            for (i, d) in chunk.iter_mut().enumerate() {
                let x = c * CHUNK + i;
                let mut acc = 0.0;
                for (e, k) in edges.iter().zip(spec.edge_coeffs()) {
                    acc += k.c_i + k.c_zz * spin(x, e.u) * spin(x, e.v);
                }
                for (v, h) in spec.field().iter().enumerate() {
                    acc += h * spin(x, v);
                }
                *d = acc;
            }
        });
        let flips = edges
            .iter()
            .zip(spec.edge_coeffs())
            .filter(|(_, k)| k.c_xx != 0.0 || k.c_yy != 0.0)
            .map(|(e, k)| FlipTerm {
                mask: 1 << e.u | 1 << e.v,
                u: e.u,
                v: e.v,
                c_xx: k.c_xx,
                c_yy: k.c_yy,
            })
            .collect();
        Ok(Self {
            n_qubits: n,
            diagonal,
            flips,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `out = H · input`.
    pub fn apply<T: Amplitude>(&self, input: &[T], out: &mut [T]) {
        assert_eq!(input.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            for (i, o) in chunk.iter_mut().enumerate() {
                let x = c * CHUNK + i;
                let mut acc = input[x] * self.diagonal[x];
                for f in &self.flips {
                    let coeff = f.c_xx - f.c_yy * spin(x, f.u) * spin(x, f.v);
                    acc = acc + input[x ^ f.mask] * coeff;
                }
                *o = acc;
            }
        });
    }

    /// `⟨ψ|H|ψ⟩` for a complex state, real part.
    pub fn expectation(&self, amps: &[Complex64]) -> f64 {
        chunked_sum(amps.len(), |range| {
            let mut acc = 0.0;
            for x in range {
                let mut hx = amps[x] * self.diagonal[x];
                for f in &self.flips {
                    let coeff = f.c_xx - f.c_yy * spin(x, f.u) * spin(x, f.v);
                    hx += amps[x ^ f.mask] * coeff;
                }
                acc += (amps[x].conj() * hx).re;
            }
            acc
        })
    }

    /// Dense real symmetric matrix, row-major.
    pub fn dense(&self) -> Vec<f64> {
        let dim = self.dim();
        let mut m = vec![0.0; dim * dim];
        for x in 0..dim {
            m[x * dim + x] += self.diagonal[x];
            for f in &self.flips {
                let coeff = f.c_xx - f.c_yy * spin(x, f.u) * spin(x, f.v);
                m[(x ^ f.mask) * dim + x] += coeff;
            }
        }
        m
    }
}
