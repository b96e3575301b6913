//! Dense statevectors in little-endian order: qubit `q` is bit `q` of the
//! amplitude index, bit value 0 is `|0⟩` and maps to `z = +1`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::reduce::{chunked_sum, CHUNK};

/// Largest qubit count a dense vector may hold.
pub const MAX_QUBITS: usize = 30;

/// A single-qubit operator as `[[a00, a01], [a10, a11]]`.
pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// `z` value of qubit `q` in basis index `x`.
#[inline]
pub fn spin(x: usize, q: usize) -> f64 {
    if x >> q & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::SizeLimit {
            what: "qubit count",
            size: n,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

impl Statevector {
    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidInput(format!(
                "basis index {index} outside dimension {dim}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps amplitudes that must already be normalized to 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        let sv = Self { n_qubits, amps };
        let norm = sv.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("state norm {norm} is not 1")));
        }
        Ok(sv)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidInput("cannot normalize a zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amps)
    }

    /// Tensor product of single-qubit states, `locals[q]` on qubit `q`.
    pub fn product(locals: &[[Complex64; 2]]) -> Result<Self> {
        let n = locals.len();
        check_qubits(n)?;
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for (q, local) in locals.iter().enumerate() {
            let mut next = vec![Complex64::new(0.0, 0.0); 1 << (q + 1)];
            for (x, a) in amps.iter().enumerate() {
                next[x] = a * local[0];
                next[x | 1 << q] = a * local[1];
            }
            amps = next;
        }
        Ok(Self { n_qubits: n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        chunked_sum(self.dim(), |r| self.amps[r].iter().map(|a| a.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn check_dims(&self, other: &Statevector) -> Result<()> {
        check_len("statevector dimension", self.dim(), other.dim())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        self.check_dims(other)?;
        Ok(chunked_sum(self.dim(), |r| {
            r.map(|i| self.amps[i].conj() * other.amps[i]).sum::<Complex64>()
        }))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().min(1.0))
    }

    /// Squared norm of the projection onto the span of orthonormal `basis`.
    pub fn subspace_fidelity(&self, basis: &[Statevector]) -> Result<f64> {
        let mut total = 0.0;
        for v in basis {
            total += v.inner(self)?.norm_sqr();
        }
        Ok(total.clamp(0.0, 1.0))
    }

    /// Applies `u` to qubit `q`.
    pub fn apply_single(&mut self, q: usize, u: &Mat2) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::InvalidInput(format!(
                "qubit {q} outside a {}-qubit register",
                self.n_qubits
            )));
        }
        apply_mat2(&mut self.amps, q, u);
        Ok(())
    }

    /// Multiplies amplitude `x` by `phases[x]`.
    pub fn apply_diagonal(&mut self, phases: &[Complex64]) -> Result<()> {
        check_len("diagonal length", self.dim(), phases.len())?;
        self.amps
            .par_chunks_mut(CHUNK)
            .zip(phases.par_chunks(CHUNK))
            .for_each(|(a, p)| a.iter_mut().zip(p).for_each(|(a, p)| *a *= p));
        Ok(())
    }
}

/// In-place single-qubit kernel on a raw amplitude slice.
pub(crate) fn apply_mat2(amps: &mut [Complex64], q: usize, u: &Mat2) {
    let stride = 1usize << q;
    let block = stride << 1;
    let kernel = |chunk: &mut [Complex64]| {
        for base in (0..chunk.len()).step_by(block) {
            for i in base..base + stride {
                let a0 = chunk[i];
                let a1 = chunk[i + stride];
                chunk[i] = u[0][0] * a0 + u[0][1] * a1;
                chunk[i + stride] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    };
    let size = block.max(CHUNK);
    if amps.len() >= 2 * size {
        amps.par_chunks_mut(size).for_each(kernel);
    } else {
        kernel(amps);
    }
}

/// Product `a · b` of single-qubit operators.
pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// `exp(-i θ n·σ)` for a unit axis `n`.
pub fn rotation(axis: [f64; 3], theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    let [nx, ny, nz] = axis;
    let i = Complex64::i();
    [
        [Complex64::new(c, 0.0) - i * s * nz, -i * s * Complex64::new(nx, -ny)],
        [-i * s * Complex64::new(nx, ny), Complex64::new(c, 0.0) + i * s * nz],
    ]
}

/// Bloch state `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩` of a unit vector.
pub fn bloch_state(m: [f64; 3]) -> [Complex64; 2] {
    let [x, y, z] = m;
    let polar = z.clamp(-1.0, 1.0).acos();
    let azimuth = if x == 0.0 && y == 0.0 { 0.0 } else { y.atan2(x) };
    [
        Complex64::new((polar / 2.0).cos(), 0.0),
        Complex64::from_polar((polar / 2.0).sin(), azimuth),
    ]
}
