//! Configuration strings of one vertex across the `2p + 2` inserted bases.
//!
//! Signed indices `1, …, p+1, -(p+1), …, -1` map to storage positions
//! `0, …, 2p+1` in that order. A set bit means `-1`.

use crate::error::{Error, Result};

/// Largest supported depth for dense bit-path tables.
pub const MAX_PATH_DEPTH: usize = 28;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BitPath {
    p: usize,
    bits: u64,
}

/// Number of positions for depth `p`.
pub fn path_len(p: usize) -> usize {
    2 * p + 2
}

/// Storage position of signed index `j` at depth `p`.
pub fn position(p: usize, j: i64) -> Result<usize> {
    let top = (p + 1) as i64;
    match j {
        1.. if j <= top => Ok((j - 1) as usize),
        ..=-1 if -j <= top => Ok((2 * top + j) as usize),
        _ => Err(Error::InvalidInput(format!("bit-path index {j} outside ±1..±{top}"))),
    }
}

/// Signed index stored at position `pos`.
pub fn index_at(p: usize, pos: usize) -> i64 {
    let top = (p + 1) as i64;
    let pos = pos as i64;
    if pos < top {
        pos + 1
    } else {
        pos - 2 * top
    }
}

impl BitPath {
    pub fn new(p: usize, bits: u64) -> Result<Self> {
        if p == 0 || p > MAX_PATH_DEPTH {
            return Err(Error::InvalidInput(format!(
                "bit-path depth must be in 1..={MAX_PATH_DEPTH}, got {p}"
            )));
        }
        if bits >> path_len(p) != 0 {
            return Err(Error::InvalidInput(format!(
                "bits {bits:#x} exceed length {}",
                path_len(p)
            )));
        }
        Ok(Self { p, bits })
    }

    /// From `±1` values in storage order.
    pub fn from_signs(p: usize, signs: &[i8]) -> Result<Self> {
        crate::error::check_len("bit-path signs", path_len(p), signs.len())?;
        let mut bits = 0;
        for (pos, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => bits |= 1 << pos,
                other => return Err(Error::InvalidInput(format!("bit-path entry {other} is not ±1"))),
            }
        }
        Self::new(p, bits)
    }

    pub fn depth(&self) -> usize {
        self.p
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        path_len(self.p)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `z_j` for signed index `j`.
    pub fn get(&self, j: i64) -> Result<i8> {
        Ok(sign_at(self.bits, position(self.p, j)?))
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.len()).map(|pos| sign_at(self.bits, pos)).collect()
    }

    /// Largest `j` with `z_j ≠ z_{-j}`, or 0.
    pub fn t(&self) -> usize {
        t_of(self.p, self.bits)
    }

    /// Flips `z_{±j}` for every `j > T`. Undefined when `T = 0`.
    pub fn prime(&self) -> Result<Self> {
        prime_of(self.p, self.bits)
            .map(|bits| Self { p: self.p, bits })
            .ok_or_else(|| Error::Precondition("prime is undefined on paths with T = 0".into()))
    }

    pub fn negated(&self) -> Self {
        Self {
            p: self.p,
            bits: !self.bits & ((1u64 << self.len()) - 1),
        }
    }
}

#[inline]
pub(crate) fn sign_at(bits: u64, pos: usize) -> i8 {
    if bits >> pos & 1 == 1 {
        -1
    } else {
        1
    }
}

/// Mask covering the positions of `+j` and `-j`.
#[inline]
pub(crate) fn pair_mask(p: usize, j: usize) -> u64 {
    1 << (j - 1) | 1 << (2 * p + 2 - j)
}

pub(crate) fn t_of(p: usize, bits: u64) -> usize {
    (1..=p + 1)
        .rev()
        .find(|&j| {
            let m = pair_mask(p, j);
            let b = bits & m;
            b != 0 && b != m
        })
        .unwrap_or(0)
}

pub(crate) fn prime_of(p: usize, bits: u64) -> Option<u64> {
    let t = t_of(p, bits);
    if t == 0 {
        return None;
    }
    let mask = (t + 1..=p + 1).fold(0, |m, j| m | pair_mask(p, j));
    Some(bits ^ mask)
}
