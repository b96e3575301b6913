//! Per-vertex distributions of initial Bloch vectors and driver axes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weighted unit vectors; weights are non-negative and sum to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    points: Vec<([f64; 3], f64)>,
}

#[derive(Serialize, Deserialize)]
struct PointSetJson {
    points: Vec<[f64; 4]>,
}

impl PointSet {
    pub fn new(points: Vec<([f64; 3], f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("point set is empty".into()));
        }
        let mut total = 0.0;
        for (v, w) in &points {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("point {v:?} has norm {norm}, expected 1")));
            }
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidInput(format!("point weight {w} must be ≥ 0")));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("point weights sum to {total}, expected 1")));
        }
        Ok(Self { points })
    }

    /// Equal weights.
    pub fn uniform(vectors: Vec<[f64; 3]>) -> Result<Self> {
        let w = 1.0 / vectors.len().max(1) as f64;
        Self::new(vectors.into_iter().map(|v| (v, w)).collect())
    }

    /// `±x̂` with equal weight.
    pub fn signed_x() -> Self {
        Self {
            points: vec![([1.0, 0.0, 0.0], 0.5), ([-1.0, 0.0, 0.0], 0.5)],
        }
    }

    pub fn points(&self) -> &[([f64; 3], f64)] {
        &self.points
    }

    /// True when every point with positive weight is `±x̂`.
    pub fn on_x_axis(&self) -> bool {
        self.points
            .iter()
            .all(|(v, w)| *w == 0.0 || (v[1].abs() < 1e-12 && v[2].abs() < 1e-12))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PointSetJson = serde_json::from_str(text)?;
        Self::new(raw.points.into_iter().map(|[x, y, z, w]| ([x, y, z], w)).collect())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "points": self.points.iter().map(|(v, w)| [v[0], v[1], v[2], *w]).collect::<Vec<_>>()
        })
    }
}

/// Distribution of `(m_v, n_v)` shared by every vertex.
#[derive(Clone, Debug, PartialEq)]
pub enum SiteDistribution {
    /// `m_v = n_v = s_v x̂` with `s_v = ±1` equiprobable.
    SignedX,
    /// `m_v = n_v` drawn from the point set.
    Aligned(PointSet),
    /// `m_v` and `n_v` drawn independently.
    Independent { initial: PointSet, axes: PointSet },
}

impl SiteDistribution {
    /// Weighted `(m, n)` pairs.
    pub fn samples(&self) -> Vec<([f64; 3], [f64; 3], f64)> {
        match self {
            Self::SignedX => vec![
                ([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], 0.5),
                ([-1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], 0.5),
            ],
            Self::Aligned(ps) => ps.points().iter().map(|&(v, w)| (v, v, w)).collect(),
            Self::Independent { initial, axes } => initial
                .points()
                .iter()
                .flat_map(|&(m, wm)| axes.points().iter().map(move |&(n, wn)| (m, n, wm * wn)))
                .collect(),
        }
    }

    /// Initial states supported on `±x̂`.
    pub fn initial_on_x_axis(&self) -> bool {
        match self {
            Self::SignedX => true,
            Self::Aligned(ps) => ps.on_x_axis(),
            Self::Independent { initial, .. } => initial.on_x_axis(),
        }
    }
}
