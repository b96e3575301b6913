//! Canonical representatives of parameter sets related by the period and
//! Pauli-string symmetries of the simplified circuit on `(d+1)`-regular graphs.
//!
//! Shifting an angle by `π/2` inserts a global Pauli string (`X` for `β`
//! and `δ`, `Z` for `γ`, and for even `d` also for `α`). Each rule below
//! absorbs that string into the following drivers.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::simulator::{Block, ParamSchedule};

/// Angles within this distance of a branch point count as sitting on its
/// canonical side, so optimizer round-off does not split equivalent sets.
pub const DEFAULT_TOL: f64 = 1e-5;

/// Wraps into `[-T/2, T/2)`.
fn restrict_to_middle(x: f64, period: f64) -> f64 {
    x - period * ((x + period / 2.0) / period).floor()
}

fn wrap_pi(x: f64) -> f64 {
    restrict_to_middle(x, PI)
}

struct Fixer {
    tol: f64,
}

impl Fixer {
    /// Representative of `x mod period` in `[lo - tol, lo + period - tol)`.
    fn wrap_from(&self, x: f64, lo: f64, period: f64) -> f64 {
        let base = lo - self.tol;
        base + (x - base).rem_euclid(period)
    }

    /// For a `π`-periodic angle: the value in `[-tol, π/2 - tol)` and whether
    /// a `π/2` shift (and so a Pauli string) was needed to get there.
    fn fold(&self, x: f64) -> (f64, bool) {
        let y = self.wrap_from(x, 0.0, PI);
        if y >= FRAC_PI_2 - self.tol {
            (y - FRAC_PI_2, true)
        } else {
            (y, false)
        }
    }

    /// `α_l` into `[-π/4, π/4)` by `±π/2`, flipping `β_l` and shifting `γ_l`.
    fn alpha_fixing(&self, t: &mut ParamSchedule, l: usize) {
        let y = self.wrap_from(t.alpha[l], -FRAC_PI_4, PI);
        if y >= FRAC_PI_4 - self.tol {
            t.alpha[l] = y - FRAC_PI_2;
            t.beta[l] = wrap_pi(-t.beta[l]);
            t.gamma[l] = wrap_pi(t.gamma[l] - FRAC_PI_2);
        } else {
            t.alpha[l] = y;
        }
    }
}

/// Applies the gauge-fixing protocol for branching `d` with [`DEFAULT_TOL`].
pub fn gauge_fix(params: &ParamSchedule, d: usize) -> ParamSchedule {
    gauge_fix_with_tol(params, d, DEFAULT_TOL)
}

/// Output, up to `tol`: `α_1 ≥ 0`; `α` in `[-π/4, π/4)` (all layers for odd
/// `d`, layers before the last for even `d`); `β_l, γ_l, δ_l ∈ [0, π/2)` for
/// every layer but the last; all remaining angles in `[-π/2, π/2)`.
pub fn gauge_fix_with_tol(params: &ParamSchedule, d: usize, tol: f64) -> ParamSchedule {
    let fx = Fixer { tol };
    let mut t = params.clone();
    for b in Block::ALL {
        t.block_mut(b).iter_mut().for_each(|x| *x = wrap_pi(*x));
    }
    let p = t.depth();
    if p == 0 {
        return t;
    }
    let odd = d % 2 == 1;
    if odd {
        t.alpha
            .iter_mut()
            .for_each(|a| *a = fx.wrap_from(*a, -FRAC_PI_4, FRAC_PI_2));
    } else {
        fx.alpha_fixing(&mut t, 0);
    }
    if t.alpha[0] < -tol {
        for b in Block::ALL {
            t.block_mut(b).iter_mut().for_each(|x| *x = -*x);
        }
        if odd {
            t.alpha
                .iter_mut()
                .for_each(|a| *a = fx.wrap_from(*a, -FRAC_PI_4, FRAC_PI_2));
        }
    }
    for l in 0..p.saturating_sub(1) {
        if !odd {
            fx.alpha_fixing(&mut t, l);
        }
        let (b, shifted) = fx.fold(t.beta[l]);
        t.beta[l] = b;
        if shifted {
            t.gamma[l] = -t.gamma[l];
            t.beta[l + 1] = wrap_pi(t.beta[l + 1] - FRAC_PI_2);
        }
        let (g, shifted) = fx.fold(t.gamma[l]);
        t.gamma[l] = g;
        if shifted {
            t.delta[l] = -t.delta[l];
            t.beta[l + 1] = wrap_pi(-t.beta[l + 1]);
            t.gamma[l + 1] = wrap_pi(t.gamma[l + 1] - FRAC_PI_2);
        }
        let (dl, shifted) = fx.fold(t.delta[l]);
        t.delta[l] = dl;
        if shifted {
            t.gamma[l + 1] = wrap_pi(-t.gamma[l + 1]);
            t.delta[l + 1] = wrap_pi(t.delta[l + 1] - FRAC_PI_2);
        }
    }
    t
}
