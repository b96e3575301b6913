use std::f64::consts::FRAC_PI_2;

use hamqaoa::formula::bitpath::{path_len, BitPath};
use hamqaoa::formula::infinite::{assumption_residual, RescaledParams};
use hamqaoa::formula::{FiniteFormula, SiteDistribution};
use hamqaoa::optimize::{
    gauge_fix, minimize_local, FiniteFormulaObjective, LocalConfig, Objective, StatevectorObjective,
};
use hamqaoa::{AnsatzSpec, HamiltonianSpec, InteractionGraph, ParamSchedule, Pauli, SignString};
use proptest::prelude::*;

fn angle() -> impl Strategy<Value = f64> {
    -FRAC_PI_2..FRAC_PI_2
}

fn schedule(p: usize) -> impl Strategy<Value = ParamSchedule> {
    prop::collection::vec(angle(), 4 * p).prop_map(move |x| ParamSchedule::from_flat(p, &x).unwrap())
}

fn depth_and_schedule() -> impl Strategy<Value = ParamSchedule> {
    (1usize..=3).prop_flat_map(schedule)
}

fn gamma_free(p: usize) -> impl Strategy<Value = ParamSchedule> {
    schedule(p).prop_map(|mut s| {
        s.gamma.iter_mut().for_each(|g| *g = 0.0);
        s
    })
}

fn formula(params: &ParamSchedule, d: usize) -> FiniteFormula {
    FiniteFormula::new(params, d, SiteDistribution::SignedX).unwrap()
}

fn all_paths(p: usize) -> impl Iterator<Item = BitPath> {
    (0..1u64 << path_len(p)).map(move |b| BitPath::new(p, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn identity_table_sums_to_one(params in depth_and_schedule()) {
        let f = formula(&params, 1);
        prop_assert!((f.fbar_identity().sum() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn prime_flips_identity_and_keeps_z(params in depth_and_schedule()) {
        let f = formula(&params, 2);
        let fi = f.fbar_identity();
        let fz = f.table(Pauli::Z).unwrap();
        for a in all_paths(params.depth()).filter(|a| a.t() > 0) {
            let b = a.prime().unwrap();
            prop_assert!((fi.get(&b) + fi.get(&a)).norm() < 1e-12);
            prop_assert!((fz.get(&b) - fz.get(&a)).norm() < 1e-12);
        }
    }

    #[test]
    fn h_levels_respect_prime_and_balanced_paths(params in depth_and_schedule(), d in 1usize..=4) {
        let f = formula(&params, d);
        for h in f.levels() {
            for a in all_paths(params.depth()) {
                if a.t() == 0 {
                    prop_assert!((h.get(&a) - 1.0).norm() < 1e-9);
                } else {
                    prop_assert!((h.get(&a.prime().unwrap()) - h.get(&a)).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn weighted_h_sums_to_one(params in depth_and_schedule(), d in 1usize..=4) {
        let f = formula(&params, d);
        let fi = f.fbar_identity();
        for h in f.levels() {
            let s: num_complex::Complex64 = fi.values().iter().zip(h.values()).map(|(a, b)| a * b).sum();
            prop_assert!((s - 1.0).norm() < 1e-9, "{s}");
        }
    }

    #[test]
    fn parity_without_z_rotation(params in (1usize..=3).prop_flat_map(gamma_free), d in 1usize..=3) {
        let f = formula(&params, d);
        let tables = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z].map(|s| f.table(s).unwrap());
        let parity = [1.0, 1.0, -1.0, -1.0];
        for a in all_paths(params.depth()) {
            let n = a.negated();
            for (t, s) in tables.iter().zip(parity) {
                prop_assert!((t.get(&n) - s * t.get(&a)).norm() < 1e-12);
            }
            for h in f.levels() {
                prop_assert!((h.get(&n) - h.get(&a)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn x_term_assumption_holds_on_lattice(
        p in 1usize..=3,
        alphas in prop::collection::vec(-1.5f64..1.5, 3),
        deltas in prop::collection::vec(-1.5f64..1.5, 3),
        quarters in prop::collection::vec(0i64..4, 3),
        d in 1usize..=6,
    ) {
        let r = RescaledParams::from_quarter_turns(alphas[..p].to_vec(), &quarters[..p], deltas[..p].to_vec());
        prop_assert!(assumption_residual(&r, d).unwrap() < 1e-9);
    }

    #[test]
    fn gauge_fix_preserves_formula_value(params in depth_and_schedule(), d in 1usize..=4) {
        let obj = FiniteFormulaObjective::heisenberg(d);
        let before = obj.evaluate(&params).unwrap();
        let after = obj.evaluate(&gauge_fix(&params, d)).unwrap();
        prop_assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn zero_layer_is_identity(params in depth_and_schedule(), at in 0usize..=3) {
        let g = InteractionGraph::ring(5).unwrap();
        let obj = StatevectorObjective::qmc(&g, &AnsatzSpec::Simplified(SignString::alternating(5))).unwrap();
        let v = obj.evaluate(&params).unwrap();
        let w = obj.evaluate(&params.with_zero_layer(at)).unwrap();
        prop_assert!((v - w).abs() < 1e-12);
    }

    #[test]
    fn circuit_preserves_norm(params in depth_and_schedule(), mask in 0u64..64) {
        let g = InteractionGraph::complete(6).unwrap();
        let spec = AnsatzSpec::Simplified(SignString::from_mask(6, mask));
        let psi = hamqaoa::prepare_hqs(&g, &spec, &params).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn local_search_never_worsens(params in schedule(1), nm in any::<bool>()) {
        let g = InteractionGraph::ring(4).unwrap();
        let obj = StatevectorObjective::new(
            &HamiltonianSpec::heisenberg(g),
            &AnsatzSpec::Simplified(SignString::alternating(4)),
            hamqaoa::optimize::Sense::Minimize,
        ).unwrap();
        let cfg = if nm { LocalConfig::nelder_mead() } else { LocalConfig::lbfgs() };
        let start = obj.evaluate(&params).unwrap();
        let r = minimize_local(&obj, &params, &cfg.with_max_evals(300)).unwrap();
        prop_assert!(r.value <= start + 1e-15);
        prop_assert!((obj.evaluate(&r.params).unwrap() - r.value).abs() < 1e-12);
    }
}
