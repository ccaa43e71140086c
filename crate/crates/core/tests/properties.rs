use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pqec::channels::{
    apply_global_depolarizing, apply_local_dephasing, apply_local_depolarizing, apply_local_depolarizing_in_order,
    NoiseModel,
};
use pqec::linalg::max_abs_diff;
use pqec::purifier::{purified_state, swap_gadget, werner_fidelity_update};
use pqec::qstate::random::{random_density_matrix, random_pure_state, random_unitary};
use pqec::qstate::{
    bloch_compose, bloch_decompose, density_from_pure, fidelity, pauli_expand, purity, spectrum, BlochVector,
    DensityMatrix, PureState, WernerState,
};
use pqec::threshold::{logical_error_rate, run_cycles};

fn state(seed: u64, m: usize) -> DensityMatrix {
    random_density_matrix(m, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn conjugate(u: &pqec::CMatrix, rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::new(u * rho.matrix() * u.adjoint()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn purity_never_decreases(seed in any::<u64>(), m in 1usize..=3) {
        let rho = state(seed, m);
        let out = purified_state(&rho, 1).unwrap();
        prop_assert!(purity(&out) >= purity(&rho) - 1e-12);
    }

    #[test]
    fn flat_spectra_are_fixed_points(k in 1usize..=4) {
        // Uniform on a k-dimensional support inside a 4-dimensional space.
        let mut w = vec![0.0; 4];
        w.iter_mut().take(k).for_each(|x| *x = 1.0 / k as f64);
        let rho = DensityMatrix::diagonal(&w).unwrap();
        let out = purified_state(&rho, 1).unwrap();
        prop_assert!((purity(&out) - purity(&rho)).abs() < 1e-10);
    }

    #[test]
    fn eigenvalue_ratios_square(seed in any::<u64>()) {
        let rho = state(seed, 2);
        let before = spectrum(&rho).unwrap().values;
        let after = spectrum(&purified_state(&rho, 1).unwrap()).unwrap().values;
        for i in 0..4 {
            for j in 0..4 {
                // Tiny eigenvalues lose relative precision when squared, so skip them.
                if before[i] > before[j] && before[j] > 1e-2 {
                    let want = (before[i] / before[j]).powi(2);
                    let got = after[i] / after[j];
                    prop_assert!((got - want).abs() <= 1e-9 * want.max(1.0), "{got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn eigenvectors_are_preserved(seed in any::<u64>(), ell in 1u32..=4) {
        let rho = state(seed, 2);
        let spec = spectrum(&rho).unwrap();
        let out = purified_state(&rho, ell).unwrap();
        let gaps_ok = spec.values.windows(2).all(|w| w[0] - w[1] > 1e-3);
        prop_assume!(gaps_ok);
        // Each eigenvector of ρ stays an eigenvector of the purified state.
        for c in 0..4 {
            let v = spec.vectors.column(c).into_owned();
            let image = out.matrix() * &v;
            let lambda = (v.adjoint() * &image)[(0, 0)];
            let residual = (image - v * lambda).norm();
            prop_assert!(residual < 1e-8, "residual {residual}");
        }
    }

    #[test]
    fn bilateral_unitaries_commute_with_purification(seed in any::<u64>(), m in 1usize..=2, ell in 0u32..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density_matrix(m, &mut rng);
        let u = random_unitary(1 << m, &mut rng);
        let lhs = purified_state(&conjugate(&u, &rho), ell).unwrap();
        let rhs = conjugate(&u, &purified_state(&rho, ell).unwrap());
        prop_assert!(max_abs_diff(lhs.matrix(), rhs.matrix()) < 1e-9);
    }

    #[test]
    fn gadget_commutes_with_unitaries(seed in any::<u64>(), sign in prop::sample::select(vec![1i8, -1])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_density_matrix(2, &mut rng);
        let b = random_density_matrix(2, &mut rng);
        let u = random_unitary(4, &mut rng);
        let (lhs, pl) = swap_gadget(&conjugate(&u, &a), &conjugate(&u, &b), sign).unwrap();
        let (out, pr) = swap_gadget(&a, &b, sign).unwrap();
        prop_assert!((pl - pr).abs() < 1e-12);
        prop_assert!(max_abs_diff(lhs.matrix(), conjugate(&u, &out).matrix()) < 1e-10);
    }

    #[test]
    fn werner_states_close_under_purification(lambda in 0.0f64..=1.0, m in 1usize..=3) {
        let target = random_pure_state(m, &mut ChaCha8Rng::seed_from_u64(m as u64));
        let w = WernerState::new(lambda, target.clone()).unwrap();
        let out = purified_state(&w.to_density().unwrap(), 1).unwrap();
        let f = fidelity(&out, &target).unwrap();
        prop_assert!((f - werner_fidelity_update(w.fidelity(), 1 << m)).abs() < 1e-10);
        prop_assert!((f - w.purified().fidelity()).abs() < 1e-10);
    }

    #[test]
    fn werner_iteration_increases_to_one(f0 in 0.0f64..1.0, m in 1usize..=6) {
        let d = (1usize << m) as f64;
        prop_assume!(f0 > 1.0 / d + 1e-6);
        let mut f = f0;
        for _ in 0..200 {
            let next = werner_fidelity_update(f, 1 << m);
            prop_assert!(next >= f);
            f = next;
        }
        prop_assert!((1.0 - f) < 1e-12);
    }

    #[test]
    fn channels_preserve_trace_and_positivity(seed in any::<u64>(), p in 0.0f64..=1.0, m in 1usize..=3) {
        let rho = state(seed, m);
        for out in [
            apply_global_depolarizing(&rho, p).unwrap(),
            apply_local_depolarizing(&rho, p).unwrap(),
            apply_local_dephasing(&rho, p).unwrap(),
        ] {
            prop_assert!((out.trace() - 1.0).abs() < 1e-12);
            prop_assert!(out.validate().is_ok());
        }
    }

    #[test]
    fn local_depolarizing_order_is_irrelevant(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let rho = state(seed, 3);
        let a = apply_local_depolarizing_in_order(&rho, p, &[0, 1, 2]).unwrap();
        let b = apply_local_depolarizing_in_order(&rho, p, &[2, 0, 1]).unwrap();
        prop_assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-13);
    }

    #[test]
    fn local_depolarizing_contracts_by_weight(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let rho = state(seed, 2);
        let eta = 1.0 - 4.0 * p / 3.0;
        let before = pauli_expand(&rho).unwrap();
        let after = pauli_expand(&apply_local_depolarizing(&rho, p).unwrap()).unwrap();
        for ((pauli, r0), (_, r1)) in before.iter().zip(after.iter()) {
            prop_assert!((r1 - eta.powi(pauli.weight() as i32) * r0).abs() < 1e-12);
        }
    }

    #[test]
    fn bloch_round_trip(x in -0.57f64..0.57, y in -0.57f64..0.57, z in -0.57f64..0.57) {
        let r = BlochVector::new([x, y, z]).unwrap();
        let back = bloch_decompose(&bloch_compose(&r).unwrap()).unwrap();
        for k in 0..3 {
            prop_assert!((back.r[k] - r.r[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn purification_lowers_logical_error_below_threshold(p in 0.01f64..0.7, m in 1usize..=2) {
        let psi = PureState::plus(m).unwrap();
        let model = NoiseModel::LocalDepolarizing { p };
        let g: Vec<f64> = (0..=3)
            .map(|ell| logical_error_rate(&run_cycles(&psi, &model, ell, 1).unwrap()))
            .collect();
        for w in g.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10, "{g:?}");
        }
    }
}

#[test]
fn pure_states_are_fixed_by_purification() {
    let psi = density_from_pure(&PureState::bloch_product(0.7, 2.1, 3).unwrap()).unwrap();
    for ell in 0..8 {
        assert!(max_abs_diff(purified_state(&psi, ell).unwrap().matrix(), psi.matrix()) < 1e-12);
    }
    let mixed = DensityMatrix::maximally_mixed(2).unwrap();
    assert!(max_abs_diff(purified_state(&mixed, 3).unwrap().matrix(), mixed.matrix()) < 1e-14);
}
