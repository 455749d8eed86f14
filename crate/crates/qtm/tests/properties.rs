//! Randomized invariants of the numerical kernels.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qtm::dissipation::{rate_pair, BathSpec};
use qtm::linalg::{
    dagger, gibbs_state, matrix_exp, partial_trace, random_density_matrix, random_hermitian,
    trace_distance, von_neumann_entropy, CMatrix, DensityMatrix,
};
use qtm::models::Label;
use qtm::stochastic::{simulate_walk, WalkParams};
use qtm::thermo::{ergotropy, passive_state};

proptest! {
    /// Partial traces of a joint state are states: unit trace, Hermitian,
    /// nonnegative spectrum.
    #[test]
    fn partial_trace_yields_states(seed: u64, da in 2usize..4, db in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density_matrix(da * db, &mut rng);
        for keep in 0..2 {
            let red = partial_trace(rho.matrix(), &[da, db], keep).unwrap();
            prop_assert!((red.trace().re - 1.0).abs() < 1e-12);
            prop_assert!((&red - dagger(&red)).norm() < 1e-12);
            // A marginal is a valid state; the strict constructor agrees.
            prop_assert!(DensityMatrix::new(red).is_ok());
        }
    }

    /// 0 ≤ S(ρ) ≤ ln(dim), with the upper edge only for the maximally
    /// mixed state.
    #[test]
    fn entropy_is_bounded(seed: u64, dim in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density_matrix(dim, &mut rng);
        let s = von_neumann_entropy(&rho);
        prop_assert!(s >= -1e-12, "negative entropy {s}");
        prop_assert!(s <= (dim as f64).ln() + 1e-12, "entropy {s} above ln({dim})");
    }

    /// Thermal states order populations opposite to energy and ergotropy
    /// vanishes on them (they are passive).
    #[test]
    fn gibbs_states_are_passive(seed: u64, dim in 2usize..6, beta in 0.1f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(dim, &mut rng);
        let rho = gibbs_state(&h, beta).unwrap();
        let w = ergotropy(&rho, &h).unwrap().work;
        prop_assert!(w.abs() < 1e-10, "thermal state yielded work {w}");
    }

    /// Work is nonnegative, energy bookkeeping is consistent, and the
    /// passive counterpart has nothing left to give.
    #[test]
    fn ergotropy_accounting(seed: u64, dim in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(dim, &mut rng);
        let rho = random_density_matrix(dim, &mut rng);
        let report = ergotropy(&rho, &h).unwrap();
        prop_assert!(report.work >= -1e-12);
        prop_assert!((report.work - (report.energy - report.passive_energy)).abs() < 1e-12);
        let passive = passive_state(&rho, &h).unwrap();
        let again = ergotropy(&passive, &h).unwrap().work;
        prop_assert!(again.abs() < 1e-10, "passive state still holds {again}");
    }

    /// exp(−iH) is unitary and exp(A)·exp(−A) = 1.
    #[test]
    fn matrix_exponential_inverts(seed: u64, dim in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(dim, &mut rng);
        let u = matrix_exp(h.matrix(), Complex64::new(0.0, -1.0)).unwrap();
        let uu = &u * dagger(&u);
        let id = CMatrix::identity(dim, dim);
        prop_assert!((&uu - &id).norm() < 1e-12, "U U† deviates by {}", (uu - id).norm());
    }

    /// Emission/absorption rates obey detailed balance at the bath
    /// temperature for any spectral exponent.
    #[test]
    fn rates_satisfy_detailed_balance(
        omega in 0.1f64..5.0,
        t in 0.05f64..10.0,
        kappa in 1e-4f64..1.0,
        dim in 0i32..4,
    ) {
        let bath = BathSpec::new(Label::Hot, t, kappa, dim, 1.0).unwrap();
        let pair = rate_pair(omega, &bath).unwrap();
        let ratio = pair.up / pair.down;
        prop_assert!(
            (ratio.ln() + omega / t).abs() < 1e-9,
            "γ↑/γ↓ = {ratio}, detailed balance wants e^(−{})", omega / t
        );
    }

    /// Trace distance is a [0, 1] metric on states.
    #[test]
    fn trace_distance_is_normalized(seed: u64, dim in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_density_matrix(dim, &mut rng);
        let b = random_density_matrix(dim, &mut rng);
        let dab = trace_distance(&a, &b).unwrap();
        let dba = trace_distance(&b, &a).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&dab));
        prop_assert!((dab - dba).abs() < 1e-12);
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-12);
    }

    /// Walk ensembles are reproducible from their seed and stay inside a
    /// truncated ladder.
    #[test]
    fn walks_are_seeded_and_bounded(seed: u64, levels in 3usize..8) {
        let p = WalkParams::new(1.0, 0.4, 0.5).unwrap().with_levels(levels).unwrap();
        let times = [0.0, 1.0, 5.0];
        let a = simulate_walk(&p, &times, 64, seed).unwrap();
        let b = simulate_walk(&p, &times, 64, seed).unwrap();
        for i in 0..times.len() {
            prop_assert_eq!(a.positions_at(i), b.positions_at(i));
            prop_assert!(a.positions_at(i).iter().all(|&n| (n as usize) < levels));
        }
    }
}
