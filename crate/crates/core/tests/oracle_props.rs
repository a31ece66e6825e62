use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use qhflux_core::oracle::mcmc::{delta_log_density, log_density};
use qhflux_core::oracle::slater::one_body;
use qhflux_core::oracle::{charpoly_moment_mc, partition_exact, plasma_mcmc, slater_density, PlasmaConfig};
use qhflux_core::partition::HoleConfig;

fn in_disk(radius: f64) -> impl Strategy<Value = Complex64> {
    (0.0f64..1.0, -PI..PI).prop_map(move |(u, t)| Complex64::from_polar(radius * u.sqrt(), t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_partition_is_symmetric_and_rotation_invariant(
        n_bath in 1usize..=3,
        b in 0.5f64..4.0,
        w in prop::collection::vec(in_disk(1.0), 2),
        theta in -PI..PI,
    ) {
        let base = partition_exact(&HoleConfig::with_b(w.clone(), n_bath, b)).unwrap();
        let swapped = partition_exact(&HoleConfig::with_b(vec![w[1], w[0]], n_bath, b)).unwrap();
        let turn = Complex64::from_polar(1.0, theta);
        let rotated = partition_exact(&HoleConfig::with_b(w.iter().map(|x| x * turn).collect(), n_bath, b)).unwrap();
        let tol = 1e-12 * base.abs().max(1.0);
        prop_assert!((base - swapped).abs() < tol, "{base} vs {swapped}");
        prop_assert!((base - rotated).abs() < tol, "{base} vs {rotated}");
    }

    #[test]
    fn reversed_move_undoes_the_density_change(
        z in prop::collection::vec(in_disk(1.5), 1..8),
        holes in prop::collection::vec(in_disk(1.0), 0..3),
        pick in any::<prop::sample::Index>(),
        step in in_disk(0.5),
        b in 1.0f64..64.0,
        p in 1u32..3,
        mu in 1u32..4,
    ) {
        let mut cfg = PlasmaConfig::new(z.len(), b, holes, 10, 0);
        cfg.p = p;
        cfg.mu = mu;
        let k = pick.index(z.len());
        let mut moved = z.clone();
        moved[k] += step;
        let forward = delta_log_density(&cfg, &z, k, moved[k]);
        let back = delta_log_density(&cfg, &moved, k, z[k]);
        prop_assume!(forward.is_finite());
        let scale = forward.abs().max(1.0);
        prop_assert!((forward + back).abs() < 1e-12 * scale);
        let direct = log_density(&cfg, &moved) - log_density(&cfg, &z);
        prop_assert!((forward - direct).abs() < 1e-12 * scale.max(log_density(&cfg, &z).abs()));
    }

    #[test]
    fn slater_density_is_symmetric_and_vanishes_on_diagonals(
        orbitals in prop::sample::subsequence((0usize..8).collect::<Vec<_>>(), 3..=6),
        xs in prop::collection::vec(in_disk(1.5), 2..=3),
        b in 1.0f64..8.0,
    ) {
        let d = slater_density(b, &orbitals, &xs).unwrap();
        let mut rev = xs.clone();
        rev.reverse();
        let r = slater_density(b, &orbitals, &rev).unwrap();
        // Hadamard: the determinant is at most the product of the one-body diagonals
        let scale: f64 = xs.iter().map(|&x| one_body(b, &orbitals, x, x).re).product();
        prop_assert!((d - r).abs() <= 1e-12 * scale, "{d} vs {r}");
        for i in 0..xs.len() {
            for l in i + 1..xs.len() {
                let mut diag = xs.clone();
                diag[l] = diag[i];
                prop_assert!(slater_density(b, &orbitals, &diag).unwrap() <= 1e-12 * scale);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn same_seed_gives_the_same_chain(seed in any::<u64>(), n in 1usize..6, holes in prop::collection::vec(in_disk(0.8), 0..2)) {
        let cfg = PlasmaConfig::new(n, n as f64, holes, 2000, seed);
        prop_assert_eq!(plasma_mcmc(&cfg).unwrap(), plasma_mcmc(&cfg).unwrap());
    }
}

/// Doubling the sample count shrinks the batch-means error by about √2.
/// Each error bar is itself noisy, so both sides are averaged over chains.
#[test]
fn charpoly_error_shrinks_with_samples() {
    let cfg = HoleConfig::with_b(vec![Complex64::new(0.4, 0.2)], 2, 2.0);
    let mean_var = |samples: usize| {
        let chains = 48;
        let total: f64 = (0..chains)
            .map(|c| {
                let mut mc = PlasmaConfig::new(2, 2.0, vec![], 0, 1000 + c as u64);
                mc.steps = mc.burn_in + samples * mc.thin;
                let e = charpoly_moment_mc(&cfg, &mc).unwrap();
                (2.0 * (e.log_std_error - e.log_estimate)).exp()
            })
            .sum();
        total / chains as f64
    };
    let shrink = (mean_var(2000) / mean_var(4000)).sqrt();
    assert!((1.3..=1.6).contains(&shrink), "shrink factor {shrink}");
}
