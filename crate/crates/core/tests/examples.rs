//! Worked examples checked against independent computations.

mod common;

use std::f64::consts::PI;

use common::{brute_force_fn, random_lattice, rng, zeta_direct};
use heightzeta_core::arakelov::{convergence_abscissa_probe, theta_duality_defect, ArakelovSeriesSpec, PhiKind};
use heightzeta_core::counts::{count_table, fit_asymptotics, geometric_thresholds, height_zeta_partial, FitModel};
use heightzeta_core::fibration::{enumerate_fn, FibrationLineClass};
use heightzeta_core::heights::{ArchKind, MetrizedLineBundle};
use heightzeta_core::tamagawa::{archimedean_density, peyre_constant_check, tamagawa_number, TamagawaSpec, Variety};
use heightzeta_core::{euler_phi, Complex64, HermitianLattice, Rat};
use rand::Rng;

const ZETA3: f64 = 1.2020569031595942;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn p1_counts_follow_totient_sums() {
    let b = MetrizedLineBundle::new(1, 1, ArchKind::Max).unwrap();
    let thresholds: Vec<f64> = (1..=2000).map(f64::from).collect();
    let table = count_table(&b, &thresholds).unwrap();
    let mut expected = 4u64;
    for (k, &got) in table.counts.iter().enumerate() {
        let h = k as u64 + 1;
        if h >= 2 {
            expected += 4 * euler_phi(h).unwrap();
        }
        assert_eq!(got, expected, "H = {h}");
    }
}

#[test]
fn squared_bundle_counts_at_squared_heights() {
    let o1 = MetrizedLineBundle::new(1, 1, ArchKind::Max).unwrap();
    let o2 = MetrizedLineBundle::new(1, 2, ArchKind::Max).unwrap();
    let ns: Vec<f64> = (1..=60).map(f64::from).collect();
    let sq: Vec<f64> = ns.iter().map(|n| n * n).collect();
    assert_eq!(
        count_table(&o1, &ns).unwrap().counts,
        count_table(&o2, &sq).unwrap().counts
    );
}

#[test]
fn p1_zeta_partial_sums_settle_beyond_abscissa() {
    let b = MetrizedLineBundle::new(1, 1, ArchKind::Max).unwrap();
    let z = |h: f64| height_zeta_partial(&b, c(3.0, 0.0), h).unwrap().value;
    let (a, m, l) = (z(100.0), z(200.0), z(400.0));
    assert!((l - m).norm() < (m - a).norm());
    assert_eq!(height_zeta_partial(&b, c(0.0, 0.0), 2.0).unwrap().value.re, 8.0);
}

#[test]
fn p2_leading_constant() {
    let b = MetrizedLineBundle::new(2, 1, ArchKind::Max).unwrap();
    let table = count_table(&b, &geometric_thresholds(3.0, 300.0, 12)).unwrap();
    let fit = fit_asymptotics(&table, FitModel::pinned(3.0, 1.0)).unwrap();
    let target = 4.0 / ZETA3;
    assert!((fit.theta - target).abs() / target < 0.03, "θ = {}", fit.theta);
}

#[test]
fn theta_scaling_in_rank_one() {
    for n in [2i64, 3, 5] {
        let l = HermitianLattice::diagonal(&[Rat::from_integer((n * n).into())]).unwrap();
        let a = l.theta(1.0, 1e-13).unwrap().value.re;
        let b = HermitianLattice::unit(1).theta((n * n) as f64, 1e-13).unwrap().value.re;
        assert!((a - b).abs() < 1e-13, "{a} vs {b}");
    }
}

#[test]
fn theta_functional_equation_covolume_two() {
    // θ(Z·2, 1) against (1/2)·θ(Z/2, 1), both summed term by term
    let direct = |q: f64| 1.0 + 2.0 * (1..200).map(|k| (-PI * q * (k * k) as f64).exp()).sum::<f64>();
    let l = HermitianLattice::diagonal(&[Rat::from_integer(4.into())]).unwrap();
    assert!((direct(4.0) - 0.5 * direct(0.25)).abs() < 1e-14);
    let (defect, _) = l.theta_functional_equation_defect(1.0, 1e-12).unwrap();
    assert!(defect < 1e-10);
}

#[test]
fn theta_functional_equation_random_rank_three() {
    let mut r = rng(31);
    for _ in 0..5 {
        let l = random_lattice(&mut r, 3);
        let (defect, _) = l.theta_functional_equation_defect(1.0 / 3.0, 1e-12).unwrap();
        assert!(defect < 1e-9, "{defect:e}");
    }
}

#[test]
fn zeta_of_the_plane_against_direct_sum() {
    let l = HermitianLattice::unit(2);
    let s = c(6.0, 0.0);
    let cont = l.lattice_zeta(s, 1e-12).unwrap().value;
    let direct = zeta_direct(&l, s, 1000.0);
    assert!((cont - direct).norm() < 1e-8, "{cont} vs {direct}");
}

#[test]
fn rank_two_theta_duality() {
    let spec = ArakelovSeriesSpec {
        degrees: vec![1, 2],
        arch: ArchKind::Max,
        s: c(0.7, 0.3),
        cutoff: 20,
        phi: PhiKind::Theta,
    };
    let (defect, _) = theta_duality_defect(&spec, 1e-12).unwrap();
    assert!(defect < 1e-8, "{defect:e}");
    let spec = ArakelovSeriesSpec {
        degrees: vec![0],
        arch: ArchKind::Max,
        s: c(1.3, -0.4),
        cutoff: 30,
        phi: PhiKind::Theta,
    };
    assert!(theta_duality_defect(&spec, 1e-12).unwrap().0 < 1e-12);
}

#[test]
fn convergence_probe_classification() {
    let grid = [c(4.0, 0.0), c(3.5, 0.0), c(2.5, 0.0), c(2.0, 0.0)];
    let probes = convergence_abscissa_probe(ArchKind::Max, 40, &grid, 1e-12).unwrap();
    assert!(probes[0].is_stable());
    assert!(probes[1].is_stable());
    assert!(!probes[2].is_stable());
    // terms behave like 4φ(N)N^{1−s}; the increments at s = 2 grow like the block length
    assert!((probes[3].exponent - 1.0).abs() < 0.25, "{}", probes[3].exponent);
}

#[test]
fn product_fibration_against_double_loop() {
    for arch in [ArchKind::Max, ArchKind::L2] {
        for h in [1.0, 2.0, 5.0, 12.0] {
            let cls = FibrationLineClass::new(1, 0, 1);
            let got: Vec<_> = enumerate_fn(0, &cls, arch, h).unwrap();
            let want = brute_force_fn(0, &cls, arch, h);
            assert_eq!(got.len(), want.len());
            assert!(got.iter().all(|p| want.contains(p)));
        }
    }
    let cls = FibrationLineClass::new(1, 0, 1);
    assert_eq!(enumerate_fn(1, &cls, ArchKind::Max, 1.0).unwrap().len(), 16);
    assert!(enumerate_fn(1, &cls, ArchKind::Max, 0.5).unwrap().is_empty());
}

/// Importance sampling of `∫ max(1,|x|,|y|)^{-3}` with the per-coordinate density
/// `max(1,|t|)^{-3/2} / 6`.
fn monte_carlo_p2_max(samples: usize, seed: u64) -> (f64, f64) {
    let mut r = rng(seed);
    let draw = |r: &mut rand_chacha::ChaCha8Rng| -> f64 {
        let u: f64 = r.gen();
        if u < 1.0 / 3.0 {
            r.gen_range(-1.0..1.0)
        } else {
            let v: f64 = 1.0 - r.gen::<f64>();
            let t = v.powi(-2);
            if r.gen::<bool>() {
                t
            } else {
                -t
            }
        }
    };
    let q = |t: f64| t.abs().max(1.0).powf(-1.5) / 6.0;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        let (x, y) = (draw(&mut r), draw(&mut r));
        let w = 1.0f64.max(x.abs()).max(y.abs()).powi(-3) / (q(x) * q(y));
        sum += w;
        sum2 += w * w;
    }
    let mean = sum / samples as f64;
    let var = sum2 / samples as f64 - mean * mean;
    (mean, (var / samples as f64).sqrt())
}

#[test]
fn archimedean_density_of_p2_against_monte_carlo() {
    let mu = archimedean_density(Variety::Pn(2), ArchKind::Max, 1e-10).unwrap().value;
    let (mc, sd) = monte_carlo_p2_max(10_000_000, 2024);
    assert!((mu - mc).abs() / mu < 1e-3, "quadrature {mu}, Monte Carlo {mc} ± {sd}");
}

#[test]
fn archimedean_density_of_p1_and_product() {
    let p1 = archimedean_density(Variety::Pn(1), ArchKind::Max, 1e-10).unwrap().value;
    let f0 = archimedean_density(Variety::Fn(0), ArchKind::Max, 1e-10).unwrap().value;
    assert!((p1 - 4.0).abs() < 1e-12);
    assert!((f0 - p1 * p1).abs() < 1e-8);
}

#[test]
fn tamagawa_product_over_the_base() {
    let p1 = tamagawa_number(&TamagawaSpec::new(Variety::Pn(1), ArchKind::Max, 100_000)).unwrap();
    assert!((p1.tau - 24.0 / (PI * PI)).abs() < 1e-3);
    for n in [0, 1] {
        let f = tamagawa_number(&TamagawaSpec::new(Variety::Fn(n), ArchKind::Max, 100_000)).unwrap();
        assert!(
            (f.tau - p1.tau * p1.tau).abs() < 2e-3,
            "F{n}: {} vs {}",
            f.tau,
            p1.tau * p1.tau
        );
    }
}

#[test]
fn peyre_check_l2_line() {
    let check = peyre_constant_check(1, ArchKind::L2, 100_000, 1e6).unwrap();
    assert!(check.relative_gap() < 0.03, "{check:?}");
}

#[test]
fn peyre_check_plane() {
    // O(1)-height 300 is anticanonical height 300³
    let check = peyre_constant_check(2, ArchKind::Max, 100_000, 2.7e7).unwrap();
    assert!(check.relative_gap() < 0.05, "{check:?}");
}
