//! Quick randomized checks of the library's invariants, for `--selftest`.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arakelov::{grouped_series_coefficients, theta_duality_defect, ArakelovSeriesSpec, PhiKind};
use crate::counts::{count_by_heights, count_table};
use crate::fibration::{
    character_shift_invariance, chart_representatives, height_fn, height_from_representative, FibrationLineClass,
    FnPoint,
};
use crate::heights::{
    height_adelic, height_point, restrict_to_point, AdelicPoint, ArchKind, MetrizedLineBundle, ProjPoint, Section,
};
use crate::lattice::HermitianLattice;
use crate::linalg::RatMatrix;
use crate::magnitude::Magnitude;
use crate::places::{abs_v, euler_phi, product_formula_check, Place, Prime, Rat};
use crate::tamagawa::{convergence_factor, local_density_finite, Variety};
use crate::twist::{compare_twisted, twisted_height, AdelicGroupElement};
use crate::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, failures: usize, cases: usize) -> Check {
    Check {
        name,
        passed: failures == 0,
        detail: format!("{failures} failures in {cases} cases"),
    }
}

fn rat(r: &mut ChaCha8Rng, num: i64, den: i64) -> Rat {
    Rat::new(r.gen_range(-num..=num).into(), r.gen_range(1..=den).into())
}

fn nonzero_rat(r: &mut ChaCha8Rng, num: i64, den: i64) -> Rat {
    loop {
        let q = rat(r, num, den);
        if !q.is_zero() {
            return q;
        }
    }
}

fn point(r: &mut ChaCha8Rng, dim: usize, range: i64) -> ProjPoint {
    loop {
        let c: Vec<i64> = (0..dim).map(|_| r.gen_range(-range..=range)).collect();
        if let Ok(p) = ProjPoint::from_i64(&c) {
            return p;
        }
    }
}

fn arch(r: &mut ChaCha8Rng) -> ArchKind {
    if r.gen() {
        ArchKind::Max
    } else {
        ArchKind::L2
    }
}

fn lattice(r: &mut ChaCha8Rng, d: usize) -> HermitianLattice {
    let a: Vec<i64> = (0..d * d).map(|_| r.gen_range(-2..=2)).collect();
    let rows = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let dot: i64 = (0..d).map(|k| a[k * d + i] * a[k * d + j]).sum();
                    Rat::new((dot + i64::from(i == j) * r.gen_range(1..=3)).into(), 2.into())
                })
                .collect()
        })
        .collect();
    HermitianLattice::from_rational(RatMatrix::from_rows(rows).expect("square")).expect("positive definite")
}

fn fn_point(r: &mut ChaCha8Rng, range: i64) -> FnPoint {
    loop {
        let b = (r.gen_range(-range..=range), r.gen_range(-range..=range));
        let f = (r.gen_range(-range..=range), r.gen_range(-range..=range));
        if let Ok(p) = FnPoint::new(b, f) {
            return p;
        }
    }
}

fn places(r: &mut ChaCha8Rng) -> Check {
    let mut bad = 0;
    for _ in 0..500 {
        let x = nonzero_rat(r, 1_000_000, 1_000_000);
        let y = rat(r, 1000, 1000);
        if product_formula_check(&x).ok() != Some(Rat::one()) {
            bad += 1;
        }
        let v = if r.gen() {
            Place::Infinite
        } else {
            Place::finite([2, 3, 5, 7][r.gen_range(0..4)]).expect("prime")
        };
        if abs_v(&(&x * &y), &v) != abs_v(&x, &v) * abs_v(&y, &v) {
            bad += 1;
        }
        let (a, b) = (r.gen_range(1..3000u64), r.gen_range(1..3000u64));
        if num_integer::gcd(a, b) == 1
            && euler_phi(a * b).ok() != Some(euler_phi(a).unwrap_or(0) * euler_phi(b).unwrap_or(0))
        {
            bad += 1;
        }
    }
    check("places: product formula, multiplicativity, totient", bad, 500)
}

fn lattices(r: &mut ChaCha8Rng) -> Check {
    let mut bad = 0;
    for k in 0..20 {
        let l = lattice(r, 1 + k % 3);
        let vols = l.vol_exact().zip(l.dual().vol_exact()).map(|(a, b)| a.mul(&b));
        if l.dual().dual() != l || vols != Some(Magnitude::one()) {
            bad += 1;
        }
        match l.theta_functional_equation_defect([1.0 / 3.0, 1.0, 2.0][k % 3], 1e-12) {
            Ok((defect, bound)) if defect <= bound => {}
            _ => bad += 1,
        }
    }
    check("lattices: duality, theta functional equation", bad, 20)
}

fn heights(r: &mut ChaCha8Rng) -> Check {
    let mut bad = 0;
    for _ in 0..200 {
        let x = point(r, 3, 40);
        let a = arch(r);
        let (m1, m2) = (r.gen_range(-3..=3), r.gen_range(-3..=3));
        let h = |m: i64| MetrizedLineBundle::new(2, m, a).and_then(|b| height_point(&b, &x));
        match (h(m1), h(m2), h(m1 + m2)) {
            (Ok(a), Ok(b), Ok(c)) if a.mul(&b) == c => {}
            _ => bad += 1,
        }
        let b1 = MetrizedLineBundle::new(2, 1, ArchKind::Max).expect("valid");
        let i = r.gen_range(0..3);
        if !x.as_rats()[i].is_zero() {
            let s = Section::coordinate(3, i);
            if height_adelic(&b1, &s, &AdelicPoint::rational(x.clone())).ok() != height_point(&b1, &x).ok() {
                bad += 1;
            }
        }
        let y = point(r, 2, 40);
        let b = MetrizedLineBundle::new(1, r.gen_range(1..=3), a).expect("valid");
        match (restrict_to_point(&b, &y), height_point(&b, &y)) {
            (Ok(l), Ok(h)) if l.vol_exact() == Some(h.recip()) => {}
            _ => bad += 1,
        }
    }
    check(
        "heights: multiplicativity, section independence, restriction volume",
        bad,
        200,
    )
}

fn twists(r: &mut ChaCha8Rng) -> Check {
    let mut bad = 0;
    let p5 = Place::finite(5).expect("prime");
    for _ in 0..100 {
        let a = arch(r);
        let b = MetrizedLineBundle::new(1, 1, a).expect("valid");
        let x = point(r, 2, 30);
        let d = RatMatrix::diagonal(&[nonzero_rat(r, 20, 20), nonzero_rat(r, 20, 20)]);
        let g = AdelicGroupElement::identity(2)
            .with_component(p5.clone(), d.clone())
            .and_then(|g| g.with_component(Place::Infinite, d.clone()))
            .expect("invertible");
        let k: Vec<i64> = (0..4).map(|_| r.gen_range(-5..=5)).collect();
        if (k[0] * k[3] - k[1] * k[2]) % 5 != 0 {
            let km = RatMatrix::from_rows(vec![
                vec![Rat::from_integer(k[0].into()), Rat::from_integer(k[1].into())],
                vec![Rat::from_integer(k[2].into()), Rat::from_integer(k[3].into())],
            ])
            .expect("square");
            let moved = g.left_multiply_at(&p5, &km).expect("invertible");
            if twisted_height(&b, &g, &x).ok() != twisted_height(&b, &moved, &x).ok() {
                bad += 1;
            }
        }
        let s = Section::monomial(if r.gen() { vec![1, 0] } else { vec![0, 1] });
        if !s.eval(&x.as_rats()).is_zero() {
            match compare_twisted(&b, &g, &s, &x) {
                Ok((lhs, rhs)) if lhs == rhs => {}
                _ => bad += 1,
            }
        }
        if twisted_height(&b, &AdelicGroupElement::identity(2), &x).ok() != height_point(&b, &x).ok() {
            bad += 1;
        }
    }
    check(
        "twists: unimodular invariance, weight comparison, identity twist",
        bad,
        100,
    )
}

fn arakelov(r: &mut ChaCha8Rng) -> Check {
    let mut bad = 0;
    for degrees in [vec![1], vec![1, 2], vec![-1, 0]] {
        let s = Complex64::new(0.5, r.gen_range(-2.0..2.0));
        let spec = ArakelovSeriesSpec {
            degrees,
            arch: arch(r),
            s,
            cutoff: 12,
            phi: PhiKind::Theta,
        };
        match theta_duality_defect(&spec, 1e-12) {
            Ok((defect, bound)) if defect <= bound.max(1e-9) => {}
            _ => bad += 1,
        }
    }
    match grouped_series_coefficients(60, Complex64::new(4.0, 1.0), 1e-12) {
        Ok(g)
            if g.bit_exact()
                && g.rows
                    .iter()
                    .skip(1)
                    .all(|row| Some(row.count) == euler_phi(row.height).ok().map(|p| 4 * p)) => {}
        _ => bad += 1,
    }
    check("arakelov: termwise duality, grouped coefficients", bad, 4)
}

fn fibrations(r: &mut ChaCha8Rng) -> Check {
    let mut bad = 0;
    for _ in 0..200 {
        let n = r.gen_range(0..=3);
        let c = FibrationLineClass::new(r.gen_range(-3..=3), r.gen_range(-3..=3), r.gen_range(-6..=6));
        let p = fn_point(r, 20);
        let a = arch(r);
        let (h1, h2) = character_shift_invariance(n, &c, &p, a);
        if h1 != h2 {
            bad += 1;
        }
        let h = height_fn(n, &c, &p, a);
        if chart_representatives(n, &p)
            .iter()
            .any(|rep| height_from_representative(n, &c, rep, a).ok().as_ref() != Some(&h))
        {
            bad += 1;
        }
    }
    check("fibrations: character shift, chart independence", bad, 200)
}

fn counts_and_densities() -> Check {
    let mut bad = 0;
    let thresholds = [1.0, 2.0, 3.5, 7.0, 20.0];
    for (n, a) in [
        (1, ArchKind::Max),
        (1, ArchKind::L2),
        (2, ArchKind::Max),
        (2, ArchKind::L2),
    ] {
        let b = MetrizedLineBundle::new(n, 1, a).expect("valid");
        match (count_table(&b, &thresholds), count_by_heights(&b, &thresholds)) {
            (Ok(t), Ok(c)) if t.counts == c => {}
            _ => bad += 1,
        }
    }
    for p in [2u64, 3, 5, 7, 11] {
        let prime = Prime::new(p).expect("prime");
        let pr = Rat::from_integer(p.into());
        let product = local_density_finite(Variety::Pn(1), &prime)
            .and_then(|d| convergence_factor(Variety::Pn(1), &prime).map(|c| d * c));
        if product.ok() != Some(Rat::one() - (&pr * &pr).recip()) {
            bad += 1;
        }
    }
    check("counts and local densities: two count paths, exact P¹ factors", bad, 9)
}

/// Runs every check with a fixed seed; the result is deterministic.
pub fn run() -> Vec<Check> {
    let mut r = ChaCha8Rng::seed_from_u64(0x5eed);
    vec![
        places(&mut r),
        lattices(&mut r),
        heights(&mut r),
        twists(&mut r),
        arakelov(&mut r),
        fibrations(&mut r),
        counts_and_densities(),
    ]
}
