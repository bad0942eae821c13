//! Random generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

use heightzeta_core::fibration::{height_from_representative, FibrationLineClass, FnPoint};
use heightzeta_core::heights::ArchKind;
use heightzeta_core::{HermitianLattice, Magnitude, Rat, RatMatrix};
use num_integer::Integer;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rat(r: &mut ChaCha8Rng, num: i64, den: i64) -> Rat {
    Rat::new(r.gen_range(-num..=num).into(), r.gen_range(1..=den).into())
}

pub fn random_nonzero_rat(r: &mut ChaCha8Rng, num: i64, den: i64) -> Rat {
    loop {
        let q = random_rat(r, num, den);
        if q != Rat::from_integer(0.into()) {
            return q;
        }
    }
}

/// Invertible integer matrix with small entries.
pub fn random_invertible(r: &mut ChaCha8Rng, d: usize, range: i64) -> RatMatrix {
    loop {
        let rows: Vec<Vec<Rat>> = (0..d)
            .map(|_| {
                (0..d)
                    .map(|_| Rat::from_integer(r.gen_range(-range..=range).into()))
                    .collect()
            })
            .collect();
        let m = RatMatrix::from_rows(rows).unwrap();
        if m.det().is_ok_and(|x| x != Rat::from_integer(0.into())) {
            return m;
        }
    }
}

/// `AᵀA / k` for a random invertible A; min eigenvalue kept away from zero.
pub fn random_lattice(r: &mut ChaCha8Rng, d: usize) -> HermitianLattice {
    loop {
        let a = random_invertible(r, d, 2);
        let k = Rat::from_integer(r.gen_range(1..=3).into());
        let g = a.transpose().mul(&a).unwrap();
        let rows: Vec<Vec<Rat>> = (0..d).map(|i| g.row(i).iter().map(|x| x / &k).collect()).collect();
        let l = HermitianLattice::from_rational(RatMatrix::from_rows(rows).unwrap()).unwrap();
        // reject very skewed forms so theta sums stay small
        if l.vol() > 0.2 && l.dual().vol() > 0.2 && shortest_norm2(&l) > 0.15 {
            return l;
        }
    }
}

fn shortest_norm2(l: &HermitianLattice) -> f64 {
    let v = l.enumerate_vectors(2.0).unwrap();
    v.iter()
        .filter(|x| x.iter().any(|&c| c != 0))
        .map(|x| l.norm2(x).0)
        .fold(f64::INFINITY, f64::min)
}

/// `Σ_{0 < ‖e‖ ≤ R} ‖e‖^{-s}` plus the integral tail `ω_d R^{d−s} / ((s−d) vol)`, with
/// `ω_d` the area of the unit sphere in R^d.
pub fn zeta_direct(l: &HermitianLattice, s: num_complex::Complex64, radius: f64) -> num_complex::Complex64 {
    let d = l.rank() as f64;
    let mut terms: Vec<num_complex::Complex64> = Vec::new();
    l.for_each_vector(radius * radius, |x| {
        if x.iter().all(|&c| c == 0) {
            return;
        }
        let q = l.norm2(x).0;
        if q <= radius * radius {
            terms.push((-s * 0.5 * q.ln()).exp());
        }
    })
    .unwrap();
    // smallest terms first
    terms.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let body: num_complex::Complex64 = terms.into_iter().sum();
    let omega = match l.rank() {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("direct zeta oracle supports d ≤ 3"),
    };
    let tail = omega * (num_complex::Complex64::new(radius, 0.0)).powc(d - s) / ((s - d) * l.vol());
    body + tail
}

/// Canonical coprime pairs in a box: first nonzero coordinate positive.
fn canonical_pairs(amax: i64, bmax: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for a in 0..=amax {
        for b in -bmax..=bmax {
            if a == 0 && b <= 0 {
                continue;
            }
            if a.gcd(&b) == 1 {
                out.push((a, b));
            }
        }
    }
    out
}

/// Brute-force scan of F_n points with `N^e ≤ H` and height ≤ H, heights recomputed as
/// products of local factors from the raw Cox coordinates.
pub fn brute_force_fn(n: i64, c: &FibrationLineClass, arch: ArchKind, h: f64) -> BTreeSet<FnPoint> {
    let e = c.base_degree(n);
    let hr = Rat::from_float(h).unwrap();
    let h2 = &hr * &hr;
    let nmax = h.powf(1.0 / e as f64).floor() as i64 + 1;
    let mut out = BTreeSet::new();
    for (u, v) in canonical_pairs(nmax, nmax) {
        let nb2 = match arch {
            ArchKind::Max => u.abs().max(v.abs()).pow(2),
            ArchKind::L2 => u * u + v * v,
        };
        let nb = Magnitude::sqrt(Rat::from_integer(nb2.into()));
        if nb.powi(e).square() > h2 {
            continue;
        }
        let room = (h / nb.to_f64().powi(e as i32)).powf(1.0 / c.k as f64) + 1.0;
        let smax = room.floor() as i64;
        let tmax = (room * nb.to_f64().powi(n as i32)).floor() as i64 + 1;
        for (s, t) in canonical_pairs(smax, tmax) {
            let rep = [u, v, s, t].map(|x| Rat::from_integer(x.into()));
            let ht = height_from_representative(n, c, &rep, arch).unwrap();
            if ht.square() <= h2 {
                out.insert(FnPoint::new((u, v), (s, t)).unwrap());
            }
        }
    }
    out
}
