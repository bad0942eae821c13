//! Hirzebruch surfaces F_n as P¹-bundles over P¹ induced by a G_m-torsor of class n.
//!
//! Points are written in Cox coordinates `(u, v; s, t)` with `(u:v)` on the base and
//! `(s:t)` on the fiber. The torus `(λ, μ)` acts by `(λu, λv, μs, μλ^n t)`. A class
//! `(k, w, j)` has fiber degree k and base degree `e = n·w + j`; its height is
//! `M^k · N^e` where `N` is the base height and `M` the height of `(s:t)` in the
//! fiber lattice `Z ⊕ Z·N^{-n}`.

use num_integer::Integer;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::arakelov::base_points;
use crate::error::{Error, Result};
use crate::heights::{local_gauge, restrict_bundle_sum, ArchKind, ProjPoint};
use crate::lattice::HermitianLattice;
use crate::magnitude::Magnitude;
use crate::places::{abs_v, support, Place, Rat};

/// Default cap on the number of points produced by one enumeration.
pub const DEFAULT_FN_CAPACITY: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FibrationLineClass {
    pub k: i64,
    pub w: i64,
    pub j: i64,
}

impl FibrationLineClass {
    pub fn new(k: i64, w: i64, j: i64) -> Self {
        FibrationLineClass { k, w, j }
    }

    /// Base degree `n·w + j`, the only combination of w and j heights see.
    pub fn base_degree(&self, n: i64) -> i64 {
        n * self.w + self.j
    }

    /// `(k, w+1, j−n)`, the same bundle after twisting the linearization by a character.
    pub fn shifted(&self, n: i64) -> Self {
        FibrationLineClass {
            k: self.k,
            w: self.w + 1,
            j: self.j - n,
        }
    }
}

/// A rational point of F_n: primitive base `(u:v)` and coprime fiber `(s:t)`, each with
/// first nonzero coordinate positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FnPoint {
    pub base: (i64, i64),
    pub fiber: (i64, i64),
}

fn canonical_pair(a: i64, b: i64) -> Result<(i64, i64)> {
    let g = a.gcd(&b);
    if g == 0 {
        return Err(Error::invalid("pair (0, 0) is not a projective point"));
    }
    let (a, b) = (a / g, b / g);
    Ok(if a < 0 || (a == 0 && b < 0) { (-a, -b) } else { (a, b) })
}

impl FnPoint {
    pub fn new(base: (i64, i64), fiber: (i64, i64)) -> Result<Self> {
        Ok(FnPoint {
            base: canonical_pair(base.0, base.1)?,
            fiber: canonical_pair(fiber.0, fiber.1)?,
        })
    }
}

/// `H_{O(1)}` of the base point: `max(|u|,|v|)` or `sqrt(u² + v²)`.
pub fn base_height(base: (i64, i64), arch: ArchKind) -> Magnitude {
    local_gauge(
        arch,
        &Place::Infinite,
        &[Rat::from_integer(base.0.into()), Rat::from_integer(base.1.into())],
    )
}

fn ipow(m: &Magnitude, e: i64) -> Magnitude {
    m.powi(e)
}

/// Height of the fiber coordinates in the lattice `Z ⊕ Z·N^{-n}`.
pub fn fiber_height(n: i64, p: &FnPoint, arch: ArchKind) -> Magnitude {
    let nb = base_height(p.base, arch);
    let scale = ipow(&nb, -n); // N^{-n}
    let s = Rat::from_integer(p.fiber.0.into());
    let t = Rat::from_integer(p.fiber.1.into());
    match arch {
        ArchKind::Max => {
            let tn = Magnitude::Rational(t.abs()).mul(&scale);
            Magnitude::Rational(s.abs()).max(tn)
        }
        ArchKind::L2 => Magnitude::sqrt(&s * &s + &t * &t * scale.square()),
    }
}

/// `M^k · N^{n w + j}`.
pub fn height_fn(n: i64, c: &FibrationLineClass, p: &FnPoint, arch: ArchKind) -> Magnitude {
    let m = fiber_height(n, p, arch);
    let nb = base_height(p.base, arch);
    ipow(&m, c.k).mul(&ipow(&nb, c.base_degree(n)))
}

/// Heights of one point under `c` and under its character shift.
pub fn character_shift_invariance(
    n: i64,
    c: &FibrationLineClass,
    p: &FnPoint,
    arch: ArchKind,
) -> (Magnitude, Magnitude) {
    (height_fn(n, c, p, arch), height_fn(n, &c.shifted(n), p, arch))
}

/// Rewrites a point and class of F_n with n < 0 as a point and class of F_{|n|} by
/// swapping the fiber coordinates; heights are preserved.
pub fn normalize(n: i64, c: &FibrationLineClass, p: &FnPoint) -> (i64, FibrationLineClass, FnPoint) {
    if n >= 0 {
        return (n, *c, *p);
    }
    let m = -n;
    let class = FibrationLineClass {
        k: c.k,
        w: c.w,
        j: c.j + m * (c.k - 2 * c.w),
    };
    let point = FnPoint::new(p.base, (p.fiber.1, p.fiber.0)).expect("swap keeps the point valid");
    (m, class, point)
}

/// Height from an arbitrary rational Cox representative `(u, v, s, t)` as a product of
/// local factors over all places; independent of the representative.
pub fn height_from_representative(n: i64, c: &FibrationLineClass, rep: &[Rat; 4], arch: ArchKind) -> Result<Magnitude> {
    if (rep[0].is_zero() && rep[1].is_zero()) || (rep[2].is_zero() && rep[3].is_zero()) {
        return Err(Error::invalid("Cox representative lies in the excluded locus"));
    }
    let mut places = vec![Place::Infinite];
    for x in rep.iter().filter(|x| !x.is_zero()) {
        places.extend(support(x).into_iter().map(Place::Finite));
    }
    places.sort();
    places.dedup();
    let e = c.base_degree(n);
    let mut h = Magnitude::one();
    for v in &places {
        let kind = if v.is_finite() { ArchKind::Max } else { arch };
        let nb = local_gauge(kind, v, &rep[..2]);
        let scale = ipow(&nb, -n);
        let m = match (v, kind) {
            (Place::Infinite, ArchKind::L2) => Magnitude::sqrt(&rep[2] * &rep[2] + &rep[3] * &rep[3] * scale.square()),
            _ => {
                let s = Magnitude::Rational(abs_v(&rep[2], v));
                s.max(Magnitude::Rational(abs_v(&rep[3], v)).mul(&scale))
            }
        };
        h = h.mul(&ipow(&m, c.k)).mul(&ipow(&nb, e));
    }
    Ok(h)
}

/// The representatives of a point normalized in each of the four standard charts that
/// contain it (`u ≠ 0` or `v ≠ 0`, then `s ≠ 0` or `t ≠ 0`).
pub fn chart_representatives(n: i64, p: &FnPoint) -> Vec<[Rat; 4]> {
    let r = |x: i64| Rat::from_integer(x.into());
    let (u, v) = (r(p.base.0), r(p.base.1));
    let (s, t) = (r(p.fiber.0), r(p.fiber.1));
    let mut out = Vec::new();
    for base_chart in [0usize, 1] {
        let lead = if base_chart == 0 { &u } else { &v };
        if lead.is_zero() {
            continue;
        }
        // λ = 1/lead
        let lam = lead.recip();
        let lam_n = pow_rat(&lam, n);
        let (bu, bv, fs, ft) = (&u * &lam, &v * &lam, s.clone(), &t * &lam_n);
        for fiber_chart in [0usize, 1] {
            let lead_f = if fiber_chart == 0 { &fs } else { &ft };
            if lead_f.is_zero() {
                continue;
            }
            let mu = lead_f.recip();
            out.push([bu.clone(), bv.clone(), &fs * &mu, &ft * &mu]);
        }
    }
    out
}

fn pow_rat(x: &Rat, e: i64) -> Rat {
    let p = num_traits::pow(x.clone(), e.unsigned_abs() as usize);
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

/// Effective iff some bi-homogeneous polynomial in `u, v, s, t` has this class, i.e.
/// `k ≥ 0` and `n w + j ≥ 0`.
pub fn is_effective(n: i64, c: &FibrationLineClass) -> bool {
    c.k >= 0 && c.base_degree(n) >= 0
}

/// Anticanonical class `(2, 1, 2)`: the sum of the classes of the four Cox coordinates,
/// `(0,1) + (0,1) + (1,0) + (1,n)` in (fiber, base) degrees.
pub fn anticanonical_class(_n: i64) -> FibrationLineClass {
    FibrationLineClass { k: 2, w: 1, j: 2 }
}

/// Fiber of F_n over `b` as a lattice: the restriction of `O ⊕ O(n)` to b.
pub fn fiber_lattice(n: i64, base: (i64, i64), arch: ArchKind) -> Result<HermitianLattice> {
    restrict_bundle_sum(&[0, n], 1, arch, &ProjPoint::from_i64(&[base.0, base.1])?)
}

fn le_bound(h: &Magnitude, bound2: &Rat) -> bool {
    h.square() <= *bound2
}

/// All points of height at most `h_bound`, fiber by fiber over the base points in height
/// order, fibers in lexicographic order.
pub fn enumerate_fn(n: i64, c: &FibrationLineClass, arch: ArchKind, h_bound: f64) -> Result<Vec<FnPoint>> {
    enumerate_fn_capped(n, c, arch, h_bound, DEFAULT_FN_CAPACITY)
}

pub fn enumerate_fn_capped(
    n: i64,
    c: &FibrationLineClass,
    arch: ArchKind,
    h_bound: f64,
    cap: usize,
) -> Result<Vec<FnPoint>> {
    if n < 0 {
        return Err(Error::invalid("normalize negative n before enumerating"));
    }
    let e = c.base_degree(n);
    if c.k < 1 || e < 1 {
        return Err(Error::invalid("enumeration needs fiber degree ≥ 1 and base degree ≥ 1"));
    }
    if !(h_bound >= 1.0) {
        return Ok(Vec::new());
    }
    if !h_bound.is_finite() {
        return Err(Error::invalid("height bound must be finite"));
    }
    let slack = 1.0 + 1e-9;
    let bound = Rat::from_float(h_bound).expect("finite");
    let bound2 = &bound * &bound;
    // exact filtering below; the euclidean base height need not be an integer
    let base_max = (h_bound.powf(1.0 / e as f64) * slack).floor() as u64 + 1;
    let bases = base_points(arch, base_max.max(1), cap)?;
    let chunks: Vec<Result<Vec<FnPoint>>> = bases
        .par_iter()
        .map(|&(_, u, v)| {
            let nb = base_height((u, v), arch);
            let base_factor = nb.powi(e);
            if !le_bound(&base_factor, &bound2) {
                return Ok(Vec::new());
            }
            let x = (h_bound / base_factor.to_f64()).powf(1.0 / c.k as f64) * slack;
            let smax = x.floor() as i64;
            let tmax_f = x * nb.to_f64().powi(n as i32) * slack;
            if tmax_f > 1e15 {
                return Err(Error::Capacity { limit: cap });
            }
            let tmax = tmax_f.floor() as i64;
            let mut pts = Vec::new();
            for s in 0..=smax {
                let ts = if s == 0 { 1..=1 } else { -tmax..=tmax };
                for t in ts {
                    if s.gcd(&t) != 1 {
                        continue;
                    }
                    let p = FnPoint {
                        base: (u, v),
                        fiber: (s, t),
                    };
                    if le_bound(&height_fn(n, c, &p, arch), &bound2) {
                        pts.push(p);
                        if pts.len() > cap {
                            return Err(Error::Capacity { limit: cap });
                        }
                    }
                }
            }
            Ok(pts)
        })
        .collect();
    let mut out = Vec::new();
    for chunk in chunks {
        out.extend(chunk?);
        if out.len() > cap {
            return Err(Error::Capacity { limit: cap });
        }
    }
    Ok(out)
}

/// `#{P : H(P) ≤ H}` for each threshold, from a single enumeration at the largest one.
pub fn count_fn(n: i64, c: &FibrationLineClass, arch: ArchKind, thresholds: &[f64]) -> Result<Vec<u64>> {
    let top = thresholds.iter().cloned().fold(0.0, f64::max);
    let pts = enumerate_fn(n, c, arch, top)?;
    let mut heights: Vec<f64> = pts.iter().map(|p| height_fn(n, c, p, arch).to_f64()).collect();
    heights.sort_by(f64::total_cmp);
    Ok(thresholds
        .iter()
        .map(|&h| heights.partition_point(|&x| x <= h * (1.0 + 1e-12)) as u64)
        .collect())
}
