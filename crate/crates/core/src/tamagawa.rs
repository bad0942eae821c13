//! Tamagawa numbers of P^n and of Hirzebruch surfaces F_n with respect to metrized
//! anticanonical bundles.

use std::cell::{Cell, RefCell};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_traits::One;
use rayon::prelude::*;

use crate::counts::{count_table, fit_asymptotics, geometric_thresholds, AsymptoticFit, CountTable, FitModel};
use crate::error::{Error, Result};
use crate::heights::{ArchKind, MetrizedLineBundle};
use crate::places::{primes_up_to, rat_to_f64, Prime, Rat};
use crate::quad::{integrate, integrate_to_infinity, integrate_with_breaks, Quadrature};
use crate::special::gamma;
use crate::sum::ExactSum;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variety {
    /// Projective space P^n, n ≥ 1.
    Pn(usize),
    /// Hirzebruch surface F_n; F_{-n} ≅ F_n.
    Fn(i64),
}

impl Variety {
    pub fn dim(&self) -> usize {
        match self {
            Variety::Pn(n) => *n,
            Variety::Fn(_) => 2,
        }
    }

    pub fn picard_rank(&self) -> u32 {
        match self {
            Variety::Pn(_) => 1,
            Variety::Fn(_) => 2,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Variety::Pn(0) => Err(Error::invalid("P^n needs n ≥ 1")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Variety {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variety::Pn(n) => write!(f, "P{n}"),
            Variety::Fn(n) => write!(f, "F{n}"),
        }
    }
}

impl FromStr for Variety {
    type Err = Error;

    /// `P<n>` or `F<n>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("unknown variety '{s}' (expected P<n> or F<n>)"));
        let (head, tail) = s.split_at(s.char_indices().nth(1).map(|(i, _)| i).ok_or_else(bad)?);
        match head {
            "P" | "p" => {
                let n: usize = tail.parse().map_err(|_| bad())?;
                let v = Variety::Pn(n);
                v.validate()?;
                Ok(v)
            }
            "F" | "f" => Ok(Variety::Fn(tail.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TamagawaSpec {
    pub variety: Variety,
    pub arch: ArchKind,
    pub prime_cutoff: u64,
    /// Finite primes in Σ; ∞ is always included.
    pub sigma: Vec<u64>,
    pub quad_eps: f64,
}

impl TamagawaSpec {
    pub fn new(variety: Variety, arch: ArchKind, prime_cutoff: u64) -> Self {
        TamagawaSpec {
            variety,
            arch,
            prime_cutoff,
            sigma: Vec::new(),
            quad_eps: 1e-10,
        }
    }

    pub fn with_sigma(mut self, primes: Vec<u64>) -> Self {
        self.sigma = primes;
        self
    }

    pub fn with_quad_eps(mut self, eps: f64) -> Self {
        self.quad_eps = eps;
        self
    }

    fn validate(&self) -> Result<()> {
        self.variety.validate()?;
        if self.prime_cutoff < 2 {
            return Err(Error::invalid("prime cutoff must be at least 2"));
        }
        if !(self.quad_eps > 0.0) {
            return Err(Error::invalid("quadrature tolerance must be positive"));
        }
        for &p in &self.sigma {
            Prime::new(p)?;
        }
        Ok(())
    }
}

fn density_u64(variety: Variety, p: u64) -> Rat {
    let pb = Rat::from_integer(p.into());
    match variety {
        // #P^n(F_p) / p^n
        Variety::Pn(n) => {
            let pn = num_traits::pow(pb.clone(), n);
            (&pn * &pb - Rat::one()) / ((&pb - Rat::one()) * pn)
        }
        // #F_n(F_p) / p² = (p+1)² / p²
        Variety::Fn(_) => {
            let r = (&pb + Rat::one()) / &pb;
            &r * &r
        }
    }
}

fn convergence_u64(variety: Variety, p: u64) -> Rat {
    let base = Rat::one() - Rat::new(1.into(), p.into());
    num_traits::pow(base, variety.picard_rank() as usize)
}

/// Total mass of the local measure at p: `#X(F_p) / p^{dim X}`.
pub fn local_density_finite(variety: Variety, p: &Prime) -> Result<Rat> {
    variety.validate()?;
    let p = p.to_u64().ok_or_else(|| Error::invalid("prime too large"))?;
    Ok(density_u64(variety, p))
}

/// `(1 − 1/p)^r` with r the Picard rank.
pub fn convergence_factor(variety: Variety, p: &Prime) -> Result<Rat> {
    variety.validate()?;
    let p = p.to_u64().ok_or_else(|| Error::invalid("prime too large"))?;
    Ok(convergence_u64(variety, p))
}

/// Real density of the anticanonical measure on an affine chart.
fn chart_density(variety: Variety, arch: ArchKind, x: &[f64]) -> f64 {
    match variety {
        Variety::Pn(n) => {
            let g = match arch {
                ArchKind::Max => x.iter().fold(1.0f64, |m, c| m.max(c.abs())),
                ArchKind::L2 => (1.0 + x.iter().map(|c| c * c).sum::<f64>()).sqrt(),
            };
            g.powi(-(n as i32 + 1))
        }
        Variety::Fn(n) => {
            let (z, y) = (x[0], x[1]);
            let n = n.abs() as i32;
            let base = match arch {
                ArchKind::Max => z.abs().max(1.0),
                ArchKind::L2 => (1.0 + z * z).sqrt(),
            };
            let scaled = y.abs() * base.powi(-n);
            let fiber = match arch {
                ArchKind::Max => scaled.max(1.0),
                ArchKind::L2 => (1.0 + scaled * scaled).sqrt(),
            };
            1.0 / (fiber * fiber * base.powi(n + 2))
        }
    }
}

fn add(a: Quadrature, b: Quadrature) -> Quadrature {
    Quadrature {
        value: a.value + b.value,
        error: a.error + b.error,
    }
}

/// Fiber integral over t for fixed base coordinate z, with the fiber split at `cut`.
fn fn_fiber_integral(n: i64, arch: ArchKind, z: f64, cut: Option<f64>, tol: f64) -> Result<Quadrature> {
    let kink = match arch {
        ArchKind::Max => z.abs().max(1.0).powi(n.abs() as i32),
        ArchKind::L2 => (1.0 + z * z).sqrt().powi(n.abs() as i32),
    };
    let f = move |y: f64| chart_density(Variety::Fn(n), arch, &[z, y]);
    let mut breaks = vec![-kink, 0.0, kink];
    if let Some(c) = cut {
        if !breaks.contains(&c) {
            breaks.push(c);
        }
        breaks.sort_by(f64::total_cmp);
    }
    integrate_line_local(&f, &breaks, tol)
}

/// Iterated base-fiber quadrature; `cuts` splits the base and fiber lines.
fn fn_density(n: i64, arch: ArchKind, eps: f64, cuts: (Option<f64>, Option<f64>)) -> Result<Quadrature> {
    let inner_tol = eps * 1e-3;
    let worst_inner = Cell::new(0.0f64);
    let failure = RefCell::new(None);
    let g = |z: f64| match fn_fiber_integral(n, arch, z, cuts.1, inner_tol) {
        Ok(q) => {
            worst_inner.set(worst_inner.get().max(q.error / q.value.abs().max(f64::MIN_POSITIVE)));
            q.value
        }
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let mut breaks = vec![-1.0, 0.0, 1.0];
    if let Some(c) = cuts.0 {
        if !breaks.contains(&c) {
            breaks.push(c);
        }
        breaks.sort_by(f64::total_cmp);
    }
    let outer = integrate_line_local(&g, &breaks, eps * 0.5)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    // inner values carry relative error at most `worst_inner`
    let inner = worst_inner.get();
    Ok(Quadrature {
        value: outer.value,
        error: outer.error + inner * outer.value.abs(),
    })
}

/// Nested quadrature over R^n for P^n, the first coordinate split at `cut`.
fn pn_nested(n: usize, arch: ArchKind, eps: f64, cut: Option<f64>) -> Result<Quadrature> {
    fn level(n: usize, arch: ArchKind, prefix: &[f64], eps: f64, cut: Option<f64>) -> Result<Quadrature> {
        if prefix.len() == n {
            return Ok(Quadrature {
                value: chart_density(Variety::Pn(n), arch, prefix),
                error: 0.0,
            });
        }
        let depth = prefix.len();
        let inner_tol = eps * 1e-3;
        let failure = RefCell::new(None);
        let worst = Cell::new(0.0f64);
        let prefix_cell = RefCell::new(prefix.to_vec());
        let f = |t: f64| {
            let mut p = prefix_cell.borrow_mut();
            p.push(t);
            let r = level(n, arch, &p, inner_tol, None);
            p.pop();
            match r {
                Ok(q) => {
                    worst.set(worst.get().max(q.error / q.value.abs().max(f64::MIN_POSITIVE)));
                    q.value
                }
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        };
        let g = prefix.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let mut breaks = vec![-g, 0.0, g];
        if matches!(arch, ArchKind::Max) && g > 1.0 {
            breaks = vec![-g, -1.0, 0.0, 1.0, g];
        }
        if depth == 0 {
            breaks = vec![-1.0, 0.0, 1.0];
            if let Some(c) = cut {
                if !breaks.contains(&c) {
                    breaks.push(c);
                }
                breaks.sort_by(f64::total_cmp);
            }
        }
        breaks.dedup();
        let q = integrate_line_local(&f, &breaks, eps * 0.5)?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(Quadrature {
            value: q.value,
            error: q.error + worst.get() * q.value.abs(),
        })
    }
    level(n, arch, &[], eps, cut)
}

fn integrate_line_local(f: &dyn Fn(f64) -> f64, breaks: &[f64], tol: f64) -> Result<Quadrature> {
    let lo = breaks[0];
    let hi = *breaks.last().expect("nonempty");
    let left = integrate_to_infinity(|t| f(-t), -lo, tol / 3.0)?;
    let right = integrate_to_infinity(f, hi, tol / 3.0)?;
    let mid = integrate_with_breaks(f, breaks, tol / 3.0)?;
    Ok(add(add(left, mid), right))
}

/// Total real mass of the anticanonical measure.
///
/// P^n with the max metric is integrated piecewise in closed form: the unit cube has mass
/// 2^n and the shell `max|x_i| = r > 1` contributes `n 2^n r^{n-1} · r^{-(n+1)} dr`.
/// P^n with the euclidean metric reduces to a radial integral. F_n is integrated over the
/// base and then the fiber.
pub fn archimedean_density(variety: Variety, arch: ArchKind, quad_eps: f64) -> Result<Quadrature> {
    variety.validate()?;
    if !(quad_eps > 0.0) {
        return Err(Error::invalid("quadrature tolerance must be positive"));
    }
    match (variety, arch) {
        (Variety::Pn(n), ArchKind::Max) => {
            let cube = 2f64.powi(n as i32);
            let shell = n as f64 * cube; // ∫_1^∞ r^{-2} dr = 1
            Ok(Quadrature {
                value: cube + shell,
                error: 0.0,
            })
        }
        (Variety::Pn(n), ArchKind::L2) => {
            let half = n as f64 / 2.0;
            let sphere = 2.0 * PI.powf(half) / gamma(Complex64::new(half, 0.0)).re;
            let radial = |r: f64| r.powi(n as i32 - 1) * (1.0 + r * r).powf(-(n as f64 + 1.0) / 2.0);
            let q = add(
                integrate(radial, 0.0, 1.0, quad_eps / (2.0 * sphere))?,
                integrate_to_infinity(radial, 1.0, quad_eps / (2.0 * sphere))?,
            );
            Ok(Quadrature {
                value: sphere * q.value,
                error: sphere * q.error,
            })
        }
        (Variety::Fn(n), _) => fn_density(n, arch, quad_eps, (None, None)),
    }
}

/// The archimedean mass recomputed by quadrature with the real points on the hyperplane
/// `x_1 = c` (base coordinate for F_n) removed from the domain.
pub fn archimedean_density_off_hyperplane(
    variety: Variety,
    arch: ArchKind,
    c: f64,
    quad_eps: f64,
) -> Result<Quadrature> {
    variety.validate()?;
    match variety {
        Variety::Pn(n) if n > 3 => Err(Error::invalid("nested quadrature supports n ≤ 3")),
        Variety::Pn(n) => pn_nested(n, arch, quad_eps, Some(c)),
        Variety::Fn(n) => fn_density(n, arch, quad_eps, (Some(c), Some(c))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalFactor {
    pub p: u64,
    pub density: Rat,
    pub convergence: Rat,
}

impl LocalFactor {
    pub fn product(&self) -> Rat {
        &self.density * &self.convergence
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TamagawaReport {
    pub spec: TamagawaSpec,
    /// The first 20 primes' factors.
    pub factors: Vec<LocalFactor>,
    pub mu_infinity: f64,
    pub mu_infinity_error: f64,
    /// `L*_Σ(1, Pic)`.
    pub l_star: f64,
    pub euler_product: f64,
    pub tau: f64,
    pub tail_error: f64,
    pub error: f64,
}

/// `ln` of one Euler factor, computed from `factor − 1` to keep relative accuracy.
fn ln_factor(variety: Variety, p: u64, in_sigma: bool) -> f64 {
    let f = if in_sigma {
        density_u64(variety, p)
    } else {
        density_u64(variety, p) * convergence_u64(variety, p)
    };
    rat_to_f64(&(f - Rat::one())).ln_1p()
}

/// `τ = L*_Σ(1,Pic) · μ_∞ · Π_{p ≤ P} c_p μ_p`, with `c_p = 1` for p ∈ Σ.
pub fn tamagawa_number(spec: &TamagawaSpec) -> Result<TamagawaReport> {
    spec.validate()?;
    let v = spec.variety;
    let r = v.picard_rank() as i32;
    let mu = archimedean_density(v, spec.arch, spec.quad_eps)?;
    let primes = primes_up_to(spec.prime_cutoff);
    let sigma = &spec.sigma;
    let log_sum = primes
        .par_chunks(4096)
        .map(|block| {
            let mut s = ExactSum::new();
            for &p in block {
                s.add(ln_factor(v, p, sigma.contains(&p)));
            }
            s
        })
        .reduce(ExactSum::new, |mut a, b| {
            a.merge(&b);
            a
        });
    let euler = log_sum.value().exp();
    let mut l_star = 1.0;
    for &p in sigma {
        l_star *= (1.0 - 1.0 / p as f64).powi(r);
    }
    let factors = primes
        .iter()
        .take(20)
        .map(|&p| LocalFactor {
            p,
            density: density_u64(v, p),
            convergence: convergence_u64(v, p),
        })
        .collect();
    let tau = l_star * mu.value * euler;
    // For p > P every factor lies in [1 − C/p², 1] with C = 1 (P^n) or 2 (F_n), so the
    // missing product is within C·Σ_{m>P} m^{-2} / (1 − 1/P²) ≤ C / ((P − 1)(1 − 1/P²)) in log.
    let pc = spec.prime_cutoff as f64;
    let c = match v {
        Variety::Pn(_) => 1.0,
        Variety::Fn(_) => 2.0,
    };
    let delta = c / ((pc - 1.0).max(1.0) * (1.0 - 1.0 / (pc * pc)));
    let tail_error = tau.abs() * delta.exp_m1();
    let rounding = tau.abs() * 4.0 * f64::EPSILON * (primes.len() as f64 + 10.0).sqrt();
    let quad_error = l_star * mu.error * euler;
    Ok(TamagawaReport {
        spec: spec.clone(),
        factors,
        mu_infinity: mu.value,
        mu_infinity_error: mu.error,
        l_star,
        euler_product: euler,
        tau,
        tail_error,
        error: tail_error + quad_error + rounding,
    })
}

/// `α(P^n) = 1/(n+1)`: the effective-cone constant of projective space.
pub fn alpha_pn(n: usize) -> f64 {
    1.0 / (n as f64 + 1.0)
}

/// `β = 1`: the Brauer group of P^n is trivial.
pub const BETA_PN: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PeyreCheck {
    pub predicted: f64,
    pub fitted: f64,
    pub tau: TamagawaReport,
    pub fit: AsymptoticFit,
    pub table: CountTable,
}

impl PeyreCheck {
    pub fn relative_gap(&self) -> f64 {
        (self.fitted - self.predicted).abs() / self.predicted.abs()
    }
}

/// Predicted `α β τ` against `θ` fitted to anticanonical counts with `N(H) ≈ θ H`.
///
/// `h_bound` is on the anticanonical scale `H_{O(n+1)}`; the fit uses 12 geometric
/// thresholds over its top two decades.
pub fn peyre_constant_check(n: usize, arch: ArchKind, prime_cutoff: u64, h_bound: f64) -> Result<PeyreCheck> {
    if !(1..=2).contains(&n) {
        return Err(Error::invalid("the Peyre check supports n ∈ {1, 2}"));
    }
    if !(h_bound > 100.0) {
        return Err(Error::invalid("anticanonical height bound must exceed 100"));
    }
    let tau = tamagawa_number(&TamagawaSpec::new(Variety::Pn(n), arch, prime_cutoff))?;
    let predicted = alpha_pn(n) * BETA_PN * tau.tau;
    let bundle = MetrizedLineBundle::new(n, n as i64 + 1, arch)?;
    let thresholds = geometric_thresholds(h_bound / 100.0, h_bound, 12);
    let table = count_table(&bundle, &thresholds)?;
    let fit = fit_asymptotics(&table, FitModel::pinned(1.0, 1.0))?;
    Ok(PeyreCheck {
        predicted,
        fitted: fit.theta,
        tau,
        fit,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::places::ratio;

    fn p(x: u64) -> Prime {
        Prime::new(x).unwrap()
    }

    #[test]
    fn local_factor_examples() {
        assert_eq!(local_density_finite(Variety::Pn(1), &p(2)).unwrap(), ratio(3, 2));
        assert_eq!(local_density_finite(Variety::Pn(2), &p(3)).unwrap(), ratio(13, 9));
        for n in 0..4 {
            assert_eq!(local_density_finite(Variety::Fn(n), &p(5)).unwrap(), ratio(36, 25));
        }
        assert_eq!(convergence_factor(Variety::Pn(1), &p(2)).unwrap(), ratio(1, 2));
        assert_eq!(convergence_factor(Variety::Fn(1), &p(2)).unwrap(), ratio(1, 4));
        for q in primes_up_to(200) {
            let prod = density_u64(Variety::Pn(1), q) * convergence_u64(Variety::Pn(1), q);
            assert_eq!(prod, Rat::one() - Rat::new(1.into(), (q * q).into()));
        }
    }

    #[test]
    fn archimedean_examples() {
        assert_eq!(
            archimedean_density(Variety::Pn(1), ArchKind::Max, 1e-10).unwrap().value,
            4.0
        );
        assert_eq!(
            archimedean_density(Variety::Pn(2), ArchKind::Max, 1e-10).unwrap().value,
            12.0
        );
        let l2 = archimedean_density(Variety::Pn(1), ArchKind::L2, 1e-11).unwrap();
        assert!((l2.value - PI).abs() < 1e-10);
        // π^{3/2}/Γ(3/2) = 2π
        let l2 = archimedean_density(Variety::Pn(2), ArchKind::L2, 1e-11).unwrap();
        assert!((l2.value - 2.0 * PI).abs() < 1e-10);
        for n in 0..3 {
            let q = archimedean_density(Variety::Fn(n), ArchKind::Max, 1e-8).unwrap();
            assert!((q.value - 16.0).abs() < 1e-7, "{n} {q:?}");
            let q = archimedean_density(Variety::Fn(n), ArchKind::L2, 1e-8).unwrap();
            assert!((q.value - PI * PI).abs() < 1e-7, "{n} {q:?}");
        }
    }

    #[test]
    fn tau_of_p1() {
        let r = tamagawa_number(&TamagawaSpec::new(Variety::Pn(1), ArchKind::Max, 100_000)).unwrap();
        assert!((r.tau - 24.0 / (PI * PI)).abs() < 1e-3, "{r:?}");
        assert!((r.tau - 24.0 / (PI * PI)).abs() <= r.error);
        assert_eq!(r.factors.len(), 20);
        let s =
            tamagawa_number(&TamagawaSpec::new(Variety::Pn(1), ArchKind::Max, 100_000).with_sigma(vec![2, 3])).unwrap();
        assert!((s.tau - r.tau).abs() < 1e-12);
    }

    #[test]
    fn doubling_cutoff_stays_within_tail() {
        for v in [Variety::Pn(1), Variety::Pn(2), Variety::Fn(1)] {
            let a = tamagawa_number(&TamagawaSpec::new(v, ArchKind::Max, 5_000).with_quad_eps(1e-8)).unwrap();
            let b = tamagawa_number(&TamagawaSpec::new(v, ArchKind::Max, 10_000).with_quad_eps(1e-8)).unwrap();
            assert!((a.tau - b.tau).abs() < a.tail_error, "{v}");
        }
    }

    #[test]
    fn hyperplane_removal() {
        for (v, arch) in [
            (Variety::Pn(1), ArchKind::Max),
            (Variety::Pn(1), ArchKind::L2),
            (Variety::Fn(1), ArchKind::Max),
        ] {
            let full = archimedean_density(v, arch, 1e-8).unwrap();
            let cut = archimedean_density_off_hyperplane(v, arch, 0.37, 1e-8).unwrap();
            assert!((full.value - cut.value).abs() < 1e-8, "{v} {arch}");
        }
    }

    #[test]
    fn parse_variety() {
        assert_eq!("P2".parse::<Variety>().unwrap(), Variety::Pn(2));
        assert_eq!("F-1".parse::<Variety>().unwrap(), Variety::Fn(-1));
        assert!("P0".parse::<Variety>().is_err());
        assert!("Q3".parse::<Variety>().is_err());
    }
}
