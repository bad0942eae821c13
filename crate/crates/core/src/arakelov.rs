//! Arakelov L-series over the base P¹: restrictions of `⊕ O(m_i)` to rational
//! points, summed against θ, ζ or a pure volume weight.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heights::{restrict_bundle_sum, ArchKind, ProjPoint};
use crate::lattice::{HermitianLattice, SeriesValue};
use crate::places::euler_phi;
use crate::sum::ComplexSum;

/// Default cap on the number of base points in one series.
pub const DEFAULT_POINT_CAPACITY: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiKind {
    /// `θ(L, 1) · vol(L)^s`
    Theta,
    /// `ζ(L, d s) · vol(L)^s`
    Zeta,
    /// `vol(L)^s`
    Norm,
}

impl FromStr for PhiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "theta" => Ok(PhiKind::Theta),
            "zeta" => Ok(PhiKind::Zeta),
            "norm" => Ok(PhiKind::Norm),
            _ => Err(Error::invalid(format!(
                "unknown phi kind {s:?} (expected theta, zeta or norm)"
            ))),
        }
    }
}

impl fmt::Display for PhiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhiKind::Theta => "theta",
            PhiKind::Zeta => "zeta",
            PhiKind::Norm => "norm",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArakelovSeriesSpec {
    pub degrees: Vec<i64>,
    pub arch: ArchKind,
    pub s: Complex64,
    /// Points b with `H_{O(1)}(b) ≤ cutoff` are summed.
    pub cutoff: u64,
    pub phi: PhiKind,
}

impl ArakelovSeriesSpec {
    pub fn validate(&self) -> Result<()> {
        if self.degrees.is_empty() {
            return Err(Error::invalid("degree list must be nonempty"));
        }
        if self.cutoff < 1 {
            return Err(Error::invalid("cutoff must be at least 1"));
        }
        Ok(())
    }

    /// Same series for `⊕ O(-m_i)` at `1 - s`.
    pub fn dual(&self) -> Self {
        ArakelovSeriesSpec {
            degrees: self.degrees.iter().map(|m| -m).collect(),
            s: 1.0 - self.s,
            ..self.clone()
        }
    }
}

/// Primitive canonical `(u, v)` with `H_{O(1)} ≤ cutoff`, ordered by height and then
/// lexicographically. Returns `(H², u, v)`.
pub fn base_points(arch: ArchKind, cutoff: u64, cap: usize) -> Result<Vec<(i64, i64, i64)>> {
    let b = i64::try_from(cutoff).map_err(|_| Error::invalid("cutoff too large"))?;
    let bound2 = b.checked_mul(b).ok_or_else(|| Error::invalid("cutoff too large"))?;
    let mut out = Vec::new();
    for u in 0..=b {
        let vs = if u == 0 { 1..=1 } else { -b..=b };
        for v in vs {
            if u.gcd(&v) != 1 {
                continue;
            }
            let h2 = match arch {
                ArchKind::Max => u.max(v.abs()).pow(2),
                ArchKind::L2 => u * u + v * v,
            };
            if h2 <= bound2 {
                out.push((h2, u, v));
                if out.len() > cap {
                    return Err(Error::Capacity { limit: cap });
                }
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// One summand of the series.
#[derive(Debug, Clone, PartialEq)]
pub struct TermRow {
    /// `H_{O(1)}(b)²`
    pub height_squared: i64,
    pub point: (i64, i64),
    pub vol: f64,
    /// θ(L_b, 1) or ζ(L_b, d s); one for the pure volume weight.
    pub lattice_value: Complex64,
    pub term: Complex64,
    pub error_bound: f64,
}

impl TermRow {
    /// `H_{O(1)}(b)`.
    pub fn height(&self) -> f64 {
        (self.height_squared as f64).sqrt()
    }
}

fn restriction(spec: &ArakelovSeriesSpec, u: i64, v: i64) -> Result<HermitianLattice> {
    restrict_bundle_sum(&spec.degrees, 1, spec.arch, &ProjPoint::from_i64(&[u, v])?)
}

fn phi_value(spec: &ArakelovSeriesSpec, l: &HermitianLattice, eps: f64) -> Result<(Complex64, Complex64, f64)> {
    // exact logs keep ln vol(L^∨) = −ln vol(L) bit for bit
    let ln_vol = l.vol_exact().map_or_else(|| l.vol().ln(), |v| v.ln());
    let weight = (spec.s * ln_vol).exp();
    let lattice = match spec.phi {
        PhiKind::Theta => l.theta(1.0, eps / weight.norm().max(1e-300))?,
        PhiKind::Zeta => l.lattice_zeta(spec.s * l.rank() as f64, eps / weight.norm().max(1e-300))?,
        PhiKind::Norm => SeriesValue::real(1.0, 0.0, 1, true),
    };
    Ok((
        lattice.value,
        lattice.value * weight,
        lattice.error_bound * weight.norm(),
    ))
}

/// All terms of the series in summation order, restricted to points accepted by `keep`.
pub fn series_terms_filtered(
    spec: &ArakelovSeriesSpec,
    eps: f64,
    keep: impl Fn(&(i64, i64)) -> bool,
) -> Result<Vec<TermRow>> {
    spec.validate()?;
    let points: Vec<_> = base_points(spec.arch, spec.cutoff, DEFAULT_POINT_CAPACITY)?
        .into_iter()
        .filter(|&(_, u, v)| keep(&(u, v)))
        .collect();
    let per_term = eps / points.len().max(1) as f64;
    // The restriction depends on b only through its height.
    let mut reps: BTreeMap<i64, (i64, i64)> = BTreeMap::new();
    for &(h2, u, v) in &points {
        reps.entry(h2).or_insert((u, v));
    }
    let reps: Vec<(i64, (i64, i64))> = reps.into_iter().collect();
    let values: Vec<(f64, (Complex64, Complex64, f64))> = reps
        .par_iter()
        .map(|&(_, (u, v))| {
            let l = restriction(spec, u, v)?;
            Ok((l.vol(), phi_value(spec, &l, per_term)?))
        })
        .collect::<Result<_>>()?;
    let table: BTreeMap<i64, (f64, (Complex64, Complex64, f64))> = reps.iter().map(|&(h2, _)| h2).zip(values).collect();
    Ok(points
        .into_iter()
        .map(|(h2, u, v)| {
            let (vol, (lattice_value, term, error_bound)) = table[&h2];
            TermRow {
                height_squared: h2,
                point: (u, v),
                vol,
                lattice_value,
                term,
                error_bound,
            }
        })
        .collect())
}

pub fn series_terms(spec: &ArakelovSeriesSpec, eps: f64) -> Result<Vec<TermRow>> {
    series_terms_filtered(spec, eps, |_| true)
}

fn sum_terms(rows: &[TermRow]) -> SeriesValue {
    let mut sum = ComplexSum::new();
    let mut err = 0.0;
    for r in rows {
        sum.add(r.term);
        err += r.error_bound;
    }
    SeriesValue {
        value: sum.value(),
        error_bound: err,
        terms_used: rows.len(),
        rigorous: true,
    }
}

/// `Σ_{H(b) ≤ B} Φ(T|_b)`.
pub fn arakelov_l_partial(spec: &ArakelovSeriesSpec, eps: f64) -> Result<SeriesValue> {
    let rows = series_terms(spec, eps)?;
    let mut v = sum_terms(&rows);
    v.rigorous = spec.phi != PhiKind::Zeta;
    Ok(v)
}

/// `|Θ(T, s) − Θ(T^∨, 1 − s)|` over the same base points, with the combined bound.
pub fn theta_duality_defect(spec: &ArakelovSeriesSpec, eps: f64) -> Result<(f64, f64)> {
    if spec.phi != PhiKind::Theta {
        return Err(Error::invalid("duality defect needs the theta weight"));
    }
    let a = arakelov_l_partial(spec, eps)?;
    let b = arakelov_l_partial(&spec.dual(), eps)?;
    let rounding = 8.0 * f64::EPSILON * (a.value.norm() + b.value.norm()) * (a.terms_used.max(1) as f64).sqrt();
    Ok(((a.value - b.value).norm(), a.error_bound + b.error_bound + rounding))
}

/// One row of the height-grouped series for `O(1)` with the max metric.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedRow {
    pub height: u64,
    /// Number of points of height exactly `height`.
    pub count: u64,
    /// `θ(O(1)|_b, 1)`, common to all b of this height.
    pub theta: f64,
    pub term: Complex64,
    /// The printed coefficient `2(1 + 2φ(N))`, kept for comparison only.
    pub printed_coefficient: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupedSeries {
    pub rows: Vec<GroupedRow>,
    pub grouped: Complex64,
    pub direct: Complex64,
}

impl GroupedSeries {
    pub fn bit_exact(&self) -> bool {
        self.grouped.re.to_bits() == self.direct.re.to_bits() && self.grouped.im.to_bits() == self.direct.im.to_bits()
    }
}

/// Groups the `O(1)`, max-metric theta series by height `N`.
pub fn grouped_series_coefficients(n_max: u64, s: Complex64, eps: f64) -> Result<GroupedSeries> {
    let spec = ArakelovSeriesSpec {
        degrees: vec![1],
        arch: ArchKind::Max,
        s,
        cutoff: n_max,
        phi: PhiKind::Theta,
    };
    let rows = series_terms(&spec, eps)?;
    let direct = sum_terms(&rows).value;
    let mut grouped_rows: Vec<GroupedRow> = Vec::new();
    for r in &rows {
        let n = (r.height_squared as f64).sqrt().round() as u64;
        match grouped_rows.last_mut() {
            Some(g) if g.height == n => g.count += 1,
            _ => grouped_rows.push(GroupedRow {
                height: n,
                count: 1,
                theta: r.lattice_value.re,
                term: r.term,
                printed_coefficient: 2 * (1 + 2 * euler_phi(n)?),
            }),
        }
    }
    let mut sum = ComplexSum::new();
    for g in &grouped_rows {
        sum.add_scaled(g.count, g.term);
    }
    Ok(GroupedSeries {
        rows: grouped_rows,
        grouped: sum.value(),
        direct,
    })
}

/// Partial sums at B, 2B, 4B and the growth exponent `log₂ |S_4B − S_2B| / |S_2B − S_B|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceProbe {
    pub s: Complex64,
    pub partial_sums: [Complex64; 3],
    pub exponent: f64,
}

impl ConvergenceProbe {
    /// Increments shrink geometrically.
    pub fn is_stable(&self) -> bool {
        self.exponent < 0.0
    }
}

/// Growth indicators of the `O(1)` theta series on a grid of s values.
pub fn convergence_abscissa_probe(
    arch: ArchKind,
    cutoff: u64,
    s_grid: &[Complex64],
    eps: f64,
) -> Result<Vec<ConvergenceProbe>> {
    s_grid
        .iter()
        .map(|&s| {
            let spec = ArakelovSeriesSpec {
                degrees: vec![1],
                arch,
                s,
                cutoff: 4 * cutoff,
                phi: PhiKind::Theta,
            };
            let rows = series_terms(&spec, eps)?;
            let limits = [cutoff, 2 * cutoff, 4 * cutoff].map(|b| (b * b) as i64);
            let mut sums = [Complex64::new(0.0, 0.0); 3];
            for (k, lim) in limits.iter().enumerate() {
                let upto: Vec<TermRow> = rows.iter().filter(|r| r.height_squared <= *lim).cloned().collect();
                sums[k] = sum_terms(&upto).value;
            }
            let exponent = ((sums[2] - sums[1]).norm() / (sums[1] - sums[0]).norm()).log2();
            Ok(ConvergenceProbe {
                s,
                partial_sums: sums,
                exponent,
            })
        })
        .collect()
}
