//! Points of bounded height on P^n, counting functions, height zeta partial sums and
//! least-squares fits of `N(H) ≈ θ H^a (log H)^{b-1}`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::{Integer, Roots};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heights::{height_point, ArchKind, MetrizedLineBundle, ProjPoint};
use crate::lattice::{HermitianLattice, SeriesValue};
use crate::places::Rat;
use crate::sum::ComplexSum;

/// Default cap on the number of materialized points.
pub const DEFAULT_POINT_CAP: usize = 20_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    pub thresholds: Vec<f64>,
    pub counts: Vec<u64>,
}

impl CountTable {
    pub fn new(thresholds: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        if thresholds.len() != counts.len() {
            return Err(Error::invalid("thresholds and counts differ in length"));
        }
        if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("thresholds must be strictly increasing"));
        }
        if counts.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("counts must be non-decreasing"));
        }
        Ok(CountTable { thresholds, counts })
    }
}

/// Gauge key of a point: `max |x_i|` for the max metric, `Σ x_i²` for the euclidean one.
/// The height of a primitive point is `key^m` or `key^{m/2}`.
fn gauge_key(arch: ArchKind, x: &[i64]) -> i64 {
    match arch {
        ArchKind::Max => x.iter().map(|c| c.abs()).max().unwrap_or(0),
        ArchKind::L2 => x.iter().map(|c| c * c).sum(),
    }
}

fn pow_big(x: i64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(x), e as usize)
}

/// Largest key whose height is at most h (h ≥ 0).
fn key_bound(arch: ArchKind, m: i64, h: f64) -> Result<i64> {
    if m < 1 {
        return Err(Error::invalid("counting needs degree m ≥ 1"));
    }
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::invalid("height bounds must be finite and non-negative"));
    }
    let hr = Rat::from_float(h).expect("finite");
    let m = m as u32;
    // key^m ≤ h (max) or key^m ≤ h² (euclidean)
    let target = match arch {
        ArchKind::Max => hr,
        ArchKind::L2 => &hr * &hr,
    };
    let fits = |k: i64| Rat::from_integer(pow_big(k, m)) <= target;
    let guess = match arch {
        ArchKind::Max => h.powf(1.0 / m as f64),
        ArchKind::L2 => h.powf(2.0 / m as f64),
    };
    if guess > 4e9 {
        return Err(Error::invalid("height bound too large for a coordinate scan"));
    }
    let mut k = guess.floor() as i64;
    while k > 0 && !fits(k) {
        k -= 1;
    }
    while fits(k + 1) {
        k += 1;
    }
    Ok(k)
}

fn max_coordinate(arch: ArchKind, key: i64) -> i64 {
    match arch {
        ArchKind::Max => key,
        ArchKind::L2 => key.sqrt(),
    }
}

/// Depth-first scan of the free coordinates after the leading one.
#[allow(clippy::too_many_arguments)]
fn scan_tail(arch: ArchKind, key_max: i64, bound: i64, rest: usize, g: i64, key: i64, visit: &mut impl FnMut(i64)) {
    if rest == 0 {
        if g == 1 {
            visit(key);
        }
        return;
    }
    let lim = match arch {
        ArchKind::Max => bound,
        ArchKind::L2 => (key_max - key).max(0).sqrt(),
    };
    for x in -lim..=lim {
        let k = match arch {
            ArchKind::Max => key.max(x.abs()),
            ArchKind::L2 => key + x * x,
        };
        scan_tail(arch, key_max, bound, rest - 1, g.gcd(&x), k, visit);
    }
}

/// Counts primitive canonical points of P^n by gauge key bucket: bucket i holds keys in
/// `(bounds[i-1], bounds[i]]`; `bounds` must be non-decreasing.
fn primitive_histogram(n: usize, arch: ArchKind, bounds: &[i64]) -> Vec<u64> {
    let key_max = *bounds.last().unwrap_or(&0);
    let bound = max_coordinate(arch, key_max);
    let tasks: Vec<(usize, i64)> = (0..=n).flat_map(|i| (1..=bound).map(move |x| (i, x))).collect();
    tasks
        .par_iter()
        .map(|&(lead, x)| {
            let mut hist = vec![0u64; bounds.len()];
            let key0 = match arch {
                ArchKind::Max => x,
                ArchKind::L2 => x * x,
            };
            if key0 > key_max {
                return hist;
            }
            scan_tail(arch, key_max, bound, n - lead, x, key0, &mut |k| {
                let i = bounds.partition_point(|&b| b < k);
                if i < hist.len() {
                    hist[i] += 1;
                }
            });
            hist
        })
        .reduce(
            || vec![0u64; bounds.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// All canonical primitive points with height at most `h_bound`, sorted.
pub fn enumerate_pn(bundle: &MetrizedLineBundle, h_bound: f64) -> Result<Vec<ProjPoint>> {
    enumerate_pn_capped(bundle, h_bound, DEFAULT_POINT_CAP)
}

pub fn enumerate_pn_capped(bundle: &MetrizedLineBundle, h_bound: f64, cap: usize) -> Result<Vec<ProjPoint>> {
    let key_max = key_bound(bundle.arch, bundle.m, h_bound)?;
    let d = bundle.n + 1;
    let mut coords: Vec<Vec<i64>> = Vec::new();
    let mut keep = |x: &[i64]| -> Result<()> {
        let canonical = x.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0);
        if canonical && x.iter().fold(0i64, |g, c| g.gcd(c)) == 1 && gauge_key(bundle.arch, x) <= key_max {
            coords.push(x.to_vec());
            if coords.len() > cap {
                return Err(Error::Capacity { limit: cap });
            }
        }
        Ok(())
    };
    match bundle.arch {
        ArchKind::Max => {
            let mut x = vec![-key_max; d];
            if key_max > 0 {
                loop {
                    keep(&x)?;
                    let mut i = d;
                    loop {
                        if i == 0 {
                            break;
                        }
                        i -= 1;
                        if x[i] < key_max {
                            x[i] += 1;
                            break;
                        }
                        x[i] = -key_max;
                    }
                    if x.iter().all(|&c| c == -key_max) {
                        break;
                    }
                }
            }
        }
        ArchKind::L2 => {
            let lattice = HermitianLattice::unit(d).with_capacity(cap.saturating_mul(2 * d + 2));
            let mut failure = None;
            lattice.for_each_vector(key_max as f64, |x| {
                if failure.is_none() {
                    if let Err(e) = keep(x) {
                        failure = Some(e);
                    }
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
        }
    }
    let mut pts: Vec<ProjPoint> = coords.iter().map(|c| ProjPoint::from_i64(c)).collect::<Result<_>>()?;
    pts.sort();
    Ok(pts)
}

/// `N(H)` at each threshold by a parallel primitive-box scan.
pub fn count_table(bundle: &MetrizedLineBundle, thresholds: &[f64]) -> Result<CountTable> {
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("thresholds must be strictly increasing"));
    }
    let bounds: Vec<i64> = thresholds
        .iter()
        .map(|&h| key_bound(bundle.arch, bundle.m, h))
        .collect::<Result<_>>()?;
    let hist = primitive_histogram(bundle.n, bundle.arch, &bounds);
    let mut running = 0;
    let counts = hist
        .into_iter()
        .map(|c| {
            running += c;
            running
        })
        .collect();
    CountTable::new(thresholds.to_vec(), counts)
}

fn term_for(bundle: &MetrizedLineBundle, key: i64, s: Complex64) -> Complex64 {
    // H = key^m (max) or key^{m/2} (euclidean); term = H^{-s}
    let ln_h = match bundle.arch {
        ArchKind::Max => bundle.m as f64 * (key as f64).ln(),
        ArchKind::L2 => 0.5 * bundle.m as f64 * (key as f64).ln(),
    };
    (-s * ln_h).exp()
}

/// `Σ_{H(x) ≤ H} H(x)^{-s}`, one term per point in sorted point order.
pub fn height_zeta_partial(bundle: &MetrizedLineBundle, s: Complex64, h_bound: f64) -> Result<SeriesValue> {
    let pts = enumerate_pn(bundle, h_bound)?;
    let mut sum = ComplexSum::new();
    for p in &pts {
        let c: Vec<i64> = p
            .coords()
            .iter()
            .map(|x| i64::try_from(x).expect("small coordinates"))
            .collect();
        sum.add(term_for(bundle, gauge_key(bundle.arch, &c), s));
    }
    Ok(SeriesValue {
        value: sum.value(),
        error_bound: 0.0,
        terms_used: pts.len(),
        rigorous: true,
    })
}

/// The same sum, grouped by height: `Σ_N #{x : H(x) = N} · N^{-s}`.
pub fn height_zeta_grouped(bundle: &MetrizedLineBundle, s: Complex64, h_bound: f64) -> Result<SeriesValue> {
    let key_max = key_bound(bundle.arch, bundle.m, h_bound)?;
    let bounds: Vec<i64> = (1..=key_max).collect();
    let hist = primitive_histogram(bundle.n, bundle.arch, &bounds);
    let mut sum = ComplexSum::new();
    let mut terms = 0;
    for (key, &c) in bounds.iter().zip(&hist) {
        if c > 0 {
            sum.add_scaled(c, term_for(bundle, *key, s));
            terms += c as usize;
        }
    }
    Ok(SeriesValue {
        value: sum.value(),
        error_bound: 0.0,
        terms_used: terms,
        rigorous: true,
    })
}

/// Per-point heights recomputed from scratch, as an independent count.
pub fn count_by_heights(bundle: &MetrizedLineBundle, thresholds: &[f64]) -> Result<Vec<u64>> {
    let top = thresholds.iter().cloned().fold(0.0, f64::max);
    let pts = enumerate_pn(bundle, top)?;
    let mut hs: Vec<Rat> = pts
        .iter()
        .map(|p| height_point(bundle, p).map(|h| h.square()))
        .collect::<Result<_>>()?;
    hs.sort();
    Ok(thresholds
        .iter()
        .map(|&h| {
            let h = Rat::from_float(h).expect("finite");
            let h2 = &h * &h;
            hs.partition_point(|x| *x <= h2) as u64
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticFit {
    pub a: f64,
    pub b: f64,
    pub theta: f64,
    /// Root-mean-square residual of the log-linear fit.
    pub residual: f64,
}

impl AsymptoticFit {
    pub fn predict(&self, h: f64) -> f64 {
        self.theta * h.powf(self.a) * h.ln().powf(self.b - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitModel {
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// Fraction of the largest thresholds used.
    pub fraction: f64,
}

impl Default for FitModel {
    fn default() -> Self {
        FitModel {
            a: None,
            b: None,
            fraction: 0.6,
        }
    }
}

impl FitModel {
    pub fn pinned(a: f64, b: f64) -> Self {
        FitModel {
            a: Some(a),
            b: Some(b),
            ..Self::default()
        }
    }
}

/// Least squares for `log N = a log H + (b−1) log log H + log θ` on the largest thresholds.
pub fn fit_asymptotics(table: &CountTable, model: FitModel) -> Result<AsymptoticFit> {
    let len = table.thresholds.len();
    if len < 5 {
        return Err(Error::DegenerateDesign(format!(
            "need at least 5 thresholds, got {len}"
        )));
    }
    let (lo, hi) = (table.thresholds[0], table.thresholds[len - 1]);
    if !(lo > 1.0) || hi / lo < 100.0 {
        return Err(Error::DegenerateDesign(
            "thresholds must exceed 1 and span at least two decades".into(),
        ));
    }
    if !(model.fraction > 0.0 && model.fraction <= 1.0) {
        return Err(Error::invalid("fit fraction must be in (0, 1]"));
    }
    let used = ((len as f64 * model.fraction).ceil() as usize).max(3).min(len);
    let start = len - used;
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut y = Vec::with_capacity(used);
    let (mut col_a, mut col_b) = (Vec::new(), Vec::new());
    for i in start..len {
        let h = table.thresholds[i];
        let n = table.counts[i];
        if n == 0 {
            return Err(Error::DegenerateDesign("zero count in the fitted range".into()));
        }
        let (lh, llh) = (h.ln(), h.ln().ln());
        let mut target = (n as f64).ln();
        match model.a {
            Some(a) => target -= a * lh,
            None => col_a.push(lh),
        }
        match model.b {
            Some(b) => target -= (b - 1.0) * llh,
            None => col_b.push(llh),
        }
        y.push(target);
    }
    let free_a = model.a.is_none();
    let free_b = model.b.is_none();
    if free_a {
        cols.push(col_a);
    }
    if free_b {
        cols.push(col_b);
    }
    cols.push(vec![1.0; used]);
    if used < cols.len() + 1 && cols.len() > 1 {
        return Err(Error::DegenerateDesign(
            "too few thresholds for the free parameters".into(),
        ));
    }
    let beta = least_squares(&cols, &y)?;
    let mut it = beta.iter();
    let a = if free_a {
        *it.next().expect("a")
    } else {
        model.a.expect("pinned")
    };
    let b = if free_b {
        1.0 + *it.next().expect("b")
    } else {
        model.b.expect("pinned")
    };
    let log_theta = *it.next().expect("intercept");
    let mut ss = 0.0;
    for (r, yi) in y.iter().enumerate() {
        let pred: f64 = cols.iter().zip(&beta).map(|(c, bj)| c[r] * bj).sum();
        ss += (yi - pred).powi(2);
    }
    Ok(AsymptoticFit {
        a,
        b,
        theta: log_theta.exp(),
        residual: (ss / used as f64).sqrt(),
    })
}

/// Least squares by modified Gram-Schmidt QR.
fn least_squares(cols: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let k = cols.len();
    let mut q: Vec<Vec<f64>> = cols.to_vec();
    let mut r = vec![vec![0.0; k]; k];
    for j in 0..k {
        let scale: f64 = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        for i in 0..j {
            let dot: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            r[i][j] = dot;
            let qi = q[i].clone();
            for (x, qv) in q[j].iter_mut().zip(qi) {
                *x -= dot * qv;
            }
        }
        let norm: f64 = q[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 1e-10 * scale.max(1e-300)) {
            return Err(Error::DegenerateDesign("design columns are (nearly) collinear".into()));
        }
        r[j][j] = norm;
        for x in q[j].iter_mut() {
            *x /= norm;
        }
    }
    let qty: Vec<f64> = q.iter().map(|qi| qi.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
    let mut beta = vec![0.0; k];
    for j in (0..k).rev() {
        let s: f64 = (j + 1..k).map(|i| r[j][i] * beta[i]).sum();
        beta[j] = (qty[j] - s) / r[j][j];
    }
    Ok(beta)
}

/// Geometric grid of `count` thresholds from `lo` to `hi`.
pub fn geometric_thresholds(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![hi];
    }
    let r = (hi / lo).ln() / (count - 1) as f64;
    let mut v: Vec<f64> = (0..count).map(|i| (lo.ln() + r * i as f64).exp()).collect();
    v[0] = lo;
    v[count - 1] = hi;
    v.dedup();
    v
}
