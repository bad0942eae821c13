//! Euclidean lattices: covolume, duality, theta series, Epstein zeta and the
//! completed Λ-function with its meromorphic continuation.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::RatMatrix;
use crate::magnitude::Magnitude;
use crate::places::{parse_rat, rat_to_f64, Rat};
use crate::special::{rgamma, theta1_upper, upper_gamma_scaled};
use crate::sum::{ComplexSum, ExactSum};

/// Default cap on the number of lattice vectors visited by one enumeration.
pub const DEFAULT_CAPACITY: usize = 20_000_000;

/// A truncated series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub error_bound: f64,
    pub terms_used: usize,
    /// True when `error_bound` is a proven bound on the truncation error.
    pub rigorous: bool,
}

impl SeriesValue {
    pub fn real(value: f64, error_bound: f64, terms_used: usize, rigorous: bool) -> Self {
        SeriesValue {
            value: Complex64::new(value, 0.0),
            error_bound,
            terms_used,
            rigorous,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HermitianLattice {
    d: usize,
    gram: Vec<f64>,
    exact: Option<RatMatrix>,
    /// Row i holds q_ii on the diagonal and μ_ij for j > i, so that
    /// Q(x) = Σ_i q_ii (x_i + Σ_{j>i} μ_ij x_j)².
    qform: Vec<f64>,
    capacity: usize,
}

fn qform_of(d: usize, a: &[f64]) -> Result<Vec<f64>> {
    let mut q = a.to_vec();
    for i in 0..d {
        for j in 0..i {
            q[i * d + j] = 0.0;
        }
    }
    for i in 0..d {
        for k in 0..i {
            let qk = q[k * d + k];
            let mki = q[k * d + i];
            q[i * d + i] -= qk * mki * mki;
            for j in i + 1..d {
                q[i * d + j] -= qk * mki * q[k * d + j];
            }
        }
        let qi = q[i * d + i];
        if !(qi > 0.0) || !qi.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        for j in i + 1..d {
            q[i * d + j] /= qi;
        }
    }
    Ok(q)
}

fn invert_f64(d: usize, a: &[f64]) -> Result<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; d * d];
    for i in 0..d {
        inv[i * d + i] = 1.0;
    }
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&r, &s| m[r * d + col].abs().total_cmp(&m[s * d + col].abs()))
            .expect("nonempty");
        if m[piv * d + col] == 0.0 {
            return Err(Error::SingularMatrix);
        }
        for j in 0..d {
            m.swap(piv * d + j, col * d + j);
            inv.swap(piv * d + j, col * d + j);
        }
        let p = m[col * d + col];
        for j in 0..d {
            m[col * d + j] /= p;
            inv[col * d + j] /= p;
        }
        for r in 0..d {
            let f = m[r * d + col];
            if r == col || f == 0.0 {
                continue;
            }
            for j in 0..d {
                m[r * d + j] -= f * m[col * d + j];
                inv[r * d + j] -= f * inv[col * d + j];
            }
        }
    }
    // symmetrize away rounding asymmetry
    for i in 0..d {
        for j in 0..i {
            let avg = 0.5 * (inv[i * d + j] + inv[j * d + i]);
            inv[i * d + j] = avg;
            inv[j * d + i] = avg;
        }
    }
    Ok(inv)
}

struct Walker<'a, F: FnMut(&[i64])> {
    d: usize,
    q: &'a [f64],
    x: Vec<i64>,
    count: usize,
    cap: usize,
    visit: F,
}

impl<F: FnMut(&[i64])> Walker<'_, F> {
    fn walk(&mut self, i: usize, budget: f64) -> Result<()> {
        let d = self.d;
        let center: f64 = -(i + 1..d).map(|j| self.q[i * d + j] * self.x[j] as f64).sum::<f64>();
        let qi = self.q[i * d + i];
        let span = (budget.max(0.0) / qi).sqrt();
        let lo = (center - span).ceil() as i64;
        let hi = (center + span).floor() as i64;
        for xi in lo..=hi {
            let dx = xi as f64 - center;
            let rest = budget - qi * dx * dx;
            if rest < 0.0 {
                continue;
            }
            self.x[i] = xi;
            if i == 0 {
                self.count += 1;
                if self.count > self.cap {
                    return Err(Error::Capacity { limit: self.cap });
                }
                (self.visit)(&self.x);
            } else {
                self.walk(i - 1, rest)?;
            }
        }
        self.x[i] = 0;
        Ok(())
    }
}

impl HermitianLattice {
    /// Lattice with an exact rational Gram matrix.
    pub fn from_rational(gram: RatMatrix) -> Result<Self> {
        if !gram.is_symmetric() {
            return Err(Error::NotPositiveDefinite);
        }
        if gram.leading_minors()?.iter().any(|m| !m.is_positive()) {
            return Err(Error::NotPositiveDefinite);
        }
        let d = gram.rows();
        let g = gram.to_f64();
        let qform = qform_of(d, &g)?;
        Ok(HermitianLattice {
            d,
            gram: g,
            exact: Some(gram),
            qform,
            capacity: DEFAULT_CAPACITY,
        })
    }

    /// Lattice with a real Gram matrix given row-major.
    pub fn from_f64(d: usize, gram: Vec<f64>) -> Result<Self> {
        if d == 0 || gram.len() != d * d {
            return Err(Error::invalid("gram matrix must be d×d with d ≥ 1"));
        }
        if gram.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("gram entries must be finite"));
        }
        for i in 0..d {
            for j in 0..i {
                if gram[i * d + j] != gram[j * d + i] {
                    return Err(Error::NotPositiveDefinite);
                }
            }
        }
        let qform = qform_of(d, &gram)?;
        Ok(HermitianLattice {
            d,
            gram,
            exact: None,
            qform,
            capacity: DEFAULT_CAPACITY,
        })
    }

    /// Z^d with the standard form.
    pub fn unit(d: usize) -> Self {
        Self::from_rational(RatMatrix::identity(d)).expect("identity is positive definite")
    }

    pub fn diagonal(entries: &[Rat]) -> Result<Self> {
        Self::from_rational(RatMatrix::diagonal(entries))
    }

    pub fn with_capacity(mut self, cap: usize) -> Self {
        self.capacity = cap;
        self
    }

    pub fn rank(&self) -> usize {
        self.d
    }

    pub fn gram(&self) -> &[f64] {
        &self.gram
    }

    pub fn gram_exact(&self) -> Option<&RatMatrix> {
        self.exact.as_ref()
    }

    fn det_f64(&self) -> f64 {
        (0..self.d).map(|i| self.qform[i * self.d + i]).product()
    }

    /// Exact covolume `sqrt(det gram)` for rational Gram matrices.
    pub fn vol_exact(&self) -> Option<Magnitude> {
        self.exact.as_ref().map(|g| Magnitude::sqrt(g.det().expect("square")))
    }

    pub fn vol(&self) -> f64 {
        match self.vol_exact() {
            Some(v) => v.to_f64(),
            None => self.det_f64().sqrt(),
        }
    }

    /// `-log vol`.
    pub fn arithmetic_degree(&self) -> f64 {
        match self.vol_exact() {
            Some(v) => -v.ln(),
            None => -0.5 * self.det_f64().ln(),
        }
    }

    pub fn dual(&self) -> HermitianLattice {
        match &self.exact {
            Some(g) => HermitianLattice::from_rational(g.inverse().expect("positive definite"))
                .expect("inverse of a positive definite form")
                .with_capacity(self.capacity),
            None => {
                let inv = invert_f64(self.d, &self.gram).expect("positive definite");
                HermitianLattice::from_f64(self.d, inv)
                    .expect("inverse of a positive definite form")
                    .with_capacity(self.capacity)
            }
        }
    }

    pub fn direct_sum(&self, other: &HermitianLattice) -> HermitianLattice {
        let cap = self.capacity.min(other.capacity);
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            return HermitianLattice::from_rational(a.block_sum(b))
                .expect("block sum")
                .with_capacity(cap);
        }
        let d = self.d + other.d;
        let mut g = vec![0.0; d * d];
        for i in 0..self.d {
            for j in 0..self.d {
                g[i * d + j] = self.gram[i * self.d + j];
            }
        }
        for i in 0..other.d {
            for j in 0..other.d {
                g[(self.d + i) * d + self.d + j] = other.gram[i * other.d + j];
            }
        }
        HermitianLattice::from_f64(d, g).expect("block sum").with_capacity(cap)
    }

    /// `‖x‖²` in floating point, with `Σ|g_ij x_i x_j|` for error estimates.
    pub fn norm2(&self, x: &[i64]) -> (f64, f64) {
        let d = self.d;
        let mut q = 0.0;
        let mut a = 0.0;
        for i in 0..d {
            let xi = x[i] as f64;
            if xi == 0.0 {
                continue;
            }
            for j in 0..d {
                let t = self.gram[i * d + j] * xi * x[j] as f64;
                q += t;
                a += t.abs();
            }
        }
        (q, a)
    }

    /// Exact `‖x‖²` for rational Gram matrices.
    pub fn norm2_exact(&self, x: &[i64]) -> Option<Rat> {
        let g = self.exact.as_ref()?;
        let mut q = Rat::zero();
        for i in 0..self.d {
            for j in 0..self.d {
                if x[i] != 0 && x[j] != 0 {
                    q += &g[(i, j)] * Rat::from_integer((x[i] * x[j]).into());
                }
            }
        }
        Some(q)
    }

    /// Visits every x with `‖x‖² ≤ r2` (and possibly a few just above it).
    pub fn for_each_vector(&self, r2: f64, visit: impl FnMut(&[i64])) -> Result<usize> {
        if !(r2 >= 0.0) {
            return Err(Error::invalid("radius must be non-negative"));
        }
        let budget = r2 * (1.0 + 1e-10) + 1e-300;
        let mut w = Walker {
            d: self.d,
            q: &self.qform,
            x: vec![0; self.d],
            count: 0,
            cap: self.capacity,
            visit,
        };
        w.walk(self.d - 1, budget)?;
        Ok(w.count)
    }

    /// All integer coordinate vectors with `‖e‖ ≤ radius`, lexicographically sorted.
    pub fn enumerate_vectors(&self, radius: f64) -> Result<Vec<Vec<i64>>> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::invalid("radius must be a non-negative real"));
        }
        let r2 = radius * radius;
        let exact_r2 = Rat::from_float(radius).map(|r| &r * &r);
        let mut out = Vec::new();
        self.for_each_vector(r2, |x| {
            let keep = match (self.norm2_exact(x), &exact_r2) {
                (Some(q), Some(r)) => q <= *r,
                _ => self.norm2(x).0 <= r2,
            };
            if keep {
                out.push(x.to_vec());
            }
        })?;
        out.sort();
        Ok(out)
    }

    /// `Π_i θ̄(u q_i)`: an upper bound for `Σ_x exp(-π u Q(x + c))` over every shift c.
    fn gaussian_mass_bound(&self, u: f64) -> f64 {
        (0..self.d)
            .map(|i| theta1_upper(u * self.qform[i * self.d + i] * (1.0 - 1e-12)))
            .product()
    }

    /// Smallest R² (over a few splitting parameters) with
    /// `Σ_{Q(x) > R²} exp(-π t Q(x)) ≤ eps`.
    fn theta_radius(&self, t: f64, eps: f64) -> (f64, f64) {
        let mut best = (f64::INFINITY, f64::INFINITY);
        for k in 5..=9 {
            let a = k as f64 / 10.0;
            let mass = self.gaussian_mass_bound(a * t);
            let r2 = ((mass / eps).ln() / (PI * t * (1.0 - a))).max(0.0);
            if r2 < best.0 {
                best = (r2, (-PI * t * (1.0 - a) * r2).exp() * mass);
            }
        }
        best
    }

    /// `θ(L, t) = Σ_{e∈L} exp(-π t ‖e‖²)` with a rigorous bound on the truncation error.
    pub fn theta(&self, t: f64, eps: f64) -> Result<SeriesValue> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::invalid("theta needs t > 0"));
        }
        if !(eps > 0.0) {
            return Err(Error::invalid("eps must be positive"));
        }
        let (r2, tail) = self.theta_radius(t, eps);
        let mut sum = ExactSum::new();
        let mut rounding = 0.0;
        let fudge = (self.d * self.d + 2) as f64 * f64::EPSILON;
        let terms = self.for_each_vector(r2, |x| {
            let (q, a) = self.norm2(x);
            let term = (-PI * t * q).exp();
            sum.add(term);
            rounding += term * (4.0 * f64::EPSILON + PI * t * fudge * a);
        })?;
        let value = sum.value();
        Ok(SeriesValue::real(
            value,
            tail + rounding + value * f64::EPSILON,
            terms,
            true,
        ))
    }

    /// `|θ(L,t) − t^{-d/2} vol^{-1} θ(L^∨,1/t)|` together with the combined error bound.
    pub fn theta_functional_equation_defect(&self, t: f64, eps: f64) -> Result<(f64, f64)> {
        let lhs = self.theta(t, eps)?;
        let dual = self.dual();
        let scale = t.powf(-0.5 * self.d as f64) / self.vol();
        let rhs = dual.theta(1.0 / t, eps / scale.max(1.0))?;
        let rhs_value = scale * rhs.value.re;
        let defect = (lhs.value.re - rhs_value).abs();
        let bound = lhs.error_bound + scale * rhs.error_bound + 8.0 * f64::EPSILON * rhs_value.abs();
        Ok((defect, bound))
    }

    fn check_pole(&self, s: Complex64) -> Result<()> {
        if s.im == 0.0 && (s.re == 0.0 || s.re == self.d as f64) {
            return Err(Error::Pole(format!("{}", s.re)));
        }
        Ok(())
    }

    /// `Σ_{e≠0, Q(e) > R²} |G(a, πQ(e))|` is below the returned tail for the returned R².
    fn gamma_sum_radius(&self, sigma: f64, eps: f64) -> (f64, f64) {
        let m = (sigma - 1.0).max(0.0);
        let mut best = (f64::INFINITY, f64::INFINITY);
        for k in 5..=9 {
            let a = k as f64 / 10.0;
            let mass = self.gaussian_mass_bound(a);
            let r2 = ((mass / eps).ln() / (PI * (1.0 - a))).max((m + 1.0) / PI);
            if r2 < best.0 {
                let tail = (-PI * (1.0 - a) * r2).exp() * mass / (PI * r2 - m);
                best = (r2, tail);
            }
        }
        best
    }

    /// `Σ_{e≠0} G(a, π‖e‖²)` with `G(a, x) = x^{-a} Γ(a, x)`.
    fn gamma_sum(&self, a: Complex64, eps: f64) -> Result<(Complex64, f64, usize)> {
        let (r2, tail) = self.gamma_sum_radius(a.re, eps);
        let mut sum = ComplexSum::new();
        let mut abs_sum = 0.0;
        let mut failure = None;
        let terms = self.for_each_vector(r2, |x| {
            if failure.is_some() || x.iter().all(|&c| c == 0) {
                return;
            }
            let (q, _) = self.norm2(x);
            match upper_gamma_scaled(a, PI * q) {
                Ok(g) => {
                    sum.add(g);
                    abs_sum += g.norm();
                }
                Err(e) => failure = Some(e),
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok((sum.value(), tail + 1e-13 * abs_sum, terms))
    }

    /// Completed function `Λ(L, s) = √vol · π^{-s/2} Γ(s/2) ζ(L, s)`, continued to all
    /// s ≠ 0, d by splitting the Mellin integral of θ at t = 1.
    pub fn completed_lambda(&self, s: Complex64, eps: f64) -> Result<SeriesValue> {
        self.check_pole(s)?;
        if !(eps > 0.0) {
            return Err(Error::invalid("eps must be positive"));
        }
        let d = self.d as f64;
        let rv = self.vol().sqrt();
        let dual = self.dual();
        let (primal, e1, n1) = self.gamma_sum(s / 2.0, eps / (2.0 * rv))?;
        let (coprimal, e2, n2) = dual.gamma_sum((d - s) / 2.0, eps * rv / 2.0)?;
        let polar_primal = -2.0 / s;
        let polar_dual = 2.0 / (s - d);
        let mut total = ComplexSum::new();
        total.add(rv * (polar_primal + primal));
        total.add((polar_dual + coprimal) / rv);
        let value = total.value();
        let rounding = 4.0 * f64::EPSILON * (rv * polar_primal.norm() + polar_dual.norm() / rv + value.norm());
        Ok(SeriesValue {
            value,
            error_bound: rv * e1 + e2 / rv + rounding,
            terms_used: n1 + n2,
            rigorous: false,
        })
    }

    /// `ζ(L, s) = Σ_{e≠0} ‖e‖^{-s}`, through the continuation of Λ.
    pub fn lattice_zeta(&self, s: Complex64, eps: f64) -> Result<SeriesValue> {
        self.check_pole(s)?;
        let rv = self.vol().sqrt();
        // factor = π^{s/2} / (√vol Γ(s/2)), with 1/Γ entire
        let factor = Complex64::new(PI, 0.0).powc(s / 2.0) * rgamma(s / 2.0) / rv;
        if !factor.re.is_finite() || !factor.im.is_finite() {
            return Err(Error::invalid(format!("zeta normalization overflows at s = {s}")));
        }
        let lambda = self.completed_lambda(s, eps / factor.norm().max(1e-300))?;
        Ok(SeriesValue {
            value: lambda.value * factor,
            error_bound: lambda.error_bound * factor.norm(),
            terms_used: lambda.terms_used,
            rigorous: false,
        })
    }
}

impl PartialEq for HermitianLattice {
    fn eq(&self, other: &Self) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => self.d == other.d && self.gram == other.gram,
        }
    }
}

/// Parses `I<d>` as the unit lattice of rank d.
pub fn parse_unit_spec(spec: &str) -> Option<HermitianLattice> {
    let d: usize = spec.strip_prefix('I')?.parse().ok()?;
    (d >= 1).then(|| HermitianLattice::unit(d))
}

/// Reads a Gram matrix: either `I<d>`, or a `rank d` header followed by d² exact
/// rationals in row-major order. Lines starting with `#` are ignored.
pub fn parse_gram(text: &str) -> Result<HermitianLattice> {
    let body: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let header = body.first().ok_or_else(|| Error::invalid("empty gram description"))?;
    if let Some(l) = parse_unit_spec(header) {
        if body.len() > 1 {
            return Err(Error::invalid("unexpected entries after I<d>"));
        }
        return Ok(l);
    }
    let d: usize = header
        .strip_prefix("rank")
        .and_then(|r| r.trim().parse().ok())
        .filter(|&d| d >= 1)
        .ok_or_else(|| Error::invalid(format!("expected `rank d` or `I<d>` header, got {header:?}")))?;
    let entries: Vec<Rat> = body[1..]
        .iter()
        .flat_map(|l| l.split_whitespace())
        .map(parse_rat)
        .collect::<Result<_>>()?;
    if entries.len() != d * d {
        return Err(Error::invalid(format!(
            "rank {d} gram needs {} entries, got {}",
            d * d,
            entries.len()
        )));
    }
    let rows = entries.chunks(d).map(<[Rat]>::to_vec).collect();
    HermitianLattice::from_rational(RatMatrix::from_rows(rows)?)
}

/// Gram matrix as f64 for exact lattices (helper for reports).
pub fn gram_entry(l: &HermitianLattice, i: usize, j: usize) -> f64 {
    match l.gram_exact() {
        Some(g) => rat_to_f64(&g[(i, j)]),
        None => l.gram()[i * l.rank() + j],
    }
}
