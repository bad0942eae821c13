//! Complex gamma, reciprocal gamma and the scaled upper incomplete gamma
//! `G(a, x) = x^(-a) Γ(a, x)` for complex `a` and real `x > 0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos(z: Complex64) -> Complex64 {
    // valid for Re z >= 0.5
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// Γ(z). Infinite at non-positive integers.
pub fn gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        PI / ((PI * z).sin() * lanczos(1.0 - z))
    } else {
        lanczos(z)
    }
}

/// 1/Γ(z), entire.
pub fn rgamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        (PI * z).sin() * lanczos(1.0 - z) / PI
    } else {
        1.0 / lanczos(z)
    }
}

const TINY: f64 = 1e-300;
const MAX_ITER: usize = 200_000;

/// Legendre continued fraction: Γ(a,x) = e^(-x) x^a K(a,x).
fn upper_cf(a: Complex64, x: f64) -> Result<Complex64> {
    let mut b = Complex64::new(x + 1.0, 0.0) - a;
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        let an = -fi * (fi - a);
        b += 2.0;
        d = an * d + b;
        if d.norm() < TINY {
            d = Complex64::new(TINY, 0.0);
        }
        c = b + an / c;
        if c.norm() < TINY {
            c = Complex64::new(TINY, 0.0);
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence(format!(
        "incomplete gamma continued fraction at a={a}, x={x}"
    )))
}

/// Σ x^n / (a (a+1) ... (a+n)), so that γ(a,x) = x^a e^(-x) times this sum.
fn lower_series(a: Complex64, x: f64) -> Result<Complex64> {
    let mut term = 1.0 / a;
    let mut sum = term;
    for n in 1..MAX_ITER {
        term *= x / (a + n as f64);
        sum += term;
        if term.norm() < sum.norm() * 1e-17 {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence(format!("incomplete gamma series at a={a}, x={x}")))
}

/// (e^w - 1)/w, entire.
fn expm1_over(w: Complex64) -> Complex64 {
    if w.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..30 {
            term *= w / k as f64;
            sum += term;
        }
        sum
    } else {
        (w.exp() - 1.0) / w
    }
}

/// Γ(a, x) for x in (0, 1) and Re a <= 1, as Γ(a,1) + ∫_x^1 t^(a-1) e^(-t) dt with the
/// integral expanded termwise; the expansion is entire in a.
fn upper_small_x(a: Complex64, x: f64) -> Result<Complex64> {
    let gamma_a1 = (-1.0f64).exp() * upper_cf(a, 1.0)?;
    let lx = x.ln();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut inv_fact = 1.0;
    for n in 0..200 {
        if n > 0 {
            inv_fact /= n as f64;
        }
        let z = a + n as f64;
        let e_n = -lx * expm1_over(z * lx);
        let term = e_n * inv_fact;
        let signed = if n % 2 == 0 { term } else { -term };
        sum += signed;
        if n > 5 && term.norm() < 1e-18 * (sum.norm() + gamma_a1.norm()) {
            return Ok(gamma_a1 + sum);
        }
    }
    Err(Error::NoConvergence(format!(
        "incomplete gamma expansion at a={a}, x={x}"
    )))
}

/// `x^(-a) Γ(a, x) = ∫_1^∞ e^(-xt) t^(a-1) dt` for complex a and x > 0.
pub fn upper_gamma_scaled(a: Complex64, x: f64) -> Result<Complex64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("incomplete gamma needs x > 0, got {x}")));
    }
    if x > 745.0 + a.re.max(0.0) * x.ln().max(0.0) + 10.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if a.re > 1.0 && x < a.re + 1.0 {
        let s = lower_series(a, x)?;
        let xa = Complex64::new(x, 0.0).powc(-a);
        return Ok(xa * gamma(a) - (-x).exp() * s);
    }
    if x >= 1.0 {
        return Ok((-x).exp() * upper_cf(a, x)?);
    }
    let xa = Complex64::new(x, 0.0).powc(-a);
    Ok(xa * upper_small_x(a, x)?)
}

/// Γ(a, x).
pub fn upper_gamma(a: Complex64, x: f64) -> Result<Complex64> {
    Ok(Complex64::new(x, 0.0).powc(a) * upper_gamma_scaled(a, x)?)
}

/// Upper bound for the Jacobi theta sum Σ_{k∈Z} exp(-π u k²), valid for every shift of k.
pub fn theta1_upper(u: f64) -> f64 {
    let q = (-PI * u).exp();
    let geometric = if q < 1.0 { 2.0 * q / (1.0 - q) } else { f64::INFINITY };
    1.0 + geometric.min(u.powf(-0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn gamma_known_values() {
        assert!(close(gamma(c(5.0, 0.0)), c(24.0, 0.0), 1e-14));
        assert!(close(gamma(c(0.5, 0.0)), c(PI.sqrt(), 0.0), 1e-14));
        assert!(close(gamma(c(-0.5, 0.0)), c(-2.0 * PI.sqrt(), 0.0), 1e-14));
        // |Γ(iy)|² = π / (y sinh(πy))
        let y = 1.3;
        let g = gamma(c(0.0, y));
        assert!((g.norm_sqr() - PI / (y * (PI * y).sinh())).abs() < 1e-13);
        assert!(rgamma(c(-2.0, 0.0)).norm() < 1e-15);
        assert!(close(rgamma(c(3.0, 0.0)), c(0.5, 0.0), 1e-15));
    }

    #[test]
    fn incomplete_gamma_closed_forms() {
        // Γ(1,x) = e^-x
        for &x in &[0.05, 0.7, 1.0, 3.0, 20.0] {
            let g = upper_gamma(c(1.0, 0.0), x).unwrap();
            assert!(close(g, c((-x).exp(), 0.0), 1e-13), "x={x}: {g}");
        }
        // Γ(0, x) = E1(x); E1(1) = 0.21938393439552026
        let e1 = upper_gamma(c(0.0, 0.0), 1.0).unwrap();
        assert!(close(e1, c(0.219_383_934_395_520_3, 0.0), 1e-14));
        let e1_small = upper_gamma(c(0.0, 0.0), 0.1).unwrap();
        assert!(close(e1_small, c(1.822_923_958_419_390_7, 0.0), 1e-13), "{e1_small}");
        // Γ(a+1,x) = aΓ(a,x) + x^a e^-x
        let a = c(-1.3, 0.8);
        for &x in &[0.03, 0.4, 1.7, 6.0] {
            let lhs = upper_gamma(a + 1.0, x).unwrap();
            let rhs = a * upper_gamma(a, x).unwrap() + c(x, 0.0).powc(a) * (-x).exp();
            assert!(close(lhs, rhs, 1e-12), "x={x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn scaled_gamma_matches_integral() {
        // ∫_1^∞ e^{-xt} t^{a-1} dt by composite Simpson on t = 1/u
        let integral = |a: Complex64, x: f64| {
            let n = 200_000;
            let h = 1.0 / n as f64;
            let f = |u: f64| {
                if u <= 0.0 {
                    return c(0.0, 0.0);
                }
                let t = 1.0 / u;
                c(t, 0.0).powc(a - 1.0) * (-x * t).exp() / (u * u)
            };
            let mut s = f(0.0) + f(1.0);
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(k as f64 * h);
            }
            s * h / 3.0
        };
        for &(a, x) in &[
            (c(0.5, 0.35), 0.2),
            (c(-2.0, 0.0), 0.9),
            (c(2.7, -1.0), 2.5),
            (c(0.0, 3.0), 4.0),
        ] {
            let got = upper_gamma_scaled(a, x).unwrap();
            let want = integral(a, x);
            assert!(close(got, want, 1e-9), "a={a} x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn theta_bound_dominates() {
        for &u in &[0.01, 0.3, 1.0, 4.0] {
            let exact: f64 = (-2000i64..=2000).map(|k| (-PI * u * (k * k) as f64).exp()).sum();
            assert!(theta1_upper(u) >= exact, "u={u}");
        }
    }
}
