//! Adaptive Gauss-Kronrod (7/15) quadrature on finite and semi-infinite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an integration: value and estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`, bisecting the worst panel.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Same as [`integrate`] with the initial panels split at the given sorted breakpoints.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> Result<Quadrature> {
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("quadrature breakpoints must be increasing"));
    }
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        let (value, error) = gk15(&f, w[0], w[1]);
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    const MAX_PANELS: usize = 200_000;
    loop {
        let total_err: f64 = heap.iter().map(|p| p.error).sum();
        if total_err <= tol {
            break;
        }
        if heap.len() >= MAX_PANELS {
            return Err(Error::Quadrature { achieved: total_err });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            return Err(Error::Quadrature { achieved: total_err });
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&f, a, b);
            heap.push(Panel { a, b, value, error });
        }
    }
    // Sum in panel order so the result does not depend on heap layout.
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    Ok(Quadrature { value, error })
}

/// Integrates `f` over `[a, ∞)` via `x = a + (1 - u)/u`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> Result<Quadrature> {
    let g = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let x = a + (1.0 - u) / u;
        let v = f(x) / (u * u);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate_with_breaks(g, &[0.0, 0.5, 1.0], tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_gaussian() {
        let q = integrate(|x| x * x, 0.0, 3.0, 1e-13).unwrap();
        assert!((q.value - 9.0).abs() < 1e-12);
        let g = integrate_to_infinity(|x| (-x * x).exp(), 0.0, 1e-12).unwrap();
        assert!((g.value - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-11);
        let h = integrate_to_infinity(|x| x.powi(-2), 1.0, 1e-12).unwrap();
        assert!((h.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn kink_with_breakpoint() {
        let q = integrate_with_breaks(|x: f64| x.abs(), &[-1.0, 0.0, 2.0], 1e-13).unwrap();
        assert!((q.value - 2.5).abs() < 1e-13);
    }
}
