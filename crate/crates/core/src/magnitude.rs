//! Exact non-negative reals of the form `q` or `sqrt(q)` with q rational.
//!
//! Every height in this crate (max gauge or euclidean gauge, twisted or not)
//! lands in this set, so equalities between heights can be checked exactly.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::places::{format_rat, rat_to_f64, Rat};

#[derive(Debug, Clone)]
pub enum Magnitude {
    Rational(Rat),
    /// `sqrt(q)` for a non-negative rational q that is not a perfect square.
    Sqrt(Rat),
}

fn perfect_square_root(q: &Rat) -> Option<Rat> {
    let root = |n: &BigInt| -> Option<BigInt> {
        let r = n.sqrt();
        (&r * &r == *n).then_some(r)
    };
    Some(Rat::new(root(q.numer())?, root(q.denom())?))
}

impl Magnitude {
    pub fn one() -> Self {
        Magnitude::Rational(Rat::one())
    }

    pub fn rational(q: Rat) -> Self {
        assert!(!q.is_negative(), "magnitudes are non-negative");
        Magnitude::Rational(q)
    }

    pub fn sqrt(q: Rat) -> Self {
        assert!(!q.is_negative(), "sqrt of a negative rational");
        match perfect_square_root(&q) {
            Some(r) => Magnitude::Rational(r),
            None => Magnitude::Sqrt(q),
        }
    }

    /// The square, always rational.
    pub fn square(&self) -> Rat {
        match self {
            Magnitude::Rational(q) => q * q,
            Magnitude::Sqrt(q) => q.clone(),
        }
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        match self {
            Magnitude::Rational(q) => Some(q),
            Magnitude::Sqrt(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.square().is_zero()
    }

    pub fn mul(&self, other: &Magnitude) -> Magnitude {
        match (self, other) {
            (Magnitude::Rational(a), Magnitude::Rational(b)) => Magnitude::Rational(a * b),
            _ => Magnitude::sqrt(self.square() * other.square()),
        }
    }

    pub fn recip(&self) -> Magnitude {
        match self {
            Magnitude::Rational(q) => Magnitude::Rational(q.recip()),
            Magnitude::Sqrt(q) => Magnitude::Sqrt(q.recip()),
        }
    }

    pub fn div(&self, other: &Magnitude) -> Magnitude {
        self.mul(&other.recip())
    }

    pub fn scale(&self, q: &Rat) -> Magnitude {
        self.mul(&Magnitude::rational(q.abs()))
    }

    pub fn powi(&self, k: i64) -> Magnitude {
        let base = if k < 0 { self.recip() } else { self.clone() };
        let e = k.unsigned_abs() as usize;
        match base {
            Magnitude::Rational(q) => Magnitude::Rational(num_traits::pow(q, e)),
            Magnitude::Sqrt(q) => {
                let half = num_traits::pow(q.clone(), e / 2);
                if e % 2 == 0 {
                    Magnitude::Rational(half)
                } else {
                    Magnitude::sqrt(&half * &half * q)
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Magnitude::Rational(q) => rat_to_f64(q),
            Magnitude::Sqrt(q) => rat_to_f64(q).sqrt(),
        }
    }

    pub fn ln(&self) -> f64 {
        // Large exact values can overflow f64; take logs of numerator and denominator.
        let q = self.square();
        let ln_big = |n: &BigInt| -> f64 {
            let bits = n.bits();
            if bits < 1000 {
                rat_to_f64(&Rat::from_integer(n.clone())).ln()
            } else {
                let shift = bits - 900;
                rat_to_f64(&Rat::from_integer(n >> shift)).ln() + shift as f64 * std::f64::consts::LN_2
            }
        };
        0.5 * (ln_big(q.numer()) - ln_big(q.denom()))
    }

    pub fn max(self, other: Magnitude) -> Magnitude {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl From<Rat> for Magnitude {
    fn from(q: Rat) -> Self {
        Magnitude::rational(q)
    }
}

impl PartialEq for Magnitude {
    fn eq(&self, other: &Self) -> bool {
        self.square() == other.square()
    }
}

impl Eq for Magnitude {}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Magnitude {
    fn cmp(&self, other: &Self) -> Ordering {
        self.square().cmp(&other.square())
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Magnitude::Rational(q) => write!(f, "{}", format_rat(q)),
            Magnitude::Sqrt(q) => write!(f, "sqrt({})", format_rat(q)),
        }
    }
}
