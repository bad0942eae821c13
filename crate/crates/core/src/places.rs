//! Exact rationals, the places of Q and their absolute values.
//!
//! Finite places carry a prime checked by a deterministic Miller-Rabin test.
//! Absolute values of rationals are rationals at every place (including the
//! archimedean one), so the product formula holds exactly.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number, always stored in lowest terms with positive denominator.
pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p`, `-p/q` or a finite decimal such as `0.25` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| Error::invalid(format!("bad rational {s}")))?;
        let d = BigInt::from_str(d.trim()).map_err(|_| Error::invalid(format!("bad rational {s}")))?;
        if d.is_zero() {
            return Err(Error::invalid(format!("zero denominator in {s}")));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(Error::invalid(format!("bad decimal {s}")));
        }
        let n = BigInt::from_str(&digits).map_err(|_| Error::invalid(format!("bad decimal {s}")))?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let r = Rat::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    BigInt::from_str(s)
        .map(Rat::from_integer)
        .map_err(|_| Error::invalid(format!("bad rational {s}")))
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn format_rat(x: &Rat) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// A rational prime, validated on construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prime(BigUint);

impl Prime {
    pub fn new(p: impl Into<BigUint>) -> Result<Self> {
        let p = p.into();
        if is_prime(&p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p.to_string()))
        }
    }

    pub(crate) fn new_unchecked(p: BigUint) -> Self {
        debug_assert!(is_prime(&p));
        Prime(p)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn as_bigint(&self) -> BigInt {
        BigInt::from_biguint(Sign::Plus, self.0.clone())
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A place of Q: the archimedean one or a prime.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Infinite,
    Finite(Prime),
}

impl Place {
    pub fn finite(p: u64) -> Result<Self> {
        Prime::new(p).map(Place::Finite)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Place::Finite(_))
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinite => write!(f, "inf"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "oo" => Ok(Place::Infinite),
            t => {
                let p = BigUint::from_str(t).map_err(|_| Error::invalid(format!("bad place {t}")))?;
                Prime::new(p).map(Place::Finite)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Primality and factorization

const SMALL_PRIMES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

fn strong_probable_prime_u64(n: u64, a: u64) -> bool {
    let mut d = n - 1;
    let s = d.trailing_zeros();
    d >>= s;
    let mut x = pow_mod(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Deterministic for every u64 (the first twelve prime bases suffice below 3.3e24).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    SMALL_PRIMES[..12].iter().all(|&a| strong_probable_prime_u64(n, a))
}

fn strong_probable_prime_big(n: &BigUint, a: &BigUint) -> bool {
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    let mut x = a.modpow(&d, n);
    if x == one || x == nm1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == nm1 {
            return true;
        }
    }
    false
}

/// Deterministic primality test.
///
/// Below 3,317,044,064,679,887,385,961,981 the bases 2..41 are proven sufficient.
/// Above that bound every base `a <= 2 ln(n)^2` is tried (Miller's test, which is
/// deterministic under GRH).
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for &p in &SMALL_PRIMES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let bound = BigUint::from_str("3317044064679887385961981").expect("constant");
    if n < &bound {
        return SMALL_PRIMES
            .iter()
            .all(|&a| strong_probable_prime_big(n, &BigUint::from(a)));
    }
    let ln = n.bits() as f64 * std::f64::consts::LN_2;
    let limit = (2.0 * ln * ln).floor() as u64;
    (2..=limit).all(|a| strong_probable_prime_big(n, &BigUint::from(a)))
}

fn pollard_brent(n: &BigUint, c: u64) -> Option<BigUint> {
    let one = BigUint::one();
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let mut y = BigUint::from(2u32);
    let mut r: u64 = 1;
    let mut q = BigUint::one();
    let mut g = BigUint::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    let m = 64u64;
    while g == one {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g == one {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                let diff = if x > y { &x - &y } else { &y - &x };
                q = (q * diff) % n;
            }
            g = q.gcd(n);
            k += m;
        }
        r *= 2;
        if r > 1 << 24 {
            return None;
        }
    }
    if &g == n {
        loop {
            ys = f(&ys);
            let diff = if x > ys { &x - &ys } else { &ys - &x };
            g = diff.gcd(n);
            if g != one {
                break;
            }
        }
    }
    if &g == n {
        None
    } else {
        Some(g)
    }
}

fn split_into(n: BigUint, out: &mut Vec<BigUint>) {
    if n.is_one() {
        return;
    }
    if is_prime(&n) {
        out.push(n);
        return;
    }
    for c in 1u64.. {
        if let Some(d) = pollard_brent(&n, c) {
            let other = &n / &d;
            split_into(d, out);
            split_into(other, out);
            return;
        }
    }
}

fn pollard_brent_u64(n: u64, c: u64) -> Option<u64> {
    let f = |x: u64| ((x as u128 * x as u128 + c as u128) % n as u128) as u64;
    let (mut y, mut r, mut q, mut g) = (2u64, 1u64, 1u64, 1u64);
    let (mut x, mut ys) = (y, y);
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..64.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += 64;
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g != 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

fn split_u64(n: u64, out: &mut Vec<BigUint>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        out.push(BigUint::from(n));
        return;
    }
    for c in 1u64.. {
        if let Some(d) = pollard_brent_u64(n, c) {
            split_u64(d, out);
            split_u64(n / d, out);
            return;
        }
    }
}

fn small_primes() -> &'static [u64] {
    static PRIMES: std::sync::OnceLock<Vec<u64>> = std::sync::OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(1000))
}

/// Prime factorization `n = prod p^e`, primes in increasing order. `factorize(1)` is empty.
pub fn factorize(n: &BigUint) -> Vec<(BigUint, u32)> {
    assert!(!n.is_zero(), "factorize(0)");
    let mut primes = Vec::new();
    match n.to_u64() {
        Some(mut m) => {
            for &p in small_primes() {
                while m % p == 0 {
                    m /= p;
                    primes.push(BigUint::from(p));
                }
            }
            split_u64(m, &mut primes);
        }
        None => {
            let mut m = n.clone();
            for &p in small_primes() {
                while (&m % p).is_zero() {
                    m /= p;
                    primes.push(BigUint::from(p));
                }
            }
            match m.to_u64() {
                Some(small) => split_u64(small, &mut primes),
                None => split_into(m, &mut primes),
            }
        }
    }
    primes.sort();
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

pub fn factorize_u64(n: u64) -> Vec<(u64, u32)> {
    factorize(&BigUint::from(n))
        .into_iter()
        .map(|(p, e)| (p.to_u64().expect("factor of a u64"), e))
        .collect()
}

/// Primes dividing the numerator or the denominator of a nonzero rational.
pub fn support(x: &Rat) -> Vec<Prime> {
    let mut ps: Vec<BigUint> = Vec::new();
    for part in [x.numer(), x.denom()] {
        let m = part.magnitude();
        if !m.is_zero() {
            ps.extend(factorize(m).into_iter().map(|(p, _)| p));
        }
    }
    ps.sort();
    ps.dedup();
    ps.into_iter().map(Prime::new_unchecked).collect()
}

// ---------------------------------------------------------------------------
// Valuations and absolute values

fn valuation_int(n: &BigInt, p: &BigUint) -> i64 {
    let mut m = n.magnitude().clone();
    let mut v = 0;
    while (&m % p).is_zero() {
        m /= p;
        v += 1;
    }
    v
}

/// `ord_p(x)` for nonzero x.
pub fn ord_p(x: &Rat, p: &Prime) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::Zero);
    }
    Ok(valuation_int(x.numer(), p.value()) - valuation_int(x.denom(), p.value()))
}

/// Normalized absolute value `|x|_v`; exact at every place.
pub fn abs_v(x: &Rat, v: &Place) -> Rat {
    if x.is_zero() {
        return Rat::zero();
    }
    match v {
        Place::Infinite => x.abs(),
        Place::Finite(p) => {
            let k = ord_p(x, p).expect("nonzero");
            let pk = num_traits::pow(p.as_bigint(), k.unsigned_abs() as usize);
            if k >= 0 {
                Rat::new(BigInt::one(), pk)
            } else {
                Rat::from_integer(pk)
            }
        }
    }
}

/// Product of `|x|_v` over the support of x and the archimedean place.
/// For every nonzero rational the result is exactly one.
pub fn product_formula_check(x: &Rat) -> Result<Rat> {
    if x.is_zero() {
        return Err(Error::Zero);
    }
    let mut prod = abs_v(x, &Place::Infinite);
    for p in support(x) {
        prod *= abs_v(x, &Place::Finite(p));
    }
    Ok(prod)
}

/// Euler's totient via factorization.
pub fn euler_phi(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Zero);
    }
    Ok(factorize_u64(n)
        .into_iter()
        .fold(1u64, |acc, (p, e)| acc * (p - 1) * p.pow(e - 1)))
}

/// All primes `<= limit` in increasing order (sieve of Eratosthenes).
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}
