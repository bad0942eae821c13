//! Metrized line bundles O(m) on P^n, heights of rational and adelic points,
//! and restriction of bundles to points as rank-one lattices.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::HermitianLattice;
use crate::magnitude::Magnitude;
use crate::places::{abs_v, parse_rat, support, Place, Rat};

/// A point of P^n(Q) in canonical form: primitive integer coordinates with the
/// first nonzero coordinate positive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjPoint {
    coords: Vec<BigInt>,
}

impl ProjPoint {
    pub fn new(coords: Vec<BigInt>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid("a projective point needs at least two coordinates"));
        }
        let g = coords.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        if g.is_zero() {
            return Err(Error::invalid("projective point with all coordinates zero"));
        }
        let first_negative = coords.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative());
        let g = if first_negative { -g } else { g };
        Ok(ProjPoint {
            coords: coords.into_iter().map(|c| c / &g).collect(),
        })
    }

    pub fn from_i64(coords: &[i64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Clears denominators of a nonzero rational vector.
    pub fn from_rats(coords: &[Rat]) -> Result<Self> {
        let l = coords.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        Self::new(
            coords
                .iter()
                .map(|c| (c * Rat::from_integer(l.clone())).to_integer())
                .collect(),
        )
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn as_rats(&self) -> Vec<Rat> {
        self.coords.iter().map(|c| Rat::from_integer(c.clone())).collect()
    }

    /// Ambient dimension n for a point of P^n.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(":"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArchKind {
    /// `max_i |x_i|`
    Max,
    /// `(Σ x_i²)^{1/2}`
    L2,
}

impl FromStr for ArchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "max" => Ok(ArchKind::Max),
            "l2" => Ok(ArchKind::L2),
            _ => Err(Error::invalid(format!(
                "unknown archimedean metric {s:?} (expected max or l2)"
            ))),
        }
    }
}

impl fmt::Display for ArchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArchKind::Max => "max",
            ArchKind::L2 => "l2",
        })
    }
}

/// O(m) on P^n with model metrics at every prime and `arch` at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MetrizedLineBundle {
    pub n: usize,
    pub m: i64,
    pub arch: ArchKind,
}

impl MetrizedLineBundle {
    pub fn new(n: usize, m: i64, arch: ArchKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("projective dimension must be at least 1"));
        }
        Ok(MetrizedLineBundle { n, m, arch })
    }

    fn check_point(&self, len: usize) -> Result<()> {
        if len != self.n + 1 {
            return Err(Error::invalid(format!(
                "expected {} coordinates, got {len}",
                self.n + 1
            )));
        }
        Ok(())
    }
}

/// Gauge of a coordinate vector at a place: the max of the p-adic absolute values at a
/// prime, and the chosen norm at infinity.
pub fn local_gauge(arch: ArchKind, v: &Place, x: &[Rat]) -> Magnitude {
    match (v, arch) {
        (Place::Finite(_), _) | (Place::Infinite, ArchKind::Max) => {
            Magnitude::Rational(x.iter().map(|c| abs_v(c, v)).max().unwrap_or_else(Rat::zero))
        }
        (Place::Infinite, ArchKind::L2) => Magnitude::sqrt(x.iter().map(|c| c * c).sum()),
    }
}

/// A nonzero homogeneous form with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    nvars: usize,
    degree: u32,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl Section {
    pub fn new(nvars: usize, terms: BTreeMap<Vec<u32>, Rat>) -> Result<Self> {
        let terms: BTreeMap<_, _> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let Some(first) = terms.keys().next() else {
            return Err(Error::invalid("section is identically zero"));
        };
        let degree: u32 = first.iter().sum();
        for e in terms.keys() {
            if e.len() != nvars {
                return Err(Error::invalid("monomial exponent length does not match variable count"));
            }
            if e.iter().sum::<u32>() != degree {
                return Err(Error::invalid("section is not homogeneous"));
            }
        }
        Ok(Section { nvars, degree, terms })
    }

    pub fn monomial(exponents: Vec<u32>) -> Self {
        let nvars = exponents.len();
        Self::new(nvars, BTreeMap::from([(exponents, Rat::one())])).expect("a monomial is homogeneous")
    }

    /// The coordinate function `x_i`.
    pub fn coordinate(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e)
    }

    /// Parses forms such as `x0^2 - 3/2*x0*x1 + x1^2`.
    pub fn parse(nvars: usize, text: &str) -> Result<Self> {
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(Error::invalid("empty section"));
        }
        let mut terms: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
        let mut chunks = Vec::new();
        let mut current = String::new();
        for ch in cleaned.chars() {
            if (ch == '+' || ch == '-') && !current.is_empty() && !current.ends_with('^') {
                chunks.push(std::mem::take(&mut current));
            }
            current.push(ch);
        }
        chunks.push(current);
        for chunk in chunks {
            let (sign, body) = match chunk.strip_prefix('-') {
                Some(b) => (-Rat::one(), b),
                None => (Rat::one(), chunk.strip_prefix('+').unwrap_or(&chunk)),
            };
            let mut coef = sign;
            let mut exps = vec![0u32; nvars];
            for factor in body.split('*') {
                if let Some(var) = factor.strip_prefix('x') {
                    let (idx, pow) = match var.split_once('^') {
                        Some((i, p)) => (
                            i,
                            p.parse::<u32>()
                                .map_err(|_| Error::invalid(format!("bad exponent in {factor}")))?,
                        ),
                        None => (var, 1),
                    };
                    let i: usize = idx
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad variable {factor}")))?;
                    if i >= nvars {
                        return Err(Error::invalid(format!("variable x{i} out of range")));
                    }
                    exps[i] += pow;
                } else {
                    coef *= parse_rat(factor)?;
                }
            }
            *terms.entry(exps).or_insert_with(Rat::zero) += coef;
        }
        Self::new(nvars, terms)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Rat> {
        &self.terms
    }

    /// Exponent vector when the section is a single monomial (any coefficient).
    pub fn monomial_exponents(&self) -> Option<&[u32]> {
        (self.terms.len() == 1).then(|| self.terms.keys().next().expect("one term").as_slice())
    }

    pub fn eval(&self, x: &[Rat]) -> Rat {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(x)
                    .fold(c.clone(), |acc, (&k, xi)| acc * num_traits::pow(xi.clone(), k as usize))
            })
            .sum()
    }
}

/// Local norm `‖s‖_v(x) = |s(x)|_v / gauge_v(x)^m`.
pub fn local_norm(bundle: &MetrizedLineBundle, s: &Section, v: &Place, x: &[Rat]) -> Result<Magnitude> {
    bundle.check_point(x.len())?;
    if s.nvars != x.len() || i64::from(s.degree) != bundle.m {
        return Err(Error::invalid("section does not belong to this line bundle"));
    }
    let value = s.eval(x);
    if value.is_zero() {
        return Err(Error::ZeroSectionAtPlace(v.clone()));
    }
    let gauge = local_gauge(bundle.arch, v, x);
    if gauge.is_zero() {
        return Err(Error::invalid("zero coordinate vector"));
    }
    Ok(Magnitude::Rational(abs_v(&value, v)).div(&gauge.powi(bundle.m)))
}

/// `H(O(m); x)`: `(max |x_i|)^m` or `(Σ x_i²)^{m/2}` on the primitive representative.
pub fn height_point(bundle: &MetrizedLineBundle, x: &ProjPoint) -> Result<Magnitude> {
    bundle.check_point(x.coords.len())?;
    Ok(local_gauge(bundle.arch, &Place::Infinite, &x.as_rats()).powi(bundle.m))
}

/// A point of P^n over the adeles: a rational point, replaced at finitely many places
/// by local rational coordinate vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdelicPoint {
    pub default: ProjPoint,
    pub overrides: BTreeMap<Place, Vec<Rat>>,
}

impl AdelicPoint {
    pub fn rational(x: ProjPoint) -> Self {
        AdelicPoint {
            default: x,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_override(mut self, v: Place, coords: Vec<Rat>) -> Result<Self> {
        if coords.len() != self.default.coords.len() {
            return Err(Error::invalid("override has the wrong number of coordinates"));
        }
        if coords.iter().all(Zero::is_zero) {
            return Err(Error::invalid("override vector is zero"));
        }
        self.overrides.insert(v, coords);
        Ok(self)
    }

    pub fn local(&self, v: &Place) -> Vec<Rat> {
        self.overrides.get(v).cloned().unwrap_or_else(|| self.default.as_rats())
    }
}

/// `H(L̄, s; x) = Π_v ‖s‖_v(x_v)^{-1}` over every place where a local factor can differ
/// from one.
pub fn height_adelic(bundle: &MetrizedLineBundle, s: &Section, x: &AdelicPoint) -> Result<Magnitude> {
    let default = x.default.as_rats();
    let value = s.eval(&default);
    if value.is_zero() {
        // the default point is used at all but finitely many places; name the first one
        let v = std::iter::once(Place::Infinite)
            .chain(
                crate::places::primes_up_to(1000)
                    .into_iter()
                    .map(|p| Place::finite(p).expect("prime")),
            )
            .find(|v| !x.overrides.contains_key(v))
            .expect("finitely many overrides");
        return Err(Error::ZeroSectionAtPlace(v));
    }
    let mut places: Vec<Place> = vec![Place::Infinite];
    places.extend(x.overrides.keys().cloned());
    places.extend(support(&value).into_iter().map(Place::Finite));
    places.sort();
    places.dedup();
    let mut h = Magnitude::one();
    for v in &places {
        h = h.div(&local_norm(bundle, s, v, &x.local(v))?);
    }
    Ok(h)
}

/// `O(m)` restricted to `b`: the rank-one lattice with Gram `[[H_{O(1)}(b)^{-2m}]]`.
pub fn restrict_to_point(bundle: &MetrizedLineBundle, b: &ProjPoint) -> Result<HermitianLattice> {
    bundle.check_point(b.coords.len())?;
    let h2 = local_gauge(bundle.arch, &Place::Infinite, &b.as_rats()).square();
    let gram = if bundle.m >= 0 {
        num_traits::pow(h2.recip(), bundle.m as usize)
    } else {
        num_traits::pow(h2, bundle.m.unsigned_abs() as usize)
    };
    HermitianLattice::diagonal(&[gram])
}

/// Restriction of `⊕ O(m_i)` to `b`.
pub fn restrict_bundle_sum(degrees: &[i64], n: usize, arch: ArchKind, b: &ProjPoint) -> Result<HermitianLattice> {
    let (first, rest) = degrees
        .split_first()
        .ok_or_else(|| Error::invalid("empty degree list"))?;
    let mut l = restrict_to_point(&MetrizedLineBundle::new(n, *first, arch)?, b)?;
    for &m in rest {
        l = l.direct_sum(&restrict_to_point(&MetrizedLineBundle::new(n, m, arch)?, b)?);
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::places::{rat, ratio};

    fn o(n: usize, m: i64) -> MetrizedLineBundle {
        MetrizedLineBundle::new(n, m, ArchKind::Max).unwrap()
    }

    #[test]
    fn canonical_points() {
        let p = ProjPoint::from_i64(&[-4, 6]).unwrap();
        assert_eq!(p, ProjPoint::from_i64(&[2, -3]).unwrap());
        assert!(ProjPoint::from_i64(&[0, 0]).is_err());
        assert_eq!(
            ProjPoint::from_rats(&[ratio(1, 2), ratio(1, 3)]).unwrap(),
            ProjPoint::from_i64(&[3, 2]).unwrap()
        );
    }

    #[test]
    fn height_examples() {
        let h = |n, m, c: &[i64]| height_point(&o(n, m), &ProjPoint::from_i64(c).unwrap()).unwrap();
        assert_eq!(h(1, 1, &[2, 3]), Magnitude::rational(rat(3)));
        assert_eq!(h(1, 2, &[4, 6]), Magnitude::rational(rat(9)));
        assert_eq!(h(2, 1, &[1, 0, 0]), Magnitude::one());
        let l2 = MetrizedLineBundle::new(1, 1, ArchKind::L2).unwrap();
        assert_eq!(
            height_point(&l2, &ProjPoint::from_i64(&[3, 4]).unwrap()).unwrap(),
            Magnitude::rational(rat(5))
        );
    }

    #[test]
    fn adelic_height_examples() {
        let b = o(1, 1);
        let x = AdelicPoint::rational(ProjPoint::from_i64(&[1, 1]).unwrap());
        assert_eq!(
            height_adelic(&b, &Section::coordinate(2, 0), &x).unwrap(),
            Magnitude::one()
        );
        // override at 2 by (1/2 : 1): ‖x_0‖_2 = |1/2|_2 / max(|1/2|_2, |1|_2) = 1, and
        // the places 3 and ∞ keep the default (1:1), contributing 1 each.
        let y = x
            .clone()
            .with_override(Place::finite(2).unwrap(), vec![ratio(1, 2), rat(1)])
            .unwrap();
        let by_hand = Magnitude::one();
        assert_eq!(height_adelic(&b, &Section::coordinate(2, 0), &y).unwrap(), by_hand);
        // override by (2 : 1): ‖x_0‖_2 = (1/2)/1, so that factor contributes 2.
        let z = x
            .with_override(Place::finite(2).unwrap(), vec![rat(2), rat(1)])
            .unwrap();
        assert_eq!(
            height_adelic(&b, &Section::coordinate(2, 0), &z).unwrap(),
            Magnitude::rational(rat(2))
        );
    }

    #[test]
    fn section_independence_and_zero() {
        let b = o(1, 2);
        let x = AdelicPoint::rational(ProjPoint::from_i64(&[2, 3]).unwrap());
        let s1 = Section::parse(2, "x0^2").unwrap();
        let s2 = Section::parse(2, "5/7*x0*x1 - x1^2").unwrap();
        let h1 = height_adelic(&b, &s1, &x).unwrap();
        assert_eq!(h1, height_adelic(&b, &s2, &x).unwrap());
        assert_eq!(h1, Magnitude::rational(rat(9)));
        let zero = AdelicPoint::rational(ProjPoint::from_i64(&[0, 1]).unwrap());
        assert_eq!(
            height_adelic(&b, &s1, &zero).unwrap_err(),
            Error::ZeroSectionAtPlace(Place::Infinite)
        );
    }

    #[test]
    fn parse_sections() {
        let s = Section::parse(3, "x0*x1 - 2*x2^2 + 1/3*x0^2").unwrap();
        assert_eq!(s.degree(), 2);
        assert_eq!(s.eval(&[rat(1), rat(2), rat(1)]), ratio(1, 3));
        assert!(Section::parse(2, "x0 + x1^2").is_err());
        assert!(Section::parse(2, "x0 - x0").is_err());
        assert_eq!(
            Section::parse(2, "-3*x1").unwrap().monomial_exponents(),
            Some(&[0u32, 1][..])
        );
    }

    #[test]
    fn restrictions() {
        let b = ProjPoint::from_i64(&[2, 3]).unwrap();
        let l = restrict_to_point(&o(1, 1), &b).unwrap();
        assert_eq!(l, HermitianLattice::diagonal(&[ratio(1, 9)]).unwrap());
        assert_eq!(restrict_to_point(&o(1, 0), &b).unwrap(), HermitianLattice::unit(1));
        let dual = restrict_to_point(&o(1, -1), &b).unwrap();
        assert_eq!(dual.vol_exact().unwrap(), Magnitude::rational(rat(3)));
        assert_eq!(dual, l.dual());
        let s = restrict_bundle_sum(&[0, 1], 1, ArchKind::Max, &ProjPoint::from_i64(&[1, 2]).unwrap()).unwrap();
        assert_eq!(s, HermitianLattice::diagonal(&[rat(1), ratio(1, 4)]).unwrap());
    }

    #[test]
    fn restriction_matches_fiber_generator() {
        // The values of degree-m monomials at a primitive point generate Z, and the
        // evaluation functional has archimedean norm gauge^{-m}; so the fiber is the
        // rank-one lattice of covolume 1/H.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let b = loop {
                let c = [rng.gen_range(-50i64..=50), rng.gen_range(-50i64..=50)];
                if let Ok(p) = ProjPoint::from_i64(&c) {
                    break p;
                }
            };
            for m in [1i64, 2] {
                let x = b.as_rats();
                let mut g = BigInt::zero();
                for a in 0..=m as u32 {
                    let v = Section::monomial(vec![a, m as u32 - a]).eval(&x);
                    g = g.gcd(&v.to_integer());
                }
                assert!(g.is_one());
                let bundle = o(1, m);
                let generator_norm = Magnitude::one().div(&local_gauge(ArchKind::Max, &Place::Infinite, &x).powi(m));
                let lat = restrict_to_point(&bundle, &b).unwrap();
                assert_eq!(lat.vol_exact().unwrap(), generator_norm);
                assert_eq!(generator_norm.recip(), height_point(&bundle, &b).unwrap());
            }
        }
    }
}
