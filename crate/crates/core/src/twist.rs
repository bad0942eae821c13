//! Adelic group elements of GL(n), twisted metrics and twisted heights.
//!
//! A twist `g = (g_v)` acts on coordinate vectors; sections transform by the
//! contragredient action `s ↦ s ∘ g^{-1}`, so the twisted local norm is
//! `‖s‖'_v(x) = |s(x)|_v / gauge_v(g_v x)^m` and the twisted height is
//! `Π_v gauge_v(g_v e)^m` for any representative e of x.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::heights::{height_adelic, local_gauge, AdelicPoint, MetrizedLineBundle, ProjPoint, Section};
use crate::linalg::RatMatrix;
use crate::magnitude::Magnitude;
use crate::places::{abs_v, parse_rat, support, Place, Rat};

/// `(g_v)_v` with `g_v = default` at every place not listed in `components`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdelicGroupElement {
    n: usize,
    default: RatMatrix,
    components: BTreeMap<Place, RatMatrix>,
}

fn check_invertible(m: &RatMatrix, n: usize) -> Result<()> {
    if m.rows() != n || m.cols() != n {
        return Err(Error::invalid(format!("expected a {n}×{n} matrix")));
    }
    if m.det()?.is_zero() {
        return Err(Error::SingularMatrix);
    }
    Ok(())
}

/// Writes a nonzero rational vector as `c · w` with w primitive integral; returns c.
fn content(v: &[Rat]) -> Rat {
    let den = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let num = v.iter().fold(BigInt::zero(), |g, x| {
        g.gcd(&(x * Rat::from_integer(den.clone())).to_integer())
    });
    Rat::new(num, den)
}

impl AdelicGroupElement {
    pub fn identity(n: usize) -> Self {
        AdelicGroupElement {
            n,
            default: RatMatrix::identity(n),
            components: BTreeMap::new(),
        }
    }

    /// Sets the component at one place.
    pub fn with_component(mut self, v: Place, m: RatMatrix) -> Result<Self> {
        check_invertible(&m, self.n)?;
        if m == self.default {
            self.components.remove(&v);
        } else {
            self.components.insert(v, m);
        }
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn default_component(&self) -> &RatMatrix {
        &self.default
    }

    pub fn components(&self) -> &BTreeMap<Place, RatMatrix> {
        &self.components
    }

    pub fn component(&self, v: &Place) -> &RatMatrix {
        self.components.get(v).unwrap_or(&self.default)
    }

    /// `g·γ`: every component, including the implicit ones, multiplied by γ on the right.
    pub fn right_translate(&self, gamma: &RatMatrix) -> Result<Self> {
        check_invertible(gamma, self.n)?;
        Ok(AdelicGroupElement {
            n: self.n,
            default: self.default.mul(gamma)?,
            components: self
                .components
                .iter()
                .map(|(v, m)| Ok((v.clone(), m.mul(gamma)?)))
                .collect::<Result<_>>()?,
        })
    }

    /// Multiplies the component at `v` by `k` on the left.
    pub fn left_multiply_at(&self, v: &Place, k: &RatMatrix) -> Result<Self> {
        check_invertible(k, self.n)?;
        let m = k.mul(self.component(v))?;
        self.clone().with_component(v.clone(), m)
    }

    /// Multiplies the component at `v` by `k` on the right.
    pub fn right_multiply_at(&self, v: &Place, k: &RatMatrix) -> Result<Self> {
        check_invertible(k, self.n)?;
        let m = self.component(v).mul(k)?;
        self.clone().with_component(v.clone(), m)
    }

    pub fn is_diagonal(&self) -> Result<()> {
        if !self.default.is_diagonal() {
            return Err(Error::NotDiagonal(Place::Infinite));
        }
        for (v, m) in &self.components {
            if !m.is_diagonal() {
                return Err(Error::NotDiagonal(v.clone()));
            }
        }
        Ok(())
    }

    /// Parses a twist description:
    ///
    /// ```text
    /// rank 2
    /// place inf
    /// 3 0
    /// 0 1
    /// place 5
    /// 5 0
    /// 0 1
    /// ```
    ///
    /// An optional `place default` block replaces the matrix used at unlisted places.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::invalid("empty twist description"))?;
        let n: usize = header
            .strip_prefix("rank")
            .and_then(|r| r.trim().parse().ok())
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::invalid(format!("expected `rank n` header, got {header:?}")))?;
        let mut default = RatMatrix::identity(n);
        let mut comps: Vec<(Place, RatMatrix)> = Vec::new();
        while let Some(line) = lines.next() {
            let label = line
                .strip_prefix("place")
                .map(str::trim)
                .ok_or_else(|| Error::invalid(format!("expected `place v`, got {line:?}")))?;
            let mut rows = Vec::with_capacity(n);
            for _ in 0..n {
                let row = lines.next().ok_or_else(|| Error::invalid("truncated matrix"))?;
                let entries: Vec<Rat> = row.split_whitespace().map(parse_rat).collect::<Result<_>>()?;
                if entries.len() != n {
                    return Err(Error::invalid(format!("matrix row {row:?} should have {n} entries")));
                }
                rows.push(entries);
            }
            let m = RatMatrix::from_rows(rows)?;
            check_invertible(&m, n)?;
            if label == "default" {
                default = m;
            } else {
                comps.push((label.parse()?, m));
            }
        }
        let mut g = AdelicGroupElement {
            n,
            default,
            components: BTreeMap::new(),
        };
        for (v, m) in comps {
            if g.components.contains_key(&v) {
                return Err(Error::invalid(format!("place {v} listed twice")));
            }
            g.components.insert(v, m);
        }
        Ok(g)
    }

    /// Places where `‖g_v e‖_v` can differ from one, with the content of `default · e`
    /// accounting for every unlisted prime.
    fn places_for(&self, e: &[Rat]) -> Result<(Vec<Place>, Rat)> {
        let c = content(&self.default.mul_vec(e)?);
        let mut places = vec![Place::Infinite];
        places.extend(self.components.keys().cloned());
        places.extend(support(&c).into_iter().map(Place::Finite));
        places.sort();
        places.dedup();
        Ok((places, c))
    }
}

/// `Π_v ‖g_v e‖_v^m`.
pub fn twisted_height(bundle: &MetrizedLineBundle, g: &AdelicGroupElement, x: &ProjPoint) -> Result<Magnitude> {
    if g.n != bundle.n + 1 || x.coords().len() != g.n {
        return Err(Error::invalid("twist size does not match the projective space"));
    }
    let e = x.as_rats();
    let (places, _) = g.places_for(&e)?;
    let mut h = Magnitude::one();
    for v in &places {
        let ge = g.component(v).mul_vec(&e)?;
        h = h.mul(&local_gauge(bundle.arch, v, &ge));
    }
    Ok(h.powi(bundle.m))
}

/// `‖s‖'_v(x) = |s(x)|_v / gauge_v(g_v x)^m`.
pub fn twisted_metric_norm(
    bundle: &MetrizedLineBundle,
    g: &AdelicGroupElement,
    v: &Place,
    s: &Section,
    x: &[Rat],
) -> Result<Magnitude> {
    if x.len() != g.n || s.nvars() != g.n || i64::from(s.degree()) != bundle.m {
        return Err(Error::invalid("section, point and twist sizes disagree"));
    }
    let value = s.eval(x);
    if value.is_zero() {
        return Err(Error::ZeroSectionAtPlace(v.clone()));
    }
    let gx = g.component(v).mul_vec(x)?;
    Ok(Magnitude::Rational(abs_v(&value, v)).div(&local_gauge(bundle.arch, v, &gx).powi(bundle.m)))
}

/// Exponents of a diagonal torus character `diag(t) ↦ Π t_i^{a_i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Character(pub Vec<i64>);

impl Character {
    pub fn eval_diagonal(&self, m: &RatMatrix) -> Result<Rat> {
        if !m.is_diagonal() {
            return Err(Error::invalid("character evaluated on a non-diagonal matrix"));
        }
        Ok(self
            .0
            .iter()
            .zip(m.diagonal_entries())
            .fold(Rat::one(), |acc, (&a, t)| {
                let p = num_traits::pow(t, a.unsigned_abs() as usize);
                if a >= 0 {
                    acc * p
                } else {
                    acc / p
                }
            }))
    }
}

/// The weight of a monomial section under the contragredient action: the torus
/// acts on `x^a` through the character `-a`.
pub fn weight_character(s: &Section) -> Result<Character> {
    let a = s.monomial_exponents().ok_or(Error::NotMonomial)?;
    Ok(Character(a.iter().map(|&k| -i64::from(k)).collect()))
}

/// Both sides of the weight comparison `H'(x) = Π_v |χ(g_v)|_v^{-1} · H(s; g·x)`.
pub fn compare_twisted(
    bundle: &MetrizedLineBundle,
    g: &AdelicGroupElement,
    s: &Section,
    x: &ProjPoint,
) -> Result<(Magnitude, Magnitude)> {
    g.is_diagonal()?;
    let chi = weight_character(s)?;
    let lhs = twisted_height(bundle, g, x)?;

    let e = x.as_rats();
    let default_image = ProjPoint::from_rats(&g.default.mul_vec(&e)?)?;
    let mut gx = AdelicPoint::rational(default_image);
    for (v, m) in &g.components {
        gx = gx.with_override(v.clone(), m.mul_vec(&e)?)?;
    }

    let chi_default = chi.eval_diagonal(&g.default)?;
    let mut places = vec![Place::Infinite];
    places.extend(g.components.keys().cloned());
    places.extend(support(&chi_default).into_iter().map(Place::Finite));
    places.sort();
    places.dedup();
    let mut weight = Rat::one();
    for v in &places {
        weight *= abs_v(&chi.eval_diagonal(g.component(v))?, v).recip();
    }
    let rhs = Magnitude::Rational(weight).mul(&height_adelic(bundle, s, &gx)?);
    Ok((lhs, rhs))
}

/// An orthogonal 2×2 rational matrix from a Pythagorean triple `a² + b² = c²`.
pub fn rational_rotation(a: i64, b: i64) -> Result<RatMatrix> {
    let c2 = a * a + b * b;
    let c = (c2 as f64).sqrt().round() as i64;
    if c * c != c2 || c == 0 {
        return Err(Error::invalid("not a Pythagorean pair"));
    }
    let q = |x: i64| Rat::new(x.into(), c.into());
    RatMatrix::from_rows(vec![vec![q(a), -q(b)], vec![q(b), q(a)]])
}

/// `|det|` is one at p and all entries are p-integral.
pub fn is_unimodular_at(m: &RatMatrix, p: &Place) -> bool {
    let Place::Finite(_) = p else { return false };
    let integral = (0..m.rows()).all(|i| m.row(i).iter().all(|x| abs_v(x, p) <= Rat::one()));
    integral && m.det().is_ok_and(|d| !d.is_zero() && abs_v(&d, p).is_one())
}

/// Shortcut for a diagonal twist from integer entries.
pub fn diagonal_matrix(entries: &[i64]) -> RatMatrix {
    RatMatrix::diagonal(&entries.iter().map(|&x| Rat::from_integer(x.into())).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heights::{height_point, ArchKind};
    use crate::places::rat;
    use num_traits::Signed;

    fn o1() -> MetrizedLineBundle {
        MetrizedLineBundle::new(1, 1, ArchKind::Max).unwrap()
    }

    fn pt(c: &[i64]) -> ProjPoint {
        ProjPoint::from_i64(c).unwrap()
    }

    #[test]
    fn examples() {
        let id = AdelicGroupElement::identity(2);
        assert_eq!(
            twisted_height(&o1(), &id, &pt(&[2, 3])).unwrap(),
            Magnitude::rational(rat(3))
        );
        let g = id
            .clone()
            .with_component(Place::Infinite, diagonal_matrix(&[2, 1]))
            .unwrap();
        assert_eq!(
            twisted_height(&o1(), &g, &pt(&[1, 1])).unwrap(),
            Magnitude::rational(rat(2))
        );
        let h = id
            .with_component(Place::finite(2).unwrap(), diagonal_matrix(&[2, 1]))
            .unwrap();
        assert_eq!(twisted_height(&o1(), &h, &pt(&[1, 1])).unwrap(), Magnitude::one());
    }

    #[test]
    fn weight_comparison_examples() {
        let g = AdelicGroupElement::identity(2)
            .with_component(Place::Infinite, diagonal_matrix(&[3, 1]))
            .unwrap();
        let (l, r) = compare_twisted(&o1(), &g, &Section::coordinate(2, 0), &pt(&[1, 1])).unwrap();
        assert_eq!(l, Magnitude::rational(rat(3)));
        assert_eq!(l, r);
        let g5 = AdelicGroupElement::identity(2)
            .with_component(Place::finite(5).unwrap(), diagonal_matrix(&[5, 1]))
            .unwrap();
        let (l, r) = compare_twisted(&o1(), &g5, &Section::coordinate(2, 1), &pt(&[2, 3])).unwrap();
        assert_eq!(l, r);
        let shear = RatMatrix::from_i64(&[&[1, 1], &[0, 1]]).unwrap();
        let bad = AdelicGroupElement::identity(2)
            .with_component(Place::Infinite, shear)
            .unwrap();
        assert_eq!(
            compare_twisted(&o1(), &bad, &Section::coordinate(2, 0), &pt(&[1, 1])).unwrap_err(),
            Error::NotDiagonal(Place::Infinite)
        );
        assert_eq!(
            compare_twisted(&o1(), &g, &Section::parse(2, "x0+x1").unwrap(), &pt(&[1, 1])).unwrap_err(),
            Error::NotMonomial
        );
    }

    #[test]
    fn twisted_norm_two_ways() {
        // g_∞ = diag(3,1), s = x0 at (1:1): |s(x)| / ‖g x‖ = 1/3, and substituting the
        // transformed section s∘g^{-1} = x0/3 at g x = (3,1) gives the same.
        let g = AdelicGroupElement::identity(2)
            .with_component(Place::Infinite, diagonal_matrix(&[3, 1]))
            .unwrap();
        let x = [rat(1), rat(1)];
        let direct = twisted_metric_norm(&o1(), &g, &Place::Infinite, &Section::coordinate(2, 0), &x).unwrap();
        let transformed = Section::parse(2, "1/3*x0").unwrap();
        let gx = [rat(3), rat(1)];
        let sub =
            Magnitude::Rational(transformed.eval(&gx).abs()).div(&local_gauge(ArchKind::Max, &Place::Infinite, &gx));
        assert_eq!(direct, sub);
        assert_eq!(direct, Magnitude::rational(Rat::new(1.into(), 3.into())));
    }

    #[test]
    fn shear_twists() {
        // unipotent twists at one finite and one infinite place
        let shear = RatMatrix::from_i64(&[&[1, 1], &[0, 1]]).unwrap();
        let g = AdelicGroupElement::identity(2)
            .with_component(Place::Infinite, shear.clone())
            .unwrap()
            .with_component(Place::finite(3).unwrap(), shear)
            .unwrap();
        // (1:2) ↦ (3,2) at both places: ‖·‖_∞ = 3, ‖·‖_3 = 1
        assert_eq!(
            twisted_height(&o1(), &g, &pt(&[1, 2])).unwrap(),
            Magnitude::rational(rat(3))
        );
        // the shear is in GL(2, Z_3), so only the archimedean factor moves
        let x = pt(&[5, -7]);
        let only_inf = AdelicGroupElement::identity(2)
            .with_component(Place::Infinite, RatMatrix::from_i64(&[&[1, 1], &[0, 1]]).unwrap())
            .unwrap();
        assert_eq!(
            twisted_height(&o1(), &g, &x).unwrap(),
            twisted_height(&o1(), &only_inf, &x).unwrap()
        );
    }

    #[test]
    fn translate_by_gamma_everywhere() {
        let gamma = diagonal_matrix(&[1, 2]);
        let g = AdelicGroupElement::identity(2).right_translate(&gamma).unwrap();
        let h = twisted_height(&o1(), &g, &pt(&[1, 1])).unwrap();
        // g_v (1,1) = (1,2) at every place: ‖·‖_∞ = 2, ‖·‖_2 = 1, others 1
        assert_eq!(h, Magnitude::rational(rat(2)));
        assert_eq!(h, height_point(&o1(), &pt(&[1, 2])).unwrap());
    }

    #[test]
    fn parse_twist_file() {
        let g = AdelicGroupElement::parse("rank 2\n# test\nplace inf\n3 0\n0 1\nplace 5\n5 0\n0 1/2\n").unwrap();
        assert_eq!(g.components().len(), 2);
        assert!(AdelicGroupElement::parse("rank 2\nplace 4\n1 0\n0 1\n").is_err());
        assert_eq!(
            AdelicGroupElement::parse("rank 2\nplace inf\n1 1\n1 1\n").unwrap_err(),
            Error::SingularMatrix
        );
    }

    #[test]
    fn rotations() {
        let r = rational_rotation(3, 4).unwrap();
        assert!(r.mul(&r.transpose()).unwrap().is_identity());
        assert!(rational_rotation(1, 1).is_err());
        assert!(is_unimodular_at(
            &RatMatrix::from_i64(&[&[2, 1], &[1, 1]]).unwrap(),
            &Place::finite(2).unwrap()
        ));
    }
}
