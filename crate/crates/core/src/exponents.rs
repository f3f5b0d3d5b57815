//! Extended exponents `p ∈ [1, ∞]` with exact dual arithmetic.
//!
//! Every formula downstream is affine in the reciprocals `1/p`, `1/p'`,
//! `1/q`, so exponents are stored by reciprocal: `p = ∞` is the exact value
//! `0` and `p = 1` the exact value `1`. The dual reciprocal is computed once
//! at construction and `dual()` swaps the pair, which makes the dual map an
//! exact involution (recomputing `1 - (1 - r)` in floating point is not).

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExponentError {
    #[error("exponent must satisfy 1 <= p <= inf, got {0}")]
    OutOfRange(f64),
    #[error("reciprocal must lie in [0, 1], got {0}")]
    BadReciprocal(f64),
    #[error("interpolation requires p_i != p_j")]
    DegeneratePair,
    #[error("interpolation requires q between p_i and p_j, got 1/q = {0}")]
    TargetOutsideRange(f64),
    #[error("cannot parse exponent from {0:?}")]
    Parse(String),
}

/// An exponent `p ∈ [1, ∞]`, stored as the pair `(1/p, 1/p')`.
#[derive(Clone, Copy)]
pub struct Exponent {
    recip: f64,
    dual_recip: f64,
}

impl Exponent {
    pub const ONE: Exponent = Exponent { recip: 1.0, dual_recip: 0.0 };
    pub const TWO: Exponent = Exponent { recip: 0.5, dual_recip: 0.5 };
    pub const INFINITY: Exponent = Exponent { recip: 0.0, dual_recip: 1.0 };

    /// Exponent with value `p`; `f64::INFINITY` is accepted.
    pub fn new(p: f64) -> Result<Self, ExponentError> {
        if p.is_nan() || p < 1.0 {
            return Err(ExponentError::OutOfRange(p));
        }
        if p.is_infinite() {
            return Ok(Self::INFINITY);
        }
        Self::from_recip(1.0 / p)
    }

    /// Exponent from its reciprocal `1/p ∈ [0, 1]`.
    pub fn from_recip(recip: f64) -> Result<Self, ExponentError> {
        if !(0.0..=1.0).contains(&recip) {
            return Err(ExponentError::BadReciprocal(recip));
        }
        Ok(Exponent { recip, dual_recip: 1.0 - recip })
    }

    /// Parses `"inf"`, a fraction `"a/b"`, or a decimal.
    pub fn parse(text: &str) -> Result<Self, ExponentError> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(Self::INFINITY);
        }
        if let Some((num, den)) = t.split_once('/') {
            let a: f64 = num.trim().parse().map_err(|_| ExponentError::Parse(text.into()))?;
            let b: f64 = den.trim().parse().map_err(|_| ExponentError::Parse(text.into()))?;
            if !(a.is_finite() && b.is_finite()) || b == 0.0 {
                return Err(ExponentError::Parse(text.into()));
            }
            // p = a/b; store 1/p = b/a directly to keep fractions like 3/2 sharp.
            if a < b || a <= 0.0 || b <= 0.0 {
                return Err(ExponentError::OutOfRange(a / b));
            }
            return Self::from_recip(b / a);
        }
        let p: f64 = t.parse().map_err(|_| ExponentError::Parse(text.into()))?;
        Self::new(p)
    }

    #[inline]
    pub fn recip(self) -> f64 {
        self.recip
    }

    /// The exponent value; `f64::INFINITY` for `p = ∞`.
    #[inline]
    pub fn p(self) -> f64 {
        if self.recip == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.recip
        }
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.recip == 0.0
    }

    #[inline]
    pub fn is_one(self) -> bool {
        self.recip == 1.0
    }

    /// The dual exponent `p'` with `1/p + 1/p' = 1`. Exact involution.
    #[inline]
    pub fn dual(self) -> Exponent {
        Exponent { recip: self.dual_recip, dual_recip: self.recip }
    }
}

/// Solves `1/q = (1-λ)/p_i + λ/p_j` for `λ ∈ [0, 1]`.
///
/// Requires `p_i ≤ q ≤ p_j` (equivalently `1/p_j ≤ 1/q ≤ 1/p_i`) and
/// `p_i ≠ p_j`.
pub fn solve_lambda(p_i: Exponent, p_j: Exponent, q: Exponent) -> Result<f64, ExponentError> {
    let (ri, rj, rq) = (p_i.recip(), p_j.recip(), q.recip());
    if ri == rj {
        return Err(ExponentError::DegeneratePair);
    }
    if !(rj <= rq && rq <= ri) {
        return Err(ExponentError::TargetOutsideRange(rq));
    }
    Ok((ri - rq) / (ri - rj))
}

impl PartialEq for Exponent {
    fn eq(&self, other: &Self) -> bool {
        self.recip == other.recip
    }
}

impl Eq for Exponent {}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    /// Orders by the exponent value: larger `p` means smaller reciprocal.
    fn cmp(&self, other: &Self) -> Ordering {
        other.recip.total_cmp(&self.recip)
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Exponent({})", self)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.p())
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.p())
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(p) => Exponent::new(p).map_err(D::Error::custom),
            Raw::Text(s) => Exponent::parse(&s).map_err(D::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_examples() {
        let p = Exponent::new(1.5).unwrap();
        assert!((p.dual().p() - 3.0).abs() < 1e-12);
        assert!((p.dual().recip() - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(Exponent::INFINITY.dual(), Exponent::ONE);
        assert_eq!(Exponent::TWO.dual(), Exponent::TWO);
    }

    #[test]
    fn dual_is_exact_involution_on_grid() {
        for k in 0..1000 {
            let r = k as f64 / 999.0;
            let e = Exponent::from_recip(r).unwrap();
            let back = e.dual().dual();
            assert_eq!(back.recip(), e.recip(), "recip {r}");
            assert_eq!(back.dual().recip(), e.dual().recip(), "dual recip {r}");
        }
    }

    #[test]
    fn lambda_examples() {
        let l = solve_lambda(Exponent::TWO, Exponent::INFINITY, Exponent::new(4.0).unwrap())
            .unwrap();
        assert!((l - 0.5).abs() < 1e-15);
        let l0 = solve_lambda(Exponent::TWO, Exponent::INFINITY, Exponent::TWO).unwrap();
        assert_eq!(l0, 0.0);
        let l =
            solve_lambda(Exponent::new(1.5).unwrap(), Exponent::new(4.0).unwrap(), Exponent::TWO)
                .unwrap();
        // 1/2 = (1-λ)(2/3) + λ/4 has λ = 2/5.
        assert!((l - 0.4).abs() < 1e-12);
        let back = (1.0 - l) * (2.0 / 3.0) + l * 0.25;
        assert!((back - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lambda_rejects_bad_inputs() {
        assert_eq!(
            solve_lambda(Exponent::TWO, Exponent::TWO, Exponent::TWO),
            Err(ExponentError::DegeneratePair)
        );
        let err = solve_lambda(Exponent::TWO, Exponent::new(4.0).unwrap(), Exponent::new(8.0).unwrap());
        assert!(matches!(err, Err(ExponentError::TargetOutsideRange(_))));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(Exponent::parse("inf").unwrap(), Exponent::INFINITY);
        assert_eq!(Exponent::parse("2").unwrap(), Exponent::TWO);
        assert_eq!(Exponent::parse("3/2").unwrap().recip(), 2.0 / 3.0);
        assert!(Exponent::parse("1/2").is_err());
        assert!(Exponent::parse("0.5").is_err());
        assert!(Exponent::parse("x").is_err());
    }

    #[test]
    fn ordering_is_by_p() {
        let mut v = vec![
            Exponent::INFINITY,
            Exponent::ONE,
            Exponent::TWO,
            Exponent::new(1.5).unwrap(),
        ];
        v.sort();
        let ps: Vec<f64> = v.iter().map(|e| e.p()).collect();
        assert_eq!(ps[0], 1.0);
        assert_eq!(ps[1], 1.5);
        assert_eq!(ps[2], 2.0);
        assert!(ps[3].is_infinite());
    }
}
