//! Width decay exponents for intersections of Sobolev classes on a John
//! domain: the rate `θ` in `d^n(M, L_q) ≍ n^{-θ}` across the five parameter
//! cases, in exact rational arithmetic.
//!
//! Everything downstream of validation is affine in the reciprocals
//! `1/p_j`, `1/q` and the ratios `r_j/d`, so instances store rational
//! reciprocals and all case formulas evaluate exactly. Inputs that arrive as
//! floating point are converted exactly (binary floats are rationals) but
//! are marked inexact, and the equal-rates tie check then uses a 1e-12
//! tolerance instead of exact equality.
//!
//! Instances that fail the entry conditions are rejected with the named
//! violated condition; the reduction of general parameter lists to the
//! canonical form is intentionally not performed here.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::fmt;
use thiserror::Error;

/// Rational reciprocal of an exponent: `0` encodes `p = ∞`.
pub type Recip = BigRational;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// One smoothness layer `W^{r}_{p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolevLayer {
    /// Smoothness order `r ≥ 0`.
    pub smoothness: u32,
    /// Reciprocal `1/p ∈ [0, 1)`; the exponent must satisfy `p > 1`.
    pub p_recip: Recip,
}

impl SobolevLayer {
    pub fn new(smoothness: u32, p_recip: Recip) -> Self {
        SobolevLayer { smoothness, p_recip }
    }

    /// Layer with `p` given as the fraction `p_num/p_den`.
    pub fn from_fraction(smoothness: u32, p_num: i64, p_den: i64) -> Self {
        SobolevLayer { smoothness, p_recip: ratio(p_den, p_num) }
    }
}

/// The instance `(d, q, (r_j, p_j)_j)` for the exponent calculator.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolevInstance {
    /// Space dimension `d ≥ 1`.
    pub dim: u32,
    /// Reciprocal `1/q ∈ (0, 1]` (`1 ≤ q < ∞`).
    pub q_recip: Recip,
    /// Layers ordered by decreasing smoothness.
    pub layers: Vec<SobolevLayer>,
    /// Whether inputs were exact rationals (fractions/integers) rather than
    /// converted floats; governs the tie check.
    pub exact: bool,
}

impl SobolevInstance {
    pub fn new(dim: u32, q_recip: Recip, layers: Vec<SobolevLayer>) -> Self {
        SobolevInstance { dim, q_recip, layers, exact: true }
    }

    /// Builds an instance from floating-point exponents (converted exactly,
    /// marked inexact).
    pub fn from_floats(dim: u32, q: f64, layers: &[(u32, f64)]) -> Option<Self> {
        let q_recip = BigRational::from_f64(1.0)? / BigRational::from_f64(q)?;
        let layers = layers
            .iter()
            .map(|(r, p)| {
                let p_recip = if p.is_infinite() {
                    Some(BigRational::zero())
                } else {
                    Some(BigRational::from_f64(1.0)? / BigRational::from_f64(*p)?)
                };
                p_recip.map(|pr| SobolevLayer::new(*r, pr))
            })
            .collect::<Option<Vec<_>>>()?;
        Some(SobolevInstance { dim, q_recip, layers, exact: false })
    }

    fn r_over_d(&self, j: usize) -> BigRational {
        ratio(self.layers[j].smoothness as i64, self.dim as i64)
    }
}

/// A violated entry condition, named after what it checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// Needs at least two layers.
    TooFewLayers,
    /// `d ≥ 1`.
    ZeroDim,
    /// `1 ≤ q < ∞`.
    QOutOfRange,
    /// Some `p_j ≤ 1`.
    PNotAboveOne { layer: usize },
    /// Smoothness orders must strictly decrease.
    SmoothnessNotDecreasing { layer: usize },
    /// `r_j/d - 1/p_j` must strictly increase along the layers.
    DifferenceNotIncreasing { layer: usize },
    /// `r_s/d + 1/q - 1/p_s > 0` fails.
    CompactnessFails,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewLayers => write!(f, "needs at least two layers"),
            Violation::ZeroDim => write!(f, "dimension must be at least 1"),
            Violation::QOutOfRange => write!(f, "q must satisfy 1 <= q < inf"),
            Violation::PNotAboveOne { layer } => write!(f, "layer {layer}: p must exceed 1"),
            Violation::SmoothnessNotDecreasing { layer } => {
                write!(f, "layer {layer}: smoothness orders must strictly decrease")
            }
            Violation::DifferenceNotIncreasing { layer } => {
                write!(f, "layer {layer}: r_j/d - 1/p_j must strictly increase")
            }
            Violation::CompactnessFails => {
                write!(f, "r_s/d + 1/q - 1/p_s must be positive")
            }
        }
    }
}

/// Checks every entry condition; empty means valid.
pub fn validate(inst: &SobolevInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    if inst.dim == 0 {
        out.push(Violation::ZeroDim);
        return out;
    }
    if inst.layers.len() < 2 {
        out.push(Violation::TooFewLayers);
    }
    if inst.q_recip <= BigRational::zero() || inst.q_recip > BigRational::one() {
        out.push(Violation::QOutOfRange);
    }
    for (j, layer) in inst.layers.iter().enumerate() {
        if layer.p_recip >= BigRational::one() || layer.p_recip.is_negative() {
            out.push(Violation::PNotAboveOne { layer: j });
        }
    }
    for j in 1..inst.layers.len() {
        if inst.layers[j].smoothness >= inst.layers[j - 1].smoothness {
            out.push(Violation::SmoothnessNotDecreasing { layer: j });
        }
    }
    if out.iter().any(|v| matches!(v, Violation::PNotAboveOne { .. })) {
        return out;
    }
    for j in 1..inst.layers.len() {
        let prev = inst.r_over_d(j - 1) - &inst.layers[j - 1].p_recip;
        let here = inst.r_over_d(j) - &inst.layers[j].p_recip;
        if prev >= here {
            out.push(Violation::DifferenceNotIncreasing { layer: j });
        }
    }
    if let Some(last) = inst.layers.last() {
        let margin = inst.r_over_d(inst.layers.len() - 1) + &inst.q_recip - &last.p_recip;
        if margin <= BigRational::zero() {
            out.push(Violation::CompactnessFails);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    Case1,
    Case2,
    Case3a,
    Case3b,
    Case4,
    Case5,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseTag::Case1 => "1",
            CaseTag::Case2 => "2",
            CaseTag::Case3a => "3a",
            CaseTag::Case3b => "3b",
            CaseTag::Case4 => "4",
            CaseTag::Case5 => "5",
        };
        write!(f, "{s}")
    }
}

/// The computed decay exponent with its intermediates.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthExponent {
    pub theta: BigRational,
    pub case: CaseTag,
    pub theta1: Option<BigRational>,
    pub theta2: Option<BigRational>,
    pub lambda: Option<BigRational>,
    /// Maximizing `(i, j)` layer pair in case 4.
    pub argmax_pair: Option<(usize, usize)>,
}

impl WidthExponent {
    pub fn theta_f64(&self) -> f64 {
        to_f64(&self.theta)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SobolevError {
    #[error("invalid instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("parameters match none of the five cases")]
    NoCaseMatches,
    #[error("the two candidate rates coincide (theta = {theta}); the estimate requires them distinct")]
    RateTie { theta: String },
}

/// Hypothesis test for each case, independent of the others; used both by
/// the dispatcher and by the exclusivity property test.
pub fn matching_cases(inst: &SobolevInstance) -> Vec<CaseTag> {
    let half = ratio(1, 2);
    let q = &inst.q_recip;
    let s = inst.layers.len();
    let all_p_ge_q = inst.layers.iter().all(|l| l.p_recip <= *q);
    let all_p_le_q = inst.layers.iter().all(|l| l.p_recip >= *q);
    let all_p_ge_2 = inst.layers.iter().all(|l| l.p_recip <= half);
    let q_ge_2 = *q <= half;

    let mut out = Vec::new();
    if all_p_ge_q {
        out.push(CaseTag::Case1);
    }
    if all_p_ge_2 && all_p_le_q {
        out.push(CaseTag::Case2);
    }
    if q_ge_2 && all_p_le_q && inst.layers[0].p_recip > half {
        let gap = inst.r_over_d(0) - inst.r_over_d(s - 1);
        let slack = &half - &inst.layers[s - 1].p_recip;
        if gap <= slack {
            out.push(CaseTag::Case3a);
        } else {
            out.push(CaseTag::Case3b);
        }
    }
    if q_ge_2
        && all_p_ge_2
        && inst.layers.iter().any(|l| l.p_recip < *q)
        && inst.layers.iter().any(|l| l.p_recip > *q)
    {
        out.push(CaseTag::Case4);
    }
    if *q == half && s == 2 {
        let p1 = &inst.layers[0].p_recip;
        let p2 = &inst.layers[1].p_recip;
        if *p1 > half && *p2 < half {
            let gap = inst.r_over_d(0) - inst.r_over_d(1);
            let slack = &half - p2;
            if gap >= slack {
                out.push(CaseTag::Case5);
            }
        }
    }
    out
}

/// Interpolation weight with `1/q = (1-λ)/p_i + λ/p_j`, exact.
fn lambda_exact(p_i: &Recip, p_j: &Recip, q: &Recip) -> BigRational {
    (p_i - q) / (p_i - p_j)
}

fn rates_distinct(inst: &SobolevInstance, t1: &BigRational, t2: &BigRational) -> bool {
    if inst.exact {
        t1 != t2
    } else {
        (to_f64(t1) - to_f64(t2)).abs() > 1e-12
    }
}

/// The decay exponent `θ` with `d^n(M, L_q) ≍ n^{-θ}`.
pub fn width_exponent(inst: &SobolevInstance) -> Result<WidthExponent, SobolevError> {
    let violations = validate(inst);
    if !violations.is_empty() {
        return Err(SobolevError::Invalid(violations));
    }
    let cases = matching_cases(inst);
    debug_assert!(cases.len() <= 1, "case hypotheses overlap: {cases:?}");
    let case = *cases.first().ok_or(SobolevError::NoCaseMatches)?;
    let s = inst.layers.len();
    let q = inst.q_recip.clone();
    let last = s - 1;

    let result = match case {
        CaseTag::Case1 => WidthExponent {
            theta: inst.r_over_d(0),
            case,
            theta1: None,
            theta2: None,
            lambda: None,
            argmax_pair: None,
        },
        CaseTag::Case2 | CaseTag::Case3a => WidthExponent {
            theta: inst.r_over_d(last) + &q - &inst.layers[last].p_recip,
            case,
            theta1: None,
            theta2: None,
            lambda: None,
            argmax_pair: None,
        },
        CaseTag::Case3b => {
            let half = ratio(1, 2);
            let theta1 = inst.r_over_d(0) + &q - &half;
            let p_s_dual = BigRational::one() - &inst.layers[last].p_recip;
            let numer = inst.r_over_d(last) + &q - &inst.layers[last].p_recip;
            let denom =
                ratio(2, 1) * (inst.r_over_d(last) - inst.r_over_d(0) + p_s_dual);
            debug_assert!(denom > BigRational::zero());
            let theta2 = numer / denom;
            if !rates_distinct(inst, &theta1, &theta2) {
                return Err(SobolevError::RateTie { theta: theta1.to_string() });
            }
            let theta = theta1.clone().min(theta2.clone());
            WidthExponent {
                theta,
                case,
                theta1: Some(theta1),
                theta2: Some(theta2),
                lambda: None,
                argmax_pair: None,
            }
        }
        CaseTag::Case4 => {
            let mut best: Option<(BigRational, BigRational, (usize, usize))> = None;
            for (i, li) in inst.layers.iter().enumerate() {
                if li.p_recip <= q {
                    continue; // needs p_i < q
                }
                for (j, lj) in inst.layers.iter().enumerate() {
                    if lj.p_recip >= q {
                        continue; // needs p_j > q
                    }
                    let lambda = lambda_exact(&li.p_recip, &lj.p_recip, &q);
                    let value = (BigRational::one() - &lambda) * inst.r_over_d(i)
                        + lambda.clone() * inst.r_over_d(j);
                    let better = match &best {
                        Some((v, _, _)) => value > *v,
                        None => true,
                    };
                    if better {
                        best = Some((value, lambda, (i, j)));
                    }
                }
            }
            let (theta, lambda, pair) = best.expect("case 4 has a cross pair");
            WidthExponent {
                theta,
                case,
                theta1: None,
                theta2: None,
                lambda: Some(lambda),
                argmax_pair: Some(pair),
            }
        }
        CaseTag::Case5 => {
            let lambda =
                lambda_exact(&inst.layers[0].p_recip, &inst.layers[1].p_recip, &q);
            let r1 = BigRational::from_integer(BigInt::from(inst.layers[0].smoothness));
            let r2 = BigRational::from_integer(BigInt::from(inst.layers[1].smoothness));
            let d = BigRational::from_integer(BigInt::from(inst.dim));
            let theta1 = inst.r_over_d(0);
            let numer = (BigRational::one() - &lambda) * &r1 + lambda.clone() * &r2;
            let denom = ratio(2, 1) * lambda.clone() * (&r2 - &r1) + d;
            debug_assert!(denom > BigRational::zero());
            let theta2 = numer / denom;
            if !rates_distinct(inst, &theta1, &theta2) {
                return Err(SobolevError::RateTie { theta: theta1.to_string() });
            }
            let theta = theta1.clone().min(theta2.clone());
            WidthExponent {
                theta,
                case,
                theta1: Some(theta1),
                theta2: Some(theta2),
                lambda: Some(lambda),
                argmax_pair: None,
            }
        }
    };
    debug_assert!(result.theta > BigRational::zero());
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_case_3b() -> SobolevInstance {
        SobolevInstance::new(
            3,
            ratio(1, 2),
            vec![SobolevLayer::from_fraction(2, 10, 9), SobolevLayer::from_fraction(1, 2, 1)],
        )
    }

    fn worked_case_5() -> SobolevInstance {
        SobolevInstance::new(
            4,
            ratio(1, 2),
            vec![SobolevLayer::from_fraction(3, 3, 2), SobolevLayer::from_fraction(2, 4, 1)],
        )
    }

    #[test]
    fn validation_examples() {
        assert!(validate(&worked_case_3b()).is_empty());

        let mut equal_r = worked_case_3b();
        equal_r.layers[1].smoothness = 2;
        assert!(validate(&equal_r)
            .iter()
            .any(|v| matches!(v, Violation::SmoothnessNotDecreasing { .. })));

        // (2, 3/2), (1, 2) in d = 3 breaks the increasing-difference chain.
        let bad = SobolevInstance::new(
            3,
            ratio(1, 2),
            vec![SobolevLayer::from_fraction(2, 3, 2), SobolevLayer::from_fraction(1, 2, 1)],
        );
        assert!(validate(&bad)
            .iter()
            .any(|v| matches!(v, Violation::DifferenceNotIncreasing { .. })));
    }

    #[test]
    fn worked_instances_exact() {
        let got = width_exponent(&worked_case_3b()).unwrap();
        assert_eq!(got.case, CaseTag::Case3b);
        assert_eq!(got.theta, ratio(2, 3));
        assert_eq!(got.theta1, Some(ratio(2, 3)));
        assert_eq!(got.theta2, Some(ratio(1, 1)));

        let got = width_exponent(&worked_case_5()).unwrap();
        assert_eq!(got.case, CaseTag::Case5);
        assert_eq!(got.theta, ratio(3, 4));
        assert_eq!(got.lambda, Some(ratio(2, 5)));
        assert_eq!(got.theta2, Some(ratio(13, 16)));
    }

    #[test]
    fn case1_read_off() {
        // All p >= q = 1: rate r_1/d = 3/2.
        let inst = SobolevInstance::new(
            2,
            ratio(1, 1),
            vec![SobolevLayer::from_fraction(3, 10, 9), SobolevLayer::from_fraction(2, 4, 1)],
        );
        assert!(validate(&inst).is_empty());
        let got = width_exponent(&inst).unwrap();
        assert_eq!(got.case, CaseTag::Case1);
        assert_eq!(got.theta, ratio(3, 2));
    }

    #[test]
    fn no_case_matches_is_an_error() {
        // q = 3 with p_1 < 2 below q and p_2 above q: outside all cases.
        let inst = SobolevInstance::new(
            3,
            ratio(1, 3),
            vec![SobolevLayer::from_fraction(2, 3, 2), SobolevLayer::from_fraction(1, 4, 1)],
        );
        assert!(validate(&inst).is_empty());
        assert_eq!(width_exponent(&inst), Err(SobolevError::NoCaseMatches));
    }

    #[test]
    fn tie_is_an_error() {
        // Whenever r_1/d + 1/q = 1 both candidate rates in case 3b collapse
        // to 1/2: d = 4, q = 4, layers (3, 10/9), (1, 3).
        let inst = SobolevInstance::new(
            4,
            ratio(1, 4),
            vec![SobolevLayer::from_fraction(3, 10, 9), SobolevLayer::from_fraction(1, 3, 1)],
        );
        assert!(validate(&inst).is_empty());
        assert_eq!(matching_cases(&inst), vec![CaseTag::Case3b]);
        assert!(matches!(width_exponent(&inst), Err(SobolevError::RateTie { .. })));
    }

    #[test]
    fn float_instances_round_trip() {
        let inst = SobolevInstance::from_floats(3, 2.0, &[(2, 10.0 / 9.0), (1, 2.0)]).unwrap();
        assert!(!inst.exact);
        let got = width_exponent(&inst).unwrap();
        assert_eq!(got.case, CaseTag::Case3b);
        // 10/9 through f64 is close but not exactly 10/9; theta still lands
        // within float accuracy of 2/3.
        assert!((got.theta_f64() - 2.0 / 3.0).abs() < 1e-12);
    }
}
