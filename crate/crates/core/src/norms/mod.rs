//! Every norm the bound machinery manipulates: `l_p` norms, the intersection
//! norm `‖x‖_X = max_j ν_j^{-1} ‖x‖_{p_j}`, its dual norm (the support
//! function of the intersection, see [`dual`]), supporting functionals, and
//! closed-form embedding operator norms.

use crate::balls::BallIntersection;
use crate::exponents::Exponent;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod dual;

pub use dual::{dual_norm, dual_norm_value, DualNormOptions, DualNormResult, DualSolver};

/// Absolute constant `c` in the quadratic norm lower bound
/// `‖x+h‖² ≥ ‖x‖²/2 + 2‖x‖·f_x(h) + c‖h‖²`, valid in every normed space for
/// every supporting functional `f_x`.
///
/// The value comes from splitting on `‖h‖ ≤ t‖x‖` versus `‖h‖ ≥ t‖x‖`: the
/// small branch yields `1/(2t²)` and the threshold `t = 10` closes the large
/// branch, so `c = min(1/200, 1/4) = 1/200`. Certified lower bounds depend on
/// this constant; it is defined only here.
pub const QUAD_LOWER_C: f64 = 1.0 / 200.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("vector has length {got}, expected {want}")]
    DimMismatch { got: usize, want: usize },
    #[error("norm scale must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("spike index s = {s} outside 1..={dim}")]
    BadSpike { s: usize, dim: usize },
    #[error("no closed form for this embedding pair: {0}")]
    UnsupportedPair(String),
    #[error("support functional self-check failed: {0}")]
    SupportAssertion(String),
}

/// A norm on `R^dim`: either a scaled `l_p` norm `‖x‖_p / scale` (unit ball
/// `scale · B_p`) or the intersection norm of a ball family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NormSpec {
    Lp { dim: usize, p: Exponent, scale: f64 },
    Intersection(BallIntersection),
}

impl NormSpec {
    pub fn lp(dim: usize, p: Exponent, scale: f64) -> Result<Self, NormError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(NormError::BadScale(scale));
        }
        Ok(NormSpec::Lp { dim, p, scale })
    }

    pub fn unit_lp(dim: usize, p: Exponent) -> Self {
        NormSpec::Lp { dim, p, scale: 1.0 }
    }

    pub fn dim(&self) -> usize {
        match self {
            NormSpec::Lp { dim, .. } => *dim,
            NormSpec::Intersection(set) => set.dim(),
        }
    }
}

/// Plain `l_p` norm, `max |x_i|` for `p = ∞`.
pub fn lp_norm(x: &[f64], p: Exponent) -> f64 {
    if p.is_infinite() {
        return x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    let pv = p.p();
    if pv == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    if pv == 2.0 {
        return x.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    // Scale by the max entry so large exponents neither overflow nor flush.
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let sum: f64 = x.iter().map(|v| (v.abs() / m).powf(pv)).sum();
    m * sum.powf(1.0 / pv)
}

/// Evaluates a [`NormSpec`] norm.
pub fn norm(x: &[f64], spec: &NormSpec) -> Result<f64, NormError> {
    if x.len() != spec.dim() {
        return Err(NormError::DimMismatch { got: x.len(), want: spec.dim() });
    }
    Ok(match spec {
        NormSpec::Lp { p, scale, .. } => lp_norm(x, *p) / scale,
        NormSpec::Intersection(set) => intersection_norm(x, set),
    })
}

/// `max_j ν_j^{-1} ‖x‖_{p_j}`, the norm whose unit ball is the intersection.
pub fn intersection_norm(x: &[f64], set: &BallIntersection) -> f64 {
    set.balls().iter().fold(0.0f64, |m, b| m.max(lp_norm(x, b.p) / b.radius))
}

/// The unit-`l_t` vector maximizing `⟨z, ·⟩`, i.e. the norming element with
/// `‖y‖_t = 1` and `⟨z, y⟩ = ‖z‖_{t'}`. Ties for `t ∈ {1, ∞}` resolve to the
/// lowest index. Returns zeros when `z = 0`.
pub fn lp_unit_maximizer(z: &[f64], t: Exponent) -> Vec<f64> {
    let mut y = vec![0.0; z.len()];
    if z.iter().all(|v| *v == 0.0) {
        return y;
    }
    if t.is_one() {
        let mut best = 0;
        for (i, v) in z.iter().enumerate() {
            if v.abs() > z[best].abs() {
                best = i;
            }
        }
        y[best] = z[best].signum();
        return y;
    }
    if t.is_infinite() {
        for (i, v) in z.iter().enumerate() {
            if *v != 0.0 {
                y[i] = v.signum();
            }
        }
        return y;
    }
    let tv = t.p();
    let dual_exp = tv / (tv - 1.0); // t'
    let zn = lp_norm(z, t.dual());
    for (i, v) in z.iter().enumerate() {
        if *v != 0.0 {
            y[i] = v.signum() * (v.abs() / zn).powf(dual_exp - 1.0);
        }
    }
    y
}

/// A supporting functional `f` at `x`: `‖f‖_* = 1` and `f(x) = ‖x‖`. For the
/// nonsmooth cases (`p ∈ {1, ∞}`, intersection norms) the subgradient choice
/// is deterministic: lowest-index maximizer.
pub fn supporting_functional(x: &[f64], spec: &NormSpec) -> Result<Vec<f64>, NormError> {
    if x.len() != spec.dim() {
        return Err(NormError::DimMismatch { got: x.len(), want: spec.dim() });
    }
    Ok(match spec {
        NormSpec::Lp { p, scale, .. } => {
            let mut f = lp_unit_maximizer(x, p.dual());
            for v in &mut f {
                *v /= scale;
            }
            f
        }
        NormSpec::Intersection(set) => {
            let balls = set.balls();
            let mut best = 0;
            let mut best_val = f64::NEG_INFINITY;
            for (j, b) in balls.iter().enumerate() {
                let v = lp_norm(x, b.p) / b.radius;
                if v > best_val {
                    best_val = v;
                    best = j;
                }
            }
            let b = balls[best];
            let mut f = lp_unit_maximizer(x, b.p.dual());
            for v in &mut f {
                *v /= b.radius;
            }
            f
        }
    })
}

/// The spike vector with first `s` coordinates `s^{-1/q'}` and zeros after;
/// its `l_{q'}` norm is 1.
pub fn support_vector(s: usize, q: Exponent, dim: usize) -> Result<Vec<f64>, NormError> {
    if s == 0 || s > dim {
        return Err(NormError::BadSpike { s, dim });
    }
    let height = (s as f64).powf(-q.dual().recip());
    let mut x = vec![0.0; dim];
    for v in x.iter_mut().take(s) {
        *v = height;
    }
    Ok(x)
}

/// Dual (support-function) norm of an `s`-spike: `min_j ν_j s^{1/q - 1/p_j}`.
///
/// For a vector with `s` equal coordinates the support function of the
/// intersection is the smallest of the per-ball Hölder bounds, attained by a
/// constant vector on the same support.
pub fn spike_dual_norm(s: usize, q: Exponent, set: &BallIntersection) -> f64 {
    let sf = s as f64;
    set.balls()
        .iter()
        .map(|b| b.radius * sf.powf(q.recip() - b.p.recip()))
        .fold(f64::INFINITY, f64::min)
}

/// Coefficients of the supporting functional at the `s`-spike in the dual
/// intersection norm: `A s^{-1/q}` on the first `s` coordinates, where `A` is
/// [`spike_dual_norm`]. Self-checks `⟨b, x̂⟩ = ‖x̂‖_*` and `‖b‖_X = 1` to
/// 1e-9; failures indicate an implementation bug and surface as errors.
pub fn supporting_functional_coeffs(
    s: usize,
    q: Exponent,
    set: &BallIntersection,
) -> Result<Vec<f64>, NormError> {
    let dim = set.dim();
    let xhat = support_vector(s, q, dim)?;
    let a = spike_dual_norm(s, q, set);
    let t = a * (s as f64).powf(-q.recip());
    let mut b = vec![0.0; dim];
    for v in b.iter_mut().take(s) {
        *v = t;
    }

    let pairing: f64 = b.iter().zip(&xhat).map(|(u, v)| u * v).sum();
    let dual = dual_norm_value(&xhat, set);
    if (pairing - dual).abs() > 1e-9 * a.max(1.0) {
        return Err(NormError::SupportAssertion(format!(
            "pairing {pairing} vs dual norm {dual} at s = {s}"
        )));
    }
    let bn = intersection_norm(&b, set);
    if (bn - 1.0).abs() > 1e-9 {
        return Err(NormError::SupportAssertion(format!(
            "coefficient vector has intersection norm {bn}, expected 1"
        )));
    }
    Ok(b)
}

/// Operator norm of the identity between two norms, in closed form.
///
/// Supported pairs: `l_p → l_q` (value `(s_from/s_to) · N^{max(0, 1/q-1/p)}`)
/// and `l_2 →` intersection (value `s_from · max_j ν_j^{-1} N^{max(0, 1/p_j - 1/2)}`).
pub fn embedding_norm(from: &NormSpec, to: &NormSpec) -> Result<f64, NormError> {
    if from.dim() != to.dim() {
        return Err(NormError::DimMismatch { got: to.dim(), want: from.dim() });
    }
    let dim = from.dim() as f64;
    match (from, to) {
        (NormSpec::Lp { p, scale: sf, .. }, NormSpec::Lp { p: q, scale: st, .. }) => {
            Ok(sf / st * dim.powf((q.recip() - p.recip()).max(0.0)))
        }
        (NormSpec::Lp { p, scale: sf, .. }, NormSpec::Intersection(set))
            if *p == Exponent::TWO =>
        {
            let worst = set
                .balls()
                .iter()
                .map(|b| dim.powf((b.p.recip() - 0.5).max(0.0)) / b.radius)
                .fold(0.0f64, f64::max);
            Ok(sf * worst)
        }
        _ => Err(NormError::UnsupportedPair(format!("{from:?} -> {to:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balls::Ball;

    fn set_l1_linf_half() -> BallIntersection {
        BallIntersection::new(
            2,
            vec![
                Ball::new(Exponent::ONE, 1.0).unwrap(),
                Ball::new(Exponent::INFINITY, 0.5).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn norm_examples() {
        let e1 = [1.0, 0.0, 0.0, 0.0];
        for p in [1.0, 1.5, 2.0, 7.0] {
            let spec = NormSpec::unit_lp(4, Exponent::new(p).unwrap());
            assert_eq!(norm(&e1, &spec).unwrap(), 1.0);
        }
        let ones = [1.0, 1.0, 1.0, 1.0];
        assert_eq!(norm(&ones, &NormSpec::unit_lp(4, Exponent::TWO)).unwrap(), 2.0);

        let x = [1.0, 1.0];
        let spec = NormSpec::Intersection(set_l1_linf_half());
        assert_eq!(norm(&x, &spec).unwrap(), 2.0);
    }

    #[test]
    fn norm_zero_iff_zero() {
        let spec = NormSpec::unit_lp(3, Exponent::new(3.0).unwrap());
        assert_eq!(norm(&[0.0, 0.0, 0.0], &spec).unwrap(), 0.0);
        assert!(norm(&[0.0, 1e-300, 0.0], &spec).unwrap() > 0.0);
    }

    #[test]
    fn support_vector_examples() {
        let x = support_vector(1, Exponent::TWO, 4).unwrap();
        assert_eq!(x, vec![1.0, 0.0, 0.0, 0.0]);
        let x = support_vector(4, Exponent::TWO, 6).unwrap();
        assert_eq!(&x[..4], &[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(lp_norm(&x, Exponent::TWO), 1.0);
        let x = support_vector(5, Exponent::INFINITY, 5).unwrap();
        assert!(x.iter().all(|v| (*v - 0.2).abs() < 1e-15));
        assert!(support_vector(0, Exponent::TWO, 4).is_err());
        assert!(support_vector(5, Exponent::TWO, 4).is_err());
    }

    #[test]
    fn supporting_functional_attains_norm() {
        let specs = vec![
            NormSpec::unit_lp(4, Exponent::ONE),
            NormSpec::unit_lp(4, Exponent::new(1.5).unwrap()),
            NormSpec::unit_lp(4, Exponent::TWO),
            NormSpec::unit_lp(4, Exponent::new(3.0).unwrap()),
            NormSpec::unit_lp(4, Exponent::INFINITY),
            NormSpec::Lp { dim: 4, p: Exponent::TWO, scale: 2.5 },
        ];
        let x = [0.3, -1.2, 0.0, 0.7];
        for spec in &specs {
            let f = supporting_functional(&x, spec).unwrap();
            let fx: f64 = f.iter().zip(&x).map(|(a, b)| a * b).sum();
            let nx = norm(&x, spec).unwrap();
            assert!((fx - nx).abs() < 1e-12, "{spec:?}");
        }
    }

    #[test]
    fn supporting_functional_coeffs_examples() {
        let single = BallIntersection::single(6, Exponent::TWO, 1.0).unwrap();
        let b = supporting_functional_coeffs(1, Exponent::TWO, &single).unwrap();
        assert_eq!(b, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let b = supporting_functional_coeffs(4, Exponent::TWO, &single).unwrap();
        assert_eq!(&b[..4], &[0.5, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn embedding_examples() {
        let l2 = NormSpec::unit_lp(4, Exponent::TWO);
        let l1 = NormSpec::unit_lp(4, Exponent::ONE);
        assert_eq!(embedding_norm(&l2, &l1).unwrap(), 2.0);
        // Monotonicity of lp norms: p <= q embeds with norm 1.
        let p = NormSpec::unit_lp(9, Exponent::new(1.5).unwrap());
        let q = NormSpec::unit_lp(9, Exponent::new(4.0).unwrap());
        assert_eq!(embedding_norm(&p, &q).unwrap(), 1.0);

        let set = BallIntersection::new(
            16,
            vec![
                Ball::new(Exponent::new(1.5).unwrap(), 2.0).unwrap(),
                Ball::new(Exponent::new(3.0).unwrap(), 1.0).unwrap(),
            ],
        )
        .unwrap();
        let got = embedding_norm(&NormSpec::unit_lp(16, Exponent::TWO), &NormSpec::Intersection(set))
            .unwrap();
        let want = (16.0f64.powf(1.0 / 1.5 - 0.5) / 2.0).max(1.0);
        assert_eq!(got, want);

        let bad = embedding_norm(&p, &NormSpec::Intersection(set_l1_linf_half()));
        assert!(bad.is_err());
    }
}
