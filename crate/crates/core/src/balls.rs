//! Intersections of scaled `l_p` balls: validation, canonicalization, and
//! classification into the regimes where the closed-form estimates apply.
//!
//! A set is canonical when the exponents are strictly increasing and no ball
//! of the family contains another one; redundant (containing) balls can be
//! deleted without changing the intersection. Canonical families satisfy the
//! two monotone chains `ν_1 ≥ … ≥ ν_r` and
//! `ν_1 N^{-1/p_1} ≤ … ≤ ν_r N^{-1/p_r}`.

use crate::exponents::Exponent;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension must be at least 1")]
    ZeroDim,
    #[error("a ball intersection needs at least one ball")]
    NoBalls,
    #[error("ball radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("subspace dimension n = {n} exceeds ambient dimension N = {dim}")]
    BadCodim { n: usize, dim: usize },
    #[error("vector has length {got}, expected {want}")]
    DimMismatch { got: usize, want: usize },
}

/// One scaled ball `ν · B_p^N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub p: Exponent,
    /// The radius ν > 0.
    #[serde(rename = "nu")]
    pub radius: f64,
}

impl Ball {
    pub fn new(p: Exponent, radius: f64) -> Result<Self, ModelError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(ModelError::BadRadius(radius));
        }
        Ok(Ball { p, radius })
    }
}

/// Exact inclusion test `inner ⊆ outer` in `R^dim`.
///
/// The supremum of the outer `l_p` norm over the inner ball is
/// `ν_in · N^{max(0, 1/p_out - 1/p_in)}`, so inclusion holds iff that value
/// is at most `ν_out`.
pub fn contains_ball(inner: Ball, outer: Ball, dim: usize) -> bool {
    debug_assert!(dim >= 1);
    let gap = (outer.p.recip() - inner.p.recip()).max(0.0);
    inner.radius * (dim as f64).powf(gap) <= outer.radius
}

/// Strict containment: the deletion criterion of canonicalization. Deleting
/// only on strict containment is exactly enforcing the two radius chains;
/// boundary cases (touching balls) satisfy the chains and are kept, which
/// the regime hypotheses rely on.
fn strictly_contains(inner: Ball, outer: Ball, dim: usize) -> bool {
    let gap = (outer.p.recip() - inner.p.recip()).max(0.0);
    inner.radius * (dim as f64).powf(gap) < outer.radius
}

/// The set `∩_j ν_j B_{p_j}^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallIntersection {
    #[serde(rename = "N")]
    dim: usize,
    balls: Vec<Ball>,
}

impl BallIntersection {
    pub fn new(dim: usize, balls: Vec<Ball>) -> Result<Self, ModelError> {
        if dim == 0 {
            return Err(ModelError::ZeroDim);
        }
        if balls.is_empty() {
            return Err(ModelError::NoBalls);
        }
        for b in &balls {
            Ball::new(b.p, b.radius)?;
        }
        Ok(BallIntersection { dim, balls })
    }

    /// Convenience constructor for a single ball `ν B_p^N`.
    pub fn single(dim: usize, p: Exponent, radius: f64) -> Result<Self, ModelError> {
        Self::new(dim, vec![Ball::new(p, radius)?])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.balls.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    /// Sorts by exponent, merges duplicates (keeping the smaller radius), and
    /// deletes every ball that strictly contains another ball of the family.
    /// The represented set is unchanged, and the result satisfies both radius
    /// chains.
    pub fn canonicalize(&self) -> BallIntersection {
        let mut balls = self.balls.clone();
        balls.sort_by(|a, b| a.p.cmp(&b.p).then(a.radius.total_cmp(&b.radius)));
        balls.dedup_by(|b, a| a.p == b.p);
        loop {
            let mut removed = None;
            'scan: for i in 0..balls.len() {
                for j in 0..balls.len() {
                    if i != j && strictly_contains(balls[i], balls[j], self.dim) {
                        removed = Some(j);
                        break 'scan;
                    }
                }
            }
            match removed {
                Some(j) => {
                    balls.remove(j);
                }
                None => break,
            }
        }
        BallIntersection { dim: self.dim, balls }
    }

    /// True when exponents are strictly increasing and both radius chains
    /// hold: `ν_1 ≥ … ≥ ν_r` and `ν_1 N^{-1/p_1} ≤ … ≤ ν_r N^{-1/p_r}`.
    pub fn is_canonical(&self) -> bool {
        let b = &self.balls;
        let dim = self.dim as f64;
        for w in b.windows(2) {
            if w[1].p <= w[0].p {
                return false;
            }
            if w[0].radius < w[1].radius {
                return false;
            }
            if w[0].radius * dim.powf(-w[0].p.recip()) > w[1].radius * dim.powf(-w[1].p.recip()) {
                return false;
            }
        }
        true
    }

    /// Membership test with 1e-12 relative tolerance per ball.
    pub fn membership(&self, x: &[f64]) -> Result<bool, ModelError> {
        if x.len() != self.dim {
            return Err(ModelError::DimMismatch { got: x.len(), want: self.dim });
        }
        Ok(self
            .balls
            .iter()
            .all(|b| crate::norms::lp_norm(x, b.p) <= b.radius * (1.0 + 1e-12)))
    }
}

/// Which width of which set in which target space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WidthKind {
    Gelfand,
    Kolmogorov,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthQuery {
    pub set: BallIntersection,
    pub n: usize,
    pub q: Exponent,
    pub kind: WidthKind,
}

impl WidthQuery {
    pub fn new(
        set: BallIntersection,
        n: usize,
        q: Exponent,
        kind: WidthKind,
    ) -> Result<Self, ModelError> {
        if n > set.dim() {
            return Err(ModelError::BadCodim { n, dim: set.dim() });
        }
        Ok(WidthQuery { set, n, q, kind })
    }
}

/// Tunable absolute constants left unspecified by the estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    /// The constant `a_0` in the two-ball `l_2` regime ranges.
    pub a0: f64,
}

impl Default for RegimeParams {
    fn default() -> Self {
        RegimeParams { a0: 0.01 }
    }
}

/// Which closed-form regimes apply to a query. Advisory: the estimates carry
/// unspecified absolute constants, so boundary `n` values are a judgment
/// call; the flags use the exact cutoffs `n ≤ N/2`, `n ≤ N/4`, and `a_0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeFlags {
    pub thm1: bool,
    pub thm2: bool,
    pub thm3_part1: bool,
    pub thm3_part2: bool,
    pub thm4_regime1: bool,
    pub thm4_regime2: bool,
    pub single_ball: bool,
}

impl RegimeFlags {
    pub fn names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.thm1 {
            out.push("THM1");
        }
        if self.thm2 {
            out.push("THM2");
        }
        if self.thm3_part1 {
            out.push("THM3_PART1");
        }
        if self.thm3_part2 {
            out.push("THM3_PART2");
        }
        if self.thm4_regime1 {
            out.push("THM4_REGIME1");
        }
        if self.thm4_regime2 {
            out.push("THM4_REGIME2");
        }
        if self.single_ball {
            out.push("THMB_SINGLE");
        }
        out
    }
}

/// Checks the hypothesis list of every closed-form estimate against a
/// canonicalized query.
pub fn classify_regimes(query: &WidthQuery, params: &RegimeParams) -> RegimeFlags {
    debug_assert!(query.set.is_canonical(), "classify_regimes expects a canonical set");
    let set = &query.set;
    let balls = set.balls();
    let dim = set.dim() as f64;
    let n = query.n;
    let q = query.q;
    let r = balls.len();
    let p_first = balls[0].p;
    let p_last = balls[r - 1].p;

    let q_ge_2 = q.recip() <= 0.5;
    let all_p_le_q = balls.iter().all(|b| b.p <= q);
    let all_p_ge_2 = balls.iter().all(|b| b.p.recip() <= 0.5);
    let all_p_gt_1 = balls.iter().all(|b| !b.p.is_one());
    let half_n = 2 * n <= set.dim();
    let quarter_n = 4 * n <= set.dim();

    let mut flags = RegimeFlags::default();

    flags.thm1 =
        q_ge_2 && all_p_gt_1 && all_p_le_q && p_first.recip() > 0.5 && half_n;

    flags.thm2 = q_ge_2 && all_p_ge_2 && p_first < q && q < p_last && quarter_n;

    flags.thm3_part1 = q_ge_2 && all_p_gt_1 && all_p_le_q && half_n;
    flags.thm3_part2 = q_ge_2 && all_p_ge_2 && quarter_n;

    if r == 2 && q == Exponent::TWO {
        let (b1, b2) = (balls[0], balls[1]);
        let shape_ok = b1.p.recip() > 0.5
            && !b1.p.is_one()
            && b2.p.recip() < 0.5
            && b1.radius >= b2.radius;
        if shape_ok {
            let ratio = b1.radius / b2.radius;
            let boundary = dim.powf(b1.p.recip() - 0.5);
            if ratio <= boundary {
                flags.thm4_regime1 = (n as f64) <= params.a0 * dim;
            } else {
                let lambda = crate::exponents::solve_lambda(b1.p, b2.p, Exponent::TWO)
                    .expect("p1 < 2 < p2 brackets q = 2");
                flags.thm4_regime2 =
                    (n as f64) <= params.a0 * ratio.powf(2.0 * lambda - 2.0) * dim;
            }
        }
    }

    flags.single_ball = r == 1 && q_ge_2 && !p_first.is_one() && half_n;

    flags
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(p: f64, nu: f64) -> Ball {
        Ball::new(Exponent::new(p).unwrap(), nu).unwrap()
    }

    #[test]
    fn contains_examples() {
        // B_1 ⊆ B_2 for any dimension.
        assert!(contains_ball(ball(1.0, 1.0), ball(2.0, 1.0), 7));
        // sup of the l1 norm over B_2^4 is 2, attained at the all-ones direction.
        assert!(contains_ball(ball(2.0, 1.0), ball(1.0, 2.0), 4));
        assert!(!contains_ball(ball(2.0, 1.0), ball(1.0, 1.9), 4));
    }

    #[test]
    fn canonicalize_examples() {
        let single = BallIntersection::new(4, vec![ball(2.0, 1.0)]).unwrap();
        assert_eq!(single.canonicalize(), single);

        let redundant =
            BallIntersection::new(4, vec![ball(1.0, 1.0), ball(2.0, 1.1)]).unwrap();
        let canon = redundant.canonicalize();
        assert_eq!(canon.balls().len(), 1);
        assert_eq!(canon.balls()[0].p.p(), 1.0);

        // Touching balls satisfy both chains and are kept.
        let boundary =
            BallIntersection::new(4, vec![ball(1.0, 1.0), ball(2.0, 1.0)]).unwrap();
        assert_eq!(boundary.canonicalize().balls().len(), 2);
        assert!(boundary.is_canonical());

        let kept =
            BallIntersection::new(4, vec![ball(2.0, 1.0), ball(1.0, 1.9)]).unwrap();
        let canon = kept.canonicalize();
        assert_eq!(canon.balls().len(), 2);
        assert_eq!(canon.balls()[0].p.p(), 1.0);
        assert!(canon.is_canonical());
    }

    #[test]
    fn canonical_chains_hold() {
        let set = BallIntersection::new(
            16,
            vec![ball(1.5, 2.0), ball(2.0, 1.4), ball(4.0, 1.3), ball(3.0, 10.0)],
        )
        .unwrap()
        .canonicalize();
        let b = set.balls();
        let dim = set.dim() as f64;
        for w in b.windows(2) {
            assert!(w[0].radius >= w[1].radius);
            assert!(
                w[0].radius * dim.powf(-w[0].p.recip())
                    <= w[1].radius * dim.powf(-w[1].p.recip())
            );
        }
    }

    #[test]
    fn equal_p_merges_to_smaller_radius() {
        let set =
            BallIntersection::new(8, vec![ball(2.0, 3.0), ball(2.0, 1.0)]).unwrap().canonicalize();
        assert_eq!(set.balls().len(), 1);
        assert_eq!(set.balls()[0].radius, 1.0);
    }

    #[test]
    fn membership_examples() {
        let set = BallIntersection::new(
            2,
            vec![ball(1.0, 1.0), Ball::new(Exponent::INFINITY, 0.5).unwrap()],
        )
        .unwrap();
        assert!(set.membership(&[0.0, 0.0]).unwrap());
        assert!(set.membership(&[0.5, 0.5]).unwrap());
        assert!(!set.membership(&[0.6, 0.4]).unwrap());
        assert!(set.membership(&[0.0]).is_err());
    }

    #[test]
    fn classify_examples() {
        let params = RegimeParams::default();
        let set =
            BallIntersection::new(100, vec![ball(1.5, 1.0), ball(2.0, 1.0)]).unwrap().canonicalize();
        let query = WidthQuery::new(set, 25, Exponent::TWO, WidthKind::Gelfand).unwrap();
        let flags = classify_regimes(&query, &params);
        assert!(flags.thm1 && flags.thm3_part1);
        assert!(!flags.thm2 && !flags.thm3_part2 && !flags.single_ball);

        let set = BallIntersection::new(
            16,
            vec![ball(2.0, 1.0), Ball::new(Exponent::INFINITY, 0.5).unwrap()],
        )
        .unwrap()
        .canonicalize();
        let query =
            WidthQuery::new(set, 4, Exponent::new(4.0).unwrap(), WidthKind::Gelfand).unwrap();
        let flags = classify_regimes(&query, &params);
        assert!(flags.thm2 && flags.thm3_part2);
        assert!(!flags.thm1 && !flags.thm3_part1);

        let single = BallIntersection::single(10, Exponent::new(3.0).unwrap(), 1.0).unwrap();
        let query = WidthQuery::new(single, 2, Exponent::TWO, WidthKind::Gelfand).unwrap();
        assert!(classify_regimes(&query, &params).single_ball);
    }
}
