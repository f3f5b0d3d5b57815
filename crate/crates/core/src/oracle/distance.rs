//! Distance from a point to a subspace in the target norm: the inner convex
//! minimization of the width estimator.
//!
//! The minimization runs over subspace coefficients; when the target is a
//! dual intersection norm each norm evaluation itself solves a splitting
//! program, so the pair forms one joint convex solve with warm starts on
//! both levels. Reported values are always the norm of an actual residual,
//! so imperfect optimization biases distances upward, never down.

use super::linalg::{dot, null_vector, Frame};
use crate::balls::BallIntersection;
use crate::exponents::Exponent;
use crate::norms::{self, DualNormOptions, DualSolver};

/// Target norm for distance evaluation.
#[derive(Debug, Clone)]
pub enum TargetNorm {
    Spec(norms::NormSpec),
    /// The dual of an intersection norm (support-function norm).
    DualIntersection(BallIntersection),
}

impl TargetNorm {
    pub fn dim(&self) -> usize {
        match self {
            TargetNorm::Spec(s) => s.dim(),
            TargetNorm::DualIntersection(set) => set.dim(),
        }
    }

    /// Collapses a single-ball dual to the plain `l_{p'}` norm it equals.
    pub fn simplified(self) -> TargetNorm {
        if let TargetNorm::DualIntersection(set) = &self {
            let canon = set.canonicalize();
            if canon.len() == 1 {
                let b = canon.balls()[0];
                return TargetNorm::Spec(norms::NormSpec::Lp {
                    dim: canon.dim(),
                    p: b.p.dual(),
                    scale: 1.0 / b.radius,
                });
            }
            return TargetNorm::DualIntersection(canon);
        }
        self
    }
}

#[derive(Clone)]
enum Kind {
    /// Closed form: orthogonal projection.
    L2 { scale: f64 },
    /// `1 < p < ∞`: smooth descent.
    SmoothLp { p: Exponent, scale: f64 },
    /// `p = ∞`: exact polytope-vertex enumeration at small scale, else a
    /// smoothing continuation.
    Chebyshev { scale: f64 },
    /// `p = 1`: smoothing continuation from above.
    Taxicab { scale: f64 },
    /// Intersection norm target.
    Inter { set: BallIntersection },
    /// Dual intersection norm target; value and subgradient come from the
    /// splitting solver.
    Dual { solver: DualSolver },
}

pub struct DistEval {
    pub value: f64,
    /// Ascent direction for the middle maximization: a norming functional of
    /// the final residual.
    pub functional: Vec<f64>,
}

#[derive(Clone)]
pub struct DistanceSolver {
    dim: usize,
    kind: Kind,
    warm: Vec<f64>,
    step_hint: f64,
}

impl DistanceSolver {
    pub fn new(target: &TargetNorm) -> Self {
        let dim = target.dim();
        let kind = match target.clone().simplified() {
            TargetNorm::Spec(norms::NormSpec::Lp { p, scale, .. }) => {
                if p == Exponent::TWO {
                    Kind::L2 { scale }
                } else if p.is_infinite() {
                    Kind::Chebyshev { scale }
                } else if p.is_one() {
                    Kind::Taxicab { scale }
                } else {
                    Kind::SmoothLp { p, scale }
                }
            }
            TargetNorm::Spec(norms::NormSpec::Intersection(set)) => Kind::Inter { set },
            TargetNorm::DualIntersection(set) => Kind::Dual {
                solver: DualSolver::with_options(
                    set,
                    DualNormOptions { starts: 4, max_iter: 200, ..Default::default() },
                ),
            },
        };
        DistanceSolver { dim, kind, warm: Vec::new(), step_hint: 1.0 }
    }

    pub fn forget_warm(&mut self) {
        self.warm.clear();
        self.step_hint = 1.0;
    }

    /// Distance from `x` to the span of `frame` in the target norm.
    pub fn eval(&mut self, x: &[f64], frame: &Frame, iters: usize) -> DistEval {
        debug_assert_eq!(x.len(), self.dim);
        if frame.k() == 0 {
            let (value, functional) = self.norm_and_functional(x);
            return DistEval { value, functional };
        }
        match &self.kind {
            Kind::L2 { scale } => {
                let rho = frame.project_out(x);
                let n2 = dot(&rho, &rho).sqrt();
                let functional =
                    if n2 > 0.0 { rho.iter().map(|v| v / n2).collect() } else { rho.clone() };
                DistEval { value: n2 / scale, functional }
            }
            Kind::Chebyshev { scale } => {
                let scale = *scale;
                if let Some(ev) = chebyshev_exact(x, frame, scale) {
                    ev
                } else {
                    self.smoothing_descent(x, frame, iters, scale, &[16.0, 64.0, 256.0, 1024.0])
                }
            }
            Kind::Taxicab { scale } => {
                let scale = *scale;
                self.smoothing_descent(x, frame, iters, scale, &[1.5, 1.15, 1.05, 1.01])
            }
            _ => self.descent(x, frame, iters),
        }
    }

    fn norm_and_functional(&mut self, rho: &[f64]) -> (f64, Vec<f64>) {
        match &mut self.kind {
            Kind::L2 { scale } => {
                let n2 = dot(rho, rho).sqrt();
                let f = if n2 > 0.0 { rho.iter().map(|v| v / n2).collect() } else { rho.to_vec() };
                (n2 / *scale, f)
            }
            Kind::SmoothLp { p, scale } => {
                (norms::lp_norm(rho, *p) / *scale, norms::lp_unit_maximizer(rho, p.dual()))
            }
            Kind::Chebyshev { scale } => {
                (norms::lp_norm(rho, Exponent::INFINITY) / *scale,
                 norms::lp_unit_maximizer(rho, Exponent::ONE))
            }
            Kind::Taxicab { scale } => {
                (norms::lp_norm(rho, Exponent::ONE) / *scale,
                 norms::lp_unit_maximizer(rho, Exponent::INFINITY))
            }
            Kind::Inter { set } => {
                let spec = norms::NormSpec::Intersection(set.clone());
                let v = norms::norm(rho, &spec).expect("dim checked");
                let f = norms::supporting_functional(rho, &spec).expect("dim checked");
                (v, f)
            }
            Kind::Dual { solver } => {
                let res = solver.eval(rho);
                (res.value, res.witness)
            }
        }
    }

    /// Gradient descent over the subspace coefficients with backtracking;
    /// warm-started across calls.
    fn descent(&mut self, x: &[f64], frame: &Frame, iters: usize) -> DistEval {
        let k = frame.k();
        let mut a = if self.warm.len() == k { self.warm.clone() } else { frame.coeffs(x) };
        let residual = |a: &[f64]| -> Vec<f64> {
            let ya = frame.expand(a);
            x.iter().zip(&ya).map(|(xi, yi)| xi - yi).collect()
        };
        let mut rho = residual(&a);
        let (mut val, mut func) = self.norm_and_functional(&rho);
        let mut step = self.step_hint;
        for _ in 0..iters {
            let grad: Vec<f64> = frame.cols.iter().map(|c| -dot(c, &func)).collect();
            let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
            if gnorm2 < 1e-26 * (1.0 + val * val) {
                break;
            }
            let mut improved = false;
            let mut eta = step;
            for _ in 0..8 {
                let trial: Vec<f64> = a.iter().zip(&grad).map(|(ai, gi)| ai - eta * gi).collect();
                let trho = residual(&trial);
                let (tval, tfunc) = self.norm_and_functional(&trho);
                if tval < val - 1e-15 * val.abs() {
                    a = trial;
                    rho = trho;
                    val = tval;
                    func = tfunc;
                    improved = true;
                    break;
                }
                eta *= 0.5;
            }
            if !improved {
                break;
            }
            step = (eta * 2.0).min(1e6);
        }
        let _ = rho;
        self.warm = a;
        self.step_hint = step;
        DistEval { value: val, functional: func }
    }

    /// Continuation over smooth surrogate exponents; the reported value is
    /// the exact target norm of the final residual.
    fn smoothing_descent(
        &mut self,
        x: &[f64],
        frame: &Frame,
        iters: usize,
        scale: f64,
        stages: &[f64],
    ) -> DistEval {
        let exact_p = match self.kind {
            Kind::Chebyshev { .. } => Exponent::INFINITY,
            _ => Exponent::ONE,
        };
        let per_stage = (iters / stages.len()).max(8);
        let mut a = if self.warm.len() == frame.k() { self.warm.clone() } else { frame.coeffs(x) };
        for &ps in stages {
            let p = Exponent::new(ps).expect("surrogate exponent");
            let mut stage = DistanceSolver {
                dim: self.dim,
                kind: Kind::SmoothLp { p, scale: 1.0 },
                warm: a.clone(),
                step_hint: self.step_hint,
            };
            stage.descent(x, frame, per_stage);
            a = stage.warm;
            self.step_hint = stage.step_hint;
        }
        let ya = frame.expand(&a);
        let rho: Vec<f64> = x.iter().zip(&ya).map(|(xi, yi)| xi - yi).collect();
        self.warm = a;
        let value = norms::lp_norm(&rho, exact_p) / scale;
        let functional = norms::lp_unit_maximizer(&rho, exact_p.dual());
        DistEval { value, functional }
    }
}

/// Exact Chebyshev distance to a subspace via the dual polytope: the
/// extreme points of `{‖u‖_1 ≤ 1, Q^T u = 0}` have support at most `k + 1`
/// and one-dimensional kernels on their support. Enumerates them when the
/// subset count is small.
fn chebyshev_exact(x: &[f64], frame: &Frame, scale: f64) -> Option<DistEval> {
    let dim = x.len();
    let k = frame.k();
    let mut count: u64 = 0;
    let mut choose: u64 = 1;
    for size in 1..=(k + 1).min(dim) {
        choose = choose * (dim - size + 1) as u64 / size as u64;
        count += choose;
        if count > 30_000 {
            return None;
        }
    }
    let mut best_val = 0.0f64;
    let mut best_u: Vec<f64> = vec![0.0; dim];
    let mut support = Vec::new();
    enumerate_supports(dim, (k + 1).min(dim), &mut support, 0, &mut |s| {
        let rows: Vec<Vec<f64>> =
            frame.cols.iter().map(|c| s.iter().map(|&i| c[i]).collect()).collect();
        let w = if k == 0 {
            if s.len() == 1 {
                Some(vec![1.0])
            } else {
                None
            }
        } else {
            null_vector(&rows, s.len())
        };
        if let Some(w) = w {
            let l1: f64 = w.iter().map(|v| v.abs()).sum();
            if l1 > 1e-12 {
                let val: f64 = s.iter().zip(&w).map(|(&i, wi)| x[i] * wi).sum::<f64>() / l1;
                if val.abs() > best_val {
                    best_val = val.abs();
                    best_u = vec![0.0; dim];
                    let sign = val.signum();
                    for (&i, wi) in s.iter().zip(&w) {
                        best_u[i] = sign * wi / l1;
                    }
                }
            }
        }
    });
    Some(DistEval { value: best_val / scale, functional: best_u })
}

fn enumerate_supports(
    dim: usize,
    max_size: usize,
    current: &mut Vec<usize>,
    from: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if !current.is_empty() {
        f(current);
    }
    if current.len() == max_size {
        return;
    }
    for i in from..dim {
        current.push(i);
        enumerate_supports(dim, max_size, current, i + 1, f);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balls::Ball;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line(dim: usize, dir: &[f64]) -> Frame {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        Frame::orthonormalize(dim, vec![dir.to_vec()], &mut rng)
    }

    #[test]
    fn euclidean_projection_distance() {
        let f = line(2, &[1.0, 1.0]);
        let mut solver =
            DistanceSolver::new(&TargetNorm::Spec(norms::NormSpec::unit_lp(2, Exponent::TWO)));
        let d = solver.eval(&[1.0, 0.0], &f, 50).value;
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_distance_on_the_plane() {
        // dist_inf((1, -1)/sqrt 2 point set, span(1,1)) = 1/sqrt 2 at t = 0.
        let f = line(2, &[1.0, 1.0]);
        let mut solver = DistanceSolver::new(&TargetNorm::Spec(norms::NormSpec::unit_lp(
            2,
            Exponent::INFINITY,
        )));
        let x = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt()];
        let d = solver.eval(&x, &f, 60).value;
        assert!((d - 1.0 / 2f64.sqrt()).abs() < 1e-10, "d = {d}");
    }

    #[test]
    fn smooth_lp_matches_projection_when_p_is_2ish() {
        let f = line(3, &[1.0, 2.0, -1.0]);
        let x = [0.3, -0.4, 1.1];
        let mut l2 =
            DistanceSolver::new(&TargetNorm::Spec(norms::NormSpec::unit_lp(3, Exponent::TWO)));
        let mut p21 = DistanceSolver::new(&TargetNorm::Spec(norms::NormSpec::unit_lp(
            3,
            Exponent::new(2.0000001).unwrap(),
        )));
        let a = l2.eval(&x, &f, 50).value;
        let b = p21.eval(&x, &f, 400).value;
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn dual_intersection_single_ball_collapses() {
        let set = BallIntersection::single(3, Exponent::TWO, 2.0).unwrap();
        let t = TargetNorm::DualIntersection(set).simplified();
        match t {
            TargetNorm::Spec(norms::NormSpec::Lp { p, scale, .. }) => {
                assert_eq!(p, Exponent::TWO);
                assert!((scale - 0.5).abs() < 1e-15);
            }
            other => panic!("expected collapsed lp target, got {other:?}"),
        }
    }

    #[test]
    fn dual_intersection_distance_descends() {
        let set = BallIntersection::new(
            4,
            vec![
                Ball::new(Exponent::TWO, 1.0).unwrap(),
                Ball::new(Exponent::INFINITY, 0.6).unwrap(),
            ],
        )
        .unwrap();
        let f = line(4, &[1.0, 1.0, 1.0, 1.0]);
        let mut solver = DistanceSolver::new(&TargetNorm::DualIntersection(set.clone()));
        let x = [1.0, -1.0, 0.5, 0.0];
        let d = solver.eval(&x, &f, 80).value;
        // Distance is at most the norm of the point itself.
        let full = solver.eval(&x, &Frame::empty(4), 10).value;
        assert!(d <= full + 1e-12);
        assert!(d > 0.0);
        // And at least the best lower certificate along the residual.
        let rho = f.project_out(&x);
        let denom = crate::norms::intersection_norm(&rho, &set);
        let lower = dot(&rho, &rho) / denom; // <rho, rho/||rho||_X>
        assert!(d >= lower - 1e-9, "d = {d}, lower = {lower}");
    }
}
