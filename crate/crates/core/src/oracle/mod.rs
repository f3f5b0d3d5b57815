//! Small-dimension numerical estimation of Kolmogorov and Gelfand widths.
//!
//! The estimator is heuristic on both sides: the outer infimum over
//! subspaces is a derivative-free search (upper bias), while the middle
//! supremum over the source ball may fall short (lower bias). Neither
//! direction is certified, so consumers compare against certified bounds
//! with a tolerance band; certification lives in `gluskin` and
//! `order::inclusion_upper_bound`, not here.
//!
//! Estimates are deterministic given a seed: every restart derives its own
//! substream, restarts may run in parallel, and the reduction over restarts
//! is order-independent.

mod distance;
mod linalg;

pub use distance::TargetNorm;
pub use linalg::Frame;

use crate::balls::WidthQuery;
use crate::exponents::Exponent;
use crate::norms::{self, DualNormOptions, DualSolver, NormSpec};
use crate::par;
use distance::DistanceSolver;
use linalg::{dot, principal_frame};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dimension {dim} above the desk-scale cap {cap}; raise the cap to override")]
    DeskScale { dim: usize, cap: usize },
    #[error("subspace dimension {n} exceeds ambient dimension {dim}")]
    BadCodim { n: usize, dim: usize },
}

/// Optimizer budgets. Defaults are sized for `N ≤ 8` to finish in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleBudget {
    pub outer_restarts: usize,
    pub outer_iters: usize,
    pub middle_starts: usize,
    pub middle_iters: usize,
    pub inner_iters: usize,
    /// Desk-scale guard on the ambient dimension.
    pub dim_cap: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            outer_restarts: 32,
            outer_iters: 64,
            middle_starts: 64,
            middle_iters: 24,
            inner_iters: 48,
            dim_cap: 16,
        }
    }
}

impl OracleBudget {
    /// Reduced-effort preset for large randomized suites.
    pub fn quick() -> Self {
        OracleBudget {
            outer_restarts: 6,
            outer_iters: 32,
            middle_starts: 24,
            middle_iters: 12,
            inner_iters: 28,
            dim_cap: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub value: f64,
    pub restarts_used: usize,
    /// True when the middle maximization enumerated the source ball's
    /// extreme points exactly.
    pub inner_max_exact: bool,
    /// Max minus min of the per-restart results; large spread flags an
    /// inconclusive estimate.
    pub spread: f64,
}

/// A norm together with a norming-functional evaluator; the building block
/// of the ratio ascent.
#[derive(Clone)]
enum NormLike {
    Lp { t: Exponent, scale: f64 },
    Inter(crate::balls::BallIntersection),
    DualInter(Box<DualSolver>),
}

impl NormLike {
    fn eval(&mut self, u: &[f64]) -> (f64, Vec<f64>) {
        match self {
            NormLike::Lp { t, scale } => {
                let v = norms::lp_norm(u, *t) * *scale;
                let mut g = norms::lp_unit_maximizer(u, t.dual());
                for gi in &mut g {
                    *gi *= *scale;
                }
                (v, g)
            }
            NormLike::Inter(set) => {
                let spec = NormSpec::Intersection(set.clone());
                let v = norms::norm(u, &spec).expect("dims fixed");
                let g = norms::supporting_functional(u, &spec).expect("dims fixed");
                (v, g)
            }
            NormLike::DualInter(solver) => {
                let res = solver.eval(u);
                (res.value, res.witness)
            }
        }
    }
}

/// The source ball of the width query.
#[derive(Clone)]
struct Source {
    spec: NormSpec,
    maximizer_solver: Option<DualSolver>,
}

impl Source {
    fn new(spec: NormSpec) -> Self {
        let maximizer_solver = match &spec {
            NormSpec::Intersection(set) => Some(DualSolver::with_options(
                set.clone(),
                DualNormOptions { starts: 4, max_iter: 200, ..Default::default() },
            )),
            NormSpec::Lp { .. } => None,
        };
        Source { spec, maximizer_solver }
    }

    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn norm(&self, x: &[f64]) -> f64 {
        norms::norm(x, &self.spec).expect("dims fixed")
    }

    /// Extreme points up to sign symmetry when the ball is an `l_1` ball.
    fn l1_extremes(&self) -> Option<Vec<Vec<f64>>> {
        if let NormSpec::Lp { dim, p, scale } = &self.spec {
            if p.is_one() {
                return Some(
                    (0..*dim)
                        .map(|i| {
                            let mut e = vec![0.0; *dim];
                            e[i] = *scale;
                            e
                        })
                        .collect(),
                );
            }
        }
        None
    }

    /// The ball point maximizing `⟨z, ·⟩`.
    fn maximizer(&mut self, z: &[f64]) -> Vec<f64> {
        match &self.spec {
            NormSpec::Lp { p, scale, .. } => {
                let mut y = norms::lp_unit_maximizer(z, *p);
                for v in &mut y {
                    *v *= *scale;
                }
                y
            }
            NormSpec::Intersection(_) => {
                self.maximizer_solver.as_mut().expect("intersection source").eval(z).witness
            }
        }
    }

    /// The dual norm of the source: numerator of the section ratio.
    fn dual_normlike(&self) -> NormLike {
        match &self.spec {
            NormSpec::Lp { p, scale, .. } => NormLike::Lp { t: p.dual(), scale: *scale },
            NormSpec::Intersection(set) => NormLike::DualInter(Box::new(DualSolver::with_options(
                set.clone(),
                DualNormOptions { starts: 4, max_iter: 200, ..Default::default() },
            ))),
        }
    }
}

fn target_dual_normlike(target: &TargetNorm) -> NormLike {
    match target.clone().simplified() {
        TargetNorm::Spec(NormSpec::Lp { p, scale, .. }) => {
            NormLike::Lp { t: p.dual(), scale }
        }
        TargetNorm::Spec(NormSpec::Intersection(set)) => NormLike::DualInter(Box::new(
            DualSolver::with_options(
                set,
                DualNormOptions { starts: 4, max_iter: 200, ..Default::default() },
            ),
        )),
        TargetNorm::DualIntersection(set) => NormLike::Inter(set),
    }
}

fn substream(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17) ^ tag)
}

fn normalize2(u: &mut [f64]) -> bool {
    let n = dot(u, u).sqrt();
    if n < 1e-14 {
        return false;
    }
    for v in u.iter_mut() {
        *v /= n;
    }
    true
}

/// Maximizes `num(u) / den(u)` over nonzero `u` in a subspace given by its
/// orthogonal projector. Supergradient ascent on the log-ratio with
/// renormalization after each step.
fn ratio_ascent(
    project: &dyn Fn(&[f64]) -> Vec<f64>,
    num: &mut NormLike,
    den: &mut NormLike,
    dim: usize,
    starts: usize,
    iters: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, Vec<f64>) {
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        candidates.push(project(&e));
    }
    for _ in 0..4 {
        let v: Vec<f64> = (0..dim).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        candidates.push(project(&v));
    }
    while candidates.len() < dim + 4 + starts {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        candidates.push(project(&v));
    }

    let ratio = |u: &[f64], num: &mut NormLike, den: &mut NormLike| -> (f64, Vec<f64>, Vec<f64>) {
        let (nv, ng) = num.eval(u);
        let (dv, dg) = den.eval(u);
        if dv <= 0.0 {
            (0.0, ng, dg)
        } else {
            (nv / dv, ng, dg)
        }
    };

    let mut scored: Vec<(f64, Vec<f64>)> = Vec::new();
    for mut c in candidates {
        if !normalize2(&mut c) {
            continue;
        }
        let (v, _, _) = ratio(&c, num, den);
        scored.push((v, c));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.truncate(3.max(starts / 8));

    let mut best_val = 0.0;
    let mut best_u = vec![0.0; dim];
    for (v0, mut u) in scored {
        let mut val = v0;
        let mut step = 0.5;
        for _ in 0..iters {
            let (v, ng, dg) = ratio(&u, num, den);
            if v > val {
                val = v;
            }
            // Supergradient of log(num/den).
            let (numv, _) = num.eval(&u);
            let (denv, _) = den.eval(&u);
            let (numv, denv) = (numv.max(1e-300), denv.max(1e-300));
            let mut g: Vec<f64> = ng
                .iter()
                .zip(&dg)
                .map(|(n, d)| n / numv - d / denv)
                .collect();
            g = project(&g);
            let gn = dot(&g, &g).sqrt();
            if gn < 1e-13 {
                break;
            }
            let mut improved = false;
            let mut eta = step;
            for _ in 0..6 {
                let mut trial: Vec<f64> =
                    u.iter().zip(&g).map(|(ui, gi)| ui + eta * gi / gn).collect();
                if normalize2(&mut trial) {
                    let (tv, _, _) = ratio(&trial, num, den);
                    if tv > val * (1.0 + 1e-14) {
                        u = trial;
                        val = tv;
                        improved = true;
                        break;
                    }
                }
                eta *= 0.4;
            }
            if !improved {
                break;
            }
            step = (eta * 2.0).min(2.0);
        }
        if val > best_val {
            best_val = val;
            best_u = u;
        }
    }
    (best_val, best_u)
}

/// Shared state for evaluating the middle supremum at a subspace.
#[derive(Clone)]
struct MiddleCtx {
    source: Source,
    dist: DistanceSolver,
    src_dual: NormLike,
    target_dual: NormLike,
    pool: Vec<Vec<f64>>,
}

impl MiddleCtx {
    fn new(source_spec: &NormSpec, target: &TargetNorm) -> Self {
        let source = Source::new(source_spec.clone());
        MiddleCtx {
            dist: DistanceSolver::new(target),
            src_dual: source.dual_normlike(),
            target_dual: target_dual_normlike(target),
            source,
            pool: Vec::new(),
        }
    }

    /// `sup_{x in source ball} dist(x, span(frame))`, returning the value
    /// and the maximizer found.
    fn sup(
        &mut self,
        frame: &Frame,
        budget: &OracleBudget,
        final_pass: bool,
        rng: &mut ChaCha8Rng,
    ) -> (f64, Vec<f64>) {
        let dim = self.source.dim();
        let inner = if final_pass { budget.inner_iters * 2 } else { budget.inner_iters };

        if let Some(extremes) = self.source.l1_extremes() {
            let mut best = (0.0f64, vec![0.0; dim]);
            for x in extremes {
                self.dist.forget_warm();
                let ev = self.dist.eval(&x, frame, inner);
                if ev.value > best.0 {
                    best = (ev.value, x);
                }
            }
            return best;
        }

        // The dual-side ratio winner, re-aligned into the source ball, is
        // the strongest single candidate; search-level calls lean on it and
        // the carryover pool, the final pass widens to spikes, sign vectors,
        // and randoms.
        let mut candidates: Vec<Vec<f64>> = Vec::new();
        let project = |v: &[f64]| frame.project_out(v);
        let (ascent_starts, ascent_iters) = if final_pass {
            (budget.middle_starts, budget.middle_iters * 2)
        } else {
            (budget.middle_starts / 3, budget.middle_iters)
        };
        let (_, u_star) = ratio_ascent(
            &project,
            &mut self.src_dual,
            &mut self.target_dual,
            dim,
            ascent_starts,
            ascent_iters,
            rng,
        );
        if u_star.iter().any(|v| *v != 0.0) {
            candidates.push(self.source.maximizer(&u_star));
        }
        for x in &self.pool {
            candidates.push(x.clone());
        }
        if final_pass {
            for i in 0..dim {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                candidates.push(e);
            }
            for _ in 0..4 {
                candidates
                    .push((0..dim).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect());
            }
            while candidates.len() < budget.middle_starts.max(8) {
                candidates.push((0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect());
            }
        } else {
            candidates.push((0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect());
        }

        let quick = if final_pass { (inner / 2).max(8) } else { (inner / 4).max(5) };
        let mut scored: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
        for mut x in candidates {
            let n = self.source.norm(&x);
            if n <= 1e-14 {
                continue;
            }
            for v in &mut x {
                *v /= n;
            }
            let ev = self.dist.eval(&x, frame, quick);
            scored.push((ev.value, x, ev.functional));
        }
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        scored.truncate(if final_pass { 3 } else { 1 });

        let mut best_val = 0.0;
        let mut best_x = vec![0.0; dim];
        for (v0, mut x, mut func) in scored {
            let mut val = v0;
            let mut step = 0.5;
            for _ in 0..budget.middle_iters {
                let gn = dot(&func, &func).sqrt();
                if gn < 1e-13 {
                    break;
                }
                let mut improved = false;
                let mut eta = step;
                for _ in 0..5 {
                    let mut trial: Vec<f64> =
                        x.iter().zip(&func).map(|(xi, gi)| xi + eta * gi / gn).collect();
                    let n = self.source.norm(&trial);
                    if n > 1e-14 {
                        for v in &mut trial {
                            *v /= n;
                        }
                        let ev = self.dist.eval(&trial, frame, quick);
                        if ev.value > val * (1.0 + 1e-14) {
                            x = trial;
                            val = ev.value;
                            func = ev.functional;
                            improved = true;
                            break;
                        }
                    }
                    eta *= 0.4;
                }
                if !improved {
                    break;
                }
                step = (eta * 2.0).min(2.0);
            }
            if val > best_val {
                best_val = val;
                best_x = x;
            }
        }
        // Polish the winner with the full inner budget.
        if best_val > 0.0 {
            self.dist.forget_warm();
            let ev = self.dist.eval(&best_x, frame, inner);
            best_val = best_val.max(ev.value);
            self.pool.retain(|x| x != &best_x);
            self.pool.insert(0, best_x.clone());
            self.pool.truncate(4);
        }
        (best_val, best_x)
    }
}

/// Derivative-free minimization over orthonormal frames: seeded pattern
/// search with QR re-orthonormalization, plus herding proposals built from
/// the principal directions of recent middle maximizers.
fn frame_search<F>(
    dim: usize,
    k: usize,
    budget: &OracleBudget,
    seed: u64,
    mut objective: F,
) -> (f64, usize, f64)
where
    F: FnMut(&Frame, bool, &mut ChaCha8Rng) -> (f64, Vec<f64>) + Clone + Send + Sync,
{
    let restarts = budget.outer_restarts.max(1);
    let results = par::map_range(0..restarts, |r| {
        let mut rng = substream(seed, r as u64 + 1);
        let mut obj = objective.clone();
        let mut eval =
            |frame: &Frame, rng: &mut ChaCha8Rng| -> (f64, Vec<f64>) { obj(frame, false, rng) };

        let mut frame = match r {
            0 => best_coordinate_frame(dim, k, &mut eval, &mut rng),
            1 => {
                // Herding: chase principal directions of the maximizers.
                let mut fr = Frame::random(dim, k, &mut rng);
                let mut pool: Vec<Vec<f64>> = Vec::new();
                for _ in 0..3 {
                    let (_, x) = eval(&fr, &mut rng);
                    if x.iter().all(|v| *v == 0.0) {
                        break;
                    }
                    pool.push(x);
                    fr = principal_frame(&pool, dim, k, &mut rng);
                    if fr.k() < k {
                        fr = Frame::random(dim, k, &mut rng);
                    }
                }
                fr
            }
            _ => Frame::random(dim, k, &mut rng),
        };
        let (mut val, _) = eval(&frame, &mut rng);
        let mut sigma = 0.5;
        for _ in 0..budget.outer_iters {
            if sigma < 1e-4 {
                break;
            }
            let dir: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
                .collect();
            let mut improved = false;
            for sgn in [1.0, -1.0] {
                let cols: Vec<Vec<f64>> = frame
                    .cols
                    .iter()
                    .zip(&dir)
                    .map(|(c, d)| {
                        c.iter().zip(d).map(|(ci, di)| ci + sgn * sigma * di).collect()
                    })
                    .collect();
                let cand = Frame::orthonormalize(dim, cols, &mut rng);
                if cand.k() < k {
                    continue;
                }
                let (v, _) = eval(&cand, &mut rng);
                if v < val {
                    val = v;
                    frame = cand;
                    improved = true;
                    break;
                }
            }
            sigma *= if improved { 1.4 } else { 0.55 };
        }
        (val, frame)
    });

    let mut best = f64::INFINITY;
    let mut worst = f64::NEG_INFINITY;
    let mut best_frame: Option<Frame> = None;
    for (v, f) in results {
        if v < best {
            best = v;
            best_frame = Some(f);
        }
        worst = worst.max(v);
    }
    // Final high-budget evaluation at the winning frame.
    let mut rng = substream(seed, 0);
    let final_val = match best_frame {
        Some(f) => objective(&f, true, &mut rng).0,
        None => best,
    };
    let value = final_val.min(best);
    (value, restarts, (worst - best).max(0.0))
}

fn best_coordinate_frame(
    dim: usize,
    k: usize,
    eval: &mut impl FnMut(&Frame, &mut ChaCha8Rng) -> (f64, Vec<f64>),
    rng: &mut ChaCha8Rng,
) -> Frame {
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    let mut current = Vec::new();
    let limit = 210usize;
    collect_subsets(dim, k, 0, &mut current, &mut subsets, limit);
    if subsets.is_empty() {
        return Frame::random(dim, k, rng);
    }
    if subsets.len() >= limit {
        // Too many: sample instead.
        let mut sampled = Vec::with_capacity(40);
        for _ in 0..40 {
            let mut idx: Vec<usize> = (0..dim).collect();
            for i in 0..k {
                let j = rng.gen_range(i..dim);
                idx.swap(i, j);
            }
            sampled.push(idx[..k].to_vec());
        }
        subsets = sampled;
    }
    let mut best = (f64::INFINITY, Frame::coordinate(dim, &subsets[0]));
    for s in &subsets {
        let f = Frame::coordinate(dim, s);
        let (v, _) = eval(&f, rng);
        if v < best.0 {
            best = (v, f);
        }
    }
    best.1
}

fn collect_subsets(
    dim: usize,
    k: usize,
    from: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for i in from..dim {
        current.push(i);
        collect_subsets(dim, k, i + 1, current, out, limit);
        current.pop();
    }
}

/// Estimates the Kolmogorov width `d_n(source ball, target)` by nested
/// optimization: outer derivative-free descent over `n`-frames, middle
/// supremum over the source ball (exact extreme-point enumeration for `l_1`
/// sources), inner convex distance minimization.
pub fn kolmogorov_estimate(
    source: &NormSpec,
    target: &TargetNorm,
    n: usize,
    seed: u64,
    budget: &OracleBudget,
) -> Result<OracleEstimate, OracleError> {
    let dim = source.dim();
    if dim > budget.dim_cap {
        return Err(OracleError::DeskScale { dim, cap: budget.dim_cap });
    }
    if n > dim {
        return Err(OracleError::BadCodim { n, dim });
    }
    let inner_max_exact = matches!(source, NormSpec::Lp { p, .. } if p.is_one());
    if n == dim {
        return Ok(OracleEstimate { value: 0.0, restarts_used: 0, inner_max_exact, spread: 0.0 });
    }
    if n == 0 {
        // No subspace: the middle supremum alone.
        let mut ctx = MiddleCtx::new(source, target);
        let mut rng = substream(seed, 0);
        let (value, _) = ctx.sup(&Frame::empty(dim), budget, true, &mut rng);
        return Ok(OracleEstimate { value, restarts_used: 1, inner_max_exact, spread: 0.0 });
    }

    let source_spec = source.clone();
    let target = target.clone();
    let bud = *budget;
    // Each restart clones the closure and with it a fresh context whose
    // candidate pool and warm starts then persist across that restart's
    // evaluations.
    let ctx = MiddleCtx::new(&source_spec, &target);
    let mut ctx = ctx;
    let objective = move |frame: &Frame, final_pass: bool, rng: &mut ChaCha8Rng| {
        ctx.sup(frame, &bud, final_pass, rng)
    };
    let (value, restarts_used, spread) = frame_search(dim, n, budget, seed, objective);
    Ok(OracleEstimate { value, restarts_used, inner_max_exact, spread })
}

/// Estimates the Gelfand width `d^n(∩ ν_j B_{p_j}, l_q)` through duality:
/// it equals `d_n(B_{q'}, X*)` with `X*` the dual intersection norm. The
/// inner maximization is exact when `q = ∞` (so the source is `B_1`).
pub fn gelfand_estimate(
    query: &WidthQuery,
    seed: u64,
    budget: &OracleBudget,
) -> Result<OracleEstimate, OracleError> {
    let set = query.set.canonicalize();
    let dim = set.dim();
    let source = NormSpec::unit_lp(dim, query.q.dual());
    let target = TargetNorm::DualIntersection(set).simplified();
    kolmogorov_estimate(&source, &target, query.n, seed, budget)
}

/// Direct (primal) Gelfand estimate: minimize over kernel sections the
/// supremum of `‖u‖_q / ‖u‖_X` on the section.
pub fn gelfand_primal_estimate(
    query: &WidthQuery,
    seed: u64,
    budget: &OracleBudget,
) -> Result<OracleEstimate, OracleError> {
    let set = query.set.canonicalize();
    let dim = set.dim();
    if dim > budget.dim_cap {
        return Err(OracleError::DeskScale { dim, cap: budget.dim_cap });
    }
    if query.n > dim {
        return Err(OracleError::BadCodim { n: query.n, dim });
    }
    if query.n == dim {
        return Ok(OracleEstimate {
            value: 0.0,
            restarts_used: 0,
            inner_max_exact: false,
            spread: 0.0,
        });
    }
    let k = dim - query.n;
    let q = query.q;
    let set_for_obj = set.clone();
    let objective = move |frame: &Frame, final_pass: bool, rng: &mut ChaCha8Rng| {
        let mut num = NormLike::Lp { t: q, scale: 1.0 };
        let mut den = NormLike::Inter(set_for_obj.clone());
        let project = |v: &[f64]| frame.project_in(v);
        let starts = if final_pass { 2 * 16 } else { 16 };
        let iters = if final_pass { 60 } else { 30 };
        let (val, u) = ratio_ascent(&project, &mut num, &mut den, frame.dim, starts, iters, rng);
        // Outer search minimizes; herding uses the witness direction.
        (val, u)
    };
    if query.n == 0 {
        let mut rng = substream(seed, 0);
        let full = Frame::coordinate(dim, &(0..dim).collect::<Vec<_>>());
        let (value, _) = objective(&full, true, &mut rng);
        return Ok(OracleEstimate { value, restarts_used: 1, inner_max_exact: false, spread: 0.0 });
    }
    let (value, restarts_used, spread) = frame_search(dim, k, budget, seed, objective);
    Ok(OracleEstimate { value, restarts_used, inner_max_exact: false, spread })
}

/// `|primal Gelfand estimate − dual Kolmogorov estimate|`: a small gap
/// corroborates both the width duality and the optimizer.
pub fn duality_gap(query: &WidthQuery, seed: u64, budget: &OracleBudget) -> Result<f64, OracleError> {
    let dual = gelfand_estimate(query, seed, budget)?;
    let primal = gelfand_primal_estimate(query, seed ^ 0x5bd1_e995, budget)?;
    Ok((dual.value - primal.value).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balls::{Ball, BallIntersection, WidthKind};

    fn budget() -> OracleBudget {
        OracleBudget { outer_restarts: 6, outer_iters: 30, ..OracleBudget::quick() }
    }

    #[test]
    fn full_space_gives_zero() {
        let src = NormSpec::unit_lp(4, Exponent::TWO);
        let t = TargetNorm::Spec(NormSpec::unit_lp(4, Exponent::TWO));
        let est = kolmogorov_estimate(&src, &t, 4, 1, &budget()).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn radius_at_zero_codim() {
        // d_0(B_2, l_inf) = 1: the radius of the Euclidean ball in sup norm.
        let src = NormSpec::unit_lp(3, Exponent::TWO);
        let t = TargetNorm::Spec(NormSpec::unit_lp(3, Exponent::INFINITY));
        let est = kolmogorov_estimate(&src, &t, 0, 1, &budget()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-6, "value {}", est.value);
    }

    #[test]
    fn euclidean_disk_in_sup_norm() {
        // d_1(B_2^2, l_inf^2) = 1/sqrt(2), optimal line span(1, 1).
        let src = NormSpec::unit_lp(2, Exponent::TWO);
        let t = TargetNorm::Spec(NormSpec::unit_lp(2, Exponent::INFINITY));
        let est = kolmogorov_estimate(&src, &t, 1, 7, &budget()).unwrap();
        assert!((est.value - 0.5f64.sqrt()).abs() < 1e-3, "value {}", est.value);
    }

    #[test]
    fn euclidean_sections_stay_unit() {
        let set = BallIntersection::single(4, Exponent::TWO, 1.0).unwrap();
        for n in 1..4 {
            let query = WidthQuery::new(set.clone(), n, Exponent::TWO, WidthKind::Gelfand).unwrap();
            let est = gelfand_estimate(&query, 3, &budget()).unwrap();
            assert!((est.value - 1.0).abs() < 1e-3, "n = {n}: {}", est.value);
        }
    }

    #[test]
    fn polytope_radius() {
        // d^0 of B_1 ∩ (1/2)B_inf in l_2: vertex (1/2, 1/2) has norm 1/sqrt 2.
        let set = BallIntersection::new(
            2,
            vec![
                Ball::new(Exponent::ONE, 1.0).unwrap(),
                Ball::new(Exponent::INFINITY, 0.5).unwrap(),
            ],
        )
        .unwrap();
        let query = WidthQuery::new(set, 0, Exponent::TWO, WidthKind::Gelfand).unwrap();
        let est = gelfand_estimate(&query, 5, &budget()).unwrap();
        assert!((est.value - 0.5f64.sqrt()).abs() < 1e-4, "value {}", est.value);
    }

    #[test]
    fn duality_gap_small_on_simple_instance() {
        let set = BallIntersection::single(3, Exponent::new(1.5).unwrap(), 1.0).unwrap();
        let query = WidthQuery::new(set, 1, Exponent::TWO, WidthKind::Gelfand).unwrap();
        let gap = duality_gap(&query, 11, &budget()).unwrap();
        assert!(gap <= 0.05, "gap {gap}");
    }

    #[test]
    fn desk_scale_guard() {
        let src = NormSpec::unit_lp(64, Exponent::TWO);
        let t = TargetNorm::Spec(NormSpec::unit_lp(64, Exponent::TWO));
        assert!(matches!(
            kolmogorov_estimate(&src, &t, 1, 0, &budget()),
            Err(OracleError::DeskScale { .. })
        ));
    }

    #[test]
    fn reproducible_given_seed() {
        let src = NormSpec::unit_lp(4, Exponent::TWO);
        let t = TargetNorm::Spec(NormSpec::unit_lp(4, Exponent::new(4.0 / 3.0).unwrap()));
        let a = kolmogorov_estimate(&src, &t, 2, 42, &budget()).unwrap();
        let b = kolmogorov_estimate(&src, &t, 2, 42, &budget()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.spread.to_bits(), b.spread.to_bits());
    }
}
