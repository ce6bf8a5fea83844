//! Sequential convex approximation for rate objectives of the form
//! "concave log-det minus concave log-det".
//!
//! Every jamming objective in this crate is a difference of two log-dets,
//! `f(x) = c(x) + v(x)` with `c` concave (signal plus interference) and `v`
//! convex (minus the log-det of interference alone). Replacing `c` by its
//! tangent at an anchor gives a convex upper bound that touches `f` at the
//! anchor. Minimizing that bound and moving the anchor produces a
//! nonincreasing sequence of objective values.
//!
//! The inner convex problems are solved by projected gradient descent with an
//! Armijo line search; the feasible sets are products of trace-constrained PSD
//! cones, which have closed-form projections.

use crate::error::{JamError, Result};
use crate::linalg::{inverse_pd, log_det, log_det_ratio, psd_trace_projection, Hermitian};
use crate::scenario::EffectiveDecomposition;

/// Iteration limits and tolerances for the sequential solver.
#[derive(Clone, Debug, PartialEq)]
pub struct SpcaOptions {
    pub max_outer_iters: usize,
    /// Stop once an outer step improves the objective by at most this
    /// fraction of its magnitude.
    pub outer_tol: f64,
    /// Besides a small objective change, convergence requires the gradient
    /// mapping to fall below `kkt_tol · (1 + |objective|)`; objective changes
    /// are quadratic in the distance to the optimum and stall early.
    pub kkt_tol: f64,
    pub inner_max_iters: usize,
    /// Stop the inner solver once its gradient-mapping norm falls below
    /// `inner_tol · (1 + |objective|)`.
    pub inner_tol: f64,
    /// Backtracking factor of the line search.
    pub step_shrink: f64,
    /// Extrapolate accepted anchors along the last outer step.
    pub extrapolate: bool,
}

impl Default for SpcaOptions {
    fn default() -> Self {
        Self {
            max_outer_iters: 500,
            outer_tol: 1e-9,
            kkt_tol: 1e-8,
            inner_max_iters: 2000,
            inner_tol: 1e-10,
            step_shrink: 0.5,
            extrapolate: true,
        }
    }
}

impl SpcaOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_outer_iters > 0
            && self.inner_max_iters > 0
            && self.outer_tol > 0.0
            && self.outer_tol < 1.0
            && self.kkt_tol > 0.0
            && self.inner_tol > 0.0
            && self.inner_tol < 1.0
            && self.step_shrink > 0.0
            && self.step_shrink < 1.0;
        if ok {
            Ok(())
        } else {
            Err(JamError::InvalidInput(format!("invalid solver options {self:?}")))
        }
    }
}

/// Objective values along the outer iterations.
#[derive(Clone, Debug, PartialEq)]
pub struct SpcaTrace {
    /// Objective at the starting point followed by one entry per accepted
    /// outer step.
    pub objective: Vec<f64>,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// A difference-of-concave objective over a product of matrix blocks.
pub trait SplitObjective {
    /// Full objective `c(x) + v(x)`.
    fn value(&self, x: &[Hermitian]) -> Result<f64>;
    /// Gradient of the concave part `c`; the slope of its tangent at `x`.
    fn concave_gradient(&self, x: &[Hermitian]) -> Result<Vec<Hermitian>>;
    /// The convex part `v`.
    fn convex_value(&self, x: &[Hermitian]) -> Result<f64>;
    fn convex_gradient(&self, x: &[Hermitian]) -> Result<Vec<Hermitian>>;
    /// Frobenius projection onto the feasible set.
    fn project(&self, x: &[Hermitian]) -> Result<Vec<Hermitian>>;
}

fn inner(a: &[Hermitian], b: &[Hermitian]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.inner(y)).sum()
}

fn axpy(x: &[Hermitian], t: f64, d: &[Hermitian]) -> Vec<Hermitian> {
    x.iter().zip(d).map(|(a, b)| a + &b.scale(t)).collect()
}

fn diff(a: &[Hermitian], b: &[Hermitian]) -> Vec<Hermitian> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm(a: &[Hermitian]) -> f64 {
    inner(a, a).sqrt()
}

/// Result of one convex subproblem solve.
#[derive(Clone, Debug)]
pub struct InnerSolution {
    pub x: Vec<Hermitian>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `⟨slope, x⟩ + v(x)` over the feasible set, starting from `start`.
///
/// Trial steps start from the Barzilai-Borwein estimate of the previous step
/// and shrink by `step_shrink` until the Armijo condition holds, so every
/// accepted iterate lowers the subproblem objective.
pub fn minimize_linearized<P: SplitObjective + ?Sized>(
    problem: &P,
    slope: &[Hermitian],
    start: Vec<Hermitian>,
    opts: &SpcaOptions,
) -> Result<InnerSolution> {
    const ARMIJO: f64 = 1e-4;
    let surrogate = |x: &[Hermitian]| -> Result<f64> { Ok(inner(slope, x) + problem.convex_value(x)?) };
    let gradient = |x: &[Hermitian]| -> Result<Vec<Hermitian>> {
        let g = problem.convex_gradient(x)?;
        Ok(g.iter().zip(slope).map(|(a, b)| a + b).collect())
    };

    let mut x = start;
    let mut s = surrogate(&x)?;
    let mut g = gradient(&x)?;
    let mut step = 1.0;
    let mut previous: Option<(Vec<Hermitian>, Vec<Hermitian>)> = None;

    for it in 0..opts.inner_max_iters {
        if let Some((dx, dg)) = &previous {
            let curvature = inner(dx, dg);
            if curvature > 0.0 {
                step = (inner(dx, dx) / curvature).clamp(1e-12, 1e12);
            }
        }
        let mut accepted = None;
        let mut t = step;
        for _ in 0..200 {
            let trial = problem.project(&axpy(&x, -t, &g))?;
            let moved = diff(&trial, &x);
            let decrease = inner(&g, &moved);
            // Points outside the convex part's domain count as rejected steps.
            if let Ok(s_trial) = surrogate(&trial) {
                if s_trial <= s + ARMIJO * decrease {
                    accepted = Some((trial, s_trial, moved, t));
                    break;
                }
            }
            t *= opts.step_shrink;
        }
        let Some((trial, s_trial, moved, t)) = accepted else {
            // No representable step decreases the objective: stationary to
            // working precision.
            return Ok(InnerSolution { x, value: s, iterations: it, converged: true });
        };
        let mapping = norm(&moved) / t;
        let g_new = gradient(&trial)?;
        previous = Some((moved, diff(&g_new, &g)));
        x = trial;
        s = s_trial;
        g = g_new;
        step = t;
        if mapping < opts.inner_tol * (1.0 + s.abs()) {
            return Ok(InnerSolution { x, value: s, iterations: it + 1, converged: true });
        }
    }
    Ok(InnerSolution {
        x,
        value: s,
        iterations: opts.inner_max_iters,
        converged: false,
    })
}

/// Norm of `x − P(x − ∇f(x))`, zero exactly at stationary points.
pub fn gradient_mapping_norm<P: SplitObjective + ?Sized>(problem: &P, x: &[Hermitian]) -> Result<f64> {
    let gc = problem.concave_gradient(x)?;
    let gv = problem.convex_gradient(x)?;
    let g: Vec<Hermitian> = gc.iter().zip(&gv).map(|(a, b)| a + b).collect();
    let p = problem.project(&axpy(x, -1.0, &g))?;
    Ok(norm(&diff(x, &p)))
}

/// Runs the sequential convex approximation from `init`.
///
/// An outer step is kept only if it does not raise the objective, so the
/// returned trace is nonincreasing by construction. With
/// [`SpcaOptions::extrapolate`] set, each new anchor is additionally pushed
/// further along the last step when that lowers the objective; the
/// extrapolation length doubles after every success and resets on failure.
pub fn minimize_split<P: SplitObjective + ?Sized>(
    problem: &P,
    init: Vec<Hermitian>,
    opts: &SpcaOptions,
) -> Result<(Vec<Hermitian>, SpcaTrace)> {
    const MAX_EXTRAPOLATION: f64 = 1e6;
    opts.validate()?;
    let mut x = problem.project(&init)?;
    let mut value = problem.value(&x)?;
    let mut objective = vec![value];
    let mut converged = false;
    let mut iterations = 0;
    let mut reach = 1.0;
    while iterations < opts.max_outer_iters {
        iterations += 1;
        let slope = problem.concave_gradient(&x)?;
        let sub = minimize_linearized(problem, &slope, x.clone(), opts)?;
        let next = problem.value(&sub.x)?;
        if !next.is_finite() {
            return Err(JamError::ContractViolation("objective became non-finite".into()));
        }
        if next > value {
            // Rounding in the inner solve; the anchor is already optimal to
            // working precision.
            converged = next - value <= 1e-12 * (1.0 + value.abs());
            break;
        }
        let improvement = value - next;
        let (mut x_next, mut v_next) = (sub.x, next);
        if opts.extrapolate && improvement > 0.0 {
            let step = diff(&x_next, &x);
            let candidate = problem.project(&axpy(&x_next, reach, &step))?;
            match problem.value(&candidate) {
                Ok(v) if v < v_next => {
                    x_next = candidate;
                    v_next = v;
                    reach = (2.0 * reach).min(MAX_EXTRAPOLATION);
                }
                _ => reach = 1.0,
            }
        }
        x = x_next;
        value = v_next;
        objective.push(value);
        if improvement <= opts.outer_tol * value.abs() + f64::EPSILON * (1.0 + value.abs()) {
            let kkt = gradient_mapping_norm(problem, &x)?;
            if improvement == 0.0 || kkt <= opts.kkt_tol * (1.0 + value.abs()) {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        log::debug!("sequential solver stopped after {iterations} outer iterations without converging");
    }
    let kkt_residual = gradient_mapping_norm(problem, &x)?;
    Ok((
        x,
        SpcaTrace {
            objective,
            kkt_residual,
            iterations,
            converged,
        },
    ))
}

/// The reduced single-target objective `log|Q' + D₀ + Ã| − log|Q' + D₀|`
/// over `{Q' ⪰ 0, Tr Q' ≤ p_z}`.
#[derive(Clone, Debug)]
pub struct ReducedProblem {
    pub a_tilde: Hermitian,
    pub d0: Hermitian,
    pub p_z: f64,
}

impl ReducedProblem {
    pub fn new(a_tilde: Hermitian, d0: Hermitian, p_z: f64) -> Result<Self> {
        if a_tilde.dim() != d0.dim() {
            return Err(JamError::InvalidInput("Ã and D₀ dimensions differ".into()));
        }
        if !(p_z >= 0.0) {
            return Err(JamError::InvalidInput(format!("negative budget {p_z}")));
        }
        // D₀ must be PD for the convex part to be finite on the feasible set.
        log_det(&d0)?;
        Ok(Self { a_tilde, d0, p_z })
    }

    fn base(&self, q: &Hermitian) -> Hermitian {
        q + &self.d0
    }
}

impl SplitObjective for ReducedProblem {
    fn value(&self, x: &[Hermitian]) -> Result<f64> {
        log_det_ratio(&self.base(&x[0]), &self.a_tilde)
    }

    fn concave_gradient(&self, x: &[Hermitian]) -> Result<Vec<Hermitian>> {
        Ok(vec![inverse_pd(&(&self.base(&x[0]) + &self.a_tilde))?])
    }

    fn convex_value(&self, x: &[Hermitian]) -> Result<f64> {
        Ok(-log_det(&self.base(&x[0]))?)
    }

    fn convex_gradient(&self, x: &[Hermitian]) -> Result<Vec<Hermitian>> {
        Ok(vec![-&inverse_pd(&self.base(&x[0]))?])
    }

    fn project(&self, x: &[Hermitian]) -> Result<Vec<Hermitian>> {
        Ok(vec![psd_trace_projection(&x[0], self.p_z)?])
    }
}

/// One convex subproblem: minimizes `Tr{G·Q'} − log|Q' + D₀|` with
/// `G = (Q'_anchor + D₀ + Ã)⁻¹` over `{Q' ⪰ 0, Tr Q' ≤ p_z}`.
pub fn subproblem_solve(
    a_tilde: &Hermitian,
    d0: &Hermitian,
    p_z: f64,
    q_anchor: &Hermitian,
    opts: &SpcaOptions,
) -> Result<Hermitian> {
    let problem = ReducedProblem::new(a_tilde.clone(), d0.clone(), p_z)?;
    let anchor = [q_anchor.clone()];
    let slope = problem.concave_gradient(&anchor)?;
    let sub = minimize_linearized(&problem, &slope, anchor.to_vec(), opts)?;
    Ok(sub.x.into_iter().next().expect("one block"))
}

/// Optimal reduced covariance by sequential convex approximation, started
/// from uniform power `(p_z / r_z)·I`.
pub fn spca_iterate(
    eff: &EffectiveDecomposition,
    p_z: f64,
    opts: &SpcaOptions,
) -> Result<(Hermitian, SpcaTrace)> {
    let r = eff.r_z;
    spca_iterate_from(eff, p_z, Hermitian::scaled_identity(r, p_z / r as f64), opts)
}

/// As [`spca_iterate`], started from `init` (projected onto the feasible set
/// first). Used to warm-start along a path of nearby budgets.
pub fn spca_iterate_from(
    eff: &EffectiveDecomposition,
    p_z: f64,
    init: Hermitian,
    opts: &SpcaOptions,
) -> Result<(Hermitian, SpcaTrace)> {
    let problem = ReducedProblem::new(eff.a_tilde.clone(), eff.d0.clone(), p_z)?;
    let (x, trace) = minimize_split(&problem, vec![init], opts)?;
    Ok((x.into_iter().next().expect("one block"), trace))
}

/// First-order optimality residual `‖Q' − P(Q' − ∇R̄(Q'))‖_F` of the reduced
/// problem, where `∇R̄ = (Q' + D₀ + Ã)⁻¹ − (Q' + D₀)⁻¹`.
pub fn kkt_residual(q_prime: &Hermitian, a_tilde: &Hermitian, d0: &Hermitian, p_z: f64) -> Result<f64> {
    let problem = ReducedProblem::new(a_tilde.clone(), d0.clone(), p_z)?;
    gradient_mapping_norm(&problem, std::slice::from_ref(q_prime))
}
