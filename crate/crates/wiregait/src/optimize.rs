//! Design-parameter optimization of the leg coupling.
//!
//! Searches for front/back tendon jacobians and tie-off angles that make
//! the two legs' wire-displacement streams agree over the ideal joint
//! sequences, subject to the structural constraints of the drive: zero
//! top-right entry, equal diagonal magnitudes per matrix, shared top-left
//! magnitude across the pair, a Frobenius-norm floor and a max-entry
//! ceiling. Norms are read as Frobenius / max-abs-entry with non-strict
//! boundaries; that is the only reading under which the known boundary
//! design (norm exactly 60, entry exactly 40) is feasible.
//!
//! The constraint structure collapses each matrix to a signed diagonal
//! magnitude plus a free lower-left entry, leaving seven continuous
//! parameters and sixteen diagonal sign patterns. Starts are distributed
//! over the sign patterns and refined by compass pattern search with a
//! feasibility filter; everything is driven by one seeded stream, so a
//! given seed reproduces bit-identical results and more starts can only
//! improve the incumbent.

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gait::{ideal_joint_sequences, GaitParameters};
use crate::leg::{ElbowBranch, JointAngles, LegGeometry};
use crate::tendon::TendonJacobian;

/// Ideal sequences plus the constraint bounds.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    pub qf: Vec<JointAngles>,
    pub qb: Vec<JointAngles>,
    /// Frobenius-norm floor for both matrices (default 60).
    pub norm_lower: f64,
    /// Max-abs-entry ceiling for both matrices (default 40).
    pub entry_upper: f64,
    /// Feasibility tolerance (default 1e-6); boundary-active is allowed.
    pub tolerance: f64,
}

impl DesignProblem {
    pub fn new(qf: Vec<JointAngles>, qb: Vec<JointAngles>) -> Result<Self> {
        if qf.len() != qb.len() || qf.len() < 4 {
            return Err(Error::invalid(
                "design problem",
                "ideal sequences must have equal length of at least 4",
            ));
        }
        Ok(Self {
            qf,
            qb,
            norm_lower: 60.0,
            entry_upper: 40.0,
            tolerance: 1e-6,
        })
    }

    /// Problem built from the gait targets of the given geometry.
    pub fn from_gait(
        geom: &LegGeometry,
        params: &GaitParameters,
        branch: ElbowBranch,
    ) -> Result<Self> {
        let (qf, qb) = ideal_joint_sequences(geom, params, branch)?;
        Self::new(qf, qb)
    }

    /// Default geometry and gait targets.
    pub fn default_instance() -> Self {
        Self::from_gait(
            &LegGeometry::default(),
            &GaitParameters::default(),
            ElbowBranch::default(),
        )
        .expect("default gait targets are reachable")
    }
}

/// A front/back jacobian pair under evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignCandidate {
    pub front: TendonJacobian,
    pub back: TendonJacobian,
}

/// The boundary-active design the optimizer must dominate on any instance:
/// Frobenius norm exactly at the floor, max entry exactly at the ceiling.
pub fn reference_candidate() -> DesignCandidate {
    DesignCandidate {
        front: TendonJacobian::from_rows([[40.0, 0.0], [20.0, -40.0]], [2.2, 1.9]),
        back: TendonJacobian::from_rows([[-40.0, 0.0], [-20.0, 40.0]], [2.2, 1.7]),
    }
}

/// Sum of squared differences between the two wire-displacement streams
/// over the ideal sequences (mm^2).
pub fn objective(problem: &DesignProblem, candidate: &DesignCandidate) -> f64 {
    let mut total = 0.0;
    for (qf, qb) in problem.qf.iter().zip(&problem.qb) {
        let df = Vector2::new(qf.q1 - candidate.front.q0.x, qf.q2 - candidate.front.q0.y);
        let db = Vector2::new(qb.q1 - candidate.back.q0.x, qb.q2 - candidate.back.q0.y);
        let r = candidate.front.g * df - candidate.back.g * db;
        total += r.norm_squared();
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintCheck {
    pub name: &'static str,
    /// Slack toward the bound; negative means violated by that much.
    pub margin: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub checks: Vec<ConstraintCheck>,
}

impl ConstraintReport {
    pub fn feasible(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }
}

fn frobenius(g: &Matrix2<f64>) -> f64 {
    g.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn max_abs_entry(g: &Matrix2<f64>) -> f64 {
    g.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Evaluate every structural constraint with its margin.
pub fn check_constraints(problem: &DesignProblem, candidate: &DesignCandidate) -> ConstraintReport {
    let tol = problem.tolerance;
    let mut checks = Vec::with_capacity(9);
    let mut push = |name: &'static str, margin: f64| {
        checks.push(ConstraintCheck {
            name,
            margin,
            satisfied: margin >= -tol,
        });
    };
    let f = &candidate.front.g;
    let b = &candidate.back.g;
    push("frobenius-front", frobenius(f) - problem.norm_lower);
    push("frobenius-back", frobenius(b) - problem.norm_lower);
    push("max-entry-front", problem.entry_upper - max_abs_entry(f));
    push("max-entry-back", problem.entry_upper - max_abs_entry(b));
    push("top-right-front", -f[(0, 1)].abs());
    push("top-right-back", -b[(0, 1)].abs());
    push("diagonal-front", -(f[(0, 0)].abs() - f[(1, 1)].abs()).abs());
    push("diagonal-back", -(b[(0, 0)].abs() - b[(1, 1)].abs()).abs());
    push(
        "shared-top-left",
        -(f[(0, 0)].abs() - b[(0, 0)].abs()).abs(),
    );
    ConstraintReport { checks }
}

/// Search settings; `max_iters` caps objective evaluations per start.
#[derive(Debug, Clone, Copy)]
pub struct OptimizeOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            starts: 32,
            seed: 0,
            max_iters: 10_000,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DesignSolution {
    pub front: TendonJacobian,
    pub back: TendonJacobian,
    pub objective: f64,
    pub constraint_report: ConstraintReport,
    pub starts_used: usize,
}

const SIGN_PATTERNS: [[f64; 4]; 16] = {
    let mut p = [[0.0f64; 4]; 16];
    let mut i = 0;
    while i < 16 {
        p[i] = [
            if i & 1 == 0 { 1.0 } else { -1.0 },
            if i & 2 == 0 { 1.0 } else { -1.0 },
            if i & 4 == 0 { 1.0 } else { -1.0 },
            if i & 8 == 0 { 1.0 } else { -1.0 },
        ];
        i += 1;
    }
    p
};

/// Continuous parameters: [a, c_front, c_back, q0f1, q0f2, q0b1, q0b2].
fn candidate_from(params: &[f64; 7], signs: &[f64; 4]) -> DesignCandidate {
    let [a, cf, cb, qf1, qf2, qb1, qb2] = *params;
    DesignCandidate {
        front: TendonJacobian::from_rows([[signs[0] * a, 0.0], [cf, signs[1] * a]], [qf1, qf2]),
        back: TendonJacobian::from_rows([[signs[2] * a, 0.0], [cb, signs[3] * a]], [qb1, qb2]),
    }
}

fn params_feasible(problem: &DesignProblem, params: &[f64; 7]) -> bool {
    let tol = problem.tolerance;
    let [a, cf, cb, ..] = *params;
    if a < 1e-3 || a > problem.entry_upper + tol {
        return false;
    }
    if cf.abs() > problem.entry_upper + tol || cb.abs() > problem.entry_upper + tol {
        return false;
    }
    let floor = problem.norm_lower - tol;
    (2.0 * a * a + cf * cf).sqrt() >= floor && (2.0 * a * a + cb * cb).sqrt() >= floor
}

/// Tie-off angles that best match the streams for fixed matrices: the
/// objective depends on q0 only through u = Gf q0f - Gb q0b, minimized at
/// the mean stream difference.
fn analytic_tie_off(
    problem: &DesignProblem,
    front_g: &Matrix2<f64>,
    back_g: &Matrix2<f64>,
) -> Option<[f64; 4]> {
    let n = problem.qf.len() as f64;
    let mut u = Vector2::zeros();
    let mut qb_mean = Vector2::zeros();
    for (qf, qb) in problem.qf.iter().zip(&problem.qb) {
        u += front_g * Vector2::new(qf.q1, qf.q2) - back_g * Vector2::new(qb.q1, qb.q2);
        qb_mean += Vector2::new(qb.q1, qb.q2);
    }
    u /= n;
    qb_mean /= n;
    let q0f = front_g.try_inverse()? * (u + back_g * qb_mean);
    Some([q0f.x, q0f.y, qb_mean.x, qb_mean.y])
}

fn lex_less(a: &([f64; 7], usize), b: &([f64; 7], usize)) -> bool {
    if a.1 != b.1 {
        return a.1 < b.1;
    }
    for (x, y) in a.0.iter().zip(&b.0) {
        if x != y {
            return x < y;
        }
    }
    false
}

/// Multi-start constrained search. Deterministic for a given seed; the best
/// objective is non-increasing in the number of starts.
pub fn optimize(problem: &DesignProblem, opts: &OptimizeOptions) -> Result<DesignSolution> {
    let tol = problem.tolerance;
    // the structure caps the Frobenius norm at sqrt(3) * entry_upper
    let max_norm = (3.0f64).sqrt() * problem.entry_upper;
    if opts.starts == 0 || max_norm + tol < problem.norm_lower || problem.entry_upper < 1e-3 {
        return Err(Error::NoFeasiblePoint {
            starts: opts.starts,
        });
    }

    let a_floor = ((problem.norm_lower * problem.norm_lower
        - problem.entry_upper * problem.entry_upper)
        / 2.0)
        .max(1e-6)
        .sqrt()
        .min(problem.entry_upper)
        .max(1e-3);

    let q_lo = problem
        .qf
        .iter()
        .chain(&problem.qb)
        .flat_map(|q| [q.q1, q.q2])
        .fold(f64::INFINITY, f64::min);
    let q_hi = problem
        .qf
        .iter()
        .chain(&problem.qb)
        .flat_map(|q| [q.q1, q.q2])
        .fold(f64::NEG_INFINITY, f64::max);

    // all starts come from one stream so prefixes are stable across runs
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts: Vec<([f64; 7], usize)> = Vec::with_capacity(opts.starts);
    for s in 0..opts.starts {
        let pattern = s % SIGN_PATTERNS.len();
        let a = rng.gen_range(a_floor..=problem.entry_upper);
        let c_floor = (problem.norm_lower * problem.norm_lower - 2.0 * a * a)
            .max(0.0)
            .sqrt();
        let draw_c = |rng: &mut ChaCha8Rng| {
            let magnitude = rng.gen_range(c_floor..=problem.entry_upper);
            if rng.gen::<bool>() {
                magnitude
            } else {
                -magnitude
            }
        };
        let cf = draw_c(&mut rng);
        let cb = draw_c(&mut rng);
        let q0: [f64; 4] = std::array::from_fn(|_| rng.gen_range(q_lo - 1.0..=q_hi + 1.0));
        let mut params = [a, cf, cb, q0[0], q0[1], q0[2], q0[3]];
        if s < SIGN_PATTERNS.len() {
            // seed each pattern once with the analytically optimal tie-off
            let probe = candidate_from(&params, &SIGN_PATTERNS[pattern]);
            if let Some(q0_star) = analytic_tie_off(problem, &probe.front.g, &probe.back.g) {
                params[3..7].copy_from_slice(&q0_star);
            }
        }
        if params_feasible(problem, &params) {
            starts.push((params, pattern));
        }
    }
    if starts.is_empty() {
        return Err(Error::NoFeasiblePoint {
            starts: opts.starts,
        });
    }

    let scales = [
        problem.entry_upper / 8.0,
        problem.entry_upper / 8.0,
        problem.entry_upper / 8.0,
        0.5,
        0.5,
        0.5,
        0.5,
    ];
    let mut best: Option<(f64, [f64; 7], usize)> = None;
    for &(start, pattern) in &starts {
        let signs = &SIGN_PATTERNS[pattern];
        let mut x = start;
        let mut fx = objective(problem, &candidate_from(&x, signs));
        let mut evals = 1usize;
        let mut step = 1.0f64;
        while step >= opts.tolerance && evals < opts.max_iters {
            let mut improved = false;
            'poll: for dim in 0..7 {
                for dir in [1.0, -1.0] {
                    let mut y = x;
                    y[dim] += dir * step * scales[dim];
                    if !params_feasible(problem, &y) {
                        continue;
                    }
                    let fy = objective(problem, &candidate_from(&y, signs));
                    evals += 1;
                    if fy < fx {
                        x = y;
                        fx = fy;
                        improved = true;
                        break 'poll;
                    }
                    if evals >= opts.max_iters {
                        break 'poll;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        let this = (fx, x, pattern);
        best = Some(match best {
            None => this,
            Some(incumbent) => {
                if this.0 < incumbent.0
                    || (this.0 == incumbent.0
                        && lex_less(&(this.1, this.2), &(incumbent.1, incumbent.2)))
                {
                    this
                } else {
                    incumbent
                }
            }
        });
    }

    let (obj, params, pattern) = best.ok_or(Error::NoFeasiblePoint {
        starts: opts.starts,
    })?;
    let candidate = candidate_from(&params, &SIGN_PATTERNS[pattern]);
    let report = check_constraints(problem, &candidate);
    debug_assert!(report.feasible());
    Ok(DesignSolution {
        front: candidate.front,
        back: candidate.back,
        objective: obj,
        constraint_report: report,
        starts_used: starts.len(),
    })
}
