//! Entropy-maximizing joint model over the consistency polytope.
//!
//! Coordinates that every member of the polytope sets to zero are removed
//! first (one LP per coordinate). On the remaining support the maximizer has
//! the Gibbs form `c_k = exp(-1 + mu . E_k)`, where `E` collects linearly
//! independent equality rows, and `mu` minimizes the convex dual
//!
//! ```text
//! g(mu) = sum_k exp(-1 + mu . E_k) - mu . e
//! ```
//!
//! which Newton's method with backtracking handles in a handful of steps.
//! Band rows violated by the result are promoted to equalities and the dual
//! is solved again.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bounds::{solve_lp, Sense};
use crate::error::{Error, Result};
use crate::info::entropy_bits;
use crate::linalg::rref;
use crate::polytope::{
    build_polytope, build_x_only_polytope, dot, PolytopeSpec, ResponseWeights16, N_FUNCTIONS,
};
use crate::scm::{lambda_range, LAMBDA_TOL};
use crate::trial::BinaryMarginal;

pub const RESIDUAL_TOL: f64 = 1e-7;
pub const GRADIENT_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 10_000;

/// Largest LP value of `c_k` that still counts as "forced to zero".
const ZERO_TOL: f64 = 1e-10;
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxEntResult {
    pub c: ResponseWeights16,
    #[serde(rename = "entropy_bits")]
    pub entropy: f64,
    pub lambda_x: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Coordinates that are zero on the whole polytope.
pub fn forced_zeros(spec: &PolytopeSpec) -> Result<[bool; N_FUNCTIONS]> {
    let (_, first) = match solve_lp(&[0.0; N_FUNCTIONS], spec, Sense::Min) {
        Ok(sol) => sol,
        Err(Error::Infeasible) => {
            return Err(Error::Incompatible {
                violated: vec!["consistency polytope is empty".into()],
            })
        }
        Err(e) => return Err(e),
    };
    let mut seen_positive = first.0.map(|v| v > ZERO_TOL);
    for k in 0..N_FUNCTIONS {
        if seen_positive[k] {
            continue;
        }
        let mut objective = [0.0; N_FUNCTIONS];
        objective[k] = 1.0;
        let (_, c) = solve_lp(&objective, spec, Sense::Max)?;
        for (s, v) in seen_positive.iter_mut().zip(c.0) {
            *s |= v > ZERO_TOL;
        }
    }
    Ok(seen_positive.map(|p| !p))
}

struct Dual {
    e: DMatrix<f64>,
    rhs: DVector<f64>,
}

impl Dual {
    fn weights(&self, mu: &DVector<f64>) -> DVector<f64> {
        let s = self.e.tr_mul(mu);
        s.map(|v| (v - 1.0).min(700.0).exp())
    }

    fn objective(&self, mu: &DVector<f64>) -> f64 {
        self.weights(mu).sum() - mu.dot(&self.rhs)
    }

    /// Returns the support weights, the iteration count and the final gradient norm.
    fn solve(&self) -> (DVector<f64>, usize, f64) {
        let m = self.e.nrows();
        let mut mu = DVector::zeros(m);
        let mut iterations = 0;
        loop {
            let c = self.weights(&mu);
            let grad = &self.e * &c - &self.rhs;
            let gnorm = grad.amax();
            if gnorm <= 1e-14 || iterations >= MAX_ITERATIONS {
                return (c, iterations, gnorm);
            }
            iterations += 1;
            let scaled =
                DMatrix::from_fn(self.e.nrows(), self.e.ncols(), |i, j| self.e[(i, j)] * c[j]);
            let mut hess = &scaled * self.e.transpose();
            let step = loop {
                if let Some(ch) = hess.clone().cholesky() {
                    break ch.solve(&grad);
                }
                let ridge = 1e-12 * hess.diagonal().amax().max(1e-300);
                for i in 0..m {
                    hess[(i, i)] += ridge;
                }
            };
            let g0 = self.objective(&mu);
            let decrement = grad.dot(&step);
            let mut t = 1.0;
            let accepted = loop {
                let trial = &mu - t * &step;
                let g = self.objective(&trial);
                if g <= g0 - 0.25 * t * decrement {
                    break Some(trial);
                }
                // close to the optimum the decrease drowns in rounding of g;
                // fall back to progress in the gradient
                let flat = g <= g0 + 1e-14 * g0.abs().max(1.0);
                if flat && (&self.e * self.weights(&trial) - &self.rhs).amax() < gnorm {
                    break Some(trial);
                }
                t *= 0.5;
                if t < 1e-20 {
                    break None;
                }
            };
            match accepted {
                Some(next) if next != mu => mu = next,
                // no representable progress left: the dual is solved to
                // machine precision
                _ => return (c, iterations, gnorm),
            }
        }
    }
}

fn solve_on_support(
    rows: &[[f64; N_FUNCTIONS]],
    rhs: &[f64],
    support: &[usize],
) -> Result<(ResponseWeights16, usize, f64)> {
    let restricted: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| support.iter().map(|&k| r[k]).collect())
        .collect();
    let reduced = rref(restricted, rhs.to_vec(), RANK_TOL);
    if reduced.inconsistency > RESIDUAL_TOL {
        return Err(Error::Incompatible {
            violated: vec!["equality constraints are inconsistent on the support".into()],
        });
    }
    let dual = Dual {
        e: DMatrix::from_fn(reduced.rows.len(), support.len(), |i, j| reduced.rows[i][j]),
        rhs: DVector::from_vec(reduced.rhs),
    };
    let (w, iterations, gnorm) = dual.solve();
    let mut c = [0.0; N_FUNCTIONS];
    for (&k, v) in support.iter().zip(w.iter()) {
        c[k] = *v;
    }
    Ok((ResponseWeights16(c), iterations, gnorm))
}

/// The unique entropy maximizer over the polytope.
pub fn maxent_scm(spec: &PolytopeSpec) -> Result<MaxEntResult> {
    let zeros = forced_zeros(spec)?;
    let support: Vec<usize> = (0..N_FUNCTIONS).filter(|&k| !zeros[k]).collect();

    let eq = spec.equality_system();
    let (mut rows, mut rhs) = (eq.rows, eq.rhs);
    let bands = spec.inequality_system();
    let band_count = bands.len() - N_FUNCTIONS;
    let mut active = vec![false; band_count];
    let mut total_iterations = 0;

    loop {
        let (c, iterations, gnorm) = solve_on_support(&rows, &rhs, &support)?;
        total_iterations += iterations;
        let mut promoted = false;
        for i in 0..band_count {
            if !active[i] && dot(&bands.rows[i], &c.0) > bands.rhs[i] + RESIDUAL_TOL {
                active[i] = true;
                rows.push(bands.rows[i]);
                rhs.push(bands.rhs[i]);
                promoted = true;
            }
        }
        if promoted {
            continue;
        }
        let (eq_res, ineq_res) = spec.violation(&c.0);
        let residual = eq_res.max(ineq_res);
        if residual > RESIDUAL_TOL || gnorm > GRADIENT_TOL {
            return Err(Error::NoConvergence {
                iterations: total_iterations,
                residual: residual.max(gnorm),
            });
        }
        return Ok(MaxEntResult {
            entropy: entropy_bits(&c.0),
            lambda_x: dot(&spec.a[0], &c.0),
            c,
            iterations: total_iterations,
            residual,
        });
    }
}

/// MaxEnt choice of `lambda` for a single marginal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum LambdaEstimate {
    /// Maximizer of `H(a(lambda))` inside a nondegenerate interval.
    Interior(f64),
    /// The interval is a single point.
    PointIdentified(f64),
}

impl LambdaEstimate {
    pub fn value(self) -> f64 {
        match self {
            Self::Interior(v) | Self::PointIdentified(v) => v,
        }
    }
}

/// `argmax H(a(lambda))`, which solves `(p00 - l)(p01 - l) = l (1 - p00 - p01 + l)`,
/// i.e. `lambda* = p00 p01`.
pub fn maxent_lambda_single(m: &BinaryMarginal) -> LambdaEstimate {
    let r = lambda_range(m);
    if r.width() <= LAMBDA_TOL {
        return LambdaEstimate::PointIdentified(r.lo);
    }
    LambdaEstimate::Interior((m.p00() * m.p01()).clamp(r.lo, r.hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvidenceEntry {
    pub id: String,
    pub entropy_after: f64,
    pub entropy_baseline: f64,
    pub entropy_reduction: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EvidenceRanking {
    /// Compatible candidates, largest entropy reduction first.
    pub ranked: Vec<EvidenceEntry>,
    /// Candidates that contradict `P(X, Z)`: conclusive, unbounded evidence.
    pub incompatible: Vec<String>,
    /// Candidates the optimizer failed on, with the reason.
    pub failed: Vec<(String, String)>,
    pub baseline: &'static str,
}

/// Describes how each candidate's baseline is built.
pub const BASELINE_DESCRIPTION: &str =
    "maxent over the X-only polytope with the candidate's P(Y=0); no constraint on P(Y,Z)";

/// Orders candidate `P(Y, Z)` datasets by how much they shrink the MaxEnt
/// entropy relative to knowing only `P(X, Z)` and `P(Y)`.
pub fn rank_evidence(
    mx: &BinaryMarginal,
    candidates: &[(String, BinaryMarginal)],
) -> EvidenceRanking {
    let mut out = EvidenceRanking {
        baseline: BASELINE_DESCRIPTION,
        ..Default::default()
    };
    for (id, my) in candidates {
        let after = maxent_scm(&build_polytope(mx, my));
        let baseline = maxent_scm(&build_x_only_polytope(mx, my.p_w0()));
        match (after, baseline) {
            (Ok(a), Ok(b)) => out.ranked.push(EvidenceEntry {
                id: id.clone(),
                entropy_after: a.entropy,
                entropy_baseline: b.entropy,
                entropy_reduction: b.entropy - a.entropy,
            }),
            (Err(Error::Incompatible { .. }), _) => out.incompatible.push(id.clone()),
            (Err(e), _) | (_, Err(e)) => out.failed.push((id.clone(), e.to_string())),
        }
    }
    out.ranked
        .sort_by(|a, b| b.entropy_reduction.total_cmp(&a.entropy_reduction));
    out
}
