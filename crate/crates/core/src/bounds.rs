//! Bounds on `lambda_X` (and hence PNS) after merging `P(X, Z)` with `P(Y, Z)`.
//!
//! The general route solves linear programs over the consistency polytope.
//! When `P(Y, Z)` has a degenerate conditional (`P(Z=0 | Y=y)` is 0 or 1) the
//! lower bound has the closed form
//!
//! ```text
//! lambda_min' = max(lambda_min, Phi + D0, D1)
//! D0 = [p'00 = 0] P(Y=0) + [p'01 = 0] P(Y=1)
//! D1 = [p'00 = 1] P(Y=0) + [p'01 = 1] P(Y=1)
//! ```
//!
//! and the upper bound `lambda_max` is never tightened.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::polytope::{
    build_polytope, dot, is_member, PolytopeSpec, ResponseWeights16, N_FUNCTIONS,
};
use crate::scm::{effect_strength, lambda_range, pns_bounds_single, LambdaInterval, PnsBounds};
use crate::simplex::LinearProgram;
use crate::trial::{BinaryMarginal, PROB_TOL};

/// Tolerance used when evaluating the compatibility inequalities.
pub const COMPAT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

/// Optimizes `objective . c` over the polytope. The returned point is checked
/// for membership before it is handed back.
pub fn solve_lp(
    objective: &[f64; N_FUNCTIONS],
    spec: &PolytopeSpec,
    sense: Sense,
) -> Result<(f64, ResponseWeights16)> {
    let cost: Vec<f64> = match sense {
        Sense::Min => objective.to_vec(),
        Sense::Max => objective.iter().map(|v| -v).collect(),
    };
    let mut lp = LinearProgram::minimize(&cost);
    let eq = spec.equality_system();
    for (row, rhs) in eq.rows.iter().zip(&eq.rhs) {
        lp.equality(row, *rhs);
    }
    // nonnegativity is built into the solver; only the band rows are passed
    let ineq = spec.inequality_system();
    for (row, rhs) in ineq.rows.iter().zip(&ineq.rhs) {
        if row.iter().filter(|v| **v != 0.0).count() == 1
            && *rhs == 0.0
            && row.iter().any(|v| *v < 0.0)
        {
            continue;
        }
        lp.at_most(row, *rhs);
    }
    let sol = lp.solve()?;
    let mut c = [0.0; N_FUNCTIONS];
    c.copy_from_slice(&sol.x);
    let c = ResponseWeights16(c);
    if !is_member(&c, spec) {
        let (eq_res, ineq_res) = spec.violation(&c.0);
        return Err(Error::NoConvergence {
            iterations: sol.pivots,
            residual: eq_res.max(ineq_res),
        });
    }
    Ok((dot(objective, &c.0), c))
}

/// True when the polytope has at least one member.
pub fn is_feasible(spec: &PolytopeSpec) -> Result<bool> {
    match solve_lp(&[0.0; N_FUNCTIONS], spec, Sense::Min) {
        Ok(_) => Ok(true),
        Err(Error::Infeasible) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Raw LP minimum and maximum of `[A c]_0` over the polytope.
pub fn lp_lambda_extremes(spec: &PolytopeSpec) -> Result<LambdaInterval> {
    let row = spec.a[0];
    let (lo, _) = solve_lp(&row, spec, Sense::Min)?;
    let (hi, _) = solve_lp(&row, spec, Sense::Max)?;
    LambdaInterval::new(lo.max(0.0), hi.max(lo))
}

/// `lambda_X` interval consistent with both marginals, by linear programming.
pub fn restricted_lambda_range(mx: &BinaryMarginal, my: &BinaryMarginal) -> Result<LambdaInterval> {
    let spec = build_polytope(mx, my);
    let row = spec.a[0];
    match solve_lp(&row, &spec, Sense::Min) {
        Ok((lo, _)) => {
            let single = lambda_range(mx);
            let lo = lo.max(single.lo).min(single.hi);
            Ok(LambdaInterval { lo, hi: single.hi })
        }
        Err(Error::Infeasible) => Err(Error::Incompatible {
            violated: incompatibility_reasons(mx, my),
        }),
        Err(e) => Err(e),
    }
}

/// Which conditionals of `P(Y, Z)` sit at 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct DegeneracyProfile {
    pub p00_is_0: bool,
    pub p01_is_0: bool,
    pub p00_is_1: bool,
    pub p01_is_1: bool,
}

impl DegeneracyProfile {
    pub fn of(my: &BinaryMarginal) -> Self {
        Self {
            p00_is_0: my.p00() <= PROB_TOL,
            p01_is_0: my.p01() <= PROB_TOL,
            p00_is_1: my.p00() >= 1.0 - PROB_TOL,
            p01_is_1: my.p01() >= 1.0 - PROB_TOL,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.p00_is_0 || self.p01_is_0 || self.p00_is_1 || self.p01_is_1
    }

    /// `D0`, the mass of `Y` values under which `Z = 1` is certain.
    pub fn d0(&self, my: &BinaryMarginal) -> f64 {
        f64::from(u8::from(self.p00_is_0)) * my.p_w0()
            + f64::from(u8::from(self.p01_is_0)) * my.p_w1()
    }

    /// `D1`, the mass of `Y` values under which `Z = 0` is certain.
    pub fn d1(&self, my: &BinaryMarginal) -> f64 {
        f64::from(u8::from(self.p00_is_1)) * my.p_w0()
            + f64::from(u8::from(self.p01_is_1)) * my.p_w1()
    }
}

/// Outcome of a compatibility check with the failed conditions spelled out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Compatibility {
    pub compatible: bool,
    pub violated: Vec<String>,
}

struct Check {
    label: String,
    lhs: f64,
    rhs: f64,
}

impl Check {
    fn le(label: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            label: label.to_owned(),
            lhs,
            rhs,
        }
    }

    fn holds(&self) -> bool {
        self.lhs <= self.rhs + COMPAT_TOL
    }

    fn describe(&self) -> String {
        format!("{} ({} vs {})", self.label, self.lhs, self.rhs)
    }
}

fn outcome_check(mx: &BinaryMarginal, my: &BinaryMarginal) -> Option<String> {
    let (zx, zy) = (mx.p_z0(), my.p_z0());
    ((zx - zy).abs() > COMPAT_TOL).then(|| {
        format!("outcome marginal mismatch: P(Z=0) is {zx} from P(X,Z) but {zy} from P(Y,Z)")
    })
}

fn incompatibility_reasons(mx: &BinaryMarginal, my: &BinaryMarginal) -> Vec<String> {
    if DegeneracyProfile::of(my).is_degenerate() {
        if let Ok(c) = degenerate_compatibility(mx, my) {
            if !c.violated.is_empty() {
                return c.violated;
            }
        }
    }
    let mut v: Vec<String> = outcome_check(mx, my).into_iter().collect();
    if v.is_empty() {
        v.push("no joint response-function distribution reproduces both marginals".into());
    }
    v
}

/// Compatibility certificate for a degenerate `P(Y, Z)`: a finite list of
/// inequalities in `lambda_max`, `p00`, `p01` and `P(Y)`, plus agreement of
/// the two implied outcome marginals.
pub fn degenerate_compatibility(mx: &BinaryMarginal, my: &BinaryMarginal) -> Result<Compatibility> {
    let prof = DegeneracyProfile::of(my);
    if !prof.is_degenerate() {
        return Err(Error::NotDegenerate);
    }
    let (p00, p01) = (mx.p00(), mx.p01());
    let lmax = lambda_range(mx).hi;
    let phi = effect_strength(mx);
    let (py0, py1) = (my.p_w0(), my.p_w1());

    let mut checks = Vec::new();
    // Z = 1 is certain under one value of Y; `q` is the mass of the other value
    let z1_certain = |q: f64, name: &str, checks: &mut Vec<Check>| {
        checks.push(Check::le(&format!("lambda_max <= {name}"), lmax, q));
        checks.push(Check::le(
            &format!("p01 - lambda_max <= {name}"),
            p01 - lmax,
            q,
        ));
        checks.push(Check::le(
            &format!("p00 - lambda_max <= {name}"),
            p00 - lmax,
            q,
        ));
        checks.push(Check::le(
            &format!("p00 + p01 - {name} <= lambda_max"),
            p00 + p01 - q,
            lmax,
        ));
    };
    if prof.p01_is_0 {
        z1_certain(py0, "P(Y=0)", &mut checks);
    }
    if prof.p00_is_0 {
        z1_certain(py1, "P(Y=1)", &mut checks);
    }
    // Z = 0 is certain under the value of Y with mass `other`; `q` is the rest
    let z0_certain = |q: f64, name: &str, other: f64, other_name: &str, checks: &mut Vec<Check>| {
        checks.push(Check::le(
            &format!("lambda_max - Phi <= {name}"),
            lmax - phi,
            q,
        ));
        checks.push(Check::le(
            &format!("p00 - lambda_max <= {name}"),
            p00 - lmax,
            q,
        ));
        checks.push(Check::le(
            &format!("p01 - lambda_max <= {name}"),
            p01 - lmax,
            q,
        ));
        checks.push(Check::le(
            &format!("{other_name} <= lambda_max"),
            other,
            lmax,
        ));
    };
    if prof.p00_is_1 {
        z0_certain(py1, "P(Y=1)", py0, "P(Y=0)", &mut checks);
    }
    if prof.p01_is_1 {
        z0_certain(py0, "P(Y=0)", py1, "P(Y=1)", &mut checks);
    }

    let mut violated: Vec<String> = outcome_check(mx, my).into_iter().collect();
    violated.extend(checks.iter().filter(|c| !c.holds()).map(Check::describe));
    Ok(Compatibility {
        compatible: violated.is_empty(),
        violated,
    })
}

/// Compatibility of any pair: the closed-form certificate when `P(Y, Z)` is
/// degenerate, LP feasibility otherwise.
pub fn check_compatibility(mx: &BinaryMarginal, my: &BinaryMarginal) -> Result<Compatibility> {
    if DegeneracyProfile::of(my).is_degenerate() {
        return degenerate_compatibility(mx, my);
    }
    if is_feasible(&build_polytope(mx, my))? {
        Ok(Compatibility {
            compatible: true,
            violated: Vec::new(),
        })
    } else {
        Ok(Compatibility {
            compatible: false,
            violated: incompatibility_reasons(mx, my),
        })
    }
}

fn require_compatible(mx: &BinaryMarginal, my: &BinaryMarginal) -> Result<DegeneracyProfile> {
    let c = degenerate_compatibility(mx, my)?;
    if !c.compatible {
        return Err(Error::Incompatible {
            violated: c.violated,
        });
    }
    Ok(DegeneracyProfile::of(my))
}

pub fn closed_form_lambda_min(mx: &BinaryMarginal, my: &BinaryMarginal) -> Result<f64> {
    let prof = require_compatible(mx, my)?;
    let base = lambda_range(mx);
    let lo = base
        .lo
        .max(effect_strength(mx) + prof.d0(my))
        .max(prof.d1(my));
    Ok(lo.min(base.hi))
}

/// Which lower bound on `lambda_X` is active after merging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingCase {
    /// The single-marginal lower bound survives.
    None,
    /// `Phi + D0` binds.
    PhiD0,
    /// `D1` binds.
    D1,
    /// Non-degenerate `P(Y, Z)` and the LP tightens the lower bound.
    Lp,
    /// The marginals admit no joint model.
    Infeasible,
}

impl BindingCase {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::PhiD0 => "phi_d0",
            Self::D1 => "d1",
            Self::Lp => "lp",
            Self::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TightenedBounds {
    pub lambda: LambdaInterval,
    pub pns: PnsBounds,
    pub binding_case: BindingCase,
}

fn pns_of(mx: &BinaryMarginal, lambda: &LambdaInterval) -> PnsBounds {
    let lo = (mx.p00() - lambda.hi).max(0.0);
    PnsBounds {
        lo,
        hi: (mx.p00() - lambda.lo).max(lo),
    }
}

/// PNS bounds under both marginals.
pub fn tightened_pns_bounds(mx: &BinaryMarginal, my: &BinaryMarginal) -> Result<TightenedBounds> {
    let base = lambda_range(mx);
    let prof = DegeneracyProfile::of(my);
    if prof.is_degenerate() {
        let prof = require_compatible(mx, my)?;
        let (d0, d1) = (prof.d0(my), prof.d1(my));
        let phi_d0 = effect_strength(mx) + d0;
        let lo = closed_form_lambda_min(mx, my)?;
        let binding_case = if lo <= base.lo + PROB_TOL {
            BindingCase::None
        } else if phi_d0 >= d1 {
            BindingCase::PhiD0
        } else {
            BindingCase::D1
        };
        let p11 = 1.0 - mx.p01();
        let p10 = 1.0 - mx.p00();
        let pns_lo = (p11 - p10).max(0.0);
        let pns_hi = (mx.p00() - d1).min(p11 - d0).max(pns_lo);
        return Ok(TightenedBounds {
            lambda: LambdaInterval { lo, hi: base.hi },
            pns: PnsBounds {
                lo: pns_lo,
                hi: pns_hi,
            },
            binding_case,
        });
    }
    let lambda = restricted_lambda_range(mx, my)?;
    let binding_case = if lambda.lo > base.lo + COMPAT_TOL {
        BindingCase::Lp
    } else {
        BindingCase::None
    };
    Ok(TightenedBounds {
        lambda,
        pns: pns_of(mx, &lambda),
        binding_case,
    })
}

/// Everything the bounds computation has to say about a pair of marginals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub lambda: Option<[f64; 2]>,
    pub pns: Option<[f64; 2]>,
    pub compatible: bool,
    pub binding_case: BindingCase,
    pub single_marginal_lambda: [f64; 2],
    pub single_marginal_pns: [f64; 2],
    pub degenerate: bool,
    pub violated: Vec<String>,
}

pub fn bounds_report(mx: &BinaryMarginal, my: &BinaryMarginal) -> Result<BoundsReport> {
    let single = lambda_range(mx);
    let single_pns = pns_bounds_single(mx);
    let degenerate = DegeneracyProfile::of(my).is_degenerate();
    let mut report = BoundsReport {
        lambda: None,
        pns: None,
        compatible: false,
        binding_case: BindingCase::Infeasible,
        single_marginal_lambda: [single.lo, single.hi],
        single_marginal_pns: [single_pns.lo, single_pns.hi],
        degenerate,
        violated: Vec::new(),
    };
    match tightened_pns_bounds(mx, my) {
        Ok(t) => {
            report.lambda = Some([t.lambda.lo, t.lambda.hi]);
            report.pns = Some([t.pns.lo, t.pns.hi]);
            report.compatible = true;
            report.binding_case = t.binding_case;
        }
        Err(Error::Incompatible { violated }) => report.violated = violated,
        Err(e) => return Err(e),
    }
    Ok(report)
}
