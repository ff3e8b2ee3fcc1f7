//! Response-function SCM for a single binary treatment `W -> Z`.
//!
//! The noise `N_Z` ranges over the four functions `{0, 1, ID, NOT}` from
//! `{0,1}` to `{0,1}`. Fitting `P(W, Z)` leaves one free parameter, the mass
//! `lambda` on the constant-0 function:
//!
//! ```text
//! a(lambda) = (0, 1 - p00 - p01, p00, p01) + lambda * (1, 1, -1, -1)
//! lambda in [max(0, p00 + p01 - 1), min(p00, p01)]
//! ```
//!
//! PNS is the mass on `ID`, i.e. `p00 - lambda`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trial::BinaryMarginal;

/// Tolerance for interval membership of `lambda`.
pub const LAMBDA_TOL: f64 = 1e-12;

/// The four response functions of one binary parent, in index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnivariateFn {
    Zero = 0,
    One = 1,
    Identity = 2,
    Negation = 3,
}

impl UnivariateFn {
    pub const ALL: [UnivariateFn; 4] = [Self::Zero, Self::One, Self::Identity, Self::Negation];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    /// The function with `f(0) = at0` and `f(1) = at1`.
    pub fn from_outputs(at0: u8, at1: u8) -> Self {
        match (at0, at1) {
            (0, 0) => Self::Zero,
            (1, 1) => Self::One,
            (0, 1) => Self::Identity,
            (1, 0) => Self::Negation,
            _ => panic!("outputs must be bits, got ({at0}, {at1})"),
        }
    }

    pub fn eval(self, w: u8) -> u8 {
        match self {
            Self::Zero => 0,
            Self::One => 1,
            Self::Identity => w,
            Self::Negation => 1 - w,
        }
    }
}

/// Closed interval of admissible `lambda` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaInterval {
    pub lo: f64,
    pub hi: f64,
}

impl LambdaInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite())
            || lo < -LAMBDA_TOL
            || hi > 1.0 + LAMBDA_TOL
            || lo > hi + LAMBDA_TOL
        {
            return Err(Error::LambdaOutOfRange { lambda: lo, lo, hi });
        }
        let lo = lo.clamp(0.0, 1.0);
        Ok(Self {
            lo,
            hi: hi.clamp(lo, 1.0),
        })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_point(&self) -> bool {
        self.width() <= LAMBDA_TOL
    }

    pub fn contains(&self, lambda: f64, tol: f64) -> bool {
        lambda >= self.lo - tol && lambda <= self.hi + tol
    }

    pub fn is_subset_of(&self, other: &LambdaInterval, tol: f64) -> bool {
        self.lo >= other.lo - tol && self.hi <= other.hi + tol
    }

    /// Clamps `lambda` into the interval when it lies within tolerance.
    pub fn admit(&self, lambda: f64) -> Result<f64> {
        if lambda.is_finite() && self.contains(lambda, LAMBDA_TOL) {
            Ok(lambda.clamp(self.lo, self.hi))
        } else {
            Err(Error::LambdaOutOfRange {
                lambda,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }
}

/// Weights over `{0, 1, ID, NOT}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseWeights4(pub [f64; 4]);

impl ResponseWeights4 {
    pub fn get(&self, f: UnivariateFn) -> f64 {
        self.0[f.index()]
    }

    pub fn is_distribution(&self, tol: f64) -> bool {
        self.0.iter().all(|&a| a >= -tol) && (self.0.iter().sum::<f64>() - 1.0).abs() <= tol
    }
}

/// Interval of PNS values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PnsBounds {
    pub lo: f64,
    pub hi: f64,
}

impl PnsBounds {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_subset_of(&self, other: &PnsBounds, tol: f64) -> bool {
        self.lo >= other.lo - tol && self.hi <= other.hi + tol
    }
}

pub fn lambda_range(m: &BinaryMarginal) -> LambdaInterval {
    let hi = m.p00().min(m.p01());
    if m.p00().max(m.p01()) >= 1.0 {
        // exactly a point; `p00 + p01 - 1` would only add rounding noise
        return LambdaInterval { lo: hi, hi };
    }
    let lo = (m.p00() + m.p01() - 1.0).max(0.0);
    LambdaInterval { lo: lo.min(hi), hi }
}

/// `Phi = p00 + p01 - 1`; its sign decides which lower bound is active.
pub fn effect_strength(m: &BinaryMarginal) -> f64 {
    m.p00() + m.p01() - 1.0
}

/// Base vector of the parameterization, `a(0)`.
pub fn base_weights(m: &BinaryMarginal) -> [f64; 4] {
    [0.0, 1.0 - m.p00() - m.p01(), m.p00(), m.p01()]
}

fn admit(m: &BinaryMarginal, lambda: f64) -> Result<f64> {
    lambda_range(m).admit(lambda)
}

pub fn response_weights(m: &BinaryMarginal, lambda: f64) -> Result<ResponseWeights4> {
    let l = admit(m, lambda)?;
    let a0 = base_weights(m);
    // clamp rounding noise; exact values are nonnegative on the interval
    Ok(ResponseWeights4([
        (a0[0] + l).max(0.0),
        (a0[1] + l).max(0.0),
        (a0[2] - l).max(0.0),
        (a0[3] - l).max(0.0),
    ]))
}

pub fn pns_from_lambda(m: &BinaryMarginal, lambda: f64) -> Result<f64> {
    let l = admit(m, lambda)?;
    Ok(m.p00() - l)
}

/// Tian-Pearl bounds `[max(0, p11 - p10), min(p11, p00)]`.
pub fn pns_bounds_single(m: &BinaryMarginal) -> PnsBounds {
    let p11 = 1.0 - m.p01();
    let p10 = 1.0 - m.p00();
    let lo = (p11 - p10).max(0.0);
    let hi = p11.min(m.p00());
    PnsBounds { lo, hi: hi.max(lo) }
}

/// Total mass on `{ID, NOT}`.
pub fn counterfactual_influence(m: &BinaryMarginal, lambda: f64) -> Result<f64> {
    let l = admit(m, lambda)?;
    Ok((m.p00() + m.p01() - 2.0 * l).clamp(0.0, 1.0))
}

/// `P(Z=0 | W=0, Z=1, do(W=1))`.
pub fn prob_sufficient_nonmonotonicity(m: &BinaryMarginal, lambda: f64) -> Result<f64> {
    let l = admit(m, lambda)?;
    let p_z1_w0 = 1.0 - m.p00();
    if p_z1_w0 <= 0.0 {
        return Err(Error::ConditioningEventNull("P(Z=1 | W=0) = 0"));
    }
    Ok((m.p01() - l) / p_z1_w0)
}

/// `P(Z=1 | W=1, Z=0, do(W=0))`.
pub fn prob_necessary_nonmonotonicity(m: &BinaryMarginal, lambda: f64) -> Result<f64> {
    let l = admit(m, lambda)?;
    if m.p01() <= 0.0 {
        return Err(Error::ConditioningEventNull("P(Z=0 | W=1) = 0"));
    }
    Ok((m.p01() - l) / m.p01())
}
