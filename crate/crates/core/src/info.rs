//! Information decomposition of the outcome entropy and falsification tests.
//!
//! For a single-treatment model `Z = N_Z(X)` with `X` independent of `N_Z`:
//!
//! ```text
//! H(Z) = I(X:Z) + H(Z|X)          H(Z|X) = I(N_Z:Z | X)
//! H(Z) = I(N_Z:Z) + I(X:Z | N_Z)
//! I(N_Z:Z) = H(Z) - H(X) (p00 + p01 - 2 lambda)
//! ```
//!
//! All quantities are in bits with `0 log 0 = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scm::{counterfactual_influence, lambda_range, response_weights, UnivariateFn};
use crate::trial::{BinaryMarginal, TrivariateTable};

/// Slack below which a hypothesis counts as falsified.
pub const FALSIFY_TOL: f64 = 1e-12;

/// Shannon entropy in bits of a (not necessarily normalized) weight vector,
/// treating its entries as probabilities.
pub fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.log2())
        .sum::<f64>()
}

/// Binary entropy.
pub fn h2(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

/// `I(A:B)` of a joint table `p[a][b]`.
pub fn mutual_information<const N: usize, const M: usize>(p: &[[f64; M]; N]) -> f64 {
    let row: [f64; N] = std::array::from_fn(|a| p[a].iter().sum());
    let col: [f64; M] = std::array::from_fn(|b| p.iter().map(|r| r[b]).sum());
    let mut i = 0.0;
    for a in 0..N {
        for b in 0..M {
            let v = p[a][b];
            if v > 0.0 {
                i += v * (v / (row[a] * col[b])).log2();
            }
        }
    }
    i
}

/// `I(X:Z | Y)` of a table indexed `[x][y][z]`.
pub fn conditional_mutual_information(p: &[[[f64; 2]; 2]; 2]) -> f64 {
    (0..2)
        .map(|y| {
            let slice: [[f64; 2]; 2] = std::array::from_fn(|x| p[x][y]);
            let py: f64 = slice.iter().flatten().sum();
            if py <= 0.0 {
                return 0.0;
            }
            let cond = slice.map(|r| r.map(|v| v / py));
            py * mutual_information(&cond)
        })
        .sum()
}

/// `H(Z | W)` for the marginal.
pub fn conditional_outcome_entropy(m: &BinaryMarginal) -> f64 {
    m.p_w0() * h2(m.p00()) + m.p_w1() * h2(m.p01())
}

/// `I(W:Z)` for the marginal.
pub fn treatment_outcome_information(m: &BinaryMarginal) -> f64 {
    (h2(m.p_z0()) - conditional_outcome_entropy(m)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoReport {
    pub h_z: f64,
    pub i_xz: f64,
    pub i_nz_z: f64,
    pub i_xz_given_nz: f64,
    pub i_nz_z_given_x: f64,
}

/// Joint law `P(N_Z = f, Z = z)` indexed `[f][z]`.
pub fn joint_noise_outcome(m: &BinaryMarginal, lambda: f64) -> Result<[[f64; 2]; 4]> {
    let a = response_weights(m, lambda)?;
    let px = [m.p_w0(), m.p_w1()];
    let mut p = [[0.0; 2]; 4];
    for f in UnivariateFn::ALL {
        for x in 0..2u8 {
            p[f.index()][f.eval(x) as usize] += a.get(f) * px[x as usize];
        }
    }
    Ok(p)
}

/// `I(N_Z:Z)` by enumerating `P(N_Z, Z)`.
pub fn noise_outcome_information_enumerated(m: &BinaryMarginal, lambda: f64) -> Result<f64> {
    Ok(mutual_information(&joint_noise_outcome(m, lambda)?))
}

pub fn info_report(m: &BinaryMarginal, lambda: f64) -> Result<InfoReport> {
    let h_z = h2(m.p_z0());
    let h_z_given_x = conditional_outcome_entropy(m);
    let i_nz_z = h_z - h2(m.p_w0()) * counterfactual_influence(m, lambda)?;
    Ok(InfoReport {
        h_z,
        i_xz: h_z - h_z_given_x,
        i_nz_z,
        i_xz_given_nz: h_z - i_nz_z,
        i_nz_z_given_x: h_z_given_x,
    })
}

/// Closed bit interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BitRange {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoBounds {
    pub nz_z: BitRange,
    pub xz_given_nz: BitRange,
}

/// Attainable ranges of `I(N_Z:Z)` and `I(X:Z | N_Z)` over all models of `m`.
pub fn info_bounds(m: &BinaryMarginal) -> InfoBounds {
    InfoBounds {
        nz_z: BitRange {
            lo: 0.0,
            hi: conditional_outcome_entropy(m),
        },
        xz_given_nz: BitRange {
            lo: treatment_outcome_information(m),
            hi: h2(m.p_w0()),
        },
    }
}

/// Hypothesized-value interval implied by the single-marginal `lambda` range.
pub fn info_bounds_via_lambda(m: &BinaryMarginal) -> Result<InfoBounds> {
    let r = lambda_range(m);
    let (lo, hi) = (info_report(m, r.lo)?, info_report(m, r.hi)?);
    Ok(InfoBounds {
        nz_z: BitRange {
            lo: lo.i_nz_z,
            hi: hi.i_nz_z,
        },
        xz_given_nz: BitRange {
            lo: hi.i_xz_given_nz,
            hi: lo.i_xz_given_nz,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `I(Y:Z) <= I(N_Z:Z)`.
    MarginalInfo,
    /// `I(X:Z | Y) <= I(X:Z | N_Z)`.
    ConditionalInfo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FalsificationVerdict {
    pub falsified: bool,
    pub criterion: Criterion,
    pub observed: f64,
    pub hypothesized: f64,
    /// `hypothesized - observed`; negative means the data exceed the bound.
    pub slack: f64,
}

fn verdict(criterion: Criterion, observed: f64, hypothesized: f64) -> Result<FalsificationVerdict> {
    if !hypothesized.is_finite() || hypothesized < 0.0 {
        return Err(Error::NegativeInformation(hypothesized));
    }
    Ok(FalsificationVerdict {
        falsified: observed > hypothesized + FALSIFY_TOL,
        criterion,
        observed,
        hypothesized,
        slack: hypothesized - observed,
    })
}

/// Tests a hypothesized `I(N_Z:Z)` of the `X -> Z` model against `P(Y, Z)`.
pub fn falsify_by_marginal_info(
    hyp_i_nz_z: f64,
    my: &BinaryMarginal,
) -> Result<FalsificationVerdict> {
    let observed = mutual_information(&my.joint());
    verdict(Criterion::MarginalInfo, observed, hyp_i_nz_z)
}

/// Tests a hypothesized `I(X:Z | N_Z)` against the trivariate law of `(X, Y, Z)`.
pub fn falsify_by_conditional_info(
    hyp_i_xz_given_nz: f64,
    joint: &TrivariateTable,
) -> Result<FalsificationVerdict> {
    let observed = conditional_mutual_information(&joint.cells());
    verdict(Criterion::ConditionalInfo, observed, hyp_i_xz_given_nz)
}
