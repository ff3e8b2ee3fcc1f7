//! The sixteen response functions of `(X, Y) -> Z` and the polytope of joint
//! response-function distributions consistent with both marginals.
//!
//! Function `k` is `h_k(x, y) = bit_{2x+y}(k)`. Projecting out one parent
//! (fixing `y` or `x`) yields one of the four univariate functions, and
//! averaging the projections over the fixed parent's law gives the mixing
//! matrices `A` (onto `X -> Z`) and `B` (onto `Y -> Z`).

use serde::Serialize;

use crate::scm::{base_weights, lambda_range, LambdaInterval, UnivariateFn};
use crate::trial::BinaryMarginal;

pub const N_FUNCTIONS: usize = 16;

/// Residual tolerance for polytope membership.
pub const MEMBER_TOL: f64 = 1e-9;

/// Row mixing each marginal's weights into the three independent equalities
/// `a0 - a1`, `a0 + a2`, `a0 + a3`.
const REDUCTION: [[f64; 4]; 3] = [
    [1.0, -1.0, 0.0, 0.0],
    [1.0, 0.0, 1.0, 0.0],
    [1.0, 0.0, 0.0, 1.0],
];

/// Which parent a projection holds fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Fix `x`, leaving a function of `y`.
    X,
    /// Fix `y`, leaving a function of `x`.
    Y,
}

/// Value table of all sixteen bivariate functions, `h[k][x][y]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivariateFunctionTable {
    pub h: [[[u8; 2]; 2]; N_FUNCTIONS],
}

impl BivariateFunctionTable {
    pub fn eval(&self, k: usize, x: u8, y: u8) -> u8 {
        self.h[k][x as usize][y as usize]
    }
}

#[inline]
pub fn bivariate(k: usize, x: u8, y: u8) -> u8 {
    ((k >> (2 * x as usize + y as usize)) & 1) as u8
}

pub fn enumerate_bivariate_functions() -> BivariateFunctionTable {
    let mut h = [[[0u8; 2]; 2]; N_FUNCTIONS];
    for (k, table) in h.iter_mut().enumerate() {
        for x in 0..2u8 {
            for y in 0..2u8 {
                table[x as usize][y as usize] = bivariate(k, x, y);
            }
        }
    }
    BivariateFunctionTable { h }
}

pub fn project(k: usize, axis: Axis, value: u8) -> UnivariateFn {
    assert!(k < N_FUNCTIONS, "function index {k} out of range");
    match axis {
        Axis::Y => UnivariateFn::from_outputs(bivariate(k, 0, value), bivariate(k, 1, value)),
        Axis::X => UnivariateFn::from_outputs(bivariate(k, value, 0), bivariate(k, value, 1)),
    }
}

/// Weights over the sixteen bivariate response functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseWeights16(pub [f64; N_FUNCTIONS]);

impl ResponseWeights16 {
    pub fn uniform() -> Self {
        Self([1.0 / N_FUNCTIONS as f64; N_FUNCTIONS])
    }

    pub fn is_distribution(&self, tol: f64) -> bool {
        self.0.iter().all(|&c| c >= -tol) && (self.0.iter().sum::<f64>() - 1.0).abs() <= tol
    }
}

/// Linear description of the consistency polytope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolytopeSpec {
    /// Projection onto the `X -> Z` weights; mixes over `P(Y)`.
    pub a: [[f64; N_FUNCTIONS]; 4],
    /// Projection onto the `Y -> Z` weights; mixes over `P(X)`.
    pub b: [[f64; N_FUNCTIONS]; 4],
    pub a0: [f64; 4],
    pub b0: [f64; 4],
    pub lam_x: LambdaInterval,
    pub lam_y: LambdaInterval,
    pub p_y0: f64,
    pub p_x0: f64,
    /// When set, nothing is known about `P(Y, Z)` beyond `P(Y)`: the `B`
    /// rows are left out of both systems.
    pub y_vacuous: bool,
}

fn mixing_matrix(axis: Axis, p0: f64) -> [[f64; N_FUNCTIONS]; 4] {
    let mut m = [[0.0; N_FUNCTIONS]; 4];
    for k in 0..N_FUNCTIONS {
        let (f0, f1) = (project(k, axis, 0), project(k, axis, 1));
        if f0 == f1 {
            m[f0.index()][k] = 1.0;
        } else {
            m[f0.index()][k] = p0;
            m[f1.index()][k] = 1.0 - p0;
        }
    }
    m
}

/// Builds the polytope for `mx = P(X, Z)` and `my = P(Y, Z)`.
pub fn build_polytope(mx: &BinaryMarginal, my: &BinaryMarginal) -> PolytopeSpec {
    PolytopeSpec {
        a: mixing_matrix(Axis::Y, my.p_w0()),
        b: mixing_matrix(Axis::X, mx.p_w0()),
        a0: base_weights(mx),
        b0: base_weights(my),
        lam_x: lambda_range(mx),
        lam_y: lambda_range(my),
        p_y0: my.p_w0(),
        p_x0: mx.p_w0(),
        y_vacuous: false,
    }
}

/// Polytope that constrains only the `X -> Z` projection, with `P(Y=0) = p_y0`.
pub fn build_x_only_polytope(mx: &BinaryMarginal, p_y0: f64) -> PolytopeSpec {
    PolytopeSpec {
        a: mixing_matrix(Axis::Y, p_y0),
        b: mixing_matrix(Axis::X, mx.p_w0()),
        a0: base_weights(mx),
        b0: [0.0; 4],
        lam_x: lambda_range(mx),
        lam_y: LambdaInterval { lo: 0.0, hi: 1.0 },
        p_y0,
        p_x0: mx.p_w0(),
        y_vacuous: true,
    }
}

/// Dense row system `rows * c (op) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSystem {
    pub rows: Vec<[f64; N_FUNCTIONS]>,
    pub rhs: Vec<f64>,
}

impl RowSystem {
    fn push(&mut self, row: [f64; N_FUNCTIONS], rhs: f64) {
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn dot(row: &[f64; N_FUNCTIONS], c: &[f64; N_FUNCTIONS]) -> f64 {
    row.iter().zip(c).map(|(r, x)| r * x).sum()
}

fn reduce(m: &[[f64; N_FUNCTIONS]; 4], base: &[f64; 4], out: &mut RowSystem) {
    for t in REDUCTION {
        let mut row = [0.0; N_FUNCTIONS];
        for (j, coef) in t.iter().enumerate() {
            for k in 0..N_FUNCTIONS {
                row[k] += coef * m[j][k];
            }
        }
        let rhs = t.iter().zip(base).map(|(c, v)| c * v).sum();
        out.push(row, rhs);
    }
}

fn bands(m: &[[f64; N_FUNCTIONS]; 4], base: &[f64; 4], lam: &LambdaInterval, out: &mut RowSystem) {
    let upper = [
        base[0] + lam.hi,
        base[1] + lam.hi,
        base[2] - lam.lo,
        base[3] - lam.lo,
    ];
    let neg_lower = [
        -base[0] - lam.lo,
        -base[1] - lam.lo,
        -base[2] + lam.hi,
        -base[3] + lam.hi,
    ];
    for j in 0..4 {
        out.push(m[j], upper[j]);
    }
    for j in 0..4 {
        out.push(m[j].map(|v| -v), neg_lower[j]);
    }
}

impl PolytopeSpec {
    /// Equality rows: three per constrained marginal, then the sum-to-one row.
    pub fn equality_system(&self) -> RowSystem {
        let mut sys = RowSystem {
            rows: Vec::with_capacity(7),
            rhs: Vec::with_capacity(7),
        };
        reduce(&self.a, &self.a0, &mut sys);
        if !self.y_vacuous {
            reduce(&self.b, &self.b0, &mut sys);
        }
        sys.push([1.0; N_FUNCTIONS], 1.0);
        sys
    }

    /// Inequality rows `row * c <= rhs`: the `A` band, the `B` band and `-c <= 0`.
    pub fn inequality_system(&self) -> RowSystem {
        let mut sys = RowSystem {
            rows: Vec::with_capacity(32),
            rhs: Vec::with_capacity(32),
        };
        bands(&self.a, &self.a0, &self.lam_x, &mut sys);
        if !self.y_vacuous {
            bands(&self.b, &self.b0, &self.lam_y, &mut sys);
        }
        for k in 0..N_FUNCTIONS {
            let mut row = [0.0; N_FUNCTIONS];
            row[k] = -1.0;
            sys.push(row, 0.0);
        }
        sys
    }

    /// `A c`, the induced `X -> Z` weights.
    pub fn project_x(&self, c: &[f64; N_FUNCTIONS]) -> [f64; 4] {
        std::array::from_fn(|j| dot(&self.a[j], c))
    }

    /// `B c`, the induced `Y -> Z` weights.
    pub fn project_y(&self, c: &[f64; N_FUNCTIONS]) -> [f64; 4] {
        std::array::from_fn(|j| dot(&self.b[j], c))
    }

    /// Largest equality residual and largest inequality violation.
    pub fn violation(&self, c: &[f64; N_FUNCTIONS]) -> (f64, f64) {
        let eq = self.equality_system();
        let eq_res = eq
            .rows
            .iter()
            .zip(&eq.rhs)
            .map(|(r, d)| (dot(r, c) - d).abs())
            .fold(0.0, f64::max);
        let ineq = self.inequality_system();
        let ineq_res = ineq
            .rows
            .iter()
            .zip(&ineq.rhs)
            .map(|(r, d)| (dot(r, c) - d).max(0.0))
            .fold(0.0, f64::max);
        (eq_res, ineq_res)
    }
}

pub fn is_member(c: &ResponseWeights16, spec: &PolytopeSpec) -> bool {
    let (eq, ineq) = spec.violation(&c.0);
    eq <= MEMBER_TOL && ineq <= MEMBER_TOL
}
