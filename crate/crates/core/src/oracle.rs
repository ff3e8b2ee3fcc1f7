//! Brute-force verifiers for small instances.
//!
//! The polytope is reduced without any optimization: rows with nonnegative
//! coefficients and a zero right-hand side pin their support to zero, the
//! equalities are brought to reduced row echelon form, and the remaining
//! free coordinates are enumerated on a regular grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::info::entropy_bits;
use crate::linalg::{rref, Rref};
use crate::polytope::{dot, PolytopeSpec, ResponseWeights16, N_FUNCTIONS};
use crate::scm::{response_weights, LambdaInterval, UnivariateFn};
use crate::trial::BinaryMarginal;

const TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    resolution: u32,
    dimension_cap: usize,
}

impl GridSpec {
    pub fn new(resolution: u32, dimension_cap: usize) -> Result<Self> {
        if resolution < 10 {
            return Err(Error::InvalidConfig(format!(
                "grid resolution {resolution} is below 10"
            )));
        }
        if !(1..=4).contains(&dimension_cap) {
            return Err(Error::InvalidConfig(format!(
                "dimension cap {dimension_cap} is outside 1..=4"
            )));
        }
        Ok(Self {
            resolution,
            dimension_cap,
        })
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn dimension_cap(&self) -> usize {
        self.dimension_cap
    }
}

/// The polytope after elimination: `c[pivot_i] = rhs_i - sum_f row_i[f] c[f]`.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub zeros: [bool; N_FUNCTIONS],
    pub free: Vec<usize>,
    echelon: Rref,
}

fn pin_zeros(row: &[f64; N_FUNCTIONS], rhs: f64, zeros: &mut [bool; N_FUNCTIONS]) -> Result<bool> {
    let before = *zeros;
    let live = |k: usize| !before[k];
    if (0..N_FUNCTIONS)
        .filter(|&k| live(k))
        .any(|k| row[k] < -PIVOT_TOL)
    {
        return Ok(false);
    }
    if rhs < -TOL {
        return Err(Error::Infeasible);
    }
    if rhs > TOL {
        return Ok(false);
    }
    let mut changed = false;
    for k in 0..N_FUNCTIONS {
        if live(k) && row[k] > PIVOT_TOL {
            zeros[k] = true;
            changed = true;
        }
    }
    Ok(changed)
}

/// Eliminates forced zeros and equalities. Fails with `Infeasible` when the
/// reduction itself exposes a contradiction.
pub fn reduce(spec: &PolytopeSpec) -> Result<Reduction> {
    let eq = spec.equality_system();
    let ineq = spec.inequality_system();
    let mut zeros = [false; N_FUNCTIONS];
    loop {
        let masked = |r: &[f64; N_FUNCTIONS]| -> Vec<f64> {
            (0..N_FUNCTIONS)
                .map(|k| if zeros[k] { 0.0 } else { r[k] })
                .collect()
        };
        let echelon = rref(
            eq.rows.iter().map(masked).collect(),
            eq.rhs.clone(),
            PIVOT_TOL,
        );
        if echelon.inconsistency > TOL {
            return Err(Error::Infeasible);
        }
        let mut changed = false;
        let mut candidates: Vec<([f64; N_FUNCTIONS], f64)> = Vec::new();
        let echelon_rows = echelon
            .rows
            .iter()
            .map(|r| std::array::from_fn(|k| r[k]))
            .zip(echelon.rhs.iter().copied());
        for (row, d) in echelon_rows.chain(eq.rows.iter().copied().zip(eq.rhs.iter().copied())) {
            candidates.push((row, d));
            candidates.push((row.map(|v: f64| -v), -d));
        }
        candidates.extend(ineq.rows.iter().copied().zip(ineq.rhs.iter().copied()));
        for (row, d) in &candidates {
            changed |= pin_zeros(row, *d, &mut zeros)?;
        }
        if !changed {
            let free = echelon
                .free_columns(N_FUNCTIONS)
                .into_iter()
                .filter(|&k| !zeros[k])
                .collect();
            return Ok(Reduction {
                zeros,
                free,
                echelon,
            });
        }
    }
}

impl Reduction {
    /// Completes a point from values of the free coordinates.
    pub fn complete(&self, free_values: &[f64]) -> [f64; N_FUNCTIONS] {
        let mut c = [0.0; N_FUNCTIONS];
        for (&k, &v) in self.free.iter().zip(free_values) {
            c[k] = v;
        }
        for ((row, rhs), &p) in self
            .echelon
            .rows
            .iter()
            .zip(&self.echelon.rhs)
            .zip(&self.echelon.pivots)
        {
            c[p] = rhs - self.free.iter().map(|&f| row[f] * c[f]).sum::<f64>();
        }
        c
    }
}

/// Inequality rows with their membership slack, `TOL` scaled by the row norm.
fn scaled_rows(spec: &PolytopeSpec) -> Vec<([f64; N_FUNCTIONS], f64)> {
    let ineq = spec.inequality_system();
    ineq.rows
        .into_iter()
        .zip(ineq.rhs)
        .map(|(r, d)| {
            let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
            (r, d + TOL * norm)
        })
        .collect()
}

/// Visits every admissible grid point, folding with `fold` and merging with `merge`.
fn scan<T, F, M>(spec: &PolytopeSpec, g: &GridSpec, init: T, fold: F, merge: M) -> Result<T>
where
    T: Clone + Send + Sync,
    F: Fn(T, &[f64; N_FUNCTIONS]) -> T + Sync,
    M: Fn(T, T) -> T + Sync,
{
    let red = reduce(spec)?;
    let d = red.free.len();
    if d > g.dimension_cap {
        return Err(Error::DimensionTooHigh {
            dimension: d,
            cap: g.dimension_cap,
        });
    }
    let steps = g.resolution as usize + 1;
    let total = steps.pow(d as u32);
    let h = 1.0 / f64::from(g.resolution);
    let rows = scaled_rows(spec);
    let result = (0..total)
        .into_par_iter()
        .fold(
            || init.clone(),
            |acc, idx| {
                let mut rest = idx;
                let values: Vec<f64> = (0..d)
                    .map(|_| {
                        let i = rest % steps;
                        rest /= steps;
                        i as f64 * h
                    })
                    .collect();
                let c = red.complete(&values);
                if rows.iter().all(|(r, bound)| dot(r, &c) <= *bound) {
                    fold(acc, &c)
                } else {
                    acc
                }
            },
        )
        .reduce(|| init.clone(), &merge);
    Ok(result)
}

/// Grid extremes of `[A c]_0` over the polytope.
pub fn grid_lambda_range(spec: &PolytopeSpec, g: &GridSpec) -> Result<LambdaInterval> {
    let (lo, hi) = scan(
        spec,
        g,
        (f64::INFINITY, f64::NEG_INFINITY),
        |(lo, hi), c| {
            let l = dot(&spec.a[0], c);
            (lo.min(l), hi.max(l))
        },
        |a, b| (a.0.min(b.0), a.1.max(b.1)),
    )?;
    if lo > hi {
        return Err(Error::Infeasible);
    }
    Ok(LambdaInterval {
        lo: lo.max(0.0),
        hi: hi.max(lo.max(0.0)),
    })
}

/// Highest-entropy grid point of the polytope.
pub fn grid_max_entropy(spec: &PolytopeSpec, g: &GridSpec) -> Result<(f64, ResponseWeights16)> {
    let best = scan(
        spec,
        g,
        None::<(f64, [f64; N_FUNCTIONS])>,
        |best, c| {
            let clean = c.map(|v| v.max(0.0));
            let h = entropy_bits(&clean);
            match best {
                Some((b, _)) if b >= h => best,
                _ => Some((h, clean)),
            }
        },
        |a, b| match (a, b) {
            (Some(x), Some(y)) => Some(if x.0 >= y.0 { x } else { y }),
            (x, None) | (None, x) => x,
        },
    )?;
    best.map(|(h, c)| (h, ResponseWeights16(c)))
        .ok_or(Error::Infeasible)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Query {
    /// `P(Z_{w=0} = 0, Z_{w=1} = 1)`.
    Pns,
    /// `P(Z_{w=1} = 0 | W = 0, Z = 1)`.
    SuffNonmono,
    /// `P(Z_{w=0} = 1 | W = 1, Z = 0)`.
    NecNonmono,
}

/// Abduction, action, prediction over the four response functions.
pub fn abduction_oracle(m: &BinaryMarginal, lambda: f64, query: Query) -> Result<f64> {
    let a = response_weights(m, lambda)?;
    let pw = [m.p_w0(), m.p_w1()];
    let (evidence, action, target): (Option<(u8, u8)>, u8, u8) = match query {
        Query::Pns => {
            return Ok(UnivariateFn::ALL
                .iter()
                .filter(|f| f.eval(0) == 0 && f.eval(1) == 1)
                .map(|&f| a.get(f))
                .sum())
        }
        Query::SuffNonmono => (Some((0, 1)), 1, 0),
        Query::NecNonmono => (Some((1, 0)), 0, 1),
    };
    let (w, z) = evidence.expect("conditional query");
    // abduction: P(N_Z = f | W = w, Z = z) by Bayes, with W independent of N_Z
    let joint: Vec<(UnivariateFn, f64)> = UnivariateFn::ALL
        .iter()
        .map(|&f| {
            (
                f,
                if f.eval(w) == z {
                    a.get(f) * pw[w as usize]
                } else {
                    0.0
                },
            )
        })
        .collect();
    let evidence_mass: f64 = joint.iter().map(|(_, p)| p).sum();
    if evidence_mass <= 0.0 {
        return Err(Error::ConditioningEventNull(match query {
            Query::SuffNonmono => "P(W=0, Z=1) = 0",
            _ => "P(W=1, Z=0) = 0",
        }));
    }
    // action and prediction: set W to `action`, read off Z
    Ok(joint
        .iter()
        .filter(|(f, _)| f.eval(action) == target)
        .map(|(_, p)| p / evidence_mass)
        .sum())
}
