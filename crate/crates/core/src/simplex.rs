//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Solves `min c^T x` subject to `A_eq x = b_eq`, `A_le x <= b_le`, `x >= 0`.
//! Problems here are tiny (16 structural variables, a few dozen rows) and
//! highly degenerate, so the tableau is kept dense and pivots follow Bland's
//! smallest-index rule for both the entering and leaving choice.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;
const PHASE_ONE_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    n: usize,
    objective: Vec<f64>,
    eq: Vec<(Vec<f64>, f64)>,
    le: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
    pub pivots: usize,
}

impl LinearProgram {
    /// New minimization over `n` nonnegative variables.
    pub fn minimize(objective: &[f64]) -> Self {
        Self {
            n: objective.len(),
            objective: objective.to_vec(),
            ..Default::default()
        }
    }

    pub fn equality(&mut self, row: &[f64], rhs: f64) -> &mut Self {
        assert_eq!(row.len(), self.n, "row width");
        self.eq.push((row.to_vec(), rhs));
        self
    }

    pub fn at_most(&mut self, row: &[f64], rhs: f64) -> &mut Self {
        assert_eq!(row.len(), self.n, "row width");
        self.le.push((row.to_vec(), rhs));
        self
    }

    pub fn solve(&self) -> Result<LpSolution> {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    /// rows x (cols + 1); last column is the right-hand side
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_struct: usize,
    n_cols: usize,
    first_artificial: usize,
    pivots: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n_slack = lp.le.len();
        let first_artificial = lp.n + n_slack;

        // rows needing an artificial: all equalities and <= rows with negative rhs
        let mut rows: Vec<(Vec<f64>, f64, Option<usize>)> = Vec::new();
        for (i, (row, rhs)) in lp.le.iter().enumerate() {
            let mut full = vec![0.0; first_artificial];
            full[..lp.n].copy_from_slice(row);
            full[lp.n + i] = 1.0;
            if *rhs < 0.0 {
                full.iter_mut().for_each(|v| *v = -*v);
                rows.push((full, -rhs, None));
            } else {
                rows.push((full, *rhs, Some(lp.n + i)));
            }
        }
        for (row, rhs) in &lp.eq {
            let mut full = vec![0.0; first_artificial];
            full[..lp.n].copy_from_slice(row);
            if *rhs < 0.0 {
                full.iter_mut().for_each(|v| *v = -*v);
                rows.push((full, -rhs, None));
            } else {
                rows.push((full, *rhs, None));
            }
        }

        let n_art = rows.iter().filter(|r| r.2.is_none()).count();
        let n_cols = first_artificial + n_art;
        let mut t = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let mut next_art = first_artificial;
        for (mut full, rhs, basic) in rows {
            full.resize(n_cols + 1, 0.0);
            match basic {
                Some(col) => basis.push(col),
                None => {
                    full[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            full[n_cols] = rhs;
            t.push(full);
        }
        Self {
            t,
            basis,
            n_struct: lp.n,
            n_cols,
            first_artificial,
            pivots: 0,
        }
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.n_cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        self.t[row].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Minimizes `cost . x` over columns `< col_limit`; returns the objective value.
    fn optimize(&mut self, cost: &[f64], col_limit: usize) -> Result<f64> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::NoConvergence {
                    iterations: self.pivots,
                    residual: f64::NAN,
                });
            }
            // reduced costs: cost_j - sum_i cost_basis(i) * t[i][j]
            let entering = (0..col_limit).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut r = cost[j];
                for (i, &b) in self.basis.iter().enumerate() {
                    r -= cost[b] * self.t[i][j];
                }
                r < -COST_EPS
            });
            let Some(col) = entering else {
                let value = self
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| cost[b] * self.rhs(i))
                    .sum();
                return Ok(value);
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][col];
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12
                            || ((ratio - br).abs() <= 1e-12 && self.basis[i] < self.basis[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((row, _)) = leave else {
                return Err(Error::Unbounded);
            };
            self.pivot(row, col);
        }
    }

    fn run(mut self, objective: &[f64]) -> Result<LpSolution> {
        if self.n_cols > self.first_artificial {
            let mut phase1 = vec![0.0; self.n_cols];
            phase1[self.first_artificial..]
                .iter_mut()
                .for_each(|v| *v = 1.0);
            let infeasibility = self.optimize(&phase1, self.n_cols)?;
            if infeasibility > PHASE_ONE_TOL {
                return Err(Error::Infeasible);
            }
            self.expel_artificials();
        }

        let mut cost = vec![0.0; self.n_cols];
        cost[..self.n_struct].copy_from_slice(objective);
        let value = self.optimize(&cost, self.first_artificial)?;

        let mut x = vec![0.0; self.n_struct];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                x[b] = self.rhs(i).max(0.0);
            }
        }
        Ok(LpSolution {
            value,
            x,
            pivots: self.pivots,
        })
    }

    /// Pivots zero-level artificials out of the basis; drops redundant rows.
    fn expel_artificials(&mut self) {
        let mut i = 0;
        while i < self.t.len() {
            if self.basis[i] >= self.first_artificial {
                let col = (0..self.first_artificial)
                    .filter(|j| !self.basis.contains(j))
                    .find(|&j| self.t[i][j].abs() > PIVOT_EPS);
                match col {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.t.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}
