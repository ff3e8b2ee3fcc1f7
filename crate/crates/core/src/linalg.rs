//! Gaussian elimination to reduced row echelon form.

/// Reduced row echelon form of an augmented system `M x = r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rref {
    /// Nonzero rows only, one per pivot.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// Pivot column of each row, increasing.
    pub pivots: Vec<usize>,
    /// Largest right-hand side left on an all-zero row; nonzero means no solution.
    pub inconsistency: f64,
}

impl Rref {
    pub fn free_columns(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|j| !self.pivots.contains(j)).collect()
    }
}

/// Row-reduces with partial pivoting; entries below `tol` count as zero.
pub fn rref(mut rows: Vec<Vec<f64>>, mut rhs: Vec<f64>, tol: f64) -> Rref {
    let n = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        if r == rows.len() {
            break;
        }
        let (best, size) = (r..rows.len())
            .map(|i| (i, rows[i][col].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if size <= tol {
            rows.iter_mut().skip(r).for_each(|row| row[col] = 0.0);
            continue;
        }
        rows.swap(r, best);
        rhs.swap(r, best);
        let p = rows[r][col];
        rows[r].iter_mut().for_each(|v| *v /= p);
        rhs[r] /= p;
        let (pivot_row, pivot_rhs) = (rows[r].clone(), rhs[r]);
        for i in 0..rows.len() {
            if i == r {
                continue;
            }
            let f = rows[i][col];
            if f != 0.0 {
                for (v, pv) in rows[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                rows[i][col] = 0.0;
                rhs[i] -= f * pivot_rhs;
            }
        }
        pivots.push(col);
        r += 1;
    }
    let inconsistency = rhs[r..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    rows.truncate(r);
    rhs.truncate(r);
    Rref {
        rows,
        rhs,
        pivots,
        inconsistency,
    }
}
