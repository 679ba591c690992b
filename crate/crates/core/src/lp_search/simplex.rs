//! Dense primal simplex for `max c·x  s.t.  A x ≤ b, x ≥ 0` with `b > 0`,
//! started from the all-slack basis.
//!
//! Rows are scaled to unit right-hand side and columns to unit max-norm
//! before pivoting. The entering variable is the most negative reduced
//! cost; after a run of degenerate pivots the solver switches to the
//! smallest-index rule for both entering and leaving variables, which
//! rules out cycling, and switches back after the next strict improvement.
//! The tableau is rebuilt from the current basis at a fixed cadence and
//! before optimality is accepted, so rounding cannot accumulate across
//! thousands of pivots.

use serde::{Deserialize, Serialize};

const PIVOT_TOL: f64 = 1e-11;
const REDUCED_COST_TOL: f64 = 1e-12;
/// Consecutive degenerate pivots tolerated before smallest-index pivoting.
const STALL_LIMIT: usize = 50;
/// Pivots between tableau rebuilds.
const REINVERT_EVERY: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LpStatus {
    Optimal,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexOutput {
    pub x: Vec<f64>,
    pub status: LpStatus,
    pub iterations: usize,
    /// Rows whose slack is zero at the returned vertex.
    pub active_rows: Vec<usize>,
}

struct Tableau {
    rows: usize,
    cols: usize,
    width: usize,
    /// Scaled constraint matrix, row-major `rows × cols`.
    a: Vec<f64>,
    cost: Vec<f64>,
    tab: Vec<f64>,
    /// Reduced-cost row in the form `z_k = c_B B⁻¹ A_k − c_k`.
    z: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn column(&self, var: usize, row: usize) -> f64 {
        if var < self.cols {
            self.a[row * self.cols + var]
        } else if var - self.cols == row {
            1.0
        } else {
            0.0
        }
    }

    /// Recomputes `B⁻¹[A I 1]` and the reduced costs from the basis alone.
    /// Leaves the tableau untouched when the basis matrix looks singular.
    fn reinvert(&mut self) -> bool {
        let (m, w) = (self.rows, self.width);
        let mut lu = vec![0.0; m * m];
        for (r, &var) in self.basis.iter().enumerate() {
            for i in 0..m {
                lu[i * m + r] = self.column(var, i);
            }
        }
        let mut rhs = vec![0.0; m * w];
        for i in 0..m {
            for k in 0..self.cols {
                rhs[i * w + k] = self.a[i * self.cols + k];
            }
            rhs[i * w + self.cols + i] = 1.0;
            rhs[i * w + w - 1] = 1.0;
        }
        // Gaussian elimination with partial pivoting on [B | rhs].
        for col in 0..m {
            let p = (col..m)
                .max_by(|&x, &y| lu[x * m + col].abs().total_cmp(&lu[y * m + col].abs()))
                .unwrap();
            if lu[p * m + col].abs() < 1e-13 {
                return false;
            }
            if p != col {
                for k in 0..m {
                    lu.swap(p * m + k, col * m + k);
                }
                for k in 0..w {
                    rhs.swap(p * w + k, col * w + k);
                }
            }
            let inv = 1.0 / lu[col * m + col];
            for i in 0..m {
                if i == col {
                    continue;
                }
                let f = lu[i * m + col] * inv;
                if f == 0.0 {
                    continue;
                }
                for k in col..m {
                    lu[i * m + k] -= f * lu[col * m + k];
                }
                let (src, dst) = if i < col {
                    let (lo, hi) = rhs.split_at_mut(col * w);
                    (&hi[..w], &mut lo[i * w..(i + 1) * w])
                } else {
                    let (lo, hi) = rhs.split_at_mut(i * w);
                    (&lo[col * w..(col + 1) * w], &mut hi[..w])
                };
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= f * s;
                }
            }
        }
        for r in 0..m {
            let inv = 1.0 / lu[r * m + r];
            for v in &mut rhs[r * w..(r + 1) * w] {
                *v *= inv;
            }
            rhs[r * w + self.basis[r]] = 1.0;
        }
        let mut z = vec![0.0; w];
        for k in 0..self.cols {
            z[k] = -self.cost[k];
        }
        for (r, &var) in self.basis.iter().enumerate() {
            let cb = if var < self.cols { self.cost[var] } else { 0.0 };
            if cb != 0.0 {
                for k in 0..w {
                    z[k] += cb * rhs[r * w + k];
                }
            }
        }
        for &var in &self.basis {
            z[var] = 0.0;
        }
        self.tab = rhs;
        self.z = z;
        true
    }

    fn pivot(&mut self, r: usize, k: usize) {
        let w = self.width;
        let inv = 1.0 / self.tab[r * w + k];
        let prow: Vec<f64> = self.tab[r * w..(r + 1) * w]
            .iter()
            .map(|v| v * inv)
            .collect();
        self.tab[r * w..(r + 1) * w].copy_from_slice(&prow);
        self.tab[r * w + k] = 1.0;
        for j in 0..self.rows {
            if j == r {
                continue;
            }
            let row = &mut self.tab[j * w..(j + 1) * w];
            let factor = row[k];
            if factor != 0.0 {
                for (v, p) in row.iter_mut().zip(&prow) {
                    *v -= factor * p;
                }
                row[k] = 0.0;
            }
        }
        let factor = self.z[k];
        if factor != 0.0 {
            for (v, p) in self.z.iter_mut().zip(&prow) {
                *v -= factor * p;
            }
            self.z[k] = 0.0;
        }
        self.basis[r] = k;
    }
}

/// Solves the LP given in row-major `a` (`rows × cols`). Every `b` entry
/// must be positive.
pub fn solve_dense(c: &[f64], a: &[f64], b: &[f64], iteration_cap: usize) -> SimplexOutput {
    let cols = c.len();
    let rows = b.len();
    debug_assert_eq!(a.len(), rows * cols);
    if cols == 0 || rows == 0 {
        let status = if cols > 0 && c.iter().any(|&ci| ci > 0.0) {
            LpStatus::Unbounded
        } else {
            LpStatus::Optimal
        };
        return SimplexOutput {
            x: vec![0.0; cols],
            status,
            iterations: 0,
            active_rows: Vec::new(),
        };
    }

    let row_scale: Vec<f64> = b.iter().map(|&bj| 1.0 / bj).collect();
    let col_scale: Vec<f64> = (0..cols)
        .map(|i| {
            let m = (0..rows)
                .map(|j| (a[j * cols + i] * row_scale[j]).abs())
                .fold(0.0, f64::max);
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        })
        .collect();
    let cost: Vec<f64> = c.iter().zip(&col_scale).map(|(ci, si)| ci * si).collect();
    let cost_tol = REDUCED_COST_TOL
        * cost
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);

    let mut scaled = vec![0.0; rows * cols];
    for j in 0..rows {
        for i in 0..cols {
            scaled[j * cols + i] = a[j * cols + i] * row_scale[j] * col_scale[i];
        }
    }
    // Columns: structural 0..cols, slacks cols..cols+rows, rhs last.
    let width = cols + rows + 1;
    let mut t = Tableau {
        rows,
        cols,
        width,
        a: scaled,
        cost,
        tab: Vec::new(),
        z: Vec::new(),
        basis: (cols..cols + rows).collect(),
    };
    t.reinvert();

    let mut iterations = 0;
    let mut stalled = 0;
    let mut since_rebuild = 0;
    let status = loop {
        let bland = stalled >= STALL_LIMIT;
        let entering = if bland {
            (0..cols + rows).find(|&k| t.z[k] < -cost_tol)
        } else {
            (0..cols + rows)
                .filter(|&k| t.z[k] < -cost_tol)
                .min_by(|&x, &y| t.z[x].total_cmp(&t.z[y]))
        };
        let Some(k) = entering else {
            // Accept optimality only on a freshly rebuilt tableau.
            if since_rebuild > 0 && t.reinvert() {
                since_rebuild = 0;
                continue;
            }
            break LpStatus::Optimal;
        };
        if iterations >= iteration_cap {
            break LpStatus::IterationLimit;
        }

        let rhs = |j: usize| t.tab[j * width + width - 1].max(0.0);
        let mut min_ratio = f64::INFINITY;
        for j in 0..rows {
            let coef = t.tab[j * width + k];
            if coef > PIVOT_TOL {
                min_ratio = min_ratio.min(rhs(j) / coef);
            }
        }
        if min_ratio.is_infinite() {
            break LpStatus::Unbounded;
        }
        let slack = 1e-12 * min_ratio.max(1e-300);
        let mut leave: Option<usize> = None;
        for j in 0..rows {
            let coef = t.tab[j * width + k];
            if coef <= PIVOT_TOL || rhs(j) / coef > min_ratio + slack {
                continue;
            }
            leave = match leave {
                None => Some(j),
                Some(l) => {
                    let better = if bland {
                        t.basis[j] < t.basis[l]
                    } else {
                        coef > t.tab[l * width + k]
                    };
                    Some(if better { j } else { l })
                }
            };
        }
        let r = leave.expect("a row attains the minimum ratio");

        if min_ratio > 1e-12 {
            stalled = 0;
        } else {
            stalled += 1;
        }
        t.pivot(r, k);
        iterations += 1;
        since_rebuild += 1;
        if since_rebuild >= REINVERT_EVERY && t.reinvert() {
            since_rebuild = 0;
        }
    };

    let mut x = vec![0.0; cols];
    let mut slack = vec![0.0; rows];
    for (j, &var) in t.basis.iter().enumerate() {
        let v = t.tab[j * width + width - 1].max(0.0);
        if var < cols {
            x[var] = v * col_scale[var];
        } else {
            slack[var - cols] = v;
        }
    }
    let active_rows = (0..rows).filter(|&j| slack[j] <= 1e-9).collect();
    SimplexOutput {
        x,
        status,
        iterations,
        active_rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y  s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  →  (2, 6), 36.
        let c = [3.0, 5.0];
        let a = [1.0, 0.0, 0.0, 2.0, 3.0, 2.0];
        let b = [4.0, 12.0, 18.0];
        let out = solve_dense(&c, &a, &b, 100);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.x[0] - 2.0).abs() < 1e-12 && (out.x[1] - 6.0).abs() < 1e-12);
        assert_eq!(out.active_rows, vec![1, 2]);
    }

    #[test]
    fn zero_objective() {
        let out = solve_dense(&[0.0, 0.0], &[1.0, 1.0], &[1.0], 10);
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.x, vec![0.0, 0.0]);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn unbounded_column() {
        let out = solve_dense(&[1.0, 1.0], &[1.0, 0.0], &[1.0], 10);
        assert_eq!(out.status, LpStatus::Unbounded);
    }

    #[test]
    fn iteration_cap() {
        let c = [3.0, 5.0];
        let a = [1.0, 0.0, 0.0, 2.0, 3.0, 2.0];
        let b = [4.0, 12.0, 18.0];
        let out = solve_dense(&c, &a, &b, 1);
        assert_eq!(out.status, LpStatus::IterationLimit);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example under the largest-coefficient rule.
        let c = [10.0, -57.0, -9.0, -24.0];
        let a = [
            0.5, -5.5, -2.5, 9.0, //
            0.5, -1.5, -0.5, 1.0, //
            1.0, 0.0, 0.0, 0.0,
        ];
        // Degenerate right sides are replaced by tiny positive ones.
        let b = [1e-9, 1e-9, 1.0];
        let out = solve_dense(&c, &a, &b, 1000);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!(out.iterations < 1000);
        let obj: f64 = c.iter().zip(&out.x).map(|(a, b)| a * b).sum();
        assert!((obj - 1.0).abs() < 1e-6, "{obj}");
    }
}
