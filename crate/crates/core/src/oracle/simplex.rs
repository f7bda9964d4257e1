//! Dense tableau simplex for `max cᵀx  s.t.  Ax ≤ b, x ≥ 0` with `b ≥ 0`, so
//! the all-slack basis is a feasible start. Small problems only.

use alloc::vec;
use alloc::vec::Vec;

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-12;
/// Degenerate pivots tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpError {
    Unbounded,
    IterationLimit,
    NegativeRhs(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct LinearProgram {
    n_vars: usize,
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram { n_vars: objective.len(), objective, rows: Vec::new() }
    }

    /// Adds `coeffs · x ≤ rhs`.
    pub fn add_row(&mut self, coeffs: Vec<f64>, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.n_vars);
        self.rows.push((coeffs, rhs));
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        let m = self.rows.len();
        let n = self.n_vars;
        let width = n + m + 1;
        let rhs = width - 1;
        let mut t = vec![0.0; m * width];
        for (i, (coeffs, b)) in self.rows.iter().enumerate() {
            if *b < 0.0 {
                return Err(LpError::NegativeRhs(i));
            }
            let row = &mut t[i * width..(i + 1) * width];
            row[..n].copy_from_slice(coeffs);
            row[n + i] = 1.0;
            row[rhs] = *b;
        }
        // reduced costs; entering columns have d_j > 0
        let mut d = vec![0.0; width];
        d[..n].copy_from_slice(&self.objective);
        let mut basis: Vec<usize> = (n..n + m).collect();

        let mut stalled = 0;
        let max_iter = 50 * (n + m) + 1000;
        for _ in 0..max_iter {
            let entering = if stalled < STALL_LIMIT {
                let mut best = None;
                let mut best_d = COST_EPS;
                for (j, &dj) in d[..rhs].iter().enumerate() {
                    if dj > best_d {
                        best_d = dj;
                        best = Some(j);
                    }
                }
                best
            } else {
                d[..rhs].iter().position(|&dj| dj > COST_EPS)
            };
            let Some(col) = entering else {
                let mut x = vec![0.0; n];
                for (i, &b) in basis.iter().enumerate() {
                    if b < n {
                        x[b] = t[i * width + rhs].max(0.0);
                    }
                }
                let value = self.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
                return Ok(LpSolution { x, value });
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = t[i * width + col];
                if a > PIVOT_EPS {
                    let ratio = t[i * width + rhs] / a;
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best - 1e-14 || (ratio <= best + 1e-14 && basis[i] < basis[r]) {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };
            if ratio <= 1e-14 {
                stalled += 1;
            } else {
                stalled = 0;
            }
            pivot(&mut t, &mut d, width, m, row, col);
            basis[row] = col;
        }
        Err(LpError::IterationLimit)
    }
}

fn pivot(t: &mut [f64], d: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
    for i in 0..m {
        if i == row {
            continue;
        }
        let factor = t[i * width + col];
        if factor != 0.0 {
            for (v, &pv) in t[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            t[i * width + col] = 0.0;
        }
    }
    let factor = d[col];
    if factor != 0.0 {
        for (v, &pv) in d.iter_mut().zip(&pivot_row) {
            *v -= factor * pv;
        }
        d[col] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  →  (2, 6), 36
        let mut lp = LinearProgram::new(vec![3.0, 5.0]);
        lp.add_row(vec![1.0, 0.0], 4.0);
        lp.add_row(vec![0.0, 2.0], 12.0);
        lp.add_row(vec![3.0, 2.0], 18.0);
        let s = lp.solve().unwrap();
        assert!((s.value - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_row(vec![1.0, -1.0], 1.0);
        assert_eq!(lp.solve().unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn degenerate_vertex() {
        // several constraints meet at the optimum (1, 1)
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_row(vec![1.0, 0.0], 1.0);
        lp.add_row(vec![0.0, 1.0], 1.0);
        lp.add_row(vec![1.0, 1.0], 2.0);
        lp.add_row(vec![2.0, 1.0], 3.0);
        lp.add_row(vec![1.0, 2.0], 3.0);
        let s = lp.solve().unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_width_feasible_set() {
        // x ≤ 0 forces the origin
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.add_row(vec![1.0, 0.0], 0.0);
        lp.add_row(vec![-1.0, 1.0], 0.5);
        let s = lp.solve().unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
    }
}
