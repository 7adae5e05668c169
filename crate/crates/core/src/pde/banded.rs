//! `J×J` system that is tridiagonal except for a third entry in the first
//! row (the one-sided `z = 0` stencil).

use crate::error::{PricingError, Result};

/// ```text
/// [ d0  u0  s0              ]
/// [ a1  b1  c1              ]
/// [     a2  b2  c2          ]
/// [          ...            ]
/// [             a_{J-1} b_{J-1}]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    pub first: [f64; 3],
    /// Sub-diagonal, `lower[j]` multiplies `x[j−1]` in row `j`; `lower[0]` unused.
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    /// Super-diagonal, `upper[j]` multiplies `x[j+1]` in row `j`; last entry unused.
    pub upper: Vec<f64>,
}

impl BandedMatrix {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.size();
        let mut a = vec![vec![0.0; n]; n];
        a[0][0] = self.first[0];
        a[0][1] = self.first[1];
        a[0][2] = self.first[2];
        for j in 1..n {
            a[j][j - 1] = self.lower[j];
            a[j][j] = self.diag[j];
            if j + 1 < n {
                a[j][j + 1] = self.upper[j];
            }
        }
        a
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.size();
        let mut y = vec![0.0; n];
        y[0] = self.first[0] * x[0] + self.first[1] * x[1] + self.first[2] * x[2];
        for j in 1..n {
            let mut s = self.lower[j] * x[j - 1] + self.diag[j] * x[j];
            if j + 1 < n {
                s += self.upper[j] * x[j + 1];
            }
            y[j] = s;
        }
        y
    }

    /// Gershgorin discs `(centre, radius)` by rows.
    pub fn gershgorin_discs(&self) -> Vec<(f64, f64)> {
        self.to_dense()
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let radius = row
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i)
                    .map(|(_, v)| v.abs())
                    .sum();
                (row[i], radius)
            })
            .collect()
    }

    /// Eliminates `a1` with one row operation (row 1 minus a multiple of
    /// row 0), which leaves rows `1..J` tridiagonal in `x[1..]`, then stores
    /// the Thomas forward-sweep factors.
    pub fn factorize(&self) -> Result<Factorized> {
        let n = self.size();
        if n < 3 {
            return Err(PricingError::Config(format!(
                "banded system needs at least 3 rows, got {n}"
            )));
        }
        let [d0, u0, s0] = self.first;
        if d0 == 0.0 {
            return Err(singular(0));
        }
        let factor = self.lower[1] / d0;
        let mut lower = self.lower.clone();
        let mut diag = self.diag.clone();
        let mut upper = self.upper.clone();
        lower[1] = 0.0;
        diag[1] -= factor * u0;
        upper[1] -= factor * s0;

        let mut cp = vec![0.0; n];
        let mut denom = vec![0.0; n];
        for j in 1..n {
            let d = diag[j] - if j > 1 { lower[j] * cp[j - 1] } else { 0.0 };
            if d == 0.0 || !d.is_finite() {
                return Err(singular(j));
            }
            denom[j] = d;
            cp[j] = if j + 1 < n { upper[j] / d } else { 0.0 };
        }
        Ok(Factorized {
            matrix: self.clone(),
            factor,
            lower,
            cp,
            denom,
        })
    }
}

fn singular(row: usize) -> PricingError {
    PricingError::Numerical {
        module: "pde-solver",
        location: format!("row {row}"),
        detail: "zero pivot in banded elimination".into(),
    }
}

/// Reusable factorisation of a [`BandedMatrix`].
#[derive(Debug, Clone)]
pub struct Factorized {
    matrix: BandedMatrix,
    factor: f64,
    lower: Vec<f64>,
    cp: Vec<f64>,
    denom: Vec<f64>,
}

impl Factorized {
    pub fn matrix(&self) -> &BandedMatrix {
        &self.matrix
    }

    /// Solves `A x = rhs` into `x`.
    pub fn solve_into(&self, rhs: &[f64], x: &mut [f64]) {
        let n = self.denom.len();
        let [d0, u0, s0] = self.matrix.first;
        // Forward sweep on rows 1..n with the eliminated first column.
        x[1] = (rhs[1] - self.factor * rhs[0]) / self.denom[1];
        for j in 2..n {
            x[j] = (rhs[j] - self.lower[j] * x[j - 1]) / self.denom[j];
        }
        for j in (1..n - 1).rev() {
            x[j] -= self.cp[j] * x[j + 1];
        }
        x[0] = (rhs[0] - u0 * x[1] - s0 * x[2]) / d0;
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; rhs.len()];
        self.solve_into(rhs, &mut x);
        x
    }

    /// `‖A x − rhs‖∞`.
    pub fn residual(&self, x: &[f64], rhs: &[f64]) -> f64 {
        let m = &self.matrix;
        let n = m.size();
        let mut worst = (m.first[0] * x[0] + m.first[1] * x[1] + m.first[2] * x[2] - rhs[0]).abs();
        for j in 1..n {
            let mut s = m.lower[j] * x[j - 1] + m.diag[j] * x[j];
            if j + 1 < n {
                s += m.upper[j] * x[j + 1];
            }
            worst = worst.max((s - rhs[j]).abs());
        }
        worst
    }
}
