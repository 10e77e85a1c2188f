//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Solves `maximize c·x` subject to `A x ≤ b`, `x ≥ 0` over any [`Scalar`],
//! so the same code runs in floating point and in exact rational arithmetic.

use crate::scalar::Scalar;

/// Termination status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimplexStatus {
    /// An optimal basic solution was found.
    Optimal,
    /// No point satisfies the constraints.
    Infeasible,
    /// The objective is unbounded above.
    Unbounded,
}

/// Solution of a standard-form problem.
#[derive(Clone, Debug)]
pub struct SimplexSolution<T> {
    /// Termination status.
    pub status: SimplexStatus,
    /// Primal values (meaningful when optimal).
    pub x: Vec<T>,
    /// Optimal objective value.
    pub value: T,
    /// Shadow prices `y ≥ 0` of the rows, with `yᵀA ≥ c` and `yᵀb = c·x`.
    pub duals: Vec<T>,
    /// Number of pivots performed.
    pub pivots: usize,
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    objective: Vec<T>,
    /// Negated objective value of the current basic solution.
    objective_value: T,
    basis: Vec<usize>,
    pivots: usize,
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, col: usize) {
        let inv = T::one() / self.rows[r][col].clone();
        for entry in self.rows[r].iter_mut() {
            if !entry.is_zero() {
                *entry = entry.clone() * inv.clone();
            }
        }
        self.rhs[r] = self.rhs[r].clone() * inv;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        let support: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let factor = self.rows[i][col].clone();
            if factor.is_zero() {
                continue;
            }
            for &j in &support {
                let updated = self.rows[i][j].clone() - factor.clone() * pivot_row[j].clone();
                self.rows[i][j] = updated;
            }
            self.rows[i][col] = T::zero();
            self.rhs[i] = self.rhs[i].clone() - factor * pivot_rhs.clone();
        }
        let factor = self.objective[col].clone();
        if !factor.is_zero() {
            for &j in &support {
                let updated = self.objective[j].clone() - factor.clone() * pivot_row[j].clone();
                self.objective[j] = updated;
            }
            self.objective[col] = T::zero();
            self.objective_value = self.objective_value.clone() - factor * pivot_rhs;
        }
        self.basis[r] = col;
        self.pivots += 1;
    }

    /// Runs Bland's rule on the current objective row, which stores reduced
    /// costs `c_j − z_j`; a column can enter when its entry is positive.
    /// Only the first `active` columns may enter.
    fn optimize(&mut self, active: usize) -> SimplexStatus {
        let eps = T::tolerance();
        loop {
            let entering = (0..active).find(|&j| self.objective[j] > eps);
            let Some(col) = entering else {
                return SimplexStatus::Optimal;
            };
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if *a > eps {
                    let ratio = self.rhs[i].clone() / a.clone();
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let better = ratio < br.clone() - eps.clone()
                                || (ratio <= br.clone() + eps.clone() && self.basis[i] < self.basis[bi]);
                            if better {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                None => return SimplexStatus::Unbounded,
                Some((r, _)) => self.pivot(r, col),
            }
        }
    }
}

/// Maximizes `c·x` subject to `A x ≤ b` and `x ≥ 0`.
pub fn maximize<T: Scalar>(a: &[Vec<T>], b: &[T], c: &[T]) -> SimplexSolution<T> {
    let m = a.len();
    let n = c.len();
    let negative: Vec<usize> = (0..m).filter(|&i| b[i].below_zero()).collect();
    let art = negative.len();
    let width = n + m + art;

    // Columns: originals, slacks, artificials.
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art_index = 0;
    for i in 0..m {
        let mut row = vec![T::zero(); width];
        let flip = b[i].below_zero();
        for j in 0..n {
            row[j] = if flip { -a[i][j].clone() } else { a[i][j].clone() };
        }
        row[n + i] = if flip { -T::one() } else { T::one() };
        if flip {
            row[n + m + art_index] = T::one();
            basis.push(n + m + art_index);
            art_index += 1;
        } else {
            basis.push(n + i);
        }
        rhs.push(if flip { -b[i].clone() } else { b[i].clone() });
        rows.push(row);
    }

    let mut tableau =
        Tableau { rows, rhs, objective: vec![T::zero(); width], objective_value: T::zero(), basis, pivots: 0 };

    if art > 0 {
        // Phase one: maximize −Σ artificials. Reduced costs start as the sum
        // of the rows whose basic variable is artificial; the stored value is
        // the negated objective, so it starts at Σ b_i over those rows.
        for (i, &bv) in tableau.basis.iter().enumerate() {
            if bv >= n + m {
                for j in 0..width {
                    tableau.objective[j] = tableau.objective[j].clone() + tableau.rows[i][j].clone();
                }
                tableau.objective_value = tableau.objective_value.clone() + tableau.rhs[i].clone();
            }
        }
        for j in n + m..width {
            tableau.objective[j] = T::zero();
        }
        tableau.optimize(n + m);
        if tableau.objective_value.above_zero() && !tableau.objective_value.is_negligible() {
            return SimplexSolution {
                status: SimplexStatus::Infeasible,
                x: vec![T::zero(); n],
                value: T::zero(),
                duals: vec![T::zero(); m],
                pivots: tableau.pivots,
            };
        }
        // Drive remaining artificials out of the basis where possible.
        for i in 0..m {
            if tableau.basis[i] >= n + m {
                if let Some(col) = (0..n + m).find(|&j| !tableau.rows[i][j].is_negligible()) {
                    tableau.pivot(i, col);
                }
            }
        }
    }

    // Phase two objective row: c_j − c_B B⁻¹ A_j.
    let mut objective = vec![T::zero(); width];
    objective[..n].clone_from_slice(c);
    let mut value = T::zero();
    for i in 0..m {
        let bv = tableau.basis[i];
        let cb = if bv < n { c[bv].clone() } else { T::zero() };
        if cb.is_zero() {
            continue;
        }
        for (entry, a) in objective.iter_mut().zip(&tableau.rows[i]) {
            *entry = entry.clone() - cb.clone() * a.clone();
        }
        value = value - cb * tableau.rhs[i].clone();
    }
    for entry in &mut objective[n + m..] {
        *entry = T::zero();
    }
    tableau.objective = objective;
    tableau.objective_value = value;

    let status = tableau.optimize(n + m);
    let mut x = vec![T::zero(); n];
    for i in 0..m {
        if tableau.basis[i] < n {
            x[tableau.basis[i]] = tableau.rhs[i].clone();
        }
    }
    let value = c.iter().zip(&x).fold(T::zero(), |acc, (ci, xi)| acc + ci.clone() * xi.clone());
    // Shadow prices: minus the reduced cost of each slack. A negated row also
    // negates its slack column, so the two sign changes cancel.
    let duals = (0..m).map(|i| -tableau.objective[n + i].clone()).collect();
    SimplexSolution { status, x, value, duals, pivots: tableau.pivots }
}
