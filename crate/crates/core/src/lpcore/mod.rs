//! Generic linear programs and a dense bounded-variable simplex solver.
//!
//! Dual sign convention: `duals[i]` is the derivative of the optimal
//! objective with respect to `rhs[i]`. For a minimization, `>=` rows carry
//! nonnegative duals and `<=` rows nonpositive ones; reduced costs are
//! `c_j - duals^T A_j`.

mod lp_format;
mod simplex;

use serde::Serialize;

use crate::error::{QapError, Result};
use crate::scalar::{tol, Scalar};

pub use lp_format::{read_lp, write_lp};
pub use simplex::{solve, solve_with, SimplexOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable<T> {
    pub name: String,
    /// May be `-inf`.
    pub lower: T,
    /// May be `+inf`.
    pub upper: T,
    /// Ignored by the solver.
    pub integer: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T> {
    pub name: String,
    /// Sparse row `(variable index, coefficient)`.
    pub coeffs: Vec<(usize, T)>,
    pub relation: Relation,
    pub rhs: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpModel<T> {
    pub sense: ObjectiveSense,
    pub variables: Vec<Variable<T>>,
    pub constraints: Vec<Constraint<T>>,
    pub objective: Vec<(usize, T)>,
    pub objective_constant: T,
}

impl<T: Scalar> LpModel<T> {
    pub fn new(sense: ObjectiveSense) -> Self {
        Self {
            sense,
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            objective_constant: T::zero(),
        }
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: T, upper: T, integer: bool) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            integer,
        });
        self.variables.len() - 1
    }

    pub fn add_constraint(&mut self, name: impl Into<String>, coeffs: Vec<(usize, T)>, relation: Relation, rhs: T) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_objective_coef(&mut self, var: usize, coef: T) {
        match self.objective.iter_mut().find(|(j, _)| *j == var) {
            Some(entry) => entry.1 = coef,
            None => self.objective.push((var, coef)),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        let nv = self.num_vars();
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower == T::infinity() || v.upper == T::neg_infinity() {
                return Err(QapError::Argument(format!("variable {} has invalid bounds", v.name)));
            }
            if v.lower > v.upper {
                return Err(QapError::Argument(format!(
                    "variable {} has lower bound {} above upper bound {}",
                    v.name, v.lower, v.upper
                )));
            }
        }
        let check_row = |what: &str, row: &[(usize, T)]| -> Result<()> {
            for &(j, a) in row {
                if j >= nv {
                    return Err(QapError::Argument(format!("{what} references variable {j}, model has {nv}")));
                }
                if !a.is_finite() {
                    return Err(QapError::Argument(format!("{what} has a non-finite coefficient")));
                }
            }
            Ok(())
        };
        check_row("objective", &self.objective)?;
        if !self.objective_constant.is_finite() {
            return Err(QapError::Argument("objective constant is not finite".into()));
        }
        for c in &self.constraints {
            check_row(&c.name, &c.coeffs)?;
            if !c.rhs.is_finite() {
                return Err(QapError::Argument(format!("{} has a non-finite right-hand side", c.name)));
            }
        }
        Ok(())
    }

    /// Dense objective vector.
    pub fn objective_dense(&self) -> Vec<T> {
        let mut c = vec![T::zero(); self.num_vars()];
        for &(j, v) in &self.objective {
            c[j] += v;
        }
        c
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum::<T>() + self.objective_constant
    }

    pub fn row_activity(&self, row: usize, x: &[T]) -> T {
        self.constraints[row].coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest violation of any row or bound by `x`.
    pub fn max_violation(&self, x: &[T]) -> T {
        let mut worst = T::zero();
        for (j, v) in self.variables.iter().enumerate() {
            worst = worst.max(v.lower - x[j]).max(x[j] - v.upper);
        }
        for (i, c) in self.constraints.iter().enumerate() {
            let act = self.row_activity(i, x);
            let viol = match c.relation {
                Relation::Le => act - c.rhs,
                Relation::Ge => c.rhs - act,
                Relation::Eq => (act - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Copy with both bounds of each listed variable set to its value.
    pub fn fix_variables(&self, fixes: &[(usize, T)]) -> Result<Self> {
        let mut out = self.clone();
        let eps = T::tol(tol::FEASIBILITY);
        for &(j, value) in fixes {
            let var = out
                .variables
                .get_mut(j)
                .ok_or_else(|| QapError::Argument(format!("no variable with index {j}")))?;
            if !value.is_finite() || value < var.lower - eps || value > var.upper + eps {
                return Err(QapError::Argument(format!(
                    "cannot fix {} to {value}: outside [{}, {}]",
                    var.name, var.lower, var.upper
                )));
            }
            var.lower = value;
            var.upper = value;
        }
        Ok(out)
    }

    /// Same model with its rows reordered: row `i` of the result is row
    /// `order[i]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.num_constraints()];
        if order.len() != seen.len() || order.iter().any(|&i| i >= seen.len() || std::mem::replace(&mut seen[i], true)) {
            return Err(QapError::Argument("row order is not a permutation".into()));
        }
        let mut out = self.clone();
        out.constraints = order.iter().map(|&i| self.constraints[i].clone()).collect();
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub primal: Vec<T>,
    pub objective_value: T,
    /// One per constraint. Empty unless `Optimal`.
    pub duals: Vec<T>,
    /// One per variable. Empty unless `Optimal`.
    pub reduced_costs: Vec<T>,
    /// Row multipliers proving infeasibility, present when `Infeasible`.
    /// Normalized so that [`farkas_gap`] is 1.
    pub farkas: Option<Vec<T>>,
    pub iterations: usize,
}

impl<T: Scalar> LpSolution<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Lagrangian dual bound of an optimal solution: `sum duals_i * rhs_i` plus
/// the bound terms of the reduced costs and the objective constant.
pub fn dual_objective<T: Scalar>(solution: &LpSolution<T>, model: &LpModel<T>) -> Result<T> {
    if solution.status != LpStatus::Optimal {
        return Err(QapError::State(format!(
            "dual objective requires an optimal solution, status is {:?}",
            solution.status
        )));
    }
    if solution.duals.len() != model.num_constraints() || solution.reduced_costs.len() != model.num_vars() {
        return Err(QapError::Argument("solution does not belong to this model".into()));
    }
    let eps = T::tol(tol::FEASIBILITY);
    let minimize = model.sense == ObjectiveSense::Minimize;
    let mut total = model.objective_constant;
    for (c, &y) in model.constraints.iter().zip(&solution.duals) {
        total += y * c.rhs;
    }
    for (v, &d) in model.variables.iter().zip(&solution.reduced_costs) {
        let use_lower = if minimize { d >= T::zero() } else { d <= T::zero() };
        let bound = if use_lower { v.lower } else { v.upper };
        if bound.is_finite() {
            total += d * bound;
        } else if d.abs() > eps {
            return Ok(if minimize { T::neg_infinity() } else { T::infinity() });
        }
    }
    Ok(total)
}

/// For row multipliers `y`, returns `y^T b - max { (y^T A) x : x within bounds }`
/// if `y` respects the row signs (`y >= 0` on `>=` rows, `y <= 0` on `<=`
/// rows, within tolerance). A positive value proves that no `x` satisfies
/// the model. `None` when the sign conditions fail or the maximum is
/// unbounded.
pub fn farkas_gap<T: Scalar>(model: &LpModel<T>, y: &[T]) -> Option<T> {
    if y.len() != model.num_constraints() {
        return None;
    }
    let eps = T::tol(tol::FEASIBILITY);
    let mut combined = vec![T::zero(); model.num_vars()];
    let mut yb = T::zero();
    for (c, &yi) in model.constraints.iter().zip(y) {
        let sign_ok = match c.relation {
            Relation::Ge => yi >= -eps,
            Relation::Le => yi <= eps,
            Relation::Eq => true,
        };
        if !sign_ok {
            return None;
        }
        yb += yi * c.rhs;
        for &(j, a) in &c.coeffs {
            combined[j] += yi * a;
        }
    }
    let mut max_lhs = T::zero();
    for (v, &g) in model.variables.iter().zip(&combined) {
        if g.abs() <= T::tol(tol::PIVOT) {
            continue;
        }
        let bound = if g > T::zero() { v.upper } else { v.lower };
        if !bound.is_finite() {
            return None;
        }
        max_lhs += g * bound;
    }
    Some(yb - max_lhs)
}

/// True when `y` is a valid infeasibility certificate for `model`.
pub fn verify_farkas<T: Scalar>(model: &LpModel<T>, y: &[T]) -> bool {
    farkas_gap(model, y).is_some_and(|g| g > T::tol(tol::FEASIBILITY))
}

#[cfg(test)]
mod tests;
