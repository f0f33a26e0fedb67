//! Linear assignment problems with dual potentials, and the bound tables
//! `l` and `u` built from them.
//!
//! `l[i][j]` (resp. `u[i][j]`) is the minimum (resp. maximum) over all
//! assignments of the rows `k != i` to the columns `l != j` of
//! `sum p[i][k] * d[j][l]`.

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QapError, Result};
use crate::instance::QapInstance;
use crate::matrix::SquareMatrix;
use crate::scalar::{tol, Scalar};

/// Largest subproblem size for exhaustive argmin enumeration.
pub const ENUMERATE_MAX_M: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

/// Optimal assignment with dual potentials.
///
/// For `Min`: `row_duals[k] + col_duals[l] <= cost[k][l]`, with equality on
/// assigned pairs. For `Max` the inequality is reversed. In both cases the
/// duals sum to `value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct LapResult<T> {
    /// `assignment[k]` is the column of row `k`.
    pub assignment: Vec<usize>,
    pub value: T,
    pub row_duals: Vec<T>,
    pub col_duals: Vec<T>,
}

impl<T: Scalar> LapResult<T> {
    pub fn dual_sum(&self) -> T {
        self.row_duals.iter().chain(&self.col_duals).copied().sum()
    }
}

fn check_square<T: Scalar>(cost: &[Vec<T>]) -> Result<usize> {
    let m = cost.len();
    if m == 0 {
        return Err(QapError::Argument("cost matrix is empty".into()));
    }
    if let Some(r) = cost.iter().position(|row| row.len() != m) {
        return Err(QapError::Argument(format!(
            "cost matrix is not square: row {} has {} entries, expected {m}",
            r + 1,
            cost[r].len()
        )));
    }
    if cost.iter().flatten().any(|v| !v.is_finite()) {
        return Err(QapError::Argument("cost matrix has non-finite entries".into()));
    }
    Ok(m)
}

/// Solves the assignment problem by successive shortest augmenting paths
/// with row and column potentials.
pub fn solve_lap<T: Scalar>(cost: &[Vec<T>], sense: Sense) -> Result<LapResult<T>> {
    let m = check_square(cost)?;
    let sign = match sense {
        Sense::Min => T::one(),
        Sense::Max => -T::one(),
    };
    let (assignment, mut row_duals, mut col_duals) = shortest_augmenting_path(m, |k, l| sign * cost[k][l]);
    row_duals.iter_mut().for_each(|v| *v = *v * sign);
    col_duals.iter_mut().for_each(|v| *v = *v * sign);
    let value = assignment.iter().enumerate().map(|(k, &l)| cost[k][l]).sum();
    Ok(LapResult {
        assignment,
        value,
        row_duals,
        col_duals,
    })
}

/// Minimization core. Index 0 of the internal arrays is a virtual column.
fn shortest_augmenting_path<T: Scalar>(m: usize, cost: impl Fn(usize, usize) -> T) -> (Vec<usize>, Vec<T>, Vec<T>) {
    let inf = T::infinity();
    let mut u = vec![T::zero(); m + 1];
    let mut v = vec![T::zero(); m + 1];
    // row matched to column j (1-based rows, 0 = free)
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for row in 1..=m {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0; m];
    for j in 1..=m {
        assignment[owner[j] - 1] = j - 1;
    }
    (assignment, u[1..].to_vec(), v[1..].to_vec())
}

/// Optimal assignment that is lexicographically smallest among all optima
/// (ties within 1e-9). Duals are those of the plain solve.
pub fn solve_lap_lexicographic<T: Scalar>(cost: &[Vec<T>], sense: Sense) -> Result<LapResult<T>> {
    let m = check_square(cost)?;
    let base = solve_lap(cost, sense)?;
    let eps = T::tol(tol::EXACT) * (T::one() + base.value.abs());
    let better_or_equal = |v: T, target: T| match sense {
        Sense::Min => v <= target + eps,
        Sense::Max => v >= target - eps,
    };

    let mut rows: Vec<usize> = (0..m).collect();
    let mut cols: Vec<usize> = (0..m).collect();
    let mut fixed_value = T::zero();
    let mut assignment = vec![0; m];
    while let Some(&k) = rows.first() {
        let rest_rows = &rows[1..];
        let mut chosen = None;
        for (pos, &l) in cols.iter().enumerate() {
            let rest_cols: Vec<usize> = cols.iter().copied().filter(|&c| c != l).collect();
            let rest = if rest_rows.is_empty() {
                T::zero()
            } else {
                let sub: Vec<Vec<T>> = rest_rows
                    .iter()
                    .map(|&r| rest_cols.iter().map(|&c| cost[r][c]).collect())
                    .collect();
                solve_lap(&sub, sense)?.value
            };
            if better_or_equal(fixed_value + cost[k][l] + rest, base.value) {
                chosen = Some((pos, l));
                break;
            }
        }
        let (pos, l) = chosen.ok_or_else(|| QapError::State("no optimal completion found".into()))?;
        assignment[k] = l;
        fixed_value += cost[k][l];
        cols.remove(pos);
        rows.remove(0);
    }
    Ok(LapResult { assignment, ..base })
}

/// All optimal assignments (within 1e-9), in lexicographic order.
pub fn enumerate_argmin<T: Scalar>(cost: &[Vec<T>], sense: Sense) -> Result<Vec<Vec<usize>>> {
    let m = check_square(cost)?;
    if m > ENUMERATE_MAX_M {
        return Err(QapError::capacity("assignment size for enumeration", m, ENUMERATE_MAX_M));
    }
    let values: Vec<(Vec<usize>, T)> = (0..m)
        .permutations(m)
        .map(|a| {
            let v = a.iter().enumerate().map(|(k, &l)| cost[k][l]).sum();
            (a, v)
        })
        .collect();
    let best = values
        .iter()
        .map(|(_, v)| *v)
        .reduce(|a, b| match sense {
            Sense::Min => a.min(b),
            Sense::Max => a.max(b),
        })
        .expect("m >= 1");
    let eps = T::tol(tol::EXACT);
    Ok(values
        .into_iter()
        .filter(|(_, v)| (*v - best).abs() <= eps)
        .map(|(a, _)| a)
        .collect())
}

/// The indices `0..n` without `skip`.
pub fn reduced_indices(n: usize, skip: usize) -> Vec<usize> {
    (0..n).filter(|&k| k != skip).collect()
}

/// Cost matrix of the `(i, j)` subproblem: rows `k != i`, columns `l != j`,
/// entries `p[i][k] * d[j][l]`.
pub fn reduced_cost<T: Scalar>(instance: &QapInstance<T>, i: usize, j: usize) -> Vec<Vec<T>> {
    let n = instance.n();
    let cols = reduced_indices(n, j);
    reduced_indices(n, i)
        .into_iter()
        .map(|k| cols.iter().map(|&l| instance.coef(i, j, k, l)).collect())
        .collect()
}

/// The `l` and `u` tables with the duals of every subproblem.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct BoundTables<T> {
    pub l: SquareMatrix<T>,
    pub u: SquareMatrix<T>,
    /// Min-LAP result of subproblem `(i, j)` at index `i * n + j`. Empty for
    /// `n = 1`.
    #[serde(skip)]
    pub l_duals: Vec<LapResult<T>>,
    #[serde(skip)]
    pub u_duals: Vec<LapResult<T>>,
}

impl<T: Scalar> BoundTables<T> {
    pub fn n(&self) -> usize {
        self.l.dim()
    }

    pub fn l_result(&self, i: usize, j: usize) -> &LapResult<T> {
        &self.l_duals[i * self.n() + j]
    }

    pub fn u_result(&self, i: usize, j: usize) -> &LapResult<T> {
        &self.u_duals[i * self.n() + j]
    }
}

fn subproblem<T: Scalar>(instance: &QapInstance<T>, i: usize, j: usize) -> Result<(LapResult<T>, LapResult<T>)> {
    let cost = reduced_cost(instance, i, j);
    Ok((solve_lap(&cost, Sense::Min)?, solve_lap(&cost, Sense::Max)?))
}

fn assemble<T: Scalar>(n: usize, results: Vec<(LapResult<T>, LapResult<T>)>) -> BoundTables<T> {
    let (l_duals, u_duals): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    BoundTables {
        l: SquareMatrix::from_fn(n, |i, j| l_duals[i * n + j].value),
        u: SquareMatrix::from_fn(n, |i, j| u_duals[i * n + j].value),
        l_duals,
        u_duals,
    }
}

/// Solves the `2 n^2` reduced assignment problems.
pub fn compute_bounds<T: Scalar>(instance: &QapInstance<T>) -> Result<BoundTables<T>> {
    let n = instance.n();
    if n == 1 {
        return Ok(trivial_bounds());
    }
    let results = (0..n * n)
        .map(|t| subproblem(instance, t / n, t % n))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(n, results))
}

/// [`compute_bounds`] with the subproblems distributed over the current
/// rayon pool. Results are identical to the sequential version.
pub fn compute_bounds_parallel<T: Scalar>(instance: &QapInstance<T>) -> Result<BoundTables<T>> {
    let n = instance.n();
    if n == 1 {
        return Ok(trivial_bounds());
    }
    let results = (0..n * n)
        .into_par_iter()
        .map(|t| subproblem(instance, t / n, t % n))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(n, results))
}

fn trivial_bounds<T: Scalar>() -> BoundTables<T> {
    BoundTables {
        l: SquareMatrix::zeros(1),
        u: SquareMatrix::zeros(1),
        l_duals: Vec::new(),
        u_duals: Vec::new(),
    }
}

/// Optimal assignments of the `(i, j)` min subproblem as lists of full
/// `(k, l)` index pairs.
pub fn argmin_pairs<T: Scalar>(instance: &QapInstance<T>, i: usize, j: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    let n = instance.n();
    let rows = reduced_indices(n, i);
    let cols = reduced_indices(n, j);
    let all = enumerate_argmin(&reduced_cost(instance, i, j), Sense::Min)?;
    Ok(all
        .into_iter()
        .map(|a| a.iter().enumerate().map(|(r, &c)| (rows[r], cols[c])).collect())
        .collect())
}

/// Searches (lexicographically, 0-based) for `(a, b, c, d)` with `a != c`,
/// `b != d` such that every optimum of subproblem `(a, b)` assigns `c -> d`
/// and no optimum of subproblem `(c, d)` assigns `a -> b`. Such a quadruple
/// certifies that the XY relaxation is strictly weaker than the projected AJ
/// relaxation.
pub fn find_containment_witness<T: Scalar>(instance: &QapInstance<T>) -> Result<Option<(usize, usize, usize, usize)>> {
    let n = instance.n();
    if n < 2 {
        return Ok(None);
    }
    if n - 1 > ENUMERATE_MAX_M {
        return Err(QapError::capacity("instance size for witness search", n, ENUMERATE_MAX_M + 1));
    }
    let mut argmins = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            argmins.push(argmin_pairs(instance, i, j)?);
        }
    }
    let set = |i: usize, j: usize| &argmins[i * n + j];
    for a in 0..n {
        for b in 0..n {
            for c in (0..n).filter(|&c| c != a) {
                for d in (0..n).filter(|&d| d != b) {
                    let forced = set(a, b).iter().all(|x| x.contains(&(c, d)));
                    let excluded = set(c, d).iter().all(|x| !x.contains(&(a, b)));
                    if forced && excluded {
                        return Ok(Some((a, b, c, d)));
                    }
                }
            }
        }
    }
    Ok(None)
}
