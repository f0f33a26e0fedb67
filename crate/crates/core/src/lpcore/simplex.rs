//! Two-phase revised simplex on bounded variables with an explicit dense
//! basis inverse. Intended for the small, highly degenerate models produced
//! by the linearizations (a few thousand columns at most).

use log::trace;

use super::{farkas_gap, LpModel, LpSolution, LpStatus, ObjectiveSense, Relation};
use crate::error::{QapError, Result};
use crate::scalar::{tol, Scalar};

/// Entries of the entering column below this (relative to its largest
/// entry) never block in the ratio test; smaller pivots are mostly noise.
const RATIO_PIVOT: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexOptions {
    /// Pivot budget over both phases; `None` means `50 * (rows + columns)`.
    pub max_iterations: Option<usize>,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    /// Pivots between refactorizations of the basis inverse.
    pub refactor_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: None,
            bland_after: 20,
            refactor_every: 100,
        }
    }
}

pub fn solve<T: Scalar>(model: &LpModel<T>) -> Result<LpSolution<T>> {
    solve_with(model, &SimplexOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    IterationLimit,
}

struct Simplex<'o, T> {
    m: usize,
    cols: Vec<Vec<(usize, T)>>,
    lower: Vec<T>,
    upper: Vec<T>,
    x: Vec<T>,
    state: Vec<State>,
    basis: Vec<usize>,
    /// Row-major `m x m`; row `r` belongs to basis position `r`.
    binv: Vec<T>,
    b: Vec<T>,
    iterations: usize,
    limit: usize,
    since_refactor: usize,
    opts: &'o SimplexOptions,
}

pub fn solve_with<T: Scalar>(model: &LpModel<T>, opts: &SimplexOptions) -> Result<LpSolution<T>> {
    model.validate()?;
    let m = model.num_constraints();
    let n = model.num_vars();

    let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    for (i, c) in model.constraints.iter().enumerate() {
        for &(j, a) in &c.coeffs {
            match cols[j].last_mut() {
                Some(last) if last.0 == i => last.1 += a,
                _ => cols[j].push((i, a)),
            }
        }
    }
    let mut lower: Vec<T> = model.variables.iter().map(|v| v.lower).collect();
    let mut upper: Vec<T> = model.variables.iter().map(|v| v.upper).collect();
    let mut x = Vec::with_capacity(n + 2 * m);
    let mut state = Vec::with_capacity(n + 2 * m);
    for v in &model.variables {
        let (val, st) = if v.lower.is_finite() {
            (v.lower, State::Lower)
        } else if v.upper.is_finite() {
            (v.upper, State::Upper)
        } else {
            (T::zero(), State::Zero)
        };
        x.push(val);
        state.push(st);
    }

    // Residuals with all structurals at their starting values.
    let b: Vec<T> = model.constraints.iter().map(|c| c.rhs).collect();
    let mut resid = b.clone();
    for (j, col) in cols.iter().enumerate() {
        if x[j] != T::zero() {
            for &(i, a) in col {
                resid[i] -= a * x[j];
            }
        }
    }

    // Slacks: row_i . x + s_i = b_i.
    let mut basis = vec![usize::MAX; m];
    let mut binv = vec![T::zero(); m * m];
    for (i, c) in model.constraints.iter().enumerate() {
        let (lo, hi) = match c.relation {
            Relation::Le => (T::zero(), T::infinity()),
            Relation::Ge => (T::neg_infinity(), T::zero()),
            Relation::Eq => (T::zero(), T::zero()),
        };
        cols.push(vec![(i, T::one())]);
        lower.push(lo);
        upper.push(hi);
        let fits = resid[i] >= lo && resid[i] <= hi;
        if fits {
            x.push(resid[i]);
            state.push(State::Basic);
            basis[i] = n + i;
            binv[i * m + i] = T::one();
        } else {
            x.push(T::zero());
            state.push(if c.relation == Relation::Ge { State::Upper } else { State::Lower });
        }
    }
    // Artificials for rows the slack cannot cover.
    let mut artificials = Vec::new();
    for i in 0..m {
        if basis[i] != usize::MAX {
            continue;
        }
        let sign = if resid[i] >= T::zero() { T::one() } else { -T::one() };
        let j = cols.len();
        cols.push(vec![(i, sign)]);
        lower.push(T::zero());
        upper.push(T::infinity());
        x.push(resid[i].abs());
        state.push(State::Basic);
        basis[i] = j;
        binv[i * m + i] = sign;
        artificials.push(j);
    }

    let total_cols = cols.len();
    let limit = opts.max_iterations.unwrap_or(50 * (m + n));
    let mut sx = Simplex {
        m,
        cols,
        lower,
        upper,
        x,
        state,
        basis,
        binv,
        b,
        iterations: 0,
        limit,
        since_refactor: 0,
        opts,
    };

    let failed = |sx: &Simplex<T>, status: LpStatus| LpSolution {
        status,
        primal: sx.x[..n].to_vec(),
        objective_value: model.objective_value(&sx.x[..n]),
        duals: Vec::new(),
        reduced_costs: Vec::new(),
        farkas: None,
        iterations: sx.iterations,
    };

    if !artificials.is_empty() {
        let mut c1 = vec![T::zero(); total_cols];
        for &j in &artificials {
            c1[j] = T::one();
        }
        match sx.run(&c1)? {
            PhaseEnd::IterationLimit => return Ok(failed(&sx, LpStatus::IterationLimit)),
            PhaseEnd::Unbounded => {
                return Err(QapError::Lp("phase one reported an unbounded ray".into()));
            }
            PhaseEnd::Optimal => {}
        }
        sx.refactor()?;
        let infeas: T = artificials.iter().map(|&j| sx.x[j]).sum();
        let bscale = sx.b.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
        if infeas > T::tol(tol::FEASIBILITY) * bscale {
            let mut y = sx.duals(&c1);
            let gap = farkas_gap(model, &y).filter(|g| *g > T::zero()).unwrap_or(infeas);
            y.iter_mut().for_each(|v| *v /= gap);
            trace!("phase one ends infeasible: {infeas} after {} pivots", sx.iterations);
            let mut sol = failed(&sx, LpStatus::Infeasible);
            sol.farkas = Some(y);
            return Ok(sol);
        }
        for &j in &artificials {
            sx.upper[j] = T::zero();
            if sx.state[j] != State::Basic {
                sx.x[j] = T::zero();
                sx.state[j] = State::Lower;
            }
        }
        sx.drive_out(&artificials)?;
    }

    let minimize = model.sense == ObjectiveSense::Minimize;
    let mut cost = vec![T::zero(); total_cols];
    for &(j, c) in &model.objective {
        cost[j] += if minimize { c } else { -c };
    }
    match sx.run(&cost)? {
        PhaseEnd::IterationLimit => return Ok(failed(&sx, LpStatus::IterationLimit)),
        PhaseEnd::Unbounded => return Ok(failed(&sx, LpStatus::Unbounded)),
        PhaseEnd::Optimal => {}
    }
    sx.refactor()?;

    let y = sx.duals(&cost);
    let flip = if minimize { T::one() } else { -T::one() };
    let reduced_costs = (0..n).map(|j| flip * sx.reduced(j, &cost, &y)).collect();
    let duals = y.into_iter().map(|v| flip * v).collect();
    let primal = sx.x[..n].to_vec();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: model.objective_value(&primal),
        primal,
        duals,
        reduced_costs,
        farkas: None,
        iterations: sx.iterations,
    })
}

impl<T: Scalar> Simplex<'_, T> {
    fn duals(&self, cost: &[T]) -> Vec<T> {
        let m = self.m;
        let mut y = vec![T::zero(); m];
        for (r, &j) in self.basis.iter().enumerate() {
            let c = cost[j];
            if c != T::zero() {
                for (yi, &bv) in y.iter_mut().zip(&self.binv[r * m..(r + 1) * m]) {
                    *yi += c * bv;
                }
            }
        }
        y
    }

    fn reduced(&self, j: usize, cost: &[T], y: &[T]) -> T {
        cost[j] - self.cols[j].iter().map(|&(i, a)| y[i] * a).sum::<T>()
    }

    fn ftran(&self, j: usize) -> Vec<T> {
        let m = self.m;
        let mut alpha = vec![T::zero(); m];
        for &(i, a) in &self.cols[j] {
            for (r, al) in alpha.iter_mut().enumerate() {
                *al += self.binv[r * m + i] * a;
            }
        }
        alpha
    }

    /// Rebuilds the basis inverse by Gauss-Jordan elimination and recomputes
    /// the basic values from the nonbasic ones.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        self.since_refactor = 0;
        if m == 0 {
            return Ok(());
        }
        let mut a = vec![T::zero(); m * m];
        for (r, &j) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[j] {
                a[i * m + r] += v;
            }
        }
        let mut inv = vec![T::zero(); m * m];
        for i in 0..m {
            inv[i * m + i] = T::one();
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&i, &k| a[i * m + c].abs().partial_cmp(&a[k * m + c].abs()).unwrap())
                .unwrap();
            let piv = a[p * m + c];
            if piv.abs() <= T::tol(tol::PIVOT) {
                return Err(QapError::Lp("basis matrix became singular".into()));
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            for k in 0..m {
                a[c * m + k] /= piv;
                inv[c * m + k] /= piv;
            }
            for i in 0..m {
                if i == c {
                    continue;
                }
                let f = a[i * m + c];
                if f != T::zero() {
                    for k in 0..m {
                        let (ak, ik) = (a[c * m + k], inv[c * m + k]);
                        a[i * m + k] -= f * ak;
                        inv[i * m + k] -= f * ik;
                    }
                }
            }
        }
        self.binv = inv;

        let mut rhs = self.b.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if self.state[j] != State::Basic && self.x[j] != T::zero() {
                for &(i, v) in col {
                    rhs[i] -= v * self.x[j];
                }
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.x[self.basis[r]] = row.iter().zip(&rhs).map(|(&p, &q)| p * q).sum();
        }
        Ok(())
    }

    /// Replaces the basis column at position `r` by column `q` given
    /// `alpha = B^-1 A_q`.
    fn pivot(&mut self, r: usize, q: usize, alpha: &[T]) {
        let m = self.m;
        let piv = alpha[r];
        for k in 0..m {
            self.binv[r * m + k] /= piv;
        }
        for i in 0..m {
            let f = alpha[i];
            if i == r || f == T::zero() {
                continue;
            }
            for k in 0..m {
                let v = self.binv[r * m + k];
                self.binv[i * m + k] -= f * v;
            }
        }
        self.basis[r] = q;
        self.state[q] = State::Basic;
        self.since_refactor += 1;
    }

    /// After phase one: swap basic artificials (now fixed at zero) for
    /// regular columns where possible. Rows where none exists are redundant.
    fn drive_out(&mut self, artificials: &[usize]) -> Result<()> {
        let m = self.m;
        let first_art = artificials[0];
        let mut changed = false;
        for r in 0..m {
            if self.basis[r] < first_art {
                continue;
            }
            let row: Vec<T> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut best: Option<(usize, T)> = None;
            for j in 0..first_art {
                if self.state[j] == State::Basic {
                    continue;
                }
                let v: T = self.cols[j].iter().map(|&(i, a)| row[i] * a).sum();
                if v.abs() > T::tol(tol::FEASIBILITY) && best.is_none_or(|(_, b)| v.abs() > b.abs()) {
                    best = Some((j, v));
                }
            }
            if let Some((q, _)) = best {
                let leaving = self.basis[r];
                let alpha = self.ftran(q);
                self.pivot(r, q, &alpha);
                self.state[leaving] = State::Lower;
                self.x[leaving] = T::zero();
                changed = true;
            }
        }
        if changed {
            self.refactor()?;
        }
        Ok(())
    }

    /// Distance the basic variable of row `r` may travel when it changes at
    /// rate `delta` per unit step.
    fn room(&self, r: usize, delta: T) -> T {
        let j = self.basis[r];
        if delta < T::zero() {
            self.x[j] - self.lower[j]
        } else {
            self.upper[j] - self.x[j]
        }
    }

    fn run(&mut self, cost: &[T]) -> Result<PhaseEnd> {
        let m = self.m;
        let dual_tol = T::tol(tol::EXACT);
        let tiny = T::tol(1e-12);
        let feas = T::tol(tol::FEASIBILITY) * T::of(0.01);
        let mut degenerate_streak = 0usize;
        loop {
            if self.iterations >= self.limit {
                return Ok(PhaseEnd::IterationLimit);
            }
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
            let bland = degenerate_streak >= self.opts.bland_after;
            let y = self.duals(cost);

            // Pricing.
            let mut entering: Option<(usize, T, T)> = None; // (column, direction, |d|)
            for j in 0..self.cols.len() {
                let st = self.state[j];
                if st == State::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = self.reduced(j, cost, &y);
                let dir = match st {
                    State::Lower if d < -dual_tol => T::one(),
                    State::Upper if d > dual_tol => -T::one(),
                    State::Zero if d.abs() > dual_tol => -d.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir, d.abs()));
                    break;
                }
                if entering.is_none_or(|(_, _, best)| d.abs() > best) {
                    entering = Some((j, dir, d.abs()));
                }
            }
            let Some((q, dir, _)) = entering else {
                return Ok(PhaseEnd::Optimal);
            };

            // Ratio test, two passes: bound the step with slightly relaxed
            // bounds, then pick the largest pivot among the rows that block
            // within that bound.
            let alpha = self.ftran(q);
            let amax = alpha.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
            let piv_tol = T::tol(RATIO_PIVOT) * amax;
            let mut bound = T::infinity();
            for r in 0..m {
                let delta = -dir * alpha[r];
                if delta.abs() <= piv_tol {
                    continue;
                }
                let room = self.room(r, delta);
                if room.is_finite() {
                    bound = bound.min((room.max(T::zero()) + feas) / delta.abs());
                }
            }
            let mut step = T::infinity();
            let mut leave: Option<(usize, bool)> = None; // (row, leaves at upper)
            if bound.is_finite() {
                for r in 0..m {
                    let delta = -dir * alpha[r];
                    if delta.abs() <= piv_tol {
                        continue;
                    }
                    let room = self.room(r, delta);
                    if !room.is_finite() {
                        continue;
                    }
                    let ratio = room.max(T::zero()) / delta.abs();
                    if ratio > bound {
                        continue;
                    }
                    let better = match leave {
                        None => true,
                        Some((lr, _)) if bland => self.basis[r] < self.basis[lr],
                        Some((lr, _)) => alpha[r].abs() > alpha[lr].abs(),
                    };
                    if better {
                        step = ratio;
                        leave = Some((r, delta > T::zero()));
                    }
                }
            }
            let range = self.upper[q] - self.lower[q];
            self.iterations += 1;

            if range.is_finite() && range <= step {
                // Bound flip, basis unchanged.
                for r in 0..m {
                    let j = self.basis[r];
                    self.x[j] -= dir * range * alpha[r];
                }
                if dir > T::zero() {
                    self.x[q] = self.upper[q];
                    self.state[q] = State::Upper;
                } else {
                    self.x[q] = self.lower[q];
                    self.state[q] = State::Lower;
                }
                degenerate_streak = 0;
                continue;
            }
            let Some((r, to_upper)) = leave else {
                return Ok(PhaseEnd::Unbounded);
            };

            for i in 0..m {
                let j = self.basis[i];
                self.x[j] -= dir * step * alpha[i];
            }
            self.x[q] += dir * step;
            let leaving = self.basis[r];
            if to_upper {
                self.x[leaving] = self.upper[leaving];
                self.state[leaving] = State::Upper;
            } else {
                self.x[leaving] = self.lower[leaving];
                self.state[leaving] = State::Lower;
            }
            self.pivot(r, q, &alpha);
            if step <= tiny {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
        }
    }
}
