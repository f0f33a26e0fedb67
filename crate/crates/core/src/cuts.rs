//! ab-cuts for the XY relaxation and the projection cone of the extended AJ
//! relaxation.
//!
//! For a pair `(a, b)` and a point `(x*, z*)`, the separation problem is the
//! capacitated transportation LP
//!
//! ```text
//! min  sum_{k != a, l != b} p[a][k] d[b][l] x_kl
//!      -sum_k x_kl = -x*_ab      for l != b    (beta1_l)
//!      -sum_l x_kl = -x*_ab      for k != a    (beta2_k)
//!      -x_kl      >= -x*_kl                    (delta_kl >= 0)
//!       x_kl      >= 0
//! ```
//!
//! Any dual feasible `(beta1, beta2, delta)` gives the valid inequality
//! `z_ab >= -(sum beta1 + sum beta2) x_ab - sum delta_kl x_kl`, violated by
//! `(x*, z*)` when its dual objective exceeds `z*_ab`.

use itertools::Itertools;
use log::warn;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{QapError, Result};
use crate::instance::QapInstance;
use crate::lap::{enumerate_argmin, reduced_cost, reduced_indices, BoundTables, Sense, ENUMERATE_MAX_M};
use crate::linearizations::build_aj_plus;
use crate::lpcore::{self, LpModel, LpStatus, ObjectiveSense, Relation};
use crate::matrix::SquareMatrix;
use crate::scalar::{tol, Scalar};

/// Largest instance for [`cut_is_valid`].
pub const VALIDITY_MAX_N: usize = 6;
/// Largest instance for [`separate_full_projection`].
pub const FULL_PROJECTION_MAX_N: usize = 5;

/// `z_ab >= coef * x_ab - sum_{k != a, l != b} delta[k][l] * x_kl`, 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct AbCut<T> {
    pub a: usize,
    pub b: usize,
    pub coef: T,
    /// `n x n`; row `a` and column `b` are zero.
    pub delta: SquareMatrix<T>,
    /// Dual objective of the separation LP that produced the cut.
    pub dual_objective: T,
}

impl<T: Scalar> AbCut<T> {
    pub fn n(&self) -> usize {
        self.delta.dim()
    }

    /// Cut with `delta = 0` and coefficient `l_ab`: the XY lower row.
    pub fn from_lower_bound(bounds: &BoundTables<T>, a: usize, b: usize) -> Self {
        Self {
            a,
            b,
            coef: bounds.l[(a, b)],
            delta: SquareMatrix::zeros(bounds.n()),
            dual_objective: T::zero(),
        }
    }

    /// Right-hand side at `x`.
    pub fn rhs(&self, x: &SquareMatrix<T>) -> T {
        let mut v = self.coef * x[(self.a, self.b)];
        for (k, l) in self.delta_support() {
            v -= self.delta[(k, l)] * x[(k, l)];
        }
        v
    }

    /// `rhs(x) - z_ab`; positive means violated.
    pub fn violation(&self, x: &SquareMatrix<T>, z: &SquareMatrix<T>) -> T {
        self.rhs(x) - z[(self.a, self.b)]
    }

    fn delta_support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n();
        (0..n)
            .filter(move |&k| k != self.a)
            .cartesian_product((0..n).filter(move |&l| l != self.b))
            .filter(move |&(k, l)| self.delta[(k, l)] != T::zero())
    }

    /// Row `z_ab - coef x_ab + sum delta x_kl >= 0` given the columns of
    /// `x[i,j]` and `z[i,j]`.
    pub fn to_row(&self, x_col: impl Fn(usize, usize) -> usize, z_col: impl Fn(usize, usize) -> usize) -> Vec<(usize, T)> {
        let mut row = vec![(z_col(self.a, self.b), T::one()), (x_col(self.a, self.b), -self.coef)];
        for (k, l) in self.delta_support() {
            row.push((x_col(k, l), self.delta[(k, l)]));
        }
        row
    }

    pub fn row_name(&self) -> String {
        format!("abcut[{},{}]", self.a + 1, self.b + 1)
    }
}

/// JSON form: 1-based `a`, `b`, `coef_ab` and sparse `delta` triples.
impl<T: Scalar> Serialize for AbCut<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let delta: Vec<(usize, usize, T)> = self
            .delta_support()
            .map(|(k, l)| (k + 1, l + 1, self.delta[(k, l)]))
            .collect();
        let mut st = s.serialize_struct("AbCut", 5)?;
        st.serialize_field("a", &(self.a + 1))?;
        st.serialize_field("b", &(self.b + 1))?;
        st.serialize_field("coef_ab", &self.coef)?;
        st.serialize_field("delta", &delta)?;
        st.serialize_field("dual_objective", &self.dual_objective)?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeparationStatus {
    CutFound,
    NoViolation,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationOutcome<T> {
    pub status: SeparationStatus,
    pub cut: Option<AbCut<T>>,
    /// Separation optimum minus `z*_ab`; zero when skipped.
    pub violation: T,
    /// Whether the cut came from an infeasibility certificate.
    pub from_ray: bool,
}

impl<T: Scalar> SeparationOutcome<T> {
    fn skipped() -> Self {
        Self {
            status: SeparationStatus::Skipped,
            cut: None,
            violation: T::zero(),
            from_ray: false,
        }
    }
}

fn check_point<T: Scalar>(n: usize, x: &SquareMatrix<T>, z: Option<&SquareMatrix<T>>) -> Result<()> {
    if x.dim() != n || z.is_some_and(|z| z.dim() != n) {
        return Err(QapError::Argument(format!("point size does not match n = {n}")));
    }
    Ok(())
}

/// Cheap test whether pair `(a, b)` can possibly yield a violated ab-cut.
/// `false` when `x*_ab` is zero, or when some optimal assignment of the
/// `(a, b)` subproblem fits under `x* / x*_ab`.
pub fn prefilter<T: Scalar>(
    instance: &QapInstance<T>,
    bounds: &BoundTables<T>,
    a: usize,
    b: usize,
    x_star: &SquareMatrix<T>,
) -> Result<bool> {
    let n = instance.n();
    check_point(n, x_star, None)?;
    let xab = x_star[(a, b)];
    if xab <= T::tol(tol::EXACT) {
        return Ok(false);
    }
    let rows = reduced_indices(n, a);
    let cols = reduced_indices(n, b);
    let fits = |assignment: &[usize]| {
        assignment
            .iter()
            .enumerate()
            .all(|(r, &c)| T::one() <= x_star[(rows[r], cols[c])] / xab + T::tol(tol::EXACT))
    };
    if n - 1 <= ENUMERATE_MAX_M {
        let all = enumerate_argmin(&reduced_cost(instance, a, b), Sense::Min)?;
        Ok(!all.iter().any(|asg| fits(asg)))
    } else {
        Ok(!fits(&bounds.l_result(a, b).assignment))
    }
}

/// The separation LP for `(a, b)` and the column of each `(k, l)`.
fn separation_model<T: Scalar>(
    instance: &QapInstance<T>,
    a: usize,
    b: usize,
    x_star: &SquareMatrix<T>,
) -> (LpModel<T>, Vec<(usize, usize)>) {
    let n = instance.n();
    let rows = reduced_indices(n, a);
    let cols = reduced_indices(n, b);
    let pairs: Vec<(usize, usize)> = rows.iter().copied().cartesian_product(cols.iter().copied()).collect();
    let mut m = LpModel::new(ObjectiveSense::Minimize);
    for &(k, l) in &pairs {
        let v = m.add_variable(format!("x[{},{}]", k + 1, l + 1), T::zero(), T::infinity(), false);
        m.objective.push((v, instance.coef(a, b, k, l)));
    }
    let col_of = |k: usize, l: usize| pairs.iter().position(|&p| p == (k, l)).expect("pair present");
    let xab = x_star[(a, b)];
    for &l in &cols {
        let row = rows.iter().map(|&k| (col_of(k, l), -T::one())).collect();
        m.add_constraint(format!("col[{}]", l + 1), row, Relation::Eq, -xab);
    }
    for &k in &rows {
        let row = cols.iter().map(|&l| (col_of(k, l), -T::one())).collect();
        m.add_constraint(format!("row[{}]", k + 1), row, Relation::Eq, -xab);
    }
    for (v, &(k, l)) in pairs.iter().enumerate() {
        m.add_constraint(
            format!("cap[{},{}]", k + 1, l + 1),
            vec![(v, -T::one())],
            Relation::Ge,
            -x_star[(k, l)],
        );
    }
    (m, pairs)
}

/// Builds a cut from row multipliers of the separation LP.
fn cut_from_multipliers<T: Scalar>(n: usize, pairs: &[(usize, usize)], y: &[T]) -> (T, SquareMatrix<T>) {
    let eq_rows = 2 * (n - 1);
    let coef = -y[..eq_rows].iter().copied().sum::<T>();
    let mut delta = SquareMatrix::zeros(n);
    for (t, &(k, l)) in pairs.iter().enumerate() {
        let v = y[eq_rows + t];
        delta[(k, l)] = if v.abs() <= T::tol(tol::EXACT) { T::zero() } else { v };
    }
    (coef, delta)
}

/// Solves the separation LP of `(a, b)` at `(x*, z*)`. Pairs rejected by
/// [`prefilter`] are skipped without solving.
pub fn separate_ab<T: Scalar>(
    instance: &QapInstance<T>,
    bounds: &BoundTables<T>,
    a: usize,
    b: usize,
    x_star: &SquareMatrix<T>,
    z_star: &SquareMatrix<T>,
) -> Result<SeparationOutcome<T>> {
    if !prefilter(instance, bounds, a, b, x_star)? {
        return Ok(SeparationOutcome::skipped());
    }
    separate_ab_unfiltered(instance, bounds, a, b, x_star, z_star)
}

/// [`separate_ab`] without the prefilter.
pub fn separate_ab_unfiltered<T: Scalar>(
    instance: &QapInstance<T>,
    bounds: &BoundTables<T>,
    a: usize,
    b: usize,
    x_star: &SquareMatrix<T>,
    z_star: &SquareMatrix<T>,
) -> Result<SeparationOutcome<T>> {
    let n = instance.n();
    check_point(n, x_star, Some(z_star))?;
    if n < 2 || a >= n || b >= n {
        return Err(QapError::Argument(format!("pair ({}, {}) invalid for n = {n}", a + 1, b + 1)));
    }
    let threshold = T::tol(tol::VIOLATION);
    let (model, pairs) = separation_model(instance, a, b, x_star);
    let sol = lpcore::solve(&model)?;
    match sol.status {
        LpStatus::Optimal => {
            let dual_obj = lpcore::dual_objective(&sol, &model)?;
            let (coef, delta) = cut_from_multipliers(n, &pairs, &sol.duals);
            let cut = AbCut {
                a,
                b,
                coef,
                delta,
                dual_objective: dual_obj,
            };
            let violation = dual_obj - z_star[(a, b)];
            if violation > threshold {
                Ok(SeparationOutcome {
                    status: SeparationStatus::CutFound,
                    cut: Some(cut),
                    violation,
                    from_ray: false,
                })
            } else {
                Ok(SeparationOutcome {
                    status: SeparationStatus::NoViolation,
                    cut: None,
                    violation,
                    from_ray: false,
                })
            }
        }
        LpStatus::Infeasible => {
            let ray = sol
                .farkas
                .ok_or_else(|| QapError::Lp("infeasible separation LP without certificate".into()))?;
            // Dual feasible base from the assignment duals (delta = 0),
            // pushed along the ray until the violation is 1.
            let lap = bounds.l_result(a, b);
            let mut base: Vec<T> = lap.col_duals.iter().chain(&lap.row_duals).map(|&v| -v).collect();
            base.extend(std::iter::repeat_n(T::zero(), pairs.len()));
            let base_obj = lap.value * x_star[(a, b)];
            let ray_obj: T = model.constraints.iter().zip(&ray).map(|(c, &y)| y * c.rhs).sum();
            let target = z_star[(a, b)] + T::one();
            let t = if ray_obj > T::zero() {
                ((target - base_obj) / ray_obj).max(T::zero())
            } else {
                T::zero()
            };
            let y: Vec<T> = base.iter().zip(&ray).map(|(&b0, &r)| b0 + t * r).collect();
            let (coef, delta) = cut_from_multipliers(n, &pairs, &y);
            let dual_obj: T = model.constraints.iter().zip(&y).map(|(c, &v)| v * c.rhs).sum();
            warn!(
                "separation LP for pair ({}, {}) is infeasible; cut taken from the certificate",
                a + 1,
                b + 1
            );
            Ok(SeparationOutcome {
                status: SeparationStatus::CutFound,
                cut: Some(AbCut {
                    a,
                    b,
                    coef,
                    delta,
                    dual_objective: dual_obj,
                }),
                violation: dual_obj - z_star[(a, b)],
                from_ray: true,
            })
        }
        other => Err(QapError::Lp(format!(
            "separation LP for pair ({}, {}) ended with status {other:?}",
            a + 1,
            b + 1
        ))),
    }
}

/// Checks the cut at every permutation point `(x, z)` with
/// `z_ab = x_ab * sum_{k != a} p[a][k] d[b][phi(k)]`.
pub fn cut_is_valid<T: Scalar>(instance: &QapInstance<T>, cut: &AbCut<T>) -> Result<bool> {
    let n = instance.n();
    if n > VALIDITY_MAX_N {
        return Err(QapError::capacity("instance size for cut validation", n, VALIDITY_MAX_N));
    }
    if cut.n() != n {
        return Err(QapError::Argument("cut and instance sizes differ".into()));
    }
    let eps = T::tol(tol::FEASIBILITY);
    for images in (0..n).permutations(n) {
        let x = SquareMatrix::from_fn(n, |i, j| if images[i] == j { T::one() } else { T::zero() });
        let mut z = SquareMatrix::zeros(n);
        if images[cut.a] == cut.b {
            z[(cut.a, cut.b)] = (0..n)
                .filter(|&k| k != cut.a)
                .map(|k| instance.coef(cut.a, cut.b, k, images[k]))
                .sum();
        }
        if cut.violation(&x, &z) > eps {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Multipliers `(alpha, beta1, beta2, gamma)` of the extended AJ system,
/// 0-based and stored densely:
/// `alpha[(i, j)]`, `beta1[(l, i, j)]` (`l != j`), `beta2[(k, i, j)]`
/// (`k != i`), `gamma[(i, j, k, l)]` (`i != k`, `j != l`). Entries outside
/// those index sets are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeElement<T> {
    pub n: usize,
    pub alpha: SquareMatrix<T>,
    beta1: Vec<T>,
    beta2: Vec<T>,
    gamma: Vec<T>,
}

impl<T: Scalar> ConeElement<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            alpha: SquareMatrix::zeros(n),
            beta1: vec![T::zero(); n * n * n],
            beta2: vec![T::zero(); n * n * n],
            gamma: vec![T::zero(); n * n * n * n],
        }
    }

    fn i3(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.n + b) * self.n + c
    }

    fn i4(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    pub fn beta1(&self, l: usize, i: usize, j: usize) -> T {
        self.beta1[self.i3(l, i, j)]
    }

    pub fn set_beta1(&mut self, l: usize, i: usize, j: usize, v: T) {
        let t = self.i3(l, i, j);
        self.beta1[t] = v;
    }

    pub fn beta2(&self, k: usize, i: usize, j: usize) -> T {
        self.beta2[self.i3(k, i, j)]
    }

    pub fn set_beta2(&mut self, k: usize, i: usize, j: usize, v: T) {
        let t = self.i3(k, i, j);
        self.beta2[t] = v;
    }

    pub fn gamma(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        self.gamma[self.i4(i, j, k, l)]
    }

    pub fn set_gamma(&mut self, i: usize, j: usize, k: usize, l: usize, v: T) {
        let t = self.i4(i, j, k, l);
        self.gamma[t] = v;
    }

    /// Coefficient of `x_ij` in the implied inequality
    /// `sum alpha z - sum coef_x x <= 0`.
    pub fn x_coefficient(&self, i: usize, j: usize) -> T {
        let n = self.n;
        let b1: T = (0..n).filter(|&l| l != j).map(|l| self.beta1(l, i, j)).sum();
        let b2: T = (0..n).filter(|&k| k != i).map(|k| self.beta2(k, i, j)).sum();
        b1 + b2
    }

    /// `sum alpha_ij z_ij - sum x_coefficient(i, j) x_ij`; positive means
    /// the implied inequality is violated at `(x, z)`.
    pub fn implied_lhs(&self, x: &SquareMatrix<T>, z: &SquareMatrix<T>) -> T {
        let n = self.n;
        let mut v = T::zero();
        for i in 0..n {
            for j in 0..n {
                v += self.alpha[(i, j)] * z[(i, j)] - self.x_coefficient(i, j) * x[(i, j)];
            }
        }
        v
    }
}

/// Checks `p_ik d_jl alpha_ij <= beta1_jkl + beta2_ikl + gamma_ijkl` and
/// `gamma_ijkl = -gamma_klij` for all `i != k`, `j != l`.
pub fn verify_cone_membership<T: Scalar>(instance: &QapInstance<T>, elem: &ConeElement<T>) -> Result<bool> {
    let n = instance.n();
    if elem.n != n || elem.alpha.dim() != n {
        return Err(QapError::Argument(format!(
            "cone element is for n = {}, instance has n = {n}",
            elem.n
        )));
    }
    let eps = T::tol(tol::FEASIBILITY);
    for (i, j, k, l) in (0..n).cartesian_product(0..n).cartesian_product(0..n).cartesian_product(0..n).map(|(((i, j), k), l)| (i, j, k, l)) {
        if i == k || j == l {
            continue;
        }
        let lhs = instance.coef(i, j, k, l) * elem.alpha[(i, j)];
        let rhs = elem.beta1(j, k, l) + elem.beta2(i, k, l) + elem.gamma(i, j, k, l);
        if lhs > rhs + eps {
            return Ok(false);
        }
        if (elem.gamma(i, j, k, l) + elem.gamma(k, l, i, j)).abs() > eps {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Multipliers deriving `z_ab >= l_ab x_ab` from the extended AJ system,
/// with the `(a, b)` betas taken from the negated min-assignment duals.
pub fn lower_row_multipliers<T: Scalar>(instance: &QapInstance<T>, bounds: &BoundTables<T>, a: usize, b: usize) -> ConeElement<T> {
    let n = instance.n();
    let mut e = ConeElement::zeros(n);
    e.alpha[(a, b)] = -T::one();
    for k in (0..n).filter(|&k| k != a) {
        for l in (0..n).filter(|&l| l != b) {
            let c = instance.coef(a, b, k, l);
            e.set_gamma(a, b, k, l, -c);
            e.set_gamma(k, l, a, b, c);
        }
    }
    let lap = bounds.l_result(a, b);
    for (r, &k) in reduced_indices(n, a).iter().enumerate() {
        e.set_beta2(k, a, b, -lap.row_duals[r]);
    }
    for (c, &l) in reduced_indices(n, b).iter().enumerate() {
        e.set_beta1(l, a, b, -lap.col_duals[c]);
    }
    e
}

/// Multipliers deriving `z_ab >= sum p d x + u_ab (x_ab - 1)`, using the
/// duals of the maximization subproblem with halved costs.
pub fn upper_row_multipliers<T: Scalar>(instance: &QapInstance<T>, a: usize, b: usize) -> Result<ConeElement<T>> {
    let n = instance.n();
    let half = T::of(0.5);
    let cost: Vec<Vec<T>> = reduced_cost(instance, a, b)
        .into_iter()
        .map(|r| r.into_iter().map(|v| v * half).collect())
        .collect();
    let lap = crate::lap::solve_lap(&cost, Sense::Max)?;
    let rows = reduced_indices(n, a);
    let cols = reduced_indices(n, b);
    let mut b1_ab = vec![T::zero(); n];
    let mut b2_ab = vec![T::zero(); n];
    for (c, &l) in cols.iter().enumerate() {
        b1_ab[l] = lap.col_duals[c];
    }
    for (r, &k) in rows.iter().enumerate() {
        b2_ab[k] = lap.row_duals[r];
    }
    let pd = |i: usize, j: usize| instance.coef(a, b, i, j) * half;

    let mut e = ConeElement::zeros(n);
    e.alpha[(a, b)] = -T::one();
    for i in 0..n {
        for j in 0..n {
            if (i, j) == (a, b) {
                continue;
            }
            for l in (0..n).filter(|&l| l != j) {
                let v = if i != a && j != b {
                    if l == b {
                        -pd(i, j)
                    } else {
                        T::zero()
                    }
                } else if i == a {
                    // j != b
                    if l == b {
                        b1_ab[j]
                    } else {
                        b1_ab[l]
                    }
                } else {
                    // j == b, i != a
                    b1_ab[l]
                };
                e.set_beta1(l, i, j, v);
            }
            for k in (0..n).filter(|&k| k != i) {
                let v = if i != a && j != b {
                    if k == a {
                        -pd(i, j)
                    } else {
                        T::zero()
                    }
                } else if i == a {
                    b2_ab[k]
                } else if k == a {
                    b2_ab[i]
                } else {
                    b2_ab[k]
                };
                e.set_beta2(k, i, j, v);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in (0..n).filter(|&k| k != i) {
                for l in (0..n).filter(|&l| l != j) {
                    let v = if (i, j) == (a, b) || (k, l) == (a, b) {
                        T::zero()
                    } else if k == a && l != b {
                        -pd(i, j)
                    } else if i == a && j != b {
                        pd(k, l)
                    } else if k != a && l == b {
                        -pd(i, j)
                    } else if i != a && j == b {
                        pd(k, l)
                    } else {
                        T::zero()
                    };
                    e.set_gamma(i, j, k, l, v);
                }
            }
        }
    }
    Ok(e)
}

/// A cone element whose implied inequality cuts off `(x*, z*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionCertificate<T> {
    pub element: ConeElement<T>,
    /// `implied_lhs(x*, z*)`, positive.
    pub violation: T,
}

/// Tests whether `(x*, z*)` lies in the projection of the extended AJ
/// relaxation. `None` if it does; otherwise a violated inequality built
/// from the infeasibility certificate of the lifting LP.
pub fn separate_full_projection<T: Scalar>(
    instance: &QapInstance<T>,
    x_star: &SquareMatrix<T>,
    z_star: &SquareMatrix<T>,
) -> Result<Option<ProjectionCertificate<T>>> {
    let n = instance.n();
    if n > FULL_PROJECTION_MAX_N {
        return Err(QapError::capacity("instance size for full-projection separation", n, FULL_PROJECTION_MAX_N));
    }
    check_point(n, x_star, Some(z_star))?;
    let lin = build_aj_plus(instance)?;
    let mut fixes = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            // Clamp tiny negative LP noise into the x box.
            let xv = x_star[(i, j)].max(T::zero()).min(T::one());
            fixes.push((lin.x_col(i, j), xv));
            fixes.push((lin.z_col(i, j).expect("extended model has z"), z_star[(i, j)]));
        }
    }
    let fixed = lin.model.fix_variables(&fixes)?;
    let sol = lpcore::solve(&fixed)?;
    match sol.status {
        LpStatus::Optimal => Ok(None),
        LpStatus::Infeasible => {
            let m = sol
                .farkas
                .ok_or_else(|| QapError::Lp("infeasible lifting LP without certificate".into()))?;
            let mut e = ConeElement::zeros(n);
            for (c, &mult) in fixed.constraints.iter().zip(&m) {
                let idx = parse_row_indices(&c.name);
                match (c.name.split('[').next().unwrap_or(""), idx.as_slice()) {
                    ("aj_link", &[i, j]) => e.alpha[(i, j)] = -mult,
                    ("aj_col", &[j, k, l]) => e.set_beta1(j, k, l, -mult),
                    ("aj_row", &[i, k, l]) => e.set_beta2(i, k, l, -mult),
                    ("aj_sym", &[i, j, k, l]) => {
                        e.set_gamma(i, j, k, l, -mult);
                        e.set_gamma(k, l, i, j, mult);
                    }
                    _ => {}
                }
            }
            if !verify_cone_membership(instance, &e)? {
                return Err(QapError::Lp("certificate of the lifting LP is not a cone element".into()));
            }
            let violation = e.implied_lhs(x_star, z_star);
            Ok(Some(ProjectionCertificate { element: e, violation }))
        }
        other => Err(QapError::Lp(format!("lifting LP ended with status {other:?}"))),
    }
}

/// 0-based indices from a row name like `aj_col[2,1,3]`.
fn parse_row_indices(name: &str) -> Vec<usize> {
    name.split_once('[')
        .and_then(|(_, rest)| rest.strip_suffix(']'))
        .map(|inner| inner.split(',').filter_map(|t| t.parse::<usize>().ok()).map(|v| v - 1).collect())
        .unwrap_or_default()
}

/// Distinct cuts in insertion order. Two cuts are the same when they share
/// `(a, b)` and all coefficients agree within `1e-7`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CutPool<T> {
    cuts: Vec<AbCut<T>>,
}

impl<T: Scalar> CutPool<T> {
    pub fn new() -> Self {
        Self { cuts: Vec::new() }
    }

    /// Returns `true` if the cut was new.
    pub fn add(&mut self, cut: AbCut<T>) -> bool {
        let eps = T::tol(tol::FEASIBILITY);
        let dup = self.cuts.iter().any(|c| {
            c.a == cut.a
                && c.b == cut.b
                && (c.coef - cut.coef).abs() <= eps
                && c.delta.max_abs_diff(&cut.delta) <= eps
        });
        if !dup {
            self.cuts.push(cut);
        }
        !dup
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn cuts(&self) -> &[AbCut<T>] {
        &self.cuts
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AbCut<T>> {
        self.cuts.iter()
    }
}
