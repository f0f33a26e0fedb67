//! MILP linearizations of the QAP as [`LpModel`]s.
//!
//! Every model starts with the `n^2` assignment variables `x[i,j]` (column
//! `i * n + j`) and the `2n` assignment equalities. The XY and
//! Kaufman–Broeckx models add `z[i,j]`; the four-index models add
//! `y[i,j,k,l]` for `i != k`, `j != l`. Names use 1-based indices.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{QapError, Result};
use crate::instance::{Permutation, QapInstance};
use crate::lap::BoundTables;
use crate::lpcore::{self, LpModel, LpSolution, ObjectiveSense, Relation};
use crate::matrix::SquareMatrix;
use crate::scalar::Scalar;

/// Largest instance for which the four-index relaxations are solved.
pub const FOUR_INDEX_MAX_N: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LinearizationKind {
    XiaYuan,
    AdamsJohnson,
    Lawler,
    FriezeYadegarAggregate,
    FriezeYadegar,
    KaufmanBroeckx,
}

impl LinearizationKind {
    pub const ALL: [LinearizationKind; 6] = [
        LinearizationKind::XiaYuan,
        LinearizationKind::AdamsJohnson,
        LinearizationKind::Lawler,
        LinearizationKind::FriezeYadegarAggregate,
        LinearizationKind::FriezeYadegar,
        LinearizationKind::KaufmanBroeckx,
    ];

    /// Short name used on the command line and in reports.
    pub fn short_name(self) -> &'static str {
        match self {
            LinearizationKind::XiaYuan => "xy",
            LinearizationKind::AdamsJohnson => "aj",
            LinearizationKind::Lawler => "lawler",
            LinearizationKind::FriezeYadegarAggregate => "fy-aggregate",
            LinearizationKind::FriezeYadegar => "fy",
            LinearizationKind::KaufmanBroeckx => "kb",
        }
    }

    /// Whether the model uses `y` variables (and therefore `O(n^4)` columns).
    pub fn is_four_index(self) -> bool {
        !matches!(self, LinearizationKind::XiaYuan | LinearizationKind::KaufmanBroeckx)
    }

    pub fn needs_bounds(self) -> bool {
        !self.is_four_index()
    }
}

impl fmt::Display for LinearizationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for LinearizationKind {
    type Err = QapError;

    fn from_str(s: &str) -> Result<Self> {
        LinearizationKind::ALL
            .into_iter()
            .find(|k| k.short_name() == s)
            .ok_or_else(|| QapError::Argument(format!("unknown linearization {s:?}")))
    }
}

/// Right-hand sides of the third and fourth row families of the
/// four-family Frieze–Yadegar model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FyVariant {
    /// `sum_{k != i} y[i,j,k,l] = x[i,j]` and `sum_{l != j} y[i,j,k,l] = x[i,j]`.
    #[default]
    Standard,
    /// The sum-index-ambiguous form: right-hand side `sum_{k != i} x[k,l]`
    /// (resp. `sum_{l != j} x[k,l]`). Permutation points generally violate it.
    Printed,
}

impl FromStr for FyVariant {
    type Err = QapError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(FyVariant::Standard),
            "printed" => Ok(FyVariant::Printed),
            _ => Err(QapError::Argument(format!("unknown FY variant {s:?}"))),
        }
    }
}

/// A variable of a linearized model, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VariableIndex {
    X(usize, usize),
    Z(usize, usize),
    Y(usize, usize, usize, usize),
}

impl VariableIndex {
    pub fn name(self) -> String {
        match self {
            VariableIndex::X(i, j) => format!("x[{},{}]", i + 1, j + 1),
            VariableIndex::Z(i, j) => format!("z[{},{}]", i + 1, j + 1),
            VariableIndex::Y(i, j, k, l) => format!("y[{},{},{},{}]", i + 1, j + 1, k + 1, l + 1),
        }
    }
}

/// Values of `y[i,j,k,l]`, keyed 0-based.
pub type YValues<T> = BTreeMap<(usize, usize, usize, usize), T>;

/// An LP model plus the map from [`VariableIndex`] to columns.
#[derive(Debug, Clone)]
pub struct Linearization<T> {
    pub kind: LinearizationKind,
    pub n: usize,
    pub model: LpModel<T>,
    /// Set for the four-family FY model.
    pub fy_variant: Option<FyVariant>,
    z_start: Option<usize>,
    /// Column of `y[i,j,k,l]` at `((i * n + j) * n + k) * n + l`.
    y_cols: Vec<Option<usize>>,
}

impl<T: Scalar> Linearization<T> {
    pub fn column(&self, v: VariableIndex) -> Option<usize> {
        let n = self.n;
        match v {
            VariableIndex::X(i, j) if i < n && j < n => Some(i * n + j),
            VariableIndex::Z(i, j) if i < n && j < n => self.z_start.map(|s| s + i * n + j),
            VariableIndex::Y(i, j, k, l) if i < n && j < n && k < n && l < n => {
                self.y_cols.get(((i * n + j) * n + k) * n + l).copied().flatten()
            }
            _ => None,
        }
    }

    pub fn x_col(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    pub fn z_col(&self, i: usize, j: usize) -> Option<usize> {
        self.column(VariableIndex::Z(i, j))
    }

    pub fn has_z(&self) -> bool {
        self.z_start.is_some()
    }

    pub fn has_y(&self) -> bool {
        !self.y_cols.is_empty()
    }

    /// Reads the `x` block of a primal vector.
    pub fn x_values(&self, primal: &[T]) -> SquareMatrix<T> {
        SquareMatrix::from_fn(self.n, |i, j| primal[self.x_col(i, j)])
    }

    /// Reads the `z` block of a primal vector, if the model has one.
    pub fn z_values(&self, primal: &[T]) -> Option<SquareMatrix<T>> {
        let s = self.z_start?;
        Some(SquareMatrix::from_fn(self.n, |i, j| primal[s + i * self.n + j]))
    }

    pub fn y_values(&self, primal: &[T]) -> YValues<T> {
        let n = self.n;
        let mut out = BTreeMap::new();
        for (t, col) in self.y_cols.iter().enumerate() {
            if let Some(c) = col {
                let (ij, l) = (t / n, t % n);
                let (i, j, k) = (ij / (n * n), (ij / n) % n, ij % n);
                out.insert((i, j, k, l), primal[*c]);
            }
        }
        out
    }

    /// The full primal vector encoding `perm`: `x` as the permutation
    /// matrix, `y` as its outer product and `z[i,j] = x[i,j] * sum p d x`.
    pub fn completion(&self, instance: &QapInstance<T>, perm: &Permutation) -> Result<Vec<T>> {
        let n = self.n;
        if instance.n() != n || perm.len() != n {
            return Err(QapError::Argument("permutation, instance and model sizes differ".into()));
        }
        let mut v = vec![T::zero(); self.model.num_vars()];
        for i in 0..n {
            v[self.x_col(i, perm.image(i))] = T::one();
        }
        if let Some(s) = self.z_start {
            for i in 0..n {
                let j = perm.image(i);
                v[s + i * n + j] = (0..n).filter(|&k| k != i).map(|k| instance.coef(i, j, k, perm.image(k))).sum();
            }
        }
        for i in 0..n {
            for k in (0..n).filter(|&k| k != i) {
                if let Some(c) = self.column(VariableIndex::Y(i, perm.image(i), k, perm.image(k))) {
                    v[c] = T::one();
                }
            }
        }
        Ok(v)
    }
}

fn x_name(i: usize, j: usize) -> String {
    VariableIndex::X(i, j).name()
}

/// Creates the model with the `x` block, the assignment rows and the
/// linear objective part.
fn base<T: Scalar>(instance: &QapInstance<T>, kind: LinearizationKind) -> Linearization<T> {
    let n = instance.n();
    let mut model = LpModel::new(ObjectiveSense::Minimize);
    for i in 0..n {
        for j in 0..n {
            let col = model.add_variable(x_name(i, j), T::zero(), T::one(), true);
            let c = instance.linear()[(i, j)];
            if c != T::zero() {
                model.objective.push((col, c));
            }
        }
    }
    for i in 0..n {
        let row = (0..n).map(|j| (i * n + j, T::one())).collect();
        model.add_constraint(format!("assign_row[{}]", i + 1), row, Relation::Eq, T::one());
    }
    for j in 0..n {
        let col = (0..n).map(|i| (i * n + j, T::one())).collect();
        model.add_constraint(format!("assign_col[{}]", j + 1), col, Relation::Eq, T::one());
    }
    Linearization {
        kind,
        n,
        model,
        fy_variant: None,
        z_start: None,
        y_cols: Vec::new(),
    }
}

fn check_size<T: Scalar>(instance: &QapInstance<T>) -> Result<usize> {
    let n = instance.n();
    if n < 2 {
        return Err(QapError::Domain(format!("linearizations need n >= 2, got {n}")));
    }
    Ok(n)
}

fn check_bounds<T: Scalar>(instance: &QapInstance<T>, bounds: &BoundTables<T>) -> Result<()> {
    if bounds.n() != instance.n() {
        return Err(QapError::Argument(format!(
            "bound tables are for n = {}, instance has n = {}",
            bounds.n(),
            instance.n()
        )));
    }
    Ok(())
}

fn xy_like<T: Scalar>(instance: &QapInstance<T>, bounds: &BoundTables<T>, kind: LinearizationKind) -> Result<Linearization<T>> {
    let n = check_size(instance)?;
    check_bounds(instance, bounds)?;
    let mut lin = base(instance, kind);
    let z0 = lin.model.num_vars();
    for i in 0..n {
        for j in 0..n {
            let lower = bounds.l[(i, j)].min(T::zero());
            let col = lin.model.add_variable(VariableIndex::Z(i, j).name(), lower, T::infinity(), false);
            lin.model.objective.push((col, T::one()));
        }
    }
    lin.z_start = Some(z0);
    if kind == LinearizationKind::XiaYuan {
        for i in 0..n {
            for j in 0..n {
                let row = vec![(z0 + i * n + j, T::one()), (i * n + j, -bounds.l[(i, j)])];
                lin.model
                    .add_constraint(format!("xy_lower[{},{}]", i + 1, j + 1), row, Relation::Ge, T::zero());
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let u = bounds.u[(i, j)];
            let mut row = vec![(z0 + i * n + j, T::one()), (i * n + j, -u)];
            for k in (0..n).filter(|&k| k != i) {
                for l in (0..n).filter(|&l| l != j) {
                    let c = instance.coef(i, j, k, l);
                    if c != T::zero() {
                        row.push((k * n + l, -c));
                    }
                }
            }
            lin.model
                .add_constraint(format!("xy_upper[{},{}]", i + 1, j + 1), row, Relation::Ge, -u);
        }
    }
    Ok(lin)
}

/// Xia–Yuan: `z >= l x` and `z >= sum p d x + u (x - 1)`.
pub fn build_xy<T: Scalar>(instance: &QapInstance<T>, bounds: &BoundTables<T>) -> Result<Linearization<T>> {
    xy_like(instance, bounds, LinearizationKind::XiaYuan)
}

/// Kaufman–Broeckx: Xia–Yuan without the `z >= l x` rows.
pub fn build_kaufman_broeckx<T: Scalar>(instance: &QapInstance<T>, bounds: &BoundTables<T>) -> Result<Linearization<T>> {
    xy_like(instance, bounds, LinearizationKind::KaufmanBroeckx)
}

/// Adds `y` columns for all `i != k`, `j != l` with objective `p d` and the
/// given upper bound.
fn add_y<T: Scalar>(lin: &mut Linearization<T>, instance: &QapInstance<T>, upper: T) {
    let n = lin.n;
    lin.y_cols = vec![None; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in (0..n).filter(|&k| k != i) {
                for l in (0..n).filter(|&l| l != j) {
                    let col = lin
                        .model
                        .add_variable(VariableIndex::Y(i, j, k, l).name(), T::zero(), upper, false);
                    let c = instance.coef(i, j, k, l);
                    if c != T::zero() {
                        lin.model.objective.push((col, c));
                    }
                    lin.y_cols[((i * n + j) * n + k) * n + l] = Some(col);
                }
            }
        }
    }
}

fn y<T: Scalar>(lin: &Linearization<T>, i: usize, j: usize, k: usize, l: usize) -> usize {
    lin.column(VariableIndex::Y(i, j, k, l)).expect("y column exists for i != k, j != l")
}

/// Rows `sum_{i != k} y[i,j,k,l] = x[k,l]` for `j != l` and
/// `sum_{j != l} y[i,j,k,l] = x[k,l]` for `i != k`.
fn add_aj_sum_rows<T: Scalar>(lin: &mut Linearization<T>, prefix: &str) {
    let n = lin.n;
    for j in 0..n {
        for k in 0..n {
            for l in (0..n).filter(|&l| l != j) {
                let mut row: Vec<(usize, T)> = (0..n).filter(|&i| i != k).map(|i| (y(lin, i, j, k, l), T::one())).collect();
                row.push((k * n + l, -T::one()));
                lin.model.add_constraint(
                    format!("{prefix}_col[{},{},{}]", j + 1, k + 1, l + 1),
                    row,
                    Relation::Eq,
                    T::zero(),
                );
            }
        }
    }
    for i in 0..n {
        for k in (0..n).filter(|&k| k != i) {
            for l in 0..n {
                let mut row: Vec<(usize, T)> = (0..n).filter(|&j| j != l).map(|j| (y(lin, i, j, k, l), T::one())).collect();
                row.push((k * n + l, -T::one()));
                lin.model.add_constraint(
                    format!("{prefix}_row[{},{},{}]", i + 1, k + 1, l + 1),
                    row,
                    Relation::Eq,
                    T::zero(),
                );
            }
        }
    }
}

/// Adams–Johnson: `y` summed over `i` or `j` reproduces `x[k,l]`, plus
/// `y[i,j,k,l] = y[k,l,i,j]` once per unordered pair.
pub fn build_aj<T: Scalar>(instance: &QapInstance<T>) -> Result<Linearization<T>> {
    let n = check_size(instance)?;
    let mut lin = base(instance, LinearizationKind::AdamsJohnson);
    add_y(&mut lin, instance, T::infinity());
    add_aj_sum_rows(&mut lin, "aj");
    for i in 0..n {
        for j in 0..n {
            for k in (0..n).filter(|&k| k != i) {
                for l in (0..n).filter(|&l| l != j) {
                    if (i, j) < (k, l) {
                        let row = vec![(y(&lin, i, j, k, l), T::one()), (y(&lin, k, l, i, j), -T::one())];
                        lin.model.add_constraint(
                            format!("aj_sym[{},{},{},{}]", i + 1, j + 1, k + 1, l + 1),
                            row,
                            Relation::Eq,
                            T::zero(),
                        );
                    }
                }
            }
        }
    }
    Ok(lin)
}

/// The AJ model extended by free `z[i,j]` with `z[i,j] = sum p d y[i,j,.,.]`.
/// Fixing `x` and `z` in it tests whether a point lies in the projection of
/// the AJ relaxation.
pub fn build_aj_plus<T: Scalar>(instance: &QapInstance<T>) -> Result<Linearization<T>> {
    let mut lin = build_aj(instance)?;
    let n = lin.n;
    let z0 = lin.model.num_vars();
    for i in 0..n {
        for j in 0..n {
            lin.model
                .add_variable(VariableIndex::Z(i, j).name(), T::neg_infinity(), T::infinity(), false);
        }
    }
    lin.z_start = Some(z0);
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![(z0 + i * n + j, T::one())];
            for k in (0..n).filter(|&k| k != i) {
                for l in (0..n).filter(|&l| l != j) {
                    let c = instance.coef(i, j, k, l);
                    if c != T::zero() {
                        row.push((y(&lin, i, j, k, l), -c));
                    }
                }
            }
            lin.model
                .add_constraint(format!("aj_link[{},{}]", i + 1, j + 1), row, Relation::Eq, T::zero());
        }
    }
    Ok(lin)
}

/// Lawler: `sum y = n (n - 1)`, `x[i,j] + x[k,l] - 2 y[i,j,k,l] >= 0`,
/// `0 <= y <= 1`.
pub fn build_lawler<T: Scalar>(instance: &QapInstance<T>) -> Result<Linearization<T>> {
    let n = check_size(instance)?;
    let mut lin = base(instance, LinearizationKind::Lawler);
    add_y(&mut lin, instance, T::one());
    let all: Vec<(usize, T)> = lin.y_cols.iter().flatten().map(|&c| (c, T::one())).collect();
    lin.model
        .add_constraint("lawler_total", all, Relation::Eq, T::of((n * (n - 1)) as f64));
    for i in 0..n {
        for j in 0..n {
            for k in (0..n).filter(|&k| k != i) {
                for l in (0..n).filter(|&l| l != j) {
                    let row = vec![(i * n + j, T::one()), (k * n + l, T::one()), (y(&lin, i, j, k, l), -T::of(2.0))];
                    lin.model.add_constraint(
                        format!("lawler_pair[{},{},{},{}]", i + 1, j + 1, k + 1, l + 1),
                        row,
                        Relation::Ge,
                        T::zero(),
                    );
                }
            }
        }
    }
    Ok(lin)
}

/// Aggregated Frieze–Yadegar: `sum_{i != k, j != l} y[i,j,k,l] = (n - 1) x[k,l]`
/// and `sum_{k != i, l != j} y[i,j,k,l] = (n - 1) x[i,j]`, `0 <= y <= 1`.
pub fn build_fy_aggregate<T: Scalar>(instance: &QapInstance<T>) -> Result<Linearization<T>> {
    let n = check_size(instance)?;
    let mut lin = base(instance, LinearizationKind::FriezeYadegarAggregate);
    add_y(&mut lin, instance, T::one());
    let m = T::of((n - 1) as f64);
    for k in 0..n {
        for l in 0..n {
            let mut row = Vec::new();
            for i in (0..n).filter(|&i| i != k) {
                for j in (0..n).filter(|&j| j != l) {
                    row.push((y(&lin, i, j, k, l), T::one()));
                }
            }
            row.push((k * n + l, -m));
            lin.model
                .add_constraint(format!("fya_in[{},{}]", k + 1, l + 1), row, Relation::Eq, T::zero());
        }
    }
    for i in 0..n {
        for j in 0..n {
            let mut row = Vec::new();
            for k in (0..n).filter(|&k| k != i) {
                for l in (0..n).filter(|&l| l != j) {
                    row.push((y(&lin, i, j, k, l), T::one()));
                }
            }
            row.push((i * n + j, -m));
            lin.model
                .add_constraint(format!("fya_out[{},{}]", i + 1, j + 1), row, Relation::Eq, T::zero());
        }
    }
    Ok(lin)
}

/// Four-family Frieze–Yadegar: the two AJ sum families plus the two
/// families summing over `k` and over `l`, `0 <= y <= 1`.
pub fn build_fy<T: Scalar>(instance: &QapInstance<T>, variant: FyVariant) -> Result<Linearization<T>> {
    let n = check_size(instance)?;
    let mut lin = base(instance, LinearizationKind::FriezeYadegar);
    lin.fy_variant = Some(variant);
    add_y(&mut lin, instance, T::one());
    add_aj_sum_rows(&mut lin, "fy");
    for i in 0..n {
        for j in 0..n {
            for l in (0..n).filter(|&l| l != j) {
                let mut row: Vec<(usize, T)> = (0..n).filter(|&k| k != i).map(|k| (y(&lin, i, j, k, l), T::one())).collect();
                match variant {
                    FyVariant::Standard => row.push((i * n + j, -T::one())),
                    FyVariant::Printed => row.extend((0..n).filter(|&k| k != i).map(|k| (k * n + l, -T::one()))),
                }
                lin.model.add_constraint(
                    format!("fy_k[{},{},{}]", i + 1, j + 1, l + 1),
                    row,
                    Relation::Eq,
                    T::zero(),
                );
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in (0..n).filter(|&k| k != i) {
                let mut row: Vec<(usize, T)> = (0..n).filter(|&l| l != j).map(|l| (y(&lin, i, j, k, l), T::one())).collect();
                match variant {
                    FyVariant::Standard => row.push((i * n + j, -T::one())),
                    FyVariant::Printed => row.extend((0..n).filter(|&l| l != j).map(|l| (k * n + l, -T::one()))),
                }
                lin.model.add_constraint(
                    format!("fy_l[{},{},{}]", i + 1, j + 1, k + 1),
                    row,
                    Relation::Eq,
                    T::zero(),
                );
            }
        }
    }
    Ok(lin)
}

/// Builds any linearization. `bounds` is required for XY and
/// Kaufman–Broeckx and ignored otherwise.
pub fn build<T: Scalar>(
    instance: &QapInstance<T>,
    kind: LinearizationKind,
    bounds: Option<&BoundTables<T>>,
    fy_variant: FyVariant,
) -> Result<Linearization<T>> {
    let need = || bounds.ok_or_else(|| QapError::Argument(format!("{kind} needs bound tables")));
    match kind {
        LinearizationKind::XiaYuan => build_xy(instance, need()?),
        LinearizationKind::KaufmanBroeckx => build_kaufman_broeckx(instance, need()?),
        LinearizationKind::AdamsJohnson => build_aj(instance),
        LinearizationKind::Lawler => build_lawler(instance),
        LinearizationKind::FriezeYadegarAggregate => build_fy_aggregate(instance),
        LinearizationKind::FriezeYadegar => build_fy(instance, fy_variant),
    }
}

/// Solves the LP relaxation (integrality ignored). Four-index models are
/// limited to `n <= FOUR_INDEX_MAX_N`.
pub fn solve_relaxation<T: Scalar>(lin: &Linearization<T>) -> Result<LpSolution<T>> {
    if lin.has_y() && lin.n > FOUR_INDEX_MAX_N {
        return Err(QapError::capacity("instance size for a four-index relaxation", lin.n, FOUR_INDEX_MAX_N));
    }
    lpcore::solve(&lin.model)
}

/// `z[i,j] = sum_{k != i, l != j} p[i][k] d[j][l] y[i,j,k,l]`.
pub fn project_y_to_z<T: Scalar>(instance: &QapInstance<T>, y: &YValues<T>) -> Result<SquareMatrix<T>> {
    let n = instance.n();
    let mut z = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = T::zero();
            for k in (0..n).filter(|&k| k != i) {
                for l in (0..n).filter(|&l| l != j) {
                    let v = y.get(&(i, j, k, l)).ok_or_else(|| {
                        QapError::Argument(format!("missing {}", VariableIndex::Y(i, j, k, l).name()))
                    })?;
                    acc += instance.coef(i, j, k, l) * *v;
                }
            }
            z[(i, j)] = acc;
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use itertools::Itertools;

    use super::*;
    use crate::fixtures::{example1, example3};
    use crate::instance::evaluate;
    use crate::lap::compute_bounds;
    use crate::lpcore::LpStatus;

    fn all_kinds(inst: &QapInstance<f64>) -> Vec<Linearization<f64>> {
        let b = compute_bounds(inst).unwrap();
        LinearizationKind::ALL
            .iter()
            .map(|&k| build(inst, k, Some(&b), FyVariant::Standard).unwrap())
            .collect()
    }

    fn value(lin: &Linearization<f64>) -> f64 {
        let s = solve_relaxation(lin).unwrap();
        assert_eq!(s.status, LpStatus::Optimal, "{}", lin.kind);
        s.objective_value
    }

    #[test]
    fn counts_match_closed_forms() {
        for n in 2..=5usize {
            let inst = QapInstance::<f64>::random_uniform(n, n as u64).unwrap();
            let b = compute_bounds(&inst).unwrap();
            let n2 = n * n;
            let ny = n2 * (n - 1) * (n - 1);
            let xy = build_xy(&inst, &b).unwrap();
            assert_eq!((xy.model.num_vars(), xy.model.num_constraints()), (2 * n2, 2 * n + 2 * n2));
            let kb = build_kaufman_broeckx(&inst, &b).unwrap();
            assert_eq!((kb.model.num_vars(), kb.model.num_constraints()), (2 * n2, 2 * n + n2));
            let aj = build_aj(&inst).unwrap();
            assert_eq!(aj.model.num_vars(), n2 + ny);
            assert_eq!(aj.model.num_constraints(), 2 * n + 2 * n2 * (n - 1) + ny / 2);
            let lw = build_lawler(&inst).unwrap();
            assert_eq!((lw.model.num_vars(), lw.model.num_constraints()), (n2 + ny, 2 * n + 1 + ny));
            let fya = build_fy_aggregate(&inst).unwrap();
            assert_eq!((fya.model.num_vars(), fya.model.num_constraints()), (n2 + ny, 2 * n + 2 * n2));
            let fy = build_fy(&inst, FyVariant::Standard).unwrap();
            assert_eq!((fy.model.num_vars(), fy.model.num_constraints()), (n2 + ny, 2 * n + 4 * n2 * (n - 1)));
            let plus = build_aj_plus(&inst).unwrap();
            assert_eq!(plus.model.num_vars(), 2 * n2 + ny);
        }
    }

    #[test]
    fn xy_n3_has_18_columns_and_24_rows() {
        let inst = example1::<f64>();
        let xy = build_xy(&inst, &compute_bounds(&inst).unwrap()).unwrap();
        assert_eq!(xy.model.num_vars(), 18);
        assert_eq!(xy.model.num_constraints(), 24);
        let aj = build_aj(&inst).unwrap();
        assert_eq!(aj.model.num_vars() - 9, 36);
    }

    #[test]
    fn permutation_points_are_feasible_with_exact_objective() {
        for (seed, n) in [(1u64, 2usize), (2, 3), (3, 4)] {
            let mut inst = QapInstance::<f64>::random_uniform(n, seed).unwrap();
            if seed == 3 {
                let c = SquareMatrix::from_fn(n, |i, j| (i + 2 * j) as f64 / 7.0);
                inst = QapInstance::with_linear(inst.flow().clone(), inst.distance().clone(), c).unwrap();
            }
            for lin in all_kinds(&inst) {
                for images in (0..n).permutations(n) {
                    let perm = Permutation::new(images).unwrap();
                    let v = lin.completion(&inst, &perm).unwrap();
                    assert!(lin.model.max_violation(&v) < 1e-9, "{} infeasible at {perm}", lin.kind);
                    let obj = lin.model.objective_value(&v);
                    assert!((obj - evaluate(&inst, &perm).unwrap()).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn aj_plus_accepts_permutation_points() {
        let inst = example3::<f64>();
        let lin = build_aj_plus(&inst).unwrap();
        for images in (0..4).permutations(4) {
            let perm = Permutation::new(images).unwrap();
            let v = lin.completion(&inst, &perm).unwrap();
            assert!(lin.model.max_violation(&v) < 1e-9);
        }
    }

    #[test]
    fn printed_fy_variant_cuts_off_permutations() {
        let inst = example1::<f64>();
        let lin = build_fy(&inst, FyVariant::Printed).unwrap();
        let v = lin.completion(&inst, &Permutation::identity(3)).unwrap();
        assert!(lin.model.max_violation(&v) > 0.5);
    }

    #[test]
    fn dominance_chain_example1() {
        let inst = example1::<f64>();
        let vals: Vec<f64> = all_kinds(&inst).iter().map(value).collect();
        let [xy, aj, lawler, fya, fy, kb] = vals[..] else { unreachable!() };
        assert!(aj >= xy - 1e-6);
        assert!(xy >= kb - 1e-6);
        assert!(aj >= lawler - 1e-6 && aj >= fya - 1e-6 && aj >= fy - 1e-6);
        assert!(aj <= 23.0 / 18.0 + 1e-9 && xy <= 23.0 / 18.0 + 1e-9);
    }

    #[test]
    fn dominance_chain_random_small() {
        for seed in 0..6u64 {
            let n = 3 + (seed as usize % 2);
            let inst = QapInstance::<f64>::random_uniform(n, 100 + seed).unwrap();
            let vals: Vec<f64> = all_kinds(&inst).iter().map(value).collect();
            let [xy, aj, lawler, fya, fy, kb] = vals[..] else { unreachable!() };
            assert!(aj >= xy - 1e-6, "seed {seed}: aj {aj} < xy {xy}");
            assert!(xy >= kb - 1e-6);
            assert!(aj >= lawler - 1e-6 && aj >= fya - 1e-6 && aj >= fy - 1e-6);
        }
    }

    #[test]
    fn xy_relaxation_is_invariant_under_row_permutation() {
        let inst = example1::<f64>();
        let xy = build_xy(&inst, &compute_bounds(&inst).unwrap()).unwrap();
        let base = value(&xy);
        let rows = xy.model.num_constraints();
        for shift in [1usize, 7, 13] {
            let order: Vec<usize> = (0..rows).map(|r| (r * 5 + shift) % rows).collect();
            let m = xy.model.permute_rows(&order).unwrap();
            let s = lpcore::solve(&m).unwrap();
            assert!((s.objective_value - base).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_examples() {
        let inst = example1::<f64>();
        let n = 3;
        let mut y = YValues::new();
        for i in 0..n {
            for j in 0..n {
                for k in (0..n).filter(|&k| k != i) {
                    for l in (0..n).filter(|&l| l != j) {
                        y.insert((i, j, k, l), 0.0);
                    }
                }
            }
        }
        assert_eq!(project_y_to_z(&inst, &y).unwrap(), SquareMatrix::zeros(3));

        // Block (1,1): identity on {2,3}; block (3,3): anti-diagonal on {1,2}; both scaled 1/3.
        y.insert((0, 0, 1, 1), 1.0 / 3.0);
        y.insert((0, 0, 2, 2), 1.0 / 3.0);
        y.insert((2, 2, 0, 1), 1.0 / 3.0);
        y.insert((2, 2, 1, 0), 1.0 / 3.0);
        let z = project_y_to_z(&inst, &y).unwrap();
        let b = compute_bounds(&inst).unwrap();
        assert!((z[(0, 0)] - b.l[(0, 0)] / 3.0).abs() < 1e-12);
        assert!((z[(2, 2)] - b.l[(2, 2)] / 3.0).abs() < 1e-12);

        y.remove(&(0, 0, 1, 1));
        assert!(project_y_to_z(&inst, &y).is_err());
    }

    #[test]
    fn projection_of_outer_product_matches_completion() {
        let inst = example1::<f64>();
        let aj = build_aj_plus(&inst).unwrap();
        for images in (0..3).permutations(3) {
            let perm = Permutation::new(images).unwrap();
            let v = aj.completion(&inst, &perm).unwrap();
            let z = project_y_to_z(&inst, &aj.y_values(&v)).unwrap();
            assert!(z.max_abs_diff(&aj.z_values(&v).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn rejects_mismatched_bounds_and_tiny_instances() {
        let inst = example1::<f64>();
        let other = compute_bounds(&example3::<f64>()).unwrap();
        assert!(build_xy(&inst, &other).is_err());
        let one = QapInstance::<f64>::random_uniform(1, 0).unwrap();
        assert!(build_aj(&one).is_err());
        assert!(build(&inst, LinearizationKind::XiaYuan, None, FyVariant::Standard).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in LinearizationKind::ALL {
            assert_eq!(k.short_name().parse::<LinearizationKind>().unwrap(), k);
        }
        assert!("rlt".parse::<LinearizationKind>().is_err());
    }
}
