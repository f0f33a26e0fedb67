//! Problem data, permutations and the exact objective.
//!
//! The objective of an assignment `phi` is
//! `sum_{i != k} p[i][k] * d[phi(i)][phi(k)] + sum_i c[i][phi(i)]`.
//! Products `x_ij * x_il` and `x_ij * x_kj` vanish on permutation matrices,
//! so pairs with `i == k` never contribute. Indices are 0-based in the API
//! and 1-based in every external format.

use std::fmt;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QapError, Result};
use crate::matrix::SquareMatrix;
use crate::scalar::{tol, Scalar};

/// Largest size accepted by [`brute_force_optimum`].
pub const BRUTE_FORCE_MAX_N: usize = 9;

/// Flow matrix `P`, distance matrix `D` and linear cost matrix `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct QapInstance<T> {
    p: SquareMatrix<T>,
    d: SquareMatrix<T>,
    c: SquareMatrix<T>,
}

impl<T: Scalar> QapInstance<T> {
    /// Instance without linear term.
    pub fn new(p: SquareMatrix<T>, d: SquareMatrix<T>) -> Result<Self> {
        let n = p.dim();
        Self::with_linear(p, d, SquareMatrix::zeros(n))
    }

    pub fn with_linear(p: SquareMatrix<T>, d: SquareMatrix<T>, c: SquareMatrix<T>) -> Result<Self> {
        let n = p.dim();
        if n == 0 {
            return Err(QapError::Domain("instance size must be at least 1".into()));
        }
        if d.dim() != n || c.dim() != n {
            return Err(QapError::Argument(format!(
                "matrix sizes differ: P is {n}x{n}, D is {0}x{0}, C is {1}x{1}",
                d.dim(),
                c.dim()
            )));
        }
        if !(p.is_finite() && d.is_finite() && c.is_finite()) {
            return Err(QapError::Domain("matrix entries must be finite".into()));
        }
        Ok(Self { p, d, c })
    }

    /// Uniform random instance with entries in `[0, 1)` and zero diagonals.
    pub fn random_uniform(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |i: usize, j: usize| {
            let v: f64 = rng.gen();
            if i == j {
                T::zero()
            } else {
                T::of(v)
            }
        };
        let p = SquareMatrix::from_fn(n, &mut draw);
        let d = SquareMatrix::from_fn(n, &mut draw);
        Self::new(p, d)
    }

    pub fn n(&self) -> usize {
        self.p.dim()
    }

    pub fn flow(&self) -> &SquareMatrix<T> {
        &self.p
    }

    pub fn distance(&self) -> &SquareMatrix<T> {
        &self.d
    }

    pub fn linear(&self) -> &SquareMatrix<T> {
        &self.c
    }

    /// `p[i][k] * d[j][l]`, the coefficient of `x_ij * x_kl`.
    #[inline]
    pub fn coef(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        self.p[(i, k)] * self.d[(j, l)]
    }

    /// Same instance with the roles of `P` and `D` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            p: self.d.clone(),
            d: self.p.clone(),
            c: self.c.clone(),
        }
    }

    pub fn has_linear_term(&self) -> bool {
        self.c.as_slice().iter().any(|v| !v.is_zero())
    }
}

/// Exact objective value of `perm`.
pub fn evaluate<T: Scalar>(instance: &QapInstance<T>, perm: &Permutation) -> Result<T> {
    let n = instance.n();
    if perm.len() != n {
        return Err(QapError::Argument(format!(
            "permutation of size {} does not match instance of size {n}",
            perm.len()
        )));
    }
    Ok(evaluate_unchecked(instance, perm.images()))
}

fn evaluate_unchecked<T: Scalar>(instance: &QapInstance<T>, map: &[usize]) -> T {
    let (p, d, c) = (instance.flow(), instance.distance(), instance.linear());
    let mut total = T::zero();
    for (i, &ji) in map.iter().enumerate() {
        for (k, &jk) in map.iter().enumerate() {
            if i != k {
                total += p[(i, k)] * d[(ji, jk)];
            }
        }
        total += c[(i, ji)];
    }
    total
}

/// Exhaustive minimization over all `n!` permutations. Ties go to the
/// lexicographically smallest image array.
pub fn brute_force_optimum<T: Scalar>(instance: &QapInstance<T>) -> Result<(Permutation, T)> {
    let n = instance.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(QapError::capacity("instance size for brute force", n, BRUTE_FORCE_MAX_N));
    }
    let eps = T::tol(tol::EXACT);
    let mut best: Option<(Vec<usize>, T)> = None;
    for map in (0..n).permutations(n) {
        let value = evaluate_unchecked(instance, &map);
        match &best {
            Some((_, b)) if value >= *b - eps => {}
            _ => best = Some((map, value)),
        }
    }
    let (map, value) = best.expect("at least one permutation");
    Ok((Permutation { map }, value))
}

/// A bijection on `{0..n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    /// From 0-based images.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &j in &map {
            if j >= n || seen[j] {
                return Err(QapError::Argument(format!("{map:?} is not a permutation")));
            }
            seen[j] = true;
        }
        Ok(Self { map })
    }

    /// From 1-based images, as printed in reports.
    pub fn from_one_based(map: &[usize]) -> Result<Self> {
        if map.contains(&0) {
            return Err(QapError::Argument("1-based permutation contains 0".into()));
        }
        Self::new(map.iter().map(|j| j - 1).collect())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// 0-based image of `i`.
    pub fn image(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.map
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.map.iter().map(|j| j + 1).collect()
    }

    /// Permutation matrix `x` with `x_ij = 1` iff `phi(i) = j`.
    pub fn to_x_matrix<T: Scalar>(&self) -> DoublyStochasticPoint<T> {
        let n = self.len();
        let mut x = SquareMatrix::zeros(n);
        for (i, &j) in self.map.iter().enumerate() {
            x[(i, j)] = T::one();
        }
        DoublyStochasticPoint { x }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_one_based().iter().join(","))
    }
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(d)?;
        Permutation::from_one_based(&raw).map_err(serde::de::Error::custom)
    }
}

/// A point of the assignment polytope: nonnegative with unit row and
/// column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublyStochasticPoint<T> {
    x: SquareMatrix<T>,
}

impl<T: Scalar> DoublyStochasticPoint<T> {
    /// Validates membership within the feasibility tolerance.
    pub fn new(x: SquareMatrix<T>) -> Result<Self> {
        let n = x.dim();
        let eps = T::tol(tol::FEASIBILITY);
        if let Some(v) = x.as_slice().iter().find(|v| **v < -eps || !v.is_finite()) {
            return Err(QapError::Domain(format!("entry {v} is negative or not finite")));
        }
        for i in 0..n {
            let row: T = (0..n).map(|j| x[(i, j)]).sum();
            let col: T = (0..n).map(|j| x[(j, i)]).sum();
            if (row - T::one()).abs() > eps || (col - T::one()).abs() > eps {
                return Err(QapError::Domain(format!(
                    "row/column {} sums to {row}/{col}, expected 1",
                    i + 1
                )));
            }
        }
        Ok(Self { x })
    }

    pub fn uniform(n: usize) -> Self {
        let v = T::one() / T::of(n as f64);
        Self {
            x: SquareMatrix::from_fn(n, |_, _| v),
        }
    }

    pub fn n(&self) -> usize {
        self.x.dim()
    }

    pub fn matrix(&self) -> &SquareMatrix<T> {
        &self.x
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.x[(i, j)]
    }

    /// The permutation this point equals, if it is integral within `eps`.
    pub fn as_permutation(&self, eps: T) -> Option<Permutation> {
        let n = self.n();
        let mut map = Vec::with_capacity(n);
        for i in 0..n {
            let mut hit = None;
            for j in 0..n {
                let v = self.x[(i, j)];
                if (v - T::one()).abs() <= eps {
                    hit = Some(j);
                } else if v.abs() > eps {
                    return None;
                }
            }
            map.push(hit?);
        }
        Permutation::new(map).ok()
    }
}

impl<T: Scalar> From<DoublyStochasticPoint<T>> for SquareMatrix<T> {
    fn from(p: DoublyStochasticPoint<T>) -> Self {
        p.x
    }
}

/// Reads the QAPLIB text format: `n`, then `n*n` entries of the first
/// matrix (`P`) and `n*n` entries of the second (`D`). Whitespace layout is
/// free. Tokens after the second matrix are ignored.
pub fn parse_qaplib<T: Scalar>(text: &str) -> Result<QapInstance<T>> {
    let mut tokens = text.split_whitespace().enumerate();
    let (_, first) = tokens.next().ok_or(QapError::Truncated {
        expected: 1,
        found: 0,
    })?;
    let n: i64 = first.parse().map_err(|_| QapError::Parse {
        position: 1,
        token: first.to_string(),
        reason: "expected an integer problem size".into(),
    })?;
    if n <= 0 {
        return Err(QapError::Domain(format!("problem size must be positive, got {n}")));
    }
    let n = n as usize;
    let expected = 2 * n * n + 1;
    let mut values = Vec::with_capacity(2 * n * n);
    for (pos, tok) in tokens.take(2 * n * n) {
        let v: f64 = tok.parse().map_err(|_| QapError::Parse {
            position: pos + 1,
            token: tok.to_string(),
            reason: "expected a number".into(),
        })?;
        if !v.is_finite() {
            return Err(QapError::Parse {
                position: pos + 1,
                token: tok.to_string(),
                reason: "number is not finite".into(),
            });
        }
        values.push(T::of(v));
    }
    if values.len() < 2 * n * n {
        return Err(QapError::Truncated {
            expected,
            found: values.len() + 1,
        });
    }
    let d = values.split_off(n * n);
    QapInstance::new(
        SquareMatrix::from_row_major(n, values)?,
        SquareMatrix::from_row_major(n, d)?,
    )
}

/// Writes the QAPLIB text format. Values use the shortest representation
/// that parses back to the same number.
pub fn serialize_qaplib<T: Scalar>(instance: &QapInstance<T>) -> String {
    let mut out = format!("{}\n", instance.n());
    for m in [instance.flow(), instance.distance()] {
        out.push('\n');
        for row in m.rows() {
            out.push_str(&row.iter().join(" "));
            out.push('\n');
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct InstanceJson<T> {
    n: usize,
    #[serde(rename = "P")]
    p: Vec<T>,
    #[serde(rename = "D")]
    d: Vec<T>,
    #[serde(rename = "C")]
    c: Vec<T>,
}

impl<T: Scalar> Serialize for QapInstance<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        InstanceJson {
            n: self.n(),
            p: self.p.as_slice().to_vec(),
            d: self.d.as_slice().to_vec(),
            c: self.c.as_slice().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for QapInstance<T> {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = InstanceJson::<T>::deserialize(de)?;
        let build = || -> Result<Self> {
            QapInstance::with_linear(
                SquareMatrix::from_row_major(raw.n, raw.p)?,
                SquareMatrix::from_row_major(raw.n, raw.d)?,
                SquareMatrix::from_row_major(raw.n, raw.c)?,
            )
        };
        build().map_err(serde::de::Error::custom)
    }
}
