//! Branch-and-cut over the Xia–Yuan model with ab-cut rounds, and a
//! side-by-side comparison of every relaxation.
//!
//! Cuts are global: anything separated anywhere in the tree goes into one
//! pool and every later LP carries it. Node selection is best-bound with
//! insertion order breaking ties, so a run is fully determined by the
//! instance and the configuration (including the thread count).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::time::Instant;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::cuts::{separate_ab, AbCut, CutPool, SeparationStatus};
use crate::error::{QapError, Result};
use crate::instance::{brute_force_optimum, evaluate, Permutation, QapInstance, BRUTE_FORCE_MAX_N};
use crate::lap::{compute_bounds, solve_lap_lexicographic, BoundTables, Sense};
use crate::linearizations::{
    build, build_xy, solve_relaxation, FyVariant, Linearization, LinearizationKind, FOUR_INDEX_MAX_N,
};
use crate::lpcore::{self, LpModel, LpSolution, LpStatus};
use crate::matrix::SquareMatrix;
use crate::scalar::{tol, Scalar};

/// Pruning slack: a node is closed when its bound is within this of the
/// incumbent.
const PRUNE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BncConfig {
    pub node_limit: usize,
    pub root_rounds: usize,
    pub node_rounds: usize,
    pub integrality_tol: f64,
    /// `false` solves plain Xia–Yuan branch-and-bound.
    pub cuts: bool,
    /// Nodes evaluated per batch; `1` runs everything on the calling thread.
    pub threads: usize,
    /// Whether the report carries elapsed wall time (which makes reports of
    /// identical runs differ).
    pub record_wall_time: bool,
}

impl Default for BncConfig {
    fn default() -> Self {
        Self {
            node_limit: 1_000_000,
            root_rounds: 50,
            node_rounds: 1,
            integrality_tol: tol::INTEGRALITY,
            cuts: true,
            threads: 1,
            record_wall_time: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareConfig {
    /// Solve AJ, Lawler, FY and FY-aggregate. These are size-guarded.
    pub four_index: bool,
    pub fy_variant: FyVariant,
    pub root_rounds: usize,
    pub threads: usize,
    pub record_wall_time: bool,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            four_index: true,
            fy_variant: FyVariant::default(),
            root_rounds: 50,
            threads: 1,
            record_wall_time: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    /// Tree exhausted; the incumbent is optimal.
    Optimal,
    /// Node limit hit; only the global bound and the incumbent are known.
    NodeLimit,
    /// Relaxation comparison, no search.
    BoundsOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceSummary {
    pub n: usize,
    pub has_linear_term: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport<T> {
    /// Relaxation values by short name; `null` when not solved.
    pub relaxations: BTreeMap<String, Option<T>>,
    pub root_before_cuts: T,
    pub root_after_cuts: T,
    /// Best proven lower bound at the end of the run.
    pub global_lower: T,
    pub optimum: Option<T>,
    /// `(after - before) / (optimum - before)`; `null` when the optimum is
    /// unknown or equals the bound before cuts.
    pub gap_closed: Option<T>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TreeReport {
    pub nodes: usize,
    pub depth: usize,
    pub pruned: usize,
    pub open: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncumbentReport<T> {
    /// 1-based images.
    pub perm: Vec<usize>,
    pub value: T,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub lp_solves: usize,
    pub simplex_iterations: usize,
    pub separation_lps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SolveReport<T> {
    pub instance: InstanceSummary,
    pub status: ReportStatus,
    pub bounds: BoundsReport<T>,
    pub cut_rounds: usize,
    pub cuts: Vec<AbCut<T>>,
    pub tree: TreeReport,
    pub incumbent: Option<IncumbentReport<T>>,
    pub timings: Timings,
}

/// `(after - before) / (optimum - before)`, or `None` when the denominator
/// vanishes.
pub fn gap_closed<T: Scalar>(before: T, after: T, optimum: T) -> Option<T> {
    let denom = optimum - before;
    (denom > T::tol(tol::EXACT)).then(|| (after - before) / denom)
}

/// Max-weight assignment on `x`, lexicographically smallest among ties.
pub fn round_to_permutation<T: Scalar>(x: &SquareMatrix<T>) -> Result<Permutation> {
    let n = x.dim();
    let cost: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| -x[(i, j)]).collect()).collect();
    let lap = solve_lap_lexicographic(&cost, Sense::Min)?;
    Permutation::new(lap.assignment)
}

fn is_integral<T: Scalar>(x: &SquareMatrix<T>, eps: T) -> bool {
    x.as_slice().iter().all(|&v| v.abs() <= eps || (v - T::one()).abs() <= eps)
}

fn lp_error(what: &str, status: LpStatus) -> QapError {
    QapError::Lp(format!("{what} LP ended with status {status:?}"))
}

/// The XY model with every pooled cut appended, plus solve counters.
struct Workspace<'a, T> {
    instance: &'a QapInstance<T>,
    bounds: &'a BoundTables<T>,
    lin: Linearization<T>,
    pool: CutPool<T>,
    timings: Timings,
    threads: Option<rayon::ThreadPool>,
}

impl<'a, T: Scalar> Workspace<'a, T> {
    fn new(instance: &'a QapInstance<T>, bounds: &'a BoundTables<T>, threads: usize) -> Result<Self> {
        let threads = if threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| QapError::State(format!("cannot start worker threads: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self {
            instance,
            bounds,
            lin: build_xy(instance, bounds)?,
            pool: CutPool::new(),
            timings: Timings::default(),
            threads,
        })
    }

    fn add_cut(&mut self, cut: AbCut<T>) -> bool {
        if !self.pool.add(cut.clone()) {
            return false;
        }
        let lin = &self.lin;
        let row = cut.to_row(|i, j| lin.x_col(i, j), |i, j| lin.z_col(i, j).expect("xy has z"));
        self.lin
            .model
            .add_constraint(cut.row_name(), row, lpcore::Relation::Ge, T::zero());
        true
    }

    fn solve(&mut self, model: &LpModel<T>) -> Result<LpSolution<T>> {
        let sol = lpcore::solve(model)?;
        self.timings.lp_solves += 1;
        self.timings.simplex_iterations += sol.iterations;
        Ok(sol)
    }

    fn point(&self, sol: &LpSolution<T>) -> (SquareMatrix<T>, SquareMatrix<T>) {
        let x = self.lin.x_values(&sol.primal);
        let z = self.lin.z_values(&sol.primal).expect("xy has z");
        (x, z)
    }

    /// Violated cuts at `(x, z)` over all pairs, in pair order.
    fn separate(&mut self, x: &SquareMatrix<T>, z: &SquareMatrix<T>) -> Result<Vec<AbCut<T>>> {
        let (outcomes, solved) = separate_all(self.instance, self.bounds, x, z, self.threads.as_ref())?;
        self.timings.separation_lps += solved;
        Ok(outcomes)
    }

    fn with_threads<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.threads {
            Some(pool) => pool.install(f),
            None => f(),
        }
    }
}

fn separate_all<T: Scalar>(
    instance: &QapInstance<T>,
    bounds: &BoundTables<T>,
    x: &SquareMatrix<T>,
    z: &SquareMatrix<T>,
    threads: Option<&rayon::ThreadPool>,
) -> Result<(Vec<AbCut<T>>, usize)> {
    let n = instance.n();
    let pairs: Vec<(usize, usize)> = (0..n).cartesian_product(0..n).collect();
    let run = |&(a, b): &(usize, usize)| separate_ab(instance, bounds, a, b, x, z);
    let outcomes: Vec<_> = match threads {
        Some(pool) => pool.install(|| pairs.par_iter().map(run).collect::<Result<Vec<_>>>())?,
        None => pairs.iter().map(run).collect::<Result<Vec<_>>>()?,
    };
    let solved = outcomes.iter().filter(|o| o.status != SeparationStatus::Skipped).count();
    Ok((outcomes.into_iter().filter_map(|o| o.cut).collect(), solved))
}

/// Result of [`root_cut_loop`].
#[derive(Debug, Clone)]
pub struct RootCutLoop<T> {
    pub solution: LpSolution<T>,
    pub x: SquareMatrix<T>,
    pub z: SquareMatrix<T>,
    pub cuts: Vec<AbCut<T>>,
    /// Rounds that added at least one cut.
    pub rounds_used: usize,
    /// LP value after each solve, starting with the plain relaxation.
    pub bound_history: Vec<T>,
}

fn run_root_loop<T: Scalar>(ws: &mut Workspace<'_, T>, max_rounds: usize) -> Result<(LpSolution<T>, usize, Vec<T>)> {
    let model = ws.lin.model.clone();
    let mut sol = ws.solve(&model)?;
    if !sol.is_optimal() {
        return Err(lp_error("root", sol.status));
    }
    let mut history = vec![sol.objective_value];
    let mut rounds = 0;
    while rounds < max_rounds {
        let (x, z) = ws.point(&sol);
        if is_integral(&x, T::tol(tol::INTEGRALITY)) {
            break;
        }
        let found = ws.separate(&x, &z)?;
        let added = found.into_iter().filter(|c| ws.add_cut(c.clone())).count();
        if added == 0 {
            break;
        }
        rounds += 1;
        let model = ws.lin.model.clone();
        sol = ws.solve(&model)?;
        if !sol.is_optimal() {
            return Err(lp_error("root", sol.status));
        }
        history.push(sol.objective_value);
    }
    Ok((sol, rounds, history))
}

/// Solves the XY relaxation, adds every violated ab-cut, and repeats until
/// a round finds nothing or `max_rounds` rounds have added cuts.
pub fn root_cut_loop<T: Scalar>(
    instance: &QapInstance<T>,
    bounds: &BoundTables<T>,
    max_rounds: usize,
) -> Result<RootCutLoop<T>> {
    if max_rounds == 0 {
        return Err(QapError::Argument("max_rounds must be at least 1".into()));
    }
    let mut ws = Workspace::new(instance, bounds, 1)?;
    let (solution, rounds_used, bound_history) = run_root_loop(&mut ws, max_rounds)?;
    let (x, z) = ws.point(&solution);
    Ok(RootCutLoop {
        solution,
        x,
        z,
        cuts: ws.pool.cuts().to_vec(),
        rounds_used,
        bound_history,
    })
}

#[derive(Debug, Clone)]
struct Node {
    id: u64,
    depth: usize,
    /// Bound inherited from the parent LP.
    bound: f64,
    fixed_zero: BTreeSet<(usize, usize)>,
    fixed_one: BTreeSet<(usize, usize)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reversed so that `BinaryHeap` pops the smallest `(bound, id)`.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.id.cmp(&self.id))
    }
}

enum NodeOutcome<T> {
    Infeasible,
    Solved {
        bound: T,
        x: SquareMatrix<T>,
        cuts: Vec<AbCut<T>>,
        lp_solves: usize,
        iterations: usize,
        separations: usize,
    },
}

/// Solves one node LP against a snapshot of the global model, then runs
/// up to `rounds` cut rounds on a private copy.
fn evaluate_node<T: Scalar>(
    instance: &QapInstance<T>,
    bounds: &BoundTables<T>,
    lin: &Linearization<T>,
    node: &Node,
    rounds: usize,
    incumbent: T,
    int_eps: T,
) -> Result<NodeOutcome<T>> {
    let fixes: Vec<(usize, T)> = node
        .fixed_zero
        .iter()
        .map(|&(i, j)| (lin.x_col(i, j), T::zero()))
        .chain(node.fixed_one.iter().map(|&(i, j)| (lin.x_col(i, j), T::one())))
        .collect();
    let mut model = lin.model.fix_variables(&fixes)?;
    let mut sol = lpcore::solve(&model)?;
    let mut lp_solves = 1;
    let mut iterations = sol.iterations;
    let mut separations = 0;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Ok(NodeOutcome::Infeasible),
        other => return Err(lp_error("node", other)),
    }
    let mut cuts = Vec::new();
    let mut local = CutPool::new();
    for _ in 0..rounds {
        let x = lin.x_values(&sol.primal);
        if sol.objective_value >= incumbent - T::of(PRUNE_EPS) || is_integral(&x, int_eps) {
            break;
        }
        let z = lin.z_values(&sol.primal).expect("xy has z");
        let (found, solved) = separate_all(instance, bounds, &x, &z, None)?;
        separations += solved;
        let mut added = 0;
        for cut in found {
            if local.add(cut.clone()) {
                let row = cut.to_row(|i, j| lin.x_col(i, j), |i, j| lin.z_col(i, j).expect("xy has z"));
                model.add_constraint(cut.row_name(), row, lpcore::Relation::Ge, T::zero());
                cuts.push(cut);
                added += 1;
            }
        }
        if added == 0 {
            break;
        }
        sol = lpcore::solve(&model)?;
        lp_solves += 1;
        iterations += sol.iterations;
        if !sol.is_optimal() {
            return Err(lp_error("node", sol.status));
        }
    }
    Ok(NodeOutcome::Solved {
        bound: sol.objective_value,
        x: lin.x_values(&sol.primal),
        cuts,
        lp_solves,
        iterations,
        separations,
    })
}

/// Most fractional free variable (closest to 1/2), lexicographic on ties.
fn branching_variable<T: Scalar>(x: &SquareMatrix<T>, node: &Node, eps: T) -> Option<(usize, usize)> {
    let n = x.dim();
    let half = T::of(0.5);
    let mut best: Option<((usize, usize), T)> = None;
    for (i, j) in (0..n).cartesian_product(0..n) {
        if node.fixed_zero.contains(&(i, j)) || node.fixed_one.contains(&(i, j)) {
            continue;
        }
        let v = x[(i, j)];
        if v <= eps || v >= T::one() - eps {
            continue;
        }
        let dist = (v - half).abs();
        if best.is_none_or(|(_, d)| dist < d) {
            best = Some(((i, j), dist));
        }
    }
    best.map(|(p, _)| p)
}

fn children(node: &Node, (i, j): (usize, usize), bound: f64, n: usize, next_id: &mut u64) -> [Node; 2] {
    let mut zero = node.clone();
    zero.fixed_zero.insert((i, j));
    let mut one = node.clone();
    one.fixed_one.insert((i, j));
    for k in (0..n).filter(|&k| k != i) {
        one.fixed_zero.insert((k, j));
    }
    for l in (0..n).filter(|&l| l != j) {
        one.fixed_zero.insert((i, l));
    }
    [zero, one].map(|mut c| {
        c.depth = node.depth + 1;
        c.bound = bound;
        c.id = *next_id;
        *next_id += 1;
        c
    })
}

/// Branch-and-cut with best-bound search and LAP-rounding incumbents.
pub fn solve_bnc<T: Scalar>(instance: &QapInstance<T>, config: &BncConfig) -> Result<SolveReport<T>> {
    let started = Instant::now();
    let n = instance.n();
    if n < 2 {
        return Err(QapError::Domain(format!("branch-and-cut needs n >= 2, got {n}")));
    }
    if config.threads == 0 {
        return Err(QapError::Argument("threads must be at least 1".into()));
    }
    let int_eps = T::of(config.integrality_tol);
    let prune = T::of(PRUNE_EPS);
    let bounds = compute_bounds(instance)?;
    let mut ws = Workspace::new(instance, &bounds, config.threads)?;

    let root_rounds = if config.cuts { config.root_rounds } else { 0 };
    let node_rounds = if config.cuts { config.node_rounds } else { 0 };
    let (root, cut_rounds, history) = run_root_loop(&mut ws, root_rounds)?;
    let root_before = history[0];
    let root_after = root.objective_value;
    let (root_x, _) = ws.point(&root);

    let mut best_perm = round_to_permutation(&root_x)?;
    let mut best_value = evaluate(instance, &best_perm)?;
    let mut tree = TreeReport {
        nodes: 1,
        ..TreeReport::default()
    };
    let mut next_id = 1u64;
    let mut open = BinaryHeap::new();
    let root_node = Node {
        id: 0,
        depth: 0,
        bound: root_after.to_f64_lossy(),
        fixed_zero: BTreeSet::new(),
        fixed_one: BTreeSet::new(),
    };
    if root_after < best_value - prune {
        if let Some(var) = branching_variable(&root_x, &root_node, int_eps) {
            open.extend(children(&root_node, var, root_after.to_f64_lossy(), n, &mut next_id));
        }
    }

    let batch_size = config.threads;
    while !open.is_empty() && tree.nodes < config.node_limit {
        let mut batch = Vec::with_capacity(batch_size);
        while batch.len() < batch_size && tree.nodes + batch.len() < config.node_limit {
            let Some(node) = open.pop() else { break };
            if T::of(node.bound) >= best_value - prune {
                tree.pruned += 1;
                continue;
            }
            batch.push(node);
        }
        if batch.is_empty() {
            continue;
        }
        let lin = &ws.lin;
        let incumbent = best_value;
        let eval = |node: &Node| evaluate_node(instance, &bounds, lin, node, node_rounds, incumbent, int_eps);
        let outcomes: Vec<Result<NodeOutcome<T>>> = if batch.len() > 1 {
            ws.with_threads(|| batch.par_iter().map(eval).collect())
        } else {
            batch.iter().map(eval).collect()
        };
        for (node, outcome) in batch.into_iter().zip(outcomes) {
            tree.nodes += 1;
            tree.depth = tree.depth.max(node.depth);
            let (bound, x) = match outcome? {
                NodeOutcome::Infeasible => {
                    tree.pruned += 1;
                    continue;
                }
                NodeOutcome::Solved {
                    bound,
                    x,
                    cuts,
                    lp_solves,
                    iterations,
                    separations,
                } => {
                    ws.timings.lp_solves += lp_solves;
                    ws.timings.simplex_iterations += iterations;
                    ws.timings.separation_lps += separations;
                    for cut in cuts {
                        ws.add_cut(cut);
                    }
                    (bound, x)
                }
            };
            let perm = round_to_permutation(&x)?;
            let value = evaluate(instance, &perm)?;
            if value < best_value - prune {
                best_value = value;
                best_perm = perm;
            }
            if bound >= best_value - prune {
                tree.pruned += 1;
                continue;
            }
            match branching_variable(&x, &node, int_eps) {
                Some(var) => open.extend(children(&node, var, bound.to_f64_lossy(), n, &mut next_id)),
                // Integral: the LP value is the permutation's cost, already
                // offered to the incumbent above.
                None => tree.pruned += 1,
            }
        }
    }

    tree.open = open.len();
    let exhausted = open.is_empty();
    let global_lower = if exhausted {
        best_value
    } else {
        open.iter()
            .map(|node| T::of(node.bound))
            .fold(best_value, |acc, b| acc.min(b))
    };
    let optimum = exhausted.then_some(best_value);
    let mut relaxations = BTreeMap::new();
    relaxations.insert(LinearizationKind::XiaYuan.short_name().to_string(), Some(root_before));
    let mut timings = ws.timings;
    timings.wall_seconds = config.record_wall_time.then(|| started.elapsed().as_secs_f64());
    Ok(SolveReport {
        instance: summary(instance),
        status: if exhausted {
            ReportStatus::Optimal
        } else {
            ReportStatus::NodeLimit
        },
        bounds: BoundsReport {
            relaxations,
            root_before_cuts: root_before,
            root_after_cuts: root_after,
            global_lower,
            optimum,
            gap_closed: optimum.and_then(|opt| gap_closed(root_before, root_after, opt)),
        },
        cut_rounds,
        cuts: ws.pool.cuts().to_vec(),
        tree,
        incumbent: Some(IncumbentReport {
            perm: best_perm.to_one_based(),
            value: best_value,
        }),
        timings,
    })
}

fn summary<T: Scalar>(instance: &QapInstance<T>) -> InstanceSummary {
    InstanceSummary {
        n: instance.n(),
        has_linear_term: instance.has_linear_term(),
    }
}

/// Solves every relaxation plus Xia–Yuan with root cuts, and measures the
/// gap closed by the cuts against the brute-force optimum (when `n` is
/// small enough to enumerate).
pub fn compare_relaxations<T: Scalar>(instance: &QapInstance<T>, config: &CompareConfig) -> Result<SolveReport<T>> {
    let started = Instant::now();
    let n = instance.n();
    if config.four_index && n > FOUR_INDEX_MAX_N {
        return Err(QapError::capacity("instance size for comparing four-index relaxations", n, FOUR_INDEX_MAX_N));
    }
    if n < 2 {
        return Err(QapError::Domain(format!("relaxations need n >= 2, got {n}")));
    }
    let bounds = compute_bounds(instance)?;
    let mut ws = Workspace::new(instance, &bounds, config.threads)?;
    let mut relaxations = BTreeMap::new();
    for kind in LinearizationKind::ALL {
        let value = if kind.is_four_index() && !config.four_index {
            None
        } else {
            let lin = build(instance, kind, Some(&bounds), config.fy_variant)?;
            let sol = solve_relaxation(&lin)?;
            ws.timings.lp_solves += 1;
            ws.timings.simplex_iterations += sol.iterations;
            if !sol.is_optimal() {
                return Err(lp_error(kind.short_name(), sol.status));
            }
            Some(sol.objective_value)
        };
        relaxations.insert(kind.short_name().to_string(), value);
    }
    let (root, cut_rounds, history) = if config.root_rounds > 0 {
        run_root_loop(&mut ws, config.root_rounds)?
    } else {
        let model = ws.lin.model.clone();
        let sol = ws.solve(&model)?;
        let v = sol.objective_value;
        (sol, 0, vec![v])
    };
    let root_before = history[0];
    let root_after = root.objective_value;
    let incumbent = if n <= BRUTE_FORCE_MAX_N {
        let (perm, value) = brute_force_optimum(instance)?;
        Some(IncumbentReport {
            perm: perm.to_one_based(),
            value,
        })
    } else {
        None
    };
    let optimum = incumbent.as_ref().map(|inc| inc.value);
    let mut timings = ws.timings;
    timings.wall_seconds = config.record_wall_time.then(|| started.elapsed().as_secs_f64());
    Ok(SolveReport {
        instance: summary(instance),
        status: ReportStatus::BoundsOnly,
        bounds: BoundsReport {
            relaxations,
            root_before_cuts: root_before,
            root_after_cuts: root_after,
            global_lower: root_after,
            optimum,
            gap_closed: optimum.and_then(|opt| gap_closed(root_before, root_after, opt)),
        },
        cut_rounds,
        cuts: ws.pool.cuts().to_vec(),
        tree: TreeReport::default(),
        incumbent,
        timings,
    })
}
