//! Fused sets, collapsed problems, max-flow set splitting and the exact
//! solver built on them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::coordinate::{run_cd, CdConfig};
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::matrix::Matrix;
use crate::verify::CERTIFICATE_TOL;
use crate::model::{sign, FusedProblem, LeastSquares, PenaltyGraph, Solution};

/// Relative tolerance under which two coefficients count as equal.
pub const EQUALITY_TOL: f64 = 1e-9;

/// Relative objective decrease below which a coordinate pass counts as
/// having made no progress.
const FLAT_TOL: f64 = 1e-12;

pub fn values_equal(a: f64, b: f64) -> bool {
    equal_within(a, b, EQUALITY_TOL)
}

fn equal_within(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Maximal connected groups of equal-valued coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    sets: Vec<Vec<usize>>,
    values: Vec<f64>,
    membership: Vec<usize>,
}

impl Partition {
    /// Sets in order of their smallest member; members ascending.
    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Set index of every coefficient.
    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Coefficients with every member replaced by its set's value.
    pub fn snapped(&self) -> Vec<f64> {
        self.membership.iter().map(|&i| self.values[i]).collect()
    }

    pub fn check_consistent(&self, graph: &PenaltyGraph, beta: &[f64]) -> Result<()> {
        let p = graph.p();
        if beta.len() != p || self.membership.len() != p {
            return Err(Error::InconsistentPartition(format!(
                "partition covers {} coefficients, graph has {p}, beta has {}",
                self.membership.len(),
                beta.len()
            )));
        }
        for (i, set) in self.sets.iter().enumerate() {
            for &k in set {
                if self.membership[k] != i {
                    return Err(Error::InconsistentPartition(format!(
                        "coefficient {k} listed in set {i} but mapped to {}",
                        self.membership[k]
                    )));
                }
                if !values_equal(beta[k], self.values[i]) {
                    return Err(Error::InconsistentPartition(format!(
                        "coefficient {k} = {} differs from its set value {}",
                        beta[k], self.values[i]
                    )));
                }
            }
        }
        for &(k, l, _) in graph.edges() {
            let (a, b) = (self.membership[k], self.membership[l]);
            if a != b && values_equal(self.values[a], self.values[b]) {
                return Err(Error::InconsistentPartition(format!(
                    "edge ({k}, {l}) joins sets {a} and {b} with equal values"
                )));
            }
        }
        Ok(())
    }
}

/// Partition of the coefficients into connected equal-value components.
///
/// Set values are member means; values within [`EQUALITY_TOL`] of zero
/// become exactly zero.
pub fn build_partition(graph: &PenaltyGraph, beta: &[f64]) -> Partition {
    build_partition_within(graph, beta, EQUALITY_TOL)
}

/// [`build_partition`] with a coarser tolerance.
pub(crate) fn build_partition_within(graph: &PenaltyGraph, beta: &[f64], tol: f64) -> Partition {
    let p = graph.p();
    let mut membership = vec![usize::MAX; p];
    let mut sets = Vec::new();
    let mut values = Vec::new();
    let mut stack = Vec::new();
    for start in 0..p {
        if membership[start] != usize::MAX {
            continue;
        }
        let id = sets.len();
        membership[start] = id;
        stack.push(start);
        let mut set = Vec::new();
        while let Some(k) = stack.pop() {
            set.push(k);
            for nb in graph.neighbors(k) {
                let l = nb.node;
                if membership[l] == usize::MAX && equal_within(beta[k], beta[l], tol) {
                    membership[l] = id;
                    stack.push(l);
                }
            }
        }
        set.sort_unstable();
        let mut value = set.iter().map(|&k| beta[k]).sum::<f64>() / set.len() as f64;
        if set.iter().all(|&k| beta[k] == beta[set[0]]) {
            value = beta[set[0]];
        }
        if value.abs() <= tol {
            value = 0.0;
        }
        sets.push(set);
        values.push(value);
    }
    Partition {
        sets,
        values,
        membership,
    }
}

/// Where a fused set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// A whole partition set (or an initial singleton).
    Whole,
    /// Component of the part pulled upwards by a split.
    Positive,
    /// Component of the part pulled downwards by a split.
    Negative,
    /// Component of the remainder of a split set.
    Zero,
}

/// Disjoint connected sets whose coefficients are constrained equal.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedSets {
    sets: Vec<Vec<usize>>,
    provenance: Vec<Provenance>,
    membership: Vec<usize>,
}

impl FusedSets {
    pub fn singletons(p: usize) -> Self {
        FusedSets {
            sets: (0..p).map(|k| vec![k]).collect(),
            provenance: vec![Provenance::Whole; p],
            membership: (0..p).collect(),
        }
    }

    pub fn from_partition(partition: &Partition) -> Self {
        FusedSets {
            sets: partition.sets.clone(),
            provenance: vec![Provenance::Whole; partition.len()],
            membership: partition.membership.clone(),
        }
    }

    /// Validates that `sets` are non-empty, disjoint, cover `0..p` and are
    /// each connected in `graph`.
    pub fn new(
        graph: &PenaltyGraph,
        sets: Vec<Vec<usize>>,
        provenance: Vec<Provenance>,
    ) -> Result<Self> {
        if provenance.len() != sets.len() {
            return Err(Error::DimensionMismatch {
                what: "provenance entries",
                expected: sets.len(),
                found: provenance.len(),
            });
        }
        let mut pairs: Vec<(Vec<usize>, Provenance)> = sets
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s
            })
            .zip(provenance)
            .collect();
        if pairs.iter().any(|(s, _)| s.is_empty()) {
            return Err(Error::InvalidFusedSets("empty set".into()));
        }
        pairs.sort_by_key(|(s, _)| s[0]);
        let (sets, provenance): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let p = graph.p();
        let mut membership = vec![usize::MAX; p];
        for (i, set) in sets.iter().enumerate() {
            for &k in set {
                if k >= p {
                    return Err(Error::InvalidFusedSets(format!(
                        "coefficient {k} outside 0..{p}"
                    )));
                }
                if membership[k] != usize::MAX {
                    return Err(Error::InvalidFusedSets(format!(
                        "coefficient {k} appears in more than one set"
                    )));
                }
                membership[k] = i;
            }
        }
        if let Some(k) = membership.iter().position(|&m| m == usize::MAX) {
            return Err(Error::InvalidFusedSets(format!(
                "coefficient {k} is not covered"
            )));
        }
        let out = FusedSets {
            sets,
            provenance,
            membership,
        };
        out.check_connected(graph)?;
        Ok(out)
    }

    fn check_connected(&self, graph: &PenaltyGraph) -> Result<()> {
        for (i, set) in self.sets.iter().enumerate() {
            if components_within(graph, set).len() != 1 {
                return Err(Error::InvalidFusedSets(format!(
                    "set {i} (starting at coefficient {}) is not connected",
                    set[0]
                )));
            }
        }
        Ok(())
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Full coefficient vector from one value per set.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        self.membership.iter().map(|&i| reduced[i]).collect()
    }

    /// One value per set: the mean of its members.
    pub fn restrict(&self, beta: &[f64]) -> Vec<f64> {
        self.sets
            .iter()
            .map(|s| {
                if s.iter().all(|&k| beta[k] == beta[s[0]]) {
                    beta[s[0]]
                } else {
                    s.iter().map(|&k| beta[k]).sum::<f64>() / s.len() as f64
                }
            })
            .collect()
    }
}

/// Connected components of the subgraph induced by `nodes`, each sorted,
/// ordered by smallest member.
pub fn components_within(graph: &PenaltyGraph, nodes: &[usize]) -> Vec<Vec<usize>> {
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    let mut seen = vec![false; sorted.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..sorted.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut comp = Vec::new();
        while let Some(j) = stack.pop() {
            let k = sorted[j];
            comp.push(k);
            for nb in graph.neighbors(k) {
                if let Ok(m) = sorted.binary_search(&nb.node) {
                    if !seen[m] {
                        seen[m] = true;
                        stack.push(m);
                    }
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// The problem over one coefficient per fused set.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapsedProblem {
    problem: LeastSquares,
    sets: FusedSets,
}

impl CollapsedProblem {
    pub fn problem(&self) -> &LeastSquares {
        &self.problem
    }

    pub fn sets(&self) -> &FusedSets {
        &self.sets
    }

    /// Original index → collapsed index.
    pub fn mapping(&self) -> &[usize] {
        self.sets.membership()
    }

    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        self.sets.expand(reduced)
    }

    pub fn restrict(&self, beta: &[f64]) -> Vec<f64> {
        self.sets.restrict(beta)
    }
}

/// Sums the columns, node weights and linear terms of every set and merges
/// the edges running between each pair of sets.
pub fn collapse(ls: &LeastSquares, sets: &FusedSets) -> Result<CollapsedProblem> {
    let graph = ls.graph();
    if sets.membership().len() != graph.p() {
        return Err(Error::InvalidFusedSets(format!(
            "sets cover {} coefficients, problem has {}",
            sets.membership().len(),
            graph.p()
        )));
    }
    sets.check_connected(graph)?;
    if sets.len() == graph.p() {
        return Ok(CollapsedProblem {
            problem: ls.clone(),
            sets: sets.clone(),
        });
    }
    let n = ls.n();
    let m = sets.len();
    let mut data = vec![0.0; n * m];
    let mut weights = vec![0.0; m];
    let mut linear = ls.linear().map(|_| vec![0.0; m]);
    for (i, set) in sets.sets().iter().enumerate() {
        let col = &mut data[i * n..(i + 1) * n];
        for &k in set {
            for (c, x) in col.iter_mut().zip(ls.x().col(k)) {
                *c += x;
            }
            weights[i] += graph.node_weight(k);
            if let Some(c) = linear.as_mut() {
                c[i] += ls.linear_at(k);
            }
        }
    }
    let membership = sets.membership();
    let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(k, l, w) in graph.edges() {
        let (a, b) = (membership[k], membership[l]);
        if a != b {
            *merged.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
        }
    }
    let edges = merged.into_iter().map(|((a, b), w)| (a, b, w)).collect();
    let problem = LeastSquares::new(
        Matrix::from_col_major(n, m, data)?,
        ls.y().to_vec(),
        linear,
        PenaltyGraph::new(weights, edges)?,
        ls.lambda1(),
        ls.lambda2(),
    )?;
    Ok(CollapsedProblem {
        problem,
        sets: sets.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Sets with a nonzero value; the sign of the value is known.
    Active,
    /// Sets at zero; both signs are tried.
    Inactive,
}

/// Pieces a partition set breaks into. A single component means no split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutcome {
    pub components: Vec<Vec<usize>>,
    pub provenance: Vec<Provenance>,
    /// Max-flow value (summed over both networks in inactive mode).
    pub flow_value: f64,
}

impl SplitOutcome {
    pub fn is_split(&self) -> bool {
        self.components.len() > 1
    }
}

/// ∂h/∂β: smooth gradient plus cross-partition difference terms.
pub(crate) fn partition_gradient(ls: &LeastSquares, beta: &[f64], partition: &Partition) -> Vec<f64> {
    let mut grad = ls.smooth_gradient(beta);
    ls.add_cross_partition_terms(partition, &mut grad);
    grad
}

/// Flow network over `members` (sorted): negative pulls feed from the
/// source, positive pulls drain to the sink, and every internal edge has
/// capacity λ₂w in both directions. Node `j` is `members[j]`.
pub(crate) fn pull_network(ls: &LeastSquares, members: &[usize], pulls: &[f64]) -> FlowNetwork {
    let mut net = FlowNetwork::new(members.len());
    let (s, t) = (net.source(), net.sink());
    for (j, &u) in pulls.iter().enumerate() {
        // capacities are finite and non-negative here, so the calls succeed
        if u < 0.0 {
            let _ = net.add_arc(s, j, -u);
        } else if u > 0.0 {
            let _ = net.add_arc(j, t, u);
        }
    }
    if ls.lambda2() > 0.0 {
        for (j, &k) in members.iter().enumerate() {
            for nb in ls.graph().neighbors(k) {
                if nb.node > k {
                    if let Ok(m) = members.binary_search(&nb.node) {
                        let _ = net.add_undirected(j, m, ls.lambda2() * nb.weight);
                    }
                }
            }
        }
    }
    net
}

fn pulls(ls: &LeastSquares, members: &[usize], grad: &[f64], s: f64) -> Vec<f64> {
    members
        .iter()
        .map(|&k| grad[k] + ls.lambda1() * ls.graph().node_weight(k) * s)
        .collect()
}

pub(crate) fn split_with_gradient(
    ls: &LeastSquares,
    partition: &Partition,
    grad: &[f64],
    i: usize,
    mode: SplitMode,
) -> Result<SplitOutcome> {
    let members = &partition.sets()[i];
    let value = partition.values()[i];
    let (plus, minus, flow_value) = match mode {
        SplitMode::Active => {
            if value == 0.0 {
                return Err(Error::SplitPrecondition { set: i, mode: "active" });
            }
            let u = pulls(ls, members, grad, sign(value));
            let mut net = pull_network(ls, members, &u);
            let f = net.max_flow();
            let reach = net.residual_reachability();
            (reach.from_source, reach.to_sink, f)
        }
        SplitMode::Inactive => {
            if value != 0.0 {
                return Err(Error::SplitPrecondition {
                    set: i,
                    mode: "inactive",
                });
            }
            let mut up = pull_network(ls, members, &pulls(ls, members, grad, 1.0));
            let mut down = pull_network(ls, members, &pulls(ls, members, grad, -1.0));
            let f = up.max_flow() + down.max_flow();
            let plus = up.residual_reachability().from_source;
            let minus: Vec<usize> = down
                .residual_reachability()
                .to_sink
                .into_iter()
                .filter(|j| plus.binary_search(j).is_err())
                .collect();
            (plus, minus, f)
        }
    };
    let mut tag = vec![Provenance::Zero; members.len()];
    for &j in &plus {
        tag[j] = Provenance::Positive;
    }
    for &j in &minus {
        tag[j] = Provenance::Negative;
    }
    let mut pieces: Vec<(Vec<usize>, Provenance)> = Vec::new();
    for kind in [Provenance::Positive, Provenance::Negative, Provenance::Zero] {
        let group: Vec<usize> = (0..members.len())
            .filter(|&j| tag[j] == kind)
            .map(|j| members[j])
            .collect();
        for comp in components_within(ls.graph(), &group) {
            pieces.push((comp, kind));
        }
    }
    if pieces.len() == 1 {
        pieces[0].1 = Provenance::Whole;
    }
    pieces.sort_by_key(|(c, _)| c[0]);
    let (components, provenance) = pieces.into_iter().unzip();
    Ok(SplitOutcome {
        components,
        provenance,
        flow_value,
    })
}

/// Decides whether partition set `i` should break apart, and into what.
pub fn split_set(
    ls: &LeastSquares,
    beta: &[f64],
    partition: &Partition,
    i: usize,
    mode: SplitMode,
) -> Result<SplitOutcome> {
    partition.check_consistent(ls.graph(), beta)?;
    if i >= partition.len() {
        return Err(Error::DimensionMismatch {
            what: "partition set index",
            expected: partition.len(),
            found: i,
        });
    }
    let grad = partition_gradient(ls, beta, partition);
    split_with_gradient(ls, partition, &grad, i, mode)
}

/// Runs `mode` splits on every eligible set of `partition`. Returns the
/// refined fused sets when at least one set broke apart.
pub(crate) fn split_round(
    ls: &LeastSquares,
    beta: &[f64],
    partition: &Partition,
    mode: SplitMode,
) -> Result<Option<FusedSets>> {
    let grad = partition_gradient(ls, beta, partition);
    let mut sets = Vec::with_capacity(partition.len());
    let mut provenance = Vec::with_capacity(partition.len());
    let mut any = false;
    for (i, set) in partition.sets().iter().enumerate() {
        let eligible = match mode {
            SplitMode::Active => partition.values()[i] != 0.0,
            SplitMode::Inactive => partition.values()[i] == 0.0,
        };
        if eligible {
            let out = split_with_gradient(ls, partition, &grad, i, mode)?;
            if out.is_split() {
                any = true;
                sets.extend(out.components);
                provenance.extend(out.provenance);
                continue;
            }
        }
        sets.push(set.clone());
        provenance.push(Provenance::Whole);
    }
    if !any {
        return Ok(None);
    }
    FusedSets::new(ls.graph(), sets, provenance).map(Some)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactConfig {
    pub cd: CdConfig,
    /// Outer round cap; `None` means `max(10·p, 50)`.
    pub max_rounds: Option<usize>,
    /// Sweeps of one coordinate pass before the fused sets are rebuilt.
    pub pass_sweeps: usize,
    /// Attach an optimality certificate to the solution.
    pub certify: bool,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            cd: CdConfig::default(),
            max_rounds: None,
            pass_sweeps: 10_000,
            certify: true,
        }
    }
}

/// Rule that produced the fused sets of a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Fuse,
    SplitActive,
    SplitInactive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    /// `None` for the initial singleton sets.
    pub rule: Option<Rule>,
    pub sets: usize,
    pub objective_before: f64,
    pub objective_after: f64,
    /// Largest coefficient change of the round's coordinate pass.
    pub change: f64,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExactTrace {
    pub rounds: Vec<Round>,
    /// A split was proposed but the following pass could not move.
    pub stalled: bool,
    /// Ended because no rule changed the fused sets.
    pub optimal: bool,
}

/// Exact solver for a squared-error problem.
pub fn solve_exact(problem: &FusedProblem, beta0: &[f64], config: &ExactConfig) -> Result<Solution> {
    let ls = problem.least_squares()?;
    solve_exact_traced(&ls, beta0, config).map(|(s, _)| s)
}

/// Exact solver on the working form, with the per-round history.
pub fn solve_exact_traced(
    ls: &LeastSquares,
    beta0: &[f64],
    config: &ExactConfig,
) -> Result<(Solution, ExactTrace)> {
    config.cd.validate()?;
    let p = ls.p();
    if beta0.len() != p {
        return Err(Error::DimensionMismatch {
            what: "starting coefficients",
            expected: p,
            found: beta0.len(),
        });
    }
    if beta0.iter().any(|b| !b.is_finite()) {
        return Err(Error::NonFinite("starting coefficients"));
    }
    let cap = config.max_rounds.unwrap_or((10 * p).max(50));
    let mut beta = beta0.to_vec();
    let mut sets = FusedSets::singletons(p);
    let mut rule: Option<Rule> = None;
    let mut trace = ExactTrace::default();
    let mut sweeps = 0;
    let mut objective = ls.objective(&beta);
    // Coordinate passes stop once moves drop below `cd.tol`, so neighbours
    // that belong together can be left that far apart.
    let merge_tol = EQUALITY_TOL.max(config.cd.tol);

    for _ in 0..cap {
        let collapsed = collapse(ls, &sets)?;
        let start = collapsed.restrict(&beta);
        let pass = CdConfig {
            max_sweeps: config.pass_sweeps.min(config.cd.max_sweeps.saturating_sub(sweeps)).max(1),
            ..config.cd.clone()
        };
        let out = run_cd(collapsed.problem(), &start, &pass)?;
        sweeps += out.sweeps;
        let moved = collapsed.expand(&out.beta);
        let change = moved
            .iter()
            .zip(&beta)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let partition = build_partition_within(ls.graph(), &moved, merge_tol);
        beta = partition.snapped();
        let after = ls.objective(&beta);
        trace.rounds.push(Round {
            rule,
            sets: sets.len(),
            objective_before: objective,
            objective_after: after,
            change,
            sweeps: out.sweeps,
        });
        let flat = after >= objective - FLAT_TOL * (1.0 + after.abs());
        objective = after;
        if !out.converged {
            // A rank-deficient collapsed design lets a pass wander along a
            // valley of minimizers without lowering the objective.
            if flat && crate::verify::certificate(ls, &beta)?.max_residual <= CERTIFICATE_TOL {
                trace.optimal = true;
                break;
            }
            if sweeps >= config.cd.max_sweeps {
                break;
            }
            sets = FusedSets::from_partition(&partition);
            rule = Some(Rule::Fuse);
            continue;
        }

        let fused_more = rule == Some(Rule::Fuse) && partition.len() < sets.len();
        if change > config.cd.tol || rule.is_none() || fused_more {
            sets = FusedSets::from_partition(&partition);
            rule = Some(Rule::Fuse);
            continue;
        }
        let (try_active, stalled_if_none) = match rule {
            Some(Rule::Fuse) => (true, false),
            Some(Rule::SplitActive) => (false, true),
            _ => {
                trace.stalled = true;
                break;
            }
        };
        if try_active {
            if let Some(next) = split_round(ls, &beta, &partition, SplitMode::Active)? {
                sets = next;
                rule = Some(Rule::SplitActive);
                continue;
            }
        }
        if let Some(next) = split_round(ls, &beta, &partition, SplitMode::Inactive)? {
            sets = next;
            rule = Some(Rule::SplitInactive);
            continue;
        }
        if stalled_if_none {
            trace.stalled = true;
        } else {
            trace.optimal = true;
        }
        break;
    }

    let certificate = if config.certify {
        crate::verify::certificate(ls, &beta).ok()
    } else {
        None
    };
    let solution = Solution {
        objective: ls.objective(&beta),
        beta,
        iterations: sweeps,
        converged: trace.optimal,
        certificate,
    };
    Ok((solution, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(lambda1: f64, lambda2: f64) -> LeastSquares {
        LeastSquares::new(
            Matrix::identity(2),
            vec![2.0, 0.0],
            None,
            PenaltyGraph::chain(2),
            lambda1,
            lambda2,
        )
        .unwrap()
    }

    #[test]
    fn partition_examples() {
        let chain = PenaltyGraph::chain(3);
        assert_eq!(build_partition(&chain, &[1.0, 1.0, 0.0]).sets(), &[vec![0, 1], vec![2]]);
        assert_eq!(
            build_partition(&chain, &[1.0, 0.0, 1.0]).sets(),
            &[vec![0], vec![1], vec![2]]
        );
        let grid = PenaltyGraph::grid(2);
        let all = build_partition(&grid, &[0.3; 4]);
        assert_eq!(all.sets(), &[vec![0, 1, 2, 3]]);
        assert_eq!(all.values(), &[0.3]);
    }

    #[test]
    fn partition_snaps_tiny_values_to_zero() {
        let part = build_partition(&PenaltyGraph::chain(2), &[1e-12, 5.0]);
        assert_eq!(part.values(), &[0.0, 5.0]);
    }

    #[test]
    fn partition_consistency_errors() {
        let g = PenaltyGraph::chain(3);
        let part = build_partition(&g, &[1.0, 1.0, 0.0]);
        assert!(part.check_consistent(&g, &[1.0, 1.0, 0.0]).is_ok());
        assert!(matches!(
            part.check_consistent(&g, &[1.0, 2.0, 0.0]),
            Err(Error::InconsistentPartition(_))
        ));
        let singles = build_partition(&g, &[1.0, 2.0, 3.0]);
        assert!(singles.check_consistent(&g, &[1.0, 1.0, 3.0]).is_err());
    }

    #[test]
    fn identity_collapse() {
        let ls = toy(0.3, 0.7);
        let c = collapse(&ls, &FusedSets::singletons(2)).unwrap();
        assert_eq!(c.problem(), &ls);
    }

    #[test]
    fn full_fusion_collapse() {
        let ls = toy(0.3, 0.7);
        let sets = FusedSets::new(ls.graph(), vec![vec![0, 1]], vec![Provenance::Whole]).unwrap();
        let c = collapse(&ls, &sets).unwrap();
        assert_eq!(c.problem().x().col(0), &[1.0, 1.0]);
        assert_eq!(c.problem().graph().node_weights(), &[2.0]);
        assert!(c.problem().graph().edges().is_empty());
    }

    #[test]
    fn cross_edge_weight_collapse() {
        let g = PenaltyGraph::with_unit_weights(3, vec![(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let ls = LeastSquares::new(Matrix::identity(3), vec![1.0, 2.0, 3.0], None, g, 0.1, 0.2)
            .unwrap();
        let sets = FusedSets::new(
            ls.graph(),
            vec![vec![0, 1], vec![2]],
            vec![Provenance::Whole; 2],
        )
        .unwrap();
        let c = collapse(&ls, &sets).unwrap();
        assert_eq!(c.problem().graph().edges(), &[(0, 1, 2.0)]);
        for reduced in [[0.5, -1.0], [2.0, 2.0], [0.0, 3.5]] {
            let full = c.expand(&reduced);
            let a = c.problem().objective(&reduced);
            let b = ls.objective(&full);
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn invalid_fused_sets() {
        let g = PenaltyGraph::chain(3);
        let w = Provenance::Whole;
        assert!(FusedSets::new(&g, vec![vec![0, 2], vec![1]], vec![w; 2]).is_err());
        assert!(FusedSets::new(&g, vec![vec![0, 1], vec![1, 2]], vec![w; 2]).is_err());
        assert!(FusedSets::new(&g, vec![vec![0, 1]], vec![w]).is_err());
        assert!(FusedSets::new(&g, vec![vec![0, 1], vec![], vec![2]], vec![w; 3]).is_err());
    }

    #[test]
    fn active_split_examples() {
        let beta = [1.0, 1.0];
        let ls = toy(0.0, 0.5);
        let part = build_partition(ls.graph(), &beta);
        let out = split_set(&ls, &beta, &part, 0, SplitMode::Active).unwrap();
        assert_eq!(out.flow_value, 0.5);
        assert_eq!(out.components, vec![vec![0], vec![1]]);
        assert_eq!(out.provenance, vec![Provenance::Positive, Provenance::Negative]);

        let ls = toy(0.0, 1.0);
        let out = split_set(&ls, &beta, &part, 0, SplitMode::Active).unwrap();
        assert_eq!(out.flow_value, 1.0);
        assert!(!out.is_split());
    }

    #[test]
    fn inactive_split_without_pull() {
        // pulls (−2, 0) against λ₁w = 3: both graphs carry no terminal arcs
        let ls = toy(3.0, 0.1);
        let beta = [0.0, 0.0];
        let part = build_partition(ls.graph(), &beta);
        let out = split_set(&ls, &beta, &part, 0, SplitMode::Inactive).unwrap();
        assert!(!out.is_split());
        assert_eq!(out.flow_value, 0.0);
    }

    #[test]
    fn split_preconditions() {
        let ls = toy(0.0, 1.0);
        let zero = [0.0, 0.0];
        let part = build_partition(ls.graph(), &zero);
        assert_eq!(
            split_set(&ls, &zero, &part, 0, SplitMode::Active),
            Err(Error::SplitPrecondition { set: 0, mode: "active" })
        );
        let one = [1.0, 1.0];
        let part = build_partition(ls.graph(), &one);
        assert!(split_set(&ls, &one, &part, 0, SplitMode::Inactive).is_err());
    }

    #[test]
    fn exact_rescues_stall() {
        let ls = toy(0.0, 2.0);
        let (sol, trace) = solve_exact_traced(&ls, &[0.0, 0.0], &ExactConfig::default()).unwrap();
        assert!((sol.beta[0] - 1.0).abs() < 1e-9 && (sol.beta[1] - 1.0).abs() < 1e-9);
        assert!((sol.objective - 1.0).abs() < 1e-9);
        assert!(trace.optimal && !trace.stalled);
        assert!(sol.converged);
    }

    #[test]
    fn exact_null_model() {
        let x = Matrix::from_rows(&[[1.0, 0.5, 0.0], [0.0, 1.0, -1.0], [2.0, 0.0, 1.0]]).unwrap();
        let y = vec![1.0, -2.0, 0.5];
        let lmax = x.tr_mul_vec(&y).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ls = LeastSquares::new(x, y, None, PenaltyGraph::chain(3), lmax * 1.001, 0.0).unwrap();
        let sol = solve_exact_traced(&ls, &[0.0; 3], &ExactConfig::default()).unwrap().0;
        assert_eq!(sol.beta, vec![0.0; 3]);
    }
}
