//! Information flow graphs of repair histories and their exact min-cuts.
//!
//! Every storage slot `1..=n` starts as an (In, Out) pair at stage 0 fed by
//! the source with capacity `α`. A repair round at stage `s ≥ 1` replaces `t`
//! slots with (In, Coop1, Coop2, Out) tuples. Base-station layers hang off a
//! chain `S → BS_M → … → BS_1`.

mod maxflow;

pub use maxflow::FlowSolution;

use crate::bounds::CompositionVector;
use crate::model::{ModelError, RepairVariables, SystemParams};
use crate::numeric::{exact_string, Rational};
use maxflow::{edmonds_karp, MaxFlowError};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlowError {
    #[error("invalid history: {0}")]
    InvalidHistory(String),
    #[error("collector must reach {k} distinct alive nodes: {reason}")]
    InvalidCollector { k: usize, reason: String },
    #[error("only {alive} alive nodes, collectors need {k}")]
    NotEnoughAlive { alive: usize, k: usize },
    #[error("collector is not reachable with finite flow")]
    Unbounded,
    #[error("composition is not valid for k = {k}, t = {t}")]
    InvalidComposition { k: usize, t: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Source,
    /// 1-based layer.
    Bs(usize),
    In,
    Coop1,
    Coop2,
    Out,
    Collector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FlowNode {
    pub kind: NodeKind,
    /// `−1` for the source, `0` for initial nodes and base stations.
    pub stage: i64,
    /// Storage slot (1-based) or base-station layer; 0 for S and the collector.
    pub index: usize,
}

impl fmt::Display for FlowNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NodeKind::Source => write!(f, "S"),
            NodeKind::Collector => write!(f, "DC"),
            NodeKind::Bs(l) => write!(f, "BS{l}"),
            NodeKind::In => write!(f, "In{}_{}", self.index, self.stage),
            NodeKind::Coop1 => write!(f, "Coop1_{}_{}", self.index, self.stage),
            NodeKind::Coop2 => write!(f, "Coop2_{}_{}", self.index, self.stage),
            NodeKind::Out => write!(f, "Out{}_{}", self.index, self.stage),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Capacity {
    Finite(Rational),
    Infinite,
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(v) => write!(f, "{}", exact_string(v)),
            Capacity::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowEdge {
    pub from: usize,
    pub to: usize,
    pub capacity: Capacity,
}

/// One lazy-repair round: `t` failed slots and the `d` helpers of each
/// newcomer (aligned with `failed`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairRound {
    pub failed: Vec<usize>,
    pub helpers: Vec<Vec<usize>>,
    /// Per-layer fractions for this round; `None` uses the variables' `r`.
    pub bs_usage: Option<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RepairHistory {
    pub rounds: Vec<RepairRound>,
}

#[derive(Debug, Clone)]
pub struct FlowGraph {
    pub nodes: Vec<FlowNode>,
    pub edges: Vec<FlowEdge>,
    source: usize,
    /// Current Out vertex of each slot.
    alive_out: Vec<usize>,
    k: usize,
}

/// Max-flow to one collector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollectorFlow {
    pub slots: Vec<usize>,
    pub value: Rational,
    pub solution: FlowSolution,
}

fn check_ids(ids: &[usize], n: usize, what: &str) -> Result<(), FlowError> {
    let mut seen = BTreeSet::new();
    for &i in ids {
        if i == 0 || i > n {
            return Err(FlowError::InvalidHistory(format!(
                "{what} id {i} outside 1..={n}"
            )));
        }
        if !seen.insert(i) {
            return Err(FlowError::InvalidHistory(format!("{what} id {i} repeated")));
        }
    }
    Ok(())
}

/// Checks sizes and ids of every round against `p`.
pub fn validate_history(p: &SystemParams, h: &RepairHistory) -> Result<(), FlowError> {
    for (s, round) in h.rounds.iter().enumerate() {
        let at = |msg: String| FlowError::InvalidHistory(format!("round {}: {msg}", s + 1));
        if round.failed.len() != p.t {
            return Err(at(format!(
                "{} failures, expected t = {}",
                round.failed.len(),
                p.t
            )));
        }
        check_ids(&round.failed, p.n, "failed")?;
        if round.helpers.len() != p.t {
            return Err(at(format!(
                "{} helper sets, expected {}",
                round.helpers.len(),
                p.t
            )));
        }
        for hs in &round.helpers {
            if hs.len() != p.d {
                return Err(at(format!("{} helpers, expected d = {}", hs.len(), p.d)));
            }
            check_ids(hs, p.n, "helper")?;
            if let Some(x) = hs.iter().find(|x| round.failed.contains(x)) {
                return Err(at(format!("helper {x} failed in the same round")));
            }
        }
        if let Some(u) = &round.bs_usage {
            if u.len() != p.layers() {
                return Err(at(format!(
                    "{} layer fractions, expected {}",
                    u.len(),
                    p.layers()
                )));
            }
            if u.iter().any(|x| *x < Rational::zero()) {
                return Err(at("negative layer fraction".into()));
            }
        }
    }
    Ok(())
}

/// Builds the flow graph of `h`; base-station layers are supplied with `F`.
pub fn build_history_graph(
    p: &SystemParams,
    v: &RepairVariables,
    h: &RepairHistory,
    alpha: &Rational,
) -> Result<FlowGraph, FlowError> {
    build_history_graph_with_supply(p, v, h, alpha, Capacity::Finite(p.file_size.clone()))
}

/// As [`build_history_graph`] with an explicit capacity on every edge of the
/// base-station chain.
pub fn build_history_graph_with_supply(
    p: &SystemParams,
    v: &RepairVariables,
    h: &RepairHistory,
    alpha: &Rational,
    bs_supply: Capacity,
) -> Result<FlowGraph, FlowError> {
    validate_history(p, h)?;
    if v.r.len() != p.layers() {
        return Err(ModelError::InvalidVariables(format!(
            "r has {} entries for {} layers",
            v.r.len(),
            p.layers()
        ))
        .into());
    }
    let default_usage: Vec<Rational> = (0..p.layers())
        .map(|l| {
            if v.selector.is_used(l) {
                v.r[l].clone()
            } else {
                Rational::zero()
            }
        })
        .collect();

    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let add = |nodes: &mut Vec<FlowNode>, kind, stage, index| {
        nodes.push(FlowNode { kind, stage, index });
        nodes.len() - 1
    };
    let fin = |x: Rational| Capacity::Finite(x);
    let source = add(&mut nodes, NodeKind::Source, -1, 0);

    let mut bs = Vec::with_capacity(p.layers());
    for l in 1..=p.layers() {
        bs.push(add(&mut nodes, NodeKind::Bs(l), 0, l));
    }
    if let Some(&top) = bs.last() {
        edges.push(FlowEdge {
            from: source,
            to: top,
            capacity: bs_supply.clone(),
        });
        for l in (1..p.layers()).rev() {
            edges.push(FlowEdge {
                from: bs[l],
                to: bs[l - 1],
                capacity: bs_supply.clone(),
            });
        }
    }

    let mut alive_out = Vec::with_capacity(p.n);
    for j in 1..=p.n {
        let i = add(&mut nodes, NodeKind::In, 0, j);
        let o = add(&mut nodes, NodeKind::Out, 0, j);
        edges.push(FlowEdge {
            from: source,
            to: i,
            capacity: fin(alpha.clone()),
        });
        edges.push(FlowEdge {
            from: i,
            to: o,
            capacity: Capacity::Infinite,
        });
        alive_out.push(o);
    }

    for (s, round) in h.rounds.iter().enumerate() {
        let stage = s as i64 + 1;
        let usage = round.bs_usage.as_ref().unwrap_or(&default_usage);
        let mut tuples = Vec::with_capacity(p.t);
        for (&j, helpers) in round.failed.iter().zip(&round.helpers) {
            let i = add(&mut nodes, NodeKind::In, stage, j);
            let c1 = add(&mut nodes, NodeKind::Coop1, stage, j);
            let c2 = add(&mut nodes, NodeKind::Coop2, stage, j);
            let o = add(&mut nodes, NodeKind::Out, stage, j);
            for &hlp in helpers {
                edges.push(FlowEdge {
                    from: alive_out[hlp - 1],
                    to: i,
                    capacity: fin(v.beta.clone()),
                });
            }
            for (l, r) in usage.iter().enumerate() {
                edges.push(FlowEdge {
                    from: bs[l],
                    to: c1,
                    capacity: fin(r * &v.beta),
                });
            }
            edges.push(FlowEdge {
                from: i,
                to: c1,
                capacity: Capacity::Infinite,
            });
            edges.push(FlowEdge {
                from: c1,
                to: c2,
                capacity: Capacity::Infinite,
            });
            edges.push(FlowEdge {
                from: c2,
                to: o,
                capacity: fin(alpha.clone()),
            });
            tuples.push((j, c1, c2, o));
        }
        for &(_, c1, _, _) in &tuples {
            for &(_, _, c2, _) in &tuples {
                if c1 + 1 != c2 {
                    edges.push(FlowEdge {
                        from: c1,
                        to: c2,
                        capacity: fin(v.beta_prime.clone()),
                    });
                }
            }
        }
        for (j, _, _, o) in tuples {
            alive_out[j - 1] = o;
        }
    }

    Ok(FlowGraph {
        nodes,
        edges,
        source,
        alive_out,
        k: p.k,
    })
}

impl FlowGraph {
    pub fn source(&self) -> usize {
        self.source
    }

    /// Current Out vertex of slot `j` (1-based).
    pub fn alive_out(&self, j: usize) -> usize {
        self.alive_out[j - 1]
    }

    pub fn slots(&self) -> usize {
        self.alive_out.len()
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    /// Max-flow from the source to a collector attached to the current Out
    /// vertices of `slots`.
    pub fn max_flow(&self, slots: &[usize]) -> Result<CollectorFlow, FlowError> {
        let invalid = |reason: String| FlowError::InvalidCollector { k: self.k, reason };
        if slots.len() != self.k {
            return Err(invalid(format!("{} slots given", slots.len())));
        }
        let mut seen = BTreeSet::new();
        for &j in slots {
            if j == 0 || j > self.slots() || !seen.insert(j) {
                return Err(invalid(format!("slot {j} invalid or repeated")));
            }
        }
        let sink = self.nodes.len();
        let mut arcs: Vec<(usize, usize, Capacity)> = self
            .edges
            .iter()
            .map(|e| (e.from, e.to, e.capacity.clone()))
            .collect();
        for &j in slots {
            arcs.push((self.alive_out(j), sink, Capacity::Infinite));
        }
        let solution = edmonds_karp(sink + 1, &arcs, self.source, sink).map_err(|e| match e {
            MaxFlowError::Unbounded => FlowError::Unbounded,
        })?;
        Ok(CollectorFlow {
            slots: slots.to_vec(),
            value: solution.value.clone(),
            solution,
        })
    }

    /// Minimum max-flow over every `k`-subset of alive nodes.
    pub fn min_cut_over_collectors(&self) -> Result<CollectorFlow, FlowError> {
        if self.slots() < self.k {
            return Err(FlowError::NotEnoughAlive {
                alive: self.slots(),
                k: self.k,
            });
        }
        let subsets = k_subsets(self.slots(), self.k);
        let flows: Result<Vec<CollectorFlow>, FlowError> =
            subsets.par_iter().map(|s| self.max_flow(s)).collect();
        Ok(flows?
            .into_iter()
            .min_by(|a, b| a.value.cmp(&b.value))
            .expect("at least one collector exists"))
    }

    /// Graphviz rendering with capacity labels.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph flow {\n  rankdir=LR;\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{n}\"];");
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  n{} -> n{} [label=\"{}\"];",
                e.from, e.to, e.capacity
            );
        }
        out.push_str("}\n");
        out
    }
}

/// All `k`-subsets of `1..=n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            if n - i + 1 < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, n, k, &mut Vec::new(), &mut out);
    out
}

/// History whose collector (also returned) realizes the cut of composition
/// `c`: slots `1..=u0` are never repaired, group `j` occupies the next `u_j`
/// slots and is repaired in round `j` together with `t − u_j` outside slots,
/// and every newcomer of round `j` uses all previously counted collector
/// slots as helpers.
pub fn canonical_worst_history(
    p: &SystemParams,
    c: &CompositionVector,
) -> Result<(RepairHistory, Vec<usize>), FlowError> {
    if !c.is_valid(p.k, p.t) {
        return Err(FlowError::InvalidComposition { k: p.k, t: p.t });
    }
    if p.k > p.d + 1 || p.d + p.t > p.n || p.k + p.t > p.n {
        return Err(FlowError::InvalidHistory(format!(
            "n = {} too small for k = {}, d = {}, t = {}",
            p.n, p.k, p.d, p.t
        )));
    }
    let outside: Vec<usize> = (p.k + 1..=p.n).collect();
    let mut rounds = Vec::with_capacity(c.groups.len());
    let mut counted = c.u0;
    for &u in &c.groups {
        let members: Vec<usize> = (counted + 1..=counted + u).collect();
        let mut failed = members.clone();
        failed.extend(&outside[..p.t - u]);
        let mut pool: Vec<usize> = (counted + u + 1..=p.k).collect();
        pool.extend(&outside[p.t - u..]);
        let mut helpers: Vec<usize> = (1..=counted.min(p.d)).collect();
        helpers.extend(&pool[..p.d - helpers.len()]);
        rounds.push(RepairRound {
            failed,
            helpers: vec![helpers; p.t],
            bs_usage: None,
        });
        counted += u;
    }
    Ok((RepairHistory { rounds }, (1..=p.k).collect()))
}

/// Uniformly random history of `rounds` rounds.
pub fn random_history<R: Rng + ?Sized>(
    p: &SystemParams,
    rounds: usize,
    rng: &mut R,
) -> RepairHistory {
    let ids: Vec<usize> = (1..=p.n).collect();
    let rounds = (0..rounds)
        .map(|_| {
            let failed: Vec<usize> = ids.choose_multiple(rng, p.t).copied().collect();
            let alive: Vec<usize> = ids
                .iter()
                .copied()
                .filter(|j| !failed.contains(j))
                .collect();
            let helpers = (0..p.t)
                .map(|_| alive.choose_multiple(rng, p.d).copied().collect())
                .collect();
            RepairRound {
                failed,
                helpers,
                bs_usage: None,
            }
        })
        .collect();
    RepairHistory { rounds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{
        bound_via_compositions, composition_value, compositions, max_recoverable_file,
    };
    use crate::numeric::{int, ratio};
    use crate::selector;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scenario1() -> SystemParams {
        SystemParams {
            n: 4,
            k: 2,
            d: 2,
            t: 2,
            weights: vec![ratio(11, 10), ratio(17, 10)],
            capacities: vec![int(1), int(1)],
            file_size: int(4),
        }
    }

    fn witness(r: Vec<Rational>) -> RepairVariables {
        RepairVariables::all_layers(ratio(1, 2), ratio(1, 2), r)
    }

    #[test]
    fn initial_only_graph() {
        let p = scenario1();
        let v = witness(vec![int(1), int(1)]);
        let g = build_history_graph(&p, &v, &RepairHistory::default(), &int(2)).unwrap();
        for s in k_subsets(4, 2) {
            assert_eq!(g.max_flow(&s).unwrap().value, int(4));
        }
        assert_eq!(g.min_cut_over_collectors().unwrap().value, int(4));
    }

    #[test]
    fn three_node_single_failure_topology() {
        let p = scenario1();
        let v = witness(vec![int(1), int(1)]);
        let (h, dc) = canonical_worst_history(
            &p,
            &CompositionVector {
                u0: 0,
                groups: vec![2],
            },
        )
        .unwrap();
        assert_eq!(h.rounds.len(), 1);
        let g = build_history_graph(&p, &v, &h, &int(2)).unwrap();
        assert_eq!(g.count(NodeKind::Source), 1);
        assert_eq!(
            g.nodes
                .iter()
                .filter(|n| n.stage == 0 && n.kind == NodeKind::In)
                .count(),
            4
        );
        assert_eq!(
            g.nodes
                .iter()
                .filter(|n| n.stage == 0 && n.kind == NodeKind::Out)
                .count(),
            4
        );
        assert_eq!(g.count(NodeKind::Coop1), 2);
        assert_eq!(g.count(NodeKind::Coop2), 2);
        assert_eq!(
            g.nodes
                .iter()
                .filter(|n| matches!(n.kind, NodeKind::Bs(_)))
                .count(),
            2
        );
        let cross = g
            .edges
            .iter()
            .filter(|e| {
                g.nodes[e.from].kind == NodeKind::Coop1 && g.nodes[e.to].kind == NodeKind::Coop2
            })
            .filter(|e| g.nodes[e.from].index != g.nodes[e.to].index)
            .count();
        assert_eq!(cross, 2);
        assert_eq!(g.max_flow(&dc).unwrap().value, int(4));
        assert!(g.to_dot().contains("BS2"));
    }

    #[test]
    fn single_newcomer_has_no_cross_edges() {
        let mut p = scenario1();
        p.t = 1;
        let v = witness(vec![int(1), int(1)]);
        let (h, _) = canonical_worst_history(
            &p,
            &CompositionVector {
                u0: 1,
                groups: vec![1],
            },
        )
        .unwrap();
        let g = build_history_graph(&p, &v, &h, &int(2)).unwrap();
        assert!(!g
            .edges
            .iter()
            .any(|e| g.nodes[e.from].kind == NodeKind::Coop1
                && g.nodes[e.to].kind == NodeKind::Coop2
                && g.nodes[e.from].index != g.nodes[e.to].index));
    }

    #[test]
    fn scenario1_newcomer_collector() {
        let p = scenario1();
        let h = RepairHistory {
            rounds: vec![RepairRound {
                failed: vec![2, 4],
                helpers: vec![vec![1, 3], vec![1, 3]],
                bs_usage: None,
            }],
        };
        let alpha = int(2);
        let v = witness(vec![int(1), int(1)]);
        let g = build_history_graph(&p, &v, &h, &alpha).unwrap();
        let flow = g.max_flow(&[2, 4]).unwrap();
        assert_eq!(flow.value, int(4));
        assert_eq!(flow.value, max_recoverable_file(&p, &v, &alpha));
        for (e, f) in g.edges.iter().zip(&flow.solution.edge_flows) {
            if let Capacity::Finite(c) = &e.capacity {
                assert!(f <= c);
            }
            assert!(*f >= Rational::zero());
        }

        let v0 = witness(vec![int(0), int(0)]);
        let g0 = build_history_graph(&p, &v0, &h, &alpha).unwrap();
        assert_eq!(g0.max_flow(&[2, 4]).unwrap().value, int(2));
        assert_eq!(
            g0.min_cut_over_collectors().unwrap().value,
            max_recoverable_file(&p, &v0, &alpha)
        );
    }

    #[test]
    fn initial_collector_after_repairs() {
        let p = SystemParams {
            n: 6,
            ..scenario1()
        };
        let v = witness(vec![int(1), int(0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut h = random_history(&p, 3, &mut rng);
        for round in &mut h.rounds {
            round.failed.retain(|&j| j > 2);
        }
        h.rounds.retain(|r| r.failed.len() == p.t);
        for round in &mut h.rounds {
            for hs in &mut round.helpers {
                hs.retain(|x| !round.failed.contains(x));
            }
        }
        let g = build_history_graph(&p, &v, &h, &int(3)).unwrap();
        assert_eq!(g.max_flow(&[1, 2]).unwrap().value, int(6));
    }

    #[test]
    fn rejects_invalid_input() {
        let p = scenario1();
        let v = witness(vec![int(1), int(1)]);
        let bad = |round: RepairRound| {
            build_history_graph(
                &p,
                &v,
                &RepairHistory {
                    rounds: vec![round],
                },
                &int(2),
            )
            .unwrap_err()
        };
        assert!(matches!(
            bad(RepairRound {
                failed: vec![1],
                helpers: vec![vec![2, 3]],
                bs_usage: None
            }),
            FlowError::InvalidHistory(_)
        ));
        assert!(matches!(
            bad(RepairRound {
                failed: vec![1, 2],
                helpers: vec![vec![2, 3], vec![3, 4]],
                bs_usage: None
            }),
            FlowError::InvalidHistory(_)
        ));
        assert!(matches!(
            bad(RepairRound {
                failed: vec![1, 5],
                helpers: vec![vec![3, 4], vec![3, 4]],
                bs_usage: None
            }),
            FlowError::InvalidHistory(_)
        ));
        let g = build_history_graph(&p, &v, &RepairHistory::default(), &int(2)).unwrap();
        assert!(matches!(
            g.max_flow(&[1]),
            Err(FlowError::InvalidCollector { .. })
        ));
        assert!(matches!(
            g.max_flow(&[1, 1]),
            Err(FlowError::InvalidCollector { .. })
        ));
        assert!(matches!(
            canonical_worst_history(
                &p,
                &CompositionVector {
                    u0: 0,
                    groups: vec![3]
                }
            ),
            Err(FlowError::InvalidComposition { .. })
        ));
    }

    #[test]
    fn bound_overshoots_when_cooperation_exceeds_helper_download() {
        // β' > β: the round-mate outside the collector cannot relay β'
        let p = SystemParams {
            n: 3,
            k: 1,
            d: 1,
            t: 2,
            weights: vec![],
            capacities: vec![],
            file_size: int(10),
        };
        let v = RepairVariables::all_layers(ratio(1, 2), int(1), vec![]);
        let alpha = ratio(3, 2);
        let c = CompositionVector {
            u0: 0,
            groups: vec![1],
        };
        let (h, dc) = canonical_worst_history(&p, &c).unwrap();
        let g = build_history_graph(&p, &v, &h, &alpha).unwrap();
        assert_eq!(max_recoverable_file(&p, &v, &alpha), ratio(3, 2));
        assert_eq!(g.max_flow(&dc).unwrap().value, int(1));
    }

    fn small_params() -> impl Strategy<Value = (SystemParams, RepairVariables, Rational)> {
        (1usize..=4, 1usize..=3, 0usize..=2, 0usize..=2, 0usize..=2)
            .prop_flat_map(|(k, t, dd, extra, m)| {
                let d = k + dd;
                let n = (d + t + extra).min(6).max(d + t);
                (
                    Just((n, k, d, t, m)),
                    proptest::collection::vec(0i64..=4, m),
                    1i64..=6,
                    0i64..=6,
                    1i64..=12,
                    0usize..=m,
                )
            })
            .prop_filter("n ≤ 6", |((n, ..), ..)| *n <= 6)
            .prop_map(|((n, k, d, t, m), r, b, bp, a, rho)| {
                let p = SystemParams {
                    n,
                    k,
                    d,
                    t,
                    weights: (0..m).map(|l| int(l as i64 + 1)).collect(),
                    capacities: vec![int(1); m],
                    file_size: int(1000),
                };
                let mut r: Vec<Rational> = r.into_iter().map(|x| ratio(x, 4)).collect();
                for x in r.iter_mut().skip(rho) {
                    *x = Rational::zero();
                }
                let v = RepairVariables {
                    beta: ratio(b, 2),
                    beta_prime: ratio(b * bp, 12),
                    r,
                    selector: selector(rho, m).unwrap(),
                };
                (p, v, ratio(a, 2))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn min_cut_never_below_bound((p, v, alpha) in small_params(), seed in any::<u64>(), rounds in 0usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_history(&p, rounds, &mut rng);
            let g = build_history_graph_with_supply(&p, &v, &h, &alpha, Capacity::Infinite).unwrap();
            let cut = g.min_cut_over_collectors().unwrap().value;
            prop_assert!(cut >= max_recoverable_file(&p, &v, &alpha));
        }

        #[test]
        fn canonical_histories_are_tight((p, v, alpha) in small_params()) {
            let bound = bound_via_compositions(&p, &v, &alpha).unwrap();
            prop_assert_eq!(&bound, &max_recoverable_file(&p, &v, &alpha));
            let mut best: Option<Rational> = None;
            for c in compositions(p.k, p.t) {
                let (h, dc) = canonical_worst_history(&p, &c).unwrap();
                let g = build_history_graph_with_supply(&p, &v, &h, &alpha, Capacity::Infinite).unwrap();
                let flow = g.max_flow(&dc).unwrap().value;
                let value = composition_value(&p, &v, &alpha, &c);
                prop_assert!(flow <= value);
                prop_assert!(flow >= bound);
                best = Some(best.map_or(flow.clone(), |b: Rational| b.min(flow)));
            }
            prop_assert_eq!(best.unwrap(), bound);
        }
    }
}
