//! Edmonds–Karp over exact rationals with symbolic infinite capacities.

use super::Capacity;
use crate::numeric::Rational;
use num_traits::Zero;
use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSolution {
    pub value: Rational,
    /// Flow on each input edge, in input order.
    pub edge_flows: Vec<Rational>,
    /// Nodes reachable from the source in the final residual graph.
    pub source_side: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum MaxFlowError {
    Unbounded,
}

fn residual(cap: &Capacity, flow: &Rational, forward: bool) -> Option<Option<Rational>> {
    // Some(None) means infinite residual capacity, None means saturated.
    if forward {
        match cap {
            Capacity::Infinite => Some(None),
            Capacity::Finite(c) => {
                let r = c - flow;
                (r > Rational::zero()).then_some(Some(r))
            }
        }
    } else {
        (*flow > Rational::zero()).then(|| Some(flow.clone()))
    }
}

pub(crate) fn edmonds_karp(
    nodes: usize,
    edges: &[(usize, usize, Capacity)],
    source: usize,
    sink: usize,
) -> Result<FlowSolution, MaxFlowError> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (e, (u, v, _)) in edges.iter().enumerate() {
        adj[*u].push(2 * e);
        adj[*v].push(2 * e + 1);
    }
    let mut flow = vec![Rational::zero(); edges.len()];
    let mut value = Rational::zero();
    loop {
        let mut pred: Vec<Option<usize>> = vec![None; nodes];
        let mut seen = vec![false; nodes];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            if u == sink {
                break;
            }
            for &arc in &adj[u] {
                let e = arc / 2;
                let forward = arc % 2 == 0;
                let (a, b, cap) = &edges[e];
                let next = if forward { *b } else { *a };
                if seen[next] || residual(cap, &flow[e], forward).is_none() {
                    continue;
                }
                seen[next] = true;
                pred[next] = Some(arc);
                queue.push_back(next);
            }
        }
        if !seen[sink] {
            return Ok(FlowSolution {
                value,
                edge_flows: flow,
                source_side: seen,
            });
        }
        let mut path = Vec::new();
        let mut at = sink;
        while at != source {
            let arc = pred[at].expect("every reached node has a predecessor");
            path.push(arc);
            let (a, b, _) = &edges[arc / 2];
            at = if arc.is_multiple_of(2) { *a } else { *b };
        }
        let mut bottleneck: Option<Rational> = None;
        for &arc in &path {
            let e = arc / 2;
            if let Some(Some(r)) = residual(&edges[e].2, &flow[e], arc % 2 == 0) {
                bottleneck = Some(match bottleneck {
                    Some(b) if b <= r => b,
                    _ => r,
                });
            }
        }
        let delta = bottleneck.ok_or(MaxFlowError::Unbounded)?;
        for &arc in &path {
            let e = arc / 2;
            if arc % 2 == 0 {
                flow[e] += &delta;
            } else {
                flow[e] -= &delta;
            }
        }
        value += delta;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, ratio};

    fn fin(v: Rational) -> Capacity {
        Capacity::Finite(v)
    }

    #[test]
    fn classic_network() {
        // CLRS example, max flow 23
        let e = vec![
            (0, 1, fin(int(16))),
            (0, 2, fin(int(13))),
            (1, 3, fin(int(12))),
            (2, 1, fin(int(4))),
            (2, 4, fin(int(14))),
            (3, 2, fin(int(9))),
            (3, 5, fin(int(20))),
            (4, 3, fin(int(7))),
            (4, 5, fin(int(4))),
        ];
        let s = edmonds_karp(6, &e, 0, 5).unwrap();
        assert_eq!(s.value, int(23));
        // conservation at internal nodes
        for v in 1..5 {
            let inflow: Rational = e
                .iter()
                .zip(&s.edge_flows)
                .filter(|(x, _)| x.1 == v)
                .map(|(_, f)| f.clone())
                .sum();
            let outflow: Rational = e
                .iter()
                .zip(&s.edge_flows)
                .filter(|(x, _)| x.0 == v)
                .map(|(_, f)| f.clone())
                .sum();
            assert_eq!(inflow, outflow);
        }
        let cut: Rational = e
            .iter()
            .filter(|(a, b, _)| s.source_side[*a] && !s.source_side[*b])
            .map(|(_, _, c)| match c {
                Capacity::Finite(c) => c.clone(),
                Capacity::Infinite => unreachable!(),
            })
            .sum();
        assert_eq!(cut, int(23));
    }

    #[test]
    fn rational_and_infinite_edges() {
        let e = vec![
            (0, 1, fin(ratio(1, 3))),
            (0, 2, fin(ratio(1, 2))),
            (1, 3, Capacity::Infinite),
            (2, 3, Capacity::Infinite),
        ];
        assert_eq!(edmonds_karp(4, &e, 0, 3).unwrap().value, ratio(5, 6));
        let inf = vec![(0, 1, Capacity::Infinite)];
        assert_eq!(edmonds_karp(2, &inf, 0, 1), Err(MaxFlowError::Unbounded));
        assert_eq!(edmonds_karp(2, &[], 0, 1).unwrap().value, int(0));
    }
}
