//! Oracle sweeps: closed-form bound against composition enumeration, and
//! the bound against exact min-cuts of flow graphs.
//!
//! Both sweeps take a `ψ` function so that a deliberately wrong `ψ` can be
//! shown to produce counterexamples.

use crate::bounds::{
    bound_via_compositions, composition_value, compositions, max_recoverable_file_with, PsiFn,
};
use crate::flowgraph::{
    build_history_graph_with_supply, canonical_worst_history, random_history, Capacity, FlowError,
};
use crate::model::{selector, RepairVariables, SystemParams};
use crate::numeric::{from_usize, ratio, serialize_rational, serialize_rationals, Rational};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub check: &'static str,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub t: usize,
    pub rho: usize,
    #[serde(serialize_with = "serialize_rationals")]
    pub capacities: Vec<Rational>,
    #[serde(serialize_with = "serialize_rational")]
    pub alpha: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub beta: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub beta_prime: Rational,
    #[serde(serialize_with = "serialize_rationals")]
    pub r: Vec<Rational>,
    #[serde(serialize_with = "serialize_rational")]
    pub expected: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub observed: Rational,
    pub detail: String,
}

impl Counterexample {
    fn new(
        check: &'static str,
        p: &SystemParams,
        v: &RepairVariables,
        alpha: &Rational,
        expected: Rational,
        observed: Rational,
        detail: String,
    ) -> Self {
        Counterexample {
            check,
            n: p.n,
            k: p.k,
            d: p.d,
            t: p.t,
            rho: v.selector.rho(),
            capacities: p.capacities.clone(),
            alpha: alpha.clone(),
            beta: v.beta.clone(),
            beta_prime: v.beta_prime.clone(),
            r: v.r.clone(),
            expected,
            observed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub parameter_sets: usize,
    pub checks: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl SweepReport {
    fn merge(parts: Vec<SweepReport>) -> SweepReport {
        let mut out = SweepReport::default();
        for p in parts {
            out.parameter_sets += p.parameter_sets;
            out.checks += p.checks;
            out.counterexamples.extend(p.counterexamples);
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub bounds: SweepReport,
    pub flow: SweepReport,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.bounds.counterexamples.is_empty() && self.flow.counterexamples.is_empty()
    }
}

/// Grid for the closed-form versus composition sweep: every
/// `k ≤ max_k`, `t ≤ max_t`, `M ≤ max_layers`, `d ∈ k..=k+extra_d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundSweep {
    pub max_k: usize,
    pub max_t: usize,
    pub max_layers: usize,
    pub extra_d: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for BoundSweep {
    fn default() -> Self {
        BoundSweep {
            max_k: 6,
            max_t: 3,
            max_layers: 2,
            extra_d: 2,
            samples: 50,
            seed: 0,
        }
    }
}

impl BoundSweep {
    pub fn exhaustive(seed: u64) -> Self {
        BoundSweep {
            max_k: 8,
            max_t: 4,
            max_layers: 2,
            extra_d: 2,
            samples: 50,
            seed,
        }
    }
}

/// Grid for the flow-graph sweep: every `(n, k, d, t, M)` with `n ≤ max_n`,
/// `k ≤ max_k`, `t ≤ max_t`, `M ≤ max_layers` and `k ≤ d ≤ n − t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSweep {
    pub max_n: usize,
    pub max_k: usize,
    pub max_t: usize,
    pub max_layers: usize,
    /// Variable samples per parameter set.
    pub samples: usize,
    /// Random histories per variable sample.
    pub histories: usize,
    pub max_rounds: usize,
    pub seed: u64,
}

impl Default for FlowSweep {
    fn default() -> Self {
        FlowSweep {
            max_n: 6,
            max_k: 4,
            max_t: 3,
            max_layers: 2,
            samples: 2,
            histories: 2,
            max_rounds: 3,
            seed: 0,
        }
    }
}

impl FlowSweep {
    pub fn exhaustive(seed: u64) -> Self {
        FlowSweep {
            samples: 4,
            histories: 4,
            seed,
            ..FlowSweep::default()
        }
    }
}

fn small_rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    ratio(rng.gen_range(0..=max_num), rng.gen_range(1..=max_den))
}

/// Random parameters over a fixed shape: sorted weights in `[1, 3]` and
/// capacities in `[0, 1]` on a quarter grid.
fn random_params<R: Rng>(
    rng: &mut R,
    n: usize,
    k: usize,
    d: usize,
    t: usize,
    m: usize,
) -> SystemParams {
    let mut weights: Vec<Rational> = (0..m).map(|_| ratio(rng.gen_range(10..=30), 10)).collect();
    weights.sort();
    SystemParams {
        n,
        k,
        d,
        t,
        weights,
        capacities: (0..m).map(|_| ratio(rng.gen_range(0..=4), 4)).collect(),
        file_size: from_usize(1000),
    }
}

/// Random variables; with `relay_limited`, `β' ≤ β`.
fn random_variables<R: Rng>(
    rng: &mut R,
    p: &SystemParams,
    relay_limited: bool,
) -> (RepairVariables, Rational) {
    let m = p.layers();
    let rho = rng.gen_range(0..=m);
    let beta = ratio(rng.gen_range(1..=12), rng.gen_range(1..=4));
    let beta_prime = if relay_limited {
        &beta * ratio(rng.gen_range(0..=6), 6)
    } else {
        small_rational(rng, 12, 4)
    };
    let r = (0..m)
        .map(|l| {
            if l < rho {
                &p.capacities[l] * ratio(rng.gen_range(0..=4), 4)
            } else {
                Rational::zero()
            }
        })
        .collect();
    let alpha = ratio(rng.gen_range(1..=40), rng.gen_range(1..=4));
    let v = RepairVariables {
        beta,
        beta_prime,
        r,
        selector: selector(rho, m).expect("rho ≤ layers"),
    };
    (v, alpha)
}

fn set_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Checks `min over compositions == closed form` on random samples.
pub fn bound_sweep(cfg: &BoundSweep, psi_fn: PsiFn) -> SweepReport {
    let mut shapes = Vec::new();
    for k in 1..=cfg.max_k {
        for t in 1..=cfg.max_t {
            for d in k..=k + cfg.extra_d {
                for m in 0..=cfg.max_layers {
                    shapes.push((d + t, k, d, t, m));
                }
            }
        }
    }
    let parts: Vec<SweepReport> = shapes
        .par_iter()
        .enumerate()
        .map(|(i, &(n, k, d, t, m))| {
            let mut rng = set_rng(cfg.seed, i);
            let mut report = SweepReport {
                parameter_sets: 1,
                ..Default::default()
            };
            let p = random_params(&mut rng, n, k, d, t, m);
            for _ in 0..cfg.samples {
                let (v, alpha) = random_variables(&mut rng, &p, false);
                let enumerated =
                    bound_via_compositions(&p, &v, &alpha).expect("k within enumeration limit");
                let closed = max_recoverable_file_with(&p, &v, &alpha, psi_fn);
                report.checks += 1;
                if enumerated != closed {
                    report.counterexamples.push(Counterexample::new(
                        "closed_form_vs_compositions",
                        &p,
                        &v,
                        &alpha,
                        enumerated,
                        closed,
                        String::new(),
                    ));
                }
            }
            report
        })
        .collect();
    SweepReport::merge(parts)
}

fn flow_checks<R: Rng>(
    cfg: &FlowSweep,
    p: &SystemParams,
    psi_fn: PsiFn,
    rng: &mut R,
) -> Result<SweepReport, FlowError> {
    let mut report = SweepReport {
        parameter_sets: 1,
        ..Default::default()
    };
    for _ in 0..cfg.samples {
        let (v, alpha) = random_variables(rng, p, true);
        let bound = max_recoverable_file_with(p, &v, &alpha, psi_fn);

        // tightness: the best canonical collector meets the bound exactly
        let mut best: Option<(Rational, Rational, String)> = None;
        for c in compositions(p.k, p.t) {
            let (h, dc) = canonical_worst_history(p, &c)?;
            let g = build_history_graph_with_supply(p, &v, &h, &alpha, Capacity::Infinite)?;
            let flow = g.max_flow(&dc)?.value;
            let value = composition_value(p, &v, &alpha, &c);
            report.checks += 1;
            if flow > value {
                report.counterexamples.push(Counterexample::new(
                    "canonical_cut_above_composition",
                    p,
                    &v,
                    &alpha,
                    value.clone(),
                    flow.clone(),
                    format!("u0={} groups={:?}", c.u0, c.groups),
                ));
            }
            if best.as_ref().is_none_or(|(_, b, _)| value < *b) {
                best = Some((flow, value, format!("u0={} groups={:?}", c.u0, c.groups)));
            }
        }
        let (flow, value, detail) = best.expect("at least one composition");
        report.checks += 1;
        if flow != value || value != bound {
            report.counterexamples.push(Counterexample::new(
                "canonical_tightness",
                p,
                &v,
                &alpha,
                bound.clone(),
                flow,
                format!("argmin {detail}, composition value {value}"),
            ));
        }

        // soundness: no history cuts below the bound
        for _ in 0..cfg.histories {
            let rounds = rng.gen_range(0..=cfg.max_rounds);
            let h = random_history(p, rounds, rng);
            let g = build_history_graph_with_supply(p, &v, &h, &alpha, Capacity::Infinite)?;
            let cut = g.min_cut_over_collectors()?;
            report.checks += 1;
            if cut.value < bound {
                report.counterexamples.push(Counterexample::new(
                    "history_soundness",
                    p,
                    &v,
                    &alpha,
                    bound.clone(),
                    cut.value,
                    format!("{rounds} rounds {:?}, collector {:?}", h.rounds, cut.slots),
                ));
            }
        }
    }
    Ok(report)
}

/// Checks canonical-history tightness and random-history soundness of the
/// bound against exact min-cuts, with `β' ≤ β`.
pub fn flow_sweep(cfg: &FlowSweep, psi_fn: PsiFn) -> Result<SweepReport, FlowError> {
    let mut shapes = Vec::new();
    for n in 2..=cfg.max_n {
        for t in 1..=cfg.max_t.min(n - 1) {
            for d in 1..=n - t {
                for k in 1..=d.min(cfg.max_k) {
                    for m in 0..=cfg.max_layers {
                        shapes.push((n, k, d, t, m));
                    }
                }
            }
        }
    }
    let parts: Result<Vec<SweepReport>, FlowError> = shapes
        .par_iter()
        .enumerate()
        .map(|(i, &(n, k, d, t, m))| {
            let mut rng = set_rng(cfg.seed, i);
            let p = random_params(&mut rng, n, k, d, t, m);
            flow_checks(cfg, &p, psi_fn, &mut rng)
        })
        .collect();
    Ok(SweepReport::merge(parts?))
}
