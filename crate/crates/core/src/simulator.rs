//! Lazy-repair lifecycles: departures accumulate until `t` nodes are
//! missing, then the codec repairs them jointly.

use crate::codec::{BaseStationStore, Codec, CodecError, NodeStore, PhaseOrder, TransferCounts};
use crate::flowgraph::k_subsets;
use crate::gf::{Field, FieldSpec};
use crate::model::CostLedger;
use crate::numeric::{from_usize, serialize_rational, Rational};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Largest `n` for which durability checks try every `k`-subset.
pub const EXHAUSTIVE_DURABILITY_N: usize = 6;
const SAMPLED_SUBSETS: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FailurePlan {
    /// Node ids departing in each round.
    Scripted(Vec<Vec<usize>>),
    /// Each live node departs with probability `departure_rate` per round.
    Random { rounds: usize, departure_rate: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub rho: usize,
    pub field: FieldSpec,
    pub weights: Vec<Rational>,
    /// File size in cost units; chunk costs are fractions of it.
    pub file_size: Rational,
    /// Length of the random payload that is encoded.
    pub file_len: usize,
    pub seed: u64,
    pub plan: FailurePlan,
    /// Check durability every this many rounds; 0 disables the check.
    pub verify_every: usize,
}

impl Scenario {
    pub fn rounds(&self) -> usize {
        match &self.plan {
            FailurePlan::Scripted(s) => s.len(),
            FailurePlan::Random { rounds, .. } => *rounds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewcomerRecord {
    pub id: usize,
    pub helpers: Vec<usize>,
    pub transfers: TransferCounts,
    #[serde(serialize_with = "serialize_rational")]
    pub cost: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub departed: Vec<usize>,
    pub newcomers: Vec<NewcomerRecord>,
    pub pending: Vec<usize>,
    #[serde(serialize_with = "serialize_rational")]
    pub round_cost: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub cumulative_cost: Rational,
    pub durable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    ClusterDeath { round: usize, alive: usize },
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub records: Vec<RoundRecord>,
    pub outcome: Outcome,
    pub state: ClusterState,
}

#[derive(Debug, Clone)]
pub struct ClusterState {
    codec: Codec,
    alive: BTreeMap<usize, NodeStore>,
    base_stations: Vec<BaseStationStore>,
    pending: BTreeSet<usize>,
    round: usize,
    ledger: CostLedger,
    original: Vec<u8>,
    seed: u64,
}

impl ClusterState {
    /// Encodes `file` and places every store.
    pub fn new(
        codec: Codec,
        file: Vec<u8>,
        file_size: &Rational,
        seed: u64,
    ) -> Result<Self, SimError> {
        let enc = codec.encode(&file)?;
        let ledger = CostLedger {
            local_symbols: 0,
            coop_symbols: 0,
            bs_symbols: vec![0; codec.rho()],
            symbol_size: codec.chunk_size(file_size),
            total_cost: Rational::zero(),
        };
        Ok(ClusterState {
            alive: enc.nodes.into_iter().map(|s| (s.id, s)).collect(),
            base_stations: enc.base_stations,
            pending: BTreeSet::new(),
            round: 0,
            ledger,
            original: file,
            seed,
            codec,
        })
    }

    pub fn codec(&self) -> &Codec {
        &self.codec
    }

    pub fn alive_ids(&self) -> Vec<usize> {
        self.alive.keys().copied().collect()
    }

    pub fn pending(&self) -> Vec<usize> {
        self.pending.iter().copied().collect()
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Cumulative transfer counts and cost.
    pub fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    pub fn store(&self, id: usize) -> Option<&NodeStore> {
        self.alive.get(&id)
    }

    pub fn store_mut(&mut self, id: usize) -> Option<&mut NodeStore> {
        self.alive.get_mut(&id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// True iff every checked `k`-subset of live nodes reconstructs the original
/// file: all subsets when `n ≤ 6`, otherwise a seeded sample.
pub fn verify_durability(state: &ClusterState) -> bool {
    let ids = state.alive_ids();
    let k = state.codec.k();
    if ids.len() < k {
        return false;
    }
    let subsets: Vec<Vec<usize>> = if state.codec.n() <= EXHAUSTIVE_DURABILITY_N {
        k_subsets(ids.len(), k)
            .into_iter()
            .map(|s| s.into_iter().map(|i| ids[i - 1]).collect())
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(state.seed ^ 0x5eed);
        rng.set_stream(state.round as u64);
        (0..SAMPLED_SUBSETS)
            .map(|_| ids.choose_multiple(&mut rng, k).copied().collect())
            .collect()
    };
    subsets.iter().all(|s| {
        let stores: Vec<NodeStore> = s.iter().map(|j| state.alive[j].clone()).collect();
        state
            .codec
            .collect(&stores)
            .is_ok_and(|f| f == state.original)
    })
}

fn add_counts(ledger: &mut CostLedger, c: &TransferCounts, cost: &Rational) {
    ledger.local_symbols += c.local;
    ledger.coop_symbols += c.coop;
    for (acc, x) in ledger.bs_symbols.iter_mut().zip(&c.bs) {
        *acc += x;
    }
    ledger.total_cost += cost;
}

fn validate(s: &Scenario) -> Result<(), SimError> {
    let bad = |m: String| Err(SimError::InvalidScenario(m));
    if s.weights.len() < s.rho {
        return bad(format!("{} weights for rho = {}", s.weights.len(), s.rho));
    }
    if s.file_len == 0 {
        return bad("file_len must be positive".into());
    }
    if s.file_size <= Rational::zero() {
        return bad("file_size must be positive".into());
    }
    if let FailurePlan::Random { departure_rate, .. } = s.plan {
        if !(0.0..=1.0).contains(&departure_rate) {
            return bad(format!("departure rate {departure_rate} outside [0, 1]"));
        }
    }
    Ok(())
}

/// Runs `s` to completion or cluster death.
pub fn run(s: &Scenario) -> Result<Trace, SimError> {
    validate(s)?;
    let codec = Codec::new(
        s.n,
        s.k,
        s.t,
        s.rho,
        Field::from_spec(&s.field).map_err(CodecError::from)?,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let file: Vec<u8> = (0..s.file_len).map(|_| rng.gen()).collect();
    let mut state = ClusterState::new(codec, file, &s.file_size, s.seed)?;
    let mut records = Vec::new();

    for round in 1..=s.rounds() {
        state.round = round;
        let departed: Vec<usize> = match &s.plan {
            FailurePlan::Scripted(script) => {
                let ids = &script[round - 1];
                let mut seen = BTreeSet::new();
                for id in ids {
                    if !state.alive.contains_key(id) || !seen.insert(*id) {
                        return Err(SimError::InvalidScenario(format!(
                            "round {round}: node {id} is not alive"
                        )));
                    }
                }
                ids.clone()
            }
            FailurePlan::Random { departure_rate, .. } => {
                let mut candidates = state.alive_ids();
                candidates.shuffle(&mut rng);
                let room = s.t - state.pending.len();
                candidates
                    .into_iter()
                    .filter(|_| rng.gen_bool(*departure_rate))
                    .take(room)
                    .collect()
            }
        };
        for id in &departed {
            state.alive.remove(id);
            state.pending.insert(*id);
        }

        let mut newcomers = Vec::new();
        let mut round_cost = Rational::zero();
        while state.pending.len() >= s.t {
            if state.alive.len() < s.k {
                records.push(RoundRecord {
                    round,
                    departed,
                    newcomers,
                    pending: state.pending(),
                    round_cost,
                    cumulative_cost: state.ledger.total_cost.clone(),
                    durable: Some(false),
                });
                let alive = state.alive.len();
                return Ok(Trace {
                    records,
                    outcome: Outcome::ClusterDeath { round, alive },
                    state,
                });
            }
            let failed: Vec<usize> = state.pending.iter().take(s.t).copied().collect();
            let helpers = match s.plan {
                FailurePlan::Scripted(_) => state.codec.default_helpers(&failed),
                FailurePlan::Random { .. } => {
                    let alive = state.alive_ids();
                    (0..s.t)
                        .map(|_| {
                            let mut h: Vec<usize> =
                                alive.choose_multiple(&mut rng, s.k).copied().collect();
                            h.sort_unstable();
                            h
                        })
                        .collect()
                }
            };
            let stores: Vec<NodeStore> = state.alive.values().cloned().collect();
            let session = state.codec.repair(
                &stores,
                &state.base_stations,
                &failed,
                &helpers,
                PhaseOrder::CoopThenBs,
            )?;
            for (l, &id) in session.failed.iter().enumerate() {
                let ledger = state
                    .codec
                    .newcomer_ledger(&session, id, &s.weights, &s.file_size)?;
                let transfers = session.counts_for(id, s.rho);
                add_counts(&mut state.ledger, &transfers, &ledger.total_cost);
                round_cost += &ledger.total_cost;
                newcomers.push(NewcomerRecord {
                    id,
                    helpers: session.helpers[l].clone(),
                    transfers,
                    cost: ledger.total_cost,
                });
            }
            for store in session.repaired {
                state.pending.remove(&store.id);
                state.alive.insert(store.id, store);
            }
        }

        let durable =
            (s.verify_every > 0 && round % s.verify_every == 0).then(|| verify_durability(&state));
        records.push(RoundRecord {
            round,
            departed,
            newcomers,
            pending: state.pending(),
            round_cost,
            cumulative_cost: state.ledger.total_cost.clone(),
            durable,
        });
    }
    Ok(Trace {
        records,
        outcome: Outcome::Completed,
        state,
    })
}

/// Per-newcomer cost of the construction with unit base-station fractions:
/// `F(k + t − 1 + Σ_{l≤ρ} w_l) / (k(t+ρ))`.
pub fn stationary_newcomer_cost(s: &Scenario) -> Rational {
    let units = from_usize(s.k + s.t - 1) + s.weights.iter().take(s.rho).cloned().sum::<Rational>();
    &s.file_size * units / from_usize(s.k * (s.t + s.rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::Codec;
    use crate::numeric::{int, ratio};

    fn gf256() -> FieldSpec {
        Field::gf256().spec().clone()
    }

    fn scripted(plan: Vec<Vec<usize>>) -> Scenario {
        Scenario {
            n: 4,
            k: 2,
            t: 2,
            rho: 2,
            field: gf256(),
            weights: vec![ratio(11, 10), ratio(17, 10)],
            file_size: int(4),
            file_len: 64,
            seed: 1,
            plan: FailurePlan::Scripted(plan),
            verify_every: 1,
        }
    }

    #[test]
    fn scripted_round_costs() {
        let trace = run(&scripted(vec![vec![2, 4]])).unwrap();
        assert_eq!(trace.outcome, Outcome::Completed);
        let r = &trace.records[0];
        assert_eq!(r.round_cost, ratio(29, 5));
        assert_eq!(
            r.newcomers.iter().map(|n| n.id).collect::<Vec<_>>(),
            vec![2, 4]
        );
        assert!(r.newcomers.iter().all(|n| n.cost == ratio(29, 10)));
        assert_eq!(r.durable, Some(true));
        assert_eq!(trace.state.ledger().total_cost, ratio(29, 5));
        assert_eq!(trace.state.ledger().total_symbols(), 2 * 5);
    }

    #[test]
    fn zero_rounds() {
        let trace = run(&scripted(vec![])).unwrap();
        assert!(trace.records.is_empty());
        assert_eq!(trace.state.ledger().total_cost, int(0));
    }

    #[test]
    fn lazy_accumulation_defers_cost() {
        let trace = run(&scripted(vec![vec![1], vec![3], vec![]])).unwrap();
        assert_eq!(trace.records[0].round_cost, int(0));
        assert_eq!(trace.records[0].pending, vec![1]);
        assert_eq!(trace.records[1].newcomers.len(), 2);
        assert!(trace.records[1].pending.is_empty());
        assert!(trace.records.iter().all(|r| r.durable == Some(true)));
    }

    #[test]
    fn cluster_death_is_reported() {
        let trace = run(&scripted(vec![vec![1, 2, 3]])).unwrap();
        assert_eq!(trace.outcome, Outcome::ClusterDeath { round: 1, alive: 1 });
    }

    #[test]
    fn scripted_ids_must_be_alive() {
        assert!(matches!(
            run(&scripted(vec![vec![5]])),
            Err(SimError::InvalidScenario(_))
        ));
        assert!(matches!(
            run(&scripted(vec![vec![1, 1]])),
            Err(SimError::InvalidScenario(_))
        ));
    }

    fn random(seed: u64) -> Scenario {
        Scenario {
            n: 6,
            k: 2,
            t: 2,
            rho: 1,
            field: gf256(),
            weights: vec![ratio(13, 10)],
            file_size: int(1),
            file_len: 200,
            seed,
            plan: FailurePlan::Random {
                rounds: 20,
                departure_rate: 0.4,
            },
            verify_every: 1,
        }
    }

    #[test]
    fn seeded_rounds_are_stationary_and_durable() {
        let s = random(7);
        let trace = run(&s).unwrap();
        assert_eq!(trace.records.len(), 20);
        let expected = stationary_newcomer_cost(&s);
        assert_eq!(expected, ratio(43, 60));
        let mut repairs = 0;
        for r in &trace.records {
            assert_eq!(r.durable, Some(true));
            for nc in &r.newcomers {
                assert_eq!(nc.cost, expected);
                repairs += 1;
            }
        }
        assert!(repairs >= 4);
    }

    #[test]
    fn runs_are_deterministic() {
        let a = run(&random(3)).unwrap();
        let b = run(&random(3)).unwrap();
        assert_eq!(a.records, b.records);
        assert_ne!(a.records, run(&random(4)).unwrap().records);
    }

    #[test]
    fn durability_detects_tampering() {
        let codec = Codec::new(5, 2, 2, 1, Field::gf256()).unwrap();
        let mut state = ClusterState::new(codec, b"durable payload".to_vec(), &int(1), 0).unwrap();
        assert!(verify_durability(&state));
        let s = state.store_mut(3).unwrap();
        s.chunks[1][0].0 ^= 0x40;
        assert!(!verify_durability(&state));
    }

    #[test]
    fn sampled_durability_for_larger_clusters() {
        let mut s = random(5);
        s.n = 9;
        s.k = 4;
        s.t = 3;
        s.rho = 1;
        let trace = run(&s).unwrap();
        assert!(trace.records.iter().all(|r| r.durable == Some(true)));
    }

    #[test]
    fn rejects_bad_scenarios() {
        let mut s = random(1);
        s.weights.clear();
        assert!(matches!(run(&s), Err(SimError::InvalidScenario(_))));
        let mut s = random(1);
        s.plan = FailurePlan::Random {
            rounds: 1,
            departure_rate: 1.5,
        };
        assert!(matches!(run(&s), Err(SimError::InvalidScenario(_))));
        let mut s = random(1);
        s.k = 5;
        assert!(matches!(
            run(&s),
            Err(SimError::Codec(CodecError::TooFewSurvivors { .. }))
        ));
    }
}
