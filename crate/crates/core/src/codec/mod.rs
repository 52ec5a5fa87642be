//! Exact minimum-storage construction with `d = k` and unit base-station
//! fractions.
//!
//! The file is split into `k(t+ρ)` chunks arranged as a `(t+ρ) × k` message
//! matrix `M`. Node `j` stores column `j` of `M·G` for a `k × n` generator `G`
//! whose `k × k` column submatrices are all invertible. Base station `l`
//! holds message row `t + l` and, since `G` is public, can produce the chunk
//! `m_{t+l}ᵀ·g_j` for any node `j` it is asked about.
//!
//! Node ids and base-station layers are 1-based.

mod store;

pub use store::{read_store, write_store, StoreHeader, StoreKind, StoredShard, STORE_MAGIC};

use crate::gf::{mat_inv, vandermonde, Fe, Field, GfError, Matrix};
use crate::model::CostLedger;
use crate::numeric::{from_usize, Rational};
use std::collections::{BTreeMap, BTreeSet};

/// One chunk: a run of field symbols.
pub type Chunk = Vec<Fe>;

const LENGTH_HEADER: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("k = {k} exceeds n − t = {available}")]
    TooFewSurvivors { k: usize, available: usize },
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("n = {n} exceeds the field order {order}")]
    FieldTooSmall { n: usize, order: u32 },
    #[error("byte files need a field with at least 256 elements, got {0}")]
    FieldTooSmallForBytes(u32),
    #[error("cannot encode an empty file")]
    EmptyFile,
    #[error("generator must be {k}×{n}, got {rows}×{cols}")]
    GeneratorShape {
        k: usize,
        n: usize,
        rows: usize,
        cols: usize,
    },
    #[error("expected exactly {expected} failed nodes, got {got}")]
    WrongFailureCount { expected: usize, got: usize },
    #[error("node id {0} is out of range")]
    InvalidNodeId(usize),
    #[error("node id {0} appears more than once")]
    DuplicateId(usize),
    #[error("newcomer {newcomer} needs {needed} helpers, got {got}")]
    HelperCount {
        newcomer: usize,
        needed: usize,
        got: usize,
    },
    #[error("helper {0} is not alive")]
    HelperNotAlive(usize),
    #[error("no store available for node {0}")]
    MissingStore(usize),
    #[error("no store available for base station {0}")]
    MissingBaseStation(usize),
    #[error("need {needed} stores, got {got}")]
    NotEnoughStores { needed: usize, got: usize },
    #[error("malformed store: {0}")]
    MalformedStore(String),
    #[error("stores are inconsistent with the reconstructed file")]
    Inconsistent,
    #[error("corrupt payload: {0}")]
    CorruptPayload(String),
    #[error("need {needed} layer weights, got {got}")]
    WeightsTooShort { needed: usize, got: usize },
    #[error(transparent)]
    Gf(#[from] GfError),
}

/// Contents of node `id`: `t + ρ` chunks, entry `i` being `m_iᵀ·g_id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeStore {
    pub id: usize,
    pub chunks: Vec<Chunk>,
}

/// Contents of base station `layer`: message row `t + layer` (`k` chunks).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseStationStore {
    pub layer: usize,
    pub chunks: Vec<Chunk>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub nodes: Vec<NodeStore>,
    pub base_stations: Vec<BaseStationStore>,
    pub chunk_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferKind {
    Local,
    Coop,
    /// 1-based layer.
    Bs(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Node(usize),
    BaseStation(usize),
}

/// One chunk moved during repair.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Transfer {
    pub from: Endpoint,
    pub to: usize,
    pub kind: TransferKind,
    /// Message row the chunk belongs to (0-based).
    pub row: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseOrder {
    #[default]
    CoopThenBs,
    BsThenCoop,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct TransferCounts {
    pub local: usize,
    pub coop: usize,
    pub bs: Vec<usize>,
}

impl TransferCounts {
    pub fn total(&self) -> usize {
        self.local + self.coop + self.bs.iter().sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairSession {
    /// Failed ids in ascending order; newcomer `failed[l]` rebuilds row `l`.
    pub failed: Vec<usize>,
    /// Helper ids, aligned with `failed`.
    pub helpers: Vec<Vec<usize>>,
    pub transcript: Vec<Transfer>,
    /// Regenerated stores, aligned with `failed`.
    pub repaired: Vec<NodeStore>,
}

impl RepairSession {
    pub fn counts_for(&self, newcomer: usize, rho: usize) -> TransferCounts {
        let mut c = TransferCounts {
            bs: vec![0; rho],
            ..Default::default()
        };
        for tr in self.transcript.iter().filter(|tr| tr.to == newcomer) {
            match tr.kind {
                TransferKind::Local => c.local += 1,
                TransferKind::Coop => c.coop += 1,
                TransferKind::Bs(l) => c.bs[l - 1] += 1,
            }
        }
        c
    }
}

/// An instance of the construction for fixed `(n, k, t, ρ)` and field.
#[derive(Debug, Clone)]
pub struct Codec {
    n: usize,
    k: usize,
    t: usize,
    rho: usize,
    field: Field,
    generator: Matrix,
}

fn linear_combination(field: &Field, coeffs: &[Fe], chunks: &[&[Fe]]) -> Chunk {
    let len = chunks.first().map_or(0, |c| c.len());
    let mut out = vec![Fe(0); len];
    for (&a, chunk) in coeffs.iter().zip(chunks) {
        if a.0 == 0 {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(chunk.iter()) {
            *o = field.mul_add(*o, a, x);
        }
    }
    out
}

fn check_distinct(ids: &[usize], n: usize) -> Result<(), CodecError> {
    let mut seen = BTreeSet::new();
    for &id in ids {
        if id == 0 || id > n {
            return Err(CodecError::InvalidNodeId(id));
        }
        if !seen.insert(id) {
            return Err(CodecError::DuplicateId(id));
        }
    }
    Ok(())
}

impl Codec {
    /// Instance with the Vandermonde generator on points `0..n`.
    pub fn new(
        n: usize,
        k: usize,
        t: usize,
        rho: usize,
        field: Field,
    ) -> Result<Codec, CodecError> {
        Self::check_params(n, k, t, &field)?;
        let generator = vandermonde(&field, k, n)?;
        Ok(Codec {
            n,
            k,
            t,
            rho,
            field,
            generator,
        })
    }

    /// Instance with a caller-supplied `k × n` generator.
    pub fn with_generator(
        n: usize,
        k: usize,
        t: usize,
        rho: usize,
        field: Field,
        generator: Matrix,
    ) -> Result<Codec, CodecError> {
        Self::check_params(n, k, t, &field)?;
        if generator.rows() != k || generator.cols() != n {
            return Err(CodecError::GeneratorShape {
                k,
                n,
                rows: generator.rows(),
                cols: generator.cols(),
            });
        }
        Ok(Codec {
            n,
            k,
            t,
            rho,
            field,
            generator,
        })
    }

    fn check_params(n: usize, k: usize, t: usize, field: &Field) -> Result<(), CodecError> {
        if k == 0 || t == 0 {
            return Err(CodecError::Params("k and t must be at least 1".into()));
        }
        if t >= n || k > n - t {
            return Err(CodecError::TooFewSurvivors {
                k,
                available: n.saturating_sub(t),
            });
        }
        if n as u64 > field.order() as u64 {
            return Err(CodecError::FieldTooSmall {
                n,
                order: field.order(),
            });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn rho(&self) -> usize {
        self.rho
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    /// Rows of the message matrix.
    pub fn rows(&self) -> usize {
        self.t + self.rho
    }

    pub fn chunk_count(&self) -> usize {
        self.k * self.rows()
    }

    /// Chunk size as a fraction of the file: `1 / (k(t+ρ))`, scaled by `file_size`.
    pub fn chunk_size(&self, file_size: &Rational) -> Rational {
        file_size / from_usize(self.chunk_count())
    }

    fn node_entry(&self, row: &[Chunk], j: usize) -> Chunk {
        let coeffs = self.generator.column(j - 1);
        let refs: Vec<&[Fe]> = row.iter().map(Vec::as_slice).collect();
        linear_combination(&self.field, &coeffs, &refs)
    }

    /// Encodes a message given as `(t+ρ)` rows of `k` equal-length chunks.
    pub fn encode_message(&self, message: &[Vec<Chunk>]) -> Result<Encoded, CodecError> {
        if message.len() != self.rows() || message.iter().any(|r| r.len() != self.k) {
            return Err(CodecError::Params(format!(
                "message must be {}×{} chunks",
                self.rows(),
                self.k
            )));
        }
        let chunk_len = message[0][0].len();
        if message.iter().flatten().any(|c| c.len() != chunk_len) {
            return Err(CodecError::Params("chunks differ in length".into()));
        }
        if message
            .iter()
            .flatten()
            .flatten()
            .any(|x| x.0 as u32 >= self.field.order())
        {
            return Err(CodecError::Params("symbol outside the field".into()));
        }
        let nodes = (1..=self.n)
            .map(|j| NodeStore {
                id: j,
                chunks: message.iter().map(|row| self.node_entry(row, j)).collect(),
            })
            .collect();
        let base_stations = (1..=self.rho)
            .map(|l| BaseStationStore {
                layer: l,
                chunks: message[self.t + l - 1].clone(),
            })
            .collect();
        Ok(Encoded {
            nodes,
            base_stations,
            chunk_len,
        })
    }

    /// Encodes a byte file, one byte per symbol, behind an 8-byte
    /// little-endian length header and zero padding.
    pub fn encode(&self, file: &[u8]) -> Result<Encoded, CodecError> {
        if file.is_empty() {
            return Err(CodecError::EmptyFile);
        }
        if self.field.order() < 256 {
            return Err(CodecError::FieldTooSmallForBytes(self.field.order()));
        }
        let count = self.chunk_count();
        let raw = LENGTH_HEADER + file.len();
        let chunk_len = raw.div_ceil(count);
        let mut payload = Vec::with_capacity(chunk_len * count);
        payload.extend_from_slice(&(file.len() as u64).to_le_bytes());
        payload.extend_from_slice(file);
        payload.resize(chunk_len * count, 0);
        let message: Vec<Vec<Chunk>> = payload
            .chunks(chunk_len * self.k)
            .map(|row| {
                row.chunks(chunk_len)
                    .map(|c| c.iter().map(|&b| Fe(b as u16)).collect())
                    .collect()
            })
            .collect();
        self.encode_message(&message)
    }

    fn check_store(&self, s: &NodeStore, chunk_len: usize) -> Result<(), CodecError> {
        if s.id == 0 || s.id > self.n {
            return Err(CodecError::InvalidNodeId(s.id));
        }
        if s.chunks.len() != self.rows() || s.chunks.iter().any(|c| c.len() != chunk_len) {
            return Err(CodecError::MalformedStore(format!(
                "node {} must hold {} chunks of {} symbols",
                s.id,
                self.rows(),
                chunk_len
            )));
        }
        Ok(())
    }

    /// Decodes the message matrix from the first `k` stores; every further
    /// store is re-encoded and compared.
    pub fn collect_message(&self, stores: &[NodeStore]) -> Result<Vec<Vec<Chunk>>, CodecError> {
        if stores.len() < self.k {
            return Err(CodecError::NotEnoughStores {
                needed: self.k,
                got: stores.len(),
            });
        }
        let ids: Vec<usize> = stores.iter().map(|s| s.id).collect();
        check_distinct(&ids, self.n)?;
        let chunk_len = stores[0].chunks.first().map_or(0, Vec::len);
        for s in stores {
            self.check_store(s, chunk_len)?;
        }
        let basis = &stores[..self.k];
        let cols: Vec<usize> = basis.iter().map(|s| s.id - 1).collect();
        let inv = mat_inv(&self.field, &self.generator.select_columns(&cols))?;
        let message: Vec<Vec<Chunk>> = (0..self.rows())
            .map(|i| {
                let ys: Vec<&[Fe]> = basis.iter().map(|s| s.chunks[i].as_slice()).collect();
                (0..self.k)
                    .map(|c| linear_combination(&self.field, &inv.column(c), &ys))
                    .collect()
            })
            .collect();
        for s in &stores[self.k..] {
            for (i, row) in message.iter().enumerate() {
                if self.node_entry(row, s.id) != s.chunks[i] {
                    return Err(CodecError::Inconsistent);
                }
            }
        }
        Ok(message)
    }

    /// Reconstructs the original file from any `k` (or more) stores.
    pub fn collect(&self, stores: &[NodeStore]) -> Result<Vec<u8>, CodecError> {
        let message = self.collect_message(stores)?;
        let mut payload = Vec::new();
        for x in message.iter().flatten().flatten() {
            if x.0 > 255 {
                return Err(CodecError::CorruptPayload("symbol is not a byte".into()));
            }
            payload.push(x.0 as u8);
        }
        if payload.len() < LENGTH_HEADER {
            return Err(CodecError::CorruptPayload(
                "payload shorter than header".into(),
            ));
        }
        let mut header = [0u8; LENGTH_HEADER];
        header.copy_from_slice(&payload[..LENGTH_HEADER]);
        let len = u64::from_le_bytes(header);
        let body = &payload[LENGTH_HEADER..];
        if len == 0 || len > body.len() as u64 {
            return Err(CodecError::CorruptPayload(format!("length header {len}")));
        }
        let len = len as usize;
        if body.len() - len >= self.chunk_count() || body[len..].iter().any(|&b| b != 0) {
            return Err(CodecError::CorruptPayload("bad padding".into()));
        }
        Ok(body[..len].to_vec())
    }

    /// The first `k` surviving ids, used for every newcomer.
    pub fn default_helpers(&self, failed: &[usize]) -> Vec<Vec<usize>> {
        let alive: Vec<usize> = (1..=self.n)
            .filter(|j| !failed.contains(j))
            .take(self.k)
            .collect();
        vec![alive; failed.len()]
    }

    /// Regenerates the `t` failed nodes. `helpers[l]` lists the `k` helpers
    /// of the newcomer with the `l`-th smallest failed id.
    pub fn repair(
        &self,
        alive: &[NodeStore],
        base_stations: &[BaseStationStore],
        failed: &[usize],
        helpers: &[Vec<usize>],
        order: PhaseOrder,
    ) -> Result<RepairSession, CodecError> {
        if failed.len() != self.t {
            return Err(CodecError::WrongFailureCount {
                expected: self.t,
                got: failed.len(),
            });
        }
        check_distinct(failed, self.n)?;
        let mut failed = failed.to_vec();
        failed.sort_unstable();
        if helpers.len() != self.t {
            return Err(CodecError::Params(format!(
                "expected {} helper lists, got {}",
                self.t,
                helpers.len()
            )));
        }
        let by_id: BTreeMap<usize, &NodeStore> = alive.iter().map(|s| (s.id, s)).collect();
        let chunk_len = alive
            .first()
            .and_then(|s| s.chunks.first())
            .map_or(0, Vec::len);
        for (&j, list) in failed.iter().zip(helpers) {
            if list.len() != self.k {
                return Err(CodecError::HelperCount {
                    newcomer: j,
                    needed: self.k,
                    got: list.len(),
                });
            }
            check_distinct(list, self.n)?;
            for h in list {
                if failed.contains(h) {
                    return Err(CodecError::HelperNotAlive(*h));
                }
                let s = by_id.get(h).ok_or(CodecError::MissingStore(*h))?;
                self.check_store(s, chunk_len)?;
            }
        }
        let bs_by_layer: BTreeMap<usize, &BaseStationStore> =
            base_stations.iter().map(|b| (b.layer, b)).collect();
        for l in 1..=self.rho {
            let b = bs_by_layer
                .get(&l)
                .ok_or(CodecError::MissingBaseStation(l))?;
            if b.chunks.len() != self.k || b.chunks.iter().any(|c| c.len() != chunk_len) {
                return Err(CodecError::MalformedStore(format!(
                    "base station {l} must hold {} chunks of {chunk_len} symbols",
                    self.k
                )));
            }
        }

        let mut transcript = Vec::new();
        let mut columns: Vec<Vec<Option<Chunk>>> = vec![vec![None; self.rows()]; self.t];

        // phase 1: newcomer l rebuilds message row l from k helper chunks
        let mut rows: Vec<Vec<Chunk>> = Vec::with_capacity(self.t);
        for (l, (&j, list)) in failed.iter().zip(helpers).enumerate() {
            let cols: Vec<usize> = list.iter().map(|h| h - 1).collect();
            let inv = mat_inv(&self.field, &self.generator.select_columns(&cols))?;
            let ys: Vec<&[Fe]> = list
                .iter()
                .map(|h| {
                    transcript.push(Transfer {
                        from: Endpoint::Node(*h),
                        to: j,
                        kind: TransferKind::Local,
                        row: l,
                    });
                    by_id[h].chunks[l].as_slice()
                })
                .collect();
            let row: Vec<Chunk> = (0..self.k)
                .map(|c| linear_combination(&self.field, &inv.column(c), &ys))
                .collect();
            columns[l][l] = Some(self.node_entry(&row, j));
            rows.push(row);
        }

        let coop = |transcript: &mut Vec<Transfer>, columns: &mut Vec<Vec<Option<Chunk>>>| {
            for (l, &from) in failed.iter().enumerate() {
                for (h, &to) in failed.iter().enumerate() {
                    if h == l {
                        continue;
                    }
                    transcript.push(Transfer {
                        from: Endpoint::Node(from),
                        to,
                        kind: TransferKind::Coop,
                        row: l,
                    });
                    columns[h][l] = Some(self.node_entry(&rows[l], to));
                }
            }
        };
        let bs = |transcript: &mut Vec<Transfer>, columns: &mut Vec<Vec<Option<Chunk>>>| {
            for (h, &to) in failed.iter().enumerate() {
                for l in 1..=self.rho {
                    transcript.push(Transfer {
                        from: Endpoint::BaseStation(l),
                        to,
                        kind: TransferKind::Bs(l),
                        row: self.t + l - 1,
                    });
                    columns[h][self.t + l - 1] = Some(self.node_entry(&bs_by_layer[&l].chunks, to));
                }
            }
        };
        match order {
            PhaseOrder::CoopThenBs => {
                coop(&mut transcript, &mut columns);
                bs(&mut transcript, &mut columns);
            }
            PhaseOrder::BsThenCoop => {
                bs(&mut transcript, &mut columns);
                coop(&mut transcript, &mut columns);
            }
        }

        let repaired = failed
            .iter()
            .zip(columns)
            .map(|(&id, col)| NodeStore {
                id,
                chunks: col
                    .into_iter()
                    .map(|c| c.expect("every row is filled by one of the three phases"))
                    .collect(),
            })
            .collect();
        Ok(RepairSession {
            failed,
            helpers: helpers.to_vec(),
            transcript,
            repaired,
        })
    }

    /// Priced ledger of one newcomer; `weights` are the per-layer costs.
    pub fn newcomer_ledger(
        &self,
        session: &RepairSession,
        newcomer: usize,
        weights: &[Rational],
        file_size: &Rational,
    ) -> Result<CostLedger, CodecError> {
        if weights.len() < self.rho {
            return Err(CodecError::WeightsTooShort {
                needed: self.rho,
                got: weights.len(),
            });
        }
        let c = session.counts_for(newcomer, self.rho);
        Ok(CostLedger::priced(
            c.local,
            c.coop,
            c.bs,
            self.chunk_size(file_size),
            weights,
        ))
    }

    /// Repair cost per newcomer, averaged over the session.
    pub fn ledger_cost(
        &self,
        session: &RepairSession,
        weights: &[Rational],
        file_size: &Rational,
    ) -> Result<Rational, CodecError> {
        let mut total = Rational::from_integer(0.into());
        for &j in &session.failed {
            total += self
                .newcomer_ledger(session, j, weights, file_size)?
                .total_cost;
        }
        Ok(total / from_usize(session.failed.len()))
    }
}
