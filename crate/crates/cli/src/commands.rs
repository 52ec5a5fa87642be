//! Command bodies. Each writes its report to `out`; every number comes from
//! the core library and is only formatted here.

use crate::config::{Config, FieldConfig};
use crate::CliError;
use bsregen::bounds::PsiFn;
use bsregen::codec::{
    read_store, write_store, Codec, NodeStore, PhaseOrder, StoreKind, StoredShard, TransferCounts,
};
use bsregen::gf::Field;
use bsregen::numeric::{
    decimal_string, exact_string, fixed_string, from_usize, int, ratio, serialize_rational,
    serialize_rationals, Rational, RationalOut,
};
use bsregen::optimizer::{
    baseline_costs, min_cost_at_storage, mscr_point, optimal_points, tradeoff_curve,
};
use bsregen::simulator::{self, FailurePlan, Scenario};
use bsregen::verify::{bound_sweep, flow_sweep, BoundSweep, FlowSweep, VerifyReport};
use bsregen::{OperatingPoint, SystemParams};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

pub const DEFAULT_GRID: usize = 50;
const MANIFEST: &str = "manifest.json";

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Data(e.to_string())
}

fn dec(v: &Rational) -> String {
    decimal_string(v, 12)
}

pub const TRADEOFF_HEADER: [&str; 10] = [
    "curve",
    "alpha",
    "gamma",
    "rho",
    "beta",
    "beta_prime",
    "alpha_exact",
    "gamma_exact",
    "beta_exact",
    "beta_prime_exact",
];

fn curve_row(name: &str, pt: &OperatingPoint) -> Vec<String> {
    vec![
        name.to_string(),
        dec(&pt.alpha),
        dec(&pt.gamma),
        pt.witness.selector.rho().to_string(),
        dec(&pt.witness.beta),
        dec(&pt.witness.beta_prime),
        exact_string(&pt.alpha),
        exact_string(&pt.gamma),
        exact_string(&pt.witness.beta),
        exact_string(&pt.witness.beta_prime),
    ]
}

/// Trade-off curve rows sorted by storage; with `baseline`, the curve
/// without base stations follows at the same storage values.
pub fn tradeoff(
    config: &Config,
    grid: Option<usize>,
    baseline: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let p = config.params();
    let grid = grid.or(config.tradeoff.grid).unwrap_or(DEFAULT_GRID);
    let curve = tradeoff_curve(&p, grid).map_err(usage)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRADEOFF_HEADER).map_err(csv_err)?;
    for pt in &curve {
        w.write_record(curve_row("bs", pt)).map_err(csv_err)?;
    }
    if baseline || config.tradeoff.baseline {
        let local = p.without_layers();
        for pt in &curve {
            let base = min_cost_at_storage(&local, &pt.alpha).map_err(usage)?;
            w.write_record(curve_row("local", &base)).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct PointOut {
    #[serde(serialize_with = "serialize_rational")]
    pub alpha: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub gamma: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub beta: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub beta_prime: Rational,
    #[serde(serialize_with = "serialize_rationals")]
    pub r: Vec<Rational>,
    pub rho: usize,
}

impl From<&OperatingPoint> for PointOut {
    fn from(pt: &OperatingPoint) -> Self {
        PointOut {
            alpha: pt.alpha.clone(),
            gamma: pt.gamma.clone(),
            beta: pt.witness.beta.clone(),
            beta_prime: pt.witness.beta_prime.clone(),
            r: pt.witness.r.clone(),
            rho: pt.witness.selector.rho(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PointsOut {
    pub mscr: PointOut,
    pub mbccr: PointOut,
    pub rho_mscr: usize,
    pub rho_mbccr: usize,
}

pub fn points(config: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    let pts = optimal_points(&config.params()).map_err(usage)?;
    let report = PointsOut {
        mscr: (&pts.mscr).into(),
        mbccr: (&pts.mbccr).into(),
        rho_mscr: pts.rho_mscr,
        rho_mbccr: pts.rho_mbccr,
    };
    serde_json::to_writer_pretty(&mut *out, &report).map_err(data)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct VerifyOut<'a> {
    seed: u64,
    exhaustive: bool,
    passed: bool,
    #[serde(flatten)]
    report: &'a VerifyReport,
}

/// Sweep configurations after applying presets and config overrides.
pub fn sweep_configs(config: &Config, seed: u64, exhaustive: bool) -> (BoundSweep, FlowSweep) {
    let (mut b, mut f) = if exhaustive {
        (BoundSweep::exhaustive(seed), FlowSweep::exhaustive(seed))
    } else {
        (
            BoundSweep {
                seed,
                ..Default::default()
            },
            FlowSweep {
                seed,
                ..Default::default()
            },
        )
    };
    let c = &config.verify.bounds;
    b.max_k = c.max_k.unwrap_or(b.max_k);
    b.max_t = c.max_t.unwrap_or(b.max_t);
    b.max_layers = c.max_layers.unwrap_or(b.max_layers);
    b.extra_d = c.extra_d.unwrap_or(b.extra_d);
    b.samples = c.samples.unwrap_or(b.samples);
    let c = &config.verify.flow;
    f.max_n = c.max_n.unwrap_or(f.max_n);
    f.max_k = c.max_k.unwrap_or(f.max_k);
    f.max_t = c.max_t.unwrap_or(f.max_t);
    f.max_layers = c.max_layers.unwrap_or(f.max_layers);
    f.samples = c.samples.unwrap_or(f.samples);
    f.histories = c.histories.unwrap_or(f.histories);
    f.max_rounds = c.max_rounds.unwrap_or(f.max_rounds);
    (b, f)
}

/// Runs both sweeps with the given `ψ`; counterexamples yield
/// [`CliError::Verification`] after the report is written.
pub fn verify(
    config: &Config,
    seed: u64,
    exhaustive: bool,
    psi_fn: PsiFn,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (b, f) = sweep_configs(config, seed, exhaustive);
    if b.max_k > bsregen::bounds::MAX_ENUMERATION_K {
        return Err(usage(format!(
            "bounds sweep limited to k ≤ {}",
            bsregen::bounds::MAX_ENUMERATION_K
        )));
    }
    if f.max_n > 8 {
        return Err(usage("flow sweep limited to n ≤ 8"));
    }
    let report = VerifyReport {
        bounds: bound_sweep(&b, psi_fn),
        flow: flow_sweep(&f, psi_fn).map_err(data)?,
    };
    let passed = report.passed();
    serde_json::to_writer_pretty(
        &mut *out,
        &VerifyOut {
            seed,
            exhaustive,
            passed,
            report: &report,
        },
    )
    .map_err(data)?;
    writeln!(out)?;
    out.flush()?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "{} counterexample(s)",
            report.bounds.counterexamples.len() + report.flow.counterexamples.len()
        )))
    }
}

fn field(cfg: &Option<FieldConfig>) -> Result<Field, CliError> {
    match cfg {
        Some(f) => Field::new(f.p, f.q, f.poly.clone()).map_err(usage),
        None => Ok(Field::gf256()),
    }
}

#[derive(Debug, Serialize, serde::Deserialize)]
struct Manifest {
    file_len: u64,
    n: usize,
    k: usize,
    t: usize,
    rho: usize,
}

fn node_path(dir: &Path, id: usize) -> std::path::PathBuf {
    dir.join(format!("node_{id}.bin"))
}

fn bs_path(dir: &Path, layer: usize) -> std::path::PathBuf {
    dir.join(format!("bs_{layer}.bin"))
}

fn save(codec: &Codec, shard: &StoredShard, path: &Path) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_store(codec, shard, &mut buf).map_err(data)?;
    fs::write(path, buf).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<(bsregen::codec::StoreHeader, StoredShard), CliError> {
    let bytes = fs::read(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    read_store(&mut bytes.as_slice()).map_err(|e| data(format!("{}: {e}", path.display())))
}

#[derive(Debug, Serialize)]
struct EncodeOut {
    file_len: u64,
    chunks: usize,
    chunk_bytes: usize,
    node_files: Vec<String>,
    bs_files: Vec<String>,
}

pub fn codec_encode(
    config: &Config,
    input: &Path,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let c = &config.codec;
    let codec = Codec::new(c.n, c.k, c.t, c.rho, field(&c.field)?).map_err(usage)?;
    let file = fs::read(input).map_err(|e| data(format!("{}: {e}", input.display())))?;
    let enc = codec.encode(&file).map_err(data)?;
    fs::create_dir_all(dir).map_err(|e| data(format!("{}: {e}", dir.display())))?;
    let mut node_files = Vec::new();
    for s in &enc.nodes {
        let path = node_path(dir, s.id);
        save(&codec, &StoredShard::Node(s.clone()), &path)?;
        node_files.push(path.display().to_string());
    }
    let mut bs_files = Vec::new();
    for b in &enc.base_stations {
        let path = bs_path(dir, b.layer);
        save(&codec, &StoredShard::BaseStation(b.clone()), &path)?;
        bs_files.push(path.display().to_string());
    }
    let manifest = Manifest {
        file_len: file.len() as u64,
        n: c.n,
        k: c.k,
        t: c.t,
        rho: c.rho,
    };
    fs::write(
        dir.join(MANIFEST),
        serde_json::to_vec_pretty(&manifest).map_err(data)?,
    )?;
    let report = EncodeOut {
        file_len: manifest.file_len,
        chunks: codec.chunk_count(),
        chunk_bytes: enc.chunk_len,
        node_files,
        bs_files,
    };
    serde_json::to_writer_pretty(&mut *out, &report).map_err(data)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct NewcomerLedgerOut {
    pub id: usize,
    pub helpers: Vec<usize>,
    pub transfers: TransferCounts,
    pub chunk_size: RationalOut,
    pub data_moved: RationalOut,
    pub cost: RationalOut,
    pub bytes_moved: usize,
}

#[derive(Debug, Serialize)]
pub struct RepairOut {
    pub failed: Vec<usize>,
    pub phase_order: &'static str,
    pub file_size: RationalOut,
    pub newcomers: Vec<NewcomerLedgerOut>,
    pub per_newcomer_cost: RationalOut,
    pub mscr_gamma: RationalOut,
    pub matches_mscr: bool,
    pub written: Vec<String>,
}

/// Loads every store in `dir`, skipping the failed node ids.
fn load_dir(
    dir: &Path,
    skip: &[usize],
) -> Result<(Codec, Vec<NodeStore>, Vec<bsregen::codec::BaseStationStore>), CliError> {
    let mut header: Option<bsregen::codec::StoreHeader> = None;
    let mut nodes = BTreeMap::new();
    let mut bs = BTreeMap::new();
    let mut entries: Vec<_> = fs::read_dir(dir)
        .map_err(|e| data(format!("{}: {e}", dir.display())))?
        .collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let name = entry.file_name().to_string_lossy().to_string();
        if !name.ends_with(".bin") {
            continue;
        }
        let (h, shard) = load(&entry.path())?;
        if h.kind == StoreKind::Node && skip.contains(&h.id) {
            continue;
        }
        match &header {
            Some(first) if !first.same_instance(&h) => {
                return Err(data(format!("{name} belongs to a different encoding")));
            }
            None => header = Some(h.clone()),
            _ => {}
        }
        match shard {
            StoredShard::Node(s) => {
                nodes.insert(s.id, s);
            }
            StoredShard::BaseStation(b) => {
                bs.insert(b.layer, b);
            }
        }
    }
    let header = header.ok_or_else(|| data(format!("no stores in {}", dir.display())))?;
    let codec = header.codec().map_err(data)?;
    Ok((
        codec,
        nodes.into_values().collect(),
        bs.into_values().collect(),
    ))
}

pub fn codec_repair(
    config: &Config,
    dir: &Path,
    failed: &[usize],
    bs_first: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (codec, alive, bs) = load_dir(dir, failed)?;
    let manifest: Manifest = serde_json::from_slice(
        &fs::read(dir.join(MANIFEST)).map_err(|e| data(format!("{MANIFEST}: {e}")))?,
    )
    .map_err(data)?;
    let file_size = match &config.codec.file_size {
        Some(f) => f.0.clone(),
        None => ratio(manifest.file_len as i64, 1_000_000),
    };
    let weights = config.codec.weights();
    let order = if bs_first {
        PhaseOrder::BsThenCoop
    } else {
        PhaseOrder::CoopThenBs
    };
    let mut sorted = failed.to_vec();
    sorted.sort_unstable();
    let helpers = codec.default_helpers(&sorted);
    let session = codec
        .repair(&alive, &bs, failed, &helpers, order)
        .map_err(data)?;
    let chunk_bytes = alive
        .first()
        .and_then(|s| s.chunks.first())
        .map_or(0, Vec::len);
    let mut newcomers = Vec::new();
    for (l, &id) in session.failed.iter().enumerate() {
        let ledger = codec
            .newcomer_ledger(&session, id, &weights, &file_size)
            .map_err(usage)?;
        let transfers = session.counts_for(id, codec.rho());
        newcomers.push(NewcomerLedgerOut {
            id,
            helpers: session.helpers[l].clone(),
            bytes_moved: transfers.total() * chunk_bytes,
            transfers,
            chunk_size: (&ledger.symbol_size).into(),
            data_moved: (&ledger.data_moved()).into(),
            cost: (&ledger.total_cost).into(),
        });
    }
    let per_newcomer = codec
        .ledger_cost(&session, &weights, &file_size)
        .map_err(usage)?;
    let p = SystemParams {
        n: codec.n(),
        k: codec.k(),
        d: codec.k(),
        t: codec.t(),
        weights: weights[..codec.rho()].to_vec(),
        capacities: vec![int(1); codec.rho()],
        file_size: file_size.clone(),
    };
    let mscr = mscr_point(&p, &vec![int(1); codec.rho()], codec.rho()).map_err(usage)?;
    let mut written = Vec::new();
    for s in &session.repaired {
        let path = node_path(dir, s.id);
        save(&codec, &StoredShard::Node(s.clone()), &path)?;
        written.push(path.display().to_string());
    }
    let report = RepairOut {
        failed: session.failed.clone(),
        phase_order: if bs_first {
            "bs_then_coop"
        } else {
            "coop_then_bs"
        },
        file_size: (&file_size).into(),
        newcomers,
        matches_mscr: per_newcomer == mscr.gamma,
        per_newcomer_cost: (&per_newcomer).into(),
        mscr_gamma: (&mscr.gamma).into(),
        written,
    };
    serde_json::to_writer_pretty(&mut *out, &report).map_err(data)?;
    writeln!(out)?;
    Ok(())
}

pub fn codec_collect(dir: &Path, ids: &[usize], output: &Path) -> Result<(), CliError> {
    let mut stores = Vec::new();
    let mut codec: Option<(bsregen::codec::StoreHeader, Codec)> = None;
    for &id in ids {
        let (h, shard) = load(&node_path(dir, id))?;
        let StoredShard::Node(s) = shard else {
            return Err(data(format!("node_{id}.bin is not a node store")));
        };
        match &codec {
            Some((first, _)) if !first.same_instance(&h) => {
                return Err(data(format!("node {id} belongs to a different encoding")))
            }
            None => {
                let c = h.codec().map_err(data)?;
                codec = Some((h, c));
            }
            _ => {}
        }
        stores.push(s);
    }
    let (_, codec) = codec.ok_or_else(|| usage("no nodes given"))?;
    let file = codec.collect(&stores).map_err(data)?;
    fs::write(output, file).map_err(|e| data(format!("{}: {e}", output.display())))
}

struct Table1Row {
    name: String,
    costs: [Rational; 4],
}

fn default_table1() -> Vec<(String, Vec<Rational>, Rational, Vec<Rational>)> {
    vec![
        (
            "scenario1".into(),
            vec![ratio(11, 10), ratio(17, 10)],
            ratio(1, 2),
            vec![int(1), int(1)],
        ),
        (
            "scenario2".into(),
            vec![ratio(13, 10), ratio(21, 10)],
            ratio(2, 3),
            vec![int(1), int(0)],
        ),
    ]
}

fn table1_rows(config: &Config) -> Result<Vec<Table1Row>, CliError> {
    let base =
        |weights: Vec<Rational>, caps: Option<Vec<Rational>>, f: Option<Rational>| SystemParams {
            n: 4,
            k: 2,
            d: 2,
            t: 2,
            capacities: caps.unwrap_or_else(|| vec![int(1); weights.len()]),
            weights,
            file_size: f.unwrap_or_else(|| int(4)),
        };
    let specs: Vec<(String, SystemParams, Rational, Vec<Rational>)> = match &config.table1.scenarios
    {
        None => default_table1()
            .into_iter()
            .map(|(name, w, beta, r)| (name, base(w, None, None), beta, r))
            .collect(),
        Some(list) => list
            .iter()
            .map(|s| {
                let nums =
                    |v: &[crate::config::Num]| v.iter().map(|x| x.0.clone()).collect::<Vec<_>>();
                (
                    s.name.clone(),
                    base(
                        nums(&s.weights),
                        s.capacities.as_deref().map(nums),
                        s.file_size.as_ref().map(|f| f.0.clone()),
                    ),
                    s.beta.0.clone(),
                    nums(&s.r),
                )
            })
            .collect(),
    };
    specs
        .into_iter()
        .map(|(name, p, beta, r)| {
            let c = baseline_costs(&p, &beta, &r).map_err(|e| usage(format!("{name}: {e}")))?;
            Ok(Table1Row {
                name,
                costs: [c.no_coop_local, c.coop_local, c.coop_layer, c.full_layer],
            })
        })
        .collect()
}

/// Reference scheme costs; three-decimal values followed by exact ones.
pub fn table1(config: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = table1_rows(config)?;
    let mut w = csv::Writer::from_writer(out);
    let names = ["no_coop_local", "coop_local", "coop_layer", "full_layer"];
    let mut header = vec!["scenario".to_string()];
    header.extend(names.iter().map(|s| s.to_string()));
    header.extend(names.iter().map(|s| format!("{s}_exact")));
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        let mut rec = vec![row.name];
        rec.extend(row.costs.iter().map(|c| fixed_string(c, 3)));
        rec.extend(row.costs.iter().map(exact_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Builds the simulator scenario described by the config.
pub fn scenario(config: &Config, seed: u64) -> Result<Scenario, CliError> {
    let s = &config.simulate;
    let field = match &s.field {
        Some(f) => f.to_spec().map_err(usage)?,
        None => Field::gf256().spec().clone(),
    };
    let weights = s
        .weights
        .as_ref()
        .map(|v| v.iter().map(|x| x.0.clone()).collect())
        .unwrap_or_else(|| vec![ratio(13, 10), ratio(21, 10)]);
    let plan = match &s.script {
        Some(script) => FailurePlan::Scripted(script.clone()),
        None => FailurePlan::Random {
            rounds: s.rounds,
            departure_rate: s.departure_rate.unwrap_or(0.4),
        },
    };
    Ok(Scenario {
        n: s.n,
        k: s.k,
        t: s.t,
        rho: s.rho,
        field,
        weights,
        file_size: s
            .file_size
            .as_ref()
            .map_or_else(|| from_usize(1), |f| f.0.clone()),
        file_len: s.file_len,
        seed,
        plan,
        verify_every: s.verify_every,
    })
}

#[derive(Debug, Serialize)]
struct SimHeader<'a> {
    seed: u64,
    n: usize,
    k: usize,
    t: usize,
    rho: usize,
    rounds: usize,
    #[serde(serialize_with = "serialize_rationals")]
    weights: &'a [Rational],
    #[serde(serialize_with = "serialize_rational")]
    file_size: &'a Rational,
    #[serde(serialize_with = "serialize_rational")]
    stationary_newcomer_cost: Rational,
}

#[derive(Debug, Serialize)]
struct SimSummary<'a> {
    outcome: &'a simulator::Outcome,
    #[serde(serialize_with = "serialize_rational")]
    total_cost: &'a Rational,
    local_symbols: usize,
    coop_symbols: usize,
    bs_symbols: &'a [usize],
    alive: Vec<usize>,
    pending: Vec<usize>,
}

/// JSON lines: a header with the seed, one record per round, a summary.
pub fn simulate(config: &Config, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    let s = scenario(config, seed)?;
    let trace = simulator::run(&s).map_err(|e| match e {
        simulator::SimError::InvalidScenario(m) => CliError::Usage(m),
        simulator::SimError::Codec(c) => data(c),
    })?;
    let header = SimHeader {
        seed,
        n: s.n,
        k: s.k,
        t: s.t,
        rho: s.rho,
        rounds: s.rounds(),
        weights: &s.weights,
        file_size: &s.file_size,
        stationary_newcomer_cost: simulator::stationary_newcomer_cost(&s),
    };
    serde_json::to_writer(&mut *out, &header).map_err(data)?;
    writeln!(out)?;
    for r in &trace.records {
        serde_json::to_writer(&mut *out, r).map_err(data)?;
        writeln!(out)?;
    }
    let ledger = trace.state.ledger();
    let summary = SimSummary {
        outcome: &trace.outcome,
        total_cost: &ledger.total_cost,
        local_symbols: ledger.local_symbols,
        coop_symbols: ledger.coop_symbols,
        bs_symbols: &ledger.bs_symbols,
        alive: trace.state.alive_ids(),
        pending: trace.state.pending(),
    };
    serde_json::to_writer(&mut *out, &summary).map_err(data)?;
    writeln!(out)?;
    Ok(())
}
