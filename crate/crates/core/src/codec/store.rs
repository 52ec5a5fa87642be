//! Binary store files: a fixed header followed by raw chunk symbols.
//!
//! Layout (all integers little-endian):
//! `magic[4] version:u8 kind:u8 p:u32 q:u32 poly:(q+1)×u32 n:u32 k:u32 t:u32
//! rho:u32 id:u32 chunks:u32 chunk_len:u64`, then `chunks × chunk_len`
//! symbols of one byte each for fields of order ≤ 256 and two bytes otherwise.

use super::{BaseStationStore, Chunk, Codec, CodecError, NodeStore};
use crate::gf::{Fe, Field, FieldSpec};
use std::io::{Read, Write};

pub const STORE_MAGIC: [u8; 4] = *b"BSRS";
const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreKind {
    Node,
    BaseStation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreHeader {
    pub field: FieldSpec,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub rho: usize,
    pub kind: StoreKind,
    /// Node id or base-station layer.
    pub id: usize,
    pub chunks: usize,
    pub chunk_len: usize,
}

impl StoreHeader {
    /// Rebuilds the codec the store was written by (Vandermonde generator).
    pub fn codec(&self) -> Result<Codec, CodecError> {
        Codec::new(
            self.n,
            self.k,
            self.t,
            self.rho,
            Field::from_spec(&self.field)?,
        )
    }

    /// Parameters and field agree, ignoring the per-store fields.
    pub fn same_instance(&self, other: &StoreHeader) -> bool {
        self.field == other.field
            && (self.n, self.k, self.t, self.rho, self.chunk_len)
                == (other.n, other.k, other.t, other.rho, other.chunk_len)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoredShard {
    Node(NodeStore),
    BaseStation(BaseStationStore),
}

fn symbol_width(order: u32) -> usize {
    if order <= 256 {
        1
    } else {
        2
    }
}

fn io_err(e: std::io::Error) -> CodecError {
    CodecError::MalformedStore(e.to_string())
}

fn put_u32(out: &mut impl Write, v: usize) -> Result<(), CodecError> {
    let v = u32::try_from(v).map_err(|_| CodecError::MalformedStore(format!("{v} exceeds u32")))?;
    out.write_all(&v.to_le_bytes()).map_err(io_err)
}

fn get_u32(input: &mut impl Read) -> Result<u32, CodecError> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b).map_err(io_err)?;
    Ok(u32::from_le_bytes(b))
}

/// Writes a node or base-station store of `codec`.
pub fn write_store(
    codec: &Codec,
    shard: &StoredShard,
    out: &mut impl Write,
) -> Result<(), CodecError> {
    let (kind, id, chunks): (u8, usize, &[Chunk]) = match shard {
        StoredShard::Node(s) => (0, s.id, &s.chunks),
        StoredShard::BaseStation(b) => (1, b.layer, &b.chunks),
    };
    let chunk_len = chunks.first().map_or(0, Vec::len);
    if chunks.iter().any(|c| c.len() != chunk_len) {
        return Err(CodecError::MalformedStore("chunks differ in length".into()));
    }
    let spec = codec.field().spec();
    out.write_all(&STORE_MAGIC).map_err(io_err)?;
    out.write_all(&[VERSION, kind]).map_err(io_err)?;
    put_u32(out, spec.p as usize)?;
    put_u32(out, spec.q as usize)?;
    for &c in &spec.poly {
        put_u32(out, c as usize)?;
    }
    for v in [
        codec.n(),
        codec.k(),
        codec.t(),
        codec.rho(),
        id,
        chunks.len(),
    ] {
        put_u32(out, v)?;
    }
    out.write_all(&(chunk_len as u64).to_le_bytes())
        .map_err(io_err)?;
    let width = symbol_width(codec.field().order());
    let mut buf = Vec::with_capacity(chunks.len() * chunk_len * width);
    for x in chunks.iter().flatten() {
        if width == 1 {
            buf.push(x.0 as u8);
        } else {
            buf.extend_from_slice(&x.0.to_le_bytes());
        }
    }
    out.write_all(&buf).map_err(io_err)
}

/// Reads a store written by [`write_store`]; trailing bytes are rejected.
pub fn read_store(input: &mut impl Read) -> Result<(StoreHeader, StoredShard), CodecError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(io_err)?;
    if magic != STORE_MAGIC {
        return Err(CodecError::MalformedStore("bad magic".into()));
    }
    let mut vk = [0u8; 2];
    input.read_exact(&mut vk).map_err(io_err)?;
    if vk[0] != VERSION {
        return Err(CodecError::MalformedStore(format!(
            "unsupported version {}",
            vk[0]
        )));
    }
    let kind = match vk[1] {
        0 => StoreKind::Node,
        1 => StoreKind::BaseStation,
        other => return Err(CodecError::MalformedStore(format!("unknown kind {other}"))),
    };
    let p = get_u32(input)?;
    let q = get_u32(input)?;
    if q == 0 || q > 16 {
        return Err(CodecError::MalformedStore(format!("extension degree {q}")));
    }
    let poly = (0..=q)
        .map(|_| get_u32(input))
        .collect::<Result<Vec<_>, _>>()?;
    let field = FieldSpec { p, q, poly };
    let order = Field::from_spec(&field)?.order();
    let mut fields = [0usize; 6];
    for f in fields.iter_mut() {
        *f = get_u32(input)? as usize;
    }
    let [n, k, t, rho, id, chunks] = fields;
    let mut len = [0u8; 8];
    input.read_exact(&mut len).map_err(io_err)?;
    let chunk_len = usize::try_from(u64::from_le_bytes(len))
        .map_err(|_| CodecError::MalformedStore("chunk length overflow".into()))?;
    let width = symbol_width(order);
    let total = chunks
        .checked_mul(chunk_len)
        .and_then(|x| x.checked_mul(width))
        .ok_or_else(|| CodecError::MalformedStore("size overflow".into()))?;
    let mut raw = Vec::new();
    input
        .take(total as u64 + 1)
        .read_to_end(&mut raw)
        .map_err(io_err)?;
    if raw.len() != total {
        return Err(CodecError::MalformedStore(format!(
            "expected {total} payload bytes, found {}{}",
            raw.len().min(total),
            if raw.len() > total {
                " and trailing data"
            } else {
                ""
            }
        )));
    }
    let symbols: Vec<Fe> = if width == 1 {
        raw.iter().map(|&b| Fe(b as u16)).collect()
    } else {
        raw.chunks(2)
            .map(|b| Fe(u16::from_le_bytes([b[0], b[1]])))
            .collect()
    };
    if symbols.iter().any(|x| x.0 as u32 >= order) {
        return Err(CodecError::MalformedStore(
            "symbol outside the field".into(),
        ));
    }
    let body: Vec<Chunk> = if chunk_len == 0 {
        vec![Vec::new(); chunks]
    } else {
        symbols.chunks(chunk_len).map(<[Fe]>::to_vec).collect()
    };
    let header = StoreHeader {
        field,
        n,
        k,
        t,
        rho,
        kind,
        id,
        chunks,
        chunk_len,
    };
    let shard = match kind {
        StoreKind::Node => StoredShard::Node(NodeStore { id, chunks: body }),
        StoreKind::BaseStation => StoredShard::BaseStation(BaseStationStore {
            layer: id,
            chunks: body,
        }),
    };
    Ok((header, shard))
}
