//! Versioned binary engine snapshots. The layout is described in
//! `docs/snapshot-format.md`; all integers and floats are little-endian.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use txmotif_core::engine::SnapshotEdge;
use txmotif_core::{EdgeId, Engine, EngineSnapshot, MomentAccumulator, VertexId};

use crate::error::{CliError, Result};

pub const MAGIC: [u8; 8] = *b"TXMSNAP\0";
pub const VERSION: u32 = 1;

struct Out<W: Write>(W);

impl<W: Write> Out<W> {
    fn bytes(&mut self, b: &[u8]) -> io::Result<()> {
        self.0.write_all(b)
    }
    fn u8(&mut self, x: u8) -> io::Result<()> {
        self.bytes(&[x])
    }
    fn u32(&mut self, x: u32) -> io::Result<()> {
        self.bytes(&x.to_le_bytes())
    }
    fn u64(&mut self, x: u64) -> io::Result<()> {
        self.bytes(&x.to_le_bytes())
    }
    fn i64(&mut self, x: i64) -> io::Result<()> {
        self.bytes(&x.to_le_bytes())
    }
    fn f64(&mut self, x: f64) -> io::Result<()> {
        self.bytes(&x.to_le_bytes())
    }
    fn blob(&mut self, b: &[u8]) -> io::Result<()> {
        self.u32(u32::try_from(b.len()).map_err(|_| io::Error::other("blob too large"))?)?;
        self.bytes(b)
    }
}

struct In<R: Read>(R);

impl<R: Read> In<R> {
    fn array<const N: usize>(&mut self) -> io::Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b)?;
        Ok(b)
    }
    fn u8(&mut self) -> io::Result<u8> {
        Ok(self.array::<1>()?[0])
    }
    fn u32(&mut self) -> io::Result<u32> {
        self.array().map(u32::from_le_bytes)
    }
    fn u64(&mut self) -> io::Result<u64> {
        self.array().map(u64::from_le_bytes)
    }
    fn i64(&mut self) -> io::Result<i64> {
        self.array().map(i64::from_le_bytes)
    }
    fn f64(&mut self) -> io::Result<f64> {
        self.array().map(f64::from_le_bytes)
    }
    fn blob(&mut self) -> io::Result<Vec<u8>> {
        let n = self.u32()? as usize;
        let mut b = Vec::new();
        (&mut self.0).take(n as u64).read_to_end(&mut b)?;
        if b.len() != n {
            return Err(io::ErrorKind::UnexpectedEof.into());
        }
        Ok(b)
    }
    /// Element count. Callers cap preallocation at 2^20 so a corrupt count
    /// cannot force a huge allocation.
    fn count(&mut self) -> io::Result<usize> {
        let n = self.u64()?;
        usize::try_from(n).map_err(|_| io::Error::new(io::ErrorKind::InvalidData, "count overflow"))
    }
}

pub fn write_to(snap: &EngineSnapshot, w: impl Write) -> io::Result<()> {
    let mut o = Out(w);
    o.bytes(&MAGIC)?;
    o.u32(VERSION)?;
    let config = serde_json::to_vec(&snap.config).map_err(io::Error::other)?;
    o.blob(&config)?;
    o.u8(snap.fitted as u8)?;
    match snap.t_now {
        Some(t) => {
            o.u8(1)?;
            o.i64(t)?;
        }
        None => o.u8(0)?,
    }
    o.u64(snap.accounts.len() as u64)?;
    for a in &snap.accounts {
        o.blob(a.as_bytes())?;
    }
    o.u64(snap.edges.len() as u64)?;
    for e in &snap.edges {
        o.u64(e.edge_id.0)?;
        o.u32(e.source.0)?;
        o.u32(e.target.0)?;
        o.i64(e.timestamp)?;
        o.u32(e.attributes.len() as u32)?;
        for &a in &e.attributes {
            o.f64(a)?;
        }
    }
    o.u64(snap.seen.len() as u64)?;
    for id in &snap.seen {
        o.u64(id.0)?;
    }
    o.u64(snap.accumulators.len() as u64)?;
    for acc in &snap.accumulators {
        let (n, removals, parts) = acc.to_parts();
        o.u64(n)?;
        o.u32(removals)?;
        for p in parts {
            o.f64(p)?;
        }
    }
    o.0.flush()
}

pub fn read_from(r: impl Read) -> io::Result<EngineSnapshot> {
    let invalid = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut i = In(r);
    if i.array::<8>()? != MAGIC {
        return Err(invalid("not a txmotif snapshot"));
    }
    let version = i.u32()?;
    if version != VERSION {
        return Err(invalid(&format!("unsupported snapshot version {version}")));
    }
    let config = serde_json::from_slice(&i.blob()?).map_err(|e| invalid(&e.to_string()))?;
    let fitted = i.u8()? != 0;
    let t_now = match i.u8()? {
        0 => None,
        1 => Some(i.i64()?),
        _ => return Err(invalid("bad t_now tag")),
    };
    let n = i.count()?;
    let mut accounts = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        accounts.push(String::from_utf8(i.blob()?).map_err(|_| invalid("account id is not UTF-8"))?);
    }
    let n = i.count()?;
    let mut edges = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let edge_id = EdgeId(i.u64()?);
        let source = VertexId(i.u32()?);
        let target = VertexId(i.u32()?);
        let timestamp = i.i64()?;
        let k = i.u32()? as usize;
        let attributes = (0..k).map(|_| i.f64()).collect::<io::Result<_>>()?;
        edges.push(SnapshotEdge { edge_id, source, target, timestamp, attributes });
    }
    let n = i.count()?;
    let mut seen = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        seen.push(EdgeId(i.u64()?));
    }
    let n = i.count()?;
    let mut accumulators = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let count = i.u64()?;
        let removals = i.u32()?;
        let mut parts = [0.0; 8];
        for p in &mut parts {
            *p = i.f64()?;
        }
        accumulators.push(MomentAccumulator::from_parts(count, removals, parts));
    }
    let mut rest = [0u8; 1];
    if i.0.read(&mut rest)? != 0 {
        return Err(invalid("trailing bytes after snapshot"));
    }
    Ok(EngineSnapshot { config, fitted, t_now, accounts, edges, seen, accumulators })
}

pub fn save(engine: &Engine, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_to(&engine.snapshot(), BufWriter::new(file)).map_err(|e| CliError::io(path, e))
}

pub fn load(path: &Path) -> Result<Engine> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let snap = read_from(BufReader::new(file)).map_err(|e| match e.kind() {
        io::ErrorKind::InvalidData | io::ErrorKind::UnexpectedEof => {
            CliError::Data(format!("{}: corrupt state file: {e}", path.display()))
        }
        _ => CliError::io(path, e),
    })?;
    Engine::restore(snap).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}
