//! NSFLOW1 reader and writer.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::flowfield::flow::SampledFlow;
use crate::flowfield::grid::GridSpec;

pub const MAGIC: &str = "NSFLOW1";

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\n', "\\n")
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut it = s.chars();
    while let Some(c) = it.next() {
        if c == '\\' {
            match it.next() {
                Some('n') => out.push('\n'),
                Some(o) => out.push(o),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

pub fn write_flow<W: Write>(flow: &SampledFlow, mut w: W) -> Result<()> {
    let g = flow.grid();
    let mut fields = vec!["velocity"];
    if flow.has_pressure() {
        fields.push("pressure");
    }
    if flow.has_force() {
        fields.push("force");
    }
    write!(
        w,
        "magic={MAGIC}\nn={}\nbox_length={:?}\nn_times={}\nt0={:?}\nt1={:?}\nfields={}\nbyte_order=little\nmetadata={}\n\n",
        g.n,
        g.box_length,
        g.n_times,
        g.t0,
        g.t1,
        fields.join(","),
        escape(flow.metadata())
    )?;
    let mut put = |data: &[f64]| -> Result<()> {
        let mut buf = Vec::with_capacity(8 * 4096);
        for chunk in data.chunks(4096) {
            buf.clear();
            for v in chunk {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    };
    put(flow.velocity())?;
    if let Some(p) = flow.pressure() {
        put(p)?;
    }
    if let Some(f) = flow.force() {
        put(f)?;
    }
    Ok(())
}

pub fn save_flow(flow: &SampledFlow, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_flow(flow, &mut w)?;
    w.flush()?;
    Ok(())
}

fn parse<T: std::str::FromStr>(key: &str, v: Option<&String>) -> Result<T> {
    let v = v.ok_or_else(|| Error::MalformedHeader(format!("missing key `{key}`")))?;
    v.parse().map_err(|_| Error::MalformedHeader(format!("bad value for `{key}`: {v}")))
}

pub fn read_flow(bytes: &[u8]) -> Result<SampledFlow> {
    let end = bytes
        .windows(2)
        .position(|w| w == b"\n\n")
        .ok_or_else(|| Error::MalformedHeader("header not terminated by a blank line".into()))?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| Error::MalformedHeader("header is not UTF-8".into()))?;
    let mut kv = std::collections::HashMap::new();
    for line in header.lines() {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::MalformedHeader(format!("line without `=`: {line}")))?;
        kv.insert(k.trim().to_string(), v.to_string());
    }
    let magic = kv.get("magic").ok_or_else(|| Error::MalformedHeader("missing magic".into()))?;
    if magic != MAGIC {
        if magic.starts_with("NSFLOW") {
            return Err(Error::UnsupportedVersion(magic.clone()));
        }
        return Err(Error::MalformedHeader(format!("unknown magic `{magic}`")));
    }
    match kv.get("byte_order").map(String::as_str) {
        Some("little") => {}
        other => return Err(Error::MalformedHeader(format!("unsupported byte_order {other:?}"))),
    }
    let grid = GridSpec::new(
        parse("n", kv.get("n"))?,
        parse("box_length", kv.get("box_length"))?,
        parse("n_times", kv.get("n_times"))?,
        parse("t0", kv.get("t0"))?,
        parse("t1", kv.get("t1"))?,
    )
    .map_err(|e| Error::MalformedHeader(e.to_string()))?;
    let fields: Vec<&str> = kv
        .get("fields")
        .ok_or_else(|| Error::MalformedHeader("missing fields".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    if fields.first() != Some(&"velocity") {
        return Err(Error::MalformedHeader("fields must start with velocity".into()));
    }
    let scalar = grid.n_times * grid.points();
    let mut expected = 0;
    for f in &fields {
        expected += match *f {
            "velocity" | "force" => 3 * scalar,
            "pressure" => scalar,
            other => return Err(Error::MalformedHeader(format!("unknown field `{other}`"))),
        };
    }
    let payload = &bytes[end + 2..];
    if payload.len() < 8 * expected {
        return Err(Error::PayloadShort { expected: 8 * expected, actual: payload.len() });
    }
    if payload.len() > 8 * expected {
        return Err(Error::PayloadLong { expected: 8 * expected, actual: payload.len() });
    }
    let mut values = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let mut take = |len: usize| -> Vec<f64> { values.by_ref().take(len).collect() };
    let mut velocity = None;
    let mut pressure = None;
    let mut force = None;
    for f in &fields {
        match *f {
            "velocity" => velocity = Some(take(3 * scalar)),
            "pressure" => pressure = Some(take(scalar)),
            _ => force = Some(take(3 * scalar)),
        }
    }
    let metadata = kv.get("metadata").map(|s| unescape(s)).unwrap_or_default();
    SampledFlow::new(grid, velocity.expect("velocity listed"), pressure, force, metadata)
}

pub fn load_flow(path: impl AsRef<Path>) -> Result<SampledFlow> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    read_flow(&bytes)
}
