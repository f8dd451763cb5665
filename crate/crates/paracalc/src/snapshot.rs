//! Binary snapshots: one JSON header line, then little-endian f64 samples,
//! row-major within a frame, frames in time order, eta nodes outermost.

use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::eta::{EtaGrid, ParamSlab};
use crate::field::{Field, TimeSlab};
use crate::grid::Grid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub n: usize,
    pub kind: String,
    pub t0: f64,
    pub dt: f64,
    pub frames: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_nodes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

fn write_raw(path: &Path, header: &Header, frames: &[&Field]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let line = serde_json::to_string(header).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    for f in frames {
        for v in f.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_raw(path: &Path) -> Result<(Header, Vec<Field>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: Header = serde_json::from_str(line.trim_end()).map_err(|e| Error::Format(e.to_string()))?;
    let grid = Grid::new(header.n)?;
    let blocks = header.frames * header.eta_nodes.as_ref().map_or(1, Vec::len);
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != blocks * grid.len() * 8 {
        return Err(Error::Format(format!(
            "expected {} payload bytes, found {}",
            blocks * grid.len() * 8,
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let fields = values
        .chunks_exact(grid.len())
        .map(|c| Field::from_values(grid, c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok((header, fields))
}

pub fn write_field(path: impl AsRef<Path>, f: &Field) -> Result<()> {
    let h = Header { n: f.grid().n(), kind: "field".into(), t0: 0.0, dt: 0.0, frames: 1, eta_nodes: None, lambda: None };
    write_raw(path.as_ref(), &h, &[f])
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Field> {
    let (h, mut fields) = read_raw(path.as_ref())?;
    if h.kind != "field" || fields.len() != 1 {
        return Err(Error::Format(format!("expected a field snapshot, found kind {}", h.kind)));
    }
    Ok(fields.remove(0))
}

pub fn write_slab(path: impl AsRef<Path>, s: &TimeSlab) -> Result<()> {
    let h = Header { n: s.grid().n(), kind: "slab".into(), t0: s.t0(), dt: s.dt(), frames: s.len(), eta_nodes: None, lambda: None };
    let frames: Vec<&Field> = s.frames().iter().collect();
    write_raw(path.as_ref(), &h, &frames)
}

pub fn read_slab(path: impl AsRef<Path>) -> Result<TimeSlab> {
    let (h, fields) = read_raw(path.as_ref())?;
    if h.kind != "slab" || h.eta_nodes.is_some() {
        return Err(Error::Format(format!("expected a slab snapshot, found kind {}", h.kind)));
    }
    TimeSlab::new(h.t0, h.dt, fields)
}

pub fn write_param_slab(path: impl AsRef<Path>, p: &ParamSlab) -> Result<()> {
    let t = p.template();
    let h = Header {
        n: t.grid().n(),
        kind: "slab".into(),
        t0: t.t0(),
        dt: t.dt(),
        frames: t.len(),
        eta_nodes: Some(p.eta().nodes().to_vec()),
        lambda: Some(p.eta().lambda()),
    };
    let frames: Vec<&Field> = p.nodes().iter().flat_map(|s| s.frames().iter()).collect();
    write_raw(path.as_ref(), &h, &frames)
}

pub fn read_param_slab(path: impl AsRef<Path>) -> Result<ParamSlab> {
    let (h, fields) = read_raw(path.as_ref())?;
    let nodes = h.eta_nodes.clone().ok_or_else(|| Error::Format("missing eta_nodes".into()))?;
    let lambda = h.lambda.unwrap_or(nodes[0]);
    let eta = EtaGrid::new(lambda, nodes.len())?;
    if eta.nodes().iter().zip(&nodes).any(|(a, b)| (a - b).abs() > 1e-12) {
        return Err(Error::Format("eta nodes are not a Chebyshev-Lobatto grid".into()));
    }
    let slabs = fields
        .chunks(h.frames)
        .map(|c| TimeSlab::new(h.t0, h.dt, c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    ParamSlab::nodal(eta, slabs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slab_round_trip_is_bitwise() {
        let grid = Grid::new(16).unwrap();
        let s = TimeSlab::from_fn(grid, 0.1, 0.01, 4, |t| Field::from_fn(grid, |x, y| t * x.sin() + y)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.bin");
        write_slab(&p, &s).unwrap();
        let back = read_slab(&p).unwrap();
        assert_eq!(back.frames(), s.frames());
        assert_eq!(back.dt(), s.dt());
        assert!(read_field(&p).is_err());
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let grid = Grid::new(16).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.bin");
        write_field(&p, &Field::constant(grid, 1.5)).unwrap();
        assert_eq!(read_field(&p).unwrap().mean(), 1.5);
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(read_field(&p), Err(Error::Format(_))));
    }
}
