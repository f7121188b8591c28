//! Report emission: JSON documents with a fixed envelope, tab-separated
//! tables for plotting, and the one-line summary used by sweeps.

use std::io::Write;

use lorenz_core::cherry::RotationEstimate;
use lorenz_core::classify::AttractorReport;
use lorenz_core::orbits::Orbit;
use lorenz_core::renorm::RenormTower;
use lorenz_core::return_map::ReturnMapDecomposition;
use lorenz_core::{IntervalCover, MapParams, Tolerances};
use serde::Serialize;

use crate::error::Result;

/// `{"command", "params", "tolerances", "seed", "result"}`; `params` is
/// null for a rigid rotation.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub command: &'a str,
    pub params: Option<MapParams>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub result: T,
}

pub fn write_json<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn tsv<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().delimiter(b'\t').from_writer(out)
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner().map_err(|e| e.into_error())?.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

/// One orbit point per line: `n`, `x`.
pub fn orbit_table<W: Write>(out: W, orbit: &Orbit) -> Result<()> {
    let mut w = tsv(out);
    w.write_record(["n", "x"]).map_err(csv_err)?;
    for (n, x) in orbit.points.iter().enumerate() {
        w.write_record([n.to_string(), x.to_string()]).map_err(csv_err)?;
    }
    finish(w)
}

/// One interval per line: `lo`, `hi`.
pub fn cover_table<W: Write>(out: W, cover: &IntervalCover) -> Result<()> {
    let mut w = tsv(out);
    w.write_record(["lo", "hi"]).map_err(csv_err)?;
    for i in cover.intervals() {
        w.write_record([i.lo.to_string(), i.hi.to_string()]).map_err(csv_err)?;
    }
    finish(w)
}

/// One branch per line: domain, return time, image.
pub fn decomposition_table<W: Write>(out: W, d: &ReturnMapDecomposition) -> Result<()> {
    let mut w = tsv(out);
    w.write_record(["domain_lo", "domain_hi", "return_time", "image_lo", "image_hi", "itinerary"])
        .map_err(csv_err)?;
    for b in &d.branches {
        w.write_record([
            b.domain.lo.to_string(),
            b.domain.hi.to_string(),
            b.return_time.to_string(),
            b.image.lo.to_string(),
            b.image.hi.to_string(),
            b.itinerary.clone(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// One tower level per line.
pub fn tower_table<W: Write>(out: W, t: &RenormTower) -> Result<()> {
    let mut w = tsv(out);
    w.write_record(["level", "a", "b", "period_a", "period_b"]).map_err(csv_err)?;
    for (k, r) in t.records.iter().enumerate() {
        w.write_record([
            (k + 1).to_string(),
            r.a().to_string(),
            r.b().to_string(),
            r.period_a.to_string(),
            r.period_b.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// One estimate per line: `n`, estimate, bound.
pub fn rotation_table<W: Write>(out: W, trace: &[RotationEstimate]) -> Result<()> {
    let mut w = tsv(out);
    w.write_record(["n", "estimate", "bound", "lock"]).map_err(csv_err)?;
    for r in trace {
        let lock = r.rational_lock.map(|l| format!("{}/{}", l.p, l.q)).unwrap_or_default();
        w.write_record([r.n.to_string(), r.value.to_string(), r.error_bound.to_string(), lock])
            .map_err(csv_err)?;
    }
    finish(w)
}

/// Sweep summary columns, in order.
pub const SUMMARY_COLUMNS: [&str; 14] = [
    "c", "alpha", "beta", "v1", "v0", "status", "kind", "depth", "rotation", "entropy", "cells", "passed", "seed",
    "note",
];

/// One classified (or rejected) parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub params: MapParams,
    pub status: &'static str,
    pub kind: String,
    pub depth: Option<usize>,
    pub rotation: Option<f64>,
    pub entropy: Option<f64>,
    pub cells: Option<usize>,
    pub passed: Option<usize>,
    pub seed: u64,
    pub note: String,
}

impl SummaryRow {
    pub fn classified(params: MapParams, r: &AttractorReport) -> Self {
        let status = if r.invariant_violations.is_empty() { "ok" } else { "invariant_violation" };
        SummaryRow {
            params,
            status,
            kind: r.kind.name().to_string(),
            depth: Some(r.tower_depth),
            rotation: r.rotation.as_ref().map(|e| e.value),
            entropy: Some(r.entropy_lower_bound),
            cells: Some(r.lambda_cover.cell_count()),
            passed: Some(r.passed_checks()),
            seed: r.seed,
            note: r.invariant_violations.join("; "),
        }
    }

    pub fn rejected(params: MapParams, seed: u64, reason: String) -> Self {
        SummaryRow {
            params,
            status: "rejected",
            kind: String::new(),
            depth: None,
            rotation: None,
            entropy: None,
            cells: None,
            passed: None,
            seed,
            note: reason,
        }
    }

    pub fn fields(&self) -> [String; 14] {
        let opt = |v: Option<String>| v.unwrap_or_default();
        let p = &self.params;
        [
            p.c.to_string(),
            p.alpha.to_string(),
            p.beta.to_string(),
            p.v1.to_string(),
            p.v0.to_string(),
            self.status.to_string(),
            self.kind.clone(),
            opt(self.depth.map(|d| d.to_string())),
            opt(self.rotation.map(|r| r.to_string())),
            opt(self.entropy.map(|e| e.to_string())),
            opt(self.cells.map(|c| c.to_string())),
            opt(self.passed.map(|c| c.to_string())),
            self.seed.to_string(),
            self.note.clone(),
        ]
    }
}

pub fn summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.fields()).map_err(csv_err)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lorenz_core::orbits::iterate;
    use lorenz_core::{SignedPoint, StandardLorenzMap};

    #[test]
    fn orbit_table_lists_points() {
        let f = StandardLorenzMap::new(MapParams::new(0.5, 2.0, 2.0, 1.0, 0.0)).unwrap();
        let o = iterate(&f, SignedPoint::new(0.25), 2);
        let mut buf = Vec::new();
        orbit_table(&mut buf, &o).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n\tx\n0\t0.25\n1\t0.75\n2\t0.25\n");
    }

    #[test]
    fn rejected_rows_keep_the_parameters() {
        let p = MapParams::new(0.0, 2.0, 2.0, 1.0, 0.0);
        let row = SummaryRow::rejected(p, 3, "c must lie in (0,1)".into());
        let mut buf = Vec::new();
        summary_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "0,2,2,1,0,rejected,,,,,,,3,\"c must lie in (0,1)\"");
    }
}
