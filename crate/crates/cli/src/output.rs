//! Output files: frontier CSV, dirty-paper curve CSV/SVG, atomic writes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qrps_core::regions::{CsiMode, RegionFrontier};

use crate::error::{CliError, Result};

pub const FRONTIER_HEADER: &str = "mode,k,D,R,clamped,povm_restricted,seed";

/// Writes to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| CliError::invalid(path, "output path has no file name"))?;
    let tmp = path.with_file_name(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let res = fs::write(&tmp, contents).and_then(|()| fs::rename(&tmp, path));
    if let Err(e) = res {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

/// Fixed six decimals, without a sign on zero.
pub fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn round6(v: f64) -> f64 {
    fmt6(v).parse().expect("formatted float parses")
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontierRow {
    pub mode: CsiMode,
    pub k: usize,
    pub d: f64,
    pub r: f64,
    pub clamped: bool,
    pub povm_restricted: bool,
    pub seed: u64,
}

impl FrontierRow {
    /// The row as it reads back from CSV.
    pub fn rounded(&self) -> Self {
        Self {
            d: round6(self.d),
            r: round6(self.r),
            ..self.clone()
        }
    }
}

pub fn frontier_rows(f: &RegionFrontier) -> Vec<FrontierRow> {
    f.points
        .iter()
        .map(|p| FrontierRow {
            mode: f.mode,
            k: f.k,
            d: p.d_target,
            r: p.rate,
            clamped: p.clamped(),
            povm_restricted: p.povm_restricted(),
            seed: f.seed,
        })
        .collect()
}

pub fn frontier_csv(rows: &[FrontierRow]) -> String {
    let mut out = String::from(FRONTIER_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.mode,
            r.k,
            fmt6(r.d),
            fmt6(r.r),
            r.clamped,
            r.povm_restricted,
            r.seed
        );
    }
    out
}

pub fn parse_frontier_csv(text: &str, origin: &Path) -> Result<Vec<FrontierRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(FRONTIER_HEADER) {
        return Err(CliError::invalid(origin, "missing frontier CSV header"));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = |what: &str| CliError::invalid(origin, format!("row {}: bad {what}", i + 1));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(bad("field count"));
            }
            Ok(FrontierRow {
                mode: f[0].parse().map_err(|_| bad("mode"))?,
                k: f[1].parse().map_err(|_| bad("k"))?,
                d: f[2].parse().map_err(|_| bad("D"))?,
                r: f[3].parse().map_err(|_| bad("R"))?,
                clamped: f[4].parse().map_err(|_| bad("clamped"))?,
                povm_restricted: f[5].parse().map_err(|_| bad("povm_restricted"))?,
                seed: f[6].parse().map_err(|_| bad("seed"))?,
            })
        })
        .collect()
}

/// Sampled dirty-paper curve and the optimized coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct DpcCurve {
    pub points: Vec<(f64, f64)>,
    pub t_max: f64,
    pub r_max: f64,
}

pub fn dpc_csv(c: &DpcCurve) -> String {
    let mut out = String::from("t,R_DPC\n");
    for (t, r) in &c.points {
        let _ = writeln!(out, "{},{}", fmt6(*t), fmt6(*r));
    }
    let _ = writeln!(out, "t_max,R_max\n{},{}", fmt6(c.t_max), fmt6(c.r_max));
    out
}

/// Reads back the curve rows and the summary row.
pub fn parse_dpc_csv(text: &str, origin: &Path) -> Result<DpcCurve> {
    let bad = |msg: &str| CliError::invalid(origin, msg.to_string());
    let pair = |line: &str| -> Result<(f64, f64)> {
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| bad("expected two fields"))?;
        Ok((
            a.parse().map_err(|_| bad("bad number"))?,
            b.parse().map_err(|_| bad("bad number"))?,
        ))
    };
    let mut lines = text.lines();
    if lines.next() != Some("t,R_DPC") {
        return Err(bad("missing curve header"));
    }
    let mut points = Vec::new();
    for line in lines.by_ref() {
        if line == "t_max,R_max" {
            let (t_max, r_max) = pair(lines.next().ok_or_else(|| bad("missing summary row"))?)?;
            return Ok(DpcCurve {
                points,
                t_max,
                r_max,
            });
        }
        points.push(pair(line)?);
    }
    Err(bad("missing summary header"))
}

/// One polyline for the curve and a circle at the maximizer.
pub fn dpc_svg(c: &DpcCurve) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    let (t0, t1) = c
        .points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.0), b.max(p.0))
        });
    let span = if t1 > t0 { t1 - t0 } else { 1.0 };
    let top = c
        .points
        .iter()
        .map(|p| p.1)
        .fold(c.r_max, f64::max)
        .max(1e-9)
        * 1.05;
    let sx = |t: f64| M + (t - t0) / span * (W - 2.0 * M);
    let sy = |r: f64| H - M - r / top * (H - 2.0 * M);
    let pts: Vec<String> = c
        .points
        .iter()
        .map(|&(t, r)| format!("{:.2},{:.2}", sx(t), sy(r)))
        .collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(
        out,
        r#"<path d="M{M} {M} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = H - M,
        r = W - M
    );
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
        pts.join(" ")
    );
    if (t0..=t1).contains(&c.t_max) {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="firebrick"/>"#,
            sx(c.t_max),
            sy(c.r_max)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#,
        W / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="15" y="{:.2}" transform="rotate(-90 15 {:.2})" text-anchor="middle">R_DPC (bits)</text>"#,
        H / 2.0,
        H / 2.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}">t_max = {}, R_max = {}</text>"#,
        M + 10.0,
        M - 10.0,
        fmt6(c.t_max),
        fmt6(c.r_max)
    );
    out.push_str("</svg>\n");
    out
}
