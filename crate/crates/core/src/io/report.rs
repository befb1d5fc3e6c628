use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::ScanRow;
use crate::decomp_alt::{FundamentalSet, PositiveDecomposition};
use crate::error::{Error, Result};
use crate::graph::Violation;
use crate::hill::{CircuitCounts, DecompositionReport};

/// Shortest decimal string that reads back to the same `f64`.
pub fn fmt_num(x: f64) -> Result<String> {
    if x.is_finite() {
        Ok(format!("{x:?}"))
    } else {
        Err(Error::NonFinite("report output".into()))
    }
}

/// Per-circuit CSV: one row per circuit with per-bath affinities and heats.
pub fn circuit_csv<W: Write>(out: W, rep: &DecompositionReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "decomposition".to_string(),
        "id".into(),
        "length".into(),
        "class".into(),
    ];
    header.extend(rep.bath_labels.iter().map(|l| format!("X_{l}")));
    header.push("I".into());
    header.extend(rep.bath_labels.iter().map(|l| format!("q_{l}")));
    header.push("s".into());
    w.write_record(&header)?;
    for c in &rep.circuits {
        let mut rec = vec![
            "hill".to_string(),
            c.id.clone(),
            c.length.to_string(),
            c.class.as_str().to_string(),
        ];
        for &x in &c.affinity {
            rec.push(fmt_num(x)?);
        }
        rec.push(fmt_num(c.flux)?);
        for &q in &c.heat {
            rec.push(fmt_num(q)?);
        }
        rec.push(fmt_num(c.entropy)?);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One term of an alternative (Schnakenberg or Kalpazidou) decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltRow {
    pub decomposition: String,
    pub cycle: String,
    /// Chord flux (Schnakenberg) or peeled weight (Kalpazidou).
    pub weight: f64,
    pub affinity: f64,
    pub term: f64,
}

pub fn alt_rows(
    schnakenberg: Option<&FundamentalSet>,
    kalpazidou: Option<&PositiveDecomposition>,
) -> Vec<AltRow> {
    let mut rows = Vec::new();
    if let Some(s) = schnakenberg {
        rows.extend(s.terms.iter().map(|t| AltRow {
            decomposition: "schnakenberg".into(),
            cycle: t.cycle.id(),
            weight: t.chord_flux,
            affinity: t.affinity,
            term: t.term,
        }));
    }
    if let Some(k) = kalpazidou {
        rows.extend(k.terms.iter().map(|t| AltRow {
            decomposition: "kalpazidou".into(),
            cycle: t.cycle.id(),
            weight: t.weight,
            affinity: t.affinity,
            term: t.term,
        }));
    }
    rows
}

impl AltRow {
    pub fn write_csv<W: Write>(out: W, rows: &[AltRow]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["decomposition", "cycle", "weight", "affinity", "term"])?;
        for r in rows {
            w.write_record([
                r.decomposition.clone(),
                r.cycle.clone(),
                fmt_num(r.weight)?,
                fmt_num(r.affinity)?,
                fmt_num(r.term)?,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A cross-decomposition equality: relative deviation against a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, deviation: f64, tolerance: f64) -> Check {
        Check {
            name: name.to_string(),
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathTotal {
    pub label: String,
    pub temperature: f64,
    pub heat: f64,
    pub heat_direct: f64,
}

/// Device totals written next to the circuit CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub source: String,
    pub n: usize,
    pub u: usize,
    pub ln_d: f64,
    pub baths: Vec<BathTotal>,
    pub entropy: f64,
    pub entropy_edges: f64,
    pub counts: CircuitCounts,
    pub mode: Option<String>,
    pub x: Option<f64>,
    pub performance: Option<f64>,
    pub eps_carnot: Option<f64>,
    pub eta_carnot: Option<f64>,
    pub eps_max: Option<f64>,
    pub entropy_schnakenberg: Option<f64>,
    pub entropy_kalpazidou: Option<f64>,
    pub warnings: Vec<Violation>,
    pub checks: Vec<Check>,
}

impl Totals {
    fn numbers(&self) -> impl Iterator<Item = f64> + '_ {
        let opt = [
            self.x,
            self.performance,
            self.eps_carnot,
            self.eta_carnot,
            self.eps_max,
            self.entropy_schnakenberg,
            self.entropy_kalpazidou,
        ];
        [self.ln_d, self.entropy, self.entropy_edges]
            .into_iter()
            .chain(opt.into_iter().flatten())
            .chain(
                self.baths
                    .iter()
                    .flat_map(|b| [b.temperature, b.heat, b.heat_direct]),
            )
            .chain(self.checks.iter().flat_map(|c| [c.deviation, c.tolerance]))
    }

    pub fn to_json(&self) -> Result<String> {
        if self.numbers().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("totals of {}", self.source)));
        }
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

fn row_numbers(r: &ScanRow) -> impl Iterator<Item = f64> {
    [
        r.q_c,
        r.q_w,
        r.q_h,
        r.entropy,
        r.q_c_norm,
        r.q_w_norm,
        r.q_h_norm,
        r.r_factor,
        r.performance,
        r.eps_carnot,
        r.tau3_b,
        r.rho_a,
        r.rho_a_prime,
        r.mean_nc,
        r.mean_nh,
        r.eff_size,
    ]
    .into_iter()
    .flatten()
    .chain([r.t, r.sigma])
}

/// Scan CSV with the [`ScanRow`] columns; non-finite numbers are refused.
pub fn scan_csv<W: Write>(out: W, rows: &[ScanRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(SCAN_COLUMNS)?;
    for r in rows {
        if row_numbers(r).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("scan row {}", r.key)));
        }
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

const SCAN_COLUMNS: [&str; 27] = [
    "key",
    "model",
    "size",
    "t",
    "sigma",
    "n",
    "u",
    "route",
    "q_c",
    "q_w",
    "q_h",
    "entropy",
    "q_c_norm",
    "q_w_norm",
    "q_h_norm",
    "r_factor",
    "mode",
    "performance",
    "eps_carnot",
    "n3",
    "tau3_b",
    "rho_a",
    "rho_a_prime",
    "mean_nc",
    "mean_nh",
    "eff_size",
    "error",
];

pub fn read_scan_csv<R: Read>(input: R) -> Result<Vec<ScanRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != SCAN_COLUMNS {
        return Err(Error::Config(
            "existing scan file has a different column set".into(),
        ));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Per-scan summary written as JSON next to the series CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub name: String,
    pub preset: String,
    pub model: String,
    pub points: usize,
    pub failed: usize,
    pub reused: usize,
    pub refrigerator: usize,
    pub transformer: usize,
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
