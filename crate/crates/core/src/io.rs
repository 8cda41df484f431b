//! Field files, report files and CSV profiles.
//!
//! A field file is a text table:
//!
//! ```text
//! meanvalue-field 1
//! domain {"kind":"ball","center":[0.0,0.0],...}
//! box 65 65
//! mask O28 C9 O54 ...
//! density true
//! values
//! 0.25
//! ...
//! ```
//!
//! `mask` run-length encodes the node classes over the bounding box in
//! lexicographic order; `values` lists the in-mask nodes in the same order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::calculus::ShellSample;
use crate::constants::ConstantLedger;
use crate::error::{Error, Result};
use crate::grid::{DomainSpec, NodeClass, ScalarField};
use crate::heinz::HeinzReport;
use crate::quantization::ConcentrationReport;

const FIELD_MAGIC: &str = "meanvalue-field 1";
const TIMESTAMP_PREFIX: &str = "# timestamp: ";

pub fn write_field(e: &ScalarField, mut w: impl Write) -> Result<()> {
    let domain = e.domain();
    writeln!(w, "{FIELD_MAGIC}")?;
    writeln!(w, "domain {}", serde_json::to_string(&domain.spec())?)?;
    let shape: Vec<String> = domain.lattice().shape().iter().map(|s| s.to_string()).collect();
    writeln!(w, "box {}", shape.join(" "))?;

    let mut runs: Vec<String> = Vec::new();
    let mut current: Option<(NodeClass, usize)> = None;
    for &class in domain.classes() {
        current = match current {
            Some((c, k)) if c == class => Some((c, k + 1)),
            Some((c, k)) => {
                runs.push(format!("{}{k}", c.code()));
                Some((class, 1))
            }
            None => Some((class, 1)),
        };
    }
    if let Some((c, k)) = current {
        runs.push(format!("{}{k}", c.code()));
    }
    writeln!(w, "mask {}", runs.join(" "))?;
    writeln!(w, "density {}", e.is_density())?;
    writeln!(w, "values")?;
    for node in domain.nodes() {
        writeln!(w, "{}", e.value(node))?;
    }
    Ok(())
}

fn format_err(line: usize, detail: impl Into<String>) -> Error {
    Error::FieldFormat {
        line,
        detail: detail.into(),
    }
}

/// Reads a field, rebuilding its domain from the header and checking the
/// box and mask against it.
pub fn read_field(r: impl BufRead) -> Result<ScalarField> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i, l)),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(format_err(0, format!("unexpected end of file, expected {what}"))),
        }
    };
    let keyed = |(i, l): (usize, String), key: &str| -> Result<(usize, String)> {
        l.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .map(|rest| (i, rest.to_string()))
            .ok_or_else(|| format_err(i, format!("expected `{key} …`")))
    };

    let (i, magic) = next("header")?;
    if magic.trim() != FIELD_MAGIC {
        return Err(format_err(i, "not a meanvalue field file"));
    }
    let (i, spec) = keyed(next("domain")?, "domain")?;
    let spec: DomainSpec = serde_json::from_str(&spec).map_err(|e| format_err(i, e.to_string()))?;
    let domain = spec.build()?;

    let (i, shape) = keyed(next("box")?, "box")?;
    let shape: Vec<usize> = shape
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| format_err(i, format!("bad box extent `{s}`"))))
        .collect::<Result<_>>()?;
    if shape != domain.lattice().shape() {
        return Err(format_err(i, "bounding box does not match the domain"));
    }

    let (i, mask) = keyed(next("mask")?, "mask")?;
    let mut classes = Vec::with_capacity(domain.lattice().len());
    for run in mask.split_whitespace() {
        let mut chars = run.chars();
        let class = chars
            .next()
            .and_then(NodeClass::from_code)
            .ok_or_else(|| format_err(i, format!("bad mask run `{run}`")))?;
        let count: usize = chars
            .as_str()
            .parse()
            .map_err(|_| format_err(i, format!("bad mask run `{run}`")))?;
        classes.extend(std::iter::repeat_n(class, count));
    }
    if classes != domain.classes() {
        return Err(format_err(i, "mask does not match the domain"));
    }

    let (i, density) = keyed(next("density")?, "density")?;
    let density: bool = density.trim().parse().map_err(|_| format_err(i, "density must be true or false"))?;
    let (i, marker) = next("values")?;
    if marker.trim() != "values" {
        return Err(format_err(i, "expected `values`"));
    }
    let mut values = Vec::with_capacity(domain.in_mask_count());
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        values.push(
            line.trim()
                .parse::<f64>()
                .map_err(|_| format_err(i, format!("bad value `{line}`")))?,
        );
    }
    if values.len() != domain.in_mask_count() {
        return Err(format_err(
            0,
            format!("expected {} values, found {}", domain.in_mask_count(), values.len()),
        ));
    }
    ScalarField::from_mask_values(&domain, &values, density)
}

pub fn save_field(e: &ScalarField, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(e, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: &Path) -> Result<ScalarField> {
    read_field(BufReader::new(File::open(path)?))
}

/// A report file: a timestamp line, a title line, the ledger as key-value
/// text, then one JSON object per record.
pub struct Report {
    pub title: String,
    pub ledger: Option<ConstantLedger>,
    pub records: Vec<serde_json::Value>,
}

impl Report {
    pub fn new(title: impl Into<String>, ledger: Option<ConstantLedger>) -> Self {
        Self {
            title: title.into(),
            ledger,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, record: &impl Serialize) -> Result<()> {
        self.records.push(serde_json::to_value(record)?);
        Ok(())
    }

    /// Everything after the timestamp line; identical inputs give identical bodies.
    pub fn body(&self) -> Result<String> {
        let mut s = format!("# report: {}\n[ledger]\n", self.title);
        match &self.ledger {
            Some(l) => s.push_str(&l.to_key_value()),
            None => s.push_str("none\n"),
        }
        if !s.ends_with('\n') {
            s.push('\n');
        }
        s.push_str("[records]\n");
        for r in &self.records {
            s.push_str(&serde_json::to_string(r)?);
            s.push('\n');
        }
        Ok(s)
    }

    pub fn write(&self, mut w: impl Write) -> Result<()> {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        writeln!(w, "{TIMESTAMP_PREFIX}{secs}")?;
        w.write_all(self.body()?.as_bytes())?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// The report text with its timestamp line removed.
pub fn strip_timestamp(text: &str) -> &str {
    match text.strip_prefix(TIMESTAMP_PREFIX) {
        Some(rest) => rest.split_once('\n').map_or("", |(_, body)| body),
        None => text,
    }
}

pub fn read_report_body(path: &Path) -> Result<String> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    Ok(strip_timestamp(&text).to_string())
}

/// `r, M_r, quadrature_node_count, clipped_flag`.
pub fn write_shell_csv(profile: &[ShellSample], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["r", "M_r", "quadrature_node_count", "clipped_flag"])?;
    for s in profile {
        out.write_record([
            s.radius.to_string(),
            s.mean.to_string(),
            s.nodes.to_string(),
            u8::from(s.clipped).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `rho, f`.
pub fn write_heinz_csv(report: &HeinzReport, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["rho", "f"])?;
    let k = report.f_values.len() as f64;
    for (i, f) in report.f_values.iter().enumerate() {
        out.write_record([(i as f64 / k).to_string(), f.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// `point, i, z_i, R_i, delta_i, energy, branch`, one row per witness step,
/// with coordinates joined by spaces.
pub fn write_bubbles_csv(report: &ConcentrationReport, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["point", "i", "z_i", "R_i", "delta_i", "energy", "branch"])?;
    let candidates = report
        .points
        .iter()
        .map(|p| ("extracted", &p.witnesses))
        .chain(report.bounded_candidates.iter().map(|b| ("bounded", &b.witnesses)));
    for (j, (kind, witnesses)) in candidates.enumerate() {
        for s in witnesses {
            let z: Vec<String> = s.z.iter().map(|v| v.to_string()).collect();
            out.write_record([
                format!("{kind}:{j}"),
                s.index.to_string(),
                z.join(" "),
                s.r.to_string(),
                s.delta.to_string(),
                s.energy.to_string(),
                format!("{:?}", s.branch),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}
