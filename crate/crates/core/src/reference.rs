//! Published reference tables and deviation reports against computed runs.

use crate::convergence::ConvergenceTable;
use crate::error::{invalid, Error, Result};
use crate::harness::{Report, SeriesReport, SweepReport};

macro_rules! embed {
    ($($name:literal),* $(,)?) => {
        [$(($name, include_str!(concat!("../reference/", $name, ".csv")))),*]
    };
}

/// `(experiment name, CSV text)` of every embedded reference.
pub const REFERENCES: [(&str, &str); 16] = embed!(
    "table2.1", "table2.2", "table2.3a", "table2.3b", "table3.1", "table3.2", "table4.1", "remark4.2", "table5.1",
    "table5.2", "table5.3", "table6.1", "table6.2a", "table6.2b", "table6.3a", "table6.3b",
);

const SOURCE_TAG: &str = "# source:";

/// Marker for a published value that overflowed.
pub const OVERFLOW: &str = "overflow";

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTable {
    pub name: String,
    pub source: String,
    pub header: Vec<String>,
    /// Raw cells; empty strings are blanks.
    pub rows: Vec<Vec<String>>,
}

impl ReferenceTable {
    /// Parse `text`; the first line must be a `# source:` tag.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let (first, body) = text.split_once('\n').unwrap_or((text, ""));
        let source = first
            .strip_prefix(SOURCE_TAG)
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::Parse(format!("reference '{name}' lacks a '{SOURCE_TAG}' line")))?;
        let mut rdr = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Parse(format!("{name}: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = rdr
            .records()
            .map(|r| {
                r.map(|rec| rec.iter().map(|c| c.trim().to_string()).collect())
                    .map_err(|e| Error::Parse(format!("{name}: {e}")))
            })
            .collect::<Result<Vec<Vec<String>>>>()?;
        let t = ReferenceTable {
            name: name.to_string(),
            source,
            header,
            rows,
        };
        for row in &t.rows {
            for cell in row {
                if !cell.is_empty() && cell != OVERFLOW && cell.parse::<f64>().is_err() {
                    return Err(Error::Parse(format!("{name}: cell '{cell}' is not a number")));
                }
            }
        }
        Ok(t)
    }

    pub fn column(&self, label: &str) -> Option<usize> {
        self.header.iter().position(|h| h == label)
    }

    /// Numeric cell, `None` for blanks and overflow markers.
    pub fn number(&self, row: usize, col: usize) -> Option<f64> {
        self.rows.get(row)?.get(col)?.parse().ok()
    }
}

/// Embedded reference of a registered experiment.
pub fn reference(name: &str) -> Result<ReferenceTable> {
    let (_, text) = REFERENCES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidArgument(format!("no published reference for '{name}'")))?;
    ReferenceTable::parse(name, text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviationKind {
    /// `|computed − published| / |published|`.
    Relative,
    /// `|computed − published|` for orders.
    Order,
    /// `|computed − published|` for times.
    Time,
    /// Overflow marker agreement: 0 when both overflowed, infinite otherwise.
    Overflow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub key: String,
    pub column: String,
    pub published: String,
    pub computed: Option<f64>,
    pub deviation: f64,
    pub kind: DeviationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub name: String,
    pub entries: Vec<Deviation>,
}

impl Comparison {
    fn max_of(&self, kind: DeviationKind) -> Option<f64> {
        self.entries.iter().filter(|e| e.kind == kind).map(|e| e.deviation).reduce(f64::max)
    }

    pub fn max_relative(&self) -> Option<f64> {
        self.max_of(DeviationKind::Relative)
    }

    pub fn max_order(&self) -> Option<f64> {
        self.max_of(DeviationKind::Order)
    }

    pub fn overflow_mismatches(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.kind == DeviationKind::Overflow && e.deviation != 0.0)
            .count()
    }

    /// Header row plus one row per entry.
    pub fn grid(&self) -> Vec<Vec<String>> {
        let mut g = vec![["key", "column", "published", "computed", "deviation", "kind"].map(String::from).to_vec()];
        for e in &self.entries {
            g.push(vec![
                e.key.clone(),
                e.column.clone(),
                e.published.clone(),
                e.computed.map(|c| format!("{c:.4e}")).unwrap_or_else(|| "-".into()),
                format!("{:.3e}", e.deviation),
                format!("{:?}", e.kind).to_lowercase(),
            ]);
        }
        g
    }
}

fn entry(key: &str, column: &str, published: &str, computed: Option<f64>, kind: DeviationKind) -> Option<Deviation> {
    if published.is_empty() {
        return None;
    }
    let deviation = if published == OVERFLOW {
        return Some(Deviation {
            key: key.into(),
            column: column.into(),
            published: published.into(),
            computed,
            deviation: if computed.is_none() { 0.0 } else { f64::INFINITY },
            kind: DeviationKind::Overflow,
        });
    } else {
        let p: f64 = published.parse().ok()?;
        match (computed, kind) {
            (None, _) => f64::INFINITY,
            (Some(c), DeviationKind::Relative) => ((c - p) / p).abs(),
            (Some(c), _) => (c - p).abs(),
        }
    };
    Some(Deviation {
        key: key.into(),
        column: column.into(),
        published: published.into(),
        computed,
        deviation,
        kind,
    })
}

fn kind_of(label: &str) -> DeviationKind {
    if label.ends_with("order") {
        DeviationKind::Order
    } else if label.starts_with("t_") || label == "diverged_at" {
        DeviationKind::Time
    } else {
        DeviationKind::Relative
    }
}

fn compare_table(t: &ConvergenceTable, r: &ReferenceTable) -> Result<Vec<Deviation>> {
    let nc = r.column("N").ok_or_else(|| Error::InvalidArgument(format!("reference '{}' has no N column", r.name)))?;
    let mut out = Vec::new();
    for row in &t.rows {
        let ri = (0..r.rows.len())
            .find(|&i| r.number(i, nc) == Some(row.n as f64))
            .ok_or_else(|| Error::InvalidArgument(format!("N = {} has no published row in '{}'", row.n, r.name)))?;
        let key = format!("N={}", row.n);
        for (ci, col) in t.columns.iter().enumerate() {
            if let Some(j) = r.column(&col.label) {
                out.extend(entry(&key, &col.label, &r.rows[ri][j], row.values[ci], DeviationKind::Relative));
            }
            if let Some(ol) = &col.order_label {
                if let Some(j) = r.column(ol) {
                    out.extend(entry(&key, ol, &r.rows[ri][j], row.orders[ci], DeviationKind::Order));
                }
            }
        }
    }
    Ok(out)
}

fn compare_sweep(s: &SweepReport, r: &ReferenceTable) -> Result<Vec<Deviation>> {
    let ac = r.column("alpha").ok_or_else(|| Error::InvalidArgument(format!("reference '{}' has no alpha column", r.name)))?;
    let mut out = Vec::new();
    for row in &s.rows {
        let ri = (0..r.rows.len())
            .find(|&i| r.number(i, ac).is_some_and(|a| (a - row.alpha).abs() < 1e-9))
            .ok_or_else(|| Error::InvalidArgument(format!("alpha = {} has no published row in '{}'", row.alpha, r.name)))?;
        let key = format!("alpha={}", r.rows[ri][ac]);
        for (label, v) in [("eta_L2", row.eta_l2), ("u_L2", row.u_l2), ("diverged_at", row.diverged_at)] {
            if let Some(j) = r.column(label) {
                out.extend(entry(&key, label, &r.rows[ri][j], v, kind_of(label)));
            }
        }
    }
    Ok(out)
}

/// Columns come in `(t_…, eta_L2_…)` pairs, one pair per series, rows in time order.
fn compare_series(s: &SeriesReport, r: &ReferenceTable) -> Result<Vec<Deviation>> {
    if r.header.len() != 2 * s.series.len() {
        return invalid(format!(
            "'{}' has {} columns; {} series need {}",
            r.name,
            r.header.len(),
            s.series.len(),
            2 * s.series.len()
        ));
    }
    if r.rows.len() != s.times.len() {
        return invalid(format!("'{}' has {} rows for {} observation times", r.name, r.rows.len(), s.times.len()));
    }
    let mut out = Vec::new();
    for (i, t) in s.times.iter().enumerate() {
        for (k, x) in s.series.iter().enumerate() {
            let key = format!("t={t}");
            let (tl, el) = (&r.header[2 * k], &r.header[2 * k + 1]);
            out.extend(entry(&key, tl, &r.rows[i][2 * k], Some(*t), DeviationKind::Time));
            out.extend(entry(&key, el, &r.rows[i][2 * k + 1], x.errors[i], DeviationKind::Relative));
        }
    }
    Ok(out)
}

/// Deviations of a computed report from its published reference.
pub fn compare(report: &Report, r: &ReferenceTable) -> Result<Comparison> {
    let entries = match report {
        Report::Convergence(t) => compare_table(t, r)?,
        Report::Sweep(s) => compare_sweep(s, r)?,
        Report::Series(s) => compare_series(s, r)?,
    };
    Ok(Comparison {
        name: r.name.clone(),
        entries,
    })
}
