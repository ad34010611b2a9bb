//! Error norms against exact solutions and observed convergence orders.

use crate::error::{invalid, Result};
use crate::quadrature::QuadratureRule;
use crate::spline::FemField;

pub const NORM_POINTS: usize = 10;
pub const LINF_SAMPLES: usize = 21;

/// L², H¹ (with `‖v‖₁² = ‖v‖² + ⅓‖v′‖²`) and sampled L∞ norms of an error.
///
/// `h1_full` is the unweighted `(‖v‖² + ‖v′‖²)^{1/2}`, the norm the published H¹ columns use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
    pub h1_full: f64,
    pub linf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Norm {
    L2,
    H1,
    #[serde(rename = "H1full")]
    H1Full,
    Linf,
}

impl Norm {
    pub fn label(self) -> &'static str {
        match self {
            Norm::L2 => "L2",
            Norm::H1 => "H1",
            Norm::H1Full => "H1full",
            Norm::Linf => "Linf",
        }
    }

    pub fn from_label(s: &str) -> Result<Norm> {
        match s {
            "L2" | "l2" => Ok(Norm::L2),
            "H1" | "h1" => Ok(Norm::H1),
            "H1full" | "h1full" => Ok(Norm::H1Full),
            "Linf" | "linf" => Ok(Norm::Linf),
            _ => invalid(format!("unknown norm '{s}'")),
        }
    }
}

impl Norms {
    pub fn get(&self, n: Norm) -> f64 {
        match n {
            Norm::L2 => self.l2,
            Norm::H1 => self.h1,
            Norm::H1Full => self.h1_full,
            Norm::Linf => self.linf,
        }
    }
}

/// Per-field errors at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub eta: Norms,
    pub u: Option<Norms>,
}

/// Norms of `exact - field`, element by element.
pub fn error_norms(field: &FemField, exact: &dyn Fn(f64) -> f64, dexact: &dyn Fn(f64) -> f64) -> Norms {
    let q = QuadratureRule::gauss_legendre(NORM_POINTS);
    let bp = field.space.mesh().breakpoints();
    let (mut l2, mut d2, mut linf) = (0.0f64, 0.0f64, 0.0f64);
    for e in 0..bp.len() - 1 {
        let (a, h) = (bp[e], bp[e + 1] - bp[e]);
        for (xi, w) in q.nodes.iter().zip(&q.weights) {
            let x = a + h * xi;
            let (v, dv) = field.eval_on(e, x);
            l2 += w * h * (exact(x) - v).powi(2);
            d2 += w * h * (dexact(x) - dv).powi(2);
        }
        for s in 0..LINF_SAMPLES {
            let x = if s + 1 == LINF_SAMPLES {
                bp[e + 1]
            } else {
                a + h * s as f64 / (LINF_SAMPLES - 1) as f64
            };
            linf = linf.max((exact(x) - field.eval_on(e, x).0).abs());
        }
    }
    Norms {
        l2: l2.sqrt(),
        h1: (l2 + d2 / 3.0).sqrt(),
        h1_full: (l2 + d2).sqrt(),
        linf,
    }
}

/// A column of a convergence table; columns with an order label get a paired order column.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub label: String,
    pub order_label: Option<String>,
}

impl Column {
    pub fn with_order(label: impl Into<String>, order: impl Into<String>) -> Self {
        Column {
            label: label.into(),
            order_label: Some(order.into()),
        }
    }

    pub fn plain(label: impl Into<String>) -> Self {
        Column {
            label: label.into(),
            order_label: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: usize,
    /// `None` marks a missing value, e.g. after divergence.
    pub values: Vec<Option<f64>>,
    pub orders: Vec<Option<f64>>,
    pub diverged_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

/// Input row for [`convergence_orders`].
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub n: usize,
    pub values: Vec<Option<f64>>,
    pub diverged_at: Option<f64>,
}

pub fn order(e_prev: f64, e: f64, n_prev: usize, n: usize) -> f64 {
    (e_prev / e).ln() / (n as f64 / n_prev as f64).ln()
}

/// Attach `log(e_{i-1}/e_i) / log(N_i/N_{i-1})` orders to consecutive rows.
pub fn convergence_orders(columns: Vec<Column>, rows: Vec<RawRow>) -> Result<ConvergenceTable> {
    if rows.windows(2).any(|w| w[1].n <= w[0].n) {
        return invalid("N values must be strictly increasing");
    }
    for r in &rows {
        if r.values.len() != columns.len() {
            return invalid(format!("row N={} has {} values for {} columns", r.n, r.values.len(), columns.len()));
        }
        for (c, v) in columns.iter().zip(&r.values) {
            if let Some(v) = v {
                if c.order_label.is_some() && !(*v > 0.0) {
                    return invalid(format!("non-positive error {v} in column {} at N={}", c.label, r.n));
                }
            }
        }
    }
    let mut out: Vec<Row> = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let orders = columns
            .iter()
            .enumerate()
            .map(|(c, col)| {
                let prev = i.checked_sub(1).map(|j| &rows[j])?;
                col.order_label.as_ref()?;
                Some(order(prev.values[c]?, r.values[c]?, prev.n, r.n))
            })
            .collect();
        out.push(Row {
            n: r.n,
            values: r.values.clone(),
            orders,
            diverged_at: r.diverged_at,
        });
    }
    Ok(ConvergenceTable { columns, rows: out })
}

impl ConvergenceTable {
    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.label == label)
    }

    pub fn value(&self, label: &str, n: usize) -> Option<f64> {
        let c = self.column_index(label)?;
        self.rows.iter().find(|r| r.n == n)?.values[c]
    }

    pub fn order_at(&self, label: &str, n: usize) -> Option<f64> {
        let c = self.column_index(label)?;
        self.rows.iter().find(|r| r.n == n)?.orders[c]
    }

    pub fn any_diverged(&self) -> bool {
        self.rows.iter().any(|r| r.diverged_at.is_some())
    }
}

/// `κ = e / (h^{3.5} √ln(1/h))`.
pub fn kappa_ratio(l2_error: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return invalid(format!("kappa ratio needs 0 < h < 1, got {h}"));
    }
    Ok(l2_error / (h.powf(3.5) * (1.0 / h).ln().sqrt()))
}
