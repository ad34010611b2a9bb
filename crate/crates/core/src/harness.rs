//! Named convergence experiments, stability sweeps and table emission.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cases::Case;
use crate::convergence::{convergence_orders, kappa_ratio, Column, ConvergenceTable, ErrorReport, Norm, RawRow};
use crate::error::{invalid, Error, Result};
use crate::integrators::{integrate, Observe, Scheme, StepperSpec};
use crate::mesh::{Mesh, MeshPreset};
use crate::systems::{InitRule, ProblemKind, SemidiscreteProblem};
use crate::assembly::EllipticMode;

/// What an experiment produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    /// Errors at the listed times for every N, with orders.
    Convergence,
    /// Error history at the listed times for each `k = h^alpha`, fixed N.
    Series,
    /// Final error or blowup time for each `k = h^alpha`, fixed N.
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ProblemKind,
    pub mesh: MeshPreset,
    pub n_list: Vec<usize>,
    pub eta_degree: usize,
    pub u_degree: Option<usize>,
    pub scheme: Scheme,
    /// Expression in `h` (largest element), `dx`, `N` and, for sweeps, `alpha`.
    pub k_rule: String,
    pub horizon: f64,
    pub cases: Vec<Case>,
    pub eta_init: InitRule,
    pub u_init: Option<InitRule>,
    pub norms: Vec<Norm>,
    /// Observation times; empty means the horizon only.
    #[serde(default)]
    pub times: Vec<f64>,
    pub report_u: bool,
    pub report: ReportKind,
    #[serde(default)]
    pub alphas: Vec<f64>,
    /// Append `κ = e/(h^3.5 √ln(1/h))` of the η L² error.
    #[serde(default)]
    pub kappa: bool,
}

pub const EXPERIMENTS: [&str; 17] = [
    "table2.1",
    "table2.2",
    "table2.3a",
    "table2.3b",
    "table3.1",
    "fig3.1",
    "table3.2",
    "table4.1",
    "remark4.2",
    "table5.1",
    "table5.2",
    "table5.3",
    "table6.1",
    "table6.2a",
    "table6.2b",
    "table6.3a",
    "table6.3b",
];

fn steps(from: usize, to: usize, by: usize) -> Vec<usize> {
    (from..=to).step_by(by).collect()
}

/// Default configuration of a registered experiment.
pub fn lookup(name: &str) -> Result<ExperimentConfig> {
    use InitRule::*;
    const ALL_NORMS: [Norm; 3] = [Norm::L2, Norm::Linf, Norm::H1Full];
    let aform = Elliptic(EllipticMode::AForm);
    let stiff = Elliptic(EllipticMode::StiffnessOnly);
    let base = ExperimentConfig {
        name: name.to_string(),
        kind: ProblemKind::Cb,
        mesh: MeshPreset::Uniform,
        n_list: steps(40, 440, 40),
        eta_degree: 1,
        u_degree: Some(1),
        scheme: Scheme::Rk4,
        k_rule: "h/10".into(),
        horizon: 1.0,
        cases: vec![Case::CbCos],
        eta_init: Interpolate,
        u_init: Some(Interpolate),
        norms: ALL_NORMS.to_vec(),
        times: vec![],
        report_u: true,
        report: ReportKind::Convergence,
        alphas: vec![],
        kappa: false,
    };
    let cfg = match name {
        "table2.1" => base,
        "table2.2" => ExperimentConfig {
            kind: ProblemKind::Scb,
            ..base
        },
        "table2.3a" | "table2.3b" => ExperimentConfig {
            mesh: if name.ends_with('a') { MeshPreset::Ratio1_5 } else { MeshPreset::Ratio150 },
            n_list: if name.ends_with('a') { steps(80, 560, 80) } else { steps(40, 320, 40) },
            k_rule: "dx/10".into(),
            horizon: 0.4,
            cases: vec![Case::CbCubic],
            eta_init: L2Project,
            u_init: Some(L2Project),
            norms: vec![Norm::L2],
            ..base
        },
        "table3.1" | "fig3.1" => ExperimentConfig {
            kind: ProblemKind::Scb,
            eta_degree: 3,
            u_degree: Some(3),
            cases: vec![Case::CbCubic],
            u_init: Some(aform),
            norms: if name == "fig3.1" { vec![Norm::L2] } else { ALL_NORMS.to_vec() },
            report_u: name != "fig3.1",
            kappa: name == "fig3.1",
            ..base
        },
        "table3.2" => ExperimentConfig {
            kind: ProblemKind::Scb,
            n_list: steps(250, 1000, 250),
            eta_degree: 3,
            u_degree: Some(3),
            horizon: 2.5,
            times: vec![0.5, 1.0, 1.5, 2.0, 2.5],
            cases: vec![Case::GaussianTravel],
            u_init: Some(aform),
            norms: vec![Norm::L2],
            report_u: false,
            ..base
        },
        "table4.1" => ExperimentConfig {
            kind: ProblemKind::Scb,
            n_list: vec![400],
            scheme: Scheme::ImprovedEuler,
            k_rule: "h^alpha".into(),
            cases: vec![Case::CbCubic],
            norms: vec![Norm::L2],
            times: vec![0.05, 0.1, 0.3, 0.5, 0.7, 0.8, 0.825, 0.85, 0.9, 0.95, 1.0],
            report_u: false,
            report: ReportKind::Series,
            alphas: vec![1.0, 4.0 / 3.0],
            ..base
        },
        "remark4.2" => ExperimentConfig {
            kind: ProblemKind::Scb,
            n_list: vec![400],
            scheme: Scheme::Euler,
            k_rule: "h^alpha".into(),
            cases: vec![Case::CbCubic],
            norms: vec![Norm::L2],
            report: ReportKind::Sweep,
            alphas: vec![2.0, 1.8, 1.6, 1.4, 1.2],
            ..base
        },
        "table5.1" | "table5.2" | "table5.3" => ExperimentConfig {
            mesh: if name == "table5.3" { MeshPreset::Ratio1_5 } else { MeshPreset::Uniform },
            n_list: if name == "table5.3" { steps(80, 560, 80) } else { steps(40, 140, 20) },
            eta_degree: if name == "table5.2" { 2 } else { 1 },
            u_degree: Some(if name == "table5.2" { 3 } else { 2 }),
            k_rule: if name == "table5.3" { "dx/10" } else { "h/10" }.into(),
            horizon: if name == "table5.3" { 0.4 } else { 1.0 },
            cases: vec![Case::CbQuad],
            eta_init: L2Project,
            u_init: Some(stiff),
            norms: if name == "table5.3" { vec![Norm::L2] } else { ALL_NORMS.to_vec() },
            ..base
        },
        "table6.1" => ExperimentConfig {
            kind: ProblemKind::Advection,
            n_list: steps(50, 500, 50),
            u_degree: None,
            scheme: Scheme::CrankNicolson,
            k_rule: "h/3".into(),
            horizon: 0.5,
            cases: (1..=4).map(Case::Advect).collect(),
            eta_init: L2Project,
            u_init: None,
            norms: vec![Norm::L2],
            report_u: false,
            ..base
        },
        "table6.2a" | "table6.2b" => ExperimentConfig {
            kind: ProblemKind::WaveSystem,
            mesh: if name.ends_with('a') { MeshPreset::Ratio075_05 } else { MeshPreset::Uniform },
            n_list: steps(80, 560, 80),
            k_rule: if name.ends_with('a') { "dx" } else { "h" }.into(),
            horizon: 0.4,
            cases: vec![Case::WaveExp],
            norms: vec![Norm::L2],
            ..base
        },
        "table6.3a" | "table6.3b" => ExperimentConfig {
            kind: ProblemKind::ViscousSystem,
            mesh: if name.ends_with('a') { MeshPreset::Ratio075_05 } else { MeshPreset::Uniform },
            n_list: steps(20, 120, 20),
            k_rule: if name.ends_with('a') { "dx^2/25.6" } else { "h^2/25" }.into(),
            horizon: 0.5,
            cases: vec![Case::CbCubic],
            eta_init: L2Project,
            u_init: Some(L2Project),
            norms: vec![Norm::L2],
            ..base
        },
        _ => return invalid(format!("unknown experiment '{name}'; known: {}", EXPERIMENTS.join(", "))),
    };
    Ok(cfg)
}

pub fn registry() -> Vec<ExperimentConfig> {
    EXPERIMENTS.iter().map(|n| lookup(n).expect("registered")).collect()
}

/// Time-step rule, checked for syntax on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KRule {
    text: String,
    expr: String,
}

impl KRule {
    pub fn parse(text: &str) -> Result<Self> {
        let rule = KRule {
            text: text.to_string(),
            expr: text.replace('Δ', "d"),
        };
        rule.eval_with(0.5, 0.5, 2.0, Some(1.0)).map(|_| rule)
    }

    /// Step for `mesh`; `alpha` is only bound when given.
    pub fn eval(&self, mesh: &Mesh, alpha: Option<f64>) -> Result<f64> {
        let k = self.eval_with(mesh.h_max(), mesh.dx(), mesh.n_elements() as f64, alpha)?;
        if !(k > 0.0 && k.is_finite()) {
            return invalid(format!("time-step rule '{}' gives k = {k} for N = {}", self.text, mesh.n_elements()));
        }
        Ok(k)
    }

    fn eval_with(&self, h: f64, dx: f64, n: f64, alpha: Option<f64>) -> Result<f64> {
        let mut vars: std::collections::BTreeMap<String, f64> =
            [("h", h), ("dx", dx), ("N", n)].map(|(k, v)| (k.to_string(), v)).into();
        if let Some(a) = alpha {
            vars.insert("alpha".into(), a);
        }
        fasteval::ez_eval(&self.expr, &mut vars).map_err(|e| Error::Parse(format!("time-step rule '{}': {e:?}", self.text)))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !EXPERIMENTS.contains(&self.name.as_str()) {
            return invalid(format!("experiment '{}' is not registered", self.name));
        }
        if self.n_list.is_empty() || self.cases.is_empty() || self.norms.is_empty() {
            return invalid("n_list, cases and norms must be non-empty");
        }
        if !(self.horizon > 0.0) {
            return invalid(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.times.iter().any(|&t| !(t > 0.0 && t <= self.horizon)) {
            return invalid("observation times must lie in (0, horizon]");
        }
        if self.kind.has_u() != self.u_degree.is_some() || self.kind.has_u() != self.u_init.is_some() {
            return invalid(format!("u space and init rule must be given exactly when {} has a u unknown", self.kind.name()));
        }
        if self.report == ReportKind::Convergence && self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("n_list must be strictly increasing");
        }
        if self.report != ReportKind::Convergence && self.alphas.is_empty() {
            return invalid("series and sweep reports need alphas");
        }
        if self.kappa && !self.norms.contains(&Norm::L2) {
            return invalid("kappa needs the L2 norm");
        }
        let rule = KRule::parse(&self.k_rule)?;
        for &n in &self.n_list {
            let mesh = self.mesh.build(n)?;
            match self.report {
                ReportKind::Convergence => {
                    rule.eval(&mesh, None)?;
                }
                _ => {
                    for &a in &self.alphas {
                        rule.eval(&mesh, Some(a))?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Overlay the keys of a TOML document onto this configuration.
    pub fn with_overrides(&self, text: &str) -> Result<Self> {
        let over: toml::Table = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut base = toml::Table::try_from(self).map_err(|e| Error::Parse(e.to_string()))?;
        base.extend(over);
        base.try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn observation_times(&self) -> Vec<f64> {
        if self.times.is_empty() {
            vec![self.horizon]
        } else {
            self.times.clone()
        }
    }
}

/// Errors at each observation time, or the blowup time.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    Completed(Vec<(f64, ErrorReport)>),
    Diverged { t: f64, before: Vec<(f64, ErrorReport)> },
}

/// Integrate one case on one mesh and record errors at `times`.
pub fn run_trajectory(cfg: &ExperimentConfig, mesh: &Mesh, case: Case, k: f64, times: &[f64]) -> Result<Trajectory> {
    let problem = SemidiscreteProblem::new(cfg.kind, mesh, cfg.eta_degree, cfg.u_degree, case)?;
    let y0 = problem.initial_state(cfg.eta_init, cfg.u_init)?;
    let spec = StepperSpec::new(cfg.scheme, k)?;
    let horizon = times.iter().cloned().fold(0.0, f64::max);
    let mut log = Vec::with_capacity(times.len());
    let res = integrate(&spec, &problem, y0, horizon, &Observe::At(times.to_vec()), &mut |s| {
        log.push((s.t, problem.errors(s)))
    });
    match res {
        Ok(_) => Ok(Trajectory::Completed(log)),
        Err(Error::Diverged { t }) => Ok(Trajectory::Diverged { t, before: log }),
        Err(e) => Err(e),
    }
}

fn fmt_num(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn column_set(cfg: &ExperimentConfig, times: &[f64]) -> Vec<Column> {
    let mut cols = Vec::new();
    let fields: &[&str] = if cfg.report_u && cfg.kind.has_u() { &["eta", "u"] } else { &["eta"] };
    for case in &cfg.cases {
        let cp = if cfg.cases.len() > 1 { format!("{}_", case.name()) } else { String::new() };
        for t in times {
            let tp = if times.len() > 1 { format!("t{}_", fmt_num(*t)) } else { String::new() };
            for norm in &cfg.norms {
                for f in fields {
                    let label = format!("{cp}{tp}{f}_{}", norm.label());
                    let order = match norm {
                        Norm::L2 => format!("{cp}{tp}{f}_order"),
                        n => format!("{cp}{tp}{f}_{}_order", n.label()),
                    };
                    cols.push(Column::with_order(label, order));
                }
            }
        }
    }
    if cfg.kappa {
        cols.push(Column::plain("kappa"));
    }
    cols
}

fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    let rule = KRule::parse(&cfg.k_rule)?;
    let times = cfg.observation_times();
    let columns = column_set(cfg, &times);
    let with_u = cfg.report_u && cfg.kind.has_u();
    let rows: Vec<Result<RawRow>> = cfg
        .n_list
        .par_iter()
        .map(|&n| {
            let mesh = cfg.mesh.build(n)?;
            let k = rule.eval(&mesh, None)?;
            let mut values = Vec::with_capacity(columns.len());
            let mut diverged_at: Option<f64> = None;
            for &case in &cfg.cases {
                let log = match run_trajectory(cfg, &mesh, case, k, &times)? {
                    Trajectory::Completed(log) => log,
                    Trajectory::Diverged { t, before } => {
                        diverged_at = Some(diverged_at.map_or(t, |d: f64| d.min(t)));
                        before
                    }
                };
                for (i, _) in times.iter().enumerate() {
                    let rep = log.get(i).map(|(_, r)| r);
                    for &norm in &cfg.norms {
                        values.push(rep.map(|r| r.eta.get(norm)));
                        if with_u {
                            values.push(rep.and_then(|r| r.u.map(|u| u.get(norm))));
                        }
                    }
                }
            }
            if cfg.kappa {
                let e = values[cfg.norms.iter().position(|&n| n == Norm::L2).expect("validated") * if with_u { 2 } else { 1 }];
                values.push(match e {
                    Some(e) => Some(kappa_ratio(e, mesh.h_max())?),
                    None => None,
                });
            }
            Ok(RawRow { n, values, diverged_at })
        })
        .collect();
    convergence_orders(columns, rows.into_iter().collect::<Result<_>>()?)
}

/// History of one `k = h^alpha` run.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub alpha: f64,
    pub k: f64,
    /// η L² error at each time, `None` after blowup.
    pub errors: Vec<Option<f64>>,
    pub diverged_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReport {
    pub n: usize,
    pub times: Vec<f64>,
    pub series: Vec<Series>,
}

/// Outcome of one `k = h^alpha` run to the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub k: f64,
    pub eta_l2: Option<f64>,
    pub u_l2: Option<f64>,
    pub diverged_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub scheme: Scheme,
    pub n: usize,
    pub horizon: f64,
    pub rows: Vec<SweepRow>,
}

fn alpha_runs(cfg: &ExperimentConfig, alphas: &[f64], times: &[f64]) -> Result<(usize, Vec<(f64, f64, Trajectory)>)> {
    let n = *cfg.n_list.first().ok_or_else(|| Error::InvalidArgument("empty n_list".into()))?;
    let mesh = cfg.mesh.build(n)?;
    let case = cfg.cases[0];
    let runs: Vec<Result<(f64, f64, Trajectory)>> = alphas
        .par_iter()
        .map(|&a| {
            let k = mesh.h_max().powf(a);
            Ok((a, k, run_trajectory(cfg, &mesh, case, k, times)?))
        })
        .collect();
    Ok((n, runs.into_iter().collect::<Result<_>>()?))
}

/// Run `cfg` at its first N with `k = h^alpha` for each alpha, to the horizon.
pub fn stability_sweep(cfg: &ExperimentConfig, alphas: &[f64]) -> Result<SweepReport> {
    let (n, runs) = alpha_runs(cfg, alphas, &[cfg.horizon])?;
    let rows = runs
        .into_iter()
        .map(|(alpha, k, tr)| match tr {
            Trajectory::Completed(log) => {
                let r = log.last().expect("horizon observed").1;
                SweepRow {
                    alpha,
                    k,
                    eta_l2: Some(r.eta.l2),
                    u_l2: r.u.map(|u| u.l2),
                    diverged_at: None,
                }
            }
            Trajectory::Diverged { t, .. } => SweepRow {
                alpha,
                k,
                eta_l2: None,
                u_l2: None,
                diverged_at: Some(t),
            },
        })
        .collect();
    Ok(SweepReport {
        scheme: cfg.scheme,
        n,
        horizon: cfg.horizon,
        rows,
    })
}

fn run_series(cfg: &ExperimentConfig) -> Result<SeriesReport> {
    let times = cfg.observation_times();
    let (n, runs) = alpha_runs(cfg, &cfg.alphas, &times)?;
    let series = runs
        .into_iter()
        .map(|(alpha, k, tr)| {
            let (log, diverged_at) = match tr {
                Trajectory::Completed(log) => (log, None),
                Trajectory::Diverged { t, before } => (before, Some(t)),
            };
            let errors = (0..times.len()).map(|i| log.get(i).map(|(_, r)| r.eta.l2)).collect();
            Series {
                alpha,
                k,
                errors,
                diverged_at,
            }
        })
        .collect();
    Ok(SeriesReport { n, times, series })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Convergence(ConvergenceTable),
    Series(SeriesReport),
    Sweep(SweepReport),
}

impl Report {
    /// Whether any run hit the divergence threshold.
    pub fn diverged(&self) -> bool {
        match self {
            Report::Convergence(t) => t.any_diverged(),
            Report::Series(s) => s.series.iter().any(|x| x.diverged_at.is_some()),
            Report::Sweep(s) => s.rows.iter().any(|r| r.diverged_at.is_some()),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match self {
            Report::Convergence(t) => render_table(t, format),
            Report::Series(s) => render_grid(&series_grid(s), format),
            Report::Sweep(s) => render_grid(&sweep_grid(s), format),
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    Ok(match cfg.report {
        ReportKind::Convergence => Report::Convergence(run_convergence(cfg)?),
        ReportKind::Series => Report::Series(run_series(cfg)?),
        ReportKind::Sweep => Report::Sweep(stability_sweep(cfg, &cfg.alphas)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

impl Format {
    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            _ => invalid(format!("unknown format '{s}' (csv or markdown)")),
        }
    }
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn opt(x: Option<f64>, f: fn(f64) -> String) -> String {
    x.map(f).unwrap_or_default()
}

fn table_grid(t: &ConvergenceTable) -> Vec<Vec<String>> {
    let with_div = t.any_diverged();
    let mut head = vec!["N".to_string()];
    for c in &t.columns {
        head.push(c.label.clone());
        if let Some(o) = &c.order_label {
            head.push(o.clone());
        }
    }
    if with_div {
        head.push("diverged_at".into());
    }
    let mut grid = vec![head];
    for r in &t.rows {
        let mut line = vec![r.n.to_string()];
        for (i, c) in t.columns.iter().enumerate() {
            line.push(opt(r.values[i], sci));
            if c.order_label.is_some() {
                line.push(opt(r.orders[i], |o| format!("{o:.3}")));
            }
        }
        if with_div {
            line.push(opt(r.diverged_at, |d| format!("{d:.4}")));
        }
        grid.push(line);
    }
    grid
}

fn series_grid(s: &SeriesReport) -> Vec<Vec<String>> {
    let mut head = vec!["t".to_string()];
    head.extend(s.series.iter().map(|x| format!("eta_L2_k=h^{}", fmt_num(x.alpha))));
    let mut grid = vec![head];
    for (i, t) in s.times.iter().enumerate() {
        let mut line = vec![fmt_num(*t)];
        for x in &s.series {
            line.push(match (x.errors[i], x.diverged_at) {
                (Some(e), _) => sci(e),
                (None, Some(d)) => format!("overflow@{d:.4}"),
                (None, None) => String::new(),
            });
        }
        grid.push(line);
    }
    grid
}

fn sweep_grid(s: &SweepReport) -> Vec<Vec<String>> {
    let mut grid = vec![["alpha", "k", "eta_L2", "u_L2", "diverged_at"].map(String::from).to_vec()];
    for r in &s.rows {
        grid.push(vec![
            fmt_num(r.alpha),
            sci(r.k),
            opt(r.eta_l2, sci),
            opt(r.u_l2, sci),
            opt(r.diverged_at, |d| format!("{d:.4}")),
        ]);
    }
    grid
}

pub fn render_grid(grid: &[Vec<String>], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
            for line in grid {
                w.write_record(line).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 cells")
        }
        Format::Markdown => {
            let mut out = String::new();
            for (i, line) in grid.iter().enumerate() {
                let _ = writeln!(out, "| {} |", line.join(" | "));
                if i == 0 {
                    let _ = writeln!(out, "|{}", "---|".repeat(line.len()));
                }
            }
            out
        }
    }
}

pub fn render_table(table: &ConvergenceTable, format: Format) -> String {
    render_grid(&table_grid(table), format)
}

/// Write `table` to `path`; I/O failures carry the path.
pub fn emit_table(table: &ConvergenceTable, path: &Path, format: Format) -> Result<()> {
    write_text(path, &render_table(table, format))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
