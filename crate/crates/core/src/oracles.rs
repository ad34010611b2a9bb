//! Superapproximation and superconvergence diagnostics measured over mesh families.
//!
//! Each diagnostic computes a quantity on a sequence of meshes and fits its decay exponent
//! in `h`. The quantities are the residual functionals that make the Galerkin error analysis
//! on uniform meshes sharper than the generic approximation order.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::assembly::{AssembledForms, EllipticMode};
use crate::error::{invalid, Result};
use crate::mesh::{Mesh, MeshPreset};
use crate::quadrature::QuadratureRule;
use crate::spline::{build_space, interpolate, Boundary, FemField, SpaceSpec};

/// A function with its derivative.
#[derive(Clone, Copy)]
pub struct Smooth<'a> {
    pub f: &'a (dyn Fn(f64) -> f64 + Sync),
    pub df: &'a (dyn Fn(f64) -> f64 + Sync),
}

/// Samples `(h, q)` and the least-squares slope of `ln q` against `ln h`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayMeasurement {
    pub samples: Vec<(f64, f64)>,
    pub exponent: f64,
}

/// Number of finest samples used by the fit.
pub const FIT_POINTS: usize = 4;

impl DecayMeasurement {
    pub fn fit(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 3 {
            return invalid(format!("a decay fit needs at least 3 samples, got {}", samples.len()));
        }
        if samples.iter().any(|&(h, q)| !(h > 0.0 && q > 0.0 && q.is_finite())) {
            return invalid("decay samples must be positive and finite");
        }
        let tail = &samples[samples.len().saturating_sub(FIT_POINTS)..];
        let n = tail.len() as f64;
        let (lx, ly): (Vec<f64>, Vec<f64>) = tail.iter().map(|&(h, q)| (h.ln(), q.ln())).unzip();
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
        let exponent = sxy / sxx;
        if !exponent.is_finite() {
            return invalid("decay fit needs distinct mesh sizes");
        }
        Ok(DecayMeasurement { samples, exponent })
    }
}

/// How the error `ε = v − Πv` is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projector {
    Interpolant,
    L2,
    Elliptic(EllipticMode),
}

/// Spaces of a weighted residual: `ψ ∈ target` solves `(ψ, φ) = ((wε)′, φ)` for `ε = v − Πv`, `Πv ∈ source`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSetup {
    pub target: SpaceSpec,
    pub source: SpaceSpec,
    pub projector: Projector,
    pub mesh: MeshPreset,
    /// Allow a non-uniform mesh, to show the cancellation is lost there.
    pub negative_control: bool,
}

fn forms(mesh: &Mesh, spec: SpaceSpec) -> Result<AssembledForms> {
    AssembledForms::new(Arc::new(build_space(mesh, spec)?))
}

fn project(f: &AssembledForms, p: Projector, v: Smooth) -> Result<FemField> {
    match p {
        Projector::Interpolant => interpolate(&f.space, v.f, v.df),
        Projector::L2 => f.l2_project(v.f),
        Projector::Elliptic(mode) => f.elliptic_project(v.f, v.df, mode),
    }
}

/// `‖ψ‖` with `ψ = M⁻¹ b`, computed as `(bᵀψ)^{1/2}`.
fn riesz_norm(f: &AssembledForms, b: &[f64]) -> Result<f64> {
    let psi = f.mass_chol.solve(b)?;
    Ok(b.iter().zip(&psi).map(|(a, c)| a * c).sum::<f64>().max(0.0).sqrt())
}

fn weighted_residual_at(setup: &ResidualSetup, n: usize, v: Smooth, w: Smooth) -> Result<f64> {
    let mesh = setup.mesh.build(n)?;
    let tgt = forms(&mesh, setup.target)?;
    let src = forms(&mesh, setup.source)?;
    let pv = project(&src, setup.projector, v)?;
    let (pe, pde) = src.table.eval_all(&pv.coeffs);
    let g: Vec<f64> = tgt
        .table
        .points
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let (e, de) = ((v.f)(p.x) - pe[k], (v.df)(p.x) - pde[k]);
            (w.df)(p.x) * e + (w.f)(p.x) * de
        })
        .collect();
    riesz_norm(&tgt, &tgt.table.load(tgt.dim(), &g, None))
}

/// Decay of `‖ψ‖` where `(ψ, φ) = ((w·(v − Πv))′, φ)` for every `φ` in the target space.
pub fn weighted_interp_residual(setup: &ResidualSetup, v: Smooth, w: Smooth, ns: &[usize]) -> Result<DecayMeasurement> {
    if setup.mesh != MeshPreset::Uniform && !setup.negative_control {
        return invalid(format!(
            "the weighted residual bound holds on uniform meshes; '{}' needs the negative-control flag",
            setup.mesh.name()
        ));
    }
    let samples = ns
        .iter()
        .map(|&n| Ok((setup.mesh.build(n)?.h_max(), weighted_residual_at(setup, n, v, w)?)))
        .collect::<Result<Vec<_>>>()?;
    DecayMeasurement::fit(samples)
}

/// Decay of `‖ζ‖` where `(ζ, φ) = (v − Pv, φ′)` over P1 functions vanishing at `x = 0`,
/// `P` the L² projection onto that space.
pub fn one_sided_residual(v: Smooth, ns: &[usize]) -> Result<DecayMeasurement> {
    let spec = SpaceSpec::new(1, Boundary::ZeroLeft);
    let samples = ns
        .iter()
        .map(|&n| {
            let mesh = crate::mesh::uniform_mesh(n)?;
            let f = forms(&mesh, spec)?;
            let pv = f.l2_project(v.f)?;
            let (pe, _) = f.table.eval_all(&pv.coeffs);
            let rho: Vec<f64> = f.table.points.iter().zip(&pe).map(|(p, e)| (v.f)(p.x) - e).collect();
            let zero = vec![0.0; rho.len()];
            Ok((mesh.h_max(), riesz_norm(&f, &f.table.load(f.dim(), &zero, Some(&rho)))?))
        })
        .collect::<Result<Vec<_>>>()?;
    DecayMeasurement::fit(samples)
}

/// Moment and midpoint-slope decay of `ρ = η − Pη` for P1 on uniform meshes.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentDiagnostics {
    /// `max_i |∫_{I_i} ρ|`.
    pub moments: DecayMeasurement,
    /// `max_i |ρ′(x_{i+1/2})|`.
    pub midpoint_slopes: DecayMeasurement,
    /// `max |∫_{I_i} ρ|` over elements at distance at least `c·h·ln(1/h)` from both ends.
    pub interior_moments: DecayMeasurement,
}

/// Default interior distance factor `c` in `c·h·ln(1/h)`.
pub const INTERIOR_FACTOR: f64 = 2.0;

/// `(global moment max, midpoint slope max, interior moment max)` on one uniform mesh.
fn moments_at(eta: Smooth, n: usize, factor: f64) -> Result<(f64, f64, f64)> {
    let mesh = crate::mesh::uniform_mesh(n)?;
    let f = forms(&mesh, SpaceSpec::new(1, Boundary::Free))?;
    let c = f.l2_project(eta.f)?.coeffs;
    let q = QuadratureRule::gauss_legendre(crate::convergence::NORM_POINTS);
    let bp = mesh.breakpoints();
    let h = mesh.h_max();
    let margin = factor * h * (1.0 / h).ln();
    let (mut gm, mut sl, mut im) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        let (a, b) = (bp[i], bp[i + 1]);
        let m = q.integrate(a, b, eta.f) - 0.5 * (b - a) * (c[i] + c[i + 1]);
        gm = gm.max(m.abs());
        let mid = 0.5 * (a + b);
        sl = sl.max(((eta.df)(mid) - (c[i + 1] - c[i]) / (b - a)).abs());
        if a >= margin && 1.0 - b >= margin {
            im = im.max(m.abs());
        }
    }
    if im == 0.0 {
        return invalid(format!("N = {n} leaves no element farther than {margin:.3} from the boundary"));
    }
    Ok((gm, sl, im))
}

pub fn projection_moment_diagnostics(eta: Smooth, ns: &[usize]) -> Result<MomentDiagnostics> {
    projection_moment_diagnostics_with(eta, ns, INTERIOR_FACTOR)
}

/// As [`projection_moment_diagnostics`] with interior distance `factor·h·ln(1/h)`.
pub fn projection_moment_diagnostics_with(eta: Smooth, ns: &[usize], factor: f64) -> Result<MomentDiagnostics> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        rows.push((1.0 / n as f64, moments_at(eta, n, factor)?));
    }
    let pick = |k: usize| rows.iter().map(|(h, r)| (*h, [r.0, r.1, r.2][k])).collect::<Vec<_>>();
    Ok(MomentDiagnostics {
        moments: DecayMeasurement::fit(pick(0))?,
        midpoint_slopes: DecayMeasurement::fit(pick(1))?,
        interior_moments: DecayMeasurement::fit(pick(2))?,
    })
}

/// Which projection defines `σ = u − Πu` in [`orthogonality_defect_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectProjector {
    /// Stiffness-form projection, for which the defect vanishes.
    Elliptic,
    /// L² projection onto the same space; a negative control.
    L2,
}

/// Largest `|(σ′, φ)|` over hats `φ` and largest `|(ρ′, ψ)|` over quadratics `ψ` vanishing at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityDefect {
    pub sigma: f64,
    pub rho: f64,
}

impl OrthogonalityDefect {
    pub fn max(&self) -> f64 {
        self.sigma.max(self.rho)
    }
}

pub fn orthogonality_defect(u: Smooth, n: usize) -> Result<OrthogonalityDefect> {
    orthogonality_defect_with(u, u, n, DefectProjector::Elliptic)
}

/// `σ = u − Πu` with `Πu` in quadratic splines vanishing at both ends, `ρ = η − Pη` with `P` onto hats.
pub fn orthogonality_defect_with(u: Smooth, eta: Smooth, n: usize, proj: DefectProjector) -> Result<OrthogonalityDefect> {
    let mesh = crate::mesh::uniform_mesh(n)?;
    let p1 = forms(&mesh, SpaceSpec::new(1, Boundary::Free))?;
    let q0 = forms(&mesh, SpaceSpec::new(2, Boundary::ZeroBoth))?;
    let ru = match proj {
        DefectProjector::Elliptic => q0.elliptic_project(u.f, u.df, EllipticMode::StiffnessOnly)?,
        DefectProjector::L2 => q0.l2_project(u.f)?,
    };
    let (_, dru) = q0.table.eval_all(&ru.coeffs);
    let ds: Vec<f64> = q0.table.points.iter().zip(&dru).map(|(p, d)| (u.df)(p.x) - d).collect();
    let sigma = p1.table.load(p1.dim(), &ds, None).iter().fold(0.0f64, |m, b| m.max(b.abs()));

    let pe = p1.l2_project(eta.f)?;
    let (_, dpe) = p1.table.eval_all(&pe.coeffs);
    let dr: Vec<f64> = p1.table.points.iter().zip(&dpe).map(|(p, d)| (eta.df)(p.x) - d).collect();
    let rho = q0.table.load(q0.dim(), &dr, None).iter().fold(0.0f64, |m, b| m.max(b.abs()));
    Ok(OrthogonalityDefect { sigma, rho })
}

/// Interior nodal behaviour of `e = v − R_h v`, `R_h` the a-form projection onto cubics vanishing at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalSuperconvergence {
    /// `max |e′(x_i)|` over interior nodes.
    pub derivative: DecayMeasurement,
    /// `max |e(x_{i+1}) − e(x_i)|` over interior elements.
    pub increment: DecayMeasurement,
}

pub fn elliptic_node_superconvergence(v: Smooth, ns: &[usize], factor: f64) -> Result<NodalSuperconvergence> {
    let mut d = Vec::with_capacity(ns.len());
    let mut inc = Vec::with_capacity(ns.len());
    for &n in ns {
        let mesh = crate::mesh::uniform_mesh(n)?;
        let f = forms(&mesh, SpaceSpec::new(3, Boundary::ZeroBoth))?;
        let r = f.elliptic_project(v.f, v.df, EllipticMode::AForm)?;
        let h = mesh.h_max();
        let margin = factor * h * (1.0 / h).ln();
        let bp = mesh.breakpoints();
        let e = |i: usize| -> (f64, f64) {
            let x = bp[i];
            let el = if i == n { n - 1 } else { i };
            let (rv, rd) = r.eval_on(el, x);
            ((v.f)(x) - rv, (v.df)(x) - rd)
        };
        let (mut md, mut mi) = (0.0f64, 0.0f64);
        for i in 0..=n {
            let x = bp[i];
            if x < margin || 1.0 - x < margin {
                continue;
            }
            md = md.max(e(i).1.abs());
            if i < n && 1.0 - bp[i + 1] >= margin {
                mi = mi.max((e(i + 1).0 - e(i).0).abs());
            }
        }
        d.push((h, md));
        inc.push((h, mi));
    }
    Ok(NodalSuperconvergence {
        derivative: DecayMeasurement::fit(d)?,
        increment: DecayMeasurement::fit(inc)?,
    })
}

// Default data for the named diagnostics.

fn v_smooth(x: f64) -> f64 {
    (2.0 * PI * x).sin() + x * x
}
fn dv_smooth(x: f64) -> f64 {
    2.0 * PI * (2.0 * PI * x).cos() + 2.0 * x
}
fn w_affine(x: f64) -> f64 {
    1.0 + x
}
fn dw_affine(_: f64) -> f64 {
    1.0
}
fn w_bubble(x: f64) -> f64 {
    x * (1.0 - x)
}
fn dw_bubble(x: f64) -> f64 {
    1.0 - 2.0 * x
}
fn u_zero(x: f64) -> f64 {
    (PI * x).sin() * x.exp()
}
fn du_zero(x: f64) -> f64 {
    (PI * (PI * x).cos() + (PI * x).sin()) * x.exp()
}
fn x3_exp(x: f64) -> f64 {
    x.powi(3) * x.exp()
}
fn dx3_exp(x: f64) -> f64 {
    (3.0 * x * x + x.powi(3)) * x.exp()
}

pub const V_SMOOTH: Smooth = Smooth { f: &v_smooth, df: &dv_smooth };
pub const W_AFFINE: Smooth = Smooth { f: &w_affine, df: &dw_affine };
pub const W_BUBBLE: Smooth = Smooth { f: &w_bubble, df: &dw_bubble };
pub const U_ZERO: Smooth = Smooth { f: &u_zero, df: &du_zero };
pub const EXP: Smooth = Smooth { f: &f64::exp, df: &f64::exp };
pub const X3_EXP: Smooth = Smooth { f: &x3_exp, df: &dx3_exp };

/// Default mesh sequence of the named diagnostics.
pub const DEFAULT_NS: [usize; 5] = [16, 32, 64, 128, 256];

const P1: SpaceSpec = SpaceSpec::new(1, Boundary::Free);
const CUBIC: SpaceSpec = SpaceSpec::new(3, Boundary::Free);
const CUBIC0: SpaceSpec = SpaceSpec::new(3, Boundary::ZeroBoth);
const QUAD0: SpaceSpec = SpaceSpec::new(2, Boundary::ZeroBoth);

fn setup(target: SpaceSpec, source: SpaceSpec, projector: Projector) -> ResidualSetup {
    ResidualSetup {
        target,
        source,
        projector,
        mesh: MeshPreset::Uniform,
        negative_control: false,
    }
}

/// Named diagnostics: `(id, description)`.
pub const ORACLES: [(&str, &str); 12] = [
    ("p1-interp", "P1 interpolation error of exp, weight 1+x: ‖ψ‖ = O(h^1.5)"),
    ("p1-interp-vanishing", "P1 interpolation error, weight x(1-x): ‖ψ‖ = O(h^2)"),
    ("p1-interp-quasiuniform", "P1 interpolation error on the ratio-1.5 mesh: cancellation lost, O(h)"),
    ("cubic-interp", "cubic interpolation error of exp, weight 1+x: ‖ψ‖ = O(h^3.5)"),
    ("cubic-interp-vanishing", "cubic interpolation error, weight x(1-x): ‖ψ‖ = O(h^4)"),
    ("cubic-elliptic", "cubic a-form projection error, weight 1+x: ‖ψ‖ = O(h^3.5 sqrt(ln 1/h))"),
    ("p1-l2-advective", "((v ρ)', φ) with ρ = η - Pη, v vanishing at both ends: ‖ζ‖ = O(h^3)"),
    ("p1-stiffness-advective", "((η σ)', φ) with σ = u - R_h u in quadratics: ‖ζ‖ = O(h^3)"),
    ("p1-moments", "P1 L2 projection of exp: moments O(h^4), midpoint slopes O(h^2), interior moments O(h^5)"),
    ("one-sided", "(ρ, φ') over P1 vanishing at 0, η0 = x^3 e^x: ‖ζ‖ = O(h^2)"),
    ("orthogonality", "(σ', φ) and (ρ', ψ) defects for sin(πx)e^x: exact zeros"),
    ("cubic-elliptic-nodes", "interior nodal derivative O(h^4) and increments O(h^5) of v - R_h v"),
];

/// One measured column of an oracle report.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleColumn {
    pub label: String,
    pub values: Vec<f64>,
    /// Fitted exponent, when the column is a decay measurement.
    pub exponent: Option<f64>,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub id: String,
    pub ns: Vec<usize>,
    pub columns: Vec<OracleColumn>,
}

fn decay_column(label: &str, d: DecayMeasurement, expected: &str) -> OracleColumn {
    OracleColumn {
        label: label.into(),
        values: d.samples.iter().map(|s| s.1).collect(),
        exponent: Some(d.exponent),
        expected: expected.into(),
    }
}

/// Run a named diagnostic on `ns` (uniform meshes unless the id says otherwise).
pub fn run_oracle(id: &str, ns: &[usize]) -> Result<OracleReport> {
    use Projector::*;
    let interp = |t, w: Smooth, exp: &str| -> Result<Vec<OracleColumn>> {
        Ok(vec![decay_column("psi", weighted_interp_residual(&setup(t, t, Interpolant), EXP, w, ns)?, exp)])
    };
    let columns = match id {
        "p1-interp" => interp(P1, W_AFFINE, "1.5")?,
        "p1-interp-vanishing" => interp(P1, W_BUBBLE, "2.0")?,
        "p1-interp-quasiuniform" => {
            let s = ResidualSetup {
                mesh: MeshPreset::Ratio1_5,
                negative_control: true,
                ..setup(P1, P1, Interpolant)
            };
            vec![decay_column("psi", weighted_interp_residual(&s, EXP, W_AFFINE, ns)?, "1.0")]
        }
        "cubic-interp" => interp(CUBIC, W_AFFINE, "3.5")?,
        "cubic-interp-vanishing" => interp(CUBIC, W_BUBBLE, "4.0")?,
        "cubic-elliptic" => {
            let s = setup(CUBIC, CUBIC0, Elliptic(EllipticMode::AForm));
            vec![decay_column("psi", weighted_interp_residual(&s, U_ZERO, W_AFFINE, ns)?, "3.5 (times sqrt(ln 1/h))")]
        }
        "p1-l2-advective" => {
            let s = setup(P1, P1, L2);
            vec![decay_column("zeta", weighted_interp_residual(&s, EXP, W_BUBBLE, ns)?, "3.0")]
        }
        "p1-stiffness-advective" => {
            let s = setup(P1, QUAD0, Elliptic(EllipticMode::StiffnessOnly));
            vec![decay_column("zeta", weighted_interp_residual(&s, U_ZERO, W_AFFINE, ns)?, "3.0")]
        }
        "p1-moments" => {
            let m = projection_moment_diagnostics(EXP, ns)?;
            vec![
                decay_column("moment_max", m.moments, "4.0"),
                decay_column("midpoint_slope_max", m.midpoint_slopes, "2.0"),
                decay_column("interior_moment_max", m.interior_moments, "5.0"),
            ]
        }
        "one-sided" => vec![decay_column("zeta", one_sided_residual(X3_EXP, ns)?, "2.0")],
        "orthogonality" => {
            let d = ns
                .iter()
                .map(|&n| orthogonality_defect(U_ZERO, n))
                .collect::<Result<Vec<_>>>()?;
            vec![
                OracleColumn {
                    label: "sigma_defect".into(),
                    values: d.iter().map(|x| x.sigma).collect(),
                    exponent: None,
                    expected: "<= 1e-11".into(),
                },
                OracleColumn {
                    label: "rho_defect".into(),
                    values: d.iter().map(|x| x.rho).collect(),
                    exponent: None,
                    expected: "<= 1e-11".into(),
                },
            ]
        }
        "cubic-elliptic-nodes" => {
            let s = elliptic_node_superconvergence(U_ZERO, ns, INTERIOR_FACTOR)?;
            vec![
                decay_column("node_derivative_max", s.derivative, "4.0"),
                decay_column("node_increment_max", s.increment, "5.0"),
            ]
        }
        _ => {
            let ids: Vec<&str> = ORACLES.iter().map(|o| o.0).collect();
            return invalid(format!("unknown oracle '{id}'; known: {}", ids.join(", ")));
        }
    };
    Ok(OracleReport {
        id: id.into(),
        ns: ns.to_vec(),
        columns,
    })
}

impl OracleReport {
    /// Rows `N, values…`, then the fitted exponents and the expected behaviour.
    pub fn grid(&self) -> Vec<Vec<String>> {
        let mut head = vec!["N".to_string()];
        head.extend(self.columns.iter().map(|c| c.label.clone()));
        let mut grid = vec![head];
        for (i, n) in self.ns.iter().enumerate() {
            let mut row = vec![n.to_string()];
            row.extend(self.columns.iter().map(|c| format!("{:.3e}", c.values[i])));
            grid.push(row);
        }
        let mut fit = vec!["exponent".to_string()];
        fit.extend(self.columns.iter().map(|c| c.exponent.map(|e| format!("{e:.3}")).unwrap_or_default()));
        grid.push(fit);
        let mut exp = vec!["expected".to_string()];
        exp.extend(self.columns.iter().map(|c| c.expected.clone()));
        grid.push(exp);
        grid
    }
}
