//! Semidiscrete Galerkin right-hand sides with manufactured forcing.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assembly::{AssembledForms, EllipticMode};
use crate::cases::Case;
use crate::convergence::{error_norms, ErrorReport};
use crate::error::{invalid, Result};
use crate::integrators::OdeSystem;
use crate::mesh::Mesh;
use crate::spline::{build_space, interpolate, Boundary, FemField, SpaceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// η_t + u_x + (ηu)_x = f, u_t + η_x + uu_x − ⅓u_xxt = g.
    Cb,
    /// η_t + u_x + ½(ηu)_x = f, u_t + η_x + (3/2)uu_x + ½ηη_x − ⅓u_xxt = g.
    Scb,
    /// η_t + u_x = f, u_t + η_x − ⅓u_xxt = g.
    LinearizedCb,
    /// η_t + η_x = 0 with η(0, t) = 0.
    Advection,
    /// η_t + (uη)_x = f with u prescribed by the case and vanishing at both ends.
    VariableAdvection,
    /// η_t + u_x = f, u_t + η_x = g with η(0, t) = 0, u(1, t) = 0.
    WaveSystem,
    /// η_t + u_x = f, u_t + η_x − u_xx = g with u = 0 at both ends.
    ViscousSystem,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 7] = [
        ProblemKind::Cb,
        ProblemKind::Scb,
        ProblemKind::LinearizedCb,
        ProblemKind::Advection,
        ProblemKind::VariableAdvection,
        ProblemKind::WaveSystem,
        ProblemKind::ViscousSystem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Cb => "cb",
            ProblemKind::Scb => "scb",
            ProblemKind::LinearizedCb => "linearized-cb",
            ProblemKind::Advection => "advection",
            ProblemKind::VariableAdvection => "variable-advection",
            ProblemKind::WaveSystem => "wave-system",
            ProblemKind::ViscousSystem => "viscous-system",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| crate::Error::InvalidArgument(format!("unknown problem kind '{s}'")))
    }

    pub fn is_linear(self) -> bool {
        !matches!(self, ProblemKind::Cb | ProblemKind::Scb)
    }

    /// Whether u is an unknown of the semidiscrete system.
    pub fn has_u(self) -> bool {
        !matches!(self, ProblemKind::Advection | ProblemKind::VariableAdvection)
    }

    /// Nonlinear coefficients (α, β, γ) in f: α(ηu)_x and g: βuu_x + γηη_x.
    fn coefficients(self) -> (f64, f64, f64) {
        match self {
            ProblemKind::Cb => (1.0, 1.0, 0.0),
            ProblemKind::Scb => (0.5, 1.5, 0.5),
            _ => (0.0, 0.0, 0.0),
        }
    }

    fn boundaries(self) -> (Boundary, Option<Boundary>) {
        match self {
            ProblemKind::Cb | ProblemKind::Scb | ProblemKind::LinearizedCb | ProblemKind::ViscousSystem => {
                (Boundary::Free, Some(Boundary::ZeroBoth))
            }
            ProblemKind::Advection => (Boundary::ZeroLeft, None),
            ProblemKind::VariableAdvection => (Boundary::Free, None),
            ProblemKind::WaveSystem => (Boundary::ZeroLeft, Some(Boundary::ZeroRight)),
        }
    }
}

/// Residual forcing `(f, g)` that makes `case` an exact solution of `kind`.
pub fn forcing(case: Case, kind: ProblemKind, x: f64, t: f64) -> (f64, f64) {
    let e = case.fields(x, t);
    let (a, b, c) = kind.coefficients();
    match kind {
        ProblemKind::Cb | ProblemKind::Scb | ProblemKind::LinearizedCb => (
            e.eta_t + e.u_x + a * (e.eta_x * e.u + e.eta * e.u_x),
            e.u_t + e.eta_x + b * e.u * e.u_x + c * e.eta * e.eta_x - e.u_xxt / 3.0,
        ),
        ProblemKind::Advection => (e.eta_t + e.eta_x, 0.0),
        ProblemKind::VariableAdvection => (e.eta_t + e.u_x * e.eta + e.u * e.eta_x, 0.0),
        ProblemKind::WaveSystem => (e.eta_t + e.u_x, e.u_t + e.eta_x),
        ProblemKind::ViscousSystem => (e.eta_t + e.u_x, e.u_t + e.eta_x - e.u_xx),
    }
}

/// How an initial coefficient vector is produced from exact data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitRule {
    L2Project,
    Interpolate,
    Elliptic(EllipticMode),
}

impl InitRule {
    pub fn name(self) -> &'static str {
        match self {
            InitRule::L2Project => "l2-project",
            InitRule::Interpolate => "interpolate",
            InitRule::Elliptic(EllipticMode::AForm) => "elliptic-aform",
            InitRule::Elliptic(EllipticMode::StiffnessOnly) => "elliptic-stiffness",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        [
            InitRule::L2Project,
            InitRule::Interpolate,
            InitRule::Elliptic(EllipticMode::AForm),
            InitRule::Elliptic(EllipticMode::StiffnessOnly),
        ]
        .into_iter()
        .find(|r| r.name() == s)
        .ok_or_else(|| crate::Error::InvalidArgument(format!("unknown init rule '{s}'")))
    }
}

impl From<InitRule> for String {
    fn from(r: InitRule) -> String {
        r.name().into()
    }
}

impl TryFrom<String> for InitRule {
    type Error = crate::Error;
    fn try_from(s: String) -> Result<InitRule> {
        InitRule::from_name(&s)
    }
}

/// Time and stacked coefficients `[η; u]`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SemidiscreteProblem {
    pub kind: ProblemKind,
    pub case: Case,
    pub forcing: bool,
    pub eta: AssembledForms,
    pub u: Option<AssembledForms>,
}

impl SemidiscreteProblem {
    /// Build spaces of the given degrees with the boundary pairing `kind` requires.
    pub fn new(kind: ProblemKind, mesh: &Mesh, eta_degree: usize, u_degree: Option<usize>, case: Case) -> Result<Self> {
        let (be, bu) = kind.boundaries();
        let eta = Arc::new(build_space(mesh, SpaceSpec::new(eta_degree, be))?);
        let u = match (bu, u_degree) {
            (Some(b), Some(d)) => Some(Arc::new(build_space(mesh, SpaceSpec::new(d, b))?)),
            (None, None) => None,
            _ => return invalid(format!("problem kind {} needs {} u space", kind.name(), if bu.is_some() { "a" } else { "no" })),
        };
        Self::with_spaces(kind, eta, u, case)
    }

    pub fn with_spaces(
        kind: ProblemKind,
        eta: Arc<crate::spline::SplineSpace>,
        u: Option<Arc<crate::spline::SplineSpace>>,
        case: Case,
    ) -> Result<Self> {
        let (be, bu) = kind.boundaries();
        if eta.spec().boundary != be {
            return invalid(format!("{} needs an η space with boundary {be:?}", kind.name()));
        }
        if u.as_ref().map(|s| s.spec().boundary) != bu {
            return invalid(format!("{} needs a u space with boundary {bu:?}", kind.name()));
        }
        if let Some(us) = &u {
            if us.mesh().breakpoints() != eta.mesh().breakpoints() {
                return invalid("η and u spaces must share one mesh");
            }
        }
        Ok(SemidiscreteProblem {
            kind,
            case,
            forcing: true,
            eta: AssembledForms::new(eta)?,
            u: u.map(AssembledForms::new).transpose()?,
        })
    }

    pub fn without_forcing(mut self) -> Self {
        self.forcing = false;
        self
    }

    pub fn n_eta(&self) -> usize {
        self.eta.dim()
    }

    pub fn n_u(&self) -> usize {
        self.u.as_ref().map_or(0, |u| u.dim())
    }

    pub fn eta_field(&self, s: &State) -> FemField {
        FemField {
            space: self.eta.space.clone(),
            coeffs: s.y[..self.n_eta()].to_vec(),
        }
    }

    pub fn u_field(&self, s: &State) -> Option<FemField> {
        self.u.as_ref().map(|u| FemField {
            space: u.space.clone(),
            coeffs: s.y[self.n_eta()..].to_vec(),
        })
    }

    pub fn initial_state(&self, eta_rule: InitRule, u_rule: Option<InitRule>) -> Result<State> {
        let c = self.case;
        let mut y = init_component(&self.eta, eta_rule, &|x| c.eta0(x), &|x| c.eta0_x(x))?.coeffs;
        if let Some(uf) = &self.u {
            let rule = u_rule.ok_or_else(|| crate::Error::InvalidArgument("missing u init rule".into()))?;
            y.extend(init_component(uf, rule, &|x| c.u0(x), &|x| c.u0_x(x))?.coeffs);
        }
        Ok(State { t: 0.0, y })
    }

    /// Errors of a state against the case's exact fields at `s.t`.
    pub fn errors(&self, s: &State) -> ErrorReport {
        let (c, t) = (self.case, s.t);
        let eta = error_norms(&self.eta_field(s), &|x| c.fields(x, t).eta, &|x| c.fields(x, t).eta_x);
        let u = self
            .u_field(s)
            .map(|f| error_norms(&f, &|x| c.fields(x, t).u, &|x| c.fields(x, t).u_x));
        ErrorReport { eta, u }
    }

    /// `‖η_h‖² + ‖u_h‖₁²`, conserved by the homogeneous symmetric system.
    pub fn energy(&self, y: &[f64]) -> f64 {
        let ne = self.n_eta();
        let mut e = self.eta.mass.inner(&y[..ne], &y[..ne]);
        if let Some(u) = &self.u {
            e += u.aform.inner(&y[ne..], &y[ne..]);
        }
        e
    }

    /// `2(η_h, η̇_h) + 2a(u_h, u̇_h)`.
    pub fn energy_rate(&self, y: &[f64], dy: &[f64]) -> f64 {
        let ne = self.n_eta();
        let mut e = 2.0 * self.eta.mass.inner(&y[..ne], &dy[..ne]);
        if let Some(u) = &self.u {
            e += 2.0 * u.aform.inner(&y[ne..], &dy[ne..]);
        }
        e
    }

    /// Right-hand side loads `(b_η, b_u)` before the mass/a-form solves.
    pub fn loads(&self, t: f64, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let ne = self.n_eta();
        let te = &self.eta.table;
        let (ev, ed) = te.eval_all(&y[..ne]);
        let npts = ev.len();
        let (a, b, c) = self.kind.coefficients();
        let mut ge = vec![0.0; npts];
        let mut gu = vec![0.0; npts];
        let (uv, ud) = match &self.u {
            Some(u) => u.table.eval_all(&y[ne..]),
            None => (vec![0.0; npts], vec![0.0; npts]),
        };
        for k in 0..npts {
            let x = te.points[k].x;
            let (f, g) = if self.forcing { forcing(self.case, self.kind, x, t) } else { (0.0, 0.0) };
            match self.kind {
                ProblemKind::Advection => ge[k] = f - ed[k],
                ProblemKind::VariableAdvection => {
                    let e = self.case.fields(x, t);
                    ge[k] = f - (e.u_x * ev[k] + e.u * ed[k]);
                }
                _ => {
                    ge[k] = f - ud[k] - a * (ed[k] * uv[k] + ev[k] * ud[k]);
                    gu[k] = g - ed[k] - b * uv[k] * ud[k] - c * ev[k] * ed[k];
                }
            }
        }
        let be = te.load(ne, &ge, None);
        let bu = match &self.u {
            Some(u) => {
                let mut bu = u.table.load(u.dim(), &gu, None);
                if self.kind == ProblemKind::ViscousSystem {
                    let su = u.stiffness().expect("zero space").mul_vec(&y[ne..]);
                    bu.iter_mut().zip(su).for_each(|(b, s)| *b -= s);
                }
                bu
            }
            None => Vec::new(),
        };
        (be, bu)
    }

    pub fn rhs(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.n_eta() + self.n_u() {
            return invalid(format!("state length {} does not match problem dimension", y.len()));
        }
        let (be, bu) = self.loads(t, y);
        let mut dy = self.eta.mass_chol.solve(&be)?;
        if let Some(u) = &self.u {
            let du = match self.kind {
                ProblemKind::Cb | ProblemKind::Scb | ProblemKind::LinearizedCb => u.aform_chol.solve(&bu)?,
                _ => u.mass_chol.solve(&bu)?,
            };
            dy.extend(du);
        }
        Ok(dy)
    }
}

fn init_component(
    forms: &AssembledForms,
    rule: InitRule,
    f: &dyn Fn(f64) -> f64,
    df: &dyn Fn(f64) -> f64,
) -> Result<FemField> {
    match rule {
        InitRule::L2Project => forms.l2_project(f),
        InitRule::Interpolate => interpolate(&forms.space, f, df),
        InitRule::Elliptic(mode) => forms.elliptic_project(f, df, mode),
    }
}

impl OdeSystem for SemidiscreteProblem {
    fn dim(&self) -> usize {
        self.n_eta() + self.n_u()
    }

    fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        self.rhs(t, y)
    }

    fn is_linear(&self) -> bool {
        self.kind.is_linear()
    }
}
