//! Explicit Euler, improved Euler, classical RK4 and Crank–Nicolson time stepping.

use nalgebra::{DMatrix, DVector, LU};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::systems::State;

/// Coefficient magnitude treated as overflow.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// `y' = F(t, y)`.
pub trait OdeSystem: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>>;
    /// Affine in `y`, so Crank–Nicolson applies.
    fn is_linear(&self) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Euler,
    ImprovedEuler,
    Rk4,
    CrankNicolson,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Euler, Scheme::ImprovedEuler, Scheme::Rk4, Scheme::CrankNicolson];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Euler => "euler",
            Scheme::ImprovedEuler => "improved-euler",
            Scheme::Rk4 => "rk4",
            Scheme::CrankNicolson => "crank-nicolson",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperSpec {
    pub scheme: Scheme,
    pub k: f64,
}

impl StepperSpec {
    pub fn new(scheme: Scheme, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return invalid(format!("time step must be positive, got {k}"));
        }
        Ok(StepperSpec { scheme, k })
    }
}

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(y, x)| y + a * x).collect()
}

/// `(I + k/2 L)^{-1}` and `I − k/2 L` for `F(t, y) = −L y + F(t, 0)`.
struct CnOperator {
    k: f64,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    explicit: DMatrix<f64>,
}

impl CnOperator {
    fn new<S: OdeSystem + ?Sized>(sys: &S, k: f64) -> Result<Self> {
        let n = sys.dim();
        let f0 = sys.eval(0.0, &vec![0.0; n])?;
        let mut l = DMatrix::<f64>::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let fj = sys.eval(0.0, &e)?;
            e[j] = 0.0;
            for i in 0..n {
                l[(i, j)] = f0[i] - fj[i];
            }
        }
        let id = DMatrix::<f64>::identity(n, n);
        let implicit = &id + &l * (0.5 * k);
        let explicit = &id - &l * (0.5 * k);
        Ok(CnOperator {
            k,
            lu: implicit.lu(),
            explicit,
        })
    }

    fn step<S: OdeSystem + ?Sized>(&self, sys: &S, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        let n = y.len();
        let forcing = sys.eval(t + 0.5 * self.k, &vec![0.0; n])?;
        let rhs = &self.explicit * DVector::from_column_slice(y) + DVector::from_vec(forcing) * self.k;
        let x = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::SingularForm("Crank-Nicolson matrix is singular".into()))?;
        Ok(x.iter().cloned().collect())
    }
}

struct Stepper {
    scheme: Scheme,
    cn: Option<CnOperator>,
}

impl Stepper {
    fn new<S: OdeSystem + ?Sized>(scheme: Scheme, sys: &S) -> Result<Self> {
        if scheme == Scheme::CrankNicolson && !sys.is_linear() {
            return Err(Error::UnsupportedScheme(
                "crank-nicolson is only available for linear problems".into(),
            ));
        }
        Ok(Stepper { scheme, cn: None })
    }

    fn advance<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, y: &[f64], k: f64) -> Result<Vec<f64>> {
        let f = |t: f64, y: &[f64]| sys.eval(t, y);
        match self.scheme {
            Scheme::Euler => Ok(axpy(y, k, &f(t, y)?)),
            Scheme::ImprovedEuler => {
                let y1 = axpy(y, 0.5 * k, &f(t, y)?);
                Ok(axpy(y, k, &f(t + 0.5 * k, &y1)?))
            }
            Scheme::Rk4 => {
                let k1 = f(t, y)?;
                let k2 = f(t + 0.5 * k, &axpy(y, 0.5 * k, &k1))?;
                let k3 = f(t + 0.5 * k, &axpy(y, 0.5 * k, &k2))?;
                let k4 = f(t + k, &axpy(y, k, &k3))?;
                Ok((0..y.len())
                    .map(|i| y[i] + k * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0)
                    .collect())
            }
            Scheme::CrankNicolson => {
                if self.cn.as_ref().map_or(true, |c| c.k != k) {
                    self.cn = Some(CnOperator::new(sys, k)?);
                }
                self.cn.as_ref().unwrap().step(sys, t, y)
            }
        }
    }
}

fn check_divergence(y: &[f64], t: f64) -> Result<()> {
    if y.iter().any(|v| !(v.abs() <= DIVERGENCE_THRESHOLD)) {
        return Err(Error::Diverged { t });
    }
    Ok(())
}

/// One step of length `spec.k`.
pub fn step<S: OdeSystem + ?Sized>(spec: &StepperSpec, sys: &S, state: &State) -> Result<State> {
    if state.y.len() != sys.dim() {
        return invalid("state dimension does not match the system");
    }
    let mut st = Stepper::new(spec.scheme, sys)?;
    let t = state.t + spec.k;
    let y = st.advance(sys, state.t, &state.y, spec.k)?;
    check_divergence(&y, t)?;
    Ok(State { t, y })
}

/// When observers are called.
#[derive(Debug, Clone, PartialEq)]
pub enum Observe {
    Never,
    EveryStep,
    /// Listed times are hit exactly by shortening the step that would pass them.
    At(Vec<f64>),
}

/// Step from `state.t` to `horizon`, shortening the final step to land on it exactly.
///
/// Overflow is reported as [`Error::Diverged`] with the time of the offending step.
pub fn integrate<S: OdeSystem + ?Sized>(
    spec: &StepperSpec,
    sys: &S,
    state: State,
    horizon: f64,
    observe: &Observe,
    observer: &mut dyn FnMut(&State),
) -> Result<State> {
    if !(horizon > state.t) {
        return invalid(format!("horizon {horizon} must exceed the start time {}", state.t));
    }
    if state.y.len() != sys.dim() {
        return invalid("state dimension does not match the system");
    }
    let mut stops: Vec<f64> = match observe {
        Observe::At(ts) => ts.iter().cloned().filter(|&x| x > state.t && x < horizon).collect(),
        _ => vec![],
    };
    stops.sort_by(f64::total_cmp);
    stops.push(horizon);
    let at_stop = matches!(observe, Observe::At(ts) if ts.iter().any(|&x| x == horizon));
    let every = matches!(observe, Observe::EveryStep);

    let mut stepper = Stepper::new(spec.scheme, sys)?;
    let k = spec.k;
    let mut cur = state;
    for (si, &target) in stops.iter().enumerate() {
        let start = cur.t;
        let mut n = 0usize;
        loop {
            let rem = target - (start + n as f64 * k);
            let (kk, last) = if rem <= k * (1.0 + 1e-9) { (rem, true) } else { (k, false) };
            let y = stepper.advance(sys, cur.t, &cur.y, kk)?;
            n += 1;
            let t = if last { target } else { start + n as f64 * k };
            check_divergence(&y, t)?;
            cur = State { t, y };
            if every {
                observer(&cur);
            }
            if last {
                break;
            }
        }
        if !every && (si + 1 < stops.len() || at_stop) {
            observer(&cur);
        }
    }
    Ok(cur)
}
