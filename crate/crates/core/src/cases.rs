//! Closed-form manufactured solutions.

use std::f64::consts::PI;

use crate::error::Result;

/// Exact fields and the partial derivatives the forcing terms need.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExactFields {
    pub eta: f64,
    pub eta_t: f64,
    pub eta_x: f64,
    pub u: f64,
    pub u_t: f64,
    pub u_x: f64,
    pub u_xx: f64,
    pub u_xxt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Case {
    /// η = e^{2t}(cos πx + x + 2), u = e^{-xt} x sin πx.
    CbCos,
    /// η = e^{2t}(cos πx + x + 2), u = e^{xt}(sin πx + x³ − x²).
    CbCubic,
    /// η = e^{2t}(cos πx + x² + 2), u = e^{xt}(sin πx + x³ − x²).
    CbQuad,
    /// η = ½ exp(−144(x − ½ − t/5)²), u = 6(√(η+1) − 1) x(x−1).
    GaussianTravel,
    /// η = x e^{x(t+1)}, u = (x − 1) e^{xt}.
    WaveExp,
    /// η = η₀(x − t) for x > t and 0 otherwise, with η₀ = x^k eˣ; no u.
    Advect(u32),
    /// η = e^{t}(cos πx + x + 2) carried by the prescribed velocity u = sin(πx)(1 + t/2).
    VarAdvect,
    /// η ≡ 1, u ≡ 0.
    Rest,
}

impl Case {
    pub const ALL: [Case; 11] = [
        Case::CbCos,
        Case::CbCubic,
        Case::CbQuad,
        Case::GaussianTravel,
        Case::WaveExp,
        Case::Advect(1),
        Case::Advect(2),
        Case::Advect(3),
        Case::Advect(4),
        Case::VarAdvect,
        Case::Rest,
    ];

    pub fn name(self) -> String {
        match self {
            Case::CbCos => "cb-cos".into(),
            Case::CbCubic => "cb-cubic".into(),
            Case::CbQuad => "cb-quad".into(),
            Case::GaussianTravel => "gaussian-travel".into(),
            Case::WaveExp => "wave-exp".into(),
            Case::Advect(k) => format!("advect-x{k}exp"),
            Case::VarAdvect => "varadvect-cos".into(),
            Case::Rest => "rest".into(),
        }
    }

    pub fn from_name(name: &str) -> Result<Case> {
        Case::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| crate::Error::InvalidArgument(format!("unknown manufactured case '{name}'")))
    }

    pub fn fields(self, x: f64, t: f64) -> ExactFields {
        match self {
            Case::CbCos => {
                let (s, c) = (PI * x).sin_cos();
                let w = [x * s, s + PI * x * c, 2.0 * PI * c - PI * PI * x * s];
                with_eta_cos(x, t, false, exp_modulated(x, t, -1.0, w))
            }
            Case::CbCubic | Case::CbQuad => {
                let (s, c) = (PI * x).sin_cos();
                let w = [
                    s + x * x * x - x * x,
                    PI * c + 3.0 * x * x - 2.0 * x,
                    -PI * PI * s + 6.0 * x - 2.0,
                ];
                with_eta_cos(x, t, self == Case::CbQuad, exp_modulated(x, t, 1.0, w))
            }
            Case::GaussianTravel => gaussian(x, t),
            Case::WaveExp => {
                let ea = (x * (t + 1.0)).exp();
                let eu = (x * t).exp();
                let a = 1.0 + (x - 1.0) * t;
                ExactFields {
                    eta: x * ea,
                    eta_t: x * x * ea,
                    eta_x: ea * (1.0 + x * (t + 1.0)),
                    u: (x - 1.0) * eu,
                    u_t: x * (x - 1.0) * eu,
                    u_x: eu * a,
                    u_xx: eu * (2.0 * t + (x - 1.0) * t * t),
                    u_xxt: x * eu * (2.0 * t + (x - 1.0) * t * t) + eu * (2.0 + 2.0 * (x - 1.0) * t),
                }
            }
            Case::Advect(k) => {
                let z = x - t;
                if z <= 0.0 {
                    return ExactFields::default();
                }
                let (v, d) = xk_exp(k, z);
                ExactFields {
                    eta: v,
                    eta_t: -d,
                    eta_x: d,
                    ..Default::default()
                }
            }
            Case::VarAdvect => {
                let (s, c) = (PI * x).sin_cos();
                let e = t.exp();
                let eta = e * (c + x + 2.0);
                let m = 1.0 + 0.5 * t;
                ExactFields {
                    eta,
                    eta_t: eta,
                    eta_x: e * (1.0 - PI * s),
                    u: s * m,
                    u_t: 0.5 * s,
                    u_x: PI * c * m,
                    u_xx: -PI * PI * s * m,
                    u_xxt: -0.5 * PI * PI * s,
                }
            }
            Case::Rest => ExactFields {
                eta: 1.0,
                ..Default::default()
            },
        }
    }

    pub fn eta0(self, x: f64) -> f64 {
        self.fields(x, 0.0).eta
    }

    pub fn eta0_x(self, x: f64) -> f64 {
        self.fields(x, 0.0).eta_x
    }

    pub fn u0(self, x: f64) -> f64 {
        self.fields(x, 0.0).u
    }

    pub fn u0_x(self, x: f64) -> f64 {
        self.fields(x, 0.0).u_x
    }
}

impl From<Case> for String {
    fn from(c: Case) -> String {
        c.name()
    }
}

impl TryFrom<String> for Case {
    type Error = crate::Error;
    fn try_from(s: String) -> Result<Case> {
        Case::from_name(&s)
    }
}

/// u = e^{a x t} w(x) with `w = [w, w', w'']`; fills the u-derivatives.
fn exp_modulated(x: f64, t: f64, a: f64, w: [f64; 3]) -> ExactFields {
    let e = (a * x * t).exp();
    let xx = t * t * w[0] + 2.0 * a * t * w[1] + w[2];
    ExactFields {
        u: e * w[0],
        u_t: a * x * e * w[0],
        u_x: e * (a * t * w[0] + w[1]),
        u_xx: e * xx,
        u_xxt: a * x * e * xx + e * (2.0 * t * w[0] + 2.0 * a * w[1]),
        ..Default::default()
    }
}

/// η = e^{2t}(cos πx + p(x) + 2) with p = x or x².
fn with_eta_cos(x: f64, t: f64, quadratic: bool, mut f: ExactFields) -> ExactFields {
    let e = (2.0 * t).exp();
    let (p, dp) = if quadratic { (x * x, 2.0 * x) } else { (x, 1.0) };
    f.eta = e * ((PI * x).cos() + p + 2.0);
    f.eta_t = 2.0 * f.eta;
    f.eta_x = e * (-PI * (PI * x).sin() + dp);
    f
}

fn gaussian(x: f64, t: f64) -> ExactFields {
    const A: f64 = 144.0;
    const C: f64 = 0.2;
    let xi = x - 0.5 - C * t;
    let g = 0.5 * (-A * xi * xi).exp();
    let b = 2.0 * A;
    // derivatives of g in ξ
    let g1 = -b * xi * g;
    let g2 = (-b + b * b * xi * xi) * g;
    let g3 = (3.0 * b * b * xi - b * b * b * xi * xi * xi) * g;
    let (eta, eta_x, eta_xx) = (g, g1, g2);
    let (eta_t, eta_xt, eta_xxt) = (-C * g1, -C * g2, -C * g3);

    let r = (eta + 1.0).sqrt();
    let r3 = r * r * r;
    let r5 = r3 * r * r;
    let rr = r - 1.0;
    let rx = eta_x / (2.0 * r);
    let rt = eta_t / (2.0 * r);
    let rxx = eta_xx / (2.0 * r) - eta_x * eta_x / (4.0 * r3);
    let rxt = eta_xt / (2.0 * r) - eta_x * eta_t / (4.0 * r3);
    let rxxt = eta_xxt / (2.0 * r) - eta_xx * eta_t / (4.0 * r3) - eta_x * eta_xt / (2.0 * r3)
        + 3.0 * eta_x * eta_x * eta_t / (8.0 * r5);
    let (q, q1, q2) = (x * (x - 1.0), 2.0 * x - 1.0, 2.0);
    ExactFields {
        eta,
        eta_t,
        eta_x,
        u: 6.0 * rr * q,
        u_t: 6.0 * rt * q,
        u_x: 6.0 * (rx * q + rr * q1),
        u_xx: 6.0 * (rxx * q + 2.0 * rx * q1 + rr * q2),
        u_xxt: 6.0 * (rxxt * q + 2.0 * rxt * q1 + rt * q2),
    }
}

/// `(z^k e^z, d/dz z^k e^z)`.
fn xk_exp(k: u32, z: f64) -> (f64, f64) {
    let e = z.exp();
    let p = z.powi(k as i32);
    let dp = k as f64 * z.powi(k as i32 - 1);
    (p * e, (p + dp) * e)
}
