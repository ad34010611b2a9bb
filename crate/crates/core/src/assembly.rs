//! Matrix and load assembly, and the projections `P`, `R_h` and the operator `A`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::banded::{BandedCholesky, BandedSpd};
use crate::error::{invalid, Error, Result};
use crate::quadrature::QuadratureRule;
use crate::spline::{check_boundary, Boundary, FemField, SplineSpace, MAX_DEGREE};

pub const ASSEMBLY_POINTS: usize = 5;
pub const NO_DOF: usize = usize::MAX;

/// Basis data at one quadrature node; `w` already includes the element length.
#[derive(Debug, Clone, Copy)]
pub struct QPoint {
    pub x: f64,
    pub w: f64,
    pub vals: [f64; MAX_DEGREE + 1],
    pub ders: [f64; MAX_DEGREE + 1],
}

/// Basis functions tabulated at every quadrature node of every element.
#[derive(Debug, Clone)]
pub struct QuadTable {
    pub nq: usize,
    pub nloc: usize,
    /// Space index of each local function, or `NO_DOF` when dropped by the boundary condition.
    pub dofs: Vec<[usize; MAX_DEGREE + 1]>,
    pub points: Vec<QPoint>,
}

impl QuadTable {
    pub fn new(space: &SplineSpace, rule: &QuadratureRule) -> Self {
        let bp = space.mesh().breakpoints();
        let ne = space.mesh().n_elements();
        let nloc = space.degree() + 1;
        let mut dofs = Vec::with_capacity(ne);
        let mut points = Vec::with_capacity(ne * rule.len());
        for e in 0..ne {
            let mut d = [NO_DOF; MAX_DEGREE + 1];
            for (r, slot) in d.iter_mut().enumerate().take(nloc) {
                *slot = space.space_index(e + r).unwrap_or(NO_DOF);
            }
            dofs.push(d);
            let h = bp[e + 1] - bp[e];
            for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
                let x = bp[e] + h * xi;
                let (vals, ders) = space.local_basis(e, x);
                points.push(QPoint { x, w: wi * h, vals, ders });
            }
        }
        QuadTable { nq: rule.len(), nloc, dofs, points }
    }

    pub fn n_elements(&self) -> usize {
        self.dofs.len()
    }

    /// Field value and derivative at node `q` of element `e`.
    #[inline]
    pub fn eval(&self, coeffs: &[f64], e: usize, q: usize) -> (f64, f64) {
        let p = &self.points[e * self.nq + q];
        let d = &self.dofs[e];
        let (mut v, mut dv) = (0.0, 0.0);
        for r in 0..self.nloc {
            if d[r] != NO_DOF {
                v += coeffs[d[r]] * p.vals[r];
                dv += coeffs[d[r]] * p.ders[r];
            }
        }
        (v, dv)
    }

    /// Values and derivatives of a field at every node, flattened as `e * nq + q`.
    pub fn eval_all(&self, coeffs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.points.len();
        let (mut v, mut dv) = (vec![0.0; n], vec![0.0; n]);
        for e in 0..self.n_elements() {
            for q in 0..self.nq {
                let (a, b) = self.eval(coeffs, e, q);
                v[e * self.nq + q] = a;
                dv[e * self.nq + q] = b;
            }
        }
        (v, dv)
    }

    /// Load vector `b_i = Σ w (g φ_i + g1 φ_i')` from nodal integrand values.
    pub fn load(&self, dim: usize, g: &[f64], g1: Option<&[f64]>) -> Vec<f64> {
        let mut b = vec![0.0; dim];
        for e in 0..self.n_elements() {
            let d = &self.dofs[e];
            for q in 0..self.nq {
                let k = e * self.nq + q;
                let p = &self.points[k];
                let gv = p.w * g[k];
                let g1v = g1.map_or(0.0, |g1| p.w * g1[k]);
                for r in 0..self.nloc {
                    if d[r] != NO_DOF {
                        b[d[r]] += gv * p.vals[r] + g1v * p.ders[r];
                    }
                }
            }
        }
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    Mass,
    Stiffness,
    AForm,
}

pub fn assemble_matrix(space: &SplineSpace, form: Form) -> Result<BandedSpd> {
    if form == Form::Stiffness && space.spec().boundary == Boundary::Free {
        return Err(Error::SingularForm(
            "stiffness form is singular on a space without a zero boundary".into(),
        ));
    }
    let table = QuadTable::new(space, &QuadratureRule::gauss_legendre(ASSEMBLY_POINTS));
    Ok(assemble_from_table(space, &table, form))
}

fn assemble_from_table(space: &SplineSpace, t: &QuadTable, form: Form) -> BandedSpd {
    let (cm, cs) = match form {
        Form::Mass => (1.0, 0.0),
        Form::Stiffness => (0.0, 1.0),
        Form::AForm => (1.0, 1.0 / 3.0),
    };
    let mut m = BandedSpd::zeros(space.dim(), space.degree());
    for e in 0..t.n_elements() {
        let d = &t.dofs[e];
        for q in 0..t.nq {
            let p = &t.points[e * t.nq + q];
            for a in 0..t.nloc {
                if d[a] == NO_DOF {
                    continue;
                }
                for b in 0..=a {
                    if d[b] == NO_DOF {
                        continue;
                    }
                    let v = cm * p.vals[a] * p.vals[b] + cs * p.ders[a] * p.ders[b];
                    m.add(d[a], d[b], p.w * v);
                }
            }
        }
    }
    m
}

/// `b_i = ∫ f φ_i` by the assembly rule.
pub fn assemble_load(space: &SplineSpace, f: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let t = QuadTable::new(space, &QuadratureRule::gauss_legendre(ASSEMBLY_POINTS));
    let g: Vec<f64> = t.points.iter().map(|p| f(p.x)).collect();
    t.load(space.dim(), &g, None)
}

/// Matrices and factorizations of one space, with its quadrature table.
#[derive(Debug, Clone)]
pub struct AssembledForms {
    pub space: Arc<SplineSpace>,
    pub table: QuadTable,
    pub mass: BandedSpd,
    pub mass_chol: BandedCholesky,
    pub aform: BandedSpd,
    pub aform_chol: BandedCholesky,
    /// Present only for spaces with at least one zero end.
    pub stiffness: Option<(BandedSpd, BandedCholesky)>,
}

impl AssembledForms {
    pub fn new(space: Arc<SplineSpace>) -> Result<Self> {
        let table = QuadTable::new(&space, &QuadratureRule::gauss_legendre(ASSEMBLY_POINTS));
        let mass = assemble_from_table(&space, &table, Form::Mass);
        let mass_chol = mass.cholesky()?;
        let aform = assemble_from_table(&space, &table, Form::AForm);
        let aform_chol = aform.cholesky()?;
        let stiffness = if space.spec().boundary == Boundary::Free {
            None
        } else {
            let s = assemble_from_table(&space, &table, Form::Stiffness);
            let c = s.cholesky()?;
            Some((s, c))
        };
        Ok(AssembledForms {
            space,
            table,
            mass,
            mass_chol,
            aform,
            aform_chol,
            stiffness,
        })
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn stiffness(&self) -> Result<&BandedSpd> {
        self.stiffness
            .as_ref()
            .map(|s| &s.0)
            .ok_or_else(|| Error::SingularForm("stiffness form needs a zero boundary".into()))
    }

    fn field(&self, coeffs: Vec<f64>) -> FemField {
        FemField {
            space: self.space.clone(),
            coeffs,
        }
    }

    fn nodal(&self, f: &dyn Fn(f64) -> f64) -> Vec<f64> {
        self.table.points.iter().map(|p| f(p.x)).collect()
    }

    pub fn l2_project(&self, f: &dyn Fn(f64) -> f64) -> Result<FemField> {
        let b = self.table.load(self.dim(), &self.nodal(f), None);
        Ok(self.field(self.mass_chol.solve(&b)?))
    }

    pub fn elliptic_project(
        &self,
        f: &dyn Fn(f64) -> f64,
        df: &dyn Fn(f64) -> f64,
        mode: EllipticMode,
    ) -> Result<FemField> {
        if self.space.spec().boundary != Boundary::ZeroBoth {
            return invalid("elliptic projection needs a space vanishing at both ends");
        }
        check_boundary(&self.space, f)?;
        let d = self.nodal(df);
        let c = match mode {
            EllipticMode::AForm => {
                let d3: Vec<f64> = d.iter().map(|v| v / 3.0).collect();
                let b = self.table.load(self.dim(), &self.nodal(f), Some(&d3));
                self.aform_chol.solve(&b)?
            }
            EllipticMode::StiffnessOnly => {
                let zero = vec![0.0; d.len()];
                let b = self.table.load(self.dim(), &zero, Some(&d));
                self.stiffness.as_ref().expect("zero space has stiffness").1.solve(&b)?
            }
        };
        Ok(self.field(c))
    }

    /// Solve `a(Af, χ) = load(χ)` for every basis function `χ`.
    pub fn apply_a(&self, load: &[f64]) -> Result<FemField> {
        if self.space.spec().boundary != Boundary::ZeroBoth {
            return invalid("operator A is defined on spaces vanishing at both ends");
        }
        Ok(self.field(self.aform_chol.solve(load)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EllipticMode {
    AForm,
    StiffnessOnly,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::error_norms;
    use crate::mesh::{uniform_mesh, MeshPreset};
    use crate::spline::{build_space, SpaceSpec};
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn forms(n: usize, p: usize, b: Boundary) -> AssembledForms {
        let s = build_space(&uniform_mesh(n).unwrap(), SpaceSpec::new(p, b)).unwrap();
        AssembledForms::new(Arc::new(s)).unwrap()
    }

    fn l2_err(f: &FemField, g: impl Fn(f64) -> f64, dg: impl Fn(f64) -> f64) -> f64 {
        error_norms(f, &g, &dg).l2
    }

    fn rate(e: &[f64]) -> f64 {
        (e[e.len() - 2] / e[e.len() - 1]).log2()
    }

    #[test]
    fn p1_mass_is_hat_gram() {
        let h = 0.25;
        let g = forms(4, 1, Boundary::Free).mass;
        assert!((g.get(0, 0) - h / 3.0).abs() < 1e-15);
        assert!((g.get(2, 2) - 2.0 * h / 3.0).abs() < 1e-15);
        assert!((g.get(2, 1) - h / 6.0).abs() < 1e-15);
        let s = assemble_matrix(&forms(4, 1, Boundary::ZeroBoth).space, Form::Stiffness).unwrap();
        assert!((s.get(0, 0) - 2.0 / h).abs() < 1e-12);
        assert!((s.get(1, 0) + 1.0 / h).abs() < 1e-12);
    }

    #[test]
    fn stiffness_on_free_space_is_singular() {
        let f = forms(4, 1, Boundary::Free);
        assert!(matches!(assemble_matrix(&f.space, Form::Stiffness), Err(Error::SingularForm(_))));
        assert!(f.stiffness().is_err());
    }

    #[test]
    fn aform_is_mass_plus_third_stiffness() {
        for p in 1..=3 {
            let f = forms(9, p, Boundary::ZeroBoth);
            let s = f.stiffness().unwrap();
            let n = f.dim();
            for i in 0..n {
                for j in 0..n {
                    let d = f.aform.get(i, j) - f.mass.get(i, j) - s.get(i, j) / 3.0;
                    assert!(d.abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn mass_spectral_bounds_scale_with_h() {
        let mut ratios = vec![];
        for n in [8, 16, 32] {
            let g = forms(n, 1, Boundary::Free).mass;
            let d = DMatrix::from_fn(g.dim(), g.dim(), |i, j| g.get(i, j));
            let ev = d.symmetric_eigen().eigenvalues;
            let h = 1.0 / n as f64;
            let lo = ev.min() / h;
            let hi = ev.max() / h;
            assert!(lo > 0.0 && hi <= 1.0 + 1e-12);
            ratios.push(lo);
        }
        let (mn, mx) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
        assert!(mx / mn < 2.0);
    }

    #[test]
    fn projections_reproduce_members() {
        for p in 1..=3 {
            let f = forms(7, p, Boundary::ZeroBoth);
            let c: Vec<f64> = (0..f.dim()).map(|i| (i as f64 * 0.7).sin()).collect();
            let v = FemField::new(f.space.clone(), c.clone()).unwrap();
            let val = |x: f64| v.eval(x, 0).unwrap();
            let der = |x: f64| v.eval(x, 1).unwrap();
            let pf = f.l2_project(&val).unwrap();
            let ra = f.elliptic_project(&val, &der, EllipticMode::AForm).unwrap();
            let rs = f.elliptic_project(&val, &der, EllipticMode::StiffnessOnly).unwrap();
            for k in 0..f.dim() {
                assert!((pf.coeffs[k] - c[k]).abs() < 1e-11);
                assert!((ra.coeffs[k] - c[k]).abs() < 1e-11);
                assert!((rs.coeffs[k] - c[k]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn l2_projection_rate() {
        let f = |x: f64| (PI * x).cos() + x + 2.0;
        let df = |x: f64| -PI * (PI * x).sin() + 1.0;
        let e: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| l2_err(&forms(n, 1, Boundary::Free).l2_project(&f).unwrap(), f, df))
            .collect();
        assert!((rate(&e) - 2.0).abs() < 0.05);
    }

    #[test]
    fn symmetric_projection_is_antisymmetric() {
        let f = forms(10, 3, Boundary::Free);
        let pf = f.l2_project(&|x| (x - 0.5).powi(3) + (2.0 * PI * x).sin()).unwrap();
        let n = f.dim();
        for i in 0..n {
            assert!((pf.coeffs[i] + pf.coeffs[n - 1 - i]).abs() < 1e-13);
        }
    }

    #[test]
    fn elliptic_rates_cubic() {
        let f = |x: f64| (PI * x).sin();
        let df = |x: f64| PI * (PI * x).cos();
        let mut l2 = vec![];
        let mut h1 = vec![];
        for n in [8, 16, 32, 64] {
            let r = forms(n, 3, Boundary::ZeroBoth).elliptic_project(&f, &df, EllipticMode::AForm).unwrap();
            let e = error_norms(&r, &f, &df);
            l2.push(e.l2);
            h1.push(e.h1);
        }
        assert!((rate(&l2) - 4.0).abs() < 0.15, "{l2:?}");
        assert!((rate(&h1) - 3.0).abs() < 0.15, "{h1:?}");
    }

    #[test]
    fn stiffness_projection_orthogonal_to_p1() {
        let f = |x: f64| (PI * x).sin() * x.exp();
        let df = |x: f64| x.exp() * (PI * (PI * x).cos() + (PI * x).sin());
        let q = forms(12, 2, Boundary::ZeroBoth);
        let r = q.elliptic_project(&f, &df, EllipticMode::StiffnessOnly).unwrap();
        let p1 = build_space(q.space.mesh(), SpaceSpec::new(1, Boundary::Free)).unwrap();
        let t = QuadTable::new(&p1, &QuadratureRule::gauss_legendre(ASSEMBLY_POINTS));
        let g: Vec<f64> = t
            .points
            .iter()
            .enumerate()
            .map(|(k, p)| df(p.x) - r.eval_on(k / t.nq, p.x).1)
            .collect();
        let b = t.load(p1.dim(), &g, None);
        assert!(b.iter().all(|v| v.abs() < 1e-11), "{b:?}");
    }

    #[test]
    fn elliptic_rejects_boundary_mismatch() {
        let f = forms(8, 3, Boundary::ZeroBoth);
        assert!(f.elliptic_project(&|x| x + 0.1, &|_| 1.0, EllipticMode::AForm).is_err());
        assert!(forms(8, 3, Boundary::Free).elliptic_project(&|x| x, &|_| 1.0, EllipticMode::AForm).is_err());
    }

    #[test]
    fn apply_a_inverts_forward_map() {
        let f = forms(10, 3, Boundary::ZeroBoth);
        let c: Vec<f64> = (0..f.dim()).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let back = f.apply_a(&f.aform.mul_vec(&c)).unwrap();
        for k in 0..f.dim() {
            assert!((back.coeffs[k] - c[k]).abs() < 1e-10);
        }
        let z = f.apply_a(&vec![0.0; f.dim()]).unwrap();
        assert!(z.coeffs.iter().all(|v| *v == 0.0));
        assert!(f.apply_a(&[1.0]).is_err());
    }

    #[test]
    fn apply_a_helmholtz_rates() {
        let c = 1.0 + PI * PI / 3.0;
        let w = |x: f64| (PI * x).sin() / c;
        let dw = |x: f64| PI * (PI * x).cos() / c;
        for (p, expect) in [(1, 2.0), (3, 4.0)] {
            let e: Vec<f64> = [8, 16, 32, 64]
                .iter()
                .map(|&n| {
                    let f = forms(n, p, Boundary::ZeroBoth);
                    let af = f.apply_a(&assemble_load(&f.space, &|x| (PI * x).sin())).unwrap();
                    l2_err(&af, w, dw)
                })
                .collect();
            assert!((rate(&e) - expect).abs() < 0.15, "p={p} {e:?}");
        }
    }

    proptest! {
        #[test]
        fn galerkin_orthogonality(
            p in 1usize..=3,
            a in -2.0f64..2.0,
            b in 0.5f64..4.0,
            preset in 0usize..2,
        ) {
            let mesh = MeshPreset::ALL[preset].build(12).unwrap();
            let s = Arc::new(build_space(&mesh, SpaceSpec::new(p, Boundary::ZeroBoth)).unwrap());
            let f = AssembledForms::new(s).unwrap();
            let u = |x: f64| x * (1.0 - x) * (a + (b * x).sin());
            let du = |x: f64| (1.0 - 2.0 * x) * (a + (b * x).sin()) + x * (1.0 - x) * b * (b * x).cos();
            let pf = f.l2_project(&u).unwrap();
            let ra = f.elliptic_project(&u, &du, EllipticMode::AForm).unwrap();
            let rs = f.elliptic_project(&u, &du, EllipticMode::StiffnessOnly).unwrap();
            let t = &f.table;
            let (uv, ud): (Vec<f64>, Vec<f64>) = t.points.iter().map(|q| (u(q.x), du(q.x))).unzip();
            let (pv, _) = t.eval_all(&pf.coeffs);
            let (av, ad) = t.eval_all(&ra.coeffs);
            let (_, sd) = t.eval_all(&rs.coeffs);
            let diff = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>();
            let r1 = t.load(f.dim(), &diff(&uv, &pv), None);
            let d3: Vec<f64> = diff(&ud, &ad).iter().map(|v| v / 3.0).collect();
            let r2 = t.load(f.dim(), &diff(&uv, &av), Some(&d3));
            let r3 = t.load(f.dim(), &vec![0.0; uv.len()], Some(&diff(&ud, &sd)));
            for r in [r1, r2, r3] {
                prop_assert!(r.iter().all(|v| v.abs() < 1e-11));
            }
            // idempotence
            let pv2 = f.l2_project(&|x| pf.eval(x, 0).unwrap()).unwrap();
            for k in 0..f.dim() {
                prop_assert!((pv2.coeffs[k] - pf.coeffs[k]).abs() < 1e-12);
            }
        }

        #[test]
        fn a_is_symmetric(
            l1 in prop::collection::vec(-1.0f64..1.0, 15),
            l2 in prop::collection::vec(-1.0f64..1.0, 15),
        ) {
            let f = forms(12, 3, Boundary::ZeroBoth);
            let n = f.dim();
            let (l1, l2) = (&l1[..n], &l2[..n]);
            let af = f.apply_a(l1).unwrap();
            let ag = f.apply_a(l2).unwrap();
            // a(Af, Ag) computed both ways: (f, Ag) = l1 · Ag and (g, Af) = l2 · Af
            let lhs: f64 = l1.iter().zip(&ag.coeffs).map(|(a, b)| a * b).sum();
            let rhs: f64 = l2.iter().zip(&af.coeffs).map(|(a, b)| a * b).sum();
            prop_assert!((lhs - rhs).abs() < 1e-11);
        }
    }
}
