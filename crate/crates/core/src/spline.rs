//! Clamped B-spline spaces on a mesh and fields over them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::banded::BandedMatrix;
use crate::error::{invalid, Result};
use crate::mesh::Mesh;

/// Which endpoint values are forced to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Free,
    ZeroBoth,
    /// `φ(0) = 0` only.
    ZeroLeft,
    /// `φ(1) = 0` only.
    ZeroRight,
}

impl Boundary {
    pub fn zero_left(self) -> bool {
        matches!(self, Boundary::ZeroBoth | Boundary::ZeroLeft)
    }

    pub fn zero_right(self) -> bool {
        matches!(self, Boundary::ZeroBoth | Boundary::ZeroRight)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub degree: usize,
    pub boundary: Boundary,
}

impl SpaceSpec {
    pub const fn new(degree: usize, boundary: Boundary) -> Self {
        SpaceSpec { degree, boundary }
    }
}

pub const MAX_DEGREE: usize = 3;

/// Spline space of maximal smoothness `C^{degree-1}` spanned by clamped B-splines.
#[derive(Debug, Clone)]
pub struct SplineSpace {
    mesh: Mesh,
    spec: SpaceSpec,
    knots: Vec<f64>,
    first: usize,
    dim: usize,
}

/// Active basis functions at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

pub fn build_space(mesh: &Mesh, spec: SpaceSpec) -> Result<SplineSpace> {
    let p = spec.degree;
    if !(1..=MAX_DEGREE).contains(&p) {
        return invalid(format!("unsupported spline degree {p}"));
    }
    let bp = mesh.breakpoints();
    let n = mesh.n_elements();
    let mut knots = vec![0.0; p + 1];
    knots.extend_from_slice(&bp[1..n]);
    knots.extend(std::iter::repeat(1.0).take(p + 1));
    let first = usize::from(spec.boundary.zero_left());
    let dim = n + p - first - usize::from(spec.boundary.zero_right());
    Ok(SplineSpace {
        mesh: mesh.clone(),
        spec,
        knots,
        first,
        dim,
    })
}

impl SplineSpace {
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn spec(&self) -> SpaceSpec {
        self.spec
    }

    pub fn degree(&self) -> usize {
        self.spec.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Map a clamped B-spline index to its index in this space, if kept.
    #[inline]
    pub fn space_index(&self, full: usize) -> Option<usize> {
        if full >= self.first && full - self.first < self.dim {
            Some(full - self.first)
        } else {
            None
        }
    }

    /// Values and derivatives of the `degree + 1` clamped B-splines `e..=e+degree`
    /// that are nonzero on element `e`, evaluated at `x`.
    pub fn local_basis(&self, e: usize, x: f64) -> ([f64; MAX_DEGREE + 1], [f64; MAX_DEGREE + 1]) {
        let p = self.spec.degree;
        let u = &self.knots;
        let s = e + p;
        let mut vals = [0.0; MAX_DEGREE + 1];
        let mut lower = [0.0; MAX_DEGREE + 1];
        let mut left = [0.0; MAX_DEGREE + 1];
        let mut right = [0.0; MAX_DEGREE + 1];
        vals[0] = 1.0;
        for j in 1..=p {
            if j == p {
                lower = vals;
            }
            left[j] = x - u[s + 1 - j];
            right[j] = u[s + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let tmp = vals[r] / (right[r + 1] + left[j - r]);
                vals[r] = saved + right[r + 1] * tmp;
                saved = left[j - r] * tmp;
            }
            vals[j] = saved;
        }
        let mut ders = [0.0; MAX_DEGREE + 1];
        let pf = p as f64;
        for r in 0..=p {
            let i = e + r;
            let mut d = 0.0;
            if r >= 1 {
                d += lower[r - 1] / (u[i + p] - u[i]);
            }
            if r < p {
                d -= lower[r] / (u[i + p + 1] - u[i + 1]);
            }
            ders[r] = pf * d;
        }
        (vals, ders)
    }

    pub fn eval_basis(&self, x: f64) -> Result<BasisEval> {
        if !(0.0..=1.0).contains(&x) {
            return invalid(format!("evaluation point {x} outside [0, 1]"));
        }
        let e = self.mesh.locate(x);
        let (v, d) = self.local_basis(e, x);
        let mut out = BasisEval {
            indices: Vec::with_capacity(self.degree() + 1),
            values: Vec::with_capacity(self.degree() + 1),
            derivs: Vec::with_capacity(self.degree() + 1),
        };
        for r in 0..=self.degree() {
            if let Some(k) = self.space_index(e + r) {
                out.indices.push(k);
                out.values.push(v[r]);
                out.derivs.push(d[r]);
            }
        }
        Ok(out)
    }
}

/// Coefficient vector over a spline space.
#[derive(Debug, Clone)]
pub struct FemField {
    pub space: Arc<SplineSpace>,
    pub coeffs: Vec<f64>,
}

impl FemField {
    pub fn new(space: Arc<SplineSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return invalid(format!(
                "coefficient length {} does not match space dimension {}",
                coeffs.len(),
                space.dim()
            ));
        }
        Ok(FemField { space, coeffs })
    }

    pub fn zeros(space: Arc<SplineSpace>) -> Self {
        let n = space.dim();
        FemField { space, coeffs: vec![0.0; n] }
    }

    pub fn eval(&self, x: f64, derivative: usize) -> Result<f64> {
        if derivative > 1 || derivative > self.space.degree() {
            return invalid(format!("derivative order {derivative} not supported"));
        }
        let b = self.space.eval_basis(x)?;
        let w = if derivative == 0 { &b.values } else { &b.derivs };
        Ok(b.indices.iter().zip(w).map(|(&i, v)| self.coeffs[i] * v).sum())
    }

    /// Value and derivative on a known element; `x` need not be validated.
    pub fn eval_on(&self, e: usize, x: f64) -> (f64, f64) {
        let (v, d) = self.space.local_basis(e, x);
        let (mut s, mut sd) = (0.0, 0.0);
        for r in 0..=self.space.degree() {
            if let Some(k) = self.space.space_index(e + r) {
                s += self.coeffs[k] * v[r];
                sd += self.coeffs[k] * d[r];
            }
        }
        (s, sd)
    }
}

const BOUNDARY_TOL: f64 = 1e-12;

pub(crate) fn check_boundary(space: &SplineSpace, f: &dyn Fn(f64) -> f64) -> Result<()> {
    let b = space.spec().boundary;
    for (flag, x) in [(b.zero_left(), 0.0), (b.zero_right(), 1.0)] {
        if flag && f(x).abs() > BOUNDARY_TOL {
            return invalid(format!("function value {} at x = {x} violates the zero boundary", f(x)));
        }
    }
    Ok(())
}

/// Nodal interpolant (degree 1) or complete cubic spline interpolant (degree 3).
pub fn interpolate(
    space: &Arc<SplineSpace>,
    f: &dyn Fn(f64) -> f64,
    df: &dyn Fn(f64) -> f64,
) -> Result<FemField> {
    check_boundary(space, f)?;
    let bp = space.mesh().breakpoints();
    let n = space.mesh().n_elements();
    let full: Vec<f64> = match space.degree() {
        1 => bp.iter().map(|&x| f(x)).collect(),
        3 => {
            // rows: s(0), s'(0), s(x_1..x_{N-1}), s'(1), s(1)
            let dim = n + 3;
            let mut a = BandedMatrix::zeros(dim, 3, 3);
            let mut rhs = vec![0.0; dim];
            let mut put = |row: usize, x: f64, deriv: bool, value: f64| {
                let e = space.mesh().locate(x);
                let (v, d) = space.local_basis(e, x);
                for r in 0..4 {
                    a.set(row, e + r, if deriv { d[r] } else { v[r] });
                }
                rhs[row] = value;
            };
            put(0, 0.0, false, f(0.0));
            put(1, 0.0, true, df(0.0));
            for (j, &x) in bp.iter().enumerate().take(n).skip(1) {
                put(j + 1, x, false, f(x));
            }
            put(n + 1, 1.0, true, df(1.0));
            put(n + 2, 1.0, false, f(1.0));
            a.solve(&rhs)?
        }
        p => return invalid(format!("no interpolant provided for degree {p}")),
    };
    let coeffs = (0..full.len())
        .filter_map(|i| space.space_index(i).map(|_| full[i]))
        .collect();
    FemField::new(space.clone(), coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{uniform_mesh, MeshPreset};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn space(n: usize, p: usize, b: Boundary) -> Arc<SplineSpace> {
        Arc::new(build_space(&uniform_mesh(n).unwrap(), SpaceSpec::new(p, b)).unwrap())
    }

    #[test]
    fn dimensions() {
        assert_eq!(space(4, 1, Boundary::Free).dim(), 5);
        assert_eq!(space(4, 3, Boundary::Free).dim(), 7);
        assert_eq!(space(4, 2, Boundary::ZeroBoth).dim(), 4);
        assert_eq!(space(4, 1, Boundary::ZeroBoth).dim(), 3);
        assert_eq!(space(4, 1, Boundary::ZeroLeft).dim(), 4);
        assert_eq!(space(4, 3, Boundary::ZeroRight).dim(), 6);
        let m = uniform_mesh(4).unwrap();
        assert!(build_space(&m, SpaceSpec::new(4, Boundary::Free)).is_err());
        assert!(build_space(&m, SpaceSpec::new(0, Boundary::Free)).is_err());
    }

    #[test]
    fn hat_values() {
        let b = space(2, 1, Boundary::Free).eval_basis(0.25).unwrap();
        assert_eq!(b.indices, vec![0, 1]);
        assert_eq!(b.values, vec![0.5, 0.5]);
        assert_eq!(b.derivs, vec![-2.0, 2.0]);
    }

    #[test]
    fn cubic_interior_breakpoint() {
        let b = space(8, 3, Boundary::Free).eval_basis(0.5).unwrap();
        let nz: Vec<f64> = b.values.iter().cloned().filter(|v| v.abs() > 1e-15).collect();
        assert_eq!(nz.len(), 3);
        for (v, e) in nz.iter().zip([1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0]) {
            assert!((v - e).abs() < 1e-14);
        }
        assert!((nz.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn clamped_endpoint() {
        for p in 1..=3 {
            let b = space(5, p, Boundary::Free).eval_basis(0.0).unwrap();
            assert_eq!(b.indices[0], 0);
            assert_eq!(b.values[0], 1.0);
            assert!(b.values[1..].iter().all(|v| *v == 0.0));
            let b = space(5, p, Boundary::Free).eval_basis(1.0).unwrap();
            assert!((b.values.last().unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn out_of_range() {
        assert!(space(4, 1, Boundary::Free).eval_basis(1.5).is_err());
        assert!(space(4, 1, Boundary::Free).eval_basis(-0.1).is_err());
    }

    #[test]
    fn field_eval() {
        let s = space(4, 2, Boundary::Free);
        let ones = FemField::new(s.clone(), vec![1.0; s.dim()]).unwrap();
        let zero = FemField::zeros(s.clone());
        for x in [0.0, 0.13, 0.5, 0.77, 1.0] {
            assert!((ones.eval(x, 0).unwrap() - 1.0).abs() < 1e-14);
            assert!(ones.eval(x, 1).unwrap().abs() < 1e-12);
            assert_eq!(zero.eval(x, 0).unwrap(), 0.0);
        }
        assert!(ones.eval(0.5, 2).is_err());
        let p1 = space(4, 1, Boundary::Free);
        let mut c = vec![0.0; 5];
        c[1] = 1.0;
        let f = FemField::new(p1, c).unwrap();
        assert!((f.eval(0.125, 0).unwrap() - 0.5).abs() < 1e-15);
        assert!(FemField::new(s, vec![0.0; 2]).is_err());
    }

    #[test]
    fn zero_spaces_vanish_at_ends() {
        for p in 1..=3 {
            for (b, l, r) in [
                (Boundary::ZeroBoth, true, true),
                (Boundary::ZeroLeft, true, false),
                (Boundary::ZeroRight, false, true),
            ] {
                let s = space(6, p, b);
                if l {
                    let e = s.eval_basis(0.0).unwrap();
                    assert!(e.values.iter().all(|v| v.abs() <= 1e-14));
                }
                if r {
                    let e = s.eval_basis(1.0).unwrap();
                    assert!(e.values.iter().all(|v| v.abs() <= 1e-14));
                }
            }
        }
    }

    #[test]
    fn interpolation_reproduces() {
        let s = space(5, 1, Boundary::Free);
        let f = interpolate(&s, &|x| 2.0 * x - 1.0, &|_| 2.0).unwrap();
        for (c, x) in f.coeffs.iter().zip(s.mesh().breakpoints()) {
            assert_eq!(*c, 2.0 * x - 1.0);
        }
        for m in [uniform_mesh(7).unwrap(), MeshPreset::Ratio1_5.build(8).unwrap()] {
            let s = Arc::new(build_space(&m, SpaceSpec::new(3, Boundary::Free)).unwrap());
            let f = interpolate(&s, &|x| x.powi(3), &|x| 3.0 * x * x).unwrap();
            for i in 0..=200 {
                let x = i as f64 / 200.0;
                assert!((f.eval(x, 0).unwrap() - x.powi(3)).abs() < 1e-12);
            }
        }
        let z = space(6, 3, Boundary::ZeroBoth);
        let f = interpolate(&z, &|x| x * (1.0 - x) * x, &|x| 2.0 * x - 3.0 * x * x).unwrap();
        assert!((f.eval(0.4, 0).unwrap() - 0.096).abs() < 1e-12);
        assert!(interpolate(&z, &|x| x + 1.0, &|_| 1.0).is_err());
        assert!(interpolate(&space(4, 2, Boundary::Free), &|x| x, &|_| 1.0).is_err());
    }

    fn l2_interp_error(n: usize, p: usize) -> f64 {
        let s = space(n, p, Boundary::Free);
        let f = interpolate(&s, &|x| (PI * x).sin(), &|x| PI * (PI * x).cos()).unwrap();
        let q = crate::quadrature::QuadratureRule::gauss_legendre(10);
        let bp = s.mesh().breakpoints();
        (0..n)
            .map(|e| q.integrate(bp[e], bp[e + 1], |x| (f.eval_on(e, x).0 - (PI * x).sin()).powi(2)))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn interpolation_rates() {
        for p in [1, 3] {
            let errs: Vec<f64> = [16, 32, 64, 128].iter().map(|&n| l2_interp_error(n, p)).collect();
            for w in errs.windows(2) {
                let rate = (w[0] / w[1]).log2();
                assert!((rate - (p + 1) as f64).abs() < 0.1, "degree {p}: rate {rate}");
            }
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity(p in 1usize..=3, preset in 0usize..3, x in 0.0f64..=1.0) {
            let mesh = MeshPreset::ALL[preset].build(20).unwrap();
            let s = build_space(&mesh, SpaceSpec::new(p, Boundary::Free)).unwrap();
            let b = s.eval_basis(x).unwrap();
            prop_assert!(b.indices.len() <= p + 1);
            prop_assert!((b.values.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(b.derivs.iter().sum::<f64>().abs() <= 1e-9);
        }

        #[test]
        fn derivative_matches_fd(
            p in 1usize..=3,
            coeffs in prop::collection::vec(-1.0f64..1.0, 13),
            x in 0.01f64..0.99,
        ) {
            let s = space(10, p, Boundary::ZeroBoth);
            let f = FemField::new(s.clone(), coeffs[..s.dim()].to_vec()).unwrap();
            // keep the stencil inside one element so P1 kinks do not matter
            let e = s.mesh().locate(x);
            let bp = s.mesh().breakpoints();
            let x = x.clamp(bp[e] + 2e-6, bp[e + 1] - 2e-6);
            let fd = (f.eval(x + 1e-6, 0).unwrap() - f.eval(x - 1e-6, 0).unwrap()) / 2e-6;
            let d = f.eval(x, 1).unwrap();
            prop_assert!((fd - d).abs() <= 1e-5 * d.abs().max(1.0));
        }
    }
}
