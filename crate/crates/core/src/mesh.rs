//! Partitions of the unit interval.

use crate::error::{invalid, Result};

/// Ordered breakpoints `0 = x_0 < x_1 < ... < x_N = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    breakpoints: Vec<f64>,
    sizes: Vec<f64>,
    h_max: f64,
    uniform: bool,
    dx: f64,
}

impl Mesh {
    fn from_breakpoints(breakpoints: Vec<f64>, dx: f64) -> Self {
        let sizes: Vec<f64> = breakpoints.windows(2).map(|w| w[1] - w[0]).collect();
        let h_max = sizes.iter().cloned().fold(0.0, f64::max);
        let h_min = sizes.iter().cloned().fold(f64::INFINITY, f64::min);
        Mesh {
            breakpoints,
            sizes,
            h_max,
            uniform: h_max - h_min <= 1e-14,
            dx,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn element_sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Scale of the generating pattern; equals `1/N` on uniform meshes.
    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn n_elements(&self) -> usize {
        self.sizes.len()
    }

    /// Index of the element containing `x`; the right endpoint belongs to the last element.
    pub fn locate(&self, x: f64) -> usize {
        let n = self.n_elements();
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        idx.saturating_sub(1).min(n - 1)
    }
}

pub fn uniform_mesh(n: usize) -> Result<Mesh> {
    if n < 2 {
        return invalid(format!("uniform mesh needs N >= 2, got {n}"));
    }
    let nf = n as f64;
    let bp = (0..=n).map(|i| i as f64 / nf).collect();
    let mut m = Mesh::from_breakpoints(bp, 1.0 / nf);
    m.h_max = 1.0 / nf;
    Ok(m)
}

/// Element sizes cycle through `pattern * dx`, with `dx` fixed by total length one.
pub fn patterned_mesh(n: usize, pattern: &[f64]) -> Result<Mesh> {
    let p = pattern.len();
    if p == 0 {
        return invalid("empty mesh pattern");
    }
    if let Some(w) = pattern.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return invalid(format!("mesh pattern weight {w} is not positive"));
    }
    if n < 2 || n % p != 0 {
        return invalid(format!("N = {n} is not a positive multiple of the pattern length {p}"));
    }
    let total: f64 = pattern.iter().sum();
    let mut prefix = Vec::with_capacity(p + 1);
    prefix.push(0.0);
    for w in pattern {
        prefix.push(prefix.last().unwrap() + w);
    }
    // x_j = S_j / (N total / p) where S_j is the running weight sum; exact for unit weights
    let denom = n as f64 * total / p as f64;
    let mut bp: Vec<f64> = (0..=n)
        .map(|j| ((j / p) as f64 * total + prefix[j % p]) / denom)
        .collect();
    bp[n] = 1.0;
    Ok(Mesh::from_breakpoints(bp, 1.0 / denom))
}

/// Named mesh families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MeshPreset {
    Uniform,
    Ratio1_5,
    Ratio150,
    Ratio075_05,
}

impl MeshPreset {
    pub const ALL: [MeshPreset; 4] = [
        MeshPreset::Uniform,
        MeshPreset::Ratio1_5,
        MeshPreset::Ratio150,
        MeshPreset::Ratio075_05,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeshPreset::Uniform => "uniform",
            MeshPreset::Ratio1_5 => "ratio1.5",
            MeshPreset::Ratio150 => "ratio150",
            MeshPreset::Ratio075_05 => "ratio0.75-0.5",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| crate::Error::InvalidArgument(format!("unknown mesh preset '{name}'")))
    }

    pub fn pattern(self) -> &'static [f64] {
        match self {
            MeshPreset::Uniform => &[1.0],
            MeshPreset::Ratio1_5 => &[1.2, 0.8],
            MeshPreset::Ratio150 => &[0.02, 0.05, 0.08, 0.35, 0.5, 1.0, 1.0, 2.0, 2.0, 3.0],
            MeshPreset::Ratio075_05 => &[0.75, 0.5],
        }
    }

    pub fn build(self, n: usize) -> Result<Mesh> {
        match self {
            MeshPreset::Uniform => uniform_mesh(n),
            other => patterned_mesh(n, other.pattern()),
        }
    }
}

impl From<MeshPreset> for String {
    fn from(p: MeshPreset) -> String {
        p.name().into()
    }
}

impl TryFrom<String> for MeshPreset {
    type Error = crate::Error;
    fn try_from(s: String) -> Result<MeshPreset> {
        MeshPreset::from_name(&s)
    }
}
