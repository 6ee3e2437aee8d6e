//! Truncated singular integrals: built-in Calderon-Zygmund convolution
//! kernels, the rough-kernel operator `T_Omega`, and the Marcinkiewicz
//! integral `mu_Omega`.

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledField};

/// Built-in convolution kernels satisfying the standard size and regularity
/// bounds: the Hilbert kernel `1/(pi u)` in dimension 1 and the Riesz
/// kernels `u_j / (2 pi |u|^3)` in dimension 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CzKernel {
    Hilbert,
    /// Riesz transform component `j` (1 or 2).
    Riesz(usize),
}

impl CzKernel {
    fn dim(&self) -> usize {
        match self {
            CzKernel::Hilbert => 1,
            CzKernel::Riesz(_) => 2,
        }
    }

    #[inline]
    fn eval(&self, du: [f64; 2]) -> f64 {
        match self {
            CzKernel::Hilbert => 1.0 / (std::f64::consts::PI * du[0]),
            CzKernel::Riesz(j) => {
                let r2 = du[0] * du[0] + du[1] * du[1];
                let r = r2.sqrt();
                let comp = if *j == 1 { du[0] } else { du[1] };
                comp / (2.0 * std::f64::consts::PI * r2 * r)
            }
        }
    }
}

/// Truncated convolution `sum over |x - y| > eps of K(x - y) f(y) h^dim`.
/// The excluded region is symmetric, so odd-kernel cancellation survives on
/// the grid.
pub fn cz_apply(f: &SampledField, kernel: CzKernel, eps: f64) -> Result<SampledField> {
    let grid = *f.grid();
    if kernel.dim() != grid.dim() {
        return Err(Error::parameter(format!(
            "kernel dimension {} does not match grid dimension {}",
            kernel.dim(),
            grid.dim()
        )));
    }
    if matches!(kernel, CzKernel::Riesz(j) if j != 1 && j != 2) {
        return Err(Error::parameter("riesz component must be 1 or 2".into()));
    }
    if !(eps.is_finite() && eps >= grid.spacing()) {
        return Err(Error::parameter(format!(
            "truncation radius {eps} below grid spacing {}",
            grid.spacing()
        )));
    }
    let hv = grid.cell_volume();
    let eps2 = eps * eps;
    let n = grid.points_per_axis();
    let mut out = vec![0.0; grid.len()];
    if grid.dim() == 1 {
        for (i, slot) in out.iter_mut().enumerate() {
            let xi = grid.axis_coord(i);
            let mut acc = 0.0;
            for j in 0..n {
                let du = xi - grid.axis_coord(j);
                if du * du > eps2 {
                    acc += kernel.eval([du, 0.0]) * f.value(j) * hv;
                }
            }
            *slot = acc;
        }
    } else {
        for (idx, slot) in out.iter_mut().enumerate() {
            let x = grid.point(idx);
            let mut acc = 0.0;
            for jdx in 0..grid.len() {
                let y = grid.point(jdx);
                let du = [x[0] - y[0], x[1] - y[1]];
                if du[0] * du[0] + du[1] * du[1] > eps2 {
                    acc += kernel.eval(du) * f.value(jdx) * hv;
                }
            }
            *slot = acc;
        }
        let _ = n;
    }
    SampledField::new(grid, out, None)
}

/// Samples of `Omega` on the unit sphere with the cancellation
/// `int_{S^{n-1}} Omega = 0` enforced by subtracting the node mean.
///
/// Dimension 1 stores the two values at -1 and +1; dimension 2 stores `M`
/// equispaced angle nodes, evaluated by nearest node.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereFunction {
    dim: usize,
    values: Vec<f64>,
}

impl SphereFunction {
    /// Enforce cancellation on raw node samples (equal node weights).
    pub fn new(dim: usize, mut values: Vec<f64>) -> Result<Self> {
        match dim {
            1 if values.len() == 2 => {}
            2 if values.len() >= 4 => {}
            _ => {
                return Err(Error::parameter(
                    "sphere samples: dim 1 takes 2 values, dim 2 at least 4".into(),
                ))
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sphere sample".into()));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        for v in &mut values {
            *v -= mean;
        }
        Ok(SphereFunction { dim, values })
    }

    /// `Omega(+-1) = +-1`, the sign kernel on the line.
    pub fn sign() -> Self {
        SphereFunction { dim: 1, values: vec![-1.0, 1.0] }
    }

    /// `Omega(theta) = cos(k theta)` at `nodes` equispaced angles.
    pub fn harmonic_cos(k: usize, nodes: usize) -> Result<Self> {
        let raw = (0..nodes)
            .map(|m| (k as f64 * 2.0 * std::f64::consts::PI * m as f64 / nodes as f64).cos())
            .collect();
        SphereFunction::new(2, raw)
    }

    /// `Omega(theta) = sin(k theta)` at `nodes` equispaced angles.
    pub fn harmonic_sin(k: usize, nodes: usize) -> Result<Self> {
        let raw = (0..nodes)
            .map(|m| (k as f64 * 2.0 * std::f64::consts::PI * m as f64 / nodes as f64).sin())
            .collect();
        SphereFunction::new(2, raw)
    }

    pub fn zero(dim: usize) -> Self {
        let len = if dim == 1 { 2 } else { 8 };
        SphereFunction { dim, values: vec![0.0; len] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Node-weighted mean; zero to 1e-14 after construction.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Evaluate at the direction of `du` (sign in dim 1, nearest angle node
    /// in dim 2).
    #[inline]
    pub fn eval_dir(&self, du: [f64; 2]) -> f64 {
        if self.dim == 1 {
            if du[0] > 0.0 {
                self.values[1]
            } else {
                self.values[0]
            }
        } else {
            let m = self.values.len();
            let theta = du[1].atan2(du[0]);
            let step = 2.0 * std::f64::consts::PI / m as f64;
            let k = (theta / step).round() as i64;
            let k = k.rem_euclid(m as i64) as usize;
            self.values[k]
        }
    }
}

/// Rough-kernel singular integral
/// `T_Omega f(x) = p.v. int Omega(y') |y|^{-n} f(x - y) dy`, truncated at
/// `|y| > eps`.
pub fn rough_singular(f: &SampledField, omega: &SphereFunction, eps: f64) -> Result<SampledField> {
    let grid = *f.grid();
    if omega.dim() != grid.dim() {
        return Err(Error::parameter("sphere function dimension mismatch".into()));
    }
    if !(eps.is_finite() && eps >= grid.spacing()) {
        return Err(Error::parameter(format!(
            "truncation radius {eps} below grid spacing {}",
            grid.spacing()
        )));
    }
    if omega.mean().abs() > 1e-13 {
        return Err(Error::parameter("sphere function must be mean zero".into()));
    }
    let hv = grid.cell_volume();
    let eps2 = eps * eps;
    let dim = grid.dim();
    let mut out = vec![0.0; grid.len()];
    for (idx, slot) in out.iter_mut().enumerate() {
        let x = grid.point(idx);
        let mut acc = 0.0;
        for jdx in 0..grid.len() {
            let y = grid.point(jdx);
            let du = [x[0] - y[0], x[1] - y[1]];
            let r2 = if dim == 1 { du[0] * du[0] } else { du[0] * du[0] + du[1] * du[1] };
            if r2 > eps2 {
                let rn = if dim == 1 { r2.sqrt() } else { r2 };
                acc += omega.eval_dir(du) / rn * f.value(jdx) * hv;
            }
        }
        *slot = acc;
    }
    SampledField::new(grid, out, None)
}

/// Weights for quadrature of `dt / t^{power+1}` over geometric level cells:
/// level `t_k` owns `[b_k, b_{k+1})` with geometric-mean boundaries.
pub(crate) fn level_weights(levels: &[f64], power: f64) -> Vec<f64> {
    let m = levels.len();
    let ratio = if m >= 2 { levels[1] / levels[0] } else { 2.0 };
    let mut bounds = Vec::with_capacity(m + 1);
    bounds.push(levels[0] / ratio.sqrt());
    for k in 1..m {
        bounds.push((levels[k - 1] * levels[k]).sqrt());
    }
    let last_ratio = if m >= 2 { levels[m - 1] / levels[m - 2] } else { ratio };
    bounds.push(levels[m - 1] * last_ratio.sqrt());
    (0..m)
        .map(|k| {
            if power == 0.0 {
                (bounds[k + 1] / bounds[k]).ln()
            } else {
                (bounds[k].powf(-power) - bounds[k + 1].powf(-power)) / power
            }
        })
        .collect()
}

fn check_levels(levels: &[f64], grid: &Grid, max: f64) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::parameter("no integration levels given".into()));
    }
    for pair in levels.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(Error::parameter("levels must be strictly increasing".into()));
        }
    }
    if levels[0] < grid.spacing() || *levels.last().unwrap() > max {
        return Err(Error::parameter(format!(
            "levels must lie in [{}, {max}]",
            grid.spacing()
        )));
    }
    Ok(())
}

/// Marcinkiewicz integral
/// `mu_Omega f(x) = (int_0^inf |int_{|x-y| <= t} Omega(x-y) |x-y|^{1-n} f(y) dy|^2 dt/t^3)^{1/2}`
/// with the inner integral truncated to the given levels and the singular
/// cell `|x - y| < h` (the sample itself) excluded.
pub fn marcinkiewicz(
    f: &SampledField,
    omega: &SphereFunction,
    t_levels: &[f64],
) -> Result<SampledField> {
    let grid = *f.grid();
    if omega.dim() != grid.dim() {
        return Err(Error::parameter("sphere function dimension mismatch".into()));
    }
    check_levels(t_levels, &grid, 2.0 * grid.half_width())?;
    let dim = grid.dim();
    let h = grid.spacing();
    let hv = grid.cell_volume();
    let n = grid.points_per_axis();

    // Offsets sorted by distance so each level extends the previous annulus.
    let max_t = *t_levels.last().unwrap();
    let reach = (max_t / h).ceil() as i64 + 1;
    let mut offsets: Vec<(f64, i64, i64)> = Vec::new();
    if dim == 1 {
        for di in -reach..=reach {
            let d = (di as f64 * h).abs();
            if d >= h && d <= max_t {
                offsets.push((d, di, 0));
            }
        }
    } else {
        for di in -reach..=reach {
            for dj in -reach..=reach {
                let d = ((di * di + dj * dj) as f64).sqrt() * h;
                if d >= h && d <= max_t {
                    offsets.push((d, di, dj));
                }
            }
        }
    }
    offsets.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then((a.1, a.2).cmp(&(b.1, b.2))));
    // Kernel value per offset: Omega(dir) / |u|^{n-1} * h^dim.
    let kernel: Vec<f64> = offsets
        .iter()
        .map(|(d, di, dj)| {
            let du = [*di as f64 * h, *dj as f64 * h];
            let pow = if dim == 1 { 1.0 } else { *d };
            omega.eval_dir(du) / pow * hv
        })
        .collect();
    let weights = level_weights(t_levels, 2.0);

    let mut out = vec![0.0; grid.len()];
    if dim == 1 {
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            let mut inner = 0.0;
            let mut pos = 0usize;
            for (k, t) in t_levels.iter().enumerate() {
                while pos < offsets.len() && offsets[pos].0 <= *t {
                    let j = i as i64 - offsets[pos].1;
                    if j >= 0 && (j as usize) < n {
                        inner += kernel[pos] * f.value(j as usize);
                    }
                    pos += 1;
                }
                acc += inner * inner * weights[k];
            }
            *slot = acc.sqrt();
        }
    } else {
        for (idx, slot) in out.iter_mut().enumerate() {
            let (i, j) = ((idx / n) as i64, (idx % n) as i64);
            let mut acc = 0.0;
            let mut inner = 0.0;
            let mut pos = 0usize;
            for (k, t) in t_levels.iter().enumerate() {
                while pos < offsets.len() && offsets[pos].0 <= *t {
                    let (yi, yj) = (i - offsets[pos].1, j - offsets[pos].2);
                    if yi >= 0 && yi < n as i64 && yj >= 0 && yj < n as i64 {
                        inner += kernel[pos] * f.value((yi * n as i64 + yj) as usize);
                    }
                    pos += 1;
                }
                acc += inner * inner * weights[k];
            }
            *slot = acc.sqrt();
        }
    }
    SampledField::new(grid, out, None)
}
