//! Uniform midpoint grids on the cube `[-L, L]^n` (`n` = 1 or 2) and the
//! quadrature primitives every other module builds on: integrals, weighted
//! ball averages, ball measures, and radius ladders.
//!
//! Sample points are cell midpoints `x_i = -L + (i + 1/2) h`, so no sample
//! ever sits on the cube boundary and `|x_i - x_j|` is an exact multiple of
//! `h` along each axis. Ball membership is Euclidean with strict inequality,
//! decided by comparing squared distances. All reductions run in fixed index
//! order; identical inputs (including seeds) give bitwise identical outputs.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// A point of the ambient space. The second coordinate is 0 in dimension 1.
pub type Point = [f64; 2];

/// Squared Euclidean distance over the first `dim` coordinates.
#[inline]
pub fn dist_sq(dim: usize, a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    if dim == 1 {
        dx * dx
    } else {
        let dy = a[1] - b[1];
        dx * dx + dy * dy
    }
}

/// Uniform midpoint grid over `[-L, L]^dim`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    points_per_axis: usize,
}

impl Grid {
    /// Build a grid; `dim` must be 1 or 2, `n` even and at least 8.
    pub fn new(dim: usize, half_width: f64, points_per_axis: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::parameter(format!("dim must be 1 or 2, got {dim}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::parameter(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        if points_per_axis < 8 || points_per_axis % 2 != 0 {
            return Err(Error::parameter(format!(
                "points per axis must be even and >= 8, got {points_per_axis}"
            )));
        }
        Ok(Grid { dim, half_width, points_per_axis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Cell spacing `h = 2L / N`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    /// Volume of one cell, `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        if self.dim == 1 {
            h
        } else {
            h * h
        }
    }

    /// Total number of sample points, `N^dim`.
    pub fn len(&self) -> usize {
        if self.dim == 1 {
            self.points_per_axis
        } else {
            self.points_per_axis * self.points_per_axis
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Midpoint coordinate along one axis.
    #[inline]
    pub fn axis_coord(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.spacing() - self.half_width
    }

    /// Sample point for a linear index (row-major in dimension 2).
    #[inline]
    pub fn point(&self, idx: usize) -> Point {
        if self.dim == 1 {
            [self.axis_coord(idx), 0.0]
        } else {
            let n = self.points_per_axis;
            [self.axis_coord(idx / n), self.axis_coord(idx % n)]
        }
    }

    /// True when `p` lies in the closed cube.
    pub fn contains(&self, p: Point) -> bool {
        let l = self.half_width;
        if self.dim == 1 {
            p[0].abs() <= l
        } else {
            p[0].abs() <= l && p[1].abs() <= l
        }
    }

    /// Index range along one axis whose midpoints can satisfy `|x - c| < r`.
    /// The range over-covers by one cell; callers apply the exact test.
    #[inline]
    fn axis_range(&self, c: f64, r: f64) -> (usize, usize) {
        let h = self.spacing();
        let lo = ((c - r + self.half_width) / h - 0.5).floor() - 1.0;
        let hi = ((c + r + self.half_width) / h - 0.5).ceil() + 1.0;
        let n = self.points_per_axis as f64;
        let lo = lo.max(0.0).min(n - 1.0) as usize;
        let hi = hi.max(0.0).min(n - 1.0) as usize;
        (lo, hi)
    }
}

/// Visit every grid index inside the open ball `B(center, radius)`, in
/// ascending linear-index order. Membership is `dist^2 < radius^2`.
pub(crate) fn for_ball(grid: &Grid, center: Point, radius: f64, mut visit: impl FnMut(usize)) {
    let r2 = radius * radius;
    let n = grid.points_per_axis;
    let (i_lo, i_hi) = grid.axis_range(center[0], radius);
    if grid.dim == 1 {
        for i in i_lo..=i_hi {
            let dx = grid.axis_coord(i) - center[0];
            if dx * dx < r2 {
                visit(i);
            }
        }
    } else {
        let (j_lo, j_hi) = grid.axis_range(center[1], radius);
        for i in i_lo..=i_hi {
            let dx = grid.axis_coord(i) - center[0];
            let dx2 = dx * dx;
            if dx2 >= r2 {
                continue;
            }
            for j in j_lo..=j_hi {
                let dy = grid.axis_coord(j) - center[1];
                if dx2 + dy * dy < r2 {
                    visit(i * n + j);
                }
            }
        }
    }
}

/// Same visit order as [`for_ball`] but with the closed test `dist^2 <= r^2`.
pub(crate) fn for_closed_ball(
    grid: &Grid,
    center: Point,
    radius: f64,
    mut visit: impl FnMut(usize),
) {
    let r2 = radius * radius;
    let n = grid.points_per_axis;
    let (i_lo, i_hi) = grid.axis_range(center[0], radius);
    if grid.dim == 1 {
        for i in i_lo..=i_hi {
            let dx = grid.axis_coord(i) - center[0];
            if dx * dx <= r2 {
                visit(i);
            }
        }
    } else {
        let (j_lo, j_hi) = grid.axis_range(center[1], radius);
        for i in i_lo..=i_hi {
            let dx = grid.axis_coord(i) - center[0];
            let dx2 = dx * dx;
            if dx2 > r2 {
                continue;
            }
            for j in j_lo..=j_hi {
                let dy = grid.axis_coord(j) - center[1];
                if dx2 + dy * dy <= r2 {
                    visit(i * n + j);
                }
            }
        }
    }
}

/// Spec for `make_grid`; thin alias kept so call sites read like the paper's
/// parameter list.
pub fn make_grid(dim: usize, half_width: f64, points_per_axis: usize) -> Result<Grid> {
    Grid::new(dim, half_width, points_per_axis)
}

/// Axis-aligned box, used as a support hint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxRegion {
    pub lo: Point,
    pub hi: Point,
}

impl BoxRegion {
    pub fn new(lo: Point, hi: Point) -> Self {
        BoxRegion { lo, hi }
    }

    pub fn contains(&self, dim: usize, p: Point) -> bool {
        let in_axis = |k: usize| p[k] >= self.lo[k] && p[k] <= self.hi[k];
        if dim == 1 {
            in_axis(0)
        } else {
            in_axis(0) && in_axis(1)
        }
    }
}

/// Real-valued samples of a function at the midpoints of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    grid: Grid,
    values: Vec<f64>,
    support_hint: Option<BoxRegion>,
}

impl SampledField {
    pub fn new(grid: Grid, values: Vec<f64>, support_hint: Option<BoxRegion>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::parameter(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "sample {bad} is {}",
                values[bad]
            )));
        }
        if let Some(hint) = &support_hint {
            for (i, v) in values.iter().enumerate() {
                if *v != 0.0 && !hint.contains(grid.dim(), grid.point(i)) {
                    return Err(Error::parameter(
                        "support hint violated: nonzero sample outside hinted box".to_string(),
                    ));
                }
            }
        }
        Ok(SampledField { grid, values, support_hint })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        SampledField::new(grid, values, None)
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        SampledField::new(grid, vec![c; grid.len()], None)
    }

    pub fn zero(grid: Grid) -> Self {
        SampledField { grid, values: vec![0.0; grid.len()], support_hint: None }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support_hint(&self) -> Option<&BoxRegion> {
        self.support_hint.as_ref()
    }

    /// Pointwise absolute value; support is preserved.
    pub fn abs(&self) -> SampledField {
        SampledField {
            grid: self.grid,
            values: self.values.iter().map(|v| v.abs()).collect(),
            support_hint: self.support_hint,
        }
    }

    /// Pointwise `|f|^p`; support is preserved for `p > 0`.
    pub fn abs_powf(&self, p: f64) -> SampledField {
        SampledField {
            grid: self.grid,
            values: self.values.iter().map(|v| v.abs().powf(p)).collect(),
            support_hint: if p > 0.0 { self.support_hint } else { None },
        }
    }

    /// Pointwise scaling; support is preserved.
    pub fn scale(&self, c: f64) -> SampledField {
        SampledField {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
            support_hint: self.support_hint,
        }
    }

    /// Pointwise map; any support hint is dropped.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SampledField {
        SampledField {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
            support_hint: None,
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &SampledField, f: impl Fn(f64, f64) -> f64) -> Result<SampledField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("zip of fields on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| f(*a, *b))
            .collect();
        SampledField::new(self.grid, values, None)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Analytic test functions and weights, the mini-language behind the CLI's
/// `f=` and `w=` options.
///
/// Textual grammar: `indicator:a,b` (dim 1) or `indicator:a,b,c,d` (dim 2
/// box), `gaussian:sigma[,center...]`, `power:a`, `bump:center...,width`,
/// `oscillatory:freq`, `random_smooth:seed`, and a bare number for a
/// constant.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSpec {
    Constant(f64),
    /// Open box `(lo, hi)`; `dim` is fixed by the number of parsed bounds.
    Indicator { lo: Point, hi: Point, dim: usize },
    /// `exp(-|x - center|^2 / (2 sigma^2))`, truncated to `[-L/2, L/2]^dim`.
    Gaussian { sigma: f64, center: Point },
    /// `|x|^a` (Euclidean norm in dim 2). Weight-oriented; never truncated.
    Power(f64),
    /// Smooth bump `exp(1 - 1/(1 - u^2))`, `u = |x - center| / width`.
    Bump { center: Point, width: f64, dim: usize },
    /// `sin(freq * (x_1 + ... + x_dim))`, truncated to `[-L/2, L/2]^dim`.
    Oscillatory { freq: f64 },
    /// Seeded sum of at most 16 Gaussian bumps, truncated to the half cube.
    RandomSmooth { seed: u64 },
}

impl FunctionSpec {
    /// Parse the textual grammar. A bare number is a constant.
    pub fn parse(s: &str) -> Result<FunctionSpec> {
        let s = s.trim();
        if let Ok(c) = s.parse::<f64>() {
            if !c.is_finite() {
                return Err(Error::parameter(format!("non-finite constant {s}")));
            }
            return Ok(FunctionSpec::Constant(c));
        }
        let (kind, rest) = match s.split_once(':') {
            Some(parts) => parts,
            None => return Err(Error::parameter(format!("unknown function spec `{s}`"))),
        };
        let nums: Vec<f64> = if rest.is_empty() {
            Vec::new()
        } else {
            rest.split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::parameter(format!("bad number `{tok}` in `{s}`")))
                })
                .collect::<Result<_>>()?
        };
        match kind {
            "const" => match nums.as_slice() {
                [c] => Ok(FunctionSpec::Constant(*c)),
                _ => Err(Error::parameter(format!("const takes one value: `{s}`"))),
            },
            "indicator" => match nums.as_slice() {
                [a, b] => Ok(FunctionSpec::Indicator { lo: [*a, 0.0], hi: [*b, 0.0], dim: 1 }),
                [a, b, c, d] => {
                    Ok(FunctionSpec::Indicator { lo: [*a, *c], hi: [*b, *d], dim: 2 })
                }
                _ => Err(Error::parameter(format!(
                    "indicator takes 2 (dim 1) or 4 (dim 2) numbers: `{s}`"
                ))),
            },
            "gaussian" => match nums.as_slice() {
                [sigma] => Ok(FunctionSpec::Gaussian { sigma: *sigma, center: [0.0, 0.0] }),
                [sigma, c] => Ok(FunctionSpec::Gaussian { sigma: *sigma, center: [*c, 0.0] }),
                [sigma, cx, cy] => Ok(FunctionSpec::Gaussian { sigma: *sigma, center: [*cx, *cy] }),
                _ => Err(Error::parameter(format!("gaussian takes 1-3 numbers: `{s}`"))),
            },
            "power" => match nums.as_slice() {
                [a] => Ok(FunctionSpec::Power(*a)),
                _ => Err(Error::parameter(format!("power takes one exponent: `{s}`"))),
            },
            "bump" => match nums.as_slice() {
                [c, w] => Ok(FunctionSpec::Bump { center: [*c, 0.0], width: *w, dim: 1 }),
                [cx, cy, w] => Ok(FunctionSpec::Bump { center: [*cx, *cy], width: *w, dim: 2 }),
                _ => Err(Error::parameter(format!(
                    "bump takes center...,width (2 or 3 numbers): `{s}`"
                ))),
            },
            "oscillatory" => match nums.as_slice() {
                [f] => Ok(FunctionSpec::Oscillatory { freq: *f }),
                _ => Err(Error::parameter(format!("oscillatory takes one frequency: `{s}`"))),
            },
            "random_smooth" => match nums.as_slice() {
                [seed] if *seed >= 0.0 && seed.fract() == 0.0 => {
                    Ok(FunctionSpec::RandomSmooth { seed: *seed as u64 })
                }
                _ => Err(Error::parameter(format!(
                    "random_smooth takes a non-negative integer seed: `{s}`"
                ))),
            },
            _ => Err(Error::parameter(format!("unknown function kind `{kind}`"))),
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Constant(c) => write!(f, "{c}"),
            FunctionSpec::Indicator { lo, hi, dim: 1 } => {
                write!(f, "indicator:{},{}", lo[0], hi[0])
            }
            FunctionSpec::Indicator { lo, hi, .. } => {
                write!(f, "indicator:{},{},{},{}", lo[0], hi[0], lo[1], hi[1])
            }
            FunctionSpec::Gaussian { sigma, center } => {
                if center == &[0.0, 0.0] {
                    write!(f, "gaussian:{sigma}")
                } else if center[1] == 0.0 {
                    write!(f, "gaussian:{},{}", sigma, center[0])
                } else {
                    write!(f, "gaussian:{},{},{}", sigma, center[0], center[1])
                }
            }
            FunctionSpec::Power(a) => write!(f, "power:{a}"),
            FunctionSpec::Bump { center, width, dim: 1 } => {
                write!(f, "bump:{},{}", center[0], width)
            }
            FunctionSpec::Bump { center, width, .. } => {
                write!(f, "bump:{},{},{}", center[0], center[1], width)
            }
            FunctionSpec::Oscillatory { freq } => write!(f, "oscillatory:{freq}"),
            FunctionSpec::RandomSmooth { seed } => write!(f, "random_smooth:{seed}"),
        }
    }
}

/// Half-cube support region `[-L/2, L/2]^dim` used by the support rule.
fn in_half_cube(grid: &Grid, p: Point) -> bool {
    let half = grid.half_width() / 2.0;
    if grid.dim() == 1 {
        p[0].abs() <= half
    } else {
        p[0].abs() <= half && p[1].abs() <= half
    }
}

/// Evaluate a [`FunctionSpec`] at the grid midpoints.
///
/// Test functions obey the support rule: indicators and bumps must fit in
/// `[-L/2, L/2]^dim` (rejected otherwise), Gaussian-like and oscillatory
/// samples are truncated to zero outside it. Constants and powers play the
/// weight role and are never truncated.
pub fn sample(spec: &FunctionSpec, grid: &Grid) -> Result<SampledField> {
    let half = grid.half_width() / 2.0;
    let dim = grid.dim();
    match spec {
        FunctionSpec::Constant(c) => SampledField::constant(*grid, *c),
        FunctionSpec::Indicator { lo, hi, dim: sdim } => {
            if *sdim != dim {
                return Err(Error::parameter(format!(
                    "indicator is {sdim}-dimensional but grid has dim {dim}"
                )));
            }
            for k in 0..dim {
                if !(lo[k] < hi[k]) {
                    return Err(Error::parameter("indicator needs lo < hi per axis".into()));
                }
                if lo[k] < -half || hi[k] > half {
                    return Err(Error::parameter(format!(
                        "indicator support [{}, {}] leaves the half cube [-{half}, {half}]",
                        lo[k], hi[k]
                    )));
                }
            }
            let lo = *lo;
            let hi = *hi;
            let values = (0..grid.len())
                .map(|i| {
                    let p = grid.point(i);
                    let mut inside = p[0] > lo[0] && p[0] < hi[0];
                    if dim == 2 {
                        inside = inside && p[1] > lo[1] && p[1] < hi[1];
                    }
                    if inside {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            SampledField::new(*grid, values, Some(BoxRegion::new(lo, hi)))
        }
        FunctionSpec::Gaussian { sigma, center } => {
            if !(sigma.is_finite() && *sigma > 0.0) {
                return Err(Error::parameter(format!("gaussian sigma must be > 0, got {sigma}")));
            }
            let (s, c) = (*sigma, *center);
            let values = (0..grid.len())
                .map(|i| {
                    let p = grid.point(i);
                    if in_half_cube(grid, p) {
                        (-dist_sq(dim, p, c) / (2.0 * s * s)).exp()
                    } else {
                        0.0
                    }
                })
                .collect();
            SampledField::new(*grid, values, Some(half_cube_region(grid)))
        }
        FunctionSpec::Power(a) => {
            let a = *a;
            let values = (0..grid.len())
                .map(|i| {
                    let p = grid.point(i);
                    dist_sq(dim, p, [0.0, 0.0]).sqrt().powf(a)
                })
                .collect();
            SampledField::new(*grid, values, None)
        }
        FunctionSpec::Bump { center, width, dim: sdim } => {
            if *sdim != dim {
                return Err(Error::parameter(format!(
                    "bump is {sdim}-dimensional but grid has dim {dim}"
                )));
            }
            if !(width.is_finite() && *width > 0.0) {
                return Err(Error::parameter(format!("bump width must be > 0, got {width}")));
            }
            for k in 0..dim {
                if center[k] - width < -half || center[k] + width > half {
                    return Err(Error::parameter(format!(
                        "bump support leaves the half cube [-{half}, {half}]"
                    )));
                }
            }
            let (c, w) = (*center, *width);
            let values = (0..grid.len())
                .map(|i| {
                    let u2 = dist_sq(dim, grid.point(i), c) / (w * w);
                    if u2 < 1.0 {
                        (1.0 - 1.0 / (1.0 - u2)).exp()
                    } else {
                        0.0
                    }
                })
                .collect();
            let lo = [c[0] - w, c[1] - w];
            let hi = [c[0] + w, c[1] + w];
            SampledField::new(*grid, values, Some(BoxRegion::new(lo, hi)))
        }
        FunctionSpec::Oscillatory { freq } => {
            if !freq.is_finite() {
                return Err(Error::parameter("oscillatory frequency must be finite".into()));
            }
            let freq = *freq;
            let values = (0..grid.len())
                .map(|i| {
                    let p = grid.point(i);
                    if in_half_cube(grid, p) {
                        let arg = if dim == 1 { p[0] } else { p[0] + p[1] };
                        (freq * arg).sin()
                    } else {
                        0.0
                    }
                })
                .collect();
            SampledField::new(*grid, values, Some(half_cube_region(grid)))
        }
        FunctionSpec::RandomSmooth { seed } => {
            let l = grid.half_width();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let count: usize = rng.gen_range(8..=16);
            let bumps: Vec<(Point, f64, f64)> = (0..count)
                .map(|_| {
                    let cx = rng.gen_range(-l / 4.0..=l / 4.0);
                    let cy = if dim == 2 { rng.gen_range(-l / 4.0..=l / 4.0) } else { 0.0 };
                    let sigma = rng.gen_range(l / 32.0..=l / 8.0);
                    let amp = rng.gen_range(-1.0..=1.0);
                    ([cx, cy], sigma, amp)
                })
                .collect();
            let values = (0..grid.len())
                .map(|i| {
                    let p = grid.point(i);
                    if !in_half_cube(grid, p) {
                        return 0.0;
                    }
                    bumps
                        .iter()
                        .map(|(c, s, a)| a * (-dist_sq(dim, p, *c) / (2.0 * s * s)).exp())
                        .sum()
                })
                .collect();
            SampledField::new(*grid, values, Some(half_cube_region(grid)))
        }
    }
}

fn half_cube_region(grid: &Grid) -> BoxRegion {
    let half = grid.half_width() / 2.0;
    BoxRegion::new([-half, -half], [half, half])
}

/// Midpoint-rule integral `sum f(x_i) w(x_i) h^dim` in fixed index order.
pub fn integrate(f: &SampledField, weight: Option<&SampledField>) -> Result<f64> {
    let hv = f.grid().cell_volume();
    match weight {
        None => Ok(f.values().iter().map(|v| v * hv).sum()),
        Some(w) => {
            if w.grid() != f.grid() {
                return Err(Error::GridMismatch("integrate: weight on a different grid".into()));
            }
            Ok(f.values()
                .iter()
                .zip(w.values().iter())
                .map(|(a, b)| a * b * hv)
                .sum())
        }
    }
}

fn check_ball_args(f_grid: &Grid, center: Point, r: f64) -> Result<()> {
    if !r.is_finite() || r < f_grid.spacing() {
        return Err(Error::parameter(format!(
            "ball radius {r} below grid spacing {}",
            f_grid.spacing()
        )));
    }
    if !center[0].is_finite() || !center[1].is_finite() {
        return Err(Error::NonFinite("ball center".into()));
    }
    Ok(())
}

/// Weighted average of `f` over the open Euclidean ball `B(center, r)`:
/// `sum f w h^dim / sum w h^dim` over in-ball grid points. With no weight the
/// weight is identically one.
pub fn ball_average(
    f: &SampledField,
    center: Point,
    r: f64,
    weight: Option<&SampledField>,
) -> Result<f64> {
    check_ball_args(f.grid(), center, r)?;
    if let Some(w) = weight {
        if w.grid() != f.grid() {
            return Err(Error::GridMismatch("ball_average: weight on a different grid".into()));
        }
    }
    let hv = f.grid().cell_volume();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut count = 0usize;
    match weight {
        None => for_ball(f.grid(), center, r, |i| {
            num += f.value(i) * hv;
            den += hv;
            count += 1;
        }),
        Some(w) => for_ball(f.grid(), center, r, |i| {
            num += f.value(i) * w.value(i) * hv;
            den += w.value(i) * hv;
            count += 1;
        }),
    }
    if count == 0 {
        return Err(Error::DegenerateBall { center, radius: r });
    }
    Ok(num / den)
}

/// Ball mass `w(B) = sum_{x_i in B} w(x_i) h^dim`.
pub fn ball_measure(w: &SampledField, center: Point, r: f64) -> Result<f64> {
    check_ball_args(w.grid(), center, r)?;
    let hv = w.grid().cell_volume();
    let mut total = 0.0;
    let mut count = 0usize;
    for_ball(w.grid(), center, r, |i| {
        total += w.value(i) * hv;
        count += 1;
    });
    if count == 0 {
        return Err(Error::DegenerateBall { center, radius: r });
    }
    Ok(total)
}

/// Number of grid points in the open ball; the discrete Lebesgue measure is
/// `count * h^dim`.
pub fn ball_count(grid: &Grid, center: Point, r: f64) -> usize {
    let mut count = 0usize;
    for_ball(grid, center, r, |_| count += 1);
    count
}

/// Strictly increasing radii in `[h, 2L]`, the finite stand-in for `sup_r`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusLadder {
    radii: Vec<f64>,
}

impl RadiusLadder {
    pub fn new(radii: Vec<f64>, grid: &Grid) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::parameter("radius ladder is empty".into()));
        }
        let h = grid.spacing();
        let max = 2.0 * grid.half_width();
        for pair in radii.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::parameter("radius ladder must be strictly increasing".into()));
            }
        }
        if radii[0] < h {
            return Err(Error::parameter(format!(
                "minimum ladder radius {} below spacing {h}",
                radii[0]
            )));
        }
        if *radii.last().unwrap() > max {
            return Err(Error::parameter(format!(
                "maximum ladder radius {} above 2L = {max}",
                radii.last().unwrap()
            )));
        }
        Ok(RadiusLadder { radii })
    }

    /// Dyadic ladder `top, top/2, ...` down to the grid spacing, ascending.
    pub fn dyadic(grid: &Grid, top: f64) -> Result<Self> {
        let h = grid.spacing();
        if !(top.is_finite() && top >= h) {
            return Err(Error::parameter(format!("dyadic ladder top {top} below spacing {h}")));
        }
        let mut radii = Vec::new();
        let mut r = top.min(2.0 * grid.half_width());
        while r >= h {
            radii.push(r);
            r /= 2.0;
        }
        radii.reverse();
        RadiusLadder::new(radii, grid)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn min(&self) -> f64 {
        self.radii[0]
    }

    pub fn max(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn midpoint_grid_layout() {
        let g = Grid::new(1, 4.0, 8).unwrap();
        assert_eq!(g.spacing(), 1.0);
        let pts: Vec<f64> = (0..8).map(|i| g.point(i)[0]).collect();
        assert_eq!(pts, vec![-3.5, -2.5, -1.5, -0.5, 0.5, 1.5, 2.5, 3.5]);

        let g2 = Grid::new(2, 1.0, 8).unwrap();
        assert_eq!(g2.len(), 64);
        assert_eq!(g2.spacing(), 0.25);
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(Grid::new(1, 4.0, 7).is_err());
        assert!(Grid::new(3, 4.0, 8).is_err());
        assert!(Grid::new(1, -1.0, 8).is_err());
        assert!(Grid::new(1, 4.0, 6).is_err());
    }

    #[test]
    fn sample_indicator_and_gaussian() {
        let g = Grid::new(1, 4.0, 8).unwrap();
        let ind = sample(&FunctionSpec::parse("indicator:0,1").unwrap(), &g).unwrap();
        let expect: Vec<f64> = (0..8)
            .map(|i| {
                let x = g.point(i)[0];
                if x > 0.0 && x < 1.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        assert_eq!(ind.values(), expect.as_slice());

        let gauss = sample(&FunctionSpec::parse("gaussian:1").unwrap(), &g).unwrap();
        // x = 0.5 is index 4.
        assert!((gauss.value(4) - (-0.125f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn sample_rejects_out_of_rule_supports() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        assert!(sample(&FunctionSpec::parse("indicator:0,3").unwrap(), &g).is_err());
        assert!(sample(&FunctionSpec::parse("bump:1.5,1").unwrap(), &g).is_err());
        assert!(sample(&FunctionSpec::parse("bump:0,1").unwrap(), &g).is_ok());
    }

    #[test]
    fn random_smooth_is_reproducible() {
        let g = Grid::new(1, 4.0, 128).unwrap();
        let spec = FunctionSpec::parse("random_smooth:7").unwrap();
        let a = sample(&spec, &g).unwrap();
        let b = sample(&spec, &g).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn integrate_constants_and_aligned_indicators() {
        let g = Grid::new(1, 4.0, 8).unwrap();
        let one = SampledField::constant(g, 1.0).unwrap();
        assert_eq!(integrate(&one, None).unwrap(), 8.0);

        let ind = sample(&FunctionSpec::parse("indicator:0,1").unwrap(), &g).unwrap();
        assert_eq!(integrate(&ind, None).unwrap(), 1.0);
    }

    #[test]
    fn integrate_gaussian_matches_simpson_oracle() {
        let g = Grid::new(1, 8.0, 1024).unwrap();
        let f = sample(&FunctionSpec::parse("gaussian:1").unwrap(), &g).unwrap();
        let got = integrate(&f, None).unwrap();
        // Independent oracle: composite Simpson for the truncated integrand
        // over [-4, 4] at 2^16 panels.
        let (a, b, n) = (-4.0_f64, 4.0_f64, 1 << 16);
        let dx = (b - a) / n as f64;
        let gauss = |x: f64| (-x * x / 2.0).exp();
        let mut acc = gauss(a) + gauss(b);
        for k in 1..n {
            let x = a + k as f64 * dx;
            acc += if k % 2 == 1 { 4.0 * gauss(x) } else { 2.0 * gauss(x) };
        }
        let oracle = acc * dx / 3.0;
        assert!(
            (got - oracle).abs() < 1e-6,
            "midpoint {got} vs oracle {oracle}"
        );
        // The truncated mass is within float noise of sqrt(2 pi) erf(2 sqrt 2).
        assert!((oracle - (2.0 * std::f64::consts::PI).sqrt()).abs() < 3e-4);
    }

    #[test]
    fn refinement_differences_shrink() {
        let spec = FunctionSpec::parse("gaussian:0.7").unwrap();
        let vals: Vec<f64> = [256usize, 512, 1024]
            .iter()
            .map(|n| {
                let g = Grid::new(1, 4.0, *n).unwrap();
                integrate(&sample(&spec, &g).unwrap(), None).unwrap()
            })
            .collect();
        let d1 = (vals[1] - vals[0]).abs();
        let d2 = (vals[2] - vals[1]).abs();
        assert!(d2 < d1, "successive differences should decrease: {d1} then {d2}");
    }

    #[test]
    fn ball_average_of_constant_is_constant() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        let f = SampledField::constant(g, 3.25).unwrap();
        let w = sample(&FunctionSpec::parse("power:0.5").unwrap(), &g).unwrap();
        for r in [g.spacing(), 0.5, 1.0, 2.0] {
            let avg = ball_average(&f, [0.3, 0.0], r, Some(&w)).unwrap();
            assert_eq!(avg, 3.25);
        }
    }

    #[test]
    fn ball_average_examples() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        let ind = sample(&FunctionSpec::parse("indicator:0,1").unwrap(), &g).unwrap();
        // Aligned ball (0, 1) around center 0.5.
        let avg = ball_average(&ind, [0.5, 0.0], 0.5, None).unwrap();
        assert_eq!(avg, 1.0);

        let f = SampledField::from_fn(g, |p| p[0]).unwrap();
        let odd = ball_average(&f, [0.0, 0.0], 1.0, None).unwrap();
        assert!(odd.abs() < 1e-12);
    }

    #[test]
    fn ball_measure_dim1_aligned() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        let one = SampledField::constant(g, 1.0).unwrap();
        let m = ball_measure(&one, [0.0, 0.0], 1.0).unwrap();
        assert!((m - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ball_measure_dim2_disc_area() {
        let g = Grid::new(2, 1.0, 128).unwrap();
        let one = SampledField::constant(g, 1.0).unwrap();
        // Center at the grid point nearest the origin.
        let h = g.spacing();
        let c = [h / 2.0, h / 2.0];
        let m = ball_measure(&one, c, 0.9).unwrap();
        let disc = std::f64::consts::PI * 0.81;
        assert!(
            (m - disc).abs() <= 4.0 * h,
            "disc {disc} vs counted {m}, 4h = {}",
            4.0 * h
        );
    }

    #[test]
    fn degenerate_and_invalid_balls() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        let one = SampledField::constant(g, 1.0).unwrap();
        assert!(matches!(
            ball_measure(&one, [0.0, 0.0], 0.01),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            ball_average(&one, [100.0, 0.0], 1.0, None),
            Err(Error::DegenerateBall { .. })
        ));
    }

    #[test]
    fn integrate_is_linear_and_dominated() {
        let g = Grid::new(1, 4.0, 256).unwrap();
        let f = sample(&FunctionSpec::parse("random_smooth:3").unwrap(), &g).unwrap();
        let gg = sample(&FunctionSpec::parse("oscillatory:5").unwrap(), &g).unwrap();
        let lhs = integrate(&f.zip_map(&gg, |a, b| 2.0 * a - 3.0 * b).unwrap(), None).unwrap();
        let rhs = 2.0 * integrate(&f, None).unwrap() - 3.0 * integrate(&gg, None).unwrap();
        assert!(rel_err(lhs, rhs.max(1e-30)) < 1e-10 || (lhs - rhs).abs() < 1e-12);
        let abs_int = integrate(&f.abs(), None).unwrap();
        assert!(abs_int >= integrate(&f, None).unwrap().abs());
    }

    #[test]
    fn ladder_construction() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        let lad = RadiusLadder::dyadic(&g, 8.0).unwrap();
        assert_eq!(lad.max(), 8.0);
        assert!(lad.min() >= g.spacing());
        assert!(RadiusLadder::new(vec![0.5, 0.5], &g).is_err());
        assert!(RadiusLadder::new(vec![0.01], &g).is_err());
        assert!(RadiusLadder::new(vec![9.0], &g).is_err());
    }

    #[test]
    fn spec_grammar_round_trip() {
        for s in [
            "indicator:0,1",
            "indicator:0,1,-0.5,0.5",
            "gaussian:1",
            "gaussian:0.5,0.25",
            "power:0.5",
            "bump:0,1",
            "oscillatory:3",
            "random_smooth:7",
            "1",
        ] {
            let spec = FunctionSpec::parse(s).unwrap();
            let printed = spec.to_string();
            assert_eq!(FunctionSpec::parse(&printed).unwrap(), spec, "{s} -> {printed}");
        }
        assert!(FunctionSpec::parse("mystery:1").is_err());
    }
}
