//! Littlewood-Paley square functions: the generalized `g` function built
//! from a mean-zero profile, and Wilson's intrinsic square function whose
//! envelope `A_alpha` is approximated by a maximum over a finite dictionary
//! of normalized alpha-Hoelder bumps.

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledField};
use crate::operators::singular::level_weights;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Dyadic levels `lo, 2 lo, 4 lo, ...` capped at `hi`, validated against the
/// grid spacing.
pub fn dyadic_levels(grid: &Grid, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo >= grid.spacing() && lo <= hi) {
        return Err(Error::parameter(format!(
            "bad level range [{lo}, {hi}] for spacing {}",
            grid.spacing()
        )));
    }
    let mut levels = Vec::new();
    let mut t = lo;
    while t <= hi * (1.0 + 1e-12) {
        levels.push(t);
        t *= 2.0;
    }
    Ok(levels)
}

/// Linear (dim 1) or bilinear (dim 2) interpolation of a profile field at an
/// arbitrary point of its cube; zero outside the sampled midpoints.
fn interp(profile: &SampledField, u: [f64; 2]) -> f64 {
    let grid = profile.grid();
    let n = grid.points_per_axis();
    let h = grid.spacing();
    let l = grid.half_width();
    let pos0 = (u[0] + l) / h - 0.5;
    if grid.dim() == 1 {
        if pos0 <= -1.0 || pos0 >= n as f64 {
            return 0.0;
        }
        let i0 = pos0.floor();
        let frac = pos0 - i0;
        let i0 = i0 as i64;
        let a = if i0 >= 0 && (i0 as usize) < n { profile.value(i0 as usize) } else { 0.0 };
        let i1 = i0 + 1;
        let b = if i1 >= 0 && (i1 as usize) < n { profile.value(i1 as usize) } else { 0.0 };
        a * (1.0 - frac) + b * frac
    } else {
        let pos1 = (u[1] + l) / h - 0.5;
        if pos0 <= -1.0 || pos0 >= n as f64 || pos1 <= -1.0 || pos1 >= n as f64 {
            return 0.0;
        }
        let i0 = pos0.floor();
        let j0 = pos1.floor();
        let fi = pos0 - i0;
        let fj = pos1 - j0;
        let (i0, j0) = (i0 as i64, j0 as i64);
        let at = |i: i64, j: i64| -> f64 {
            if i >= 0 && (i as usize) < n && j >= 0 && (j as usize) < n {
                profile.value(i as usize * n + j as usize)
            } else {
                0.0
            }
        };
        at(i0, j0) * (1.0 - fi) * (1.0 - fj)
            + at(i0 + 1, j0) * fi * (1.0 - fj)
            + at(i0, j0 + 1) * (1.0 - fi) * fj
            + at(i0 + 1, j0 + 1) * fi * fj
    }
}

/// Convolution with the dilated profile `phi_t(x) = t^{-n} phi(x/t)` by
/// direct summation over a precomputed stencil.
///
/// With `mean_correct` the stencil's discrete mean is subtracted first, so
/// constants are annihilated exactly regardless of interpolation error.
pub fn convolve_scaled_profile(
    f: &SampledField,
    profile: &SampledField,
    t: f64,
    mean_correct: bool,
) -> Result<SampledField> {
    let grid = *f.grid();
    let dim = grid.dim();
    if profile.grid().dim() != dim {
        return Err(Error::parameter("profile dimension mismatch".into()));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::parameter(format!("dilation scale must be positive, got {t}")));
    }
    let h = grid.spacing();
    let support = profile.grid().half_width();
    let reach = ((t * support) / h).ceil() as i64;
    let tn = if dim == 1 { t } else { t * t };
    let n = grid.points_per_axis() as i64;
    let hv = grid.cell_volume();

    if dim == 1 {
        let mut stencil: Vec<f64> = (-reach..=reach)
            .map(|d| interp(profile, [d as f64 * h / t, 0.0]) / tn)
            .collect();
        if mean_correct {
            let mean = stencil.iter().sum::<f64>() / stencil.len() as f64;
            for s in &mut stencil {
                *s -= mean;
            }
        }
        let mut out = vec![0.0; grid.len()];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (s, d) in stencil.iter().zip(-reach..=reach) {
                let j = i as i64 - d;
                if j >= 0 && j < n {
                    acc += s * f.value(j as usize) * hv;
                }
            }
            *slot = acc;
        }
        SampledField::new(grid, out, None)
    } else {
        let side = (2 * reach + 1) as usize;
        let mut stencil = vec![0.0; side * side];
        for di in -reach..=reach {
            for dj in -reach..=reach {
                stencil[((di + reach) as usize) * side + (dj + reach) as usize] =
                    interp(profile, [di as f64 * h / t, dj as f64 * h / t]) / tn;
            }
        }
        if mean_correct {
            let mean = stencil.iter().sum::<f64>() / stencil.len() as f64;
            for s in &mut stencil {
                *s -= mean;
            }
        }
        let mut out = vec![0.0; grid.len()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let (i, j) = ((idx as i64) / n, (idx as i64) % n);
            let mut acc = 0.0;
            for di in -reach..=reach {
                let yi = i - di;
                if yi < 0 || yi >= n {
                    continue;
                }
                let row = ((di + reach) as usize) * side;
                for dj in -reach..=reach {
                    let yj = j - dj;
                    if yj >= 0 && yj < n {
                        acc += stencil[row + (dj + reach) as usize]
                            * f.value((yi * n + yj) as usize)
                            * hv;
                    }
                }
            }
            *slot = acc;
        }
        SampledField::new(grid, out, None)
    }
}

/// Default `g`-function profile: the normalized second derivative of a
/// Gaussian, `(|u|^2 - n) e^{-|u|^2/2}` up to scale. Mean zero with decay
/// well beyond the `(1 + |u|)^{-(n+1)}` requirement, sampled on its own
/// wide grid and mean-subtracted there.
pub fn default_g_profile(dim: usize) -> Result<SampledField> {
    let grid = if dim == 1 {
        Grid::new(1, 8.0, 2048)?
    } else {
        Grid::new(2, 8.0, 256)?
    };
    let nf = dim as f64;
    let scale = 1.0 / nf;
    let raw = SampledField::from_fn(grid, |p| {
        let r2 = p[0] * p[0] + if dim == 2 { p[1] * p[1] } else { 0.0 };
        scale * (r2 - nf) * (-r2 / 2.0).exp()
    })?;
    let mean =
        raw.values().iter().sum::<f64>() / raw.len() as f64;
    Ok(raw.map(move |v| v - mean))
}

/// Generalized Littlewood-Paley function
/// `g_phi f = (int_0^inf |phi_t * f|^2 dt/t)^{1/2}` over the given dyadic
/// levels.
pub fn g_function(
    f: &SampledField,
    profile: &SampledField,
    t_levels: &[f64],
) -> Result<SampledField> {
    let grid = *f.grid();
    if t_levels.is_empty() {
        return Err(Error::parameter("no g-function levels given".into()));
    }
    for pair in t_levels.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(Error::parameter("levels must be strictly increasing".into()));
        }
    }
    // Reject profiles that are not mean zero relative to their own scale.
    let hv = profile.grid().cell_volume();
    let mass: f64 = profile.values().iter().map(|v| v * hv).sum();
    let scale: f64 = profile.values().iter().map(|v| v.abs() * hv).sum();
    if mass.abs() > 1e-8 * scale.max(1e-300) {
        return Err(Error::parameter(format!(
            "g-function profile is not mean zero (mass {mass})"
        )));
    }
    let weights = level_weights(t_levels, 0.0);
    let mut acc = vec![0.0; grid.len()];
    for (t, wk) in t_levels.iter().zip(weights.iter()) {
        let conv = convolve_scaled_profile(f, profile, *t, true)?;
        for (a, c) in acc.iter_mut().zip(conv.values().iter()) {
            *a += c * c * wk;
        }
    }
    SampledField::new(grid, acc.iter().map(|v| v.sqrt()).collect(), None)
}

/// Finite dictionary standing in for Wilson's family `C_alpha`: mean-zero
/// profiles supported in the unit ball with discrete alpha-Hoelder seminorm
/// at most 1. The maximum of `|f * phi_t|` over the dictionary is a
/// certified lower bound for the intrinsic envelope `A_alpha`.
#[derive(Clone, Debug)]
pub struct BumpDictionary {
    alpha: f64,
    profiles: Vec<SampledField>,
}

impl BumpDictionary {
    /// Seeded construction: differences of two Gaussians at random offsets
    /// inside the unit ball, windowed by `(1 - |u|^2)_+^2`, mean-fixed
    /// within the ball, and rescaled by the measured Hoelder seminorm.
    pub fn seeded(dim: usize, size: usize, alpha: f64, seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::parameter(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if size == 0 {
            return Err(Error::parameter("dictionary size must be positive".into()));
        }
        let grid = if dim == 1 {
            Grid::new(1, 1.0, 256)?
        } else {
            Grid::new(2, 1.0, 64)?
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let window = |p: [f64; 2]| -> f64 {
            let r2 = p[0] * p[0] + if dim == 2 { p[1] * p[1] } else { 0.0 };
            let w = 1.0 - r2;
            if w > 0.0 {
                w * w
            } else {
                0.0
            }
        };
        let window_field = SampledField::from_fn(grid, window)?;
        let hv = grid.cell_volume();
        let window_mass: f64 = window_field.values().iter().map(|v| v * hv).sum();

        let mut profiles = Vec::with_capacity(size);
        for _ in 0..size {
            let c1 = [rng.gen_range(-0.5..=0.5), if dim == 2 { rng.gen_range(-0.5..=0.5) } else { 0.0 }];
            let c2 = [rng.gen_range(-0.5..=0.5), if dim == 2 { rng.gen_range(-0.5..=0.5) } else { 0.0 }];
            let s1: f64 = rng.gen_range(0.15..=0.45);
            let s2: f64 = rng.gen_range(0.15..=0.45);
            let raw = SampledField::from_fn(grid, |p| {
                let d1 = crate::grid::dist_sq(dim, p, c1);
                let d2 = crate::grid::dist_sq(dim, p, c2);
                ((-d1 / (2.0 * s1 * s1)).exp() - (-d2 / (2.0 * s2 * s2)).exp()) * window(p)
            })?;
            let mass: f64 = raw.values().iter().map(|v| v * hv).sum();
            let shift = mass / window_mass;
            let centered = raw.zip_map(&window_field, move |a, w| a - shift * w)?;
            // Normalize by the measured discrete Hoelder seminorm with a
            // 1e-12 margin so the bound holds after rounding.
            let semi = holder_seminorm(&centered, alpha);
            let profile = if semi > 0.0 {
                centered.scale(1.0 / (semi * (1.0 + 1e-12)))
            } else {
                centered
            };
            profiles.push(profile);
        }
        Ok(BumpDictionary { alpha, profiles })
    }

    pub fn from_profiles(alpha: f64, profiles: Vec<SampledField>) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::parameter("empty dictionary".into()));
        }
        Ok(BumpDictionary { alpha, profiles })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn profiles(&self) -> &[SampledField] {
        &self.profiles
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// Discrete alpha-Hoelder seminorm: sup over sample pairs of
/// `|phi(x_i) - phi(x_j)| / |x_i - x_j|^alpha`.
pub fn holder_seminorm(profile: &SampledField, alpha: f64) -> f64 {
    let grid = profile.grid();
    let n = grid.len();
    let mut worst = 0.0_f64;
    for i in 0..n {
        let pi = grid.point(i);
        let vi = profile.value(i);
        for j in (i + 1)..n {
            let d = crate::grid::dist_sq(grid.dim(), pi, grid.point(j)).sqrt();
            let ratio = (vi - profile.value(j)).abs() / d.powf(alpha);
            if ratio > worst {
                worst = ratio;
            }
        }
    }
    worst
}

/// Discretization of the cone `Gamma(x) = {(y, t): |x - y| < t}` together
/// with the quadrature weights for `dt / t^{n+1}`.
#[derive(Clone, Debug)]
pub struct ConeDiscretization {
    levels: Vec<f64>,
    offsets: Vec<Vec<(i64, i64)>>,
    weights: Vec<f64>,
}

impl ConeDiscretization {
    /// Offsets per level cover `{|y - x| < t}`; every (offset, level) pair
    /// satisfies `|offset| < level` by construction.
    pub fn new(grid: &Grid, levels: &[f64]) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::parameter("cone discretization needs levels".into()));
        }
        for pair in levels.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::parameter("levels must be strictly increasing".into()));
            }
        }
        if levels[0] < grid.spacing() || *levels.last().unwrap() > grid.half_width() / 2.0 {
            return Err(Error::parameter(format!(
                "cone levels must lie in [{}, {}]",
                grid.spacing(),
                grid.half_width() / 2.0
            )));
        }
        let h = grid.spacing();
        let dim = grid.dim();
        let offsets = levels
            .iter()
            .map(|t| {
                let reach = (t / h).ceil() as i64;
                let mut offs = Vec::new();
                if dim == 1 {
                    for d in -reach..=reach {
                        if (d as f64 * h).abs() < *t {
                            offs.push((d, 0));
                        }
                    }
                } else {
                    for di in -reach..=reach {
                        for dj in -reach..=reach {
                            let r = ((di * di + dj * dj) as f64).sqrt() * h;
                            if r < *t {
                                offs.push((di, dj));
                            }
                        }
                    }
                }
                offs
            })
            .collect();
        let weights = level_weights(levels, dim as f64);
        Ok(ConeDiscretization { levels: levels.to_vec(), offsets, weights })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

/// Intrinsic square function
/// `S_alpha f(x) = (iint_{Gamma(x)} A_alpha(f)(y,t)^2 dy dt / t^{n+1})^{1/2}`
/// with the envelope `A_alpha` replaced by the dictionary maximum.
pub fn intrinsic_square(
    f: &SampledField,
    dict: &BumpDictionary,
    cone: &ConeDiscretization,
) -> Result<SampledField> {
    let grid = *f.grid();
    if dict.is_empty() {
        return Err(Error::parameter("empty dictionary".into()));
    }
    let n = grid.points_per_axis() as i64;
    let hv = grid.cell_volume();
    let mut acc = vec![0.0; grid.len()];
    for (k, t) in cone.levels.iter().enumerate() {
        // Envelope at this level: max over the dictionary of |f * phi_t|.
        let mut envelope = vec![0.0_f64; grid.len()];
        for profile in dict.profiles() {
            let conv = convolve_scaled_profile(f, profile, *t, true)?;
            for (e, c) in envelope.iter_mut().zip(conv.values().iter()) {
                let a = c.abs();
                if a > *e {
                    *e = a;
                }
            }
        }
        let wk = cone.weights[k];
        for (idx, slot) in acc.iter_mut().enumerate() {
            let (i, j) = ((idx as i64) / n, (idx as i64) % n);
            let mut level_sum = 0.0;
            for (di, dj) in &cone.offsets[k] {
                let (yi, yj) = (i + di, j + dj);
                let ok = if grid.dim() == 1 {
                    yi >= 0 && yi < n
                } else {
                    yi >= 0 && yi < n && yj >= 0 && yj < n
                };
                if ok {
                    let v = envelope[if grid.dim() == 1 { yi as usize } else { (yi * n + yj) as usize }];
                    level_sum += v * v * hv;
                }
            }
            *slot += level_sum * wk;
        }
    }
    SampledField::new(grid, acc.iter().map(|v| v.sqrt()).collect(), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, FunctionSpec, Grid};

    #[test]
    fn g_profile_is_mean_zero_and_accepted() {
        let phi = default_g_profile(1).unwrap();
        let hv = phi.grid().cell_volume();
        let mass: f64 = phi.values().iter().map(|v| v * hv).sum();
        assert!(mass.abs() < 1e-12);
        let g = Grid::new(1, 4.0, 128).unwrap();
        let f = sample(&FunctionSpec::RandomSmooth { seed: 4 }, &g).unwrap();
        let levels = dyadic_levels(&g, 4.0 * g.spacing(), 1.0).unwrap();
        assert!(g_function(&f, &phi, &levels).is_ok());
        // A clearly non-mean-zero profile is rejected.
        let bad = SampledField::constant(Grid::new(1, 1.0, 64).unwrap(), 1.0).unwrap();
        assert!(g_function(&f, &bad, &levels).is_err());
    }

    #[test]
    fn g_function_zero_input_and_homogeneity() {
        let g = Grid::new(1, 4.0, 128).unwrap();
        let phi = default_g_profile(1).unwrap();
        let levels = dyadic_levels(&g, 4.0 * g.spacing(), 1.0).unwrap();
        let z = SampledField::zero(g);
        let gz = g_function(&z, &phi, &levels).unwrap();
        assert!(gz.values().iter().all(|v| *v == 0.0));

        let f = sample(&FunctionSpec::RandomSmooth { seed: 9 }, &g).unwrap();
        let a = g_function(&f, &phi, &levels).unwrap();
        let b = g_function(&f.scale(3.0), &phi, &levels).unwrap();
        for i in 0..g.len() {
            assert!((b.value(i) - 3.0 * a.value(i)).abs() <= 1e-12 * (1.0 + a.value(i)));
        }
    }

    #[test]
    fn g_annihilates_locally_constant_input() {
        // f = c on a neighborhood much larger than the top level: g at the
        // center is tiny relative to |c|.
        let g = Grid::new(1, 4.0, 512).unwrap();
        let c = 7.0;
        let f = SampledField::from_fn(g, |p| if p[0].abs() < 1.9 { c } else { 0.0 }).unwrap();
        let phi = default_g_profile(1).unwrap();
        let levels = dyadic_levels(&g, 2.0 * g.spacing(), 0.125).unwrap();
        let out = g_function(&f, &phi, &levels).unwrap();
        let center = g.len() / 2;
        assert!(
            out.value(center) <= 1e-3 * c,
            "g at center {} should be near zero",
            out.value(center)
        );
    }

    #[test]
    fn g_triangle_inequality() {
        let g = Grid::new(1, 4.0, 128).unwrap();
        let phi = default_g_profile(1).unwrap();
        let levels = dyadic_levels(&g, 4.0 * g.spacing(), 0.5).unwrap();
        let f = sample(&FunctionSpec::RandomSmooth { seed: 1 }, &g).unwrap();
        let gg = sample(&FunctionSpec::RandomSmooth { seed: 2 }, &g).unwrap();
        let sum = f.zip_map(&gg, |a, b| a + b).unwrap();
        let gs = g_function(&sum, &phi, &levels).unwrap();
        let gf = g_function(&f, &phi, &levels).unwrap();
        let gh = g_function(&gg, &phi, &levels).unwrap();
        for i in 0..g.len() {
            assert!(gs.value(i) <= gf.value(i) + gh.value(i) + 1e-10);
        }
    }

    #[test]
    fn dictionary_invariants() {
        let dict = BumpDictionary::seeded(1, 6, 0.5, 42).unwrap();
        for profile in dict.profiles() {
            let hv = profile.grid().cell_volume();
            let mass: f64 = profile.values().iter().map(|v| v * hv).sum();
            assert!(mass.abs() < 1e-12, "profile mass {mass}");
            let semi = holder_seminorm(profile, 0.5);
            assert!(semi <= 1.0 + 1e-12, "seminorm {semi}");
            // Supported in the unit ball: boundary samples vanish.
            let g = profile.grid();
            for i in 0..g.len() {
                if crate::grid::dist_sq(g.dim(), g.point(i), [0.0, 0.0]) >= 1.0 {
                    assert_eq!(profile.value(i), 0.0);
                }
            }
        }
    }

    #[test]
    fn intrinsic_zero_homogeneity_and_monotonicity() {
        let g = Grid::new(1, 4.0, 128).unwrap();
        let levels = dyadic_levels(&g, 4.0 * g.spacing(), 1.0).unwrap();
        let cone = ConeDiscretization::new(&g, &levels).unwrap();
        let dict_small = BumpDictionary::seeded(1, 3, 0.5, 7).unwrap();
        // Superset dictionary: same three profiles plus three more.
        let mut profiles = dict_small.profiles().to_vec();
        profiles.extend(BumpDictionary::seeded(1, 3, 0.5, 8).unwrap().profiles().iter().cloned());
        let dict_big = BumpDictionary::from_profiles(0.5, profiles).unwrap();

        let z = SampledField::zero(g);
        let sz = intrinsic_square(&z, &dict_small, &cone).unwrap();
        assert!(sz.values().iter().all(|v| *v == 0.0));

        let f = sample(&FunctionSpec::RandomSmooth { seed: 13 }, &g).unwrap();
        let s1 = intrinsic_square(&f, &dict_small, &cone).unwrap();
        let s2 = intrinsic_square(&f.scale(2.0), &dict_small, &cone).unwrap();
        for i in 0..g.len() {
            assert!((s2.value(i) - 2.0 * s1.value(i)).abs() <= 1e-12 * (1.0 + s1.value(i)));
        }
        let sbig = intrinsic_square(&f, &dict_big, &cone).unwrap();
        for i in 0..g.len() {
            assert!(sbig.value(i) >= s1.value(i) - 1e-15, "dictionary monotonicity");
        }
    }

    #[test]
    fn single_profile_reduces_to_cone_square_function() {
        let g = Grid::new(1, 4.0, 128).unwrap();
        let levels = dyadic_levels(&g, 4.0 * g.spacing(), 0.5).unwrap();
        let cone = ConeDiscretization::new(&g, &levels).unwrap();
        let dict = BumpDictionary::seeded(1, 1, 0.5, 3).unwrap();
        let f = sample(&FunctionSpec::RandomSmooth { seed: 17 }, &g).unwrap();
        let s = intrinsic_square(&f, &dict, &cone).unwrap();

        // Independent double-sum oracle over the same discretization.
        let profile = &dict.profiles()[0];
        let convs: Vec<SampledField> = levels
            .iter()
            .map(|t| convolve_scaled_profile(&f, profile, *t, true).unwrap())
            .collect();
        let weights = level_weights(&levels, 1.0);
        let hv = g.cell_volume();
        let h = g.spacing();
        for idx in (0..g.len()).step_by(11) {
            let x = g.point(idx)[0];
            let mut acc = 0.0;
            for (k, t) in levels.iter().enumerate() {
                for j in 0..g.len() {
                    let y = g.point(j)[0];
                    if (x - y).abs() < *t {
                        acc += convs[k].value(j).powi(2) * hv * weights[k];
                    }
                }
            }
            let oracle = acc.sqrt();
            assert!(
                (s.value(idx) - oracle).abs() <= 1e-10 * (1.0 + oracle),
                "at x = {x}: {} vs {oracle}",
                s.value(idx)
            );
        }
        let _ = h;
    }
}
