//! Muckenhoupt weight classes on sampled grids.
//!
//! Per-ball `A_p` and `A_{p,q}` quantities, their suprema over finite ball
//! families, dual weights `w^{1-p'}`, doubling ratios `w(2B)/w(B)`, and the
//! density inequality `w(E)/w(B) <= C (|E|/|B|)^delta` for concentric
//! sub-balls. Family suprema are lower bounds for the true constants and are
//! reported with their argmax ball.

use crate::error::{Error, Result};
use crate::grid::{
    ball_count, ball_measure, for_ball, FunctionSpec, Grid, Point, RadiusLadder, SampledField,
};
use serde::Serialize;

/// Strictly positive samples playing the role of `w`, `v` or an
/// `Omega`-derived density. An optional closed-form tag supports oracle
/// cross-checks at other resolutions.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightField {
    field: SampledField,
    closed_form: Option<FunctionSpec>,
}

impl WeightField {
    pub fn new(field: SampledField, closed_form: Option<FunctionSpec>) -> Result<Self> {
        if let Some(bad) = field.values().iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::parameter(format!(
                "weight sample {bad} is {} (weights must be strictly positive and finite)",
                field.values()[bad]
            )));
        }
        Ok(WeightField { field, closed_form })
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        WeightField::new(
            SampledField::constant(grid, c)?,
            Some(FunctionSpec::Constant(c)),
        )
    }

    pub fn from_spec(spec: &FunctionSpec, grid: &Grid) -> Result<Self> {
        WeightField::new(crate::grid::sample(spec, grid)?, Some(spec.clone()))
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> f64) -> Result<Self> {
        WeightField::new(SampledField::from_fn(grid, f)?, None)
    }

    pub fn field(&self) -> &SampledField {
        &self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn closed_form(&self) -> Option<&FunctionSpec> {
        self.closed_form.as_ref()
    }

    /// Pointwise power `w^a`, with the closed-form tag propagated when the
    /// power of the tagged family is again in the family.
    pub fn powf(&self, a: f64) -> WeightField {
        let values = self.field.values().iter().map(|v| v.powf(a)).collect();
        let field = SampledField::new(*self.field.grid(), values, None)
            .expect("powers of positive finite samples are positive finite");
        let closed_form = match &self.closed_form {
            Some(FunctionSpec::Power(b)) => Some(FunctionSpec::Power(b * a)),
            Some(FunctionSpec::Constant(c)) => Some(FunctionSpec::Constant(c.powf(a))),
            _ => None,
        };
        WeightField { field, closed_form }
    }
}

/// A Euclidean ball (center, radius).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Self {
        Ball { center, radius }
    }
}

/// Finite family of balls: grid-point centers (configurable stride) crossed
/// with a radius ladder. Suprema over the family stand in for `sup_B`.
#[derive(Clone, Debug)]
pub struct BallFamily {
    centers: Vec<Point>,
    ladder: RadiusLadder,
}

impl BallFamily {
    pub fn from_parts(centers: Vec<Point>, ladder: RadiusLadder) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::parameter("ball family has no centers".into()));
        }
        Ok(BallFamily { centers, ladder })
    }

    /// Canonical family: every `stride`-th grid point per axis, plus the
    /// points adjacent to the origin (so origin-straddling balls are always
    /// present), crossed with `ladder`.
    pub fn standard(grid: &Grid, stride: usize, ladder: RadiusLadder) -> Result<Self> {
        if stride == 0 {
            return Err(Error::parameter("stride must be positive".into()));
        }
        let n = grid.points_per_axis();
        let mut axis: Vec<usize> = (0..n).step_by(stride).collect();
        for c in [n / 2 - 1, n / 2] {
            if !axis.contains(&c) {
                axis.push(c);
            }
        }
        axis.sort_unstable();
        let centers = if grid.dim() == 1 {
            axis.iter().map(|i| grid.point(*i)).collect()
        } else {
            let mut pts = Vec::with_capacity(axis.len() * axis.len());
            for i in &axis {
                for j in &axis {
                    pts.push(grid.point(i * n + j));
                }
            }
            pts
        };
        BallFamily::from_parts(centers, ladder)
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn ladder(&self) -> &RadiusLadder {
        &self.ladder
    }

    pub fn len(&self) -> usize {
        self.centers.len() * self.ladder.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Balls in deterministic order: centers outer, radii inner.
    pub fn iter(&self) -> impl Iterator<Item = Ball> + '_ {
        self.centers.iter().flat_map(move |c| {
            self.ladder.radii().iter().map(move |r| Ball::new(*c, *r))
        })
    }
}

/// Supremum estimate with its argmax ball, serialized as
/// `{constant, center, radius, family_size}`.
#[derive(Clone, Debug, Serialize)]
pub struct ApReport {
    pub constant: f64,
    pub center: Point,
    pub radius: f64,
    pub family_size: usize,
}

impl ApReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Unweighted mean of `values` over the open ball, plus the point count.
fn ball_mean(values: &[f64], grid: &Grid, center: Point, r: f64) -> Result<(f64, usize)> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for_ball(grid, center, r, |i| {
        sum += values[i];
        count += 1;
    });
    if count == 0 {
        return Err(Error::DegenerateBall { center, radius: r });
    }
    Ok((sum / count as f64, count))
}

fn check_p_gt_one(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::parameter(format!("exponent p must satisfy 1 < p < inf, got {p}")));
    }
    Ok(())
}

/// Per-ball `A_p` quantity `(avg_B w) (avg_B w^{1/(1-p)})^{p-1}`.
pub fn ap_quantity(w: &WeightField, ball: &Ball, p: f64) -> Result<f64> {
    check_p_gt_one(p)?;
    let dual = w.powf(1.0 / (1.0 - p));
    ap_quantity_with_dual(w, &dual, ball, p)
}

fn ap_quantity_with_dual(w: &WeightField, dual: &WeightField, ball: &Ball, p: f64) -> Result<f64> {
    let (avg_w, _) = ball_mean(w.field().values(), w.grid(), ball.center, ball.radius)?;
    let (avg_d, _) = ball_mean(dual.field().values(), w.grid(), ball.center, ball.radius)?;
    Ok(avg_w * avg_d.powf(p - 1.0))
}

/// Supremum of [`ap_quantity`] over a finite family; a lower bound for the
/// true `[w]_{A_p}` that is monotone in the family.
pub fn ap_constant(w: &WeightField, p: f64, family: &BallFamily) -> Result<ApReport> {
    check_p_gt_one(p)?;
    let dual = w.powf(1.0 / (1.0 - p));
    let mut best: Option<(f64, Ball)> = None;
    for ball in family.iter() {
        let q = ap_quantity_with_dual(w, &dual, &ball, p)?;
        match best {
            Some((qb, _)) if q <= qb => {}
            _ => best = Some((q, ball)),
        }
    }
    let (constant, ball) = best.expect("family is non-empty");
    Ok(ApReport {
        constant,
        center: ball.center,
        radius: ball.radius,
        family_size: family.len(),
    })
}

/// `A_1` constant estimate `max_x M(w)(x) / w(x)` with the centered maximal
/// function restricted to `ladder`.
pub fn a1_constant(w: &WeightField, ladder: &RadiusLadder) -> Result<f64> {
    let m = crate::operators::maximal_centered(w.field(), ladder)?;
    let mut worst = 0.0_f64;
    for i in 0..m.len() {
        worst = worst.max(m.value(i) / w.field().value(i));
    }
    Ok(worst)
}

fn check_apq_exponents(p: f64, q: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::parameter(format!("A_pq needs p >= 1, got {p}")));
    }
    if !(q.is_finite() && q > 1.0) {
        return Err(Error::parameter(format!("A_pq needs 1 < q < inf, got {q}")));
    }
    Ok(())
}

/// Per-ball `A_{p,q}` quantity `(avg_B w^q)^{1/q} (avg_B w^{-p'})^{1/p'}`;
/// for `p = 1` the second factor is `ess sup_B 1/w`, realized as the maximum
/// of `1/w` over in-ball samples.
pub fn apq_quantity(w: &WeightField, ball: &Ball, p: f64, q: f64) -> Result<f64> {
    check_apq_exponents(p, q)?;
    let wq = w.powf(q);
    let second = if p == 1.0 {
        None
    } else {
        Some(w.powf(-p / (p - 1.0)))
    };
    apq_quantity_with_powers(w, &wq, second.as_ref(), ball, p, q)
}

fn apq_quantity_with_powers(
    w: &WeightField,
    wq: &WeightField,
    w_neg_pprime: Option<&WeightField>,
    ball: &Ball,
    p: f64,
    q: f64,
) -> Result<f64> {
    let (avg_q, _) = ball_mean(wq.field().values(), w.grid(), ball.center, ball.radius)?;
    let first = avg_q.powf(1.0 / q);
    let second = match w_neg_pprime {
        Some(dual) => {
            let pprime = p / (p - 1.0);
            let (avg_d, _) = ball_mean(dual.field().values(), w.grid(), ball.center, ball.radius)?;
            avg_d.powf(1.0 / pprime)
        }
        None => {
            // p = 1: ess sup over the ball of 1/w.
            let mut sup = f64::NEG_INFINITY;
            for_ball(w.grid(), ball.center, ball.radius, |i| {
                sup = sup.max(1.0 / w.field().value(i));
            });
            if sup == f64::NEG_INFINITY {
                return Err(Error::DegenerateBall { center: ball.center, radius: ball.radius });
            }
            sup
        }
    };
    Ok(first * second)
}

/// Supremum of [`apq_quantity`] over a family, with argmax.
pub fn apq_constant(w: &WeightField, p: f64, q: f64, family: &BallFamily) -> Result<ApReport> {
    check_apq_exponents(p, q)?;
    let wq = w.powf(q);
    let second = if p == 1.0 { None } else { Some(w.powf(-p / (p - 1.0))) };
    let mut best: Option<(f64, Ball)> = None;
    for ball in family.iter() {
        let val = apq_quantity_with_powers(w, &wq, second.as_ref(), &ball, p, q)?;
        match best {
            Some((vb, _)) if val <= vb => {}
            _ => best = Some((val, ball)),
        }
    }
    let (constant, ball) = best.expect("family is non-empty");
    Ok(ApReport {
        constant,
        center: ball.center,
        radius: ball.radius,
        family_size: family.len(),
    })
}

/// Dual weight `w^{1-p'} = w^{1/(1-p)}` from the duality of the amalgam
/// space.
pub fn dual_weight(w: &WeightField, p: f64) -> Result<WeightField> {
    check_p_gt_one(p)?;
    Ok(w.powf(1.0 / (1.0 - p)))
}

/// `max_B w(2B)/w(B)` over the family members whose doubled ball stays in
/// the cube.
pub fn doubling_constant(w: &WeightField, family: &BallFamily) -> Result<f64> {
    let l = w.grid().half_width();
    let dim = w.grid().dim();
    let mut best: Option<f64> = None;
    for ball in family.iter() {
        let fits = (0..dim).all(|k| ball.center[k].abs() + 2.0 * ball.radius <= l);
        if !fits {
            continue;
        }
        let small = ball_measure(w.field(), ball.center, ball.radius)?;
        let big = ball_measure(w.field(), ball.center, 2.0 * ball.radius)?;
        let ratio = big / small;
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
    }
    best.ok_or_else(|| Error::parameter("no family ball has 2B inside the cube".into()))
}

/// One record of the density check, plus the fitted `(C, delta)`.
#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    /// `(|E|/|B|, w(E)/w(B))` for each requested concentric sub-ball.
    pub pairs: Vec<(f64, f64)>,
    pub c_fit: f64,
    pub delta_fit: f64,
}

/// Compare concentric sub-ball mass ratios against Lebesgue fraction and fit
/// `w(E)/w(B) ~ C (|E|/|B|)^delta` by log-log least squares.
pub fn density_check(
    w: &WeightField,
    ball: &Ball,
    sub_radius_fractions: &[f64],
) -> Result<DensityReport> {
    if sub_radius_fractions.is_empty() {
        return Err(Error::parameter("no sub-radius fractions given".into()));
    }
    for f in sub_radius_fractions {
        if !(*f > 0.0 && *f <= 1.0) {
            return Err(Error::parameter(format!("sub-radius fraction {f} outside (0, 1]")));
        }
    }
    let grid = w.grid();
    let hv = grid.cell_volume();
    let w_big = ball_measure(w.field(), ball.center, ball.radius)?;
    let n_big = ball_count(grid, ball.center, ball.radius) as f64 * hv;
    let mut pairs = Vec::with_capacity(sub_radius_fractions.len());
    for frac in sub_radius_fractions {
        if *frac == 1.0 {
            pairs.push((1.0, 1.0));
            continue;
        }
        let r = frac * ball.radius;
        let w_sub = ball_measure(w.field(), ball.center, r)?;
        let n_sub = ball_count(grid, ball.center, r) as f64 * hv;
        pairs.push((n_sub / n_big, w_sub / w_big));
    }
    // Log-log least squares for delta and ln C.
    let pts: Vec<(f64, f64)> = pairs.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let (delta_fit, c_fit) = if denom.abs() < 1e-300 {
        // Single distinct abscissa (e.g. only fraction 1); slope undefined,
        // report the trivial fit.
        (1.0, 1.0)
    } else {
        let slope = (n * sxy - sx * sy) / denom;
        let intercept = (sy - slope * sx) / n;
        (slope, intercept.exp())
    };
    Ok(DensityReport { pairs, c_fit, delta_fit })
}
