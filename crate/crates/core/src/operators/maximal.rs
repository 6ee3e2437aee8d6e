//! Hardy-Littlewood maximal operators and the Hardy averaging operator.

use crate::error::{Error, Result};
use crate::grid::{ball_average, for_closed_ball, RadiusLadder, SampledField};
use crate::weights::BallFamily;

/// Centered maximal function restricted to a radius ladder:
/// `x -> max over ladder radii of the unweighted average of |f| over B(x, tau)`.
pub fn maximal_centered(f: &SampledField, ladder: &RadiusLadder) -> Result<SampledField> {
    let grid = *f.grid();
    let absf = f.abs();
    let mut out = vec![0.0; grid.len()];
    for (idx, slot) in out.iter_mut().enumerate() {
        let x = grid.point(idx);
        let mut best = f64::NEG_INFINITY;
        for tau in ladder.radii() {
            let avg = ball_average(&absf, x, *tau, None)?;
            if avg > best {
                best = avg;
            }
        }
        *slot = best;
    }
    SampledField::new(grid, out, None)
}

/// Uncentered maximal function over a finite ball family:
/// `x -> max over family balls containing x of the average of |f|`.
///
/// Errors if some grid point lies in no family ball.
pub fn maximal_uncentered(f: &SampledField, family: &BallFamily) -> Result<SampledField> {
    let grid = *f.grid();
    let absf = f.abs();
    let mut out = vec![f64::NEG_INFINITY; grid.len()];
    for ball in family.iter() {
        let avg = ball_average(&absf, ball.center, ball.radius, None)?;
        crate::grid::for_ball(&grid, ball.center, ball.radius, |i| {
            if avg > out[i] {
                out[i] = avg;
            }
        });
    }
    if let Some(idx) = out.iter().position(|v| *v == f64::NEG_INFINITY) {
        return Err(Error::parameter(format!(
            "ball family does not cover the grid (first uncovered point index {idx})"
        )));
    }
    SampledField::new(grid, out, None)
}

/// Hardy operator `Hf(x) = |x|^{-n} * integral of |f| over {|y| <= |x|}`.
///
/// The midpoint grid has no sample at the origin, so `|x| >= h/2` always.
pub fn hardy_op(f: &SampledField) -> Result<SampledField> {
    let grid = *f.grid();
    let dim = grid.dim();
    let hv = grid.cell_volume();
    let mut out = vec![0.0; grid.len()];
    for (idx, slot) in out.iter_mut().enumerate() {
        let x = grid.point(idx);
        let r = crate::grid::dist_sq(dim, x, [0.0, 0.0]).sqrt();
        let mut sum = 0.0;
        for_closed_ball(&grid, [0.0, 0.0], r, |i| {
            sum += f.value(i).abs() * hv;
        });
        let rn = if dim == 1 { r } else { r * r };
        *slot = sum / rn;
    }
    SampledField::new(grid, out, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, FunctionSpec, Grid, RadiusLadder, SampledField};
    use crate::weights::BallFamily;

    #[test]
    fn maximal_of_constant_is_constant() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        let f = SampledField::constant(g, -3.0).unwrap();
        let ladder = RadiusLadder::dyadic(&g, 8.0).unwrap();
        let m = maximal_centered(&f, &ladder).unwrap();
        for i in 0..g.len() {
            assert_eq!(m.value(i), 3.0);
        }
        let family = BallFamily::standard(&g, 8, RadiusLadder::dyadic(&g, 8.0).unwrap()).unwrap();
        let mu = maximal_uncentered(&f, &family).unwrap();
        for i in 0..g.len() {
            assert_eq!(mu.value(i), 3.0);
        }
    }

    #[test]
    fn maximal_indicator_closed_form_at_two() {
        // M chi_{[0,1]}(x) = 1/(2x) for x > 1, attained at tau = x.
        let g = Grid::new(1, 4.0, 1024).unwrap();
        let f = sample(&FunctionSpec::parse("indicator:0,1").unwrap(), &g).unwrap();
        let ladder = RadiusLadder::dyadic(&g, 8.0).unwrap();
        let m = maximal_centered(&f, &ladder).unwrap();
        let idx = (0..g.len())
            .min_by(|a, b| {
                (g.point(*a)[0] - 2.0)
                    .abs()
                    .partial_cmp(&(g.point(*b)[0] - 2.0).abs())
                    .unwrap()
            })
            .unwrap();
        assert!(
            (m.value(idx) - 0.25).abs() <= 2.0 * g.spacing(),
            "M(2) = {}",
            m.value(idx)
        );
    }

    #[test]
    fn maximal_sublinearity_per_ladder() {
        let g = Grid::new(1, 4.0, 256).unwrap();
        let f = sample(&FunctionSpec::RandomSmooth { seed: 1 }, &g).unwrap();
        let gg = sample(&FunctionSpec::RandomSmooth { seed: 2 }, &g).unwrap();
        let ladder = RadiusLadder::dyadic(&g, 4.0).unwrap();
        let sum = f.zip_map(&gg, |a, b| a + b).unwrap();
        let m_sum = maximal_centered(&sum, &ladder).unwrap();
        let m_f = maximal_centered(&f, &ladder).unwrap();
        let m_g = maximal_centered(&gg, &ladder).unwrap();
        for i in 0..g.len() {
            assert!(m_sum.value(i) <= m_f.value(i) + m_g.value(i) + 1e-12);
        }
    }

    #[test]
    fn uncentered_dominates_centered() {
        let g = Grid::new(1, 4.0, 256).unwrap();
        let f = sample(&FunctionSpec::parse("indicator:0,1").unwrap(), &g).unwrap();
        let ladder = RadiusLadder::dyadic(&g, 4.0).unwrap();
        // Family with every grid point as center and the same ladder contains
        // all centered balls.
        let family = BallFamily::standard(&g, 1, ladder.clone()).unwrap();
        let mc = maximal_centered(&f, &ladder).unwrap();
        let mu = maximal_uncentered(&f, &family).unwrap();
        for i in 0..g.len() {
            assert!(mu.value(i) >= mc.value(i) - 1e-15);
        }
    }

    #[test]
    fn uncentered_brute_force_at_two() {
        // Best interval containing x = 2 and mass of chi_{[0,1]}: the oracle
        // is a brute-force sup over grid-aligned intervals.
        let g = Grid::new(1, 4.0, 512).unwrap();
        let f = sample(&FunctionSpec::parse("indicator:0,1").unwrap(), &g).unwrap();
        let ladder = RadiusLadder::dyadic(&g, 8.0).unwrap();
        let family = BallFamily::standard(&g, 1, ladder).unwrap();
        let mu = maximal_uncentered(&f, &family).unwrap();
        let idx = (0..g.len())
            .min_by(|a, b| {
                (g.point(*a)[0] - 2.0)
                    .abs()
                    .partial_cmp(&(g.point(*b)[0] - 2.0).abs())
                    .unwrap()
            })
            .unwrap();
        // Brute force over all (center, radius) pairs in the same family.
        let absf = f.abs();
        let mut best = 0.0_f64;
        for ball in family.iter() {
            let contains = crate::grid::dist_sq(1, g.point(idx), ball.center)
                < ball.radius * ball.radius;
            if contains {
                best = best.max(ball_average(&absf, ball.center, ball.radius, None).unwrap());
            }
        }
        assert_eq!(mu.value(idx), best);
        assert!(mu.value(idx) >= 1.0 / 3.0 - 2.0 * g.spacing());
    }

    #[test]
    fn hardy_closed_form_for_centered_indicator() {
        let g = Grid::new(1, 4.0, 1024).unwrap();
        let f = sample(&FunctionSpec::parse("indicator:-1,1").unwrap(), &g).unwrap();
        let hf = hardy_op(&f).unwrap();
        let h = g.spacing();
        for i in 0..g.len() {
            let x = g.point(i)[0].abs();
            let expect = if x <= 1.0 { 2.0 } else { 2.0 / x };
            let tol = if x <= 1.0 { 2.0 * h / x } else { 2.0 * h };
            assert!(
                (hf.value(i) - expect).abs() <= tol,
                "x = {x}: H = {}, closed form {expect}",
                hf.value(i)
            );
        }
    }

    #[test]
    fn hardy_dominated_by_uncentered_maximal() {
        // Hf(x) <= 2^n Mbar f(x) (1 + h/(2|x|)) with origin-centered balls of
        // radius |x| + h/2 in the family; the slack is the closed-vs-open
        // ball volume ratio on the grid.
        let g = Grid::new(1, 4.0, 512).unwrap();
        let h = g.spacing();
        let f = sample(&FunctionSpec::RandomSmooth { seed: 8 }, &g).unwrap();
        let hf = hardy_op(&f).unwrap();
        let radii: Vec<f64> = {
            let mut r: Vec<f64> = (0..g.len() / 2)
                .map(|k| g.axis_coord(g.len() / 2 + k).abs() + h / 2.0)
                .collect();
            r.sort_by(|a, b| a.partial_cmp(b).unwrap());
            r.dedup();
            r
        };
        let ladder = RadiusLadder::new(radii, &g).unwrap();
        let family = BallFamily::from_parts(vec![[0.0, 0.0]], ladder).unwrap();
        // The origin-ball family covers every grid point.
        let mu = maximal_uncentered(&f, &family).unwrap();
        for i in 0..g.len() {
            let x = g.point(i)[0].abs();
            let bound = 2.0 * mu.value(i) * (1.0 + h / (2.0 * x)) * (1.0 + 1e-9);
            assert!(
                hf.value(i) <= bound + 1e-12,
                "x = {x}: H = {} exceeds {bound}",
                hf.value(i)
            );
        }
    }
}
