//! Input-space SVDD solvers used as ground truth for the deep model on small
//! instances.
//!
//! * [`min_enclosing_ball`]: the hard-margin limit (every point inside).
//!   Exact move-to-front Welzl for dimension <= 3, Frank-Wolfe with away
//!   steps on the dual simplex above that.
//! * [`soft_svdd`]: minimizes `R² + 1/(νn) Σ ξ_i` subject to
//!   `||x_i - c||² <= R² + ξ_i` by subgradient descent on `c`, with `R²` and
//!   the slacks eliminated in closed form.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{mean_vector, sq_dist, SeededRng};

pub const DEFAULT_ITERATIONS: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        sq_dist(p, &self.center).sqrt() <= self.radius + tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftSvddSolution {
    pub ball: Ball,
    pub slacks: Vec<f64>,
    pub nu: f64,
    pub objective: f64,
    /// Objective at each iterate.
    pub trace: Vec<f64>,
}

impl SoftSvddSolution {
    /// Index of the most outlying point: largest slack, ties broken by
    /// larger mean distance to the other points, then lower index.
    pub fn most_outlying(&self, points: &[Vec<f64>]) -> Option<usize> {
        most_outlying(points, &self.slacks, self.ball.radius)
    }
}

/// Slacks below a rounding tolerance count as zero, so on a hard-margin
/// solution the most isolated point wins.
pub fn most_outlying(points: &[Vec<f64>], slacks: &[f64], radius: f64) -> Option<usize> {
    let tol = 1e-9 * radius.powi(2).max(1.0);
    let key = |i: usize| {
        let slack = if slacks[i] <= tol { 0.0 } else { slacks[i] };
        let spread = points.iter().map(|q| sq_dist(&points[i], q).sqrt()).sum::<f64>();
        (slack, spread)
    };
    let keys: Vec<(f64, f64)> = (0..points.len().min(slacks.len())).map(key).collect();
    (0..keys.len()).max_by(|&a, &b| {
        keys[a]
            .partial_cmp(&keys[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.cmp(&a))
    })
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let dim = points
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::contract("no points given"))?;
    if dim == 0 {
        return Err(Error::contract("points must have at least one coordinate"));
    }
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::shape(format!("point {i}"), dim, p.len()));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::Data(format!("point {i} has non-finite coordinates")));
        }
    }
    Ok(dim)
}

/// Smallest ball containing every point.
pub fn min_enclosing_ball(points: &[Vec<f64>]) -> Result<Ball> {
    let dim = check_points(points)?;
    if dim <= 3 {
        Ok(welzl(points))
    } else {
        Ok(frank_wolfe_ball(points, 1e-9, 100_000))
    }
}

/// Move-to-front Welzl. Exact up to rounding in any dimension, but the
/// expected cost grows quickly with it.
pub fn welzl(points: &[Vec<f64>]) -> Ball {
    let dim = points[0].len();
    let scale = points
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1.0);
    let mut order: Vec<usize> = (0..points.len()).collect();
    let mut boundary = Vec::with_capacity(dim + 1);
    let ball = mtf(points, &mut order, points.len(), &mut boundary, dim, 1e-12 * scale);
    tighten(points, ball.center)
}

fn mtf(
    points: &[Vec<f64>],
    order: &mut Vec<usize>,
    end: usize,
    boundary: &mut Vec<usize>,
    dim: usize,
    tol: f64,
) -> Ball {
    let mut ball = circumball(points, boundary, dim);
    if boundary.len() == dim + 1 {
        return ball;
    }
    for i in 0..end {
        let p = order[i];
        if ball.radius < 0.0 || !ball.contains(&points[p], tol) {
            boundary.push(p);
            ball = mtf(points, order, i, boundary, dim, tol);
            boundary.pop();
            order[..=i].rotate_right(1);
        }
    }
    ball
}

/// Smallest ball with every boundary point on its surface. An empty
/// boundary yields a ball of negative radius that contains nothing.
fn circumball(points: &[Vec<f64>], boundary: &[usize], dim: usize) -> Ball {
    match boundary {
        [] => Ball {
            center: vec![0.0; dim],
            radius: -1.0,
        },
        [a] => Ball {
            center: points[*a].clone(),
            radius: 0.0,
        },
        [base, rest @ ..] => {
            let p0 = &points[*base];
            let vs: Vec<Vec<f64>> = rest
                .iter()
                .map(|&j| points[j].iter().zip(p0).map(|(a, b)| a - b).collect())
                .collect();
            let k = vs.len();
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            let m = DMatrix::from_fn(k, k, |i, j| 2.0 * dot(&vs[i], &vs[j]));
            let rhs = DVector::from_fn(k, |i, _| dot(&vs[i], &vs[i]));
            let lambda = m
                .clone()
                .lu()
                .solve(&rhs)
                .unwrap_or_else(|| m.svd(true, true).solve(&rhs, 1e-14).unwrap_or_else(|_| DVector::zeros(k)));
            let mut center = p0.clone();
            for (l, v) in lambda.iter().zip(&vs) {
                center.iter_mut().zip(v).for_each(|(c, x)| *c += l * x);
            }
            let radius = boundary
                .iter()
                .map(|&j| sq_dist(&points[j], &center))
                .fold(0.0f64, f64::max)
                .sqrt();
            Ball { center, radius }
        }
    }
}

/// Radius from the farthest point, so containment is exact for the center.
fn tighten(points: &[Vec<f64>], center: Vec<f64>) -> Ball {
    let radius = points
        .iter()
        .map(|p| sq_dist(p, &center))
        .fold(0.0f64, f64::max)
        .sqrt();
    Ball { center, radius }
}

/// Frank-Wolfe with away steps on the dual
/// `max_α Σ α_i ||x_i||² - ||Σ α_i x_i||²` over the simplex. Stops once the
/// squared-radius bound is within `(1 + eps)²` of the dual value.
pub fn frank_wolfe_ball(points: &[Vec<f64>], eps: f64, max_iter: usize) -> Ball {
    let n = points.len();
    let dim = points[0].len();
    let farthest = |from: &[f64]| {
        (0..n)
            .max_by(|&a, &b| sq_dist(&points[a], from).total_cmp(&sq_dist(&points[b], from)))
            .unwrap_or(0)
    };
    let a = farthest(&points[0]);
    let b = farthest(&points[a]);
    let mut alpha = vec![0.0; n];
    alpha[a] += 0.5;
    alpha[b] += 0.5;

    let center_of = |alpha: &[f64]| {
        let mut c = vec![0.0; dim];
        for (w, p) in alpha.iter().zip(points) {
            if *w > 0.0 {
                c.iter_mut().zip(p).for_each(|(ci, x)| *ci += w * x);
            }
        }
        c
    };

    let mut center = center_of(&alpha);
    let target = (1.0 + eps) * (1.0 + eps) - 1.0;
    for _ in 0..max_iter {
        let d: Vec<f64> = points.iter().map(|p| sq_dist(p, &center)).collect();
        let phi: f64 = alpha.iter().zip(&d).map(|(w, di)| w * di).sum();
        let (j, dmax) = d
            .iter()
            .copied()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty");
        if dmax <= 0.0 || phi <= 0.0 {
            break;
        }
        let plus = dmax / phi - 1.0;
        if plus <= target {
            break;
        }
        let (k, dmin) = d
            .iter()
            .copied()
            .enumerate()
            .filter(|(i, _)| alpha[*i] > 0.0)
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("support is non-empty");
        let minus = 1.0 - dmin / phi;
        if plus >= minus {
            let lam = plus / (2.0 * (1.0 + plus));
            alpha.iter_mut().for_each(|w| *w *= 1.0 - lam);
            alpha[j] += lam;
        } else {
            let ak = alpha[k];
            let lam = (minus / (2.0 * (1.0 - minus))).min(ak / (1.0 - ak));
            alpha.iter_mut().for_each(|w| *w *= 1.0 + lam);
            alpha[k] -= lam;
            if alpha[k] < 1e-15 {
                alpha[k] = 0.0;
            }
        }
        center = center_of(&alpha);
    }
    tighten(points, center)
}

/// Optimal squared radius and objective for a fixed center.
///
/// The objective is piecewise linear in `r = R²` with slope
/// `1 - C·#{d_i > r}`, so the minimizer is the `(⌊νn⌋+1)`-th largest squared
/// distance (or zero when `⌊νn⌋ >= n`).
fn profile(d: &[f64], nu: f64) -> (f64, f64, usize, f64) {
    let n = d.len();
    let c = 1.0 / (nu * n as f64);
    let m = (nu * n as f64 + 1e-12).floor() as usize;
    let mut sorted = d.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let r = if m >= n { 0.0 } else { sorted[m] };
    let obj = r + c * d.iter().map(|&di| (di - r).max(0.0)).sum::<f64>();
    (r, obj, m, c)
}

pub fn soft_svdd(points: &[Vec<f64>], nu: f64, iterations: usize, rng: &mut SeededRng) -> Result<SoftSvddSolution> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::contract(format!("nu must lie in (0, 1], got {nu}")));
    }
    let dim = check_points(points)?;
    if points.len() < 2 {
        return Err(Error::contract("soft SVDD needs at least two points"));
    }

    let dists = |c: &[f64]| points.iter().map(|p| sq_dist(p, c)).collect::<Vec<f64>>();
    let mut center = mean_vector(points).expect("non-empty");
    let d0 = dists(&center);
    let step0 = (d0.iter().sum::<f64>() / d0.len() as f64).sqrt().max(f64::MIN_POSITIVE);

    let (_, mut best_obj, _, _) = profile(&d0, nu);
    let mut best_center = center.clone();
    let mut trace = Vec::with_capacity(iterations + 1);
    trace.push(best_obj);

    for t in 1..=iterations {
        let d = dists(&center);
        let (r, _, m, c) = profile(&d, nu);
        let mut g = vec![0.0; dim];
        let above: Vec<usize> = (0..d.len()).filter(|&i| d[i] > r).collect();
        for &i in &above {
            g.iter_mut()
                .zip(center.iter().zip(&points[i]))
                .for_each(|(gj, (cj, xj))| *gj += 2.0 * c * (cj - xj));
        }
        // remaining weight on the points sitting exactly at the radius
        let theta = 1.0 - c * above.len() as f64;
        if m < d.len() && theta > 0.0 {
            let ties: Vec<usize> = (0..d.len()).filter(|&i| d[i] == r).collect();
            let pick = ties[rng.below(ties.len())];
            g.iter_mut()
                .zip(center.iter().zip(&points[pick]))
                .for_each(|(gj, (cj, xj))| *gj += 2.0 * theta * (cj - xj));
        }
        let gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if gnorm <= 1e-15 * step0 {
            break;
        }
        let step = step0 / (t as f64).sqrt();
        center.iter_mut().zip(&g).for_each(|(cj, gj)| *cj -= step * gj / gnorm);

        let (_, obj, _, _) = profile(&dists(&center), nu);
        trace.push(obj);
        if obj < best_obj {
            best_obj = obj;
            best_center.clone_from(&center);
        }
    }

    let d = dists(&best_center);
    let (r, objective, _, _) = profile(&d, nu);
    let slacks = d.iter().map(|&di| (di - r).max(0.0)).collect();
    Ok(SoftSvddSolution {
        ball: Ball {
            center: best_center,
            radius: r.sqrt(),
        },
        slacks,
        nu,
        objective,
        trace,
    })
}
