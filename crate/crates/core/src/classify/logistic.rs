use serde::Serialize;

use crate::error::{Error, Result};

/// `L / (1 + exp(−k (ln x − x0)))` fitted to `(x, y)` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogisticFit {
    pub l: f64,
    pub k: f64,
    pub x0: f64,
    /// Residual sum of squares.
    pub rss: f64,
}

impl LogisticFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.l * sigmoid(self.k * (x.ln() - self.x0))
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Best `L` for fixed `(k, x0)` in closed form, and the resulting residual.
fn profile(lx: &[f64], y: &[f64], k: f64, x0: f64) -> (f64, f64) {
    let s: Vec<f64> = lx.iter().map(|&v| sigmoid(k * (v - x0))).collect();
    let ss: f64 = s.iter().map(|v| v * v).sum();
    let l = if ss > 0.0 {
        s.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / ss
    } else {
        0.0
    };
    let rss = s.iter().zip(y).map(|(a, b)| (l * a - b).powi(2)).sum();
    (l, rss)
}

/// Least-squares logistic fit in `ln x`.
///
/// `L` is solved exactly for each `(k, x0)`; those two are found by a coarse
/// grid followed by coordinate pattern search with halving steps.
pub fn fit_logistic(points: &[(f64, f64)]) -> Result<LogisticFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "logistic fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, _)) = points.iter().find(|(x, _)| !(*x > 0.0)) {
        return Err(Error::InvalidArgument(format!("non-positive size {x}")));
    }
    if points.iter().any(|(_, y)| !y.is_finite()) {
        return Err(Error::InvalidArgument("non-finite accuracy".into()));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let lo = lx.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lx.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1.0);

    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=40 {
        let k = -10.0 + 0.5 * i as f64;
        for j in 0..=20 {
            let x0 = lo - span + 3.0 * span * j as f64 / 20.0;
            let (_, rss) = profile(&lx, &y, k, x0);
            if rss < best.0 {
                best = (rss, k, x0);
            }
        }
    }
    let (mut rss, mut k, mut x0) = best;
    let mut step = [0.5, 3.0 * span / 20.0];
    while step[0] > 1e-12 || step[1] > 1e-12 {
        let mut moved = false;
        for dim in 0..2 {
            for sign in [1.0, -1.0] {
                let (nk, nx) = if dim == 0 {
                    (k + sign * step[0], x0)
                } else {
                    (k, x0 + sign * step[1])
                };
                let (_, r) = profile(&lx, &y, nk, nx);
                if r < rss {
                    rss = r;
                    k = nk;
                    x0 = nx;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            step[0] *= 0.5;
            step[1] *= 0.5;
        }
    }
    let (l, rss) = profile(&lx, &y, k, x0);
    Ok(LogisticFit { l, k, x0, rss })
}
