//! Quadratic least squares.
//!
//! The normal equations are assembled on a centred and scaled abscissa,
//! which keeps the 3×3 system well conditioned for raw loads in the tens of
//! newtons, and the coefficients are mapped back to the monomial basis.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods shadow it under std
use num_traits::Float;

use crate::linalg;

/// Condition number of the raw monomial design matrix above which a fit is
/// flagged as ill-conditioned.
pub const CONDITION_WARNING: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("quadratic fit needs at least 3 distinct abscissae, got {distinct}")]
    RankDeficient { distinct: usize },
    #[error("fit input contains a non-finite value")]
    NonFinite,
}

/// y ≈ a·x² + b·x + c.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub rmse: f64,
    pub max_abs_residual: f64,
    /// 2-norm condition number of the design matrix [x², x, 1].
    pub condition_number: f64,
    /// Standard errors of (a, b, c) from the residual variance; `None` with
    /// exactly three points.
    pub std_errors: Option<[f64; 3]>,
}

impl QuadraticFit {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    pub fn ill_conditioned(&self) -> bool {
        self.condition_number > CONDITION_WARNING
    }
}

/// Ordinary least-squares quadratic through `points`.
///
/// Points are sorted before accumulation so the result does not depend on
/// input order.
pub fn fit_quadratic(points: &[(f64, f64)]) -> Result<QuadraticFit, FitError> {
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    let mut distinct = pts.iter().map(|p| p.0).collect::<Vec<_>>();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(FitError::RankDeficient {
            distinct: distinct.len(),
        });
    }

    let n = pts.len() as f64;
    let mean = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let half_range = pts.iter().map(|p| (p.0 - mean).abs()).fold(0.0, f64::max);

    // Normal equations in u = (x − mean) / half_range, basis [u², u, 1].
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for &(x, y) in &pts {
        let u = (x - mean) / half_range;
        let row = [u * u, u, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * y;
        }
    }
    let theta = linalg::solve(ata, atb, 1e-13).ok_or(FitError::RankDeficient {
        distinct: distinct.len(),
    })?;

    // x-basis coefficients are a linear map of the u-basis ones.
    let h = half_range;
    let m = mean;
    let to_raw = [
        [1.0 / (h * h), 0.0, 0.0],
        [-2.0 * m / (h * h), 1.0 / h, 0.0],
        [m * m / (h * h), -m / h, 1.0],
    ];
    let raw: [f64; 3] = core::array::from_fn(|r| (0..3).map(|k| to_raw[r][k] * theta[k]).sum());
    let [a, b, c] = raw;

    let mut ssr = 0.0;
    let mut max_abs_residual = 0.0f64;
    for &(x, y) in &pts {
        // Residuals are evaluated in the centred basis to avoid cancellation.
        let u = (x - m) / h;
        let r = (theta[0] * u + theta[1]) * u + theta[2] - y;
        ssr += r * r;
        max_abs_residual = max_abs_residual.max(r.abs());
    }
    let rmse = (ssr / n).sqrt();

    let std_errors = if pts.len() > 3 {
        let sigma2 = ssr / (n - 3.0);
        linalg::invert3(&ata).map(|inv_u| {
            let cov = linalg::mat_mul3(&linalg::mat_mul3(&to_raw, &inv_u), &transpose(&to_raw));
            core::array::from_fn(|i| (sigma2 * cov[i][i]).max(0.0).sqrt())
        })
    } else {
        None
    };

    Ok(QuadraticFit {
        a,
        b,
        c,
        rmse,
        max_abs_residual,
        condition_number: raw_condition_number(&pts),
        std_errors,
    })
}

fn transpose(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    core::array::from_fn(|r| core::array::from_fn(|c| m[c][r]))
}

fn raw_condition_number(pts: &[(f64, f64)]) -> f64 {
    let mut gram = [[0.0; 3]; 3];
    for &(x, _) in pts {
        let row = [x * x, x, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                gram[i][j] += row[i] * row[j];
            }
        }
    }
    let ev = linalg::symmetric_eigenvalues3(gram);
    let max = ev.iter().cloned().fold(f64::MIN, f64::max);
    let min = ev.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        (max / min).sqrt()
    }
}
