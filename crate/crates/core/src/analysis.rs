//! Power-law fits, threshold crossings and extrapolation of logical error
//! rates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::PointEstimate;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("need at least 2 usable points in the fit window, found {0}")]
    InsufficientPoints(usize),
    #[error("fit is degenerate: all usable points share one p")]
    Degenerate,
    #[error("curves do not cross inside their common p range")]
    NoCrossing,
    #[error("curves overlap in fewer than two p values")]
    NoOverlap,
    #[error("invalid window {0}..{1}")]
    Window(f64, f64),
}

/// `p_L ≈ prefactor · p^α`, fitted in log-log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub alpha: f64,
    pub alpha_stderr: f64,
    pub prefactor: f64,
    /// Standard error of `ln(prefactor)`.
    pub log_prefactor_stderr: f64,
    pub window: (f64, f64),
    pub points_used: usize,
    /// Square root of the weighted residual sum of squares.
    pub residual_norm: f64,
    /// Points in the window left out for having no failures.
    pub excluded_zero_failure: usize,
}

impl FitResult {
    /// `A` in `p_L ≈ A (p / p_th)^α`.
    pub fn amplitude_at(&self, p_th: f64) -> f64 {
        self.prefactor * p_th.powf(self.alpha)
    }

    pub fn predict(&self, p: f64) -> f64 {
        self.prefactor * p.powf(self.alpha)
    }
}

/// Weighted least squares of `ln p_L` on `ln p` over points with
/// `p ∈ [lo, hi]` and at least `min_failures` failures (and always at least
/// one). Each point is weighted by `1 / var(ln p_L) ≈ trials · p_L / (1 − p_L)`;
/// points without a usable variance get unit weight.
pub fn fit_power_law(
    points: &[PointEstimate],
    window: (f64, f64),
    min_failures: u64,
) -> Result<FitResult, AnalysisError> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi >= lo) {
        return Err(AnalysisError::Window(lo, hi));
    }
    let in_window: Vec<&PointEstimate> = points
        .iter()
        .filter(|pt| pt.p >= lo && pt.p <= hi)
        .collect();
    let excluded_zero_failure = in_window
        .iter()
        .filter(|pt| pt.failures == 0 || pt.p_l <= 0.0)
        .count();
    let usable: Vec<(f64, f64, f64)> = in_window
        .iter()
        .filter(|pt| pt.failures >= min_failures.max(1) && pt.p_l > 0.0)
        .map(|pt| {
            let var = if pt.p_l > 0.0 && pt.stderr > 0.0 {
                (pt.stderr / pt.p_l).powi(2)
            } else {
                1.0
            };
            (pt.p.ln(), pt.p_l.ln(), 1.0 / var)
        })
        .collect();
    if usable.len() < 2 {
        return Err(AnalysisError::InsufficientPoints(usable.len()));
    }
    let sw: f64 = usable.iter().map(|u| u.2).sum();
    let mx = usable.iter().map(|u| u.2 * u.0).sum::<f64>() / sw;
    let my = usable.iter().map(|u| u.2 * u.1).sum::<f64>() / sw;
    let sxx: f64 = usable.iter().map(|u| u.2 * (u.0 - mx).powi(2)).sum();
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(AnalysisError::Degenerate);
    }
    let sxy: f64 = usable.iter().map(|u| u.2 * (u.0 - mx) * (u.1 - my)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let rss: f64 = usable
        .iter()
        .map(|u| u.2 * (u.1 - intercept - alpha * u.0).powi(2))
        .sum();
    Ok(FitResult {
        alpha,
        alpha_stderr: (1.0 / sxx).sqrt(),
        prefactor: intercept.exp(),
        log_prefactor_stderr: (1.0 / sw + mx * mx / sxx).sqrt(),
        window,
        points_used: usable.len(),
        residual_norm: rss.sqrt(),
        excluded_zero_failure,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub p_th: f64,
    /// Adjacent sample points of the merged grid that straddle the crossing.
    pub bracket: (f64, f64),
    /// Number of sign changes found; more than one means noisy curves.
    pub crossings: usize,
}

impl ThresholdResult {
    /// `Λ = (p / p_th)^{1/2}`.
    pub fn lambda(&self, p: f64) -> f64 {
        (p / self.p_th).sqrt()
    }
}

/// Piecewise-linear interpolation of `ln p_L` over `ln p`.
fn interp(curve: &[(f64, f64)], x: f64) -> f64 {
    let i = curve.partition_point(|c| c.0 < x);
    if i == 0 {
        return curve[0].1;
    }
    if i == curve.len() {
        return curve[curve.len() - 1].1;
    }
    let (x0, y0) = curve[i - 1];
    let (x1, y1) = curve[i];
    if x1 == x0 {
        return y1;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn log_curve(points: &[PointEstimate]) -> Vec<(f64, f64)> {
    let mut c: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.p_l > 0.0 && p.p > 0.0)
        .map(|p| (p.p.ln(), p.p_l.ln()))
        .collect();
    c.sort_by(|a, b| a.0.total_cmp(&b.0));
    c
}

/// Crossing of a smaller code's curve `lo` with a larger code's curve `hi`,
/// found on log-log interpolants. Below threshold the larger code does
/// better; the first sign change of `ln p_L(hi) − ln p_L(lo)` from negative
/// to positive (or any sign change if none goes that way) is reported.
pub fn estimate_threshold(
    lo: &[PointEstimate],
    hi: &[PointEstimate],
) -> Result<ThresholdResult, AnalysisError> {
    let a = log_curve(lo);
    let b = log_curve(hi);
    if a.len() < 2 || b.len() < 2 {
        return Err(AnalysisError::NoOverlap);
    }
    let start = a[0].0.max(b[0].0);
    let end = a[a.len() - 1].0.min(b[b.len() - 1].0);
    let mut grid: Vec<f64> = a
        .iter()
        .chain(&b)
        .map(|c| c.0)
        .filter(|&x| x >= start && x <= end)
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.len() < 2 {
        return Err(AnalysisError::NoOverlap);
    }
    let d: Vec<f64> = grid
        .iter()
        .map(|&x| interp(&b, x) - interp(&a, x))
        .collect();
    let mut found: Vec<(usize, bool)> = Vec::new();
    for i in 0..grid.len() - 1 {
        let (d0, d1) = (d[i], d[i + 1]);
        if (d0 < 0.0 && d1 >= 0.0) || (d0 > 0.0 && d1 <= 0.0) {
            if d1 == 0.0 && i + 2 < grid.len() && d[i + 2].signum() == d0.signum() {
                continue;
            }
            found.push((i, d0 < 0.0));
        }
    }
    let &(i, _) = found
        .iter()
        .find(|f| f.1)
        .or_else(|| found.first())
        .ok_or(AnalysisError::NoCrossing)?;
    let (x0, x1) = (grid[i], grid[i + 1]);
    let t = d[i] / (d[i] - d[i + 1]);
    let x = x0 + t * (x1 - x0);
    Ok(ThresholdResult {
        p_th: x.exp(),
        bracket: (x0.exp(), x1.exp()),
        crossings: found.len(),
    })
}

/// `A (p / p_th)^α`.
pub fn extrapolate(a: f64, alpha: f64, p_th: f64, p: f64) -> f64 {
    a * (p / p_th).powf(alpha)
}

/// Ansatz parameters of one code/decoder combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ansatz {
    pub label: String,
    pub a: f64,
    pub alpha: f64,
    pub p_th: f64,
    pub blocks: usize,
    pub qubits_per_block: usize,
    pub logicals_per_block: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSide {
    pub label: String,
    pub blocks: usize,
    pub per_block_p_l: f64,
    /// Union bound over blocks: `blocks × per_block_p_l`.
    pub aggregate_p_l: f64,
    pub physical_qubits: usize,
    pub logical_qubits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub p: f64,
    pub sides: [CompareSide; 2],
    /// `aggregate(second) / aggregate(first)`.
    pub advantage: f64,
}

pub fn compare(p: f64, first: &Ansatz, second: &Ansatz) -> CompareReport {
    let side = |z: &Ansatz| {
        let per = extrapolate(z.a, z.alpha, z.p_th, p);
        CompareSide {
            label: z.label.clone(),
            blocks: z.blocks,
            per_block_p_l: per,
            aggregate_p_l: per * z.blocks as f64,
            physical_qubits: z.blocks * z.qubits_per_block,
            logical_qubits: z.blocks * z.logicals_per_block,
        }
    };
    let a = side(first);
    let b = side(second);
    let advantage = b.aggregate_p_l / a.aggregate_p_l;
    CompareReport {
        p,
        sides: [a, b],
        advantage,
    }
}

/// Seven bidirectionally decoded 15x15x15 blocks against one locally
/// decoded 15x15x15x15 block, with the fit parameters quoted for them.
pub fn reference_comparison(p: f64) -> CompareReport {
    compare(
        p,
        &Ansatz {
            label: "7 x 15x15x15, bidirectional".into(),
            a: 0.35,
            alpha: 15.3,
            p_th: 0.0435,
            blocks: 7,
            qubits_per_block: 3375,
            logicals_per_block: 343,
        },
        &Ansatz {
            label: "1 x 15x15x15x15, local".into(),
            a: 0.12,
            alpha: 14.7,
            p_th: 0.0156,
            blocks: 1,
            qubits_per_block: 50625,
            logicals_per_block: 2401,
        },
    )
}
