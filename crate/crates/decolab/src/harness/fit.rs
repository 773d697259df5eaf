//! Decay-shape discrimination: exponential vs Gaussian least-squares fits of
//! a positive decaying series.

use serde::Serialize;

/// Which decay law explains the series better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecayVerdict {
    Exponential,
    Gaussian,
    Inconclusive,
}

/// Fit results over the primary decay window.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    /// Rate r of v ≈ A e^{−r t}.
    pub exp_rate: f64,
    pub exp_r2: f64,
    /// Rate g of v ≈ A e^{−g t²}.
    pub gauss_rate: f64,
    pub gauss_r2: f64,
    pub verdict: DecayVerdict,
    /// Diagnostics when the fit could not be carried out.
    pub note: Option<String>,
}

/// Verdict goes to the model with the higher r² when the gap exceeds this.
const R2_GAP: f64 = 0.02;
/// The fitted window ends where the series first drops below this fraction
/// of its initial value.
const WINDOW_FLOOR: f64 = 0.01;
const MIN_POINTS: usize = 10;

/// Least-squares fit of ln(value) against t (exponential) and against t²
/// (Gaussian) over the window from t = 0 until the series first falls below
/// 1% of its initial value.
pub fn fit_decay(series: &[(f64, f64)]) -> DecayFit {
    let inconclusive = |note: &str| DecayFit {
        exp_rate: 0.0,
        exp_r2: 0.0,
        gauss_rate: 0.0,
        gauss_r2: 0.0,
        verdict: DecayVerdict::Inconclusive,
        note: Some(note.to_string()),
    };

    let Some(&(_, v0)) = series.first() else {
        return inconclusive("empty series");
    };
    if !(v0 > 0.0) {
        return inconclusive("initial value is not positive");
    }

    // window: everything up to and including the first sub-1% point,
    // truncated before any non-positive value
    let mut window = Vec::with_capacity(series.len());
    for &(t, v) in series {
        if !(v > 0.0) {
            break;
        }
        window.push((t, v));
        if v < WINDOW_FLOOR * v0 {
            break;
        }
    }
    if window.len() < MIN_POINTS {
        return inconclusive(&format!(
            "only {} usable points in the decay window",
            window.len()
        ));
    }

    let ln_v: Vec<f64> = window.iter().map(|&(_, v)| v.ln()).collect();
    let t: Vec<f64> = window.iter().map(|&(t, _)| t).collect();
    let t2: Vec<f64> = t.iter().map(|&x| x * x).collect();
    let (slope_exp, exp_r2) = linear_fit(&t, &ln_v);
    let (slope_gauss, gauss_r2) = linear_fit(&t2, &ln_v);

    let verdict = if (exp_r2 - gauss_r2).abs() > R2_GAP {
        if exp_r2 > gauss_r2 {
            DecayVerdict::Exponential
        } else {
            DecayVerdict::Gaussian
        }
    } else {
        DecayVerdict::Inconclusive
    };

    DecayFit {
        exp_rate: -slope_exp,
        exp_r2,
        gauss_rate: -slope_gauss,
        gauss_r2,
        verdict,
        note: None,
    }
}

/// Slope and r² of the least-squares line through (x, y).
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|&xi| (xi - mx) * (xi - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&xi, &yi)| (xi - mx) * (yi - my)).sum();
    let syy: f64 = y.iter().map(|&yi| (yi - my) * (yi - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return (0.0, 0.0);
    }
    let slope = sxy / sxx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - (my + slope * (xi - mx));
            r * r
        })
        .sum();
    (slope, (1.0 - ss_res / syy).clamp(0.0, 1.0))
}
