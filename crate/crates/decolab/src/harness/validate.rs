//! Randomized analytic-vs-numerical validation battery.
//!
//! Every check compares a numerically computed quantity against a closed
//! form; tolerances are generous relative to rounding noise, so the pass set
//! is independent of the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measures::{
    DERIVATIVE_STEP, ProductState, correlation_split, min_pt_eigenvalue,
    nearest_separable_derivative, q_decoherence, relative_entropy,
};
use crate::qspace::{DEFAULT_FLOOR, DensityMatrix, Subsystem, eigh, max_abs_diff, partial_trace};
use crate::states::{
    PureMixedParams, WeightVector, analytic_pt_spectrum, analytic_spectrum,
    build_nearest_separable, build_pure_mixed, purification_layout, purify,
};
use crate::{C64, Result};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failing(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// Pass/fail table, one line per check.
    pub fn render(&self) -> String {
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(0);
        let mut out = format!("validation battery (seed {})\n", self.seed);
        for c in &self.checks {
            out.push_str(&format!(
                "  {:<width$}  {}  {}\n",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.detail,
            ));
        }
        out.push_str(if self.all_passed() {
            "all checks passed\n"
        } else {
            "CHECKS FAILED\n"
        });
        out
    }
}

/// Run the whole battery with one seed for all random draws.
pub fn validate_suite(seed: u64) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        check("spectrum-counts", spectrum_counts(&mut rng)),
        check("spectrum-uniform-values", spectrum_uniform_values(&mut rng)),
        check("pt-spectrum", pt_spectrum(&mut rng)),
        check("solvable-relative-entropy", solvable_relative_entropy()),
        check("separable-state-qd", separable_state_qd(&mut rng)),
        check("derivative-positivity", derivative_positivity(&mut rng)),
        check("purification-reduction", purification_reduction(&mut rng)),
        check("min-pt-formula", min_pt_formula(&mut rng)),
    ];
    ValidationReport { seed, checks }
}

fn check(name: &str, outcome: Result<(bool, String)>) -> CheckResult {
    match outcome {
        Ok((passed, detail)) => CheckResult {
            name: name.to_string(),
            passed,
            detail,
        },
        Err(e) => CheckResult {
            name: name.to_string(),
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn random_dims(rng: &mut ChaCha8Rng, max: usize) -> [usize; 2] {
    [
        1 + (rng.gen::<u32>() as usize) % max,
        1 + (rng.gen::<u32>() as usize) % max,
    ]
}

/// Nonzero eigenvalue count is N_1 + N_2 − 1 for random parameters.
fn spectrum_counts(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    for _ in 0..30 {
        let dims = random_dims(rng, 8);
        let params = PureMixedParams::random(rng, &dims, 1);
        let expect = analytic_spectrum(&params)?.nonzero_count;
        let eigs = eigh(build_pure_mixed(&params).mat())?.eigenvalues;
        let got = eigs.iter().filter(|&&l| l > 1e-10).count();
        if got != expect {
            return Ok((
                false,
                format!("dims {dims:?}: {got} nonzero eigenvalues, expected {expect}"),
            ));
        }
    }
    Ok((true, "30 random parameter sets".into()))
}

/// Uniform-weight eigenvalues match the closed form to 1e-10.
fn spectrum_uniform_values(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut max_err: f64 = 0.0;
    for _ in 0..15 {
        let dims = random_dims(rng, 8);
        let base = PureMixedParams::random(rng, &dims, 1);
        let params = PureMixedParams::new(
            base.amplitudes().to_vec(),
            dims.iter().map(|&n| WeightVector::uniform(n)).collect(),
            1,
        )?;
        let predicted = analytic_spectrum(&params)?
            .values
            .expect("uniform weights have closed-form eigenvalues");
        let eigs = eigh(build_pure_mixed(&params).mat())?.eigenvalues;
        for (g, e) in eigs.iter().zip(&predicted) {
            max_err = max_err.max((g - e).abs());
        }
    }
    Ok((max_err <= 1e-10, format!("max |Δλ| = {max_err:.2e}")))
}

/// Full PT spectra match the closed forms for two and three sectors.
fn pt_spectrum(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut max_err: f64 = 0.0;
    for k in [2usize, 3] {
        for _ in 0..if k == 2 { 20 } else { 10 } {
            let dims: Vec<usize> = (0..k)
                .map(|_| 1 + (rng.gen::<u32>() as usize) % 5)
                .collect();
            let params = PureMixedParams::random(rng, &dims, 1);
            let rho = build_pure_mixed(&params);
            let pt = crate::qspace::partial_transpose(&rho, params.layout())?;
            let eigs = eigh(pt.as_ref())?.eigenvalues;
            let predicted = analytic_pt_spectrum(&params);
            for (g, e) in eigs.iter().zip(&predicted) {
                max_err = max_err.max((g - e).abs());
            }
            let negs = eigs.iter().filter(|&&l| l < -1e-10).count();
            if negs != k * (k - 1) / 2 {
                return Ok((false, format!("{negs} negative PT eigenvalues for K = {k}")));
            }
        }
    }
    Ok((max_err <= 1e-10, format!("max |Δλ| = {max_err:.2e}")))
}

/// The uniform solvable case: quantum part against its closed form,
/// classical part against the subsystem entropy.
fn solvable_relative_entropy() -> Result<(bool, String)> {
    let half = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let closed_form = |n1: f64, n2: f64| -> f64 {
        0.5 / n1 * (1.0 + n1 / n2).ln() + 0.5 / n2 * (1.0 + n2 / n1).ln()
    };
    let mut max_err: f64 = 0.0;
    for (n1, n2) in [(1, 1), (2, 2), (4, 4), (8, 8), (16, 16), (7, 8)] {
        let params = PureMixedParams::new(
            vec![half, half],
            vec![WeightVector::uniform(n1), WeightVector::uniform(n2)],
            1,
        )?;
        let rho = build_pure_mixed(&params);
        let star = build_nearest_separable(&params);
        let s = relative_entropy(&rho, &star, DEFAULT_FLOOR)?;
        max_err = max_err.max((s - closed_form(n1 as f64, n2 as f64)).abs());
        let split = correlation_split(&rho, params.layout())?;
        max_err = max_err.max((split.classical - 2f64.ln()).abs());
    }
    Ok((max_err <= 1e-9, format!("max error {max_err:.2e}")))
}

/// The separable truncation carries no off-diagonal block at all.
fn separable_state_qd(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    for _ in 0..10 {
        let dims = random_dims(rng, 8);
        let params = PureMixedParams::random(rng, &dims, 1);
        let star = build_nearest_separable(&params);
        let qd = q_decoherence(&star, params.layout())?;
        if qd != 0.0 {
            return Ok((false, format!("Q_D(ρ*) = {qd:.3e}")));
        }
    }
    Ok((true, "Q_D(ρ*) = 0 exactly, 10 parameter sets".into()))
}

/// One-sided derivative of the relative entropy towards random product
/// states never dips below −1e-6.
fn derivative_positivity(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut min_derivative = f64::INFINITY;
    for _ in 0..5 {
        let dims = random_dims(rng, 5);
        let params = PureMixedParams::random(rng, &dims, 1);
        let layout = params.layout();
        for _ in 0..20 {
            let sigma = ProductState::random(rng, layout.d_s(), layout.n_a());
            let d = nearest_separable_derivative(&params, &sigma, DERIVATIVE_STEP)?;
            min_derivative = min_derivative.min(d);
        }
    }
    Ok((
        min_derivative >= -1e-6,
        format!("min derivative {min_derivative:.3e}"),
    ))
}

/// Tracing the purification over the auxiliary space recovers the state.
fn purification_reduction(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut max_err: f64 = 0.0;
    for _ in 0..10 {
        let dims = random_dims(rng, 5);
        let params = PureMixedParams::random(rng, &dims, 1);
        let psi = purify(&params)?;
        let pure = DensityMatrix::from_pure(&psi)?;
        let layout = purification_layout(&params)?;
        let red = partial_trace(&pure, &layout, &[Subsystem::System, Subsystem::Apparatus])?;
        max_err = max_err.max(max_abs_diff(red.mat(), build_pure_mixed(&params).mat()));
    }
    Ok((max_err <= 1e-12, format!("max |Δρ| = {max_err:.2e}")))
}

/// Minimum PT eigenvalue equals −|c_1||c_2|√(Σp² Σq²).
fn min_pt_formula(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut max_err: f64 = 0.0;
    for _ in 0..20 {
        let dims = random_dims(rng, 8);
        let params = PureMixedParams::random(rng, &dims, 1);
        let rho = build_pure_mixed(&params);
        let pt = min_pt_eigenvalue(&rho, params.layout())?;
        let expect = -params.amplitudes()[0].norm()
            * params.amplitudes()[1].norm()
            * (params.weights()[0].sum_of_squares() * params.weights()[1].sum_of_squares()).sqrt();
        max_err = max_err.max((pt.min_eigenvalue - expect).abs());
        if pt.negative_count != 1 {
            return Ok((false, format!("{} negative eigenvalues", pt.negative_count)));
        }
    }
    Ok((max_err <= 1e-10, format!("max |Δλ_min| = {max_err:.2e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::Mat;

    #[test]
    fn default_battery_passes() {
        let report = validate_suite(1);
        assert!(report.all_passed(), "{}", report.render());
        assert_eq!(report.checks.len(), 8);
    }

    #[test]
    fn pass_set_is_seed_independent() {
        let reference: Vec<bool> = validate_suite(0).checks.iter().map(|c| c.passed).collect();
        for seed in 1..10 {
            let got: Vec<bool> = validate_suite(seed)
                .checks
                .iter()
                .map(|c| c.passed)
                .collect();
            assert_eq!(got, reference, "seed {seed} changed the pass set");
        }
    }

    #[test]
    fn injected_off_diagonal_perturbation_fails_the_qd_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = PureMixedParams::random(&mut rng, &[3, 3], 1);
        let star = build_nearest_separable(&params);
        let n = star.dim();
        let mut m = Mat::from_fn(n, n, |i, j| star.mat()[(i, j)]);
        // perturb one cross-block element pair, keeping hermiticity
        let (i, j) = (0, n - 1);
        m[(i, j)] += C64::new(1e-3, 0.0);
        m[(j, i)] += C64::new(1e-3, 0.0);
        let perturbed = DensityMatrix::new(m).unwrap();
        let qd = q_decoherence(&perturbed, params.layout()).unwrap();
        assert!(qd > 1e-7, "perturbation not detected: {qd}");
    }

    #[test]
    fn render_lists_every_check() {
        let report = validate_suite(2);
        let text = report.render();
        for c in &report.checks {
            assert!(text.contains(&c.name));
        }
        assert!(text.contains("PASS"));
    }
}
