//! Scalar diagnostics of system–apparatus states.
//!
//! Entropies and relative entropies (natural log throughout), fidelity and
//! Bures distance, the decoherence and relaxation indices, the minimum
//! partial-transpose eigenvalue, correlation splits against the nearest
//! separable state, and a finite-difference certificate that the
//! block-diagonal truncation is a local minimum of the relative entropy over
//! separable states.

use faer::{Mat, MatRef};
use rand::Rng;

use crate::qspace::{
    self, DEFAULT_FLOOR, DensityMatrix, SpaceLayout, eigh, hermitian_ln, hermitian_sqrt, kron,
    partial_trace, partial_transpose,
};
use crate::states::{PureMixedParams, build_nearest_separable, build_pure_mixed,
    separable_truncation};
use crate::{C64, Error, Result};

/// Eigenvalues below this count as zero when classifying PT spectra.
pub const PT_NEG_TOL: f64 = 1e-10;
/// Default step for the one-sided nearest-separable derivative.
pub const DERIVATIVE_STEP: f64 = 1e-6;

/// Mutual information split into its quantum and classical parts, in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSplit {
    /// s(ρ | ρ_S* ⊗ ρ_A*), the total correlation.
    pub total: f64,
    /// s(ρ | ρ*), the relative entropy of entanglement candidate.
    pub quantum: f64,
    /// s(ρ* | ρ_S* ⊗ ρ_A*), what survives the block truncation.
    pub classical: f64,
}

/// Minimum eigenvalue of the partial transpose and how many fall below
/// −[`PT_NEG_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtMinimum {
    pub min_eigenvalue: f64,
    pub negative_count: usize,
}

/// Product state |α⟩⟨α| ⊗ |β⟩⟨β| on the S–A space.
#[derive(Debug, Clone)]
pub struct ProductState {
    system: Vec<C64>,
    apparatus: Vec<C64>,
}

impl ProductState {
    pub fn new(system: Vec<C64>, apparatus: Vec<C64>) -> Result<Self> {
        for v in [&system, &apparatus] {
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::NotNormalized { norm });
            }
        }
        Ok(Self { system, apparatus })
    }

    /// Seeded random product state.
    pub fn random(rng: &mut impl Rng, d_s: usize, n_a: usize) -> Self {
        Self {
            system: qspace::haar_vector(rng, d_s),
            apparatus: qspace::haar_vector(rng, n_a),
        }
    }

    pub fn density(&self) -> Mat<C64> {
        let s = &self.system;
        let a = &self.apparatus;
        let proj_s = Mat::from_fn(s.len(), s.len(), |i, j| s[i] * s[j].conj());
        let proj_a = Mat::from_fn(a.len(), a.len(), |i, j| a[i] * a[j].conj());
        kron(proj_s.as_ref(), proj_a.as_ref())
    }
}

/// Von Neumann entropy −Σ λ ln λ in nats.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    let eigs = eigh(rho.mat())
        .expect("density matrix is Hermitian by construction")
        .eigenvalues;
    -eigs
        .iter()
        .filter(|&&l| l > DEFAULT_FLOOR)
        .map(|&l| l * l.ln())
        .sum::<f64>()
}

/// Relative entropy Tr ρ(ln ρ − ln σ) with σ's eigenvalues clipped below at
/// `floor`. Exact when supp(ρ) ⊆ supp(σ).
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix, floor: f64) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let ln_sigma = hermitian_ln(sigma.mat(), floor)?;
    relative_entropy_with_ln(rho, ln_sigma.as_ref())
}

/// Relative entropy against a reference whose (regularized) matrix logarithm
/// is already known; saves the repeated eigendecomposition when one reference
/// is compared against a whole trajectory.
pub fn relative_entropy_with_ln(rho: &DensityMatrix, ln_sigma: MatRef<'_, C64>) -> Result<f64> {
    if rho.dim() != ln_sigma.nrows() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: ln_sigma.nrows(),
        });
    }
    let eigs = eigh(rho.mat())?.eigenvalues;
    let sum_r_ln_r: f64 = eigs
        .iter()
        .filter(|&&l| l > DEFAULT_FLOOR)
        .map(|&l| l * l.ln())
        .sum();
    // Tr(ρ ln σ) — both factors Hermitian, so the trace is Σ_ij ρ_ij (lnσ)_ji
    let m = rho.mat();
    let mut tr = 0.0;
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            tr += (m[(i, j)] * ln_sigma[(j, i)]).re;
        }
    }
    Ok(sum_r_ln_r - tr)
}

/// Uhlmann fidelity F = [Tr(√σ ρ √σ)^{1/2}]², clamped into [0, 1].
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let sqrt_sigma = hermitian_sqrt(sigma.mat(), DEFAULT_FLOOR)?;
    fidelity_with_sqrt(rho, sqrt_sigma.as_ref())
}

/// Fidelity against a reference whose matrix square root is already known.
pub fn fidelity_with_sqrt(rho: &DensityMatrix, sqrt_sigma: MatRef<'_, C64>) -> Result<f64> {
    if rho.dim() != sqrt_sigma.nrows() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sqrt_sigma.nrows(),
        });
    }
    let inner = sqrt_sigma * rho.mat() * sqrt_sigma;
    let eigs = eigh(inner.as_ref())?.eigenvalues;
    let root_sum: f64 = eigs.iter().filter(|&&l| l > 0.0).map(|&l| l.sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

/// Bures distance D_B = 2 − 2√F.
pub fn bures_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(2.0 - 2.0 * fidelity(rho, sigma)?.sqrt())
}

/// Total/quantum/classical correlation split of an S–A state relative to its
/// block-diagonal truncation ρ* and the product of ρ*'s marginals.
pub fn correlation_split(rho: &DensityMatrix, layout: &SpaceLayout) -> Result<CorrelationSplit> {
    let sa = layout.sa_layout();
    let star = separable_truncation(rho, &sa)?;
    let star_s = partial_trace(&star, &sa, &[qspace::Subsystem::System])?;
    let star_a = partial_trace(&star, &sa, &[qspace::Subsystem::Apparatus])?;
    let product = DensityMatrix::new(kron(star_s.mat(), star_a.mat()))?;
    Ok(CorrelationSplit {
        total: relative_entropy(rho, &product, DEFAULT_FLOOR)?,
        quantum: relative_entropy(rho, &star, DEFAULT_FLOOR)?,
        classical: relative_entropy(&star, &product, DEFAULT_FLOOR)?,
    })
}

/// Decoherence index: summed squared moduli of the upper off-diagonal block
/// pairing the first system state's own sector with the second's.
pub fn q_decoherence(rho: &DensityMatrix, layout: &SpaceLayout) -> Result<f64> {
    let sa = two_state_sa_layout(rho, layout)?;
    let m = rho.mat();
    let mut q = 0.0;
    for i in sa.block_range(0, 0) {
        for j in sa.block_range(1, 1) {
            q += m[(i, j)].norm_sqr();
        }
    }
    Ok(q)
}

/// Relaxation index: squared deviations of the populated-sector diagonals
/// from the equimixed targets 1/N_1 and 1/N_2.
pub fn q_relaxation(rho: &DensityMatrix, layout: &SpaceLayout) -> Result<f64> {
    let sa = two_state_sa_layout(rho, layout)?;
    let m = rho.mat();
    let mut q = 0.0;
    for (k, &n_k) in sa.sector_dims().iter().enumerate() {
        let target = 1.0 / n_k as f64;
        for i in sa.block_range(k, k) {
            q += (target - m[(i, i)].re).powi(2) + m[(i, i)].im.powi(2);
        }
    }
    Ok(q)
}

/// Relaxation index referenced to the amplitude-weighted targets |c_k|²/N_k,
/// the diagonal of the equimixed classical state; this variant vanishes at
/// that state for any measurement statistics.
pub fn q_relaxation_weighted(
    rho: &DensityMatrix,
    layout: &SpaceLayout,
    amplitudes: &[C64],
) -> Result<f64> {
    let sa = two_state_sa_layout(rho, layout)?;
    if amplitudes.len() != sa.d_s() {
        return Err(Error::InvalidAmplitudes(format!(
            "{} amplitudes for a {}-state system",
            amplitudes.len(),
            sa.d_s()
        )));
    }
    let m = rho.mat();
    let mut q = 0.0;
    for (k, &n_k) in sa.sector_dims().iter().enumerate() {
        let target = amplitudes[k].norm_sqr() / n_k as f64;
        for i in sa.block_range(k, k) {
            q += (target - m[(i, i)].re).powi(2) + m[(i, i)].im.powi(2);
        }
    }
    Ok(q)
}

/// Smallest partial-transpose eigenvalue together with the count of
/// eigenvalues below −[`PT_NEG_TOL`].
pub fn min_pt_eigenvalue(rho: &DensityMatrix, layout: &SpaceLayout) -> Result<PtMinimum> {
    let pt = partial_transpose(rho, &layout.sa_layout())?;
    let eigs = eigh(pt.as_ref())?.eigenvalues;
    Ok(PtMinimum {
        min_eigenvalue: *eigs.last().expect("nonempty spectrum"),
        negative_count: eigs.iter().filter(|&&l| l < -PT_NEG_TOL).count(),
    })
}

/// One-sided finite-difference estimate of d/dx s(ρ | (1−x)ρ* + xσ) at x = 0,
/// where ρ* is the nearest separable state of `params` and σ is a pure
/// product state. Nonnegative derivatives for every σ certify ρ* as a local
/// minimum of the (floor-regularized) relative entropy over separable states.
pub fn nearest_separable_derivative(
    params: &PureMixedParams,
    sigma: &ProductState,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0 && h <= 1e-3) {
        return Err(Error::InvalidStep { step: h });
    }
    let rho = build_pure_mixed(params);
    let star = build_nearest_separable(params);
    let sigma_mat = sigma.density();
    if sigma_mat.nrows() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma_mat.nrows(),
        });
    }
    let mix = |x: f64| -> Result<DensityMatrix> {
        let m = Mat::from_fn(rho.dim(), rho.dim(), |i, j| {
            star.mat()[(i, j)] * (1.0 - x) + sigma_mat[(i, j)] * x
        });
        DensityMatrix::new(m)
    };
    let f0 = relative_entropy(&rho, &mix(0.0)?, DEFAULT_FLOOR)?;
    let fh = relative_entropy(&rho, &mix(h)?, DEFAULT_FLOOR)?;
    Ok((fh - f0) / h)
}

fn two_state_sa_layout(rho: &DensityMatrix, layout: &SpaceLayout) -> Result<SpaceLayout> {
    if layout.d_s() != 2 {
        return Err(Error::InvalidLayout(format!(
            "index ranges are defined for a two-state system, got d_s = {}",
            layout.d_s()
        )));
    }
    let sa = layout.sa_layout();
    if rho.dim() != sa.dim_sa() {
        return Err(Error::DimensionMismatch {
            expected: sa.dim_sa(),
            got: rho.dim(),
        });
    }
    Ok(sa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspace::{Subsystem, max_abs_diff, random_density};
    use crate::states::{WeightVector, build_equimixed_classical};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn half() -> C64 {
        C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    }

    fn uniform_params(n1: usize, n2: usize) -> PureMixedParams {
        PureMixedParams::new(
            vec![half(), half()],
            vec![WeightVector::uniform(n1), WeightVector::uniform(n2)],
            1,
        )
        .unwrap()
    }

    /// Closed-form s(ρ|ρ*) of the uniform-weight solvable case.
    fn solvable_quantum_part(c1_sq: f64, c2_sq: f64, n1: usize, n2: usize) -> f64 {
        let (n1, n2) = (n1 as f64, n2 as f64);
        c1_sq / n1 * (1.0 + c2_sq * n1 / (c1_sq * n2)).ln()
            + c2_sq / n2 * (1.0 + c1_sq * n2 / (c2_sq * n1)).ln()
    }

    #[test]
    fn vn_entropy_of_pure_state_is_zero() {
        let v: Vec<C64> = crate::qspace::haar_vector(&mut ChaCha8Rng::seed_from_u64(1), 6);
        let rho = DensityMatrix::from_pure(&v).unwrap();
        assert!(vn_entropy(&rho).abs() < 1e-10);
    }

    #[test]
    fn vn_entropy_of_maximally_mixed_is_ln_dim() {
        let d = 9;
        let m = Mat::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(1.0 / d as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let rho = DensityMatrix::new(m).unwrap();
        assert!((vn_entropy(&rho) - (d as f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn vn_entropy_of_equimixed_state() {
        let params = uniform_params(7, 8);
        let zero = build_equimixed_classical(params.layout(), params.amplitudes()).unwrap();
        let expect = 2f64.ln() + (7f64.ln() + 8f64.ln()) / 2.0;
        assert!((vn_entropy(&zero) - expect).abs() < 1e-10);
    }

    #[test]
    fn relative_entropy_of_state_with_itself_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(&mut rng, 7);
        let s = relative_entropy(&rho, &rho, DEFAULT_FLOOR).unwrap();
        assert!(s.abs() < 1e-10);
    }

    #[test]
    fn relative_entropy_solvable_case_n4() {
        let params = uniform_params(4, 4);
        let rho = build_pure_mixed(&params);
        let star = build_nearest_separable(&params);
        let s = relative_entropy(&rho, &star, DEFAULT_FLOOR).unwrap();
        assert!((s - 2f64.ln() / 4.0).abs() < 1e-10, "{s}");
    }

    #[test]
    fn relative_entropy_solvable_case_7_8() {
        let params = uniform_params(7, 8);
        let rho = build_pure_mixed(&params);
        let star = build_nearest_separable(&params);
        let s = relative_entropy(&rho, &star, DEFAULT_FLOOR).unwrap();
        let expect = (15f64 / 8.0).ln() / 14.0 + (15f64 / 7.0).ln() / 16.0;
        assert!((s - expect).abs() < 1e-10, "{s} vs {expect}");
        assert!((s - solvable_quantum_part(0.5, 0.5, 7, 8)).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_rejects_dimension_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_density(&mut rng, 4);
        let b = random_density(&mut rng, 5);
        assert!(matches!(
            relative_entropy(&a, &b, DEFAULT_FLOOR),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn klein_inequality_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let a = random_density(&mut rng, 6);
            let b = random_density(&mut rng, 6);
            let s = relative_entropy(&a, &b, DEFAULT_FLOOR).unwrap();
            assert!(s >= -1e-9, "Klein inequality violated: {s}");
        }
    }

    #[test]
    fn correlation_split_classical_part_is_subsystem_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let params = PureMixedParams::random(&mut rng, &[3, 4], 1);
            let rho = build_pure_mixed(&params);
            let split = correlation_split(&rho, params.layout()).unwrap();
            let expect: f64 = -params
                .amplitudes()
                .iter()
                .map(|c| {
                    let p = c.norm_sqr();
                    p * p.ln()
                })
                .sum::<f64>();
            assert!((split.classical - expect).abs() < 1e-9, "{split:?}");
            assert!(split.total >= -1e-10 && split.quantum >= -1e-10);
        }
    }

    #[test]
    fn correlation_split_pure_pure_case() {
        let c1 = C64::new(0.6, 0.0);
        let c2 = C64::new(0.8, 0.0);
        let params = PureMixedParams::new(
            vec![c1, c2],
            vec![WeightVector::uniform(1), WeightVector::uniform(1)],
            1,
        )
        .unwrap();
        let rho = build_pure_mixed(&params);
        let split = correlation_split(&rho, params.layout()).unwrap();
        let expect = -(0.36 * 0.36f64.ln() + 0.64 * 0.64f64.ln());
        assert!((split.quantum - expect).abs() < 1e-9);
        assert!((split.classical - expect).abs() < 1e-9);
    }

    #[test]
    fn correlation_split_single_branch_has_no_correlation() {
        let params = PureMixedParams::new(
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            vec![WeightVector::uniform(3), WeightVector::uniform(2)],
            1,
        )
        .unwrap();
        let rho = build_pure_mixed(&params);
        let split = correlation_split(&rho, params.layout()).unwrap();
        assert!(split.quantum.abs() < 1e-9);
        assert!(split.classical.abs() < 1e-9);
    }

    #[test]
    fn quantum_part_shrinks_with_sector_size_classical_stays() {
        let mut prev = f64::INFINITY;
        for n in [1usize, 2, 4, 8, 16] {
            let params = uniform_params(n, n);
            let rho = build_pure_mixed(&params);
            let split = correlation_split(&rho, params.layout()).unwrap();
            assert!((split.quantum - 2f64.ln() / n as f64).abs() < 1e-9);
            assert!((split.classical - 2f64.ln()).abs() < 1e-9);
            assert!(split.quantum < prev || n == 1);
            prev = split.quantum;
        }
    }

    #[test]
    fn fidelity_of_state_with_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = random_density(&mut rng, 6);
        let f = fidelity(&rho, &rho).unwrap();
        assert!((f - 1.0).abs() < 1e-9);
        assert!(bures_distance(&rho, &rho).unwrap().abs() < 1e-9);
    }

    #[test]
    fn fidelity_of_orthogonal_pure_states() {
        let mut u = vec![C64::new(0.0, 0.0); 4];
        let mut v = u.clone();
        u[0] = C64::new(1.0, 0.0);
        v[2] = C64::new(1.0, 0.0);
        let a = DensityMatrix::from_pure(&u).unwrap();
        let b = DensityMatrix::from_pure(&v).unwrap();
        let f = fidelity(&a, &b).unwrap();
        assert!(f < 1e-9);
        assert!((bures_distance(&a, &b).unwrap() - 2.0).abs() < 1e-5);
    }

    #[test]
    fn fidelity_of_pure_states_is_squared_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let u = crate::qspace::haar_vector(&mut rng, 5);
            let v = crate::qspace::haar_vector(&mut rng, 5);
            let overlap: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            let f = fidelity(
                &DensityMatrix::from_pure(&u).unwrap(),
                &DensityMatrix::from_pure(&v).unwrap(),
            )
            .unwrap();
            assert!((f - overlap.norm_sqr()).abs() < 1e-10, "{f}");
        }
    }

    #[test]
    fn fidelity_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let a = random_density(&mut rng, 5);
            let b = random_density(&mut rng, 5);
            let fab = fidelity(&a, &b).unwrap();
            let fba = fidelity(&b, &a).unwrap();
            assert!((fab - fba).abs() < 1e-9);
        }
    }

    #[test]
    fn fidelity_is_monotone_under_partial_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let layout = SpaceLayout::new(2, vec![1, 2], 4).unwrap();
        for _ in 0..50 {
            let rho_sa = random_density(&mut rng, layout.dim_sa());
            let sigma_sa = random_density(&mut rng, layout.dim_sa());
            let tau = random_density(&mut rng, layout.n_e());
            let tau2 = random_density(&mut rng, layout.n_e());
            let rho = DensityMatrix::new(kron(rho_sa.mat(), tau.mat())).unwrap();
            let sigma = DensityMatrix::new(kron(sigma_sa.mat(), tau2.mat())).unwrap();
            let f_joint = fidelity(&rho, &sigma).unwrap();
            let keep = [Subsystem::System, Subsystem::Apparatus];
            let f_red = fidelity(
                &partial_trace(&rho, &layout, &keep).unwrap(),
                &partial_trace(&sigma, &layout, &keep).unwrap(),
            )
            .unwrap();
            assert!(f_red >= f_joint - 1e-9, "{f_red} < {f_joint}");
        }
    }

    #[test]
    fn q_decoherence_examples() {
        let params = uniform_params(7, 8);
        let rho = build_pure_mixed(&params);
        let qd = q_decoherence(&rho, params.layout()).unwrap();
        assert!((qd - 1.0 / 224.0).abs() < 1e-14, "{qd}");
        let star = build_nearest_separable(&params);
        assert_eq!(q_decoherence(&star, params.layout()).unwrap(), 0.0);
    }

    #[test]
    fn q_decoherence_ignores_global_amplitude_phases() {
        let w = vec![WeightVector::ramp(3), WeightVector::random(&mut ChaCha8Rng::seed_from_u64(10), 4)];
        let a = PureMixedParams::new(vec![half(), half()], w.clone(), 1).unwrap();
        let b = PureMixedParams::new(
            vec![half() * C64::from_polar(1.0, 1.3), half() * C64::from_polar(1.0, -0.4)],
            w,
            1,
        )
        .unwrap();
        let qa = q_decoherence(&build_pure_mixed(&a), a.layout()).unwrap();
        let qb = q_decoherence(&build_pure_mixed(&b), b.layout()).unwrap();
        assert!((qa - qb).abs() < 1e-15);
    }

    #[test]
    fn q_decoherence_of_zeroed_blocks_vanishes_for_random_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let params = PureMixedParams::random(&mut rng, &[4, 3], 1);
            let star = build_nearest_separable(&params);
            assert_eq!(q_decoherence(&star, params.layout()).unwrap(), 0.0);
        }
    }

    #[test]
    fn q_relaxation_examples() {
        let params = uniform_params(7, 8);
        let rho = build_pure_mixed(&params);
        let qr = q_relaxation(&rho, params.layout()).unwrap();
        let expect = 1.0 / 28.0 + 1.0 / 32.0;
        assert!((qr - expect).abs() < 1e-14, "{qr}");
        // the equimixed state carries the same diagonal, hence the same value
        let zero = build_equimixed_classical(params.layout(), params.amplitudes()).unwrap();
        assert!((q_relaxation(&zero, params.layout()).unwrap() - expect).abs() < 1e-14);
        // but the weighted variant vanishes there
        assert!(
            q_relaxation_weighted(&zero, params.layout(), params.amplitudes()).unwrap() < 1e-28
        );
    }

    #[test]
    fn q_relaxation_measures_squared_deviation_from_literal_targets() {
        // no unit-trace state can sit exactly on the literal targets 1/N_1,
        // 1/N_2 (the two sectors would each carry unit population), so the
        // formula's zero is checked through the deviations it reports
        let layout = SpaceLayout::new(2, vec![3, 2], 1).unwrap();
        let m = Mat::from_fn(10, 10, |i, j| {
            if i == j && (0..3).contains(&i) {
                C64::new(0.5 / 3.0, 0.0)
            } else if i == j && (8..10).contains(&i) {
                C64::new(0.5 / 2.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let rho = DensityMatrix::new(m).unwrap();
        let got = q_relaxation(&rho, &layout).unwrap();
        // populated diagonals sit at half the literal targets
        let expect = 3.0 * (1.0f64 / 3.0 - 0.5 / 3.0).powi(2) + 2.0 * (0.5f64 - 0.25).powi(2);
        assert!((got - expect).abs() < 1e-14);
        // the amplitude-weighted variant does vanish on its target diagonal
        assert!(
            q_relaxation_weighted(&rho, &layout, &[half(), half()])
                .unwrap()
                .abs()
                < 1e-28
        );
    }

    #[test]
    fn min_pt_eigenvalue_examples() {
        let params = uniform_params(7, 8);
        let rho = build_pure_mixed(&params);
        let pt = min_pt_eigenvalue(&rho, params.layout()).unwrap();
        let expect = -0.5 * (1.0f64 / 56.0).sqrt();
        assert!((pt.min_eigenvalue - expect).abs() < 1e-12, "{pt:?}");
        assert_eq!(pt.negative_count, 1);

        let star = build_nearest_separable(&params);
        let pt_star = min_pt_eigenvalue(&star, params.layout()).unwrap();
        assert!(pt_star.min_eigenvalue >= -PT_NEG_TOL);
        assert_eq!(pt_star.negative_count, 0);

        let single = PureMixedParams::new(
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            vec![WeightVector::uniform(2), WeightVector::uniform(2)],
            1,
        )
        .unwrap();
        let pt_single =
            min_pt_eigenvalue(&build_pure_mixed(&single), single.layout()).unwrap();
        assert!(pt_single.min_eigenvalue.abs() < 1e-12);
        assert_eq!(pt_single.negative_count, 0);
    }

    #[test]
    fn min_pt_matches_analytic_formula_on_random_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let params = PureMixedParams::random(&mut rng, &[5, 3], 1);
            let rho = build_pure_mixed(&params);
            let pt = min_pt_eigenvalue(&rho, params.layout()).unwrap();
            let c1 = params.amplitudes()[0].norm();
            let c2 = params.amplitudes()[1].norm();
            let expect = -c1
                * c2
                * (params.weights()[0].sum_of_squares() * params.weights()[1].sum_of_squares())
                    .sqrt();
            assert!((pt.min_eigenvalue - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_is_zero_when_sigma_equals_the_separable_state() {
        // with a single populated branch and a one-dimensional sector the
        // nearest separable state is itself a pure product state
        let params = PureMixedParams::new(
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            vec![WeightVector::uniform(1), WeightVector::uniform(3)],
            1,
        )
        .unwrap();
        let mut alpha = vec![C64::new(0.0, 0.0); 2];
        alpha[0] = C64::new(1.0, 0.0);
        let mut beta = vec![C64::new(0.0, 0.0); 4];
        beta[0] = C64::new(1.0, 0.0);
        let sigma = ProductState::new(alpha, beta).unwrap();
        let d = nearest_separable_derivative(&params, &sigma, DERIVATIVE_STEP).unwrap();
        assert!(d.abs() < 1e-9, "{d}");
    }

    #[test]
    fn derivative_is_nonnegative_for_random_product_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let params = PureMixedParams::random(&mut rng, &[3, 2], 1);
            for _ in 0..10 {
                let sigma = ProductState::random(&mut rng, 2, 5);
                let d = nearest_separable_derivative(&params, &sigma, DERIVATIVE_STEP).unwrap();
                assert!(d >= -1e-6, "derivative {d}");
            }
        }
    }

    #[test]
    fn derivative_nonnegative_in_degenerate_pure_pure_case() {
        let params = PureMixedParams::new(
            vec![half(), half()],
            vec![WeightVector::uniform(1), WeightVector::uniform(1)],
            1,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            let sigma = ProductState::random(&mut rng, 2, 2);
            let d = nearest_separable_derivative(&params, &sigma, DERIVATIVE_STEP).unwrap();
            assert!(d >= -1e-6, "derivative {d}");
        }
    }

    #[test]
    fn derivative_rejects_bad_step_and_unnormalized_sigma() {
        let params = uniform_params(2, 2);
        let sigma = ProductState::random(&mut ChaCha8Rng::seed_from_u64(15), 2, 4);
        assert!(matches!(
            nearest_separable_derivative(&params, &sigma, 0.0),
            Err(Error::InvalidStep { .. })
        ));
        assert!(matches!(
            nearest_separable_derivative(&params, &sigma, 1e-2),
            Err(Error::InvalidStep { .. })
        ));
        assert!(ProductState::new(
            vec![C64::new(0.9, 0.0), C64::new(0.1, 0.0)],
            vec![C64::new(1.0, 0.0)]
        )
        .is_err());
    }

    #[test]
    fn q_measures_reject_wrong_layouts() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let layout3 = SpaceLayout::new(3, vec![2, 2, 2], 1).unwrap();
        let rho = random_density(&mut rng, layout3.dim_sa());
        assert!(matches!(
            q_decoherence(&rho, &layout3),
            Err(Error::InvalidLayout(_))
        ));
        let layout2 = SpaceLayout::new(2, vec![2, 2], 1).unwrap();
        let small = random_density(&mut rng, 5);
        assert!(matches!(
            q_relaxation(&small, &layout2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn truncation_equals_nearest_separable_on_the_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let params = PureMixedParams::random(&mut rng, &[2, 3], 1);
        let rho = build_pure_mixed(&params);
        let a = separable_truncation(&rho, params.layout()).unwrap();
        let b = build_nearest_separable(&params);
        assert!(max_abs_diff(a.mat(), b.mat()) < 1e-15);
    }
}
