//! The pure-mixed state family and its closed-form structure.
//!
//! A pure-mixed state correlates each basis state of the system with a mixed
//! apparatus state confined to one pointer sector. The module builds that
//! state, its purification over an auxiliary space, the nearest separable
//! state (block-diagonal truncation), the equimixed classical reference
//! state, and the analytic spectra of the state and of its partial transpose.

use faer::Mat;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::qspace::{DensityMatrix, SpaceLayout};
use crate::{C64, Error, Result};

/// Tolerance for weight and amplitude normalization checks.
const NORM_TOL: f64 = 1e-12;

/// Probability vector over the microstates of one pointer sector.
///
/// Entries must be nonnegative and sum to one; inputs that merely need
/// rescaling are rejected rather than silently renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some(&w) = entries.iter().find(|&&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidWeights(format!("entry {w} out of range")));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidWeights(format!(
                "entries sum to {sum:.17}, not 1"
            )));
        }
        Ok(Self(entries))
    }

    /// Uniform weights 1/n.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1, "weight vector cannot be empty");
        Self(vec![1.0 / n as f64; n])
    }

    /// Linearly increasing weights w_i ∝ i+1, a convenient non-uniform set.
    pub fn ramp(n: usize) -> Self {
        assert!(n >= 1, "weight vector cannot be empty");
        let total = (n * (n + 1) / 2) as f64;
        Self((1..=n).map(|i| i as f64 / total).collect())
    }

    /// Seeded random weights bounded away from zero.
    pub fn random(rng: &mut ChaCha8Rng, n: usize) -> Self {
        assert!(n >= 1, "weight vector cannot be empty");
        let raw: Vec<f64> = (0..n).map(|_| 0.1 + rng.gen::<f64>()).collect();
        let sum: f64 = raw.iter().sum();
        Self(raw.into_iter().map(|w| w / sum).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Σ w_i², the purity of the sector mixture.
    pub fn sum_of_squares(&self) -> f64 {
        self.0.iter().map(|w| w * w).sum()
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.len() as f64;
        self.0.iter().all(|&w| (w - u).abs() <= NORM_TOL)
    }
}

/// Amplitudes and sector weights defining a pure-mixed entangled state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureMixedParams {
    amplitudes: Vec<C64>,
    weights: Vec<WeightVector>,
    layout: SpaceLayout,
}

impl PureMixedParams {
    /// `amplitudes[k]` is the amplitude of system state `k`, correlated with
    /// the sector-`k` mixture `weights[k]`. Σ|c_k|² must be 1.
    pub fn new(amplitudes: Vec<C64>, weights: Vec<WeightVector>, n_e: usize) -> Result<Self> {
        if amplitudes.len() != weights.len() {
            return Err(Error::InvalidAmplitudes(format!(
                "{} amplitudes for {} sectors",
                amplitudes.len(),
                weights.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidAmplitudes(format!(
                "Σ|c_k|² = {norm:.17}, not 1"
            )));
        }
        let sector_dims: Vec<usize> = weights.iter().map(WeightVector::len).collect();
        let layout = SpaceLayout::new(amplitudes.len(), sector_dims, n_e)?;
        Ok(Self {
            amplitudes,
            weights,
            layout,
        })
    }

    /// Seeded random valid parameters with amplitudes and weights bounded
    /// away from zero, for randomized verification batteries.
    pub fn random(rng: &mut ChaCha8Rng, sector_dims: &[usize], n_e: usize) -> Self {
        let k = sector_dims.len();
        let raw: Vec<C64> = (0..k)
            .map(|_| {
                let r = (0.2 + rng.gen::<f64>()).sqrt();
                let phase = rng.gen::<f64>() * std::f64::consts::TAU;
                C64::from_polar(r, phase)
            })
            .collect();
        let norm: f64 = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let amplitudes: Vec<C64> = raw.into_iter().map(|c| c / norm).collect();
        let weights: Vec<WeightVector> = sector_dims
            .iter()
            .map(|&n| WeightVector::random(rng, n))
            .collect();
        Self::new(amplitudes, weights, n_e).expect("random draw is valid by construction")
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn weights(&self) -> &[WeightVector] {
        &self.weights
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn sector_count(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn has_uniform_weights(&self) -> bool {
        self.weights.iter().all(WeightVector::is_uniform)
    }
}

/// The entangled system–apparatus state on the S–A space.
///
/// Diagonal blocks are `|c_k|² diag(w_k)` in sector (k, k); the off-diagonal
/// block between (i, sector i) and (j, sector j) is the outer product
/// `c_i c_j* w_i w_jᵀ` of the weight vectors themselves. All blocks pairing a
/// system index with a foreign sector vanish.
pub fn build_pure_mixed(params: &PureMixedParams) -> DensityMatrix {
    let layout = params.layout().sa_layout();
    let dim = layout.dim_sa();
    let k = params.sector_count();
    let mut m = Mat::<C64>::zeros(dim, dim);
    for i in 0..k {
        let wi = params.weights()[i].as_slice();
        let ci = params.amplitudes()[i];
        let rows = layout.block_range(i, i);
        for j in 0..k {
            let wj = params.weights()[j].as_slice();
            let cj = params.amplitudes()[j];
            let cols = layout.block_range(j, j);
            if i == j {
                for (off, &w) in wi.iter().enumerate() {
                    m[(rows.start + off, rows.start + off)] = C64::new(ci.norm_sqr() * w, 0.0);
                }
            } else {
                let scale = ci * cj.conj();
                for (a, &wa) in wi.iter().enumerate() {
                    for (b, &wb) in wj.iter().enumerate() {
                        m[(rows.start + a, cols.start + b)] = scale * wa * wb;
                    }
                }
            }
        }
    }
    DensityMatrix::new(m).expect("pure-mixed construction yields a valid density matrix")
}

/// The nearest separable state: the diagonal blocks alone.
pub fn build_nearest_separable(params: &PureMixedParams) -> DensityMatrix {
    let layout = params.layout().sa_layout();
    let dim = layout.dim_sa();
    let mut m = Mat::<C64>::zeros(dim, dim);
    for k in 0..params.sector_count() {
        let rows = layout.block_range(k, k);
        let c2 = params.amplitudes()[k].norm_sqr();
        for (off, &w) in params.weights()[k].as_slice().iter().enumerate() {
            m[(rows.start + off, rows.start + off)] = C64::new(c2 * w, 0.0);
        }
    }
    DensityMatrix::new(m).expect("diagonal-block construction yields a valid density matrix")
}

/// Zero every block that couples two different system indices, leaving the
/// diagonal entries (and all within-system blocks) unchanged.
pub fn separable_truncation(rho: &DensityMatrix, layout: &SpaceLayout) -> Result<DensityMatrix> {
    if layout.n_e() != 1 {
        return Err(Error::InvalidLayout(
            "separable truncation acts on S-A states".into(),
        ));
    }
    let n_a = layout.n_a();
    if rho.dim() != layout.dim_sa() {
        return Err(Error::DimensionMismatch {
            expected: layout.dim_sa(),
            got: rho.dim(),
        });
    }
    let m = rho.mat();
    let out = Mat::from_fn(rho.dim(), rho.dim(), |r, c| {
        if r / n_a == c / n_a {
            m[(r, c)]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    DensityMatrix::new(out)
}

/// The equimixed classical state: each system state correlated with the
/// uniform mixture over its own sector, weighted by |c_k|².
pub fn build_equimixed_classical(layout: &SpaceLayout, amplitudes: &[C64]) -> Result<DensityMatrix> {
    if amplitudes.len() != layout.d_s() {
        return Err(Error::InvalidAmplitudes(format!(
            "{} amplitudes for a {}-state system",
            amplitudes.len(),
            layout.d_s()
        )));
    }
    let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidAmplitudes(format!(
            "Σ|c_k|² = {norm:.17}, not 1"
        )));
    }
    let sa = layout.sa_layout();
    let dim = sa.dim_sa();
    let mut m = Mat::<C64>::zeros(dim, dim);
    for k in 0..layout.d_s() {
        let rows = sa.block_range(k, k);
        let val = amplitudes[k].norm_sqr() / layout.sector_dims()[k] as f64;
        for r in rows {
            m[(r, r)] = C64::new(val, 0.0);
        }
    }
    DensityMatrix::new(m)
}

/// Purification of the two-sector pure-mixed state over an auxiliary space of
/// dimension N_1·N_2.
///
/// The auxiliary weights are taken equal to the sector weights themselves,
/// which makes the embedded vectors orthonormal. Tracing the projector of the
/// returned vector over the auxiliary factor recovers [`build_pure_mixed`].
pub fn purify(params: &PureMixedParams) -> Result<Vec<C64>> {
    if params.sector_count() != 2 {
        return Err(Error::UnsupportedSectorCount {
            got: params.sector_count(),
            supported: 2,
        });
    }
    let p = params.weights()[0].as_slice();
    let q = params.weights()[1].as_slice();
    let (n1, n2) = (p.len(), q.len());
    let n_a = n1 + n2;
    let n_h = n1 * n2;
    let (c1, c2) = (params.amplitudes()[0], params.amplitudes()[1]);

    let mut psi = vec![C64::new(0.0, 0.0); 2 * n_a * n_h];
    // branch 1: |s_1⟩ Σ_i √p_i |a_i⟩ |α_i⟩ with ⟨e_{lk}|α_i⟩ = √q_k δ_{il}
    for i in 0..n1 {
        for k in 0..n2 {
            psi[i * n_h + i * n2 + k] = c1 * (p[i] * q[k]).sqrt();
        }
    }
    // branch 2: |s_2⟩ Σ_j √q_j |b_j⟩ |β_j⟩ with ⟨e_{lk}|β_j⟩ = √p_l δ_{jk}
    for j in 0..n2 {
        for l in 0..n1 {
            psi[(n_a + n1 + j) * n_h + l * n2 + j] = c2 * (q[j] * p[l]).sqrt();
        }
    }
    Ok(psi)
}

/// Layout of the purification space S ⊗ A ⊗ H, with the auxiliary factor in
/// the environment slot.
pub fn purification_layout(params: &PureMixedParams) -> Result<SpaceLayout> {
    if params.sector_count() != 2 {
        return Err(Error::UnsupportedSectorCount {
            got: params.sector_count(),
            supported: 2,
        });
    }
    let dims = params.layout().sector_dims();
    params.layout().with_n_e(dims[0] * dims[1])
}

/// Predicted eigenvalue structure of the pure-mixed state.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPrediction {
    /// Count of nonzero eigenvalues, N_1 + N_2 − 1 for two sectors.
    pub nonzero_count: usize,
    /// Full multiset (descending, zero-padded); available in closed form only
    /// for uniform weights.
    pub values: Option<Vec<f64>>,
}

/// Eigenvalue structure of the two-sector state: the nonzero count always,
/// the values themselves in the uniform-weight solvable case.
pub fn analytic_spectrum(params: &PureMixedParams) -> Result<SpectrumPrediction> {
    if params.sector_count() != 2 {
        return Err(Error::UnsupportedSectorCount {
            got: params.sector_count(),
            supported: 2,
        });
    }
    let dims = params.layout().sector_dims();
    let (n1, n2) = (dims[0], dims[1]);
    let nonzero_count = n1 + n2 - 1;
    let values = if params.has_uniform_weights() {
        let c1 = params.amplitudes()[0].norm_sqr();
        let c2 = params.amplitudes()[1].norm_sqr();
        let mut vals = Vec::with_capacity(2 * (n1 + n2));
        vals.extend(std::iter::repeat(c1 / n1 as f64).take(n1 - 1));
        vals.extend(std::iter::repeat(c2 / n2 as f64).take(n2 - 1));
        vals.push((n1 as f64 - c1 * (n1 as f64 - n2 as f64)) / (n1 * n2) as f64);
        vals.extend(std::iter::repeat(0.0).take(2 * (n1 + n2) - vals.len()));
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Some(vals)
    } else {
        None
    };
    Ok(SpectrumPrediction {
        nonzero_count,
        values,
    })
}

/// Full eigenvalue multiset of the partial transpose, descending.
///
/// The diagonal blocks contribute `|c_k|² w_k(i)`; each sector pair
/// contributes `±|c_k||c_l| √(Σw_k² Σw_l²)`; the rest are zeros. Exactly
/// K(K−1)/2 eigenvalues are negative when all amplitudes are nonzero.
pub fn analytic_pt_spectrum(params: &PureMixedParams) -> Vec<f64> {
    let k = params.sector_count();
    let dim = params.layout().dim_sa();
    let mut vals = Vec::with_capacity(dim);
    for (c, w) in params.amplitudes().iter().zip(params.weights()) {
        let c2 = c.norm_sqr();
        vals.extend(w.as_slice().iter().map(|&wi| c2 * wi));
    }
    for i in 0..k {
        for j in i + 1..k {
            let mag = params.amplitudes()[i].norm()
                * params.amplitudes()[j].norm()
                * (params.weights()[i].sum_of_squares() * params.weights()[j].sum_of_squares())
                    .sqrt();
            vals.push(mag);
            vals.push(-mag);
        }
    }
    vals.extend(std::iter::repeat(0.0).take(dim - vals.len()));
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals
}

/// The two-sector state with its identically-zero rows and columns removed:
/// two diagonal blocks `|c_k|² diag(w_k)` and the weight-vector outer
/// products off the diagonal. Singular for every valid parameter set.
pub fn collapsed_matrix(params: &PureMixedParams) -> Result<Mat<C64>> {
    if params.sector_count() != 2 {
        return Err(Error::UnsupportedSectorCount {
            got: params.sector_count(),
            supported: 2,
        });
    }
    let rho = build_pure_mixed(params);
    let layout = params.layout().sa_layout();
    let keep: Vec<usize> = layout
        .block_range(0, 0)
        .chain(layout.block_range(1, 1))
        .collect();
    let m = rho.mat();
    Ok(Mat::from_fn(keep.len(), keep.len(), |i, j| {
        m[(keep[i], keep[j])]
    }))
}
