//! Tensor-product linear-algebra core.
//!
//! Composite-space bookkeeping for S ⊗ A ⊗ E, partial trace, partial
//! transpose, and matrix functions of Hermitian operators. Everything here is
//! a pure function of its inputs; values are immutable after construction.

use faer::{Mat, MatRef, Side};
use rand::Rng;
use rand_distr::StandardNormal;
use std::ops::Range;

use crate::{C64, Error, Result};

/// Max asymmetry admitted before eigensolving symmetrizes a matrix.
pub const HERM_TOL: f64 = 1e-10;
/// Admission tolerance for density-matrix hermiticity and trace.
pub const DENSITY_TOL: f64 = 1e-12;
/// Admission tolerance for density-matrix positivity.
pub const PSD_TOL: f64 = 1e-10;
/// Default eigenvalue floor for singular matrix functions (ln, sqrt).
pub const DEFAULT_FLOOR: f64 = 1e-12;

/// One factor of the S ⊗ A ⊗ E product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    System,
    Apparatus,
    Environment,
}

/// Dimensions and basis ordering of the composite space.
///
/// The basis is ordered system-index major, then apparatus index with the
/// pointer sectors concatenated in order, then environment index. For a
/// two-state system with sector dimensions `(N_1, N_2)` the S–A indices are
/// `0..N_1` (system 0, sector 0), `N_1..N_1+N_2` (system 0, sector 1),
/// `N_1+N_2..2N_1+N_2` (system 1, sector 0), and the remainder (system 1,
/// sector 1). Every index formula in the crate assumes this ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceLayout {
    d_s: usize,
    sector_dims: Vec<usize>,
    n_e: usize,
}

impl SpaceLayout {
    /// One pointer sector per measured system state: `sector_dims.len()` must
    /// equal `d_s`.
    pub fn new(d_s: usize, sector_dims: Vec<usize>, n_e: usize) -> Result<Self> {
        if d_s < 2 {
            return Err(Error::InvalidLayout(format!(
                "system dimension must be at least 2, got {d_s}"
            )));
        }
        if sector_dims.len() != d_s {
            return Err(Error::InvalidLayout(format!(
                "expected one pointer sector per system state ({d_s}), got {}",
                sector_dims.len()
            )));
        }
        if sector_dims.iter().any(|&n| n == 0) {
            return Err(Error::InvalidLayout("empty pointer sector".into()));
        }
        if n_e == 0 {
            return Err(Error::InvalidLayout(
                "environment dimension must be at least 1".into(),
            ));
        }
        Ok(Self {
            d_s,
            sector_dims,
            n_e,
        })
    }

    pub fn d_s(&self) -> usize {
        self.d_s
    }

    pub fn sector_dims(&self) -> &[usize] {
        &self.sector_dims
    }

    pub fn n_e(&self) -> usize {
        self.n_e
    }

    /// Apparatus dimension `N_A = Σ_k N_k`.
    pub fn n_a(&self) -> usize {
        self.sector_dims.iter().sum()
    }

    pub fn dim_sa(&self) -> usize {
        self.d_s * self.n_a()
    }

    pub fn dim_total(&self) -> usize {
        self.dim_sa() * self.n_e
    }

    /// Offset of sector `k` within the apparatus index range.
    pub fn sector_offset(&self, k: usize) -> usize {
        self.sector_dims[..k].iter().sum()
    }

    /// S–A index range covered by system state `s` paired with sector `k`.
    pub fn block_range(&self, s: usize, k: usize) -> Range<usize> {
        let base = s * self.n_a() + self.sector_offset(k);
        base..base + self.sector_dims[k]
    }

    /// Same sector structure over a different environment dimension.
    pub fn with_n_e(&self, n_e: usize) -> Result<Self> {
        Self::new(self.d_s, self.sector_dims.clone(), n_e)
    }

    /// The S–A layout with the environment factor dropped.
    pub fn sa_layout(&self) -> Self {
        Self {
            d_s: self.d_s,
            sector_dims: self.sector_dims.clone(),
            n_e: 1,
        }
    }
}

/// Hermitian, unit-trace, positive-semidefinite complex matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: Mat<C64>,
}

impl DensityMatrix {
    /// Validates hermiticity (1e-12), unit trace (1e-12) and positivity
    /// (min eigenvalue ≥ −1e-10), then stores the symmetrized matrix.
    pub fn new(mat: Mat<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let defect = hermiticity_defect(mat.as_ref());
        if defect > DENSITY_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let tr = trace(mat.as_ref());
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidTrace { trace: tr.re });
        }
        let mat = symmetrize(mat.as_ref());
        let spectrum = eigh(mat.as_ref())?;
        let min = spectrum.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(Self { mat })
    }

    /// Projector |v⟩⟨v| of a normalized state vector.
    pub fn from_pure(v: &[C64]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > DENSITY_TOL {
            return Err(Error::NotNormalized { norm });
        }
        let n = v.len();
        let mat = Mat::from_fn(n, n, |i, j| v[i] * v[j].conj());
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> MatRef<'_, C64> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> Mat<C64> {
        self.mat
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns match `eigenvalues`.
    pub eigenvectors: Mat<C64>,
}

/// Eigendecomposition with the hermiticity guard: asymmetry up to
/// [`HERM_TOL`] is symmetrized away, anything larger is an error.
pub fn eigh(m: MatRef<'_, C64>) -> Result<HermitianSpectrum> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let defect = hermiticity_defect(m);
    if defect > HERM_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let sym = symmetrize(m);
    let evd = sym
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let n = m.nrows();
    let s = evd.S();
    let u = evd.U();
    // faer returns ascending order; flip to descending.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        s.column_vector()[b]
            .re
            .partial_cmp(&s.column_vector()[a].re)
            .expect("eigenvalues of a Hermitian matrix are finite")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| s.column_vector()[i].re).collect();
    let eigenvectors = Mat::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok(HermitianSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Kronecker product, realizing the ⊗ of composite-space operators.
pub fn kron(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Mat<C64> {
    let mut out = Mat::zeros(a.nrows() * b.nrows(), a.ncols() * b.ncols());
    faer::linalg::kron::kron(out.as_mut(), a, b);
    out
}

/// Partial trace over the factors not listed in `keep`.
///
/// The kept factors stay in canonical S, A, E order regardless of the order
/// of `keep`. Tracing a product state returns the kept factor.
pub fn partial_trace(
    rho: &DensityMatrix,
    layout: &SpaceLayout,
    keep: &[Subsystem],
) -> Result<DensityMatrix> {
    if rho.dim() != layout.dim_total() {
        return Err(Error::DimensionMismatch {
            expected: layout.dim_total(),
            got: rho.dim(),
        });
    }
    if keep.is_empty() {
        return Err(Error::InvalidLayout("no subsystem kept".into()));
    }
    let dims = [layout.d_s(), layout.n_a(), layout.n_e()];
    let mut kept = [false; 3];
    for s in keep {
        let slot = match s {
            Subsystem::System => 0,
            Subsystem::Apparatus => 1,
            Subsystem::Environment => 2,
        };
        if kept[slot] {
            return Err(Error::InvalidLayout("duplicate subsystem in keep".into()));
        }
        kept[slot] = true;
    }

    let kept_dims: Vec<usize> = (0..3).filter(|&i| kept[i]).map(|i| dims[i]).collect();
    let traced_dims: Vec<usize> = (0..3).filter(|&i| !kept[i]).map(|i| dims[i]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let traced_total: usize = traced_dims.iter().product();

    // Flattened index of the composite basis state with kept multi-index `k`
    // and traced multi-index `t`, both little-endian over their factor lists.
    let compose = |k: usize, t: usize| -> usize {
        let mut k_rem = k;
        let mut t_rem = t;
        let mut idx = 0;
        for slot in 0..3 {
            let d = dims[slot];
            let stride: usize = dims[slot + 1..].iter().product();
            let pos = if kept[slot] {
                let sub_stride: usize = (slot + 1..3)
                    .filter(|&i| kept[i])
                    .map(|i| dims[i])
                    .product();
                let p = k_rem / sub_stride;
                k_rem %= sub_stride;
                p
            } else {
                let sub_stride: usize = (slot + 1..3)
                    .filter(|&i| !kept[i])
                    .map(|i| dims[i])
                    .product();
                let p = t_rem / sub_stride;
                t_rem %= sub_stride;
                p
            };
            debug_assert!(pos < d);
            idx += pos * stride;
        }
        idx
    };

    let m = rho.mat();
    let mut out = Mat::<C64>::zeros(out_dim, out_dim);
    for i in 0..out_dim {
        for j in 0..out_dim {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..traced_total {
                acc += m[(compose(i, t), compose(j, t))];
            }
            out[(i, j)] = acc;
        }
    }
    DensityMatrix::new(out)
}

/// Partial transpose with respect to the system factor of an S–A state.
///
/// The input must have the environment already traced out (`n_e == 1`).
/// The output is Hermitian but in general not positive.
pub fn partial_transpose(rho: &DensityMatrix, layout: &SpaceLayout) -> Result<Mat<C64>> {
    if layout.n_e() != 1 {
        return Err(Error::InvalidLayout(
            "partial transpose needs an S-A state; trace out the environment first".into(),
        ));
    }
    let n_a = layout.n_a();
    let dim = layout.dim_sa();
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: rho.dim(),
        });
    }
    let m = rho.mat();
    let out = Mat::from_fn(dim, dim, |r, c| {
        let (i, a) = (r / n_a, r % n_a);
        let (j, b) = (c / n_a, c % n_a);
        m[(j * n_a + a, i * n_a + b)]
    });
    Ok(out)
}

/// `V f(Λ) V†` over the eigendecomposition of a Hermitian matrix.
///
/// With `floor = Some(x)` the eigenvalues are clipped below at `x > 0` before
/// `f` is applied, which regularizes singular functions such as `ln` on
/// rank-deficient inputs.
pub fn hermitian_fn(
    m: MatRef<'_, C64>,
    f: impl Fn(f64) -> f64,
    floor: Option<f64>,
) -> Result<Mat<C64>> {
    if let Some(fl) = floor {
        if fl <= 0.0 {
            return Err(Error::InvalidFloor { floor: fl });
        }
    }
    let spectrum = eigh(m)?;
    let n = m.nrows();
    let fvals: Vec<f64> = spectrum
        .eigenvalues
        .iter()
        .map(|&l| f(floor.map_or(l, |fl| l.max(fl))))
        .collect();
    let u = spectrum.eigenvectors.as_ref();
    let scaled = Mat::from_fn(n, n, |i, j| u[(i, j)] * fvals[j]);
    Ok(&scaled * u.adjoint())
}

/// Matrix logarithm with eigenvalues clipped below at `floor`.
pub fn hermitian_ln(m: MatRef<'_, C64>, floor: f64) -> Result<Mat<C64>> {
    hermitian_fn(m, f64::ln, Some(floor))
}

/// Matrix square root with eigenvalues clipped below at `floor`.
pub fn hermitian_sqrt(m: MatRef<'_, C64>, floor: f64) -> Result<Mat<C64>> {
    hermitian_fn(m, f64::sqrt, Some(floor))
}

/// Random density matrix from the Hilbert–Schmidt (Ginibre) ensemble.
pub fn random_density(rng: &mut impl Rng, dim: usize) -> DensityMatrix {
    let g = Mat::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut m = &g * g.adjoint();
    let tr = trace(m.as_ref()).re;
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] /= tr;
        }
    }
    DensityMatrix::new(m).expect("Ginibre construction yields a valid density matrix")
}

/// Seeded Haar-random unit vector (complex normal entries, normalized).
pub fn haar_vector(rng: &mut impl Rng, dim: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

pub(crate) fn trace(m: MatRef<'_, C64>) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

pub(crate) fn hermiticity_defect(m: MatRef<'_, C64>) -> f64 {
    let mut defect: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let d = m[(i, j)] - m[(j, i)].conj();
            defect = defect.max(d.norm());
        }
    }
    defect
}

pub(crate) fn symmetrize(m: MatRef<'_, C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        (m[(i, j)] + m[(j, i)].conj()) * 0.5
    })
}

/// Max entrywise absolute difference between two matrices.
pub fn max_abs_diff(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    let mut d: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            d = d.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    d
}
