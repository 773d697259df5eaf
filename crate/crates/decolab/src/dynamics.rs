//! Tripartite Hamiltonian assembly and unitary evolution.
//!
//! The total Hamiltonian is a sum of local system, apparatus and environment
//! terms plus an apparatus–environment coupling: either a dense random
//! Hermitian matrix on A ⊗ E or a non-demolition product of the apparatus
//! Hamiltonian with a random matrix on E alone. The mixed S–A state evolves
//! as a weighted ensemble of pure vectors; the propagator is diagonalized
//! once and every step is a phase rotation in its eigenbasis. A renewed bath
//! re-extracts the reduced S–A state each interval and re-tensors it with a
//! fresh environment vector, simulating an effectively infinite bath.

use faer::{Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::measures::{
    fidelity_with_sqrt, min_pt_eigenvalue, q_decoherence, q_relaxation, relative_entropy_with_ln,
};
use crate::qspace::{
    self, DEFAULT_FLOOR, DensityMatrix, SpaceLayout, eigh, haar_vector, hermitian_ln,
    hermitian_sqrt, kron,
};
use crate::states::{PureMixedParams, build_equimixed_classical, build_nearest_separable,
    build_pure_mixed};
use crate::{C64, Error, Result};

/// Trajectory aborts when the reduced-state diagnostics exceed this.
pub const DIAGNOSTIC_ABORT: f64 = 1e-6;
/// Ensemble members below this weight are dropped.
pub const ENSEMBLE_WEIGHT_THRESHOLD: f64 = 1e-14;

/// Form of the apparatus–environment interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    /// Dense seeded random Hermitian matrix on the full A ⊗ E space.
    RandomHermitian,
    /// H_A ⊗ V with V random on E alone; commutes with the apparatus
    /// Hamiltonian, so it dephases without redistributing populations.
    NonDemolition,
}

/// Ingredients of the total Hamiltonian.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    /// System Hamiltonian, d_s × d_s Hermitian.
    pub h_s: Mat<C64>,
    /// One energy per pointer sector, degenerate within the sector.
    pub sector_energies: Vec<f64>,
    /// Diagonal environment spectrum, one value per environment state.
    pub h_e_spectrum: Vec<f64>,
    pub coupling: CouplingKind,
    /// Coupling strength λ ≥ 0.
    pub lambda: f64,
    /// Seed of the random coupling matrix.
    pub seed: u64,
}

/// Finite bath, or one renewed every fixed number of steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BathMode {
    Finite,
    Renewed { every: usize },
}

/// All tracked measures at one recorded time (ħ = 1 units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub q_d: f64,
    pub q_r: f64,
    pub s_rel_star: f64,
    pub s_rel_zero: f64,
    pub bures_star: f64,
    pub bures_zero: f64,
    pub min_pt_eig: f64,
    pub neg_count: usize,
    pub trace_err: f64,
    pub herm_err: f64,
}

/// Recorded measures plus the final reduced S–A state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub final_state: DensityMatrix,
}

/// `n` values spread uniformly over `[lo, hi]`, endpoints included.
pub fn uniform_spectrum(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Seeded real symmetric random matrix: off-diagonal entries standard
/// normal, diagonal variance 2, everything scaled by 1/√dim so the spectrum
/// converges to the semicircle of radius 2.
pub fn random_hermitian(dim: usize, seed: u64) -> Mat<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (dim as f64).sqrt();
    let mut m = Mat::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let x: f64 = rng.sample(StandardNormal);
            let v = if i == j {
                x * std::f64::consts::SQRT_2
            } else {
                x
            } * scale;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn to_complex(m: MatRef<'_, f64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)], 0.0))
}

/// Assemble H = H_S ⊗ I ⊗ I + I ⊗ H_A ⊗ I + I ⊗ I ⊗ H_E + λ I_S ⊗ V on the
/// full S ⊗ A ⊗ E space.
pub fn build_hamiltonian(spec: &HamiltonianSpec, layout: &SpaceLayout) -> Result<Mat<C64>> {
    let (d_s, n_a, n_e) = (layout.d_s(), layout.n_a(), layout.n_e());
    if spec.h_s.nrows() != d_s || spec.h_s.ncols() != d_s {
        return Err(Error::DimensionMismatch {
            expected: d_s,
            got: spec.h_s.nrows(),
        });
    }
    let defect = qspace::hermiticity_defect(spec.h_s.as_ref());
    if defect > 1e-12 {
        return Err(Error::NotHermitian { defect });
    }
    if spec.sector_energies.len() != d_s {
        return Err(Error::DimensionMismatch {
            expected: d_s,
            got: spec.sector_energies.len(),
        });
    }
    if spec.h_e_spectrum.len() != n_e {
        return Err(Error::DimensionMismatch {
            expected: n_e,
            got: spec.h_e_spectrum.len(),
        });
    }
    if !(spec.lambda >= 0.0) {
        return Err(Error::Config(format!(
            "coupling strength must be nonnegative, got {}",
            spec.lambda
        )));
    }

    let mut h_a = Mat::<C64>::zeros(n_a, n_a);
    for (k, &e) in spec.sector_energies.iter().enumerate() {
        for i in layout.block_range(0, k) {
            h_a[(i, i)] = C64::new(e, 0.0);
        }
    }
    let mut h_e = Mat::<C64>::zeros(n_e, n_e);
    for (i, &e) in spec.h_e_spectrum.iter().enumerate() {
        h_e[(i, i)] = C64::new(e, 0.0);
    }
    let coupling = match spec.coupling {
        CouplingKind::RandomHermitian => to_complex(random_hermitian(n_a * n_e, spec.seed).as_ref()),
        CouplingKind::NonDemolition => kron(
            h_a.as_ref(),
            to_complex(random_hermitian(n_e, spec.seed).as_ref()).as_ref(),
        ),
    };

    let i_s = Mat::<C64>::identity(d_s, d_s);
    let i_a = Mat::<C64>::identity(n_a, n_a);
    let i_e = Mat::<C64>::identity(n_e, n_e);

    let mut h = kron(kron(spec.h_s.as_ref(), i_a.as_ref()).as_ref(), i_e.as_ref());
    h += kron(kron(i_s.as_ref(), h_a.as_ref()).as_ref(), i_e.as_ref());
    h += kron(i_s.as_ref(), kron(i_a.as_ref(), h_e.as_ref()).as_ref());
    let mut v_term = kron(i_s.as_ref(), coupling.as_ref());
    for i in 0..v_term.nrows() {
        for j in 0..v_term.ncols() {
            v_term[(i, j)] *= spec.lambda;
        }
    }
    h += v_term;
    Ok(h)
}

/// Unitary propagator exp(−iH dt), held as the eigendecomposition of H so a
/// step is a phase rotation; the decomposition is computed once and reused.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigenvalues: Vec<f64>,
    basis: Mat<C64>,
    step_phases: Vec<C64>,
    dt: f64,
}

impl Propagator {
    pub fn new(h: MatRef<'_, C64>, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let spectrum = eigh(h)?;
        let step_phases = spectrum
            .eigenvalues
            .iter()
            .map(|&l| C64::from_polar(1.0, -l * dt))
            .collect();
        Ok(Self {
            eigenvalues: spectrum.eigenvalues,
            basis: spectrum.eigenvectors,
            step_phases,
            dt,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The dense unitary V exp(−iΛ dt) V†.
    pub fn unitary(&self) -> Mat<C64> {
        let n = self.dim();
        let scaled = Mat::from_fn(n, n, |i, j| self.basis[(i, j)] * self.step_phases[j]);
        &scaled * self.basis.adjoint()
    }

    /// Max entrywise |U†U − I| of the dense propagator.
    pub fn unitarity_defect(&self) -> f64 {
        let u = self.unitary();
        let gram = u.adjoint() * &u;
        let n = self.dim();
        qspace::max_abs_diff(gram.as_ref(), Mat::<C64>::identity(n, n).as_ref())
    }

    /// One step applied to a bundle of column states.
    pub fn apply(&self, states: MatRef<'_, C64>) -> Mat<C64> {
        let mut w = self.to_eigenbasis(states);
        self.advance(&mut w);
        self.from_eigenbasis(w.as_ref())
    }

    pub fn to_eigenbasis(&self, states: MatRef<'_, C64>) -> Mat<C64> {
        self.basis.adjoint() * states
    }

    pub fn from_eigenbasis(&self, coords: MatRef<'_, C64>) -> Mat<C64> {
        &self.basis * coords
    }

    /// One time step in eigenbasis coordinates.
    pub fn advance(&self, coords: &mut Mat<C64>) {
        for j in 0..coords.ncols() {
            for i in 0..coords.nrows() {
                coords[(i, j)] *= self.step_phases[i];
            }
        }
    }
}

/// Pure-state ensemble of a density matrix: eigenvectors with weights above
/// [`ENSEMBLE_WEIGHT_THRESHOLD`], ordered by descending weight.
pub fn ensemble_decompose(rho: &DensityMatrix) -> Vec<(f64, Vec<C64>)> {
    let spectrum = eigh(rho.mat()).expect("density matrix is Hermitian by construction");
    let n = rho.dim();
    spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|&(_, &w)| w > ENSEMBLE_WEIGHT_THRESHOLD)
        .map(|(k, &w)| {
            let v: Vec<C64> = (0..n).map(|i| spectrum.eigenvectors[(i, k)]).collect();
            (w, v)
        })
        .collect()
}

/// Evolve the S–A state of `initial_sa` coupled to the environment of `spec`,
/// recording every `record_every`-th step (and step 0).
///
/// The initial total state is the pure-state ensemble of the S–A density
/// matrix, each member tensored with one seeded Haar-random environment
/// vector. Under [`BathMode::Renewed`] the reduced S–A state is re-extracted,
/// re-decomposed and re-tensored with a fresh environment vector after each
/// interval. Diagnostics beyond [`DIAGNOSTIC_ABORT`] abort the trajectory.
pub fn evolve(
    initial_sa: &PureMixedParams,
    spec: &HamiltonianSpec,
    dt: f64,
    n_steps: usize,
    record_every: usize,
    bath: BathMode,
    env_seed: u64,
) -> Result<Trajectory> {
    if n_steps == 0 {
        return Err(Error::Config("need at least one step".into()));
    }
    if record_every == 0 {
        return Err(Error::Config("record interval must be at least 1".into()));
    }
    if let BathMode::Renewed { every: 0 } = bath {
        return Err(Error::Config("renewal interval must be at least 1".into()));
    }

    let layout = initial_sa.layout().clone();
    let references = MeasureReferences::new(initial_sa)?;

    let h = build_hamiltonian(spec, &layout)?;
    let propagator = Propagator::new(h.as_ref(), dt)?;
    drop(h);

    let mut env_rng = ChaCha8Rng::seed_from_u64(env_seed);
    let env0 = haar_vector(&mut env_rng, layout.n_e());

    let rho0 = build_pure_mixed(initial_sa);
    let members = ensemble_decompose(&rho0);
    let (mut weights, psi) = tensor_with_environment(&members, &env0);
    let mut coords = propagator.to_eigenbasis(psi.as_ref());

    let mut records = Vec::with_capacity(n_steps / record_every + 2);
    let (first, mut latest) = reduce_and_measure(0, 0.0, &coords, &weights, &propagator, &layout, &references)?;
    records.push(first);

    for step in 1..=n_steps {
        propagator.advance(&mut coords);

        let renew = matches!(bath, BathMode::Renewed { every } if step % every == 0);
        let record = step % record_every == 0;
        if !(renew || record || step == n_steps) {
            continue;
        }

        let t = step as f64 * dt;
        let (rec, rho) =
            reduce_and_measure(step, t, &coords, &weights, &propagator, &layout, &references)?;
        if record {
            records.push(rec);
        }
        latest = rho;

        if renew {
            let members = ensemble_decompose(&latest);
            let env = haar_vector(&mut env_rng, layout.n_e());
            let (w, psi) = tensor_with_environment(&members, &env);
            weights = w;
            coords = propagator.to_eigenbasis(psi.as_ref());
        }
    }

    Ok(Trajectory {
        records,
        final_state: latest,
    })
}

/// Precomputed reference states and their matrix functions, shared across a
/// whole trajectory.
struct MeasureReferences {
    ln_star: Mat<C64>,
    ln_zero: Mat<C64>,
    sqrt_star: Mat<C64>,
    sqrt_zero: Mat<C64>,
}

impl MeasureReferences {
    fn new(params: &PureMixedParams) -> Result<Self> {
        let star = build_nearest_separable(params);
        let zero = build_equimixed_classical(params.layout(), params.amplitudes())?;
        Ok(Self {
            ln_star: hermitian_ln(star.mat(), DEFAULT_FLOOR)?,
            ln_zero: hermitian_ln(zero.mat(), DEFAULT_FLOOR)?,
            sqrt_star: hermitian_sqrt(star.mat(), DEFAULT_FLOOR)?,
            sqrt_zero: hermitian_sqrt(zero.mat(), DEFAULT_FLOOR)?,
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn reduce_and_measure(
    step: usize,
    t: f64,
    coords: &Mat<C64>,
    weights: &[f64],
    propagator: &Propagator,
    layout: &SpaceLayout,
    references: &MeasureReferences,
) -> Result<(TrajectoryRecord, DensityMatrix)> {
    let psi = propagator.from_eigenbasis(coords.as_ref());
    let (raw, trace_err, herm_err) = reduce_sa(psi.as_ref(), weights, layout);
    if trace_err > DIAGNOSTIC_ABORT || herm_err > DIAGNOSTIC_ABORT {
        return Err(Error::DiagnosticsDiverged {
            step,
            trace_err,
            herm_err,
        });
    }
    let rho = DensityMatrix::new(raw)?;
    let sa = layout.sa_layout();
    let pt = min_pt_eigenvalue(&rho, &sa)?;
    let record = TrajectoryRecord {
        t,
        q_d: q_decoherence(&rho, &sa)?,
        q_r: q_relaxation(&rho, &sa)?,
        s_rel_star: relative_entropy_with_ln(&rho, references.ln_star.as_ref())?,
        s_rel_zero: relative_entropy_with_ln(&rho, references.ln_zero.as_ref())?,
        bures_star: 2.0 - 2.0 * fidelity_with_sqrt(&rho, references.sqrt_star.as_ref())?.sqrt(),
        bures_zero: 2.0 - 2.0 * fidelity_with_sqrt(&rho, references.sqrt_zero.as_ref())?.sqrt(),
        min_pt_eig: pt.min_eigenvalue,
        neg_count: pt.negative_count,
        trace_err,
        herm_err,
    };
    Ok((record, rho))
}

/// ρ^{S-A} = Σ_k w_k Tr_E |ψ_k⟩⟨ψ_k| with trace and hermiticity diagnostics
/// taken before symmetrization.
fn reduce_sa(psi: MatRef<'_, C64>, weights: &[f64], layout: &SpaceLayout) -> (Mat<C64>, f64, f64) {
    let d_sa = layout.dim_sa();
    let n_e = layout.n_e();
    let mut acc = Mat::<C64>::zeros(d_sa, d_sa);
    for (k, &w) in weights.iter().enumerate() {
        let m = Mat::from_fn(d_sa, n_e, |a, e| psi[(a * n_e + e, k)]);
        let outer = &m * m.adjoint();
        for i in 0..d_sa {
            for j in 0..d_sa {
                acc[(i, j)] += outer[(i, j)] * w;
            }
        }
    }
    let trace_err = (qspace::trace(acc.as_ref()).re - 1.0).abs();
    let herm_err = qspace::hermiticity_defect(acc.as_ref());
    (qspace::symmetrize(acc.as_ref()), trace_err, herm_err)
}

fn tensor_with_environment(
    members: &[(f64, Vec<C64>)],
    env: &[C64],
) -> (Vec<f64>, Mat<C64>) {
    let d_sa = members.first().map_or(0, |(_, v)| v.len());
    let n_e = env.len();
    let psi = Mat::from_fn(d_sa * n_e, members.len(), |row, k| {
        members[k].1[row / n_e] * env[row % n_e]
    });
    (members.iter().map(|(w, _)| *w).collect(), psi)
}
