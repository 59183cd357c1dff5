//! The five spin-chain Hamiltonians and exact-diagonalization solvers.
//!
//! All Hamiltonians are expressed in units of |J| with the ferromagnetic
//! sign convention:
//!
//! ```text
//! H = - sum_bonds w_j [ (1+g)/4 XX + (1-g)/4 YY ]
//!     - (k/4) sum XY+YX  - (d/4) sum XY-YX  - (D/4) sum ZZ
//!     - (h/2) sum Z
//! ```
//!
//! where `w_j = 1/j^alpha` for a bond of distance `j` (1 for nearest
//! neighbors). Spectra and factorization surfaces depend only on h^2, so the
//! field sign is a convention.
//!
//! Basis layout: bit `s` of a computational-basis index holds site `s`, with
//! bit value 0 meaning spin up (sigma_z = +1).

pub mod lanczos;
pub mod sparse;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{eigh, eigh_real};
use lanczos::{lowest_eigenpairs, LanczosOptions};
use sparse::{CsrBuilder, CsrMatrix};

/// Hard cap on chain length for any exact-diagonalization work.
pub const SITE_CAP: usize = 14;
/// Cap for materializing the dense 2^N matrix.
pub const DENSE_CAP: usize = 12;
/// Cap for full thermal-state construction (dense eigendecomposition).
pub const THERMAL_CAP: usize = 10;

#[derive(Debug, Error)]
pub enum SpinModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("chain of {requested} sites exceeds the cap of {cap}")]
    SiteCapExceeded { requested: usize, cap: usize },
    #[error("iterative eigensolver failed to converge after {iterations} iterations")]
    EigenNonConvergence { iterations: usize },
    #[error("site index {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("state validation failed: {0}")]
    InvalidState(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "xy")]
    Xy,
    #[serde(rename = "ksea")]
    Ksea,
    #[serde(rename = "duxy")]
    Duxy,
    #[serde(rename = "xyz")]
    Xyz,
    #[serde(rename = "long_range_xy")]
    LongRangeXy,
}

impl ModelKind {
    /// Feature names used as regression inputs (the target gamma excluded).
    pub fn feature_names(&self) -> &'static [&'static str] {
        match self {
            ModelKind::Xy => &["h"],
            ModelKind::Ksea => &["h", "k"],
            ModelKind::Duxy => &["h", "d"],
            ModelKind::Xyz => &["h", "delta"],
            ModelKind::LongRangeXy => &["h", "alpha"],
        }
    }

    /// True for the quadratic chains solvable by the free-fermion engine.
    pub fn is_quadratic(&self) -> bool {
        matches!(self, ModelKind::Xy | ModelKind::Ksea | ModelKind::Duxy)
    }

    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::Xy => "xy",
            ModelKind::Ksea => "ksea",
            ModelKind::Duxy => "duxy",
            ModelKind::Xyz => "xyz",
            ModelKind::LongRangeXy => "long_range_xy",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    #[serde(rename = "periodic")]
    Periodic,
    #[serde(rename = "open")]
    Open,
}

/// Couplings of one chain instance, in units of |J|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub kind: ModelKind,
    pub h: f64,
    pub gamma: f64,
    /// Symmetric off-diagonal exchange strength (KSEA only).
    pub k: f64,
    /// Antisymmetric exchange strength (DUXY only).
    pub d: f64,
    /// z-coupling ratio (XYZ only).
    pub delta: f64,
    /// Power-law exponent (long-range only).
    pub alpha: f64,
    /// Coordination number (long-range only).
    pub coordination: usize,
    pub n_sites: usize,
    pub boundary: Boundary,
}

impl HamiltonianParams {
    pub fn xy(h: f64, gamma: f64, n_sites: usize, boundary: Boundary) -> Result<Self, SpinModelError> {
        Self::build(ModelKind::Xy, h, gamma, 0.0, 0.0, 0.0, 0.0, 1, n_sites, boundary)
    }

    pub fn ksea(
        h: f64,
        gamma: f64,
        k: f64,
        n_sites: usize,
        boundary: Boundary,
    ) -> Result<Self, SpinModelError> {
        Self::build(ModelKind::Ksea, h, gamma, k, 0.0, 0.0, 0.0, 1, n_sites, boundary)
    }

    pub fn duxy(
        h: f64,
        gamma: f64,
        d: f64,
        n_sites: usize,
        boundary: Boundary,
    ) -> Result<Self, SpinModelError> {
        Self::build(ModelKind::Duxy, h, gamma, 0.0, d, 0.0, 0.0, 1, n_sites, boundary)
    }

    pub fn xyz(
        h: f64,
        gamma: f64,
        delta: f64,
        n_sites: usize,
        boundary: Boundary,
    ) -> Result<Self, SpinModelError> {
        Self::build(ModelKind::Xyz, h, gamma, 0.0, 0.0, delta, 0.0, 1, n_sites, boundary)
    }

    pub fn long_range_xy(
        h: f64,
        gamma: f64,
        alpha: f64,
        coordination: usize,
        n_sites: usize,
        boundary: Boundary,
    ) -> Result<Self, SpinModelError> {
        Self::build(
            ModelKind::LongRangeXy,
            h,
            gamma,
            0.0,
            0.0,
            0.0,
            alpha,
            coordination,
            n_sites,
            boundary,
        )
    }

    /// Constructor from a model kind plus its extra coupling, used when the
    /// couplings arrive as sampled feature vectors.
    pub fn from_sample(
        kind: ModelKind,
        features: &[f64],
        gamma: f64,
        coordination: usize,
        n_sites: usize,
        boundary: Boundary,
    ) -> Result<Self, SpinModelError> {
        let need = kind.feature_names().len();
        if features.len() < need {
            return Err(SpinModelError::InvalidParams(format!(
                "{kind} expects {need} features, got {}",
                features.len()
            )));
        }
        let h = features[0];
        match kind {
            ModelKind::Xy => Self::xy(h, gamma, n_sites, boundary),
            ModelKind::Ksea => Self::ksea(h, gamma, features[1], n_sites, boundary),
            ModelKind::Duxy => Self::duxy(h, gamma, features[1], n_sites, boundary),
            ModelKind::Xyz => Self::xyz(h, gamma, features[1], n_sites, boundary),
            ModelKind::LongRangeXy => {
                Self::long_range_xy(h, gamma, features[1], coordination, n_sites, boundary)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        kind: ModelKind,
        h: f64,
        gamma: f64,
        k: f64,
        d: f64,
        delta: f64,
        alpha: f64,
        coordination: usize,
        n_sites: usize,
        boundary: Boundary,
    ) -> Result<Self, SpinModelError> {
        let params = Self {
            kind,
            h,
            gamma,
            k,
            d,
            delta,
            alpha,
            coordination,
            n_sites,
            boundary,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), SpinModelError> {
        let err = |msg: String| Err(SpinModelError::InvalidParams(msg));
        if !(0.0..=1.0).contains(&self.gamma) {
            return err(format!("gamma = {} outside [0, 1]", self.gamma));
        }
        if self.n_sites < 2 {
            return err(format!("n_sites = {} < 2", self.n_sites));
        }
        if ![self.h, self.gamma, self.k, self.d, self.delta, self.alpha]
            .iter()
            .all(|x| x.is_finite())
        {
            return err("non-finite coupling".into());
        }
        let forbid = |name: &str, value: f64| -> Result<(), SpinModelError> {
            if value != 0.0 {
                Err(SpinModelError::InvalidParams(format!(
                    "{name} = {value} must be zero for the {} model",
                    self.kind
                )))
            } else {
                Ok(())
            }
        };
        match self.kind {
            ModelKind::Xy => {
                forbid("k", self.k)?;
                forbid("d", self.d)?;
                forbid("delta", self.delta)?;
                forbid("alpha", self.alpha)?;
            }
            ModelKind::Ksea => {
                forbid("d", self.d)?;
                forbid("delta", self.delta)?;
                forbid("alpha", self.alpha)?;
            }
            ModelKind::Duxy => {
                forbid("k", self.k)?;
                forbid("delta", self.delta)?;
                forbid("alpha", self.alpha)?;
            }
            ModelKind::Xyz => {
                forbid("k", self.k)?;
                forbid("d", self.d)?;
                forbid("alpha", self.alpha)?;
            }
            ModelKind::LongRangeXy => {
                forbid("k", self.k)?;
                forbid("d", self.d)?;
                forbid("delta", self.delta)?;
                if self.alpha < 0.0 {
                    return err(format!("alpha = {} must be >= 0", self.alpha));
                }
            }
        }
        let z = self.effective_coordination();
        if z < 1 {
            return err("coordination must be >= 1".into());
        }
        if self.kind == ModelKind::LongRangeXy
            && self.boundary == Boundary::Periodic
            && 2 * z >= self.n_sites
        {
            return err(format!(
                "coordination {} must satisfy Z < n_sites/2 = {} under periodic boundary",
                z,
                self.n_sites as f64 / 2.0
            ));
        }
        Ok(())
    }

    fn effective_coordination(&self) -> usize {
        match self.kind {
            ModelKind::LongRangeXy => self.coordination,
            _ => 1,
        }
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_sites
    }

    /// Nearest-neighbor pair whose entanglement characterizes the chain:
    /// the central bond for open chains, the first bond otherwise.
    pub fn measurement_sites(&self) -> (usize, usize) {
        match self.boundary {
            Boundary::Open => (self.n_sites / 2 - 1, self.n_sites / 2),
            Boundary::Periodic => (0, 1),
        }
    }
}

/// A pure state of the chain with its energy.
#[derive(Debug, Clone)]
pub struct QuantumState {
    amplitudes: DVector<Complex64>,
    energy: f64,
}

impl QuantumState {
    pub fn new(amplitudes: DVector<Complex64>, energy: f64) -> Result<Self, SpinModelError> {
        if !amplitudes.len().is_power_of_two() {
            return Err(SpinModelError::InvalidState(format!(
                "amplitude vector length {} is not a power of two",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(SpinModelError::InvalidState(format!(
                "norm {norm} deviates from 1 by more than 1e-12"
            )));
        }
        Ok(Self { amplitudes, energy })
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn n_sites(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    /// |<self|other>|.
    pub fn overlap(&self, other: &DVector<Complex64>) -> f64 {
        self.amplitudes.dotc(other).norm()
    }
}

/// A mixed state as an explicit matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self, SpinModelError> {
        let (r, c) = entries.shape();
        if r != c || !r.is_power_of_two() {
            return Err(SpinModelError::InvalidState(format!(
                "density matrix must be square with power-of-two dimension, got {r}x{c}"
            )));
        }
        let mut herm_err: f64 = 0.0;
        for i in 0..r {
            for j in i..r {
                herm_err = herm_err.max((entries[(i, j)] - entries[(j, i)].conj()).norm());
            }
        }
        if herm_err > 1e-10 {
            return Err(SpinModelError::InvalidState(format!(
                "Hermiticity violated by {herm_err:.3e}"
            )));
        }
        let trace: Complex64 = entries.diagonal().iter().sum();
        if (trace - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(SpinModelError::InvalidState(format!(
                "trace {trace} deviates from 1"
            )));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Smallest eigenvalue; used for positive-semidefiniteness checks.
    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = eigh(&self.entries);
        vals[0]
    }
}

/// A low-energy Gibbs ensemble: normalized weights over orthonormal
/// eigenvectors. Stands in for the full thermal state when the chain is too
/// large for a dense 2^N x 2^N matrix; states outside the retained window
/// carry weight below the truncation tolerance.
#[derive(Debug, Clone)]
pub struct ThermalEnsemble {
    pub n_sites: usize,
    pub energies: Vec<f64>,
    pub weights: Vec<f64>,
    pub states: Vec<DVector<Complex64>>,
}

/// A chain Hamiltonian held in sparse form.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    params: HamiltonianParams,
    matrix: CsrMatrix<Complex64>,
}

/// Assembles the Hamiltonian for `params` in sparse form.
pub fn build_hamiltonian(params: &HamiltonianParams) -> Result<Hamiltonian, SpinModelError> {
    params.validate()?;
    if params.n_sites > SITE_CAP {
        return Err(SpinModelError::SiteCapExceeded {
            requested: params.n_sites,
            cap: SITE_CAP,
        });
    }
    let n = params.n_sites;
    let dim = params.dim();

    // Bond list: (site a, site b, distance weight).
    let mut bonds: Vec<(usize, usize, f64)> = Vec::new();
    let z = params.effective_coordination();
    for j in 1..=z {
        let w = 1.0 / (j as f64).powf(params.alpha);
        for i in 0..n {
            match params.boundary {
                Boundary::Periodic => bonds.push((i, (i + j) % n, w)),
                Boundary::Open => {
                    if i + j < n {
                        bonds.push((i, i + j, w));
                    }
                }
            }
        }
    }

    let cxx_base = -(1.0 + params.gamma) / 4.0;
    let cyy_base = -(1.0 - params.gamma) / 4.0;
    let ck = -params.k / 4.0;
    let cd = -params.d / 4.0;
    let cz = -params.delta / 4.0;
    let cfield = -params.h / 2.0;

    let bit = |x: usize, s: usize| (x >> s) & 1;

    let mut builder = CsrBuilder::new(dim);
    for row in 0..dim {
        // Diagonal: field and zz couplings. Bit value 0 means sigma_z = +1.
        let mut diag = 0.0;
        for s in 0..n {
            diag += cfield * (1.0 - 2.0 * bit(row, s) as f64);
        }
        if cz != 0.0 {
            for &(a, b, _) in &bonds {
                let za = 1.0 - 2.0 * bit(row, a) as f64;
                let zb = 1.0 - 2.0 * bit(row, b) as f64;
                diag += cz * za * zb;
            }
        }
        builder.push(row, Complex64::new(diag, 0.0));

        // Double-flip terms. The matrix element <row|T|col> is evaluated
        // from the bits of the source column.
        for &(a, b, w) in &bonds {
            let col = row ^ (1 << a) ^ (1 << b);
            let ba = bit(col, a) as f64;
            let bb = bit(col, b) as f64;
            let cxx = cxx_base * w;
            let cyy = cyy_base * w;
            let val = if ba == bb {
                // xx - yy pairing plus the symmetric exchange.
                let re = cxx - cyy;
                let im = 2.0 * ck * (1.0 - 2.0 * ba);
                Complex64::new(re, im)
            } else {
                let re = cxx + cyy;
                let im = 2.0 * cd * (ba - bb);
                Complex64::new(re, im)
            };
            if val != Complex64::new(0.0, 0.0) {
                builder.push(col, val);
            }
        }
        builder.finish_row();
    }

    Ok(Hamiltonian {
        params: *params,
        matrix: builder.build(),
    })
}

impl Hamiltonian {
    pub fn params(&self) -> &HamiltonianParams {
        &self.params
    }

    pub fn matrix(&self) -> &CsrMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    /// Materializes the dense matrix (capped at `DENSE_CAP` sites).
    pub fn dense(&self) -> Result<DMatrix<Complex64>, SpinModelError> {
        if self.params.n_sites > DENSE_CAP {
            return Err(SpinModelError::SiteCapExceeded {
                requested: self.params.n_sites,
                cap: DENSE_CAP,
            });
        }
        let dim = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for row in 0..dim {
            for idx in self.matrix.row_ptr[row]..self.matrix.row_ptr[row + 1] {
                m[(row, self.matrix.cols[idx] as usize)] = self.matrix.vals[idx];
            }
        }
        Ok(m)
    }

    fn apply_complex(&self) -> impl Fn(&[Complex64], &mut [Complex64]) + '_ {
        move |x, y| self.matrix.matvec(x, y)
    }
}

/// Ground state via dense diagonalization for small chains and Lanczos
/// iteration beyond `THERMAL_CAP` sites.
pub fn ground_state(h: &Hamiltonian) -> Result<QuantumState, SpinModelError> {
    let n = h.params.n_sites;
    if n <= THERMAL_CAP {
        let dense = h.dense()?;
        if h.matrix.is_real() {
            let real = dense.map(|v| v.re);
            let (vals, vecs) = eigh_real(&real);
            let v = vecs.column(0).map(|x| Complex64::new(x, 0.0));
            QuantumState::new(v, vals[0])
        } else {
            let (vals, vecs) = eigh(&dense);
            QuantumState::new(vecs.column(0).into_owned(), vals[0])
        }
    } else {
        let opts = LanczosOptions::default();
        if h.matrix.is_real() {
            let real = h.matrix.to_real();
            let apply = |x: &[f64], y: &mut [f64]| real.matvec(x, y);
            let pairs = lowest_eigenpairs::<f64, _>(&apply, h.dim(), 1, 0.0, &opts)?;
            let (e, v) = &pairs[0];
            let amps = DVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0)));
            QuantumState::new(amps, *e)
        } else {
            let apply = h.apply_complex();
            let pairs = lowest_eigenpairs::<Complex64, _>(&apply, h.dim(), 1, 0.0, &opts)?;
            let (e, v) = &pairs[0];
            QuantumState::new(DVector::from_column_slice(v), *e)
        }
    }
}

/// Gibbs state e^{-beta H} / Z as a dense matrix, computed in the eigenbasis
/// with a max-weight shift. Limited to `THERMAL_CAP` sites.
pub fn thermal_state(h: &Hamiltonian, beta: f64) -> Result<DensityMatrix, SpinModelError> {
    if beta < 0.0 || !beta.is_finite() {
        return Err(SpinModelError::InvalidParams(format!(
            "beta = {beta} must be finite and >= 0"
        )));
    }
    if h.params.n_sites > THERMAL_CAP {
        return Err(SpinModelError::SiteCapExceeded {
            requested: h.params.n_sites,
            cap: THERMAL_CAP,
        });
    }
    let dense = h.dense()?;
    let (vals, vecs) = eigh(&dense);
    let e0 = vals[0];
    let weights: Vec<f64> = vals.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let dim = dense.nrows();
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for (k, &w) in weights.iter().enumerate() {
        if w / z < 1e-18 {
            continue;
        }
        let col = vecs.column(k);
        let scale = Complex64::new(w / z, 0.0);
        // rho += (w/Z) |v><v|
        for i in 0..dim {
            let a = col[i] * scale;
            for j in 0..dim {
                rho[(i, j)] += a * col[j].conj();
            }
        }
    }
    DensityMatrix::new(rho)
}

/// Truncated Gibbs ensemble over the lowest eigenstates, for chains beyond
/// the dense-thermal cap. States are retained until their Boltzmann weight
/// relative to the ground state falls below `weight_tol`.
pub fn low_energy_ensemble(
    h: &Hamiltonian,
    beta: f64,
    weight_tol: f64,
    k_max: usize,
) -> Result<ThermalEnsemble, SpinModelError> {
    if beta <= 0.0 {
        return Err(SpinModelError::InvalidParams(
            "low-energy ensemble requires beta > 0".into(),
        ));
    }
    let window = (1.0 / weight_tol).ln() / beta;
    let opts = LanczosOptions::default();
    let (energies, states): (Vec<f64>, Vec<DVector<Complex64>>) = if h.matrix.is_real() {
        let real = h.matrix.to_real();
        let apply = |x: &[f64], y: &mut [f64]| real.matvec(x, y);
        let pairs = lowest_eigenpairs::<f64, _>(&apply, h.dim(), k_max, window, &opts)?;
        pairs
            .into_iter()
            .map(|(e, v)| {
                (
                    e,
                    DVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0))),
                )
            })
            .unzip()
    } else {
        let apply = h.apply_complex();
        let pairs = lowest_eigenpairs::<Complex64, _>(&apply, h.dim(), k_max, window, &opts)?;
        pairs
            .into_iter()
            .map(|(e, v)| (e, DVector::from_column_slice(&v)))
            .unzip()
    };
    let e0 = energies[0];
    let mut weights: Vec<f64> = energies.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= z;
    }
    Ok(ThermalEnsemble {
        n_sites: h.params.n_sites,
        energies,
        weights,
        states,
    })
}

/// Input to [`reduced_two_site`]: a pure state, a dense mixed state, or a
/// low-energy ensemble.
#[derive(Debug, Clone, Copy)]
pub enum ChainState<'a> {
    Pure(&'a QuantumState),
    Mixed(&'a DensityMatrix),
    Ensemble(&'a ThermalEnsemble),
}

impl<'a> From<&'a QuantumState> for ChainState<'a> {
    fn from(s: &'a QuantumState) -> Self {
        ChainState::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for ChainState<'a> {
    fn from(s: &'a DensityMatrix) -> Self {
        ChainState::Mixed(s)
    }
}

impl<'a> From<&'a ThermalEnsemble> for ChainState<'a> {
    fn from(s: &'a ThermalEnsemble) -> Self {
        ChainState::Ensemble(s)
    }
}

/// Partial trace onto sites `(i, j)`: a 4x4 density matrix in the basis
/// |s_i s_j> with the site-i bit as the high bit.
pub fn reduced_two_site(
    state: ChainState<'_>,
    i: usize,
    j: usize,
) -> Result<DensityMatrix, SpinModelError> {
    let n_sites = match state {
        ChainState::Pure(s) => s.n_sites(),
        ChainState::Mixed(m) => m.dim().trailing_zeros() as usize,
        ChainState::Ensemble(e) => e.n_sites,
    };
    if i == j {
        return Err(SpinModelError::InvalidParams(
            "two-site reduction requires distinct sites".into(),
        ));
    }
    for &s in &[i, j] {
        if s >= n_sites {
            return Err(SpinModelError::SiteOutOfRange { site: s, n_sites });
        }
    }
    let rho = match state {
        ChainState::Pure(s) => rdm_from_amplitudes(s.amplitudes(), n_sites, i, j),
        ChainState::Mixed(m) => rdm_from_matrix(m.entries(), n_sites, i, j),
        ChainState::Ensemble(e) => {
            let mut acc = DMatrix::<Complex64>::zeros(4, 4);
            for (w, v) in e.weights.iter().zip(e.states.iter()) {
                acc += rdm_from_amplitudes(v, n_sites, i, j) * Complex64::new(*w, 0.0);
            }
            acc
        }
    };
    DensityMatrix::new(rho)
}

/// Index of the two-site basis state carried by `x` at sites `(i, j)`.
fn pair_index(x: usize, i: usize, j: usize) -> usize {
    (((x >> i) & 1) << 1) | ((x >> j) & 1)
}

/// Remaining-sites index after removing bits `i` and `j`.
fn rest_index(x: usize, i: usize, j: usize) -> usize {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let low = x & ((1 << lo) - 1);
    let mid = (x >> (lo + 1)) & ((1 << (hi - lo - 1)) - 1);
    let high = x >> (hi + 1);
    low | (mid << lo) | (high << (hi - 1))
}

fn rdm_from_amplitudes(
    amps: &DVector<Complex64>,
    n_sites: usize,
    i: usize,
    j: usize,
) -> DMatrix<Complex64> {
    let dim = 1usize << n_sites;
    let rest_dim = dim >> 2;
    // Group amplitudes by the traced-out configuration.
    let mut table = vec![[Complex64::new(0.0, 0.0); 4]; rest_dim];
    for x in 0..dim {
        table[rest_index(x, i, j)][pair_index(x, i, j)] = amps[x];
    }
    let mut rho = DMatrix::<Complex64>::zeros(4, 4);
    for entry in &table {
        for a in 0..4 {
            if entry[a] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..4 {
                rho[(a, b)] += entry[a] * entry[b].conj();
            }
        }
    }
    rho
}

fn rdm_from_matrix(
    m: &DMatrix<Complex64>,
    n_sites: usize,
    i: usize,
    j: usize,
) -> DMatrix<Complex64> {
    let dim = 1usize << n_sites;
    let rest_dim = dim >> 2;
    // Enumerate full indices by (pair content, rest content).
    let mut index_of = vec![[0usize; 4]; rest_dim];
    for x in 0..dim {
        index_of[rest_index(x, i, j)][pair_index(x, i, j)] = x;
    }
    let mut rho = DMatrix::<Complex64>::zeros(4, 4);
    for entry in &index_of {
        for a in 0..4 {
            for b in 0..4 {
                rho[(a, b)] += m[(entry[a], entry[b])];
            }
        }
    }
    rho
}

/// <H>_beta from the dense eigendecomposition; used in variational checks.
pub fn thermal_energy(h: &Hamiltonian, beta: f64) -> Result<f64, SpinModelError> {
    let dense = h.dense()?;
    let (vals, _) = eigh(&dense);
    let e0 = vals[0];
    let mut z = 0.0;
    let mut num = 0.0;
    for &e in vals.iter() {
        let w = (-beta * (e - e0)).exp();
        z += w;
        num += w * e;
    }
    Ok(num / z)
}

#[cfg(test)]
mod tests;
