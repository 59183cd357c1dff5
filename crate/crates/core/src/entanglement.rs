//! Negativity and logarithmic negativity of bipartite density matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::eigh;
use crate::spin_models::{reduced_two_site, ChainState, DensityMatrix, SpinModelError};

#[derive(Debug, Error)]
pub enum EntanglementError {
    #[error("subsystem dimensions {0}x{1} do not match matrix dimension {2}")]
    DimensionMismatch(usize, usize, usize),
    #[error(transparent)]
    SpinModel(#[from] SpinModelError),
}

/// Which tensor factor to transpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Entanglement of one site pair.
#[derive(Debug, Clone, Copy)]
pub struct EntanglementRecord {
    pub pair: (usize, usize),
    pub negativity: f64,
    pub log_negativity: f64,
}

/// Partial transpose of `rho` over the chosen factor of a
/// `dims.0 x dims.1` bipartition. Hermiticity and trace are preserved.
pub fn partial_transpose(
    rho: &DMatrix<Complex64>,
    subsystem: Subsystem,
    dims: (usize, usize),
) -> Result<DMatrix<Complex64>, EntanglementError> {
    let (da, db) = dims;
    let n = rho.nrows();
    if da * db != n || rho.ncols() != n {
        return Err(EntanglementError::DimensionMismatch(da, db, n));
    }
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for a1 in 0..da {
        for b1 in 0..db {
            for a2 in 0..da {
                for b2 in 0..db {
                    let src = (a1 * db + b1, a2 * db + b2);
                    let dst = match subsystem {
                        Subsystem::First => (a2 * db + b1, a1 * db + b2),
                        Subsystem::Second => (a1 * db + b2, a2 * db + b1),
                    };
                    out[dst] = rho[src];
                }
            }
        }
    }
    Ok(out)
}

/// Negativity: the absolute sum of negative eigenvalues of the partial
/// transpose. Eigenvalues enter the sum as-is, without truncation of
/// small numerical noise.
pub fn negativity(rho: &DensityMatrix, dims: (usize, usize)) -> Result<f64, EntanglementError> {
    let pt = partial_transpose(rho.entries(), Subsystem::Second, dims)?;
    let (vals, _) = eigh(&pt);
    Ok(vals.iter().filter(|&&v| v < 0.0).map(|v| -v).sum())
}

/// Logarithmic negativity log2(2 N(rho) + 1).
pub fn log_negativity(rho: &DensityMatrix, dims: (usize, usize)) -> Result<f64, EntanglementError> {
    Ok(log_negativity_from(negativity(rho, dims)?))
}

/// The monotone map from negativity to logarithmic negativity.
pub fn log_negativity_from(negativity: f64) -> f64 {
    (2.0 * negativity + 1.0).log2()
}

/// Chain aggregate: the sum of pairwise logarithmic negativities between a
/// reference site and each partner site.
pub fn chain_entanglement(
    state: ChainState<'_>,
    reference_site: usize,
    partner_sites: &[usize],
) -> Result<f64, EntanglementError> {
    let mut total = 0.0;
    for &p in partner_sites {
        let rho = reduced_two_site(state, reference_site, p)?;
        total += log_negativity(&rho, (2, 2))?;
    }
    Ok(total)
}

/// Per-pair records alongside the aggregate, for reporting.
pub fn chain_entanglement_records(
    state: ChainState<'_>,
    reference_site: usize,
    partner_sites: &[usize],
) -> Result<Vec<EntanglementRecord>, EntanglementError> {
    partner_sites
        .iter()
        .map(|&p| {
            let rho = reduced_two_site(state, reference_site, p)?;
            let neg = negativity(&rho, (2, 2))?;
            Ok(EntanglementRecord {
                pair: (reference_site, p),
                negativity: neg,
                log_negativity: log_negativity_from(neg),
            })
        })
        .collect()
}
