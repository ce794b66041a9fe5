//! Two-layer precoder pieces: DFT pre-beamformers derived from a pattern
//! assignment, effective channels, the zero-forcing second layer, and
//! per-cluster rates.
//!
//! Within a pattern every cluster keeps only the DFT columns no co-pattern
//! cluster touches, so inter-cluster interference vanishes exactly: the
//! channel of any co-pattern neighbor is orthogonal to those columns by
//! construction.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::SupportSet;
use crate::coloring::PatternAssignment;
use crate::{Error, Result};

/// First-layer precoder: the DFT columns a cluster keeps for itself within
/// its pattern. An empty column list signals a cluster that cannot be served
/// (outage).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreBeamformer {
    pub cluster: usize,
    /// Ascending DFT indices, disjoint from every co-pattern support.
    pub columns: Vec<usize>,
}

impl PreBeamformer {
    /// Effective dimension N_g.
    pub fn dimension(&self) -> usize {
        self.columns.len()
    }
}

/// Second-layer precoder with unit-norm columns and the per-symbol power
/// share Pt/K it was designed for.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondLayerPrecoder {
    pub matrix: DMatrix<Complex64>,
    pub power_share: f64,
}

/// Columns a cluster keeps: its support minus the union of all co-pattern
/// supports. Equals the full support when the cluster is alone on its
/// pattern.
pub fn prebeamformer(
    supports: &[SupportSet],
    assignment: &PatternAssignment,
    cluster: usize,
) -> PreBeamformer {
    let pattern = assignment.pattern(cluster);
    let ambient = supports[cluster].ambient();
    let mut blocked = SupportSet::empty(ambient);
    for &other in &assignment.pattern_sets()[pattern] {
        if other != cluster {
            blocked = blocked.union_with(&supports[other]);
        }
    }
    PreBeamformer {
        cluster,
        columns: supports[cluster].difference(&blocked).indices().to_vec(),
    }
}

/// Dimension bookkeeping for two clusters sharing a pattern: γ counts the
/// supports surviving mutual overlap removal, η what the rest of the pattern
/// takes away, and N_g + N_g' = γ − η exactly.
///
/// `first` and `second` index into `pattern_supports`, the support sets of
/// every cluster on the shared pattern.
pub fn gamma_eta(
    first: usize,
    second: usize,
    pattern_supports: &[SupportSet],
) -> (usize, usize) {
    let a = &pattern_supports[first];
    let b = &pattern_supports[second];
    let mut rest = SupportSet::empty(a.ambient());
    for (i, s) in pattern_supports.iter().enumerate() {
        if i != first && i != second {
            rest = rest.union_with(s);
        }
    }
    let pair_overlap = a.intersection_count(b);
    let gamma = a.cardinality() + b.cardinality() - 2 * pair_overlap;
    let a_rest = a.intersection_count(&rest);
    let b_rest = b.intersection_count(&rest);
    let shared_rest = a.intersect(b).intersection_count(&rest);
    // the mutual-overlap indices claimed by the rest of the pattern were
    // already removed from both clusters by γ, so they leave η once each
    let eta = a_rest + b_rest - 2 * shared_rest;
    (gamma, eta)
}

/// Project a cluster channel onto pre-beamformer columns: H̄ = U¹ᴴH. Row i
/// holds the channel's coefficient on DFT column `columns[i]`.
fn dft_coefficients(channel: &DMatrix<Complex64>, columns: &[usize]) -> DMatrix<Complex64> {
    let antennas = channel.nrows();
    let scale = 1.0 / (antennas as f64).sqrt();
    DMatrix::from_fn(columns.len(), channel.ncols(), |i, k| {
        let m = columns[i];
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..antennas {
            // conjugate of the unitary DFT entry
            let phase = 2.0 * PI * (l as f64) * (m as f64) / antennas as f64;
            acc += Complex64::from_polar(scale, phase) * channel[(l, k)];
        }
        acc
    })
}

/// Effective reduced-dimension channel of a cluster through its own
/// pre-beamformer. Errors when the pre-beamformer kept no columns; callers
/// treat that as outage.
pub fn effective_channel(
    channel: &DMatrix<Complex64>,
    pre: &PreBeamformer,
) -> Result<DMatrix<Complex64>> {
    if pre.columns.is_empty() {
        return Err(Error::Dimension(format!(
            "cluster {}: pre-beamformer kept no columns (outage)",
            pre.cluster
        )));
    }
    if let Some(&max) = pre.columns.last() {
        if max >= channel.nrows() {
            return Err(Error::Dimension(format!(
                "pre-beamformer column {max} out of range for M={}",
                channel.nrows()
            )));
        }
    }
    Ok(dft_coefficients(channel, &pre.columns))
}

/// Frobenius norm of U¹ᴴ H for another cluster's channel: the interference
/// this pre-beamformer leaks. Exactly zero (up to floating point) when the
/// columns avoid the other cluster's support.
pub fn residual_ici(other_channel: &DMatrix<Complex64>, pre: &PreBeamformer) -> f64 {
    if pre.columns.is_empty() {
        return 0.0;
    }
    dft_coefficients(other_channel, &pre.columns).norm()
}

/// Zero-forcing second layer: pseudo-inverse directions for the first
/// `symbols` users, each column normalized to unit power. A numerically
/// singular effective channel is reported instead of regularized.
pub fn zf_precoder(
    effective: &DMatrix<Complex64>,
    symbols: usize,
    power_share: f64,
) -> Result<SecondLayerPrecoder> {
    let dims = effective.nrows();
    let users = effective.ncols();
    assert!(
        symbols >= 1 && symbols <= users.min(dims),
        "need 1 <= symbols <= min(N_g, K_g)"
    );
    let gram = effective.adjoint() * effective;
    let inverse = gram.clone().try_inverse().ok_or(Error::RankDeficient)?;
    if (&gram * &inverse - DMatrix::identity(users, users)).norm() > 1e-6 * users as f64 {
        return Err(Error::RankDeficient);
    }
    let directions = effective * inverse;
    let mut matrix = DMatrix::zeros(dims, symbols);
    for j in 0..symbols {
        let column = directions.column(j);
        let norm = column.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::RankDeficient);
        }
        matrix.set_column(j, &column.map(|z| z / norm));
    }
    Ok(SecondLayerPrecoder { matrix, power_share })
}

/// Gaussian-input rate log₂ det(I + Pt/(K·σ²)·B Bᴴ) with B = H̄ᴴU², in
/// bits/s/Hz.
pub fn cluster_rate(
    effective: &DMatrix<Complex64>,
    precoder: &SecondLayerPrecoder,
    power: f64,
    total_users: usize,
    noise_var: f64,
) -> f64 {
    let b = effective.adjoint() * &precoder.matrix;
    let snr = power / (total_users as f64 * noise_var);
    let users = b.nrows();
    let mut m = &b * b.adjoint();
    m *= Complex64::from(snr);
    m += DMatrix::identity(users, users);
    m.determinant().re.max(1.0).log2()
}

/// Serving condition: the effective dimension must cover the cluster's users.
pub fn feasibility(pre: &PreBeamformer, users: usize) -> bool {
    pre.dimension() >= users
}
