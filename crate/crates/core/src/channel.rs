//! One-ring cluster geometry, DFT support sets, eigen-spectra and channel draws.
//!
//! A cluster of co-located terminals is surrounded by a ring of scatterers.
//! Seen from the array, its energy arrives over the angular interval
//! `[θ − Δ, θ + Δ]`, which on the DFT grid becomes a contiguous set of column
//! indices: the support set. The covariance eigenvectors are approximated by
//! those DFT columns and the eigenvalues by the one-ring spectrum over the
//! interval, so channel vectors are drawn by weighting the supported columns
//! with i.i.d. complex Gaussian coefficients.

use std::f64::consts::{FRAC_PI_3, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Grid points landing exactly on the ±D spectrum boundary would blow up the
/// one-ring density; ξ² is clamped to D²(1 − ε) with this ε.
const BOUNDARY_CLAMP: f64 = 1e-9;

/// The support interval is closed on both ends; this guard absorbs the
/// rounding of the sine evaluation so grid points sitting exactly on an
/// endpoint stay included (sin(π/6) lands one ulp below 0.5 in f64).
const SUPPORT_EDGE_TOL: f64 = 1e-12;

/// System-wide simulation parameters.
///
/// Angles are radians and powers linear throughout the library. The defaults
/// describe the desk-scale setup used by the experiment harness: a 32-antenna
/// half-wavelength ULA, 10 dB transmit power over unit noise, two users and
/// two data symbols per cluster, four available patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Antenna count M of the uniform linear array.
    #[serde(rename = "M")]
    pub antennas: usize,
    /// Antenna-spacing-to-wavelength ratio D.
    #[serde(rename = "D")]
    pub spacing: f64,
    /// Average total transmit power, linear scale.
    #[serde(rename = "Pt")]
    pub power: f64,
    /// Noise variance, linear scale.
    #[serde(rename = "sigma2")]
    pub noise_var: f64,
    /// Users per cluster, Kg.
    #[serde(rename = "Kg")]
    pub users_per_cluster: usize,
    /// Data symbols per cluster, Vg (at most Kg).
    #[serde(rename = "Vg")]
    pub symbols_per_cluster: usize,
    /// Number of available orthogonal patterns, P.
    #[serde(rename = "P")]
    pub patterns: usize,
    /// Relative gain of orthogonalization over multiplexing, in (0, 1].
    pub epsilon: f64,
    /// Edges with overlap weight at or below this threshold are omitted.
    #[serde(rename = "wMin")]
    pub weight_min: f64,
    /// Base RNG seed for all derived streams.
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            antennas: 32,
            spacing: 0.5,
            power: 10.0,
            noise_var: 1.0,
            users_per_cluster: 2,
            symbols_per_cluster: 2,
            patterns: 4,
            epsilon: 1.0,
            weight_min: 0.0,
            seed: 0,
        }
    }
}

impl SystemConfig {
    /// Invariant violations, one message per offending field; empty when valid.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.antennas < 1 {
            v.push("M: antenna count must be at least 1".to_string());
        }
        if !(self.spacing > 0.0) {
            v.push("D: antenna spacing ratio must be positive".to_string());
        }
        if !(self.power > 0.0) {
            v.push("Pt: transmit power must be positive".to_string());
        }
        if !(self.noise_var > 0.0) {
            v.push("sigma2: noise variance must be positive".to_string());
        }
        if self.users_per_cluster < 1 {
            v.push("Kg: users per cluster must be at least 1".to_string());
        }
        if self.symbols_per_cluster < 1 || self.symbols_per_cluster > self.users_per_cluster {
            v.push("Vg: data symbols must satisfy 1 <= Vg <= Kg".to_string());
        }
        if self.patterns < 1 {
            v.push("P: pattern count must be at least 1".to_string());
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            v.push("epsilon: must lie in (0, 1]".to_string());
        }
        if !(self.weight_min >= 0.0) {
            v.push("wMin: edge-omission threshold must be non-negative".to_string());
        }
        v
    }
}

/// Scattering-ring geometry of one user cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterGeometry {
    /// Cluster index.
    pub id: usize,
    /// Central azimuth θ of the ring center, radians, within the ±60° sector.
    pub azimuth: f64,
    /// Angular spread Δ, radians, in (0, π/2).
    pub spread: f64,
    /// Distance from the array to the ring center, meters.
    pub distance: f64,
    /// Scattering ring radius, meters.
    pub ring_radius: f64,
}

impl ClusterGeometry {
    /// Half-opening of the served sector (120° sectorization).
    pub const SECTOR_HALF_ANGLE: f64 = FRAC_PI_3;

    /// Build a geometry from ring dimensions; the spread is `atan(ring/distance)`.
    pub fn from_ring(id: usize, azimuth: f64, distance: f64, ring_radius: f64) -> Result<Self> {
        if !(distance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "cluster {id}: distance must be positive, got {distance}"
            )));
        }
        if !(ring_radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "cluster {id}: ring radius must be positive, got {ring_radius}"
            )));
        }
        if !(-Self::SECTOR_HALF_ANGLE..=Self::SECTOR_HALF_ANGLE).contains(&azimuth) {
            return Err(Error::InvalidInput(format!(
                "cluster {id}: azimuth {azimuth} rad lies outside the ±60° sector"
            )));
        }
        Ok(Self {
            id,
            azimuth,
            spread: (ring_radius / distance).atan(),
            distance,
            ring_radius,
        })
    }
}

/// Sorted DFT column indices carrying a cluster's channel energy. The
/// cardinality equals the (approximate) covariance rank.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportSet {
    indices: Vec<usize>,
    ambient: usize,
}

impl SupportSet {
    /// Validate and normalize a raw index list.
    pub fn new(mut indices: Vec<usize>, ambient: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&max) = indices.last() {
            if max >= ambient {
                return Err(Error::InvalidInput(format!(
                    "support index {max} out of range for M={ambient}"
                )));
            }
        }
        Ok(Self { indices, ambient })
    }

    pub fn empty(ambient: usize) -> Self {
        Self { indices: Vec::new(), ambient }
    }

    /// Ambient dimension M.
    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Cardinality r of the set.
    pub fn cardinality(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn intersection_count(&self, other: &SupportSet) -> usize {
        merge_count(&self.indices, &other.indices)
    }

    pub fn intersect(&self, other: &SupportSet) -> SupportSet {
        let indices = self
            .indices
            .iter()
            .copied()
            .filter(|&m| other.contains(m))
            .collect();
        SupportSet { indices, ambient: self.ambient }
    }

    /// Elements of `self` not in `other`.
    pub fn difference(&self, other: &SupportSet) -> SupportSet {
        let indices = self
            .indices
            .iter()
            .copied()
            .filter(|&m| !other.contains(m))
            .collect();
        SupportSet { indices, ambient: self.ambient }
    }

    pub fn union_with(&self, other: &SupportSet) -> SupportSet {
        let mut indices = self.indices.clone();
        indices.extend_from_slice(&other.indices);
        indices.sort_unstable();
        indices.dedup();
        SupportSet { indices, ambient: self.ambient }
    }

    pub fn is_subset_of(&self, other: &SupportSet) -> bool {
        self.indices.iter().all(|&m| other.contains(m))
    }

    /// Canonical textual form: comma-separated sorted indices.
    pub fn canonical(&self) -> String {
        self.indices
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn merge_count(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// A support set together with its positive eigenvalue profile, rescaled so
/// the eigenvalues sum to M (unit average per-antenna gain).
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSpectrum {
    pub support: SupportSet,
    pub eigenvalues: Vec<f64>,
}

/// Channel draws for every cluster in one trial.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub per_cluster: Vec<DMatrix<Complex64>>,
}

/// Column `index` of the M-point unitary DFT matrix; entry l is
/// e^{-j2π·l·index/M}/√M.
pub fn dft_column(antennas: usize, index: usize) -> DVector<Complex64> {
    assert!(
        index < antennas,
        "DFT column index {index} out of range for M={antennas}"
    );
    let scale = 1.0 / (antennas as f64).sqrt();
    DVector::from_fn(antennas, |l, _| {
        let phase = -2.0 * PI * (l as f64) * (index as f64) / antennas as f64;
        Complex64::from_polar(scale, phase)
    })
}

/// DFT indices whose spatial frequency falls inside the cluster's angular
/// interval: `{ m : m/M − 1/2 ∈ [−D sin(θ+Δ), −D sin(θ−Δ)] }`, both endpoints
/// included. May be empty for degenerate geometry at very small M.
pub fn support_set(geom: &ClusterGeometry, antennas: usize, spacing: f64) -> SupportSet {
    let lo = -spacing * (geom.azimuth + geom.spread).sin() - SUPPORT_EDGE_TOL;
    let hi = -spacing * (geom.azimuth - geom.spread).sin() + SUPPORT_EDGE_TOL;
    let indices = (0..antennas)
        .filter(|&m| {
            let xi = m as f64 / antennas as f64 - 0.5;
            xi >= lo && xi <= hi
        })
        .collect();
    SupportSet { indices, ambient: antennas }
}

/// One-ring eigenvalue profile over a support set: raw values follow
/// 1/(2Δ√(D² − ξ²)) at ξ = m/M − 1/2, then the whole profile is rescaled to
/// sum to M.
pub fn eigen_spectrum(
    geom: &ClusterGeometry,
    support: &SupportSet,
    spacing: f64,
) -> Result<ClusterSpectrum> {
    if support.is_empty() {
        return Err(Error::EmptySupport(format!(
            "cluster {}: no transmittable directions",
            geom.id
        )));
    }
    let antennas = support.ambient();
    let cap = spacing * spacing * (1.0 - BOUNDARY_CLAMP);
    let mut eigenvalues: Vec<f64> = support
        .indices()
        .iter()
        .map(|&m| {
            let xi = m as f64 / antennas as f64 - 0.5;
            let xi2 = (xi * xi).min(cap);
            1.0 / (2.0 * geom.spread * (spacing * spacing - xi2).sqrt())
        })
        .collect();
    let total: f64 = eigenvalues.iter().sum();
    let scale = antennas as f64 / total;
    for v in &mut eigenvalues {
        *v *= scale;
    }
    Ok(ClusterSpectrum { support: support.clone(), eigenvalues })
}

/// Draw an M×Kg cluster channel: each column is E Λ^{1/2} w with
/// w ~ CN(0, I_r). Columns are drawn independently; per column the
/// coefficients follow support order, real part before imaginary part, so
/// the output is a pure function of the RNG stream.
pub fn sample_channel<R: Rng + ?Sized>(
    spectrum: &ClusterSpectrum,
    users: usize,
    rng: &mut R,
) -> DMatrix<Complex64> {
    let antennas = spectrum.support.ambient();
    let scale = 1.0 / (antennas as f64).sqrt();
    let mut h = DMatrix::zeros(antennas, users);
    for k in 0..users {
        for (&m, &lambda) in spectrum.support.indices().iter().zip(&spectrum.eigenvalues) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let coeff = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2 * lambda.sqrt();
            for l in 0..antennas {
                let phase = -2.0 * PI * (l as f64) * (m as f64) / antennas as f64;
                h[(l, k)] += Complex64::from_polar(scale, phase) * coeff;
            }
        }
    }
    h
}

/// Sample every cluster of a trial.
pub fn sample_realization<R: Rng + ?Sized>(
    spectra: &[ClusterSpectrum],
    users: usize,
    rng: &mut R,
) -> ChannelRealization {
    ChannelRealization {
        per_cluster: spectra
            .iter()
            .map(|s| sample_channel(s, users, rng))
            .collect(),
    }
}

/// Dense covariance E Λ Eᴴ; Hermitian PSD with rank r and trace M. Mostly a
/// validation aid and test oracle.
pub fn covariance(spectrum: &ClusterSpectrum) -> DMatrix<Complex64> {
    let antennas = spectrum.support.ambient();
    let mut c = DMatrix::zeros(antennas, antennas);
    for (&m, &lambda) in spectrum.support.indices().iter().zip(&spectrum.eigenvalues) {
        let f = dft_column(antennas, m);
        for row in 0..antennas {
            for col in 0..antennas {
                c[(row, col)] += f[row] * f[col].conj() * lambda;
            }
        }
    }
    c
}

/// Drop `count` clusters uniformly over the sector annulus between
/// `min_distance` and `cell_radius` (area-uniform radii, uniform azimuths).
/// Per cluster the azimuth is drawn first, then the radius.
pub fn place_clusters<R: Rng + ?Sized>(
    count: usize,
    cell_radius: f64,
    ring_radius: f64,
    min_distance: f64,
    rng: &mut R,
) -> Vec<ClusterGeometry> {
    assert!(
        min_distance > 0.0 && min_distance < cell_radius,
        "need 0 < min_distance < cell_radius"
    );
    (0..count)
        .map(|id| {
            let azimuth = rng.random_range(-FRAC_PI_3..FRAC_PI_3);
            let u: f64 = rng.random();
            let d2 = min_distance * min_distance
                + u * (cell_radius * cell_radius - min_distance * min_distance);
            let distance = d2.sqrt();
            ClusterGeometry {
                id,
                azimuth,
                spread: (ring_radius / distance).atan(),
                distance,
                ring_radius,
            }
        })
        .collect()
}

/// Parse the cluster geometry table used by the CLI: one row per cluster,
/// `id,theta_deg,distance_m,ring_radius_m`, angle in degrees. An optional
/// header row (first field `id`) is skipped.
pub fn parse_geometry_csv(text: &str) -> Result<Vec<ClusterGeometry>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if idx == 0 && fields.first() == Some(&"id") {
            continue;
        }
        let lineno = idx + 1;
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 4 comma-separated fields, found {}", fields.len()),
            });
        }
        let id: usize = fields[0].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad cluster id `{}`", fields[0]),
        })?;
        let num = |name: &str, text: &str| -> Result<f64> {
            text.parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad {name} `{text}`"),
            })
        };
        let theta_deg = num("theta_deg", fields[1])?;
        let distance = num("distance_m", fields[2])?;
        let ring_radius = num("ring_radius_m", fields[3])?;
        let geom = ClusterGeometry::from_ring(id, theta_deg.to_radians(), distance, ring_radius)
            .map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
        out.push(geom);
    }
    Ok(out)
}
