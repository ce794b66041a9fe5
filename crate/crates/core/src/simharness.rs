//! Seeded Monte-Carlo experiment driver and CSV reports.
//!
//! A trial places random clusters, maps them to support sets, builds the
//! overlap graph, solves the pattern assignment with the configured scheme,
//! and pushes the result through the two-layer precoder to collect sum-rate,
//! objective value, outage and timing. Everything except wall-clock timing is
//! a pure function of `(seed, G, scheme, trial index)`.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::asrgraph::build_graph;
use crate::channel::{
    eigen_spectrum, place_clusters, sample_channel, support_set, SupportSet, SystemConfig,
};
use crate::coloring::{
    ewvc_pd, esa_oracle, greedy_baseline, objective_f, random_assignment, DEFAULT_ORACLE_CAP,
};
use crate::precoding::{
    cluster_rate, effective_channel, feasibility, prebeamformer, zf_precoder,
};
use crate::textfmt::sig9;
use crate::{Error, Result};

/// Pattern-assignment scheme run inside a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    EwvcPd,
    Greedy,
    Random,
    Esa,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::EwvcPd, Scheme::Greedy, Scheme::Random, Scheme::Esa];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::EwvcPd => "ewvc_pd",
            Scheme::Greedy => "greedy",
            Scheme::Random => "random",
            Scheme::Esa => "esa",
        }
    }

    /// Stable identifier folded into per-trial RNG streams.
    pub fn id(self) -> u64 {
        match self {
            Scheme::EwvcPd => 0,
            Scheme::Greedy => 1,
            Scheme::Random => 2,
            Scheme::Esa => 3,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown scheme `{s}`")))
    }
}

/// What counts as an outage trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum OutagePolicy {
    /// Some cluster's effective dimension fell below its user count (or its
    /// effective channel was numerically singular).
    Structural,
    /// Some served cluster's rate fell below the threshold in bits/s/Hz.
    RateThreshold(f64),
}

/// Full experiment description; the JSON schema mirrors these fields and
/// every omitted field falls back to the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    /// Cluster counts to sweep.
    #[serde(rename = "Gvalues")]
    pub cluster_counts: Vec<usize>,
    pub schemes: Vec<Scheme>,
    /// Monte-Carlo repetitions per (scheme, G) point.
    pub trials: usize,
    #[serde(rename = "cellRadius")]
    pub cell_radius: f64,
    #[serde(rename = "ringRadius")]
    pub ring_radius: f64,
    #[serde(rename = "minDistance")]
    pub min_distance: f64,
    #[serde(rename = "outagePolicy")]
    pub outage_policy: OutagePolicy,
    #[serde(rename = "outputPath")]
    pub output_path: PathBuf,
    /// Optional per-trial CSV destination.
    #[serde(rename = "perTrialPath")]
    pub per_trial_path: Option<PathBuf>,
    /// Vertex ceiling for the exhaustive scheme.
    #[serde(rename = "oracleCap")]
    pub oracle_cap: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            cluster_counts: vec![2, 4, 8, 16, 24, 32, 40],
            schemes: vec![Scheme::EwvcPd],
            trials: 100,
            cell_radius: 600.0,
            ring_radius: 30.0,
            min_distance: 30.0,
            outage_policy: OutagePolicy::Structural,
            output_path: PathBuf::from("report.csv"),
            per_trial_path: None,
            oracle_cap: DEFAULT_ORACLE_CAP,
        }
    }
}

impl ExperimentConfig {
    /// Deserialize without validating; callers may still adjust fields.
    pub fn parse_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line().max(1),
            msg: e.to_string(),
        })
    }

    /// Every violated field, one message each; empty when the config is
    /// runnable.
    pub fn violations(&self) -> Vec<String> {
        let mut v = self.system.violations();
        if self.cluster_counts.is_empty() {
            v.push("Gvalues: must list at least one cluster count".to_string());
        }
        if self.cluster_counts.iter().any(|&g| g < 1) {
            v.push("Gvalues: cluster counts must be at least 1".to_string());
        }
        if self.schemes.is_empty() {
            v.push("schemes: must list at least one scheme".to_string());
        }
        if self.trials < 1 {
            v.push("trials: must be at least 1".to_string());
        }
        if !(self.min_distance > 0.0 && self.min_distance < self.cell_radius) {
            v.push("minDistance: need 0 < minDistance < cellRadius".to_string());
        }
        if !(self.ring_radius > 0.0) {
            v.push("ringRadius: must be positive".to_string());
        }
        if self.oracle_cap < 1 {
            v.push("oracleCap: must be at least 1".to_string());
        }
        if let OutagePolicy::RateThreshold(th) = self.outage_policy {
            if !(th >= 0.0) {
                v.push("outagePolicy: rate threshold must be non-negative".to_string());
            }
        }
        if self.schemes.contains(&Scheme::Esa) {
            if let Some(&max_g) = self.cluster_counts.iter().max() {
                if max_g > self.oracle_cap {
                    v.push(format!(
                        "schemes: esa requires max(Gvalues) <= oracleCap ({max_g} > {})",
                        self.oracle_cap
                    ));
                }
            }
        }
        if self.schemes.contains(&Scheme::EwvcPd) && self.system.patterns < 2 {
            v.push("P: ewvc_pd needs at least two patterns once overlap edges exist".to_string());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(violations))
        }
    }
}

/// Everything measured in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    pub scheme: Scheme,
    pub antennas: usize,
    pub cluster_count: usize,
    pub patterns: usize,
    pub trial: usize,
    pub sum_rate: f64,
    pub f_value: f64,
    pub patterns_used: usize,
    pub outage: bool,
    pub solve_nanos: u64,
    pub phase2_bypassed: bool,
    /// Graph construction time, kept separate from the solver timing.
    pub graph_build_nanos: u64,
}

/// Aggregates for one (scheme, G) sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub scheme: Scheme,
    pub antennas: usize,
    pub cluster_count: usize,
    pub patterns: usize,
    pub trials: usize,
    pub mean_sum_rate: f64,
    pub outage_probability: f64,
    pub mean_f: f64,
    pub mean_patterns_used: f64,
    pub mean_solve_nanos: f64,
    pub bypass_fraction: f64,
    pub mean_graph_build_nanos: f64,
}

/// Aggregated experiment output plus the config echo.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub points: Vec<PointSummary>,
    pub trials: Vec<TrialMetrics>,
}

/// Per-trial RNG stream. A SplitMix64 finalizer folds the stream coordinates
/// `(seed, G, scheme id, trial)` in that order and then expands the walk into
/// a 256-bit ChaCha key, so any trial is reproducible in isolation and
/// concurrent execution cannot reorder draws.
pub fn trial_rng(seed: u64, cluster_count: u64, scheme_id: u64, trial: u64) -> ChaCha12Rng {
    const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut state = seed;
    for coord in [cluster_count, scheme_id, trial] {
        state = mix(state.wrapping_add(GOLDEN).wrapping_add(coord));
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN);
        chunk.copy_from_slice(&mix(state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Run one seeded trial of the full pipeline.
pub fn run_trial(
    config: &ExperimentConfig,
    cluster_count: usize,
    scheme: Scheme,
    trial: usize,
) -> Result<TrialMetrics> {
    let sys = &config.system;
    let mut rng = trial_rng(sys.seed, cluster_count as u64, scheme.id(), trial as u64);

    let geometries = place_clusters(
        cluster_count,
        config.cell_radius,
        config.ring_radius,
        config.min_distance,
        &mut rng,
    );
    let supports: Vec<SupportSet> = geometries
        .iter()
        .map(|g| support_set(g, sys.antennas, sys.spacing))
        .collect();

    let build_start = Instant::now();
    let graph = build_graph(&supports, sys.epsilon, sys.weight_min);
    let graph_build_nanos = build_start.elapsed().as_nanos() as u64;

    // The solver is timed in isolation, single-threaded.
    let (assignment, solve_nanos, phase2_bypassed) = match scheme {
        Scheme::EwvcPd => {
            let (assignment, trace) = ewvc_pd(&graph, sys.patterns);
            (assignment, trace.elapsed.as_nanos() as u64, trace.phase2_bypassed)
        }
        Scheme::Greedy => {
            let solve_start = Instant::now();
            let assignment = greedy_baseline(&graph, sys.patterns);
            (assignment, solve_start.elapsed().as_nanos() as u64, false)
        }
        Scheme::Random => {
            let solve_start = Instant::now();
            let assignment = random_assignment(&graph, sys.patterns, &mut rng);
            (assignment, solve_start.elapsed().as_nanos() as u64, false)
        }
        Scheme::Esa => {
            let solve_start = Instant::now();
            let (assignment, _) = esa_oracle(&graph, sys.patterns, config.oracle_cap)?;
            (assignment, solve_start.elapsed().as_nanos() as u64, false)
        }
    };

    let f_value = objective_f(&graph, &assignment)?;
    let total_users = cluster_count * sys.users_per_cluster;

    let mut structural_failure = false;
    let mut served_rates = Vec::with_capacity(cluster_count);
    let mut sum_rate = 0.0;
    for cluster in 0..cluster_count {
        let pre = prebeamformer(&supports, &assignment, cluster);
        if !feasibility(&pre, sys.users_per_cluster) {
            // served with rate 0; no partial service
            structural_failure = true;
            continue;
        }
        let spectrum = eigen_spectrum(&geometries[cluster], &supports[cluster], sys.spacing)?;
        let channel = sample_channel(&spectrum, sys.users_per_cluster, &mut rng);
        let effective = effective_channel(&channel, &pre)?;
        match zf_precoder(
            &effective,
            sys.symbols_per_cluster,
            sys.power / total_users as f64,
        ) {
            Ok(precoder) => {
                let rate =
                    cluster_rate(&effective, &precoder, sys.power, total_users, sys.noise_var);
                served_rates.push(rate);
                sum_rate += rate;
            }
            Err(Error::RankDeficient) => structural_failure = true,
            Err(e) => return Err(e),
        }
    }

    let outage = match config.outage_policy {
        OutagePolicy::Structural => structural_failure,
        OutagePolicy::RateThreshold(th) => served_rates.iter().any(|&r| r < th),
    };

    Ok(TrialMetrics {
        scheme,
        antennas: sys.antennas,
        cluster_count,
        patterns: sys.patterns,
        trial,
        sum_rate,
        f_value,
        patterns_used: assignment.patterns_used(),
        outage,
        solve_nanos,
        phase2_bypassed,
        graph_build_nanos,
    })
}

/// Run every (scheme, G) point for `trials` repetitions and aggregate.
/// Points are ordered by scheme id, then by ascending cluster count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;

    let mut schemes = config.schemes.clone();
    schemes.sort_by_key(|s| s.id());
    schemes.dedup();
    let mut cluster_counts = config.cluster_counts.clone();
    cluster_counts.sort_unstable();
    cluster_counts.dedup();

    let mut points = Vec::new();
    let mut all_trials = Vec::new();
    for &scheme in &schemes {
        for &g in &cluster_counts {
            let mut sum_rate = 0.0;
            let mut outages = 0usize;
            let mut f_total = 0.0;
            let mut patterns_used = 0usize;
            let mut solve_nanos = 0u128;
            let mut bypassed = 0usize;
            let mut build_nanos = 0u128;
            for trial in 0..config.trials {
                let metrics = run_trial(config, g, scheme, trial)?;
                sum_rate += metrics.sum_rate;
                outages += metrics.outage as usize;
                f_total += metrics.f_value;
                patterns_used += metrics.patterns_used;
                solve_nanos += u128::from(metrics.solve_nanos);
                bypassed += metrics.phase2_bypassed as usize;
                build_nanos += u128::from(metrics.graph_build_nanos);
                all_trials.push(metrics);
            }
            let n = config.trials as f64;
            points.push(PointSummary {
                scheme,
                antennas: config.system.antennas,
                cluster_count: g,
                patterns: config.system.patterns,
                trials: config.trials,
                mean_sum_rate: sum_rate / n,
                outage_probability: outages as f64 / n,
                mean_f: f_total / n,
                mean_patterns_used: patterns_used as f64 / n,
                mean_solve_nanos: solve_nanos as f64 / n,
                bypass_fraction: bypassed as f64 / n,
                mean_graph_build_nanos: build_nanos as f64 / n,
            });
        }
    }
    Ok(ExperimentReport { config: config.clone(), points, trials: all_trials })
}

/// Aggregate report CSV. All columns except `mean_solve_ns` are pure
/// functions of the config and seed.
pub fn report_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(
        "scheme,M,G,P,trials,mean_sum_rate,outage_prob,mean_f,mean_patterns_used,mean_solve_ns,bypass_frac,seed\n",
    );
    for p in &report.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            p.scheme,
            p.antennas,
            p.cluster_count,
            p.patterns,
            p.trials,
            sig9(p.mean_sum_rate),
            sig9(p.outage_probability),
            sig9(p.mean_f),
            sig9(p.mean_patterns_used),
            sig9(p.mean_solve_nanos),
            sig9(p.bypass_fraction),
            report.config.system.seed,
        );
    }
    out
}

/// Per-trial CSV with one row per executed trial.
pub fn per_trial_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(
        "scheme,M,G,P,trial,sum_rate,f_value,patterns_used,outage,solve_ns,phase2_bypassed\n",
    );
    for t in &report.trials {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            t.scheme,
            t.antennas,
            t.cluster_count,
            t.patterns,
            t.trial,
            sig9(t.sum_rate),
            sig9(t.f_value),
            t.patterns_used,
            t.outage,
            t.solve_nanos,
            t.phase2_bypassed,
        );
    }
    out
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Write the aggregate CSV to `path`.
pub fn write_report(report: &ExperimentReport, path: &Path) -> Result<()> {
    write_file(path, &report_csv(report))
}

/// Write the per-trial CSV to `path`.
pub fn write_per_trial(report: &ExperimentReport, path: &Path) -> Result<()> {
    write_file(path, &per_trial_csv(report))
}
