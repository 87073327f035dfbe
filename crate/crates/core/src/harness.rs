//! Seeded Monte Carlo sweeps over SNR.
//!
//! Every trial draws one channel from its own stream, seeded by
//! `derive_seed(master_seed, trial_index)`, and evaluates every configured
//! method on that channel at every SNR point. Trials run in parallel; results
//! are reduced in trial order, so the output does not depend on the number of
//! workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{assemble_channel, sample_paths, svd_partition, ArrayGeometry, ChannelRealization, PathSet, Ray};
use crate::error::{Error, Result};
use crate::metrics::{log2_det_gram, SnrPoint};
use crate::precoding::{
    baseband_zf, build_codebook, ideal_hybrid_omp, normalize_power, optimal_precoder, select_dft_columns, Method,
    Precoder, RankPolicy, SteeringCodebook, MAX_CODEBOOK_BITS,
};
use crate::rfpn::{assemble_network, dft_network, fit_phases_to_target, NetworkLosses, PhaseResolution, RfpnVariant};

/// Insertion losses in dB, as written in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossesDb {
    #[serde(default)]
    pub divider: f64,
    #[serde(default)]
    pub phase_shifter: f64,
    #[serde(default)]
    pub combiner: f64,
}

impl LossesDb {
    pub fn to_linear(&self) -> Result<NetworkLosses> {
        NetworkLosses::from_db(self.divider, self.phase_shifter, self.combiner)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub nt: usize,
    pub nr: usize,
    pub ntrx: usize,
    pub ns: usize,
    pub l_paths: usize,
    pub angular_spread_deg: f64,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub methods: Vec<Method>,
    pub losses_db: LossesDb,
    /// Phase-shifter resolution of the realized networks; `None` is unlimited.
    pub phase_bits: Option<u32>,
    pub codebook_bits: u32,
    pub tx_geometry: ArrayGeometry,
    pub rx_geometry: ArrayGeometry,
    /// Allow `ns` up to `min(nt, nr)` even when it exceeds `ntrx`; the
    /// zero-forcing stage then uses a truncated pseudo-inverse.
    pub literal_streams: bool,
    /// Snap departure angles onto the steering codebook grid.
    pub on_grid_departures: bool,
}

pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_SEED: u64 = 0x5eed_2017;

pub fn default_snr_grid() -> Vec<f64> {
    (0..=12).map(|k| -10.0 + 5.0 * k as f64).collect()
}

impl SimConfig {
    /// Defaults: Ns = min(Ntrx, Nr), ten rays with 10° spread, 6-bit
    /// codebook and phase shifters, planar transmit and linear receive arrays.
    pub fn new(nt: usize, nr: usize, ntrx: usize) -> Self {
        Self {
            nt,
            nr,
            ntrx,
            ns: ntrx.min(nr),
            l_paths: 10,
            angular_spread_deg: 10.0,
            snr_grid_db: default_snr_grid(),
            trials: DEFAULT_TRIALS,
            master_seed: DEFAULT_SEED,
            methods: Method::ALL.to_vec(),
            losses_db: LossesDb::default(),
            phase_bits: Some(6),
            codebook_bits: 6,
            tx_geometry: ArrayGeometry::square_upa(nt),
            rx_geometry: ArrayGeometry::ula(nr),
            literal_streams: false,
            on_grid_departures: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |field: &'static str, message: String| Err(Error::Config { field, message });
        if self.nt == 0 {
            return fail("nt", "must be positive".into());
        }
        if self.nr == 0 {
            return fail("nr", "must be positive".into());
        }
        if self.ntrx == 0 || self.ntrx > self.nt {
            return fail("ntrx", format!("must be in 1..={} (nt), got {}", self.nt, self.ntrx));
        }
        let ns_cap = if self.literal_streams { self.nt.min(self.nr) } else { self.ntrx.min(self.nr) };
        if self.ns == 0 || self.ns > ns_cap {
            return fail("ns", format!("must be in 1..={ns_cap}, got {}", self.ns));
        }
        if self.l_paths == 0 {
            return fail("l_paths", "must be at least 1".into());
        }
        if !(self.angular_spread_deg.is_finite() && self.angular_spread_deg >= 0.0) {
            return fail("angular_spread_deg", format!("must be >= 0, got {}", self.angular_spread_deg));
        }
        if self.snr_grid_db.is_empty() {
            return fail("snr_grid_db", "must not be empty".into());
        }
        if self.snr_grid_db.iter().any(|x| !x.is_finite()) || self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return fail("snr_grid_db", "must be finite and strictly increasing".into());
        }
        if self.trials == 0 {
            return fail("trials", "must be at least 1".into());
        }
        if self.methods.is_empty() {
            return fail("methods", "must list at least one method".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return fail("methods", format!("'{m}' listed twice"));
            }
        }
        if self.methods.contains(&Method::RealisticSubarray) && !self.nt.is_multiple_of(self.ntrx) {
            return fail("methods", format!("realistic-subarray needs ntrx | nt, got nt={}, ntrx={}", self.nt, self.ntrx));
        }
        if let Err(e) = self.losses_db.to_linear() {
            return fail("losses_db", e.to_string());
        }
        if let Some(b) = self.phase_bits {
            if b == 0 || b > 52 {
                return fail("phase_bits", format!("must be in 1..=52 or null, got {b}"));
            }
        }
        if self.codebook_bits == 0 || self.codebook_bits > MAX_CODEBOOK_BITS {
            return fail("codebook_bits", format!("must be in 1..={MAX_CODEBOOK_BITS}, got {}", self.codebook_bits));
        }
        let per_axis = 1u128 << self.codebook_bits;
        let atoms = match self.tx_geometry.kind {
            crate::channel::ArrayKind::UniformLinear => per_axis,
            crate::channel::ArrayKind::UniformPlanar => per_axis * per_axis,
        };
        if atoms * self.nt as u128 > 1 << 26 {
            return fail("codebook_bits", format!("codebook of {atoms} atoms over {} antennas is too large", self.nt));
        }
        if atoms < self.ntrx as u128 {
            return fail("codebook_bits", format!("codebook has {atoms} atoms, fewer than ntrx = {}", self.ntrx));
        }
        if let Err(e) = self.tx_geometry.validate() {
            return fail("tx_geometry", e.to_string());
        }
        if self.tx_geometry.antenna_count() != self.nt {
            return fail("tx_geometry", format!("has {} antennas, nt is {}", self.tx_geometry.antenna_count(), self.nt));
        }
        if let Err(e) = self.rx_geometry.validate() {
            return fail("rx_geometry", e.to_string());
        }
        if self.rx_geometry.antenna_count() != self.nr {
            return fail("rx_geometry", format!("has {} antennas, nr is {}", self.rx_geometry.antenna_count(), self.nr));
        }
        Ok(())
    }

    fn needs_codebook(&self) -> bool {
        self.on_grid_departures
            || self.methods.iter().any(|m| {
                matches!(m, Method::IdealHybrid | Method::RealisticFullyConnected | Method::RealisticSubarray)
            })
    }
}

/// Per-trial stream seed: an odd-stride counter pushed through the
/// splitmix64 finalizer, so distinct indices never collide.
pub fn derive_seed(master_seed: u64, trial_index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(trial_index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Rates of one method in one trial, or why it could not be evaluated.
#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub method: Method,
    pub rates: std::result::Result<Vec<f64>, Error>,
}

#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub index: usize,
    pub outcomes: Vec<MethodOutcome>,
}

impl TrialRecord {
    pub fn rates(&self, method: Method) -> Option<&[f64]> {
        self.outcomes.iter().find(|o| o.method == method).and_then(|o| o.rates.as_deref().ok())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub snr_db: f64,
    /// `None` when every trial failed for this method.
    pub mean_rate: Option<f64>,
    pub std_rate: Option<f64>,
    pub trials: usize,
    pub failed_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub method: Method,
    pub all_failed: bool,
    pub points: Vec<RatePoint>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub curves: Vec<RateCurve>,
    pub trials: Vec<TrialRecord>,
}

/// A validated configuration with its shared, read-only precomputations.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: SimConfig,
    codebook: Option<SteeringCodebook>,
    snrs: Vec<SnrPoint>,
    losses: NetworkLosses,
}

impl Simulator {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let codebook = if config.needs_codebook() {
            Some(build_codebook(&config.tx_geometry, config.codebook_bits)?)
        } else {
            None
        };
        let snrs = config.snr_grid_db.iter().map(|&db| SnrPoint::from_db(db, config.ns)).collect::<Result<_>>()?;
        let losses = config.losses_db.to_linear()?;
        Ok(Self { config, codebook, snrs, losses })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Channel for a trial; depends only on the seed and the channel parameters.
    pub fn draw_channel(&self, trial_index: usize) -> Result<ChannelRealization> {
        let cfg = &self.config;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, trial_index as u64));
        let mut paths = sample_paths(cfg.l_paths, cfg.angular_spread_deg.to_radians(), &mut rng)?;
        if cfg.on_grid_departures {
            let cb = self.codebook.as_ref().expect("codebook built for on-grid departures");
            let snapped: Vec<Ray> = paths
                .paths
                .iter()
                .map(|r| {
                    let (az, el) = cb.snap_to_grid(r.aod_azimuth, r.aod_elevation);
                    Ray { aod_azimuth: az, aod_elevation: el, ..*r }
                })
                .collect();
            paths = PathSet::new(snapped)?;
        }
        assemble_channel(paths, &cfg.tx_geometry, &cfg.rx_geometry)
    }

    pub fn run_trial(&self, trial_index: usize) -> Result<TrialRecord> {
        let cfg = &self.config;
        let channel = self.draw_channel(trial_index)?;
        let h = &channel.h_downlink;
        let svd = svd_partition(&channel, cfg.ns)?;
        let policy = if cfg.literal_streams { RankPolicy::AllowDeficient } else { RankPolicy::Strict };
        let resolution = PhaseResolution::from_bits(cfg.phase_bits);

        let omp = self
            .codebook
            .as_ref()
            .filter(|_| cfg.methods.iter().any(|m| *m != Method::OptimalSvd && *m != Method::DftNetwork))
            .map(|cb| ideal_hybrid_omp(&svd, cb, cfg.ntrx));

        let realized = |variant: RfpnVariant, label: Method| -> Result<Precoder> {
            let target = match &omp {
                Some(Ok(p)) => &p.f_rf,
                Some(Err(e)) => return Err(e.clone()),
                None => unreachable!("ideal hybrid design runs whenever a realized network is requested"),
            };
            let phases = fit_phases_to_target(target, &variant, resolution)?;
            let net = assemble_network(&variant, &phases, cfg.nt, cfg.ntrx, &self.losses)?;
            self.zero_forced(h, net.f_net, label, policy)
        };

        let outcomes = cfg
            .methods
            .iter()
            .map(|&method| {
                let precoder = match method {
                    Method::OptimalSvd => optimal_precoder(&svd),
                    Method::IdealHybrid => omp.clone().expect("ideal hybrid design computed"),
                    Method::RealisticFullyConnected => realized(RfpnVariant::FullyConnected, method),
                    Method::RealisticSubarray => realized(RfpnVariant::SubArray, method),
                    Method::DftNetwork => select_dft_columns(&svd.v1, cfg.ntrx)
                        .and_then(|cols| dft_network(cfg.nt, cfg.ntrx, &cols))
                        .and_then(|net| self.zero_forced(h, net.f_net, method, policy)),
                };
                MethodOutcome { method, rates: precoder.map(|p| self.rates(h, &p)) }
            })
            .collect();
        Ok(TrialRecord { index: trial_index, outcomes })
    }

    fn zero_forced(&self, h: &nalgebra::DMatrix<crate::linalg::C64>, f_net: crate::linalg::CMatrix, label: Method, policy: RankPolicy) -> Result<Precoder> {
        let h_eff = h * &f_net;
        let f_bb = baseband_zf(&h_eff, self.config.ns, policy)?;
        normalize_power(Precoder::new(f_net, f_bb, label)?, self.config.ns)
    }

    fn rates(&self, h: &crate::linalg::CMatrix, precoder: &Precoder) -> Vec<f64> {
        let g = h * precoder.combined();
        self.snrs.iter().map(|snr| log2_det_gram(&g, snr.gamma_s()).max(0.0)).collect()
    }

    /// Runs every trial on `workers` threads (`None`: rayon's default pool).
    pub fn run_sweep(&self, workers: Option<usize>) -> Result<SweepResult> {
        let job = || (0..self.config.trials).into_par_iter().map(|i| self.run_trial(i)).collect::<Result<Vec<_>>>();
        let trials = match workers {
            None => job()?,
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?
                .install(job)?,
        };
        let curves = self.config.methods.iter().map(|&m| self.aggregate(m, &trials)).collect();
        Ok(SweepResult { curves, trials })
    }

    fn aggregate(&self, method: Method, trials: &[TrialRecord]) -> RateCurve {
        let per_trial: Vec<Option<&[f64]>> = trials.iter().map(|t| t.rates(method)).collect();
        let ok: Vec<&[f64]> = per_trial.iter().flatten().copied().collect();
        let failed = trials.len() - ok.len();
        let points = self
            .config
            .snr_grid_db
            .iter()
            .enumerate()
            .map(|(k, &snr_db)| {
                let (mean, std) = mean_std(ok.iter().map(|r| r[k]));
                RatePoint { snr_db, mean_rate: mean, std_rate: std, trials: ok.len(), failed_trials: failed }
            })
            .collect();
        RateCurve { method, all_failed: ok.is_empty(), points }
    }
}

/// Mean and sample standard deviation, summed in iteration order.
fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (Option<f64>, Option<f64>) {
    let n = values.clone().count();
    if n == 0 {
        return (None, None);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(std))
}

pub fn run_trial(config: &SimConfig, trial_index: usize) -> Result<TrialRecord> {
    Simulator::new(config.clone())?.run_trial(trial_index)
}

pub fn run_sweep(config: &SimConfig, workers: Option<usize>) -> Result<Vec<RateCurve>> {
    Ok(Simulator::new(config.clone())?.run_sweep(workers)?.curves)
}
