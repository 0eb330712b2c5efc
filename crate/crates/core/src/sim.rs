//! Code-capacity Monte Carlo: i.i.d. bit flips, perfect syndromes, adaptive
//! stopping at a target number of logical failures.
//!
//! Trial `t` of point `i` draws its error from a generator seeded by
//! `hash(seed, i, t)`, and the stopping rule truncates at exactly the
//! `min_failures`-th failure in trial order. Estimates therefore depend only
//! on the configuration, never on the number of worker threads.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concat::{ConcatCode, ConcatError, PerfectSyndromes, Profile};
use crate::decoder::{decode_into, DecodeError, DecodeSession, DecoderKind, NoObserver};
use crate::gf2::BitVector;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Concat(#[from] ConcatError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

fn default_min_failures() -> u64 {
    300
}

fn default_max_trials() -> u64 {
    1_000_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub profile: Profile,
    pub decoder: DecoderKind,
    pub p: Vec<f64>,
    #[serde(default = "default_min_failures")]
    pub min_failures: u64,
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
    pub seed: u64,
    /// Per-point wall-clock limit in seconds. Hitting it ends the point
    /// early with a low-confidence flag, and makes the result depend on
    /// machine speed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_wall_s: Option<f64>,
}

impl SweepConfig {
    pub fn new(profile: Profile, decoder: DecoderKind, p: Vec<f64>, seed: u64) -> Self {
        Self {
            profile,
            decoder,
            p,
            min_failures: default_min_failures(),
            max_trials: default_max_trials(),
            seed,
            max_wall_s: None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if let Some(p) = self.p.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(SimError::Config(format!("p = {p} is not in (0, 1)")));
        }
        if self.min_failures == 0 {
            return Err(SimError::Config("min_failures must be at least 1".into()));
        }
        if self.max_trials == 0 {
            return Err(SimError::Config("max_trials must be at least 1".into()));
        }
        if matches!(self.max_wall_s, Some(w) if w.is_nan() || w <= 0.0) {
            return Err(SimError::Config("max_wall_s must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub p: f64,
    pub trials: u64,
    pub failures: u64,
    pub p_l: f64,
    pub stderr: f64,
    pub wall_s: f64,
    /// Stopped before reaching `min_failures`.
    #[serde(default)]
    pub low_confidence: bool,
}

impl PointEstimate {
    pub fn from_counts(p: f64, trials: u64, failures: u64) -> Self {
        let p_l = if trials == 0 {
            0.0
        } else {
            failures as f64 / trials as f64
        };
        let stderr = if trials == 0 {
            0.0
        } else {
            (p_l * (1.0 - p_l) / trials as f64).sqrt()
        };
        Self {
            p,
            trials,
            failures,
            p_l,
            stderr,
            wall_s: 0.0,
            low_confidence: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub config: SweepConfig,
    pub version: String,
    pub points: Vec<PointEstimate>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of trial `trial` at point `point`.
pub fn trial_seed(master: u64, point: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ point) ^ trial)
}

pub fn trial_rng(master: u64, point: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, point, trial))
}

/// Each of `n` bits set independently with probability `p`, drawn by
/// geometric skipping so the cost scales with the number of flips.
pub fn sample_error<R: Rng + ?Sized>(p: f64, n: usize, rng: &mut R) -> BitVector {
    if p <= 0.0 {
        return BitVector::zeros(n);
    }
    if p >= 1.0 {
        return BitVector::ones(n);
    }
    let mut e = BitVector::zeros(n);
    let log_q = (-p).ln_1p();
    let mut i = 0usize;
    loop {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_q).floor();
        if !skip.is_finite() || skip >= (n - i) as f64 {
            break;
        }
        i += skip as usize;
        e.set(i, true);
        i += 1;
        if i >= n {
            break;
        }
    }
    e
}

const FIRST_BATCH: u64 = 64;
const MAX_BATCH: u64 = 8192;

/// Runs one point with an arbitrary trial function (`true` = failure).
///
/// Trials run in batches of growing size; within a batch trials execute in
/// parallel on the current rayon pool, and the batch is then scanned in
/// trial order so the count stops exactly at the `min_failures`-th failure.
pub fn run_point_with<S, I, F>(
    config: &SweepConfig,
    point_index: usize,
    p: f64,
    init: I,
    trial: F,
) -> PointEstimate
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut ChaCha8Rng) -> bool + Sync + Send,
{
    let start = Instant::now();
    let mut trials = 0u64;
    let mut failures = 0u64;
    let mut batch = FIRST_BATCH;
    while failures < config.min_failures && trials < config.max_trials {
        let mut size = batch;
        if failures > 0 {
            // Do not run far past the expected stopping trial.
            let needed = (config.min_failures - failures) as f64 * trials as f64 / failures as f64;
            size = size.min((needed * 1.1).ceil() as u64).max(FIRST_BATCH);
        }
        let size = size.min(config.max_trials - trials);
        let outcomes: Vec<bool> = (trials..trials + size)
            .into_par_iter()
            .map_init(&init, |state, t| {
                let mut rng = trial_rng(config.seed, point_index as u64, t);
                trial(state, &mut rng)
            })
            .collect();
        for fail in outcomes {
            trials += 1;
            if fail {
                failures += 1;
                if failures == config.min_failures {
                    break;
                }
            }
        }
        batch = (batch * 2).min(MAX_BATCH);
        if let Some(limit) = config.max_wall_s {
            if start.elapsed().as_secs_f64() > limit {
                break;
            }
        }
    }
    let mut est = PointEstimate::from_counts(p, trials, failures);
    est.wall_s = start.elapsed().as_secs_f64();
    est.low_confidence = failures < config.min_failures;
    est
}

/// Per-worker state for decoding trials.
pub struct Worker<'a> {
    code: &'a ConcatCode,
    session: DecodeSession,
}

impl<'a> Worker<'a> {
    pub fn new(code: &'a ConcatCode) -> Self {
        Self {
            code,
            session: DecodeSession::new(code),
        }
    }

    /// Samples an error, decodes it and reports whether decoding failed.
    pub fn trial(&mut self, kind: DecoderKind, p: f64, rng: &mut ChaCha8Rng) -> bool {
        let e = sample_error(p, self.code.num_qubits(), rng);
        if e.is_zero() {
            return false;
        }
        let source = PerfectSyndromes::new(self.code, &e).expect("error has code length");
        decode_into(kind, self.code, &source, &mut self.session, &mut NoObserver)
            .expect("perfect syndromes are consistent");
        self.code.is_failure(&e, &self.session)
    }
}

pub fn run_point(config: &SweepConfig, code: &ConcatCode, point_index: usize) -> PointEstimate {
    let p = config.p[point_index];
    let kind = config.decoder;
    run_point_with(
        config,
        point_index,
        p,
        || Worker::new(code),
        |w, rng| w.trial(kind, p, rng),
    )
}

/// Runs every point of `config` on a pool of `jobs` threads (all cores if
/// `None`). `progress` is called after each point.
pub fn run_sweep(
    config: &SweepConfig,
    jobs: Option<usize>,
    mut progress: impl FnMut(&PointEstimate),
) -> Result<SweepRecord, SimError> {
    config.validate()?;
    let code = ConcatCode::new(config.profile.clone())?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| SimError::Pool(e.to_string()))?;
    let mut points = Vec::with_capacity(config.p.len());
    for i in 0..config.p.len() {
        let est = pool.install(|| run_point(config, &code, i));
        progress(&est);
        points.push(est);
    }
    Ok(SweepRecord {
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        points,
    })
}
