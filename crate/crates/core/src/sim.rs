//! Euler–Maruyama ensemble for the threshold Langevin dynamics
//! `dm = -A(m) dt + sqrt(2 B(m)) dW` with reflection at `m_init`.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::kv::{fmt_num, KvMap};
use crate::model::{micro_from_effective, MicroParams};

/// Time step as a fraction of the fastest relaxation time.
pub const DEFAULT_DT_FRACTION: f64 = 0.01;
/// `dt * max_rate` must stay below this.
pub const STABILITY_LIMIT: f64 = 0.1;
pub const DEFAULT_BURN_IN: u64 = 1_000_000;
pub const DEFAULT_SAMPLE_EVERY: u64 = 100;
pub const DEFAULT_TOTAL_SAMPLES: usize = 100_000;
pub const DEFAULT_WALKERS: usize = 1000;
pub const DEFAULT_BINS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    ReflectAtMinit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: MicroParams,
    pub n_walkers: usize,
    pub dt: f64,
    pub burn_in: u64,
    pub sample_every: u64,
    pub total_samples: usize,
    pub seed: u64,
    pub boundary: Boundary,
    /// Starting income of every walker.
    pub start: f64,
    pub bins: usize,
}

impl SimConfig {
    /// Defaults: `dt = 0.01 / max_rate`, walkers start at `m_init + B0/A0`.
    pub fn new(params: MicroParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let rate = params.max_rate();
        let start = if params.a0 > 0.0 {
            params.m_init + params.b0 / params.a0
        } else {
            params.m_init
        };
        let cfg = SimConfig {
            params,
            n_walkers: DEFAULT_WALKERS,
            dt: DEFAULT_DT_FRACTION / rate,
            burn_in: DEFAULT_BURN_IN,
            sample_every: DEFAULT_SAMPLE_EVERY,
            total_samples: DEFAULT_TOTAL_SAMPLES,
            seed,
            boundary: Boundary::ReflectAtMinit,
            start,
            bins: DEFAULT_BINS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let rate = self.params.max_rate();
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", self.dt, "time step must be positive"));
        }
        if !(self.dt * rate < STABILITY_LIMIT) {
            return Err(Error::Precondition(format!(
                "time step {:e} violates the stability bound dt < {:e} (0.1 / max rate {:e})",
                self.dt,
                STABILITY_LIMIT / rate,
                rate
            )));
        }
        if self.n_walkers == 0 {
            return Err(Error::invalid("n_walkers", 0.0, "need at least one walker"));
        }
        if self.sample_every == 0 {
            return Err(Error::invalid("sample_every", 0.0, "must be at least 1"));
        }
        if self.total_samples == 0 {
            return Err(Error::invalid("total_samples", 0.0, "must be at least 1"));
        }
        if self.bins == 0 {
            return Err(Error::invalid("bins", 0.0, "must be at least 1"));
        }
        if !(self.start.is_finite() && self.start >= self.params.m_init) {
            return Err(Error::invalid(
                "start",
                self.start,
                "must be finite and at least m_init",
            ));
        }
        Ok(())
    }

    /// Reads a configuration. Coefficients come either from the Langevin keys
    /// `A0 A0p a ap B0 b m1 m_init` (selected by the presence of `B0`) or from
    /// the effective parameter keys plus `gauge_b` (default 1).
    pub fn from_kv(kv: &KvMap) -> Result<Self> {
        let params = if kv.contains("B0") {
            let m_init = kv.parse_opt("m_init")?.unwrap_or(0.0);
            MicroParams {
                a0: kv.require("A0")?,
                a0p: match kv.parse_opt("A0p")? {
                    Some(v) => v,
                    None => kv.require("A0")?,
                },
                a: kv.require("a")?,
                ap: match kv.parse_opt("ap")? {
                    Some(v) => v,
                    None => kv.require("a")?,
                },
                b0: kv.require("B0")?,
                b: kv.require("b")?,
                m1: kv.parse_opt("m1")?.unwrap_or(f64::INFINITY),
                m_init,
            }
        } else {
            let e = crate::kv::effective_params(kv)?;
            micro_from_effective(&e, kv.parse_opt("gauge_b")?.unwrap_or(1.0))?
        };
        let seed = kv.require("seed")?;
        let mut c = SimConfig::new(params, seed)?;
        if let Some(v) = kv.parse_opt("dt")? {
            c.dt = v;
        }
        if let Some(v) = kv.parse_opt("n_walkers")? {
            c.n_walkers = v;
        }
        if let Some(v) = kv.parse_opt("burn_in")? {
            c.burn_in = v;
        }
        if let Some(v) = kv.parse_opt("sample_every")? {
            c.sample_every = v;
        }
        if let Some(v) = kv.parse_opt("total_samples")? {
            c.total_samples = v;
        }
        if let Some(v) = kv.parse_opt("start")? {
            c.start = v;
        }
        if let Some(v) = kv.parse_opt("bins")? {
            c.bins = v;
        }
        if let Some(b) = kv.get("boundary") {
            if b != "reflect" {
                return Err(Error::Parse(format!(
                    "unknown boundary `{b}`; only `reflect` is supported"
                )));
            }
        }
        c.validate()?;
        Ok(c)
    }

    /// Every field, in the format read by [`SimConfig::from_kv`].
    pub fn to_kv(&self) -> KvMap {
        let p = &self.params;
        let mut kv = KvMap::new();
        for (k, v) in [
            ("A0", p.a0),
            ("A0p", p.a0p),
            ("a", p.a),
            ("ap", p.ap),
            ("B0", p.b0),
            ("b", p.b),
            ("m1", p.m1),
            ("m_init", p.m_init),
            ("dt", self.dt),
            ("start", self.start),
        ] {
            kv.set(k, fmt_exact(v));
        }
        kv.set("n_walkers", self.n_walkers);
        kv.set("burn_in", self.burn_in);
        kv.set("sample_every", self.sample_every);
        kv.set("total_samples", self.total_samples);
        kv.set("seed", self.seed);
        kv.set("bins", self.bins);
        kv.set("boundary", "reflect");
        kv
    }
}

/// Shortest text that reads back to the same value.
fn fmt_exact(x: f64) -> String {
    if x.is_infinite() {
        fmt_num(x)
    } else {
        format!("{x:?}")
    }
}

/// One Euler–Maruyama update `m - A(m) dt + sqrt(2 B(m) dt) noise`, reflected
/// about `m_init`.
pub fn step(m: f64, p: &MicroParams, dt: f64, noise: f64) -> Result<f64> {
    if !(m >= p.m_init) {
        return Err(Error::OutOfDomain {
            m,
            m_init: p.m_init,
        });
    }
    let next = step_unchecked(m, p, dt, noise);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::Numeric(format!(
            "non-finite income after one step from {m:e} (noise {noise})"
        )))
    }
}

#[inline]
fn step_unchecked(m: f64, p: &MicroParams, dt: f64, noise: f64) -> f64 {
    let a = p.drift_unchecked(m);
    let b = p.diffusion_unchecked(m);
    let next = m - a * dt + (2.0 * b * dt).sqrt() * noise;
    p.m_init + (next - p.m_init).abs()
}

/// A walker that left the finite numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct AbortedWalker {
    pub walker: usize,
    pub step: u64,
    pub last_income: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    /// Recorded incomes, ordered by sampling round and then walker.
    pub samples: Vec<f64>,
    pub aborted: Vec<AbortedWalker>,
}

fn walker_rng(seed: u64, walker: usize, phase: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * walker as u64 + phase);
    rng
}

/// Runs the ensemble and returns the recorded incomes.
///
/// Each walker draws burn-in noise and sampling noise from two separate
/// streams, so runs that differ only in `burn_in` share their sampling noise.
pub fn run_samples(config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    let p = &config.params;
    let dt = config.dt;
    let w = config.n_walkers;
    let per_walker = config.total_samples.div_ceil(w);
    let mut recorded = vec![Vec::<f64>::with_capacity(per_walker); w];
    let mut aborted = Vec::new();

    'walkers: for (k, rec) in recorded.iter_mut().enumerate() {
        let mut m = config.start;
        let mut rng = walker_rng(config.seed, k, 0);
        for s in 0..config.burn_in {
            let z: f64 = StandardNormal.sample(&mut rng);
            let next = step_unchecked(m, p, dt, z);
            if !next.is_finite() {
                aborted.push(AbortedWalker {
                    walker: k,
                    step: s,
                    last_income: m,
                });
                continue 'walkers;
            }
            m = next;
        }
        let mut rng = walker_rng(config.seed, k, 1);
        for r in 0..per_walker {
            for s in 0..config.sample_every {
                let z: f64 = StandardNormal.sample(&mut rng);
                let next = step_unchecked(m, p, dt, z);
                if !next.is_finite() {
                    let step = config.burn_in + r as u64 * config.sample_every + s;
                    aborted.push(AbortedWalker {
                        walker: k,
                        step,
                        last_income: m,
                    });
                    continue 'walkers;
                }
                m = next;
            }
            rec.push(m);
        }
    }
    for a in &aborted {
        log::warn!(
            "walker {} aborted at step {} from income {:e}",
            a.walker,
            a.step,
            a.last_income
        );
    }
    let rounds = recorded.iter().map(Vec::len).max().unwrap_or(0);
    let mut samples = Vec::with_capacity(config.total_samples);
    'rounds: for r in 0..rounds {
        for rec in &recorded {
            if let Some(&v) = rec.get(r) {
                if samples.len() == config.total_samples {
                    break 'rounds;
                }
                samples.push(v);
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::Numeric("every walker aborted".into()));
    }
    Ok(SimOutput { samples, aborted })
}

/// Log-binned density estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// `count / (binned total * width)`, so the densities integrate to 1 over
    /// the binned range.
    pub densities: Vec<f64>,
    /// Samples outside the binned range (zero incomes cannot be log-binned).
    pub outside: u64,
}

impl StationaryHistogram {
    /// Bins span the smallest positive sample to the largest one.
    pub fn from_samples(samples: &[f64], bins: usize) -> Result<Self> {
        let lo = samples
            .iter()
            .copied()
            .filter(|&v| v > 0.0)
            .fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo.is_finite() && hi > lo) || bins == 0 {
            return Err(Error::Precondition(
                "histogram needs at least two distinct positive samples".into(),
            ));
        }
        let (llo, lhi) = (lo.ln(), hi.ln());
        let mut edges: Vec<f64> = (0..=bins)
            .map(|i| (llo + (lhi - llo) * i as f64 / bins as f64).exp())
            .collect();
        edges[0] = lo;
        edges[bins] = hi;
        Self::with_edges(samples, edges)
    }

    /// Bins on caller-supplied ascending edges.
    pub fn with_edges(samples: &[f64], edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Precondition(
                "histogram edges must be strictly ascending".into(),
            ));
        }
        let bins = edges.len() - 1;
        let (lo, hi) = (edges[0], edges[bins]);
        let mut counts = vec![0u64; bins];
        let mut outside = 0;
        for &v in samples {
            if !(v >= lo && v <= hi) {
                outside += 1;
                continue;
            }
            // the last bin is closed on the right
            let i = edges.partition_point(|&e| e <= v).clamp(1, bins) - 1;
            counts[i] += 1;
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Precondition(
                "no samples inside the histogram range".into(),
            ));
        }
        let densities = counts
            .iter()
            .zip(edges.windows(2))
            .map(|(&c, e)| c as f64 / (total as f64 * (e[1] - e[0])))
            .collect();
        Ok(StationaryHistogram {
            edges,
            counts,
            densities,
            outside,
        })
    }

    /// Monte Carlo standard error of each density assuming Poisson counts.
    pub fn standard_errors(&self) -> Vec<f64> {
        let total: u64 = self.counts.iter().sum();
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, e)| (c as f64).sqrt() / (total as f64 * (e[1] - e[0])))
            .collect()
    }

    /// `bin_low, bin_high, density` rows, tab separated.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "bin_low\tbin_high\tdensity")?;
        for (e, d) in self.edges.windows(2).zip(&self.densities) {
            writeln!(out, "{}\t{}\t{}", fmt_num(e[0]), fmt_num(e[1]), fmt_num(*d))?;
        }
        Ok(())
    }
}

/// Runs the ensemble and bins the recorded incomes.
pub fn run(config: &SimConfig) -> Result<StationaryHistogram> {
    let out = run_samples(config)?;
    StationaryHistogram::from_samples(&out.samples, config.bins)
}
