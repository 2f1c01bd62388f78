//! Three-step fit of the two-crossover income law to an empirical CCDF:
//! locate the crossovers, regress the exponential body for the temperature,
//! then regress the two power-law segments for the exponents.

mod report;

pub use report::{FitReport, ParamErrors};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::empirical::{ols, EmpiricalCcdf, LineFit};
use crate::error::{Error, FitStep, Result};
use crate::model::EffectiveParams;

/// Minimum points in any regression window.
pub const MIN_WINDOW_POINTS: usize = 30;
/// Minimum sample size for crossover detection.
pub const MIN_DETECTION_POINTS: usize = 100;
/// Candidate crossovers sit at tail probabilities log-spaced over this range.
pub const CANDIDATE_TAIL_RANGE: (f64, f64) = (0.5, 1e-4);
pub const CANDIDATE_LEVELS: usize = 60;
/// Relative guard band excluded from each Pareto window next to a crossover.
pub const GUARD_BAND: f64 = 0.1;
pub const JACKKNIFE_GROUPS: usize = 20;
const JACKKNIFE_SEED: u64 = 0x6a61_636b;
const MIN_SEGMENT_POINTS: usize = 3;

/// Result of [`detect_crossovers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Crossovers {
    pub m0: f64,
    pub m1: f64,
    /// Relative one-sigma widths from the curvature of the profiled residual
    /// sum of squares; NaN when the optimum sits on the candidate-grid edge.
    pub m0_uncertainty: f64,
    pub m1_uncertainty: f64,
    /// The top segment is no heavier than the middle one; `m1` is then pinned
    /// at the highest candidate level.
    pub no_high_income_regime: bool,
    /// Supplied by the caller rather than searched.
    pub manual: bool,
}

impl Crossovers {
    pub fn manual(m0: f64, m1: f64) -> Result<Self> {
        if !(m0.is_finite() && m0 > 0.0) {
            return Err(Error::invalid("m0", m0, "crossover must be positive"));
        }
        if !(m1 > m0) {
            return Err(Error::invalid("m1", m1, "threshold must exceed m0"));
        }
        Ok(Crossovers {
            m0,
            m1,
            m0_uncertainty: f64::NAN,
            m1_uncertainty: f64::NAN,
            no_high_income_regime: false,
            manual: true,
        })
    }

    pub fn max_uncertainty(&self) -> f64 {
        self.m0_uncertainty.max(self.m1_uncertainty)
    }
}

/// Running sums for O(1) segment regressions.
struct Prefix {
    s: Vec<[f64; 5]>,
}

impl Prefix {
    fn new(x: impl Iterator<Item = f64>, y: &[f64]) -> Self {
        let mut s = Vec::with_capacity(y.len() + 1);
        let mut acc = [0.0; 5];
        s.push(acc);
        for (xi, &yi) in x.zip(y) {
            acc[0] += xi;
            acc[1] += xi * xi;
            acc[2] += yi;
            acc[3] += yi * yi;
            acc[4] += xi * yi;
            s.push(acc);
        }
        Prefix { s }
    }

    /// Residual sum of squares of the least-squares line over `[i, j)`.
    fn ssr(&self, i: usize, j: usize) -> f64 {
        let n = (j - i) as f64;
        let d: Vec<f64> = (0..5).map(|k| self.s[j][k] - self.s[i][k]).collect();
        let vx = d[1] - d[0] * d[0] / n;
        let vy = d[3] - d[2] * d[2] / n;
        let cxy = d[4] - d[0] * d[2] / n;
        if vx <= 0.0 {
            return vy.max(0.0);
        }
        (vy - cxy * cxy / vx).max(0.0)
    }

    fn slope(&self, i: usize, j: usize) -> f64 {
        let n = (j - i) as f64;
        let d: Vec<f64> = (0..5).map(|k| self.s[j][k] - self.s[i][k]).collect();
        (d[4] - d[0] * d[2] / n) / (d[1] - d[0] * d[0] / n)
    }
}

fn candidate_indices(n: usize) -> Vec<usize> {
    let (hi, lo) = CANDIDATE_TAIL_RANGE;
    let (lh, ll) = (hi.ln(), lo.ln());
    (0..CANDIDATE_LEVELS)
        .map(|k| {
            let q = (lh + (ll - lh) * k as f64 / (CANDIDATE_LEVELS - 1) as f64).exp();
            (((1.0 - q) * n as f64) as usize).clamp(1, n - 1)
        })
        .collect()
}

/// Relative width implied by a parabola through three points of a profile.
fn curvature_width(x: [f64; 3], y: [f64; 3], sigma2: f64) -> f64 {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let kappa = 2.0 * (d2 - d1) / (x[2] - x[0]);
    if kappa > 0.0 && sigma2 > 0.0 {
        (2.0 * sigma2 / kappa).sqrt()
    } else {
        f64::NAN
    }
}

/// Grid search for `(m0, m1)` minimising the summed residuals of three line
/// fits: `ln(position)` against income below `m0`, and against `ln(income)` on
/// `[m0, m1)` and above `m1`.
///
/// Candidates are the sample incomes at 60 tail probabilities log-spaced from
/// 0.5 to 1e-4. Incomes are divided by their median first, which leaves every
/// residual unchanged and keeps the running sums well conditioned.
pub fn detect_crossovers(ecdf: &EmpiricalCcdf) -> Result<Crossovers> {
    let n = ecdf.len();
    if n < MIN_DETECTION_POINTS {
        return Err(Error::Precondition(format!(
            "crossover detection needs at least {MIN_DETECTION_POINTS} points, got {n}; \
             supply m0 and m1 manually"
        )));
    }
    let x = ecdf.sorted_incomes();
    let min_pos = x.iter().copied().find(|&v| v > 0.0).unwrap_or(0.0);
    if !(min_pos > 0.0 && x[n - 1] / min_pos >= 100.0) {
        return Err(Error::Precondition(format!(
            "incomes span less than two decades ({min_pos:e} to {:e}); supply m0 and m1 manually",
            x[n - 1]
        )));
    }
    let median = x[n / 2];
    if !(median > 0.0) {
        return Err(Error::Precondition(
            "median income is not positive; supply m0 and m1 manually".into(),
        ));
    }
    let lp: Vec<f64> = ecdf.plot_positions().iter().map(|p| p.ln()).collect();
    let lin = Prefix::new(x.iter().map(|m| m / median), &lp);
    let log = Prefix::new(x.iter().map(|m| (m / median).ln()), &lp);
    let idx = candidate_indices(n);
    let usable = |i: usize| x[i] > 0.0;

    let k = CANDIDATE_LEVELS;
    let mut table = vec![f64::INFINITY; k * k];
    let mut best = (f64::INFINITY, 0, 0);
    for a in 0..k {
        let i = idx[a];
        if i < MIN_SEGMENT_POINTS || !usable(i) {
            continue;
        }
        let below = lin.ssr(0, i);
        for b in a + 1..k {
            let j = idx[b];
            if j < i + MIN_SEGMENT_POINTS || n < j + MIN_SEGMENT_POINTS {
                continue;
            }
            let v = below + log.ssr(i, j) + log.ssr(j, n);
            table[a * k + b] = v;
            if v < best.0 {
                best = (v, a, b);
            }
        }
    }
    let (s_min, a, b) = best;
    if !s_min.is_finite() {
        return Err(Error::Precondition(
            "no admissible crossover pair; supply m0 and m1 manually".into(),
        ));
    }

    let sigma2 = s_min / (n as f64 - 6.0);
    let ln_m = |c: usize| x[idx[c]].ln();
    let profile = |c: usize, first: bool| -> f64 {
        (0..k)
            .map(|o| {
                if first {
                    table[c * k + o]
                } else {
                    table[o * k + c]
                }
            })
            .fold(f64::INFINITY, f64::min)
    };
    let width = |c: usize, first: bool| -> f64 {
        if c == 0 || c + 1 >= k {
            return f64::NAN;
        }
        let xs = [ln_m(c - 1), ln_m(c), ln_m(c + 1)];
        let ys = [
            profile(c - 1, first),
            profile(c, first),
            profile(c + 1, first),
        ];
        if ys.iter().any(|v| !v.is_finite()) || xs[0] >= xs[1] || xs[1] >= xs[2] {
            return f64::NAN;
        }
        curvature_width(xs, ys, sigma2)
    };

    let (i, j) = (idx[a], idx[b]);
    let medium_slope = log.slope(i, j);
    let high_slope = log.slope(j, n);
    if high_slope > medium_slope {
        return Ok(Crossovers {
            m0: x[i],
            m1: x[j],
            m0_uncertainty: width(a, true),
            m1_uncertainty: width(b, false),
            no_high_income_regime: false,
            manual: false,
        });
    }

    // Top segment is not heavier: refit m0 with a single power-law segment.
    let mut best2 = (f64::INFINITY, 0);
    let mut prof2 = vec![f64::INFINITY; k];
    for (a2, &i2) in idx.iter().enumerate() {
        if i2 < MIN_SEGMENT_POINTS || n < i2 + MIN_SEGMENT_POINTS || !usable(i2) {
            continue;
        }
        let v = lin.ssr(0, i2) + log.ssr(i2, n);
        prof2[a2] = v;
        if v < best2.0 {
            best2 = (v, a2);
        }
    }
    let a2 = best2.1;
    let sigma2 = best2.0 / (n as f64 - 4.0);
    let m0_uncertainty = if a2 == 0 || a2 + 1 >= k {
        f64::NAN
    } else {
        curvature_width(
            [ln_m(a2 - 1), ln_m(a2), ln_m(a2 + 1)],
            [prof2[a2 - 1], prof2[a2], prof2[a2 + 1]],
            sigma2,
        )
    };
    log::info!("no high-income regime detected; m1 pinned at the top candidate level");
    Ok(Crossovers {
        m0: x[idx[a2]],
        m1: x[idx[k - 1]],
        m0_uncertainty,
        m1_uncertainty: f64::NAN,
        no_high_income_regime: true,
        manual: false,
    })
}

/// Line fit of one regression window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowFit {
    pub window: (f64, f64),
    pub line: LineFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureFit {
    pub t: f64,
    pub std_error: f64,
    pub fit: WindowFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoFit {
    pub exponent: f64,
    /// Scale with `position = (m / m_s)^(-exponent)` on the window.
    pub m_s: f64,
    pub std_error: f64,
    pub fit: WindowFit,
}

fn window_points(
    ecdf: &EmpiricalCcdf,
    lo: f64,
    hi: f64,
    transform: impl Fn(f64) -> f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(lo < hi) {
        return Err(Error::Precondition(format!(
            "empty regression window [{lo:e}, {hi:e}]"
        )));
    }
    let r = ecdf.window(lo, hi);
    if r.len() < MIN_WINDOW_POINTS {
        return Err(Error::Precondition(format!(
            "window [{lo:e}, {hi:e}] holds {} points, need at least {MIN_WINDOW_POINTS}",
            r.len()
        )));
    }
    let x = ecdf.sorted_incomes()[r.clone()]
        .iter()
        .map(|&m| transform(m))
        .collect();
    let y = ecdf.plot_positions()[r].iter().map(|p| p.ln()).collect();
    Ok((x, y))
}

fn regress(x: &[f64], y: &[f64], window: (f64, f64)) -> Result<WindowFit> {
    let line = ols(x, y).ok_or_else(|| {
        Error::Numeric(format!(
            "degenerate regression on [{:e}, {:e}]",
            window.0, window.1
        ))
    })?;
    if !(line.slope < 0.0) {
        return Err(Error::Precondition(format!(
            "data not exponential on window [{:e}, {:e}]: slope {:e} is not negative",
            window.0, window.1, line.slope
        )));
    }
    Ok(WindowFit { window, line })
}

/// `T = -1 / slope` of `ln(position)` against income on `[m_init, m0]`.
pub fn fit_temperature(ecdf: &EmpiricalCcdf, m_init: f64, m0: f64) -> Result<TemperatureFit> {
    let (x, y) = window_points(ecdf, m_init, m0, |m| m - m_init)?;
    let fit = regress(&x, &y, (m_init, m0))?;
    let s = fit.line.slope;
    Ok(TemperatureFit {
        t: -1.0 / s,
        std_error: fit.line.slope_std_error / (s * s),
        fit,
    })
}

/// Exponent `-slope` of `ln(position)` against `ln(income)` on `window`.
pub fn fit_pareto(ecdf: &EmpiricalCcdf, window: (f64, f64)) -> Result<ParetoFit> {
    if !(window.0 > 0.0) {
        return Err(Error::invalid(
            "window",
            window.0,
            "Pareto window must start at a positive income",
        ));
    }
    // ln(m / lo) keeps the abscissa small and scale free
    let lo = window.0;
    let (x, y) = window_points(ecdf, window.0, window.1, |m| (m / lo).ln())?;
    let fit = regress(&x, &y, window)?;
    let exponent = -fit.line.slope;
    Ok(ParetoFit {
        exponent,
        m_s: lo * (fit.line.intercept / exponent).exp(),
        std_error: fit.line.slope_std_error,
        fit,
    })
}

/// The three fitting steps without uncertainty estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFit {
    pub crossovers: Crossovers,
    pub temperature: TemperatureFit,
    pub medium: ParetoFit,
    pub high: Option<ParetoFit>,
    pub params: EffectiveParams,
}

pub fn fit_point(ecdf: &EmpiricalCcdf, overrides: Option<(f64, f64)>) -> Result<PointFit> {
    let crossovers = match overrides {
        Some((m0, m1)) => Crossovers::manual(m0, m1),
        None => detect_crossovers(ecdf),
    }
    .map_err(|e| e.in_step(FitStep::Crossovers))?;
    let (m0, m1) = (crossovers.m0, crossovers.m1);
    let m_init = ecdf.min();

    let temperature =
        fit_temperature(ecdf, m_init, m0).map_err(|e| e.in_step(FitStep::Temperature))?;
    let upper = if crossovers.no_high_income_regime {
        ecdf.max()
    } else {
        (1.0 - GUARD_BAND) * m1
    };
    let medium = fit_pareto(ecdf, ((1.0 + GUARD_BAND) * m0, upper))
        .map_err(|e| e.in_step(FitStep::MediumExponent))?;
    let high = if crossovers.no_high_income_regime {
        None
    } else {
        Some(
            fit_pareto(ecdf, ((1.0 + GUARD_BAND) * m1, ecdf.max()))
                .map_err(|e| e.in_step(FitStep::HighExponent))?,
        )
    };
    let params = EffectiveParams {
        t: temperature.t,
        t1: temperature.t,
        m0,
        m1,
        alpha: medium.exponent,
        alpha1: high.map_or(medium.exponent, |h| h.exponent),
        m_init,
    };
    Ok(PointFit {
        crossovers,
        temperature,
        medium,
        high,
        params,
    })
}

/// Delete-group jackknife standard errors of `(T, m0, m1, alpha, alpha1)`.
///
/// Ranks are split into [`JACKKNIFE_GROUPS`] groups by a fixed-seed shuffle;
/// each replicate reruns the whole fit, crossover search included, on the data
/// with one group removed. Replicates that fail are left out.
pub fn jackknife(ecdf: &EmpiricalCcdf, overrides: Option<(f64, f64)>) -> ParamErrors {
    let n = ecdf.len();
    let g = JACKKNIFE_GROUPS.min(n);
    let mut group: Vec<usize> = (0..n).map(|i| i % g).collect();
    group.shuffle(&mut ChaCha8Rng::seed_from_u64(JACKKNIFE_SEED));

    let x = ecdf.sorted_incomes();
    let mut reps: Vec<[f64; 5]> = Vec::with_capacity(g);
    for drop in 0..g {
        let kept: Vec<f64> = x
            .iter()
            .zip(&group)
            .filter(|(_, &gi)| gi != drop)
            .map(|(&m, _)| m)
            .collect();
        let Ok(sub) = EmpiricalCcdf::from_incomes(&kept) else {
            continue;
        };
        match fit_point(&sub, overrides) {
            Ok(p) => {
                let e = p.params;
                reps.push([e.t, e.m0, e.m1, e.alpha, e.alpha1]);
            }
            Err(err) => log::warn!("jackknife replicate {drop} failed: {err}"),
        }
    }
    let r = reps.len();
    if r < 2 {
        return ParamErrors::nan();
    }
    let mut se = [0.0; 5];
    for (k, s) in se.iter_mut().enumerate() {
        let mean = reps.iter().map(|v| v[k]).sum::<f64>() / r as f64;
        let ss: f64 = reps.iter().map(|v| (v[k] - mean).powi(2)).sum();
        *s = ((r - 1) as f64 / r as f64 * ss).sqrt();
    }
    ParamErrors {
        t: se[0],
        m0: se[1],
        m1: se[2],
        alpha: se[3],
        alpha1: se[4],
        replicates: r,
    }
}

/// Full three-step fit with jackknife standard errors.
///
/// `m_init` is the smallest income and `T1` is set equal to `T`. Errors carry
/// the step they arose in.
pub fn fit_pipeline(ecdf: &EmpiricalCcdf, overrides: Option<(f64, f64)>) -> Result<FitReport> {
    let point = fit_point(ecdf, overrides)?;
    let std_errors = jackknife(ecdf, overrides);
    Ok(FitReport::new(point, std_errors, ecdf.len()))
}
