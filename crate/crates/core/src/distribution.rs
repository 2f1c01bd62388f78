//! Complementary CDF, quantiles and sampling for the stationary model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{EffectiveParams, StationaryDensity};
use crate::quad::{self, Tolerance};

/// Number of log-spaced points in the cached CCDF table.
pub const TABLE_POINTS: usize = 512;

const PANEL_TOL: Tolerance = Tolerance::new(1e-16, 1e-13);
const QUANTILE_REL_TOL: f64 = 1e-11;

/// Anything that can report `Pr[M > m]`.
pub trait Survival {
    fn survival(&self, m: f64) -> f64;
}

impl<F: Fn(f64) -> f64> Survival for F {
    fn survival(&self, m: f64) -> f64 {
        self(m)
    }
}

/// Boltzmann-Gibbs CCDF `exp(-(m - m_init)/T)`.
pub fn bg_ccdf(m: f64, t: f64, m_init: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid("T", t, "must be finite and positive"));
    }
    if m.is_nan() || m < m_init {
        return Err(Error::OutOfDomain { m, m_init });
    }
    Ok((-(m - m_init) / t).exp())
}

/// Pareto CCDF `(m / m_s)^-alpha`.
pub fn pareto_ccdf(m: f64, alpha: f64, m_s: f64) -> Result<f64> {
    for (name, v) in [("m", m), ("alpha", alpha), ("m_s", m_s)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(name, v, "must be finite and positive"));
        }
    }
    Ok((m / m_s).powf(-alpha))
}

/// Numerical CCDF of the stationary density.
///
/// The table holds `Pr[M > m]` on a log-spaced grid from `m_init` to the tail
/// cutoff (plus the threshold). Between nodes the CCDF is the next node's value
/// plus a Gauss-Kronrod integral of the density; beyond the cutoff it is the
/// closed-form power-law tail.
#[derive(Debug, Clone)]
pub struct ModelCcdf {
    density: StationaryDensity,
    grid: Vec<f64>,
    ccdf_values: Vec<f64>,
}

impl ModelCcdf {
    pub fn new(params: EffectiveParams) -> Result<Self> {
        Self::from_density(StationaryDensity::new(params)?)
    }

    pub fn from_density(density: StationaryDensity) -> Result<Self> {
        let p = *density.params();
        let cutoff = density.tail_cutoff();
        let first = p.m_init + 1e-6 * p.t.min(p.m0);
        let ln_first = (first - p.m_init).ln();
        let ln_span = (cutoff - p.m_init).ln() - ln_first;
        let mut grid = Vec::with_capacity(TABLE_POINTS + 2);
        grid.push(p.m_init);
        for i in 0..TABLE_POINTS - 1 {
            let f = i as f64 / (TABLE_POINTS - 2) as f64;
            grid.push(p.m_init + (ln_first + f * ln_span).exp());
        }
        *grid.last_mut().expect("non-empty") = cutoff;
        if p.has_threshold() && p.m1 < cutoff {
            grid.push(p.m1);
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();

        let mut ccdf_values = vec![0.0; grid.len()];
        let mut acc = density.tail_mass(cutoff);
        *ccdf_values.last_mut().expect("non-empty") = acc;
        for j in (0..grid.len() - 1).rev() {
            acc += quad::integrate(
                |m| density.pdf_unchecked(m),
                grid[j],
                grid[j + 1],
                PANEL_TOL,
            )?
            .value;
            ccdf_values[j] = acc.min(1.0);
        }
        Ok(ModelCcdf {
            density,
            grid,
            ccdf_values,
        })
    }

    pub fn params(&self) -> &EffectiveParams {
        self.density.params()
    }

    pub fn density(&self) -> &StationaryDensity {
        &self.density
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn ccdf_values(&self) -> &[f64] {
        &self.ccdf_values
    }

    pub fn tail_cutoff(&self) -> f64 {
        self.density.tail_cutoff()
    }

    /// `Pr[M > m]`.
    pub fn ccdf(&self, m: f64) -> Result<f64> {
        let m_init = self.params().m_init;
        if m.is_nan() || m < m_init {
            return Err(Error::OutOfDomain { m, m_init });
        }
        Ok(self.ccdf_unchecked(m))
    }

    fn ccdf_unchecked(&self, m: f64) -> f64 {
        if m >= self.tail_cutoff() {
            return self.density.tail_mass(m);
        }
        // grid[j] <= m < grid[j+1]
        let j = self.grid.partition_point(|&g| g <= m) - 1;
        if m == self.grid[j] {
            return self.ccdf_values[j];
        }
        let upper = self.grid[j + 1];
        let piece = quad::integrate(|x| self.density.pdf_unchecked(x), m, upper, PANEL_TOL)
            .map(|r| r.value)
            .unwrap_or_else(|_| {
                quad::gauss_kronrod21(&|x| self.density.pdf_unchecked(x), m, upper).0
            });
        (self.ccdf_values[j + 1] + piece).min(1.0)
    }

    /// Income `m` with `ccdf(m) = u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::invalid("u", u, "probability must lie in (0, 1]"));
        }
        let p = self.params();
        if u >= self.ccdf_values[0] {
            return Ok(p.m_init);
        }
        let last = self.grid.len() - 1;
        if u <= self.ccdf_values[last] {
            // invert the power-law tail
            let cutoff = self.grid[last];
            let alpha = self.density.tail_exponent();
            return Ok(cutoff * (self.ccdf_values[last] / u).powf(1.0 / alpha));
        }
        // bracket: values[j] >= u > values[j+1]
        let j = self.ccdf_values.partition_point(|&v| v >= u) - 1;
        let (mut lo, mut hi) = (self.grid[j], self.grid[j + 1]);
        let (v_lo, v_hi) = (self.ccdf_values[j], self.ccdf_values[j + 1]);

        // start from log-linear interpolation of the table
        let mut m = if v_hi > 0.0 && v_lo > v_hi {
            let f = (v_lo / u).ln() / (v_lo / v_hi).ln();
            lo + f * (hi - lo)
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..200 {
            let g = self.ccdf_unchecked(m) - u;
            if g.abs() <= QUANTILE_REL_TOL * u {
                return Ok(m);
            }
            if g > 0.0 {
                lo = m;
            } else {
                hi = m;
            }
            let pdf = self.density.pdf_unchecked(m);
            let newton = m + g / pdf;
            m = if pdf > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
                return Ok(m);
            }
        }
        Err(Error::Numeric(format!(
            "quantile search for u = {u} did not converge"
        )))
    }

    /// `n` independent draws by inversion, reproducible from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Precondition("sample size must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        (0..n)
            .map(|_| {
                // gen() is in [0, 1); flip it onto (0, 1]
                let u = 1.0 - rng.gen::<f64>();
                self.quantile(u)
            })
            .collect()
    }
}

impl Survival for ModelCcdf {
    fn survival(&self, m: f64) -> f64 {
        if m < self.params().m_init {
            1.0
        } else {
            self.ccdf_unchecked(m)
        }
    }
}

pub fn model_ccdf(m: f64, e: &EffectiveParams) -> Result<f64> {
    ModelCcdf::new(*e)?.ccdf(m)
}

pub fn model_quantile(u: f64, e: &EffectiveParams) -> Result<f64> {
    ModelCcdf::new(*e)?.quantile(u)
}

pub fn sample(n: usize, e: &EffectiveParams, seed: u64) -> Result<Vec<f64>> {
    ModelCcdf::new(*e)?.sample(n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn eu() -> ModelCcdf {
        ModelCcdf::new(EffectiveParams::eu_2007()).unwrap()
    }

    #[test]
    fn boltzmann_gibbs_values() {
        assert_eq!(bg_ccdf(5.0, 2.0, 5.0).unwrap(), 1.0);
        assert_relative_eq!(
            bg_ccdf(7.0, 2.0, 5.0).unwrap(),
            0.367_879_441_171_442_3,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            bg_ccdf(74_000.0, 37_000.0, 0.0).unwrap(),
            0.135_335_283_236_612_7,
            max_relative = 1e-15
        );
        assert!(bg_ccdf(4.0, 2.0, 5.0).is_err());
    }

    #[test]
    fn pareto_values() {
        assert_eq!(pareto_ccdf(3.0, 2.0, 3.0).unwrap(), 1.0);
        assert_relative_eq!(
            pareto_ccdf(10.0, 2.0, 1.0).unwrap(),
            0.01,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            pareto_ccdf(2.0, 2.8643, 1.0).unwrap(),
            0.137_328_217_627_757_1,
            max_relative = 1e-14
        );
        assert!(pareto_ccdf(0.0, 2.0, 1.0).is_err());
        assert!(pareto_ccdf(1.0, -2.0, 1.0).is_err());
    }

    #[test]
    fn ccdf_starts_at_one() {
        let c = eu();
        assert!((c.ccdf(0.0).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(c.grid()[0], 0.0);
        assert!(c.ccdf(-1.0).is_err());
    }

    #[test]
    fn table_is_monotone_and_in_unit_interval() {
        let c = eu();
        assert!(c.grid().windows(2).all(|w| w[0] < w[1]));
        assert!(c.ccdf_values().windows(2).all(|w| w[0] >= w[1]));
        assert!(c.ccdf_values().iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn tail_splice_is_seamless() {
        let c = eu();
        let cut = c.tail_cutoff();
        let just_below = c.ccdf(cut * (1.0 - 1e-12)).unwrap();
        let analytic = c.density().tail_mass(cut);
        assert!((just_below / analytic - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quantile_edge_cases() {
        let c = eu();
        assert_eq!(c.quantile(1.0).unwrap(), 0.0);
        assert!(c.quantile(0.0).is_err());
        assert!(c.quantile(1.5).is_err());
        for u in [0.9, 0.5, 0.01, 1e-5] {
            let m = c.quantile(u).unwrap();
            assert!((c.ccdf(m).unwrap() - u).abs() <= 1e-8, "u = {u}");
        }
    }

    #[test]
    fn sample_is_seeded() {
        let c = eu();
        assert!(c.sample(0, 1).is_err());
        let one = c.sample(1, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0] >= 0.0);
        assert_eq!(c.sample(50, 9).unwrap(), c.sample(50, 9).unwrap());
        assert_ne!(c.sample(50, 9).unwrap(), c.sample(50, 10).unwrap());
    }
}
