//! Direct numerical evaluation of the zero-flux stationary solution
//! `P(m) = const / B(m) * exp(-int_{m_init}^m A/B)` from the Langevin
//! coefficients alone. It shares no code with the closed form and serves as its
//! oracle.

use super::params::MicroParams;
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

const INNER_TOL: Tolerance = Tolerance::new(1e-14, 1e-13);
const OUTER_TOL: Tolerance = Tolerance::new(0.0, 1e-13);
/// Integration stops once the estimated remaining mass is below this fraction.
const REMAINDER: f64 = 1e-12;
const MAX_PANELS: usize = 2000;

#[derive(Debug, Clone)]
pub struct QuadratureDensity {
    params: MicroParams,
    /// Panel breakpoints, starting at `m_init`.
    points: Vec<f64>,
    /// `int_{m_init}^{points[i]} A/B`.
    cumulative: Vec<f64>,
    ln_norm: f64,
}

impl QuadratureDensity {
    pub fn new(params: MicroParams) -> Result<Self> {
        params.validate()?;
        let p = params;
        let ratio = |m: f64| p.drift_unchecked(m) / p.diffusion_unchecked(m);

        let mut scales = Vec::new();
        if p.a0 != 0.0 {
            scales.push(p.b0 / p.a0.abs());
        }
        if p.a0p != 0.0 {
            scales.push(p.b0 / p.a0p.abs());
        }
        if p.b > 0.0 {
            scales.push((p.b0 / p.b).sqrt());
        }
        let scale = scales.into_iter().fold(f64::INFINITY, f64::min);
        let mut step = if scale.is_finite() {
            1e-3 * scale
        } else {
            1e-3 * p.m_init.max(1.0)
        };

        let mut points = vec![p.m_init];
        let mut cumulative = vec![0.0];
        let mut total = 0.0;
        loop {
            let lo = *points.last().expect("non-empty");
            let mut hi = p.m_init + step;
            step *= 2.0;
            if hi <= lo {
                continue;
            }
            if lo < p.m1 && p.m1 < hi {
                hi = p.m1;
                step /= 2.0;
            }
            let i_lo = *cumulative.last().expect("non-empty");
            let weight = |m: f64| -> f64 {
                let inner = quad::integrate(ratio, lo, m, INNER_TOL)
                    .map(|r| r.value)
                    .unwrap_or(f64::NAN);
                (-(i_lo + inner)).exp() / p.diffusion_unchecked(m)
            };
            let mass = quad::integrate(weight, lo, hi, OUTER_TOL)?.value;
            let i_hi = i_lo + quad::integrate(ratio, lo, hi, INNER_TOL)?.value;
            if !mass.is_finite() {
                return Err(Error::Numeric(format!(
                    "stationary weight not finite on [{lo}, {hi}]"
                )));
            }
            total += mass;
            points.push(hi);
            cumulative.push(i_hi);

            // remaining mass from the local power-law decay exponent at `hi`
            let w_hi = (-i_hi).exp() / p.diffusion_unchecked(hi);
            let decay = hi * ratio(hi) + 2.0 * p.b * hi * hi / p.diffusion_unchecked(hi);
            if decay > 1.0 {
                let remainder = w_hi * hi / (decay - 1.0);
                if remainder < REMAINDER * total {
                    total += remainder;
                    break;
                }
            }
            if points.len() > MAX_PANELS || !hi.is_finite() {
                return Err(Error::Numeric(
                    "stationary weight is not normalizable on [m_init, inf)".into(),
                ));
            }
        }

        Ok(QuadratureDensity {
            params,
            points,
            cumulative,
            ln_norm: total.ln(),
        })
    }

    pub fn params(&self) -> &MicroParams {
        &self.params
    }

    pub fn pdf(&self, m: f64) -> Result<f64> {
        let p = &self.params;
        if m.is_nan() || m < p.m_init {
            return Err(Error::OutOfDomain {
                m,
                m_init: p.m_init,
            });
        }
        let k = self.points.partition_point(|&x| x <= m).saturating_sub(1);
        let (start, i_start) = if k < self.points.len() {
            (self.points[k], self.cumulative[k])
        } else {
            (
                *self.points.last().expect("non-empty"),
                *self.cumulative.last().expect("non-empty"),
            )
        };
        let inner = quad::integrate(
            |x| p.drift_unchecked(x) / p.diffusion_unchecked(x),
            start,
            m,
            INNER_TOL,
        )?;
        let ln_w = -(i_start + inner.value) - p.diffusion_unchecked(m).ln();
        Ok((ln_w - self.ln_norm).exp())
    }
}

/// Stationary density evaluated by quadrature of `A/B` from `m_init` to `m`.
pub fn stationary_pdf_quadrature(m: f64, p: &MicroParams) -> Result<f64> {
    QuadratureDensity::new(*p)?.pdf(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn additive_process_is_exponential() {
        let t = 37e3;
        let m_init = 5e3;
        let p = MicroParams {
            a0: 1.0,
            a0p: 1.0,
            a: 0.0,
            ap: 0.0,
            b0: t,
            b: 0.0,
            m1: f64::INFINITY,
            m_init,
        };
        let d = QuadratureDensity::new(p).unwrap();
        for m in [m_init, 1e4, 5e4, 2e5, 8e5] {
            let exact = (-(m - m_init) / t).exp() / t;
            assert_relative_eq!(d.pdf(m).unwrap(), exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn below_domain_rejected() {
        let p = MicroParams {
            a0: 1.0,
            a0p: 1.0,
            a: 0.0,
            ap: 0.0,
            b0: 1.0,
            b: 0.0,
            m1: f64::INFINITY,
            m_init: 1.0,
        };
        assert!(stationary_pdf_quadrature(0.5, &p).is_err());
    }

    #[test]
    fn non_normalizable_reported() {
        // pure Gibrat with a < 0 gives a density decaying slower than 1/m
        let p = MicroParams {
            a0: 0.0,
            a0p: 0.0,
            a: -1.5,
            ap: -1.5,
            b0: 1e-12,
            b: 1.0,
            m1: f64::INFINITY,
            m_init: 1.0,
        };
        assert!(QuadratureDensity::new(p).is_err());
    }
}
