use std::f64::consts::FRAC_PI_2;

use super::params::{Branch, EffectiveParams};
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Panels grow geometrically by this factor away from `m_init`.
const PANEL_RATIO: f64 = 2.0;
/// Beyond the tail cutoff the neglected relative correction of the power-law
/// tail, `(m0/T) / x`, is below this.
const TAIL_RELATIVE_ERROR: f64 = 1e-11;

/// Closed-form stationary density of the threshold model, normalized on
/// `[m_init, inf)`.
///
/// The two branch constants are fixed by continuity at `m1` and by total
/// probability. Normalization is computed once at construction.
#[derive(Debug, Clone)]
pub struct StationaryDensity {
    params: EffectiveParams,
    ln_c_below: f64,
    ln_c_above: f64,
    tail_cutoff: f64,
}

/// `ln( exp(-k atan x) / (1 + x^2)^((alpha+1)/2) )`
#[inline]
fn log_shape(x: f64, k: f64, alpha: f64) -> f64 {
    let ln_1p_sq = if x < 1e8 {
        (x * x).ln_1p()
    } else {
        2.0 * x.ln() + (x * x).recip().ln_1p()
    };
    -k * x.atan() - 0.5 * (alpha + 1.0) * ln_1p_sq
}

impl StationaryDensity {
    pub fn new(params: EffectiveParams) -> Result<Self> {
        params.validate()?;
        let mut d = StationaryDensity {
            params,
            ln_c_below: 0.0,
            ln_c_above: 0.0,
            tail_cutoff: 0.0,
        };
        if params.has_threshold() {
            let x1 = params.m1 / params.m0;
            d.ln_c_above = log_shape(x1, params.m0 / params.t, params.alpha)
                - log_shape(x1, params.m0 / params.t1, params.alpha1);
        }
        let (k, _) = d.tail_shape();
        let mut cutoff = params.m0 * (k / TAIL_RELATIVE_ERROR).max(1e6);
        if params.has_threshold() {
            cutoff = cutoff.max(4.0 * params.m1);
        }
        d.tail_cutoff = cutoff;

        let points = d.panel_points(params.m_init, cutoff);
        let tol = Tolerance::new(1e-16 * params.m0, 1e-13);
        let body = quad::integrate_panels(|m| d.pdf_unchecked(m), &points, tol)?;
        let z = body.value + d.tail_mass_unchecked(cutoff);
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::Numeric(format!("normalization integral is {z}")));
        }
        d.ln_c_below -= z.ln();
        d.ln_c_above -= z.ln();
        Ok(d)
    }

    /// Single-branch model: the threshold is moved to infinity.
    pub fn yakovenko(params: EffectiveParams) -> Result<Self> {
        Self::new(EffectiveParams {
            m1: f64::INFINITY,
            ..params
        })
    }

    pub fn params(&self) -> &EffectiveParams {
        &self.params
    }

    /// Income beyond which the tail is integrated in closed form.
    pub fn tail_cutoff(&self) -> f64 {
        self.tail_cutoff
    }

    /// Normalized branch constants `(c', c'')`.
    pub fn branch_constants(&self) -> (f64, f64) {
        (self.ln_c_below.exp(), self.ln_c_above.exp())
    }

    /// CCDF decay exponent of the outermost branch.
    pub fn tail_exponent(&self) -> f64 {
        self.tail_shape().1
    }

    fn tail_shape(&self) -> (f64, f64) {
        let p = &self.params;
        if p.has_threshold() {
            (p.m0 / p.t1, p.alpha1)
        } else {
            (p.m0 / p.t, p.alpha)
        }
    }

    pub fn pdf(&self, m: f64) -> Result<f64> {
        if m.is_nan() || m < self.params.m_init {
            return Err(Error::OutOfDomain {
                m,
                m_init: self.params.m_init,
            });
        }
        Ok(self.pdf_unchecked(m))
    }

    #[inline]
    pub fn pdf_unchecked(&self, m: f64) -> f64 {
        let p = &self.params;
        let x = m / p.m0;
        match Branch::of(m, p.m1) {
            Branch::Below => (self.ln_c_below + log_shape(x, p.m0 / p.t, p.alpha)).exp(),
            Branch::Above => (self.ln_c_above + log_shape(x, p.m0 / p.t1, p.alpha1)).exp(),
        }
    }

    /// Probability mass above `m` for `m >= tail_cutoff`, from the asymptotic
    /// power law `c exp(-k pi/2) (m/m0)^-(alpha+1)`.
    pub fn tail_mass(&self, m: f64) -> f64 {
        self.tail_mass_unchecked(m.max(self.tail_cutoff))
    }

    fn tail_mass_unchecked(&self, m: f64) -> f64 {
        let (k, alpha) = self.tail_shape();
        let ln_c = if self.params.has_threshold() {
            self.ln_c_above
        } else {
            self.ln_c_below
        };
        let x = m / self.params.m0;
        (ln_c - k * FRAC_PI_2 - alpha * x.ln()).exp() * self.params.m0 / alpha
    }

    /// Breakpoints covering `[lo, hi]`: geometric panels in `m - m_init` plus the
    /// threshold, so no panel straddles the kink at `m1`.
    pub fn panel_points(&self, lo: f64, hi: f64) -> Vec<f64> {
        let p = &self.params;
        let base = p.m_init;
        let mut step = 1e-3 * p.t.min(p.m0);
        let mut pts = vec![lo];
        while base + step < hi {
            let v = base + step;
            if v > lo {
                pts.push(v);
            }
            step *= PANEL_RATIO;
        }
        if p.m1 > lo && p.m1 < hi {
            pts.push(p.m1);
        }
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// Stationary density of the threshold model at income `m`.
pub fn stationary_pdf(m: f64, e: &EffectiveParams) -> Result<f64> {
    StationaryDensity::new(*e)?.pdf(m)
}

/// Single-branch (threshold at infinity) stationary density at income `m`.
pub fn yakovenko_pdf(m: f64, e: &EffectiveParams) -> Result<f64> {
    StationaryDensity::yakovenko(*e)?.pdf(m)
}
