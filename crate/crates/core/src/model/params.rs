use crate::error::{Error, Result};

/// The effective (fitted) parameters of the threshold model.
///
/// `m1 = f64::INFINITY` selects the single-branch model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    /// Income temperature below the threshold.
    pub t: f64,
    /// Income temperature above the threshold.
    pub t1: f64,
    /// Additive/multiplicative crossover income.
    pub m0: f64,
    /// Medium/high class threshold income.
    pub m1: f64,
    /// Medium-class Pareto exponent.
    pub alpha: f64,
    /// High-class Pareto exponent.
    pub alpha1: f64,
    /// Lowest household income; the density is supported on `[m_init, inf)`.
    pub m_init: f64,
}

impl EffectiveParams {
    /// Parameter set reported for EU household incomes in 2007, with `T1 = T`
    /// and the domain starting at zero income.
    pub fn eu_2007() -> Self {
        EffectiveParams {
            t: 37e3,
            t1: 37e3,
            m0: 1.6e5,
            m1: 3e5,
            alpha: 2.8643,
            alpha1: 0.70,
            m_init: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("T", self.t)?;
        positive("T1", self.t1)?;
        positive("m0", self.m0)?;
        if !(self.m_init.is_finite() && self.m_init >= 0.0) {
            return Err(Error::invalid(
                "m_init",
                self.m_init,
                "must be finite and non-negative",
            ));
        }
        if self.m_init >= self.m0 {
            return Err(Error::invalid("m_init", self.m_init, "must be below m0"));
        }
        if self.m1.is_nan() || self.m1 < self.m0 {
            return Err(Error::invalid("m1", self.m1, "must be at least m0"));
        }
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(Error::invalid("alpha", self.alpha, "must exceed 1"));
        }
        if !(self.alpha1.is_finite() && self.alpha1 > 0.0) {
            return Err(Error::invalid(
                "alpha1",
                self.alpha1,
                "must be positive for a normalizable tail",
            ));
        }
        Ok(())
    }

    pub fn has_threshold(&self) -> bool {
        self.m1.is_finite()
    }

    /// Tail exponent below 1: the high-class tail has infinite mean and variance.
    pub fn infinite_variance_tail(&self) -> bool {
        self.alpha1 < 1.0
    }

    /// Multiplies every income-valued parameter by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        EffectiveParams {
            t: self.t * c,
            t1: self.t1 * c,
            m0: self.m0 * c,
            m1: self.m1 * c,
            m_init: self.m_init * c,
            ..*self
        }
    }
}

/// Coefficients of the underlying Langevin dynamics.
///
/// Drift `A(m) = A0 + a m` below `m1` and `A0' + a' m` from `m1` on; diffusion
/// `B(m) = B0 + b m^2` everywhere. `b = 0` is the purely additive process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroParams {
    pub a0: f64,
    pub a0p: f64,
    pub a: f64,
    pub ap: f64,
    pub b0: f64,
    pub b: f64,
    pub m1: f64,
    pub m_init: f64,
}

/// Which side of the threshold an income falls on. The threshold itself
/// belongs to `Above`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Below,
    Above,
}

impl Branch {
    pub fn of(m: f64, m1: f64) -> Branch {
        if m < m1 {
            Branch::Below
        } else {
            Branch::Above
        }
    }
}

impl MicroParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("A0", self.a0),
            ("A0'", self.a0p),
            ("a", self.a),
            ("a'", self.ap),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, v, "must be finite"));
            }
        }
        positive("B0", self.b0)?;
        if !(self.b.is_finite() && self.b >= 0.0) {
            return Err(Error::invalid(
                "b",
                self.b,
                "must be finite and non-negative",
            ));
        }
        if !(self.m_init.is_finite() && self.m_init >= 0.0) {
            return Err(Error::invalid(
                "m_init",
                self.m_init,
                "must be finite and non-negative",
            ));
        }
        if self.m1.is_nan() || self.m1 < self.m_init {
            return Err(Error::invalid("m1", self.m1, "must not lie below m_init"));
        }
        Ok(())
    }

    pub fn branch(&self, m: f64) -> Branch {
        Branch::of(m, self.m1)
    }

    /// Drift coefficient `A(m)`.
    pub fn drift(&self, m: f64) -> Result<f64> {
        non_negative_income(m)?;
        Ok(self.drift_unchecked(m))
    }

    /// Diffusion coefficient `B(m)`.
    pub fn diffusion(&self, m: f64) -> Result<f64> {
        non_negative_income(m)?;
        Ok(self.diffusion_unchecked(m))
    }

    #[inline]
    pub(crate) fn drift_unchecked(&self, m: f64) -> f64 {
        match self.branch(m) {
            Branch::Below => self.a0 + self.a * m,
            Branch::Above => self.a0p + self.ap * m,
        }
    }

    #[inline]
    pub(crate) fn diffusion_unchecked(&self, m: f64) -> f64 {
        self.b0 + self.b * m * m
    }

    /// Largest relaxation rate of the dynamics: the multiplicative rates and the
    /// additive rate `A0^2 / B0` of each branch.
    pub fn max_rate(&self) -> f64 {
        let additive = (self.a0 * self.a0).max(self.a0p * self.a0p) / self.b0;
        self.a.abs().max(self.ap.abs()).max(self.b).max(additive)
    }
}

/// `A(m)` for income `m`.
pub fn drift_a(m: f64, p: &MicroParams) -> Result<f64> {
    p.drift(m)
}

/// `B(m)` for income `m`.
pub fn diffusion_b(m: f64, p: &MicroParams) -> Result<f64> {
    p.diffusion(m)
}

/// Builds Langevin coefficients realizing `e` in the time gauge `b`.
pub fn micro_from_effective(e: &EffectiveParams, b: f64) -> Result<MicroParams> {
    e.validate()?;
    positive("b", b)?;
    let b0 = b * e.m0 * e.m0;
    Ok(MicroParams {
        a0: b0 / e.t,
        a0p: b0 / e.t1,
        a: (e.alpha - 1.0) * b,
        ap: (e.alpha1 - 1.0) * b,
        b0,
        b,
        m1: e.m1,
        m_init: e.m_init,
    })
}

/// Recovers the effective parameters; only ratios of the coefficients enter.
pub fn effective_from_micro(p: &MicroParams) -> Result<EffectiveParams> {
    p.validate()?;
    positive("b", p.b)?;
    positive("A0", p.a0)?;
    positive("A0'", p.a0p)?;
    let e = EffectiveParams {
        t: p.b0 / p.a0,
        t1: p.b0 / p.a0p,
        m0: (p.b0 / p.b).sqrt(),
        m1: p.m1,
        alpha: 1.0 + p.a / p.b,
        alpha1: 1.0 + p.ap / p.b,
        m_init: p.m_init,
    };
    Ok(e)
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, v, "must be finite and positive"))
    }
}

fn non_negative_income(m: f64) -> Result<()> {
    if m.is_nan() || m < 0.0 {
        Err(Error::invalid("m", m, "income must be non-negative"))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn micro() -> MicroParams {
        MicroParams {
            a0: 1.0,
            a0p: 5.0,
            a: 2.0,
            ap: -0.5,
            b0: 4.0,
            b: 1.0,
            m1: 10.0,
            m_init: 0.0,
        }
    }

    #[test]
    fn drift_evaluates_both_branches() {
        let p = micro();
        assert_eq!(drift_a(0.0, &p).unwrap(), 1.0);
        assert_eq!(drift_a(3.0, &p).unwrap(), 7.0);
        // threshold belongs to the upper branch
        assert_eq!(drift_a(10.0, &p).unwrap(), 5.0 - 0.5 * 10.0);
        assert_eq!(p.branch(10.0), Branch::Above);
        assert_eq!(p.branch(9.999), Branch::Below);
    }

    #[test]
    fn diffusion_is_continuous_quadratic() {
        let p = micro();
        assert_eq!(diffusion_b(0.0, &p).unwrap(), 4.0);
        assert_eq!(diffusion_b(2.0, &p).unwrap(), 8.0);
        let e = effective_from_micro(&p).unwrap();
        assert_relative_eq!(
            diffusion_b(e.m0, &p).unwrap(),
            2.0 * p.b0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn negative_income_rejected() {
        let p = micro();
        assert!(drift_a(-1.0, &p).is_err());
        assert!(diffusion_b(-1e-9, &p).is_err());
    }

    #[test]
    fn micro_identities() {
        let mut e = EffectiveParams::eu_2007();
        e.alpha = 2.0;
        let p = micro_from_effective(&e, 1.0).unwrap();
        assert_eq!(p.a / p.b, 1.0);
        let p = micro_from_effective(&EffectiveParams::eu_2007(), 1.0).unwrap();
        assert_relative_eq!(p.ap / p.b, -0.30, max_relative = 1e-12);
        // B0 = b m0^2, A0 = B0 / T
        assert_relative_eq!(p.b0, 2.56e10, max_relative = 1e-15);
        assert_relative_eq!(p.a0, 2.56e10 / 37e3, max_relative = 1e-15);
        assert_relative_eq!(p.a0, 6.918_918_918_9e5, max_relative = 1e-10);
    }

    #[test]
    fn gauge_round_trip() {
        let e = EffectiveParams::eu_2007();
        for b in [0.5, 1.0, 7.0] {
            let back = effective_from_micro(&micro_from_effective(&e, b).unwrap()).unwrap();
            assert_relative_eq!(back.t, e.t, max_relative = 1e-15);
            assert_relative_eq!(back.t1, e.t1, max_relative = 1e-15);
            assert_relative_eq!(back.m0, e.m0, max_relative = 1e-15);
            assert_eq!(back.m1, e.m1);
            assert_relative_eq!(back.alpha, e.alpha, max_relative = 1e-15);
            assert_relative_eq!(back.alpha1, e.alpha1, max_relative = 1e-14);
            assert_eq!(back.m_init, e.m_init);
        }
    }

    #[test]
    fn zero_multiplicative_drift_gives_unit_alpha() {
        let p = MicroParams { a: 0.0, ..micro() };
        assert_eq!(effective_from_micro(&p).unwrap().alpha, 1.0);
        let p = MicroParams {
            a0: 4.0 / 37000.0,
            ..micro()
        };
        assert_relative_eq!(
            effective_from_micro(&p).unwrap().t,
            37000.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn rejects_bad_gauge_and_params() {
        let e = EffectiveParams::eu_2007();
        assert!(micro_from_effective(&e, 0.0).is_err());
        assert!(micro_from_effective(&e, -1.0).is_err());
        assert!(EffectiveParams { alpha1: 0.0, ..e }.validate().is_err());
        assert!(EffectiveParams { alpha1: -0.2, ..e }.validate().is_err());
        assert!(EffectiveParams { m1: 1e5, ..e }.validate().is_err());
        assert!(EffectiveParams { m_init: 2e5, ..e }.validate().is_err());
        assert!(EffectiveParams { t: 0.0, ..e }.validate().is_err());
        assert!(EffectiveParams {
            m1: f64::INFINITY,
            ..e
        }
        .validate()
        .is_ok());
        // infinite-variance tail is accepted and flagged
        assert!(e.validate().is_ok());
        assert!(e.infinite_variance_tail());
    }
}
