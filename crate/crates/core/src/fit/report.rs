use std::fmt::Write as _;

use super::{Crossovers, PointFit};
use crate::kv::{effective_params_to_kv, fmt_num, KvMap};
use crate::model::EffectiveParams;

/// Standard errors of the fitted parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamErrors {
    pub t: f64,
    pub m0: f64,
    pub m1: f64,
    pub alpha: f64,
    pub alpha1: f64,
    /// Jackknife replicates that succeeded.
    pub replicates: usize,
}

impl ParamErrors {
    pub fn nan() -> Self {
        ParamErrors {
            t: f64::NAN,
            m0: f64::NAN,
            m1: f64::NAN,
            alpha: f64::NAN,
            alpha1: f64::NAN,
            replicates: 0,
        }
    }
}

/// Outcome of the three-step fit.
///
/// Windows are ordered and meet at most at endpoints. With no high-income
/// regime the high window and its fit are absent and `alpha1 == alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub params: EffectiveParams,
    pub temperature_window: (f64, f64),
    pub medium_window: (f64, f64),
    pub high_window: Option<(f64, f64)>,
    /// Temperature, medium and high segment.
    pub r_squared: [f64; 3],
    pub window_points: [usize; 3],
    /// Scales of the two power-law fits.
    pub m_s: [f64; 2],
    pub std_errors: ParamErrors,
    pub crossovers: Crossovers,
    /// `alpha1 < 1`.
    pub infinite_variance_flag: bool,
    /// `alpha > 2`.
    pub finite_variance_medium: bool,
    pub n: usize,
}

impl FitReport {
    pub(super) fn new(p: PointFit, std_errors: ParamErrors, n: usize) -> Self {
        let params = p.params;
        FitReport {
            temperature_window: p.temperature.fit.window,
            medium_window: p.medium.fit.window,
            high_window: p.high.map(|h| h.fit.window),
            r_squared: [
                p.temperature.fit.line.r_squared,
                p.medium.fit.line.r_squared,
                p.high.map_or(f64::NAN, |h| h.fit.line.r_squared),
            ],
            window_points: [
                p.temperature.fit.line.n,
                p.medium.fit.line.n,
                p.high.map_or(0, |h| h.fit.line.n),
            ],
            m_s: [p.medium.m_s, p.high.map_or(f64::NAN, |h| h.m_s)],
            std_errors,
            infinite_variance_flag: params.alpha1 < 1.0,
            finite_variance_medium: params.alpha > 2.0,
            crossovers: p.crossovers,
            params,
            n,
        }
    }

    /// Relative crossover uncertainty from the residual profile.
    pub fn crossover_uncertainty(&self) -> f64 {
        self.crossovers.max_uncertainty()
    }

    /// Key-value form. The parameter keys match the parameter-file format, so a
    /// report can be fed straight back as model parameters.
    pub fn to_kv(&self) -> KvMap {
        let mut kv = effective_params_to_kv(&self.params);
        let e = &self.std_errors;
        for (k, v) in [
            ("T_se", e.t),
            ("m0_se", e.m0),
            ("m1_se", e.m1),
            ("alpha_se", e.alpha),
            ("alpha1_se", e.alpha1),
        ] {
            kv.set(k, fmt_num(v));
        }
        kv.set("jackknife_replicates", e.replicates);
        kv.set("n", self.n);
        let win = |kv: &mut KvMap, name: &str, w: Option<(f64, f64)>| match w {
            Some((lo, hi)) => {
                kv.set(format!("{name}_window_low"), fmt_num(lo));
                kv.set(format!("{name}_window_high"), fmt_num(hi));
            }
            None => kv.set(format!("{name}_window"), "none"),
        };
        win(&mut kv, "temperature", Some(self.temperature_window));
        win(&mut kv, "medium", Some(self.medium_window));
        win(&mut kv, "high", self.high_window);
        for (name, r2, np) in [
            ("temperature", self.r_squared[0], self.window_points[0]),
            ("medium", self.r_squared[1], self.window_points[1]),
            ("high", self.r_squared[2], self.window_points[2]),
        ] {
            kv.set(format!("{name}_r_squared"), fmt_num(r2));
            kv.set(format!("{name}_points"), np);
        }
        kv.set("medium_m_s", fmt_num(self.m_s[0]));
        kv.set("high_m_s", fmt_num(self.m_s[1]));
        let c = &self.crossovers;
        kv.set("crossovers", if c.manual { "manual" } else { "detected" });
        kv.set("m0_uncertainty", fmt_num(c.m0_uncertainty));
        kv.set("m1_uncertainty", fmt_num(c.m1_uncertainty));
        kv.set("no_high_income_regime", c.no_high_income_regime);
        kv.set("infinite_variance_high_class", self.infinite_variance_flag);
        kv.set("finite_variance_medium_class", self.finite_variance_medium);
        kv
    }

    /// Tab-delimited `parameter, value, std_error` block.
    pub fn to_delimited(&self) -> String {
        let p = &self.params;
        let e = &self.std_errors;
        let mut out = String::from("parameter\tvalue\tstd_error\n");
        for (k, v, s) in [
            ("T", p.t, e.t),
            ("T1", p.t1, e.t),
            ("m0", p.m0, e.m0),
            ("m1", p.m1, e.m1),
            ("alpha", p.alpha, e.alpha),
            ("alpha1", p.alpha1, e.alpha1),
            ("m_init", p.m_init, 0.0),
        ] {
            let _ = writeln!(out, "{k}\t{}\t{}", fmt_num(v), fmt_num(s));
        }
        out
    }
}
