//! Empirical CCDFs with Weibull plotting positions.

use std::fmt;
use std::str::FromStr;

use crate::distribution::Survival;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Survey,
    RichList,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Survey => "survey",
            Source::RichList => "richlist",
        })
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "survey" => Ok(Source::Survey),
            "richlist" | "rich_list" | "rich-list" => Ok(Source::RichList),
            other => Err(Error::Parse(format!("unknown source `{other}`"))),
        }
    }
}

/// One household income observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncomeSample {
    pub income: f64,
    pub source: Source,
    pub year: Option<i32>,
}

impl IncomeSample {
    pub fn survey(income: f64) -> Self {
        IncomeSample {
            income,
            source: Source::Survey,
            year: None,
        }
    }

    pub fn rich(income: f64) -> Self {
        IncomeSample {
            income,
            source: Source::RichList,
            year: None,
        }
    }
}

/// Sorted incomes with their Weibull positions `1 - i/(N+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCcdf {
    sorted_incomes: Vec<f64>,
    plot_positions: Vec<f64>,
}

impl EmpiricalCcdf {
    pub fn from_incomes(incomes: &[f64]) -> Result<Self> {
        if incomes.len() < 2 {
            return Err(Error::Precondition(format!(
                "an empirical CCDF needs at least 2 samples, got {}",
                incomes.len()
            )));
        }
        if let Some(bad) = incomes.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("income", *bad, "must be finite"));
        }
        let mut sorted_incomes = incomes.to_vec();
        // stable: equal incomes keep input order and get distinct ranks
        sorted_incomes.sort_by(f64::total_cmp);
        let plot_positions = weibull_positions(sorted_incomes.len());
        Ok(EmpiricalCcdf {
            sorted_incomes,
            plot_positions,
        })
    }

    /// Incomes with caller-supplied positions. Incomes must ascend and positions
    /// must lie in `(0, 1]` without increasing.
    pub fn from_points(incomes: Vec<f64>, positions: Vec<f64>) -> Result<Self> {
        if incomes.len() < 2 || incomes.len() != positions.len() {
            return Err(Error::Precondition(format!(
                "need at least 2 income/position pairs of equal length, got {} and {}",
                incomes.len(),
                positions.len()
            )));
        }
        if incomes.iter().any(|v| !v.is_finite()) || incomes.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Precondition(
                "incomes must be finite and ascending".into(),
            ));
        }
        if positions.iter().any(|p| !(*p > 0.0 && *p <= 1.0))
            || positions.windows(2).any(|w| w[1] > w[0])
        {
            return Err(Error::Precondition(
                "positions must lie in (0, 1] and be non-increasing".into(),
            ));
        }
        Ok(EmpiricalCcdf {
            sorted_incomes: incomes,
            plot_positions: positions,
        })
    }

    pub fn sorted_incomes(&self) -> &[f64] {
        &self.sorted_incomes
    }

    pub fn plot_positions(&self) -> &[f64] {
        &self.plot_positions
    }

    pub fn len(&self) -> usize {
        self.sorted_incomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_incomes.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.sorted_incomes[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted_incomes[self.len() - 1]
    }

    /// Index range of points with income in `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let start = self.sorted_incomes.partition_point(|&m| m < lo);
        let end = self.sorted_incomes.partition_point(|&m| m <= hi);
        start..end.max(start)
    }

    /// Multiplies every income by `c > 0`; positions are rank-only and unchanged.
    pub fn scaled(&self, c: f64) -> Self {
        EmpiricalCcdf {
            sorted_incomes: self.sorted_incomes.iter().map(|m| m * c).collect(),
            plot_positions: self.plot_positions.clone(),
        }
    }
}

/// Weibull plotting positions `1 - i/(N+1)` for ranks `i = 1..=N`, written as
/// `(N+1-i)/(N+1)` so each value is correctly rounded.
pub fn weibull_positions(n: usize) -> Vec<f64> {
    let n1 = (n + 1) as f64;
    (1..=n).map(|i| (n + 1 - i) as f64 / n1).collect()
}

pub fn build_ccdf(samples: &[IncomeSample]) -> Result<EmpiricalCcdf> {
    let incomes: Vec<f64> = samples.iter().map(|s| s.income).collect();
    EmpiricalCcdf::from_incomes(&incomes)
}

/// Largest deviation between plotting positions and a model CCDF at the
/// sample points.
pub fn ks_distance<S: Survival + ?Sized>(ecdf: &EmpiricalCcdf, model: &S) -> f64 {
    ecdf.sorted_incomes
        .iter()
        .zip(&ecdf.plot_positions)
        .map(|(&m, &p)| (p - model.survival(m)).abs())
        .fold(0.0, f64::max)
}

/// Local log-log slopes from a sliding least-squares window.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeProfile {
    /// `(center income, slope)` for each usable window.
    pub points: Vec<(f64, f64)>,
    /// Windows skipped for zero income spread or non-positive incomes.
    pub skipped: usize,
}

pub fn local_log_slope(ecdf: &EmpiricalCcdf, window: usize) -> Result<SlopeProfile> {
    if window < 3 || window > ecdf.len() {
        return Err(Error::Precondition(format!(
            "slope window must lie in [3, {}], got {window}",
            ecdf.len()
        )));
    }
    let xs: Vec<f64> = ecdf.sorted_incomes.iter().map(|m| m.ln()).collect();
    let ys: Vec<f64> = ecdf.plot_positions.iter().map(|p| p.ln()).collect();
    let mut points = Vec::with_capacity(ecdf.len() - window + 1);
    let mut skipped = 0;
    for start in 0..=ecdf.len() - window {
        let x = &xs[start..start + window];
        let y = &ys[start..start + window];
        if !x[0].is_finite() {
            skipped += 1;
            continue;
        }
        match ols(x, y) {
            Some(fit) => points.push((ecdf.sorted_incomes[start + window / 2], fit.slope)),
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("local_log_slope: skipped {skipped} degenerate windows");
    }
    Ok(SlopeProfile { points, skipped })
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
    pub r_squared: f64,
    pub n: usize,
}

/// Fits `y = intercept + slope x`. `None` for fewer than 3 points or zero
/// spread in `x`.
pub fn ols(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 3 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = (syy - slope * sxy).max(0.0);
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    let slope_std_error = (ssr / (nf - 2.0) / sxx).sqrt();
    Some(LineFit {
        slope,
        intercept,
        slope_std_error,
        r_squared,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn three_point_positions() {
        let e = EmpiricalCcdf::from_incomes(&[30.0, 10.0, 20.0]).unwrap();
        assert_eq!(e.sorted_incomes(), &[10.0, 20.0, 30.0]);
        assert_eq!(e.plot_positions(), &[0.75, 0.5, 0.25]);
    }

    #[test]
    fn single_sample_rejected() {
        assert!(build_ccdf(&[IncomeSample::survey(1.0)]).is_err());
        assert!(EmpiricalCcdf::from_incomes(&[]).is_err());
    }

    #[test]
    fn duplicates_keep_distinct_positions() {
        let e = EmpiricalCcdf::from_incomes(&[5.0, 5.0, 5.0, 1.0]).unwrap();
        assert_eq!(e.len(), 4);
        assert_eq!(e.plot_positions(), &[0.8, 0.6, 0.4, 0.2]);
    }

    #[test]
    fn ks_against_constant_model() {
        let e = EmpiricalCcdf::from_incomes(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_relative_eq!(
            ks_distance(&e, &|_m: f64| 1.0),
            4.0 / 5.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn ks_ignores_input_order() {
        let a = EmpiricalCcdf::from_incomes(&[3.0, 1.0, 2.0, 9.0]).unwrap();
        let b = EmpiricalCcdf::from_incomes(&[9.0, 2.0, 1.0, 3.0]).unwrap();
        let model = |m: f64| (-m / 3.0).exp();
        assert_eq!(ks_distance(&a, &model), ks_distance(&b, &model));
    }

    #[test]
    fn ks_zero_when_model_interpolates() {
        let e = EmpiricalCcdf::from_incomes(&[1.0, 2.0, 3.0]).unwrap();
        let model = |m: f64| 1.0 - m / 4.0;
        assert!(ks_distance(&e, &model) < 1e-15);
    }

    #[test]
    fn power_law_slope_is_constant() {
        // incomes whose Weibull positions are exactly (m/m_s)^-2
        let n = 200;
        let incomes: Vec<f64> = (1..=n)
            .map(|i| (1.0 - i as f64 / (n + 1) as f64).powf(-0.5) * 10.0)
            .collect();
        let e = EmpiricalCcdf::from_incomes(&incomes).unwrap();
        let prof = local_log_slope(&e, 11).unwrap();
        assert_eq!(prof.skipped, 0);
        for (_, s) in prof.points {
            assert_relative_eq!(s, -2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn exponential_slope_steepens() {
        let n = 300;
        let t = 37e3;
        let incomes: Vec<f64> = (1..=n)
            .map(|i| 1e3 - t * (1.0 - i as f64 / (n + 1) as f64).ln())
            .collect();
        let e = EmpiricalCcdf::from_incomes(&incomes).unwrap();
        let prof = local_log_slope(&e, 5).unwrap();
        assert!(prof.points.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn degenerate_windows_skipped() {
        let e = EmpiricalCcdf::from_incomes(&[2.0, 2.0, 2.0, 2.0, 3.0, 4.0]).unwrap();
        let prof = local_log_slope(&e, 3).unwrap();
        assert_eq!(prof.skipped, 2);
        assert_eq!(prof.points.len(), 2);
        assert!(local_log_slope(&e, 2).is_err());
        assert!(local_log_slope(&e, 7).is_err());
    }

    #[test]
    fn source_round_trips_through_text() {
        for s in [Source::Survey, Source::RichList] {
            assert_eq!(s.to_string().parse::<Source>().unwrap(), s);
        }
        assert!("forbes".parse::<Source>().is_err());
    }
}
