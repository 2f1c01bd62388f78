//! Loading survey and rich-list files, turning wealth differences into incomes,
//! and merging the two populations with a gap-eliminating scale factor.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use crate::empirical::{IncomeSample, Source};
use crate::error::{Error, Result};
use crate::kv::KvMap;

/// Column names and tolerance for malformed rows.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSchema {
    pub income_column: String,
    pub year_column: String,
    pub source_column: String,
    pub id_column: String,
    pub wealth_column: String,
    pub currency_column: String,
    /// Loading fails when more than this fraction of rows is malformed.
    pub max_malformed_fraction: f64,
}

impl Default for InputSchema {
    fn default() -> Self {
        InputSchema {
            income_column: "income".into(),
            year_column: "year".into(),
            source_column: "source".into(),
            id_column: "id".into(),
            wealth_column: "wealth".into(),
            currency_column: "currency".into(),
            max_malformed_fraction: 0.01,
        }
    }
}

impl InputSchema {
    pub fn from_kv(kv: &KvMap) -> Result<Self> {
        let mut s = InputSchema::default();
        for (key, slot) in [
            ("income_column", &mut s.income_column),
            ("year_column", &mut s.year_column),
            ("source_column", &mut s.source_column),
            ("id_column", &mut s.id_column),
            ("wealth_column", &mut s.wealth_column),
            ("currency_column", &mut s.currency_column),
        ] {
            if let Some(v) = kv.get(key) {
                *slot = v.to_string();
            }
        }
        if let Some(f) = kv.parse_opt::<f64>("max_malformed_fraction")? {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::invalid(
                    "max_malformed_fraction",
                    f,
                    "must lie in [0, 1]",
                ));
            }
            s.max_malformed_fraction = f;
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub rows: usize,
    pub malformed: Vec<RowError>,
}

impl LoadReport {
    fn check(&self, max_fraction: f64, what: &str) -> Result<()> {
        if self.rows == 0 || self.malformed.is_empty() {
            return Ok(());
        }
        let frac = self.malformed.len() as f64 / self.rows as f64;
        if frac > max_fraction {
            let shown: Vec<String> = self
                .malformed
                .iter()
                .take(5)
                .map(|e| format!("line {}: {}", e.line, e.message))
                .collect();
            return Err(Error::Parse(format!(
                "{what}: {} of {} rows malformed; {}",
                self.malformed.len(),
                self.rows,
                shown.join("; ")
            )));
        }
        for e in &self.malformed {
            log::warn!("{what}: skipped line {}: {}", e.line, e.message);
        }
        Ok(())
    }
}

struct Table {
    headers: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn require_column(&self, name: &str) -> Result<usize> {
        self.column(name)
            .ok_or_else(|| Error::Parse(format!("missing required column `{name}`")))
    }
}

/// Comma- or tab-delimited text with a header row; the delimiter is taken from
/// the header line.
fn read_table(text: &str) -> Result<Option<Table>> {
    let header_line = match text.lines().find(|l| !l.trim().is_empty()) {
        Some(l) => l,
        None => return Ok(None),
    };
    let delimiter = if header_line.contains('\t') {
        b'\t'
    } else {
        b','
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(format!("header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, rec));
    }
    Ok(Some(Table { headers, rows }))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn field<'a>(rec: &'a csv::StringRecord, idx: Option<usize>) -> Option<&'a str> {
    idx.and_then(|i| rec.get(i)).filter(|s| !s.is_empty())
}

/// Parses income samples. The `income` column is required; `year` and `source`
/// are optional and `source` defaults to survey.
pub fn read_samples(text: &str, schema: &InputSchema) -> Result<(Vec<IncomeSample>, LoadReport)> {
    let mut report = LoadReport::default();
    let table = match read_table(text)? {
        Some(t) => t,
        None => return Ok((Vec::new(), report)),
    };
    let income_idx = table.require_column(&schema.income_column)?;
    let year_idx = table.column(&schema.year_column);
    let source_idx = table.column(&schema.source_column);

    let mut samples = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        report.rows += 1;
        let parsed = (|| -> std::result::Result<IncomeSample, String> {
            let raw = field(rec, Some(income_idx)).ok_or("missing income")?;
            let income: f64 = raw.parse().map_err(|_| format!("bad income `{raw}`"))?;
            if !income.is_finite() {
                return Err(format!("non-finite income `{raw}`"));
            }
            let source = match field(rec, source_idx) {
                Some(s) => s.parse::<Source>().map_err(|e| e.to_string())?,
                None => Source::Survey,
            };
            if income < 0.0 {
                return Err(format!("negative income {income}"));
            }
            if source == Source::RichList && income <= 0.0 {
                return Err(format!("rich-list income must be positive, got {income}"));
            }
            let year = match field(rec, year_idx) {
                Some(y) => Some(y.parse::<i32>().map_err(|_| format!("bad year `{y}`"))?),
                None => None,
            };
            Ok(IncomeSample {
                income,
                source,
                year,
            })
        })();
        match parsed {
            Ok(s) => samples.push(s),
            Err(message) => report.malformed.push(RowError {
                line: *line,
                message,
            }),
        }
    }
    report.check(schema.max_malformed_fraction, "income samples")?;
    Ok((samples, report))
}

pub fn load_samples(
    path: impl AsRef<Path>,
    schema: &InputSchema,
) -> Result<(Vec<IncomeSample>, LoadReport)> {
    read_samples(&read_text(path.as_ref())?, schema)
}

/// Writes `income,source,year` rows. Incomes use the shortest decimal form that
/// reads back to the identical value.
pub fn write_samples<W: Write>(mut out: W, samples: &[IncomeSample]) -> Result<()> {
    writeln!(out, "income,source,year")?;
    for s in samples {
        match s.year {
            Some(y) => writeln!(out, "{},{},{}", s.income, s.source, y)?,
            None => writeln!(out, "{},{},", s.income, s.source)?,
        }
    }
    Ok(())
}

/// Wealth of one rich-list entity across years.
#[derive(Debug, Clone, PartialEq)]
pub struct WealthRecord {
    pub entity_id: String,
    pub wealth_by_year: BTreeMap<i32, f64>,
    pub currency: String,
}

/// Parses `id, year, wealth, currency` rows into one record per entity, in order
/// of first appearance.
pub fn read_wealth(text: &str, schema: &InputSchema) -> Result<(Vec<WealthRecord>, LoadReport)> {
    let mut report = LoadReport::default();
    let table = match read_table(text)? {
        Some(t) => t,
        None => return Ok((Vec::new(), report)),
    };
    let id_idx = table.require_column(&schema.id_column)?;
    let year_idx = table.require_column(&schema.year_column)?;
    let wealth_idx = table.require_column(&schema.wealth_column)?;
    let currency_idx = table.require_column(&schema.currency_column)?;

    let mut records: Vec<WealthRecord> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (line, rec) in &table.rows {
        report.rows += 1;
        let parsed = (|| -> std::result::Result<(), String> {
            let id = field(rec, Some(id_idx)).ok_or("missing id")?;
            let y = field(rec, Some(year_idx)).ok_or("missing year")?;
            let year: i32 = y.parse().map_err(|_| format!("bad year `{y}`"))?;
            let w = field(rec, Some(wealth_idx)).ok_or("missing wealth")?;
            let wealth: f64 = w.parse().map_err(|_| format!("bad wealth `{w}`"))?;
            if !(wealth.is_finite() && wealth > 0.0) {
                return Err(format!("wealth must be positive, got {wealth}"));
            }
            let currency = field(rec, Some(currency_idx)).ok_or("missing currency")?;
            let i = *index.entry(id.to_string()).or_insert_with(|| {
                records.push(WealthRecord {
                    entity_id: id.to_string(),
                    wealth_by_year: BTreeMap::new(),
                    currency: currency.to_string(),
                });
                records.len() - 1
            });
            let r = &mut records[i];
            if r.currency != currency {
                return Err(format!(
                    "currency `{currency}` differs from `{}` for `{id}`",
                    r.currency
                ));
            }
            if r.wealth_by_year.insert(year, wealth).is_some() {
                return Err(format!("duplicate year {year} for `{id}`"));
            }
            Ok(())
        })();
        if let Err(message) = parsed {
            report.malformed.push(RowError {
                line: *line,
                message,
            });
        }
    }
    report.check(schema.max_malformed_fraction, "wealth records")?;
    Ok((records, report))
}

pub fn load_wealth(
    path: impl AsRef<Path>,
    schema: &InputSchema,
) -> Result<(Vec<WealthRecord>, LoadReport)> {
    read_wealth(&read_text(path.as_ref())?, schema)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WealthConversion {
    pub samples: Vec<IncomeSample>,
    pub dropped_nonpositive: usize,
    /// Entities lacking one of the two years.
    pub skipped_missing: Vec<String>,
}

/// Effective incomes `(wealth[year_to] - wealth[year_from]) * fx`; entities that
/// did not gain are dropped.
pub fn incomes_from_wealth(
    records: &[WealthRecord],
    year_from: i32,
    year_to: i32,
    fx: f64,
) -> Result<WealthConversion> {
    if !(fx.is_finite() && fx > 0.0) {
        return Err(Error::invalid(
            "fx_rate",
            fx,
            "exchange rate must be positive",
        ));
    }
    let mut out = WealthConversion::default();
    for r in records {
        let (Some(&from), Some(&to)) = (
            r.wealth_by_year.get(&year_from),
            r.wealth_by_year.get(&year_to),
        ) else {
            log::warn!(
                "`{}` lacks wealth for {year_from} or {year_to}; skipped",
                r.entity_id
            );
            out.skipped_missing.push(r.entity_id.clone());
            continue;
        };
        let income = (to - from) * fx;
        if income > 0.0 {
            out.samples.push(IncomeSample {
                income,
                source: Source::RichList,
                year: Some(year_to),
            });
        } else {
            out.dropped_nonpositive += 1;
        }
    }
    Ok(out)
}

/// Fraction of the joint sample examined by the gap score.
const TOP_FRACTION: f64 = 0.1;
const FACTOR_GRID: usize = 400;
const GOLDEN_ITERATIONS: usize = 60;

fn sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Top `k` of the union of two ascending lists, the second multiplied by `f`,
/// in descending order.
fn joint_top(survey: &[f64], rich: &[f64], f: f64, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k);
    let (mut i, mut j) = (survey.len(), rich.len());
    while out.len() < k && (i > 0 || j > 0) {
        let take_rich = match (i, j) {
            (0, _) => true,
            (_, 0) => false,
            _ => rich[j - 1] * f >= survey[i - 1],
        };
        if take_rich {
            j -= 1;
            out.push(rich[j] * f);
        } else {
            i -= 1;
            out.push(survey[i]);
        }
    }
    out
}

fn top_count(n: usize) -> usize {
    ((TOP_FRACTION * n as f64).ceil() as usize).clamp(3.min(n), n)
}

/// Departure of the joint top decile from a single straight log-log segment:
/// the residual sum of squares of `ln(position)` against `ln(income)`.
///
/// A horizontal gap in the CCDF and a pile-up from over-shrinking the rich list
/// both bend the joint tail, so the score is smallest where the two segments
/// continue each other. Inputs must be sorted ascending.
pub fn gap_score(survey: &[f64], rich: &[f64], f: f64) -> f64 {
    let n = survey.len() + rich.len();
    let k = top_count(n);
    let top = joint_top(survey, rich, f, k);
    let n1 = (n + 1) as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = top
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(r, &m)| (m.ln(), ((r + 1) as f64 / n1).ln()))
        .unzip();
    match crate::empirical::ols(&xs, &ys) {
        Some(fit) => (1.0 - fit.r_squared) * variance_sum(&ys),
        None => f64::INFINITY,
    }
}

fn variance_sum(y: &[f64]) -> f64 {
    let m = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| (v - m) * (v - m)).sum()
}

/// Largest `ln(m_(k+1) / m_(k))` between consecutive incomes in the top decile.
pub fn max_log_gap(incomes: &[f64]) -> f64 {
    let s = sorted(incomes.iter().copied());
    let k = top_count(s.len());
    s[s.len() - k..]
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| (w[1] / w[0]).ln())
        .fold(0.0, f64::max)
}

/// Scale factor for rich-list incomes that makes the joint CCDF continuous.
///
/// Returns 1 when the two samples already overlap. Otherwise scores 400
/// log-spaced factors in `[min(survey)/max(rich), 1]` with [`gap_score`], breaks
/// ties toward the larger factor and refines by golden-section search between
/// the neighbours of the best grid point.
pub fn find_scale_factor(survey: &[IncomeSample], rich: &[IncomeSample]) -> Result<f64> {
    if survey.is_empty() || rich.is_empty() {
        return Err(Error::Precondition(
            "scale factor search needs non-empty survey and rich-list samples".into(),
        ));
    }
    let s = sorted(survey.iter().map(|x| x.income));
    let r = sorted(rich.iter().map(|x| x.income));
    if s[s.len() - 1] >= r[0] {
        return Ok(1.0);
    }
    let s_min = s
        .iter()
        .copied()
        .find(|&v| v > 0.0)
        .unwrap_or(s[s.len() - 1]);
    let ln_lo = (s_min / r[r.len() - 1]).ln().min(0.0);
    if ln_lo == 0.0 {
        return Ok(1.0);
    }
    let ln_f = |i: usize| ln_lo * (1.0 - i as f64 / (FACTOR_GRID - 1) as f64);
    let score = |lf: f64| gap_score(&s, &r, lf.exp());

    let mut best = (0, f64::INFINITY);
    for i in 0..FACTOR_GRID {
        let v = score(ln_f(i));
        if v <= best.1 {
            best = (i, v);
        }
    }
    let (bi, bv) = best;
    let mut a = ln_f(bi.saturating_sub(1));
    let mut b = ln_f((bi + 1).min(FACTOR_GRID - 1));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (score(c), score(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = score(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = score(d);
        }
    }
    let (lf, v) = if fc < fd { (c, fc) } else { (d, fd) };
    Ok(if v < bv { lf.exp() } else { ln_f(bi).exp() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeReport {
    pub scale_factor: f64,
    /// Income range covered by both survey and scaled rich-list samples, if any.
    pub overlap_window: Option<(f64, f64)>,
    pub n_survey: usize,
    pub n_richlist_kept: usize,
    pub n_richlist_dropped_nonpositive: usize,
    pub exchange_rate_used: Option<f64>,
}

impl MergeReport {
    pub fn to_kv(&self) -> KvMap {
        use crate::kv::fmt_num;
        let mut kv = KvMap::new();
        kv.set("scale_factor", fmt_num(self.scale_factor));
        match self.overlap_window {
            Some((lo, hi)) => {
                kv.set("overlap_low", fmt_num(lo));
                kv.set("overlap_high", fmt_num(hi));
            }
            None => kv.set("overlap", "none"),
        }
        kv.set("n_survey", self.n_survey);
        kv.set("n_richlist_kept", self.n_richlist_kept);
        kv.set(
            "n_richlist_dropped_nonpositive",
            self.n_richlist_dropped_nonpositive,
        );
        if let Some(fx) = self.exchange_rate_used {
            kv.set("exchange_rate_used", fmt_num(fx));
        }
        kv
    }
}

/// Survey samples followed by rich-list samples multiplied by `f`.
pub fn merge(
    survey: &[IncomeSample],
    rich: &[IncomeSample],
    f: f64,
) -> Result<(Vec<IncomeSample>, MergeReport)> {
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::invalid("scale_factor", f, "must be positive"));
    }
    let mut out = survey.to_vec();
    out.extend(rich.iter().map(|s| IncomeSample {
        income: s.income * f,
        ..*s
    }));
    let range = |xs: &mut dyn Iterator<Item = f64>| {
        xs.fold(None, |acc: Option<(f64, f64)>, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    };
    let rs = range(&mut rich.iter().map(|s| s.income * f));
    let ss = range(&mut survey.iter().map(|s| s.income));
    let overlap_window = match (ss, rs) {
        (Some((s_lo, s_hi)), Some((r_lo, r_hi))) => {
            let (lo, hi) = (s_lo.max(r_lo), s_hi.min(r_hi));
            (lo <= hi).then_some((lo, hi))
        }
        _ => None,
    };
    let report = MergeReport {
        scale_factor: f,
        overlap_window,
        n_survey: survey.len(),
        n_richlist_kept: rich.len(),
        n_richlist_dropped_nonpositive: 0,
        exchange_rate_used: None,
    };
    Ok((out, report))
}

/// Settings for [`merge_datasets`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeConfig {
    pub fx_rate: f64,
    pub year_from: i32,
    pub year_to: i32,
    /// Skip the search and use this factor.
    pub scale_factor: Option<f64>,
}

impl MergeConfig {
    pub fn from_kv(kv: &KvMap) -> Result<Self> {
        Ok(MergeConfig {
            fx_rate: kv.require("fx_rate")?,
            year_from: kv.require("year_from")?,
            year_to: kv.require("year_to")?,
            scale_factor: kv.parse_opt("scale_factor")?,
        })
    }
}

/// Rich-list wealth differences to incomes, factor search, and merge.
pub fn merge_datasets(
    survey: &[IncomeSample],
    wealth: &[WealthRecord],
    cfg: &MergeConfig,
) -> Result<(Vec<IncomeSample>, MergeReport)> {
    let conv = incomes_from_wealth(wealth, cfg.year_from, cfg.year_to, cfg.fx_rate)?;
    let f = match cfg.scale_factor {
        Some(f) => f,
        None if conv.samples.is_empty() || survey.is_empty() => 1.0,
        None => find_scale_factor(survey, &conv.samples)?,
    };
    let (merged, mut report) = merge(survey, &conv.samples, f)?;
    report.n_richlist_dropped_nonpositive = conv.dropped_nonpositive;
    report.exchange_rate_used = Some(cfg.fx_rate);
    Ok((merged, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn record(id: &str, years: &[(i32, f64)]) -> WealthRecord {
        WealthRecord {
            entity_id: id.into(),
            wealth_by_year: years.iter().copied().collect(),
            currency: "USD".into(),
        }
    }

    #[test]
    fn wealth_difference_to_income() {
        let recs = [
            record("flat", &[(2006, 5.0), (2007, 5.0)]),
            record("gain", &[(2006, 4.0), (2007, 6.0)]),
            record("loss", &[(2006, 6.0), (2007, 4.0)]),
            record("new", &[(2007, 9.0)]),
        ];
        let c = incomes_from_wealth(&recs, 2006, 2007, 0.75).unwrap();
        assert_eq!(c.samples.len(), 1);
        assert_relative_eq!(c.samples[0].income, 1.5);
        assert_eq!(c.samples[0].source, Source::RichList);
        assert_eq!(c.dropped_nonpositive, 2);
        assert_eq!(c.skipped_missing, vec!["new".to_string()]);
        assert!(incomes_from_wealth(&recs, 2006, 2007, 0.0).is_err());
    }

    #[test]
    fn no_gap_gives_unit_factor() {
        let s: Vec<_> = [1.0, 2.0, 5.0].map(IncomeSample::survey).to_vec();
        let r: Vec<_> = [4.0, 8.0].map(IncomeSample::rich).to_vec();
        assert_eq!(find_scale_factor(&s, &r).unwrap(), 1.0);
        assert!(find_scale_factor(&[], &r).is_err());
        assert!(find_scale_factor(&s, &[]).is_err());
    }

    #[test]
    fn merge_preserves_values_and_provenance() {
        let s: Vec<_> = [1.0, 2.0, 3.0].map(IncomeSample::survey).to_vec();
        let (out, rep) = merge(&s, &[], 1.0).unwrap();
        assert_eq!(out, s);
        assert_eq!(rep.n_richlist_kept, 0);

        let r: Vec<_> = [200.0, 500.0].map(IncomeSample::rich).to_vec();
        let (out, rep) = merge(&s, &r, 0.01).unwrap();
        assert_eq!(out.len(), rep.n_survey + rep.n_richlist_kept);
        assert_eq!(&out[..3], &s[..]);
        assert_eq!(out[3].income, 200.0 * 0.01);
        assert!(out[3..].iter().all(|x| x.source == Source::RichList));
        assert_eq!(rep.overlap_window, Some((2.0, 3.0)));
        assert!(merge(&s, &r, 0.0).is_err());
    }

    #[test]
    fn reads_survey_with_row_errors() {
        let text = "income,year\n100.5,2007\n-3,2007\nabc,2007\n250,\n";
        let schema = InputSchema {
            max_malformed_fraction: 0.6,
            ..Default::default()
        };
        let (s, rep) = read_samples(text, &schema).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].year, Some(2007));
        assert_eq!(s[1].year, None);
        assert_eq!(rep.rows, 4);
        assert_eq!(
            rep.malformed.iter().map(|e| e.line).collect::<Vec<_>>(),
            vec![3, 4]
        );
        // default tolerance aborts
        let err = read_samples(text, &InputSchema::default()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn empty_file_is_empty_sample() {
        let (s, rep) = read_samples("", &InputSchema::default()).unwrap();
        assert!(s.is_empty());
        assert_eq!(rep, LoadReport::default());
    }

    #[test]
    fn reads_tab_delimited_wealth() {
        let text =
            "id\tyear\twealth\tcurrency\na\t2006\t4\tUSD\na\t2007\t6\tUSD\nb\t2006\t2\tUSD\n";
        let (recs, rep) = read_wealth(text, &InputSchema::default()).unwrap();
        assert!(rep.malformed.is_empty());
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].wealth_by_year.len(), 2);
        assert!(read_wealth("id,year\n", &InputSchema::default()).is_err());
    }

    #[test]
    fn written_samples_read_back_exactly() {
        let s = vec![
            IncomeSample {
                income: 123456.789012345,
                source: Source::Survey,
                year: Some(2007),
            },
            IncomeSample::rich(0.1 + 0.2),
        ];
        let mut buf = Vec::new();
        write_samples(&mut buf, &s).unwrap();
        let (back, _) =
            read_samples(std::str::from_utf8(&buf).unwrap(), &InputSchema::default()).unwrap();
        assert_eq!(back, s);
    }
}
