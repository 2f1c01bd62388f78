//! `incomedist`: merge, fit, evaluate, sample and simulate income distributions.

mod run;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use incomedist::distribution::ModelCcdf;
use incomedist::empirical::{
    build_ccdf, ks_distance, local_log_slope, EmpiricalCcdf, IncomeSample,
};
use incomedist::fit::fit_pipeline;
use incomedist::ingest::{
    load_samples, load_wealth, merge, merge_datasets, write_samples, InputSchema, MergeConfig,
};
use incomedist::kv::{effective_params, fmt_num, KvMap};
use incomedist::model::effective_from_micro;
use incomedist::sim::{run_samples, SimConfig, StationaryHistogram};
use incomedist::{Error, ErrorClass, Result};

use run::Run;

#[derive(Parser)]
#[command(name = "incomedist", version, about)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Key-value settings file; a run manifest replays that run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Crossover m0 (fit override or model parameter).
    #[arg(long, global = true)]
    m0: Option<f64>,
    /// Threshold m1 (fit override or model parameter).
    #[arg(long, global = true)]
    m1: Option<f64>,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Join survey incomes with rich-list wealth differences.
    Merge {
        #[arg(long)]
        survey: Option<String>,
        #[arg(long)]
        wealth: Option<String>,
        #[arg(long)]
        fx_rate: Option<f64>,
        #[arg(long)]
        year_from: Option<i32>,
        #[arg(long)]
        year_to: Option<i32>,
        /// Skip the search and use this factor.
        #[arg(long)]
        scale_factor: Option<f64>,
    },
    /// Three-step fit of an income sample.
    Fit {
        #[arg(long)]
        samples: Option<String>,
    },
    /// Tabulate density and CCDF of a parameter set.
    Eval {
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        m_max: Option<f64>,
    },
    /// Draw incomes from a parameter set.
    Sample {
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run the Langevin ensemble and bin the stationary incomes.
    Simulate {
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        n_walkers: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        burn_in: Option<u64>,
        #[arg(long)]
        sample_every: Option<u64>,
        #[arg(long)]
        total_samples: Option<usize>,
    },
    /// Local log-log slope of an empirical CCDF.
    Slope {
        #[arg(long)]
        samples: Option<String>,
        #[arg(long)]
        window: Option<usize>,
    },
}

fn flag<T: ToString>(kv: &mut KvMap, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        kv.set(key, v.to_string());
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(match e.class() {
                ErrorClass::Parse => 2,
                ErrorClass::Precondition => 3,
                ErrorClass::Numeric => 4,
            })
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let config = match &g.config {
        Some(p) => KvMap::read(p)?,
        None => KvMap::new(),
    };
    let mut flags = KvMap::new();
    flag(&mut flags, "seed", &g.seed);
    flag(&mut flags, "m0", &g.m0);
    flag(&mut flags, "m1", &g.m1);

    let (name, params_flag): (&'static str, Option<&String>) = match &cli.command {
        Command::Merge {
            survey,
            wealth,
            fx_rate,
            year_from,
            year_to,
            scale_factor,
        } => {
            flag(&mut flags, "survey", survey);
            flag(&mut flags, "wealth", wealth);
            flag(&mut flags, "fx_rate", fx_rate);
            flag(&mut flags, "year_from", year_from);
            flag(&mut flags, "year_to", year_to);
            flag(&mut flags, "scale_factor", scale_factor);
            ("merge", None)
        }
        Command::Fit { samples } => {
            flag(&mut flags, "samples", samples);
            ("fit", None)
        }
        Command::Eval {
            params,
            points,
            m_max,
        } => {
            flag(&mut flags, "points", points);
            flag(&mut flags, "m_max", m_max);
            ("eval", params.as_ref())
        }
        Command::Sample { params, n } => {
            flag(&mut flags, "n", n);
            ("sample", params.as_ref())
        }
        Command::Simulate {
            params,
            n_walkers,
            dt,
            burn_in,
            sample_every,
            total_samples,
        } => {
            flag(&mut flags, "n_walkers", n_walkers);
            flag(&mut flags, "dt", dt);
            flag(&mut flags, "burn_in", burn_in);
            flag(&mut flags, "sample_every", sample_every);
            flag(&mut flags, "total_samples", total_samples);
            ("simulate", params.as_ref())
        }
        Command::Slope { samples, window } => {
            flag(&mut flags, "samples", samples);
            flag(&mut flags, "window", window);
            ("slope", None)
        }
    };

    // the parameter file sits between the config file and explicit flags
    if let Some(p) = params_flag {
        flags.set("params", p);
    }
    let params_path = flags
        .get("params")
        .or(config.get("params"))
        .map(str::to_string);
    let params = match &params_path {
        Some(p) => KvMap::read(p)?,
        None => KvMap::new(),
    };
    let mut run = Run::new(name, &[config, params, flags], g.out_dir.clone())?;
    if params_path.is_some() {
        run.input("params")?;
    }

    match name {
        "merge" => cmd_merge(&mut run)?,
        "fit" => cmd_fit(&mut run)?,
        "eval" => cmd_eval(&mut run)?,
        "sample" => cmd_sample(&mut run)?,
        "simulate" => cmd_simulate(&mut run)?,
        "slope" => cmd_slope(&mut run)?,
        _ => unreachable!(),
    }
    run.finish()?;
    Ok(())
}

const SCHEMA_KEYS: &[&str] = &[
    "income_column",
    "year_column",
    "source_column",
    "id_column",
    "wealth_column",
    "currency_column",
    "max_malformed_fraction",
];
const EFFECTIVE_KEYS: &[&str] = &["T", "T1", "m0", "m1", "alpha", "alpha1", "m_init"];

fn schema(run: &mut Run) -> Result<InputSchema> {
    run.take(SCHEMA_KEYS);
    InputSchema::from_kv(run.settings())
}

fn samples_bytes(samples: &[IncomeSample]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_samples(&mut buf, samples)?;
    Ok(buf)
}

fn cmd_merge(run: &mut Run) -> Result<()> {
    let survey_path = run.require_input("survey")?;
    let wealth_path = run.input("wealth")?;
    let schema = schema(run)?;
    let (survey, _) = load_samples(&survey_path, &schema)?;
    let wealth = match wealth_path {
        Some(p) => load_wealth(&p, &schema)?.0,
        None => Vec::new(),
    };
    run.take(&["scale_factor"]);
    let (merged, report) = if wealth.is_empty() {
        let f = run.settings().parse_opt("scale_factor")?.unwrap_or(1.0);
        merge(&survey, &[], f)?
    } else {
        run.take(&["fx_rate", "year_from", "year_to"]);
        let cfg = MergeConfig::from_kv(run.settings())?;
        merge_datasets(&survey, &wealth, &cfg)?
    };
    run.write("merged.csv", &samples_bytes(&merged)?)?;
    let text = report.to_kv().to_text();
    run.write("merge_report.txt", text.as_bytes())?;
    print!("{text}");
    Ok(())
}

fn cmd_fit(run: &mut Run) -> Result<()> {
    let path = run.require_input("samples")?;
    let schema = schema(run)?;
    let (samples, _) = load_samples(&path, &schema)?;
    let overrides = match (run.opt("m0"), run.opt("m1")) {
        (None, None) => None,
        (Some(_), Some(_)) => Some((run.settings().require("m0")?, run.settings().require("m1")?)),
        _ => {
            return Err(Error::Parse(
                "crossover overrides need both m0 and m1".into(),
            ))
        }
    };
    let ecdf = build_ccdf(&samples)?;
    let report = fit_pipeline(&ecdf, overrides)?;
    let kv = report.to_kv().to_text();
    let block = report.to_delimited();
    run.write("fit_report.txt", kv.as_bytes())?;
    run.write("fit_report.tsv", block.as_bytes())?;
    print!("{kv}\n{block}");
    Ok(())
}

fn cmd_eval(run: &mut Run) -> Result<()> {
    run.take(EFFECTIVE_KEYS);
    let e = effective_params(run.settings())?;
    let points: usize = run
        .or_default("points", 200)
        .parse()
        .map_err(|_| Error::Parse("setting `points` is not a count".into()))?;
    if points < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 points, got {points}"
        )));
    }
    let top = if e.m1.is_finite() {
        e.m1
    } else {
        e.m0.max(e.t)
    };
    let m_max: f64 = run
        .or_default("m_max", 1e3 * top)
        .parse()
        .map_err(|_| Error::Parse("setting `m_max` is not a number".into()))?;
    let lo = 1e-3 * e.t.min(e.m0);
    if !(m_max - e.m_init > lo) {
        return Err(Error::InvalidParameter {
            name: "m_max",
            value: m_max,
            reason: "must lie above m_init",
        });
    }
    let model = ModelCcdf::new(e)?;
    let (l0, l1) = (lo.ln(), (m_max - e.m_init).ln());
    let mut grid = vec![e.m_init];
    grid.extend(
        (0..points - 1)
            .map(|i| e.m_init + (l0 + (l1 - l0) * i as f64 / (points - 2).max(1) as f64).exp()),
    );

    let mut table = String::from("m\tpdf\tccdf\n");
    let mut plot = String::from("m\tccdf\n");
    for &m in &grid {
        let pdf = model.density().pdf(m)?;
        let ccdf = model.ccdf(m)?;
        let _ = writeln!(table, "{}\t{}\t{}", fmt_num(m), fmt_num(pdf), fmt_num(ccdf));
        if m > 0.0 {
            let _ = writeln!(plot, "{}\t{}", fmt_num(m), fmt_num(ccdf));
        }
    }
    run.write("eval.tsv", table.as_bytes())?;
    run.write("eval_plot.tsv", plot.as_bytes())?;
    Ok(())
}

fn cmd_sample(run: &mut Run) -> Result<()> {
    run.take(EFFECTIVE_KEYS);
    let e = effective_params(run.settings())?;
    run.require("seed")?;
    run.or_default("n", 100_000);
    let seed: u64 = run.settings().require("seed")?;
    let n: usize = run.settings().require("n")?;
    let draws = ModelCcdf::new(e)?.sample(n, seed)?;
    let samples: Vec<IncomeSample> = draws.into_iter().map(IncomeSample::survey).collect();
    run.write("samples.csv", &samples_bytes(&samples)?)?;
    Ok(())
}

fn cmd_simulate(run: &mut Run) -> Result<()> {
    run.take(EFFECTIVE_KEYS);
    run.take(&["A0", "A0p", "a", "ap", "B0", "b", "gauge_b"]);
    run.take(&[
        "dt",
        "n_walkers",
        "burn_in",
        "sample_every",
        "total_samples",
        "start",
        "bins",
        "boundary",
    ]);
    run.require("seed")?;
    let cfg = SimConfig::from_kv(run.settings())?;
    let out = run_samples(&cfg)?;
    let hist = StationaryHistogram::from_samples(&out.samples, cfg.bins)?;
    let mut tsv = Vec::new();
    hist.write_tsv(&mut tsv)?;
    run.write("histogram.tsv", &tsv)?;

    let mut report = KvMap::new();
    report.set("samples", out.samples.len());
    report.set("aborted_walkers", out.aborted.len());
    report.set("dt", fmt_num(cfg.dt));
    let ks = effective_from_micro(&cfg.params)
        .and_then(ModelCcdf::new)
        .and_then(|model| {
            Ok(ks_distance(
                &EmpiricalCcdf::from_incomes(&out.samples)?,
                &model,
            ))
        });
    match ks {
        Ok(d) => report.set("ks_distance", fmt_num(d)),
        Err(e) => {
            log::warn!("no model CCDF for these coefficients: {e}");
            report.set("ks_distance", "none");
        }
    }
    let text = report.to_text();
    run.write("simulate_report.txt", text.as_bytes())?;
    print!("{text}");
    Ok(())
}

fn cmd_slope(run: &mut Run) -> Result<()> {
    let path = run.require_input("samples")?;
    let schema = schema(run)?;
    let (samples, _) = load_samples(&path, &schema)?;
    let window: usize = run
        .or_default("window", 101)
        .parse()
        .map_err(|_| Error::Parse("setting `window` is not a count".into()))?;
    let profile = local_log_slope(&build_ccdf(&samples)?, window)?;
    let mut out = String::from("m\tslope\n");
    for (m, s) in &profile.points {
        let _ = writeln!(out, "{}\t{}", fmt_num(*m), fmt_num(*s));
    }
    run.write("slope.tsv", out.as_bytes())?;
    Ok(())
}
