use std::io::Write;

use serde::Serialize;
use tensorinf_core::inference::EntryFloor;
use tensorinf_simlab::{run_monte_carlo_with_threads, SimConfig, SimReport, SummaryStats, TruthMode};

use crate::args::{SimArgs, SimFormat, TruthArg};
use crate::error::{CliError, CliResult};
use crate::output::{emit, json_bytes};

pub fn parse_floor(s: &str) -> CliResult<EntryFloor> {
    match s {
        "log-p" => Ok(EntryFloor::LogP),
        "off" => Ok(EntryFloor::Off),
        _ => match s.parse::<f64>() {
            Ok(f) if f >= 0.0 && f.is_finite() => Ok(EntryFloor::Fixed(f)),
            _ => Err(CliError::argument(format!("invalid floor '{s}' (log-p, off, or a nonnegative number)"))),
        },
    }
}

pub fn config_from_args(a: &SimArgs) -> CliResult<SimConfig> {
    let mut c = SimConfig::new(a.kind.parse()?, a.p, a.r, a.gamma, a.reps);
    c.sigma = a.sigma;
    c.n = a.n;
    c.alpha = a.alpha;
    c.seed = a.seed;
    c.init = a.init.parse()?;
    c.noise = a.noise.parse()?;
    c.truth = match a.truth {
        TruthArg::Redraw => TruthMode::Redraw,
        TruthArg::Fixed => TruthMode::Fixed,
    };
    c.component = a.component;
    c.localized = a.localized;
    c.floor = a.floor.as_deref().map(parse_floor).transpose()?;
    Ok(c.resolved()?)
}

#[derive(Serialize)]
struct CsvHeader<'a> {
    generator: &'a str,
    seed: u64,
    config: &'a SimConfig,
    summary: &'a SummaryStats,
}

/// One row per replicate, preceded by a `#` line holding the resolved
/// configuration and summary as JSON.
fn csv_bytes(report: &SimReport) -> CliResult<Vec<u8>> {
    let mut out = Vec::new();
    let header = CsvHeader {
        generator: &report.generator,
        seed: report.seed,
        config: &report.config,
        summary: &report.summary,
    };
    writeln!(out, "# {}", serde_json::to_string(&header)?)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["replicate", "oracle", "plug_in", "raw", "covered", "sigma_ratio", "max_sin_theta", "error"])?;
    let r = &report.replicates;
    let num = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
    for i in 0..r.len() {
        w.write_record([
            i.to_string(),
            num(r.oracle[i]),
            num(r.plug_in[i]),
            num(r.raw[i]),
            r.covered[i].map(|b| b.to_string()).unwrap_or_default(),
            num(r.sigma_ratio[i]),
            num(r.max_sin_theta[i]),
            r.errors[i].clone().unwrap_or_default(),
        ])?;
    }
    w.into_inner().map_err(|e| CliError { category: "io", message: e.to_string() })
}

pub fn run(a: &SimArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let config = config_from_args(a)?;
    let report = run_monte_carlo_with_threads(&config, a.threads)?;
    let bytes = match a.format {
        SimFormat::Json => json_bytes(&report)?,
        SimFormat::Csv => csv_bytes(&report)?,
    };
    emit(&bytes, a.out.as_deref(), stdout)
}
