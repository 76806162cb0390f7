//! `levy`: command-line front end for `levy-core`.
//!
//! Exit codes: 0 success or pass, 1 usage or compute error, 2 bracket
//! violation or failed experiment, 3 inconclusive experiment.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use levy_core::exponent::CharacteristicExponent;
use levy_core::mc::{exits_with, occupation_with, stream_key, PathSimulator};
use levy_core::potential::{ball_potential, capacity_estimate, kernel_bracket, kernel_bracket_sbm};
use levy_core::verify::standard_certificate;
use levy_core::{
    catalog, certificate_for, pruitt_h, psi_from_spec, verify_all, ExperimentConfig,
    ExperimentOptions, PathConfig, PotentialBracket, ProcessSpec, Verdict, VerifyOptions,
    EXPERIMENTS,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "levy",
    version,
    about = "Potential theory and Monte Carlo checks for isotropic unimodal Lévy processes"
)]
struct Cli {
    /// Process specification: a JSON file, or the name of a catalog entry.
    #[arg(long, global = true)]
    spec: Option<String>,
    /// Dimension; overrides the one in the specification (default 3).
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for all stochastic output; a fresh one is chosen and printed when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of Monte Carlo replicas.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Time step: absolute for `simulate`, in units of 1/ψ*(1/r) for `experiment`.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Small-jump cutoff (default min(0.01, r/100)).
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Comma-separated radii or arguments.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    r: Vec<f64>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Verb {
    /// List the built-in specifications for dimension --d.
    Catalog,
    /// ψ0(r) and ψ*(r).
    Psi,
    /// Weak lower scaling certificate of ψ*.
    Wlsc {
        /// Lower end θ of the certified range; 0 asks for a global certificate.
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
    },
    /// Pruitt function h(r) next to ψ*(1/r).
    Pruitt,
    /// Ball potential G(B_r) with its bracket.
    Potential,
    /// Potential kernel G(x) at |x| = r with its bracket.
    Kernel,
    /// Capacity of B_r with its bracket.
    Capacity,
    /// Exit records (or the occupation histogram) of B_r, r = first --r value.
    Simulate {
        /// Start point, comma separated (default: the origin).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x0: Vec<f64>,
        /// Emit the occupation histogram instead of exit records.
        #[arg(long)]
        occupation: bool,
    },
    /// Monte Carlo experiment; always writes a JSON report.
    Experiment {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(EXPERIMENTS))]
        name: String,
    },
    /// Every analytic bracket check; without --spec, the whole catalog.
    Verify,
}

/// How a successful run ended.
enum Outcome {
    Ok,
    Violation,
    Inconclusive,
}

impl Outcome {
    fn code(&self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::Violation => 2,
            Outcome::Inconclusive => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(o) => ExitCode::from(o.code()),
        // A closed downstream pipe (`levy ... | head`) is not a failure.
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn broken_pipe(e: &anyhow::Error) -> bool {
    use std::io::ErrorKind::BrokenPipe;
    e.chain().any(|c| {
        let io = c.downcast_ref::<std::io::Error>().map(|io| io.kind());
        let json = c
            .downcast_ref::<serde_json::Error>()
            .and_then(|j| j.io_error_kind());
        let csv = c
            .downcast_ref::<csv::Error>()
            .and_then(|ce| match ce.kind() {
                csv::ErrorKind::Io(io) => Some(io.kind()),
                _ => None,
            });
        [io, json, csv].contains(&Some(BrokenPipe))
    })
}

fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match &cli.verb {
        Verb::Catalog => cmd_catalog(cli),
        Verb::Psi => cmd_psi(cli),
        Verb::Wlsc { theta } => cmd_wlsc(cli, *theta),
        Verb::Pruitt => cmd_pruitt(cli),
        Verb::Potential | Verb::Kernel | Verb::Capacity => cmd_bracket(cli),
        Verb::Simulate { x0, occupation } => cmd_simulate(cli, x0, *occupation),
        Verb::Experiment { name } => cmd_experiment(cli, name),
        Verb::Verify => cmd_verify(cli),
    }
}

fn dimension(cli: &Cli) -> usize {
    cli.d.unwrap_or(3)
}

fn load_spec(cli: &Cli) -> Result<ProcessSpec> {
    let Some(arg) = &cli.spec else {
        bail!("--spec is required for this verb");
    };
    let path = Path::new(arg);
    let spec = if path.exists() {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec =
            ProcessSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
        match cli.d {
            Some(d) => spec.with_dimension(d)?,
            None => spec,
        }
    } else {
        catalog(dimension(cli))?
            .into_iter()
            .find(|s| s.name == *arg)
            .ok_or_else(|| anyhow!("'{arg}' is neither a file nor a catalog name"))?
    };
    Ok(spec)
}

fn radii(cli: &Cli, default: &[f64]) -> Result<Vec<f64>> {
    let r = if cli.r.is_empty() {
        default.to_vec()
    } else {
        cli.r.clone()
    };
    if let Some(bad) = r.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        bail!("--r values must be positive and finite, got {bad}");
    }
    Ok(r)
}

fn seed(cli: &Cli) -> u64 {
    cli.seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn output(cli: &Cli) -> Result<Box<dyn Write>> {
    Ok(match &cli.out {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Shortest decimal that reads back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Writes `rows` as CSV, or as a JSON array of objects keyed by `header`.
fn emit_rows(cli: &Cli, header: &[&str], rows: &[Vec<Value>]) -> Result<()> {
    let mut out = output(cli)?;
    match cli.format {
        Format::Json => {
            let objs: Vec<Value> = rows
                .iter()
                .map(|row| {
                    Value::Object(
                        header
                            .iter()
                            .map(|h| h.to_string())
                            .zip(row.iter().cloned())
                            .collect(),
                    )
                })
                .collect();
            serde_json::to_writer_pretty(&mut out, &objs)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(header)?;
            for row in rows {
                w.write_record(row.iter().map(cell))?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    Ok(())
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_i64() && !n.is_u64() => num(x),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

fn emit_json(cli: &Cli, value: &impl serde::Serialize) -> Result<()> {
    let mut out = output(cli)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn f(x: f64) -> Value {
    // JSON has no non-finite numbers; those become null.
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn cmd_catalog(cli: &Cli) -> Result<Outcome> {
    let specs = catalog(dimension(cli))?;
    let rows: Vec<Vec<Value>> = specs
        .iter()
        .map(|s| {
            vec![
                json!(s.name),
                json!(s.document().kind),
                json!(s.d()),
                json!(s.is_sbm()),
                json!(s.fingerprint()),
            ]
        })
        .collect();
    match cli.format {
        Format::Json => emit_json(cli, &specs.iter().map(|s| s.document()).collect::<Vec<_>>())?,
        Format::Csv => emit_rows(
            cli,
            &["name", "kind", "d", "subordinate_bm", "fingerprint"],
            &rows,
        )?,
    }
    Ok(Outcome::Ok)
}

fn exponent(cli: &Cli) -> Result<(ProcessSpec, CharacteristicExponent)> {
    let spec = load_spec(cli)?;
    let exp = psi_from_spec(&spec)?;
    Ok((spec, exp))
}

fn cmd_psi(cli: &Cli) -> Result<Outcome> {
    let (_, exp) = exponent(cli)?;
    let mut rows = Vec::new();
    for r in radii(cli, &[1.0])? {
        rows.push(vec![f(r), f(exp.try_psi0(r)?), f(exp.psi_star(r))]);
    }
    emit_rows(cli, &["r", "psi0", "psi_star"], &rows)?;
    Ok(Outcome::Ok)
}

fn cmd_wlsc(cli: &Cli, theta: f64) -> Result<Outcome> {
    if !(theta >= 0.0 && theta.is_finite()) {
        bail!("--theta must be a finite non-negative number");
    }
    let (_, exp) = exponent(cli)?;
    let cert = certificate_for(&exp, theta);
    match cli.format {
        Format::Json => emit_json(cli, &cert)?,
        Format::Csv => emit_rows(
            cli,
            &["beta", "theta", "C", "slack", "verified"],
            &[vec![
                f(cert.beta),
                f(cert.theta),
                f(cert.c),
                f(cert.slack),
                json!(cert.verified),
            ]],
        )?,
    }
    Ok(Outcome::Ok)
}

fn cmd_pruitt(cli: &Cli) -> Result<Outcome> {
    let (spec, exp) = exponent(cli)?;
    let mut rows = Vec::new();
    for r in radii(cli, &[0.1, 1.0, 10.0])? {
        let h = pruitt_h(&spec, r)?;
        let ps = exp.psi_star(1.0 / r);
        rows.push(vec![f(r), f(h), f(ps), f(h / ps)]);
    }
    emit_rows(cli, &["r", "h", "psi_star_inv_r", "ratio"], &rows)?;
    Ok(Outcome::Ok)
}

fn cmd_bracket(cli: &Cli) -> Result<Outcome> {
    let (spec, exp) = exponent(cli)?;
    let cert = standard_certificate(&exp);
    let mut brackets: Vec<PotentialBracket> = Vec::new();
    let default: &[f64] = match cli.verb {
        Verb::Kernel => &[0.1, 1.0, 10.0],
        _ => &[0.5, 1.0, 2.0],
    };
    for r in radii(cli, default)? {
        brackets.push(match cli.verb {
            Verb::Potential => ball_potential(&spec, &exp, r)?,
            Verb::Capacity => capacity_estimate(&spec, &exp, r)?,
            _ if spec.is_sbm() => kernel_bracket_sbm(&spec, &exp, Some(&cert), r)?,
            _ => kernel_bracket(&exp, Some(&cert), r)?,
        });
    }
    match cli.format {
        Format::Json => emit_json(cli, &brackets)?,
        Format::Csv => {
            let rows: Vec<Vec<Value>> = brackets
                .iter()
                .map(|b| {
                    vec![
                        f(b.at),
                        b.lower.map_or(Value::Null, f),
                        b.estimate.map_or(Value::Null, f),
                        f(b.upper),
                        json!(b.violated),
                        json!(b.method),
                    ]
                })
                .collect();
            emit_rows(
                cli,
                &["r_or_x", "lower", "estimate", "upper", "violated", "method"],
                &rows,
            )?;
        }
    }
    Ok(if brackets.iter().any(|b| b.violated) {
        Outcome::Violation
    } else {
        Outcome::Ok
    })
}

fn cmd_simulate(cli: &Cli, x0: &[f64], occupation: bool) -> Result<Outcome> {
    let spec = load_spec(cli)?;
    let d = spec.d();
    let r = radii(cli, &[1.0])?[0];
    let x0 = if x0.is_empty() {
        vec![0.0; d]
    } else {
        x0.to_vec()
    };
    let defaults = PathConfig::default();
    let cfg = PathConfig {
        dt: cli.dt.unwrap_or(defaults.dt),
        eps: cli.eps.unwrap_or_else(|| PathConfig::default_eps(r)),
        seed: seed(cli),
        n: cli.n.unwrap_or(defaults.n),
        max_steps: defaults.max_steps,
    };
    cfg.validate()?;
    let sim = PathSimulator::from_config(&spec, &cfg)?;
    if occupation {
        let occ = occupation_with(&sim, r, &x0, 16, cfg.n, stream_key(cfg.seed, 4))?;
        if occ.censored > 0 {
            eprintln!("censored paths: {}", occ.censored);
        }
        match cli.format {
            Format::Json => emit_json(cli, &occ)?,
            Format::Csv => {
                let mut header = vec!["cell_index"];
                header.extend(["cx", "cy", "cz"].iter().take(d));
                header.push("mass");
                let rows: Vec<Vec<Value>> = occ
                    .cells()
                    .map(|(i, c, m)| {
                        let mut row = vec![json!(i)];
                        row.extend(c.into_iter().map(f));
                        row.push(f(m));
                        row
                    })
                    .collect();
                emit_rows(cli, &header, &rows)?;
            }
        }
        return Ok(Outcome::Ok);
    }
    let batch = exits_with(&sim, &x0, r, cfg.n, stream_key(cfg.seed, 1))?;
    if batch.censored > 0 {
        eprintln!("censored paths: {}", batch.censored);
    }
    match cli.format {
        Format::Json => emit_json(cli, &batch)?,
        Format::Csv => {
            let coords: Vec<String> = (1..=d).map(|i| format!("exit_x{i}")).collect();
            let mut header = vec!["replica", "tau"];
            header.extend(coords.iter().map(String::as_str));
            header.push("jumped");
            let rows: Vec<Vec<Value>> = batch
                .records
                .iter()
                .map(|e| {
                    let mut row = vec![json!(e.replica), f(e.tau)];
                    row.extend(e.exit.iter().copied().map(f));
                    row.push(json!(e.jumped));
                    row
                })
                .collect();
            emit_rows(cli, &header, &rows)?;
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_experiment(cli: &Cli, name: &str) -> Result<Outcome> {
    let spec = load_spec(cli)?;
    let defaults = ExperimentConfig::default();
    let cfg = ExperimentConfig {
        seed: seed(cli),
        n: cli.n.unwrap_or(defaults.n),
        dt: cli.dt.unwrap_or(defaults.dt),
        eps: cli.eps,
        max_steps: defaults.max_steps,
    };
    let report = ExperimentOptions::defaults(name, &spec)?
        .with_radii(&cli.r)
        .run(&spec, &cfg)?;
    let mut out = output(cli)?;
    writeln!(out, "{}", report.to_json())?;
    out.flush()?;
    eprintln!(
        "verdict: {}",
        serde_json::to_value(report.verdict)?
            .as_str()
            .unwrap_or("?")
    );
    Ok(match report.verdict {
        Verdict::Pass => Outcome::Ok,
        Verdict::Fail => Outcome::Violation,
        Verdict::Inconclusive => Outcome::Inconclusive,
    })
}

fn cmd_verify(cli: &Cli) -> Result<Outcome> {
    let specs = match cli.spec {
        Some(_) => vec![load_spec(cli)?],
        None => catalog(dimension(cli))?,
    };
    let report = verify_all(&specs, &VerifyOptions::default());
    match cli.format {
        Format::Json => emit_json(cli, &report)?,
        Format::Csv => {
            let rows: Vec<Vec<Value>> = report
                .checks
                .iter()
                .map(|c| {
                    vec![
                        json!(c.spec),
                        json!(c.check),
                        json!(c.points),
                        json!(c.violations),
                        f(c.worst_margin),
                        json!(c.passed()),
                        json!(c.errored),
                        json!(c.skipped.clone().unwrap_or_default()),
                        json!(c.detail.clone().unwrap_or_default()),
                    ]
                })
                .collect();
            emit_rows(
                cli,
                &[
                    "spec",
                    "check",
                    "points",
                    "violations",
                    "worst_margin",
                    "passed",
                    "errored",
                    "skipped",
                    "detail",
                ],
                &rows,
            )?;
        }
    }
    eprintln!(
        "{} checks over {} specifications, {} violations{}",
        report.checks.len(),
        specs.len(),
        report.violations(),
        if report.errored() {
            ", with errors"
        } else {
            ""
        }
    );
    if report.violations() > 0 {
        Ok(Outcome::Violation)
    } else if report.errored() {
        bail!("some checks could not be evaluated")
    } else {
        Ok(Outcome::Ok)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 6.02e23, -2.5] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(cell(&f(0.5)), "0.5");
        assert_eq!(cell(&json!(7)), "7");
        assert_eq!(cell(&Value::Null), "");
    }
}
