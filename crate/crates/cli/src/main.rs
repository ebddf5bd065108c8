//! `msgate`: sweeps, error budgets, validity checks and propagator dumps
//! driven by TOML config files.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use msgate::budget::{
    extract_coefficients, generic_coefficient, render_csv, render_text, table_rows, AmplitudeSet,
};
use msgate::config::{Hold, Propagator, SeriesSpec, SweepConfig};
use msgate::magnus::MagnusSeries;
use msgate::params::{validate_with_pulse, CHECKS};
use msgate::sweep::{drive_at, propagators_at, run_sweep};
use msgate::trotter::TrotterConfig;
use msgate::{Error, GateParams};

#[derive(Parser)]
#[command(
    name = "msgate",
    version,
    about = "Magnus-expansion analysis of the Molmer-Sorensen gate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate infidelities over the configured grid and write CSV.
    Sweep(Common),
    /// Print the analytic error budget, optionally against the assembled terms.
    Budget {
        #[command(flatten)]
        common: Common,
        /// Emit CSV instead of a text table.
        #[arg(long)]
        csv: bool,
        /// Fock level of the diagonal rows.
        #[arg(long, default_value_t = 0)]
        level: usize,
    },
    /// Report every resonance-exclusion and range check.
    Check(Common),
    /// Dump propagator matrices as CSV of complex entries.
    Propagate(Common),
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for grid evaluation.
    #[arg(long)]
    workers: Option<usize>,
    /// Override the Fock-space dimension.
    #[arg(long)]
    ndim: Option<usize>,
    /// Override the sideband truncation.
    #[arg(long)]
    mmax: Option<usize>,
    /// Highest Magnus order evaluated.
    #[arg(long)]
    order: Option<usize>,
}

enum Failure {
    Config(String),
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidPulse(_) => Failure::Config(e.to_string()),
            Error::InvalidParams(_) | Error::ZeroBeatNote(_) | Error::ComplexAmplitude { .. } => {
                Failure::Validation(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl Common {
    fn load(&self) -> Result<SweepConfig, Failure> {
        if let Some(n) = self.workers {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global()
                .map_err(|e| Failure::Runtime(e.to_string()))?;
        }
        let mut cfg = SweepConfig::load(&self.config)?;
        if let Some(n) = self.ndim {
            cfg.params.n_dim = n;
        }
        if let Some(m) = self.mmax {
            cfg.params.m_max = m;
        }
        if let Some(k) = self.order {
            if !(2..=5).contains(&k) {
                return Err(Failure::Config(format!("--order {k} outside [2, 5]")));
            }
            for s in &mut cfg.series {
                s.propagators
                    .retain(|p| p.magnus_order().is_none_or(|o| o <= k));
            }
            if cfg.series.is_empty() {
                let mut s = SeriesSpec::default();
                s.propagators
                    .retain(|p| p.magnus_order().is_none_or(|o| o <= k));
                cfg.series.push(s);
            }
        }
        Ok(cfg)
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

/// Base parameters at the series drive, rejecting invalid points.
fn series_point(
    cfg: &SweepConfig,
    series: &SeriesSpec,
) -> Result<(GateParams, msgate::PulseShape), Failure> {
    let pulse = series.pulse.build()?;
    let amps = AmplitudeSet::new(&cfg.params);
    let omega_t = drive_at(
        &cfg.params,
        &cfg.params,
        Hold::TrapFreq,
        &series.drive,
        &amps,
    )?
    .map_err(Failure::Validation)?;
    let params = cfg.params.clone().with_omega_t(omega_t);
    let report = validate_with_pulse(&params, &pulse);
    if !report.is_valid() {
        return Err(Failure::Validation(report.summary()));
    }
    Ok((params, pulse))
}

fn sweep(common: &Common) -> Result<(), Failure> {
    let cfg = common.load()?;
    let out = run_sweep(&cfg)?;
    common.emit(&out.to_csv())?;
    if out.rows.iter().all(|r| r.is_skipped()) {
        return Err(Failure::Validation("every grid point was skipped".into()));
    }
    Ok(())
}

fn budget(common: &Common, csv: bool, level: usize) -> Result<(), Failure> {
    let cfg = common.load()?;
    let series = cfg.series_or_default().remove(0);
    let (params, pulse) = series_point(&cfg, &series)?;
    let amps = AmplitudeSet::new(&params);
    let rows = table_rows(&params, &amps, level);
    let mut text = if csv {
        render_csv(&rows)
    } else {
        render_text(&rows, &amps)
    };
    if let Some(order) = common.order {
        let assembled = MagnusSeries::assemble(&params, &pulse, order)?;
        let coeffs = extract_coefficients(&assembled, params.omega_t, level);
        text.push_str(if csv {
            "\nlabel,generic,assembled\n"
        } else {
            "\nassembled terms\n"
        });
        for (label, value) in coeffs {
            let generic = generic_coefficient(label, &params, params.omega_t, level);
            if csv {
                let _ = writeln!(text, "{label},{generic:.11e},{value:.11e}");
            } else {
                let _ = writeln!(
                    text,
                    "{:<10} {generic:>19.11e} {value:>19.11e}",
                    label.to_string()
                );
            }
        }
    }
    common.emit(&text)
}

fn check(common: &Common) -> Result<(), Failure> {
    let cfg = common.load()?;
    let mut text = String::new();
    let mut failed = false;
    for series in cfg.series_or_default() {
        let pulse = series.pulse.build()?;
        let report = validate_with_pulse(&cfg.params, &pulse);
        let _ = writeln!(
            text,
            "pulse {}",
            series.name.as_deref().unwrap_or(&pulse.name)
        );
        for name in CHECKS {
            let hits: Vec<String> = report
                .violations
                .iter()
                .filter(|v| v.check() == name)
                .map(|v| v.to_string())
                .collect();
            if hits.is_empty() {
                let _ = writeln!(text, "  pass  {name}");
            } else {
                failed = true;
                let _ = writeln!(text, "  FAIL  {name}: {}", hits.join("; "));
            }
        }
    }
    common.emit(&text)?;
    if failed {
        Err(Failure::Validation("parameter checks failed".into()))
    } else {
        Ok(())
    }
}

fn propagate(common: &Common) -> Result<(), Failure> {
    let cfg = common.load()?;
    let mut text = String::from("series,propagator,row,col,re,im\n");
    for series in cfg.series_or_default() {
        let (params, pulse) = series_point(&cfg, &series)?;
        let name = series.name.clone().unwrap_or_else(|| pulse.name.clone());
        let mut props = series.propagators.clone();
        props.sort();
        props.dedup();
        let us = propagators_at(&params, &pulse, &props, None, &TrotterConfig::default())?;
        for (p, u) in us {
            for ((r, c), z) in u.indexed_iter() {
                let _ = writeln!(
                    text,
                    "{name},{},{r},{c},{:.11e},{:.11e}",
                    Propagator::as_str(&p),
                    z.re,
                    z.im
                );
            }
        }
    }
    common.emit(&text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(c) => sweep(c),
        Command::Budget { common, csv, level } => budget(common, *csv, *level),
        Command::Check(c) => check(c),
        Command::Propagate(c) => propagate(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Config(msg)) | Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
