//! Parameter sweeps over drive strength, gate duration, Lamb-Dicke parameter
//! or temperature, producing one CSV row per grid point and series.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::budget::AmplitudeSet;
use crate::config::{
    Axis, AxisSpec, DriveRule, DriveSpec, DriveUnit, Hold, Metric, Propagator, SeriesSpec,
    SweepConfig,
};
use crate::error::{Error, Result};
use crate::fidelity::{
    average_fidelity, bell_fidelity, ThermalWeights, DEFAULT_BELL_PHASE, DEFAULT_TARGET_ANGLE,
};
use crate::hilbert::Operator;
use crate::magnus::MagnusSeries;
use crate::params::{validate_with_pulse, GateParams};
use crate::pulses::PulseShape;
use crate::trotter::{propagate_numeric, TrotterConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub series: String,
    pub axis_value: f64,
    pub omega_t: f64,
    /// Average-gate infidelity per propagator.
    pub average: BTreeMap<Propagator, f64>,
    /// Bell-state infidelity per propagator.
    pub bell: BTreeMap<Propagator, f64>,
    pub amplitudes: AmplitudeSet,
    pub tail_mass: f64,
    /// Set when the point was skipped.
    pub status: Option<String>,
}

impl SweepRow {
    pub fn infidelity(&self, metric: Metric, p: Propagator) -> Option<f64> {
        match metric {
            Metric::Bell => self.bell.get(&p).copied(),
            _ => self.average.get(&p).copied(),
        }
    }

    pub fn is_skipped(&self) -> bool {
        self.status.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub axis: Axis,
    pub metric: Metric,
    pub rows: Vec<SweepRow>,
}

impl SweepOutput {
    pub fn series(&self, name: &str) -> impl Iterator<Item = &SweepRow> + '_ {
        let name = name.to_string();
        self.rows.iter().filter(move |r| r.series == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut header = vec![
            "series".to_string(),
            self.axis.as_str().to_string(),
            "omega_T".into(),
        ];
        header.extend(
            Propagator::ALL
                .iter()
                .map(|p| format!("infid_{}", p.as_str())),
        );
        if self.metric == Metric::Both {
            header.extend(
                Propagator::ALL
                    .iter()
                    .map(|p| format!("bell_{}", p.as_str())),
            );
        }
        header.extend(["omega_LD", "omega_2", "omega_4", "tail_mass", "status"].map(String::from));
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut fields = vec![row.series.clone(), num(row.axis_value), num(row.omega_t)];
            let primary = if self.metric == Metric::Bell {
                &row.bell
            } else {
                &row.average
            };
            fields.extend(Propagator::ALL.iter().map(|p| opt(primary.get(p).copied())));
            if self.metric == Metric::Both {
                fields.extend(
                    Propagator::ALL
                        .iter()
                        .map(|p| opt(row.bell.get(p).copied())),
                );
            }
            fields.push(num(row.amplitudes.omega_ld));
            fields.push(num(row.amplitudes.omega_2));
            fields.push(opt(row.amplitudes.omega_4));
            fields.push(num(row.tail_mass));
            fields.push(
                row.status
                    .as_deref()
                    .map(|s| format!("\"skip: {}\"", s.replace('"', "'")))
                    .unwrap_or_default(),
            );
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        String::new()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn check_grid(axis: Axis, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("sweep grid has non-finite values".into()));
    }
    let up = values.windows(2).all(|w| w[1] > w[0]);
    let down = values.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::Config("sweep grid is not strictly monotone".into()));
    }
    if axis == Axis::K && values.iter().any(|v| v.fract() != 0.0) {
        return Err(Error::Config("K grid values must be integers".into()));
    }
    Ok(())
}

/// Parameters at one grid point. On the `K` axis `K − L` is held fixed.
pub fn point_params(base: &GateParams, axis: Axis, value: f64) -> GateParams {
    let mut p = base.clone();
    match axis {
        Axis::Omega => p.omega_t = value,
        Axis::K => {
            let k = value as i64;
            p.l = k - (base.k - base.l);
            p.k = k;
        }
        Axis::Eta => p.eta = value,
        Axis::Nbar => p.nbar = value,
    }
    p
}

/// Gate time in µs used to convert MHz drives at a grid point.
fn gate_time_us(base: &GateParams, point: &GateParams, hold: Hold) -> Result<f64> {
    let source = match hold {
        Hold::TrapFreq => point,
        Hold::GateTime => base,
    };
    source
        .gate_time_us()
        .ok_or_else(|| Error::Config("MHz drive requires params.trap_freq".into()))
}

/// `ΩT` for one point, or a skip reason.
fn resolve_drive(
    spec: &AxisSpec,
    base: &GateParams,
    point: &GateParams,
    value: f64,
    drive: &DriveSpec,
    amps: &AmplitudeSet,
) -> Result<std::result::Result<f64, String>> {
    if spec.axis == Axis::Omega {
        return Ok(Ok(match spec.unit {
            DriveUnit::OmegaT => value,
            DriveUnit::Mhz => value * gate_time_us(base, base, Hold::GateTime)?,
        }));
    }
    drive_at(base, point, spec.hold, drive, amps)
}

/// `ΩT` prescribed by `drive` at `point`, or a reason it has no real value.
/// `base` supplies the gate time under [`Hold::GateTime`].
pub fn drive_at(
    base: &GateParams,
    point: &GateParams,
    hold: Hold,
    drive: &DriveSpec,
    amps: &AmplitudeSet,
) -> Result<std::result::Result<f64, String>> {
    Ok(match drive {
        DriveSpec::Rule(DriveRule::Omega2) => Ok(amps.omega_2),
        DriveSpec::Rule(DriveRule::OmegaLd) => Ok(amps.omega_ld),
        DriveSpec::Rule(DriveRule::Omega4) => {
            amps.omega_4.ok_or_else(|| "omega_4 is complex".to_string())
        }
        DriveSpec::OmegaT { omega_t } => Ok(*omega_t),
        DriveSpec::Mhz { mhz } => Ok(mhz * gate_time_us(base, point, hold)?),
    })
}

/// Requested propagators at `params.omega_t`. A pre-assembled Magnus series
/// is reused when given.
pub fn propagators_at(
    params: &GateParams,
    pulse: &PulseShape,
    props: &[Propagator],
    series: Option<&MagnusSeries>,
    trotter: &TrotterConfig,
) -> Result<Vec<(Propagator, Operator)>> {
    let max_order = props.iter().filter_map(|p| p.magnus_order()).max();
    let owned;
    let series = match (series, max_order) {
        (Some(s), Some(m)) if s.max_order >= m => Some(s),
        (_, Some(m)) => {
            owned = MagnusSeries::assemble(params, pulse, m)?;
            Some(&owned)
        }
        (_, None) => None,
    };
    let mut out = Vec::with_capacity(props.len());
    for &p in props {
        let u = match p.magnus_order() {
            Some(order) => {
                series
                    .expect("assembled above")
                    .propagator(params.omega_t, order)?
                    .matrix
            }
            None => propagate_numeric(params, pulse, trotter)?,
        };
        out.push((p, u));
    }
    Ok(out)
}

fn score(
    name: &str,
    value: f64,
    omega_t: f64,
    props: &[(Propagator, Operator)],
    weights: &ThermalWeights,
    metric: Metric,
    amplitudes: AmplitudeSet,
) -> SweepRow {
    let mut average = BTreeMap::new();
    let mut bell = BTreeMap::new();
    for (p, u) in props {
        if metric != Metric::Bell {
            average.insert(*p, 1.0 - average_fidelity(u, weights, DEFAULT_TARGET_ANGLE));
        }
        if metric != Metric::Average {
            bell.insert(*p, 1.0 - bell_fidelity(u, weights, DEFAULT_BELL_PHASE));
        }
    }
    SweepRow {
        series: name.to_string(),
        axis_value: value,
        omega_t,
        average,
        bell,
        amplitudes,
        tail_mass: weights.tail_mass,
        status: None,
    }
}

fn skipped(
    name: &str,
    value: f64,
    omega_t: f64,
    amplitudes: AmplitudeSet,
    reason: String,
) -> SweepRow {
    SweepRow {
        series: name.to_string(),
        axis_value: value,
        omega_t,
        average: BTreeMap::new(),
        bell: BTreeMap::new(),
        amplitudes,
        tail_mass: f64::NAN,
        status: Some(reason),
    }
}

fn run_series(
    base: &GateParams,
    spec: &AxisSpec,
    series: &SeriesSpec,
    values: &[f64],
) -> Result<Vec<SweepRow>> {
    let pulse = series.pulse.build()?;
    let name = series.name.clone().unwrap_or_else(|| pulse.name.clone());
    let trotter = TrotterConfig {
        safety: spec.safety,
        rule: spec.rule,
        ..TrotterConfig::default()
    };
    let mut props = series.propagators.clone();
    props.sort();
    props.dedup();

    // Structure-only parameters are shared along the omega and nbar axes.
    let shared = match spec.axis {
        Axis::Omega | Axis::Nbar => {
            let report = validate_with_pulse(
                &point_params(base, spec.axis, values[0]).with_omega_t(0.0),
                &pulse,
            );
            if report.is_valid() {
                let order = props.iter().filter_map(|p| p.magnus_order()).max();
                Some(
                    order
                        .map(|m| MagnusSeries::assemble(base, &pulse, m))
                        .transpose()?,
                )
            } else {
                None
            }
        }
        _ => None,
    };
    let shared_nbar = match (spec.axis, &shared) {
        (Axis::Nbar, Some(series_opt)) => {
            let amps = AmplitudeSet::new(base);
            match resolve_drive(spec, base, base, values[0], &series.drive, &amps)? {
                Ok(w) => {
                    let p = base.clone().with_omega_t(w);
                    Some((
                        w,
                        propagators_at(&p, &pulse, &props, series_opt.as_ref(), &trotter)?,
                    ))
                }
                Err(_) => None,
            }
        }
        _ => None,
    };

    values
        .par_iter()
        .map(|&value| -> Result<SweepRow> {
            let point = point_params(base, spec.axis, value);
            let amps = AmplitudeSet::new(&point);
            let omega_t = match resolve_drive(spec, base, &point, value, &series.drive, &amps)? {
                Ok(w) => w,
                Err(reason) => return Ok(skipped(&name, value, f64::NAN, amps, reason)),
            };
            let point = point.with_omega_t(omega_t);
            let report = validate_with_pulse(&point, &pulse);
            if !report.is_valid() {
                return Ok(skipped(&name, value, omega_t, amps, report.summary()));
            }
            let weights = ThermalWeights::new(point.nbar, point.n_dim);
            if let Some((_, us)) = &shared_nbar {
                return Ok(score(
                    &name,
                    value,
                    omega_t,
                    us,
                    &weights,
                    spec.metric,
                    amps,
                ));
            }
            let cached = shared.as_ref().and_then(|s| s.as_ref());
            let us = propagators_at(&point, &pulse, &props, cached, &trotter)?;
            Ok(score(
                &name,
                value,
                omega_t,
                &us,
                &weights,
                spec.metric,
                amps,
            ))
        })
        .collect()
}

/// Runs every series of the config over its grid. Rows are ordered by
/// series, then grid position. Parallelism follows the current rayon pool.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput> {
    let spec = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("missing [sweep] table".into()))?;
    let values = spec.grid.values();
    check_grid(spec.axis, &values)?;
    let mut rows = Vec::new();
    for series in config.series_or_default() {
        rows.extend(run_series(&config.params, spec, &series, &values)?);
    }
    Ok(SweepOutput {
        axis: spec.axis,
        metric: spec.metric,
        rows,
    })
}
