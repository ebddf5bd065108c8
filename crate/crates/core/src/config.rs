//! Sweep configuration files.
//!
//! Configs are TOML documents with a `[params]` table holding the
//! [`GateParams`] fields, a `[sweep]` table describing the grid, and zero or
//! more `[[series]]` entries, each a pulse with its drive rule and the
//! propagators to evaluate.
//!
//! ```toml
//! [params]
//! eta = 0.18
//! K = 28
//! L = 25
//! nbar = 0.02
//! trap_freq = 1.0e6
//!
//! [sweep]
//! axis = "omega"
//! grid = { start = 20.0, stop = 40.0, points = 61 }
//!
//! [[series]]
//! pulse = "rect"
//! propagators = ["U2", "U3", "U4", "Unum"]
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::params::GateParams;
use crate::pulses::PulseShape;
use crate::trotter::StepRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
pub enum Propagator {
    U2,
    U3,
    U4,
    U5,
    Unum,
}

impl Propagator {
    pub const ALL: [Propagator; 5] = [
        Propagator::U2,
        Propagator::U3,
        Propagator::U4,
        Propagator::U5,
        Propagator::Unum,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Propagator::U2 => "U2",
            Propagator::U3 => "U3",
            Propagator::U4 => "U4",
            Propagator::U5 => "U5",
            Propagator::Unum => "Unum",
        }
    }

    /// Magnus order, or `None` for the Trotter product.
    pub fn magnus_order(&self) -> Option<usize> {
        match self {
            Propagator::U2 => Some(2),
            Propagator::U3 => Some(3),
            Propagator::U4 => Some(4),
            Propagator::U5 => Some(5),
            Propagator::Unum => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Omega,
    #[serde(rename = "K")]
    K,
    Eta,
    Nbar,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::Omega => "omega",
            Axis::K => "K",
            Axis::Eta => "eta",
            Axis::Nbar => "nbar",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Average,
    Bell,
    Both,
}

/// Unit of drive values on the omega axis and of fixed drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
pub enum DriveUnit {
    #[default]
    #[serde(rename = "omega_T")]
    OmegaT,
    /// Angular `10⁶ rad/s`, converted with the gate time.
    #[serde(rename = "MHz")]
    Mhz,
}

/// Which physical quantity stays fixed when `K` is varied. Only matters for
/// drives given in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hold {
    #[default]
    TrapFreq,
    GateTime,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Range {
        start: f64,
        stop: f64,
        points: usize,
    },
    Values {
        values: Vec<f64>,
    },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Range {
                start,
                stop,
                points,
            } => match points {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n)
                    .map(|i| start + (stop - start) * i as f64 / (*n - 1) as f64)
                    .collect(),
            },
            Grid::Values { values } => values.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum DriveRule {
    #[serde(rename = "omega_2")]
    Omega2,
    #[serde(rename = "omega_4")]
    Omega4,
    #[serde(rename = "omega_LD", alias = "omega_ld")]
    OmegaLd,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DriveSpec {
    Rule(DriveRule),
    OmegaT {
        #[serde(rename = "omega_T")]
        omega_t: f64,
    },
    Mhz {
        #[serde(rename = "MHz")]
        mhz: f64,
    },
}

impl Default for DriveSpec {
    fn default() -> Self {
        DriveSpec::Rule(DriveRule::Omega2)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PulseSpec {
    Named(String),
    Custom {
        name: String,
        /// `(M, Re c_M, Im c_M)`
        coefficients: Vec<(i64, f64, f64)>,
    },
}

impl Default for PulseSpec {
    fn default() -> Self {
        PulseSpec::Named("rect".into())
    }
}

impl PulseSpec {
    pub fn build(&self) -> Result<PulseShape> {
        let shape = match self {
            PulseSpec::Named(name) => PulseShape::named(name)
                .ok_or_else(|| Error::Config(format!("unknown pulse shape '{name}'")))?,
            PulseSpec::Custom { name, coefficients } => {
                PulseShape::from_triples(name, coefficients)
            }
        };
        let report = shape.validate();
        if !report.is_valid() {
            return Err(Error::InvalidPulse(report.violations.join("; ")));
        }
        Ok(shape)
    }
}

fn default_propagators() -> Vec<Propagator> {
    vec![
        Propagator::U2,
        Propagator::U3,
        Propagator::U4,
        Propagator::Unum,
    ]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub name: Option<String>,
    #[serde(default)]
    pub pulse: PulseSpec,
    #[serde(default)]
    pub drive: DriveSpec,
    #[serde(default = "default_propagators")]
    pub propagators: Vec<Propagator>,
}

impl Default for SeriesSpec {
    fn default() -> Self {
        Self {
            name: None,
            pulse: PulseSpec::default(),
            drive: DriveSpec::default(),
            propagators: default_propagators(),
        }
    }
}

fn default_safety() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub axis: Axis,
    pub grid: Grid,
    #[serde(default)]
    pub unit: DriveUnit,
    #[serde(default)]
    pub hold: Hold,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default)]
    pub rule: StepRule,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub params: GateParams,
    pub sweep: Option<AxisSpec>,
    #[serde(default)]
    pub series: Vec<SeriesSpec>,
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The configured series, or a single rectangular series at `Ω₂`.
    pub fn series_or_default(&self) -> Vec<SeriesSpec> {
        if self.series.is_empty() {
            vec![SeriesSpec::default()]
        } else {
            self.series.clone()
        }
    }
}
