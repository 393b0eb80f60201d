//! Flat key-value run configuration: file values first, flags on top.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hjdecay::data::InitialDatum;
use hjdecay::domain::{Grid1D, GridFunction, Interval};
use hjdecay::solver::TimeStep;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Every key a config file may carry. Commands read the keys they need and
/// ignore the rest, so one file can drive several commands.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub name: Option<String>,
    pub a: Option<f64>,
    pub p: Option<f64>,
    pub u0: Option<String>,
    pub n_cells: Option<usize>,
    pub t_end: Option<f64>,
    pub dt: Option<DtSetting>,
    pub record_every: Option<usize>,
    pub extinction_floor: Option<f64>,
    pub snapshots: Option<Vec<f64>>,
    pub oracle: Option<Oracle>,
    pub fit_from: Option<f64>,
    pub fit_to: Option<f64>,
    pub modes: Option<usize>,
    pub sweep: Option<bool>,
    pub a_from: Option<f64>,
    pub a_to: Option<f64>,
    pub a_steps: Option<usize>,
    pub n_dim: Option<usize>,
    pub only: Option<Vec<String>>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// `flag`, else `file`, else `default`.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// `dt` as written by the user: `"auto"` or a positive number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DtValue", into = "DtValue")]
pub enum DtSetting {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum DtValue {
    Number(f64),
    Word(String),
}

impl TryFrom<DtValue> for DtSetting {
    type Error = String;

    fn try_from(v: DtValue) -> Result<Self, String> {
        match v {
            DtValue::Number(x) => Ok(Self::Fixed(x)),
            DtValue::Word(w) => w.parse(),
        }
    }
}

impl From<DtSetting> for DtValue {
    fn from(d: DtSetting) -> Self {
        match d {
            DtSetting::Auto => DtValue::Word("auto".into()),
            DtSetting::Fixed(x) => DtValue::Number(x),
        }
    }
}

impl FromStr for DtSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        s.parse::<f64>().map(Self::Fixed).map_err(|_| format!("dt must be \"auto\" or a number, got {s:?}"))
    }
}

impl From<DtSetting> for TimeStep {
    fn from(d: DtSetting) -> Self {
        match d {
            DtSetting::Auto => TimeStep::Auto,
            DtSetting::Fixed(x) => TimeStep::Fixed(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Oracle {
    ColeHopf,
}

/// Initial datum: a built-in name or an `x,value` CSV file.
#[derive(Debug, Clone, PartialEq)]
pub enum U0Source {
    Named(InitialDatum),
    File(PathBuf),
}

impl FromStr for U0Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Ok(d) = s.parse::<InitialDatum>() {
            return Ok(Self::Named(d));
        }
        if s.ends_with(".csv") {
            return Ok(Self::File(PathBuf::from(s)));
        }
        Err(format!("u0 must be one of e1, bump, plateau, asym or a .csv file, got {s:?}"))
    }
}

impl fmt::Display for U0Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Named(d) => write!(f, "{d}"),
            Self::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl Serialize for U0Source {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl U0Source {
    /// Samples a named datum on (-1, 1), or reads the file (whose grid wins
    /// over `n_cells`).
    pub fn load(&self, n_cells: usize) -> Result<GridFunction, CliError> {
        match self {
            Self::Named(d) => Ok(d.sample(Grid1D::new(Interval::symmetric(), n_cells).map_err(CliError::invalid)?)),
            Self::File(path) => {
                let file = fs::File::open(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                GridFunction::read_csv(std::io::BufReader::new(file)).map_err(CliError::invalid)
            }
        }
    }
}

pub fn parse_u0(s: Option<String>) -> Result<Option<U0Source>, CliError> {
    s.map(|s| s.parse().map_err(CliError::Usage)).transpose()
}

/// Output directory: `--out`, then `HJDECAY_OUT`, then the config file,
/// then `hjdecay-out`.
pub fn out_dir(flag: Option<PathBuf>, file: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("HJDECAY_OUT").filter(|v| !v.is_empty()).map(PathBuf::from))
        .or(file)
        .unwrap_or_else(|| PathBuf::from("hjdecay-out"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dt_forms() {
        assert_eq!("auto".parse::<DtSetting>().unwrap(), DtSetting::Auto);
        assert_eq!("1e-4".parse::<DtSetting>().unwrap(), DtSetting::Fixed(1e-4));
        assert!("fast".parse::<DtSetting>().is_err());
        let c: FileConfig = toml::from_str("dt = \"auto\"").unwrap();
        assert_eq!(c.dt, Some(DtSetting::Auto));
        let c: FileConfig = toml::from_str("dt = 0.001").unwrap();
        assert_eq!(c.dt, Some(DtSetting::Fixed(0.001)));
        assert_eq!(serde_json::to_string(&DtSetting::Auto).unwrap(), "\"auto\"");
    }

    #[test]
    fn file_keys() {
        let c: FileConfig = toml::from_str("a = -1\np = 0.5\nu0 = \"plateau\"\nsnapshots = [0.5, 1]\n").unwrap();
        assert_eq!((c.a, c.p), (Some(-1.0), Some(0.5)));
        assert_eq!(c.snapshots, Some(vec![0.5, 1.0]));
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
    }

    #[test]
    fn u0_forms() {
        assert_eq!("bump".parse::<U0Source>().unwrap(), U0Source::Named(InitialDatum::Bump));
        assert!(matches!("data/u.csv".parse::<U0Source>().unwrap(), U0Source::File(_)));
        assert!("gauss".parse::<U0Source>().is_err());
    }

    #[test]
    fn precedence() {
        assert_eq!(pick(Some(1), Some(2), 3), 1);
        assert_eq!(pick(None, Some(2), 3), 2);
        assert_eq!(pick(None, None, 3), 3);
    }
}
