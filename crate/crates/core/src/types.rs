use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Male,
    Female,
}

impl Sex {
    /// Accepts `M`, `F`, `1`, `2`, `male`, `female` in any case.
    pub fn parse_code(code: &str) -> Option<Sex> {
        match code.trim().to_ascii_lowercase().as_str() {
            "m" | "1" | "male" => Some(Sex::Male),
            "f" | "2" | "female" => Some(Sex::Female),
            _ => None,
        }
    }

    /// Numeric code used by CDC and NHANES files.
    pub fn code(self) -> u8 {
        match self {
            Sex::Male => 1,
            Sex::Female => 2,
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            Sex::Male => "M",
            Sex::Female => "F",
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sex::Male => "male",
            Sex::Female => "female",
        })
    }
}

impl FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Sex::parse_code(s).ok_or_else(|| Error::invalid(format!("unknown sex code `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Weight,
    Stature,
    Bmi,
}

impl Measure {
    pub fn unit(self) -> &'static str {
        match self {
            Measure::Weight => "kg",
            Measure::Stature => "cm",
            Measure::Bmi => "kg/m²",
        }
    }

    /// Percentile levels charted for this measure.
    pub fn chart_levels(self) -> Vec<Level> {
        let mut levels: Vec<f64> = vec![3.0, 5.0, 10.0, 25.0, 50.0, 75.0, 90.0, 95.0, 97.0];
        if self == Measure::Bmi {
            levels.insert(6, 85.0);
        }
        levels.into_iter().map(Level).collect()
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Weight => "weight",
            Measure::Stature => "stature",
            Measure::Bmi => "bmi",
        })
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "weight" => Ok(Measure::Weight),
            "stature" | "height" => Ok(Measure::Stature),
            "bmi" => Ok(Measure::Bmi),
            _ => Err(Error::invalid(format!("unknown measure `{s}`"))),
        }
    }
}

/// A percentile level in the open interval (0, 100).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Level(pub f64);

impl Level {
    pub fn new(p: f64) -> Result<Level, Error> {
        if p.is_finite() && p > 0.0 && p < 100.0 {
            Ok(Level(p))
        } else {
            Err(Error::domain(format!("percentile level {p} outside (0, 100)")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Column name used in chart CSV files, e.g. `p97` or `p2.5`.
    pub fn column_name(self) -> String {
        format!("p{}", self.0)
    }

    pub fn parse_column(name: &str) -> Option<Level> {
        let rest = name.trim().strip_prefix('p').or_else(|| name.trim().strip_prefix('P'))?;
        rest.parse::<f64>().ok().and_then(|p| Level::new(p).ok())
    }

    pub(crate) fn same(self, other: Level) -> bool {
        (self.0 - other.0).abs() < 1e-9
    }
}

impl TryFrom<f64> for Level {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self, Self::Error> {
        Level::new(p)
    }
}

impl From<Level> for f64 {
    fn from(level: Level) -> f64 {
        level.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim().trim_start_matches(['p', 'P']);
        let p: f64 = trimmed
            .parse()
            .map_err(|_| Error::invalid(format!("bad percentile level `{s}`")))?;
        Level::new(p)
    }
}
