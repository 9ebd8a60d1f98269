//! Unit-tagged quantities in scenario files.
//!
//! A quantity is either a bare number, taken to be in SI units already, or a
//! string `"<number> <unit>"`. Each field declares its dimension, and only the
//! units of that dimension are accepted.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Dimensionless,
    Length,
    Time,
    Speed,
    Density,
    Flow,
    Rate,
    Wavenumber,
}

impl Dimension {
    fn si(self) -> &'static str {
        match self {
            Dimension::Dimensionless => "1",
            Dimension::Length => "m",
            Dimension::Time => "s",
            Dimension::Speed => "m/s",
            Dimension::Density => "veh/m",
            Dimension::Flow => "veh/s",
            Dimension::Rate => "1/s",
            Dimension::Wavenumber => "rad/m",
        }
    }

    /// Factor that converts one `unit` into SI, if the unit belongs here.
    fn factor(self, unit: &str) -> Option<f64> {
        let f = match (self, unit) {
            (Dimension::Dimensionless, "" | "1") => 1.0,
            (Dimension::Dimensionless, "%") => 0.01,
            (Dimension::Length, "m") => 1.0,
            (Dimension::Length, "km") => 1000.0,
            (Dimension::Time, "s") => 1.0,
            (Dimension::Time, "min") => 60.0,
            (Dimension::Time, "h") => 3600.0,
            (Dimension::Speed, "m/s") => 1.0,
            (Dimension::Speed, "km/h") => 1.0 / 3.6,
            (Dimension::Density, "veh/m") => 1.0,
            (Dimension::Density, "veh/km") => 1e-3,
            (Dimension::Flow, "veh/s") => 1.0,
            (Dimension::Flow, "veh/min") => 1.0 / 60.0,
            (Dimension::Flow, "veh/h") => 1.0 / 3600.0,
            (Dimension::Rate, "1/s" | "s^-1") => 1.0,
            (Dimension::Rate, "1/min") => 1.0 / 60.0,
            (Dimension::Wavenumber, "1/m" | "rad/m") => 1.0,
            (Dimension::Wavenumber, "1/km" | "rad/km") => 1e-3,
            _ => return None,
        };
        Some(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl Quantity {
    /// Value in SI units. `Err` carries a message naming the accepted units.
    pub fn to_si(&self, dim: Dimension) -> Result<f64, String> {
        match self {
            Quantity::Number(x) => Ok(*x),
            Quantity::Text(s) => {
                let s = s.trim();
                let split = s
                    .find(|c: char| c.is_whitespace() || c == '%')
                    .unwrap_or(s.len());
                let (num, unit) = s.split_at(split);
                let value: f64 = num
                    .parse()
                    .map_err(|_| format!("`{s}` does not start with a number"))?;
                let unit = unit.trim();
                dim.factor(unit).map(|f| value * f).ok_or_else(|| {
                    format!("unit `{unit}` is not a {dim:?} unit (SI: {})", dim.si())
                })
            }
        }
    }
}

impl From<f64> for Quantity {
    fn from(x: f64) -> Self {
        Quantity::Number(x)
    }
}
