//! Unit-annotated quantities in config files, normalized to SI.

use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Time,
    Diffusivity,
}

impl Dimension {
    /// Divisor taking the unit to SI; dividing by an exact power of ten
    /// keeps "20 um" identical to the literal `20e-6`.
    fn divisor(self, unit: &str) -> Option<f64> {
        let unit = unit.trim();
        match self {
            Dimension::Length => match unit {
                "m" => Some(1.0),
                "mm" => Some(1e3),
                "um" | "µm" | "μm" => Some(1e6),
                "nm" => Some(1e9),
                _ => None,
            },
            Dimension::Time => match unit {
                "s" => Some(1.0),
                "ms" => Some(1e3),
                "us" | "µs" | "μs" => Some(1e6),
                _ => None,
            },
            Dimension::Diffusivity => match unit {
                "m^2/s" | "m2/s" => Some(1.0),
                "um^2/s" | "um2/s" | "µm^2/s" | "μm^2/s" => Some(1e12),
                _ => None,
            },
        }
    }

    fn expected(self) -> &'static str {
        match self {
            Dimension::Length => "m, mm, um, nm",
            Dimension::Time => "s, ms, us",
            Dimension::Diffusivity => "m^2/s, um^2/s",
        }
    }
}

/// A config value: either a bare number (already SI) or `"<number> <unit>"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl From<f64> for Quantity {
    fn from(v: f64) -> Self {
        Quantity::Number(v)
    }
}

/// Parse a quantity into SI units. The error message does not include the
/// field path; callers prefix it.
pub fn to_si(q: &Quantity, dim: Dimension) -> Result<f64, String> {
    let text = match q {
        Quantity::Number(v) => return Ok(*v),
        Quantity::Text(t) => t.trim(),
    };
    let split = text
        .char_indices()
        .find(|&(i, c)| {
            // the exponent marker of "1e-9" belongs to the number
            c.is_alphabetic() && !(matches!(c, 'e' | 'E') && text[i + 1..].starts_with(|n: char| n.is_ascii_digit() || n == '-' || n == '+'))
                || c == 'µ'
                || c == 'μ'
        })
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    let (num, unit) = text.split_at(split);
    let value: f64 = num.trim().parse().map_err(|_| format!("cannot read a number from {text:?}"))?;
    if unit.trim().is_empty() {
        return Err(format!("{text:?} needs a unit ({})", dim.expected()));
    }
    let divisor = dim
        .divisor(unit)
        .ok_or_else(|| format!("unknown unit {:?} in {text:?} (expected one of {})", unit.trim(), dim.expected()))?;
    Ok(value / divisor)
}
