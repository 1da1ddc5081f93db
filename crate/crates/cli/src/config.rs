//! Run configuration: a JSON file, direct flags, or both (flags win).

use std::fmt;
use std::str::FromStr;

use cfkit::moments::MeasureSpec;
use serde::{Deserialize, Serialize};

/// `min:max:count`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        cfkit::disintegration::linspace(self.min, self.max, self.count)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, count] = parts[..] else {
            return Err(format!("grid '{s}' is not min:max:count"));
        };
        let min: f64 = min
            .trim()
            .parse()
            .map_err(|_| format!("bad grid minimum '{min}'"))?;
        let max: f64 = max
            .trim()
            .parse()
            .map_err(|_| format!("bad grid maximum '{max}'"))?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| format!("bad grid count '{count}'"))?;
        if !(min.is_finite() && max.is_finite()) || max < min {
            return Err(format!("grid '{s}' has an empty range"));
        }
        Ok(Grid { min, max, count })
    }
}

impl TryFrom<String> for Grid {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.count)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_order: Option<usize>,
    /// Point file for `score` (and the measure when none is given).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    /// Ascending coefficients of the polynomial for `maxdet` / `weighted-maxdet`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<f64>>>,
    /// Number of trailing coordinates conditioned on x (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditioned: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, String> {
        serde_json::from_str(text).map_err(|e| format!("config: {e}"))
    }

    /// Fields set in `other` replace ours.
    pub fn overlay(mut self, other: RunConfig) -> RunConfig {
        overlay!(
            self,
            other,
            measure,
            t,
            x,
            y,
            x_grid,
            y_grid,
            t_list,
            gamma,
            jitter,
            quad_order,
            input,
            poly,
            generators,
            conditioned,
            out
        );
        self
    }

    /// The configuration as echoed in outputs: everything but the output path.
    pub fn echo(&self) -> RunConfig {
        RunConfig {
            out: None,
            ..self.clone()
        }
    }
}

pub fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{p}' is not a number"))
        })
        .collect()
}

pub fn parse_degrees(s: &str) -> Result<Vec<usize>, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a
            .trim()
            .parse()
            .map_err(|_| format!("bad degree range '{s}'"))?;
        let b: usize = b
            .trim()
            .parse()
            .map_err(|_| format!("bad degree range '{s}'"))?;
        return Ok((a..=b).collect());
    }
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| format!("'{p}' is not a degree"))
        })
        .collect()
}

/// `lo:hi,lo:hi` per coordinate.
pub fn parse_box(s: &str) -> Result<Vec<[f64; 2]>, String> {
    s.split(',')
        .map(|side| {
            let (a, b) = side
                .split_once(':')
                .ok_or_else(|| format!("box side '{side}' is not lo:hi"))?;
            let a: f64 = a.trim().parse().map_err(|_| format!("bad bound '{a}'"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad bound '{b}'"))?;
            Ok([a, b])
        })
        .collect()
}

/// Polynomials separated by ';', coefficients by ','.
pub fn parse_polys(s: &str) -> Result<Vec<Vec<f64>>, String> {
    s.split(';').map(parse_reals).collect()
}
