//! Flat `key = value` run configuration; command-line flags win over the file.

use std::collections::BTreeMap;
use std::path::Path;

use wasscov::inference::StatisticKind;
use wasscov::io::Config;
use wasscov::pipeline::{EstimationOptions, QuantileMethod};
use wasscov::Bandwidth;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeIndexMode {
    /// Use numeric component labels when they are equispaced.
    Auto,
    /// Numeric, equispaced component labels are required.
    Numeric,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub grid: usize,
    pub density_grid: usize,
    pub bandwidth: Bandwidth,
    pub method: QuantileMethod,
    pub support: Option<(f64, f64)>,
    pub component_supports: BTreeMap<String, (f64, f64)>,
    pub reps: usize,
    pub seed: u64,
    pub statistic: StatisticKind,
    pub time_index: TimeIndexMode,
    pub surface_grid: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            grid: wasscov::grid::DEFAULT_QUANTILE_GRID,
            density_grid: wasscov::grid::DEFAULT_DENSITY_GRID,
            bandwidth: Bandwidth::Silverman,
            method: QuantileMethod::Smoothed,
            support: None,
            component_supports: BTreeMap::new(),
            reps: 1000,
            seed: 0,
            statistic: StatisticKind::LogFrobenius,
            time_index: TimeIndexMode::Auto,
            surface_grid: 101,
        }
    }
}

/// Values given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub bandwidth: Option<Bandwidth>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub statistic: Option<StatisticKind>,
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

pub fn parse_bandwidth(s: &str) -> Result<Bandwidth, String> {
    if s == "auto" {
        return Ok(Bandwidth::Silverman);
    }
    match s.parse::<f64>() {
        Ok(h) if h > 0.0 && h.is_finite() => Ok(Bandwidth::Fixed(h)),
        _ => Err(format!("bandwidth must be `auto` or a positive number, got `{s}`")),
    }
}

fn parse_support(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("support must be `lower,upper`, got `{s}`"))?;
    let (a, b): (f64, f64) = match (a.trim().parse(), b.trim().parse()) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return Err(format!("support bounds in `{s}` are not numbers")),
    };
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(format!("support `{s}` needs finite lower < upper"));
    }
    Ok((a, b))
}

fn parse_count(key: &str, v: &str, min: usize) -> Result<usize, String> {
    match v.parse::<usize>() {
        Ok(n) if n >= min => Ok(n),
        _ => Err(format!("{key} must be an integer >= {min}, got `{v}`")),
    }
}

impl Settings {
    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "grid" => self.grid = parse_count(key, value, 3)?,
            "density_grid" => self.density_grid = parse_count(key, value, 3)?,
            "bandwidth" => self.bandwidth = parse_bandwidth(value)?,
            "method" => {
                self.method = match value {
                    "smoothed" => QuantileMethod::Smoothed,
                    "empirical" => QuantileMethod::Empirical,
                    _ => return Err(format!("method must be `smoothed` or `empirical`, got `{value}`")),
                }
            }
            "support" => self.support = Some(parse_support(value)?),
            "reps" => self.reps = parse_count(key, value, 1)?,
            "seed" => self.seed = value.parse().map_err(|_| format!("seed must be a nonnegative integer, got `{value}`"))?,
            "statistic" => self.statistic = value.parse().map_err(|e: wasscov::Error| e.to_string())?,
            "time_index" => {
                self.time_index = match value {
                    "auto" => TimeIndexMode::Auto,
                    "numeric" => TimeIndexMode::Numeric,
                    "none" => TimeIndexMode::None,
                    _ => return Err(format!("time_index must be `auto`, `numeric` or `none`, got `{value}`")),
                }
            }
            "surface_grid" => self.surface_grid = parse_count(key, value, 2)?,
            _ => match key.strip_prefix("support.") {
                Some(component) if !component.is_empty() => {
                    self.component_supports.insert(component.to_string(), parse_support(value)?);
                }
                _ => return Err(format!("unknown setting `{key}`")),
            },
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut s = Settings::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected `key = value`", i + 1))?;
            s.set(k.trim(), v.trim()).map_err(|e| format!("config line {}: {e}", i + 1))?;
        }
        Ok(s)
    }

    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut s = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| usage(format!("cannot read config {}: {e}", p.display())))?;
                Settings::parse(&text).map_err(usage)?
            }
            None => Settings::default(),
        };
        if let Some(g) = overrides.grid {
            if g < 3 {
                return Err(usage(format!("--grid must be at least 3, got {g}")));
            }
            s.grid = g;
        }
        if let Some(b) = overrides.bandwidth {
            s.bandwidth = b;
        }
        if let Some(r) = overrides.reps {
            if r == 0 {
                return Err(usage("--reps must be at least 1".into()));
            }
            s.reps = r;
        }
        if let Some(seed) = overrides.seed {
            s.seed = seed;
        }
        if let Some(k) = overrides.statistic {
            s.statistic = k;
        }
        Ok(s)
    }

    pub fn estimation(&self) -> EstimationOptions {
        EstimationOptions {
            quantile_grid: self.grid,
            density_grid: self.density_grid,
            bandwidth: self.bandwidth,
            method: self.method,
            support: self.support,
            component_supports: self.component_supports.clone(),
        }
    }

    /// The settings in the same `key=value` vocabulary the file accepts.
    pub fn to_config(&self) -> Config {
        let mut c = Config::new();
        c.insert("grid".into(), self.grid.to_string());
        c.insert("density_grid".into(), self.density_grid.to_string());
        c.insert(
            "bandwidth".into(),
            match self.bandwidth {
                Bandwidth::Silverman => "auto".into(),
                Bandwidth::Fixed(h) => h.to_string(),
            },
        );
        c.insert(
            "method".into(),
            match self.method {
                QuantileMethod::Smoothed => "smoothed",
                QuantileMethod::Empirical => "empirical",
            }
            .into(),
        );
        if let Some((a, b)) = self.support {
            c.insert("support".into(), format!("{a},{b}"));
        }
        for (k, (a, b)) in &self.component_supports {
            c.insert(format!("support.{k}"), format!("{a},{b}"));
        }
        c.insert("reps".into(), self.reps.to_string());
        c.insert("seed".into(), self.seed.to_string());
        c.insert("statistic".into(), self.statistic.to_string());
        c.insert(
            "time_index".into(),
            match self.time_index {
                TimeIndexMode::Auto => "auto",
                TimeIndexMode::Numeric => "numeric",
                TimeIndexMode::None => "none",
            }
            .into(),
        );
        c.insert("surface_grid".into(), self.surface_grid.to_string());
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let s = Settings::parse("# comment\ngrid = 200\nbandwidth=0.5\nsupport.x = 0, 2\nstatistic=sqrt_distance\n").unwrap();
        assert_eq!(s.grid, 200);
        assert_eq!(s.bandwidth, Bandwidth::Fixed(0.5));
        assert_eq!(s.component_supports["x"], (0.0, 2.0));
        assert_eq!(s.statistic, StatisticKind::SqrtDistance);
        assert!(Settings::parse("grid=2").is_err());
        assert!(Settings::parse("colour=red").is_err());
        assert!(Settings::parse("support=3,1").is_err());
        assert!(Settings::parse("grid").is_err());
    }

    #[test]
    fn config_round_trips_through_text() {
        let mut s = Settings::parse("grid=50\nsupport=0,1\nsupport.a=-1,1\nmethod=empirical\ntime_index=none\n").unwrap();
        s.seed = 7;
        let text: String = s.to_config().iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        assert_eq!(Settings::parse(&text).unwrap(), s);
    }
}
