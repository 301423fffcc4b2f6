//! TOML run configuration. Every key is optional; command-line flags take
//! precedence over file values, which take precedence over built-in defaults.

use std::path::Path;

use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub uncertainty: UncertaintySection,
    #[serde(default)]
    pub colony: ColonySection,
    #[serde(default)]
    pub search: SearchSection,
    #[serde(default)]
    pub growth: GrowthSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintySection {
    pub fractions: Option<Vec<f64>>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColonySection {
    pub alpha: Option<f64>,
    pub ants: Option<usize>,
    pub window: Option<usize>,
    /// Seconds.
    pub time_limit: Option<f64>,
    pub batches: Option<usize>,
    pub seed: Option<u64>,
    /// `linear` or `canonical`.
    pub rule: Option<String>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub tau_floor: Option<f64>,
    pub eta_floor: Option<f64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub epsilon: Option<f64>,
    /// Seconds.
    pub rins_time: Option<f64>,
    pub oracle_cap: Option<f64>,
    pub all_bands: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthSection {
    pub periods: Option<usize>,
    pub demand_growth: Option<f64>,
    pub cost_discount: Option<f64>,
    pub paths: Option<usize>,
    pub jitter: Option<f64>,
    pub seed: Option<u64>,
    pub module_size: Option<f64>,
}

pub const CONFIG_ENV: &str = "MPND_CONFIG";

impl FileConfig {
    pub fn parse(text: &str) -> Result<FileConfig, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Reads `explicit`, else the file named by `MPND_CONFIG`, else returns
    /// the empty configuration.
    pub fn load(explicit: Option<&Path>) -> Result<FileConfig, String> {
        let path = match explicit {
            Some(p) => p.to_path_buf(),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => p.into(),
                _ => return Ok(FileConfig::default()),
            },
        };
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        FileConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_section() {
        let cfg = FileConfig::parse(
            r#"
[uncertainty]
fractions = [-0.1, 0.0, 0.1]
upper = [0.0, 1.0, 0.2]

[colony]
ants = 50
rule = "canonical"
beta = 2.0

[search]
rins_time = 2.5

[growth]
periods = 3
"#,
        )
        .unwrap();
        assert_eq!(cfg.uncertainty.fractions.as_deref(), Some(&[-0.1, 0.0, 0.1][..]));
        assert_eq!(cfg.colony.ants, Some(50));
        assert_eq!(cfg.search.rins_time, Some(2.5));
        assert_eq!(cfg.growth.periods, Some(3));
        assert_eq!(cfg.colony.alpha, None);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(FileConfig::parse("[colony]\nantz = 3\n").is_err());
        assert!(FileConfig::parse("[extra]\n").is_err());
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(FileConfig::parse("").unwrap(), FileConfig::default());
    }
}
