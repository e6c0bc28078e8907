//! Engine configuration files (TOML).
//!
//! Every table and key is optional; missing ones take the engine defaults,
//! so an empty file is a valid configuration. Unknown keys are rejected.

use std::fs;
use std::path::Path;

use txmotif_core::EngineConfig;

use crate::error::{CliError, Result};

pub fn parse(text: &str) -> Result<EngineConfig> {
    let config: EngineConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

pub fn load(path: &Path) -> Result<EngineConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Loads `path` if given, defaults otherwise.
pub fn load_or_default(path: Option<&Path>) -> Result<EngineConfig> {
    path.map_or_else(|| Ok(EngineConfig::default()), load)
}

pub fn to_toml(config: &EngineConfig) -> String {
    toml::to_string_pretty(config).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use txmotif_core::Stat;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(parse("").unwrap(), EngineConfig::default());
    }

    #[test]
    fn partial_tables_keep_other_defaults() {
        let c = parse("[patterns]\nscatter_gather = 600\n[stats]\nenabled = [\"mean\", \"max\"]\n").unwrap();
        assert_eq!(c.patterns.scatter_gather, 600);
        assert_eq!(c.patterns.simple_cycle, EngineConfig::default().patterns.simple_cycle);
        assert_eq!(c.stats.enabled, vec![Stat::Mean, Stat::Max]);
        assert_eq!(c.stats.attributes, EngineConfig::default().stats.attributes);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = EngineConfig::default();
        c.cycles.temporal_max_length = Some(7);
        c.patterns.fan = Some(3600);
        assert_eq!(parse(&to_toml(&c)).unwrap(), c);
    }

    #[test]
    fn rejects_typos_and_bad_values() {
        assert!(matches!(parse("[patterns]\nscater_gather = 5\n"), Err(CliError::Config(_))));
        assert!(matches!(parse("[window]\ndelta = 0\n"), Err(CliError::Config(_))));
    }

    #[test]
    fn documented_example_is_the_default() {
        let text = include_str!("../../../docs/example-config.toml");
        assert_eq!(parse(text).unwrap(), EngineConfig::default());
    }
}
