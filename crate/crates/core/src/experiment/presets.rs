//! Shipped experiment configurations, embedded from `presets/*.toml`.

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// `(name, TOML source)` for every preset.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2a", include_str!("../../presets/fig2a.toml")),
    ("fig2b", include_str!("../../presets/fig2b.toml")),
    ("fig3a", include_str!("../../presets/fig3a.toml")),
    ("fig3b", include_str!("../../presets/fig3b.toml")),
    ("fig4a", include_str!("../../presets/fig4a.toml")),
    ("fig4b", include_str!("../../presets/fig4b.toml")),
    ("fig5a", include_str!("../../presets/fig5a.toml")),
    ("fig5b", include_str!("../../presets/fig5b.toml")),
    ("ex2-ssa-a", include_str!("../../presets/ex2-ssa-a.toml")),
    ("ex2-ssa-b", include_str!("../../presets/ex2-ssa-b.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset_source(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| {
            let known: Vec<&str> = preset_names().collect();
            Error::Config(vec![format!("preset: unknown name `{name}` (known: {})", known.join(", "))])
        })
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml_str(preset_source(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_resolves() {
        for name in preset_names() {
            let cfg = preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.name.as_deref(), Some(name));
            cfg.resolve().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(matches!(preset("fig9z"), Err(Error::Config(_))));
    }
}
