//! Batch front end: strict configs, presets, and CSV/JSON outputs for the chiral engines.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, CliError, Command};
pub use config::{parse_config, ConfigError, Engine, ExperimentConfig, Violation};

/// Committed config fixtures for the bundled runs.
pub const PRESETS: &[(&str, &str)] = &[
    ("undriven-chiral", include_str!("../presets/undriven-chiral.toml")),
    ("fig1", include_str!("../presets/fig1.toml")),
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
    ("fig9", include_str!("../presets/fig9.toml")),
    ("fig10", include_str!("../presets/fig10.toml")),
    ("fig11", include_str!("../presets/fig11.toml")),
    ("fig12", include_str!("../presets/fig12.toml")),
    ("fig13", include_str!("../presets/fig13.toml")),
    ("tableI", include_str!("../presets/tableI.toml")),
    ("tableII", include_str!("../presets/tableII.toml")),
    ("tableF1", include_str!("../presets/tableF1.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| n.eq_ignore_ascii_case(name)).map(|(_, t)| *t)
}
