//! Bundled scenario documents.

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};

pub const BUNDLED: &[(&str, &str)] = &[
    ("g0", include_str!("../scenarios/g0.toml")),
    ("g1-bs12", include_str!("../scenarios/g1-bs12.toml")),
    ("g2-formanek-procesi", include_str!("../scenarios/g2-formanek-procesi.toml")),
    ("g3-sol-amalgam", include_str!("../scenarios/g3-sol-amalgam.toml")),
    ("g4-bs-amalgam", include_str!("../scenarios/g4-bs-amalgam.toml")),
    ("g5-loose", include_str!("../scenarios/g5-loose.toml")),
    ("oneedge", include_str!("../scenarios/oneedge.toml")),
    ("seemexp", include_str!("../scenarios/seemexp.toml")),
    ("sol-lattice", include_str!("../scenarios/sol-lattice.toml")),
    ("free-haagerup", include_str!("../scenarios/free-haagerup.toml")),
    ("z2-rd", include_str!("../scenarios/z2-rd.toml")),
];

pub fn ids() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(id, _)| *id)
}

pub fn source(id: &str) -> Result<&'static str> {
    BUNDLED.iter().find(|(i, _)| *i == id).map(|(_, s)| *s).ok_or_else(|| Error::UnknownScenario(id.to_string()))
}

pub fn load(id: &str) -> Result<ScenarioConfig> {
    ScenarioConfig::from_toml(source(id)?)
}
