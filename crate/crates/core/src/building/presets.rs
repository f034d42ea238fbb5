//! Bundled building definitions, embedded at compile time so binaries run
//! without any data directory. The TOML sources under `presets/buildings/`
//! are the canonical copies; edit those, not this file.

use super::{BuildingError, BuildingModel};
use crate::scalar::Scalar;

const FIVE_ZONE: &str = include_str!("../../presets/buildings/five_zone.toml");
const TWO_ZONE_DATACENTER: &str =
    include_str!("../../presets/buildings/two_zone_datacenter.toml");

const PRESETS: [(&str, &str); 2] = [
    ("five_zone", FIVE_ZONE),
    ("two_zone_datacenter", TWO_ZONE_DATACENTER),
];

/// Names of every bundled building, in a stable order.
pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(name, _)| *name).collect()
}

/// Loads a bundled building by name.
pub fn preset<F: Scalar>(name: &str) -> Result<BuildingModel<F>, BuildingError> {
    for (candidate, text) in PRESETS {
        if candidate == name {
            return BuildingModel::from_toml_str(text);
        }
    }
    Err(BuildingError::UnknownPreset(
        name.to_string(),
        preset_names().join(", "),
    ))
}

/// Raw TOML text of a bundled building, for `presets` CLI output.
pub fn preset_toml(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(candidate, _)| *candidate == name)
        .map(|(_, text)| *text)
}
