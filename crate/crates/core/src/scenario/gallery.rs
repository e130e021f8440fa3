//! Scenarios shipped inside the binary.

use super::Scenario;
use crate::error::{Error, Result};

const BUNDLED: &[(&str, &str)] = &[
    ("sq_pi_flat_top", include_str!("../../scenarios/sq_pi_flat_top.toml")),
    ("sq_two_axis", include_str!("../../scenarios/sq_two_axis.toml")),
    ("sq_pi_sine_error", include_str!("../../scenarios/sq_pi_sine_error.toml")),
    ("fig2e_sweep", include_str!("../../scenarios/fig2e_sweep.toml")),
    ("tq_no_pulse", include_str!("../../scenarios/tq_no_pulse.toml")),
    ("tq_crosstalk_pi", include_str!("../../scenarios/tq_crosstalk_pi.toml")),
    ("tq_xy_0_minus_half_pi", include_str!("../../scenarios/tq_xy_0_minus_half_pi.toml")),
    ("tq_xy_halfpi_halfpi", include_str!("../../scenarios/tq_xy_halfpi_halfpi.toml")),
    ("tq_xy_0_pi_detuned", include_str!("../../scenarios/tq_xy_0_pi_detuned.toml")),
    ("chevron", include_str!("../../scenarios/chevron.toml")),
];

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(name, _)| *name)
}

pub fn bundled(name: &str) -> Result<Scenario> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))?;
    Scenario::from_toml_str(text)
}
