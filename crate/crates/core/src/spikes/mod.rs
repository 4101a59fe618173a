//! Spike diagnostics on the rescaled field v = λψ/|α|.

pub mod detect;
pub mod farfield;
pub mod field;

pub use detect::{detect_spikes, roundness_and_neck, Roundness, Spike, SpikeOptions, SpikeReport};
pub use farfield::{
    farfield_check, mu_minus_floor, quantization_sweep, BallGreen, FreeSpace, GreenProvider, GridGreen, QuantizationRow,
    QuantizationTable,
};
pub use field::{BallField, Excised, FamilyField, Field, GridField, RescaledField, ScanLattice, Superposition};

use crate::emden::GroundState;
use crate::error::Result;

/// Detection followed by roundness, neck and (when a Green provider is given) far-field checks.
pub fn analyze(rf: &RescaledField, ground: &GroundState, opts: SpikeOptions, greens: Option<&dyn GreenProvider>) -> Result<SpikeReport> {
    let mut report = detect_spikes(rf, ground, opts)?;
    if report.spikes.is_empty() {
        return Ok(report);
    }
    report.roundness = roundness_and_neck(rf, &report, ground)?;
    if let Some(g) = greens {
        if report.spikes.iter().any(|s| !s.near_boundary) {
            report.farfield_error = Some(farfield_check(rf, &report, ground, g)?);
        }
    }
    Ok(report)
}
