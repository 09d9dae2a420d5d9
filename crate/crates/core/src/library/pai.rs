//! Discrete-angle rotation libraries with `2^B` evenly spaced notch settings.

use std::f64::consts::TAU;

use super::{GateLibrary, LibraryEntry, Payload, Provenance};
use crate::error::{Error, Result};
use crate::pauli::Axis;

/// Rotation angle `index * 2 pi / 2^bits` of a notch.
pub fn notch_angle(bits: u32, index: u64) -> f64 {
    index as f64 * TAU / (1u64 << bits) as f64
}

/// All `2^bits` notch rotations about `axis`; entry `l` is labelled `notch-l`.
pub fn pai_library(bits: u32, axis: Axis) -> Result<GateLibrary> {
    if !(1..=16).contains(&bits) {
        return Err(Error::InvalidArgument(format!("bits must be in 1..=16, got {bits}")));
    }
    let entries = (0..1u64 << bits)
        .map(|index| {
            LibraryEntry::new(format!("notch-{index}"), Provenance::PaiNotch, Payload::Notch { bits, axis, index })
        })
        .collect::<Result<Vec<_>>>()?;
    GateLibrary::new(entries, None, None)
}
