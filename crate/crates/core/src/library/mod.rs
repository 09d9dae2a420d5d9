//! Gate libraries: labelled collections of natively implementable operations.

pub mod clifford;
pub mod clifford_t;
pub mod pai;
pub mod pulse;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hexf;
use crate::pauli::Axis;
use crate::ptm::{hs_distance, rotation_gate, PauliTransferMatrix};

pub use clifford::{clifford_group_1q, word_ptm, CliffordElement};
pub use clifford_t::enumerate_clifford_t;
pub use pai::{notch_angle, pai_library};
pub use pulse::{
    append_frame_variants, optimize_pulse, phase_shift_pulse, propagate_pulse, pulse_library, OptimizeOptions, OptimizedPulse,
    PulseSequence,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    CliffordTSequence,
    Clifford,
    PaiNotch,
    Pulse,
    PulsePhaseShifted,
    PulseFrameShifted,
}

/// What regenerates an entry's process matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// `{H, S, T}` word; used by both Clifford+T sequences and Clifford entries.
    Word(String),
    Notch { bits: u32, axis: Axis, index: u64 },
    Pulse(PulseSequence),
    PhaseShifted { base: String, phase: f64, pulse: PulseSequence },
    /// `Rz(phase) U(d)`: the pulse followed by a frame update.
    FrameShifted { base: String, phase: f64, pulse: PulseSequence },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LibraryEntry {
    pub label: String,
    pub provenance: Provenance,
    pub payload: Payload,
    /// Hilbert-Schmidt distance to the library target, one per offset (or one).
    pub distances: Vec<f64>,
}

impl LibraryEntry {
    pub fn new(label: impl Into<String>, provenance: Provenance, payload: Payload) -> Result<Self> {
        let consistent = matches!(
            (provenance, &payload),
            (Provenance::CliffordTSequence | Provenance::Clifford, Payload::Word(_))
                | (Provenance::PaiNotch, Payload::Notch { .. })
                | (Provenance::Pulse, Payload::Pulse(_))
                | (Provenance::PulsePhaseShifted, Payload::PhaseShifted { .. })
                | (Provenance::PulseFrameShifted, Payload::FrameShifted { .. })
        );
        if !consistent {
            return Err(Error::InvalidLibrary(format!("payload does not match provenance {provenance:?}")));
        }
        if let Payload::Notch { bits, index, .. } = &payload {
            if !(1..=16).contains(bits) || *index >= 1u64 << bits {
                return Err(Error::InvalidLibrary(format!("notch {index} invalid for {bits} bits")));
            }
        }
        Ok(LibraryEntry { label: label.into(), provenance, payload, distances: Vec::new() })
    }

    pub fn n_qubits(&self) -> usize {
        1
    }

    pub fn is_offset_dependent(&self) -> bool {
        matches!(self.payload, Payload::Pulse(_) | Payload::PhaseShifted { .. } | Payload::FrameShifted { .. })
    }

    /// Process matrix at drift offset `d`; offset-free entries ignore `d`.
    pub fn ptm_at(&self, d: f64) -> Result<PauliTransferMatrix> {
        match &self.payload {
            Payload::Word(w) => word_ptm(w),
            Payload::Notch { bits, axis, index } => Ok(rotation_gate(*axis, notch_angle(*bits, *index))),
            Payload::Pulse(p) | Payload::PhaseShifted { pulse: p, .. } => Ok(propagate_pulse(p, d)),
            Payload::FrameShifted { phase, pulse, .. } => rotation_gate(Axis::Z, *phase).compose(&propagate_pulse(pulse, d)),
        }
    }

    fn payload_json(&self) -> serde_json::Value {
        match &self.payload {
            Payload::Word(w) => serde_json::json!({ "word": w }),
            Payload::Notch { bits, axis, index } => serde_json::json!({ "bits": bits, "axis": axis, "index": index }),
            Payload::Pulse(p) => serde_json::to_value(p).expect("pulse serialises"),
            Payload::FrameShifted { base, phase, pulse } => serde_json::json!({
                "base": base,
                "frame": hexf::encode(*phase),
                "pulse": pulse,
            }),
            Payload::PhaseShifted { base, phase, pulse } => serde_json::json!({
                "base": base,
                "phase": hexf::encode(*phase),
                "pulse": pulse,
            }),
        }
    }

    fn payload_from_json(provenance: Provenance, v: serde_json::Value) -> Result<Payload> {
        #[derive(Deserialize)]
        struct WordPayload {
            word: String,
        }
        #[derive(Deserialize)]
        struct NotchPayload {
            bits: u32,
            axis: Axis,
            index: u64,
        }
        #[derive(Deserialize)]
        struct FramePayload {
            base: String,
            frame: String,
            pulse: PulseSequence,
        }
        #[derive(Deserialize)]
        struct ShiftedPayload {
            base: String,
            phase: String,
            pulse: PulseSequence,
        }
        Ok(match provenance {
            Provenance::CliffordTSequence | Provenance::Clifford => {
                Payload::Word(serde_json::from_value::<WordPayload>(v)?.word)
            }
            Provenance::PaiNotch => {
                let n: NotchPayload = serde_json::from_value(v)?;
                Payload::Notch { bits: n.bits, axis: n.axis, index: n.index }
            }
            Provenance::Pulse => Payload::Pulse(serde_json::from_value(v)?),
            Provenance::PulsePhaseShifted => {
                let s: ShiftedPayload = serde_json::from_value(v)?;
                Payload::PhaseShifted { base: s.base, phase: hexf::decode(&s.phase)?, pulse: s.pulse }
            }
            Provenance::PulseFrameShifted => {
                let s: FramePayload = serde_json::from_value(v)?;
                Payload::FrameShifted { base: s.base, phase: hexf::decode(&s.frame)?, pulse: s.pulse }
            }
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    label: String,
    provenance: Provenance,
    payload: serde_json::Value,
    #[serde(default)]
    distances: Vec<f64>,
}

impl Serialize for LibraryEntry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawEntry {
            label: self.label.clone(),
            provenance: self.provenance,
            payload: self.payload_json(),
            distances: self.distances.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LibraryEntry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawEntry::deserialize(d)?;
        let payload = LibraryEntry::payload_from_json(raw.provenance, raw.payload).map_err(serde::de::Error::custom)?;
        let mut e = LibraryEntry::new(raw.label, raw.provenance, payload).map_err(serde::de::Error::custom)?;
        e.distances = raw.distances;
        Ok(e)
    }
}

/// The operation a library is meant to approximate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub description: String,
    pub ptm: PauliTransferMatrix,
}

impl Target {
    pub fn rotation(axis: Axis, angle: f64) -> Target {
        Target { description: format!("R{axis:?}({angle})").to_lowercase(), ptm: rotation_gate(axis, angle) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLibrary", into = "RawLibrary")]
pub struct GateLibrary {
    entries: Vec<LibraryEntry>,
    target: Option<Target>,
    offset_grid: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawLibrary {
    target: Option<Target>,
    offset_grid: Option<Vec<f64>>,
    entries: Vec<LibraryEntry>,
}

impl From<GateLibrary> for RawLibrary {
    fn from(l: GateLibrary) -> Self {
        RawLibrary { target: l.target, offset_grid: l.offset_grid, entries: l.entries }
    }
}

impl TryFrom<RawLibrary> for GateLibrary {
    type Error = Error;

    fn try_from(raw: RawLibrary) -> Result<Self> {
        GateLibrary::new(raw.entries, raw.target, raw.offset_grid)
    }
}

impl GateLibrary {
    /// Validate and attach target distances to every entry.
    pub fn new(entries: Vec<LibraryEntry>, target: Option<Target>, offset_grid: Option<Vec<f64>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidLibrary("library is empty".into()));
        }
        let mut labels = HashSet::new();
        for e in &entries {
            if !labels.insert(e.label.as_str()) {
                return Err(Error::InvalidLibrary(format!("duplicate label `{}`", e.label)));
            }
            if e.n_qubits() != entries[0].n_qubits() {
                return Err(Error::InvalidLibrary("entries act on different qubit counts".into()));
            }
        }
        if let Some(grid) = &offset_grid {
            if grid.is_empty() || grid.iter().any(|d| !d.is_finite()) {
                return Err(Error::InvalidLibrary("offset grid must be nonempty and finite".into()));
            }
        }
        if let Some(t) = &target {
            if t.ptm.n_qubits() != entries[0].n_qubits() {
                return Err(Error::DimensionMismatch { expected: entries[0].n_qubits(), got: t.ptm.n_qubits() });
            }
        }
        let mut lib = GateLibrary { entries, target, offset_grid };
        lib.refresh_distances()?;
        Ok(lib)
    }

    fn refresh_distances(&mut self) -> Result<()> {
        let Some(target) = &self.target else {
            return Ok(());
        };
        let grid = self.offsets();
        for e in &mut self.entries {
            e.distances = grid
                .iter()
                .map(|&d| e.ptm_at(d).and_then(|p| hs_distance(&p, &target.ptm)))
                .collect::<Result<_>>()?;
        }
        Ok(())
    }

    pub fn with_target(mut self, target: Target) -> Result<Self> {
        self.target = Some(target);
        self.refresh_distances()?;
        Ok(self)
    }

    pub fn with_offset_grid(mut self, grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidLibrary("offset grid must be nonempty and finite".into()));
        }
        self.offset_grid = Some(grid);
        self.refresh_distances()?;
        Ok(self)
    }

    pub fn entries(&self) -> &[LibraryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        self.entries[0].n_qubits()
    }

    pub fn target(&self) -> Option<&Target> {
        self.target.as_ref()
    }

    pub fn offset_grid(&self) -> Option<&[f64]> {
        self.offset_grid.as_deref()
    }

    /// Offsets at which entries are evaluated: the grid, or `[0]` when there is none.
    pub fn offsets(&self) -> Vec<f64> {
        self.offset_grid.clone().unwrap_or_else(|| vec![0.0])
    }

    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.label.clone()).collect()
    }

    /// Nominal process matrices (first grid offset, or offset zero).
    pub fn ptms(&self) -> Result<Vec<PauliTransferMatrix>> {
        let d = self.offsets()[0];
        self.entries.iter().map(|e| e.ptm_at(d)).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.label == label)
    }

    /// Append entries, keeping labels unique.
    pub fn extend(mut self, more: Vec<LibraryEntry>) -> Result<Self> {
        self.entries.extend(more);
        GateLibrary::new(self.entries, self.target, self.offset_grid)
    }

    /// Subset of entries, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let entries = indices
            .iter()
            .map(|&i| {
                self.entries
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::InvalidArgument(format!("entry {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        GateLibrary::new(entries, self.target.clone(), self.offset_grid.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
