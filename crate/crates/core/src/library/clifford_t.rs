//! Breadth-first enumeration of single-qubit Clifford+T operations by T-count.
//!
//! Every element with minimal T-count `n + 1` can be written `C * T * g` with `C`
//! a Clifford and `g` of minimal T-count `n`, so each level is generated from the
//! previous one and deduplicated on quantised rotation blocks.

use std::collections::HashSet;

use nalgebra::Matrix3;

use super::clifford::{block_key, clifford_blocks, generator_block, word_ptm};
use super::{GateLibrary, LibraryEntry, Payload, Provenance, Target};
use crate::error::{Error, Result};
use crate::pauli::Axis;
use crate::ptm::{hs_distance, rotation_gate};

/// One distinct Clifford+T operation.
#[derive(Debug, Clone)]
pub struct EnumeratedElement {
    pub word: String,
    pub t_count: usize,
    pub(crate) block: Matrix3<f64>,
}

/// All distinct operations with T-count at most `max_t_count`, lowest T-count first.
pub fn enumerate_elements(max_t_count: usize) -> Vec<EnumeratedElement> {
    let cliffords = clifford_blocks();
    let t = generator_block('T').unwrap();
    let mut seen: HashSet<[i64; 9]> = HashSet::new();
    let mut all: Vec<EnumeratedElement> = Vec::new();
    for (word, block) in &cliffords {
        seen.insert(block_key(block));
        all.push(EnumeratedElement { word: word.clone(), t_count: 0, block: *block });
    }
    let mut level_start = 0;
    for t_count in 1..=max_t_count {
        let level_end = all.len();
        for g in level_start..level_end {
            let tg = t * all[g].block;
            for (cword, cblock) in &cliffords {
                let e = cblock * tg;
                if seen.insert(block_key(&e)) {
                    let word = format!("{cword}T{}", all[g].word);
                    all.push(EnumeratedElement { word, t_count, block: e });
                }
            }
        }
        level_start = level_end;
    }
    all
}

/// Library of Clifford+T sequences within Hilbert-Schmidt distance `epsilon` of
/// `Rz(target_angle)`, sorted by ascending distance (ties by word).
pub fn enumerate_clifford_t(
    target_angle: f64,
    max_t_count: usize,
    epsilon: f64,
    max_entries: usize,
) -> Result<GateLibrary> {
    if !(epsilon > 0.0) || !target_angle.is_finite() {
        return Err(Error::InvalidArgument("epsilon must be positive and the angle finite".into()));
    }
    let target = rotation_gate(Axis::Z, target_angle);
    let mut hits: Vec<(f64, String)> = Vec::new();
    for el in enumerate_elements(max_t_count) {
        // Screen on the enumerated block, then re-evaluate from the word so the
        // stored distance is exactly what the payload regenerates.
        let mut screen = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let diff = el.block[(i, j)] - target.get(i + 1, j + 1);
                screen += diff * diff;
            }
        }
        if screen.sqrt() > epsilon + 1e-9 {
            continue;
        }
        let dist = hs_distance(&word_ptm(&el.word)?, &target)?;
        if dist <= epsilon {
            hits.push((dist, el.word));
        }
    }
    if hits.is_empty() || max_entries == 0 {
        return Err(Error::EmptyLibrary { epsilon, max_t_count });
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.len().cmp(&b.1.len())).then_with(|| a.1.cmp(&b.1)));
    hits.truncate(max_entries);
    let entries = hits
        .into_iter()
        .map(|(_, word)| {
            let label = if word.is_empty() { "I".to_string() } else { word.clone() };
            LibraryEntry::new(label, Provenance::CliffordTSequence, Payload::Word(word))
        })
        .collect::<Result<Vec<_>>>()?;
    GateLibrary::new(entries, Some(Target { description: format!("rz({target_angle})"), ptm: target }), None)
}

/// Clifford recovery columns `C * U_base` for every Clifford `C`, the identity
/// (i.e. `U_base` itself) first.
pub fn clifford_recovery_entries(base_word: &str, prefix: &str) -> Result<Vec<LibraryEntry>> {
    clifford_blocks()
        .into_iter()
        .map(|(cword, _)| {
            let label = format!("{prefix}[{}]*{}", if cword.is_empty() { "I" } else { &cword }, base_word);
            LibraryEntry::new(label, Provenance::Clifford, Payload::Word(format!("{cword}{base_word}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::clifford::t_count;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn t_gate_is_exact_for_quarter_pi() {
        let lib = enumerate_clifford_t(FRAC_PI_4, 1, 1e-10, 20).unwrap();
        assert_eq!(lib.len(), 1);
        assert_eq!(lib.entries()[0].label, "T");
        assert!(lib.entries()[0].distances[0] < 1e-15);
    }

    #[test]
    fn s_gate_found_without_t() {
        let lib = enumerate_clifford_t(FRAC_PI_2, 0, 1e-10, 20).unwrap();
        assert!(lib.entries().iter().any(|e| e.label == "S"));
    }

    #[test]
    fn empty_result_is_an_error() {
        match enumerate_clifford_t(0.234234, 0, 1e-3, 20) {
            Err(Error::EmptyLibrary { max_t_count: 0, .. }) => {}
            other => panic!("expected empty-library error, got {other:?}"),
        }
    }

    #[test]
    fn level_sizes_are_distinct_and_t_counts_match_words() {
        let els = enumerate_elements(3);
        let keys: HashSet<_> = els.iter().map(|e| block_key(&e.block)).collect();
        assert_eq!(keys.len(), els.len());
        // Matsumoto-Amano normal forms: 24 Cliffords, then 72 * 2^(n-1) of T-count n.
        let counts: Vec<usize> = (0..=3).map(|n| els.iter().filter(|e| e.t_count == n).count()).collect();
        assert_eq!(counts, vec![24, 72, 144, 288]);
        for e in &els {
            assert_eq!(t_count(&e.word), e.t_count);
        }
    }

    #[test]
    fn desk_scale_nearest_distances_are_frozen() {
        // Exhaustive search: nothing within 10^-1.2 of Rz(0.234234) at T-count <= 8.
        let eps = 10f64.powf(-1.2);
        assert!(matches!(enumerate_clifford_t(0.234234, 8, eps, 20), Err(Error::EmptyLibrary { .. })));
        let nearest = enumerate_clifford_t(0.234234, 8, 1.0, 1).unwrap();
        assert!((nearest.entries()[0].distances[0] - 0.266010520729290).abs() < 1e-12);
        assert_eq!(t_count(&nearest.entries()[0].label), 7);
    }

    #[test]
    fn nearest_twenty_are_sorted_and_within_epsilon() {
        let eps = 0.4;
        let lib = enumerate_clifford_t(0.234234, 8, eps, 20).unwrap();
        assert_eq!(lib.len(), 20);
        let d: Vec<f64> = lib.entries().iter().map(|e| e.distances[0]).collect();
        assert!(d.windows(2).all(|w| w[0] <= w[1]));
        assert!(d.iter().all(|&x| x <= eps));
        for e in lib.entries() {
            let Payload::Word(w) = &e.payload else { unreachable!() };
            assert!(t_count(w) <= 8);
            let again = hs_distance(&word_ptm(w).unwrap(), &rotation_gate(Axis::Z, 0.234234)).unwrap();
            assert_eq!(again, e.distances[0]);
        }
    }

    #[test]
    fn recovery_entries_cover_the_group() {
        let entries = clifford_recovery_entries("HT", "rec").unwrap();
        assert_eq!(entries.len(), 24);
        assert_eq!(entries[0].label, "rec[I]*HT");
        let keys: HashSet<_> = entries
            .iter()
            .map(|e| {
                let Payload::Word(w) = &e.payload else { unreachable!() };
                block_key(&super::super::clifford::word_block(w).unwrap())
            })
            .collect();
        assert_eq!(keys.len(), 24);
    }
}
