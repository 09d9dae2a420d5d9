//! Single-qubit Clifford group and Clifford+T word evaluation.
//!
//! Words are strings over `{H, S, T}` read as operator products: `"HT"` is `H * T`,
//! so the rightmost letter acts first. The empty word is the identity.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, Matrix3};

use crate::error::{Error, Result};
use crate::ptm::PauliTransferMatrix;

pub const GENERATORS: [char; 3] = ['H', 'S', 'T'];

pub(crate) fn generator_block(g: char) -> Option<Matrix3<f64>> {
    let s = FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let m = match g {
        'H' => Matrix3::new(
            0.0, 0.0, 1.0,
            0.0, -1.0, 0.0,
            1.0, 0.0, 0.0,
        ),
        'S' => Matrix3::new(
            0.0, -1.0, 0.0,
            1.0, 0.0, 0.0,
            0.0, 0.0, 1.0,
        ),
        'T' => Matrix3::new(
            s, -s, 0.0,
            s, s, 0.0,
            0.0, 0.0, 1.0,
        ),
        _ => return None,
    };
    Some(m)
}

/// Bloch-rotation block of a word.
pub(crate) fn word_block(word: &str) -> Result<Matrix3<f64>> {
    word.chars().try_fold(Matrix3::identity(), |acc, c| {
        generator_block(c.to_ascii_uppercase())
            .map(|g| acc * g)
            .ok_or_else(|| Error::InvalidArgument(format!("`{c}` is not one of H, S, T")))
    })
}

pub(crate) fn block_to_ptm(block: &Matrix3<f64>) -> PauliTransferMatrix {
    let mut m = DMatrix::identity(4, 4);
    for i in 0..3 {
        for j in 0..3 {
            m[(i + 1, j + 1)] = block[(i, j)];
        }
    }
    PauliTransferMatrix::from_matrix(1, m).expect("4x4 single-qubit PTM")
}

/// PTM of a `{H, S, T}` word. The same word always yields bit-identical entries.
pub fn word_ptm(word: &str) -> Result<PauliTransferMatrix> {
    word_block(word).map(|b| block_to_ptm(&b))
}

pub fn t_count(word: &str) -> usize {
    word.chars().filter(|c| c.eq_ignore_ascii_case(&'T')).count()
}

/// Quantised matrix entries used to identify equal rotations despite rounding.
pub(crate) fn block_key(m: &Matrix3<f64>) -> [i64; 9] {
    let mut key = [0i64; 9];
    for (k, v) in m.iter().enumerate() {
        key[k] = (v * 1e8).round() as i64;
    }
    key
}

/// A Clifford group element with its shortest `{H, S}` word.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordElement {
    pub word: String,
    pub ptm: PauliTransferMatrix,
}

/// All 24 single-qubit Cliffords, identity first, in breadth-first order over
/// left-multiplication by `H` then `S`.
pub fn clifford_group_1q() -> Vec<CliffordElement> {
    clifford_blocks()
        .into_iter()
        .map(|(word, _)| CliffordElement { ptm: word_ptm(&word).expect("H/S word"), word })
        .collect()
}

pub(crate) fn clifford_blocks() -> Vec<(String, Matrix3<f64>)> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([(String::new(), Matrix3::identity())]);
    seen.insert(block_key(&Matrix3::identity()), ());
    while let Some((word, block)) = queue.pop_front() {
        out.push((word.clone(), block));
        for g in ['H', 'S'] {
            let next = generator_block(g).unwrap() * block;
            if seen.insert(block_key(&next), ()).is_none() {
                queue.push_back((format!("{g}{word}"), next));
            }
        }
    }
    out
}
