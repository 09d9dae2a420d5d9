//! Estimation of free-induction signals after a sampled excitation pulse.
//!
//! The initial state is `rho0 = Z / 2`. After the excitation `U_l(d)` the state
//! evolves freely as `exp(-i d Z t) rho exp(i d Z t)`, which rotates the transverse
//! components by `2 d t`; the recorded signal is `S(t) = Tr[rho(t) X] + i Tr[rho(t) Y]`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::stats::{blocks, Moments};
use super::QuasiprobabilityScheme;
use crate::error::{Error, Result};
use crate::library::GateLibrary;
use crate::ptm::PauliTransferMatrix;
use crate::rng::slot_rng;

const RHO0: [f64; 4] = [0.0, 0.0, 0.0, std::f64::consts::FRAC_1_SQRT_2];

/// `S(0)` for the state prepared by `ptm` from `Z / 2`.
fn transverse(ptm: &PauliTransferMatrix) -> Complex64 {
    let v = ptm.apply_vector(&RHO0);
    // Tr[rho X] = sqrt(2) * coefficient of X / sqrt(2).
    Complex64::new(v[1], v[2]) * std::f64::consts::SQRT_2
}

fn precession(d: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * d * t)
}

/// Noise-free signal after `desired` at offset `d`, time `t`.
pub fn ideal_signal(desired: &PauliTransferMatrix, d: f64, t: f64) -> Result<Complex64> {
    if desired.n_qubits() != 1 {
        return Err(Error::QubitCount(desired.n_qubits()));
    }
    Ok(transverse(desired) * precession(d, t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmrSignals {
    pub offsets: Vec<f64>,
    pub times: Vec<f64>,
    /// `mean[i][k]` at offset `i`, time `k`.
    pub mean: Vec<Vec<Complex64>>,
    /// Combined standard error `sqrt(se_re^2 + se_im^2)`.
    pub se: Vec<Vec<f64>>,
    pub shots: u64,
    pub seed: u64,
}

impl NmrSignals {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("offset,t,re,im,se\n");
        for (i, d) in self.offsets.iter().enumerate() {
            for (k, t) in self.times.iter().enumerate() {
                let m = self.mean[i][k];
                s.push_str(&format!("{d:e},{t:e},{:e},{:e},{:e}\n", m.re, m.im, self.se[i][k]));
            }
        }
        s
    }
}

/// One gate draw per shot, shared by every offset and time point.
pub fn nmr_estimate_signal(
    scheme: &QuasiprobabilityScheme,
    lib: &GateLibrary,
    offsets: &[f64],
    times: &[f64],
    shots: u64,
    seed: u64,
) -> Result<NmrSignals> {
    if scheme.labels() != lib.labels().as_slice() {
        return Err(Error::InvalidLibrary("scheme was not built for this library".into()));
    }
    if lib.n_qubits() != 1 {
        return Err(Error::QubitCount(lib.n_qubits()));
    }
    if shots == 0 || offsets.is_empty() || times.is_empty() {
        return Err(Error::InvalidArgument("need shots, offsets and times".into()));
    }
    if offsets.iter().chain(times).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("offsets and times must be finite".into()));
    }
    // Transverse magnetisation per (entry, offset), only for entries that can be drawn.
    let table: Vec<Vec<Complex64>> = lib
        .entries()
        .par_iter()
        .enumerate()
        .map(|(l, e)| {
            if scheme.probabilities()[l] == 0.0 {
                return Ok(Vec::new());
            }
            offsets.iter().map(|&d| e.ptm_at(d).map(|p| transverse(&p))).collect()
        })
        .collect::<Result<_>>()?;
    let q = offsets.len();
    let ranges: Vec<_> = blocks(shots).collect();
    let acc = ranges
        .into_par_iter()
        .map(|r| {
            let mut m = vec![(Moments::default(), Moments::default()); q];
            for shot in r {
                let (l, w) = scheme.sample(&mut slot_rng(seed, shot, 0));
                for (i, a) in table[l].iter().enumerate() {
                    m[i].0.push(w * a.re);
                    m[i].1.push(w * a.im);
                }
            }
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(vec![(Moments::default(), Moments::default()); q], |acc, m| {
            acc.into_iter().zip(m).map(|(a, b)| (a.0.merge(b.0), a.1.merge(b.1))).collect()
        });
    let mut mean = Vec::with_capacity(q);
    let mut se = Vec::with_capacity(q);
    for (i, &d) in offsets.iter().enumerate() {
        let m0 = Complex64::new(acc[i].0.mean, acc[i].1.mean);
        let e = acc[i].0.standard_error().hypot(acc[i].1.standard_error());
        // Precession is deterministic and norm-preserving, so it leaves the combined SE unchanged.
        mean.push(times.iter().map(|&t| m0 * precession(d, t)).collect());
        se.push(vec![e; times.len()]);
    }
    Ok(NmrSignals { offsets: offsets.to_vec(), times: times.to_vec(), mean, se, shots, seed })
}
