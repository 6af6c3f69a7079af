// SPDX-License-Identifier: Apache-2.0

//! PUF quality statistics: noise, reproducibility and uniqueness.

use alloc::vec::Vec;

use crate::apg::{
    derive_addresses, expand, generate_response, mask_addresses, read_response, ApgConfig,
    PufResponse, RESPONSE_BITS,
};
use crate::device::{BiasModel, SramPufDevice};
use crate::enrollment::{enroll, TernaryMap};
use crate::error::{Error, Result};

pub fn hamming_distance(a: &PufResponse, b: &PufResponse) -> u32 {
    (a.0 ^ b.0).count_ones()
}

/// Hamming distance over arbitrary bit strings of equal length.
pub fn bit_hamming_distance(a: &[bool], b: &[bool]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// One trial: the seed that drove it and the distance it produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialRow {
    pub trial: u32,
    pub seed: u64,
    pub hd: u32,
}

impl TrialRow {
    pub fn normalized_hd(&self) -> f64 {
        self.hd as f64 / RESPONSE_BITS as f64
    }
}

fn mean(rows: &[TrialRow]) -> f64 {
    rows.iter().map(TrialRow::normalized_hd).sum::<f64>() / rows.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntraParams {
    pub trials: u32,
    /// Trial `t` power-cycles with seed `first_seed + t`.
    pub first_seed: u64,
    /// Cycle used as the reference reading when masking is off.
    pub reference_seed: u64,
    /// Diagnostic switch; the production pipeline always masks.
    pub masking: bool,
}

impl Default for IntraParams {
    fn default() -> Self {
        Self {
            trials: 100,
            first_seed: 1_000_000,
            reference_seed: 0,
            masking: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntraStudy {
    pub noise: f64,
    pub rows: Vec<TrialRow>,
}

impl IntraStudy {
    pub fn hd_mean(&self) -> f64 {
        mean(&self.rows)
    }

    pub fn hd_max(&self) -> f64 {
        self.rows
            .iter()
            .map(TrialRow::normalized_hd)
            .fold(0.0, f64::max)
    }
}

/// Same device, same credentials, fresh power-ups.
///
/// With masking the reference is the enrollment-time response read from the
/// map. Without it, the raw addresses are read from a reference power-up,
/// since fuzzy cells have no recorded value.
pub fn intra_device_study(
    device: &SramPufDevice,
    map: &TernaryMap,
    config: &ApgConfig,
    user_id: &[u8],
    password: &[u8],
    params: &IntraParams,
) -> Result<IntraStudy> {
    if params.trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1"));
    }
    let long = expand(
        &config.credential_digest(user_id, password),
        config.expander,
    );
    let raw = derive_addresses(&long, map.cell_count(), config.endianness)?;
    let (addresses, reference) = if params.masking {
        let masked = mask_addresses(&raw, map)?;
        let reference = read_response(masked.addresses(), map)?;
        (*masked.addresses(), reference)
    } else {
        let snapshot = device.power_up_read(params.reference_seed);
        (*raw.addresses(), read_response(raw.addresses(), &snapshot)?)
    };
    let rows = (0..params.trials)
        .map(|t| {
            let seed = params.first_seed.wrapping_add(t as u64);
            let fresh = read_response(&addresses, &device.power_up_read(seed))?;
            Ok(TrialRow {
                trial: t,
                seed,
                hd: hamming_distance(&reference, &fresh),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IntraStudy {
        noise: map.puf_noise(),
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterParams {
    pub device_pairs: u32,
    /// Pair `k` uses device seeds `first_device_seed + 2k` and `+ 2k + 1`.
    pub first_device_seed: u64,
    pub cell_count: usize,
    pub read_count: u32,
    pub enroll_seed: u64,
}

impl Default for InterParams {
    fn default() -> Self {
        Self {
            device_pairs: 100,
            first_device_seed: 0,
            cell_count: crate::device::DEFAULT_CELL_COUNT,
            read_count: crate::enrollment::DEFAULT_READ_COUNT,
            enroll_seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterStudy {
    pub rows: Vec<TrialRow>,
}

impl InterStudy {
    pub fn hd_mean(&self) -> f64 {
        mean(&self.rows)
    }

    /// Population standard deviation of the normalized distances.
    pub fn hd_std(&self) -> f64 {
        let m = self.hd_mean();
        let var = self
            .rows
            .iter()
            .map(|r| (r.normalized_hd() - m) * (r.normalized_hd() - m))
            .sum::<f64>()
            / self.rows.len() as f64;
        libm::sqrt(var)
    }
}

/// Distance between the enrollment-time responses of two enrolled devices.
pub fn pair_distance(
    config: &ApgConfig,
    user_id: &[u8],
    password: &[u8],
    a: &TernaryMap,
    b: &TernaryMap,
) -> Result<u32> {
    let ra = generate_response(config, user_id, password, a, a)?;
    let rb = generate_response(config, user_id, password, b, b)?;
    Ok(hamming_distance(&ra, &rb))
}

/// Distinct devices, same credentials.
pub fn inter_device_study(
    model: &BiasModel,
    config: &ApgConfig,
    user_id: &[u8],
    password: &[u8],
    params: &InterParams,
) -> Result<InterStudy> {
    if params.device_pairs == 0 {
        return Err(Error::InvalidConfig("device_pairs must be at least 1"));
    }
    let enrolled = |seed: u64| -> Result<TernaryMap> {
        let dev = SramPufDevice::build(params.cell_count, model, seed)?;
        enroll(&dev, params.read_count, params.enroll_seed)
    };
    let rows = (0..params.device_pairs)
        .map(|k| {
            let seed = params.first_device_seed.wrapping_add(2 * k as u64);
            let a = enrolled(seed)?;
            let b = enrolled(seed.wrapping_add(1))?;
            Ok(TrialRow {
                trial: k,
                seed,
                hd: pair_distance(config, user_id, password, &a, &b)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InterStudy { rows })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsReport {
    pub noise: f64,
    pub intra_hd_mean: f64,
    pub intra_hd_max: f64,
    pub inter_hd_mean: f64,
    pub inter_hd_std: f64,
    pub trials: u32,
}

impl MetricsReport {
    pub fn new(intra: &IntraStudy, inter: &InterStudy) -> Self {
        Self {
            noise: intra.noise,
            intra_hd_mean: intra.hd_mean(),
            intra_hd_max: intra.hd_max(),
            inter_hd_mean: inter.hd_mean(),
            inter_hd_std: inter.hd_std(),
            trials: intra.rows.len() as u32,
        }
    }
}
