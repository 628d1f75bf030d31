//! Synthetic coincidence counts.
//!
//! Sampling is reproducible bit for bit. The generator is xoshiro256++
//! seeded through SplitMix64 (`rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64`).
//! A uniform draw is the top 53 bits of one 64-bit output scaled by 2⁻⁵³.
//! Outcomes are chosen by cumulative thresholds in the fixed order
//! `++, +-, -+, --`.
//!
//! Pairs are generated in blocks of [`BLOCK_SIZE`]. Block `k` runs its own
//! generator seeded with [`derive_seed`]`(seed, k)`, so blocks may be sampled
//! in any order or in parallel and the summed counts never depend on how the
//! work is split.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Correlation, JointDistribution};

pub const BLOCK_SIZE: u64 = 1 << 16;

/// SplitMix64 output function applied to `seed + (index + 1)·φ`, where φ is
/// the 64-bit golden-ratio increment.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_draw(rng: &mut Xoshiro256PlusPlus) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Upper thresholds on `[0, 1)` for outcomes `++, +-, -+, --`. The last
/// outcome with nonzero probability absorbs rounding slack.
fn thresholds(joint: &JointDistribution) -> [f64; 4] {
    let p = joint.entries();
    let total: f64 = p.iter().sum();
    let last = p.iter().rposition(|&x| x > 0.0).unwrap_or(3);
    let mut cum = [0.0; 4];
    let mut acc = 0.0;
    for k in 0..4 {
        acc += p[k].max(0.0) / total;
        cum[k] = if k >= last { f64::INFINITY } else { acc };
    }
    cum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counts {
    pub pp: u64,
    pub pm: u64,
    pub mp: u64,
    pub mm: u64,
}

impl Counts {
    pub fn as_array(&self) -> [u64; 4] {
        [self.pp, self.pm, self.mp, self.mm]
    }

    fn from_array([pp, pm, mp, mm]: [u64; 4]) -> Self {
        Self { pp, pm, mp, mm }
    }

    fn add(self, other: Self) -> Self {
        Self { pp: self.pp + other.pp, pm: self.pm + other.pm, mp: self.mp + other.mp, mm: self.mm + other.mm }
    }
}

/// Coincidence counts for `n` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountRecord {
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub counts: Counts,
}

impl CountRecord {
    pub fn new(seed: u64, counts: Counts) -> Result<Self> {
        let n: u64 = counts.as_array().iter().sum();
        if n == 0 {
            return Err(Error::Domain("count record with no pairs".into()));
        }
        Ok(Self { seed, n, counts })
    }

    /// Pools two records by adding counts. The pooled record keeps `self`'s
    /// seed.
    pub fn merge(&self, other: &Self) -> Self {
        Self { seed: self.seed, n: self.n + other.n, counts: self.counts.add(other.counts) }
    }
}

fn sample_block(thresholds: &[f64; 4], pairs: u64, block_seed: u64) -> Counts {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(block_seed);
    let mut counts = [0u64; 4];
    for _ in 0..pairs {
        let u = unit_draw(&mut rng);
        let k = thresholds.iter().position(|&t| u < t).unwrap_or(3);
        counts[k] += 1;
    }
    Counts::from_array(counts)
}

fn block_len(n: u64, block: u64) -> u64 {
    (n - block * BLOCK_SIZE).min(BLOCK_SIZE)
}

/// Draws `n` independent pairs from `joint`.
pub fn sample_pairs(joint: &JointDistribution, n: u64, seed: u64) -> Result<CountRecord> {
    if n == 0 {
        return Err(Error::Domain("number of pairs must be at least 1".into()));
    }
    let t = thresholds(joint);
    let blocks = n.div_ceil(BLOCK_SIZE);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|b| sample_block(&t, block_len(n, b), derive_seed(seed, b)))
        .reduce(Counts::default, Counts::add);
    Ok(CountRecord { seed, n, counts })
}

/// Samples only blocks `blocks` of the stream [`sample_pairs`] would
/// produce for `(joint, n, seed)`. Summing disjoint ranges that cover every
/// block reproduces the full record.
pub fn sample_block_range(joint: &JointDistribution, n: u64, seed: u64, blocks: std::ops::Range<u64>) -> Counts {
    let t = thresholds(joint);
    let total_blocks = n.div_ceil(BLOCK_SIZE);
    blocks
        .filter(|&b| b < total_blocks)
        .map(|b| sample_block(&t, block_len(n, b), derive_seed(seed, b)))
        .fold(Counts::default(), Counts::add)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frequencies {
    pub pp: f64,
    pub pm: f64,
    pub mp: f64,
    pub mm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateReport {
    #[serde(rename = "E_hat")]
    pub e_hat: f64,
    /// Plug-in standard error `sqrt((1 − Ê²)/N)`; approximate near `|E| = 1`.
    pub stderr: f64,
    pub frequencies: Frequencies,
}

pub fn estimate(record: &CountRecord) -> EstimateReport {
    let c = record.counts;
    let n = record.n as f64;
    let diff = (c.pp + c.mm) as i128 - (c.pm + c.mp) as i128;
    let e_hat = diff as f64 / n;
    EstimateReport {
        e_hat,
        stderr: ((1.0 - e_hat * e_hat).max(0.0) / n).sqrt(),
        frequencies: Frequencies { pp: c.pp as f64 / n, pm: c.pm as f64 / n, mp: c.mp as f64 / n, mm: c.mm as f64 / n },
    }
}

/// Separation of two correlations in combined standard errors at `n` pairs
/// each. Infinite when the values differ and both variances vanish.
pub fn discrimination_power(e1: Correlation, e2: Correlation, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("number of pairs must be at least 1".into()));
    }
    let (e1, e2) = (e1.value(), e2.value());
    let diff = (e1 - e2).abs();
    if diff == 0.0 {
        return Ok(0.0);
    }
    let n = n as f64;
    let var = (1.0 - e1 * e1).max(0.0) / n + (1.0 - e2 * e2).max(0.0) / n;
    Ok(if var == 0.0 { f64::INFINITY } else { diff / var.sqrt() })
}
