//! Deterministic synthetic study-set generator: a shared active core,
//! per-study dropout and noise, and planted anomalies (disjoint, shifted,
//! empty). Also hosts the naive voxel-loop Jaccard oracle used by the
//! property suites.
//!
//! Randomness comes from xoshiro256** seeded through splitmix64, so the
//! same config produces bit-identical masks on any platform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridDims, StudySet, VoxelMask};
use crate::overlap::EmptyPolicy;

/// splitmix64 step, used for seeding and stream derivation.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// xoshiro256** PRNG.
#[derive(Clone, Debug)]
pub struct Xoshiro256 {
    s: [u64; 4],
}

impl Xoshiro256 {
    pub fn seeded(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Xoshiro256 { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}

/// How a planted anomalous study is constructed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlantMode {
    /// Activation drawn from the complement of the shared core.
    Disjoint,
    /// Core translated by half the grid extent on each axis, wrapping.
    Shifted,
    /// No active voxels at all.
    Empty,
}

impl std::str::FromStr for PlantMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "disjoint" => Ok(PlantMode::Disjoint),
            "shifted" => Ok(PlantMode::Shifted),
            "empty" => Ok(PlantMode::Empty),
            other => Err(format!("unknown plant mode: {other}")),
        }
    }
}

/// Full description of a synthetic study family; the seed determines the
/// output bit-for-bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub dims: GridDims,
    pub m: usize,
    /// Fraction of voxels in the shared active core.
    pub core_rate: f64,
    /// Per-study independent activation fraction outside the core.
    pub noise_rate: f64,
    /// Probability a core voxel is missed in one study.
    pub dropout: f64,
    pub planted_outliers: Vec<(usize, PlantMode)>,
    pub seed: u64,
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::BadSynthConfig {
                detail: format!("study count must be >= 2, got {}", self.m),
            });
        }
        for (name, rate) in [
            ("core_rate", self.core_rate),
            ("noise_rate", self.noise_rate),
            ("dropout", self.dropout),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::BadSynthConfig {
                    detail: format!("{name} must lie in [0, 1], got {rate}"),
                });
            }
        }
        if self.core_rate + self.noise_rate > 1.0 {
            return Err(Error::BadSynthConfig {
                detail: format!(
                    "core_rate + noise_rate = {} exceeds grid capacity",
                    self.core_rate + self.noise_rate
                ),
            });
        }
        for &(idx, _) in &self.planted_outliers {
            if idx >= self.m {
                return Err(Error::BadSynthConfig {
                    detail: format!("planted index {idx} out of range for M = {}", self.m),
                });
            }
        }
        Ok(())
    }

    fn plant_for(&self, j: usize) -> Option<PlantMode> {
        self.planted_outliers
            .iter()
            .find(|&&(idx, _)| idx == j)
            .map(|&(_, mode)| mode)
    }
}

/// Generates the study set described by the config. Non-planted studies
/// share the core (minus dropout) plus independent noise.
pub fn generate(config: &SynthConfig) -> Result<StudySet> {
    config.validate()?;
    let dims = config.dims;
    let n = dims.len();

    // shared core from its own stream so per-study changes don't move it
    let mut core_rng = Xoshiro256::seeded(config.seed ^ 0xC0DE_CAFE_F00D_BEEF);
    let mut core = VoxelMask::empty(dims, "core");
    for i in 0..n {
        if core_rng.bernoulli(config.core_rate) {
            core.set_linear(i, true);
        }
    }

    let mut masks = Vec::with_capacity(config.m);
    for j in 0..config.m {
        let mut seed_state = config.seed;
        let stream = splitmix64(&mut seed_state).wrapping_add(j as u64);
        let mut rng = Xoshiro256::seeded(stream);
        let label = format!("study-{:02}", j + 1);
        let mut mask = VoxelMask::empty(dims, label);
        match config.plant_for(j) {
            Some(PlantMode::Empty) => {}
            Some(PlantMode::Disjoint) => {
                let rate = config.core_rate + config.noise_rate;
                for i in 0..n {
                    if !core.get_linear(i) && rng.bernoulli(rate) {
                        mask.set_linear(i, true);
                    }
                }
            }
            Some(PlantMode::Shifted) => {
                let (sx, sy, sz) = (dims.nx / 2, dims.ny / 2, dims.nz / 2);
                for i in 0..n {
                    let (x, y, z) = dims.coords(i);
                    let src =
                        dims.index((x + sx) % dims.nx, (y + sy) % dims.ny, (z + sz) % dims.nz);
                    let active = if core.get_linear(src) {
                        !rng.bernoulli(config.dropout)
                    } else {
                        rng.bernoulli(config.noise_rate)
                    };
                    if active {
                        mask.set_linear(i, true);
                    }
                }
            }
            None => {
                for i in 0..n {
                    let active = if core.get_linear(i) {
                        !rng.bernoulli(config.dropout)
                    } else {
                        rng.bernoulli(config.noise_rate)
                    };
                    if active {
                        mask.set_linear(i, true);
                    }
                }
            }
        }
        masks.push(mask);
    }
    StudySet::new(masks)
}

/// Naive set-semantics Jaccard: explicit triple loop over voxel coordinates,
/// no bit tricks. This is the independent oracle the bit-packed path is
/// checked against.
pub fn oracle_jaccard(a: &VoxelMask, b: &VoxelMask, policy: EmptyPolicy) -> Result<f64> {
    a.check_same_dims(b)?;
    let dims = a.dims();
    let mut intersection = 0u64;
    let mut union = 0u64;
    for z in 0..dims.nz {
        for y in 0..dims.ny {
            for x in 0..dims.nx {
                let (ia, ib) = (a.get(x, y, z), b.get(x, y, z));
                if ia && ib {
                    intersection += 1;
                }
                if ia || ib {
                    union += 1;
                }
            }
        }
    }
    if union == 0 {
        return match policy {
            EmptyPolicy::Error => Err(Error::EmptyPair {
                j: a.label().to_owned(),
                l: b.label().to_owned(),
            }),
            EmptyPolicy::Zero => Ok(0.0),
            EmptyPolicy::One => Ok(1.0),
        };
    }
    Ok(intersection as f64 / union as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlap::{jaccard, pair_counts};

    fn base_config() -> SynthConfig {
        SynthConfig {
            dims: GridDims::new(16, 16, 4).unwrap(),
            m: 6,
            core_rate: 0.05,
            noise_rate: 0.01,
            dropout: 0.2,
            planted_outliers: vec![],
            seed: 42,
        }
    }

    #[test]
    fn same_seed_bit_identical() {
        let cfg = base_config();
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        for (ma, mb) in a.masks().iter().zip(b.masks()) {
            assert_eq!(ma.words(), mb.words());
        }
        let mut cfg2 = cfg;
        cfg2.seed = 43;
        let c = generate(&cfg2).unwrap();
        assert!(a
            .masks()
            .iter()
            .zip(c.masks())
            .any(|(ma, mc)| ma.words() != mc.words()));
    }

    #[test]
    fn zero_noise_zero_dropout_identical_masks() {
        let mut cfg = base_config();
        cfg.noise_rate = 0.0;
        cfg.dropout = 0.0;
        let set = generate(&cfg).unwrap();
        let first = set.masks()[0].words().to_vec();
        for m in set.masks() {
            assert_eq!(m.words(), first.as_slice());
            let c = pair_counts(&set.masks()[0], m).unwrap();
            assert_eq!(jaccard(&c, EmptyPolicy::Error).unwrap(), 1.0);
        }
    }

    #[test]
    fn disjoint_plant_barely_overlaps() {
        let mut cfg = base_config();
        cfg.m = 12;
        cfg.planted_outliers = vec![(7, PlantMode::Disjoint)];
        let set = generate(&cfg).unwrap();
        let plant = &set.masks()[7];
        let mut mean = 0.0;
        let mut count = 0;
        for (j, m) in set.masks().iter().enumerate() {
            if j == 7 {
                continue;
            }
            let c = pair_counts(plant, m).unwrap();
            mean += jaccard(&c, EmptyPolicy::Zero).unwrap();
            count += 1;
        }
        assert!(mean / (count as f64) < 0.05);
    }

    #[test]
    fn empty_plant_has_no_active_voxels() {
        let mut cfg = base_config();
        cfg.planted_outliers = vec![(0, PlantMode::Empty)];
        let set = generate(&cfg).unwrap();
        assert_eq!(set.masks()[0].active_count(), 0);
    }

    #[test]
    fn shifted_plant_preserves_rough_size() {
        let mut cfg = base_config();
        cfg.noise_rate = 0.0;
        cfg.dropout = 0.0;
        cfg.planted_outliers = vec![(1, PlantMode::Shifted)];
        let set = generate(&cfg).unwrap();
        assert_eq!(set.masks()[1].active_count(), set.masks()[0].active_count());
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = base_config();
        cfg.core_rate = 0.9;
        cfg.noise_rate = 0.3;
        assert!(generate(&cfg).is_err());
        let mut cfg = base_config();
        cfg.planted_outliers = vec![(99, PlantMode::Empty)];
        assert!(generate(&cfg).is_err());
        let mut cfg = base_config();
        cfg.dropout = -0.1;
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn oracle_agrees_with_bitpacked() {
        let cfg = base_config();
        let set = generate(&cfg).unwrap();
        for j in 0..set.len() {
            for l in (j + 1)..set.len() {
                let c = pair_counts(&set.masks()[j], &set.masks()[l]).unwrap();
                let fast = jaccard(&c, EmptyPolicy::Zero).unwrap();
                let slow =
                    oracle_jaccard(&set.masks()[j], &set.masks()[l], EmptyPolicy::Zero).unwrap();
                assert_eq!(fast, slow);
            }
        }
    }

    #[test]
    fn independent_noise_matches_analytic_expectation() {
        // with no core, masks are independent Bernoulli(p); expected Jaccard
        // is close to p/(2-p)
        let p = 0.3;
        let expected = p / (2.0 - p);
        let mut total = 0.0;
        let mut count = 0;
        for seed in 0..100 {
            let cfg = SynthConfig {
                dims: GridDims::new(16, 16, 4).unwrap(),
                m: 2,
                core_rate: 0.0,
                noise_rate: p,
                dropout: 0.0,
                planted_outliers: vec![],
                seed,
            };
            let set = generate(&cfg).unwrap();
            let c = pair_counts(&set.masks()[0], &set.masks()[1]).unwrap();
            total += jaccard(&c, EmptyPolicy::Zero).unwrap();
            count += 1;
        }
        let mean = total / count as f64;
        assert!(
            (mean - expected).abs() < 0.01,
            "mean {mean} vs expected {expected}"
        );
    }
}
