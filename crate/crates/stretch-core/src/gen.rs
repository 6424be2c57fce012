//! Seeded instance generators: a grid-valued random generator with three
//! release-spread regimes, and fixed adversarial families.
//!
//! All randomness comes from an explicit splitmix64 generator, so a config
//! reproduces its instance bit for bit on any platform. Times are drawn on
//! a rational grid (numerators over a configured denominator), which keeps
//! oracle arithmetic small and makes exact ties constructible on purpose.

use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Job};
use crate::rational::Rational;

/// splitmix64 (Steele, Lea and Flood's SplittableRandom finalizer): one
/// 64-bit state advanced by the golden-gamma constant, output mixed by two
/// xor-shift-multiply rounds. Chosen for being tiny, well known, and fully
/// specified, so generated corpora never depend on a library's RNG choice.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform value in `[0, bound)`, by rejection so the distribution is
    /// exact. `bound` must be positive.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below(0) makes no sense");
        let zone = bound * (u64::MAX / bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }
}

/// How releases are spread relative to the total processing work.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpreadMode {
    /// Releases anywhere within the total work: heavy overlap.
    Dense,
    /// Strictly increasing releases with gaps exceeding the total work, so
    /// every job lands in its own block.
    Sparse,
    /// Releases in clusters of three, one grid step apart within a cluster:
    /// nested preemption on a single machine.
    Bursty,
}

impl std::fmt::Display for SpreadMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpreadMode::Dense => "dense",
            SpreadMode::Sparse => "sparse",
            SpreadMode::Bursty => "bursty",
        })
    }
}

impl std::str::FromStr for SpreadMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "dense" => Ok(SpreadMode::Dense),
            "sparse" => Ok(SpreadMode::Sparse),
            "bursty" => Ok(SpreadMode::Bursty),
            other => Err(format!(
                "unknown spread mode {other:?} (use dense|sparse|bursty)"
            )),
        }
    }
}

/// Everything that determines a generated instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub n: u32,
    pub machines: u32,
    /// Upper bound on the processing-time ratio; processing times are drawn
    /// from [1, delta_max].
    pub delta_max: Rational,
    pub mode: SpreadMode,
    /// Probability, in percent, that a job reuses an earlier job's
    /// processing time. An integer so configs stay exactly comparable.
    pub tie_bias_percent: u32,
    /// All times are numerators over this denominator.
    pub grid: u32,
    /// Nonzero salts shuffle which job gets which id, leaving the
    /// (release, processing) rows untouched: two runs differing only in the
    /// salt isolate the effect of id tie-breaking.
    pub tie_salt: u64,
}

fn validate(config: &GenConfig) -> Result<u64> {
    if config.n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    if config.machines == 0 {
        return Err(Error::InvalidConfig("machines must be at least 1".into()));
    }
    if config.grid == 0 {
        return Err(Error::InvalidConfig("grid must be at least 1".into()));
    }
    if config.tie_bias_percent > 100 {
        return Err(Error::InvalidConfig(
            "tie_bias_percent must be at most 100".into(),
        ));
    }
    if config.delta_max < Rational::one() {
        return Err(Error::InvalidConfig("delta_max must be at least 1".into()));
    }
    let scaled = &config.delta_max * &Rational::from_int(config.grid as i64);
    let hi = scaled.numer().div_floor(scaled.denom());
    hi.to_u64().ok_or_else(|| {
        Error::InvalidConfig("delta_max times grid exceeds the u64 range".into())
    })
}

/// Draws the instance determined by `config`.
pub fn random_instance(config: &GenConfig) -> Result<Instance> {
    let hi = validate(config)?;
    let grid = config.grid as u64;
    let n = config.n as usize;
    let mut rng = SplitMix64::new(config.seed);

    let mut p_nums: Vec<u64> = Vec::with_capacity(n);
    for i in 0..n {
        let reuse = i > 0 && rng.below(100) < config.tie_bias_percent as u64;
        let num = if reuse {
            p_nums[rng.below(i as u64) as usize]
        } else {
            grid + rng.below(hi - grid + 1)
        };
        p_nums.push(num);
    }
    let total_num: u64 = p_nums.iter().sum();

    let r_nums: Vec<u64> = match config.mode {
        SpreadMode::Dense => (0..n).map(|_| rng.below(total_num + 1)).collect(),
        SpreadMode::Sparse => {
            let mut cursor = 0u64;
            (0..n)
                .map(|i| {
                    if i > 0 {
                        cursor += total_num + 1 + rng.below(total_num + 1);
                    }
                    cursor
                })
                .collect()
        }
        SpreadMode::Bursty => {
            let mut centers: Vec<u64> = Vec::with_capacity(n / 3 + 1);
            let mut center = 0u64;
            for c in 0..=(n.saturating_sub(1) / 3) {
                if c > 0 {
                    center += rng.below(total_num + 1);
                }
                centers.push(center);
            }
            (0..n).map(|i| centers[i / 3] + (i % 3) as u64).collect()
        }
    };

    let mut ids: Vec<u32> = (1..=config.n).collect();
    if config.tie_salt != 0 {
        let mut shuffler = SplitMix64::new(config.seed ^ config.tie_salt);
        for i in (1..n).rev() {
            ids.swap(i, shuffler.below(i as u64 + 1) as usize);
        }
    }

    let mut jobs: Vec<Job> = (0..n)
        .map(|i| {
            Job::new(
                ids[i],
                Rational::new(r_nums[i] as i64, grid as i64),
                Rational::new(p_nums[i] as i64, grid as i64),
            )
        })
        .collect();
    jobs.sort_by_key(|j| j.id);
    Ok(Instance::new(config.machines, jobs).expect("drawn values satisfy the invariants"))
}

/// Named single-machine stress families.
///
/// `wait-pays`: a long job followed closely by a unit job, sized so every
/// instance's optimum idles before the long job instead of running it
/// greedily. `nested-trees`: processing times halving from `2^size` with
/// releases one apart, nesting every later job inside the first one's
/// active span. `equal-p`: all-ties, `size` unit jobs released together.
pub fn adversarial_family(name: &str, size: u32) -> Result<Instance> {
    if size == 0 {
        return Err(Error::InvalidConfig("family size must be at least 1".into()));
    }
    let jobs = match name {
        "wait-pays" => {
            // (base, release) pairs with release <= base - 2, which makes
            // waiting strictly better; cycling past the table grows the
            // long job, preserving that margin.
            const TABLE: [(i64, i64); 15] = [
                (3, 1),
                (4, 1),
                (4, 2),
                (5, 1),
                (5, 2),
                (5, 3),
                (6, 1),
                (6, 2),
                (6, 3),
                (6, 4),
                (7, 1),
                (7, 2),
                (7, 3),
                (7, 4),
                (7, 5),
            ];
            let idx = ((size - 1) % 15) as usize;
            let growth = ((size - 1) / 15) as i64;
            let (base, release) = TABLE[idx];
            vec![
                Job::new(1, Rational::zero(), Rational::from_int(base + growth)),
                Job::new(2, Rational::from_int(release), Rational::one()),
            ]
        }
        "nested-trees" => (0..=size)
            .map(|i| {
                Job::new(
                    i + 1,
                    Rational::from_int(i as i64),
                    Rational::from_int(1i64 << (size - i)),
                )
            })
            .collect(),
        "equal-p" => (1..=size)
            .map(|id| Job::new(id, Rational::zero(), Rational::one()))
            .collect(),
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    Ok(Instance::new(1, jobs).expect("family values satisfy the invariants"))
}

/// Family names accepted by [`adversarial_family`].
pub const FAMILY_NAMES: [&str; 3] = ["wait-pays", "nested-trees", "equal-p"];
