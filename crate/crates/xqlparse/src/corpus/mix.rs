//! Multilingual training-mix construction.
//!
//! A mix keeps the full English pool and adds a seeded uniform sample of the
//! target-language pool sized by a fixed proportion ladder. Sampling and the
//! final shuffle both draw from one ChaCha8 stream seeded by the spec, so the
//! same spec always yields the same mix, element for element.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lang::Language;

use super::CorpusError;

/// The supported target-language proportions, in percent of the target pool.
pub const MIX_PROPORTIONS: [u8; 5] = [10, 25, 50, 75, 100];

/// Identifier of the sampling procedure, recorded in run metadata so a mix
/// can be re-derived later: partial Fisher–Yates index sampling followed by a
/// full shuffle, both over one ChaCha8 stream.
pub const MIX_ALGORITHM: &str = "chacha8/index-sample+shuffle/v1";

/// Recipe for one multilingual mix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixSpec {
    /// Language sampled on top of the full English pool.
    pub target_language: Language,
    /// Percentage of the target pool to include; one of [`MIX_PROPORTIONS`].
    pub proportion: u8,
    pub seed: u64,
}

/// Builds `english ∪ sample(target, ⌊proportion·|target|/100⌋)` and shuffles
/// the result. Deterministic for a given spec; the sample is uniform without
/// replacement. The floor means a 10% mix of 1089 records adds exactly 108.
pub fn build_multilingual_mix<R: Clone>(
    english: &[R],
    target: &[R],
    spec: &MixSpec,
) -> Result<Vec<R>, CorpusError> {
    if !MIX_PROPORTIONS.contains(&spec.proportion) {
        return Err(CorpusError::BadProportion(spec.proportion));
    }
    let take = spec.proportion as usize * target.len() / 100;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut mix: Vec<R> = english.to_vec();
    mix.reserve(take);
    for index in rand::seq::index::sample(&mut rng, target.len(), take) {
        mix.push(target[index].clone());
    }
    mix.shuffle(&mut rng);
    Ok(mix)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn floor_sizing_matches_the_published_ladder_for_1089_records() {
        let english = pool("en", 1089);
        let target = pool("de", 1089);
        let expected = [108, 272, 544, 816, 1089];
        for (proportion, extra) in MIX_PROPORTIONS.into_iter().zip(expected) {
            let spec =
                MixSpec { target_language: Language::De, proportion, seed: 7 };
            let mix = build_multilingual_mix(&english, &target, &spec).unwrap();
            assert_eq!(mix.len(), 1089 + extra, "proportion {proportion}");
        }
    }

    #[test]
    fn same_seed_reproduces_the_mix_element_for_element() {
        let english = pool("en", 40);
        let target = pool("zh", 60);
        let spec = MixSpec { target_language: Language::Zh, proportion: 50, seed: 123 };
        let a = build_multilingual_mix(&english, &target, &spec).unwrap();
        let b = build_multilingual_mix(&english, &target, &spec).unwrap();
        assert_eq!(a, b);

        let other = MixSpec { seed: 124, ..spec };
        let c = build_multilingual_mix(&english, &target, &other).unwrap();
        assert_ne!(a, c, "a different seed should reorder or resample");
    }

    #[test]
    fn sampling_is_without_replacement_and_keeps_all_english() {
        let english = pool("en", 25);
        let target = pool("te", 80);
        let spec = MixSpec { target_language: Language::Te, proportion: 75, seed: 9 };
        let mix = build_multilingual_mix(&english, &target, &spec).unwrap();
        assert_eq!(mix.len(), 25 + 60);
        let mut sampled: Vec<&String> =
            mix.iter().filter(|r| r.starts_with("te")).collect();
        sampled.sort();
        sampled.dedup();
        assert_eq!(sampled.len(), 60, "no target record may repeat");
        assert_eq!(mix.iter().filter(|r| r.starts_with("en")).count(), 25);
    }

    #[test]
    fn off_ladder_proportion_is_rejected() {
        let err = build_multilingual_mix(
            &pool("en", 5),
            &pool("de", 5),
            &MixSpec { target_language: Language::De, proportion: 33, seed: 0 },
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::BadProportion(33)));
    }
}
