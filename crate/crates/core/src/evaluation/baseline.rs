use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lexicon::lexicon;

/// `word_count` words drawn uniformly, with replacement, from the bundled
/// 10,000-word lexicon. The same seed always gives the same text.
pub fn random_baseline_document(seed: u64, word_count: usize) -> String {
    let words = lexicon();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..word_count.max(1)).map(|_| words[rng.gen_range(0..words.len())]).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sized() {
        assert_eq!(random_baseline_document(7, 50), random_baseline_document(7, 50));
        assert_ne!(random_baseline_document(7, 50), random_baseline_document(8, 50));
        assert_eq!(random_baseline_document(1, 500).split_whitespace().count(), 500);
    }
}
