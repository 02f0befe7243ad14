use paravec::HuffmanCoding;
use proptest::prelude::*;

fn codes(h: &HuffmanCoding) -> Vec<Vec<u8>> {
    (1..=h.n_words()).map(|w| h.code(w).to_vec()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn prefix_free(counts in prop::collection::vec(1u64..10_000, 2..120)) {
        let c = codes(&HuffmanCoding::from_word_counts(&counts));
        for (i, a) in c.iter().enumerate() {
            for (j, b) in c.iter().enumerate() {
                prop_assert!(i == j || !b.starts_with(a));
            }
        }
    }

    #[test]
    fn kraft_sum_is_exactly_one(counts in prop::collection::vec(1u64..1_000_000, 2..300)) {
        let c = codes(&HuffmanCoding::from_word_counts(&counts));
        let max = c.iter().map(Vec::len).max().unwrap();
        prop_assume!(max < 127);
        let sum: u128 = c.iter().map(|code| 1u128 << (max - code.len())).sum();
        prop_assert_eq!(sum, 1u128 << max);
    }

    #[test]
    fn more_frequent_words_get_codes_no_longer(counts in prop::collection::vec(1u64..50, 1..200)) {
        let c = codes(&HuffmanCoding::from_word_counts(&counts));
        for i in 0..counts.len() {
            for j in 0..counts.len() {
                if counts[i] > counts[j] {
                    prop_assert!(c[i].len() <= c[j].len());
                }
            }
        }
    }

    #[test]
    fn paths_and_codes_align(counts in prop::collection::vec(1u64..1000, 1..100)) {
        let h = HuffmanCoding::from_word_counts(&counts);
        prop_assert_eq!(h.node_count(), counts.len().saturating_sub(1));
        for w in 1..=counts.len() {
            prop_assert_eq!(h.code(w).len(), h.path(w).len());
            if let Some(&root) = h.path(w).first() {
                prop_assert_eq!(root, h.node_count() - 1);
            }
            prop_assert!(h.path(w).iter().all(|&n| n < h.node_count()));
        }
    }

    #[test]
    fn construction_is_deterministic(counts in prop::collection::vec(1u64..5, 1..100)) {
        prop_assert_eq!(HuffmanCoding::from_word_counts(&counts), HuffmanCoding::from_word_counts(&counts));
    }
}
