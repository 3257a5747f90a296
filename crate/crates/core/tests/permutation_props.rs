use std::collections::HashMap;

use proptest::prelude::*;
use qpp_core::keystream::{Keystream, Seed};
use qpp_core::permutation::{all_permutations, BitChunk, Permutation, ShuffleMode};

fn arb_perm(max_n: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_n, any::<u64>()).prop_map(|(n, s)| {
        let mut stream = Keystream::new(&Seed::from_u64(s), 0, 0);
        Permutation::generate(n, ShuffleMode::UnbiasedMode, &mut stream)
    })
}

fn arb_perm_and_chunk(max_n: usize) -> impl Strategy<Value = (Permutation, BitChunk)> {
    arb_perm(max_n).prop_flat_map(|p| {
        let n = p.n();
        (Just(p), proptest::collection::vec(any::<bool>(), n))
            .prop_map(|(p, bits)| (p, BitChunk::from_bits(&bits)))
    })
}

proptest! {
    #[test]
    fn generated_maps_are_bijections(n in 1usize..300, seed in any::<u64>(), paper in any::<bool>()) {
        let mode = if paper { ShuffleMode::PaperMode } else { ShuffleMode::UnbiasedMode };
        let mut stream = Keystream::new(&Seed::from_u64(seed), 1, 2);
        let p = Permutation::generate(n, mode, &mut stream);
        let mut sorted = p.map().to_vec();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..n as u32).collect::<Vec<_>>());
    }

    #[test]
    fn inverse_undoes_apply((perm, chunk) in arb_perm_and_chunk(200)) {
        let there = perm.apply(&chunk).unwrap();
        prop_assert_eq!(perm.invert().apply(&there).unwrap(), chunk.clone());
        prop_assert_eq!(there.popcount(), chunk.popcount());
        prop_assert_eq!(perm.fixes(&chunk).unwrap(), there == chunk);
    }

    #[test]
    fn dense_matrix_agrees_with_gather((perm, chunk) in arb_perm_and_chunk(64)) {
        let dense = perm.to_dense_matrix().unwrap();
        prop_assert!(dense.is_permutation_matrix());
        prop_assert_eq!(dense.mul_chunk(&chunk).unwrap(), perm.apply(&chunk).unwrap());
        // Transpose undoes the matrix, and equals the inverse's matrix.
        let back = dense.transpose().mul_chunk(&dense.mul_chunk(&chunk).unwrap()).unwrap();
        prop_assert_eq!(back, chunk);
        prop_assert_eq!(dense.transpose(), perm.invert().to_dense_matrix().unwrap());
    }
}

fn random_chunk(stream: &mut Keystream, n: usize) -> BitChunk {
    BitChunk::from_bits(
        &(0..n)
            .map(|_| stream.next_u64() & 1 == 1)
            .collect::<Vec<_>>(),
    )
}

#[test]
fn n8_inverse_on_1000_chunks() {
    let mut stream = Keystream::new(&Seed::from_u64(88), 0, 0);
    let perm = Permutation::generate(8, ShuffleMode::UnbiasedMode, &mut stream);
    let inv = perm.invert();
    for _ in 0..1000 {
        let c = random_chunk(&mut stream, 8);
        assert_eq!(inv.apply(&perm.apply(&c).unwrap()).unwrap(), c);
    }
}

#[test]
fn n8_matrix_cross_check_on_100_chunks() {
    let mut stream = Keystream::new(&Seed::from_u64(89), 0, 0);
    let perm = Permutation::generate(8, ShuffleMode::UnbiasedMode, &mut stream);
    let dense = perm.to_dense_matrix().unwrap();
    for _ in 0..100 {
        let c = random_chunk(&mut stream, 8);
        assert_eq!(dense.mul_chunk(&c).unwrap(), perm.apply(&c).unwrap());
    }
}

/// Direct transcription of the descending swap loop over 1-based arrays,
/// kept separate from the library's implementation.
fn oracle_shuffle(k: &[usize]) -> Vec<u32> {
    let n = k.len();
    let mut s: Vec<u32> = (1..=n as u32).collect();
    for i in (1..=n).rev() {
        s.swap(k[i - 1] - 1, i - 1);
    }
    s
}

fn histogram(n: usize, mode: ShuffleMode) -> HashMap<Vec<u32>, u64> {
    let ranges: Vec<usize> = (1..=n)
        .map(|i| match mode {
            ShuffleMode::PaperMode => n,
            ShuffleMode::UnbiasedMode => i,
        })
        .collect();
    let mut hist = HashMap::new();
    let mut k = vec![1usize; n];
    loop {
        let lib = Permutation::generate_from_keystream(
            n,
            &k.iter().map(|&v| v as u64).collect::<Vec<_>>(),
            mode,
        )
        .unwrap();
        let oracle = oracle_shuffle(&k);
        assert_eq!(lib.one_based(), oracle);
        *hist.entry(oracle).or_insert(0) += 1;
        let mut pos = 0;
        loop {
            if pos == n {
                return hist;
            }
            if k[pos] < ranges[pos] {
                k[pos] += 1;
                break;
            }
            k[pos] = 1;
            pos += 1;
        }
    }
}

#[test]
fn unbiased_mode_is_exactly_uniform() {
    for n in [3, 4] {
        let hist = histogram(n, ShuffleMode::UnbiasedMode);
        assert_eq!(hist.len(), all_permutations(n).count());
        assert!(hist.values().all(|&c| c == 1));
    }
}

#[test]
fn paper_mode_n4_histogram() {
    // Exhaustive count over all 4^4 = 256 keystreams.
    let expected: [([u32; 4], u64); 24] = [
        ([1, 2, 3, 4], 10),
        ([1, 2, 4, 3], 10),
        ([1, 3, 2, 4], 10),
        ([1, 3, 4, 2], 11),
        ([1, 4, 2, 3], 14),
        ([1, 4, 3, 2], 9),
        ([2, 1, 3, 4], 10),
        ([2, 1, 4, 3], 15),
        ([2, 3, 1, 4], 11),
        ([2, 3, 4, 1], 8),
        ([2, 4, 1, 3], 11),
        ([2, 4, 3, 1], 9),
        ([3, 1, 2, 4], 14),
        ([3, 1, 4, 2], 11),
        ([3, 2, 1, 4], 9),
        ([3, 2, 4, 1], 9),
        ([3, 4, 1, 2], 11),
        ([3, 4, 2, 1], 10),
        ([4, 1, 2, 3], 14),
        ([4, 1, 3, 2], 11),
        ([4, 2, 1, 3], 11),
        ([4, 2, 3, 1], 8),
        ([4, 3, 1, 2], 10),
        ([4, 3, 2, 1], 10),
    ];
    let hist = histogram(4, ShuffleMode::PaperMode);
    for (perm, count) in expected {
        assert_eq!(hist[&perm.to_vec()], count, "{perm:?}");
    }
    let n3 = histogram(3, ShuffleMode::PaperMode);
    let distinct: std::collections::HashSet<_> = n3.values().collect();
    assert!(distinct.len() >= 2);
}
