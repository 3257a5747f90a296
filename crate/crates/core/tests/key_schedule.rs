use qpp_core::key::{keygen_from, PadKey, KEY_FILE_LEN};
use qpp_core::{QppError, Seed, ShuffleMode};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn n8_m256_pad_is_all_bijections() {
    let key = PadKey::new(Seed::from_u64(3), 8, 256, ShuffleMode::UnbiasedMode).unwrap();
    let pad = key.derive_pad();
    assert_eq!(pad.len(), 256);
    for (p, inv) in pad.perms().iter().zip(pad.inverse_perms()) {
        let mut sorted = p.map().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..8).collect::<Vec<_>>());
        assert_eq!(&p.invert(), inv);
    }
}

#[test]
fn index_stream_is_uniform() {
    const DRAWS: u64 = 1_000_000;
    let key = PadKey::new(Seed::from_u64(4), 64, 256, ShuffleMode::UnbiasedMode).unwrap();
    let mut counts = [0u64; 256];
    for i in 0..DRAWS {
        counts[key.index_for_chunk(i)] += 1;
    }
    let expected = DRAWS as f64 / 256.0;
    let sigma = (DRAWS as f64 * (1.0 / 256.0) * (255.0 / 256.0)).sqrt();
    for (idx, &c) in counts.iter().enumerate() {
        assert!(
            (c as f64 - expected).abs() < 5.0 * sigma,
            "index {idx}: {c}"
        );
    }
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let p = ChiSquared::new(255.0).unwrap().sf(chi2);
    assert!(p > 0.001, "chi2 {chi2}, p {p}");
}

#[test]
fn index_stream_is_order_independent() {
    let key = PadKey::new(Seed::from_u64(5), 64, 100, ShuffleMode::UnbiasedMode).unwrap();
    let forward: Vec<usize> = (0..500).map(|i| key.index_for_chunk(i)).collect();
    let backward: Vec<usize> = (0..500).rev().map(|i| key.index_for_chunk(i)).collect();
    assert_eq!(forward, backward.into_iter().rev().collect::<Vec<_>>());
}

#[test]
fn key_file_layout() {
    let seed: Seed = "00112233445566778899aabbccddeeff".parse().unwrap();
    let key = PadKey::new(seed, 2048, 256, ShuffleMode::UnbiasedMode).unwrap();
    let bytes = key.to_bytes();
    assert_eq!(bytes.len(), KEY_FILE_LEN);
    let mut expected = Vec::new();
    expected.extend_from_slice(b"QPPK");
    expected.push(0x01);
    expected.push(0x01);
    expected.extend_from_slice(&[0x00, 0x00, 0x08, 0x00]);
    expected.extend_from_slice(&[0x00, 0x00, 0x01, 0x00]);
    expected.extend_from_slice(&seed.0);
    assert_eq!(&bytes[..30], &expected[..]);
    assert_eq!(&bytes[30..], &crc32_oracle(&expected).to_be_bytes());

    let mut buf = Vec::new();
    key.write_to(&mut buf).unwrap();
    assert_eq!(PadKey::read_from(&buf[..]).unwrap(), key);
}

/// Bitwise reflected CRC-32 (polynomial 0xEDB88320).
fn crc32_oracle(data: &[u8]) -> u32 {
    let mut crc = !0u32;
    for &b in data {
        crc ^= u32::from(b);
        for _ in 0..8 {
            crc = if crc & 1 == 1 {
                (crc >> 1) ^ 0xEDB8_8320
            } else {
                crc >> 1
            };
        }
    }
    !crc
}

#[test]
fn crc_oracle_check_value() {
    assert_eq!(crc32_oracle(b"123456789"), 0xCBF4_3926);
}

#[test]
fn keygen_uses_supplied_entropy() {
    let key = keygen_from(2048, 256, ShuffleMode::UnbiasedMode, |buf| {
        buf.fill(0xAB);
        Ok(())
    })
    .unwrap();
    assert_eq!(key.seed().0, [0xAB; 16]);
    let mut called = false;
    let err = keygen_from(12, 4, ShuffleMode::UnbiasedMode, |_| {
        called = true;
        Ok(())
    });
    assert!(matches!(err, Err(QppError::InvalidParameter(_))));
    assert!(!called);
}
