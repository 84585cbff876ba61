use crate::sequence::GoldSequence;

/// Scrambler seed for a codeword whose transmission starts in slot `slot`.
pub fn scrambling_seed(rnti: u32, slot: usize) -> u32 {
    (rnti << 14) | ((((slot / 2) % 10) as u32) << 9)
}

/// XOR with the Gold sequence; applying it twice is the identity.
pub fn scramble_bits(bits: &[u8], rnti: u32, slot: usize) -> Vec<u8> {
    let mut g = GoldSequence::new(scrambling_seed(rnti, slot));
    bits.iter().map(|&b| b ^ g.next_bit()).collect()
}

/// Sign flip of LLRs where the scrambling bit is one.
pub fn scramble_llrs(llrs: &[f64], rnti: u32, slot: usize) -> Vec<f64> {
    let mut g = GoldSequence::new(scrambling_seed(rnti, slot));
    llrs.iter()
        .map(|&l| if g.next_bit() == 1 { -l } else { l })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distinct_rnti_differ() {
        let zeros = vec![0u8; 64];
        assert_ne!(scramble_bits(&zeros, 1, 0), scramble_bits(&zeros, 2, 0));
        assert_ne!(scramble_bits(&zeros, 1, 0), scramble_bits(&zeros, 1, 2));
    }

    #[test]
    fn llr_and_bit_paths_agree() {
        let bits: Vec<u8> = (0..100).map(|i| (i % 3 == 0) as u8).collect();
        let s = scramble_bits(&bits, 77, 6);
        let llr: Vec<f64> = bits.iter().map(|&b| 1.0 - 2.0 * b as f64).collect();
        let sl = scramble_llrs(&llr, 77, 6);
        for (b, l) in s.iter().zip(sl) {
            assert_eq!(*b == 1, l < 0.0);
        }
    }

    proptest! {
        #[test]
        fn involutive(bits in proptest::collection::vec(0u8..2, 0..500), rnti in 0u32..65536, slot in 0usize..40) {
            prop_assert_eq!(scramble_bits(&scramble_bits(&bits, rnti, slot), rnti, slot), bits);
        }
    }
}
