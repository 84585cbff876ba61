//! Length-31 Gold sequence generator used for scrambling, pilots and
//! NPRACH outer hopping.

const NC: usize = 1600;
const MASK31: u32 = 0x7fff_ffff;

/// Streaming Gold sequence `c(n) = x1(n + Nc) ⊕ x2(n + Nc)`.
#[derive(Debug, Clone)]
pub struct GoldSequence {
    x1: u32,
    x2: u32,
}

impl GoldSequence {
    pub fn new(c_init: u32) -> Self {
        let mut g = GoldSequence {
            x1: 1,
            x2: c_init & MASK31,
        };
        for _ in 0..NC {
            g.step();
        }
        g
    }

    #[inline]
    fn step(&mut self) {
        // Bit i of each register holds x(n + i).
        let f1 = ((self.x1 >> 3) ^ self.x1) & 1;
        let f2 = ((self.x2 >> 3) ^ (self.x2 >> 2) ^ (self.x2 >> 1) ^ self.x2) & 1;
        self.x1 = (self.x1 >> 1) | (f1 << 30);
        self.x2 = (self.x2 >> 1) | (f2 << 30);
    }

    #[inline]
    pub fn next_bit(&mut self) -> u8 {
        let c = ((self.x1 ^ self.x2) & 1) as u8;
        self.step();
        c
    }

    pub fn take_bits(&mut self, len: usize) -> Vec<u8> {
        (0..len).map(|_| self.next_bit()).collect()
    }
}

/// First `len` bits of the Gold sequence seeded with `c_init`.
pub fn gold(c_init: u32, len: usize) -> Vec<u8> {
    GoldSequence::new(c_init).take_bits(len)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(c_init: u32, len: usize) -> Vec<u8> {
        let total = NC + len + 31;
        let mut x1 = vec![0u8; total];
        let mut x2 = vec![0u8; total];
        x1[0] = 1;
        for i in 0..31 {
            x2[i] = ((c_init >> i) & 1) as u8;
        }
        for n in 0..total - 31 {
            x1[n + 31] = (x1[n + 3] + x1[n]) % 2;
            x2[n + 31] = (x2[n + 3] + x2[n + 2] + x2[n + 1] + x2[n]) % 2;
        }
        (0..len).map(|n| (x1[n + NC] + x2[n + NC]) % 2).collect()
    }

    #[test]
    fn matches_direct_recurrence() {
        for seed in [0u32, 1, 35, 0x1234 << 14, (1 << 31) - 1] {
            assert_eq!(gold(seed, 300), naive(seed, 300), "seed {seed}");
        }
    }

    #[test]
    fn seed_zero_prefix_frozen() {
        assert_eq!(naive(0, 16), gold(0, 16));
        assert_eq!(gold(0, 16), SEED0_PREFIX);
    }

    const SEED0_PREFIX: [u8; 16] = [0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 1, 0];
}
