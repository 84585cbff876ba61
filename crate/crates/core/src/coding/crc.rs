/// CRC24A generator `x^24 + x^23 + x^18 + x^17 + x^14 + x^11 + x^10 + x^7 + x^6 + x^5 + x^4 + x^3 + x + 1`.
pub const CRC24A_POLY: u32 = 0x86_4CFB;

/// Remainder of `bits` (MSB first, one bit per byte) with zero initial state.
pub fn crc24a(bits: &[u8]) -> u32 {
    let mut reg: u32 = 0;
    for &b in bits {
        let top = ((reg >> 23) & 1) ^ (b as u32 & 1);
        reg = (reg << 1) & 0xFF_FFFF;
        if top == 1 {
            reg ^= CRC24A_POLY;
        }
    }
    reg
}

pub fn crc24_attach(bits: &[u8]) -> Vec<u8> {
    let crc = crc24a(bits);
    let mut out = Vec::with_capacity(bits.len() + 24);
    out.extend_from_slice(bits);
    out.extend((0..24).rev().map(|i| ((crc >> i) & 1) as u8));
    out
}

/// True when the trailing 24 bits are the CRC of the rest.
pub fn crc24_check(bits: &[u8]) -> bool {
    bits.len() >= 24 && crc24a(bits) == 0
}
