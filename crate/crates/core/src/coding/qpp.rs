use std::sync::OnceLock;

use crate::error::{Error, Result};

const TABLE: &str = include_str!("../../data/qpp.txt");

/// Quadratic permutation polynomial coefficients `(f1, f2)` per block size.
pub fn qpp_table() -> &'static [(usize, usize, usize)] {
    static PARSED: OnceLock<Vec<(usize, usize, usize)>> = OnceLock::new();
    PARSED.get_or_init(|| {
        TABLE
            .lines()
            .filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty())
            .map(|l| {
                let v: Vec<usize> = l
                    .split_whitespace()
                    .map(|x| x.parse().expect("embedded QPP table is numeric"))
                    .collect();
                (v[0], v[1], v[2])
            })
            .collect()
    })
}

pub fn qpp_coefficients(k: usize) -> Result<(usize, usize)> {
    qpp_table()
        .iter()
        .find(|e| e.0 == k)
        .map(|e| (e.1, e.2))
        .ok_or(Error::UnsupportedBlockSize(k))
}

/// `Π(i) = (f1·i + f2·i²) mod K`.
pub fn qpp_interleaver(k: usize) -> Result<Vec<usize>> {
    let (f1, f2) = qpp_coefficients(k)?;
    Ok((0..k)
        .map(|i| (f1 * i + f2 * ((i * i) % k)) % k)
        .collect())
}

pub fn supported_block_sizes() -> impl Iterator<Item = usize> {
    qpp_table().iter().map(|e| e.0)
}
