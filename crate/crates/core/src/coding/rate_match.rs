//! Sub-block interleaving and circular-buffer bit selection.
//!
//! A [`RateMatcher`] precomputes, for every output position, the index of the
//! mother-code bit it carries (stream-major `d0 | d1 | d2` layout), so
//! matching is a gather and de-matching a scatter-add.

use crate::error::{Error, Result};

const COLUMNS: usize = 32;
const COLUMN_PERM: [usize; COLUMNS] = [
    0, 16, 8, 24, 4, 20, 12, 28, 2, 18, 10, 26, 6, 22, 14, 30, 1, 17, 9, 25, 5, 21, 13, 29, 3, 19,
    11, 27, 7, 23, 15, 31,
];

#[derive(Debug, Clone, PartialEq)]
pub struct RateMatcher {
    stream_len: usize,
    e: usize,
    rv: usize,
    map: Vec<usize>,
}

impl RateMatcher {
    /// `stream_len` is `K + 4`; `e` the number of output bits.
    pub fn new(stream_len: usize, e: usize, rv: usize) -> Result<Self> {
        if e == 0 {
            return Err(Error::config("E", "rate-matched length must be positive"));
        }
        if rv > 3 {
            return Err(Error::config("rv", format!("{rv} outside 0..=3")));
        }
        let buffer = circular_buffer(stream_len);
        let n_cb = buffer.len();
        let rows = stream_len.div_ceil(COLUMNS);
        let k0 = rows * (2 * n_cb.div_ceil(8 * rows) * rv + 2);
        let mut map = Vec::with_capacity(e);
        let mut j = 0usize;
        while map.len() < e {
            if let Some(idx) = buffer[(k0 + j) % n_cb] {
                map.push(idx);
            }
            j += 1;
        }
        Ok(RateMatcher {
            stream_len,
            e,
            rv,
            map,
        })
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn rv(&self) -> usize {
        self.rv
    }

    pub fn mother_len(&self) -> usize {
        3 * self.stream_len
    }

    /// Mother-code index carried by each output position.
    pub fn positions(&self) -> &[usize] {
        &self.map
    }

    pub fn rate_match<T: Copy>(&self, coded: &[T]) -> Result<Vec<T>> {
        if coded.len() != self.mother_len() {
            return Err(Error::Length {
                expected: self.mother_len(),
                actual: coded.len(),
            });
        }
        Ok(self.map.iter().map(|&i| coded[i]).collect())
    }

    /// Accumulates `llrs` (length E) into a mother-length buffer.
    pub fn dematch_into(&self, llrs: &[f64], acc: &mut [f64]) -> Result<()> {
        if llrs.len() != self.e {
            return Err(Error::Length {
                expected: self.e,
                actual: llrs.len(),
            });
        }
        if acc.len() != self.mother_len() {
            return Err(Error::Length {
                expected: self.mother_len(),
                actual: acc.len(),
            });
        }
        for (&i, &l) in self.map.iter().zip(llrs) {
            acc[i] += l;
        }
        Ok(())
    }

    pub fn rate_dematch(&self, llrs: &[f64]) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.mother_len()];
        self.dematch_into(llrs, &mut acc)?;
        Ok(acc)
    }
}

/// Interleaved circular buffer; `None` marks dummy bits.
fn circular_buffer(d: usize) -> Vec<Option<usize>> {
    let rows = d.div_ceil(COLUMNS);
    let k_pi = rows * COLUMNS;
    let nd = k_pi - d;
    let y = |stream: usize, k: usize| -> Option<usize> {
        (k >= nd).then(|| stream * d + k - nd)
    };
    let mut v = [
        Vec::with_capacity(k_pi),
        Vec::with_capacity(k_pi),
        Vec::with_capacity(k_pi),
    ];
    for stream in 0..2 {
        for &col in &COLUMN_PERM {
            for r in 0..rows {
                v[stream].push(y(stream, r * COLUMNS + col));
            }
        }
    }
    for k in 0..k_pi {
        let pi = (COLUMN_PERM[k / rows] + COLUMNS * (k % rows) + 1) % k_pi;
        v[2].push(y(2, pi));
    }
    let mut w = Vec::with_capacity(3 * k_pi);
    w.extend_from_slice(&v[0]);
    for k in 0..k_pi {
        w.push(v[1][k]);
        w.push(v[2][k]);
    }
    w
}
