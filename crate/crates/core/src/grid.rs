use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerology::SampleRate;

pub type C64 = Complex64;

/// How the samples of a grid are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Time,
    /// Row-major `[slot][symbol][tone]`.
    Freq {
        slots: usize,
        symbols: usize,
        tones: usize,
    },
}

/// Complex baseband samples per antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    pub rate: SampleRate,
    pub layout: Layout,
    pub antennas: Vec<Vec<C64>>,
}

impl ComplexGrid {
    pub fn time(rate: SampleRate, antennas: Vec<Vec<C64>>) -> Self {
        ComplexGrid {
            rate,
            layout: Layout::Time,
            antennas,
        }
    }

    pub fn single(rate: SampleRate, samples: Vec<C64>) -> Self {
        Self::time(rate, vec![samples])
    }

    pub fn n_antennas(&self) -> usize {
        self.antennas.len()
    }

    /// Samples per antenna.
    pub fn len(&self) -> usize {
        self.antennas.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn antenna(&self, a: usize) -> &[C64] {
        &self.antennas[a]
    }

    pub fn is_finite(&self) -> bool {
        self.antennas
            .iter()
            .all(|a| a.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.rate.as_f64()
    }

    /// Writes the text header `rate_hz,antennas,length` and little-endian
    /// f32 I/Q pairs, antenna by antenna.
    pub fn write_iq<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{},{},{}", self.rate.hz(), self.n_antennas(), self.len())?;
        for ant in &self.antennas {
            let mut buf = Vec::with_capacity(ant.len() * 8);
            for v in ant {
                buf.extend_from_slice(&(v.re as f32).to_le_bytes());
                buf.extend_from_slice(&(v.im as f32).to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_iq<R: BufRead>(mut r: R) -> Result<Self> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let fields: Vec<&str> = header.trim().split(',').collect();
        let bad = |reason: &str| Error::DataFile {
            path: "<iq>".into(),
            reason: reason.into(),
        };
        if fields.len() != 3 {
            return Err(bad("header must be rate_hz,antennas,length"));
        }
        let parse = |s: &str| s.parse::<usize>().map_err(|_| bad("non-integer header field"));
        let rate = SampleRate::new(parse(fields[0])? as u32)?;
        let n_ant = parse(fields[1])?;
        let len = parse(fields[2])?;
        let mut antennas = Vec::with_capacity(n_ant);
        let mut raw = vec![0u8; len * 8];
        for _ in 0..n_ant {
            r.read_exact(&mut raw)?;
            antennas.push(
                raw.chunks_exact(8)
                    .map(|c| {
                        C64::new(
                            f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64,
                            f32::from_le_bytes([c[4], c[5], c[6], c[7]]) as f64,
                        )
                    })
                    .collect(),
            );
        }
        Ok(ComplexGrid::time(rate, antennas))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iq_round_trip() {
        let g = ComplexGrid::time(
            SampleRate::NPRACH,
            vec![
                vec![C64::new(0.5, -0.25), C64::new(1.0, 2.0)],
                vec![C64::new(-1.0, 0.0), C64::new(0.0, 0.125)],
            ],
        );
        let mut bytes = Vec::new();
        g.write_iq(&mut bytes).unwrap();
        assert!(bytes.starts_with(b"240000,2,2\n"));
        assert_eq!(bytes.len(), 11 + 2 * 2 * 8);
        let back = ComplexGrid::read_iq(&bytes[..]).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn bad_header_rejected() {
        assert!(ComplexGrid::read_iq(&b"240000,1\n"[..]).is_err());
        assert!(ComplexGrid::read_iq(&b"1000,1,0\n"[..]).is_err());
    }
}
