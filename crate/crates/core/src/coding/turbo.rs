//! Rate-1/3 parallel concatenated convolutional code with two 8-state
//! constituent encoders (feedback 1+D²+D³, parity 1+D+D³) and a QPP
//! interleaver.
//!
//! Coded output is stream-major: `d0 | d1 | d2`, each `K + 4` bits long,
//! with the twelve trellis-termination bits distributed over the last four
//! positions of every stream.

use super::crc::crc24_check;
use super::qpp::qpp_interleaver;
use crate::error::{Error, Result};

const STATES: usize = 8;
const NEG: f64 = -1.0e30;

#[derive(Debug, Clone, Copy)]
struct Branch {
    next: usize,
    parity: u8,
}

/// `(next state, parity)` for every `(state, input)`; state bits are `s1 s2 s3`.
fn trellis() -> [[Branch; 2]; STATES] {
    let mut t = [[Branch { next: 0, parity: 0 }; 2]; STATES];
    for (s, row) in t.iter_mut().enumerate() {
        let (s1, s2, s3) = ((s >> 2) & 1, (s >> 1) & 1, s & 1);
        for u in 0..2 {
            let a = u ^ s2 ^ s3;
            row[u] = Branch {
                next: (a << 2) | (s1 << 1) | s2,
                parity: (a ^ s1 ^ s3) as u8,
            };
        }
    }
    t
}

/// Input that drives the feedback register to zero from state `s`.
#[inline]
fn tail_input(s: usize) -> usize {
    ((s >> 1) ^ s) & 1
}

fn rsc_encode(bits: &[u8]) -> (Vec<u8>, [u8; 3], [u8; 3]) {
    let t = trellis();
    let mut state = 0usize;
    let parity = bits
        .iter()
        .map(|&b| {
            let br = t[state][b as usize];
            state = br.next;
            br.parity
        })
        .collect();
    let mut xs = [0u8; 3];
    let mut zs = [0u8; 3];
    for i in 0..3 {
        let u = tail_input(state);
        let br = t[state][u];
        xs[i] = u as u8;
        zs[i] = br.parity;
        state = br.next;
    }
    debug_assert_eq!(state, 0);
    (parity, xs, zs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurboDecodeResult {
    pub bits: Vec<u8>,
    /// CRC passed on the hard decisions.
    pub converged: bool,
    pub half_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct TurboCodec {
    k: usize,
    pi: Vec<usize>,
    trellis: [[Branch; 2]; STATES],
    pub max_half_iterations: usize,
    pub extrinsic_scale: f64,
}

impl TurboCodec {
    pub fn new(k: usize) -> Result<Self> {
        Ok(TurboCodec {
            k,
            pi: qpp_interleaver(k)?,
            trellis: trellis(),
            max_half_iterations: 8,
            extrinsic_scale: 0.75,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Length of each of the three coded streams.
    pub fn stream_len(&self) -> usize {
        self.k + 4
    }

    pub fn encode(&self, bits: &[u8]) -> Result<Vec<u8>> {
        let k = self.k;
        if bits.len() != k {
            return Err(Error::Length {
                expected: k,
                actual: bits.len(),
            });
        }
        let interleaved: Vec<u8> = self.pi.iter().map(|&p| bits[p]).collect();
        let (z, x_t, z_t) = rsc_encode(bits);
        let (z2, x2_t, z2_t) = rsc_encode(&interleaved);
        let d = k + 4;
        let mut out = vec![0u8; 3 * d];
        out[..k].copy_from_slice(bits);
        out[d..d + k].copy_from_slice(&z);
        out[2 * d..2 * d + k].copy_from_slice(&z2);
        let d0 = [x_t[0], z_t[1], x2_t[0], z2_t[1]];
        let d1 = [z_t[0], x_t[2], z2_t[0], x2_t[2]];
        let d2 = [x_t[1], z_t[2], x2_t[1], z2_t[2]];
        for i in 0..4 {
            out[k + i] = d0[i];
            out[d + k + i] = d1[i];
            out[2 * d + k + i] = d2[i];
        }
        Ok(out)
    }

    /// Max-log-MAP decoding of stream-major LLRs (positive favours 0).
    ///
    /// When `use_crc` is set the trailing 24 bits of the block are a CRC and
    /// decoding stops at the first half-iteration whose hard decisions pass.
    pub fn decode(&self, llr: &[f64], use_crc: bool) -> Result<TurboDecodeResult> {
        let k = self.k;
        let d = k + 4;
        if llr.len() != 3 * d {
            return Err(Error::Length {
                expected: 3 * d,
                actual: llr.len(),
            });
        }
        let (l0, rest) = llr.split_at(d);
        let (l1, l2) = rest.split_at(d);

        let mut sys1 = l0[..k].to_vec();
        sys1.extend_from_slice(&[l0[k], l2[k], l1[k + 1]]);
        let mut par1 = l1[..k].to_vec();
        par1.extend_from_slice(&[l1[k], l0[k + 1], l2[k + 1]]);
        let mut sys2: Vec<f64> = self.pi.iter().map(|&p| l0[p]).collect();
        sys2.extend_from_slice(&[l0[k + 2], l2[k + 2], l1[k + 3]]);
        let mut par2 = l2[..k].to_vec();
        par2.extend_from_slice(&[l1[k + 2], l0[k + 3], l2[k + 3]]);

        let mut la1 = vec![0.0; k];
        let mut la2 = vec![0.0; k];
        let mut hard = vec![0u8; k];
        let mut work = Workspace::new(k);
        let mut half = 0;
        let mut converged = false;
        while half < self.max_half_iterations {
            if half % 2 == 0 {
                let post = self.siso(&sys1, &par1, &la1, &mut work);
                for i in 0..k {
                    hard[i] = (post[i] < 0.0) as u8;
                }
                for (i, &p) in self.pi.iter().enumerate() {
                    la2[i] = self.extrinsic_scale * (post[p] - sys1[p] - la1[p]);
                }
            } else {
                let post = self.siso(&sys2, &par2, &la2, &mut work);
                for (i, &p) in self.pi.iter().enumerate() {
                    hard[p] = (post[i] < 0.0) as u8;
                    la1[p] = self.extrinsic_scale * (post[i] - sys2[i] - la2[i]);
                }
            }
            half += 1;
            if use_crc && crc24_check(&hard) {
                converged = true;
                break;
            }
        }
        Ok(TurboDecodeResult {
            bits: hard,
            converged,
            half_iterations: half,
        })
    }

    /// A-posteriori LLRs of the K information bits of one constituent code.
    fn siso<'w>(&self, sys: &[f64], par: &[f64], la: &[f64], w: &'w mut Workspace) -> &'w [f64] {
        let k = self.k;
        let steps = k + 3;
        let t = &self.trellis;
        let alpha = &mut w.alpha;
        alpha[..STATES].fill(NEG);
        alpha[0] = 0.0;
        for n in 0..steps {
            let (cur, next) = alpha[n * STATES..(n + 2) * STATES].split_at_mut(STATES);
            next.fill(NEG);
            let ls = 0.5 * (sys[n] + if n < k { la[n] } else { 0.0 });
            let lp = 0.5 * par[n];
            for s in 0..STATES {
                let a = cur[s];
                if a <= NEG {
                    continue;
                }
                let inputs: &[usize] = if n < k { &[0, 1] } else { &TAIL[tail_input(s)] };
                for &u in inputs {
                    let br = t[s][u];
                    let g = sign(u as u8) * ls + sign(br.parity) * lp;
                    let m = a + g;
                    if m > next[br.next] {
                        next[br.next] = m;
                    }
                }
            }
            let norm = next.iter().cloned().fold(NEG, f64::max);
            next.iter_mut().for_each(|v| *v -= norm);
        }

        let beta = &mut w.beta;
        beta.fill(NEG);
        beta[0] = 0.0;
        for n in (k..steps).rev() {
            let mut prev = [NEG; STATES];
            let ls = 0.5 * sys[n];
            let lp = 0.5 * par[n];
            for (s, pv) in prev.iter_mut().enumerate() {
                let u = tail_input(s);
                let br = t[s][u];
                *pv = beta[br.next] + sign(u as u8) * ls + sign(br.parity) * lp;
            }
            *beta = prev;
        }
        let out = &mut w.post;
        for n in (0..k).rev() {
            let ls = 0.5 * (sys[n] + la[n]);
            let lp = 0.5 * par[n];
            let a = &alpha[n * STATES..(n + 1) * STATES];
            let mut best = [NEG; 2];
            let mut prev = [NEG; STATES];
            for s in 0..STATES {
                for u in 0..2 {
                    let br = t[s][u];
                    let g = sign(u as u8) * ls + sign(br.parity) * lp;
                    let m = g + beta[br.next];
                    if m > prev[s] {
                        prev[s] = m;
                    }
                    let full = a[s] + m;
                    if full > best[u] {
                        best[u] = full;
                    }
                }
            }
            out[n] = best[0] - best[1];
            let norm = prev.iter().cloned().fold(NEG, f64::max);
            for (b, p) in beta.iter_mut().zip(prev) {
                *b = p - norm;
            }
        }
        &w.post[..k]
    }
}

const TAIL: [[usize; 1]; 2] = [[0], [1]];

#[inline]
fn sign(bit: u8) -> f64 {
    1.0 - 2.0 * bit as f64
}

struct Workspace {
    alpha: Vec<f64>,
    beta: [f64; STATES],
    post: Vec<f64>,
}

impl Workspace {
    fn new(k: usize) -> Self {
        Workspace {
            alpha: vec![NEG; (k + 4) * STATES],
            beta: [NEG; STATES],
            post: vec![0.0; k],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::crc::crc24_attach;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Shift-register encoder written directly from the generator polynomials.
    fn reference_rsc(bits: &[u8]) -> Vec<u8> {
        let mut reg = [0u8; 3];
        let mut out = Vec::new();
        for &c in bits {
            let a = c ^ reg[1] ^ reg[2];
            out.push(a ^ reg[0] ^ reg[2]);
            reg = [a, reg[0], reg[1]];
        }
        out
    }

    #[test]
    fn parity_matches_reference_register() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bits: Vec<u8> = (0..56).map(|_| rng.random_range(0..2)).collect();
        let (z, _, _) = rsc_encode(&bits);
        assert_eq!(z, reference_rsc(&bits));
    }

    #[test]
    fn zero_input_zero_output() {
        let codec = TurboCodec::new(40).unwrap();
        assert!(codec.encode(&[0u8; 40]).unwrap().iter().all(|&b| b == 0));
    }

    #[test]
    fn systematic_stream_is_input() {
        let codec = TurboCodec::new(56).unwrap();
        let bits: Vec<u8> = (0..56).map(|i| ((i * 7) % 3 == 0) as u8).collect();
        let c = codec.encode(&bits).unwrap();
        assert_eq!(&c[..56], &bits[..]);
        assert_eq!(c.len(), 3 * 60);
    }

    #[test]
    fn noiseless_decode_in_one_half_iteration() {
        let codec = TurboCodec::new(56).unwrap();
        let payload: Vec<u8> = (0..32).map(|i| (i % 5 == 1) as u8).collect();
        let block = crc24_attach(&payload);
        let llr: Vec<f64> = codec
            .encode(&block)
            .unwrap()
            .iter()
            .map(|&b| 4.0 * sign(b))
            .collect();
        let r = codec.decode(&llr, true).unwrap();
        assert!(r.converged);
        assert_eq!(r.half_iterations, 1);
        assert_eq!(r.bits, block);
    }

    #[test]
    fn unsupported_size() {
        assert_eq!(TurboCodec::new(50).unwrap_err(), Error::UnsupportedBlockSize(50));
        let codec = TurboCodec::new(40).unwrap();
        assert!(codec.encode(&[0; 39]).is_err());
        assert!(codec.decode(&[0.0; 10], false).is_err());
    }

    #[test]
    fn bpsk_awgn_high_snr_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let codec = TurboCodec::new(280).unwrap();
        let sigma = (0.5f64 * 10f64.powf(-1.0)).sqrt();
        for _ in 0..1000 {
            let payload: Vec<u8> = (0..256).map(|_| rng.random_range(0..2)).collect();
            let block = crc24_attach(&payload);
            let llr: Vec<f64> = codec
                .encode(&block)
                .unwrap()
                .iter()
                .map(|&b| {
                    let n: f64 = StandardNormal.sample(&mut rng);
                    2.0 * (sign(b) + sigma * n) / (sigma * sigma)
                })
                .collect();
            assert_eq!(codec.decode(&llr, true).unwrap().bits, block);
        }
    }

    #[test]
    fn decoder_corrects_errors_at_low_snr() {
        // Es/N0 = 0 dB BPSK at rate 1/3 is far above the decoding threshold
        // but leaves a raw bit error rate near 8%.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let codec = TurboCodec::new(512).unwrap();
        let sigma = 1.0f64;
        let mut raw_err = 0;
        let mut failures = 0;
        for _ in 0..50 {
            let block = crc24_attach(&(0..488).map(|_| rng.random_range(0..2)).collect::<Vec<u8>>());
            let coded = codec.encode(&block).unwrap();
            let llr: Vec<f64> = coded
                .iter()
                .map(|&b| {
                    let n: f64 = StandardNormal.sample(&mut rng);
                    2.0 * (sign(b) + sigma * n) / (sigma * sigma)
                })
                .collect();
            raw_err += coded.iter().zip(&llr).filter(|(&b, &l)| (l < 0.0) != (b == 1)).count();
            failures += (codec.decode(&llr, true).unwrap().bits != block) as usize;
        }
        assert!(raw_err > 1000);
        assert_eq!(failures, 0);
    }
}
