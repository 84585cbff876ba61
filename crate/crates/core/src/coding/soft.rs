use crate::error::{Error, Result};

/// Soft bits (positive favours 0) and the number of observations summed in.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftBits {
    pub llr: Vec<f64>,
    pub count: usize,
}

impl SoftBits {
    pub fn new(llr: Vec<f64>) -> Self {
        SoftBits { llr, count: 1 }
    }

    pub fn len(&self) -> usize {
        self.llr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.llr.is_empty()
    }

    pub fn accumulate(&mut self, other: &SoftBits) -> Result<()> {
        if other.len() != self.len() {
            return Err(Error::Length {
                expected: self.len(),
                actual: other.len(),
            });
        }
        for (a, b) in self.llr.iter_mut().zip(&other.llr) {
            *a += b;
        }
        self.count += other.count;
        Ok(())
    }
}

/// Positionwise sum of equally long LLR sets.
pub fn combine_identical(sets: &[SoftBits]) -> Result<SoftBits> {
    let (first, rest) = sets.split_first().ok_or(Error::Length {
        expected: 1,
        actual: 0,
    })?;
    let mut acc = first.clone();
    for s in rest {
        acc.accumulate(s)?;
    }
    Ok(acc)
}

/// Mother-code-length soft buffer of one HARQ process.
#[derive(Debug, Clone, PartialEq)]
pub struct HarqBuffer {
    pub k: usize,
    pub llr: Vec<f64>,
    pub transmissions: usize,
}

impl HarqBuffer {
    pub fn new(k: usize) -> Self {
        HarqBuffer {
            k,
            llr: vec![0.0; 3 * (k + 4)],
            transmissions: 0,
        }
    }

    pub fn combine(&mut self, dematched: &[f64]) -> Result<()> {
        if dematched.len() != self.llr.len() {
            return Err(Error::Length {
                expected: self.llr.len(),
                actual: dematched.len(),
            });
        }
        for (a, b) in self.llr.iter_mut().zip(dematched) {
            *a += b;
        }
        self.transmissions += 1;
        Ok(())
    }

    pub fn clear(&mut self) {
        self.llr.iter_mut().for_each(|v| *v = 0.0);
        self.transmissions = 0;
    }
}

/// Format 2 repetition code: every data symbol of every slot carries `ack`.
pub fn f2_repeat(ack: u8, slots: usize) -> Vec<u8> {
    vec![ack & 1; 4 * slots]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn doubling_and_identity() {
        let x = SoftBits::new(vec![1.0, -2.0, 0.5]);
        let two = combine_identical(&[x.clone(), x.clone()]).unwrap();
        assert_eq!(two.llr, vec![2.0, -4.0, 1.0]);
        assert_eq!(two.count, 2);
        assert_eq!(combine_identical(std::slice::from_ref(&x)).unwrap(), x);
        assert!(combine_identical(&[x, SoftBits::new(vec![0.0])]).is_err());
    }

    #[test]
    fn f2_repetition() {
        assert!(f2_repeat(1, 4).iter().all(|&b| b == 1));
        assert!(f2_repeat(0, 4).iter().all(|&b| b == 0));
        assert_eq!(f2_repeat(1, 8).len(), 32);
    }

    #[test]
    fn harq_buffer_length() {
        let mut h = HarqBuffer::new(56);
        assert_eq!(h.llr.len(), 180);
        assert!(h.combine(&[0.0; 10]).is_err());
        h.combine(&vec![1.0; 180]).unwrap();
        h.combine(&vec![1.0; 180]).unwrap();
        assert_eq!(h.transmissions, 2);
        assert!(h.llr.iter().all(|&v| v == 2.0));
    }

    proptest! {
        #[test]
        fn combining_commutes(a in proptest::collection::vec(-10i32..10, 16), b in proptest::collection::vec(-10i32..10, 16), c in proptest::collection::vec(-10i32..10, 16)) {
            let s = |v: &Vec<i32>| SoftBits::new(v.iter().map(|&x| x as f64).collect());
            let abc = combine_identical(&[s(&a), s(&b), s(&c)]).unwrap();
            let cab = combine_identical(&[s(&c), s(&a), s(&b)]).unwrap();
            prop_assert_eq!(abc.llr, cab.llr);
        }
    }
}
