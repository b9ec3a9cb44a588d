//! Arithmetic in GF(2^m) for 1 <= m <= 16 via log/antilog tables.

use crate::error::{Error, Result};

const PRIMITIVE: [u32; 17] = [
    0, 0b11, 0b111, 0b1011, 0b10011, 0b100101, 0b1000011, 0b10001001, 0x11d, 0x211, 0x409, 0x805, 0x1053, 0x201b, 0x4443,
    0x8003, 0x1100b,
];

#[derive(Clone, Debug)]
pub struct GaloisField {
    m: u32,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl GaloisField {
    pub fn new(m: u32) -> Result<Self> {
        if !(1..=16).contains(&m) {
            return Err(Error::OutOfRange { what: "field degree", value: m as f64, lo: 1.0, hi: 16.0 });
        }
        let q = 1usize << m;
        let poly = PRIMITIVE[m as usize];
        let mut exp = vec![0u16; 2 * q];
        let mut log = vec![0u16; q];
        let mut x = 1u32;
        for i in 0..q - 1 {
            exp[i] = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(Error::Internal("field polynomial is not primitive".into()));
        }
        for i in q - 1..2 * q {
            exp[i] = exp[i - (q - 1)];
        }
        Ok(Self { m, exp, log })
    }

    /// Smallest field with at least `n` elements.
    pub fn with_at_least(n: usize) -> Result<Self> {
        let m = (n.max(2) as u64).next_power_of_two().trailing_zeros().max(1);
        Self::new(m)
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> usize {
        1 << self.m
    }

    pub fn add(&self, a: u16, b: u16) -> u16 {
        a ^ b
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    pub fn inv(&self, a: u16) -> Result<u16> {
        if a == 0 {
            return Err(Error::Precondition("zero has no inverse".into()));
        }
        let q1 = self.order() - 1;
        Ok(self.exp[(q1 - self.log[a as usize] as usize) % q1])
    }

    pub fn div(&self, a: u16, b: u16) -> Result<u16> {
        Ok(self.mul(a, self.inv(b)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_have_full_order() {
        for m in 1..=16 {
            let f = GaloisField::new(m).unwrap();
            let mut seen = vec![false; f.order()];
            for i in 0..f.order() - 1 {
                let v = f.exp[i] as usize;
                assert!(!seen[v] && v != 0, "m={m}");
                seen[v] = true;
            }
        }
    }

    #[test]
    fn field_axioms_gf16() {
        let f = GaloisField::new(4).unwrap();
        for a in 0..16u16 {
            for b in 0..16u16 {
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for c in 0..16u16 {
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }
    }

    #[test]
    fn smallest_field() {
        assert_eq!(GaloisField::with_at_least(3).unwrap().order(), 4);
        assert_eq!(GaloisField::with_at_least(4).unwrap().order(), 4);
        assert_eq!(GaloisField::with_at_least(5).unwrap().order(), 8);
        assert_eq!(GaloisField::with_at_least(1).unwrap().order(), 2);
    }
}
