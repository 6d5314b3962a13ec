//! Characteristic-2 polynomial arithmetic on bit-packed handles.

pub(crate) struct BinaryField {
    degree: u32,
    /// modulus with the leading bit set
    modulus: u64,
    /// `reduce[k][b] = (b · x^{degree + 8k}) mod f`
    reduce: Vec<[u64; 256]>,
}

impl BinaryField {
    pub fn new(coeffs: &[u64]) -> Self {
        let degree = (coeffs.len() - 1) as u32;
        assert!(degree < 64, "binary towers are limited to degree 63");
        let modulus = coeffs
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &c)| acc | (c & 1) << i);
        let low = modulus & !(1u64 << degree);
        // x^degree ≡ low; build x^{degree + j} for j < degree - 1 by shifting
        let chunks = (degree as usize).saturating_sub(1).div_ceil(8).max(1);
        let mut powers = Vec::with_capacity(chunks * 8);
        let mut cur = low;
        for _ in 0..chunks * 8 {
            powers.push(cur);
            cur <<= 1;
            if cur >> degree & 1 == 1 {
                cur ^= modulus;
            }
        }
        let reduce = (0..chunks)
            .map(|k| {
                let mut table = [0u64; 256];
                for (b, slot) in table.iter_mut().enumerate() {
                    *slot = (0..8)
                        .filter(|bit| b >> bit & 1 == 1)
                        .fold(0, |acc, bit| acc ^ powers[8 * k + bit]);
                }
                table
            })
            .collect();
        Self {
            degree,
            modulus,
            reduce,
        }
    }

    #[inline]
    fn reduce(&self, prod: u128) -> u64 {
        let d = self.degree;
        let mask = (1u128 << d) - 1;
        let mut out = (prod & mask) as u64;
        let mut high = prod >> d;
        for table in &self.reduce {
            if high == 0 {
                break;
            }
            out ^= table[(high & 0xff) as usize];
            high >>= 8;
        }
        out
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(clmul(a, b))
    }

    #[inline]
    pub fn square(&self, a: u64) -> u64 {
        self.reduce(spread(a))
    }

    /// Inverse of a nonzero element by the binary extended Euclidean algorithm.
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a != 0);
        let (mut u, mut v) = (a as u128, self.modulus as u128);
        let (mut g1, mut g2) = (1u128, 0u128);
        while u != 1 {
            let mut j = deg(u) as i32 - deg(v) as i32;
            if j < 0 {
                std::mem::swap(&mut u, &mut v);
                std::mem::swap(&mut g1, &mut g2);
                j = -j;
            }
            u ^= v << j;
            g1 ^= g2 << j;
        }
        self.reduce(g1)
    }
}

#[inline]
fn deg(x: u128) -> u32 {
    127 - x.leading_zeros()
}

/// Carry-less product.
#[inline]
fn clmul(a: u64, b: u64) -> u128 {
    let (a, mut b) = (a as u128, b);
    let mut acc = 0u128;
    let mut shift = 0;
    while b != 0 {
        let tz = b.trailing_zeros();
        shift += tz;
        b >>= tz;
        acc ^= a << shift;
        b >>= 1;
        shift += 1;
    }
    acc
}

/// Interleaves zero bits: the carry-less square of `a`.
#[inline]
fn spread(a: u64) -> u128 {
    fn spread32(x: u64) -> u64 {
        let mut x = x & 0xffff_ffff;
        x = (x | x << 16) & 0x0000_ffff_0000_ffff;
        x = (x | x << 8) & 0x00ff_00ff_00ff_00ff;
        x = (x | x << 4) & 0x0f0f_0f0f_0f0f_0f0f;
        x = (x | x << 2) & 0x3333_3333_3333_3333;
        (x | x << 1) & 0x5555_5555_5555_5555
    }
    spread32(a) as u128 | (spread32(a >> 32) as u128) << 64
}
