//! Dense polynomials over a prime field `F_p`, used only while constructing a
//! tower: modulus search and the irreducibility test.

/// Coefficients in ascending degree order, always trimmed (no trailing zeros).
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct FpPoly {
    pub coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn new(mut coeffs: Vec<u64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn x() -> Self {
        Self::new(vec![0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn is_one(&self) -> bool {
        self.coeffs == [1]
    }
}

pub(crate) fn sub(a: &FpPoly, b: &FpPoly, p: u64) -> FpPoly {
    let len = a.coeffs.len().max(b.coeffs.len());
    let out = (0..len)
        .map(|i| {
            let x = a.coeffs.get(i).copied().unwrap_or(0);
            let y = b.coeffs.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    FpPoly::new(out)
}

fn mul(a: &FpPoly, b: &FpPoly, p: u64) -> FpPoly {
    if a.is_zero() || b.is_zero() {
        return FpPoly::new(vec![]);
    }
    let mut out = vec![0u64; a.coeffs.len() + b.coeffs.len() - 1];
    for (i, &x) in a.coeffs.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.coeffs.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    FpPoly::new(out)
}

fn inv_mod_p(a: u64, p: u64) -> u64 {
    crate::arith::mod_pow(a, p - 2, p)
}

pub(crate) fn rem(a: &FpPoly, m: &FpPoly, p: u64) -> FpPoly {
    let dm = m.degree().expect("division by the zero polynomial");
    let lead_inv = inv_mod_p(*m.coeffs.last().unwrap(), p);
    let mut r = a.coeffs.clone();
    while r.len() > dm {
        let top = r.len() - 1;
        let factor = r[top] * lead_inv % p;
        if factor != 0 {
            let shift = top - dm;
            for (j, &c) in m.coeffs.iter().enumerate() {
                r[shift + j] = (r[shift + j] + p - factor * c % p) % p;
            }
        }
        r.pop();
        while r.last() == Some(&0) {
            r.pop();
        }
    }
    FpPoly::new(r)
}

pub(crate) fn gcd(a: &FpPoly, b: &FpPoly, p: u64) -> FpPoly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    // normalize to monic
    if let Some(&lead) = a.coeffs.last() {
        let inv = inv_mod_p(lead, p);
        a = FpPoly::new(a.coeffs.iter().map(|c| c * inv % p).collect());
    }
    a
}

fn pow_mod(base: &FpPoly, mut exp: u64, m: &FpPoly, p: u64) -> FpPoly {
    let mut acc = FpPoly::new(vec![1]);
    let mut b = rem(base, m, p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = rem(&mul(&acc, &b, p), m, p);
        }
        b = rem(&mul(&b, &b, p), m, p);
        exp >>= 1;
    }
    acc
}

/// Rabin-style test: `f` of degree `d` is irreducible iff
/// `gcd(x^{p^i} - x, f) = 1` for every `1 <= i <= d/2`.
pub(crate) fn is_irreducible(f: &FpPoly, p: u64) -> bool {
    let d = match f.degree() {
        None | Some(0) => return false,
        Some(d) => d,
    };
    if d == 1 {
        return true;
    }
    let x = FpPoly::x();
    let mut frob = x.clone();
    for _ in 1..=d / 2 {
        frob = pow_mod(&frob, p, f, p);
        let g = gcd(&sub(&frob, &x, p), f, p);
        if !g.is_one() {
            return false;
        }
    }
    true
}

/// Smallest monic irreducible polynomial of degree `d` over `F_p`, where
/// candidates are ordered by the base-`p` value of their lower coefficients
/// (coefficient of `x^i` is digit `i`). This is lexicographic order on the
/// coefficient sequence read from `x^{d-1}` down to `x^0`.
pub(crate) fn smallest_irreducible(p: u64, d: usize) -> FpPoly {
    let mut lower = vec![0u64; d];
    loop {
        let mut coeffs = lower.clone();
        coeffs.push(1);
        let f = FpPoly::new(coeffs);
        if is_irreducible(&f, p) {
            return f;
        }
        // base-p increment, digit 0 least significant
        for digit in lower.iter_mut() {
            *digit += 1;
            if *digit < p {
                break;
            }
            *digit = 0;
        }
    }
}
