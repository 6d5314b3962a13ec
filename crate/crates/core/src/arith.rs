//! Exact integer helpers shared by the field, counting and bounds modules.
//!
//! Everything here works on `u64` with explicit overflow checks; callers that
//! need larger magnitudes (the bounds module) switch to `BigUint`.

use std::collections::BTreeMap;

use num_prime::nt_funcs::{factorize64, is_prime64};

use crate::error::{param, Error, Result};

pub fn is_prime(n: u64) -> bool {
    is_prime64(n)
}

/// Prime factorization as `prime -> exponent`, ascending.
pub fn factorize(n: u64) -> BTreeMap<u64, usize> {
    if n <= 1 {
        return BTreeMap::new();
    }
    factorize64(n)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn checked_pow(base: u64, exp: u64) -> Result<u64> {
    let exp = u32::try_from(exp).map_err(|_| overflow(base, exp))?;
    base.checked_pow(exp).ok_or_else(|| overflow(base, exp as u64))
}

fn overflow(base: u64, exp: u64) -> Error {
    Error::Capacity {
        required: format!("{base}^{exp}"),
        budget: "2^64".into(),
    }
}

pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut acc: u128 = 1;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Euler's totient.
pub fn totient(n: u64) -> u64 {
    factorize(n)
        .keys()
        .fold(n, |acc, &prime| acc / prime * (prime - 1))
}

/// Decomposes a prime power `q = p^t`. Fails for anything that is not a
/// prime power (including 0 and 1).
pub fn prime_power(q: u64) -> Result<(u64, u32)> {
    let factors = factorize(q);
    match factors.iter().next() {
        Some((&p, &t)) if factors.len() == 1 => Ok((p, t as u32)),
        _ => Err(param(format!("{q} is not a prime power"))),
    }
}

/// Sorted list of all divisors.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (&prime, &exp) in &factorize(n) {
        let current = divs.clone();
        let mut pk = 1u64;
        for _ in 0..exp {
            pk *= prime;
            divs.extend(current.iter().map(|d| d * pk));
        }
    }
    divs.sort_unstable();
    divs
}

/// `value ≡ 0 (mod divisor)` for `value = base^exp + offset`, computed without
/// materializing the power. `offset` is +1 or -1.
pub fn divides_pow_offset(divisor: u64, base: u64, exp: u64, offset: i8) -> bool {
    let residue = mod_pow(base, exp, divisor);
    match offset {
        1 => (residue + 1) % divisor == 0,
        -1 => residue % divisor == 1 % divisor,
        _ => unreachable!("offset must be +1 or -1"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_power_decomposition() {
        assert_eq!(prime_power(2).unwrap(), (2, 1));
        assert_eq!(prime_power(27).unwrap(), (3, 3));
        assert_eq!(prime_power(64).unwrap(), (2, 6));
        assert!(prime_power(12).is_err());
        assert!(prime_power(1).is_err());
        assert!(prime_power(0).is_err());
    }

    #[test]
    fn totient_small_values() {
        let brute = |n: u64| (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64;
        for n in 1..200 {
            assert_eq!(totient(n), brute(n), "phi({n})");
        }
    }

    #[test]
    fn divisors_match_brute_force() {
        for n in 1..300u64 {
            let brute: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
            assert_eq!(divisors(n), brute);
        }
    }

    #[test]
    fn divisibility_flags() {
        // 7 | 2^3 - 1, 3 | 2^3 + 1
        assert!(divides_pow_offset(7, 2, 3, -1));
        assert!(divides_pow_offset(3, 2, 3, 1));
        assert!(!divides_pow_offset(5, 2, 11, -1));
        assert!(!divides_pow_offset(5, 2, 11, 1));
    }

    #[test]
    fn checked_pow_overflow() {
        assert_eq!(checked_pow(2, 63).unwrap(), 1 << 63);
        assert!(checked_pow(2, 64).is_err());
    }
}
