//! Multiplicative orders, cyclotomic factorization profiles, counts of
//! order-`k` matrices in `GL(2, Q)` and the `F_s(x)` root machinery.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::actions::{Matrix2, ProjectiveMap};
use crate::arith::{self, factorize, gcd, mod_pow, totient};
use crate::error::{param, Error, Result};
use crate::fields::{FieldElement, FieldTower, Level};
use crate::tower_poly::{self, TowerPoly};

/// Largest `Q` for which [`enumerate_matrices_of_order`] walks all `Q^4`
/// quadruples.
pub const DEFAULT_MATRIX_BUDGET_Q: u64 = 32;

/// Smallest `d ≥ 1` with `Q^d ≡ 1 (mod k)`.
pub fn multiplicative_order(q: u64, k: u64) -> Result<u64> {
    if k == 0 {
        return Err(param("k must be positive"));
    }
    if gcd(q, k) != 1 {
        return Err(param(format!("gcd({q}, {k}) != 1")));
    }
    if k == 1 {
        return Ok(1);
    }
    // The order divides φ(k); take the smallest divisor that works.
    let phi = totient(k);
    Ok(arith::divisors(phi)
        .into_iter()
        .find(|&d| mod_pow(q, d, k) == 1)
        .expect("Q^φ(k) ≡ 1 mod k"))
}

/// How `x^k - 1` splits over `F_Q`: the primitive `k`-th roots of unity fall
/// into `φ(k)/d` conjugacy classes of size `d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclotomicProfile {
    pub field_size: u64,
    pub k: u64,
    pub d: u64,
    pub factor_count: u64,
    pub quadratic_count: u64,
}

pub fn cyclotomic_profile(q: u64, k: u64) -> Result<CyclotomicProfile> {
    let (p, _) = arith::prime_power(q)?;
    if k == 0 {
        return Err(param("k must be positive"));
    }
    if k % p == 0 {
        return Err(param(format!(
            "unsupported case: the characteristic {p} divides k = {k}"
        )));
    }
    let d = multiplicative_order(q, k)?;
    let phi = totient(k);
    Ok(CyclotomicProfile {
        field_size: q,
        k,
        d,
        factor_count: phi / d,
        quadratic_count: if d == 2 { phi / 2 } else { 0 },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatrixOrderCount {
    pub field_size: u64,
    pub k: u64,
    /// Number of conjugacy classes, one per irreducible quadratic factor.
    pub conjugacy_class_count: u64,
    /// `Q(Q-1)`
    pub class_size: u64,
    pub total: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MatrixOrderOutcome {
    Count(MatrixOrderCount),
    HypothesesNotMet { reasons: Vec<String> },
}

impl MatrixOrderOutcome {
    pub fn total(&self) -> Option<u64> {
        match self {
            Self::Count(c) => Some(c.total),
            Self::HypothesesNotMet { .. } => None,
        }
    }
}

/// Closed-form number of matrices of order `k` in `GL(2, Q)` with irreducible
/// minimal polynomial, valid when `k | Q+1` and `k ∤ Q-1`.
pub fn matrix_order_count(q: u64, k: u64) -> Result<MatrixOrderOutcome> {
    arith::prime_power(q)?;
    if k == 0 {
        return Err(param("k must be positive"));
    }
    let mut reasons = Vec::new();
    if gcd(q, k) != 1 {
        reasons.push(format!("gcd({q}, {k}) != 1"));
    }
    if (q + 1) % k != 0 {
        reasons.push(format!("{k} does not divide Q+1 = {}", q + 1));
    }
    if (q - 1) % k == 0 {
        reasons.push(format!("{k} divides Q-1 = {}", q - 1));
    }
    if !reasons.is_empty() {
        return Ok(MatrixOrderOutcome::HypothesesNotMet { reasons });
    }
    let rho = totient(k) / 2;
    let mu = q
        .checked_mul(q - 1)
        .ok_or_else(|| Error::Capacity {
            required: format!("Q(Q-1) for Q = {q}"),
            budget: "2^64".into(),
        })?;
    let total = rho.checked_mul(mu).ok_or_else(|| Error::Capacity {
        required: format!("φ(k)Q(Q-1)/2 for Q = {q}, k = {k}"),
        budget: "2^64".into(),
    })?;
    Ok(MatrixOrderOutcome::Count(MatrixOrderCount {
        field_size: q,
        k,
        conjugacy_class_count: rho,
        class_size: mu,
        total,
    }))
}

/// Brute-force count of `A ∈ GL(2, q^n)` of exact order `k` that are not
/// scalar and have irreducible characteristic polynomial.
pub fn enumerate_matrices_of_order(tower: &FieldTower, k: u64, max_q: u64) -> Result<u64> {
    let field = tower.subfield(Level::Fqn);
    let q = field.len() as u64;
    if q > max_q {
        return Err(Error::Capacity {
            required: format!("{q}^4 matrix quadruples"),
            budget: format!("{max_q}^4"),
        });
    }
    if k == 0 {
        return Err(param("k must be positive"));
    }
    let index = |x: FieldElement| field.binary_search(&x).expect("entry in F_q^n");
    // irreducible[τ][δ]: x^2 - τx + δ has no root in F_Q
    let qs = field.len();
    let mut irreducible = vec![true; qs * qs];
    for &x in field.iter() {
        for &y in field.iter() {
            irreducible[index(tower.add(x, y)) * qs + index(tower.mul(x, y))] = false;
        }
    }
    let prime_cofactors: Vec<u64> = factorize(k).keys().map(|&l| k / l).collect();
    let count = (0..qs)
        .into_par_iter()
        .map(|ia| {
            let mut count = 0u64;
            let a = field[ia];
            for &b in field.iter() {
                for &c in field.iter() {
                    for &d in field.iter() {
                        let m = Matrix2 { a, b, c, d };
                        let det = m.det(tower);
                        if det.is_zero() || m.is_scalar() {
                            continue;
                        }
                        if !irreducible[index(m.trace(tower)) * qs + index(det)] {
                            continue;
                        }
                        if m.pow(tower, k) != Matrix2::identity() {
                            continue;
                        }
                        if prime_cofactors
                            .iter()
                            .all(|&e| m.pow(tower, e) != Matrix2::identity())
                        {
                            count += 1;
                        }
                    }
                }
            }
            count
        })
        .sum();
    Ok(count)
}

/// Factor degrees of `F_s(x)` allowed for a map of projective order `D`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FsFactorProfile {
    pub projective_order: u64,
    pub s: u64,
    pub permitted_degrees: BTreeSet<u64>,
}

pub fn fs_factor_degrees(tower: &FieldTower, m: &ProjectiveMap, s: u64) -> Result<FsFactorProfile> {
    if m.is_identity() {
        return Err(param("F_s is undefined for the identity map"));
    }
    if s == 0 {
        return Err(param("s must be positive"));
    }
    let big_d = m.projective_order(tower);
    let mut permitted: BTreeSet<u64> = [1, 2, big_d * s].into();
    for k in arith::divisors(s) {
        if k < s && gcd(s / k, big_d) == 1 {
            permitted.insert(big_d * k);
        }
    }
    Ok(FsFactorProfile {
        projective_order: big_d,
        s,
        permitted_degrees: permitted,
    })
}

fn level_exponent(tower: &FieldTower, m: &ProjectiveMap, level: Level) -> Result<u64> {
    let e = m.matrix();
    if [e.a, e.b, e.c, e.d].iter().any(|&x| !tower.in_level(x, level)) {
        return Err(param("map entries are not in the coefficient field"));
    }
    Ok(level.m(tower.params()))
}

/// `F_s(x) = c x^{Q^s+1} + d x^{Q^s} - a x - b` as a polynomial, where `Q` is
/// the size of `level`.
pub fn fs_polynomial(
    tower: &FieldTower,
    m: &ProjectiveMap,
    s: u64,
    level: Level,
) -> Result<TowerPoly> {
    let mexp = level_exponent(tower, m, level)?;
    let qs = arith::checked_pow(tower.params().q(), mexp * s)?;
    if qs > 1 << 16 {
        return Err(Error::Capacity {
            required: format!("polynomial of degree {}", qs + 1),
            budget: "degree 2^16".into(),
        });
    }
    let e = m.matrix();
    let mut coeffs = vec![FieldElement::ZERO; qs as usize + 2];
    coeffs[qs as usize + 1] = e.c;
    coeffs[qs as usize] = tower.add(coeffs[qs as usize], e.d);
    coeffs[1] = tower.sub(coeffs[1], e.a);
    coeffs[0] = tower.neg(e.b);
    Ok(TowerPoly::new(coeffs))
}

/// Degree multiset of the irreducible factors of `F_s` over `level`, by
/// distinct-degree factorization.
pub fn fs_factorization(
    tower: &FieldTower,
    m: &ProjectiveMap,
    s: u64,
    level: Level,
) -> Result<BTreeMap<usize, usize>> {
    if m.is_identity() {
        return Err(param("F_s is undefined for the identity map"));
    }
    let f = fs_polynomial(tower, m, s, level)?;
    tower_poly::factor_degrees(tower, &f, level)
}

/// Elements of `S` that are roots of `F_s`, in ascending handle order.
pub fn fs_roots_in_s(
    tower: &FieldTower,
    m: &ProjectiveMap,
    s: u64,
    level: Level,
) -> Result<Vec<FieldElement>> {
    if m.is_identity() {
        return Err(param("F_s is undefined for the identity map"));
    }
    if s == 0 {
        return Err(param("s must be positive"));
    }
    let shift = level_exponent(tower, m, level)? * s;
    let e = *m.matrix();
    Ok((0..tower.order())
        .into_par_iter()
        .map(FieldElement)
        .filter(|&x| tower.in_s(x))
        .filter(|&x| {
            let xq = tower.frobenius(x, shift);
            let lhs = tower.mul(xq, tower.add(tower.mul(e.c, x), e.d));
            let rhs = tower.add(tower.mul(e.a, x), e.b);
            lhs == rhs
        })
        .collect())
}

pub fn fs_roots_in_s_count(
    tower: &FieldTower,
    m: &ProjectiveMap,
    s: u64,
    level: Level,
) -> Result<u64> {
    Ok(fs_roots_in_s(tower, m, s, level)?.len() as u64)
}
