//! Univariate polynomials with coefficients in a tower subfield. Desk-scale
//! only: enough for distinct-degree factorization of `F_s(x)` as a cross-check.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fields::{FieldElement, FieldTower, Level};

/// Coefficients in ascending order, trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerPoly(Vec<FieldElement>);

impl TowerPoly {
    pub fn new(mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self(coeffs)
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.0
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn x() -> Self {
        Self(vec![FieldElement::ZERO, FieldElement::ONE])
    }

    pub fn eval(&self, tower: &FieldTower, x: FieldElement) -> FieldElement {
        self.0
            .iter()
            .rev()
            .fold(FieldElement::ZERO, |acc, &c| tower.add(tower.mul(acc, x), c))
    }
}

fn sub(tower: &FieldTower, a: &TowerPoly, b: &TowerPoly) -> TowerPoly {
    let len = a.0.len().max(b.0.len());
    TowerPoly::new(
        (0..len)
            .map(|i| {
                let x = a.0.get(i).copied().unwrap_or_default();
                let y = b.0.get(i).copied().unwrap_or_default();
                tower.sub(x, y)
            })
            .collect(),
    )
}

fn mul(tower: &FieldTower, a: &TowerPoly, b: &TowerPoly) -> TowerPoly {
    if a.is_zero() || b.is_zero() {
        return TowerPoly::new(vec![]);
    }
    let mut out = vec![FieldElement::ZERO; a.0.len() + b.0.len() - 1];
    for (i, &x) in a.0.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.0.iter().enumerate() {
            out[i + j] = tower.add(out[i + j], tower.mul(x, y));
        }
    }
    TowerPoly::new(out)
}

/// Quotient and remainder.
fn div_rem(tower: &FieldTower, a: &TowerPoly, m: &TowerPoly) -> (TowerPoly, TowerPoly) {
    let dm = m.degree().expect("division by the zero polynomial");
    let lead_inv = tower.inv_nonzero(*m.0.last().unwrap());
    let mut r = a.0.clone();
    let mut quot = vec![FieldElement::ZERO; r.len().saturating_sub(dm)];
    while r.len() > dm {
        let top = r.len() - 1;
        let factor = tower.mul(r[top], lead_inv);
        if !factor.is_zero() {
            let shift = top - dm;
            quot[shift] = factor;
            for (j, &c) in m.0.iter().enumerate() {
                r[shift + j] = tower.sub(r[shift + j], tower.mul(factor, c));
            }
        }
        r.pop();
    }
    (TowerPoly::new(quot), TowerPoly::new(r))
}

fn rem(tower: &FieldTower, a: &TowerPoly, m: &TowerPoly) -> TowerPoly {
    div_rem(tower, a, m).1
}

fn monic(tower: &FieldTower, a: TowerPoly) -> TowerPoly {
    match a.0.last() {
        None => a,
        Some(&lead) => {
            let inv = tower.inv_nonzero(lead);
            TowerPoly::new(a.0.iter().map(|&c| tower.mul(c, inv)).collect())
        }
    }
}

pub fn gcd(tower: &FieldTower, a: &TowerPoly, b: &TowerPoly) -> TowerPoly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = rem(tower, &a, &b);
        a = b;
        b = r;
    }
    monic(tower, a)
}

fn pow_mod(tower: &FieldTower, base: &TowerPoly, mut e: u64, m: &TowerPoly) -> TowerPoly {
    let mut acc = TowerPoly::new(vec![FieldElement::ONE]);
    let mut b = rem(tower, base, m);
    while e > 0 {
        if e & 1 == 1 {
            acc = rem(tower, &mul(tower, &acc, &b), m);
        }
        b = rem(tower, &mul(tower, &b, &b), m);
        e >>= 1;
    }
    acc
}

pub fn derivative(tower: &FieldTower, a: &TowerPoly) -> TowerPoly {
    TowerPoly::new(
        a.0.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| {
                let k = tower.prime_field_element(i as u64);
                tower.mul(k, c)
            })
            .collect(),
    )
}

/// Degree multiset `degree -> number of irreducible factors` of a squarefree
/// polynomial over the given level, by distinct-degree factorization.
pub fn factor_degrees(
    tower: &FieldTower,
    f: &TowerPoly,
    level: Level,
) -> Result<BTreeMap<usize, usize>> {
    if f.degree().unwrap_or(0) == 0 {
        return Err(Error::Parameter("cannot factor a constant".into()));
    }
    if f.0.iter().any(|&c| !tower.in_level(c, level)) {
        return Err(Error::Parameter("coefficients outside the base field".into()));
    }
    let g = gcd(tower, f, &derivative(tower, f));
    if g.degree() != Some(0) {
        return Err(Error::Parameter("polynomial is not squarefree".into()));
    }
    let field_size = tower.params().q().pow(level.m(tower.params()) as u32);
    let mut f = monic(tower, f.clone());
    let mut out = BTreeMap::new();
    let x = TowerPoly::x();
    let mut h = x.clone();
    let mut i = 1;
    while f.degree().unwrap() >= 2 * i {
        h = pow_mod(tower, &h, field_size, &f);
        let g = gcd(tower, &f, &sub(tower, &h, &x));
        let dg = g.degree().unwrap();
        if dg > 0 {
            out.insert(i, dg / i);
            f = div_rem(tower, &f, &g).0;
            h = rem(tower, &h, &f);
        }
        i += 1;
    }
    if let Some(d) = f.degree().filter(|&d| d > 0) {
        *out.entry(d).or_insert(0) += 1;
    }
    Ok(out)
}
