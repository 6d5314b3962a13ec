//! Frobenius, affine and projective-linear actions on `S`.
//!
//! Orbits are identified by their minimal member handle, so an
//! [`AffineSetId`] or [`PlSetId`] is just a [`FieldElement`] that happens to be
//! the smallest element of its orbit.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::fields::{FieldElement, FieldTower, Level};

/// A 2×2 matrix over `F_{q^n}` with nonzero determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Matrix2 {
    pub a: FieldElement,
    pub b: FieldElement,
    pub c: FieldElement,
    pub d: FieldElement,
}

impl Matrix2 {
    pub fn new(
        tower: &FieldTower,
        a: FieldElement,
        b: FieldElement,
        c: FieldElement,
        d: FieldElement,
    ) -> Result<Self> {
        for (name, x) in [("a", a), ("b", b), ("c", c), ("d", d)] {
            if x.handle() >= tower.order() || !tower.in_level(x, Level::Fqn) {
                return Err(param(format!("entry {name} = {x} is not in F_q^n")));
            }
        }
        let m = Self { a, b, c, d };
        if m.det(tower).is_zero() {
            return Err(param("matrix is singular"));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        Self {
            a: FieldElement::ONE,
            b: FieldElement::ZERO,
            c: FieldElement::ZERO,
            d: FieldElement::ONE,
        }
    }

    pub fn det(&self, tower: &FieldTower) -> FieldElement {
        tower.sub(tower.mul(self.a, self.d), tower.mul(self.b, self.c))
    }

    pub fn mul(&self, tower: &FieldTower, rhs: &Self) -> Self {
        let dot = |x: FieldElement, y: FieldElement, u: FieldElement, v: FieldElement| {
            tower.add(tower.mul(x, y), tower.mul(u, v))
        };
        Self {
            a: dot(self.a, rhs.a, self.b, rhs.c),
            b: dot(self.a, rhs.b, self.b, rhs.d),
            c: dot(self.c, rhs.a, self.d, rhs.c),
            d: dot(self.c, rhs.b, self.d, rhs.d),
        }
    }

    pub fn pow(&self, tower: &FieldTower, mut e: u64) -> Self {
        let mut acc = Self::identity();
        let mut base = *self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(tower, &base);
            }
            base = base.mul(tower, &base);
            e >>= 1;
        }
        acc
    }

    pub fn is_scalar(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && self.a == self.d
    }

    pub fn trace(&self, tower: &FieldTower) -> FieldElement {
        tower.add(self.a, self.d)
    }

    fn scale(&self, tower: &FieldTower, s: FieldElement) -> Self {
        Self {
            a: tower.mul(self.a, s),
            b: tower.mul(self.b, s),
            c: tower.mul(self.c, s),
            d: tower.mul(self.d, s),
        }
    }
}

/// Image of a [`Matrix2`] in `PGL(2, q^n)`.
///
/// The stored representative has its first nonzero entry (in the order
/// `a, b, c, d`) equal to one, so equality of maps is equality of structs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ProjectiveMap {
    matrix: Matrix2,
}

impl ProjectiveMap {
    pub fn new(tower: &FieldTower, m: Matrix2) -> Self {
        let lead = [m.a, m.b, m.c, m.d]
            .into_iter()
            .find(|x| !x.is_zero())
            .expect("invertible matrix has a nonzero entry");
        Self {
            matrix: m.scale(tower, tower.inv_nonzero(lead)),
        }
    }

    pub fn identity() -> Self {
        Self {
            matrix: Matrix2::identity(),
        }
    }

    /// `α → 1/α`
    pub fn inversion() -> Self {
        Self {
            matrix: Matrix2 {
                a: FieldElement::ZERO,
                b: FieldElement::ONE,
                c: FieldElement::ONE,
                d: FieldElement::ZERO,
            },
        }
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.matrix
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_scalar()
    }

    pub fn compose(&self, tower: &FieldTower, inner: &Self) -> Self {
        Self::new(tower, self.matrix.mul(tower, &inner.matrix))
    }

    /// Smallest `D ≥ 1` with `A^D` scalar.
    pub fn projective_order(&self, tower: &FieldTower) -> u64 {
        let mut acc = self.matrix;
        let mut d = 1;
        while !acc.is_scalar() {
            acc = acc.mul(tower, &self.matrix);
            d += 1;
        }
        d
    }
}

fn ensure_in_s(tower: &FieldTower, alpha: FieldElement) -> Result<()> {
    if alpha.handle() >= tower.order() || !tower.in_s(alpha) {
        return Err(Error::Domain(format!(
            "{alpha} does not have degree {} over F_q^n",
            tower.params().r
        )));
    }
    Ok(())
}

/// `α → aα + b` for `a ≠ 0` and `a, b ∈ F_{q^n}`.
pub fn affine_apply(
    tower: &FieldTower,
    a: FieldElement,
    b: FieldElement,
    alpha: FieldElement,
) -> Result<FieldElement> {
    if a.is_zero() {
        return Err(param("affine map needs a ≠ 0"));
    }
    if !tower.in_level(a, Level::Fqn) || !tower.in_level(b, Level::Fqn) {
        return Err(param("affine coefficients must lie in F_q^n"));
    }
    Ok(tower.add(tower.mul(a, alpha), b))
}

/// `[A](α) = (aα + b)/(cα + d)`.
pub fn pgl_apply(tower: &FieldTower, m: &ProjectiveMap, alpha: FieldElement) -> Result<FieldElement> {
    let Matrix2 { a, b, c, d } = m.matrix;
    let den = tower.add(tower.mul(c, alpha), d);
    if den.is_zero() {
        return Err(Error::Domain(format!("{alpha} is a pole of the map")));
    }
    let num = tower.add(tower.mul(a, alpha), b);
    Ok(tower.mul(num, tower.inv_nonzero(den)))
}

/// Every element of `PGL(2, q^n)`, as canonical representatives.
pub fn all_projective_maps(tower: &FieldTower) -> Vec<ProjectiveMap> {
    let fqn = tower.subfield(Level::Fqn);
    let nonzero = &fqn[1..];
    let mut out = Vec::new();
    // first nonzero entry is 1: split on which entry that is
    for &b in fqn.iter() {
        for &c in fqn.iter() {
            for &d in fqn.iter() {
                // a = 1
                let m = Matrix2 { a: FieldElement::ONE, b, c, d };
                if !m.det(tower).is_zero() {
                    out.push(ProjectiveMap { matrix: m });
                }
            }
        }
    }
    // a = 0, b = 1: det = -c ≠ 0
    for &c in nonzero {
        for &d in fqn.iter() {
            out.push(ProjectiveMap {
                matrix: Matrix2 { a: FieldElement::ZERO, b: FieldElement::ONE, c, d },
            });
        }
    }
    out
}

/// `A(α) = {aα + b : a ≠ 0, b ∈ F_{q^n}}`, sorted.
pub fn affine_orbit(tower: &FieldTower, alpha: FieldElement) -> Result<Vec<FieldElement>> {
    ensure_in_s(tower, alpha)?;
    Ok(affine_orbit_unchecked(tower, alpha).into_iter().collect())
}

fn affine_orbit_unchecked(tower: &FieldTower, alpha: FieldElement) -> BTreeSet<FieldElement> {
    let fqn = tower.subfield(Level::Fqn);
    let mut out = BTreeSet::new();
    for &a in &fqn[1..] {
        let scaled = tower.mul(a, alpha);
        for &b in fqn.iter() {
            out.insert(tower.add(scaled, b));
        }
    }
    out
}

/// `O(α)`, the `PGL(2, q^n)`-orbit of `α`, sorted.
pub fn pl_orbit(tower: &FieldTower, alpha: FieldElement) -> Result<Vec<FieldElement>> {
    ensure_in_s(tower, alpha)?;
    let maps = all_projective_maps(tower);
    let orbit: BTreeSet<FieldElement> = maps
        .iter()
        .map(|m| pgl_apply(tower, m, alpha))
        .collect::<Result<_>>()?;
    Ok(orbit.into_iter().collect())
}

/// Identifier of an affine set: its minimal member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AffineSetId(pub FieldElement);

/// Identifier of a projective linear set: its minimal member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PlSetId(pub FieldElement);

/// Minimal member of `A(α)`, by enumeration (orbits have `q^n(q^n - 1)` elements).
pub fn affine_set_id(tower: &FieldTower, alpha: FieldElement) -> Result<AffineSetId> {
    ensure_in_s(tower, alpha)?;
    Ok(AffineSetId(
        *affine_orbit_unchecked(tower, alpha).iter().next().unwrap(),
    ))
}

pub fn pl_set_id(tower: &FieldTower, alpha: FieldElement) -> Result<PlSetId> {
    Ok(PlSetId(pl_orbit(tower, alpha)?[0]))
}

/// The `q^n + 1` affine sets making up `O(α)`: `A(α)` followed by
/// `A(1/(α + ξ))` for each `ξ ∈ F_{q^n}` in handle order.
pub fn decompose_pl_set(tower: &FieldTower, alpha: FieldElement) -> Result<Vec<AffineSetId>> {
    ensure_in_s(tower, alpha)?;
    let mut ids = vec![affine_set_id(tower, alpha)?];
    for &xi in tower.subfield(Level::Fqn).iter() {
        // α + ξ ≠ 0 because α ∉ F_{q^n}
        let shifted = tower.inv_nonzero(tower.add(alpha, xi));
        ids.push(affine_set_id(tower, shifted)?);
    }
    let distinct: BTreeSet<_> = ids.iter().collect();
    if distinct.len() != ids.len() {
        return Err(Error::Inconsistency(format!(
            "affine sets in the decomposition of O({alpha}) are not distinct"
        )));
    }
    Ok(ids)
}

/// `σ^i` applied to an affine set.
pub fn frobenius_on_affine_set(tower: &FieldTower, id: AffineSetId, i: u64) -> Result<AffineSetId> {
    affine_set_id(tower, tower.frobenius(id.0, i))
}

/// `σ^i` applied to a projective linear set.
pub fn frobenius_on_pl_set(tower: &FieldTower, id: PlSetId, i: u64) -> Result<PlSetId> {
    pl_set_id(tower, tower.frobenius(id.0, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{build_tower, BackendHint, TowerParams};
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn tower(q: u64, n: u64, r: u64) -> FieldTower {
        build_tower(TowerParams::from_q(q, n, r).unwrap(), BackendHint::Auto).unwrap()
    }

    fn random_s(t: &FieldTower, rng: &mut StdRng) -> FieldElement {
        loop {
            let a = FieldElement(rng.gen_range(0..t.order()));
            if t.in_s(a) {
                return a;
            }
        }
    }

    fn random_map(t: &FieldTower, rng: &mut StdRng) -> ProjectiveMap {
        let fqn = t.enumerate_subfield(Level::Fqn);
        loop {
            let pick = |rng: &mut StdRng| fqn[rng.gen_range(0..fqn.len())];
            if let Ok(m) = Matrix2::new(t, pick(rng), pick(rng), pick(rng), pick(rng)) {
                return ProjectiveMap::new(t, m);
            }
        }
    }

    #[test]
    fn affine_identity_and_composition() {
        let t = tower(2, 3, 5);
        let mut rng = StdRng::seed_from_u64(1);
        let fqn = t.enumerate_subfield(Level::Fqn);
        for _ in 0..200 {
            let alpha = random_s(&t, &mut rng);
            assert_eq!(affine_apply(&t, FieldElement::ONE, FieldElement::ZERO, alpha).unwrap(), alpha);
            let a1 = fqn[rng.gen_range(1..fqn.len())];
            let a2 = fqn[rng.gen_range(1..fqn.len())];
            let b1 = fqn[rng.gen_range(0..fqn.len())];
            let b2 = fqn[rng.gen_range(0..fqn.len())];
            let lhs = affine_apply(&t, a2, b2, affine_apply(&t, a1, b1, alpha).unwrap()).unwrap();
            // direct expansion: a2(a1 α + b1) + b2
            let rhs = affine_apply(&t, t.mul(a2, a1), t.add(t.mul(a2, b1), b2), alpha).unwrap();
            assert_eq!(lhs, rhs);
            assert!(t.in_s(lhs));
        }
    }

    #[test]
    fn affine_parameter_errors() {
        let t = tower(2, 3, 5);
        let g = t.primitive_element();
        assert!(matches!(
            affine_apply(&t, FieldElement::ZERO, FieldElement::ONE, g),
            Err(Error::Parameter(_))
        ));
        // g is not in F_{2^3}
        assert!(matches!(affine_apply(&t, g, FieldElement::ONE, g), Err(Error::Parameter(_))));
        assert!(Matrix2::new(&t, FieldElement::ONE, FieldElement::ONE, FieldElement::ONE, FieldElement::ONE).is_err());
    }

    #[test]
    fn pgl_group_action_laws() {
        let t = tower(2, 3, 5);
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..300 {
            let alpha = random_s(&t, &mut rng);
            let b = random_map(&t, &mut rng);
            let c = random_map(&t, &mut rng);
            assert_eq!(pgl_apply(&t, &ProjectiveMap::identity(), alpha).unwrap(), alpha);
            let inv = ProjectiveMap::inversion();
            assert_eq!(pgl_apply(&t, &inv, pgl_apply(&t, &inv, alpha).unwrap()).unwrap(), alpha);
            let inner = pgl_apply(&t, &c, alpha).unwrap();
            assert!(t.in_s(inner));
            let lhs = pgl_apply(&t, &b, inner).unwrap();
            let rhs = pgl_apply(&t, &b.compose(&t, &c), alpha).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn pole_is_a_domain_error() {
        let t = tower(2, 3, 3);
        // (α)/(α + 1) at α = 1
        let m = ProjectiveMap::new(
            &t,
            Matrix2::new(&t, FieldElement::ONE, FieldElement::ZERO, FieldElement::ONE, FieldElement::ONE).unwrap(),
        );
        assert!(matches!(pgl_apply(&t, &m, FieldElement::ONE), Err(Error::Domain(_))));
    }

    #[test]
    fn projective_map_normalization() {
        let t = tower(2, 3, 3);
        let mut rng = StdRng::seed_from_u64(3);
        let fqn = t.enumerate_subfield(Level::Fqn);
        for _ in 0..100 {
            let m = random_map(&t, &mut rng);
            let s = fqn[rng.gen_range(1..fqn.len())];
            let scaled = m.matrix().scale(&t, s);
            assert_eq!(ProjectiveMap::new(&t, scaled), m);
        }
        assert_eq!(ProjectiveMap::identity().projective_order(&t), 1);
        let maps = all_projective_maps(&t);
        assert_eq!(maps.len(), 504);
        let distinct: BTreeSet<_> = maps.iter().map(|m| (m.matrix.a, m.matrix.b, m.matrix.c, m.matrix.d)).collect();
        assert_eq!(distinct.len(), 504);
    }

    #[test]
    fn orbit_sizes_q2_n3() {
        let t = tower(2, 3, 3);
        let mut rng = StdRng::seed_from_u64(4);
        let alpha = random_s(&t, &mut rng);
        let a = affine_orbit(&t, alpha).unwrap();
        assert_eq!(a.len(), 56);
        assert!(a.iter().all(|&x| t.degree_over(x, Level::Fqn) == 3));
        let o = pl_orbit(&t, alpha).unwrap();
        assert_eq!(o.len(), 504);
        // |S| = 2^9 - 2^3 = 504: one projective linear set
        let s: Vec<FieldElement> = (0..t.order()).map(FieldElement).filter(|&x| t.in_s(x)).collect();
        assert_eq!(o, s);
    }

    #[test]
    fn orbit_requires_s() {
        let t = tower(2, 3, 3);
        assert!(matches!(affine_orbit(&t, FieldElement::ONE), Err(Error::Domain(_))));
        assert!(matches!(pl_orbit(&t, FieldElement::ZERO), Err(Error::Domain(_))));
        assert!(matches!(decompose_pl_set(&t, FieldElement::ONE), Err(Error::Domain(_))));
    }

    #[test]
    fn decomposition_partitions_the_pl_set() {
        for (q, n, r) in [(2, 3, 3), (2, 3, 5), (3, 2, 3)] {
            let t = tower(q, n, r);
            let qn = q.pow(n as u32) as usize;
            let mut rng = StdRng::seed_from_u64(5);
            let alpha = random_s(&t, &mut rng);
            let ids = decompose_pl_set(&t, alpha).unwrap();
            assert_eq!(ids.len(), qn + 1);
            let mut union = BTreeSet::new();
            for id in &ids {
                let orbit = affine_orbit(&t, id.0).unwrap();
                assert_eq!(orbit.len(), qn * (qn - 1));
                assert_eq!(orbit[0], id.0, "id is the minimal member");
                for x in orbit {
                    assert!(union.insert(x), "affine sets overlap");
                }
            }
            let o = pl_orbit(&t, alpha).unwrap();
            assert_eq!(union.into_iter().collect::<Vec<_>>(), o);
        }
    }

    #[test]
    fn decomposition_size_for_q_2_n_5() {
        // |O(α)| = 2^15 - 2^5 for every α of degree 5 over F_32, so (2,5,5)
        // and (2,5,3) share the decomposition count.
        let t = tower(2, 5, 3);
        let mut rng = StdRng::seed_from_u64(6);
        let alpha = random_s(&t, &mut rng);
        assert_eq!(decompose_pl_set(&t, alpha).unwrap().len(), 33);
    }

    #[test]
    fn frobenius_on_sets() {
        let t = tower(2, 3, 5);
        let mut rng = StdRng::seed_from_u64(7);
        let nr = t.params().nr();
        for _ in 0..5 {
            let alpha = random_s(&t, &mut rng);
            let aid = affine_set_id(&t, alpha).unwrap();
            assert_eq!(frobenius_on_affine_set(&t, aid, 0).unwrap(), aid);
            assert_eq!(frobenius_on_affine_set(&t, aid, nr).unwrap(), aid);
            // well-defined: any representative gives the same image
            let other = affine_orbit(&t, alpha).unwrap()[17];
            assert_eq!(
                frobenius_on_affine_set(&t, aid, 1).unwrap(),
                affine_set_id(&t, t.frobenius(other, 1)).unwrap()
            );

            let pid = pl_set_id(&t, alpha).unwrap();
            assert_eq!(frobenius_on_pl_set(&t, pid, nr).unwrap(), pid);
            let mut cur = pid;
            let mut len = 0;
            loop {
                cur = frobenius_on_pl_set(&t, cur, 1).unwrap();
                len += 1;
                if cur == pid {
                    break;
                }
            }
            assert_eq!(15 % len, 0, "orbit length {len} divides 15");
        }
    }

    #[test]
    fn stabilizers_are_trivial() {
        // exhaustive over PGL(2, 8) and PGL(2, 4)
        for (q, n, r) in [(2, 3, 3), (2, 2, 3)] {
            let t = tower(q, n, r);
            let maps = all_projective_maps(&t);
            let s: Vec<FieldElement> = (0..t.order()).map(FieldElement).filter(|&x| t.in_s(x)).collect();
            for &alpha in s.iter().step_by(7) {
                for m in &maps {
                    if pgl_apply(&t, m, alpha).unwrap() == alpha {
                        assert!(m.is_identity(), "{m:?} fixes {alpha}");
                    }
                }
            }
        }
        // sampled for q^n = 32
        let t = tower(2, 5, 3);
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..100 {
            let alpha = random_s(&t, &mut rng);
            for _ in 0..1000 {
                let m = random_map(&t, &mut rng);
                if !m.is_identity() {
                    assert_ne!(pgl_apply(&t, &m, alpha).unwrap(), alpha);
                }
            }
        }
    }
}
