//! Irreducible Goppa codes `C(α)` over `F_q` with locus `F_{q^n}`, their
//! extensions by an overall parity coordinate, and permutation certificates
//! for the maps that send codes to equivalent codes.

use std::io::Write;

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::fields::{FieldElement, FieldTower, Level};

/// Writes `x ∈ F_{q^{nr}}` in `F_q` coordinates over the power basis
/// `g^0, …, g^{nr-1}`.
pub struct FqCoordinates {
    nr: usize,
    t: usize,
    p: u64,
    /// `F_p`-basis of `F_q`
    fq_basis: Vec<FieldElement>,
    /// inverse of the matrix whose column `j·t + k` is `β_k g^j` in `F_p` coordinates
    inverse: Vec<Vec<u64>>,
}

fn inv_mod(a: u64, p: u64) -> u64 {
    crate::arith::mod_pow(a, p - 2, p)
}

fn invert_mod_p(mut m: Vec<Vec<u64>>, p: u64) -> Option<Vec<Vec<u64>>> {
    let d = m.len();
    let mut inv: Vec<Vec<u64>> = (0..d)
        .map(|i| (0..d).map(|j| u64::from(i == j)).collect())
        .collect();
    for col in 0..d {
        let pivot = (col..d).find(|&r| m[r][col] != 0)?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let s = inv_mod(m[col][col], p);
        for j in 0..d {
            m[col][j] = m[col][j] * s % p;
            inv[col][j] = inv[col][j] * s % p;
        }
        for r in 0..d {
            let f = m[r][col];
            if r == col || f == 0 {
                continue;
            }
            for j in 0..d {
                m[r][j] = (m[r][j] + (p - f) * m[col][j]) % p;
                inv[r][j] = (inv[r][j] + (p - f) * inv[col][j]) % p;
            }
        }
    }
    Some(inv)
}

impl FqCoordinates {
    pub fn new(tower: &FieldTower) -> Self {
        let params = tower.params();
        let (nr, t, p) = (params.nr() as usize, params.t as usize, params.p);
        let fq_basis = tower.fp_basis(Level::Fq);
        let power = tower.fq_power_basis();
        let d = tower.degree();
        let mut m = vec![vec![0u64; d]; d];
        for (j, &g) in power.iter().enumerate() {
            for (k, &b) in fq_basis.iter().enumerate() {
                for (row, c) in tower.coefficients(tower.mul(b, g)).into_iter().enumerate() {
                    m[row][j * t + k] = c;
                }
            }
        }
        let inverse = invert_mod_p(m, p).expect("β_k g^j is an F_p-basis");
        Self {
            nr,
            t,
            p,
            fq_basis,
            inverse,
        }
    }

    pub fn coordinates(&self, tower: &FieldTower, x: FieldElement) -> Vec<FieldElement> {
        let v = tower.coefficients(x);
        let c: Vec<u64> = self
            .inverse
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&v)
                    .fold(0u64, |acc, (&a, &b)| (acc + a * b) % self.p)
            })
            .collect();
        (0..self.nr)
            .map(|j| {
                (0..self.t).fold(FieldElement::ZERO, |acc, k| {
                    let digit = tower.prime_field_element(c[j * self.t + k]);
                    tower.add(acc, tower.mul(digit, self.fq_basis[k]))
                })
            })
            .collect()
    }
}

/// Row-reduced echelon form over `F_q`; returns the pivot columns.
fn rref(tower: &FieldTower, rows: &mut Vec<Vec<FieldElement>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(pivot) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, pivot);
        let s = tower.inv_nonzero(rows[r][col]);
        for x in rows[r].iter_mut() {
            *x = tower.mul(*x, s);
        }
        for i in 0..rows.len() {
            let f = rows[i][col];
            if i == r || f.is_zero() {
                continue;
            }
            for j in 0..ncols {
                let v = tower.mul(f, rows[r][j]);
                rows[i][j] = tower.sub(rows[i][j], v);
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank(tower: &FieldTower, rows: &[Vec<FieldElement>], ncols: usize) -> usize {
    rref(tower, &mut rows.to_vec(), ncols).len()
}

/// A basis of `{x : M x = 0}` over `F_q`.
pub fn kernel(tower: &FieldTower, rows: &[Vec<FieldElement>], ncols: usize) -> Vec<Vec<FieldElement>> {
    let mut m = rows.to_vec();
    let pivots = rref(tower, &mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![FieldElement::ZERO; ncols];
            v[f] = FieldElement::ONE;
            for (row, &pc) in m.iter().zip(&pivots) {
                v[pc] = tower.neg(row[f]);
            }
            v
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GoppaCode {
    pub alpha: FieldElement,
    /// `F_{q^n}` in handle order
    pub locus: Vec<FieldElement>,
    /// `nr` rows of length `q^n` with entries in `F_q`
    pub parity_rows: Vec<Vec<FieldElement>>,
    pub dimension: usize,
    /// `F_q`-basis of the code
    pub basis: Vec<Vec<FieldElement>>,
}

impl GoppaCode {
    pub fn length(&self) -> usize {
        self.locus.len()
    }

    /// Membership by the parity rows.
    pub fn contains(&self, tower: &FieldTower, word: &[FieldElement]) -> bool {
        word.len() == self.length()
            && self.parity_rows.iter().all(|row| {
                row.iter()
                    .zip(word)
                    .fold(FieldElement::ZERO, |acc, (&h, &c)| tower.add(acc, tower.mul(h, c)))
                    .is_zero()
            })
    }
}

fn ensure_in_s(tower: &FieldTower, alpha: FieldElement) -> Result<()> {
    if alpha.handle() >= tower.order() || !tower.in_s(alpha) {
        return Err(Error::Domain(format!("{alpha} is not in S")));
    }
    Ok(())
}

/// `H(α)` expanded over `F_q`, and the code it defines.
pub fn parity_check(tower: &FieldTower, alpha: FieldElement) -> Result<GoppaCode> {
    ensure_in_s(tower, alpha)?;
    let coords = FqCoordinates::new(tower);
    let locus = tower.enumerate_subfield(Level::Fqn);
    let nr = tower.params().nr() as usize;
    let mut parity_rows = vec![Vec::with_capacity(locus.len()); nr];
    for &z in &locus {
        let h = tower.inv_nonzero(tower.sub(alpha, z));
        for (row, c) in parity_rows.iter_mut().zip(coords.coordinates(tower, h)) {
            row.push(c);
        }
    }
    let basis = kernel(tower, &parity_rows, locus.len());
    Ok(GoppaCode {
        alpha,
        dimension: basis.len(),
        locus,
        parity_rows,
        basis,
    })
}

fn check_word(tower: &FieldTower, word: &[FieldElement], len: usize) -> Result<()> {
    if word.len() != len {
        return Err(param(format!("word has length {}, expected {len}", word.len())));
    }
    if let Some(c) = word
        .iter()
        .find(|&&c| c.handle() >= tower.order() || !tower.in_level(c, Level::Fq))
    {
        return Err(param(format!("coordinate {c} is not in F_q")));
    }
    Ok(())
}

/// Whether `Σ c_i / (β - ζ_i) = 0` for every conjugate `β` of `α` over `F_{q^n}`.
pub fn syndrome_check(tower: &FieldTower, word: &[FieldElement], alpha: FieldElement) -> Result<bool> {
    ensure_in_s(tower, alpha)?;
    let locus = tower.subfield(Level::Fqn);
    check_word(tower, word, locus.len())?;
    let params = tower.params();
    Ok((0..params.r).all(|j| {
        let beta = tower.frobenius(alpha, params.n * j);
        locus
            .iter()
            .zip(word)
            .filter(|(_, c)| !c.is_zero())
            .fold(FieldElement::ZERO, |acc, (&z, &c)| {
                tower.add(acc, tower.mul(c, tower.inv_nonzero(tower.sub(beta, z))))
            })
            .is_zero()
    }))
}

/// `C(α)` extended by an overall parity coordinate.
#[derive(Clone, Debug, Serialize)]
pub struct ExtendedCode {
    pub base: GoppaCode,
    pub basis: Vec<Vec<FieldElement>>,
}

impl ExtendedCode {
    pub fn length(&self) -> usize {
        self.base.length() + 1
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, tower: &FieldTower, word: &[FieldElement]) -> bool {
        word.len() == self.length()
            && self.base.contains(tower, &word[..self.base.length()])
            && word.iter().fold(FieldElement::ZERO, |a, &c| tower.add(a, c)).is_zero()
    }

    /// Drops the parity coordinate.
    pub fn puncture(&self) -> Vec<Vec<FieldElement>> {
        self.basis
            .iter()
            .map(|w| w[..self.base.length()].to_vec())
            .collect()
    }
}

pub fn extend(tower: &FieldTower, code: &GoppaCode) -> ExtendedCode {
    let basis = code
        .basis
        .iter()
        .map(|w| {
            let sum = w.iter().fold(FieldElement::ZERO, |a, &c| tower.add(a, c));
            let mut e = w.clone();
            e.push(tower.neg(sum));
            e
        })
        .collect();
    ExtendedCode {
        base: code.clone(),
        basis,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CodeMap {
    /// `α → α^{q^i}`
    Frobenius { i: u64 },
    /// `α → aα + b` with `a, b ∈ F_{q^n}`, `a ≠ 0`
    Affine { a: FieldElement, b: FieldElement },
}

/// `c ∈ C(image)` iff `w ∈ C(alpha)` where `w_i = c_{permutation[i]}`; the
/// columns of `H(image)` are those of `H(alpha)` permuted and multiplied by
/// `column_scale`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceCertificate {
    pub alpha: FieldElement,
    pub map: CodeMap,
    pub image: FieldElement,
    pub permutation: Vec<usize>,
    pub column_scale: FieldElement,
}

pub fn permute(word: &[FieldElement], permutation: &[usize]) -> Vec<FieldElement> {
    permutation.iter().map(|&j| word[j]).collect()
}

/// Checks that the permutation carries `C(image)` onto `C(alpha)` in both
/// directions, on kernel bases.
pub fn verify_certificate(tower: &FieldTower, cert: &EquivalenceCertificate) -> Result<()> {
    let source = parity_check(tower, cert.alpha)?;
    let target = parity_check(tower, cert.image)?;
    let fail = |what: &str| {
        Err(Error::Inconsistency(format!(
            "certificate for {:?} at {} fails: {what}",
            cert.map, cert.alpha
        )))
    };
    if source.dimension != target.dimension {
        return fail("dimensions differ");
    }
    for c in &target.basis {
        if !source.contains(tower, &permute(c, &cert.permutation)) {
            return fail("a codeword of the image code is not carried into C(alpha)");
        }
    }
    let mut inverse = vec![0; cert.permutation.len()];
    for (i, &j) in cert.permutation.iter().enumerate() {
        inverse[j] = i;
    }
    for w in &source.basis {
        if !target.contains(tower, &permute(w, &inverse)) {
            return fail("a codeword of C(alpha) has no preimage");
        }
    }
    Ok(())
}

/// Builds the certificate for `map` at `α` and verifies it.
pub fn equivalence_witness(
    tower: &FieldTower,
    alpha: FieldElement,
    map: CodeMap,
) -> Result<EquivalenceCertificate> {
    ensure_in_s(tower, alpha)?;
    let locus = tower.enumerate_subfield(Level::Fqn);
    let position = |z: FieldElement| locus.binary_search(&z).expect("image lies in F_q^n");
    let (image, permutation, column_scale) = match map {
        CodeMap::Affine { a, b } => {
            let image = crate::actions::affine_apply(tower, a, b, alpha)?;
            let perm = locus
                .iter()
                .map(|&z| position(tower.add(tower.mul(a, z), b)))
                .collect();
            (image, perm, tower.inv_nonzero(a))
        }
        CodeMap::Frobenius { i } => {
            let image = tower.frobenius(alpha, i);
            let perm = locus.iter().map(|&z| position(tower.frobenius(z, i))).collect();
            (image, perm, FieldElement::ONE)
        }
    };
    let cert = EquivalenceCertificate {
        alpha,
        map,
        image,
        permutation,
        column_scale,
    };
    verify_certificate(tower, &cert)?;
    Ok(cert)
}

/// Writes the parity matrix as text: a header line, then one row per line of
/// `F_q` digits (the index of the entry among the `F_q` handles in ascending
/// order).
pub fn write_parity_matrix<W: Write>(tower: &FieldTower, code: &GoppaCode, mut out: W) -> Result<()> {
    let p = tower.params();
    let fq = tower.subfield(Level::Fq);
    writeln!(
        out,
        "p={} t={} n={} r={} alpha={}",
        p.p,
        p.t,
        p.n,
        p.r,
        code.alpha.handle()
    )?;
    for row in &code.parity_rows {
        let digits: Vec<String> = row
            .iter()
            .map(|x| fq.binary_search(x).expect("entry in F_q").to_string())
            .collect();
        writeln!(out, "{}", digits.join(" "))?;
    }
    Ok(())
}
