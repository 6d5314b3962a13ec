//! The explicit field tower `F_p ⊂ F_q ⊂ F_{q^n} (⊂ F_{q^r}) ⊂ F_{q^{nr}}`.
//!
//! Every element of `F_{q^{nr}} = F_p[x]/(f)` is addressed by a [`FieldElement`]
//! handle: the base-`p` integer whose digit `i` is the coefficient of `x^i`.
//! Subfields are not separate types; they are the fixed-point sets of the
//! appropriate Frobenius powers, enumerated once and cached.

mod binary;
pub mod cache;
pub(crate) mod fp_poly;

use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;

use crate::arith;
use crate::error::{param, Error, Result};

use binary::BinaryField;

/// Default largest tower order for which discrete-log tables are built.
pub const DEFAULT_LOG_TABLE_LIMIT: u64 = 1 << 24;

/// Parameters `q = p^t`, `n`, `r` of a tower.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TowerParams {
    pub p: u64,
    pub t: u32,
    pub n: u64,
    pub r: u64,
}

impl TowerParams {
    pub fn new(p: u64, t: u32, n: u64, r: u64) -> Result<Self> {
        if !arith::is_prime(p) {
            return Err(param(format!("p = {p} is not prime")));
        }
        if t == 0 {
            return Err(param("t must be positive"));
        }
        if !arith::is_prime(n) {
            return Err(param(format!("n = {n} is not prime")));
        }
        if !arith::is_prime(r) {
            return Err(param(format!("r = {r} is not prime")));
        }
        if r < 3 {
            return Err(param(format!("r = {r}: degree must be an odd prime (r > 2)")));
        }
        let params = Self { p, t, n, r };
        // handles are u64
        let degree = params.degree();
        let bits = (p as f64).log2() * degree as f64;
        if bits >= 64.0 || arith::checked_pow(p, degree).is_err() {
            return Err(Error::Capacity {
                required: format!("{p}^{degree} field elements"),
                budget: "2^64 handles".into(),
            });
        }
        Ok(params)
    }

    /// Builds parameters from a prime power `q`.
    pub fn from_q(q: u64, n: u64, r: u64) -> Result<Self> {
        let (p, t) = arith::prime_power(q)?;
        Self::new(p, t, n, r)
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.t)
    }

    /// Degree of the top field over `F_p`: `t·n·r`.
    pub fn degree(&self) -> u64 {
        self.t as u64 * self.n * self.r
    }

    /// Order of the Frobenius group `G = <σ>`, i.e. `nr`.
    pub fn nr(&self) -> u64 {
        self.n * self.r
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.degree() as u32)
    }
}

impl fmt::Display for TowerParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(q={}, n={}, r={})", self.q(), self.n, self.r)
    }
}

/// Subfield levels of the tower.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Level {
    /// `F_q`
    Fq,
    /// `F_{q^n}`
    Fqn,
    /// `F_{q^r}` (equal to `F_{q^n}` when `n = r`)
    Fqr,
    /// the whole tower `F_{q^{nr}}`
    Full,
}

impl Level {
    /// Degree `m` of the level over `F_q`.
    pub fn m(self, params: &TowerParams) -> u64 {
        match self {
            Level::Fq => 1,
            Level::Fqn => params.n,
            Level::Fqr => params.r,
            Level::Full => params.nr(),
        }
    }
}

/// Handle into a [`FieldTower`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FieldElement(pub u64);

impl FieldElement {
    pub const ZERO: Self = Self(0);
    pub const ONE: Self = Self(1);

    pub fn handle(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum BackendHint {
    /// Log tables up to the configured limit, polynomial arithmetic above.
    #[default]
    Auto,
    LogTables,
    Polynomial,
}

#[derive(Clone, Copy, Debug)]
pub struct TowerConfig {
    pub backend: BackendHint,
    /// Largest order for which log tables are built under [`BackendHint::Auto`];
    /// also the hard cap for [`BackendHint::LogTables`].
    pub log_table_limit: u64,
}

impl Default for TowerConfig {
    fn default() -> Self {
        Self {
            backend: BackendHint::Auto,
            log_table_limit: DEFAULT_LOG_TABLE_LIMIT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BackendKind {
    LogTables,
    Polynomial,
}

/// Discrete log / antilog tables plus Zech logarithms for odd `p`.
pub(crate) struct LogTables {
    /// `log[h]` for `h != 0`; `log[0]` is unused.
    pub log: Vec<u32>,
    /// `exp[k] = g^k` for `0 <= k < order - 1`.
    pub exp: Vec<u32>,
    /// `zech[k] = log(1 + g^k)`, `ZECH_NONE` where `1 + g^k = 0`. Empty for `p = 2`.
    pub zech: Vec<u32>,
}

const ZECH_NONE: u32 = u32::MAX;

enum Backend {
    LogTables(LogTables),
    Polynomial,
}

/// An explicit, immutable field tower. Safe to share across threads.
pub struct FieldTower {
    params: TowerParams,
    degree: usize,
    order: u64,
    /// monic modulus, `degree + 1` coefficients in ascending order
    modulus: Vec<u64>,
    /// `p^i` for `i <= degree`
    place: Vec<u64>,
    binary: Option<BinaryField>,
    primitive: FieldElement,
    backend: Backend,
    subfields: [OnceLock<Vec<FieldElement>>; 3],
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldTower")
            .field("params", &self.params)
            .field("modulus", &self.modulus)
            .field("primitive", &self.primitive)
            .field("backend", &self.backend_kind())
            .finish()
    }
}

/// Builds the tower with the default log-table limit.
pub fn build_tower(params: TowerParams, backend: BackendHint) -> Result<FieldTower> {
    FieldTower::build(
        params,
        TowerConfig {
            backend,
            ..TowerConfig::default()
        },
    )
}

impl FieldTower {
    pub fn build(params: TowerParams, config: TowerConfig) -> Result<Self> {
        let params = TowerParams::new(params.p, params.t, params.n, params.r)?;
        let degree = params.degree() as usize;
        let modulus = fp_poly::smallest_irreducible(params.p, degree).coeffs;
        Self::assemble(params, modulus, None, None, config)
    }

    /// Shared by [`FieldTower::build`] and the cache loader. `primitive` is
    /// re-verified when supplied.
    pub(crate) fn assemble(
        params: TowerParams,
        modulus: Vec<u64>,
        primitive: Option<u64>,
        tables: Option<(Vec<u32>, Vec<u32>)>,
        config: TowerConfig,
    ) -> Result<Self> {
        let degree = params.degree() as usize;
        let order = params.order();
        let use_tables = match config.backend {
            BackendHint::Polynomial => false,
            BackendHint::Auto => order <= config.log_table_limit.min(1 << 32),
            BackendHint::LogTables => {
                let cap = config.log_table_limit.min(1 << 32);
                if order > cap {
                    return Err(Error::Capacity {
                        required: format!("{}^{} log-table entries", params.p, degree),
                        budget: format!("{cap}"),
                    });
                }
                true
            }
        };
        let place = (0..=degree).map(|i| params.p.pow(i as u32)).collect();
        let binary = (params.p == 2).then(|| BinaryField::new(&modulus));
        let mut tower = Self {
            params,
            degree,
            order,
            modulus,
            place,
            binary,
            primitive: FieldElement::ONE,
            backend: Backend::Polynomial,
            subfields: Default::default(),
        };
        tower.primitive = match primitive {
            Some(h) => {
                let g = FieldElement(h);
                if h >= order || !tower.is_primitive(g) {
                    return Err(Error::Cache(format!("handle {h} is not a primitive element")));
                }
                g
            }
            None => tower.find_primitive(),
        };
        if use_tables {
            let built = match tables {
                Some((log, exp)) => tower.adopt_log_tables(log, exp)?,
                None => tower.build_log_tables(),
            };
            tower.backend = Backend::LogTables(built);
        }
        tower.verify_subfields()?;
        Ok(tower)
    }

    pub fn params(&self) -> &TowerParams {
        &self.params
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Degree of the tower over the prime field.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn primitive_element(&self) -> FieldElement {
        self.primitive
    }

    pub fn backend_kind(&self) -> BackendKind {
        match self.backend {
            Backend::LogTables(_) => BackendKind::LogTables,
            Backend::Polynomial => BackendKind::Polynomial,
        }
    }

    pub(crate) fn log_tables(&self) -> Option<&LogTables> {
        match &self.backend {
            Backend::LogTables(t) => Some(t),
            Backend::Polynomial => None,
        }
    }

    /// Validates a raw handle.
    pub fn element(&self, handle: u64) -> Result<FieldElement> {
        if handle < self.order {
            Ok(FieldElement(handle))
        } else {
            Err(param(format!("handle {handle} outside field of order {}", self.order)))
        }
    }

    /// The element of `F_p` with value `c` (embedded as a constant polynomial).
    pub fn prime_field_element(&self, c: u64) -> FieldElement {
        FieldElement(c % self.params.p)
    }

    pub fn coefficients(&self, a: FieldElement) -> Vec<u64> {
        let p = self.params.p;
        let mut h = a.0;
        (0..self.degree)
            .map(|_| {
                let d = h % p;
                h /= p;
                d
            })
            .collect()
    }

    pub fn from_coefficients(&self, coeffs: &[u64]) -> Result<FieldElement> {
        if coeffs.len() != self.degree {
            return Err(param(format!(
                "expected {} coefficients, got {}",
                self.degree,
                coeffs.len()
            )));
        }
        if let Some(c) = coeffs.iter().find(|&&c| c >= self.params.p) {
            return Err(param(format!("coefficient {c} not in F_{}", self.params.p)));
        }
        Ok(FieldElement(
            coeffs.iter().zip(&self.place).map(|(c, w)| c * w).sum(),
        ))
    }

    // ----- arithmetic -------------------------------------------------------

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.params.p == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        if let Backend::LogTables(t) = &self.backend {
            return self.zech_add(t, a, b);
        }
        self.digit_add(a, b)
    }

    fn digit_add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let p = self.params.p;
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0;
        for &w in &self.place[..self.degree] {
            out += (x % p + y % p) % p * w;
            x /= p;
            y /= p;
        }
        FieldElement(out)
    }

    #[inline]
    fn zech_add(&self, t: &LogTables, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        let m = self.order - 1;
        let la = t.log[a.0 as usize] as u64;
        let lb = t.log[b.0 as usize] as u64;
        let z = t.zech[((lb + m - la) % m) as usize];
        if z == ZECH_NONE {
            FieldElement::ZERO
        } else {
            FieldElement(t.exp[((la + z as u64) % m) as usize] as u64)
        }
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if self.params.p == 2 {
            return a;
        }
        let p = self.params.p;
        let mut x = a.0;
        let mut out = 0;
        for &w in &self.place[..self.degree] {
            out += (p - x % p) % p * w;
            x /= p;
        }
        FieldElement(out)
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match &self.backend {
            Backend::LogTables(t) => {
                if a.is_zero() || b.is_zero() {
                    return FieldElement::ZERO;
                }
                let m = self.order - 1;
                let k = (t.log[a.0 as usize] as u64 + t.log[b.0 as usize] as u64) % m;
                FieldElement(t.exp[k as usize] as u64)
            }
            Backend::Polynomial => self.poly_mul(a, b),
        }
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.inv_nonzero(a))
    }

    /// Inverse of a known-nonzero element.
    #[inline]
    pub(crate) fn inv_nonzero(&self, a: FieldElement) -> FieldElement {
        debug_assert!(!a.is_zero());
        match &self.backend {
            Backend::LogTables(t) => {
                let m = self.order - 1;
                let l = t.log[a.0 as usize] as u64;
                FieldElement(t.exp[((m - l) % m) as usize] as u64)
            }
            Backend::Polynomial => match &self.binary {
                Some(bin) => FieldElement(bin.inv(a.0)),
                None => self.poly_pow(a, self.order - 2),
            },
        }
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e`, with `0^0 = 1`.
    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if e == 0 {
            return FieldElement::ONE;
        }
        if a.is_zero() {
            return FieldElement::ZERO;
        }
        match &self.backend {
            Backend::LogTables(t) => {
                let m = (self.order - 1) as u128;
                let k = t.log[a.0 as usize] as u128 * (e as u128 % m) % m;
                FieldElement(t.exp[k as usize] as u64)
            }
            Backend::Polynomial => self.poly_pow(a, e),
        }
    }

    /// `σ^i(a) = a^{q^i}`, `i` taken modulo `nr`.
    #[inline]
    pub fn frobenius(&self, a: FieldElement, i: u64) -> FieldElement {
        let i = i % self.params.nr();
        if i == 0 || a.0 < self.params.p {
            // F_p is fixed pointwise
            return a;
        }
        let steps = i * self.params.t as u64;
        match (&self.backend, &self.binary) {
            (Backend::Polynomial, Some(bin)) => {
                let mut x = a.0;
                for _ in 0..steps {
                    x = bin.square(x);
                }
                FieldElement(x)
            }
            _ => {
                let m = self.order - 1;
                let e = arith::mod_pow(self.params.p, steps, m);
                self.pow(a, e)
            }
        }
    }

    fn poly_mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if let Some(bin) = &self.binary {
            return FieldElement(bin.mul(a.0, b.0));
        }
        let p = self.params.p;
        let d = self.degree;
        let x = self.coefficients(a);
        let y = self.coefficients(b);
        let mut prod = vec![0u64; 2 * d];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + xi * yj) % p;
            }
        }
        // reduce by the monic modulus from the top
        for top in (d..2 * d).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for (j, &m) in self.modulus[..d].iter().enumerate() {
                let idx = top - d + j;
                prod[idx] = (prod[idx] + (p - m) * c) % p;
            }
        }
        FieldElement(prod[..d].iter().zip(&self.place).map(|(c, w)| c * w).sum())
    }

    fn poly_pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut acc = FieldElement::ONE;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.poly_mul(acc, base);
            }
            base = self.poly_mul(base, base);
            e >>= 1;
        }
        acc
    }

    // ----- construction helpers --------------------------------------------

    fn group_order_prime_factors(&self) -> Vec<u64> {
        arith::factorize(self.order - 1).keys().copied().collect()
    }

    fn is_primitive(&self, g: FieldElement) -> bool {
        if g.is_zero() {
            return false;
        }
        let m = self.order - 1;
        if self.poly_pow(g, m) != FieldElement::ONE {
            return false;
        }
        self.group_order_prime_factors()
            .iter()
            .all(|&l| self.poly_pow(g, m / l) != FieldElement::ONE)
    }

    /// Ascending handle search for the first generator of the multiplicative group.
    fn find_primitive(&self) -> FieldElement {
        let m = self.order - 1;
        let primes = self.group_order_prime_factors();
        (1..self.order)
            .map(FieldElement)
            .find(|&g| primes.iter().all(|&l| self.poly_pow(g, m / l) != FieldElement::ONE))
            .expect("a finite field has a primitive element")
    }

    fn build_log_tables(&self) -> LogTables {
        let m = (self.order - 1) as usize;
        let mut exp = Vec::with_capacity(m);
        let mut log = vec![0u32; self.order as usize];
        let mut x = FieldElement::ONE;
        for k in 0..m {
            exp.push(x.0 as u32);
            log[x.0 as usize] = k as u32;
            x = self.poly_mul(x, self.primitive);
        }
        self.finish_log_tables(log, exp)
    }

    /// Accepts tables read from a cache after checking they are mutually
    /// inverse and follow successive multiplication by the primitive element.
    fn adopt_log_tables(&self, log: Vec<u32>, exp: Vec<u32>) -> Result<LogTables> {
        let m = (self.order - 1) as usize;
        if log.len() != self.order as usize || exp.len() != m {
            return Err(Error::Cache("log table sizes do not match the field".into()));
        }
        for (k, &h) in exp.iter().enumerate() {
            let next = exp[(k + 1) % m] as u64;
            if h as u64 >= self.order
                || log[h as usize] as usize != k
                || self.poly_mul(FieldElement(h as u64), self.primitive).0 != next
            {
                return Err(Error::Cache(format!("log tables inconsistent at exponent {k}")));
            }
        }
        Ok(self.finish_log_tables(log, exp))
    }

    fn finish_log_tables(&self, log: Vec<u32>, exp: Vec<u32>) -> LogTables {
        let zech = if self.params.p == 2 {
            Vec::new()
        } else {
            // 1 + g^k: increment the constant digit
            let p = self.params.p;
            exp.iter()
                .map(|&h| {
                    let h = h as u64;
                    let sum = if h % p == p - 1 { h - (p - 1) } else { h + 1 };
                    if sum == 0 {
                        ZECH_NONE
                    } else {
                        log[sum as usize]
                    }
                })
                .collect()
        };
        LogTables { log, exp, zech }
    }

    /// Embeds each proper level as `{0} ∪ <g^{(N-1)/(q^m-1)}>` and checks the
    /// result against the Frobenius fixed-point predicate.
    fn verify_subfields(&self) -> Result<()> {
        for level in [Level::Fq, Level::Fqn, Level::Fqr] {
            let elems = self.enumerate_subfield(level);
            let m = level.m(&self.params);
            let expected = self.params.q().pow(m as u32);
            if elems.len() as u64 != expected {
                return Err(Error::Inconsistency(format!(
                    "{level:?} has {} elements, expected {expected}",
                    elems.len()
                )));
            }
            if let Some(a) = elems.iter().find(|&&a| self.frobenius(a, m) != a) {
                return Err(Error::Inconsistency(format!(
                    "{a} embedded in {level:?} is not fixed by σ^{m}"
                )));
            }
        }
        Ok(())
    }

    fn embed_subfield(&self, m: u64) -> Vec<FieldElement> {
        let size = self.params.q().pow(m as u32);
        let step = (self.order - 1) / (size - 1);
        let w = self.pow(self.primitive, step);
        let mut out = Vec::with_capacity(size as usize);
        out.push(FieldElement::ZERO);
        let mut x = FieldElement::ONE;
        for _ in 0..size - 1 {
            out.push(x);
            x = self.mul(x, w);
        }
        out.sort_unstable();
        out
    }

    // ----- subfields ---------------------------------------------------------

    /// All elements of the given level, sorted by handle. Always contains 0 and 1.
    pub fn enumerate_subfield(&self, level: Level) -> Vec<FieldElement> {
        self.subfield(level).to_vec()
    }

    /// Borrowing form of [`FieldTower::enumerate_subfield`]. `Level::Full`
    /// is not cached and must go through `enumerate_subfield`.
    pub fn subfield(&self, level: Level) -> std::borrow::Cow<'_, [FieldElement]> {
        let slot = match level {
            Level::Fq => 0,
            Level::Fqn => 1,
            Level::Fqr => 2,
            Level::Full => {
                return std::borrow::Cow::Owned((0..self.order).map(FieldElement).collect())
            }
        };
        let m = level.m(&self.params);
        std::borrow::Cow::Borrowed(self.subfields[slot].get_or_init(|| self.embed_subfield(m)))
    }

    /// `a ∈` level, by the Frobenius fixed-point criterion.
    pub fn in_level(&self, a: FieldElement, level: Level) -> bool {
        self.frobenius(a, level.m(&self.params)) == a
    }

    /// Degree of the minimal polynomial of `a` over the given level.
    pub fn degree_over(&self, a: FieldElement, level: Level) -> u64 {
        let base = level.m(&self.params);
        let rel = self.params.nr() / base;
        arith::divisors(rel)
            .into_iter()
            .find(|&d| self.frobenius(a, base * d) == a)
            .expect("nr/m always fixes every element")
    }

    /// Whether `a ∈ S`, i.e. `a` has degree `r` over `F_{q^n}`.
    #[inline]
    pub fn in_s(&self, a: FieldElement) -> bool {
        // r is prime, so the degree is 1 or r
        self.frobenius(a, self.params.n) != a
    }

    /// A fixed `F_q`-basis of the tower: `g^0, ..., g^{nr-1}` for the primitive `g`.
    pub fn fq_power_basis(&self) -> Vec<FieldElement> {
        (0..self.params.nr())
            .map(|i| self.pow(self.primitive, i))
            .collect()
    }

    /// An `F_p`-basis of the given level (used for translation generators).
    pub fn fp_basis(&self, level: Level) -> Vec<FieldElement> {
        // greedy: keep elements not in the F_p-span of those already chosen
        let p = self.params.p;
        let mut span = vec![FieldElement::ZERO];
        let mut basis = Vec::new();
        let target = self.params.t as u64 * level.m(&self.params);
        for &e in self.subfield(level).iter() {
            if basis.len() as u64 == target {
                break;
            }
            if span.contains(&e) {
                continue;
            }
            basis.push(e);
            let mut next = Vec::with_capacity(span.len() * p as usize);
            for &s in &span {
                let mut x = s;
                for _ in 0..p {
                    next.push(x);
                    x = self.add(x, e);
                }
            }
            span = next;
        }
        basis
    }
}
