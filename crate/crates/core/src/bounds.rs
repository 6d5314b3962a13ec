//! Closed-form fixed-set counts per subgroup of `G`, Burnside aggregation and
//! the resulting upper bounds on affine and projective-linear orbit counts.
//!
//! Everything is exact integer arithmetic on [`BigUint`]; `q^{nr}` overflows
//! `u64` well inside the interesting parameter range.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::arith::{self, mod_pow};
use crate::error::{param, Error, Result};

/// Upper limit on `log2(q^{nr})`, to keep a typo from allocating gigabytes.
const MAX_BITS: f64 = (1u64 << 20) as f64;

pub(crate) fn serialize_big<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    let n: serde_json::Number = v.to_string().parse().map_err(serde::ser::Error::custom)?;
    n.serialize(s)
}

fn serialize_big_opt<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => serialize_big(v, s),
        None => s.serialize_none(),
    }
}

/// `(q, n, r)` for the integer side; no field is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundParams {
    pub q: u64,
    pub p: u64,
    pub t: u32,
    pub n: u64,
    pub r: u64,
}

impl BoundParams {
    pub fn new(q: u64, n: u64, r: u64) -> Result<Self> {
        let (p, t) = arith::prime_power(q)?;
        if !arith::is_prime(n) {
            return Err(param(format!("n = {n} is not prime")));
        }
        if !arith::is_prime(r) {
            return Err(param(format!("r = {r} is not prime")));
        }
        if r == 2 {
            return Err(param("r = 2 is not supported (r must be an odd prime)"));
        }
        if (n * r) as f64 * (q as f64).log2() > MAX_BITS {
            return Err(Error::Capacity {
                required: format!("q^{{nr}} = {q}^{}", n * r),
                budget: "2^(2^20)".into(),
            });
        }
        Ok(Self { q, p, t, n, r })
    }

    pub fn n_equals_r(&self) -> bool {
        self.n == self.r
    }

    pub fn group_order(&self) -> u64 {
        self.n * self.r
    }

    fn big_q(&self) -> BigUint {
        BigUint::from(self.q)
    }

    /// `q^n`
    pub fn field_size(&self) -> BigUint {
        self.big_q().pow(self.n as u32)
    }

    fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.n == 2 {
            w.push(
                "n = 2 is outside the validated range of the fixed-count formulas; \
                 confirm with the oracle before relying on this value"
                    .into(),
            );
        }
        w
    }
}

/// `|S| = q^{nr} - q^n`
pub fn s_size(params: &BoundParams) -> BigUint {
    params.big_q().pow((params.n * params.r) as u32) - params.field_size()
}

/// `|𝔸| = |S| / (q^n(q^n - 1))`
pub fn affine_set_count(params: &BoundParams) -> BigUint {
    let qn = params.field_size();
    s_size(params) / (&qn * (&qn - 1u32))
}

/// `|𝕆| = |S| / (q^{3n} - q^n)`
pub fn pl_set_count(params: &BoundParams) -> BigUint {
    let qn = params.field_size();
    s_size(params) / (qn.pow(3) - &qn)
}

/// The cyclic subgroup `⟨σ^e⟩` of `G`, with the number of elements of `G`
/// that generate exactly this subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SubgroupSpec {
    pub exponent: u64,
    pub order: u64,
    pub fresh_element_count: u64,
}

/// Subgroups of `G` from the trivial one upwards.
pub fn subgroup_lattice(params: &BoundParams) -> Vec<SubgroupSpec> {
    let (n, r) = (params.n, params.r);
    let g = params.group_order();
    let spec = |e: u64, fresh: u64| SubgroupSpec {
        exponent: e,
        order: g / arith::gcd(e, g),
        fresh_element_count: fresh,
    };
    if n == r {
        vec![spec(n * n, 1), spec(n, n - 1), spec(1, n * n - n)]
    } else {
        vec![
            spec(n * r, 1),
            spec(n, r - 1),
            spec(r, n - 1),
            spec(1, (n - 1) * (r - 1)),
        ]
    }
}

/// Divisibility flags driving the case analysis. For `n = r` they are taken
/// with `n` in place of `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CaseFlags {
    pub r_equals_p: bool,
    pub r_divides_q_minus_1: bool,
    pub r_divides_qn_minus_1: bool,
    pub r_divides_q_plus_1: bool,
    pub r_divides_qn_plus_1: bool,
}

impl CaseFlags {
    pub fn new(params: &BoundParams) -> Self {
        let (q, n, r) = (params.q, params.n, params.r);
        let qn = mod_pow(q, n, r);
        let q1 = q % r;
        Self {
            r_equals_p: r == params.p,
            r_divides_q_minus_1: q1 == 1 % r,
            r_divides_qn_minus_1: qn == 1 % r,
            r_divides_q_plus_1: (q1 + 1) % r == 0,
            r_divides_qn_plus_1: (qn + 1) % r == 0,
        }
    }
}

/// Which closed-form branch of the final counting theorem applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `n = r`, branch 1–4.
    NEqualsR(u8),
    /// `n ≠ r`, branch 1–4.
    NNotEqualR(u8),
    /// No stated branch condition matches; only the fixed-count table applies.
    TableDerived,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CaseLabel {
    pub flags: CaseFlags,
    pub branch: Branch,
}

pub fn case_label(params: &BoundParams) -> CaseLabel {
    let f = CaseFlags::new(params);
    let branch = if params.n_equals_r() {
        Branch::NEqualsR(if f.r_equals_p {
            1
        } else if f.r_divides_qn_minus_1 {
            2
        } else if f.r_divides_qn_plus_1 {
            3
        } else {
            4
        })
    } else if f.r_equals_p {
        Branch::NNotEqualR(1)
    } else if f.r_divides_q_minus_1
        || (f.r_divides_qn_minus_1 && !f.r_divides_q_minus_1 && f.r_divides_q_plus_1)
        || (!f.r_divides_qn_minus_1 && f.r_divides_qn_plus_1 && f.r_divides_q_plus_1)
    {
        Branch::NNotEqualR(2)
    } else if !f.r_divides_qn_minus_1 && f.r_divides_qn_plus_1 && !f.r_divides_q_plus_1 {
        Branch::NNotEqualR(3)
    } else if !f.r_divides_qn_minus_1 && !f.r_divides_qn_plus_1 {
        Branch::NNotEqualR(4)
    } else {
        Branch::TableDerived
    };
    CaseLabel { flags: f, branch }
}

fn lookup(params: &BoundParams, subgroup: &SubgroupSpec) -> Result<usize> {
    subgroup_lattice(params)
        .iter()
        .position(|s| s.exponent == subgroup.exponent)
        .ok_or_else(|| {
            param(format!(
                "σ^{} does not generate a listed subgroup for n = {}, r = {}",
                subgroup.exponent, params.n, params.r
            ))
        })
}

/// `(q^{r-1} - 1) / (q^k - 1)`
fn sigma_r_count(params: &BoundParams, k: u32) -> BigUint {
    let q = params.big_q();
    (q.pow(params.r as u32 - 1) - 1u32) / (q.pow(k) - 1u32)
}

/// Number of affine sets fixed by every element of the subgroup.
pub fn affine_fixed_count(params: &BoundParams, subgroup: &SubgroupSpec) -> Result<BigUint> {
    let idx = lookup(params, subgroup)?;
    let f = CaseFlags::new(params);
    let r = params.r;
    let prime_order = |divides: bool| -> BigUint {
        if f.r_equals_p {
            BigUint::one()
        } else if divides {
            BigUint::from(r - 1)
        } else {
            BigUint::zero()
        }
    };
    Ok(match (params.n_equals_r(), idx) {
        (_, 0) => affine_set_count(params),
        (true, _) => prime_order(f.r_divides_qn_minus_1),
        (false, 1) => prime_order(f.r_divides_qn_minus_1),
        (false, 2) => sigma_r_count(params, 1),
        (false, _) => prime_order(f.r_divides_q_minus_1),
    })
}

/// Number of projective-linear sets fixed by every element of the subgroup.
pub fn pl_fixed_count(params: &BoundParams, subgroup: &SubgroupSpec) -> Result<BigUint> {
    let idx = lookup(params, subgroup)?;
    let f = CaseFlags::new(params);
    let half = BigUint::from((params.r - 1) / 2);
    let pick = |fixes_half: bool| -> BigUint {
        if f.r_equals_p {
            BigUint::one()
        } else if fixes_half {
            half.clone()
        } else {
            BigUint::zero()
        }
    };
    let sigma_n = f.r_divides_qn_minus_1 || f.r_divides_qn_plus_1;
    Ok(match (params.n_equals_r(), idx) {
        (_, 0) => pl_set_count(params),
        (true, _) => pick(sigma_n),
        (false, 1) => pick(sigma_n),
        (false, 2) => sigma_r_count(params, 2),
        (false, _) => pick(
            f.r_divides_q_minus_1
                || (f.r_divides_qn_minus_1 && f.r_divides_q_plus_1)
                || (!f.r_divides_qn_minus_1 && f.r_divides_q_plus_1),
        ),
    })
}

/// Cauchy–Frobenius: `(1/|G|) Σ fresh · fixed`, with exact divisibility.
pub fn burnside(terms: &[(u64, BigUint)]) -> Result<BigUint> {
    let order: u64 = terms.iter().map(|(fresh, _)| fresh).sum();
    if order == 0 {
        return Err(param("empty group"));
    }
    let total: BigUint = terms.iter().map(|(fresh, fixed)| fixed * *fresh).sum();
    let order = BigUint::from(order);
    if !(&total % &order).is_zero() {
        return Err(Error::Inconsistency(format!(
            "Burnside sum {total} is not divisible by |G| = {order}"
        )));
    }
    Ok(total / order)
}

/// Closed-form value of the branch, if one applies.
pub fn branch_formula(params: &BoundParams, branch: Branch) -> Option<BigUint> {
    let (n, r) = (params.n, params.r);
    let o = pl_set_count(params);
    let tail = || BigUint::from(n - 1) * sigma_r_count(params, 2);
    let (sum, g) = match branch {
        Branch::NEqualsR(b) => {
            let extra = match b {
                1 => n * n - 1,
                2 => (n * n - 1) * (n - 1) / 2,
                3 => (n + 1) * (n - 1) * (n - 1) / 2,
                _ => 0,
            };
            (o + extra, n * n)
        }
        Branch::NNotEqualR(b) => {
            let extra = match b {
                1 => n * (r - 1),
                2 => n * (r - 1) * (r - 1) / 2,
                3 => (r - 1) * (r - 1) / 2,
                _ => 0,
            };
            (o + extra + tail(), n * r)
        }
        Branch::TableDerived => return None,
    };
    Some(sum / g)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedCountRow {
    pub subgroup: SubgroupSpec,
    #[serde(serialize_with = "serialize_big")]
    pub fixed_affine: BigUint,
    #[serde(serialize_with = "serialize_big")]
    pub fixed_pl: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub params: BoundParams,
    #[serde(serialize_with = "serialize_big")]
    pub s_size: BigUint,
    #[serde(serialize_with = "serialize_big")]
    pub affine_set_count: BigUint,
    #[serde(serialize_with = "serialize_big")]
    pub pl_set_count: BigUint,
    pub table: Vec<FixedCountRow>,
    pub case: CaseLabel,
    #[serde(serialize_with = "serialize_big")]
    pub affine_orbit_bound: BigUint,
    #[serde(serialize_with = "serialize_big")]
    pub extended_bound: BigUint,
    /// Closed-form value of the matching branch; equal to `extended_bound`.
    #[serde(serialize_with = "serialize_big_opt")]
    pub branch_value: Option<BigUint>,
    pub warnings: Vec<String>,
}

pub fn fixed_count_table(params: &BoundParams) -> Result<Vec<FixedCountRow>> {
    subgroup_lattice(params)
        .into_iter()
        .map(|s| {
            Ok(FixedCountRow {
                subgroup: s,
                fixed_affine: affine_fixed_count(params, &s)?,
                fixed_pl: pl_fixed_count(params, &s)?,
            })
        })
        .collect()
}

pub fn affine_orbit_bound(params: &BoundParams) -> Result<BigUint> {
    let terms = fixed_count_table(params)?
        .into_iter()
        .map(|row| (row.subgroup.fresh_element_count, row.fixed_affine))
        .collect::<Vec<_>>();
    burnside(&terms)
}

/// Full report: fixed-count table, both Burnside bounds and the branch
/// cross-check.
pub fn extended_bound(params: &BoundParams) -> Result<BoundReport> {
    let table = fixed_count_table(params)?;
    let pl_terms: Vec<_> = table
        .iter()
        .map(|row| (row.subgroup.fresh_element_count, row.fixed_pl.clone()))
        .collect();
    let affine_terms: Vec<_> = table
        .iter()
        .map(|row| (row.subgroup.fresh_element_count, row.fixed_affine.clone()))
        .collect();
    let extended = burnside(&pl_terms)?;
    let affine = burnside(&affine_terms)?;
    let case = case_label(params);
    let branch_value = branch_formula(params, case.branch);
    if let Some(v) = &branch_value {
        if *v != extended {
            return Err(Error::Inconsistency(format!(
                "fixed-count table gives {extended} but branch {:?} gives {v}",
                case.branch
            )));
        }
    }
    let pl_sets = pl_set_count(params);
    if extended > pl_sets {
        return Err(Error::Inconsistency(format!(
            "bound {extended} exceeds |𝕆| = {pl_sets}"
        )));
    }
    Ok(BoundReport {
        params: *params,
        s_size: s_size(params),
        affine_set_count: affine_set_count(params),
        pl_set_count: pl_sets,
        table,
        case,
        affine_orbit_bound: affine,
        extended_bound: extended,
        branch_value,
        warnings: params.warnings(),
    })
}
