//! Brute-force ground truth: enumerate `S`, close it under generators of the
//! affine, projective-linear and Frobenius groups with union-find, and compare
//! every measured quantity with the closed forms in [`crate::bounds`].

mod union_find;

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{self, serialize_big, BoundParams};
use crate::error::{Error, Result};
use crate::fields::{cache, FieldElement, FieldTower, Level, TowerConfig, TowerParams};

pub use union_find::UnionFind;

/// Default upper limit on the tower order walked by the oracle.
pub const DEFAULT_BUDGET: u64 = 1 << 26;

const NOT_IN_S: u32 = u32::MAX;
const CHUNK: usize = 1 << 16;

/// `S` with a dense handle → index table.
pub struct EnumeratedS {
    elements: Vec<u32>,
    rank: Vec<u32>,
}

impl EnumeratedS {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, index: u32) -> FieldElement {
        FieldElement(self.elements[index as usize] as u64)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        self.elements.iter().map(|&h| FieldElement(h as u64))
    }

    /// Index of `a` in `S`, if it lies in `S`.
    pub fn index_of(&self, a: FieldElement) -> Option<u32> {
        self.rank
            .get(a.0 as usize)
            .copied()
            .filter(|&i| i != NOT_IN_S)
    }
}

fn describe_elements(q: u64, nr: u64) -> String {
    let bits = nr as f64 * (q as f64).log2();
    if q.is_power_of_two() {
        format!("2^{}", bits.round() as u64)
    } else {
        format!("{q}^{nr} (about 2^{bits:.1})")
    }
}

/// Fails with a capacity error unless `q^{nr}` is within `budget`.
pub fn check_budget(params: &BoundParams, budget: u64) -> Result<()> {
    let nr = params.n * params.r;
    let order = params.q.checked_pow(nr as u32);
    if order.is_some_and(|o| o <= budget && o <= u32::MAX as u64) {
        return Ok(());
    }
    Err(Error::Capacity {
        required: format!("{} elements", describe_elements(params.q, nr)),
        budget: format!("{budget} elements"),
    })
}

/// All `α` of degree `r` over `F_{q^n}`, in handle order.
pub fn enumerate_s(tower: &FieldTower, budget: u64) -> Result<EnumeratedS> {
    let p = tower.params();
    check_budget(&BoundParams::new(p.q(), p.n, p.r)?, budget)?;
    let order = tower.order() as u32;
    let elements: Vec<u32> = (0..order)
        .into_par_iter()
        .filter(|&h| tower.in_s(FieldElement(h as u64)))
        .collect();
    let mut rank = vec![NOT_IN_S; order as usize];
    for (i, &h) in elements.iter().enumerate() {
        rank[h as usize] = i as u32;
    }
    Ok(EnumeratedS { elements, rank })
}

/// Which group's generators to close under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorSet {
    AffineG,
    PglG,
    AffineOnly,
    PglOnly,
    FrobeniusOnly,
}

#[derive(Clone, Copy, Debug)]
enum Generator {
    Translate(FieldElement),
    Scale(FieldElement),
    Invert,
    Frobenius,
}

impl Generator {
    #[inline]
    fn apply(self, tower: &FieldTower, x: FieldElement) -> FieldElement {
        match self {
            Self::Translate(b) => tower.add(x, b),
            Self::Scale(z) => tower.mul(x, z),
            Self::Invert => tower.inv_nonzero(x),
            Self::Frobenius => tower.frobenius(x, 1),
        }
    }
}

fn affine_generators(tower: &FieldTower) -> Vec<Generator> {
    let mut gens: Vec<_> = tower
        .fp_basis(Level::Fqn)
        .into_iter()
        .map(Generator::Translate)
        .collect();
    let q_n = tower.subfield(Level::Fqn).len() as u64;
    let zeta = tower.pow(tower.primitive_element(), (tower.order() - 1) / (q_n - 1));
    gens.push(Generator::Scale(zeta));
    gens
}

fn generators(tower: &FieldTower, set: GeneratorSet) -> Vec<Generator> {
    let mut gens = match set {
        GeneratorSet::FrobeniusOnly => vec![],
        _ => affine_generators(tower),
    };
    if matches!(set, GeneratorSet::PglOnly | GeneratorSet::PglG) {
        gens.push(Generator::Invert);
    }
    if matches!(
        set,
        GeneratorSet::AffineG | GeneratorSet::PglG | GeneratorSet::FrobeniusOnly
    ) {
        gens.push(Generator::Frobenius);
    }
    gens
}

/// Unions every element with its image under `gen`. Images are computed in
/// parallel chunks; unions are applied serially, so the result does not depend
/// on scheduling.
fn close_under(
    tower: &FieldTower,
    s: &EnumeratedS,
    uf: &mut UnionFind,
    gen: Generator,
) -> Result<()> {
    let mut images = Vec::with_capacity(CHUNK);
    for (c, chunk) in s.elements.chunks(CHUNK).enumerate() {
        chunk
            .par_iter()
            .map(|&h| s.rank[gen.apply(tower, FieldElement(h as u64)).0 as usize])
            .collect_into_vec(&mut images);
        let base = (c * CHUNK) as u32;
        for (i, &img) in images.iter().enumerate() {
            if img == NOT_IN_S {
                return Err(Error::Inconsistency(format!(
                    "{gen:?} maps {} out of S",
                    s.element(base + i as u32)
                )));
            }
            uf.union(base + i as u32, img);
        }
    }
    Ok(())
}

/// A partition of `S` into orbits. Class ids are the minimal `S`-index of the
/// class, which is also the minimal handle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitPartition {
    pub generators: GeneratorSet,
    pub labels: Vec<u32>,
    pub orbit_count: u64,
    /// orbit size → number of orbits of that size
    pub size_histogram: BTreeMap<u64, u64>,
}

impl OrbitPartition {
    fn from_labels(generators: GeneratorSet, labels: Vec<u32>) -> Self {
        let mut sizes: BTreeMap<u32, u64> = BTreeMap::new();
        for &l in &labels {
            *sizes.entry(l).or_default() += 1;
        }
        let mut size_histogram = BTreeMap::new();
        for &size in sizes.values() {
            *size_histogram.entry(size).or_default() += 1;
        }
        Self {
            generators,
            orbit_count: sizes.len() as u64,
            labels,
            size_histogram,
        }
    }

    /// Class representatives (the minimal member of each class).
    pub fn representatives(&self) -> impl Iterator<Item = u32> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(i, &l)| l == i as u32)
            .map(|(i, _)| i as u32)
    }

    pub fn class_of(&self, index: u32) -> u32 {
        self.labels[index as usize]
    }
}

pub fn orbit_partition(
    tower: &FieldTower,
    s: &EnumeratedS,
    set: GeneratorSet,
) -> Result<OrbitPartition> {
    let mut uf = UnionFind::new(s.len());
    for g in generators(tower, set) {
        close_under(tower, s, &mut uf, g)?;
    }
    Ok(OrbitPartition::from_labels(set, uf.labels()))
}

/// Number of classes of `partition` mapped onto themselves by `σ^e`.
pub fn fixed_sets_bruteforce(
    tower: &FieldTower,
    s: &EnumeratedS,
    partition: &OrbitPartition,
    exponent: u64,
) -> Result<u64> {
    let reps: Vec<u32> = partition.representatives().collect();
    reps.par_iter()
        .map(|&rep| {
            let image = tower.frobenius(s.element(rep), exponent);
            let idx = s.index_of(image).ok_or_else(|| {
                Error::Inconsistency(format!("σ^{exponent} maps {image} out of S"))
            })?;
            Ok(u64::from(partition.class_of(idx) == rep))
        })
        .sum()
}

#[derive(Clone, Debug, Default)]
pub struct OracleOptions {
    /// Largest tower order to enumerate.
    pub budget: u64,
    pub tower: TowerConfig,
    pub cache_dir: Option<PathBuf>,
    /// Writes the PGL·G partition (`u32` class id per `S`-index, little-endian).
    pub partition_dump: Option<PathBuf>,
    pub timing: bool,
}

impl OracleOptions {
    pub fn new() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            timing: true,
            ..Self::default()
        }
    }
}

/// One compared quantity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(serialize_with = "serialize_big")]
    pub predicted: BigUint,
    #[serde(serialize_with = "serialize_big")]
    pub measured: BigUint,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stats {
    pub wall_millis: u64,
    /// Peak resident set size of the process, where the OS reports it.
    pub peak_rss_bytes: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub params: BoundParams,
    pub pass: bool,
    pub first_mismatch: Option<String>,
    #[serde(serialize_with = "serialize_big")]
    pub affine_orbits: BigUint,
    #[serde(serialize_with = "serialize_big")]
    pub extended_orbits: BigUint,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<Stats>,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Peak resident set size from `/proc/self/status`.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn uniform_value(histogram: &BTreeMap<u64, u64>, expected: u64) -> u64 {
    // the expected size if every class has it, else the first offender
    histogram
        .keys()
        .copied()
        .find(|&k| k != expected)
        .unwrap_or(expected)
}

fn write_partition(labels: &[u32], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for l in labels {
        w.write_all(&l.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_tower(params: &BoundParams, options: &OracleOptions) -> Result<FieldTower> {
    let tp = TowerParams::new(params.p, params.t, params.n, params.r)?;
    match &options.cache_dir {
        Some(dir) => cache::load_or_build(dir, tp, options.tower),
        None => FieldTower::build(tp, options.tower),
    }
}

/// Enumerates `S` for `(q, n, r)` and checks every closed-form quantity
/// against the measured one.
pub fn verify_bound(q: u64, n: u64, r: u64, options: &OracleOptions) -> Result<VerificationReport> {
    let started = Instant::now();
    let params = BoundParams::new(q, n, r)?;
    check_budget(&params, options.budget)?;
    let predicted = bounds::extended_bound(&params)?;
    let tower = load_tower(&params, options)?;
    let s = enumerate_s(&tower, options.budget)?;
    let big_q = params.field_size();
    let q_n: u64 = big_q.to_string().parse().expect("q^n fits in u64 within budget");

    let mut checks = Vec::new();
    let mut push = |name: String, predicted: BigUint, measured: BigUint| {
        let pass = predicted == measured;
        checks.push(Check {
            name,
            predicted,
            measured,
            pass,
        });
    };
    push("s_size".into(), predicted.s_size.clone(), BigUint::from(s.len()));

    // affine sets, then their G-orbits
    let mut uf = UnionFind::new(s.len());
    for g in affine_generators(&tower) {
        close_under(&tower, &s, &mut uf, g)?;
    }
    let affine = OrbitPartition::from_labels(GeneratorSet::AffineOnly, uf.labels());
    push(
        "affine_set_count".into(),
        predicted.affine_set_count.clone(),
        affine.orbit_count.into(),
    );
    push(
        "affine_set_size".into(),
        BigUint::from(q_n * (q_n - 1)),
        uniform_value(&affine.size_histogram, q_n * (q_n - 1)).into(),
    );
    close_under(&tower, &s, &mut uf, Generator::Frobenius)?;
    let affine_orbits = BigUint::from(OrbitPartition::from_labels(GeneratorSet::AffineG, uf.labels()).orbit_count);
    drop(uf);

    // projective-linear sets reuse the affine classes
    let mut uf = UnionFind::from_labels(&affine.labels);
    close_under(&tower, &s, &mut uf, Generator::Invert)?;
    let pl = OrbitPartition::from_labels(GeneratorSet::PglOnly, uf.labels());
    push(
        "pl_set_count".into(),
        predicted.pl_set_count.clone(),
        pl.orbit_count.into(),
    );
    push(
        "pl_set_size".into(),
        BigUint::from(q_n * q_n * q_n - q_n),
        uniform_value(&pl.size_histogram, q_n * q_n * q_n - q_n).into(),
    );
    close_under(&tower, &s, &mut uf, Generator::Frobenius)?;
    let pgl_g_labels = uf.labels();
    drop(uf);
    let extended = OrbitPartition::from_labels(GeneratorSet::PglG, pgl_g_labels);
    let extended_orbits = BigUint::from(extended.orbit_count);
    if let Some(path) = &options.partition_dump {
        write_partition(&extended.labels, path)?;
    }
    drop(extended);

    for row in &predicted.table {
        let e = row.subgroup.exponent;
        push(
            format!("fixed_affine[sigma^{e}]"),
            row.fixed_affine.clone(),
            fixed_sets_bruteforce(&tower, &s, &affine, e)?.into(),
        );
        push(
            format!("fixed_pl[sigma^{e}]"),
            row.fixed_pl.clone(),
            fixed_sets_bruteforce(&tower, &s, &pl, e)?.into(),
        );
    }
    push(
        "affine_orbit_bound".into(),
        predicted.affine_orbit_bound.clone(),
        affine_orbits.clone(),
    );
    push(
        "extended_bound".into(),
        predicted.extended_bound.clone(),
        extended_orbits.clone(),
    );

    // each PL class is a union of q^n + 1 affine classes
    let mut per_pl: BTreeMap<u32, u64> = BTreeMap::new();
    for rep in affine.representatives() {
        *per_pl.entry(pl.class_of(rep)).or_default() += 1;
    }
    let mut counts = BTreeMap::new();
    for &c in per_pl.values() {
        *counts.entry(c).or_insert(0u64) += 1;
    }
    push(
        "affine_sets_per_pl_set".into(),
        BigUint::from(q_n + 1),
        uniform_value(&counts, q_n + 1).into(),
    );

    let first_mismatch = checks.iter().find(|c| !c.pass).map(|c| {
        format!(
            "{}: predicted {}, measured {}",
            c.name, c.predicted, c.measured
        )
    });
    Ok(VerificationReport {
        params,
        pass: first_mismatch.is_none(),
        first_mismatch,
        affine_orbits,
        extended_orbits,
        checks,
        warnings: predicted.warnings,
        stats: options.timing.then(|| Stats {
            wall_millis: started.elapsed().as_millis() as u64,
            peak_rss_bytes: peak_rss_bytes(),
        }),
    })
}
