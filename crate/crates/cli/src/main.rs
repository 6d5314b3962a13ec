use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use goppa_orbits::bounds::{self, BoundParams, BoundReport, Branch};
use goppa_orbits::codes::{self, CodeMap};
use goppa_orbits::counting::{self, MatrixOrderOutcome, DEFAULT_MATRIX_BUDGET_Q};
use goppa_orbits::oracle::{self, OracleOptions, VerificationReport};
use goppa_orbits::{arith, BackendHint, Error, FieldElement, FieldTower, Level, TowerConfig, TowerParams};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "goppa-orbits", version, about = "Upper bounds on extended irreducible Goppa codes, checked by exhaustive orbit enumeration")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,

    /// Omit wall-clock and memory statistics, so reports are byte-identical across runs.
    #[arg(long, global = true)]
    no_timing: bool,

    /// Directory for cached field towers.
    #[arg(long, global = true, env = "GOPPA_ORBITS_CACHE")]
    cache_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Auto,
    LogTables,
    Polynomial,
}

impl From<Backend> for BackendHint {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Auto => BackendHint::Auto,
            Backend::LogTables => BackendHint::LogTables,
            Backend::Polynomial => BackendHint::Polynomial,
        }
    }
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// Base field size, a prime power. Alternative to --p/--t.
    #[arg(long, conflicts_with_all = ["p", "t"], required_unless_present = "p")]
    q: Option<u64>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, requires = "p")]
    t: Option<u32>,
    #[arg(long)]
    n: u64,
}

impl FieldArgs {
    fn q(&self) -> Result<u64, Error> {
        match (self.q, self.p) {
            (Some(q), _) => {
                arith::prime_power(q)?;
                Ok(q)
            }
            (None, Some(p)) => {
                if !arith::is_prime(p) {
                    return Err(Error::Parameter(format!("p = {p} is not prime")));
                }
                arith::checked_pow(p, u64::from(self.t.unwrap_or(1)))
            }
            (None, None) => unreachable!("clap requires --q or --p"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form upper bounds with the per-subgroup fixed-count table.
    Bound {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        r: u64,
    },
    /// Enumerate S and compare every closed-form quantity with the measured one.
    Verify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        r: u64,
        /// Largest tower order to enumerate, as a power of two.
        #[arg(long, default_value_t = 26)]
        budget: u32,
        #[arg(long, value_enum, default_value_t = Backend::Auto)]
        backend: Backend,
        /// Write the PGL·G partition (u32 class id per element of S, little-endian).
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Count matrices of order k in GL(2, q^n) with irreducible minimal polynomial.
    Matrices {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        k: u64,
        /// Largest q^n for the brute-force confirmation.
        #[arg(long, default_value_t = DEFAULT_MATRIX_BUDGET_Q)]
        max_q: u64,
    },
    /// Build C(α), write its parity matrix, and optionally check extensions and equivalences.
    Code {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        r: u64,
        /// Handle of α (base-p digits are its coefficients).
        #[arg(long)]
        alpha: u64,
        /// Also build the extended code.
        #[arg(long)]
        extend: bool,
        /// Verify an equivalence certificate for this map.
        #[arg(long, value_enum)]
        witness: Option<Witness>,
        /// Frobenius power for --witness frobenius.
        #[arg(long, default_value_t = 1)]
        power: u64,
        /// Handles of a, b for --witness affine (defaults: a generator of F_{q^n}^*, and 1).
        #[arg(long)]
        a: Option<u64>,
        #[arg(long)]
        b: Option<u64>,
        /// Parity matrix output file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Witness {
    Frobenius,
    Affine,
}

/// Outcome of a subcommand: a document and whether every check passed.
struct Outcome {
    human: String,
    json: Value,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = match cli.format {
                Format::Human => out.human,
                Format::Json => serde_json::to_string_pretty(&out.json).expect("serializable") + "\n",
            };
            let _ = io::stdout().write_all(text.as_bytes());
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Inconsistency(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Bound { field, r } => cmd_bound(field, *r),
        Command::Verify {
            field,
            r,
            budget,
            backend,
            dump,
        } => {
            if *budget > 32 {
                return Err(Error::Parameter("--budget is log2 and at most 32".into()));
            }
            let options = OracleOptions {
                budget: 1u64 << budget,
                tower: TowerConfig {
                    backend: (*backend).into(),
                    ..TowerConfig::default()
                },
                cache_dir: cli.cache_dir.clone(),
                partition_dump: dump.clone(),
                timing: !cli.no_timing,
            };
            cmd_verify(field, *r, &options)
        }
        Command::Matrices { field, k, max_q } => cmd_matrices(field, *k, *max_q, cli),
        Command::Code {
            field,
            r,
            alpha,
            extend,
            witness,
            power,
            a,
            b,
            out,
        } => {
            let map = witness.map(|w| match w {
                Witness::Frobenius => WitnessSpec::Frobenius(*power),
                Witness::Affine => WitnessSpec::Affine(*a, *b),
            });
            cmd_code(field, *r, FieldElement(*alpha), *extend, map, out.clone(), cli)
        }
    }
}

fn branch_name(b: Branch) -> String {
    match b {
        Branch::NEqualsR(i) => format!("n = r, case {i}"),
        Branch::NNotEqualR(i) => format!("n != r, case {i}"),
        Branch::TableDerived => "table-derived (no closed-form case applies)".into(),
    }
}

fn human_bound(report: &BoundReport) -> String {
    let p = &report.params;
    let mut s = String::new();
    s += &format!("q = {} (p = {}, t = {}), n = {}, r = {}\n", p.q, p.p, p.t, p.n, p.r);
    s += &format!("|S| = {}\n", report.s_size);
    s += &format!("affine sets |A| = {}\n", report.affine_set_count);
    s += &format!("projective linear sets |O| = {}\n", report.pl_set_count);
    s += &format!("case: {}\n\n", branch_name(report.case.branch));
    s += &format!(
        "{:<12} {:>6} {:>8} {:>24} {:>24}\n",
        "subgroup", "order", "fresh", "fixed affine sets", "fixed PL sets"
    );
    for row in &report.table {
        s += &format!(
            "{:<12} {:>6} {:>8} {:>24} {:>24}\n",
            format!("<sigma^{}>", row.subgroup.exponent),
            row.subgroup.order,
            row.subgroup.fresh_element_count,
            row.fixed_affine.to_string(),
            row.fixed_pl.to_string()
        );
    }
    s += &format!("\naffine orbit bound: {}\n", report.affine_orbit_bound);
    s += &format!("extended bound: {}\n", report.extended_bound);
    for w in &report.warnings {
        s += &format!("warning: {w}\n");
    }
    s
}

fn cmd_bound(field: &FieldArgs, r: u64) -> Result<Outcome, Error> {
    let params = BoundParams::new(field.q()?, field.n, r)?;
    let report = bounds::extended_bound(&params)?;
    Ok(Outcome {
        human: human_bound(&report),
        json: json!({ "command": "bound", "report": report }),
        pass: true,
    })
}

fn human_verify(report: &VerificationReport) -> String {
    let p = &report.params;
    let mut s = format!("q = {}, n = {}, r = {}\n", p.q, p.n, p.r);
    s += &format!("{:<28} {:>16} {:>16}  result\n", "quantity", "predicted", "measured");
    for c in &report.checks {
        s += &format!(
            "{:<28} {:>16} {:>16}  {}\n",
            c.name,
            c.predicted.to_string(),
            c.measured.to_string(),
            if c.pass { "ok" } else { "MISMATCH" }
        );
    }
    for w in &report.warnings {
        s += &format!("warning: {w}\n");
    }
    if let Some(stats) = &report.stats {
        s += &format!("time: {} ms", stats.wall_millis);
        if let Some(rss) = stats.peak_rss_bytes {
            s += &format!(", peak memory: {} MiB", rss >> 20);
        }
        s += "\n";
    }
    match &report.first_mismatch {
        None => s += &format!("PASS: {} extended orbits\n", report.extended_orbits),
        Some(m) => s += &format!("FAIL: {m}\n"),
    }
    s
}

fn cmd_verify(field: &FieldArgs, r: u64, options: &OracleOptions) -> Result<Outcome, Error> {
    let report = oracle::verify_bound(field.q()?, field.n, r, options)?;
    Ok(Outcome {
        human: human_verify(&report),
        pass: report.pass,
        json: json!({ "command": "verify", "report": report }),
    })
}

/// Smallest valid tower containing `F_{q^n}`.
fn matrix_tower(q: u64, n: u64, cli: &Cli) -> Result<FieldTower, Error> {
    let params = TowerParams::from_q(q, n, 3)?;
    match &cli.cache_dir {
        Some(dir) => goppa_orbits::fields::cache::load_or_build(dir, params, TowerConfig::default()),
        None => FieldTower::build(params, TowerConfig::default()),
    }
}

fn cmd_matrices(field: &FieldArgs, k: u64, max_q: u64, cli: &Cli) -> Result<Outcome, Error> {
    let q = field.q()?;
    if !arith::is_prime(field.n) {
        return Err(Error::Parameter(format!("n = {} is not prime", field.n)));
    }
    if k == 0 {
        return Err(Error::Parameter("k must be positive".into()));
    }
    let big_q = arith::checked_pow(q, field.n)?;
    let outcome = counting::matrix_order_count(big_q, k)?;
    let brute = if big_q <= max_q {
        let tower = matrix_tower(q, field.n, cli)?;
        Some(counting::enumerate_matrices_of_order(&tower, k, max_q)?)
    } else {
        None
    };
    let confirmed = match (&outcome, brute) {
        (MatrixOrderOutcome::Count(c), Some(b)) => Some(c.total == b),
        _ => None,
    };
    let mut human = format!("Q = q^n = {big_q}, k = {k}\n");
    match &outcome {
        MatrixOrderOutcome::Count(c) => {
            human += &format!(
                "closed form: {} classes x {} = {}\n",
                c.conjugacy_class_count, c.class_size, c.total
            );
        }
        MatrixOrderOutcome::HypothesesNotMet { reasons } => {
            human += &format!("hypotheses not met: {}\n", reasons.join("; "));
        }
    }
    match brute {
        Some(b) => human += &format!("brute force: {b}\n"),
        None => human += &format!("brute force: skipped (Q > {max_q})\n"),
    }
    match confirmed {
        Some(true) => human += "confirmed\n",
        Some(false) => human += "MISMATCH\n",
        None => {}
    }
    Ok(Outcome {
        human,
        json: json!({
            "command": "matrices",
            "field_size": big_q,
            "k": k,
            "closed_form": outcome,
            "brute_force": brute,
            "confirmed": confirmed,
        }),
        pass: confirmed != Some(false),
    })
}

enum WitnessSpec {
    Frobenius(u64),
    Affine(Option<u64>, Option<u64>),
}

fn cmd_code(
    field: &FieldArgs,
    r: u64,
    alpha: FieldElement,
    extend: bool,
    witness: Option<WitnessSpec>,
    out: Option<PathBuf>,
    cli: &Cli,
) -> Result<Outcome, Error> {
    let params = TowerParams::from_q(field.q()?, field.n, r)?;
    let tower = match &cli.cache_dir {
        Some(dir) => goppa_orbits::fields::cache::load_or_build(dir, params, TowerConfig::default())?,
        None => FieldTower::build(params, TowerConfig::default())?,
    };
    let code = codes::parity_check(&tower, alpha)?;
    let path = out.unwrap_or_else(|| {
        PathBuf::from(format!(
            "parity_p{}_t{}_n{}_r{}_alpha{}.txt",
            params.p, params.t, params.n, params.r, alpha.0
        ))
    });
    let mut buf = Vec::new();
    codes::write_parity_matrix(&tower, &code, &mut buf)?;
    fs::write(&path, buf)?;

    let mut human = format!(
        "C({alpha}): length {}, dimension {}, {} parity rows over F_q\nparity matrix written to {}\n",
        code.length(),
        code.dimension,
        code.parity_rows.len(),
        path.display()
    );
    let mut doc = json!({
        "command": "code",
        "params": params,
        "alpha": alpha.0,
        "length": code.length(),
        "dimension": code.dimension,
        "parity_rows": code.parity_rows.len(),
        "parity_file": path.display().to_string(),
    });
    let mut pass = true;
    if extend {
        let ext = codes::extend(&tower, &code);
        let zero_sum = ext.basis.iter().all(|w| ext.contains(&tower, w));
        pass &= zero_sum;
        human += &format!(
            "extended code: length {}, dimension {}, coordinate sums zero: {}\n",
            ext.length(),
            ext.dimension(),
            if zero_sum { "yes" } else { "NO" }
        );
        doc["extended"] = json!({
            "length": ext.length(),
            "dimension": ext.dimension(),
            "zero_sum": zero_sum,
        });
    }
    if let Some(w) = witness {
        let map = match w {
            WitnessSpec::Frobenius(i) => CodeMap::Frobenius { i },
            WitnessSpec::Affine(a, b) => {
                let fqn = tower.subfield(Level::Fqn);
                let a = match a {
                    Some(h) => tower.element(h)?,
                    None => {
                        let zeta_exp = (tower.order() - 1) / (fqn.len() as u64 - 1);
                        tower.pow(tower.primitive_element(), zeta_exp)
                    }
                };
                let b = match b {
                    Some(h) => tower.element(h)?,
                    None => FieldElement::ONE,
                };
                CodeMap::Affine { a, b }
            }
        };
        let cert = codes::equivalence_witness(&tower, alpha, map)?;
        let map_text = match cert.map {
            CodeMap::Frobenius { i } => format!("alpha -> alpha^(q^{i})"),
            CodeMap::Affine { a, b } => format!("alpha -> {a}*alpha + {b}"),
        };
        human += &format!(
            "certificate for {map_text}: C({}) is carried onto C({}) by a coordinate permutation (verified on kernel bases)\n",
            cert.image, cert.alpha
        );
        doc["certificate"] = serde_json::to_value(&cert).expect("serializable");
    }
    Ok(Outcome {
        human,
        json: doc,
        pass,
    })
}
