//! Subcommands of the `qtd` tool. Each reads a TOML document, fills in its
//! section and writes the document back out.

pub mod schema;

use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, info, warn};
use qtd_core::construct::DesignViolation;
use qtd_core::group::{DEFAULT_GROUP_CAP, DEFAULT_SUBSPACE_LIMIT};
use qtd_core::tactical::{row_symmetries, row_variants};
use qtd_core::{
    build_km_system, close_group, enumerate_rho_with, point_orbits, profiles_within, rref,
    search_designs, sigma_table, subspace_orbits, verify_design, ConstructOptions, DesignInstance,
    DesignParams, EnumOptions, FieldSpec, GfMatrix, MatrixGroup, PointOrbitPartition,
    ProfileOptions, SigmaTable, TacticalMatrix,
};

use schema::{
    DesignRecord, Document, EnumerationSection, MatrixRecord, MatrixStatus, OrbitsSection,
    ParamsSection, RowSymmetry, SigmaSection, ViolationRecord,
};

/// Above this many row permutations the enumerator keeps rows fixed.
const ROW_SYMMETRY_CAP: usize = 5040;

#[derive(Debug, Parser)]
#[command(name = "qtd", version, about = "Tactical decomposition matrices for designs over finite fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Derive lambda1, b and phi and check admissibility
    Params,
    /// Point orbits and k-space orbit lengths of the group
    Orbits,
    /// Sigma table of the point orbits (q = 2)
    Sigma,
    /// Enumerate tactical decomposition matrices
    Enumerate,
    /// Apply the cubic conditions to the enumerated matrices (q = 2)
    Filter,
    /// Construct designs from the surviving matrices
    Construct,
    /// Check the designs listed in the document
    Verify,
    /// Run every stage in order
    Pipeline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RowSymmetryArg {
    Sizes,
    Sigma,
    None,
}

impl From<RowSymmetryArg> for RowSymmetry {
    fn from(a: RowSymmetryArg) -> Self {
        match a {
            RowSymmetryArg::Sizes => RowSymmetry::Sizes,
            RowSymmetryArg::Sigma => RowSymmetry::Sigma,
            RowSymmetryArg::None => RowSymmetry::None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Input document (standard input if omitted)
    #[arg(long, short, global = true)]
    pub input: Option<PathBuf>,
    /// Output document (standard output if omitted)
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for enumeration and construction
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Maximum number of designs per matrix
    #[arg(long, global = true)]
    pub limit: Option<usize>,
    /// Only consider block orbits of full length |G|
    #[arg(long, global = true)]
    pub full_length_orbits: bool,
    /// Which row permutations identify matrices during enumeration
    #[arg(long, global = true, value_enum, default_value_t = RowSymmetryArg::Sizes)]
    pub row_symmetry: RowSymmetryArg,
    /// Construct from this matrix only (1-based)
    #[arg(long, global = true)]
    pub matrix: Option<usize>,
    /// Log search statistics to standard error
    #[arg(long, short, global = true)]
    pub verbose: bool,
}

#[derive(Debug)]
pub enum Failure {
    /// Malformed or inconsistent input; exit code 2.
    Input(String),
    /// Inadmissible parameters or nothing found; exit code 1.
    NoResult(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::NoResult(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::NoResult(m) => write!(f, "{m}"),
        }
    }
}

impl From<qtd_core::Error> for Failure {
    fn from(e: qtd_core::Error) -> Self {
        match e {
            qtd_core::Error::Inadmissible { .. } => Failure::NoResult(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

/// Outcome of a subcommand: the document is written even when `failure` is
/// set (for instance when no design was found).
pub struct Outcome {
    pub summary: Vec<String>,
    pub failure: Option<Failure>,
}

impl Outcome {
    fn ok(line: String) -> Self {
        Self {
            summary: vec![line],
            failure: None,
        }
    }
}

/// Parsed design, group and point orbits of a document.
struct Job {
    params: DesignParams,
    group: MatrixGroup,
    points: PointOrbitPartition,
}

impl Job {
    fn load(doc: &Document) -> Result<Self, Failure> {
        let d = doc.design;
        let params = DesignParams::derive(d.v, d.k, d.lambda2, d.q)?;
        let group = load_group(doc)?;
        let points = point_orbits(&group);
        Ok(Self {
            params,
            group,
            points,
        })
    }

    fn sizes(&self) -> Vec<u64> {
        self.points.sizes()
    }

    fn sigma(&self) -> Result<SigmaTable, Failure> {
        Ok(sigma_table(&self.points)?)
    }
}

fn load_group(doc: &Document) -> Result<MatrixGroup, Failure> {
    let d = doc.design;
    let spec = FieldSpec::new(d.q, d.v as usize)?;
    let mut gens = Vec::new();
    for (i, rows) in doc.group.generators.iter().enumerate() {
        let g = GfMatrix::from_rows(spec, rows)
            .map_err(|e| Failure::Input(format!("group.generators[{i}]: {e}")))?;
        gens.push(g);
    }
    Ok(close_group(spec, gens, DEFAULT_GROUP_CAP)?)
}

fn require_binary(doc: &Document, what: &str) -> Result<(), Failure> {
    if doc.design.q != 2 {
        return Err(Failure::Input(format!("{what} requires q = 2, got q = {}", doc.design.q)));
    }
    Ok(())
}

pub fn params(doc: &mut Document) -> Result<Outcome, Failure> {
    let d = doc.design;
    let p = match DesignParams::derive(d.v, d.k, d.lambda2, d.q) {
        Ok(p) => p,
        Err(e @ qtd_core::Error::Inadmissible { .. }) => {
            doc.params = None;
            return Ok(Outcome {
                summary: vec![format!("2-({},{},{};{}) is not admissible", d.v, d.k, d.lambda2, d.q)],
                failure: Some(e.into()),
            });
        }
        Err(e) => return Err(e.into()),
    };
    doc.params = Some(ParamsSection {
        lambda1: p.lambda1,
        b: p.b,
        phi: p.phi,
    });
    Ok(Outcome::ok(format!(
        "2-({},{},{};{}): lambda1 = {}, b = {}, phi = {}",
        p.v, p.k, p.lambda2, p.q, p.lambda1, p.b, p.phi
    )))
}

pub fn orbits(doc: &mut Document) -> Result<Outcome, Failure> {
    let job = Job::load(doc)?;
    let k_orbits = subspace_orbits(&job.group, job.params.k as usize, DEFAULT_SUBSPACE_LIMIT)?;
    let mut lengths: Vec<u64> = k_orbits.lengths().iter().map(|&l| l as u64).collect();
    lengths.sort_unstable_by(|a, b| b.cmp(a));
    doc.orbits = Some(OrbitsSection {
        group_order: job.group.order() as u64,
        point_sizes: job.sizes(),
        point_representatives: job
            .points
            .representatives()
            .iter()
            .map(|p| p.coords().to_vec())
            .collect(),
        block_orbit_lengths: lengths,
    });
    Ok(Outcome::ok(format!(
        "|G| = {}; {} point orbits of sizes {:?}; {} {}-space orbits",
        job.group.order(),
        job.points.len(),
        job.sizes(),
        k_orbits.len(),
        job.params.k
    )))
}

pub fn sigma(doc: &mut Document) -> Result<Outcome, Failure> {
    require_binary(doc, "the sigma table")?;
    let job = Job::load(doc)?;
    let table = job.sigma()?;
    let entries: Vec<[u64; 4]> = table
        .nonzero_entries()
        .into_iter()
        .map(|(l, r, s, x)| [l as u64 + 1, r as u64 + 1, s as u64 + 1, x])
        .collect();
    let n = entries.len();
    doc.sigma = Some(SigmaSection { entries });
    Ok(Outcome::ok(format!("sigma table: {n} nonzero entries")))
}

fn row_perms(
    job: &Job,
    mode: RowSymmetry,
) -> Result<(RowSymmetry, Option<Vec<Vec<usize>>>), Failure> {
    let sizes = job.sizes();
    let sigma = match mode {
        RowSymmetry::None => return Ok((RowSymmetry::None, None)),
        RowSymmetry::Sigma if job.params.q == 2 => Some(job.sigma()?),
        RowSymmetry::Sigma => {
            warn!("sigma row symmetry needs q = 2; using point orbit sizes");
            None
        }
        RowSymmetry::Sizes => None,
    };
    let used = if sigma.is_some() { RowSymmetry::Sigma } else { RowSymmetry::Sizes };
    match row_symmetries(&sizes, sigma.as_ref(), ROW_SYMMETRY_CAP) {
        Ok(perms) => Ok((used, Some(perms))),
        Err(qtd_core::Error::EnumerationLimit { .. }) => {
            warn!("more than {ROW_SYMMETRY_CAP} row permutations; keeping rows fixed");
            Ok((RowSymmetry::None, None))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn enumerate(doc: &mut Document, opts: &Options) -> Result<Outcome, Failure> {
    let job = Job::load(doc)?;
    let p = &job.params;
    let k_orbits = subspace_orbits(&job.group, p.k as usize, DEFAULT_SUBSPACE_LIMIT)?;
    let lengths: Vec<u64> = k_orbits.lengths().iter().map(|&l| l as u64).collect();
    let profile_opts = ProfileOptions {
        orbit_count: None,
        full_length_only: opts.full_length_orbits,
    };
    let profiles = profiles_within(p, &lengths, job.group.order() as u64, profile_opts);
    let (mode, perms) = row_perms(&job, opts.row_symmetry.into())?;
    info!("{} block orbit profiles", profiles.len());

    let sizes = job.sizes();
    let enum_opts = EnumOptions {
        jobs: opts.jobs,
        row_perms: perms,
    };
    let mut records = Vec::new();
    for profile in &profiles {
        let (mats, stats) = enumerate_rho_with(p, &sizes, profile, &enum_opts)?;
        debug!("profile {:?}: {} matrices, {:?}", profile.lengths(), mats.len(), stats);
        records.extend(mats.into_iter().map(|m| MatrixRecord {
            block_lengths: m.lengths().to_vec(),
            rho: m.rho().to_vec(),
            status: MatrixStatus::Unfiltered,
            violation: None,
        }));
    }
    let count = records.len() as u64;
    doc.enumeration = Some(EnumerationSection {
        profiles: profiles.iter().map(|pr| pr.lengths().to_vec()).collect(),
        row_symmetry: mode,
        count,
    });
    doc.matrices = records;
    doc.designs.clear();
    let summary = format!("{count} matrices over {} block orbit profiles", profiles.len());
    let failure = (count == 0).then(|| Failure::NoResult("no tactical decomposition matrix exists".into()));
    Ok(Outcome {
        summary: vec![summary],
        failure,
    })
}

fn matrix_of(job: &Job, index: usize, rec: &MatrixRecord) -> Result<TacticalMatrix, Failure> {
    let sizes = job.sizes();
    if rec.rho.len() != sizes.len() {
        return Err(Failure::Input(format!(
            "matrices[{index}] has {} rows, the group has {} point orbits",
            rec.rho.len(),
            sizes.len()
        )));
    }
    TacticalMatrix::new(rec.rho.clone(), sizes, rec.block_lengths.clone())
        .map_err(|e| Failure::Input(format!("matrices[{index}]: {e}")))
}

pub fn filter_matrices(doc: &mut Document) -> Result<Outcome, Failure> {
    require_binary(doc, "the cubic filter")?;
    if doc.matrices.is_empty() {
        return Err(Failure::Input("no matrices in the document; run enumerate first".into()));
    }
    let job = Job::load(doc)?;
    let sigma = job.sigma()?;
    let mats = doc
        .matrices
        .iter()
        .enumerate()
        .map(|(i, r)| matrix_of(&job, i, r))
        .collect::<Result<Vec<_>, _>>()?;
    let table = qtd_core::all_bounds(&job.params, &job.sizes(), &sigma)?;
    let mut accepted = 0;
    for (rec, m) in doc.matrices.iter_mut().zip(&mats) {
        match qtd_core::first_violation(m, &table)? {
            None => {
                rec.status = MatrixStatus::Accepted;
                rec.violation = None;
                accepted += 1;
            }
            Some(b) => {
                rec.status = MatrixStatus::Rejected;
                rec.violation = Some(ViolationRecord {
                    l: b.l as u64 + 1,
                    r: b.r as u64 + 1,
                    s: b.s as u64 + 1,
                    value: b.value.unwrap_or(0),
                    lower: b.lower,
                    upper: b.upper,
                });
            }
        }
    }
    let rejected = doc.matrices.len() - accepted;
    let failure = (accepted == 0).then(|| Failure::NoResult("every matrix violates the cubic conditions".into()));
    Ok(Outcome {
        summary: vec![format!("{accepted} accepted, {rejected} rejected")],
        failure,
    })
}

fn describe_blocks(d: &schema::DesignSection, blocks: usize) -> &'static str {
    let all = qtd_core::gauss_binom(d.v, d.k, d.q).ok() == Some(blocks as u128);
    match (all, d.k + 1 == d.v) {
        (true, true) => " (all hyperplanes)",
        (true, false) => " (all k-spaces)",
        _ => "",
    }
}

pub fn construct(doc: &mut Document, opts: &Options) -> Result<Outcome, Failure> {
    if doc.matrices.is_empty() {
        return Err(Failure::Input("no matrices in the document; run enumerate first".into()));
    }
    let job = Job::load(doc)?;
    let p = job.params;
    let chosen: Vec<usize> = match opts.matrix {
        Some(n) if n == 0 || n > doc.matrices.len() => {
            return Err(Failure::Input(format!(
                "--matrix {n} is out of range 1..={}",
                doc.matrices.len()
            )))
        }
        Some(n) => vec![n - 1],
        None => (0..doc.matrices.len())
            .filter(|&i| doc.matrices[i].status != MatrixStatus::Rejected)
            .collect(),
    };
    let mode = doc
        .enumeration
        .as_ref()
        .map_or(RowSymmetry::Sizes, |e| e.row_symmetry);
    let (_, perms) = row_perms(&job, mode)?;
    let perms = perms.unwrap_or_default();

    let km = build_km_system(&job.group, &p, DEFAULT_SUBSPACE_LIMIT)?;
    info!(
        "orbit matrix: {} 2-space orbits x {} {}-space orbits",
        km.a.len(),
        km.block_orbits.len(),
        p.k
    );
    let copts = ConstructOptions {
        limit: opts.limit,
        jobs: opts.jobs,
    };
    let mut records = Vec::new();
    for &i in &chosen {
        let m = matrix_of(&job, i, &doc.matrices[i])?;
        let mut found = Vec::new();
        for variant in row_variants(&m, &perms) {
            let left = opts.limit.map(|l| l.saturating_sub(found.len()));
            if left == Some(0) {
                break;
            }
            let (designs, stats) = search_designs(
                &p,
                &km,
                &job.points,
                Some(&variant),
                &ConstructOptions { limit: left, ..copts.clone() },
            )?;
            debug!("matrix {}: {:?}", i + 1, stats);
            found.extend(designs);
        }
        for d in &found {
            let valid = verify_design(d)?.is_valid();
            if !valid {
                warn!("design from matrix {} fails verification", i + 1);
            }
            records.push(DesignRecord {
                matrix: Some(i as u64 + 1),
                selected_orbits: d.selected_orbits.iter().map(|&o| o as u64 + 1).collect(),
                blocks: d.blocks.iter().map(|b| b.basis().to_vec()).collect(),
                valid: Some(valid),
            });
        }
        info!("matrix {}: {} designs", i + 1, found.len());
    }
    let n = records.len();
    let with_designs = {
        let mut m: Vec<u64> = records.iter().filter_map(|r| r.matrix).collect();
        m.dedup();
        m.len()
    };
    doc.designs = records;
    let note = if n == 1 { describe_blocks(&doc.design, doc.designs[0].blocks.len()) } else { "" };
    let summary = format!(
        "{n} design{}{note}; {with_designs} of {} matrices tried yield designs",
        if n == 1 { "" } else { "s" },
        chosen.len()
    );
    let failure = (n == 0).then(|| Failure::NoResult("no design found".into()));
    Ok(Outcome {
        summary: vec![summary],
        failure,
    })
}

fn violation_text(v: &DesignViolation) -> String {
    match v {
        DesignViolation::WrongSpace { block } => format!("block {} is in another space", block + 1),
        DesignViolation::WrongDimension { block, dim } => {
            format!("block {} has dimension {dim}", block + 1)
        }
        DesignViolation::RepeatedBlock { block } => format!("block {} is repeated", block + 1),
        DesignViolation::BlockCount { expected, actual } => {
            format!("{actual} blocks, expected {expected}")
        }
        DesignViolation::PointDegree { point, expected, actual } => {
            format!("point {point:?} lies on {actual} blocks, expected {expected}")
        }
        DesignViolation::LineDegree { line, expected, actual } => {
            format!("2-space {:?} lies in {actual} blocks, expected {expected}", line.basis())
        }
    }
}

pub fn verify(doc: &mut Document) -> Result<Outcome, Failure> {
    if doc.designs.is_empty() {
        return Err(Failure::Input("no designs in the document".into()));
    }
    let d = doc.design;
    let p = DesignParams::derive(d.v, d.k, d.lambda2, d.q)?;
    let spec = FieldSpec::new(d.q, d.v as usize)?;
    let mut summary = Vec::new();
    let mut invalid = 0;
    for (i, rec) in doc.designs.iter_mut().enumerate() {
        let mut blocks = Vec::with_capacity(rec.blocks.len());
        for (j, rows) in rec.blocks.iter().enumerate() {
            let s = rref(spec, rows)
                .map_err(|e| Failure::Input(format!("designs[{i}].blocks[{j}]: {e}")))?;
            blocks.push(s);
        }
        let report = verify_design(&DesignInstance::new(p, blocks, vec![]))?;
        rec.valid = Some(report.is_valid());
        if report.is_valid() {
            summary.push(format!("design {}: valid 2-({},{},{};{})", i + 1, d.v, d.k, d.lambda2, d.q));
        } else {
            invalid += 1;
            summary.push(format!(
                "design {}: invalid, {} violations",
                i + 1,
                report.violations.len()
            ));
            for v in report.violations.iter().take(10) {
                summary.push(format!("  {}", violation_text(v)));
            }
        }
    }
    let failure = (invalid > 0).then(|| Failure::NoResult(format!("{invalid} invalid designs")));
    Ok(Outcome { summary, failure })
}

pub fn pipeline(doc: &mut Document, opts: &Options) -> Result<Outcome, Failure> {
    let mut summary = Vec::new();
    let stage = |out: Outcome, summary: &mut Vec<String>| -> Option<Failure> {
        summary.extend(out.summary);
        out.failure
    };
    if let Some(f) = stage(params(doc)?, &mut summary) {
        return Ok(Outcome { summary, failure: Some(f) });
    }
    stage(orbits(doc)?, &mut summary);
    let binary = doc.design.q == 2;
    if binary {
        stage(sigma(doc)?, &mut summary);
    }
    if let Some(f) = stage(enumerate(doc, opts)?, &mut summary) {
        return Ok(Outcome { summary, failure: Some(f) });
    }
    let matrices = doc.matrices.len();
    let survivors = if binary {
        if let Some(f) = stage(filter_matrices(doc)?, &mut summary) {
            summary.push(format!("{matrices} matrices, none survives the filter"));
            return Ok(Outcome { summary, failure: Some(f) });
        }
        doc.matrices
            .iter()
            .filter(|m| m.status == MatrixStatus::Accepted)
            .count()
    } else {
        matrices
    };
    let out = construct(doc, opts)?;
    let failure = stage(out, &mut summary);
    let designs = doc.designs.len();
    let note = match doc.designs.as_slice() {
        [only] => describe_blocks(&doc.design, only.blocks.len()),
        _ => "",
    };
    let filter_part = if binary {
        format!("{survivors} survive{} filter", if survivors == 1 { "s" } else { "" })
    } else {
        "filter skipped (q != 2)".into()
    };
    summary.push(format!(
        "{matrices} matrices, {filter_part}, {designs} design{}{note}",
        if designs == 1 { "" } else { "s" }
    ));
    Ok(Outcome { summary, failure })
}

pub fn run_command(command: Command, doc: &mut Document, opts: &Options) -> Result<Outcome, Failure> {
    match command {
        Command::Params => params(doc),
        Command::Orbits => orbits(doc),
        Command::Sigma => sigma(doc),
        Command::Enumerate => enumerate(doc, opts),
        Command::Filter => filter_matrices(doc),
        Command::Construct => construct(doc, opts),
        Command::Verify => verify(doc),
        Command::Pipeline => pipeline(doc, opts),
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<Document, Failure> {
    let text = match path {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        None => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::Input(format!("standard input: {e}")))?;
            s
        }
    };
    let name = path
        .as_ref()
        .map_or("standard input".to_string(), |p| p.display().to_string());
    Document::parse(&text).map_err(|e| Failure::Input(format!("{name}: {e}")))
}

fn write_output(path: &Option<PathBuf>, doc: &Document) -> Result<(), Failure> {
    let text = doc.to_toml();
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Input(format!("standard output: {e}"))),
    }
}

/// Runs the parsed command line, printing the summary to standard error.
pub fn run(cli: &Cli) -> ExitCode {
    let result = read_input(&cli.opts.input).and_then(|mut doc| {
        let out = run_command(cli.command, &mut doc, &cli.opts)?;
        write_output(&cli.opts.output, &doc)?;
        Ok(out)
    });
    match result {
        Ok(out) => {
            for line in &out.summary {
                eprintln!("{line}");
            }
            match out.failure {
                None => ExitCode::SUCCESS,
                Some(f) => {
                    eprintln!("{f}");
                    ExitCode::from(f.exit_code())
                }
            }
        }
        Err(f) => {
            eprintln!("qtd: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
