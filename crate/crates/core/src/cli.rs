//! The `meanvalue` command line.
//!
//! Exit status: 0 when every verdict holds (or detection completes),
//! 1 when a claim fails, 2 when a hypothesis is violated, 3 on input errors.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::Tolerance;
use crate::config::{RunConfig, SequenceManifest};
use crate::constants::{epsilon_prime, ConstantLedger, Entry, Provenance, DEFAULT_DELTA};
use crate::error::{Error, Result};
use crate::grid::{Domain, DomainKind, DomainSpec, MetricSpec, ScalarField};
use crate::heinz::heinz_scan;
use crate::io::{load_field, write_bubbles_csv, write_heinz_csv, write_shell_csv, Report};
use crate::quantization::{detect_concentration, DensitySequence};
use crate::synth::{boundary_family, gen, gen_sequence, interior_family, seeded_bubble_centers, GeneratorSpec};
use crate::verify::{
    estimate_constant, fit_boundary_nonlinearity, fit_nonlinearity, monotonicity_suite, verify_boundary_mvi, verify_interior_mvi,
    verify_morrey, FamilyKind, Verdict,
};

#[derive(Debug, Parser)]
#[command(name = "meanvalue", version, about = "Mean value inequalities and bubble detection on gridded densities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Grid spacing h (overrides the config domain).
    #[arg(long, global = true)]
    pub spacing: Option<f64>,
    /// Dimension n (overrides the config domain).
    #[arg(long, global = true)]
    pub dimension: Option<usize>,
    /// Master constant C.
    #[arg(long = "c-constant", global = true, conflicts_with = "measure_c")]
    pub c_constant: Option<f64>,
    /// Measure C on the standard family of the domain (the default when no C is given).
    #[arg(long = "measure-c", global = true)]
    pub measure_c: bool,
    /// Tolerance factor K in K·h.
    #[arg(long = "tolerance-k", global = true)]
    pub tolerance_k: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, env = "MEANVALUE_OUT")]
    pub out: Option<PathBuf>,
    /// Seed for generated layouts.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// e(center) ≤ C r^{-n} ∫e for subharmonic fields.
    VerifyMorrey,
    /// The interior nonlinear mean value inequality.
    VerifyInterior,
    /// The boundary nonlinear mean value inequality on half-balls.
    VerifyBoundary,
    /// Shell-average monotonicity, limit and large-radius checks.
    Monotonicity,
    /// The Heinz scan f(ρ) = (1−ρ)ⁿ sup_{B_ρr} e.
    HeinzScan,
    /// Print the constant ledger.
    Constants {
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        /// Radius for the ε′ certificates.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Extract concentration points from a density sequence.
    DetectBubbles,
    /// Measure C over a family of fields.
    EstimateC,
}

/// Exit status of a finished run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    ClaimFailed = 1,
    HypothesisViolated = 2,
    InputError = 3,
}

impl Status {
    fn of(v: Verdict) -> Self {
        match v {
            Verdict::Holds => Status::Ok,
            Verdict::Fails => Status::ClaimFailed,
            Verdict::HypothesisViolated | Verdict::EnergyAboveThreshold => Status::HypothesisViolated,
        }
    }

    fn of_error(e: &Error) -> Self {
        match e {
            Error::QuantizationViolated { .. } | Error::ExclusionOverlap { .. } => Status::ClaimFailed,
            Error::HypothesisViolated { .. } => Status::HypothesisViolated,
            _ => Status::InputError,
        }
    }
}

/// Resolved run settings: config file merged with flags.
struct Run {
    cfg: RunConfig,
    tol: Tolerance,
    out: PathBuf,
}

#[derive(Serialize)]
struct Labelled<'a, T> {
    label: &'a str,
    #[serde(flatten)]
    record: &'a T,
}

impl Run {
    fn new(cli: &Cli) -> Result<Self> {
        let mut cfg = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if cli.spacing.is_some() || cli.dimension.is_some() || cfg.domain.is_none() {
            // the boundary claim only makes sense on a half-ball
            let kind = match cli.command {
                Command::VerifyBoundary => DomainKind::HalfBall,
                _ => DomainKind::Ball,
            };
            let mut d = cfg.domain.take().unwrap_or(DomainSpec {
                kind,
                center: vec![0.0; 2],
                radius: 1.0,
                spacing: 1.0 / 64.0,
                dimension: 2,
                metric: MetricSpec::identity(),
            });
            if let Some(h) = cli.spacing {
                d.spacing = h;
            }
            if let Some(n) = cli.dimension {
                d.dimension = n;
            }
            d.center.resize(d.dimension, 0.0);
            cfg.domain = Some(d);
        }
        if let Some(c) = cli.c_constant {
            cfg.ledger.c = Some(c);
            cfg.ledger.measure = false;
        }
        if cli.measure_c {
            cfg.ledger.c = None;
            cfg.ledger.measure = true;
        }
        if let Some(k) = cli.tolerance_k {
            cfg.tolerance_k = Some(k);
        }
        if let Some(s) = cli.seed {
            cfg.seed = Some(s);
        }
        cfg.validate()?;
        let out = cli.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&out)?;
        Ok(Self {
            tol: Tolerance::new(cfg.tolerance_k.unwrap_or(10.0)),
            cfg,
            out,
        })
    }

    fn domain(&self) -> Result<Arc<Domain>> {
        self.cfg.domain.as_ref().expect("domain is always resolved").build()
    }

    fn family_kind(domain: &Domain) -> FamilyKind {
        match domain.kind() {
            DomainKind::Ball => FamilyKind::Interior,
            DomainKind::HalfBall => FamilyKind::Boundary,
        }
    }

    fn standard_family(domain: &Arc<Domain>) -> Result<Vec<(String, ScalarField)>> {
        let specs = match domain.kind() {
            DomainKind::Ball => interior_family(domain),
            DomainKind::HalfBall => boundary_family(domain),
        };
        specs
            .par_iter()
            .enumerate()
            .map(|(i, s)| Ok((format!("standard:{i}"), gen(s, domain)?.field)))
            .collect()
    }

    /// The configured input, or the standard family when none is given.
    fn fields(&self) -> Result<Vec<(String, ScalarField)>> {
        let input = &self.cfg.input;
        if let Some(p) = &input.field {
            return Ok(vec![(p.display().to_string(), load_field(p)?)]);
        }
        let domain = self.domain()?;
        match &input.generator {
            Some(g) => Ok(vec![("generator".into(), gen(g, &domain)?.field)]),
            None => Self::standard_family(&domain),
        }
    }

    /// `C` from the flags or config, else measured on the standard family.
    fn c_entry(&self, domain: &Arc<Domain>) -> Result<Entry> {
        match self.cfg.ledger.c {
            Some(c) => Ok(Entry::new(c, Provenance::Configured)),
            None => {
                let family: Vec<ScalarField> = Self::standard_family(domain)?.into_iter().map(|f| f.1).collect();
                let est = estimate_constant(&family, Self::family_kind(domain), self.tol)?;
                Ok(Entry::new(est.c, Provenance::Measured))
            }
        }
    }

    fn delta(&self) -> Entry {
        match self.cfg.ledger.delta {
            Some(d) => Entry::new(d, Provenance::Configured),
            None => Entry::new(DEFAULT_DELTA, Provenance::Configured),
        }
    }

    fn save(&self, name: &str, report: &Report) -> Result<()> {
        report.save(&self.out.join(format!("{name}.report")))
    }

    fn csv(&self, name: &str, write: impl FnOnce(std::fs::File) -> Result<()>) -> Result<()> {
        write(std::fs::File::create(self.out.join(name))?)
    }
}

fn worst(statuses: impl IntoIterator<Item = Status>) -> Status {
    statuses.into_iter().max().unwrap_or(Status::Ok)
}

fn verify_mvi(run: &Run, boundary: bool) -> Result<Status> {
    let fields = run.fields()?;
    let domain = fields[0].1.domain().clone();
    let n = domain.dim();
    let c = run.c_entry(&domain)?;
    let spec = &run.cfg.params;
    let results: Vec<Result<_>> = fields
        .par_iter()
        .map(|(label, e)| {
            let mut p = spec.to_params(n);
            if spec.fit {
                p.a = fit_nonlinearity(e, p.a0, p.a1).unwrap_or(0.0);
                if boundary {
                    p.b = fit_boundary_nonlinearity(e, p.b0, p.b1).unwrap_or(0.0);
                }
            }
            let ledger = ConstantLedger::new(n, p.a, p.b, c, run.delta())?;
            let rep = if boundary {
                verify_boundary_mvi(e, &p, &ledger, run.tol)?
            } else {
                verify_interior_mvi(e, &p, &ledger, run.tol)?
            };
            Ok((label.clone(), rep))
        })
        .collect();
    let name = if boundary { "verify-boundary" } else { "verify-interior" };
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut report = Report::new(name, results.first().and_then(|r| r.1.ledger.clone()));
    for (label, r) in &results {
        report.push(&Labelled { label, record: r })?;
    }
    run.save(name, &report)?;
    for (label, r) in &results {
        println!("{label}: {:?} lhs = {} rhs = {} margin = {}", r.verdict, r.lhs, r.rhs, r.margin);
    }
    Ok(worst(results.iter().map(|r| Status::of(r.1.verdict))))
}

fn verify_morrey_cmd(run: &Run) -> Result<Status> {
    let fields = run.fields()?;
    let domain = fields[0].1.domain().clone();
    let c = run.c_entry(&domain)?;
    let results = fields
        .par_iter()
        .map(|(label, e)| Ok((label.clone(), verify_morrey(e, c.value, run.tol)?)))
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let ledger = ConstantLedger::new(domain.dim(), 0.0, 0.0, c, run.delta())?;
    let mut report = Report::new("verify-morrey", Some(ledger));
    for (label, r) in &results {
        report.push(&Labelled { label, record: r })?;
        println!("{label}: {:?} ratio = {} margin = {}", r.verdict, r.required_constant(), r.margin);
    }
    run.save("verify-morrey", &report)?;
    Ok(worst(results.iter().map(|r| Status::of(r.1.verdict))))
}

fn default_radii(run: &Run, domain: &Domain, center: &[f64]) -> Vec<f64> {
    let spec = &run.cfg.monotonicity;
    if let Some(r) = &spec.radii {
        return r.clone();
    }
    let h = domain.spacing();
    let offset = center.iter().zip(domain.center()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let top = 0.9 * domain.radius() - offset;
    let mut radii = Vec::new();
    let mut r = spec.r_min_h * h;
    while r <= top {
        radii.push(r);
        r += spec.step_h * h;
    }
    radii
}

fn monotonicity_cmd(run: &Run) -> Result<Status> {
    let fields = run.fields()?;
    let domain = fields[0].1.domain().clone();
    let center = run.cfg.monotonicity.center.clone().unwrap_or_else(|| domain.center().to_vec());
    let radii = default_radii(run, &domain, &center);
    let results = fields
        .par_iter()
        .map(|(label, e)| Ok((label.clone(), monotonicity_suite(e, &center, &radii, run.tol)?)))
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut report = Report::new("monotonicity", None);
    for (k, (label, r)) in results.iter().enumerate() {
        report.push(&Labelled { label, record: r })?;
        let name = if results.len() == 1 {
            "monotonicity_profile.csv".to_string()
        } else {
            format!("monotonicity_profile_{k}.csv")
        };
        run.csv(&name, |f| write_shell_csv(&r.profile, f))?;
        println!("{label}: {:?} worst step = {}", r.verdict, r.worst_step);
    }
    run.save("monotonicity", &report)?;
    Ok(worst(results.iter().map(|r| Status::of(r.1.verdict))))
}

fn heinz_cmd(run: &Run) -> Result<Status> {
    let fields = run.fields()?;
    let spec = &run.cfg.heinz;
    let mut report = Report::new("heinz-scan", None);
    let mut status = Status::Ok;
    for (k, (label, e)) in fields.iter().enumerate() {
        let d = e.domain();
        let center = spec.center.clone().unwrap_or_else(|| d.center().to_vec());
        let r = spec.radius.unwrap_or(d.radius());
        let rep = heinz_scan(e, &center, r, spec.rho_resolution)?;
        report.push(&Labelled { label, record: &rep })?;
        let name = if fields.len() == 1 {
            "heinz_profile.csv".to_string()
        } else {
            format!("heinz_profile_{k}.csv")
        };
        run.csv(&name, |f| write_heinz_csv(&rep, f))?;
        println!("{label}: rho_bar = {} c_bar = {} eps = {} passed = {}", rep.rho_bar, rep.c_bar, rep.eps, rep.passed());
        if !rep.passed() {
            status = Status::ClaimFailed;
        }
    }
    run.save("heinz-scan", &report)?;
    Ok(status)
}

fn constants_cmd(run: &Run, a: Option<f64>, b: Option<f64>, radius: Option<f64>) -> Result<Status> {
    let domain = run.cfg.domain.as_ref().expect("domain is resolved");
    let n = domain.dimension;
    let a = a.unwrap_or(run.cfg.params.a);
    let b = b.unwrap_or(run.cfg.params.b);
    let c = match run.cfg.ledger.c {
        Some(c) => Entry::new(c, Provenance::Configured),
        None => run.c_entry(&run.domain()?)?,
    };
    let mut ledger = ConstantLedger::new(n, a, b, c, run.delta())?;
    let mut report = Report::new("constants", None);
    if let (Some(r), Some(eps)) = (radius, ledger.eps_ab) {
        let p = crate::config::ParamsSpec { a, b, ..run.cfg.params.clone() }.to_params(n);
        let ep = epsilon_prime(&p, r, c.value, eps.value)?;
        ledger = ledger.with_eps_prime(ep.value);
        report.push(&ep)?;
    }
    print!("{}", ledger.to_key_value());
    report.ledger = Some(ledger);
    run.save("constants", &report)?;
    Ok(Status::Ok)
}

fn planted_sequence(run: &Run) -> Result<DensitySequence> {
    let domain = run.domain()?;
    let planted = run
        .cfg
        .detect
        .planted
        .as_ref()
        .ok_or_else(|| Error::Config("detect-bubbles needs [detect] manifest or [detect.planted]".into()))?;
    let mut templates = planted.templates.clone();
    if let Some(s) = &planted.seeded {
        let seed = run.cfg.seed.unwrap_or(0);
        for c in seeded_bubble_centers(seed, s.count, s.ring, &domain) {
            templates.push(GeneratorSpec::Bubble {
                center: c,
                lambda: planted.schedule.first().copied().unwrap_or(1.0),
                amplitude: s.amplitude,
            });
        }
    }
    gen_sequence(&templates, &planted.schedule, &planted.background, &domain)
}

fn detect_cmd(run: &Run) -> Result<Status> {
    let spec = &run.cfg.detect;
    let seq = match &spec.manifest {
        Some(m) => SequenceManifest::load(m)?.into_sequence()?,
        None => planted_sequence(run)?,
    };
    let domain = seq
        .fields
        .first()
        .ok_or_else(|| Error::Config("empty sequence".into()))?
        .domain()
        .clone();
    let c = run.c_entry(&domain)?;
    let a = spec.ledger_a.unwrap_or(seq.params.a);
    let b = spec.ledger_b.unwrap_or(seq.params.b);
    let ledger = ConstantLedger::new(domain.dim(), a, b, c, run.delta())?;
    let rep = detect_concentration(&seq, &ledger, spec.divergence_threshold, &spec.options)?;
    let mut report = Report::new("detect-bubbles", Some(ledger));
    report.push(&rep)?;
    run.save("detect-bubbles", &report)?;
    run.csv("detect_bubbles.csv", |f| write_bubbles_csv(&rep, f))?;
    println!(
        "N = {} (max {}), bounded candidates = {}, uniformly bounded = {}",
        rep.count(),
        rep.max_points,
        rep.bounded_candidates.len(),
        rep.uniformly_bounded()
    );
    Ok(Status::Ok)
}

fn estimate_cmd(run: &Run) -> Result<Status> {
    let fields = run.fields()?;
    let kind = Run::family_kind(fields[0].1.domain());
    let family: Vec<ScalarField> = fields.iter().map(|f| f.1.clone()).collect();
    let est = estimate_constant(&family, kind, run.tol)?;
    let mut report = Report::new("estimate-c", None);
    report.push(&Labelled {
        label: &fields[est.argmax].0,
        record: &est,
    })?;
    run.save("estimate-c", &report)?;
    println!("C = {} (argmax {})", est.c, fields[est.argmax].0);
    Ok(Status::Ok)
}

/// Runs a parsed command line and returns the exit status.
pub fn run(cli: &Cli) -> Status {
    let result = Run::new(cli).and_then(|run| match &cli.command {
        Command::VerifyMorrey => verify_morrey_cmd(&run),
        Command::VerifyInterior => verify_mvi(&run, false),
        Command::VerifyBoundary => verify_mvi(&run, true),
        Command::Monotonicity => monotonicity_cmd(&run),
        Command::HeinzScan => heinz_cmd(&run),
        Command::Constants { a, b, radius } => constants_cmd(&run, *a, *b, *radius),
        Command::DetectBubbles => detect_cmd(&run),
        Command::EstimateC => estimate_cmd(&run),
    });
    match result {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            Status::of_error(&e)
        }
    }
}

/// Parses `args` (program name first) and runs.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli) as i32,
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                Status::InputError as i32
            } else {
                0
            }
        }
    }
}
