//! `yamabe-cert`: certificates that torus bundles over spin bases with
//! nonzero Â-genus have vanishing Yamabe invariant, plus the individual
//! checks that go into them.
//!
//! Exit status: 0 on success or an issued certificate, 2 when a certificate
//! is withheld or a cocycle fails validation, 1 on bad input.

mod input;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use yamabe_core::bundle::{certify_with, index_pipelines, BundleSpec, Certificate, IndexOptions, MetricInput};
use yamabe_core::charclass::{ahat_genus_with, ahat_polynomials, default_ahat_series, Partition, PontryaginData};
use yamabe_core::cocycle::{
    lattice_cover, orientation_double_cover, stabilize_odd, validate_cocycle, CocycleFile,
};
use yamabe_core::constants::{vol_sphere, yamabe_kahler, yamabe_sphere, yamabe_surface, YamabeValue};
use yamabe_core::metric::{self, decay_rate};
use yamabe_core::rational::RationalText;

use input::{load_base, load_bundle, load_cocycle, load_metric, CliError, Result};

const DEGREE_CAP_VAR: &str = "YAMABE_CERT_DEGREE_CAP";

#[derive(Parser)]
#[command(name = "yamabe-cert", version, about = "Zero-Yamabe certificates for torus bundles")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Build the two-sided certificate for one or more bundle specs.
    Certify(CertifyArgs),
    /// Twisted Dirac index of a bundle spec, by both pipelines.
    Index {
        file: PathBuf,
        #[arg(long)]
        dump_classes: bool,
    },
    /// Â-genus of a base from flags or a file.
    Ahat(AhatArgs),
    /// Validate a cocycle (bare or inside a bundle spec).
    CocycleCheck {
        file: PathBuf,
        /// Compare translations exactly rather than modulo the lattice.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Lattice cover of degree n^m.
    Cover {
        file: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Odd-rank stabilization of a bundle spec.
    Stabilize { file: PathBuf },
    /// Orientation double cover of a bundle spec.
    Orient { file: PathBuf },
    /// Decay of |ω| under the scaled metrics h_n.
    Decay {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
        n: Vec<u64>,
        /// Number of fiber pairs in ω; defaults to half the fiber dimension.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Smallest n with C·2π·|ω|/n² below the base scalar curvature.
    Threshold(ThresholdArgs),
    /// Closed-form Yamabe constants.
    Constants {
        #[command(subcommand)]
        which: ConstantsCommand,
    },
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Block-metric samples (with optional s_min) for the threshold.
    #[arg(long)]
    metric: Option<PathBuf>,
    #[arg(long)]
    weitzenbock_constant: Option<f64>,
    /// Number of worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Include the intermediate cohomology classes.
    #[arg(long)]
    dump_classes: bool,
}

#[derive(Args)]
struct AhatArgs {
    /// Base or bundle-spec file.
    file: Option<PathBuf>,
    #[arg(long)]
    dim: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    p1: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    p2: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    p3: Option<i64>,
    /// Characteristic number as KEY=VALUE, e.g. p1^2=4.
    #[arg(long = "number", allow_hyphen_values = true)]
    numbers: Vec<String>,
    #[arg(long)]
    nonspin: bool,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Metric file; supplies the norm, dimension and s_min.
    file: Option<PathBuf>,
    #[arg(long)]
    s_min: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    /// |ω|_h at n = 1.
    #[arg(long)]
    norm: Option<f64>,
    #[arg(long)]
    constant: Option<f64>,
}

#[derive(Subcommand)]
enum ConstantsCommand {
    Sphere {
        #[arg(long)]
        n: u32,
    },
    Surface {
        #[arg(long, allow_negative_numbers = true)]
        chi: i64,
    },
    Kahler {
        #[arg(long, allow_negative_numbers = true)]
        chi: i64,
        #[arg(long, allow_negative_numbers = true)]
        tau: i64,
        #[arg(long)]
        cp2: bool,
    },
    Vol {
        #[arg(long)]
        n: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Ok,
    Withheld,
}

struct Output {
    format: Format,
    lines: Vec<String>,
}

impl Output {
    fn text(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    fn record(&mut self, value: serde_json::Value) {
        self.lines.push(value.to_string());
    }
}

fn degree_cap() -> Result<Option<u32>> {
    match std::env::var(DEGREE_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{DEGREE_CAP_VAR}={v:?} is not a nonnegative integer"))),
        Err(_) => Ok(None),
    }
}

fn index_options(keep_classes: bool) -> Result<IndexOptions> {
    Ok(IndexOptions {
        ahat_bound: degree_cap()?,
        keep_classes,
    })
}

fn certify_one(path: &Path, metric: Option<&MetricInput>, opts: &IndexOptions) -> Result<Certificate> {
    let spec = load_bundle(path)?;
    certify_with(&spec, metric, opts).map_err(|source| CliError::Input {
        path: path.to_owned(),
        source,
    })
}

fn run_certify(args: &CertifyArgs, out: &mut Output) -> Result<Status> {
    let opts = index_options(args.dump_classes)?;
    let metric = match &args.metric {
        Some(p) => {
            let file = load_metric(p)?;
            Some(MetricInput {
                metric: file.to_metric()?,
                s_min: file.s_min,
                weitzenbock_constant: args.weitzenbock_constant,
            })
        }
        None => None,
    };
    let jobs = args.jobs.max(1).min(args.files.len());
    let mut results: Vec<Option<Result<Certificate>>> = (0..args.files.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunk = args.files.len().div_ceil(jobs);
        for (files, slots) in args.files.chunks(chunk).zip(results.chunks_mut(chunk)) {
            let (metric, opts) = (metric.as_ref(), &opts);
            scope.spawn(move || {
                for (f, slot) in files.iter().zip(slots) {
                    *slot = Some(certify_one(f, metric, opts));
                }
            });
        }
    });

    let many = args.files.len() > 1;
    let mut status = Status::Ok;
    for (path, result) in args.files.iter().zip(results) {
        let cert = result.expect("every slot is filled")?;
        if !cert.is_issued() {
            status = Status::Withheld;
        }
        match out.format {
            Format::Text => {
                if many {
                    out.text(format!("# {}", path.display()));
                }
                out.text(cert.render_text());
            }
            Format::Structured => out.record(json!({
                "record": "certificate",
                "file": path.display().to_string(),
                "certificate": cert,
            })),
        }
    }
    Ok(status)
}

fn run_index(file: &Path, dump_classes: bool, out: &mut Output) -> Result<Status> {
    let spec: BundleSpec = load_bundle(file)?;
    let c = index_pipelines(&spec, &index_options(dump_classes)?)?;
    match out.format {
        Format::Text => {
            out.text(format!("index = {}", c.index));
            out.text(format!("Â(B)[B] = {}", c.ahat_genus));
            out.text(format!("fiber integral = {}", c.fiber_integral));
            out.text(format!("pipeline A = {}, pipeline B = {}", c.pipeline_a, c.pipeline_b));
            if let Some(classes) = &c.classes {
                out.text(format!("ch(E) = {}", classes.chern_character));
                out.text(format!("Â(B) = {}", classes.ahat_base));
                out.text(format!("integrand = {}", classes.integrand));
                out.text(format!("π_*(integrand) = {}", classes.pushforward));
            }
        }
        Format::Structured => out.record(json!({"record": "index", "index": c})),
    }
    Ok(Status::Ok)
}

fn base_from_flags(args: &AhatArgs) -> Result<PontryaginData> {
    let dim = args
        .dim
        .ok_or_else(|| CliError::Usage("give a base file or --dim".into()))?;
    let mut numbers = BTreeMap::new();
    for (i, v) in [(1u32, args.p1), (2, args.p2), (3, args.p3)] {
        if let Some(v) = v {
            numbers.insert(Partition::new(vec![i]), v);
        }
    }
    for item in &args.numbers {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--number {item:?} is not KEY=VALUE")))?;
        let v: i64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--number {item:?}: bad value")))?;
        numbers.insert(k.trim().parse()?, v);
    }
    Ok(PontryaginData::new(dim, !args.nonspin, numbers)?)
}

fn run_ahat(args: &AhatArgs, out: &mut Output) -> Result<Status> {
    let base = match &args.file {
        Some(p) => load_base(p)?,
        None => base_from_flags(args)?,
    };
    let genus = match degree_cap()? {
        Some(cap) => ahat_genus_with(&base, &ahat_polynomials(cap))?,
        None if base.quaternionic_degree() <= default_ahat_series().max_degree() => {
            ahat_genus_with(&base, default_ahat_series())?
        }
        None => ahat_genus_with(&base, &ahat_polynomials(base.quaternionic_degree()))?,
    };
    let value = RationalText(genus.value.clone());
    match out.format {
        Format::Text => {
            out.text(format!("Â-genus = {value}"));
            if genus.non_spin_warning {
                out.text("warning: base is not spin; the Â-genus carries no index obstruction");
            }
        }
        Format::Structured => out.record(json!({
            "record": "ahat",
            "dimension": base.dimension,
            "value": value,
            "non_spin_warning": genus.non_spin_warning,
        })),
    }
    Ok(Status::Ok)
}

fn run_cocycle_check(file: &Path, exact: bool, rank: Option<usize>, out: &mut Output) -> Result<Status> {
    let (c, _) = load_cocycle(file, rank)?;
    let report = validate_cocycle(&c, !exact)?;
    match out.format {
        Format::Text => out.text(format!("cocycle {report}")),
        Format::Structured => out.record(json!({"record": "cocycle_check", "report": report})),
    }
    Ok(if report.is_valid() { Status::Ok } else { Status::Withheld })
}

fn run_cover(file: &Path, n: u64, rank: Option<usize>, out: &mut Output) -> Result<Status> {
    let (c, _) = load_cocycle(file, rank)?;
    let cover = lattice_cover(&c, n)?;
    let cocycle = CocycleFile::from_cocycle(&cover.cocycle);
    match out.format {
        Format::Text => {
            out.text(format!("degree = {}", cover.degree));
            out.text(serde_json::to_string_pretty(&cocycle).expect("serializable"));
        }
        Format::Structured => out.record(json!({
            "record": "cover",
            "degree": cover.degree.to_string(),
            "cocycle": cocycle,
        })),
    }
    Ok(Status::Ok)
}

fn emit_spec(spec: &BundleSpec, record: &str, out: &mut Output) {
    let file = spec.to_file();
    match out.format {
        Format::Text => out.text(serde_json::to_string_pretty(&file).expect("serializable")),
        Format::Structured => out.record(json!({"record": record, "spec": file})),
    }
}

fn run_stabilize(file: &Path, out: &mut Output) -> Result<Status> {
    let spec = load_bundle(file)?;
    let cocycle = stabilize_odd(&spec.cocycle)?;
    let stabilized = BundleSpec {
        fiber_rank: cocycle.rank(),
        cocycle,
        ..spec
    };
    emit_spec(&stabilized, "stabilize", out);
    Ok(Status::Ok)
}

fn run_orient(file: &Path, out: &mut Output) -> Result<Status> {
    let spec = load_bundle(file)?;
    let (cocycle, base) = orientation_double_cover(&spec.cocycle, &spec.base)?;
    let cover = BundleSpec {
        base,
        cocycle,
        ..spec
    };
    emit_spec(&cover, "orient", out);
    Ok(Status::Ok)
}

fn run_decay(file: &Path, n: &[u64], k: Option<usize>, out: &mut Output) -> Result<Status> {
    let h = load_metric(file)?.to_metric()?;
    let k = k.unwrap_or(h.fiber_dim() / 2);
    let report = decay_rate(&h, k, n)?;
    match out.format {
        Format::Text => {
            out.text(report.to_csv().trim_end());
            out.text(report.summary());
        }
        Format::Structured => out.record(json!({"record": "decay", "report": report})),
    }
    Ok(Status::Ok)
}

fn run_threshold(args: &ThresholdArgs, out: &mut Output) -> Result<Status> {
    let (mut s_min, mut dim, mut norm) = (args.s_min, args.dim, args.norm);
    if let Some(p) = &args.file {
        let file = load_metric(p)?;
        let h = file.to_metric()?;
        s_min = s_min.or(file.s_min);
        dim = dim.or(Some(h.total_dim()));
        norm = norm.or(Some(metric::max_omega_norm(&h, h.fiber_dim() / 2)?));
    }
    let missing = |what: &str| CliError::Usage(format!("threshold needs {what}"));
    let s_min = s_min.ok_or_else(|| missing("--s-min"))?;
    let dim = dim.ok_or_else(|| missing("--dim"))?;
    let norm = norm.ok_or_else(|| missing("--norm"))?;
    let constant = args.constant.unwrap_or_else(|| metric::default_weitzenbock_constant(dim));
    let n_star = metric::weitzenbock_threshold(s_min, dim, norm, Some(constant))?;
    match out.format {
        Format::Text => out.text(format!("n* = {n_star}")),
        Format::Structured => out.record(json!({
            "record": "threshold",
            "n_star": n_star,
            "s_min": s_min,
            "dim_total": dim,
            "norm_at_1": norm,
            "constant": constant,
        })),
    }
    Ok(Status::Ok)
}

fn run_constants(which: &ConstantsCommand, out: &mut Output) -> Result<Status> {
    let value: YamabeValue = match which {
        ConstantsCommand::Sphere { n } => yamabe_sphere(*n)?,
        ConstantsCommand::Surface { chi } => yamabe_surface(*chi),
        ConstantsCommand::Kahler { chi, tau, cp2 } => yamabe_kahler(*chi, *tau, *cp2)?,
        ConstantsCommand::Vol { n } => {
            let v = vol_sphere(*n)?;
            match out.format {
                Format::Text => out.text(format!("vol(S^{n}) = {v}")),
                Format::Structured => out.record(json!({"record": "vol_sphere", "n": n, "value": v})),
            }
            return Ok(Status::Ok);
        }
    };
    match out.format {
        Format::Text => out.text(value.to_string()),
        Format::Structured => out.record(json!({"record": "constant", "value": value})),
    }
    Ok(Status::Ok)
}

fn dispatch(cli: &Cli, out: &mut Output) -> Result<Status> {
    match &cli.command {
        Command::Certify(args) => run_certify(args, out),
        Command::Index { file, dump_classes } => run_index(file, *dump_classes, out),
        Command::Ahat(args) => run_ahat(args, out),
        Command::CocycleCheck { file, exact, rank } => run_cocycle_check(file, *exact, *rank, out),
        Command::Cover { file, n, rank } => run_cover(file, *n, *rank, out),
        Command::Stabilize { file } => run_stabilize(file, out),
        Command::Orient { file } => run_orient(file, out),
        Command::Decay { file, n, k } => run_decay(file, n, *k, out),
        Command::Threshold(args) => run_threshold(args, out),
        Command::Constants { which } => run_constants(which, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut out = Output {
        format: cli.format,
        lines: Vec::new(),
    };
    match dispatch(&cli, &mut out) {
        Ok(status) => {
            for line in &out.lines {
                println!("{line}");
            }
            match status {
                Status::Ok => ExitCode::SUCCESS,
                Status::Withheld => ExitCode::from(2),
            }
        }
        Err(e) => {
            match cli.format {
                Format::Text => eprintln!("error: {e}"),
                Format::Structured => println!("{}", json!({"record": "error", "message": e.to_string()})),
            }
            ExitCode::from(1)
        }
    }
}
