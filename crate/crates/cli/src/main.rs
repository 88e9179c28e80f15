//! `mmcert`: decide minimax, domination and representation questions on finite
//! instances and emit exact, re-checkable certificates.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mmcert_core::certificate::{PietschCert, SummingCert};
use mmcert_core::exhaustion::{ClippedFamily, ExhaustionInstance, Piece};
use mmcert_core::io::{parse_groups, parse_json, parse_labels, parse_vector, OperatorFile, VectorFile};
use mmcert_core::{
    verify, Certificate, CoreInstance, DominationInstance, Envelope, Error, FamilyMatrix, FanInstance, Instance,
    PietschInstance, PolyNorm, Rational, StrassenInstance, SufficiencyInstance, Verdict,
};

mod oracle;

#[derive(Parser)]
#[command(name = "mmcert", version, about = "Exact minimax and domination certificates")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Append an independent brute-force or floating-point check.
    #[arg(long, global = true)]
    oracle: bool,
    /// Swap the roles of functions and points.
    #[arg(long, global = true)]
    transpose: bool,
    /// Write the JSON here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Lower, upper and hull values with optimal mixtures.
    Minimax {
        instance: PathBuf,
        /// Sub-families as `f1,f2;f3`; reports the local minimax value instead.
        #[arg(long)]
        subfamilies: Option<String>,
        /// Include the interval-covering concavity analysis.
        #[arg(long)]
        check_concave: bool,
    },
    /// Find a measure dominating every target row, or a balance violation.
    Dominate { instance: PathBuf },
    /// Decide whether a target lies in the convex hull of the family.
    Hull {
        instance: PathBuf,
        /// Comma-separated values, or the name of a target row.
        #[arg(long)]
        target: String,
    },
    /// Dominate values at points by a linear functional of bounded norm.
    Fan {
        points: PathBuf,
        #[arg(long)]
        rho: String,
        /// Norm on the points, `l1` or `linf`; the functional is bounded in its dual.
        #[arg(long, default_value = "l1")]
        norm: String,
    },
    /// Decide whether a subset of points is sufficient for the family.
    Suffice {
        instance: PathBuf,
        /// Comma-separated point labels.
        #[arg(long)]
        subset: String,
    },
    /// Decompose a linear functional under a family of sublinear functionals.
    Strassen {
        functionals: PathBuf,
        #[arg(long)]
        phi: String,
    },
    /// Check an exhaustion of the points by the clipped family.
    Exhaust {
        instance: PathBuf,
        /// Pieces as `a:x1,x2;b:x3`; defaults to a single piece of all points.
        #[arg(long)]
        pieces: Option<String>,
    },
    /// Least summing constant of a target with respect to the family.
    Summing {
        instance: PathBuf,
        #[arg(long)]
        target: String,
    },
    /// Net relaxation of the p-summing constant of a matrix.
    Pietsch {
        operator: PathBuf,
        #[arg(long)]
        p: u32,
        #[command(flatten)]
        files: PietschFiles,
        /// Norm on the operator's range, `l1` or `linf`.
        #[arg(long, default_value = "l1")]
        norm: String,
    },
    /// Re-check a certificate against its instance in exact arithmetic.
    Verify {
        certificate: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        files: OptionalPietschFiles,
    },
}

#[derive(Args)]
struct PietschFiles {
    /// Dual net functionals, as `{"vectors": [...]}`.
    #[arg(long)]
    net: PathBuf,
    /// Sample points, as `{"vectors": [...]}`.
    #[arg(long)]
    sample: PathBuf,
}

#[derive(Args)]
struct OptionalPietschFiles {
    /// Net file, for operator certificates.
    #[arg(long)]
    net: Option<PathBuf>,
    /// Sample file, for operator certificates.
    #[arg(long)]
    sample: Option<PathBuf>,
}

/// Failure before any answer was produced.
enum Failure {
    /// Unreadable or malformed input.
    Input(String),
    /// Solver self-check or oracle disagreement.
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Internal(_) => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

#[derive(Serialize)]
struct Report<'a> {
    #[serde(flatten)]
    envelope: &'a Envelope,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<oracle::OracleReport>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Outcome<T> {
    parse_json(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn scalar(flag: &str, text: &str) -> Outcome<Rational> {
    text.trim().parse().map_err(|e: Error| Failure::Input(format!("--{flag}: {e}")))
}

fn vector(flag: &str, text: &str) -> Outcome<Vec<Rational>> {
    parse_vector(text).map_err(|e| Failure::Input(format!("--{flag}: {e}")))
}

fn norm(text: &str) -> Outcome<PolyNorm> {
    text.parse().map_err(|e: Error| Failure::Input(format!("--norm: {e}")))
}

/// A target given as values, or as the name of one of the instance's target rows.
fn target(text: &str, inst: &CoreInstance) -> Outcome<Vec<Rational>> {
    if let Some(row) = inst.targets.iter().find(|r| r.name == text.trim()) {
        return Ok(row.values.clone());
    }
    vector("target", text)
}

fn pieces(text: &str) -> Outcome<Vec<Piece>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|part| {
            let (label, points) = part
                .split_once(':')
                .ok_or_else(|| Failure::Input(format!("--pieces: `{part}` is not of the form label:x1,x2")))?;
            Ok(Piece {
                label: label.trim().to_string(),
                points: parse_labels(points),
            })
        })
        .collect()
}

fn pietsch_instance(operator: &Path, net: &Path, sample: &Path) -> Outcome<PietschInstance> {
    Ok(PietschInstance {
        matrix: load::<OperatorFile>(operator)?.matrix,
        net: load::<VectorFile>(net)?.vectors,
        sample: load::<VectorFile>(sample)?.vectors,
    })
}

fn core_family(inst: &CoreInstance, transposed: bool) -> Outcome<FamilyMatrix> {
    Ok(inst.oriented_family(transposed)?)
}

/// Run the solver for a subcommand; `None` for `verify`.
fn issue(command: &Command, transpose: bool) -> Outcome<Option<(Instance, Certificate)>> {
    let out = match command {
        Command::Minimax {
            instance,
            subfamilies,
            check_concave,
        } => {
            let inst: CoreInstance = load(instance)?;
            let a = core_family(&inst, transpose)?;
            let cert = match subfamilies {
                Some(groups) => Certificate::local_minimax(&a, &parse_groups(groups))?,
                None => Certificate::minimax(&a, *check_concave)?,
            };
            (Instance::Core(inst), cert)
        }
        Command::Dominate { instance } => {
            let inst: CoreInstance = load(instance)?;
            if transpose {
                return Err(Failure::Input("dominate does not support --transpose".into()));
            }
            let targets = inst
                .targets()?
                .ok_or_else(|| Failure::Input(format!("{}: no `targets` to dominate", instance.display())))?;
            let cert = Certificate::domination(&DominationInstance::new(inst.family()?, targets)?)?;
            (Instance::Core(inst), cert)
        }
        Command::Hull { instance, target: g } => {
            let inst: CoreInstance = load(instance)?;
            let g = target(g, &inst)?;
            let cert = Certificate::hull(&core_family(&inst, transpose)?, &g)?;
            (Instance::Core(inst), cert)
        }
        Command::Fan { points, rho, norm: n } => {
            let inst: FanInstance = load(points)?;
            let cert = Certificate::fan(&inst, &scalar("rho", rho)?, norm(n)?)?;
            (Instance::Fan(inst), cert)
        }
        Command::Suffice { instance, subset } => {
            let inst: CoreInstance = load(instance)?;
            let s = SufficiencyInstance::new(core_family(&inst, transpose)?, &parse_labels(subset))?;
            (Instance::Core(inst), Certificate::sufficiency(&s)?)
        }
        Command::Strassen { functionals, phi } => {
            let inst: StrassenInstance = load(functionals)?;
            inst.validate()?;
            let cert = Certificate::strassen(&vector("phi", phi)?, &inst.functionals)?;
            (Instance::Strassen(inst), cert)
        }
        Command::Exhaust { instance, pieces: given } => {
            let inst: CoreInstance = load(instance)?;
            let a = core_family(&inst, transpose)?;
            let pieces = match given {
                Some(text) => pieces(text)?,
                None => vec![Piece {
                    label: "X".into(),
                    points: a.col_labels().to_vec(),
                }],
            };
            let ex = ExhaustionInstance::new(ClippedFamily::new(&a), pieces)?;
            (Instance::Core(inst), Certificate::exhaustion(&ex)?)
        }
        Command::Summing { instance, target: g } => {
            let inst: CoreInstance = load(instance)?;
            let g = target(g, &inst)?;
            let cert = Certificate::summing(&core_family(&inst, transpose)?, &g)?;
            (Instance::Core(inst), cert)
        }
        Command::Pietsch {
            operator,
            p,
            files,
            norm: n,
        } => {
            let inst = pietsch_instance(operator, &files.net, &files.sample)?;
            let cert = Certificate::pietsch(&inst, *p, norm(n)?)?;
            (Instance::Pietsch(inst), cert)
        }
        Command::Verify { .. } => return Ok(None),
    };
    if transpose && !matches!(out.0, Instance::Core(_)) {
        return Err(Failure::Input("--transpose applies only to function-family instances".into()));
    }
    Ok(Some(out))
}

/// The instance a certificate of this kind refers to.
fn instance_for(cert: &Certificate, path: &Path, files: &OptionalPietschFiles) -> Outcome<Instance> {
    Ok(match cert {
        Certificate::FanFunctional(_) | Certificate::FanViolation(_) => Instance::Fan(load(path)?),
        Certificate::StrassenDecomposition(_) | Certificate::StrassenViolation(_) => Instance::Strassen(load(path)?),
        Certificate::PietschEstimate(_) => {
            let (Some(net), Some(sample)) = (&files.net, &files.sample) else {
                return Err(Failure::Input("operator certificates need --net and --sample".into()));
            };
            Instance::Pietsch(pietsch_instance(path, net, sample)?)
        }
        _ => Instance::Core(load(path)?),
    })
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> Outcome<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
    text.push('\n');
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Outcome<u8> {
    let g = &cli.global;
    if let Command::Verify {
        certificate,
        instance,
        files,
    } = &cli.command
    {
        let text = read(certificate)?;
        // Reports may carry an oracle section; only the envelope is checked.
        let mut value: serde_json::Value =
            parse_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", certificate.display())))?;
        if let Some(obj) = value.as_object_mut() {
            obj.remove("oracle");
        }
        let env: Envelope = serde_json::from_value(value)
            .map_err(|e| Failure::Input(format!("{}: parse error: {e}", certificate.display())))?;
        let inst = instance_for(&env.certificate, instance, files)?;
        let verdict: Verdict = verify(&env, &inst);
        eprintln!(
            "{}: {}",
            env.certificate.kind(),
            match &verdict.reason {
                None => "valid".to_string(),
                Some(r) => format!("invalid ({r})"),
            }
        );
        emit(&verdict, g.output.as_deref())?;
        return Ok(if verdict.valid { 0 } else { 1 });
    }

    let (instance, cert) = issue(&cli.command, g.transpose)?.expect("verify handled above");
    let oracle = if g.oracle {
        Some(oracle::report(&cert, &instance, g.transpose)?)
    } else {
        None
    };
    let violation = cert.is_violation();
    let envelope = Envelope::seal(&instance, g.transpose, cert);
    eprintln!("{}", summary(&envelope.certificate));
    emit(
        &Report {
            envelope: &envelope,
            oracle: oracle.clone(),
        },
        g.output.as_deref(),
    )?;
    if let Some(o) = oracle.filter(|o| !o.agrees) {
        return Err(Failure::Internal(format!("oracle disagrees: {}", o.notes.join("; "))));
    }
    Ok(if violation { 1 } else { 0 })
}

/// One human-readable line on standard error.
fn summary(cert: &Certificate) -> String {
    let detail = match cert {
        Certificate::MinimaxReport(r) => format!(
            "lower {} upper {} hull value {} concave-like {}",
            r.lower, r.upper, r.hull_value, r.concave_like
        ),
        Certificate::LocalMinimax(c) => format!("value {} attained by sub-family {}", c.value, c.best + 1),
        Certificate::DualityPair(d) => format!("value {}", d.value),
        Certificate::DominatingMeasure(m) => format!("dominated by a measure on {} functions", m.support.len()),
        Certificate::BalanceViolation(_) => "balance condition violated".into(),
        Certificate::HullMembership(_) => "target lies in the hull".into(),
        Certificate::HullSeparation(c) => format!("target separated with margin {}", c.margin),
        Certificate::FanFunctional(_) => "dominating functional found".into(),
        Certificate::FanViolation(c) => format!("no functional of norm at most {}; margin {}", c.rho, c.margin),
        Certificate::ExhaustionCover(c) => format!("exhaustion {}", if c.valid { "valid" } else { "invalid" }),
        Certificate::SufficiencyWitness(_) => "subset is sufficient".into(),
        Certificate::SufficiencyViolation(_) => "subset is not sufficient".into(),
        Certificate::StrassenDecomposition(_) => "decomposition found".into(),
        Certificate::StrassenViolation(c) => format!("functional exceeds the maximum; margin {}", c.margin),
        Certificate::SummingWitness(SummingCert { witness, .. })
        | Certificate::PietschEstimate(PietschCert { witness, .. }) => match &witness.constant {
            Some(k) => format!("constant {k}"),
            None => "no finite constant".into(),
        },
        Certificate::SubBarycentre(c) => format!("sub-barycentre {}", c.point),
    };
    format!("{}: {detail}", cert.kind())
}
