//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when the model or the plan fails, 2 on bad
//! flags. Artifacts go to standard output or to files; diagnostics only
//! ever go to standard error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::Ipv4Addr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::manifest::{self, DeployInputs, GpuDevice, ManifestBundle};
use crate::parser::{self, ParseError};
use crate::plan::{self, TerminationOptions};
use crate::submodel::{ActionModel, MatchmakingModel, OrchestrationSubmodels, Submodel, WorkflowModel};

/// Environment variable consulted when no token flag is given.
pub const TOKEN_ENV: &str = "REGISTRY_TOKEN_B64";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ceaml",
    version,
    about = "Generate Kubernetes and Kubevirt plans from CEAML models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the deployment bundle and orchestration submodels.
    Deploy(DeployArgs),
    /// Generate the termination plan for a running instance.
    Terminate(TerminateArgs),
    /// Generate a scale-out bundle for a running instance on another cluster.
    ScaleOut(ScaleOutArgs),
    /// Parse and validate a model.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct TokenArgs {
    /// Base64 encoded registry access token.
    #[arg(long, value_name = "B64", conflicts_with = "token_file")]
    token_b64: Option<String>,
    /// File holding the base64 encoded registry access token.
    #[arg(long, value_name = "PATH")]
    token_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Directory to write one file per document into.
    #[arg(
        long,
        value_name = "DIR",
        conflicts_with = "stdout",
        required_unless_present = "stdout"
    )]
    out: Option<PathBuf>,
    /// Write a single multi-document YAML stream to standard output.
    #[arg(long)]
    stdout: bool,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    /// External IPv4 address available for load balancers (repeatable).
    #[arg(long = "external-ip", value_name = "IP")]
    external_ips: Vec<Ipv4Addr>,
    /// GPU available on the cluster as <resource>=<device id> (repeatable).
    #[arg(long = "gpu", value_name = "RESOURCE=ID", value_parser = parse_gpu)]
    gpus: Vec<GpuDevice>,
}

#[derive(Debug, Args)]
struct DeployArgs {
    /// CEAML model file.
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    /// Application version; must match the model.
    #[arg(long)]
    version: String,
    /// Target cluster id.
    #[arg(long)]
    cluster: String,
    /// Fixed instance nonce (5 lowercase alphanumerics) for reproducible output.
    #[arg(long)]
    nonce: Option<String>,
    #[command(flatten)]
    token: TokenArgs,
    #[command(flatten)]
    resources: ClusterArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct TerminateArgs {
    /// Running instance name, e.g. acc-uc2orbk-0-0-4-00036-gameserver-7reio-min1.
    #[arg(long)]
    instance: String,
    /// CEAML model file.
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    /// The component is the last one running; delete the namespace too.
    #[arg(long)]
    last: bool,
    /// Write termination.yaml into this directory instead of standard output.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScaleOutArgs {
    /// Running instance name of the replica to copy.
    #[arg(long)]
    instance: String,
    /// CEAML model file.
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    /// Cluster to scale out to.
    #[arg(long)]
    cluster: String,
    /// Application version; defaults to the model version.
    #[arg(long)]
    version: Option<String>,
    /// Seed for the replica random segment.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    token: TokenArgs,
    #[command(flatten)]
    resources: ClusterArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// CEAML model file.
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
}

fn parse_gpu(s: &str) -> Result<GpuDevice, String> {
    s.parse().map_err(|e: manifest::ManifestError| e.to_string())
}

/// Runtime failure, reported with exit code 1 unless `usage` is set.
struct Failure {
    message: String,
    usage: bool,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            message: message.into(),
            usage: true,
        }
    }
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            message: e.to_string(),
            usage: false,
        }
    }
}

/// Runs the CLI with process stdio.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{rendered}");
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Deploy(args) => deploy(args, out, err),
        Command::Terminate(args) => terminate(args, out, err),
        Command::ScaleOut(args) => scale_out(args, out, err),
        Command::Validate(args) => validate(args, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            if f.usage {
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    }
}

fn resolve_token(args: &TokenArgs) -> Result<String, Failure> {
    if let Some(t) = &args.token_b64 {
        return Ok(t.trim().to_string());
    }
    if let Some(path) = &args.token_file {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::from(format!("cannot read token file {}: {e}", path.display())))?;
        return Ok(text.trim().to_string());
    }
    match std::env::var(TOKEN_ENV) {
        Ok(t) if !t.trim().is_empty() => Ok(t.trim().to_string()),
        _ => Err(Failure::usage(format!(
            "a registry token is required: pass --token-b64, --token-file or set {TOKEN_ENV}"
        ))),
    }
}

/// Deterministic generator for a fixed nonce: the nonce read as a base-36 number.
/// Random source for a run. A fixed nonce seeds it with the nonce read as a
/// base 36 number, so identical flags give identical output.
pub fn rng_for_nonce(nonce: Option<&str>) -> ChaCha8Rng {
    match nonce.and_then(|n| u64::from_str_radix(n, 36).ok()) {
        Some(seed) => ChaCha8Rng::seed_from_u64(seed),
        None => ChaCha8Rng::from_entropy(),
    }
}

/// `<order>-<kind>-<name>.yaml`, order zero-padded to two digits.
pub fn manifest_file_name(order: usize, doc: &manifest::ManifestDoc) -> String {
    format!("{order:02}-{}-{}.yaml", doc.kind.as_str().to_lowercase(), doc.name)
}

fn write_bundle_files(dir: &Path, bundle: &ManifestBundle) -> Result<usize, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::from(format!("cannot create {}: {e}", dir.display())))?;
    for (i, doc) in bundle.docs.iter().enumerate() {
        let text = manifest::serialize_docs(std::slice::from_ref(doc));
        write_file(&dir.join(manifest_file_name(i, doc)), &text)?;
    }
    Ok(bundle.docs.len())
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::from(format!("cannot write {}: {e}", path.display())))
}

fn submodel_files(s: &OrchestrationSubmodels) -> [(&'static str, String); 3] {
    [
        (MatchmakingModel::FILE_NAME, s.matchmaking.to_yaml()),
        (ActionModel::FILE_NAME, s.actions.to_yaml()),
        (WorkflowModel::FILE_NAME, s.workflows.to_yaml()),
    ]
}

fn deploy(args: DeployArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let inputs = DeployInputs {
        registry_token_b64: resolve_token(&args.token)?,
        version: args.version,
        external_ips: args.resources.external_ips,
        cluster_id: args.cluster,
        gpus: args.resources.gpus,
    };
    let mut rng = rng_for_nonce(args.nonce.as_deref());
    let plan = plan::plan_deployment(&args.model, &inputs, args.nonce.as_deref(), &mut rng)?;
    let files = submodel_files(&plan.submodels);
    match &args.output.out {
        Some(dir) => {
            let n = write_bundle_files(dir, &plan.bundle)?;
            for (name, text) in &files {
                write_file(&dir.join(name), text)?;
            }
            writeln!(
                err,
                "instance {}: wrote {n} manifests and {} submodels to {}",
                plan.instance(),
                files.len(),
                dir.display()
            )?;
        }
        None => {
            let mut stream = manifest::serialize_bundle(&plan.bundle);
            for (_, text) in &files {
                stream.push_str("---\n");
                stream.push_str(text);
            }
            out.write_all(stream.as_bytes())?;
        }
    }
    Ok(EXIT_OK)
}

fn terminate(args: TerminateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let options = TerminationOptions {
        last_component: args.last,
    };
    let plan = plan::plan_termination(&args.instance, &args.model, options)?;
    let text = plan.to_yaml();
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join("termination.yaml");
            write_file(&path, &text)?;
            writeln!(err, "wrote {}", path.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn scale_out(args: ScaleOutArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let version = match args.version {
        Some(v) => v,
        None => parser::parse_file(&args.model)?.app_version,
    };
    let inputs = DeployInputs {
        registry_token_b64: resolve_token(&args.token)?,
        version,
        external_ips: args.resources.external_ips,
        cluster_id: args.cluster,
        gpus: args.resources.gpus,
    };
    let mut rng = match args.seed {
        Some(seed) => ChaCha8Rng::seed_from_u64(seed),
        None => ChaCha8Rng::from_entropy(),
    };
    let plan = plan::plan_scale_out(&args.instance, &args.model, &inputs, &mut rng)?;
    match &args.output.out {
        Some(dir) => {
            let n = write_bundle_files(dir, &plan.bundle)?;
            writeln!(
                err,
                "replica {} on {}: wrote {n} manifests to {}",
                plan.replica,
                plan.target_cluster,
                dir.display()
            )?;
        }
        None => out.write_all(manifest::serialize_bundle(&plan.bundle).as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn validate(args: ValidateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    match parser::parse_file(&args.model) {
        Ok(m) => {
            writeln!(
                out,
                "{}: valid ({} components, {} workflows)",
                args.model.display(),
                m.components.len(),
                m.workflows.len()
            )?;
            Ok(EXIT_OK)
        }
        Err(ParseError::Validation(report)) => {
            for v in &report.violations {
                writeln!(out, "{v}")?;
            }
            Ok(EXIT_FAILURE)
        }
        Err(e) => Err(e.into()),
    }
}
