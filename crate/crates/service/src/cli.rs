//! The `texmath` command line: local or remote conversion, and the servers.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use texmath::diag::{Diagnostic, Severity};
use texmath::pipeline::{
    convert_document, load_profile, log_to_json_lines, read_profile_file, DirResolver, OutputFormat, Profile, ProfileError,
    ProfileOptions, Status, VERSION,
};

use crate::client::{ClientError, RemoteClient};
use crate::config::{read_config_file, ServiceConfig};
use crate::envelope::{ConvertRequest, ResponseStatus};
use crate::server::{serve, AppState, Role};

/// Process exit codes, following the sysexits convention where one applies.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// Warnings were logged and `--strict` was given.
    pub const WARNINGS: i32 = 1;
    /// At least one input failed to convert.
    pub const FAILED: i32 = 2;
    pub const USAGE: i32 = 64;
    pub const NO_INPUT: i32 = 66;
    pub const UNAVAILABLE: i32 = 69;
    pub const SOFTWARE: i32 = 70;
    pub const CANT_CREATE: i32 = 73;
    pub const CONFIG: i32 = 78;
}

/// Client settings file looked up in the working directory, then in `$HOME`.
pub const CONFIG_FILE_NAME: &str = ".texmath.conf";

#[derive(Debug, Parser)]
#[command(name = "texmath", version = VERSION, about = "Convert LaTeX math to MathML", args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert files (or standard input) and write the result.
    Convert(ConvertArgs),
    /// Run the batch and live servers.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Input files; none or `-` reads standard input.
    pub inputs: Vec<PathBuf>,
    /// Profile name or profile file.
    #[arg(short, long)]
    pub profile: Option<String>,
    /// Output format: mathml, pmml, cmml or html.
    #[arg(short = 't', long)]
    pub to: Option<String>,
    /// Comma-separated fixtures to preload.
    #[arg(long)]
    pub preload: Option<String>,
    /// Override a profile option; repeatable, later values win.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output file, or a directory when several inputs are given.
    #[arg(short = 'o', long)]
    pub dest: Option<PathBuf>,
    /// Write the log as JSON lines to this file instead of stderr.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Exit with status 1 when any warning is logged.
    #[arg(long)]
    pub strict: bool,
    /// Convert on a running server instead of locally.
    #[arg(long, env = "TEXMATH_SERVER")]
    pub server: Option<String>,
    /// Settings file; defaults to .texmath.conf in the working or home directory.
    #[arg(long, env = "TEXMATH_CONFIG")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, value_enum, default_value = "both")]
    pub role: Role,
    #[arg(long)]
    pub batch_addr: Option<String>,
    #[arg(long)]
    pub live_addr: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
    #[arg(long)]
    pub max_body: Option<String>,
    #[arg(long)]
    pub recycle_after: Option<String>,
    /// A name<TAB>source file replacing the shipped examples.
    #[arg(long)]
    pub examples: Option<PathBuf>,
    /// Directory of *.profile files to register.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    /// Service settings file (key = value).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub struct Io<'a> {
    pub stdin: &'a mut dyn Read,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let (mut stdin, mut stdout, mut stderr) = (std::io::stdin().lock(), std::io::stdout().lock(), std::io::stderr().lock());
    run(std::env::args_os(), &mut Io { stdin: &mut stdin, stdout: &mut stdout, stderr: &mut stderr })
}

pub fn run<I, T>(args: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::SUCCESS };
            let out: &mut dyn Write = if e.use_stderr() { io.stderr } else { io.stdout };
            let _ = write!(out, "{}", e.render());
            return code;
        }
    };
    match cli.command {
        Command::Convert(args) => run_convert(args, io),
        Command::Serve(args) => run_serve(args, io),
    }
}

macro_rules! fail {
    ($io:expr, $code:expr, $($fmt:tt)*) => {{
        let _ = writeln!($io.stderr, "texmath: {}", format!($($fmt)*));
        return $code;
    }};
}

/// Settings after layering the config file under the command line.
#[derive(Debug, Default)]
struct Settings {
    profile: String,
    overrides: ProfileOptions,
    server: Option<String>,
    strict: bool,
    log: Option<PathBuf>,
}

fn discover_config() -> Option<PathBuf> {
    let cwd = std::env::current_dir().ok().map(|d| d.join(CONFIG_FILE_NAME));
    let home = std::env::var_os("HOME").map(|h| PathBuf::from(h).join(CONFIG_FILE_NAME));
    cwd.into_iter().chain(home).find(|p| p.is_file())
}

fn split_pair(s: &str) -> Option<(&str, &str)> {
    s.split_once('=').map(|(k, v)| (k.trim(), v.trim())).filter(|(k, _)| !k.is_empty())
}

/// Config file keys: `profile`, `to`, `preload`, `server`, `strict`, `log`
/// and `set.<option>`. Command-line values override them.
fn settings(args: &ConvertArgs) -> Result<Settings, (i32, String)> {
    let file = match &args.config {
        Some(p) if !p.is_file() => return Err((exit::NO_INPUT, format!("config file {} not found", p.display()))),
        Some(p) => Some(p.clone()),
        None => discover_config(),
    };
    let conf = match &file {
        Some(p) => read_config_file(p).map_err(|e| (exit::CONFIG, e.to_string()))?,
        None => BTreeMap::new(),
    };
    let mut s = Settings { profile: "math".into(), ..Default::default() };
    for (k, v) in &conf {
        match k.as_str() {
            "profile" => s.profile = v.clone(),
            "server" => s.server = Some(v.clone()),
            "log" => s.log = Some(PathBuf::from(v)),
            "strict" => s.strict = v.parse().map_err(|_| (exit::CONFIG, format!("config strict: expected true or false, got {v:?}")))?,
            "to" => {
                s.overrides.set("format", v.clone());
            }
            "preload" => {
                s.overrides.set("preload", v.clone());
            }
            _ => match k.strip_prefix("set.") {
                Some(opt) => {
                    s.overrides.set(opt, v.clone());
                }
                None => return Err((exit::CONFIG, format!("config: unknown key {k:?}"))),
            },
        }
    }
    for pair in &args.set {
        let (k, v) = split_pair(pair).ok_or_else(|| (exit::USAGE, format!("--set expects KEY=VALUE, got {pair:?}")))?;
        s.overrides.set(k, v);
    }
    if let Some(to) = &args.to {
        s.overrides.set("format", to.clone());
    }
    if let Some(p) = &args.preload {
        s.overrides.set("preload", p.clone());
    }
    if let Some(p) = &args.profile {
        s.profile = p.clone();
    }
    if args.server.is_some() {
        s.server = args.server.clone();
    }
    if args.log.is_some() {
        s.log = args.log.clone();
    }
    s.strict |= args.strict;
    Ok(s)
}

struct Input {
    name: String,
    path: Option<PathBuf>,
    source: String,
}

fn read_inputs(paths: &[PathBuf], stdin: &mut dyn Read) -> Result<Vec<Input>, (i32, String)> {
    if paths.is_empty() || paths == [PathBuf::from("-")] {
        let mut source = String::new();
        stdin.read_to_string(&mut source).map_err(|e| (exit::NO_INPUT, format!("standard input: {e}")))?;
        return Ok(vec![Input { name: "stdin".into(), path: None, source }]);
    }
    paths
        .iter()
        .map(|p| {
            let bytes = std::fs::read(p).map_err(|e| (exit::NO_INPUT, format!("{}: {e}", p.display())))?;
            let source = String::from_utf8(bytes).map_err(|_| (exit::NO_INPUT, format!("{}: not UTF-8 text", p.display())))?;
            Ok(Input { name: p.display().to_string(), path: Some(p.clone()), source })
        })
        .collect()
}

/// One converted input, however it was produced.
struct Outcome {
    status: Status,
    output: String,
    log: Vec<Diagnostic>,
    version: String,
}

fn profile_exit(e: &ProfileError) -> i32 {
    match e {
        ProfileError::Io { .. } => exit::NO_INPUT,
        _ => exit::USAGE,
    }
}

/// Run `f` over `items` on a bounded set of scoped threads, keeping order.
fn fan_out<T: Sync, R: Send>(items: &[T], f: impl Fn(usize, &T) -> R + Sync) -> Vec<R> {
    let width = std::thread::available_parallelism().map_or(4, |n| n.get() * 2);
    let mut out = Vec::with_capacity(items.len());
    for (c, chunk) in items.chunks(width).enumerate() {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .enumerate()
                .map(|(i, item)| {
                    let f = &f;
                    std::thread::Builder::new()
                        .stack_size(32 << 20)
                        .spawn_scoped(scope, move || f(c * width + i, item))
                        .expect("spawn conversion thread")
                })
                .collect();
            out.extend(handles.into_iter().map(|h| h.join().expect("conversion threads do not panic")));
        });
    }
    out
}

fn convert_local(inputs: &[Input], profile: &Profile) -> Vec<Outcome> {
    fan_out(inputs, |_, input| {
        let dir = input.path.as_deref().and_then(Path::parent).map_or_else(|| PathBuf::from("."), Path::to_path_buf);
        let resolver = DirResolver::new(if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir });
        let r = convert_document(&input.source, &input.name, profile, Some(&resolver));
        Outcome { status: r.status, output: r.output, log: r.log, version: r.version }
    })
}

/// Profile name and options to send; profile files are expanded locally.
fn remote_profile(s: &Settings) -> Result<(String, ProfileOptions), (i32, String)> {
    let path = Path::new(&s.profile);
    if !path.is_file() {
        return Ok((s.profile.clone(), s.overrides.clone()));
    }
    let mut opts = read_profile_file(path).map_err(|e| (profile_exit(&e), e.to_string()))?;
    opts.0.remove("name");
    Ok(("math".into(), opts.merge(&s.overrides)))
}

fn convert_remote(inputs: &[Input], s: &Settings, server: &str) -> Result<Vec<Outcome>, (i32, String)> {
    let client = RemoteClient::new(server).map_err(|e| (exit::UNAVAILABLE, e.to_string()))?;
    let (profile, options) = remote_profile(s)?;
    let results = fan_out(inputs, |i, input| {
        let req = ConvertRequest {
            id: i.into(),
            source: Some(input.source.clone()),
            profile: Some(profile.clone()),
            options: options.clone(),
            ..Default::default()
        };
        let r = client.convert(&req)?;
        let status = match r.status {
            ResponseStatus::Success => Status::Success,
            ResponseStatus::SuccessWithWarnings => Status::SuccessWithWarnings,
            _ => Status::Failed,
        };
        Ok::<_, ClientError>(Outcome { status, output: r.result, log: r.log, version: r.version })
    });
    results
        .into_iter()
        .map(|r| {
            r.map_err(|e| match &e {
                ClientError::Unreachable { .. } => (exit::UNAVAILABLE, e.to_string()),
                ClientError::Rejected { status: 400 | 422, .. } => (exit::USAGE, e.to_string()),
                ClientError::Rejected { status: 413, .. } => (exit::FAILED, e.to_string()),
                _ => (exit::SOFTWARE, e.to_string()),
            })
        })
        .collect()
}

fn output_extension(s: &Settings) -> &'static str {
    let explicit = s.overrides.get("format").and_then(|f| f.parse::<OutputFormat>().ok());
    let from_profile = || load_profile(&s.profile, &ProfileOptions::new()).ok().map(|p| p.format);
    explicit.or_else(from_profile).unwrap_or(OutputFormat::MathmlParallel).extension()
}

fn describe(d: &Diagnostic, name: &str) -> String {
    let severity = match d.severity {
        Severity::Info => "info",
        Severity::Warning => "warning",
        Severity::Error => "error",
        Severity::Fatal => "fatal",
    };
    match &d.locator {
        Some(l) => format!("{}:{}:{}: {severity}: {} [{}]", l.source, l.line, l.column, d.message, d.category),
        None => format!("{name}: {severity}: {} [{}]", d.message, d.category),
    }
}

fn run_convert(args: ConvertArgs, io: &mut Io<'_>) -> i32 {
    let s = match settings(&args) {
        Ok(s) => s,
        Err((code, msg)) => fail!(io, code, "{msg}"),
    };
    let inputs = match read_inputs(&args.inputs, io.stdin) {
        Ok(i) => i,
        Err((code, msg)) => fail!(io, code, "{msg}"),
    };
    let outcomes = match &s.server {
        Some(server) => match convert_remote(&inputs, &s, server) {
            Ok(o) => o,
            Err((code, msg)) => fail!(io, code, "{msg}"),
        },
        None => {
            let profile = match load_profile(&s.profile, &s.overrides) {
                Ok(p) => p,
                Err(e) => fail!(io, profile_exit(&e), "{e}"),
            };
            convert_local(&inputs, &profile)
        }
    };

    let mut json_log = String::new();
    for (input, out) in inputs.iter().zip(&outcomes) {
        if s.log.is_some() {
            json_log.push_str(&log_to_json_lines(&out.log, &out.version));
        } else {
            for d in &out.log {
                let _ = writeln!(io.stderr, "{}", describe(d, &input.name));
            }
        }
    }
    if let Some(path) = &s.log {
        if let Err(e) = std::fs::write(path, json_log) {
            fail!(io, exit::CANT_CREATE, "{}: {e}", path.display());
        }
    }

    let multi = inputs.len() > 1;
    match &args.dest {
        Some(dir) if multi => {
            if let Err(e) = std::fs::create_dir_all(dir) {
                fail!(io, exit::CANT_CREATE, "{}: {e}", dir.display());
            }
            let ext = output_extension(&s);
            for (input, out) in inputs.iter().zip(&outcomes) {
                if out.status == Status::Failed {
                    continue;
                }
                let stem = input.path.as_deref().and_then(Path::file_stem).map_or_else(|| "stdin".into(), |s| s.to_string_lossy().into_owned());
                let target = dir.join(format!("{stem}.{ext}"));
                if let Err(e) = std::fs::write(&target, &out.output) {
                    fail!(io, exit::CANT_CREATE, "{}: {e}", target.display());
                }
            }
        }
        Some(file) => {
            if outcomes[0].status != Status::Failed {
                if let Err(e) = std::fs::write(file, &outcomes[0].output) {
                    fail!(io, exit::CANT_CREATE, "{}: {e}", file.display());
                }
            }
        }
        None => {
            for out in outcomes.iter().filter(|o| o.status != Status::Failed) {
                let _ = io.stdout.write_all(out.output.as_bytes());
                if !out.output.ends_with('\n') {
                    let _ = io.stdout.write_all(b"\n");
                }
            }
            let _ = io.stdout.flush();
        }
    }

    outcomes
        .iter()
        .map(|o| match o.status {
            Status::Failed => exit::FAILED,
            Status::SuccessWithWarnings if s.strict => exit::WARNINGS,
            _ => exit::SUCCESS,
        })
        .max()
        .unwrap_or(exit::SUCCESS)
}

fn serve_config(args: &ServeArgs) -> Result<ServiceConfig, (i32, String)> {
    let mut config = ServiceConfig::default();
    if let Some(p) = &args.config {
        let file = read_config_file(p).map_err(|e| (exit::CONFIG, e.to_string()))?;
        config.apply(&file).map_err(|e| (exit::CONFIG, e.to_string()))?;
    }
    let env = ServiceConfig::env_settings(|k| std::env::var(k).ok());
    config.apply(&env).map_err(|e| (exit::CONFIG, e.to_string()))?;
    let flags = [
        ("batch-addr", args.batch_addr.clone()),
        ("live-addr", args.live_addr.clone()),
        ("workers", args.workers.clone()),
        ("max-body", args.max_body.clone()),
        ("recycle-after", args.recycle_after.clone()),
        ("examples", args.examples.as_ref().map(|p| p.display().to_string())),
        ("profiles", args.profiles.as_ref().map(|p| p.display().to_string())),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            config.set(k, &v).map_err(|e| (exit::USAGE, e.to_string()))?;
        }
    }
    Ok(config)
}

fn run_serve(args: ServeArgs, io: &mut Io<'_>) -> i32 {
    let config = match serve_config(&args) {
        Ok(c) => c,
        Err((code, msg)) => fail!(io, code, "{msg}"),
    };
    let state = match AppState::new(config) {
        Ok(s) => s,
        Err(e) => fail!(io, exit::CONFIG, "{e}"),
    };
    let runtime = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(r) => r,
        Err(e) => fail!(io, exit::SOFTWARE, "{e}"),
    };
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    match runtime.block_on(serve(state, args.role, shutdown)) {
        Ok(()) => exit::SUCCESS,
        Err(e) => fail!(io, exit::UNAVAILABLE, "{e}"),
    }
}
