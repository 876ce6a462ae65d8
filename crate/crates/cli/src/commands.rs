use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;
use tunespace::bench::ProblemDoc;
use tunespace::synth::parse_count;
use tunespace_client::api::*;
use tunespace_client::{Client, ClientError};
use tunespace_service::{serve_until, AppState, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "tunespace", version, about = "Build, check and benchmark constrained auto-tuning search spaces")]
pub struct Cli {
    /// Use a running service, e.g. http://127.0.0.1:8080, instead of an in-process one.
    #[arg(long, global = true, value_name = "URL")]
    server: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SolverFlags {
    /// Skip sum/product domain pruning before the search.
    #[arg(long)]
    no_preprocess: bool,
    /// Only check constraints once their whole scope is bound.
    #[arg(long)]
    no_partial_checks: bool,
}

impl SolverFlags {
    fn options(&self) -> Options {
        Options {
            preprocess: !self.no_preprocess,
            partial_checks: !self.no_partial_checks,
        }
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct SuiteArgs {
    /// Directory of problem files; each `*.json` is one space named after its file stem.
    #[arg(long, value_name = "DIR")]
    suite: Option<PathBuf>,
    /// Synthetic grid such as `d=2,3;s=1e4,1e5;m=2,4`; omitted keys use the default grid.
    #[arg(long, value_name = "SPEC")]
    grid: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the HTTP service in the foreground.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        #[arg(long, default_value_t = 64)]
        max_spaces: usize,
    },
    /// Enumerate every valid configuration of a problem file.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// Write the space here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        /// rows, columns or maps.
        #[arg(long, default_value = "rows")]
        format: ExportFormat,
        /// Print only the number of valid configurations.
        #[arg(long)]
        count_only: bool,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Write a seeded synthetic problem file.
    Generate {
        /// Target Cartesian size; `1e6` notation is accepted.
        #[arg(long, value_parser = count)]
        size: u64,
        #[arg(long)]
        dims: usize,
        #[arg(long)]
        constraints: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Time the optimized solver against brute-force enumeration.
    Bench {
        #[command(flatten)]
        suite: SuiteArgs,
        #[arg(long, value_delimiter = ',', default_value = "optimized,bruteforce")]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// solve or solve+index.
        #[arg(long, default_value = "solve+index")]
        time_boundary: TimeBoundary,
        /// JSON report path.
        #[arg(long)]
        output: PathBuf,
        /// CSV report path; defaults to the JSON path with a `.csv` extension.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Check a problem file and cross-check the solver against brute force.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Print size statistics for a problem file or a counts file.
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
}

fn count(s: &str) -> Result<u64, String> {
    parse_count(s).ok_or_else(|| format!("`{s}` is not a count"))
}

/// Exit status 2 for usage, schema and I/O problems, 1 for a problem that
/// loads but fails to solve or disagrees with the oracle.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Invalid(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Invalid(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Invalid(m) => f.write_str(m),
        }
    }
}

fn describe(d: &Difference) -> String {
    let values: Vec<String> = d.configuration.iter().map(|v| v.to_string()).collect();
    format!("only {}: ({})", label(&d.only_in), values.join(", "))
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        let mut message = e.to_string();
        if let ClientError::Api { body, .. } = &e {
            for d in &body.differences {
                message.push_str("\n  ");
                message.push_str(&describe(d));
            }
        }
        match e.kind() {
            Some(ErrorKind::Evaluation | ErrorKind::Validation) => Failure::Invalid(message),
            _ => Failure::Usage(message),
        }
    }
}

/// Serialized name of a unit enum variant, e.g. `pass`.
fn label<T: serde::Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: invalid JSON: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("writing {}: {e}", path.display())))
}

struct Connection {
    client: Client,
    embedded: Option<(oneshot::Sender<()>, JoinHandle<std::io::Result<()>>)>,
}

impl Connection {
    async fn open(server: Option<String>) -> Result<Self, Failure> {
        if let Some(url) = server {
            return Ok(Connection {
                client: Client::new(url),
                embedded: None,
            });
        }
        let io = |e: std::io::Error| Failure::Usage(format!("starting the in-process service: {e}"));
        let listener = TcpListener::bind("127.0.0.1:0").await.map_err(io)?;
        let addr = listener.local_addr().map_err(io)?;
        let (stop, stopped) = oneshot::channel::<()>();
        let task = tokio::spawn(serve_until(listener, AppState::default(), async {
            let _ = stopped.await;
        }));
        Ok(Connection {
            client: Client::new(format!("http://{addr}")),
            embedded: Some((stop, task)),
        })
    }

    async fn close(self) {
        if let Some((stop, task)) = self.embedded {
            let _ = stop.send(());
            let _ = task.await;
        }
    }
}

pub async fn run(cli: Cli) -> Result<(), Failure> {
    if let Command::Serve { addr, max_spaces } = &cli.command {
        if cli.server.is_some() {
            return Err(Failure::Usage("--server cannot be used with serve".into()));
        }
        return serve(addr, *max_spaces).await;
    }
    let connection = Connection::open(cli.server).await?;
    let result = dispatch(&connection.client, cli.command).await;
    connection.close().await;
    result
}

async fn serve(addr: &str, max_spaces: usize) -> Result<(), Failure> {
    use tracing_subscriber::EnvFilter;
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let io = |e: std::io::Error| Failure::Usage(format!("binding {addr}: {e}"));
    let listener = TcpListener::bind(addr).await.map_err(io)?;
    let local = listener.local_addr().map_err(io)?;
    println!("listening on http://{local}");
    let _ = std::io::stdout().flush();
    let config = ServiceConfig {
        max_spaces,
        ..ServiceConfig::default()
    };
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    serve_until(listener, AppState::new(config), shutdown)
        .await
        .map_err(|e| Failure::Usage(format!("service stopped: {e}")))
}

async fn dispatch(client: &Client, command: Command) -> Result<(), Failure> {
    match command {
        Command::Serve { .. } => unreachable!("handled before connecting"),
        Command::Solve {
            input,
            output,
            format,
            count_only,
            solver,
        } => {
            let request = SolveRequest {
                problem: read_json(&input)?,
                options: solver.options(),
                format,
                count_only,
            };
            let solved = client.solve(&request).await?;
            if count_only {
                println!("{}", solved.valid_count);
                return Ok(());
            }
            let text = serde_json::to_string(&solved.space.unwrap_or_default()).expect("serializable") + "\n";
            match output {
                Some(path) => {
                    write_file(&path, &text)?;
                    eprintln!("{} configurations written to {}", solved.valid_count, path.display());
                }
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Generate {
            size,
            dims,
            constraints,
            seed,
            output,
        } => {
            let spec = SyntheticSpec {
                size,
                dims,
                constraints,
                seed,
            };
            let doc = client.generate(&spec).await?;
            let doc = ProblemDoc::parse(&doc.to_string())
                .map_err(|e| Failure::Usage(format!("service returned a malformed problem: {e}")))?;
            write_file(&output, &doc.to_json_string())
        }
        Command::Bench {
            suite,
            methods,
            reps,
            seed,
            time_boundary,
            output,
            csv,
            solver,
        } => {
            let csv = csv.unwrap_or_else(|| output.with_extension("csv"));
            if csv == output {
                return Err(Failure::Usage("the CSV and JSON reports need different paths".into()));
            }
            let suite = match (suite.suite, suite.grid) {
                (Some(dir), _) => Suite::Problems(suite_dir(&dir)?),
                (None, Some(grid)) => Suite::Grid(grid),
                (None, None) => unreachable!("clap requires one of --suite and --grid"),
            };
            let request = BenchRequest {
                suite,
                methods,
                repetitions: reps,
                seed,
                time_boundary,
                options: solver.options(),
                oracle_limit: None,
            };
            let report = client.bench(&request).await?;
            write_file(&output, &report.to_json_string())?;
            write_file(&csv, &report.to_csv())?;
            let a = &report.aggregates;
            let show = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.6}"));
            println!("spaces: {}", a.spaces);
            println!("optimized_seconds: {}", show(a.optimized_seconds));
            println!("bruteforce_seconds: {}", show(a.bruteforce_seconds));
            println!("speedup: {}", show(a.speedup));
            println!("loglog_slope: {}", show(a.loglog_slope));
            println!("validated: {}", a.validated);
            Ok(())
        }
        Command::Validate { input, solver } => {
            let request = ValidateRequest {
                problem: read_json(&input)?,
                options: solver.options(),
            };
            let r = client.validate(&request).await?;
            println!("parameters: {}", r.parameters);
            println!("constraints: {}", r.constraints);
            println!("cartesian_size: {}", r.cartesian_size);
            println!("valid_count: {}", r.valid_count);
            println!("oracle: {}", label(&r.oracle));
            if r.oracle == Validation::Fail {
                let shown: Vec<String> = r.differences.iter().map(describe).collect();
                return Err(Failure::Invalid(format!(
                    "solver and brute force disagree:\n  {}",
                    shown.join("\n  ")
                )));
            }
            Ok(())
        }
        Command::Stats { input, solver } => {
            let request = StatsRequest {
                input: read_json(&input)?,
                options: solver.options(),
            };
            let r = client.stats(&request).await?;
            println!("{}", r.stats);
            match r.avg_constraint_evaluations {
                Some(avg) => println!("avg_constraint_evaluations: {avg}"),
                None => println!("avg_constraint_evaluations: n/a"),
            }
            Ok(())
        }
    }
}

fn suite_dir(dir: &Path) -> Result<Vec<SuiteEntry>, Failure> {
    let listing = std::fs::read_dir(dir).map_err(|e| Failure::Usage(format!("reading {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = listing
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::Usage(format!("no .json problem files in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            Ok(SuiteEntry {
                id: p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                problem: read_json(p)?,
            })
        })
        .collect()
}
