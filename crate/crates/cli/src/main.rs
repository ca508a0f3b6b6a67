//! `sdreal`: command-line front end. Every subcommand except `serve` is a
//! request to the service, either the one named by `--server` or an
//! embedded one started for the duration of the command.

use std::net::SocketAddr;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sdreal_client::*;

#[derive(Parser)]
#[command(name = "sdreal", version, about = "Exact real arithmetic on signed-digit streams")]
struct Cli {
    /// Base URL of a running service. Without it an embedded service is used.
    #[arg(long, global = true, env = "EXACTREAL_SERVER")]
    server: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Point {
    /// Rational argument in [-1, 1], e.g. 1/3, -0.25
    #[arg(long, allow_hyphen_values = true)]
    at: String,
}

fn option() -> clap::builder::RangedI64ValueParser<u32> {
    clap::value_parser!(u32).range(1..=MAX_OPTION as i64)
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate EXPR at a rational to within 2^-prec
    Eval {
        expr: String,
        #[command(flatten)]
        point: Point,
        #[arg(long, value_parser = option())]
        prec: u32,
        /// Also print a decimal with this many places
        #[arg(long, value_parser = option())]
        decimal: Option<u32>,
    },
    /// Print the first output digits of EXPR at a rational
    Digits {
        expr: String,
        #[command(flatten)]
        point: Point,
        #[arg(long, value_parser = option())]
        count: u32,
    },
    /// Integrate EXPR over [-1, 1] to within 2^(1-prec)
    Integrate {
        expr: String,
        #[arg(long, value_parser = option())]
        prec: u32,
    },
    /// Render the tree of EXPR to a depth
    Tree {
        expr: String,
        #[arg(long)]
        depth: u32,
        /// Graphviz output instead of indented text
        #[arg(long)]
        dot: bool,
    },
    /// Evaluate repeatedly, reporting time and new expansions per run
    Bench {
        expr: String,
        #[command(flatten)]
        point: Point,
        #[arg(long, value_parser = option())]
        prec: u32,
        #[arg(long, value_parser = option(), default_value_t = 2)]
        repeat: u32,
    },
    /// Iterate logistic(2) from 7/10 in binary64 and exactly
    FloatDemo,
    /// Run the service
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
    },
}

const USER_ERROR: u8 = 2;
const RESOURCE_LIMIT: u8 = 3;

fn exit_code(e: &ClientError) -> ExitCode {
    match e.kind() {
        Some(ErrorKind::ResourceLimit) => ExitCode::from(RESOURCE_LIMIT),
        Some(k) if k.is_user_error() => ExitCode::from(USER_ERROR),
        _ => ExitCode::FAILURE,
    }
}

fn report(e: &ClientError) {
    match e {
        ClientError::Api(b) => eprintln!("error ({}): {}", kind_name(b.kind), b.message),
        other => eprintln!("error: {other}"),
    }
}

fn kind_name(k: ErrorKind) -> &'static str {
    match k {
        ErrorKind::Syntax => "syntax",
        ErrorKind::Range => "range",
        ErrorKind::Domain => "domain",
        ErrorKind::Arity => "arity",
        ErrorKind::BadRequest => "bad request",
        ErrorKind::ResourceLimit => "resource limit",
        ErrorKind::Internal => "internal",
    }
}

async fn run(client: &Client, command: Command) -> Result<String> {
    Ok(match command {
        Command::Eval { expr, point, prec, decimal } => {
            let r = client.eval(&EvalRequest { expr, at: point.at, prec, decimal }).await?;
            match r.decimal {
                Some(d) => format!("{}\n{d} ±2^-{}\n", r.value, r.prec),
                None => format!("{}\n", r.value),
            }
        }
        Command::Digits { expr, point, count } => {
            let r = client.digits(&DigitsRequest { expr, at: point.at, count }).await?;
            format!("{}\n", r.digits)
        }
        Command::Integrate { expr, prec } => {
            let r = client.integrate(&IntegrateRequest { expr, prec }).await?;
            let e = 1 - prec as i64;
            format!("value {}\nbound 2^{e} = {}\nnodes {}\n", r.value, r.error_bound, r.nodes_visited)
        }
        Command::Tree { expr, depth, dot } => {
            let format = if dot { TreeFormat::Dot } else { TreeFormat::Ascii };
            client.tree(&TreeRequest { expr, depth, format }).await?.render
        }
        Command::Bench { expr, point, prec, repeat } => {
            let r = client.bench(&BenchRequest { expr, at: point.at, prec, repeat }).await?;
            let mut out = format!("value {}\n", r.value);
            for (i, run) in r.runs.iter().enumerate() {
                let ms = run.wall_micros as f64 / 1000.0;
                out += &format!("run {}: {ms:.3} ms, {} expansions\n", i + 1, run.expansions);
            }
            out
        }
        Command::FloatDemo => {
            let r = client.float_demo().await?;
            format!(
                "logistic(2) iterated {} times from {}\nfloat (binary64, unverified): {:?}\nexact (±2^-{}): {}\n{}\n",
                r.iterations, r.start, r.float, r.exact_prec, r.exact_decimal, r.exact
            )
        }
        Command::Serve { .. } => unreachable!("handled before connecting"),
    })
}

async fn serve(listen: SocketAddr) -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let listener = match tokio::net::TcpListener::bind(listen).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot listen on {listen}: {e}");
            return ExitCode::FAILURE;
        }
    };
    if let Ok(addr) = listener.local_addr() {
        eprintln!("listening on http://{addr}");
    }
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    match sdreal_server::serve(listener, sdreal_server::AppState::new(), shutdown).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Serve { listen } = cli.command {
        return serve(listen).await;
    }
    let base = match cli.server {
        Some(url) => url,
        None => match sdreal_server::spawn(([127, 0, 0, 1], 0).into()).await {
            Ok(addr) => format!("http://{addr}"),
            Err(e) => {
                eprintln!("error: cannot start embedded service: {e}");
                return ExitCode::FAILURE;
            }
        },
    };
    let client = match Client::new(&base) {
        Ok(c) => c,
        Err(e) => {
            report(&e);
            return ExitCode::from(USER_ERROR);
        }
    };
    match run(&client, cli.command).await {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            report(&e);
            exit_code(&e)
        }
    }
}
