//! `fracrev`: analyze continuous-time quantum walks on graphs from the shell.
//!
//! Exit codes: 0 success, 1 other errors, 2 parse or input errors,
//! 3 numerical-health failure, 4 suite failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracrev::exec::Execution;
use fracrev::graph::{parse_graph_spec, write_graph, GraphError, Vertex, WeightedGraph};
use fracrev::report::{
    analyze, analyze_quotient, round_sig, AnalyzeOptions, CertificateRecord, Predicate, RunReport,
};
use fracrev::suite::{run_suite, Group};
use fracrev::spectral::SpectralDecomposition;
use fracrev::walk::{scan_fr, DetectionConfig, WalkError};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fracrev", version, about = "Fractional revival, state transfer and periodicity in quantum walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify every vertex pair of a graph.
    Analyze {
        graph: String,
        /// Also grid-scan from every vertex.
        #[arg(long)]
        scan: bool,
        /// Only pairs containing this vertex (label or index).
        #[arg(long)]
        from: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Grid-scan for revival from one vertex.
    Scan {
        graph: String,
        #[arg(long, default_value = "0")]
        from: String,
        /// Restrict to revival towards this vertex.
        #[arg(long)]
        to: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Quotient by the coarsest equitable partition with the pinned vertices as singletons.
    Quotient {
        graph: String,
        #[arg(long = "pin", required = true)]
        pins: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Build a graph from an expression and save it in the graph file format.
    Construct {
        graph: String,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the reproduction suite.
    PaperSuite {
        #[arg(long)]
        only: Option<Group>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Scan horizon.
    #[arg(long)]
    tmax: Option<f64>,
    /// Walk tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Scan grid points.
    #[arg(long)]
    grid: Option<usize>,
    /// Write the JSON report here and print a table to stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write certificates as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Disable data parallelism.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn config(&self) -> DetectionConfig {
        let mut cfg = DetectionConfig::default();
        if let Some(t) = self.tmax {
            cfg.t_max = t;
        }
        if let Some(t) = self.tol {
            cfg.tol_walk = t;
        }
        if let Some(g) = self.grid {
            cfg.grid_points = g;
        }
        if self.sequential {
            cfg.execution = Execution::Sequential;
        }
        cfg
    }
}

enum Failure {
    Parse(String),
    Health(String),
    Suite,
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Health(_) => 3,
            Failure::Suite => 4,
        }
    }
}

impl From<WalkError> for Failure {
    fn from(e: WalkError) -> Self {
        match e {
            WalkError::NumericalHealth { .. } => Failure::Health(e.to_string()),
            WalkError::Graph(GraphError::UnknownVertex(_)) | WalkError::InvalidConfig(_) => {
                Failure::Parse(e.to_string())
            }
            e => Failure::Other(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Other(format!("{}: {e}", path.display()))
}

fn load(spec: &str) -> Result<WeightedGraph, Failure> {
    parse_graph_spec(spec).map_err(|e| Failure::Parse(format!("{spec}: {e}")))
}

fn vertex(g: &WeightedGraph, name: &str) -> Result<Vertex, Failure> {
    g.vertex(name).map_err(|e| Failure::Parse(e.to_string()))
}

/// Flat certificate row for CSV output.
#[derive(Serialize)]
struct CsvRow<'a> {
    graph: &'a str,
    a: Vertex,
    b: Vertex,
    tau: f64,
    alpha_re: f64,
    alpha_im: f64,
    beta_re: f64,
    beta_im: f64,
    gamma: Option<f64>,
    zeta: Option<f64>,
    kind: &'static str,
    residual: f64,
    method: &'static str,
}

fn write_csv(path: &Path, certs: &[CertificateRecord]) -> Result<(), Failure> {
    let csv_err = |e: csv::Error| Failure::Other(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for c in certs {
        w.serialize(CsvRow {
            graph: &c.graph,
            a: c.a,
            b: c.b,
            tau: c.tau,
            alpha_re: c.alpha[0],
            alpha_im: c.alpha[1],
            beta_re: c.beta[0],
            beta_im: c.beta[1],
            gamma: c.gamma,
            zeta: c.zeta,
            kind: c.kind.as_str(),
            residual: c.residual,
            method: c.method.as_str(),
        })
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

fn print_table(report: &RunReport, g: &WeightedGraph) {
    println!("{}", report.input_spec);
    if report.certificates.is_empty() {
        println!("  no certificates");
    }
    for c in &report.certificates {
        let angle = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6}"));
        let name = |v: Vertex| if c.graph == report.input_spec { g.label(v).to_string() } else { v.to_string() };
        println!(
            "  {:<22} {:>6} -> {:<6} tau {:>10.6}  alpha {:>9.6}{:+.6}i  beta {:>9.6}{:+.6}i  gamma {:>9}  zeta {:>9}  [{}]",
            c.kind.as_str(),
            name(c.a),
            name(c.b),
            c.tau,
            c.alpha[0],
            c.alpha[1],
            c.beta[0],
            c.beta[1],
            angle(c.gamma),
            angle(c.zeta),
            c.graph
        );
    }
    for (k, p) in &report.predicates {
        print_predicate(k, p);
    }
}

fn print_predicate(name: &str, p: &Predicate) {
    // an unclassifiable pair is a finding, not a failed check
    let mark = match (name.starts_with("pair."), p.holds) {
        (_, true) => "ok  ",
        (true, false) => "no  ",
        (false, false) => "FAIL",
    };
    println!(
        "  {mark} {name}{}{}",
        p.residual.map_or(String::new(), |r| format!(" ({r:.6e})")),
        p.detail.as_deref().map_or(String::new(), |d| format!(": {d}"))
    );
}

/// Writes or prints the report, then maps failing health predicates to exit 3.
fn emit(report: &RunReport, g: &WeightedGraph, common: &Common) -> Result<(), Failure> {
    if let Some(path) = &common.csv {
        write_csv(path, &report.certificates)?;
    }
    match &common.json {
        Some(path) => {
            fs::write(path, report.to_json()).map_err(io_err(path))?;
            print_table(report, g);
        }
        None => println!("{}", report.to_json()),
    }
    match report.predicates.get("spectral.projector_residuals") {
        Some(p) if !p.holds => Err(Failure::Health(format!(
            "projector residual {:e} above tolerance",
            p.residual.unwrap_or(f64::NAN)
        ))),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { graph, scan, from, common } => {
            let g = load(&graph)?;
            let from = from.map(|v| vertex(&g, &v)).transpose()?;
            let report = analyze(&graph, &g, &common.config(), AnalyzeOptions { scan, from })?;
            emit(&report, &g, &common)
        }
        Command::Scan { graph, from, to, common } => {
            let g = load(&graph)?;
            let a = vertex(&g, &from)?;
            let b = to.map(|v| vertex(&g, &v)).transpose()?;
            let cfg = common.config();
            let dec = SpectralDecomposition::of_graph(&g).map_err(WalkError::from)?;
            let start = std::time::Instant::now();
            let certs = scan_fr(&dec, a, b, &cfg)?;
            let mut report = RunReport {
                input_spec: graph.clone(),
                config: cfg,
                certificates: certs.iter().map(|c| CertificateRecord::new(&graph, c)).collect(),
                predicates: Default::default(),
                timing: Default::default(),
            };
            report
                .timing
                .insert("scan".into(), round_sig(start.elapsed().as_secs_f64() * 1e3));
            emit(&report, &g, &common)
        }
        Command::Quotient { graph, pins, common } => {
            let g = load(&graph)?;
            let pins = pins.iter().map(|p| vertex(&g, p)).collect::<Result<Vec<_>, _>>()?;
            let run = analyze_quotient(&graph, &g, &pins, &common.config())?;
            if common.json.is_some() {
                println!("cells:");
                for (i, cell) in run.partition.cells().iter().enumerate() {
                    let names: Vec<&str> = cell.iter().map(|&v| g.label(v)).collect();
                    println!("  {i}: {{{}}}", names.join(", "));
                }
                println!("quotient matrix:");
                let m = run.quotient.weights();
                for r in 0..m.nrows() {
                    let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:>10.6}", m[(r, c)])).collect();
                    println!("  [{}]", row.join(" "));
                }
            }
            emit(&run.report, &run.quotient, &common)?;
            match run.report.failures().into_iter().find(|f| f.starts_with("quotient.")) {
                Some(f) => Err(Failure::Other(format!("quotient check failed: {f}"))),
                None => Ok(()),
            }
        }
        Command::Construct { graph, out } => {
            let g = load(&graph)?;
            let text = write_graph(&g);
            match out {
                Some(path) => fs::write(&path, text).map_err(io_err(&path)),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::PaperSuite { only, common } => {
            let report = run_suite(only, &common.config())?;
            let width = report.rows.iter().map(|r| r.name.chars().count()).max().unwrap_or(0);
            for r in &report.rows {
                let pad = width - r.name.chars().count();
                println!(
                    "{} [{}] {}{}  {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.criterion,
                    r.name,
                    " ".repeat(pad),
                    r.detail
                );
            }
            if let Some(path) = &common.json {
                let text = serde_json::to_string_pretty(&report.rows).map_err(|e| Failure::Other(e.to_string()))?;
                fs::write(path, text).map_err(io_err(path))?;
            }
            let failed: Vec<_> = report.failures().collect();
            println!("{} of {} rows passed", report.rows.len() - failed.len(), report.rows.len());
            if failed.is_empty() {
                return Ok(());
            }
            println!("failing rows:");
            for r in failed {
                println!("  [{}] {}: {}", r.criterion, r.name, r.detail);
            }
            Err(Failure::Suite)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Parse(m) | Failure::Health(m) | Failure::Other(m) => eprintln!("error: {m}"),
                Failure::Suite => {}
            }
            ExitCode::from(f.code())
        }
    }
}
