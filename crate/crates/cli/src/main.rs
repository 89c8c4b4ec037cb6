use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use spiked::oracle::{shoot_eigenvalue, RadialPotential, ShootingOptions};
use spiked::tables::{reproduce, TableReport};
use spiked::wavefunction::PhysicalSolution;
use spiked::{load_problem, EigenResult, Error, PotentialSpec, Problem, Regime, SolverSettings};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

/// Bound states of spiked oscillators by the connection-factor method.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Include wall-clock timings in the JSON report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Refine one eigenvalue per bracket.
    Solve(SolveArgs),
    /// Tabulate the quantization residual and list sign changes.
    Scan(ScanArgs),
    /// Recompute a published table and compare row by row.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    /// Energy bracket; may be repeated.  Defaults to `solver.energy_bracket`.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], action = clap::ArgAction::Append, allow_negative_numbers = true)]
    bracket: Vec<f64>,
    /// Cross-check each eigenvalue with the shooting oracle.
    #[arg(long)]
    oracle: bool,
    /// Write the normalized wavefunction of the first eigenvalue as CSV.
    #[arg(long)]
    wavefunction: Option<PathBuf>,
    /// Grid points for the wavefunction export.
    #[arg(long, default_value_t = 200)]
    grid: usize,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    config: PathBuf,
    /// Energy range and step.  Defaults to `solver.energy_bracket` and `solver.scan_step`.
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "STEP"], allow_negative_numbers = true)]
    scan: Option<Vec<f64>>,
    /// Refine every bracket found.
    #[arg(long)]
    refine: bool,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Table number, 1 to 9.
    #[arg(value_parser = clap::value_parser!(u32).range(1..=9), required_unless_present = "table_flag")]
    table: Option<u32>,
    #[arg(long = "table", value_parser = clap::value_parser!(u32).range(1..=9), conflicts_with = "table")]
    table_flag: Option<u32>,
}

#[derive(Serialize)]
struct OracleComparison {
    energy: f64,
    delta: f64,
    nodes: usize,
    agrees: bool,
}

#[derive(Serialize)]
struct WavefunctionSummary {
    path: PathBuf,
    points: usize,
    support: (f64, f64),
    nodes: usize,
    imaginary_residue: f64,
    overlap_discrepancy: f64,
}

/// One eigenvalue; every number derived from the energy is rounded to the
/// certified digits.
#[derive(Serialize)]
struct Record {
    energy: f64,
    certified_digits: u32,
    nu: [[f64; 2]; 2],
    regime: Regime,
    connection: BTreeMap<String, [f64; 2]>,
    residual: f64,
    consistency_residual: f64,
    circuit_residual_det: Option<f64>,
    certificates: Vec<spiked::ExtractionCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wavefunction: Option<WavefunctionSummary>,
}

#[derive(Serialize)]
struct ScanSample {
    energy: f64,
    residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize, Default)]
struct RunReport {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    potential: Option<PotentialSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    settings: Option<SolverSettings>,
    eigenvalues: Vec<Record>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scan: Option<Vec<ScanSample>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    brackets: Option<Vec<(f64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<TableReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seconds: Option<f64>,
}

fn round_sig(x: f64, digits: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.max(1) as usize - 1, x).parse().unwrap_or(x)
}

fn record(r: &EigenResult) -> Record {
    let d = r.certified_digits;
    let c = |v: spiked::Complex64| [round_sig(v.re, d), round_sig(v.im, d)];
    let mut connection = BTreeMap::new();
    for j in 0..2 {
        for k in 0..4 {
            connection.insert(format!("T{}{}", j + 1, k + 3), c(r.connection[j][k]));
        }
    }
    Record {
        energy: round_sig(r.energy, d),
        certified_digits: d,
        nu: [c(r.nu[0]), c(r.nu[1])],
        regime: r.regime,
        connection,
        residual: r.point.residual,
        consistency_residual: r.consistency_residual,
        circuit_residual_det: r.circuit_residual_det,
        certificates: r.certificates.clone(),
        oracle: None,
        wavefunction: None,
    }
}

fn oracle_check(spec: &PotentialSpec, e: f64) -> spiked::Result<OracleComparison> {
    let p = RadialPotential::from(spec);
    let opts = ShootingOptions::default();
    let mut half = 1e-3 * e.abs().max(1.0);
    let shot = loop {
        match shoot_eigenvalue(&p, e - half, e + half, &opts) {
            Err(Error::NoSignChange { .. }) if half < 0.1 => half *= 4.0,
            other => break other?,
        }
    };
    let delta = (shot.energy - e).abs();
    Ok(OracleComparison { energy: shot.energy, delta, nodes: shot.nodes, agrees: delta < 1e-6 })
}

fn write_wavefunction(problem: &Problem, r: &EigenResult, path: &Path, n: usize) -> spiked::Result<WavefunctionSummary> {
    let sol = PhysicalSolution::new(problem, r)?;
    let points = sol.sample(&sol.grid(n)).into_iter().collect::<spiked::Result<Vec<_>>>()?;
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    sol.write_csv(&points, std::io::BufWriter::new(file))?;
    Ok(WavefunctionSummary {
        path: path.to_path_buf(),
        points: points.len(),
        support: sol.support,
        nodes: sol.nodes(n)?,
        imaginary_residue: sol.imaginary_residue(n)?,
        overlap_discrepancy: sol.overlap_discrepancy(n, 1e-8).0,
    })
}

/// Outcome of a command: the report and whether every check passed.
type Outcome = spiked::Result<(RunReport, bool)>;

fn solve(args: &SolveArgs) -> Outcome {
    let cfg = load_problem(&args.config)?;
    let mut brackets: Vec<(f64, f64)> = args.bracket.chunks(2).map(|c| (c[0], c[1])).collect();
    if brackets.is_empty() {
        brackets.extend(cfg.settings.energy_bracket);
    }
    if brackets.is_empty() {
        return Err(Error::Parse("no energy bracket: pass --bracket or set solver.energy_bracket".into()));
    }
    if let Some(&(lo, hi)) = brackets.iter().find(|b| !(b.0 < b.1)) {
        return Err(Error::Parse(format!("empty bracket [{lo}, {hi}]")));
    }
    let problem = Problem::new(cfg.spec.clone(), cfg.settings.clone())?;
    let mut ok = true;
    let mut records = Vec::new();
    for (i, &(lo, hi)) in brackets.iter().enumerate() {
        let r = problem.find_eigenvalue(lo, hi)?;
        let mut rec = record(&r);
        println!("E = {} ({} certified digits) in [{lo}, {hi}]", r.certified_energy(), r.certified_digits);
        if args.oracle {
            let o = oracle_check(&cfg.spec, r.energy)?;
            println!("  oracle E = {:.10} (delta {:.1e}, {} nodes)", o.energy, o.delta, o.nodes);
            ok &= o.agrees;
            rec.oracle = Some(o);
        }
        if let (0, Some(path)) = (i, &args.wavefunction) {
            let w = write_wavefunction(&problem, &r, path, args.grid)?;
            println!("  wavefunction: {} points to {} ({} nodes)", w.points, path.display(), w.nodes);
            rec.wavefunction = Some(w);
        }
        records.push(rec);
    }
    let report = RunReport {
        command: "solve",
        potential: Some(cfg.spec),
        settings: Some(cfg.settings),
        eigenvalues: records,
        ..Default::default()
    };
    Ok((report, ok))
}

fn scan(args: &ScanArgs) -> Outcome {
    let cfg = load_problem(&args.config)?;
    let (lo, hi, step) = match (&args.scan, cfg.settings.energy_bracket) {
        (Some(v), _) => (v[0], v[1], v[2]),
        (None, Some((lo, hi))) => (lo, hi, cfg.settings.scan_step),
        (None, None) => return Err(Error::Parse("no range: pass --scan or set solver.energy_bracket".into())),
    };
    if !(step > 0.0) {
        return Err(Error::Parse(format!("scan step {step} must be positive")));
    }
    let problem = Problem::new(cfg.spec.clone(), cfg.settings.clone())?;
    let mut report = RunReport { command: "scan", potential: Some(cfg.spec), settings: Some(cfg.settings), ..Default::default() };
    let mut samples = Vec::new();
    let mut brackets = Vec::new();
    if lo < hi {
        let mut prev: Option<(f64, f64)> = None;
        for (e, r) in problem.scan_samples(lo, hi, step) {
            match r {
                Ok(v) => {
                    if let Some((pe, pv)) = prev {
                        if pv.signum() != v.signum() {
                            brackets.push((pe, e));
                        }
                    }
                    prev = Some((e, v));
                    samples.push(ScanSample { energy: e, residual: Some(v), error: None });
                }
                Err(err) => {
                    prev = None;
                    samples.push(ScanSample { energy: e, residual: None, error: Some(err.to_string()) });
                }
            }
        }
    }
    let skipped = samples.iter().filter(|s| s.error.is_some()).count();
    println!("{} samples on [{lo}, {hi}], {} skipped, {} brackets", samples.len(), skipped, brackets.len());
    for &(a, b) in &brackets {
        println!("  sign change in [{a}, {b}]");
    }
    if args.refine {
        for &(a, b) in &brackets {
            let r = problem.find_eigenvalue(a, b)?;
            println!("  E = {}", r.certified_energy());
            report.eigenvalues.push(record(&r));
        }
    }
    report.scan = Some(samples);
    report.brackets = Some(brackets);
    Ok((report, true))
}

fn reproduce_table(args: &ReproduceArgs) -> Outcome {
    let table = args.table.or(args.table_flag).expect("clap enforces a table");
    let settings = SolverSettings::default();
    let t = reproduce(table, &settings);
    println!("Table {table}");
    for r in &t.rows {
        println!(
            "  {} {:<40} computed {:<44} expected {:<44} error {:.1e} (tol {:.0e})",
            if r.pass { "PASS" } else { "FAIL" },
            r.label,
            r.computed,
            r.expected,
            r.error,
            r.tolerance
        );
    }
    let ok = t.passed();
    println!("{} of {} rows pass in {:.2} s", t.rows.iter().filter(|r| r.pass).count(), t.rows.len(), t.seconds);
    Ok((RunReport { command: "reproduce", table: Some(t), ..Default::default() }, ok))
}

fn emit(report: &RunReport, path: &Path) -> spiked::Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    if path == Path::new("-") {
        println!("{text}");
        Ok(())
    } else {
        std::fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let outcome = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Scan(a) => scan(a),
        Command::Reproduce(a) => reproduce_table(a),
    };
    let result = outcome.and_then(|(mut report, ok)| {
        if cli.timing {
            report.seconds = Some(start.elapsed().as_secs_f64());
        }
        if let Some(path) = &cli.json {
            emit(&report, path)?;
        }
        Ok(ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input() { 2 } else { 1 })
        }
    }
}
