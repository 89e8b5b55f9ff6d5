//! `hexaudit`: build, audit and search line sets of PG(n, q).
//!
//! Exit codes: 0 pass, 1 property violation, 2 usage, parse or I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use hexaudit_core::audit::{audit_with, hyperplane_consequence_check, Strategy};
use hexaudit_core::hexagon::{build, section_census, verify_flat_full};
use hexaudit_core::polygon::{find_kgon, girth_and_diameter};
use hexaudit_core::search::{run, SearchSpec};
use hexaudit_core::{parse_lineset, write_lineset, AuditReport, AxiomConfig, LineSet};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "hexaudit", version, about = "Line sets of PG(n,q) and the split Cayley hexagon")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "HEXAUDIT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the line set of H(q) in PG(6, q).
    Build {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check intersection-number axioms and write a JSON report.
    Audit {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma separated: pt,pl,sd,sd',4d,hp,hp',to,6d or `all`.
        #[arg(long, default_value = "all")]
        axioms: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "closure")]
        strategy: StrategyArg,
    },
    /// Look for a k-gon (2 <= k <= 6) and report incidence-graph statistics.
    Polygon {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        /// Exit 1 unless the outcome matches.
        #[arg(long, value_enum)]
        expect: Option<Expect>,
    },
    /// Classify all 4-spaces of PG(6, q) against Q(6, q) and H(q).
    Classify4 {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Strongly regular graph gate for (q^2+2q+2, q+1, 0, 1).
    Srg {
        #[arg(long)]
        q: u64,
    },
    /// Randomized search driven by a JSON spec.
    Search {
        #[arg(long)]
        spec: PathBuf,
        /// Line-set file for a found candidate.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON run log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Flatness, fullness, order and span of a line set.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Look for a 5-space with many lines around a pentagon.
    Hyperplane {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Closure,
    Naive,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Expect {
    None,
    Found,
}

enum Failure {
    Violation,
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Serialize)]
struct ReportFile<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    input_digest: String,
    report: &'a T,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    let hex: String = d.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

fn write_json<T: Serialize>(path: &Path, digest: String, report: &T) -> CmdResult {
    let doc = ReportFile {
        tool: "hexaudit",
        version: VERSION,
        input_digest: digest,
        report,
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_lineset(path: &Path) -> Result<(LineSet, Vec<u8>), Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| Failure::Usage(format!("{}: not UTF-8", path.display())))?;
    let ls = parse_lineset(text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok((ls, bytes))
}

fn cmd_build(q: u32, out: &Path) -> CmdResult {
    let h = build(q)?;
    fs::write(out, write_lineset(&h)).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
    println!("H({q}): {} lines, {} points", h.len(), h.point_count());
    Ok(())
}

fn print_audit(r: &AuditReport) {
    println!(
        "PG({},{}): {} lines, {} points, span dimension {}",
        r.ambient.n, r.ambient.q, r.lines, r.points, r.span_dim
    );
    for v in &r.verdicts {
        let status = if v.pass { "pass" } else { "FAIL" };
        println!("{:<4}{status}  {}  observed {}", v.axiom.name(), v.condition, v.observed);
        if let Some(w) = &v.witness {
            let rows: Vec<String> = w
                .basis
                .iter()
                .map(|r| r.iter().map(u8::to_string).collect::<Vec<_>>().join(" "))
                .collect();
            println!("    witness: {}-space <{}> with count {}", w.dim, rows.join(" | "), w.count);
        }
    }
    for (d, h) in &r.histograms {
        let cells: Vec<String> = h.iter().map(|(c, m)| format!("{c}:{m}")).collect();
        println!("dim {d}: {}", cells.join(" "));
    }
}

fn cmd_audit(input: &Path, axioms: &str, out: Option<&Path>, strategy: StrategyArg) -> CmdResult {
    let cfg = AxiomConfig::parse(axioms)?;
    let (ls, bytes) = read_lineset(input)?;
    let strategy = match strategy {
        StrategyArg::Closure => Strategy::Closure,
        StrategyArg::Naive => Strategy::Naive,
    };
    let report = audit_with(&ls, &cfg, strategy)?;
    print_audit(&report);
    if let Some(out) = out {
        write_json(out, sha256_hex(&bytes), &report)?;
    }
    if report.all_pass {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn cmd_polygon(input: &Path, k: usize, expect: Option<Expect>) -> CmdResult {
    let (ls, _) = read_lineset(input)?;
    let gon = find_kgon(&ls, k)?;
    match &gon {
        None => println!("{k}-gon: none"),
        Some(g) => {
            let v: Vec<String> = g.vertices.iter().map(u32::to_string).collect();
            let e: Vec<String> = g.edges.iter().map(u32::to_string).collect();
            println!("{k}-gon: points {} lines {}", v.join(" "), e.join(" "));
        }
    }
    let stats = girth_and_diameter(&ls);
    match stats.girth {
        Some(g) => println!("incidence graph: girth {g}, diameter {}", stats.diameter),
        None => println!("incidence graph: acyclic, diameter {}", stats.diameter),
    }
    let outcome = if gon.is_some() { Expect::Found } else { Expect::None };
    match expect {
        Some(e) if e != outcome => Err(Failure::Violation),
        _ => Ok(()),
    }
}

fn cmd_classify4(q: u32, out: Option<&Path>) -> CmdResult {
    let h = build(q)?;
    let census = section_census(&h)?;
    println!("PG(6,{q}): {} 4-spaces", census.four_spaces);
    for (kind, t) in &census.types {
        let cells: Vec<String> = t.line_histogram.iter().map(|(c, m)| format!("{c}:{m}")).collect();
        println!(
            "{:<9} {:>6}  max lines {} (bound {}) {}  [{}]",
            kind.name(),
            t.four_spaces,
            t.max_lines,
            t.bound,
            if t.within_bound { "ok" } else { "EXCEEDED" },
            cells.join(" ")
        );
    }
    println!("max lines in a 4-space: {} (bound {})", census.max_lines, census.four_d_bound);
    if let Some(out) = out {
        write_json(out, sha256_hex(format!("classify4 q={q}").as_bytes()), &census)?;
    }
    if census.all_within_bounds {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn cmd_srg(q: u64) -> CmdResult {
    let g = hexaudit_core::srg::gate(q)?;
    let p = g.params;
    println!("parameters ({},{},{},{})", p.v, p.k, p.lambda, p.mu);
    let e = g.eigenvalues;
    match e.exact {
        Some((r, s)) => println!("eigenvalues {r}, {s}"),
        None => println!("eigenvalues {:.6}, {:.6} (irrational)", e.r, e.s),
    }
    println!("{}", g.message);
    Ok(())
}

fn cmd_search(spec_path: &Path, out: Option<&Path>, log: Option<&Path>) -> CmdResult {
    let bytes = fs::read(spec_path).map_err(|e| Failure::Usage(format!("{}: {e}", spec_path.display())))?;
    let spec: SearchSpec = serde_json::from_slice(&bytes)
        .map_err(|e| Failure::Usage(format!("{}: {e}", spec_path.display())))?;
    let result = run(&spec)?;
    println!("rng {} seed {}: {}", result.log.rng, result.log.seed, result.log.outcome);
    if let (Some(out), Some(text)) = (out, result.render()) {
        fs::write(out, text).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
    }
    if let Some(log) = log {
        write_json(log, sha256_hex(&bytes), &result.log)?;
    }
    Ok(())
}

fn cmd_verify(input: &Path) -> CmdResult {
    let (ls, _) = read_lineset(input)?;
    let r = verify_flat_full(&ls);
    println!("flat: {}", r.flat);
    println!("full: {}", r.full);
    match r.order {
        Some((s, t)) => println!("order: ({s},{t})"),
        None => println!("order: none"),
    }
    println!("span dimension: {}", ls.span().projdim());
    Ok(())
}

fn cmd_hyperplane(input: &Path) -> CmdResult {
    let (ls, _) = read_lineset(input)?;
    let r = hyperplane_consequence_check(&ls)?;
    println!("{}", serde_json::to_string(&r.outcome)?);
    println!("bound {}, span dimension {}", r.bound, r.span_dim);
    Ok(())
}

fn dispatch(cli: Cli) -> CmdResult {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Build { q, out } => cmd_build(q, &out),
        Command::Audit {
            input,
            axioms,
            out,
            strategy,
        } => cmd_audit(&input, &axioms, out.as_deref(), strategy),
        Command::Polygon { input, k, expect } => cmd_polygon(&input, k, expect),
        Command::Classify4 { q, out } => cmd_classify4(q, out.as_deref()),
        Command::Srg { q } => cmd_srg(q),
        Command::Search { spec, out, log } => cmd_search(&spec, out.as_deref(), log.as_deref()),
        Command::Verify { input } => cmd_verify(&input),
        Command::Hyperplane { input } => cmd_hyperplane(&input),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
