//! Command-line front end: validate, run, render, explain and gen-trace over
//! scenario files.
//!
//! Exit status is 0 on success, 1 when a scenario or run fails on its own
//! terms, and 2 for usage or file errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use modeplex::belief::Thresholds;
use modeplex::dsl::{self, CompileOptions, Diagnostic, ScenarioDoc};
use modeplex::engine::{explain, Action, Atom, Engine, EventKind, Machine, Trace, Trajectory};
use modeplex::render::{render_complex, render_trajectory, RenderSpec, WarningLine};
use modeplex::tracegen::{generate, GenOptions, Generator};
use modeplex::VertexId;

#[derive(Parser)]
#[command(name = "modeplex", version, about = "Mode complexes, stable domains and belief trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and lint a scenario; diagnostics go to standard error.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        /// Treat warnings as failures.
        #[arg(long)]
        strict: bool,
    },
    /// Replay a trace through the scenario and write the trajectory.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Use the busy-day parameter values.
        #[arg(long)]
        busy: bool,
    },
    /// Draw the complex, or the trajectory of a trace over it.
    Render {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// `svg` draws; `json` writes the vertex layout used for drawing.
        #[arg(long, value_enum, default_value_t = Format::Svg)]
        format: Format,
        #[arg(long)]
        busy: bool,
    },
    /// Report the mode, point and zone margins at a time of a run.
    Explain {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        time: f64,
        /// Also write the record as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        busy: bool,
    },
    /// Write a synthetic oracle trace for the scenario.
    GenTrace {
        #[arg(long)]
        scenario: PathBuf,
        /// One of ramp, random-walk, scripted.
        #[arg(long)]
        generator: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Svg,
}

enum Failure {
    /// The input was read but fails on its own terms.
    Domain(String),
    /// Bad arguments or unreadable or unwritable files.
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

type Res<T> = Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn report(path: &Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}: {d}", path.display());
    }
}

/// Loads, lints and reports. Warnings are printed but do not fail.
fn load(path: &Path) -> Res<ScenarioDoc> {
    let text = read(path)?;
    match dsl::load(&text, is_json(path)) {
        Ok((doc, warnings)) => {
            report(path, &warnings);
            Ok(doc)
        }
        Err(errors) => {
            report(path, &errors);
            let n = errors.iter().filter(|d| d.is_error()).count();
            Err(Failure::Domain(format!("{} has {n} error(s)", path.display())))
        }
    }
}

fn machine(doc: &ScenarioDoc, busy: bool) -> Res<Arc<Machine>> {
    let opts = CompileOptions { busy, ..CompileOptions::default() };
    dsl::compile(doc, &opts).map(Arc::new).map_err(|errors| {
        for d in &errors {
            eprintln!("{d}");
        }
        Failure::Domain(format!("scenario `{}` does not compile", doc.name))
    })
}

fn load_trace(path: &Path) -> Res<Trace> {
    Trace::from_json(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn run_trace(m: &Arc<Machine>, trace: &Trace) -> Res<Trajectory> {
    let engine = Engine::new(m.clone()).map_err(|e| Failure::Domain(e.to_string()))?;
    engine.run(&trace.readings, None).map_err(|e| Failure::Domain(format!("run failed: {e}")))
}

fn render_spec(doc: &ScenarioDoc, m: &Machine) -> Res<RenderSpec> {
    let mut hints = BTreeMap::new();
    for (v, p) in &doc.layout {
        let id = VertexId::new(v.as_str()).map_err(|e| Failure::Domain(e.to_string()))?;
        hints.insert(id, *p);
    }
    let mut spec = RenderSpec::new(m.complex(), &hints);
    if let Some(c) = doc.colours {
        spec.thresholds = Thresholds::new(c.low, c.high).map_err(|e| Failure::Domain(e.to_string()))?;
    }
    // Single-atom warning zones are drawn as lines across the complex.
    for mode in m.modes() {
        for z in &mode.zones {
            if let (Action::Warn(_), [Atom::Weight { vertex, threshold, .. }]) = (&z.action, z.predicate.0.as_slice()) {
                let line = WarningLine { vertex: vertex.clone(), threshold: *threshold };
                if !spec.warning_lines.contains(&line) {
                    spec.warning_lines.push(line);
                }
            }
        }
    }
    Ok(spec)
}

fn execute(cli: Cli) -> Res<()> {
    match cli.command {
        Command::Validate { scenario, strict } => {
            let text = read(&scenario)?;
            match dsl::load(&text, is_json(&scenario)) {
                Ok((doc, warnings)) => {
                    report(&scenario, &warnings);
                    if strict && !warnings.is_empty() {
                        return Err(Failure::Domain(format!("{} warning(s) with --strict", warnings.len())));
                    }
                    println!("{}: scenario `{}` is valid ({} warning(s))", scenario.display(), doc.name, warnings.len());
                    Ok(())
                }
                Err(errors) => {
                    report(&scenario, &errors);
                    let n = errors.iter().filter(|d| d.is_error()).count();
                    Err(Failure::Domain(format!("{n} error(s)")))
                }
            }
        }
        Command::Run { scenario, trace, out, format, busy } => {
            if format != Format::Json {
                return Err(Failure::Usage("run writes JSON only".into()));
            }
            let doc = load(&scenario)?;
            let m = machine(&doc, busy)?;
            let traj = run_trace(&m, &load_trace(&trace)?)?;
            write(&out, &traj.to_json())?;
            println!(
                "samples: {}, transitions: {}, interventions: {}, warnings: {}, access violations: {}",
                traj.samples.len(),
                traj.count(EventKind::Transition),
                traj.count(EventKind::Intervene),
                traj.count(EventKind::Warn),
                traj.count(EventKind::AccessViolation)
            );
            Ok(())
        }
        Command::Render { scenario, trace, out, format, busy } => {
            let doc = load(&scenario)?;
            let m = machine(&doc, busy)?;
            let spec = render_spec(&doc, &m)?;
            let text = match format {
                Format::Json => {
                    let layout: BTreeMap<&str, [f64; 2]> = spec.layout.iter().map(|(v, p)| (v.as_str(), *p)).collect();
                    let mut s = serde_json::to_string_pretty(&layout).expect("layout serialises");
                    s.push('\n');
                    s
                }
                Format::Svg => {
                    let svg = match trace {
                        Some(t) => render_trajectory(m.complex(), &run_trace(&m, &load_trace(&t)?)?, &spec),
                        None => render_complex(m.complex(), &spec),
                    };
                    svg.map_err(|e| Failure::Domain(format!("render failed: {e}")))?
                }
            };
            write(&out, &text)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Explain { scenario, trace, time, out, busy } => {
            let doc = load(&scenario)?;
            let m = machine(&doc, busy)?;
            let traj = run_trace(&m, &load_trace(&trace)?)?;
            let rec = explain(&m, &traj, time).map_err(|e| Failure::Domain(format!("explain failed: {e}")))?;
            println!("t = {}: mode {}", rec.time, rec.mode);
            let weights: Vec<String> = rec.point.iter().map(|(v, w)| format!("{v} {w:.3}")).collect();
            println!("point: {}", weights.join(", "));
            for zm in &rec.margins {
                println!("  zone {}: margin {:.4}", zm.zone, zm.margin);
            }
            match &rec.next_likely {
                Some(z) => println!("next likely: {z}"),
                None => println!("next likely: none"),
            }
            if let Some(out) = out {
                write(&out, &rec.to_json())?;
            }
            Ok(())
        }
        Command::GenTrace { scenario, generator, out, seed, steps } => {
            let generator: Generator = generator.parse().map_err(|e: modeplex::tracegen::TraceGenError| Failure::Usage(e.to_string()))?;
            let doc = load(&scenario)?;
            let m = machine(&doc, false)?;
            let opts = GenOptions { steps, seed, ..GenOptions::default() };
            let trace = generate(&m, generator, &opts).map_err(|e| match e {
                modeplex::tracegen::TraceGenError::NoScript(_) => Failure::Domain(e.to_string()),
                _ => Failure::Usage(e.to_string()),
            })?;
            write(&out, &trace.to_json())?;
            println!("wrote {} readings to {}", trace.readings.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Domain(msg) | Failure::Usage(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
