//! `corrclass`: classify bipartite states by their correlations and build,
//! verify and audit linear hidden-variable models.
//!
//! Every command writes one JSON document (stdout, `--out`, or a default
//! file name inside `--out-dir` / `CORRCLASS_OUT_DIR`) and a short summary
//! on stderr. Exit codes: 0 success, 2 malformed input or bad parameter,
//! 3 input is not a valid state or operator, 4 dimension mismatch.

mod classify;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use corrclass::io::{
    parse_decomposition, parse_model, parse_state, write_decomposition, write_model, write_state, Decomposition,
};
use corrclass::lhv::{is_tight, kernel_geometry, verify_against_state, KernelGeometry, LinearLhvModel};
use corrclass::states::{
    asymmetric_decomposition, bell_state, from_cc_decomposition, random_cc_decomposition, werner, BipartiteState,
    GENERATOR_ID,
};
use corrclass::Side;

use classify::{classify, Settings};
use output::{read_input, render, Failure, Sink};

#[derive(Parser, Debug)]
#[command(name = "corrclass", version, about = "Correlation classification of bipartite quantum states")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Numerical tolerance for the PPT test, the zero-discord certificate
    /// and discord clamping.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Seed for sampled verification and random state generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Number of random product effects used when verifying a model.
    #[arg(long, global = true, default_value_t = 1000)]
    samples: usize,

    /// Polar grid resolution of the discord search (azimuth uses twice as many).
    #[arg(long, global = true, default_value_t = 64)]
    grid: usize,

    /// Output file for the main document; `-` forces stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Directory for default-named output files when `--out` is absent.
    #[arg(long, global = true, env = "CORRCLASS_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify one or more state files.
    Classify {
        #[arg(required = true)]
        states: Vec<PathBuf>,
        /// Separable or CC decomposition of the (single) input state, used to
        /// build a linear LHV model when the state is not classical.
        #[arg(long)]
        decomposition: Option<PathBuf>,
    },
    /// Write a state file for a standard family.
    Gen {
        #[command(subcommand)]
        family: Family,
        /// Also write the decomposition the state was built from (cc, asym).
        #[arg(long, global = true)]
        decomposition_out: Option<PathBuf>,
    },
    /// Build, verify or audit linear LHV models.
    Lhv {
        #[command(subcommand)]
        action: LhvAction,
    },
}

#[derive(Subcommand, Debug)]
enum Family {
    /// Bell state: 0 = Φ+, 1 = Φ-, 2 = Ψ+, 3 = Ψ-.
    Bell {
        #[arg(default_value_t = 0)]
        index: usize,
    },
    /// Werner state p·|ψ-⟩⟨ψ-| + (1-p)·I/4.
    Werner { p: f64 },
    /// Random classical-classical state from `--seed`.
    Cc {
        /// Local dimensions as `DAxDB` or `DA,DB`.
        #[arg(long, default_value = "2x2", value_parser = parse_dims)]
        dims: (usize, usize),
    },
    /// ½(|0⟩⟨0|⊗|0⟩⟨0| + |+⟩⟨+|⊗|1⟩⟨1|).
    Asym,
}

#[derive(Subcommand, Debug)]
enum LhvAction {
    /// Build a model from a decomposition file.
    Build { decomposition: PathBuf },
    /// Compare a model's predictions with a state's Born rule.
    Verify { model: PathBuf, state: PathBuf },
    /// Enumerate all event subsets on both sides and report unrealizable ones.
    Audit { model: PathBuf },
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(['x', 'X', ',']).map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let a: usize = a.parse().map_err(|_| format!("bad dimension `{a}`"))?;
            let b: usize = b.parse().map_err(|_| format!("bad dimension `{b}`"))?;
            if a < 1 || b < 1 || a > 8 || b > 8 {
                return Err("dimensions must lie in 1..=8".into());
            }
            Ok((a, b))
        }
        _ => Err(format!("expected DAxDB, got `{s}`")),
    }
}

impl GlobalArgs {
    fn settings(&self) -> Result<Settings, Failure> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Failure::usage("--tol must be a positive number"));
        }
        if self.samples == 0 {
            return Err(Failure::usage("--samples must be positive"));
        }
        if self.grid < 8 {
            return Err(Failure::usage("--grid must be at least 8"));
        }
        Ok(Settings {
            tol: self.tol,
            seed: self.seed,
            samples: self.samples,
            grid: self.grid,
        })
    }

    fn sink(&self, default_name: &str) -> Sink {
        Sink::resolve(self.out.as_deref(), self.out_dir.as_deref(), default_name)
    }
}

fn load_state(path: &Path) -> Result<BipartiteState, Failure> {
    let text = read_input(path)?;
    parse_state(&text).map_err(|e| Failure::from_core(&path.display().to_string(), e))
}

fn load_model(path: &Path) -> Result<LinearLhvModel, Failure> {
    let text = read_input(path)?;
    parse_model(&text).map_err(|e| Failure::from_core(&path.display().to_string(), e))
}

fn load_decomposition(path: &Path) -> Result<Decomposition, Failure> {
    let text = read_input(path)?;
    parse_decomposition(&text).map_err(|e| Failure::from_core(&path.display().to_string(), e))
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map_or("state".into(), |s| s.to_string_lossy().into_owned())
}

fn cmd_classify(g: &GlobalArgs, states: &[PathBuf], decomposition: Option<&Path>) -> Result<(), Failure> {
    let cfg = g.settings()?;
    if decomposition.is_some() && states.len() != 1 {
        return Err(Failure::usage("--decomposition needs exactly one state file"));
    }
    let decomposition = decomposition.map(load_decomposition).transpose()?;
    // parse everything first so a bad file in a batch produces no output
    let parsed = states
        .iter()
        .map(|p| load_state(p).map(|s| (p.display().to_string(), s)))
        .collect::<Result<Vec<_>, _>>()?;
    let reports = parsed
        .iter()
        .map(|(name, s)| classify(name, s, decomposition.as_ref(), &cfg))
        .collect::<Result<Vec<_>, _>>()?;

    let (text, default_name) = match reports.as_slice() {
        [single] => (render(single), format!("{}.report.json", file_stem(&states[0]))),
        many => (render(&many), "classify.report.json".to_string()),
    };
    g.sink(&default_name).write(&text)?;
    for r in &reports {
        eprintln!("{}", r.summary());
    }
    Ok(())
}

fn cmd_gen(g: &GlobalArgs, family: &Family, decomposition_out: Option<&Path>) -> Result<(), Failure> {
    let (state, decomposition, name, label) = match family {
        Family::Bell { index } => {
            let s = bell_state(*index).map_err(|e| Failure::from_core("bell", e))?;
            (s, None, format!("bell{index}"), format!("Bell state {index}"))
        }
        Family::Werner { p } => {
            let s = werner(*p).map_err(|e| Failure::from_core("werner", e))?;
            (s, None, format!("werner-{p}"), format!("Werner state p = {p}"))
        }
        Family::Cc { dims } => {
            let d = random_cc_decomposition(*dims, g.seed);
            let s = from_cc_decomposition(&d);
            (
                s,
                Some(Decomposition::Cc(d)),
                format!("cc-{}x{}-{}", dims.0, dims.1, g.seed),
                format!("random CC state {}x{} ({GENERATOR_ID}, seed {})", dims.0, dims.1, g.seed),
            )
        }
        Family::Asym => {
            let d = asymmetric_decomposition();
            let s = corrclass::states::from_separable_decomposition(&d);
            (s, Some(Decomposition::Separable(d)), "asym".to_string(), "asymmetric state".to_string())
        }
    };
    let decomposition_text = match (decomposition_out, &decomposition) {
        (Some(_), None) => {
            return Err(Failure::usage(format!("no decomposition is available for {name}")));
        }
        (Some(_), Some(d)) => Some(write_decomposition(d)),
        (None, _) => None,
    };
    let sink = g.sink(&format!("{name}.json"));
    sink.write(&write_state(&state))?;
    if let (Some(path), Some(text)) = (decomposition_out, decomposition_text) {
        output::write_atomically(path, &text)?;
        eprintln!("wrote {label} to {}, decomposition to {}", sink.describe(), path.display());
    } else {
        eprintln!("wrote {label} to {}", sink.describe());
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    model: String,
    state: String,
    seed: u64,
    samples: usize,
    max_abs_deviation: f64,
}

#[derive(Serialize)]
struct SideAudit {
    events: Vec<String>,
    tight: bool,
    /// Event indices of each unrealizable subset.
    failing_subsets: Vec<Vec<usize>>,
    kernel_geometry: KernelGeometry,
}

#[derive(Serialize)]
struct AuditReport {
    model: String,
    a: SideAudit,
    b: SideAudit,
}

fn cmd_lhv(g: &GlobalArgs, action: &LhvAction) -> Result<(), Failure> {
    match action {
        LhvAction::Build { decomposition } => {
            let d = load_decomposition(decomposition)?;
            let m = d.build_model();
            let sink = g.sink(&format!("{}.model.json", file_stem(decomposition)));
            sink.write(&write_model(&m))?;
            let (na, nb) = (m.kernel(Side::A).len(), m.kernel(Side::B).len());
            eprintln!("built model with {na}x{nb} events, written to {}", sink.describe());
        }
        LhvAction::Verify { model, state } => {
            let cfg = g.settings()?;
            let m = load_model(model)?;
            let s = load_state(state)?;
            let v = verify_against_state(&m, &s, cfg.samples, cfg.seed)
                .map_err(|e| Failure::from_core(&format!("{} vs {}", model.display(), state.display()), e))?;
            let report = VerifyReport {
                model: model.display().to_string(),
                state: state.display().to_string(),
                seed: cfg.seed,
                samples: v.samples,
                max_abs_deviation: v.max_abs_deviation,
            };
            g.sink("verify.json").write(&render(&report))?;
            eprintln!("max deviation {:.3e} over {} samples", v.max_abs_deviation, v.samples);
        }
        LhvAction::Audit { model } => {
            let m = load_model(model)?;
            let context = model.display().to_string();
            let side = |side| -> Result<SideAudit, Failure> {
                let r = is_tight(&m, side).map_err(|e| Failure::from_core(&context, e))?;
                Ok(SideAudit {
                    events: m.omega(side).labels().to_vec(),
                    tight: r.tight,
                    failing_subsets: r.failing_subset_indices(),
                    kernel_geometry: kernel_geometry(&m, side),
                })
            };
            let report = AuditReport {
                model: context.clone(),
                a: side(Side::A)?,
                b: side(Side::B)?,
            };
            g.sink(&format!("{}.audit.json", file_stem(model))).write(&render(&report))?;
            for (name, s) in [("a", &report.a), ("b", &report.b)] {
                if s.tight {
                    eprintln!("side {name}: tight");
                } else {
                    eprintln!(
                        "side {name}: not tight, {} failing subsets, e.g. {:?}",
                        s.failing_subsets.len(),
                        s.failing_subsets[0]
                    );
                }
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Classify { states, decomposition } => cmd_classify(&cli.global, states, decomposition.as_deref()),
        Command::Gen {
            family,
            decomposition_out,
        } => cmd_gen(&cli.global, family, decomposition_out.as_deref()),
        Command::Lhv { action } => cmd_lhv(&cli.global, action),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
