//! The classification pipeline behind `corrclass classify`.

use serde::{Serialize, Serializer};

use corrclass::correlations::{
    chsh_max, discord, extract_cc_decomposition, is_classical_quantum, mutual_information, Direction,
    DiscordConfig,
};
use corrclass::io::{Decomposition, FILE_TOL};
use corrclass::lhv::{
    build_tight_from_cc, is_tight, verify_against_state, LinearLhvModel, TightnessReport, MAX_AUDIT_EVENTS,
};
use corrclass::quasiprob::{negativity, qubit_sic_frame, represent_state};
use corrclass::states::is_entangled_ppt;
use corrclass::{BipartiteState, Error, Side};

use crate::output::Failure;

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub tol: f64,
    pub seed: u64,
    pub samples: usize,
    pub grid: usize,
}

/// Three-valued entanglement verdict; serialized as `true`, `false` or
/// `"inconclusive"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entangled {
    Yes,
    No,
    Inconclusive,
}

impl Serialize for Entangled {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Entangled::Yes => s.serialize_bool(true),
            Entangled::No => s.serialize_bool(false),
            Entangled::Inconclusive => s.serialize_str("inconclusive"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Validity {
    pub hermitian: bool,
    pub unit_trace: bool,
    pub psd: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LhvSummary {
    pub built: bool,
    /// `"cc"` when built from the extracted classical decomposition,
    /// `"separable"` when built from a supplied decomposition.
    pub source: Option<&'static str>,
    pub events_a: Option<usize>,
    pub events_b: Option<usize>,
    pub tight_a: Option<bool>,
    pub tight_b: Option<bool>,
    pub failing_a: Option<Vec<Vec<usize>>>,
    pub failing_b: Option<Vec<Vec<usize>>>,
    pub max_deviation: Option<f64>,
    pub samples: Option<usize>,
}

impl LhvSummary {
    fn not_built() -> Self {
        Self {
            built: false,
            source: None,
            events_a: None,
            events_b: None,
            tight_a: None,
            tight_b: None,
            failing_a: None,
            failing_b: None,
            max_deviation: None,
            samples: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasiSummary {
    pub negativity_sic: Option<f64>,
    pub min_weight: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub input: String,
    pub dims: [usize; 2],
    pub validity: Validity,
    pub ppt: bool,
    pub ppt_min_eigenvalue: f64,
    pub entangled: Entangled,
    pub mutual_information: f64,
    /// `null` when side a is not a qubit.
    pub discord_ba: Option<f64>,
    /// `null` when side b is not a qubit.
    pub discord_ab: Option<f64>,
    pub classical_a: bool,
    pub classical_b: bool,
    pub zero_discord: bool,
    pub chsh_max: Option<f64>,
    pub lhv: LhvSummary,
    pub quasi: QuasiSummary,
}

impl ClassificationReport {
    pub fn summary(&self) -> String {
        let fmt_opt = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        let entangled = match self.entangled {
            Entangled::Yes => "entangled",
            Entangled::No => "separable",
            Entangled::Inconclusive => "PPT (inconclusive)",
        };
        let lhv = if !self.lhv.built {
            "no linear LHV model".to_string()
        } else {
            let tight = |t: Option<bool>| match t {
                Some(true) => "tight",
                Some(false) => "not tight",
                None => "unaudited",
            };
            format!(
                "{} model, a {}, b {}, deviation {:.1e}",
                self.lhv.source.unwrap_or("?"),
                tight(self.lhv.tight_a),
                tight(self.lhv.tight_b),
                self.lhv.max_deviation.unwrap_or(f64::NAN)
            )
        };
        format!(
            "{}: {}x{} {entangled}; D(b|a)={} D(a|b)={}; zero discord: {}; {lhv}; CHSH {}; SIC negativity {}",
            self.input,
            self.dims[0],
            self.dims[1],
            fmt_opt(self.discord_ba),
            fmt_opt(self.discord_ab),
            if self.zero_discord { "yes" } else { "no" },
            fmt_opt(self.chsh_max),
            fmt_opt(self.quasi.negativity_sic),
        )
    }
}

fn core(context: &str) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure::from_core(context, e)
}

fn audit(m: &LinearLhvModel, side: Side) -> Result<Option<TightnessReport>, Error> {
    if m.kernel(side).len() > MAX_AUDIT_EVENTS {
        return Ok(None);
    }
    is_tight(m, side).map(Some)
}

fn summarize_model(
    m: &LinearLhvModel,
    source: &'static str,
    s: &BipartiteState,
    cfg: &Settings,
    context: &str,
) -> Result<LhvSummary, Failure> {
    let ta = audit(m, Side::A).map_err(core(context))?;
    let tb = audit(m, Side::B).map_err(core(context))?;
    let v = verify_against_state(m, s, cfg.samples, cfg.seed).map_err(core(context))?;
    Ok(LhvSummary {
        built: true,
        source: Some(source),
        events_a: Some(m.kernel(Side::A).len()),
        events_b: Some(m.kernel(Side::B).len()),
        tight_a: ta.as_ref().map(|r| r.tight),
        tight_b: tb.as_ref().map(|r| r.tight),
        failing_a: ta.map(|r| r.failing_subset_indices()),
        failing_b: tb.map(|r| r.failing_subset_indices()),
        max_deviation: Some(v.max_abs_deviation),
        samples: Some(v.samples),
    })
}

fn discord_value(s: &BipartiteState, dir: Direction, cfg: &DiscordConfig, context: &str) -> Result<Option<f64>, Failure> {
    if s.dim_of(dir.measured()) != 2 {
        return Ok(None);
    }
    discord(s, dir, cfg).map(|r| Some(r.value)).map_err(core(context))
}

/// Runs the full pipeline on one parsed state. A supplied decomposition is
/// only used when the state is not certified classical on both sides.
pub fn classify(
    input: &str,
    s: &BipartiteState,
    decomposition: Option<&Decomposition>,
    cfg: &Settings,
) -> Result<ClassificationReport, Failure> {
    let (da, db) = s.dims();
    let verdict = is_entangled_ppt(s, cfg.tol);
    let entangled = match verdict.entangled() {
        Some(true) => Entangled::Yes,
        Some(false) => Entangled::No,
        None => Entangled::Inconclusive,
    };

    let dcfg = DiscordConfig::new(cfg.grid, DiscordConfig::default().refine_iterations, cfg.tol)
        .map_err(core("--grid/--tol"))?;
    let discord_ba = discord_value(s, Direction::BGivenA, &dcfg, input)?;
    let discord_ab = discord_value(s, Direction::AGivenB, &dcfg, input)?;

    let classical_a = is_classical_quantum(s, Side::A, cfg.tol);
    let classical_b = is_classical_quantum(s, Side::B, cfg.tol);
    // the extraction re-checks the reconstruction; a state that passes the
    // commutator test but cannot be rebuilt is not reported as classical
    let cc = if classical_a && classical_b {
        extract_cc_decomposition(s, cfg.tol).ok()
    } else {
        None
    };
    let zero_discord = cc.is_some();

    let lhv = match (&cc, decomposition) {
        (Some(cc), _) => summarize_model(&build_tight_from_cc(cc), "cc", s, cfg, input)?,
        (None, Some(d)) => {
            if d.dims() != (da, db) {
                let (expected, found) = if d.dims().0 != da { (da, d.dims().0) } else { (db, d.dims().1) };
                return Err(Failure::from_core(
                    &format!("{input}: decomposition"),
                    Error::DimensionMismatch { expected, found },
                ));
            }
            let distance = d.to_state().trace_distance(s).map_err(core(input))?;
            if distance > FILE_TOL {
                return Err(Failure::usage(format!(
                    "{input}: decomposition does not describe this state (trace distance {distance:.3e})"
                )));
            }
            if entangled == Entangled::Yes {
                return Err(Failure::usage(format!(
                    "{input}: decomposition supplied for a state with negative partial transpose"
                )));
            }
            let source = match d {
                Decomposition::Separable(_) => "separable",
                Decomposition::Cc(_) => "cc",
            };
            summarize_model(&d.build_model(), source, s, cfg, input)?
        }
        (None, None) => LhvSummary::not_built(),
    };

    let quasi = if (da, db) == (2, 2) {
        let f = qubit_sic_frame();
        let w = represent_state(s, &f, &f).map_err(core(input))?;
        QuasiSummary {
            negativity_sic: Some(negativity(&w)),
            min_weight: Some(w.min_weight()),
        }
    } else {
        QuasiSummary {
            negativity_sic: None,
            min_weight: None,
        }
    };

    let chsh = if (da, db) == (2, 2) {
        Some(chsh_max(s).map_err(core(input))?)
    } else {
        None
    };

    Ok(ClassificationReport {
        input: input.to_string(),
        dims: [da, db],
        // anything that reaches here passed validation at parse time
        validity: Validity {
            hermitian: true,
            unit_trace: true,
            psd: true,
        },
        ppt: !verdict.npt,
        ppt_min_eigenvalue: verdict.min_eigenvalue,
        entangled,
        mutual_information: mutual_information(s),
        discord_ba,
        discord_ab,
        classical_a,
        classical_b,
        zero_discord,
        chsh_max: chsh,
        lhv,
        quasi,
    })
}
