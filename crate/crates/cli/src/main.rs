use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gptw_core::broadcast::{
    broadcast_commuting, broadcast_extension, broadcast_report, check_broadcast, interference_flag, max_commutator,
    theorem1_construct, Theorem1Report, COMMUTE_TOL,
};
use gptw_core::cj::{distribution_gap, spatial_to_temporal, temporal_to_spatial, SpatialScenario, TemporalScenario};
use gptw_core::correlations::{
    check_no_signalling, check_ns_monogamy, check_strong_monogamy, is_bell_nonlocal, max_chsh, MonogamyReport,
};
use gptw_core::ontic::{bell_witness, find_local_model, OnticModel, LP_FEAS_TOL};
use gptw_core::quantum::file::PovmSetFile;
use gptw_core::quantum::{born_box, Channel, DensityMatrix, Povm, QuantumEnsemble};
use gptw_core::theory::rank::RANK_RTOL;
use gptw_core::theory::{MeasId, EPS_NORM};
use gptw_core::uncertainty::{
    check_finegrained, harvest_triple, simulate_game, win_probability, GameReport, GameStrategy, TSIRELSON_WIN,
};
use gptw_core::{Box64, Theory64};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

const CHSH_TOL: f64 = 1e-9;
const NOSIGNAL_TOL: f64 = 1e-9;
const MONOGAMY_TOL: f64 = 1e-6;
const CJ_TOL: f64 = 1e-8;
const MARGINAL_TOL: f64 = 1e-9;
const THEOREM1_TOL: f64 = 1e-9;
const GAME_TOL: f64 = 1e-9;
const UNCERTAINTY_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "gptw", version, about = "Checks on operational theories, correlation boxes and quantum objects")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Tolerance; defaults to the check's own default.
    #[arg(long, env = "GPTW_DEFAULT_TOL", global = true)]
    tol: Option<f64>,
    /// Human-readable table instead of JSON lines.
    #[arg(long, global = true)]
    pretty: bool,
}

/// A box given directly, or as a state measured with per-party POVM lists.
#[derive(Args)]
struct BoxSource {
    /// Box file.
    #[arg(long = "box", value_name = "FILE", conflicts_with_all = ["state", "povm"], required_unless_present = "state")]
    bx: Option<PathBuf>,
    /// State file, measured with --povm.
    #[arg(long, value_name = "FILE", requires = "povm")]
    state: Option<PathBuf>,
    /// POVM file listing each party's settings.
    #[arg(long, value_name = "FILE", requires = "state")]
    povm: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MonogamyArg {
    Ns,
    Strong,
}

#[derive(Subcommand)]
enum Command {
    /// Largest CHSH value over all pairs; passes when the box is Bell nonlocal.
    Chsh {
        #[command(flatten)]
        src: BoxSource,
    },
    /// No-signalling across every proper subset of parties.
    Nosignal {
        #[command(flatten)]
        src: BoxSource,
    },
    /// Monogamy of CHSH values in a tripartite box.
    Monogamy {
        #[arg(value_enum)]
        kind: MonogamyArg,
        #[command(flatten)]
        src: BoxSource,
    },
    /// Local hidden-variable model by linear programming.
    LocalModel {
        #[arg(long = "box", value_name = "FILE")]
        bx: PathBuf,
    },
    /// Equality of a bipartite/tripartite scenario and its ensemble-plus-channel dual.
    VerifyCj {
        /// Joint state, or the ensemble average with --channel.
        #[arg(long)]
        state: PathBuf,
        /// One POVM per party; with --channel the first is the ensemble's.
        #[arg(long)]
        povm: PathBuf,
        /// Treat the state as an ensemble average sent through this channel.
        #[arg(long)]
        channel: Option<PathBuf>,
    },
    /// Commutation of a state family and the copying channel when it exists.
    Broadcast {
        /// State in the family; repeat for each member.
        #[arg(long = "state", required = true)]
        states: Vec<PathBuf>,
        /// Check this candidate broadcasting channel instead.
        #[arg(long)]
        channel: Option<PathBuf>,
    },
    /// Broadcast extension of a bipartite box against strong monogamy.
    Theorem1 {
        #[command(flatten)]
        src: BoxSource,
    },
    /// CHSH game win rate, exact and sampled.
    Game {
        #[command(flatten)]
        src: BoxSource,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        rounds: usize,
    },
    /// Fine-grained uncertainty bound for two orthogonal measurements.
    Uncertainty {
        /// Theory file.
        #[arg(long)]
        theory: PathBuf,
        /// First measurement id.
        #[arg(long)]
        m1: String,
        /// Second measurement id, orthogonal to the first.
        #[arg(long)]
        m2: String,
        /// Third measurement; reports the harvested game triple.
        #[arg(long)]
        m3: Option<String>,
    },
    /// Positivity and normalization of an ontological model.
    ValidateModel {
        /// Ontological model file.
        #[arg(long)]
        model: PathBuf,
        /// Also compare the model's predictions with this theory.
        #[arg(long)]
        theory: Option<PathBuf>,
    },
    /// Affine parameter count and claimed dimension of a theory.
    Dim {
        /// Theory file.
        #[arg(long)]
        theory: PathBuf,
        /// With --m2, also report whether the two measurements are orthogonal.
        #[arg(long, requires = "m2")]
        m1: Option<String>,
        #[arg(long, requires = "m1")]
        m2: Option<String>,
    },
}

#[derive(Serialize)]
struct Report {
    check: String,
    digest: String,
    value: Value,
    bound: Value,
    pass: bool,
    tol: f64,
    seed: Option<u64>,
    wall_time: f64,
    #[serde(skip_serializing_if = "Value::is_null")]
    details: Value,
}

/// Input or usage problem; exits with status 2.
struct Failure(String);

impl Failure {
    fn at(path: &Path, e: impl std::fmt::Display) -> Self {
        Failure(format!("{}: {e}", path.display()))
    }
}

impl From<gptw_core::Error> for Failure {
    fn from(e: gptw_core::Error) -> Self {
        Failure(e.to_string())
    }
}

/// Reads input files, hashing their bytes in order.
#[derive(Default)]
struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn load<T>(&mut self, path: &Path, parse: impl FnOnce(&str) -> gptw_core::Result<T>) -> Result<T, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::at(path, e))?;
        self.hasher.update(&bytes);
        let text = std::str::from_utf8(&bytes).map_err(|e| Failure::at(path, e))?;
        parse(text).map_err(|e| Failure::at(path, e))
    }

    fn theory(&mut self, path: &Path) -> Result<Theory64, Failure> {
        self.load(path, Theory64::from_json)
    }

    fn state(&mut self, path: &Path) -> Result<DensityMatrix, Failure> {
        self.load(path, DensityMatrix::from_json)
    }

    fn povms(&mut self, path: &Path) -> Result<Vec<Vec<Povm>>, Failure> {
        self.load(path, |t| serde_json::from_str::<PovmSetFile>(t)?.into_parties())
    }

    /// One POVM per party.
    fn povm_list(&mut self, path: &Path) -> Result<Vec<Povm>, Failure> {
        self.povms(path)?
            .into_iter()
            .map(|mut p| match p.len() {
                1 => Ok(p.remove(0)),
                n => Err(Failure::at(path, format!("expected one POVM per party, found {n}"))),
            })
            .collect()
    }

    fn correlation_box(&mut self, src: &BoxSource) -> Result<Box64, Failure> {
        match (&src.bx, &src.state, &src.povm) {
            (Some(b), _, _) => self.load(b, Box64::from_json),
            (None, Some(s), Some(p)) => {
                let state = self.state(s)?;
                let settings = self.povms(p)?;
                Ok(born_box(&state, &settings)?)
            }
            _ => Err(Failure("a box needs --box, or --state with --povm".into())),
        }
    }

    fn digest(&self) -> String {
        hex::encode(self.hasher.clone().finalize())
    }
}

struct Run {
    digest: String,
    tol: f64,
    reports: Vec<Report>,
    start: Instant,
}

impl Run {
    fn new(inputs: &Inputs, tol: f64) -> Self {
        Self { digest: inputs.digest(), tol, reports: Vec::new(), start: Instant::now() }
    }

    fn push(&mut self, check: &str, value: impl Serialize, bound: impl Serialize, pass: bool, details: Value) {
        self.push_seeded(check, value, bound, pass, None, details);
    }

    fn push_seeded(
        &mut self,
        check: &str,
        value: impl Serialize,
        bound: impl Serialize,
        pass: bool,
        seed: Option<u64>,
        details: Value,
    ) {
        let wall_time = self.start.elapsed().as_secs_f64();
        self.reports.push(Report {
            check: check.into(),
            digest: self.digest.clone(),
            value: json!(value),
            bound: json!(bound),
            pass,
            tol: self.tol,
            seed,
            wall_time,
            details,
        });
        self.start = Instant::now();
    }
}

fn monogamy_details(r: &MonogamyReport) -> Value {
    json!({ "kind": r.kind, "holds": r.holds, "value": r.value, "witness": r.witness })
}

fn theorem1_details(r: &Theorem1Report) -> Value {
    json!({
        "witness": r.witness,
        "ab": r.ab,
        "ac": r.ac,
        "strong": monogamy_details(&r.strong),
        "ns": monogamy_details(&r.ns),
    })
}

fn game_details(r: &GameReport) -> Value {
    json!(r)
}

fn execute(command: Command, tol: Option<f64>) -> Result<Vec<Report>, Failure> {
    let mut inputs = Inputs::default();
    let pick = |default: f64| tol.unwrap_or(default);
    let run = match command {
        Command::Chsh { src } => {
            let bx = inputs.correlation_box(&src)?;
            let mut run = Run::new(&inputs, pick(CHSH_TOL));
            let (nonlocal, witness) = is_bell_nonlocal(&bx, &run.tol)?;
            let details = json!({ "settings": witness.settings_used });
            run.push("chsh", witness.value, 2.0, nonlocal, details);
            run
        }
        Command::Nosignal { src } => {
            let bx = inputs.correlation_box(&src)?;
            let mut run = Run::new(&inputs, pick(NOSIGNAL_TOL));
            let r = check_no_signalling(&bx, &run.tol)?;
            run.push("nosignal", r.max_deviation, 0.0, r.no_signalling, json!({ "witness": r.witness }));
            run
        }
        Command::Monogamy { kind, src } => {
            let bx = inputs.correlation_box(&src)?;
            let mut run = Run::new(&inputs, pick(MONOGAMY_TOL));
            let (name, r) = match kind {
                MonogamyArg::Ns => ("monogamy-ns", check_ns_monogamy(&bx, &run.tol)?),
                MonogamyArg::Strong => ("monogamy-strong", check_strong_monogamy(&bx, &run.tol)?),
            };
            run.push(name, r.value, r.bound, r.holds, json!({ "witness": r.witness }));
            run
        }
        Command::LocalModel { bx } => {
            let bx = inputs.load(&bx, Box64::from_json)?;
            let mut run = Run::new(&inputs, pick(LP_FEAS_TOL));
            let cert = find_local_model(&bx, run.tol)?;
            let chsh = if bx.parties() == 2 { Some(max_chsh(&bx, 0, 1)?.value) } else { None };
            match cert {
                Some(c) => {
                    let details = json!({
                        "weights": c.weights_json(),
                        "exact_residual": c.exact_residual,
                        "max_chsh": chsh,
                    });
                    run.push("local-model", c.residual, run.tol, true, details);
                }
                None => {
                    let w = bell_witness(&bx)?;
                    let details = json!({
                        "max_chsh": chsh,
                        "bell_witness": { "local_bound": w.local_bound, "value": w.value, "violation": w.violation },
                    });
                    run.push("local-model", Value::Null, run.tol, false, details);
                }
            }
            run
        }
        Command::VerifyCj { state, povm, channel } => {
            let rho = inputs.state(&state)?;
            let povms = inputs.povm_list(&povm)?;
            let chan = channel.map(|c| inputs.load(&c, Channel::from_json)).transpose()?;
            let mut run = Run::new(&inputs, pick(CJ_TOL));
            let (spatial, temporal) = match chan {
                None => {
                    let s = SpatialScenario::new(rho, povms)?;
                    let t = spatial_to_temporal(&s)?;
                    (s, t)
                }
                Some(chan) => {
                    let mut rest = povms;
                    if rest.is_empty() {
                        return Err(Failure("--povm lists no measurements".into()));
                    }
                    let first = rest.remove(0);
                    let dims = rest.iter().map(Povm::dim).collect();
                    let t = TemporalScenario::new(QuantumEnsemble::new(rho, first)?, chan, dims, rest)?;
                    (temporal_to_spatial(&t)?, t)
                }
            };
            let gap = distribution_gap(&spatial.distribution()?, &temporal.distribution()?)?;
            run.push("verify-cj", gap, run.tol, gap <= run.tol, Value::Null);
            let back = temporal_to_spatial(&spatial_to_temporal(&spatial)?)?;
            let round = distribution_gap(&spatial.distribution()?, &back.distribution()?)?;
            let bound = 2.0 * run.tol;
            run.push("verify-cj-roundtrip", round, bound, round <= bound, Value::Null);
            run
        }
        Command::Broadcast { states, channel } => {
            let family = states.iter().map(|s| inputs.state(s)).collect::<Result<Vec<_>, _>>()?;
            let chan = channel.map(|c| inputs.load(&c, Channel::from_json)).transpose()?;
            match chan {
                Some(chan) => {
                    let mut run = Run::new(&inputs, pick(MARGINAL_TOL));
                    let check = check_broadcast(&family, &chan)?;
                    let pass = check.max_error <= run.tol;
                    run.push("broadcast-channel", check.max_error, run.tol, pass, json!({ "errors": check.errors }));
                    run
                }
                None => {
                    let mut run = Run::new(&inputs, pick(COMMUTE_TOL));
                    let worst = max_commutator(&family)?;
                    let interference = interference_flag(&family, run.tol)?;
                    run.push(
                        "broadcast-commuting",
                        worst,
                        run.tol,
                        !interference,
                        json!({ "interference": interference }),
                    );
                    if !interference {
                        let (_, check) = broadcast_commuting(&family, run.tol)?;
                        let pass = check.max_error <= MARGINAL_TOL;
                        run.push(
                            "broadcast-marginals",
                            check.max_error,
                            MARGINAL_TOL,
                            pass,
                            json!({ "errors": check.errors }),
                        );
                    }
                    run
                }
            }
        }
        Command::Theorem1 { src } => {
            let bx = inputs.correlation_box(&src)?;
            let mut run = Run::new(&inputs, pick(THEOREM1_TOL));
            let report = match theorem1_construct(&bx, &run.tol) {
                Ok((_, r)) => r,
                Err(gptw_core::Error::Precondition(_)) => {
                    let best = max_chsh(&bx, 0, 1)?;
                    let ext = broadcast_extension(&bx)?;
                    broadcast_report(&ext, best.settings.as_ref().expect("box settings"), &run.tol)?
                }
                Err(e) => return Err(e.into()),
            };
            let pass = report.squared_sum <= 8.0 + run.tol;
            run.push("theorem1", report.squared_sum, 8.0, pass, theorem1_details(&report));
            run
        }
        Command::Game { src, seed, rounds } => {
            let bx = inputs.correlation_box(&src)?;
            let mut run = Run::new(&inputs, pick(GAME_TOL));
            let r = if src.bx.is_some() {
                simulate_game(&bx, seed, rounds, run.tol)?
            } else {
                GameStrategy::new(bx)?.simulate(seed, rounds, run.tol)?
            };
            run.push_seeded("game", r.exact_rate, TSIRELSON_WIN, r.pass, Some(seed), game_details(&r));
            run
        }
        Command::Uncertainty { theory, m1, m2, m3 } => {
            let theory = inputs.theory(&theory)?;
            let mut run = Run::new(&inputs, pick(UNCERTAINTY_TOL));
            let (m1, m2) = (MeasId::from(m1), MeasId::from(m2));
            let r = check_finegrained(&theory, &m1, &m2, &run.tol)?;
            let mut details = json!({ "worst": r.worst, "cases": r.cases.len() });
            if let Some(m3) = m3 {
                let (prep, t) = harvest_triple(&theory, &m1, &m2, &MeasId::from(m3))?;
                details["harvested"] = json!({ "prep": prep, "triple": t, "win_probability": win_probability(&t) });
            }
            run.push("uncertainty", r.worst.value, r.bound, r.holds, details);
            run
        }
        Command::ValidateModel { model, theory } => {
            let model = inputs.load(&model, OnticModel::<f64>::from_json)?;
            let theory = theory.map(|t| inputs.theory(&t)).transpose()?;
            let mut run = Run::new(&inputs, pick(EPS_NORM));
            let violations = model.validate_within(&run.tol);
            let valid = violations.is_empty();
            run.push("validate-model", violations.len(), 0, valid, json!({ "violations": violations }));
            if let Some(theory) = theory {
                let dev = model.max_deviation_from(&theory)?;
                run.push("model-reproduces-theory", dev, run.tol, dev <= run.tol, Value::Null);
            }
            run
        }
        Command::Dim { theory, m1, m2 } => {
            let theory = inputs.theory(&theory)?;
            let mut run = Run::new(&inputs, pick(RANK_RTOL));
            let d = theory.affine_dimension_with(run.tol);
            let details = json!({ "claimed_dimension": d.claimed_dimension });
            run.push("dim", d.affine_parameter_count, d.claimed_dimension, d.claimed_dimension.is_some(), details);
            if let (Some(m1), Some(m2)) = (m1, m2) {
                let orth = theory.are_orthogonal(&MeasId::from(m1), &MeasId::from(m2))?;
                run.push("orthogonal", orth, true, orth, Value::Null);
            }
            run
        }
    };
    Ok(run.reports)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), |x| format!("{x:.9}")),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn print_pretty(reports: &[Report]) {
    println!("{:<24} {:>16} {:>16} {:>6} {:>10}", "check", "value", "bound", "pass", "tol");
    for r in reports {
        println!(
            "{:<24} {:>16} {:>16} {:>6} {:>10.1e}",
            r.check,
            cell(&r.value),
            cell(&r.bound),
            if r.pass { "yes" } else { "no" },
            r.tol
        );
    }
    if let Some(r) = reports.first() {
        println!("digest {}", r.digest);
    }
}

fn main() -> ExitCode {
    let Cli { common, command } = Cli::parse();
    match execute(command, common.tol) {
        Ok(reports) => {
            if common.pretty {
                print_pretty(&reports);
            } else {
                for r in &reports {
                    println!("{}", serde_json::to_string(r).expect("report serializes"));
                }
            }
            if reports.iter().all(|r| r.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure(msg)) => {
            eprintln!("gptw: {msg}");
            ExitCode::from(2)
        }
    }
}
