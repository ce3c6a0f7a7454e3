//! Command-line driver: scenario loading, experiment execution, and
//! machine-readable output.
//!
//! Exit codes partition the failure modes: 2 parse/validation, 3 solver
//! non-convergence, 4 bound violation, 5 capacity exceeded.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use negentropy_core::decoupling::sample_decoupling;
use negentropy_core::entropy;
use negentropy_core::protocol::{
    build_scenario, ktln2_joules, run_erasure, run_extraction, work_cost_rate, Scenario,
    ScenarioSpec,
};
use negentropy_core::thermo::{erase_mixed, extract_work_pure, Battery, WorkLedger};
use negentropy_core::CoreError;

const EXIT_PARSE: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_BOUND: u8 = 4;
const EXIT_CAPACITY: u8 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Entropy reports (vN, min, max; smoothed when ε > 0) for the
    /// scenario's S|O split.
    Entropy,
    /// Quasistatic erasure of the scenario's system qubits (fully mixed
    /// start); emits the work ledger.
    Erase,
    /// Quasistatic work extraction from a pure system register; emits the
    /// work ledger.
    Extract,
    /// Random-unitary decoupling experiment; emits the sampling result.
    Decouple,
    /// Full erasure pipeline with bound checks; emits the transcript.
    Protocol,
    /// Per-copy smoothed max-entropy rates over the scenario's copy list.
    Aep,
    /// Per-copy net work over the scenario's copy list.
    Rate,
}

#[derive(Parser, Debug)]
#[command(
    name = "negentropy",
    about = "Conditional-entropy erasure experiments: entropies, decoupling, and heat-bath work accounting"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Scenario description file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Seed for randomized commands (required by decouple and protocol).
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario's unitary sample count.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            if let Err(e) = emit(&cli.out, &output) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(EXIT_PARSE);
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: msg.into(),
        }
    }
}

fn core_failure(err: CoreError) -> Failure {
    let code = match &err {
        CoreError::SolverFailure { .. } => EXIT_SOLVER,
        CoreError::CapacityExceeded { .. } => EXIT_CAPACITY,
        _ => EXIT_PARSE,
    };
    Failure {
        code,
        message: err.to_string(),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())
        }
    }
}

fn load_scenario(cli: &Cli) -> Result<(ScenarioSpec, Scenario), Failure> {
    let raw = std::fs::read_to_string(&cli.scenario)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", cli.scenario.display())))?;
    let mut spec: ScenarioSpec = serde_json::from_str(&raw)
        .map_err(|e| Failure::parse(format!("scenario parse error: {e}")))?;
    if let Some(samples) = cli.samples {
        if samples == 0 {
            return Err(Failure::parse("samples must be ≥ 1"));
        }
        spec.samples = samples;
    }
    let scenario = build_scenario(&spec).map_err(core_failure)?;
    Ok((spec, scenario))
}

fn require_seed(cli: &Cli) -> Result<u64, Failure> {
    cli.seed
        .ok_or_else(|| Failure::parse("this command is randomized: --seed is required"))
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let (spec, scn) = load_scenario(cli)?;
    match cli.command {
        Command::Entropy => cmd_entropy(cli, &scn),
        Command::Erase => cmd_ledger(cli, &scn, true),
        Command::Extract => cmd_ledger(cli, &scn, false),
        Command::Decouple => cmd_decouple(cli, &scn),
        Command::Protocol => cmd_protocol(cli, &scn),
        Command::Aep => cmd_aep(cli, &spec, &scn),
        Command::Rate => cmd_rate(cli, &spec, &scn),
    }
}

fn cmd_entropy(cli: &Cli, scn: &Scenario) -> Result<String, Failure> {
    let rho = scn.global.to_density();
    let vn = entropy::conditional_von_neumann(&rho, &scn.layout, &["S"], &["O"])
        .map_err(core_failure)?;
    let hmin = entropy::hmin(&rho, &scn.layout, &["S"], &["O"]).map_err(core_failure)?;
    let hmax = entropy::hmax(&rho, &scn.layout, &["S"], &["O"]).map_err(core_failure)?;
    let mut body = serde_json::json!({
        "vn": vn.value,
        "hmin": hmin.value,
        "hmax": hmax.value,
        "reports": {
            "vn": vn,
            "hmin": hmin,
            "hmax": hmax,
        },
    });
    if scn.epsilon > 0.0 {
        let smooth = entropy::hmax_smooth(&rho, &scn.layout, &["S"], &["O"], scn.epsilon)
            .map_err(core_failure)?;
        body["hmax_smooth"] = serde_json::json!(smooth.value);
        body["reports"]["hmax_smooth"] = serde_json::json!(smooth);
    }
    match cli.format {
        Format::Json => to_json(&body),
        Format::Csv => {
            let mut s = String::from("quantity,value_bits\n");
            s.push_str(&format!("vn,{}\n", vn.value));
            s.push_str(&format!("hmin,{}\n", hmin.value));
            s.push_str(&format!("hmax,{}\n", hmax.value));
            Ok(s)
        }
    }
}

fn ledger_output(cli: &Cli, ledger: &WorkLedger, extra: serde_json::Value) -> Result<String, Failure> {
    match cli.format {
        Format::Csv => Ok(ledger.to_csv()),
        Format::Json => {
            let mut body = serde_json::json!({ "ledger": ledger });
            if let serde_json::Value::Object(map) = extra {
                for (k, v) in map {
                    body[k] = v;
                }
            }
            to_json(&body)
        }
    }
}

fn cmd_ledger(cli: &Cli, scn: &Scenario, erase: bool) -> Result<String, Failure> {
    let qubits = scn.qubits;
    let battery = Battery::default();
    let (total_label, ledger) = if erase {
        let (_, _, ledger) = erase_mixed(qubits, &scn.schedule, battery).map_err(core_failure)?;
        ("work_cost_ktln2", ledger)
    } else {
        let (_, _, ledger) =
            extract_work_pure(qubits, &scn.schedule, battery).map_err(core_failure)?;
        ("work_extracted_ktln2", ledger)
    };
    let signed_total = if erase { ledger.total } else { -ledger.total };
    let mut extra = serde_json::json!({
        "qubits": qubits,
        total_label: signed_total,
    });
    if let Some(t) = scn.temperature_kelvin {
        extra["work_joules"] = serde_json::json!(signed_total * ktln2_joules(t));
    }
    ledger_output(cli, &ledger, extra)
}

fn cmd_decouple(cli: &Cli, scn: &Scenario) -> Result<String, Failure> {
    let seed = require_seed(cli)?;
    let n = scn
        .layout
        .block_qubits("S")
        .map_err(core_failure)?;
    let delta_prime = scn.delta * scn.delta / 2.0;
    // descending search for the largest size whose best sample clears δ′
    let mut accepted = None;
    for m in (0..=n).rev() {
        let result = sample_decoupling(&scn.global, &scn.layout, m, scn.samples, seed)
            .map_err(core_failure)?;
        if result.distance <= delta_prime + 1e-12 || m == 0 {
            accepted = Some(result);
            break;
        }
    }
    let result = accepted.expect("m = 0 always terminates the search");
    match cli.format {
        Format::Json => to_json(&serde_json::json!({
            "delta_prime": delta_prime,
            "result": result,
        })),
        Format::Csv => {
            let mut s =
                String::from("m,unitary_seed,distance,bound,samples,mean_distance,std_error\n");
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                result.m,
                result.unitary_seed,
                result.distance,
                result.bound,
                result.samples,
                result.mean_distance,
                result.std_error
            ));
            Ok(s)
        }
    }
}

fn cmd_protocol(cli: &Cli, scn: &Scenario) -> Result<String, Failure> {
    let seed = require_seed(cli)?;
    let erasure = run_erasure(scn, seed).map_err(core_failure)?;
    let extraction = run_extraction(scn, seed).map_err(core_failure)?;
    let body = serde_json::json!({
        "erasure": erasure,
        "extraction": extraction,
    });
    let rendered = to_json(&body)?;
    if !erasure.bound_satisfied {
        eprintln!(
            "bound violated: net_work = {} > hmax + Delta = {} (+ tolerance {})",
            erasure.net_work, erasure.bound, erasure.discretization_tolerance
        );
        return Err(Failure {
            code: EXIT_BOUND,
            message: "erasure work bound violated".into(),
        });
    }
    if !extraction.bound_satisfied {
        eprintln!(
            "bound violated: extracted work {} < n - hmax - Delta = {} (- tolerance {})",
            -extraction.net_work, extraction.bound, extraction.discretization_tolerance
        );
        return Err(Failure {
            code: EXIT_BOUND,
            message: "extraction work bound violated".into(),
        });
    }
    Ok(rendered)
}

fn copies_of(spec: &ScenarioSpec) -> Vec<usize> {
    spec.copies.clone().unwrap_or_else(|| vec![10, 25, 50])
}

fn cmd_aep(cli: &Cli, spec: &ScenarioSpec, scn: &Scenario) -> Result<String, Failure> {
    let rho = scn.global.to_density();
    let target = entropy::conditional_von_neumann(&rho, &scn.layout, &["S"], &["O"])
        .map_err(core_failure)?
        .value;
    let mut rows = Vec::new();
    for n in copies_of(spec) {
        let rate = entropy::aep_rate(&rho, &scn.layout, &["S"], &["O"], n, scn.epsilon)
            .map_err(core_failure)?;
        rows.push((n, rate));
    }
    match cli.format {
        Format::Csv => {
            let mut s = String::from("n,rate,target\n");
            for (n, rate) in rows {
                s.push_str(&format!("{n},{rate},{target}\n"));
            }
            Ok(s)
        }
        Format::Json => to_json(&serde_json::json!({
            "target": target,
            "rows": rows.iter().map(|(n, r)| serde_json::json!({"n": n, "rate": r})).collect::<Vec<_>>(),
        })),
    }
}

fn cmd_rate(cli: &Cli, spec: &ScenarioSpec, scn: &Scenario) -> Result<String, Failure> {
    let rows = work_cost_rate(scn, &copies_of(spec)).map_err(core_failure)?;
    match cli.format {
        Format::Csv => {
            let mut s = String::from("n,work_per_copy_ktln2\n");
            for (n, w) in rows {
                s.push_str(&format!("{n},{w}\n"));
            }
            Ok(s)
        }
        Format::Json => {
            let joules = scn.temperature_kelvin.map(ktln2_joules);
            let rendered: Vec<serde_json::Value> = rows
                .iter()
                .map(|(n, w)| {
                    let mut row = serde_json::json!({"n": n, "work_per_copy_ktln2": w});
                    if let Some(j) = joules {
                        row["work_per_copy_joules"] = serde_json::json!(w * j);
                    }
                    row
                })
                .collect();
            to_json(&serde_json::json!({ "rows": rendered }))
        }
    }
}

fn to_json(v: &serde_json::Value) -> Result<String, Failure> {
    serde_json::to_string_pretty(v)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Failure::parse(format!("serialization error: {e}")))
}
