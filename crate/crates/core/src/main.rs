//! Command-line front end: reproducible JSON/CSV tables and verification
//! reports over the thermodynamic solver and the exponent machinery.

use clap::{Args, Parser, Subcommand, ValueEnum};
use critical_ff::asymptotics::asymptotic_table_with_band;
use critical_ff::combinatorics::{magic_sum_bruteforce, magic_sum_closed, mehta_closed};
use critical_ff::edge::{dsf_edge, spectral_edge, EdgeResult, SpectralBranch};
use critical_ff::excitations::{
    delta_exponent, shift_data, theta_exponent, Correlator, ExcitationClass,
};
use critical_ff::finitesize::{
    build_excited_qn, excitation_data, solve_bethe, verify_shift_scaling, QuantumNumbers,
};
use critical_ff::quad::gauss_legendre;
use critical_ff::thermo::{
    build_thermo_state, build_thermo_state_from_density, ModelParams, ThermoSnapshot, ThermoState,
    SCHEMA_VERSION,
};
use critical_ff::{Error, Result};
use num_complex::Complex64;
use serde_json::{json, Map, Value};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_VALIDATION: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_CHECK_FAILED: u8 = 4;
const EXIT_IO: u8 = 5;

const NODES_ENV: &str = "CRITICAL_FF_NODES";
const DEFAULT_NODES: usize = 128;

#[derive(Parser)]
#[command(name = "critical-ff", version, about = "Exponent and threshold tables for the 1D Bose gas", long_about = None)]
struct Cli {
    /// Optional key=value config file, merged below command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ModelArgs {
    /// Coupling constant c > 0.
    #[arg(long)]
    c: Option<f64>,
    /// Chemical potential h > 0 (default 1 unless --density is given).
    #[arg(long)]
    h: Option<f64>,
    /// Fix the gas density D instead of h.
    #[arg(long, conflicts_with = "h")]
    density: Option<f64>,
    /// Quadrature nodes; CRITICAL_FF_NODES overrides the default.
    #[arg(long)]
    n_nodes: Option<usize>,
    /// Reuse a state snapshot produced by `thermo` instead of re-solving.
    #[arg(long, conflicts_with_all = ["c", "h", "density"])]
    state: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CorrelatorArg {
    /// psi(x, t) psi^dagger(0, 0)
    Field,
    /// psi^dagger(x, t) psi(0, 0)
    FieldConj,
    Density,
}

impl CorrelatorArg {
    fn to_lib(self) -> Correlator {
        match self {
            CorrelatorArg::Field => Correlator::FieldPsiPsidag,
            CorrelatorArg::FieldConj => Correlator::FieldPsidagPsi,
            CorrelatorArg::Density => Correlator::Density,
        }
    }
    fn name(self) -> &'static str {
        match self {
            CorrelatorArg::Field => "field",
            CorrelatorArg::FieldConj => "field-conj",
            CorrelatorArg::Density => "density",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Particle,
    Hole,
    AntiParticle,
    AntiHole,
}

impl BranchArg {
    fn to_lib(self) -> SpectralBranch {
        match self {
            BranchArg::Particle => SpectralBranch::Particle,
            BranchArg::Hole => SpectralBranch::Hole,
            BranchArg::AntiParticle => SpectralBranch::AntiParticle,
            BranchArg::AntiHole => SpectralBranch::AntiHole,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the ground-state integral equations and emit the state.
    Thermo {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Check the exact thermodynamic identities against a tolerance.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Critical-exponent table over excitation classes (n0, ell).
    Exponents {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = CorrelatorArg::Field)]
        correlator: CorrelatorArg,
        /// +1 space-like, -1 time-like.
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        tau: i32,
        /// Separated-excitation rapidity; default 2q (tau=+1) or 0 (tau=-1).
        #[arg(long, allow_hyphen_values = true)]
        lambda0: Option<f64>,
        #[arg(long, default_value_t = 1)]
        n0_max: u32,
        #[arg(long, default_value_t = 1)]
        ell_max: u32,
    },
    /// Ranked harmonics of the long-distance/time expansion at fixed (x, t).
    Asymptotics {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = CorrelatorArg::Field)]
        correlator: CorrelatorArg,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 1)]
        n0_max: u32,
        #[arg(long, default_value_t = 1)]
        ell_max: u32,
        /// Relative exclusion band around |x/t| = v_F.
        #[arg(long, default_value_t = critical_ff::asymptotics::DEFAULT_EXCLUSION_BAND)]
        band: f64,
    },
    /// Edge exponents and coefficients at excitation thresholds.
    Edge {
        #[command(flatten)]
        model: ModelArgs,
        /// Threshold rapidity; repeat the flag for a sweep.
        #[arg(long, required = true, allow_hyphen_values = true)]
        lambda: Vec<f64>,
        /// dsf: density structure factor; spectral: spectral function.
        #[arg(long, default_value = "dsf")]
        observable: String,
        /// Spectral branch (ignored for dsf).
        #[arg(long, value_enum, default_value_t = BranchArg::Particle)]
        branch: BranchArg,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
    },
    /// Finite-L Bethe spectrum of one excited state over the ground state.
    FiniteSize {
        #[arg(long)]
        c: Option<f64>,
        /// System length.
        #[arg(long)]
        l: f64,
        /// Particle number of the ground state.
        #[arg(long)]
        n: usize,
        /// Twist angle.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        /// Particle quantum numbers outside 1..=n, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        particles: Vec<i64>,
        /// Hole quantum numbers inside 1..=n, comma-separated.
        #[arg(long, value_delimiter = ',')]
        holes: Vec<i64>,
        #[arg(long)]
        n_nodes: Option<usize>,
    },
    /// Run the built-in numeric oracles; exit 0 when all pass.
    Selfcheck {
        #[arg(long)]
        n_nodes: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.config.as_deref().map(read_config).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
    };
    match run(&cli, &cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Domain(_) | Error::Argument(_) | Error::Config(_) => EXIT_VALIDATION,
        Error::Io(_) | Error::Serde(_) => EXIT_IO,
        _ => EXIT_SOLVER,
    }
}

/// key = value lines; '#' comments; later lines win.
fn read_config(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(Error::Io)?;
    let mut map = HashMap::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("config line without '=': {line:?}"))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn cfg_f64(cfg: &HashMap<String, String>, key: &str) -> Result<Option<f64>> {
    cfg.get(key)
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("config key {key}: bad number {v:?}")))
        })
        .transpose()
}

fn resolve_nodes(flag: Option<usize>, cfg: &HashMap<String, String>) -> Result<usize> {
    if let Some(n) = flag {
        return Ok(n);
    }
    if let Ok(v) = std::env::var(NODES_ENV) {
        return v
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("{NODES_ENV}: bad node count {v:?}")));
    }
    if let Some(v) = cfg.get("n_nodes") {
        return v
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("config key n_nodes: bad value {v:?}")));
    }
    Ok(DEFAULT_NODES)
}

/// Build (or load) the thermodynamic state and the resolved-config record.
fn resolve_state(model: &ModelArgs, cfg: &HashMap<String, String>) -> Result<(ThermoState, Value)> {
    if let Some(path) = &model.state {
        let text = std::fs::read_to_string(path).map_err(Error::Io)?;
        let doc: Value = serde_json::from_str(&text).map_err(Error::Serde)?;
        let snap_value = doc
            .get("data")
            .and_then(|d| d.get("snapshot"))
            .cloned()
            .unwrap_or(doc);
        let snap: ThermoSnapshot =
            serde_json::from_value(snap_value).map_err(Error::Serde)?;
        let state = ThermoState::from_snapshot(&snap)?;
        let config = json!({
            "state_file": path.display().to_string(),
            "c": state.params.c,
            "h": state.params.h,
            "n_nodes": state.grid.len(),
        });
        return Ok((state, config));
    }
    let c = model
        .c
        .or(cfg_f64(cfg, "c")?)
        .ok_or_else(|| Error::Config("missing required parameter --c".into()))?;
    let n_nodes = resolve_nodes(model.n_nodes, cfg)?;
    let density = model.density.or(cfg_f64(cfg, "density")?);
    if let Some(d) = density {
        if model.h.is_some() {
            return Err(Error::Config("--h and --density are exclusive".into()));
        }
        let state = build_thermo_state_from_density(c, d, n_nodes)?;
        let config = json!({"c": c, "density": d, "h": state.params.h, "n_nodes": n_nodes});
        return Ok((state, config));
    }
    let h = model.h.or(cfg_f64(cfg, "h")?).unwrap_or(1.0);
    let state = build_thermo_state(ModelParams::new(c, h)?, n_nodes)?;
    let config = json!({"c": c, "h": h, "n_nodes": n_nodes});
    Ok((state, config))
}

/// One command's output: JSON payload plus an optional flat table for CSV.
struct Output {
    config: Value,
    data: Value,
    table: Option<(Vec<String>, Vec<Vec<String>>)>,
}

fn fmt_num(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| "null".into())
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn emit(cli: &Cli, out: &Output) -> Result<()> {
    let text = match cli.format {
        Format::Json => {
            let doc = json!({
                "schema": SCHEMA_VERSION,
                "generated_unix": timestamp(),
                "config": out.config,
                "data": out.data,
            });
            let mut s =
                serde_json::to_string_pretty(&doc).map_err(Error::Serde)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            s.push_str(&format!("# schema={SCHEMA_VERSION}\n"));
            s.push_str(&format!("# generated_unix={}\n", timestamp()));
            s.push_str(&format!(
                "# config={}\n",
                serde_json::to_string(&out.config).map_err(Error::Serde)?
            ));
            let (header, rows) = match &out.table {
                Some(t) => t.clone(),
                None => flatten_to_table(&out.data),
            };
            s.push_str(&header.join(","));
            s.push('\n');
            for row in rows {
                s.push_str(&row.join(","));
                s.push('\n');
            }
            s
        }
    };
    match &cli.output {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            // atomic: write beside the target, then rename over it
            let tmp = path.with_extension("tmp");
            std::fs::write(&tmp, text).map_err(Error::Io)?;
            std::fs::rename(&tmp, path).map_err(Error::Io)
        }
    }
}

/// key,value rows for scalar payloads without a natural table shape.
fn flatten_to_table(data: &Value) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rows = Vec::new();
    fn walk(prefix: &str, v: &Value, rows: &mut Vec<Vec<String>>) {
        match v {
            Value::Object(m) => {
                for (k, v) in m {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, v, rows);
                }
            }
            Value::Array(a) => {
                for (i, v) in a.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), v, rows);
                }
            }
            other => rows.push(vec![prefix.to_string(), other.to_string()]),
        }
    }
    walk("", data, &mut rows);
    (vec!["key".into(), "value".into()], rows)
}

fn run(cli: &Cli, cfg: &HashMap<String, String>) -> Result<ExitCode> {
    match &cli.cmd {
        Cmd::Thermo { model } => {
            let (state, config) = resolve_state(model, cfg)?;
            let report = state.verify_identities()?;
            let out = Output {
                config,
                data: json!({
                    "q": state.q,
                    "k_f": state.k_f,
                    "v_f": state.v_f,
                    "z_fermi": state.z_fermi,
                    "density": state.density,
                    "identity_residual": report.max_residual(),
                    "snapshot": state.snapshot(),
                }),
                table: None,
            };
            emit(cli, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { model, tol } => {
            let (state, config) = resolve_state(model, cfg)?;
            let report = state.verify_identities()?;
            let velocity = state.verify_velocity_monotone(-3.0 * state.q, 3.0 * state.q, 128);
            let pass = report.max_residual() <= *tol && velocity.is_ok();
            let out = Output {
                config,
                data: json!({
                    "tol": tol,
                    "identities": report,
                    "max_residual": report.max_residual(),
                    "velocity_monotone": velocity.is_ok(),
                    "pass": pass,
                }),
                table: None,
            };
            emit(cli, &out)?;
            Ok(if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILED)
            })
        }
        Cmd::Exponents {
            model,
            correlator,
            tau,
            lambda0,
            n0_max,
            ell_max,
        } => {
            let (state, mut config) = resolve_state(model, cfg)?;
            let lam0 = lambda0.unwrap_or(if *tau >= 0 { 2.0 * state.q } else { 0.0 });
            let corr = correlator.to_lib();
            if let Value::Object(m) = &mut config {
                m.insert("correlator".into(), json!(correlator.name()));
                m.insert("tau".into(), json!(tau));
                m.insert("lambda0".into(), json!(lam0));
            }
            let mut rows = Vec::new();
            for n0 in 0..=*n0_max {
                for ell in -(*ell_max as i64)..=*ell_max as i64 {
                    let cls = ExcitationClass::new(*tau, n0, ell, corr.delta_n(), 0.0, lam0)?;
                    let sd = shift_data(&state, &cls)?;
                    let a = sd.a_exponent(&cls);
                    let b = sd.b_exponent(&cls);
                    rows.push(json!({
                        "n0": n0,
                        "ell": ell,
                        "tau": tau,
                        "a": a,
                        "b": b,
                        "theta": theta_exponent(&sd, &cls),
                        "delta": delta_exponent(&sd, &cls, corr)?,
                    }));
                }
            }
            rows.sort_by(|u, v| {
                let du = u["delta"].as_f64().unwrap();
                let dv = v["delta"].as_f64().unwrap();
                du.partial_cmp(&dv)
                    .unwrap()
                    .then(u["n0"].as_u64().cmp(&v["n0"].as_u64()))
                    .then(u["ell"].as_i64().cmp(&v["ell"].as_i64()))
            });
            let header: Vec<String> = ["n0", "ell", "tau", "a", "b", "theta", "delta"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let table = rows
                .iter()
                .map(|r| {
                    header
                        .iter()
                        .map(|k| match &r[k.as_str()] {
                            Value::Number(n) => n.to_string(),
                            other => other.to_string(),
                        })
                        .collect()
                })
                .collect();
            let out = Output {
                config,
                data: json!({"lambda0": lam0, "rows": rows}),
                table: Some((header, table)),
            };
            emit(cli, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Asymptotics {
            model,
            correlator,
            x,
            t,
            n0_max,
            ell_max,
            band,
        } => {
            let (state, mut config) = resolve_state(model, cfg)?;
            if let Value::Object(m) = &mut config {
                m.insert("correlator".into(), json!(correlator.name()));
                m.insert("x".into(), json!(x));
                m.insert("t".into(), json!(t));
                m.insert("band".into(), json!(band));
            }
            let terms = asymptotic_table_with_band(
                &state,
                correlator.to_lib(),
                *x,
                *t,
                *n0_max,
                *ell_max,
                &HashMap::new(),
                *band,
            )?;
            let rows: Vec<Value> = terms
                .iter()
                .map(|term| {
                    json!({
                        "kind": term.kind,
                        "n0": term.n0,
                        "ell": term.ell,
                        "tau": term.tau,
                        "lambda0": term.lambda0,
                        "harmonic_momentum": term.harmonic_momentum,
                        "harmonic_energy": term.harmonic_energy,
                        "exponents": {
                            "plus": term.exp_plus,
                            "minus": term.exp_minus,
                            "saddle": term.exp_saddle,
                            "total": term.total_exponent(),
                        },
                        "phase": term.phase,
                        "prefactor": term.prefactor,
                        "amplitude_source": term.amplitude_source,
                    })
                })
                .collect();
            let header: Vec<String> = [
                "kind",
                "n0",
                "ell",
                "tau",
                "lambda0",
                "harmonic_momentum",
                "harmonic_energy",
                "exp_plus",
                "exp_minus",
                "exp_saddle",
                "exp_total",
                "phase",
                "prefactor",
                "amplitude_source",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            let table = terms
                .iter()
                .map(|term| {
                    vec![
                        format!("{:?}", term.kind),
                        term.n0.to_string(),
                        term.ell.to_string(),
                        term.tau.to_string(),
                        fmt_num(term.lambda0),
                        fmt_num(term.harmonic_momentum),
                        fmt_num(term.harmonic_energy),
                        fmt_num(term.exp_plus),
                        fmt_num(term.exp_minus),
                        fmt_num(term.exp_saddle),
                        fmt_num(term.total_exponent()),
                        fmt_num(term.phase),
                        fmt_num(term.prefactor),
                        term.amplitude_source.clone(),
                    ]
                })
                .collect();
            let out = Output {
                config,
                data: json!({"rows": rows}),
                table: Some((header, table)),
            };
            emit(cli, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Edge {
            model,
            lambda,
            observable,
            branch,
            amplitude,
        } => {
            let (state, mut config) = resolve_state(model, cfg)?;
            if let Value::Object(m) = &mut config {
                m.insert("observable".into(), json!(observable));
                m.insert("amplitude".into(), json!(amplitude));
            }
            let results: Result<Vec<EdgeResult>> = lambda
                .iter()
                .map(|&lam| match observable.as_str() {
                    "dsf" => dsf_edge(&state, lam, *amplitude),
                    "spectral" => spectral_edge(&state, lam, branch.to_lib(), *amplitude),
                    other => Err(Error::Argument(format!(
                        "unknown observable {other:?}; expected dsf or spectral"
                    ))),
                })
                .collect();
            let results = results?;
            let header: Vec<String> = [
                "branch",
                "lambda",
                "k",
                "eps",
                "v",
                "alpha_plus",
                "alpha_minus",
                "edge_exponent",
                "coefficient_above",
                "coefficient_below",
                "degenerate",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            let table = results
                .iter()
                .map(|r| {
                    vec![
                        r.branch.clone(),
                        fmt_num(r.lambda),
                        fmt_num(r.k),
                        fmt_num(r.eps),
                        fmt_num(r.v),
                        fmt_num(r.alpha_plus),
                        fmt_num(r.alpha_minus),
                        fmt_num(r.edge_exponent),
                        fmt_num(r.coefficient_above),
                        fmt_num(r.coefficient_below),
                        r.degenerate.to_string(),
                    ]
                })
                .collect();
            let out = Output {
                config,
                data: json!({"rows": results}),
                table: Some((header, table)),
            };
            emit(cli, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::FiniteSize {
            c,
            l,
            n,
            alpha,
            particles,
            holes,
            n_nodes,
        } => {
            let c = c
                .or(cfg_f64(cfg, "c")?)
                .ok_or_else(|| Error::Config("missing required parameter --c".into()))?;
            let nodes = resolve_nodes(*n_nodes, cfg)?;
            let config = json!({
                "c": c, "l": l, "n": n, "alpha": alpha,
                "particles": particles, "holes": holes, "n_nodes": nodes,
            });
            let ground = solve_bethe(c, *l, &QuantumNumbers::ground(*n), *alpha)?;
            let mut data = Map::new();
            data.insert("ground_residual".into(), json!(ground.max_residual()));
            data.insert("ground_momentum".into(), json!(ground.momentum()));
            if !particles.is_empty() || !holes.is_empty() {
                let qn = build_excited_qn(*n, particles, holes)?;
                let excited = solve_bethe(c, *l, &qn, *alpha)?;
                let thermo = build_thermo_state_from_density(c, *n as f64 / l, nodes)?;
                let exc = excitation_data(&ground, &excited, &thermo)?;
                data.insert("excited_residual".into(), json!(excited.max_residual()));
                data.insert("excitation".into(), json!(exc));
                data.insert(
                    "pex_quantum".into(),
                    json!(exc.pex * l / (2.0 * PI)),
                );
                if *alpha == 0.0 {
                    let report = verify_shift_scaling(c, *l, *n, particles, holes, &thermo)?;
                    data.insert("shift_scaling".into(), json!(report));
                }
            }
            let out = Output {
                config,
                data: Value::Object(data),
                table: None,
            };
            emit(cli, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Selfcheck { n_nodes } => {
            let nodes = resolve_nodes(*n_nodes, cfg)?;
            let checks = selfcheck(nodes)?;
            let pass = checks.iter().all(|c| c.1);
            for (name, ok, detail) in &checks {
                println!("{} {name} ({detail})", if *ok { "ok  " } else { "FAIL" });
            }
            let rows: Vec<Value> = checks
                .iter()
                .map(|(name, ok, detail)| json!({"name": name, "pass": ok, "detail": detail}))
                .collect();
            let out = Output {
                config: json!({"n_nodes": nodes}),
                data: json!({"checks": rows, "pass": pass}),
                table: None,
            };
            if cli.output.is_some() {
                emit(cli, &out)?;
            }
            Ok(if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILED)
            })
        }
    }
}

type Check = (String, bool, String);

fn selfcheck(nodes: usize) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    // exact thermodynamic identities at two couplings
    for c in [1.0, 4.0] {
        let state = build_thermo_state(ModelParams::new(c, 1.0)?, nodes.max(64))?;
        let res = state.verify_identities()?.max_residual();
        checks.push((
            format!("identities c={c}"),
            res <= 1e-8,
            format!("max residual {res:.3e}"),
        ));
    }

    // free-fermion degeneration
    {
        let state = build_thermo_state(ModelParams::new(1e6, 1.0)?, nodes.max(64))?;
        let dq = (state.q - 1.0).abs();
        let dz = (state.z_fermi - 1.0).abs();
        checks.push((
            "free-fermion limit".into(),
            dq <= 1e-4 && dz <= 1e-5,
            format!("|q-1|={dq:.3e} |Z-1|={dz:.3e}"),
        ));
    }

    // closed-form summation identity against brute force
    for (w, f, r) in [
        (Complex64::new(0.4, 0.2), 0.3, -1i64),
        (Complex64::new(-0.3, 0.35), -0.45, 1),
        (Complex64::new(0.1, -0.5), 0.8, 0),
    ] {
        let closed = magic_sum_closed(w, f, r)?;
        let brute = magic_sum_bruteforce(w, f, r, 40)?;
        let err = (closed - brute.value).norm();
        let tol = f64::max(1e-8, 3.0 * brute.truncation_bound);
        checks.push((
            format!("summation identity r={r}"),
            err <= tol,
            format!("|closed-brute|={err:.3e} tol {tol:.3e}"),
        ));
    }

    // Gaussian Vandermonde integral against tensor quadrature
    {
        let (s, rho0): (f64, f64) = (1.7, 0.8);
        let lim = 10.0 / s.sqrt();
        let g1 = gauss_legendre(200, -lim, lim)?;
        let num1: f64 = g1
            .nodes
            .iter()
            .zip(&g1.weights)
            .map(|(&m, &w)| w * rho0 * (-s * m * m / 2.0).exp())
            .sum();
        let c1 = mehta_closed(1, s, rho0)?;
        checks.push((
            "gaussian integral n0=1".into(),
            (num1 - c1).abs() <= 1e-6 * c1.abs(),
            format!("closed {c1:.6e} numeric {num1:.6e}"),
        ));
        let g2 = gauss_legendre(160, -lim, lim)?;
        let mut num2 = 0.0;
        for (&m1, &w1) in g2.nodes.iter().zip(&g2.weights) {
            for (&m2, &w2) in g2.nodes.iter().zip(&g2.weights) {
                let v = m1 - m2;
                num2 += w1
                    * w2
                    * v
                    * v
                    * rho0
                    * rho0
                    * (-s * (m1 * m1 + m2 * m2) / 2.0).exp();
            }
        }
        num2 /= 2.0;
        let c2 = mehta_closed(2, s, rho0)?;
        checks.push((
            "gaussian integral n0=2".into(),
            (num2 - c2).abs() <= 1e-6 * c2.abs(),
            format!("closed {c2:.6e} numeric {num2:.6e}"),
        ));
    }

    // closed-form oscillatory kernel against the regularized line integral
    for (alpha, b) in [(0.7, 1.3), (1.4, 0.6)] {
        let closed = critical_ff::edge::fourier_kernel(alpha, b)?;
        let numeric = kernel_line_integral(alpha, b);
        let err = (closed - numeric).abs() / closed.abs().max(1.0);
        checks.push((
            format!("fourier kernel a={alpha}"),
            err <= 1e-3,
            format!("closed {closed:.6e} numeric {numeric:.6e}"),
        ));
    }

    Ok(checks)
}

/// eta-regularized numeric line integral of the oscillatory kernel; graded
/// mesh near the origin, Aitken-accelerated half-period tail.
fn kernel_line_integral(alpha: f64, b: f64) -> f64 {
    let eta = 1e-3;
    let f = |psi: f64| -> Complex64 {
        let z = Complex64::new(2.0 * PI * eta, 2.0 * PI * psi);
        (Complex64::new(0.0, b * psi) - alpha * z.ln()).exp()
    };
    let simpson = |a: f64, c: f64| -> Complex64 {
        let n = 64;
        let h = (c - a) / n as f64;
        let mut s = f(a) + f(c);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + k as f64 * h);
        }
        s * h / 3.0
    };
    let x0 = 40.0 / b;
    let mut core = Complex64::new(0.0, 0.0);
    let (mut lo, mut hi) = (0.0, eta);
    while lo < 2.0_f64.min(x0) {
        core += simpson(lo, hi.min(x0));
        lo = hi;
        hi *= 2.0;
    }
    if lo < x0 {
        let n = 200;
        for k in 0..n {
            let a = lo + (x0 - lo) * k as f64 / n as f64;
            core += simpson(a, lo + (x0 - lo) * (k + 1) as f64 / n as f64);
        }
    }
    let half = PI / b;
    let mut acc = core;
    let mut partials = Vec::new();
    for k in 0..60 {
        acc += simpson(x0 + k as f64 * half, x0 + (k + 1) as f64 * half);
        partials.push(acc);
    }
    let mut seq = partials;
    for _ in 0..8 {
        if seq.len() < 3 {
            break;
        }
        let mut next = Vec::with_capacity(seq.len() - 2);
        for w in seq.windows(3) {
            let denom = w[2] - 2.0 * w[1] + w[0];
            next.push(if denom.norm() < 1e-30 {
                w[2]
            } else {
                w[2] - (w[2] - w[1]) * (w[2] - w[1]) / denom
            });
        }
        seq = next;
    }
    2.0 * seq.last().unwrap().re * (eta * b).exp()
}
