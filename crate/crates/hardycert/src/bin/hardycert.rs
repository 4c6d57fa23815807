//! Batch front end: criteria evaluation, oracle runs, verification sweeps
//! and covering-sequence reports over JSON problem specs.
//!
//! Exit codes: 0 pass, 1 property violation, 2 input error, 3 invariant
//! violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use hardycert::criteria::{criteria_constant, kernel_sum, ProblemInstance};
use hardycert::discretization::covering_sequence;
use hardycert::gen::gen_random_instance;
use hardycert::oracle::{
    estimate_constant, lhs_eval_kernel, lhs_eval_supremal, AtomicFunction, GridSpec, OracleBudget,
};
use hardycert::quad::QuadEngine;
use hardycert::spec_io::{
    criteria_report_json, ext_num, oracle_result_json, partition_json, InstanceSpec, RegimeSpec,
    VerifyConfig,
};

#[derive(Parser)]
#[command(name = "hardycert", version, about = "Decide and quantify weighted iterated Hardy-type inequalities")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate all criterion functionals for a problem spec.
    Criteria {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the best constant by the atomic oracle.
    Oracle {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        atoms: Option<usize>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Run a randomized criteria-versus-oracle equivalence sweep.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "upper-band")]
        upper_band: Option<f64>,
        #[arg(long = "lower-band")]
        lower_band: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Emit the dyadic covering sequence of the spec's u weight.
    Partition {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        kmin: Option<i32>,
        #[arg(long)]
        kmax: Option<i32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// CLI failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

fn input_err(msg: impl Into<String>) -> Failure {
    Failure { code: 2, message: msg.into() }
}

fn invariant_err(msg: impl Into<String>) -> Failure {
    Failure { code: 3, message: msg.into() }
}

fn read_spec(path: &Path) -> Result<InstanceSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        input_err(format!(
            "malformed spec {} (line {}, column {}): {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn build_problem(spec: &InstanceSpec) -> Result<ProblemInstance, Failure> {
    spec.to_problem().map_err(|e| invariant_err(e.to_string()))
}

fn emit(out: &Option<PathBuf>, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| invariant_err(format!("serialization failed: {e}")))?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| input_err(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run() -> Result<bool, Failure> {
    let cli = Cli::parse();
    let eng = QuadEngine::from_env();
    let started = Instant::now();
    let all_pass = match cli.cmd {
        Cmd::Criteria { spec, out } => {
            let spec = read_spec(&spec)?;
            let p = build_problem(&spec)?;
            let rep = criteria_constant(&p, &eng).map_err(|e| invariant_err(e.to_string()))?;
            emit(&out, &criteria_report_json(&rep))?;
            true
        }
        Cmd::Oracle { spec, out, seed, atoms, iters, restarts } => {
            let spec = read_spec(&spec)?;
            let p = build_problem(&spec)?;
            let mut budget = spec.budget();
            if let Some(s) = seed {
                budget.seed = s;
            }
            if let Some(a) = atoms {
                budget.n_atoms = a;
            }
            if let Some(i) = iters {
                budget.iters = i;
            }
            if let Some(r) = restarts {
                budget.restarts = r;
            }
            if budget.n_atoms == 0 {
                return Err(input_err("--atoms must be >= 1"));
            }
            let res =
                estimate_constant(&p, &budget, &eng).map_err(|e| invariant_err(e.to_string()))?;
            emit(&out, &oracle_result_json(&res))?;
            true
        }
        Cmd::Verify { config, count, seed, upper_band, lower_band, out, csv } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))?;
                    serde_json::from_str::<VerifyConfig>(&text)
                        .map_err(|e| input_err(format!("malformed config: {e}")))?
                }
                None => VerifyConfig::default(),
            };
            if let Some(c) = count {
                cfg.count = c;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(b) = upper_band {
                cfg.upper_band = b;
            }
            if let Some(b) = lower_band {
                cfg.lower_band = b;
            }
            if cfg.count == 0 {
                return Err(input_err("--count must be >= 1"));
            }
            if !(cfg.upper_band > 0.0 && cfg.lower_band > 0.0) {
                return Err(input_err("bands must be positive"));
            }
            let (summary, pass) = run_verify(&cfg, &eng)?;
            if let Some(path) = &csv {
                write_csv(path, &summary)?;
            }
            emit(&out, &summary)?;
            pass
        }
        Cmd::Partition { spec, kmin, kmax, out } => {
            let spec = read_spec(&spec)?;
            let p = build_problem(&spec)?;
            let k_min = kmin.or(spec.covering.as_ref().map(|c| c.k_min)).unwrap_or(-5);
            let k_max = kmax.or(spec.covering.as_ref().map(|c| c.k_max)).unwrap_or(5);
            if k_min > k_max {
                return Err(input_err(format!("kmin = {k_min} exceeds kmax = {k_max}")));
            }
            let cov = covering_sequence(&p.u, k_min, k_max)
                .map_err(|e| invariant_err(e.to_string()))?;
            emit(&out, &partition_json(&cov, &p.u))?;
            true
        }
    };
    eprintln!("elapsed: {:.3}s", started.elapsed().as_secs_f64());
    Ok(all_pass)
}

fn run_verify(cfg: &VerifyConfig, eng: &QuadEngine) -> Result<(Value, bool), Failure> {
    let regimes: Vec<RegimeSpec> = cfg
        .regimes
        .clone()
        .unwrap_or_else(|| RegimeSpec::ALL.to_vec());
    if regimes.is_empty() {
        return Err(input_err("regimes must be non-empty"));
    }
    let mut rows = Vec::with_capacity(cfg.count);
    let mut all_pass = true;
    for i in 0..cfg.count {
        let regime = regimes[i % regimes.len()];
        let inst_seed = cfg.seed.wrapping_add(i as u64);
        let spec = gen_random_instance(inst_seed, regime);
        let p = build_problem(&spec)?;
        let rep = criteria_constant(&p, eng).map_err(|e| invariant_err(e.to_string()))?;
        let budget = OracleBudget {
            grid: GridSpec { lo: 1e-5, hi: 1e5, n: 512 },
            n_atoms: 8,
            iters: 200,
            restarts: 2,
            seed: inst_seed,
            aggregate_hint: rep.aggregate.is_finite().then_some(rep.aggregate),
        };
        let oracle = estimate_constant(&p, &budget, eng)
            .map_err(|e| invariant_err(e.to_string()))?;

        let agg = rep.aggregate;
        let est = oracle.best_ratio;
        let (log2_ratio, band_pass) = if agg.is_finite() && est.is_finite() && est > 0.0 {
            let lr = (agg / est).log2();
            (Some(lr), -cfg.upper_band <= lr && lr <= cfg.lower_band)
        } else {
            // infinite aggregate: sufficiency direction not band-checked
            (None, true)
        };

        // q = 1 Fubini cross-check (active for injected exact-q specs)
        let kernel_pass = if p.exps.q == 1.0 && agg.is_finite() {
            let ks = kernel_sum(&p, eng).map_err(|e| invariant_err(e.to_string()))?;
            !ks.is_finite() || (agg / ks).log2().abs() <= 4.0
        } else {
            true
        };

        // dual-objective check on a fixed atomic test function
        let h = AtomicFunction::new(vec![(0.2, 1.0), (0.9, 0.5), (3.0, 2.0), (11.0, 0.25)])
            .map_err(|e| invariant_err(e.to_string()))?;
        let sup_form = lhs_eval_supremal(&p, &h, eng);
        let ker_form = lhs_eval_kernel(&p, &h, eng);
        let dual_pass = if sup_form > 0.0 && sup_form.is_finite() && ker_form.is_finite() {
            let ratio = ker_form / sup_form;
            (1.0 - 1e-9..=64.0).contains(&ratio)
        } else {
            true
        };

        let pass = band_pass && kernel_pass && dual_pass;
        all_pass &= pass;
        let mut row = json!({
            "index": i,
            "seed": inst_seed,
            "q": p.exps.q,
            "r": p.exps.r,
            "aggregate": ext_num(agg),
            "oracle": ext_num(est),
            "log2_ratio": log2_ratio.map(|x| json!(x)).unwrap_or(Value::Null),
            "band_pass": band_pass,
            "kernel_pass": kernel_pass,
            "dual_pass": dual_pass,
            "pass": pass,
        });
        if !pass {
            // serialize the instance for replay
            row["spec"] = serde_json::to_value(&spec)
                .map_err(|e| invariant_err(e.to_string()))?;
        }
        rows.push(row);
    }
    let summary = json!({
        "count": cfg.count,
        "seed": cfg.seed,
        "upper_band": cfg.upper_band,
        "lower_band": cfg.lower_band,
        "instances": rows,
        "verdict": if all_pass { "pass" } else { "fail" },
    });
    Ok((summary, all_pass))
}

fn write_csv(path: &Path, summary: &Value) -> Result<(), Failure> {
    let mut text = String::from("index,seed,q,r,aggregate,oracle,log2_ratio,pass\n");
    for row in summary["instances"].as_array().unwrap() {
        let cell = |v: &Value| match v {
            Value::Null => String::new(),
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            cell(&row["index"]),
            cell(&row["seed"]),
            cell(&row["q"]),
            cell(&row["r"]),
            cell(&row["aggregate"]),
            cell(&row["oracle"]),
            cell(&row["log2_ratio"]),
            cell(&row["pass"]),
        ));
    }
    std::fs::write(path, text)
        .map_err(|e| input_err(format!("cannot write {}: {e}", path.display())))
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
