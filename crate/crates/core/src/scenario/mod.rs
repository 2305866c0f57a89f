//! Scenario runner behind the `zeromode` binary.
//!
//! Each run writes `<scenario>.csv`, a column schema `<scenario>.schema.json`
//! and a summary `<scenario>.summary.json` into the output directory. CSV
//! floats carry 17 significant digits and depend only on the configuration,
//! so repeated runs are byte-identical.

mod config;

pub use config::{
    find_preset, presets, AutoTag, ConfigError, Origin, ParamKind, ParamSpec, ParamValue, Preset,
    RunConfig, Scenario, Spacing, TimeGrid,
};

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use serde_json::{json, Value};
use thiserror::Error;

use crate::chains::{
    rotor_chain_dynamics, ChainError, ChainParams, ChainQuench, RotorChainOptions, RotorChainParams,
};
use crate::cho2::{entanglement_point, Cho2Error, ChoQuench};
use crate::ensembles::{compare_ensembles, conserved_energies, uniform_bound, ComparisonOptions, EnsembleError};
use crate::fieldtheory::{
    compactness_timescale, freezing_ratio, mode_frequencies, sample_wrapped_gaussian,
    wrapped_gaussian_variance, wrapped_variance, zero_mode_variance, CondensateParams, FieldError,
    PhysicalConstants,
};
use crate::numerics::fit_polynomial;
use crate::rotor2::{
    auto_cutoff, build_hamiltonian, entanglement_entropy, expectation_cos, ground_state, reduce_site,
    CosOperator, GroundStateOptions, Propagator, Rotor2Error, RotorParams,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{op} failed: {message}")]
    Numerical { op: &'static str, message: String },
    #[error("cannot write {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl RunError {
    /// `1` for input errors, `2` for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Numerical { .. } => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, RunError>;

/// Invalid parameters found by a physics routine are input errors; anything
/// else is a numerical failure of operation `op`.
trait Classify<T> {
    fn during(self, op: &'static str) -> Result<T>;
}

macro_rules! classify {
    ($($err:ident),*) => {$(
        impl<T> Classify<T> for std::result::Result<T, $err> {
            fn during(self, op: &'static str) -> Result<T> {
                // some error types have no other variant
                #[allow(unreachable_patterns)]
                self.map_err(|e| match e {
                    $err::InvalidParameter(m) => RunError::Input(m),
                    other => RunError::Numerical { op, message: other.to_string() },
                })
            }
        }
    )*};
}

classify!(Cho2Error, Rotor2Error, EnsembleError, FieldError);

impl<T> Classify<T> for std::result::Result<T, ChainError> {
    fn during(self, op: &'static str) -> Result<T> {
        self.map_err(|e| match e {
            ChainError::InvalidParameter(m) => RunError::Input(m),
            e @ ChainError::DimensionBudget { .. } => RunError::Input(e.to_string()),
            other => RunError::Numerical {
                op,
                message: other.to_string(),
            },
        })
    }
}

/// A table with documented columns.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
    pub description: &'static str,
}

const fn col(name: &'static str, unit: &'static str, description: &'static str) -> Column {
    Column {
        name,
        unit,
        description,
    }
}

/// Result of one scenario before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    /// Key scalars for the summary.
    pub scalars: Value,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub csv: PathBuf,
    pub schema: PathBuf,
    pub summary_path: PathBuf,
    pub summary: Value,
}

/// Render one float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Compute a scenario without touching the file system.
pub fn execute(config: &RunConfig) -> Result<Outcome> {
    config.time_grid.validate().map_err(RunError::Input)?;
    let ts = config.time_grid.points();
    let work = || match config.scenario {
        Scenario::Cho2 => run_cho2(config, &ts),
        Scenario::Rotor2 => run_rotor2(config, &ts),
        Scenario::Ensembles => run_ensembles(config),
        Scenario::ChainHarmonic => run_chain_harmonic(config, &ts),
        Scenario::ChainRotor => run_chain_rotor(config, &ts),
        Scenario::Fieldtheory => run_fieldtheory(config, &ts),
    };
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Input(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Execute and write the CSV, schema and summary files.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let started = Instant::now();
    let outcome = execute(config)?;
    let wall = started.elapsed().as_secs_f64();
    let dir = &config.output;
    let io = |path: &PathBuf, e: &dyn std::fmt::Display| RunError::Io {
        path: path.clone(),
        message: e.to_string(),
    };
    fs::create_dir_all(dir).map_err(|e| io(dir, &e))?;
    let stem = config.scenario.name();
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| io(&csv_path, &e))?;
    w.write_record(outcome.table.columns.iter().map(|c| c.name))
        .map_err(|e| io(&csv_path, &e))?;
    for row in &outcome.table.rows {
        w.write_record(row.iter().map(|&x| format_float(x)))
            .map_err(|e| io(&csv_path, &e))?;
    }
    w.flush().map_err(|e| io(&csv_path, &e))?;

    let schema_path = dir.join(format!("{stem}.schema.json"));
    let schema = json!({
        "file": format!("{stem}.csv"),
        "float_format": "%.16e",
        "columns": outcome.table.columns.iter().map(|c| json!({
            "name": c.name, "unit": c.unit, "description": c.description,
        })).collect::<Vec<_>>(),
    });
    write_json(&schema_path, &schema).map_err(|e| io(&schema_path, &e))?;

    let summary_path = dir.join(format!("{stem}.summary.json"));
    let summary = json!({
        "config": config,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": wall,
        "rows": outcome.table.rows.len(),
        "results": outcome.scalars,
    });
    write_json(&summary_path, &summary).map_err(|e| io(&summary_path, &e))?;
    Ok(RunReport {
        csv: csv_path,
        schema: schema_path,
        summary_path,
        summary,
    })
}

fn write_json(path: &PathBuf, v: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(v).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// Non-finite values become `null` in JSON.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn argmax(xs: &[f64]) -> (usize, f64) {
    xs.iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
}

/// Least-squares `S = c ln t + d` over the points with `t >= t_min`.
fn log_fit(ts: &[f64], ss: &[f64], t_min: f64) -> Value {
    let (lx, ys): (Vec<f64>, Vec<f64>) = ts
        .iter()
        .zip(ss)
        .filter(|(t, _)| **t >= t_min && **t > 0.0)
        .map(|(t, s)| (t.ln(), *s))
        .unzip();
    if lx.len() < 3 {
        return Value::Null;
    }
    match fit_polynomial(&lx, &ys, 1) {
        Ok(f) => json!({
            "t_min": t_min, "slope": num(f.coefficients[0]),
            "intercept": num(f.coefficients[1]), "r_squared": num(f.r_squared),
        }),
        Err(_) => Value::Null,
    }
}

fn run_cho2(c: &RunConfig, ts: &[f64]) -> Result<Outcome> {
    let omega_i = c.real("omega_sq").sqrt();
    let q = ChoQuench::with_omega_f_sq(omega_i, c.real("kappa"), c.real("omega_f_sq")).during("cho2 setup")?;
    let mut rows = Vec::with_capacity(ts.len());
    let mut saturated = 0;
    for &t in ts {
        let p = entanglement_point(&q, t).during("cho2 entanglement")?;
        saturated += p.saturated as usize;
        let l = p.lengths;
        rows.push(vec![t, p.entropy, p.xi, l.l_xs, l.l_xa, l.l_ps, l.l_pa]);
    }
    let s: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let last = rows.last().expect("grid is non-empty");
    Ok(Outcome {
        table: Table {
            columns: vec![
                col("t", "1", "time"),
                col("S", "nats", "entanglement entropy of one oscillator"),
                col("xi", "1", "Mehler parameter; spectrum (1 - xi) xi^k"),
                col("l_Xs", "1", "position length of the symmetric kernel combination"),
                col("l_Xa", "1", "position length of the antisymmetric kernel combination"),
                col("l_Ps", "1", "momentum length of the symmetric kernel combination"),
                col("l_Pa", "1", "momentum length of the antisymmetric kernel combination"),
            ],
            rows: rows.clone(),
        },
        scalars: json!({
            "S_final": num(last[1]),
            "xi_final": num(last[2]),
            "saturated_points": saturated,
            "log_fit": log_fit(ts, &s, 1e2),
        }),
    })
}

fn run_rotor2(c: &RunConfig, ts: &[f64]) -> Result<Outcome> {
    let (omega_sq, kappa) = (c.real("omega_sq"), c.real("kappa"));
    let opts = GroundStateOptions::default();
    let (params, ground) = match c.parameters.get("M") {
        Some(ParamValue::Int(m)) => {
            let params = RotorParams::new(omega_sq, kappa, *m).during("rotor2 setup")?;
            let ground = ground_state(&build_hamiltonian(&params, omega_sq), *m, &opts).during("rotor2 ground state")?;
            (params, ground)
        }
        _ => {
            let a = auto_cutoff(omega_sq, kappa, c.count("max_m"), &opts).during("rotor2 cutoff selection")?;
            (a.params, a.ground)
        }
    };
    let cho = ChoQuench::frequency_quench(omega_sq, kappa).during("cho2 reference")?;
    let prop = Propagator::post_quench(&params, 0.0, opts.dense_max_dim).during("rotor2 propagator")?;
    let series = prop
        .map_series(&ground.psi, ts, |_, psi| {
            (
                entanglement_entropy(&reduce_site(psi)),
                expectation_cos(psi, CosOperator::Sum),
                expectation_cos(psi, CosOperator::Diff),
            )
        })
        .during("rotor2 evolution")?;
    let mut rows = Vec::with_capacity(ts.len());
    for (&t, (s, cp, cm)) in ts.iter().zip(series) {
        let s = s.during("rotor2 entropy")?;
        let s_cho = entanglement_point(&cho, t).during("cho2 reference")?.entropy;
        rows.push(vec![t, s, s_cho, cp, cm]);
    }
    let s: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let (k, s_max) = argmax(&s);
    let energies = conserved_energies(&ground.psi, kappa);
    let bound = uniform_bound(energies.total()).during("uniform bound")?;
    Ok(Outcome {
        table: Table {
            columns: vec![
                col("t", "1", "time"),
                col("S_CR", "nats", "entanglement entropy of one rotor"),
                col("S_CHO_ref", "nats", "same quench for two harmonic oscillators"),
                col("cos_plus", "1", "<cos(x1 + x2)>"),
                col("cos_minus", "1", "<cos(x1 - x2)>"),
            ],
            rows,
        },
        scalars: json!({
            "M": params.m,
            "boundary_weight": num(ground.boundary_weight),
            "ground_energy": num(ground.energy),
            "S_max": num(s_max),
            "t_at_max": ts[k],
            "E_plus": num(energies.plus),
            "E_minus": num(energies.minus),
            "bound": num(bound.bound),
        }),
    })
}

fn run_ensembles(c: &RunConfig) -> Result<Outcome> {
    let g = c.time_grid;
    if g.spacing != Spacing::Linear || g.start != 0.0 || g.count < 2 || !(g.stop > 0.0) {
        return Err(RunError::Input(
            "ensembles needs a linear time grid 0:stop:count with stop > 0 and count >= 2".into(),
        ));
    }
    let opts = ComparisonOptions {
        t_max: g.stop,
        n_t: g.count,
        deg_tol: c.real("deg_tol"),
        max_m: c.count("max_m"),
        ..Default::default()
    };
    let mut rows = Vec::new();
    for w2 in c.reals("omega_sq") {
        for k in c.reals("kappa") {
            let r = compare_ensembles(w2, k, &opts).during("ensemble comparison")?;
            rows.push(vec![
                w2,
                k,
                r.m as f64,
                r.s_max,
                r.t_at_max,
                r.s_de,
                r.s_bde,
                r.s_gge,
                r.s_frozen,
                r.s_estimate,
                r.bound.bound,
                r.energies.plus,
                r.energies.minus,
            ]);
        }
    }
    let closer = rows.iter().filter(|r| (r[6] - r[3]).abs() <= (r[5] - r[3]).abs()).count();
    Ok(Outcome {
        scalars: json!({
            "points": rows.len(),
            "bde_closer_fraction": closer as f64 / rows.len() as f64,
            "max_over_bound": rows.iter().all(|r| r[3] <= r[10]),
        }),
        table: Table {
            columns: vec![
                col("omega_sq", "1", "pre-quench on-site frequency squared"),
                col("kappa", "1", "coupling"),
                col("M", "1", "momentum cutoff"),
                col("S_max", "nats", "largest sampled entropy"),
                col("t_at_max", "1", "time of S_max"),
                col("S_DE", "nats", "diagonal ensemble"),
                col("S_BDE", "nats", "block-diagonal ensemble"),
                col("S_GGE", "nats", "generalized Gibbs ensemble"),
                col("S_frozen", "nats", "GGE with the relative pendulum frozen"),
                col("S_estimate", "nats", "closed-form GGE estimate"),
                col("bound", "nats", "energy-only entropy bound"),
                col("E_plus", "1", "centre-of-mass energy"),
                col("E_minus", "1", "relative energy"),
            ],
            rows,
        },
    })
}

fn run_chain_harmonic(c: &RunConfig, ts: &[f64]) -> Result<Outcome> {
    let params = ChainParams::new(c.count("n"), c.real("omega_sq"), c.real("kappa")).during("chain setup")?;
    let q = ChainQuench::new(params, c.real("omega_f_sq")).during("chain quench")?;
    let s = q.entropy_series(ts, params.cut()).during("chain entropy")?;
    let n = params.n as f64;
    let rows: Vec<Vec<f64>> = ts.iter().zip(&s).map(|(&t, &s)| vec![n, t, s]).collect();
    let t_half = ts[ts.len() / 2];
    Ok(Outcome {
        table: Table {
            columns: chain_columns(),
            rows,
        },
        scalars: json!({
            "n": params.n,
            "cut": params.cut(),
            "S_final": num(*s.last().expect("grid is non-empty")),
            "log_fit": log_fit(ts, &s, t_half),
        }),
    })
}

fn chain_columns() -> Vec<Column> {
    vec![
        col("n", "1", "number of sites"),
        col("t", "1", "time"),
        col("S", "nats", "entropy across the cut after site floor(n/2)"),
    ]
}

fn run_chain_rotor(c: &RunConfig, ts: &[f64]) -> Result<Outcome> {
    if ts.windows(2).any(|w| w[1] < w[0]) {
        return Err(RunError::Input("rotor chains need ascending times".into()));
    }
    let mut rows = Vec::new();
    let mut per_n = Vec::new();
    for n in c.counts("n") {
        let m = match c.parameters.get("M") {
            Some(ParamValue::Int(m)) => *m,
            _ => RotorChainParams::default_cutoff(n),
        };
        let params = RotorChainParams::new(n, c.real("omega_sq"), c.real("kappa"), m)
            .during("rotor chain setup")?;
        let run = rotor_chain_dynamics(&params, ts, &RotorChainOptions::default()).during("rotor chain dynamics")?;
        let half = ts.len() / 2;
        let early = run.entropies[..half.max(1)].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let late = run.entropies[half..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        per_n.push(json!({
            "n": n, "M": m, "dim": params.dim(), "ground_energy": num(run.ground_energy),
            "boundary_weight": num(run.boundary_weight), "S_max": num(early.max(late)),
            "late_minus_early_max": num(late - early),
        }));
        rows.extend(ts.iter().zip(&run.entropies).map(|(&t, &s)| vec![n as f64, t, s]));
    }
    Ok(Outcome {
        table: Table {
            columns: chain_columns(),
            rows,
        },
        scalars: json!({ "chains": per_n }),
    })
}

fn run_fieldtheory(c: &RunConfig, ts: &[f64]) -> Result<Outcome> {
    let p = CondensateParams::new(
        c.real("length"),
        c.real("n1d"),
        c.real("g1d"),
        c.real("mass"),
        c.real("tunnel"),
        c.real("temperature"),
    )
    .and_then(|p| {
        p.with_constants(PhysicalConstants {
            hbar: c.real("hbar"),
            k_b: c.real("kb"),
        })
    })
    .during("condensate setup")?;
    let r0 = c.optional("r0").unwrap_or_else(|| p.natural_radius());
    let tc = compactness_timescale(&p, r0).during("compactness timescale")?;
    let samples = c.count("mc_samples");
    let mut rows = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let var = zero_mode_variance(&p, t).during("zero-mode variance")?;
        let theta = var.sqrt() / r0;
        let exact = wrapped_gaussian_variance(theta).during("wrapped variance")?;
        let draws = sample_wrapped_gaussian(theta, samples, c.seed.wrapping_add(i as u64)).during("sampling")?;
        let mc = wrapped_variance(&draws).during("wrapped variance")?;
        rows.push(vec![t, var, theta * theta, exact, mc]);
    }
    let modes = mode_frequencies(&p, 0);
    let fr = freezing_ratio(&p, 1, 0.01).during("freezing ratio")?;
    Ok(Outcome {
        table: Table {
            columns: vec![
                col("t", "s", "time after the quench"),
                col("sigma_sq", "m", "variance of the zero mode phi_0"),
                col("theta_var", "1", "variance of the angle phi_0 / R0"),
                col("theta_var_wrapped", "1", "variance of the wrapped angle, exact"),
                col("theta_var_mc", "1", "variance of the wrapped angle, sampled"),
            ],
            rows,
        },
        scalars: json!({
            "t_c": num(tc.t_c),
            "t_c_exact": num(tc.t_c_exact),
            "deep_quench": tc.deep_quench,
            "initial_fraction": num(tc.initial_fraction),
            "r0": num(r0),
            "omega_i0": num(modes.omega_i),
            "sigma0_sq": num(tc.sigma0_sq),
            "sigma_rho0_sq": num(tc.sigma_rho0_sq),
            "freezing_ratio_k1": num(fr.r_k),
            "frozen_k1": fr.frozen,
        }),
    })
}
