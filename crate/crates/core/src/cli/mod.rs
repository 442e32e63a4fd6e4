//! Batch driver: one configuration file, one function per subcommand, and
//! payloads that depend only on the configuration and the seed.

mod config;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;

pub use config::{
    Format, LatticeBlock, MeasureBlock, NormalFormBlock, RandomPotential, RunConfig, SimulateBlock, StabilityBlock,
    VerifyBlock, WeightBlock,
};

use crate::error::{Error, Result};
use crate::lattice::ModeTable;
use crate::measure::{resonant_fraction, FractionOptions, FractionRow};
use crate::normalform::{birkhoff_iterate, solve_homological, BirkhoffConfig, Classifier, HamiltonianSpec, NormalFormReport};
use crate::polyalg::{
    diagonal_quadratic, poisson, random_polynomial, random_polynomial_with, Coeff, GaussianRational, RandomPolySpec,
    SparsePolynomial,
};
use crate::simulator::{escape_experiment, Drifts, EscapeOptions, EscapeRow, SimConfig, Simulator, TrajectoryRow};
use crate::spectrum::{check_a1, check_a3, A1Report, A3Report, FrequencyModel};
use crate::stability::{build_ledger, predict_time_ln, ConstantsLedger, LedgerInputs, PredictOptions, Regime};
use crate::weights::{check_a0, A0Report};

/// Encoded payload of a command and whether a property check failed.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutput {
    pub payload: String,
    pub failed: bool,
}

impl CommandOutput {
    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.failed)
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
}

fn ledger_for(model: &FrequencyModel, cfg: &RunConfig, table: &ModeTable, c1: f64, c_p: f64) -> Result<ConstantsLedger> {
    let w = cfg.weight_spec(table)?;
    build_ledger(LedgerInputs::from_model(model, &w, c1, c_p))
}

/// One line of the verify summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub passed: bool,
    pub margin: f64,
    pub detail: String,
}

/// Outcome of the bracket property suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BracketSuite {
    pub samples: usize,
    pub antisymmetry_exact: bool,
    pub jacobi_max_rel: f64,
    pub degree_law: bool,
    pub momentum_closure: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckRow>,
    pub a0: A0Report,
    pub a1: A1Report,
    pub a3: A3Report,
    pub brackets: BracketSuite,
    pub homological_failures: usize,
}

fn random_exact(table: &Arc<ModeTable>, degrees: std::ops::RangeInclusive<usize>, density: f64, rng: &mut impl Rng) -> Result<SparsePolynomial<GaussianRational>> {
    let spec = RandomPolySpec {
        degrees,
        support_radius: table.k_max(),
        density,
        real: false,
        budget: 1_000_000,
    };
    random_polynomial_with(table, &spec, rng, |rng| {
        let re = BigRational::new(BigInt::from(rng.gen_range(-9i64..=9)), BigInt::from(rng.gen_range(1i64..=5)));
        let im = BigRational::new(BigInt::from(rng.gen_range(-9i64..=9)), BigInt::from(rng.gen_range(1i64..=5)));
        GaussianRational::new(re, im)
    })
}

/// Antisymmetry (exact), Jacobi (floating point), degree law and momentum closure.
pub fn bracket_suite(table: &Arc<ModeTable>, samples: usize, rng: &mut impl Rng) -> Result<BracketSuite> {
    let mut out = BracketSuite {
        samples,
        antisymmetry_exact: true,
        jacobi_max_rel: 0.0,
        degree_law: true,
        momentum_closure: true,
    };
    for _ in 0..samples {
        let da = rng.gen_range(1..=4);
        let db = rng.gen_range(1..=4);
        let p = random_exact(table, da..=da, 0.3, rng)?;
        let q = random_exact(table, db..=db, 0.3, rng)?;
        let pq = poisson(&p, &q)?;
        let qp = poisson(&q, &p)?;
        out.antisymmetry_exact &= pq.add(&qp).is_empty();
        for (m, _) in pq.terms() {
            out.degree_law &= m.len() + 2 == da + db;
            out.momentum_closure &= table.momentum(m).iter().all(|x| *x == 0);
        }
        let dc = rng.gen_range(1..=4);
        let (a, b, c) = (p.to_c64(), q.to_c64(), random_exact(table, dc..=dc, 0.3, rng)?.to_c64());
        let t1 = poisson(&a, &poisson(&b, &c)?)?;
        let t2 = poisson(&b, &poisson(&c, &a)?)?;
        let t3 = poisson(&c, &poisson(&a, &b)?)?;
        let scale = t1.sup_coeff().max(t2.sup_coeff()).max(t3.sup_coeff());
        if scale > 0.0 {
            let res = t1.add(&t2).add(&t3).sup_coeff() / scale;
            out.jacobi_max_rel = out.jacobi_max_rel.max(res);
        }
    }
    Ok(out)
}

/// Runs the A.0, A.1 and A.3 checkers and the bracket and homological suites.
pub fn cmd_verify(cfg: &RunConfig, format: Format) -> Result<CommandOutput> {
    let mut rng = cfg.rng();
    let model = cfg.resolve_model(&mut rng)?;
    let table = cfg.table()?;
    let w = cfg.weight_spec(&table)?;
    let v = &cfg.verify;
    let a0 = check_a0(&w, cfg.lattice.c, v.a0_d_max, v.a0_samples, cfg.seed)?;
    let a1 = check_a1(&model, 1, v.a1_k_max);
    let a3 = check_a3(&model, &cfg.partition()?, v.a3_k_max);
    let brackets = bracket_suite(&table, v.bracket_samples, &mut rng)?;

    let free = FrequencyModel::conv_nls_free(model.dim());
    let cls = Classifier::new(&free, table.clone(), table.k_max(), cfg.partition()?)?;
    let h0 = diagonal_quadratic(&table, |id| GaussianRational::from_i64(table.norm_sq(id)));
    let mut homological_failures = 0;
    for _ in 0..v.homological_samples {
        let spec = RandomPolySpec {
            degrees: 3..=5,
            support_radius: table.k_max(),
            density: 0.3,
            real: true,
            budget: 1_000_000,
        };
        let p = random_polynomial_with(&table, &spec, &mut rng, |rng| {
            GaussianRational::new(
                BigRational::new(BigInt::from(rng.gen_range(-20i64..=20)), BigInt::from(rng.gen_range(1i64..=9))),
                BigRational::new(BigInt::from(rng.gen_range(-20i64..=20)), BigInt::from(rng.gen_range(1i64..=9))),
            )
        })?;
        let sol = solve_homological(&p, &cls, None)?;
        let id = poisson(&h0, &sol.g)?.add(&p).sub(&sol.z);
        let z_ok = sol.z.terms().all(|(m, _)| cls.classify_ids(m).is_resonant());
        if !id.is_empty() || !z_ok {
            homological_failures += 1;
        }
    }

    let a1_detail = match &a1.witness {
        Some(j) => format!("witness j = {j:?}"),
        None => String::new(),
    };
    let a3_detail = match &a3.witness {
        Some((j, k)) => format!("witness pair {j:?}, {k:?}"),
        None => String::new(),
    };
    let checks = vec![
        CheckRow {
            check: "a0_subadditivity".into(),
            passed: a0.passed,
            margin: a0.worst_margin,
            detail: format!("{} samples", a0.samples),
        },
        CheckRow {
            check: "a1_growth".into(),
            passed: a1.passed,
            margin: model.params().c0 - a1.worst,
            detail: a1_detail,
        },
        CheckRow {
            check: "a3_separation".into(),
            passed: a3.passed,
            margin: a3.admissible_c2 - model.params().c2,
            detail: a3_detail,
        },
        CheckRow {
            check: "bracket_antisymmetry".into(),
            passed: brackets.antisymmetry_exact,
            margin: 0.0,
            detail: format!("{} pairs", brackets.samples),
        },
        CheckRow {
            check: "bracket_jacobi".into(),
            passed: brackets.jacobi_max_rel < 1e-12,
            margin: 1e-12 - brackets.jacobi_max_rel,
            detail: format!("max relative residual {:e}", brackets.jacobi_max_rel),
        },
        CheckRow {
            check: "bracket_degree_momentum".into(),
            passed: brackets.degree_law && brackets.momentum_closure,
            margin: 0.0,
            detail: String::new(),
        },
        CheckRow {
            check: "homological_identity".into(),
            passed: homological_failures == 0,
            margin: 0.0 - homological_failures as f64,
            detail: format!("{} samples", v.homological_samples),
        },
    ];
    let passed = checks.iter().all(|c| c.passed);
    let payload = match format {
        Format::Json => to_json(&VerifyReport {
            passed,
            checks,
            a0,
            a1,
            a3,
            brackets,
            homological_failures,
        })?,
        Format::Csv => to_csv(&checks)?,
    };
    Ok(CommandOutput {
        payload,
        failed: !passed,
    })
}

/// Flat CSV form of one iteration step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub k: usize,
    pub n: usize,
    pub r_k: f64,
    pub p_terms: usize,
    pub p_sup: f64,
    pub p_norm_bound: Option<f64>,
    pub g_terms: usize,
    pub g_sup: f64,
    pub z_terms: usize,
    pub ln_p_chain: f64,
    pub ln_g_chain: f64,
    pub ln_e: f64,
    pub high_terms: usize,
    pub min_divisor: Option<f64>,
}

/// Runs the normal-form iteration on a random perturbation drawn from the seed.
pub fn normalform_report(cfg: &RunConfig) -> Result<NormalFormReport> {
    let mut rng = cfg.rng();
    let model = cfg.resolve_model(&mut rng)?;
    let table = cfg.table()?;
    let nf = &cfg.normalform;
    let spec = RandomPolySpec {
        degrees: nf.min_degree..=nf.max_degree,
        support_radius: cfg.lattice.k_max,
        density: nf.density,
        real: true,
        budget: nf.budget,
    };
    let p = random_polynomial(&table, &spec, nf.c_p, &mut rng)?;
    let w = cfg.weight_spec(&table)?;
    let ledger = ledger_for(&model, cfg, &table, nf.c1, nf.c_p)?;
    let bc = BirkhoffConfig {
        n_cut: cfg.lattice.n_cut,
        d: nf.d,
        r: nf.r,
        partition: cfg.partition()?,
        weight: w,
        override_gate: nf.override_gate,
        check_floor: nf.check_floor,
        budget: nf.budget,
    };
    let out = birkhoff_iterate(
        &HamiltonianSpec {
            model,
            perturbation: p,
        },
        &bc,
        &ledger,
    )?;
    Ok(out.to_report())
}

pub fn cmd_normalform(cfg: &RunConfig, format: Format) -> Result<CommandOutput> {
    let report = normalform_report(cfg)?;
    let payload = match format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let rows: Vec<TraceRow> = report
                .trace
                .iter()
                .map(|t| TraceRow {
                    k: t.k,
                    n: t.n,
                    r_k: t.r_k,
                    p_terms: t.p_terms,
                    p_sup: t.p_sup,
                    p_norm_bound: t.p_norm_bound,
                    g_terms: t.g_terms,
                    g_sup: t.g_sup,
                    z_terms: t.z_terms,
                    ln_p_chain: t.ln_p_chain,
                    ln_g_chain: t.ln_g_chain,
                    ln_e: t.ln_e,
                    high_terms: t.high_terms,
                    min_divisor: t.homological.min_divisor,
                })
                .collect();
            to_csv(&rows)?
        }
    };
    Ok(CommandOutput { payload, failed: false })
}

/// One row of the stability sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityRow {
    pub eps: f64,
    pub abs_ln_eps: f64,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: f64,
    pub ln_n: f64,
    pub ln_t: f64,
    pub ln_t_scaled: f64,
    pub regime: String,
    pub a: Option<f64>,
    pub regime_scale: f64,
}

pub fn stability_rows(cfg: &RunConfig) -> Result<Vec<StabilityRow>> {
    let mut rng = cfg.rng();
    let model = cfg.resolve_model(&mut rng)?;
    let table = cfg.table()?;
    let w = cfg.weight_spec(&table)?;
    let sb = &cfg.stability;
    let ledger = ledger_for(&model, cfg, &table, sb.c1, sb.c_p)?;
    let opts = PredictOptions {
        d_min: sb.d_min,
        d_max: sb.d_max,
        eps0: None,
    };
    let targets = sb.eps.iter().map(|e| -e.ln()).chain(sb.abs_ln_eps.iter().cloned());
    targets
        .map(|l| {
            let p = predict_time_ln(&w, model.params().p, l, &ledger, &opts)?;
            Ok(StabilityRow {
                eps: p.eps,
                abs_ln_eps: p.abs_ln_eps,
                d: p.d,
                n: p.n,
                ln_n: p.ln_n,
                ln_t: p.ln_t,
                ln_t_scaled: p.ln_t_scaled,
                regime: match p.regime {
                    Regime::Gevrey => "gevrey",
                    Regime::LogUltra => "log_ultra",
                    Regime::Tabulated => "tabulated",
                }
                .into(),
                a: p.a,
                regime_scale: p.regime_scale,
            })
        })
        .collect()
}

pub fn cmd_stability(cfg: &RunConfig, format: Format) -> Result<CommandOutput> {
    let rows = stability_rows(cfg)?;
    let payload = match format {
        Format::Json => to_json(&rows)?,
        Format::Csv => to_csv(&rows)?,
    };
    Ok(CommandOutput { payload, failed: false })
}

pub fn measure_rows(cfg: &RunConfig) -> Result<Vec<FractionRow>> {
    let mb = &cfg.measure;
    let opts = FractionOptions {
        exponent: mb.exponent,
        ..FractionOptions::default()
    };
    mb.gammas
        .iter()
        .map(|&g| resonant_fraction(&mb.family, g, mb.n_cut, mb.d, mb.samples, cfg.seed, &opts))
        .collect()
}

pub fn cmd_measure(cfg: &RunConfig, format: Format) -> Result<CommandOutput> {
    let rows = measure_rows(cfg)?;
    let payload = match format {
        Format::Json => to_json(&rows)?,
        Format::Csv => to_csv(&rows)?,
    };
    Ok(CommandOutput { payload, failed: false })
}

fn sim_config(cfg: &RunConfig, model: FrequencyModel) -> Result<SimConfig> {
    let sb = &cfg.simulate;
    let table = ModeTable::new(model.dim(), sb.k, cfg.lattice.c)?;
    Ok(SimConfig {
        model,
        nonlinearity: sb.nonlinearity.clone(),
        k: sb.k,
        dt: sb.dt,
        t_end: sb.t_end,
        weight: cfg.weight_spec(&table)?,
        seed: cfg.seed,
        record_stride: sb.record_stride,
        n_split: sb.n_split,
        escape_threshold: None,
        max_phase: 1e4,
        bracket_c: cfg.lattice.c,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub eps: f64,
    pub steps: usize,
    pub grid_size: usize,
    pub sup_norm_s: f64,
    pub drifts: Drifts,
    pub rows: Vec<TrajectoryRow>,
}

pub fn simulation_report(cfg: &RunConfig) -> Result<SimulationReport> {
    let mut rng = cfg.rng();
    let model = cfg.resolve_model(&mut rng)?;
    let sim = Simulator::new(sim_config(cfg, model)?)?;
    let u0 = sim.initial_state(cfg.simulate.eps, cfg.simulate.real, cfg.seed)?;
    let traj = sim.run(&u0)?;
    Ok(SimulationReport {
        eps: cfg.simulate.eps,
        steps: traj.steps,
        grid_size: sim.grid_size(),
        sup_norm_s: traj.sup_norm_s,
        drifts: traj.drifts(),
        rows: traj.rows(),
    })
}

pub fn escape_rows(cfg: &RunConfig) -> Result<Vec<EscapeRow>> {
    let mut rng = cfg.rng();
    let model = cfg.resolve_model(&mut rng)?;
    let sc = sim_config(cfg, model.clone())?;
    let table = ModeTable::new(model.dim(), cfg.simulate.k, cfg.lattice.c)?;
    let ledger = ledger_for(&model, cfg, &table, cfg.stability.c1, cfg.stability.c_p)?;
    let opts = EscapeOptions {
        threshold_factor: cfg.simulate.escape_factor,
        real: cfg.simulate.real,
        prediction: Some((ledger, model.params().p)),
    };
    escape_experiment(&sc, &cfg.simulate.escape_eps, &opts)
}

pub fn cmd_simulate(cfg: &RunConfig, format: Format) -> Result<CommandOutput> {
    let payload = if cfg.simulate.escape_eps.is_empty() {
        let rep = simulation_report(cfg)?;
        match format {
            Format::Json => to_json(&rep)?,
            Format::Csv => to_csv(&rep.rows)?,
        }
    } else {
        let rows = escape_rows(cfg)?;
        match format {
            Format::Json => to_json(&rows)?,
            Format::Csv => to_csv(&rows)?,
        }
    };
    Ok(CommandOutput { payload, failed: false })
}

/// Small end-to-end tour: normal form, stability times, a measure sweep and a
/// short simulation, summarized as key/value pairs.
pub fn cmd_demo(cfg: &RunConfig, format: Format) -> Result<CommandOutput> {
    let mut summary: BTreeMap<String, f64> = BTreeMap::new();
    let nf = normalform_report(cfg)?;
    summary.insert("normalform.residual_sup".into(), nf.residual_sup);
    summary.insert("normalform.z0_terms".into(), nf.z0.terms.len() as f64);
    summary.insert(
        "normalform.generator_terms".into(),
        nf.generators.iter().map(|g| g.terms.len()).sum::<usize>() as f64,
    );
    summary.insert("normalform.ln_gate".into(), nf.ln_gate);

    let mut small = cfg.clone();
    // amplitudes given as |ln eps| are kept; they are the only ones some models admit
    small.stability.eps = if cfg.stability.abs_ln_eps.is_empty() {
        vec![1e-100, 1e-300]
    } else {
        Vec::new()
    };
    for r in stability_rows(&small)? {
        summary.insert(format!("stability.ln_t[abs_ln_eps={:.6e}]", r.abs_ln_eps), r.ln_t);
    }
    small.measure.samples = small.measure.samples.min(2000);
    for r in measure_rows(&small)? {
        summary.insert(format!("measure.fraction[gamma={:e}]", r.gamma), r.fraction);
    }
    small.simulate.t_end = small.simulate.t_end.min(10.0);
    let sim = simulation_report(&small)?;
    summary.insert("simulate.sup_norm_ratio".into(), sim.sup_norm_s / sim.eps.max(f64::MIN_POSITIVE));
    summary.insert("simulate.mass_drift".into(), sim.drifts.mass);
    summary.insert("simulate.energy_drift".into(), sim.drifts.energy);

    let payload = match format {
        Format::Json => to_json(&summary)?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Kv<'a> {
                key: &'a str,
                value: f64,
            }
            let rows: Vec<Kv> = summary.iter().map(|(k, v)| Kv { key: k, value: *v }).collect();
            to_csv(&rows)?
        }
    };
    Ok(CommandOutput { payload, failed: false })
}

/// Dispatches a subcommand by name.
pub fn run_command(name: &str, cfg: &RunConfig, format: Option<Format>) -> Result<CommandOutput> {
    let default = match name {
        "verify" | "normalform" | "demo" => Format::Json,
        _ => Format::Csv,
    };
    let f = format.or(cfg.format).unwrap_or(default);
    match name {
        "verify" => cmd_verify(cfg, f),
        "normalform" => cmd_normalform(cfg, f),
        "stability" => cmd_stability(cfg, f),
        "measure" => cmd_measure(cfg, f),
        "simulate" => cmd_simulate(cfg, f),
        "demo" => cmd_demo(cfg, f),
        other => Err(Error::Config(format!("unknown command `{other}`"))),
    }
}
