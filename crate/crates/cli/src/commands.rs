//! Verb implementations. Each returns a [`Report`]; the caller maps it to an exit code.

use std::fs;
use std::path::Path;

use eqp_core::base::{Base, ProcessInstance};
use eqp_core::global::{composed_channel, eigentuple, peripheral_and_gamma, steady_state};
use eqp_core::instances;
use eqp_core::linalg::e1;
use eqp_core::periodicity::{
    aperiodicity_check, averaged_channel, build_partition, cesaro_checks, cesaro_projector, finite_sigma_orbit,
    minimality_check, skew_ergodicity, stopping_times, tau_map, verify_partition_laws, verify_shift_relation,
    witness_residual, Minimality, PeriodicPartition,
};
use eqp_core::pf::{
    is_irreducible, is_primitive, partition_of_unity_residual, partition_shift_residual,
    steady_state_decomposition_residual,
};
use eqp_core::random::{random_density, stream_rng};
use eqp_core::trajectory::{haar_experiment, iid_determinism_probe, quasiperiodic_experiment};
use eqp_core::{CMat, KrausChannel, C64};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{sha256_hex, Analysis, ProcessConfig};
use crate::registry::{self, EXAMPLES};
use crate::report::{blocks, c, cs, mat, num, Check, Report, Series};
use crate::{AnalyzeArgs, CliError, EhkArgs, ExperimentArgs, Format};

/// Residual threshold for the structural laws.
pub const LAW_TOL: f64 = 1e-8;
/// Threshold for the eigenvalue matching distance.
pub const MATCH_TOL: f64 = 1e-7;
/// Threshold for Cesaro idempotency and the inner-product law.
pub const CESARO_TOL: f64 = 1e-6;
/// Largest power tried by the aperiodicity search.
pub const APERIODICITY_MAX: usize = 8;
/// Orbit window used to recover i.i.d. eigen-unitaries.
pub const IID_WINDOW: usize = 16;

const DEFAULT_SEED: u64 = 7;
const GOLDEN_T: f64 = 0.6180339887;

pub fn list(format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(&EXAMPLES).expect("registry serializes") + "\n"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for e in &EXAMPLES {
                w.serialize(e).map_err(|e| CliError::Io(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("utf-8"))
        }
    }
}

fn read_config(path: &Path) -> Result<ProcessConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    ProcessConfig::parse(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn digest(command: &str, config: Option<&ProcessConfig>, options: &impl serde::Serialize) -> String {
    let doc = json!({ "command": command, "config": config, "options": options });
    sha256_hex(&doc.to_string())
}

pub fn analyze(args: &AnalyzeArgs) -> Result<Report, CliError> {
    let mut cfg = read_config(&args.config)?;
    if let Some(t) = args.common.tol {
        if !(t > 0.0) {
            return Err(CliError::Usage("--tol must be positive".into()));
        }
        cfg.tolerances.peripheral = t;
    }
    let process = cfg.build()?;
    let seed = args.common.seed.unwrap_or(cfg.seed);
    let dig = digest("analyze", Some(&cfg), args);
    let (results, checks) = match process.base() {
        Base::Finite(_) => {
            let opts = SuiteOptions {
                analyses: cfg.analyses.clone(),
                tol: cfg.tolerances.peripheral,
                seed,
                n_avg: args.n_avg,
                samples: args.samples.unwrap_or(50),
            };
            finite_suite(&process, &opts)?
        }
        Base::Iid(_) => iid_suite(&process, args.samples.unwrap_or(1000), &cfg.analyses)?,
        Base::Rotation(_) => {
            return Err(CliError::Config("analyze needs a finite or i.i.d. base; rotations run under simulate".into()))
        }
    };
    Ok(Report::new("analyze", dig, results, checks, None))
}

pub struct SuiteOptions {
    pub analyses: Vec<Analysis>,
    pub tol: f64,
    pub seed: u64,
    pub n_avg: u64,
    pub samples: usize,
}

/// Spectral, partition, Cesaro, minimality and aperiodicity analyses on a finite base.
pub fn finite_suite(process: &ProcessInstance, opts: &SuiteOptions) -> Result<(Value, Vec<Check>), CliError> {
    let base = process.finite_base()?;
    let (n, d) = (base.n(), process.dim());
    let wants = |a: Analysis| opts.analyses.contains(&a);
    let mut checks = Vec::new();
    let ss = steady_state(process)?;
    if !ss.irreducible {
        checks.push(Check::holds("irreducible", false));
        let results = json!({
            "irreducible": false,
            "fixed_dim": ss.fixed_dim,
            "witness": ss.witness.as_ref().map(blocks),
        });
        return Ok((results, checks));
    }
    let rep = peripheral_and_gamma(process, opts.tol)?;
    let mut results = json!({
        "irreducible": true,
        "n": n,
        "dim": d,
        "steady_state": blocks(&rep.steady_state),
    });
    if wants(Analysis::Spectral) {
        let koopman_gap = rep
            .lambda_theta
            .iter()
            .map(|z| rep.lambda_l.iter().map(|l| (l - z).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        let max_order = rep.gamma.iter().map(|g| g.order).max().unwrap_or(1);
        checks.push(Check::at_most("koopman_in_spectrum", koopman_gap, LAW_TOL));
        checks.push(Check::at_most("gamma_size", rep.gamma.len() as f64, (d * d) as f64));
        checks.push(Check::at_most("max_coset_order", max_order as f64, d as f64));
        results["spectral"] = json!({
            "peripheral": cs(&rep.lambda_l),
            "certificates": rep.certificates.iter().map(|&(a, b)| json!([a, b])).collect::<Vec<_>>(),
            "koopman": cs(&rep.lambda_theta),
            "gamma": rep.gamma.iter().map(|g| json!({
                "rep": c(g.representative),
                "order": g.order,
                "coset_members": cs(&g.members),
            })).collect::<Vec<_>>(),
        });
    }
    let needs_partition = [Analysis::Partition, Analysis::Cesaro, Analysis::Minimality].into_iter().any(wants);
    let mut partitions = Vec::new();
    if needs_partition {
        for g in &rep.gamma {
            let et = eigentuple(process, &rep, g.representative)?;
            partitions.push(build_partition(process, &et, &rep.steady_state)?);
        }
    }
    let mut rng = stream_rng(opts.seed, 0);
    if wants(Analysis::Partition) {
        let mut out = Vec::new();
        for (i, part) in partitions.iter().enumerate() {
            let shift = verify_shift_relation(process, part)?;
            let laws = verify_partition_laws(process, part, &rep.steady_state, &mut rng, 8)?;
            let skew = skew_ergodicity(&part.sigma, part.n_alpha, base);
            let taus = tau_map(part, base)?;
            let horizon = (n * part.n_alpha) as u64;
            let density = stopping_times(finite_sigma_orbit(part, base, 0), part.n_alpha, horizon)?.density;
            let tag = |s: &str| format!("alpha[{i}].{s}");
            checks.push(Check::at_most(tag("n_alpha"), part.n_alpha as f64, d as f64));
            checks.push(Check::at_most(tag("match_distance"), part.match_distance, MATCH_TOL));
            checks.push(Check::at_most(tag("shift_relation"), shift, LAW_TOL));
            checks.push(Check::at_most(tag("trace_law"), laws.trace_law, LAW_TOL));
            checks.push(Check::at_most(tag("partition_laws"), laws.max(), LAW_TOL));
            checks.push(Check::holds(tag("skew_single_cycle"), skew.ergodic));
            checks.push(Check::equal(tag("birkhoff_error"), skew.birkhoff_error, 0.0));
            out.push(partition_json(part, &laws, shift, &taus, density));
        }
        results["partitions"] = Value::from(out);
    }
    if wants(Analysis::Cesaro) {
        let mut out = Vec::new();
        for (i, part) in partitions.iter().enumerate() {
            let proj = cesaro_projector(process, part, opts.n_avg)?;
            let cc = cesaro_checks(&proj, &rep.steady_state, &mut rng, opts.samples);
            let tag = |s: &str| format!("alpha[{i}].cesaro.{s}");
            checks.push(Check::at_most(tag("idempotency"), cc.idempotency, CESARO_TOL));
            checks.push(Check::at_most(tag("inner_product_law"), cc.inner_product_law, CESARO_TOL));
            checks.push(Check::at_least(tag("faithfulness"), cc.faithfulness, 1e-12));
            out.push(json!({
                "alpha": c(part.alpha),
                "n_avg": proj.n_avg,
                "idempotency": cc.idempotency,
                "commutation": cc.commutation,
                "positivity": cc.positivity,
                "inner_product_law": cc.inner_product_law,
                "faithfulness": cc.faithfulness,
            }));
        }
        results["cesaro"] = Value::from(out);
    }
    if wants(Analysis::Minimality) {
        let mut out = Vec::new();
        for (i, part) in partitions.iter().enumerate() {
            let m = minimality_check(process, part)?;
            let reduced = m.iter().filter(|x| matches!(x, Minimality::Reduced(_))).count();
            checks.push(Check::equal(format!("alpha[{i}].reduced_labels"), reduced as f64, 0.0));
            out.push(json!({ "alpha": c(part.alpha), "labels": m.iter().map(minimality_json).collect::<Vec<_>>() }));
        }
        results["minimality"] = Value::from(out);
    }
    if wants(Analysis::Aperiodicity) {
        let found = aperiodicity_check(process, APERIODICITY_MAX)?;
        results["aperiodicity"] = json!({
            "n_max": APERIODICITY_MAX,
            "reducible_power": found.as_ref().map(|r| r.k),
            "component": found.as_ref().map(|r| r.component.clone()),
            "witness": found.as_ref().and_then(|r| r.witness.as_ref()).map(|w| w.iter().map(mat).collect::<Vec<_>>()),
        });
        // the equivalence with |Gamma| is asserted on the trivial base only
        if n == 1 {
            let m = rep.gamma.len();
            let eigen = if m > 1 {
                let g = rep.gamma.iter().position(|g| g.order == m).ok_or_else(|| {
                    CliError::Numerical(eqp_core::Error::InternalInconsistency("Gamma is not cyclic".into()))
                })?;
                let et = eigentuple(process, &rep, rep.gamma[g].representative)?;
                let part = build_partition(process, &et, &rep.steady_state)?;
                Some(part.projections.iter().map(|p| p.blocks[0].clone()).collect::<Vec<_>>())
            } else {
                None
            };
            aperiodicity_checks(&mut checks, m, found.as_ref().map(|r| r.k), eigen.as_deref(), |k| {
                Ok(composed_channel(process, 0, k)?)
            })?;
        }
    }
    Ok((results, checks))
}

fn aperiodicity_checks(
    checks: &mut Vec<Check>,
    m: usize,
    found: Option<usize>,
    labels: Option<&[CMat]>,
    power: impl Fn(usize) -> Result<KrausChannel, CliError>,
) -> Result<(), CliError> {
    if m == 1 {
        checks.push(Check::holds("aperiodic_when_gamma_trivial", found.is_none()));
    } else {
        // the first reducible power is the least k with a nontrivial divisor of m
        let divides = found.is_some_and(|k| m % k == 0);
        checks.push(Check::holds("reducible_power_divides_gamma_order", divides));
        let ch = power(m)?;
        let r = witness_residual(&ch, labels.unwrap_or_default());
        checks.push(Check::at_most("label_projections_reduce_power", r, LAW_TOL));
    }
    Ok(())
}

fn partition_json(
    part: &PeriodicPartition,
    laws: &eqp_core::periodicity::PartitionResiduals,
    shift: f64,
    taus: &[usize],
    density: f64,
) -> Value {
    json!({
        "alpha": c(part.alpha),
        "N_alpha": part.n_alpha,
        "sigma_table": part.sigma,
        "xi_table": part.xi,
        "a_f": part.a_f,
        "tau_table": taus,
        "tau_density": density,
        "match_distance": part.match_distance,
        "projections": part.projections.iter().map(blocks).collect::<Vec<_>>(),
        "residuals": {
            "shift_relation": shift,
            "range_containment": laws.range_containment,
            "block_diagonal": laws.block_diagonal,
            "reconstruction": laws.reconstruction,
            "trace_law": laws.trace_law,
            "transport": laws.transport,
            "partition_of_unity": laws.partition_of_unity,
        },
    })
}

fn minimality_json(m: &Minimality) -> Value {
    match m {
        Minimality::Minimal => json!("minimal"),
        Minimality::Reduced(q) => json!({ "reduced": mat(q) }),
        Minimality::Inconclusive { rank } => json!({ "inconclusive_rank": rank }),
    }
}

/// Determinism probe and aperiodicity for an i.i.d. base.
pub fn iid_suite(process: &ProcessInstance, samples: usize, analyses: &[Analysis]) -> Result<(Value, Vec<Check>), CliError> {
    let probe = iid_determinism_probe(process, samples, IID_WINDOW)?;
    let mut checks = vec![
        Check::at_most("u_variance", probe.u_variance, LAW_TOL),
        Check::at_most("projection_deviation", probe.projection_deviation, LAW_TOL),
        Check::equal(
            "label_shift_constant",
            probe.sigma.map_or(-1.0, |s| s as f64),
            probe.sigma_expected as f64,
        ),
        Check::holds("first_return_is_n_alpha", probe.tau_constant),
    ];
    let mut results = json!({
        "lambda": cs(&probe.lambda),
        "alpha": probe.alpha.map(c),
        "N_alpha": probe.n_alpha,
        "u": probe.u.as_ref().map(mat),
        "projections": probe.projections.iter().map(mat).collect::<Vec<_>>(),
        "u_deviation": probe.u_deviation,
        "u_variance": probe.u_variance,
        "projection_deviation": probe.projection_deviation,
        "zeta_residual": probe.zeta_residual,
        "sigma": probe.sigma,
        "sigma_expected": probe.sigma_expected,
        "tau_constant": probe.tau_constant,
        "samples": probe.samples,
    });
    if analyses.contains(&Analysis::Aperiodicity) {
        let found = aperiodicity_check(process, APERIODICITY_MAX)?;
        results["aperiodicity"] = json!({
            "n_max": APERIODICITY_MAX,
            "reducible_power": found.as_ref().map(|r| r.k),
        });
        let avg = averaged_channel(process)?;
        aperiodicity_checks(&mut checks, probe.n_alpha, found.map(|r| r.k), Some(&probe.projections), |k| {
            let mut p = avg.clone();
            for _ in 1..k {
                p = p.then(&avg)?.compressed();
            }
            Ok(p)
        })?;
    }
    Ok((results, checks))
}

pub fn ehk(args: &EhkArgs) -> Result<Report, CliError> {
    let cfg = read_config(&args.config)?;
    if cfg.channels.len() != 1 {
        return Err(CliError::Config(format!("ehk takes exactly one channel, got {}", cfg.channels.len())));
    }
    let tol = args.common.tol.unwrap_or(cfg.tolerances.peripheral);
    let ch = cfg.kraus_channels()?.remove(0);
    let dig = digest("ehk", Some(&cfg), args);
    let (results, checks) = ehk_suite(&ch, tol, args.common.seed.unwrap_or(cfg.seed), args.n_max)?;
    Ok(Report::new("ehk", dig, results, checks, None))
}

/// Peripheral group, cyclic partition and primitivity of one channel.
pub fn ehk_suite(ch: &KrausChannel, tol: f64, seed: u64, n_max: u64) -> Result<(Value, Vec<Check>), CliError> {
    let d = ch.dim();
    let r = is_irreducible(ch)?;
    if !r.irreducible {
        let results = json!({ "irreducible": false, "witness": r.witness.as_ref().map(mat) });
        return Ok((results, vec![Check::holds("irreducible", false)]));
    }
    let r = eqp_core::pf::ehk_partition(ch)?;
    let rho = r.steady_state.clone().expect("irreducible");
    let mut rng = stream_rng(seed, 0);
    let probes: Vec<CMat> = (0..8).map(|_| random_density(&mut rng, d)).collect();
    let shift = partition_shift_residual(ch, &r.partition, &probes);
    let decomposition = steady_state_decomposition_residual(&rho, &r.partition);
    let unity = partition_of_unity_residual(&r.partition);
    let closure = group_closure_residual(&r.peripheral_group);
    let (primitive, trace) = is_primitive(ch, n_max, tol)?;
    let checks = vec![
        Check::at_most("group_closure", closure, tol),
        Check::at_most("m_at_most_d", r.m as f64, d as f64),
        Check::at_most("partition_shift", shift, tol),
        Check::at_most("steady_state_decomposition", decomposition, tol),
        Check::at_most("partition_of_unity", unity, tol),
        Check::holds("primitive_iff_m_is_1", primitive == (r.m == 1)),
    ];
    let results = json!({
        "irreducible": true,
        "steady_state": mat(&rho),
        "peripheral_group": cs(&r.peripheral_group),
        "m": r.m,
        "partition": r.partition.iter().map(mat).collect::<Vec<_>>(),
        "primitive": primitive,
        "power_trace": trace.iter().map(|&(n, dev)| json!([n, dev])).collect::<Vec<_>>(),
    });
    Ok((results, checks))
}

/// `max_{a, b} min_c |a b - c|` over the group elements.
pub fn group_closure_residual(g: &[C64]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in g {
        for b in g {
            let p = a * b;
            worst = worst.max(g.iter().map(|c| (p - c).norm()).fold(f64::INFINITY, f64::min));
        }
    }
    worst
}

pub fn simulate(args: &ExperimentArgs) -> Result<Report, CliError> {
    run_experiment("simulate", args, 1)
}

pub fn examples(args: &ExperimentArgs) -> Result<Report, CliError> {
    run_experiment("examples", args, 8)
}

fn run_experiment(verb: &str, args: &ExperimentArgs, default_seeds: u64) -> Result<Report, CliError> {
    if registry::find(&args.name).is_none() {
        let names: Vec<&str> = EXAMPLES.iter().map(|e| e.name).collect();
        return Err(CliError::Usage(format!("unknown name {:?}; expected one of {}", args.name, names.join(", "))));
    }
    let seed = args.common.seed.unwrap_or(DEFAULT_SEED);
    let seeds = args.seeds.unwrap_or(default_seeds).max(1);
    let command = format!("{verb} {}", args.name);
    let dig = digest(&command, None, args);
    let (results, checks, series) = match args.name.as_str() {
        "quasiperiodic" => quasiperiodic(args, seed, seeds)?,
        "haar" => haar(args, seed, seeds)?,
        "iid-decorated-shift" => {
            let d = args.d.unwrap_or(3);
            let support = args.support.unwrap_or(4);
            if d < 2 || support == 0 {
                return Err(CliError::Usage("need --d >= 2 and --support >= 1".into()));
            }
            let mut rng = stream_rng(seed, 1);
            let p = instances::iid_decorated_shift(&mut rng, d, support, seed);
            let all = [Analysis::Aperiodicity];
            let (r, ch) = iid_suite(&p, args.samples.unwrap_or(10_000), &all)?;
            (r, ch, None)
        }
        "cyclic-shift" => {
            let d = args.d.unwrap_or(3);
            if d < 2 {
                return Err(CliError::Usage("need --d >= 2".into()));
            }
            let (r, ch) = cyclic_shift(d, args, seed)?;
            (r, ch, None)
        }
        "decorated-cycle" => {
            let (n, d) = (args.n.unwrap_or(3), args.d.unwrap_or(2));
            if n == 0 || d < 2 {
                return Err(CliError::Usage("need --n >= 1 and --d >= 2".into()));
            }
            let mut rng = stream_rng(seed, 1);
            let p = instances::random_decorated_cycle(&mut rng, n, d, 0.25);
            let (r, ch) = finite_suite(&p, &full_suite(args, seed))?;
            (r, ch, None)
        }
        _ => unreachable!("name checked against the registry"),
    };
    Ok(Report::new(&command, dig, results, checks, series))
}

fn full_suite(args: &ExperimentArgs, seed: u64) -> SuiteOptions {
    SuiteOptions {
        analyses: vec![
            Analysis::Spectral,
            Analysis::Partition,
            Analysis::Cesaro,
            Analysis::Minimality,
            Analysis::Aperiodicity,
        ],
        tol: args.common.tol.unwrap_or(1e-8),
        seed,
        n_avg: args.n_avg,
        samples: args.samples.unwrap_or(50),
    }
}

fn cyclic_shift(d: usize, args: &ExperimentArgs, seed: u64) -> Result<(Value, Vec<Check>), CliError> {
    let p = instances::cyclic_shift(d);
    let (mut results, mut checks) = finite_suite(&p, &full_suite(args, seed))?;
    let (ehk_results, ehk_checks) = ehk_suite(&p.channels()[0], 1e-8, seed, 1 << 30)?;
    let group: Vec<C64> = ehk_results["peripheral_group"]
        .as_array()
        .map(|a| a.iter().map(|z| C64::new(z[0].as_f64().unwrap_or(f64::NAN), z[1].as_f64().unwrap_or(f64::NAN))).collect())
        .unwrap_or_default();
    let roots_gap = (0..d)
        .map(|k| group.iter().map(|z| (z - e1(k as f64 / d as f64)).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let rho = eqp_core::pf::ehk_partition(&p.channels()[0])?.steady_state.expect("irreducible");
    let rho_gap = (&rho - &CMat::identity(d).scale_re(1.0 / d as f64)).max_abs();
    checks.push(Check::equal("gamma_order", group.len() as f64, d as f64));
    checks.push(Check::at_most("roots_of_unity", roots_gap, 1e-8));
    checks.push(Check::at_most("steady_state_is_maximally_mixed", rho_gap, 1e-10));
    checks.extend(ehk_checks.into_iter().map(|mut c| {
        c.name = format!("ehk.{}", c.name);
        c
    }));
    results["ehk"] = ehk_results;
    Ok((results, checks))
}

type Experiment = (Value, Vec<Check>, Option<Series>);

fn seed_list(seed: u64, seeds: u64) -> Vec<u64> {
    (0..seeds).map(|i| seed.wrapping_add(i)).collect()
}

fn quasiperiodic(args: &ExperimentArgs, seed: u64, seeds: u64) -> Result<Experiment, CliError> {
    let t = args.t.unwrap_or(GOLDEN_T);
    let horizon = args.common.horizon.unwrap_or(100_000);
    let runs = seed_list(seed, seeds)
        .into_par_iter()
        .map(|s| quasiperiodic_experiment(t, horizon, s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut checks = Vec::new();
    let mut series = Series::new(&[
        "seed",
        "start",
        "eigen_residual",
        "p_tau_one",
        "tau_density",
        "phase_average_re",
        "phase_average_im",
    ]);
    for r in &runs {
        let tag = |s: &str| format!("seed[{}].{s}", r.seed);
        checks.push(Check::at_most(tag("eigen_residual"), r.eigen_residual, 1e-10));
        checks.push(Check::at_most(tag("p_tau_one_error"), (r.p_tau_one - t).abs(), 2e-2));
        checks.push(Check::at_most(tag("tau_density_error"), (r.tau_density - 0.5).abs(), 2e-2));
        series.push(vec![
            r.seed as f64,
            r.start,
            r.eigen_residual,
            r.p_tau_one,
            r.tau_density,
            r.phase_average.re,
            r.phase_average.im,
        ]);
    }
    let results = json!({
        "t": t,
        "horizon": horizon,
        "runs": runs.iter().map(|r| json!({
            "seed": r.seed,
            "start": r.start,
            "alpha": c(r.alpha),
            "eigen_residual": r.eigen_residual,
            "p_tau_one": r.p_tau_one,
            "tau_density": r.tau_density,
            "phase_average": c(r.phase_average),
            "phase_expected": c(r.phase_expected),
            "partition_residual": r.partition_residual,
        })).collect::<Vec<_>>(),
    });
    Ok((results, checks, Some(series)))
}

fn haar(args: &ExperimentArgs, seed: u64, seeds: u64) -> Result<Experiment, CliError> {
    let d = args.d.unwrap_or(2);
    let rank = args.rank.unwrap_or(1);
    let steps = args.steps.unwrap_or(100);
    let runs = seed_list(seed, seeds)
        .into_par_iter()
        .map(|s| haar_experiment(d, rank, steps, s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut checks = Vec::new();
    let mut series = Series::new(&["seed", "trace_deficit_error", "projection_residual", "min_deviation", "nontrivial_alphas"]);
    for r in &runs {
        let tag = |s: &str| format!("seed[{}].{s}", r.seed);
        checks.push(Check::at_most(tag("trace_deficit_error"), r.trace_deficit_error, 1e-8));
        checks.push(Check::at_least(tag("deviation"), r.min_deviation, 1.0 / d as f64 - 1e-8));
        checks.push(Check::equal(tag("nontrivial_alphas"), r.nontrivial_alphas.len() as f64, 0.0));
        series.push(vec![
            r.seed as f64,
            r.trace_deficit_error,
            r.projection_residual,
            r.min_deviation,
            r.nontrivial_alphas.len() as f64,
        ]);
    }
    let results = json!({
        "d": d,
        "rank": rank,
        "steps": steps,
        "runs": runs.iter().map(|r| json!({
            "seed": r.seed,
            "trace_deficit_error": r.trace_deficit_error,
            "projection_residual": r.projection_residual,
            "min_deviation": num(r.min_deviation),
            "nontrivial_alphas": cs(&r.nontrivial_alphas),
        })).collect::<Vec<_>>(),
    });
    Ok((results, checks, Some(series)))
}
