//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use eqp_core::base::{Base, ProcessInstance};
use eqp_core::global::{composed_channel, eigentuple, peripheral_and_gamma};
use eqp_core::instances;
use eqp_core::periodicity::{
    aperiodicity_check, build_partition, cesaro_checks, cesaro_projector, verify_partition_laws,
    verify_shift_relation, witness_residual, PeriodicPartition,
};
use eqp_core::pf::{certify_simple, ehk_partition, is_irreducible, is_primitive, partition_shift_residual};
use eqp_core::random::{random_block_cyclic, random_channel, random_density, stream_rng};
use eqp_core::trajectory::{haar_experiment, iid_determinism_probe, quasiperiodic_experiment};
use eqp_core::{CMat, KrausChannel, C64};
use rand::Rng;

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("1 cyclic shift", cyclic_shift, Duration::from_secs(5)),
        ("2 single-channel suite", single_channel_suite, Duration::from_secs(60)),
        ("3 finite-base structure", finite_base_structure, Duration::from_secs(30)),
        ("4 quasiperiodic", quasiperiodic, Duration::from_secs(30)),
        ("5 haar", haar, Duration::from_secs(60)),
        ("6 iid determinism", iid_determinism, Duration::from_secs(60)),
        ("7 cesaro projector", cesaro, Duration::from_secs(60)),
        ("8 aperiodicity", aperiodicity, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (name, f, budget) in criteria {
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let ok = out.failures.is_empty() && took <= budget;
        println!(
            "{} criterion {name}: {} ({:.2}s, budget {}s)",
            if ok { "PASS" } else { "FAIL" },
            out.summary,
            took.as_secs_f64(),
            budget.as_secs()
        );
        for f in out.failures.iter().take(10) {
            println!("    {f}");
        }
        failed += usize::from(!ok);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

#[derive(Default)]
struct Outcome {
    summary: String,
    failures: Vec<String>,
}

impl Outcome {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn le(&mut self, label: &str, value: f64, tol: f64) {
        self.check(value <= tol, || format!("{label}: {value:e} > {tol:e}"));
    }
}

fn unit(turns: f64) -> C64 {
    C64::new((TAU * turns).cos(), (TAU * turns).sin())
}

/// Largest distance from a member of `want` to the nearest member of `have`.
fn set_gap(want: &[C64], have: &[C64]) -> f64 {
    want.iter().map(|w| have.iter().map(|h| (h - w).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

fn basis_projection(d: usize, k: usize) -> CMat {
    CMat::ket_bra(d, k, k)
}

fn basis_index(p: &CMat, tol: f64) -> Option<usize> {
    let d = p.rows();
    (0..d).find(|&k| (p - &basis_projection(d, k)).max_abs() <= tol)
}

fn cyclic_shift() -> Outcome {
    let mut o = Outcome::default();
    let mut worst: f64 = 0.0;
    for d in 2..=6 {
        let start = Instant::now();
        let ch = KrausChannel::cyclic_shift(d);
        let r = match ehk_partition(&ch) {
            Ok(r) => r,
            Err(e) => {
                o.failures.push(format!("d={d}: {e}"));
                continue;
            }
        };
        let roots: Vec<C64> = (0..d).map(|k| unit(k as f64 / d as f64)).collect();
        o.check(r.peripheral_group.len() == d, || format!("d={d}: group size {}", r.peripheral_group.len()));
        o.le(&format!("d={d} roots"), set_gap(&roots, &r.peripheral_group).max(set_gap(&r.peripheral_group, &roots)), 1e-8);
        let t = ch.transfer();
        for &z in &r.peripheral_group {
            o.check(certify_simple(&t, z).is_ok(), || format!("d={d}: {z} not simple"));
        }
        // partition: basis projections, each mapped onto the next by the channel
        let idx: Vec<Option<usize>> = r.partition.iter().map(|p| basis_index(p, 1e-10)).collect();
        o.check(idx.iter().all(Option::is_some), || format!("d={d}: partition is not the basis"));
        for k in 0..r.partition.len() {
            let img = ch.apply(&r.partition[k]).expect("square");
            let next = &r.partition[(k + 1) % r.partition.len()];
            o.le(&format!("d={d} shift {k}"), (&img - next).max_abs(), 1e-10);
            if let Some(j) = idx[k] {
                o.check(idx[(k + 1) % d] == Some((j + 1) % d), || format!("d={d}: label {k} does not shift by one"));
            }
        }
        let rho = r.steady_state.clone().expect("irreducible");
        o.le(&format!("d={d} rho"), (&rho - &CMat::identity(d).scale_re(1.0 / d as f64)).max_abs(), 1e-10);
        let took = start.elapsed().as_secs_f64();
        worst = worst.max(took);
        o.check(took < 1.0, || format!("d={d}: {took:.3}s"));
    }
    o.summary = format!("d=2..6, slowest {worst:.3}s");
    o
}

fn single_channel_suite() -> Outcome {
    let mut o = Outcome::default();
    let mut rng = stream_rng(2024, 0);
    let (mut primitive, mut periodic, mut redrawn) = (0, 0, 0);
    for d in 2..=4usize {
        let mut done = 0;
        while done < 100 {
            // even draws: generic channels (expected m = 1); odd draws: block-cyclic with known period
            let (ch, dims) = if done % 2 == 0 {
                let k = rng.random_range(2..=4);
                (random_channel(&mut rng, d, k), None)
            } else {
                let m = rng.random_range(2..=d);
                let mut dims = vec![1usize; m];
                for _ in m..d {
                    dims[rng.random_range(0..m)] += 1;
                }
                let k = rng.random_range(2..=3);
                (random_block_cyclic(&mut rng, &dims, 1, k), Some(dims))
            };
            match is_irreducible(&ch) {
                Ok(r) if r.irreducible => {}
                _ => {
                    redrawn += 1;
                    continue;
                }
            }
            done += 1;
            let tag = format!("d={d} #{done}");
            let r = match ehk_partition(&ch) {
                Ok(r) => r,
                Err(e) => {
                    o.failures.push(format!("{tag}: {e}"));
                    continue;
                }
            };
            let g = &r.peripheral_group;
            let closure = g
                .iter()
                .flat_map(|a| g.iter().map(move |b| a * b))
                .map(|p| g.iter().map(|c| (p - c).norm()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            o.le(&format!("{tag} closure"), closure, 1e-8);
            o.check(r.m <= d, || format!("{tag}: m = {} > d", r.m));
            let expected_m = dims.as_ref().map_or(1, |x| x.len());
            o.check(r.m == expected_m, || format!("{tag}: m = {}, constructed period {expected_m}", r.m));
            let probes: Vec<CMat> = (0..6).map(|_| random_density(&mut rng, d)).collect();
            o.le(&format!("{tag} shift"), partition_shift_residual(&ch, &r.partition, &probes), 1e-8);
            // rho is fixed and splits evenly over the partition
            let rho = r.steady_state.clone().expect("irreducible");
            o.le(&format!("{tag} fixed"), (&ch.apply(&rho).expect("square") - &rho).max_abs(), 1e-8);
            let mut blocks = CMat::zeros(d, d);
            for p in &r.partition {
                let w = (&rho * p).trace().re;
                o.le(&format!("{tag} weight"), (w - 1.0 / r.m as f64).abs(), 1e-8);
                blocks += &(&(p * &rho) * p);
            }
            o.le(&format!("{tag} block diagonal"), (&blocks - &rho).max_abs(), 1e-8);
            match is_primitive(&ch, 1 << 40, 1e-8) {
                Ok((prim, _)) => {
                    o.check(prim == (r.m == 1), || format!("{tag}: primitive={prim}, m={}", r.m));
                    if prim {
                        primitive += 1
                    } else {
                        periodic += 1
                    }
                }
                Err(e) => o.failures.push(format!("{tag}: primitivity {e}")),
            }
        }
    }
    o.summary = format!("300 channels ({primitive} primitive, {periodic} periodic, {redrawn} reducible redrawn)");
    o
}

fn partitions_of(p: &ProcessInstance, o: &mut Outcome, tag: &str) -> Option<(Vec<PeriodicPartition>, eqp_core::global::RandomMatrix)> {
    let rep = match peripheral_and_gamma(p, 1e-8) {
        Ok(r) => r,
        Err(e) => {
            o.failures.push(format!("{tag}: {e}"));
            return None;
        }
    };
    let mut parts = Vec::new();
    for g in &rep.gamma {
        match eigentuple(p, &rep, g.representative).and_then(|et| build_partition(p, &et, &rep.steady_state)) {
            Ok(part) => parts.push(part),
            Err(e) => o.failures.push(format!("{tag} alpha {}: {e}", g.representative)),
        }
    }
    Some((parts, rep.steady_state))
}

fn finite_base_structure() -> Outcome {
    let mut o = Outcome::default();
    let mut count = 0;
    for n in 1..=8usize {
        for d in 2..=3usize {
            for s in 0..3u64 {
                let mut rng = stream_rng(300 + s, (n * 10 + d) as u64);
                let p = instances::random_decorated_cycle(&mut rng, n, d, 0.25);
                let tag = format!("n={n} d={d} s={s}");
                count += 1;
                let rep = match peripheral_and_gamma(&p, 1e-8) {
                    Ok(r) => r,
                    Err(e) => {
                        o.failures.push(format!("{tag}: {e}"));
                        continue;
                    }
                };
                let koopman: Vec<C64> = (0..n).map(|k| unit(k as f64 / n as f64)).collect();
                o.le(&format!("{tag} koopman"), set_gap(&koopman, &rep.lambda_l), 1e-8);
                // off-diagonal blocks contract, the diagonal is a cyclic permutation of length d
                o.check(rep.lambda_l.len() == n * d, || format!("{tag}: {} peripheral values", rep.lambda_l.len()));
                o.check(rep.gamma.len() == d && d * d >= rep.gamma.len(), || format!("{tag}: |Gamma| = {}", rep.gamma.len()));
                let Some((parts, rho)) = partitions_of(&p, &mut o, &tag) else { continue };
                let base = p.finite_base().expect("finite");
                for part in &parts {
                    let nn = part.n_alpha;
                    o.check(nn <= d, || format!("{tag}: N = {nn}"));
                    o.le(&format!("{tag} match"), part.match_distance, 1e-7);
                    match verify_shift_relation(&p, part) {
                        Ok(r) => o.le(&format!("{tag} shift"), r, 1e-8),
                        Err(e) => o.failures.push(format!("{tag}: {e}")),
                    }
                    for w in 0..n {
                        for k in 0..nn {
                            let tr = (&rho.blocks[w] * &part.projections[k].blocks[w]).trace();
                            o.le(&format!("{tag} trace w={w} k={k}"), (tr - C64::new(1.0 / nn as f64, 0.0)).norm(), 1e-8);
                        }
                    }
                    // skew product walked directly from (0, 0)
                    let (mut w, mut x, mut len, mut zeros) = (0usize, 0usize, 0usize, 0usize);
                    loop {
                        zeros += usize::from(x == 0);
                        x = (x + nn - part.sigma[w] % nn) % nn;
                        w = base.theta(w);
                        len += 1;
                        if (w, x) == (0, 0) {
                            break;
                        }
                    }
                    o.check(len == n * nn, || format!("{tag}: skew cycle {len} of {}", n * nn));
                    o.check(zeros * nn == len, || format!("{tag}: {zeros} zero visits in {len}"));
                    let mut prng = stream_rng(s, 99);
                    if let Ok(r) = verify_partition_laws(&p, part, &rho, &mut prng, 4) {
                        o.le(&format!("{tag} laws"), r.max(), 1e-8);
                    }
                }
            }
        }
    }
    o.summary = format!("{count} decorated cycles, n <= 8, d <= 3");
    o
}

fn quasiperiodic() -> Outcome {
    let mut o = Outcome::default();
    let t = 0.6180339887;
    // closed-form eigen-unitary checked by hand at random angles
    let alpha = -unit(t / 2.0);
    let mut rng = stream_rng(44, 0);
    for _ in 0..1000 {
        let s: f64 = rng.random();
        let next = (s + t).fract();
        let u = |a: f64| (unit(a / 2.0), -unit(a / 2.0));
        let (a, b) = u(next);
        // pinching keeps the diagonal, swap exchanges it
        let img = if next < t { (a, b) } else { (b, a) };
        let (c, dd) = u(s);
        o.le("closed form", (img.0 - alpha * c).norm().max((img.1 - alpha * dd).norm()), 1e-12);
    }
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for seed in 0..8 {
        match quasiperiodic_experiment(t, 100_000, seed) {
            Ok(r) => {
                o.le(&format!("seed {seed} eigen"), r.eigen_residual, 1e-10);
                o.le(&format!("seed {seed} P(tau=1)"), (r.p_tau_one - t).abs(), 2e-2);
                o.le(&format!("seed {seed} density"), (r.tau_density - 0.5).abs(), 2e-2);
                worst.0 = worst.0.max(r.eigen_residual);
                worst.1 = worst.1.max((r.p_tau_one - t).abs());
                worst.2 = worst.2.max((r.tau_density - 0.5).abs());
            }
            Err(e) => o.failures.push(format!("seed {seed}: {e}")),
        }
    }
    o.summary = format!(
        "8 seeds, eigen residual {:.1e}, |P(tau=1) - t| {:.1e}, |density - 1/2| {:.1e}",
        worst.0, worst.1, worst.2
    );
    o
}

fn haar() -> Outcome {
    let mut o = Outcome::default();
    let mut min_dev = f64::INFINITY;
    for d in 2..=3usize {
        for rank in 1..d {
            for seed in 0..8 {
                let tag = format!("d={d} r={rank} seed={seed}");
                match haar_experiment(d, rank, 100, seed) {
                    Ok(r) => {
                        o.le(&format!("{tag} deficit"), r.trace_deficit_error, 1e-8);
                        // a rotated projection stays a projection of rank r: distance 2 r (d - r) / d
                        let expected = 2.0 * (rank * (d - rank)) as f64 / d as f64;
                        o.le(&format!("{tag} deviation formula"), (r.min_deviation - expected).abs(), 1e-8);
                        o.check(r.min_deviation >= 1.0 / d as f64 - 1e-12, || format!("{tag}: deviation {}", r.min_deviation));
                        o.check(r.nontrivial_alphas.is_empty(), || format!("{tag}: alphas {:?}", r.nontrivial_alphas));
                        min_dev = min_dev.min(r.min_deviation * d as f64);
                    }
                    Err(e) => o.failures.push(format!("{tag}: {e}")),
                }
            }
        }
    }
    o.summary = format!("d in {{2,3}}, n = 100, 8 seeds; min d * deviation {min_dev:.3}");
    o
}

fn iid_determinism() -> Outcome {
    let mut o = Outcome::default();
    let mut rng = stream_rng(6, 1);
    let p = instances::iid_decorated_shift(&mut rng, 3, 4, 6);
    let r = match iid_determinism_probe(&p, 10_000, 16) {
        Ok(r) => r,
        Err(e) => {
            o.failures.push(e.to_string());
            return o;
        }
    };
    let roots: Vec<C64> = (0..3).map(|k| unit(k as f64 / 3.0)).collect();
    o.check(r.lambda.len() == 3, || format!("|Lambda| = {}", r.lambda.len()));
    o.le("Lambda = cube roots", set_gap(&roots, &r.lambda), 1e-8);
    o.le("u variance", r.u_variance, 1e-8);
    o.le("projection deviation", r.projection_deviation, 1e-8);
    // diagonal eigen-unitary: the labels are the basis projections
    let mut idx: Vec<Option<usize>> = r.projections.iter().map(|q| basis_index(q, 1e-8)).collect();
    idx.sort();
    o.check(idx == vec![Some(0), Some(1), Some(2)], || format!("projections are not the basis: {idx:?}"));
    o.check(r.n_alpha == 3, || format!("N = {}", r.n_alpha));
    o.check(r.sigma.is_some() && r.sigma == Some(r.sigma_expected), || {
        format!("sigma {:?}, expected {}", r.sigma, r.sigma_expected)
    });
    o.check(r.tau_constant, || "tau is not N at every sample".into());
    o.summary = format!(
        "10^4 samples, u variance {:.1e}, sigma {:?}, tau = N = {}",
        r.u_variance, r.sigma, r.n_alpha
    );
    o
}

fn cesaro() -> Outcome {
    let mut o = Outcome::default();
    let mut set: Vec<(String, ProcessInstance)> = (2..=6).map(|d| (format!("shift d={d}"), instances::cyclic_shift(d))).collect();
    set.push(("pinching/swap".into(), instances::pinching_swap_pair()));
    for (n, d, s) in [(1, 2, 0), (2, 2, 1), (3, 3, 2), (5, 2, 3), (4, 3, 4)] {
        let mut rng = stream_rng(700 + s, 0);
        set.push((format!("decorated n={n} d={d}"), instances::random_decorated_cycle(&mut rng, n, d, 0.25)));
    }
    let mut projectors = 0;
    let mut worst: f64 = 0.0;
    for (tag, p) in &set {
        let Some((parts, rho)) = partitions_of(p, &mut o, tag) else { continue };
        for part in &parts {
            let proj = match cesaro_projector(p, part, 1 << 26) {
                Ok(x) => x,
                Err(e) => {
                    o.failures.push(format!("{tag}: {e}"));
                    continue;
                }
            };
            projectors += 1;
            let e = &proj.matrix;
            let idem = (&(e * e) - e).max_abs();
            worst = worst.max(idem);
            o.le(&format!("{tag} idempotency"), idem, 1e-6);
            let mut rng = stream_rng(71, projectors);
            let c = cesaro_checks(&proj, &rho, &mut rng, 50);
            o.le(&format!("{tag} inner product"), c.inner_product_law, 1e-6);
            o.check(c.faithfulness > 1e-9, || format!("{tag}: faithfulness {:e}", c.faithfulness));
        }
    }
    o.summary = format!("{} instances, {projectors} projectors, n_avg = 2^26, worst idempotency {worst:.1e}", set.len());
    o
}

fn aperiodicity() -> Outcome {
    let mut o = Outcome::default();
    let mut rng = stream_rng(8, 0);
    let trivial = |ch: KrausChannel| ProcessInstance::finite_cycle(vec![ch]).expect("valid");
    // Gamma trivial: no reducible power up to 8
    let mut flat = vec![
        ("depolarizing".to_string(), trivial(KrausChannel::depolarizing(2, 0.5))),
        ("random d=3".to_string(), trivial(random_channel(&mut rng, 3, 2))),
    ];
    let support: Vec<KrausChannel> = (0..3).map(|_| random_channel(&mut rng, 2, 2)).collect();
    flat.push(("iid random".into(), ProcessInstance::iid(support, vec![0.5, 0.25, 0.25], 8).expect("valid")));
    for (tag, p) in &flat {
        match aperiodicity_check(p, 8) {
            Ok(r) => o.check(r.is_none(), || format!("{tag}: reducible power {:?}", r.map(|x| x.k))),
            Err(e) => o.failures.push(format!("{tag}: {e}")),
        }
    }
    // Gamma = Z/m: some power dividing m is reducible, and the m-th power keeps every label
    let mut periodic: Vec<(String, ProcessInstance, usize)> =
        (2..=6).map(|d| (format!("shift d={d}"), instances::cyclic_shift(d), d)).collect();
    for dims in [vec![1, 1, 1], vec![2, 2], vec![1, 2, 1]] {
        let m = dims.len();
        periodic.push((format!("block {dims:?}"), trivial(random_block_cyclic(&mut rng, &dims, 1, 2)), m));
    }
    let mut irng = stream_rng(8, 1);
    periodic.push(("iid decorated d=3".into(), instances::iid_decorated_shift(&mut irng, 3, 4, 8), 3));
    for (tag, p, m) in &periodic {
        let found = match aperiodicity_check(p, 8) {
            Ok(r) => r,
            Err(e) => {
                o.failures.push(format!("{tag}: {e}"));
                continue;
            }
        };
        o.check(found.as_ref().is_some_and(|r| m % r.k == 0), || format!("{tag}: reducible power {:?}", found.map(|r| r.k)));
        let (labels, powers): (Vec<CMat>, Vec<KrausChannel>) = match p.base() {
            Base::Iid(_) => {
                let r = iid_determinism_probe(p, 16, 16).expect("probe");
                (r.projections, words(p.channels(), *m))
            }
            _ => {
                let r = ehk_partition(&p.channels()[0]).expect("irreducible");
                (r.partition, vec![composed_channel(p, 0, *m).expect("finite")])
            }
        };
        o.check(labels.len() == *m, || format!("{tag}: {} labels", labels.len()));
        for ch in &powers {
            o.le(&format!("{tag} witness"), witness_residual(ch, &labels), 1e-8);
        }
    }
    o.summary = format!("{} aperiodic and {} periodic instances, n_max = 8", flat.len(), periodic.len());
    o
}

/// Every composition of `len` channels drawn from `support`.
fn words(support: &[KrausChannel], len: usize) -> Vec<KrausChannel> {
    let mut out: Vec<KrausChannel> = support.to_vec();
    for _ in 1..len {
        out = out.iter().flat_map(|w| support.iter().map(move |c| w.then(c).expect("same dim").compressed())).collect();
    }
    out
}
