//! Orbit-level simulation: composed channels along sampled orbits and the
//! rotation, Haar and i.i.d. experiments.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::base::{Base, ProcessInstance, Start};
use crate::channel::{KrausChannel, CLUSTER_TOL};
use crate::error::{Error, Result};
use crate::global::wrapped_turns;
use crate::instances;
use crate::linalg::{c64, e1, eigenvalues, null_space, spectral_projections, CMat, C64};
use crate::periodicity::{alpha_turns, cesaro_phase_average, stopping_times, xi_sigma};
use crate::pf::gauge_fix;
use crate::random::{haar_unitary, stream_rng};
#[allow(unused_imports)]
use num_traits::Float;

/// Kraus operators are carried along a composition while their count stays below this.
pub const KRAUS_BUDGET: usize = 4096;
/// Kraus form is dropped after this many steps.
pub const KRAUS_STEPS: usize = 8;
/// Largest admissible trace-preservation drift of a transfer product.
pub const TP_DRIFT_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitComposition {
    pub n: usize,
    /// Transfer matrix of `phi_{theta^n w} ∘ ... ∘ phi_{theta w}`.
    pub transfer: CMat,
    /// Kraus form, kept for short compositions.
    pub kraus: Option<KrausChannel>,
    /// `||vec(I)^H T - vec(I)^H||_max`.
    pub tp_drift: f64,
    /// Difference between the full product and the product of its two halves, relative.
    pub associativity: f64,
}

fn tp_drift(t: &CMat, d: usize) -> f64 {
    let vi = CMat::identity(d).vectorize();
    let row = t.vecmat(&vi);
    row.iter().zip(&vi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

fn product(ts: &[CMat], d2: usize) -> CMat {
    ts.iter().fold(CMat::identity(d2), |acc, t| t * &acc)
}

/// Compose a list of channels in order: the first acts first.
pub fn compose_channels(chs: &[&KrausChannel]) -> Result<OrbitComposition> {
    let n = chs.len();
    if n == 0 {
        return Err(Error::InvalidInput("composition needs at least one step".into()));
    }
    let d = chs[0].dim();
    let d2 = d * d;
    let ts: Vec<CMat> = chs.iter().map(|c| c.transfer()).collect();
    let transfer = product(&ts, d2);
    let mid = n / 2;
    let split = &product(&ts[mid..], d2) * &product(&ts[..mid], d2);
    let associativity = (&split - &transfer).max_abs() / transfer.max_abs().max(1.0);
    let mut kraus = Some(chs[0].clone());
    for c in &chs[1..] {
        kraus = match kraus {
            Some(k) if n <= KRAUS_STEPS && k.kraus().len() * c.kraus().len() <= KRAUS_BUDGET => Some(k.then(c)?),
            _ => None,
        };
    }
    let drift = tp_drift(&transfer, d);
    if drift > TP_DRIFT_TOL {
        return Err(Error::NotConverged { what: "trace preservation of composed transfer", residual: drift });
    }
    Ok(OrbitComposition { n, transfer, kraus, tp_drift: drift, associativity })
}

/// `Phi^{(n)}` along the orbit of `start`.
pub fn compose_forward(process: &ProcessInstance, start: Start, n: usize) -> Result<OrbitComposition> {
    let orbit = process.orbit(start, n)?;
    let chs: Vec<&KrausChannel> = orbit.iter().map(|s| &process.channels()[s.channel]).collect();
    compose_channels(&chs)
}

/// Unimodular `alpha` admitting a common eigenvector of every matrix in `adjoint_transfers`,
/// with the joint eigenspace. Candidates come from the first matrix, so the search is exhaustive.
pub fn joint_peripheral(adjoint_transfers: &[CMat], tol: f64) -> Result<Vec<(C64, Vec<Vec<C64>>)>> {
    let first = adjoint_transfers.first().ok_or(Error::InvalidInput("no matrices".into()))?;
    let n = first.rows();
    let mut cands: Vec<C64> = Vec::new();
    for z in eigenvalues(first)? {
        if (z.norm() - 1.0).abs() <= tol.max(1e-8) && !cands.iter().any(|c| (c - z).norm() < 1e-6) {
            cands.push(z);
        }
    }
    let mut out = Vec::new();
    for alpha in cands {
        let mut stacked = CMat::zeros(n * adjoint_transfers.len(), n);
        for (i, t) in adjoint_transfers.iter().enumerate() {
            stacked.set_block(i * n, 0, &t.shift(alpha));
        }
        let ns = null_space(&stacked, 1e-8);
        if !ns.is_empty() {
            out.push((alpha, ns));
        }
    }
    out.sort_by(|a, b| {
        crate::linalg::phase_key(a.0)
            .partial_cmp(&crate::linalg::phase_key(b.0))
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    Ok(out)
}

fn unitary_from_vector(d: usize, v: &[C64]) -> CMat {
    let x = CMat::unvectorize(d, v);
    let s = (d as f64).sqrt() / x.norm_fro();
    gauge_fix(&x.scale_re(s))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HaarReport {
    pub d: usize,
    pub rank: usize,
    pub n_steps: usize,
    pub seed: u64,
    /// `max_n |tr(I - Phi^{(n)}(p)) - (d - rank)|`.
    pub trace_deficit_error: f64,
    /// `max_n ||Phi^{(n)}(p)^2 - Phi^{(n)}(p)||`.
    pub projection_residual: f64,
    /// `min_n ||(rank/d) I - Phi^{(n)}(p)||_1`.
    pub min_deviation: f64,
    /// Unimodular eigenvalues other than 1 shared by the sampled conjugations.
    pub nontrivial_alphas: Vec<C64>,
}

/// Haar-distributed unitary conjugations applied to the projection onto the first
/// `rank` basis vectors.
pub fn haar_experiment(d: usize, rank: usize, n_steps: usize, seed: u64) -> Result<HaarReport> {
    if !(2..=6).contains(&d) || rank > d {
        return Err(Error::InvalidInput(format!("need 2 <= d <= 6 and rank <= d, got d={d}, rank={rank}")));
    }
    let mut rng = stream_rng(seed, 0);
    let p = CMat::from_diag(&(0..d).map(|k| c64(if k < rank { 1.0 } else { 0.0 }, 0.0)).collect::<Vec<_>>());
    let id = CMat::identity(d);
    let mut w = id.clone();
    let mut trace_deficit_error: f64 = 0.0;
    let mut projection_residual: f64 = 0.0;
    let mut min_deviation = f64::INFINITY;
    let mut adj = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        let u = haar_unitary(&mut rng, d);
        w = &u * &w;
        adj.push(KrausChannel::unitary(u).transfer().adjoint());
        let q = &(&w * &p) * &w.adjoint();
        trace_deficit_error = trace_deficit_error.max(((&id - &q).trace().re - (d - rank) as f64).abs());
        projection_residual = projection_residual.max((&(&q * &q) - &q).max_abs());
        min_deviation = min_deviation.min((&id.scale_re(rank as f64 / d as f64) - &q).norm_trace());
    }
    let nontrivial_alphas = joint_peripheral(&adj, 1e-8)?
        .into_iter()
        .map(|(a, _)| a)
        .filter(|a| (a - c64(1.0, 0.0)).norm() > 1e-6)
        .collect();
    Ok(HaarReport {
        d,
        rank,
        n_steps,
        seed,
        trace_deficit_error,
        projection_residual,
        min_deviation,
        nontrivial_alphas,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuasiperiodicReport {
    pub t: f64,
    pub horizon: u64,
    pub seed: u64,
    pub start: f64,
    pub alpha: C64,
    /// `max_j ||phi^†_{theta w}(u_{theta w}) - alpha u_w||` along the orbit.
    pub eigen_residual: f64,
    /// Fraction of orbit points where one step already returns the label.
    pub p_tau_one: f64,
    pub tau_density: f64,
    pub phase_average: C64,
    /// Limit predicted from the uniform distribution of the phase.
    pub phase_expected: C64,
    /// `max ||p_k - |k><k|||` at the start point.
    pub partition_residual: f64,
}

fn closed_form_u(s: f64) -> CMat {
    CMat::from_diag(&[e1(s / 2.0), -e1(s / 2.0)])
}

/// Rotation by `t` with pinching and swap intervals, followed from a random start.
pub fn quasiperiodic_experiment(t: f64, horizon: u64, seed: u64) -> Result<QuasiperiodicReport> {
    let process = instances::quasiperiodic(t)?;
    let Base::Rotation(rot) = process.base() else { unreachable!("rotation instance") };
    let mut rng = stream_rng(seed, 0);
    let s0: f64 = rng.random();
    let alpha = -e1(t / 2.0);
    let ta = alpha_turns(alpha);
    let a_f = |s: f64| wrapped_turns(closed_form_u(s).powu(2).trace() / 2.0);
    let mut eigen_residual: f64 = 0.0;
    let mut sigmas = Vec::with_capacity(horizon as usize);
    let mut s = s0;
    for j in 1..=horizon {
        let next = rot.point(s0, j);
        let ch = &process.channels()[process.channel_index_at_angle(next)];
        let lhs = ch.adjoint_apply(&closed_form_u(next))?;
        eigen_residual = eigen_residual.max((&lhs - &closed_form_u(s).scale(alpha)).max_abs());
        sigmas.push(xi_sigma(a_f(s), a_f(next), ta, 2)?.1);
        s = next;
    }
    let p_tau_one = sigmas.iter().filter(|&&x| x == 0).count() as f64 / horizon as f64;
    let trace = stopping_times(sigmas.iter().copied(), 2, horizon)?;
    let phase_average = cesaro_phase_average(alpha, &trace)?;
    // mean of e(s/2) over s uniform in [0, 1) is 2i/pi
    let phase_expected = c64(0.0, 2.0 / core::f64::consts::PI) / e1(a_f(s0) / 2.0);
    let spec = spectral_projections(&closed_form_u(s0), CLUSTER_TOL)?;
    let mut partition_residual: f64 = 0.0;
    for k in 0..2 {
        let target = e1((a_f(s0) + k as f64) / 2.0);
        let (_, p) = spec
            .iter()
            .min_by(|a, b| (a.0 - target).norm().partial_cmp(&(b.0 - target).norm()).unwrap())
            .expect("two clusters");
        partition_residual = partition_residual.max((p - &CMat::ket_bra(2, k, k)).max_abs());
    }
    Ok(QuasiperiodicReport {
        t,
        horizon,
        seed,
        start: s0,
        alpha,
        eigen_residual,
        p_tau_one,
        tau_density: trace.density,
        phase_average,
        phase_expected,
        partition_residual,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IidDeterminismReport {
    /// Joint unimodular eigenvalues of the support, sorted by phase.
    pub lambda: Vec<C64>,
    /// Generator with the smallest positive phase, if `lambda` is nontrivial.
    pub alpha: Option<C64>,
    pub n_alpha: usize,
    /// Reference eigen-unitary at `alpha`.
    pub u: Option<CMat>,
    /// Deterministic projections `p_k`.
    pub projections: Vec<CMat>,
    /// `max_s ||u_s - u||` over sampled windows.
    pub u_deviation: f64,
    /// Mean of `||u_s - u||_F^2` over sampled windows.
    pub u_variance: f64,
    /// `max_s max_k ||p_{k, s} - p_k||`.
    pub projection_deviation: f64,
    /// `|| zeta u - sum_k e_N(k) p_k ||` for the best unit `zeta`.
    pub zeta_residual: f64,
    /// Observed label shift of each sampled step, if all agree.
    pub sigma: Option<usize>,
    /// Shift predicted by the phase of `alpha`.
    pub sigma_expected: usize,
    /// Whether the first stopping time equals `n_alpha` on every sample.
    pub tau_constant: bool,
    pub samples: usize,
}

fn label_projections_of(u: &CMat, a_f: f64, nn: usize) -> Result<Vec<CMat>> {
    let spec = spectral_projections(u, CLUSTER_TOL)?;
    if spec.len() != nn {
        return Err(Error::SpectrumMismatch { point: 0, detail: format!("{} clusters, expected {nn}", spec.len()) });
    }
    (0..nn)
        .map(|k| {
            let target = e1((a_f + k as f64) / nn as f64);
            let (l, p) = spec
                .iter()
                .min_by(|a, b| (a.0 - target).norm().partial_cmp(&(b.0 - target).norm()).unwrap())
                .expect("nonempty");
            if (l - target).norm() > 1e-5 {
                return Err(Error::SpectrumMismatch { point: 0, detail: format!("label {k} unmatched") });
            }
            Ok(p.clone())
        })
        .collect()
}

/// Recover the eigen-unitary of an i.i.d. process from sampled windows of
/// `window` steps and compare against the exact support solution.
pub fn iid_determinism_probe(process: &ProcessInstance, samples: usize, window: usize) -> Result<IidDeterminismReport> {
    if !matches!(process.base(), Base::Iid(_)) {
        return Err(Error::UnsupportedBase);
    }
    let d = process.dim();
    let adj: Vec<CMat> = process.channels().iter().map(|c| c.transfer().adjoint()).collect();
    let joint = joint_peripheral(&adj, 1e-8)?;
    let lambda: Vec<C64> = joint.iter().map(|(a, _)| *a).collect();
    let empty = IidDeterminismReport {
        lambda: lambda.clone(),
        alpha: None,
        n_alpha: 1,
        u: None,
        projections: vec![CMat::identity(d)],
        u_deviation: 0.0,
        u_variance: 0.0,
        projection_deviation: 0.0,
        zeta_residual: 0.0,
        sigma: Some(0),
        sigma_expected: 0,
        tau_constant: true,
        samples,
    };
    let Some((alpha, vs)) = joint.iter().find(|(a, _)| (a - c64(1.0, 0.0)).norm() > 1e-6).cloned() else {
        return Ok(empty);
    };
    if vs.len() != 1 {
        return Err(Error::SimplicityViolation { eigenvalue: alpha, s_min: 0.0, s_next: 0.0 });
    }
    let nn = lambda.len();
    let u = unitary_from_vector(d, &vs[0]);
    if !u.is_unitary(1e-9) {
        return Err(Error::NotUnitary { point: 0, residual: (&(&u.adjoint() * &u) - &CMat::identity(d)).max_abs() });
    }
    let f = u.powu(nn as u64).trace() / d as f64;
    let a_f = wrapped_turns(f);
    let projections = label_projections_of(&u, a_f, nn)?;
    let sigma_expected = xi_sigma(a_f, a_f, alpha_turns(alpha), nn)?.1;
    let labels: Vec<C64> = (0..nn).map(|k| e1((a_f + k as f64) / nn as f64)).collect();
    let mut sum = CMat::zeros(d, d);
    for (l, p) in labels.iter().zip(&projections) {
        sum += &p.scale(*l);
    }
    let zeta = sum.hs_inner(&u) / d as f64;
    let zeta_residual = (&u.scale(zeta / zeta.norm()) - &sum).max_abs();

    let mut u_deviation: f64 = 0.0;
    let mut u_variance = 0.0;
    let mut projection_deviation: f64 = 0.0;
    let mut sigma: Option<usize> = None;
    let mut sigma_constant = true;
    let mut tau_constant = true;
    for s in 0..samples as u64 {
        let orbit = process.orbit(Start::Stream(s), window.max(nn))?;
        let mut seen: Vec<usize> = orbit.iter().map(|o| o.channel).collect();
        seen.sort_unstable();
        seen.dedup();
        let ts: Vec<CMat> = seen.iter().map(|&c| adj[c].clone()).collect();
        let found = joint_peripheral(&ts, 1e-8)?;
        let (_, vs) = found
            .iter()
            .find(|(a, _)| (a - alpha).norm() < 1e-8)
            .ok_or_else(|| Error::InternalInconsistency(format!("sample {s}: alpha lost")))?;
        // pin the window solution to the reference inside its eigenspace
        let cand: Vec<CMat> = vs.iter().map(|v| CMat::unvectorize(d, v)).collect();
        let mut us = CMat::zeros(d, d);
        for c in &cand {
            us += &c.scale(c.hs_inner(&u) / c.hs_inner(c));
        }
        let us = gauge_fix(&us.scale_re((d as f64).sqrt() / us.norm_fro()));
        let dev = (&us - &u).norm_fro();
        u_deviation = u_deviation.max(dev);
        u_variance += dev * dev / samples as f64;
        let ps = label_projections_of(&us, a_f, nn)?;
        for (a, b) in ps.iter().zip(&projections) {
            projection_deviation = projection_deviation.max((a - b).max_abs());
        }
        // label shift of each sampled step
        let mut steps = Vec::with_capacity(nn);
        for o in orbit.iter().take(nn) {
            let img = process.channels()[o.channel].adjoint_apply(&projections[0])?;
            let j = (0..nn).find(|&j| (&img - &projections[j]).max_abs() <= 1e-8);
            match (j, sigma) {
                (None, _) => sigma_constant = false,
                (Some(j), None) => sigma = Some(j),
                (Some(j), Some(prev)) if j != prev => sigma_constant = false,
                _ => {}
            }
            steps.push(j.unwrap_or(usize::MAX));
        }
        if steps.contains(&usize::MAX) {
            tau_constant = false;
            continue;
        }
        let tr = stopping_times(steps.iter().copied(), nn, nn as u64);
        tau_constant &= matches!(tr, Ok(ref t) if t.taus[0] == nn as u64);
    }
    Ok(IidDeterminismReport {
        lambda,
        alpha: Some(alpha),
        n_alpha: nn,
        u: Some(u),
        projections,
        u_deviation,
        u_variance,
        projection_deviation,
        zeta_residual,
        sigma: if sigma_constant { sigma } else { None },
        sigma_expected,
        tau_constant,
        samples,
    })
}
