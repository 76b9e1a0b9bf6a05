//! Cyclic partitions attached to peripheral eigenvalues: label shifts, the skew
//! product, stopping times, the tau-jump Cesaro projector, minimality and
//! aperiodicity probes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::base::{Base, FiniteBase, ProcessInstance};
use crate::channel::{KrausChannel, CLUSTER_TOL};
use crate::error::{Error, Result};
use crate::global::{apply_adjoint, composed_channel, composed_transfer, steady_state, Eigentuple, RandomMatrix};
use crate::instances::gcd;
use crate::linalg::{
    c64, cesaro_mean, e1, eigenvalues, hermitian_eigen, null_space, orthonormalize, spectral_projections, turns, CMat,
    C64,
};
use crate::pf::{invariant_subspace_candidates, is_irreducible};
use crate::random::{gaussian_cmat, random_psd};
#[allow(unused_imports)]
use num_traits::Float;

/// Label matches farther than this are rejected.
pub const MATCH_REJECT: f64 = 1e-5;
/// Largest admissible idempotency residual of a Cesaro projector.
pub const IDEMPOTENCY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicPartition {
    pub alpha: C64,
    pub n_alpha: usize,
    /// `projections[k]` is the random projection with label `k`.
    pub projections: Vec<RandomMatrix>,
    /// Label shift per point, in `0..n_alpha`.
    pub sigma: Vec<usize>,
    /// Carry term per point, `-1` or `0`.
    pub xi: Vec<i64>,
    pub a_f: Vec<f64>,
    /// `p_k rho p_k / tr(p_k rho)`.
    pub conditional_states: Vec<RandomMatrix>,
    /// Largest distance between an eigenvalue of `u` and its root label.
    pub match_distance: f64,
}

/// `(xi, sigma)` for one step from a point with phase `a_here` to its image with phase `a_next`.
pub fn xi_sigma(a_here: f64, a_next: f64, alpha_turns: f64, n_alpha: usize) -> Result<(i64, usize)> {
    let mut nt = n_alpha as f64 * alpha_turns;
    if (nt - nt.round()).abs() <= 1e-9 {
        nt = nt.round();
    }
    let whole = nt.floor();
    let raw = a_next - a_here - (nt - whole);
    let xi = raw.round();
    if (raw - xi).abs() > 1e-6 || !(xi == 0.0 || xi == -1.0) {
        return Err(Error::InternalInconsistency(format!("carry term {raw} is not in {{-1, 0}}")));
    }
    let n = n_alpha as i64;
    Ok((xi as i64, (xi as i64 - whole as i64).rem_euclid(n) as usize))
}

/// Partition of unity from the spectral projections of the eigen-unitary.
pub fn build_partition(process: &ProcessInstance, tuple: &Eigentuple, rho: &RandomMatrix) -> Result<PeriodicPartition> {
    let base = process.finite_base()?;
    let (n, d) = (base.n(), process.dim());
    let nn = tuple.n_alpha;
    let mut blocks: Vec<Vec<CMat>> = vec![Vec::with_capacity(n); nn];
    let mut match_distance: f64 = 0.0;
    for w in 0..n {
        let u = &tuple.u.blocks[w];
        if nn == 1 {
            blocks[0].push(CMat::identity(d));
            continue;
        }
        let spec = spectral_projections(u, CLUSTER_TOL)?;
        if spec.len() != nn {
            return Err(Error::SpectrumMismatch {
                point: w,
                detail: format!("{} distinct eigenvalues, expected {nn}", spec.len()),
            });
        }
        let mut used = vec![false; nn];
        for (k, slot) in blocks.iter_mut().enumerate() {
            let target = e1((tuple.a_f[w] + k as f64) / nn as f64);
            let (j, dist) = spec
                .iter()
                .enumerate()
                .map(|(j, (l, _))| (j, (l - target).norm()))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            if dist > MATCH_REJECT || used[j] {
                return Err(Error::SpectrumMismatch {
                    point: w,
                    detail: format!("label {k} unmatched (distance {dist:e})"),
                });
            }
            used[j] = true;
            match_distance = match_distance.max(dist);
            slot.push(spec[j].1.clone());
        }
    }
    let projections: Vec<RandomMatrix> = blocks.into_iter().map(|b| RandomMatrix { blocks: b }).collect();
    let t = alpha_turns(tuple.alpha);
    let mut xi = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for w in 0..n {
        let (x, s) = xi_sigma(tuple.a_f[w], tuple.a_f[base.theta(w)], t, nn)?;
        xi.push(x);
        sigma.push(s);
    }
    let conditional_states = projections
        .iter()
        .map(|p| {
            let blocks = p
                .blocks
                .iter()
                .zip(&rho.blocks)
                .map(|(p, r)| {
                    let b = &(p * r) * p;
                    b.scale(b.trace().inv())
                })
                .collect();
            RandomMatrix { blocks }
        })
        .collect();
    Ok(PeriodicPartition {
        alpha: tuple.alpha,
        n_alpha: nn,
        projections,
        sigma,
        xi,
        a_f: tuple.a_f.clone(),
        conditional_states,
        match_distance,
    })
}

/// Phase of `alpha` in turns, with a full turn wrapped to 0.
pub fn alpha_turns(alpha: C64) -> f64 {
    let t = turns(alpha);
    if t > 1.0 - 1e-12 {
        0.0
    } else {
        t
    }
}

/// `max_{k, w} ||(L^† p_k)_w - p_{k + sigma(w), w}||`.
pub fn verify_shift_relation(process: &ProcessInstance, part: &PeriodicPartition) -> Result<f64> {
    let nn = part.n_alpha;
    let mut worst: f64 = 0.0;
    for k in 0..nn {
        let img = apply_adjoint(process, &part.projections[k])?;
        for (w, b) in img.blocks.iter().enumerate() {
            let want = &part.projections[(k + part.sigma[w]) % nn].blocks[w];
            worst = worst.max((b - want).norm_op());
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionResiduals {
    /// Leakage of `phi(p_k a p_k)` outside `p_{k - sigma}` at the next point.
    pub range_containment: f64,
    /// `rho - sum_k p_k rho p_k`.
    pub block_diagonal: f64,
    /// `rho - N^{-1} sum_k rho_k`.
    pub reconstruction: f64,
    /// `tr(rho p_k) - 1/N`.
    pub trace_law: f64,
    /// `phi(rho_{k, w}) - rho_{k - sigma, theta w}`.
    pub transport: f64,
    pub partition_of_unity: f64,
}

impl PartitionResiduals {
    pub fn max(&self) -> f64 {
        [
            self.range_containment,
            self.block_diagonal,
            self.reconstruction,
            self.trace_law,
            self.transport,
            self.partition_of_unity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Residuals of the partition laws, with `probes` random positive inputs per `(k, w)`.
pub fn verify_partition_laws<R: Rng + ?Sized>(
    process: &ProcessInstance,
    part: &PeriodicPartition,
    rho: &RandomMatrix,
    rng: &mut R,
    probes: usize,
) -> Result<PartitionResiduals> {
    let base = process.finite_base()?;
    let (n, d, nn) = (base.n(), process.dim(), part.n_alpha);
    let id = CMat::identity(d);
    let mut r = PartitionResiduals {
        range_containment: 0.0,
        block_diagonal: 0.0,
        reconstruction: 0.0,
        trace_law: 0.0,
        transport: 0.0,
        partition_of_unity: 0.0,
    };
    for w in 0..n {
        let tw = base.theta(w);
        let ch = process.channel_at(tw);
        let ps: Vec<&CMat> = part.projections.iter().map(|p| &p.blocks[w]).collect();
        let mut sum = CMat::zeros(d, d);
        let mut pinched = CMat::zeros(d, d);
        let mut recon = CMat::zeros(d, d);
        for k in 0..nn {
            let p = ps[k];
            r.partition_of_unity = r.partition_of_unity.max((&(p * p) - p).max_abs());
            for q in &ps[k + 1..] {
                r.partition_of_unity = r.partition_of_unity.max((p * *q).max_abs());
            }
            sum += p;
            pinched += &(&(p * &rho.blocks[w]) * p);
            recon += &part.conditional_states[k].blocks[w];
            r.trace_law = r.trace_law.max(((&rho.blocks[w] * p).trace() - c64(1.0 / nn as f64, 0.0)).norm());
            let target = (k + nn - part.sigma[w]) % nn;
            let out = &id - &part.projections[target].blocks[tw];
            for _ in 0..probes {
                let a = random_psd(rng, d, d);
                let img = ch.apply(&(&(p * &a) * p))?;
                let leak = (&(&out * &img) * &out).norm_op() / a.norm_op();
                r.range_containment = r.range_containment.max(leak);
            }
            let moved = ch.apply(&part.conditional_states[k].blocks[w])?;
            r.transport = r.transport.max((&moved - &part.conditional_states[target].blocks[tw]).max_abs());
        }
        r.partition_of_unity = r.partition_of_unity.max((&sum - &id).max_abs());
        r.block_diagonal = r.block_diagonal.max((&pinched - &rho.blocks[w]).max_abs());
        r.reconstruction = r.reconstruction.max((&recon.scale_re(1.0 / nn as f64) - &rho.blocks[w]).max_abs());
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkewErgodicity {
    pub ergodic: bool,
    /// Length of the cycle through `(0, 0)`.
    pub cycle_length: usize,
    /// Visits to label 0 along that cycle.
    pub zero_visits: usize,
    /// `|zero_visits / cycle_length - 1/N|`, computed from integers.
    pub birkhoff_error: f64,
}

/// The skew product `(w, x) -> (theta w, x - sigma(w))` on `n * N` points.
pub fn skew_ergodicity(sigma: &[usize], n_alpha: usize, base: &FiniteBase) -> SkewErgodicity {
    let (mut w, mut x) = (0usize, 0usize);
    let mut len = 0;
    let mut zeros = 0;
    loop {
        if x == 0 {
            zeros += 1;
        }
        x = (x + n_alpha - sigma[w] % n_alpha) % n_alpha;
        w = base.theta(w);
        len += 1;
        if w == 0 && x == 0 {
            break;
        }
    }
    let num = (zeros * n_alpha).abs_diff(len);
    SkewErgodicity {
        ergodic: len == base.n() * n_alpha,
        cycle_length: len,
        zero_visits: zeros,
        birkhoff_error: num as f64 / (len * n_alpha) as f64,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StoppingTimeTrace {
    pub n_alpha: usize,
    pub horizon: u64,
    /// Times `1 <= tau_1 < tau_2 < ...` at which the cumulative shift vanishes mod `N`.
    pub taus: Vec<u64>,
    pub density: f64,
}

/// Return times of the cumulative label shift to 0 mod `n_alpha`, where `sigmas`
/// yields the shift of each step along an orbit.
pub fn stopping_times(
    sigmas: impl IntoIterator<Item = usize>,
    n_alpha: usize,
    horizon: u64,
) -> Result<StoppingTimeTrace> {
    let mut cum = 0usize;
    let mut taus = Vec::new();
    let mut it = sigmas.into_iter();
    for j in 1..=horizon {
        let s = it.next().ok_or(Error::InvalidInput("shift sequence shorter than the horizon".into()))?;
        cum = (cum + s) % n_alpha;
        if cum == 0 {
            taus.push(j);
        }
    }
    if taus.is_empty() {
        return Err(Error::HorizonTooShort { horizon });
    }
    let density = taus.len() as f64 / horizon as f64;
    Ok(StoppingTimeTrace { n_alpha, horizon, taus, density })
}

/// Shifts along the orbit of `start`: `sigma(start), sigma(theta start), ...`.
pub fn finite_sigma_orbit<'a>(
    part: &'a PeriodicPartition,
    base: &'a FiniteBase,
    start: usize,
) -> impl Iterator<Item = usize> + 'a {
    let mut w = start;
    core::iter::from_fn(move || {
        let s = part.sigma[w];
        w = base.theta(w);
        Some(s)
    })
}

/// First stopping time at every point of a finite base.
pub fn tau_map(part: &PeriodicPartition, base: &FiniteBase) -> Result<Vec<usize>> {
    let horizon = (base.n() * part.n_alpha) as u64;
    (0..base.n())
        .map(|w| Ok(stopping_times(finite_sigma_orbit(part, base, w), part.n_alpha, horizon)?.taus[0] as usize))
        .collect()
}

/// `(L^†_tau x)_w = Phi^{(tau(w))†}_w(x_{theta^{tau(w)} w})` as a dense matrix.
pub fn tau_jump_operator(process: &ProcessInstance, part: &PeriodicPartition) -> Result<CMat> {
    let base = process.finite_base()?;
    let (n, d) = (base.n(), process.dim());
    let d2 = d * d;
    let tau = tau_map(part, base)?;
    let mut m = CMat::zeros(n * d2, n * d2);
    for w in 0..n {
        let t = composed_transfer(process, w, tau[w])?.adjoint();
        m.set_block(w * d2, base.theta_pow(w, tau[w]) * d2, &t);
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CesaroProjector {
    pub matrix: CMat,
    pub jump: CMat,
    pub alpha: C64,
    pub n_avg: u64,
    /// `||E^2 - E||` in operator norm.
    pub idempotency: f64,
}

/// Average of the powers `J, J^2, ..., J^{n_avg}` of the tau-jump operator `J`.
pub fn cesaro_projector(process: &ProcessInstance, part: &PeriodicPartition, n_avg: u64) -> Result<CesaroProjector> {
    let jump = tau_jump_operator(process, part)?;
    let e = &jump * &cesaro_mean(&jump, n_avg);
    let idempotency = (&(&e * &e) - &e).norm_op();
    if idempotency > IDEMPOTENCY_TOL {
        return Err(Error::NotConverged { what: "Cesaro projector", residual: idempotency });
    }
    Ok(CesaroProjector { matrix: e, jump, alpha: part.alpha, n_avg, idempotency })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CesaroChecks {
    pub idempotency: f64,
    /// `max(||E J - E||, ||J E - E||)`.
    pub commutation: f64,
    /// Most negative eigenvalue of any block of `E(x)` over positive `x`, clipped at 0.
    pub positivity: f64,
    /// `max_w |<rho_w, E(x)_w> - mean <rho, x>|` relative to `||x||`.
    pub inner_product_law: f64,
    /// Smallest `||E(x)_w||` over positive unit-trace `x` and points `w`.
    pub faithfulness: f64,
}

/// Property sweep of a Cesaro projector over `samples` random inputs.
pub fn cesaro_checks<R: Rng + ?Sized>(
    proj: &CesaroProjector,
    rho: &RandomMatrix,
    rng: &mut R,
    samples: usize,
) -> CesaroChecks {
    let (n, d) = (rho.n(), rho.blocks[0].rows());
    let e = &proj.matrix;
    let commutation = (&(e * &proj.jump) - e).norm_op().max((&(&proj.jump * e) - e).norm_op());
    let apply = |x: &RandomMatrix| RandomMatrix::from_vector(n, d, &e.matvec(&x.to_vector()));
    let mut positivity: f64 = 0.0;
    let mut law: f64 = 0.0;
    let mut faithfulness = f64::INFINITY;
    for _ in 0..samples {
        let x = RandomMatrix { blocks: (0..n).map(|_| gaussian_cmat(rng, d, d)).collect() };
        let ex = apply(&x);
        let mean = rho.hs_inner(&x) / n as f64;
        let scale = x.blocks.iter().map(|b| b.norm_fro()).fold(0.0, f64::max);
        for w in 0..n {
            law = law.max((rho.blocks[w].hs_inner(&ex.blocks[w]) - mean).norm() / scale);
        }
        let pos = RandomMatrix {
            blocks: (0..n)
                .map(|_| {
                    let rank = rng.random_range(1..=d);
                    let a = random_psd(rng, d, rank);
                    a.scale_re(1.0 / a.trace().re)
                })
                .collect(),
        };
        let ep = apply(&pos);
        for b in &ep.blocks {
            positivity = positivity.min(b.hermitian_part().min_eigenvalue_hermitian());
            positivity = positivity.min(-(b - &b.hermitian_part()).max_abs());
            faithfulness = faithfulness.min(b.norm_fro());
        }
    }
    CesaroChecks { idempotency: proj.idempotency, commutation, positivity, inner_product_law: law, faithfulness }
}

/// Cesaro mean `M^{-1} sum_n alpha^{s_n}` over the recorded stopping times.
pub fn cesaro_phase_average(alpha: C64, trace: &StoppingTimeTrace) -> Result<C64> {
    if trace.taus.is_empty() {
        return Err(Error::HorizonTooShort { horizon: trace.horizon });
    }
    let t = alpha_turns(alpha);
    let sum: C64 = trace
        .taus
        .iter()
        .map(|&s| {
            let x = s as f64 * t;
            e1(x - x.floor())
        })
        .sum();
    Ok(sum / trace.taus.len() as f64)
}

/// Outcome of the search for a reducing sub-projection.
#[derive(Clone, Debug, PartialEq)]
pub enum Minimality {
    Minimal,
    Reduced(CMat),
    Inconclusive { rank: usize },
}

/// Orthonormal basis (Frobenius) of the span of `ops`.
pub fn kraus_span(ops: &[CMat]) -> Vec<CMat> {
    let d = ops[0].rows();
    let vs: Vec<Vec<C64>> = ops.iter().map(|k| k.vectorize()).collect();
    orthonormalize(&vs, 1e-10).iter().map(|v| CMat::unvectorize(d, v)).collect()
}

/// Span of `{L K : K in first, L in next}`.
pub fn compose_span(first: &[CMat], next: &[CMat]) -> Vec<CMat> {
    let prods: Vec<CMat> = next.iter().flat_map(|l| first.iter().map(move |k| l * k)).collect();
    kraus_span(&prods)
}

fn basis_matrix(d: usize, cols: &[Vec<C64>]) -> CMat {
    CMat::from_fn(d, cols.len(), |i, j| cols[j][i])
}

/// A common eigenvector of all `ops`, if one exists. Every common eigenvector
/// lies in an intersection of one eigenspace per operator, so refining the
/// candidate subspaces operator by operator is exhaustive.
pub fn common_eigenvector(ops: &[CMat]) -> Option<Vec<C64>> {
    let r = ops.first()?.rows();
    let mut cands: Vec<CMat> = vec![CMat::identity(r)];
    for a in ops {
        let scale = a.norm_op().max(1e-300);
        let mut next = Vec::new();
        for b in &cands {
            let ab = a * b;
            // eigenvalues of the compression locate candidate eigenvalues of `a` on span(b)
            let comp = &b.adjoint() * &ab;
            let Ok(mut evs) = eigenvalues(&comp) else { return None };
            evs.dedup_by(|x, y| (*x - *y).norm() < 1e-6 * scale);
            let mut seen: Vec<C64> = Vec::new();
            for mu in evs {
                if seen.iter().any(|s| (s - mu).norm() < 1e-6 * scale) {
                    continue;
                }
                seen.push(mu);
                let ns = null_space(&(&ab - &b.scale(mu)), 1e-8 * scale);
                if ns.is_empty() {
                    continue;
                }
                let cols: Vec<Vec<C64>> = ns.iter().map(|c| b.matvec(c)).collect();
                let cols = orthonormalize(&cols, 1e-10);
                if !cols.is_empty() {
                    next.push(basis_matrix(r, &cols));
                }
            }
        }
        if next.is_empty() {
            return None;
        }
        cands = next;
    }
    Some(cands[0].col(0))
}

/// Search for a proper sub-projection of `p` reducing the CP map whose Kraus
/// operators span `span`. Exhaustive for `rank(p) <= 3`.
pub fn minimal_projection_check(span: &[CMat], p: &CMat) -> Minimality {
    let d = p.rows();
    let e = hermitian_eigen(p);
    let cols: Vec<Vec<C64>> = (0..d).filter(|&k| e.values[k] > 0.5).map(|k| e.vectors.col(k)).collect();
    let r = cols.len();
    if r <= 1 {
        return Minimality::Minimal;
    }
    let b = basis_matrix(d, &cols);
    let comp: Vec<CMat> = span.iter().map(|k| &(&b.adjoint() * k) * &b).collect();
    let lift = |v: &[C64]| {
        let w = b.matvec(v);
        CMat::outer(&w, &w)
    };
    let reduces = |q: &CMat| span.iter().all(|k| (&(&(&CMat::identity(d) - q) * k) * q).norm_op() <= 1e-8);
    if let Some(v) = common_eigenvector(&comp) {
        let q = lift(&v);
        if reduces(&q) {
            return Minimality::Reduced(q);
        }
    }
    let adj: Vec<CMat> = comp.iter().map(|k| k.adjoint()).collect();
    if let Some(v) = common_eigenvector(&adj) {
        let q = p - &lift(&v);
        if reduces(&q) {
            return Minimality::Reduced(q);
        }
    }
    if r <= 3 {
        return Minimality::Minimal;
    }
    for q in invariant_subspace_candidates(&comp) {
        let q = &(&b * &q) * &b.adjoint();
        if reduces(&q) {
            return Minimality::Reduced(q);
        }
    }
    Minimality::Inconclusive { rank: r }
}

/// Minimality of each `p_{k, 0}` for the return map over one skew-product cycle.
pub fn minimality_check(process: &ProcessInstance, part: &PeriodicPartition) -> Result<Vec<Minimality>> {
    let base = process.finite_base()?;
    let steps = base.n() * part.n_alpha;
    let mut l = base.theta(0);
    let mut span = kraus_span(process.channel_at(l).kraus());
    for _ in 1..steps {
        l = base.theta(l);
        span = compose_span(&span, process.channel_at(l).kraus());
    }
    Ok(part.projections.iter().map(|p| minimal_projection_check(&span, &p.blocks[0])).collect())
}

/// Minimality of deterministic projections for `N`-fold compositions of an i.i.d. support.
pub fn minimality_check_iid(support: &[KrausChannel], n_alpha: usize, projections: &[CMat]) -> Vec<Minimality> {
    let all: Vec<CMat> = support.iter().flat_map(|c| c.kraus().iter().cloned()).collect();
    let one = kraus_span(&all);
    let mut span = one.clone();
    for _ in 1..n_alpha {
        span = compose_span(&span, &one);
    }
    projections.iter().map(|p| minimal_projection_check(&span, p)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReduciblePower {
    pub k: usize,
    /// Base points of the reducible component (empty for i.i.d. bases).
    pub component: Vec<usize>,
    /// Reducing projections along the component, when found.
    pub witness: Option<Vec<CMat>>,
}

/// `sum_x p_x psi_x` for an i.i.d. base.
pub fn averaged_channel(process: &ProcessInstance) -> Result<KrausChannel> {
    let Base::Iid(b) = process.base() else { return Err(Error::UnsupportedBase) };
    let mut ks = Vec::new();
    for (x, &p) in b.probs().iter().enumerate() {
        for k in process.channel_at(x).kraus() {
            ks.push(k.scale_re(p.sqrt()));
        }
    }
    Ok(KrausChannel::new(ks)?.compressed())
}

/// First `k in 2..=n_max` for which `(theta^k, Phi^{(k)})` has a reducible
/// ergodic component.
pub fn aperiodicity_check(process: &ProcessInstance, n_max: usize) -> Result<Option<ReduciblePower>> {
    match process.base() {
        Base::Finite(base) => {
            let n = base.n();
            for k in 2..=n_max {
                let g = gcd(k, n);
                for c in 0..g {
                    let pts: Vec<usize> = (0..n / g).map(|j| base.theta_pow(c, j * k)).collect();
                    let len = pts.len();
                    let chs = (0..len)
                        .map(|j| composed_channel(process, pts[(j + len - 1) % len], k))
                        .collect::<Result<Vec<_>>>()?;
                    let sub = ProcessInstance::finite_cycle(chs)?;
                    let ss = steady_state(&sub)?;
                    if !ss.irreducible {
                        return Ok(Some(ReduciblePower { k, component: pts, witness: ss.witness.map(|w| w.blocks) }));
                    }
                }
            }
            Ok(None)
        }
        Base::Iid(_) => {
            let avg = averaged_channel(process)?;
            let mut pow = avg.clone();
            for k in 2..=n_max {
                pow = pow.then(&avg)?.compressed();
                let r = is_irreducible(&pow)?;
                if !r.irreducible {
                    return Ok(Some(ReduciblePower { k, component: Vec::new(), witness: r.witness.map(|w| vec![w]) }));
                }
            }
            Ok(None)
        }
        Base::Rotation(_) => Err(Error::UnsupportedBase),
    }
}

/// `max_p max_K ||(I - p) K p||`: zero iff every `p` reduces `ch`.
pub fn witness_residual(ch: &KrausChannel, ps: &[CMat]) -> f64 {
    ps.iter().map(|p| ch.invariance_residual(p)).fold(0.0, f64::max)
}
