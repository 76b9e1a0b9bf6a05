//! Perron-Frobenius analysis of a single channel: fixed space, irreducibility
//! with a reducing-projection witness, peripheral group, cyclic partition of
//! unity and primitivity.

use alloc::format;
use alloc::vec::Vec;

use crate::channel::{KrausChannel, CLUSTER_TOL};
use crate::error::{Error, Result};
use crate::linalg::{
    c64, e1, eigenvalues, hermitian_eigen, null_space, orthonormalize, polar_unitary,
    phase_key, spectral_projections, svd, CMat, C64,
};

/// A simple eigenvalue must have smallest singular value of `T - lambda I` below this...
pub const SIMPLE_MAX: f64 = 1e-8;
/// ...and second smallest above this.
pub const SIMPLE_GAP: f64 = 1e-6;

/// Fixed-space singular value threshold.
pub const FIXED_TOL: f64 = 1e-8;

/// Peripheral eigenvalues are those with `|lambda| >= 1 - PERIPHERAL_TOL`.
pub const PERIPHERAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct PFResult {
    pub irreducible: bool,
    /// Present iff the fixed space is one-dimensional.
    pub steady_state: Option<CMat>,
    /// Sorted by phase, starting at 1. Empty for reducible input.
    pub peripheral_group: Vec<C64>,
    pub m: usize,
    /// `partition[k]` is mapped into `partition[k + 1]` by the channel.
    pub partition: Vec<CMat>,
    /// A reducing projection. `None` on a reducible result means the search failed.
    pub witness: Option<CMat>,
}

impl PFResult {
    pub fn witness_or_err(&self) -> Result<&CMat> {
        self.witness.as_ref().ok_or(Error::WitnessNotFound)
    }
}

/// Smallest and second smallest singular values of `t - lambda I`.
pub fn simplicity_certificate(t: &CMat, lambda: C64) -> (f64, f64) {
    let s = svd(&t.shift(lambda)).s;
    let n = s.len();
    (s[n - 1], if n > 1 { s[n - 2] } else { f64::INFINITY })
}

/// Fail with `SimplicityViolation` unless `lambda` is a numerically simple eigenvalue of `t`.
pub fn certify_simple(t: &CMat, lambda: C64) -> Result<()> {
    let (s_min, s_next) = simplicity_certificate(t, lambda);
    if s_min <= SIMPLE_MAX && s_next > SIMPLE_GAP {
        Ok(())
    } else {
        Err(Error::SimplicityViolation { eigenvalue: lambda, s_min, s_next })
    }
}

/// Orthonormal (Hilbert-Schmidt) basis of `{a : phi(a) = a}`.
pub fn fixed_space(ch: &KrausChannel, tol: f64) -> Vec<CMat> {
    let d = ch.dim();
    let t = ch.transfer();
    let basis = null_space(&t.shift(c64(1.0, 0.0)), tol);
    assert!(!basis.is_empty(), "a channel always has a fixed point");
    basis.iter().map(|v| CMat::unvectorize(d, v)).collect()
}

/// Trace-normalized Hermitian part of `a`.
pub fn normalize_state(a: &CMat) -> Option<CMat> {
    let tr = a.trace();
    if tr.norm() < 1e-12 {
        return None;
    }
    Some(a.scale(tr.inv()).hermitian_part())
}

/// Orthogonal projection onto the span of the given vectors.
pub fn span_projection(d: usize, vectors: &[Vec<C64>]) -> CMat {
    let mut p = CMat::zeros(d, d);
    for v in orthonormalize(vectors, 1e-8) {
        p += &CMat::outer(&v, &v);
    }
    p
}

/// Smallest subspace containing `seed` that is invariant under every operator in `ops`.
pub fn krylov_closure(ops: &[CMat], seed: &[C64]) -> Vec<Vec<C64>> {
    let mut basis = orthonormalize(&[seed.to_vec()], 1e-10);
    let mut frontier = basis.clone();
    while let Some(v) = frontier.pop() {
        for k in ops {
            let w = k.matvec(&v);
            let mut cand = basis.clone();
            cand.push(w);
            let nb = orthonormalize(&cand, 1e-9);
            if nb.len() > basis.len() {
                frontier.push(nb[nb.len() - 1].clone());
                basis = nb;
            }
        }
    }
    basis
}

fn fixed_seed_combination(n: usize) -> Vec<C64> {
    // deterministic generic coefficients
    (0..n).map(|i| e1(0.1234567 + 0.7548776662 * i as f64) * (1.0 + 0.37 * i as f64)).collect()
}

/// Common invariant subspaces of `ops` found from eigenvectors of a generic
/// linear combination. Returns proper, nonzero projections.
pub fn invariant_subspace_candidates(ops: &[CMat]) -> Vec<CMat> {
    let d = ops[0].rows();
    let coef = fixed_seed_combination(ops.len());
    let mut m = CMat::zeros(d, d);
    for (k, c) in ops.iter().zip(&coef) {
        m += &k.scale(*c);
    }
    let mut out = Vec::new();
    let Ok(ev) = eigenvalues(&m) else { return out };
    let scale = m.norm_fro().max(1e-300);
    for lam in ev {
        let sv = svd(&m.shift(lam));
        let n = sv.s.len();
        for k in (0..n).rev() {
            if sv.s[k] > 1e-7 * scale && k != n - 1 {
                break;
            }
            let v = sv.v.col(k);
            let span = krylov_closure(ops, &v);
            if !span.is_empty() && span.len() < d {
                out.push(span_projection(d, &span));
            }
        }
    }
    out
}

/// Search for a nontrivial reducing projection of `ch`.
pub fn find_witness(ch: &KrausChannel) -> Option<CMat> {
    let d = ch.dim();
    if d < 2 {
        return None;
    }
    let ok = |p: &CMat| ch.invariance_residual(p) <= 1e-8;
    let kraus = ch.kraus();
    for p in invariant_subspace_candidates(kraus) {
        if ok(&p) {
            return Some(p);
        }
    }
    let adj: Vec<CMat> = kraus.iter().map(|k| k.adjoint()).collect();
    for p in invariant_subspace_candidates(&adj) {
        let q = &CMat::identity(d) - &p;
        if ok(&q) {
            return Some(q);
        }
    }
    // supports of positive parts of Hermitian fixed points
    for b in fixed_space(ch, FIXED_TOL) {
        for h in [b.hermitian_part(), b.scale(c64(0.0, 1.0)).hermitian_part()] {
            if h.max_abs() < 1e-10 {
                continue;
            }
            for sign in [1.0, -1.0] {
                let e = hermitian_eigen(&h.scale_re(sign));
                let top = e.values[d - 1].abs().max(1e-300);
                let pos: Vec<Vec<C64>> = (0..d)
                    .filter(|&k| e.values[k] > 1e-7 * top)
                    .map(|k| e.vectors.col(k))
                    .collect();
                if !pos.is_empty() && pos.len() < d {
                    let p = span_projection(d, &pos);
                    if ok(&p) {
                        return Some(p);
                    }
                }
            }
        }
    }
    None
}

fn peripheral_of_transfer(t: &CMat, tol: f64) -> Result<Vec<C64>> {
    let mut per: Vec<C64> = eigenvalues(t)?.into_iter().filter(|z| z.norm() >= 1.0 - tol).collect();
    per.sort_by(|a, b| phase_key(*a).partial_cmp(&phase_key(*b)).unwrap_or(core::cmp::Ordering::Equal));
    for &l in &per {
        certify_simple(t, l)?;
    }
    Ok(per)
}

fn check_group(per: &[C64], d: usize, tol: f64) -> Result<()> {
    if per.len() > d {
        return Err(Error::InternalInconsistency(format!(
            "{} peripheral eigenvalues exceed dimension {}",
            per.len(),
            d
        )));
    }
    let m = per.len();
    for k in 0..m {
        let want = e1(k as f64 / m as f64);
        if (per[k] - want).norm() > tol.max(1e-8) {
            return Err(Error::InternalInconsistency(format!(
                "peripheral eigenvalue {} is not the root of unity {}",
                per[k], want
            )));
        }
    }
    Ok(())
}

/// Peripheral eigenvalues of an irreducible channel, each certified simple.
pub fn peripheral_group(ch: &KrausChannel, tol: f64) -> Result<Vec<C64>> {
    let per = peripheral_of_transfer(&ch.transfer(), tol)?;
    check_group(&per, ch.dim(), 1e-8)?;
    Ok(per)
}

/// Irreducibility verdict with steady state or witness. Irreducible input also
/// gets its peripheral group and partition.
pub fn is_irreducible(ch: &KrausChannel) -> Result<PFResult> {
    let fixed = fixed_space(ch, FIXED_TOL);
    let steady = if fixed.len() == 1 { normalize_state(&fixed[0]) } else { None };
    let pd = steady.as_ref().map(|r| r.min_eigenvalue_hermitian() > 1e-10).unwrap_or(false);
    if pd {
        let mut res = ehk_from_state(ch, steady.expect("checked"))?;
        res.irreducible = true;
        return Ok(res);
    }
    Ok(PFResult {
        irreducible: false,
        steady_state: steady,
        peripheral_group: Vec::new(),
        m: 0,
        partition: Vec::new(),
        witness: find_witness(ch),
    })
}

/// Cyclic partition of unity of an irreducible channel.
pub fn ehk_partition(ch: &KrausChannel) -> Result<PFResult> {
    let r = is_irreducible(ch)?;
    if !r.irreducible {
        return Err(Error::NotIrreducible);
    }
    Ok(r)
}

/// Gauge-fix `u` so its largest-magnitude entry (first in row-major order) is real positive.
pub fn gauge_fix(u: &CMat) -> CMat {
    let mut best = c64(0.0, 0.0);
    for z in u.as_slice() {
        if z.norm() > best.norm() * (1.0 + 1e-9) {
            best = *z;
        }
    }
    if best.norm() == 0.0 {
        return u.clone();
    }
    u.scale((best / best.norm()).conj())
}

/// Unitary eigenmatrix of the adjoint map at `alpha`, gauge-fixed.
pub fn eigen_unitary(ch: &KrausChannel, alpha: C64) -> Result<CMat> {
    let d = ch.dim();
    let th = ch.transfer().adjoint();
    let sv = svd(&th.shift(alpha));
    let v = sv.v.col(sv.s.len() - 1);
    let x = CMat::unvectorize(d, &v);
    let u = polar_unitary(&x)?.u;
    let resid = (&ch.adjoint_apply(&u)? - &u.scale(alpha)).max_abs();
    if resid > 1e-8 {
        return Err(Error::NotUnitary { point: 0, residual: resid });
    }
    Ok(gauge_fix(&u))
}

/// Assign each spectral projection of `u` to a label `k` by matching its eigenvalue
/// to `base * step^k`, bijectively, rejecting distances above `max_dist`.
pub fn label_projections(
    spec: &[(C64, CMat)],
    base: C64,
    step: C64,
    m: usize,
    max_dist: f64,
) -> core::result::Result<Vec<CMat>, alloc::string::String> {
    if spec.len() != m {
        return Err(format!("{} spectral clusters, expected {}", spec.len(), m));
    }
    let mut out: Vec<Option<CMat>> = (0..m).map(|_| None).collect();
    let mut target = base;
    for slot in out.iter_mut() {
        let (j, dist) = spec
            .iter()
            .enumerate()
            .map(|(j, (l, _))| (j, (l - target).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        if dist > max_dist {
            return Err(format!("eigenvalue {target} unmatched (distance {dist:e})"));
        }
        *slot = Some(spec[j].1.clone());
        target *= step;
    }
    // bijectivity: distinct targets must hit distinct clusters
    for i in 0..m {
        for j in i + 1..m {
            let (a, b) = (out[i].as_ref().unwrap(), out[j].as_ref().unwrap());
            if (a - b).max_abs() < 1e-6 {
                return Err(format!("labels {i} and {j} share a projection"));
            }
        }
    }
    Ok(out.into_iter().map(|p| p.unwrap()).collect())
}

fn ehk_from_state(ch: &KrausChannel, rho: CMat) -> Result<PFResult> {
    let d = ch.dim();
    let per = peripheral_group(ch, PERIPHERAL_TOL)?;
    let m = per.len();
    let partition = if m == 1 {
        alloc::vec![CMat::identity(d)]
    } else {
        let alpha = per[1];
        let u = eigen_unitary(ch, alpha)?;
        let spec = spectral_projections(&u, CLUSTER_TOL)?;
        let base = spec
            .iter()
            .map(|(l, _)| *l)
            .fold(None::<C64>, |acc, l| match acc {
                Some(a) if phase_key(a) <= phase_key(l) => Some(a),
                _ => Some(l),
            })
            .expect("nonempty spectrum");
        label_projections(&spec, base, alpha, m, 1e-5)
            .map_err(|detail| Error::SpectrumMismatch { point: 0, detail })?
    };
    Ok(PFResult {
        irreducible: true,
        steady_state: Some(rho),
        peripheral_group: per,
        m,
        partition,
        witness: None,
    })
}

/// Convergence record of [`is_primitive`]: `(n, max deviation)` at `n = 1, 2, 4, ...`.
pub type ConvergenceTrace = Vec<(u64, f64)>;

/// Primitivity by power iteration, cross-checked against `m == 1`.
pub fn is_primitive(ch: &KrausChannel, n_max: u64, tol: f64) -> Result<(bool, ConvergenceTrace)> {
    let r = is_irreducible(ch)?;
    if !r.irreducible {
        return Err(Error::NotIrreducible);
    }
    let d = ch.dim();
    let rho = r.steady_state.as_ref().expect("irreducible");
    let vr = rho.vectorize();
    let mut tp = ch.transfer();
    let mut n = 1u64;
    let mut trace = Vec::new();
    let mut converged = false;
    while n <= n_max {
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let idx = i + j * d;
                // column idx of T^n is T^n vec(E_ij)
                let col = tp.col(idx);
                let mut diff = CMat::unvectorize(d, &col);
                if i == j {
                    diff -= &CMat::unvectorize(d, &vr);
                }
                dev = dev.max(diff.norm_trace());
            }
        }
        trace.push((n, dev));
        if dev <= tol {
            converged = true;
            break;
        }
        tp = &tp * &tp;
        n *= 2;
    }
    let primitive_by_group = r.m == 1;
    if converged != primitive_by_group {
        return Err(Error::InternalInconsistency(format!(
            "power iteration says {converged}, peripheral group has {} elements",
            r.m
        )));
    }
    Ok((converged, trace))
}

/// `max || (I - p_{k+1}) phi(p_k a p_k) (I - p_{k+1}) ||` over the supplied probes.
pub fn partition_shift_residual(ch: &KrausChannel, partition: &[CMat], probes: &[CMat]) -> f64 {
    let m = partition.len();
    let d = ch.dim();
    let mut worst: f64 = 0.0;
    for k in 0..m {
        let q = &CMat::identity(d) - &partition[(k + 1) % m];
        for a in probes {
            let img = ch.apply(&(&(&partition[k] * a) * &partition[k])).expect("dims");
            worst = worst.max((&(&q * &img) * &q).max_abs());
        }
    }
    worst
}

/// `|| rho - m^{-1} sum_k p_k rho p_k / tr(p_k rho p_k) ||`.
pub fn steady_state_decomposition_residual(rho: &CMat, partition: &[CMat]) -> f64 {
    let m = partition.len() as f64;
    let mut acc = CMat::zeros(rho.rows(), rho.cols());
    for p in partition {
        let b = &(p * rho) * p;
        acc += &b.scale(b.trace().inv());
    }
    (&acc.scale_re(1.0 / m) - rho).max_abs()
}

/// `max_k |tr(p_k) - tr(p_k^2)| + ||sum p - I|| + max ||p_k p_j||`: zero for a partition of unity.
pub fn partition_of_unity_residual(ps: &[CMat]) -> f64 {
    let d = ps[0].rows();
    let mut sum = CMat::zeros(d, d);
    let mut worst: f64 = 0.0;
    for (i, p) in ps.iter().enumerate() {
        worst = worst.max((&(p * p) - p).max_abs()).max((p - &p.adjoint()).max_abs());
        for q in &ps[i + 1..] {
            worst = worst.max((p * q).max_abs());
        }
        sum += p;
    }
    worst.max((&sum - &CMat::identity(d)).max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::phase_diag;
    use crate::random::{gaussian_cmat, random_block_cyclic, random_channel, stream_rng};
    use proptest::prelude::*;

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    fn in_span(basis: &[CMat], x: &CMat) -> bool {
        let mut r = x.clone();
        for b in basis {
            let c = b.hs_inner(&r);
            r -= &b.scale(c);
        }
        r.norm_fro() < 1e-9
    }

    #[test]
    fn fixed_space_of_diagonal_conjugation() {
        let ch = KrausChannel::unitary(phase_diag(&[0.0, core::f64::consts::SQRT_2]));
        let f = fixed_space(&ch, FIXED_TOL);
        assert_eq!(f.len(), 2);
        assert!(in_span(&f, &CMat::ket_bra(2, 0, 0)) && in_span(&f, &CMat::ket_bra(2, 1, 1)));
        for b in &f {
            assert!((&ch.apply(b).unwrap() - b).max_abs() <= 1e-7);
        }
    }

    #[test]
    fn fixed_space_examples() {
        let f = fixed_space(&KrausChannel::depolarizing(2, 0.5), FIXED_TOL);
        assert_eq!(f.len(), 1);
        assert!(in_span(&f, &CMat::identity(2)));
        assert_eq!(fixed_space(&KrausChannel::identity(2), FIXED_TOL).len(), 4);
    }

    #[test]
    fn shift_is_irreducible_with_maximally_mixed_state() {
        for d in 2..7 {
            let r = is_irreducible(&KrausChannel::cyclic_shift(d)).unwrap();
            assert!(r.irreducible);
            assert!(close(r.steady_state.as_ref().unwrap(), &CMat::identity(d).scale_re(1.0 / d as f64), 1e-10));
            assert_eq!(r.m, d);
        }
    }

    #[test]
    fn block_diagonal_channel_has_block_witness() {
        let mut rng = stream_rng(11, 0);
        let a = random_channel(&mut rng, 2, 2);
        let b = random_channel(&mut rng, 2, 2);
        let kraus: Vec<CMat> = a
            .kraus()
            .iter()
            .zip(b.kraus())
            .map(|(x, y)| {
                let mut k = CMat::zeros(4, 4);
                k.set_block(0, 0, x);
                k.set_block(2, 2, y);
                k
            })
            .collect();
        let ch = KrausChannel::new(kraus).unwrap();
        let r = is_irreducible(&ch).unwrap();
        assert!(!r.irreducible);
        let w = r.witness_or_err().unwrap();
        assert!(w.is_projection(1e-9));
        assert!(ch.invariance_residual(w) < 1e-8);
        let top = crate::random::block_projections(&[2, 2]);
        assert!(close(w, &top[0], 1e-8) || close(w, &top[1], 1e-8));
    }

    #[test]
    fn depolarizing_is_irreducible_and_primitive() {
        let ch = KrausChannel::depolarizing(2, 0.5);
        let r = is_irreducible(&ch).unwrap();
        assert!(r.irreducible);
        assert!(close(r.steady_state.as_ref().unwrap(), &CMat::identity(2).scale_re(0.5), 1e-12));
        assert_eq!(peripheral_group(&ch, PERIPHERAL_TOL).unwrap().len(), 1);
        assert_eq!(r.partition.len(), 1);
        let (prim, trace) = is_primitive(&ch, 60, 1e-8).unwrap();
        assert!(prim);
        assert!(trace.last().unwrap().0 <= 60);
    }

    #[test]
    fn shift_peripheral_group_and_partition() {
        let ch = KrausChannel::cyclic_shift(3);
        let per = peripheral_group(&ch, PERIPHERAL_TOL).unwrap();
        for (k, z) in per.iter().enumerate() {
            assert!((z - e1(k as f64 / 3.0)).norm() < 1e-8);
        }
        let r = ehk_partition(&ch).unwrap();
        // phi(|e_k><e_k|) = |e_{k+1}><e_{k+1}|, so labels follow the basis cyclically
        let k0 = (0..3).find(|&k| close(&r.partition[0], &CMat::ket_bra(3, k, k), 1e-9)).unwrap();
        for k in 0..3 {
            let j = (k0 + k) % 3;
            assert!(close(&r.partition[k], &CMat::ket_bra(3, j, j), 1e-9));
        }
        assert!(!is_primitive(&KrausChannel::cyclic_shift(2), 1 << 10, 1e-8).unwrap().0);
    }

    #[test]
    fn pauli_x_conjugation_has_two_peripheral_eigenvalues() {
        let x = CMat::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let t = KrausChannel::unitary(x).transfer();
        let per = peripheral_of_transfer(&t, PERIPHERAL_TOL);
        // reducible (commutant of X is two-dimensional), so 1 is not simple
        assert!(matches!(per, Err(Error::SimplicityViolation { .. })));
        let ev = eigenvalues(&t).unwrap();
        assert_eq!(ev.iter().filter(|z| (*z - c64(1.0, 0.0)).norm() < 1e-9).count(), 2);
        assert_eq!(ev.iter().filter(|z| (*z + c64(1.0, 0.0)).norm() < 1e-9).count(), 2);
    }

    #[test]
    fn tensor_with_depolarizing_gives_rank_two_blocks() {
        let ch = KrausChannel::cyclic_shift(2).tensor(&KrausChannel::depolarizing(2, 0.5));
        let r = ehk_partition(&ch).unwrap();
        assert_eq!(r.m, 2);
        for p in &r.partition {
            assert!((p.trace().re - 2.0).abs() < 1e-9);
        }
        // brute force: the 16x16 transfer matrix has exactly {1, -1} on the unit circle
        let ev = eigenvalues(&ch.transfer()).unwrap();
        let per: Vec<_> = ev.iter().filter(|z| z.norm() > 1.0 - 1e-9).collect();
        assert_eq!(per.len(), 2);
        let e0 = CMat::ket_bra(2, 0, 0).kron(&CMat::identity(2));
        assert!(close(&r.partition[0], &e0, 1e-9) || close(&r.partition[1], &e0, 1e-9));
    }

    #[test]
    fn identity_channel_is_not_primitive_input() {
        assert_eq!(is_primitive(&KrausChannel::identity(2), 8, 1e-8), Err(Error::NotIrreducible));
        assert_eq!(ehk_partition(&KrausChannel::identity(2)), Err(Error::NotIrreducible));
        let r = is_irreducible(&KrausChannel::identity(2)).unwrap();
        assert!(r.witness.is_some());
    }

    /// For d = 2 a channel is reducible iff some rank-1 projection reduces it.
    /// Grid over the Bloch sphere, using the transfer-invariance leakage.
    fn brute_force_reducible_d2(ch: &KrausChannel, probes: &[CMat]) -> bool {
        let n = 200;
        let mut best = f64::INFINITY;
        for a in 0..=n {
            let th = core::f64::consts::PI * a as f64 / n as f64;
            for b in 0..n {
                let ph = 2.0 * core::f64::consts::PI * b as f64 / n as f64;
                let v = [c64((th / 2.0).cos(), 0.0), c64(ph.cos(), ph.sin()) * (th / 2.0).sin()];
                let p = CMat::outer(&v, &v);
                let q = &CMat::identity(2) - &p;
                let mut leak: f64 = 0.0;
                for x in probes {
                    let img = ch.apply(&(&(&p * x) * &p)).unwrap();
                    leak = leak.max((&(&q * &img) * &q).max_abs());
                }
                best = best.min(leak);
            }
        }
        best < 1e-3
    }

    #[test]
    fn irreducibility_agrees_with_grid_search_in_d2() {
        let mut rng = stream_rng(12, 0);
        let probes: Vec<CMat> = (0..3)
            .map(|_| {
                let g = gaussian_cmat(&mut rng, 2, 2);
                &g * &g.adjoint()
            })
            .collect();
        let amp_damp = KrausChannel::new(alloc::vec![
            CMat::from_real(&[&[1.0, 0.0], &[0.0, 0.6]]),
            CMat::from_real(&[&[0.0, 0.8], &[0.0, 0.0]]),
        ])
        .unwrap();
        let cases = [
            (KrausChannel::depolarizing(2, 0.5), false),
            (KrausChannel::cyclic_shift(2), false),
            (KrausChannel::identity(2), true),
            (KrausChannel::pinching(2), true),
            (amp_damp, true),
            (random_channel(&mut rng, 2, 2), false),
        ];
        for (ch, reducible) in cases {
            assert_eq!(!is_irreducible(&ch).unwrap().irreducible, reducible);
            assert_eq!(brute_force_reducible_d2(&ch, &probes), reducible);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn periodic_structure_laws(seed in any::<u64>(), d in 2usize..5, periodic in any::<bool>()) {
            let mut rng = stream_rng(seed, 0);
            let ch = if periodic {
                let dims: Vec<usize> = (0..d).map(|_| 1).collect();
                let split = if d == 4 { alloc::vec![2, 2] } else { dims };
                random_block_cyclic(&mut rng, &split, 1, 2)
            } else {
                random_channel(&mut rng, d, 2)
            };
            let r = ehk_partition(&ch).unwrap();
            prop_assert!(r.m <= d);
            for a in &r.peripheral_group {
                for b in &r.peripheral_group {
                    let ab = a * b;
                    prop_assert!(r.peripheral_group.iter().any(|z| (z - ab).norm() < 1e-8));
                }
                let ac = a.conj();
                prop_assert!(r.peripheral_group.iter().any(|z| (z - ac).norm() < 1e-8));
            }
            prop_assert!(partition_of_unity_residual(&r.partition) < 1e-9);
            let probes: Vec<CMat> = (0..5).map(|_| gaussian_cmat(&mut rng, d, d)).collect();
            prop_assert!(partition_shift_residual(&ch, &r.partition, &probes) < 1e-8);
            let rho = r.steady_state.as_ref().unwrap();
            prop_assert!(steady_state_decomposition_residual(rho, &r.partition) < 1e-8);
            prop_assert!(rho.min_eigenvalue_hermitian() > 1e-10);
            let (prim, _) = is_primitive(&ch, 1 << 20, 1e-8).unwrap();
            prop_assert_eq!(prim, r.m == 1);
        }
    }
}
