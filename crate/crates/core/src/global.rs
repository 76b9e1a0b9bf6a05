//! Global transfer operator of a process on a finite base.
//!
//! A random matrix `x` over `n` points is stored as `n` blocks; its vector form
//! concatenates the column-stacked blocks in point order. The forward operator
//! acts as `(L x)_w = phi_w(x_{theta^{-1} w})`, the adjoint as
//! `(L^† x)_w = phi^†_{theta w}(x_{theta w})`, and as matrices `L^† = L^H`.

use alloc::format;
use alloc::vec::Vec;

use crate::base::{koopman_eigenfunction, FiniteBase, ProcessInstance};
use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    c64, e1, eigenvalues, hermitian_eigen, null_space, phase_key, svd, turns, CMat, C64,
};
use crate::pf::{find_witness, simplicity_certificate, span_projection, SIMPLE_GAP, SIMPLE_MAX};
#[allow(unused_imports)]
use num_traits::Float;

/// Largest admissible `n d^2`.
pub const SIZE_CAP: usize = 4096;
/// Distance for `lambda / lambda' in Lambda_theta`.
pub const TOL_ROOT: f64 = 1e-8;

/// One `d x d` matrix per base point.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomMatrix {
    pub blocks: Vec<CMat>,
}

impl RandomMatrix {
    pub fn constant(n: usize, a: &CMat) -> Self {
        RandomMatrix { blocks: (0..n).map(|_| a.clone()).collect() }
    }

    pub fn identity(n: usize, d: usize) -> Self {
        Self::constant(n, &CMat::identity(d))
    }

    pub fn from_vector(n: usize, d: usize, v: &[C64]) -> Self {
        let d2 = d * d;
        assert_eq!(v.len(), n * d2);
        RandomMatrix { blocks: (0..n).map(|l| CMat::unvectorize(d, &v[l * d2..(l + 1) * d2])).collect() }
    }

    pub fn to_vector(&self) -> Vec<C64> {
        self.blocks.iter().flat_map(|b| b.vectorize()).collect()
    }

    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    pub fn scale(&self, s: C64) -> Self {
        RandomMatrix { blocks: self.blocks.iter().map(|b| b.scale(s)).collect() }
    }

    /// Blockwise `f(a, b)`.
    pub fn zip_with(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Self {
        RandomMatrix { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect() }
    }

    /// `max_w ||a_w - b_w||_max`.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| (a - b).max_abs()).fold(0.0, f64::max)
    }

    /// `sum_w tr(a_w^* b_w)`.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.hs_inner(b)).sum()
    }

    /// `max_w ||u_w^* u_w - I||_max`.
    pub fn unitarity_residual(&self) -> f64 {
        self.blocks
            .iter()
            .map(|u| (&(&u.adjoint() * u) - &CMat::identity(u.rows())).max_abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Adjoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlobalOperator {
    pub matrix: CMat,
    pub direction: Direction,
    pub n: usize,
    pub d: usize,
}

fn finite(process: &ProcessInstance) -> Result<&FiniteBase> {
    process.finite_base()
}

fn check_size(n: usize, d: usize) -> Result<()> {
    let size = n * d * d;
    if size > SIZE_CAP {
        return Err(Error::TooLarge { size, cap: SIZE_CAP });
    }
    Ok(())
}

/// Dense `n d^2` matrix of the forward or adjoint operator.
pub fn build_global(process: &ProcessInstance, direction: Direction) -> Result<GlobalOperator> {
    let base = finite(process)?;
    let n = base.n();
    let d = process.dim();
    check_size(n, d)?;
    let d2 = d * d;
    let mut m = CMat::zeros(n * d2, n * d2);
    for w in 0..n {
        match direction {
            Direction::Forward => {
                let t = process.channel_at(w).transfer();
                m.set_block(w * d2, base.theta_inv(w) * d2, &t);
            }
            Direction::Adjoint => {
                let tw = base.theta(w);
                let t = process.channel_at(tw).transfer().adjoint();
                m.set_block(w * d2, tw * d2, &t);
            }
        }
    }
    Ok(GlobalOperator { matrix: m, direction, n, d })
}

/// `(L x)_w = phi_w(x_{theta^{-1} w})`, evaluated channel by channel.
pub fn apply_forward(process: &ProcessInstance, x: &RandomMatrix) -> Result<RandomMatrix> {
    let base = finite(process)?;
    let blocks = (0..base.n())
        .map(|w| process.channel_at(w).apply(&x.blocks[base.theta_inv(w)]))
        .collect::<Result<Vec<_>>>()?;
    Ok(RandomMatrix { blocks })
}

/// `(L^† x)_w = phi^†_{theta w}(x_{theta w})`.
pub fn apply_adjoint(process: &ProcessInstance, x: &RandomMatrix) -> Result<RandomMatrix> {
    let base = finite(process)?;
    let blocks = (0..base.n())
        .map(|w| {
            let tw = base.theta(w);
            process.channel_at(tw).adjoint_apply(&x.blocks[tw])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RandomMatrix { blocks })
}

/// `phi_{theta^k w} ∘ ... ∘ phi_{theta w}` in Kraus form.
pub fn composed_channel(process: &ProcessInstance, w: usize, k: usize) -> Result<KrausChannel> {
    let base = finite(process)?;
    let mut l = base.theta(w);
    let mut acc = process.channel_at(l).clone();
    for _ in 1..k {
        l = base.theta(l);
        acc = acc.then(process.channel_at(l))?.compressed();
    }
    Ok(acc)
}

/// Transfer matrix of `phi_{theta^k w} ∘ ... ∘ phi_{theta w}`.
pub fn composed_transfer(process: &ProcessInstance, w: usize, k: usize) -> Result<CMat> {
    let base = finite(process)?;
    let d = process.dim();
    let mut t = CMat::identity(d * d);
    let mut l = w;
    for _ in 0..k {
        l = base.theta(l);
        t = &process.channel_at(l).transfer() * &t;
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState {
    pub irreducible: bool,
    pub fixed_dim: usize,
    /// Trace-one blocks; present iff the fixed space is one-dimensional.
    pub rho: Option<RandomMatrix>,
    /// Reducing random projection when reducible (`None` means the search failed).
    pub witness: Option<RandomMatrix>,
}

impl SteadyState {
    pub fn witness_or_err(&self) -> Result<&RandomMatrix> {
        self.witness.as_ref().ok_or(Error::WitnessNotFound)
    }
}

/// `max_w max_i ||(I - p_{theta w}) K_{i, theta w} p_w||`.
pub fn reducing_residual(process: &ProcessInstance, p: &RandomMatrix) -> Result<f64> {
    let base = finite(process)?;
    let d = process.dim();
    let mut worst: f64 = 0.0;
    for w in 0..base.n() {
        let tw = base.theta(w);
        let q = &CMat::identity(d) - &p.blocks[tw];
        for k in process.channel_at(tw).kraus() {
            worst = worst.max((&(&q * k) * &p.blocks[w]).norm_op());
        }
    }
    Ok(worst)
}

fn nontrivial(p: &RandomMatrix) -> bool {
    let d = p.blocks[0].rows();
    let all_id = p.blocks.iter().all(|b| (b - &CMat::identity(d)).max_abs() < 1e-8);
    let all_zero = p.blocks.iter().all(|b| b.max_abs() < 1e-8);
    !all_id && !all_zero
}

fn support(h: &CMat, rel: f64) -> CMat {
    let d = h.rows();
    let e = hermitian_eigen(h);
    let top = e.values.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
    let vs: Vec<Vec<C64>> = (0..d).filter(|&k| e.values[k] > rel * top).map(|k| e.vectors.col(k)).collect();
    span_projection(d, &vs)
}

fn find_global_witness(process: &ProcessInstance, fixed: &[RandomMatrix]) -> Result<Option<RandomMatrix>> {
    let base = finite(process)?;
    let n = base.n();
    let d = process.dim();
    let accept = |p: &RandomMatrix| -> Result<bool> { Ok(nontrivial(p) && reducing_residual(process, p)? <= 1e-8) };
    // supports of positive parts of Hermitian fixed points
    for x in fixed {
        for rot in [c64(1.0, 0.0), c64(0.0, 1.0)] {
            for sign in [1.0, -1.0] {
                let h = RandomMatrix { blocks: x.blocks.iter().map(|b| b.scale(rot * sign).hermitian_part()).collect() };
                let scale = h.blocks.iter().map(|b| b.max_abs()).fold(0.0, f64::max);
                if scale < 1e-10 {
                    continue;
                }
                let p = RandomMatrix { blocks: h.blocks.iter().map(|b| support(b, 1e-7 * scale / b.max_abs().max(1e-300))).collect() };
                if accept(&p)? {
                    return Ok(Some(p));
                }
            }
        }
    }
    // reducing projection of a return map, transported around the cycle
    for w0 in 0..n {
        let ret = composed_channel(process, base.theta_inv(w0), n)?;
        if let Some(q) = find_witness(&ret) {
            let mut blocks = alloc::vec![CMat::zeros(d, d); n];
            blocks[w0] = q.clone();
            let mut cur = q;
            let mut l = w0;
            for _ in 1..n {
                l = base.theta(l);
                let img = process.channel_at(l).apply(&cur)?;
                cur = support(&img, 1e-9);
                blocks[l] = cur.clone();
            }
            let p = RandomMatrix { blocks };
            if accept(&p)? {
                return Ok(Some(p));
            }
        }
    }
    Ok(None)
}

/// Fixed space of the forward operator, steady state and irreducibility verdict.
pub fn steady_state(process: &ProcessInstance) -> Result<SteadyState> {
    let g = build_global(process, Direction::Forward)?;
    let (n, d) = (g.n, g.d);
    let ns = null_space(&g.matrix.shift(c64(1.0, 0.0)), crate::pf::FIXED_TOL);
    let fixed: Vec<RandomMatrix> = ns.iter().map(|v| RandomMatrix::from_vector(n, d, v)).collect();
    let mut rho = None;
    let mut pd = false;
    if fixed.len() == 1 {
        let x = &fixed[0];
        let t0 = x.blocks[0].trace();
        if t0.norm() > 1e-12 {
            let r = RandomMatrix { blocks: x.blocks.iter().map(|b| b.scale(t0.inv()).hermitian_part()).collect() };
            pd = r.blocks.iter().all(|b| b.min_eigenvalue_hermitian() > 1e-10);
            rho = Some(r);
        }
    }
    if pd {
        return Ok(SteadyState { irreducible: true, fixed_dim: 1, rho, witness: None });
    }
    let witness = find_global_witness(process, &fixed)?;
    Ok(SteadyState { irreducible: false, fixed_dim: fixed.len(), rho, witness })
}

/// A class of `Lambda_L` modulo `Lambda_theta`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaCoset {
    /// Member with the smallest nonnegative phase.
    pub representative: C64,
    /// Least `m` with `representative^m` in `Lambda_theta`.
    pub order: usize,
    pub members: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    pub eigenvalues: Vec<C64>,
    /// Peripheral eigenvalues, sorted by phase.
    pub lambda_l: Vec<C64>,
    /// `(s_min, s_next)` singular values of `L - lambda I` for each peripheral eigenvalue.
    pub certificates: Vec<(f64, f64)>,
    pub lambda_theta: Vec<C64>,
    /// Cosets sorted by representative phase; the first is `Lambda_theta` itself.
    pub gamma: Vec<GammaCoset>,
    pub steady_state: RandomMatrix,
    pub irreducible: bool,
}

fn in_roots(z: C64, n: usize, tol: f64) -> bool {
    (0..n).any(|k| (z - e1(k as f64 / n as f64)).norm() <= tol)
}

/// Split `values` into classes modulo the `n`-th roots of unity.
pub fn coset_partition(values: &[C64], n: usize, tol: f64) -> Vec<Vec<C64>> {
    let mut classes: Vec<Vec<C64>> = Vec::new();
    for &v in values {
        match classes.iter_mut().find(|c| in_roots(v / c[0], n, tol)) {
            Some(c) => c.push(v),
            None => classes.push(alloc::vec![v]),
        }
    }
    for c in classes.iter_mut() {
        c.sort_by(|a, b| phase_key(*a).partial_cmp(&phase_key(*b)).unwrap_or(core::cmp::Ordering::Equal));
    }
    classes.sort_by(|a, b| phase_key(a[0]).partial_cmp(&phase_key(b[0])).unwrap_or(core::cmp::Ordering::Equal));
    classes
}

/// Least `m <= d` with `alpha^m` an `n`-th root of unity.
pub fn coset_order(alpha: C64, n: usize, d: usize, tol: f64) -> Result<usize> {
    let mut p = alpha;
    for m in 1..=d {
        if in_roots(p, n, tol) {
            return Ok(m);
        }
        p *= alpha;
    }
    Err(Error::OrderNotFound { alpha, dim: d })
}

/// Peripheral spectrum of `L`, the quotient `Gamma = Lambda_L / Lambda_theta` and orders.
pub fn peripheral_and_gamma(process: &ProcessInstance, tol: f64) -> Result<SpectralReport> {
    let ss = steady_state(process)?;
    if !ss.irreducible {
        return Err(Error::NotIrreducible);
    }
    let g = build_global(process, Direction::Forward)?;
    let (n, d) = (g.n, g.d);
    let ev = eigenvalues(&g.matrix)?;
    let mut per: Vec<C64> = ev.iter().copied().filter(|z| z.norm() >= 1.0 - tol).collect();
    per.sort_by(|a, b| phase_key(*a).partial_cmp(&phase_key(*b)).unwrap_or(core::cmp::Ordering::Equal));
    let mut certificates = Vec::with_capacity(per.len());
    for &l in &per {
        let (s_min, s_next) = simplicity_certificate(&g.matrix, l);
        if !(s_min <= SIMPLE_MAX && s_next > SIMPLE_GAP) {
            return Err(Error::SimplicityViolation { eigenvalue: l, s_min, s_next });
        }
        certificates.push((s_min, s_next));
    }
    let lambda_theta: Vec<C64> = (0..n).map(|k| e1(k as f64 / n as f64)).collect();
    for z in &lambda_theta {
        if !per.iter().any(|p| (p - z).norm() <= TOL_ROOT) {
            return Err(Error::InternalInconsistency(format!("Koopman eigenvalue {z} missing from the peripheral spectrum")));
        }
    }
    let classes = coset_partition(&per, n, TOL_ROOT);
    let mut gamma = Vec::with_capacity(classes.len());
    for c in classes {
        let rep = c[0];
        let order = coset_order(rep, n, d, TOL_ROOT)?;
        gamma.push(GammaCoset { representative: rep, order, members: c });
    }
    for a in &gamma {
        for b in &gamma {
            let prod = a.representative * b.representative;
            if !gamma.iter().any(|c| in_roots(prod / c.representative, n, TOL_ROOT)) {
                return Err(Error::InternalInconsistency("Gamma is not closed under products".into()));
            }
        }
    }
    Ok(SpectralReport {
        eigenvalues: ev,
        lambda_l: per,
        certificates,
        lambda_theta,
        gamma,
        steady_state: ss.rho.expect("irreducible"),
        irreducible: true,
    })
}

/// `(alpha, beta, u, f)` with `L^† u = alpha u`, `u^{N} = f I`, `f ∘ theta = beta f`.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigentuple {
    pub alpha: C64,
    pub beta: C64,
    pub n_alpha: usize,
    pub u: RandomMatrix,
    pub f: Vec<C64>,
    /// `f = e(a_f)` with `a_f` in `[0, 1)`.
    pub a_f: Vec<f64>,
}

/// Phase in `[0, 1)` turns with values within `1e-12` of a full turn wrapped to 0.
pub fn wrapped_turns(z: C64) -> f64 {
    let t = turns(z);
    if t > 1.0 - 1e-12 {
        0.0
    } else {
        t
    }
}

/// Eigentuple at `alpha`, which must belong to `report.lambda_l`.
pub fn eigentuple(process: &ProcessInstance, report: &SpectralReport, alpha: C64) -> Result<Eigentuple> {
    let base = finite(process)?;
    let (n, d) = (base.n(), process.dim());
    let alpha = *report
        .lambda_l
        .iter()
        .find(|z| (*z - alpha).norm() <= 1e-8)
        .ok_or_else(|| Error::InvalidInput(format!("{alpha} is not a peripheral eigenvalue")))?;
    let n_alpha = coset_order(alpha, n, d, TOL_ROOT)?;
    let u = if n_alpha == 1 {
        // alpha in Lambda_theta: u = f I with the Koopman eigenfunction f
        let f = koopman_eigenfunction(base, alpha)?;
        RandomMatrix { blocks: f.iter().map(|z| CMat::identity(d).scale(*z)).collect() }
    } else {
        let gh = build_global(process, Direction::Adjoint)?;
        let sv = svd(&gh.matrix.shift(alpha));
        let x = RandomMatrix::from_vector(n, d, &sv.v.col(sv.s.len() - 1));
        let nrm = x.blocks[0].norm_fro();
        if nrm < 1e-12 {
            return Err(Error::NotUnitary { point: 0, residual: 1.0 });
        }
        let mut s = c64((d as f64).sqrt() / nrm, 0.0);
        let gauge = crate::pf::gauge_fix(&x.blocks[0].scale(s));
        let k = x.blocks[0].as_slice().iter().zip(gauge.as_slice()).find(|(a, _)| a.norm() > 1e-8);
        if let Some((a, g)) = k {
            s = *g / *a;
        }
        x.scale(s)
    };
    for (w, b) in u.blocks.iter().enumerate() {
        let r = (&(&b.adjoint() * b) - &CMat::identity(d)).max_abs();
        if r > 1e-9 {
            return Err(Error::NotUnitary { point: w, residual: r });
        }
    }
    let beta = alpha.powu(n_alpha as u32);
    let f: Vec<C64> = u.blocks.iter().map(|b| b.powu(n_alpha as u64).trace() / d as f64).collect();
    for (w, b) in u.blocks.iter().enumerate() {
        let r = (&b.powu(n_alpha as u64) - &CMat::identity(d).scale(f[w])).max_abs();
        if r > 1e-8 || (f[w].norm() - 1.0).abs() > 1e-8 {
            return Err(Error::InternalInconsistency(format!("u^N is not scalar at point {w} (residual {r:e})")));
        }
        if (f[base.theta(w)] - beta * f[w]).norm() > 1e-8 {
            return Err(Error::InternalInconsistency(format!("f fails the Koopman relation at point {w}")));
        }
    }
    let a_f = f.iter().map(|z| wrapped_turns(*z)).collect();
    Ok(Eigentuple { alpha, beta, n_alpha, u, f, a_f })
}
