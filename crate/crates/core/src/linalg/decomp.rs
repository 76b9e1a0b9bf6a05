use alloc::vec;
use alloc::vec::Vec;

use super::{c64, vdot, vnorm, CMat, C64};
use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

const EPS: f64 = f64::EPSILON;

fn zero() -> C64 {
    c64(0.0, 0.0)
}

/// Reduce a square matrix to upper Hessenberg form by Householder similarity.
fn hessenberg(a: &CMat) -> CMat {
    let n = a.rows();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    for k in 0..n - 2 {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xn = vnorm(&x);
        if xn == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { c64(1.0, 0.0) };
        let mut v = x;
        v[0] += phase * xn;
        let vn = vnorm(&v);
        for z in v.iter_mut() {
            *z /= vn;
        }
        for j in k..n {
            let s: C64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)]).sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= *vi * s * 2.0;
            }
        }
        for i in 0..n {
            let s: C64 = v.iter().enumerate().map(|(j, vj)| h[(i, k + 1 + j)] * vj).sum();
            for (j, vj) in v.iter().enumerate() {
                h[(i, k + 1 + j)] -= s * vj.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = zero();
        }
    }
    h
}

fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let m = (a + d) * 0.5;
    let disc = (((a - d) * 0.5) * ((a - d) * 0.5) + b * c).sqrt();
    (m + disc, m - disc)
}

/// One explicitly shifted QR sweep on the active window `lo..=hi` of a Hessenberg matrix.
fn qr_sweep(h: &mut CMat, lo: usize, hi: usize, mu: C64) {
    for k in lo..=hi {
        h[(k, k)] -= mu;
    }
    let mut rots: Vec<(f64, C64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (1.0, zero())
        } else if a.norm() == 0.0 {
            (0.0, c64(1.0, 0.0))
        } else {
            (a.norm() / r, (a / a.norm()) * b.conj() / r)
        };
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        for i in lo..=(k + 2).min(hi) {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = -x * s + y * c;
        }
    }
    for k in lo..=hi {
        h[(k, k)] += mu;
    }
}

/// All eigenvalues of a square complex matrix.
///
/// Householder reduction to Hessenberg form followed by single-shift QR with
/// Wilkinson shifts and periodic exceptional shifts (needed for permutation-like
/// inputs, where the plain shift stalls).
pub fn eigenvalues(a: &CMat) -> Result<Vec<C64>> {
    assert!(a.is_square(), "eigenvalues of a non-square matrix");
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(a);
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    let mut eig = vec![zero(); n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].l1_norm() + h[(l, l)].l1_norm();
            if s == 0.0 {
                s = scale;
            }
            if h[(l, l - 1)].l1_norm() <= EPS * s {
                h[(l, l - 1)] = zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        if l + 1 == hi {
            let (x, y) = eig2(h[(l, l)], h[(l, l + 1)], h[(l + 1, l)], h[(hi, hi)]);
            eig[l] = x;
            eig[hi] = y;
            if l == 0 {
                break;
            }
            hi = l - 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > 200 || total > 60 * n + 200 {
            return Err(Error::NotConverged { what: "Hessenberg QR", residual: h[(hi, hi - 1)].norm() });
        }
        let mu = if iter % 11 == 0 {
            let sub = h[(hi, hi - 1)].norm() + h[(hi - 1, hi - 2)].norm();
            h[(hi, hi)] + c64(0.75, 0.43) * sub * ((iter / 11) as f64)
        } else {
            let (x, y) = eig2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            if (x - h[(hi, hi)]).norm() <= (y - h[(hi, hi)]).norm() {
                x
            } else {
                y
            }
        };
        qr_sweep(&mut h, l, hi, mu);
    }
    Ok(eig)
}

/// Thin singular value decomposition `a = u diag(s) v^H` with `s` descending.
///
/// Wide inputs are padded with zero rows, so `v` is always square and `s` has
/// one entry per column. Columns of `u` for zero singular values are left zero.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

/// One-sided Hestenes-Jacobi SVD.
pub fn svd(a: &CMat) -> Svd {
    let m = a.rows().max(a.cols());
    let n = a.cols();
    let mut cols: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut c = a.col(j);
            c.resize(m, zero());
            c
        })
        .collect();
    let mut vcols: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut c = vec![zero(); n];
            c[j] = c64(1.0, 0.0);
            c
        })
        .collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = vdot(&cols[p], &cols[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let ph = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut cols, p, q, ph, c, s);
                rotate_pair(&mut vcols, p, q, ph, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = cols.iter().map(|c| vnorm(c)).zip(0..n).collect();
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(core::cmp::Ordering::Equal));
    let mut u = CMat::zeros(m, n);
    let mut v = CMat::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &(sv, j)) in order.iter().enumerate() {
        s.push(sv);
        if sv > 0.0 {
            let uc: Vec<C64> = cols[j].iter().map(|z| z / sv).collect();
            u.set_col(k, &uc);
        }
        v.set_col(k, &vcols[j]);
    }
    Svd { u, s, v }
}

fn rotate_pair(cols: &mut [Vec<C64>], p: usize, q: usize, ph: C64, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * ph;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

/// Right singular vectors of `a` whose singular value is at most `tol`.
pub fn null_space(a: &CMat, tol: f64) -> Vec<Vec<C64>> {
    let d = svd(a);
    d.s.iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol)
        .map(|(k, _)| d.v.col(k))
        .collect()
}

/// Eigen-decomposition of a Hermitian matrix; values ascending, vectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// Cyclic complex Jacobi. Only the Hermitian part of the input is used.
pub fn hermitian_eigen(a: &CMat) -> HermitianEigen {
    assert!(a.is_square());
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = CMat::identity(n);
    let fro = m.norm_fro().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += m[(p, q)].norm_sqr();
                }
            }
        }
        if off.sqrt() <= 1e-16 * fro {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let g = apq.norm();
                if g <= 1e-300 {
                    continue;
                }
                let e = apq / g;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let zeta = (aqq - app) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let wpp = c64(c, 0.0);
                let wpq = c64(s, 0.0);
                let wqp = e.conj() * (-s);
                let wqq = e.conj() * c;
                for i in 0..n {
                    let x = m[(i, p)];
                    let y = m[(i, q)];
                    m[(i, p)] = x * wpp + y * wqp;
                    m[(i, q)] = x * wpq + y * wqq;
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = x * wpp + y * wqp;
                    v[(i, q)] = x * wpq + y * wqq;
                }
                for j in 0..n {
                    let x = m[(p, j)];
                    let y = m[(q, j)];
                    m[(p, j)] = wpp.conj() * x + wqp.conj() * y;
                    m[(q, j)] = wpq.conj() * x + wqq.conj() * y;
                }
                m[(p, q)] = zero();
                m[(q, p)] = zero();
                m[(p, p)] = c64(m[(p, p)].re, 0.0);
                m[(q, q)] = c64(m[(q, q)].re, 0.0);
            }
        }
    }
    let mut order: Vec<(f64, usize)> = (0..n).map(|i| (m[(i, i)].re, i)).collect();
    order.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(core::cmp::Ordering::Equal));
    let mut vectors = CMat::zeros(n, n);
    for (k, &(_, i)) in order.iter().enumerate() {
        vectors.set_col(k, &v.col(i));
    }
    HermitianEigen { values: order.iter().map(|x| x.0).collect(), vectors }
}

/// `f(a)` for the Hermitian part of `a`, through its eigen-decomposition.
pub fn hermitian_function(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let e = hermitian_eigen(a);
    let n = a.rows();
    let mut out = CMat::zeros(n, n);
    for k in 0..n {
        let v = e.vectors.col(k);
        out += &CMat::outer(&v, &v).scale_re(f(e.values[k]));
    }
    out
}

/// Polar factors `x = u h`.
#[derive(Clone, Debug)]
pub struct Polar {
    pub u: CMat,
    pub h: CMat,
}

/// Polar decomposition of an invertible square matrix via its SVD.
pub fn polar_unitary(x: &CMat) -> Result<Polar> {
    assert!(x.is_square());
    let d = svd(x);
    let smax = d.s.first().copied().unwrap_or(0.0);
    let smin = d.s.last().copied().unwrap_or(0.0);
    if smax == 0.0 || smin <= 1e-12 * smax {
        let ratio = if smax == 0.0 { 0.0 } else { smin / smax };
        return Err(Error::SingularInput { ratio });
    }
    let vh = d.v.adjoint();
    let u = &d.u * &vh;
    let sig = CMat::from_diag(&d.s.iter().map(|&s| c64(s, 0.0)).collect::<Vec<_>>());
    let h = &(&d.v * &sig) * &vh;
    Ok(Polar { u, h: h.hermitian_part() })
}

/// Spectral projections of a normal matrix, with eigenvalues merged by
/// single linkage at distance `cluster_tol`.
pub fn spectral_projections(m: &CMat, cluster_tol: f64) -> Result<Vec<(C64, CMat)>> {
    assert!(m.is_square());
    let n = m.rows();
    let scale = m.norm_fro().max(f64::MIN_POSITIVE);
    let ma = m.adjoint();
    let residual = (&(m * &ma) - &(&ma * m)).norm_fro();
    if residual > 1e-9 * scale * scale {
        return Err(Error::NotNormal { residual });
    }
    let re = (m + &ma).scale_re(0.5);
    let im = (m - &ma).scale(c64(0.0, -0.5));
    let mut best_err = f64::INFINITY;
    for &c in &[1.0 / core::f64::consts::PI, 0.5772156649, 1.6180339887, 0.1234567] {
        let h = &re + &im.scale_re(c);
        let eig = hermitian_eigen(&h);
        let vecs: Vec<Vec<C64>> = (0..n).map(|k| eig.vectors.col(k)).collect();
        let lams: Vec<C64> = vecs.iter().map(|v| vdot(v, &m.matvec(v))).collect();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                if (lams[i] - lams[j]).norm() <= cluster_tol {
                    let a = find(&mut parent, i);
                    let b = find(&mut parent, j);
                    parent[a] = b;
                }
            }
        }
        let mut roots: Vec<usize> = Vec::new();
        let mut out: Vec<(C64, CMat)> = Vec::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            let pos = match roots.iter().position(|&x| x == r) {
                Some(p) => p,
                None => {
                    roots.push(r);
                    out.push((zero(), CMat::zeros(n, n)));
                    roots.len() - 1
                }
            };
            out[pos].1 += &CMat::outer(&vecs[i], &vecs[i]);
        }
        let mut recon = CMat::zeros(n, n);
        for (lam, p) in out.iter_mut() {
            *lam = (m * &*p).trace() / p.trace();
            recon += &p.scale(*lam);
        }
        let err = (&recon - m).norm_fro();
        if err <= 1e-10 * scale.max(1.0) {
            return Ok(out);
        }
        best_err = best_err.min(err);
    }
    Err(Error::NotConverged { what: "spectral projections", residual: best_err })
}

/// Householder QR `a = q r` of a square or tall matrix; `q` is square.
pub fn householder_qr(a: &CMat) -> (CMat, CMat) {
    let m = a.rows();
    let n = a.cols();
    let mut r = a.clone();
    let mut q = CMat::identity(m);
    for k in 0..n.min(m.saturating_sub(1)) {
        let x: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
        let xn = vnorm(&x);
        if xn == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { c64(1.0, 0.0) };
        let mut v = x;
        v[0] += phase * xn;
        let vn = vnorm(&v);
        for z in v.iter_mut() {
            *z /= vn;
        }
        for j in k..n {
            let s: C64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * r[(k + i, j)]).sum();
            for (i, vi) in v.iter().enumerate() {
                r[(k + i, j)] -= *vi * s * 2.0;
            }
        }
        for i in 0..m {
            let s: C64 = v.iter().enumerate().map(|(j, vj)| q[(i, k + j)] * vj).sum();
            for (j, vj) in v.iter().enumerate() {
                q[(i, k + j)] -= s * vj.conj() * 2.0;
            }
        }
        for i in k + 1..m {
            r[(i, k)] = zero();
        }
    }
    (q, r)
}

/// Modified Gram-Schmidt with one reorthogonalization pass. Vectors whose
/// residual norm drops below `tol` times their original norm are discarded.
pub fn orthonormalize(vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let n0 = vnorm(v);
        if n0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = vdot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nw = vnorm(&w);
        if nw > tol * n0 {
            basis.push(w.iter().map(|z| z / nw).collect());
        }
    }
    basis
}

/// Average `n^{-1} sum_{j<n} m^j`, computed by binary splitting in
/// `O(log n)` matrix products.
pub fn cesaro_mean(m: &CMat, n: u64) -> CMat {
    assert!(n >= 1);
    // returns (sum_{j<k} m^j, m^k)
    fn go(m: &CMat, k: u64) -> (CMat, CMat) {
        if k == 1 {
            return (CMat::identity(m.rows()), m.clone());
        }
        if k % 2 == 0 {
            let (s, p) = go(m, k / 2);
            let s2 = &s + &(&p * &s);
            (s2, &p * &p)
        } else {
            let (s, p) = go(m, k - 1);
            let s2 = &CMat::identity(m.rows()) + &(m * &s);
            (s2, m * &p)
        }
    }
    go(m, n).0.scale_re(1.0 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::e1;

    fn assert_same_multiset(got: &[C64], want: &[C64], tol: f64) {
        assert_eq!(got.len(), want.len());
        let mut used = vec![false; got.len()];
        for w in want {
            let k = (0..got.len())
                .filter(|&k| !used[k])
                .min_by(|&a, &b| (got[a] - w).norm().partial_cmp(&(got[b] - w).norm()).unwrap())
                .unwrap();
            assert!((got[k] - w).norm() < tol, "{w} unmatched in {got:?}");
            used[k] = true;
        }
    }

    fn lcg_mat(n: usize, seed: u64) -> CMat {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMat::from_fn(n, n, |_, _| c64(next(), next()))
    }

    #[test]
    fn eigenvalues_of_cyclic_permutation_are_roots_of_unity() {
        for n in 2..9 {
            let p = CMat::from_fn(n, n, |i, j| if i == (j + 1) % n { c64(1.0, 0.0) } else { zero() });
            let ev = eigenvalues(&p).unwrap();
            let want: Vec<C64> = (0..n).map(|k| e1(k as f64 / n as f64)).collect();
            assert_same_multiset(&ev, &want, 1e-10);
        }
    }

    #[test]
    fn eigenvalues_of_triangular_are_diagonal() {
        let mut a = lcg_mat(6, 3);
        for i in 0..6 {
            for j in 0..i {
                a[(i, j)] = zero();
            }
        }
        assert_same_multiset(&eigenvalues(&a).unwrap(), &a.diag(), 1e-12);
    }

    #[test]
    fn eigenvalues_preserve_trace_and_determinant_residual() {
        for seed in 0..20 {
            let a = lcg_mat(9, seed);
            let ev = eigenvalues(&a).unwrap();
            let tr: C64 = ev.iter().sum();
            assert!((tr - a.trace()).norm() < 1e-10);
            for &l in &ev {
                let s = svd(&a.shift(l)).s;
                assert!(*s.last().unwrap() < 1e-10, "seed {seed}");
            }
        }
    }

    #[test]
    fn eigenvalues_of_permutation_kron_identity() {
        // Block permutation: every cube root of unity with multiplicity 4.
        let n = 3;
        let p = CMat::from_fn(n, n, |i, j| if i == (j + 1) % n { c64(1.0, 0.0) } else { zero() });
        let m = p.kron(&CMat::identity(4));
        let ev = eigenvalues(&m).unwrap();
        for k in 0..3 {
            let r = e1(k as f64 / 3.0);
            assert_eq!(ev.iter().filter(|z| (*z - r).norm() < 1e-6).count(), 4);
        }
    }

    #[test]
    fn svd_reconstructs() {
        let a = CMat::from_fn(5, 3, |i, j| c64((i * j) as f64 - 1.0, (i + j) as f64 * 0.3));
        let d = svd(&a);
        let sig = CMat::from_diag(&d.s.iter().map(|&s| c64(s, 0.0)).collect::<Vec<_>>());
        let r = &(&d.u * &sig) * &d.v.adjoint();
        assert!((&r - &a).max_abs() < 1e-12);
        assert!(d.v.is_unitary(1e-12));
        assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_of_wide_matrix_pads() {
        let a = CMat::from_real(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0]]);
        let d = svd(&a);
        assert_eq!(d.s.len(), 3);
        assert!((d.s[0] - 2.0).abs() < 1e-14 && (d.s[1] - 1.0).abs() < 1e-14 && d.s[2] == 0.0);
        let ns = null_space(&a, 1e-12);
        assert_eq!(ns.len(), 1);
        assert!((ns[0][2].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_eigen_diagonalizes() {
        let b = lcg_mat(6, 11);
        let h = (&b + &b.adjoint()).scale_re(0.5);
        let e = hermitian_eigen(&h);
        let d = CMat::from_diag(&e.values.iter().map(|&x| c64(x, 0.0)).collect::<Vec<_>>());
        let r = &(&e.vectors * &d) * &e.vectors.adjoint();
        assert!((&r - &h).max_abs() < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn polar_factors() {
        let x = lcg_mat(4, 5);
        let p = polar_unitary(&x).unwrap();
        assert!(p.u.is_unitary(1e-12));
        assert!(p.h.is_hermitian(1e-12));
        assert!(p.h.min_eigenvalue_hermitian() > 0.0);
        assert!((&(&p.u * &p.h) - &x).max_abs() < 1e-12);
        assert!(matches!(polar_unitary(&CMat::zeros(2, 2)), Err(Error::SingularInput { .. })));
    }

    #[test]
    fn qr_reconstructs() {
        let a = lcg_mat(5, 9);
        let (q, r) = householder_qr(&a);
        assert!(q.is_unitary(1e-12));
        assert!((&(&q * &r) - &a).max_abs() < 1e-12);
        for i in 0..5 {
            for j in 0..i {
                assert!(r[(i, j)].norm() < 1e-14);
            }
        }
    }

    #[test]
    fn cesaro_mean_matches_direct_sum() {
        let a = lcg_mat(3, 1).scale_re(0.5);
        for n in [1u64, 2, 5, 12, 17] {
            let mut s = CMat::zeros(3, 3);
            let mut p = CMat::identity(3);
            for _ in 0..n {
                s += &p;
                p = &p * &a;
            }
            assert!((&s.scale_re(1.0 / n as f64) - &cesaro_mean(&a, n)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn orthonormalize_drops_dependent() {
        let v1 = vec![c64(1.0, 0.0), c64(1.0, 0.0)];
        let v2 = vec![c64(2.0, 0.0), c64(2.0, 0.0)];
        let v3 = vec![c64(0.0, 1.0), zero()];
        let b = orthonormalize(&[v1, v2, v3], 1e-10);
        assert_eq!(b.len(), 2);
        assert!(vdot(&b[0], &b[1]).norm() < 1e-14);
    }
}
