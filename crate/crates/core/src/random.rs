//! Seeded samplers: Gaussian and Haar matrices, random states and channels.
//!
//! All samplers take any `rand::Rng`; the crate itself uses `ChaCha20Rng`
//! seeded with `seed_from_u64(seed)` and `set_stream(stream)` per orbit.

use alloc::vec::Vec;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::channel::KrausChannel;
use crate::linalg::{c64, hermitian_function, householder_qr, CMat, C64};
#[allow(unused_imports)]
use num_traits::Float;

/// Portable generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Complex Gaussian with `E|z|^2 = 1`.
pub fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_cmat<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian_c64(rng))
}

/// Haar unitary: QR of a Gaussian matrix with the phases of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let g = gaussian_cmat(rng, d, d);
    let (q, r) = householder_qr(&g);
    let phases: Vec<C64> = r
        .diag()
        .iter()
        .map(|z| if z.norm() > 0.0 { z / z.norm() } else { c64(1.0, 0.0) })
        .collect();
    &q * &CMat::from_diag(&phases)
}

/// Density matrix `g g^* / tr(g g^*)` with Gaussian `g`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let g = gaussian_cmat(rng, d, d);
    let p = &g * &g.adjoint();
    let t = p.trace().re;
    p.scale_re(1.0 / t).hermitian_part()
}

/// Positive semidefinite `g g^*` with Gaussian `g` of rank at most `rank`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> CMat {
    let g = gaussian_cmat(rng, d, rank);
    (&g * &g.adjoint()).hermitian_part()
}

/// Replace `{G_i}` by `{G_i S^{-1/2}}` with `S = sum G_i^* G_i`.
pub fn normalize_kraus(gs: Vec<CMat>) -> KrausChannel {
    let d = gs[0].rows();
    let mut s = CMat::zeros(d, d);
    for g in &gs {
        s += &(&g.adjoint() * g);
    }
    let inv = hermitian_function(&s, |x| 1.0 / x.sqrt());
    KrausChannel::new(gs.iter().map(|g| g * &inv).collect()).expect("shapes agree")
}

/// Channel with `n_kraus` normalized Gaussian Kraus operators. Generic samples
/// with `n_kraus >= 2` are primitive.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, d: usize, n_kraus: usize) -> KrausChannel {
    normalize_kraus((0..n_kraus).map(|_| gaussian_cmat(rng, d, d)).collect())
}

/// Channel whose Kraus operators map block `k` into block `k + shift (mod m)`
/// for the orthogonal decomposition `C^d = ⊕ C^{dims[k]}`. With `shift = 1`
/// and generic samples the channel is irreducible with period `m`. `n_kraus` is
/// raised where needed so that `sum G^* G` is invertible.
pub fn random_block_cyclic<R: Rng + ?Sized>(
    rng: &mut R,
    dims: &[usize],
    shift: usize,
    n_kraus: usize,
) -> KrausChannel {
    let m = dims.len();
    let d: usize = dims.iter().sum();
    let offs: Vec<usize> = dims.iter().scan(0, |acc, &x| {
        let o = *acc;
        *acc += x;
        Some(o)
    }).collect();
    let needed = (0..m).map(|k| dims[k].div_ceil(dims[(k + shift) % m])).max().unwrap_or(1);
    let gs = (0..n_kraus.max(needed))
        .map(|_| {
            let mut g = CMat::zeros(d, d);
            for k in 0..m {
                let t = (k + shift) % m;
                let blk = gaussian_cmat(rng, dims[t], dims[k]);
                g.set_block(offs[t], offs[k], &blk);
            }
            g
        })
        .collect();
    normalize_kraus(gs)
}

/// Block projections for the decomposition used by [`random_block_cyclic`].
pub fn block_projections(dims: &[usize]) -> Vec<CMat> {
    let d: usize = dims.iter().sum();
    let mut off = 0;
    dims.iter()
        .map(|&k| {
            let p = CMat::from_fn(d, d, |i, j| {
                if i == j && i >= off && i < off + k {
                    c64(1.0, 0.0)
                } else {
                    c64(0.0, 0.0)
                }
            });
            off += k;
            p
        })
        .collect()
}
