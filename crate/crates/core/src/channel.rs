//! Quantum channels in Kraus form, with transfer and Choi views.
//!
//! The transfer matrix of `a -> sum K a K^*` in the column-stacking basis is
//! `sum conj(K) kron K`; the adjoint map has transfer matrix `T^H`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{c64, hermitian_eigen, CMat, C64};
#[allow(unused_imports)]
use num_traits::Float;

/// Default absolute tolerance for trace preservation and Choi positivity.
pub const TOL_CPTP: f64 = 1e-9;

/// Default single-linkage distance for merging eigenvalues.
pub const CLUSTER_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<CMat>,
}

/// Outcome of [`KrausChannel::is_cptp`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CptpReport {
    /// `||sum K^* K - I||_inf`.
    pub trace_residual: f64,
    pub min_choi_eigenvalue: f64,
    pub trace_preserving: bool,
    pub completely_positive: bool,
}

impl CptpReport {
    pub fn passed(&self) -> bool {
        self.trace_preserving && self.completely_positive
    }
}

impl KrausChannel {
    /// Shape-checked constructor. Does not test trace preservation.
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidInput("empty Kraus list".into()))?;
        let dim = first.rows();
        if dim == 0 {
            return Err(Error::InvalidInput("zero-dimensional Kraus operator".into()));
        }
        for k in &kraus {
            if !k.is_square() {
                return Err(Error::InvalidInput("non-square Kraus operator".into()));
            }
            if k.rows() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: k.rows() });
            }
        }
        Ok(KrausChannel { dim, kraus })
    }

    /// Constructor that also rejects maps failing [`KrausChannel::is_cptp`] at `tol`.
    pub fn new_cptp(kraus: Vec<CMat>, tol: f64) -> Result<Self> {
        let ch = Self::new(kraus)?;
        let r = ch.is_cptp(tol);
        if !r.passed() {
            return Err(Error::NotCptp {
                trace_residual: r.trace_residual,
                min_choi_eigenvalue: r.min_choi_eigenvalue,
            });
        }
        Ok(ch)
    }

    pub fn identity(d: usize) -> Self {
        KrausChannel { dim: d, kraus: alloc::vec![CMat::identity(d)] }
    }

    /// Conjugation `a -> u a u^*`.
    pub fn unitary(u: CMat) -> Self {
        KrausChannel { dim: u.rows(), kraus: alloc::vec![u] }
    }

    /// The cyclic shift with Kraus operators `|e_{k+1}><e_k|`.
    pub fn cyclic_shift(d: usize) -> Self {
        let kraus = (0..d).map(|k| CMat::ket_bra(d, (k + 1) % d, k)).collect();
        KrausChannel { dim: d, kraus }
    }

    /// `a -> (1 - lambda) a + lambda tr(a) I / d`.
    pub fn depolarizing(d: usize, lambda: f64) -> Self {
        assert!((0.0..=1.0).contains(&lambda));
        let mut kraus = Vec::new();
        if lambda < 1.0 {
            kraus.push(CMat::identity(d).scale_re((1.0 - lambda).sqrt()));
        }
        let w = (lambda / d as f64).sqrt();
        if lambda > 0.0 {
            for i in 0..d {
                for j in 0..d {
                    kraus.push(CMat::ket_bra(d, i, j).scale_re(w));
                }
            }
        }
        KrausChannel { dim: d, kraus }
    }

    /// Complete dephasing in the standard basis.
    pub fn pinching(d: usize) -> Self {
        KrausChannel { dim: d, kraus: (0..d).map(|k| CMat::ket_bra(d, k, k)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    fn check_dim(&self, a: &CMat) -> Result<()> {
        if !a.is_square() || a.rows() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: a.rows() });
        }
        Ok(())
    }

    /// `sum K a K^*`.
    pub fn apply(&self, a: &CMat) -> Result<CMat> {
        self.check_dim(a)?;
        let mut out = CMat::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out += &(&(k * a) * &k.adjoint());
        }
        Ok(out)
    }

    /// `sum K^* a K`.
    pub fn adjoint_apply(&self, a: &CMat) -> Result<CMat> {
        self.check_dim(a)?;
        let mut out = CMat::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out += &(&(&k.adjoint() * a) * k);
        }
        Ok(out)
    }

    /// `d^2 x d^2` matrix acting on column-stacked vectors.
    pub fn transfer(&self) -> CMat {
        let d2 = self.dim * self.dim;
        let mut t = CMat::zeros(d2, d2);
        for k in &self.kraus {
            t += &k.conj().kron(k);
        }
        t
    }

    /// `J = sum_ij |i><j| kron phi(|i><j|)`.
    pub fn choi(&self) -> CMat {
        let d = self.dim;
        let mut j = CMat::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                let img = self.apply(&CMat::ket_bra(d, a, b)).expect("dimension is fixed");
                j.set_block(a * d, b * d, &img);
            }
        }
        j
    }

    pub fn is_cptp(&self, tol: f64) -> CptpReport {
        let mut s = CMat::zeros(self.dim, self.dim);
        for k in &self.kraus {
            s += &(&k.adjoint() * k);
        }
        let trace_residual = (&s - &CMat::identity(self.dim)).norm_inf();
        let min_choi_eigenvalue = hermitian_eigen(&self.choi()).values[0];
        CptpReport {
            trace_residual,
            min_choi_eigenvalue,
            trace_preserving: trace_residual <= tol,
            completely_positive: min_choi_eigenvalue >= -tol,
        }
    }

    /// Most negative eigenvalue of `psi(a^* a) - psi(a)^* psi(a)` for the
    /// adjoint map `psi`, clipped at zero from above.
    pub fn schwarz_residual(&self, a: &CMat) -> Result<f64> {
        let pa = self.adjoint_apply(a)?;
        let lhs = self.adjoint_apply(&(&a.adjoint() * a))?;
        let gap = &lhs - &(&pa.adjoint() * &pa);
        Ok(hermitian_eigen(&gap).values[0].min(0.0))
    }

    /// Choi's multiplicative-domain test for the adjoint map.
    pub fn mult_domain_member(&self, a: &CMat, tol: f64) -> Result<bool> {
        let pa = self.adjoint_apply(a)?;
        let ad = a.adjoint();
        let left = &self.adjoint_apply(&(&ad * a))? - &(&pa.adjoint() * &pa);
        let right = &self.adjoint_apply(&(a * &ad))? - &(&pa * &pa.adjoint());
        Ok(left.norm_op() <= tol && right.norm_op() <= tol)
    }

    /// `next ∘ self`, Kraus operators `L_j K_i`.
    pub fn then(&self, next: &KrausChannel) -> Result<KrausChannel> {
        if next.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: next.dim });
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * next.kraus.len());
        for l in &next.kraus {
            for k in &self.kraus {
                kraus.push(l * k);
            }
        }
        Ok(KrausChannel { dim: self.dim, kraus })
    }

    /// Same map with at most `d^2` Kraus operators, read off the Choi eigendecomposition.
    pub fn compressed(&self) -> KrausChannel {
        let d = self.dim;
        if self.kraus.len() <= d * d {
            return self.clone();
        }
        let e = hermitian_eigen(&self.choi());
        let top = e.values.iter().fold(0.0f64, |a, &b| a.max(b)).max(1e-300);
        let kraus = (0..d * d)
            .filter(|&k| e.values[k] > 1e-14 * top)
            .map(|k| {
                let v = e.vectors.col(k);
                let s = e.values[k].sqrt();
                CMat::from_fn(d, d, |i, a| v[a * d + i] * s)
            })
            .collect();
        KrausChannel { dim: d, kraus }
    }

    /// Tensor product channel on `C^{d1} kron C^{d2}`.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for k in &self.kraus {
            for l in &other.kraus {
                kraus.push(k.kron(l));
            }
        }
        KrausChannel { dim: self.dim * other.dim, kraus }
    }

    /// Largest `||(I - p) K p||` over the Kraus operators; zero iff `p` reduces the channel.
    pub fn invariance_residual(&self, p: &CMat) -> f64 {
        let q = &CMat::identity(self.dim) - p;
        self.kraus.iter().map(|k| (&(&q * k) * p).norm_op()).fold(0.0, f64::max)
    }
}

/// Transfer matrix applied to a matrix, returned in matrix form.
pub fn apply_transfer(t: &CMat, a: &CMat) -> CMat {
    CMat::unvectorize(a.rows(), &t.matvec(&a.vectorize()))
}

/// Diagonal unitary `diag(e^{i phi_k})`.
pub fn phase_diag(phases: &[f64]) -> CMat {
    CMat::from_diag(&phases.iter().map(|&p| c64(p.cos(), p.sin())).collect::<Vec<C64>>())
}

/// Cyclic shift permutation matrix `S |e_k> = |e_{k+1}>`.
pub fn shift_matrix(d: usize) -> CMat {
    CMat::from_fn(d, d, |i, j| if i == (j + 1) % d { c64(1.0, 0.0) } else { c64(0.0, 0.0) })
}
