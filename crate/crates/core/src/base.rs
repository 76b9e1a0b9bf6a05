//! Ergodic driving systems and process assembly.
//!
//! Time convention: one step moves the base point `w` to `theta(w)` and
//! applies the channel attached to `theta(w)`. Orbits therefore report the
//! points `theta^1(w), ..., theta^N(w)` together with their channels.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::channel::{KrausChannel, TOL_CPTP};
use crate::error::{Error, Result};
use crate::linalg::{e1, C64};
use crate::random::stream_rng;
#[allow(unused_imports)]
use num_traits::Float;

/// Default bound on `|k|` when testing `lambda = e(k t)` for a rotation.
pub const K_MAX: i64 = 32;
/// Default distance for Koopman membership tests.
pub const TOL_ROOT: f64 = 1e-8;

/// Permutation of `{0, ..., n-1}` with the uniform measure.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteBase {
    perm: Vec<usize>,
}

impl FiniteBase {
    /// `theta(l) = l + 1 mod n`.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 1);
        FiniteBase { perm: (0..n).map(|l| (l + 1) % n).collect() }
    }

    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty permutation".into()));
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidInput("not a permutation".into()));
            }
            seen[p] = true;
        }
        Ok(FiniteBase { perm })
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn theta(&self, l: usize) -> usize {
        self.perm[l]
    }

    pub fn theta_pow(&self, mut l: usize, k: usize) -> usize {
        for _ in 0..k {
            l = self.perm[l];
        }
        l
    }

    pub fn theta_inv(&self, l: usize) -> usize {
        self.perm.iter().position(|&p| p == l).expect("bijection")
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn is_single_cycle(&self) -> bool {
        let n = self.n();
        let mut l = 0;
        for step in 1..=n {
            l = self.perm[l];
            if l == 0 {
                return step == n;
            }
        }
        false
    }
}

/// Shift over an i.i.d. sequence of labels drawn from `probs`.
#[derive(Clone, Debug, PartialEq)]
pub struct IidBase {
    probs: Vec<f64>,
    seed: u64,
}

impl IidBase {
    pub fn new(probs: Vec<f64>, seed: u64) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::InvalidInput("probabilities must be positive".into()));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("probabilities sum to {s}")));
        }
        Ok(IidBase { probs, seed })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (k, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        self.probs.len() - 1
    }
}

/// Circle rotation `s -> s + t mod 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationBase {
    t: f64,
    guard_q: u64,
}

impl RotationBase {
    /// Rejects `t` within `1e-12` of `p/q` for some `q <= guard_q`.
    pub fn new(t: f64, guard_q: u64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidInput(format!("rotation number {t} outside (0, 1)")));
        }
        if let Some(q) = rational_denominator(t, guard_q) {
            return Err(Error::RationalRotation { t, q });
        }
        Ok(RotationBase { t, guard_q })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn guard_q(&self) -> u64 {
        self.guard_q
    }

    /// `frac(s0 + j t)` with the product and sum carried in double-double.
    pub fn point(&self, s0: f64, j: u64) -> f64 {
        let jf = j as f64;
        let hi = jf * self.t;
        let lo = jf.mul_add(self.t, -hi);
        let (s, e) = two_sum(hi, s0);
        let lo = lo + e;
        let f = s - s.floor();
        let mut r = f + lo;
        r -= r.floor();
        if r >= 1.0 {
            r = 0.0;
        }
        r
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn rational_denominator(t: f64, q_max: u64) -> Option<u64> {
    (1..=q_max).find(|&q| {
        let x = t * q as f64;
        (x - x.round()).abs() / q as f64 <= 1e-12
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Base {
    Finite(FiniteBase),
    Iid(IidBase),
    Rotation(RotationBase),
}

pub fn check_ergodic(base: &Base) -> bool {
    match base {
        Base::Finite(b) => b.is_single_cycle(),
        Base::Iid(_) => true,
        Base::Rotation(r) => rational_denominator(r.t, r.guard_q).is_none(),
    }
}

/// Unimodular Koopman eigenvalues of an ergodic base.
#[derive(Clone, Debug, PartialEq)]
pub enum KoopmanSpectrum {
    /// All `n`-th roots of unity.
    Finite(Vec<C64>),
    /// `{1}`.
    Trivial,
    /// `{e(k t) : |k| <= k_max}`.
    Rotation { t: f64, k_max: i64 },
}

impl KoopmanSpectrum {
    pub fn member(&self, lambda: C64, tol: f64) -> bool {
        match self {
            KoopmanSpectrum::Finite(v) => v.iter().any(|z| (z - lambda).norm() <= tol),
            KoopmanSpectrum::Trivial => (lambda - C64::new(1.0, 0.0)).norm() <= tol,
            KoopmanSpectrum::Rotation { t, k_max } => {
                (-*k_max..=*k_max).any(|k| (e1(k as f64 * t) - lambda).norm() <= tol)
            }
        }
    }
}

pub fn koopman_peripheral(base: &Base) -> KoopmanSpectrum {
    match base {
        Base::Finite(b) => {
            let n = b.n();
            KoopmanSpectrum::Finite((0..n).map(|k| e1(k as f64 / n as f64)).collect())
        }
        Base::Iid(_) => KoopmanSpectrum::Trivial,
        Base::Rotation(r) => KoopmanSpectrum::Rotation { t: r.t, k_max: K_MAX },
    }
}

/// `f` with `f(theta^j(0)) = beta^j`, indexed by base point.
pub fn koopman_eigenfunction(base: &FiniteBase, beta: C64) -> Result<Vec<C64>> {
    if !base.is_single_cycle() {
        return Err(Error::NotErgodic);
    }
    let n = base.n();
    let k = (0..n)
        .find(|&k| (e1(k as f64 / n as f64) - beta).norm() <= 1e-9)
        .ok_or(Error::NotAnEigenvalue(beta))?;
    let mut f = vec![C64::new(0.0, 0.0); n];
    let mut l = 0;
    for j in 0..n {
        f[l] = e1(((j * k) % n) as f64 / n as f64);
        l = base.theta(l);
    }
    Ok(f)
}

/// How base points select channels.
#[derive(Clone, Debug, PartialEq)]
pub enum Assignment {
    /// Finite base: channel index per point. i.i.d. base: channel index per label.
    Table(Vec<usize>),
    /// Rotation base: channel `channels[j]` on `[breakpoints[j], breakpoints[j+1])`,
    /// with `breakpoints[0] = 0` and last breakpoint `1`.
    Intervals { breakpoints: Vec<f64>, channels: Vec<usize> },
}

/// A base together with its channel assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessInstance {
    base: Base,
    channels: Vec<KrausChannel>,
    assignment: Assignment,
    dim: usize,
}

/// Where an orbit starts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Start {
    /// A point of a finite base.
    Point(usize),
    /// Stream index for an i.i.d. base (seed comes from the base).
    Stream(u64),
    /// Initial angle in `[0, 1)` for a rotation.
    Angle(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Finite(usize),
    Iid(usize),
    Rotation(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitStep {
    pub point: Point,
    /// Index into [`ProcessInstance::channels`].
    pub channel: usize,
}

impl ProcessInstance {
    pub fn new(base: Base, channels: Vec<KrausChannel>, assignment: Assignment) -> Result<Self> {
        let dim = channels.first().ok_or_else(|| Error::InvalidInput("no channels".into()))?.dim();
        for ch in &channels {
            if ch.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: ch.dim() });
            }
            let r = ch.is_cptp(TOL_CPTP);
            if !r.passed() {
                return Err(Error::NotCptp {
                    trace_residual: r.trace_residual,
                    min_choi_eigenvalue: r.min_choi_eigenvalue,
                });
            }
        }
        let nch = channels.len();
        let in_range = |v: &[usize]| v.iter().all(|&c| c < nch);
        match (&base, &assignment) {
            (Base::Finite(b), Assignment::Table(t)) if t.len() == b.n() && in_range(t) => {}
            (Base::Iid(b), Assignment::Table(t)) if t.len() == b.probs.len() && in_range(t) => {}
            (Base::Rotation(_), Assignment::Intervals { breakpoints, channels: c })
                if breakpoints.len() == c.len() + 1
                    && !c.is_empty()
                    && in_range(c)
                    && breakpoints[0] == 0.0
                    && *breakpoints.last().expect("nonempty") == 1.0
                    && breakpoints.windows(2).all(|w| w[0] < w[1]) => {}
            _ => return Err(Error::InvalidInput("assignment does not fit the base".into())),
        }
        Ok(ProcessInstance { base, channels, assignment, dim })
    }

    /// Cycle of length `channels.len()`, with `channels[l]` at point `l`.
    pub fn finite_cycle(channels: Vec<KrausChannel>) -> Result<Self> {
        let n = channels.len();
        Self::new(Base::Finite(FiniteBase::cycle(n)), channels, Assignment::Table((0..n).collect()))
    }

    /// i.i.d. process drawing `support[k]` with probability `probs[k]`.
    pub fn iid(support: Vec<KrausChannel>, probs: Vec<f64>, seed: u64) -> Result<Self> {
        let n = support.len();
        Self::new(Base::Iid(IidBase::new(probs, seed)?), support, Assignment::Table((0..n).collect()))
    }

    pub fn base(&self) -> &Base {
        &self.base
    }

    pub fn channels(&self) -> &[KrausChannel] {
        &self.channels
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn finite_base(&self) -> Result<&FiniteBase> {
        match &self.base {
            Base::Finite(b) => Ok(b),
            _ => Err(Error::UnsupportedBase),
        }
    }

    /// Channel at a point of a finite base or at a label of an i.i.d. base.
    pub fn channel_at(&self, l: usize) -> &KrausChannel {
        match &self.assignment {
            Assignment::Table(t) => &self.channels[t[l]],
            Assignment::Intervals { .. } => panic!("channel_at on a rotation base"),
        }
    }

    /// Channel index at angle `s` of a rotation base.
    pub fn channel_index_at_angle(&self, s: f64) -> usize {
        match &self.assignment {
            Assignment::Intervals { breakpoints, channels } => {
                let j = breakpoints[1..].iter().position(|&b| s < b).unwrap_or(channels.len() - 1);
                channels[j]
            }
            Assignment::Table(_) => panic!("angle lookup without intervals"),
        }
    }

    /// Points `theta^1(start), ..., theta^length(start)` with their channels.
    pub fn orbit(&self, start: Start, length: usize) -> Result<Vec<OrbitStep>> {
        if length == 0 {
            return Err(Error::InvalidInput("orbit length must be positive".into()));
        }
        let table = |l: usize| match &self.assignment {
            Assignment::Table(t) => t[l],
            Assignment::Intervals { .. } => unreachable!("validated"),
        };
        match (&self.base, start) {
            (Base::Finite(b), Start::Point(l0)) if l0 < b.n() => {
                let mut l = l0;
                Ok((0..length)
                    .map(|_| {
                        l = b.theta(l);
                        OrbitStep { point: Point::Finite(l), channel: table(l) }
                    })
                    .collect())
            }
            (Base::Iid(b), Start::Stream(s)) => {
                let mut rng = stream_rng(b.seed, s);
                Ok((0..length)
                    .map(|_| {
                        let k = b.sample(&mut rng);
                        OrbitStep { point: Point::Iid(k), channel: table(k) }
                    })
                    .collect())
            }
            (Base::Rotation(r), Start::Angle(s0)) if (0.0..1.0).contains(&s0) => Ok((1..=length as u64)
                .map(|j| {
                    let s = r.point(s0, j);
                    OrbitStep { point: Point::Rotation(s), channel: self.channel_index_at_angle(s) }
                })
                .collect()),
            _ => Err(Error::InvalidInput("start does not fit the base".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    #[test]
    fn ergodicity_of_bases() {
        assert!(check_ergodic(&Base::Finite(FiniteBase::cycle(4))));
        let two_cycles = FiniteBase::from_permutation(vec![1, 0, 3, 2]).unwrap();
        assert!(!check_ergodic(&Base::Finite(two_cycles)));
        assert!(check_ergodic(&Base::Rotation(RotationBase::new(0.6180339887, 1000).unwrap())));
        assert!(matches!(RotationBase::new(0.25, 4), Err(Error::RationalRotation { q: 4, .. })));
        assert!(FiniteBase::from_permutation(vec![0, 0]).is_err());
    }

    #[test]
    fn koopman_spectra() {
        match koopman_peripheral(&Base::Finite(FiniteBase::cycle(2))) {
            KoopmanSpectrum::Finite(v) => {
                assert!((v[0] - c64(1.0, 0.0)).norm() < 1e-15 && (v[1] + c64(1.0, 0.0)).norm() < 1e-15)
            }
            _ => panic!(),
        }
        let iid = Base::Iid(IidBase::new(vec![0.5, 0.5], 0).unwrap());
        assert_eq!(koopman_peripheral(&iid), KoopmanSpectrum::Trivial);
        let t = 0.6180339887;
        let rot = koopman_peripheral(&Base::Rotation(RotationBase::new(t, 1000).unwrap()));
        assert!(rot.member(e1(3.0 * t), TOL_ROOT));
        assert!(!rot.member(e1(0.5), TOL_ROOT));
    }

    #[test]
    fn eigenfunctions_on_cycles() {
        let f = koopman_eigenfunction(&FiniteBase::cycle(2), c64(-1.0, 0.0)).unwrap();
        assert_eq!(f, vec![c64(1.0, 0.0), c64(-1.0, 0.0)]);
        let f = koopman_eigenfunction(&FiniteBase::cycle(4), c64(0.0, 1.0)).unwrap();
        let want = [c64(1.0, 0.0), c64(0.0, 1.0), c64(-1.0, 0.0), c64(0.0, -1.0)];
        for (a, b) in f.iter().zip(&want) {
            assert!((a - b).norm() < 1e-15);
        }
        let f = koopman_eigenfunction(&FiniteBase::cycle(3), c64(1.0, 0.0)).unwrap();
        assert!(f.iter().all(|z| (z - c64(1.0, 0.0)).norm() < 1e-15));
        assert_eq!(
            koopman_eigenfunction(&FiniteBase::cycle(3), c64(0.0, 1.0)),
            Err(Error::NotAnEigenvalue(c64(0.0, 1.0)))
        );
        // f o theta = beta f
        let b = FiniteBase::cycle(5);
        let beta = e1(2.0 / 5.0);
        let f = koopman_eigenfunction(&b, beta).unwrap();
        for l in 0..5 {
            assert!((f[b.theta(l)] - beta * f[l]).norm() < 1e-12);
            assert!((f[l].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn finite_orbit_is_theta_forward() {
        let chs = vec![KrausChannel::identity(2); 3];
        let p = ProcessInstance::finite_cycle(chs).unwrap();
        let pts: Vec<_> = p.orbit(Start::Point(0), 4).unwrap().iter().map(|s| s.point).collect();
        assert_eq!(pts, vec![Point::Finite(1), Point::Finite(2), Point::Finite(0), Point::Finite(1)]);
    }

    #[test]
    fn single_support_iid_is_constant() {
        let p = ProcessInstance::iid(vec![KrausChannel::cyclic_shift(2)], vec![1.0], 3).unwrap();
        assert!(p.orbit(Start::Stream(0), 50).unwrap().iter().all(|s| s.channel == 0));
    }

    #[test]
    fn orbits_are_deterministic() {
        let p = ProcessInstance::iid(
            vec![KrausChannel::identity(2), KrausChannel::cyclic_shift(2)],
            vec![0.3, 0.7],
            99,
        )
        .unwrap();
        assert_eq!(p.orbit(Start::Stream(4), 200).unwrap(), p.orbit(Start::Stream(4), 200).unwrap());
        assert_ne!(p.orbit(Start::Stream(4), 200).unwrap(), p.orbit(Start::Stream(5), 200).unwrap());
    }

    #[test]
    fn iid_frequencies_within_three_sigma() {
        let probs = vec![0.2, 0.5, 0.3];
        let b = IidBase::new(probs.clone(), 17).unwrap();
        let mut rng = stream_rng(17, 0);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[b.sample(&mut rng)] += 1;
        }
        for (c, p) in counts.iter().zip(&probs) {
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - n as f64 * p).abs() <= 3.0 * sigma);
        }
    }

    #[test]
    fn birkhoff_average_over_cycle_is_exact() {
        let b = FiniteBase::cycle(7);
        let g = |l: usize| (l * l) as u64;
        let mut l = 3;
        let mut sum = 0;
        for _ in 0..7 {
            l = b.theta(l);
            sum += g(l);
        }
        assert_eq!(sum, (0..7).map(g).sum::<u64>());
    }

    #[test]
    fn rotation_points_match_integer_arithmetic() {
        // t * 2^64 is an integer, so frac(s0 + j t) is exact in u128 arithmetic.
        let t = 0.6180339887f64;
        let s0 = 0.125f64;
        let r = RotationBase::new(t, 1000).unwrap();
        let scale = 18446744073709551616.0f64;
        let ti = (t * scale) as u128;
        let si = (s0 * scale) as u128;
        for j in [1u64, 17, 99_999, 1_000_000, 123_456_789] {
            let x = (si + ti * j as u128) % (1u128 << 64);
            let exact = x as f64 / scale;
            assert!((r.point(s0, j) - exact).abs() < 1e-15, "j={j}");
        }
    }

    #[test]
    fn assignment_validation() {
        let base = Base::Rotation(RotationBase::new(0.3819660113, 100).unwrap());
        let chs = vec![KrausChannel::identity(2), KrausChannel::cyclic_shift(2)];
        let good = Assignment::Intervals { breakpoints: vec![0.0, 0.5, 1.0], channels: vec![0, 1] };
        let p = ProcessInstance::new(base.clone(), chs.clone(), good).unwrap();
        assert_eq!(p.channel_index_at_angle(0.2), 0);
        assert_eq!(p.channel_index_at_angle(0.7), 1);
        let bad = Assignment::Intervals { breakpoints: vec![0.0, 0.5], channels: vec![0, 1] };
        assert!(ProcessInstance::new(base, chs, bad).is_err());
        let not_tp = KrausChannel::new(vec![crate::linalg::CMat::identity(2).scale_re(2.0)]).unwrap();
        assert!(ProcessInstance::finite_cycle(vec![not_tp]).is_err());
    }
}
