//! Named constructions used by the tests, the acceptance suite and the CLI.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::base::{Assignment, Base, ProcessInstance, RotationBase};
use crate::channel::{phase_diag, shift_matrix, KrausChannel};
use crate::linalg::CMat;
#[allow(unused_imports)]
use num_traits::Float;

/// Denominator guard for rotation numbers.
pub const ROTATION_GUARD_Q: u64 = 1000;

/// `a -> S a S^*` on the trivial base.
pub fn cyclic_shift(d: usize) -> ProcessInstance {
    ProcessInstance::finite_cycle(vec![KrausChannel::cyclic_shift(d)]).expect("valid channel")
}

/// `a -> X a X`.
pub fn swap_channel() -> KrausChannel {
    KrausChannel::unitary(CMat::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]))
}

/// Two-point cycle: pinching at point 0, swap at point 1.
pub fn pinching_swap_pair() -> ProcessInstance {
    ProcessInstance::finite_cycle(vec![KrausChannel::pinching(2), swap_channel()]).expect("valid channels")
}

/// Rotation by `t` with pinching on `[0, t)` and swap on `[t, 1)`.
pub fn quasiperiodic(t: f64) -> crate::Result<ProcessInstance> {
    let base = RotationBase::new(t, ROTATION_GUARD_Q)?;
    if !(t > 0.0 && t < 1.0) {
        return Err(crate::Error::InvalidInput("rotation number must lie in (0, 1)".into()));
    }
    ProcessInstance::new(
        Base::Rotation(base),
        vec![KrausChannel::pinching(2), swap_channel()],
        Assignment::Intervals { breakpoints: vec![0.0, t, 1.0], channels: vec![0, 1] },
    )
}

/// `(1 - eps) Ad(W) + eps Delta ∘ Ad(W)` with `W = diag(e^{i phases}) S^shift`.
pub fn decorated_shift_channel(phases: &[f64], shift: usize, eps: f64) -> KrausChannel {
    let d = phases.len();
    let w = &phase_diag(phases) * &shift_matrix(d).powu(shift as u64);
    let mut ks = vec![w.scale_re((1.0 - eps).sqrt())];
    if eps > 0.0 {
        for k in 0..d {
            let e = CMat::ket_bra(d, k, k);
            ks.push((&e * &w).scale_re(eps.sqrt()));
        }
    }
    KrausChannel::new(ks).expect("shapes agree")
}

/// Cycle of `n` decorated shifts with random phases and shift amounts whose sum
/// is coprime to `d`, which makes the process irreducible with `Gamma = Z/d`
/// whenever `eps > 0`.
pub fn random_decorated_cycle<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize, eps: f64) -> ProcessInstance {
    let mut shifts: Vec<usize> = (0..n).map(|_| rng.random_range(0..d)).collect();
    let total: usize = shifts[..n - 1].iter().sum();
    let coprime: Vec<usize> = (0..d).filter(|&s| gcd((total + s) % d, d) == 1).collect();
    shifts[n - 1] = coprime[rng.random_range(0..coprime.len())];
    let chs = shifts
        .iter()
        .map(|&s| {
            let phases: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * core::f64::consts::TAU).collect();
            decorated_shift_channel(&phases, s, eps)
        })
        .collect();
    ProcessInstance::finite_cycle(chs).expect("valid channels")
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `a -> u S a S^* u^*` with `u = diag(e^{i phases})`.
pub fn phase_decorated_shift(phases: &[f64]) -> KrausChannel {
    KrausChannel::unitary(&phase_diag(phases) * &shift_matrix(phases.len()))
}

/// i.i.d. process over `support` uniformly drawn phase-decorated shifts.
pub fn iid_decorated_shift<R: Rng + ?Sized>(rng: &mut R, d: usize, support: usize, seed: u64) -> ProcessInstance {
    let chs: Vec<KrausChannel> = (0..support)
        .map(|_| {
            let phases: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * core::f64::consts::TAU).collect();
            phase_decorated_shift(&phases)
        })
        .collect();
    ProcessInstance::iid(chs, vec![1.0 / support as f64; support], seed).expect("valid channels")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::TOL_CPTP;
    use crate::random::stream_rng;

    #[test]
    fn constructions_are_channels() {
        let mut rng = stream_rng(5, 0);
        let p = random_decorated_cycle(&mut rng, 4, 3, 0.2);
        assert!(p.channels().iter().all(|c| c.is_cptp(TOL_CPTP).passed()));
        assert!(quasiperiodic(0.6180339887).is_ok());
        assert!(quasiperiodic(0.5).is_err());
        let ch = decorated_shift_channel(&[0.0, 0.25, 0.5], 1, 0.0);
        assert_eq!(ch.kraus().len(), 1);
        assert!(ch.kraus()[0].is_unitary(1e-14));
    }

    #[test]
    fn gcd_values() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(gcd(0, 3), 3);
        assert_eq!(gcd(5, 3), 1);
    }
}
