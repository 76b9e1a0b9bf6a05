//! Built-in example registry.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExampleEntry {
    pub name: &'static str,
    pub anchor: &'static str,
    pub summary: &'static str,
}

pub const EXAMPLES: [ExampleEntry; 5] = [
    ExampleEntry {
        name: "cyclic-shift",
        anchor: "single cyclic shift, trivial base",
        summary: "dephasing shift on C^d; peripheral group Z/d, basis projections as partition",
    },
    ExampleEntry {
        name: "quasiperiodic",
        anchor: "pinching/swap over an irrational rotation",
        summary: "closed-form eigen-unitary, first-return probability t, stopping-time density 1/2",
    },
    ExampleEntry {
        name: "haar",
        anchor: "Haar conjugations, irreducible but not strongly irreducible",
        summary: "trace deficit d - rank at every step, no nontrivial joint eigenvalue",
    },
    ExampleEntry {
        name: "iid-decorated-shift",
        anchor: "i.i.d. phase-decorated shifts, deterministic eigen-unitary",
        summary: "sampled orbits recover one u, constant label shift, stopping time N",
    },
    ExampleEntry {
        name: "decorated-cycle",
        anchor: "finite cycle of decorated shifts",
        summary: "global spectrum, cosets of the Koopman group, periodic partition along the cycle",
    },
];

pub fn find(name: &str) -> Option<&'static ExampleEntry> {
    EXAMPLES.iter().find(|e| e.name == name)
}
