//! JSON process configurations.

use eqp_core::base::{Assignment, Base, FiniteBase, IidBase, ProcessInstance, RotationBase};
use eqp_core::{CMat, KrausChannel, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Row-major complex matrix, entries as `[re, im]`.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    pub dim: usize,
    pub base: BaseConfig,
    pub channels: Vec<ChannelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<AssignmentConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_analyses")]
    pub analyses: Vec<Analysis>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BaseConfig {
    Cycle {
        n: usize,
    },
    Permutation {
        perm: Vec<usize>,
    },
    Iid {
        probs: Vec<f64>,
        #[serde(default)]
        seed: u64,
    },
    Rotation {
        t: f64,
        #[serde(default = "default_guard")]
        guard_q: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub kraus: Vec<MatrixJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AssignmentConfig {
    Table(Vec<usize>),
    Intervals { breakpoints: Vec<f64>, channels: Vec<usize> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_peripheral")]
    pub peripheral: f64,
    #[serde(default = "default_cptp")]
    pub cptp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { peripheral: default_peripheral(), cptp: default_cptp() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Spectral,
    Partition,
    Cesaro,
    Minimality,
    Aperiodicity,
}

fn default_analyses() -> Vec<Analysis> {
    vec![Analysis::Spectral, Analysis::Partition]
}

fn default_guard() -> u64 {
    eqp_core::instances::ROTATION_GUARD_Q
}

fn default_peripheral() -> f64 {
    1e-8
}

fn default_cptp() -> f64 {
    eqp_core::channel::TOL_CPTP
}

impl ProcessConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ProcessConfig = serde_json::from_str(text).map_err(|e| CliError::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serialization with fixed field order; the digest is taken over this text.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn digest(&self) -> String {
        sha256_hex(&self.canonical())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.dim == 0 {
            return bad("dim must be positive".into());
        }
        if !(self.tolerances.peripheral > 0.0 && self.tolerances.cptp > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.channels.is_empty() {
            return bad("at least one channel is required".into());
        }
        for (c, ch) in self.channels.iter().enumerate() {
            if ch.kraus.is_empty() {
                return bad(format!("channel {c} has no Kraus operators"));
            }
            for (k, m) in ch.kraus.iter().enumerate() {
                if m.len() != self.dim || m.iter().any(|r| r.len() != self.dim) {
                    return bad(format!("channel {c}, Kraus operator {k}: expected {0}x{0}", self.dim));
                }
            }
        }
        Ok(())
    }

    pub fn kraus_channels(&self) -> Result<Vec<KrausChannel>, CliError> {
        self.channels
            .iter()
            .map(|c| {
                let ks = c.kraus.iter().map(matrix_from_json).collect();
                KrausChannel::new_cptp(ks, self.tolerances.cptp).map_err(|e| CliError::Config(format!("{e}")))
            })
            .collect()
    }

    pub fn build(&self) -> Result<ProcessInstance, CliError> {
        let chs = self.kraus_channels()?;
        let cfg_err = |e: eqp_core::Error| CliError::Config(format!("{e}"));
        let table = |len: usize| -> Result<Assignment, CliError> {
            match &self.assignment {
                None if chs.len() == len => Ok(Assignment::Table((0..len).collect())),
                None => Err(CliError::Config(format!("{} channels for {len} points need an assignment", chs.len()))),
                Some(AssignmentConfig::Table(t)) => Ok(Assignment::Table(t.clone())),
                Some(AssignmentConfig::Intervals { .. }) => {
                    Err(CliError::Config("interval assignments need a rotation base".into()))
                }
            }
        };
        let (base, assignment) = match &self.base {
            BaseConfig::Cycle { n } => (Base::Finite(FiniteBase::cycle(*n)), table(*n)?),
            BaseConfig::Permutation { perm } => {
                (Base::Finite(FiniteBase::from_permutation(perm.clone()).map_err(cfg_err)?), table(perm.len())?)
            }
            BaseConfig::Iid { probs, seed } => {
                (Base::Iid(IidBase::new(probs.clone(), *seed).map_err(cfg_err)?), table(probs.len())?)
            }
            BaseConfig::Rotation { t, guard_q } => {
                let a = match &self.assignment {
                    Some(AssignmentConfig::Intervals { breakpoints, channels }) => {
                        Assignment::Intervals { breakpoints: breakpoints.clone(), channels: channels.clone() }
                    }
                    _ => return Err(CliError::Config("a rotation base needs an interval assignment".into())),
                };
                (Base::Rotation(RotationBase::new(*t, *guard_q).map_err(cfg_err)?), a)
            }
        };
        ProcessInstance::new(base, chs, assignment).map_err(cfg_err)
    }
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn matrix_from_json(m: &MatrixJson) -> CMat {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    CMat::from_fn(rows, cols, |i, j| C64::new(m[i][j][0], m[i][j][1]))
}

pub fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}
