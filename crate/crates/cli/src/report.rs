//! Analysis reports and their JSON form.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use entropik_core::check::{ConstraintCheck, ProductionSample};
use entropik_core::oracle::{OracleFailure, Witness};
use entropik_core::{format_model, ModelDef};

pub const SCHEMA_VERSION: u32 = 1;

/// Hex SHA-256 of the canonical model text.
pub fn fingerprint(m: &ModelDef) -> String {
    Sha256::digest(format_model(m).as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub engine_version: String,
    pub command: String,
    pub model: ModelInfo,
    pub result: Body,
    /// Wall-clock timings; not part of the deterministic section.
    pub timings: Timings,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub name: String,
    pub fingerprint: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timings {
    pub total_us: u64,
    pub stages: Vec<Stage>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub us: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Body {
    SolutionSet(SolutionSetOut),
    MuellerLiu(LiuOut),
    Compare(CompareOut),
    Split(SplitOut),
    Verify(VerifyOut),
    Check(CheckOut),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub name: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsequenceOut {
    pub key: String,
    pub equation: String,
    /// Total derivative applied, as independent variable names, e.g. "tx".
    pub by: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintOut {
    pub expr: String,
    pub sources: Vec<String>,
    pub cancelled: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpliedOut {
    pub dropped: String,
    pub multiple_of: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionSetOut {
    pub leading: Vec<String>,
    pub keys: Vec<String>,
    pub pivots: Vec<String>,
    pub consequences: Vec<ConsequenceOut>,
    pub free_elements: Vec<String>,
    pub constraints: Vec<ConstraintOut>,
    pub implied: Vec<ImpliedOut>,
    pub residual: String,
    pub residual_denominator: String,
    pub side_conditions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiuOut {
    pub dependency: Vec<String>,
    pub splitting: Vec<String>,
    pub identities: Vec<String>,
    pub multipliers: Vec<Pair>,
    pub unsolved: Vec<String>,
    pub physical: Vec<String>,
    pub generic: Vec<String>,
    pub leftover: Vec<String>,
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareOut {
    pub verdict: String,
    pub both: Vec<String>,
    pub liu_only: Vec<String>,
    pub solution_set_only: Vec<String>,
    pub multipliers: Vec<Pair>,
    pub generic: Vec<String>,
    pub incomplete: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeOut {
    pub assumptions: Vec<String>,
    pub status: String,
    pub pivot: Option<String>,
    pub contradiction: Option<String>,
    pub solved: Vec<Pair>,
    pub pending: Vec<String>,
    pub pruned: Vec<String>,
    pub depth_cap_hit: bool,
    pub children: Vec<NodeOut>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitOut {
    pub forced_residual_zero: bool,
    pub pivots: Vec<String>,
    pub leaves: usize,
    pub tree: NodeOut,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOut {
    pub constraints: usize,
    pub trials: usize,
    pub seed: u64,
    pub identity_pass: usize,
    pub variety_pass: usize,
    pub variety_skipped: usize,
    pub rejected_draws: usize,
    pub failures: Vec<OracleFailure>,
    pub witnesses: Vec<Witness>,
    pub production: Option<ProductionSample>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOut {
    pub checks: Vec<ConstraintCheck>,
    pub residual: String,
    pub pass: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Report> {
        serde_json::from_str(s)
    }

    /// JSON of everything except the timings; byte-identical across runs with equal inputs.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("timings");
        serde_json::to_string_pretty(&v).expect("value serializes")
    }
}
