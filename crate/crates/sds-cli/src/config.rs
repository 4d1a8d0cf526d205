//! Experiment configuration: one JSON document describing the objective,
//! direction set, initialization strategy, solver settings and verification
//! regime. Parsing is strict (unknown fields are errors) and the document
//! round-trips through serialization unchanged.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use sds_core::analysis::Regime;
use sds_core::directions::DirectionSet;
use sds_core::objective::ObjectiveConfig;
use sds_core::solver::{EarlyStopCap, PollPolicy, SafetyCaps, StopRule};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub objective: ObjectiveConfig,
    pub directions: DirectionsConfig,
    #[serde(default)]
    pub init: InitConfig,
    pub solver: SolverBlock,
    pub regime: Regime,
    #[serde(default)]
    pub constants: ConstantsBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

/// Either the named maximal positive basis (sized from the objective) or an
/// inline `{"dimension": n, "directions": [[...], ...]}` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DirectionsConfig {
    Named(String),
    Inline(DirectionSet),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitConfig {
    #[default]
    None,
    /// Finds `x0`; needs `x_tilde0` plus `alpha0` and `c` (here or in the
    /// solver block).
    Bootstrap {
        x_tilde0: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
    /// Finds `alpha0`; needs `alpha_tilde0` plus `c` (here or in the solver
    /// block) and the solver block's `x0`.
    Stepsize {
        alpha_tilde0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
    /// Finds `c`; needs `alpha0` (here or in the solver block) and the
    /// solver block's `x0`.
    ForcingConstant {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha0: Option<f64>,
    },
}

/// Solver settings; `x0`, `alpha0` and `c` may be omitted exactly when the
/// chosen initialization strategy supplies them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default = "default_shrink")]
    pub shrink_factor: f64,
    #[serde(default = "default_policy")]
    pub poll_policy: PollPolicy,
    #[serde(default)]
    pub move_to_best_on_unsuccessful: bool,
    pub stop: StopRule,
    #[serde(default)]
    pub safety: SafetyCaps,
    #[serde(default)]
    pub early_stop_l_cap: EarlyStopCap,
    #[serde(default)]
    pub skip_spanning_check: bool,
}

fn default_shrink() -> f64 {
    0.5
}

fn default_policy() -> PollPolicy {
    PollPolicy::FirstImprovement
}

/// Analysis inputs not derivable from the objective metadata.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsBlock {
    /// Smoothness constant override (e.g. a local constant for objectives
    /// without a global one).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    /// Sublevel-set radius override; computed analytically for the
    /// quadratic family when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    /// Accuracy at which the evaluation-count bounds are checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}
