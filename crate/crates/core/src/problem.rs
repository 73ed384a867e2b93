//! Problem configuration and the assembled problem it describes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conditions::{evaluate_conditions, ConditionReport};
use crate::energy::{assemble, EnergyAssembly};
use crate::kernel::RlOperator;
use crate::nonlinearity::{Nonlinearity, NonlinearitySpec};
use crate::solver::SolverConfig;
use crate::space::{build_space, SpaceConfig, SpaceModel};
use crate::{Error, Result};

/// JSON problem description:
/// `{"alpha", "T", "n", "k_max", "nonlinearity": {"kind", ...}, "solver": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub alpha: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub n: usize,
    pub k_max: usize,
    pub nonlinearity: NonlinearitySpec,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::validation(format!("invalid problem config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("invalid problem config {}: {e}", path.display())))
    }

    pub fn space_config(&self) -> Result<SpaceConfig> {
        SpaceConfig::new(self.alpha, self.t_end, self.n, self.k_max)
    }

    pub fn build(&self) -> Result<Problem> {
        let nl = Nonlinearity::from_spec(&self.nonlinearity)?;
        Problem::new(self.space_config()?, nl, self.solver.clone())
    }
}

/// Everything the solver and the harness need for one `(α, T, n, k_max, f)`.
#[derive(Debug, Clone)]
pub struct Problem {
    assembly: EnergyAssembly,
    nonlinearity: Nonlinearity,
    conditions: ConditionReport,
    solver: SolverConfig,
    /// `I^{1−α}` on the grid; `None` at `α = 1`.
    rl: Option<RlOperator>,
}

impl Problem {
    pub fn new(space: SpaceConfig, nonlinearity: Nonlinearity, solver: SolverConfig) -> Result<Self> {
        solver.validate()?;
        let model = build_space(space)?;
        let rl = space.alpha.complement().map(|g| RlOperator::new(model.grid(), g));
        let conditions = evaluate_conditions(&nonlinearity, space.alpha, space.t_end);
        Ok(Problem {
            assembly: assemble(model)?,
            nonlinearity,
            conditions,
            solver,
            rl,
        })
    }

    pub fn assembly(&self) -> &EnergyAssembly {
        &self.assembly
    }

    pub fn space(&self) -> &SpaceModel {
        self.assembly.space()
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    pub fn conditions(&self) -> &ConditionReport {
        &self.conditions
    }

    pub fn solver_config(&self) -> &SolverConfig {
        &self.solver
    }

    pub fn with_solver_config(mut self, solver: SolverConfig) -> Result<Self> {
        solver.validate()?;
        self.solver = solver;
        Ok(self)
    }

    /// The maximizer of `γ²/max_{|ξ|≤γ}F` that fixes the sublevel radius.
    pub fn gamma_bar(&self) -> f64 {
        self.conditions.gamma_bar.unwrap_or(1.0)
    }

    pub fn mu_star(&self) -> f64 {
        self.conditions.mu_star
    }

    pub(crate) fn rl(&self) -> Option<&RlOperator> {
        self.rl.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{"alpha": 0.75, "T": 1.0, "n": 256, "k_max": 16,
        "nonlinearity": {"kind": "power_sum", "r": 1.5, "s": 3.0}}"#;

    #[test]
    fn parses_and_builds() {
        let spec = ProblemSpec::from_json(EXAMPLE).unwrap();
        assert_eq!(spec.solver, SolverConfig::default());
        let p = spec.build().unwrap();
        assert!((p.gamma_bar() - 1.0).abs() < 1e-6);
        assert!((p.mu_star() - 0.530_912_068_245_484_8).abs() < 1e-9);
        let back: ProblemSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(ProblemSpec::from_json("{}"), Err(Error::Validation(_))));
        let unknown = EXAMPLE.replace("power_sum", "cosine");
        assert!(ProblemSpec::from_json(&unknown).is_err());
        let bad_alpha = EXAMPLE.replace("0.75", "0.4");
        assert!(ProblemSpec::from_json(&bad_alpha).unwrap().build().is_err());
        let bad_modes = EXAMPLE.replace("\"k_max\": 16", "\"k_max\": 128");
        assert!(ProblemSpec::from_json(&bad_modes).unwrap().build().is_err());
        assert!(matches!(ProblemSpec::load("/nonexistent/problem.json"), Err(Error::Io { .. })));
    }
}
