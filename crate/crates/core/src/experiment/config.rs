//! Run configuration, read from a flat TOML file.
//!
//! ```toml
//! problem = "benchmark"          # or "planar-patch"
//! domain = [-1.5, 1.5, -1.5, 1.5] # x_min, x_max, y_min, y_max
//! subdivisions = 8
//! degrees = [1, 2, 3]
//! # levels = 4                   # meshes per degree, default depends on k
//! lambda_factor = 20.0           # penalty lambda = lambda_factor * k^2
//! search_direction = "gradient"  # or "projected"
//! newton_tol = 1e-14
//! alpha0 = 0.5
//! # quad_stiffness = 4           # overrides of the default exactness degrees
//! # quad_consistency = 4
//! # quad_penalty = 6
//! # quad_rhs = 6
//! out_dir = "out"
//! svg = false
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::deform::{SearchVariant, StepOptions};
use crate::error::{Error, Result};
use crate::mesh::BoundingBox;
use crate::nitsche::QuadratureDegrees;

use super::benchmark::{self, Problem};

/// Highest supported polynomial degree.
pub const MAX_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Benchmark,
    PlanarPatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Gradient,
    Projected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub domain: [f64; 4],
    pub subdivisions: usize,
    pub degrees: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    pub lambda_factor: f64,
    pub search_direction: Direction,
    pub newton_tol: f64,
    pub alpha0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_stiffness: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_consistency: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_penalty: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_rhs: Option<usize>,
    pub out_dir: String,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Benchmark,
            domain: [-1.5, 1.5, -1.5, 1.5],
            subdivisions: 8,
            degrees: vec![1, 2, 3],
            levels: None,
            lambda_factor: 20.0,
            search_direction: Direction::Gradient,
            newton_tol: 1e-14,
            alpha0: 0.5,
            quad_stiffness: None,
            quad_consistency: None,
            quad_penalty: None,
            quad_rhs: None,
            out_dir: "out".into(),
            svg: false,
        }
    }
}

/// Number of meshes used for degree `k` when none is configured.
pub fn default_levels(k: usize) -> usize {
    match k {
        1 => 6,
        2 => 4,
        3 => 3,
        _ => 2,
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is serializable")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let [x0, x1, y0, y1] = self.domain;
        if !(self.domain.iter().all(|v| v.is_finite()) && x0 < x1 && y0 < y1) {
            return bad(format!("invalid domain {:?}", self.domain));
        }
        if self.subdivisions == 0 {
            return bad("subdivisions must be at least 1".into());
        }
        if self.degrees.is_empty() {
            return bad("no polynomial degree given".into());
        }
        if let Some(&k) = self.degrees.iter().find(|&&k| k == 0 || k > MAX_ORDER) {
            return bad(format!("degree {k} outside 1..={MAX_ORDER}"));
        }
        if self.levels == Some(0) {
            return bad("levels must be at least 1".into());
        }
        if !(self.lambda_factor > 0.0 && self.lambda_factor.is_finite()) {
            return bad(format!("lambda_factor must be positive, got {}", self.lambda_factor));
        }
        if !(self.newton_tol > 0.0 && self.alpha0 > 0.0) {
            return bad("newton_tol and alpha0 must be positive".into());
        }
        Ok(())
    }

    pub fn bounding_box(&self) -> BoundingBox {
        let [x0, x1, y0, y1] = self.domain;
        BoundingBox::new(x0, x1, y0, y1)
    }

    pub fn levels_for(&self, k: usize) -> usize {
        self.levels.unwrap_or_else(|| default_levels(k))
    }

    pub fn problem(&self) -> Problem {
        match self.problem {
            ProblemKind::Benchmark => benchmark::benchmark(),
            ProblemKind::PlanarPatch => benchmark::planar_patch(),
        }
    }

    pub fn variant(&self) -> SearchVariant {
        match self.search_direction {
            Direction::Gradient => SearchVariant::Gradient,
            Direction::Projected => SearchVariant::Projected,
        }
    }

    pub fn step_options(&self) -> StepOptions {
        StepOptions { tol: self.newton_tol, alpha0: self.alpha0, ..StepOptions::default() }
    }

    pub fn quadrature(&self, k: usize) -> QuadratureDegrees {
        let d = QuadratureDegrees::for_order(k);
        QuadratureDegrees {
            stiffness: self.quad_stiffness.unwrap_or(d.stiffness),
            consistency: self.quad_consistency.unwrap_or(d.consistency),
            penalty: self.quad_penalty.unwrap_or(d.penalty),
            rhs: self.quad_rhs.unwrap_or(d.rhs),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.levels_for(1), 6);
        assert_eq!(cfg.levels_for(5), 2);
        assert_eq!(cfg.quadrature(3), QuadratureDegrees { stiffness: 4, consistency: 4, penalty: 6, rhs: 6 });

        let text = "problem = \"planar-patch\"\ndegrees = [2]\nlevels = 3\nquad_rhs = 9\nsearch_direction = \"projected\"\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.quadrature(2).rhs, 9);
        let once = cfg.to_toml();
        let again = RunConfig::parse(&once).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_toml(), once);
    }

    #[test]
    fn invalid_configs() {
        for text in [
            "levels = 0",
            "degrees = []",
            "degrees = [0]",
            "lambda_factor = 0.0",
            "lambda_factor = -1.0",
            "domain = [1.0, 0.0, 0.0, 1.0]",
            "subdivisions = 0",
            "unknown_key = 1",
            "search_direction = \"sideways\"",
        ] {
            assert!(matches!(RunConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
    }
}
