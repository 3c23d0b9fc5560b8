//! Configuration file schema and validation.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use flatfactor_core::space::{build_with_bounds, Space, SpaceDescriptor};
use flatfactor_core::tolerance::Tolerances;

pub const CONFIG_SCHEMA: &str = "flatfactor/config/v1";

/// Maximum nesting depth of product descriptors.
const MAX_PRODUCT_DEPTH: usize = 8;

/// Top-level configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    /// Must equal [`CONFIG_SCHEMA`].
    pub schema: String,
    pub space: SpaceDescriptor,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Half-width of the sampling box for Euclidean factors without their
    /// own bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
}

fn default_seed() -> u64 {
    42
}

/// Optional per-knob tolerance overrides; unset fields keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelogram_detect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pseudometric_slack: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub additivity_dev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isometry_identity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized_dev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bruhat_tits_quotient_slack: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient_merge: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factorization_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cat_violation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bruhat_tits_slack: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, tol: &mut Tolerances) {
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = self.$field {
                    tol.$field = v;
                }
            };
        }
        set!(parallelogram_detect);
        set!(pseudometric_slack);
        set!(additivity_dev);
        set!(isometry_identity);
        set!(normalized_dev);
        set!(bruhat_tits_quotient_slack);
        set!(quotient_merge);
        set!(factorization_residual);
        set!(cat_violation);
        set!(bruhat_tits_slack);
    }
}

fn product_depth(desc: &SpaceDescriptor) -> usize {
    match desc {
        SpaceDescriptor::Graph { .. } | SpaceDescriptor::Euclidean { .. } => 1,
        SpaceDescriptor::L2Product { left, right }
        | SpaceDescriptor::NormedProduct { left, right, .. } => {
            1 + product_depth(left).max(product_depth(right))
        }
    }
}

impl SpaceConfig {
    /// Parses and validates a configuration document. Parse errors keep the
    /// serde line/column information.
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let config: SpaceConfig = serde_json::from_str(text).context("invalid config document")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.schema != CONFIG_SCHEMA {
            bail!(
                "unsupported schema `{}` (expected `{CONFIG_SCHEMA}`)",
                self.schema
            );
        }
        let depth = product_depth(&self.space);
        if depth > MAX_PRODUCT_DEPTH {
            bail!("product nesting depth {depth} exceeds the limit {MAX_PRODUCT_DEPTH}");
        }
        if let Some(b) = self.bounds {
            if b <= 0.0 || !b.is_finite() {
                bail!("sampling bounds must be positive and finite, got {b}");
            }
        }
        if let Some(s) = self.samples {
            if s == 0 {
                bail!("samples must be at least 1");
            }
        }
        Ok(())
    }

    /// Builds the validated space handle, threading the sampling bounds.
    pub fn build(&self) -> anyhow::Result<Space> {
        build_with_bounds(&self.space, self.bounds).context("invalid space description")
    }

    /// Effective tolerance bundle after overrides.
    pub fn tolerances(&self) -> Tolerances {
        let mut tol = Tolerances::default();
        if let Some(overrides) = &self.tolerances {
            overrides.apply(&mut tol);
        }
        tol
    }
}
