use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LossError;

/// Which terms of the weighted objective are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMode {
    /// `r_w - r_l`
    Dpo,
    /// Actuality weights only.
    DpoAct,
    /// Finesse scaling only.
    DpoFin,
    /// Actuality weights and Finesse scaling.
    HinDpo,
}

impl LossMode {
    pub const ALL: [LossMode; 4] = [LossMode::Dpo, LossMode::DpoAct, LossMode::DpoFin, LossMode::HinDpo];

    pub fn uses_actuality(self) -> bool {
        matches!(self, LossMode::DpoAct | LossMode::HinDpo)
    }

    pub fn uses_finesse(self) -> bool {
        matches!(self, LossMode::DpoFin | LossMode::HinDpo)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LossMode::Dpo => "dpo",
            LossMode::DpoAct => "dpo_act",
            LossMode::DpoFin => "dpo_fin",
            LossMode::HinDpo => "hin_dpo",
        }
    }
}

impl fmt::Display for LossMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossMode {
    type Err = LossError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LossMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| LossError::InvalidConfig(format!("unknown loss mode {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    pub beta: f64,
    pub epsilon: f64,
    pub mode: LossMode,
    /// Responses drawn per prompt for the Finesse variance.
    pub finesse_samples: usize,
    pub finesse_temperature: f64,
    /// Length cap for Finesse samples.
    pub finesse_max_len: usize,
    /// Upper bound on the `1 / (v + epsilon)` multiplier.
    pub scale_cap: f64,
    /// Divide the raw variance by 0.25, the largest variance of values in [0, 1].
    pub normalize_variance: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            beta: 0.6,
            epsilon: 0.05,
            mode: LossMode::HinDpo,
            finesse_samples: 5,
            finesse_temperature: 0.9,
            finesse_max_len: 64,
            scale_cap: 20.0,
            normalize_variance: true,
        }
    }
}

impl LossConfig {
    pub fn with_mode(mode: LossMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), LossError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(LossError::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("beta", self.beta)?;
        positive("epsilon", self.epsilon)?;
        positive("scale_cap", self.scale_cap)?;
        positive("finesse_temperature", self.finesse_temperature)?;
        if self.finesse_samples < 2 {
            return Err(LossError::InvalidConfig(format!(
                "finesse_samples must be >= 2, got {}",
                self.finesse_samples
            )));
        }
        if self.finesse_max_len == 0 {
            return Err(LossError::InvalidConfig("finesse_max_len must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = LossConfig::default();
        c.validate().unwrap();
        assert_eq!(c.beta, 0.6);
        assert_eq!(c.finesse_samples, 5);
        assert_eq!(c.finesse_temperature, 0.9);
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            LossConfig { beta: 0.0, ..Default::default() },
            LossConfig { epsilon: -1.0, ..Default::default() },
            LossConfig { scale_cap: f64::NAN, ..Default::default() },
            LossConfig { finesse_samples: 1, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn mode_names_round_trip() {
        for m in LossMode::ALL {
            assert_eq!(m.as_str().parse::<LossMode>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
        assert!("ppo".parse::<LossMode>().is_err());
    }
}
