//! Trajectory modifications an adversary might apply to strip a watermark,
//! each bounded by the modification threshold.

mod ops;
mod rdp;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{trajectory_distance, Trajectory};
use crate::watermark::WatermarkParams;

pub use ops::{agwn, aosnr, asnr, centered_power, crop, dea, hybrid, lia, rnspp, rrp, rrpp};
pub use rdp::{chord_distance, rdp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackKind {
    Agwn,
    Asnr,
    Aosnr,
    Dea,
    Rrp,
    Rrpp,
    Rnspp,
    Lia,
    #[serde(alias = "ca")]
    Crop,
    Hybrid,
}

impl AttackKind {
    pub const ALL: [AttackKind; 10] = [
        AttackKind::Agwn,
        AttackKind::Asnr,
        AttackKind::Aosnr,
        AttackKind::Dea,
        AttackKind::Rrp,
        AttackKind::Rnspp,
        AttackKind::Rrpp,
        AttackKind::Lia,
        AttackKind::Crop,
        AttackKind::Hybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::Agwn => "agwn",
            AttackKind::Asnr => "asnr",
            AttackKind::Aosnr => "aosnr",
            AttackKind::Dea => "dea",
            AttackKind::Rrp => "rrp",
            AttackKind::Rrpp => "rrpp",
            AttackKind::Rnspp => "rnspp",
            AttackKind::Lia => "lia",
            AttackKind::Crop => "crop",
            AttackKind::Hybrid => "hybrid",
        }
    }

    /// Short column label for result tables.
    pub fn label(self) -> &'static str {
        match self {
            AttackKind::Crop => "CA",
            AttackKind::Hybrid => "Hybrid",
            AttackKind::Agwn => "AGWN",
            AttackKind::Asnr => "ASNR",
            AttackKind::Aosnr => "AOSNR",
            AttackKind::Dea => "DEA",
            AttackKind::Rrp => "RRP",
            AttackKind::Rrpp => "RRPP",
            AttackKind::Rnspp => "RNSPP",
            AttackKind::Lia => "LIA",
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if lower == "ca" {
            return Ok(AttackKind::Crop);
        }
        AttackKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| {
                let names: Vec<_> = AttackKind::ALL.iter().map(|k| k.name()).collect();
                Error::domain(format!(
                    "unknown attack {s:?}; valid kinds: {}",
                    names.join(", ")
                ))
            })
    }
}

/// An attack together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Attack {
    Agwn {
        std_deg: f64,
    },
    Asnr {
        snr_db: f64,
    },
    Aosnr {
        p: f64,
        snr_db: f64,
    },
    Dea {
        block_size: usize,
        strength: f64,
        nonzero_count: usize,
    },
    Rrp {
        p: f64,
    },
    Rrpp {
        p: f64,
    },
    Rnspp {
        epsilon_m: f64,
    },
    Lia {
        p: f64,
    },
    #[serde(alias = "ca")]
    Crop {
        p: f64,
    },
    Hybrid {
        crop_p: f64,
        std_deg: f64,
        rrp_p: f64,
    },
}

impl Attack {
    pub fn kind(&self) -> AttackKind {
        match self {
            Attack::Agwn { .. } => AttackKind::Agwn,
            Attack::Asnr { .. } => AttackKind::Asnr,
            Attack::Aosnr { .. } => AttackKind::Aosnr,
            Attack::Dea { .. } => AttackKind::Dea,
            Attack::Rrp { .. } => AttackKind::Rrp,
            Attack::Rrpp { .. } => AttackKind::Rrpp,
            Attack::Rnspp { .. } => AttackKind::Rnspp,
            Attack::Lia { .. } => AttackKind::Lia,
            Attack::Crop { .. } => AttackKind::Crop,
            Attack::Hybrid { .. } => AttackKind::Hybrid,
        }
    }

    /// The parameter setting under which the attack leaves its input untouched.
    /// Double embedding has none; its zero-strength form is returned instead.
    pub fn identity(kind: AttackKind) -> Attack {
        match kind {
            AttackKind::Agwn => Attack::Agwn { std_deg: 0.0 },
            AttackKind::Asnr => Attack::Asnr {
                snr_db: f64::INFINITY,
            },
            AttackKind::Aosnr => Attack::Aosnr {
                p: 0.0,
                snr_db: f64::INFINITY,
            },
            AttackKind::Dea => {
                let d = WatermarkParams::default();
                Attack::Dea {
                    block_size: d.block_size,
                    strength: 0.0,
                    nonzero_count: d.nonzero_count,
                }
            }
            AttackKind::Rrp => Attack::Rrp { p: 0.0 },
            AttackKind::Rrpp => Attack::Rrpp { p: 0.0 },
            AttackKind::Rnspp => Attack::Rnspp { epsilon_m: 0.0 },
            AttackKind::Lia => Attack::Lia { p: 0.0 },
            AttackKind::Crop => Attack::Crop { p: 0.0 },
            AttackKind::Hybrid => Attack::Hybrid {
                crop_p: 0.0,
                std_deg: 0.0,
                rrp_p: 0.0,
            },
        }
    }

    pub fn apply(&self, t: &Trajectory, seed: u64) -> Result<Trajectory> {
        match *self {
            Attack::Agwn { std_deg } => agwn(t, std_deg, seed),
            Attack::Asnr { snr_db } => asnr(t, snr_db, seed),
            Attack::Aosnr { p, snr_db } => aosnr(t, p, snr_db, seed),
            Attack::Dea {
                block_size,
                strength,
                nonzero_count,
            } => {
                let params = WatermarkParams {
                    block_size,
                    strength,
                    nonzero_count,
                };
                dea(t, &params, seed)
            }
            Attack::Rrp { p } => rrp(t, p, seed),
            Attack::Rrpp { p } => rrpp(t, p, seed),
            Attack::Rnspp { epsilon_m } => rnspp(t, epsilon_m),
            Attack::Lia { p } => lia(t, p, seed),
            Attack::Crop { p } => crop(t, p, seed),
            Attack::Hybrid {
                crop_p,
                std_deg,
                rrp_p,
            } => hybrid(t, crop_p, std_deg, rrp_p, seed),
        }
    }

    /// A milder version of the same attack, used when an attacked sample
    /// breaks the modification threshold: probabilities, noise levels,
    /// tolerances and strengths are halved; SNR targets gain 3 dB.
    pub fn weakened(&self) -> Attack {
        let mut a = self.clone();
        match &mut a {
            Attack::Agwn { std_deg } => *std_deg /= 2.0,
            Attack::Asnr { snr_db } => *snr_db += 3.0,
            Attack::Aosnr { p, snr_db } => {
                *p /= 2.0;
                *snr_db += 3.0;
            }
            Attack::Dea { strength, .. } => *strength /= 2.0,
            Attack::Rrp { p } | Attack::Rrpp { p } | Attack::Lia { p } | Attack::Crop { p } => {
                *p /= 2.0
            }
            Attack::Rnspp { epsilon_m } => *epsilon_m /= 2.0,
            Attack::Hybrid {
                crop_p,
                std_deg,
                rrp_p,
            } => {
                *crop_p /= 2.0;
                *std_deg /= 2.0;
                *rrp_p /= 2.0;
            }
        }
        a
    }

    /// Parameters as name/value pairs, for reports.
    pub fn params(&self) -> BTreeMap<String, f64> {
        let value = serde_json::to_value(self).expect("attack serializes");
        value
            .as_object()
            .expect("attack serializes to an object")
            .iter()
            .filter_map(|(k, v)| v.as_f64().map(|f| (k.clone(), f)))
            .collect()
    }

    /// Overrides one named parameter, e.g. `p=0.2`.
    pub fn set_param(&mut self, key: &str, value: f64) -> Result<()> {
        let mut obj = serde_json::to_value(&*self).expect("attack serializes");
        let map = obj.as_object_mut().expect("attack serializes to an object");
        if key == "kind" || !map.contains_key(key) {
            let known: Vec<_> = map.keys().filter(|k| *k != "kind").cloned().collect();
            return Err(Error::domain(format!(
                "attack {} has no parameter {key:?}; known: {}",
                self.kind(),
                known.join(", ")
            )));
        }
        let v = if map[key].is_u64() {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(Error::domain(format!("{key} must be a non-negative integer")));
            }
            serde_json::json!(value as u64)
        } else {
            serde_json::json!(value)
        };
        map.insert(key.to_string(), v);
        *self = serde_json::from_value(obj).map_err(|e| Error::Format(e.to_string()))?;
        Ok(())
    }
}

/// An attack bound to its modification threshold and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub attack: Attack,
    pub sigma_m: f64,
    pub seed: u64,
}

impl AttackConfig {
    /// Applies the attack and checks the result with [`constrain`].
    pub fn run(&self, t: &Trajectory) -> Result<Trajectory> {
        let attacked = self.attack.apply(t, self.seed)?;
        constrain(t, attacked, self.sigma_m)
    }
}

/// Passes `attacked` through if it is within `sigma_m` of `watermarked`,
/// otherwise reports a [`Error::ConstraintViolation`].
pub fn constrain(watermarked: &Trajectory, attacked: Trajectory, sigma_m: f64) -> Result<Trajectory> {
    if sigma_m.is_nan() || sigma_m <= 0.0 {
        return Err(Error::domain(format!("sigma must be positive, got {sigma_m}")));
    }
    let distance = trajectory_distance(watermarked, &attacked);
    if distance <= sigma_m {
        Ok(attacked)
    } else {
        Err(Error::ConstraintViolation {
            distance,
            sigma: sigma_m,
        })
    }
}

pub const ATTACK_TABLE_VERSION: u32 = 1;

/// Versioned table of default attack parameters, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackTable {
    pub version: u32,
    pub sigma_m: f64,
    /// How many times a threshold-breaking sample is re-drawn with a weaker attack.
    pub max_fallbacks: u32,
    #[serde(rename = "attack")]
    pub attacks: Vec<Attack>,
}

const DEFAULT_TABLE: &str = include_str!("../../config/attacks.toml");

impl Default for AttackTable {
    fn default() -> Self {
        AttackTable::from_toml(DEFAULT_TABLE).expect("bundled attack table is valid")
    }
}

impl AttackTable {
    pub fn from_toml(s: &str) -> Result<Self> {
        let table: AttackTable = toml::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        if table.version != ATTACK_TABLE_VERSION {
            return Err(Error::Format(format!(
                "unsupported attack table version {}",
                table.version
            )));
        }
        for kind in AttackKind::ALL {
            let n = table.attacks.iter().filter(|a| a.kind() == kind).count();
            if n != 1 {
                return Err(Error::Format(format!(
                    "attack table must define {kind} exactly once, found {n}"
                )));
            }
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("attack table serializes")
    }

    pub fn get(&self, kind: AttackKind) -> &Attack {
        self.attacks
            .iter()
            .find(|a| a.kind() == kind)
            .expect("table validated to contain every kind")
    }

    /// Attacks in the canonical column order.
    pub fn ordered(&self) -> Vec<&Attack> {
        AttackKind::ALL.iter().map(|&k| self.get(k)).collect()
    }
}
