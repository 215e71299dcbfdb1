// SPDX-License-Identifier: Apache-2.0

//! Asset configurations and the no-flow IFT properties derived from them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rtl::ir::SignalId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Confidentiality,
    Integrity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssetSpec {
    pub asset: SignalId,
    pub objective: Objective,
    /// Signals inside the security boundary; always contains `asset`.
    pub boundary: BTreeSet<SignalId>,
}

/// "No information flows from any source to any sink."
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IftProperty {
    pub objective: Objective,
    pub sources: BTreeSet<SignalId>,
    pub sinks: BTreeSet<SignalId>,
}

impl IftProperty {
    pub fn render(&self, name: &dyn Fn(SignalId) -> String) -> String {
        let set = |s: &BTreeSet<SignalId>| {
            let v: Vec<String> = s.iter().map(|x| name(*x)).collect();
            if v.len() == 1 {
                v[0].clone()
            } else {
                format!("{{{}}}", v.join(", "))
            }
        };
        format!("{} =/=> {}", set(&self.sources), set(&self.sinks))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropertyError {
    #[error("the security boundary covers every signal; no sink remains")]
    EmptySinkSet,
    #[error("the security boundary covers every signal; no source remains")]
    EmptySourceSet,
    #[error("asset is not a design signal")]
    UnknownAsset,
}

/// Builds the property for one asset: confidentiality forbids flows from the
/// asset to signals outside the boundary, integrity forbids the reverse.
pub fn generate_ift_properties(
    spec: &AssetSpec,
    design_signals: &BTreeSet<SignalId>,
) -> Result<Vec<IftProperty>, PropertyError> {
    if !design_signals.contains(&spec.asset) {
        return Err(PropertyError::UnknownAsset);
    }
    let outside: BTreeSet<SignalId> = design_signals
        .iter()
        .filter(|s| !spec.boundary.contains(s) && **s != spec.asset)
        .copied()
        .collect();
    let asset = BTreeSet::from([spec.asset]);
    let prop = match spec.objective {
        Objective::Confidentiality => {
            if outside.is_empty() {
                return Err(PropertyError::EmptySinkSet);
            }
            IftProperty {
                objective: spec.objective,
                sources: asset,
                sinks: outside,
            }
        }
        Objective::Integrity => {
            if outside.is_empty() {
                return Err(PropertyError::EmptySourceSet);
            }
            IftProperty {
                objective: spec.objective,
                sources: outside,
                sinks: asset,
            }
        }
    };
    Ok(vec![prop])
}

/// One `[[asset]]` table of the configuration file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetEntry {
    pub signal: String,
    pub objective: Objective,
    #[serde(default)]
    pub boundary: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetConfig {
    #[serde(rename = "asset", default)]
    pub assets: Vec<AssetEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: asset {index}: unknown signal `{name}`")]
    UnknownSignal {
        path: String,
        index: usize,
        name: String,
    },
    #[error("{path}: asset {index}: boundary entry `{entry}` matches no signal")]
    EmptyBoundaryEntry {
        path: String,
        index: usize,
        entry: String,
    },
    #[error("{path}: no assets declared")]
    NoAssets { path: String },
}

impl AssetConfig {
    /// Parses the TOML document. Errors carry the line and column reported by
    /// the TOML parser.
    pub fn parse(path: &str, text: &str) -> Result<AssetConfig, ConfigError> {
        let cfg: AssetConfig = toml::from_str(text).map_err(|e| {
            let message = match e.span() {
                Some(span) => {
                    let line = text[..span.start].matches('\n').count() + 1;
                    format!("line {line}: {}", e.message())
                }
                None => e.message().to_string(),
            };
            ConfigError::Parse {
                path: path.to_string(),
                message,
            }
        })?;
        if cfg.assets.is_empty() {
            return Err(ConfigError::NoAssets {
                path: path.to_string(),
            });
        }
        Ok(cfg)
    }

    /// Resolves names against the design's signal names. Bare names are
    /// looked up under `top/`; `module:<prefix>` boundary entries expand to
    /// every signal below that hierarchy prefix.
    pub fn resolve(
        &self,
        path: &str,
        top: &str,
        names: &[String],
    ) -> Result<Vec<AssetSpec>, ConfigError> {
        let full = |n: &str| {
            if n == top || n.starts_with(&format!("{top}/")) {
                n.to_string()
            } else {
                format!("{top}/{n}")
            }
        };
        let find = |n: &str| {
            let f = full(n);
            names
                .iter()
                .position(|x| *x == f)
                .map(|i| SignalId(i as u32))
        };
        let mut out = Vec::new();
        for (index, a) in self.assets.iter().enumerate() {
            let asset = find(&a.signal).ok_or_else(|| ConfigError::UnknownSignal {
                path: path.to_string(),
                index,
                name: a.signal.clone(),
            })?;
            let mut boundary = BTreeSet::from([asset]);
            for entry in &a.boundary {
                if let Some(prefix) = entry.strip_prefix("module:") {
                    let p = format!("{}/", full(prefix.trim()));
                    let matched: Vec<SignalId> = names
                        .iter()
                        .enumerate()
                        .filter(|(_, n)| n.starts_with(&p))
                        .map(|(i, _)| SignalId(i as u32))
                        .collect();
                    if matched.is_empty() {
                        return Err(ConfigError::EmptyBoundaryEntry {
                            path: path.to_string(),
                            index,
                            entry: entry.clone(),
                        });
                    }
                    boundary.extend(matched);
                } else {
                    let s = find(entry).ok_or_else(|| ConfigError::UnknownSignal {
                        path: path.to_string(),
                        index,
                        name: entry.clone(),
                    })?;
                    boundary.insert(s);
                }
            }
            out.push(AssetSpec {
                asset,
                objective: a.objective,
                boundary,
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u32]) -> BTreeSet<SignalId> {
        v.iter().map(|i| SignalId(*i)).collect()
    }

    // key = 0, mixer = 1, out = 2
    #[test]
    fn confidentiality_and_integrity() {
        let all = ids(&[0, 1, 2]);
        let spec = AssetSpec {
            asset: SignalId(0),
            objective: Objective::Confidentiality,
            boundary: ids(&[0, 1]),
        };
        let p = generate_ift_properties(&spec, &all).unwrap();
        assert_eq!(p[0].sources, ids(&[0]));
        assert_eq!(p[0].sinks, ids(&[2]));
        let names = ["key", "mixer", "out"];
        assert_eq!(p[0].render(&|s| names[s.index()].into()), "key =/=> out");
        let spec = AssetSpec {
            objective: Objective::Integrity,
            ..spec
        };
        let q = generate_ift_properties(&spec, &all).unwrap();
        assert_eq!(q[0].sources, ids(&[2]));
        assert_eq!(q[0].sinks, ids(&[0]));
    }

    #[test]
    fn whole_design_boundary() {
        let all = ids(&[0, 1, 2]);
        let mut spec = AssetSpec {
            asset: SignalId(0),
            objective: Objective::Confidentiality,
            boundary: all.clone(),
        };
        assert_eq!(generate_ift_properties(&spec, &all), Err(PropertyError::EmptySinkSet));
        spec.objective = Objective::Integrity;
        assert_eq!(generate_ift_properties(&spec, &all), Err(PropertyError::EmptySourceSet));
    }

    #[test]
    fn config_parse_and_resolve() {
        let text = r#"
[[asset]]
signal = "key"
objective = "confidentiality"
boundary = ["mixer", "module:u1"]

[[asset]]
signal = "top/out"
objective = "integrity"
"#;
        let cfg = AssetConfig::parse("a.toml", text).unwrap();
        let names: Vec<String> = ["top/key", "top/mixer", "top/out", "top/u1/x", "top/u1/y"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let specs = cfg.resolve("a.toml", "top", &names).unwrap();
        assert_eq!(specs[0].boundary, ids(&[0, 1, 3, 4]));
        assert_eq!(specs[1].asset, SignalId(2));
        assert_eq!(specs[1].boundary, ids(&[2]));
    }

    #[test]
    fn config_errors_cite_lines() {
        let text = "[[asset]]\nsignal = \"key\"\nobjective = \"secrecy\"\n";
        let err = AssetConfig::parse("a.toml", text).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = AssetConfig::parse("a.toml", "[[asset]]\nsignal = \n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let cfg = AssetConfig::parse("a.toml", "[[asset]]\nsignal = \"nope\"\nobjective = \"integrity\"\n").unwrap();
        assert!(matches!(
            cfg.resolve("a.toml", "top", &["top/a".into()]),
            Err(ConfigError::UnknownSignal { .. })
        ));
    }
}
