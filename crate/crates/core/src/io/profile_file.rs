//! JSON technology-profile documents.
//!
//! ```json
//! { "node": "22nm-FDSOI", "r_unit_ohm": 2.5, "r_transistor_ohm": 1700.0,
//!   "leakage": [ { "v_read_v": 0.2, "i_leak_a": 4.0e-11 } ] }
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ProfileError;
use crate::model::{LeakagePoint, TechnologyProfile};

/// Source of the bundled 22nm profile.
pub const BUNDLED_22NM: &str = include_str!("../../profiles/22nm.json");

const TOP_KEYS: [&str; 4] = ["node", "r_unit_ohm", "r_transistor_ohm", "leakage"];
const POINT_KEYS: [&str; 2] = ["v_read_v", "i_leak_a"];

#[derive(Debug, Serialize, Deserialize)]
struct ProfileDoc {
    node: String,
    r_unit_ohm: f64,
    r_transistor_ohm: f64,
    leakage: Vec<LeakagePoint>,
}

fn unknown_keys(doc: &Value) -> Result<Vec<String>, ProfileError> {
    let obj = doc
        .as_object()
        .ok_or_else(|| ProfileError::Schema("top level must be a JSON object".into()))?;
    let mut unknown: Vec<String> = obj
        .keys()
        .filter(|k| !TOP_KEYS.contains(&k.as_str()))
        .cloned()
        .collect();
    if let Some(Value::Array(points)) = obj.get("leakage") {
        for (i, p) in points.iter().enumerate() {
            if let Some(p) = p.as_object() {
                unknown.extend(
                    p.keys()
                        .filter(|k| !POINT_KEYS.contains(&k.as_str()))
                        .map(|k| format!("leakage[{i}].{k}")),
                );
            }
        }
    }
    Ok(unknown)
}

/// Parses and validates a profile document.
pub fn parse_profile(text: &str) -> Result<TechnologyProfile, ProfileError> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| ProfileError::Malformed(e.to_string()))?;
    let unknown = unknown_keys(&doc)?;
    if !unknown.is_empty() {
        return Err(ProfileError::UnknownKeys(unknown));
    }
    let doc: ProfileDoc =
        serde_json::from_value(doc).map_err(|e| ProfileError::Schema(e.to_string()))?;
    TechnologyProfile::new(doc.node, doc.r_unit_ohm, doc.r_transistor_ohm, doc.leakage)
}

pub fn load_profile(path: impl AsRef<Path>) -> Result<TechnologyProfile, ProfileError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ProfileError::Missing {
        path: path.to_path_buf(),
        source,
    })?;
    parse_profile(&text)
}

pub fn bundled_profile() -> TechnologyProfile {
    parse_profile(BUNDLED_22NM).expect("bundled profile is valid")
}

/// Pretty-printed JSON document for `profile`.
pub fn profile_to_json(profile: &TechnologyProfile) -> String {
    let doc = ProfileDoc {
        node: profile.node_label().to_string(),
        r_unit_ohm: profile.r_unit(),
        r_transistor_ohm: profile.r_transistor(),
        leakage: profile.leakage_table().to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("profile serializes");
    s.push('\n');
    s
}
