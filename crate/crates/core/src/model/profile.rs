//! Per-node electrical constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, ProfileError, Result};

/// One measured leakage point: off-transistor current at a given read voltage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakagePoint {
    #[serde(rename = "v_read_v")]
    pub v_read: f64,
    #[serde(rename = "i_leak_a")]
    pub i_leak: f64,
}

impl LeakagePoint {
    pub const fn new(v_read: f64, i_leak: f64) -> Self {
        Self { v_read, i_leak }
    }
}

/// Electrical constants of one fabrication node.
///
/// `r_unit` is the metal-line resistance between two adjacent cells (applies
/// to both BL and SL), `r_transistor` the on-state read resistance of the
/// access transistor, and the leakage table gives the off-state transistor
/// current as a function of read voltage.
#[derive(Debug, Clone, PartialEq)]
pub struct TechnologyProfile {
    node_label: String,
    r_unit: f64,
    r_transistor: f64,
    leakage_table: Vec<LeakagePoint>,
}

impl TechnologyProfile {
    /// Builds a profile, sorting the leakage table by voltage and checking
    /// every invariant.
    pub fn new(
        node_label: impl Into<String>,
        r_unit: f64,
        r_transistor: f64,
        mut leakage_table: Vec<LeakagePoint>,
    ) -> Result<Self, ProfileError> {
        if !(r_unit.is_finite() && r_unit >= 0.0) {
            return Err(ProfileError::Schema(format!(
                "r_unit_ohm must be finite and >= 0, got {r_unit}"
            )));
        }
        if !(r_transistor.is_finite() && r_transistor >= 0.0) {
            return Err(ProfileError::Schema(format!(
                "r_transistor_ohm must be finite and >= 0, got {r_transistor}"
            )));
        }
        if leakage_table.is_empty() {
            return Err(ProfileError::Schema("leakage table is empty".into()));
        }
        for p in &leakage_table {
            if !(p.v_read.is_finite() && p.v_read > 0.0) {
                return Err(ProfileError::Schema(format!(
                    "leakage v_read_v must be finite and > 0, got {}",
                    p.v_read
                )));
            }
            if !(p.i_leak.is_finite() && p.i_leak >= 0.0) {
                return Err(ProfileError::Schema(format!(
                    "leakage i_leak_a must be finite and >= 0, got {}",
                    p.i_leak
                )));
            }
        }
        leakage_table.sort_by(|a, b| a.v_read.total_cmp(&b.v_read));
        for w in leakage_table.windows(2) {
            if w[1].v_read <= w[0].v_read {
                return Err(ProfileError::Schema(format!(
                    "duplicate leakage voltage {} V",
                    w[0].v_read
                )));
            }
            if w[1].i_leak < w[0].i_leak {
                return Err(ProfileError::NonMonotone(format!(
                    "i_leak drops from {:e} A at {} V to {:e} A at {} V",
                    w[0].i_leak, w[0].v_read, w[1].i_leak, w[1].v_read
                )));
            }
        }
        Ok(Self {
            node_label: node_label.into(),
            r_unit,
            r_transistor,
            leakage_table,
        })
    }

    /// The bundled 22nm FDSOI node: r = 2.5 ohm, R_T = 1.7 kohm and leakage
    /// 40/55/74 pA at 0.2/0.4/0.6 V.
    pub fn fdsoi_22nm() -> Self {
        Self::new(
            "22nm-FDSOI",
            2.5,
            1.7e3,
            vec![
                LeakagePoint::new(0.2, 40e-12),
                LeakagePoint::new(0.4, 55e-12),
                LeakagePoint::new(0.6, 74e-12),
            ],
        )
        .expect("bundled profile is valid")
    }

    pub fn node_label(&self) -> &str {
        &self.node_label
    }

    pub fn r_unit(&self) -> f64 {
        self.r_unit
    }

    pub fn r_transistor(&self) -> f64 {
        self.r_transistor
    }

    pub fn leakage_table(&self) -> &[LeakagePoint] {
        &self.leakage_table
    }

    /// Supported read-voltage interval of the leakage table.
    pub fn voltage_range(&self) -> (f64, f64) {
        let first = self.leakage_table[0].v_read;
        let last = self.leakage_table[self.leakage_table.len() - 1].v_read;
        (first, last)
    }

    pub fn with_r_unit(&self, r_unit: f64) -> Result<Self, ProfileError> {
        Self::new(
            self.node_label.clone(),
            r_unit,
            self.r_transistor,
            self.leakage_table.clone(),
        )
    }

    pub fn with_r_transistor(&self, r_transistor: f64) -> Result<Self, ProfileError> {
        Self::new(
            self.node_label.clone(),
            self.r_unit,
            r_transistor,
            self.leakage_table.clone(),
        )
    }

    /// Same profile with every leakage current multiplied by `factor`.
    pub fn with_leakage_scaled(&self, factor: f64) -> Result<Self, ProfileError> {
        let table = self
            .leakage_table
            .iter()
            .map(|p| LeakagePoint::new(p.v_read, p.i_leak * factor))
            .collect();
        Self::new(self.node_label.clone(), self.r_unit, self.r_transistor, table)
    }

    /// Off-transistor leakage at `v_read`.
    ///
    /// Exact on table points, linear between adjacent points, and an error
    /// outside the table (no extrapolation).
    pub fn leakage_at(&self, v_read: f64) -> Result<f64> {
        let (v_min, v_max) = self.voltage_range();
        if !(v_read >= v_min && v_read <= v_max) {
            return Err(Error::LeakageRange {
                v_read,
                v_min,
                v_max,
            });
        }
        let table = &self.leakage_table;
        // First point with v >= v_read; exists because v_read <= v_max.
        let hi = table.partition_point(|p| p.v_read < v_read);
        let upper = table[hi];
        if upper.v_read == v_read || hi == 0 {
            return Ok(upper.i_leak);
        }
        let lower = table[hi - 1];
        let t = (v_read - lower.v_read) / (upper.v_read - lower.v_read);
        Ok(lower.i_leak + t * (upper.i_leak - lower.i_leak))
    }
}
