//! Closed-form sensing model of one 1T1R column.
//!
//! The sensed cell is always the worst-case cell: its drive-to-sense path
//! crosses the full `n * r` of line resistance while the other `n - 1` cells
//! of the column each leak a constant `I_Tleak` into the sense line.
//!
//! ```text
//! I_on  = V / (R_on   + R_T + n r) + (n - 1) I_Tleak
//! I_off = V / (k R_on + R_T + n r) + (n - 1) I_Tleak
//! k'    = I_on / I_off
//! ```

mod profile;

use serde::Serialize;

pub use profile::{LeakagePoint, TechnologyProfile};

use crate::error::{Error, Result};

/// Memristor state pair. `r_off` is always derived as `ratio_ideal * r_on`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellSpec {
    pub r_on: f64,
    pub ratio_ideal: f64,
}

impl CellSpec {
    pub fn new(r_on: f64, ratio_ideal: f64) -> Result<Self> {
        let cell = Self { r_on, ratio_ideal };
        cell.validate()?;
        Ok(cell)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_on.is_finite() && self.r_on > 0.0) {
            return Err(Error::InvalidInput(format!(
                "r_on must be finite and > 0, got {}",
                self.r_on
            )));
        }
        if !(self.ratio_ideal.is_finite() && self.ratio_ideal >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "on/off ratio k must be finite and >= 1, got {}",
                self.ratio_ideal
            )));
        }
        Ok(())
    }

    pub fn r_off(&self) -> f64 {
        self.ratio_ideal * self.r_on
    }
}

/// Which non-idealities enter the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Factors {
    pub line_resistance: bool,
    pub transistor_resistance: bool,
    pub leakage: bool,
}

impl Factors {
    pub const ALL: Factors = Factors {
        line_resistance: true,
        transistor_resistance: true,
        leakage: true,
    };

    pub const NONE: Factors = Factors {
        line_resistance: false,
        transistor_resistance: false,
        leakage: false,
    };

    /// Line and transistor resistance, no leakage.
    pub const IR_ONLY: Factors = Factors {
        line_resistance: true,
        transistor_resistance: true,
        leakage: false,
    };

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.transistor_resistance {
            parts.push("R_T");
        }
        if self.line_resistance {
            parts.push("r");
        }
        if self.leakage {
            parts.push("I_Tleak");
        }
        if parts.is_empty() {
            "ideal".to_string()
        } else {
            parts.join("+")
        }
    }
}

impl Default for Factors {
    fn default() -> Self {
        Factors::ALL
    }
}

/// Read condition for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReadSetup {
    pub v_read: f64,
    pub n_cells: usize,
    pub factors: Factors,
}

impl ReadSetup {
    pub fn new(v_read: f64, n_cells: usize) -> Result<Self> {
        Self::with_factors(v_read, n_cells, Factors::ALL)
    }

    pub fn with_factors(v_read: f64, n_cells: usize, factors: Factors) -> Result<Self> {
        let setup = Self {
            v_read,
            n_cells,
            factors,
        };
        setup.validate()?;
        Ok(setup)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_read.is_finite() && self.v_read > 0.0) {
            return Err(Error::InvalidInput(format!(
                "v_read must be finite and > 0, got {}",
                self.v_read
            )));
        }
        if self.n_cells == 0 {
            return Err(Error::InvalidInput("n_cells must be >= 1".into()));
        }
        Ok(())
    }
}

/// Currents seen by the sense circuit and the derived ratios.
///
/// `ratio_effective` equals `i_on / i_off` up to rounding; both ratios are
/// computed in a factored form that is exact when no non-ideality is active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SenseResult {
    pub i_on: f64,
    pub i_off: f64,
    pub ratio_effective: f64,
    pub margin_normalized: f64,
}

impl SenseResult {
    /// Builds a result from two measured currents.
    pub fn from_currents(i_on: f64, i_off: f64, ratio_ideal: f64) -> Self {
        let ratio_effective = i_on / i_off;
        Self {
            i_on,
            i_off,
            ratio_effective,
            margin_normalized: ratio_effective / ratio_ideal,
        }
    }
}

/// Lumped series quantities after the factor toggles are applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Lumped {
    /// `R_T + n r`.
    pub series: f64,
    pub i_leak_per_cell: f64,
    pub r_segment: f64,
    pub r_transistor: f64,
}

pub(crate) fn lumped_terms(profile: &TechnologyProfile, setup: &ReadSetup) -> Result<Lumped> {
    let f = setup.factors;
    let r_segment = if f.line_resistance { profile.r_unit() } else { 0.0 };
    let r_transistor = if f.transistor_resistance {
        profile.r_transistor()
    } else {
        0.0
    };
    let i_leak_per_cell = if f.leakage {
        profile.leakage_at(setup.v_read)?
    } else {
        0.0
    };
    Ok(Lumped {
        series: r_transistor + setup.n_cells as f64 * r_segment,
        i_leak_per_cell,
        r_segment,
        r_transistor,
    })
}

/// Ideal on/off ratio `R_off / R_on`, which is `k` by construction.
pub fn ideal_ratio(cell: &CellSpec) -> Result<f64> {
    cell.validate()?;
    Ok(cell.ratio_ideal)
}

/// Leakage of one off transistor at `v_read`.
pub fn leakage_at(profile: &TechnologyProfile, v_read: f64) -> Result<f64> {
    profile.leakage_at(v_read)
}

/// Evaluates the closed-form column model.
pub fn read_currents(
    profile: &TechnologyProfile,
    cell: &CellSpec,
    setup: &ReadSetup,
) -> Result<SenseResult> {
    cell.validate()?;
    setup.validate()?;
    let terms = lumped_terms(profile, setup)?;
    let v = setup.v_read;
    let k = cell.ratio_ideal;
    let r_on = cell.r_on;
    let r_off = cell.r_off();
    let d = terms.series;
    let leak_total = (setup.n_cells - 1) as f64 * terms.i_leak_per_cell;

    let i_on = v / (r_on + d) + leak_total;
    let i_off = v / (r_off + d) + leak_total;

    // k' / k = [(R_on + D/k) / (R_on + D)] * [(1 + L (R_on + D)/V) / (1 + L (k R_on + D)/V)]
    let series_factor = (r_on + d / k) / (r_on + d);
    let leak_factor = (1.0 + leak_total * (r_on + d) / v) / (1.0 + leak_total * (r_off + d) / v);
    let margin = series_factor * leak_factor;

    Ok(SenseResult {
        i_on,
        i_off,
        ratio_effective: k * margin,
        margin_normalized: margin,
    })
}

/// The effective on/off ratio `k'` seen by the sense circuit.
pub fn effective_ratio(
    profile: &TechnologyProfile,
    cell: &CellSpec,
    setup: &ReadSetup,
) -> Result<f64> {
    Ok(read_currents(profile, cell, setup)?.ratio_effective)
}

/// Normalized sensing margin `k' / k`.
pub fn normalized_margin(
    profile: &TechnologyProfile,
    cell: &CellSpec,
    setup: &ReadSetup,
) -> Result<f64> {
    Ok(read_currents(profile, cell, setup)?.margin_normalized)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p22() -> TechnologyProfile {
        TechnologyProfile::fdsoi_22nm()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    // Reference values below were evaluated independently in double
    // precision from the unfactored current expressions.

    #[test]
    fn ideal_ratio_examples() {
        assert_eq!(ideal_ratio(&CellSpec::new(20e3, 10.0).unwrap()).unwrap(), 10.0);
        assert_eq!(CellSpec::new(20e3, 10.0).unwrap().r_off(), 200e3);
        assert_eq!(ideal_ratio(&CellSpec::new(10e3, 1.0).unwrap()).unwrap(), 1.0);
        assert_eq!(ideal_ratio(&CellSpec::new(100e3, 100.0).unwrap()).unwrap(), 100.0);
    }

    #[test]
    fn anchor_512_cells() {
        let r = read_currents(
            &p22(),
            &CellSpec::new(20e3, 10.0).unwrap(),
            &ReadSetup::new(0.2, 512).unwrap(),
        )
        .unwrap();
        assert!(close(r.margin_normalized, 0.867371045604064, 1e-12));
        assert!(close(r.ratio_effective, 8.67371045604064, 1e-12));
        assert!(close(r.ratio_effective, r.i_on / r.i_off, 1e-14));
    }

    #[test]
    fn large_array_100k() {
        let k = effective_ratio(
            &p22(),
            &CellSpec::new(100e3, 10.0).unwrap(),
            &ReadSetup::new(0.2, 4096).unwrap(),
        )
        .unwrap();
        assert!(close(k, 5.396388002897831, 1e-12));
    }

    #[test]
    fn single_cell_is_series_ratio() {
        let k = effective_ratio(
            &p22(),
            &CellSpec::new(20e3, 10.0).unwrap(),
            &ReadSetup::new(0.2, 1).unwrap(),
        )
        .unwrap();
        let expected = (200e3 + 1.7e3 + 2.5) / (20e3 + 1.7e3 + 2.5);
        assert!(close(k, expected, 1e-14));
        assert!(close(k, 9.29, 1e-3));
    }

    #[test]
    fn leakage_dominated_limit() {
        let k = effective_ratio(
            &p22(),
            &CellSpec::new(100e6, 10.0).unwrap(),
            &ReadSetup::new(0.2, 4096).unwrap(),
        )
        .unwrap();
        assert!(k > 1.0);
        assert!(close(k, 1.0109741685529683, 1e-12));
    }

    #[test]
    fn fifty_k_at_1024() {
        let k = effective_ratio(
            &p22(),
            &CellSpec::new(50e3, 10.0).unwrap(),
            &ReadSetup::new(0.2, 1024).unwrap(),
        )
        .unwrap();
        assert!(close(k, 8.517780704222169, 1e-12));
    }

    #[test]
    fn toggles_off_reduce_to_ideal() {
        for n in [1, 7, 4096] {
            let setup = ReadSetup::with_factors(0.2, n, Factors::NONE).unwrap();
            let r = read_currents(&p22(), &CellSpec::new(37e3, 13.0).unwrap(), &setup).unwrap();
            assert_eq!(r.ratio_effective, 13.0);
            assert_eq!(r.margin_normalized, 1.0);
        }
    }

    #[test]
    fn degenerate_cell_ratio_is_one() {
        let r = read_currents(
            &p22(),
            &CellSpec::new(1e6, 1.0).unwrap(),
            &ReadSetup::new(0.4, 2048).unwrap(),
        )
        .unwrap();
        assert_eq!(r.ratio_effective, 1.0);
    }

    #[test]
    fn leakage_out_of_range_only_when_enabled() {
        let cell = CellSpec::new(20e3, 10.0).unwrap();
        let setup = ReadSetup::new(1.0, 16).unwrap();
        assert!(matches!(
            read_currents(&p22(), &cell, &setup),
            Err(Error::LeakageRange { .. })
        ));
        let setup = ReadSetup::with_factors(1.0, 16, Factors::IR_ONLY).unwrap();
        assert!(read_currents(&p22(), &cell, &setup).is_ok());
    }

    #[test]
    fn invalid_inputs() {
        assert!(CellSpec::new(0.0, 10.0).is_err());
        assert!(CellSpec::new(1e3, 0.5).is_err());
        assert!(ReadSetup::new(0.0, 4).is_err());
        assert!(ReadSetup::new(0.2, 0).is_err());
        let bad = CellSpec {
            r_on: -1.0,
            ratio_ideal: 10.0,
        };
        assert!(read_currents(&p22(), &bad, &ReadSetup::new(0.2, 4).unwrap()).is_err());
    }

    #[test]
    fn factor_labels() {
        assert_eq!(Factors::ALL.label(), "R_T+r+I_Tleak");
        assert_eq!(Factors::NONE.label(), "ideal");
        assert_eq!(Factors::IR_ONLY.label(), "R_T+r");
    }
}
