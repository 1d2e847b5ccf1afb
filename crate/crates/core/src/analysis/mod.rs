//! Design-space studies built on the column model and the network oracle.
//!
//! Every point is a direct call into [`crate::model`] or [`crate::oracle`];
//! this layer only arranges grids and collects results. Grid points are
//! evaluated in parallel and reassembled by grid index.

mod range;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{self, CellSpec, Factors, ReadSetup, SenseResult, TechnologyProfile};
use crate::oracle;

pub use range::{find_optimal_range, OptimalRange, RangeSearch};

/// Which evaluator produces a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Engine {
    #[default]
    Lumped,
    Oracle,
}

impl Engine {
    pub fn evaluate(
        self,
        profile: &TechnologyProfile,
        cell: &CellSpec,
        setup: &ReadSetup,
    ) -> Result<SenseResult> {
        match self {
            Engine::Lumped => model::read_currents(profile, cell, setup),
            Engine::Oracle => oracle::oracle_margin(profile, cell, setup),
        }
    }
}

/// Independent variable of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum SweepAxis {
    /// Margin against memristor on-resistance; one curve per array size.
    #[default]
    ROn,
    /// Margin against cells per column; one curve per on-resistance.
    Cells,
}

pub const DEFAULT_R_ON_MIN: f64 = 10e3;
pub const DEFAULT_R_ON_MAX: f64 = 100e6;
pub const DEFAULT_R_ON_POINTS: usize = 200;

/// `points` values log-spaced from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            let step = (b - a) / (points - 1) as f64;
            (0..points)
                .map(|i| match i {
                    0 => lo,
                    i if i == points - 1 => hi,
                    i => 10f64.powf(a + step * i as f64),
                })
                .collect()
        }
    }
}

/// 10 kohm to 100 Mohm, 200 log-spaced points.
pub fn default_r_on_grid() -> Vec<f64> {
    log_grid(DEFAULT_R_ON_MIN, DEFAULT_R_ON_MAX, DEFAULT_R_ON_POINTS)
}

/// 64, 128, ..., 4096.
pub fn default_n_grid() -> Vec<usize> {
    (6..=12).map(|e| 1usize << e).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub r_on_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub v_read_grid: Vec<f64>,
    pub ratio_ideal: f64,
    pub toggles: Vec<Factors>,
    pub engine: Engine,
    pub axis: SweepAxis,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            r_on_grid: default_r_on_grid(),
            n_grid: default_n_grid(),
            v_read_grid: vec![0.2],
            ratio_ideal: 10.0,
            toggles: vec![Factors::ALL],
            engine: Engine::Lumped,
            axis: SweepAxis::ROn,
        }
    }
}

fn check_ascending<T: PartialOrd + Copy + std::fmt::Debug>(name: &str, grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput(format!("{name} is empty")));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput(format!(
            "{name} must be strictly ascending ({:?} then {:?})",
            w[0], w[1]
        )));
    }
    Ok(())
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        check_ascending("r_on_grid", &self.r_on_grid)?;
        check_ascending("n_grid", &self.n_grid)?;
        check_ascending("v_read_grid", &self.v_read_grid)?;
        if self.toggles.is_empty() {
            return Err(Error::InvalidInput("no factor combination given".into()));
        }
        if !(self.ratio_ideal.is_finite() && self.ratio_ideal >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "on/off ratio k must be >= 1, got {}",
                self.ratio_ideal
            )));
        }
        Ok(())
    }
}

/// The fixed coordinates of one curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceKey {
    pub axis: SweepAxis,
    /// Array size, when the curve runs over R_on.
    pub n_cells: Option<usize>,
    /// On-resistance, when the curve runs over array size.
    pub r_on: Option<f64>,
    pub v_read: f64,
    pub ratio_ideal: f64,
    pub factors: Factors,
    pub engine: Engine,
}

/// Normalized margin along one axis, with the full result at every point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginCurve {
    pub label: String,
    pub key: SliceKey,
    pub x: Vec<f64>,
    pub results: Vec<SenseResult>,
    /// Grid points that could not be evaluated.
    pub failures: Vec<(f64, String)>,
}

impl MarginCurve {
    pub fn margins(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.margin_normalized).collect()
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.x
            .iter()
            .zip(&self.results)
            .map(|(&x, r)| (x, r.margin_normalized))
            .collect()
    }

    fn from_evaluations(label: String, key: SliceKey, evals: Vec<(f64, Result<SenseResult>)>) -> Self {
        let mut x = Vec::new();
        let mut results = Vec::new();
        let mut failures = Vec::new();
        for (xi, r) in evals {
            match r {
                Ok(r) => {
                    x.push(xi);
                    results.push(r);
                }
                Err(e) => failures.push((xi, e.to_string())),
            }
        }
        Self {
            label,
            key,
            x,
            results,
            failures,
        }
    }
}

fn format_ohms(r: f64) -> String {
    let (v, unit) = if r >= 1e9 {
        (r / 1e9, "G")
    } else if r >= 1e6 {
        (r / 1e6, "M")
    } else if r >= 1e3 {
        (r / 1e3, "k")
    } else {
        (r, "")
    };
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    format!("{s}{unit}ohm")
}

/// Evaluates every grid point of `spec`, one curve per slice.
///
/// Slices are ordered by read voltage, then factor combination, then the
/// fixed coordinate (array size or on-resistance). Individual point failures
/// are recorded on their curve; the sweep fails only if no point succeeds.
pub fn sweep_grid(spec: &SweepSpec, profile: &TechnologyProfile) -> Result<Vec<MarginCurve>> {
    spec.validate()?;
    let k = spec.ratio_ideal;

    let mut keys = Vec::new();
    for &v_read in &spec.v_read_grid {
        for &factors in &spec.toggles {
            let base = SliceKey {
                axis: spec.axis,
                n_cells: None,
                r_on: None,
                v_read,
                ratio_ideal: k,
                factors,
                engine: spec.engine,
            };
            match spec.axis {
                SweepAxis::ROn => keys.extend(spec.n_grid.iter().map(|&n| SliceKey {
                    n_cells: Some(n),
                    ..base
                })),
                SweepAxis::Cells => keys.extend(spec.r_on_grid.iter().map(|&r| SliceKey {
                    r_on: Some(r),
                    ..base
                })),
            }
        }
    }

    let xs: Vec<f64> = match spec.axis {
        SweepAxis::ROn => spec.r_on_grid.clone(),
        SweepAxis::Cells => spec.n_grid.iter().map(|&n| n as f64).collect(),
    };
    let points: Vec<(usize, usize)> = (0..keys.len())
        .flat_map(|s| (0..xs.len()).map(move |i| (s, i)))
        .collect();
    let evals: Vec<Result<SenseResult>> = points
        .par_iter()
        .map(|&(s, i)| {
            let key = &keys[s];
            let (r_on, n) = match spec.axis {
                SweepAxis::ROn => (spec.r_on_grid[i], key.n_cells.unwrap_or(1)),
                SweepAxis::Cells => (key.r_on.unwrap_or(1.0), spec.n_grid[i]),
            };
            let cell = CellSpec::new(r_on, k)?;
            let setup = ReadSetup::with_factors(key.v_read, n, key.factors)?;
            key.engine.evaluate(profile, &cell, &setup)
        })
        .collect();

    if evals.iter().all(|e| e.is_err()) {
        let first = evals
            .into_iter()
            .find_map(|e| e.err())
            .map(|e| e.to_string())
            .unwrap_or_default();
        return Err(Error::SweepFailed(first));
    }

    let mut evals = evals.into_iter();
    let multi_v = spec.v_read_grid.len() > 1;
    let multi_f = spec.toggles.len() > 1;
    let curves = keys
        .iter()
        .map(|key| {
            let mut label = match spec.axis {
                SweepAxis::ROn => format!("N={}", key.n_cells.unwrap_or(0)),
                SweepAxis::Cells => format!("R_on={}", format_ohms(key.r_on.unwrap_or(0.0))),
            };
            if multi_v {
                label.push_str(&format!(" V={}V", key.v_read));
            }
            if multi_f {
                label.push_str(&format!(" [{}]", key.factors.label()));
            }
            let row: Vec<_> = xs.iter().map(|&x| (x, evals.next().expect("one result per point"))).collect();
            MarginCurve::from_evaluations(label, *key, row)
        })
        .collect();
    Ok(curves)
}

/// Which non-ideality an ablation curve omits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Removed {
    Nothing,
    TransistorResistance,
    LineResistance,
    Leakage,
}

impl Removed {
    pub const ALL: [Removed; 4] = [
        Removed::Nothing,
        Removed::TransistorResistance,
        Removed::LineResistance,
        Removed::Leakage,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Removed::Nothing => "baseline",
            Removed::TransistorResistance => "\u{2212}R_T",
            Removed::LineResistance => "\u{2212}r",
            Removed::Leakage => "\u{2212}I_Tleak",
        }
    }

    pub fn apply(self, f: Factors) -> Factors {
        match self {
            Removed::Nothing => f,
            Removed::TransistorResistance => Factors {
                transistor_resistance: false,
                ..f
            },
            Removed::LineResistance => Factors {
                line_resistance: false,
                ..f
            },
            Removed::Leakage => Factors { leakage: false, ..f },
        }
    }
}

/// Baseline curve over `r_on_grid` plus one curve per removed factor.
///
/// The baseline uses `setup.factors`; `cell.r_on` is ignored in favour of
/// the grid.
pub fn ablation_series(
    profile: &TechnologyProfile,
    cell: &CellSpec,
    setup: &ReadSetup,
    r_on_grid: &[f64],
) -> Result<Vec<(Removed, MarginCurve)>> {
    cell.validate()?;
    setup.validate()?;
    check_ascending("r_on_grid", r_on_grid)?;
    Removed::ALL
        .iter()
        .map(|&removed| {
            let factors = removed.apply(setup.factors);
            let spec = SweepSpec {
                r_on_grid: r_on_grid.to_vec(),
                n_grid: vec![setup.n_cells],
                v_read_grid: vec![setup.v_read],
                ratio_ideal: cell.ratio_ideal,
                toggles: vec![factors],
                engine: Engine::Lumped,
                axis: SweepAxis::ROn,
            };
            let mut curve = sweep_grid(&spec, profile)?.remove(0);
            curve.label = removed.label().to_string();
            Ok((removed, curve))
        })
        .collect()
}

/// Grid point with the highest normalized margin; ties go to the lower
/// resistance.
pub fn argmax_resistance(
    profile: &TechnologyProfile,
    ratio_ideal: f64,
    setup: &ReadSetup,
    r_on_grid: &[f64],
) -> Result<f64> {
    if r_on_grid.is_empty() {
        return Err(Error::InvalidInput("r_on_grid is empty".into()));
    }
    let mut best: Option<(f64, f64)> = None;
    for &r in r_on_grid {
        let m = model::normalized_margin(profile, &CellSpec::new(r, ratio_ideal)?, setup)?;
        best = match best {
            Some((br, bm)) if bm > m || (bm == m && br <= r) => Some((br, bm)),
            _ => Some((r, m)),
        };
    }
    Ok(best.map(|(r, _)| r).expect("grid is non-empty"))
}

/// Margin gained by reading at `v_alt` instead of `v_base`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompensationCurve {
    pub v_base: f64,
    pub v_alt: f64,
    pub r_on: Vec<f64>,
    pub base: Vec<SenseResult>,
    pub alt: Vec<SenseResult>,
    /// `margin(v_alt) - margin(v_base)` per grid point.
    pub improvement: Vec<f64>,
}

impl CompensationCurve {
    /// Largest improvement and the on-resistance where it occurs.
    pub fn max_improvement(&self) -> (f64, f64) {
        self.r_on
            .iter()
            .zip(&self.improvement)
            .fold((f64::NAN, f64::NEG_INFINITY), |acc, (&r, &d)| {
                if d > acc.1 {
                    (r, d)
                } else {
                    acc
                }
            })
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.r_on.iter().copied().zip(self.improvement.iter().copied()).collect()
    }
}

/// Per-resistance margin improvement from raising the read voltage, with the
/// leakage looked up again at each voltage.
pub fn compensation_curve(
    profile: &TechnologyProfile,
    ratio_ideal: f64,
    n_cells: usize,
    factors: Factors,
    v_base: f64,
    v_alt: f64,
    r_on_grid: &[f64],
) -> Result<CompensationCurve> {
    check_ascending("r_on_grid", r_on_grid)?;
    let base_setup = ReadSetup::with_factors(v_base, n_cells, factors)?;
    let alt_setup = ReadSetup::with_factors(v_alt, n_cells, factors)?;
    let pairs: Vec<(SenseResult, SenseResult)> = r_on_grid
        .par_iter()
        .map(|&r| {
            let cell = CellSpec::new(r, ratio_ideal)?;
            Ok((
                model::read_currents(profile, &cell, &base_setup)?,
                model::read_currents(profile, &cell, &alt_setup)?,
            ))
        })
        .collect::<Result<_>>()?;
    let improvement = pairs
        .iter()
        .map(|(b, a)| a.margin_normalized - b.margin_normalized)
        .collect();
    let (base, alt) = pairs.into_iter().unzip();
    Ok(CompensationCurve {
        v_base,
        v_alt,
        r_on: r_on_grid.to_vec(),
        base,
        alt,
        improvement,
    })
}

/// Read-power ratio `(v_alt / v_base)^2` for an ohmic cell.
pub fn read_power_ratio(v_alt: f64, v_base: f64) -> Result<f64> {
    if !(v_alt > 0.0 && v_base > 0.0) {
        return Err(Error::InvalidInput(format!(
            "read voltages must be > 0, got {v_alt} and {v_base}"
        )));
    }
    let r = v_alt / v_base;
    Ok(r * r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p22() -> TechnologyProfile {
        TechnologyProfile::fdsoi_22nm()
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(10e3, 100e6, 200);
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 10e3);
        assert_eq!(g[199], 100e6);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(log_grid(1.0, 100.0, 3), vec![1.0, 10.0, 100.0]);
    }

    #[test]
    fn default_sizes() {
        assert_eq!(default_n_grid(), vec![64, 128, 256, 512, 1024, 2048, 4096]);
    }

    fn two_r_spec(factors: Factors, r_on_grid: Vec<f64>) -> SweepSpec {
        SweepSpec {
            r_on_grid,
            toggles: vec![factors],
            axis: SweepAxis::Cells,
            ..SweepSpec::default()
        }
    }

    #[test]
    fn ir_only_prefers_high_resistance() {
        let curves = sweep_grid(&two_r_spec(Factors::IR_ONLY, vec![10e3, 100e3]), &p22()).unwrap();
        let (lo, hi) = (curves[0].margins(), curves[1].margins());
        assert!(lo.iter().zip(&hi).all(|(a, b)| b > a));
    }

    #[test]
    fn leakage_only_prefers_low_resistance() {
        let f = Factors {
            leakage: true,
            line_resistance: false,
            transistor_resistance: false,
        };
        let curves = sweep_grid(&two_r_spec(f, vec![10e3, 100e3]), &p22()).unwrap();
        let (lo, hi) = (curves[0].margins(), curves[1].margins());
        assert!(lo.iter().zip(&hi).all(|(a, b)| a > b));
    }

    #[test]
    fn joint_prefers_intermediate() {
        let spec = SweepSpec {
            n_grid: vec![4096],
            ..two_r_spec(Factors::ALL, vec![10e3, 50e3, 100e3])
        };
        let curves = sweep_grid(&spec, &p22()).unwrap();
        let m: Vec<f64> = curves.iter().map(|c| c.margins()[0]).collect();
        assert!(m[1] > m[0] && m[1] > m[2], "{m:?}");
    }

    #[test]
    fn sweep_matches_direct_calls() {
        let spec = SweepSpec {
            r_on_grid: log_grid(10e3, 1e6, 7),
            n_grid: vec![64, 1024],
            v_read_grid: vec![0.2, 0.5],
            toggles: vec![Factors::ALL, Factors::IR_ONLY],
            ..SweepSpec::default()
        };
        let curves = sweep_grid(&spec, &p22()).unwrap();
        assert_eq!(curves.len(), 8);
        for c in &curves {
            let setup = ReadSetup::with_factors(c.key.v_read, c.key.n_cells.unwrap(), c.key.factors).unwrap();
            for (x, r) in c.x.iter().zip(&c.results) {
                let direct = model::read_currents(&p22(), &CellSpec::new(*x, 10.0).unwrap(), &setup).unwrap();
                assert_eq!(*r, direct);
            }
        }
        assert_eq!(curves[0].label, "N=64 V=0.2V [R_T+r+I_Tleak]");
    }

    #[test]
    fn sweep_partial_and_total_failure() {
        let spec = SweepSpec {
            v_read_grid: vec![0.2, 0.9],
            n_grid: vec![256],
            r_on_grid: vec![10e3, 20e3],
            ..SweepSpec::default()
        };
        let curves = sweep_grid(&spec, &p22()).unwrap();
        assert_eq!(curves[0].results.len(), 2);
        assert!(curves[1].results.is_empty());
        assert_eq!(curves[1].failures.len(), 2);

        let spec = SweepSpec {
            v_read_grid: vec![0.9],
            ..spec
        };
        assert!(matches!(sweep_grid(&spec, &p22()), Err(Error::SweepFailed(_))));
    }

    #[test]
    fn sweep_rejects_unsorted_grid() {
        let spec = SweepSpec {
            n_grid: vec![128, 64],
            ..SweepSpec::default()
        };
        assert!(sweep_grid(&spec, &p22()).is_err());
    }

    #[test]
    fn ablation_examples() {
        let cell = CellSpec::new(1e3, 10.0).unwrap();
        let setup = ReadSetup::new(0.2, 1024).unwrap();
        let grid = vec![10e3, 1e6, 10e6];
        let series = ablation_series(&p22(), &cell, &setup, &grid).unwrap();
        assert_eq!(series.len(), 4);
        let m = |r: Removed| series.iter().find(|(x, _)| *x == r).unwrap().1.margins();
        let base = m(Removed::Nothing);
        let no_r = m(Removed::LineResistance);
        let no_leak = m(Removed::Leakage);
        // (k R + D) / (k (R + D)) with D = R_T + n r
        let d = 1.7e3 + 1024.0 * 2.5;
        let expected = (10.0 * 10e6 + d) / (10.0 * (10e6 + d));
        assert!((no_leak[2] - expected).abs() < 1e-14);
        assert!((no_leak[2] - 0.9996167632588516).abs() < 1e-12);
        assert!(no_r[0] - base[0] > no_leak[0] - base[0]);
        assert!(no_leak[1] - base[1] > no_r[1] - base[1]);
    }

    #[test]
    fn ablation_without_factors_is_flat() {
        let cell = CellSpec::new(1e3, 10.0).unwrap();
        let setup = ReadSetup::with_factors(0.2, 1024, Factors::NONE).unwrap();
        for (_, c) in ablation_series(&p22(), &cell, &setup, &default_r_on_grid()).unwrap() {
            assert!(c.margins().iter().all(|&m| m == 1.0));
        }
    }

    #[test]
    fn argmax_examples() {
        let setup = ReadSetup::new(0.2, 4096).unwrap();
        assert_eq!(argmax_resistance(&p22(), 10.0, &setup, &[10e3, 50e3, 100e3]).unwrap(), 50e3);

        let ir = ReadSetup::with_factors(0.2, 4096, Factors::IR_ONLY).unwrap();
        assert_eq!(argmax_resistance(&p22(), 10.0, &ir, &[10e3, 50e3, 100e3]).unwrap(), 100e3);

        let dense = argmax_resistance(&p22(), 10.0, &ReadSetup::new(0.2, 1024).unwrap(), &default_r_on_grid()).unwrap();
        assert!((dense - 46059.22041145104).abs() / dense < 1e-9, "{dense}");
    }

    #[test]
    fn argmax_ties_go_low() {
        let flat = ReadSetup::with_factors(0.2, 64, Factors::NONE).unwrap();
        assert_eq!(argmax_resistance(&p22(), 10.0, &flat, &[5e5, 1e4, 3e4]).unwrap(), 1e4);
        assert!(argmax_resistance(&p22(), 10.0, &flat, &[]).is_err());
    }

    #[test]
    fn compensation_examples() {
        let grid = default_r_on_grid();
        let c4 = compensation_curve(&p22(), 10.0, 1024, Factors::ALL, 0.2, 0.4, &grid).unwrap();
        let c6 = compensation_curve(&p22(), 10.0, 1024, Factors::ALL, 0.2, 0.6, &grid).unwrap();
        assert!((c4.max_improvement().1 - 0.08345475175136541).abs() < 1e-9);
        assert!((c6.max_improvement().1 - 0.10750070946259177).abs() < 1e-9);
        assert!(c4.improvement.iter().all(|&d| d >= 0.0));
        assert!(c6.improvement.iter().all(|&d| d >= 0.0));

        let ir = compensation_curve(&p22(), 10.0, 1024, Factors::IR_ONLY, 0.2, 0.6, &grid).unwrap();
        assert!(ir.improvement.iter().all(|&d| d == 0.0));

        assert!(compensation_curve(&p22(), 10.0, 1024, Factors::ALL, 0.2, 0.8, &grid).is_err());
    }

    #[test]
    fn power_ratio() {
        assert_eq!(read_power_ratio(0.2, 0.2).unwrap(), 1.0);
        assert!((read_power_ratio(0.4, 0.2).unwrap() - 4.0).abs() < 1e-12);
        assert!((read_power_ratio(0.6, 0.2).unwrap() - 9.0).abs() < 1e-12);
        assert!(read_power_ratio(0.0, 0.2).is_err());
    }

    #[test]
    fn ohm_labels() {
        assert_eq!(format_ohms(10e3), "10kohm");
        assert_eq!(format_ohms(1.5e6), "1.5Mohm");
        assert_eq!(format_ohms(470.0), "470ohm");
    }
}
