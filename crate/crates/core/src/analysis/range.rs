//! Search for the on-resistance interval that keeps the margin above a
//! threshold.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{self, CellSpec, ReadSetup, TechnologyProfile};

use super::{log_grid, DEFAULT_R_ON_MAX, DEFAULT_R_ON_MIN, DEFAULT_R_ON_POINTS};

/// Domain and resolution of the range search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeSearch {
    pub r_min: f64,
    pub r_max: f64,
    /// Points of the log pre-sweep used for the unimodality check and to
    /// bracket the two crossings.
    pub sweep_points: usize,
    /// Bisection stops once `hi / lo - 1` is below this.
    pub resolution: f64,
}

impl Default for RangeSearch {
    fn default() -> Self {
        Self {
            r_min: DEFAULT_R_ON_MIN,
            r_max: DEFAULT_R_ON_MAX,
            sweep_points: DEFAULT_R_ON_POINTS,
            resolution: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalRange {
    pub threshold: f64,
    pub peak_r_on: f64,
    pub peak_margin: f64,
    /// `(r_low, r_high)`, both with margin >= threshold; `None` if the peak
    /// stays below the threshold.
    pub interval: Option<(f64, f64)>,
    /// The interval reaches the lower end of the search domain.
    pub clipped_low: bool,
    /// The interval reaches the upper end of the search domain.
    pub clipped_high: bool,
}

impl OptimalRange {
    pub fn is_empty(&self) -> bool {
        self.interval.is_none()
    }

    /// Geometric midpoint of the interval.
    pub fn geometric_center(&self) -> Option<f64> {
        self.interval.map(|(lo, hi)| (lo * hi).sqrt())
    }
}

// Tolerated wrong-way step, relative, when checking unimodality.
const UNIMODAL_SLACK: f64 = 1e-12;

fn check_unimodal(grid: &[f64], margins: &[f64], peak: usize) -> Result<()> {
    let rising_ok = margins[..=peak]
        .windows(2)
        .all(|w| w[1] >= w[0] - UNIMODAL_SLACK * w[0].abs());
    let falling_ok = margins[peak..]
        .windows(2)
        .all(|w| w[1] <= w[0] + UNIMODAL_SLACK * w[0].abs());
    if rising_ok && falling_ok {
        return Ok(());
    }
    let mut extrema = Vec::new();
    for i in 1..margins.len() - 1 {
        let (a, b, c) = (margins[i - 1], margins[i], margins[i + 1]);
        if (b > a && b > c) || (b < a && b < c) {
            let kind = if b > a { "max" } else { "min" };
            extrema.push(format!("{kind} {b:.6} at {:.4e} ohm", grid[i]));
        }
    }
    Err(Error::NotUnimodal(extrema.join(", ")))
}

/// Maximal contiguous on-resistance interval with normalized margin at or
/// above `threshold`.
///
/// A dense log pre-sweep checks that margin against R_on is unimodal and
/// brackets both crossings, which are then refined by bisection in log space.
/// A threshold above the achievable peak gives an empty range, not an error.
pub fn find_optimal_range(
    profile: &TechnologyProfile,
    ratio_ideal: f64,
    setup: &ReadSetup,
    threshold: f64,
    search: &RangeSearch,
) -> Result<OptimalRange> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidInput(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    if !(search.r_min > 0.0 && search.r_max > search.r_min && search.sweep_points >= 3) {
        return Err(Error::InvalidInput(format!(
            "bad search domain [{}, {}] with {} points",
            search.r_min, search.r_max, search.sweep_points
        )));
    }
    if !(search.resolution > 0.0) {
        return Err(Error::InvalidInput("resolution must be > 0".into()));
    }
    let margin_at = |r: f64| -> Result<f64> {
        model::normalized_margin(profile, &CellSpec::new(r, ratio_ideal)?, setup)
    };

    let grid = log_grid(search.r_min, search.r_max, search.sweep_points);
    let margins = grid.iter().map(|&r| margin_at(r)).collect::<Result<Vec<_>>>()?;
    let peak = margins
        .iter()
        .enumerate()
        .fold(0, |best, (i, &m)| if m > margins[best] { i } else { best });
    check_unimodal(&grid, &margins, peak)?;

    let mut out = OptimalRange {
        threshold,
        peak_r_on: grid[peak],
        peak_margin: margins[peak],
        interval: None,
        clipped_low: false,
        clipped_high: false,
    };
    if margins[peak] < threshold {
        return Ok(out);
    }

    // Shrinks [below, above] around the crossing, keeping `above` on the
    // side with margin >= threshold.
    let bisect = |mut below: f64, mut above: f64| -> Result<f64> {
        while (below / above).max(above / below) - 1.0 > search.resolution {
            let mid = (below * above).sqrt();
            if margin_at(mid)? >= threshold {
                above = mid;
            } else {
                below = mid;
            }
        }
        Ok(above)
    };

    let first = margins.iter().position(|&m| m >= threshold).expect("peak >= threshold");
    let last = margins.iter().rposition(|&m| m >= threshold).expect("peak >= threshold");
    let r_low = if first == 0 {
        out.clipped_low = true;
        grid[0]
    } else {
        bisect(grid[first - 1], grid[first])?
    };
    let r_high = if last == grid.len() - 1 {
        out.clipped_high = true;
        grid[last]
    } else {
        bisect(grid[last + 1], grid[last])?
    };
    out.interval = Some((r_low, r_high));
    Ok(out)
}
