//! Result tables and chart series for the subcommands.

use crate::analysis::{CompensationCurve, Engine, MarginCurve, Removed, SweepAxis};
use crate::io::{Cell, ResultTable, Series};
use crate::oracle::ComparisonRow;
use crate::Result;

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Lumped => "lumped",
        Engine::Oracle => "oracle",
    }
}

const CURVE_COLUMNS: [&str; 13] = [
    "curve",
    "engine",
    "n_cells",
    "r_on_ohm",
    "v_read_v",
    "ratio_ideal",
    "line_resistance",
    "transistor_resistance",
    "leakage",
    "i_on_a",
    "i_off_a",
    "ratio_effective",
    "margin_normalized",
];

pub fn curves_table(curves: &[MarginCurve]) -> Result<ResultTable> {
    let mut t = ResultTable::new(CURVE_COLUMNS);
    for c in curves {
        let k = &c.key;
        for (&x, r) in c.x.iter().zip(&c.results) {
            let (n, r_on) = match k.axis {
                SweepAxis::ROn => (k.n_cells.unwrap_or(0), x),
                SweepAxis::Cells => (x as usize, k.r_on.unwrap_or(f64::NAN)),
            };
            t.push(vec![
                c.label.clone().into(),
                engine_name(k.engine).into(),
                n.into(),
                r_on.into(),
                k.v_read.into(),
                k.ratio_ideal.into(),
                k.factors.line_resistance.into(),
                k.factors.transistor_resistance.into(),
                k.factors.leakage.into(),
                r.i_on.into(),
                r.i_off.into(),
                r.ratio_effective.into(),
                r.margin_normalized.into(),
            ])?;
        }
    }
    Ok(t)
}

pub fn ablation_table(series: &[(Removed, MarginCurve)]) -> Result<ResultTable> {
    let mut t = ResultTable::new([
        "removed",
        "n_cells",
        "r_on_ohm",
        "i_on_a",
        "i_off_a",
        "ratio_effective",
        "margin_normalized",
    ]);
    for (removed, c) in series {
        for (&x, r) in c.x.iter().zip(&c.results) {
            t.push(vec![
                removed.label().into(),
                c.key.n_cells.into(),
                x.into(),
                r.i_on.into(),
                r.i_off.into(),
                r.ratio_effective.into(),
                r.margin_normalized.into(),
            ])?;
        }
    }
    Ok(t)
}

pub fn comparison_table(rows: &[ComparisonRow]) -> Result<ResultTable> {
    let mut t = ResultTable::new([
        "r_on_ohm",
        "ratio_ideal",
        "n_cells",
        "v_read_v",
        "margin_lumped",
        "margin_oracle",
        "relative_gap",
        "failure",
    ]);
    for row in rows {
        t.push(vec![
            row.cell.r_on.into(),
            row.cell.ratio_ideal.into(),
            row.setup.n_cells.into(),
            row.setup.v_read.into(),
            row.margin_lumped.into(),
            row.margin_oracle.into(),
            row.relative_gap.into(),
            row.failure.clone().into(),
        ])?;
    }
    Ok(t)
}

pub fn compensation_table(curves: &[CompensationCurve]) -> Result<ResultTable> {
    let mut t = ResultTable::new([
        "v_base_v",
        "v_alt_v",
        "r_on_ohm",
        "margin_base",
        "margin_alt",
        "improvement",
    ]);
    for c in curves {
        for i in 0..c.r_on.len() {
            t.push(vec![
                c.v_base.into(),
                c.v_alt.into(),
                c.r_on[i].into(),
                c.base[i].margin_normalized.into(),
                c.alt[i].margin_normalized.into(),
                Cell::Num(c.improvement[i]),
            ])?;
        }
    }
    Ok(t)
}

pub fn curve_series(curve: &MarginCurve) -> Series {
    Series::line(curve.label.clone(), curve.points())
}
