//! Figure reproduction: each command writes CSV tables and SVG charts into
//! an output directory using only the given profile.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::report::{ablation_table, compensation_table, curve_series, curves_table};
use crate::analysis::{
    self, log_grid, Engine, MarginCurve, Removed, SweepAxis, SweepSpec,
};
use crate::error::{Error, Result};
use crate::io::{self, Chart, Scale, Series, Style};
use crate::model::{CellSpec, Factors, ReadSetup, TechnologyProfile};

const FIG4_SIZES: [usize; 5] = [256, 512, 1024, 2048, 4096];
const ORACLE_POINTS: usize = 20;

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn note(out: &mut dyn Write, path: &Path) -> Result<()> {
    writeln!(out, "wrote {}", path.display()).map_err(|e| Error::io("<stdout>", e))
}

fn write_pair(
    dir: &Path,
    stem: &str,
    table: &io::ResultTable,
    chart: &Chart,
    out: &mut dyn Write,
) -> Result<()> {
    let csv = dir.join(format!("{stem}.csv"));
    io::write_csv(table, &csv)?;
    note(out, &csv)?;
    let svg = dir.join(format!("{stem}.svg"));
    io::render_plot(chart, &svg)?;
    note(out, &svg)
}

fn r_on_grid(points: usize) -> Vec<f64> {
    log_grid(analysis::DEFAULT_R_ON_MIN, analysis::DEFAULT_R_ON_MAX, points)
}

/// Margin against array size for R_on in {10k, 50k, 100k}: (a) resistance
/// only, (b) leakage only with r = R_T = 0, (c) everything.
pub fn fig3(profile: &TechnologyProfile, dir: &Path, _points: usize, out: &mut dyn Write) -> Result<()> {
    prepare(dir)?;
    let leak_only = profile.with_r_unit(0.0)?.with_r_transistor(0.0)?;
    let leak_factors = Factors {
        leakage: true,
        ..Factors::NONE
    };
    let panels: [(&str, &str, &TechnologyProfile, Factors); 3] = [
        ("fig3a", "IR drop only", profile, Factors::IR_ONLY),
        ("fig3b", "leakage only (r = R_T = 0)", &leak_only, leak_factors),
        ("fig3c", "IR drop and leakage", profile, Factors::ALL),
    ];
    let n_grid = analysis::default_n_grid();
    for (stem, title, p, factors) in panels {
        let spec = SweepSpec {
            r_on_grid: vec![10e3, 50e3, 100e3],
            n_grid: n_grid.clone(),
            v_read_grid: vec![0.2],
            ratio_ideal: 10.0,
            toggles: vec![factors],
            engine: Engine::Lumped,
            axis: SweepAxis::Cells,
        };
        let curves = analysis::sweep_grid(&spec, p)?;
        let mut chart = Chart::new(
            format!("{title}, k = 10, 0.2 V"),
            "cells per column N",
            "k'/k",
            Scale::Log10,
        );
        chart.x_ticks = Some(n_grid.iter().map(|&n| n as f64).collect());
        for c in &curves {
            chart.push(curve_series(c));
        }
        write_pair(dir, stem, &curves_table(&curves)?, &chart, out)?;
    }
    Ok(())
}

fn size_curves(profile: &TechnologyProfile, k: f64, grid: Vec<f64>, engine: Engine) -> Result<Vec<MarginCurve>> {
    let spec = SweepSpec {
        r_on_grid: grid,
        n_grid: FIG4_SIZES.to_vec(),
        v_read_grid: vec![0.2],
        ratio_ideal: k,
        toggles: vec![Factors::ALL],
        engine,
        axis: SweepAxis::ROn,
    };
    analysis::sweep_grid(&spec, profile)
}

/// Margin against R_on for several array sizes: (a) k = 10 with network
/// solver markers, (b) k = 100.
pub fn fig4(profile: &TechnologyProfile, dir: &Path, points: usize, out: &mut dyn Write) -> Result<()> {
    prepare(dir)?;
    let lumped = size_curves(profile, 10.0, r_on_grid(points), Engine::Lumped)?;
    let mut oracle = size_curves(profile, 10.0, r_on_grid(ORACLE_POINTS), Engine::Oracle)?;
    for c in &mut oracle {
        c.label.push_str(" network");
    }
    let mut chart = Chart::new("k = 10, 0.2 V", "R_on (ohm)", "k'/k", Scale::Log10);
    for c in &lumped {
        chart.push(curve_series(c));
    }
    for c in &oracle {
        chart.push(curve_series(c).with_style(Style::Markers));
    }
    let mut both = lumped;
    both.extend(oracle);
    write_pair(dir, "fig4a", &curves_table(&both)?, &chart, out)?;

    let curves = size_curves(profile, 100.0, r_on_grid(points), Engine::Lumped)?;
    let mut chart = Chart::new("k = 100, 0.2 V", "R_on (ohm)", "k'/k", Scale::Log10);
    for c in &curves {
        chart.push(curve_series(c));
    }
    write_pair(dir, "fig4b", &curves_table(&curves)?, &chart, out)
}

pub fn ablation_chart(series: &[(Removed, MarginCurve)], n: usize) -> Chart {
    let mut chart = Chart::new(
        format!("factor ablation, N = {n}, k = 10, 0.2 V"),
        "R_on (ohm)",
        "k'/k",
        Scale::Log10,
    );
    for (removed, c) in series {
        let s = curve_series(c);
        chart.push(if *removed == Removed::Nothing { s } else { s.with_style(Style::Dashed) });
    }
    chart
}

/// Ablation at N = 1024.
pub fn fig5(profile: &TechnologyProfile, dir: &Path, points: usize, out: &mut dyn Write) -> Result<()> {
    prepare(dir)?;
    let n = 1024;
    let cell = CellSpec::new(analysis::DEFAULT_R_ON_MIN, 10.0)?;
    let setup = ReadSetup::new(0.2, n)?;
    let series = analysis::ablation_series(profile, &cell, &setup, &r_on_grid(points))?;
    write_pair(dir, "fig5", &ablation_table(&series)?, &ablation_chart(&series, n), out)
}

/// Read-voltage compensation at N = 1024: margins at 0.2/0.4/0.6 V and the
/// improvement over 0.2 V.
pub fn fig6(profile: &TechnologyProfile, dir: &Path, points: usize, out: &mut dyn Write) -> Result<()> {
    prepare(dir)?;
    let n = 1024;
    let grid = r_on_grid(points);
    let curves = [0.4, 0.6]
        .into_iter()
        .map(|v| analysis::compensation_curve(profile, 10.0, n, Factors::ALL, 0.2, v, &grid))
        .collect::<Result<Vec<_>>>()?;

    let mut margins = Chart::new(
        format!("read voltage, N = {n}, k = 10"),
        "R_on (ohm)",
        "k'/k",
        Scale::Log10,
    );
    margins.push(Series::line(
        "0.2 V",
        grid.iter().copied().zip(curves[0].base.iter().map(|r| r.margin_normalized)).collect(),
    ));
    for c in &curves {
        margins.push(Series::line(
            format!("{} V", c.v_alt),
            grid.iter().copied().zip(c.alt.iter().map(|r| r.margin_normalized)).collect(),
        ));
    }
    let mut gains = Chart::new(
        format!("improvement over 0.2 V, N = {n}"),
        "R_on (ohm)",
        "improvement in k'/k",
        Scale::Log10,
    );
    for c in &curves {
        gains.push(Series::line(format!("{} V", c.v_alt), c.points()));
    }

    let table = compensation_table(&curves)?;
    let csv = dir.join("fig6.csv");
    io::write_csv(&table, &csv)?;
    note(out, &csv)?;
    for (stem, chart) in [("fig6a", &margins), ("fig6b", &gains)] {
        let svg = dir.join(format!("{stem}.svg"));
        io::render_plot(chart, &svg)?;
        note(out, &svg)?;
    }
    for c in &curves {
        let (r, d) = c.max_improvement();
        writeln!(
            out,
            "{} V: max improvement {:.4} at R_on = {:.4e} ohm, read power x{:.2}",
            c.v_alt,
            d,
            r,
            analysis::read_power_ratio(c.v_alt, c.v_base)?
        )
        .map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}
