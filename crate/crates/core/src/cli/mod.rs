//! Command-line front end.
//!
//! Exit codes: 0 success, 1 computational or validation failure, 2 usage
//! error.

mod figures;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    self, log_grid, CompensationCurve, Engine, RangeSearch, SweepAxis, SweepSpec,
};
use crate::error::{Error, Result};
use crate::io::{self, Chart, Scale, Series};
use crate::model::{CellSpec, Factors, ReadSetup, SenseResult, TechnologyProfile};
use crate::oracle::{self, OffCellModel};

pub use report::{ablation_table, comparison_table, compensation_table, curves_table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "xbar-margin", version, about = "Sensing margin of 1T1R crossbar columns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one read condition.
    Margin(MarginArgs),
    /// Sweep margin over R_on, array size and read voltage.
    Sweep(SweepArgs),
    /// Remove R_T, r and I_Tleak one at a time.
    Ablate(AblateArgs),
    /// Find the R_on interval whose margin stays above a threshold.
    OptimalRange(RangeArgs),
    /// Margin gained by raising the read voltage.
    Compensate(CompensateArgs),
    /// Compare the closed-form model with the network solver.
    Validate(ValidateArgs),
    /// Joint effect of IR drop and leakage against array size.
    Fig3(FigArgs),
    /// Margin against R_on for several array sizes, k = 10 and k = 100.
    Fig4(FigArgs),
    /// Factor ablation at 1024 cells.
    Fig5(FigArgs),
    /// Read-voltage compensation at 1024 cells.
    Fig6(FigArgs),
}

#[derive(Debug, Args)]
struct ProfileArg {
    /// Technology profile JSON; the bundled 22nm FDSOI profile if omitted.
    #[arg(long)]
    profile: Option<PathBuf>,
}

impl ProfileArg {
    fn load(&self) -> Result<TechnologyProfile> {
        match &self.profile {
            Some(p) => Ok(io::load_profile(p)?),
            None => Ok(io::bundled_profile()),
        }
    }
}

#[derive(Debug, Args, Clone, Copy)]
struct FactorArgs {
    /// Ignore metal-line resistance.
    #[arg(long)]
    no_line_resistance: bool,
    /// Ignore transistor read resistance.
    #[arg(long)]
    no_transistor_resistance: bool,
    /// Ignore transistor leakage.
    #[arg(long)]
    no_leakage: bool,
}

impl FactorArgs {
    fn factors(&self) -> Factors {
        Factors {
            line_resistance: !self.no_line_resistance,
            transistor_resistance: !self.no_transistor_resistance,
            leakage: !self.no_leakage,
        }
    }
}

#[derive(Debug, Args, Clone, Copy)]
struct RonGridArgs {
    /// Lower end of the R_on grid in ohms.
    #[arg(long, default_value_t = analysis::DEFAULT_R_ON_MIN)]
    ron_min: f64,
    /// Upper end of the R_on grid in ohms.
    #[arg(long, default_value_t = analysis::DEFAULT_R_ON_MAX)]
    ron_max: f64,
    /// Log-spaced grid points.
    #[arg(long, default_value_t = analysis::DEFAULT_R_ON_POINTS)]
    points: usize,
}

impl RonGridArgs {
    fn grid(&self) -> Vec<f64> {
        log_grid(self.ron_min, self.ron_max, self.points)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Lumped,
    Oracle,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Lumped => Engine::Lumped,
            EngineArg::Oracle => Engine::Oracle,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OffCellArg {
    CurrentSource,
    Resistor,
}

impl From<OffCellArg> for OffCellModel {
    fn from(m: OffCellArg) -> Self {
        match m {
            OffCellArg::CurrentSource => OffCellModel::CurrentSource,
            OffCellArg::Resistor => OffCellModel::Resistor,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    Ron,
    Cells,
}

#[derive(Debug, Args)]
struct MarginArgs {
    #[command(flatten)]
    profile: ProfileArg,
    /// Memristor on-resistance in ohms.
    #[arg(long)]
    ron: f64,
    /// Ideal on/off ratio R_off / R_on.
    #[arg(long, default_value_t = 10.0)]
    k: f64,
    /// Cells per column.
    #[arg(long)]
    n: usize,
    /// Read voltage in volts.
    #[arg(long, default_value_t = 0.2)]
    vread: f64,
    #[arg(long, value_enum, default_value = "lumped")]
    engine: EngineArg,
    /// Off-cell representation for the oracle engine.
    #[arg(long, value_enum, default_value = "current-source")]
    off_cell: OffCellArg,
    #[command(flatten)]
    factors: FactorArgs,
    /// Print a JSON object instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    profile: ProfileArg,
    #[arg(long, default_value_t = 10.0)]
    k: f64,
    /// Explicit R_on values (comma separated); overrides the log grid.
    #[arg(long, value_delimiter = ',')]
    ron: Vec<f64>,
    #[command(flatten)]
    grid: RonGridArgs,
    /// Array sizes (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = analysis::default_n_grid())]
    n: Vec<usize>,
    /// Read voltages (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.2])]
    vread: Vec<f64>,
    /// Curve variable: margin against R_on, or against array size.
    #[arg(long, value_enum, default_value = "ron")]
    axis: AxisArg,
    #[arg(long, value_enum, default_value = "lumped")]
    engine: EngineArg,
    #[command(flatten)]
    factors: FactorArgs,
    /// CSV output path; stdout if omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// SVG chart output path.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AblateArgs {
    #[command(flatten)]
    profile: ProfileArg,
    #[arg(long, default_value_t = 10.0)]
    k: f64,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 0.2)]
    vread: f64,
    #[command(flatten)]
    grid: RonGridArgs,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RangeArgs {
    #[command(flatten)]
    profile: ProfileArg,
    #[arg(long, default_value_t = 10.0)]
    k: f64,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 0.2)]
    vread: f64,
    /// Minimum acceptable normalized margin k'/k.
    #[arg(long, default_value_t = 0.8)]
    threshold: f64,
    #[command(flatten)]
    grid: RonGridArgs,
    /// Relative bisection resolution of the endpoints.
    #[arg(long, default_value_t = 0.01)]
    resolution: f64,
    #[command(flatten)]
    factors: FactorArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct CompensateArgs {
    #[command(flatten)]
    profile: ProfileArg,
    #[arg(long, default_value_t = 10.0)]
    k: f64,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// Reference read voltage.
    #[arg(long, default_value_t = 0.2)]
    vbase: f64,
    /// Raised read voltages (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.4, 0.6])]
    valt: Vec<f64>,
    #[command(flatten)]
    grid: RonGridArgs,
    #[command(flatten)]
    factors: FactorArgs,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GridArg {
    /// R_on 10 kohm..100 Mohm x N in {256..4096}, k = 10, 0.2 V.
    Paper,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    profile: ProfileArg,
    #[arg(long, value_enum, default_value = "paper")]
    grid: GridArg,
    /// Log-spaced R_on points.
    #[arg(long, default_value_t = 20)]
    points: usize,
    /// Largest acceptable relative margin gap.
    #[arg(long, default_value_t = 0.01)]
    tolerance: f64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FigArgs {
    #[command(flatten)]
    profile: ProfileArg,
    /// Output directory for CSV and SVG files.
    #[arg(long, default_value = "figures")]
    out: PathBuf,
    /// Log-spaced R_on points per curve.
    #[arg(long, default_value_t = analysis::DEFAULT_R_ON_POINTS)]
    points: usize,
}

/// Outcome of a subcommand that ran to completion.
enum Verdict {
    Ok,
    /// Ran but a check failed (validation gap, failed rows).
    Failed,
}

/// Parses `args` (including the program name) and runs the subcommand,
/// writing human-readable output to `out`. Returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(Verdict::Ok) => EXIT_OK,
        Ok(Verdict::Failed) => EXIT_FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<Verdict> {
    match run(cmd, out) {
        Ok(()) => Ok(Verdict::Ok),
        Err(CliFailure::Check) => Ok(Verdict::Failed),
        Err(CliFailure::Error(e)) => Err(e),
    }
}

fn run(cmd: Command, out: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Margin(a) => margin(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Ablate(a) => ablate(a, out),
        Command::OptimalRange(a) => optimal_range(a, out),
        Command::Compensate(a) => compensate(a, out),
        Command::Validate(a) => validate(a, out),
        Command::Fig3(a) => Ok(figures::fig3(&a.profile.load()?, &a.out, a.points, out)?),
        Command::Fig4(a) => Ok(figures::fig4(&a.profile.load()?, &a.out, a.points, out)?),
        Command::Fig5(a) => Ok(figures::fig5(&a.profile.load()?, &a.out, a.points, out)?),
        Command::Fig6(a) => Ok(figures::fig6(&a.profile.load()?, &a.out, a.points, out)?),
    }
}

enum CliFailure {
    Check,
    Error(Error),
}

impl<E: Into<Error>> From<E> for CliFailure {
    fn from(e: E) -> Self {
        CliFailure::Error(e.into())
    }
}

type CmdResult = std::result::Result<(), CliFailure>;

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn emit_table(table: &io::ResultTable, path: Option<&PathBuf>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => io::write_csv(table, p),
        None => {
            let bytes = table.to_csv_bytes()?;
            out.write_all(&bytes).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

#[derive(Serialize)]
struct MarginReport<'a> {
    profile: &'a str,
    r_on_ohm: f64,
    r_off_ohm: f64,
    ratio_ideal: f64,
    n_cells: usize,
    v_read_v: f64,
    factors: Factors,
    engine: &'a str,
    #[serde(flatten)]
    result: SenseResult,
}

fn margin(a: MarginArgs, out: &mut dyn Write) -> CmdResult {
    let profile = a.profile.load()?;
    let cell = CellSpec::new(a.ron, a.k)?;
    let setup = ReadSetup::with_factors(a.vread, a.n, a.factors.factors())?;
    let engine: Engine = a.engine.into();
    let result = match engine {
        Engine::Lumped => crate::model::read_currents(&profile, &cell, &setup)?,
        Engine::Oracle => oracle::oracle_margin_with(&profile, &cell, &setup, a.off_cell.into())?,
    };
    if a.json {
        let report = MarginReport {
            profile: profile.node_label(),
            r_on_ohm: cell.r_on,
            r_off_ohm: cell.r_off(),
            ratio_ideal: cell.ratio_ideal,
            n_cells: setup.n_cells,
            v_read_v: setup.v_read,
            factors: setup.factors,
            engine: if engine == Engine::Lumped { "lumped" } else { "oracle" },
            result,
        };
        let mut s = serde_json::to_string_pretty(&report).map_err(|e| Error::InvalidInput(e.to_string()))?;
        s.push('\n');
        write_out(out, &s)?;
    } else {
        write_out(
            out,
            &format!(
                "profile   {}\nfactors   {}\nI_on      {:.6e} A\nI_off     {:.6e} A\nk'        {:.6}\nk'/k      {:.6}\n",
                profile.node_label(),
                setup.factors.label(),
                result.i_on,
                result.i_off,
                result.ratio_effective,
                result.margin_normalized
            ),
        )?;
    }
    Ok(())
}

fn sweep(a: SweepArgs, out: &mut dyn Write) -> CmdResult {
    let profile = a.profile.load()?;
    let mut r_on_grid = if a.ron.is_empty() { a.grid.grid() } else { a.ron.clone() };
    r_on_grid.sort_by(f64::total_cmp);
    let mut n_grid = a.n.clone();
    n_grid.sort_unstable();
    let mut v_read_grid = a.vread.clone();
    v_read_grid.sort_by(f64::total_cmp);
    let axis = match a.axis {
        AxisArg::Ron => SweepAxis::ROn,
        AxisArg::Cells => SweepAxis::Cells,
    };
    let spec = SweepSpec {
        r_on_grid,
        n_grid,
        v_read_grid,
        ratio_ideal: a.k,
        toggles: vec![a.factors.factors()],
        engine: a.engine.into(),
        axis,
    };
    let curves = analysis::sweep_grid(&spec, &profile)?;
    for c in &curves {
        for (x, e) in &c.failures {
            eprintln!("warning: {} at x={x}: {e}", c.label);
        }
    }
    emit_table(&curves_table(&curves)?, a.csv.as_ref(), out)?;
    if let Some(path) = &a.svg {
        let (x_label, scale) = match axis {
            SweepAxis::ROn => ("R_on (ohm)", Scale::Log10),
            SweepAxis::Cells => ("cells per column N", Scale::Log10),
        };
        let mut chart = Chart::new(format!("k = {}", a.k), x_label, "k'/k", scale);
        if axis == SweepAxis::Cells {
            chart.x_ticks = Some(spec.n_grid.iter().map(|&n| n as f64).collect());
        }
        for c in &curves {
            chart.push(report::curve_series(c));
        }
        io::render_plot(&chart, path)?;
    }
    Ok(())
}

fn ablate(a: AblateArgs, out: &mut dyn Write) -> CmdResult {
    let profile = a.profile.load()?;
    let cell = CellSpec::new(a.grid.ron_min, a.k)?;
    let setup = ReadSetup::new(a.vread, a.n)?;
    let series = analysis::ablation_series(&profile, &cell, &setup, &a.grid.grid())?;
    emit_table(&ablation_table(&series)?, a.csv.as_ref(), out)?;
    if let Some(path) = &a.svg {
        io::render_plot(&figures::ablation_chart(&series, a.n), path)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RangeReport {
    ratio_ideal: f64,
    n_cells: usize,
    v_read_v: f64,
    #[serde(flatten)]
    range: analysis::OptimalRange,
}

fn optimal_range(a: RangeArgs, out: &mut dyn Write) -> CmdResult {
    let profile = a.profile.load()?;
    let setup = ReadSetup::with_factors(a.vread, a.n, a.factors.factors())?;
    let search = RangeSearch {
        r_min: a.grid.ron_min,
        r_max: a.grid.ron_max,
        sweep_points: a.grid.points,
        resolution: a.resolution,
    };
    let range = analysis::find_optimal_range(&profile, a.k, &setup, a.threshold, &search)?;
    if a.json {
        let report = RangeReport {
            ratio_ideal: a.k,
            n_cells: a.n,
            v_read_v: a.vread,
            range,
        };
        let mut s = serde_json::to_string_pretty(&report).map_err(|e| Error::InvalidInput(e.to_string()))?;
        s.push('\n');
        write_out(out, &s)?;
        return Ok(());
    }
    let mut text = format!(
        "peak      k'/k = {:.6} at R_on = {:.6e} ohm\n",
        range.peak_margin, range.peak_r_on
    );
    match range.interval {
        Some((lo, hi)) => {
            text.push_str(&format!(
                "range     k'/k >= {} for R_on in [{:.6e}, {:.6e}] ohm\n",
                a.threshold, lo, hi
            ));
            if range.clipped_low || range.clipped_high {
                text.push_str("note      interval reaches the edge of the search domain\n");
            }
        }
        None => text.push_str(&format!("range     empty: peak margin below {}\n", a.threshold)),
    }
    write_out(out, &text)?;
    Ok(())
}

fn compensate(a: CompensateArgs, out: &mut dyn Write) -> CmdResult {
    let profile = a.profile.load()?;
    let grid = a.grid.grid();
    let curves = a
        .valt
        .iter()
        .map(|&v| analysis::compensation_curve(&profile, a.k, a.n, a.factors.factors(), a.vbase, v, &grid))
        .collect::<Result<Vec<CompensationCurve>>>()?;
    emit_table(&compensation_table(&curves)?, a.csv.as_ref(), out)?;
    if a.csv.is_some() {
        for c in &curves {
            let (r, d) = c.max_improvement();
            write_out(
                out,
                &format!(
                    "{} V -> {} V: max improvement {:.4} at R_on = {:.4e} ohm, read power x{:.2}\n",
                    c.v_base,
                    c.v_alt,
                    d,
                    r,
                    analysis::read_power_ratio(c.v_alt, c.v_base)?
                ),
            )?;
        }
    }
    if let Some(path) = &a.svg {
        let mut chart = Chart::new(
            format!("read-voltage compensation, N = {}", a.n),
            "R_on (ohm)",
            "improvement in k'/k",
            Scale::Log10,
        );
        for c in &curves {
            chart.push(Series::line(format!("{} V vs {} V", c.v_alt, c.v_base), c.points()));
        }
        io::render_plot(&chart, path)?;
    }
    Ok(())
}

/// The validation grid: `points` log-spaced R_on values across
/// 10 kohm..100 Mohm and array sizes 256..4096, k = 10, 0.2 V.
pub fn validation_grid(points: usize) -> Result<(Vec<CellSpec>, Vec<ReadSetup>)> {
    let cells = log_grid(analysis::DEFAULT_R_ON_MIN, analysis::DEFAULT_R_ON_MAX, points)
        .into_iter()
        .map(|r| CellSpec::new(r, 10.0))
        .collect::<Result<_>>()?;
    let setups = [256, 512, 1024, 2048, 4096]
        .into_iter()
        .map(|n| ReadSetup::new(0.2, n))
        .collect::<Result<_>>()?;
    Ok((cells, setups))
}

fn validate(a: ValidateArgs, out: &mut dyn Write) -> CmdResult {
    let profile = a.profile.load()?;
    let (cells, setups) = match a.grid {
        GridArg::Paper => validation_grid(a.points)?,
    };
    let rows = oracle::compare_lumped_distributed(&profile, &cells, &setups);
    let table = comparison_table(&rows)?;
    if let Some(p) = &a.csv {
        io::write_csv(&table, p)?;
    }
    let failed = rows.iter().filter(|r| r.failed()).count();
    let max_gap = rows
        .iter()
        .filter_map(|r| r.relative_gap)
        .fold(0.0, f64::max);
    let pass = failed == 0 && max_gap <= a.tolerance;
    let mut text = String::new();
    if a.csv.is_none() {
        text.push_str(&String::from_utf8_lossy(&table.to_csv_bytes()?));
    }
    text.push_str(&format!(
        "points {}  failed {}  max relative gap {:.3e}  tolerance {}  {}\n",
        rows.len(),
        failed,
        max_gap,
        a.tolerance,
        if pass { "PASS" } else { "FAIL" }
    ));
    write_out(out, &text)?;
    if pass {
        Ok(())
    } else {
        Err(CliFailure::Check)
    }
}
