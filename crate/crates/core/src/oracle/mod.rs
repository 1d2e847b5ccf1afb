//! Exact distributed solver for one 1T1R column.
//!
//! Geometry: the bit line is driven by an ideal source at its index-0 end and
//! the source line is sensed by a virtual ground at its index-n end. A line
//! segment precedes each cell on the BL, and one follows each cell on the SL
//! except the last, whose SL node is the sense node itself. Every cell's
//! drive-to-sense path therefore crosses exactly `n` segments.
//!
//! ```text
//!  V --r-- b1 --r-- b2 --r-- ... --r-- bn
//!          |        |                  |
//!        cell1    cell2              celln
//!          |        |                  |
//!          s1 --r-- s2 --r-- ... --r-- sn = sense (0 V)
//! ```
//!
//! Unselected cells are constant current sources BL -> SL by default. Word
//! lines carry no current and are not modelled.
//!
//! Node voltages are obtained with a banded LU in `f64` followed by
//! iterative refinement whose residuals are evaluated element by element in
//! double-double arithmetic, so KCL holds at every node to far below `1e-12`
//! relative even where segment drops are many orders of magnitude smaller
//! than the line voltage.

mod banded;
mod dd;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{self, CellSpec, ReadSetup, SenseResult, TechnologyProfile};

use banded::BandMatrix;
use dd::Dd;

const MAX_REFINEMENT_STEPS: usize = 8;

/// Which resistance the selected cell presents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellState {
    On,
    Off,
}

/// How unselected (gate-off) cells are represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum OffCellModel {
    /// Constant current `i_leak_per_cell` from BL to SL, independent of the
    /// local voltage.
    #[default]
    CurrentSource,
    /// A resistor `v_drive / i_leak_per_cell`, so the leakage shrinks with
    /// the local cell voltage.
    Resistor,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnNetwork {
    pub n_cells: usize,
    pub r_segment: f64,
    pub r_cell_on_path: f64,
    pub i_leak_per_cell: f64,
    /// 1-based position of the sensed cell.
    pub selected_index: usize,
    pub v_drive: f64,
    pub off_cell_model: OffCellModel,
}

impl ColumnNetwork {
    pub fn validate(&self) -> Result<()> {
        if self.n_cells == 0 {
            return Err(Error::InvalidInput("n_cells must be >= 1".into()));
        }
        if !(1..=self.n_cells).contains(&self.selected_index) {
            return Err(Error::InvalidInput(format!(
                "selected_index {} outside [1, {}]",
                self.selected_index, self.n_cells
            )));
        }
        if !(self.r_segment.is_finite() && self.r_segment >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "r_segment must be finite and >= 0, got {}",
                self.r_segment
            )));
        }
        if !(self.r_cell_on_path.is_finite() && self.r_cell_on_path > 0.0) {
            return Err(Error::InvalidInput(format!(
                "r_cell_on_path must be finite and > 0, got {}",
                self.r_cell_on_path
            )));
        }
        if !(self.i_leak_per_cell.is_finite() && self.i_leak_per_cell >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "i_leak_per_cell must be finite and >= 0, got {}",
                self.i_leak_per_cell
            )));
        }
        if !self.v_drive.is_finite() {
            return Err(Error::InvalidInput("v_drive must be finite".into()));
        }
        if self.off_cell_model == OffCellModel::Resistor && self.v_drive <= 0.0 {
            return Err(Error::InvalidInput(
                "resistor leakage model needs v_drive > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn with_off_cell_model(mut self, model: OffCellModel) -> Self {
        self.off_cell_model = model;
        self
    }

    fn leak_conductance(&self) -> f64 {
        match self.off_cell_model {
            OffCellModel::CurrentSource => 0.0,
            OffCellModel::Resistor => self.i_leak_per_cell / self.v_drive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSolution {
    /// `b_1 ..= b_n`.
    pub bl_voltages: Vec<f64>,
    /// `s_1 ..= s_n`; the last entry is the sense node and always 0.
    pub sl_voltages: Vec<f64>,
    /// Current in BL segment `m` (flowing from `b_{m-1}` to `b_m`, `b_0` being the source).
    pub bl_segment_currents: Vec<f64>,
    /// Current in SL segment `m` (flowing from `s_m` to `s_{m+1}`), `n - 1` entries.
    pub sl_segment_currents: Vec<f64>,
    /// BL -> SL current through each cell.
    pub cell_currents: Vec<f64>,
    pub i_sensed: f64,
    pub i_selected_cell: f64,
}

impl NetworkSolution {
    /// Relative KCL residual at every BL node followed by every internal SL
    /// node: `|sum of currents| / sum of |currents|`.
    pub fn kcl_residuals(&self) -> Vec<f64> {
        let n = self.cell_currents.len();
        let j = &self.bl_segment_currents;
        let k = &self.sl_segment_currents;
        let c = &self.cell_currents;
        let rel = |terms: [f64; 3]| {
            let scale: f64 = terms.iter().map(|t| t.abs()).sum();
            if scale == 0.0 {
                0.0
            } else {
                terms.iter().sum::<f64>().abs() / scale
            }
        };
        let mut out = Vec::with_capacity(2 * n - 1);
        for m in 0..n {
            let next = if m + 1 < n { j[m + 1] } else { 0.0 };
            out.push(rel([j[m], -next, -c[m]]));
        }
        for m in 0..n - 1 {
            let prev = if m > 0 { k[m - 1] } else { 0.0 };
            out.push(rel([prev, c[m], -k[m]]));
        }
        out
    }

    pub fn max_kcl_residual(&self) -> f64 {
        self.kcl_residuals().into_iter().fold(0.0, f64::max)
    }
}

/// Builds the column for one read of the selected cell in `state`.
pub fn build_column(
    profile: &TechnologyProfile,
    cell: &CellSpec,
    setup: &ReadSetup,
    state: CellState,
    selected_index: usize,
) -> Result<ColumnNetwork> {
    cell.validate()?;
    setup.validate()?;
    let terms = model::lumped_terms(profile, setup)?;
    let r_mem = match state {
        CellState::On => cell.r_on,
        CellState::Off => cell.r_off(),
    };
    let net = ColumnNetwork {
        n_cells: setup.n_cells,
        r_segment: terms.r_segment,
        r_cell_on_path: r_mem + terms.r_transistor,
        i_leak_per_cell: terms.i_leak_per_cell,
        selected_index,
        v_drive: setup.v_read,
        off_cell_model: OffCellModel::CurrentSource,
    };
    net.validate()?;
    Ok(net)
}

#[derive(Clone, Copy)]
enum Node {
    Unknown(usize),
    Fixed(f64),
}

struct Layout {
    n: usize,
}

impl Layout {
    // Interleaved ordering b1, s1, b2, s2, ..., bn keeps the half-bandwidth at 2.
    fn bl(&self, m: usize) -> Node {
        Node::Unknown(2 * (m - 1))
    }

    fn sl(&self, m: usize) -> Node {
        if m == self.n {
            Node::Fixed(0.0)
        } else {
            Node::Unknown(2 * (m - 1) + 1)
        }
    }

    fn unknowns(&self) -> usize {
        2 * self.n - 1
    }
}

fn node_value(x: &[Dd], node: Node) -> Dd {
    match node {
        Node::Unknown(i) => x[i],
        Node::Fixed(v) => Dd::new(v),
    }
}

struct BranchCurrents {
    bl: Vec<Dd>,
    sl: Vec<Dd>,
    cell: Vec<Dd>,
}

fn branch_currents(net: &ColumnNetwork, layout: &Layout, x: &[Dd]) -> BranchCurrents {
    let n = net.n_cells;
    let g = 1.0 / net.r_segment;
    let g_cell = 1.0 / net.r_cell_on_path;
    let g_leak = net.leak_conductance();
    let source = Node::Fixed(net.v_drive);

    let bl = (1..=n)
        .map(|m| {
            let up = if m == 1 { source } else { layout.bl(m - 1) };
            (node_value(x, up) - node_value(x, layout.bl(m))).scale(g)
        })
        .collect();
    let sl = (1..n)
        .map(|m| (node_value(x, layout.sl(m)) - node_value(x, layout.sl(m + 1))).scale(g))
        .collect();
    let cell = (1..=n)
        .map(|m| {
            let across = node_value(x, layout.bl(m)) - node_value(x, layout.sl(m));
            if m == net.selected_index {
                across.scale(g_cell)
            } else {
                match net.off_cell_model {
                    OffCellModel::CurrentSource => Dd::new(net.i_leak_per_cell),
                    OffCellModel::Resistor => across.scale(g_leak),
                }
            }
        })
        .collect();
    BranchCurrents { bl, sl, cell }
}

/// Net current into every unknown node (the nodal residual `b - A x`).
fn residual(layout: &Layout, currents: &BranchCurrents) -> Vec<f64> {
    let n = layout.n;
    let mut r = vec![0.0; layout.unknowns()];
    for m in 1..=n {
        let next = if m < n { currents.bl[m] } else { Dd::ZERO };
        let into = currents.bl[m - 1] - next - currents.cell[m - 1];
        r[2 * (m - 1)] = into.to_f64();
    }
    for m in 1..n {
        let prev = if m > 1 { currents.sl[m - 2] } else { Dd::ZERO };
        let into = prev + currents.cell[m - 1] - currents.sl[m - 1];
        r[2 * (m - 1) + 1] = into.to_f64();
    }
    r
}

fn assemble(net: &ColumnNetwork, layout: &Layout) -> BandMatrix {
    let n = net.n_cells;
    let g = 1.0 / net.r_segment;
    let g_cell = 1.0 / net.r_cell_on_path;
    let g_leak = net.leak_conductance();
    let mut a = BandMatrix::zeros(layout.unknowns(), 2);
    let mut stamp = |p: Node, q: Node, g: f64| {
        if g == 0.0 {
            return;
        }
        match (p, q) {
            (Node::Unknown(i), Node::Unknown(j)) => {
                a.add(i, i, g);
                a.add(j, j, g);
                a.add(i, j, -g);
                a.add(j, i, -g);
            }
            (Node::Unknown(i), Node::Fixed(_)) | (Node::Fixed(_), Node::Unknown(i)) => {
                a.add(i, i, g);
            }
            (Node::Fixed(_), Node::Fixed(_)) => {}
        }
    };
    stamp(Node::Fixed(net.v_drive), layout.bl(1), g);
    for m in 2..=n {
        stamp(layout.bl(m - 1), layout.bl(m), g);
    }
    for m in 1..n {
        stamp(layout.sl(m), layout.sl(m + 1), g);
    }
    for m in 1..=n {
        let gc = if m == net.selected_index { g_cell } else { g_leak };
        stamp(layout.bl(m), layout.sl(m), gc);
    }
    a
}

/// Ideal wires: every BL node sits at the drive voltage and every SL node at
/// the sense potential, so the currents follow from KCL alone.
fn solve_wires(net: &ColumnNetwork) -> NetworkSolution {
    let n = net.n_cells;
    let cell_currents: Vec<f64> = (1..=n)
        .map(|m| {
            if m == net.selected_index {
                net.v_drive / net.r_cell_on_path
            } else {
                match net.off_cell_model {
                    OffCellModel::CurrentSource => net.i_leak_per_cell,
                    OffCellModel::Resistor => net.v_drive * net.leak_conductance(),
                }
            }
        })
        .collect();
    let mut bl_segment_currents = vec![0.0; n];
    let mut acc = 0.0;
    for m in (0..n).rev() {
        acc += cell_currents[m];
        bl_segment_currents[m] = acc;
    }
    let mut sl_segment_currents = Vec::with_capacity(n - 1);
    let mut acc = 0.0;
    for c in &cell_currents[..n - 1] {
        acc += c;
        sl_segment_currents.push(acc);
    }
    let i_sensed = acc + cell_currents[n - 1];
    NetworkSolution {
        bl_voltages: vec![net.v_drive; n],
        sl_voltages: vec![0.0; n],
        i_selected_cell: cell_currents[net.selected_index - 1],
        bl_segment_currents,
        sl_segment_currents,
        cell_currents,
        i_sensed,
    }
}

/// Solves the column network by nodal analysis.
pub fn solve_column(net: &ColumnNetwork) -> Result<NetworkSolution> {
    net.validate()?;
    if net.r_segment == 0.0 {
        return Ok(solve_wires(net));
    }
    let n = net.n_cells;
    let layout = Layout { n };
    let lu = assemble(net, &layout)
        .factor()
        .map_err(|e| Error::SingularNetwork {
            index: e.index,
            pivot: e.pivot,
            n_cells: n,
            r_segment: net.r_segment,
        })?;

    let mut x = vec![Dd::ZERO; layout.unknowns()];
    let mut currents = branch_currents(net, &layout, &x);
    for _ in 0..MAX_REFINEMENT_STEPS {
        let r = residual(&layout, &currents);
        let delta = lu.solve(&r);
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(Error::SingularNetwork {
                index: delta.iter().position(|d| !d.is_finite()).unwrap_or(0),
                pivot: f64::NAN,
                n_cells: n,
                r_segment: net.r_segment,
            });
        }
        let mut changed = false;
        for (xi, di) in x.iter_mut().zip(&delta) {
            let next = *xi + Dd::new(*di);
            changed |= next != *xi;
            *xi = next;
        }
        currents = branch_currents(net, &layout, &x);
        if !changed {
            break;
        }
    }

    let bl_voltages = (1..=n).map(|m| node_value(&x, layout.bl(m)).to_f64()).collect();
    let sl_voltages = (1..=n).map(|m| node_value(&x, layout.sl(m)).to_f64()).collect();
    let cell_dd = &currents.cell;
    let i_sensed = if n > 1 {
        currents.sl[n - 2] + cell_dd[n - 1]
    } else {
        cell_dd[0]
    };
    Ok(NetworkSolution {
        bl_voltages,
        sl_voltages,
        bl_segment_currents: currents.bl.iter().map(|c| c.to_f64()).collect(),
        sl_segment_currents: currents.sl.iter().map(|c| c.to_f64()).collect(),
        cell_currents: cell_dd.iter().map(|c| c.to_f64()).collect(),
        i_sensed: i_sensed.to_f64(),
        i_selected_cell: cell_dd[net.selected_index - 1].to_f64(),
    })
}

/// Sensing margin from two full network solves of the worst-case cell.
pub fn oracle_margin(
    profile: &TechnologyProfile,
    cell: &CellSpec,
    setup: &ReadSetup,
) -> Result<SenseResult> {
    oracle_margin_with(profile, cell, setup, OffCellModel::CurrentSource)
}

pub fn oracle_margin_with(
    profile: &TechnologyProfile,
    cell: &CellSpec,
    setup: &ReadSetup,
    off_cell_model: OffCellModel,
) -> Result<SenseResult> {
    let n = setup.n_cells;
    let solve = |state| -> Result<f64> {
        let net = build_column(profile, cell, setup, state, n)?.with_off_cell_model(off_cell_model);
        Ok(solve_column(&net)?.i_sensed)
    };
    let i_on = solve(CellState::On)?;
    let i_off = solve(CellState::Off)?;
    Ok(SenseResult::from_currents(i_on, i_off, cell.ratio_ideal))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub cell: CellSpec,
    pub setup: ReadSetup,
    pub margin_lumped: Option<f64>,
    pub margin_oracle: Option<f64>,
    pub relative_gap: Option<f64>,
    /// Diagnostic when either evaluation failed.
    pub failure: Option<String>,
}

impl ComparisonRow {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Lumped model against the distributed network over every (cell, setup)
/// pair, cells outermost. Failed points are kept and flagged.
pub fn compare_lumped_distributed(
    profile: &TechnologyProfile,
    cells: &[CellSpec],
    setups: &[ReadSetup],
) -> Vec<ComparisonRow> {
    let points: Vec<(CellSpec, ReadSetup)> = cells
        .iter()
        .flat_map(|c| setups.iter().map(move |s| (*c, *s)))
        .collect();
    points
        .par_iter()
        .map(|(cell, setup)| {
            let lumped = model::normalized_margin(profile, cell, setup);
            let oracle = oracle_margin(profile, cell, setup).map(|r| r.margin_normalized);
            match (lumped, oracle) {
                (Ok(l), Ok(o)) => ComparisonRow {
                    cell: *cell,
                    setup: *setup,
                    margin_lumped: Some(l),
                    margin_oracle: Some(o),
                    relative_gap: Some((l - o).abs() / o),
                    failure: None,
                },
                (l, o) => {
                    let failure = [l.as_ref().err(), o.as_ref().err()]
                        .into_iter()
                        .flatten()
                        .map(|e| e.to_string())
                        .collect::<Vec<_>>()
                        .join("; ");
                    ComparisonRow {
                        cell: *cell,
                        setup: *setup,
                        margin_lumped: l.ok(),
                        margin_oracle: o.ok(),
                        relative_gap: None,
                        failure: Some(failure),
                    }
                }
            }
        })
        .collect()
}
