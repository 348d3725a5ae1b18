//! Row-by-row simulation of truth tables and the resulting reports.

use std::fmt::Write;

use rayon::prelude::*;

use super::{decode, margin, plan_stimulus, HarnessError, Logic, LogicLevels, TruthTable};
use crate::gates::ClockSpec;
use crate::netlist::{flatten, Device, FlatCircuit, Netlist, SourceSpec};
use crate::solver::{solve_dc, solve_transient, SolverError, SolverOptions, TransientOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct RowReport {
    pub row: usize,
    pub inputs: Vec<bool>,
    pub voltages: Vec<f64>,
    pub decoded: Vec<Logic>,
    pub expected: Vec<bool>,
    pub pass: bool,
    /// Smallest output margin; outputs that decode to the wrong bit count
    /// negative.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthTableReport {
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub rows: Vec<RowReport>,
}

impl TruthTableReport {
    pub fn passed(&self) -> usize {
        self.rows.iter().filter(|r| r.pass).count()
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn worst_margin(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.margin)
            .fold(f64::INFINITY, f64::min)
    }

    /// Aligned table followed by a summary line.
    pub fn to_text(&self) -> String {
        let mut cols: Vec<String> = vec!["row".into()];
        cols.extend(self.input_names.iter().cloned());
        cols.extend(self.output_names.iter().map(|n| format!("v_{n}")));
        cols.extend(self.output_names.iter().cloned());
        cols.extend(["pass".into(), "margin".into()]);
        let cells: Vec<Vec<String>> = self.rows.iter().map(row_cells).collect();
        let widths: Vec<usize> = (0..cols.len())
            .map(|c| {
                cells
                    .iter()
                    .map(|r| r[c].len())
                    .chain([cols[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |items: &[String]| {
            let parts: Vec<String> = items
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let mut s = line(&cols);
        s.push('\n');
        for r in &cells {
            s.push_str(&line(r));
            s.push('\n');
        }
        let _ = writeln!(
            s,
            "{}/{} rows pass, worst margin {:.3} V",
            self.passed(),
            self.rows.len(),
            self.worst_margin()
        );
        s
    }

    /// CSV with header `row,<inputs>,v_<outputs>,<outputs>,pass,margin`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("row");
        for n in &self.input_names {
            let _ = write!(s, ",{n}");
        }
        for n in &self.output_names {
            let _ = write!(s, ",v_{n}");
        }
        for n in &self.output_names {
            let _ = write!(s, ",{n}");
        }
        s.push_str(",pass,margin\n");
        for r in &self.rows {
            s.push_str(&row_cells(r).join(","));
            s.push('\n');
        }
        s
    }
}

fn row_cells(r: &RowReport) -> Vec<String> {
    let mut v = vec![r.row.to_string()];
    v.extend(r.inputs.iter().map(|&b| (b as u8).to_string()));
    v.extend(r.voltages.iter().map(|x| format!("{x:.6}")));
    v.extend(r.decoded.iter().map(|d| d.symbol().to_string()));
    v.push(if r.pass { "pass" } else { "fail" }.into());
    v.push(format!("{:.6}", r.margin));
    v
}

fn check_circuit(flat: &FlatCircuit, table: &TruthTable) -> Result<(), HarnessError> {
    for (_, src) in &table.inputs {
        let found = flat
            .elements()
            .iter()
            .any(|e| e.name.eq_ignore_ascii_case(src) && matches!(e.device, Device::VSource(_)));
        if !found {
            return Err(HarnessError::MissingSource(src.clone()));
        }
    }
    for o in &table.outputs {
        if flat.node_index(&o.node).is_none() {
            return Err(HarnessError::MissingNode(o.node.clone()));
        }
    }
    Ok(())
}

fn apply(flat: &FlatCircuit, sources: &[(String, SourceSpec)]) -> FlatCircuit {
    let mut c = flat.clone();
    for (name, spec) in sources {
        c = c
            .with_source(name, *spec)
            .expect("sources checked before simulation");
    }
    c
}

fn score(table: &TruthTable, levels: &LogicLevels, row: usize, voltages: Vec<f64>) -> RowReport {
    let expected = table.expected[row].clone();
    let mut worst = f64::INFINITY;
    let mut decoded = Vec::with_capacity(voltages.len());
    for ((o, &v), &want) in table.outputs.iter().zip(&voltages).zip(&expected) {
        let l = o.levels.as_ref().unwrap_or(levels);
        let d = decode(v, l);
        let m = margin(v, l);
        worst = worst.min(if d.bit() == Some(!want) { -m } else { m });
        decoded.push(d);
    }
    let pass = decoded
        .iter()
        .zip(&expected)
        .all(|(d, &e)| d.bit() == Some(e));
    RowReport {
        row,
        inputs: table.row_bits(row),
        voltages,
        decoded,
        expected,
        pass,
        margin: worst,
    }
}

fn collect(
    table: &TruthTable,
    levels: &LogicLevels,
    results: Vec<Result<Vec<f64>, SolverError>>,
) -> Result<TruthTableReport, HarnessError> {
    let mut rows = Vec::with_capacity(results.len());
    for (row, r) in results.into_iter().enumerate() {
        let voltages = r.map_err(|source| HarnessError::Row { row, source })?;
        rows.push(score(table, levels, row, voltages));
    }
    Ok(TruthTableReport {
        input_names: table.inputs.iter().map(|(n, _)| n.clone()).collect(),
        output_names: table.outputs.iter().map(|o| o.name.clone()).collect(),
        rows,
    })
}

/// Simulate every row of `table` as its own transient run (in parallel) and
/// decode the sampled outputs. `t_opts` supplies step and method; the run is
/// extended past the last sample if `t_opts.t_stop` ends earlier. Logic
/// failures are reported per row; a solver failure aborts with the first
/// failing row's index. Outputs sampled at DC are read at `t = 0`.
pub fn verify_truth_table(
    circuit: &Netlist,
    table: &TruthTable,
    levels: &LogicLevels,
    clock: &ClockSpec,
    t_opts: &TransientOptions,
    s_opts: &SolverOptions,
) -> Result<TruthTableReport, HarnessError> {
    levels.validate()?;
    clock.validate()?;
    let flat = flatten(circuit)?;
    check_circuit(&flat, table)?;
    let plans = (0..table.expected.len())
        .map(|row| plan_stimulus(table, &table.row_bits(row), clock))
        .collect::<Result<Vec<_>, _>>()?;
    let probes: Vec<&str> = table.outputs.iter().map(|o| o.node.as_str()).collect();
    let results: Vec<Result<Vec<f64>, SolverError>> = plans
        .par_iter()
        .map(|plan| {
            let c = apply(&flat, &plan.sources);
            let last = plan.samples.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
            let mut opts = *t_opts;
            opts.t_stop = opts.t_stop.max(last + opts.dt);
            let wave = solve_transient(&c, &opts, s_opts, &probes)?;
            Ok(table
                .outputs
                .iter()
                .zip(&plan.samples)
                .map(|(o, t)| {
                    wave.value_at(&o.node, t.unwrap_or(0.0))
                        .expect("probed node")
                })
                .collect())
        })
        .collect();
    collect(table, levels, results)
}

/// Static counterpart of [`verify_truth_table`]: each row is one DC
/// operating point with the inputs at `0` or `levels.v_dd`.
pub fn verify_dc_table(
    circuit: &Netlist,
    table: &TruthTable,
    levels: &LogicLevels,
    s_opts: &SolverOptions,
) -> Result<TruthTableReport, HarnessError> {
    levels.validate()?;
    let flat = flatten(circuit)?;
    check_circuit(&flat, table)?;
    let results: Vec<Result<Vec<f64>, SolverError>> = (0..table.expected.len())
        .into_par_iter()
        .map(|row| {
            let sources: Vec<(String, SourceSpec)> = table
                .inputs
                .iter()
                .zip(table.row_bits(row))
                .map(|((_, s), b)| (s.clone(), SourceSpec::Dc(if b { levels.v_dd } else { 0.0 })))
                .collect();
            let op = solve_dc(&apply(&flat, &sources), s_opts, None)?;
            Ok(table
                .outputs
                .iter()
                .map(|o| op.voltage(&o.node).expect("checked node"))
                .collect())
        })
        .collect();
    collect(table, levels, results)
}
