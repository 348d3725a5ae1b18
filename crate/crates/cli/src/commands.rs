//! Command implementations and error-to-exit-code mapping.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use molsim::gates::{
    build_diode_half_adder, build_full_adder, build_mobile_gate, build_ripple_adder,
    gate_testbench, FullAdderSpec, GateError, HalfAdderLevels, ThresholdGateSpec,
};
use molsim::harness::{
    verify_dc_table, verify_truth_table, HarnessError, TruthTable, TruthTableReport,
};
use molsim::netlist::{
    flatten, parse_netlist, serialize, Directive, FlatCircuit, Netlist, NetlistError,
};
use molsim::solver::{
    dc_sweep, solve_dc, solve_transient, sweep_csv, IntegrationMethod, SolverError,
    TransientOptions,
};

use crate::{Circuit, Command, Params};

const MAJ3_OUTPUT: &str = "y";
const VERIFY_STEP: f64 = 0.25e-9;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", .path.display())]
    Netlist { path: PathBuf, source: NetlistError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Gate(#[from] GateError),
}

fn solver_code(e: &SolverError) -> u8 {
    match e {
        SolverError::NoConvergence { .. } | SolverError::SingularMatrix => 3,
        _ => 2,
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(e) => solver_code(e),
            CliError::Harness(HarnessError::Row { source, .. }) => solver_code(source),
            _ => 2,
        }
    }
}

fn load(path: &Path) -> Result<Netlist, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_netlist(&text).map_err(|source| CliError::Netlist {
        path: path.to_path_buf(),
        source,
    })
}

fn elaborate(path: &Path, n: &Netlist) -> Result<FlatCircuit, CliError> {
    flatten(n).map_err(|source| CliError::Netlist {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(output: Option<&Path>, data: &str) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, data).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => io::stdout()
            .write_all(data.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

pub fn run(command: Command, params: &Params) -> Result<ExitCode, CliError> {
    match command {
        Command::Parse { file } => {
            let n = load(&file)?;
            let flat = elaborate(&file, &n)?;
            emit(None, &summary(&n, &flat))?;
        }
        Command::Op { file, output } => {
            let flat = elaborate(&file, &load(&file)?)?;
            let op = solve_dc(&flat, &params.solver(), None)?;
            eprintln!(
                "converged by {:?} in {} iterations",
                op.strategy, op.iterations
            );
            let width = op.node_names().iter().map(String::len).max().unwrap_or(1) + 3;
            let mut s = String::new();
            for (name, v) in op.node_names().iter().zip(&op.node_voltages).skip(1) {
                let _ = writeln!(s, "{:<width$} {v:.9e}", format!("v({name})"));
            }
            for name in &op.source_names {
                let i = op.source_current(name).unwrap_or(f64::NAN);
                let _ = writeln!(s, "{:<width$} {i:.9e}", format!("i({name})"));
            }
            emit(output.as_deref(), &s)?;
        }
        Command::Tran {
            file,
            tstop,
            probe,
            output,
        } => {
            let n = load(&file)?;
            let flat = elaborate(&file, &n)?;
            let directive = n.directives.iter().find_map(|d| match d {
                Directive::Tran { step, stop, method } => Some((*step, *stop, *method)),
                _ => None,
            });
            let step = params.dt.or(directive.map(|d| d.0));
            let stop = tstop.or(directive.map(|d| d.1));
            let (Some(step), Some(stop)) = (step, stop) else {
                return Err(CliError::Usage(format!(
                    "{}: no .tran directive; pass --dt and --tstop",
                    file.display()
                )));
            };
            let method = params
                .method()
                .or(directive.and_then(|d| d.2))
                .unwrap_or(IntegrationMethod::BackwardEuler);
            let probes: Vec<&str> = probe.iter().map(String::as_str).collect();
            let w = solve_transient(
                &flat,
                &TransientOptions::new(stop, step, method),
                &params.solver(),
                &probes,
            )?;
            for warning in &w.warnings {
                eprintln!("warning: {warning}");
            }
            emit(output.as_deref(), &w.to_csv())?;
        }
        Command::Sweep {
            file,
            source,
            from,
            to,
            step,
            output,
        } => {
            let n = load(&file)?;
            let flat = elaborate(&file, &n)?;
            let directive = n.directives.iter().find_map(|d| match d {
                Directive::Dc {
                    source,
                    start,
                    stop,
                    step,
                } => Some((source.clone(), *start, *stop, *step)),
                _ => None,
            });
            let d = directive.as_ref();
            let source = source.or(d.map(|d| d.0.clone()));
            let from = from.or(d.map(|d| d.1));
            let to = to.or(d.map(|d| d.2));
            let step = step.or(d.map(|d| d.3));
            let (Some(source), Some(from), Some(to), Some(step)) = (source, from, to, step) else {
                return Err(CliError::Usage(format!(
                    "{}: no .dc directive; pass --source, --from, --to and --step",
                    file.display()
                )));
            };
            let points = dc_sweep(&flat, &source, from, to, step, &params.solver())?;
            emit(output.as_deref(), &sweep_csv(&points))?;
        }
        Command::Gen {
            circuit,
            bits,
            output,
        } => {
            if bits.is_some() && circuit != Circuit::Ripple {
                return Err(CliError::Usage(
                    "a width is only accepted for `ripple`".into(),
                ));
            }
            let n = generate(circuit, bits.unwrap_or(2), params)?;
            emit(output.as_deref(), &serialize(&n))?;
        }
        Command::Verify {
            file,
            table,
            bits,
            csv,
        } => {
            let n = load(&file)?;
            let report = verify(&n, table, bits, params)?;
            emit(None, &report.to_text())?;
            if let Some(path) = csv {
                emit(Some(&path), &report.to_csv())?;
            }
            if !report.all_pass() {
                eprintln!(
                    "verification failed: {}/{} rows pass",
                    report.passed(),
                    report.rows.len()
                );
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn generate(circuit: Circuit, bits: usize, params: &Params) -> Result<Netlist, CliError> {
    let spec = FullAdderSpec {
        clock: params.clock(),
        devices: params.devices(),
    };
    Ok(match circuit {
        Circuit::Fulladder => build_full_adder(&spec)?,
        Circuit::Ripple => build_ripple_adder(bits, &spec)?,
        Circuit::Maj3 => {
            let gate = build_mobile_gate(
                &ThresholdGateSpec::majority3(MAJ3_OUTPUT),
                &spec.devices,
                &spec.clock,
            )?;
            gate_testbench(&gate, &spec.clock)
        }
        Circuit::Halfadder => build_diode_half_adder(&params.diode(), params.pullup)?,
    })
}

fn verify(
    n: &Netlist,
    table: Circuit,
    bits: usize,
    params: &Params,
) -> Result<TruthTableReport, CliError> {
    let levels = params.levels();
    let s_opts = params.solver();
    let t = match table {
        Circuit::Fulladder => TruthTable::full_adder(),
        Circuit::Maj3 => TruthTable::gate(&ThresholdGateSpec::majority3(MAJ3_OUTPUT)),
        Circuit::Ripple => {
            if !(1..=molsim::gates::MAX_RIPPLE_BITS).contains(&bits) {
                return Err(CliError::Usage(format!("unsupported ripple width {bits}")));
            }
            TruthTable::ripple(bits)
        }
        Circuit::Halfadder => {
            let t = TruthTable::half_adder(&HalfAdderLevels::default(), params.vdd);
            return Ok(verify_dc_table(n, &t, &levels, &s_opts)?);
        }
    };
    let dt = params.dt.unwrap_or(VERIFY_STEP);
    let method = params.method().unwrap_or(IntegrationMethod::BackwardEuler);
    // the harness extends the run to the last sample instant
    let t_opts = TransientOptions::new(dt, dt, method);
    Ok(verify_truth_table(
        n,
        &t,
        &levels,
        &params.clock(),
        &t_opts,
        &s_opts,
    )?)
}

fn summary(n: &Netlist, flat: &FlatCircuit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "title: {}", n.title);
    let _ = writeln!(s, "nodes: {}", flat.node_count() - 1);
    let mut kinds: BTreeMap<char, usize> = BTreeMap::new();
    for e in flat.elements() {
        *kinds.entry(e.device.kind().letter()).or_default() += 1;
    }
    let counts: Vec<String> = kinds.iter().map(|(k, c)| format!("{k}={c}")).collect();
    let _ = writeln!(
        s,
        "elements: {} ({})",
        flat.elements().len(),
        counts.join(" ")
    );
    let subckts: Vec<&str> = n.subckts.values().map(|d| d.name.as_str()).collect();
    let _ = writeln!(s, "subcircuits: {}", subckts.join(" "));
    let models: Vec<&str> = n.models.values().map(|m| m.name.as_str()).collect();
    let _ = writeln!(s, "models: {}", models.join(" "));
    for d in &n.directives {
        match d {
            Directive::Tran { step, stop, method } => {
                let method = match method {
                    Some(IntegrationMethod::Trapezoidal) => ", trap",
                    Some(IntegrationMethod::BackwardEuler) => ", be",
                    None => "",
                };
                let _ = writeln!(s, "tran: step {step:e} s, stop {stop:e} s{method}");
            }
            Directive::Dc {
                source,
                start,
                stop,
                step,
            } => {
                let _ = writeln!(s, "dc: {source} {start} to {stop} step {step}");
            }
        }
    }
    s
}
