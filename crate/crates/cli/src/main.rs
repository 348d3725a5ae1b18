//! `molsim` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error,
//! 3 solver non-convergence. Data goes to stdout (or `-o`), diagnostics to
//! stderr.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use molsim::devices::{DiodeParams, MfetParams, RtdParams};
use molsim::gates::{logic_diode, ClockSpec, DeviceSet};
use molsim::harness::LogicLevels;
use molsim::netlist::units::parse_value;
use molsim::solver::{IntegrationMethod, SolverOptions};

#[derive(Debug, Parser)]
#[command(
    name = "molsim",
    version,
    about = "Molecular RTD/transistor logic simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    params: Params,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and elaborate a netlist, then print a summary.
    Parse { file: PathBuf },
    /// DC operating point.
    Op {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Transient analysis as CSV; step and stop time default to the
    /// netlist's `.tran` directive.
    Tran {
        file: PathBuf,
        #[arg(long, value_parser = number)]
        tstop: Option<f64>,
        /// Probed nodes, comma separated (default: all).
        #[arg(long, value_delimiter = ',')]
        probe: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// DC sweep of one voltage source as CSV; defaults come from `.dc`.
    Sweep {
        file: PathBuf,
        #[arg(long)]
        source: Option<String>,
        #[arg(long, value_parser = number, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, value_parser = number, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long, value_parser = number)]
        step: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a netlist.
    Gen {
        circuit: Circuit,
        /// Width of a ripple adder.
        bits: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Simulate every truth-table row and print the report.
    Verify {
        file: PathBuf,
        #[arg(long)]
        table: Circuit,
        /// Width for `--table ripple`.
        #[arg(long, default_value_t = 2)]
        bits: usize,
        /// Also write the report as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Circuit {
    Fulladder,
    Maj3,
    Halfadder,
    Ripple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Be,
    Trap,
}

/// Physical and numerical parameters shared by all commands.
#[derive(Debug, Args)]
struct Params {
    /// Clock high level and logic supply, volts.
    #[arg(long, global = true, default_value = "1", value_parser = number)]
    vdd: f64,
    #[arg(long, global = true, default_value = "100n", value_parser = number)]
    period: f64,
    /// Clock rise and fall time.
    #[arg(long, global = true, default_value = "3n", value_parser = number)]
    edge: f64,
    #[arg(long, global = true, default_value = "1m", value_parser = number)]
    rtd_ip: f64,
    #[arg(long, global = true, default_value = "0.25", value_parser = number)]
    rtd_vp: f64,
    #[arg(long, global = true, default_value = "0.1m", value_parser = number)]
    rtd_iv: f64,
    #[arg(long, global = true, default_value = "0.5", value_parser = number)]
    rtd_vv: f64,
    #[arg(long, global = true, default_value = "0.25", value_parser = number)]
    rtd_vr2: f64,
    #[arg(long, global = true, default_value = "1m", value_parser = number)]
    mfet_k: f64,
    #[arg(long, global = true, default_value = "0.1", value_parser = number)]
    mfet_vth: f64,
    #[arg(long, global = true, default_value = "0", value_parser = number)]
    mfet_lambda: f64,
    /// Saturation current of the half adder's logic diodes.
    #[arg(long, global = true, default_value = "1u", value_parser = number)]
    diode_is: f64,
    /// Half adder pull-up and pull-down resistance.
    #[arg(long, global = true, default_value = "10k", value_parser = number)]
    pullup: f64,
    /// Logic-0 ceiling (default 0.2·vdd).
    #[arg(long, global = true, value_parser = number)]
    v_il: Option<f64>,
    /// Logic-1 floor (default 0.8·vdd).
    #[arg(long, global = true, value_parser = number)]
    v_ih: Option<f64>,
    /// Transient step for `verify` and the `tran` default.
    #[arg(long, global = true, value_parser = number)]
    dt: Option<f64>,
    #[arg(long, global = true, value_enum)]
    method: Option<Method>,
    #[arg(long, global = true, default_value = "1e-9", value_parser = number)]
    abstol: f64,
    #[arg(long, global = true, default_value = "1e-6", value_parser = number)]
    reltol: f64,
    #[arg(long, global = true, default_value_t = 100)]
    itl: usize,
    /// Seed for randomized utilities; no current command draws random numbers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

impl Params {
    fn devices(&self) -> DeviceSet {
        DeviceSet {
            rtd: RtdParams {
                i_peak: self.rtd_ip,
                v_peak: self.rtd_vp,
                i_valley: self.rtd_iv,
                v_valley: self.rtd_vv,
                v_rise2: self.rtd_vr2,
            },
            mfet: MfetParams {
                k_trans: self.mfet_k,
                v_th: self.mfet_vth,
                lambda: self.mfet_lambda,
            },
        }
    }

    fn diode(&self) -> DiodeParams {
        DiodeParams {
            i_sat: self.diode_is,
            ..logic_diode()
        }
    }

    fn clock(&self) -> ClockSpec {
        ClockSpec {
            v_high: self.vdd,
            period: self.period,
            rise: self.edge,
            fall: self.edge,
            offsets: [0.0, 0.5 * self.period],
            gap: 0.1 * self.period,
        }
    }

    fn levels(&self) -> LogicLevels {
        let d = LogicLevels::for_supply(self.vdd);
        LogicLevels {
            v_il: self.v_il.unwrap_or(d.v_il),
            v_ih: self.v_ih.unwrap_or(d.v_ih),
            ..d
        }
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions {
            abstol: self.abstol,
            reltol: self.reltol,
            itl_newton: self.itl,
            ..SolverOptions::default()
        }
    }

    fn method(&self) -> Option<IntegrationMethod> {
        self.method.map(|m| match m {
            Method::Be => IntegrationMethod::BackwardEuler,
            Method::Trap => IntegrationMethod::Trapezoidal,
        })
    }
}

fn number(s: &str) -> Result<f64, String> {
    parse_value(s).ok_or_else(|| format!("`{s}` is not a number"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command, &cli.params) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
