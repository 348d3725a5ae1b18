//! Diode-logic half adder.
//!
//! - carry: diode AND, anodes tied to `carry` with a pull-up to `vdd`
//! - `or`: diode OR with a pull-down
//! - sum: `or` and `carry` are averaged onto node `m` through two equal
//!   resistors and drive an RTD in series with a sense resistor. One high
//!   input biases the RTD near its peak, two push it into the valley, none
//!   leave it near zero, so the sense voltage is `a XOR b`.
//!
//! The sum stage works in current mode: its swing is bounded by the RTD's
//! peak current times the largest series resistance that still gives a
//! single operating point, so it has its own decision levels
//! ([`HalfAdderLevels`]).

use super::GateError;
use crate::devices::{DiodeParams, RtdParams};
use crate::netlist::{ElementDecl, ElementKind, ModelCard, Netlist, SourceSpec, GROUND};

pub const DIODE_MODEL: &str = "DLOGIC";
pub const XOR_RTD_MODEL: &str = "RTDX";

const SUPPLY: f64 = 1.0;
const SUM_RESISTOR: f64 = 10e3;
const SENSE_RESISTOR: f64 = 8e3;

/// RTD card of the sum stage.
pub fn xor_rtd() -> RtdParams {
    RtdParams {
        i_peak: 20e-6,
        v_peak: 0.2,
        i_valley: 2e-6,
        v_valley: 0.6,
        v_rise2: 0.5,
    }
}

/// Rectifier with a low turn-on voltage, the default for the half adder.
pub fn logic_diode() -> DiodeParams {
    DiodeParams {
        i_sat: 1e-6,
        ..DiodeParams::default()
    }
}

/// Decision levels for the half adder outputs at DC, in volts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfAdderLevels {
    pub carry: (f64, f64),
    pub sum: (f64, f64),
}

impl Default for HalfAdderLevels {
    fn default() -> Self {
        Self {
            carry: (0.2 * SUPPLY, 0.8 * SUPPLY),
            sum: (0.05, 0.12),
        }
    }
}

/// Half adder with supply `VDD`, input sources `VA`/`VB` (0 V until set)
/// and outputs on nodes `sum` and `carry`. `pullup` is the AND pull-up and
/// the OR pull-down resistance.
pub fn build_diode_half_adder(diode: &DiodeParams, pullup: f64) -> Result<Netlist, GateError> {
    diode.validate()?;
    if !(pullup.is_finite() && pullup > 0.0) {
        return Err(GateError::InvalidSpec(format!(
            "pull resistance must be positive, got {pullup}"
        )));
    }
    let mut n = Netlist::new("diode-logic half adder");
    n.add_model(ModelCard::diode(DIODE_MODEL, diode));
    n.add_model(ModelCard::rtd(XOR_RTD_MODEL, &xor_rtd()));
    let d = |name: &str, anode: &str, cathode: &str| {
        ElementDecl::device(name, ElementKind::Diode, &[anode, cathode], DIODE_MODEL)
    };
    n.elements = vec![
        ElementDecl::vsource("VDD", "vdd", GROUND, SourceSpec::Dc(SUPPLY)),
        ElementDecl::vsource("VA", "a", GROUND, SourceSpec::Dc(0.0)),
        ElementDecl::vsource("VB", "b", GROUND, SourceSpec::Dc(0.0)),
        ElementDecl::resistor("RPU", "vdd", "carry", pullup),
        d("DAND1", "carry", "a"),
        d("DAND2", "carry", "b"),
        d("DOR1", "a", "or"),
        d("DOR2", "b", "or"),
        ElementDecl::resistor("RPD", "or", GROUND, pullup),
        ElementDecl::resistor("RSUM1", "or", "m", SUM_RESISTOR),
        ElementDecl::resistor("RSUM2", "carry", "m", SUM_RESISTOR),
        ElementDecl::device("TXOR", ElementKind::Rtd, &["m", "sum"], XOR_RTD_MODEL),
        ElementDecl::resistor("RSENSE", "sum", GROUND, SENSE_RESISTOR),
    ];
    Ok(n)
}
