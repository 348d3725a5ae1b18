use super::{DeviceEval, InvalidParams};

/// Forward current at which the exponential is continued linearly.
const KNEE_CURRENT: f64 = 1.0;

/// Behavioral rectifying diode: exponential forward conduction with a
/// parallel leak conductance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiodeParams {
    pub i_sat: f64,
    pub n_ideality: f64,
    pub v_thermal: f64,
    pub g_min: f64,
}

impl Default for DiodeParams {
    fn default() -> Self {
        Self {
            i_sat: 1e-15,
            n_ideality: 1.0,
            v_thermal: 0.02585,
            g_min: 1e-12,
        }
    }
}

impl DiodeParams {
    pub fn validate(&self) -> Result<(), InvalidParams> {
        let all_finite = [self.i_sat, self.n_ideality, self.v_thermal, self.g_min]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(InvalidParams::new("diode", "non-finite parameter"));
        }
        if self.i_sat <= 0.0 {
            return Err(InvalidParams::new("diode", "IS must be > 0"));
        }
        if self.n_ideality < 1.0 {
            return Err(InvalidParams::new("diode", "N must be >= 1"));
        }
        if self.v_thermal <= 0.0 {
            return Err(InvalidParams::new("diode", "VT must be > 0"));
        }
        if self.g_min < 0.0 {
            return Err(InvalidParams::new("diode", "GMIN must be >= 0"));
        }
        Ok(())
    }

    /// Voltage above which the exponential is replaced by its tangent line.
    pub fn v_knee(&self) -> f64 {
        self.n_ideality * self.v_thermal * (KNEE_CURRENT / self.i_sat).ln()
    }
}

/// Evaluate the diode at anode-to-cathode voltage `v`.
pub fn diode_eval(v: f64, p: &DiodeParams) -> DeviceEval {
    let nvt = p.n_ideality * p.v_thermal;
    let v_knee = p.v_knee();
    let (current, slope) = if v <= v_knee {
        let e = (v / nvt).exp();
        (p.i_sat * (e - 1.0), p.i_sat * e / nvt)
    } else {
        // tangent continuation of the exponential beyond the knee
        let e = (v_knee / nvt).exp();
        let slope = p.i_sat * e / nvt;
        (p.i_sat * (e - 1.0) + slope * (v - v_knee), slope)
    };
    DeviceEval {
        current: current + p.g_min * v,
        d_current_d_v: slope + p.g_min,
    }
}
