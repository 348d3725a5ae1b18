use super::{DeviceEval, InvalidParams};

/// Peak/valley description of a resonant tunneling diode.
///
/// The I-V curve is odd-symmetric and built from three pieces on `v >= 0`:
///
/// * `[0, v_peak]`: quadratic rise `i_peak * (2s - s^2)`, `s = v / v_peak`,
///   which is the cubic Hermite segment with end slopes `2 i_peak / v_peak`
///   and `0`.
/// * `[v_peak, v_valley]`: cubic Hermite fall with zero slope at both ends.
/// * `v >= v_valley`: `i_valley * (1 + u^2)`, `u = (v - v_valley) / v_rise2`,
///   which reaches `i_peak` at `v_valley + v_rise2 * sqrt(pvr - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtdParams {
    pub i_peak: f64,
    pub v_peak: f64,
    pub i_valley: f64,
    pub v_valley: f64,
    pub v_rise2: f64,
}

impl Default for RtdParams {
    fn default() -> Self {
        Self {
            i_peak: 1e-3,
            v_peak: 0.25,
            i_valley: 1e-4,
            v_valley: 0.5,
            v_rise2: 0.25,
        }
    }
}

impl RtdParams {
    pub fn validate(&self) -> Result<(), InvalidParams> {
        let vals = [
            self.i_peak,
            self.v_peak,
            self.i_valley,
            self.v_valley,
            self.v_rise2,
        ];
        if !vals.iter().all(|x| x.is_finite()) {
            return Err(InvalidParams::new("rtd", "non-finite parameter"));
        }
        if !(0.0 < self.v_peak && self.v_peak < self.v_valley) {
            return Err(InvalidParams::new("rtd", "need 0 < VP < VV"));
        }
        if !(0.0 < self.i_valley && self.i_valley < self.i_peak) {
            return Err(InvalidParams::new("rtd", "need 0 < IV < IP"));
        }
        if self.v_rise2 <= 0.0 {
            return Err(InvalidParams::new("rtd", "VR2 must be > 0"));
        }
        Ok(())
    }

    /// Currents multiplied by a device area factor.
    pub fn scaled(&self, area: f64) -> Self {
        Self {
            i_peak: self.i_peak * area,
            i_valley: self.i_valley * area,
            ..*self
        }
    }

    pub fn pvr(&self) -> f64 {
        self.i_peak / self.i_valley
    }
}

fn rtd_positive(v: f64, p: &RtdParams) -> (f64, f64) {
    if v <= p.v_peak {
        let s = (v / p.v_peak).min(1.0);
        (
            p.i_peak * s * (2.0 - s),
            2.0 * p.i_peak * (1.0 - s) / p.v_peak,
        )
    } else if v < p.v_valley {
        let w = p.v_valley - p.v_peak;
        let t = (v - p.v_peak) / w;
        let drop = p.i_valley - p.i_peak;
        (
            p.i_peak + drop * t * t * (3.0 - 2.0 * t),
            drop * 6.0 * t * (1.0 - t) / w,
        )
    } else {
        let u = (v - p.v_valley) / p.v_rise2;
        (p.i_valley * (1.0 + u * u), 2.0 * p.i_valley * u / p.v_rise2)
    }
}

/// Evaluate the RTD at terminal voltage `v`.
pub fn rtd_eval(v: f64, p: &RtdParams) -> DeviceEval {
    let (i, g) = rtd_positive(v.abs(), p);
    DeviceEval {
        current: if v < 0.0 { -i } else { i },
        d_current_d_v: g,
    }
}
