//! Peak/valley extraction from a sampled I-V characteristic.

use super::HarnessError;

const MIN_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvShapeReport {
    pub v_peak: f64,
    pub i_peak: f64,
    pub v_valley: f64,
    pub i_valley: f64,
    pub ndr_present: bool,
    /// Peak-to-valley current ratio.
    pub pvr: f64,
}

/// Locate the first local current maximum and the local minimum after it.
/// `v` must be strictly increasing.
pub fn analyze_iv(v: &[f64], i: &[f64]) -> Result<IvShapeReport, HarnessError> {
    if v.len() != i.len() {
        return Err(HarnessError::InvalidTrace(format!(
            "{} voltages for {} currents",
            v.len(),
            i.len()
        )));
    }
    if v.len() < MIN_POINTS {
        return Err(HarnessError::InvalidTrace(format!(
            "need at least {MIN_POINTS} points, got {}",
            v.len()
        )));
    }
    if v.iter().chain(i).any(|x| !x.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HarnessError::InvalidTrace(
            "voltages must be finite and strictly increasing".into(),
        ));
    }
    let n = v.len();
    let peak = (1..n - 1)
        .find(|&k| i[k] >= i[k - 1] && i[k] > i[k + 1])
        .ok_or_else(|| HarnessError::ShapeNotFound("no local current maximum".into()))?;
    let valley = (peak + 1..n - 1)
        .find(|&k| i[k] <= i[k - 1] && i[k] < i[k + 1])
        .ok_or_else(|| HarnessError::ShapeNotFound("no local minimum after the peak".into()))?;
    let (i_peak, i_valley) = (i[peak], i[valley]);
    Ok(IvShapeReport {
        v_peak: v[peak],
        i_peak,
        v_valley: v[valley],
        i_valley,
        ndr_present: i_peak > i_valley,
        pvr: i_peak / i_valley,
    })
}
