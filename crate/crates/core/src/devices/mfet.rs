use super::InvalidParams;

/// Square-law three-terminal molecular transistor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfetParams {
    pub k_trans: f64,
    pub v_th: f64,
    pub lambda: f64,
}

impl Default for MfetParams {
    fn default() -> Self {
        Self {
            k_trans: 1e-3,
            v_th: 0.1,
            lambda: 0.0,
        }
    }
}

impl MfetParams {
    pub fn validate(&self) -> Result<(), InvalidParams> {
        if ![self.k_trans, self.v_th, self.lambda]
            .iter()
            .all(|x| x.is_finite())
        {
            return Err(InvalidParams::new("mfet", "non-finite parameter"));
        }
        if self.k_trans <= 0.0 {
            return Err(InvalidParams::new("mfet", "K must be > 0"));
        }
        if self.lambda < 0.0 {
            return Err(InvalidParams::new("mfet", "LAMBDA must be >= 0"));
        }
        Ok(())
    }
}

/// Drain current (drain to source) with transconductance and output conductance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfetEval {
    pub current: f64,
    /// d current / d v_gs
    pub gm: f64,
    /// d current / d v_ds
    pub gds: f64,
}

fn forward(v_gs: f64, v_ds: f64, p: &MfetParams) -> MfetEval {
    let vov = v_gs - p.v_th;
    if vov <= 0.0 {
        return MfetEval {
            current: 0.0,
            gm: 0.0,
            gds: 0.0,
        };
    }
    let clm = 1.0 + p.lambda * v_ds;
    if v_ds < vov {
        let core = vov * v_ds - 0.5 * v_ds * v_ds;
        MfetEval {
            current: p.k_trans * core * clm,
            gm: p.k_trans * v_ds * clm,
            gds: p.k_trans * ((vov - v_ds) * clm + core * p.lambda),
        }
    } else {
        let core = 0.5 * vov * vov;
        MfetEval {
            current: p.k_trans * core * clm,
            gm: p.k_trans * vov * clm,
            gds: p.k_trans * core * p.lambda,
        }
    }
}

/// Evaluate the transistor. For `v_ds < 0` the roles of drain and source
/// swap, so the current is odd under exchanging the two channel terminals.
pub fn mfet_eval(v_gs: f64, v_ds: f64, p: &MfetParams) -> MfetEval {
    if v_ds >= 0.0 {
        return forward(v_gs, v_ds, p);
    }
    // gate measured from the drain, which now acts as the source
    let r = forward(v_gs - v_ds, -v_ds, p);
    MfetEval {
        current: -r.current,
        gm: -r.gm,
        gds: r.gm + r.gds,
    }
}
