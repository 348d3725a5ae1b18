//! Driver-RTD sizing from a quasi-static view of the clock's rising edge.
//!
//! While the clock ramps, both RTDs sit on their first branch and carry the
//! same current. The load side (load RTD plus negative-weight transistors)
//! reaches its first current maximum at some output voltage `v*`; the driver
//! side (driver RTD plus positive-weight transistors, whose gate drive falls
//! as the output rises) can deliver at most `cap(v*)` there. If `cap(v*)`
//! exceeds the load's maximum the load switches first and the output latches
//! high, otherwise the driver switches and the output latches low.

use std::collections::BTreeMap;

use crate::devices::{mfet_eval, rtd_eval, MfetParams, RtdParams};

const GRID: usize = 400;

/// Gate voltages of the transistors that are on, per side.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Drive {
    pub driver_side: Vec<f64>,
    pub load_side: Vec<f64>,
}

/// First local maximum of `f` on `[0, span]`, refined by golden section;
/// the right end point when `f` keeps rising over the whole interval.
fn first_max(f: impl Fn(f64) -> f64, span: f64) -> (f64, f64) {
    let h = span / GRID as f64;
    let mut prev = f(0.0);
    for k in 1..=GRID {
        let cur = f(k as f64 * h);
        if cur < prev {
            let (mut a, mut b) = (((k as f64) - 2.0).max(0.0) * h, k as f64 * h);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..40 {
                let c = b - g * (b - a);
                let d = a + g * (b - a);
                if f(c) >= f(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            let x = 0.5 * (a + b);
            return (x, f(x));
        }
        prev = cur;
    }
    (span, prev)
}

/// Positive when the load switches first (output high).
pub(crate) fn switching_margin(
    rtd: &RtdParams,
    mfet: &MfetParams,
    driver_area: f64,
    load_area: f64,
    drive: &Drive,
    v_clock: f64,
) -> f64 {
    let driver = rtd.scaled(driver_area);
    let load = rtd.scaled(load_area);
    let load_current = |vo: f64| {
        rtd_eval(vo, &load).current
            + drive
                .load_side
                .iter()
                .map(|&vg| mfet_eval(vg, vo, mfet).current)
                .sum::<f64>()
    };
    let driver_current = |vd: f64, vo: f64| {
        rtd_eval(vd, &driver).current
            + drive
                .driver_side
                .iter()
                .map(|&vg| mfet_eval(vg - vo, vd, mfet).current)
                .sum::<f64>()
    };
    let (v_star, i_load) = first_max(load_current, v_clock);
    let (_, cap) = first_max(|vd| driver_current(vd, v_star), v_clock - v_star);
    cap - i_load
}

/// Driver area at which the decision for `drive` flips.
pub(crate) fn critical_area(
    rtd: &RtdParams,
    mfet: &MfetParams,
    load_area: f64,
    drive: &Drive,
    v_clock: f64,
) -> f64 {
    let m = |a: f64| switching_margin(rtd, mfet, a, load_area, drive, v_clock);
    let (mut lo, mut hi) = ((load_area * 1e-3).ln(), (load_area * 1e3).ln());
    if m(lo.exp()) > 0.0 {
        return lo.exp();
    }
    if m(hi.exp()) <= 0.0 {
        return hi.exp();
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if m(mid.exp()) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Result of sizing: the chosen driver area and the interval of driver
/// areas for which every row decides correctly (empty if `lo >= hi`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Sizing {
    pub driver_area: f64,
    pub window: (f64, f64),
}

/// Size the driver so that every `(drive, expected)` case decides correctly,
/// centring the area in the feasible window. An empty window still yields
/// its midpoint so the circuit can be simulated and the failure observed.
pub(crate) fn size_driver(
    rtd: &RtdParams,
    mfet: &MfetParams,
    load_area: f64,
    cases: &[(Drive, bool)],
    v_clock: f64,
) -> Sizing {
    let mut memo: BTreeMap<(Vec<u64>, Vec<u64>), f64> = BTreeMap::new();
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    for (drive, high) in cases {
        let key = (
            drive.driver_side.iter().map(|v| v.to_bits()).collect(),
            drive.load_side.iter().map(|v| v.to_bits()).collect(),
        );
        let crit = *memo
            .entry(key)
            .or_insert_with(|| critical_area(rtd, mfet, load_area, drive, v_clock));
        if *high {
            lo = lo.max(crit);
        } else {
            hi = hi.min(crit);
        }
    }
    let driver_area = match (lo > 0.0, hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo * 1.2,
        (false, true) => hi / 1.2,
        (false, false) => load_area,
    };
    Sizing {
        driver_area,
        window: (lo, hi),
    }
}

/// High output level of an RTD pair of equal areas with the load switched:
/// the root of `i(v) = i(v_clock − v)` above `v_clock − v_peak`.
pub(crate) fn output_high_level(rtd: &RtdParams, v_clock: f64) -> f64 {
    let f = |v: f64| rtd_eval(v, rtd).current - rtd_eval(v_clock - v, rtd).current;
    let (mut a, mut b) = ((v_clock - rtd.v_peak).max(0.5 * v_clock), v_clock);
    if f(a) > 0.0 || f(b) < 0.0 {
        return v_clock;
    }
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if f(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn none() -> Drive {
        Drive {
            driver_side: vec![],
            load_side: vec![],
        }
    }

    #[test]
    fn bare_pair_flips_at_equal_areas() {
        let r = RtdParams::default();
        let m = MfetParams::default();
        let crit = critical_area(&r, &m, 1.0, &none(), 1.0);
        assert!((crit - 1.0).abs() < 1e-3, "{crit}");
    }

    #[test]
    fn driver_transistor_lowers_critical_area() {
        let r = RtdParams::default();
        let m = MfetParams::default();
        let on = Drive {
            driver_side: vec![1.0],
            load_side: vec![],
        };
        let off = critical_area(&r, &m, 1.0, &none(), 1.0);
        let with = critical_area(&r, &m, 1.0, &on, 1.0);
        assert!(with < off - 0.05);
        let load_on = Drive {
            driver_side: vec![],
            load_side: vec![1.0],
        };
        assert!(critical_area(&r, &m, 1.0, &load_on, 1.0) > off + 0.05);
    }

    #[test]
    fn margin_sign_follows_area() {
        let r = RtdParams::default();
        let m = MfetParams::default();
        assert!(switching_margin(&r, &m, 1.2, 1.0, &none(), 1.0) > 0.0);
        assert!(switching_margin(&r, &m, 0.8, 1.0, &none(), 1.0) < 0.0);
    }

    #[test]
    fn high_level_is_a_balanced_current() {
        let r = RtdParams::default();
        let v = output_high_level(&r, 1.0);
        assert!(v > 0.9 && v < 1.0, "{v}");
        let diff = rtd_eval(v, &r).current - rtd_eval(1.0 - v, &r).current;
        assert!(diff.abs() < 1e-12);
    }
}
