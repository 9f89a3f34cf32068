//! Oracles written independently of `dga-core`'s implementation, used by
//! the acceptance suite.

use dga_core::lm_trainer::{jacobian, TrainingPattern};
use dga_core::mlp::MlpNetwork;

/// Residuals `y - t` over all patterns, straight from forward passes.
pub fn residuals(net: &MlpNetwork, patterns: &[TrainingPattern]) -> Vec<f64> {
    patterns
        .iter()
        .flat_map(|p| {
            let y = net.forward(&p.input).expect("pattern fits the network");
            y.into_iter().zip(&p.target).map(|(y, t)| y - t).collect::<Vec<_>>()
        })
        .collect()
}

/// Largest relative gap between the analytic Jacobian and central
/// differences with step `h`. The denominator is
/// `max(|analytic|, |numeric|, floor)`, so entries below `floor` are
/// compared in absolute terms.
pub fn jacobian_fd_error(net: &MlpNetwork, patterns: &[TrainingPattern], h: f64, floor: f64) -> f64 {
    let jac = jacobian(net, patterns).expect("patterns fit the network");
    let params = net.params();
    let mut worst: f64 = 0.0;
    let mut shifted = net.clone();
    for k in 0..params.len() {
        let mut p = params.clone();
        p[k] += h;
        shifted.set_params(&p).expect("same length");
        let plus = residuals(&shifted, patterns);
        p[k] -= 2.0 * h;
        shifted.set_params(&p).expect("same length");
        let minus = residuals(&shifted, patterns);
        for r in 0..plus.len() {
            let numeric = (plus[r] - minus[r]) / (2.0 * h);
            let analytic = jac.get(r, k);
            let denom = analytic.abs().max(numeric.abs()).max(floor);
            worst = worst.max((analytic - numeric).abs() / denom);
        }
    }
    worst
}

/// `(low, low inclusive, high, high inclusive, code)`.
pub type Interval = (f64, bool, f64, bool, u8);

/// Rogers intervals per ratio position, transcribed from the coding table.
pub fn rogers_intervals(position: usize) -> Vec<Interval> {
    let inf = f64::INFINITY;
    match position {
        0 => vec![(0.0, true, 0.1, true, 5), (0.1, false, 1.0, false, 0), (1.0, true, 3.0, false, 1), (3.0, true, inf, false, 2)],
        1 => vec![(0.0, true, 1.0, false, 0), (1.0, true, inf, false, 1)],
        2 => vec![(0.0, true, 1.0, false, 0), (1.0, true, 3.0, false, 1), (3.0, true, inf, false, 2)],
        3 => vec![(0.0, true, 0.5, false, 0), (0.5, true, 3.0, false, 1), (3.0, true, inf, false, 2)],
        _ => panic!("Rogers position {position}"),
    }
}

/// IEC intervals per ratio position (C2H2/C2H4, CH4/H2, C2H4/C2H6).
pub fn iec_intervals(position: usize) -> Vec<Interval> {
    let inf = f64::INFINITY;
    let codes: [u8; 4] = match position {
        0 => [0, 1, 1, 2],
        1 => [1, 0, 2, 2],
        2 => [0, 0, 1, 2],
        _ => panic!("IEC position {position}"),
    };
    vec![
        (0.0, true, 0.1, false, codes[0]),
        (0.1, true, 1.0, false, codes[1]),
        (1.0, true, 3.0, true, codes[2]),
        (3.0, false, inf, false, codes[3]),
    ]
}

pub fn interval_contains(&(lo, lo_in, hi, hi_in, _): &Interval, r: f64) -> bool {
    (if lo_in { r >= lo } else { r > lo }) && (if hi_in { r <= hi } else { r < hi })
}

/// 10^4 + 1 evenly spaced points on `[0, 10]` plus the boundary points.
pub fn sweep_values() -> Vec<f64> {
    let mut v: Vec<f64> = (0..=10_000).map(|i| 10.0 * i as f64 / 10_000.0).collect();
    v.extend([0.1, 0.5, 1.0, 3.0]);
    v
}
