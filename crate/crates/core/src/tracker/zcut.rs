use serde::{Deserialize, Serialize};

use crate::layout::Line;
use crate::scalar::Scalar;

/// Progress of the right-border-then-left-border line switch gesture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ZcutState {
    #[default]
    Idle,
    RightReached,
}

/// Steps the Z-cut detector over `line`'s border zones.
pub fn detect_z_cut<T: Scalar>(state: ZcutState, x_px: T, line: &Line<T>, fraction: T) -> (ZcutState, bool) {
    detect_z_cut_between(state, x_px, line.x_left_px, line.x_right_px, fraction)
}

/// Same as [`detect_z_cut`] for an explicit horizontal extent.
///
/// Fires when `x` is within `fraction·width` of the left border while the
/// right zone has been reached; firing returns to idle.
pub fn detect_z_cut_between<T: Scalar>(
    state: ZcutState,
    x_px: T,
    x_left: T,
    x_right: T,
    fraction: T,
) -> (ZcutState, bool) {
    let margin = (x_right - x_left) * fraction;
    match state {
        ZcutState::RightReached if x_px <= x_left + margin => (ZcutState::Idle, true),
        _ if x_px >= x_right - margin => (ZcutState::RightReached, false),
        s => (s, false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(xs: &[f64]) -> Vec<bool> {
        let mut s = ZcutState::Idle;
        xs.iter()
            .map(|&x| {
                let (n, fired) = detect_z_cut_between(s, x, 0.0, 1000.0, 0.2);
                s = n;
                fired
            })
            .collect()
    }

    #[test]
    fn zone_arithmetic() {
        assert_eq!(run(&[850.0, 150.0]), vec![false, true]);
        assert_eq!(run(&[750.0, 150.0]), vec![false, false]);
        assert_eq!(run(&[850.0, 450.0, 850.0, 150.0]), vec![false, false, false, true]);
        // Zone borders are inclusive.
        assert_eq!(run(&[800.0, 200.0]), vec![false, true]);
        // Firing resets; a second left sample does not fire again.
        assert_eq!(run(&[900.0, 100.0, 100.0]), vec![false, true, false]);
    }
}
