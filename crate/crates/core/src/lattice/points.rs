//! Randomly shifted lattice points and their image in Gaussian space.

use super::cbc::GeneratingVector;
use super::normal::inv_normal_cdf_unchecked;
use crate::error::{check_len, Error, Result};

/// Points are clamped to [U_MIN, 1 − U_MIN] before Φ⁻¹.
pub const U_MIN: f64 = 1.0 / 9_007_199_254_740_992.0;

/// frac(k z / n + Δ) for k in 1..=n.
pub fn lattice_points(gv: &GeneratingVector, shift: &[f64], k: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; gv.s()];
    lattice_point_into(gv, shift, k, &mut out)?;
    Ok(out)
}

pub fn lattice_point_into(
    gv: &GeneratingVector,
    shift: &[f64],
    k: usize,
    out: &mut [f64],
) -> Result<()> {
    check_len("shift", gv.s(), shift.len())?;
    check_len("output", gv.s(), out.len())?;
    let n = gv.n() as u64;
    if k == 0 || k as u64 > n {
        return Err(Error::InvalidParameter(format!(
            "point index {k} outside 1..={n}"
        )));
    }
    for ((o, &z), &d) in out.iter_mut().zip(gv.z()).zip(shift) {
        let base = ((k as u64 * z as u64) % n) as f64 / n as f64;
        let v = base + d;
        *o = v - v.floor();
    }
    Ok(())
}

/// Componentwise Φ⁻¹ after clamping away from 0 and 1.
pub fn to_gaussian(u: &mut [f64]) {
    for x in u {
        *x = inv_normal_cdf_unchecked(x.clamp(U_MIN, 1.0 - U_MIN));
    }
}
