//! Dormand–Prince 5(4) stepping for autonomous systems with a fixed-size
//! state.

use crate::error::Result;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Result of one trial step.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub y: [f64; N],
    /// Derivative at the new state (first stage of the next step).
    pub dy: [f64; N],
    /// Scaled error norm; the step is acceptable when it is at most 1.
    pub err: f64,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// One Dormand–Prince step of size `h` from `y` with `k1 = f(y)`. The error
/// norm uses a mixed absolute/relative scale `tol * (1 + |y_i|)`.
pub fn dopri5_step<const N: usize, F>(
    f: &F,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    tol: f64,
) -> Result<Step<N>>
where
    F: Fn(&[f64; N]) -> Result<[f64; N]>,
{
    let k2 = f(&axpy(y, h, &[(A21, k1)]))?;
    let k3 = f(&axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(&axpy(
        y,
        h,
        &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)],
    ))?;
    let k6 = f(&axpy(
        y,
        h,
        &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ))?;
    let y_new = axpy(
        y,
        h,
        &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
    );
    let k7 = f(&y_new)?;
    let e = axpy(
        &[0.0; N],
        h,
        &[
            (E1, k1),
            (E3, &k3),
            (E4, &k4),
            (E5, &k5),
            (E6, &k6),
            (E7, &k7),
        ],
    );
    let err = (0..N)
        .map(|i| e[i].abs() / (tol * (1.0 + y[i].abs().max(y_new[i].abs()))))
        .fold(0.0, f64::max);
    Ok(Step {
        y: y_new,
        dy: k7,
        err,
    })
}

/// Step-size update factor from the error norm, clamped to `[0.2, 5]`.
pub fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn harmonic_oscillator_over_one_period() {
        let f = |y: &[f64; 2]| Ok([y[1], -y[0]]);
        let mut y = [1.0, 0.0];
        let mut t = 0.0;
        let mut h: f64 = 0.01;
        let end = 2.0 * std::f64::consts::PI;
        while t < end {
            h = h.min(end - t);
            let k1 = f(&y).unwrap();
            let st = dopri5_step(&f, &y, &k1, h, 1e-12).unwrap();
            if st.err <= 1.0 {
                t += h;
                y = st.y;
            }
            h *= step_factor(st.err);
        }
        assert_abs_diff_eq!(y[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(y[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn fifth_order_convergence() {
        // Local error of a single step shrinks like h^6 on y' = y.
        let f = |y: &[f64; 1]| Ok([y[0]]);
        let err = |h: f64| {
            let st = dopri5_step(&f, &[1.0], &[1.0], h, 1.0).unwrap();
            (st.y[0] - h.exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 50.0 && ratio < 80.0, "ratio {ratio}");
    }
}
