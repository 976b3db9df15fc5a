//! Dormand-Prince 5(4) integrator for small autonomous systems. The stage
//! nodes never appear because the right-hand side has no explicit `s`.

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Fifth minus fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub(crate) struct StepControl {
    pub tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Failure {
    /// The vector field or the state check refused a state near arc length `s`.
    Domain { s: f64 },
    Underflow { s: f64 },
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(&[f64; N], f64)]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(k, a)| a * k[i]).sum::<f64>())
}

/// Integrate `y' = f(y)` from 0 to `s_end`.
///
/// `f` returns `None` outside its domain. `extra_error(old, new)` adds a
/// normalized error contribution (accept when `<= 1`), used for conserved
/// quantity monitors. `on_accept(s, y)` sees every accepted state.
pub(crate) fn integrate<const N: usize>(
    mut f: impl FnMut(&[f64; N]) -> Option<[f64; N]>,
    y0: [f64; N],
    s_end: f64,
    ctl: StepControl,
    extra_error: impl Fn(&[f64; N], &[f64; N]) -> f64,
    mut on_accept: impl FnMut(f64, &[f64; N]),
) -> Result<[f64; N], Failure> {
    let mut y = y0;
    let mut s = 0.0;
    if s_end <= 0.0 {
        return Ok(y);
    }
    let mut k1 = f(&y).ok_or(Failure::Domain { s: 0.0 })?;
    let mut h = ctl.h_init.min(s_end);
    let mut steps = 0;

    while s < s_end {
        steps += 1;
        if steps > ctl.max_steps {
            return Err(Failure::Underflow { s });
        }
        let last = s + h >= s_end;
        let h_step = if last { s_end - s } else { h };

        match try_step(&mut f, &y, &k1, h_step, ctl.tol) {
            Some((y_new, k7, err)) => {
                let err = err.max(extra_error(&y, &y_new));
                if err <= 1.0 {
                    s = if last { s_end } else { s + h_step };
                    y = y_new;
                    k1 = k7;
                    on_accept(s, &y);
                    let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    h = h_step * fac;
                } else {
                    h = h_step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                }
            }
            None => {
                h = h_step * 0.25;
                if h < ctl.h_min {
                    return Err(Failure::Domain { s });
                }
                continue;
            }
        }
        if h < ctl.h_min && s < s_end {
            return Err(Failure::Underflow { s });
        }
    }
    Ok(y)
}

fn try_step<const N: usize>(
    f: &mut impl FnMut(&[f64; N]) -> Option<[f64; N]>,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    tol: f64,
) -> Option<([f64; N], [f64; N], f64)> {
    let k2 = f(&axpy(y, h, &[(k1, A2[0])]))?;
    let k3 = f(&axpy(y, h, &[(k1, A3[0]), (&k2, A3[1])]))?;
    let k4 = f(&axpy(y, h, &[(k1, A4[0]), (&k2, A4[1]), (&k3, A4[2])]))?;
    let k5 = f(&axpy(
        y,
        h,
        &[(k1, A5[0]), (&k2, A5[1]), (&k3, A5[2]), (&k4, A5[3])],
    ))?;
    let k6 = f(&axpy(
        y,
        h,
        &[(k1, A6[0]), (&k2, A6[1]), (&k3, A6[2]), (&k4, A6[3]), (&k5, A6[4])],
    ))?;
    let y_new = axpy(
        y,
        h,
        &[(k1, B[0]), (&k3, B[2]), (&k4, B[3]), (&k5, B[4]), (&k6, B[5])],
    );
    let k7 = f(&y_new)?;

    let mut err = 0.0f64;
    for i in 0..N {
        let e = h
            * (E[0] * k1[i] + E[2] * k3[i] + E[3] * k4[i] + E[4] * k5[i] + E[5] * k6[i] + E[6] * k7[i]);
        let scale = tol * (1.0 + y[i].abs().max(y_new[i].abs()));
        err = err.max(e.abs() / scale);
    }
    if !err.is_finite() {
        return None;
    }
    Some((y_new, k7, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctl(tol: f64) -> StepControl {
        StepControl {
            tol,
            h_init: 0.01,
            h_min: 1e-14,
            max_steps: 1_000_000,
        }
    }

    #[test]
    fn harmonic_oscillator() {
        let y = integrate(|y: &[f64; 2]| Some([y[1], -y[0]]), [1.0, 0.0], 10.0, ctl(1e-12), |_, _| 0.0, |_, _| {})
            .unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((y[1] + 10f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn lands_exactly_on_the_end() {
        let mut last = 0.0;
        integrate(|_: &[f64; 1]| Some([1.0]), [0.0], 2.5, ctl(1e-10), |_, _| 0.0, |s, _| last = s).unwrap();
        assert_eq!(last, 2.5);
    }

    #[test]
    fn reports_domain_exit() {
        let r = integrate(
            |y: &[f64; 1]| (y[0] < 1.0).then_some([1.0]),
            [0.0],
            2.0,
            ctl(1e-10),
            |_, _| 0.0,
            |_, _| {},
        );
        match r {
            Err(Failure::Domain { s }) => assert!((s - 1.0).abs() < 1e-6, "{s}"),
            other => panic!("{other:?}"),
        }
    }
}
