//! Not-a-knot cubic interpolating spline.
//!
//! Slopes at the knots are found from the usual C² continuity conditions and
//! evaluation is piecewise cubic Hermite, so value, first and second
//! derivative are all continuous.

use crate::error::{GeoError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl CubicSpline {
    pub fn not_a_knot(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(GeoError::InvalidSurface(
                "spline abscissae and ordinates differ in length".into(),
            ));
        }
        if n < 4 {
            return Err(GeoError::InvalidSurface(format!(
                "need at least 4 samples, got {n}"
            )));
        }
        if x.iter().chain(y).any(|t| !t.is_finite()) {
            return Err(GeoError::InvalidSurface("non-finite sample".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GeoError::InvalidSurface(
                "sample abscissae must be strictly increasing".into(),
            ));
        }

        let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let secant: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / dx[i]).collect();

        // Tridiagonal system in the knot slopes: sub[i] s[i-1] + diag[i] s[i] + sup[i] s[i+1] = rhs[i].
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];

        let d0 = x[2] - x[0];
        diag[0] = dx[1];
        sup[0] = d0;
        rhs[0] = ((dx[0] + 2.0 * d0) * dx[1] * secant[0] + dx[0] * dx[0] * secant[1]) / d0;

        for i in 1..n - 1 {
            sub[i] = dx[i];
            diag[i] = 2.0 * (dx[i - 1] + dx[i]);
            sup[i] = dx[i - 1];
            rhs[i] = 3.0 * (dx[i] * secant[i - 1] + dx[i - 1] * secant[i]);
        }

        let dn = x[n - 1] - x[n - 3];
        sub[n - 1] = dn;
        diag[n - 1] = dx[n - 3];
        rhs[n - 1] = (dx[n - 2] * dx[n - 2] * secant[n - 3]
            + (2.0 * dn + dx[n - 2]) * dx[n - 3] * secant[n - 2])
            / dn;

        let slopes = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            slopes,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    /// Value, first and second derivative. Outside the knot range the end
    /// cubic pieces are extrapolated.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let i = self.interval(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);

        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        let d1 = (6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1;
        let d2 = (12.0 * s - 6.0) * y0
            + (6.0 * s - 4.0) * m0
            + (-12.0 * s + 6.0) * y1
            + (6.0 * s - 2.0) * m1;
        (value, d1 / h, d2 / (h * h))
    }

    fn interval(&self, t: f64) -> usize {
        let last = self.x.len() - 2;
        match self.x.partition_point(|&k| k <= t) {
            0 => 0,
            p => (p - 1).min(last),
        }
    }
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(GeoError::InvalidSurface("singular spline system".into()));
    }
    c[0] = sup[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(GeoError::InvalidSurface("singular spline system".into()));
        }
        c[i] = if i + 1 < n { sup[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / pivot;
    }
    let mut out = d;
    for i in (0..n - 1).rev() {
        out[i] -= c[i] * out[i + 1];
    }
    Ok(out)
}
