//! Arc-length geodesics on a [`ProfileSurface`] and the exponential map.
//!
//! With `F = 0` the geodesic equations reduce to
//!
//! ```text
//! u'' = -(E_u / 2E) u'^2 + (G_u / 2E) v'^2
//! v'' = -(G_u / G) u' v'
//! ```
//!
//! and `G v' = rho cos(alpha)` is the Clairaut first integral. Steps are
//! rejected when either the embedded error estimate or the change of that
//! integral (or of the unit-speed residual) exceeds the tolerance.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::ode::{self, Failure, StepControl};
use crate::surface::{wrap_angle, Metric, ProfileSurface, SurfacePoint, TangentVector};

/// Default integration tolerance per unit arc length.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Launch headings with `|cos theta|` at or below this are exact meridians.
const MERIDIAN_EPS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicState {
    pub u: f64,
    pub v: f64,
    pub du: f64,
    pub dv: f64,
}

impl GeodesicState {
    pub fn point(&self) -> SurfacePoint {
        SurfacePoint::new(self.u, self.v)
    }

    /// Unit-speed launch state from a heading.
    pub fn launch(surface: &ProfileSurface, p: SurfacePoint, theta: f64) -> Result<Self> {
        surface.check_point(p)?;
        let m = surface.jet(p.u).metric();
        let (s, c) = theta.sin_cos();
        Ok(Self {
            u: p.u,
            v: p.v,
            du: s / m.e.sqrt(),
            dv: c / m.g.sqrt(),
        })
    }

    /// `E u'^2 + G v'^2`.
    pub fn speed_squared(&self, surface: &ProfileSurface) -> f64 {
        let m = surface.jet(self.u).metric();
        m.e * self.du * self.du + m.g * self.dv * self.dv
    }

    /// `G v'`, which equals `rho cos(alpha)` for a unit-speed state.
    pub fn clairaut(&self, surface: &ProfileSurface) -> f64 {
        let phi = surface.jet(self.u).phi;
        phi * phi * self.dv
    }

    /// Heading of the velocity in the orthonormal frame.
    pub fn heading(&self, surface: &ProfileSurface) -> f64 {
        let m = surface.jet(self.u).metric();
        (m.e.sqrt() * self.du).atan2(m.g.sqrt() * self.dv)
    }

    pub fn tangent(&self, surface: &ProfileSurface) -> TangentVector {
        let m = surface.jet(self.u).metric();
        TangentVector {
            point: self.point(),
            a_par: m.g.sqrt() * self.dv,
            a_mer: m.e.sqrt() * self.du,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSample {
    pub s: f64,
    #[serde(flatten)]
    pub state: GeodesicState,
}

/// An arc-length sampled geodesic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicPath {
    #[serde(skip)]
    pub samples: Vec<PathSample>,
    pub start: SurfacePoint,
    pub end: SurfacePoint,
    pub length: f64,
    /// Clairaut constant at launch.
    pub c_nominal: f64,
    /// Largest deviation of the Clairaut integral from `c_nominal`.
    pub c_drift: f64,
    /// Largest deviation of the squared speed from 1.
    pub speed_drift: f64,
    pub start_heading: f64,
    /// Heading of travel at the end point.
    pub end_heading: f64,
}

impl GeodesicPath {
    pub fn zero_length(surface: &ProfileSurface, p: SurfacePoint, theta: f64) -> Result<Self> {
        let state = GeodesicState::launch(surface, p, theta)?;
        let c = state.clairaut(surface);
        let theta = wrap_angle(theta);
        Ok(Self {
            samples: vec![PathSample { s: 0.0, state }],
            start: p,
            end: p,
            length: 0.0,
            c_nominal: c,
            c_drift: 0.0,
            speed_drift: 0.0,
            start_heading: theta,
            end_heading: theta,
        })
    }

    pub fn departure(&self) -> TangentVector {
        let (s, c) = self.start_heading.sin_cos();
        TangentVector {
            point: self.start,
            a_par: c,
            a_mer: s,
        }
    }

    /// The same geodesic traversed from `end` to `start`.
    pub fn reversed(&self) -> Self {
        let length = self.length;
        let samples = self
            .samples
            .iter()
            .rev()
            .map(|p| PathSample {
                s: (length - p.s).max(0.0),
                state: GeodesicState {
                    du: -p.state.du,
                    dv: -p.state.dv,
                    ..p.state
                },
            })
            .collect();
        Self {
            samples,
            start: self.end,
            end: self.start,
            length,
            c_nominal: -self.c_nominal,
            c_drift: self.c_drift,
            speed_drift: self.speed_drift,
            start_heading: wrap_angle(self.end_heading + PI),
            end_heading: wrap_angle(self.start_heading + PI),
        }
    }

    /// CSV polyline: `s,u,v,du,dv,x,y,z,clairaut_c` with `v` reduced to `[0, 2pi)`.
    pub fn write_csv<W: Write>(&self, surface: &ProfileSurface, mut w: W) -> io::Result<()> {
        writeln!(w, "s,u,v,du,dv,x,y,z,clairaut_c")?;
        for p in &self.samples {
            let st = p.state;
            let x = surface.embed_unchecked(st.point());
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                p.s,
                st.u,
                st.v.rem_euclid(std::f64::consts::TAU),
                st.du,
                st.dv,
                x[0],
                x[1],
                x[2],
                st.clairaut(surface)
            )?;
        }
        Ok(())
    }
}

/// Right-hand side of the geodesic equations: `(u', v', u'', v'')`.
pub fn geodesic_derivative(surface: &ProfileSurface, state: &GeodesicState) -> Result<[f64; 4]> {
    surface.check_u(state.u)?;
    Ok(rhs(surface, state.u, state.du, state.dv))
}

fn rhs(surface: &ProfileSurface, u: f64, du: f64, dv: f64) -> [f64; 4] {
    rhs_with(&surface.jet(u).metric(), du, dv)
}

fn rhs_with(m: &Metric, du: f64, dv: f64) -> [f64; 4] {
    let ddu = -(m.e_u / (2.0 * m.e)) * du * du + (m.g_u / (2.0 * m.e)) * dv * dv;
    let ddv = -(m.g_u / m.g) * du * dv;
    [du, dv, ddu, ddv]
}

/// Clairaut constant `rho cos(theta)` of the geodesic leaving `p` at heading `theta`.
pub fn clairaut_constant(surface: &ProfileSurface, p: SurfacePoint, theta: f64) -> f64 {
    surface.jet(p.u).phi * theta.cos()
}

/// Exponential map: follow the geodesic leaving `p` at heading `theta` for
/// arc length `length`.
pub fn shoot(
    surface: &ProfileSurface,
    p: SurfacePoint,
    theta: f64,
    length: f64,
    tol: f64,
) -> Result<GeodesicPath> {
    trace(surface, p, theta, length, tol, true)
}

/// As [`shoot`] but only the end points are kept in `samples`.
pub(crate) fn shoot_endpoints(
    surface: &ProfileSurface,
    p: SurfacePoint,
    theta: f64,
    length: f64,
    tol: f64,
) -> Result<GeodesicPath> {
    trace(surface, p, theta, length, tol, false)
}

fn control(tol: f64, length: f64) -> StepControl {
    StepControl {
        tol,
        h_init: length.min(1e-2),
        h_min: 1e-12 * length.max(1.0),
        max_steps: 5_000_000,
    }
}

fn map_failure(f: Failure) -> GeoError {
    match f {
        Failure::Domain { s } => GeoError::ChartExit { s },
        Failure::Underflow { s } => GeoError::StepUnderflow { s },
    }
}

fn trace(
    surface: &ProfileSurface,
    p: SurfacePoint,
    theta: f64,
    length: f64,
    tol: f64,
    record: bool,
) -> Result<GeodesicPath> {
    if !(length >= 0.0 && length.is_finite()) {
        return Err(GeoError::InvalidArgument(format!(
            "arc length must be non-negative, got {length}"
        )));
    }
    if !(tol > 0.0) {
        return Err(GeoError::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !theta.is_finite() {
        return Err(GeoError::InvalidArgument("heading must be finite".into()));
    }
    surface.check_point(p)?;
    if length == 0.0 {
        return GeodesicPath::zero_length(surface, p, theta);
    }
    if theta.cos().abs() <= MERIDIAN_EPS {
        return trace_meridian(surface, p, theta.sin().signum(), length, tol, record);
    }

    let start = GeodesicState::launch(surface, p, theta)?;
    let c0 = start.clairaut(surface);
    let v0 = p.v;

    let (u_lo, u_hi) = surface.u_bounds();
    let guard = surface.axis_guard();
    let field = |y: &[f64; 4]| {
        if !(y[0] >= u_lo && y[0] <= u_hi) || !y.iter().all(|x| x.is_finite()) {
            return None;
        }
        let m = surface.jet(y[0]).metric();
        (m.rho > guard).then(|| rhs_with(&m, y[2], y[3]))
    };
    // Increments of both conserved quantities count as local error.
    let monitors = |a: &[f64; 4], b: &[f64; 4]| {
        let (ja, jb) = (surface.jet(a[0]).metric(), surface.jet(b[0]).metric());
        let dc = (jb.g * b[3] - ja.g * a[3]).abs();
        let qa = ja.e * a[2] * a[2] + ja.g * a[3] * a[3];
        let qb = jb.e * b[2] * b[2] + jb.g * b[3] * b[3];
        (dc / (tol * jb.rho.max(1.0))).max((qb - qa).abs() / tol)
    };

    let mut samples = vec![PathSample { s: 0.0, state: start }];
    let mut c_drift = 0.0f64;
    let mut speed_drift = 0.0f64;
    let y0 = [start.u, 0.0, start.du, start.dv];
    let y_end = ode::integrate(field, y0, length, control(tol, length), monitors, |s, y| {
        let st = GeodesicState {
            u: y[0],
            v: y[1] + v0,
            du: y[2],
            dv: y[3],
        };
        let m = surface.jet(st.u).metric();
        c_drift = c_drift.max((m.g * st.dv - c0).abs());
        speed_drift = speed_drift.max((m.e * st.du * st.du + m.g * st.dv * st.dv - 1.0).abs());
        if record || s == length {
            samples.push(PathSample { s, state: st });
        }
    })
    .map_err(map_failure)?;

    let end = GeodesicState {
        u: y_end[0],
        v: y_end[1] + v0,
        du: y_end[2],
        dv: y_end[3],
    };
    Ok(GeodesicPath {
        samples,
        start: p,
        end: end.point(),
        length,
        c_nominal: c0,
        c_drift,
        speed_drift,
        start_heading: wrap_angle(theta),
        end_heading: end.heading(surface),
    })
}

/// Fold an unrolled meridian parameter back through the axis crossings.
/// Returns the chart parameter and the number of axis passages.
fn fold(surface: &ProfileSurface, mut u: f64) -> Option<(f64, u32)> {
    let (lo, hi) = surface.axis_crossings();
    for flips in 0..64 {
        match (lo, hi) {
            (Some(a), _) if u < a => u = 2.0 * a - u,
            (_, Some(b)) if u > b => u = 2.0 * b - u,
            _ => {
                let (umin, umax) = surface.u_bounds();
                return (u >= umin && u <= umax).then_some((u, flips));
            }
        }
    }
    None
}

/// Meridians are integrated as `u' = ±1/sqrt(E)`; crossing the axis of a
/// profile that closes there continues on the opposite meridian (`v + pi`).
fn trace_meridian(
    surface: &ProfileSurface,
    p: SurfacePoint,
    direction: f64,
    length: f64,
    tol: f64,
    record: bool,
) -> Result<GeodesicPath> {
    let state_at = |s: f64, y: f64| -> Option<PathSample> {
        let (u, flips) = fold(surface, y)?;
        let sign = if flips % 2 == 0 { 1.0 } else { -1.0 };
        let e = surface.jet(u).metric().e;
        Some(PathSample {
            s,
            state: GeodesicState {
                u,
                v: p.v + PI * flips as f64,
                du: sign * direction / e.sqrt(),
                dv: 0.0,
            },
        })
    };
    let field = |y: &[f64; 1]| {
        let (u, _) = fold(surface, y[0])?;
        let e = surface.jet(u).metric().e;
        Some([direction / e.sqrt()])
    };

    let start = state_at(0.0, p.u).expect("start was checked to be on chart");
    let mut samples = vec![start];
    let mut speed_drift = 0.0f64;
    let y_end = ode::integrate(field, [p.u], length, control(tol, length), |_, _| 0.0, |s, y| {
        if let Some(sample) = state_at(s, y[0]) {
            speed_drift = speed_drift.max((sample.state.speed_squared(surface) - 1.0).abs());
            if record || s == length {
                samples.push(sample);
            }
        }
    })
    .map_err(map_failure)?;

    let last = state_at(length, y_end[0]).ok_or(GeoError::ChartExit { s: length })?;
    if !surface.u_admissible(last.state.u) {
        return Err(GeoError::ChartExit { s: length });
    }
    let end_heading = if last.state.du > 0.0 { PI / 2.0 } else { -PI / 2.0 };
    Ok(GeodesicPath {
        samples,
        start: p,
        end: last.state.point(),
        length,
        c_nominal: 0.0,
        c_drift: 0.0,
        speed_drift,
        start_heading: direction * PI / 2.0,
        end_heading,
    })
}
