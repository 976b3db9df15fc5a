//! Surfaces of revolution built from a profile curve `(phi(u), psi(u))`
//! rotated about the z-axis: `r(u, v) = (phi cos v, phi sin v, psi)`.
//!
//! The chart is orthogonal (F = 0) with `E = phi'^2 + psi'^2` and
//! `G = phi^2`. Tangents are expressed in the orthonormal frame
//! `(e_parallel, e_meridian) = (d/dv / sqrt(G), d/du / sqrt(E))`; a heading
//! `theta` is measured from `e_parallel` towards `e_meridian`, so `theta = 0`
//! runs along the parallel with increasing `v` and `theta = pi/2` runs down
//! the meridian with increasing `u`. This is the only place the orientation
//! convention is fixed.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::spline::CubicSpline;

/// Profile specification as it appears in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// `phi = R sin u`, `psi = R cos u`, colatitude `u` in `[0, pi]`.
    Sphere { radius: f64 },
    /// `phi = R`, `psi = u`.
    Cylinder { radius: f64 },
    /// `phi = u`, `psi = slope * u`.
    Cone { slope: f64 },
    /// `phi = u`, `psi = a * u^2`.
    Paraboloid { a: f64 },
    /// `phi = a cosh(u / a)`, `psi = u`.
    Catenoid { a: f64 },
    /// `phi = major + minor cos u`, `psi = minor sin u`.
    Torus { major: f64, minor: f64 },
    /// `phi = u`, `psi = 0`: the plane in polar coordinates.
    Plane,
    /// Tabulated `(u, phi, psi)` samples, interpolated with a C² spline.
    Custom { samples: Vec<[f64; 3]> },
}

/// A profile plus optional chart overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    #[serde(flatten)]
    pub profile: ProfileSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_guard: Option<f64>,
}

impl From<ProfileSpec> for SurfaceSpec {
    fn from(profile: ProfileSpec) -> Self {
        Self {
            profile,
            u_min: None,
            u_max: None,
            axis_guard: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Profile {
    Sphere { r: f64 },
    Cylinder { r: f64 },
    Cone { k: f64 },
    Paraboloid { a: f64 },
    Catenoid { a: f64 },
    Torus { big: f64, small: f64 },
    Plane,
    Custom { phi: CubicSpline, psi: CubicSpline },
}

/// Profile values and derivatives at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileJet {
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
    pub psi: f64,
    pub dpsi: f64,
    pub ddpsi: f64,
}

/// First fundamental form data along a parallel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metric {
    pub e: f64,
    pub g: f64,
    pub e_u: f64,
    pub g_u: f64,
    /// Distance to the rotation axis, `phi(u)`.
    pub rho: f64,
}

impl ProfileJet {
    pub fn metric(&self) -> Metric {
        Metric {
            e: self.dphi * self.dphi + self.dpsi * self.dpsi,
            g: self.phi * self.phi,
            e_u: 2.0 * (self.dphi * self.ddphi + self.dpsi * self.ddpsi),
            g_u: 2.0 * self.phi * self.dphi,
            rho: self.phi,
        }
    }
}

/// Chart coordinates. `v` lives on the universal cover and is never wrapped
/// internally.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct SurfacePoint {
    pub u: f64,
    pub v: f64,
}

impl SurfacePoint {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    /// `v` reduced to `[0, 2pi)`.
    pub fn v_wrapped(&self) -> f64 {
        let w = self.v.rem_euclid(TAU);
        // Tiny negative values round up to exactly 2pi.
        if w >= TAU {
            0.0
        } else {
            w
        }
    }
}

impl Serialize for SurfacePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SurfacePoint", 3)?;
        st.serialize_field("u", &self.u)?;
        st.serialize_field("v", &self.v_wrapped())?;
        st.serialize_field("v_unwrapped", &self.v)?;
        st.end()
    }
}

/// A tangent at `point`, in the orthonormal (parallel, meridian) frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentVector {
    pub point: SurfacePoint,
    pub a_par: f64,
    pub a_mer: f64,
}

impl TangentVector {
    pub fn norm(&self) -> f64 {
        self.a_par.hypot(self.a_mer)
    }
}

/// Heading of a tangent: `theta` from the parallel, `alpha` the signed angle
/// with the parallel (equal to `theta`) and `beta = pi/2 - theta` the angle
/// with the meridian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Heading {
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = (theta + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSurface {
    profile: Profile,
    spec: SurfaceSpec,
    u_min: f64,
    u_max: f64,
    axis_guard: f64,
    /// Chart bounds at which the profile meets the axis with `phi' != 0`.
    axis_lo: Option<f64>,
    axis_hi: Option<f64>,
}

impl ProfileSurface {
    pub fn new(spec: &SurfaceSpec) -> Result<Self> {
        fn positive(name: &str, x: f64) -> Result<f64> {
            if x.is_finite() && x > 0.0 {
                Ok(x)
            } else {
                Err(GeoError::InvalidSurface(format!(
                    "{name} must be positive and finite, got {x}"
                )))
            }
        }
        fn finite(name: &str, x: f64) -> Result<f64> {
            if x.is_finite() {
                Ok(x)
            } else {
                Err(GeoError::InvalidSurface(format!("{name} must be finite")))
            }
        }

        // (profile, natural domain, default chart, default guard, axis at lo, axis at hi)
        let (profile, natural, chart, guard, ax_lo, ax_hi) = match &spec.profile {
            ProfileSpec::Sphere { radius } => {
                let r = positive("radius", *radius)?;
                (Profile::Sphere { r }, (0.0, PI), (0.0, PI), 1e-6 * r, true, true)
            }
            ProfileSpec::Cylinder { radius } => {
                let r = positive("radius", *radius)?;
                let span = 10.0 * r.max(1.0);
                (
                    Profile::Cylinder { r },
                    (f64::NEG_INFINITY, f64::INFINITY),
                    (-span, span),
                    1e-6,
                    false,
                    false,
                )
            }
            ProfileSpec::Cone { slope } => {
                let k = finite("slope", *slope)?;
                (Profile::Cone { k }, (0.0, f64::INFINITY), (0.0, 10.0), 1e-6, true, false)
            }
            ProfileSpec::Paraboloid { a } => {
                let a = positive("a", *a)?;
                (Profile::Paraboloid { a }, (0.0, f64::INFINITY), (0.0, 10.0), 1e-6, true, false)
            }
            ProfileSpec::Catenoid { a } => {
                let a = positive("a", *a)?;
                (
                    Profile::Catenoid { a },
                    (f64::NEG_INFINITY, f64::INFINITY),
                    (-5.0 * a, 5.0 * a),
                    1e-6,
                    false,
                    false,
                )
            }
            ProfileSpec::Torus { major, minor } => {
                let big = positive("major", *major)?;
                let small = positive("minor", *minor)?;
                if small >= big {
                    return Err(GeoError::InvalidSurface(
                        "torus needs minor < major to stay off the axis".into(),
                    ));
                }
                (
                    Profile::Torus { big, small },
                    (f64::NEG_INFINITY, f64::INFINITY),
                    (-TAU, TAU),
                    1e-6,
                    false,
                    false,
                )
            }
            ProfileSpec::Plane => (
                Profile::Plane,
                (0.0, f64::INFINITY),
                (0.0, 100.0),
                1e-6,
                true,
                false,
            ),
            ProfileSpec::Custom { samples } => {
                if samples.len() < 4 {
                    return Err(GeoError::InvalidSurface(format!(
                        "custom profile needs at least 4 samples, got {}",
                        samples.len()
                    )));
                }
                if let Some(k) = samples.iter().position(|s| !(s[1] > 0.0)) {
                    return Err(GeoError::InvalidSurface(format!(
                        "custom profile sample {k} has phi <= 0"
                    )));
                }
                let us: Vec<f64> = samples.iter().map(|s| s[0]).collect();
                let phis: Vec<f64> = samples.iter().map(|s| s[1]).collect();
                let psis: Vec<f64> = samples.iter().map(|s| s[2]).collect();
                let phi = CubicSpline::not_a_knot(&us, &phis)?;
                let psi = CubicSpline::not_a_knot(&us, &psis)?;
                let dom = phi.domain();
                (Profile::Custom { phi, psi }, dom, dom, 1e-6, false, false)
            }
        };

        let u_min = spec.u_min.unwrap_or(chart.0);
        let u_max = spec.u_max.unwrap_or(chart.1);
        let axis_guard = spec.axis_guard.unwrap_or(guard);
        if !(u_min.is_finite() && u_max.is_finite() && u_min < u_max) {
            return Err(GeoError::InvalidSurface(format!(
                "chart bounds must satisfy u_min < u_max, got [{u_min}, {u_max}]"
            )));
        }
        if u_min < natural.0 || u_max > natural.1 {
            return Err(GeoError::InvalidSurface(format!(
                "chart bounds [{u_min}, {u_max}] exceed the profile domain [{}, {}]",
                natural.0, natural.1
            )));
        }
        positive("axis_guard", axis_guard)?;

        let surface = Self {
            profile,
            spec: spec.clone(),
            u_min,
            u_max,
            axis_guard,
            axis_lo: (ax_lo && u_min == natural.0).then_some(u_min),
            axis_hi: (ax_hi && u_max == natural.1).then_some(u_max),
        };
        surface.check_regular()?;
        Ok(surface)
    }

    pub fn from_profile(profile: ProfileSpec) -> Result<Self> {
        Self::new(&profile.into())
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        Self::from_profile(ProfileSpec::Sphere { radius })
    }

    pub fn cylinder(radius: f64) -> Result<Self> {
        Self::from_profile(ProfileSpec::Cylinder { radius })
    }

    pub fn paraboloid(a: f64) -> Result<Self> {
        Self::from_profile(ProfileSpec::Paraboloid { a })
    }

    pub fn catenoid(a: f64) -> Result<Self> {
        Self::from_profile(ProfileSpec::Catenoid { a })
    }

    pub fn plane() -> Result<Self> {
        Self::from_profile(ProfileSpec::Plane)
    }

    fn check_regular(&self) -> Result<()> {
        let n = 512;
        for k in 0..=n {
            let u = self.u_min + (self.u_max - self.u_min) * k as f64 / n as f64;
            let m = self.jet(u).metric();
            if !(m.e > 0.0 && m.e.is_finite() && m.g.is_finite()) {
                return Err(GeoError::InvalidSurface(format!(
                    "profile is not regular at u={u} (E={})",
                    m.e
                )));
            }
        }
        if let Profile::Custom { phi, .. } = &self.profile {
            // Interpolation may undershoot between positive samples.
            for w in phi.knots().windows(2) {
                for j in 1..8 {
                    let u = w[0] + (w[1] - w[0]) * j as f64 / 8.0;
                    if phi.eval(u).0 <= 0.0 {
                        return Err(GeoError::InvalidSurface(format!(
                            "interpolated profile reaches the axis near u={u}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &SurfaceSpec {
        &self.spec
    }

    pub fn u_bounds(&self) -> (f64, f64) {
        (self.u_min, self.u_max)
    }

    pub fn axis_guard(&self) -> f64 {
        self.axis_guard
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self.profile, Profile::Sphere { .. })
    }

    /// Chart bounds at which a meridian may pass through the axis.
    pub(crate) fn axis_crossings(&self) -> (Option<f64>, Option<f64>) {
        (self.axis_lo, self.axis_hi)
    }

    /// Profile jet without any chart check.
    pub fn jet(&self, u: f64) -> ProfileJet {
        match &self.profile {
            Profile::Sphere { r } => {
                let (s, c) = u.sin_cos();
                ProfileJet {
                    phi: r * s,
                    dphi: r * c,
                    ddphi: -r * s,
                    psi: r * c,
                    dpsi: -r * s,
                    ddpsi: -r * c,
                }
            }
            Profile::Cylinder { r } => ProfileJet {
                phi: *r,
                dphi: 0.0,
                ddphi: 0.0,
                psi: u,
                dpsi: 1.0,
                ddpsi: 0.0,
            },
            Profile::Cone { k } => ProfileJet {
                phi: u,
                dphi: 1.0,
                ddphi: 0.0,
                psi: k * u,
                dpsi: *k,
                ddpsi: 0.0,
            },
            Profile::Paraboloid { a } => ProfileJet {
                phi: u,
                dphi: 1.0,
                ddphi: 0.0,
                psi: a * u * u,
                dpsi: 2.0 * a * u,
                ddpsi: 2.0 * a,
            },
            Profile::Catenoid { a } => {
                let t = u / a;
                ProfileJet {
                    phi: a * t.cosh(),
                    dphi: t.sinh(),
                    ddphi: t.cosh() / a,
                    psi: u,
                    dpsi: 1.0,
                    ddpsi: 0.0,
                }
            }
            Profile::Torus { big, small } => {
                let (s, c) = u.sin_cos();
                ProfileJet {
                    phi: big + small * c,
                    dphi: -small * s,
                    ddphi: -small * c,
                    psi: small * s,
                    dpsi: small * c,
                    ddpsi: -small * s,
                }
            }
            Profile::Plane => ProfileJet {
                phi: u,
                dphi: 1.0,
                ddphi: 0.0,
                psi: 0.0,
                dpsi: 0.0,
                ddpsi: 0.0,
            },
            Profile::Custom { phi, psi } => {
                let (p, dp, ddp) = phi.eval(u);
                let (q, dq, ddq) = psi.eval(u);
                ProfileJet {
                    phi: p,
                    dphi: dp,
                    ddphi: ddp,
                    psi: q,
                    dpsi: dq,
                    ddpsi: ddq,
                }
            }
        }
    }

    /// Whether `u` is an admissible chart parameter.
    pub fn u_admissible(&self, u: f64) -> bool {
        u >= self.u_min && u <= self.u_max && self.jet(u).phi > self.axis_guard
    }

    pub fn check_u(&self, u: f64) -> Result<()> {
        if !u.is_finite() || u < self.u_min || u > self.u_max {
            return Err(GeoError::OffChart {
                u,
                v: f64::NAN,
                reason: format!("u outside [{}, {}]", self.u_min, self.u_max),
            });
        }
        if self.jet(u).phi <= self.axis_guard {
            return Err(GeoError::OffChart {
                u,
                v: f64::NAN,
                reason: "point on axis guard".into(),
            });
        }
        Ok(())
    }

    pub fn check_point(&self, p: SurfacePoint) -> Result<()> {
        if !p.v.is_finite() {
            return Err(GeoError::OffChart {
                u: p.u,
                v: p.v,
                reason: "v is not finite".into(),
            });
        }
        self.check_u(p.u).map_err(|e| match e {
            GeoError::OffChart { u, reason, .. } => GeoError::OffChart { u, v: p.v, reason },
            other => other,
        })
    }

    pub fn embed(&self, p: SurfacePoint) -> Result<[f64; 3]> {
        self.check_point(p)?;
        Ok(self.embed_unchecked(p))
    }

    pub(crate) fn embed_unchecked(&self, p: SurfacePoint) -> [f64; 3] {
        let j = self.jet(p.u);
        let (s, c) = p.v.sin_cos();
        [j.phi * c, j.phi * s, j.psi]
    }

    pub fn metric_at(&self, u: f64) -> Result<Metric> {
        self.check_u(u)?;
        Ok(self.jet(u).metric())
    }

    /// Unit tangent `cos(theta) e_parallel + sin(theta) e_meridian`.
    pub fn tangent_from_heading(&self, p: SurfacePoint, theta: f64) -> Result<TangentVector> {
        self.check_point(p)?;
        let (s, c) = theta.sin_cos();
        Ok(TangentVector {
            point: p,
            a_par: c,
            a_mer: s,
        })
    }

    pub fn heading_from_tangent(&self, t: &TangentVector) -> Result<Heading> {
        if t.a_par == 0.0 && t.a_mer == 0.0 {
            return Err(GeoError::ZeroTangent);
        }
        let theta = t.a_mer.atan2(t.a_par);
        Ok(Heading {
            theta,
            alpha: theta,
            beta: FRAC_PI_2 - theta,
        })
    }

    /// Orthonormal frame `(e_parallel, e_meridian)` in 3-space.
    pub fn frame_3d(&self, p: SurfacePoint) -> Result<([f64; 3], [f64; 3])> {
        self.check_point(p)?;
        let j = self.jet(p.u);
        let (s, c) = p.v.sin_cos();
        let norm = j.dphi.hypot(j.dpsi);
        Ok((
            [-s, c, 0.0],
            [j.dphi * c / norm, j.dphi * s / norm, j.dpsi / norm],
        ))
    }

    /// Embedded direction of a frame tangent.
    pub fn tangent_3d(&self, t: &TangentVector) -> Result<[f64; 3]> {
        let (ep, em) = self.frame_3d(t.point)?;
        Ok(std::array::from_fn(|i| t.a_par * ep[i] + t.a_mer * em[i]))
    }

    /// Metric length of the chart displacement `b - a`, measured at `b`.
    pub fn chart_distance(&self, a: SurfacePoint, b: SurfacePoint) -> f64 {
        let m = self.jet(b.u).metric();
        (m.e * (b.u - a.u).powi(2) + m.g * (b.v - a.v).powi(2)).sqrt()
    }

    /// Straight-line distance between embeddings.
    pub fn chord(&self, a: SurfacePoint, b: SurfacePoint) -> f64 {
        let (x, y) = (self.embed_unchecked(a), self.embed_unchecked(b));
        ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn catalogue() -> Vec<ProfileSurface> {
        vec![
            ProfileSurface::sphere(1.0).unwrap(),
            ProfileSurface::sphere(2.5).unwrap(),
            ProfileSurface::cylinder(2.0).unwrap(),
            ProfileSurface::from_profile(ProfileSpec::Cone { slope: 0.7 }).unwrap(),
            ProfileSurface::paraboloid(0.5).unwrap(),
            ProfileSurface::catenoid(1.0).unwrap(),
            ProfileSurface::from_profile(ProfileSpec::Torus { major: 3.0, minor: 1.0 }).unwrap(),
            ProfileSurface::plane().unwrap(),
        ]
    }

    #[test]
    fn sphere_chart() {
        let s = ProfileSurface::sphere(1.0).unwrap();
        let j = s.jet(0.7);
        assert_abs_diff_eq!(j.phi, 0.7f64.sin());
        assert_abs_diff_eq!(j.psi, 0.7f64.cos());
        assert!(s.check_u(0.0).is_err());
        assert!(s.check_u(PI).is_err());
        assert!(s.check_u(1e-3).is_ok());
    }

    #[test]
    fn degenerate_parameters_are_rejected() {
        assert!(ProfileSurface::cylinder(0.0).is_err());
        assert!(ProfileSurface::sphere(-1.0).is_err());
        assert!(ProfileSurface::from_profile(ProfileSpec::Torus { major: 1.0, minor: 1.0 }).is_err());
        let bad_bounds = SurfaceSpec {
            profile: ProfileSpec::Sphere { radius: 1.0 },
            u_min: Some(-0.5),
            u_max: None,
            axis_guard: None,
        };
        assert!(ProfileSurface::new(&bad_bounds).is_err());
    }

    #[test]
    fn unknown_kind_fails_to_parse() {
        let r: std::result::Result<SurfaceSpec, _> =
            serde_json::from_str(r#"{"kind": "hyperboloid", "a": 1.0}"#);
        assert!(r.is_err());
        let ok: SurfaceSpec = serde_json::from_str(r#"{"kind": "sphere", "radius": 1.0}"#).unwrap();
        assert_eq!(ok.profile, ProfileSpec::Sphere { radius: 1.0 });
    }

    #[test]
    fn custom_profile_validation() {
        let non_monotone = ProfileSpec::Custom {
            samples: vec![[0.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.5, 1.0, 2.0], [2.0, 1.0, 3.0]],
        };
        assert!(ProfileSurface::from_profile(non_monotone).is_err());
        let on_axis = ProfileSpec::Custom {
            samples: vec![[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [2.0, 1.0, 2.0], [3.0, 1.0, 3.0]],
        };
        assert!(ProfileSurface::from_profile(on_axis).is_err());
        let short = ProfileSpec::Custom {
            samples: vec![[0.0, 1.0, 0.0], [1.0, 1.0, 1.0], [2.0, 1.0, 2.0]],
        };
        assert!(ProfileSurface::from_profile(short).is_err());
    }

    #[test]
    fn embeddings() {
        let s = ProfileSurface::sphere(1.0).unwrap();
        let p = s.embed(SurfacePoint::new(FRAC_PI_2, 0.0)).unwrap();
        assert_abs_diff_eq!(p[0], 1.0);
        assert_abs_diff_eq!(p[1], 0.0);
        assert_abs_diff_eq!(p[2], 0.0, epsilon = 1e-16);
        let q = s.embed(SurfacePoint::new(FRAC_PI_2, FRAC_PI_2)).unwrap();
        assert_abs_diff_eq!(q[0], 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(q[1], 1.0);

        let c = ProfileSurface::catenoid(1.0).unwrap();
        let e = c.embed(SurfacePoint::new(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(e[0], 1.0f64.cosh());
        assert_abs_diff_eq!(e[1], 0.0);
        assert_abs_diff_eq!(e[2], 1.0);

        assert!(s.embed(SurfacePoint::new(4.0, 0.0)).is_err());
    }

    #[test]
    fn metric_examples() {
        let m = ProfileSurface::sphere(1.0).unwrap().metric_at(FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(m.e, 1.0);
        assert_abs_diff_eq!(m.g, 1.0);
        assert_abs_diff_eq!(m.rho, 1.0);

        let m = ProfileSurface::cylinder(2.0).unwrap().metric_at(0.3).unwrap();
        assert_eq!((m.e, m.g, m.g_u), (1.0, 4.0, 0.0));

        let m = ProfileSurface::paraboloid(0.5).unwrap().metric_at(1.0).unwrap();
        assert_abs_diff_eq!(m.e, 2.0);
        assert_abs_diff_eq!(m.g, 1.0);
    }

    #[test]
    fn metric_derivatives_match_finite_differences() {
        for s in catalogue() {
            let (lo, hi) = s.u_bounds();
            for k in 1..10 {
                let u = lo + (hi - lo) * k as f64 / 10.0;
                let h = 1e-6;
                let (mp, mm, m) = (s.jet(u + h).metric(), s.jet(u - h).metric(), s.jet(u).metric());
                let scale = 1.0 + m.e.abs() + m.g.abs();
                assert_abs_diff_eq!(m.e_u, (mp.e - mm.e) / (2.0 * h), epsilon = 1e-5 * scale);
                assert_abs_diff_eq!(m.g_u, (mp.g - mm.g) / (2.0 * h), epsilon = 1e-5 * scale);
            }
        }
    }

    #[test]
    fn random_metric_sanity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for s in catalogue() {
            let (lo, hi) = s.u_bounds();
            for _ in 0..1000 {
                let u = rng.gen_range(lo..=hi);
                let v = rng.gen_range(-10.0..10.0);
                if !s.u_admissible(u) {
                    continue;
                }
                let m = s.metric_at(u).unwrap();
                assert!(m.e > 0.0 && m.e.is_finite());
                assert!(m.g > 0.0 && m.g.is_finite());
                assert_abs_diff_eq!(m.rho, m.g.sqrt(), epsilon = 1e-12 * m.rho.max(1.0));
                assert!(s.embed(SurfacePoint::new(u, v)).unwrap().iter().all(|x| x.is_finite()));
            }
        }
    }

    #[test]
    fn heading_conversions() {
        let s = ProfileSurface::sphere(1.0).unwrap();
        let p = SurfacePoint::new(1.0, 0.0);
        let t = s.tangent_from_heading(p, 0.0).unwrap();
        assert_eq!((t.a_par, t.a_mer), (1.0, 0.0));
        let t = s.tangent_from_heading(p, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(t.a_par, 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(t.a_mer, 1.0);
        let t = s.tangent_from_heading(p, PI / 4.0).unwrap();
        assert_abs_diff_eq!(t.a_par, 0.5f64.sqrt());
        assert_abs_diff_eq!(t.a_mer, 0.5f64.sqrt());

        let h = s
            .heading_from_tangent(&TangentVector { point: p, a_par: 1.0, a_mer: 0.0 })
            .unwrap();
        assert_eq!((h.theta, h.alpha, h.beta), (0.0, 0.0, FRAC_PI_2));
        let h = s
            .heading_from_tangent(&TangentVector { point: p, a_par: 0.0, a_mer: 1.0 })
            .unwrap();
        assert_eq!((h.theta, h.alpha, h.beta), (FRAC_PI_2, FRAC_PI_2, 0.0));
        let r = 0.5f64.sqrt();
        let h = s
            .heading_from_tangent(&TangentVector { point: p, a_par: -r, a_mer: r })
            .unwrap();
        assert_abs_diff_eq!(h.theta, 3.0 * PI / 4.0);
        assert_eq!(
            s.heading_from_tangent(&TangentVector { point: p, a_par: 0.0, a_mer: 0.0 }),
            Err(GeoError::ZeroTangent)
        );
    }

    #[test]
    fn frame_is_orthonormal_and_matches_partials() {
        for s in catalogue() {
            let (lo, hi) = s.u_bounds();
            let p = SurfacePoint::new(lo + 0.37 * (hi - lo), 0.9);
            let (ep, em) = s.frame_3d(p).unwrap();
            let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            assert_abs_diff_eq!(dot(ep, ep), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(dot(em, em), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(dot(ep, em), 0.0, epsilon = 1e-12);
            // e_meridian points along increasing u.
            let h = 1e-6;
            let (a, b) = (
                s.embed_unchecked(SurfacePoint::new(p.u + h, p.v)),
                s.embed_unchecked(SurfacePoint::new(p.u - h, p.v)),
            );
            let du: [f64; 3] = std::array::from_fn(|i| a[i] - b[i]);
            assert!(dot(du, em) > 0.0);
        }
    }

    #[test]
    fn custom_spline_reproduces_catenoid_metric() {
        let n = 2001;
        let samples: Vec<[f64; 3]> = (0..n)
            .map(|k| {
                let u = -1.0 + 2.0 * k as f64 / (n - 1) as f64;
                [u, u.cosh(), u]
            })
            .collect();
        let custom = ProfileSurface::from_profile(ProfileSpec::Custom { samples: samples.clone() }).unwrap();
        let exact = ProfileSurface::catenoid(1.0).unwrap();
        for w in samples.windows(2).step_by(20) {
            let u = 0.5 * (w[0][0] + w[1][0]);
            let (a, b) = (custom.metric_at(u).unwrap(), exact.metric_at(u).unwrap());
            assert_abs_diff_eq!(a.e, b.e, epsilon = 1e-6);
            assert_abs_diff_eq!(a.g, b.g, epsilon = 1e-6);
            assert_abs_diff_eq!(a.e_u, b.e_u, epsilon = 1e-6);
            assert_abs_diff_eq!(a.g_u, b.g_u, epsilon = 1e-6);
        }
        // Coarse table: still matches to spline accuracy at 100 points.
        let coarse: Vec<[f64; 3]> = (0..41)
            .map(|k| {
                let u = -1.0 + 2.0 * k as f64 / 40.0;
                [u, u.cosh(), u]
            })
            .collect();
        let custom = ProfileSurface::from_profile(ProfileSpec::Custom { samples: coarse }).unwrap();
        for k in 0..100 {
            let u = -0.99 + 1.98 * k as f64 / 99.0;
            let (a, b) = (custom.metric_at(u).unwrap(), exact.metric_at(u).unwrap());
            assert_abs_diff_eq!(a.g, b.g, epsilon = 1e-6);
            assert_abs_diff_eq!(a.e, b.e, epsilon = 1e-4);
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_abs_diff_eq!(wrap_angle(-PI), PI);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(-0.5), -0.5);
        assert_abs_diff_eq!(wrap_angle(TAU + 0.25), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn wrapped_v_stays_below_a_turn() {
        assert_eq!(SurfacePoint::new(1.0, -1e-17).v_wrapped(), 0.0);
        assert!((SurfacePoint::new(1.0, -0.5).v_wrapped() - (TAU - 0.5)).abs() < 1e-15);
    }
}
