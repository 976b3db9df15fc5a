//! Weighted Fermat-Torricelli point of three terminals and its inverse.
//!
//! For weights `b = (b1, b2, b3)` obeying the strict triangle inequalities
//! the branches of the minimizing tree meet at angles
//! `phi_i0j = acos((b_k^2 - b_i^2 - b_j^2) / (2 b_i b_j))`, and conversely the
//! angles fix the weights up to scale, `b_i ∝ sin(phi_j0k)`.
//!
//! Angle triples are always ordered `(phi_102, phi_203, phi_301)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::connect::{connect_from_guess, connect_geodesic, solve2, ConnectOptions, Connection};
use crate::error::{GeoError, Result};
use crate::geodesic::{shoot, GeodesicPath, DEFAULT_TOL};
use crate::surface::{wrap_angle, ProfileSurface, SurfacePoint, TangentVector};

/// Positive weights attached to the three terminals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightTriple {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

impl WeightTriple {
    pub fn new(b1: f64, b2: f64, b3: f64) -> Result<Self> {
        let w = Self { b1, b2, b3 };
        w.validate()?;
        Ok(w)
    }

    pub fn from_array(b: [f64; 3]) -> Result<Self> {
        Self::new(b[0], b[1], b[2])
    }

    pub fn validate(&self) -> Result<()> {
        for (i, b) in self.as_array().iter().enumerate() {
            if !(b.is_finite() && *b > 0.0) {
                return Err(GeoError::InvalidArgument(format!(
                    "weight b{} must be positive, got {b}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.b1, self.b2, self.b3]
    }

    pub fn sum(&self) -> f64 {
        self.b1 + self.b2 + self.b3
    }

    /// Weights scaled to sum to one.
    pub fn normalized(&self) -> [f64; 3] {
        let s = self.sum();
        self.as_array().map(|b| b / s)
    }

    /// 1-based index of the largest weight.
    pub fn dominant(&self) -> usize {
        let b = self.as_array();
        (0..3).fold(0, |m, i| if b[i] > b[m] { i } else { m }) + 1
    }

    /// Strict triangle inequalities: the branch angles exist and are
    /// non-degenerate.
    pub fn admits_interior(&self) -> bool {
        let [a, b, c] = self.as_array();
        a < b + c && b < a + c && c < a + b
    }
}

/// Angles between the branches at the branching point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorAngles {
    pub phi_102: f64,
    pub phi_203: f64,
    pub phi_301: f64,
}

impl SectorAngles {
    pub fn as_array(&self) -> [f64; 3] {
        [self.phi_102, self.phi_203, self.phi_301]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self {
            phi_102: a[0],
            phi_203: a[1],
            phi_301: a[2],
        }
    }

    pub fn sum(&self) -> f64 {
        self.phi_102 + self.phi_203 + self.phi_301
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Branch angles determined by the weights.
pub fn lemma2_angles(b: &WeightTriple) -> Result<SectorAngles> {
    b.validate()?;
    if !b.admits_interior() {
        return Err(GeoError::VertexRegime { dominant: b.dominant() });
    }
    let w = b.as_array();
    // phi_{i0j} with k the remaining index.
    let angle = |i: usize, j: usize, k: usize| {
        let arg = (w[k] * w[k] - w[i] * w[i] - w[j] * w[j]) / (2.0 * w[i] * w[j]);
        arg.clamp(-1.0, 1.0).acos()
    };
    Ok(SectorAngles {
        phi_102: angle(0, 1, 2),
        phi_203: angle(1, 2, 0),
        phi_301: angle(2, 0, 1),
    })
}

/// Weights summing to `total` that balance a tree with the given branch angles.
pub fn inverse_weights(angles: &SectorAngles, total: f64) -> Result<WeightTriple> {
    if !(total > 0.0 && total.is_finite()) {
        return Err(GeoError::InvalidArgument(format!("weight total must be positive, got {total}")));
    }
    let a = angles.as_array();
    for (name, x) in ["phi_102", "phi_203", "phi_301"].iter().zip(a) {
        if !(x > 0.0 && x < std::f64::consts::PI) {
            return Err(GeoError::InvalidArgument(format!("{name} = {x} must lie in (0, pi)")));
        }
    }
    if (angles.sum() - TAU).abs() > 1e-9 {
        return Err(GeoError::InvalidArgument(format!(
            "sector angles sum to {} instead of 2pi",
            angles.sum()
        )));
    }
    // sin of phi_{i0j} for unordered {i, j}, 0-based.
    let sin_between = |i: usize, j: usize| match (i.min(j), i.max(j)) {
        (0, 1) => a[0].sin(),
        (1, 2) => a[1].sin(),
        _ => a[2].sin(),
    };
    let weight = |i: usize| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let denom = sin_between(j, k);
        total / (1.0 + sin_between(i, k) / denom + sin_between(i, j) / denom)
    };
    WeightTriple::new(weight(0), weight(1), weight(2))
}

/// Sector angles between three departure headings, in the cyclic order they
/// occur around the branching point.
pub fn sector_angles_from_headings(h: [f64; 3]) -> Result<SectorAngles> {
    const EPS: f64 = 1e-12;
    let d12 = (h[1] - h[0]).rem_euclid(TAU);
    let d13 = (h[2] - h[0]).rem_euclid(TAU);
    let gaps = [d12, d13, TAU - d12, TAU - d13, (d12 - d13).abs()];
    if gaps.iter().any(|g| *g < EPS) {
        return Err(GeoError::Degenerate("two branches depart in the same direction".into()));
    }
    Ok(if d12 < d13 {
        SectorAngles::from_array([d12, d13 - d12, TAU - d13])
    } else {
        SectorAngles::from_array([TAU - d12, d12 - d13, d13])
    })
}

/// Sector angles at `a0` of the geodesics towards the three terminals.
pub fn measure_sector_angles(
    surface: &ProfileSurface,
    a0: SurfacePoint,
    points: &[SurfacePoint; 3],
    opts: &ConnectOptions,
) -> Result<SectorAngles> {
    if points.contains(&a0) {
        return Err(GeoError::Degenerate("branching point coincides with a terminal".into()));
    }
    let mut headings = [0.0; 3];
    for (h, p) in headings.iter_mut().zip(points) {
        *h = connect_geodesic(surface, a0, *p, opts)?.path.start_heading;
    }
    sector_angles_from_headings(headings)
}

/// Branches of a tree with apex `a0` whose angles balance the weights `b`:
/// headings `theta0`, `theta0 + phi_102`, `theta0 + phi_102 + phi_203`.
pub fn planted_tree(
    surface: &ProfileSurface,
    a0: SurfacePoint,
    b: &WeightTriple,
    theta0: f64,
    lengths: [f64; 3],
    tol: f64,
) -> Result<[GeodesicPath; 3]> {
    let angles = lemma2_angles(b)?;
    let headings = planted_headings(&angles, theta0);
    let mut out = Vec::with_capacity(3);
    for (h, l) in headings.iter().zip(lengths) {
        out.push(shoot(surface, a0, *h, l, tol)?);
    }
    Ok(out.try_into().expect("three branches"))
}

pub fn planted_headings(angles: &SectorAngles, theta0: f64) -> [f64; 3] {
    [
        wrap_angle(theta0),
        wrap_angle(theta0 + angles.phi_102),
        wrap_angle(theta0 + angles.phi_102 + angles.phi_203),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FermatMode {
    Interior,
    /// The minimizer is the terminal with this 1-based index.
    Vertex(usize),
}

/// Outcome of the three-inequality floating test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloatingTest {
    pub mode: FermatMode,
    /// `|b_j U_ij + b_k U_ik|` at each terminal `i`.
    pub norms: [f64; 3],
    /// Geodesics between the terminals: 1→2, 1→3, 2→3.
    #[serde(skip)]
    pub edges: [Connection; 3],
}

fn cross(a: &TangentVector, b: &TangentVector) -> f64 {
    a.a_par * b.a_mer - a.a_mer * b.a_par
}

/// Decide whether the weighted minimizer lies strictly inside the triangle.
pub fn floating_test(
    surface: &ProfileSurface,
    points: &[SurfacePoint; 3],
    b: &WeightTriple,
    opts: &ConnectOptions,
) -> Result<FloatingTest> {
    b.validate()?;
    for i in 0..3 {
        for j in i + 1..3 {
            if points[i] == points[j] {
                return Err(GeoError::Degenerate(format!("terminals {} and {} coincide", i + 1, j + 1)));
            }
        }
    }
    let e12 = connect_geodesic(surface, points[0], points[1], opts)?;
    let e13 = connect_geodesic(surface, points[0], points[2], opts)?;
    let e23 = connect_geodesic(surface, points[1], points[2], opts)?;
    let (r12, r13, r23) = (e12.path.reversed(), e13.path.reversed(), e23.path.reversed());

    // Unit tangents U_ij at terminal i towards j and k.
    let at = [
        (e12.path.departure(), e13.path.departure()),
        (r12.departure(), e23.path.departure()),
        (r13.departure(), r23.departure()),
    ];
    let w = b.as_array();
    let mut norms = [0.0; 3];
    let mut mode = FermatMode::Interior;
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let (u_first, u_second) = at[i];
        if cross(&u_first, &u_second).abs() <= 1e-9 {
            return Err(GeoError::Degenerate(
                "terminals lie on one geodesic".into(),
            ));
        }
        // `at[i]` lists the smaller remaining index first.
        let (bj, bk) = if j < k { (w[j], w[k]) } else { (w[k], w[j]) };
        let x = bj * u_first.a_par + bk * u_second.a_par;
        let y = bj * u_first.a_mer + bk * u_second.a_mer;
        norms[i] = x.hypot(y);
        if norms[i] <= w[i] && mode == FermatMode::Interior {
            mode = FermatMode::Vertex(i + 1);
        }
    }
    Ok(FloatingTest {
        mode,
        norms,
        edges: [e12, e13, e23],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FermatOptions {
    pub connect: ConnectOptions,
    /// Stop when `|sum b_i U_i|` drops to this; defaults to `1e-8 * sum(b)`.
    pub grad_tol: Option<f64>,
    pub angle_tol: f64,
    pub max_iter: usize,
    pub armijo: f64,
    pub max_halvings: usize,
    /// Starting point; defaults to the chart centroid of the terminals.
    pub initial: Option<SurfacePoint>,
}

impl Default for FermatOptions {
    fn default() -> Self {
        Self {
            connect: ConnectOptions::default(),
            grad_tol: None,
            angle_tol: 1e-5,
            max_iter: 500,
            armijo: 1e-4,
            max_halvings: 60,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FermatResult {
    pub a0: SurfacePoint,
    /// Geodesics from `a0` to each terminal.
    pub branches: Vec<GeodesicPath>,
    /// `sum b_i sigma_0i`.
    pub f_value: f64,
    /// `|sum b_i U_i|` at `a0`; for a vertex solution, the norm from the
    /// failing floating-test inequality.
    pub residual: f64,
    pub sector_angles: Option<SectorAngles>,
    /// Largest difference between measured and weight-implied angles.
    pub angle_deviation: Option<f64>,
    pub mode: FermatMode,
    pub iterations: usize,
    /// Objective after each accepted descent step.
    pub f_history: Vec<f64>,
    /// Branches whose shortest geodesic was not unique within 1e-6.
    pub ambiguous_branches: Vec<usize>,
}

struct Eval {
    conns: [Connection; 3],
    f: f64,
    r: [f64; 2],
}

impl Eval {
    fn norm(&self) -> f64 {
        self.r[0].hypot(self.r[1])
    }

    fn min_len(&self) -> f64 {
        self.conns.iter().map(|c| c.path.length).fold(f64::INFINITY, f64::min)
    }

    fn guesses(&self) -> [(f64, f64, i32); 3] {
        std::array::from_fn(|i| {
            let p = &self.conns[i].path;
            (p.start_heading, p.length, self.conns[i].winding)
        })
    }
}

struct Objective<'a> {
    surface: &'a ProfileSurface,
    points: &'a [SurfacePoint; 3],
    w: [f64; 3],
    opts: &'a ConnectOptions,
}

impl Objective<'_> {
    fn eval(&self, x: SurfacePoint, guesses: Option<[(f64, f64, i32); 3]>) -> Result<Eval> {
        self.surface.check_point(x)?;
        let mut conns = Vec::with_capacity(3);
        for (i, p) in self.points.iter().enumerate() {
            if *p == x {
                return Err(GeoError::Degenerate(format!("iterate reached terminal {}", i + 1)));
            }
            conns.push(match guesses {
                Some(g) => connect_from_guess(self.surface, x, *p, g[i], self.opts)?,
                None => connect_geodesic(self.surface, x, *p, self.opts)?,
            });
        }
        let conns: [Connection; 3] = conns.try_into().expect("three connections");
        let mut r = [0.0; 2];
        let mut f = 0.0;
        for (c, b) in conns.iter().zip(self.w) {
            let u = c.path.departure();
            r[0] += b * u.a_par;
            r[1] += b * u.a_mer;
            f += b * c.path.length;
        }
        Ok(Eval { conns, f, r })
    }
}

/// Chart centroid, with each `v` taken on the sheet nearest the first terminal.
fn centroid(points: &[SurfacePoint; 3]) -> SurfacePoint {
    let v0 = points[0].v;
    let v = points
        .iter()
        .map(|p| v0 + wrap_angle(p.v - v0))
        .sum::<f64>()
        / 3.0;
    SurfacePoint::new(points.iter().map(|p| p.u).sum::<f64>() / 3.0, v)
}

/// Minimize `sum b_i d(A0, A_i)` over the surface.
///
/// Descent moves along the geodesic in the direction of `R = sum b_i U_i`
/// with Armijo backtracking on the objective. Once the objective decrease
/// is too small to resolve against the boundary-value solves, the first
/// order condition `R = 0` is finished with Newton steps in the chart.
pub fn solve_fermat(
    surface: &ProfileSurface,
    points: &[SurfacePoint; 3],
    b: &WeightTriple,
    opts: &FermatOptions,
) -> Result<FermatResult> {
    b.validate()?;
    for p in points {
        surface.check_point(*p)?;
    }
    let test = floating_test(surface, points, b, &opts.connect)?;
    if let FermatMode::Vertex(i) = test.mode {
        return vertex_solution(surface, points, &test, b, i);
    }

    let w = b.as_array();
    let grad_tol = opts.grad_tol.unwrap_or(1e-8 * b.sum());
    let polish_below = 1e-3 * b.sum();
    let obj = Objective {
        surface,
        points,
        w,
        opts: &opts.connect,
    };

    let mut x = opts.initial.unwrap_or_else(|| centroid(points));
    let mut cur = obj.eval(x, None)?;
    let mut f_history = vec![cur.f];
    let mut iterations = 0;
    let mut lambda_prev: Option<f64> = None;

    // Descent phase.
    while cur.norm() > polish_below && iterations < opts.max_iter {
        iterations += 1;
        let dir = cur.r[1].atan2(cur.r[0]);
        let cap = 0.1 * cur.min_len();
        let mut lambda = match lambda_prev {
            None => cap,
            Some(l) => (2.0 * l).min(cap),
        };
        let mut accepted = None;
        for _ in 0..opts.max_halvings {
            let trial = shoot(surface, x, dir, lambda, DEFAULT_TOL)
                .ok()
                .and_then(|p| obj.eval(p.end, Some(cur.guesses())).ok().map(|e| (p.end, e)));
            if let Some((p, e)) = trial {
                if e.f <= cur.f - opts.armijo * lambda * cur.norm() {
                    accepted = Some((p, e));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((p, e)) => {
                x = p;
                cur = e;
                f_history.push(cur.f);
                lambda_prev = Some(lambda);
            }
            None => {
                return Err(GeoError::BacktrackingExhausted {
                    iteration: iterations,
                    halvings: opts.max_halvings,
                })
            }
        }
    }

    // Newton phase on the first-order condition.
    let mut verified = false;
    loop {
        while cur.norm() > grad_tol {
            if iterations >= opts.max_iter {
                return Err(GeoError::IterationCap(opts.max_iter));
            }
            iterations += 1;
            let (nx, ne) = newton_step(&obj, surface, x, &cur)?;
            x = nx;
            cur = ne;
        }
        if verified {
            break;
        }
        // Confirm with full searches that the tracked branches are still the
        // shortest ones.
        verified = true;
        cur = obj.eval(x, None)?;
    }

    let headings = cur.conns.each_ref().map(|c| c.path.start_heading);
    let measured = sector_angles_from_headings(headings)?;
    let expected = lemma2_angles(b)?;
    let ambiguous_branches = (0..3).filter(|&i| cur.conns[i].ambiguous).map(|i| i + 1).collect();
    Ok(FermatResult {
        a0: x,
        f_value: cur.f,
        residual: cur.norm(),
        angle_deviation: Some(measured.max_abs_diff(&expected)),
        sector_angles: Some(measured),
        branches: cur.conns.into_iter().map(|c| c.path).collect(),
        mode: FermatMode::Interior,
        iterations,
        f_history,
        ambiguous_branches,
    })
}

fn newton_step(obj: &Objective, surface: &ProfileSurface, x: SurfacePoint, cur: &Eval) -> Result<(SurfacePoint, Eval)> {
    let m = surface.jet(x.u).metric();
    let scale = 1e-6 * cur.min_len();
    let (hu, hv) = (scale / m.e.sqrt(), scale / m.g.sqrt());
    let eu = obj.eval(SurfacePoint::new(x.u + hu, x.v), Some(cur.guesses()))?;
    let ev = obj.eval(SurfacePoint::new(x.u, x.v + hv), Some(cur.guesses()))?;
    let j = [
        [(eu.r[0] - cur.r[0]) / hu, (ev.r[0] - cur.r[0]) / hv],
        [(eu.r[1] - cur.r[1]) / hu, (ev.r[1] - cur.r[1]) / hv],
    ];
    let step = solve2(j, [-cur.r[0], -cur.r[1]])
        .ok_or_else(|| GeoError::Degenerate("singular first-order Jacobian".into()))?;
    let mut alpha = 1.0;
    for _ in 0..30 {
        let trial = SurfacePoint::new(x.u + alpha * step[0], x.v + alpha * step[1]);
        if let Ok(e) = obj.eval(trial, Some(cur.guesses())) {
            if e.norm() < cur.norm() {
                return Ok((trial, e));
            }
        }
        alpha *= 0.5;
    }
    Err(GeoError::BacktrackingExhausted {
        iteration: 0,
        halvings: 30,
    })
}

fn vertex_solution(
    surface: &ProfileSurface,
    points: &[SurfacePoint; 3],
    test: &FloatingTest,
    b: &WeightTriple,
    vertex: usize,
) -> Result<FermatResult> {
    let [e12, e13, e23] = &test.edges;
    let i = vertex - 1;
    let a0 = points[i];
    let zero = GeodesicPath::zero_length(surface, a0, 0.0)?;
    let branches = match i {
        0 => vec![zero, e12.path.clone(), e13.path.clone()],
        1 => vec![e12.path.reversed(), zero, e23.path.clone()],
        _ => vec![e13.path.reversed(), e23.path.reversed(), zero],
    };
    let f_value = branches
        .iter()
        .zip(b.as_array())
        .map(|(p, w)| w * p.length)
        .sum();
    let ambiguous_branches = (0..3)
        .filter(|&k| k != i)
        .filter(|&k| {
            let edge = match (i.min(k), i.max(k)) {
                (0, 1) => e12,
                (0, 2) => e13,
                _ => e23,
            };
            edge.ambiguous
        })
        .map(|k| k + 1)
        .collect();
    Ok(FermatResult {
        a0,
        branches,
        f_value,
        residual: test.norms[i],
        sector_angles: None,
        angle_deviation: None,
        mode: FermatMode::Vertex(vertex),
        iterations: 0,
        f_history: vec![f_value],
        ambiguous_branches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn equal_weights_give_equal_angles() {
        let a = lemma2_angles(&WeightTriple::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        for x in a.as_array() {
            assert_abs_diff_eq!(x, TAU / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn three_four_five() {
        let a = lemma2_angles(&WeightTriple::new(3.0, 4.0, 5.0).unwrap()).unwrap();
        assert_abs_diff_eq!(a.phi_102, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(a.phi_203, (-0.8f64).acos(), epsilon = 1e-15);
        assert_abs_diff_eq!(a.phi_301, (-0.6f64).acos(), epsilon = 1e-15);
        assert_abs_diff_eq!(a.sum(), TAU, epsilon = 1e-12);
    }

    #[test]
    fn dominant_weight_is_vertex_regime() {
        let e = lemma2_angles(&WeightTriple::new(1.0, 1.0, 3.0).unwrap()).unwrap_err();
        assert_eq!(e, GeoError::VertexRegime { dominant: 3 });
        assert!(WeightTriple::new(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        let b = inverse_weights(&SectorAngles::from_array([TAU / 3.0; 3]), 1.0).unwrap();
        for x in b.as_array() {
            assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-15);
        }

        let angles = lemma2_angles(&WeightTriple::new(3.0, 4.0, 5.0).unwrap()).unwrap();
        let b = inverse_weights(&angles, 12.0).unwrap();
        assert_abs_diff_eq!(b.b1, 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(b.b2, 4.0, epsilon = 1e-10);
        assert_abs_diff_eq!(b.b3, 5.0, epsilon = 1e-10);

        let b = inverse_weights(&SectorAngles::from_array([FRAC_PI_2, 0.75 * PI, 0.75 * PI]), 1.0).unwrap();
        let r = 0.5f64.sqrt();
        let s = 2.0 * r + 1.0;
        assert_abs_diff_eq!(b.b1, r / s, epsilon = 1e-15);
        assert_abs_diff_eq!(b.b2, r / s, epsilon = 1e-15);
        assert_abs_diff_eq!(b.b3, 1.0 / s, epsilon = 1e-15);
    }

    #[test]
    fn inverse_rejects_bad_angles() {
        assert!(inverse_weights(&SectorAngles::from_array([1.0, 1.0, 1.0]), 1.0).is_err());
        assert!(inverse_weights(&SectorAngles::from_array([PI, 0.5 * PI, 0.5 * PI]), 1.0).is_err());
        assert!(inverse_weights(&SectorAngles::from_array([TAU / 3.0; 3]), 0.0).is_err());
    }

    #[test]
    fn sector_examples() {
        let a = sector_angles_from_headings([0.0, TAU / 3.0, 2.0 * TAU / 3.0]).unwrap();
        for x in a.as_array() {
            assert_abs_diff_eq!(x, TAU / 3.0, epsilon = 1e-15);
        }
        let a = sector_angles_from_headings([0.0, FRAC_PI_2, PI]).unwrap();
        assert_eq!(a.as_array(), [FRAC_PI_2, FRAC_PI_2, PI]);
        // Clockwise labelling gives the same sectors.
        let a = sector_angles_from_headings([0.0, -FRAC_PI_2, -PI]).unwrap();
        assert_abs_diff_eq!(a.phi_102, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(a.phi_203, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(a.phi_301, PI, epsilon = 1e-15);
        assert!(matches!(
            sector_angles_from_headings([0.3, 0.3, 2.0]),
            Err(GeoError::Degenerate(_))
        ));
    }

    fn equilateral_plane() -> (ProfileSurface, [SurfacePoint; 3]) {
        // Vertices of a unit-side triangle centred at (3, 0), in polar chart coordinates.
        let s = ProfileSurface::plane().unwrap();
        let r = 1.0 / 3f64.sqrt();
        let pts = [0.0, TAU / 3.0, 2.0 * TAU / 3.0].map(|a: f64| {
            let (x, y) = (3.0 + r * a.cos(), r * a.sin());
            SurfacePoint::new(x.hypot(y), y.atan2(x))
        });
        (s, pts)
    }

    #[test]
    fn floating_test_examples() {
        let (s, pts) = equilateral_plane();
        let opts = ConnectOptions::default();
        let t = floating_test(&s, &pts, &WeightTriple::new(1.0, 1.0, 1.0).unwrap(), &opts).unwrap();
        assert_eq!(t.mode, FermatMode::Interior);
        for n in t.norms {
            assert_abs_diff_eq!(n, 3f64.sqrt(), epsilon = 1e-8);
        }
        let t = floating_test(&s, &pts, &WeightTriple::new(1.0, 1.0, 3.0).unwrap(), &opts).unwrap();
        assert_eq!(t.mode, FermatMode::Vertex(3));

        let sphere = ProfileSurface::sphere(1.0).unwrap();
        let tri = [
            SurfacePoint::new(FRAC_PI_2 - 0.1, 0.0),
            SurfacePoint::new(FRAC_PI_2 - 0.1, 0.2),
            SurfacePoint::new(FRAC_PI_2 + 0.0732, 0.1),
        ];
        let t = floating_test(&sphere, &tri, &WeightTriple::new(1.0, 1.0, 1.0).unwrap(), &opts).unwrap();
        assert_eq!(t.mode, FermatMode::Interior);

        // Three points on one parallel geodesic.
        let eq = [0.1, 0.5, 0.9].map(|v| SurfacePoint::new(FRAC_PI_2, v));
        assert!(matches!(
            floating_test(&sphere, &eq, &WeightTriple::new(1.0, 1.0, 1.0).unwrap(), &opts),
            Err(GeoError::Degenerate(_))
        ));
    }

    #[test]
    fn equilateral_center() {
        let (s, pts) = equilateral_plane();
        let r = solve_fermat(&s, &pts, &WeightTriple::new(1.0, 1.0, 1.0).unwrap(), &FermatOptions::default()).unwrap();
        let p = s.embed(r.a0).unwrap();
        assert_abs_diff_eq!(p[0], 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-8);
        for a in r.sector_angles.unwrap().as_array() {
            assert_abs_diff_eq!(a, TAU / 3.0, epsilon = 1e-7);
        }
        assert!(r.f_history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn vertex_regime_matches_brute_force() {
        let (s, pts) = equilateral_plane();
        let b = WeightTriple::new(1.0, 1.2, 2.5).unwrap();
        let r = solve_fermat(&s, &pts, &b, &FermatOptions::default()).unwrap();
        assert_eq!(r.mode, FermatMode::Vertex(3));
        assert_eq!(r.a0, pts[2]);

        // Brute force on a 200x200 grid of the embedding plane.
        let xy: Vec<[f64; 3]> = pts.iter().map(|p| s.embed(*p).unwrap()).collect();
        let f = |x: f64, y: f64| {
            (0..3).map(|i| b.as_array()[i] * (x - xy[i][0]).hypot(y - xy[i][1])).sum::<f64>()
        };
        let (mut best, mut at) = (f64::INFINITY, (0.0, 0.0));
        let n = 200;
        let (x0, x1, y0, y1) = (2.3, 3.7, -0.7, 0.7);
        for i in 0..n {
            for j in 0..n {
                let x = x0 + (x1 - x0) * i as f64 / (n - 1) as f64;
                let y = y0 + (y1 - y0) * j as f64 / (n - 1) as f64;
                let v = f(x, y);
                if v < best {
                    best = v;
                    at = (x, y);
                }
            }
        }
        let cell = (x1 - x0) / (n - 1) as f64;
        assert!((at.0 - xy[2][0]).abs() <= cell && (at.1 - xy[2][1]).abs() <= cell);
        assert!(r.f_value <= best + 1e-9);
    }

    #[test]
    fn planted_tree_on_paraboloid() {
        let s = ProfileSurface::paraboloid(0.5).unwrap();
        let a0 = SurfacePoint::new(1.0, 0.0);
        let b = WeightTriple::new(2.0, 3.0, 4.0).unwrap();
        let tree = planted_tree(&s, a0, &b, 0.3, [0.3, 0.4, 0.5], DEFAULT_TOL).unwrap();
        let pts = tree.each_ref().map(|p| p.end);
        let r = solve_fermat(&s, &pts, &b, &FermatOptions::default()).unwrap();
        assert!(s.chord(r.a0, a0) <= 1e-5);
        let measured = measure_sector_angles(&s, a0, &pts, &ConnectOptions::default()).unwrap();
        assert!(measured.max_abs_diff(&lemma2_angles(&b).unwrap()) <= 1e-5);
        assert!(r.angle_deviation.unwrap() <= 1e-5);
        assert!(r.f_history.windows(2).all(|w| w[1] < w[0]));
    }

    proptest! {
        #[test]
        fn inverse_round_trip(b1 in 0.1f64..10.0, b2 in 0.1f64..10.0, b3 in 0.1f64..10.0) {
            let b = WeightTriple::new(b1, b2, b3).unwrap();
            prop_assume!(b.admits_interior());
            let angles = lemma2_angles(&b).unwrap();
            prop_assume!(angles.as_array().iter().all(|a| *a > 1e-3 && *a < PI - 1e-3));
            prop_assert!((angles.sum() - TAU).abs() <= 1e-12);
            let back = inverse_weights(&angles, b.sum()).unwrap();
            for (x, y) in back.as_array().iter().zip(b.as_array()) {
                prop_assert!((x - y).abs() <= 1e-10 * y.max(1.0), "{x} vs {y}");
            }
            let back_sum: f64 = back.sum();
            prop_assert!((back_sum - b.sum()).abs() <= 1e-12 * b.sum());
        }

        #[test]
        fn sectors_partition_the_turn(h1 in -PI..PI, d2 in 0.01f64..3.0, d3 in 0.01f64..3.0) {
            let a = sector_angles_from_headings([h1, h1 + d2, h1 + d2 + d3]).unwrap();
            prop_assert!((a.sum() - TAU).abs() <= 1e-12);
            prop_assert!((a.phi_102 - d2).abs() <= 1e-12);
        }
    }
}
