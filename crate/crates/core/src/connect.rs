//! Geodesic boundary-value problem: the shortest geodesic found between two
//! chart points.
//!
//! Each candidate is a damped Newton solve over `(heading, length)` on the
//! endpoint residual, measured in the metric at the target. The residual
//! Jacobian is taken by forward differences so the integrator stays the
//! only source of truth about the geodesic flow.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::geodesic::{shoot, shoot_endpoints, GeodesicPath};
use crate::surface::{wrap_angle, ProfileSurface, SurfacePoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConnectOptions {
    /// Initial headings, spread uniformly over `(-pi, pi]`.
    pub n_starts: usize,
    /// Extra turns `k` tried for the target, i.e. targets `v_B + 2 pi k`.
    pub windings: Vec<i32>,
    /// Upper bound on candidate lengths.
    pub max_len: f64,
    /// Endpoint residual tolerance, in metric units at the target.
    pub resid_tol: f64,
    /// Integrator tolerance for the shots.
    pub shot_tol: f64,
    pub max_newton: usize,
    /// Evaluate starts on the rayon pool.
    pub parallel: bool,
}

impl Default for ConnectOptions {
    fn default() -> Self {
        Self {
            n_starts: 16,
            windings: vec![-1, 0, 1],
            max_len: 10.0,
            resid_tol: 1e-10,
            shot_tol: 1e-12,
            max_newton: 40,
            parallel: true,
        }
    }
}

impl ConnectOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts < 4 {
            return Err(GeoError::InvalidArgument(format!(
                "n_starts must be at least 4, got {}",
                self.n_starts
            )));
        }
        if self.windings.is_empty() {
            return Err(GeoError::InvalidArgument("windings must not be empty".into()));
        }
        for (name, x) in [
            ("max_len", self.max_len),
            ("resid_tol", self.resid_tol),
            ("shot_tol", self.shot_tol),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(GeoError::InvalidArgument(format!("{name} must be positive, got {x}")));
            }
        }
        Ok(())
    }
}

/// A solved boundary-value problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Connection {
    pub path: GeodesicPath,
    /// Turns added to the target's `v`.
    pub winding: i32,
    /// Final endpoint residual.
    pub residual: f64,
    /// Another distinct geodesic matched the minimal length within 1e-6.
    pub ambiguous: bool,
    /// Number of distinct converged geodesics.
    pub candidates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    theta: f64,
    length: f64,
    winding: i32,
    residual: f64,
}

const TIE: f64 = 1e-9;
const COARSE_SHOT_TOL: f64 = 1e-8;
const COARSE_RESID: f64 = 1e-6;
const MAX_HALVINGS: usize = 12;
const MAX_STALLS: usize = 4;
const BASIN: f64 = 1e-5;

fn run<T: Sync, R: Send>(parallel: bool, items: &[T], f: impl Fn(&T) -> Option<R> + Sync + Send) -> Vec<R> {
    if parallel {
        items.par_iter().filter_map(f).collect()
    } else {
        items.iter().filter_map(f).collect()
    }
}
const AMBIGUITY: f64 = 1e-6;

struct Problem<'a> {
    surface: &'a ProfileSurface,
    a: SurfacePoint,
    b: SurfacePoint,
    sqrt_e: f64,
    sqrt_g: f64,
    opts: &'a ConnectOptions,
}

impl<'a> Problem<'a> {
    fn new(surface: &'a ProfileSurface, a: SurfacePoint, b: SurfacePoint, opts: &'a ConnectOptions) -> Self {
        let m = surface.jet(b.u).metric();
        Self {
            surface,
            a,
            b,
            sqrt_e: m.e.sqrt(),
            sqrt_g: m.g.sqrt(),
            opts,
        }
    }

    fn residual(&self, theta: f64, length: f64, winding: i32, tol: f64) -> Option<[f64; 2]> {
        let path = shoot_endpoints(self.surface, self.a, theta, length, tol).ok()?;
        let target_v = self.b.v + TAU * winding as f64;
        Some([
            self.sqrt_e * (path.end.u - self.b.u),
            self.sqrt_g * (path.end.v - target_v),
        ])
    }

    /// Damped Newton iteration on the endpoint residual. Gives up after
    /// repeated iterations that fail to halve the residual.
    fn newton(&self, start: Candidate, tol: f64, target: f64) -> Option<Candidate> {
        let norm = |r: [f64; 2]| r[0].hypot(r[1]);
        let winding = start.winding;
        let (mut theta, mut length) = (start.theta, start.length);
        let mut f = self.residual(theta, length, winding, tol)?;
        let mut stalls = 0;
        for _ in 0..self.opts.max_newton {
            if norm(f) <= target {
                break;
            }
            let h_t = 1e-7 * theta.abs().max(1.0);
            let h_l = 1e-7 * length.max(1.0);
            let f_t = self.residual(theta + h_t, length, winding, tol)?;
            let f_l = self.residual(theta, length + h_l, winding, tol)?;
            let j = [
                [(f_t[0] - f[0]) / h_t, (f_l[0] - f[0]) / h_l],
                [(f_t[1] - f[1]) / h_t, (f_l[1] - f[1]) / h_l],
            ];
            let mut step = solve2(j, [-f[0], -f[1]])?;
            // Keep single updates moderate; large jumps land on other branches.
            let scale = (1.0 / step[0].abs().max(1e-300))
                .min(length.max(0.5) / step[1].abs().max(1e-300))
                .min(1.0);
            step = [step[0] * scale, step[1] * scale];

            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let (t, l) = (theta + alpha * step[0], length + alpha * step[1]);
                if l > 0.0 && l <= self.opts.max_len {
                    if let Some(f_new) = self.residual(t, l, winding, tol) {
                        if norm(f_new) < norm(f) {
                            accepted = Some((t, l, f_new));
                            break;
                        }
                    }
                }
                alpha *= 0.5;
            }
            let (t, l, f_new) = accepted?;
            if norm(f_new) > 0.5 * norm(f) {
                stalls += 1;
                if stalls > MAX_STALLS {
                    return None;
                }
            }
            theta = t;
            length = l;
            f = f_new;
        }
        (norm(f) <= target).then_some(Candidate {
            theta: wrap_angle(theta),
            length,
            winding,
            residual: norm(f),
        })
    }

    /// Coarse solve at a loose integrator tolerance.
    fn coarse(&self, start: Candidate) -> Option<Candidate> {
        self.newton(start, COARSE_SHOT_TOL, COARSE_RESID.max(self.opts.resid_tol))
    }

    fn polish(&self, start: Candidate) -> Option<Candidate> {
        self.newton(start, self.opts.shot_tol, self.opts.resid_tol)
    }
}

/// Solve a 2x2 system, falling back to a lightly regularized least-squares
/// step when the Jacobian is near singular.
pub(crate) fn solve2(j: [[f64; 2]; 2], rhs: [f64; 2]) -> Option<[f64; 2]> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = j.iter().flatten().map(|x| x * x).sum::<f64>();
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    if det.abs() > 1e-10 * scale {
        return Some([
            (rhs[0] * j[1][1] - rhs[1] * j[0][1]) / det,
            (j[0][0] * rhs[1] - j[1][0] * rhs[0]) / det,
        ]);
    }
    // (J^T J + mu I) x = J^T r
    let mu = 1e-8 * scale;
    let a = [
        [j[0][0] * j[0][0] + j[1][0] * j[1][0] + mu, j[0][0] * j[0][1] + j[1][0] * j[1][1]],
        [j[0][1] * j[0][0] + j[1][1] * j[1][0], j[0][1] * j[0][1] + j[1][1] * j[1][1] + mu],
    ];
    let b = [
        j[0][0] * rhs[0] + j[1][0] * rhs[1],
        j[0][1] * rhs[0] + j[1][1] * rhs[1],
    ];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    (det != 0.0).then(|| {
        [
            (b[0] * a[1][1] - b[1] * a[0][1]) / det,
            (a[0][0] * b[1] - a[1][0] * b[0]) / det,
        ]
    })
}

fn check_endpoints(surface: &ProfileSurface, a: SurfacePoint, b: SurfacePoint, opts: &ConnectOptions) -> Result<()> {
    opts.validate()?;
    surface.check_point(a)?;
    surface.check_point(b)?;
    let chord = surface.chord(a, b);
    if chord > opts.max_len {
        return Err(GeoError::Unreachable(format!(
            "chord {chord} already exceeds max_len {}",
            opts.max_len
        )));
    }
    Ok(())
}

fn finish(
    surface: &ProfileSurface,
    a: SurfacePoint,
    best: Candidate,
    ambiguous: bool,
    candidates: usize,
    opts: &ConnectOptions,
) -> Result<Connection> {
    let path = shoot(surface, a, best.theta, best.length, opts.shot_tol)?;
    Ok(Connection {
        path,
        winding: best.winding,
        residual: best.residual,
        ambiguous,
        candidates,
    })
}

/// Shortest geodesic found from `a` to `b`, multi-started over headings and
/// windings.
pub fn connect_geodesic(
    surface: &ProfileSurface,
    a: SurfacePoint,
    b: SurfacePoint,
    opts: &ConnectOptions,
) -> Result<Connection> {
    check_endpoints(surface, a, b, opts)?;
    if a == b {
        return Ok(Connection {
            path: GeodesicPath::zero_length(surface, a, 0.0)?,
            winding: 0,
            residual: 0.0,
            ambiguous: false,
            candidates: 1,
        });
    }

    let problem = Problem::new(surface, a, b, opts);
    let length0 = surface.chord(a, b).max(1e-3);
    let starts: Vec<Candidate> = opts
        .windings
        .iter()
        .flat_map(|&winding| {
            (0..opts.n_starts).map(move |j| Candidate {
                theta: -PI + TAU * (j + 1) as f64 / opts.n_starts as f64,
                length: length0,
                winding,
                residual: f64::INFINITY,
            })
        })
        .collect();

    let coarse: Vec<Candidate> = run(opts.parallel, &starts, |c| problem.coarse(*c));
    // Many starts fall into the same basin; polish each basin once.
    let mut basins: Vec<Candidate> = Vec::new();
    for c in coarse {
        let seen = basins.iter().any(|d| {
            wrap_angle(c.theta - d.theta).abs() <= BASIN && (c.length - d.length).abs() <= BASIN
        });
        if !seen {
            basins.push(c);
        }
    }
    let found: Vec<Candidate> = run(opts.parallel, &basins, |c| problem.polish(*c));

    let (best, distinct) = select(&found).ok_or_else(|| {
        GeoError::Unreachable(format!(
            "no start converged from ({}, {}) to ({}, {})",
            a.u, a.v, b.u, b.v
        ))
    })?;
    let ambiguous = distinct
        .iter()
        .any(|c| c.length - best.length <= AMBIGUITY && wrap_angle(c.theta - best.theta).abs() > AMBIGUITY);
    finish(surface, a, best, ambiguous, distinct.len(), opts)
}

/// Minimal candidate under the deterministic tie-break, plus the distinct
/// geodesics among all candidates.
fn select(found: &[Candidate]) -> Option<(Candidate, Vec<Candidate>)> {
    let min_len = found.iter().map(|c| c.length).fold(f64::INFINITY, f64::min);
    let best = found
        .iter()
        .filter(|c| c.length - min_len <= TIE * min_len.max(1.0))
        .min_by(|x, y| {
            x.winding
                .abs()
                .cmp(&y.winding.abs())
                .then(x.theta.total_cmp(&y.theta))
                .then(x.length.total_cmp(&y.length))
        })
        .copied()?;

    let mut distinct: Vec<Candidate> = Vec::new();
    for c in found {
        let same = distinct.iter().any(|d| {
            wrap_angle(c.theta - d.theta).abs() <= AMBIGUITY && (c.length - d.length).abs() <= AMBIGUITY
        });
        if !same {
            distinct.push(*c);
        }
    }
    Some((best, distinct))
}

/// Single Newton solve from a known nearby solution, falling back to the
/// full multi-start search when it does not converge.
pub fn connect_from_guess(
    surface: &ProfileSurface,
    a: SurfacePoint,
    b: SurfacePoint,
    guess: (f64, f64, i32),
    opts: &ConnectOptions,
) -> Result<Connection> {
    check_endpoints(surface, a, b, opts)?;
    if a == b {
        return connect_geodesic(surface, a, b, opts);
    }
    let problem = Problem::new(surface, a, b, opts);
    let (theta, length, winding) = guess;
    let start = Candidate {
        theta,
        length: length.max(1e-6),
        winding,
        residual: f64::INFINITY,
    };
    match problem.polish(start) {
        Some(c) => finish(surface, a, c, false, 1, opts),
        None => connect_geodesic(surface, a, b, opts),
    }
}

/// Geodesic distance between two chart points.
pub fn distance(surface: &ProfileSurface, a: SurfacePoint, b: SurfacePoint, opts: &ConnectOptions) -> Result<f64> {
    connect_geodesic(surface, a, b, opts).map(|c| c.path.length)
}
