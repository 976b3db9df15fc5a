//! Clairaut constants of the branches of a three-way tree and the relations
//! they obey with the weights.
//!
//! Angles follow the frame of [`crate::surface`]: the heading `theta` is
//! measured from the parallel direction towards increasing `u`, so
//! `alpha = theta` is the angle with the parallel and `beta = pi/2 - theta`
//! the angle with the meridian. Clairaut constants are signed.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::connect::ConnectOptions;
use crate::error::{GeoError, Result};
use crate::fermat::{inverse_weights, lemma2_angles, measure_sector_angles, planted_headings, WeightTriple};
use crate::geodesic::{shoot, GeodesicPath, DEFAULT_TOL};
use crate::surface::{ProfileSurface, SurfacePoint};

/// `(x^2 + y^2 - z^2) / (2xy)`.
pub fn w_eval(x: f64, y: f64, z: f64) -> Result<f64> {
    let d = 2.0 * x * y;
    if d == 0.0 || !d.is_finite() {
        return Err(GeoError::InvalidArgument(format!("w({x}, {y}, {z}) has a zero denominator")));
    }
    Ok((x * x + y * y - z * z) / d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchConstants {
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `rho0 * cos(alpha)`.
    pub c_cos: f64,
    /// `rho0 * sin(beta)`.
    pub c_sin: f64,
    /// Launch value of the first integral stored on the path.
    pub c_path: f64,
    pub c_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Root {
    Plus,
    Minus,
}

/// Constants of branches 2 and 3 predicted from branch 1's angle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1 {
    pub rho0: f64,
    /// `alpha_1`, `pi + alpha_1 - phi_102`, `alpha_1 - pi + phi_301`.
    pub alpha: [f64; 3],
    /// `rho0 * cos(alpha_i)`.
    pub c: [f64; 3],
    /// Roots `w ± |tan alpha_1| sqrt(1 - w^2)` for `c2/c1` then `c3/c1`,
    /// each as `[plus, minus]`.
    pub roots: [[f64; 2]; 2],
    /// Root that reproduces `cos(alpha_j) / cos(alpha_1)`, for `j = 2, 3`.
    pub root_choice: [Root; 2],
    /// Distance of each root from the angular value.
    pub root_errors: [[f64; 2]; 2],
}

impl Theorem1 {
    pub fn ratio(&self, j: usize) -> f64 {
        self.c[j] / self.c[0]
    }
}

/// Closed-form constants for weights `b` and first-branch angle `alpha1`.
pub fn theorem1_constants(b: &WeightTriple, alpha1: f64, rho0: f64) -> Result<Theorem1> {
    let angles = lemma2_angles(b)?;
    if !(alpha1 > FRAC_PI_2 && alpha1 < PI) {
        return Err(GeoError::InvalidArgument(format!("alpha1 = {alpha1} must lie in (pi/2, pi)")));
    }
    if !(rho0 > 0.0 && rho0.is_finite()) {
        return Err(GeoError::InvalidArgument(format!("rho0 must be positive, got {rho0}")));
    }
    let alpha = [
        alpha1,
        PI + alpha1 - angles.phi_102,
        alpha1 - PI + angles.phi_301,
    ];
    let c = alpha.map(|a| rho0 * a.cos());
    let t = alpha1.tan().abs();
    let [b1, b2, b3] = b.as_array();
    let ws = [w_eval(b1, b2, b3)?, w_eval(b1, b3, b2)?];
    let mut roots = [[0.0; 2]; 2];
    let mut root_errors = [[0.0; 2]; 2];
    let mut root_choice = [Root::Plus; 2];
    for k in 0..2 {
        let w = ws[k];
        let s = t * (1.0 - w * w).max(0.0).sqrt();
        roots[k] = [w + s, w - s];
        let target = c[k + 1] / c[0];
        root_errors[k] = roots[k].map(|r| (r - target).abs());
        root_choice[k] = if root_errors[k][0] <= root_errors[k][1] { Root::Plus } else { Root::Minus };
    }
    Ok(Theorem1 {
        rho0,
        alpha,
        c,
        roots,
        root_choice,
        root_errors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem2 {
    /// `c_sin_i / sum(c_sin)`.
    pub ratios: [f64; 3],
    /// `b_i / sum(b)`.
    pub weights: [f64; 3],
    pub deviations: [f64; 3],
    /// All three sine constants are strictly positive.
    pub positive: bool,
}

impl Theorem2 {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClairautReport {
    pub a0: SurfacePoint,
    pub rho0: f64,
    pub branches: [BranchConstants; 3],
    /// Present when branch 1 leaves at an angle in `(pi/2, pi)`.
    pub theorem1: Option<Theorem1>,
    /// `|c_cos - c_sin|` over the branches.
    pub complement_error: f64,
}

/// Clairaut constants of three branches leaving `a0`.
pub fn branch_report(
    surface: &ProfileSurface,
    a0: SurfacePoint,
    branches: &[GeodesicPath],
    b: &WeightTriple,
) -> Result<ClairautReport> {
    b.validate()?;
    surface.check_point(a0)?;
    if branches.len() != 3 {
        return Err(GeoError::InvalidArgument(format!("expected 3 branches, got {}", branches.len())));
    }
    let rho0 = surface.jet(a0.u).phi;
    let mut out = Vec::with_capacity(3);
    for (i, p) in branches.iter().enumerate() {
        if surface.chart_distance(p.start, a0) > 1e-12 * (1.0 + rho0) {
            return Err(GeoError::InvalidArgument(format!("branch {} does not start at A0", i + 1)));
        }
        let theta = p.start_heading.rem_euclid(TAU);
        let beta = FRAC_PI_2 - theta;
        out.push(BranchConstants {
            theta,
            alpha: theta,
            beta,
            c_cos: rho0 * theta.cos(),
            c_sin: rho0 * beta.sin(),
            c_path: p.c_nominal,
            c_drift: p.c_drift,
        });
    }
    let branches: [BranchConstants; 3] = out.try_into().expect("three branches");
    let theta1 = branches[0].theta;
    let theorem1 = if theta1 > FRAC_PI_2 && theta1 < PI && b.admits_interior() {
        Some(theorem1_constants(b, theta1, rho0)?)
    } else {
        None
    };
    let complement_error = branches
        .iter()
        .map(|c| (c.c_cos.abs() - c.c_sin.abs()).abs())
        .fold(0.0, f64::max);
    Ok(ClairautReport {
        a0,
        rho0,
        branches,
        theorem1,
        complement_error,
    })
}

/// Compare the normalized sine constants with the normalized weights. Only
/// meaningful on a sphere.
pub fn theorem2_ratios(surface: &ProfileSurface, report: &ClairautReport, b: &WeightTriple) -> Result<Theorem2> {
    if !surface.is_sphere() {
        return Err(GeoError::InvalidArgument("sine-constant ratios are defined for spheres only".into()));
    }
    b.validate()?;
    let c = report.branches.map(|x| x.c_sin);
    let total: f64 = c.iter().sum();
    if total.abs() <= 1e-12 * report.rho0.max(1.0) {
        return Err(GeoError::UndefinedRatio("sine constants sum to zero".into()));
    }
    let ratios = c.map(|x| x / total);
    let weights = b.normalized();
    let deviations = std::array::from_fn(|i| (ratios[i] - weights[i]).abs());
    Ok(Theorem2 {
        ratios,
        weights,
        deviations,
        positive: c.iter().all(|x| *x > 0.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SineRule {
    /// Circumdiameter of the triangle with sides `b`.
    pub corrected: f64,
    /// `2 b1 b2 b3 / sqrt((b1+b2-b3)(b2+b3-b1)(b3+b2-b1))`, the form with a
    /// repeated factor and the perimeter factor missing.
    pub uncorrected: f64,
    /// `b_i / sin(phi_j0k)`.
    pub ratios: [f64; 3],
    /// Largest `|ratio_i - corrected|`.
    pub max_error: f64,
}

pub fn sine_rule_diameter(b: &WeightTriple) -> Result<SineRule> {
    b.validate()?;
    let [b1, b2, b3] = b.as_array();
    let factors = [b1 + b2 + b3, b1 + b2 - b3, b2 + b3 - b1, b1 + b3 - b2];
    if factors.iter().any(|f| *f <= 0.0) {
        return Err(GeoError::Degenerate(format!("weights {b1}, {b2}, {b3} do not form a triangle")));
    }
    let prod = 2.0 * b1 * b2 * b3;
    let corrected = prod / factors.iter().product::<f64>().sqrt();
    let uncorrected = prod / ((b1 + b2 - b3) * (b2 + b3 - b1) * (b3 + b2 - b1)).sqrt();
    let a = lemma2_angles(b)?;
    // b1 faces phi_203, b2 faces phi_301, b3 faces phi_102.
    let ratios = [b1 / a.phi_203.sin(), b2 / a.phi_301.sin(), b3 / a.phi_102.sin()];
    let max_error = ratios.iter().map(|r| (r - corrected).abs()).fold(0.0, f64::max);
    Ok(SineRule {
        corrected,
        uncorrected,
        ratios,
        max_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationRow {
    pub delta: f64,
    pub endpoints: [SurfacePoint; 3],
    /// Weights recovered from the measured angles, normalized to sum 1.
    pub recovered: [f64; 3],
    pub c_cos: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationExperiment {
    pub a0: SurfacePoint,
    pub rho0: f64,
    pub weights: WeightTriple,
    pub base_headings: [f64; 3],
    pub lengths: [f64; 3],
    pub rows: Vec<RotationRow>,
    /// Largest deviation of a recovered weight from the normalized input.
    pub weight_error: f64,
    /// `max - min` of each branch constant across the rotations.
    pub c_spread: [f64; 3],
}

/// Rotate a balanced tree about its apex and track what is invariant.
pub fn rotate_tree_experiment(
    surface: &ProfileSurface,
    a0: SurfacePoint,
    b: &WeightTriple,
    lengths: [f64; 3],
    theta0: f64,
    deltas: &[f64],
    opts: &ConnectOptions,
) -> Result<RotationExperiment> {
    surface.check_point(a0)?;
    if lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(GeoError::InvalidArgument("branch lengths must be positive".into()));
    }
    let angles = lemma2_angles(b)?;
    let rho0 = surface.jet(a0.u).phi;
    let target = b.normalized();

    let rows = deltas
        .par_iter()
        .map(|&delta| -> Result<RotationRow> {
            let headings = planted_headings(&angles, theta0 + delta);
            let mut endpoints = [a0; 3];
            for i in 0..3 {
                endpoints[i] = shoot(surface, a0, headings[i], lengths[i], DEFAULT_TOL)?.end;
            }
            let measured = measure_sector_angles(surface, a0, &endpoints, opts)?;
            let recovered = inverse_weights(&measured, 1.0)?.as_array();
            Ok(RotationRow {
                delta,
                endpoints,
                recovered,
                c_cos: headings.map(|h| rho0 * h.cos()),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let weight_error = rows
        .iter()
        .flat_map(|r| (0..3).map(move |i| (r.recovered[i] - target[i]).abs()))
        .fold(0.0, f64::max);
    let c_spread = std::array::from_fn(|i| {
        let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.c_cos[i]), hi.max(r.c_cos[i]))
        });
        if rows.is_empty() {
            0.0
        } else {
            hi - lo
        }
    });
    Ok(RotationExperiment {
        a0,
        rho0,
        weights: *b,
        base_headings: planted_headings(&angles, theta0),
        lengths,
        rows,
        weight_error,
        c_spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermat::planted_tree;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn w_examples() {
        assert_eq!(w_eval(1.0, 1.0, 1.0).unwrap(), 0.5);
        assert_eq!(w_eval(3.0, 4.0, 5.0).unwrap(), 0.0);
        assert!(w_eval(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn report_on_parallel_and_meridian() {
        let s = ProfileSurface::paraboloid(0.5).unwrap();
        let a0 = SurfacePoint::new(1.0, 0.0);
        let paths = [0.0, FRAC_PI_2, PI].map(|h| shoot(&s, a0, h, 0.2, DEFAULT_TOL).unwrap());
        let r = branch_report(&s, a0, &paths, &WeightTriple::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(r.branches[0].c_cos, r.rho0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.branches[1].c_cos, 0.0, epsilon = 1e-15);
        assert!(r.complement_error <= 1e-12);
        assert!(r.theorem1.is_none());

        let moved = shoot(&s, SurfacePoint::new(1.1, 0.0), 0.0, 0.2, DEFAULT_TOL).unwrap();
        let bad = [paths[0].clone(), moved, paths[2].clone()];
        assert!(branch_report(&s, a0, &bad, &WeightTriple::new(1.0, 1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn report_matches_path_integrals() {
        let s = ProfileSurface::paraboloid(0.5).unwrap();
        let a0 = SurfacePoint::new(1.0, 0.0);
        let paths = [100f64, 220.0, 340.0].map(|d| shoot(&s, a0, d.to_radians(), 0.4, DEFAULT_TOL).unwrap());
        let r = branch_report(&s, a0, &paths, &WeightTriple::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        for (c, p) in r.branches.iter().zip(&paths) {
            assert_abs_diff_eq!(c.c_cos, r.rho0 * p.start_heading.cos(), epsilon = 1e-15);
            assert!((c.c_cos - c.c_path).abs() <= 1e-12 + 10.0 * DEFAULT_TOL * r.rho0.max(1.0));
        }
        assert!(r.theorem1.is_some());
    }

    #[test]
    fn theorem1_equal_weights() {
        let b = WeightTriple::new(1.0, 1.0, 1.0).unwrap();
        let t = theorem1_constants(&b, 100f64.to_radians(), 1.0).unwrap();
        assert_abs_diff_eq!(t.alpha[1], 160f64.to_radians(), epsilon = 1e-14);
        assert_abs_diff_eq!(t.alpha[2], 40f64.to_radians(), epsilon = 1e-14);
        assert_eq!(t.root_choice, [Root::Plus, Root::Minus]);
        let r2 = 160f64.to_radians().cos() / 100f64.to_radians().cos();
        let r3 = 40f64.to_radians().cos() / 100f64.to_radians().cos();
        assert_abs_diff_eq!(t.roots[0][0], r2, epsilon = 1e-12);
        assert_abs_diff_eq!(t.roots[1][1], r3, epsilon = 1e-12);
        assert_abs_diff_eq!(t.ratio(1), 5.411474, epsilon = 1e-6);
        assert_abs_diff_eq!(t.ratio(2), -4.411474, epsilon = 1e-6);

        let t = theorem1_constants(&b, PI - 1e-9, 1.0).unwrap();
        assert_abs_diff_eq!(t.c[0], -1.0, epsilon = 1e-12);
        assert!(theorem1_constants(&b, FRAC_PI_2, 1.0).is_err());
        assert!(theorem1_constants(&WeightTriple::new(1.0, 1.0, 2.0).unwrap(), 2.0, 1.0).is_err());
    }

    #[test]
    fn theorem1_three_four_five() {
        let t = theorem1_constants(&WeightTriple::new(3.0, 4.0, 5.0).unwrap(), 95f64.to_radians(), 2.0).unwrap();
        for k in 0..2 {
            let target = t.ratio(k + 1);
            let [hi, lo] = t.roots[k];
            assert!(lo <= target + 1e-12 && target <= hi + 1e-12);
            let hits = t.root_errors[k].iter().filter(|e| **e <= 1e-12 * target.abs().max(1.0)).count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn theorem2_examples() {
        let s = ProfileSurface::sphere(1.0).unwrap();
        let a0 = SurfacePoint::new(FRAC_PI_2, 0.0);
        let b = WeightTriple::new(1.0, 1.0, 1.0).unwrap();
        let paths = [30f64, 150.0, 270.0].map(|d| shoot(&s, a0, d.to_radians(), 0.3, DEFAULT_TOL).unwrap());
        let r = branch_report(&s, a0, &paths, &b).unwrap();
        let c = r.branches.map(|x| x.c_sin);
        assert_abs_diff_eq!(c[0], 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1], -(3f64.sqrt()) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[2], 0.0, epsilon = 1e-15);
        // The three sine constants cancel.
        assert!(matches!(theorem2_ratios(&s, &r, &b), Err(GeoError::UndefinedRatio(_))));

        let paths = [60f64, 120.0, 300.0].map(|d| shoot(&s, a0, d.to_radians(), 0.3, DEFAULT_TOL).unwrap());
        let r = branch_report(&s, a0, &paths, &b).unwrap();
        let t = theorem2_ratios(&s, &r, &b).unwrap();
        assert!(!t.positive);

        let meridians = [FRAC_PI_2, -FRAC_PI_2, FRAC_PI_2].map(|h| shoot(&s, a0, h, 0.3, DEFAULT_TOL).unwrap());
        let r = branch_report(&s, a0, &meridians, &b).unwrap();
        assert!(matches!(theorem2_ratios(&s, &r, &b), Err(GeoError::UndefinedRatio(_))));

        let p = ProfileSurface::paraboloid(1.0).unwrap();
        let r = branch_report(&p, SurfacePoint::new(1.0, 0.0), &[0.0, 2.0, 4.0].map(|h| {
            shoot(&p, SurfacePoint::new(1.0, 0.0), h, 0.2, DEFAULT_TOL).unwrap()
        }), &b)
        .unwrap();
        assert!(theorem2_ratios(&p, &r, &b).is_err());
    }

    #[test]
    fn theorem2_constructed() {
        let s = ProfileSurface::sphere(1.0).unwrap();
        let a0 = SurfacePoint::new(1.2, 0.4);
        let b = WeightTriple::new(2.0, 3.0, 4.0).unwrap();
        let kappa = 0.2;
        let paths = [1.0, -1.0, 1.0]
            .iter()
            .zip(b.as_array())
            .map(|(sgn, w)| shoot(&s, a0, sgn * (kappa * w).acos(), 0.3, DEFAULT_TOL).unwrap())
            .collect::<Vec<_>>();
        let r = branch_report(&s, a0, &paths, &b).unwrap();
        let t = theorem2_ratios(&s, &r, &b).unwrap();
        assert!(t.positive);
        assert!(t.max_deviation() <= 1e-12);
    }

    #[test]
    fn sine_rule_examples() {
        let d = sine_rule_diameter(&WeightTriple::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(d.corrected, 2.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(d.uncorrected, 2.0, epsilon = 1e-15);
        assert!(d.max_error <= 1e-12);

        let d = sine_rule_diameter(&WeightTriple::new(3.0, 4.0, 5.0).unwrap()).unwrap();
        assert_abs_diff_eq!(d.corrected, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.ratios[2], 5.0, epsilon = 1e-12);

        assert!(matches!(
            sine_rule_diameter(&WeightTriple::new(1.0, 1.0, 2.0).unwrap()),
            Err(GeoError::Degenerate(_))
        ));
    }

    #[test]
    fn rotation_on_paraboloid() {
        let s = ProfileSurface::paraboloid(0.5).unwrap();
        let a0 = SurfacePoint::new(1.0, 0.0);
        let b = WeightTriple::new(2.0, 3.0, 4.0).unwrap();
        let deltas = [0.0, 15f64.to_radians(), 30f64.to_radians()];
        let e = rotate_tree_experiment(&s, a0, &b, [0.3, 0.4, 0.5], 0.3, &deltas, &ConnectOptions::default())
            .unwrap();
        assert!(e.weight_error <= 1e-6, "{}", e.weight_error);
        assert!(e.c_spread.iter().all(|c| *c > 1e-3 * e.rho0));

        let base = planted_tree(&s, a0, &b, 0.3, [0.3, 0.4, 0.5], DEFAULT_TOL).unwrap();
        for (p, q) in base.iter().zip(e.rows[0].endpoints) {
            assert_eq!(p.end, q);
        }
    }

    proptest! {
        #[test]
        fn w_is_minus_cos_of_branch_angle(b1 in 0.1f64..10.0, b2 in 0.1f64..10.0, b3 in 0.1f64..10.0) {
            let b = WeightTriple::new(b1, b2, b3).unwrap();
            prop_assume!(b.admits_interior());
            let a = lemma2_angles(&b).unwrap();
            prop_assert!((w_eval(b1, b2, b3).unwrap() + a.phi_102.cos()).abs() <= 1e-12);
            prop_assert!((w_eval(b2, b3, b1).unwrap() + a.phi_203.cos()).abs() <= 1e-12);
            prop_assert!((w_eval(b3, b1, b2).unwrap() + a.phi_301.cos()).abs() <= 1e-12);
        }

        #[test]
        fn sine_rule_is_constant(b1 in 0.1f64..10.0, b2 in 0.1f64..10.0, b3 in 0.1f64..10.0) {
            let b = WeightTriple::new(b1, b2, b3).unwrap();
            prop_assume!(b.admits_interior());
            // Near-degenerate triples lose digits in sin(phi) close to pi.
            let a = lemma2_angles(&b).unwrap();
            prop_assume!(a.as_array().iter().all(|x| *x > 1e-2 && *x < PI - 1e-2));
            let d = sine_rule_diameter(&b).unwrap();
            prop_assert!(d.max_error <= 1e-12 * d.corrected.max(1.0), "{:?}", d);
        }
    }
}
