//! Built-in oracle suites.
//!
//! Every suite draws its cases from a fixed seed and checks the library
//! against an independent reference: closed-form distances, a Euclidean
//! Weiszfeld iteration, planted trees with a known apex, or direct
//! trigonometric evaluation.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clairaut::{
    branch_report, rotate_tree_experiment, sine_rule_diameter, theorem1_constants, theorem2_ratios, Root,
};
use crate::connect::{connect_geodesic, ConnectOptions};
use crate::error::Result;
use crate::fermat::{
    inverse_weights, lemma2_angles, planted_tree, solve_fermat, FermatMode, FermatOptions,
    WeightTriple,
};
use crate::geodesic::{shoot, DEFAULT_TOL};
use crate::surface::{ProfileSurface, SurfacePoint};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub elapsed: Duration,
}

pub const SUITES: [(u32, &str); 10] = [
    (1, "sphere distance"),
    (2, "cylinder unrolling"),
    (3, "clairaut drift"),
    (4, "plane fermat vs weiszfeld"),
    (5, "planted tree recovery"),
    (6, "inverse round trip"),
    (7, "closed-form root consistency"),
    (8, "sine rule"),
    (9, "rotation experiment"),
    (10, "sine-constant ratios"),
];

/// Run one suite by id (1 to 10).
pub fn run_suite(id: u32) -> Option<SuiteOutcome> {
    let &(_, name) = SUITES.iter().find(|(i, _)| *i == id)?;
    let start = Instant::now();
    let result = match id {
        1 => sphere_distance(),
        2 => cylinder_unrolling(),
        3 => clairaut_drift(),
        4 => plane_fermat(),
        5 => planted_recovery(),
        6 => inverse_round_trip(),
        7 => root_consistency(),
        8 => sine_rule(),
        9 => rotation(),
        _ => sine_ratios(),
    };
    let (passed, detail) = match result {
        Ok(Check { passed, detail }) => (passed, detail),
        Err(e) => (false, format!("error: {e}")),
    };
    Some(SuiteOutcome {
        id,
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    })
}

pub fn run_all() -> Vec<SuiteOutcome> {
    SUITES.iter().filter_map(|(id, _)| run_suite(*id)).collect()
}

struct Check {
    passed: bool,
    detail: String,
}

impl Check {
    fn new(passed: bool, detail: String) -> Self {
        Self { passed, detail }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn to_sphere(x: [f64; 3]) -> SurfacePoint {
    SurfacePoint::new(x[2].clamp(-1.0, 1.0).acos(), x[1].atan2(x[0]))
}

fn from_sphere(p: SurfacePoint) -> [f64; 3] {
    let (su, cu) = p.u.sin_cos();
    [su * p.v.cos(), su * p.v.sin(), cu]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    a.map(|x| x / n)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Weights with every branch angle in `[margin, pi - margin]`.
fn random_weights(rng: &mut ChaCha8Rng, lo: f64, hi: f64, margin: f64) -> WeightTriple {
    loop {
        let b = WeightTriple {
            b1: rng.gen_range(lo..hi),
            b2: rng.gen_range(lo..hi),
            b3: rng.gen_range(lo..hi),
        };
        if let Ok(a) = lemma2_angles(&b) {
            if a.as_array().iter().all(|x| *x >= margin && *x <= PI - margin) {
                return b;
            }
        }
    }
}

fn sphere_distance() -> Result<Check> {
    let s = ProfileSurface::sphere(1.0)?;
    let opts = ConnectOptions::default();
    let mut rng = rng(1);
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut n = 0;
    while n < 200 {
        let a = normalize([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        let d: f64 = rng.gen_range(0.1..2.5);
        // Rotate `a` by `d` about a random axis orthogonal to it.
        let r = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let t = normalize(cross(a, r));
        let b: [f64; 3] = std::array::from_fn(|i| a[i] * d.cos() + t[i] * d.sin());
        let (pa, pb) = (to_sphere(a), to_sphere(b));
        if [pa.u, pb.u].iter().any(|u| *u < 0.05 || *u > PI - 0.05) {
            continue;
        }
        n += 1;
        let oracle = dot(from_sphere(pa), from_sphere(pb)).clamp(-1.0, 1.0).acos();
        let got = connect_geodesic(&s, pa, pb, &opts)?.path.length;
        worst = worst.max((got - oracle).abs() / oracle);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Check::new(
        worst <= 1e-7 && secs <= 30.0,
        format!("200 pairs, max relative error {worst:.2e}, {secs:.1} s"),
    ))
}

fn cylinder_unrolling() -> Result<Check> {
    let opts = ConnectOptions::default();
    let mut rng = rng(2);
    let mut worst = 0.0f64;
    let mut turns = [0usize; 3];
    for _ in 0..100 {
        let radius = rng.gen_range(0.5..2.0);
        let s = ProfileSurface::cylinder(radius)?;
        let a = SurfacePoint::new(rng.gen_range(-3.0..3.0), rng.gen_range(-PI..PI));
        let du = rng.gen_range(-2.0..2.0);
        let delta = rng.gen_range(-PI + 0.05..PI - 0.05);
        let k = rng.gen_range(-1i32..=1);
        turns[(k + 1) as usize] += 1;
        let b = SurfacePoint::new(a.u + du, a.v + delta + TAU * k as f64);
        let oracle = du.hypot(radius * delta);
        let got = connect_geodesic(&s, a, b, &opts)?.path.length;
        worst = worst.max((got - oracle).abs() / oracle);
    }
    Ok(Check::new(
        worst <= 1e-7,
        format!("100 pairs (sheet offsets -1/0/1: {turns:?}), max relative error {worst:.2e}"),
    ))
}

fn clairaut_drift() -> Result<Check> {
    let surfaces = [
        ("sphere", ProfileSurface::sphere(1.0)?, 0.3, PI - 0.3),
        ("paraboloid", ProfileSurface::paraboloid(0.5)?, 0.2, 3.0),
        ("catenoid", ProfileSurface::catenoid(1.0)?, -2.0, 2.0),
    ];
    let mut rng = rng(3);
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (name, s, lo, hi) in &surfaces {
        let mut n = 0;
        let mut local = 0.0f64;
        while n < 50 {
            let p = SurfacePoint::new(rng.gen_range(*lo..*hi), rng.gen_range(-PI..PI));
            let theta = rng.gen_range(-PI..PI);
            let len = rng.gen_range(0.05..3.0);
            let Ok(path) = shoot(s, p, theta, len, DEFAULT_TOL) else { continue };
            n += 1;
            let c0 = s.jet(p.u).phi * theta.cos();
            for x in &path.samples {
                let phi = s.jet(x.state.u).phi;
                let c = phi * phi * x.state.dv;
                let drift = (c - c0).abs() / phi.max(1.0);
                local = local.max(drift);
            }
        }
        worst = worst.max(local);
        parts.push(format!("{name} {local:.1e}"));
    }
    Ok(Check::new(
        worst <= 1e-8,
        format!("150 shots, max drift / max(1, rho): {}", parts.join(", ")),
    ))
}

/// Weighted geometric median of three planar points.
fn weiszfeld(pts: &[[f64; 2]; 3], w: [f64; 3]) -> [f64; 2] {
    let total: f64 = w.iter().sum();
    let mut x = [0.0; 2];
    for (p, b) in pts.iter().zip(w) {
        x[0] += b * p[0] / total;
        x[1] += b * p[1] / total;
    }
    for _ in 0..200_000 {
        let (mut num, mut den) = ([0.0; 2], 0.0);
        for (p, b) in pts.iter().zip(w) {
            let d = (x[0] - p[0]).hypot(x[1] - p[1]);
            num[0] += b * p[0] / d;
            num[1] += b * p[1] / d;
            den += b / d;
        }
        let next = [num[0] / den, num[1] / den];
        let step = (next[0] - x[0]).hypot(next[1] - x[1]);
        x = next;
        if step < 1e-15 {
            break;
        }
    }
    x
}

/// Euclidean version of the three norm inequalities.
fn planar_interior(pts: &[[f64; 2]; 3], w: [f64; 3]) -> bool {
    (0..3).all(|i| {
        let mut r = [0.0; 2];
        for j in (0..3).filter(|j| *j != i) {
            let d = [pts[j][0] - pts[i][0], pts[j][1] - pts[i][1]];
            let n = d[0].hypot(d[1]);
            r[0] += w[j] * d[0] / n;
            r[1] += w[j] * d[1] / n;
        }
        r[0].hypot(r[1]) > w[i]
    })
}

fn plane_fermat() -> Result<Check> {
    let s = ProfileSurface::plane()?;
    let opts = FermatOptions::default();
    let mut rng = rng(4);
    let (mut pos, mut ang) = (0.0f64, 0.0f64);
    let mut n = 0;
    while n < 50 {
        let pts: [[f64; 2]; 3] =
            std::array::from_fn(|_| [3.0 + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        let w = [rng.gen_range(1.0..2.0), rng.gen_range(1.0..2.0), rng.gen_range(1.0..2.0)];
        if !planar_interior(&pts, w) {
            continue;
        }
        let x = weiszfeld(&pts, w);
        // Keep the apex clear of the terminals so the branches are resolvable.
        if pts.iter().any(|p| (p[0] - x[0]).hypot(p[1] - x[1]) < 0.05) {
            continue;
        }
        n += 1;
        let chart = pts.map(|p| SurfacePoint::new(p[0].hypot(p[1]), p[1].atan2(p[0])));
        let b = WeightTriple::from_array(w)?;
        let r = solve_fermat(&s, &chart, &b, &opts)?;
        if r.mode != FermatMode::Interior {
            return Ok(Check::new(false, format!("case {n}: solver reported {:?}", r.mode)));
        }
        let e = s.embed(r.a0)?;
        pos = pos.max((e[0] - x[0]).hypot(e[1] - x[1]));
        let want = lemma2_angles(&b)?;
        ang = ang.max(r.sector_angles.expect("interior").max_abs_diff(&want));
    }
    Ok(Check::new(
        pos <= 1e-6 && ang <= 1e-6,
        format!("50 triangles, max position error {pos:.2e}, max angle error {ang:.2e} rad"),
    ))
}

fn planted_recovery() -> Result<Check> {
    let surfaces = [
        ("sphere", ProfileSurface::sphere(1.0)?, 0.5, PI - 0.5),
        ("paraboloid", ProfileSurface::paraboloid(0.5)?, 0.6, 2.5),
        ("catenoid", ProfileSurface::catenoid(1.0)?, -1.5, 1.5),
    ];
    let opts = FermatOptions::default();
    let mut rng = rng(5);
    let (mut dist, mut ang) = (0.0f64, 0.0f64);
    let mut parts = Vec::new();
    for (name, s, lo, hi) in &surfaces {
        let (mut d_local, mut a_local) = (0.0f64, 0.0f64);
        for _ in 0..20 {
            let a0 = SurfacePoint::new(rng.gen_range(*lo..*hi), rng.gen_range(-PI..PI));
            let b = random_weights(&mut rng, 0.5, 2.0, 0.2);
            let lengths = [(); 3].map(|_| rng.gen_range(0.15..0.5));
            let theta0 = rng.gen_range(-PI..PI);
            let tree = planted_tree(s, a0, &b, theta0, lengths, DEFAULT_TOL)?;
            let pts = tree.each_ref().map(|p| p.end);
            let r = solve_fermat(s, &pts, &b, &opts)?;
            d_local = d_local.max(s.chord(r.a0, a0));
            let got = r.sector_angles.ok_or_else(|| {
                crate::error::GeoError::Degenerate(format!("planted tree on {name} solved as {:?}", r.mode))
            })?;
            a_local = a_local.max(got.max_abs_diff(&lemma2_angles(&b)?));
        }
        dist = dist.max(d_local);
        ang = ang.max(a_local);
        parts.push(format!("{name} {d_local:.1e}/{a_local:.1e}"));
    }
    Ok(Check::new(
        dist <= 1e-5 && ang <= 1e-5,
        format!("60 trees, apex distance / angle error: {}", parts.join(", ")),
    ))
}

fn inverse_round_trip() -> Result<Check> {
    let mut rng = rng(6);
    let (mut err, mut sum_err) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let b = random_weights(&mut rng, 0.5, 2.0, 1e-3);
        let a = lemma2_angles(&b)?;
        sum_err = sum_err.max((a.sum() - TAU).abs());
        let back = inverse_weights(&a, b.sum())?;
        for (x, y) in back.as_array().iter().zip(b.as_array()) {
            err = err.max((x - y).abs());
        }
    }
    Ok(Check::new(
        err <= 1e-10 && sum_err <= 1e-12,
        format!("1000 triples, max weight error {err:.2e}, max angle-sum error {sum_err:.2e}"),
    ))
}

fn root_consistency() -> Result<Check> {
    let mut rng = rng(7);
    let mut failures = 0;
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let b = random_weights(&mut rng, 0.5, 2.0, 1e-3);
        let alpha1 = rng.gen_range(FRAC_PI_2 + 0.01..PI - 0.01);
        let t = theorem1_constants(&b, alpha1, 1.0)?;
        // Reference ratios straight from the law of cosines.
        let [b1, b2, b3] = b.as_array();
        let phi102 = ((b3 * b3 - b1 * b1 - b2 * b2) / (2.0 * b1 * b2)).acos();
        let phi301 = ((b2 * b2 - b3 * b3 - b1 * b1) / (2.0 * b3 * b1)).acos();
        let want = [
            (PI + alpha1 - phi102).cos() / alpha1.cos(),
            (alpha1 - PI + phi301).cos() / alpha1.cos(),
        ];
        for k in 0..2 {
            let tol = 1e-12 * want[k].abs().max(1.0);
            let hits = t.roots[k].iter().filter(|r| (*r - want[k]).abs() <= tol).count();
            let best = t.roots[k].iter().map(|r| (r - want[k]).abs() / want[k].abs().max(1.0)).fold(f64::MAX, f64::min);
            worst = worst.max(best);
            if hits != 1 {
                failures += 1;
            }
        }
    }
    let eq = theorem1_constants(&WeightTriple::new(1.0, 1.0, 1.0)?, 100f64.to_radians(), 1.0)?;
    let flagged = eq.root_choice == [Root::Plus, Root::Minus];
    Ok(Check::new(
        failures == 0 && flagged,
        format!(
            "500 cases, {failures} without a unique matching root, max relative error {worst:.1e}; \
             b=(1,1,1), alpha1=100deg: c2/c1 = {:.6} needs the + root (minus-sign form gives {:.6}), c3/c1 = {:.6}",
            eq.ratio(1),
            eq.roots[0][1],
            eq.ratio(2)
        ),
    ))
}

fn sine_rule() -> Result<Check> {
    let mut rng = rng(8);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let b = random_weights(&mut rng, 0.5, 2.0, 1e-2);
        let d = sine_rule_diameter(&b)?;
        let spread = d.ratios.iter().fold(f64::MIN, |m, x| m.max(*x)) - d.ratios.iter().fold(f64::MAX, |m, x| m.min(*x));
        worst = worst.max(spread.max(d.max_error) / d.corrected.max(1.0));
    }
    let eq = sine_rule_diameter(&WeightTriple::new(1.0, 1.0, 1.0)?)?;
    let documented = (eq.corrected - 2.0 / 3f64.sqrt()).abs() <= 1e-12 && (eq.uncorrected - 2.0).abs() <= 1e-12;
    Ok(Check::new(
        worst <= 1e-12 && documented,
        format!(
            "1000 triples, max deviation {worst:.1e}; b=(1,1,1): circumdiameter {:.6}, uncorrected form {:.6}",
            eq.corrected, eq.uncorrected
        ),
    ))
}

fn rotation() -> Result<Check> {
    let deltas: Vec<f64> = (0..6).map(|k| (10.0 * k as f64).to_radians()).collect();
    let opts = ConnectOptions::default();
    let b = WeightTriple::new(2.0, 3.0, 4.0)?;
    let cases = [
        ("paraboloid", ProfileSurface::paraboloid(0.5)?, SurfacePoint::new(1.0, 0.0)),
        ("sphere", ProfileSurface::sphere(1.0)?, SurfacePoint::new(1.2, 0.3)),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, s, a0) in &cases {
        let e = rotate_tree_experiment(s, *a0, &b, [0.3, 0.4, 0.5], 0.3, &deltas, &opts)?;
        let min_spread = e.c_spread.iter().copied().fold(f64::MAX, f64::min);
        passed &= e.weight_error <= 1e-6 && min_spread > 1e-3 * e.rho0;
        parts.push(format!(
            "{name}: weight drift {:.1e}, smallest constant spread {:.3} (rho0 {:.3})",
            e.weight_error, min_spread, e.rho0
        ));
    }
    Ok(Check::new(passed, parts.join("; ")))
}

fn sine_ratios() -> Result<Check> {
    let s = ProfileSurface::sphere(1.0)?;
    let opts = FermatOptions::default();
    let mut rng = rng(10);

    // Solved planted trees: the report must be reproducible.
    let mut violations = 0;
    let mut deviations = Vec::new();
    for _ in 0..3 {
        let a0 = SurfacePoint::new(rng.gen_range(0.8..PI - 0.8), rng.gen_range(-PI..PI));
        let b = random_weights(&mut rng, 0.5, 2.0, 0.2);
        let theta0 = rng.gen_range(-PI..PI);
        let pts = planted_tree(&s, a0, &b, theta0, [0.3, 0.35, 0.4], DEFAULT_TOL)?.map(|p| p.end);
        let report = |_: ()| -> Result<_> {
            let r = solve_fermat(&s, &pts, &b, &opts)?;
            let c = branch_report(&s, r.a0, &r.branches, &b)?;
            theorem2_ratios(&s, &c, &b)
        };
        let (first, second) = (report(())?, report(())?);
        if first != second {
            return Ok(Check::new(false, "report differs between identical runs".into()));
        }
        if !first.positive {
            violations += 1;
        }
        deviations.push(format!("{:.3}", first.max_deviation()));
    }

    // Headings with sin(beta_i) proportional to b_i.
    let b = WeightTriple::new(2.0, 3.0, 4.0)?;
    let a0 = SurfacePoint::new(1.2, 0.4);
    let kappa = 0.2;
    let paths: Vec<_> = b
        .as_array()
        .iter()
        .zip([1.0, -1.0, 1.0])
        .map(|(w, sgn)| shoot(&s, a0, sgn * (kappa * w).acos(), 0.3, DEFAULT_TOL))
        .collect::<Result<_>>()?;
    let c = branch_report(&s, a0, &paths, &b)?;
    let t = theorem2_ratios(&s, &c, &b)?;
    let constructed = t.max_deviation();

    Ok(Check::new(
        constructed <= 1e-6,
        format!(
            "constructed case deviation {constructed:.1e}; planted trees deviations [{}], positivity violated in {violations} of 3 (flagged)",
            deviations.join(", ")
        ),
    ))
}
