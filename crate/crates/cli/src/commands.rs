use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use clairaut_core::clairaut::{sine_rule_diameter, theorem2_ratios, SineRule, Theorem2};
use clairaut_core::fermat::{planted_headings, FermatMode};
use clairaut_core::verify::{self, SuiteOutcome};
use clairaut_core::{
    branch_report, connect_geodesic, inverse_weights, lemma2_angles, measure_sector_angles, rotate_tree_experiment,
    shoot, solve_fermat, ClairautReport, Connection, FermatResult, GeoError, GeodesicPath, ProfileSurface,
    SectorAngles, SurfacePoint, WeightTriple, DEFAULT_TOL,
};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::report::Warning;
use crate::scenario::Loaded;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Shoot,
    Connect,
    FermatSolve,
    FermatInverse,
    ClairautReport,
    RotateExperiment,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Shoot => "shoot",
            Command::Connect => "connect",
            Command::FermatSolve => "fermat-solve",
            Command::FermatInverse => "fermat-inverse",
            Command::ClairautReport => "clairaut-report",
            Command::RotateExperiment => "rotate-experiment",
            Command::Verify => "verify",
        }
    }
}

pub struct Outcome {
    pub results: Value,
    pub warnings: Vec<Warning>,
    /// Some verification suite failed.
    pub failed: bool,
}

impl Outcome {
    fn new(results: impl Serialize, warnings: Vec<Warning>) -> Result<Self, CliError> {
        Ok(Self {
            results: serde_json::to_value(results).map_err(|e| CliError::Output(e.to_string()))?,
            warnings,
            failed: false,
        })
    }
}

/// Where branch polylines go, if anywhere.
pub struct PathSink<'a> {
    pub dir: Option<&'a Path>,
    pub surface: Option<&'a ProfileSurface>,
}

impl PathSink<'_> {
    fn write(&self, name: &str, path: &GeodesicPath) -> Result<(), CliError> {
        let (Some(dir), Some(surface)) = (self.dir, self.surface) else {
            return Ok(());
        };
        let io = |e: std::io::Error| CliError::Output(format!("{}: {e}", dir.join(name).display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        let file = File::create(dir.join(name)).map_err(io)?;
        path.write_csv(surface, BufWriter::new(file)).map_err(io)
    }
}

pub fn run(command: Command, loaded: Option<&Loaded>, suites: &[u32], sink: &PathSink) -> Result<Outcome, CliError> {
    if command == Command::Verify {
        return run_verify(suites);
    }
    let l = loaded.ok_or_else(|| CliError::Config(format!("--scenario is required by {}", command.name())))?;
    match command {
        Command::Shoot => run_shoot(l, sink),
        Command::Connect => run_connect(l, sink),
        Command::FermatSolve => run_fermat(l, sink),
        Command::FermatInverse => run_inverse(l),
        Command::ClairautReport => run_clairaut(l, sink),
        Command::RotateExperiment => run_rotation(l, sink),
        Command::Verify => unreachable!(),
    }
}

#[derive(Serialize)]
struct ShotResult<'a> {
    from: &'a str,
    heading: f64,
    length: f64,
    path: GeodesicPath,
}

fn run_shoot(l: &Loaded, sink: &PathSink) -> Result<Outcome, CliError> {
    let shots = l
        .scenario
        .shoot
        .as_ref()
        .ok_or_else(|| CliError::Config("shoot: required by shoot".into()))?;
    let mut out = Vec::new();
    for (i, s) in shots.iter().enumerate() {
        let heading = s.heading.radians();
        let path = shoot(&l.surface, l.point(&s.from), heading, s.length, l.scenario.options.tol)
            .map_err(|e| CliError::from(e).context(format!("shoot[{i}]")))?;
        sink.write(&format!("shoot_{i}.csv"), &path)?;
        out.push(ShotResult {
            from: &s.from,
            heading,
            length: s.length,
            path,
        });
    }
    Outcome::new(out, Vec::new())
}

#[derive(Serialize)]
struct ConnectResult {
    from: String,
    to: String,
    #[serde(flatten)]
    connection: Connection,
}

fn ambiguity(what: &str, c: &Connection) -> Option<Warning> {
    c.ambiguous.then(|| {
        Warning::new(
            "ambiguous",
            format!("{what}: another geodesic is within 1e-6 of the shortest length {}", c.path.length),
        )
    })
}

fn run_connect(l: &Loaded, sink: &PathSink) -> Result<Outcome, CliError> {
    let pairs: Vec<[String; 2]> = match (&l.scenario.connect, &l.scenario.terminals) {
        (Some(c), _) => c.pairs.clone(),
        (None, Some(t)) => vec![
            [t[0].clone(), t[1].clone()],
            [t[0].clone(), t[2].clone()],
            [t[1].clone(), t[2].clone()],
        ],
        (None, None) => return Err(CliError::Config("connect: required by connect (or give terminals)".into())),
    };
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for [a, b] in pairs {
        let what = format!("{a} -> {b}");
        let c = connect_geodesic(&l.surface, l.point(&a), l.point(&b), &l.scenario.options.connect)
            .map_err(|e| CliError::from(e).context(what.clone()))?;
        warnings.extend(ambiguity(&what, &c));
        sink.write(&format!("connect_{a}_{b}.csv"), &c.path)?;
        out.push(ConnectResult {
            from: a,
            to: b,
            connection: c,
        });
    }
    Outcome::new(out, warnings)
}

fn solve(l: &Loaded, command: &str) -> Result<(WeightTriple, FermatResult, Vec<Warning>), CliError> {
    let pts = l.terminals(command)?;
    let b = l.weights(command)?;
    let r = solve_fermat(&l.surface, &pts, &b, &l.fermat_options())?;
    let mut warnings = Vec::new();
    if let FermatMode::Vertex(i) = r.mode {
        warnings.push(Warning::new(
            "vertex_regime",
            format!("the minimizer is terminal {i}; weight {i} dominates the others at that vertex"),
        ));
    }
    for i in &r.ambiguous_branches {
        warnings.push(Warning::new(
            "ambiguous",
            format!("branch {i}: another geodesic is within 1e-6 of the shortest length"),
        ));
    }
    if let Some(d) = r.angle_deviation {
        if d > l.scenario.options.fermat.angle_tol {
            warnings.push(Warning::new(
                "angle_mismatch",
                format!("measured sector angles differ from the weight-implied ones by {d:e} rad"),
            ));
        }
    }
    Ok((b, r, warnings))
}

fn write_branches(sink: &PathSink, prefix: &str, branches: &[GeodesicPath]) -> Result<(), CliError> {
    for (i, p) in branches.iter().enumerate() {
        sink.write(&format!("{prefix}branch_{}.csv", i + 1), p)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FermatOutput<'a> {
    terminals: &'a [String; 3],
    weights: WeightTriple,
    #[serde(flatten)]
    result: FermatResult,
}

fn run_fermat(l: &Loaded, sink: &PathSink) -> Result<Outcome, CliError> {
    let (weights, result, warnings) = solve(l, "fermat-solve")?;
    write_branches(sink, "", &result.branches)?;
    Outcome::new(
        FermatOutput {
            terminals: l.scenario.terminals.as_ref().expect("checked by solve"),
            weights,
            result,
        },
        warnings,
    )
}

#[derive(Serialize)]
struct InverseOutput {
    source: &'static str,
    apex: Option<SurfacePoint>,
    sector_angles: SectorAngles,
    weights: WeightTriple,
}

fn run_inverse(l: &Loaded) -> Result<Outcome, CliError> {
    let inv = l
        .scenario
        .inverse
        .as_ref()
        .ok_or_else(|| CliError::Config("inverse: required by fermat-inverse".into()))?;
    let (source, apex, angles) = match (&inv.angles, &inv.apex) {
        (Some(a), _) => ("angles", None, SectorAngles::from_array(a.map(|x| x.radians()))),
        (None, Some(name)) => {
            let apex = l.point(name);
            let pts = l.terminals("fermat-inverse")?;
            let a = measure_sector_angles(&l.surface, apex, &pts, &l.scenario.options.connect)?;
            ("apex", Some(apex), a)
        }
        (None, None) => unreachable!("validated"),
    };
    let weights = inverse_weights(&angles, inv.total).map_err(|e| CliError::from(e).context("inverse"))?;
    Outcome::new(
        InverseOutput {
            source,
            apex,
            sector_angles: angles,
            weights,
        },
        Vec::new(),
    )
}

#[derive(Serialize)]
struct FermatSummary {
    a0: SurfacePoint,
    mode: FermatMode,
    f_value: f64,
    residual: f64,
    sector_angles: Option<SectorAngles>,
}

#[derive(Serialize)]
struct ClairautOutput {
    weights: WeightTriple,
    fermat: FermatSummary,
    report: ClairautReport,
    sine_constant_ratios: Option<Theorem2>,
    sine_rule: Option<SineRule>,
}

fn run_clairaut(l: &Loaded, sink: &PathSink) -> Result<Outcome, CliError> {
    let (weights, r, mut warnings) = solve(l, "clairaut-report")?;
    write_branches(sink, "", &r.branches)?;
    let report = branch_report(&l.surface, r.a0, &r.branches, &weights)?;
    let ratios = if l.surface.is_sphere() {
        match theorem2_ratios(&l.surface, &report, &weights) {
            Ok(t) => {
                if !t.positive {
                    warnings.push(Warning::new(
                        "positivity",
                        "not all sine constants are positive; the weight ratio relation is not expected to hold",
                    ));
                }
                Some(t)
            }
            Err(GeoError::UndefinedRatio(msg)) => {
                warnings.push(Warning::new("undefined_ratio", msg));
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let sine_rule = weights.admits_interior().then(|| sine_rule_diameter(&weights)).transpose()?;
    Outcome::new(
        ClairautOutput {
            weights,
            fermat: FermatSummary {
                a0: r.a0,
                mode: r.mode,
                f_value: r.f_value,
                residual: r.residual,
                sector_angles: r.sector_angles,
            },
            report,
            sine_constant_ratios: ratios,
            sine_rule,
        },
        warnings,
    )
}

fn run_rotation(l: &Loaded, sink: &PathSink) -> Result<Outcome, CliError> {
    let rot = l
        .scenario
        .rotation
        .as_ref()
        .ok_or_else(|| CliError::Config("rotation: required by rotate-experiment".into()))?;
    let b = l.weights("rotate-experiment")?;
    let apex = l.point(&rot.apex);
    let theta0 = rot.theta0.radians();
    let deltas: Vec<f64> = rot.deltas.iter().map(|d| d.radians()).collect();
    let e = rotate_tree_experiment(&l.surface, apex, &b, rot.lengths, theta0, &deltas, &l.scenario.options.connect)?;
    let mut warnings = Vec::new();
    if e.weight_error > 1e-6 {
        warnings.push(Warning::new(
            "weights_not_invariant",
            format!("recovered weights vary by {:e} across rotations", e.weight_error),
        ));
    }
    if sink.dir.is_some() {
        let angles = lemma2_angles(&b)?;
        for (k, d) in deltas.iter().enumerate() {
            let headings = planted_headings(&angles, theta0 + d);
            for i in 0..3 {
                let p = shoot(&l.surface, apex, headings[i], rot.lengths[i], DEFAULT_TOL)?;
                sink.write(&format!("rotation_{k}_branch_{}.csv", i + 1), &p)?;
            }
        }
    }
    Outcome::new(e, warnings)
}

#[derive(Serialize)]
struct VerifyOutput {
    passed: usize,
    failed: usize,
    suites: Vec<SuiteOutcome>,
}

fn run_verify(ids: &[u32]) -> Result<Outcome, CliError> {
    let ids: Vec<u32> = if ids.is_empty() {
        verify::SUITES.iter().map(|(id, _)| *id).collect()
    } else {
        ids.to_vec()
    };
    let mut suites = Vec::new();
    for id in ids {
        let out = verify::run_suite(id).ok_or_else(|| CliError::Config(format!("--suite: no suite {id}")))?;
        eprintln!(
            "suite {:>2} {} {}: {} ({:.1} s)",
            out.id,
            if out.passed { "PASS" } else { "FAIL" },
            out.name,
            out.detail,
            out.elapsed.as_secs_f64()
        );
        suites.push(out);
    }
    let passed = suites.iter().filter(|s| s.passed).count();
    let failed = suites.len() - passed;
    let mut outcome = Outcome::new(
        VerifyOutput {
            passed,
            failed,
            suites,
        },
        Vec::new(),
    )?;
    outcome.failed = failed > 0;
    Ok(outcome)
}
