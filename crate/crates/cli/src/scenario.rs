//! Scenario files: JSON documents describing a surface, named points and
//! the parameters of each command.

use std::collections::BTreeMap;
use std::path::Path;

use clairaut_core::fermat::FermatOptions;
use clairaut_core::{ConnectOptions, GeoError, ProfileSurface, SurfacePoint, SurfaceSpec, WeightTriple, DEFAULT_TOL};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// An angle in radians, or in degrees when written as `{"deg": x}`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Radians(f64),
    Degrees { deg: f64 },
}

impl Angle {
    pub fn radians(self) -> f64 {
        match self {
            Angle::Radians(x) => x,
            Angle::Degrees { deg } => deg.to_radians(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub surface: SurfaceSpec,
    #[serde(default)]
    pub points: BTreeMap<String, SurfacePoint>,
    pub terminals: Option<[String; 3]>,
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub options: Options,
    pub shoot: Option<Vec<Shot>>,
    pub connect: Option<ConnectSection>,
    pub inverse: Option<InverseSection>,
    pub rotation: Option<RotationSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    /// Integration tolerance for `shoot`.
    pub tol: f64,
    pub connect: ConnectOptions,
    pub fermat: FermatSettings,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            connect: ConnectOptions::default(),
            fermat: FermatSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FermatSettings {
    pub grad_tol: Option<f64>,
    pub angle_tol: f64,
    pub max_iter: usize,
    pub armijo: f64,
    pub max_halvings: usize,
    /// Name of a point to start the descent from.
    pub initial: Option<String>,
}

impl Default for FermatSettings {
    fn default() -> Self {
        let d = FermatOptions::default();
        Self {
            grad_tol: d.grad_tol,
            angle_tol: d.angle_tol,
            max_iter: d.max_iter,
            armijo: d.armijo,
            max_halvings: d.max_halvings,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shot {
    pub from: String,
    pub heading: Angle,
    pub length: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectSection {
    pub pairs: Vec<[String; 2]>,
}

/// Either explicit sector angles or an apex at which to measure them
/// towards the terminals.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseSection {
    pub angles: Option<[Angle; 3]>,
    pub apex: Option<String>,
    #[serde(default = "one")]
    pub total: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationSection {
    pub apex: String,
    pub theta0: Angle,
    pub lengths: [f64; 3],
    pub deltas: Vec<Angle>,
}

/// A parsed and validated scenario.
#[derive(Debug)]
pub struct Loaded {
    pub scenario: Scenario,
    pub surface: ProfileSurface,
    /// SHA-256 of the file contents, hex encoded.
    pub digest: String,
}

impl Loaded {
    pub fn point(&self, name: &str) -> SurfacePoint {
        self.scenario.points[name]
    }

    pub fn terminals(&self, command: &str) -> Result<[SurfacePoint; 3], CliError> {
        let names = self
            .scenario
            .terminals
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("terminals: required by {command}")))?;
        Ok(names.each_ref().map(|n| self.point(n)))
    }

    pub fn weights(&self, command: &str) -> Result<WeightTriple, CliError> {
        let w = self
            .scenario
            .weights
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("weights: required by {command}")))?;
        Ok(WeightTriple {
            b1: w[0],
            b2: w[1],
            b3: w[2],
        })
    }

    pub fn fermat_options(&self) -> FermatOptions {
        let f = &self.scenario.options.fermat;
        FermatOptions {
            connect: self.scenario.options.connect.clone(),
            grad_tol: f.grad_tol,
            angle_tol: f.angle_tol,
            max_iter: f.max_iter,
            armijo: f.armijo,
            max_halvings: f.max_halvings,
            initial: f.initial.as_deref().map(|n| self.point(n)),
        }
    }
}

pub fn load_scenario(path: &Path) -> Result<Loaded, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_scenario(&bytes)
}

pub fn parse_scenario(bytes: &[u8]) -> Result<Loaded, CliError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::Config(e.inner().to_string())
        } else {
            CliError::Config(format!("{path}: {}", e.inner()))
        }
    })?;
    let surface = validate(&scenario)?;
    let digest = format!("{:x}", Sha256::digest(bytes));
    Ok(Loaded {
        scenario,
        surface,
        digest,
    })
}

fn config(field: impl AsRef<str>, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {msg}", field.as_ref()))
}

fn positive(field: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(config(field, format!("must be positive, got {x}")))
    }
}

fn validate(s: &Scenario) -> Result<ProfileSurface, CliError> {
    if s.schema != SCHEMA_VERSION {
        return Err(config("schema", format!("unsupported version {}, expected {SCHEMA_VERSION}", s.schema)));
    }
    let surface = ProfileSurface::new(&s.surface).map_err(|e| config("surface", e))?;

    for (name, p) in &s.points {
        surface.check_point(*p).map_err(|e| match e {
            GeoError::OffChart { reason, .. } => config(format!("points.{name}"), reason),
            other => config(format!("points.{name}"), other),
        })?;
    }
    let known = |field: String, name: &str| -> Result<(), CliError> {
        if s.points.contains_key(name) {
            Ok(())
        } else {
            Err(config(field, format!("unknown point '{name}'")))
        }
    };

    if let Some(t) = &s.terminals {
        for (i, n) in t.iter().enumerate() {
            known(format!("terminals[{i}]"), n)?;
        }
    }
    if let Some(w) = &s.weights {
        if w.len() != 3 {
            return Err(config("weights", format!("expected 3 values, got {}", w.len())));
        }
        for (i, x) in w.iter().enumerate() {
            positive(&format!("weights[{i}]"), *x)?;
        }
    }

    let o = &s.options;
    positive("options.tol", o.tol)?;
    o.connect.validate().map_err(|e| config("options.connect", e))?;
    if let Some(g) = o.fermat.grad_tol {
        positive("options.fermat.grad_tol", g)?;
    }
    positive("options.fermat.angle_tol", o.fermat.angle_tol)?;
    positive("options.fermat.armijo", o.fermat.armijo)?;
    if o.fermat.max_iter == 0 {
        return Err(config("options.fermat.max_iter", "must be at least 1"));
    }
    if let Some(n) = &o.fermat.initial {
        known("options.fermat.initial".into(), n)?;
    }

    for (i, shot) in s.shoot.iter().flatten().enumerate() {
        known(format!("shoot[{i}].from"), &shot.from)?;
        if !(shot.length >= 0.0 && shot.length.is_finite()) {
            return Err(config(format!("shoot[{i}].length"), "must be non-negative"));
        }
        if !shot.heading.radians().is_finite() {
            return Err(config(format!("shoot[{i}].heading"), "must be finite"));
        }
    }
    if let Some(c) = &s.connect {
        for (i, pair) in c.pairs.iter().enumerate() {
            for (j, n) in pair.iter().enumerate() {
                known(format!("connect.pairs[{i}][{j}]"), n)?;
            }
        }
    }
    if let Some(inv) = &s.inverse {
        match (&inv.angles, &inv.apex) {
            (Some(_), None) => {}
            (None, Some(apex)) => known("inverse.apex".into(), apex)?,
            _ => return Err(config("inverse", "give exactly one of 'angles' and 'apex'")),
        }
        positive("inverse.total", inv.total)?;
    }
    if let Some(r) = &s.rotation {
        known("rotation.apex".into(), &r.apex)?;
        for (i, l) in r.lengths.iter().enumerate() {
            positive(&format!("rotation.lengths[{i}]"), *l)?;
        }
        if r.deltas.is_empty() {
            return Err(config("rotation.deltas", "must not be empty"));
        }
    }
    Ok(surface)
}
