//! Geodesics on surfaces of revolution, weighted Fermat-Torricelli trees and
//! the Clairaut constants of their branches.

pub mod clairaut;
pub mod connect;
pub mod error;
pub mod fermat;
pub mod geodesic;
mod ode;
mod spline;
pub mod surface;
pub mod verify;

pub use clairaut::{
    branch_report, rotate_tree_experiment, sine_rule_diameter, theorem1_constants, theorem2_ratios, w_eval,
    ClairautReport, RotationExperiment,
};
pub use connect::{connect_from_guess, connect_geodesic, distance, ConnectOptions, Connection};
pub use fermat::{
    floating_test, inverse_weights, lemma2_angles, measure_sector_angles, planted_tree, solve_fermat, FermatMode,
    FermatOptions, FermatResult, FloatingTest, SectorAngles, WeightTriple,
};
pub use error::{GeoError, Result};
pub use geodesic::{shoot, GeodesicPath, GeodesicState, DEFAULT_TOL};
pub use spline::CubicSpline;
pub use surface::{Heading, Metric, ProfileSpec, ProfileSurface, SurfacePoint, SurfaceSpec, TangentVector};
