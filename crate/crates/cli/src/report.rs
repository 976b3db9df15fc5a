use serde::Serialize;

/// Top-level JSON document written by every command.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub version: &'static str,
    pub scenario_digest: Option<String>,
    pub conventions: Conventions,
    pub results: serde_json::Value,
    pub warnings: Vec<Warning>,
    /// Seconds spent in the command. Kept outside `results` so that the
    /// results are reproducible byte for byte.
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Warning {
    pub kind: &'static str,
    pub message: String,
}

impl Warning {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Conventions {
    pub embedding: &'static str,
    pub frame: &'static str,
    pub heading: &'static str,
    pub alpha: &'static str,
    pub beta: &'static str,
    pub clairaut_constant: &'static str,
    pub angles: &'static str,
    pub v_coordinate: &'static str,
    pub sector_angles: &'static str,
}

pub const CONVENTIONS: Conventions = Conventions {
    embedding: "r(u, v) = (phi(u) cos v, phi(u) sin v, psi(u)); E = phi'^2 + psi'^2, F = 0, G = phi^2",
    frame: "orthonormal (e_par, e_mer) = (r_v / |r_v|, r_u / |r_u|)",
    heading: "theta is measured from e_par towards e_mer; unit tangent = cos(theta) e_par + sin(theta) e_mer",
    alpha: "angle with the parallel, alpha = theta",
    beta: "angle with the meridian, beta = pi/2 - theta",
    clairaut_constant: "c = G dv/ds = rho cos(alpha) = rho sin(beta) with rho = phi(u); signed",
    angles: "radians",
    v_coordinate: "v is reported wrapped to [0, 2pi); v_unwrapped keeps the continuous value",
    sector_angles: "(phi_102, phi_203, phi_301): angles between the branches towards terminals 1-2, 2-3, 3-1",
};
