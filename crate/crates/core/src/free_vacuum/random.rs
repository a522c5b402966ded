use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use super::RadialProfile;
use crate::radial::{RadialFunction, RadialGrid};

const MODES: usize = 6;

/// A smooth random admissible profile.
///
/// Amplitude `ρ ∈ [0, ½]` and angle `θ ∈ [0, π/2]` are logistic images of short
/// random cosine series in the grid variable `u`; then `f0 = −ρ cos θ`,
/// `f1 = −ρ sin θ`. Smoothness keeps the profile within what the grid resolves.
pub fn random_admissible_profile<R: Rng + ?Sized>(grid: Arc<RadialGrid>, rng: &mut R) -> RadialProfile {
    let amp: Vec<f64> = (0..MODES).map(|k| rng.random_range(-3.0..3.0) / (1 + k) as f64).collect();
    let ang: Vec<f64> = (0..MODES).map(|k| rng.random_range(-3.0..3.0) / (1 + k) as f64).collect();
    let u_max = grid.u_max();
    let series = |c: &[f64], u: f64| -> f64 {
        c.iter().enumerate().map(|(k, ck)| ck * (k as f64 * PI * u / u_max).cos()).sum()
    };
    let logistic = |x: f64| 1.0 / (1.0 + (-x).exp());
    let mut f0 = Vec::with_capacity(grid.len());
    let mut f1 = Vec::with_capacity(grid.len());
    for &r in grid.nodes() {
        let u = grid.to_u(r);
        let rho = 0.5 * logistic(series(&amp, u));
        let theta = 0.5 * PI * logistic(series(&ang, u));
        f0.push(-rho * theta.cos());
        f1.push(-rho * theta.sin());
    }
    RadialProfile {
        f0: RadialFunction::new(grid.clone(), f0).expect("finite profile"),
        f1: RadialFunction::new(grid, f1).expect("finite profile"),
    }
}
