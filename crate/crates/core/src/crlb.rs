//! Likelihood of hybrid RSSI + DoA observations and the Cramer-Rao bound
//! on the location error.
//!
//! Per AP `i`, with `dᵢ`, `φᵢ` the distance and bearing from the true
//! location θ and `d̃ᵢ`, `φ̃ᵢ` those implied by the observation:
//!
//! ```text
//! log f = Σᵢ [ ln κ − η·ln²(d̃ᵢ/dᵢ) − (φ̃ᵢ − φᵢ)² / (2σ_φ²) ]
//! η     = (10n / (√2·σ_s·ln 10))²
//! κ     = 1 / (2π·|A|·σ_s·σ_φ)
//! ```
//!
//! The Fisher information is the expected negative Hessian of `log f`.
//! Each AP contributes `2η/dᵢ²` along its radial direction and
//! `1/(σ_φ²dᵢ²)` along the tangential one:
//!
//! ```text
//! J_xx = Σ 2η·cos²φᵢ/dᵢ² + sin²φᵢ/(σ_φ²dᵢ²)
//! J_yy = Σ 2η·sin²φᵢ/dᵢ² + cos²φᵢ/(σ_φ²dᵢ²)
//! J_xy = Σ η·sin2φᵢ/dᵢ² − sin2φᵢ/(2σ_φ²dᵢ²)
//! ```
//!
//! [`crlb_numeric`] inverts the 2×2 matrix. [`crlb_closed_form`] evaluates the
//! per-AP sum `Σ dᵢ²(1 + 2ησ_φ²) / (2η(cos²φᵢ − sin²φᵢ)²)`. That sum is the
//! exact inverse trace of [`fim_aligned_cross_terms`], a variant whose
//! tangential cross term carries a `+` sign, and only for a single AP; it is
//! kept for comparison and does not bound the true error.

use std::f64::consts::{LN_10, PI};

use crate::error::{Error, Result};
use crate::fingerprint::Scenario;
use crate::geometry::{angular_diff, bearing, distance, Angle, Point};
use crate::rng::RngHandle;

/// Determinants at or below this are treated as singular.
pub const SINGULAR_DET_TOL: f64 = 1e-12;

/// `|cos 2φ|` at or below this makes a closed-form term undefined.
pub const SINGULAR_TERM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CrlbParams {
    pub exponent: f64,
    pub shadow_std_db: f64,
    pub doa_std_rad: f64,
    pub aps: Vec<Point>,
    /// Only enters the additive constant of the log-likelihood.
    pub area_m2: f64,
}

impl CrlbParams {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            exponent: s.radio.exponent,
            shadow_std_db: s.radio.shadow_std_db,
            doa_std_rad: s.doa.doa_std_rad,
            aps: s.aps.clone(),
            area_m2: s.area.size_m2(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shadow_std_db > 0.0) || !(self.doa_std_rad > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bounds need positive noise levels (shadow_std_db = {}, doa_std_rad = {})",
                self.shadow_std_db, self.doa_std_rad
            )));
        }
        if !(self.area_m2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "area must be positive, got {}",
                self.area_m2
            )));
        }
        if self.aps.is_empty() {
            return Err(Error::InvalidParameter("no APs".into()));
        }
        Ok(())
    }

    pub fn eta(&self) -> Result<f64> {
        eta(self.exponent, self.shadow_std_db)
    }

    pub fn ln_kappa(&self) -> f64 {
        -(2.0 * PI * self.area_m2 * self.shadow_std_db * self.doa_std_rad).ln()
    }
}

/// `η = (10n / (√2·σ_s·ln 10))²`.
pub fn eta(exponent: f64, shadow_std_db: f64) -> Result<f64> {
    if !(shadow_std_db > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "shadow_std_db must be positive, got {shadow_std_db}"
        )));
    }
    Ok((10.0 * exponent / (2f64.sqrt() * shadow_std_db * LN_10)).powi(2))
}

/// Per-AP distances and bearings implied by one set of measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub distances: Vec<f64>,
    pub bearings: Vec<Angle>,
}

impl Observation {
    /// The noiseless observation made at `r`.
    pub fn at(r: Point, aps: &[Point]) -> Result<Self> {
        Ok(Self {
            distances: aps.iter().map(|ap| distance(r, *ap)).collect(),
            bearings: aps
                .iter()
                .map(|ap| bearing(r, *ap))
                .collect::<Result<_>>()?,
        })
    }

    /// A draw from the measurement model at `theta`: log-normal distance
    /// error from shadowing and Gaussian bearing error.
    pub fn sample(theta: Point, params: &CrlbParams, rng: &mut RngHandle) -> Result<Self> {
        let truth = Self::at(theta, &params.aps)?;
        let log_sd = params.shadow_std_db * LN_10 / (10.0 * params.exponent);
        Ok(Self {
            distances: truth
                .distances
                .iter()
                .map(|d| d * (log_sd * rng.standard_normal()).exp())
                .collect(),
            bearings: truth
                .bearings
                .iter()
                .map(|b| {
                    Angle::from_radians(b.radians() + params.doa_std_rad * rng.standard_normal())
                })
                .collect(),
        })
    }

    fn check(&self, q: usize) -> Result<()> {
        for len in [self.distances.len(), self.bearings.len()] {
            if len != q {
                return Err(Error::DimensionError {
                    expected: q,
                    actual: len,
                });
            }
        }
        if let Some(d) = self.distances.iter().find(|d| !(**d > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "observed distance {d} must be positive"
            )));
        }
        Ok(())
    }
}

struct ApGeometry {
    d: f64,
    phi: f64,
    dx: f64,
    dy: f64,
}

fn geometry(theta: Point, aps: &[Point]) -> Result<Vec<ApGeometry>> {
    aps.iter()
        .map(|ap| {
            let phi = bearing(theta, *ap)?.radians();
            Ok(ApGeometry {
                d: distance(theta, *ap),
                phi,
                dx: theta.x - ap.x,
                dy: theta.y - ap.y,
            })
        })
        .collect()
}

/// Natural log of the joint density of `obs` given location `theta`.
pub fn log_likelihood(obs: &Observation, theta: Point, params: &CrlbParams) -> Result<f64> {
    params.validate()?;
    obs.check(params.aps.len())?;
    let eta = params.eta()?;
    let ln_kappa = params.ln_kappa();
    let var_phi = params.doa_std_rad.powi(2);
    let geo = geometry(theta, &params.aps)?;
    Ok(geo
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let u = (obs.distances[i] / g.d).ln();
            let v = angular_diff(obs.bearings[i], Angle::from_radians(g.phi));
            ln_kappa - eta * u * u - v * v / (2.0 * var_phi)
        })
        .sum())
}

/// Gradient of [`log_likelihood`] with respect to `theta`.
pub fn score(theta: Point, obs: &Observation, params: &CrlbParams) -> Result<[f64; 2]> {
    params.validate()?;
    obs.check(params.aps.len())?;
    let eta = params.eta()?;
    let var_phi = params.doa_std_rad.powi(2);
    let mut grad = [0.0; 2];
    for (i, g) in geometry(theta, &params.aps)?.iter().enumerate() {
        let radial = eta * (obs.distances[i] / g.d).powi(2).ln() / (g.d * g.d);
        let v = angular_diff(obs.bearings[i], Angle::from_radians(g.phi));
        // ∂φ/∂x = sin φ / d, ∂φ/∂y = −cos φ / d
        let tangential = v / (var_phi * g.d);
        grad[0] += radial * g.dx + tangential * g.phi.sin();
        grad[1] += radial * g.dy - tangential * g.phi.cos();
    }
    Ok(grad)
}

/// Symmetric 2×2 Fisher information matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherInfo {
    pub j_xx: f64,
    pub j_xy: f64,
    pub j_yy: f64,
}

impl FisherInfo {
    pub fn diag(j_xx: f64, j_yy: f64) -> Self {
        Self {
            j_xx,
            j_xy: 0.0,
            j_yy,
        }
    }

    pub fn det(&self) -> f64 {
        self.j_xx * self.j_yy - self.j_xy * self.j_xy
    }

    pub fn trace(&self) -> f64 {
        self.j_xx + self.j_yy
    }
}

fn accumulate_fim(theta: Point, params: &CrlbParams, tangential_sign: f64) -> Result<FisherInfo> {
    params.validate()?;
    let eta = params.eta()?;
    let var_phi = params.doa_std_rad.powi(2);
    let mut j = FisherInfo::diag(0.0, 0.0);
    for g in geometry(theta, &params.aps)? {
        let d2 = g.d * g.d;
        let radial = 2.0 * eta / d2;
        let tangential = 1.0 / (var_phi * d2);
        let (s, c) = g.phi.sin_cos();
        j.j_xx += radial * c * c + tangential * s * s;
        j.j_yy += radial * s * s + tangential * c * c;
        j.j_xy += (radial + tangential_sign * tangential) * s * c;
    }
    Ok(j)
}

/// Expected Fisher information of the hybrid measurement at `theta`.
pub fn fim(theta: Point, params: &CrlbParams) -> Result<FisherInfo> {
    accumulate_fim(theta, params, -1.0)
}

/// Like [`fim`], but with the tangential cross term added instead of
/// subtracted. Its inverse trace equals [`crlb_closed_form`] for one AP and
/// it is singular whenever every AP sits at an odd multiple of π/4.
pub fn fim_aligned_cross_terms(theta: Point, params: &CrlbParams) -> Result<FisherInfo> {
    accumulate_fim(theta, params, 1.0)
}

/// Trace of `J⁻¹`, i.e. `(J_xx + J_yy) / det J`, in m².
pub fn crlb_numeric(fim: &FisherInfo) -> Result<f64> {
    let det = fim.det();
    if !(det > SINGULAR_DET_TOL) {
        return Err(Error::SingularFim { det, theta: None });
    }
    Ok(fim.trace() / det)
}

/// [`crlb_numeric`] of [`fim`] at `theta`; singular errors carry `theta`.
pub fn crlb_at(theta: Point, params: &CrlbParams) -> Result<f64> {
    crlb_numeric(&fim(theta, params)?).map_err(|e| match e {
        Error::SingularFim { det, .. } => Error::SingularFim {
            det,
            theta: Some(theta),
        },
        other => other,
    })
}

/// `Σᵢ dᵢ²(1 + 2ησ_φ²) / (2η(cos²φᵢ − sin²φᵢ)²)`, in m².
pub fn crlb_closed_form(theta: Point, params: &CrlbParams) -> Result<f64> {
    params.validate()?;
    let eta = params.eta()?;
    let var_phi = params.doa_std_rad.powi(2);
    let mut total = 0.0;
    for (i, g) in geometry(theta, &params.aps)?.iter().enumerate() {
        let cos2 = (2.0 * g.phi).cos();
        if cos2.abs() <= SINGULAR_TERM_TOL {
            return Err(Error::SingularTerm {
                ap: i,
                bearing_rad: g.phi,
                theta,
            });
        }
        total += g.d * g.d * (1.0 + 2.0 * eta * var_phi) / (2.0 * eta * cos2 * cos2);
    }
    Ok(total)
}
