//! Log-distance channel model with log-normal shadowing, and the Gaussian
//! direction-of-arrival measurement model.
//!
//! RSSI at distance `d` from an AP transmitting `P_t` dBm is
//! `P_t − PL(d₀) − 10·n·log₁₀(d/d₀) − X`, with `X ~ N(0, σ_s²)`.
//! A DoA estimate is the true bearing plus `N(0, σ_φ²)`, wrapped to `[0, 2π)`.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::Angle;
use crate::rng::RngHandle;

/// Log-distance path-loss parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioModel {
    pub name: String,
    /// Path loss at the reference distance, dB.
    pub pl_ref_db: f64,
    pub ref_distance_m: f64,
    /// Path-loss exponent `n` (the slope is `10n` dB per decade).
    pub exponent: f64,
    pub shadow_std_db: f64,
}

/// Names accepted by [`RadioModel::preset`].
pub const PRESET_NAMES: [&str; 2] = ["mmwave60", "wifi24"];

impl RadioModel {
    pub fn new(name: impl Into<String>, pl_ref_db: f64, exponent: f64, shadow_std_db: f64) -> Self {
        Self {
            name: name.into(),
            pl_ref_db,
            ref_distance_m: 1.0,
            exponent,
            shadow_std_db,
        }
    }

    /// 60 GHz indoor NLOS: `PL(d) = −75.3 + 16.8·log₁₀ d`, shadowing variance 2.45.
    pub fn mmwave60() -> Self {
        Self::new("mmwave60", -75.3, 1.68, 2.45f64.sqrt())
    }

    /// 2.4 GHz indoor NLOS: `PL(d) = −48.5 + 20.5·log₁₀ d`, shadowing variance 3.04.
    pub fn wifi24() -> Self {
        Self::new("wifi24", -48.5, 2.05, 3.04f64.sqrt())
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "mmwave60" => Ok(Self::mmwave60()),
            "wifi24" => Ok(Self::wifi24()),
            other => Err(Error::InvalidParameter(format!(
                "unknown radio preset '{other}' (expected one of {})",
                PRESET_NAMES.join(", ")
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ref_distance_m > 0.0 && self.ref_distance_m.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ref_distance_m must be positive, got {}",
                self.ref_distance_m
            )));
        }
        if !(self.shadow_std_db >= 0.0 && self.shadow_std_db.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "shadow_std_db must be non-negative, got {}",
                self.shadow_std_db
            )));
        }
        if !self.exponent.is_finite() || !self.pl_ref_db.is_finite() {
            return Err(Error::InvalidParameter(
                "path-loss parameters must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Same model with shadowing switched off.
    pub fn noiseless(&self) -> Self {
        Self {
            shadow_std_db: 0.0,
            ..self.clone()
        }
    }
}

impl FromStr for RadioModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::preset(s)
    }
}

/// DoA estimation noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoaModel {
    pub doa_std_rad: f64,
}

impl DoaModel {
    pub fn from_degrees(std_deg: f64) -> Self {
        Self {
            doa_std_rad: crate::geometry::degrees_to_radians(std_deg),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.doa_std_rad >= 0.0 && self.doa_std_rad.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "doa_std must be non-negative, got {} rad",
                self.doa_std_rad
            )));
        }
        Ok(())
    }
}

/// Free-space path loss `20·log₁₀(4π·d₀/λ)` in dB.
pub fn free_space_reference(wavelength_m: f64, d0: f64) -> Result<f64> {
    if !(wavelength_m > 0.0) || !(d0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "wavelength ({wavelength_m}) and reference distance ({d0}) must be positive"
        )));
    }
    Ok(20.0 * (4.0 * PI * d0 / wavelength_m).log10())
}

/// Milliwatts to dBm.
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Path loss at `d` meters. With `rng`, one shadowing draw is added.
///
/// A draw is consumed even when `shadow_std_db` is zero, so paired
/// comparisons across models see the same underlying normal variates.
pub fn path_loss(model: &RadioModel, d: f64, rng: Option<&mut RngHandle>) -> Result<f64> {
    if !(d >= model.ref_distance_m) {
        return Err(Error::OutOfModelRange {
            distance: d,
            reference: model.ref_distance_m,
        });
    }
    let mean = model.pl_ref_db + 10.0 * model.exponent * (d / model.ref_distance_m).log10();
    Ok(match rng {
        Some(rng) => mean + model.shadow_std_db * rng.standard_normal(),
        None => mean,
    })
}

/// Noise-free RSSI in dBm.
pub fn mean_rssi(model: &RadioModel, tx_power_dbm: f64, d: f64) -> Result<f64> {
    Ok(tx_power_dbm - path_loss(model, d, None)?)
}

/// One noisy RSSI observation in dBm.
pub fn sample_rssi(
    model: &RadioModel,
    tx_power_dbm: f64,
    d: f64,
    rng: &mut RngHandle,
) -> Result<f64> {
    Ok(tx_power_dbm - path_loss(model, d, Some(rng))?)
}

/// One noisy DoA estimate around `true_bearing`.
pub fn sample_doa(true_bearing: Angle, doa: &DoaModel, rng: &mut RngHandle) -> Angle {
    let z = rng.standard_normal();
    Angle::from_radians(true_bearing.radians() + doa.doa_std_rad * z)
}
