//! Shadowing, path loss and Nakagami parameters.
//!
//! Fading itself is never sampled in the analytic pipeline: the outage
//! kernel averages over it, so only the per-link Nakagami `m` is needed.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Log-normal shadowing in dB, one value per (mobile, base station).
///
/// The three sector antennas of a base station are colocated and share the
/// propagation path, so they share the shadowing value.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowField {
    xi: Vec<f64>,
    mobiles: usize,
    base_stations: usize,
    sigma_s: f64,
}

impl ShadowField {
    pub fn zeros(mobiles: usize, base_stations: usize) -> Self {
        ShadowField {
            xi: vec![0.0; mobiles * base_stations],
            mobiles,
            base_stations,
            sigma_s: 0.0,
        }
    }

    /// i.i.d. N(0, σs²) entries; exactly zero when `sigma_s == 0`.
    pub fn draw<R: Rng + ?Sized>(mobiles: usize, base_stations: usize, sigma_s: f64, rng: &mut R) -> Self {
        assert!(sigma_s >= 0.0, "sigma_s must be non-negative");
        if sigma_s == 0.0 {
            return ShadowField::zeros(mobiles, base_stations);
        }
        let xi = (0..mobiles * base_stations)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                sigma_s * z
            })
            .collect();
        ShadowField {
            xi,
            mobiles,
            base_stations,
            sigma_s,
        }
    }

    /// Builds a field from explicit rows (one row per mobile).
    pub fn from_rows(rows: Vec<Vec<f64>>, sigma_s: f64) -> Self {
        let mobiles = rows.len();
        let base_stations = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == base_stations), "ragged shadow rows");
        ShadowField {
            xi: rows.into_iter().flatten().collect(),
            mobiles,
            base_stations,
            sigma_s,
        }
    }

    pub fn mobiles(&self) -> usize {
        self.mobiles
    }

    pub fn base_stations(&self) -> usize {
        self.base_stations
    }

    pub fn sigma_s(&self) -> f64 {
        self.sigma_s
    }

    pub fn db(&self, mobile: usize, bs: usize) -> f64 {
        self.xi[mobile * self.base_stations + bs]
    }

    /// `10^(ξ/10)`.
    pub fn linear(&self, mobile: usize, bs: usize) -> f64 {
        db_to_linear(self.db(mobile, bs))
    }

    pub fn values(&self) -> &[f64] {
        &self.xi
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Power-law attenuation `d^(-α)`.
pub fn path_gain(distance: f64, alpha: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::Domain(format!("path gain needs d > 0, got {distance}")));
    }
    Ok(distance.powf(-alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum FadingModel {
    /// Same integer `m` on every link.
    Constant { m: u32 },
    /// LOS-like fading near the base station: m = 3 within `r_bs/2`,
    /// m = 2 within `r_bs`, Rayleigh (m = 1) beyond.
    DistanceDependent { r_bs: f64 },
}

impl FadingModel {
    pub fn nakagami_m(&self, distance: f64) -> u32 {
        match *self {
            FadingModel::Constant { m } => m,
            FadingModel::DistanceDependent { r_bs } => {
                if distance <= r_bs / 2.0 {
                    3
                } else if distance <= r_bs {
                    2
                } else {
                    1
                }
            }
        }
    }
}
