//! Power control and the normalized mean despread powers seen by each
//! reference uplink.
//!
//! Every admitted mobile is power-controlled to arrive at its own serving
//! antenna with a common power. Relative to the reference signal, an
//! intracell interferer then arrives at `(h/G)·Ω_r`, and an intercell
//! interferer served by sector `k` arrives at
//! `(h/G)·10^(ξ'/10)·(d_ji·d_jr/d_ki)^(-α)` with `ξ' = ξ_ij + ξ_rj − ξ_ik`.

use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, path_gain, FadingModel, ShadowField};
use crate::error::{Error, Result};
use crate::topology::{Association, SectorId, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadingParams {
    pub spreading_factor: u32,
    pub chip_factor: f64,
}

impl Default for SpreadingParams {
    fn default() -> Self {
        SpreadingParams {
            spreading_factor: 16,
            chip_factor: 2.0 / 3.0,
        }
    }
}

impl SpreadingParams {
    /// Despreading attenuation `h/G` applied to every interferer.
    pub fn interference_factor(&self) -> f64 {
        self.chip_factor / self.spreading_factor as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.spreading_factor == 0 {
            return Err(Error::Config("spreading factor must be at least 1".into()));
        }
        if !(self.chip_factor > 0.0 && self.chip_factor <= 1.0) {
            return Err(Error::Config("chip factor must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interferer {
    pub mobile: usize,
    pub omega: f64,
    pub m: u32,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkEnvironment {
    pub reference_mobile: usize,
    pub serving_sector: SectorId,
    pub omega_ref: f64,
    /// Nakagami parameter of the reference link.
    pub reference_m: u32,
    /// Linear SNR Γ.
    pub snr: f64,
    pub interferers: Vec<Interferer>,
}

impl LinkEnvironment {
    /// An environment with no geometry behind it, for analytic checks.
    pub fn synthetic(omega_ref: f64, reference_m: u32, snr: f64, interferers: Vec<Interferer>) -> Self {
        LinkEnvironment {
            reference_mobile: 0,
            serving_sector: SectorId(0),
            omega_ref,
            reference_m,
            snr,
            interferers,
        }
    }
}

/// One power-controlled network realization, from which the environment of
/// any admitted reference uplink can be built.
#[derive(Debug, Clone, Copy)]
pub struct PowerControlledNetwork<'a> {
    pub topology: &'a Topology,
    pub shadow: &'a ShadowField,
    pub association: &'a Association,
    pub fading: FadingModel,
    pub spreading: SpreadingParams,
    pub alpha: f64,
    pub snr_db: f64,
    pub activity: f64,
    /// Admission flag per mobile. Denied mobiles are silent.
    pub admitted: &'a [bool],
    /// Scale on ξ inside the power-control terms; 1 means perfect control.
    pub pc_sigma_multiplier: f64,
}

impl PowerControlledNetwork<'_> {
    fn xi_linear(&self, mobile: usize, bs: usize) -> f64 {
        if self.pc_sigma_multiplier == 1.0 {
            self.shadow.linear(mobile, bs)
        } else {
            db_to_linear(self.pc_sigma_multiplier * self.shadow.db(mobile, bs))
        }
    }

    pub fn link_environment(&self, r: usize) -> Result<LinkEnvironment> {
        if !self.admitted.get(r).copied().unwrap_or(false) {
            return Err(Error::NotAdmitted(r));
        }
        let topo = self.topology;
        let j = self.association[r];
        let bs_j = j.bs();
        let d_jr = topo.distance(bs_j, r);
        let omega_ref = self.xi_linear(r, bs_j) * path_gain(d_jr, self.alpha)?;
        let hg = self.spreading.interference_factor();
        let intracell = hg * omega_ref;

        let mut interferers = Vec::new();
        for i in 0..topo.mobile_count() {
            if i == r || !self.admitted[i] || !topo.covers(j, i) {
                continue;
            }
            let d_ji = topo.distance(bs_j, i);
            let k = self.association[i];
            let omega = if k == j {
                intracell
            } else {
                let bs_k = k.bs();
                let d_ki = topo.distance(bs_k, i);
                let xi_ratio = self.xi_linear(i, bs_j) / self.xi_linear(i, bs_k);
                hg * xi_ratio * omega_ref * path_gain(d_ji / d_ki, self.alpha)?
            };
            if omega > 0.0 {
                interferers.push(Interferer {
                    mobile: i,
                    omega,
                    m: self.fading.nakagami_m(d_ji),
                    p: self.activity,
                });
            }
        }

        Ok(LinkEnvironment {
            reference_mobile: r,
            serving_sector: j,
            omega_ref,
            reference_m: self.fading.nakagami_m(d_jr),
            snr: db_to_linear(self.snr_db),
            interferers,
        })
    }

    /// Environments of all admitted mobiles, in mobile-index order.
    pub fn all_environments(&self) -> Result<Vec<LinkEnvironment>> {
        (0..self.topology.mobile_count())
            .filter(|&r| self.admitted[r])
            .map(|r| self.link_environment(r))
            .collect()
    }
}
