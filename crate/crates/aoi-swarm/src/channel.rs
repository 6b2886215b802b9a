//! Link budget, transmit power, cycle timing, and the rate-derived cluster
//! capacity.
//!
//! All computation is in linear/SI units; configs accept dB and dBm and are
//! converted once at the boundary ([`db_to_linear`], [`dbm_to_watts`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Convert a power ratio in dB to a linear factor.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Convert dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

/// Half duplex relays after receiving; full duplex relays while receiving,
/// doubling the per-frame transmit window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Duplex {
    Half,
    Full,
}

impl Duplex {
    pub fn label(self) -> &'static str {
        match self {
            Duplex::Half => "half",
            Duplex::Full => "full",
        }
    }
}

impl std::fmt::Display for Duplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Uplink budget constants, in linear units.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Channel power gain at 1 m reference distance (linear).
    pub beta0: f64,
    /// Noise power in watts.
    pub noise_power: f64,
    /// Bandwidth in Hz.
    pub bandwidth: f64,
    /// Packet size in bits.
    pub packet_size: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("beta0", self.beta0),
            ("noise_power", self.noise_power),
            ("bandwidth", self.bandwidth),
            ("packet_size", self.packet_size),
        ] {
            if value <= 0.0 || !value.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "link budget field {name} must be strictly positive, got {value}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for LinkBudget {
    /// 30 dB reference gain, -100 dBm noise, 1 MHz bandwidth, 5 Mb packets.
    fn default() -> Self {
        LinkBudget {
            beta0: db_to_linear(30.0),
            noise_power: dbm_to_watts(-100.0),
            bandwidth: 1e6,
            packet_size: 5e6,
        }
    }
}

/// Uplink transmission rate and duplex mode.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RateConfig {
    /// Transmission data rate in bits/second.
    pub tx_rate: f64,
    pub duplex: Duplex,
}

/// Per-frame stage durations in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleTiming {
    pub t_nav: f64,
    pub t_tx: f64,
    pub t_relay: f64,
}

impl CycleTiming {
    /// Stage durations for one navigation step: transmit and relay stages
    /// split the navigation window in half duplex and overlap it fully in
    /// full duplex.
    pub fn new(cell_size: f64, velocity: f64, duplex: Duplex) -> Self {
        let t_nav = nav_time(cell_size, velocity);
        let t_tx = match duplex {
            Duplex::Half => t_nav / 2.0,
            Duplex::Full => t_nav,
        };
        CycleTiming {
            t_nav,
            t_tx,
            t_relay: t_tx,
        }
    }
}

/// Time to cross one cell at fixed velocity.
pub fn nav_time(cell_size: f64, velocity: f64) -> f64 {
    assert!(velocity > 0.0, "velocity must be positive");
    cell_size / velocity
}

/// Largest number of fixed-size packets deliverable in one frame's transmit
/// window, i.e. the per-cluster device bound floor(R*Lc / (k*M*v)) with
/// k = 2 for half duplex and k = 1 for full duplex.
///
/// Fails when the bound is below 1: such a rate cannot serve any device.
pub fn cluster_capacity(
    rate: RateConfig,
    cell_size: f64,
    velocity: f64,
    packet_size: f64,
) -> Result<usize> {
    let k = match rate.duplex {
        Duplex::Half => 2.0,
        Duplex::Full => 1.0,
    };
    let bound = rate.tx_rate * cell_size / (k * packet_size * velocity);
    let capacity = bound.floor();
    if capacity < 1.0 {
        return Err(Error::CapacityTooLow {
            rate_bps: rate.tx_rate,
            cell_size_m: cell_size,
            velocity_mps: velocity,
            packet_bits: packet_size,
            duplex: rate.duplex.label(),
        });
    }
    Ok(capacity as usize)
}

/// Line-of-sight channel gain between a UAV and a ground device:
/// beta0 / (h^2 + d^2) with horizontal distance d.
pub fn gain_device(uav_height: f64, horizontal_distance: f64, budget: &LinkBudget) -> f64 {
    budget.beta0 / (uav_height * uav_height + horizontal_distance * horizontal_distance)
}

/// Transmit power a device needs to push one packet through the window:
/// (2^(M/B) - 1) * sigma^2 / gain.
pub fn tx_power(gain: f64, budget: &LinkBudget) -> f64 {
    assert!(gain > 0.0, "channel gain must be positive");
    (2f64.powf(budget.packet_size / budget.bandwidth) - 1.0) * budget.noise_power / gain
}

/// Line-of-sight channel gain between a UAV and the base station:
/// beta0 / (|h_uav - h_bs|^2 + d^2).
pub fn gain_bs(
    uav_height: f64,
    uav_bs_horizontal_distance: f64,
    bs_height: f64,
    budget: &LinkBudget,
) -> f64 {
    let dh = (uav_height - bs_height).abs();
    budget.beta0 / (dh * dh + uav_bs_horizontal_distance * uav_bs_horizontal_distance)
}
