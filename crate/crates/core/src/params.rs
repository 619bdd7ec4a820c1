//! Device parameters and the dimensionless quantities derived from them.
//!
//! Time is measured in units of the pump round-trip time `T_R` throughout the
//! crate, so every rate below is a per-round-trip quantity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::ParamError;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_8128e-12;

/// Dimensional description of the ring/channel device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    /// Ring radius (m).
    pub ring_radius: f64,
    /// Effective index, shared by pump and signal (phase matched).
    pub n_eff: f64,
    /// Signal vacuum wavelength (m). The pump sits at half of it.
    pub signal_wavelength: f64,
    /// Effective second-order susceptibility (m/V).
    pub chi2_eff: f64,
    /// Effective transverse mode area (m^2).
    pub a_eff: f64,
    /// Intrinsic quality factor of the signal mode.
    pub q_si: f64,
    /// Intrinsic quality factor of the pump mode.
    pub q_pi: f64,
    /// Group index; only enters photon-number bookkeeping.
    pub group_index: f64,
}

impl Default for PhysicalConfig {
    /// Thin-film lithium niobate ring used for all reference results.
    fn default() -> Self {
        Self {
            ring_radius: 50e-6,
            n_eff: 2.2,
            signal_wavelength: 1550e-9,
            chi2_eff: 54e-12,
            a_eff: 0.71e-12,
            q_si: 2e6,
            q_pi: 8e5,
            group_index: 2.2,
        }
    }
}

impl PhysicalConfig {
    pub fn validate(&self) -> Result<(), ParamError> {
        let fields = [
            ("ring_radius", self.ring_radius),
            ("n_eff", self.n_eff),
            ("signal_wavelength", self.signal_wavelength),
            ("chi2_eff", self.chi2_eff),
            ("A_eff", self.a_eff),
            ("Q_sI", self.q_si),
            ("Q_pI", self.q_pi),
            ("group_index", self.group_index),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::NonPositive { field: name, value });
            }
        }
        for (name, value) in [("Q_sI", self.q_si), ("Q_pI", self.q_pi)] {
            if value < 1.0 {
                return Err(ParamError::QualityFactorBelowOne { field: name, value });
            }
        }
        Ok(())
    }

    /// Signal angular frequency (rad/s).
    pub fn omega_s(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.signal_wavelength
    }

    /// Pump angular frequency, degenerate down-conversion: `2 omega_s`.
    pub fn omega_p(&self) -> f64 {
        2.0 * self.omega_s()
    }

    /// Group velocity `c / n_g` (m/s).
    pub fn group_velocity(&self) -> f64 {
        SPEED_OF_LIGHT / self.group_index
    }

    /// `omega_s T_R`: signal phase advance per round trip.
    pub fn signal_phase_per_round_trip(&self) -> f64 {
        self.omega_s() * round_trip_time(self)
    }

    /// `|eta| / hbar` (1/s), the nonlinear pump-signal coupling rate per unit
    /// pump amplitude.
    pub fn nonlinear_coupling_rate(&self) -> f64 {
        let energy = HBAR * self.omega_p();
        let field = (energy / (16.0 * PI * EPSILON_0 * self.ring_radius * self.a_eff)).sqrt();
        self.omega_s() * self.chi2_eff * field
    }
}

/// Round-trip time `T_R = n_eff 2 pi R / c` in seconds.
pub fn round_trip_time(cfg: &PhysicalConfig) -> f64 {
    cfg.n_eff * 2.0 * PI * cfg.ring_radius / SPEED_OF_LIGHT
}

/// The four optimization knobs plus the pump phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Knobs {
    /// Dimensionless pump strength.
    pub g0: f64,
    /// Pump intensity FWHM in round trips.
    pub tau_p: f64,
    /// `Q_sL / Q_sI`.
    pub f_s: f64,
    /// `Q_pL / Q_pI`.
    pub f_p: f64,
    /// Pump phase (rad).
    #[serde(default)]
    pub theta: f64,
}

impl Knobs {
    pub fn new(g0: f64, tau_p: f64, f_s: f64, f_p: f64) -> Self {
        Self { g0, tau_p, f_s, f_p, theta: 0.0 }
    }
}

/// Dimensionless run description: knobs plus every derived decay/coupling
/// quantity needed downstream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessRun {
    pub knobs: Knobs,
    /// Loaded signal power decay per round trip, `Gamma_sL T_R`.
    pub gamma_sl: f64,
    /// Loaded pump power decay per round trip, `Gamma_pL T_R`.
    pub gamma_pl: f64,
    /// Intrinsic pump power decay per round trip.
    pub gamma_pi: f64,
    /// Pump intrinsic round-trip amplitude loss factor `l_p`.
    pub loss_p: f64,
    /// Pump through-coupling coefficient `sigma_p`.
    pub sigma_p: f64,
    /// Product `sigma_p l_p`.
    pub sigma_loss_p: f64,
    /// Fraction of signal decay that escapes into the channel, `1 - f_s`.
    pub escape_s: f64,
    /// Signal phase advance per round trip, `omega_s T_R`.
    pub omega_s: f64,
}

impl DimensionlessRun {
    pub fn g0(&self) -> f64 {
        self.knobs.g0
    }

    pub fn tau_p(&self) -> f64 {
        self.knobs.tau_p
    }

    pub fn f_s(&self) -> f64 {
        self.knobs.f_s
    }

    /// Pump amplitude decay per round trip in the continuum pump model,
    /// `1 - sigma_p l_p`.
    pub fn pump_amplitude_decay(&self) -> f64 {
        1.0 - self.sigma_loss_p
    }

    /// Pump finesse, `pi / (1 - sigma_p l_p)`.
    pub fn pump_finesse(&self) -> f64 {
        PI / self.pump_amplitude_decay()
    }

    /// Same run with a different pump strength.
    pub fn with_g0(&self, g0: f64) -> Self {
        let mut out = *self;
        out.knobs.g0 = g0;
        out
    }
}

/// Power decay per round trip for a mode of quality factor `q` whose phase
/// advances by `omega_tr` per round trip.
fn decay_per_round_trip(omega_tr: f64, q: f64) -> f64 {
    omega_tr / q
}

/// Builds the dimensionless description of a run.
pub fn derive_run(cfg: &PhysicalConfig, knobs: Knobs) -> Result<DimensionlessRun, ParamError> {
    cfg.validate()?;
    let Knobs { g0, tau_p, f_s, f_p, theta } = knobs;
    for (name, value) in [("f_s", f_s), ("f_p", f_p)] {
        if !(value > 0.0 && value < 1.0) {
            return Err(ParamError::KnobOutOfRange { knob: name, value, domain: "(0, 1)" });
        }
    }
    if !(tau_p > 0.0 && tau_p.is_finite()) {
        return Err(ParamError::KnobOutOfRange { knob: "tau_p", value: tau_p, domain: "(0, inf)" });
    }
    if !(g0 >= 0.0 && g0.is_finite()) {
        return Err(ParamError::KnobOutOfRange { knob: "g0", value: g0, domain: "[0, inf)" });
    }
    if !theta.is_finite() {
        return Err(ParamError::KnobOutOfRange { knob: "theta", value: theta, domain: "finite" });
    }

    let t_r = round_trip_time(cfg);
    let omega_s = cfg.omega_s() * t_r;
    let omega_p = cfg.omega_p() * t_r;

    let gamma_sl = decay_per_round_trip(omega_s, f_s * cfg.q_si);
    let gamma_pl = decay_per_round_trip(omega_p, f_p * cfg.q_pi);
    let gamma_pi = decay_per_round_trip(omega_p, cfg.q_pi);

    // Gamma T_R = -2 ln(sigma l); intrinsic loss is the sigma = 1 case.
    let sigma_loss_p = (-gamma_pl / 2.0).exp();
    let loss_p = (-gamma_pi / 2.0).exp();
    let sigma_p = sigma_loss_p / loss_p;

    Ok(DimensionlessRun {
        knobs,
        gamma_sl,
        gamma_pl,
        gamma_pi,
        loss_p,
        sigma_p,
        sigma_loss_p,
        escape_s: 1.0 - f_s,
        omega_s,
    })
}

/// Inverts the signal loss map: recovers `f_s` from `Gamma_sL T_R`.
pub fn f_s_from_decay(cfg: &PhysicalConfig, gamma_sl: f64) -> f64 {
    cfg.signal_phase_per_round_trip() / (gamma_sl * cfg.q_si)
}

/// Pump-mode `f_p` giving a requested pump finesse `pi / (1 - sigma_p l_p)`.
pub fn f_p_for_finesse(cfg: &PhysicalConfig, finesse: f64) -> f64 {
    let sigma_loss = 1.0 - PI / finesse;
    let gamma_pl = -2.0 * sigma_loss.ln();
    cfg.omega_p() * round_trip_time(cfg) / (gamma_pl * cfg.q_pi)
}

const LN2: f64 = std::f64::consts::LN_2;

/// `4 |eta| T_R / hbar (ln2/pi)^(1/4)`: the factor relating `g0` to `sqrt(N_c)`.
fn strength_per_root_photon(cfg: &PhysicalConfig) -> f64 {
    4.0 * cfg.nonlinear_coupling_rate() * round_trip_time(cfg) * (LN2 / PI).powf(0.25)
}

/// Number of pump photons in the incident channel pulse for a given `g0`.
pub fn pump_strength_to_photons(cfg: &PhysicalConfig, g0: f64) -> f64 {
    let root = g0 / strength_per_root_photon(cfg);
    root * root
}

/// Inverse of [`pump_strength_to_photons`].
pub fn photons_to_pump_strength(cfg: &PhysicalConfig, n_c: f64) -> f64 {
    strength_per_root_photon(cfg) * n_c.sqrt()
}

/// Intracavity pump photon number `|alpha_p|^2` for a gain value `g`.
///
/// Uses `g = 4 |eta alpha_p| / (hbar Gamma_sL)`.
pub fn ring_pump_photons(cfg: &PhysicalConfig, run: &DimensionlessRun, g: f64) -> f64 {
    let amplitude = g * run.gamma_sl / (4.0 * cfg.nonlinear_coupling_rate() * round_trip_time(cfg));
    amplitude * amplitude
}
