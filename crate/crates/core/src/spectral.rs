//! Bath spectral models: the rate function `gamma(omega)`, the one-sided
//! correlation coefficient `Xi`, and the bath and system records that tie
//! noise operators to spectra.
//!
//! Coupling strength lives in the noise operators; a model describes the bare
//! bath correlation. A noise operator `g X` with bare rate `gamma0` therefore
//! gives the physical rate `g^2 gamma0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::HermitianOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralKind {
    FlatZeroTemperature,
    FlatThermal,
    BandPass,
}

/// Note attached to every report that prints a Bound 1 saturation ratio.
pub const XI_CONVENTION_NOTE: &str = "Xi for delta-correlated noise uses the half-delta convention \
     (integral of delta over [0, inf) = 1/2), so Xi = gamma0/2 for bare rate gamma0 unless overridden";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    kind: SpectralKind,
    gamma0: f64,
    beta: f64,
    window: Option<(f64, f64)>,
    xi: f64,
    xi_overridden: bool,
}

fn check_rate(gamma0: f64) -> Result<()> {
    if !(gamma0 >= 0.0) || !gamma0.is_finite() {
        return Err(Error::invalid(format!("gamma0 must be finite and nonnegative, got {gamma0}")));
    }
    Ok(())
}

impl SpectralModel {
    fn build(kind: SpectralKind, gamma0: f64, beta: f64, window: Option<(f64, f64)>) -> Result<Self> {
        check_rate(gamma0)?;
        Ok(Self {
            kind,
            gamma0,
            beta,
            window,
            xi: 0.5 * gamma0,
            xi_overridden: false,
        })
    }

    /// `gamma0` for `omega > 0`, zero otherwise.
    pub fn flat_zero_temperature(gamma0: f64) -> Result<Self> {
        Self::build(SpectralKind::FlatZeroTemperature, gamma0, f64::INFINITY, None)
    }

    /// `gamma0` for `omega >= 0` and `gamma0 e^{beta omega}` below, so that
    /// detailed balance holds. `beta = inf` is allowed.
    pub fn flat_thermal(gamma0: f64, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) {
            return Err(Error::invalid(format!("beta must be nonnegative, got {beta}")));
        }
        Self::build(SpectralKind::FlatThermal, gamma0, beta, None)
    }

    /// Hard frequency window `[lo, hi]`. Carries no temperature (`beta = 0`).
    pub fn band_pass(gamma0: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!("band-pass window needs lo < hi, got [{lo}, {hi}]")));
        }
        Self::build(SpectralKind::BandPass, gamma0, 0.0, Some((lo, hi)))
    }

    /// Flat (infinite-temperature) white noise calibrated so that a noise
    /// operator carrying coupling `g_ref` sees the rate `gamma_wn` at every
    /// frequency: bare `gamma0 = gamma_wn / g_ref^2`, `Xi = gamma_wn / (2 g_ref^2)`.
    pub fn white_noise(gamma_wn: f64, g_ref: f64) -> Result<Self> {
        if !(g_ref > 0.0) || !g_ref.is_finite() {
            return Err(Error::invalid(format!("reference coupling must be positive, got {g_ref}")));
        }
        Self::flat_thermal(gamma_wn / (g_ref * g_ref), 0.0)
    }

    /// Replaces the default `Xi`.
    pub fn with_xi(mut self, xi: f64) -> Result<Self> {
        if !(xi >= 0.0) || !xi.is_finite() {
            return Err(Error::invalid(format!("Xi must be finite and nonnegative, got {xi}")));
        }
        self.xi = xi;
        self.xi_overridden = true;
        Ok(self)
    }

    pub fn kind(&self) -> SpectralKind {
        self.kind
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn window(&self) -> Option<(f64, f64)> {
        self.window
    }

    pub fn xi_overridden(&self) -> bool {
        self.xi_overridden
    }

    /// `gamma(omega)`; never negative and never NaN for finite `omega`.
    pub fn rate(&self, omega: f64) -> f64 {
        match self.kind {
            SpectralKind::FlatZeroTemperature => {
                if omega > 0.0 {
                    self.gamma0
                } else {
                    0.0
                }
            }
            SpectralKind::FlatThermal => {
                if omega >= 0.0 {
                    self.gamma0
                } else if self.beta.is_infinite() {
                    0.0
                } else {
                    self.gamma0 * (self.beta * omega).exp()
                }
            }
            SpectralKind::BandPass => {
                let (lo, hi) = self.window.expect("band-pass window");
                if (lo..=hi).contains(&omega) {
                    self.gamma0
                } else {
                    0.0
                }
            }
        }
    }

    /// One-sided correlation coefficient `Xi`.
    pub fn xi(&self) -> f64 {
        self.xi
    }
}

pub fn rate(model: &SpectralModel, omega: f64) -> f64 {
    model.rate(omega)
}

pub fn xi(model: &SpectralModel) -> f64 {
    model.xi()
}

/// One noise channel `A_k` of a bath with its spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub operator: HermitianOperator,
    pub model: SpectralModel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BathSpec {
    label: String,
    beta: f64,
    channels: Vec<Channel>,
}

impl BathSpec {
    pub fn new(label: impl Into<String>, beta: f64, channels: Vec<Channel>) -> Result<Self> {
        let label = label.into();
        let Some(first) = channels.first() else {
            return Err(Error::invalid(format!("bath {label} has no channels")));
        };
        let dim = first.operator.dim();
        for c in &channels {
            if c.operator.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "bath channels",
                    expected: dim,
                    found: c.operator.dim(),
                });
            }
        }
        if !(beta >= 0.0) {
            return Err(Error::invalid(format!("bath {label}: beta must be nonnegative")));
        }
        Ok(Self { label, beta, channels })
    }

    /// Single-channel bath whose temperature is that of the model.
    pub fn single(label: impl Into<String>, operator: HermitianOperator, model: SpectralModel) -> Result<Self> {
        Self::new(label, model.beta(), vec![Channel { operator, model }])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn dim(&self) -> usize {
        self.channels[0].operator.dim()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    hamiltonian: HermitianOperator,
    baths: Vec<BathSpec>,
}

impl SystemSpec {
    pub fn new(hamiltonian: HermitianOperator, baths: Vec<BathSpec>) -> Result<Self> {
        for bath in &baths {
            if bath.dim() != hamiltonian.dim() {
                return Err(Error::DimensionMismatch {
                    context: "bath operator vs Hamiltonian",
                    expected: hamiltonian.dim(),
                    found: bath.dim(),
                });
            }
        }
        Ok(Self { hamiltonian, baths })
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn baths(&self) -> &[BathSpec] {
        &self.baths
    }

    pub fn bath(&self, index: usize) -> Result<&BathSpec> {
        self.baths
            .get(index)
            .ok_or_else(|| Error::invalid(format!("bath index {index} out of range ({} baths)", self.baths.len())))
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }
}
