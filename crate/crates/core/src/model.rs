//! Primitive domain types: market parameters, productivity profiles and the
//! validated instance handle every solver consumes.

use serde::{Deserialize, Serialize};

use crate::equilibrium::phi_lower_bound;
use crate::error::{DomainError, Violation};

/// Smallest admissible productivity. The FOC diagonal grows like `1/theta`.
pub const MIN_THETA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Demand intercept.
    pub alpha: f64,
    /// Baseline marginal cost before R&D.
    pub c_bar: f64,
    /// R&D cost coefficient of the most productive firm.
    pub phi: f64,
}

impl MarketParams {
    pub fn new(alpha: f64, c_bar: f64, phi: f64) -> Self {
        Self { alpha, c_bar, phi }
    }

    /// Canonical levels `alpha - c_bar = 1`.
    pub fn unit_markup(phi: f64) -> Self {
        Self::new(2.0, 1.0, phi)
    }

    pub fn markup(&self) -> f64 {
        self.alpha - self.c_bar
    }

    fn violations(&self, out: &mut Vec<Violation>) {
        if !self.alpha.is_finite() {
            out.push(Violation::NonFinite { field: "alpha" });
        }
        if !self.c_bar.is_finite() {
            out.push(Violation::NonFinite { field: "c_bar" });
        }
        if !self.phi.is_finite() {
            out.push(Violation::NonFinite { field: "phi" });
        }
        if self.alpha.is_finite() && self.c_bar.is_finite() && self.alpha <= self.c_bar {
            out.push(Violation::InterceptNotAboveCost {
                alpha: self.alpha,
                c_bar: self.c_bar,
            });
        }
        if self.phi.is_finite() && self.phi <= 0.0 {
            out.push(Violation::NonPositivePhi { phi: self.phi });
        }
    }
}

/// Relative R&D productivities, one per firm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProductivityProfile {
    thetas: Vec<f64>,
}

impl ProductivityProfile {
    pub fn new(thetas: Vec<f64>) -> Result<Self, DomainError> {
        let mut violations = Vec::new();
        Self::check(&thetas, &mut violations);
        if violations.is_empty() {
            Ok(Self { thetas })
        } else {
            Err(DomainError { violations })
        }
    }

    pub fn homogeneous(n: usize) -> Self {
        Self {
            thetas: vec![1.0; n],
        }
    }

    fn check(thetas: &[f64], out: &mut Vec<Violation>) {
        if thetas.is_empty() {
            out.push(Violation::EmptyProfile);
        }
        for (firm, &theta) in thetas.iter().enumerate() {
            if !(MIN_THETA..=1.0).contains(&theta) {
                out.push(Violation::ThetaOutOfRange { firm, theta });
            }
        }
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.thetas
    }

    /// Whether the best firm sits exactly at 1.
    pub fn is_normalized(&self) -> bool {
        self.thetas.iter().cloned().fold(f64::NEG_INFINITY, f64::max) == 1.0
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.thetas.iter().map(|t| t * t).sum()
    }
}

impl std::ops::Index<usize> for ProductivityProfile {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.thetas[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FirmType {
    High,
    Low,
}

/// Two-type economy: the first `rho * n` firms have productivity 1, the
/// remaining ones `theta_low`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTwoType", into = "RawTwoType")]
pub struct TwoTypeConfig {
    n: usize,
    rho: f64,
    theta_low: f64,
    n_high: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawTwoType {
    n: usize,
    rho: f64,
    theta_low: f64,
}

impl TryFrom<RawTwoType> for TwoTypeConfig {
    type Error = DomainError;

    fn try_from(raw: RawTwoType) -> Result<Self, DomainError> {
        TwoTypeConfig::new(raw.n, raw.rho, raw.theta_low)
    }
}

impl From<TwoTypeConfig> for RawTwoType {
    fn from(c: TwoTypeConfig) -> Self {
        RawTwoType {
            n: c.n,
            rho: c.rho,
            theta_low: c.theta_low,
        }
    }
}

impl TwoTypeConfig {
    pub fn new(n: usize, rho: f64, theta_low: f64) -> Result<Self, DomainError> {
        let mut violations = Vec::new();
        if n < 2 {
            violations.push(Violation::TooFewFirms { n });
        }
        let mut n_high = 0;
        if !(0.0..=1.0).contains(&rho) {
            violations.push(Violation::RhoOutOfRange { rho });
        } else {
            let scaled = rho * n as f64;
            let rounded = scaled.round();
            // rho = k/n written in decimal never lands exactly on k
            if (scaled - rounded).abs() > 1e-9 * (1.0 + scaled) {
                violations.push(Violation::FractionalHighCount { n, rho });
            } else {
                n_high = rounded as usize;
            }
        }
        if !(MIN_THETA..=1.0).contains(&theta_low) {
            violations.push(Violation::ThetaLowOutOfRange { theta_low });
        }
        if violations.is_empty() {
            Ok(Self {
                n,
                rho,
                theta_low,
                n_high,
            })
        } else {
            Err(DomainError { violations })
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn theta_low(&self) -> f64 {
        self.theta_low
    }

    pub fn n_high(&self) -> usize {
        self.n_high
    }

    pub fn n_low(&self) -> usize {
        self.n - self.n_high
    }

    pub fn types(&self) -> Vec<FirmType> {
        (0..self.n)
            .map(|i| {
                if i < self.n_high {
                    FirmType::High
                } else {
                    FirmType::Low
                }
            })
            .collect()
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| if i < self.n_high { 1.0 } else { self.theta_low })
            .collect()
    }

    pub fn profile(&self) -> ProductivityProfile {
        ProductivityProfile {
            thetas: self.thetas(),
        }
    }

    pub fn with_theta_low(&self, theta_low: f64) -> Result<Self, DomainError> {
        Self::new(self.n, self.rho, theta_low)
    }
}

/// A firm label checked against the instance's firm count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FirmIndex(usize);

impl FirmIndex {
    pub fn new(value: usize, n: usize) -> Option<Self> {
        (value < n).then_some(Self(value))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// A validated (params, profile) pair. Immutable; every solver takes one.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    params: MarketParams,
    profile: ProductivityProfile,
    phi_bound_satisfied: bool,
}

impl Instance {
    pub fn new(params: MarketParams, thetas: Vec<f64>) -> Result<Self, DomainError> {
        let mut violations = Vec::new();
        params.violations(&mut violations);
        ProductivityProfile::check(&thetas, &mut violations);
        if !violations.is_empty() {
            return Err(DomainError { violations });
        }
        let n = thetas.len();
        let phi_bound_satisfied = n < 2 || params.phi > phi_lower_bound(n);
        if !phi_bound_satisfied {
            log::warn!(
                "phi = {} does not exceed the positivity bound {} for n = {}",
                params.phi,
                phi_lower_bound(n),
                n
            );
        }
        Ok(Self {
            params,
            profile: ProductivityProfile { thetas },
            phi_bound_satisfied,
        })
    }

    pub fn two_type(params: MarketParams, config: &TwoTypeConfig) -> Result<Self, DomainError> {
        Self::new(params, config.thetas())
    }

    pub fn n(&self) -> usize {
        self.profile.len()
    }

    pub fn params(&self) -> &MarketParams {
        &self.params
    }

    pub fn profile(&self) -> &ProductivityProfile {
        &self.profile
    }

    pub fn thetas(&self) -> &[f64] {
        self.profile.as_slice()
    }

    pub fn phi(&self) -> f64 {
        self.params.phi
    }

    pub fn markup(&self) -> f64 {
        self.params.markup()
    }

    /// Whether `phi` strictly exceeds the positivity bound for this `n`.
    pub fn phi_bound_satisfied(&self) -> bool {
        self.phi_bound_satisfied
    }

    pub fn with_thetas(&self, thetas: Vec<f64>) -> Result<Self, DomainError> {
        Self::new(self.params, thetas)
    }

    pub fn with_params(&self, params: MarketParams) -> Result<Self, DomainError> {
        Self::new(params, self.profile.thetas.clone())
    }

    pub fn with_phi(&self, phi: f64) -> Result<Self, DomainError> {
        self.with_params(MarketParams { phi, ..self.params })
    }
}

/// `validate_instance`: the checked entry point for external inputs.
pub fn validate_instance(params: MarketParams, profile: &[f64]) -> Result<Instance, DomainError> {
    Instance::new(params, profile.to_vec())
}

/// On-disk JSON form of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub alpha: f64,
    pub c_bar: f64,
    pub phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thetas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_type: Option<RawTwoTypeFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawTwoTypeFile {
    pub n: usize,
    pub rho: f64,
    pub theta_low: f64,
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance) -> Self {
        let p = instance.params();
        Self {
            alpha: p.alpha,
            c_bar: p.c_bar,
            phi: p.phi,
            thetas: Some(instance.thetas().to_vec()),
            two_type: None,
        }
    }

    /// Explicit `thetas` take precedence; otherwise they come from `two_type`.
    pub fn validate(&self) -> Result<Instance, DomainError> {
        let params = MarketParams::new(self.alpha, self.c_bar, self.phi);
        let two_type = self
            .two_type
            .map(|t| TwoTypeConfig::new(t.n, t.rho, t.theta_low))
            .transpose()?;
        let thetas = match (&self.thetas, two_type) {
            (Some(t), Some(cfg)) if t.len() != cfg.n() => {
                return Err(DomainError {
                    violations: vec![Violation::LengthMismatch {
                        expected: cfg.n(),
                        found: t.len(),
                    }],
                })
            }
            (Some(t), _) => t.clone(),
            (None, Some(cfg)) => cfg.thetas(),
            (None, None) => Vec::new(),
        };
        Instance::new(params, thetas)
    }

    pub fn two_type_config(&self) -> Result<Option<TwoTypeConfig>, DomainError> {
        self.two_type
            .map(|t| TwoTypeConfig::new(t.n, t.rho, t.theta_low))
            .transpose()
    }
}
