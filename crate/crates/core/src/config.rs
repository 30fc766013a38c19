//! Constants shared by every stage of the construction.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Mollifier description. Only the exponential bump profile is implemented.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub support_radius: f64,
    pub profile: String,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self { support_radius: 1.0, profile: "exp-bump".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstantsConfig {
    pub m: usize,
    pub n: usize,
    /// Decay loss: admissible excess budget scales like `rho^(2 - 2 delta)`.
    pub delta: f64,
    /// Exponent of the Lipschitz approximation estimates.
    pub eta: f64,
    /// Hölder exponent of the third derivatives.
    pub alpha: f64,
    /// Exponent in the Laplacian bound of the mollified approximation.
    pub lambda: f64,
    pub eps0: f64,
    pub eps1: f64,
    /// Mass allowance in the small-mass hypothesis `||T||(B_1) <= omega_m + eps_h`.
    pub eps_h: f64,
    /// Admissibility constant.
    pub cmn: f64,
    /// Truncation exponent of the maximal-function Lipschitz lemma.
    pub trunc_alpha: f64,
    /// Exponent actually used for the good-set threshold `E^(2 beta)`; `beta < trunc_alpha`.
    pub trunc_beta: f64,
    pub sigma: f64,
    pub theta: f64,
    pub gamma: f64,
    pub tau_exp: f64,
    /// Slack in the one-step decay check `(1/2^(m+2) + basic_theta)`.
    pub basic_theta: f64,
    /// Constant `C` in the Lipschitz bound `C E^eta` handed to the extension.
    pub lip_const: f64,
    /// Rotation lemma smallness constant.
    pub c0: f64,
    /// Interpolation radius is `interp_radius_const * 2^-k`.
    pub interp_radius_const: f64,
    pub k0: u32,
    pub n0: u32,
    pub kernel: KernelSpec,
    pub grid_h: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self {
            m: 2,
            n: 1,
            delta: 0.05,
            eta: 0.05,
            alpha: 0.1,
            lambda: 0.1,
            eps0: 0.2,
            eps1: 0.05,
            eps_h: 0.25,
            cmn: 4.0,
            trunc_alpha: 0.2,
            trunc_beta: 0.1,
            sigma: 0.04,
            theta: 0.1,
            gamma: 0.12,
            tau_exp: 0.25,
            basic_theta: 0.05,
            lip_const: 2.0,
            c0: 0.1,
            interp_radius_const: 8.0,
            k0: 7,
            n0: 6,
            kernel: KernelSpec::default(),
            grid_h: 1.0 / 256.0,
        }
    }
}

fn unit_open(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must lie in (0, 1), got {v}")))
    }
}

impl ConstantsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m != 2 {
            return Err(Error::InvalidConfig(format!("sampled grids support m = 2 only, got m = {}", self.m)));
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        for (name, v) in [
            ("delta", self.delta),
            ("eta", self.eta),
            ("alpha", self.alpha),
            ("lambda", self.lambda),
            ("trunc_alpha", self.trunc_alpha),
            ("trunc_beta", self.trunc_beta),
            ("sigma", self.sigma),
            ("theta", self.theta),
            ("gamma", self.gamma),
            ("tau_exp", self.tau_exp),
        ] {
            unit_open(name, v)?;
        }
        let m = self.m as f64;
        let cap = (1.0 - 2.0 * self.trunc_alpha) / (2.0 * m);
        if !(self.sigma < cap && self.gamma < cap) {
            return Err(Error::InvalidConfig(format!("sigma and gamma must be below (1 - 2 alpha)/(2m) = {cap}")));
        }
        if !(2.0 * self.sigma < self.theta && self.theta < self.gamma) {
            return Err(Error::InvalidConfig("need 2 sigma < theta < gamma".into()));
        }
        if self.m > 1 && (1.0 - 2.0 * self.trunc_alpha - self.sigma) * m / (m - 1.0) <= 1.0 {
            return Err(Error::InvalidConfig("need (1 - 2 alpha - sigma) m / (m - 1) > 1".into()));
        }
        if !(self.trunc_beta < self.trunc_alpha && 2.0 * self.trunc_beta < self.tau_exp) {
            return Err(Error::InvalidConfig("need beta < alpha and 2 beta < tau".into()));
        }
        if self.eta > self.trunc_beta {
            return Err(Error::InvalidConfig("need eta <= beta".into()));
        }
        if !(5 < self.n0 && self.n0 < self.k0) {
            return Err(Error::DepthBounds { n0: self.n0, k: self.k0 });
        }
        if !(self.grid_h > 0.0) {
            return Err(Error::InvalidConfig("grid_h must be positive".into()));
        }
        for (name, v) in [
            ("eps0", self.eps0),
            ("eps1", self.eps1),
            ("eps_h", self.eps_h),
            ("cmn", self.cmn),
            ("lip_const", self.lip_const),
            ("c0", self.c0),
            ("interp_radius_const", self.interp_radius_const),
            ("basic_theta", self.basic_theta),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.kernel.profile != "exp-bump" || self.kernel.support_radius != 1.0 {
            return Err(Error::InvalidConfig("only the unit exp-bump kernel is available".into()));
        }
        Ok(())
    }

    /// Admissibility budget `C_mn eps0^2 rho^(2 - 2 delta)`.
    pub fn admissible_budget(&self, rho: f64) -> f64 {
        self.cmn * self.eps0 * self.eps0 * rho.powf(2.0 - 2.0 * self.delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ConstantsConfig::default().validate().unwrap();
    }

    #[test]
    fn constraint_violations() {
        let mut c = ConstantsConfig::default();
        c.theta = 0.05; // 2 sigma = 0.08 > theta
        assert!(c.validate().is_err());
        let mut c = ConstantsConfig::default();
        c.n0 = 5;
        assert!(matches!(c.validate(), Err(Error::DepthBounds { .. })));
        let mut c = ConstantsConfig::default();
        c.delta = 1.0;
        assert!(c.validate().is_err());
        let mut c = ConstantsConfig::default();
        c.grid_h = 0.0;
        assert!(c.validate().is_err());
    }
}
