//! Input marginals: densities, inverse-CDF sampling, raw moments, and the
//! log-density derivative (score) kernels used by design sensitivity analysis,
//! together with the binding between design variables and distribution
//! parameters.
//!
//! All marginals are parameterized by the quantities a designer would control:
//! the lognormal takes the mean and standard deviation of the variable itself
//! (the underlying normal parameters are derived), and the truncated Gaussian
//! takes a half-width `D` so its support is `[mu - D, mu + D]`.

use crate::special::{binomial, factorial, inverse_normal_cdf, ln_gamma, normal_cdf, normal_pdf};
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Distribution parameter a design variable can control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamRole {
    Mean,
    Stdev,
    Rate,
    Scale,
    Shape,
}

impl ParamRole {
    pub fn name(self) -> &'static str {
        match self {
            ParamRole::Mean => "mean",
            ParamRole::Stdev => "stdev",
            ParamRole::Rate => "rate",
            ParamRole::Scale => "scale",
            ParamRole::Shape => "shape",
        }
    }
}

/// Evaluation mode for the truncated-Gaussian score kernels.
///
/// The tabulated kernels carry a `1/(Phi(D) - Phi(-D))` prefactor, while
/// direct differentiation of `ln f` yields the same expressions without it
/// (plus a boundary term for the standard-deviation role). Both behaviors are
/// kept selectable because they disagree and neither can be singled out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncGaussScore {
    /// Tabulated kernels, prefactor included, exactly as printed.
    #[default]
    Table2,
    /// Direct derivative of the log-density.
    Numeric,
}

/// One independent input's probability law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Marginal {
    Gaussian { mean: f64, stdev: f64 },
    Exponential { rate: f64 },
    /// Parameterized by the mean and standard deviation of the variable
    /// itself; the underlying normal parameters are derived.
    Lognormal { mean: f64, stdev: f64 },
    /// Support is `[mean - half_width, mean + half_width]`.
    TruncatedGaussian { mean: f64, stdev: f64, half_width: f64 },
    Weibull { scale: f64, shape: f64 },
    Uniform { lower: f64, upper: f64 },
}

fn require_positive(kind: &'static str, name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter {
            kind,
            message: format!("{name} must be strictly positive and finite, got {v}"),
        });
    }
    Ok(())
}

impl Marginal {
    pub fn gaussian(mean: f64, stdev: f64) -> Result<Self> {
        require_positive("gaussian", "stdev", stdev)?;
        Ok(Marginal::Gaussian { mean, stdev })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        require_positive("exponential", "rate", rate)?;
        Ok(Marginal::Exponential { rate })
    }

    pub fn lognormal(mean: f64, stdev: f64) -> Result<Self> {
        require_positive("lognormal", "mean", mean)?;
        require_positive("lognormal", "stdev", stdev)?;
        Ok(Marginal::Lognormal { mean, stdev })
    }

    pub fn truncated_gaussian(mean: f64, stdev: f64, half_width: f64) -> Result<Self> {
        require_positive("truncated_gaussian", "stdev", stdev)?;
        require_positive("truncated_gaussian", "half_width", half_width)?;
        Ok(Marginal::TruncatedGaussian { mean, stdev, half_width })
    }

    pub fn weibull(scale: f64, shape: f64) -> Result<Self> {
        require_positive("weibull", "scale", scale)?;
        require_positive("weibull", "shape", shape)?;
        Ok(Marginal::Weibull { scale, shape })
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidParameter {
                kind: "uniform",
                message: format!("requires lower < upper, got [{lower}, {upper}]"),
            });
        }
        Ok(Marginal::Uniform { lower, upper })
    }

    /// Re-checks the parameter invariants (used after deserialization).
    pub fn validate(&self) -> Result<()> {
        match *self {
            Marginal::Gaussian { mean, stdev } => Marginal::gaussian(mean, stdev).map(|_| ()),
            Marginal::Exponential { rate } => Marginal::exponential(rate).map(|_| ()),
            Marginal::Lognormal { mean, stdev } => Marginal::lognormal(mean, stdev).map(|_| ()),
            Marginal::TruncatedGaussian { mean, stdev, half_width } => {
                Marginal::truncated_gaussian(mean, stdev, half_width).map(|_| ())
            }
            Marginal::Weibull { scale, shape } => Marginal::weibull(scale, shape).map(|_| ()),
            Marginal::Uniform { lower, upper } => Marginal::uniform(lower, upper).map(|_| ()),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Marginal::Gaussian { .. } => "gaussian",
            Marginal::Exponential { .. } => "exponential",
            Marginal::Lognormal { .. } => "lognormal",
            Marginal::TruncatedGaussian { .. } => "truncated_gaussian",
            Marginal::Weibull { .. } => "weibull",
            Marginal::Uniform { .. } => "uniform",
        }
    }

    /// Underlying normal parameters of the lognormal: `(mu~, sigma~)` with
    /// `sigma~^2 = ln(1 + sigma^2/mu^2)` and `mu~ = ln(mu) - sigma~^2 / 2`.
    pub fn lognormal_tilde(&self) -> Option<(f64, f64)> {
        match *self {
            Marginal::Lognormal { mean, stdev } => {
                let s2 = (1.0 + (stdev / mean) * (stdev / mean)).ln();
                Some((mean.ln() - 0.5 * s2, s2.sqrt()))
            }
            _ => None,
        }
    }

    /// Support interval (possibly infinite endpoints).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Marginal::Gaussian { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Marginal::Exponential { .. } => (0.0, f64::INFINITY),
            Marginal::Lognormal { .. } => (0.0, f64::INFINITY),
            Marginal::TruncatedGaussian { mean, half_width, .. } => {
                (mean - half_width, mean + half_width)
            }
            Marginal::Weibull { .. } => (0.0, f64::INFINITY),
            Marginal::Uniform { lower, upper } => (lower, upper),
        }
    }

    /// Whether the support depends on a bindable distribution parameter.
    pub fn has_fixed_support(&self) -> bool {
        !matches!(self, Marginal::TruncatedGaussian { .. })
    }

    /// Affine standardization `(shift, scale)` mapping x to `z = (x - shift)/scale`;
    /// recurrence coefficients and polynomial evaluation work in z.
    pub fn standardization(&self) -> (f64, f64) {
        match *self {
            Marginal::Gaussian { mean, stdev } => (mean, stdev),
            Marginal::Exponential { rate } => (0.0, 1.0 / rate),
            Marginal::Lognormal { mean, stdev } => (mean, stdev),
            Marginal::TruncatedGaussian { mean, stdev, .. } => (mean, stdev),
            Marginal::Weibull { scale, .. } => (0.0, scale),
            Marginal::Uniform { lower, upper } => (0.5 * (lower + upper), 0.5 * (upper - lower)),
        }
    }

    /// Probability density; zero outside the support.
    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        match *self {
            Marginal::Gaussian { mean, stdev } => normal_pdf((x - mean) / stdev) / stdev,
            Marginal::Exponential { rate } => rate * (-rate * x).exp(),
            Marginal::Lognormal { .. } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let (mu_t, sig_t) = self.lognormal_tilde().unwrap();
                normal_pdf((x.ln() - mu_t) / sig_t) / (x * sig_t)
            }
            Marginal::TruncatedGaussian { mean, stdev, half_width } => {
                let a = half_width / stdev;
                let mass = normal_cdf(a) - normal_cdf(-a);
                normal_pdf((x - mean) / stdev) / (stdev * mass)
            }
            Marginal::Weibull { scale, shape } => {
                if x == 0.0 {
                    // Density diverges at the origin for shape < 1.
                    return if shape < 1.0 {
                        f64::INFINITY
                    } else if shape == 1.0 {
                        1.0 / scale
                    } else {
                        0.0
                    };
                }
                let t = x / scale;
                shape / scale * t.powf(shape - 1.0) * (-t.powf(shape)).exp()
            }
            Marginal::Uniform { lower, upper } => 1.0 / (upper - lower),
        }
    }

    /// Inverse CDF at probability `p` in (0, 1).
    pub fn quantile(&self, p: f64) -> f64 {
        debug_assert!(p > 0.0 && p < 1.0);
        match *self {
            Marginal::Gaussian { mean, stdev } => mean + stdev * inverse_normal_cdf(p),
            Marginal::Exponential { rate } => -(-p).ln_1p() / rate,
            Marginal::Lognormal { .. } => {
                let (mu_t, sig_t) = self.lognormal_tilde().unwrap();
                (mu_t + sig_t * inverse_normal_cdf(p)).exp()
            }
            Marginal::TruncatedGaussian { mean, stdev, half_width } => {
                let a = half_width / stdev;
                let lo = normal_cdf(-a);
                let hi = normal_cdf(a);
                let z = inverse_normal_cdf((lo + p * (hi - lo)).clamp(f64::MIN_POSITIVE, 1.0 - 1e-16));
                (mean + stdev * z).clamp(mean - half_width, mean + half_width)
            }
            Marginal::Weibull { scale, shape } => scale * (-(-p).ln_1p()).powf(1.0 / shape),
            Marginal::Uniform { lower, upper } => lower + (upper - lower) * p,
        }
    }

    /// Draws one realization by inverse-CDF transform of a uniform variate.
    ///
    /// Deterministic for a fixed generator state, so per-sample counter-based
    /// streams make parallel and serial simulation agree bitwise.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.quantile(u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
    }

    /// Raw moment `E[X^order]`; closed forms for every kind (the truncated
    /// Gaussian uses the integration-by-parts recursion).
    pub fn raw_moment(&self, order: u32) -> Result<f64> {
        if order == 0 {
            return Ok(1.0);
        }
        let r = order as usize;
        Ok(match *self {
            Marginal::Gaussian { mean, stdev } => gaussian_raw_moment(mean, stdev, r),
            Marginal::Exponential { rate } => factorial(r) / rate.powi(order as i32),
            Marginal::Lognormal { .. } => {
                let (mu_t, sig_t) = self.lognormal_tilde().unwrap();
                let rr = r as f64;
                (rr * mu_t + 0.5 * rr * rr * sig_t * sig_t).exp()
            }
            Marginal::TruncatedGaussian { mean, stdev, half_width } => {
                let z = truncated_std_normal_moments(half_width / stdev, r);
                let mut acc = 0.0;
                for j in 0..=r {
                    acc += binomial(r, j) * mean.powi((r - j) as i32) * stdev.powi(j as i32) * z[j];
                }
                acc
            }
            Marginal::Weibull { scale, shape } => {
                let g = ln_gamma(1.0 + r as f64 / shape);
                if !g.is_finite() {
                    return Err(Error::MomentUndefined { kind: "weibull", order });
                }
                scale.powi(order as i32) * g.exp()
            }
            Marginal::Uniform { lower, upper } => {
                (upper.powi(order as i32 + 1) - lower.powi(order as i32 + 1))
                    / ((r as f64 + 1.0) * (upper - lower))
            }
        })
    }

    /// Mean of the marginal.
    pub fn mean(&self) -> f64 {
        self.raw_moment(1).expect("first moment exists for every supported kind")
    }

    /// Roles a design variable may bind to for this kind.
    pub fn bindable_roles(&self) -> &'static [ParamRole] {
        match self {
            Marginal::Gaussian { .. }
            | Marginal::Lognormal { .. }
            | Marginal::TruncatedGaussian { .. } => &[ParamRole::Mean, ParamRole::Stdev],
            Marginal::Exponential { .. } => &[ParamRole::Rate],
            Marginal::Weibull { .. } => &[ParamRole::Scale, ParamRole::Shape],
            // No bindable parameter: the uniform exists to support Legendre
            // bases and tests.
            Marginal::Uniform { .. } => &[],
        }
    }

    /// Derivative of the log-density with respect to the named parameter,
    /// evaluated at a point inside the support.
    pub fn log_density_derivative(
        &self,
        role: ParamRole,
        x: f64,
        tg_mode: TruncGaussScore,
    ) -> Result<f64> {
        let kind = self.kind_name();
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return Err(Error::OutsideSupport { kind, x });
        }
        let unsupported = || Error::UnsupportedRole { kind, role: role.name() };
        match *self {
            Marginal::Gaussian { mean, stdev } => {
                let z = (x - mean) / stdev;
                match role {
                    ParamRole::Mean => Ok(z / stdev),
                    ParamRole::Stdev => Ok((z * z - 1.0) / stdev),
                    _ => Err(unsupported()),
                }
            }
            Marginal::Exponential { rate } => match role {
                ParamRole::Rate => Ok(1.0 / rate - x),
                _ => Err(unsupported()),
            },
            Marginal::Lognormal { mean, stdev } => {
                let (mu_t, sig_t) = self.lognormal_tilde().unwrap();
                if x <= 0.0 {
                    return Err(Error::OutsideSupport { kind, x });
                }
                let t = x.ln() - mu_t;
                // d ln f / d mu~ and d ln f / d sigma~.
                let dl_dmut = t / (sig_t * sig_t);
                let dl_dsigt = -1.0 / sig_t + t * t / (sig_t * sig_t * sig_t);
                let m2s2 = mean * mean + stdev * stdev;
                match role {
                    ParamRole::Mean => {
                        let dsigt =
                            -stdev * stdev / (sig_t * mean * m2s2);
                        let dmut = 1.0 / mean - sig_t * dsigt;
                        Ok(dl_dmut * dmut + dl_dsigt * dsigt)
                    }
                    ParamRole::Stdev => {
                        let dsigt = stdev / (sig_t * m2s2);
                        let dmut = -sig_t * dsigt;
                        Ok(dl_dmut * dmut + dl_dsigt * dsigt)
                    }
                    _ => Err(unsupported()),
                }
            }
            Marginal::TruncatedGaussian { mean, stdev, half_width } => {
                let z = (x - mean) / stdev;
                match (role, tg_mode) {
                    (ParamRole::Mean, TruncGaussScore::Table2) => {
                        let mass = normal_cdf(half_width) - normal_cdf(-half_width);
                        Ok(z / (stdev * mass))
                    }
                    (ParamRole::Stdev, TruncGaussScore::Table2) => {
                        let mass = normal_cdf(half_width) - normal_cdf(-half_width);
                        Ok((z * z - 1.0) / (stdev * mass))
                    }
                    (ParamRole::Mean, TruncGaussScore::Numeric) => Ok(z / stdev),
                    (ParamRole::Stdev, TruncGaussScore::Numeric) => {
                        let a = half_width / stdev;
                        let mass = normal_cdf(a) - normal_cdf(-a);
                        Ok((z * z - 1.0) / stdev
                            + 2.0 * half_width * normal_pdf(a) / (stdev * stdev * mass))
                    }
                    _ => Err(unsupported()),
                }
            }
            Marginal::Weibull { scale, shape } => {
                if x <= 0.0 {
                    return Err(Error::OutsideSupport { kind, x });
                }
                let tk = (x / scale).powf(shape);
                match role {
                    ParamRole::Scale => Ok(shape / scale * (tk - 1.0)),
                    ParamRole::Shape => Ok(1.0 / shape + (x.ln() - scale.ln()) * (1.0 - tk)),
                    _ => Err(unsupported()),
                }
            }
            Marginal::Uniform { .. } => Err(unsupported()),
        }
    }
}

fn gaussian_raw_moment(mean: f64, stdev: f64, r: usize) -> f64 {
    // E[(mu + sigma Z)^r] via binomial expansion; odd central moments vanish.
    let mut acc = 0.0;
    let mut j = 0;
    while j <= r {
        let mut dfac = 1.0; // (j-1)!!
        let mut k = j;
        while k > 1 {
            dfac *= (k - 1) as f64;
            k -= 2;
        }
        acc += binomial(r, j) * mean.powi((r - j) as i32) * stdev.powi(j as i32) * dfac;
        j += 2;
    }
    acc
}

/// Moments `E[Z^j]`, `j = 0..=r`, of the standard normal truncated to `[-a, a]`.
fn truncated_std_normal_moments(a: f64, r: usize) -> Vec<f64> {
    let mass = normal_cdf(a) - normal_cdf(-a);
    let edge = normal_pdf(a);
    let mut m = vec![0.0; r + 1];
    m[0] = 1.0;
    for j in 2..=r {
        if j % 2 == 0 {
            m[j] = (j - 1) as f64 * m[j - 2] - 2.0 * a.powi(j as i32 - 1) * edge / mass;
        }
    }
    m
}

/// Association between one design variable and the distribution parameters it
/// controls. A single design variable may drive a parameter of one variable or
/// the same parameter of several (e.g. identically distributed) variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignBinding {
    /// Index of the design variable this binding belongs to.
    pub design_index: usize,
    /// `(variable index, parameter role)` pairs, 0-based variable indices.
    pub targets: Vec<(usize, ParamRole)>,
}

impl DesignBinding {
    pub fn new(design_index: usize, targets: Vec<(usize, ParamRole)>) -> Self {
        DesignBinding { design_index, targets }
    }

    /// Checks the targets against the marginals of the input vector.
    pub fn validate(&self, input: &[Marginal]) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for &(i, role) in &self.targets {
            if i >= input.len() {
                return Err(Error::Config {
                    field: format!("bindings[{}]", self.design_index),
                    message: format!("variable index {i} out of range (N = {})", input.len()),
                });
            }
            if !input[i].bindable_roles().contains(&role) {
                return Err(Error::UnsupportedRole {
                    kind: input[i].kind_name(),
                    role: role.name(),
                });
            }
            if !seen.insert((i, role)) {
                return Err(Error::Config {
                    field: format!("bindings[{}]", self.design_index),
                    message: format!("duplicate target ({i}, {})", role.name()),
                });
            }
        }
        Ok(())
    }

    /// Score function `s_dk(x) = sum_i d ln f_i / d d_k` at a full input point.
    pub fn score(&self, input: &[Marginal], x: &[f64], tg_mode: TruncGaussScore) -> Result<f64> {
        let mut acc = 0.0;
        for &(i, role) in &self.targets {
            acc += input[i].log_density_derivative(role, x[i], tg_mode)?;
        }
        Ok(acc)
    }
}
