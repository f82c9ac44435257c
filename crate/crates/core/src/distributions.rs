//! Service-time and inter-generation laws with a fixed mean `1/mu`.
//!
//! Every law is parameterized by its rate `mu` and, for the heavy-tailed
//! families, a single shape parameter:
//!
//! | kind          | shape | scale (derived)                 |
//! |---------------|-------|---------------------------------|
//! | deterministic | -     | point mass at `1/mu`            |
//! | exponential   | -     | rate `mu`                       |
//! | pareto        | alpha | `theta = (alpha - 1)/(mu alpha)` |
//! | lognormal     | sigma | `log S ~ N(-ln mu - sigma^2/2, sigma^2)` |
//! | weibull       | kappa | `beta = 1/(mu Gamma(1 + 1/kappa))` |
//!
//! Scales are always recomputed from `(mu, shape)`. All evaluations that can
//! overflow for extreme shapes (log-normal `sigma = 50`, Weibull `kappa = 0.05`)
//! are carried out in log space.
//!
//! The Pareto truncated mean is `E[S 1{S <= x}] = (1 - (theta/x)^(alpha-1)) / mu`,
//! i.e. the exponent on `x` is `1 - alpha`. This is what direct integration of the
//! density gives and what the quadrature tests check.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::quadrature::{self, DEFAULT_REL_TOL};

/// Smallest admissible Weibull shape; below it `Gamma(1 + 1/kappa)` stops being
/// comfortably representable.
pub const MIN_WEIBULL_SHAPE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistKind {
    Deterministic,
    Exponential,
    Pareto,
    LogNormal,
    Weibull,
}

impl DistKind {
    pub const ALL: [DistKind; 5] = [
        DistKind::Deterministic,
        DistKind::Exponential,
        DistKind::Pareto,
        DistKind::LogNormal,
        DistKind::Weibull,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistKind::Deterministic => "deterministic",
            DistKind::Exponential => "exponential",
            DistKind::Pareto => "pareto",
            DistKind::LogNormal => "lognormal",
            DistKind::Weibull => "weibull",
        }
    }

    pub fn has_shape(self) -> bool {
        matches!(self, DistKind::Pareto | DistKind::LogNormal | DistKind::Weibull)
    }

    /// Name of the shape parameter, if any.
    pub fn shape_name(self) -> Option<&'static str> {
        match self {
            DistKind::Pareto => Some("alpha"),
            DistKind::LogNormal => Some("sigma"),
            DistKind::Weibull => Some("kappa"),
            _ => None,
        }
    }

    /// True when moving from `a` to `b` makes the tail heavier.
    pub fn is_heavier(self, a: f64, b: f64) -> bool {
        match self {
            DistKind::Pareto | DistKind::Weibull => b < a,
            DistKind::LogNormal => b > a,
            _ => false,
        }
    }
}

impl fmt::Display for DistKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "deterministic" => Ok(DistKind::Deterministic),
            "exponential" => Ok(DistKind::Exponential),
            "pareto" => Ok(DistKind::Pareto),
            "lognormal" | "log-normal" | "log_normal" => Ok(DistKind::LogNormal),
            "weibull" => Ok(DistKind::Weibull),
            other => Err(Error::invalid(
                "kind",
                format!("unknown distribution kind `{other}` (expected one of deterministic, exponential, pareto, lognormal, weibull)"),
            )),
        }
    }
}

/// Wire form of a distribution: `{kind, mu, shape?}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub kind: DistKind,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<f64>,
}

/// A validated law with mean `1/mu`. Immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionSpec", into = "DistributionSpec")]
pub struct ServiceDistribution {
    kind: DistKind,
    mu: f64,
    shape: Option<f64>,
}

impl TryFrom<DistributionSpec> for ServiceDistribution {
    type Error = Error;

    fn try_from(spec: DistributionSpec) -> Result<Self> {
        ServiceDistribution::new(spec.kind, spec.mu, spec.shape)
    }
}

impl From<ServiceDistribution> for DistributionSpec {
    fn from(d: ServiceDistribution) -> Self {
        DistributionSpec {
            kind: d.kind,
            mu: d.mu,
            shape: d.shape,
        }
    }
}

fn check_rate(mu: f64) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::invalid(
            "mu",
            format!("rate must be positive and finite (got {mu})"),
        ));
    }
    Ok(())
}

impl ServiceDistribution {
    pub fn new(kind: DistKind, mu: f64, shape: Option<f64>) -> Result<Self> {
        check_rate(mu)?;
        match (kind, shape) {
            (DistKind::Deterministic | DistKind::Exponential, None) => {}
            (DistKind::Deterministic | DistKind::Exponential, Some(_)) => {
                return Err(Error::invalid("shape", format!("{kind} takes no shape parameter")))
            }
            (_, None) => {
                return Err(Error::invalid(
                    "shape",
                    format!(
                        "{kind} requires a shape parameter ({})",
                        kind.shape_name().unwrap_or("shape")
                    ),
                ))
            }
            (DistKind::Pareto, Some(alpha)) => {
                if !(alpha.is_finite() && alpha > 1.0) {
                    return Err(Error::invalid(
                        "shape",
                        format!("Pareto requires alpha > 1 for a finite mean (got {alpha})"),
                    ));
                }
            }
            (DistKind::LogNormal, Some(sigma)) => {
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::invalid(
                        "shape",
                        format!("log-normal requires sigma > 0 (got {sigma})"),
                    ));
                }
            }
            (DistKind::Weibull, Some(kappa)) => {
                if !(kappa.is_finite() && kappa >= MIN_WEIBULL_SHAPE) {
                    return Err(Error::invalid(
                        "shape",
                        format!("Weibull requires kappa >= {MIN_WEIBULL_SHAPE} (got {kappa})"),
                    ));
                }
            }
        }
        Ok(Self { kind, mu, shape })
    }

    pub fn deterministic(mu: f64) -> Result<Self> {
        Self::new(DistKind::Deterministic, mu, None)
    }

    pub fn exponential(mu: f64) -> Result<Self> {
        Self::new(DistKind::Exponential, mu, None)
    }

    pub fn pareto(mu: f64, alpha: f64) -> Result<Self> {
        Self::new(DistKind::Pareto, mu, Some(alpha))
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(DistKind::LogNormal, mu, Some(sigma))
    }

    pub fn weibull(mu: f64, kappa: f64) -> Result<Self> {
        Self::new(DistKind::Weibull, mu, Some(kappa))
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    /// Rate; the mean is `1/mu`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn shape(&self) -> Option<f64> {
        self.shape
    }

    pub fn mean(&self) -> f64 {
        1.0 / self.mu
    }

    pub fn is_continuous(&self) -> bool {
        self.kind != DistKind::Deterministic
    }

    /// Short label such as `pareto(alpha=1.5)`.
    pub fn label(&self) -> String {
        match (self.kind.shape_name(), self.shape) {
            (Some(name), Some(v)) => format!("{}({name}={v})", self.kind),
            _ => self.kind.to_string(),
        }
    }

    fn shape_value(&self) -> f64 {
        self.shape.expect("validated: heavy-tailed kinds carry a shape")
    }

    /// Pareto scale `theta(alpha) = (alpha - 1) / (mu alpha)`.
    pub fn pareto_scale(&self) -> Option<f64> {
        (self.kind == DistKind::Pareto).then(|| {
            let alpha = self.shape_value();
            (alpha - 1.0) / (self.mu * alpha)
        })
    }

    /// Weibull scale `beta(kappa) = [mu Gamma(1 + 1/kappa)]^-1`.
    pub fn weibull_scale(&self) -> Option<f64> {
        (self.kind == DistKind::Weibull).then(|| self.weibull_ln_scale().exp())
    }

    fn weibull_ln_scale(&self) -> f64 {
        let kappa = self.shape_value();
        -(self.mu.ln() + ln_gamma(1.0 + 1.0 / kappa))
    }

    fn lognormal_location(&self) -> f64 {
        let sigma = self.shape_value();
        -self.mu.ln() - 0.5 * sigma * sigma
    }

    /// Maps a standard exponential variate `v` (or standard normal, for the
    /// log-normal) onto a draw of this law. Results are clamped into the positive
    /// finite range.
    fn transform(&self, v: f64) -> f64 {
        let s = match self.kind {
            DistKind::Deterministic => self.mean(),
            DistKind::Exponential => v / self.mu,
            DistKind::Pareto => {
                let alpha = self.shape_value();
                (self.pareto_scale().unwrap().ln() + v / alpha).exp()
            }
            DistKind::Weibull => {
                let kappa = self.shape_value();
                (self.weibull_ln_scale() + v.ln() / kappa).exp()
            }
            DistKind::LogNormal => (self.lognormal_location() + self.shape_value() * v).exp(),
        };
        saturate(s)
    }

    /// One draw. Pareto and Weibull use inverse-CDF sampling from one uniform,
    /// the log-normal exponentiates a standard normal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            DistKind::Deterministic => self.mean(),
            DistKind::LogNormal => {
                let n: f64 = rng.sample(StandardNormal);
                self.transform(n)
            }
            _ => {
                // 1 - U lies in (0, 1], so -ln is finite and nonnegative
                let u = 1.0 - rng.random::<f64>();
                self.transform(-u.ln())
            }
        }
    }

    /// `P(S <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.kind {
            DistKind::Deterministic => {
                if x >= self.mean() {
                    1.0
                } else {
                    0.0
                }
            }
            DistKind::Exponential => -(-self.mu * x).exp_m1(),
            DistKind::Pareto => {
                let theta = self.pareto_scale().unwrap();
                if x <= theta {
                    0.0
                } else {
                    -(self.shape_value() * (theta / x).ln()).exp_m1()
                }
            }
            DistKind::LogNormal => normal_cdf(self.lognormal_z(x)),
            DistKind::Weibull => -(-self.weibull_power(x)).exp_m1(),
        }
    }

    /// `P(S > x)`, evaluated directly rather than as `1 - cdf(x)`.
    pub fn tail(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match self.kind {
            DistKind::Deterministic => {
                if x >= self.mean() {
                    0.0
                } else {
                    1.0
                }
            }
            DistKind::Exponential => (-self.mu * x).exp(),
            DistKind::Pareto => {
                let theta = self.pareto_scale().unwrap();
                if x <= theta {
                    1.0
                } else {
                    (self.shape_value() * (theta / x).ln()).exp()
                }
            }
            DistKind::LogNormal => normal_sf(self.lognormal_z(x)),
            DistKind::Weibull => (-self.weibull_power(x)).exp(),
        }
    }

    /// Density for continuous kinds; `None` for the point mass.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        if self.kind == DistKind::Deterministic {
            return None;
        }
        if x <= 0.0 {
            return Some(0.0);
        }
        Some(match self.kind {
            DistKind::Exponential => self.mu * (-self.mu * x).exp(),
            DistKind::Pareto => {
                let theta = self.pareto_scale().unwrap();
                if x < theta {
                    0.0
                } else {
                    let alpha = self.shape_value();
                    (alpha / x) * (alpha * (theta / x).ln()).exp()
                }
            }
            DistKind::LogNormal => {
                let sigma = self.shape_value();
                let z = (x.ln() - self.lognormal_location()) / sigma;
                (-0.5 * z * z).exp() / (sigma * x * (2.0 * PI).sqrt())
            }
            DistKind::Weibull => {
                let kappa = self.shape_value();
                let p = self.weibull_power(x);
                kappa / x * p * (-p).exp()
            }
            DistKind::Deterministic => unreachable!(),
        })
    }

    /// Quantile function; `p` in `[0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self.kind {
            DistKind::Deterministic => self.mean(),
            DistKind::LogNormal => {
                // Phi^-1(p) = -sqrt(2) erfc^-1(2p)
                let z = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
                self.transform(z)
            }
            _ => self.transform(-(-p).ln_1p()),
        }
    }

    /// `ln(x mu)/sigma + sigma/2`, so that `P(S > x) = P(N > z)`.
    fn lognormal_z(&self, x: f64) -> f64 {
        let sigma = self.shape_value();
        (x * self.mu).ln() / sigma + 0.5 * sigma
    }

    /// `(x / beta)^kappa` computed in log space.
    fn weibull_power(&self, x: f64) -> f64 {
        let kappa = self.shape_value();
        (kappa * (x.ln() - self.weibull_ln_scale())).exp()
    }

    /// `E[S 1{S <= x}]`.
    pub fn truncated_mean(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let m = self.mean();
        match self.kind {
            DistKind::Deterministic => {
                if x >= m {
                    m
                } else {
                    0.0
                }
            }
            DistKind::Exponential => m * gamma_lr(2.0, self.mu * x),
            DistKind::Pareto => {
                let theta = self.pareto_scale().unwrap();
                if x <= theta {
                    0.0
                } else {
                    -m * ((self.shape_value() - 1.0) * (theta / x).ln()).exp_m1()
                }
            }
            DistKind::LogNormal => {
                let sigma = self.shape_value();
                m * normal_cdf(self.lognormal_z(x) - sigma)
            }
            DistKind::Weibull => {
                let kappa = self.shape_value();
                m * gamma_lr(1.0 + 1.0 / kappa, self.weibull_power(x))
            }
        }
    }

    /// `E[S 1{S > x}]`, evaluated directly.
    pub fn upper_truncated_mean(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.mean();
        }
        let m = self.mean();
        match self.kind {
            DistKind::Deterministic => {
                if x >= m {
                    0.0
                } else {
                    m
                }
            }
            DistKind::Exponential => m * gamma_ur(2.0, self.mu * x),
            DistKind::Pareto => {
                let theta = self.pareto_scale().unwrap();
                if x <= theta {
                    m
                } else {
                    m * ((self.shape_value() - 1.0) * (theta / x).ln()).exp()
                }
            }
            DistKind::LogNormal => {
                let sigma = self.shape_value();
                m * normal_sf(self.lognormal_z(x) - sigma)
            }
            DistKind::Weibull => {
                let kappa = self.shape_value();
                m * gamma_ur(1.0 + 1.0 / kappa, self.weibull_power(x))
            }
        }
    }

    /// `E[min(S, x)] = E[S 1{S <= x}] + x P(S > x)`.
    pub fn min_mean(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let t = self.tail(x);
        let upper = if t == 0.0 { 0.0 } else { x * t };
        self.truncated_mean(x) + upper
    }

    /// `E[S^2]`; `f64::INFINITY` when it diverges (Pareto `alpha <= 2`) or
    /// exceeds the representable range.
    pub fn second_moment(&self) -> f64 {
        let m = self.mean();
        match self.kind {
            DistKind::Deterministic => m * m,
            DistKind::Exponential => 2.0 * m * m,
            DistKind::Pareto => {
                let alpha = self.shape_value();
                if alpha <= 2.0 {
                    f64::INFINITY
                } else {
                    let theta = self.pareto_scale().unwrap();
                    alpha * theta * theta / (alpha - 2.0)
                }
            }
            DistKind::LogNormal => {
                let sigma = self.shape_value();
                (sigma * sigma - 2.0 * self.mu.ln()).exp()
            }
            DistKind::Weibull => {
                let kappa = self.shape_value();
                (ln_gamma(1.0 + 2.0 / kappa) - 2.0 * ln_gamma(1.0 + 1.0 / kappa)).exp() * m * m
            }
        }
    }

    /// `Var(S) = E[S^2] - 1/mu^2`, infinite when the second moment is.
    pub fn variance(&self) -> f64 {
        match self.kind {
            DistKind::Deterministic => 0.0,
            DistKind::Exponential => self.mean() * self.mean(),
            _ => {
                let s2 = self.second_moment();
                if s2.is_infinite() {
                    f64::INFINITY
                } else {
                    (s2 - self.mean() * self.mean()).max(0.0)
                }
            }
        }
    }

    /// `E[g(S)]` for a bounded measurable `g`, integrated over the law's
    /// canonical variable (standard exponential for exponential/Pareto/Weibull,
    /// standard normal for the log-normal).
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64> {
        self.expect_with_tolerance(g, DEFAULT_REL_TOL)
    }

    pub fn expect_with_tolerance<G: Fn(f64) -> f64>(&self, g: G, rel_tol: f64) -> Result<f64> {
        match self.kind {
            DistKind::Deterministic => Ok(g(self.mean())),
            DistKind::LogNormal => {
                let density = 1.0 / (2.0 * PI).sqrt();
                quadrature::integrate_real_line(
                    |n| {
                        let w = density * (-0.5 * n * n).exp();
                        if w == 0.0 {
                            0.0
                        } else {
                            g(self.transform(n)) * w
                        }
                    },
                    rel_tol,
                )
                .map(|r| r.value)
            }
            _ => quadrature::integrate_to_infinity(
                |v| {
                    let w = (-v).exp();
                    if w == 0.0 {
                        0.0
                    } else {
                        g(self.transform(v)) * w
                    }
                },
                0.0,
                rel_tol,
            )
            .map(|r| r.value),
        }
    }

    /// Laplace transform `E[exp(-s S)]`.
    pub fn laplace(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(1.0);
        }
        match self.kind {
            DistKind::Deterministic => Ok((-s * self.mean()).exp()),
            DistKind::Exponential => Ok(self.mu / (self.mu + s)),
            _ => self.expect(|x| (-s * x).exp()).map(|v| v.clamp(0.0, 1.0)),
        }
    }

    /// `1 - E[exp(-s S)]`, computed without cancellation when the transform is near 1.
    pub fn laplace_complement(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        match self.kind {
            DistKind::Deterministic => Ok(-(-s * self.mean()).exp_m1()),
            DistKind::Exponential => Ok(s / (self.mu + s)),
            _ => self.expect(|x| -(-s * x).exp_m1()).map(|v| v.clamp(0.0, 1.0)),
        }
    }
}

impl rand::distr::Distribution<f64> for ServiceDistribution {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        ServiceDistribution::sample(self, rng)
    }
}

impl fmt::Display for ServiceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mu={}", self.label(), self.mu)
    }
}

/// Clamp into `[MIN_POSITIVE, MAX]`: draws that under- or overflow saturate.
fn saturate(x: f64) -> f64 {
    if x.is_nan() {
        f64::MIN_POSITIVE
    } else {
        x.clamp(f64::MIN_POSITIVE, f64::MAX)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal survival function `P(N > z)`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// Renewal generation process reusing a [`ServiceDistribution`] as the
/// inter-generation law; `lambda` is the law's rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArrivalProcess {
    law: ServiceDistribution,
}

impl ArrivalProcess {
    pub fn new(law: ServiceDistribution) -> Self {
        Self { law }
    }

    /// Poisson generation: exponential inter-generation times with rate `lambda`.
    pub fn poisson(lambda: f64) -> Result<Self> {
        ServiceDistribution::exponential(lambda)
            .map(Self::new)
            .map_err(rename_rate)
    }

    /// Periodic generation every `1/lambda`.
    pub fn periodic(lambda: f64) -> Result<Self> {
        ServiceDistribution::deterministic(lambda)
            .map(Self::new)
            .map_err(rename_rate)
    }

    pub fn law(&self) -> &ServiceDistribution {
        &self.law
    }

    pub fn lambda(&self) -> f64 {
        self.law.mu()
    }

    pub fn mean_interval(&self) -> f64 {
        self.law.mean()
    }

    pub fn is_poisson(&self) -> bool {
        self.law.kind() == DistKind::Exponential
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.law.sample(rng)
    }
}

fn rename_rate(e: Error) -> Error {
    match e {
        Error::InvalidParameter { field, reason } if field == "mu" => Error::InvalidParameter {
            field: "lambda".into(),
            reason,
        },
        other => other,
    }
}

/// A parametric family at fixed rate, with its shape grid ordered toward the
/// heavy-tail limit (alpha and kappa decreasing, sigma increasing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistFamily {
    kind: DistKind,
    mu: f64,
    grid: Vec<f64>,
}

impl DistFamily {
    pub fn new(kind: DistKind, mu: f64, grid: Vec<f64>) -> Result<Self> {
        check_rate(mu)?;
        if !kind.has_shape() {
            if !grid.is_empty() {
                return Err(Error::invalid(
                    "grid",
                    format!("{kind} has no shape parameter to sweep"),
                ));
            }
            return Ok(Self { kind, mu, grid });
        }
        if grid.is_empty() {
            return Err(Error::invalid(
                "grid",
                format!("{kind} family needs a nonempty shape grid"),
            ));
        }
        for (i, &p) in grid.iter().enumerate() {
            ServiceDistribution::new(kind, mu, Some(p)).map_err(|e| match e {
                Error::InvalidParameter { reason, .. } => Error::invalid(format!("grid[{i}]"), reason),
                other => other,
            })?;
        }
        for (i, w) in grid.windows(2).enumerate() {
            if !kind.is_heavier(w[0], w[1]) {
                return Err(Error::invalid(
                    format!("grid[{}]", i + 1),
                    format!(
                        "grid must be strictly ordered toward the heavy tail ({} {})",
                        kind.shape_name().unwrap_or("shape"),
                        if kind == DistKind::LogNormal {
                            "increasing"
                        } else {
                            "decreasing"
                        }
                    ),
                ));
            }
        }
        Ok(Self { kind, mu, grid })
    }

    /// Single-member family (deterministic or exponential, or one fixed shape).
    pub fn single(dist: ServiceDistribution) -> Self {
        Self {
            kind: dist.kind(),
            mu: dist.mu(),
            grid: dist.shape().into_iter().collect(),
        }
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Members in grid order (one member for shapeless kinds).
    pub fn members(&self) -> Vec<ServiceDistribution> {
        if self.kind.has_shape() {
            self.grid
                .iter()
                .map(|&p| ServiceDistribution::new(self.kind, self.mu, Some(p)).expect("validated grid"))
                .collect()
        } else {
            vec![ServiceDistribution::new(self.kind, self.mu, None).expect("validated rate")]
        }
    }
}
