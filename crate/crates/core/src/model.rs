//! Diffusion models, the Lamperti transform and interval bounds.
//!
//! A model describes `dX = mu(X) dt + sigma(X) dB` in its original
//! coordinates together with the unit-diffusion process `Y = S(X)` obtained
//! through the Lamperti map `S(x) = ∫ du / sigma(u)`. The samplers only ever
//! see the transformed drift `mu0`, from which
//!
//! ```text
//! beta(y)  = exp(∫ mu0)
//! gamma(y) = (mu0(y)^2 + mu0'(y)) / 2
//! ```
//!
//! are derived. Only ratios of `beta` enter the algorithms, so
//! [`Diffusion::mu0_antiderivative`] may use any base point.
//!
//! The smoothness the theory asks for (`mu` in C², `sigma` in C³) is assumed,
//! not checked: only `mu0`, `mu0'` and `∫ mu0` are ever evaluated.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{ensure, Error, Result};
use crate::oracle::quadrature::adaptive_simpson;

/// Grid resolution for numerically computed interval extrema.
pub const BOUND_GRID_POINTS: usize = 10_000;
/// Relative safety pad added to grid extrema.
pub const BOUND_PAD: f64 = 1e-6;
/// Absolute tolerance of quadrature-backed antiderivatives.
pub const ANTIDERIVATIVE_TOL: f64 = 1e-12;

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub const REAL_LINE: Domain = Domain {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    /// `[l, u]` lies inside the open domain.
    pub fn contains_closed(&self, l: f64, u: f64) -> bool {
        self.contains(l) && self.contains(u)
    }
}

/// Sup/inf constants of `beta` and `gamma` over an interval `[l, u]`.
///
/// Any valid upper bound for `beta` and any valid lower/upper bounds for
/// `gamma` keep the rectangle sampler exact; looser bounds only cost time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalBounds {
    /// `sup beta`.
    pub beta_sup: f64,
    /// `ln sup beta`, used by the samplers to avoid overflow.
    pub log_beta_sup: f64,
    /// `inf gamma ∧ 0`.
    pub gamma_inf: f64,
    /// `sup gamma`.
    pub gamma_sup: f64,
    /// `gamma_sup - gamma_inf`, the rate of the thinning clock.
    pub gamma_range: f64,
}

impl IntervalBounds {
    /// Builds the bounds from extrema of `ln beta` and `gamma`.
    pub fn from_extrema(log_beta_max: f64, gamma_min: f64, gamma_max: f64) -> Self {
        let gamma_inf = gamma_min.min(0.0);
        let gamma_sup = gamma_max.max(gamma_inf);
        Self {
            beta_sup: log_beta_max.exp(),
            log_beta_sup: log_beta_max,
            gamma_inf,
            gamma_sup,
            gamma_range: gamma_sup - gamma_inf,
        }
    }

    /// Loosens the bounds: `beta_sup` is multiplied by `factor` and the
    /// thinning rate is multiplied by `factor` with `gamma_inf` unchanged.
    pub fn inflated(&self, factor: f64) -> Self {
        assert!(factor >= 1.0, "inflation factor must be at least 1");
        let log_beta_sup = self.log_beta_sup + factor.ln();
        let gamma_sup = self.gamma_inf + factor * self.gamma_range;
        Self {
            beta_sup: log_beta_sup.exp(),
            log_beta_sup,
            gamma_inf: self.gamma_inf,
            gamma_sup,
            gamma_range: gamma_sup - self.gamma_inf,
        }
    }

    fn validate(self) -> Result<Self> {
        ensure!(
            self.log_beta_sup.is_finite() && self.gamma_inf.is_finite() && self.gamma_sup.is_finite(),
            Domain,
            "non-finite interval bounds {self:?}"
        );
        Ok(self)
    }
}

/// A one-dimensional time-homogeneous diffusion and its Lamperti transform.
///
/// Methods prefixed `mu0`/`gamma`/`mu0_antiderivative` act on transformed
/// coordinates; `drift`, `diffusion` and `domain` on original ones.
pub trait Diffusion: Send + Sync {
    fn name(&self) -> String;

    fn drift(&self, x: f64) -> f64;

    fn diffusion(&self, x: f64) -> f64;

    /// Open interval of original coordinates on which the model is defined.
    fn domain(&self) -> Domain;

    fn lamperti(&self, x: f64) -> f64;

    fn lamperti_inverse(&self, y: f64) -> f64;

    fn mu0(&self, y: f64) -> f64;

    fn mu0_prime(&self, y: f64) -> f64;

    /// An antiderivative of `mu0`; `beta = exp` of it.
    fn mu0_antiderivative(&self, y: f64) -> f64;

    fn gamma(&self, y: f64) -> f64 {
        let m = self.mu0(y);
        0.5 * (m * m + self.mu0_prime(y))
    }

    /// Domain in transformed coordinates.
    fn transformed_domain(&self) -> Domain {
        let d = self.domain();
        Domain {
            lo: if d.lo.is_finite() { self.lamperti(d.lo) } else { d.lo },
            hi: if d.hi.is_finite() { self.lamperti(d.hi) } else { d.hi },
        }
    }

    /// Bounds on `[l, u]` in transformed coordinates. The default scans a
    /// grid and pads the extrema.
    fn bounds(&self, l: f64, u: f64) -> Result<IntervalBounds> {
        grid_bounds(self, l, u)
    }

    /// `ln s'(x)` of the scale function in original coordinates, when known
    /// in closed form (any additive constant).
    fn original_log_scale_density(&self, _x: f64) -> Option<f64> {
        None
    }
}

/// Bounds from a [`BOUND_GRID_POINTS`] grid scan, padded by
/// `BOUND_PAD * (1 + |value|)`.
pub fn grid_bounds<M: Diffusion + ?Sized>(model: &M, l: f64, u: f64) -> Result<IntervalBounds> {
    let mut log_beta_max = f64::NEG_INFINITY;
    let mut gamma_min = f64::INFINITY;
    let mut gamma_max = f64::NEG_INFINITY;
    let n = BOUND_GRID_POINTS;
    let h = (u - l) / n as f64;
    for i in 0..=n {
        let y = if i == n { u } else { l + h * i as f64 };
        let lb = model.mu0_antiderivative(y);
        let g = model.gamma(y);
        if !lb.is_finite() || !g.is_finite() {
            return Err(Error::Domain(format!("beta or gamma not finite at {y}")));
        }
        log_beta_max = log_beta_max.max(lb);
        gamma_min = gamma_min.min(g);
        gamma_max = gamma_max.max(g);
    }
    let pad = |v: f64| BOUND_PAD * (1.0 + v.abs());
    IntervalBounds::from_extrema(
        log_beta_max + pad(log_beta_max),
        gamma_min - pad(gamma_min),
        gamma_max + pad(gamma_max),
    )
    .validate()
}

/// `beta(y) = exp(∫ mu0)`.
pub fn beta<M: Diffusion + ?Sized>(model: &M, y: f64) -> Result<f64> {
    check_transformed(model, y)?;
    let v = model.mu0_antiderivative(y).exp();
    ensure!(v.is_finite() && v > 0.0, Domain, "beta({y}) = {v} is not a positive finite number");
    Ok(v)
}

/// `gamma(y) = (mu0(y)^2 + mu0'(y)) / 2`.
pub fn gamma<M: Diffusion + ?Sized>(model: &M, y: f64) -> Result<f64> {
    check_transformed(model, y)?;
    let v = model.gamma(y);
    ensure!(v.is_finite(), Domain, "gamma({y}) = {v} is not finite");
    Ok(v)
}

/// Interval bounds on `[l, u]` (transformed coordinates).
pub fn compute_bounds<M: Diffusion + ?Sized>(model: &M, l: f64, u: f64) -> Result<IntervalBounds> {
    ensure!(l < u, Precondition, "empty interval [{l}, {u}]");
    ensure!(
        model.transformed_domain().contains_closed(l, u),
        Domain,
        "[{l}, {u}] is not inside the domain of {}",
        model.name()
    );
    model.bounds(l, u)?.validate()
}

pub fn lamperti_forward<M: Diffusion + ?Sized>(model: &M, x: f64) -> Result<f64> {
    ensure!(model.domain().contains(x), Domain, "{x} outside the domain of {}", model.name());
    Ok(model.lamperti(x))
}

pub fn lamperti_inverse<M: Diffusion + ?Sized>(model: &M, y: f64) -> Result<f64> {
    check_transformed(model, y)?;
    Ok(model.lamperti_inverse(y))
}

fn check_transformed<M: Diffusion + ?Sized>(model: &M, y: f64) -> Result<()> {
    ensure!(
        model.transformed_domain().contains(y),
        Domain,
        "{y} outside the transformed domain of {}",
        model.name()
    );
    Ok(())
}

/// Standard Brownian motion: `mu0 ≡ 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZeroDrift;

impl Diffusion for ZeroDrift {
    fn name(&self) -> String {
        "zero".into()
    }
    fn drift(&self, _x: f64) -> f64 {
        0.0
    }
    fn diffusion(&self, _x: f64) -> f64 {
        1.0
    }
    fn domain(&self) -> Domain {
        Domain::REAL_LINE
    }
    fn lamperti(&self, x: f64) -> f64 {
        x
    }
    fn lamperti_inverse(&self, y: f64) -> f64 {
        y
    }
    fn mu0(&self, _y: f64) -> f64 {
        0.0
    }
    fn mu0_prime(&self, _y: f64) -> f64 {
        0.0
    }
    fn mu0_antiderivative(&self, _y: f64) -> f64 {
        0.0
    }
    fn bounds(&self, _l: f64, _u: f64) -> Result<IntervalBounds> {
        Ok(IntervalBounds::from_extrema(0.0, 0.0, 0.0))
    }
    fn original_log_scale_density(&self, _x: f64) -> Option<f64> {
        Some(0.0)
    }
}

/// Unit diffusion with drift `2 + sin(x)`. `gamma ≥ 0` everywhere, so the
/// rectangle sampler may run with an infinite horizon.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Sinusoidal;

impl Diffusion for Sinusoidal {
    fn name(&self) -> String {
        "sin".into()
    }
    fn drift(&self, x: f64) -> f64 {
        2.0 + x.sin()
    }
    fn diffusion(&self, _x: f64) -> f64 {
        1.0
    }
    fn domain(&self) -> Domain {
        Domain::REAL_LINE
    }
    fn lamperti(&self, x: f64) -> f64 {
        x
    }
    fn lamperti_inverse(&self, y: f64) -> f64 {
        y
    }
    fn mu0(&self, y: f64) -> f64 {
        2.0 + y.sin()
    }
    fn mu0_prime(&self, y: f64) -> f64 {
        y.cos()
    }
    fn mu0_antiderivative(&self, y: f64) -> f64 {
        2.0 * y - y.cos() + 1.0
    }
    fn original_log_scale_density(&self, x: f64) -> Option<f64> {
        Some(-2.0 * self.mu0_antiderivative(x))
    }
}

/// Ornstein-Uhlenbeck process `dX = -lambda X dt + dB`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrnsteinUhlenbeck {
    lambda: f64,
}

impl OrnsteinUhlenbeck {
    pub fn new(lambda: f64) -> Result<Self> {
        ensure!(
            lambda.is_finite() && lambda > 0.0,
            Configuration,
            "OU rate lambda must be positive, got {lambda}"
        );
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Diffusion for OrnsteinUhlenbeck {
    fn name(&self) -> String {
        format!("ou(lambda={})", self.lambda)
    }
    fn drift(&self, x: f64) -> f64 {
        -self.lambda * x
    }
    fn diffusion(&self, _x: f64) -> f64 {
        1.0
    }
    fn domain(&self) -> Domain {
        Domain::REAL_LINE
    }
    fn lamperti(&self, x: f64) -> f64 {
        x
    }
    fn lamperti_inverse(&self, y: f64) -> f64 {
        y
    }
    fn mu0(&self, y: f64) -> f64 {
        -self.lambda * y
    }
    fn mu0_prime(&self, _y: f64) -> f64 {
        -self.lambda
    }
    fn mu0_antiderivative(&self, y: f64) -> f64 {
        -0.5 * self.lambda * y * y
    }
    /// Both `ln beta` and `gamma` are quadratics centred at the origin.
    fn bounds(&self, l: f64, u: f64) -> Result<IntervalBounds> {
        let closest = 0f64.clamp(l, u);
        let farthest = if l.abs() > u.abs() { l } else { u };
        Ok(IntervalBounds::from_extrema(
            self.mu0_antiderivative(closest),
            self.gamma(closest),
            self.gamma(farthest),
        ))
    }
    fn original_log_scale_density(&self, x: f64) -> Option<f64> {
        Some(self.lambda * x * x)
    }
}

/// Cox-Ingersoll-Ross process `dX = k(theta - X) dt + sigma sqrt(X) dB`.
///
/// The Lamperti map is `S(x) = 2 sqrt(x) / sigma`; the transformed drift is
/// `rho / y - k y / 2` with `rho = (4 k theta - sigma^2) / (2 sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cir {
    k: f64,
    theta: f64,
    sigma: f64,
    rho: f64,
}

impl Cir {
    /// Rejects parameters with `rho <= 0`, for which the boundary at zero
    /// becomes attainable.
    pub fn new(k: f64, theta: f64, sigma: f64) -> Result<Self> {
        ensure!(
            k.is_finite() && theta.is_finite() && sigma.is_finite(),
            Configuration,
            "CIR parameters must be finite"
        );
        ensure!(sigma > 0.0, Configuration, "CIR sigma must be positive, got {sigma}");
        ensure!(k > 0.0, Configuration, "CIR k must be positive, got {k}");
        let rho = (4.0 * k * theta - sigma * sigma) / (2.0 * sigma * sigma);
        ensure!(rho > 0.0, Configuration, "CIR requires rho > 0, got rho = {rho}");
        Ok(Self { k, theta, sigma, rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn params(&self) -> (f64, f64, f64) {
        (self.k, self.theta, self.sigma)
    }
}

impl Diffusion for Cir {
    fn name(&self) -> String {
        format!("cir(k={}, theta={}, sigma={})", self.k, self.theta, self.sigma)
    }
    fn drift(&self, x: f64) -> f64 {
        self.k * (self.theta - x)
    }
    fn diffusion(&self, x: f64) -> f64 {
        self.sigma * x.sqrt()
    }
    fn domain(&self) -> Domain {
        Domain {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }
    fn lamperti(&self, x: f64) -> f64 {
        2.0 * x.sqrt() / self.sigma
    }
    fn lamperti_inverse(&self, y: f64) -> f64 {
        let r = 0.5 * self.sigma * y;
        r * r
    }
    fn mu0(&self, y: f64) -> f64 {
        self.rho / y - 0.5 * self.k * y
    }
    fn mu0_prime(&self, y: f64) -> f64 {
        -self.rho / (y * y) - 0.5 * self.k
    }
    fn mu0_antiderivative(&self, y: f64) -> f64 {
        self.rho * y.ln() - 0.25 * self.k * y * y
    }
    /// `ln beta` is concave with its peak at `sqrt(2 rho / k)`; `gamma` is
    /// `(A / s + B s - rho k - k / 2) / 2` in `s = y^2`, convex when `A > 0`
    /// and increasing otherwise.
    fn bounds(&self, l: f64, u: f64) -> Result<IntervalBounds> {
        let peak = (2.0 * self.rho / self.k).sqrt().clamp(l, u);
        let log_beta_max = self.mu0_antiderivative(peak);

        let a = self.rho * self.rho - self.rho;
        let b = 0.25 * self.k * self.k;
        let (gl, gu) = (self.gamma(l), self.gamma(u));
        let mut gamma_min = gl.min(gu);
        if a > 0.0 {
            let y_star = (a / b).sqrt().sqrt();
            if y_star > l && y_star < u {
                gamma_min = gamma_min.min(self.gamma(y_star));
            }
        }
        Ok(IntervalBounds::from_extrema(log_beta_max, gamma_min, gl.max(gu)))
    }
    fn original_log_scale_density(&self, x: f64) -> Option<f64> {
        let s2 = self.sigma * self.sigma;
        Some(-2.0 * self.k * self.theta / s2 * x.ln() + 2.0 * self.k / s2 * x)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied model.
///
/// Without an explicit antiderivative, `∫ mu0` is evaluated by adaptive
/// quadrature from a reference point to absolute tolerance
/// [`ANTIDERIVATIVE_TOL`].
#[derive(Clone)]
pub struct CustomModel {
    name: String,
    drift: ScalarFn,
    diffusion: ScalarFn,
    mu0: ScalarFn,
    mu0_prime: ScalarFn,
    antiderivative: Option<ScalarFn>,
    lamperti: ScalarFn,
    lamperti_inverse: ScalarFn,
    domain: Domain,
    reference: f64,
}

impl fmt::Debug for CustomModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomModel")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl CustomModel {
    /// A unit-diffusion model `dX = mu0(X) dt + dB` on the real line.
    pub fn unit_diffusion<F, G>(name: impl Into<String>, mu0: F, mu0_prime: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let mu0: ScalarFn = Arc::new(mu0);
        Self {
            name: name.into(),
            drift: mu0.clone(),
            diffusion: Arc::new(|_| 1.0),
            mu0,
            mu0_prime: Arc::new(mu0_prime),
            antiderivative: None,
            lamperti: Arc::new(|x| x),
            lamperti_inverse: Arc::new(|y| y),
            domain: Domain::REAL_LINE,
            reference: 0.0,
        }
    }

    pub fn with_antiderivative<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.antiderivative = Some(Arc::new(f));
        self
    }

    /// Installs a non-unit diffusion coefficient together with its Lamperti
    /// map, the inverse map and the transformed drift.
    pub fn with_lamperti<A, B, C, D, E, F>(
        mut self,
        drift: A,
        diffusion: B,
        lamperti: C,
        lamperti_inverse: D,
        mu0: E,
        mu0_prime: F,
    ) -> Self
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64) -> f64 + Send + Sync + 'static,
        C: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        E: Fn(f64) -> f64 + Send + Sync + 'static,
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.drift = Arc::new(drift);
        self.diffusion = Arc::new(diffusion);
        self.lamperti = Arc::new(lamperti);
        self.lamperti_inverse = Arc::new(lamperti_inverse);
        self.mu0 = Arc::new(mu0);
        self.mu0_prime = Arc::new(mu0_prime);
        self
    }

    /// Restricts the domain; `reference` is the base point (transformed
    /// coordinates) of the quadrature antiderivative.
    pub fn with_domain(mut self, domain: Domain, reference: f64) -> Self {
        self.domain = domain;
        self.reference = reference;
        self
    }

    pub fn antiderivative_tolerance(&self) -> Option<f64> {
        self.antiderivative.is_none().then_some(ANTIDERIVATIVE_TOL)
    }
}

impl Diffusion for CustomModel {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn drift(&self, x: f64) -> f64 {
        (self.drift)(x)
    }
    fn diffusion(&self, x: f64) -> f64 {
        (self.diffusion)(x)
    }
    fn domain(&self) -> Domain {
        self.domain
    }
    fn lamperti(&self, x: f64) -> f64 {
        (self.lamperti)(x)
    }
    fn lamperti_inverse(&self, y: f64) -> f64 {
        (self.lamperti_inverse)(y)
    }
    fn mu0(&self, y: f64) -> f64 {
        (self.mu0)(y)
    }
    fn mu0_prime(&self, y: f64) -> f64 {
        (self.mu0_prime)(y)
    }
    fn mu0_antiderivative(&self, y: f64) -> f64 {
        match &self.antiderivative {
            Some(f) => f(y),
            None => adaptive_simpson(|z| (self.mu0)(z), self.reference, y, ANTIDERIVATIVE_TOL)
                .map(|r| r.value)
                .unwrap_or(f64::NAN),
        }
    }
}

/// The built-in models, selectable by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinModel {
    Zero(ZeroDrift),
    Sin(Sinusoidal),
    Ou(OrnsteinUhlenbeck),
    Cir(Cir),
}

impl BuiltinModel {
    /// `zero`, `sin` (no parameters), `ou` (`lambda`), `cir` (`k`, `theta`,
    /// `sigma`).
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |key: &str| -> Result<f64> {
            params
                .get(key)
                .copied()
                .ok_or_else(|| Error::Configuration(format!("model `{name}` needs parameter `{key}`")))
        };
        let allow = |keys: &[&str]| -> Result<()> {
            match params.keys().find(|k| !keys.contains(&k.as_str())) {
                Some(k) => Err(Error::Configuration(format!(
                    "unknown parameter `{k}` for model `{name}`"
                ))),
                None => Ok(()),
            }
        };
        match name {
            "zero" => {
                allow(&[])?;
                Ok(Self::Zero(ZeroDrift))
            }
            "sin" => {
                allow(&[])?;
                Ok(Self::Sin(Sinusoidal))
            }
            "ou" => {
                allow(&["lambda"])?;
                Ok(Self::Ou(OrnsteinUhlenbeck::new(get("lambda")?)?))
            }
            "cir" => {
                allow(&["k", "theta", "sigma"])?;
                Ok(Self::Cir(Cir::new(get("k")?, get("theta")?, get("sigma")?)?))
            }
            other => Err(Error::Configuration(format!(
                "unknown model `{other}` (expected zero, sin, ou or cir)"
            ))),
        }
    }

    fn inner(&self) -> &dyn Diffusion {
        match self {
            Self::Zero(m) => m,
            Self::Sin(m) => m,
            Self::Ou(m) => m,
            Self::Cir(m) => m,
        }
    }
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*) -> $ret:ty;)*) => {
        $(fn $name(&self, $($arg: $ty),*) -> $ret {
            match self {
                Self::Zero(m) => m.$name($($arg),*),
                Self::Sin(m) => m.$name($($arg),*),
                Self::Ou(m) => m.$name($($arg),*),
                Self::Cir(m) => m.$name($($arg),*),
            }
        })*
    };
}

impl Diffusion for BuiltinModel {
    delegate! {
        drift(x: f64) -> f64;
        diffusion(x: f64) -> f64;
        domain() -> Domain;
        lamperti(x: f64) -> f64;
        lamperti_inverse(y: f64) -> f64;
        mu0(y: f64) -> f64;
        mu0_prime(y: f64) -> f64;
        mu0_antiderivative(y: f64) -> f64;
        gamma(y: f64) -> f64;
        bounds(l: f64, u: f64) -> Result<IntervalBounds>;
        original_log_scale_density(x: f64) -> Option<f64>;
    }

    fn name(&self) -> String {
        self.inner().name()
    }
}

/// Wraps a model and reports bounds loosened by a constant factor. The law of
/// every sampler is unchanged; only acceptance rates drop.
#[derive(Debug, Clone)]
pub struct InflatedBounds<M> {
    pub model: M,
    pub factor: f64,
}

/// Wraps a model and shifts `gamma` by a constant. This breaks exactness on
/// purpose and exists to check that validation catches a wrong `gamma`.
#[derive(Debug, Clone)]
pub struct ShiftedGamma<M> {
    pub model: M,
    pub shift: f64,
}

macro_rules! forward_all_but_bounds {
    () => {
        fn name(&self) -> String {
            self.model.name()
        }
        fn drift(&self, x: f64) -> f64 {
            self.model.drift(x)
        }
        fn diffusion(&self, x: f64) -> f64 {
            self.model.diffusion(x)
        }
        fn domain(&self) -> Domain {
            self.model.domain()
        }
        fn lamperti(&self, x: f64) -> f64 {
            self.model.lamperti(x)
        }
        fn lamperti_inverse(&self, y: f64) -> f64 {
            self.model.lamperti_inverse(y)
        }
        fn mu0(&self, y: f64) -> f64 {
            self.model.mu0(y)
        }
        fn mu0_prime(&self, y: f64) -> f64 {
            self.model.mu0_prime(y)
        }
        fn mu0_antiderivative(&self, y: f64) -> f64 {
            self.model.mu0_antiderivative(y)
        }
        fn original_log_scale_density(&self, x: f64) -> Option<f64> {
            self.model.original_log_scale_density(x)
        }
    };
}

impl<M: Diffusion> Diffusion for InflatedBounds<M> {
    forward_all_but_bounds!();

    fn gamma(&self, y: f64) -> f64 {
        self.model.gamma(y)
    }

    fn bounds(&self, l: f64, u: f64) -> Result<IntervalBounds> {
        Ok(self.model.bounds(l, u)?.inflated(self.factor))
    }
}

impl<M: Diffusion> Diffusion for ShiftedGamma<M> {
    forward_all_but_bounds!();

    fn gamma(&self, y: f64) -> f64 {
        self.model.gamma(y) + self.shift
    }

    fn bounds(&self, l: f64, u: f64) -> Result<IntervalBounds> {
        let b = self.model.bounds(l, u)?;
        // gamma_inf is either the true lower bound or 0 <= inf gamma
        let lower = b.gamma_inf + self.shift;
        Ok(IntervalBounds::from_extrema(b.log_beta_sup, lower, b.gamma_sup + self.shift))
    }
}
