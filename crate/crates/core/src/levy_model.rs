//! Parametric spectrally negative Lévy processes with Erlang-mixture jumps.
//!
//! The process is `X_t = c t + σ B_t − Σ jumps`, where downward jumps arrive
//! as independent compound Poisson streams, one per component, with
//! Erlang-distributed sizes. All jump laws have finite mean, so E[X_1] is
//! always finite. The Laplace exponent
//!
//! ```text
//! ψ(s) = c s + ½ σ² s² + Σ_i λ_i ( (μ_i / (μ_i + s))^{k_i} − 1 )
//! ```
//!
//! is rational in `s`, which is what makes downstream scale functions exact
//! mixtures of exponential monomials.

use crate::error::{Error, Result};

/// One compound-Poisson jump stream with Erlang(shape, jump_rate) sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpComponent {
    /// Arrival intensity λ (jumps per unit time).
    pub rate: f64,
    /// Erlang shape parameter k ≥ 1.
    pub shape: u32,
    /// Erlang rate μ; mean jump size is k/μ.
    pub jump_rate: f64,
}

impl JumpComponent {
    pub fn new(rate: f64, shape: u32, jump_rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::domain(format!("jump rate must be > 0, got {rate}")));
        }
        if shape == 0 {
            return Err(Error::domain("Erlang shape must be >= 1"));
        }
        if !(jump_rate > 0.0 && jump_rate.is_finite()) {
            return Err(Error::domain(format!(
                "Erlang rate must be > 0, got {jump_rate}"
            )));
        }
        Ok(JumpComponent { rate, shape, jump_rate })
    }

    /// Mean jump size k/μ.
    pub fn mean_jump(&self) -> f64 {
        f64::from(self.shape) / self.jump_rate
    }
}

/// Path-variation classification of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariationClass {
    BoundedVariation,
    UnboundedVariation,
}

/// A spectrally negative Lévy process given by its triplet
/// (drift, volatility, Erlang-mixture jump measure).
#[derive(Debug, Clone, PartialEq)]
pub struct LevyModel {
    drift: f64,
    volatility: f64,
    jump_components: Vec<JumpComponent>,
}

impl LevyModel {
    /// Build a model from the literal triplet. The drift is the linear
    /// coefficient of ψ; the finite-activity jump part needs no
    /// small-jump compensation.
    ///
    /// When `volatility == 0` the drift must be strictly positive,
    /// otherwise the paths would be non-increasing and the process would
    /// not be a spectrally negative Lévy process.
    pub fn new(drift: f64, volatility: f64, jump_components: Vec<JumpComponent>) -> Result<Self> {
        if !(volatility >= 0.0 && volatility.is_finite()) {
            return Err(Error::domain(format!(
                "volatility must be >= 0, got {volatility}"
            )));
        }
        if !drift.is_finite() {
            return Err(Error::domain("drift must be finite"));
        }
        if volatility == 0.0 && drift <= 0.0 {
            return Err(Error::domain(
                "with zero volatility the drift must be > 0 for the paths to be non-monotone",
            ));
        }
        Ok(LevyModel { drift, volatility, jump_components })
    }

    /// Single Erlang jump stream with the premium-loading drift convention
    /// `c = (1 + loading) · shape · rate / jump_rate`, i.e. premiums exceed
    /// the expected claim outflow by the loading factor.
    pub fn erlang_with_loading(
        rate: f64,
        jump_rate: f64,
        shape: u32,
        loading: f64,
        volatility: f64,
    ) -> Result<Self> {
        let comp = JumpComponent::new(rate, shape, jump_rate)?;
        let drift = (1.0 + loading) * comp.mean_jump() * rate;
        LevyModel::new(drift, volatility, vec![comp])
    }

    /// Drift plus Brownian component only, no jumps.
    pub fn brownian(drift: f64, volatility: f64) -> Result<Self> {
        LevyModel::new(drift, volatility, Vec::new())
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn volatility(&self) -> f64 {
        self.volatility
    }

    pub fn jump_components(&self) -> &[JumpComponent] {
        &self.jump_components
    }

    /// Total jump arrival intensity Σ λ_i.
    pub fn total_jump_rate(&self) -> f64 {
        self.jump_components.iter().map(|c| c.rate).sum()
    }

    /// Laplace exponent ψ(s), s ≥ 0.
    pub fn laplace_exponent(&self, s: f64) -> f64 {
        assert!(s >= 0.0, "laplace_exponent requires s >= 0");
        let mut psi = self.drift * s + 0.5 * self.volatility * self.volatility * s * s;
        for c in &self.jump_components {
            psi += c.rate * ((c.jump_rate / (c.jump_rate + s)).powi(c.shape as i32) - 1.0);
        }
        psi
    }

    /// ψ′(s); at s = 0 this is E[X_1].
    pub fn laplace_exponent_derivative(&self, s: f64) -> f64 {
        assert!(s >= 0.0, "laplace_exponent_derivative requires s >= 0");
        let mut d = self.drift + self.volatility * self.volatility * s;
        for c in &self.jump_components {
            let k = f64::from(c.shape);
            d -= c.rate * k * c.jump_rate.powi(c.shape as i32)
                / (c.jump_rate + s).powi(c.shape as i32 + 1);
        }
        d
    }

    /// E[X_1] = ψ′(0).
    pub fn mean(&self) -> f64 {
        self.laplace_exponent_derivative(0.0)
    }

    /// Right-inverse Φ(q) = sup{s ≥ 0 : ψ(s) = q}, q > 0, located by
    /// doubling to bracket the upward crossing of the convex ψ, then
    /// bisecting to relative tolerance 1e-12.
    pub fn phi_inverse(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::domain(format!("phi_inverse requires q > 0, got {q}")));
        }
        const REL_TOL: f64 = 1e-12;
        const MAX_ITER: usize = 200;

        let mut lo = 0.0;
        let mut hi = 1e-8;
        let mut iter = 0;
        while self.laplace_exponent(hi) <= q {
            lo = hi;
            hi *= 2.0;
            iter += 1;
            if iter > MAX_ITER {
                return Err(Error::NonConvergence(
                    "phi_inverse bracket expansion exceeded its iteration cap".into(),
                ));
            }
        }
        // ψ(lo) <= q < ψ(hi); since ψ(0) = 0 < q the crossing is unique
        // and upward.
        iter = 0;
        while hi - lo > REL_TOL * hi.max(1e-30) {
            let mid = 0.5 * (lo + hi);
            if self.laplace_exponent(mid) <= q {
                lo = mid;
            } else {
                hi = mid;
            }
            iter += 1;
            if iter > MAX_ITER {
                return Err(Error::NonConvergence(
                    "phi_inverse bisection exceeded its iteration cap".into(),
                ));
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Bounded variation iff there is no Gaussian part (the compound
    /// Poisson jumps always have finite activity).
    pub fn variation_class(&self) -> VariationClass {
        if self.volatility > 0.0 {
            VariationClass::UnboundedVariation
        } else {
            VariationClass::BoundedVariation
        }
    }
}
