//! q-scale functions of Erlang-mixture models by exact rational inversion.
//!
//! For the models in [`crate::levy_model`], ψ is rational, so
//! `1/(ψ(s) − q)` is a strictly proper rational function and the scale
//! function `W^{(q)}` — defined by its Laplace transform
//! `∫_0^∞ e^{-sx} W^{(q)}(x) dx = 1/(ψ(s) − q)` for `s > Φ(q)` — is a
//! finite mixture of exponential monomials `x^m e^{ρx}`. Clearing
//! denominators turns `ψ(s) = q` into a polynomial equation; its roots are
//! the poles, and partial-fraction residues give the mixture coefficients.
//!
//! `Z^{(q)}(x) = 1 + q ∫_0^x W^{(q)}`, and the antiderivatives
//! `W̄^{(q)}`, `Z̄^{(q)}` follow term by term in closed form, so every
//! evaluation here is exact up to the accuracy of the pole locations.

use crate::error::{Error, Result};
use crate::levy_model::LevyModel;
use crate::poly::{self, Poly};
use num_complex::Complex64;

/// One `coeff · x^power · e^{rho·x}` term.
#[derive(Debug, Clone, Copy)]
struct ExpTerm {
    coeff: Complex64,
    power: u32,
    rho: Complex64,
}

fn eval_terms(terms: &[ExpTerm], x: f64) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for t in terms {
        acc += t.coeff * x.powi(t.power as i32) * (t.rho * x).exp();
    }
    acc.re
}

#[cfg(test)]
fn eval_terms_complex(terms: &[ExpTerm], x: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for t in terms {
        acc += t.coeff * x.powi(t.power as i32) * (t.rho * x).exp();
    }
    acc
}

/// log of a positive term sum, evaluated as `shift·x + ln Σ c x^p e^{(ρ-shift)x}`
/// so that it stays finite far beyond the overflow range of the plain sum.
fn eval_terms_ln(terms: &[ExpTerm], x: f64, shift: f64) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for t in terms {
        let damped = t.rho - Complex64::new(shift, 0.0);
        acc += t.coeff * x.powi(t.power as i32) * (damped * x).exp();
    }
    shift * x + acc.re.ln()
}

/// Closed-form `∫_0^x` of a term list, again a term list (constants are
/// terms with `rho = 0`, `power = 0`).
fn antiderivative(terms: &[ExpTerm]) -> Vec<ExpTerm> {
    let mut out = Vec::new();
    for t in terms {
        if t.rho.norm() == 0.0 {
            // plain monomial: ∫_0^x y^p dy = x^{p+1}/(p+1)
            out.push(ExpTerm {
                coeff: t.coeff / f64::from(t.power + 1),
                power: t.power + 1,
                rho: t.rho,
            });
            continue;
        }
        // ∫_0^x y^p e^{ρy} dy
        //   = e^{ρx} Σ_{j=0}^p (-1)^j p!/(p-j)! x^{p-j} / ρ^{j+1}  -  (-1)^p p!/ρ^{p+1}
        let p = t.power;
        let mut falling = 1.0f64;
        let mut sign = 1.0f64;
        let mut rho_pow = t.rho;
        for j in 0..=p {
            if j > 0 {
                falling *= f64::from(p - j + 1);
                sign = -sign;
                rho_pow *= t.rho;
            }
            out.push(ExpTerm {
                coeff: t.coeff * sign * falling / rho_pow,
                power: p - j,
                rho: t.rho,
            });
        }
        // at j = p: sign = (-1)^p, falling = p!, rho_pow = ρ^{p+1}
        out.push(ExpTerm {
            coeff: -t.coeff * sign * falling / rho_pow,
            power: 0,
            rho: Complex64::new(0.0, 0.0),
        });
    }
    out
}

fn differentiate(terms: &[ExpTerm]) -> Vec<ExpTerm> {
    let mut out = Vec::new();
    for t in terms {
        if t.rho.norm() > 0.0 {
            out.push(ExpTerm { coeff: t.coeff * t.rho, ..*t });
        }
        if t.power > 0 {
            out.push(ExpTerm {
                coeff: t.coeff * f64::from(t.power),
                power: t.power - 1,
                rho: t.rho,
            });
        }
    }
    out
}

/// Per-(model, q) evaluator of `W^{(q)}`, `Z^{(q)}`, their antiderivatives
/// and derivatives. Immutable once built; share freely across threads.
#[derive(Debug, Clone)]
pub struct ScaleEvaluator {
    model: LevyModel,
    q: f64,
    phi_q: f64,
    w_terms: Vec<ExpTerm>,
    w_prime_terms: Vec<ExpTerm>,
    z_terms: Vec<ExpTerm>,
    z_bar_terms: Vec<ExpTerm>,
    /// number of poles of 1/(ψ - q), counted with multiplicity
    n_poles: usize,
}

/// Beyond this value of `Φ(q)·x`, evaluations switch to the log-scaled
/// form to dodge overflow of the dominant exponential.
const LOG_SWITCH: f64 = 600.0;

impl ScaleEvaluator {
    /// Clears denominators in `ψ(s) − q = 0`, finds all poles, extracts the
    /// partial-fraction residues of `1/(ψ(s) − q)` and validates the
    /// expansion against the rational function itself.
    pub fn new(model: &LevyModel, q: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::domain(format!("scale functions require q > 0, got {q}")));
        }
        let phi_q = model.phi_inverse(q)?;

        // denominator D(s) = Π (μ_i + s)^{k_i}
        let mut denom = Poly::one();
        for c in model.jump_components() {
            denom = denom.mul(&Poly::linear_power(c.jump_rate, c.shape as usize));
        }
        // P(s) = (½σ²s² + cs − q)·D(s) + Σ_i λ_i (μ_i^{k_i} Π_{j≠i}(μ_j+s)^{k_j} − D(s))
        let quad = Poly::new(vec![
            -q,
            model.drift(),
            0.5 * model.volatility() * model.volatility(),
        ]);
        let mut p = quad.mul(&denom);
        for (i, ci) in model.jump_components().iter().enumerate() {
            let mut rest = Poly::one();
            for (j, cj) in model.jump_components().iter().enumerate() {
                if i != j {
                    rest = rest.mul(&Poly::linear_power(cj.jump_rate, cj.shape as usize));
                }
            }
            let erlang_num = rest.scale(ci.jump_rate.powi(ci.shape as i32));
            p = p.add(&erlang_num.add(&denom.scale(-1.0)).scale(ci.rate));
        }

        let roots = poly::roots(&p, 1e-13, 400)?;
        let mut clusters = poly::cluster_roots(&roots, 1e-8);

        // Exactly one pole sits at Φ(q); snap it to the bisection value so
        // the dominant exponential is consistent with phi_q.
        let mut dominant: Option<usize> = None;
        for (idx, cl) in clusters.iter().enumerate() {
            if (cl.root - Complex64::new(phi_q, 0.0)).norm() <= 1e-6 * (1.0 + phi_q) {
                dominant = Some(idx);
            } else if cl.root.re >= phi_q {
                return Err(Error::RootFinding(format!(
                    "pole {} does not lie strictly left of Φ(q) = {phi_q}",
                    cl.root
                )));
            }
        }
        let dominant = dominant.ok_or_else(|| {
            Error::RootFinding(format!("no pole found at Φ(q) = {phi_q}"))
        })?;
        if clusters[dominant].multiplicity != 1 {
            return Err(Error::RootFinding(
                "pole at Φ(q) must be simple (ψ'(Φ(q)) > 0)".into(),
            ));
        }
        clusters[dominant].root = Complex64::new(phi_q, 0.0);

        let pf = poly::partial_fractions(&denom, &p, &clusters)?;

        // cross-check the expansion against D/P away from the poles
        for probe in [phi_q + 1.0, phi_q + 2.5] {
            let s = Complex64::new(probe, 0.0);
            let direct = denom.eval_complex(s) / p.eval_complex(s);
            let expanded = poly::eval_partial_fractions(&pf, s);
            if (direct - expanded).norm() > 1e-8 * direct.norm().max(1e-30) {
                return Err(Error::RootFinding(format!(
                    "partial-fraction residual {:.3e} at s = {probe}",
                    (direct - expanded).norm()
                )));
            }
        }

        // L^{-1}[ a/(s-ρ)^j ] = a x^{j-1} e^{ρx} / (j-1)!
        let mut w_terms = Vec::with_capacity(pf.len());
        for t in &pf {
            let fact: f64 = (1..t.order).map(|k| k as f64).product::<f64>().max(1.0);
            w_terms.push(ExpTerm {
                coeff: t.coefficient / fact,
                power: (t.order - 1) as u32,
                rho: t.pole,
            });
        }
        let w_prime_terms = differentiate(&w_terms);
        let mut z_terms = vec![ExpTerm {
            coeff: Complex64::new(1.0, 0.0),
            power: 0,
            rho: Complex64::new(0.0, 0.0),
        }];
        for t in antiderivative(&w_terms) {
            z_terms.push(ExpTerm { coeff: t.coeff * q, ..t });
        }
        let z_bar_terms = antiderivative(&z_terms);

        Ok(ScaleEvaluator {
            model: model.clone(),
            q,
            phi_q,
            n_poles: p.degree(),
            w_terms,
            w_prime_terms,
            z_terms,
            z_bar_terms,
        })
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Cached Φ(q).
    pub fn phi_q(&self) -> f64 {
        self.phi_q
    }

    /// Number of poles of 1/(ψ − q), with multiplicity.
    pub fn n_poles(&self) -> usize {
        self.n_poles
    }

    /// `W^{(q)}(x)`, zero for `x < 0`.
    pub fn w(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            eval_terms(&self.w_terms, x)
        }
    }

    /// `W̄^{(q)}(x) = ∫_0^x W^{(q)}`, zero for `x ≤ 0`.
    pub fn w_bar(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (self.z(x) - 1.0) / self.q
        }
    }

    /// `Z^{(q)}(x) = 1 + q W̄^{(q)}(x)` for `x ≥ 0`, one for `x < 0`.
    pub fn z(&self, x: f64) -> f64 {
        if x < 0.0 {
            1.0
        } else {
            eval_terms(&self.z_terms, x)
        }
    }

    /// `Z̄^{(q)}(x) = ∫_0^x Z^{(q)}` for `x ≥ 0`, equal to `x` for `x < 0`.
    pub fn z_bar(&self, x: f64) -> f64 {
        if x < 0.0 {
            x
        } else {
            eval_terms(&self.z_bar_terms, x)
        }
    }

    /// Right-derivative of `W^{(q)}` (two-sided away from 0).
    pub fn w_prime(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::domain("w_prime undefined for x < 0"));
        }
        Ok(eval_terms(&self.w_prime_terms, x))
    }

    /// `Z^{(q)′}(x) = q W^{(q)}(x)` for `x ≥ 0` (right-derivative at 0).
    pub fn z_prime(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::domain("z_prime undefined for x < 0"));
        }
        Ok(self.q * self.w(x))
    }

    /// `Z^{(q)′′}(x) = q W^{(q)′}(x)`.
    pub fn z_double_prime(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::domain("z_double_prime undefined for x < 0"));
        }
        Ok(self.q * eval_terms(&self.w_prime_terms, x))
    }

    /// `ln Z^{(q)}(x)`, overflow-safe for large `x`.
    pub fn ln_z(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else if self.phi_q * x < LOG_SWITCH {
            self.z(x).ln()
        } else {
            eval_terms_ln(&self.z_terms, x, self.phi_q)
        }
    }

    /// `ln W^{(q)}(x)` for `x > 0`, overflow-safe for large `x`.
    pub fn ln_w(&self, x: f64) -> f64 {
        if self.phi_q * x < LOG_SWITCH {
            self.w(x).ln()
        } else {
            eval_terms_ln(&self.w_terms, x, self.phi_q)
        }
    }

    /// Diagnostic gap `Z^{(q)}(x)/W^{(q)}(x) − q/Φ(q)`, which tends to zero
    /// as `x → ∞`.
    pub fn ratio_limit_gap(&self, x_large: f64) -> f64 {
        let ratio = if self.phi_q * x_large < LOG_SWITCH {
            self.z(x_large) / self.w(x_large)
        } else {
            (self.ln_z(x_large) - self.ln_w(x_large)).exp()
        };
        ratio - self.q / self.phi_q
    }

    /// Exponential lower bound
    /// `Z^{(q)}(x) ≥ q (Φ′(q)/Φ(q)) e^{(Φ(q)−δ)x}` valid for
    /// `x ≥ log 2 / δ` and `0 < δ < Φ(q)`, with `Φ′(q) = 1/ψ′(Φ(q))`.
    pub fn z_lower_bound(&self, x: f64, delta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta < self.phi_q) {
            return Err(Error::domain(format!(
                "need 0 < delta < Φ(q) = {}, got {delta}",
                self.phi_q
            )));
        }
        if x < std::f64::consts::LN_2 / delta {
            return Err(Error::domain(format!(
                "bound requires x >= log2/delta = {}",
                std::f64::consts::LN_2 / delta
            )));
        }
        let phi_prime = 1.0 / self.model.laplace_exponent_derivative(self.phi_q);
        Ok(self.q * phi_prime / self.phi_q * ((self.phi_q - delta) * x).exp())
    }

    #[cfg(test)]
    pub(crate) fn w_imag(&self, x: f64) -> f64 {
        eval_terms_complex(&self.w_terms, x).im.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::JumpComponent;
    use crate::quadrature::integrate;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn example_model() -> LevyModel {
        LevyModel::erlang_with_loading(1.0, 2.0, 2, 0.1, 1.0).unwrap()
    }

    fn brownian_sqrt2() -> LevyModel {
        LevyModel::brownian(0.0, std::f64::consts::SQRT_2).unwrap()
    }

    #[test]
    fn brownian_matches_laplace_table() {
        // 1/(s²−1) ↔ sinh(x); 1/(s²−4) ↔ sinh(2x)/2
        let ev = ScaleEvaluator::new(&brownian_sqrt2(), 1.0).unwrap();
        for i in 0..=100 {
            let x = 0.1 * i as f64;
            assert_relative_eq!(ev.w(x), x.sinh(), max_relative = 1e-11, epsilon = 1e-13);
            assert_relative_eq!(ev.z(x), x.cosh(), max_relative = 1e-11);
            assert_relative_eq!(ev.z_bar(x), x.sinh(), max_relative = 1e-11, epsilon = 1e-13);
        }
        let ev4 = ScaleEvaluator::new(&brownian_sqrt2(), 4.0).unwrap();
        assert_relative_eq!(ev4.w(1.0), (2.0f64).sinh() / 2.0, max_relative = 1e-11);
        // derivatives of sinh at 1
        assert_relative_eq!(ev.w_prime(1.0).unwrap(), 1.0f64.cosh(), max_relative = 1e-11);
        assert_relative_eq!(ev.z_prime(1.0).unwrap(), 1.0f64.sinh(), max_relative = 1e-11);
        assert_relative_eq!(
            ev.z_double_prime(1.0).unwrap(),
            1.0f64.cosh(),
            max_relative = 1e-11
        );
    }

    #[test]
    fn conventions_below_zero() {
        let ev = ScaleEvaluator::new(&example_model(), 0.1).unwrap();
        assert_eq!(ev.w(-1.0), 0.0);
        assert_eq!(ev.z(-2.0), 1.0);
        assert_eq!(ev.z_bar(-2.0), -2.0);
        assert_eq!(ev.z(0.0), 1.0);
        assert_eq!(ev.z_bar(0.0), 0.0);
        assert_eq!(ev.w_bar(0.0), 0.0);
        assert!(ev.w_prime(-0.5).is_err());
        assert!(ev.z_prime(-0.5).is_err());
    }

    #[test]
    fn example_model_has_four_poles_and_w0_zero() {
        let ev = ScaleEvaluator::new(&example_model(), 0.1).unwrap();
        assert_eq!(ev.n_poles(), 4);
        // unbounded variation ⇒ W(0) = 0 and continuity at 0
        assert_abs_diff_eq!(ev.w(0.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev.w(1e-9), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn laplace_transform_identity() {
        // ∫_0^L e^{-sx} W(x) dx = 1/(ψ(s)−q) at s = Φ(q) + {0.5, 1, 2}
        for (model, q) in [(example_model(), 0.1), (brownian_sqrt2(), 1.0)] {
            let ev = ScaleEvaluator::new(&model, q).unwrap();
            let phi = ev.phi_q();
            for ds in [0.5, 1.0, 2.0] {
                let s = phi + ds;
                // choose L so that the integrand tail is below 1e-12:
                // |W(x)| ≲ C e^{Φx} so e^{-sx}W(x) ≲ C e^{-ds·x}
                let l = (90.0 / ds).min(900.0);
                let numeric = integrate(|x| (-s * x).exp() * ev.w(x), 0.0, l, 1e-11, 1e-15)
                    .unwrap()
                    .value;
                let exact = 1.0 / (model.laplace_exponent(s) - q);
                assert_relative_eq!(numeric, exact, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn bounded_variation_atom_at_zero() {
        // finite-activity, no Gaussian part: W(0+) = 1/drift
        let model =
            LevyModel::new(1.5, 0.0, vec![JumpComponent::new(1.0, 2, 2.0).unwrap()]).unwrap();
        assert_eq!(model.variation_class(), VariationClass::BoundedVariation);
        let ev = ScaleEvaluator::new(&model, 0.2).unwrap();
        assert_relative_eq!(ev.w(0.0), 1.0 / 1.5, max_relative = 1e-9);
        // and the Laplace identity still holds
        let s = ev.phi_q() + 1.0;
        let numeric = integrate(|x| (-s * x).exp() * ev.w(x), 0.0, 90.0, 1e-11, 1e-15)
            .unwrap()
            .value;
        assert_relative_eq!(
            numeric,
            1.0 / (model.laplace_exponent(s) - 0.2),
            max_relative = 1e-8
        );
    }

    #[test]
    fn w_is_strictly_increasing() {
        let ev = ScaleEvaluator::new(&example_model(), 0.1).unwrap();
        let mut prev = ev.w(0.0);
        for i in 1..=1000 {
            let x = 50.0 * i as f64 / 1000.0;
            let cur = ev.w(x);
            assert!(cur > prev, "W not increasing at x = {x}");
            prev = cur;
        }
    }

    #[test]
    fn w_bar_is_log_concave() {
        // W̄·W̄'' − (W̄')² < 0 on (0, 20], with W̄' = W and W̄'' = W'
        let ev = ScaleEvaluator::new(&example_model(), 0.1).unwrap();
        for i in 1..=200 {
            let a = 0.1 * i as f64;
            let g = ev.w_bar(a) * ev.w_prime(a).unwrap() - ev.w(a) * ev.w(a);
            assert!(g < 0.0, "log-concavity violated at a = {a}: {g}");
        }
    }

    #[test]
    fn evaluations_are_real() {
        let ev = ScaleEvaluator::new(&example_model(), 0.1).unwrap();
        for i in 0..=200 {
            let x = 0.25 * i as f64;
            assert!(ev.w_imag(x) < 1e-12, "imaginary residue at x = {x}");
        }
    }

    #[test]
    fn ratio_limit_gap_decays() {
        let ev_b = ScaleEvaluator::new(&brownian_sqrt2(), 1.0).unwrap();
        // coth(30) − 1 is below double-precision resolution of the ratio
        assert!(ev_b.ratio_limit_gap(30.0).abs() < 1e-12);

        let ev = ScaleEvaluator::new(&example_model(), 0.1).unwrap();
        assert!(ev.ratio_limit_gap(200.0).abs() < 1e-6);
        let gaps: Vec<f64> = [10.0, 20.0, 40.0]
            .iter()
            .map(|&x| ev.ratio_limit_gap(x).abs())
            .collect();
        assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "gaps: {gaps:?}");
    }

    #[test]
    fn lower_bound_stays_below_z() {
        let ev = ScaleEvaluator::new(&example_model(), 0.1).unwrap();
        let delta = ev.phi_q() / 2.0;
        for x in [20.0, 50.0, 120.0] {
            let bound = ev.z_lower_bound(x, delta).unwrap();
            assert!(bound <= ev.z(x), "bound {bound} exceeds Z at x = {x}");
        }
        let ev_b = ScaleEvaluator::new(&brownian_sqrt2(), 1.0).unwrap();
        let bound = ev_b.z_lower_bound(10.0, 0.5).unwrap();
        assert!(bound <= ev_b.z(10.0));
        // precondition x >= log2/delta
        assert!(ev.z_lower_bound(1.0, delta).is_err());
        assert!(ev.z_lower_bound(20.0, ev.phi_q() * 2.0).is_err());
    }

    #[test]
    fn log_form_agrees_with_plain_form() {
        let ev = ScaleEvaluator::new(&example_model(), 0.1).unwrap();
        for x in [1.0, 10.0, 150.0] {
            assert_relative_eq!(ev.ln_z(x), ev.z(x).ln(), max_relative = 1e-11);
            assert_relative_eq!(ev.ln_w(x), ev.w(x).ln(), max_relative = 1e-11);
        }
    }

    #[test]
    fn z_prime_identity() {
        let ev = ScaleEvaluator::new(&example_model(), 0.1).unwrap();
        for i in 0..=40 {
            let x = 0.5 * i as f64;
            assert_eq!(ev.z_prime(x).unwrap(), 0.1 * ev.w(x));
            if x > 0.0 {
                assert_relative_eq!(
                    ev.z_double_prime(x).unwrap() / 0.1,
                    ev.w_prime(x).unwrap(),
                    max_relative = 1e-12
                );
            }
        }
    }
}
