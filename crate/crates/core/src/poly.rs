//! Real-coefficient polynomials, simultaneous root finding and residue
//! (partial-fraction) computation.
//!
//! Degrees here are small — the characteristic polynomial of an
//! Erlang-mixture Lévy exponent has degree `2 + Σ shapes` at most — so the
//! Aberth–Ehrlich iteration converges in a handful of sweeps and residues
//! can be extracted stably by Taylor-series division at each root cluster.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Dense polynomial with real coefficients, ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![0.0] }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![1.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            out[i] += a;
        }
        for (i, &b) in other.coeffs.iter().enumerate() {
            out[i] += b;
        }
        Poly::new(out)
    }

    pub fn scale(&self, k: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    /// (x + a)^n
    pub fn linear_power(a: f64, n: usize) -> Poly {
        let mut p = Poly::one();
        let lin = Poly::new(vec![a, 1.0]);
        for _ in 0..n {
            p = p.mul(&lin);
        }
        p
    }

    /// Taylor coefficients of `self` around `center`, up to `order`
    /// (inclusive): returns `[p(c), p'(c), p''(c)/2!, ...]`.
    pub fn taylor_at(&self, center: Complex64, order: usize) -> Vec<Complex64> {
        let work: Vec<Complex64> = self.coeffs.iter().map(|&c| c.into()).collect();
        taylor_complex(&work, center, order)
    }
}

/// Cauchy bound on root magnitudes: 1 + max |a_i| / |a_n|.
fn cauchy_radius(p: &Poly) -> f64 {
    let lead = p.coeffs.last().unwrap().abs();
    let m = p
        .coeffs
        .iter()
        .take(p.coeffs.len() - 1)
        .fold(0.0f64, |acc, &c| acc.max(c.abs()));
    1.0 + m / lead
}

/// All complex roots of `p` by Aberth–Ehrlich simultaneous iteration,
/// polished with one Newton step each, with conjugate pairs symmetrised so
/// downstream evaluations are real to machine precision.
pub fn roots(p: &Poly, tol: f64, max_iter: usize) -> Result<Vec<Complex64>> {
    let n = p.degree();
    if n == 0 {
        return Err(Error::RootFinding("constant polynomial has no roots".into()));
    }
    let lead = *p.coeffs.last().unwrap();
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::RootFinding("degenerate leading coefficient".into()));
    }
    let dp = p.derivative();

    let radius = cauchy_radius(p);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            // asymmetric angles avoid starting on a symmetry axis
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.39;
            0.7 * radius * Complex64::new(theta.cos(), theta.sin())
        })
        .collect();

    let mut converged = false;
    for _ in 0..max_iter {
        let mut max_step = 0.0f64;
        for k in 0..n {
            let pk = p.eval_complex(z[k]);
            let dpk = dp.eval_complex(z[k]);
            let ratio = if dpk.norm() == 0.0 {
                // sitting on a critical point: nudge off it
                Complex64::new(tol.sqrt(), tol.sqrt())
            } else {
                pk / dpk
            };
            let mut offset = Complex64::new(0.0, 0.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != k {
                    let d = z[k] - zj;
                    if d.norm() > 1e-300 {
                        offset += d.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * offset;
            let step = if denom.norm() < 1e-12 { ratio } else { ratio / denom };
            z[k] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[k].norm()));
        }
        if max_step < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::RootFinding(format!(
            "Aberth iteration did not converge within {max_iter} sweeps"
        )));
    }

    // Newton polish
    for zk in z.iter_mut() {
        let dpk = dp.eval_complex(*zk);
        if dpk.norm() > 1e-300 {
            *zk -= p.eval_complex(*zk) / dpk;
        }
    }

    symmetrize_conjugates(&mut z, tol);
    Ok(z)
}

/// Force near-real roots exactly real and pair the rest into exact
/// conjugates.
fn symmetrize_conjugates(z: &mut [Complex64], tol: f64) {
    let real_tol = |r: &Complex64| 100.0 * tol * (1.0 + r.norm());
    let n = z.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        if z[i].im.abs() <= real_tol(&z[i]) {
            z[i] = Complex64::new(z[i].re, 0.0);
            used[i] = true;
            continue;
        }
        // find closest conjugate partner
        let mut best: Option<(usize, f64)> = None;
        for j in (i + 1)..n {
            if used[j] {
                continue;
            }
            let d = (z[i] - z[j].conj()).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, _)) = best {
            let re = 0.5 * (z[i].re + z[j].re);
            let im = 0.5 * (z[i].im.abs() + z[j].im.abs());
            let sign = z[i].im.signum();
            z[i] = Complex64::new(re, sign * im);
            z[j] = Complex64::new(re, -sign * im);
            used[i] = true;
            used[j] = true;
        } else {
            // unpaired complex root of a real polynomial: numerical noise,
            // flatten it
            z[i] = Complex64::new(z[i].re, 0.0);
            used[i] = true;
        }
    }
}

/// A root with its multiplicity after clustering.
#[derive(Debug, Clone, Copy)]
pub struct PoleCluster {
    pub root: Complex64,
    pub multiplicity: usize,
}

/// Group roots closer than `tol * (1 + |root|)` into multiplicity clusters.
pub fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<PoleCluster> {
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for &r in roots {
        match clusters
            .iter_mut()
            .find(|(c, _)| (*c - r).norm() <= tol * (1.0 + c.norm()))
        {
            Some((c, m)) => {
                // running mean keeps the cluster centre stable
                *c = (*c * (*m as f64) + r) / (*m as f64 + 1.0);
                *m += 1;
            }
            None => clusters.push((r, 1)),
        }
    }
    clusters
        .into_iter()
        .map(|(root, multiplicity)| PoleCluster { root, multiplicity })
        .collect()
}

/// One term `coefficient / (s - pole)^order` of a partial-fraction
/// expansion.
#[derive(Debug, Clone, Copy)]
pub struct PartialFraction {
    pub pole: Complex64,
    pub order: usize,
    pub coefficient: Complex64,
}

/// Partial fractions of `num / den` given the clustered poles of `den`.
/// Requires `deg num < deg den` (strictly proper), which holds for
/// `1/(ψ(s)-q)` by construction.
pub fn partial_fractions(
    num: &Poly,
    den: &Poly,
    clusters: &[PoleCluster],
) -> Result<Vec<PartialFraction>> {
    if num.degree() >= den.degree() {
        return Err(Error::RootFinding(
            "partial fractions require a strictly proper rational function".into(),
        ));
    }
    let mut out = Vec::new();
    for cl in clusters {
        let m = cl.multiplicity;
        // deflate den by (s - root)^m
        let mut t: Vec<Complex64> = den.coeffs().iter().map(|&c| c.into()).collect();
        for _ in 0..m {
            t = deflate(&t, cl.root);
        }
        // Taylor expansions around the root up to order m-1
        let num_taylor = num.taylor_at(cl.root, m - 1);
        let t_taylor = taylor_complex(&t, cl.root, m - 1);
        if t_taylor[0].norm() < 1e-300 {
            return Err(Error::RootFinding(format!(
                "pole cluster at {} is numerically degenerate",
                cl.root
            )));
        }
        // series quotient num/T = Σ b_i (s-ρ)^i; the 1/(s-ρ)^j coefficient
        // is b_{m-j}
        let mut b = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            let mut acc = num_taylor[i];
            for j in 1..=i {
                acc -= t_taylor[j] * b[i - j];
            }
            b[i] = acc / t_taylor[0];
        }
        for j in 1..=m {
            out.push(PartialFraction {
                pole: cl.root,
                order: j,
                coefficient: b[m - j],
            });
        }
    }
    Ok(out)
}

/// Evaluate a partial-fraction expansion at `s` (for residual validation).
pub fn eval_partial_fractions(terms: &[PartialFraction], s: Complex64) -> Complex64 {
    terms
        .iter()
        .map(|t| t.coefficient / (s - t.pole).powu(t.order as u32))
        .sum()
}

/// Synthetic division of a complex-coefficient polynomial by (x - root),
/// dropping the remainder.
fn deflate(coeffs: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut quot = vec![Complex64::new(0.0, 0.0); n - 1];
    let mut carry = coeffs[n - 1];
    for i in (0..n - 1).rev() {
        quot[i] = carry;
        carry = coeffs[i] + carry * root;
    }
    quot
}

/// Taylor coefficients of a complex-coefficient polynomial around `center`.
fn taylor_complex(coeffs: &[Complex64], center: Complex64, order: usize) -> Vec<Complex64> {
    let mut work = coeffs.to_vec();
    let mut out = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        let mut rem = Complex64::new(0.0, 0.0);
        for c in work.iter().rev() {
            rem = rem * center + *c;
        }
        out.push(rem);
        work = deflate(&work, center);
        if work.is_empty() {
            while out.len() < order + 1 {
                out.push(Complex64::new(0.0, 0.0));
            }
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quadratic_roots() {
        // s^2 - 1
        let p = Poly::new(vec![-1.0, 0.0, 1.0]);
        let mut r = roots(&p, 1e-13, 200).unwrap();
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert_relative_eq!(r[0].re, -1.0, epsilon = 1e-12);
        assert_relative_eq!(r[1].re, 1.0, epsilon = 1e-12);
        assert!(r[0].im.abs() < 1e-12 && r[1].im.abs() < 1e-12);
    }

    #[test]
    fn complex_conjugate_roots_are_symmetric() {
        // (s^2 + 2s + 5)(s - 1): roots -1 ± 2i, 1
        let p = Poly::new(vec![5.0, 2.0, 1.0]).mul(&Poly::new(vec![-1.0, 1.0]));
        let r = roots(&p, 1e-13, 200).unwrap();
        let pos: Vec<_> = r.iter().filter(|z| z.im > 0.0).collect();
        let neg: Vec<_> = r.iter().filter(|z| z.im < 0.0).collect();
        assert_eq!(pos.len(), 1);
        assert_eq!(neg.len(), 1);
        assert_eq!(pos[0].re, neg[0].re);
        assert_eq!(pos[0].im, -neg[0].im);
        assert_relative_eq!(pos[0].re, -1.0, epsilon = 1e-10);
        assert_relative_eq!(pos[0].im, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn repeated_root_partial_fractions() {
        // 1 / ((s-1)^2 (s+2)) = -1/9 / (s-1) + 1/3 / (s-1)^2 + 1/9 / (s+2)
        let den = Poly::linear_power(-1.0, 2).mul(&Poly::new(vec![2.0, 1.0]));
        let rts = roots(&den, 1e-13, 300).unwrap();
        let clusters = cluster_roots(&rts, 1e-7);
        assert_eq!(clusters.len(), 2);
        let pf = partial_fractions(&Poly::one(), &den, &clusters).unwrap();
        for t in &pf {
            if (t.pole.re - 1.0).abs() < 1e-6 {
                match t.order {
                    1 => assert_relative_eq!(t.coefficient.re, -1.0 / 9.0, epsilon = 1e-7),
                    2 => assert_relative_eq!(t.coefficient.re, 1.0 / 3.0, epsilon = 1e-7),
                    _ => panic!("unexpected order"),
                }
            } else {
                assert_eq!(t.order, 1);
                assert_relative_eq!(t.coefficient.re, 1.0 / 9.0, epsilon = 1e-7);
            }
        }
        // expansion must reproduce the function away from the poles
        for s in [0.0, 3.0, -0.5] {
            let s = Complex64::new(s, 0.0);
            let direct = Complex64::new(1.0, 0.0) / den.eval_complex(s);
            let expanded = eval_partial_fractions(&pf, s);
            assert_relative_eq!(direct.re, expanded.re, max_relative = 1e-7);
        }
    }

    #[test]
    fn quartic_with_mixed_roots() {
        // (s^2 + 1)(s - 2)(s + 3)
        let p = Poly::new(vec![1.0, 0.0, 1.0])
            .mul(&Poly::new(vec![-2.0, 1.0]))
            .mul(&Poly::new(vec![3.0, 1.0]));
        let r = roots(&p, 1e-13, 300).unwrap();
        let mut reals: Vec<f64> = r.iter().filter(|z| z.im == 0.0).map(|z| z.re).collect();
        reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(reals.len(), 2);
        assert_relative_eq!(reals[0], -3.0, epsilon = 1e-10);
        assert_relative_eq!(reals[1], 2.0, epsilon = 1e-10);
    }
}
