//! Riemann theta function
//! Θ(λ|τ) = Σ_{m ∈ Z^g} exp(½ m τ mᵗ + m λᵗ) for symmetric τ with negative
//! definite real part, with gradient, Hessian and a Gaussian tail bound.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

#[derive(Clone, Debug)]
pub struct ThetaContext {
    tau: Vec<Vec<C64>>,
    /// -½ × largest eigenvalue of Re τ.
    decay: f64,
    pub max_radius: usize,
    /// Target for the tail, relative to the largest possible term.
    pub tail_tol: f64,
}

#[derive(Clone, Debug)]
pub struct ThetaValue {
    pub value: C64,
    pub grad: Vec<C64>,
    pub hess: Vec<Vec<C64>>,
    /// Sum of moduli of the summed terms (scale for cancellation checks).
    pub abs_sum: f64,
    pub radius: usize,
    pub tail_bound: f64,
}

impl ThetaValue {
    /// ∇ ln Θ.
    pub fn log_grad(&self) -> Vec<C64> {
        self.grad.iter().map(|g| g / self.value).collect()
    }

    /// Hessian of ln Θ.
    pub fn log_hess(&self) -> Vec<Vec<C64>> {
        let t = self.value;
        let g = self.log_grad();
        self.hess
            .iter()
            .enumerate()
            .map(|(a, row)| row.iter().enumerate().map(|(b, h)| h / t - g[a] * g[b]).collect())
            .collect()
    }
}

pub fn real_part_eigenvalues(tau: &[Vec<C64>]) -> Vec<f64> {
    let g = tau.len();
    let m = DMatrix::from_fn(g, g, |i, j| 0.5 * (tau[i][j].re + tau[j][i].re));
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

impl ThetaContext {
    pub fn new(tau: Vec<Vec<C64>>) -> Result<ThetaContext> {
        let g = tau.len();
        if g == 0 || tau.iter().any(|r| r.len() != g) {
            return Err(Error::Invalid("tau must be a nonempty square matrix".into()));
        }
        if tau.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("tau has non-finite entries".into()));
        }
        let ev = real_part_eigenvalues(&tau);
        let top = *ev.last().unwrap();
        if top >= 0.0 {
            return Err(Error::Invalid(format!("Re tau is not negative definite (largest eigenvalue {top:.3e})")));
        }
        Ok(ThetaContext { tau, decay: -0.5 * top, max_radius: 60, tail_tol: 1e-17 })
    }

    pub fn with_max_radius(mut self, r: usize) -> ThetaContext {
        self.max_radius = r;
        self
    }

    pub fn genus(&self) -> usize {
        self.tau.len()
    }

    pub fn tau(&self) -> &[Vec<C64>] {
        &self.tau
    }

    /// Bound on Σ_{|m|∞ > r} |m-weighted terms| and the truncation radius
    /// meeting the tolerance for arguments with |Re λ| = l.
    fn radius_for(&self, l: f64) -> Result<(usize, f64)> {
        let g = self.genus() as i32;
        let c = self.decay;
        // Largest possible term, exp(l^2 / 4c), sets the scale.
        let log_scale = (l * l / (4.0 * c)).max(0.0);
        let start = (l / (2.0 * c)).ceil() as usize;
        let tail = |r: usize| -> f64 {
            let mut s = 0.0;
            for k in r + 1..r + 400 {
                let kf = k as f64;
                let shells = (2.0 * kf + 1.0).powi(g) - (2.0 * kf - 1.0).powi(g);
                let term = shells * (1.0 + g as f64 * kf * kf) * (-c * kf * kf + l * kf - log_scale).exp();
                s += term;
                if term < 1e-30 * s {
                    break;
                }
            }
            s
        };
        let mut r = start.max(1);
        loop {
            let t = tail(r);
            if t < self.tail_tol {
                return Ok((r, t * log_scale.exp()));
            }
            r += 1;
            if r > self.max_radius {
                return Err(Error::NoConvergence(t));
            }
        }
    }

    fn sum(&self, lam: &[C64], order: usize) -> Result<ThetaValue> {
        let g = self.genus();
        assert_eq!(lam.len(), g, "theta argument has wrong length");
        let l = lam.iter().map(|z| z.re * z.re).sum::<f64>().sqrt();
        let (r, tail) = self.radius_for(l)?;
        let ri = r as i64;
        let mut m = vec![-ri; g];
        let mut value = C64::default();
        let mut grad = vec![C64::default(); g];
        let mut hess = vec![vec![C64::default(); g]; g];
        let mut abs_sum = 0.0;
        loop {
            let mut ph = C64::default();
            for a in 0..g {
                let ma = m[a] as f64;
                ph += lam[a] * ma;
                ph += 0.5 * self.tau[a][a] * ma * ma;
                for b in a + 1..g {
                    ph += self.tau[a][b] * ma * m[b] as f64;
                }
            }
            let t = ph.exp();
            value += t;
            abs_sum += t.norm();
            if order >= 1 {
                for a in 0..g {
                    grad[a] += t * m[a] as f64;
                    if order >= 2 {
                        for b in 0..g {
                            hess[a][b] += t * (m[a] * m[b]) as f64;
                        }
                    }
                }
            }
            // odometer over [-r, r]^g
            let mut k = 0;
            loop {
                if k == g {
                    return Ok(ThetaValue { value, grad, hess, abs_sum, radius: r, tail_bound: tail });
                }
                m[k] += 1;
                if m[k] > ri {
                    m[k] = -ri;
                    k += 1;
                } else {
                    break;
                }
            }
        }
    }

    pub fn theta(&self, lam: &[C64]) -> Result<C64> {
        Ok(self.sum(lam, 0)?.value)
    }

    pub fn theta_grad(&self, lam: &[C64]) -> Result<Vec<C64>> {
        Ok(self.sum(lam, 1)?.grad)
    }

    pub fn theta_hess(&self, lam: &[C64]) -> Result<Vec<Vec<C64>>> {
        Ok(self.sum(lam, 2)?.hess)
    }

    /// Value, gradient and Hessian in one pass.
    pub fn eval(&self, lam: &[C64]) -> Result<ThetaValue> {
        self.sum(lam, 2)
    }

    /// Same sum at a forced radius (for truncation studies).
    pub fn theta_at_radius(&self, lam: &[C64], r: usize) -> C64 {
        let mut ctx = self.clone();
        ctx.tail_tol = f64::INFINITY;
        let g = self.genus();
        let ri = r as i64;
        let mut m = vec![-ri; g];
        let mut value = C64::default();
        loop {
            let mut ph = C64::default();
            for a in 0..g {
                ph += lam[a] * m[a] as f64;
                for b in 0..g {
                    ph += 0.5 * ctx.tau[a][b] * (m[a] * m[b]) as f64;
                }
            }
            value += ph.exp();
            let mut k = 0;
            loop {
                if k == g {
                    return value;
                }
                m[k] += 1;
                if m[k] > ri {
                    m[k] = -ri;
                    k += 1;
                } else {
                    break;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ctx() -> ThetaContext {
        ThetaContext::new(vec![
            vec![C64::new(-11.4, 0.3), C64::new(-5.4, -0.2)],
            vec![C64::new(-5.4, -0.2), C64::new(-8.2, 0.1)],
        ])
        .unwrap()
    }

    #[test]
    fn even_and_periodic() {
        let c = ctx();
        let lam = [C64::new(0.7, -1.3), C64::new(-2.1, 0.4)];
        let neg = [-lam[0], -lam[1]];
        let t = c.theta(&lam).unwrap();
        assert!((t - c.theta(&neg).unwrap()).norm() < 1e-12 * t.norm().max(1.0));
        let shifted = [lam[0] + C64::new(0.0, 2.0 * PI), lam[1]];
        assert!((t - c.theta(&shifted).unwrap()).norm() < 1e-12 * t.norm().max(1.0));
    }

    #[test]
    fn gradient_vanishes_at_origin() {
        let g = ctx().theta_grad(&[C64::default(), C64::default()]).unwrap();
        assert!(g.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn rejects_positive_real_part() {
        assert!(ThetaContext::new(vec![vec![C64::new(1.0, 0.0)]]).is_err());
    }
}
