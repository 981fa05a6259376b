//! Theta-function kernels on the curve.
//!
//! With κ = κ₀ and ∇ the gradient in the theta argument:
//!
//! * r^{(P)}(z) = ∇lnΘ(A(P) − A(z) + κ)·ω(P), a differential in P,
//! * ω^{(P)}(z) = r^{(z)}(P), a differential in z with residue +1 at z = P,
//! * G(z,w) = ω^{(w)}(z) − ω^{(P₀)}(z), residue +1 at w and −1 at P₀.
//!
//! All values are dx-coefficients at the point carrying the differential.

use crate::curve::{PeriodData, Site, SurfacePoint};
use crate::error::{Error, Result};
use crate::theta::ThetaValue;
use num_complex::Complex64 as C64;
use std::sync::Arc;

/// First and second logarithmic derivatives of Θ at one argument.
#[derive(Clone, Debug)]
pub struct LogTheta {
    pub grad: Vec<C64>,
    pub hess: Vec<Vec<C64>>,
}

#[derive(Clone, Debug)]
pub struct KernelContext {
    pub pd: Arc<PeriodData>,
    pub p0: Site,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn quad_form(u: &[C64], h: &[Vec<C64>], v: &[C64]) -> C64 {
    let mut s = C64::default();
    for (a, ua) in u.iter().enumerate() {
        for (b, vb) in v.iter().enumerate() {
            s += ua * h[a][b] * vb;
        }
    }
    s
}

impl KernelContext {
    pub fn new(pd: Arc<PeriodData>, p0: SurfacePoint) -> Result<KernelContext> {
        let p0 = pd.site(p0)?;
        Ok(KernelContext { pd, p0 })
    }

    pub fn from_site(pd: Arc<PeriodData>, p0: Site) -> KernelContext {
        KernelContext { pd, p0 }
    }

    pub fn genus(&self) -> usize {
        self.pd.genus()
    }

    /// ln Θ derivatives at A(u) − A(v) + κ₀.
    pub fn log_theta(&self, u: &Site, v: &Site) -> Result<LogTheta> {
        let arg: Vec<C64> = (0..self.genus()).map(|a| u.abel[a] - v.abel[a] + self.pd.kappa0[a]).collect();
        let tv: ThetaValue = self.pd.theta_context().eval(&arg)?;
        if tv.value.norm() < 1e-13 * tv.abs_sum.max(1e-300) {
            return Err(Error::ThetaZero(tv.value.norm()));
        }
        Ok(LogTheta { grad: tv.log_grad(), hess: tv.log_hess() })
    }

    /// r^{(P)}(z), coefficient of dP.
    pub fn r_kernel(&self, p: &Site, z: &Site) -> Result<C64> {
        Ok(dot(&self.log_theta(p, z)?.grad, &p.omega))
    }

    /// d_z r^{(P)}(z), coefficient of dP dz.
    pub fn dr_dz(&self, p: &Site, z: &Site) -> Result<C64> {
        let lt = self.log_theta(p, z)?;
        Ok(-quad_form(&p.omega, &lt.hess, &z.omega))
    }

    /// ω^{(P)}(z) = r^{(z)}(P), coefficient of dz.
    pub fn omega_kernel(&self, p: &Site, z: &Site) -> Result<C64> {
        self.r_kernel(z, p)
    }

    /// d/dx(z) of ω^{(P)}(z).
    pub fn d_omega_kernel_dz(&self, p: &Site, z: &Site) -> Result<C64> {
        let lt = self.log_theta(z, p)?;
        Ok(quad_form(&z.omega, &lt.hess, &z.omega) + dot(&lt.grad, &z.omega_dx))
    }

    /// G(z, w), coefficient of dz.
    pub fn green_g(&self, z: &Site, w: &Site) -> Result<C64> {
        Ok(self.omega_kernel(w, z)? - self.omega_kernel(&self.p0, z)?)
    }

    /// d/dx(z) of G(z, w), analytic.
    pub fn d_green_g_dz(&self, z: &Site, w: &Site) -> Result<C64> {
        Ok(self.d_omega_kernel_dz(w, z)? - self.d_omega_kernel_dz(&self.p0, z)?)
    }

    /// G(P, z)dP as a differential in P: r^{(P)}(z) − r^{(P)}(P₀).
    pub fn green_gp(&self, p: &Site, z: &Site) -> Result<C64> {
        Ok(self.r_kernel(p, z)? - self.r_kernel(p, &self.p0)?)
    }

    /// d_z[G(P, z)dP].
    pub fn d_green_gp_dz(&self, p: &Site, z: &Site) -> Result<C64> {
        self.dr_dz(p, z)
    }
}
