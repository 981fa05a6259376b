//! Adaptive Gauss-Kronrod (7/15) quadrature of vector-valued complex
//! integrands on [a, b], and contour integrals over parametrized paths.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadSettings {
    /// Absolute tolerance on each component.
    pub tol: f64,
    pub max_depth: u32,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings { tol: 1e-13, max_depth: 40 }
    }
}

fn gk15(f: &dyn Fn(f64) -> Vec<C64>, a: f64, b: f64) -> (Vec<C64>, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let n = fc.len();
    let mut k: Vec<C64> = fc.iter().map(|v| v * WGK[7]).collect();
    let mut g: Vec<C64> = fc.iter().map(|v| v * WG[3]).collect();
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for t in 0..n {
            let s = f1[t] + f2[t];
            k[t] += s * WGK[j];
            if j % 2 == 1 {
                g[t] += s * WG[j / 2];
            }
        }
    }
    let mut err = 0.0f64;
    for t in 0..n {
        k[t] *= h;
        g[t] *= h;
        err = err.max((k[t] - g[t]).norm());
    }
    (k, err)
}

/// Integrate a vector-valued function over [a, b]. Returns the value and
/// the accumulated error estimate.
pub fn integrate(f: &dyn Fn(f64) -> Vec<C64>, a: f64, b: f64, s: QuadSettings) -> Result<(Vec<C64>, f64)> {
    let (v, e) = gk15(f, a, b);
    let mut worst = 0.0;
    let out = refine(f, a, b, v, e, s.tol, 0, s.max_depth, &mut worst)?;
    Ok((out, worst))
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &dyn Fn(f64) -> Vec<C64>,
    a: f64,
    b: f64,
    whole: Vec<C64>,
    err: f64,
    tol: f64,
    depth: u32,
    max_depth: u32,
    acc: &mut f64,
) -> Result<Vec<C64>> {
    // The GK error estimate is very pessimistic on smooth pieces, so the
    // tolerance is not halved per split; a floor keeps round-off from
    // forcing endless refinement.
    let scale = whole.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if err <= tol.max(2e-14 * scale) {
        *acc += err;
        return Ok(whole);
    }
    if depth >= max_depth {
        return Err(Error::NoConvergence(err));
    }
    let m = 0.5 * (a + b);
    let (l, el) = gk15(f, a, m);
    let (r, er) = gk15(f, m, b);
    let l = refine(f, a, m, l, el, tol, depth + 1, max_depth, acc)?;
    let r = refine(f, m, b, r, er, tol, depth + 1, max_depth, acc)?;
    Ok(l.into_iter().zip(r).map(|(x, y)| x + y).collect())
}

/// A piecewise-smooth path parametrized over t in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub enum Contour {
    Segment { from: C64, to: C64 },
    /// Counterclockwise ellipse with semi-axes (a, b), the a-axis rotated
    /// by `angle`.
    Ellipse { center: C64, a: f64, b: f64, angle: f64 },
    Circle { center: C64, radius: f64 },
}

impl Contour {
    pub fn point(&self, t: f64) -> C64 {
        match *self {
            Contour::Segment { from, to } => from + (to - from) * t,
            Contour::Ellipse { center, a, b, angle } => {
                let th = 2.0 * PI * t;
                center + C64::from_polar(1.0, angle) * C64::new(a * th.cos(), b * th.sin())
            }
            Contour::Circle { center, radius } => center + C64::from_polar(radius, 2.0 * PI * t),
        }
    }

    pub fn tangent(&self, t: f64) -> C64 {
        match *self {
            Contour::Segment { from, to } => to - from,
            Contour::Ellipse { a, b, angle, .. } => {
                let th = 2.0 * PI * t;
                C64::from_polar(1.0, angle) * C64::new(-a * th.sin(), b * th.cos()) * (2.0 * PI)
            }
            Contour::Circle { radius, .. } => C64::from_polar(radius, 2.0 * PI * t) * C64::new(0.0, 2.0 * PI),
        }
    }

    pub fn is_closed(&self) -> bool {
        !matches!(self, Contour::Segment { .. })
    }
}

/// Integral of f(z) dz along the contour, split into `pieces` equal
/// parameter intervals before adaptive refinement.
pub fn contour_integrate_vec(
    f: &dyn Fn(C64) -> Vec<C64>,
    path: &Contour,
    pieces: usize,
    s: QuadSettings,
) -> Result<Vec<C64>> {
    let g = |t: f64| -> Vec<C64> {
        let z = path.point(t);
        let dz = path.tangent(t);
        f(z).into_iter().map(|v| v * dz).collect()
    };
    let mut total: Option<Vec<C64>> = None;
    for p in 0..pieces.max(1) {
        let a = p as f64 / pieces.max(1) as f64;
        let b = (p + 1) as f64 / pieces.max(1) as f64;
        let (v, _) = integrate(&g, a, b, s)?;
        total = Some(match total {
            None => v,
            Some(t) => t.into_iter().zip(v).map(|(x, y)| x + y).collect(),
        });
    }
    Ok(total.unwrap_or_default())
}

pub fn contour_integrate(f: &dyn Fn(C64) -> C64, path: &Contour, tol: f64) -> Result<C64> {
    let s = QuadSettings { tol, ..QuadSettings::default() };
    let pieces = if path.is_closed() { 4 } else { 1 };
    Ok(contour_integrate_vec(&|z| vec![f(z)], path, pieces, s)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_over_z_on_unit_circle() {
        let c = Contour::Circle { center: C64::default(), radius: 1.0 };
        let v = contour_integrate(&|z| 1.0 / z, &c, 1e-13).unwrap();
        assert!((v - C64::new(0.0, 2.0 * PI)).norm() < 1e-12);
    }

    #[test]
    fn polynomial_on_closed_contour() {
        let c = Contour::Ellipse { center: C64::new(0.3, -0.2), a: 2.0, b: 0.5, angle: 0.7 };
        let v = contour_integrate(&|z| z, &c, 1e-13).unwrap();
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_fails_cleanly() {
        let r = integrate(&|t| vec![C64::new(1.0 / t, 0.0)], 0.0, 1.0, QuadSettings { tol: 1e-12, max_depth: 12 });
        assert!(matches!(r, Err(Error::NoConvergence(_))));
    }
}
