//! Vacuum-field correlation tensor above the interface.
//!
//! The normalized symmetric correlation tensor splits as
//! $C = C_\infty + C_{int}$.  The free-space part has the closed form
//! (with $x = |{\bf s}|$, $\hat{\bf s} = {\bf s}/x$)
//!
//! $$ C_\infty^{ij} = \tfrac32\left[(j_0 - j_1/x)(\delta^{ij} -
//!    \hat s^i \hat s^j) + (2 j_1 / x)\, \hat s^i \hat s^j\right], $$
//!
//! while the interface part is assembled from four scalar weight functions
//! $c_0, q_0, a_1, q_2$ of $(z, s_\parallel^2)$, each a Sommerfeld integral
//! over the transverse wavenumber with Fresnel reflection kernels:
//!
//! $$ C_{int}^{ij} = c_0\,\delta^{ij}
//!    + a_1 (\delta^{zi} s^j_\parallel - s^i_\parallel \delta^{zj})
//!    + q_0 (\delta^{zi}\delta^{zj} - \tfrac13\delta^{ij})
//!    + q_2 (s^i_\parallel s^j_\parallel - \tfrac12 s_\parallel^2
//!      (\delta^{ij} - \delta^{zi}\delta^{zj})). $$
//!
//! $z$ is the (common) height of the two points and
//! ${\bf s}_\parallel$ their in-plane separation; the interface part depends
//! on $z_1 + z_2$ only, so it has no $s_z$ dependence.  The one-point decay
//! rates of dipoles parallel/perpendicular to the surface follow as
//! $c_\parallel = 1 + c_0 - q_0/3$, $c_\perp = 1 + c_0 + 2 q_0/3$.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

use crate::interface::{reflection, Interface, Polarization};
use crate::quadrature::{
    bessel_j, bessel_ratio_limits, integrate_sommerfeld, Measure, QuadratureSpec, Segment,
    SommerfeldIntegrand,
};
use crate::{Error, Result};

/// The four interface weight functions at one $(z, s_\parallel)$ point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationWeights {
    /// Isotropic weight.
    pub c0: f64,
    /// Uniaxial quadrupole weight (z-axis).
    pub q0: f64,
    /// Axial (antisymmetric) weight.
    pub a1: f64,
    /// In-plane quadrupole weight.
    pub q2: f64,
}

/// Decay-rate factors for dipoles parallel/perpendicular to the surface,
/// normalized to the free-space rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnePointRates {
    pub c_par: f64,
    pub c_perp: f64,
}

/// Truncation order for the free-space correlation tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionOrder {
    /// Closed form of the angular mode integral (spherical Bessel functions).
    Exact,
    /// The second-order expansion used by the semiclassical force/diffusion
    /// formulas: $(1 - \tfrac{7}{30}s^2)\delta^{ij} - \tfrac{1}{10}(s^i s^j -
    /// \tfrac13 s^2 \delta^{ij})$.
    Taylor2,
}

/// Taylor data of the full correlation tensor at coincidence:
/// value, gradient and Hessian with respect to the separation ${\bf s}$.
#[derive(Debug, Clone)]
pub struct CorrelationTaylor {
    /// $C^{ij}(z; 0)$ — diagonal $(c_\parallel, c_\parallel, c_\perp)$.
    pub c0: [[f64; 3]; 3],
    /// $\partial C^{ij}/\partial s_k$ at $s=0$ (axial interface term only;
    /// the free-space part is even in $s$ through second order).
    pub d1: [[[f64; 3]; 3]; 3],
    /// $\partial^2 C^{ij}/\partial s_k \partial s_l$ at $s=0$.
    pub d2: [[[[f64; 3]; 3]; 3]; 3],
}

/// Curvature/derivative data of the weights at coincidence, used for the
/// Taylor assembly and the analytic $\partial_z$ derivatives of the rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct AuxWeights {
    /// $a_1(z; 0)$.
    pub a1_0: f64,
    /// $q_2(z; 0)$.
    pub q2_0: f64,
    /// $\partial c_0/\partial(s_\parallel^2)$ at $s=0$.
    pub c0_s2: f64,
    /// $\partial q_0/\partial(s_\parallel^2)$ at $s=0$.
    pub q0_s2: f64,
    /// $\partial c_0/\partial z$ and $\partial^2 c_0/\partial z^2$ at $s=0$.
    pub c0_z1: f64,
    pub c0_z2: f64,
    /// Same for $q_0$.
    pub q0_z1: f64,
    pub q0_z2: f64,
}

fn check_geometry(z: f64, s_par: f64) -> Result<()> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::InvalidDomain(format!(
            "height above the surface must satisfy z >= 0 (got {z})"
        )));
    }
    if !(s_par >= 0.0) || !s_par.is_finite() {
        return Err(Error::InvalidDomain(format!(
            "in-plane separation must satisfy s_par >= 0 (got {s_par})"
        )));
    }
    Ok(())
}

/// Integrate a kernel over both u-segments [0,1] ∪ [1,n0].
fn sommerfeld_sum<F>(
    n0: f64,
    measure: Measure,
    spec: &QuadratureSpec,
    kernel: F,
) -> Result<Complex64>
where
    F: Fn(f64, Complex64) -> Complex64 + Copy,
{
    let prop = integrate_sommerfeld(
        n0,
        &SommerfeldIntegrand {
            kernel,
            segment: Segment::Propagating,
            measure,
        },
        spec,
    )?;
    let evan = integrate_sommerfeld(
        n0,
        &SommerfeldIntegrand {
            kernel,
            segment: Segment::Evanescent,
            measure,
        },
        spec,
    )?;
    Ok(prop + evan)
}

fn is_default_spec(spec: &QuadratureSpec) -> bool {
    let d = QuadratureSpec::default();
    spec.rel_tol == d.rel_tol && spec.abs_tol == d.abs_tol
}

const CACHE_QUANTUM: f64 = 1e-12;

fn quantize(x: f64) -> i64 {
    (x / CACHE_QUANTUM).round() as i64
}

type WeightKey = (i64, i64, i64);

fn weight_cache() -> &'static Mutex<HashMap<WeightKey, CorrelationWeights>> {
    static CACHE: OnceLock<Mutex<HashMap<WeightKey, CorrelationWeights>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn aux_cache() -> &'static Mutex<HashMap<(i64, i64), AuxWeights>> {
    static CACHE: OnceLock<Mutex<HashMap<(i64, i64), AuxWeights>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn weights_uncached(
    interface: &Interface,
    z: f64,
    s_par: f64,
    spec: &QuadratureSpec,
) -> Result<CorrelationWeights> {
    let n0 = interface.n0();
    if n0 == 1.0 {
        return Ok(CorrelationWeights {
            c0: 0.0,
            q0: 0.0,
            a1: 0.0,
            q2: 0.0,
        });
    }
    let rte = |u: f64| reflection(n0, u, Polarization::Te);
    let rtm = |u: f64| reflection(n0, u, Polarization::Tm);
    let phase = |v: Complex64| (2.0 * z * Complex64::new(0.0, 1.0) * v).exp();

    let c0 = 0.5
        * sommerfeld_sum(n0, Measure::UDuOverV, spec, |u, v| {
            bessel_j(0, s_par * u) * (rte(u) + (2.0 * u * u - 1.0) * rtm(u)) * phase(v)
        })?
        .re;
    let q0 = 0.75
        * sommerfeld_sum(n0, Measure::UDuOverV, spec, |u, v| {
            bessel_j(0, s_par * u) * (-rte(u) + (u * u + 1.0) * rtm(u)) * phase(v)
        })?
        .re;
    let a1 = 1.5
        * sommerfeld_sum(n0, Measure::Du, spec, |u, v| {
            u * u * u * bessel_ratio_limits(1, s_par * u) * rtm(u) * phase(v)
        })?
        .im;
    let q2 = 1.5
        * sommerfeld_sum(n0, Measure::UDuOverV, spec, |u, v| {
            u * u
                * bessel_ratio_limits(2, s_par * u)
                * (rte(u) - (u * u - 1.0) * rtm(u))
                * phase(v)
        })?
        .re;
    Ok(CorrelationWeights { c0, q0, a1, q2 })
}

/// The four interface weight functions at height `z` and in-plane
/// separation `s_par` (both in units of 1/k).
///
/// Results computed with the default [`QuadratureSpec`] are memoized on
/// `(n0, z, s_par²)` keys quantized at 1e-12; custom tolerances bypass the
/// cache.
pub fn weights(
    interface: &Interface,
    z: f64,
    s_par: f64,
    spec: &QuadratureSpec,
) -> Result<CorrelationWeights> {
    check_geometry(z, s_par)?;
    if !is_default_spec(spec) {
        return weights_uncached(interface, z, s_par, spec);
    }
    let key = (
        quantize(interface.n0()),
        quantize(z),
        quantize(s_par * s_par),
    );
    if let Some(w) = weight_cache().lock().unwrap().get(&key) {
        return Ok(*w);
    }
    let w = weights_uncached(interface, z, s_par, spec)?;
    weight_cache().lock().unwrap().insert(key, w);
    Ok(w)
}

fn aux_weights_uncached(interface: &Interface, z: f64, spec: &QuadratureSpec) -> Result<AuxWeights> {
    let n0 = interface.n0();
    if n0 == 1.0 {
        return Ok(AuxWeights::default());
    }
    let rte = |u: f64| reflection(n0, u, Polarization::Te);
    let rtm = |u: f64| reflection(n0, u, Polarization::Tm);
    let phase = |v: Complex64| (2.0 * z * Complex64::new(0.0, 1.0) * v).exp();
    // Kernel combinations entering c0 and q0.
    let kc0 = |u: f64| rte(u) + (2.0 * u * u - 1.0) * rtm(u);
    let kq0 = |u: f64| -rte(u) + (u * u + 1.0) * rtm(u);

    let a1_0 = 0.75
        * sommerfeld_sum(n0, Measure::Du, spec, |u, v| u * u * u * rtm(u) * phase(v))?.im;
    let q2_0 = 3.0 / 16.0
        * sommerfeld_sum(n0, Measure::UDuOverV, spec, |u, v| {
            u * u * (rte(u) - (u * u - 1.0) * rtm(u)) * phase(v)
        })?
        .re;
    // ∂/∂(s²) at s=0 comes from J0(su) ≈ 1 − s²u²/4 under the integral.
    let c0_s2 = 0.5
        * sommerfeld_sum(n0, Measure::UDuOverV, spec, |u, v| {
            -u * u / 4.0 * kc0(u) * phase(v)
        })?
        .re;
    let q0_s2 = 0.75
        * sommerfeld_sum(n0, Measure::UDuOverV, spec, |u, v| {
            -u * u / 4.0 * kq0(u) * phase(v)
        })?
        .re;
    // ∂/∂z differentiates the phase only: each derivative inserts 2iv.
    let dz = |v: Complex64| 2.0 * Complex64::new(0.0, 1.0) * v;
    let c0_z1 = 0.5
        * sommerfeld_sum(n0, Measure::UDuOverV, spec, |u, v| {
            dz(v) * kc0(u) * phase(v)
        })?
        .re;
    let c0_z2 = 0.5
        * sommerfeld_sum(n0, Measure::UDuOverV, spec, |u, v| {
            dz(v) * dz(v) * kc0(u) * phase(v)
        })?
        .re;
    let q0_z1 = 0.75
        * sommerfeld_sum(n0, Measure::UDuOverV, spec, |u, v| {
            dz(v) * kq0(u) * phase(v)
        })?
        .re;
    let q0_z2 = 0.75
        * sommerfeld_sum(n0, Measure::UDuOverV, spec, |u, v| {
            dz(v) * dz(v) * kq0(u) * phase(v)
        })?
        .re;
    Ok(AuxWeights {
        a1_0,
        q2_0,
        c0_s2,
        q0_s2,
        c0_z1,
        c0_z2,
        q0_z1,
        q0_z2,
    })
}

pub(crate) fn aux_weights(
    interface: &Interface,
    z: f64,
    spec: &QuadratureSpec,
) -> Result<AuxWeights> {
    check_geometry(z, 0.0)?;
    if !is_default_spec(spec) {
        return aux_weights_uncached(interface, z, spec);
    }
    let key = (quantize(interface.n0()), quantize(z));
    if let Some(w) = aux_cache().lock().unwrap().get(&key) {
        return Ok(*w);
    }
    let w = aux_weights_uncached(interface, z, spec)?;
    aux_cache().lock().unwrap().insert(key, w);
    Ok(w)
}

/// Normalized decay rates $c_\parallel(z), c_\perp(z)$ of dipoles oscillating
/// parallel/perpendicular to the surface; both tend to 1 far from the wall.
pub fn one_point_rates(interface: &Interface, z: f64) -> Result<OnePointRates> {
    let w = weights(interface, z, 0.0, &QuadratureSpec::default())?;
    Ok(OnePointRates {
        c_par: 1.0 + w.c0 - w.q0 / 3.0,
        c_perp: 1.0 + w.c0 + 2.0 * w.q0 / 3.0,
    })
}

/// First and second z-derivatives of the one-point rates, from analytic
/// differentiation of the phase under the Sommerfeld integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RateDerivatives {
    pub c_par_z1: f64,
    pub c_par_z2: f64,
    pub c_perp_z1: f64,
    pub c_perp_z2: f64,
}

pub(crate) fn rate_derivatives(interface: &Interface, z: f64) -> Result<RateDerivatives> {
    let aux = aux_weights(interface, z, &QuadratureSpec::default())?;
    Ok(RateDerivatives {
        c_par_z1: aux.c0_z1 - aux.q0_z1 / 3.0,
        c_par_z2: aux.c0_z2 - aux.q0_z2 / 3.0,
        c_perp_z1: aux.c0_z1 + 2.0 * aux.q0_z1 / 3.0,
        c_perp_z2: aux.c0_z2 + 2.0 * aux.q0_z2 / 3.0,
    })
}

/// Spherical Bessel j0 and the ratio j1(x)/x, series-stabilized near 0.
fn spherical_j0_j1_ratio(x: f64) -> (f64, f64) {
    if x < 0.35 {
        let x2 = x * x;
        let j0 = 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
        let j1r =
            1.0 / 3.0 - x2 / 30.0 * (1.0 - x2 / 28.0 * (1.0 - x2 / 54.0 * (1.0 - x2 / 88.0)));
        (j0, j1r)
    } else {
        let (s, c) = x.sin_cos();
        (s / x, (s - x * c) / (x * x * x))
    }
}

/// The free-space correlation tensor $C_\infty^{ij}({\bf s})$.
///
/// `Exact` evaluates the closed form of the solid-angle mode integral;
/// `Taylor2` returns the second-order truncation used by the production
/// force/diffusion expressions.  Both are real; the complex return type
/// matches the general two-point tensor interface.
pub fn free_space_tensor(s: [f64; 3], order: ExpansionOrder) -> [[Complex64; 3]; 3] {
    let s2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    match order {
        ExpansionOrder::Taylor2 => {
            for i in 0..3 {
                for j in 0..3 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    let val = (1.0 - 7.0 / 30.0 * s2) * delta
                        - 0.1 * (s[i] * s[j] - s2 * delta / 3.0);
                    out[i][j] = Complex64::new(val, 0.0);
                }
            }
        }
        ExpansionOrder::Exact => {
            let x = s2.sqrt();
            let (j0, j1r) = spherical_j0_j1_ratio(x);
            let transverse = 1.5 * (j0 - j1r);
            let longitudinal = 3.0 * j1r;
            let shat = if x > 0.0 {
                [s[0] / x, s[1] / x, s[2] / x]
            } else {
                [0.0; 3]
            };
            for i in 0..3 {
                for j in 0..3 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    let proj = shat[i] * shat[j];
                    out[i][j] = Complex64::new(
                        transverse * (delta - proj) + longitudinal * proj,
                        0.0,
                    );
                }
            }
        }
    }
    out
}

/// The interface part $C_{int}^{ij}(z; {\bf s}_\parallel)$ assembled from the
/// weight functions (real tensor; `s_par` is the in-plane separation vector).
pub fn interface_tensor(
    interface: &Interface,
    z: f64,
    s_par: [f64; 2],
    spec: &QuadratureSpec,
) -> Result<[[f64; 3]; 3]> {
    let s_norm = (s_par[0] * s_par[0] + s_par[1] * s_par[1]).sqrt();
    let w = weights(interface, z, s_norm, spec)?;
    let s = [s_par[0], s_par[1], 0.0];
    let s2 = s_norm * s_norm;
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            let dz_i = if i == 2 { 1.0 } else { 0.0 };
            let dz_j = if j == 2 { 1.0 } else { 0.0 };
            out[i][j] = w.c0 * delta
                + w.a1 * (dz_i * s[j] - s[i] * dz_j)
                + w.q0 * (dz_i * dz_j - delta / 3.0)
                + w.q2 * (s[i] * s[j] - 0.5 * s2 * (delta - dz_i * dz_j));
        }
    }
    Ok(out)
}

/// Full two-point tensor $C^{ij} = C_\infty({\bf s}) + C_{int}(z; {\bf
/// s}_\parallel)$ with both points at the common height `z` (the interface
/// part depends on $z_1+z_2$ only, hence carries no $s_z$ dependence).
pub fn two_point_tensor(
    interface: &Interface,
    z: f64,
    s: [f64; 3],
    order: ExpansionOrder,
    spec: &QuadratureSpec,
) -> Result<[[Complex64; 3]; 3]> {
    let mut out = free_space_tensor(s, order);
    let cint = interface_tensor(interface, z, [s[0], s[1]], spec)?;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += cint[i][j];
        }
    }
    Ok(out)
}

/// Taylor data (value, gradient, Hessian in ${\bf s}$) of the full
/// correlation tensor at coincidence, with the free-space part at
/// `Taylor2` order (the truncation the semiclassical formulas use).
///
/// The interface s-derivatives are obtained by differentiating the Bessel
/// kernels under the integral sign, not by finite differences.
pub fn correlation_taylor(
    interface: &Interface,
    z: f64,
    spec: &QuadratureSpec,
) -> Result<CorrelationTaylor> {
    let w = weights(interface, z, 0.0, spec)?;
    let aux = aux_weights(interface, z, spec)?;

    let c_par = 1.0 + w.c0 - w.q0 / 3.0;
    let c_perp = 1.0 + w.c0 + 2.0 * w.q0 / 3.0;
    let mut c0 = [[0.0; 3]; 3];
    c0[0][0] = c_par;
    c0[1][1] = c_par;
    c0[2][2] = c_perp;

    // Gradient: only the axial interface term is odd in s, and it involves
    // in-plane derivative directions only.
    let mut d1 = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..2 {
                let dz_i = if i == 2 { 1.0 } else { 0.0 };
                let dz_j = if j == 2 { 1.0 } else { 0.0 };
                let dik = if i == k { 1.0 } else { 0.0 };
                let djk = if j == k { 1.0 } else { 0.0 };
                d1[i][j][k] = aux.a1_0 * (dz_i * djk - dik * dz_j);
            }
        }
    }

    let mut d2 = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            let dz_i = if i == 2 { 1.0 } else { 0.0 };
            let dz_j = if j == 2 { 1.0 } else { 0.0 };
            // In-plane projector δ^{ij} − δ^{zi}δ^{zj}.
            let plane_ij = delta - dz_i * dz_j;
            for k in 0..3 {
                for l in 0..3 {
                    let dkl = if k == l { 1.0 } else { 0.0 };
                    let dik = if i == k { 1.0 } else { 0.0 };
                    let djl = if j == l { 1.0 } else { 0.0 };
                    let dil = if i == l { 1.0 } else { 0.0 };
                    let djk = if j == k { 1.0 } else { 0.0 };
                    // Free-space second-order coefficients.
                    let mut v = -0.4 * delta * dkl - 0.1 * (dik * djl + dil * djk);
                    // Interface curvature: in-plane derivative directions only.
                    if k < 2 && l < 2 {
                        let tik = if i == k { 1.0 } else { 0.0 }; // i<2 implied by i==k<2
                        let tjl = if j == l { 1.0 } else { 0.0 };
                        let til = if i == l { 1.0 } else { 0.0 };
                        let tjk = if j == k { 1.0 } else { 0.0 };
                        v += 2.0 * aux.c0_s2 * dkl * delta
                            + 2.0 * aux.q0_s2 * dkl * (dz_i * dz_j - delta / 3.0)
                            + aux.q2_0 * (tik * tjl + til * tjk - dkl * plane_ij);
                    }
                    d2[i][j][k][l] = v;
                }
            }
        }
    }

    Ok(CorrelationTaylor { c0, d1, d2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn glass() -> Interface {
        Interface::new(1.5).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn vacuum_weights_vanish() {
        let vac = Interface::new(1.0).unwrap();
        let w = weights(&vac, 0.7, 0.3, &spec()).unwrap();
        assert_eq!(w, CorrelationWeights { c0: 0.0, q0: 0.0, a1: 0.0, q2: 0.0 });
        let r = one_point_rates(&vac, 1.0).unwrap();
        assert_eq!((r.c_par, r.c_perp), (1.0, 1.0));
    }

    #[test]
    fn weights_decay_far_from_surface() {
        let w = weights(&glass(), 10.0, 0.0, &spec()).unwrap();
        for v in [w.c0, w.q0, w.a1, w.q2] {
            assert!(v.abs() < 0.02, "weight {v} too large at kz=10");
        }
        let r = one_point_rates(&glass(), 10.0).unwrap();
        assert!((r.c_par - 1.0).abs() < 0.02);
        assert!((r.c_perp - 1.0).abs() < 0.02);
    }

    #[test]
    fn rates_identity() {
        for &z in &[0.0, 0.3, 1.0, 2.5] {
            let w = weights(&glass(), z, 0.0, &spec()).unwrap();
            let r = one_point_rates(&glass(), z).unwrap();
            assert_abs_diff_eq!(r.c_perp - r.c_par, w.q0, epsilon = 1e-12);
            // Trace of C0 = 2c_par + c_perp = 3 + 3c0.
            assert_abs_diff_eq!(
                2.0 * r.c_par + r.c_perp,
                3.0 + 3.0 * w.c0,
                epsilon = 1e-12
            );
            assert!(r.c_par >= 0.0 && r.c_perp >= 0.0);
        }
    }

    #[test]
    fn cache_and_direct_paths_agree() {
        let tight = QuadratureSpec {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            max_subdivisions: 4000,
        };
        let a = weights(&glass(), 0.8, 0.4, &spec()).unwrap();
        let b = weights(&glass(), 0.8, 0.4, &tight).unwrap();
        assert_abs_diff_eq!(a.c0, b.c0, epsilon = 1e-9);
        assert_abs_diff_eq!(a.q0, b.q0, epsilon = 1e-9);
        assert_abs_diff_eq!(a.a1, b.a1, epsilon = 1e-9);
        assert_abs_diff_eq!(a.q2, b.q2, epsilon = 1e-9);
    }

    #[test]
    fn free_space_at_coincidence_is_identity() {
        for order in [ExpansionOrder::Exact, ExpansionOrder::Taylor2] {
            let c = free_space_tensor([0.0; 3], order);
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(c[i][j].re, want, epsilon = 1e-14);
                    assert_abs_diff_eq!(c[i][j].im, 0.0, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn taylor2_coefficients() {
        // Isotropic s² coefficient −7/30 and quadrupole coefficient −1/10.
        let s = 1e-3;
        let c = free_space_tensor([s, 0.0, 0.0], ExpansionOrder::Taylor2);
        // yy: isotropic only: 1 − (7/30)s² + (1/30)s²·... full: 1 − (7/30)s² + (1/10)s²/3.
        let iso = 1.0 - 7.0 / 30.0 * s * s + 0.1 * s * s / 3.0;
        assert_abs_diff_eq!(c[1][1].re, iso, epsilon = 1e-15);
        // xx picks up the −(1/10)s_x s_x quadrupole on top.
        assert_abs_diff_eq!(c[0][0].re, iso - 0.1 * s * s, epsilon = 1e-15);
        assert_abs_diff_eq!(c[0][1].re, 0.0, epsilon = 1e-18);
    }

    #[test]
    fn exact_free_space_trace_is_sinc() {
        // Trace C_∞ = 3 j0(s) = 3 sin(s)/s.
        for &x in &[0.3, 1.0, 2.0, 5.0] {
            let c = free_space_tensor([x / 3.0_f64.sqrt(); 3], ExpansionOrder::Exact);
            let tr = c[0][0].re + c[1][1].re + c[2][2].re;
            assert_abs_diff_eq!(tr, 3.0 * x.sin() / x, epsilon = 1e-12);
        }
    }

    #[test]
    fn exact_free_space_matches_solid_angle_quadrature() {
        // Independent oracle: C_∞^{ij} = (3/8π)∫dΩ (δ^{ij} − n_i n_j) e^{i n·s}
        // by brute-force 2-D quadrature in (cosθ, φ).
        let s = [0.7, -0.4, 1.1];
        let n_ct = 80;
        let n_phi = 160;
        let mut acc = [[Complex64::new(0.0, 0.0); 3]; 3];
        // Midpoint rule is spectrally accurate in φ; Gauss–Legendre-free
        // midpoint in cosθ converges ~1/N² — use many points.
        let n_ct = n_ct * 8;
        for a in 0..n_ct {
            let ct = -1.0 + (a as f64 + 0.5) * 2.0 / n_ct as f64;
            let st = (1.0 - ct * ct).sqrt();
            for b in 0..n_phi {
                let phi = (b as f64 + 0.5) * 2.0 * std::f64::consts::PI / n_phi as f64;
                let n = [st * phi.cos(), st * phi.sin(), ct];
                let dot = n[0] * s[0] + n[1] * s[1] + n[2] * s[2];
                let ph = Complex64::new(0.0, dot).exp();
                for i in 0..3 {
                    for j in 0..3 {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        acc[i][j] += (delta - n[i] * n[j]) * ph;
                    }
                }
            }
        }
        let norm = 3.0 / (8.0 * std::f64::consts::PI)
            * (2.0 / n_ct as f64)
            * (2.0 * std::f64::consts::PI / n_phi as f64);
        let c = free_space_tensor(s, ExpansionOrder::Exact);
        for i in 0..3 {
            for j in 0..3 {
                let want = acc[i][j] * norm;
                assert_abs_diff_eq!(c[i][j].re, want.re, epsilon = 1e-6);
                assert_abs_diff_eq!(c[i][j].im, want.im, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn interface_tensor_structure() {
        let z = 0.5;
        let s = [0.8, 0.0];
        let c = interface_tensor(&glass(), z, s, &spec()).unwrap();
        // Axial antisymmetry of the (z,x) block.
        assert_abs_diff_eq!(c[2][0], -c[0][2], epsilon = 1e-14);
        // y is a symmetry axis for s ∥ e_x: no xy or zy mixing.
        assert_abs_diff_eq!(c[0][1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[1][0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[1][2], 0.0, epsilon = 1e-14);
        // Rotating s in the plane rotates the tensor: compare invariants.
        let ang = 0.9_f64;
        let (sn, cs) = ang.sin_cos();
        let c_rot = interface_tensor(&glass(), z, [s[0] * cs, s[0] * sn], &spec()).unwrap();
        let tr: f64 = (0..3).map(|i| c[i][i]).sum();
        let tr_rot: f64 = (0..3).map(|i| c_rot[i][i]).sum();
        assert_abs_diff_eq!(tr, tr_rot, epsilon = 1e-10);
        assert_abs_diff_eq!(c[2][2], c_rot[2][2], epsilon = 1e-10);
    }

    #[test]
    fn taylor_value_and_gradient() {
        let z = 0.5;
        let t = correlation_taylor(&glass(), z, &spec()).unwrap();
        let r = one_point_rates(&glass(), z).unwrap();
        assert_abs_diff_eq!(t.c0[0][0], r.c_par, epsilon = 1e-12);
        assert_abs_diff_eq!(t.c0[1][1], r.c_par, epsilon = 1e-12);
        assert_abs_diff_eq!(t.c0[2][2], r.c_perp, epsilon = 1e-12);
        assert_abs_diff_eq!(t.c0[0][1], 0.0, epsilon = 1e-15);

        let aux = aux_weights(&glass(), z, &spec()).unwrap();
        // Axial gradient components: ∂C^{zx}/∂s_x = a1(z;0) = −∂C^{xz}/∂s_x.
        assert_abs_diff_eq!(t.d1[2][0][0], aux.a1_0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.d1[0][2][0], -aux.a1_0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.d1[2][1][1], aux.a1_0, epsilon = 1e-14);
        // No z-derivative components and no purely in-plane gradients.
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(t.d1[i][j][2], 0.0);
            }
        }
        assert_eq!(t.d1[0][0][0], 0.0);
        assert_eq!(t.d1[0][1][0], 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let z = 0.5;
        let t = correlation_taylor(&glass(), z, &spec()).unwrap();
        let h = 1e-4;
        for k in 0..2 {
            let mut sp = [0.0, 0.0, 0.0];
            sp[k] = h;
            let mut sm = [0.0, 0.0, 0.0];
            sm[k] = -h;
            let cp = two_point_tensor(&glass(), z, sp, ExpansionOrder::Taylor2, &spec()).unwrap();
            let cm = two_point_tensor(&glass(), z, sm, ExpansionOrder::Taylor2, &spec()).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let fd = (cp[i][j].re - cm[i][j].re) / (2.0 * h);
                    assert_abs_diff_eq!(t.d1[i][j][k], fd, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let z = 0.5;
        let t = correlation_taylor(&glass(), z, &spec()).unwrap();
        let h = 1e-3;
        let tensor = |s: [f64; 3]| {
            two_point_tensor(&glass(), z, s, ExpansionOrder::Taylor2, &spec()).unwrap()
        };
        for k in 0..3 {
            for l in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        let fd = if k == l {
                            let mut sp = [0.0; 3];
                            sp[k] = h;
                            let mut sm = [0.0; 3];
                            sm[k] = -h;
                            (tensor(sp)[i][j].re - 2.0 * tensor([0.0; 3])[i][j].re
                                + tensor(sm)[i][j].re)
                                / (h * h)
                        } else {
                            let mut spp = [0.0; 3];
                            spp[k] = h;
                            spp[l] = h;
                            let mut spm = [0.0; 3];
                            spm[k] = h;
                            spm[l] = -h;
                            let mut smp = [0.0; 3];
                            smp[k] = -h;
                            smp[l] = h;
                            let mut smm = [0.0; 3];
                            smm[k] = -h;
                            smm[l] = -h;
                            (tensor(spp)[i][j].re - tensor(spm)[i][j].re
                                - tensor(smp)[i][j].re
                                + tensor(smm)[i][j].re)
                                / (4.0 * h * h)
                        };
                        let diff = (t.d2[i][j][k][l] - fd).abs();
                        let scale = t.d2[i][j][k][l].abs().max(1.0);
                        assert!(
                            diff / scale < 1e-5,
                            "D2[{i}][{j}][{k}][{l}] = {} vs FD {fd}",
                            t.d2[i][j][k][l]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn z_derivatives_match_finite_differences() {
        let z = 0.7;
        let d = rate_derivatives(&glass(), z).unwrap();
        let h = 1e-4;
        let rp = one_point_rates(&glass(), z + h).unwrap();
        let rm = one_point_rates(&glass(), z - h).unwrap();
        let r0 = one_point_rates(&glass(), z).unwrap();
        assert_abs_diff_eq!(
            d.c_par_z1,
            (rp.c_par - rm.c_par) / (2.0 * h),
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            d.c_perp_z1,
            (rp.c_perp - rm.c_perp) / (2.0 * h),
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            d.c_par_z2,
            (rp.c_par - 2.0 * r0.c_par + rm.c_par) / (h * h),
            epsilon = 1e-4
        );
        assert_abs_diff_eq!(
            d.c_perp_z2,
            (rp.c_perp - 2.0 * r0.c_perp + rm.c_perp) / (h * h),
            epsilon = 1e-4
        );
    }

    #[test]
    fn vacuum_taylor_reduces_to_free_space() {
        let vac = Interface::new(1.0).unwrap();
        let t = correlation_taylor(&vac, 0.5, &spec()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(t.c0[i][j], want, epsilon = 1e-14);
                for k in 0..3 {
                    assert_eq!(t.d1[i][j][k], 0.0);
                    for l in 0..3 {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        let dkl = if k == l { 1.0 } else { 0.0 };
                        let dik = if i == k { 1.0 } else { 0.0 };
                        let djl = if j == l { 1.0 } else { 0.0 };
                        let dil = if i == l { 1.0 } else { 0.0 };
                        let djk = if j == k { 1.0 } else { 0.0 };
                        let want = -0.4 * delta * dkl - 0.1 * (dik * djl + dil * djk);
                        assert_abs_diff_eq!(t.d2[i][j][k][l], want, epsilon = 1e-14);
                    }
                }
            }
        }
    }
}
