//! Adaptive Gauss–Legendre quadrature and the Sommerfeld integral driver.
//!
//! The correlation weights are integrals over the transverse wavenumber
//! $u \in [0, n_0]$ with integrable inverse-square-root singularities at
//! $u = 1$ and $u = n_0$.  Both are removed analytically:
//!
//! * propagating segment $u \in [0,1]$: $u = \sin\theta$, $v = \cos\theta$,
//!   $\theta \in [0, \pi/2]$, so $u\,du/v = \sin\theta\,d\theta$;
//! * evanescent segment $u \in [1, n_0]$: $t = \sqrt{u^2-1} = t_m \sin\varphi$
//!   with $t_m = \sqrt{n_0^2-1}$, so $v = it$ and
//!   $u\,du/v = -i\,t_m \cos\varphi\,d\varphi$.
//!
//! The transformed integrands are smooth and plain adaptive Gauss–Legendre
//! converges to machine precision.

pub mod bessel;

use num_complex::Complex64;

use crate::{Error, Result};

pub use bessel::{bessel_j, bessel_ratio_limits};

/// Tolerances and budget for the adaptive quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Relative tolerance on the accumulated integral.
    pub rel_tol: f64,
    /// Absolute tolerance floor.
    pub abs_tol: f64,
    /// Maximum number of interval bisections before giving up.
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::InvalidConfig(format!(
                "quadrature spec must have rel_tol > 0, abs_tol > 0, max_subdivisions >= 1 \
                 (got {:.3e}, {:.3e}, {})",
                self.rel_tol, self.abs_tol, self.max_subdivisions
            )));
        }
        Ok(())
    }
}

/// Which $u$-segment of the Sommerfeld integral to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    /// $u \in [0, 1]$: propagating incident modes, $v = \sqrt{1-u^2}$ real.
    Propagating,
    /// $u \in [1, n_0]$: totally reflected modes, $v = i\sqrt{u^2-1}$.
    Evanescent,
}

/// Integration measure carried by the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// $u\,du/v$ — the natural measure of the correlation integrals.  The
    /// $1/v$ singularity at $u=1$ cancels against the substitution Jacobian.
    UDuOverV,
    /// Plain $du$.
    Du,
}

/// A kernel over one $u$-segment.  The kernel receives $(u, v)$ with the
/// complex continuation $v = i\sqrt{u^2-1}$ on the evanescent segment and
/// must be smooth on the open segment.
pub struct SommerfeldIntegrand<F>
where
    F: Fn(f64, Complex64) -> Complex64,
{
    pub kernel: F,
    pub segment: Segment,
    pub measure: Measure,
}

const GL_LOW: usize = 7;
const GL_HIGH: usize = 15;

/// Gauss–Legendre nodes/weights on [-1, 1], computed by Newton iteration on
/// the Legendre recurrence (no tables needed for the handful of orders used).
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence: P_k and P_{k-1} at x.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

struct GlRule {
    lo_nodes: Vec<f64>,
    lo_weights: Vec<f64>,
    hi_nodes: Vec<f64>,
    hi_weights: Vec<f64>,
}

fn gl_rule() -> &'static GlRule {
    use std::sync::OnceLock;
    static RULE: OnceLock<GlRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let (lo_nodes, lo_weights) = gauss_legendre(GL_LOW);
        let (hi_nodes, hi_weights) = gauss_legendre(GL_HIGH);
        GlRule {
            lo_nodes,
            lo_weights,
            hi_nodes,
            hi_weights,
        }
    })
}

fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let rule = gl_rule();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut hi = Complex64::new(0.0, 0.0);
    for (&x, &w) in rule.hi_nodes.iter().zip(&rule.hi_weights) {
        hi += w * f(mid + half * x);
    }
    hi *= half;
    let mut lo = Complex64::new(0.0, 0.0);
    for (&x, &w) in rule.lo_nodes.iter().zip(&rule.lo_weights) {
        lo += w * f(mid + half * x);
    }
    lo *= half;
    (hi, (hi - lo).norm())
}

/// Globally adaptive quadrature of a complex-valued function on `[a, b]`.
///
/// Each panel is evaluated with nested 7/15-point Gauss–Legendre rules; the
/// panel with the largest error estimate is bisected until the summed error
/// estimate meets `max(abs_tol, rel_tol * |I|)`.
pub fn integrate_complex<F>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidDomain(format!(
            "integration bounds must be finite (got [{a}, {b}])"
        )));
    }
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }

    // (error, a, b, value); ordered heap on the error estimate.
    struct Panel {
        err: f64,
        a: f64,
        b: f64,
        val: Complex64,
    }
    let (v, e) = panel(f, a, b);
    let mut panels = vec![Panel {
        err: e,
        a,
        b,
        val: v,
    }];

    for _ in 0..spec.max_subdivisions {
        let total: Complex64 = panels.iter().map(|p| p.val).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        let tol = spec.abs_tol.max(spec.rel_tol * total.norm());
        if err <= tol {
            return Ok(total);
        }
        // Split the worst panel.
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("panel list is never empty");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Interval has collapsed to machine precision; accept as-is.
            panels.push(Panel { err: 0.0, ..p });
            continue;
        }
        let (v1, e1) = panel(f, p.a, mid);
        let (v2, e2) = panel(f, mid, p.b);
        panels.push(Panel {
            err: e1,
            a: p.a,
            b: mid,
            val: v1,
        });
        panels.push(Panel {
            err: e2,
            a: mid,
            b: p.b,
            val: v2,
        });
    }

    let total: Complex64 = panels.iter().map(|p| p.val).sum();
    let err: f64 = panels.iter().map(|p| p.err).sum();
    let tol = spec.abs_tol.max(spec.rel_tol * total.norm());
    if err <= tol {
        Ok(total)
    } else {
        Err(Error::NonConvergence {
            achieved: err,
            requested: tol,
        })
    }
}

/// Evaluate one segment of a Sommerfeld integral with the singularity-removing
/// substitutions described in the module docs.  Gauss nodes are strictly
/// interior, so the kernel is never evaluated at $u = 1$ or $u = n_0$.
pub fn integrate_sommerfeld<F>(
    n0: f64,
    integrand: &SommerfeldIntegrand<F>,
    spec: &QuadratureSpec,
) -> Result<Complex64>
where
    F: Fn(f64, Complex64) -> Complex64,
{
    if !(n0 >= 1.0) {
        return Err(Error::InvalidDomain(format!(
            "refractive index must satisfy n0 >= 1 (got {n0})"
        )));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    match integrand.segment {
        Segment::Propagating => {
            // u = sin θ, v = cos θ.
            let f = |theta: f64| {
                let (s, c) = theta.sin_cos();
                let v = Complex64::new(c, 0.0);
                let jac = match integrand.measure {
                    Measure::UDuOverV => Complex64::new(s, 0.0), // u du/v = sinθ dθ
                    Measure::Du => Complex64::new(c, 0.0),       // du = cosθ dθ
                };
                (integrand.kernel)(s, v) * jac
            };
            integrate_complex(&f, 0.0, half_pi, spec)
        }
        Segment::Evanescent => {
            if n0 == 1.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let t_max = (n0 * n0 - 1.0).sqrt();
            // t = t_max sin φ, u = √(1+t²), v = it.
            let f = |phi: f64| {
                let (s, c) = phi.sin_cos();
                let t = t_max * s;
                let u = (1.0 + t * t).sqrt();
                let v = Complex64::new(0.0, t);
                let jac = match integrand.measure {
                    // u du/v = -i dt = -i t_max cosφ dφ
                    Measure::UDuOverV => Complex64::new(0.0, -t_max * c),
                    // du = (t/u) dt = (t/u) t_max cosφ dφ
                    Measure::Du => Complex64::new(t / u * t_max * c, 0.0),
                };
                (integrand.kernel)(u, v) * jac
            };
            integrate_complex(&f, 0.0, half_pi, spec)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one(_u: f64, _v: Complex64) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [3, 7, 15, 31] {
            let (x, w) = gauss_legendre(n);
            let sum: f64 = w.iter().sum();
            assert_abs_diff_eq!(sum, 2.0, epsilon = 1e-14);
            for i in 1..n {
                assert!(x[i] > x[i - 1]);
            }
            // Exactness on a high-degree monomial: ∫_{-1}^{1} x^{2n-2} dx.
            let p = 2 * n - 2;
            let num: f64 = x
                .iter()
                .zip(&w)
                .map(|(&xi, &wi)| wi * xi.powi(p as i32))
                .sum();
            assert_abs_diff_eq!(num, 2.0 / (p as f64 + 1.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn integrates_smooth_function() {
        let spec = QuadratureSpec::default();
        // ∫_0^π e^{ix} dx = 2i
        let f = |x: f64| Complex64::new(0.0, x).exp();
        let v = integrate_complex(&f, 0.0, std::f64::consts::PI, &spec).unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn integrates_oscillatory_function() {
        let spec = QuadratureSpec::default();
        // ∫_0^10 cos(20x) dx = sin(200)/20
        let f = |x: f64| Complex64::new((20.0 * x).cos(), 0.0);
        let v = integrate_complex(&f, 0.0, 10.0, &spec).unwrap();
        assert_abs_diff_eq!(v.re, (200.0_f64).sin() / 20.0, epsilon = 1e-11);
    }

    #[test]
    fn propagating_singular_measure() {
        // ∫_0^1 u/√(1-u²) du = 1 with unit kernel and the u du/v measure.
        let spec = QuadratureSpec::default();
        let integrand = SommerfeldIntegrand {
            kernel: one,
            segment: Segment::Propagating,
            measure: Measure::UDuOverV,
        };
        let v = integrate_sommerfeld(1.5, &integrand, &spec).unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn evanescent_singular_measure() {
        // ∫ u du/v with unit kernel = ∫ -i dt = -i t_max.
        let n0 = 1.5_f64;
        let spec = QuadratureSpec::default();
        let integrand = SommerfeldIntegrand {
            kernel: one,
            segment: Segment::Evanescent,
            measure: Measure::UDuOverV,
        };
        let v = integrate_sommerfeld(n0, &integrand, &spec).unwrap();
        let t_max = (n0 * n0 - 1.0_f64).sqrt();
        assert_abs_diff_eq!(v.im, -t_max, epsilon = 1e-12);

        // And the plain-du measure against the closed form √1.25.
        let kernel2 = |u: f64, _v: Complex64| Complex64::new(u / (n0 * n0 - u * u).sqrt(), 0.0);
        let integrand2 = SommerfeldIntegrand {
            kernel: kernel2,
            segment: Segment::Evanescent,
            measure: Measure::Du,
        };
        let v2 = integrate_sommerfeld(n0, &integrand2, &spec).unwrap();
        assert_abs_diff_eq!(v2.re, 1.25_f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn evanescent_segment_empty_for_vacuum() {
        let spec = QuadratureSpec::default();
        let integrand = SommerfeldIntegrand {
            kernel: one,
            segment: Segment::Evanescent,
            measure: Measure::UDuOverV,
        };
        let v = integrate_sommerfeld(1.0, &integrand, &spec).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_bad_index() {
        let spec = QuadratureSpec::default();
        let integrand = SommerfeldIntegrand {
            kernel: one,
            segment: Segment::Propagating,
            measure: Measure::Du,
        };
        assert!(matches!(
            integrate_sommerfeld(0.9, &integrand, &spec),
            Err(Error::InvalidDomain(_))
        ));
    }

    #[test]
    fn tolerance_halving_is_stable() {
        let f = |x: f64| Complex64::new((5.0 * x).sin() * (-x).exp() / (x + 0.1).sqrt(), 0.0);
        let loose = QuadratureSpec {
            rel_tol: 1e-8,
            ..Default::default()
        };
        let tight = QuadratureSpec {
            rel_tol: 5e-9,
            ..Default::default()
        };
        let a = integrate_complex(&f, 0.0, 4.0, &loose).unwrap();
        let b = integrate_complex(&f, 0.0, 4.0, &tight).unwrap();
        assert!((a - b).norm() <= loose.rel_tol * a.norm() + loose.abs_tol);
    }

    #[test]
    fn interior_nodes_only() {
        // The kernel divides by √(1-u²) and √(n0²-u²); any endpoint
        // evaluation would produce an infinity and poison the result.
        let n0 = 1.5_f64;
        let spec = QuadratureSpec::default();
        let kernel = |u: f64, _v: Complex64| {
            let d = (1.0 - u * u).abs().sqrt() * (n0 * n0 - u * u).sqrt();
            assert!(d > 0.0, "kernel evaluated at a segment endpoint");
            Complex64::new(1.0 / d.min(1e6), 0.0)
        };
        for segment in [Segment::Propagating, Segment::Evanescent] {
            let integrand = SommerfeldIntegrand {
                kernel,
                segment,
                measure: Measure::Du,
            };
            let v = integrate_sommerfeld(n0, &integrand, &spec).unwrap();
            assert!(v.re.is_finite());
        }
    }

    #[test]
    fn nonconvergence_is_reported() {
        let spec = QuadratureSpec {
            rel_tol: 1e-14,
            abs_tol: 1e-300,
            max_subdivisions: 3,
        };
        // Nasty kink forces subdivision beyond the tiny budget.
        let f = |x: f64| Complex64::new((x - 0.3712).abs().sqrt(), 0.0);
        assert!(matches!(
            integrate_complex(&f, 0.0, 1.0, &spec),
            Err(Error::NonConvergence { .. })
        ));
    }
}
