//! Fresnel coefficients of the vacuum–dielectric half-space and the
//! evanescent driving-field geometry.
//!
//! The dielectric (real index $n_0 \ge 1$) fills $z < 0$; vacuum is above.
//! All wavevector components are in units of the resonant $k$.  For a mode of
//! transverse wavenumber $u$, the vertical components are
//! $v = \sqrt{1-u^2}$ above (continued as $i\sqrt{u^2-1}$ for $u>1$, so the
//! field decays upward) and $w = \sqrt{n_0^2-u^2}$ inside the dielectric.

use num_complex::Complex64;

use crate::{Error, Result};

/// A flat vacuum–dielectric interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    n0: f64,
}

impl Interface {
    /// Create an interface with refractive index `n0 >= 1`.
    pub fn new(n0: f64) -> Result<Self> {
        if !(n0 >= 1.0) || !n0.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "refractive index must satisfy n0 >= 1 (got {n0})"
            )));
        }
        Ok(Interface { n0 })
    }

    /// Refractive index of the lower half-space.
    pub fn n0(&self) -> f64 {
        self.n0
    }
}

/// Mode polarization relative to the plane of incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Te,
    Tm,
}

/// Amplitude reflection and transmission coefficients.
#[derive(Debug, Clone, Copy)]
pub struct FresnelCoefficients {
    pub r: Complex64,
    pub t: Complex64,
}

/// Vertical wavenumber above the interface: $v = \sqrt{1-u^2}$ for $u \le 1$,
/// $i\sqrt{u^2-1}$ for $u > 1$ (decaying upward).
pub(crate) fn v_of_u(u: f64) -> Complex64 {
    if u <= 1.0 {
        Complex64::new((1.0 - u * u).sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (u * u - 1.0).sqrt())
    }
}

/// Reflection coefficient only (infallible inner path for quadrature
/// kernels, where `u` is in range by construction).
pub(crate) fn reflection(n0: f64, u: f64, pol: Polarization) -> Complex64 {
    let v = v_of_u(u);
    let w = (n0 * n0 - u * u).sqrt();
    match pol {
        Polarization::Te => (v - w) / (v + w),
        Polarization::Tm => (n0 * n0 * v - w) / (n0 * n0 * v + w),
    }
}

fn transmission(n0: f64, u: f64, pol: Polarization) -> Complex64 {
    let v = v_of_u(u);
    let w = (n0 * n0 - u * u).sqrt();
    match pol {
        Polarization::Te => 2.0 * w / (v + w),
        Polarization::Tm => 2.0 * n0 * w / (n0 * n0 * v + w),
    }
}

/// Fresnel coefficients for a mode incident from inside the dielectric with
/// transverse wavenumber `u` (units of k).
///
/// `r` is real for `u <= 1` and unimodular for `1 < u < n0` (total internal
/// reflection); `t` is the amplitude transmitted into the vacuum side.
pub fn fresnel(interface: &Interface, u: f64, pol: Polarization) -> Result<FresnelCoefficients> {
    let n0 = interface.n0;
    if !(0.0..=n0).contains(&u) {
        return Err(Error::InvalidDomain(format!(
            "transverse wavenumber must lie in [0, n0] = [0, {n0}] (got {u})"
        )));
    }
    Ok(FresnelCoefficients {
        r: reflection(n0, u, pol),
        t: transmission(n0, u, pol),
    })
}

/// Residual of the polarization-resolved energy/overlap identities tying
/// `r` and `t` together:
///
/// * `u < 1`:  |√((1−u²)/(n0²−u²)) t² + r² − 1|
/// * `1 < u < n0`:  |√((u²−1)/(n0²−u²)) |t|² − 2 Im r|
///
/// Both vanish identically for the closed forms; the residual is a numerical
/// self-check.
pub fn fresnel_identity_check(interface: &Interface, u: f64, pol: Polarization) -> Result<f64> {
    let n0 = interface.n0;
    if !(0.0..=n0).contains(&u) || u == 1.0 {
        return Err(Error::InvalidDomain(format!(
            "identity check requires u in [0, n0] \\ {{1}} (got {u}, n0 = {n0})"
        )));
    }
    let fc = fresnel(interface, u, pol)?;
    let w2 = n0 * n0 - u * u;
    if u < 1.0 {
        let ratio = ((1.0 - u * u) / w2).sqrt();
        Ok((ratio * fc.t * fc.t + fc.r * fc.r - 1.0).norm())
    } else {
        let ratio = ((u * u - 1.0) / w2).sqrt();
        Ok((ratio * fc.t.norm_sqr() - 2.0 * fc.r.im).abs())
    }
}

/// Built-in polarizations of the evanescent driving wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolarizationPreset {
    /// ξ₀ = e_y.
    Te,
    /// ξ₀ = iκ e_x − Q e_z (unnormalized, |ξ₀|² = κ² + Q²).
    Tm,
    /// ξ₀ = ξ₀^{(TM)} + i ξ₀^{(TE)} — circular in the propagation sense.
    Circ,
    /// A user-supplied polarization vector.
    Custom([Complex64; 3]),
}

/// Geometry and strength of the evanescent driving field
/// ξ(r) = ξ₀ e^{−κz + iQx}.
///
/// The dispersion constraint Q² − κ² = 1 (k = 1) is enforced at
/// construction: the user supplies κ and Q is derived.
#[derive(Debug, Clone, PartialEq)]
pub struct EvanescentFieldConfig {
    kappa: f64,
    q: f64,
    xi0: [Complex64; 3],
    preset: PolarizationPreset,
    /// Laser detuning in linewidths, Δ/Γ∞ (sign included).
    pub detuning_ratio: f64,
    /// On-resonance saturation parameter s₀ at the reference intensity.
    pub s0: f64,
}

impl EvanescentFieldConfig {
    /// Build a field configuration.  `kappa > 0` fixes `Q = √(1+κ²)`.
    ///
    /// Whether the wave is realizable by total internal reflection in a
    /// given dielectric (`Q <= n0`) is checked separately by
    /// [`Self::check_launchable`], so that idealized-limit studies
    /// (e.g. `n0 = 1` reference curves) remain expressible.
    pub fn new(
        preset: PolarizationPreset,
        kappa: f64,
        s0: f64,
        detuning_ratio: f64,
    ) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "decay constant must be positive (got {kappa})"
            )));
        }
        let q = (1.0 + kappa * kappa).sqrt();
        if !(s0 > 0.0) || !s0.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "saturation parameter must be positive (got {s0})"
            )));
        }
        let i = Complex64::new(0.0, 1.0);
        let zero = Complex64::new(0.0, 0.0);
        let xi0 = match &preset {
            PolarizationPreset::Te => [zero, Complex64::new(1.0, 0.0), zero],
            PolarizationPreset::Tm => [i * kappa, zero, Complex64::new(-q, 0.0)],
            PolarizationPreset::Circ => [i * kappa, i, Complex64::new(-q, 0.0)],
            PolarizationPreset::Custom(v) => *v,
        };
        Ok(EvanescentFieldConfig {
            kappa,
            q,
            xi0,
            preset,
            detuning_ratio,
            s0,
        })
    }

    /// Verify Q <= n0, i.e. that the wave can actually be launched by total
    /// internal reflection inside the given dielectric.
    pub fn check_launchable(&self, interface: &Interface) -> Result<()> {
        if self.q > interface.n0 + 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "propagation constant Q = {:.6} exceeds n0 = {}; the evanescent wave \
                 cannot be launched from this dielectric",
                self.q, interface.n0
            )));
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Propagation constant Q = √(1+κ²).
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Polarization vector ξ₀ at the surface.
    pub fn xi0(&self) -> [Complex64; 3] {
        self.xi0
    }

    pub fn preset(&self) -> &PolarizationPreset {
        &self.preset
    }

    /// |ξ₀|².
    pub fn intensity0(&self) -> f64 {
        self.xi0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// e^{−2κz}, the local intensity relative to the surface.
    pub fn intensity_decay(&self, z: f64) -> f64 {
        (-2.0 * self.kappa * z).exp()
    }
}

/// The driving field ξ(r) = ξ₀ e^{−κz + iQx} at a point above the surface
/// (lengths in 1/k).
pub fn field_profile(cfg: &EvanescentFieldConfig, r: [f64; 3]) -> Result<[Complex64; 3]> {
    let (x, z) = (r[0], r[2]);
    if z < 0.0 {
        return Err(Error::InvalidDomain(format!(
            "field profile is defined above the surface only (z = {z})"
        )));
    }
    let phase = Complex64::new(-cfg.kappa * z, cfg.q * x).exp();
    Ok([cfg.xi0[0] * phase, cfg.xi0[1] * phase, cfg.xi0[2] * phase])
}

/// Field helicity h = Im(ξ₀* × ξ₀); the axis of the vector light shift.
pub fn helicity(cfg: &EvanescentFieldConfig) -> [f64; 3] {
    let x = cfg.xi0;
    let cross = [
        x[1].conj() * x[2] - x[2].conj() * x[1],
        x[2].conj() * x[0] - x[0].conj() * x[2],
        x[0].conj() * x[1] - x[1].conj() * x[0],
    ];
    [cross[0].im, cross[1].im, cross[2].im]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn iface() -> Interface {
        Interface::new(1.5).unwrap()
    }

    #[test]
    fn normal_incidence() {
        let fc = fresnel(&iface(), 0.0, Polarization::Te).unwrap();
        assert_abs_diff_eq!(fc.r.re, -0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(fc.t.re, 1.2, epsilon = 1e-15);
        let fc = fresnel(&iface(), 0.0, Polarization::Tm).unwrap();
        assert_abs_diff_eq!(fc.r.re, 0.2, epsilon = 1e-15);
    }

    #[test]
    fn grazing_vacuum_mode() {
        let fc = fresnel(&iface(), 1.0, Polarization::Te).unwrap();
        assert_abs_diff_eq!(fc.r.re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fc.r.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn total_internal_reflection_is_unimodular() {
        let n0 = 1.5;
        let iface = iface();
        let mut u = 1.0 + 1e-6;
        while u < n0 {
            for pol in [Polarization::Te, Polarization::Tm] {
                let fc = fresnel(&iface, u, pol).unwrap();
                assert_abs_diff_eq!(fc.r.norm(), 1.0, epsilon = 1e-12);
            }
            u += 0.05;
        }
    }

    #[test]
    fn continuity_across_critical_angle() {
        let iface = iface();
        for pol in [Polarization::Te, Polarization::Tm] {
            let below = fresnel(&iface, 1.0 - 1e-6, pol).unwrap();
            let above = fresnel(&iface, 1.0 + 1e-6, pol).unwrap();
            // r → -1 from both sides with a √|u-1| approach, so the gap
            // across a 2e-6 straddle is O(1e-3).
            assert!((below.r - above.r).norm() < 3e-2);
            assert!((below.t - above.t).norm() < 3e-2);
        }
    }

    #[test]
    fn vacuum_interface_is_transparent() {
        let iface = Interface::new(1.0).unwrap();
        for pol in [Polarization::Te, Polarization::Tm] {
            let fc = fresnel(&iface, 0.5, pol).unwrap();
            assert_abs_diff_eq!(fc.r.norm(), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(fc.t.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(
                fresnel_identity_check(&iface, 0.5, pol).unwrap(),
                0.0,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn identities_hold_on_both_segments() {
        let iface = iface();
        for pol in [Polarization::Te, Polarization::Tm] {
            for &u in &[0.0, 0.3, 0.5, 0.9, 0.999, 1.001, 1.2, 1.4, 1.499] {
                let res = fresnel_identity_check(&iface, u, pol).unwrap();
                assert!(res < 1e-12, "residual {res} at u = {u} ({pol:?})");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(fresnel(&iface(), 1.6, Polarization::Te).is_err());
        assert!(fresnel(&iface(), -0.1, Polarization::Te).is_err());
        assert!(fresnel_identity_check(&iface(), 1.0, Polarization::Te).is_err());
        assert!(Interface::new(0.9).is_err());
    }

    fn cfg(preset: PolarizationPreset) -> EvanescentFieldConfig {
        // κ = 1 ⇒ Q = √2, realizable for n0 = 1.5.
        EvanescentFieldConfig::new(preset, 1.0, 0.01, -100.0).unwrap()
    }

    #[test]
    fn dispersion_constraint() {
        let c = cfg(PolarizationPreset::Te);
        assert_abs_diff_eq!(c.q() * c.q() - c.kappa() * c.kappa(), 1.0, epsilon = 1e-12);
        // Q > n0 must be rejected when checked against the dielectric.
        let steep = EvanescentFieldConfig::new(PolarizationPreset::Te, 2.0, 0.01, -100.0).unwrap();
        assert!(steep.check_launchable(&iface()).is_err());
        assert!(c.check_launchable(&iface()).is_ok());
    }

    #[test]
    fn preset_vectors() {
        let te = cfg(PolarizationPreset::Te);
        assert_eq!(te.xi0()[1], Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(te.intensity0(), 1.0, epsilon = 1e-15);

        let tm = cfg(PolarizationPreset::Tm);
        let q = 2.0_f64.sqrt();
        assert_abs_diff_eq!(tm.xi0()[0].im, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(tm.xi0()[2].re, -q, epsilon = 1e-15);
        assert_abs_diff_eq!(tm.intensity0(), 1.0 + q * q, epsilon = 1e-14);

        let circ = cfg(PolarizationPreset::Circ);
        assert_abs_diff_eq!(circ.xi0()[1].im, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn profile_decays_and_propagates() {
        let te = cfg(PolarizationPreset::Te);
        let at0 = field_profile(&te, [0.0, 0.0, 0.0]).unwrap();
        assert_eq!(at0[1], Complex64::new(1.0, 0.0));
        let up = field_profile(&te, [0.0, 3.0, 2.0_f64.ln()]).unwrap();
        assert_abs_diff_eq!(up[1].re, 0.5, epsilon = 1e-14);
        let along = field_profile(&te, [1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(along[1].norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(along[1].arg(), 2.0_f64.sqrt(), epsilon = 1e-14);
        assert!(field_profile(&te, [0.0, 0.0, -0.1]).is_err());
    }

    #[test]
    fn helicities() {
        let q = 2.0_f64.sqrt();
        let h_te = helicity(&cfg(PolarizationPreset::Te));
        assert_eq!(h_te, [0.0, 0.0, 0.0]);

        let h_tm = helicity(&cfg(PolarizationPreset::Tm));
        assert_abs_diff_eq!(h_tm[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h_tm[1], -2.0 * q, epsilon = 1e-14);
        assert_abs_diff_eq!(h_tm[2], 0.0, epsilon = 1e-14);

        let h_c = helicity(&cfg(PolarizationPreset::Circ));
        assert_abs_diff_eq!(h_c[0], 2.0 * q, epsilon = 1e-14);
        assert_abs_diff_eq!(h_c[1], -2.0 * q, epsilon = 1e-14);
        assert_abs_diff_eq!(h_c[2], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn helicity_scales_quadratically() {
        let base = cfg(PolarizationPreset::Circ);
        let c = Complex64::new(0.3, -1.1);
        let scaled = EvanescentFieldConfig::new(
            PolarizationPreset::Custom([
                base.xi0()[0] * c,
                base.xi0()[1] * c,
                base.xi0()[2] * c,
            ]),
            1.0,
            0.01,
            -100.0,
        )
        .unwrap();
        let h0 = helicity(&base);
        let h1 = helicity(&scaled);
        for i in 0..3 {
            assert_abs_diff_eq!(h1[i], c.norm_sqr() * h0[i], epsilon = 1e-12);
        }
    }
}
