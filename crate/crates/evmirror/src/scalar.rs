//! Observables of a two-level (scalar) atom in the evanescent wave:
//! fluorescence rate, radiation pressure and momentum diffusion.
//!
//! All quantities are per saturated free-space rate: rates in
//! $\Gamma'_\infty$, forces in $\hbar k \Gamma'_\infty$ and diffusion in
//! $\hbar^2 k^2 \Gamma'_\infty$, with $k = 1$.

use num_complex::Complex64;

use crate::correlations::{
    aux_weights, correlation_taylor, one_point_rates, rate_derivatives,
};
use crate::interface::{EvanescentFieldConfig, Interface};
use crate::quadrature::QuadratureSpec;
use crate::Result;

/// Force split into the plane-wave (absorption recoil) and reflected-mode
/// parts, and diffusion split into departure and feeding contributions.
#[derive(Debug, Clone, Copy)]
pub struct ScalarBreakdown {
    /// $\Gamma'(z) Q\,{\bf e}_x$ — the rule-of-thumb radiation pressure.
    pub force_plane_wave_part: [f64; 3],
    /// Interface-reflection force $2 a_1(z;0) e^{-2\kappa z}\,
    /// \text{Im}(\xi_{0\parallel}\xi_{0\perp}^*)$, in-plane.
    pub force_reflected_part: [f64; 3],
    /// Diffusion from the spread of departure times, $\propto
    /// \partial_z^2 \Gamma'$ (zz component only).
    pub d_depart: [[f64; 3]; 3],
    /// Diffusion fed back by spontaneous emission into the correlated
    /// vacuum, from the curvature of the feed correlation function.
    pub d_feed: [[f64; 3]; 3],
    /// The d_feed evaluated with free-space correlations only — the
    /// "thin line" baseline used for enhancement ratios.
    pub d_feed_free_space: [[f64; 3]; 3],
}

/// Rate, force and diffusion of the scalar atom at one height.
#[derive(Debug, Clone, Copy)]
pub struct ForceDiffusionResult {
    /// Fluorescence rate Γ'(z) in units of Γ'∞.
    pub gamma_prime: f64,
    /// Radiation pressure force (ħkΓ'∞ units).
    pub force: [f64; 3],
    /// Momentum diffusion tensor (ħ²k²Γ'∞ units).
    pub diffusion: [[f64; 3]; 3],
    pub breakdown: ScalarBreakdown,
}

/// Radiation pressure with its decomposition.
#[derive(Debug, Clone, Copy)]
pub struct RadiationPressure {
    pub force: [f64; 3],
    pub plane_wave_part: [f64; 3],
    pub reflected_part: [f64; 3],
}

/// Leading-order excited-state population and optical-coherence scale.
#[derive(Debug, Clone, Copy)]
pub struct ExcitedStateDiagnostics {
    /// ρ_ee = (s₀/2)|ξ(r)|².
    pub excited_fraction: f64,
    /// Relative magnitude of the optical coherences, (s₀/2)|ξ(r)|.
    pub coherence_scale: f64,
}

/// In-plane and perpendicular intensities |ξ₀∥|², |ξ₀⊥|².
fn split_intensity(cfg: &EvanescentFieldConfig) -> (f64, f64) {
    let xi = cfg.xi0();
    (
        xi[0].norm_sqr() + xi[1].norm_sqr(),
        xi[2].norm_sqr(),
    )
}

/// Fluorescence rate Γ'(z)/Γ'∞ = (c_∥|ξ₀∥|² + c_⊥|ξ₀⊥|²) e^{−2κz}.
pub fn fluorescence_rate(
    cfg: &EvanescentFieldConfig,
    interface: &Interface,
    z: f64,
) -> Result<f64> {
    let rates = one_point_rates(interface, z)?;
    let (i_par, i_perp) = split_intensity(cfg);
    Ok(cfg.intensity_decay(z) * (rates.c_par * i_par + rates.c_perp * i_perp))
}

/// Radiation pressure force.  The plane-wave part rides along the
/// propagation direction e_x with magnitude Γ'(z)·Q; the reflected part is
/// the in-plane interface correction fed by the axial correlation weight.
pub fn radiation_pressure(
    cfg: &EvanescentFieldConfig,
    interface: &Interface,
    z: f64,
) -> Result<RadiationPressure> {
    let gamma = fluorescence_rate(cfg, interface, z)?;
    let aux = aux_weights(interface, z, &QuadratureSpec::default())?;
    let xi = cfg.xi0();
    let decay = cfg.intensity_decay(z);
    let plane = [gamma * cfg.q(), 0.0, 0.0];
    let refl = [
        2.0 * aux.a1_0 * decay * (xi[0] * xi[2].conj()).im,
        2.0 * aux.a1_0 * decay * (xi[1] * xi[2].conj()).im,
        0.0,
    ];
    Ok(RadiationPressure {
        force: [plane[0] + refl[0], plane[1] + refl[1], plane[2] + refl[2]],
        plane_wave_part: plane,
        reflected_part: refl,
    })
}

/// The feed diffusion tensor for a given Taylor data set of the correlation
/// tensor.  `c_bar` is the contraction ξ₀*·C₀·ξ₀ (real), `t2` and `v` the
/// contractions of the Hessian and gradient with ξ₀* ⊗ ξ₀.
fn assemble_feed(
    q: f64,
    decay: f64,
    t2: &[[Complex64; 3]; 3],
    v: &[Complex64; 3],
    c_bar: f64,
) -> [[f64; 3]; 3] {
    let mut d = [[0.0; 3]; 3];
    for k in 0..3 {
        for l in 0..3 {
            let mut m = t2[k][l];
            let i = Complex64::new(0.0, 1.0);
            if k == 0 {
                m += i * q * v[l];
            }
            if l == 0 {
                m += i * q * v[k];
            }
            if k == 0 && l == 0 {
                m -= Complex64::new(q * q * c_bar, 0.0);
            }
            d[k][l] = -0.5 * decay * m.re;
        }
    }
    d
}

/// Feed diffusion with free-space correlations only (no interface, no
/// reflected force): the "thin line" baseline of the figures.
pub fn free_space_feed_diffusion(cfg: &EvanescentFieldConfig, z: f64) -> [[f64; 3]; 3] {
    let xi = cfg.xi0();
    let i0 = cfg.intensity0();
    let decay = cfg.intensity_decay(z);
    let q = cfg.q();
    let mut d = [[0.0; 3]; 3];
    for k in 0..3 {
        for l in 0..3 {
            // −(1/2)Re[T2_free − Q²δ_kx δ_lx |ξ₀|²] with
            // T2_free = −(2/5)|ξ₀|²δ_kl − (1/5)Re(ξ₀k* ξ₀l) (doubled cross term).
            let delta = if k == l { 1.0 } else { 0.0 };
            let t2 = -0.4 * i0 * delta - 0.2 * (xi[k].conj() * xi[l]).re;
            let phase = if k == 0 && l == 0 { q * q * i0 } else { 0.0 };
            d[k][l] = 0.5 * decay * (-t2 + phase);
        }
    }
    d
}

/// Trace of the momentum diffusion tensor for the same intensity profile in
/// free space — the "thin line" baseline of the figures.  Both the vacuum
/// correlation modifications and the curvature of the driving field are
/// dropped, leaving the textbook running-wave heating rate: half a recoil
/// (|k| = k) per absorbed photon plus half per spontaneous photon, at the
/// unmodified rate Γ'_free(z) = |ξ₀|² e^{−2κz}.  In ħ²k²Γ'∞ units the trace
/// is simply Γ'_free(z).
pub fn free_space_baseline_trace(cfg: &EvanescentFieldConfig, z: f64) -> f64 {
    cfg.intensity0() * cfg.intensity_decay(z)
}

/// Full rate/force/diffusion bundle at height `z`.
pub fn observables(
    cfg: &EvanescentFieldConfig,
    interface: &Interface,
    z: f64,
) -> Result<ForceDiffusionResult> {
    let spec = QuadratureSpec::default();
    let xi = cfg.xi0();
    let (i_par, i_perp) = split_intensity(cfg);
    let decay = cfg.intensity_decay(z);
    let kappa = cfg.kappa();
    let rates = one_point_rates(interface, z)?;
    let g = rates.c_par * i_par + rates.c_perp * i_perp;
    let gamma_prime = decay * g;

    let pressure = radiation_pressure(cfg, interface, z)?;

    // Departure diffusion: D_zz = Γ''(z)/8 with Γ' = e^{−2κz} G(z).
    let deriv = rate_derivatives(interface, z)?;
    let g1 = deriv.c_par_z1 * i_par + deriv.c_perp_z1 * i_perp;
    let g2 = deriv.c_par_z2 * i_par + deriv.c_perp_z2 * i_perp;
    let gamma_second = decay * (4.0 * kappa * kappa * g - 4.0 * kappa * g1 + g2);
    let mut d_depart = [[0.0; 3]; 3];
    d_depart[2][2] = gamma_second / 8.0;

    // Feed diffusion from the Taylor data of the full correlation tensor.
    let taylor = correlation_taylor(interface, z, &spec)?;
    let mut t2 = [[Complex64::new(0.0, 0.0); 3]; 3];
    let mut v = [Complex64::new(0.0, 0.0); 3];
    for k in 0..3 {
        for l in 0..3 {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    acc += xi[i].conj() * xi[j] * taylor.d2[i][j][k][l];
                }
            }
            t2[k][l] = acc;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                acc += xi[i].conj() * xi[j] * taylor.d1[i][j][k];
            }
        }
        v[k] = acc;
    }
    let d_feed = assemble_feed(cfg.q(), decay, &t2, &v, g);
    let d_feed_free_space = free_space_feed_diffusion(cfg, z);

    let mut diffusion = [[0.0; 3]; 3];
    for k in 0..3 {
        for l in 0..3 {
            diffusion[k][l] = d_depart[k][l] + d_feed[k][l];
        }
    }

    Ok(ForceDiffusionResult {
        gamma_prime,
        force: pressure.force,
        diffusion,
        breakdown: ScalarBreakdown {
            force_plane_wave_part: pressure.plane_wave_part,
            force_reflected_part: pressure.reflected_part,
            d_depart,
            d_feed,
            d_feed_free_space,
        },
    })
}

/// Momentum diffusion tensor (with breakdown) — alias over [`observables`].
pub fn diffusion_tensor(
    cfg: &EvanescentFieldConfig,
    interface: &Interface,
    z: f64,
) -> Result<ForceDiffusionResult> {
    observables(cfg, interface, z)
}

/// Excited-state population and coherence scale from the adiabatic
/// elimination, at leading order in s₀.
pub fn excited_state_diagnostics(
    cfg: &EvanescentFieldConfig,
    _interface: &Interface,
    z: f64,
) -> ExcitedStateDiagnostics {
    let intensity = cfg.intensity0() * cfg.intensity_decay(z);
    ExcitedStateDiagnostics {
        excited_fraction: 0.5 * cfg.s0 * intensity,
        coherence_scale: 0.5 * cfg.s0 * intensity.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{two_point_tensor, ExpansionOrder};
    use crate::interface::PolarizationPreset;
    use crate::linalg::sym3_eigen;
    use approx::assert_abs_diff_eq;

    fn glass() -> Interface {
        Interface::new(1.5).unwrap()
    }

    fn vacuum() -> Interface {
        Interface::new(1.0).unwrap()
    }

    fn cfg(_iface: &Interface, preset: PolarizationPreset) -> EvanescentFieldConfig {
        EvanescentFieldConfig::new(preset, 1.0, 0.01, 100.0).unwrap()
    }

    #[test]
    fn te_rate_in_vacuum() {
        let v = vacuum();
        let c = cfg(&v, PolarizationPreset::Te);
        assert_abs_diff_eq!(fluorescence_rate(&c, &v, 0.0).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            fluorescence_rate(&c, &v, 1.0).unwrap(),
            (-2.0_f64).exp(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn tm_rate_prefactor_far_away() {
        let g = glass();
        let c = cfg(&g, PolarizationPreset::Tm);
        let z = 10.0;
        let prefactor = fluorescence_rate(&c, &g, z).unwrap() / c.intensity_decay(z);
        // (κ² + Q²) = 3 once the correlations relax to 1 (within 2%).
        assert!((prefactor - 3.0).abs() < 0.07, "prefactor {prefactor}");
    }

    #[test]
    fn circ_rate_formula() {
        let g = glass();
        let c = cfg(&g, PolarizationPreset::Circ);
        let z = 0.6;
        let rates = one_point_rates(&g, z).unwrap();
        // |ξ₀∥|² = κ²+1 = Q², |ξ₀⊥|² = Q² ⇒ Γ' = Q²(c_∥+c_⊥) e^{−2κz}.
        let want = 2.0 * (rates.c_par + rates.c_perp) * c.intensity_decay(z);
        assert_abs_diff_eq!(
            fluorescence_rate(&c, &g, z).unwrap(),
            want,
            epsilon = 1e-12
        );
    }

    #[test]
    fn te_force_is_axial() {
        let g = glass();
        let c = cfg(&g, PolarizationPreset::Te);
        let f = radiation_pressure(&c, &g, 0.4).unwrap();
        assert_eq!(f.reflected_part, [0.0, 0.0, 0.0]);
        assert_eq!(f.force[1], 0.0);
        assert_eq!(f.force[2], 0.0);
        assert!(f.force[0] > 0.0);
    }

    #[test]
    fn circ_force_structure() {
        let g = glass();
        let c = cfg(&g, PolarizationPreset::Circ);
        let z = 0.5;
        let f = radiation_pressure(&c, &g, z).unwrap();
        let aux_a1 = {
            // reflected part should be −2Q a1 e^{−2κz}(κ e_x + e_y)
            let gamma = fluorescence_rate(&c, &g, z).unwrap();
            let fx_refl = f.force[0] - gamma * c.q();
            fx_refl / (-2.0 * c.q() * c.kappa() * c.intensity_decay(z))
        };
        assert!(aux_a1 > 0.0);
        assert_abs_diff_eq!(
            f.reflected_part[1],
            -2.0 * c.q() * aux_a1 * c.intensity_decay(z),
            epsilon = 1e-12
        );
        assert_eq!(f.force[2], 0.0);
    }

    #[test]
    fn force_aligns_with_x_far_away() {
        let g = glass();
        for preset in [
            PolarizationPreset::Te,
            PolarizationPreset::Tm,
            PolarizationPreset::Circ,
        ] {
            let c = cfg(&g, preset);
            let z = 10.0;
            let f = radiation_pressure(&c, &g, z).unwrap();
            let gamma = fluorescence_rate(&c, &g, z).unwrap();
            let norm = (f.force[0] * f.force[0]
                + f.force[1] * f.force[1]
                + f.force[2] * f.force[2])
                .sqrt();
            let angle = (f.force[1].hypot(f.force[2]) / f.force[0]).atan();
            assert!(angle.abs() < 0.5_f64.to_radians(), "angle {angle}");
            assert!((norm / (gamma * c.q()) - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn departure_diffusion_vacuum_limit() {
        let v = vacuum();
        let c = cfg(&v, PolarizationPreset::Te);
        let z = 0.8;
        let res = observables(&c, &v, z).unwrap();
        // Γ'' /8 = 4κ²Γ'/8 = κ²Γ'/2 with κ=1.
        assert_abs_diff_eq!(
            res.breakdown.d_depart[2][2],
            0.5 * c.intensity_decay(z),
            epsilon = 1e-12
        );
        // Interface feed corrections vanish: d_feed equals the baseline.
        for k in 0..3 {
            for l in 0..3 {
                assert_abs_diff_eq!(
                    res.breakdown.d_feed[k][l],
                    res.breakdown.d_feed_free_space[k][l],
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn free_space_feed_trace() {
        let v = vacuum();
        for preset in [
            PolarizationPreset::Te,
            PolarizationPreset::Tm,
            PolarizationPreset::Circ,
        ] {
            let c = cfg(&v, preset);
            let z = 0.3;
            let d = free_space_feed_diffusion(&c, z);
            let tr = d[0][0] + d[1][1] + d[2][2];
            let want = 0.5 * c.intensity_decay(z) * c.intensity0() * (1.4 + c.q() * c.q());
            assert_abs_diff_eq!(tr, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn interface_feed_correction_is_in_plane_only() {
        let g = glass();
        for preset in [
            PolarizationPreset::Te,
            PolarizationPreset::Tm,
            PolarizationPreset::Circ,
        ] {
            let c = cfg(&g, preset);
            for &z in &[0.0, 0.5, 1.5] {
                let res = observables(&c, &g, z).unwrap();
                let dz = res.breakdown.d_feed[2][2] - res.breakdown.d_feed_free_space[2][2];
                assert_abs_diff_eq!(dz, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn feed_matches_finite_differences_of_feed_correlation() {
        // Oracle: D_feed^{kl} = −(1/2) ∂²/∂s_k∂s_l Re[ξ*(r₁)ᵢ ξ(r₂)ⱼ C^{ij}]
        // with the driving-field phase e^{iQs_x} and decay e^{−2κz} explicit.
        let g = glass();
        let c = cfg(&g, PolarizationPreset::Tm);
        let z = 0.5;
        let res = observables(&c, &g, z).unwrap();
        let spec = QuadratureSpec::default();
        let xi = c.xi0();
        let a = |s: [f64; 3]| -> f64 {
            let tensor =
                two_point_tensor(&g, z, s, ExpansionOrder::Taylor2, &spec).unwrap();
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    acc += xi[i].conj() * xi[j] * tensor[i][j];
                }
            }
            let phase = Complex64::new(0.0, c.q() * s[0]).exp();
            (acc * phase).re * c.intensity_decay(z)
        };
        let h = 1e-3;
        for k in 0..3 {
            for l in 0..3 {
                let fd = if k == l {
                    let mut sp = [0.0; 3];
                    sp[k] = h;
                    let mut sm = [0.0; 3];
                    sm[k] = -h;
                    (a(sp) - 2.0 * a([0.0; 3]) + a(sm)) / (h * h)
                } else {
                    let mut spp = [0.0; 3];
                    spp[k] = h;
                    spp[l] = h;
                    let mut spm = spp;
                    spm[l] = -h;
                    let mut smp = spp;
                    smp[k] = -h;
                    let mut smm = [0.0; 3];
                    smm[k] = -h;
                    smm[l] = -h;
                    (a(spp) - a(spm) - a(smp) + a(smm)) / (4.0 * h * h)
                };
                let want = -0.5 * fd;
                let got = res.breakdown.d_feed[k][l];
                let scale = got.abs().max(0.1);
                assert!(
                    ((got - want) / scale).abs() < 1e-5,
                    "D_feed[{k}][{l}] = {got} vs oracle {want}"
                );
            }
        }
    }

    #[test]
    fn diffusion_is_positive_semidefinite() {
        let g = glass();
        for preset in [
            PolarizationPreset::Te,
            PolarizationPreset::Tm,
            PolarizationPreset::Circ,
        ] {
            let c = cfg(&g, preset);
            for &z in &[0.0, 0.25, 0.5, 1.0, 2.0, 5.0] {
                let res = observables(&c, &g, z).unwrap();
                let (vals, _) = sym3_eigen(&res.diffusion);
                for v in vals {
                    assert!(v >= -1e-10, "eigenvalue {v} at z={z} ({preset:?})");
                }
                assert!(res.gamma_prime >= 0.0);
            }
        }
    }

    #[test]
    fn near_surface_enhancement_ratio() {
        let g = glass();
        for preset in [PolarizationPreset::Te, PolarizationPreset::Tm] {
            let c = cfg(&g, preset);
            for &z in &[0.1, 0.25, 0.5] {
                let res = observables(&c, &g, z).unwrap();
                let tr: f64 = (0..3).map(|i| res.diffusion[i][i]).sum();
                let ratio = tr / free_space_baseline_trace(&c, z);
                assert!(
                    (2.5..=5.0).contains(&ratio),
                    "enhancement ratio {ratio} at z={z} ({preset:?})"
                );
            }
        }
    }

    #[test]
    fn excited_state_scaling() {
        let g = glass();
        let c = cfg(&g, PolarizationPreset::Te);
        let d0 = excited_state_diagnostics(&c, &g, 0.0);
        assert_abs_diff_eq!(d0.excited_fraction, 0.005, epsilon = 1e-15);
        let dz = excited_state_diagnostics(&c, &g, 0.5 * 2.0_f64.ln());
        assert_abs_diff_eq!(dz.excited_fraction, 0.0025, epsilon = 1e-15);
    }
}
