//! Internal and external dynamics of a spin-1/2 ground state: light shifts,
//! optical pumping of the magnetization, state-dependent radiation pressure
//! (TE drive) and the momentum-space kinetics behind recoil-induced
//! magnetization.
//!
//! The ground-state Wigner matrix is decomposed over Pauli matrices,
//! W = (w + σ·J)/2, so the state is a population `w` plus a real
//! magnetization vector `J` with |J| ≤ w.

use crate::correlations::{aux_weights, one_point_rates};
use crate::error::Error;
use crate::interface::{EvanescentFieldConfig, Interface, PolarizationPreset};
use crate::quadrature::QuadratureSpec;
use crate::Result;

/// Excited-state angular momentum reachable from Jg = 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcitedJ {
    Half,
    ThreeHalves,
}

/// Clebsch–Gordan reduction of the dipole operator for Jg = 1/2:
/// b⁻ = β ξ + iα σ×ξ.
#[derive(Debug, Clone, Copy)]
pub struct TransitionCoefficients {
    pub beta: f64,
    pub alpha: f64,
}

impl TransitionCoefficients {
    pub fn new(excited: ExcitedJ) -> Self {
        match excited {
            ExcitedJ::Half => Self { beta: 1.0 / 3.0, alpha: -1.0 / 3.0 },
            ExcitedJ::ThreeHalves => Self { beta: 2.0 / 3.0, alpha: 1.0 / 3.0 },
        }
    }
}

/// Population and magnetization of the spin-1/2 ground state.
#[derive(Debug, Clone, Copy)]
pub struct SpinHalfState {
    pub w: f64,
    pub j: [f64; 3],
}

/// Ground-state light shift split into its scalar part and the fictitious
/// magnetic field along the drive helicity (both in ħΔ' units).
#[derive(Debug, Clone, Copy)]
pub struct LightShift {
    /// β|ξ₀|² e^{−2κz}.
    pub scalar_shift: f64,
    /// α h e^{−2κz} with h = Im(ξ₀* × ξ₀).
    pub field_vector: [f64; 3],
}

/// Light shift operator at height `z`: H = ħΔ'(scalar_shift + field_vector·σ).
pub fn light_shift(
    cfg: &EvanescentFieldConfig,
    coeffs: &TransitionCoefficients,
    z: f64,
) -> LightShift {
    let e = cfg.intensity_decay(z);
    let h = crate::interface::helicity(cfg);
    LightShift {
        scalar_shift: coeffs.beta * cfg.intensity0() * e,
        field_vector: [
            coeffs.alpha * h[0] * e,
            coeffs.alpha * h[1] * e,
            coeffs.alpha * h[2] * e,
        ],
    }
}

/// Precomputed tensors of the pumping equation at fixed height: the diagonal
/// one-point correlation tensor C = diag(c_∥, c_∥, c_⊥), the field tensor
/// F_ij = Re(ξ₀i* ξ₀j), the helicity and the common decay factor.
struct BlochContext {
    decay: f64,
    detuning: f64,
    alpha: f64,
    beta: f64,
    c: [f64; 3],
    f: [[f64; 3]; 3],
    h: [f64; 3],
}

impl BlochContext {
    fn build(
        cfg: &EvanescentFieldConfig,
        coeffs: &TransitionCoefficients,
        interface: &Interface,
        z: f64,
    ) -> Result<Self> {
        let rates = one_point_rates(interface, z)?;
        let xi = cfg.xi0();
        let mut f = [[0.0; 3]; 3];
        for (i, fi) in f.iter_mut().enumerate() {
            for (j, fij) in fi.iter_mut().enumerate() {
                *fij = (xi[i].conj() * xi[j]).re;
            }
        }
        Ok(Self {
            decay: cfg.intensity_decay(z),
            detuning: cfg.detuning_ratio,
            alpha: coeffs.alpha,
            beta: coeffs.beta,
            c: [rates.c_par, rates.c_par, rates.c_perp],
            f,
            h: crate::interface::helicity(cfg),
        })
    }

    /// dJ/dt: precession around the helicity, pumping feed along C·h, and the
    /// relaxation terms built from C and F.
    fn rhs(&self, state: &SpinHalfState) -> [f64; 3] {
        let (a, b) = (self.alpha, self.beta);
        let e = self.decay;
        let j = state.j;

        let hxj = [
            self.h[1] * j[2] - self.h[2] * j[1],
            self.h[2] * j[0] - self.h[0] * j[2],
            self.h[0] * j[1] - self.h[1] * j[0],
        ];

        let tr_f = self.f[0][0] + self.f[1][1] + self.f[2][2];
        let tr_c = self.c[0] + self.c[1] + self.c[2];

        // C is diagonal, so matrix products with F stay cheap.
        let mut fj = [0.0; 3];
        for i in 0..3 {
            for (k, &jk) in j.iter().enumerate() {
                fj[i] += self.f[i][k] * jk;
            }
        }
        let cj = [self.c[0] * j[0], self.c[1] * j[1], self.c[2] * j[2]];
        // {C,F}J = C(FJ) + F(CJ) and [C,F]J = C(FJ) − F(CJ).
        let mut fcj = [0.0; 3];
        for i in 0..3 {
            for (k, &cjk) in cj.iter().enumerate() {
                fcj[i] += self.f[i][k] * cjk;
            }
        }
        let cfj = [self.c[0] * fj[0], self.c[1] * fj[1], self.c[2] * fj[2]];

        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = 2.0 * a * self.detuning * e * hxj[i]
                + 2.0 * a * a * e * self.c[i] * self.h[i] * state.w
                - 2.0 * a * a * e * (tr_f * cj[i] + tr_c * fj[i])
                + 2.0 * e * (a * a * (cfj[i] + fcj[i]) - a * b * (cfj[i] - fcj[i]));
        }
        out
    }
}

/// Time derivative of the magnetization from optical pumping at height `z`.
pub fn bloch_rhs(
    cfg: &EvanescentFieldConfig,
    coeffs: &TransitionCoefficients,
    interface: &Interface,
    z: f64,
    state: &SpinHalfState,
) -> Result<[f64; 3]> {
    Ok(BlochContext::build(cfg, coeffs, interface, z)?.rhs(state))
}

/// Time series of the magnetization under optical pumping.
#[derive(Debug, Clone)]
pub struct PumpingTrajectory {
    pub times: Vec<f64>,
    pub j: Vec<[f64; 3]>,
    /// True when |dJ/dt| dropped below 1e-10 before `t_end`.
    pub steady: bool,
}

/// Integrate the pumping equation from `j0` up to `t_end` (Γ'∞ units) with
/// an adaptive embedded Runge–Kutta scheme.  `dt_ctrl` caps the step size
/// (and sets the output resolution); the local error target is 1e-12.
pub fn integrate_pumping(
    cfg: &EvanescentFieldConfig,
    coeffs: &TransitionCoefficients,
    interface: &Interface,
    z: f64,
    j0: [f64; 3],
    t_end: f64,
    dt_ctrl: f64,
) -> Result<PumpingTrajectory> {
    if !(t_end > 0.0) || !(dt_ctrl > 0.0) {
        return Err(Error::InvalidDomain(format!(
            "integrate_pumping needs t_end > 0 and dt_ctrl > 0, got {t_end}, {dt_ctrl}"
        )));
    }
    let ctx = BlochContext::build(cfg, coeffs, interface, z)?;
    let f = |j: [f64; 3]| ctx.rhs(&SpinHalfState { w: 1.0, j });

    // Bogacki–Shampine 3(2) pair: cheap, FSAL, plenty for this smooth system.
    let tol = 1e-12;
    let mut t = 0.0;
    let mut y = j0;
    let mut k1 = f(y);
    let mut dt = dt_ctrl.min(t_end);
    let mut times = vec![0.0];
    let mut traj = vec![y];
    let mut steady = false;

    let norm_inf = |v: &[f64; 3]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));

    while t < t_end {
        if norm_inf(&k1) < 1e-10 {
            steady = true;
            break;
        }
        let h = dt.min(t_end - t);
        let k2 = f([
            y[0] + 0.5 * h * k1[0],
            y[1] + 0.5 * h * k1[1],
            y[2] + 0.5 * h * k1[2],
        ]);
        let k3 = f([
            y[0] + 0.75 * h * k2[0],
            y[1] + 0.75 * h * k2[1],
            y[2] + 0.75 * h * k2[2],
        ]);
        let mut y_new = [0.0; 3];
        for i in 0..3 {
            y_new[i] = y[i] + h * (2.0 * k1[i] + 3.0 * k2[i] + 4.0 * k3[i]) / 9.0;
        }
        let k4 = f(y_new);
        let mut err = 0.0_f64;
        for i in 0..3 {
            let e = h
                * (-5.0 * k1[i] / 72.0 + k2[i] / 12.0 + k3[i] / 9.0 - k4[i] / 8.0);
            err = err.max(e.abs());
        }
        if err <= tol {
            t = if h >= t_end - t { t_end } else { t + h };
            y = y_new;
            k1 = k4;
            times.push(t);
            traj.push(y);
        }
        let scale = if err > 0.0 {
            0.9 * (tol / err).powf(1.0 / 3.0)
        } else {
            2.0
        };
        dt *= scale.clamp(0.2, 2.0);
        dt = dt.min(dt_ctrl);
        if dt < 1e-14 * t_end.max(1.0) {
            return Err(Error::StiffnessFailure { min_step: dt, t });
        }
    }
    Ok(PumpingTrajectory { times, j: traj, steady })
}

/// Radiation pressure operators for a TE drive, resolved over the Pauli
/// decomposition, plus the fluorescence rates per photon polarization and
/// the sublevel-changing force asymmetry scale.
#[derive(Debug, Clone, Copy)]
pub struct SpinForces {
    /// Force multiplying ∇_p of the population w.
    pub f1_w: [f64; 3],
    pub f1_jx: [f64; 3],
    pub f1_jy: [f64; 3],
    pub f1_jz: [f64; 3],
    /// Reflected-mode force scale 2 e^{−2κz} a₁(z;0) (ħkΓ'∞ units).
    pub f_sp2: f64,
    /// Rate of π-polarized fluorescence photons, β² e^{−2κz} c_∥.
    pub gamma_pi: f64,
    /// Rate of σ±-polarized fluorescence photons, α² e^{−2κz}(c_∥+c_⊥).
    pub gamma_sigma: f64,
}

/// State-resolved radiation pressure at height `z` for a TE-polarized drive.
/// Other polarizations are rejected rather than extrapolated.
pub fn forces_spin_half(
    cfg: &EvanescentFieldConfig,
    coeffs: &TransitionCoefficients,
    interface: &Interface,
    z: f64,
) -> Result<SpinForces> {
    if *cfg.preset() != PolarizationPreset::Te {
        return Err(Error::UnsupportedPolarization(
            "spin-1/2 forces are only derived for the TE preset".into(),
        ));
    }
    let rates = one_point_rates(interface, z)?;
    let aux = aux_weights(interface, z, &QuadratureSpec::default())?;
    let e = cfg.intensity_decay(z);
    let q = cfg.q();
    let (a2, b2) = (coeffs.alpha * coeffs.alpha, coeffs.beta * coeffs.beta);
    let (cp, cz) = (rates.c_par, rates.c_perp);
    let fx = |coef: f64| [q * e * coef, 0.0, 0.0];
    Ok(SpinForces {
        f1_w: fx(b2 * cp + a2 * (cp + cz)),
        f1_jx: fx(b2 * cp - a2 * (cp - cz)),
        f1_jy: fx(b2 * cp - a2 * (cp + cz)),
        f1_jz: fx(b2 * cp + a2 * (cp - cz)),
        f_sp2: 2.0 * e * aux.a1_0,
        gamma_pi: b2 * e * cp,
        gamma_sigma: a2 * e * (cp + cz),
    })
}

/// One-dimensional momentum slice of the ground-state Wigner matrix at a
/// fixed height: population and magnetization component J_y on a uniform
/// p_x grid (ħk units).
#[derive(Debug, Clone)]
pub struct WignerSlice {
    pub p_grid: Vec<f64>,
    pub w: Vec<f64>,
    pub j_y: Vec<f64>,
    pub z: f64,
}

/// Diagnostics of the momentum-space kinetics.
#[derive(Debug, Clone)]
pub struct WignerEvolution {
    pub times: Vec<f64>,
    /// Mean-momentum difference ⟨p⟩₊ − ⟨p⟩₋ of the sublevel populations.
    pub mean_separation: Vec<f64>,
    /// Mean-momentum difference between the cohorts that underwent exactly
    /// one sublevel change (− → + minus + → −); its plateau is the recoil
    /// asymmetry per pumping cycle.
    pub cohort_separation: Vec<f64>,
    pub max_cohort_separation: f64,
    /// Pearson correlation of J_y(p) with ∂w/∂p over the final slice,
    /// restricted to points where the gradient is significant.
    pub jy_gradient_correlation: f64,
    /// Relative change of the total population over the run.
    pub mass_error: f64,
    pub final_slice: WignerSlice,
}

/// Number of sublevel-change generations tracked separately; the last one
/// recycles into itself so total population is exactly conserved.
const GENERATIONS: usize = 8;

/// Shift `src` rightwards by `delta` (grid units `dp`) with mass-preserving
/// linear interpolation, accumulating `rate * shifted` into `dst`.
fn add_shifted(dst: &mut [f64], src: &[f64], delta: f64, dp: f64, rate: f64) {
    let off = delta / dp;
    let m = off.floor() as isize;
    let f = off - off.floor();
    let n = src.len() as isize;
    for i in 0..n {
        let lo = i - m - 1;
        let hi = i - m;
        let mut v = 0.0;
        if hi >= 0 && hi < n {
            v += (1.0 - f) * src[hi as usize];
        }
        if lo >= 0 && lo < n {
            v += f * src[lo as usize];
        }
        dst[i as usize] += rate * v;
    }
}

/// Flux-form upwind advection at velocity `vel > 0` with a van Leer limiter;
/// accumulates −∂(vel·w)/∂p into `dst`.
fn add_advection(dst: &mut [f64], w: &[f64], vel: f64, dp: f64) {
    let n = w.len();
    if n < 3 || vel == 0.0 {
        return;
    }
    // Face flux at i+1/2 from the upwind cell i plus a limited correction.
    let mut flux = vec![0.0; n + 1];
    for i in 0..n {
        let wm = if i > 0 { w[i - 1] } else { 0.0 };
        let wp = if i + 1 < n { w[i + 1] } else { 0.0 };
        let du = w[i] - wm;
        let dd = wp - w[i];
        let phi = if dd.abs() > 1e-300 {
            let r = du / dd;
            (r + r.abs()) / (1.0 + r.abs())
        } else {
            0.0
        };
        flux[i + 1] = vel * (w[i] + 0.5 * phi * dd);
    }
    for i in 0..n {
        dst[i] -= (flux[i + 1] - flux[i]) / dp;
    }
}

/// Evolve the sublevel populations w_±(p_x) at fixed height under the
/// TE-drive rate equations: sublevel changes at the σ-fluorescence rate with
/// direction-dependent recoil, plus the common radiation-pressure drift from
/// non-changing cycles.  Sublevel changes are tracked per generation so the
/// single-cycle recoil asymmetry is observable.
pub fn evolve_wigner_slice(
    slice: &WignerSlice,
    cfg: &EvanescentFieldConfig,
    coeffs: &TransitionCoefficients,
    interface: &Interface,
    t_end: f64,
) -> Result<WignerEvolution> {
    if *cfg.preset() != PolarizationPreset::Te {
        return Err(Error::UnsupportedPolarization(
            "the Wigner slice kinetics are only derived for the TE preset".into(),
        ));
    }
    let n_user = slice.p_grid.len();
    if n_user < 4 {
        return Err(Error::InvalidDomain("p_grid needs at least 4 points".into()));
    }
    let dp = slice.p_grid[1] - slice.p_grid[0];
    if !(dp > 0.0) {
        return Err(Error::InvalidDomain("p_grid must be increasing".into()));
    }
    for i in 2..n_user {
        if ((slice.p_grid[i] - slice.p_grid[i - 1]) / dp - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDomain("p_grid must be uniform".into()));
        }
    }
    if dp > 0.25 {
        return Err(Error::GridTooCoarse { spacing: dp, max_allowed: 0.25 });
    }
    if slice.w.len() != n_user || slice.j_y.len() != n_user {
        return Err(Error::InvalidDomain(
            "w and j_y must match the p_grid length".into(),
        ));
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidDomain("t_end must be positive".into()));
    }

    let forces = forces_spin_half(cfg, coeffs, interface, slice.z)?;
    let gamma = forces.gamma_sigma;
    let drift = forces.gamma_pi * cfg.q();
    let a2 = coeffs.alpha * coeffs.alpha;
    // Mean recoil per sublevel change, from F_{∓→±} = Γ'_σ Q e_x ∓ α² f^{(sp,2)} e_x.
    let d_asym = a2 * forces.f_sp2 / gamma;
    let delta_mp = cfg.q() - d_asym; // − → +
    let delta_pm = cfg.q() + d_asym; // + → −

    // Pad the grid so drift and recoils never push mass off the edges.
    let reach = drift * t_end + delta_pm.abs() * (gamma * t_end + 5.0) + 5.0;
    let pad = (reach / dp).ceil() as usize + 2;
    let n = n_user + 2 * pad;

    // state[g][s]: generation g (number of sublevel changes), sublevel s
    // (0 ↔ +1/2, 1 ↔ −1/2 along y).
    let mut state = vec![[vec![0.0; n], vec![0.0; n]]; GENERATIONS];
    for i in 0..n_user {
        state[0][0][pad + i] = 0.5 * (slice.w[i] + slice.j_y[i]);
        state[0][1][pad + i] = 0.5 * (slice.w[i] - slice.j_y[i]);
    }
    let mass0: f64 = slice.w.iter().sum::<f64>() * dp;

    let dt_cfl = 0.4 * dp / drift.max(1e-300);
    let dt_react = 0.2 / gamma.max(1e-300);
    let n_samples = 200;
    let dt = (t_end / n_samples as f64).min(dt_cfl).min(dt_react);
    let n_steps = (t_end / dt).ceil() as usize;
    let dt = t_end / n_steps as f64;
    let sample_every = (n_steps / n_samples).max(1);

    let rhs = |st: &Vec<[Vec<f64>; 2]>| -> Vec<[Vec<f64>; 2]> {
        let mut out = vec![[vec![0.0; n], vec![0.0; n]]; GENERATIONS];
        for g in 0..GENERATIONS {
            for s in 0..2 {
                let w = &st[g][s];
                let dst = &mut out[g][s];
                for i in 0..n {
                    dst[i] = -gamma * w[i];
                }
                add_advection(dst, w, drift, dp);
            }
        }
        // Gains: generation g of sublevel s feeds generation g+1 of the other
        // sublevel, shifted by the direction-dependent recoil.  The last
        // generation recycles into itself to conserve population.
        for g in 0..GENERATIONS {
            let tgt = (g + 1).min(GENERATIONS - 1);
            for s in 0..2 {
                let delta = if s == 1 { delta_mp } else { delta_pm };
                let mut gain = vec![0.0; n];
                add_shifted(&mut gain, &st[g][s], delta, dp, gamma);
                for (o, gi) in out[tgt][1 - s].iter_mut().zip(&gain) {
                    *o += gi;
                }
            }
        }
        out
    };

    // Heun (SSP-RK2) steps; all pieces are conservative so total population
    // is preserved to rounding.
    let mut times = Vec::new();
    let mut mean_sep = Vec::new();
    let mut cohort_sep = Vec::new();
    let mut max_cohort: f64 = 0.0;

    let moments = |st: &Vec<[Vec<f64>; 2]>| {
        let mut m = [[0.0; 2]; 2]; // [sublevel][mass, p-moment] totals
        let mut gen1 = [[0.0; 2]; 2];
        for (g, gen) in st.iter().enumerate() {
            for (s, w) in gen.iter().enumerate() {
                for (i, &wi) in w.iter().enumerate() {
                    let p = slice.p_grid[0] + (i as isize - pad as isize) as f64 * dp;
                    m[s][0] += wi;
                    m[s][1] += wi * p;
                    if g == 1 {
                        gen1[s][0] += wi;
                        gen1[s][1] += wi * p;
                    }
                }
            }
        }
        let mean = |a: [f64; 2]| if a[0] > 1e-14 { a[1] / a[0] } else { f64::NAN };
        (
            mean(m[0]) - mean(m[1]),
            if gen1[0][0] > 1e-12 && gen1[1][0] > 1e-12 {
                mean(gen1[0]) - mean(gen1[1])
            } else {
                f64::NAN
            },
        )
    };

    let mut t = 0.0;
    for step in 0..=n_steps {
        if step % sample_every == 0 || step == n_steps {
            let (ms, cs) = moments(&state);
            times.push(t);
            mean_sep.push(ms);
            cohort_sep.push(cs);
            if cs.is_finite() && cs.abs() > max_cohort.abs() {
                max_cohort = cs;
            }
        }
        if step == n_steps {
            break;
        }
        let k1 = rhs(&state);
        let mut mid = state.clone();
        for g in 0..GENERATIONS {
            for s in 0..2 {
                for i in 0..n {
                    mid[g][s][i] += dt * k1[g][s][i];
                }
            }
        }
        let k2 = rhs(&mid);
        for g in 0..GENERATIONS {
            for s in 0..2 {
                for i in 0..n {
                    state[g][s][i] += 0.5 * dt * (k1[g][s][i] + k2[g][s][i]);
                }
            }
        }
        t += dt;
    }

    // Collapse generations back onto the user grid.
    let mut w_out = vec![0.0; n_user];
    let mut jy_out = vec![0.0; n_user];
    let mut mass1 = 0.0;
    for gen in &state {
        for (s, w) in gen.iter().enumerate() {
            let sign = if s == 0 { 1.0 } else { -1.0 };
            for (i, &wi) in w.iter().enumerate() {
                mass1 += wi * dp;
                if i >= pad && i < pad + n_user {
                    w_out[i - pad] += wi;
                    jy_out[i - pad] += sign * wi;
                }
            }
        }
    }

    // Correlation of J_y with the momentum gradient of w where the latter is
    // significant.
    let mut grad = vec![0.0; n_user];
    for i in 1..n_user - 1 {
        grad[i] = (w_out[i + 1] - w_out[i - 1]) / (2.0 * dp);
    }
    let gmax = grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n_user {
        if grad[i].abs() > 0.01 * gmax {
            sxy += grad[i] * jy_out[i];
            sxx += grad[i] * grad[i];
            syy += jy_out[i] * jy_out[i];
        }
    }
    let corr = if sxx > 0.0 && syy > 0.0 {
        sxy / (sxx * syy).sqrt()
    } else {
        0.0
    };

    Ok(WignerEvolution {
        times,
        mean_separation: mean_sep,
        cohort_separation: cohort_sep,
        max_cohort_separation: max_cohort,
        jy_gradient_correlation: corr,
        mass_error: if mass0 > 0.0 { (mass1 - mass0).abs() / mass0 } else { 0.0 },
        final_slice: WignerSlice {
            p_grid: slice.p_grid.clone(),
            w: w_out,
            j_y: jy_out,
            z: slice.z,
        },
    })
}
