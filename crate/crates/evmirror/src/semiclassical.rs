//! Semiclassical bounce simulator: mean trajectory in the evanescent-wave
//! dipole potential, accumulated momentum spread along the path, a stochastic
//! (Langevin) ensemble sampling the momentum diffusion, and the validity
//! checks of the underlying approximations.
//!
//! Reduced units throughout: time in 1/Γ'∞, momentum in ħk, position in 1/k.
//! The atomic mass enters through Γ∞/ω_recoil only; the effective inertia in
//! reduced variables is M_eff = (Γ∞/ω_recoil)·s₀/4, so that
//! dz/dt = p_z / M_eff.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::Error;
use crate::interface::{EvanescentFieldConfig, Interface, PolarizationPreset};
use crate::scalar;
use crate::spin_half::ExcitedJ;
use crate::Result;

/// Internal level structure used for the bounce potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    Scalar,
    SpinHalf(ExcitedJ),
}

/// Atomic parameters of the bounce simulation.  `mass_ratio` is Γ∞/ω_recoil;
/// `gamma_inf` is the absolute linewidth, kept only for SI conversions.
#[derive(Debug, Clone, Copy)]
pub struct AtomConfig {
    pub mass_ratio: f64,
    pub gamma_inf: f64,
    pub transition: Transition,
}

impl AtomConfig {
    pub fn new(mass_ratio: f64, gamma_inf: f64, transition: Transition) -> Result<Self> {
        if !(mass_ratio > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "mass_ratio (Γ∞/ω_recoil) must exceed 1, got {mass_ratio}; \
                 the semiclassical treatment fails for such light atoms"
            )));
        }
        Ok(Self { mass_ratio, gamma_inf, transition })
    }

    /// Effective inertia in reduced units (momentum ħk, time 1/Γ'∞).
    pub fn effective_mass(&self, cfg: &EvanescentFieldConfig) -> f64 {
        self.mass_ratio * cfg.s0 / 4.0
    }
}

/// One inequality of the approximation chain, evaluated with a ×10 margin.
#[derive(Debug, Clone)]
pub struct ValidityCondition {
    pub condition: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// Evaluate the validity conditions of the semiclassical, low-saturation,
/// adiabatic treatment for an incident momentum `p_inc` and momentum spread
/// `delta_p` (ħk units).  A "≫" is taken as satisfied when lhs > 10·rhs;
/// the saturation bound is checked directly.
pub fn check_validity(
    atom: &AtomConfig,
    cfg: &EvanescentFieldConfig,
    p_inc: f64,
    delta_p: f64,
) -> Vec<ValidityCondition> {
    let margin = |lhs: f64, rhs: f64| lhs > 10.0 * rhs;
    // kp/M in units of Γ∞ is 2p̃/(Γ∞/ω_rec).
    let doppler = 2.0 * p_inc.abs().max(delta_p.abs()) / atom.mass_ratio;
    let detuning = cfg.detuning_ratio.abs();
    let rabi = detuning * (2.0 * cfg.s0).sqrt();
    let coh_rhs = 1.0_f64.max(rabi).max(2.0 * p_inc.abs() / atom.mass_ratio);
    vec![
        ValidityCondition {
            condition: "slow atoms: Γ∞ ≫ k·p/M and k·Δp/M",
            lhs: 1.0,
            rhs: doppler,
            satisfied: margin(1.0, doppler),
        },
        ValidityCondition {
            condition: "excited-state force: Γ∞ ≫ F_e/Δp (F_e ~ ħkΓ∞)",
            lhs: 1.0,
            rhs: 1.0 / delta_p.abs().max(1e-300),
            satisfied: margin(1.0, 1.0 / delta_p.abs().max(1e-300)),
        },
        ValidityCondition {
            condition: "coherence elimination: |Δ| ≫ max(Γ∞; Rabi; k·p/M)",
            lhs: detuning,
            rhs: coh_rhs,
            satisfied: margin(detuning, coh_rhs),
        },
        ValidityCondition {
            condition: "semiclassical: Δp ≫ ħk",
            lhs: delta_p,
            rhs: 1.0,
            satisfied: margin(delta_p, 1.0),
        },
        ValidityCondition {
            condition: "low saturation: s0 < 0.1",
            lhs: cfg.s0,
            rhs: 0.1,
            satisfied: cfg.s0 < 0.1,
        },
    ]
}

/// Mean bounce of the atom off the evanescent mirror.
#[derive(Debug, Clone)]
pub struct BounceTrajectory {
    pub t: Vec<f64>,
    pub z: Vec<f64>,
    pub p_z: Vec<f64>,
    pub p_x: Vec<f64>,
    /// Diagonal Δp² accumulated along the path, 2∫D_kk dt (ħ²k² units).
    pub delta_p2_accumulated: [f64; 3],
    /// Running Δp² at each recorded time.
    pub delta_p2_t: Vec<[f64; 3]>,
    /// Classical turning point from energy conservation.
    pub turning_point: f64,
    /// Interaction time measured as the window where |p_z| < tanh(1)·p_inc.
    pub bounce_time: f64,
    /// The rule-of-thumb estimate 2M/(κ p_inc) for comparison.
    pub bounce_time_estimate: f64,
}

/// Repulsive dipole-potential amplitude U(0) in ħΓ'∞ units.
fn barrier_height(atom: &AtomConfig, cfg: &EvanescentFieldConfig) -> Result<f64> {
    if !(cfg.detuning_ratio > 0.0) {
        return Err(Error::InvalidConfig(
            "the mirror needs a repulsive potential: detuning_ratio must be > 0".into(),
        ));
    }
    match atom.transition {
        Transition::Scalar => Ok(cfg.detuning_ratio * cfg.intensity0()),
        Transition::SpinHalf(excited) => {
            if *cfg.preset() != PolarizationPreset::Te {
                return Err(Error::UnsupportedPolarization(
                    "the spin-1/2 bounce potential is only defined for the TE preset"
                        .into(),
                ));
            }
            let beta = crate::spin_half::TransitionCoefficients::new(excited).beta;
            Ok(beta * cfg.detuning_ratio * cfg.intensity0())
        }
    }
}

/// Tabulated radiation pressure and diffusion tensor on a uniform z-grid,
/// linearly interpolated along trajectories (the scalar-atom observables are
/// used for the fluorescence recoil in either transition mode).
struct FieldTable {
    z_max: f64,
    dz: f64,
    /// (F_x, F_y) per node.
    force: Vec<[f64; 2]>,
    /// Packed symmetric D: xx, yy, zz, xy, xz, yz.
    diff: Vec<[f64; 6]>,
}

impl FieldTable {
    fn build(cfg: &EvanescentFieldConfig, interface: &Interface, z_max: f64) -> Result<Self> {
        let n = 256;
        let dz = z_max / n as f64;
        let mut force = Vec::with_capacity(n + 1);
        let mut diff = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let z = i as f64 * dz;
            let obs = scalar::observables(cfg, interface, z)?;
            force.push([obs.force[0], obs.force[1]]);
            let d = obs.diffusion;
            diff.push([d[0][0], d[1][1], d[2][2], d[0][1], d[0][2], d[1][2]]);
        }
        Ok(Self { z_max, dz, force, diff })
    }

    fn lerp<const M: usize>(&self, table: &[[f64; M]], z: f64) -> [f64; M] {
        if z >= self.z_max {
            return table[table.len() - 1];
        }
        let x = (z.max(0.0) / self.dz).min((table.len() - 2) as f64);
        let i = x.floor() as usize;
        let f = x - i as f64;
        let mut out = [0.0; M];
        for k in 0..M {
            out[k] = (1.0 - f) * table[i][k] + f * table[i + 1][k];
        }
        out
    }

    fn force_at(&self, z: f64) -> [f64; 2] {
        self.lerp(&self.force, z)
    }

    fn diffusion_at(&self, z: f64) -> [f64; 6] {
        self.lerp(&self.diff, z)
    }
}

/// Cash–Karp embedded Runge–Kutta 4(5) step; returns (y5, max scaled error).
fn cash_karp_step<const N: usize>(
    f: &impl Fn(&[f64; N]) -> [f64; N],
    y: &[f64; N],
    h: f64,
    scale: &[f64; N],
) -> ([f64; N], f64) {
    const A: [[f64; 5]; 5] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
        [3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0, 0.0, 0.0],
        [-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0, 0.0],
        [
            1631.0 / 55296.0,
            175.0 / 512.0,
            575.0 / 13824.0,
            44275.0 / 110592.0,
            253.0 / 4096.0,
        ],
    ];
    const B5: [f64; 6] = [
        37.0 / 378.0,
        0.0,
        250.0 / 621.0,
        125.0 / 594.0,
        0.0,
        512.0 / 1771.0,
    ];
    const B4: [f64; 6] = [
        2825.0 / 27648.0,
        0.0,
        18575.0 / 48384.0,
        13525.0 / 55296.0,
        277.0 / 14336.0,
        1.0 / 4.0,
    ];
    let mut k = [[0.0; N]; 6];
    k[0] = f(y);
    for s in 1..6 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s - 1][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = f(&ys);
    }
    let mut y5 = *y;
    let mut err = 0.0_f64;
    for i in 0..N {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for (s, ks) in k.iter().enumerate() {
            d5 += B5[s] * ks[i];
            d4 += B4[s] * ks[i];
        }
        y5[i] += h * d5;
        err = err.max((h * (d5 - d4)).abs() / scale[i]);
    }
    (y5, err)
}

/// Integrate the mean trajectory of a bounce with incident momentum
/// `p_inc` (ħk, positive = towards the mirror).  The conservative motion
/// runs in the exponential dipole potential; radiation pressure (optional)
/// acts in-plane; the diagonal momentum spread Δp² = 2∫D dt accumulates
/// along the path.
pub fn mean_bounce(
    atom: &AtomConfig,
    cfg: &EvanescentFieldConfig,
    interface: &Interface,
    p_inc: f64,
    include_rad_pressure: bool,
) -> Result<BounceTrajectory> {
    if !(p_inc > 0.0) {
        return Err(Error::InvalidDomain("p_inc must be positive".into()));
    }
    let mass = atom.effective_mass(cfg);
    let u0 = barrier_height(atom, cfg)?;
    let kappa = cfg.kappa();
    let e_kin = p_inc * p_inc / (2.0 * mass);
    if u0 <= e_kin {
        return Err(Error::NoReflection { barrier: u0, kinetic: e_kin });
    }
    let z0 = (u0 / e_kin).ln() / (2.0 * kappa);
    // Launch far enough out that the potential tail is negligible
    // (U(z_start)/E = 1e-12 keeps the outgoing momentum exact to ~5e-13).
    let z_start = z0 + (1e12_f64).ln() / (2.0 * kappa);
    let table = FieldTable::build(cfg, interface, z_start + 1.0)?;

    let potential = |z: f64| u0 * (-2.0 * kappa * z).exp();
    // State: z, p_z, p_x, p_y, Δp²_x, Δp²_y, Δp²_z.
    let rhs = |y: &[f64; 7]| -> [f64; 7] {
        let z = y[0];
        let f_dip = 2.0 * kappa * potential(z);
        let f_rad = if include_rad_pressure {
            table.force_at(z)
        } else {
            [0.0, 0.0]
        };
        let d = table.diffusion_at(z);
        [
            y[1] / mass,
            f_dip,
            f_rad[0],
            f_rad[1],
            2.0 * d[0].max(0.0),
            2.0 * d[1].max(0.0),
            2.0 * d[2].max(0.0),
        ]
    };

    let tau_estimate = 2.0 * mass / (kappa * p_inc);
    let t_flight = 2.0 * (z_start - z0) * mass / p_inc + 10.0 * tau_estimate;

    let mut y = [z_start, -p_inc, 0.0, 0.0, 0.0, 0.0, 0.0];
    let mut t = 0.0;
    let mut h = tau_estimate / 100.0;
    let tol = 1e-11;
    let mut out = BounceTrajectory {
        t: vec![0.0],
        z: vec![y[0]],
        p_z: vec![y[1]],
        p_x: vec![y[2]],
        delta_p2_accumulated: [0.0; 3],
        delta_p2_t: vec![[0.0; 3]],
        turning_point: z0,
        bounce_time: 0.0,
        bounce_time_estimate: tau_estimate,
    };

    let mut steps = 0usize;
    while !(y[0] >= z_start && y[1] > 0.0) {
        steps += 1;
        if steps > 2_000_000 || t > 3.0 * t_flight {
            return Err(Error::NonConvergence { achieved: t, requested: t_flight });
        }
        let scale = [
            z_start.abs() + 1.0,
            p_inc,
            p_inc,
            p_inc,
            1.0 + y[4].abs(),
            1.0 + y[5].abs(),
            1.0 + y[6].abs(),
        ];
        let (y_new, err) = cash_karp_step(&rhs, &y, h, &scale);
        if err <= tol {
            t += h;
            y = y_new;
            out.t.push(t);
            out.z.push(y[0]);
            out.p_z.push(y[1]);
            out.p_x.push(y[2]);
            out.delta_p2_t.push([y[4], y[5], y[6]]);
        }
        let grow = if err > 0.0 {
            0.9 * (tol / err).powf(0.2)
        } else {
            2.0
        };
        h *= grow.clamp(0.2, 2.0);
        if y[0] < 0.0 {
            return Err(Error::NoReflection { barrier: u0, kinetic: e_kin });
        }
    }

    out.delta_p2_accumulated = [y[4], y[5], y[6]];
    out.bounce_time = interaction_window(&out.t, &out.p_z, p_inc);
    Ok(out)
}

/// Width of the time window where |p_z| < tanh(1)·p_inc, by linear
/// interpolation between recorded samples.
fn interaction_window(t: &[f64], p_z: &[f64], p_inc: f64) -> f64 {
    let lim = 1.0_f64.tanh() * p_inc;
    let mut t_in = None;
    let mut t_out = None;
    for i in 1..t.len() {
        let (a, b) = (p_z[i - 1].abs() - lim, p_z[i].abs() - lim);
        if a > 0.0 && b <= 0.0 && t_in.is_none() {
            t_in = Some(t[i - 1] + (t[i] - t[i - 1]) * a / (a - b));
        }
        if a <= 0.0 && b > 0.0 {
            t_out = Some(t[i - 1] + (t[i] - t[i - 1]) * a / (a - b));
        }
    }
    match (t_in, t_out) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    }
}

/// Options for the stochastic ensemble.
#[derive(Debug, Clone, Copy)]
pub struct LangevinOptions {
    pub include_rad_pressure: bool,
    pub include_diffusion: bool,
}

impl Default for LangevinOptions {
    fn default() -> Self {
        Self { include_rad_pressure: true, include_diffusion: true }
    }
}

/// Histogram on fixed, deterministic bin edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn new(center: f64, half_width: f64, bins: usize) -> Self {
        let lo = center - half_width;
        let w = 2.0 * half_width / bins as f64;
        Self {
            edges: (0..=bins).map(|i| lo + w * i as f64).collect(),
            counts: vec![0; bins],
        }
    }

    fn fill(&mut self, x: f64) {
        let lo = self.edges[0];
        let w = self.edges[1] - self.edges[0];
        let i = ((x - lo) / w).floor();
        if i >= 0.0 && (i as usize) < self.counts.len() {
            self.counts[i as usize] += 1;
        }
    }
}

/// Ensemble statistics of the reflected momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStatistics {
    pub n_traj: usize,
    pub mean_p: [f64; 3],
    pub cov_p: [[f64; 3]; 3],
    pub hist_p_z: Histogram,
    pub hist_p_x: Histogram,
    /// Variance of the accumulated stochastic impulse per axis: the ensemble
    /// measurement of the diffusion integral Δp² = 2∫D dt.  Note this is not
    /// the same as the diagonal of `cov_p`: the mirror re-collimates the
    /// normal momentum (a kick near the turning point barely changes the
    /// outgoing energy), so the final Var(p_z) is smaller than the spread
    /// accumulated during the bounce.
    pub kick_variance: [f64; 3],
    /// The deterministic prediction 2∫D dt for comparison.
    pub predicted_delta_p2: [f64; 3],
}

/// Lower-triangular Cholesky factor of a symmetric PSD matrix, with
/// zero-clamping of negative curvature from interpolation noise.
fn chol3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                l[i][j] = if s > 0.0 { s.sqrt() } else { 0.0 };
            } else {
                l[i][j] = if l[j][j] > 0.0 { s / l[j][j] } else { 0.0 };
            }
        }
    }
    l
}

/// Sample `n_traj` stochastic bounces with Euler–Maruyama steps and Gaussian
/// momentum kicks of covariance 2D(z)dt.  Each trajectory draws from its own
/// counter-based RNG stream, so the result is byte-identical for a fixed
/// seed regardless of the number of worker threads.
pub fn langevin_ensemble(
    atom: &AtomConfig,
    cfg: &EvanescentFieldConfig,
    interface: &Interface,
    p_inc: f64,
    n_traj: usize,
    seed: u64,
    opts: LangevinOptions,
) -> Result<EnsembleStatistics> {
    if n_traj == 0 {
        return Err(Error::InvalidDomain("n_traj must be at least 1".into()));
    }
    let mean = mean_bounce(atom, cfg, interface, p_inc, opts.include_rad_pressure)?;
    let mass = atom.effective_mass(cfg);
    let u0 = barrier_height(atom, cfg)?;
    let kappa = cfg.kappa();
    let z_start = mean.z[0];
    let t_total = *mean.t.last().unwrap();
    let table = FieldTable::build(cfg, interface, z_start + 1.0)?;

    // Fixed step and step count for every trajectory (determinism contract).
    let dt = (1e-3 * mean.bounce_time_estimate)
        .min(0.05 * mass / (2.0 * kappa * p_inc));
    let n_steps = (1.5 * t_total / dt).ceil() as usize;

    let finals: Vec<([f64; 3], [f64; 3])> = (0..n_traj)
        .into_par_iter()
        .map(|traj| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(traj as u64);
            let mut z = z_start;
            let mut p = [0.0, 0.0, -p_inc]; // p_x, p_y, p_z
            let mut kicks = [0.0; 3]; // accumulated stochastic impulse
            for _ in 0..n_steps {
                let f_dip = 2.0 * kappa * u0 * (-2.0 * kappa * z).exp();
                p[2] += dt * f_dip;
                if opts.include_rad_pressure {
                    let f = table.force_at(z);
                    p[0] += dt * f[0];
                    p[1] += dt * f[1];
                }
                if opts.include_diffusion {
                    let d = table.diffusion_at(z);
                    let m = [
                        [d[0], d[3], d[4]],
                        [d[3], d[1], d[5]],
                        [d[4], d[5], d[2]],
                    ];
                    let l = chol3(&m);
                    let n: [f64; 3] = [
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                    ];
                    let amp = (2.0 * dt).sqrt();
                    for i in 0..3 {
                        for (j, nj) in n.iter().enumerate().take(i + 1) {
                            let kick = amp * l[i][j] * nj;
                            p[i] += kick;
                            kicks[i] += kick;
                        }
                    }
                }
                z += dt * p[2] / mass;
            }
            (p, kicks)
        })
        .collect();

    // Sequential, order-independent-by-construction reduction.
    let mut mean_p = [0.0; 3];
    let mut mean_k = [0.0; 3];
    for (p, k) in &finals {
        for i in 0..3 {
            mean_p[i] += p[i];
            mean_k[i] += k[i];
        }
    }
    for i in 0..3 {
        mean_p[i] /= n_traj as f64;
        mean_k[i] /= n_traj as f64;
    }
    let mut cov = [[0.0; 3]; 3];
    let mut kick_var = [0.0; 3];
    for (p, k) in &finals {
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += (p[i] - mean_p[i]) * (p[j] - mean_p[j]);
            }
            kick_var[i] += (k[i] - mean_k[i]) * (k[i] - mean_k[i]);
        }
    }
    if n_traj > 1 {
        let norm = (n_traj - 1) as f64;
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] /= norm;
            }
            kick_var[i] /= norm;
        }
    }

    let spread = |k: usize| mean.delta_p2_accumulated[k].max(1e-12).sqrt();
    let mut hist_p_z = Histogram::new(p_inc, 8.0 * spread(2) + 1.0, 61);
    let mut hist_p_x = Histogram::new(
        *mean.p_x.last().unwrap(),
        8.0 * spread(0) + 1.0,
        61,
    );
    for (p, _) in &finals {
        hist_p_z.fill(p[2]);
        hist_p_x.fill(p[0]);
    }

    Ok(EnsembleStatistics {
        n_traj,
        mean_p,
        cov_p: cov,
        hist_p_z,
        hist_p_x,
        kick_variance: kick_var,
        predicted_delta_p2: mean.delta_p2_accumulated,
    })
}
