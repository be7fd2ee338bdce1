//! Command-line front end: wires a TOML run configuration to the library
//! and emits figure-ready CSV/JSON tables with reproducible headers.

use std::fmt::Write as _;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use evmirror::correlations::{one_point_rates, weights};
use evmirror::quadrature::QuadratureSpec;
use evmirror::interface::{EvanescentFieldConfig, Interface, PolarizationPreset};
use evmirror::scalar;
use evmirror::semiclassical::{
    check_validity, langevin_ensemble, mean_bounce, AtomConfig, LangevinOptions, Transition,
};
use evmirror::spin_half::{
    evolve_wigner_slice, integrate_pumping, ExcitedJ, TransitionCoefficients, WignerSlice,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "evmirror", version, about = "Evanescent-mirror atom optics tables")]
struct Cli {
    /// TOML run configuration (defaults used when omitted).
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Override a config key, e.g. --set field.kappa=0.1 (repeatable).
    #[arg(long = "set", global = true, value_name = "K=V")]
    sets: Vec<String>,
    /// Output path (overrides output.path; "-" = stdout).
    #[arg(long, global = true)]
    out: Option<String>,
    /// Output format (overrides output.format).
    #[arg(long, global = true)]
    format: Option<FormatArg>,
    /// RNG seed for stochastic commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker thread count (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Interface correlation weights and normalized decay rates vs z.
    Correlations,
    /// Fluorescence rate vs z, with the free-space reference.
    Rates,
    /// Radiation pressure force vs z, with direction and naive magnitude.
    Force,
    /// Momentum diffusion tensor vs z, with the free-space baseline trace.
    Diffusion,
    /// Optical-pumping time series of the ground-state spin.
    Pump,
    /// Mean bounce off the mirror (validity table echoed first).
    Bounce,
    /// Recoil-induced magnetization of a Wigner-function momentum slice.
    Magnetize,
    /// Validity conditions of the semiclassical treatment.
    Check,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunConfig {
    interface: InterfaceSection,
    field: FieldSection,
    atom: AtomSection,
    scan: ScanSection,
    output: OutputSection,
    pump: PumpSection,
    bounce: BounceSection,
    magnetize: MagnetizeSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            interface: Default::default(),
            field: Default::default(),
            atom: Default::default(),
            scan: Default::default(),
            output: Default::default(),
            pump: Default::default(),
            bounce: Default::default(),
            magnetize: Default::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct InterfaceSection {
    n0: f64,
}
impl Default for InterfaceSection {
    fn default() -> Self {
        Self { n0: 1.5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FieldSection {
    polarization: String,
    kappa: f64,
    s0: f64,
    detuning_ratio: f64,
}
impl Default for FieldSection {
    fn default() -> Self {
        Self {
            polarization: "te".into(),
            kappa: 1.0,
            s0: 0.01,
            detuning_ratio: 100.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct AtomSection {
    transition: String,
    gamma_over_recoil: f64,
}
impl Default for AtomSection {
    fn default() -> Self {
        Self { transition: "scalar".into(), gamma_over_recoil: 400.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ScanSection {
    variable: String,
    start: f64,
    stop: f64,
    points: usize,
}
impl Default for ScanSection {
    fn default() -> Self {
        Self { variable: "z".into(), start: 0.0, stop: 5.0, points: 256 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OutputSection {
    path: String,
    format: String,
}
impl Default for OutputSection {
    fn default() -> Self {
        Self { path: "-".into(), format: "csv".into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PumpSection {
    /// Height above the surface (1/k).
    z: f64,
    /// Step-size cap, also the output resolution (1/Γ'∞).
    dt_max: f64,
}
impl Default for PumpSection {
    fn default() -> Self {
        Self { z: 0.5, dt_max: 0.05 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct BounceSection {
    /// Incident |p_z| (ħk).
    p_inc: f64,
    /// Momentum spread assumed by the validity checks (ħk).
    delta_p: f64,
    include_rad_pressure: bool,
    /// Langevin trajectories; 0 = deterministic mean bounce only.
    n_traj: usize,
}
impl Default for BounceSection {
    fn default() -> Self {
        Self { p_inc: 10.0, delta_p: 15.0, include_rad_pressure: true, n_traj: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MagnetizeSection {
    /// Height above the surface (1/k).
    z: f64,
    /// Evolution time (1/Γ'∞).
    t_end: f64,
    /// RMS width of the initial Gaussian momentum distribution (ħk).
    width: f64,
}
impl Default for MagnetizeSection {
    fn default() -> Self {
        Self { z: 0.5, t_end: 50.0, width: 5.0 }
    }
}

impl RunConfig {
    fn preset(&self) -> anyhow::Result<PolarizationPreset> {
        match self.field.polarization.to_ascii_lowercase().as_str() {
            "te" => Ok(PolarizationPreset::Te),
            "tm" => Ok(PolarizationPreset::Tm),
            "circ" => Ok(PolarizationPreset::Circ),
            other => Err(anyhow!(
                "field.polarization: unknown value {other:?} (expected te, tm or circ)"
            )),
        }
    }

    fn field(&self) -> anyhow::Result<EvanescentFieldConfig> {
        EvanescentFieldConfig::new(
            self.preset()?,
            self.field.kappa,
            self.field.s0,
            self.field.detuning_ratio,
        )
        .map_err(|e| anyhow!("field: {e}"))
    }

    fn interface(&self) -> anyhow::Result<Interface> {
        Interface::new(self.interface.n0).map_err(|e| anyhow!("interface.n0: {e}"))
    }

    fn transition(&self) -> anyhow::Result<Transition> {
        match self.atom.transition.to_ascii_lowercase().as_str() {
            "scalar" => Ok(Transition::Scalar),
            "spin_half_je12" => Ok(Transition::SpinHalf(ExcitedJ::Half)),
            "spin_half_je32" => Ok(Transition::SpinHalf(ExcitedJ::ThreeHalves)),
            other => Err(anyhow!(
                "atom.transition: unknown value {other:?} \
                 (expected scalar, spin_half_je12 or spin_half_je32)"
            )),
        }
    }

    fn excited_j(&self) -> anyhow::Result<ExcitedJ> {
        match self.transition()? {
            Transition::SpinHalf(j) => Ok(j),
            Transition::Scalar => Err(anyhow!(
                "atom.transition: this command needs a spin-1/2 ground state \
                 (spin_half_je12 or spin_half_je32)"
            )),
        }
    }

    fn atom(&self) -> anyhow::Result<AtomConfig> {
        AtomConfig::new(self.atom.gamma_over_recoil, 1.0, self.transition()?)
            .map_err(|e| anyhow!("atom.gamma_over_recoil: {e}"))
    }

    fn scan_grid(&self, expected_variable: &str) -> anyhow::Result<Vec<f64>> {
        if self.scan.variable != expected_variable {
            return Err(anyhow!(
                "scan.variable: expected {expected_variable:?} for this command, got {:?}",
                self.scan.variable
            ));
        }
        if self.scan.points < 2 {
            return Err(anyhow!("scan.points: must be at least 2, got {}", self.scan.points));
        }
        if !(self.scan.start < self.scan.stop) {
            return Err(anyhow!(
                "scan.start/stop: need start < stop, got {} .. {}",
                self.scan.start,
                self.scan.stop
            ));
        }
        let n = self.scan.points;
        let step = (self.scan.stop - self.scan.start) / (n - 1) as f64;
        Ok((0..n).map(|i| self.scan.start + step * i as f64).collect())
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut value: toml::Value = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            text.parse().context("parsing config file")?
        }
        None => toml::Value::Table(Default::default()),
    };
    for set in &cli.sets {
        apply_set(&mut value, set)?;
    }
    let config: RunConfig = value.try_into().context("validating config")?;
    Ok(config)
}

/// Apply a `--set section.key=value` override onto the raw TOML tree.
fn apply_set(root: &mut toml::Value, set: &str) -> anyhow::Result<()> {
    let (path, raw) = set
        .split_once('=')
        .ok_or_else(|| anyhow!("--set {set:?}: expected key=value"))?;
    let value = parse_scalar(raw.trim());
    let mut node = root;
    let parts: Vec<&str> = path.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(anyhow!("--set {set:?}: empty key segment"));
    }
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| anyhow!("--set {set:?}: {part} is not a table"))?;
        node = table
            .entry(part.to_string())
            .or_insert(toml::Value::Table(Default::default()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| anyhow!("--set {set:?}: parent is not a table"))?;
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn parse_scalar(raw: &str) -> toml::Value {
    if let Ok(b) = raw.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    if let Ok(i) = raw.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return toml::Value::Float(f);
    }
    toml::Value::String(raw.trim_matches('"').to_string())
}

// ---------------------------------------------------------------------------
// Table assembly and output
// ---------------------------------------------------------------------------

enum Cell {
    Num(f64),
    Text(String),
}

struct Table {
    /// Column names with units, e.g. "z [1/k]".
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    /// Extra "# key = value" header comments (scalars, diagnostics).
    notes: Vec<(String, String)>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new(), notes: Vec::new() }
    }

    fn push_nums(&mut self, row: Vec<f64>) {
        self.rows.push(row.into_iter().map(Cell::Num).collect());
    }

    fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.notes.push((key.to_string(), value.to_string()));
    }
}

fn fmt_num(x: f64) -> String {
    // 17 significant digits reproduce the f64 bit pattern exactly.
    format!("{x:.16e}")
}

fn render_csv(table: &Table, config: &RunConfig, seed: u64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# evmirror {VERSION}");
    let _ = writeln!(out, "# seed = {seed}");
    let _ = writeln!(
        out,
        "# units: k = 1 (lengths 1/k), rates and times in Γ'∞, momenta in ħk, \
         forces in ħkΓ'∞, diffusion in ħ²k²Γ'∞"
    );
    let resolved = toml::to_string(config).unwrap_or_default();
    let _ = writeln!(out, "# config:");
    for line in resolved.lines() {
        let _ = writeln!(out, "#   {line}");
    }
    for (k, v) in &table.notes {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let _ = writeln!(out, "{}", table.columns.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(x) => fmt_num(*x),
                Cell::Text(s) => s.clone(),
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

fn render_json(table: &Table, config: &RunConfig, seed: u64) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        tool: &'static str,
        version: &'static str,
        seed: u64,
        units: &'static str,
        config: &'a RunConfig,
        notes: Vec<(String, String)>,
        columns: &'a [&'static str],
        rows: Vec<Vec<serde_json::Value>>,
    }
    let rows = table
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| match c {
                    Cell::Num(x) => serde_json::Value::String(fmt_num(*x)),
                    Cell::Text(s) => serde_json::Value::String(s.clone()),
                })
                .collect()
        })
        .collect();
    let doc = Doc {
        tool: "evmirror",
        version: VERSION,
        seed,
        units: "k = 1; rates/times in Γ'∞; momenta in ħk; forces in ħkΓ'∞; \
                diffusion in ħ²k²Γ'∞",
        config,
        notes: table.notes.clone(),
        columns: &table.columns,
        rows,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable document");
    s.push('\n');
    s
}

fn emit(table: &Table, config: &RunConfig, cli: &Cli) -> anyhow::Result<()> {
    let format = match cli.format {
        Some(FormatArg::Csv) => "csv",
        Some(FormatArg::Json) => "json",
        None => config.output.format.as_str(),
    };
    let text = match format {
        "csv" => render_csv(table, config, cli.seed),
        "json" => render_json(table, config, cli.seed),
        other => return Err(anyhow!("output.format: unknown format {other:?}")),
    };
    let path = cli.out.as_deref().unwrap_or(config.output.path.as_str());
    if path == "-" || path.is_empty() {
        print!("{text}");
    } else {
        std::fs::write(path, text).with_context(|| format!("writing {path}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_correlations(config: &RunConfig) -> anyhow::Result<Table> {
    let interface = config.interface()?;
    let spec = QuadratureSpec::default();
    let mut table = Table::new(vec![
        "z [1/k]",
        "c0",
        "q0",
        "a1",
        "q2",
        "c_par",
        "c_perp",
    ]);
    for z in config.scan_grid("z")? {
        let w = weights(&interface, z, 0.0, &spec)?;
        let r = one_point_rates(&interface, z)?;
        table.push_nums(vec![z, w.c0, w.q0, w.a1, w.q2, r.c_par, r.c_perp]);
    }
    Ok(table)
}

fn cmd_rates(config: &RunConfig) -> anyhow::Result<Table> {
    let interface = config.interface()?;
    let field = config.field()?;
    let mut table = Table::new(vec![
        "z [1/k]",
        "gamma [Γ'∞]",
        "gamma_free [Γ'∞]",
        "c_par",
        "c_perp",
    ]);
    for z in config.scan_grid("z")? {
        let gamma = scalar::fluorescence_rate(&field, &interface, z)?;
        let gamma_free = field.intensity0() * field.intensity_decay(z);
        let r = one_point_rates(&interface, z)?;
        table.push_nums(vec![z, gamma, gamma_free, r.c_par, r.c_perp]);
    }
    Ok(table)
}

fn cmd_force(config: &RunConfig) -> anyhow::Result<Table> {
    let interface = config.interface()?;
    let field = config.field()?;
    let mut table = Table::new(vec![
        "z [1/k]",
        "F_x [ħkΓ'∞]",
        "F_y [ħkΓ'∞]",
        "F_z [ħkΓ'∞]",
        "angle [deg]",
        "|F| [ħkΓ'∞]",
        "|F|_naive [ħkΓ'∞]",
    ]);
    for z in config.scan_grid("z")? {
        let rp = scalar::radiation_pressure(&field, &interface, z)?;
        let f = rp.force;
        let mag = (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt();
        let angle = f[1].atan2(f[0]).to_degrees();
        // Rule-of-thumb magnitude: free-space fluorescence rate times the
        // in-plane photon momentum Q, ignoring all interface corrections.
        let naive = field.intensity0() * field.intensity_decay(z) * field.q();
        table.push_nums(vec![z, f[0], f[1], f[2], angle, mag, naive]);
    }
    Ok(table)
}

fn cmd_diffusion(config: &RunConfig) -> anyhow::Result<Table> {
    let interface = config.interface()?;
    let field = config.field()?;
    let mut table = Table::new(vec![
        "z [1/k]",
        "D_xx [ħ²k²Γ'∞]",
        "D_yy [ħ²k²Γ'∞]",
        "D_zz [ħ²k²Γ'∞]",
        "trace [ħ²k²Γ'∞]",
        "trace_free_space [ħ²k²Γ'∞]",
    ]);
    for z in config.scan_grid("z")? {
        let d = scalar::diffusion_tensor(&field, &interface, z)?.diffusion;
        let trace = d[0][0] + d[1][1] + d[2][2];
        let baseline = scalar::free_space_baseline_trace(&field, z);
        table.push_nums(vec![z, d[0][0], d[1][1], d[2][2], trace, baseline]);
    }
    Ok(table)
}

fn cmd_pump(config: &RunConfig) -> anyhow::Result<Table> {
    let interface = config.interface()?;
    let field = config.field()?;
    let coeffs = TransitionCoefficients::new(config.excited_j()?);
    if config.scan.variable != "t" {
        return Err(anyhow!(
            "scan.variable: expected \"t\" for pump, got {:?}",
            config.scan.variable
        ));
    }
    if !(config.scan.stop > 0.0) {
        return Err(anyhow!("scan.stop: pump needs a positive end time"));
    }
    let traj = integrate_pumping(
        &field,
        &coeffs,
        &interface,
        config.pump.z,
        [0.0, 0.0, 0.0],
        config.scan.stop,
        config.pump.dt_max,
    )?;
    let mut table = Table::new(vec!["t [1/Γ'∞]", "J_x", "J_y", "J_z"]);
    table.note("steady_reached", traj.steady);
    if traj.steady {
        let j = traj.j.last().expect("nonempty trajectory");
        table.note("steady_J_x", fmt_num(j[0]));
        table.note("steady_J_y", fmt_num(j[1]));
        table.note("steady_J_z", fmt_num(j[2]));
    }
    for (t, j) in traj.times.iter().zip(&traj.j) {
        table.push_nums(vec![*t, j[0], j[1], j[2]]);
    }
    Ok(table)
}

fn cmd_bounce(config: &RunConfig, seed: u64) -> anyhow::Result<Table> {
    let interface = config.interface()?;
    let field = config.field()?;
    field.check_launchable(&interface)?;
    let atom = config.atom()?;
    let b = &config.bounce;

    let mut table = Table::new(vec![
        "t [1/Γ'∞]",
        "z [1/k]",
        "p_z [ħk]",
        "p_x [ħk]",
        "dp2_x [ħ²k²]",
        "dp2_y [ħ²k²]",
        "dp2_z [ħ²k²]",
    ]);
    for check in check_validity(&atom, &field, b.p_inc, b.delta_p) {
        table.note(
            &format!("validity: {}", check.condition),
            format!(
                "lhs = {}, rhs = {}, satisfied = {}",
                fmt_num(check.lhs),
                fmt_num(check.rhs),
                check.satisfied
            ),
        );
    }

    let bounce = mean_bounce(&atom, &field, &interface, b.p_inc, b.include_rad_pressure)?;
    table.note("turning_point [1/k]", fmt_num(bounce.turning_point));
    table.note("bounce_time [1/Γ'∞]", fmt_num(bounce.bounce_time));
    table.note(
        "bounce_time_estimate [1/Γ'∞]",
        fmt_num(bounce.bounce_time_estimate),
    );
    for (axis, v) in ["x", "y", "z"].iter().zip(bounce.delta_p2_accumulated) {
        table.note(&format!("delta_p2_{axis} [ħ²k²]"), fmt_num(v));
    }

    if b.n_traj > 0 {
        let stats = langevin_ensemble(
            &atom,
            &field,
            &interface,
            b.p_inc,
            b.n_traj,
            seed,
            LangevinOptions {
                include_rad_pressure: b.include_rad_pressure,
                include_diffusion: true,
            },
        )?;
        table.note("ensemble_n_traj", stats.n_traj);
        for (axis, i) in ["x", "y", "z"].iter().zip(0..3) {
            table.note(&format!("ensemble_mean_p_{axis} [ħk]"), fmt_num(stats.mean_p[i]));
            table.note(
                &format!("ensemble_var_p_{axis} [ħ²k²]"),
                fmt_num(stats.cov_p[i][i]),
            );
            table.note(
                &format!("ensemble_kick_variance_{axis} [ħ²k²]"),
                fmt_num(stats.kick_variance[i]),
            );
        }
    }

    for i in 0..bounce.t.len() {
        let s = bounce.delta_p2_t[i];
        table.push_nums(vec![
            bounce.t[i],
            bounce.z[i],
            bounce.p_z[i],
            bounce.p_x[i],
            s[0],
            s[1],
            s[2],
        ]);
    }
    Ok(table)
}

fn cmd_magnetize(config: &RunConfig) -> anyhow::Result<Table> {
    let interface = config.interface()?;
    let field = config.field()?;
    let coeffs = TransitionCoefficients::new(config.excited_j()?);
    let m = &config.magnetize;
    let p_grid = config.scan_grid("p_x")?;
    if !(m.width > 0.0) || !(m.t_end > 0.0) {
        return Err(anyhow!("magnetize.width and magnetize.t_end must be positive"));
    }
    let w: Vec<f64> = p_grid
        .iter()
        .map(|p| (-p * p / (2.0 * m.width * m.width)).exp())
        .collect();
    let norm: f64 = w.iter().sum();
    let slice = WignerSlice {
        p_grid: p_grid.clone(),
        w: w.iter().map(|x| x / norm).collect(),
        j_y: vec![0.0; p_grid.len()],
        z: m.z,
    };
    let evo = evolve_wigner_slice(&slice, &field, &coeffs, &interface, m.t_end)?;
    let mut table = Table::new(vec!["p_x [ħk]", "w", "J_y"]);
    table.note("max_cohort_separation [ħk]", fmt_num(evo.max_cohort_separation));
    table.note("jy_gradient_correlation", fmt_num(evo.jy_gradient_correlation));
    table.note("mass_error", fmt_num(evo.mass_error));
    let max_jy = evo
        .final_slice
        .j_y
        .iter()
        .fold(0.0_f64, |a, x| a.max(x.abs()));
    table.note("max_abs_J_y", fmt_num(max_jy));
    for i in 0..evo.final_slice.p_grid.len() {
        table.push_nums(vec![
            evo.final_slice.p_grid[i],
            evo.final_slice.w[i],
            evo.final_slice.j_y[i],
        ]);
    }
    Ok(table)
}

fn cmd_check(config: &RunConfig) -> anyhow::Result<Table> {
    let field = config.field()?;
    let atom = config.atom()?;
    let b = &config.bounce;
    let mut table = Table::new(vec!["condition", "lhs", "rhs", "satisfied"]);
    for check in check_validity(&atom, &field, b.p_inc, b.delta_p) {
        table.rows.push(vec![
            Cell::Text(check.condition.to_string()),
            Cell::Num(check.lhs),
            Cell::Num(check.rhs),
            Cell::Text(check.satisfied.to_string()),
        ]);
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if let Some(lib) = err.downcast_ref::<evmirror::Error>() {
        match lib {
            evmirror::Error::NonConvergence { .. }
            | evmirror::Error::StiffnessFailure { .. } => 3,
            _ => 2,
        }
    } else {
        2
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("initializing worker threads")?;
    }
    let config = load_config(cli)?;
    let table = match cli.command {
        Command::Correlations => cmd_correlations(&config)?,
        Command::Rates => cmd_rates(&config)?,
        Command::Force => cmd_force(&config)?,
        Command::Diffusion => cmd_diffusion(&config)?,
        Command::Pump => cmd_pump(&config)?,
        Command::Bounce => cmd_bounce(&config, cli.seed)?,
        Command::Magnetize => cmd_magnetize(&config)?,
        Command::Check => cmd_check(&config)?,
    };
    emit(&table, &config, cli)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
