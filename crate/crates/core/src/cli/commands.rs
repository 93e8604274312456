//! One function per subcommand: typed parameters in, reports out.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{Profile, RunConfig};
use crate::error::{LabError, Result};
use crate::evolve::{evolve, State, Trajectory};
use crate::experiments::{
    apriori_diagnostic, conjugation_order, contraction_run, double_gauge_run, estimate_suite, gauge_consistency_run,
    illposed_scan, iterate_oracle_report, linear_exactness, lipschitz_probe, quadratic_chain_run, reduction_run,
    self_convergence, total_integral_report, AprioriParams, AprioriVariant, ContractionParams, EstimateParams, Family,
    IllposedDataSpec, ScanParams,
};
use crate::gauge::{make_gauge_bundle, BoundaryCheck, EquationSpec, Variant};
use crate::norms::{composite_norm, Composite, NormParams};
use crate::report::ExperimentReport;
use crate::spectral::{derivative, sobolev_norm, Field, Grid1D};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Picard,
    GaugeCheck,
    Estimates,
    IllposedA,
    IllposedB,
    Lipschitz,
    Apriori,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Simulate,
        Command::Picard,
        Command::GaugeCheck,
        Command::Estimates,
        Command::IllposedA,
        Command::IllposedB,
        Command::Lipschitz,
        Command::Apriori,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Picard => "picard",
            Command::GaugeCheck => "gauge-check",
            Command::Estimates => "estimates",
            Command::IllposedA => "illposed-a",
            Command::IllposedB => "illposed-b",
            Command::Lipschitz => "lipschitz",
            Command::Apriori => "apriori",
        }
    }

    pub fn default_params(self) -> Value {
        let v = match self {
            Command::Simulate => serde_json::to_value(SimulateParams::default()),
            Command::Picard => serde_json::to_value(ContractionParams::default()),
            Command::GaugeCheck => serde_json::to_value(GaugeParams::default()),
            Command::Estimates => serde_json::to_value(EstimateParams::default()),
            Command::IllposedA => serde_json::to_value(IllposedParams::pilod()),
            Command::IllposedB => serde_json::to_value(IllposedParams::bounded_primitive()),
            Command::Lipschitz => serde_json::to_value(LipschitzParams::default()),
            Command::Apriori => serde_json::to_value(AprioriParams::new(AprioriVariant::Z, vec![0.1, 0.2, 0.3, 0.4, 0.5])),
        };
        v.expect("parameter defaults serialize")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    /// Composite norms evaluated over the trajectory.
    pub norms: Vec<Composite>,
    pub norm: NormParams,
    /// Also estimate the order from steps `dt, dt/2, dt/4`.
    pub convergence: bool,
}

impl Default for SimulateParams {
    fn default() -> Self {
        Self {
            norms: vec![Composite::X, Composite::Y],
            norm: NormParams::default(),
            convergence: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaugeParams {
    /// Horizon of the double-gauge and quadratic-chain runs.
    pub short_t: f64,
    /// `c2` of the `c1 = 0` reduction run.
    pub reduction_c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Window half-length and size for the conjugation identity.
    pub conjugation_half_length: f64,
    pub conjugation_n: usize,
    pub conjugation_t0: f64,
    pub conjugation_steps: Vec<f64>,
}

impl Default for GaugeParams {
    fn default() -> Self {
        Self {
            short_t: 0.25,
            reduction_c2: 1.0,
            c3: 0.3,
            c4: 0.2,
            conjugation_half_length: 8.0 * std::f64::consts::PI,
            conjugation_n: 512,
            conjugation_t0: 0.3,
            conjugation_steps: vec![0.1, 0.05, 0.025, 0.0125],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TotalIntegralParams {
    #[serde(rename = "N")]
    pub n: u64,
    /// Windows `L = m·2π/δ`.
    pub multiples: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleParams {
    pub scales: Vec<u64>,
    pub s: f64,
    pub t: f64,
    pub nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IllposedParams {
    pub scans: Vec<ScanParams>,
    #[serde(default)]
    pub total_integral: Option<TotalIntegralParams>,
    #[serde(default)]
    pub oracle: Option<OracleParams>,
}

impl IllposedParams {
    pub fn pilod() -> Self {
        Self {
            scans: vec![ScanParams::pilod(0.0), ScanParams::pilod(1.0)],
            total_integral: Some(TotalIntegralParams { n: 8, multiples: vec![1, 2, 4, 8] }),
            oracle: Some(OracleParams { scales: vec![4, 8], s: 0.0, t: 0.01, nodes: 33 }),
        }
    }

    pub fn bounded_primitive() -> Self {
        Self {
            scans: vec![ScanParams::bounded_primitive(0.5, 1.0), ScanParams::bounded_primitive(0.0, 1.0)],
            total_integral: None,
            oracle: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LipschitzParams {
    pub deltas: Vec<f64>,
    pub perturbation: Profile,
    /// Repeat the probe with all coefficients zero.
    pub linear_reference: bool,
}

impl Default for LipschitzParams {
    fn default() -> Self {
        Self {
            deltas: vec![1e-2, 1e-3, 1e-4],
            perturbation: Profile { center: 1.0, ..Profile::gaussian(1.0) },
            linear_reference: true,
        }
    }
}

/// Everything a command hands back to the writer.
#[derive(Debug, Default)]
pub struct Outcome {
    pub params: Value,
    pub diagnostics: Value,
    pub reports: Vec<ExperimentReport>,
}

fn params<T: DeserializeOwned + Serialize>(cfg: &RunConfig) -> Result<(T, Value)> {
    let p: T = serde_json::from_value(cfg.params.clone())
        .map_err(|e| LabError::Config(format!("bad params for {}: {e}", cfg.command.name())))?;
    let echo = serde_json::to_value(&p)?;
    Ok((p, echo))
}

fn grid_diagnostics(grid: &Grid1D) -> Value {
    json!({
        "L": grid.half_length(),
        "n": grid.n(),
        "dx": grid.dx(),
        "dxi": grid.dxi(),
        "nyquist": grid.nyquist(),
    })
}

fn data_diagnostics(grid: &Grid1D, u0: &Field) -> Value {
    json!({
        "grid": grid_diagnostics(grid),
        "data": {
            "boundary": BoundaryCheck::of(u0),
            "sup": u0.sup_norm(),
            "l2": u0.l2_norm(),
            "h1": sobolev_norm(u0, 1.0),
            "total_integral": u0.total_integral(),
        },
    })
}

/// State for `spec.variant` built from the physical datum `u0`.
pub fn initial_state(u0: &Field, spec: &EquationSpec) -> Result<State> {
    match spec.variant {
        Variant::DirectKdv | Variant::Quadratic => Ok(State::single("u", u0.clone())),
        Variant::Kdv => Ok(State::single("v", u0.clone())),
        Variant::Coupled => {
            let b = make_gauge_bundle(u0, spec)?;
            State::new(vec![("u", b.u.clone()), ("vf", b.vf.expect("coupled bundle carries vf"))])
        }
        Variant::DoubleGauged => {
            let b = make_gauge_bundle(u0, spec)?;
            State::new(vec![
                ("uf", b.uf.expect("double gauge carries uf")),
                ("vf", b.vf.expect("double gauge carries vf")),
            ])
        }
        Variant::QuadraticGauged => {
            let b = make_gauge_bundle(u0, spec)?;
            State::new(vec![("u", u0.clone()), ("ux", derivative(u0, 1)), ("w", b.w.expect("chain carries w"))])
        }
    }
}

fn trajectory_report(traj: &Trajectory) -> ExperimentReport {
    let mut cols = vec!["t".to_string()];
    for n in &traj.names {
        cols.push(format!("{n}_l2"));
        cols.push(format!("{n}_sup"));
        cols.push(format!("{n}_h1"));
    }
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut rep = ExperimentReport::new("trajectory", &col_refs);
    for (j, t) in traj.times.iter().enumerate() {
        let mut row = vec![*t];
        for series in &traj.series {
            let f = &series[j];
            row.extend([f.l2_norm(), f.sup_norm(), sobolev_norm(f, 1.0)]);
        }
        rep.row(row);
    }
    rep.scalar("edge_drift", traj.edge_drift);
    rep
}

fn simulate(cfg: &RunConfig) -> Result<Outcome> {
    let (p, echo): (SimulateParams, _) = params(cfg)?;
    let grid = cfg.grid.build()?;
    let u0 = cfg.data.sample(grid)?;
    let spec = cfg.equation;
    let mut traj = evolve(&initial_state(&u0, &spec)?, cfg.t_final, &cfg.stepper, &spec)?;
    traj.spec = Some(spec);
    let mut reports = vec![trajectory_report(&traj)];

    let mut norms = ExperimentReport::new("norms", &[]);
    for which in &p.norms {
        let r = composite_norm(&traj, *which, &p.norm)?;
        let key = serde_json::to_value(which)?.as_str().unwrap_or("norm").to_string();
        for c in &r.components {
            norms.scalar(format!("{key}.{}", c.label), c.value);
        }
        norms.scalar(format!("{key}.total"), r.total);
    }
    reports.push(norms);
    let single = spec.variant.state_names().len() == 1;
    if spec.is_linear() && single {
        reports.push(linear_exactness(&u0, cfg.t_final, &cfg.stepper)?);
    }
    if p.convergence && single {
        reports.push(self_convergence(&u0, cfg.t_final, cfg.stepper.dt / 4.0, &spec, &cfg.stepper)?);
    }
    Ok(Outcome { params: echo, diagnostics: data_diagnostics(&grid, &u0), reports })
}

fn picard(cfg: &RunConfig) -> Result<Outcome> {
    let (p, echo): (ContractionParams, _) = params(cfg)?;
    let grid = cfg.grid.build()?;
    let u0 = cfg.data.sample(grid)?;
    let (rep, full) = contraction_run(&u0, cfg.t_final, &cfg.equation, &p)?;
    let mut diagnostics = data_diagnostics(&grid, &u0);
    diagnostics["fixed_point_edge_drift"] = json!(full.trajectory.edge_drift);
    Ok(Outcome { params: echo, diagnostics, reports: vec![rep] })
}

fn gauge_check(cfg: &RunConfig) -> Result<Outcome> {
    let (p, echo): (GaugeParams, _) = params(cfg)?;
    let grid = cfg.grid.build()?;
    let u0 = cfg.data.sample(grid)?;
    let (c1, c2) = (cfg.equation.c1, cfg.equation.c2);
    let quadratic = EquationSpec::quadratic_gauged(c1, c2, p.c3, p.c4);
    let conj_grid = Grid1D::new(p.conjugation_half_length, p.conjugation_n)?;
    let reports = vec![
        gauge_consistency_run(&u0, cfg.t_final, c1, c2, &cfg.stepper)?,
        reduction_run(&u0, cfg.t_final, p.reduction_c2, &cfg.stepper)?,
        double_gauge_run(&u0, p.short_t, c1, c2, &cfg.stepper)?,
        quadratic_chain_run(&u0, p.short_t, &quadratic, &cfg.stepper)?,
        conjugation_order(conj_grid, p.conjugation_t0, &p.conjugation_steps)?,
    ];
    Ok(Outcome { params: echo, diagnostics: data_diagnostics(&grid, &u0), reports })
}

fn estimates(cfg: &RunConfig) -> Result<Outcome> {
    let (mut p, echo): (EstimateParams, _) = params(cfg)?;
    p.seed = cfg.seed;
    let grid = cfg.grid.build()?;
    let reports = estimate_suite(grid, &p)?;
    Ok(Outcome { params: echo, diagnostics: json!({ "grid": grid_diagnostics(&grid) }), reports })
}

fn illposed(cfg: &RunConfig) -> Result<Outcome> {
    let (p, echo): (IllposedParams, _) = params(cfg)?;
    let mut reports = Vec::new();
    let mut grids = Vec::new();
    for scan in &p.scans {
        for &n in &scan.scales {
            let spec = IllposedDataSpec { family: scan.family, n, s: scan.s, a: scan.a };
            let g = spec.grid(scan.window_factor)?;
            grids.push(json!({ "N": n, "grid": grid_diagnostics(&g) }));
        }
        reports.push(illposed_scan(scan)?);
    }
    if let Some(ti) = &p.total_integral {
        reports.push(total_integral_report(&IllposedDataSpec::pilod(ti.n, 0.0), &ti.multiples)?);
    }
    if let Some(o) = &p.oracle {
        reports.push(iterate_oracle_report(Family::Pilod, &o.scales, o.s, o.t, o.nodes)?);
    }
    Ok(Outcome { params: echo, diagnostics: json!({ "scan_grids": grids }), reports })
}

fn lipschitz(cfg: &RunConfig) -> Result<Outcome> {
    let (p, echo): (LipschitzParams, _) = params(cfg)?;
    let grid = cfg.grid.build()?;
    let u0 = cfg.data.sample(grid)?;
    let g = p.perturbation.sample(grid)?;
    let mut reports = vec![lipschitz_probe(&u0, &g, &p.deltas, cfg.t_final, &cfg.equation, &cfg.stepper)?];
    if p.linear_reference {
        let linear = EquationSpec { c1: 0.0, c2: 0.0, c3: 0.0, c4: 0.0, ..cfg.equation };
        let mut rep = lipschitz_probe(&u0, &g, &p.deltas, cfg.t_final, &linear, &cfg.stepper)?;
        rep.name = "lipschitz_linear".into();
        reports.push(rep);
    }
    let mut diagnostics = data_diagnostics(&grid, &u0);
    diagnostics["perturbation"] = json!({ "boundary": BoundaryCheck::of(&g), "l2": g.l2_norm() });
    Ok(Outcome { params: echo, diagnostics, reports })
}

fn apriori(cfg: &RunConfig) -> Result<Outcome> {
    let (p, echo): (AprioriParams, _) = params(cfg)?;
    let grid = cfg.grid.build()?;
    let u0 = cfg.data.sample(grid)?;
    let rep = apriori_diagnostic(&u0, &cfg.equation, &p, &cfg.stepper)?;
    Ok(Outcome { params: echo, diagnostics: data_diagnostics(&grid, &u0), reports: vec![rep] })
}

pub fn dispatch(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        Command::Simulate => simulate(cfg),
        Command::Picard => picard(cfg),
        Command::GaugeCheck => gauge_check(cfg),
        Command::Estimates => estimates(cfg),
        Command::IllposedA | Command::IllposedB => illposed(cfg),
        Command::Lipschitz => lipschitz(cfg),
        Command::Apriori => apriori(cfg),
    }
}
