//! End-to-end experiment runners: probability snapshots, flux sweeps,
//! visibility-vs-interaction sweeps, witness dynamics, the static-scatterer
//! control and the long-run entropy observation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

use crate::composite::{
    build_total_hamiltonian, initial_composite_state, standard_witness_layout, TotalHamiltonian,
    WitnessSpec,
};
use crate::device::{
    add_static_scatterers, build_device_hamiltonian, build_geometry, BranchLabel, DeviceGeometry,
};
use crate::error::{Error, Result};
use crate::evolve::{gaussian_packet, Propagator, StateVector};
use crate::observables::{normalized_output, p_out, site_probabilities, visibility, witness_report};
use crate::{TAU, T_FINAL_OVER_TAU};

/// Norm drift beyond this aborts a run.
pub const NORM_DRIFT_TOL: f64 = 1e-8;

const DEFAULT_E_INT: f64 = 5.0;
const DEFAULT_FLUX_POINTS: usize = 401;
const DEFAULT_E_INT_GRID: [f64; 12] = [
    0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0,
];
const DEFAULT_N_WIT_LIST: [usize; 4] = [2, 4, 6, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Snapshot,
    FluxSweep,
    VisibilitySweep,
    WitnessDynamics,
    ScattererControl,
    LongRun,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Snapshot => "snapshot",
            ExperimentKind::FluxSweep => "flux_sweep",
            ExperimentKind::VisibilitySweep => "visibility_sweep",
            ExperimentKind::WitnessDynamics => "witness_dynamics",
            ExperimentKind::ScattererControl => "scatterer_control",
            ExperimentKind::LongRun => "long_run",
        }
    }
}

/// Initial witness phases: fixed angles per witness, or drawn uniformly
/// from (-pi, pi] with a seeded generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WitnessPhases {
    Fixed(Vec<f64>),
    Random { random_seed: u64 },
}

/// Experiment description as read from a config file. Unset fields take
/// documented defaults during [`ExperimentConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_wit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_int_over_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_int_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_wit_list: Option<Vec<usize>>,
    /// Snapshot times, in units of tau.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times_over_tau: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max_over_tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_samples: Option<usize>,
    /// Explicit witness layout as branch labels, e.g. ["1", "3'", "5"].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layout: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_w_over_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_phases: Option<WitnessPhases>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scatterer_v_over_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scatterer_sites: Option<Vec<String>>,
    /// Base name for output files; defaults to the experiment kind.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_stem: Option<String>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            n_wit: None,
            e_int_over_gamma: None,
            flux_ratio: None,
            flux_points: None,
            flux_min: None,
            flux_max: None,
            e_int_grid: None,
            n_wit_list: None,
            times_over_tau: None,
            t_max_over_tau: None,
            time_samples: None,
            layout: None,
            gamma_w_over_gamma: None,
            witness_phases: None,
            scatterer_v_over_gamma: None,
            scatterer_sites: None,
            output_stem: None,
        }
    }

    pub fn output_stem(&self) -> String {
        self.output_stem
            .clone()
            .unwrap_or_else(|| self.kind.name().to_string())
    }

    /// Apply defaults and validate into a concrete plan.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let kind = self.kind;
        let layout = match (&self.layout, self.n_wit) {
            (Some(labels), n) => {
                let parsed: Vec<BranchLabel> = labels
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<Vec<_>>>()?;
                if let Some(n) = n {
                    if n != parsed.len() {
                        return Err(Error::Config(format!(
                            "n_wit = {n} disagrees with layout of {} positions",
                            parsed.len()
                        )));
                    }
                }
                parsed
            }
            (None, n) => {
                let n = n.unwrap_or(match kind {
                    ExperimentKind::WitnessDynamics | ExperimentKind::LongRun => 8,
                    _ => 0,
                });
                standard_witness_layout(n).map_err(|_| {
                    Error::Config(format!(
                        "n_wit = {n} has no standard layout; layout requires explicit positions"
                    ))
                })?
            }
        };

        if matches!(kind, ExperimentKind::ScattererControl) && !layout.is_empty() {
            return Err(Error::Config(
                "scatterer_control runs without witnesses (n_wit = 0)".into(),
            ));
        }

        let flux_points = self.flux_points.unwrap_or(DEFAULT_FLUX_POINTS);
        if flux_points < 2 {
            return Err(Error::Config("flux_points must be at least 2".into()));
        }
        let flux_min = self.flux_min.unwrap_or(-1.0);
        let flux_max = self.flux_max.unwrap_or(1.0);
        if flux_max <= flux_min {
            return Err(Error::Config("flux_max must exceed flux_min".into()));
        }

        let e_int_grid = match &self.e_int_grid {
            Some(g) if g.is_empty() => {
                return Err(Error::Config("e_int_grid must be non-empty".into()))
            }
            Some(g) => g.clone(),
            None => DEFAULT_E_INT_GRID.to_vec(),
        };
        let n_wit_list = match &self.n_wit_list {
            Some(l) if l.is_empty() => {
                return Err(Error::Config("n_wit_list must be non-empty".into()))
            }
            Some(l) => l.clone(),
            None => DEFAULT_N_WIT_LIST.to_vec(),
        };
        for &n in &n_wit_list {
            standard_witness_layout(n).map_err(|_| {
                Error::Config(format!("n_wit_list entry {n} has no standard layout"))
            })?;
        }

        let times_over_tau = match &self.times_over_tau {
            Some(t) if t.is_empty() => {
                return Err(Error::Config("times_over_tau must be non-empty".into()))
            }
            Some(t) => t.clone(),
            None => vec![0.0, 3.0, T_FINAL_OVER_TAU],
        };

        let t_max_over_tau = self.t_max_over_tau.unwrap_or(match kind {
            ExperimentKind::LongRun => 50.0,
            _ => T_FINAL_OVER_TAU,
        });
        let time_samples = self.time_samples.unwrap_or(match kind {
            ExperimentKind::LongRun => 500,
            _ => 200,
        });
        if time_samples < 2 {
            return Err(Error::Config("time_samples must be at least 2".into()));
        }

        let flux_ratio = self.flux_ratio.unwrap_or(match kind {
            ExperimentKind::WitnessDynamics | ExperimentKind::LongRun => 0.5,
            _ => 0.0,
        });

        let scatterer_sites = match &self.scatterer_sites {
            Some(labels) => labels
                .iter()
                .map(|s| s.parse())
                .collect::<Result<Vec<BranchLabel>>>()?,
            None => standard_witness_layout(6)?,
        };

        Ok(ResolvedConfig {
            kind,
            layout,
            e_int: self.e_int_over_gamma.unwrap_or(DEFAULT_E_INT),
            gamma_w: self.gamma_w_over_gamma.unwrap_or(0.0),
            flux_ratio,
            flux_points,
            flux_min,
            flux_max,
            e_int_grid,
            n_wit_list,
            times_over_tau,
            t_max_over_tau,
            time_samples,
            witness_phases: self.witness_phases.clone(),
            scatterer_v: self.scatterer_v_over_gamma.unwrap_or(5.0),
            scatterer_sites,
        })
    }
}

/// Fully defaulted, validated experiment plan.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub kind: ExperimentKind,
    pub layout: Vec<BranchLabel>,
    pub e_int: f64,
    pub gamma_w: f64,
    pub flux_ratio: f64,
    pub flux_points: usize,
    pub flux_min: f64,
    pub flux_max: f64,
    pub e_int_grid: Vec<f64>,
    pub n_wit_list: Vec<usize>,
    pub times_over_tau: Vec<f64>,
    pub t_max_over_tau: f64,
    pub time_samples: usize,
    pub witness_phases: Option<WitnessPhases>,
    pub scatterer_v: f64,
    pub scatterer_sites: Vec<BranchLabel>,
}

impl ResolvedConfig {
    pub fn flux_grid(&self) -> Vec<f64> {
        linspace(self.flux_min, self.flux_max, self.flux_points)
    }

    pub fn time_grid_over_tau(&self) -> Vec<f64> {
        linspace(0.0, self.t_max_over_tau, self.time_samples)
    }

    fn witnesses(&self) -> Vec<WitnessSpec> {
        self.layout
            .iter()
            .map(|&p| WitnessSpec {
                position: p,
                gamma_w: self.gamma_w,
                e_int: self.e_int,
            })
            .collect()
    }

    /// Resolve initial witness phases; `seed_override` replaces the seed of
    /// a `Random` spec.
    pub fn phases(&self, seed_override: Option<u64>) -> Result<Option<Vec<f64>>> {
        match &self.witness_phases {
            None => Ok(None),
            Some(WitnessPhases::Fixed(p)) => {
                if p.len() != self.layout.len() {
                    return Err(Error::Config(format!(
                        "witness_phases lists {} angles for {} witnesses",
                        p.len(),
                        self.layout.len()
                    )));
                }
                Ok(Some(p.clone()))
            }
            Some(WitnessPhases::Random { random_seed }) => {
                let seed = seed_override.unwrap_or(*random_seed);
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                Ok(Some(
                    (0..self.layout.len())
                        .map(|_| {
                            // uniform over (-pi, pi]
                            let u: f64 = rng.random::<f64>();
                            std::f64::consts::PI * (1.0 - 2.0 * u)
                        })
                        .collect(),
                ))
            }
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Which propagator realization a run should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorChoice {
    Dense,
    Layered,
    #[default]
    Auto,
}

impl PropagatorChoice {
    fn build(self, h: &TotalHamiltonian) -> Result<Propagator> {
        match self {
            PropagatorChoice::Dense => Propagator::dense(h),
            PropagatorChoice::Layered => Propagator::layered(h),
            PropagatorChoice::Auto => Propagator::auto(h),
        }
    }
}

/// Runtime knobs orthogonal to the experiment definition.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub propagator: PropagatorChoice,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

/// A rectangular result table with provenance metadata for the manifest.
#[derive(Debug, Clone)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Extra run facts for the manifest: grids, propagator path, timings,
    /// derived scalars such as the sweep visibility.
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl ResultTable {
    fn new(name: &str, columns: Vec<String>) -> Self {
        ResultTable {
            name: name.to_string(),
            columns,
            rows: Vec::new(),
            meta: BTreeMap::new(),
        }
    }

    fn set_meta(&mut self, key: &str, value: serde_json::Value) {
        self.meta.insert(key.to_string(), value);
    }
}

fn check_norm(psi: &StateVector) -> Result<()> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_DRIFT_TOL {
        return Err(Error::NormDrift {
            norm,
            time_over_tau: psi.time / TAU,
            tol: NORM_DRIFT_TOL,
        });
    }
    Ok(())
}

struct SystemSetup {
    geom: DeviceGeometry,
    witnesses: Vec<WitnessSpec>,
    phases: Option<Vec<f64>>,
}

impl SystemSetup {
    fn new(cfg: &ResolvedConfig, opts: &RunOptions) -> Result<Self> {
        Ok(SystemSetup {
            geom: build_geometry(),
            witnesses: cfg.witnesses(),
            phases: cfg.phases(opts.seed)?,
        })
    }

    fn hamiltonian(&self, flux: f64, scatterers: Option<(&[BranchLabel], f64)>) -> Result<TotalHamiltonian> {
        let mut dev = build_device_hamiltonian(&self.geom, 1.0, flux)?;
        if let Some((sites, v_s)) = scatterers {
            let site_idx: Vec<_> = sites.iter().map(|l| l.device_site()).collect();
            dev = add_static_scatterers(&dev, &site_idx, v_s);
        }
        build_total_hamiltonian(dev, self.witnesses.clone())
    }

    fn initial_state(&self) -> Result<StateVector> {
        let packet = gaussian_packet(&self.geom, 5.0, 2.0, std::f64::consts::FRAC_PI_2)?;
        initial_composite_state(&packet, &self.witnesses, self.phases.as_deref())
    }
}

/// P_out(T_f) for every flux in the grid; deterministic order.
fn sweep_p_out(
    setup: &SystemSetup,
    flux_grid: &[f64],
    choice: PropagatorChoice,
    scatterers: Option<(&[BranchLabel], f64)>,
) -> Result<Vec<f64>> {
    let psi0 = setup.initial_state()?;
    let t_f = T_FINAL_OVER_TAU * TAU;
    flux_grid
        .par_iter()
        .map(|&flux| {
            let h = setup.hamiltonian(flux, scatterers)?;
            let prop = choice.build(&h)?;
            let psi = prop.evolve(&psi0, t_f)?;
            check_norm(&psi)?;
            Ok(p_out(&psi))
        })
        .collect()
}

fn propagator_path(cfg: &ResolvedConfig, choice: PropagatorChoice) -> &'static str {
    match choice {
        PropagatorChoice::Dense => "dense",
        PropagatorChoice::Layered => "layered",
        PropagatorChoice::Auto => {
            if cfg.gamma_w == 0.0 && cfg.layout.len() >= 5 {
                "layered"
            } else {
                "dense"
            }
        }
    }
}

/// Run the experiment described by `config`.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<ResultTable> {
    match opts.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
            pool.install(|| run_inner(config, opts))
        }
        None => run_inner(config, opts),
    }
}

fn run_inner(config: &ExperimentConfig, opts: &RunOptions) -> Result<ResultTable> {
    let cfg = config.resolve()?;
    let start = Instant::now();
    let mut table = match cfg.kind {
        ExperimentKind::Snapshot => run_snapshot(&cfg, opts),
        ExperimentKind::FluxSweep => run_flux_sweep(&cfg, opts),
        ExperimentKind::VisibilitySweep => run_visibility_sweep(&cfg, opts),
        ExperimentKind::WitnessDynamics | ExperimentKind::LongRun => {
            run_witness_dynamics(&cfg, opts)
        }
        ExperimentKind::ScattererControl => run_scatterer_control(&cfg, opts),
    }?;
    table.set_meta(
        "wall_clock_seconds",
        serde_json::json!({ "total": start.elapsed().as_secs_f64() }),
    );
    table.set_meta(
        "propagator_path",
        serde_json::json!(propagator_path(&cfg, opts.propagator)),
    );
    table.set_meta(
        "layout",
        serde_json::json!(cfg.layout.iter().map(|l| l.to_string()).collect::<Vec<_>>()),
    );
    Ok(table)
}

fn run_snapshot(cfg: &ResolvedConfig, opts: &RunOptions) -> Result<ResultTable> {
    let setup = SystemSetup::new(cfg, opts)?;
    let h = setup.hamiltonian(cfg.flux_ratio, None)?;
    let prop = opts.propagator.build(&h)?;
    let psi0 = setup.initial_state()?;

    let mut table = ResultTable::new(
        cfg.kind.name(),
        ["site", "x_over_a", "y_over_a", "prob", "time_over_tau"]
            .map(String::from)
            .to_vec(),
    );
    for &t_tau in &cfg.times_over_tau {
        let psi = prop.evolve(&psi0, t_tau * TAU)?;
        check_norm(&psi)?;
        let field = site_probabilities(&psi);
        for (s, &p) in field.p.iter().enumerate() {
            let (x, y) = setup.geom.positions[s];
            table.rows.push(vec![(s + 1) as f64, x, y, p, t_tau]);
        }
    }
    table.set_meta(
        "grid_sizes",
        serde_json::json!({ "times": cfg.times_over_tau.len(), "sites": crate::N_SITES }),
    );
    table.set_meta("flux_ratio", serde_json::json!(cfg.flux_ratio));
    Ok(table)
}

fn flux_sweep_table(
    cfg: &ResolvedConfig,
    opts: &RunOptions,
    scatterers: Option<(&[BranchLabel], f64)>,
) -> Result<ResultTable> {
    let setup = SystemSetup::new(cfg, opts)?;
    let grid = cfg.flux_grid();
    let p_outs = sweep_p_out(&setup, &grid, opts.propagator, scatterers)?;
    let sweep: Vec<(f64, f64)> = grid.iter().copied().zip(p_outs).collect();
    let normalized = normalized_output(&sweep)?;

    let mut table = ResultTable::new(
        cfg.kind.name(),
        ["flux_ratio", "P_out", "dP_norm"].map(String::from).to_vec(),
    );
    for (&(f, p), &(_, dp)) in sweep.iter().zip(&normalized) {
        table.rows.push(vec![f, p, dp]);
    }
    if let Ok(v) = visibility(&sweep) {
        table.set_meta("visibility", serde_json::json!(v));
    }
    table.set_meta(
        "grid_sizes",
        serde_json::json!({ "flux_points": grid.len() }),
    );
    table.set_meta("e_int_over_gamma", serde_json::json!(cfg.e_int));
    Ok(table)
}

fn run_flux_sweep(cfg: &ResolvedConfig, opts: &RunOptions) -> Result<ResultTable> {
    flux_sweep_table(cfg, opts, None)
}

fn run_scatterer_control(cfg: &ResolvedConfig, opts: &RunOptions) -> Result<ResultTable> {
    let mut table = flux_sweep_table(cfg, opts, Some((&cfg.scatterer_sites, cfg.scatterer_v)))?;
    table.set_meta(
        "scatterer_sites",
        serde_json::json!(cfg
            .scatterer_sites
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()),
    );
    table.set_meta("scatterer_v_over_gamma", serde_json::json!(cfg.scatterer_v));
    Ok(table)
}

fn run_visibility_sweep(cfg: &ResolvedConfig, opts: &RunOptions) -> Result<ResultTable> {
    let mut table = ResultTable::new(
        cfg.kind.name(),
        ["E_int_over_gamma", "n_wit", "visibility"]
            .map(String::from)
            .to_vec(),
    );
    let grid = cfg.flux_grid();
    for &e_int in &cfg.e_int_grid {
        for &n_wit in &cfg.n_wit_list {
            let mut sub = cfg.clone();
            sub.layout = standard_witness_layout(n_wit)?;
            sub.e_int = e_int;
            let setup = SystemSetup::new(&sub, opts)?;
            let p_outs = sweep_p_out(&setup, &grid, opts.propagator, None)?;
            let sweep: Vec<(f64, f64)> = grid.iter().copied().zip(p_outs).collect();
            table.rows.push(vec![e_int, n_wit as f64, visibility(&sweep)?]);
        }
    }
    table.set_meta(
        "grid_sizes",
        serde_json::json!({
            "e_int_points": cfg.e_int_grid.len(),
            "n_wit_points": cfg.n_wit_list.len(),
            "flux_points": cfg.flux_points,
        }),
    );
    Ok(table)
}

fn run_witness_dynamics(cfg: &ResolvedConfig, opts: &RunOptions) -> Result<ResultTable> {
    let setup = SystemSetup::new(cfg, opts)?;
    let h = setup.hamiltonian(cfg.flux_ratio, None)?;
    let prop = opts.propagator.build(&h)?;
    let psi0 = setup.initial_state()?;
    let n = cfg.layout.len();

    let mut columns = vec!["time_over_tau".to_string()];
    columns.extend((1..=n).map(|m| format!("theta_{m}")));
    columns.extend((1..=n).map(|m| format!("S_{m}")));
    columns.push("S_dev".to_string());
    let mut table = ResultTable::new(cfg.kind.name(), columns);

    // unwrap theta across consecutive samples so plotted angles are continuous
    let mut prev_theta: Option<Vec<f64>> = None;
    for &t_tau in &cfg.time_grid_over_tau() {
        let psi = prop.evolve(&psi0, t_tau * TAU)?;
        check_norm(&psi)?;
        let report = witness_report(&psi, &setup.witnesses)?;
        let theta: Vec<f64> = match &prev_theta {
            None => report.theta.clone(),
            Some(prev) => report
                .theta
                .iter()
                .zip(prev)
                .map(|(&t, &p)| {
                    let two_pi = 2.0 * std::f64::consts::PI;
                    t - two_pi * ((t - p) / two_pi).round()
                })
                .collect(),
        };
        let mut row = vec![t_tau];
        row.extend(&theta);
        row.extend(&report.entropy);
        row.push(report.device_entropy);
        table.rows.push(row);
        prev_theta = Some(theta);
    }
    table.set_meta(
        "grid_sizes",
        serde_json::json!({ "time_samples": cfg.time_samples }),
    );
    table.set_meta("flux_ratio", serde_json::json!(cfg.flux_ratio));
    table.set_meta("e_int_over_gamma", serde_json::json!(cfg.e_int));
    table.set_meta("t_max_over_tau", serde_json::json!(cfg.t_max_over_tau));
    Ok(table)
}
