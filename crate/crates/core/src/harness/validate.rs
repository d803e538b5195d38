//! Solver cross-check suite: the closed-form RWA solution against its
//! integrodifferential oracle, and the HEOM against the pseudomode
//! Lindblad oracle. Exposed both to the CLI (`validate` subcommand) and to
//! the acceptance tests.

use crate::error::Result;
use crate::heom::{heom_propagate, BathSpec, HeomConfig};
use crate::measures;
use crate::pseudomode::{propagate_from_vacuum, PseudomodeConfig, PseudomodeRun, PseudomodeSpec};
use crate::qstate::{build_state, DensityMatrix, PureState, StateKind, StateSeries, C64, ONE, ZERO};
use crate::rwa::{amplitudes_closed, amplitudes_oracle, AmplitudeState};

/// Outcome of one named cross-check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Closed-form amplitudes against the integrodifferential oracle:
/// α = (1, 1, 0.5), λ = 0.1, γ = 0.5λ, W start, t ∈ [0, 100], 2000 samples.
/// Passes when max |Δc_j| ≤ 1e−6.
pub fn rwa_consistency_check() -> Result<CheckResult> {
    let bath = BathSpec::new(0.1, 0.05, 1.0, vec![1.0, 1.0, 0.5])?;
    let a = C64::new(1.0 / 3f64.sqrt(), 0.0);
    let c0 = AmplitudeState::new([a, a, a]);
    let n = 2000;
    let grid: Vec<f64> = (0..n).map(|k| 100.0 * k as f64 / (n - 1) as f64).collect();
    let oracle = amplitudes_oracle(&c0, &bath, &grid, 0.005)?;
    let mut worst: f64 = 0.0;
    for (state, &t) in oracle.iter().zip(&grid) {
        let closed = amplitudes_closed(t, &c0, &bath)?;
        for j in 0..3 {
            worst = worst.max((state.c[j] - closed.c[j]).norm());
        }
    }
    Ok(CheckResult::new(
        "rwa-closed vs rwa-oracle",
        worst <= 1e-6,
        format!("max |Δc_j| = {worst:.3e} (tolerance 1e-6)"),
    ))
}

/// Run the pseudomode with growing truncation until the leakage guard is
/// satisfied.
pub fn pseudomode_with_guard(
    rho0: &DensityMatrix,
    bath: &BathSpec,
    cfg: &PseudomodeConfig,
    start_dim: usize,
) -> Result<PseudomodeRun> {
    let mut fock_dim = start_dim;
    loop {
        let spec = PseudomodeSpec::from_bath(bath, fock_dim)?;
        let run = propagate_from_vacuum(rho0, &spec, &bath.alphas, cfg)?;
        if !run.leakage_flagged || fock_dim >= 24 {
            return Ok(run);
        }
        log::info!(
            "pseudomode truncation {fock_dim} leaked ({:.2e}); retrying larger",
            run.top_level_peak
        );
        fock_dim += 4;
    }
}

fn max_population_deviation(a: &StateSeries, b: &StateSeries) -> f64 {
    let dim = a.states[0].dim();
    let mut worst: f64 = 0.0;
    for (x, y) in a.states.iter().zip(&b.states) {
        for k in 0..dim {
            worst = worst.max((x.population(k) - y.population(k)).abs());
        }
    }
    worst
}

/// HEOM (L = 12, dt = 0.005) against the pseudomode for one excited qubit,
/// λ = 0.1, γ = 0.5λ, t ∈ [0, 60]. Passes at 5e−3 on all populations.
pub fn heom_pseudomode_single_qubit_check() -> Result<CheckResult> {
    let bath = BathSpec::new(0.1, 0.05, 1.0, vec![1.0])?;
    let excited = PureState::new(vec![ONE, ZERO])?.density();
    let heom_cfg = HeomConfig {
        depth: 12,
        dt: 0.005,
        t_final: 60.0,
        n_samples: 601,
        allow_undamped: false,
    };
    let heom_run = heom_propagate(&excited, &bath, &heom_cfg)?;
    let mode_cfg = PseudomodeConfig {
        dt: 0.005,
        t_final: 60.0,
        n_samples: 601,
    };
    let mode_run = pseudomode_with_guard(&excited, &bath, &mode_cfg, 8)?;
    let worst = max_population_deviation(&heom_run, &mode_run.series);
    Ok(CheckResult::new(
        "heom vs pseudomode (single qubit |e>)",
        worst <= 5e-3,
        format!(
            "max population deviation = {worst:.3e} (tolerance 5e-3, fock_dim guard peak {:.1e})",
            mode_run.top_level_peak
        ),
    ))
}

/// HEOM against the pseudomode for the three-qubit W state at the same
/// bath: populations and concurrence(ab) within 5e−3.
pub fn heom_pseudomode_w_check() -> Result<CheckResult> {
    let bath = BathSpec::new(0.1, 0.05, 1.0, vec![1.0, 1.0, 1.0])?;
    let w = build_state(StateKind::W)?.density();
    let heom_cfg = HeomConfig {
        depth: 12,
        dt: 0.005,
        t_final: 60.0,
        n_samples: 301,
        allow_undamped: false,
    };
    let heom_run = heom_propagate(&w, &bath, &heom_cfg)?;
    let mode_cfg = PseudomodeConfig {
        dt: 0.005,
        t_final: 60.0,
        n_samples: 301,
    };
    let mode_run = pseudomode_with_guard(&w, &bath, &mode_cfg, 8)?;
    let pop_dev = max_population_deviation(&heom_run, &mode_run.series);
    let mut conc_dev: f64 = 0.0;
    for (x, y) in heom_run.states.iter().zip(&mode_run.series.states) {
        let cx = measures::concurrence(&x.reduce(&[0, 1], &[2, 2, 2])?)?;
        let cy = measures::concurrence(&y.reduce(&[0, 1], &[2, 2, 2])?)?;
        conc_dev = conc_dev.max((cx - cy).abs());
    }
    let worst = pop_dev.max(conc_dev);
    Ok(CheckResult::new(
        "heom vs pseudomode (W state)",
        worst <= 5e-3,
        format!(
            "max deviation = {worst:.3e} (populations {pop_dev:.3e}, concurrence {conc_dev:.3e}, \
             tolerance 5e-3)"
        ),
    ))
}

/// The full cross-check suite in a fixed order.
pub fn run_validation() -> Result<Vec<CheckResult>> {
    Ok(vec![
        rwa_consistency_check()?,
        heom_pseudomode_single_qubit_check()?,
        heom_pseudomode_w_check()?,
    ])
}
