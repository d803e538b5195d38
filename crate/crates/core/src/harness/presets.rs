//! Parameter presets reproducing the dynamical experiments of the source
//! study; each preset is a sweep whose CSV outputs act as regression
//! fixtures. Frequencies are in units of ω₀, times in 1/ω₀.

use crate::error::{Error, Result};
use crate::harness::config::{
    ExperimentConfig, InitialState, MeasureSpec, Pair, SolverKind, SolverParams, SweepSpec,
    SweepValue,
};
use crate::heom::BathSpec;

const PRESET_NAMES: [&str; 10] = [
    "fig1a", "fig1b", "fig1c", "fig1d", "fig2", "fig3", "fig4a", "fig4b", "fig5", "fig6",
];

pub fn preset_names() -> &'static [&'static str] {
    &PRESET_NAMES
}

fn base_config(
    solver: SolverKind,
    bath: BathSpec,
    initial: InitialState,
    t_final: f64,
    samples: usize,
    measures: Vec<MeasureSpec>,
    params: SolverParams,
) -> ExperimentConfig {
    ExperimentConfig {
        solver,
        bath,
        initial,
        t_final,
        samples,
        measures,
        params,
        seed: 7,
    }
}

fn strong_bath() -> BathSpec {
    // λ = 0.1 ω₀, matched half-width γ = 0.5 λ
    BathSpec::new(0.1, 0.05, 1.0, vec![1.0, 1.0, 1.0]).unwrap()
}

fn ultrastrong_bath(alpha3: f64) -> BathSpec {
    // λ = 0.01 ω₀ with the far narrower γ = 0.01 λ
    BathSpec::new(0.01, 1e-4, 1.0, vec![1.0, 1.0, alpha3]).unwrap()
}

fn gamma_sweep() -> (String, Vec<SweepValue>) {
    (
        "bath.gamma".to_string(),
        vec![
            SweepValue::Number(0.0),
            SweepValue::Number(0.05),
            SweepValue::Number(0.1),
        ],
    )
}

fn alpha3_sweep() -> (String, Vec<SweepValue>) {
    (
        "alpha3".to_string(),
        [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&v| SweepValue::Number(v))
            .collect(),
    )
}

fn solver_sweep() -> (String, Vec<SweepValue>) {
    (
        "solver".to_string(),
        vec![
            SweepValue::Token("heom".into()),
            SweepValue::Token("rwa-closed".into()),
        ],
    )
}

/// HEOM knobs able to handle the γ → 0 points of the fig1 family.
fn undamped_capable_params() -> SolverParams {
    SolverParams {
        depth: 16,
        allow_undamped: true,
        ..SolverParams::default()
    }
}

/// Build the named preset. `variant` may restrict a preset that sweeps over
/// solvers to just `"rwa"` or `"heom"`.
pub fn figure_preset(name: &str, variant: Option<&str>) -> Result<SweepSpec> {
    let mut spec = match name {
        // strong coupling, W state, γ ∈ {0, λ/2, λ}
        "fig1a" => SweepSpec {
            base: base_config(
                SolverKind::RwaClosed,
                strong_bath(),
                InitialState::W,
                50.0,
                2001,
                vec![MeasureSpec::PiTangle],
                SolverParams::default(),
            ),
            swept: vec![gamma_sweep()],
            workers: 0,
        },
        "fig1b" => SweepSpec {
            base: base_config(
                SolverKind::Heom,
                strong_bath(),
                InitialState::W,
                50.0,
                2001,
                vec![MeasureSpec::PiTangle],
                undamped_capable_params(),
            ),
            swept: vec![gamma_sweep()],
            workers: 0,
        },
        "fig1c" => SweepSpec {
            base: base_config(
                SolverKind::RwaClosed,
                strong_bath(),
                InitialState::W,
                50.0,
                1251,
                vec![MeasureSpec::Svetlichny],
                SolverParams::default(),
            ),
            swept: vec![gamma_sweep()],
            workers: 0,
        },
        "fig1d" => SweepSpec {
            base: base_config(
                SolverKind::Heom,
                strong_bath(),
                InitialState::W,
                50.0,
                1251,
                vec![MeasureSpec::Svetlichny],
                undamped_capable_params(),
            ),
            swept: vec![gamma_sweep()],
            workers: 0,
        },
        // strong coupling, asymmetric third coupling: two-qubit Bell
        // nonlocality born from the bath asymmetry
        "fig2" => SweepSpec {
            base: base_config(
                SolverKind::RwaClosed,
                strong_bath(),
                InitialState::W,
                50.0,
                1001,
                vec![
                    MeasureSpec::Chsh(Pair::Ab),
                    MeasureSpec::Chsh(Pair::Ac),
                ],
                SolverParams::default(),
            ),
            swept: vec![alpha3_sweep(), solver_sweep()],
            workers: 0,
        },
        // entanglement flavor of the same family
        "fig3" => SweepSpec {
            base: base_config(
                SolverKind::RwaClosed,
                strong_bath(),
                InitialState::W,
                50.0,
                1001,
                vec![
                    MeasureSpec::PiTangle,
                    MeasureSpec::Concurrence(Pair::Ab),
                    MeasureSpec::Concurrence(Pair::Ac),
                ],
                SolverParams::default(),
            ),
            swept: vec![alpha3_sweep(), solver_sweep()],
            workers: 0,
        },
        // ultrastrong regime, symmetric couplings
        "fig4a" => SweepSpec {
            base: base_config(
                SolverKind::RwaClosed,
                ultrastrong_bath(1.0),
                InitialState::W,
                80.0,
                1601,
                vec![MeasureSpec::PiTangle],
                SolverParams::default(),
            ),
            swept: vec![solver_sweep()],
            workers: 0,
        },
        "fig4b" => SweepSpec {
            base: base_config(
                SolverKind::RwaClosed,
                ultrastrong_bath(1.0),
                InitialState::W,
                80.0,
                1601,
                vec![MeasureSpec::Svetlichny],
                SolverParams::default(),
            ),
            swept: vec![solver_sweep()],
            workers: 0,
        },
        // ultrastrong regime, α₃ = 0.5: nonlocality shuttles between the
        // three-qubit system and the ab pair
        "fig5" => SweepSpec {
            base: base_config(
                SolverKind::RwaClosed,
                ultrastrong_bath(0.5),
                InitialState::W,
                80.0,
                1601,
                vec![
                    MeasureSpec::Svetlichny,
                    MeasureSpec::Chsh(Pair::Ab),
                    MeasureSpec::Chsh(Pair::Ac),
                ],
                SolverParams::default(),
            ),
            swept: vec![solver_sweep()],
            workers: 0,
        },
        // zero-excitation start: correlations built purely by the
        // counter-rotating terms (the RWA state does not evolve at all)
        "fig6" => SweepSpec {
            base: base_config(
                SolverKind::Heom,
                BathSpec::new(0.1, 0.01, 1.0, vec![1.0, 1.0, 1.0]).unwrap(),
                InitialState::Ggg,
                100.0,
                1001,
                vec![
                    MeasureSpec::PiTangle,
                    MeasureSpec::Concurrence(Pair::Ab),
                ],
                SolverParams::default(),
            ),
            swept: vec![(
                "bath.lambda".to_string(),
                vec![SweepValue::Number(0.01), SweepValue::Number(0.1)],
            )],
            workers: 0,
        },
        other => {
            return Err(Error::invalid(format!(
                "unknown preset `{other}`; available: {}",
                PRESET_NAMES.join(", ")
            )));
        }
    };

    if let Some(variant) = variant {
        let solver = match variant {
            "rwa" => SolverKind::RwaClosed,
            "heom" => SolverKind::Heom,
            other => {
                return Err(Error::invalid(format!(
                    "unknown variant `{other}` (rwa, heom)"
                )));
            }
        };
        spec.base.solver = solver;
        spec.swept.retain(|(param, _)| param != "solver");
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_validate() {
        for name in preset_names() {
            let spec = figure_preset(name, None).unwrap();
            let points = spec.points().unwrap();
            assert!(!points.is_empty(), "{name} has no points");
        }
    }

    #[test]
    fn fig1_sweeps_gamma() {
        let spec = figure_preset("fig1a", None).unwrap();
        let gammas: Vec<f64> = spec
            .points()
            .unwrap()
            .iter()
            .map(|(_, cfg)| cfg.bath.gamma)
            .collect();
        assert_eq!(gammas, vec![0.0, 0.05, 0.1]);
        let lambdas: Vec<f64> = spec
            .points()
            .unwrap()
            .iter()
            .map(|(_, cfg)| cfg.bath.lambda)
            .collect();
        assert!(lambdas.iter().all(|&l| l == 0.1));
    }

    #[test]
    fn fig5_parameters_match_caption() {
        let spec = figure_preset("fig5", None).unwrap();
        assert_eq!(spec.base.bath.lambda, 0.01);
        assert_eq!(spec.base.bath.gamma, 1e-4);
        assert_eq!(spec.base.bath.alphas, vec![1.0, 1.0, 0.5]);
        let points = spec.points().unwrap();
        assert_eq!(points.len(), 2); // heom and rwa-closed
    }

    #[test]
    fn fig6_has_both_coupling_variants() {
        let spec = figure_preset("fig6", None).unwrap();
        assert_eq!(spec.base.bath.gamma, 0.01);
        let lambdas: Vec<f64> = spec
            .points()
            .unwrap()
            .iter()
            .map(|(_, cfg)| cfg.bath.lambda)
            .collect();
        assert_eq!(lambdas, vec![0.01, 0.1]);
        assert!(matches!(spec.base.initial, InitialState::Ggg));
    }

    #[test]
    fn variants_restrict_solver() {
        let spec = figure_preset("fig2", Some("rwa")).unwrap();
        assert!(spec.swept.iter().all(|(p, _)| p != "solver"));
        assert_eq!(spec.base.solver, SolverKind::RwaClosed);
        assert_eq!(spec.points().unwrap().len(), 5);

        assert!(figure_preset("fig2", Some("bogus")).is_err());
        assert!(figure_preset("fig99", None).is_err());
    }
}
