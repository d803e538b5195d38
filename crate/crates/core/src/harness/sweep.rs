//! Parallel execution of sweep points with deterministic ordering.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::config::{SweepSpec, SweepValue};
use crate::harness::runner::{run_experiment, TimeSeries};

/// One executed sweep point: the swept values that define it, a filename-
/// safe label, and the run outcome (failures are recorded, not fatal).
#[derive(Debug)]
pub struct SweepPoint {
    pub values: Vec<(String, SweepValue)>,
    pub label: String,
    pub result: Result<TimeSeries>,
}

fn label_of(values: &[(String, SweepValue)]) -> String {
    if values.is_empty() {
        return "base".to_string();
    }
    values
        .iter()
        .map(|(k, v)| format!("{}={}", k.replace('.', "_"), v))
        .collect::<Vec<_>>()
        .join("__")
}

/// Execute the Cartesian product of swept values on a worker pool. Output
/// order is the lexicographic point order regardless of which worker
/// finishes first, and every point carries its own pass/fail result.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepPoint>> {
    let points = spec.points()?;
    let execute = || -> Vec<SweepPoint> {
        points
            .into_par_iter()
            .map(|(values, cfg)| {
                let label = label_of(&values);
                let result = run_experiment(&cfg);
                SweepPoint {
                    values,
                    label,
                    result,
                }
            })
            .collect()
    };
    if spec.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .map_err(|e| Error::solver(format!("worker pool: {e}")))?;
        Ok(pool.install(execute))
    } else {
        Ok(execute())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{parse_config, ParsedConfig};

    fn sweep_spec(extra: &str, workers: usize) -> SweepSpec {
        let text = format!(
            "solver = rwa-closed\ninitial = W\nbath.lambda = 0.1\nbath.gamma = 0.05\n\
             bath.alphas = [1, 1, 1]\ntime.t_final = 8\ntime.samples = 17\n\
             measures = [concurrence(ab)]\nworkers = {workers}\n{extra}\n"
        );
        match parse_config(&text).unwrap() {
            ParsedConfig::Sweep(s) => s,
            _ => panic!("expected sweep"),
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let one = run_sweep(&sweep_spec("sweep.alpha3 = [0, 0.5, 1]", 1)).unwrap();
        let two = run_sweep(&sweep_spec("sweep.alpha3 = [0, 0.5, 1]", 2)).unwrap();
        assert_eq!(one.len(), 3);
        for (x, y) in one.iter().zip(&two) {
            assert_eq!(x.label, y.label);
            let (tx, ty) = (
                x.result.as_ref().unwrap(),
                y.result.as_ref().unwrap(),
            );
            assert_eq!(tx.columns[0].1, ty.columns[0].1);
        }
    }

    #[test]
    fn labels_embed_swept_values() {
        let out = run_sweep(&sweep_spec("sweep.alpha3 = [0, 1]", 0)).unwrap();
        assert_eq!(out[0].label, "alpha3=0");
        assert_eq!(out[1].label, "alpha3=1");
    }

    #[test]
    fn empty_sweep_is_single_base_run() {
        let text = "solver = rwa-closed\ninitial = W\nbath.lambda = 0.1\nbath.gamma = 0.05\n\
             bath.alphas = [1, 1, 1]\ntime.t_final = 8\ntime.samples = 17\n\
             measures = [concurrence(ab)]\n";
        let cfg = match parse_config(text).unwrap() {
            ParsedConfig::Single(c) => c,
            _ => panic!(),
        };
        let out = run_sweep(&SweepSpec::single(cfg)).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].label, "base");
        assert!(out[0].result.is_ok());
    }

    #[test]
    fn individual_failures_are_recorded() {
        // γ = 0 without the undamped override fails at run time for HEOM
        let text = "solver = heom\ninitial = W\nbath.lambda = 0.1\nbath.gamma = 0.05\n\
             bath.alphas = [1, 1, 1]\ntime.t_final = 2\ntime.samples = 5\n\
             measures = []\nsolver.L = 4\nsweep.gamma = [0, 0.05]\n";
        let spec = match parse_config(text).unwrap() {
            ParsedConfig::Sweep(s) => s,
            _ => panic!(),
        };
        let out = run_sweep(&spec).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out[0].result.is_err(), "gamma = 0 point should fail");
        assert!(out[1].result.is_ok());
    }
}
