//! Run configuration: a JSON document plus command-line overrides.
//!
//! Schema (all keys except `model`, `dephasing` optional):
//!
//! ```json
//! {
//!   "model": {"kind": "syk", "n_majorana": 16,
//!             "coupling_scale": 1.0, "normalization": "half"},
//!   "dephasing": [{"beta": 1.0, "gamma": 0.0},
//!                 {"beta": 1.0, "gamma": 0.001}],
//!   "n_samples": 50,
//!   "master_seed": 7,
//!   "grid": {"kind": "log", "t_min": 0.01, "t_max": 3000.0, "n_points": 400},
//!   "observables": ["fidelity"],
//!   "out_dir": "out",
//!   "plot": false,
//!   "threads": 4,
//!   "cache_dir": null,
//!   "detector": {"window": 7, "dip_band": 0.2, "plateau_band": 0.15},
//!   "n_list": [12, 16, 20]
//! }
//! ```
//!
//! `--out`, `--plot` and `--threads` flags override file values; the
//! `TFDLAB_THREADS` environment variable overrides the file but not the
//! flag. When `grid` is omitted it defaults to 400 logarithmic points from
//! 0.01 to ten estimated plateau times.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use tfdlab_core::{DephasingParams, DetectorConfig, ModelSpec, Observable, TimeGrid};

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: ModelSpec,
    dephasing: Vec<DephasingParams>,
    #[serde(default = "default_samples")]
    n_samples: usize,
    #[serde(default)]
    master_seed: u64,
    #[serde(default)]
    grid: Option<TimeGrid>,
    #[serde(default = "default_observables")]
    observables: Vec<Observable>,
    #[serde(default = "default_out_dir")]
    out_dir: PathBuf,
    #[serde(default)]
    plot: bool,
    #[serde(default)]
    threads: Option<usize>,
    #[serde(default)]
    cache_dir: Option<PathBuf>,
    #[serde(default)]
    detector: Option<DetectorConfig>,
    #[serde(default)]
    n_list: Vec<usize>,
}

fn default_samples() -> usize {
    1
}

fn default_observables() -> Vec<Observable> {
    vec![Observable::Fidelity]
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub dephasing: Vec<DephasingParams>,
    pub n_samples: usize,
    pub master_seed: u64,
    pub grid: Option<TimeGrid>,
    pub observables: Vec<Observable>,
    pub out_dir: PathBuf,
    pub plot: bool,
    pub threads: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub detector: DetectorConfig,
    pub n_list: Vec<usize>,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub plot: bool,
    pub threads: Option<usize>,
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let raw: RawConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;

    let env_threads = match std::env::var("TFDLAB_THREADS") {
        Ok(v) => Some(
            v.parse::<usize>()
                .map_err(|_| CliError::Config(format!("TFDLAB_THREADS must be an integer, got {v:?}")))?,
        ),
        Err(_) => None,
    };

    let cfg = RunConfig {
        model: raw.model,
        dephasing: raw.dephasing,
        n_samples: raw.n_samples,
        master_seed: raw.master_seed,
        grid: raw.grid,
        observables: raw.observables,
        out_dir: overrides.out_dir.clone().unwrap_or(raw.out_dir),
        plot: overrides.plot || raw.plot,
        threads: overrides.threads.or(env_threads).or(raw.threads),
        cache_dir: raw.cache_dir,
        detector: raw.detector.unwrap_or_default(),
        n_list: raw.n_list,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.model
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    if cfg.dephasing.is_empty() {
        return Err(CliError::Config("dephasing list is empty".into()));
    }
    for d in &cfg.dephasing {
        d.validated().map_err(|e| CliError::Config(e.to_string()))?;
    }
    if cfg.observables.is_empty() {
        return Err(CliError::Config("observable list is empty".into()));
    }
    if cfg.n_samples < 1 {
        return Err(CliError::Config("n_samples must be >= 1".into()));
    }
    if let Some(g) = cfg.grid {
        g.validated().map_err(|e| CliError::Config(e.to_string()))?;
    }
    if cfg.detector.window == 0 {
        return Err(CliError::Config("detector window must be >= 1".into()));
    }
    if !(cfg.detector.dip_band > 0.0 && cfg.detector.plateau_band > 0.0) {
        return Err(CliError::Config("detector bands must be positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_cfg(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("cfg.json");
        let mut f = std::fs::File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_cfg(
            dir.path(),
            r#"{"model": {"kind": "gue", "dim": 8, "sigma": 0.25},
                "dephasing": [{"beta": 0.0, "gamma": 0.0}]}"#,
        );
        let cfg = load_config(&p, &Overrides::default()).unwrap();
        assert_eq!(cfg.n_samples, 1);
        assert_eq!(cfg.observables, vec![Observable::Fidelity]);
        assert_eq!(cfg.out_dir, PathBuf::from("out"));
        assert!(!cfg.plot);
        assert_eq!(cfg.detector.window, 7);
    }

    #[test]
    fn overrides_beat_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_cfg(
            dir.path(),
            r#"{"model": {"kind": "gue", "dim": 8, "sigma": 0.25},
                "dephasing": [{"beta": 0.0, "gamma": 0.0}],
                "out_dir": "from-file", "threads": 2}"#,
        );
        let ov = Overrides {
            out_dir: Some(PathBuf::from("from-flag")),
            plot: true,
            threads: Some(5),
        };
        let cfg = load_config(&p, &ov).unwrap();
        assert_eq!(cfg.out_dir, PathBuf::from("from-flag"));
        assert!(cfg.plot);
        assert_eq!(cfg.threads, Some(5));
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_cfg(
            dir.path(),
            r#"{"model": {"kind": "gue", "dim": 8, "sigma": 0.25},
                "dephasing": [{"beta": 0.0, "gamma": 0.0}], "tpyo": 1}"#,
        );
        assert!(matches!(
            load_config(&p, &Overrides::default()),
            Err(CliError::Config(_))
        ));

        let p = write_cfg(
            dir.path(),
            r#"{"model": {"kind": "gue", "dim": 0, "sigma": 0.25},
                "dephasing": [{"beta": 0.0, "gamma": 0.0}]}"#,
        );
        assert!(matches!(
            load_config(&p, &Overrides::default()),
            Err(CliError::Config(_))
        ));

        let p = write_cfg(
            dir.path(),
            r#"{"model": {"kind": "syk", "n_majorana": 12},
                "dephasing": [{"beta": -1.0, "gamma": 0.0}]}"#,
        );
        assert!(matches!(
            load_config(&p, &Overrides::default()),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn syk_model_defaults_apply() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_cfg(
            dir.path(),
            r#"{"model": {"kind": "syk", "n_majorana": 12},
                "dephasing": [{"beta": 1.0, "gamma": 0.0}]}"#,
        );
        let cfg = load_config(&p, &Overrides::default()).unwrap();
        match cfg.model {
            ModelSpec::Syk {
                n_majorana,
                coupling_scale,
                ..
            } => {
                assert_eq!(n_majorana, 12);
                assert_eq!(coupling_scale, 1.0);
            }
            _ => panic!("wrong model"),
        }
    }
}
