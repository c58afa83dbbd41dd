//! Subcommand implementations. Each validates the config against the
//! command (exit 2 on mismatch, before anything is written), builds a
//! dedicated rayon pool, runs the ensemble, and emits CSV files plus
//! optional SVG quick-looks.

use std::path::Path;

use tfdlab_core::ensemble::{detect_dip, detect_plateau, estimate_times_syk, run_ensemble};
use tfdlab_core::gue::{sff_asymptotic, sff_finite};
use tfdlab_core::numeric::split_seed;
use tfdlab_core::spectra::{log_partition, ComplexBeta, Spectrum};
use tfdlab_core::{
    CharacteristicTimes, DecoherenceTime, EnsembleSpec, GueParams, ModelSpec, Observable,
    TimeGrid,
};

use crate::config::RunConfig;
use crate::csv::{float_tag, format_csv, write_file, Field};
use crate::error::CliError;
use crate::svg::{Curve, Plot};

fn thread_pool(cfg: &RunConfig) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

fn ensure_out_dir(cfg: &RunConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::Config(format!("output directory {}: {e}", cfg.out_dir.display())))
}

fn opt_f(v: Option<f64>) -> Field {
    v.map_or(Field::Empty, Field::F)
}

fn decoherence_field(t: &DecoherenceTime) -> Field {
    match t {
        DecoherenceTime::Finite(v) => Field::F(*v),
        DecoherenceTime::Infinite => Field::S("inf".into()),
        DecoherenceTime::UnitaryLimit => Field::S("unitary".into()),
    }
}

fn grid_for(cfg: &RunConfig, model: &ModelSpec) -> Result<TimeGrid, CliError> {
    match cfg.grid {
        Some(g) => Ok(g),
        None => {
            let beta = cfg.dephasing[0].beta;
            TimeGrid::log_default(model.default_t_max(beta)).map_err(|e| CliError::Config(e.to_string()))
        }
    }
}

/// Fidelity (and any further selected observables) of a dephased SYK
/// ensemble: one CSV per (observable, gamma) plus `times.csv` with the
/// estimated and measured characteristic times per gamma.
pub fn run_syk(cfg: &RunConfig) -> Result<(), CliError> {
    let ModelSpec::Syk { n_majorana, .. } = cfg.model else {
        return Err(CliError::Config(
            "the syk command requires a model of kind \"syk\"".into(),
        ));
    };
    let grid = grid_for(cfg, &cfg.model)?;
    // the times table is always read off the fidelity curve
    let mut observables = cfg.observables.clone();
    if !observables.contains(&Observable::Fidelity) {
        observables.push(Observable::Fidelity);
    }
    let spec = EnsembleSpec {
        model: cfg.model,
        dephasing: cfg.dephasing.clone(),
        n_samples: cfg.n_samples,
        master_seed: cfg.master_seed,
        grid,
        cache_dir: cfg.cache_dir.clone(),
    };
    ensure_out_dir(cfg)?;
    let pool = thread_pool(cfg)?;
    let out = pool.install(|| run_ensemble(&spec, &observables))?;

    for (di, dp) in cfg.dephasing.iter().enumerate() {
        for obs in &cfg.observables {
            let curve = out
                .curve(*obs, di)
                .expect("requested curve present in output");
            let rows: Vec<Vec<Field>> = out
                .times
                .iter()
                .enumerate()
                .map(|(k, &t)| {
                    vec![
                        Field::F(t),
                        Field::F(curve.series.values[k]),
                        curve
                            .series
                            .sem
                            .as_ref()
                            .map_or(Field::Empty, |s| Field::F(s[k])),
                        Field::U(cfg.n_samples as u64),
                    ]
                })
                .collect();
            let name = format!("{}_g{}.csv", obs.label(), float_tag(dp.gamma));
            write_file(
                &cfg.out_dir.join(name),
                &format_csv(&["t", "mean", "sem", "n"], &rows),
            )?;
        }
    }

    let mut rows = Vec::new();
    for (di, dp) in cfg.dephasing.iter().enumerate() {
        let times = measure_times(
            estimate_times_syk(n_majorana, dp.beta, dp.gamma),
            &out,
            di,
            cfg,
        );
        rows.push(times_row(dp.gamma, dp.beta, None, &times, out.plateau_exact[di]));
    }
    write_file(
        &cfg.out_dir.join("times.csv"),
        &format_csv(TIMES_HEADER, &rows),
    )?;

    if cfg.plot {
        for obs in &cfg.observables {
            let curves: Vec<Curve> = cfg
                .dephasing
                .iter()
                .enumerate()
                .map(|(di, dp)| Curve {
                    label: format!("gamma={:e}", dp.gamma),
                    points: out
                        .times
                        .iter()
                        .zip(&out.curve(*obs, di).unwrap().series.values)
                        .map(|(&t, &v)| (t, v))
                        .collect(),
                })
                .collect();
            let log_y = matches!(
                obs,
                Observable::Fidelity | Observable::Purity | Observable::Sff
            );
            let plot = Plot {
                title: format!("SYK N={n_majorana}: {}", obs.label()),
                x_label: "t".into(),
                y_label: obs.label().into(),
                log_x: true,
                log_y,
                curves,
            };
            write_file(&cfg.out_dir.join(format!("{}.svg", obs.label())), &plot.render())?;
        }
    }
    Ok(())
}

const TIMES_HEADER: &[&str] = &[
    "n_majorana",
    "dim",
    "gamma",
    "beta",
    "tau_decoherence_exact",
    "tau_decoherence_dos",
    "t_dip_est",
    "t_dip_measured",
    "f_dip",
    "t_plateau_est",
    "t_plateau_measured",
    "plateau_est",
    "plateau_exact",
];

struct MeasuredTimes {
    estimate: CharacteristicTimes,
    decoherence_exact: DecoherenceTime,
    t_dip_measured: Option<f64>,
    f_dip: Option<f64>,
    t_plateau_measured: Option<f64>,
    n_majorana: usize,
    dim: usize,
}

fn measure_times(
    estimate: CharacteristicTimes,
    out: &tfdlab_core::EnsembleOutput,
    di: usize,
    cfg: &RunConfig,
) -> MeasuredTimes {
    let fid = out
        .curve(Observable::Fidelity, di)
        .expect("fidelity curve present");
    let plateau_ref = out.plateau_exact[di];
    let dip = detect_dip(&fid.series, plateau_ref, &cfg.detector);
    let plat = detect_plateau(&fid.series, plateau_ref, &cfg.detector);
    let (n_majorana, dim) = match cfg.model {
        ModelSpec::Syk { n_majorana, .. } => (n_majorana, cfg.model.dim()),
        ModelSpec::Gue { dim, .. } => (0, dim),
    };
    MeasuredTimes {
        estimate,
        decoherence_exact: out.decoherence_exact[di],
        t_dip_measured: dip.map(|(t, _)| t),
        f_dip: dip.map(|(_, f)| f),
        t_plateau_measured: plat,
        n_majorana,
        dim,
    }
}

fn times_row(
    gamma: f64,
    beta: f64,
    n_override: Option<(usize, usize)>,
    m: &MeasuredTimes,
    plateau_exact: f64,
) -> Vec<Field> {
    let (n, d) = n_override.unwrap_or((m.n_majorana, m.dim));
    vec![
        Field::U(n as u64),
        Field::U(d as u64),
        Field::F(gamma),
        Field::F(beta),
        decoherence_field(&m.decoherence_exact),
        decoherence_field(&m.estimate.decoherence),
        Field::F(m.estimate.t_dip_est),
        opt_f(m.t_dip_measured),
        opt_f(m.f_dip),
        Field::F(m.estimate.t_plateau_est),
        opt_f(m.t_plateau_measured),
        Field::F(m.estimate.plateau_value),
        Field::F(plateau_exact),
    ]
}

/// Monte Carlo spectral form factor of the GUE with the finite-d and
/// asymptotic analytic overlays, one CSV per inverse temperature.
///
/// Quenched mean and its standard error, plus the annealed quotient
/// `<|Z|^2>/<Z>^2` (the analytic column's own convention), are emitted side
/// by side; the divergence between them at low temperature is visible in
/// the output rather than asserted away.
pub fn run_gue(cfg: &RunConfig) -> Result<(), CliError> {
    let ModelSpec::Gue { dim, sigma } = cfg.model else {
        return Err(CliError::Config(
            "the gue command requires a model of kind \"gue\"".into(),
        ));
    };
    if dim > 512 {
        return Err(CliError::Config(format!(
            "the finite-d analytic overlay requires dim <= 512, got {dim}"
        )));
    }
    let grid = grid_for(cfg, &cfg.model)?;
    let taus = grid.points();
    let mut betas: Vec<f64> = Vec::new();
    for dp in &cfg.dephasing {
        if !betas.contains(&dp.beta) {
            betas.push(dp.beta);
        }
    }
    ensure_out_dir(cfg)?;
    let pool = thread_pool(cfg)?;

    let spectra: Result<Vec<Spectrum>, CliError> = pool.install(|| {
        use rayon::prelude::*;
        (0..cfg.n_samples)
            .into_par_iter()
            .map(|i| {
                let seed = split_seed(cfg.master_seed, i as u64);
                cached_gue(dim, sigma, seed, cfg.cache_dir.as_deref()).map_err(CliError::from)
            })
            .collect()
    });
    let spectra = spectra?;
    // common energy shift keeps |Z|^2 inside f64 range at any beta
    let e_ref = spectra
        .iter()
        .map(|s| s.min_energy())
        .fold(f64::INFINITY, f64::min);
    let n = cfg.n_samples as f64;

    for &beta in &betas {
        let params = GueParams {
            dim,
            sigma,
            seed: 0,
        };
        let mut rows = Vec::with_capacity(taus.len());
        let mut quenched_curve = Vec::new();
        let mut finite_curve = Vec::new();
        for &tau in &taus {
            let mut quenched = Vec::with_capacity(spectra.len());
            let mut num = 0.0f64;
            let mut den = 0.0f64;
            for s in &spectra {
                let lz_tau = log_partition(s, ComplexBeta::new(beta, tau).expect("beta >= 0"));
                let lz_beta = log_partition(s, ComplexBeta::real(beta).expect("beta >= 0"));
                quenched.push((2.0 * (lz_tau.re - lz_beta.re)).exp());
                num += (2.0 * (lz_tau.re + beta * e_ref)).exp();
                den += (lz_beta.re + beta * e_ref).exp();
            }
            let mean = quenched.iter().sum::<f64>() / n;
            let sem = if spectra.len() >= 2 {
                let var =
                    quenched.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                Some((var / n).sqrt())
            } else {
                None
            };
            let annealed = (num / n) / (den / n).powi(2);
            let finite = sff_finite(&params, beta, tau);
            let asymptotic = if dim >= 10 && tau > 0.0 {
                Some(sff_asymptotic(&params, beta, tau / 2.0))
            } else {
                None
            };
            quenched_curve.push((tau, mean));
            finite_curve.push((tau, finite));
            rows.push(vec![
                Field::F(tau),
                Field::F(mean),
                sem.map_or(Field::Empty, Field::F),
                Field::F(annealed),
                Field::F(finite),
                opt_f(asymptotic),
            ]);
        }
        let name = format!("gue_sff_b{}.csv", float_tag(beta));
        write_file(
            &cfg.out_dir.join(&name),
            &format_csv(
                &["tau", "mc_mean", "mc_sem", "mc_annealed", "finite_d", "asymptotic"],
                &rows,
            ),
        )?;
        if cfg.plot {
            let plot = Plot {
                title: format!("GUE d={dim}, beta={beta}: form factor"),
                x_label: "tau".into(),
                y_label: "g".into(),
                log_x: true,
                log_y: true,
                curves: vec![
                    Curve {
                        label: "Monte Carlo".into(),
                        points: quenched_curve,
                    },
                    Curve {
                        label: "finite-d".into(),
                        points: finite_curve,
                    },
                ],
            };
            write_file(
                &cfg.out_dir.join(format!("gue_sff_b{}.svg", float_tag(beta))),
                &plot.render(),
            )?;
        }
    }
    Ok(())
}

fn cached_gue(
    dim: usize,
    sigma: f64,
    seed: u64,
    cache: Option<&Path>,
) -> tfdlab_core::Result<Spectrum> {
    let model = ModelSpec::Gue { dim, sigma };
    match cache {
        None => model.sample(seed),
        Some(dir) => {
            let path = dir.join(format!("{}-{seed:016x}.spectrum", model.label()));
            if path.exists() {
                if let Ok(s) = Spectrum::load(&path) {
                    if s.meta().model == "gue" && s.meta().seed == seed {
                        return Ok(s);
                    }
                }
            }
            let s = model.sample(seed)?;
            std::fs::create_dir_all(dir)?;
            s.save(&path)?;
            Ok(s)
        }
    }
}

/// Characteristic times as a function of N: sweeps `n_list`, measuring dip
/// and plateau off the averaged fidelity curve per (N, dephasing setting).
pub fn run_times(cfg: &RunConfig) -> Result<(), CliError> {
    let ModelSpec::Syk {
        coupling_scale,
        normalization,
        ..
    } = cfg.model
    else {
        return Err(CliError::Config(
            "the times command requires a model of kind \"syk\"".into(),
        ));
    };
    if cfg.n_list.is_empty() {
        return Err(CliError::Config(
            "the times command requires a nonempty n_list".into(),
        ));
    }
    for &n in &cfg.n_list {
        if n < 8 || n % 2 != 0 {
            return Err(CliError::Config(format!(
                "n_list entries must be even and >= 8, got {n}"
            )));
        }
    }
    ensure_out_dir(cfg)?;
    let pool = thread_pool(cfg)?;

    let mut rows = Vec::new();
    let mut dip_curve = Vec::new();
    let mut plateau_curve = Vec::new();
    for &n in &cfg.n_list {
        let model = ModelSpec::Syk {
            n_majorana: n,
            coupling_scale,
            normalization,
        };
        let grid = match cfg.grid {
            Some(g) => g,
            None => TimeGrid::log_default(model.default_t_max(cfg.dephasing[0].beta))
                .map_err(|e| CliError::Config(e.to_string()))?,
        };
        let spec = EnsembleSpec {
            model,
            dephasing: cfg.dephasing.clone(),
            n_samples: cfg.n_samples,
            master_seed: cfg.master_seed,
            grid,
            cache_dir: cfg.cache_dir.clone(),
        };
        let out = pool.install(|| run_ensemble(&spec, &[Observable::Fidelity]))?;
        for (di, dp) in cfg.dephasing.iter().enumerate() {
            let sub_cfg = RunConfig {
                model,
                ..cfg.clone()
            };
            let times = measure_times(
                estimate_times_syk(n, dp.beta, dp.gamma),
                &out,
                di,
                &sub_cfg,
            );
            if let Some(t) = times.t_dip_measured {
                dip_curve.push((n as f64, t));
            }
            if let Some(t) = times.t_plateau_measured {
                plateau_curve.push((n as f64, t));
            }
            rows.push(times_row(
                dp.gamma,
                dp.beta,
                Some((n, model.dim())),
                &times,
                out.plateau_exact[di],
            ));
        }
    }
    write_file(
        &cfg.out_dir.join("times.csv"),
        &format_csv(TIMES_HEADER, &rows),
    )?;
    if cfg.plot {
        let plot = Plot {
            title: "measured characteristic times vs N".into(),
            x_label: "N".into(),
            y_label: "time".into(),
            log_x: false,
            log_y: true,
            curves: vec![
                Curve {
                    label: "t_dip".into(),
                    points: dip_curve,
                },
                Curve {
                    label: "t_plateau".into(),
                    points: plateau_curve,
                },
            ],
        };
        write_file(&cfg.out_dir.join("times.svg"), &plot.render())?;
    }
    Ok(())
}
