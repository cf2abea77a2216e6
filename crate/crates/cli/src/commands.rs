//! Implementations of the CLI subcommands.

use std::path::Path;

use rom_surrogate::dataset::{batch_generate, fmt_f64, Dataset};
use rom_surrogate::error::{Result, RomError};
use rom_surrogate::param_space::{default_space, ParameterSpace};
use rom_surrogate::pipeline::{
    evaluate_surrogate, infer_torque, load_bundle, save_bundle, train_surrogate, ReductionChoice,
    RsmChoice,
};
use rom_surrogate::seeding::derive_seed;
use rom_surrogate::signal::PERIOD_DEGREES;
use rom_surrogate::spectral::{
    build_reduction, dft_forward, rank_components, reconstruct, reduce_spectrum,
    reconstruction_mae, MaeNormalization, ReductionMap, Spectrum,
};
use rom_surrogate::synthetic::{default_config, SyntheticModelConfig};
use rom_surrogate::uq::{compare_stats, monte_carlo, SyntheticEvaluator};

use crate::config::RunConfig;
use crate::ConfigFlags;

fn load_space(flags: &ConfigFlags) -> Result<ParameterSpace> {
    match &flags.space {
        Some(path) => ParameterSpace::from_json(&std::fs::read_to_string(path)?),
        None => Ok(default_space()),
    }
}

/// Resolves the synthetic model: explicit file or the built-in tables, with
/// the configured noise floor applied and harmonics restricted to what the
/// signal length can represent.
fn load_model_config(
    model_path: Option<&Path>,
    cfg: &RunConfig,
    space: &ParameterSpace,
) -> Result<SyntheticModelConfig> {
    let mut model = match model_path {
        Some(path) => SyntheticModelConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => default_config(),
    };
    if let Some(nf) = cfg.noise_floor {
        model = model.with_noise_floor(nf);
    }
    let n = cfg.n();
    if n < 2 * model.max_active_order() + 2 {
        let restricted = model.restricted_to(n)?;
        eprintln!(
            "note: signal length {n} cannot represent all configured harmonics; \
             keeping orders {:?}",
            restricted.harmonic_orders()
        );
        model = restricted;
    }
    model.validate(space)?;
    Ok(model)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn generate(flags: &ConfigFlags, model_path: Option<&Path>, out: &Path) -> Result<()> {
    let cfg = flags.resolve()?;
    let space = load_space(flags)?;
    let model = load_model_config(model_path, &cfg, &space)?;
    let dataset = batch_generate(&model, &space, cfg.m(), cfg.n(), cfg.seed())?;
    if let Some(parent) = out.parent() {
        std::fs::create_dir_all(parent)?;
    }
    dataset.write_csv_file(out)?;
    let digest = dataset.digest()?;
    let manifest = serde_json::json!({
        "m": cfg.m(),
        "n": cfg.n(),
        "seed": cfg.seed(),
        "noise_floor": model.noise_floor,
        "space": space,
        "model_config_digest": model.digest(),
        "csv_digest": digest,
    });
    write_text(
        &out.with_extension("manifest.json"),
        &serde_json::to_string_pretty(&manifest)?,
    )?;
    println!("m={} n={} digest={digest}", cfg.m(), cfg.n());
    Ok(())
}

pub fn reduce_analyze(
    flags: &ConfigFlags,
    dataset_path: &Path,
    r_max: Option<usize>,
    worst_at: &[usize],
    emit_reduced: Option<usize>,
    out_dir: &Path,
) -> Result<()> {
    let space = load_space(flags)?;
    let dataset = Dataset::read_csv_file(dataset_path, &space)?;
    let n = dataset.signal_len();
    let r_max = r_max.unwrap_or(n / 2 + 1);
    if r_max == 0 || r_max > n / 2 + 1 {
        return Err(RomError::Config(format!(
            "r_max {r_max} outside [1, {}]",
            n / 2 + 1
        )));
    }
    let spectra: Vec<Spectrum> = (0..dataset.len())
        .map(|m| dft_forward(&dataset.signal(m)))
        .collect::<Result<_>>()?;
    let ranking = rank_components(&spectra)?;

    std::fs::create_dir_all(out_dir)?;
    let mut sweep = String::from("r,mae_paper,mae_per_element\n");
    for r in 1..=r_max {
        let map = build_reduction(&ranking, r)?;
        let paper = reconstruction_mae(dataset.signals(), &map, MaeNormalization::Batch)?;
        let per = reconstruction_mae(dataset.signals(), &map, MaeNormalization::PerElement)?;
        sweep.push_str(&format!("{r},{},{}\n", fmt_f64(paper), fmt_f64(per)));
    }
    write_text(&out_dir.join("mae_sweep.csv"), &sweep)?;

    for &r in worst_at {
        let map = build_reduction(&ranking, r)?;
        let (worst, _) = worst_reconstruction(&dataset, &map)?;
        let signal = dataset.signal(worst);
        let rec = reconstruct(&map, &reduce_spectrum(&map, &spectra[worst])?)?;
        let mut csv = String::from("angle_deg,true,reconstructed\n");
        for i in 0..n {
            csv.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(signal.angle_degrees(i)),
                fmt_f64(signal.values()[i]),
                fmt_f64(rec.values()[i])
            ));
        }
        write_text(&out_dir.join(format!("worst_r{r}.csv")), &csv)?;
    }

    if let Some(r) = emit_reduced {
        let map = build_reduction(&ranking, r)?;
        write_text(
            &out_dir.join(format!("reduced_r{r}.csv")),
            &reduced_dataset_csv(&dataset, &map, &spectra)?,
        )?;
        write_text(&out_dir.join(format!("reduction_r{r}.json")), &map.to_json())?;
    }
    println!(
        "analyzed {} signals, r = 1..{r_max}, outputs in {}",
        dataset.len(),
        out_dir.display()
    );
    Ok(())
}

/// Index and value of the largest per-sample L1 reconstruction error.
fn worst_reconstruction(dataset: &Dataset, map: &ReductionMap) -> Result<(usize, f64)> {
    let mut worst = (0usize, -1.0f64);
    for m in 0..dataset.len() {
        let signal = dataset.signal(m);
        let rec = reconstruct(map, &rom_surrogate::spectral::reduce(map, &signal)?)?;
        let err: f64 = signal
            .values()
            .iter()
            .zip(rec.values())
            .map(|(a, b)| (a - b).abs())
            .sum();
        if err > worst.1 {
            worst = (m, err);
        }
    }
    Ok(worst)
}

/// Reduced dataset CSV: `p1..pP, c0_re, c{k}_re, c{k}_im, ...` ascending
/// bin order; the DC bin (and Nyquist, when retained) carry only a real part.
fn reduced_dataset_csv(
    dataset: &Dataset,
    map: &ReductionMap,
    spectra: &[Spectrum],
) -> Result<String> {
    let p = dataset.space().dimension();
    let n = map.n();
    let mut header: Vec<String> = (1..=p).map(|i| format!("p{i}")).collect();
    for &k in map.indices() {
        header.push(format!("c{k}_re"));
        if !(k == 0 || (n.is_multiple_of(2) && k == n / 2)) {
            header.push(format!("c{k}_im"));
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    for m in 0..dataset.len() {
        let reduced = reduce_spectrum(map, &spectra[m])?;
        let coords = reduced.flatten(map);
        let mut fields: Vec<String> = dataset.points()[m]
            .values()
            .iter()
            .map(|v| fmt_f64(*v))
            .collect();
        fields.extend(coords.iter().map(|v| fmt_f64(*v)));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn parse_reduction(kind: &str, cfg: &RunConfig) -> Result<ReductionChoice> {
    match kind {
        "dft" => Ok(ReductionChoice::Dft { r: cfg.r() }),
        "pca" => Ok(ReductionChoice::Pca { c: cfg.c() }),
        "none" => Ok(ReductionChoice::None),
        other => Err(RomError::Config(format!(
            "unknown reduction kind {other:?} (expected dft, pca, or none)"
        ))),
    }
}

fn parse_rsm(kind: &str) -> Result<RsmChoice> {
    match kind {
        "pce" => Ok(RsmChoice::Pce),
        "fnn" => Ok(RsmChoice::Fnn),
        "gp" => Ok(RsmChoice::Gp),
        other => Err(RomError::Config(format!(
            "unknown RSM kind {other:?} (expected pce, fnn, or gp)"
        ))),
    }
}

pub fn train(
    flags: &ConfigFlags,
    dataset_path: &Path,
    reduction: &str,
    rsm: &str,
    out: &Path,
) -> Result<()> {
    let cfg = flags.resolve()?;
    let space = load_space(flags)?;
    let dataset = Dataset::read_csv_file(dataset_path, &space)?;
    let reduction_choice = parse_reduction(reduction, &cfg)?;
    let rsm_choice = parse_rsm(rsm)?;
    let training = match cfg.mt.as_ref().map(|v| v[0]) {
        Some(mt) if mt < dataset.len() => dataset.split(mt, dataset.len() - mt)?.0,
        Some(mt) if mt == dataset.len() => dataset.clone(),
        Some(mt) => {
            return Err(RomError::Config(format!(
                "training size {mt} exceeds dataset size {}",
                dataset.len()
            )));
        }
        None => dataset.clone(),
    };
    let settings = cfg.train_settings(cfg.seed());
    let surrogate = train_surrogate(&training, reduction_choice, rsm_choice, &settings)?;
    save_bundle(&surrogate, out)?;
    write_text(
        &out.join("train_config.json"),
        &serde_json::to_string_pretty(&serde_json::json!({
            "reduction": reduction,
            "rsm": rsm,
            "m_train": training.len(),
            "seed": cfg.seed(),
            "run_config": cfg,
        }))?,
    )?;
    println!(
        "trained {reduction}+{rsm} on {} samples -> {} (output dim {})",
        training.len(),
        out.display(),
        surrogate.rsm().output_dim()
    );
    Ok(())
}

pub fn predict(bundle: &Path, designs: &Path, out: &Path) -> Result<()> {
    let surrogate = load_bundle(bundle)?;
    let space = surrogate.space();
    let p = space.dimension();
    let text = std::fs::read_to_string(designs)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| RomError::Data("designs CSV is empty".into()))?;
    if header.split(',').count() < p {
        return Err(RomError::Data(format!(
            "designs CSV has fewer than {p} columns"
        )));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let coords: Vec<f64> = line
            .split(',')
            .take(p)
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| RomError::Data(format!("row {}: bad value {s:?}", i + 1)))
            })
            .collect::<Result<_>>()?;
        rows.push(space.point(coords)?);
    }
    if rows.is_empty() {
        return Err(RomError::Data("designs CSV has no rows".into()));
    }
    let n = surrogate.signal_len();
    let mut header: Vec<String> = (1..=p).map(|i| format!("p{i}")).collect();
    header.extend((0..n).map(|i| format!("tau_{i}")));
    let mut csv = header.join(",");
    csv.push('\n');
    for point in &rows {
        let signal = infer_torque(&surrogate, point)?;
        let mut fields: Vec<String> = point.values().iter().map(|v| fmt_f64(*v)).collect();
        fields.extend(signal.values().iter().map(|v| fmt_f64(*v)));
        csv.push_str(&fields.join(","));
        csv.push('\n');
    }
    write_text(out, &csv)?;
    println!("predicted {} signals -> {}", rows.len(), out.display());
    Ok(())
}

pub fn evaluate(
    flags: &ConfigFlags,
    bundle: &Path,
    dataset_path: &Path,
    out_dir: &Path,
) -> Result<()> {
    let cfg = flags.resolve()?;
    let surrogate = load_bundle(bundle)?;
    let dataset = Dataset::read_csv_file(dataset_path, surrogate.space())?;
    let validation = match cfg.mv {
        Some(mv) if mv < dataset.len() => dataset.split(dataset.len() - mv, mv)?.1,
        Some(mv) if mv == dataset.len() => dataset.clone(),
        Some(mv) => {
            return Err(RomError::Config(format!(
                "validation size {mv} exceeds dataset size {}",
                dataset.len()
            )));
        }
        None => dataset.clone(),
    };
    let report = evaluate_surrogate(&surrogate, &validation, false)?;
    std::fs::create_dir_all(out_dir)?;
    write_text(&out_dir.join("evaluation.json"), &report.to_json())?;
    write_text(&out_dir.join("evaluation.csv"), &report.to_csv())?;
    println!(
        "signal-averaged MAPE = {:.6e} over {} validation samples",
        report.signal_averaged_mape,
        validation.len()
    );
    Ok(())
}

pub fn uq(
    flags: &ConfigFlags,
    bundle: Option<&Path>,
    samples: usize,
    reference_synthetic: bool,
    common_rng: bool,
    out_dir: &Path,
) -> Result<()> {
    let cfg = flags.resolve()?;
    std::fs::create_dir_all(out_dir)?;
    let seed = cfg.seed();

    let (space, candidate) = match bundle {
        Some(dir) => {
            let surrogate = load_bundle(dir)?;
            let space = surrogate.space().clone();
            let stats = monte_carlo(&surrogate, &space, samples, seed)?;
            (space, stats)
        }
        None => {
            let space = load_space(flags)?;
            let model = load_model_config(None, &cfg, &space)?;
            let truth = SyntheticEvaluator::new(model, space.clone(), cfg.n())?;
            let stats = monte_carlo(&truth, &space, samples, seed)?;
            (space, stats)
        }
    };
    write_text(&out_dir.join("mc_candidate.json"), &candidate.to_json())?;
    write_text(
        &out_dir.join("mc_candidate.csv"),
        &candidate.to_csv(PERIOD_DEGREES),
    )?;
    println!(
        "candidate: {} samples, mean[0] = {:.6}",
        candidate.n_samples, candidate.mean[0]
    );

    if reference_synthetic {
        let model = load_model_config(None, &cfg, &space)?;
        let n = candidate.mean.len();
        let truth = SyntheticEvaluator::new(model, space.clone(), n)?;
        let ref_seed = if common_rng { seed } else { derive_seed(seed, 1) };
        let reference = monte_carlo(&truth, &space, samples, ref_seed)?;
        write_text(&out_dir.join("mc_reference.json"), &reference.to_json())?;
        write_text(
            &out_dir.join("mc_reference.csv"),
            &reference.to_csv(PERIOD_DEGREES),
        )?;
        let comparison = compare_stats(&candidate, &reference)?;
        write_text(&out_dir.join("comparison.json"), &comparison.to_json())?;
        write_text(
            &out_dir.join("comparison.csv"),
            &comparison.to_csv(PERIOD_DEGREES),
        )?;
        println!(
            "signal-averaged APE: mean = {:.6e}, std = {:.6e}",
            comparison.signal_averaged_ape_mean, comparison.signal_averaged_ape_std
        );
    }
    Ok(())
}

pub fn report(flags: &ConfigFlags, out_dir: &Path) -> Result<()> {
    let cfg = flags.resolve()?;
    let space = load_space(flags)?;
    // The comparison study runs on the noisy variant unless told otherwise.
    let noisy_cfg = RunConfig {
        noise_floor: Some(
            cfg.noise_floor
                .unwrap_or(rom_surrogate::synthetic::DEFAULT_NOISE_FLOOR),
        ),
        ..cfg.clone()
    };
    let model = load_model_config(None, &noisy_cfg, &space)?;
    let dataset = batch_generate(&model, &space, cfg.m(), cfg.n(), cfg.seed())?;
    let mv = cfg.mv();
    std::fs::create_dir_all(out_dir)?;

    let reductions = ["dft", "pca", "none"];
    let rsms = ["pce", "fnn", "gp"];
    let mut summary = String::from("reduction,rsm,mt,signal_averaged_mape\n");
    for mt in cfg.training_sizes() {
        let (train_set, val_set) = dataset.split(mt, mv)?;
        for red_name in reductions {
            let reduction = parse_reduction(red_name, &cfg)?;
            for rsm_name in rsms {
                let rsm = parse_rsm(rsm_name)?;
                let settings = cfg.train_settings(cfg.seed());
                let surrogate = train_surrogate(&train_set, reduction, rsm, &settings)?;
                let report = evaluate_surrogate(&surrogate, &val_set, false)?;
                let stem = format!("eval_{red_name}_{rsm_name}_mt{mt}");
                write_text(&out_dir.join(format!("{stem}.json")), &report.to_json())?;
                write_text(&out_dir.join(format!("{stem}.csv")), &report.to_csv())?;
                summary.push_str(&format!(
                    "{red_name},{rsm_name},{mt},{}\n",
                    fmt_f64(report.signal_averaged_mape)
                ));
                println!(
                    "{red_name:>4} + {rsm_name:<3} mt={mt:<5} MAPE = {:.6e}",
                    report.signal_averaged_mape
                );
            }
        }
    }
    write_text(&out_dir.join("summary.csv"), &summary)?;
    let manifest = serde_json::json!({
        "m": cfg.m(),
        "n": cfg.n(),
        "seed": cfg.seed(),
        "mv": mv,
        "training_sizes": cfg.training_sizes(),
        "noise_floor": model.noise_floor,
        "model_config_digest": model.digest(),
        "dataset_digest": dataset.digest()?,
    });
    write_text(
        &out_dir.join("report_manifest.json"),
        &serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}
