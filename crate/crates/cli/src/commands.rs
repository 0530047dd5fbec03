use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use clap::ValueEnum;
use muellerkit::augment::{apply_mask, rotate_cube, QuarterTurn, SpatialTransform};
use muellerkit::dataio::{
    plane_file_name, read_cube, read_label_plane, validate_cube, write_cube, write_maps, PlaneData, PlaneFile,
    PlaneKind,
};
use muellerkit::evalkit::{
    aggregate, classify_metrics, dice, fewshot_indices, holdout_split, macro_dice, nested_cv_splits, BinaryConfusion,
    SplitSpec,
};
use muellerkit::luchipman::{decompose_cube, DecomposeOptions, PixelStatus, WavelengthSelection};
use muellerkit::par::current_workers;
use muellerkit::polcore::*;
use muellerkit::realizability::{project_cube, scan_cube, DEFAULT_CLIP, DEFAULT_TOL_PHYS};
use muellerkit::synth::{random_physical_cube, unphysical_tile_cube};
use serde_json::{json, Value};

use crate::args::*;
use crate::{CliError, Config, EXIT_FINDINGS, EXIT_OK};

type CmdResult = Result<u8, CliError>;

pub fn dispatch(command: Command, config: &Config) -> CmdResult {
    match command {
        Command::Validate(a) => validate(a, config),
        Command::Project(a) => project(a, config),
        Command::Decompose(a) => decompose(a, config),
        Command::Synth(a) => synth(a, config),
        Command::Rotate(a) => rotate(a),
        Command::Mask(a) => mask(a, config),
        Command::Normalize(a) => normalize(a),
        Command::Metrics(MetricsCommand::Dice(a)) => metrics_dice(a),
        Command::Metrics(MetricsCommand::Cls(a)) => metrics_cls(a),
        Command::Metrics(MetricsCommand::Aggregate(a)) => metrics_aggregate(a),
        Command::Split(SplitCommand::FewShot(a)) => split_fewshot(a, config),
        Command::Split(SplitCommand::NestedCv(a)) => split_nested(a),
        Command::Split(SplitCommand::Holdout(a)) => split_holdout(a, config),
    }
}

fn emit(v: Value) {
    println!("{v}");
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(CliError::usage(format!("--{name} must be a finite non-negative number, got {v}")))
    }
}

fn tol_phys(flag: Option<f64>, config: &Config) -> Result<f64, CliError> {
    positive("tol-phys", flag.or(config.tol_phys).unwrap_or(DEFAULT_TOL_PHYS))
}

fn clip(flag: Option<f64>, config: &Config) -> Result<f64, CliError> {
    positive("clip", flag.or(config.clip).unwrap_or(DEFAULT_CLIP))
}

fn progress(msg: impl AsRef<str>) {
    eprintln!("muellerkit: {}", msg.as_ref());
}

fn cube_summary(cube: &MuellerCube, path: &Path) -> Value {
    json!({
        "output": path.display().to_string(),
        "height": cube.height(),
        "width": cube.width(),
        "wavelengths": cube.wavelengths(),
        "precision": if cube.precision() == Precision::F64 { "f64" } else { "f32" },
        "normalized": cube.is_normalized(),
        "mask": cube.mask().map(|m| format!("{:#06x}", m.bits)),
    })
}

fn validate(a: ValidateArgs, config: &Config) -> CmdResult {
    let tol = tol_phys(a.tol_phys, config)?;
    let bytes = fs::read(&a.input).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => muellerkit::error::Error::BadPath(a.input.display().to_string()).into(),
        _ => CliError::from(e),
    })?;
    let cube = muellerkit::dataio::decode_cube(&bytes)?;
    progress(format!("scanning {} matrices on {} workers", cube.data().len(), current_workers()));
    let mut report = validate_cube(&cube, tol)?;
    report.file_len = bytes.len() as u64;

    if let Some(dir) = &a.planes {
        fs::create_dir_all(dir)?;
        let mins = scan_cube(&cube, tol)?.min_eigenvalue_plane();
        let n = cube.plane_len();
        for (l, wl) in cube.wavelengths().iter().enumerate() {
            let plane = PlaneData::F64(mins[l * n..(l + 1) * n].to_vec());
            PlaneFile::new(cube.height(), cube.width(), PlaneKind::MinEig, plane)?
                .write(dir.join(plane_file_name(PlaneKind::MinEig, *wl)))?;
        }
    }

    let h = &report.header;
    emit(json!({
        "file": a.input.display().to_string(),
        "file_bytes": report.file_len,
        "height": h.height,
        "width": h.width,
        "wavelengths": h.wavelengths,
        "precision": if h.dtype == Precision::F64 { "f64" } else { "f32" },
        "normalized": h.normalized,
        "m00_plane": h.has_m00_plane,
        "mask": h.mask.map(|m| format!("{m:#06x}")),
        "matrices": report.n_matrices,
        "nan_count": report.nan_count,
        "inf_count": report.inf_count,
        "physical": report.n_physical,
        "unphysical": report.n_unphysical(),
        "fraction_physical": report.fraction_physical,
        "min_eigenvalue": if report.min_eigenvalue.is_nan() { Value::Null } else { json!(report.min_eigenvalue) },
        "tol_phys": tol,
        "clean": report.is_clean(),
    }));
    Ok(if report.is_clean() { EXIT_OK } else { EXIT_FINDINGS })
}

fn project(a: ProjectArgs, config: &Config) -> CmdResult {
    let (clip, tol) = (clip(a.clip, config)?, tol_phys(a.tol_phys, config)?);
    let cube = read_cube(&a.input)?;
    progress(format!("projecting {} matrices on {} workers", cube.data().len(), current_workers()));
    let before = scan_cube(&cube, tol)?;
    let projected = project_cube(&cube, clip, tol)?;
    write_cube(&projected, &a.output)?;
    let mut summary = cube_summary(&projected, &a.output);
    summary["matrices"] = json!(cube.data().len());
    summary["projected"] = json!(cube.data().len() - before.n_physical);
    summary["clip"] = json!(clip);
    emit(summary);
    Ok(EXIT_OK)
}

fn preview_png(values: &[f64], height: usize, width: usize, path: &Path) -> Result<(), CliError> {
    let (lo, hi) = values
        .iter()
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let span = hi - lo;
    let pixels: Vec<u8> = values
        .iter()
        .map(|&x| {
            if span > 0.0 && x.is_finite() {
                (255.0 * (x - lo) / span).round() as u8
            } else {
                0
            }
        })
        .collect();
    let img = image::GrayImage::from_raw(width as u32, height as u32, pixels)
        .ok_or_else(|| CliError::usage("preview buffer size mismatch"))?;
    img.save(path).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

fn decompose(a: DecomposeArgs, config: &Config) -> CmdResult {
    let project = !a.no_project && config.project.unwrap_or(true);
    let opts = DecomposeOptions {
        project_unphysical: project,
        clip: clip(a.clip, config)?,
        tol_phys: tol_phys(a.tol_phys, config)?,
        wavelengths: if a.wavelengths.is_empty() {
            WavelengthSelection::All
        } else {
            WavelengthSelection::Indices(a.wavelengths.clone())
        },
        ..DecomposeOptions::default()
    };
    let cube = read_cube(&a.input)?;
    if let Some(&k) = a.wavelengths.iter().find(|&&k| k >= cube.n_wavelengths()) {
        return Err(CliError::usage(format!(
            "--wavelength {k} out of range; the cube has {} wavelength(s)",
            cube.n_wavelengths()
        )));
    }
    progress(format!(
        "decomposing {}x{} pixels at {} wavelength(s) on {} workers",
        cube.height(),
        cube.width(),
        if a.wavelengths.is_empty() { cube.n_wavelengths() } else { a.wavelengths.len() },
        current_workers()
    ));
    let maps = decompose_cube(&cube, &opts)?;
    let written = write_maps(&maps, &a.outdir)?;
    let mut previews = 0;
    if a.preview || config.preview.unwrap_or(false) {
        for (wl, p) in maps.wavelengths.iter().zip(&maps.planes) {
            for (kind, values) in [
                (PlaneKind::Delta, &p.depolarization),
                (PlaneKind::Ret, &p.retardance),
                (PlaneKind::Diat, &p.diattenuation),
            ] {
                let name = format!("{}_{}.png", kind.file_stem(), wl);
                preview_png(values, maps.height, maps.width, &a.outdir.join(name))?;
                previews += 1;
            }
        }
    }
    progress(format!("wrote {} planes and {previews} previews to {}", written.len(), a.outdir.display()));
    for (wl, p) in maps.wavelengths.iter().zip(&maps.planes) {
        let count = |s: PixelStatus| p.status.iter().filter(|&&x| x == s).count();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        emit(json!({
            "wavelength": wl,
            "pixels": p.status.len(),
            "ok": count(PixelStatus::Ok),
            "degenerate_diattenuator": count(PixelStatus::DegenerateDiattenuator),
            "singular_depolarizer": count(PixelStatus::SingularDepolarizer),
            "unphysical_input": count(PixelStatus::UnphysicalInput),
            "mean_depolarization": mean(&p.depolarization),
            "mean_retardance": mean(&p.retardance),
            "mean_diattenuation": mean(&p.diattenuation),
        }));
    }
    Ok(EXIT_OK)
}

fn triple(name: &str, v: &[f64]) -> Result<[f64; 3], CliError> {
    <[f64; 3]>::try_from(v).map_err(|_| CliError::usage(format!("--{name} takes exactly three values")))
}

fn synth(a: SynthArgs, config: &Config) -> CmdResult {
    let (h, w) = (a.height, a.width);
    let wl = a.wavelengths.clone();
    let [da, db, dc] = triple("depolarizer", &a.depolarizer)?;
    let dvec = triple("diattenuation", &a.diattenuation)?;
    let cube = match a.kind {
        SynthKind::Identity => MuellerCube::filled(h, w, wl, MuellerMatrix::IDENTITY)?,
        SynthKind::Depolarizer => MuellerCube::filled(h, w, wl, make_diagonal_depolarizer(da, db, dc))?,
        SynthKind::Retarder => MuellerCube::filled(h, w, wl, make_linear_retarder(a.theta, a.delta))?,
        SynthKind::Diattenuator => MuellerCube::filled(h, w, wl, make_diattenuator(dvec)?)?,
        SynthKind::Composed => {
            let m = compose(
                &make_diagonal_depolarizer(da, db, dc),
                &make_linear_retarder(a.theta, a.delta),
                &make_diattenuator(dvec)?,
            );
            MuellerCube::filled(h, w, wl, m)?
        }
        SynthKind::RandomPhysical => random_physical_cube(h, w, wl, a.seed.or(config.seed).unwrap_or(0))?,
        SynthKind::UnphysicalTile => unphysical_tile_cube(h, w, wl)?,
    };
    let cube = cube.with_precision(if a.f64 { Precision::F64 } else { Precision::F32 });
    write_cube(&cube, &a.output)?;
    let mut summary = cube_summary(&cube, &a.output);
    summary["kind"] = json!(a.kind.to_possible_value().expect("no skipped variants").get_name());
    if matches!(a.kind, SynthKind::Retarder | SynthKind::Composed) {
        summary["retardance"] = json!(a.delta.rem_euclid(2.0 * PI).min(2.0 * PI - a.delta.rem_euclid(2.0 * PI)));
    }
    emit(summary);
    Ok(EXIT_OK)
}

fn rotate(a: RotateArgs) -> CmdResult {
    let rotation = match a.deg.unwrap_or(Degrees::D0) {
        Degrees::D0 => QuarterTurn::Deg0,
        Degrees::D90 => QuarterTurn::Deg90,
        Degrees::D180 => QuarterTurn::Deg180,
        Degrees::D270 => QuarterTurn::Deg270,
    };
    let t = SpatialTransform {
        rotation,
        flip_h: a.flip == Some(Flip::H),
        flip_v: a.flip == Some(Flip::V),
    };
    let cube = rotate_cube(&read_cube(&a.input)?, t)?;
    write_cube(&cube, &a.output)?;
    emit(cube_summary(&cube, &a.output));
    Ok(EXIT_OK)
}

fn parse_bits(s: &str) -> Result<u16, CliError> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u16::from_str_radix(hex, 16),
        None => t.parse::<u16>(),
    };
    parsed.map_err(|_| CliError::usage(format!("--bits {s:?} is not a 16-bit mask")))
}

fn mask(a: MaskArgs, config: &Config) -> CmdResult {
    let mask = match (&a.preset, &a.bits) {
        (Some(name), _) => ElementMask::preset(name).ok_or_else(|| {
            let names: Vec<_> = ElementMask::PRESETS.iter().map(|p| p.0).collect();
            CliError::usage(format!("unknown preset {name:?}; expected one of {}", names.join(", ")))
        })?,
        (None, Some(bits)) => ElementMask::from_bits(parse_bits(bits)?),
        (None, None) => unreachable!("clap requires --preset or --bits"),
    };
    let fill = a.fill.or(config.fill).unwrap_or(0.0);
    let cube = apply_mask(&read_cube(&a.input)?, mask, fill)?;
    write_cube(&cube, &a.output)?;
    emit(cube_summary(&cube, &a.output));
    Ok(EXIT_OK)
}

fn normalize(a: NormalizeArgs) -> CmdResult {
    let cube = normalize_cube(&read_cube(&a.input)?)?;
    write_cube(&cube, &a.output)?;
    emit(cube_summary(&cube, &a.output));
    Ok(EXIT_OK)
}

fn csv_value(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| x.to_string())
}

fn write_summary(path: &Option<std::path::PathBuf>, v: Value) -> Result<(), CliError> {
    if let Some(p) = path {
        fs::write(p, serde_json::to_string_pretty(&v).expect("json serializes") + "\n")?;
    }
    Ok(())
}

fn label_pair(pred: &Path, gt: &Path) -> Result<(Vec<u8>, Vec<u8>), CliError> {
    let (ph, pw, p) = read_label_plane(pred)?;
    let (gh, gw, g) = read_label_plane(gt)?;
    if (ph, pw) != (gh, gw) {
        return Err(muellerkit::error::Error::DimensionMismatch(format!(
            "prediction is {ph}x{pw}, ground truth {gh}x{gw}"
        ))
        .into());
    }
    Ok((p, g))
}

fn metrics_dice(a: DiceArgs) -> CmdResult {
    let (p, g) = label_pair(&a.pred, &a.gt)?;
    println!("metric,class,value");
    let mut per_class = serde_json::Map::new();
    for &c in &a.classes {
        let d = dice(&p, &g, c)?;
        println!("dice,{c},{d}");
        per_class.insert(c.to_string(), json!(d));
    }
    let m = macro_dice(&p, &g, &a.classes)?;
    println!("macro_dice,all,{m}");
    write_summary(
        &a.summary,
        json!({
            "metric": "dice",
            "pred": a.pred.display().to_string(),
            "gt": a.gt.display().to_string(),
            "classes": a.classes,
            "dice": per_class,
            "macro_dice": m,
        }),
    )?;
    Ok(EXIT_OK)
}

fn metrics_cls(a: ClsArgs) -> CmdResult {
    let conf = match (&a.counts, &a.pred, &a.gt) {
        (Some(c), _, _) => match c[..] {
            [tp, fp, tn, fn_] => BinaryConfusion::new(tp, fp, tn, fn_),
            _ => return Err(CliError::usage("--counts takes exactly four values tp,fp,tn,fn")),
        },
        (None, Some(pred), Some(gt)) => {
            let (p, g) = label_pair(pred, gt)?;
            let (pb, gb): (Vec<bool>, Vec<bool>) = p
                .iter()
                .zip(&g)
                .filter(|(&x, &y)| x != muellerkit::evalkit::IGNORE_LABEL && y != muellerkit::evalkit::IGNORE_LABEL)
                .map(|(&x, &y)| (x == a.positive, y == a.positive))
                .unzip();
            BinaryConfusion::from_predictions(&pb, &gb)?
        }
        _ => unreachable!("clap requires --counts or --pred/--gt"),
    };
    let m = classify_metrics(&conf);
    println!("metric,class,value");
    println!("accuracy,all,{}", csv_value(m.accuracy));
    println!("sensitivity,positive,{}", csv_value(m.sensitivity));
    println!("specificity,negative,{}", csv_value(m.specificity));
    write_summary(
        &a.summary,
        json!({
            "metric": "classification",
            "confusion": {"tp": conf.tp, "fp": conf.fp, "tn": conf.tn, "fn": conf.fn_},
            "accuracy": m.accuracy,
            "sensitivity": m.sensitivity,
            "specificity": m.specificity,
        }),
    )?;
    Ok(EXIT_OK)
}

fn metrics_aggregate(a: AggregateArgs) -> CmdResult {
    let values = match (&a.values, &a.input) {
        (Some(v), _) => v.clone(),
        (None, Some(path)) => fs::read_to_string(path)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => muellerkit::error::Error::BadPath(path.display().to_string()).into(),
                _ => CliError::from(e),
            })?
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| CliError::usage(format!("not a number: {s:?}"))))
            .collect::<Result<Vec<_>, _>>()?,
        _ => unreachable!("clap requires --values or --input"),
    };
    let agg = aggregate(&values)?;
    println!("metric,class,value");
    println!("{}_mean,all,{}", a.name, agg.mean);
    println!("{}_std,all,{}", a.name, csv_value(agg.std));
    println!("{}_n,all,{}", a.name, agg.n);
    write_summary(
        &a.summary,
        json!({"metric": a.name, "n": agg.n, "mean": agg.mean, "std": agg.std, "values": values}),
    )?;
    Ok(EXIT_OK)
}

fn split_fewshot(a: FewShotArgs, config: &Config) -> CmdResult {
    let spec = SplitSpec::new(a.n, a.fraction, a.seed.or(config.seed).unwrap_or(0));
    let idx = fewshot_indices(&spec)?;
    println!("rank,index");
    for (rank, i) in idx.iter().enumerate() {
        println!("{rank},{i}");
    }
    Ok(EXIT_OK)
}

fn split_nested(a: NestedCvArgs) -> CmdResult {
    let splits = nested_cv_splits(a.n)?;
    println!("split,test,val,train");
    for (k, s) in splits.iter().enumerate() {
        let train: Vec<String> = s.train.iter().map(|x| x.to_string()).collect();
        println!("{k},{},{},{}", s.test, s.val, train.join(" "));
    }
    Ok(EXIT_OK)
}

fn split_holdout(a: HoldoutArgs, config: &Config) -> CmdResult {
    let h = holdout_split(a.n, a.train, a.val, a.seed.or(config.seed).unwrap_or(0))?;
    println!("set,index");
    for (name, set) in [("train", &h.train), ("val", &h.val), ("test", &h.test)] {
        for i in set {
            println!("{name},{i}");
        }
    }
    Ok(EXIT_OK)
}
