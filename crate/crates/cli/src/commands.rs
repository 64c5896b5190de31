use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sagnac_core::analysis::{analyze, AnalysisOptions, BiasMethod};
use sagnac_core::io::{file_digest, read_dataset, write_dataset, write_report};
use sagnac_core::simulator::simulate;
use sagnac_core::stability::log_spaced_taus;
use sagnac_core::sweep::{sweep, SweepParameter, SweepResult};
use sagnac_core::Error;

use crate::config;
use crate::CliError;

fn data_error(e: Error) -> CliError {
    CliError::data(e.to_string())
}

/// Analysis failures caused by the requested options are configuration
/// errors; everything else traces back to the data.
fn analysis_error(e: Error) -> CliError {
    match e {
        Error::Config(_) => CliError::config(e.to_string()),
        other => data_error(other),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn simulate_cmd(config_path: &Path, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let cfg = config::load(config_path)?;
    let seed = seed.unwrap_or(cfg.seed);
    let dataset = simulate(&cfg.spec, seed).map_err(|e| CliError::config(e.to_string()))?;
    write_dataset(&dataset, out).map_err(data_error)?;
    println!(
        "wrote {}: {} s simulated, {} cycles, {} phase channels, {} aux channels, seed {seed}",
        out.display(),
        cfg.spec.schedule.duration,
        dataset.len(),
        dataset.phases.len(),
        dataset.aux.len()
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    Min,
    Extrapolate,
}

#[derive(Debug, Clone)]
pub struct AnalyzeArgs {
    pub dataset: PathBuf,
    pub out: PathBuf,
    pub channels: Option<Vec<String>>,
    pub taus: Option<(f64, f64, usize)>,
    pub method: MethodArg,
    pub target_tau: Option<f64>,
    pub overlapping: bool,
    pub k_channels: usize,
    pub scale_factor: Option<f64>,
    pub arw_band: Option<(f64, f64)>,
}

fn sibling(report: &Path, suffix: &str) -> PathBuf {
    let stem = report
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    report.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn analyze_cmd(args: &AnalyzeArgs) -> Result<(), CliError> {
    let dataset = read_dataset(&args.dataset).map_err(data_error)?;
    let digest = file_digest(&args.dataset).map_err(data_error)?;

    let dt = dataset.sample_period();
    let taus = match args.taus {
        Some((start, stop, points)) => {
            Some(log_spaced_taus(dt, start, stop, points).map_err(|e| CliError::config(e.to_string()))?)
        }
        None => None,
    };
    let options = AnalysisOptions {
        channels: args.channels.clone(),
        taus,
        overlapping: args.overlapping,
        method: match args.method {
            MethodArg::Min => BiasMethod::Minimum,
            MethodArg::Extrapolate => BiasMethod::Extrapolate {
                fit_window: None,
                target_tau: args.target_tau,
            },
        },
        top_k: args.k_channels,
        scale_factor: args.scale_factor,
        arw_band: args.arw_band,
        psd_segment_length: None,
    };
    let analysis = analyze(&dataset, &options).map_err(analysis_error)?;
    for w in &analysis.warnings {
        eprintln!("warning: {w}");
    }

    let mut params = BTreeMap::new();
    params.insert("dataset".to_string(), args.dataset.display().to_string());
    params.insert(
        "channels".to_string(),
        analysis
            .regression
            .as_ref()
            .map(|m| m.channels.join(","))
            .unwrap_or_default(),
    );
    params.insert(
        "method".to_string(),
        match args.method {
            MethodArg::Min => "min",
            MethodArg::Extrapolate => "extrapolate",
        }
        .to_string(),
    );
    params.insert("overlapping".to_string(), args.overlapping.to_string());
    params.insert("k_channels".to_string(), args.k_channels.to_string());
    if let Some((a, b, n)) = args.taus {
        params.insert("taus".to_string(), format!("{a}:{b}:{n}"));
    }
    let report = analysis.to_report(digest, params).map_err(data_error)?;
    write_report(&report, &args.out).map_err(data_error)?;

    let top = analysis.top_k.as_ref();
    let mut phase = String::from("time_s,raw_rad,corrected_rad");
    if top.is_some() {
        phase.push_str(",top_k_corrected_rad");
    }
    phase.push('\n');
    for i in 0..analysis.time.len() {
        write!(phase, "{},{},{}", num(analysis.time[i]), num(analysis.raw[i]), num(analysis.corrected[i])).ok();
        if let Some(t) = top {
            write!(phase, ",{}", num(t.corrected[i])).ok();
        }
        phase.push('\n');
    }

    let mut allan = String::from("tau_s,raw_rad,corrected_rad");
    if top.is_some() {
        allan.push_str(",top_k_corrected_rad");
    }
    allan.push_str(",confidence_frac,clusters_n\n");
    for i in 0..analysis.allan.taus.len() {
        write!(
            allan,
            "{},{},{}",
            num(analysis.allan.taus[i]),
            num(analysis.raw_allan.deviations[i]),
            num(analysis.allan.deviations[i])
        )
        .ok();
        if let Some(t) = top {
            write!(allan, ",{}", num(t.allan.deviations[i])).ok();
        }
        writeln!(
            allan,
            ",{},{}",
            num(analysis.allan.confidence[i]),
            analysis.allan.cluster_counts[i]
        )
        .ok();
    }

    let mut psd = String::from("frequency_hz,rate_psd_rad2_s2_per_hz\n");
    for (f, p) in analysis.psd.frequencies.iter().zip(&analysis.psd.psd) {
        writeln!(psd, "{},{}", num(*f), num(*p)).ok();
    }

    let outputs = [
        (sibling(&args.out, "phase"), phase),
        (sibling(&args.out, "allan"), allan),
        (sibling(&args.out, "psd"), psd),
    ];
    for (path, text) in &outputs {
        write_text(path, text)?;
    }

    println!(
        "wrote {}: bias stability {:.3e} rad ({:.3e} deg/hr) at tau {} s, ARW {:.3e} deg/rt-hr",
        args.out.display(),
        analysis.bias.value,
        analysis.bias.value / analysis.scale_factor * 180.0 / std::f64::consts::PI * 3600.0,
        analysis.bias.tau,
        analysis.arw
    );
    for (path, _) in &outputs {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn sweep_text(result: &SweepResult, field_ratio: f64) -> String {
    let mut out = String::new();
    let unit = match result.parameter {
        SweepParameter::BiasField => {
            writeln!(out, "# field_ratio = {field_ratio}").ok();
            "bias_field_t"
        }
        SweepParameter::Delta => "delta_m",
    };
    if let Some([fwd, rev]) = &result.parabolas {
        for (name, fit) in [("forward", fwd), ("reversed", rev)] {
            writeln!(
                out,
                "# fit.{name}: phase_rad = {:e} + {:e} x + {:e} x^2, apex_t = {:e}, residual_rms_rad = {:e}",
                fit.coefficients[0], fit.coefficients[1], fit.coefficients[2], fit.apex, fit.residual_rms
            )
            .ok();
        }
    }
    if let Some(lines) = &result.lines {
        for (name, fit) in ["forward", "reversed", "rotation_like", "bias_like"].iter().zip(lines) {
            writeln!(
                out,
                "# fit.{name}: slope_rad_per_m = {:e}, intercept_rad = {:e}, residual_rms_rad = {:e}",
                fit.slope, fit.intercept, fit.residual_rms
            )
            .ok();
        }
    }
    writeln!(out, "{unit},forward_rad,reversed_rad,rotation_like_rad,bias_like_rad").ok();
    for r in &result.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            num(r.value),
            num(r.forward),
            num(r.reversed),
            num(r.rotation_like),
            num(r.bias_like)
        )
        .ok();
    }
    out
}

pub fn sweep_cmd(
    config_path: &Path,
    parameter: SweepParameter,
    range: (f64, f64),
    steps: usize,
    out: &Path,
) -> Result<(), CliError> {
    let cfg = config::load(config_path)?;
    let spec = &cfg.spec;
    let result = sweep(
        &spec.instrument,
        &spec.environment,
        &spec.models,
        parameter,
        range,
        steps,
        cfg.field_ratio,
    )
    .map_err(|e| CliError::config(e.to_string()))?;
    let text = sweep_text(&result, cfg.field_ratio);
    write_text(out, &text)?;
    print!("{}", text.lines().filter(|l| l.starts_with('#')).map(|l| format!("{l}\n")).collect::<String>());
    println!("wrote {}: {} steps", out.display(), result.rows.len());
    Ok(())
}
