use fedosov_core::charts::Chart;
use fedosov_core::formal_weyl::{star_left_operator, star_product, star_right_operator, TruncationConfig};
use fedosov_core::numerics::marginal_p_em;
use fedosov_core::symbolic::parse_observable;
use fedosov_core::verification::{
    chart_integrity, connection_transport, reconstruction_check, run_report, Check, ReconstructionInput, Status,
    VerificationReport,
};
use fedosov_core::wigner::{action_angle_grid, polar_grid, EigenLabels, GridSpec};

use crate::artifact::{num, write_file, Csv};
use crate::config::RunConfig;
use crate::{CliError, ExpandArgs, GridArgs, MarginalArgs, PolarArgs, VerifyArgs};

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn print_parts(report: &VerificationReport) {
    println!("{}: {} (max error {:.3e}, tolerance {:.1e})", report.id, status_word(report.status), report.max_error, report.tolerance);
    if let Some(parts) = report.params.get("parts").and_then(|p| p.as_array()) {
        for p in parts {
            if let Ok(r) = serde_json::from_value::<VerificationReport>(p.clone()) {
                println!("  {:<48} {:<4} {:.3e} / {:.1e}", r.id, status_word(r.status), r.max_error, r.tolerance);
            }
        }
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
        Status::Skipped => "skip",
    }
}

fn verdict(report: &VerificationReport) -> Result<(), CliError> {
    if report.status == Status::Fail {
        Err(CliError::Failed(report.id.clone()))
    } else {
        Ok(())
    }
}

pub fn chart_check(cfg: &RunConfig, points: usize) -> Result<(), CliError> {
    let report = chart_integrity(cfg.seed, points).map_err(usage)?;
    print_parts(&report);
    verdict(&report)
}

/// Prints the transported table, then fails if it differs from the printed one.
pub fn connection() -> Result<(), CliError> {
    print!("{}", Chart::action_angle().connection());
    let report = connection_transport(0, 0).map_err(usage)?;
    verdict(&report)
}

pub fn fedosov_derive(obs: &str, hbar_order: u32, side: &str, chart: &str) -> Result<(), CliError> {
    let f = parse_observable(obs).map_err(usage)?;
    let chart = Chart::by_name(chart).map_err(usage)?;
    let trunc = TruncationConfig::for_hbar_order(hbar_order);
    let op = match side {
        "left" => star_left_operator(&f, &chart, trunc),
        "right" => star_right_operator(&f, &chart, trunc),
        other => return Err(CliError::Usage(format!("--side must be `left` or `right`, got `{other}`"))),
    }
    .map_err(usage)?;
    print!("{op}");
    Ok(())
}

pub fn star(f: &str, g: &str, chart: &str, hbar_order: u32) -> Result<(), CliError> {
    let (f, g) = (parse_observable(f).map_err(usage)?, parse_observable(g).map_err(usage)?);
    let chart = Chart::by_name(chart).map_err(usage)?;
    let s = star_product(&f, &g, &chart, TruncationConfig::for_hbar_order(hbar_order)).map_err(usage)?;
    println!("{s}");
    Ok(())
}

pub fn wigner_grid(cfg: &RunConfig, invocation: &str, a: &GridArgs) -> Result<(), CliError> {
    let e = cfg.energy(a.e);
    let labels = EigenLabels::cross(e, a.m, a.mprime.unwrap_or(a.m), a.alpha).map_err(usage)?.with_offset(a.offset);
    let grid = GridSpec {
        h_range: (cfg.energy(a.h_range.0), cfg.energy(a.h_range.1)),
        l_range: (cfg.action(a.l_range.0), cfg.action(a.l_range.1)),
        n_h: a.n_h,
        n_l: a.n_l,
        t: cfg.time(a.t),
        chi: a.chi,
    };
    let rows = action_angle_grid(&labels, &cfg.params(), &grid).map_err(usage)?;
    let mut csv = Csv::new(
        invocation,
        cfg,
        "cross-Wigner function W_Emm' on an (H, L) grid at fixed T and chi; it takes both signs",
        &["T", "chi", "H", "L", "re", "im"],
    );
    for r in &rows {
        let mut cells: Vec<String> = r.coords.iter().map(|v| num(*v)).collect();
        cells.push(num(r.value.re));
        cells.push(num(r.value.im));
        csv.row(&cells);
    }
    write_file(&a.out, &csv.into_string())?;
    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.value.re), hi.max(r.value.re)));
    println!("wrote {} points to {}; real part in [{lo:.6e}, {hi:.6e}]", rows.len(), a.out.display());
    Ok(())
}

pub fn wigner_polar(cfg: &RunConfig, invocation: &str, a: &PolarArgs) -> Result<(), CliError> {
    let labels = EigenLabels::new(cfg.energy(a.e), a.m).map_err(usage)?;
    let r_range = (cfg.length(a.r_range.0), cfg.length(a.r_range.1));
    let p_range = (cfg.momentum(a.p_range.0), cfg.momentum(a.p_range.1));
    let rows = polar_grid(&labels, &cfg.params(), r_range, p_range, a.n_r, a.n_p, a.phi, a.chi).map_err(usage)?;
    let mut csv = Csv::new(invocation, cfg, "Wigner function W_Em in polar variables (r, phi, p, chi)", &["r", "phi", "p", "chi", "W"]);
    for r in &rows {
        let mut cells: Vec<String> = r.coords.iter().map(|v| num(*v)).collect();
        cells.push(num(r.value.re));
        csv.row(&cells);
    }
    write_file(&a.out, &csv.into_string())?;
    println!("wrote {} points to {}", rows.len(), a.out.display());
    Ok(())
}

pub fn marginal(cfg: &RunConfig, invocation: &str, a: &MarginalArgs) -> Result<(), CliError> {
    if a.points < 2 || !(a.r_max > 0.0) || !a.r_max.is_finite() {
        return Err(CliError::Usage(format!("need --points >= 2 and a positive --r-max, got {} and {}", a.points, a.r_max)));
    }
    let labels = EigenLabels::new(cfg.energy(a.e), a.m).map_err(usage)?;
    let r_max = cfg.length(a.r_max);
    let radii: Vec<f64> = (0..a.points).map(|i| r_max * i as f64 / (a.points - 1) as f64).collect();
    let pts = marginal_p_em(&labels, &cfg.params(), &radii, &cfg.quadrature()?).map_err(usage)?;
    let mut csv = Csv::new(
        invocation,
        cfg,
        "position marginal P(r) of W_Em; for integer m also 2 pi^2 M N_Em J_m(p0 r/hbar)^2",
        &["r", "P", "quadrature_error", "closed_form"],
    );
    for p in &pts {
        csv.row(&[num(p.r), num(p.value), num(p.error), p.closed_form.map(num).unwrap_or_default()]);
    }
    let min = pts.iter().min_by(|x, y| x.value.total_cmp(&y.value)).expect("at least two points");
    match &a.out {
        Some(path) => {
            write_file(path, &csv.into_string())?;
            println!("wrote {} points to {}", pts.len(), path.display());
        }
        None => print!("{}", csv.into_string()),
    }
    eprintln!("minimum P = {:.6e} at r = {:.6e}", min.value, min.r);
    Ok(())
}

pub fn expand(cfg: &RunConfig, a: &ExpandArgs) -> Result<(), CliError> {
    if a.mmax < 5 {
        return Err(CliError::Usage(format!("--mmax must be at least 5, got {}", a.mmax)));
    }
    let input = ReconstructionInput {
        e_tilde: cfg.energy(a.e),
        chi0: a.chi0,
        alpha: a.alpha,
        truncations: vec![a.mmax / 5, 2 * a.mmax / 5, 4 * a.mmax / 5, a.mmax],
        params: cfg.params(),
        ..ReconstructionInput::default()
    };
    let report = reconstruction_check(&input).map_err(usage)?;
    if let Some(first) = report.part("truncated double sum vs momentum state") {
        println!("{:>4}  {:>24}  {:>24}  {:>12}", "M", "re", "im", "rel. error");
        for row in first.params["scan"].as_array().into_iter().flatten() {
            println!(
                "{:>4}  {:>24}  {:>24}  {:>12.3e}",
                row["M"].as_i64().unwrap_or(-1),
                num(row["re"].as_f64().unwrap_or(f64::NAN)),
                num(row["im"].as_f64().unwrap_or(f64::NAN)),
                row["relative_error"].as_f64().unwrap_or(f64::NAN)
            );
        }
    }
    print_parts(&report);
    verdict(&report)
}

pub fn verify(cfg: &RunConfig, a: &VerifyArgs) -> Result<(), CliError> {
    let selection: Vec<Check> = if a.suites.is_empty() {
        Check::ALL.to_vec()
    } else {
        a.suites
            .iter()
            .map(|s| {
                Check::by_name(s).ok_or_else(|| {
                    let known: Vec<&str> = Check::ALL.iter().map(|c| c.name()).collect();
                    CliError::Usage(format!("unknown check `{s}`; known: {}", known.join(", ")))
                })
            })
            .collect::<Result<_, _>>()?
    };
    let seed = a.seed.unwrap_or(cfg.seed);
    let mut reports = run_report(&selection, seed);
    if a.omit_timing {
        for r in &mut reports {
            zero_seconds(r);
        }
    }
    for r in &reports {
        println!("{:<22} {:<4} {:.3e} / {:.1e}", r.id, status_word(r.status), r.max_error, r.tolerance);
    }
    if let Some(path) = &a.report {
        let text = serde_json::to_string_pretty(&reports).map_err(|e| CliError::Io(e.to_string()))?;
        write_file(path, &(text + "\n"))?;
    }
    let failed: Vec<&str> = reports.iter().filter(|r| r.status == Status::Fail).map(|r| r.id.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(failed.join(", ")))
    }
}

fn zero_seconds(r: &mut VerificationReport) {
    r.seconds = 0.0;
    if let Some(parts) = r.params.get_mut("parts").and_then(|p| p.as_array_mut()) {
        for p in parts {
            if let Some(s) = p.get_mut("seconds") {
                *s = serde_json::json!(0.0);
            }
        }
    }
}
