use anyhow::{anyhow, Context as _};
use rayon::prelude::*;
use serde_json::json;

use salem_core::cantor::{construct as build, level_measure, verify_measure, ConstructionParams};
use salem_core::dimension::{
    box_counting_dim, energy_direct, energy_fourier, fourier_dim_estimate, hausdorff_dim_estimate,
};
use salem_core::fourier::{decay_fit, fourier_grid, fourier_product, log_factor};
use salem_core::sumset::{theorem_pipeline, Shape};
use salem_core::{AtomMeasure, GridMeasure};

use crate::config::{
    check_window, ConstructConfig, Context, DimConfig, DimInput, EnergyConfig, EnergyMethods,
    ExportConfig, ExportFormat, MeasureConfig, ScanConfig, SumsetConfig,
};
use crate::Failure;

type Outcome = Result<(), Failure>;

/// 17 significant digits, locale-free.
fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn construct(ctx: &Context) -> Outcome {
    let cfg: ConstructConfig = ctx.parse()?;
    let seed = ctx.seed.unwrap_or(cfg.seed);
    let mut p = ConstructionParams::new(cfg.alpha, cfg.n_star, cfg.depth, seed)?;
    if let Some(d0) = cfg.d0 {
        p = p.with_d0(d0)?;
    }
    if let Some(k) = cfg.k_max {
        p = p.with_k_max(k);
    }
    if let Some(z) = cfg.zeta0 {
        p.zeta0 = z;
    }
    if let Some(c) = cfg.retry_cap {
        p.retry_cap = c;
    }
    p.validate()?;
    let cm = build(&p, cfg.nu.as_ref())?;

    let mut table = String::from("level  attempts  retries  max_slack_X             max_slack_Y\n");
    for c in cm.certificates() {
        table += &format!(
            "{:>5}  {:>8}  {:>7}  {:<22}  {}\n",
            c.level,
            c.attempts,
            c.attempts - 1,
            g17(c.max_slack_x),
            c.max_slack_y.map_or("-".to_string(), g17)
        );
    }
    ctx.write_json("measure.json", seed, &json!({ "measure": cm }))?;
    ctx.write("certificates.txt", &table)?;
    print!("{table}");
    Ok(())
}

pub fn fourier_scan(ctx: &Context) -> Outcome {
    let cfg: ScanConfig = ctx.parse()?;
    check_window(cfg.window)?;
    let cm = ctx.load_measure(&cfg.measure)?;
    let level = cfg.level.unwrap_or(cm.depth());
    let mu = level_measure(&cm, level)?;
    let p = cm.params();
    let k_max = cfg.k_max.unwrap_or(p.k_max) as i64;
    let nu = cfg.product.as_ref().map(|f| ctx.load_atoms(f)).transpose()?;
    let rows: Vec<(i64, f64, num_complex::Complex64)> = (-k_max..=k_max)
        .into_par_iter()
        .map(|k| {
            let xi = p.d0 * k as f64;
            let v = match &nu {
                Some(nu) => fourier_product(&mu, nu, xi),
                None => fourier_grid(&mu, xi),
            };
            (k, xi, v)
        })
        .collect();
    let zeta = cfg.log_correct.then_some(p.zeta0);
    let samples: Vec<(f64, f64)> = rows.iter().filter(|r| r.1 > 0.0).map(|r| (r.1, r.2.norm())).collect();
    let report = decay_fit(&samples, cfg.window, 1.0, zeta)?;

    let mut csv = String::from("k,xi,re,im,abs,envelope_bound\n");
    for (k, xi, v) in &rows {
        let bound = report.envelope(*xi) * zeta.map_or(1.0, |z| log_factor(*xi, z));
        csv += &format!("{k},{},{},{},{},{}\n", g17(*xi), g17(v.re), g17(v.im), g17(v.norm()), g17(bound));
    }
    ctx.write("scan.csv", &csv)?;
    ctx.write_json(
        "decay.json",
        p.seed,
        &json!({
            "level": level,
            "k_max": k_max,
            "log_correct": cfg.log_correct,
            "product": cfg.product.is_some(),
            "report": report,
        }),
    )?;
    println!(
        "fitted_beta {} fitted_C {} over {} samples",
        report.fitted_beta, report.fitted_c, report.n_samples
    );
    Ok(())
}

fn window_grid(d0: f64, window: (f64, f64)) -> Vec<f64> {
    let lo = (window.0 / d0).ceil().max(1.0) as u64;
    let hi = (window.1 / d0).floor() as u64;
    (lo..=hi).map(|k| d0 * k as f64).collect()
}

pub fn dim(ctx: &Context) -> Outcome {
    let cfg: DimConfig = ctx.parse()?;
    check_window(cfg.window)?;
    let nu = cfg.product.as_ref().map(|f| ctx.load_atoms(f)).transpose()?;
    let (grid, seed, hausdorff, method, zeta, d0) = match &cfg.input {
        DimInput::Measure { path } => {
            let cm = ctx.load_measure(path)?;
            let h = hausdorff_dim_estimate(&cm)?;
            let p = cm.params();
            let zeta = cfg.log_correct.then_some(p.zeta0);
            (level_measure(&cm, cm.depth())?, p.seed, h, "two_cell_mass", zeta, p.d0)
        }
        DimInput::SelfSimilar { base, digits, depth } => {
            let g = GridMeasure::self_similar(*base, digits, *depth)?;
            let pts: Vec<f64> = g.discretize().atoms().iter().map(|a| a.position).collect();
            let widths: Vec<f64> = (1..*depth as i32).map(|k| (*base as f64).powi(-k)).collect();
            let h = box_counting_dim(&pts, &widths)?;
            // the logarithmic factor belongs to the construction bound only
            (g, ctx.seed.unwrap_or(0), h, "box_counting", None, 1.0)
        }
    };
    let freqs = window_grid(d0, cfg.window);
    let (fourier, _) = fourier_dim_estimate(|xi| fourier_grid(&grid, xi), &freqs, cfg.window, zeta, 1)?;
    let product = match &nu {
        Some(nu) => Some(fourier_dim_estimate(|xi| fourier_product(&grid, nu, xi), &freqs, cfg.window, zeta, 1)?.0),
        None => None,
    };
    ctx.write_json(
        "dim.json",
        seed,
        &json!({
            "hausdorff": hausdorff,
            "hausdorff_method": method,
            "fourier": fourier,
            "fourier_product": product,
            "log_corrected": zeta.is_some(),
            "window": cfg.window,
        }),
    )?;
    println!("hausdorff {hausdorff} fourier {fourier}");
    Ok(())
}

pub fn energy(ctx: &Context) -> Outcome {
    let cfg: EnergyConfig = ctx.parse()?;
    cfg.spec.validate()?;
    let shape = ctx.shape(&cfg.input)?;
    shape.validate()?;
    if shape.dim() != cfg.spec.d {
        return Err(anyhow!("input of dimension {} with d = {}", shape.dim(), cfg.spec.d).into());
    }
    let mut reports = Vec::new();
    if cfg.method != EnergyMethods::Fourier {
        let r = match &shape {
            Shape::PlaneAtoms { measure } => energy_direct(measure, &cfg.spec)?,
            s if s.dim() == 1 => energy_direct(&s.scalar_atoms(cfg.rule_points)?, &cfg.spec)?,
            _ => return Err(anyhow!("direct planar energy needs an atomic input").into()),
        };
        reports.push(r);
    }
    if cfg.method != EnergyMethods::Direct {
        let r = if cfg.spec.d == 1 {
            energy_fourier(|xi: f64| shape.hat([xi, 0.0]), &cfg.spec)?
        } else {
            energy_fourier(|xi: [f64; 2]| shape.hat(xi), &cfg.spec)?
        };
        reports.push(r);
    }
    let gap = (reports.len() == 2).then(|| reports[1].value / reports[0].value - 1.0);
    ctx.write_json(
        "energy.json",
        ctx.seed.unwrap_or(0),
        &json!({ "reports": reports, "relative_gap": gap }),
    )?;
    for r in &reports {
        println!("{:?} {}", r.method, r.value);
    }
    Ok(())
}

pub fn sumset(ctx: &Context) -> Outcome {
    let cfg: SumsetConfig = ctx.parse()?;
    let r = ctx.shape(&cfg.r).context("set r")?;
    let y = ctx.shape(&cfg.y).context("set y")?;
    let z = ctx.shape(&cfg.z).context("set z")?;
    let report = theorem_pipeline(&r, &y, &z, cfg.d, &cfg.pipeline)?;
    ctx.write_json("sumset.json", ctx.seed.unwrap_or(0), &json!({ "report": report }))?;
    println!("verdict {}", serde_json::to_string(&report.verdict).unwrap_or_default());
    Ok(())
}

pub fn verify(ctx: &Context) -> Outcome {
    let cfg: MeasureConfig = ctx.parse()?;
    let cm = ctx.load_measure(&cfg.measure)?;
    let rep = verify_measure(&cm)?;
    ctx.write_json("verify.json", cm.params().seed, &rep)?;
    println!("{} levels, {} violations", rep.levels.len(), rep.violations);
    if rep.violations > 0 {
        return Err(Failure::Construction(anyhow!("{} certificate violations", rep.violations)));
    }
    Ok(())
}

pub fn export(ctx: &Context) -> Outcome {
    let cfg: ExportConfig = ctx.parse()?;
    let cm = ctx.load_measure(&cfg.measure)?;
    let level = cfg.level.unwrap_or(cm.depth());
    let g = level_measure(&cm, level)?;
    match cfg.format {
        ExportFormat::Csv => {
            let w = g.cell_width();
            let mass = 1.0 / g.count() as f64;
            let mut csv = String::from("lo,hi,mass\n");
            for a in g.endpoints() {
                csv += &format!("{},{},{}\n", g17(a), g17(a + w), g17(mass));
            }
            ctx.write(&format!("level_{level}.csv"), &csv)?;
        }
        ExportFormat::Json => {
            let atoms: AtomMeasure<f64> = g.discretize();
            ctx.write_json(
                &format!("level_{level}.json"),
                cm.params().seed,
                &json!({ "level": level, "grid": g, "midpoint_atoms": atoms }),
            )?;
        }
    }
    Ok(())
}
