//! The four experiment commands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use hyperdisp_core::bounds::{exponential_fit, power_law_fit, NormReport};
use hyperdisp_core::cotlar::{
    cotlar_stein_bound, offdiagonal_decay_fit, separation_pairs, wkb_kernel, BlockFamily, DecayExponent,
};
use hyperdisp_core::fio::FioChain;
use hyperdisp_core::grid::{l2_norm, plane_wave, Wavefunction};
use hyperdisp_core::wkb::wkb_ansatz;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Point};
use crate::output::{
    plot_rows, write_cotlar, write_fits, write_plot, write_results, write_wavefunction_bin, write_wavefunction_csv,
    CotlarRow, FitRow, ResultRow,
};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Propagate,
    Norm,
    Cotlar,
    Sweep,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
    /// Fill the `wall_ms` column. Off by default so that reruns are
    /// byte-identical.
    pub timing: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Outputs {
    pub results: Vec<ResultRow>,
    pub cotlar: Vec<CotlarRow>,
    pub fits: Vec<FitRow>,
    /// Leading-order ansatz per `(scenario, ℏ, n)`, when requested.
    pub wavefunctions: Vec<(String, f64, usize, Wavefunction)>,
}

impl Outputs {
    /// Rows whose power iteration stopped at `max_iter`.
    pub fn non_converged(&self) -> usize {
        self.results.iter().filter(|r| r.converged == Some(false)).count()
    }
}

fn numerical(p: &Point, e: hyperdisp_core::Error) -> CliError {
    CliError::Numerical(format!("{} at hbar = {}: {e}", p.scenario.name, p.scenario.grid.hbar()))
}

/// Relative residual of the leading-order ansatz at every requested length,
/// applying each step once.
fn residuals(p: &Point, keep_waves: bool) -> Result<Vec<(usize, f64, Option<Wavefunction>)>, CliError> {
    let s = &p.scenario;
    let n_max = *p.lengths.iter().max().expect("lengths are nonempty");
    let ops = FioChain::build(&s.chain, &s.symbols, s.grid, n_max).map_err(|e| numerical(p, e))?;
    let mut w = plane_wave(s.grid, &p.xi0).map_err(|e| numerical(p, e))?;
    let mut out = Vec::new();
    for (j, op) in ops.operators().iter().enumerate() {
        w = op.apply(&w).map_err(|e| numerical(p, e))?;
        let n = j + 1;
        if !p.lengths.contains(&n) {
            continue;
        }
        let ansatz = wkb_ansatz(&s.chain, &s.symbols, &p.xi0, n, s.grid).map_err(|e| numerical(p, e))?;
        let norm = l2_norm(&ansatz);
        if !(norm > 0.0) {
            return Err(CliError::Numerical(format!(
                "{} at hbar = {}: the orbit of xi0 leaves the symbol supports by n = {n}",
                s.name,
                s.grid.hbar()
            )));
        }
        let diff = w.difference(&ansatz).map_err(|e| numerical(p, e))?;
        out.push((n, l2_norm(&diff) / norm, keep_waves.then_some(ansatz)));
    }
    Ok(out)
}

fn norm_rows(cfg: &ExperimentConfig, p: &Point, timing: bool) -> Result<Vec<ResultRow>, CliError> {
    let start = Instant::now();
    let reports = p
        .scenario
        .norm_reports(&p.lengths, cfg.method()?, cfg.power_settings(), cfg.norm.samples)
        .map_err(|e| numerical(p, e))?;
    let wall_ms = timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    Ok(reports.iter().map(|r| report_row(r, wall_ms)).collect())
}

fn report_row(r: &NormReport, wall_ms: Option<f64>) -> ResultRow {
    ResultRow {
        scenario: r.scenario.clone(),
        hbar: r.hbar,
        n: r.n,
        measured_norm: Some(r.measured_norm),
        trivial_bound: Some(r.trivial_bound),
        thm2_bound: Some(r.thm2_bound),
        thm3_bound: r.thm3_bound,
        wkb_residual_rel: None,
        converged: Some(r.converged),
        wall_ms,
    }
}

fn cotlar_rows(cfg: &ExperimentConfig, p: &Point) -> Result<(Vec<CotlarRow>, Vec<FitRow>), CliError> {
    let s = &p.scenario;
    if s.block_rank.is_none() {
        return Ok((Vec::new(), Vec::new()));
    }
    let n = cfg.cotlar.n;
    let hbar = s.grid.hbar();
    let kernel = wkb_kernel(&s.chain, &s.symbols, s.grid, n).map_err(|e| numerical(p, e))?;
    let family = BlockFamily::build(&kernel).map_err(|e| numerical(p, e))?;
    let cs = cotlar_stein_bound(&family.operators()).map_err(|e| numerical(p, e))?;
    let norm = family.parent.spectral_norm();
    let mut rows = Vec::new();
    for (a, ba) in family.blocks.iter().enumerate() {
        for (b, bb) in family.blocks.iter().enumerate() {
            rows.push(CotlarRow {
                scenario: s.name.clone(),
                hbar,
                n,
                l: ba.index.clone(),
                m: bb.index.clone(),
                star_left: cs.star_left(b, a),
                star_right: cs.star_right(a, b),
                cotlar_bound: cs.bound,
                norm,
            });
        }
    }
    let fit = |quantity: &str, value: f64, intercept: Option<f64>, r_squared: Option<f64>, points: usize| FitRow {
        scenario: s.name.clone(),
        hbar: Some(hbar),
        quantity: quantity.into(),
        value,
        intercept,
        r_squared,
        points,
    };
    let mut fits = vec![fit(
        "block_reconstruction_error",
        family.reconstruction_error().map_err(|e| numerical(p, e))?,
        None,
        None,
        family.blocks.len(),
    )];
    // too few separations for a fit is not an error for the run
    if let Ok(decay) = offdiagonal_decay_fit(&separation_pairs(&family, &cs)) {
        fits.push(match decay {
            DecayExponent::Infinite => fit("offdiagonal_decay_exponent", f64::INFINITY, None, None, 0),
            DecayExponent::Finite {
                exponent,
                r_squared,
                separations,
            } => fit("offdiagonal_decay_exponent", exponent, None, Some(r_squared), separations),
        });
    }
    Ok((rows, fits))
}

/// Exponential rate of `measured_norm` in `n` over the rows where the
/// dispersion bound is well below the trivial one.
fn decay_fit(rows: &[ResultRow]) -> Option<FitRow> {
    let first = rows.first()?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| matches!((r.thm2_bound, r.trivial_bound), (Some(t2), Some(t)) if t2 < 0.5 * t))
        .filter_map(|r| r.measured_norm.map(|m| (r.n as f64, m)))
        .collect();
    let fit = exponential_fit(&points).ok()?;
    Some(FitRow {
        scenario: first.scenario.clone(),
        hbar: Some(first.hbar),
        quantity: "measured_norm_decay_rate".into(),
        value: fit.slope,
        intercept: Some(fit.intercept),
        r_squared: Some(fit.r_squared),
        points: fit.points,
    })
}

/// Order of the residual in ℏ at each `n` present for at least three ℏ.
fn residual_order_fits(rows: &[ResultRow]) -> Vec<FitRow> {
    let mut keys: Vec<(String, usize)> = rows
        .iter()
        .filter(|r| r.wkb_residual_rel.is_some())
        .map(|r| (r.scenario.clone(), r.n))
        .collect();
    keys.sort();
    keys.dedup();
    let mut out = Vec::new();
    for (scenario, n) in keys {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.scenario == scenario && r.n == n)
            .filter_map(|r| r.wkb_residual_rel.map(|v| (r.hbar, v)))
            .collect();
        if points.len() < 3 {
            continue;
        }
        if let Ok(fit) = power_law_fit(&points) {
            out.push(FitRow {
                scenario,
                hbar: None,
                quantity: format!("wkb_residual_hbar_order_n{n}"),
                value: fit.slope,
                intercept: Some(fit.intercept),
                r_squared: Some(fit.r_squared),
                points: fit.points,
            });
        }
    }
    out
}

#[derive(Default)]
struct PointOutput {
    results: Vec<ResultRow>,
    cotlar: Vec<CotlarRow>,
    fits: Vec<FitRow>,
    waves: Vec<(String, f64, usize, Wavefunction)>,
}

fn compute_point(cfg: &ExperimentConfig, p: &Point, command: Command, timing: bool) -> Result<PointOutput, CliError> {
    let mut out = PointOutput::default();
    let name = &p.scenario.name;
    let hbar = p.scenario.grid.hbar();
    if matches!(command, Command::Norm | Command::Sweep) {
        out.results = norm_rows(cfg, p, timing)?;
        out.fits.extend(decay_fit(&out.results));
    }
    if matches!(command, Command::Propagate | Command::Sweep) {
        let start = Instant::now();
        let res = residuals(p, cfg.output.wavefunctions)?;
        let wall_ms = timing.then(|| start.elapsed().as_secs_f64() * 1e3);
        for (n, rel, wave) in res {
            match out.results.iter_mut().find(|r| r.n == n) {
                Some(row) => row.wkb_residual_rel = Some(rel),
                None => out.results.push(ResultRow {
                    scenario: name.clone(),
                    hbar,
                    n,
                    wkb_residual_rel: Some(rel),
                    wall_ms,
                    ..ResultRow::default()
                }),
            }
            if let Some(w) = wave {
                out.waves.push((name.clone(), hbar, n, w));
            }
        }
    }
    if matches!(command, Command::Cotlar | Command::Sweep) {
        let (rows, fits) = cotlar_rows(cfg, p)?;
        out.cotlar = rows;
        out.fits.extend(fits);
    }
    Ok(out)
}

fn key_order(a: (&str, f64, usize), b: (&str, f64, usize)) -> std::cmp::Ordering {
    a.0.cmp(b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2))
}

/// Validates the configuration, then computes every point. Rows come back
/// sorted by (scenario, ℏ, n) whatever the thread count.
pub fn execute(cfg: &ExperimentConfig, command: Command, opts: RunOptions) -> Result<Outputs, CliError> {
    let points = cfg.points()?;
    let work = || -> Result<Vec<PointOutput>, CliError> {
        points.par_iter().map(|p| compute_point(cfg, p, command, opts.timing)).collect()
    };
    let parts = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let mut out = Outputs::default();
    for part in parts {
        out.results.extend(part.results);
        out.cotlar.extend(part.cotlar);
        out.fits.extend(part.fits);
        out.wavefunctions.extend(part.waves);
    }
    out.fits.extend(residual_order_fits(&out.results));
    out.results
        .sort_by(|a, b| key_order((&a.scenario, a.hbar, a.n), (&b.scenario, b.hbar, b.n)));
    out.cotlar.sort_by(|a, b| {
        key_order((&a.scenario, a.hbar, a.n), (&b.scenario, b.hbar, b.n))
            .then_with(|| a.l.cmp(&b.l))
            .then_with(|| a.m.cmp(&b.m))
    });
    out.fits.sort_by(|a, b| {
        a.scenario
            .cmp(&b.scenario)
            .then(a.hbar.unwrap_or(f64::INFINITY).total_cmp(&b.hbar.unwrap_or(f64::INFINITY)))
            .then_with(|| a.quantity.cmp(&b.quantity))
    });
    out.wavefunctions
        .sort_by(|a, b| key_order((&a.0, a.1, a.2), (&b.0, b.1, b.2)));
    Ok(out)
}

/// Writes the files a command produces into `dir` and returns their paths.
pub fn write_outputs(cfg: &ExperimentConfig, command: Command, out: &Outputs, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let o = &cfg.output;
    let mut files = Vec::new();
    if command != Command::Cotlar {
        let path = dir.join(&o.results);
        write_results(&path, &out.results)?;
        files.push(path);
        let path = dir.join(&o.plot);
        write_plot(&path, &plot_rows(&out.results))?;
        files.push(path);
    }
    if matches!(command, Command::Cotlar | Command::Sweep) {
        let path = dir.join(&o.cotlar);
        write_cotlar(&path, &out.cotlar)?;
        files.push(path);
    }
    let path = dir.join(&o.fits);
    write_fits(&path, &out.fits)?;
    files.push(path);
    for (name, hbar, n, w) in &out.wavefunctions {
        let stem = format!("wave_{name}_hbar{hbar}_n{n}");
        for (ext, csv) in [("csv", true), ("bin", false)] {
            let path = dir.join(format!("{stem}.{ext}"));
            if csv {
                write_wavefunction_csv(&path, w)?;
            } else {
                write_wavefunction_bin(&path, w)?;
            }
            files.push(path);
        }
    }
    Ok(files)
}
