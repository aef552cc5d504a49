//! Report serialization: manifest JSON, full-precision CSVs, and the
//! per-mode file sets. Collisions never overwrite; a timestamp suffix
//! forks the filenames and the manifest records it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::config::{Mode, StudyConfig};
use crate::derive::derive_report;
use crate::field::random_smooth;
use crate::grid::SpectralGrid;
use crate::kernels::{default_times, kernel_decay_fit, Band, DecayFit};
use crate::nlkg::nlkg_evolve;
use crate::norms::sobolev_hk;
use crate::params::SimParams;
use crate::strichartz::{admissible_check, strichartz_probe, ExponentKind};
use crate::study::{run_convergence, RunReport};
use crate::thresholds::smallness_thresholds;
use crate::{LabError, Result};

/// Full-precision scientific rendering; refits from the CSV must not
/// lose bits.
fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

/// Resolves a set of output names against dir: if any target exists the
/// whole set gets one shared timestamp suffix so a rerun forks cleanly.
struct FileSet {
    dir: PathBuf,
    suffix: Option<String>,
}

impl FileSet {
    fn new(dir: &Path, names: &[&str]) -> Result<FileSet> {
        std::fs::create_dir_all(dir)?;
        let collide = names.iter().any(|n| dir.join(n).exists());
        let suffix = if collide {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            Some(format!("-{secs}"))
        } else {
            None
        };
        Ok(FileSet {
            dir: dir.to_path_buf(),
            suffix,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        match &self.suffix {
            None => self.dir.join(name),
            Some(sfx) => {
                let (stem, ext) = name.rsplit_once('.').unwrap_or((name, ""));
                if ext.is_empty() {
                    self.dir.join(format!("{stem}{sfx}"))
                } else {
                    self.dir.join(format!("{stem}{sfx}.{ext}"))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportOutcome {
    pub paths: Vec<PathBuf>,
    /// set when a solver abort left the report partial
    pub aborted: Option<String>,
}

#[derive(Serialize)]
struct ManifestDoc<'a> {
    collision_suffix: Option<&'a str>,
    report: &'a RunReport,
}

/// Writes manifest + per-c CSV + slope summary for a convergence run.
/// An empty record set writes the manifest alone.
pub fn emit_outputs(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let names = ["manifest.json", "convergence.csv", "slopes.csv"];
    let set = FileSet::new(dir, &names)?;
    let mut paths = Vec::new();

    let manifest = set.path("manifest.json");
    let doc = ManifestDoc {
        collision_suffix: set.suffix.as_deref(),
        report,
    };
    let json = serde_json::to_string_pretty(&doc)
        .map_err(|e| LabError::invalid(format!("manifest serialization: {e}")))?;
    write_file(&manifest, &json)?;
    paths.push(manifest);

    if report.records.is_empty() {
        return Ok(paths);
    }

    let mut csv = String::from("c,dt,T,sup_error_theorem,sup_error_transformed,energy_drift,wall_s\n");
    for r in &report.records {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            sci(r.c),
            sci(r.dt),
            sci(r.t_end),
            sci(r.sup_error_theorem),
            sci(r.sup_error_transformed),
            sci(r.energy_drift_wave),
            sci(r.wall_s)
        );
    }
    let cpath = set.path("convergence.csv");
    write_file(&cpath, &csv)?;
    paths.push(cpath);

    let mut slopes = String::from("series,points,slope_raw,intercept,slope_normalized,alpha\n");
    for (name, fit) in [("theorem", &report.theorem_fit), ("transformed", &report.transformed_fit)] {
        if let Some(f) = fit {
            let _ = writeln!(
                slopes,
                "{name},{},{},{},{},{}",
                f.points,
                sci(f.slope_raw),
                sci(f.intercept),
                sci(f.slope_normalized),
                sci(report.alpha)
            );
        }
    }
    let spath = set.path("slopes.csv");
    write_file(&spath, &slopes)?;
    paths.push(spath);
    Ok(paths)
}

/// Exact coefficient tables with decimal shadows, one value per line.
pub fn render_derive_text(l: u32) -> String {
    let rep = derive_report(l);
    let dec = |r: &num_rational::BigRational| -> String {
        r.to_f64().map(|v| format!("{v:.12}")).unwrap_or_else(|| "?".into())
    };
    let mut out = String::new();
    let _ = write!(out, "{rep}");
    let _ = writeln!(out, "\ndecimal shadows:");
    let _ = writeln!(out, "  f1_scale = {} ~= {}", rep.f1_scale, dec(&rep.f1_scale));
    let _ = writeln!(out, "  f1_avg = {} ~= {}", rep.f1_avg, dec(&rep.f1_avg));
    let _ = writeln!(out, "  bracket_avg = {} ~= {}", rep.bracket_avg, dec(&rep.bracket_avg));
    let _ = writeln!(out, "  combined = {} ~= {}", rep.combined, dec(&rep.combined));
    let _ = writeln!(out, "  reference_k = {} ~= {}", rep.reference_k, dec(&rep.reference_k));
    let _ = writeln!(out, "  g1 = {} ~= {}", rep.g1, dec(&rep.g1));
    let _ = writeln!(out, "  g2 = {} ~= {}", rep.g2, dec(&rep.g2));
    let _ = writeln!(out, "  beta = {} ~= {}", rep.beta, dec(&rep.beta));
    for (j, a) in rep.dispersion.iter().enumerate() {
        let _ = writeln!(out, "  a{} = {} ~= {}", j + 1, a, dec(a));
    }
    out
}

fn band_name(b: Band) -> &'static str {
    match b {
        Band::Low => "low",
        Band::Medium => "medium",
        Band::High => "high",
    }
}

fn emit_dispersion(cfg: &StudyConfig) -> Result<Vec<PathBuf>> {
    let c = *cfg.c_list.last().unwrap();
    let bands: &[Band] = if cfg.r == 1 {
        &[Band::Low]
    } else {
        &[Band::Low, Band::Medium, Band::High]
    };
    let mut names: Vec<String> = bands
        .iter()
        .map(|b| format!("dispersion_{}.csv", band_name(*b)))
        .collect();
    names.push("dispersion_summary.csv".into());
    names.push("dispersion_fits.json".into());
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let set = FileSet::new(&cfg.output_dir, &name_refs)?;

    let mut fits: Vec<DecayFit> = Vec::new();
    for &band in bands {
        let times = default_times(cfg.r, c, band)?;
        fits.push(kernel_decay_fit(cfg.r, c, band, cfg.d, &times)?);
    }

    let mut paths = Vec::new();
    for fit in &fits {
        let mut csv = String::from("t,sup_value\n");
        for (t, s) in fit.times.iter().zip(fit.sup_values.iter()) {
            let _ = writeln!(csv, "{},{}", sci(*t), sci(*s));
        }
        let p = set.path(&format!("dispersion_{}.csv", band_name(fit.band)));
        write_file(&p, &csv)?;
        paths.push(p);
    }
    let mut summary = String::from("band,fitted_exponent,predicted_exponent,fit_quality\n");
    for fit in &fits {
        let _ = writeln!(
            summary,
            "{},{},{},{}",
            band_name(fit.band),
            sci(fit.fitted_exponent),
            sci(fit.predicted_exponent),
            sci(fit.fit_quality)
        );
    }
    let sp = set.path("dispersion_summary.csv");
    write_file(&sp, &summary)?;
    paths.push(sp);
    let jp = set.path("dispersion_fits.json");
    let json = serde_json::to_string_pretty(&fits)
        .map_err(|e| LabError::invalid(format!("fit serialization: {e}")))?;
    write_file(&jp, &json)?;
    paths.push(jp);
    Ok(paths)
}

fn fmt_exp(e: f64) -> String {
    if e.is_infinite() {
        "inf".into()
    } else {
        format!("{e}")
    }
}

/// The pairs the ratio table covers by default: the energy pair, which
/// must come out flat in c, and the diagonal pair in d = 2.
fn default_pairs(d: usize) -> Vec<(f64, f64)> {
    if d == 2 {
        vec![(f64::INFINITY, 2.0), (4.0, 4.0)]
    } else {
        vec![(f64::INFINITY, 2.0)]
    }
}

fn emit_strichartz(cfg: &StudyConfig, pair: Option<(f64, f64)>) -> Result<Vec<PathBuf>> {
    let names = ["strichartz_ratios.csv", "admissibility.csv"];
    let set = FileSet::new(&cfg.output_dir, &names)?;
    let grid = SpectralGrid::new(cfg.d, cfg.n, cfg.box_len)?;
    let psi0 = random_smooth(&grid, cfg.seed, 1.0);
    let pairs = match pair {
        Some(pq) => vec![pq],
        None => default_pairs(cfg.d),
    };

    let mut csv = String::from("p,q,c,lhs,rhs,ratio\n");
    for (p, q) in pairs {
        let table = strichartz_probe(p, q, &cfg.c_list, &psi0, cfg.t_fixed)?;
        for row in &table.rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                fmt_exp(p),
                fmt_exp(q),
                sci(row.c),
                sci(row.lhs),
                sci(row.rhs),
                sci(row.ratio)
            );
        }
    }
    let rp = set.path("strichartz_ratios.csv");
    write_file(&rp, &csv)?;

    let inf = f64::INFINITY;
    let checks: Vec<(ExponentKind, f64, f64, usize, usize)> = vec![
        (ExponentKind::Schrodinger, inf, 2.0, cfg.d, 1),
        (ExponentKind::Schrodinger, 2.0, inf, 2, 1),
        (ExponentKind::Schrodinger, 4.0, 4.0, 2, 1),
        (ExponentKind::Schrodinger, 2.0, 6.0, 3, 1),
        (ExponentKind::OrderR, 4.0, inf, 2, 2),
        (ExponentKind::Quadrilateral, 2.0, 2.0, 2, 2),
        (ExponentKind::Quadrilateral, 1.0, 3.0, 2, 2),
        (ExponentKind::Quadrilateral, 1.5, inf, 2, 2),
        (ExponentKind::Quadrilateral, 1.0, inf, 2, 2),
        (ExponentKind::Quadrilateral, 4.0 / 3.0, 4.0, 2, 2),
    ];
    let mut adm = String::from("kind,p,q,d,r,admissible,reason\n");
    for (kind, p, q, d, r) in checks {
        let a = admissible_check(p, q, d, r, kind)?;
        let kname = match kind {
            ExponentKind::Schrodinger => "schrodinger",
            ExponentKind::OrderR => "order_r",
            ExponentKind::Quadrilateral => "quadrilateral",
        };
        let _ = writeln!(
            adm,
            "{kname},{},{},{d},{r},{},\"{}\"",
            fmt_exp(p),
            fmt_exp(q),
            a.admissible,
            a.reason
        );
    }
    let ap = set.path("admissibility.csv");
    write_file(&ap, &adm)?;
    Ok(vec![rp, ap])
}

#[derive(Serialize)]
struct EvolveManifest {
    c: f64,
    lambda: f64,
    l: u32,
    r: usize,
    dt: f64,
    t_end: f64,
    n: usize,
    box_len: f64,
    sobolev_k: f64,
    seed: u64,
    datum_hk: f64,
    times: Vec<f64>,
    energy: Vec<f64>,
    l2: Vec<f64>,
    final_l2: f64,
    final_hk: f64,
    final_max_abs: f64,
    energy_drift: f64,
    truncated: bool,
}

fn emit_evolve(cfg: &StudyConfig) -> Result<Vec<PathBuf>> {
    let c = cfg.c_list[0];
    let grid = SpectralGrid::new(cfg.d, cfg.n, cfg.box_len)?;
    let alpha = cfg.alpha.unwrap_or_else(|| {
        smallness_thresholds(cfg.d, cfg.l as usize, cfg.r)
            .map(|s| s.alpha_min + 0.25)
            .unwrap_or(0.25)
    });
    let mut datum = random_smooth(&grid, cfg.seed, 4.0);
    let target = cfg.amplitude * c.powf(-alpha);
    let hk = sobolev_hk(&datum, cfg.sobolev_k);
    datum.scale(num_complex::Complex64::new(target / hk, 0.0));

    let dt = cfg.dt0 / (c * c);
    let t_end = cfg.horizon(c);
    let params = SimParams::new(c, cfg.lambda, cfg.l, cfg.r, grid).with_time(dt, t_end).with_sobolev(cfg.sobolev_k);
    let n_steps = params.n_steps();
    let stride = ((n_steps + 63) / 64).max(1) as usize;
    let traj = nlkg_evolve(&datum, &params, stride, Some(cfg.step_budget))?;

    let mut names: Vec<String> = vec!["evolve_manifest.json".into()];
    if cfg.snapshots {
        for i in 0..traj.fields.len() {
            names.push(format!("snapshot_{i:03}.csv"));
        }
    }
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let set = FileSet::new(&cfg.output_dir, &name_refs)?;

    let manifest = EvolveManifest {
        c,
        lambda: cfg.lambda,
        l: cfg.l,
        r: cfg.r,
        dt,
        t_end: traj.final_time(),
        n: cfg.n,
        box_len: cfg.box_len,
        sobolev_k: cfg.sobolev_k,
        seed: cfg.seed,
        datum_hk: target,
        times: traj.times.clone(),
        energy: traj.energy.clone(),
        l2: traj.l2.clone(),
        final_l2: *traj.l2.last().unwrap(),
        final_hk: sobolev_hk(traj.final_field(), cfg.sobolev_k),
        final_max_abs: {
            let mut f = traj.final_field().clone();
            f.to_physical();
            f.max_abs()
        },
        energy_drift: traj.energy_drift(),
        truncated: traj.truncated,
    };
    let mp = set.path("evolve_manifest.json");
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| LabError::invalid(format!("manifest serialization: {e}")))?;
    write_file(&mp, &json)?;
    let mut paths = vec![mp];

    if cfg.snapshots {
        for (i, f) in traj.fields.iter().enumerate() {
            let mut phys = f.clone();
            phys.to_physical();
            let mut csv = String::from("re,im\n");
            for v in phys.data() {
                let _ = writeln!(csv, "{},{}", sci(v.re), sci(v.im));
            }
            let p = set.path(&format!("snapshot_{i:03}.csv"));
            write_file(&p, &csv)?;
            paths.push(p);
        }
    }
    Ok(paths)
}

/// Runs the configured mode end to end and writes its file set.
pub fn run_reports(cfg: &StudyConfig) -> Result<ReportOutcome> {
    cfg.validate()?;
    match cfg.mode {
        Mode::Converge => {
            let report = run_convergence(cfg)?;
            let paths = emit_outputs(&report, &cfg.output_dir)?;
            Ok(ReportOutcome {
                paths,
                aborted: report.aborted,
            })
        }
        Mode::Derive => {
            let name = format!("derive_l{}.txt", cfg.l);
            let set = FileSet::new(&cfg.output_dir, &[name.as_str()])?;
            let p = set.path(&name);
            write_file(&p, &render_derive_text(cfg.l))?;
            Ok(ReportOutcome {
                paths: vec![p],
                aborted: None,
            })
        }
        Mode::Dispersion => Ok(ReportOutcome {
            paths: emit_dispersion(cfg)?,
            aborted: None,
        }),
        Mode::Strichartz => Ok(ReportOutcome {
            paths: emit_strichartz(cfg, None)?,
            aborted: None,
        }),
        Mode::Evolve => Ok(ReportOutcome {
            paths: emit_evolve(cfg)?,
            aborted: None,
        }),
    }
}

/// Strichartz mode with an explicit exponent pair from the CLI.
pub fn run_strichartz_pair(cfg: &StudyConfig, p: f64, q: f64) -> Result<ReportOutcome> {
    cfg.validate()?;
    Ok(ReportOutcome {
        paths: emit_strichartz(cfg, Some((p, q)))?,
        aborted: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::study::run_convergence_sequential;

    fn tmpdir(tag: &str) -> PathBuf {
        let p = std::env::temp_dir().join(format!("nonrel-out-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&p);
        p
    }

    fn tiny_cfg(mode: Mode, dir: &Path) -> StudyConfig {
        let mut cfg = StudyConfig::new(mode);
        cfg.n = 16;
        cfg.c_list = vec![2.0, 4.0];
        cfg.dt0 = 0.05;
        cfg.t_fixed = 0.05;
        cfg.output_dir = dir.to_path_buf();
        cfg
    }

    #[test]
    fn convergence_outputs_have_header_rows_and_fork_on_rerun() {
        let dir = tmpdir("conv");
        let cfg = tiny_cfg(Mode::Converge, &dir);
        let report = run_convergence_sequential(&cfg).unwrap();
        let paths = emit_outputs(&report, &dir).unwrap();
        assert_eq!(paths.len(), 3);
        let csv = std::fs::read_to_string(&paths[1]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 2);
        assert!(lines[0].starts_with("c,dt,T,sup_error_theorem"));
        let again = emit_outputs(&report, &dir).unwrap();
        assert_ne!(paths[0], again[0], "rerun must fork, not overwrite");
        assert!(again[0].to_string_lossy().contains("manifest-"));
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn empty_report_writes_manifest_only() {
        let dir = tmpdir("empty");
        let mut cfg = tiny_cfg(Mode::Converge, &dir);
        cfg.c_list = vec![2.0];
        let mut report = run_convergence_sequential(&cfg).unwrap();
        report.records.clear();
        report.theorem_fit = None;
        report.transformed_fit = None;
        let paths = emit_outputs(&report, &dir).unwrap();
        assert_eq!(paths.len(), 1);
        assert!(paths[0].file_name().unwrap().to_string_lossy().contains("manifest"));
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn derive_text_carries_exact_and_decimal_forms() {
        let text = render_derive_text(2);
        assert!(text.contains("-17/64"), "{text}");
        assert!(text.contains("-0.265625"), "{text}");
        assert!(text.contains("3/4"), "{text}");
        let dir = tmpdir("derive");
        let mut cfg = tiny_cfg(Mode::Derive, &dir);
        cfg.l = 2;
        let out1 = run_reports(&cfg).unwrap();
        let b1 = std::fs::read(&out1.paths[0]).unwrap();
        let text2 = render_derive_text(2);
        assert_eq!(b1, text2.as_bytes(), "derive report must be bit-identical");
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn strichartz_files_list_ratios_and_named_rejections() {
        let dir = tmpdir("stri");
        let mut cfg = tiny_cfg(Mode::Strichartz, &dir);
        cfg.n = 32;
        cfg.c_list = vec![1.0, 2.0];
        let out = run_reports(&cfg).unwrap();
        let ratios = std::fs::read_to_string(&out.paths[0]).unwrap();
        assert!(ratios.lines().count() >= 1 + 4, "{ratios}");
        assert!(ratios.starts_with("p,q,c,lhs,rhs,ratio"));
        let adm = std::fs::read_to_string(&out.paths[1]).unwrap();
        assert!(adm.contains("(2, inf, 2)"), "{adm}");
        assert!(adm.contains("corner (2, 2)"), "{adm}");
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn evolve_writes_manifest_and_optional_snapshots() {
        let dir = tmpdir("evolve");
        let mut cfg = tiny_cfg(Mode::Evolve, &dir);
        cfg.snapshots = true;
        let out = run_reports(&cfg).unwrap();
        assert!(out.paths.len() > 1);
        let manifest = std::fs::read_to_string(&out.paths[0]).unwrap();
        assert!(manifest.contains("energy_drift"), "{manifest}");
        let snap = std::fs::read_to_string(&out.paths[1]).unwrap();
        assert!(snap.starts_with("re,im\n"));
        assert_eq!(snap.lines().count(), 1 + 16 * 16);
        let _ = std::fs::remove_dir_all(&dir);
    }
}
