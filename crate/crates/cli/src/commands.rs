//! The seven subcommands. Each returns its artifacts without touching disk.

use std::fmt::Write as _;
use std::io::Write;

use clap::ValueEnum;
use dimer_core::assembly::{assemble_full_system, assemble_reduced_system, Moments};
use dimer_core::effective::{
    effective_tensors, local_fields, number_density, polarizability_for, predicted_exponents, scaling_sweep,
    susceptibilities, SlopeFit,
};
use dimer_core::fields::{far_field_grid, reduced_far_field_grid, scattering_cross_section, FarFieldPattern};
use dimer_core::geometry::{
    make_lattice_cluster, make_random_cluster, validate_geometry, ClusterGeometry, RandomClusterOptions,
};
use dimer_core::kernels::{Mat3C, Vec3R};
use dimer_core::materials::{check_invertibility, check_regime, h_upper, invertibility_bounds, ModelParams, RegimeReport};
use dimer_core::solver::{solve, SolveReport};
use serde::Serialize;
use serde_json::json;

use crate::config::{GeometryKind, RunConfig};
use crate::{Artifacts, CliError};

/// Relative tolerance for the geometry validation report.
const GEOMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Geometry,
    Check,
    Solve,
    Farfield,
    Reduced,
    Effective,
    Sweep,
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Artifacts, CliError> {
    match cmd {
        Command::Geometry => geometry(cfg),
        Command::Check => check(cfg),
        Command::Solve => solve_full(cfg),
        Command::Farfield => farfield(cfg),
        Command::Reduced => reduced(cfg),
        Command::Effective => effective(cfg),
        Command::Sweep => sweep(cfg),
    }
}

pub fn build_geometry(cfg: &RunConfig) -> Result<ClusterGeometry, CliError> {
    let g = &cfg.geometry;
    let s = cfg.model.params().scaling();
    Ok(match g.kind {
        GeometryKind::Lattice => make_lattice_cluster(&s, &g.axis().unwrap_or_else(Vec3R::z), g.count_override)?,
        GeometryKind::Random => {
            let opts = RandomClusterOptions {
                seed: g.seed,
                max_attempts: g.max_attempts,
                orientation: g.axis(),
                count_override: g.count_override,
            };
            make_random_cluster(&s, &opts)?
        }
        GeometryKind::File => {
            let path = g.path.as_ref().expect("validated at parse time");
            let file = std::fs::File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            ClusterGeometry::read_csv(file)?
        }
    })
}

fn geometry(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let hash = cfg.hash();
    let g = build_geometry(cfg)?;
    let report = validate_geometry(&g, &cfg.model.params().scaling(), GEOMETRY_TOL);
    let mut out = Artifacts::default();
    let mut body = Vec::new();
    g.write_csv(&mut body)?;
    out.csv("geometry.csv", &hash, body);
    out.json("geometry.json", &json!({ "config_hash": hash, "validation": report }));
    out.summary = format!("{} dimers, validation {}", g.len(), if report.all_ok { "ok" } else { "failed" });
    Ok(out)
}

fn axis_or(values: &[f64], fallback: f64) -> Vec<f64> {
    if values.is_empty() {
        vec![fallback]
    } else {
        values.to_vec()
    }
}

/// Grid points in row order: `h` outermost, then `t1`, `t2`, `k`.
pub fn check_grid(cfg: &RunConfig) -> Vec<ModelParams> {
    let base = cfg.model.params();
    let c = &cfg.check;
    let mut points = Vec::new();
    for &h in &axis_or(&c.h, base.h) {
        for &t1 in &axis_or(&c.t1, base.t1) {
            for &t2 in &axis_or(&c.t2, base.t2) {
                for &k in &axis_or(&c.k, base.k) {
                    points.push(ModelParams { h, t1, t2, k, ..base });
                }
            }
        }
    }
    points
}

fn check(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let hash = cfg.hash();
    let t = cfg.tensors.tensors();
    let mut body = String::from("h,t1,t2,k,exponents_ok,h_upper,window_ok,contrast,contrast_ok,l1,l1_ok,l2,l2_ok,all_ok\n");
    let mut passing = 0;
    let points = check_grid(cfg);
    for p in &points {
        let regime = check_regime(p);
        let inv = check_invertibility(p, &t);
        let (l1, l2) = invertibility_bounds(p, &t);
        let pass = |r: &RegimeReport, i: usize| r.conditions[i].pass;
        let all = regime.all_pass && inv.all_pass;
        passing += usize::from(all);
        writeln!(
            body,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.h,
            p.t1,
            p.t2,
            p.k,
            pass(&regime, 0),
            h_upper(p.t1),
            pass(&regime, 1),
            regime.conditions[2].value,
            pass(&regime, 2),
            l1,
            pass(&inv, 0),
            l2,
            pass(&inv, 1),
            all
        )
        .expect("writing to a String");
    }
    let p = cfg.model.params();
    let mut out = Artifacts::default();
    out.csv("check.csv", &hash, body.into_bytes());
    out.json(
        "check.json",
        &json!({
            "config_hash": hash,
            "grid_points": points.len(),
            "grid_all_ok": passing,
            "model": { "regime": check_regime(&p), "invertibility": check_invertibility(&p, &t) },
        }),
    );
    out.summary = format!("{passing} of {} grid points admissible", points.len());
    Ok(out)
}

fn moments_csv<const N: usize>(m: &Moments<N>, labels: &[&str]) -> Vec<u8> {
    let mut w = Vec::new();
    writeln!(w, "dimer,moment,re_x,im_x,re_y,im_y,re_z,im_z").unwrap();
    for d in 0..m.len() {
        for (s, label) in labels.iter().enumerate() {
            let v = m.slot(d, s);
            writeln!(w, "{d},{label},{},{},{},{},{},{}", v.x.re, v.x.im, v.y.re, v.y.im, v.z.re, v.z.im).unwrap();
        }
    }
    w
}

fn pattern_csv(p: &FarFieldPattern) -> Result<Vec<u8>, CliError> {
    let mut w = Vec::new();
    p.write_csv(&mut w)?;
    Ok(w)
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    config_hash: &'a str,
    dimers: usize,
    report: &'a SolveReport,
}

fn solved_full(cfg: &RunConfig) -> Result<(ClusterGeometry, dimer_core::assembly::FullMoments, SolveReport), CliError> {
    let g = build_geometry(cfg)?;
    let sys = assemble_full_system(&g, &cfg.model.params(), &cfg.tensors.tensors(), &cfg.incident_wave()?)?;
    let (m, report) = solve(&sys, &cfg.solver.options())?;
    Ok((g, m, report))
}

fn solve_full(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let hash = cfg.hash();
    let (g, m, report) = solved_full(cfg)?;
    let mut out = Artifacts::default();
    out.csv("moments.csv", &hash, moments_csv(&m, &["Q1", "R1", "Q2", "R2"]));
    out.json("solve.json", &SolveSummary { config_hash: &hash, dimers: g.len(), report: &report });
    out.summary = format!("{} unknowns, residual {:.3e}", report.unknowns, report.relative_residual);
    Ok(out)
}

fn farfield(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let hash = cfg.hash();
    let (g, m, report) = solved_full(cfg)?;
    let f = &cfg.farfield;
    let pattern = far_field_grid(&m, &g, cfg.model.k, f.convention, f.n_theta, f.n_phi)?;
    let sigma = scattering_cross_section(&pattern);
    let mut out = Artifacts::default();
    out.csv("farfield.csv", &hash, pattern_csv(&pattern)?);
    out.json(
        "farfield.json",
        &json!({ "config_hash": hash, "convention": f.convention, "cross_section": sigma, "solve": report }),
    );
    out.summary = format!("cross section {sigma:.6e}");
    Ok(out)
}

fn reduced(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let hash = cfg.hash();
    let g = build_geometry(cfg)?;
    let sys = assemble_reduced_system(&g, &cfg.model.params(), &cfg.tensors.tensors(), &cfg.incident_wave()?)?;
    let (m, report) = solve(&sys, &cfg.solver.options())?;
    let fields = Moments::new(local_fields(&m, &sys));
    let f = &cfg.farfield;
    let pattern = reduced_far_field_grid(&m, &g, cfg.model.k, f.convention, f.n_theta, f.n_phi)?;
    let sigma = scattering_cross_section(&pattern);
    let mut out = Artifacts::default();
    out.csv("reduced_moments.csv", &hash, moments_csv(&m, &["Q1", "R2"]));
    out.csv("local_fields.csv", &hash, moments_csv(&fields, &["H1", "E2"]));
    out.csv("reduced_farfield.csv", &hash, pattern_csv(&pattern)?);
    out.json(
        "reduced.json",
        &json!({ "config_hash": hash, "dimers": g.len(), "convention": f.convention, "cross_section": sigma, "solve": report }),
    );
    out.summary = format!("{} unknowns, cross section {sigma:.6e}", report.unknowns);
    Ok(out)
}

fn tensor_rows(w: &mut Vec<u8>, name: &str, m: &Mat3C) {
    for i in 0..3 {
        for j in 0..3 {
            writeln!(w, "{name},{i},{j},{},{}", m[(i, j)].re, m[(i, j)].im).unwrap();
        }
    }
}

fn effective(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let hash = cfg.hash();
    let p = cfg.model.params();
    let axis = cfg.geometry.axis().unwrap_or_else(Vec3R::z);
    let pol = polarizability_for(&p, &cfg.tensors.tensors(), &axis, cfg.effective.path)?;
    let chi = susceptibilities(&pol, number_density(&p));
    let eff = effective_tensors(&chi, &p);
    let mut body = Vec::new();
    writeln!(body, "tensor,row,col,re,im").unwrap();
    for (name, m) in [
        ("eps_eff", &eff.eps_eff),
        ("mu_eff", &eff.mu_eff),
        ("xi", &eff.xi),
        ("zeta", &eff.zeta),
        ("chi_hh", &chi.chi_hh),
        ("chi_he", &chi.chi_he),
        ("chi_eh", &chi.chi_eh),
        ("chi_ee", &chi.chi_ee),
    ] {
        tensor_rows(&mut body, name, m);
    }
    let mut out = Artifacts::default();
    out.csv("effective.csv", &hash, body);
    out.json(
        "effective.json",
        &json!({
            "config_hash": hash,
            "path": cfg.effective.path,
            "rho": chi.rho,
            "min_re_eps": eff.min_re_eps,
            "min_re_mu": eff.min_re_mu,
            "eps_negative": eff.eps_negative(),
            "mu_negative": eff.mu_negative(),
            "double_negative": eff.double_negative(),
            "regime": check_regime(&p),
        }),
    );
    out.summary = format!("eps negative: {}, mu negative: {}", eff.eps_negative(), eff.mu_negative());
    Ok(out)
}

fn sweep(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let hash = cfg.hash();
    let p = cfg.model.params();
    let axis = cfg.geometry.axis().unwrap_or_else(Vec3R::z);
    let r = scaling_sweep(&p, &cfg.tensors.tensors(), &cfg.sweep.a_values, cfg.sweep.path, &axis)?;
    let (diag, off) = predicted_exponents(&p);
    let mut body = Vec::new();
    r.write_csv(&mut body)?;
    let fit = |f: &SlopeFit| json!({ "slope": f.slope, "intercept": f.intercept, "max_residual": f.max_residual });
    let mut out = Artifacts::default();
    out.csv("sweep.csv", &hash, body);
    out.json(
        "sweep.json",
        &json!({
            "config_hash": hash,
            "path": r.path,
            "predicted": { "diagonal": diag, "off_diagonal": off },
            "fits": { "hh": fit(&r.fit_hh), "he": fit(&r.fit_he), "eh": fit(&r.fit_eh), "ee": fit(&r.fit_ee) },
        }),
    );
    out.summary = format!("slopes hh {:.6} he {:.6} (predicted {diag:.6}, {off:.6})", r.fit_hh.slope, r.fit_he.slope);
    Ok(out)
}
