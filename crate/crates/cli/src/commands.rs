//! One function per subcommand. Each returns whether its checks passed.

use crate::config::{Config, ConfigError};
use crate::csv::{num, CsvWriter};
use anyhow::Result;
use foliated_core::fields::BasicFourier;
use foliated_core::flow::{flow_deterministic, flow_stochastic};
use foliated_core::invariant::{
    basic_harmonic_residual, carriere_moment_check, closed_form_log_density, dilate_metric, kappa_dilated,
    kappa_dilated_crosscheck, solve_invariant_density, standard_moment_functions,
};
use foliated_core::semigroup::{estimate_semigroup_fn, estimate_semigroup_oneform};
use foliated_core::suite::{run_group, SuiteOptions, GROUPS};
use foliated_core::{
    sample_brownian, AdaptedFrame, Atlas, AtlasKind, BasicOneForm, ChartPoint, DilationSpec, FourierSeries,
    IntegratorConfig, McConfig, ScalarField, SemigroupMode, Vec3,
};
use std::f64::consts::PI;
use std::path::Path;

fn default_dt(k: u32) -> f64 {
    1e-3_f64.min((-(k as f64)).exp2())
}

fn level(cfg: &Config) -> Result<u32, ConfigError> {
    let k: u32 = cfg.positive("k", 8)?;
    if k > 24 {
        return Err(ConfigError("`k` must be at most 24".into()));
    }
    Ok(k)
}

fn point_label(z: &ChartPoint, n: usize) -> String {
    (0..n).map(|i| num(z.coords[i])).collect::<Vec<_>>().join(";")
}

fn say(path: &Path) {
    println!("wrote {}", path.display());
}

pub fn flow(cfg: &Config, out: &Path) -> Result<bool> {
    let atlas = cfg.atlas()?;
    let n = atlas.n();
    let z = cfg.point(&atlas)?;
    let k = level(cfg)?;
    let icfg = IntegratorConfig {
        dt: cfg.positive("dt", default_dt(k))?,
        k,
        stride: cfg.positive("stride", 1usize)?,
        reorthonormalize: cfg.boolean("reorthonormalize", true)?,
        wrap: cfg.boolean("wrap", false)?,
    };
    let horizon: f64 = cfg.positive("T", 1.0)?;
    let r0 = AdaptedFrame::coordinate(&atlas, z);
    let traj = match cfg.value("driver", "stochastic".to_string())?.as_str() {
        "deterministic" => {
            let c: Vec<f64> = cfg.list("c", Vec::new())?;
            if c.len() != n {
                return Err(ConfigError(format!("`c`: expected {n} components, got {}", c.len())).into());
            }
            let mut v = Vec3::zeros();
            v.as_mut_slice()[..n].copy_from_slice(&c);
            flow_deterministic(&atlas, &r0, &v, horizon, &icfg)?
        }
        "stochastic" => {
            if cfg.get("c").is_some() {
                return Err(ConfigError("`c` applies only to driver = deterministic".into()).into());
            }
            let dim = match cfg.value("mode", "full".to_string())?.as_str() {
                "full" => n,
                "transverse" => atlas.dims().q,
                other => return Err(ConfigError(format!("`mode`: expected transverse or full, got `{other}`")).into()),
            };
            let path = sample_brownian(dim, k, horizon, cfg.seed, cfg.value("path_index", 0u64)?)?;
            flow_stochastic(&atlas, &r0, &path, &icfg)?
        }
        other => {
            return Err(ConfigError(format!("`driver`: expected deterministic or stochastic, got `{other}`")).into())
        }
    };

    let mut header = vec!["time".to_string()];
    header.extend((0..n).map(|i| format!("z{i}")));
    for i in 0..n {
        header.extend((0..n).map(|j| format!("e{i}{j}")));
    }
    header.push("residual".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut w = CsvWriter::create(out, "flow.csv", cfg, &header)?;
    for ((t, f), res) in traj.times.iter().zip(&traj.frames).zip(&traj.residuals) {
        let mut row = vec![num(*t)];
        row.extend((0..n).map(|i| num(f.base.coords[i])));
        for i in 0..n {
            row.extend((0..n).map(|j| num(f.e[(i, j)])));
        }
        row.push(num(*res));
        w.row(&row)?;
    }
    say(&w.finish()?);
    println!(
        "steps recorded {}, max residual {:.3e}, max lower-left {:.3e}, reorthonormalizations {}",
        traj.times.len(),
        traj.max_residual(),
        traj.max_lower_left(&atlas),
        traj.reorthonormalizations
    );
    Ok(true)
}

/// `one`, `cosM` or `sinM`.
fn test_series(name: &str) -> Result<(FourierSeries, usize), ConfigError> {
    if name == "one" {
        return Ok((FourierSeries::constant(1.0), 0));
    }
    let bad = || ConfigError(format!("`test_fn`: expected one, cosM or sinM, got `{name}`"));
    let (kind, m) = name.split_at(3.min(name.len()));
    let m: usize = m.parse().map_err(|_| bad())?;
    if m == 0 {
        return Err(bad());
    }
    let mut unit = vec![0.0; m];
    unit[m - 1] = 1.0;
    match kind {
        "cos" => Ok((FourierSeries::new(0.0, unit, Vec::new()), m)),
        "sin" => Ok((FourierSeries::new(0.0, Vec::new(), unit), m)),
        _ => Err(bad()),
    }
}

/// Heat decay of a single mode on a flat transverse circle.
fn heat_factor(atlas: &Atlas, m: usize, t: f64) -> Option<f64> {
    (atlas.kind() == AtlasKind::E1WarpedTorus).then(|| (-2.0 * PI * PI * (m * m) as f64 * t).exp())
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn semigroup(cfg: &Config, out: &Path) -> Result<bool> {
    let atlas = cfg.atlas()?;
    let n = atlas.n();
    let z = cfg.point(&atlas)?;
    let k = level(cfg)?;
    let dt: f64 = cfg.positive("dt", default_dt(k))?;
    let times: Vec<f64> = cfg.list("t", vec![0.1])?;
    if times.iter().any(|t| !(*t >= 0.0)) {
        return Err(ConfigError("`t`: times must be non-negative".into()).into());
    }
    let counts: Vec<usize> = cfg.list("n_paths", vec![10_000])?;
    if counts.contains(&0) {
        return Err(ConfigError("`n_paths` must be positive".into()).into());
    }
    let fname = cfg.value("test_fn", "cos1".to_string())?;
    let (series, m) = test_series(&fname)?;
    let workers = cfg.workers()?;
    let mc = |n_paths: usize| McConfig {
        n_paths,
        k,
        dt,
        seed: cfg.seed,
        workers,
    };
    let zt = z.coords[atlas.dims().t_index()];
    let label = point_label(&z, n);

    match cfg.value("form", "function".to_string())?.as_str() {
        "function" => {
            let mode = match cfg.value("mode", "full".to_string())?.as_str() {
                "full" => SemigroupMode::Full,
                "transverse" => SemigroupMode::Transverse,
                other => return Err(ConfigError(format!("`mode`: expected transverse or full, got `{other}`")).into()),
            };
            let f = BasicFourier::on(&atlas, series);
            let f0 = f.value(&z.coords);
            let mut w = CsvWriter::create(
                out,
                "semigroup.csv",
                cfg,
                &["f_name", "z", "t", "mode", "mean", "stderr", "n", "k", "seed", "oracle"],
            )?;
            for &t in &times {
                for &np in &counts {
                    let e = estimate_semigroup_fn(&atlas, &f, &z, t, mode, &mc(np))?;
                    w.row(&[
                        fname.clone(),
                        label.clone(),
                        num(t),
                        mode.name().into(),
                        num(e.mean),
                        num(e.stderr),
                        np.to_string(),
                        k.to_string(),
                        cfg.seed.to_string(),
                        opt_num(heat_factor(&atlas, m, t).map(|h| h * f0)),
                    ])?;
                }
            }
            say(&w.finish()?);
        }
        "oneform" => {
            if cfg.get("mode").is_some_and(|m| m != "transverse") {
                return Err(ConfigError("1-form semigroup runs in transverse mode only".into()).into());
            }
            let theta = BasicOneForm::on(&atlas, series.clone());
            let h0 = series.value(zt);
            let mut w = CsvWriter::create(
                out,
                "semigroup_oneform.csv",
                cfg,
                &[
                    "f_name",
                    "z",
                    "t",
                    "n",
                    "k",
                    "seed",
                    "index",
                    "u",
                    "u_stderr",
                    "component",
                    "component_stderr",
                    "oracle",
                ],
            )?;
            for &t in &times {
                for &np in &counts {
                    let e = estimate_semigroup_oneform(&atlas, &theta, &z, t, &mc(np))?;
                    for j in 0..n {
                        let oracle = heat_factor(&atlas, m, t).map(|h| if j == n - 1 { h * h0 } else { 0.0 });
                        w.row(&[
                            format!("{fname}_dt"),
                            label.clone(),
                            num(t),
                            np.to_string(),
                            k.to_string(),
                            cfg.seed.to_string(),
                            (j + 1).to_string(),
                            num(e.u[j]),
                            num(e.u_stderr[j]),
                            num(e.components[j]),
                            num(e.component_stderr[j]),
                            opt_num(oracle),
                        ])?;
                    }
                }
            }
            say(&w.finish()?);
        }
        other => return Err(ConfigError(format!("`form`: expected function or oneform, got `{other}`")).into()),
    }
    Ok(true)
}

/// Closed-form `φ` where one is known (undilated built-ins).
fn density_oracle(atlas: &Atlas) -> Option<FourierSeries> {
    closed_form_log_density(atlas).ok()
}

pub fn invariant(cfg: &Config, out: &Path) -> Result<bool> {
    let atlas = cfg.atlas()?;
    let sizes: Vec<usize> = cfg.list("N", vec![512])?;
    if sizes.iter().any(|&n| n < 8) {
        return Err(ConfigError("`N` must be at least 8".into()).into());
    }
    let oracle = density_oracle(&atlas);
    let mut summary = CsvWriter::create(
        out,
        "invariant_summary.csv",
        cfg,
        &["N", "residual", "second_eigenvalue", "operator_norm", "min_phi", "max_rel_error"],
    )?;
    for &n in &sizes {
        let d = solve_invariant_density(&atlas, n)?;
        let file = if sizes.len() == 1 { "invariant.csv".to_string() } else { format!("invariant_N{n}.csv") };
        let mut w = CsvWriter::create(out, &file, cfg, &["t", "phi", "phi_b", "oracle", "rho", "kappa_t"])?;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let t = d.t[i];
            let o = oracle.as_ref().map(|s| s.value(t).exp());
            if let Some(o) = o {
                worst = worst.max((d.phi[i] - o).abs() / o);
            }
            w.row(&[
                num(t),
                num(d.phi[i]),
                num(d.phi[i]),
                opt_num(o),
                num(d.rho[i]),
                num(atlas.mean_curvature_closed(t).0),
            ])?;
        }
        say(&w.finish()?);
        summary.row(&[
            n.to_string(),
            num(d.residual),
            num(d.second_eigenvalue),
            num(d.operator_norm),
            num(d.min()),
            if oracle.is_some() { num(worst) } else { String::new() },
        ])?;
    }
    say(&summary.finish()?);
    Ok(true)
}

pub fn dilate(cfg: &Config, out: &Path) -> Result<bool> {
    let atlas = cfg.atlas()?;
    let n: usize = cfg.positive("N", 512)?;
    let samples: usize = cfg.positive("samples", 1024)?;
    if n < 8 {
        return Err(ConfigError("`N` must be at least 8".into()).into());
    }
    let phi = solve_invariant_density(&atlas, n)?;
    let spec = match cfg.value("source", "solver".to_string())?.as_str() {
        "solver" => DilationSpec::from_density(atlas.clone(), &phi)?,
        "closed_form" => DilationSpec::new(atlas.clone(), closed_form_log_density(&atlas)?)?,
        other => return Err(ConfigError(format!("`source`: expected solver or closed_form, got `{other}`")).into()),
    };
    let dilated = dilate_metric(&spec)?;
    let phi_new = solve_invariant_density(&dilated, n)?;
    let mut w = CsvWriter::create(
        out,
        "dilate.csv",
        cfg,
        &["t", "phi", "phi_b", "log_psi", "kappa_t", "kappa_t_dilated", "phi_dilated"],
    )?;
    for i in 0..n {
        let t = phi.t[i];
        w.row(&[
            num(t),
            num(phi.phi[i]),
            num(phi.phi[i]),
            num(spec.log_psi.value(t)),
            num(atlas.mean_curvature_closed(t).0),
            num(kappa_dilated(&atlas, &spec.log_psi, t)),
            num(phi_new.phi[i]),
        ])?;
    }
    say(&w.finish()?);
    let (delta, d) = basic_harmonic_residual(&dilated, samples);
    let one_dev = phi_new.phi.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
    let mut s = CsvWriter::create(out, "dilate_summary.csv", cfg, &["quantity", "value"])?;
    for (q, v) in [
        ("codifferential", delta),
        ("exterior_derivative", d),
        ("max_abs_phi_dilated_minus_1", one_dev),
        ("kappa_crosscheck", kappa_dilated_crosscheck(&spec, 64)?),
    ] {
        s.row(&[q.into(), num(v)])?;
    }
    say(&s.finish()?);
    println!("codifferential {delta:.3e}, max |phi' - 1| {one_dev:.3e}");
    Ok(true)
}

pub fn carriere(cfg: &Config, out: &Path) -> Result<bool> {
    let atlas = cfg.atlas()?;
    if atlas.kind() != AtlasKind::E2Carriere {
        return Err(ConfigError("`carriere` requires manifold = e2".into()).into());
    }
    let n: usize = cfg.positive("N", 2048)?;
    if n < 8 {
        return Err(ConfigError("`N` must be at least 8".into()).into());
    }
    let phi = solve_invariant_density(&atlas, n)?;
    let dilated = dilate_metric(&DilationSpec::from_density(atlas, &phi)?)?;
    let rep = carriere_moment_check(
        &dilated,
        &standard_moment_functions(cfg.positive("max_mode", 4usize)?),
        cfg.positive("n_quad", 4096usize)?,
        cfg.positive("bins", 64usize)?,
    )?;
    let mut w = CsvWriter::create(out, "carriere_moments.csv", cfg, &["F", "lhs", "C_F0", "residual"])?;
    for m in &rep.moments {
        w.row(&[m.label.clone(), num(m.lhs), num(m.rhs), num(m.residual)])?;
    }
    say(&w.finish()?);
    let mut w = CsvWriter::create(
        out,
        "carriere_mu.csv",
        cfg,
        &["alpha", "beta", "mu", "quotient", "h_over_C", "residual"],
    )?;
    for r in &rep.mu_table {
        w.row(&[num(r.alpha), num(r.beta), num(r.mu), num(r.quotient), num(r.target), num(r.residual)])?;
    }
    say(&w.finish()?);
    println!("C = {}", num(rep.c));
    Ok(true)
}

pub fn verify(cfg: &Config, out: &Path) -> Result<bool> {
    if cfg.get("manifold").is_some() {
        return Err(ConfigError("`verify` runs on the built-in manifolds; remove `manifold`".into()).into());
    }
    let groups: Vec<String> = cfg.list("groups", GROUPS.iter().map(|g| g.to_string()).collect())?;
    for g in &groups {
        if !GROUPS.contains(&g.as_str()) {
            return Err(ConfigError(format!("`groups`: unknown group `{g}` (known: {})", GROUPS.join(", "))).into());
        }
    }
    let defaults = SuiteOptions::default();
    let k = level(cfg)?;
    let opts = SuiteOptions {
        seed: cfg.seed,
        n_paths: cfg.positive("n_paths", defaults.n_paths)?,
        k,
        dt: cfg.positive("dt", default_dt(k))?,
        workers: cfg.workers()?,
    };
    let mut w = CsvWriter::create(out, "verify.csv", cfg, &["criterion", "name", "residual", "tolerance", "pass"])?;
    let mut all = true;
    for g in &groups {
        for c in run_group(g, &opts)? {
            println!("{}  {}", if c.pass() { "PASS" } else { "FAIL" }, c.name);
            all &= c.pass();
            for r in &c.rows {
                w.row(&[c.name.into(), r.name.clone(), num(r.residual), num(r.tolerance), r.pass.to_string()])?;
            }
        }
    }
    say(&w.finish()?);
    Ok(all)
}
