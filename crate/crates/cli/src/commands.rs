use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use quadflow::analysis::{
    check_trajectory, qmap_grid, sample_coefficients, verify_all, PropertyReport,
};
use quadflow::integrator::solve_with_direction;
use quadflow::{
    contraction_constant, corner_constants, find_direction, Coefficients, Direction,
    IntegratorConfig, QuadrantPoint, Trajectory, TrajectorySample,
};

use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output::{num, sample_row, sink};
use crate::{Format, Global, PortraitArgs, QmapArgs, SolveArgs, VerifyArgs};

fn required<T: Copy>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::invalid(format!("missing --{flag}")))
}

fn coefficients(g: &Global) -> Result<Coefficients, CliError> {
    Ok(Coefficients::new(
        required(g.alpha, "alpha")?,
        required(g.beta, "beta")?,
        required(g.gamma, "gamma")?,
        required(g.delta, "delta")?,
    )?)
}

fn integrator_config(g: &Global) -> Result<IntegratorConfig, CliError> {
    let d = IntegratorConfig::default();
    let cfg = IntegratorConfig {
        rel_tol: g.rel_tol.unwrap_or(d.rel_tol),
        abs_tol: g.abs_tol.unwrap_or(d.abs_tol),
        max_step: g.max_step.unwrap_or(d.max_step),
        initial_step: g.initial_step.unwrap_or(d.initial_step),
        epsilon_fraction: g.epsilon_fraction.unwrap_or(d.epsilon_fraction),
        corner_handoff_time: g.corner_handoff_time.unwrap_or(d.corner_handoff_time),
        oracle_step: g.oracle_step.unwrap_or(d.oracle_step),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Chosen direction, honoring `--lambda`/`--mu`; requires hypothesis (H).
fn direction(g: &Global, coeffs: &Coefficients) -> Result<(Direction, bool), CliError> {
    coeffs.require_hypothesis()?;
    let chosen = find_direction(coeffs)?;
    if g.lambda.is_none() && g.mu.is_none() {
        return Ok((chosen, false));
    }
    let lambda = g.lambda.unwrap_or(chosen.lambda());
    let mu = g.mu.unwrap_or(chosen.mu());
    Ok((Direction::new(coeffs, lambda, mu)?, true))
}

struct Setup {
    coeffs: Coefficients,
    dir: Direction,
    cfg: IntegratorConfig,
    manifest: RunManifest,
}

fn setup(g: &Global, command: &'static str) -> Result<Setup, CliError> {
    let coeffs = coefficients(g)?;
    let cfg = integrator_config(g)?;
    let (dir, overridden) = direction(g, &coeffs)?;
    let manifest = RunManifest::new(
        command,
        &coeffs,
        Some(&dir),
        overridden,
        &cfg,
        g.seed.unwrap_or(0),
    );
    Ok(Setup {
        coeffs,
        dir,
        cfg,
        manifest,
    })
}

fn write_json(out: Option<&Path>, value: &impl Serialize) -> Result<(), CliError> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn constants(g: &Global) -> Result<(), CliError> {
    let s = setup(g, "constants")?;
    let cc = corner_constants(&s.coeffs, &s.dir)?;
    let kc = contraction_constant(&s.coeffs, &s.dir)?;
    let denominator = 2.0 * s.dir.growth_rate(&s.coeffs);
    let fields: Vec<(&str, f64)> = vec![
        ("lambda", s.dir.lambda()),
        ("mu", s.dir.mu()),
        ("c", cc.c),
        ("d", cc.d),
        ("slope", cc.slope),
        ("u_star_x", cc.fixed_point.x),
        ("u_star_y", cc.fixed_point.y),
        ("theta_star", cc.theta_star()),
        ("k1", kc.k1),
        ("k2", kc.k2),
        ("k", kc.k),
        ("tau_bound_denominator", denominator),
    ];
    let out = g.out.as_deref();
    if g.format == Some(Format::Json) {
        let mut doc = serde_json::Map::new();
        doc.insert("manifest".into(), serde_json::to_value(&s.manifest)?);
        doc.insert("classification".into(), json!(s.manifest.classification));
        for (k, v) in &fields {
            doc.insert((*k).into(), json!(v));
        }
        doc.insert("k_explicit".into(), json!(kc.explicit));
        return write_json(out, &doc);
    }
    let mut w = sink(out)?;
    writeln!(w, "key,value")?;
    writeln!(w, "classification,{}", s.manifest.classification.as_str())?;
    for (k, v) in &fields {
        writeln!(w, "{k},{}", num(*v))?;
    }
    writeln!(w, "k_explicit,{}", kc.explicit)?;
    w.flush()?;
    Ok(())
}

fn output_times(t_end: f64, dt: f64) -> Result<Vec<f64>, CliError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CliError::invalid(format!(
            "--dt-out must be positive, got {dt}"
        )));
    }
    let n = (t_end / dt * (1.0 - 1e-12)).ceil() as usize;
    if n > 10_000_000 {
        return Err(CliError::invalid(format!(
            "--dt-out {dt} gives too many rows"
        )));
    }
    let mut times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    times.push(t_end);
    Ok(times)
}

fn dense_samples(traj: &Trajectory, times: &[f64]) -> Result<Vec<TrajectorySample>, CliError> {
    times
        .iter()
        .map(|&t| {
            Ok(TrajectorySample {
                t,
                point: traj.evaluate(t)?,
                regime: traj.regime_at(t),
            })
        })
        .collect()
}

#[derive(Serialize)]
struct SampleRecord {
    t: f64,
    x: f64,
    y: f64,
    regime: &'static str,
}

fn records(samples: &[TrajectorySample]) -> Vec<SampleRecord> {
    samples
        .iter()
        .map(|s| SampleRecord {
            t: s.t,
            x: s.point.x,
            y: s.point.y,
            regime: s.regime.as_str(),
        })
        .collect()
}

pub fn solve(g: &Global, a: &SolveArgs) -> Result<(), CliError> {
    let s = setup(g, "solve")?;
    let u0 = QuadrantPoint::new(required(a.x0, "x0")?, required(a.y0, "y0")?)?;
    let t_end = required(a.t_end, "t-end")?;
    let traj = solve_with_direction(&s.coeffs, &s.dir, &u0, t_end, &s.cfg)?;
    let samples = match a.dt_out {
        Some(dt) => dense_samples(&traj, &output_times(t_end, dt)?)?,
        None => traj.samples(),
    };
    let out = g.out.as_deref();
    if g.format == Some(Format::Json) {
        return write_json(
            out,
            &json!({ "manifest": s.manifest, "x0": u0.x, "y0": u0.y, "t_end": t_end, "samples": records(&samples) }),
        );
    }
    let mut w = sink(out)?;
    writeln!(w, "t,x,y,regime")?;
    for sample in &samples {
        writeln!(w, "{}", sample_row(sample))?;
    }
    w.flush()?;
    Ok(())
}

/// The corner followed by `count - 1` evenly spaced points of the closed
/// level set at `r0`, axis endpoints included.
fn portrait_starts(dir: &Direction, count: usize, r0: f64) -> Vec<QuadrantPoint> {
    let mut starts = vec![QuadrantPoint::CORNER];
    let m = count - 1;
    let top = r0 / dir.lambda();
    for i in 0..m {
        let x = match m {
            1 => 0.5 * top,
            _ if i + 1 == m => top,
            _ => top * i as f64 / (m - 1) as f64,
        };
        let y = if x == top {
            0.0
        } else {
            ((r0 - dir.lambda() * x) / dir.mu()).max(0.0)
        };
        starts.push(QuadrantPoint { x, y });
    }
    starts
}

#[derive(Serialize)]
struct RunEntry {
    run_id: usize,
    x0: f64,
    y0: f64,
    t_end: f64,
    samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
}

pub fn portrait(g: &Global, a: &PortraitArgs) -> Result<(), CliError> {
    let s = setup(g, "portrait")?;
    let grid = required(a.grid, "grid")?;
    let r_max = required(a.r_max, "r-max")?;
    if grid == 0 {
        return Err(CliError::invalid("--grid must be at least 1"));
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(CliError::invalid(format!(
            "--r-max must be positive, got {r_max}"
        )));
    }
    let cc = corner_constants(&s.coeffs, &s.dir)?;
    let t_end = a
        .t_end
        .unwrap_or_else(|| s.dir.hitting_time_bound(&s.coeffs, r_max));
    let r0 = r_max / 10.0;

    let mut runs = Vec::new();
    for (id, u0) in portrait_starts(&s.dir, grid, r0).into_iter().enumerate() {
        let traj = solve_with_direction(&s.coeffs, &s.dir, &u0, t_end, &s.cfg)?;
        for report in check_trajectory(&traj)? {
            if matches!(report.name.as_str(), "monotone_level" | "cone_invariance") && !report.pass
            {
                return Err(CliError::solver(format!(
                    "run {id} from ({}, {}): {report}",
                    u0.x, u0.y
                )));
            }
        }
        runs.push((id, u0, traj.samples()));
    }

    let mut entries: Vec<RunEntry> = runs
        .iter()
        .map(|(id, u0, samples)| RunEntry {
            run_id: *id,
            x0: u0.x,
            y0: u0.y,
            t_end,
            samples: samples.len(),
            file: None,
        })
        .collect();
    let index = |entries: &[RunEntry]| {
        json!({
            "manifest": s.manifest,
            "theta_star": cc.theta_star(),
            "invariant_ray": { "slope": cc.slope, "direction": [cc.c, cc.d] },
            "r0": r0,
            "r_max": r_max,
            "runs": entries,
        })
    };

    if g.format == Some(Format::Json) {
        let mut doc = index(&entries);
        doc["samples"] = json!(runs
            .iter()
            .map(|(id, _, samples)| json!({ "run_id": id, "samples": records(samples) }))
            .collect::<Vec<_>>());
        return write_json(g.out.as_deref(), &doc);
    }

    if let Some(dir) = &a.per_run_dir {
        fs::create_dir_all(dir)?;
        for ((id, _, samples), entry) in runs.iter().zip(entries.iter_mut()) {
            let name = format!("run_{id:04}.csv");
            let mut w = sink(Some(&dir.join(&name)))?;
            writeln!(w, "t,x,y,regime")?;
            for sample in samples {
                writeln!(w, "{}", sample_row(sample))?;
            }
            w.flush()?;
            entry.file = Some(name);
        }
        let path = a.index.clone().unwrap_or_else(|| dir.join("index.json"));
        return write_json(Some(&path), &index(&entries));
    }

    let mut w = sink(g.out.as_deref())?;
    writeln!(w, "run_id,t,x,y,regime")?;
    for (id, _, samples) in &runs {
        for sample in samples {
            writeln!(w, "{id},{}", sample_row(sample))?;
        }
    }
    w.flush()?;
    let index_path: Option<PathBuf> = a
        .index
        .clone()
        .or_else(|| g.out.as_ref().map(|p| p.with_extension("index.json")));
    if let Some(path) = index_path {
        write_json(Some(&path), &index(&entries))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyRun {
    manifest: RunManifest,
    pass: bool,
    reports: Vec<PropertyReport>,
}

fn verify_one(
    g: &Global,
    coeffs: &Coefficients,
    cfg: &IntegratorConfig,
    seed: u64,
) -> Result<VerifyRun, CliError> {
    let dir = if coeffs.require_hypothesis().is_ok() {
        Some(direction(g, coeffs)?)
    } else {
        None
    };
    let reports = verify_all(coeffs, cfg, seed);
    let manifest = RunManifest::new(
        "verify",
        coeffs,
        dir.as_ref().map(|(d, _)| d),
        dir.is_some_and(|(_, o)| o),
        cfg,
        seed,
    );
    Ok(VerifyRun {
        manifest,
        pass: reports.iter().all(|r| r.pass),
        reports,
    })
}

/// Returns whether every property passed.
pub fn verify(g: &Global, a: &VerifyArgs) -> Result<bool, CliError> {
    let cfg = integrator_config(g)?;
    let seed = g.seed.unwrap_or(0);
    if g.lambda.is_some() || g.mu.is_some() {
        // the suite picks its own direction; an override would be ignored
        return Err(CliError::invalid("verify does not accept --lambda/--mu"));
    }
    let runs: Vec<VerifyRun> = match a.random_coeffs {
        Some(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    let coeffs = sample_coefficients(&mut rng);
                    let run_seed: u64 = rng.gen();
                    verify_one(g, &coeffs, &cfg, run_seed)
                })
                .collect::<Result<_, _>>()?
        }
        None => vec![verify_one(g, &coefficients(g)?, &cfg, seed)?],
    };
    let pass = runs.iter().all(|r| r.pass);
    let out = g.out.as_deref();
    if g.format == Some(Format::Json) {
        write_json(out, &json!({ "pass": pass, "runs": runs }))?;
        return Ok(pass);
    }
    let mut w = sink(out)?;
    for (i, run) in runs.iter().enumerate() {
        writeln!(
            w,
            "# run {i} manifest {}",
            serde_json::to_string(&run.manifest)?
        )?;
        writeln!(
            w,
            "{:<22} {:<6} {:>24} {:<2} {:>24} {:>8}",
            "property", "result", "margin", "", "tolerance", "samples"
        )?;
        for r in &run.reports {
            writeln!(
                w,
                "{:<22} {:<6} {:>24} {:<2} {:>24} {:>8}{}",
                r.name,
                if r.pass { "PASS" } else { "FAIL" },
                num(r.margin),
                r.criterion.symbol(),
                num(r.tolerance),
                r.samples,
                r.detail
                    .as_ref()
                    .map(|d| format!("  {d}"))
                    .unwrap_or_default()
            )?;
        }
    }
    writeln!(
        w,
        "# {} of {} runs passed",
        runs.iter().filter(|r| r.pass).count(),
        runs.len()
    )?;
    w.flush()?;
    Ok(pass)
}

pub fn qmap(g: &Global, a: &QmapArgs) -> Result<(), CliError> {
    let s = setup(g, "qmap")?;
    let grid = required(a.grid, "grid")?;
    let rows = qmap_grid(&s.coeffs, &s.dir, grid, &s.cfg)?;
    let kc = contraction_constant(&s.coeffs, &s.dir)?;
    let max_ratio = rows
        .iter()
        .filter_map(|r| r.ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = 1.0 - kc.k1.min(kc.k2);
    let out = g.out.as_deref();
    if g.format == Some(Format::Json) {
        let table: Vec<_> = rows
            .iter()
            .map(|r| json!({ "x1": r.u1.x, "y1": r.u1.y, "qx": r.q.x, "qy": r.q.y, "ratio": r.ratio }))
            .collect();
        return write_json(
            out,
            &json!({ "manifest": s.manifest, "rows": table, "max_ratio": max_ratio, "one_minus_min_k": bound }),
        );
    }
    let mut w = sink(out)?;
    writeln!(w, "x1,y1,qx,qy,ratio")?;
    for r in &rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            num(r.u1.x),
            num(r.u1.y),
            num(r.q.x),
            num(r.q.y),
            r.ratio.map(num).unwrap_or_default()
        )?;
    }
    writeln!(
        w,
        "# max_ratio={} one_minus_min_k={}",
        num(max_ratio),
        num(bound)
    )?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_grid_ends_at_t_end() {
        assert_eq!(
            output_times(1.0, 0.25).unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        let t = output_times(1.0, 0.3).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(*t.last().unwrap(), 1.0);
        assert!(output_times(1.0, 0.0).is_err());
    }

    #[test]
    fn portrait_starts_layout() {
        let c = Coefficients::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let dir = find_direction(&c).unwrap();
        assert_eq!(portrait_starts(&dir, 1, 1.0), vec![QuadrantPoint::CORNER]);
        let s = portrait_starts(&dir, 4, 1.0);
        assert_eq!(s.len(), 4);
        assert_eq!(s[1], QuadrantPoint { x: 0.0, y: 1.0 });
        assert_eq!(s[3], QuadrantPoint { x: 1.0, y: 0.0 });
        for p in &s[1..] {
            assert!((dir.level(p) - 1.0).abs() < 1e-15);
        }
    }
}
