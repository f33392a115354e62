//! The four subcommands: sample, gnz, bound, experiment. Each writes CSV
//! reports plus a metadata sidecar (config echo, version, seed, timings)
//! into the output directory. All data files are byte-deterministic for a
//! fixed config and seed; wall-clock timings live only in the sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};

use gibbseg::bounds::{
    lemma31_b, lemma31_b_sharp, norm_table, theorem34_bound_with_b, BoundReport, NormTable,
};
use gibbseg::functionals::{innovation_sample_sets, Functional, FunctionalKind, McSettings};
use gibbseg::sampler::{gnz_check_all, run_chain, ChainSettings, GnzSettings, GnzTestFn};
use gibbseg::stats::distance_report;

use crate::config::ExperimentConfig;

/// Spacing between the derived base seeds of consecutive experiment rows,
/// so replicate seeds (`row_seed + i`) never collide across rows.
const ROW_SEED_STRIDE: u64 = 1_000_003;

fn chain_settings(cfg: &ExperimentConfig, sabotage_death: bool) -> ChainSettings {
    ChainSettings {
        sweeps: cfg.sweeps,
        burn_in: cfg.burn_in,
        sabotage_death,
    }
}

fn mc_settings(cfg: &ExperimentConfig) -> McSettings {
    McSettings {
        initial_points: cfg.mc_points,
        se_target: cfg.mc_se_target,
        max_points: cfg.mc_points.saturating_mul(16).max(cfg.mc_points),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_meta(
    out: &Path,
    command: &str,
    cfg: &ExperimentConfig,
    timings: &[(String, f64)],
) -> Result<()> {
    let mut meta = String::new();
    let _ = writeln!(meta, "command = {command}");
    let _ = writeln!(meta, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(meta, "seed = {}", cfg.seed);
    let _ = writeln!(meta, "# ---- config echo ----");
    for line in cfg.source.lines() {
        let _ = writeln!(meta, "# {line}");
    }
    let _ = writeln!(meta, "# ---- wall times in seconds (not deterministic) ----");
    for (name, secs) in timings {
        let _ = writeln!(meta, "# {name} = {secs:.3}");
    }
    write_file(&out.join(format!("meta_{command}.txt")), &meta)
}

/// Runs one chain and writes the final configuration plus a summary row.
pub fn cmd_sample(cfg: &ExperimentConfig, out: &Path) -> Result<i32> {
    fs::create_dir_all(out)?;
    let started = Instant::now();
    let n = cfg.ns[0];
    let params = cfg.params_at(n)?;
    let domain = cfg.domain_at(n)?;
    let settings = chain_settings(cfg, false);
    let (config, stats) = run_chain(&params, &domain, &settings, cfg.seed)?;

    let mut seg_csv = String::from("cx,cy,angle,length\n");
    for s in config.segments() {
        let _ = writeln!(
            seg_csv,
            "{:.15e},{:.15e},{:.15e},{:.15e}",
            s.center().x,
            s.center().y,
            s.angle(),
            s.length()
        );
    }
    write_file(&out.join("segments.csv"), &seg_csv)?;

    let count = config.len();
    let (mean_len, mean_angle) = if count == 0 {
        (0.0, 0.0)
    } else {
        (
            config.segments().iter().map(|s| s.length()).sum::<f64>() / count as f64,
            config.segments().iter().map(|s| s.angle()).sum::<f64>() / count as f64,
        )
    };
    let mut summary = String::from(
        "count,energy,mean_intersections,birth_rate,death_rate,move_rate,mean_length,mean_angle\n",
    );
    let _ = writeln!(
        summary,
        "{},{},{},{},{},{},{},{}",
        count,
        config.energy(),
        config.mean_intersections(),
        stats.birth_rate(),
        stats.death_rate(),
        stats.move_rate(),
        mean_len,
        mean_angle
    );
    write_file(&out.join("sample_summary.csv"), &summary)?;
    write_meta(
        out,
        "sample",
        cfg,
        &[("run".into(), started.elapsed().as_secs_f64())],
    )?;
    Ok(0)
}

/// GNZ balance diagnostics for the three built-in test functions.
/// Exit code 3 when any check fails.
pub fn cmd_gnz(cfg: &ExperimentConfig, out: &Path, sabotage_death: bool) -> Result<i32> {
    fs::create_dir_all(out)?;
    let started = Instant::now();
    let n = cfg.ns[0];
    let params = cfg.params_at(n)?;
    let domain = cfg.domain_at(n)?;
    let fs_list = GnzTestFn::all_for(domain.window);
    let settings = GnzSettings {
        chain: chain_settings(cfg, sabotage_death),
        mc_points: cfg.gnz_mc_points,
    };
    let reports = gnz_check_all(&params, &domain, &fs_list, cfg.replicates, &settings, cfg.seed)?;

    let mut csv = String::from("f_id,lhs,lhs_se,rhs,rhs_se,z_score,pass\n");
    let mut all_pass = true;
    for r in &reports {
        all_pass &= r.pass();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.f_id, r.lhs, r.lhs_se, r.rhs, r.rhs_se, r.z, r.pass()
        );
    }
    write_file(&out.join("gnz.csv"), &csv)?;
    write_meta(
        out,
        "gnz",
        cfg,
        &[("run".into(), started.elapsed().as_secs_f64())],
    )?;
    Ok(if all_pass { 0 } else { 3 })
}

struct AnalyticRow {
    n: u64,
    kind: FunctionalKind,
    tau: f64,
    beta: f64,
    leb: f64,
    perim: f64,
    norms: NormTable,
    report: BoundReport,
}

fn analytic_rows(cfg: &ExperimentConfig) -> Result<Vec<AnalyticRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        let params = cfg.params_at(n)?;
        let window = cfg.window_at(n)?;
        let b = if cfg.sharp_b {
            lemma31_b_sharp(cfg.potential_bound, cfg.radius, &cfg.length_law)
        } else {
            lemma31_b(cfg.potential_bound, cfg.radius)
        };
        for kind in cfg.functional.kinds() {
            let f = Functional::new(kind, window, params.tau, &cfg.length_law)?;
            let norms = norm_table(&f, &cfg.length_law)?;
            let report = theorem34_bound_with_b(&norms, &params, cfg.potential_bound, b);
            rows.push(AnalyticRow {
                n,
                kind,
                tau: params.tau,
                beta: params.beta,
                leb: window.area(),
                perim: window.perimeter(),
                norms,
                report,
            });
        }
    }
    Ok(rows)
}

/// Pure analytics: norm tables and the five-term bound along the sequence.
pub fn cmd_bound(cfg: &ExperimentConfig, out: &Path) -> Result<i32> {
    fs::create_dir_all(out)?;
    let started = Instant::now();
    let rows = analytic_rows(cfg)?;
    let mut csv = String::from(
        "n,functional,tau,beta,leb_w,perim_w,norm_l1,norm_l2,norm_l3,\
         term1,term2,term3,term4,term5,total,radicand,b_const\n",
    );
    for r in &rows {
        let b = &r.report;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.kind.id(),
            r.tau,
            r.beta,
            r.leb,
            r.perim,
            r.norms.l1,
            r.norms.l2,
            r.norms.l3,
            b.term1,
            b.term2,
            b.term3,
            b.term4,
            b.term5,
            b.total,
            b.radicand,
            b.b_const
        );
    }
    write_file(&out.join("bound.csv"), &csv)?;
    write_meta(
        out,
        "bound",
        cfg,
        &[("run".into(), started.elapsed().as_secs_f64())],
    )?;
    Ok(0)
}

/// Full verification run: analytic bounds plus simulated innovations with
/// empirical Wasserstein/KS distances, one row per index and functional.
pub fn cmd_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<i32> {
    fs::create_dir_all(out)?;
    let kinds = cfg.functional.kinds();
    let mc = mc_settings(cfg);
    let settings = chain_settings(cfg, false);

    let mut csv = String::from(
        "n,functional,tau,beta,r,margin,length_law,leb_w,perim_w,\
         sweeps,burn_in,replicates,mc_points,seed,\
         norm_l1,norm_l2,norm_l3,term1,term2,term3,term4,term5,bound_total,radicand,b_const,\
         innov_mean,innov_sd,emp_w1,emp_ks,status\n",
    );
    let mut curves: Vec<(FunctionalKind, String, String)> = kinds
        .iter()
        .map(|&k| (k, String::new(), String::new()))
        .collect();
    let mut timings = Vec::new();

    for (row_idx, &n) in cfg.ns.iter().enumerate() {
        let row_started = Instant::now();
        let params = cfg.params_at(n)?;
        let window = cfg.window_at(n)?;
        let domain = cfg.domain_at(n)?;
        let margin = domain.margin;
        let row_seed = cfg.seed.wrapping_add(row_idx as u64 * ROW_SEED_STRIDE);

        let b = if cfg.sharp_b {
            lemma31_b_sharp(cfg.potential_bound, cfg.radius, &cfg.length_law)
        } else {
            lemma31_b(cfg.potential_bound, cfg.radius)
        };
        let mut fs_row = Vec::new();
        for &kind in &kinds {
            fs_row.push(Functional::new(kind, window, params.tau, &cfg.length_law)?);
        }

        let simulated = innovation_sample_sets(
            &fs_row,
            &params,
            &domain,
            cfg.replicates,
            &settings,
            &mc,
            row_seed,
        );

        for (j, &kind) in kinds.iter().enumerate() {
            let norms = norm_table(&fs_row[j], &cfg.length_law)?;
            let report = theorem34_bound_with_b(&norms, &params, cfg.potential_bound, b);
            let (mean, sd, w1, ks, status) = match &simulated {
                Ok(sets) => {
                    let d = distance_report(&sets[j])?;
                    (d.sample_mean, d.sample_sd, d.w1, d.ks, "ok".to_string())
                }
                Err(e) => {
                    let msg: String = e
                        .to_string()
                        .chars()
                        .map(|c| if c == ',' || c == '\n' { ';' } else { c })
                        .collect();
                    (f64::NAN, f64::NAN, f64::NAN, f64::NAN, format!("error: {msg}"))
                }
            };
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                n,
                kind.id(),
                params.tau,
                params.beta,
                cfg.radius,
                margin,
                cfg.length_law,
                window.area(),
                window.perimeter(),
                cfg.sweeps,
                cfg.burn_in,
                cfg.replicates,
                cfg.mc_points,
                row_seed,
                norms.l1,
                norms.l2,
                norms.l3,
                report.term1,
                report.term2,
                report.term3,
                report.term4,
                report.term5,
                report.total,
                report.radicand,
                report.b_const,
                mean,
                sd,
                w1,
                ks,
                status
            );
            if status == "ok" {
                let entry = curves.iter_mut().find(|(k, _, _)| *k == kind).unwrap();
                let _ = writeln!(entry.1, "{} {}", n, report.total);
                let _ = writeln!(entry.2, "{} {}", n, w1);
            }
        }
        timings.push((format!("row_n_{n}"), row_started.elapsed().as_secs_f64()));
    }

    write_file(&out.join("experiment.csv"), &csv)?;
    for (kind, bound_curve, w1_curve) in &curves {
        write_file(
            &out.join(format!("curve_{}_bound.dat", kind.id())),
            bound_curve,
        )?;
        write_file(&out.join(format!("curve_{}_w1.dat", kind.id())), w1_curve)?;
    }
    write_meta(out, "experiment", cfg, &timings)?;
    Ok(0)
}
