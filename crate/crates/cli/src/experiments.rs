//! Experiment registry.
//!
//! Each experiment builds its inputs from the validated config, drives the
//! core pipeline, and reduces the outcome to stages whose conjunction is
//! the verdict. Randomized suites draw from a ChaCha stream seeded by the
//! CLI `--seed`, so byte-identical reports come from identical
//! (config, seed) pairs.

use crate::config::Config;
use crate::report::{ExperimentReport, Stage, Table, Verdict, SCHEMA_VERSION};
use crate::{HarnessError, Result};
use poslab_core::geometry::RadialGrid;
use poslab_core::groundstate::{solve_dirichlet_ground, verify_pw_identity};
use poslab_core::kato::{brezis_kato_check, kato_via_appendix};
use poslab_core::liouville::{
    caccioppoli_check, cutoff_family, energy_decay_test, liouville_verdict, regularity_certificate,
    subquadratic_class_check, LiouvilleOutcome,
};
use poslab_core::operators::{DiscreteOperator, GridFunction, Region};
use poslab_core::positivity::{
    certified_hypothesis_input, counterexample_catalog, pp_experiment, resolvent_view,
    CatalogParams, PpConclusion,
};
use poslab_core::sampling;
use poslab_core::smoothing::{green_coordinate, monotone_smooth_approx, verify_approx_properties};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

pub const EXPERIMENTS: &[&str] = &[
    "pw-identity",
    "smoothing-abc",
    "brezis-kato",
    "caccioppoli",
    "regularity",
    "liouville",
    "subquadratic",
    "pp",
    "counterexample",
    "resolvent",
];

struct Outcome {
    pass: bool,
    stages: Vec<Stage>,
    tables: BTreeMap<String, Table>,
    /// Scalar whose refinement order a sweep can fit (when meaningful).
    refine_metric: Option<f64>,
}

fn region_or_default(
    cfg: &Config,
    grid: &Arc<RadialGrid>,
    lo_frac: f64,
    hi_frac: f64,
) -> Result<Region> {
    let (lo, hi) = match cfg.region {
        Some([a, b]) => (a, b),
        None => (
            cfg.r_min + lo_frac * (cfg.r_max - cfg.r_min),
            cfg.r_min + hi_frac * (cfg.r_max - cfg.r_min),
        ),
    };
    Region::from_radii(grid, lo, hi).map_err(HarnessError::Run)
}

/// Kink subsolution linear in the grid Green coordinate of the region.
fn green_kink(grid: &Arc<RadialGrid>, region: Region, base: f64) -> Result<GridFunction> {
    let op = DiscreteOperator::laplacian(grid);
    let t = green_coordinate(&op, region)?;
    let t_star = 0.5 * t[t.len() - 1];
    let t_diam = t[t.len() - 1];
    let slope = 2.0 / t_diam;
    let mut vals = vec![0.0; grid.len()];
    for i in 0..grid.len() {
        let ti = if i <= region.lo {
            t[0]
        } else if i >= region.hi {
            t[t.len() - 1]
        } else {
            t[i - region.lo]
        };
        vals[i] = base.max(base + slope * (ti - t_star));
    }
    GridFunction::from_values(grid, vals).map_err(HarnessError::Run)
}

fn pw_identity(cfg: &Config, nodes: usize, _rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let grid = cfg.build_grid(nodes)?;
    let op = DiscreteOperator::schrodinger_const(&grid, 1.0)?;
    let region = region_or_default(cfg, &grid, 0.25, 0.75)?;
    let gs = solve_dirichlet_ground(&op, region, 1.0)?;
    let a = grid.node(region.lo);
    let b = grid.node(region.hi);
    let phi = GridFunction::from_fn(&grid, |r| ((r - a) * (b - r)).max(0.0).powi(2));
    let rep = verify_pw_identity(&gs, &phi)?;
    let adjoint_pass = rep.adjoint_residual <= cfg.adjoint_rel * rep.adjoint_scale;
    let stages = vec![
        Stage::new("ground state solve", true).with("residual", gs.residual),
        Stage::new("adjoint identity", adjoint_pass)
            .with("residual", rep.adjoint_residual)
            .with("scale", rep.adjoint_scale),
        Stage::new("pointwise identity", true).with("residual", rep.strong_residual),
    ];
    let mut tables = BTreeMap::new();
    let mut t = Table::new(&["nodes", "strong_residual", "adjoint_residual"]);
    t.push(vec![
        nodes as f64,
        rep.strong_residual,
        rep.adjoint_residual,
    ]);
    tables.insert("residuals".to_string(), t);
    Ok(Outcome {
        pass: adjoint_pass,
        stages,
        tables,
        refine_metric: Some(rep.strong_residual),
    })
}

fn smoothing_abc(cfg: &Config, nodes: usize, _rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let grid = cfg.build_grid(nodes)?;
    let op = DiscreteOperator::laplacian(&grid);
    let region = region_or_default(cfg, &grid, 0.25, 1.0)?;
    let u = green_kink(&grid, region, -1.0)?;
    let seq = monotone_smooth_approx(&u, &op, region, cfg.sequence_len, None)?;
    let rep = verify_approx_properties(&seq);
    let ratios_ok = rep
        .l1_ratios
        .iter()
        .all(|r| (r - cfg.ratio_target).abs() <= cfg.ratio_band)
        || rep.l1_errors[0] <= rep.monotone_tol;
    let stages = vec![
        Stage::new("a) monotone envelope", rep.monotone_pass).with("tolerance", rep.monotone_tol),
        Stage::new("b) nodewise convergence", rep.nodewise_pass),
        Stage::new("c) subsolution certificates", rep.certificates_pass),
        Stage::new("d) L1 decay ratios", rep.decay_pass && ratios_ok)
            .with("floor_bound", if rep.floor_bound { 1.0 } else { 0.0 }),
    ];
    let mut tables = BTreeMap::new();
    let mut t = Table::new(&["k", "eps", "l1_error", "ratio"]);
    for (i, e) in rep.l1_errors.iter().enumerate() {
        let ratio = if i == 0 {
            f64::NAN
        } else {
            rep.l1_ratios[i - 1]
        };
        t.push(vec![(i + 1) as f64, seq.eps[i], *e, ratio]);
    }
    tables.insert("decay".to_string(), t);
    let pass = rep.monotone_pass
        && rep.nodewise_pass
        && rep.certificates_pass
        && rep.decay_pass
        && ratios_ok;
    let metric = *rep.l1_errors.last().unwrap();
    Ok(Outcome {
        pass,
        stages,
        tables,
        refine_metric: Some(metric).filter(|m| *m > 0.0),
    })
}

fn brezis_kato(cfg: &Config, nodes: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let grid = cfg.build_grid(nodes)?;
    let op = DiscreteOperator::schrodinger_const(&grid, 1.0)?;
    let region = region_or_default(cfg, &grid, 0.15, 0.925)?;
    let gs = solve_dirichlet_ground(&op, region, 1.0)?;
    let mut all_reg = true;
    let mut all_app = true;
    let mut all_agree = true;
    let mut last_ladder = Table::new(&["eps", "min_pairing"]);
    for _ in 0..cfg.count {
        let u = sampling::random_sign_changing_subsolution(&gs, region, rng);
        let reg = brezis_kato_check(&u, &op, region)?;
        let app = kato_via_appendix(&u, &op, region, cfg.sequence_len)?;
        all_reg &= reg.pass;
        all_app &= app.pass;
        all_agree &= app.agreement.map(|a| a.agree).unwrap_or(false);
        last_ladder = Table::new(&["eps", "min_pairing"]);
        for row in &reg.ladder {
            last_ladder.push(vec![row.eps, row.min_pairing]);
        }
    }
    let stages = vec![
        Stage::new("regularization route", all_reg).with("inputs", cfg.count as f64),
        Stage::new("dirichlet-problem route", all_app),
        Stage::new("route agreement", all_agree),
    ];
    let mut tables = BTreeMap::new();
    tables.insert("ladder".to_string(), last_ladder);
    Ok(Outcome {
        pass: all_reg && all_app && all_agree,
        stages,
        tables,
        refine_metric: None,
    })
}

fn caccioppoli(cfg: &Config, nodes: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let grid = cfg.build_grid(nodes)?;
    let lap = DiscreteOperator::laplacian(&grid);
    let region = Region::all(&grid);
    let ks: Vec<f64> = cfg
        .k_list
        .iter()
        .copied()
        .filter(|k| 2.0 * k <= cfg.r_max)
        .collect();
    let fam = cutoff_family(&grid, &ks)?;
    let ps: Vec<f64> = cfg.p_list.iter().copied().filter(|&p| p > 1.0).collect();
    let mut failures = 0usize;
    let mut total = 0usize;
    let mut t = Table::new(&["trial", "p", "k", "lhs", "rhs", "pass"]);
    for trial in 0..cfg.count {
        let raw = sampling::random_positive_subharmonic(&lap, region, rng);
        let u = raw.shifted(1e-6 * (1.0 + raw.sup_norm()));
        for &p in &ps {
            let eps = cfg.eps.unwrap_or(0.5 * (p - 1.0));
            for (phi, &k) in fam.phis.iter().zip(&fam.ks) {
                let out = caccioppoli_check(&u, p, eps, phi)?;
                total += 1;
                if !out.pass {
                    failures += 1;
                }
                t.push(vec![
                    trial as f64,
                    p,
                    k,
                    out.lhs,
                    out.rhs,
                    if out.pass { 1.0 } else { 0.0 },
                ]);
            }
        }
    }
    let stages = vec![Stage::new("energy inequality grid", failures == 0)
        .with("checks", total as f64)
        .with("failures", failures as f64)];
    let mut tables = BTreeMap::new();
    tables.insert("checks".to_string(), t);
    Ok(Outcome {
        pass: failures == 0,
        stages,
        tables,
        refine_metric: None,
    })
}

fn regularity(cfg: &Config, nodes: usize, _rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let grid = cfg.build_grid(nodes)?;
    let omega = region_or_default(cfg, &grid, 0.2, 0.8)?;
    let window = match cfg.window {
        Some([a, b]) => Region::from_radii(&grid, a, b).map_err(HarnessError::Run)?,
        None => {
            let a = grid.node(omega.lo);
            let b = grid.node(omega.hi);
            Region::from_radii(&grid, a + 0.25 * (b - a), b - 0.25 * (b - a))
                .map_err(HarnessError::Run)?
        }
    };
    let u = green_kink(&grid, omega, 0.0)?;
    let mut stages = Vec::new();
    let mut t = Table::new(&["p", "bound", "max_seminorm_sq", "sup_u1"]);
    let mut pass = true;
    for &p in cfg.p_list.iter().filter(|&&p| p > 1.0) {
        let rep = regularity_certificate(&u, p, omega, window, cfg.sequence_len)?;
        let worst = rep.seminorms_sq.iter().cloned().fold(0.0f64, f64::max);
        stages.push(
            Stage::new(&format!("uniform bound at p = {p}"), rep.pass)
                .with("bound", rep.bound)
                .with("max_seminorm_sq", worst),
        );
        t.push(vec![p, rep.bound, worst, rep.sup_u1]);
        pass &= rep.pass;
    }
    let mut tables = BTreeMap::new();
    tables.insert("bounds".to_string(), t);
    Ok(Outcome {
        pass,
        stages,
        tables,
        refine_metric: None,
    })
}

fn liouville(cfg: &Config, nodes: usize, _rng: &mut ChaCha8Rng) -> Result<Outcome> {
    // Completeness is probed by stabilization: the experiment runs at the
    // configured truncation radius and at its double, on shared radii.
    let grid_a = cfg.build_grid(nodes)?;
    let mut cfg_b = cfg.clone();
    cfg_b.r_max = 2.0 * cfg.r_max;
    let grid_b = cfg_b.build_grid(2 * (nodes - 1) + 1)?;
    let u_a = GridFunction::constant(&grid_a, 3.0);
    let u_b = GridFunction::constant(&grid_b, 3.0);
    let ks: Vec<f64> = cfg
        .k_list
        .iter()
        .copied()
        .filter(|k| 2.0 * k <= cfg.r_max)
        .collect();
    let table_a = energy_decay_test(&u_a, cfg.p, &ks)?;
    let table_b = energy_decay_test(&u_b, cfg.p, &ks)?;
    let verdict_a = liouville_verdict(&u_a, cfg.p)?;
    let verdict_b = liouville_verdict(&u_b, cfg.p)?;
    let const_a = matches!(verdict_a.outcome, LiouvilleOutcome::Constant { .. });
    let const_b = matches!(verdict_b.outcome, LiouvilleOutcome::Constant { .. });
    let exp_gap = (table_a.fitted_exponent - table_b.fitted_exponent).abs();
    let stable = exp_gap <= cfg.exponent_agree
        || (table_a.fitted_exponent == f64::NEG_INFINITY
            && table_b.fitted_exponent == f64::NEG_INFINITY);
    let stages = vec![
        Stage::new("L^p membership", table_a.lp_member && table_b.lp_member)
            .with("norm_full", table_a.lp_norm_full)
            .with("norm_half", table_a.lp_norm_half),
        Stage::new("annulus energy decay", table_a.decays && table_b.decays)
            .with("exponent", table_a.fitted_exponent),
        Stage::new("constant verdict", const_a && const_b),
        Stage::new("stable under truncation doubling", stable).with("exponent_gap", exp_gap),
    ];
    let mut tables = BTreeMap::new();
    for (name, table) in [("energy_base", &table_a), ("energy_doubled", &table_b)] {
        let mut t = Table::new(&["k", "lhs", "rhs", "dominated"]);
        for row in &table.rows {
            t.push(vec![
                row.k,
                row.lhs,
                row.rhs,
                if row.dominated { 1.0 } else { 0.0 },
            ]);
        }
        tables.insert(name.to_string(), t);
    }
    let mut t = Table::new(&["k", "rhs_base", "rhs_doubled", "rel_gap"]);
    for (ra, rb) in table_a.rows.iter().zip(&table_b.rows) {
        let gap = (ra.rhs - rb.rhs).abs() / ra.rhs.abs().max(1e-300);
        t.push(vec![ra.k, ra.rhs, rb.rhs, gap]);
    }
    tables.insert("stabilization".to_string(), t);
    let pass = table_a.lp_member && table_b.lp_member && const_a && const_b && stable;
    Ok(Outcome {
        pass,
        stages,
        tables,
        refine_metric: None,
    })
}

fn subquadratic(cfg: &Config, nodes: usize, _rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let grid = cfg.build_grid(nodes)?;
    let ks: Vec<f64> = cfg
        .k_list
        .iter()
        .copied()
        .filter(|k| 2.0 * k <= cfg.r_max)
        .collect();
    let constant = GridFunction::constant(&grid, 1.0);
    let decaying = GridFunction::from_fn(&grid, |r| 1.0 / ((1.0 + r) * (1.0 + r)));
    let rep_c = subquadratic_class_check(&constant, cfg.p, &ks)?;
    let rep_d = subquadratic_class_check(&decaying, cfg.p, &ks)?;
    let stages = vec![
        Stage::new(
            "constant input fit",
            rep_c.exponent.is_finite() || rep_c.member,
        )
        .with("exponent", rep_c.exponent)
        .with("member", if rep_c.member { 1.0 } else { 0.0 }),
        Stage::new("decaying input is a member", rep_d.member).with("exponent", rep_d.exponent),
    ];
    let mut tables = BTreeMap::new();
    let mut t = Table::new(&["input", "k", "mass"]);
    for (i, rep) in [&rep_c, &rep_d].iter().enumerate() {
        for (k, m) in &rep.masses {
            t.push(vec![i as f64, *k, *m]);
        }
    }
    tables.insert("masses".to_string(), t);
    Ok(Outcome {
        pass: rep_d.member && (rep_c.exponent.is_finite() || rep_c.member),
        stages,
        tables,
        refine_metric: None,
    })
}

fn pp(cfg: &Config, nodes: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let grid = cfg.build_grid(nodes)?;
    let mut inputs: Vec<GridFunction> = Vec::new();
    for _ in 0..cfg.count {
        let f = sampling::random_nonneg(&grid, rng);
        inputs.push(certified_hypothesis_input(&grid, &f)?);
    }
    inputs.push(certified_hypothesis_input(
        &grid,
        &GridFunction::constant(&grid, 1.0),
    )?);
    let mut all = true;
    let mut t = Table::new(&["input", "negative_part_norm", "nonnegative"]);
    let mut hyp_ok = true;
    let mut chain_ok = true;
    for (i, u) in inputs.iter().enumerate() {
        let verdict = pp_experiment(u, cfg.p)?;
        let nonneg = matches!(verdict.conclusion, PpConclusion::Nonnegative);
        hyp_ok &= verdict.hypothesis.pass;
        chain_ok &= verdict.kato.pass && verdict.subharmonic.pass;
        all &= nonneg;
        t.push(vec![
            i as f64,
            verdict.negative_part_norm,
            if nonneg { 1.0 } else { 0.0 },
        ]);
    }
    let stages = vec![
        Stage::new("hypothesis certificates", hyp_ok).with("inputs", inputs.len() as f64),
        Stage::new("positive-part and subharmonicity chain", chain_ok),
        Stage::new("nonnegative conclusions", all),
    ];
    let mut tables = BTreeMap::new();
    tables.insert("inputs".to_string(), t);
    Ok(Outcome {
        pass: all,
        stages,
        tables,
        refine_metric: None,
    })
}

fn counterexample(cfg: &Config, _nodes: usize, _rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let rep = counterexample_catalog(&cfg.name, &CatalogParams::default())?;
    let mut stages = Vec::new();
    let mut t = Table::new(&["check", "value", "reference", "tolerance", "pass"]);
    for (i, c) in rep.checks.iter().enumerate() {
        stages.push(
            Stage::new(&c.label, c.pass)
                .with("value", c.value)
                .with("reference", c.reference),
        );
        t.push(vec![
            i as f64,
            c.value,
            c.reference,
            c.tolerance,
            if c.pass { 1.0 } else { 0.0 },
        ]);
    }
    let mut tables = BTreeMap::new();
    tables.insert("checks".to_string(), t);
    Ok(Outcome {
        pass: rep.pass,
        stages,
        tables,
        refine_metric: None,
    })
}

fn resolvent(cfg: &Config, nodes: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let grid = cfg.build_grid(nodes)?;
    let mut hat = vec![0.0; grid.len()];
    hat[grid.len() / 2] = 1.0;
    let mut sources = vec![
        GridFunction::from_values(&grid, hat).map_err(HarnessError::Run)?,
        GridFunction::constant(&grid, 0.0),
        GridFunction::constant(&grid, 1.0),
    ];
    for _ in 0..cfg.count {
        sources.push(sampling::random_nonneg(&grid, rng));
    }
    let rep = resolvent_view(&grid, cfg.p, &sources)?;
    let stages = vec![
        Stage::new(
            "solves stay nonnegative",
            rep.entries.iter().all(|e| e.pass),
        )
        .with("sources", sources.len() as f64),
        Stage::new("entrywise resolvent positivity", rep.cross_check.pass)
            .with("min_entry", rep.cross_check.min_entry),
    ];
    let mut t = Table::new(&["source", "min_value", "pass"]);
    for (i, e) in rep.entries.iter().enumerate() {
        t.push(vec![i as f64, e.min_value, if e.pass { 1.0 } else { 0.0 }]);
    }
    let mut tables = BTreeMap::new();
    tables.insert("entries".to_string(), t);
    Ok(Outcome {
        pass: rep.pass,
        stages,
        tables,
        refine_metric: None,
    })
}

fn run_at(experiment: &str, cfg: &Config, seed: u64, nodes: usize) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match experiment {
        "pw-identity" => pw_identity(cfg, nodes, &mut rng),
        "smoothing-abc" => smoothing_abc(cfg, nodes, &mut rng),
        "brezis-kato" => brezis_kato(cfg, nodes, &mut rng),
        "caccioppoli" => caccioppoli(cfg, nodes, &mut rng),
        "regularity" => regularity(cfg, nodes, &mut rng),
        "liouville" => liouville(cfg, nodes, &mut rng),
        "subquadratic" => subquadratic(cfg, nodes, &mut rng),
        "pp" => pp(cfg, nodes, &mut rng),
        "counterexample" => counterexample(cfg, nodes, &mut rng),
        "resolvent" => resolvent(cfg, nodes, &mut rng),
        other => Err(HarnessError::InvalidConfig(format!(
            "unknown experiment '{other}' (expected one of {EXPERIMENTS:?})"
        ))),
    }
}

/// Runs one experiment and assembles the report.
pub fn run(experiment: &str, cfg: &Config, seed: u64) -> Result<ExperimentReport> {
    let start = Instant::now();
    let outcome = run_at(experiment, cfg, seed, cfg.nodes)?;
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        experiment: experiment.to_string(),
        seed,
        config: cfg.clone(),
        verdict: if outcome.pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        stages: outcome.stages,
        tables: outcome.tables,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Reruns the experiment at `levels` grid refinements (cell count doubling
/// per level) and fits the refinement slope of its metric.
pub fn sweep(experiment: &str, cfg: &Config, seed: u64, levels: usize) -> Result<ExperimentReport> {
    if levels < 2 {
        return Err(HarnessError::InvalidConfig(format!(
            "refinement sweep needs at least 2 levels, got {levels}"
        )));
    }
    let start = Instant::now();
    let mut metrics = Vec::new();
    let mut all_pass = true;
    let mut stages = Vec::new();
    let mut table = Table::new(&["level", "nodes", "metric", "slope"]);
    for level in 0..levels {
        let nodes = cfg.nodes_at_level(level);
        let outcome = run_at(experiment, cfg, seed, nodes)?;
        all_pass &= outcome.pass;
        let metric = outcome.refine_metric;
        let slope = match (metric, metrics.last()) {
            (Some(m), Some(&prev)) if m > 0.0 => f64::log2(prev / m),
            _ => f64::NAN,
        };
        table.push(vec![
            level as f64,
            nodes as f64,
            metric.unwrap_or(f64::NAN),
            slope,
        ]);
        if let Some(m) = metric {
            metrics.push(m);
        }
        stages
            .push(Stage::new(&format!("level {level}"), outcome.pass).with("nodes", nodes as f64));
    }
    let slope_pass = if metrics.len() >= 2 {
        let mean_slope =
            (metrics[0] / metrics[metrics.len() - 1]).log2() / (metrics.len() - 1) as f64;
        stages.push(
            Stage::new("refinement slope", mean_slope >= cfg.slope_min).with("slope", mean_slope),
        );
        mean_slope >= cfg.slope_min
    } else if metrics.is_empty() {
        return Err(HarnessError::InvalidConfig(format!(
            "experiment '{experiment}' defines no refinement metric; run it without --refine"
        )));
    } else {
        true
    };
    let mut tables = BTreeMap::new();
    tables.insert("refinement".to_string(), table);
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        experiment: format!("{experiment}-sweep"),
        seed,
        config: cfg.clone(),
        verdict: if all_pass && slope_pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        stages,
        tables,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
