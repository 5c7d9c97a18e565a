use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rayon::ThreadPool;
use starkskin_core::eigen::{eig_dense, spectrum_of};
use starkskin_core::model::{build_hamiltonian, decoupled_hamiltonian, Basis, Boundary};
use starkskin_core::modes::{analyze_mode, FitAmplitude, ModeAnalysis, REGION_I_THRESHOLD};
use starkskin_core::spectrum::{
    avg_lambda0_minus, branch_label, delta_e_for_spec, perturbation_bound_sum, second_order_shifts, Branch,
};
use starkskin_core::transfer::{
    convergence_ratio, geometric_mean_ratio, isse_criterion, lambda0_and_kappa, lambda_flow, ConvergenceCase,
};
use starkskin_core::{Complex64, Flow, Pair, Spec, Spectrum};

use crate::config::{Experiment, ExperimentConfig, Job, ModeSelection};
use crate::output::{num, opt, write_manifest, write_tables, RunManifest, Table};

/// Tables produced by a set of jobs plus the point-level failure tally.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub points: usize,
    pub failed: usize,
}

impl Outcome {
    fn point(&mut self, ok: bool) {
        self.points += 1;
        if !ok {
            self.failed += 1;
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.failed {
            0 => 0,
            f if f < self.points => 2,
            _ => 3,
        }
    }
}

fn status<T, E: std::fmt::Display>(r: &Result<T, E>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => format!("failed: {e}"),
    }
}

fn c(e: [f64; 2]) -> Complex64 {
    Complex64::new(e[0], e[1])
}

fn nearest(values: &[Complex64], e: Complex64) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - e).norm().total_cmp(&(b.1 - e).norm()))
        .map(|(i, _)| i)
}

const SPECTRUM_HEADER: &[&str] = &["index", "re_E", "im_E", "branch", "chainA_weight"];

fn spectrum_table(name: String, s: &Spectrum) -> Table {
    let mut t = Table::new(name, SPECTRUM_HEADER);
    for (i, p) in s.pairs.iter().enumerate() {
        let l = branch_label(&p.right);
        t.push(vec![
            i.to_string(),
            num(p.value.re),
            num(p.value.im),
            l.label.as_str().into(),
            num(l.chain_a_weight),
        ]);
    }
    t
}

fn branch_summary(name: String, s: &Spectrum) -> Table {
    let mut t = Table::new(
        name,
        &["branch", "count", "mean_chainA_weight", "mean_chainB_weight"],
    );
    for b in [Branch::Minus, Branch::Vertical] {
        let labels: Vec<_> = s
            .pairs
            .iter()
            .map(|p| branch_label(&p.right))
            .filter(|l| l.label == b)
            .collect();
        let n = labels.len() as f64;
        let (wa, wb) = labels
            .iter()
            .fold((0.0, 0.0), |acc, l| (acc.0 + l.chain_a_weight, acc.1 + l.chain_b_weight));
        t.push(vec![b.as_str().into(), labels.len().to_string(), num(wa / n), num(wb / n)]);
    }
    t
}

const FLOW_HEADER: &[&str] = &[
    "n",
    "re_lambda_plus",
    "im_lambda_plus",
    "re_lambda_minus",
    "im_lambda_minus",
    "abs_lambda_plus",
    "abs_lambda_minus",
];

fn flow_table(name: String, flow: &Flow) -> Table {
    let mut t = Table::new(name, FLOW_HEADER);
    for fc in &flow.cells {
        t.push(vec![
            fc.n().to_string(),
            num(fc.lambda_plus.re),
            num(fc.lambda_plus.im),
            num(fc.lambda_minus.re),
            num(fc.lambda_minus.im),
            num(fc.lambda_plus.norm()),
            num(fc.lambda_minus.norm()),
        ]);
    }
    t
}

fn mode_table(name: String, a: &ModeAnalysis<f64>) -> Table {
    let mut t = Table::new(name, &["n", "abs_psi_A'", "abs_psi_B'", "abs_psi_plus", "abs_psi_minus", "region"]);
    let regions = a.regions.as_ref().ok();
    for n in 1..=a.decomposition.length() {
        let cell = a.rotated.cell(n);
        let comps = a.decomposition.components(n);
        let region = regions.map_or("", |r| {
            if n < r.i_end {
                "I"
            } else if n < r.iii_start {
                "II"
            } else {
                "III"
            }
        });
        t.push(vec![
            n.to_string(),
            num(cell[0].norm()),
            num(cell[1].norm()),
            opt(comps.map(|x| x.0.norm())),
            opt(comps.map(|x| x.1.norm())),
            region.into(),
        ]);
    }
    t
}

fn abs_ratios(spec: &Spec, kappa: Complex64) -> Option<(f64, f64)> {
    let case = ConvergenceCase::of_profile(&spec.profile)?;
    let r = convergence_ratio(case, spec.t1(), spec.t2(), kappa).ok()?;
    Some((r.minus.norm(), r.plus.norm()))
}

struct Ctx<'a> {
    pool: &'a ThreadPool,
    seed: u64,
    stream: u64,
    prefix: Option<&'a str>,
}

impl Ctx<'_> {
    fn name(&self, base: &str) -> String {
        match self.prefix {
            Some(p) => format!("{p}_{base}"),
            None => base.to_string(),
        }
    }
}

fn select_modes(spec: &Spec, s: &Spectrum, sel: &ModeSelection, ctx: &Ctx) -> Vec<usize> {
    let values = s.values();
    match sel {
        ModeSelection::Indices { indices } => indices.clone(),
        ModeSelection::Nearest { energy } => nearest(&values, c(*energy)).into_iter().collect(),
        ModeSelection::Sample { count, branch } => {
            let pool: Vec<usize> = (0..s.len())
                .filter(|&i| branch.is_none_or(|b| branch_label(&s.pairs[i].right).label == b))
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            rng.set_stream(ctx.stream);
            let mut picked: Vec<usize> = pool.choose_multiple(&mut rng, *count).copied().collect();
            picked.sort_unstable();
            picked
        }
        ModeSelection::Cleanest { count } => {
            let mut scored: Vec<(f64, usize)> = (0..s.len())
                .filter(|&i| branch_label(&s.pairs[i].right).label == Branch::Minus)
                .filter_map(|i| {
                    let (kappa, _, _) = lambda0_and_kappa(values[i], spec.t2());
                    abs_ratios(spec, kappa).map(|r| (r.0, i))
                })
                .collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut picked: Vec<usize> = scored.iter().take(*count).map(|x| x.1).collect();
            picked.sort_unstable();
            picked
        }
    }
}

fn run_spectrum(spec: &Spec, decoupled: bool, with_pbc: bool, ctx: &Ctx, out: &mut Outcome) {
    let solve = |spec: &Spec| -> starkskin_core::Result<Spectrum> {
        if decoupled {
            let (h0, _) = decoupled_hamiltonian(spec)?;
            eig_dense(&h0)
        } else {
            spectrum_of(spec, Basis::Original)
        }
    };
    let mut specs = vec![("spectrum", spec.clone())];
    if with_pbc {
        specs.push(("spectrum_pbc", spec.clone().with_boundary(Boundary::Pbc)));
    }
    let results: Vec<_> = ctx.pool.install(|| specs.par_iter().map(|(_, s)| solve(s)).collect());
    for ((base, _), r) in specs.iter().zip(results) {
        out.point(r.is_ok());
        match r {
            Ok(s) => {
                out.tables.push(spectrum_table(ctx.name(base), &s));
                if *base == "spectrum" {
                    out.tables.push(branch_summary(ctx.name("branches"), &s));
                }
            }
            Err(e) => {
                eprintln!("{}: {e}", ctx.name(base));
                out.tables.push(Table::new(ctx.name(base), SPECTRUM_HEADER));
            }
        }
    }
}

const MODES_HEADER: &[&str] = &[
    "index",
    "re_E",
    "im_E",
    "branch",
    "chainA_weight",
    "i_end",
    "iii_start",
    "beta",
    "abs_lambda0_minus",
    "fit_residual",
    "region_ii_max_ratio",
    "abs_ratio_minus",
    "status",
];

fn run_modes(spec: &Spec, sel: &ModeSelection, ctx: &Ctx, out: &mut Outcome) {
    let mut summary = Table::new(ctx.name("modes"), MODES_HEADER);
    let s = match spectrum_of(spec, Basis::Original) {
        Ok(s) => s,
        Err(e) => {
            out.point(false);
            eprintln!("{}: {e}", summary.name);
            out.tables.push(summary);
            return;
        }
    };
    let picked = select_modes(spec, &s, sel, ctx);
    let analyses: Vec<_> = ctx.pool.install(|| {
        picked
            .par_iter()
            .map(|&i| {
                let p: &Pair = &s.pairs[i];
                let state = p.right_state(Basis::Original)?;
                analyze_mode(spec, p.value, &state, REGION_I_THRESHOLD, FitAmplitude::MaxSublattice)
            })
            .collect()
    });
    let mut per_mode = Vec::new();
    for (&i, a) in picked.iter().zip(analyses) {
        out.point(a.is_ok());
        let p = &s.pairs[i];
        let l = branch_label(&p.right);
        let mut row = vec![
            i.to_string(),
            num(p.value.re),
            num(p.value.im),
            l.label.as_str().into(),
            num(l.chain_a_weight),
        ];
        match &a {
            Ok(a) => {
                let r = a.regions.as_ref().ok();
                row.extend([
                    r.map(|r| r.i_end.to_string()).unwrap_or_default(),
                    r.map(|r| r.iii_start.to_string()).unwrap_or_default(),
                    opt(a.fit.map(|f| f.beta)),
                    num(a.flow.lambda0_minus.norm()),
                    opt(a.fit.map(|f| f.residual)),
                    opt(a.region_ii_max_ratio),
                    opt(abs_ratios(spec, a.flow.kappa).map(|r| r.0)),
                ]);
                per_mode.push(mode_table(ctx.name(&format!("mode_{i}")), a));
                per_mode.push(flow_table(ctx.name(&format!("flow_{i}")), &a.flow));
            }
            Err(_) => row.extend(std::iter::repeat_n(String::new(), 7)),
        }
        row.push(status(&a));
        summary.push(row);
    }
    out.tables.push(summary);
    out.tables.extend(per_mode);
}

fn resolve_energy(spec: &Spec, e: [f64; 2], snap: bool) -> starkskin_core::Result<Complex64> {
    if !snap {
        return Ok(c(e));
    }
    let values = starkskin_core::eigen::eigvals(&build_hamiltonian(spec, Basis::Original)?)?;
    Ok(values[nearest(&values, c(e)).expect("non-empty spectrum")])
}

fn run_flow(spec: &Spec, energy: [f64; 2], snap: bool, ctx: &Ctx, out: &mut Outcome) {
    let r = resolve_energy(spec, energy, snap).and_then(|e| lambda_flow(spec, e));
    out.point(r.is_ok());
    let mut summary = Table::new(
        ctx.name("flow_summary"),
        &[
            "re_E",
            "im_E",
            "re_kappa",
            "im_kappa",
            "abs_lambda0_plus",
            "abs_lambda0_minus",
            "abs_ratio_minus",
            "abs_ratio_plus",
            "status",
        ],
    );
    match &r {
        Ok(flow) => {
            let ratios = abs_ratios(spec, flow.kappa);
            summary.push(vec![
                num(flow.energy.re),
                num(flow.energy.im),
                num(flow.kappa.re),
                num(flow.kappa.im),
                num(flow.lambda0_plus.norm()),
                num(flow.lambda0_minus.norm()),
                opt(ratios.map(|r| r.0)),
                opt(ratios.map(|r| r.1)),
                status(&r),
            ]);
            out.tables.push(flow_table(ctx.name("flow"), flow));
        }
        Err(_) => {
            let mut row = vec![num(energy[0]), num(energy[1])];
            row.extend(std::iter::repeat_n(String::new(), 6));
            row.push(status(&r));
            summary.push(row);
            out.tables.push(Table::new(ctx.name("flow"), FLOW_HEADER));
        }
    }
    out.tables.push(summary);
}

fn run_delta_e(spec: &Spec, lengths: &[usize], ctx: &Ctx, out: &mut Outcome) {
    let rows: Vec<(bool, Vec<String>)> = ctx.pool.install(|| {
        lengths
            .par_iter()
            .map(|&l| {
                let s = spec.with_length(l);
                let r = delta_e_for_spec(&s);
                let second = second_order_shifts(&s)
                    .ok()
                    .map(|v| v.iter().map(|z| z.norm()).sum::<f64>() / v.len() as f64);
                let bound = perturbation_bound_sum(&s.profile, l).ok();
                let row = vec![
                    l.to_string(),
                    opt(r.as_ref().ok().map(|d| d.delta_e)),
                    opt(second),
                    opt(bound),
                    r.as_ref().map(|d| d.pairing_degenerate.to_string()).unwrap_or_default(),
                    status(&r),
                ];
                (r.is_ok(), row)
            })
            .collect()
    });
    let mut t = Table::new(
        ctx.name("delta_e"),
        &["L", "delta_e", "mean_abs_second_order", "bound_sum", "pairing_degenerate", "status"],
    );
    for (ok, row) in rows {
        out.point(ok);
        t.push(row);
    }
    out.tables.push(t);
}

fn run_lambda0(spec: &Spec, lengths: &[usize], ctx: &Ctx, out: &mut Outcome) {
    let rows: Vec<(bool, Vec<String>)> = ctx.pool.install(|| {
        lengths
            .par_iter()
            .map(|&l| {
                let r = avg_lambda0_minus(&spec.with_length(l));
                (r.is_ok(), vec![l.to_string(), opt(r.as_ref().ok().copied()), status(&r)])
            })
            .collect()
    });
    let mut t = Table::new(ctx.name("lambda0"), &["L", "mean_abs_lambda0_minus", "status"]);
    for (ok, row) in rows {
        out.point(ok);
        t.push(row);
    }
    out.tables.push(t);
}

fn run_gm(spec: &Spec, case: ConvergenceCase<f64>, t1s: &[f64], kappa_points: usize, ctx: &Ctx, out: &mut Outcome) {
    let t2 = spec.t2();
    let rows: Vec<(bool, Vec<String>, Vec<Vec<String>>)> = ctx.pool.install(|| {
        t1s.par_iter()
            .map(|&t1| {
                let r = geometric_mean_ratio(case, t1, t2);
                let row = vec![
                    num(t1),
                    opt(r.as_ref().ok().map(|g| g.minus)),
                    opt(r.as_ref().ok().map(|g| g.plus)),
                    status(&r),
                ];
                let curve = (0..kappa_points)
                    .map(|k| {
                        let kappa = -PI / 2.0 + PI * (k as f64 + 0.5) / kappa_points as f64;
                        let rr = convergence_ratio(case, t1, t2, Complex64::new(kappa, 0.0)).ok();
                        vec![
                            num(t1),
                            num(kappa),
                            opt(rr.map(|x| x.minus.norm())),
                            opt(rr.map(|x| x.plus.norm())),
                        ]
                    })
                    .collect();
                (r.is_ok(), row, curve)
            })
            .collect()
    });
    let mut t = Table::new(ctx.name("gm"), &["t1", "gm_minus", "gm_plus", "status"]);
    let mut curve = Table::new(ctx.name("ratio_curve"), &["t1", "kappa", "abs_ratio_minus", "abs_ratio_plus"]);
    for (ok, row, pts) in rows {
        out.point(ok);
        t.push(row);
        for p in pts {
            curve.push(p);
        }
    }
    out.tables.push(t);
    if kappa_points > 0 {
        out.tables.push(curve);
    }
}

fn run_isse(spec: &Spec, energy: [f64; 2], snap: bool, ctx: &Ctx, out: &mut Outcome) {
    let r = resolve_energy(spec, energy, snap).and_then(|e| isse_criterion(spec, e).map(|v| (e, v)));
    out.point(r.is_ok());
    let mut t = Table::new(
        ctx.name("isse"),
        &["L", "re_E", "im_E", "criterion", "abs_ratio_minus", "first_order_estimate", "status"],
    );
    let e = r.as_ref().map(|x| x.0).unwrap_or(c(energy));
    let ratio = abs_ratios(spec, lambda0_and_kappa(e, spec.t2()).0).map(|x| x.0);
    let gamma_l = spec.profile.gamma_at(spec.length).ok();
    let estimate = ratio.zip(gamma_l).map(|(r, g)| r / g);
    t.push(vec![
        spec.length.to_string(),
        num(e.re),
        num(e.im),
        opt(r.as_ref().ok().map(|x| x.1)),
        opt(ratio),
        opt(estimate),
        status(&r),
    ]);
    out.tables.push(t);
}

/// Runs jobs in order; points inside a job are spread over `pool` and collected
/// back in input order, so output is independent of scheduling.
pub fn execute(jobs: &[Job], seed: u64, pool: &ThreadPool) -> Outcome {
    let mut out = Outcome::default();
    for (k, job) in jobs.iter().enumerate() {
        let ctx = Ctx {
            pool,
            seed,
            stream: k as u64,
            prefix: (jobs.len() > 1).then_some(job.label.as_str()),
        };
        let spec = &job.spec;
        match &job.experiment {
            Experiment::Spectrum { decoupled, with_pbc } => run_spectrum(spec, *decoupled, *with_pbc, &ctx, &mut out),
            Experiment::Modes { select } => run_modes(spec, select, &ctx, &mut out),
            Experiment::TransferFlow { energy, snap } => run_flow(spec, *energy, *snap, &ctx, &mut out),
            Experiment::DeltaEScan { lengths } => run_delta_e(spec, lengths, &ctx, &mut out),
            Experiment::Lambda0Scan { lengths } => run_lambda0(spec, lengths, &ctx, &mut out),
            Experiment::GmScan {
                case,
                t1,
                kappa_points,
            } => run_gm(spec, *case, &t1.values(), *kappa_points, &ctx, &mut out),
            Experiment::IsseCheck { energy, snap } => run_isse(spec, *energy, *snap, &ctx, &mut out),
            Experiment::Figure { .. } => unreachable!("figures are expanded before execution"),
        }
    }
    out
}

pub struct RunReport {
    pub manifest: RunManifest,
    pub exit_code: i32,
}

/// Validates, runs and writes tables plus `manifest.json` into `dir`.
pub fn run(config: &ExperimentConfig, dir: &Path, threads: usize) -> Result<RunReport> {
    let start = Instant::now();
    let jobs = config.jobs()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building worker pool")?;
    let outcome = execute(&jobs, config.seed, &pool);
    let files = write_tables(dir, &outcome.tables)?;
    let manifest = RunManifest {
        config: serde_json::to_value(config)?,
        version: env!("CARGO_PKG_VERSION"),
        duration_ms: start.elapsed().as_millis(),
        points: outcome.points,
        failed_points: outcome.failed,
        files,
    };
    write_manifest(dir, &manifest)?;
    Ok(RunReport {
        manifest,
        exit_code: outcome.exit_code(),
    })
}
