//! Subcommand implementations. Each returns the text printed on success.

use std::fmt::Write as _;
use std::path::Path;

use edgediff_core::diffusion::forward_trajectory;
use edgediff_core::graph::{write_edge_list, Graph};
use edgediff_core::sampler::{
    edge_model_degree_affinity, edge_model_oracle, rng_from_seed, sample_degree_guided,
    sample_with_eo_control, EdgeModel, GenerationRun, SamplerMode,
};
use edgediff_core::schedule::{
    baseline_linear_schedule, expected_active_curve, gamma_library, solve_schedule,
    write_noise_schedule_csv, write_schedule_csv, BracketRule, ScheduleError, SolveReport,
    SolverConfig,
};
use edgediff_core::stats::{compute_stats, StatsReport, STAT_NAMES};
use edgediff_core::NoiseSchedule;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::args::{
    BracketArg, EvalArgs, ForwardArgs, ModelArg, SampleArgs, SamplerArgs, SolveArgs, SolverArgs,
    SweepArgs,
};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::{create_dir, read_gamma, read_graph, read_schedule, write_csv, write_file};

pub const SCHEDULE_FILE: &str = "schedule.csv";
pub const FORWARD_FILE: &str = "forward.csv";
pub const STATS_FILE: &str = "stats.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const SWEEP_FILE: &str = "eo_sweep.csv";
pub const EVAL_FILE: &str = "stats.txt";
pub const SAMPLES_DIR: &str = "samples";

const FORWARD_TAG: &str = "edgediff forward format 1";
const STATS_TAG: &str = "edgediff stats format 1";
const SUMMARY_TAG: &str = "edgediff summary format 1";
const SWEEP_TAG: &str = "edgediff eo-sweep format 1";
const RUN_TAG: &str = "# edgediff generation-run format 1\n";

/// Seed for independent stream `stream` of a run seeded with `base`.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(stream);
    rng.next_u64()
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

/// Mean and sample standard deviation of the finite entries, with their count.
pub fn mean_sd<I: IntoIterator<Item = Option<f64>>>(values: I) -> (f64, f64, usize) {
    let v: Vec<f64> = values
        .into_iter()
        .flatten()
        .filter(|x| x.is_finite())
        .collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN, 0);
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    (m, sd, v.len())
}

fn bracket_rule(b: BracketArg) -> BracketRule {
    match b {
        BracketArg::LossShrinksK => BracketRule::LossShrinksK,
        BracketArg::LossRaisesK => BracketRule::LossRaisesK,
    }
}

fn solver_setup(args: &SolverArgs, n: usize) -> Result<(Vec<f64>, SolverConfig), CliError> {
    let gamma = match &args.gamma_path {
        Some(p) => {
            let g = read_gamma(p)?;
            if g.len() != args.horizon {
                return Err(CliError::Usage(format!(
                    "{} holds {} values but --T is {}",
                    p.display(),
                    g.len(),
                    args.horizon
                )));
            }
            g
        }
        None => gamma_library(&args.gamma, args.horizon)?,
    };
    let mut cfg = SolverConfig::defaults(n, args.horizon);
    if let Some(e) = args.eps1 {
        cfg.eps1 = e;
    }
    cfg.eps2 = args.eps2;
    cfg.k_min = args.k_min;
    cfg.k_max = args.k_max;
    cfg.bracket_rule = bracket_rule(args.bracket_rule);
    cfg.validate()?;
    Ok((gamma, cfg))
}

fn record_solver(cfg: &mut RunConfig, args: &SolverArgs, solver: &SolverConfig) {
    cfg.horizon = Some(args.horizon);
    match &args.gamma_path {
        Some(p) => cfg.gamma_path = Some(path_str(p)),
        None => cfg.gamma_name = Some(args.gamma.clone()),
    }
    cfg.eps1 = Some(solver.eps1);
    cfg.eps2 = Some(solver.eps2);
    cfg.k_min = Some(solver.k_min);
    cfg.k_max = Some(solver.k_max);
    cfg.bracket_rule = Some(solver.bracket_rule.as_str().into());
}

fn solve_summary(r: &SolveReport) -> String {
    format!(
        "K = {}\nloss = {}\nalpha_bar_T = {}\niterations = {}\nconverged = {}\n",
        r.k, r.loss, r.alpha_bar_t, r.iterations, r.converged
    )
}

/// Solves, writes `schedule.csv` (also for a non-converged best candidate)
/// and fails with a solver error when the tolerances were not met.
fn solve_and_write(
    g: &Graph,
    gamma: &[f64],
    cfg: &SolverConfig,
    out: &Path,
) -> Result<SolveReport, CliError> {
    match solve_schedule(gamma, &g.degree_sequence(), cfg) {
        Ok(r) => {
            write_file(&out.join(SCHEDULE_FILE), &write_schedule_csv(&r)?)?;
            Ok(r)
        }
        Err(ScheduleError::NotConverged(best)) => {
            write_file(&out.join(SCHEDULE_FILE), &write_schedule_csv(&best)?)?;
            Err(CliError::Solver(ScheduleError::NotConverged(best)))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_solve_schedule(args: &SolveArgs, jobs: usize) -> Result<String, CliError> {
    let g = read_graph(&args.graph)?;
    let (gamma, solver) = solver_setup(&args.solver, g.node_count())?;
    let out = &args.out.out;
    create_dir(out)?;
    let mut cfg = RunConfig {
        command: "solve-schedule".into(),
        graph_path: Some(path_str(&args.graph)),
        out: path_str(out),
        jobs,
        ..Default::default()
    };
    record_solver(&mut cfg, &args.solver, &solver);
    cfg.write(out)?;
    let report = solve_and_write(&g, &gamma, &solver, out)?;
    Ok(solve_summary(&report))
}

pub fn cmd_simulate_forward(args: &ForwardArgs, jobs: usize) -> Result<String, CliError> {
    if args.num_samples == 0 {
        return Err(CliError::Usage("--num-samples must be positive".into()));
    }
    let g = read_graph(&args.graph)?;
    let out = &args.out.out;
    create_dir(out)?;
    let mut cfg = RunConfig {
        command: "simulate-forward".into(),
        graph_path: Some(path_str(&args.graph)),
        seed: Some(args.seed),
        num_samples: Some(args.num_samples),
        out: path_str(out),
        jobs,
        ..Default::default()
    };
    let sched = match &args.schedule {
        Some(p) => {
            cfg.schedule_path = Some(path_str(p));
            read_schedule(p)?.schedule
        }
        None => {
            cfg.beta_start = Some(args.beta_start);
            cfg.beta_end = Some(args.beta_end);
            let s = baseline_linear_schedule(args.horizon, args.beta_start, args.beta_end)?;
            write_file(
                &out.join(SCHEDULE_FILE),
                &write_noise_schedule_csv(&s, &g.degree_sequence()),
            )?;
            s
        }
    };
    cfg.horizon = Some(sched.horizon());
    cfg.write(out)?;

    let horizon = sched.horizon();
    let runs: Vec<Vec<(f64, f64)>> = (0..args.num_samples as u64)
        .into_par_iter()
        .map(|k| {
            forward_trajectory(&g, &sched, rng_from_seed(derive_seed(args.seed, k)))
                .map(|s| (s.graph.edge_count() as f64, s.mask.count() as f64))
                .collect()
        })
        .collect();
    let h = expected_active_curve(&g.degree_sequence(), &sched);
    let e0 = g.edge_count() as f64;
    let header: Vec<String> = [
        "t",
        "mean_edges",
        "sd_edges",
        "mean_active_nodes",
        "sd_active_nodes",
        "expected_edges",
        "expected_active_nodes",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows: Vec<Vec<String>> = (1..=horizon)
        .map(|t| {
            let (me, se, _) = mean_sd(runs.iter().map(|r| Some(r[t - 1].0)));
            let (ma, sa, _) = mean_sd(runs.iter().map(|r| Some(r[t - 1].1)));
            vec![
                t.to_string(),
                num(me),
                num(se),
                num(ma),
                num(sa),
                num(sched.alpha_bar(t) * e0),
                num(h[t - 1]),
            ]
        })
        .collect();
    write_csv(&out.join(FORWARD_FILE), FORWARD_TAG, &header, &rows)?;
    Ok(format!(
        "trajectories = {}\nT = {}\nwritten = {}\n",
        args.num_samples,
        horizon,
        out.join(FORWARD_FILE).display()
    ))
}

/// Everything `sample` and `eo-sweep` need after loading their inputs.
struct SamplerSetup {
    graph: Graph,
    sched: NoiseSchedule,
    model: Box<dyn EdgeModel>,
    mode: SamplerMode,
    cfg: RunConfig,
}

fn sampler_setup(args: &SamplerArgs, command: &str, jobs: usize) -> Result<SamplerSetup, CliError> {
    if args.num_samples == 0 {
        return Err(CliError::Usage("--num-samples must be positive".into()));
    }
    let graph = read_graph(&args.graph)?;
    let out = &args.out.out;
    create_dir(out)?;
    let mut cfg = RunConfig {
        command: command.into(),
        graph_path: Some(path_str(&args.graph)),
        model: Some(args.model.as_str().into()),
        node_correction: Some(args.node_correction),
        edge_correction: Some(args.edge_correction),
        seed: Some(args.seed),
        num_samples: Some(args.num_samples),
        out: path_str(out),
        jobs,
        ..Default::default()
    };
    let sched = match &args.schedule {
        Some(p) => {
            cfg.schedule_path = Some(path_str(p));
            let s = read_schedule(p)?.schedule;
            cfg.horizon = Some(s.horizon());
            s
        }
        None => {
            let (gamma, solver) = solver_setup(&args.solver, graph.node_count())?;
            record_solver(&mut cfg, &args.solver, &solver);
            cfg.write(out)?;
            solve_and_write(&graph, &gamma, &solver, out)?.noise_schedule()?
        }
    };
    let model: Box<dyn EdgeModel> = match args.model {
        ModelArg::Oracle => Box::new(edge_model_oracle(graph.clone())),
        ModelArg::DegreeAffinity => Box::new(edge_model_degree_affinity()),
    };
    Ok(SamplerSetup {
        graph,
        sched,
        model,
        mode: SamplerMode::new(args.node_correction, args.edge_correction),
        cfg,
    })
}

fn run_one(s: &SamplerSetup, t_start: Option<usize>, seed: u64) -> Result<GenerationRun, CliError> {
    let run = match t_start {
        Some(t) => sample_with_eo_control(&s.graph, t, s.model.as_ref(), &s.sched, s.mode, seed)?,
        None => sample_degree_guided(
            &s.graph.degree_sequence(),
            s.model.as_ref(),
            &s.sched,
            s.mode,
            seed,
        )?,
    };
    Ok(run)
}

fn summary_rows(reports: &[StatsReport]) -> Vec<(String, (f64, f64, usize))> {
    let mut rows: Vec<(String, (f64, f64, usize))> = STAT_NAMES
        .iter()
        .enumerate()
        .map(|(k, name)| {
            (
                name.to_string(),
                mean_sd(reports.iter().map(|r| r.values()[k])),
            )
        })
        .collect();
    rows.push((
        "edge_overlap".into(),
        mean_sd(reports.iter().map(|r| r.edge_overlap)),
    ));
    rows
}

pub fn cmd_sample(args: &SampleArgs, jobs: usize) -> Result<String, CliError> {
    let mut setup = sampler_setup(&args.common, "sample", jobs)?;
    let horizon = setup.sched.horizon();
    if let Some(t) = args.t_start {
        if t == 0 || t > horizon {
            return Err(CliError::Usage(format!(
                "--t-start {t} outside 1..={horizon}"
            )));
        }
    }
    setup.cfg.t_start = args.t_start;
    let out = &args.common.out.out;
    setup.cfg.write(out)?;
    let samples_dir = out.join(SAMPLES_DIR);
    create_dir(&samples_dir)?;

    let setup = &setup;
    let results: Vec<(u64, GenerationRun, StatsReport)> = (0..args.common.num_samples as u64)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(args.common.seed, k);
            let run = run_one(setup, args.t_start, seed)?;
            let stats = compute_stats(&run.final_graph, Some(&setup.graph))?;
            Ok((seed, run, stats))
        })
        .collect::<Result<_, CliError>>()?;

    let mut header = vec!["sample".to_string(), "seed".to_string()];
    header.extend(StatsReport::CSV_HEADER.split(',').map(String::from));
    let mut rows = Vec::new();
    for (k, (seed, run, stats)) in results.iter().enumerate() {
        write_file(
            &samples_dir.join(format!("sample_{k:03}.edges")),
            &write_edge_list(&run.final_graph),
        )?;
        write_file(
            &samples_dir.join(format!("sample_{k:03}_run.csv")),
            &format!("{RUN_TAG}{}", run.to_csv()),
        )?;
        let mut row = vec![k.to_string(), seed.to_string()];
        row.extend(stats.to_csv_row().split(',').map(String::from));
        rows.push(row);
    }
    write_csv(&out.join(STATS_FILE), STATS_TAG, &header, &rows)?;

    let reports: Vec<StatsReport> = results.into_iter().map(|r| r.2).collect();
    let summary = summary_rows(&reports);
    let header: Vec<String> = ["statistic", "mean", "sd", "defined"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = summary
        .iter()
        .map(|(name, (m, s, c))| vec![name.clone(), num(*m), num(*s), c.to_string()])
        .collect();
    write_csv(&out.join(SUMMARY_FILE), SUMMARY_TAG, &header, &rows)?;

    let mut text = String::new();
    for (name, (m, s, _)) in &summary {
        let _ = writeln!(text, "{name} = {} +- {}", num(*m), num(*s));
    }
    Ok(text)
}

/// Start steps `Δ, 2Δ, …` up to `T`, with `T` appended when it is not a
/// multiple of `Δ`.
pub fn sweep_starts(delta: usize, horizon: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (1..=horizon / delta).map(|k| k * delta).collect();
    if v.last() != Some(&horizon) {
        v.push(horizon);
    }
    v
}

pub fn cmd_eo_sweep(args: &SweepArgs, jobs: usize) -> Result<String, CliError> {
    if args.delta == 0 {
        return Err(CliError::Usage("--delta must be positive".into()));
    }
    let mut setup = sampler_setup(&args.common, "eo-sweep", jobs)?;
    setup.cfg.delta = Some(args.delta);
    let out = &args.common.out.out;
    setup.cfg.write(out)?;
    let starts = sweep_starts(args.delta, setup.sched.horizon());
    let per_point = args.common.num_samples;

    let setup = &setup;
    let jobs_list: Vec<(usize, usize)> = (0..starts.len())
        .flat_map(|i| (0..per_point).map(move |k| (i, k)))
        .collect();
    let reports: Vec<StatsReport> = jobs_list
        .par_iter()
        .map(|&(i, k)| {
            let seed = derive_seed(args.common.seed, ((i as u64) << 32) | k as u64);
            let run = run_one(setup, Some(starts[i]), seed)?;
            Ok(compute_stats(&run.final_graph, Some(&setup.graph))?)
        })
        .collect::<Result<_, CliError>>()?;

    let mut header = vec!["t_start".to_string(), "eo_mean".into(), "eo_sd".into()];
    for name in STAT_NAMES {
        header.push(format!("{name}_mean"));
        header.push(format!("{name}_sd"));
    }
    let mut rows = Vec::new();
    let mut text = String::from("t_start,eo_mean\n");
    for (i, &t) in starts.iter().enumerate() {
        let chunk = &reports[i * per_point..(i + 1) * per_point];
        let summary = summary_rows(chunk);
        let (eo_m, eo_s, _) = summary.last().expect("edge overlap row").1;
        let mut row = vec![t.to_string(), num(eo_m), num(eo_s)];
        for (_, (m, s, _)) in &summary[..STAT_NAMES.len()] {
            row.push(num(*m));
            row.push(num(*s));
        }
        rows.push(row);
        let _ = writeln!(text, "{t},{}", num(eo_m));
    }
    write_csv(&out.join(SWEEP_FILE), SWEEP_TAG, &header, &rows)?;
    Ok(text)
}

pub fn cmd_eval(args: &EvalArgs, jobs: usize) -> Result<String, CliError> {
    let g = read_graph(&args.graph)?;
    let reference = args.reference.as_deref().map(read_graph).transpose()?;
    if let Some(r) = &reference {
        if r.node_count() != g.node_count() {
            return Err(CliError::Mismatch(
                edgediff_core::graph::GraphError::NodeCountMismatch {
                    left: g.node_count(),
                    right: r.node_count(),
                },
            ));
        }
    }
    let report = compute_stats(&g, reference.as_ref())?;
    let out = &args.out.out;
    create_dir(out)?;
    RunConfig {
        command: "eval".into(),
        graph_path: Some(path_str(&args.graph)),
        reference_path: args.reference.as_deref().map(path_str),
        out: path_str(out),
        jobs,
        ..Default::default()
    }
    .write(out)?;
    let text = report.to_text();
    write_file(&out.join(EVAL_FILE), &text)?;
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_starts_cover_horizon() {
        assert_eq!(sweep_starts(25, 100), vec![25, 50, 75, 100]);
        assert_eq!(sweep_starts(512, 512), vec![512]);
        let s = sweep_starts(25, 512);
        assert_eq!(s.len(), 21);
        assert_eq!((s[0], s[19], s[20]), (25, 500, 512));
    }

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
        let seeds: std::collections::BTreeSet<u64> = (0..100).map(|k| derive_seed(7, k)).collect();
        assert_eq!(seeds.len(), 100);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn mean_sd_skips_undefined() {
        let (m, s, c) = mean_sd([Some(1.0), None, Some(3.0), Some(f64::NAN)]);
        assert_eq!((m, c), (2.0, 2));
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
        let (m, s, c) = mean_sd([None]);
        assert!(m.is_nan() && s.is_nan() && c == 0);
        assert_eq!(mean_sd([Some(4.0)]), (4.0, 0.0, 1));
    }
}
