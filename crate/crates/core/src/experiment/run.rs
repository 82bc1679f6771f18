//! Task drivers: each turns a validated configuration into rows.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ExperimentConfig, OutputFormat, Task};
use super::output::{completed_points, BlockRow, CertifyRow, CostRow, Kind, Sink, SweepRow, ToyRow};
use crate::analytics::{
    perturbative_bound_b1, pure_pec_cost, toy_b_single_shot, toy_model_a, toy_model_b, total_cost_qedpec, zeno_separation,
    CycleCost, ToyParams,
};
use crate::clifford::{build_ghz_logical_circuit, GhzBenchmark};
use crate::code::trivial_syndrome_probability;
use crate::compiler::certify::{certify_block, end_to_end_bound, CertifyOptions};
use crate::compiler::{compile_propagated, propagate_faults, CompiledBlock, PropagatedFault};
use crate::error::{Error, Result};
use crate::noise::block_faults_with_limit;
use crate::sampler::plan::derive_seed;
use crate::sampler::{run, ExecutionPlan, ProtocolSpec, SyndromeModel};

/// Where and how a task writes its rows.
#[derive(Clone, Debug, Default)]
pub struct RunControl {
    pub out: Option<PathBuf>,
    /// Skip sweep points already present in `out`.
    pub resume: bool,
    /// Also write each compiled table and the circuit as text files here.
    pub tables_dir: Option<PathBuf>,
}

/// Outcome counts of one task.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub rows: usize,
    pub skipped: usize,
    pub failed: usize,
}

/// A compiled `(n, T)` point with its propagated faults.
pub struct CompiledPoint {
    pub bench: GhzBenchmark,
    pub blocks: Vec<CompiledBlock>,
    pub props: Vec<Vec<PropagatedFault>>,
}

pub fn compile_point(cfg: &ExperimentConfig, n: usize, t: usize) -> Result<CompiledPoint> {
    let bench = build_ghz_logical_circuit(n, t)?;
    let opts = cfg.compile_options();
    let spec = cfg.noise.spec;
    let out = (0..bench.circuit.num_blocks())
        .into_par_iter()
        .map(|k| {
            let f = block_faults_with_limit(&bench.circuit, k, &spec, opts.max_block_weight)?;
            let props = propagate_faults(&bench.circuit, k, &f, &bench.code)?;
            let c = compile_propagated(k, &props, n, &opts)?;
            Ok((c, props))
        })
        .collect::<Result<Vec<_>>>()?;
    let (blocks, props) = out.into_iter().unzip();
    Ok(CompiledPoint { bench, blocks, props })
}

fn grid_nt(cfg: &ExperimentConfig) -> Vec<(usize, usize)> {
    cfg.code.n.iter().flat_map(|&n| cfg.code.t.iter().map(move |&t| (n, t))).collect()
}

pub fn block_rows(cfg: &ExperimentConfig, tables_dir: Option<&Path>) -> Result<Vec<BlockRow>> {
    let mut rows = Vec::new();
    for (n, t) in grid_nt(cfg) {
        let p = compile_point(cfg, n, t)?;
        if let Some(dir) = tables_dir {
            let sub = dir.join(format!("n{n}_T{t}_K{}", cfg.code.order));
            std::fs::create_dir_all(&sub)?;
            std::fs::write(sub.join("circuit.txt"), p.bench.circuit.to_text())?;
            for b in &p.blocks {
                std::fs::write(sub.join(format!("block{:04}.table", b.block)), b.table.to_text())?;
            }
        }
        let s = p.bench.code.num_generators();
        for (b, props) in p.blocks.iter().zip(&p.props) {
            rows.push(BlockRow {
                n,
                t,
                k: cfg.code.order,
                block: b.block,
                num_faults: b.num_faults,
                total_weight: b.total_weight,
                branches_visited: b.reduced.branches_visited as u64,
                branches_accepted: b.reduced.branches_accepted as u64,
                num_entries: b.table.entries.len(),
                gamma: b.table.gamma,
                p_success: b.table.p_success,
                p_accept_exact: trivial_syndrome_probability(props.iter().map(|f| (f.mask, f.weight)), s),
            });
        }
    }
    Ok(rows)
}

pub fn cost_rows(cfg: &ExperimentConfig) -> Result<Vec<CostRow>> {
    let spec = cfg.noise.spec;
    let mut rows = Vec::new();
    for &n in &cfg.code.n {
        let pure = pure_pec_cost(n, &spec)?;
        for &t in &cfg.code.t {
            let mut row = CostRow {
                n,
                t: Some(t),
                k: Some(cfg.code.order),
                blocks: None,
                gamma_total: None,
                p_success_total: None,
                cost_total: None,
                cost_postselect: None,
                cost_gamma2: None,
                pure_pec: pure,
                ratio: None,
                b1: perturbative_bound_b1(n, t, &spec).ok(),
                status: "ok".into(),
                message: String::new(),
            };
            match compile_point(cfg, n, t).and_then(|p| {
                let cycles: Vec<CycleCost> = p.blocks.iter().map(|b| CycleCost::from(&b.table)).collect();
                Ok((p.blocks.len(), total_cost_qedpec(&cycles)?, cycles))
            }) {
                Ok((nb, c, cycles)) => {
                    row.blocks = Some(nb);
                    row.gamma_total = Some(cycles.iter().map(|c| c.gamma).product());
                    row.p_success_total = Some(cycles.iter().map(|c| c.p_success).product());
                    row.cost_total = Some(c.total);
                    row.cost_postselect = Some(c.postselect);
                    row.cost_gamma2 = Some(c.gamma2);
                    row.ratio = Some(c.total / pure);
                }
                Err(e) => {
                    row.status = status_of(&e).into();
                    row.message = e.to_string();
                }
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn toy_rows(cfg: &ExperimentConfig) -> Result<Vec<ToyRow>> {
    let g = cfg.toy.gamma;
    let mut rows = Vec::new();
    for &gt in &cfg.toy.gamma_t {
        for &levels in &cfg.toy.levels {
            for &tau in &cfg.toy.tau {
                let p = ToyParams {
                    gamma: g,
                    t_total: gt / g,
                    tau,
                    levels,
                };
                let a = toy_model_a(&p)?;
                let b = toy_model_b(&p)?;
                rows.push(ToyRow {
                    gamma: g,
                    gamma_t: gt,
                    levels,
                    tau,
                    a_p_success: a.p_success,
                    a_gamma: a.gamma_a,
                    a_log_exact: a.log_postselect + a.log_gamma2,
                    a_expanded_log: a.expanded_log,
                    a_log_postselect: a.log_postselect,
                    a_log_gamma2: a.log_gamma2,
                    b_log_exact: b.exact.ln(),
                    b_expanded_log: b.expanded_log,
                    b_single_shot: toy_b_single_shot(gt),
                    zeno_separation: zeno_separation(levels, gt),
                });
            }
        }
    }
    Ok(rows)
}

pub fn certify_rows(cfg: &ExperimentConfig) -> Result<Vec<CertifyRow>> {
    let opts = CertifyOptions::default();
    let mut rows = Vec::new();
    for (n, t) in grid_nt(cfg) {
        let p = compile_point(cfg, n, t)?;
        let certs = p
            .blocks
            .par_iter()
            .zip(p.props.par_iter())
            .map(|(b, props)| certify_block(b, props, &opts))
            .collect::<Result<Vec<_>>>()?;
        let eps: Option<Vec<f64>> = certs.iter().map(|c| c.epsilon).collect();
        let e2e = eps.map(|e| end_to_end_bound(&e));
        for c in certs {
            rows.push(CertifyRow {
                n,
                t,
                k: cfg.code.order,
                block: c.block,
                num_faults: c.num_faults,
                total_weight: c.total_weight,
                gamma: c.gamma,
                p_success: c.p_success,
                zeta: c.zeta,
                max_low_degree_residue: c.max_low_degree_residue,
                eta: c.eta,
                epsilon: c.epsilon,
                w_scale: c.w_scale,
                end_to_end: e2e,
            });
        }
    }
    Ok(rows)
}

/// One Monte Carlo grid point before execution.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub n: usize,
    pub t: usize,
    pub model: SyndromeModel,
    pub r_max: f64,
    pub pec: bool,
    pub seed: u64,
}

/// Grid in the order `n, T, model, pec, r_max`. With common random numbers
/// every drift value reuses the stream of the first one.
pub fn sweep_points(cfg: &ExperimentConfig) -> Vec<SweepPoint> {
    let mut pts = Vec::new();
    let mut stream = 0u64;
    for &n in &cfg.code.n {
        for &t in &cfg.code.t {
            for model in cfg.models(n) {
                for &pec in cfg.sampling.pec.values() {
                    for &r_max in &cfg.noise.r_max {
                        let index = pts.len();
                        let key = if cfg.sampling.common_random_numbers { stream } else { index as u64 };
                        pts.push(SweepPoint {
                            index,
                            n,
                            t,
                            model,
                            r_max,
                            pec,
                            seed: derive_seed(cfg.seed, key),
                        });
                    }
                    stream += 1;
                }
            }
        }
    }
    pts
}

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::Validity { .. } => "validity",
        Error::NoData => "no_data",
        _ => "error",
    }
}

pub fn protocol_spec(cfg: &ExperimentConfig, p: &SweepPoint) -> ProtocolSpec {
    ProtocolSpec {
        n: p.n,
        t: p.t,
        noise: cfg.noise.spec,
        compile: cfg.compile_options(),
        model: p.model,
        pec: p.pec,
        r_max: p.r_max,
        drift_seed: cfg.noise.drift_seed,
        extraction_first_order: cfg.syndrome.extraction_first_order,
    }
}

/// Compiles and samples one point. Failures become rows with a status.
pub fn run_point(cfg: &ExperimentConfig, p: &SweepPoint) -> SweepRow {
    let (p_m, m_ancilla) = match p.model {
        SyndromeModel::Ideal => (None, None),
        SyndromeModel::ReadoutFlip { p_m } => (Some(p_m), None),
        SyndromeModel::CatExtraction { m_ancilla } => (None, Some(m_ancilla)),
    };
    let mut row = SweepRow {
        point: p.index,
        n: p.n,
        t: p.t,
        k: cfg.code.order,
        model: p.model.label().into(),
        p_m,
        m_ancilla,
        r_max: p.r_max,
        pec: p.pec,
        mode: cfg.sampling.mode.label().into(),
        seed: p.seed,
        estimate: None,
        stderr: None,
        infidelity: None,
        n_attempted: 0,
        n_accepted: 0,
        p_accept: None,
        p_accept_stderr: None,
        p_accept_ideal: f64::NAN,
        gamma_total: f64::NAN,
        cost_ideal: f64::NAN,
        cost_observed: None,
        pure_pec: pure_pec_cost(p.n, &cfg.noise.spec).unwrap_or(f64::NAN),
        status: "ok".into(),
        message: String::new(),
        wall_time_s: 0.0,
    };
    let plan = match ExecutionPlan::for_protocol(&protocol_spec(cfg, p)) {
        Ok((plan, _)) => plan,
        Err(e) => {
            row.status = status_of(&e).into();
            row.message = e.to_string();
            return row;
        }
    };
    row.p_accept_ideal = plan.p_accept_ideal();
    row.gamma_total = plan.gamma_total;
    row.cost_ideal = plan.gamma_total.powi(2) / row.p_accept_ideal;
    match run(&plan, &cfg.run_options(p.seed)) {
        Ok(r) => {
            row.mode = r.mode.label().into();
            row.estimate = Some(r.estimate);
            row.stderr = Some(r.stderr);
            row.infidelity = Some(1.0 - r.estimate);
            row.n_attempted = r.n_attempted;
            row.n_accepted = r.n_accepted;
            row.p_accept = Some(r.p_accept);
            row.p_accept_stderr = Some(r.p_accept_stderr);
            row.cost_observed = Some(r.cost_observed);
            row.wall_time_s = r.wall_time_s;
        }
        Err(e) => {
            row.status = status_of(&e).into();
            row.message = e.to_string();
        }
    }
    row
}

fn emit<T: serde::Serialize>(kind: Kind, cfg: &ExperimentConfig, ctl: &RunControl, rows: Vec<T>, failed: usize) -> Result<Summary> {
    let mut sink = Sink::open(kind, cfg.format, ctl.out.as_deref(), false)?;
    let n = rows.len();
    for r in rows {
        sink.push(r)?;
    }
    sink.finish()?;
    Ok(Summary {
        rows: n,
        skipped: 0,
        failed,
    })
}

/// Runs the configured task, writing rows to `ctl.out` (stdout if unset).
pub fn run_config(cfg: &ExperimentConfig, ctl: &RunControl) -> Result<Summary> {
    cfg.validate()?;
    match cfg.task {
        Task::Compile => emit(Kind::Blocks, cfg, ctl, block_rows(cfg, ctl.tables_dir.as_deref())?, 0),
        Task::Baseline => {
            let rows = cost_rows(cfg)?;
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            emit(Kind::Costs, cfg, ctl, rows, failed)
        }
        Task::Toy => emit(Kind::Toy, cfg, ctl, toy_rows(cfg)?, 0),
        Task::Certify => emit(Kind::Certify, cfg, ctl, certify_rows(cfg)?, 0),
        Task::Run | Task::Sweep => {
            let resume = ctl.resume && cfg.format == OutputFormat::Csv && ctl.out.is_some();
            let done = match (&ctl.out, resume) {
                (Some(p), true) => completed_points(p)?,
                _ => Default::default(),
            };
            let mut sink = Sink::open(Kind::Sweep, cfg.format, ctl.out.as_deref(), resume)?;
            let mut s = Summary::default();
            for p in sweep_points(cfg) {
                if done.contains(&p.index) {
                    s.skipped += 1;
                    continue;
                }
                let row = run_point(cfg, &p);
                if row.status != "ok" {
                    s.failed += 1;
                }
                sink.push(row)?;
                s.rows += 1;
            }
            sink.finish()?;
            Ok(s)
        }
    }
}
