//! Strict TOML experiment configuration.
//!
//! Unknown keys are rejected by the parser (with line and column); range
//! and invariant violations are collected and reported together.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::compiler::{CompileOptions, Normalization};
use crate::error::{Error, Result};
use crate::noise::{NoiseSpec, DEFAULT_MAX_BLOCK_WEIGHT};
use crate::sampler::{RunOptions, SamplingMode, SyndromeModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Compile,
    Run,
    Sweep,
    Toy,
    Certify,
    Baseline,
}

impl Task {
    pub fn label(&self) -> &'static str {
        match self {
            Task::Compile => "compile",
            Task::Run => "run",
            Task::Sweep => "sweep",
            Task::Toy => "toy",
            Task::Certify => "certify",
            Task::Baseline => "baseline",
        }
    }

    fn needs_n(&self) -> bool {
        !matches!(self, Task::Toy)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Ideal,
    Readout,
    Cat,
}

/// Whether sweeps run the mitigated protocol, detection only, or both.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PecSetting {
    #[default]
    On,
    Off,
    Both,
}

impl PecSetting {
    pub fn values(&self) -> &'static [bool] {
        match self {
            PecSetting::On => &[true],
            PecSetting::Off => &[false],
            PecSetting::Both => &[true, false],
        }
    }
}

/// Cat register size: a fixed count or `"half"` for `n / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AncillaSize {
    Count(usize),
    Rule(AncillaRule),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AncillaRule {
    Half,
}

impl AncillaSize {
    pub fn resolve(&self, n: usize) -> usize {
        match *self {
            AncillaSize::Count(m) => m,
            AncillaSize::Rule(AncillaRule::Half) => (n / 2).max(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Integer list given as a scalar, an array, or `{ start, end, step }`
/// (inclusive).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum IntList {
    One(i64),
    Many(Vec<i64>),
    Range(IntRange),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntRange {
    start: i64,
    end: i64,
    #[serde(default = "one")]
    step: i64,
}

fn one() -> i64 {
    1
}

impl IntList {
    fn expand(self, field: &str, errors: &mut Vec<String>) -> Vec<i64> {
        match self {
            IntList::One(x) => vec![x],
            IntList::Many(v) => v,
            IntList::Range(r) => {
                if r.step <= 0 {
                    errors.push(format!("{field}.step = {} must be positive", r.step));
                    return Vec::new();
                }
                (r.start..=r.end).step_by(r.step as usize).collect()
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    task: Option<Task>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    format: Option<OutputFormat>,
    code: Option<RawCode>,
    noise: Option<RawNoise>,
    syndrome: Option<RawSyndrome>,
    sampling: Option<RawSampling>,
    toy: Option<RawToy>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCode {
    name: Option<String>,
    n: Option<IntList>,
    #[serde(rename = "T")]
    t: Option<IntList>,
    #[serde(rename = "K")]
    k: Option<i64>,
    normalization: Option<Normalization>,
    max_block_weight: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    p1: Option<f64>,
    p2: Option<f64>,
    r_max: Option<OneOrMany<f64>>,
    drift_seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSyndrome {
    model: Option<ModelKind>,
    p_m: Option<OneOrMany<f64>>,
    m_ancilla: Option<OneOrMany<AncillaSize>>,
    extraction_first_order: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    mode: Option<SamplingMode>,
    shots: Option<u64>,
    target_stderr: Option<f64>,
    min_accepted: Option<u64>,
    particles: Option<usize>,
    replicates: Option<usize>,
    pec: Option<PecSetting>,
    /// Reuse the baseline random streams for every drift value.
    common_random_numbers: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawToy {
    gamma: Option<f64>,
    gamma_t: Option<OneOrMany<f64>>,
    levels: Option<OneOrMany<f64>>,
    tau: Option<OneOrMany<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeConfig {
    pub name: String,
    pub n: Vec<usize>,
    pub t: Vec<usize>,
    pub order: usize,
    pub normalization: Normalization,
    pub max_block_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseConfig {
    pub spec: NoiseSpec,
    pub r_max: Vec<f64>,
    pub drift_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyndromeConfig {
    pub model: ModelKind,
    pub p_m: Vec<f64>,
    pub m_ancilla: Vec<AncillaSize>,
    pub extraction_first_order: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplingConfig {
    pub mode: SamplingMode,
    pub shots: u64,
    pub target_stderr: Option<f64>,
    pub min_accepted: u64,
    pub particles: usize,
    pub replicates: usize,
    pub pec: PecSetting,
    pub common_random_numbers: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ToyConfig {
    /// Error rate `gamma`; the total time is `gamma_t / gamma`.
    pub gamma: f64,
    pub gamma_t: Vec<f64>,
    pub levels: Vec<f64>,
    pub tau: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub code: CodeConfig,
    pub noise: NoiseConfig,
    pub syndrome: SyndromeConfig,
    pub sampling: SamplingConfig,
    pub toy: ToyConfig,
}

impl ExperimentConfig {
    /// Defaults for `task`, with no qubit counts.
    pub fn defaults(task: Task) -> Self {
        let run = RunOptions::default();
        ExperimentConfig {
            task,
            seed: 0,
            output: None,
            format: OutputFormat::Csv,
            code: CodeConfig {
                name: "iceberg".into(),
                n: Vec::new(),
                t: vec![1],
                order: 1,
                normalization: Normalization::default(),
                max_block_weight: DEFAULT_MAX_BLOCK_WEIGHT,
            },
            noise: NoiseConfig {
                spec: NoiseSpec::standard(),
                r_max: vec![0.0],
                drift_seed: 0,
            },
            syndrome: SyndromeConfig {
                model: ModelKind::Ideal,
                p_m: vec![1e-3],
                m_ancilla: vec![AncillaSize::Rule(AncillaRule::Half)],
                extraction_first_order: false,
            },
            sampling: SamplingConfig {
                mode: run.mode,
                shots: run.shots,
                target_stderr: None,
                min_accepted: run.min_accepted,
                particles: run.particles,
                replicates: run.replicates,
                pec: PecSetting::On,
                common_random_numbers: false,
            },
            toy: ToyConfig {
                gamma: 1.0,
                gamma_t: vec![1.0],
                levels: vec![16.0],
                tau: vec![0.1],
            },
        }
    }

    pub fn compile_options(&self) -> CompileOptions {
        CompileOptions {
            order: self.code.order,
            normalization: self.code.normalization,
            max_block_weight: self.code.max_block_weight,
            ..CompileOptions::default()
        }
    }

    pub fn run_options(&self, seed: u64) -> RunOptions {
        RunOptions {
            mode: self.sampling.mode,
            shots: self.sampling.shots,
            target_stderr: self.sampling.target_stderr,
            min_accepted: self.sampling.min_accepted,
            seed,
            particles: self.sampling.particles,
            replicates: self.sampling.replicates,
        }
    }

    /// Syndrome models of the grid for physical size `n`.
    pub fn models(&self, n: usize) -> Vec<SyndromeModel> {
        match self.syndrome.model {
            ModelKind::Ideal => vec![SyndromeModel::Ideal],
            ModelKind::Readout => self.syndrome.p_m.iter().map(|&p_m| SyndromeModel::ReadoutFlip { p_m }).collect(),
            ModelKind::Cat => self
                .syndrome
                .m_ancilla
                .iter()
                .map(|m| SyndromeModel::CatExtraction { m_ancilla: m.resolve(n) })
                .collect(),
        }
    }

    /// Re-checks every invariant (used after command-line overrides).
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        self.check(&mut errors);
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors.join("\n")))
        }
    }

    fn check(&self, errors: &mut Vec<String>) {
        let mut err = |m: String| errors.push(m);
        if self.code.name != "iceberg" {
            err(format!("code.name = {:?}: only \"iceberg\" is supported", self.code.name));
        }
        if self.task.needs_n() && self.code.n.is_empty() {
            err(format!("code.n is required for task {}", self.task.label()));
        }
        for &n in &self.code.n {
            if n < 4 || n % 2 == 1 {
                err(format!("code.n = {n}: the Iceberg code needs an even n >= 4"));
            }
            if n > 4096 {
                err(format!("code.n = {n} exceeds 4096"));
            }
        }
        if self.code.t.is_empty() {
            err("code.T must not be empty".into());
        }
        for &t in &self.code.t {
            if t == 0 {
                err("code.T = 0: the detection interval must be at least 1".into());
            }
        }
        if self.code.order == 0 {
            err("code.K = 0: use sampling.pec = \"off\" for detection only".into());
        }
        if self.code.order > 8 {
            err(format!("code.K = {} exceeds 8", self.code.order));
        }
        if !(self.code.max_block_weight > 0.0 && self.code.max_block_weight.is_finite()) {
            err(format!("code.max_block_weight = {} must be positive", self.code.max_block_weight));
        }
        for (name, v) in [("noise.p1", self.noise.spec.p1), ("noise.p2", self.noise.spec.p2)] {
            if !(0.0..1.0).contains(&v) {
                err(format!("{name} = {v} must lie in [0, 1)"));
            }
        }
        if self.noise.r_max.is_empty() {
            err("noise.r_max must not be empty".into());
        }
        for &r in &self.noise.r_max {
            if !(0.0..1.0).contains(&r) {
                err(format!("noise.r_max = {r} must lie in [0, 1)"));
            }
        }
        if self.syndrome.model == ModelKind::Readout {
            if self.syndrome.p_m.is_empty() {
                err("syndrome.p_m must not be empty".into());
            }
            for &p in &self.syndrome.p_m {
                if !(0.0..=0.5).contains(&p) {
                    err(format!("syndrome.p_m = {p} must lie in [0, 0.5]"));
                }
            }
        }
        if self.syndrome.model == ModelKind::Cat {
            if self.syndrome.m_ancilla.is_empty() {
                err("syndrome.m_ancilla must not be empty".into());
            }
            for m in &self.syndrome.m_ancilla {
                if *m == AncillaSize::Count(0) {
                    err("syndrome.m_ancilla = 0: need at least one ancilla".into());
                }
            }
        }
        if self.syndrome.extraction_first_order && self.syndrome.model != ModelKind::Cat {
            err("syndrome.extraction_first_order needs model = \"cat\"".into());
        }
        if let Some(s) = self.sampling.target_stderr {
            if !(s > 0.0) {
                err(format!("sampling.target_stderr = {s} must be positive"));
            }
        }
        if self.sampling.particles == 0 {
            err("sampling.particles must be positive".into());
        }
        if self.sampling.replicates < 2 {
            err(format!("sampling.replicates = {} must be at least 2", self.sampling.replicates));
        }
        if matches!(self.task, Task::Run | Task::Sweep) && self.sampling.shots == 0 && self.sampling.mode != SamplingMode::Population {
            err("sampling.shots must be positive".into());
        }
        if self.task == Task::Run {
            let single = self.code.n.len() <= 1
                && self.code.t.len() == 1
                && self.noise.r_max.len() == 1
                && self.models(4).len() == 1
                && self.sampling.pec != PecSetting::Both;
            if !single {
                err("task run takes a single grid point; use task sweep for lists".into());
            }
        }
        if !(self.toy.gamma > 0.0) {
            err(format!("toy.gamma = {} must be positive", self.toy.gamma));
        }
        for (name, list) in [("toy.gamma_t", &self.toy.gamma_t), ("toy.tau", &self.toy.tau)] {
            if list.is_empty() {
                err(format!("{name} must not be empty"));
            }
            for &v in list.iter() {
                if !(v > 0.0 && v.is_finite()) {
                    err(format!("{name} = {v} must be positive"));
                }
            }
        }
        for &l in &self.toy.levels {
            if !(l >= 2.0) {
                err(format!("toy.levels = {l} must be at least 2"));
            }
        }
    }
}

fn to_sizes(field: &str, v: Vec<i64>, errors: &mut Vec<String>) -> Vec<usize> {
    v.into_iter()
        .filter_map(|x| {
            if x < 0 {
                errors.push(format!("{field} = {x} must be non-negative"));
                None
            } else {
                Some(x as usize)
            }
        })
        .collect()
}

/// Parses and validates a configuration. `default_task` is used when the
/// file has no `task` key.
pub fn validate_config(text: &str, default_task: Option<Task>) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut errors = Vec::new();
    let task = match (raw.task, default_task) {
        (Some(t), Some(d)) if t != d => {
            errors.push(format!("task = {:?} conflicts with the requested task {:?}", t.label(), d.label()));
            t
        }
        (Some(t), _) | (None, Some(t)) => t,
        (None, None) => {
            return Err(Error::Config("missing field `task`".into()));
        }
    };
    let mut c = ExperimentConfig::defaults(task);
    if let Some(s) = raw.seed {
        c.seed = s;
    }
    c.output = raw.output;
    if let Some(f) = raw.format {
        c.format = f;
    }
    let code = raw.code.unwrap_or_default();
    if let Some(name) = code.name {
        c.code.name = name;
    }
    if let Some(n) = code.n {
        let v = n.expand("code.n", &mut errors);
        c.code.n = to_sizes("code.n", v, &mut errors);
        if c.code.n.is_empty() {
            errors.push("code.n must not be empty".into());
        }
    }
    if let Some(t) = code.t {
        let v = t.expand("code.T", &mut errors);
        c.code.t = to_sizes("code.T", v, &mut errors);
    }
    if let Some(k) = code.k {
        if k < 0 {
            errors.push(format!("code.K = {k} must be non-negative"));
        } else {
            c.code.order = k as usize;
        }
    }
    if let Some(nm) = code.normalization {
        c.code.normalization = nm;
    }
    if let Some(w) = code.max_block_weight {
        c.code.max_block_weight = w;
    }
    let noise = raw.noise.unwrap_or_default();
    if let Some(p) = noise.p1 {
        c.noise.spec.p1 = p;
    }
    if let Some(p) = noise.p2 {
        c.noise.spec.p2 = p;
    }
    if let Some(r) = noise.r_max {
        c.noise.r_max = r.into_vec();
    }
    if let Some(s) = noise.drift_seed {
        c.noise.drift_seed = s;
    }
    let syn = raw.syndrome.unwrap_or_default();
    if let Some(m) = syn.model {
        c.syndrome.model = m;
    }
    if let Some(p) = syn.p_m {
        c.syndrome.p_m = p.into_vec();
    }
    if let Some(m) = syn.m_ancilla {
        c.syndrome.m_ancilla = m.into_vec();
    }
    if let Some(x) = syn.extraction_first_order {
        c.syndrome.extraction_first_order = x;
    }
    let s = raw.sampling.unwrap_or_default();
    if let Some(m) = s.mode {
        c.sampling.mode = m;
    }
    if let Some(x) = s.shots {
        c.sampling.shots = x;
    }
    c.sampling.target_stderr = s.target_stderr;
    if let Some(x) = s.min_accepted {
        c.sampling.min_accepted = x;
    }
    if let Some(x) = s.particles {
        c.sampling.particles = x;
    }
    if let Some(x) = s.replicates {
        c.sampling.replicates = x;
    }
    if let Some(x) = s.pec {
        c.sampling.pec = x;
    }
    if let Some(x) = s.common_random_numbers {
        c.sampling.common_random_numbers = x;
    }
    let toy = raw.toy.unwrap_or_default();
    if let Some(g) = toy.gamma {
        c.toy.gamma = g;
    }
    if let Some(v) = toy.gamma_t {
        c.toy.gamma_t = v.into_vec();
    }
    if let Some(v) = toy.levels {
        c.toy.levels = v.into_vec();
    }
    if let Some(v) = toy.tau {
        c.toy.tau = v.into_vec();
    }
    c.check(&mut errors);
    if errors.is_empty() {
        Ok(c)
    } else {
        Err(Error::Config(errors.join("\n")))
    }
}

pub fn load_config(path: &Path, default_task: Option<Task>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    validate_config(&text, default_task)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_text(text: &str) -> String {
        match validate_config(text, None) {
            Err(Error::Config(m)) => m,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn full_config_parses() {
        let c = validate_config(
            r#"
task = "sweep"
seed = 7
[code]
n = { start = 10, end = 30, step = 10 }
T = [1, 2]
K = 1
[noise]
r_max = [0.0, 0.1]
[syndrome]
model = "cat"
m_ancilla = ["half", 4]
[sampling]
shots = 1000
pec = "both"
"#,
            None,
        )
        .unwrap();
        assert_eq!(c.code.n, vec![10, 20, 30]);
        assert_eq!(c.code.t, vec![1, 2]);
        assert_eq!(c.models(10).len(), 2);
        assert_eq!(c.models(10)[0], SyndromeModel::CatExtraction { m_ancilla: 5 });
    }

    #[test]
    fn missing_n_is_named() {
        assert!(err_text("task = \"run\"").contains("code.n"));
    }

    #[test]
    fn all_violations_listed() {
        let m = err_text("task = \"sweep\"\n[code]\nn = 10\nT = 0\n[noise]\nr_max = -0.1\n");
        assert!(m.contains("code.T = 0"), "{m}");
        assert!(m.contains("noise.r_max = -0.1"), "{m}");
    }

    #[test]
    fn unknown_key_reports_position() {
        let m = err_text("task = \"baseline\"\n[code]\nn = 10\nqubits = 4\n");
        assert!(m.contains("line 4"), "{m}");
        assert!(m.contains("qubits"), "{m}");
    }

    #[test]
    fn run_needs_single_point() {
        assert!(err_text("task = \"run\"\n[code]\nn = [4, 6]\n").contains("single grid point"));
    }
}
