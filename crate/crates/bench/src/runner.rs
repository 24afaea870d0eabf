//! Suite runs: task sampling, parallel episodes and result files.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sclplan::controller::{run_episode, EpisodeConfig, EpisodeResult, GoalRefresh, Mode};
use sclplan::llm::{Backend, EmulatedBackend, Level, LiveBackend, LiveConfig, RecorderBackend, ScriptedBackend};
use sclplan::sim::{bundled_suite, Suite};

use crate::metrics::{aggregate, MetricsTable};

/// Where completions come from. Paths may contain `{mode}`, replaced by the
/// mode name, so one descriptor can serve a multi-mode run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendSpec {
    Scripted(String),
    Record { path: String, inner: Box<BackendSpec> },
    Live,
    Emulated(Level),
}

impl FromStr for BackendSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "live" {
            return Ok(BackendSpec::Live);
        }
        if let Some(level) = s.strip_prefix("emulated:") {
            return Ok(BackendSpec::Emulated(level.parse()?));
        }
        if let Some(path) = s.strip_prefix("scripted:").filter(|p| !p.is_empty()) {
            return Ok(BackendSpec::Scripted(path.into()));
        }
        if let Some(rest) = s.strip_prefix("record:") {
            let (path, inner) = match rest.split_once('@') {
                Some((p, i)) => (p, i.parse()?),
                None => (rest, BackendSpec::Live),
            };
            if path.is_empty() {
                return Err("record: needs a path".into());
            }
            if matches!(inner, BackendSpec::Record { .. }) {
                return Err("a recorder cannot wrap another recorder".into());
            }
            return Ok(BackendSpec::Record { path: path.into(), inner: Box::new(inner) });
        }
        Err(format!("unknown backend `{s}` (scripted:PATH, record:PATH[@INNER], live, emulated:LEVEL)"))
    }
}

impl BackendSpec {
    pub fn describe(&self) -> String {
        match self {
            BackendSpec::Scripted(p) => format!("scripted:{p}"),
            BackendSpec::Record { path, inner } => format!("record:{path}@{}", inner.describe()),
            BackendSpec::Live => "live".into(),
            BackendSpec::Emulated(l) => format!("emulated:{}", l.name()),
        }
    }

    pub fn open(&self, mode: Mode) -> Result<Box<dyn Backend>> {
        let path = |p: &str| PathBuf::from(p.replace("{mode}", mode.name()));
        Ok(match self {
            BackendSpec::Scripted(p) => {
                let file = path(p);
                Box::new(ScriptedBackend::load(&file).with_context(|| format!("loading script {}", file.display()))?)
            }
            BackendSpec::Record { path: p, inner } => Box::new(RecorderBackend::new(inner.open(mode)?, path(p))),
            BackendSpec::Live => Box::new(LiveBackend::new(LiveConfig::from_env()?)?),
            BackendSpec::Emulated(level) => Box::new(EmulatedBackend::new(*level)),
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub suite: String,
    pub modes: Vec<Mode>,
    pub backend: BackendSpec,
    pub repeats: usize,
    /// Seeds task sampling and the environment layout.
    pub seed: u64,
    /// Number of tasks; `None` means 10 for repeated runs and the whole suite otherwise.
    pub sample: Option<usize>,
    /// Explicit task ids; overrides sampling.
    pub tasks: Option<Vec<String>>,
    /// Give each repeat its own completion fingerprints, so scripts can vary across repeats.
    pub stochastic: bool,
    pub jobs: usize,
    pub goal_refresh: GoalRefresh,
    pub max_steps: Option<usize>,
}

impl RunConfig {
    pub fn new(suite: &str, modes: Vec<Mode>, backend: BackendSpec) -> Self {
        Self {
            suite: suite.into(),
            modes,
            backend,
            repeats: 1,
            seed: 0,
            sample: None,
            tasks: None,
            stochastic: false,
            jobs: 1,
            goal_refresh: GoalRefresh::default(),
            max_steps: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub suite: String,
    pub backend: String,
    /// Task ids in suite order.
    pub tasks: Vec<String>,
    pub results: Vec<EpisodeResult>,
    pub table: MetricsTable,
}

/// Tasks to run, in suite order.
pub fn select_tasks(suite: &Suite, count: usize, seed: u64) -> Vec<String> {
    if count >= suite.tasks.len() {
        return suite.tasks.iter().map(|t| t.id.clone()).collect();
    }
    let mut idx: Vec<usize> = (0..suite.tasks.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut chosen = idx[..count].to_vec();
    chosen.sort_unstable();
    chosen.into_iter().map(|i| suite.tasks[i].id.clone()).collect()
}

fn run_mode(suite: &Suite, tasks: &[String], mode: Mode, backend: &dyn Backend, cfg: &RunConfig) -> Result<Vec<EpisodeResult>> {
    let jobs: Vec<(String, usize)> = tasks.iter().flat_map(|t| (0..cfg.repeats).map(move |r| (t.clone(), r))).collect();
    let run = |(task, repeat): &(String, usize)| {
        let mut ec = EpisodeConfig::new(mode);
        ec.seed = cfg.seed;
        ec.sample = if cfg.stochastic { *repeat as u64 } else { 0 };
        ec.goal_refresh = cfg.goal_refresh;
        ec.budgets.max_steps = cfg.max_steps;
        run_episode(suite, task, backend, &ec).with_context(|| format!("{mode} episode on {task} (repeat {repeat})"))
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs.max(1)).build()?;
    pool.install(|| jobs.par_iter().map(run).collect())
}

pub fn run_suite(cfg: &RunConfig) -> Result<RunOutput> {
    if cfg.repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    if cfg.modes.is_empty() {
        bail!("no mode given");
    }
    let suite = bundled_suite(&cfg.suite)?;
    let count = cfg.sample.unwrap_or(if cfg.repeats > 1 { 10 } else { suite.tasks.len() });
    let tasks = match &cfg.tasks {
        Some(ids) => {
            if let Some(bad) = ids.iter().find(|id| suite.task(id).is_none()) {
                bail!("task `{bad}` is not in suite `{}`", suite.id);
            }
            ids.clone()
        }
        None => select_tasks(suite, count, cfg.seed),
    };
    let mut results = Vec::new();
    for &mode in &cfg.modes {
        let backend = cfg.backend.open(mode)?;
        results.extend(run_mode(suite, &tasks, mode, backend.as_ref(), cfg)?);
        backend.finish()?;
    }
    let table = aggregate(&results)?;
    Ok(RunOutput { suite: suite.id.clone(), backend: cfg.backend.describe(), tasks, results, table })
}

impl RunOutput {
    /// Writes `metrics.csv`, `metrics.txt` and one transcript per episode
    /// under `transcripts/<mode>/`.
    pub fn write(&self, out: &Path) -> Result<()> {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        std::fs::write(out.join("metrics.csv"), self.table.to_csv())?;
        let title = format!("suite {} | backend {} | {} tasks", self.suite, self.backend, self.tasks.len());
        std::fs::write(out.join("metrics.txt"), self.table.to_text(&title))?;
        for r in &self.results {
            let dir = out.join("transcripts").join(r.mode.name());
            std::fs::create_dir_all(&dir)?;
            r.save_transcript(&dir.join(format!("{}-s{}.jsonl", r.task_id, r.sample)))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backend_descriptors() {
        assert_eq!("live".parse::<BackendSpec>(), Ok(BackendSpec::Live));
        assert_eq!("scripted:a/{mode}.jsonl".parse::<BackendSpec>(), Ok(BackendSpec::Scripted("a/{mode}.jsonl".into())));
        assert_eq!(
            "record:x.jsonl@emulated:weak".parse::<BackendSpec>(),
            Ok(BackendSpec::Record { path: "x.jsonl".into(), inner: Box::new(BackendSpec::Emulated(Level::Weak)) })
        );
        assert!("record:x@record:y".parse::<BackendSpec>().is_err());
        assert!("emulated:genius".parse::<BackendSpec>().is_err());
        assert!("scripted:".parse::<BackendSpec>().is_err());
    }

    #[test]
    fn sampling_is_seeded_and_ordered() {
        let suite = bundled_suite("simple").unwrap();
        let a = select_tasks(suite, 10, 7);
        assert_eq!(a, select_tasks(suite, 10, 7));
        assert_ne!(a, select_tasks(suite, 10, 8));
        assert_eq!(a.len(), 10);
        let pos: Vec<usize> = a.iter().map(|t| suite.tasks.iter().position(|x| &x.id == t).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(select_tasks(suite, 100, 0).len(), suite.tasks.len());
    }
}
