//! Parameter sweeps. Each (instance, k, constraint count, strategy) cell is an
//! independent job; rows come back in sweep order whatever the scheduling.

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use diva_core::io::{read_constraints, read_json, read_relation_path, read_schema_spec};
use diva_core::{
    conflict_rate, discernibility_normalized, diva, generate_constraints, is_satisfiable, AnonymizationOutcome,
    ConstraintSet, DivaConfig, Error, GeneratorSpec, Heuristic, Relation, Result, Strategy, SynthSpec,
};

use crate::{sink, BenchArgs, Verdict};

pub const COLUMNS: [&str; 9] =
    ["instance", "k", "strategy", "n_constraints", "conflict_rate", "satisfiable", "info_loss", "disc_norm", "millis"];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub instances: Vec<InstanceSpec>,
    pub k: Vec<usize>,
    #[serde(default = "all_strategies")]
    pub strategies: Vec<String>,
    /// Prefix sizes of each constraint set; the whole set when absent.
    #[serde(default)]
    pub constraint_counts: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub candidate_cap: Option<usize>,
}

fn all_strategies() -> Vec<String> {
    Heuristic::ALL.iter().map(|h| h.name().to_owned()).collect()
}

/// A relation from CSV or a synth spec, with constraints from a file or a
/// generator (re-run per k, dropping lower bounds below k).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub name: String,
    pub input: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub synth: Option<SynthSpec>,
    pub constraints: Option<PathBuf>,
    pub generator: Option<GeneratorSpec>,
}

enum Sigma {
    Fixed(ConstraintSet),
    Generated(GeneratorSpec),
}

struct Instance {
    name: String,
    relation: Relation,
    sigma: Sigma,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub k: usize,
    pub strategy: String,
    pub n_constraints: usize,
    pub conflict_rate: Option<f64>,
    /// `None` when the search gave up or the publication failed.
    pub satisfiable: Option<bool>,
    pub info_loss: Option<u64>,
    pub disc_norm: Option<f64>,
    pub millis: u128,
}

impl BenchRow {
    fn record(&self) -> Vec<String> {
        let opt = |v: Option<String>| v.unwrap_or_default();
        vec![
            self.instance.clone(),
            self.k.to_string(),
            self.strategy.clone(),
            self.n_constraints.to_string(),
            opt(self.conflict_rate.map(|c| format!("{c:.6}"))),
            opt(self.satisfiable.map(|s| s.to_string())),
            opt(self.info_loss.map(|l| l.to_string())),
            opt(self.disc_norm.map(|d| format!("{d:.6}"))),
            self.millis.to_string(),
        ]
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_owned()
    } else {
        base.join(p)
    }
}

fn load(spec: &InstanceSpec, base: &Path) -> Result<Instance> {
    let relation = match (&spec.input, &spec.schema, &spec.synth) {
        (Some(input), Some(schema), None) => {
            read_relation_path(resolve(base, input), &read_schema_spec(resolve(base, schema))?)?
        }
        (None, None, Some(s)) => diva_core::synth_generate(s)?,
        _ => {
            return Err(Error::Config(format!(
                "instance `{}` needs either input and schema, or synth",
                spec.name
            )))
        }
    };
    let sigma = match (&spec.constraints, &spec.generator) {
        (Some(c), None) => Sigma::Fixed(read_constraints(resolve(base, c))?),
        (None, Some(g)) => Sigma::Generated(g.clone()),
        _ => {
            return Err(Error::Config(format!(
                "instance `{}` needs exactly one of constraints or generator",
                spec.name
            )))
        }
    };
    Ok(Instance { name: spec.name.clone(), relation, sigma })
}

/// Runs every cell of the sweep. `base` anchors relative paths.
pub fn sweep(cfg: &BenchConfig, base: &Path) -> Result<Vec<BenchRow>> {
    if cfg.k.contains(&0) {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let heuristics = cfg.strategies.iter().map(|s| s.parse::<Heuristic>()).collect::<Result<Vec<_>>>()?;
    let instances = cfg.instances.iter().map(|s| load(s, base)).collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::new();
    for inst in &instances {
        for &k in &cfg.k {
            let full = match &inst.sigma {
                Sigma::Fixed(s) => s.clone(),
                Sigma::Generated(g) => generate_constraints(&inst.relation, g, k)?,
            };
            let counts = cfg.constraint_counts.clone().unwrap_or_else(|| vec![full.len()]);
            for n in counts {
                if n > full.len() {
                    warn!("{}: k = {k} has {} constraints, skipping count {n}", inst.name, full.len());
                    continue;
                }
                let sigma = full.prefix(n);
                for &h in &heuristics {
                    cells.push((inst, k, sigma.clone(), h));
                }
            }
        }
    }

    cells
        .into_par_iter()
        .map(|(inst, k, sigma, h)| {
            let conflict = if sigma.len() >= 2 { Some(conflict_rate::<f64>(&inst.relation, &sigma)?) } else { None };
            let mut dcfg = DivaConfig::new(k).with_strategy(Strategy::new(h, cfg.seed));
            dcfg.kmember_seed = cfg.seed;
            if let Some(cap) = cfg.candidate_cap {
                dcfg.candidate_cap = cap;
            }
            let start = Instant::now();
            let outcome = diva(&inst.relation, &sigma, dcfg);
            let millis = start.elapsed().as_millis();
            let (satisfiable, info_loss, disc_norm) = match outcome {
                Ok(AnonymizationOutcome::Published(p)) => {
                    (Some(true), Some(p.information_loss), Some(discernibility_normalized::<f64>(&p.relation)))
                }
                Ok(AnonymizationOutcome::Unsatisfiable) => (Some(false), None, None),
                Err(Error::UnsatisfiableConstraints) => (Some(false), None, None),
                Err(e @ (Error::SearchBudgetExceeded { .. } | Error::Completion(_))) => {
                    warn!("{} k={k} {h} |Σ|={}: {e}", inst.name, sigma.len());
                    (None, None, None)
                }
                Err(e) => return Err(e),
            };
            debug_assert!(satisfiable != Some(true) || is_satisfiable(&sigma));
            Ok(BenchRow {
                instance: inst.name.clone(),
                k,
                strategy: h.name().to_owned(),
                n_constraints: sigma.len(),
                conflict_rate: conflict,
                satisfiable,
                info_loss,
                disc_norm,
                millis,
            })
        })
        .collect()
}

pub fn write_rows<W: std::io::Write>(writer: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(a: &BenchArgs) -> Result<Verdict> {
    let cfg: BenchConfig = read_json(&a.config)?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let rows = match a.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| sweep(&cfg, base))?,
        None => sweep(&cfg, base)?,
    };
    write_rows(sink(a.output.as_deref())?, &rows)?;
    Ok(Verdict::Positive)
}
