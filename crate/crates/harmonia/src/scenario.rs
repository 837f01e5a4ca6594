//! Scenario files: TOML with a fixed schema version.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use harmonia_core::model::{
    CharacteristicModel, Composition, Context, Diagnostic, Environment, Expression,
    Validate,
};
use harmonia_core::sensory::{CycleConfig, LogicRule, MemoryPattern, Source};
use harmonia_core::transform::Policy;
use serde::{Deserialize, Serialize};

use crate::observe::ObservationLine;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ticks: u64,
    #[serde(default)]
    pub contexts: Vec<Context>,
    #[serde(default)]
    pub environments: Vec<Environment>,
    #[serde(default)]
    pub systems: Vec<SystemSpec>,
    #[serde(default)]
    pub exchange: ExchangeConfig,
    #[serde(default)]
    pub observations: Vec<ObservationSpec>,
    #[serde(default)]
    pub streams: Vec<StreamSpec>,
    #[serde(default)]
    pub perturbations: Vec<Perturbation>,
}

/// A scheduled outside change, applied at the start of `tick`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub tick: u64,
    pub system: String,
    #[serde(default)]
    pub expression: Option<Expression>,
    #[serde(default)]
    pub remove: Vec<String>,
    #[serde(default)]
    pub add: Vec<Composition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub id: String,
    pub expression: Expression,
    /// Context ids; the first one drives exchange and sensory evaluation.
    pub contexts: Vec<String>,
    #[serde(default)]
    pub environment: Option<String>,
    #[serde(default)]
    pub policy: Policy,
    #[serde(default = "yes")]
    pub can_transform: bool,
    #[serde(default)]
    pub compositions: Vec<Composition>,
    #[serde(default)]
    pub sensory: Option<SensorySpec>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorySpec {
    pub c_sbj: u32,
    pub c_s: f64,
    pub c_c: f64,
    /// Ticks a match stays usable as a rule operand.
    #[serde(default)]
    pub window: u64,
    #[serde(default)]
    pub memory: Vec<MemoryPattern>,
    #[serde(default)]
    pub rules: Vec<LogicRule>,
}

impl SensorySpec {
    pub fn cycle_config(&self) -> CycleConfig {
        CycleConfig {
            c_sbj: self.c_sbj,
            c_s: self.c_s,
            c_c: self.c_c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExchangeConfig {
    /// Search for and execute exchange chains each tick.
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "default_depth")]
    pub max_depth: usize,
    /// Longest trade cycle reported; 0 turns cycle detection off. Cycles
    /// are reported even when chain search is disabled.
    #[serde(default)]
    pub cycle_max_len: usize,
}

fn default_depth() -> usize {
    4
}

impl Default for ExchangeConfig {
    fn default() -> Self {
        ExchangeConfig {
            enabled: true,
            max_depth: default_depth(),
            cycle_max_len: 0,
        }
    }
}

/// One observation written inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationSpec {
    pub system: String,
    pub tick: u64,
    #[serde(default)]
    pub source: Source,
    pub model: CharacteristicModel,
}

/// Generated or external observation streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StreamSpec {
    /// Line-delimited JSON observations, path relative to the scenario.
    File { path: PathBuf },
    /// Replays a stored memory pattern as an imagined observation.
    Virtual {
        system: String,
        pattern: String,
        ticks: Vec<u64>,
    },
    /// Template observation with uniform jitter, drawn from the seeded
    /// generator.
    Noisy {
        system: String,
        template: CharacteristicModel,
        jitter: f64,
        #[serde(default = "always")]
        rate: f64,
        #[serde(default)]
        from: u64,
        #[serde(default)]
        until: Option<u64>,
    },
}

fn always() -> f64 {
    1.0
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{}", Diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

struct Diagnostics<'a>(&'a [Diagnostic]);

impl fmt::Display for Diagnostics<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} problem(s)", self.0.len())?;
        for d in self.0 {
            write!(f, "\n  {d}")?;
        }
        Ok(())
    }
}

/// A validated scenario plus external observations read at load time.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub scenario: Scenario,
    pub external: Vec<ObservationLine>,
    pub base_dir: PathBuf,
}

pub fn parse(text: &str, path: &Path) -> Result<Scenario, ScenarioError> {
    toml::from_str(text).map_err(|e| ScenarioError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load(path: &Path) -> Result<Loaded, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let scenario = parse(&text, path)?;
    let diags = scenario.diagnostics();
    if !diags.is_empty() {
        return Err(ScenarioError::Invalid(diags));
    }
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut external = Vec::new();
    let mut file_diags = Vec::new();
    for (i, stream) in scenario.streams.iter().enumerate() {
        if let StreamSpec::File { path: rel } = stream {
            let here = format!("streams[{i}].path");
            match crate::observe::read_file(&base_dir.join(rel)) {
                Ok(lines) => {
                    for (n, line) in lines.iter().enumerate() {
                        scenario.check_observation(&format!("{here}:{}", n + 1), &line.system, &line.model, &mut file_diags);
                    }
                    external.extend(lines);
                }
                Err(e) => file_diags.push(Diagnostic::new(here, e)),
            }
        }
    }
    if !file_diags.is_empty() {
        return Err(ScenarioError::Invalid(file_diags));
    }
    Ok(Loaded {
        scenario,
        external,
        base_dir,
    })
}

fn check_unique<'a>(
    ids: impl IntoIterator<Item = (String, &'a str)>,
    what: &str,
    out: &mut Vec<Diagnostic>,
) {
    let mut seen = BTreeSet::new();
    for (path, id) in ids {
        if !seen.insert(id) {
            out.push(Diagnostic::new(path, format!("duplicate {what} id `{id}`")));
        }
    }
}

impl Scenario {
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            out.push(Diagnostic::new(
                "schema_version",
                format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }

        for (i, c) in self.contexts.iter().enumerate() {
            c.validate(&format!("contexts[{i}]"), &mut out);
        }
        check_unique(
            self.contexts.iter().enumerate().map(|(i, c)| (format!("contexts[{i}].id"), c.id.as_str())),
            "context",
            &mut out,
        );

        for (i, env) in self.environments.iter().enumerate() {
            env.validate(&format!("environments[{i}]"), &mut out);
        }
        check_unique(
            self.environments.iter().enumerate().map(|(i, e)| (format!("environments[{i}].id"), e.id.as_str())),
            "environment",
            &mut out,
        );

        check_unique(
            self.systems.iter().enumerate().map(|(i, s)| (format!("systems[{i}].id"), s.id.as_str())),
            "system",
            &mut out,
        );

        // composition ids are global: exchange moves them between systems
        let held = self.systems.iter().enumerate().flat_map(|(i, s)| {
            s.compositions
                .iter()
                .enumerate()
                .map(move |(j, c)| (format!("systems[{i}].compositions[{j}].id"), c.id.as_str()))
        });
        check_unique(held, "composition", &mut out);

        let context_ids: BTreeSet<&str> = self.contexts.iter().map(|c| c.id.as_str()).collect();
        let env_ids: BTreeSet<&str> = self.environments.iter().map(|e| e.id.as_str()).collect();
        for (i, s) in self.systems.iter().enumerate() {
            let path = format!("systems[{i}]");
            if s.id.is_empty() {
                out.push(Diagnostic::new(format!("{path}.id"), "id must be non-empty"));
            }
            s.expression.validate(&format!("{path}.expression"), &mut out);
            if s.contexts.is_empty() {
                out.push(Diagnostic::new(format!("{path}.contexts"), "at least one context is required"));
            }
            for (j, ctx) in s.contexts.iter().enumerate() {
                if !context_ids.contains(ctx.as_str()) {
                    out.push(Diagnostic::new(
                        format!("{path}.contexts[{j}]"),
                        format!("unknown context `{ctx}`"),
                    ));
                }
            }
            if let Some(env) = &s.environment {
                if !env_ids.contains(env.as_str()) {
                    out.push(Diagnostic::new(
                        format!("{path}.environment"),
                        format!("unknown environment `{env}`"),
                    ));
                }
            }
            for (j, c) in s.compositions.iter().enumerate() {
                let here = format!("{path}.compositions[{j}]");
                c.validate(&here, &mut out);
                if let Some(owner) = &c.owner {
                    if owner != &s.id {
                        out.push(Diagnostic::new(
                            format!("{here}.owner"),
                            format!("held by `{}` but owned by `{owner}`", s.id),
                        ));
                    }
                }
            }
            if let Some(sensory) = &s.sensory {
                check_sensory(sensory, &format!("{path}.sensory"), &mut out);
            }
        }

        let system_ids: BTreeSet<&str> = self.systems.iter().map(|s| s.id.as_str()).collect();
        let mut all_held: BTreeSet<&str> = self
            .systems
            .iter()
            .flat_map(|s| s.compositions.iter().map(|c| c.id.as_str()))
            .collect();
        for (i, p) in self.perturbations.iter().enumerate() {
            let path = format!("perturbations[{i}]");
            if !system_ids.contains(p.system.as_str()) {
                out.push(Diagnostic::new(format!("{path}.system"), format!("unknown system `{}`", p.system)));
            }
            if let Some(e) = &p.expression {
                e.validate(&format!("{path}.expression"), &mut out);
            }
            // an id removed here may come back in the same perturbation
            for id in &p.remove {
                all_held.remove(id.as_str());
            }
            for (j, c) in p.add.iter().enumerate() {
                let here = format!("{path}.add[{j}]");
                c.validate(&here, &mut out);
                if !all_held.insert(c.id.as_str()) {
                    out.push(Diagnostic::new(format!("{here}.id"), format!("duplicate composition id `{}`", c.id)));
                }
            }
        }

        if self.exchange.max_depth == 0 {
            out.push(Diagnostic::new("exchange.max_depth", "max_depth must be >= 1"));
        }

        for (i, o) in self.observations.iter().enumerate() {
            self.check_observation(&format!("observations[{i}]"), &o.system, &o.model, &mut out);
        }
        for (i, stream) in self.streams.iter().enumerate() {
            let path = format!("streams[{i}]");
            match stream {
                StreamSpec::File { .. } => {}
                StreamSpec::Virtual { system, pattern, .. } => {
                    match self.sensory_of(system) {
                        None => out.push(Diagnostic::new(
                            format!("{path}.system"),
                            format!("`{system}` is not a system with a sensory loop"),
                        )),
                        Some(sensory) => {
                            if !sensory.memory.iter().any(|p| &p.id == pattern) {
                                out.push(Diagnostic::new(
                                    format!("{path}.pattern"),
                                    format!("unknown memory pattern `{pattern}`"),
                                ));
                            }
                        }
                    }
                }
                StreamSpec::Noisy {
                    system,
                    template,
                    jitter,
                    rate,
                    ..
                } => {
                    self.check_observation(&path, system, template, &mut out);
                    if !(jitter.is_finite() && *jitter >= 0.0) {
                        out.push(Diagnostic::new(format!("{path}.jitter"), "jitter must be finite and >= 0"));
                    }
                    if !(0.0..=1.0).contains(rate) {
                        out.push(Diagnostic::new(format!("{path}.rate"), "rate must lie in [0, 1]"));
                    }
                }
            }
        }
        out
    }

    fn sensory_of(&self, system: &str) -> Option<&SensorySpec> {
        self.systems.iter().find(|s| s.id == system)?.sensory.as_ref()
    }

    fn check_observation(&self, path: &str, system: &str, model: &CharacteristicModel, out: &mut Vec<Diagnostic>) {
        if self.sensory_of(system).is_none() {
            out.push(Diagnostic::new(
                format!("{path}.system"),
                format!("`{system}` is not a system with a sensory loop"),
            ));
        }
        model.validate(&format!("{path}.model"), out);
    }

    pub fn context(&self, id: &str) -> Option<&Context> {
        self.contexts.iter().find(|c| c.id == id)
    }

    pub fn environment(&self, id: &str) -> Option<&Environment> {
        self.environments.iter().find(|e| e.id == id)
    }
}

fn check_sensory(s: &SensorySpec, path: &str, out: &mut Vec<Diagnostic>) {
    if s.c_sbj == 0 {
        out.push(Diagnostic::new(format!("{path}.c_sbj"), "must be >= 1"));
    }
    for (name, v) in [("c_s", s.c_s), ("c_c", s.c_c)] {
        if !(v.is_finite() && v > 0.0) {
            out.push(Diagnostic::new(format!("{path}.{name}"), "must be finite and > 0"));
        }
    }
    check_unique(
        s.memory.iter().enumerate().map(|(i, p)| (format!("{path}.memory[{i}].id"), p.id.as_str())),
        "memory pattern",
        out,
    );
    for (i, p) in s.memory.iter().enumerate() {
        let here = format!("{path}.memory[{i}]");
        p.model.validate(&format!("{here}.model"), out);
        if p.stub_keys.is_empty() {
            out.push(Diagnostic::new(format!("{here}.stub_keys"), "stub must be non-empty"));
        }
        for (j, k) in p.stub_keys.iter().enumerate() {
            if !p.model.contains(k) {
                out.push(Diagnostic::new(
                    format!("{here}.stub_keys[{j}]"),
                    format!("`{k}` is not a key of the pattern"),
                ));
            }
        }
    }
    let patterns: BTreeSet<&str> = s.memory.iter().map(|p| p.id.as_str()).collect();
    check_unique(
        s.rules.iter().enumerate().map(|(i, r)| (format!("{path}.rules[{i}].id"), r.id.as_str())),
        "rule",
        out,
    );
    for (i, r) in s.rules.iter().enumerate() {
        let here = format!("{path}.rules[{i}]");
        if r.operands.is_empty() {
            out.push(Diagnostic::new(format!("{here}.operands"), "at least one operand is required"));
        }
        for (j, op) in r.operands.iter().enumerate() {
            if !patterns.contains(op.as_str()) {
                out.push(Diagnostic::new(
                    format!("{here}.operands[{j}]"),
                    format!("unknown memory pattern `{op}`"),
                ));
            }
        }
        if !(r.inject.is_finite() && r.inject >= 0.0) {
            out.push(Diagnostic::new(format!("{here}.inject"), "inject must be finite and >= 0"));
        }
    }
}

/// Owned compositions per system id, owner filled in.
pub fn holdings(s: &SystemSpec) -> Vec<Composition> {
    s.compositions
        .iter()
        .cloned()
        .map(|c| c.owned_by(s.id.clone()))
        .collect()
}
