//! Sensory priming: memory patterns seed stubs, observations are matched
//! against them with the harmonic value, and a match expands the stub and
//! re-primes its neighbours for the next cycle.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::calculus::harmonic_value;
use crate::error::{Error, Result};
use crate::helix::{eval_and, eval_or, Expansion, PredicateScore};
use crate::model::{CharacteristicModel, Composition, Context, Expression};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MemoryPattern {
    pub id: String,
    pub model: CharacteristicModel,
    /// Keys of the partial pattern used as a primer.
    pub stub_keys: Vec<String>,
}

impl MemoryPattern {
    pub fn stub(&self) -> Stub {
        Stub {
            pattern_id: self.id.clone(),
            model: self.model.restrict(self.stub_keys.iter().map(String::as_str)),
        }
    }

    fn shares_keys(&self, other: &MemoryPattern) -> bool {
        self.model.keys().any(|k| other.model.contains(k))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Stub {
    pub pattern_id: String,
    pub model: CharacteristicModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Source {
    #[default]
    Real,
    Virtual,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Observation {
    pub tick: u64,
    pub model: CharacteristicModel,
    #[cfg_attr(feature = "serde", serde(default))]
    pub source: Source,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CycleConfig {
    /// Subject characteristics.
    pub c_sbj: u32,
    /// Sensory capability.
    pub c_s: f64,
    /// Cognition capacity.
    pub c_c: f64,
}

impl CycleConfig {
    fn check(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.c_sbj == 0 || !positive(self.c_s) || !positive(self.c_c) {
            return Err(Error::InvalidCapacity);
        }
        Ok(())
    }
}

/// Subject characteristics over the quadratic mean of sensory capability
/// and cognition capacity, rounded up.
pub fn optimum_frequency(cfg: &CycleConfig) -> Result<u64> {
    cfg.check()?;
    let rms = libm::sqrt((cfg.c_s * cfg.c_s + cfg.c_c * cfg.c_c) / 2.0);
    let f = libm::ceil(f64::from(cfg.c_sbj) / rms);
    Ok((f as u64).max(1))
}

fn relevant(pattern: &MemoryPattern, ctx: &Context) -> bool {
    pattern.model.keys().any(|k| ctx.scales.contains_key(k))
}

/// Stubs of patterns relevant to the context (keys intersecting its scale
/// keys), by pattern id, at most `floor(capacity)` of them.
pub fn prime(memory: &[MemoryPattern], ctx: &Context, capacity: f64) -> Vec<Stub> {
    prime_with(memory, ctx, capacity, &[])
}

/// Like [`prime`], with re-priming requests from earlier expansions placed
/// ahead of the context-relevant patterns.
pub fn prime_with(memory: &[MemoryPattern], ctx: &Context, capacity: f64, requested: &[String]) -> Vec<Stub> {
    let cap = if capacity.is_finite() && capacity > 0.0 {
        libm::floor(capacity) as usize
    } else {
        0
    };
    let mut eligible: Vec<(bool, &MemoryPattern)> = memory
        .iter()
        .filter_map(|p| {
            let asked = requested.contains(&p.id);
            (asked || relevant(p, ctx)).then_some((!asked, p))
        })
        .collect();
    eligible.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.id.cmp(&b.1.id)));
    eligible.into_iter().take(cap).map(|(_, p)| p.stub()).collect()
}

/// Harmonic value of the observation, restricted to the stub's keys, with
/// the stub as the expression.
pub fn stub_score(stub: &Stub, obs: &Observation, ctx: &Context) -> f64 {
    let seen = Composition::new("observation", obs.model.restrict(stub.model.keys()));
    let reference = Expression::new(stub.pattern_id.clone(), stub.model.clone());
    harmonic_value(&seen, &reference, ctx).value
}

/// Score when it reaches the context's match threshold.
pub fn match_stub(stub: &Stub, obs: &Observation, ctx: &Context) -> Option<f64> {
    let score = stub_score(stub, obs, ctx);
    (score >= ctx.match_threshold).then_some(score)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expanded {
    pub pattern: MemoryPattern,
    /// Patterns to prime next cycle: the expanded one and every pattern
    /// sharing a key with it, by id.
    pub reprime: Vec<String>,
}

pub fn expand(pattern_id: &str, memory: &[MemoryPattern]) -> Result<Expanded> {
    let pattern = memory
        .iter()
        .find(|p| p.id == pattern_id)
        .ok_or_else(|| Error::StubNotFound(String::from(pattern_id)))?;
    let reprime: BTreeSet<String> = memory
        .iter()
        .filter(|p| p.id == pattern.id || p.shares_keys(pattern))
        .map(|p| p.id.clone())
        .collect();
    Ok(Expanded {
        pattern: pattern.clone(),
        reprime: reprime.into_iter().collect(),
    })
}

/// Imagined observation of a stored pattern.
pub fn virtual_observe(pattern: &MemoryPattern, tick: u64) -> Observation {
    Observation {
        tick,
        model: pattern.model.clone(),
        source: Source::Virtual,
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "event", rename_all = "snake_case"))]
pub enum SensoryEvent {
    Primed {
        stubs: Vec<String>,
        frequency: u64,
    },
    Matched {
        pattern: String,
        observation: usize,
        score: f64,
        source: Source,
    },
    Expanded {
        pattern: String,
        source: Source,
        reprime: Vec<String>,
    },
}

/// A match kept for delayed logical evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchRecord {
    pub tick: u64,
    pub pattern: String,
    pub score: f64,
    pub source: Source,
}

/// Priming loop of one system.
#[derive(Debug, Clone)]
pub struct SensoryLoop {
    memory: Vec<MemoryPattern>,
    config: CycleConfig,
    requests: Vec<String>,
    matches: Vec<MatchRecord>,
}

impl SensoryLoop {
    pub fn new(memory: Vec<MemoryPattern>, config: CycleConfig) -> Result<Self> {
        config.check()?;
        Ok(SensoryLoop {
            memory,
            config,
            requests: Vec::new(),
            matches: Vec::new(),
        })
    }

    pub fn memory(&self) -> &[MemoryPattern] {
        &self.memory
    }

    pub fn matches(&self) -> &[MatchRecord] {
        &self.matches
    }

    /// One priming cycle: prime, spend up to `f` stub/observation match
    /// attempts over `window`, expand every matched stub once.
    pub fn cycle(&mut self, tick: u64, ctx: &Context, window: &[Observation]) -> Vec<SensoryEvent> {
        let frequency = optimum_frequency(&self.config).expect("checked at construction");
        let requests = core::mem::take(&mut self.requests);
        let stubs = prime_with(&self.memory, ctx, self.config.c_c, &requests);
        let mut events = alloc::vec![SensoryEvent::Primed {
            stubs: stubs.iter().map(|s| s.pattern_id.clone()).collect(),
            frequency,
        }];

        let mut attempts = 0u64;
        let mut next_requests: BTreeSet<String> = BTreeSet::new();
        'stubs: for stub in &stubs {
            for (oi, obs) in window.iter().enumerate() {
                if attempts == frequency {
                    break 'stubs;
                }
                attempts += 1;
                let Some(score) = match_stub(stub, obs, ctx) else {
                    continue;
                };
                events.push(SensoryEvent::Matched {
                    pattern: stub.pattern_id.clone(),
                    observation: oi,
                    score,
                    source: obs.source,
                });
                self.matches.push(MatchRecord {
                    tick,
                    pattern: stub.pattern_id.clone(),
                    score,
                    source: obs.source,
                });
                let expanded = expand(&stub.pattern_id, &self.memory).expect("stub primed from memory");
                next_requests.extend(expanded.reprime.iter().cloned());
                events.push(SensoryEvent::Expanded {
                    pattern: stub.pattern_id.clone(),
                    source: obs.source,
                    reprime: expanded.reprime,
                });
                continue 'stubs;
            }
        }
        self.requests = next_requests.into_iter().collect();
        events
    }

    /// Operand score for `pattern`: the best match within the last
    /// `window` ticks (inclusive), or absent.
    pub fn operand(&self, pattern: &str, now: u64, window: u64) -> PredicateScore {
        let from = now.saturating_sub(window);
        self.matches
            .iter()
            .filter(|m| m.pattern == pattern && (from..=now).contains(&m.tick))
            .map(|m| m.score)
            .reduce(f64::max)
            .map(PredicateScore::from_harmonic_value)
            .unwrap_or_else(PredicateScore::absent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LogicOp {
    And,
    Or,
}

/// `operands` combined by `op`; an outcome expands when it clears zero.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LogicRule {
    pub id: String,
    pub op: LogicOp,
    pub operands: Vec<String>,
    /// Activation injected into conjunctions.
    #[cfg_attr(feature = "serde", serde(default))]
    pub inject: f64,
}

/// Evaluates `rule` over matches seen in the last `window` ticks.
pub fn evaluate_rule(rule: &LogicRule, sensory: &SensoryLoop, now: u64, window: u64) -> Result<Expansion> {
    let scores: Vec<PredicateScore> = rule
        .operands
        .iter()
        .map(|p| sensory.operand(p, now, window))
        .collect();
    match rule.op {
        LogicOp::And => eval_and(&scores, rule.inject),
        LogicOp::Or => eval_or(&scores),
    }
}
