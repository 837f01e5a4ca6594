//! Observation streams feeding the sensory loops.

use std::collections::BTreeMap;
use std::path::Path;

use harmonia_core::model::{Characteristic, CharacteristicModel};
use harmonia_core::sensory::{virtual_observe, Observation, Source};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scenario::{Scenario, StreamSpec};

/// One line of an observation file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationLine {
    pub system: String,
    pub tick: u64,
    #[serde(default)]
    pub source: Source,
    pub model: CharacteristicModel,
}

impl ObservationLine {
    fn observation(&self) -> Observation {
        Observation {
            tick: self.tick,
            model: self.model.clone(),
            source: self.source,
        }
    }
}

/// Reads line-delimited JSON observations. Blank lines and lines starting
/// with `#` are skipped.
pub fn read_file(path: &Path) -> Result<Vec<ObservationLine>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", n + 1))?;
        out.push(parsed);
    }
    Ok(out)
}

/// Produces each tick's observation window per system.
///
/// Order within a window: inline observations, file observations, then
/// streams in declaration order. The generator is only drawn from by noisy
/// streams.
pub struct Feed<'a> {
    scenario: &'a Scenario,
    external: &'a [ObservationLine],
    rng: ChaCha8Rng,
}

impl<'a> Feed<'a> {
    pub fn new(scenario: &'a Scenario, external: &'a [ObservationLine], seed: u64) -> Self {
        Feed {
            scenario,
            external,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn window(&mut self, tick: u64) -> BTreeMap<String, Vec<Observation>> {
        let mut out: BTreeMap<String, Vec<Observation>> = BTreeMap::new();
        for o in self.scenario.observations.iter().filter(|o| o.tick == tick) {
            out.entry(o.system.clone()).or_default().push(Observation {
                tick,
                model: o.model.clone(),
                source: o.source,
            });
        }
        for line in self.external.iter().filter(|l| l.tick == tick) {
            out.entry(line.system.clone()).or_default().push(line.observation());
        }
        for stream in &self.scenario.streams {
            match stream {
                StreamSpec::File { .. } => {}
                StreamSpec::Virtual { system, pattern, ticks } => {
                    if !ticks.contains(&tick) {
                        continue;
                    }
                    let memory = self
                        .scenario
                        .systems
                        .iter()
                        .find(|s| &s.id == system)
                        .and_then(|s| s.sensory.as_ref())
                        .map(|s| s.memory.as_slice())
                        .unwrap_or_default();
                    if let Some(p) = memory.iter().find(|p| &p.id == pattern) {
                        out.entry(system.clone()).or_default().push(virtual_observe(p, tick));
                    }
                }
                StreamSpec::Noisy {
                    system,
                    template,
                    jitter,
                    rate,
                    from,
                    until,
                } => {
                    if tick < *from || until.is_some_and(|u| tick > u) {
                        continue;
                    }
                    if !self.rng.random_bool(*rate) {
                        continue;
                    }
                    let model: CharacteristicModel = template
                        .iter()
                        .map(|c| {
                            let noise = if *jitter > 0.0 {
                                self.rng.random_range(-*jitter..=*jitter)
                            } else {
                                0.0
                            };
                            Characteristic {
                                value: c.value + noise,
                                ..c.clone()
                            }
                        })
                        .collect();
                    out.entry(system.clone()).or_default().push(Observation {
                        tick,
                        model,
                        source: Source::Real,
                    });
                }
            }
        }
        out
    }
}
