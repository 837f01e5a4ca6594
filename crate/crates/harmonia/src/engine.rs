//! Deterministic tick loop.
//!
//! Each tick runs, in order: observation ingest, sensory cycles and rule
//! evaluation, state and selection per system and context, policy
//! responses (at most one transform per system), then one exchange chain
//! search. Systems are always visited in id order.

use std::collections::BTreeMap;
use std::io;

use harmonia_core::calculus::{harmonic_status, rank_compositions, StateHistory};
use harmonia_core::exchange::{detect_cycles, find_chain, trade_graph, Party};
use harmonia_core::model::{classify_composition, Composition, Context, Environment, Expression};
use harmonia_core::sensory::{evaluate_rule, SensoryEvent, SensoryLoop};
use harmonia_core::transform::{
    apply_spec, respond, ApplicationEvent, PatternMemory, Policy, ProposedAction, SystemView,
    Transition, STATE_TOLERANCE,
};

use crate::observe::Feed;
use crate::scenario::{holdings, Loaded, SensorySpec, SystemSpec};
use crate::trace::{Event, Expansion, Ranked, Sink, TraceRecord};

/// Run-time overrides from the command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub ticks: Option<u64>,
    pub seed: Option<u64>,
}

/// Mutable state of one system.
#[derive(Debug, Clone)]
pub struct SystemState {
    pub id: String,
    pub expression: Expression,
    pub contexts: Vec<Context>,
    pub policy: Policy,
    pub can_transform: bool,
    pub holdings: Vec<Composition>,
    pub environment: Option<Environment>,
    pub memory: PatternMemory,
    pub history: StateHistory,
    last_state: BTreeMap<String, f64>,
    sensory: Option<(SensoryLoop, SensorySpec)>,
}

impl SystemState {
    fn from_spec(spec: &SystemSpec, loaded: &Loaded) -> Self {
        let sc = &loaded.scenario;
        let contexts: Vec<Context> = spec
            .contexts
            .iter()
            .map(|id| sc.context(id).cloned().expect("validated context reference"))
            .collect();
        let sensory = spec.sensory.as_ref().map(|s| {
            let lp = SensoryLoop::new(s.memory.clone(), s.cycle_config()).expect("validated capacities");
            (lp, s.clone())
        });
        SystemState {
            id: spec.id.clone(),
            expression: spec.expression.clone(),
            contexts,
            policy: spec.policy,
            can_transform: spec.can_transform,
            holdings: holdings(spec),
            environment: spec
                .environment
                .as_ref()
                .map(|id| sc.environment(id).cloned().expect("validated environment reference")),
            memory: PatternMemory::new(),
            history: StateHistory::new(),
            last_state: BTreeMap::new(),
            sensory,
        }
    }

    fn remember_states(&mut self) {
        for ctx in &self.contexts {
            let s = self.state(ctx);
            self.last_state.insert(ctx.id.clone(), s);
        }
    }

    pub fn primary(&self) -> &Context {
        &self.contexts[0]
    }

    pub fn state(&self, ctx: &Context) -> f64 {
        SystemView {
            expression: &self.expression,
            context: ctx,
            compositions: &self.holdings,
        }
        .state()
    }

    /// The system as an exchange participant under its primary context.
    pub fn party(&self) -> Party {
        let mut p = Party::new(
            self.id.clone(),
            self.expression.clone(),
            self.primary().clone(),
            self.holdings.clone(),
        );
        p.can_transform = self.can_transform;
        p
    }

    /// Environment the system sits in: the declared pool plus its own
    /// holdings.
    fn surroundings(&self) -> Environment {
        let mut env = self.environment.clone().unwrap_or_else(|| Environment::new(format!("{}-env", self.id)));
        env.pool.extend(self.holdings.iter().cloned());
        env
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub ticks: u64,
    pub records: u64,
    pub chains: u64,
    pub transforms: u64,
    pub final_states: BTreeMap<String, f64>,
}

pub struct Engine<'a, S: Sink> {
    loaded: &'a Loaded,
    systems: Vec<SystemState>,
    sink: S,
    summary: Summary,
    ticks: u64,
    seed: u64,
}

impl<'a, S: Sink> Engine<'a, S> {
    pub fn new(loaded: &'a Loaded, overrides: Overrides, sink: S) -> Self {
        let sc = &loaded.scenario;
        let mut systems: Vec<SystemState> = sc.systems.iter().map(|s| SystemState::from_spec(s, loaded)).collect();
        systems.sort_by(|a, b| a.id.cmp(&b.id));
        Engine {
            loaded,
            systems,
            sink,
            summary: Summary::default(),
            ticks: overrides.ticks.unwrap_or(sc.ticks),
            seed: overrides.seed.unwrap_or(sc.seed),
        }
    }

    /// Systems in id order, as they stand before the first tick.
    pub fn systems(&self) -> &[SystemState] {
        &self.systems
    }

    fn emit(&mut self, tick: u64, system: Option<&str>, event: Event) -> io::Result<()> {
        self.summary.records += 1;
        self.sink.emit(TraceRecord {
            tick,
            system: system.map(str::to_owned),
            event,
        })
    }

    pub fn run(mut self) -> io::Result<(Summary, Vec<SystemState>, S)> {
        self.initial()?;
        let loaded = self.loaded;
        let mut feed = Feed::new(&loaded.scenario, &loaded.external, self.seed);
        for tick in 0..self.ticks {
            self.perturb(tick);
            let mut windows = feed.window(tick);
            self.sense(tick, &mut windows)?;
            self.evaluate(tick)?;
            self.respond(tick)?;
            self.exchange(tick)?;
            for sys in &mut self.systems {
                sys.remember_states();
            }
        }
        self.status()?;
        self.summary.ticks = self.ticks;
        for s in &self.systems {
            self.summary.final_states.insert(s.id.clone(), s.state(s.primary()));
        }
        Ok((self.summary, self.systems, self.sink))
    }

    fn initial(&mut self) -> io::Result<()> {
        for sys in &mut self.systems {
            sys.remember_states();
        }
        for i in 0..self.systems.len() {
            for c in 0..self.systems[i].contexts.len() {
                let sys = &self.systems[i];
                let ctx = &sys.contexts[c];
                let ranked = rank_compositions(&sys.holdings, &sys.expression, ctx);
                let values: Vec<f64> = ranked.iter().take(ctx.selection_size).map(|r| r.hv.value).collect();
                let state = sys.state(ctx);
                let (id, cid) = (sys.id.clone(), ctx.id.clone());
                self.emit(
                    0,
                    Some(&id),
                    Event::State {
                        context: cid,
                        state,
                        values,
                        initial: true,
                    },
                )?;
            }
        }
        Ok(())
    }

    /// Scheduled changes to a system's expression or holdings.
    fn perturb(&mut self, tick: u64) {
        for p in self.loaded.scenario.perturbations.iter().filter(|p| p.tick == tick) {
            let Some(sys) = self.systems.iter_mut().find(|s| s.id == p.system) else {
                continue;
            };
            if let Some(e) = &p.expression {
                sys.expression = e.clone();
            }
            sys.holdings.retain(|c| !p.remove.contains(&c.id));
            let owner = sys.id.clone();
            sys.holdings.extend(p.add.iter().cloned().map(|c| c.owned_by(owner.clone())));
        }
    }

    fn sense(&mut self, tick: u64, windows: &mut BTreeMap<String, Vec<harmonia_core::sensory::Observation>>) -> io::Result<()> {
        for i in 0..self.systems.len() {
            let id = self.systems[i].id.clone();
            let window = windows.remove(&id).unwrap_or_default();
            let ctx = self.systems[i].primary().clone();
            let Some((lp, spec)) = self.systems[i].sensory.as_mut() else {
                continue;
            };
            let events = lp.cycle(tick, &ctx, &window);
            let mut rules = Vec::new();
            for rule in &spec.rules {
                let operands = rule
                    .operands
                    .iter()
                    .map(|p| (p.clone(), lp.operand(p, tick, spec.window).score))
                    .collect();
                let e = evaluate_rule(rule, lp, tick, spec.window).expect("validated rule");
                rules.push(Expansion::Rule {
                    rule: rule.id.clone(),
                    operands,
                    outcome: e.outcome,
                    expanded: e.expanded,
                });
            }
            for ev in events {
                let event = match ev {
                    SensoryEvent::Primed { stubs, frequency } => Event::Priming { stubs, frequency },
                    SensoryEvent::Matched {
                        pattern,
                        observation,
                        score,
                        source,
                    } => Event::Expansion {
                        detail: Expansion::Matched {
                            pattern,
                            observation,
                            score,
                            source,
                        },
                    },
                    SensoryEvent::Expanded { pattern, source, reprime } => Event::Expansion {
                        detail: Expansion::Expanded { pattern, source, reprime },
                    },
                };
                self.emit(tick, Some(&id), event)?;
            }
            for detail in rules {
                self.emit(tick, Some(&id), Event::Expansion { detail })?;
            }
        }
        Ok(())
    }

    fn evaluate(&mut self, tick: u64) -> io::Result<()> {
        for i in 0..self.systems.len() {
            let env = self.systems[i].surroundings();
            for c in 0..self.systems[i].contexts.len() {
                let sys = &self.systems[i];
                let ctx = &sys.contexts[c];
                let ranked: Vec<Ranked> = rank_compositions(&sys.holdings, &sys.expression, ctx)
                    .into_iter()
                    .enumerate()
                    .map(|(rank, selected)| {
                        let comp = sys.holdings.iter().find(|h| h.id == selected.id).expect("ranked holding");
                        Ranked {
                            class: classify_composition(comp, &env, &sys.expression, ctx),
                            chosen: rank < ctx.selection_size,
                            selected,
                        }
                    })
                    .collect();
                let values: Vec<f64> = ranked.iter().filter(|r| r.chosen).map(|r| r.selected.hv.value).collect();
                let state = sys.state(ctx);
                let (id, cid) = (sys.id.clone(), ctx.id.clone());
                if c == 0 {
                    self.systems[i].history.push(tick, values.clone(), state);
                }
                self.emit(tick, Some(&id), Event::Selection { context: cid.clone(), ranked })?;
                self.emit(
                    tick,
                    Some(&id),
                    Event::State {
                        context: cid,
                        state,
                        values,
                        initial: false,
                    },
                )?;
            }
        }
        Ok(())
    }

    /// Policy responses. Each system applies at most one transform per
    /// tick: the best strictly improving proposal over all its contexts.
    fn respond(&mut self, tick: u64) -> io::Result<()> {
        for i in 0..self.systems.len() {
            let sys = &self.systems[i];
            let mut best = None;
            for ctx in &sys.contexts {
                let view = SystemView {
                    expression: &sys.expression,
                    context: ctx,
                    compositions: &sys.holdings,
                };
                let hs_after = view.state();
                let transition = Transition {
                    context_id: ctx.id.clone(),
                    hs_before: sys.last_state.get(&ctx.id).copied().unwrap_or(hs_after),
                    hs_after,
                };
                let proposal = respond(&view, &transition, sys.policy, &sys.memory)
                    .into_iter()
                    .find(|p| matches!(p.action, ProposedAction::Transform { .. }));
                if let Some(p) = proposal.filter(|p| p.predicted_delta > STATE_TOLERANCE) {
                    if best.as_ref().is_none_or(|(_, b): &(Context, harmonia_core::transform::Proposal)| p.predicted_delta > b.predicted_delta) {
                        best = Some((ctx.clone(), p));
                    }
                }
            }

            let sys = &mut self.systems[i];
            let Some((ctx, proposal)) = best else {
                continue;
            };
            let ProposedAction::Transform { spec } = proposal.action else {
                unreachable!("filtered to transforms");
            };
            let hs_before = sys.state(&ctx);
            let expression_id = sys.expression.id.clone();
            let Ok((expression, comps)) = apply_spec(&sys.expression, &sys.holdings, &spec) else {
                continue;
            };
            sys.expression = expression;
            sys.holdings = comps.into_iter().map(|c| c.owned_by(sys.id.clone())).collect();
            let hs_after = sys.state(&ctx);
            let application = ApplicationEvent {
                context_id: ctx.id.clone(),
                expression_id,
                spec: spec.clone(),
                hs_before,
                hs_after,
            };
            let pattern = sys.memory.record(&application).clone();
            let id = sys.id.clone();
            self.summary.transforms += 1;
            self.emit(
                tick,
                Some(&id),
                Event::Transform {
                    context: ctx.id.clone(),
                    spec,
                    source: proposal.source,
                    predicted_delta: proposal.predicted_delta,
                    hs_before,
                    hs_after,
                    pattern: Box::new(pattern),
                    application,
                },
            )?;
        }
        Ok(())
    }

    fn exchange(&mut self, tick: u64) -> io::Result<()> {
        let cfg = &self.loaded.scenario.exchange;
        if self.systems.len() < 2 {
            return Ok(());
        }
        let (enabled, max_depth, cycle_len) = (cfg.enabled, cfg.max_depth, cfg.cycle_max_len);
        let parties: Vec<Party> = self.systems.iter().map(SystemState::party).collect();

        if cycle_len > 0 {
            for cycle in detect_cycles(&trade_graph(&parties), cycle_len) {
                self.emit(tick, None, Event::Cycle { cycle })?;
            }
        }

        if !enabled {
            return Ok(());
        }
        let Some(chain) = find_chain(&parties, max_depth) else {
            return Ok(());
        };
        let after = chain.apply(&parties).expect("search only proposes owned moves");
        let outcome = chain.outcome().expect("accepted chains span two or more parties");
        for (sys, p) in self.systems.iter_mut().zip(after) {
            sys.holdings = p.holdings;
        }
        self.summary.chains += 1;
        self.emit(tick, None, Event::Exchange { chain, outcome })
    }

    fn status(&mut self) -> io::Result<()> {
        if self.ticks == 0 {
            return Ok(());
        }
        let to = self.ticks - 1;
        for i in 0..self.systems.len() {
            let sys = &self.systems[i];
            let status = harmonic_status(&sys.history, 0, to).ok();
            let event = Event::Status {
                from: 0,
                to,
                status,
                final_state: sys.state(sys.primary()),
                patterns: sys.memory.patterns().to_vec(),
            };
            let id = sys.id.clone();
            self.emit(to, Some(&id), event)?;
        }
        Ok(())
    }
}

/// Runs a loaded scenario into `sink`.
pub fn run<S: Sink>(loaded: &Loaded, overrides: Overrides, sink: S) -> io::Result<(Summary, Vec<SystemState>, S)> {
    Engine::new(loaded, overrides, sink).run()
}
