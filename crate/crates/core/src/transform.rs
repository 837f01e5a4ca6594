//! Simplification and enrichment of compositions and expressions, the
//! positive-pattern ledger, and Reactive/Active response policies.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::calculus::{pair_contributions, system_state};
use crate::error::{Error, Result};
use crate::model::{Characteristic, CharacteristicModel, Composition, Context, Expression, Role};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Tolerance for "maintained or improved".
pub const STATE_TOLERANCE: f64 = 1e-12;

/// Reduces granularity: drops keys, then optionally decomposes the rest.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Simplification {
    /// Composition or expression id the transform applies to.
    pub source: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub drop_keys: Vec<String>,
    /// When non-empty, must partition the keys left after dropping.
    #[cfg_attr(feature = "serde", serde(default))]
    pub groups: Vec<Vec<String>>,
}

/// Increases granularity: merges compositions and adds characteristics.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Enrichment {
    pub merge_ids: Vec<String>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub add: Vec<Characteristic>,
    /// Rename colliding merged keys to `key@composition` instead of failing.
    #[cfg_attr(feature = "serde", serde(default))]
    pub rename_collisions: bool,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub result_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum TransformSpec {
    Simplify(Simplification),
    Enrich(Enrichment),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SpecKind {
    Simplify,
    Enrich,
}

impl TransformSpec {
    pub fn kind(&self) -> SpecKind {
        match self {
            TransformSpec::Simplify(_) => SpecKind::Simplify,
            TransformSpec::Enrich(_) => SpecKind::Enrich,
        }
    }
}

fn require_keys<'a>(model: &CharacteristicModel, keys: impl IntoIterator<Item = &'a String>) -> Result<()> {
    for key in keys {
        if !model.contains(key) {
            return Err(Error::KeyNotFound { key: key.clone() });
        }
    }
    Ok(())
}

/// Drops `spec.drop_keys` and, when groups are given, decomposes the rest
/// into one composition per group (ids `source.1`, `source.2`, ...).
pub fn simplify(c: &Composition, spec: &Simplification) -> Result<Vec<Composition>> {
    require_keys(&c.model, &spec.drop_keys)?;
    let rest = c.model.without(spec.drop_keys.iter().map(String::as_str));
    if spec.groups.is_empty() {
        return Ok(alloc::vec![Composition {
            id: c.id.clone(),
            model: rest,
            owner: c.owner.clone(),
        }]);
    }

    let mut seen = BTreeSet::new();
    for group in &spec.groups {
        require_keys(&c.model, group)?;
        if group.is_empty() {
            return Err(Error::InvalidPartition);
        }
        for key in group {
            if !rest.contains(key) || !seen.insert(key.as_str()) {
                return Err(Error::InvalidPartition);
            }
        }
    }
    if seen.len() != rest.len() {
        return Err(Error::InvalidPartition);
    }
    Ok(spec
        .groups
        .iter()
        .enumerate()
        .map(|(i, group)| Composition {
            id: format!("{}.{}", c.id, i + 1),
            model: rest.restrict(group.iter().map(String::as_str)),
            owner: c.owner.clone(),
        })
        .collect())
}

/// Drops expression keys. Expressions cannot be decomposed.
pub fn simplify_expression(e: &Expression, spec: &Simplification) -> Result<Expression> {
    if !spec.groups.is_empty() {
        return Err(Error::InvalidPartition);
    }
    require_keys(&e.model, &spec.drop_keys)?;
    Ok(Expression {
        id: e.id.clone(),
        model: e.model.without(spec.drop_keys.iter().map(String::as_str)),
    })
}

fn union_into(
    model: &mut CharacteristicModel,
    incoming: &CharacteristicModel,
    origin: &str,
    rename: bool,
) -> Result<()> {
    let renamed: Vec<&str> = incoming
        .keys()
        .filter(|k| model.contains(k))
        .collect();
    if !rename {
        if let Some(key) = renamed.first() {
            return Err(Error::KeyCollision { key: (*key).into() });
        }
    }
    let rekey = |key: &str| -> String {
        if renamed.contains(&key) {
            format!("{key}@{origin}")
        } else {
            key.into()
        }
    };
    for c in incoming {
        let mut c = c.clone();
        c.key = rekey(&c.key);
        c.role_target = c.role_target.as_deref().map(rekey);
        model.push(c)?;
    }
    Ok(())
}

/// Merges `cs` in order and appends `spec.add`.
pub fn enrich(cs: &[Composition], spec: &Enrichment) -> Result<Composition> {
    let first = cs.first().ok_or(Error::NothingToMerge)?;
    let mut model = CharacteristicModel::new();
    for c in cs {
        union_into(&mut model, &c.model, &c.id, spec.rename_collisions)?;
    }
    for added in &spec.add {
        model.push(added.clone())?;
    }
    let id = spec.result_id.clone().unwrap_or_else(|| {
        cs.iter()
            .map(|c| c.id.as_str())
            .collect::<Vec<_>>()
            .join("+")
    });
    Ok(Composition {
        id,
        model,
        owner: first.owner.clone(),
    })
}

/// Adds characteristics to an expression.
pub fn enrich_expression(e: &Expression, spec: &Enrichment) -> Result<Expression> {
    let mut model = e.model.clone();
    for added in &spec.add {
        model.push(added.clone())?;
    }
    Ok(Expression {
        id: e.id.clone(),
        model,
    })
}

/// Applies `spec` to a system's expression and holdings. The source ids in
/// the spec decide whether the expression or compositions change.
pub fn apply_spec(
    expression: &Expression,
    compositions: &[Composition],
    spec: &TransformSpec,
) -> Result<(Expression, Vec<Composition>)> {
    match spec {
        TransformSpec::Simplify(s) => {
            if s.source == expression.id {
                return Ok((simplify_expression(expression, s)?, compositions.to_vec()));
            }
            let at = compositions
                .iter()
                .position(|c| c.id == s.source)
                .ok_or_else(|| Error::UnknownSource(s.source.clone()))?;
            let parts = simplify(&compositions[at], s)?;
            let mut out = compositions.to_vec();
            out.splice(at..=at, parts);
            Ok((expression.clone(), out))
        }
        TransformSpec::Enrich(en) => {
            if en.merge_ids.len() == 1 && en.merge_ids[0] == expression.id {
                return Ok((enrich_expression(expression, en)?, compositions.to_vec()));
            }
            let mut merged = Vec::with_capacity(en.merge_ids.len());
            for id in &en.merge_ids {
                let c = compositions
                    .iter()
                    .find(|c| &c.id == id)
                    .ok_or_else(|| Error::UnknownSource(id.clone()))?;
                merged.push(c.clone());
            }
            let result = enrich(&merged, en)?;
            let mut out: Vec<Composition> = compositions
                .iter()
                .filter(|c| !en.merge_ids.contains(&c.id))
                .cloned()
                .collect();
            if out.iter().any(|c| c.id == result.id) {
                return Err(Error::KeyCollision { key: result.id });
            }
            out.push(result);
            Ok((expression.clone(), out))
        }
    }
}

/// A transformation observed under one context and expression.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TransformationPattern {
    pub id: u64,
    pub context_id: String,
    pub expression_id: String,
    pub spec: TransformSpec,
    pub support: u64,
    /// True while every recorded application kept or raised the state.
    pub always_improved: bool,
}

/// One recorded application; the memory is a fold over these.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ApplicationEvent {
    pub context_id: String,
    pub expression_id: String,
    pub spec: TransformSpec,
    pub hs_before: f64,
    pub hs_after: f64,
}

/// Generational memory of transformation patterns, kept ordered by
/// `(support desc, id asc)`.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PatternMemory {
    patterns: Vec<TransformationPattern>,
    next_id: u64,
}

impl PatternMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn replay<'a, I>(events: I) -> Self
    where
        I: IntoIterator<Item = &'a ApplicationEvent>,
    {
        events
            .into_iter()
            .fold(PatternMemory::new(), |mem, ev| mem.recorded(ev))
    }

    /// Pure form of [`PatternMemory::record`].
    pub fn recorded(mut self, ev: &ApplicationEvent) -> Self {
        self.record(ev);
        self
    }

    pub fn record(&mut self, ev: &ApplicationEvent) -> &TransformationPattern {
        let improved = ev.hs_after - ev.hs_before >= -STATE_TOLERANCE;
        let found = self.patterns.iter().position(|p| {
            p.context_id == ev.context_id && p.expression_id == ev.expression_id && p.spec == ev.spec
        });
        let id = match found {
            Some(i) => {
                let p = &mut self.patterns[i];
                p.support += 1;
                p.always_improved &= improved;
                p.id
            }
            None => {
                let id = self.next_id;
                self.next_id += 1;
                self.patterns.push(TransformationPattern {
                    id,
                    context_id: ev.context_id.clone(),
                    expression_id: ev.expression_id.clone(),
                    spec: ev.spec.clone(),
                    support: 1,
                    always_improved: improved,
                });
                id
            }
        };
        self.patterns
            .sort_by(|a, b| b.support.cmp(&a.support).then(a.id.cmp(&b.id)));
        self.patterns.iter().find(|p| p.id == id).expect("just recorded")
    }

    pub fn patterns(&self) -> &[TransformationPattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Always-improving patterns recorded under this context and expression,
    /// in memory order.
    pub fn positive_for<'a>(
        &'a self,
        context_id: &'a str,
        expression_id: &'a str,
    ) -> impl Iterator<Item = &'a TransformationPattern> + 'a {
        self.patterns.iter().filter(move |p| {
            p.always_improved && p.context_id == context_id && p.expression_id == expression_id
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Policy {
    #[default]
    Reactive,
    Active,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub context_id: String,
    pub hs_before: f64,
    pub hs_after: f64,
}

impl Transition {
    pub fn dropped(&self) -> bool {
        self.hs_after < self.hs_before - STATE_TOLERANCE
    }
}

/// What a system currently has to work with.
#[derive(Debug, Clone, Copy)]
pub struct SystemView<'a> {
    pub expression: &'a Expression,
    pub context: &'a Context,
    pub compositions: &'a [Composition],
}

impl SystemView<'_> {
    pub fn state(&self) -> f64 {
        system_state(self.expression, self.context, self.compositions)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum ProposedAction {
    Transform { spec: TransformSpec },
    ExchangeProbe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ProposalSource {
    /// Generated from the current models.
    Heuristic,
    /// Reuse of a stored positive pattern.
    Pattern(u64),
    Probe,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Proposal {
    pub action: ProposedAction,
    pub source: ProposalSource,
    /// Predicted state change; zero for probes.
    pub predicted_delta: f64,
    pub support: u64,
}

fn is_modifier(c: &Characteristic) -> bool {
    matches!(c.role, Role::Inhibitor | Role::Facilitator)
}

/// Expression keys that no held composition matches with a positive
/// contribution.
fn unsupported_expression_keys(view: &SystemView<'_>) -> Vec<String> {
    let mut best: Vec<(String, f64)> = view
        .expression
        .model
        .keys()
        .map(|k| (String::from(k), 0.0))
        .collect();
    for c in view.compositions {
        for pair in pair_contributions(c, view.expression, view.context) {
            if let Some(slot) = best.iter_mut().find(|(k, _)| *k == pair.key) {
                slot.1 = slot.1.max(pair.adjusted);
            }
        }
    }
    best.into_iter()
        .filter(|(_, v)| *v <= 0.0)
        .map(|(k, _)| k)
        .collect()
}

/// Non-modifier characteristics of `c` that do not contribute positively.
fn nonconforming_keys(c: &Composition, view: &SystemView<'_>) -> Vec<String> {
    let pairs = pair_contributions(c, view.expression, view.context);
    c.model
        .iter()
        .filter(|ch| !is_modifier(ch))
        .filter(|ch| {
            pairs
                .iter()
                .find(|p| p.key == ch.key)
                .is_none_or(|p| p.adjusted <= 0.0)
        })
        .map(|ch| ch.key.clone())
        .collect()
}

fn heuristic_specs(view: &SystemView<'_>, include_composition_simplify: bool) -> Vec<TransformSpec> {
    let mut specs = Vec::new();

    // simplify the expression toward what the compositions can satisfy
    let unsupported = unsupported_expression_keys(view);
    if !unsupported.is_empty() && unsupported.len() < view.expression.model.len() {
        specs.push(TransformSpec::Simplify(Simplification {
            source: view.expression.id.clone(),
            drop_keys: unsupported,
            groups: Vec::new(),
        }));
    }

    // enrich by combining compositions with disjoint keys
    let cs = view.compositions;
    for i in 0..cs.len() {
        for j in i + 1..cs.len() {
            if cs[i].model.keys().all(|k| !cs[j].model.contains(k)) {
                specs.push(TransformSpec::Enrich(Enrichment {
                    merge_ids: alloc::vec![cs[i].id.clone(), cs[j].id.clone()],
                    ..Default::default()
                }));
            }
        }
    }

    if include_composition_simplify {
        for c in cs {
            let drop = nonconforming_keys(c, view);
            if !drop.is_empty() && drop.len() < c.model.len() {
                specs.push(TransformSpec::Simplify(Simplification {
                    source: c.id.clone(),
                    drop_keys: drop,
                    groups: Vec::new(),
                }));
            }
        }
    }
    specs
}

/// Predicted state change of applying `spec`, or `None` when it does not
/// apply to the current view.
pub fn predict_delta(view: &SystemView<'_>, spec: &TransformSpec) -> Option<f64> {
    let (expr, comps) = apply_spec(view.expression, view.compositions, spec).ok()?;
    Some(system_state(&expr, view.context, &comps) - view.state())
}

/// Proposals for a state transition, best first.
///
/// Reactive systems only answer a drop in state, by simplifying the
/// expression or combining compositions. Active systems propose regardless
/// of a drop; they also simplify compositions, reuse positive patterns from
/// memory and add an exchange probe. Ranking is by predicted state change,
/// then pattern support.
pub fn respond(
    view: &SystemView<'_>,
    transition: &Transition,
    policy: Policy,
    mem: &PatternMemory,
) -> Vec<Proposal> {
    let mut out = Vec::new();
    let active = policy == Policy::Active;
    if transition.dropped() || active {
        for spec in heuristic_specs(view, active) {
            if let Some(delta) = predict_delta(view, &spec) {
                out.push(Proposal {
                    action: ProposedAction::Transform { spec },
                    source: ProposalSource::Heuristic,
                    predicted_delta: delta,
                    support: 0,
                });
            }
        }
    }
    if active {
        for p in mem.positive_for(&transition.context_id, &view.expression.id) {
            if let Some(delta) = predict_delta(view, &p.spec) {
                out.push(Proposal {
                    action: ProposedAction::Transform {
                        spec: p.spec.clone(),
                    },
                    source: ProposalSource::Pattern(p.id),
                    predicted_delta: delta,
                    support: p.support,
                });
            }
        }
        out.push(Proposal {
            action: ProposedAction::ExchangeProbe,
            source: ProposalSource::Probe,
            predicted_delta: 0.0,
            support: 0,
        });
    }
    out.sort_by(|a, b| {
        b.predicted_delta
            .total_cmp(&a.predicted_delta)
            .then(b.support.cmp(&a.support))
    });
    out
}
