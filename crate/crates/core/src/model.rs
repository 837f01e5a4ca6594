//! Structural vocabulary of a harmonic system: characteristics, models,
//! contexts, expressions, compositions and environments, plus the angular
//! comparison every other module builds on.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::calculus::harmonic_value;
use crate::error::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Whether a characteristic stems from the subject's makeup or is assigned
/// by an observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Kind {
    #[default]
    Intrinsic,
    Referential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Role {
    /// Contributes by conforming directly.
    #[default]
    Activator,
    /// Scales down the contribution of its target.
    Inhibitor,
    /// Amplifies the positive contribution of its target.
    Facilitator,
}

/// A keyed scalar trait.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Characteristic {
    pub key: String,
    pub value: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub kind: Kind,
    #[cfg_attr(feature = "serde", serde(default))]
    pub role: Role,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub role_target: Option<String>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub strength: f64,
}

impl Characteristic {
    /// Intrinsic activator with no modifier strength.
    pub fn new(key: impl Into<String>, value: f64) -> Self {
        Characteristic {
            key: key.into(),
            value,
            kind: Kind::Intrinsic,
            role: Role::Activator,
            role_target: None,
            strength: 0.0,
        }
    }

    pub fn referential(mut self) -> Self {
        self.kind = Kind::Referential;
        self
    }

    pub fn inhibiting(mut self, target: impl Into<String>, strength: f64) -> Self {
        self.role = Role::Inhibitor;
        self.role_target = Some(target.into());
        self.strength = strength;
        self
    }

    pub fn facilitating(mut self, target: impl Into<String>, strength: f64) -> Self {
        self.role = Role::Facilitator;
        self.role_target = Some(target.into());
        self.strength = strength;
        self
    }

    fn check(&self, path: &str, out: &mut Vec<Diagnostic>) {
        if self.key.is_empty() {
            out.push(Diagnostic::new(format!("{path}.key"), "key must be non-empty"));
        }
        if !self.value.is_finite() {
            out.push(Diagnostic::new(format!("{path}.value"), "value must be finite"));
        }
        let needs_target = matches!(self.role, Role::Inhibitor | Role::Facilitator);
        match (&self.role_target, needs_target) {
            (None, true) => out.push(Diagnostic::new(
                format!("{path}.role_target"),
                "inhibitor and facilitator require a role_target",
            )),
            (Some(_), false) => out.push(Diagnostic::new(
                format!("{path}.role_target"),
                "role_target is only allowed on inhibitors and facilitators",
            )),
            _ => {}
        }
        if !(self.strength.is_finite() && self.strength >= 0.0) {
            out.push(Diagnostic::new(
                format!("{path}.strength"),
                "strength must be finite and >= 0",
            ));
        }
    }
}

/// Ordered set of characteristics with unique keys.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct CharacteristicModel {
    entries: Vec<Characteristic>,
}

impl CharacteristicModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a model without checking key uniqueness; run
    /// [`Validate::validate`] on untrusted input.
    pub fn from_entries(entries: Vec<Characteristic>) -> Self {
        CharacteristicModel { entries }
    }

    /// Bare numbers keyed by position: `c1`, `c2`, ...
    pub fn from_values(values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .map(|(i, v)| Characteristic::new(positional_key(i), *v))
            .collect();
        CharacteristicModel { entries }
    }

    pub fn push(&mut self, c: Characteristic) -> Result<()> {
        if self.contains(&c.key) {
            return Err(Error::KeyCollision { key: c.key });
        }
        self.entries.push(c);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&Characteristic> {
        self.entries.iter().find(|c| c.key == key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|c| c.key.as_str())
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Characteristic> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Characteristic] {
        &self.entries
    }

    /// Sub-model holding only `keys`, in this model's order.
    pub fn restrict<'a, I>(&self, keys: I) -> CharacteristicModel
    where
        I: IntoIterator<Item = &'a str>,
    {
        let wanted: BTreeSet<&str> = keys.into_iter().collect();
        CharacteristicModel {
            entries: self
                .entries
                .iter()
                .filter(|c| wanted.contains(c.key.as_str()))
                .cloned()
                .collect(),
        }
    }

    /// Model with `keys` removed.
    pub fn without<'a, I>(&self, keys: I) -> CharacteristicModel
    where
        I: IntoIterator<Item = &'a str>,
    {
        let dropped: BTreeSet<&str> = keys.into_iter().collect();
        CharacteristicModel {
            entries: self
                .entries
                .iter()
                .filter(|c| !dropped.contains(c.key.as_str()))
                .cloned()
                .collect(),
        }
    }
}

impl FromIterator<Characteristic> for CharacteristicModel {
    fn from_iter<T: IntoIterator<Item = Characteristic>>(iter: T) -> Self {
        CharacteristicModel {
            entries: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a CharacteristicModel {
    type Item = &'a Characteristic;
    type IntoIter = core::slice::Iter<'a, Characteristic>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

/// Label given to the `index`-th (zero based) unnamed characteristic.
pub fn positional_key(index: usize) -> String {
    format!("c{}", index + 1)
}

#[cfg(feature = "serde")]
fn default_scale() -> f64 {
    1.0
}

fn default_selection_size() -> usize {
    1
}

fn default_threshold() -> f64 {
    0.8
}

/// Situational constraints: comparability scales, how many compositions are
/// selected, and how close a sensory match has to be.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Context {
    pub id: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub scales: BTreeMap<String, f64>,
    #[cfg_attr(feature = "serde", serde(default = "default_scale"))]
    pub default_scale: f64,
    #[cfg_attr(feature = "serde", serde(default = "default_selection_size"))]
    pub selection_size: usize,
    #[cfg_attr(feature = "serde", serde(default = "default_threshold"))]
    pub match_threshold: f64,
}

impl Context {
    pub fn new(id: impl Into<String>, default_scale: f64) -> Self {
        Context {
            id: id.into(),
            scales: BTreeMap::new(),
            default_scale,
            selection_size: default_selection_size(),
            match_threshold: default_threshold(),
        }
    }

    pub fn with_scale(mut self, key: impl Into<String>, scale: f64) -> Self {
        self.scales.insert(key.into(), scale);
        self
    }

    pub fn with_selection_size(mut self, k: usize) -> Self {
        self.selection_size = k;
        self
    }

    pub fn with_threshold(mut self, tau: f64) -> Self {
        self.match_threshold = tau;
        self
    }

    /// Comparability range for `key`, falling back to the default.
    pub fn scale(&self, key: &str) -> f64 {
        self.scales.get(key).copied().unwrap_or(self.default_scale)
    }
}

/// The reference model compositions are rated against.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Expression {
    pub id: String,
    pub model: CharacteristicModel,
}

impl Expression {
    pub fn new(id: impl Into<String>, model: CharacteristicModel) -> Self {
        Expression { id: id.into(), model }
    }
}

/// A pattern of environment entities manifesting characteristics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Composition {
    pub id: String,
    pub model: CharacteristicModel,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub owner: Option<String>,
}

impl Composition {
    pub fn new(id: impl Into<String>, model: CharacteristicModel) -> Self {
        Composition {
            id: id.into(),
            model,
            owner: None,
        }
    }

    pub fn owned_by(mut self, owner: impl Into<String>) -> Self {
        self.owner = Some(owner.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Environment {
    pub id: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub pool: Vec<Composition>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub resources: BTreeMap<String, f64>,
}

impl Environment {
    pub fn new(id: impl Into<String>) -> Self {
        Environment {
            id: id.into(),
            ..Default::default()
        }
    }

    pub fn contains(&self, composition_id: &str) -> bool {
        self.pool.iter().any(|c| c.id == composition_id)
    }
}

/// Result of placing an observed and a reference characteristic on the
/// comparison circle.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Comparison {
    /// Angle between the two points, in `[0, π]`.
    pub theta: f64,
    /// `|Δvalue| / π`. Carried for traceability only.
    pub mu: f64,
    /// Observation distance.
    pub r: f64,
    /// Observed arc length, `r · theta`.
    pub l_obs: f64,
    /// Arc on the unit circle, `theta`.
    pub l_t: f64,
}

impl Comparison {
    pub fn from_theta(theta: f64, mu: f64, r: f64) -> Self {
        Comparison {
            theta,
            mu,
            r,
            l_obs: r * theta,
            l_t: theta,
        }
    }
}

/// Angular distance between two same-keyed characteristics. The value gap
/// maps linearly onto `[0, π]` and saturates at the context scale.
pub fn characteristic_theta(
    observed: &Characteristic,
    reference: &Characteristic,
    context: &Context,
) -> Result<Comparison> {
    if observed.key != reference.key {
        return Err(Error::KeyMismatch {
            observed: observed.key.clone(),
            reference: reference.key.clone(),
        });
    }
    if !observed.value.is_finite() || !reference.value.is_finite() {
        return Err(Error::InvalidValue {
            key: observed.key.clone(),
        });
    }
    let scale = context.scale(&observed.key);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidValue {
            key: observed.key.clone(),
        });
    }
    let delta = libm::fabs(observed.value - reference.value);
    let theta = PI * (delta / scale).min(1.0);
    Ok(Comparison::from_theta(theta, delta / PI, 1.0))
}

/// Relation of a composition to a system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CompositionClass {
    /// In the environment and contributing (HV > 0).
    Active,
    /// In the environment without a positive relation; exchange material.
    Passive,
    /// Not present in the environment.
    Target,
}

pub fn classify_composition(
    composition: &Composition,
    env: &Environment,
    expr: &Expression,
    ctx: &Context,
) -> CompositionClass {
    if !env.contains(&composition.id) {
        return CompositionClass::Target;
    }
    if harmonic_value(composition, expr, ctx).value > 0.0 {
        CompositionClass::Active
    } else {
        CompositionClass::Passive
    }
}

/// A violated invariant, located by a dotted path.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(path: impl Into<String>, message: impl ToString) -> Self {
        Diagnostic {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl core::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Invariant checking that reports every violation instead of stopping at
/// the first one.
pub trait Validate {
    fn validate(&self, path: &str, out: &mut Vec<Diagnostic>);

    fn diagnostics(&self, path: &str) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        self.validate(path, &mut out);
        out
    }
}

impl Validate for Characteristic {
    fn validate(&self, path: &str, out: &mut Vec<Diagnostic>) {
        self.check(path, out);
    }
}

impl Validate for CharacteristicModel {
    fn validate(&self, path: &str, out: &mut Vec<Diagnostic>) {
        let mut seen = BTreeSet::new();
        for (i, c) in self.entries.iter().enumerate() {
            let here = format!("{path}[{i}]");
            c.check(&here, out);
            if !c.key.is_empty() && !seen.insert(c.key.as_str()) {
                out.push(Diagnostic::new(
                    format!("{here}.key"),
                    format!("duplicate characteristic key `{}`", c.key),
                ));
            }
        }
    }
}

impl Validate for Context {
    fn validate(&self, path: &str, out: &mut Vec<Diagnostic>) {
        if self.id.is_empty() {
            out.push(Diagnostic::new(format!("{path}.id"), "id must be non-empty"));
        }
        if !(self.default_scale.is_finite() && self.default_scale > 0.0) {
            out.push(Diagnostic::new(
                format!("{path}.default_scale"),
                "scale must be > 0",
            ));
        }
        for (key, scale) in &self.scales {
            if !(scale.is_finite() && *scale > 0.0) {
                out.push(Diagnostic::new(
                    format!("{path}.scales.{key}"),
                    "scale must be > 0",
                ));
            }
        }
        if self.selection_size == 0 {
            out.push(Diagnostic::new(
                format!("{path}.selection_size"),
                "selection_size must be >= 1",
            ));
        }
        if !(self.match_threshold > 0.0 && self.match_threshold <= 1.0) {
            out.push(Diagnostic::new(
                format!("{path}.match_threshold"),
                "match_threshold must lie in (0, 1]",
            ));
        }
    }
}

impl Validate for Expression {
    fn validate(&self, path: &str, out: &mut Vec<Diagnostic>) {
        if self.id.is_empty() {
            out.push(Diagnostic::new(format!("{path}.id"), "id must be non-empty"));
        }
        if self.model.is_empty() {
            out.push(Diagnostic::new(
                format!("{path}.model"),
                "expression model must be non-empty",
            ));
        }
        self.model.validate(&format!("{path}.model"), out);
    }
}

impl Validate for Composition {
    fn validate(&self, path: &str, out: &mut Vec<Diagnostic>) {
        if self.id.is_empty() {
            out.push(Diagnostic::new(format!("{path}.id"), "id must be non-empty"));
        }
        self.model.validate(&format!("{path}.model"), out);
    }
}

impl Validate for Environment {
    fn validate(&self, path: &str, out: &mut Vec<Diagnostic>) {
        let mut seen = BTreeSet::new();
        for (i, c) in self.pool.iter().enumerate() {
            let here = format!("{path}.pool[{i}]");
            if !seen.insert(c.id.as_str()) {
                out.push(Diagnostic::new(
                    format!("{here}.id"),
                    format!("duplicate composition id `{}`", c.id),
                ));
            }
            if c.model.is_empty() {
                out.push(Diagnostic::new(
                    format!("{here}.model"),
                    "pool compositions need at least one characteristic",
                ));
            }
            c.validate(&here, out);
        }
        for (key, amount) in &self.resources {
            if !(amount.is_finite() && *amount >= 0.0) {
                out.push(Diagnostic::new(
                    format!("{path}.resources.{key}"),
                    "resource amounts must be finite and >= 0",
                ));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ctx(scale: f64) -> Context {
        Context::new("ctx", scale)
    }

    #[test]
    fn identical_values_have_zero_angle() {
        let a = Characteristic::new("k", 5.0);
        for scale in [0.5, 1.0, 8.0, 1e6] {
            let cmp = characteristic_theta(&a, &a, &ctx(scale)).unwrap();
            assert_eq!(cmp.theta, 0.0);
            assert_eq!(cmp.mu, 0.0);
        }
    }

    #[test]
    fn half_scale_gap_is_right_angle() {
        let obs = Characteristic::new("k", 7.0);
        let reference = Characteristic::new("k", 3.0);
        let cmp = characteristic_theta(&obs, &reference, &ctx(8.0)).unwrap();
        assert!((cmp.theta - PI / 2.0).abs() < 1e-15);
        assert!((cmp.mu - 4.0 / PI).abs() < 1e-15);
        assert!((cmp.mu - 1.2732).abs() < 1e-4);
        assert_eq!(cmp.r, 1.0);
        assert_eq!(cmp.l_obs, cmp.l_t);
        assert_eq!(cmp.l_obs, cmp.r * cmp.theta);
    }

    #[test]
    fn saturates_at_pi() {
        let obs = Characteristic::new("k", 100.0);
        let reference = Characteristic::new("k", 0.0);
        let cmp = characteristic_theta(&obs, &reference, &ctx(3.0)).unwrap();
        assert_eq!(cmp.theta, PI);
    }

    #[test]
    fn per_key_scale_overrides_default() {
        let c = ctx(100.0).with_scale("k", 2.0);
        let cmp = characteristic_theta(
            &Characteristic::new("k", 1.0),
            &Characteristic::new("k", 0.0),
            &c,
        )
        .unwrap();
        assert!((cmp.theta - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn key_mismatch_and_nan_are_errors() {
        let c = ctx(1.0);
        let err = characteristic_theta(
            &Characteristic::new("a", 1.0),
            &Characteristic::new("b", 1.0),
            &c,
        )
        .unwrap_err();
        assert!(matches!(err, Error::KeyMismatch { .. }));
        let err = characteristic_theta(
            &Characteristic::new("a", f64::NAN),
            &Characteristic::new("a", 1.0),
            &c,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidValue { .. }));
    }

    #[test]
    fn positional_keys_start_at_one() {
        let m = CharacteristicModel::from_values(&[10.0, 12.0, 14.0]);
        let keys: Vec<&str> = m.keys().collect();
        assert_eq!(keys, vec!["c1", "c2", "c3"]);
    }

    #[test]
    fn push_rejects_duplicates() {
        let mut m = CharacteristicModel::new();
        m.push(Characteristic::new("a", 1.0)).unwrap();
        assert!(m.push(Characteristic::new("a", 2.0)).is_err());
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn duplicate_key_yields_one_diagnostic() {
        let m = CharacteristicModel::from_entries(vec![
            Characteristic::new("a", 1.0),
            Characteristic::new("a", 2.0),
        ]);
        let d = m.diagnostics("model");
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].path, "model[1].key");
    }

    #[test]
    fn zero_scale_yields_one_diagnostic() {
        let d = ctx(0.0).diagnostics("ctx");
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].path, "ctx.default_scale");
        let d = ctx(1.0).with_scale("x", 0.0).diagnostics("ctx");
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn role_target_must_match_role() {
        let bad = Characteristic::new("a", 1.0);
        let mut inh = bad.clone();
        inh.role = Role::Inhibitor;
        assert_eq!(inh.diagnostics("x").len(), 1);
        let mut stray = bad.clone();
        stray.role_target = Some("b".into());
        assert_eq!(stray.diagnostics("x").len(), 1);
        let neg = Characteristic::new("a", 1.0).facilitating("b", -1.0);
        assert_eq!(neg.diagnostics("x").len(), 1);
        assert!(Characteristic::new("a", 1.0)
            .inhibiting("b", 0.5)
            .diagnostics("x")
            .is_empty());
    }

    #[test]
    fn context_bounds() {
        let mut c = ctx(1.0);
        c.selection_size = 0;
        c.match_threshold = 0.0;
        assert_eq!(c.diagnostics("c").len(), 2);
        c.selection_size = 3;
        c.match_threshold = 1.0;
        assert!(c.diagnostics("c").is_empty());
    }

    #[test]
    fn environment_pool_ids_unique() {
        let mut env = Environment::new("env");
        let comp = Composition::new("x", CharacteristicModel::from_values(&[1.0]));
        env.pool.push(comp.clone());
        env.pool.push(comp);
        let d = env.diagnostics("env");
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("`x`"));
    }

    #[test]
    fn well_formed_fragment_is_clean() {
        let mut env = Environment::new("env");
        env.pool.push(Composition::new(
            "x",
            CharacteristicModel::from_values(&[1.0, 2.0]),
        ));
        env.resources.insert("water".into(), 3.0);
        let expr = Expression::new("e", CharacteristicModel::from_values(&[1.0]));
        assert!(env.diagnostics("env").is_empty());
        assert!(expr.diagnostics("e").is_empty());
        assert!(ctx(2.0).diagnostics("ctx").is_empty());
    }

    #[test]
    fn classification_partitions() {
        let c = ctx(10.0);
        let expr = Expression::new("e", CharacteristicModel::from_values(&[1.0, 2.0]));
        let good = Composition::new("good", CharacteristicModel::from_values(&[1.0, 2.0]));
        let far = Composition::new("far", CharacteristicModel::from_values(&[11.0, 12.0]));
        let absent = Composition::new("absent", CharacteristicModel::from_values(&[1.0]));
        let mut env = Environment::new("env");
        env.pool.push(good.clone());
        env.pool.push(far.clone());
        assert_eq!(
            classify_composition(&good, &env, &expr, &c),
            CompositionClass::Active
        );
        assert_eq!(
            classify_composition(&far, &env, &expr, &c),
            CompositionClass::Passive
        );
        assert_eq!(
            classify_composition(&absent, &env, &expr, &c),
            CompositionClass::Target
        );
    }

    #[test]
    fn passive_against_own_expression_active_against_foreign() {
        // scale 10: gap 8 gives cos(0.8π) ≈ -0.809, gap 0 gives 1
        let c = ctx(10.0);
        let own = Expression::new("own", CharacteristicModel::from_values(&[0.0, 0.0]));
        let foreign = Expression::new("foreign", CharacteristicModel::from_values(&[8.0, 9.0]));
        let comp = Composition::new("x", CharacteristicModel::from_values(&[8.0, 9.0]));
        let mut env = Environment::new("env");
        env.pool.push(comp.clone());

        let hv_own = harmonic_value(&comp, &own, &c).value;
        let hv_foreign = harmonic_value(&comp, &foreign, &c).value;
        let brute = (libm::cos(PI * 0.8) + libm::cos(PI * 0.9)) / 2.0;
        assert!((hv_own - brute).abs() < 1e-12);
        assert!(hv_own < 0.0 && hv_foreign > 0.0);
        assert_eq!(
            classify_composition(&comp, &env, &own, &c),
            CompositionClass::Passive
        );
        assert_eq!(
            classify_composition(&comp, &env, &foreign, &c),
            CompositionClass::Active
        );
    }
}
