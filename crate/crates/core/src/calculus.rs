//! Harmonic value, significance, state and status.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{characteristic_theta, Composition, Context, Expression, Role};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// One key-matched (composition, expression) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairContribution {
    pub key: String,
    pub theta: f64,
    /// `cos(theta)` before role modifiers.
    pub raw: f64,
    /// Contribution after facilitators and inhibitors.
    pub adjusted: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct HarmonicValue {
    /// In `[-1, 1]`.
    pub value: f64,
    /// Number of key-matched pairs.
    pub matched: usize,
    /// Number of composition characteristics.
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Significance {
    pub value: f64,
    pub n_conforming: usize,
    pub m: usize,
}

/// Per-pair contributions of `c` against `e`, in composition order.
///
/// Composition characteristics whose key the expression lacks are skipped.
/// Facilitators multiply their target's contribution by `1 + strength` while
/// it is positive; inhibitors multiply it by `max(0, 1 - strength)`.
pub fn pair_contributions(c: &Composition, e: &Expression, ctx: &Context) -> Vec<PairContribution> {
    let mut pairs: Vec<PairContribution> = c
        .model
        .iter()
        .filter_map(|observed| {
            let reference = e.model.get(&observed.key)?;
            // invalid values or scales cannot be placed on the circle
            let cmp = characteristic_theta(observed, reference, ctx).ok()?;
            let raw = libm::cos(cmp.theta);
            Some(PairContribution {
                key: observed.key.clone(),
                theta: cmp.theta,
                raw,
                adjusted: raw,
            })
        })
        .collect();

    for modifier in c.model.iter() {
        let Some(target) = modifier.role_target.as_deref() else {
            continue;
        };
        let Some(pair) = pairs.iter_mut().find(|p| p.key == target) else {
            continue;
        };
        match modifier.role {
            Role::Facilitator if pair.adjusted > 0.0 => pair.adjusted *= 1.0 + modifier.strength,
            Role::Inhibitor => pair.adjusted *= (1.0 - modifier.strength).max(0.0),
            _ => {}
        }
    }
    pairs
}

/// Mean role-adjusted `cos θ` over the composition's characteristics,
/// clamped to `[-1, 1]`. Unmatched characteristics count as zero.
pub fn harmonic_value(c: &Composition, e: &Expression, ctx: &Context) -> HarmonicValue {
    let n = c.model.len();
    let pairs = pair_contributions(c, e, ctx);
    let value = if n == 0 {
        0.0
    } else {
        let sum: f64 = pairs.iter().map(|p| p.adjusted).sum();
        // adding +0 turns the empty sum's -0 into +0 so ranking ties hold
        (sum / n as f64).clamp(-1.0, 1.0) + 0.0
    };
    HarmonicValue {
        value,
        matched: pairs.len(),
        n,
    }
}

/// Harmonic value weighted by the share of conforming characteristics among
/// all participants' characteristics.
pub fn harmonic_significance(
    c: &Composition,
    e: &Expression,
    ctx: &Context,
    participants: &[Composition],
) -> Result<Significance> {
    if !participants.iter().any(|p| p.id == c.id) {
        return Err(Error::NotParticipant { id: c.id.clone() });
    }
    let m: usize = participants.iter().map(|p| p.model.len()).sum();
    if m == 0 {
        return Err(Error::EmptyParticipants);
    }
    Ok(significance_with(c, e, ctx, m))
}

fn significance_with(c: &Composition, e: &Expression, ctx: &Context, m: usize) -> Significance {
    let hv = harmonic_value(c, e, ctx);
    let n_conforming = pair_contributions(c, e, ctx)
        .iter()
        .filter(|p| p.adjusted > 0.0)
        .count();
    Significance {
        value: hv.value * (n_conforming as f64 / m as f64) + 0.0,
        n_conforming,
        m,
    }
}

/// A ranked candidate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Selected {
    pub id: String,
    pub hv: HarmonicValue,
    pub significance: Significance,
}

fn selection_order(a: &Selected, b: &Selected) -> Ordering {
    b.significance
        .value
        .total_cmp(&a.significance.value)
        .then_with(|| b.hv.value.total_cmp(&a.hv.value))
        .then_with(|| a.id.cmp(&b.id))
}

/// All candidates ranked by significance, then HV, then id. The candidates
/// themselves form the participant set.
pub fn rank_compositions(candidates: &[Composition], e: &Expression, ctx: &Context) -> Vec<Selected> {
    let m: usize = candidates.iter().map(|p| p.model.len()).sum();
    let mut ranked: Vec<Selected> = candidates
        .iter()
        .map(|c| Selected {
            id: c.id.clone(),
            hv: harmonic_value(c, e, ctx),
            significance: if m == 0 {
                Significance {
                    value: 0.0,
                    n_conforming: 0,
                    m: 0,
                }
            } else {
                significance_with(c, e, ctx, m)
            },
        })
        .collect();
    ranked.sort_by(selection_order);
    ranked
}

/// The `ctx.selection_size` most significant candidates.
pub fn select_compositions(candidates: &[Composition], e: &Expression, ctx: &Context) -> Vec<Selected> {
    let mut ranked = rank_compositions(candidates, e, ctx);
    ranked.truncate(ctx.selection_size);
    ranked
}

/// Quadratic mean of the selected harmonic values.
pub fn harmonic_state(selected: &[f64]) -> Result<f64> {
    if selected.is_empty() {
        return Err(Error::EmptySelection);
    }
    let sum_sq: f64 = selected.iter().map(|x| x * x).sum();
    Ok(libm::sqrt(sum_sq / selected.len() as f64))
}

/// Harmonic state of a system holding `compositions`; zero when it holds
/// nothing.
pub fn system_state(e: &Expression, ctx: &Context, compositions: &[Composition]) -> f64 {
    let mut scored: Vec<Scored<'_>> = compositions.iter().map(|c| Scored::new(c, e, ctx)).collect();
    state_of_scored(&mut scored, ctx.selection_size)
}

/// The parts of a composition's ranking that do not depend on the other
/// candidates, so callers can cache them.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scored<'a> {
    pub id: &'a str,
    pub hv: f64,
    pub n_conforming: usize,
    pub len: usize,
}

impl<'a> Scored<'a> {
    pub fn new(c: &'a Composition, e: &Expression, ctx: &Context) -> Self {
        Scored {
            id: &c.id,
            hv: harmonic_value(c, e, ctx).value,
            n_conforming: pair_contributions(c, e, ctx).iter().filter(|p| p.adjusted > 0.0).count(),
            len: c.model.len(),
        }
    }
}

/// Same ranking and selection as [`select_compositions`], then the
/// quadratic mean; zero for an empty holding.
pub(crate) fn state_of_scored(scored: &mut [Scored<'_>], selection_size: usize) -> f64 {
    let m: usize = scored.iter().map(|s| s.len).sum();
    let significance = |s: &Scored<'_>| {
        if m == 0 {
            0.0
        } else {
            s.hv * (s.n_conforming as f64 / m as f64) + 0.0
        }
    };
    scored.sort_by(|a, b| {
        significance(b)
            .total_cmp(&significance(a))
            .then_with(|| b.hv.total_cmp(&a.hv))
            .then_with(|| a.id.cmp(b.id))
    });
    let values: Vec<f64> = scored.iter().take(selection_size).map(|s| s.hv).collect();
    harmonic_state(&values).unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct StateSample {
    pub tick: u64,
    /// HV of every participating composition at this tick.
    pub values: Vec<f64>,
    pub state: f64,
}

/// Per-tick record of harmonic values, with strictly increasing ticks.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct StateHistory {
    samples: Vec<StateSample>,
}

impl StateHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a sample; returns `false` and leaves the history unchanged
    /// when `tick` does not advance past the last sample.
    pub fn push(&mut self, tick: u64, values: Vec<f64>, state: f64) -> bool {
        if self.samples.last().is_some_and(|s| s.tick >= tick) {
            return false;
        }
        self.samples.push(StateSample { tick, values, state });
        true
    }

    pub fn samples(&self) -> &[StateSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Mean over ticks in `[a, b]` of each tick's mean composition HV. Ticks
/// with no participating compositions are skipped.
pub fn harmonic_status(h: &StateHistory, a: u64, b: u64) -> Result<f64> {
    if a > b {
        return Err(Error::InvalidInterval { from: a, to: b });
    }
    let per_tick: Vec<f64> = h
        .samples
        .iter()
        .filter(|s| (a..=b).contains(&s.tick) && !s.values.is_empty())
        .map(|s| s.values.iter().sum::<f64>() / s.values.len() as f64)
        .collect();
    if per_tick.is_empty() {
        return Err(Error::EmptyInterval { from: a, to: b });
    }
    Ok(per_tick.iter().sum::<f64>() / per_tick.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Characteristic, CharacteristicModel};
    use alloc::vec;
    use core::f64::consts::PI;

    fn model(values: &[f64]) -> CharacteristicModel {
        CharacteristicModel::from_values(values)
    }

    fn comp(id: &str, values: &[f64]) -> Composition {
        Composition::new(id, model(values))
    }

    #[test]
    fn conforming_pairs_give_one() {
        let ctx = Context::new("c", 4.0);
        let e = Expression::new("e", model(&[1.0, 2.0, 3.0]));
        let hv = harmonic_value(&comp("x", &[1.0, 2.0, 3.0]), &e, &ctx);
        assert_eq!(hv.value, 1.0);
        assert_eq!((hv.matched, hv.n), (3, 3));
    }

    #[test]
    fn empty_composition_is_zero() {
        let ctx = Context::new("c", 4.0);
        let e = Expression::new("e", model(&[1.0]));
        let hv = harmonic_value(&Composition::new("x", CharacteristicModel::new()), &e, &ctx);
        assert_eq!(hv.value, 0.0);
        assert_eq!(hv.n, 0);
    }

    #[test]
    fn conforming_and_opposite_cancel() {
        // theta = {0, π} with scale 4 and gap 4 on the second key
        let ctx = Context::new("c", 4.0);
        let e = Expression::new("e", model(&[1.0, 2.0]));
        let c = comp("x", &[1.0, 6.0]);
        let pairs = pair_contributions(&c, &e, &ctx);
        assert_eq!(pairs[0].theta, 0.0);
        assert_eq!(pairs[1].theta, PI);
        let brute = (libm::cos(0.0) + libm::cos(PI)) / 2.0;
        assert_eq!(harmonic_value(&c, &e, &ctx).value, brute);
        assert_eq!(brute, 0.0);
    }

    #[test]
    fn unmatched_characteristics_dilute() {
        let ctx = Context::new("c", 4.0);
        let e = Expression::new("e", model(&[1.0]));
        let hv = harmonic_value(&comp("x", &[1.0, 9.0, 9.0, 9.0]), &e, &ctx);
        assert_eq!(hv.value, 0.25);
        assert_eq!(hv.matched, 1);
    }

    #[test]
    fn facilitator_amplifies_and_inhibitor_suppresses() {
        let ctx = Context::new("c", 6.0);
        let e = Expression::new(
            "e",
            CharacteristicModel::from_entries(vec![Characteristic::new("a", 0.0)]),
        );
        // a at gap 2 of scale 6: cos(π/3) = 0.5
        let base = CharacteristicModel::from_entries(vec![
            Characteristic::new("a", 2.0),
            Characteristic::new("f", 0.0).facilitating("a", 1.0),
        ]);
        let hv = harmonic_value(&Composition::new("x", base), &e, &ctx);
        assert!((hv.value - 0.5).abs() < 1e-12, "{}", hv.value);

        let inhibited = CharacteristicModel::from_entries(vec![
            Characteristic::new("a", 2.0),
            Characteristic::new("i", 0.0).inhibiting("a", 0.25),
        ]);
        let hv = harmonic_value(&Composition::new("x", inhibited), &e, &ctx);
        assert!((hv.value - 0.5 * 0.75 / 2.0).abs() < 1e-12);

        let silenced = CharacteristicModel::from_entries(vec![
            Characteristic::new("a", 0.0),
            Characteristic::new("i", 0.0).inhibiting("a", 3.0),
        ]);
        let hv = harmonic_value(&Composition::new("x", silenced), &e, &ctx);
        assert_eq!(hv.value, 0.0);
    }

    #[test]
    fn facilitator_ignores_negative_targets() {
        let ctx = Context::new("c", 1.0);
        let e = Expression::new(
            "e",
            CharacteristicModel::from_entries(vec![Characteristic::new("a", 0.0)]),
        );
        let c = Composition::new(
            "x",
            CharacteristicModel::from_entries(vec![
                Characteristic::new("a", 5.0),
                Characteristic::new("f", 0.0).facilitating("a", 2.0),
            ]),
        );
        assert_eq!(harmonic_value(&c, &e, &ctx).value, -0.5);
    }

    #[test]
    fn significance_examples() {
        let ctx = Context::new("c", 4.0);
        let e = Expression::new("e", model(&[1.0, 2.0, 3.0, 4.0]));
        let x = comp("x", &[1.0, 2.0, 3.0, 4.0]);
        let s = harmonic_significance(&x, &e, &ctx, core::slice::from_ref(&x)).unwrap();
        assert_eq!((s.value, s.n_conforming, s.m), (1.0, 4, 4));

        let other = comp("y", &[7.0, 7.0, 7.0, 7.0]);
        let s = harmonic_significance(&x, &e, &ctx, &[x.clone(), other]).unwrap();
        assert_eq!(s.m, 8);
        assert_eq!(s.value, 1.0 * 4.0 / 8.0);
    }

    #[test]
    fn significance_errors() {
        let ctx = Context::new("c", 4.0);
        let e = Expression::new("e", model(&[1.0]));
        let empty = Composition::new("x", CharacteristicModel::new());
        assert_eq!(
            harmonic_significance(&empty, &e, &ctx, core::slice::from_ref(&empty)),
            Err(Error::EmptyParticipants)
        );
        assert!(matches!(
            harmonic_significance(&empty, &e, &ctx, &[]),
            Err(Error::NotParticipant { .. })
        ));
    }

    #[test]
    fn significance_breaks_hv_ties() {
        // both HV 1.0 over their own characteristics; "rich" conforms on more keys
        let ctx = Context::new("c", 4.0).with_selection_size(1);
        let e = Expression::new("e", model(&[1.0, 2.0]));
        let rich = comp("rich", &[1.0, 2.0]);
        let poor = comp("poor", &[1.0]);
        let picked = select_compositions(&[poor.clone(), rich.clone()], &e, &ctx);
        assert_eq!(picked.len(), 1);
        assert_eq!(picked[0].id, "rich");
        assert_eq!(picked[0].hv.value, 1.0);
    }

    #[test]
    fn selection_returns_everything_when_k_large() {
        let ctx = Context::new("c", 4.0).with_selection_size(10);
        let e = Expression::new("e", model(&[1.0, 2.0]));
        let cs = [comp("b", &[1.0, 2.0]), comp("a", &[1.0, 2.0]), comp("c", &[9.0])];
        let picked = select_compositions(&cs, &e, &ctx);
        let ids: Vec<&str> = picked.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, vec!["a", "b", "c"]);
    }

    #[test]
    fn rms_examples() {
        assert_eq!(harmonic_state(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        let s = harmonic_state(&[0.6, 0.8]).unwrap();
        assert!((s - libm::sqrt(0.5)).abs() < 1e-12);
        assert_eq!(harmonic_state(&[-0.5]).unwrap(), 0.5);
        assert_eq!(harmonic_state(&[]), Err(Error::EmptySelection));
    }

    #[test]
    fn status_examples() {
        let mut h = StateHistory::new();
        assert!(h.push(0, vec![0.1, 0.3], 0.0));
        assert!(h.push(1, vec![0.4], 0.0));
        assert!(!h.push(1, vec![9.0], 0.0));
        assert!((harmonic_status(&h, 0, 1).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(harmonic_status(&h, 1, 1).unwrap(), 0.4);
        assert_eq!(
            harmonic_status(&h, 5, 9),
            Err(Error::EmptyInterval { from: 5, to: 9 })
        );
        assert_eq!(
            harmonic_status(&h, 2, 1),
            Err(Error::InvalidInterval { from: 2, to: 1 })
        );

        let mut flat = StateHistory::new();
        for t in 0..5 {
            flat.push(t, vec![0.5, 0.5], 0.5);
        }
        assert_eq!(harmonic_status(&flat, 0, 4).unwrap(), 0.5);
    }

    #[test]
    fn system_state_of_nothing_is_zero() {
        let ctx = Context::new("c", 4.0);
        let e = Expression::new("e", model(&[1.0]));
        assert_eq!(system_state(&e, &ctx, &[]), 0.0);
    }
}
