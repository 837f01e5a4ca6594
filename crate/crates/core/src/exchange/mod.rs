//! Exchange between systems: per-party returns, exchange value and
//! efficiency, multi-party chain search and self-sustaining cycles.
//!
//! Every party measures value through its own expression and context, so
//! the same composition can be worth different amounts to different
//! parties.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::calculus::system_state;
use crate::error::{Error, Result};
use crate::model::{Composition, Context, Expression};
use crate::transform::{TransformSpec, STATE_TOLERANCE};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

mod cycles;
mod search;

pub use cycles::{detect_cycles, trade_graph, Cycle, TradeEdge, TradeGraph};
pub use search::{find_chain, find_chain_with, SearchConfig};

/// A system taking part in exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct Party {
    pub id: String,
    pub expression: Expression,
    pub context: Context,
    pub holdings: Vec<Composition>,
    /// Whether chain search may transform this party's holdings.
    pub can_transform: bool,
}

impl Party {
    pub fn new(
        id: impl Into<String>,
        expression: Expression,
        context: Context,
        holdings: Vec<Composition>,
    ) -> Self {
        Party {
            id: id.into(),
            expression,
            context,
            holdings,
            can_transform: true,
        }
    }

    /// Harmonic state over the current holdings.
    pub fn state(&self) -> f64 {
        system_state(&self.expression, &self.context, &self.holdings)
    }

    pub fn state_with(&self, holdings: &[Composition]) -> f64 {
        system_state(&self.expression, &self.context, holdings)
    }

    pub fn owns(&self, composition_id: &str) -> bool {
        self.holdings.iter().any(|c| c.id == composition_id)
    }
}

/// A party's gain from an exchange.
pub fn party_return(before_state: f64, after_state: f64) -> f64 {
    after_state - before_state
}

/// True when no party loses and at least one gains, up to
/// [`STATE_TOLERANCE`].
pub fn pareto_acceptable<'a, I>(returns: I) -> bool
where
    I: IntoIterator<Item = &'a f64>,
{
    let mut gained = false;
    for r in returns {
        if *r < -STATE_TOLERANCE {
            return false;
        }
        gained |= *r > STATE_TOLERANCE;
    }
    gained
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ExchangeOutcome {
    /// Mean party return.
    pub xv: f64,
    /// `xv / n`.
    pub efficiency: f64,
    /// Per-party change in harmonic state.
    pub motivation: BTreeMap<String, f64>,
}

impl ExchangeOutcome {
    /// Outcome over `returns`; needs at least two parties.
    pub fn from_returns(returns: &BTreeMap<String, f64>) -> Result<Self> {
        let n = returns.len();
        if n < 2 {
            return Err(Error::InvalidChain { parties: n });
        }
        let xv = returns.values().sum::<f64>() / n as f64;
        Ok(ExchangeOutcome {
            xv,
            efficiency: exchange_efficiency(xv, n)?,
            motivation: returns.clone(),
        })
    }
}

pub fn exchange_efficiency(xv: f64, n_parties: usize) -> Result<f64> {
    if n_parties < 2 {
        return Err(Error::InvalidChain { parties: n_parties });
    }
    Ok(xv / n_parties as f64)
}

fn take(party: &mut Party, ids: &[&str]) -> Result<Vec<Composition>> {
    let mut out = Vec::with_capacity(ids.len());
    for id in ids {
        let at = party
            .holdings
            .iter()
            .position(|c| c.id == *id)
            .ok_or_else(|| Error::NotOwned {
                party: party.id.clone(),
                composition: String::from(*id),
            })?;
        out.push(party.holdings.remove(at));
    }
    Ok(out)
}

fn receive(party: &mut Party, items: Vec<Composition>) {
    for mut c in items {
        c.owner = Some(party.id.clone());
        party.holdings.push(c);
    }
}

/// Direct two-party exchange: `s1` hands over `give1`, `s2` hands over
/// `give2`. Returns the outcome and both parties after the swap.
pub fn direct_exchange(
    s1: &Party,
    s2: &Party,
    give1: &[&str],
    give2: &[&str],
) -> Result<(ExchangeOutcome, Party, Party)> {
    let mut a = s1.clone();
    let mut b = s2.clone();
    let from_a = take(&mut a, give1)?;
    let from_b = take(&mut b, give2)?;
    receive(&mut a, from_b);
    receive(&mut b, from_a);

    let mut returns = BTreeMap::new();
    returns.insert(s1.id.clone(), party_return(s1.state(), a.state()));
    returns.insert(s2.id.clone(), party_return(s2.state(), b.state()));
    Ok((ExchangeOutcome::from_returns(&returns)?, a, b))
}

/// One step of an exchange chain.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ExchangeAction {
    /// `actor` gives `give` and receives `receive` from `counterparty`.
    Trade {
        actor: String,
        counterparty: String,
        give: String,
        receive: String,
    },
    /// `actor` reshapes its own holdings.
    Transform {
        actor: String,
        spec: TransformSpec,
        consumed: Vec<String>,
        produced: Vec<String>,
    },
    /// `actor` receives `receive` now and owes `counterparty` later.
    DeferredObligation {
        obligation: u32,
        actor: String,
        counterparty: String,
        receive: String,
    },
    /// `actor` pays `counterparty` with `give`, closing `obligation`.
    Settle {
        obligation: u32,
        actor: String,
        counterparty: String,
        give: String,
    },
}

impl ExchangeAction {
    pub fn actor(&self) -> &str {
        match self {
            ExchangeAction::Trade { actor, .. }
            | ExchangeAction::Transform { actor, .. }
            | ExchangeAction::DeferredObligation { actor, .. }
            | ExchangeAction::Settle { actor, .. } => actor,
        }
    }

    pub fn counterparty(&self) -> Option<&str> {
        match self {
            ExchangeAction::Trade { counterparty, .. }
            | ExchangeAction::DeferredObligation { counterparty, .. }
            | ExchangeAction::Settle { counterparty, .. } => Some(counterparty),
            ExchangeAction::Transform { .. } => None,
        }
    }
}

/// An accepted sequence of exchange actions.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Chain {
    pub actions: Vec<ExchangeAction>,
    pub parties: BTreeSet<String>,
    /// State change of each party over the whole chain.
    pub returns: BTreeMap<String, f64>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn outcome(&self) -> Result<ExchangeOutcome> {
        ExchangeOutcome::from_returns(&self.returns)
    }

    pub fn transforms(&self) -> usize {
        self.actions
            .iter()
            .filter(|a| matches!(a, ExchangeAction::Transform { .. }))
            .count()
    }

    /// Deferred obligations closed by a later settle.
    pub fn settled_obligations(&self) -> usize {
        self.actions
            .iter()
            .filter(|a| match a {
                ExchangeAction::DeferredObligation { obligation, .. } => {
                    self.actions.iter().any(|b| {
                        matches!(b, ExchangeAction::Settle { obligation: o, .. } if o == obligation)
                    })
                }
                _ => false,
            })
            .count()
    }

    /// Replays the chain against `parties`, returning the parties' holdings
    /// afterwards. Fails on any ownership violation or unknown party.
    pub fn apply(&self, parties: &[Party]) -> Result<Vec<Party>> {
        let mut out = parties.to_vec();
        let index = |id: &str| -> Result<usize> {
            parties
                .iter()
                .position(|p| p.id == id)
                .ok_or_else(|| Error::UnknownParty(String::from(id)))
        };
        for action in &self.actions {
            match action {
                ExchangeAction::Trade {
                    actor,
                    counterparty,
                    give,
                    receive: recv,
                } => {
                    let (a, b) = (index(actor)?, index(counterparty)?);
                    let given = take(&mut out[a], &[give.as_str()])?;
                    let got = take(&mut out[b], &[recv.as_str()])?;
                    receive(&mut out[a], got);
                    receive(&mut out[b], given);
                }
                ExchangeAction::Transform { actor, spec, .. } => {
                    let a = index(actor)?;
                    let (_, holdings) =
                        crate::transform::apply_spec(&out[a].expression, &out[a].holdings, spec)?;
                    out[a].holdings = holdings;
                }
                ExchangeAction::DeferredObligation {
                    actor,
                    counterparty,
                    receive: recv,
                    ..
                } => {
                    let (a, b) = (index(actor)?, index(counterparty)?);
                    let got = take(&mut out[b], &[recv.as_str()])?;
                    receive(&mut out[a], got);
                }
                ExchangeAction::Settle {
                    actor,
                    counterparty,
                    give,
                    ..
                } => {
                    let (a, b) = (index(actor)?, index(counterparty)?);
                    let given = take(&mut out[a], &[give.as_str()])?;
                    receive(&mut out[b], given);
                }
            }
        }
        Ok(out)
    }
}
