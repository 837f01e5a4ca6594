//! Bounded depth-first search for multi-party exchange chains.
//!
//! Actions are tried in a fixed order: settlements, deferred obligations,
//! transforms, then trades, each by party index and holding order. Before
//! descending, every node first checks whether one of its children already
//! closes an acceptable chain, so a one-step swap is never passed over for
//! a longer detour. A transposition table keyed on the holdings and open
//! obligations skips states already explored with at least as much
//! remaining depth.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::{pareto_acceptable, Chain, ExchangeAction, Party};
use crate::calculus::{state_of_scored, Scored};
use crate::model::Composition;
use crate::transform::{apply_spec, Enrichment, Simplification, TransformSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_depth: usize,
    pub allow_transform: bool,
    pub allow_deferred: bool,
}

impl SearchConfig {
    pub fn new(max_depth: usize) -> Self {
        SearchConfig {
            max_depth,
            allow_transform: true,
            allow_deferred: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Debt {
    id: u32,
    debtor: usize,
    creditor: usize,
}

/// Holdings are indices into the search's composition arena.
#[derive(Debug, Clone)]
struct Node {
    holdings: Vec<Vec<u32>>,
    debts: Vec<Debt>,
    next_debt: u32,
}

type Key = (Vec<Vec<u32>>, Vec<(usize, usize)>);

fn sorted(holding: &[u32]) -> Vec<u32> {
    let mut v = holding.to_vec();
    v.sort_unstable();
    v
}

impl Node {
    fn key(&self) -> Key {
        let mut open: Vec<(usize, usize)> = self.debts.iter().map(|d| (d.debtor, d.creditor)).collect();
        open.sort_unstable();
        (self.holdings.iter().map(|h| sorted(h)).collect(), open)
    }
}

/// One action in arena terms; turned into an [`ExchangeAction`] only for
/// the chain that is returned.
#[derive(Debug, Clone, Copy)]
enum Step {
    Settle { debt: u32, item: u32 },
    Defer { debtor: usize, creditor: usize, item: u32 },
    Split { party: usize, source: u32, at: usize },
    Merge { party: usize, x: u32, y: u32 },
    Trade { a: usize, b: usize, give: u32, receive: u32 },
}

/// Composition identity for interning: id plus characteristic keys.
fn signature(c: &Composition) -> String {
    let mut s = c.id.clone();
    s.push('[');
    for k in c.model.keys() {
        s.push_str(k);
        s.push(',');
    }
    s.push(']');
    s
}

fn split_spec(c: &Composition, at: usize) -> TransformSpec {
    let keys: Vec<String> = c.model.keys().map(String::from).collect();
    TransformSpec::Simplify(Simplification {
        source: c.id.clone(),
        drop_keys: Vec::new(),
        groups: alloc::vec![keys[..at].to_vec(), keys[at..].to_vec()],
    })
}

fn merge_spec(x: &Composition, y: &Composition) -> TransformSpec {
    TransformSpec::Enrich(Enrichment {
        merge_ids: alloc::vec![x.id.clone(), y.id.clone()],
        ..Default::default()
    })
}

struct Search<'a> {
    parties: &'a [Party],
    cfg: &'a SearchConfig,
    arena: Vec<Composition>,
    interned: BTreeMap<String, u32>,
    initial_states: Vec<f64>,
    initial_keys: Vec<Vec<u32>>,
    /// Per party and composition: harmonic value, conforming count, size.
    scores: BTreeMap<(usize, u32), (f64, usize, usize)>,
    /// Parts from splitting a composition at each point, `None` where the
    /// split is refused.
    splits: BTreeMap<(usize, u32), Vec<Option<Vec<u32>>>>,
    merges: BTreeMap<(usize, u32, u32), Option<u32>>,
    seen: BTreeMap<Key, usize>,
}

impl<'a> Search<'a> {
    fn intern(&mut self, c: &Composition) -> u32 {
        let sig = signature(c);
        if let Some(&i) = self.interned.get(&sig) {
            return i;
        }
        let i = self.arena.len() as u32;
        let mut c = c.clone();
        c.owner = None;
        self.arena.push(c);
        self.interned.insert(sig, i);
        i
    }

    fn owned(&self, party: usize, i: u32) -> Composition {
        let mut c = self.arena[i as usize].clone();
        c.owner = Some(self.parties[party].id.clone());
        c
    }

    fn id(&self, i: u32) -> &str {
        &self.arena[i as usize].id
    }

    fn state(&mut self, party: usize, holding: &[u32]) -> f64 {
        let p = &self.parties[party];
        for &i in holding {
            if !self.scores.contains_key(&(party, i)) {
                let s = Scored::new(&self.arena[i as usize], &p.expression, &p.context);
                self.scores.insert((party, i), (s.hv, s.n_conforming, s.len));
            }
        }
        let mut scored: Vec<Scored<'_>> = holding
            .iter()
            .map(|&i| {
                let (hv, n_conforming, len) = self.scores[&(party, i)];
                Scored {
                    id: &self.arena[i as usize].id,
                    hv,
                    n_conforming,
                    len,
                }
            })
            .collect();
        state_of_scored(&mut scored, p.context.selection_size)
    }

    fn split_parts(&mut self, party: usize, source: u32) -> Vec<Option<Vec<u32>>> {
        if let Some(done) = self.splits.get(&(party, source)) {
            return done.clone();
        }
        let c = self.owned(party, source);
        let expression = &self.parties[party].expression;
        let mut out = Vec::new();
        for at in 1..c.model.len() {
            let parts = apply_spec(expression, core::slice::from_ref(&c), &split_spec(&c, at))
                .ok()
                .map(|(_, parts)| parts.iter().map(|p| self.intern(p)).collect());
            out.push(parts);
        }
        self.splits.insert((party, source), out.clone());
        out
    }

    fn merged(&mut self, party: usize, x: u32, y: u32) -> Option<u32> {
        if let Some(&done) = self.merges.get(&(party, x, y)) {
            return done;
        }
        let pair = [self.owned(party, x), self.owned(party, y)];
        let spec = merge_spec(&pair[0], &pair[1]);
        let result = match apply_spec(&self.parties[party].expression, &pair, &spec) {
            Ok((_, out)) if out.len() == 1 => Some(self.intern(&out[0])),
            _ => None,
        };
        self.merges.insert((party, x, y), result);
        result
    }

    /// Splits at every contiguous point of each holding, then merges of
    /// holding pairs with disjoint keys, with the holding each one leaves.
    fn transforms(&mut self, party: usize, holding: &[u32]) -> Vec<(Step, Vec<u32>)> {
        let mut out = Vec::new();
        for (pos, &source) in holding.iter().enumerate() {
            for (k, parts) in self.split_parts(party, source).into_iter().enumerate() {
                let Some(parts) = parts else { continue };
                let mut next = holding.to_vec();
                next.splice(pos..=pos, parts);
                out.push((Step::Split { party, source, at: k + 1 }, next));
            }
        }
        for i in 0..holding.len() {
            for j in i + 1..holding.len() {
                let (x, y) = (holding[i], holding[j]);
                let (cx, cy) = (&self.arena[x as usize], &self.arena[y as usize]);
                if cx.model.keys().any(|k| cy.model.contains(k)) {
                    continue;
                }
                let Some(result) = self.merged(party, x, y) else { continue };
                let (ix, iy) = (self.id(x), self.id(y));
                let mut next: Vec<u32> = holding
                    .iter()
                    .copied()
                    .filter(|&h| self.id(h) != ix && self.id(h) != iy)
                    .collect();
                if next.iter().any(|&h| self.id(h) == self.id(result)) {
                    continue;
                }
                next.push(result);
                out.push((Step::Merge { party, x, y }, next));
            }
        }
        out
    }

    fn successors(&mut self, node: &Node, remaining: usize) -> Vec<(Step, Node)> {
        let mut out = Vec::new();
        let n = self.parties.len();

        for debt in &node.debts {
            for (hi, &item) in node.holdings[debt.debtor].iter().enumerate() {
                let mut child = node.clone();
                child.holdings[debt.debtor].remove(hi);
                child.holdings[debt.creditor].push(item);
                child.debts.retain(|d| d.id != debt.id);
                out.push((Step::Settle { debt: debt.id, item }, child));
            }
        }

        // an obligation opened now needs at least one later step to settle
        if self.cfg.allow_deferred && node.debts.len() + 1 < remaining {
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    for (yi, &item) in node.holdings[b].iter().enumerate() {
                        let mut child = node.clone();
                        child.holdings[b].remove(yi);
                        child.holdings[a].push(item);
                        child.debts.push(Debt {
                            id: child.next_debt,
                            debtor: a,
                            creditor: b,
                        });
                        child.next_debt += 1;
                        out.push((Step::Defer { debtor: a, creditor: b, item }, child));
                    }
                }
            }
        }

        if self.cfg.allow_transform {
            for pi in 0..n {
                if !self.parties[pi].can_transform {
                    continue;
                }
                for (step, holding) in self.transforms(pi, &node.holdings[pi]) {
                    let mut child = node.clone();
                    child.holdings[pi] = holding;
                    out.push((step, child));
                }
            }
        }

        for a in 0..n {
            for b in a + 1..n {
                for (xi, &give) in node.holdings[a].iter().enumerate() {
                    for (yi, &receive) in node.holdings[b].iter().enumerate() {
                        let mut child = node.clone();
                        child.holdings[a].remove(xi);
                        child.holdings[b].remove(yi);
                        child.holdings[a].push(receive);
                        child.holdings[b].push(give);
                        out.push((Step::Trade { a, b, give, receive }, child));
                    }
                }
            }
        }

        out
    }

    /// Ids only in `before`, then ids only in `after`, each sorted.
    fn difference(&self, before: &[u32], after: &[u32]) -> (Vec<String>, Vec<String>) {
        let b: BTreeSet<&str> = before.iter().map(|&i| self.id(i)).collect();
        let a: BTreeSet<&str> = after.iter().map(|&i| self.id(i)).collect();
        (
            b.difference(&a).map(|s| String::from(*s)).collect(),
            a.difference(&b).map(|s| String::from(*s)).collect(),
        )
    }

    /// `steps` as exchange actions.
    fn actions(&mut self, steps: &[Step]) -> Vec<ExchangeAction> {
        let party = |i: usize| self.parties[i].id.clone();
        let mut debts: Vec<Debt> = Vec::new();
        let mut next_debt = 0;
        let mut out = Vec::with_capacity(steps.len());
        for step in steps {
            let action = match *step {
                Step::Settle { debt, item } => {
                    let at = debts.iter().position(|d| d.id == debt).expect("settled debt is open");
                    let d = debts.remove(at);
                    ExchangeAction::Settle {
                        obligation: debt,
                        actor: party(d.debtor),
                        counterparty: party(d.creditor),
                        give: String::from(self.id(item)),
                    }
                }
                Step::Defer { debtor, creditor, item } => {
                    debts.push(Debt {
                        id: next_debt,
                        debtor,
                        creditor,
                    });
                    next_debt += 1;
                    ExchangeAction::DeferredObligation {
                        obligation: next_debt - 1,
                        actor: party(debtor),
                        counterparty: party(creditor),
                        receive: String::from(self.id(item)),
                    }
                }
                Step::Split { party: p, source, at } => {
                    let parts = self.splits[&(p, source)][at - 1].clone().expect("split was allowed");
                    let (consumed, produced) = self.difference(&[source], &parts);
                    ExchangeAction::Transform {
                        actor: party(p),
                        spec: split_spec(&self.arena[source as usize], at),
                        consumed,
                        produced,
                    }
                }
                Step::Merge { party: p, x, y } => {
                    let result = self.merges[&(p, x, y)].expect("merge was allowed");
                    let (consumed, produced) = self.difference(&[x, y], &[result]);
                    ExchangeAction::Transform {
                        actor: party(p),
                        spec: merge_spec(&self.arena[x as usize], &self.arena[y as usize]),
                        consumed,
                        produced,
                    }
                }
                Step::Trade { a, b, give, receive } => ExchangeAction::Trade {
                    actor: party(a),
                    counterparty: party(b),
                    give: String::from(self.id(give)),
                    receive: String::from(self.id(receive)),
                },
            };
            out.push(action);
        }
        out
    }

    /// Accepted chain ending at `node`, if the state qualifies.
    fn accept(&mut self, node: &Node, path: &[Step]) -> Option<Chain> {
        if path.is_empty() || !node.debts.is_empty() {
            return None;
        }
        let changed = (0..self.parties.len())
            .filter(|&i| sorted(&node.holdings[i]) != self.initial_keys[i])
            .count();
        if changed < 2 {
            return None;
        }
        let all_returns: Vec<f64> = (0..self.parties.len())
            .map(|i| self.state(i, &node.holdings[i]) - self.initial_states[i])
            .collect();
        if !pareto_acceptable(&all_returns) {
            return None;
        }
        let actions = self.actions(path);
        let mut parties = BTreeSet::new();
        for a in &actions {
            parties.insert(String::from(a.actor()));
            if let Some(c) = a.counterparty() {
                parties.insert(String::from(c));
            }
        }
        let returns = self
            .parties
            .iter()
            .zip(&all_returns)
            .filter(|(p, _)| parties.contains(&p.id))
            .map(|(p, r)| (p.id.clone(), *r))
            .collect();
        Some(Chain {
            actions,
            parties,
            returns,
        })
    }

    fn dfs(&mut self, node: &Node, path: &mut Vec<Step>, remaining: usize) -> Option<Chain> {
        if remaining == 0 || node.debts.len() > remaining {
            return None;
        }
        let key = node.key();
        if self.seen.get(&key).is_some_and(|&r| r >= remaining) {
            return None;
        }
        self.seen.insert(key, remaining);

        let children = self.successors(node, remaining);
        for (step, child) in &children {
            path.push(*step);
            if let Some(chain) = self.accept(child, path) {
                return Some(chain);
            }
            path.pop();
        }
        for (step, child) in children {
            path.push(step);
            if let Some(chain) = self.dfs(&child, path, remaining - 1) {
                return Some(chain);
            }
            path.pop();
        }
        None
    }
}

/// First chain, in search order, of at most `max_depth` actions where every party's
/// return is non-negative, some party gains, at least two parties' holdings
/// change, and all deferred obligations are settled.
pub fn find_chain(systems: &[Party], max_depth: usize) -> Option<Chain> {
    find_chain_with(systems, &SearchConfig::new(max_depth))
}

pub fn find_chain_with(systems: &[Party], cfg: &SearchConfig) -> Option<Chain> {
    if systems.len() < 2 || cfg.max_depth == 0 {
        return None;
    }
    let mut search = Search {
        parties: systems,
        cfg,
        arena: Vec::new(),
        interned: BTreeMap::new(),
        initial_states: systems.iter().map(Party::state).collect(),
        initial_keys: Vec::new(),
        scores: BTreeMap::new(),
        splits: BTreeMap::new(),
        merges: BTreeMap::new(),
        seen: BTreeMap::new(),
    };
    let holdings: Vec<Vec<u32>> = systems
        .iter()
        .map(|p| p.holdings.iter().map(|c| search.intern(c)).collect())
        .collect();
    search.initial_keys = holdings.iter().map(|h| sorted(h)).collect();
    let root = Node {
        holdings,
        debts: Vec::new(),
        next_debt: 0,
    };
    search.dfs(&root, &mut Vec::new(), cfg.max_depth)
}
