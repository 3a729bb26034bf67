//! Dolev–Yao message deduction and the adversary knowledge algorithms.
//!
//! Derivability has exactly four rules: membership, decryption with a known
//! inverse key, and the two pair projections. There are no composition
//! rules, so `{a, b} ⊬ a.b`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::Answer;
use crate::syntax::{AgentId, Formula, Message};

/// Separator between key indices in a random-guess token (`"3:7"`).
pub const GUESS_DELIMITER: char = ':';

/// Finite key space with an involutive inverse map. Symmetric keys are their
/// own inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeySpace {
    names: Vec<String>,
    inverse: BTreeMap<String, String>,
}

impl KeySpace {
    /// Builds a key space from `(name, inverse)` declarations. A missing
    /// inverse is inferred from the partner declaration, or defaults to the
    /// key itself.
    pub fn new<'a, I>(decls: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, Option<&'a str>)>,
    {
        let decls: Vec<(String, Option<String>)> = decls
            .into_iter()
            .map(|(n, i)| (n.to_string(), i.map(str::to_string)))
            .collect();
        let mut names = Vec::with_capacity(decls.len());
        for (name, _) in &decls {
            if names.contains(name) {
                return Err(Error::Schema(format!("key `{name}` declared twice")));
            }
            names.push(name.clone());
        }
        let mut inverse: BTreeMap<String, String> = BTreeMap::new();
        let bind = |a: &str, b: &str, inverse: &mut BTreeMap<String, String>| -> Result<()> {
            for (x, y) in [(a, b), (b, a)] {
                match inverse.get(x) {
                    Some(prev) if prev != y => {
                        return Err(Error::Schema(format!(
                            "key `{x}` has conflicting inverses `{prev}` and `{y}`"
                        )))
                    }
                    _ => {
                        inverse.insert(x.to_string(), y.to_string());
                    }
                }
            }
            Ok(())
        };
        for (name, inv) in &decls {
            if let Some(inv) = inv {
                if !names.contains(inv) {
                    return Err(Error::UnknownKey(inv.clone()));
                }
                bind(name, inv, &mut inverse)?;
            }
        }
        for name in &names {
            if !inverse.contains_key(name) {
                inverse.insert(name.clone(), name.clone());
            }
        }
        Ok(KeySpace { names, inverse })
    }

    /// `n` symmetric keys named `k0 .. k{n-1}`.
    pub fn symmetric(n: usize) -> Self {
        let names: Vec<String> = (0..n).map(|i| format!("k{i}")).collect();
        KeySpace::new(names.iter().map(|n| (n.as_str(), None))).expect("distinct names")
    }

    pub fn contains(&self, name: &str) -> bool {
        self.inverse.contains_key(name)
    }

    pub fn inverse(&self, name: &str) -> Option<&str> {
        self.inverse.get(name).map(String::as_str)
    }

    /// Keys in declaration order; guess tokens index into this list.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// `(name, inverse)` pairs in declaration order.
    pub fn declarations(&self) -> impl Iterator<Item = (&str, &str)> {
        self.names.iter().map(|n| (n.as_str(), self.inverse[n].as_str()))
    }
}

/// The adversary's view: initially known keys and intercepted messages.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdversaryLocal {
    pub initkeys: BTreeSet<String>,
    pub received: Vec<Message>,
}

impl AdversaryLocal {
    pub fn new(initkeys: impl IntoIterator<Item = String>, received: Vec<Message>) -> Self {
        AdversaryLocal {
            initkeys: initkeys.into_iter().collect(),
            received,
        }
    }

    /// `received ∪ initkeys` as a set of messages.
    pub fn hypotheses(&self) -> Vec<Message> {
        let mut h: Vec<Message> = self.initkeys.iter().map(|k| Message::Key(k.clone())).collect();
        h.extend(self.received.iter().cloned());
        h
    }

    /// Number of distinct keys used to encrypt inside the intercepted
    /// messages.
    pub fn keys_used(&self) -> usize {
        let mut used = Vec::new();
        for m in &self.received {
            m.encryption_keys(&mut used);
        }
        used.len()
    }
}

/// Syntactic containment `m ⊑ m′`. Encryption is transparent here: no key
/// knowledge is needed to contain the plaintext.
pub fn contains(m: &Message, within: &Message) -> bool {
    if m == within {
        return true;
    }
    match within {
        Message::Concat(a, b) => contains(m, a) || contains(m, b),
        Message::Encrypt(body, _) => contains(m, body),
        Message::Plain(_) | Message::Key(_) => false,
    }
}

/// Decomposition closure of `h`: split pairs, and decrypt whenever the
/// inverse key is itself in the closure. Every member is a subterm of `h`,
/// so the worklist drains.
pub fn closure(h: &[Message], keys: &KeySpace) -> HashSet<Message> {
    let mut known: HashSet<Message> = HashSet::new();
    let mut key_names: HashSet<String> = HashSet::new();
    let mut locked: Vec<(Message, String)> = Vec::new();
    let mut work: Vec<Message> = Vec::new();
    for m in h {
        let m = m.normalize(keys);
        if known.insert(m.clone()) {
            work.push(m);
        }
    }
    while let Some(t) = work.pop() {
        let mut learned = Vec::new();
        match &t {
            Message::Concat(a, b) => {
                learned.push((**a).clone());
                learned.push((**b).clone());
            }
            Message::Encrypt(body, k) => {
                let inv = keys.inverse(k).unwrap_or(k).to_string();
                if key_names.contains(&inv) {
                    learned.push((**body).clone());
                } else {
                    locked.push(((**body).clone(), inv));
                }
            }
            Message::Key(name) => {
                key_names.insert(name.clone());
                let (open, still): (Vec<_>, Vec<_>) = locked.drain(..).partition(|(_, inv)| inv == name);
                locked = still;
                learned.extend(open.into_iter().map(|(body, _)| body));
            }
            Message::Plain(_) => {}
        }
        for m in learned {
            if known.insert(m.clone()) {
                work.push(m);
            }
        }
    }
    known
}

/// `h ⊢ m`.
pub fn derives(h: &[Message], m: &Message, keys: &KeySpace) -> bool {
    closure(h, keys).contains(&m.normalize(keys))
}

/// Every key the adversary can extract from its initial keys and
/// intercepted messages.
pub fn keysof(local: &AdversaryLocal, keys: &KeySpace) -> BTreeSet<String> {
    closure(&local.hypotheses(), keys)
        .into_iter()
        .filter_map(|m| match m {
            Message::Key(k) => Some(k),
            _ => None,
        })
        .collect()
}

/// Whether `m` can be taken out of `within` by splitting pairs and
/// decrypting with keys whose inverse is in `known`.
fn submsg(m: &Message, within: &Message, known: &BTreeSet<String>, keys: &KeySpace) -> bool {
    if m == within {
        return true;
    }
    match within {
        Message::Concat(a, b) => submsg(m, a, known, keys) || submsg(m, b, known, keys),
        Message::Encrypt(body, k) => {
            let inv = keys.inverse(k).unwrap_or(k);
            known.contains(inv) && submsg(m, body, known, keys)
        }
        Message::Plain(_) | Message::Key(_) => false,
    }
}

fn run_with_keys(
    agent: AgentId,
    query: &Formula,
    local: &AdversaryLocal,
    extra: &[String],
    keys: &KeySpace,
) -> Answer {
    let Formula::Has(who, m) = query else {
        return Answer::Unknown;
    };
    if *who != agent {
        return Answer::Unknown;
    }
    let Ok(m) = m.resolve(keys) else {
        return Answer::Unknown;
    };
    if let Message::Key(k) = &m {
        if local.initkeys.contains(k) {
            return Answer::Yes;
        }
    }
    let mut known = keysof(local, keys);
    known.extend(extra.iter().cloned());
    if local.received.iter().any(|r| submsg(&m, r, &known, keys)) {
        Answer::Yes
    } else {
        Answer::Unknown
    }
}

/// The deterministic Dolev–Yao knowledge algorithm. Answers only `has`
/// queries about the adversary itself, with Yes or Unknown.
pub fn a_dy(agent: AgentId, query: &Formula, local: &AdversaryLocal, keys: &KeySpace) -> Answer {
    run_with_keys(agent, query, local, &[], keys)
}

/// Dolev–Yao with `r` uniformly guessed keys, drawn with replacement and
/// encoded in the derandomizer token.
pub fn a_dy_rg(
    r: usize,
    agent: AgentId,
    query: &Formula,
    local: &AdversaryLocal,
    token: &str,
    keys: &KeySpace,
) -> Result<Answer> {
    let guessed = decode_guess_token(token, r, keys)?;
    Ok(run_with_keys(agent, query, local, &guessed, keys))
}

/// Decodes `r` key indices separated by [`GUESS_DELIMITER`].
pub fn decode_guess_token(token: &str, r: usize, keys: &KeySpace) -> Result<Vec<String>> {
    let malformed = |reason: String| Error::MalformedToken {
        token: token.to_string(),
        reason,
    };
    if r == 0 {
        return if token.is_empty() {
            Ok(Vec::new())
        } else {
            Err(malformed("expected empty token for zero guesses".into()))
        };
    }
    let parts: Vec<&str> = token.split(GUESS_DELIMITER).collect();
    if parts.len() != r {
        return Err(malformed(format!("expected {r} key indices, found {}", parts.len())));
    }
    parts
        .into_iter()
        .map(|p| {
            let idx: usize = p
                .parse()
                .map_err(|_| malformed(format!("`{p}` is not a key index")))?;
            keys.names()
                .get(idx)
                .cloned()
                .ok_or_else(|| malformed(format!("key index {idx} out of range")))
        })
        .collect()
}

pub fn encode_guess_token(indices: &[usize]) -> String {
    indices
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(&GUESS_DELIMITER.to_string())
}

/// All `|keys|^r` guess tokens in lexicographic index order.
pub fn all_guess_tokens(r: usize, key_count: usize) -> Vec<String> {
    let mut out = vec![Vec::new()];
    for _ in 0..r {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                (0..key_count).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    out.iter().map(|p| encode_guess_token(p)).collect()
}

/// Upper bound on the chance that `r` random guesses yield algorithmic
/// knowledge the adversary lacks, when `k_used` of `keyspace_size` keys
/// occur in its messages.
#[derive(Clone, Debug, PartialEq)]
pub struct GuessBound {
    /// `1 − e^{−2 r K / |𝒦|}`
    pub bound: f64,
    /// `(1 − K/|𝒦|)^r`, the exact probability that no guess hits a used key.
    pub exact_miss: BigRational,
}

pub fn guessing_bound(r: usize, k_used: usize, keyspace_size: usize) -> Result<GuessBound> {
    if keyspace_size == 0 {
        return Err(Error::BoundHypothesis("key space is empty".into()));
    }
    if 2 * k_used >= keyspace_size {
        return Err(Error::BoundHypothesis(format!(
            "K/|K| = {k_used}/{keyspace_size} is not below 1/2"
        )));
    }
    let ratio = BigRational::new(BigInt::from(k_used), BigInt::from(keyspace_size));
    let miss = BigRational::one() - ratio;
    let exact_miss = (0..r).fold(BigRational::one(), |acc, _| acc * &miss);
    let exponent = -2.0 * r as f64 * k_used as f64 / keyspace_size as f64;
    let bound = -exponent.exp_m1();
    debug_assert!(exact_miss > BigRational::zero());
    Ok(GuessBound { bound, exact_miss })
}
