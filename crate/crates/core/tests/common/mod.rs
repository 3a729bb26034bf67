//! Independent oracles. Each one recomputes a quantity from raw model data
//! by brute force, without going through the library's evaluator.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use algknow::dolevyao::{AdversaryLocal, KeySpace};
use algknow::scenarios::{random_key_space, random_message, RANDOM_ATOMS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use algknow::model::{AlgorithmSpec, Answer, ModelDocument, NegationMode, ProbabilisticStructure};
use algknow::syntax::{AgentId, Formula, Message};
use algknow::Rational;
use num_traits::{One, Zero};

pub fn q(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

pub const SEEDS: u64 = 200;

// ---------------------------------------------------------------------------
// Reference evaluator with no derandomizers.

/// Answer of a token-free table to `f` at state `id`.
fn table_answer(spec: &AlgorithmSpec, f: &Formula, id: &str) -> Answer {
    let AlgorithmSpec::Table { default, negation, entries } = spec else {
        panic!("reference evaluator only reads table algorithms");
    };
    for e in entries {
        assert!(e.token.is_none(), "reference evaluator needs deterministic tables");
        if &e.query == f && e.state.as_deref().map_or(true, |s| s == id) {
            return e.answer;
        }
    }
    match (negation, f) {
        (Some(mode), Formula::Not(inner)) => {
            let a = table_answer(spec, inner, id);
            match (mode, a) {
                (_, Answer::Yes) => Answer::No,
                (_, Answer::No) => Answer::Yes,
                (NegationMode::Weak, Answer::Unknown) => Answer::Unknown,
                (NegationMode::Strong, Answer::Unknown) => Answer::Yes,
            }
        }
        _ => *default,
    }
}

/// Truth of a Pr-free, Ev-free formula at state `s` of a document whose
/// algorithms are deterministic tables.
pub fn ref_holds(doc: &ModelDocument, s: usize, f: &Formula) -> bool {
    let st = &doc.states[s];
    match f {
        Formula::Prop(p) => st.valuation.get(p).copied().unwrap_or(false),
        Formula::Not(g) => !ref_holds(doc, s, g),
        Formula::And(a, b) => ref_holds(doc, s, a) && ref_holds(doc, s, b),
        Formula::Knows(AgentId(i), g) => {
            let agent = &doc.agents[i - 1];
            let here = &st.locals[agent];
            (0..doc.states.len())
                .filter(|&t| &doc.states[t].locals[agent] == here)
                .all(|t| ref_holds(doc, t, g))
        }
        Formula::AlgKnows(AgentId(i), g) => {
            let agent = &doc.agents[i - 1];
            table_answer(&doc.algorithms[agent], g, &st.id) == Answer::Yes
        }
        other => panic!("reference evaluator does not cover {other}"),
    }
}

// ---------------------------------------------------------------------------
// Brute-force evidence.

/// Mass of answer `ob` at state `s`, summed point by point.
pub fn answer_mass(n: &ProbabilisticStructure<Rational>, agent: AgentId, f: &Formula, s: usize, ob: Answer) -> Rational {
    let d = n.derandomizers();
    (0..d.len())
        .filter(|&v| n.run_algorithm(agent, f, s, v).unwrap() == ob)
        .fold(Rational::zero(), |acc, v| acc + d.exact_prob(v))
}

/// Every weight `ob` lends hypothesis `pos` when one measure is picked from
/// each nonempty side, with zero denominators dropped.
pub fn brute_weights(pos: &[Rational], neg: &[Rational]) -> Vec<Rational> {
    let mut out = BTreeSet::new();
    let neg_choices: Vec<Rational> = if neg.is_empty() { vec![Rational::zero()] } else { neg.to_vec() };
    for x in pos {
        for y in &neg_choices {
            let d = x + y;
            if !d.is_zero() {
                out.insert(x / d);
            }
        }
    }
    out.into_iter().collect()
}

/// Lower and upper evidence for `f` at `(s, v)`, from scratch. `truth`
/// gives the truth of `f` at each state.
pub fn brute_ev(
    n: &ProbabilisticStructure<Rational>,
    agent: AgentId,
    f: &Formula,
    truth: &dyn Fn(usize) -> bool,
    s: usize,
    v: usize,
) -> (Rational, Rational) {
    let ob = n.run_algorithm(agent, f, s, v).unwrap();
    let i = agent.0 - 1;
    let label = &n.state(s).locals[i];
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for t in 0..n.state_count() {
        if &n.state(t).locals[i] != label {
            continue;
        }
        let m = answer_mass(n, agent, f, t, ob);
        if truth(t) {
            pos.push(m);
        } else {
            neg.push(m);
        }
    }
    let w = brute_weights(&pos, &neg);
    match (w.first(), w.last()) {
        (Some(lo), Some(hi)) => (lo.clone(), hi.clone()),
        _ => (Rational::zero(), Rational::zero()),
    }
}

/// Tight `(α, β)` from scratch.
pub fn brute_reliability(
    n: &ProbabilisticStructure<Rational>,
    agent: AgentId,
    f: &Formula,
    truth: &dyn Fn(usize) -> bool,
) -> (Rational, Rational) {
    let mut alpha = Rational::one();
    let mut beta = Rational::zero();
    for s in 0..n.state_count() {
        let y = answer_mass(n, agent, f, s, Answer::Yes);
        if truth(s) {
            alpha = alpha.min(y);
        } else {
            beta = beta.max(y);
        }
    }
    (alpha, beta)
}

/// Least weight of Yes for primality in the `n`-candidate model: the prime
/// world says Yes surely, a composite world with `k` witnesses says Yes on
/// the `n − k` non-witnesses.
pub fn primality_lower_oracle(n: u64) -> Rational {
    let prime_yes = Rational::one();
    let mut best: Option<Rational> = None;
    for k in (n / 2 + 1)..=n {
        let non_witnesses = (1..=n).filter(|&a| a > k).count() as i64;
        let y = Rational::new(non_witnesses.into(), (n as i64).into());
        let w = &prime_yes / (&prime_yes + y);
        best = Some(match best {
            Some(b) if b <= w => b,
            _ => w,
        });
    }
    best.expect("at least one composite world")
}

// ---------------------------------------------------------------------------
// Dolev–Yao saturation.

/// Naive fixpoint of projection and decryption, rescanning the whole set
/// until nothing new appears.
pub fn saturate(h: &[Message], keys: &KeySpace) -> HashSet<Message> {
    let mut known: HashSet<Message> = h.iter().map(|m| m.normalize(keys)).collect();
    loop {
        let mut new = Vec::new();
        for m in &known {
            match m {
                Message::Concat(a, b) => {
                    new.push((**a).clone());
                    new.push((**b).clone());
                }
                Message::Encrypt(body, k) => {
                    let inv = keys.inverse(k).expect("declared key");
                    if known.contains(&Message::key(inv)) {
                        new.push((**body).clone());
                    }
                }
                _ => {}
            }
        }
        let before = known.len();
        known.extend(new);
        if known.len() == before {
            return known;
        }
    }
}

/// `m ⊑ within`.
pub fn submessage(m: &Message, within: &Message) -> bool {
    m == within
        || match within {
            Message::Concat(a, b) => submessage(m, a) || submessage(m, b),
            Message::Encrypt(body, _) => submessage(m, body),
            _ => false,
        }
}

pub struct Instance {
    pub keys: KeySpace,
    pub local: AdversaryLocal,
    pub candidates: Vec<Message>,
}

/// Random message set of depth at most 4 over at most 6 keys, with every
/// subterm, key and atom as a query candidate.
pub fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys = random_key_space(&mut rng, 6);
    let count = rng.gen_range(0..=4);
    let received: Vec<Message> = (0..count)
        .map(|_| random_message(&mut rng, 4, &RANDOM_ATOMS, &keys).normalize(&keys))
        .collect();
    let initkeys: Vec<String> = keys.names().iter().filter(|_| rng.gen_bool(0.25)).cloned().collect();
    let local = AdversaryLocal::new(initkeys, received);
    let mut candidates: Vec<Message> = Vec::new();
    let mut add = |m: Message| {
        if !candidates.contains(&m) {
            candidates.push(m);
        }
    };
    fn walk(m: &Message, add: &mut dyn FnMut(Message)) {
        add(m.clone());
        match m {
            Message::Concat(a, b) => {
                walk(a, add);
                walk(b, add);
            }
            Message::Encrypt(body, _) => walk(body, add),
            _ => {}
        }
    }
    for m in &local.received {
        walk(m, &mut add);
    }
    for k in keys.names() {
        add(Message::key(k.clone()));
    }
    for a in RANDOM_ATOMS {
        add(Message::plain(a));
    }
    for _ in 0..4 {
        add(random_message(&mut rng, 2, &RANDOM_ATOMS, &keys).normalize(&keys));
    }
    Instance { keys, local, candidates }
}
