//! Worked example structures and seeded random generators.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dolevyao::{all_guess_tokens, KeySpace};
use crate::error::{Error, Result};
use crate::model::{
    AlgorithmSpec, Answer, DerandomizerSpec, JointPoint, KeyDoc, ModelDocument, NegationMode,
    ProbabilisticStructure, StateDoc, TableEntry, TokenProb,
};
use crate::scalar::{format_rational, Scalar};
use crate::syntax::{Cmp, EvBound, Formula, Message};

fn uniform(tokens: impl IntoIterator<Item = String>) -> Vec<TokenProb> {
    let tokens: Vec<String> = tokens.into_iter().collect();
    let p = format!("1/{}", tokens.len());
    tokens
        .into_iter()
        .map(|token| TokenProb { token, prob: p.clone() })
        .collect()
}

fn single_agent(agent: &str, list: Vec<TokenProb>) -> DerandomizerSpec {
    DerandomizerSpec::Independent([(agent.to_string(), list)].into_iter().collect())
}

fn state(id: impl Into<String>, truths: &[(&str, bool)], agent: &str, label: &str) -> StateDoc {
    StateDoc {
        id: id.into(),
        valuation: truths.iter().map(|(p, b)| (p.to_string(), *b)).collect(),
        locals: [(agent.to_string(), label.to_string())].into_iter().collect(),
        received: BTreeMap::new(),
        initkeys: BTreeMap::new(),
    }
}

fn build<T: Scalar>(doc: &ModelDocument) -> ProbabilisticStructure<T> {
    doc.build().expect("built-in scenario is well formed")
}

/// Bob tests whether a coin is double-headed by tossing it once.
pub fn coin_document() -> ModelDocument {
    ModelDocument {
        agents: vec!["Bob".into()],
        propositions: vec!["dh".into()],
        keys: None,
        states: vec![
            state("s1", &[("dh", true)], "Bob", "l0"),
            state("s2", &[("dh", false)], "Bob", "l0"),
        ],
        derandomizers: single_agent("Bob", uniform(["H".to_string(), "T".to_string()])),
        algorithms: [(
            "Bob".to_string(),
            AlgorithmSpec::Coin {
                query: "dh".into(),
                heads: "H".into(),
            },
        )]
        .into_iter()
        .collect(),
    }
}

pub fn coin_structure<T: Scalar>() -> ProbabilisticStructure<T> {
    build(&coin_document())
}

/// A robot at unknown distance `m ∈ 1..=max_distance` from a wall reads
/// `m−1`, `m`, `m+1` with probabilities 1/4, 1/2, 1/4, and answers Yes to
/// `wall<q>` iff the reading is at most `q`.
pub fn sensor_document(max_distance: u32, query_distance: u32) -> Result<ModelDocument> {
    if query_distance == 0 || max_distance < query_distance + 2 {
        return Err(Error::Unsupported(format!(
            "sensor needs 1 ≤ query distance and max distance ≥ query + 2 (got {query_distance}, {max_distance})"
        )));
    }
    let prop = format!("wall{query_distance}");
    let states = (1..=max_distance)
        .map(|m| state(format!("m{m}"), &[(&prop, m <= query_distance)], "Robot", "l0"))
        .collect();
    let tokens = vec![
        TokenProb { token: "-1".into(), prob: "1/4".into() },
        TokenProb { token: "0".into(), prob: "1/2".into() },
        TokenProb { token: "+1".into(), prob: "1/4".into() },
    ];
    let distances = (1..=max_distance).map(|m| (format!("m{m}"), i64::from(m))).collect();
    Ok(ModelDocument {
        agents: vec!["Robot".into()],
        propositions: vec![prop.clone()],
        keys: None,
        states,
        derandomizers: single_agent("Robot", tokens),
        algorithms: [(
            "Robot".to_string(),
            AlgorithmSpec::Sensor {
                query: prop,
                threshold: i64::from(query_distance),
                distances,
            },
        )]
        .into_iter()
        .collect(),
    })
}

pub fn sensor_structure<T: Scalar>(max_distance: u32, query_distance: u32) -> Result<ProbabilisticStructure<T>> {
    sensor_document(max_distance, query_distance)?.build()
}

pub fn prime_state_id(n: u64) -> String {
    format!("s{n}_prime")
}

pub fn composite_state_id(n: u64, k: u64) -> String {
    format!("s{n}_comp_{k}")
}

/// Alice tests `n` for primality by drawing a candidate witness `a ∈ 1..=n`.
/// Besides the prime world there is one composite world for each witness
/// count `k` with `n/2 < k ≤ n`; all share Alice's local state.
pub fn primality_document(n: u64) -> Result<ModelDocument> {
    if n <= 2 {
        return Err(Error::Unsupported(format!("primality needs n > 2 (got {n})")));
    }
    let label = format!("l{n}");
    let mut states = vec![state(prime_state_id(n), &[("prime", true)], "Alice", &label)];
    let mut witnesses: BTreeMap<String, u64> = [(prime_state_id(n), 0)].into_iter().collect();
    for k in (n / 2 + 1)..=n {
        states.push(state(composite_state_id(n, k), &[("prime", false)], "Alice", &label));
        witnesses.insert(composite_state_id(n, k), k);
    }
    Ok(ModelDocument {
        agents: vec!["Alice".into()],
        propositions: vec!["prime".into()],
        keys: None,
        states,
        derandomizers: single_agent("Alice", uniform((1..=n).map(|a| a.to_string()))),
        algorithms: [(
            "Alice".to_string(),
            AlgorithmSpec::WitnessPrime {
                query: "prime".into(),
                witnesses,
            },
        )]
        .into_iter()
        .collect(),
    })
}

pub fn primality_structure<T: Scalar>(n: u64) -> Result<ProbabilisticStructure<T>> {
    primality_document(n)?.build()
}

/// One-agent structure over proposition `p` whose table algorithm says Yes
/// at each state with the given probability, in quarters. Four uniform
/// tokens; weakly respects negation.
fn quarters_document(worlds: &[(&str, bool, u32)]) -> ModelDocument {
    let tokens: Vec<String> = (1..=4).map(|t| t.to_string()).collect();
    let mut entries = Vec::new();
    for (id, _, yes_quarters) in worlds {
        for (t, tok) in tokens.iter().enumerate() {
            entries.push(TableEntry {
                query: Formula::prop("p"),
                state: Some(id.to_string()),
                token: Some(tok.clone()),
                answer: if (t as u32) < *yes_quarters { Answer::Yes } else { Answer::No },
            });
        }
    }
    ModelDocument {
        agents: vec!["Alice".into()],
        propositions: vec!["p".into()],
        keys: None,
        states: worlds
            .iter()
            .map(|(id, truth, _)| state(*id, &[("p", *truth)], "Alice", "l0"))
            .collect(),
        derandomizers: single_agent("Alice", uniform(tokens)),
        algorithms: [(
            "Alice".to_string(),
            AlgorithmSpec::Table {
                default: Answer::Unknown,
                negation: Some(NegationMode::Weak),
                entries,
            },
        )]
        .into_iter()
        .collect(),
    }
}

/// An algorithm that is exactly `(1/2, 0)`-reliable for `p`.
pub fn rp_document() -> ModelDocument {
    quarters_document(&[("yes_sure", true, 4), ("yes_half", true, 2), ("no", false, 0)])
}

pub fn rp_structure<T: Scalar>() -> ProbabilisticStructure<T> {
    build(&rp_document())
}

/// An algorithm that is exactly `(3/4, 1/4)`-reliable for `p`.
pub fn bpp_document() -> ModelDocument {
    quarters_document(&[
        ("yes_sure", true, 4),
        ("yes_mostly", true, 3),
        ("no_rarely", false, 1),
        ("no_never", false, 0),
    ])
}

pub fn bpp_structure<T: Scalar>() -> ProbabilisticStructure<T> {
    build(&bpp_document())
}

pub const SECRET: &str = "secret";

/// Eve holds `{secret}_k0` and `keys_used − 1` other ciphertexts under
/// `k1, k2, …`, and guesses `r` of `keyspace_size` symmetric keys.
pub fn guess_document(r: usize, keyspace_size: usize, keys_used: usize) -> Result<ModelDocument> {
    if keys_used == 0 || keys_used > keyspace_size {
        return Err(Error::Unsupported(format!(
            "need 1 ≤ keys used ≤ key space size (got {keys_used}, {keyspace_size})"
        )));
    }
    let keys = KeySpace::symmetric(keyspace_size);
    let mut received = vec![format!("{{{SECRET}}}_{}", keys.names()[0])];
    for j in 1..keys_used {
        received.push(format!("{{n{j}}}_{}", keys.names()[j]));
    }
    let mut st = state("s", &[], "Eve", "l0");
    st.received.insert("Eve".into(), received);
    Ok(ModelDocument {
        agents: vec!["Eve".into()],
        propositions: Vec::new(),
        keys: Some(
            keys.names()
                .iter()
                .map(|n| KeyDoc { name: n.clone(), inverse: None })
                .collect(),
        ),
        states: vec![st],
        derandomizers: single_agent("Eve", uniform(all_guess_tokens(r, keyspace_size))),
        algorithms: [("Eve".to_string(), AlgorithmSpec::DyRg { r })].into_iter().collect(),
    })
}

pub fn guess_structure<T: Scalar>(r: usize, keyspace_size: usize, keys_used: usize) -> Result<ProbabilisticStructure<T>> {
    guess_document(r, keyspace_size, keys_used)?.build()
}

// ---------------------------------------------------------------------------
// Random generators

/// Size bounds and shape switches for [`random_model`].
#[derive(Clone, Debug)]
pub struct RandomOptions {
    pub max_states: usize,
    pub max_tokens: usize,
    pub max_agents: usize,
    pub max_labels: usize,
    /// Algorithms never answer `?` to the query or its negation.
    pub complete: bool,
    /// `None` draws a negation behaviour at random, including none at all.
    pub negation: Option<NegationMode>,
    /// Answers ignore the derandomizer token.
    pub deterministic: bool,
    /// Depth of the random objective query.
    pub query_depth: usize,
}

impl Default for RandomOptions {
    fn default() -> Self {
        RandomOptions {
            max_states: 6,
            max_tokens: 4,
            max_agents: 2,
            max_labels: 2,
            complete: false,
            negation: None,
            deterministic: false,
            query_depth: 2,
        }
    }
}

/// A random structure together with the objective formula its table
/// algorithms were filled in for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomModel {
    pub document: ModelDocument,
    pub query: Formula,
}

impl RandomModel {
    pub fn structure<T: Scalar>(&self) -> ProbabilisticStructure<T> {
        self.document.build().expect("generated model is well formed")
    }
}

pub const RANDOM_PROPS: [&str; 2] = ["p", "q"];

const THRESHOLDS: [(i64, i64); 7] = [(0, 1), (1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (1, 1)];

/// Which operators [`random_formula`] may use.
#[derive(Clone, Copy, Debug)]
pub struct FormulaShape {
    pub knows: bool,
    pub alg: bool,
    pub prob: bool,
    pub ev: bool,
}

impl FormulaShape {
    pub const OBJECTIVE: FormulaShape = FormulaShape { knows: true, alg: false, prob: false, ev: false };
    pub const ALL: FormulaShape = FormulaShape { knows: true, alg: true, prob: true, ev: true };
}

fn random_ratio(rng: &mut impl Rng) -> BigRational {
    let (a, b) = *THRESHOLDS.choose(rng).expect("nonempty");
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Random formula over `props` and agents `1..=agents`. `Ev` operands are
/// always objective.
pub fn random_formula(rng: &mut impl Rng, depth: usize, agents: usize, props: &[&str], shape: FormulaShape) -> Formula {
    let atom = |rng: &mut dyn rand::RngCore| Formula::prop(*props.choose(rng).expect("props"));
    if depth == 0 {
        return atom(rng);
    }
    let agent = rng.gen_range(1..=agents);
    let cmps = [Cmp::Ge, Cmp::Le, Cmp::Eq, Cmp::Lt, Cmp::Gt];
    loop {
        match rng.gen_range(0..8) {
            0 => return atom(rng),
            1 => return Formula::not(random_formula(rng, depth - 1, agents, props, shape)),
            2 => {
                let a = random_formula(rng, depth - 1, agents, props, shape);
                let b = random_formula(rng, depth - 1, agents, props, shape);
                return Formula::and(a, b);
            }
            3 if shape.knows => return Formula::knows(agent, random_formula(rng, depth - 1, agents, props, shape)),
            4 | 5 if shape.alg => {
                let inner = if rng.gen_bool(0.5) {
                    atom(rng)
                } else {
                    random_formula(rng, depth - 1, agents, props, FormulaShape::OBJECTIVE)
                };
                return Formula::alg_knows(agent, inner);
            }
            6 if shape.prob => {
                let inner = random_formula(rng, depth - 1, agents, props, shape);
                let cmp = *cmps.choose(rng).expect("cmps");
                return Formula::prob(inner, cmp, random_ratio(rng));
            }
            7 if shape.ev => {
                let inner = random_formula(rng, depth - 1, agents, props, FormulaShape::OBJECTIVE);
                let bound = if rng.gen_bool(0.5) { EvBound::Lower } else { EvBound::Upper };
                let cmp = *cmps.choose(rng).expect("cmps");
                return Formula::ev(bound, agent, inner, cmp, random_ratio(rng));
            }
            _ => {}
        }
    }
}

/// Positive integer weights normalized into exact probabilities.
fn random_distribution(rng: &mut impl Rng, n: usize) -> Vec<BigRational> {
    let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    weights
        .into_iter()
        .map(|w| BigRational::new(BigInt::from(w), BigInt::from(total)))
        .collect()
}

fn random_answer(rng: &mut impl Rng, complete: bool) -> Answer {
    if complete || rng.gen_bool(0.7) {
        if rng.gen_bool(0.5) {
            Answer::Yes
        } else {
            Answer::No
        }
    } else {
        Answer::Unknown
    }
}

/// Reproducible random structure with table algorithms keyed to a random
/// objective query.
pub fn random_model(seed: u64, opts: &RandomOptions) -> RandomModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_agents = rng.gen_range(1..=opts.max_agents.max(1));
    let agents: Vec<String> = (1..=n_agents).map(|i| format!("a{i}")).collect();
    let n_states = rng.gen_range(1..=opts.max_states.max(1));
    let labels_per_agent: Vec<usize> = (0..n_agents).map(|_| rng.gen_range(1..=opts.max_labels.max(1))).collect();
    let states: Vec<StateDoc> = (0..n_states)
        .map(|s| StateDoc {
            id: format!("s{s}"),
            valuation: RANDOM_PROPS.iter().map(|p| (p.to_string(), rng.gen_bool(0.5))).collect(),
            locals: agents
                .iter()
                .zip(&labels_per_agent)
                .map(|(a, &l)| (a.clone(), format!("l{}", rng.gen_range(0..l))))
                .collect(),
            received: BTreeMap::new(),
            initkeys: BTreeMap::new(),
        })
        .collect();

    let token_counts: Vec<usize> = (0..n_agents).map(|_| rng.gen_range(1..=opts.max_tokens.max(1))).collect();
    let token_names = |i: usize| -> Vec<String> { (0..token_counts[i]).map(|t| format!("t{t}")).collect() };
    let derandomizers = if n_agents > 1 && rng.gen_bool(0.5) {
        // Joint: a random nonempty subset of the product, random masses.
        let mut tuples: Vec<Vec<String>> = vec![Vec::new()];
        for i in 0..n_agents {
            tuples = tuples
                .into_iter()
                .flat_map(|p| {
                    token_names(i).into_iter().map(move |t| {
                        let mut p = p.clone();
                        p.push(t);
                        p
                    })
                })
                .collect();
        }
        tuples.shuffle(&mut rng);
        let keep = rng.gen_range(1..=tuples.len().min(opts.max_tokens.max(1)));
        tuples.truncate(keep);
        let probs = random_distribution(&mut rng, keep);
        DerandomizerSpec::Joint(
            tuples
                .into_iter()
                .zip(probs)
                .map(|(tokens, q)| JointPoint { tokens, prob: format_rational(&q) })
                .collect(),
        )
    } else {
        DerandomizerSpec::Independent(
            agents
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let probs = random_distribution(&mut rng, token_counts[i]);
                    let list = token_names(i)
                        .into_iter()
                        .zip(probs)
                        .map(|(token, q)| TokenProb { token, prob: format_rational(&q) })
                        .collect();
                    (a.clone(), list)
                })
                .collect(),
        )
    };

    let query = random_formula(&mut rng, opts.query_depth, n_agents, &RANDOM_PROPS, FormulaShape::OBJECTIVE);
    let neg = Formula::not(query.clone());
    let mut algorithms = BTreeMap::new();
    for (i, a) in agents.iter().enumerate() {
        let negation = match opts.negation {
            Some(m) => Some(m),
            None => *[None, Some(NegationMode::Weak), Some(NegationMode::Strong)]
                .choose(&mut rng)
                .expect("modes"),
        };
        let mut entries = Vec::new();
        let fill = |rng: &mut ChaCha8Rng, f: &Formula, complete: bool, entries: &mut Vec<TableEntry>| {
            for st in &states {
                if opts.deterministic {
                    entries.push(TableEntry {
                        query: f.clone(),
                        state: Some(st.id.clone()),
                        token: None,
                        answer: random_answer(rng, complete),
                    });
                } else {
                    for t in token_names(i) {
                        entries.push(TableEntry {
                            query: f.clone(),
                            state: Some(st.id.clone()),
                            token: Some(t),
                            answer: random_answer(rng, complete),
                        });
                    }
                }
            }
        };
        fill(&mut rng, &query, opts.complete, &mut entries);
        if negation.is_none() {
            fill(&mut rng, &neg, opts.complete, &mut entries);
        }
        let side = Formula::prop(*RANDOM_PROPS.choose(&mut rng).expect("props"));
        if side != query && side != neg {
            fill(&mut rng, &side, false, &mut entries);
        }
        algorithms.insert(
            a.clone(),
            AlgorithmSpec::Table {
                default: Answer::Unknown,
                negation,
                entries,
            },
        );
    }

    RandomModel {
        document: ModelDocument {
            agents,
            propositions: RANDOM_PROPS.iter().map(|p| p.to_string()).collect(),
            keys: None,
            states,
            derandomizers,
            algorithms,
        },
        query,
    }
}

pub fn random_structure<T: Scalar>(seed: u64, opts: &RandomOptions) -> (ProbabilisticStructure<T>, Formula) {
    let m = random_model(seed, opts);
    (m.structure(), m.query)
}

/// Random message of depth at most `depth` over plaintexts `atoms` and the
/// keys of `keys`.
pub fn random_message(rng: &mut impl Rng, depth: usize, atoms: &[&str], keys: &KeySpace) -> Message {
    let leaf = |rng: &mut dyn rand::RngCore| {
        if keys.is_empty() || rng.gen_bool(0.6) {
            Message::plain(*atoms.choose(rng).expect("atoms"))
        } else {
            Message::key(keys.names().choose(rng).expect("keys").clone())
        }
    };
    if depth == 0 || rng.gen_bool(0.3) {
        return leaf(rng);
    }
    if keys.is_empty() || rng.gen_bool(0.5) {
        Message::concat(
            random_message(rng, depth - 1, atoms, keys),
            random_message(rng, depth - 1, atoms, keys),
        )
    } else {
        let k = keys.names().choose(rng).expect("keys").clone();
        Message::encrypt(random_message(rng, depth - 1, atoms, keys), k)
    }
}

/// Up to `max_keys` keys, some paired as asymmetric inverses.
pub fn random_key_space(rng: &mut impl Rng, max_keys: usize) -> KeySpace {
    let n = rng.gen_range(1..=max_keys.max(1));
    let mut decls: Vec<(String, Option<String>)> = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && rng.gen_bool(0.3) {
            decls.push((format!("k{i}"), Some(format!("k{}", i + 1))));
            decls.push((format!("k{}", i + 1), None));
            i += 2;
        } else {
            decls.push((format!("k{i}"), None));
            i += 1;
        }
    }
    KeySpace::new(decls.iter().map(|(a, b)| (a.as_str(), b.as_deref()))).expect("generated keys are consistent")
}

pub const RANDOM_ATOMS: [&str; 4] = ["a", "b", "c", "d"];

/// Random security structure: one adversary `Eve` running Dolev–Yao
/// (`r = 0`) or Dolev–Yao with `r` guesses, over random intercepted
/// messages and initial keys.
pub fn random_security_document(seed: u64, r: usize) -> ModelDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys = random_key_space(&mut rng, 4);
    // The local state is the adversary's view, so states sharing a label
    // share received messages and initial keys.
    let n_views = rng.gen_range(1..=3);
    let views: Vec<(Vec<String>, Vec<String>)> = (0..n_views)
        .map(|_| {
            let count = rng.gen_range(0..=3);
            let msgs = (0..count)
                .map(|_| random_message(&mut rng, 3, &RANDOM_ATOMS, &keys).normalize(&keys).to_string())
                .collect();
            let init = keys.names().iter().filter(|_| rng.gen_bool(0.2)).cloned().collect();
            (msgs, init)
        })
        .collect();
    let n_states = rng.gen_range(1..=4);
    let states = (0..n_states)
        .map(|s| {
            let v = rng.gen_range(0..n_views);
            let (msgs, init) = &views[v];
            let mut st = state(format!("s{s}"), &[], "Eve", &format!("view{v}"));
            if !msgs.is_empty() {
                st.received.insert("Eve".into(), msgs.clone());
            }
            if !init.is_empty() {
                st.initkeys.insert("Eve".into(), init.clone());
            }
            st
        })
        .collect();
    ModelDocument {
        agents: vec!["Eve".into()],
        propositions: Vec::new(),
        keys: Some(
            keys.names()
                .iter()
                .map(|n| {
                    let inv = keys.inverse(n).expect("declared");
                    KeyDoc {
                        name: n.clone(),
                        inverse: (inv != n).then(|| inv.to_string()),
                    }
                })
                .collect(),
        ),
        states,
        derandomizers: single_agent("Eve", uniform(all_guess_tokens(r, keys.len()))),
        algorithms: [(
            "Eve".to_string(),
            if r == 0 { AlgorithmSpec::Dy } else { AlgorithmSpec::DyRg { r } },
        )]
        .into_iter()
        .collect(),
    }
}

/// Subterms of every received message and every key, as `has` candidates.
pub fn candidate_messages<T: Scalar>(n: &ProbabilisticStructure<T>) -> Vec<Message> {
    fn subterms(m: &Message, out: &mut Vec<Message>) {
        if !out.contains(m) {
            out.push(m.clone());
        }
        match m {
            Message::Concat(a, b) => {
                subterms(a, out);
                subterms(b, out);
            }
            Message::Encrypt(body, _) => subterms(body, out),
            Message::Plain(_) | Message::Key(_) => {}
        }
    }
    let mut out = Vec::new();
    for st in n.states() {
        for m in st.received.iter().flatten() {
            subterms(m, &mut out);
        }
    }
    if let Some(keys) = n.keys() {
        for k in keys.names() {
            subterms(&Message::key(k.clone()), &mut out);
        }
    }
    for a in RANDOM_ATOMS {
        subterms(&Message::plain(a), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::AgentId;
    use crate::Rational;

    #[test]
    fn primality_cell() {
        let n = primality_structure::<Rational>(15).unwrap();
        let cell = n.indistinguishable_ids(AgentId(1), &prime_state_id(15)).unwrap();
        assert_eq!(cell.len(), 9);
        assert_eq!(cell[0], "s15_prime");
        assert_eq!(cell[1], "s15_comp_8");
        assert_eq!(cell[8], "s15_comp_15");
        assert!(primality_structure::<Rational>(2).is_err());
    }

    #[test]
    fn sensor_parameters_checked() {
        assert!(sensor_structure::<Rational>(11, 10).is_err());
        assert!(sensor_structure::<Rational>(12, 10).is_ok());
    }

    #[test]
    fn random_models_are_reproducible_and_valid() {
        let opts = RandomOptions::default();
        for seed in 0..50 {
            let a = random_model(seed, &opts);
            let b = random_model(seed, &opts);
            assert_eq!(a.document, b.document);
            assert_eq!(a.query, b.query);
            assert!(a.query.is_objective());
            let n = a.structure::<Rational>();
            assert!(n.state_count() <= 6 && n.agent_count() <= 2);
        }
    }

    #[test]
    fn random_security_documents_load() {
        for seed in 0..30 {
            let doc = random_security_document(seed, seed as usize % 2);
            doc.build::<Rational>().unwrap();
        }
    }

    #[test]
    fn scenarios_round_trip_through_json() {
        let docs = [
            coin_document(),
            sensor_document(13, 10).unwrap(),
            primality_document(9).unwrap(),
            rp_document(),
            bpp_document(),
            guess_document(2, 10, 3).unwrap(),
        ];
        for doc in docs {
            let n = doc.build::<Rational>().unwrap();
            let again = ProbabilisticStructure::<Rational>::from_json(&n.to_json().unwrap()).unwrap();
            assert_eq!(n, again);
        }
    }
}
