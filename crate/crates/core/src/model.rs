//! Probabilistic algorithmic knowledge structures and their JSON model files.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dolevyao::{self, AdversaryLocal, KeySpace};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Scalar};
use crate::syntax::{is_proposition_name, parse_formula, parse_message, AgentId, Formula, Message};

/// Output of a knowledge algorithm. `Unknown` renders as `?`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Answer {
    Yes,
    No,
    #[serde(rename = "?")]
    Unknown,
}

impl Answer {
    pub const ALL: [Answer; 3] = [Answer::Yes, Answer::No, Answer::Unknown];

    /// Yes and No swap, `?` stays.
    pub fn flip(self) -> Answer {
        match self {
            Answer::Yes => Answer::No,
            Answer::No => Answer::Yes,
            Answer::Unknown => Answer::Unknown,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Answer::Yes => "Yes",
            Answer::No => "No",
            Answer::Unknown => "?",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Answer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Yes" | "yes" => Ok(Answer::Yes),
            "No" | "no" => Ok(Answer::No),
            "?" | "Unknown" | "unknown" => Ok(Answer::Unknown),
            _ => Err(Error::Schema(format!("`{s}` is not an answer (Yes, No, ?)"))),
        }
    }
}

/// How an algorithm's answer on `¬φ` follows from its answer on `φ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NegationMode {
    /// Yes and No swap, `?` stays `?`.
    Weak,
    /// Yes exactly when the answer on `φ` is not Yes.
    Strong,
}

impl NegationMode {
    pub fn apply(self, on_positive: Answer) -> Answer {
        match self {
            NegationMode::Weak => on_positive.flip(),
            NegationMode::Strong => {
                if on_positive == Answer::Yes {
                    Answer::No
                } else {
                    Answer::Yes
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub id: String,
    /// Truth value of every declared proposition.
    pub valuation: BTreeMap<String, bool>,
    /// Local-state label per agent, indexed like the agent list.
    pub locals: Vec<String>,
    pub received: Vec<Vec<Message>>,
    pub initkeys: Vec<BTreeSet<String>>,
}

impl State {
    pub fn adversary_local(&self, agent_index: usize) -> AdversaryLocal {
        AdversaryLocal {
            initkeys: self.initkeys[agent_index].clone(),
            received: self.received[agent_index].clone(),
        }
    }
}

/// Finite space of derandomizer points, one token per agent, with a strictly
/// positive distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct DerandomizerSpace<T> {
    points: Vec<Vec<String>>,
    exact: Vec<BigRational>,
    nu: Vec<T>,
}

impl<T: Scalar> DerandomizerSpace<T> {
    fn from_exact(points: Vec<Vec<String>>, exact: Vec<BigRational>) -> Self {
        let nu = exact.iter().map(T::from_rational).collect();
        DerandomizerSpace { points, exact, nu }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, k: usize) -> &[String] {
        &self.points[k]
    }

    pub fn prob(&self, k: usize) -> &T {
        &self.nu[k]
    }

    pub fn exact_prob(&self, k: usize) -> &BigRational {
        &self.exact[k]
    }

    pub fn token(&self, k: usize, agent_index: usize) -> &str {
        &self.points[k][agent_index]
    }

    /// `H` for a single agent, `(H,T)` otherwise.
    pub fn label(&self, k: usize) -> String {
        match self.points[k].as_slice() {
            [one] => one.clone(),
            many => format!("({})", many.join(",")),
        }
    }

    /// Point index from its label or from its decimal index.
    pub fn find(&self, text: &str) -> Result<usize> {
        if let Some(k) = (0..self.len()).find(|&k| self.label(k) == text) {
            return Ok(k);
        }
        match text.parse::<usize>() {
            Ok(k) if k < self.len() => Ok(k),
            Ok(k) => Err(Error::UnknownPoint(k)),
            Err(_) => Err(Error::Schema(format!("no derandomizer point `{text}`"))),
        }
    }

    /// Exact marginal of agent `agent_index` in first-appearance order.
    pub fn marginal(&self, agent_index: usize) -> Vec<(String, BigRational)> {
        let mut out: Vec<(String, BigRational)> = Vec::new();
        for (p, q) in self.points.iter().zip(&self.exact) {
            let tok = &p[agent_index];
            match out.iter_mut().find(|(t, _)| t == tok) {
                Some((_, m)) => *m += q,
                None => out.push((tok.clone(), q.clone())),
            }
        }
        out
    }
}

/// Everything a knowledge algorithm may look at for one query.
#[derive(Clone, Copy, Debug)]
pub struct AlgorithmInput<'a> {
    pub agent: AgentId,
    pub query: &'a Formula,
    pub local: &'a str,
    pub state: &'a State,
    pub token: &'a str,
    pub keys: Option<&'a KeySpace>,
}

/// A derandomized knowledge algorithm. Implementations must be
/// deterministic and total.
pub trait KnowledgeAlgorithm: Send + Sync + fmt::Debug {
    fn run(&self, input: &AlgorithmInput<'_>) -> Answer;

    /// Rejects tokens the algorithm cannot decode. Called once per token at
    /// load time so that `run` never sees a malformed one.
    fn check_token(&self, _token: &str, _keys: Option<&KeySpace>) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    #[serde(with = "formula_text")]
    pub query: Formula,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token: Option<String>,
    pub answer: Answer,
}

fn unknown() -> Answer {
    Answer::Unknown
}

fn is_unknown(a: &Answer) -> bool {
    *a == Answer::Unknown
}

/// Declarative algorithm kinds available to model files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    /// Explicit finite map. The first entry matching query, state and token
    /// wins; otherwise a negated query falls back on `negation`, and
    /// anything else gets `default`.
    Table {
        #[serde(default = "unknown", skip_serializing_if = "is_unknown")]
        default: Answer,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        negation: Option<NegationMode>,
        #[serde(default)]
        entries: Vec<TableEntry>,
    },
    /// Tosses a coin: the token is the toss, except that a coin for which
    /// `query` holds always lands `heads`. Yes iff heads.
    Coin { query: String, heads: String },
    /// Yes iff distance + token reading ≤ threshold.
    Sensor {
        query: String,
        threshold: i64,
        distances: BTreeMap<String, i64>,
    },
    /// Token `a ∈ 1..n` picks a candidate witness; the first `k` candidates
    /// are witnesses at a state with `k` of them. No iff a witness is hit.
    WitnessPrime {
        query: String,
        witnesses: BTreeMap<String, u64>,
    },
    Dy,
    DyRg { r: usize },
}

impl AlgorithmSpec {
    /// Answer on the designated proposition, negated proposition, or `?`.
    fn on_query(query: &Formula, name: &str, base: impl FnOnce() -> Answer) -> Answer {
        match query {
            Formula::Prop(p) if p == name => base(),
            Formula::Not(inner) if matches!(&**inner, Formula::Prop(p) if p == name) => base().flip(),
            _ => Answer::Unknown,
        }
    }

    fn table(
        entries: &[TableEntry],
        negation: Option<NegationMode>,
        default: Answer,
        query: &Formula,
        input: &AlgorithmInput<'_>,
    ) -> Answer {
        let hit = entries.iter().find(|e| {
            e.query == *query
                && e.state.as_deref().map_or(true, |s| s == input.state.id)
                && e.token.as_deref().map_or(true, |t| t == input.token)
        });
        if let Some(e) = hit {
            return e.answer;
        }
        if let (Some(mode), Formula::Not(inner)) = (negation, query) {
            return mode.apply(Self::table(entries, negation, default, inner, input));
        }
        default
    }

    /// State ids the algorithm refers to.
    fn state_refs(&self) -> Vec<&str> {
        match self {
            AlgorithmSpec::Table { entries, .. } => entries.iter().filter_map(|e| e.state.as_deref()).collect(),
            AlgorithmSpec::Sensor { distances, .. } => distances.keys().map(String::as_str).collect(),
            AlgorithmSpec::WitnessPrime { witnesses, .. } => witnesses.keys().map(String::as_str).collect(),
            _ => Vec::new(),
        }
    }

    fn prop_refs(&self) -> Vec<&str> {
        match self {
            AlgorithmSpec::Coin { query, .. }
            | AlgorithmSpec::Sensor { query, .. }
            | AlgorithmSpec::WitnessPrime { query, .. } => vec![query.as_str()],
            _ => Vec::new(),
        }
    }
}

impl KnowledgeAlgorithm for AlgorithmSpec {
    fn run(&self, input: &AlgorithmInput<'_>) -> Answer {
        match self {
            AlgorithmSpec::Table {
                default,
                negation,
                entries,
            } => Self::table(entries, *negation, *default, input.query, input),
            AlgorithmSpec::Coin { query, heads } => Self::on_query(input.query, query, || {
                let fixed = input.state.valuation.get(query).copied().unwrap_or(false);
                if fixed || input.token == heads {
                    Answer::Yes
                } else {
                    Answer::No
                }
            }),
            AlgorithmSpec::Sensor {
                query,
                threshold,
                distances,
            } => {
                let (Some(d), Ok(t)) = (distances.get(&input.state.id), parse_offset(input.token)) else {
                    return Answer::Unknown;
                };
                Self::on_query(input.query, query, || if d + t <= *threshold { Answer::Yes } else { Answer::No })
            }
            AlgorithmSpec::WitnessPrime { query, witnesses } => {
                let (Some(k), Ok(a)) = (witnesses.get(&input.state.id), input.token.parse::<u64>()) else {
                    return Answer::Unknown;
                };
                Self::on_query(input.query, query, || if a <= *k { Answer::No } else { Answer::Yes })
            }
            AlgorithmSpec::Dy => {
                let (Some(keys), Some(i)) = (input.keys, input.agent.index()) else {
                    return Answer::Unknown;
                };
                dolevyao::a_dy(input.agent, input.query, &input.state.adversary_local(i), keys)
            }
            AlgorithmSpec::DyRg { r } => {
                let (Some(keys), Some(i)) = (input.keys, input.agent.index()) else {
                    return Answer::Unknown;
                };
                let local = input.state.adversary_local(i);
                dolevyao::a_dy_rg(*r, input.agent, input.query, &local, input.token, keys)
                    .unwrap_or(Answer::Unknown)
            }
        }
    }

    fn check_token(&self, token: &str, keys: Option<&KeySpace>) -> Result<()> {
        let malformed = |reason: &str| Error::MalformedToken {
            token: token.to_string(),
            reason: reason.to_string(),
        };
        match self {
            AlgorithmSpec::Sensor { .. } => parse_offset(token).map(|_| ()).map_err(|_| malformed("expected an integer reading offset")),
            AlgorithmSpec::WitnessPrime { .. } => match token.parse::<u64>() {
                Ok(a) if a >= 1 => Ok(()),
                _ => Err(malformed("expected a candidate index 1, 2, ...")),
            },
            AlgorithmSpec::Dy => keys
                .map(|_| ())
                .ok_or_else(|| Error::Schema("dy algorithm needs a key space".into())),
            AlgorithmSpec::DyRg { r } => {
                let keys = keys.ok_or_else(|| Error::Schema("dy-rg algorithm needs a key space".into()))?;
                dolevyao::decode_guess_token(token, *r, keys).map(|_| ())
            }
            AlgorithmSpec::Table { .. } | AlgorithmSpec::Coin { .. } => Ok(()),
        }
    }
}

fn parse_offset(token: &str) -> std::result::Result<i64, std::num::ParseIntError> {
    token.strip_prefix('+').unwrap_or(token).parse()
}

/// A registered algorithm kind or a programmatic one.
#[derive(Clone, Debug)]
pub enum Algorithm {
    Spec(AlgorithmSpec),
    Custom(Arc<dyn KnowledgeAlgorithm>),
}

impl Algorithm {
    pub fn spec(&self) -> Option<&AlgorithmSpec> {
        match self {
            Algorithm::Spec(s) => Some(s),
            Algorithm::Custom(_) => None,
        }
    }

    fn as_dyn(&self) -> &dyn KnowledgeAlgorithm {
        match self {
            Algorithm::Spec(s) => s,
            Algorithm::Custom(c) => c.as_ref(),
        }
    }
}

impl From<AlgorithmSpec> for Algorithm {
    fn from(s: AlgorithmSpec) -> Self {
        Algorithm::Spec(s)
    }
}

/// `N = (S, π, L_1..L_n, A_1..A_n, ν)` plus an optional key space.
#[derive(Clone, Debug)]
pub struct ProbabilisticStructure<T> {
    agents: Vec<String>,
    propositions: Vec<String>,
    states: Vec<State>,
    state_ids: HashMap<String, usize>,
    algorithms: Vec<Algorithm>,
    derandomizers: DerandomizerSpace<T>,
    keys: Option<KeySpace>,
    /// Per agent: local label to the states carrying it, in state order.
    cells: Vec<BTreeMap<String, Vec<usize>>>,
}

impl<T: Scalar> ProbabilisticStructure<T> {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        doc.build()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn propositions(&self) -> &[String] {
        &self.propositions
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, s: usize) -> &State {
        &self.states[s]
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, id: &str) -> Result<usize> {
        self.state_ids
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownState(id.to_string()))
    }

    pub fn derandomizers(&self) -> &DerandomizerSpace<T> {
        &self.derandomizers
    }

    pub fn keys(&self) -> Option<&KeySpace> {
        self.keys.as_ref()
    }

    pub fn algorithm(&self, agent: AgentId) -> Result<&Algorithm> {
        Ok(&self.algorithms[self.agent_index(agent)?])
    }

    /// 0-based index of a 1-based agent id.
    pub fn agent_index(&self, agent: AgentId) -> Result<usize> {
        agent
            .index()
            .filter(|&i| i < self.agents.len())
            .ok_or_else(|| Error::UnknownAgent(agent.to_string()))
    }

    pub fn agent_name(&self, agent: AgentId) -> Result<&str> {
        Ok(&self.agents[self.agent_index(agent)?])
    }

    /// Looks an agent up by name, then by number.
    pub fn resolve_agent(&self, text: &str) -> Result<AgentId> {
        if let Some(i) = self.agents.iter().position(|a| a == text) {
            return Ok(AgentId::from_index(i));
        }
        match text.parse::<usize>() {
            Ok(n) => {
                let id = AgentId(n);
                self.agent_index(id)?;
                Ok(id)
            }
            Err(_) => Err(Error::UnknownAgent(text.to_string())),
        }
    }

    pub fn local(&self, agent: AgentId, s: usize) -> Result<&str> {
        Ok(&self.states[s].locals[self.agent_index(agent)?])
    }

    /// `{t | L_i(t) = L_i(s)}` in state order.
    pub fn indistinguishable(&self, agent: AgentId, s: usize) -> Result<&[usize]> {
        let i = self.agent_index(agent)?;
        let label = &self.states.get(s).ok_or_else(|| Error::UnknownState(s.to_string()))?.locals[i];
        Ok(&self.cells[i][label])
    }

    pub fn indistinguishable_ids(&self, agent: AgentId, state_id: &str) -> Result<Vec<&str>> {
        let s = self.state_index(state_id)?;
        Ok(self
            .indistinguishable(agent, s)?
            .iter()
            .map(|&t| self.states[t].id.as_str())
            .collect())
    }

    /// Realized local labels of `agent`, sorted.
    pub fn labels(&self, agent: AgentId) -> Result<Vec<&str>> {
        Ok(self.cells[self.agent_index(agent)?].keys().map(String::as_str).collect())
    }

    /// `S_ℓ` for `agent`.
    pub fn states_with_label(&self, agent: AgentId, label: &str) -> Result<&[usize]> {
        self.cells[self.agent_index(agent)?]
            .get(label)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnrealizedLabel(label.to_string()))
    }

    /// `A_i^d(φ, L_i(s), s, v_i)`.
    pub fn run_algorithm(&self, agent: AgentId, query: &Formula, s: usize, v: usize) -> Result<Answer> {
        let i = self.agent_index(agent)?;
        let state = self.states.get(s).ok_or_else(|| Error::UnknownState(s.to_string()))?;
        if v >= self.derandomizers.len() {
            return Err(Error::UnknownPoint(v));
        }
        let input = AlgorithmInput {
            agent,
            query,
            local: &state.locals[i],
            state,
            token: self.derandomizers.token(v, i),
            keys: self.keys.as_ref(),
        };
        Ok(self.algorithms[i].as_dyn().run(&input))
    }

    /// Replaces one agent's algorithm, checking it against every token.
    pub fn with_algorithm(mut self, agent: AgentId, algorithm: Algorithm) -> Result<Self> {
        let i = self.agent_index(agent)?;
        check_tokens(&algorithm, &self.derandomizers.points, i, self.keys.as_ref())?;
        self.algorithms[i] = algorithm;
        Ok(self)
    }

    /// The same structure over another scalar type. Probabilities are
    /// reconverted from the exact values.
    pub fn convert<U: Scalar>(&self) -> ProbabilisticStructure<U> {
        ProbabilisticStructure {
            agents: self.agents.clone(),
            propositions: self.propositions.clone(),
            states: self.states.clone(),
            state_ids: self.state_ids.clone(),
            algorithms: self.algorithms.clone(),
            derandomizers: DerandomizerSpace::from_exact(
                self.derandomizers.points.clone(),
                self.derandomizers.exact.clone(),
            ),
            keys: self.keys.clone(),
            cells: self.cells.clone(),
        }
    }

    /// Model-file form. Fails for programmatic algorithms.
    pub fn to_document(&self) -> Result<ModelDocument> {
        let agent_map = |per: &dyn Fn(usize) -> Option<Vec<String>>| -> BTreeMap<String, Vec<String>> {
            self.agents
                .iter()
                .enumerate()
                .filter_map(|(i, a)| per(i).map(|v| (a.clone(), v)))
                .collect()
        };
        let states = self
            .states
            .iter()
            .map(|s| StateDoc {
                id: s.id.clone(),
                valuation: s.valuation.clone(),
                locals: self.agents.iter().cloned().zip(s.locals.iter().cloned()).collect(),
                received: agent_map(&|i| {
                    (!s.received[i].is_empty()).then(|| s.received[i].iter().map(ToString::to_string).collect())
                }),
                initkeys: agent_map(&|i| {
                    (!s.initkeys[i].is_empty()).then(|| s.initkeys[i].iter().cloned().collect())
                }),
            })
            .collect();
        let d = &self.derandomizers;
        let derandomizers = if self.agents.len() == 1 {
            let list = (0..d.len())
                .map(|k| TokenProb {
                    token: d.points[k][0].clone(),
                    prob: format_rational(&d.exact[k]),
                })
                .collect();
            DerandomizerSpec::Independent([(self.agents[0].clone(), list)].into_iter().collect())
        } else {
            DerandomizerSpec::Joint(
                (0..d.len())
                    .map(|k| JointPoint {
                        tokens: d.points[k].clone(),
                        prob: format_rational(&d.exact[k]),
                    })
                    .collect(),
            )
        };
        let mut algorithms = BTreeMap::new();
        for (a, alg) in self.agents.iter().zip(&self.algorithms) {
            let spec = alg
                .spec()
                .ok_or_else(|| Error::Unsupported(format!("algorithm of agent `{a}` is programmatic")))?;
            algorithms.insert(a.clone(), spec.clone());
        }
        Ok(ModelDocument {
            agents: self.agents.clone(),
            propositions: self.propositions.clone(),
            keys: self.keys.as_ref().map(|ks| {
                ks.declarations()
                    .map(|(n, inv)| KeyDoc {
                        name: n.to_string(),
                        inverse: (n != inv).then(|| inv.to_string()),
                    })
                    .collect()
            }),
            states,
            derandomizers,
            algorithms,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = self.to_document()?;
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Schema(e.to_string()))
    }
}

/// Structural equality, ignoring programmatic algorithms' identity.
impl<T: Scalar> PartialEq for ProbabilisticStructure<T> {
    fn eq(&self, other: &Self) -> bool {
        let algs_eq = self.algorithms.len() == other.algorithms.len()
            && self
                .algorithms
                .iter()
                .zip(&other.algorithms)
                .all(|(a, b)| match (a, b) {
                    (Algorithm::Spec(x), Algorithm::Spec(y)) => x == y,
                    (Algorithm::Custom(x), Algorithm::Custom(y)) => Arc::ptr_eq(x, y),
                    _ => false,
                });
        self.agents == other.agents
            && self.propositions == other.propositions
            && self.states == other.states
            && self.derandomizers.points == other.derandomizers.points
            && self.derandomizers.exact == other.derandomizers.exact
            && self.keys == other.keys
            && algs_eq
    }
}

fn check_tokens(alg: &Algorithm, points: &[Vec<String>], i: usize, keys: Option<&KeySpace>) -> Result<()> {
    let mut seen = HashSet::new();
    for p in points {
        if seen.insert(p[i].as_str()) {
            alg.as_dyn().check_token(&p[i], keys)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Model files

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub agents: Vec<String>,
    pub propositions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keys: Option<Vec<KeyDoc>>,
    pub states: Vec<StateDoc>,
    pub derandomizers: DerandomizerSpec,
    pub algorithms: BTreeMap<String, AlgorithmSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub id: String,
    /// Omitted propositions are false.
    #[serde(default)]
    pub valuation: BTreeMap<String, bool>,
    pub locals: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub received: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub initkeys: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerandomizerSpec {
    /// Per-agent distributions, combined as a product.
    Independent(BTreeMap<String, Vec<TokenProb>>),
    /// Explicit joint distribution; tokens listed in agent order.
    Joint(Vec<JointPoint>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenProb {
    pub token: String,
    pub prob: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointPoint {
    pub tokens: Vec<String>,
    pub prob: String,
}

fn parse_prob(text: &str, point: &str) -> Result<BigRational> {
    let non_positive = || Error::NonPositiveProbability {
        point: point.to_string(),
        prob: text.to_string(),
    };
    if text.trim_start().starts_with('-') {
        return Err(non_positive());
    }
    let q = parse_rational(text).ok_or_else(|| Error::Schema(format!("bad probability `{text}` at {point}")))?;
    if !q.is_positive() {
        return Err(non_positive());
    }
    Ok(q)
}

fn check_mass(total: &BigRational) -> Result<()> {
    if total.is_one() {
        Ok(())
    } else {
        Err(Error::DistributionMass(format_rational(total)))
    }
}

impl DerandomizerSpec {
    fn expand(&self, agents: &[String]) -> Result<(Vec<Vec<String>>, Vec<BigRational>)> {
        match self {
            DerandomizerSpec::Independent(per) => {
                if let Some(a) = per.keys().find(|a| !agents.contains(a)) {
                    return Err(Error::UnknownAgent(a.clone()));
                }
                let mut points = vec![Vec::new()];
                let mut probs = vec![BigRational::one()];
                for a in agents {
                    let list = per
                        .get(a)
                        .ok_or_else(|| Error::Schema(format!("no derandomizer distribution for agent `{a}`")))?;
                    if list.is_empty() {
                        return Err(Error::Schema(format!("empty derandomizer distribution for agent `{a}`")));
                    }
                    let mut total = BigRational::zero();
                    let mut seen = HashSet::new();
                    let mut parsed = Vec::with_capacity(list.len());
                    for tp in list {
                        if !seen.insert(tp.token.as_str()) {
                            return Err(Error::Schema(format!("token `{}` listed twice for `{a}`", tp.token)));
                        }
                        let q = parse_prob(&tp.prob, &tp.token)?;
                        total += &q;
                        parsed.push((tp.token.clone(), q));
                    }
                    check_mass(&total)?;
                    let mut next_points = Vec::with_capacity(points.len() * parsed.len());
                    let mut next_probs = Vec::with_capacity(points.len() * parsed.len());
                    for (p, q) in points.iter().zip(&probs) {
                        for (tok, qt) in &parsed {
                            let mut p = p.clone();
                            p.push(tok.clone());
                            next_points.push(p);
                            next_probs.push(q * qt);
                        }
                    }
                    points = next_points;
                    probs = next_probs;
                }
                Ok((points, probs))
            }
            DerandomizerSpec::Joint(list) => {
                if list.is_empty() {
                    return Err(Error::Schema("empty joint derandomizer distribution".into()));
                }
                let mut total = BigRational::zero();
                let mut seen = HashSet::new();
                let mut points = Vec::with_capacity(list.len());
                let mut probs = Vec::with_capacity(list.len());
                for jp in list {
                    let label = format!("({})", jp.tokens.join(","));
                    if jp.tokens.len() != agents.len() {
                        return Err(Error::Schema(format!(
                            "point {label} has {} tokens for {} agents",
                            jp.tokens.len(),
                            agents.len()
                        )));
                    }
                    if !seen.insert(jp.tokens.clone()) {
                        return Err(Error::Schema(format!("point {label} listed twice")));
                    }
                    let q = parse_prob(&jp.prob, &label)?;
                    total += &q;
                    points.push(jp.tokens.clone());
                    probs.push(q);
                }
                check_mass(&total)?;
                Ok((points, probs))
            }
        }
    }
}

impl ModelDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents serialize")
    }

    /// Validates the document and builds the structure.
    pub fn build<T: Scalar>(&self) -> Result<ProbabilisticStructure<T>> {
        let agents = self.agents.clone();
        if agents.is_empty() {
            return Err(Error::Schema("at least one agent is required".into()));
        }
        let mut seen = HashSet::new();
        for a in &agents {
            if a.is_empty() || !seen.insert(a) {
                return Err(Error::Schema(format!("agent name `{a}` is empty or repeated")));
            }
        }
        let agent_pos = |a: &str| agents.iter().position(|x| x == a).ok_or_else(|| Error::UnknownAgent(a.to_string()));

        let mut seen = HashSet::new();
        for p in &self.propositions {
            if !is_proposition_name(p) {
                return Err(Error::Schema(format!("`{p}` cannot be used as a proposition name")));
            }
            if !seen.insert(p) {
                return Err(Error::Schema(format!("proposition `{p}` declared twice")));
            }
        }

        let keys = match &self.keys {
            None => None,
            Some(decls) => Some(KeySpace::new(decls.iter().map(|k| (k.name.as_str(), k.inverse.as_deref())))?),
        };

        if self.states.is_empty() {
            return Err(Error::Schema("at least one state is required".into()));
        }
        let mut states = Vec::with_capacity(self.states.len());
        let mut state_ids = HashMap::new();
        for (idx, sd) in self.states.iter().enumerate() {
            if state_ids.insert(sd.id.clone(), idx).is_some() {
                return Err(Error::Schema(format!("state `{}` declared twice", sd.id)));
            }
            let mut valuation: BTreeMap<String, bool> = self.propositions.iter().map(|p| (p.clone(), false)).collect();
            for (p, b) in &sd.valuation {
                match valuation.get_mut(p) {
                    Some(slot) => *slot = *b,
                    None => return Err(Error::UnknownProposition(p.clone())),
                }
            }
            let mut locals = vec![None; agents.len()];
            for (a, l) in &sd.locals {
                locals[agent_pos(a)?] = Some(l.clone());
            }
            let locals = locals
                .into_iter()
                .zip(&agents)
                .map(|(l, a)| l.ok_or_else(|| Error::Schema(format!("state `{}` has no local state for `{a}`", sd.id))))
                .collect::<Result<Vec<_>>>()?;
            let mut received = vec![Vec::new(); agents.len()];
            for (a, msgs) in &sd.received {
                let i = agent_pos(a)?;
                for m in msgs {
                    received[i].push(parse_message(m, keys.as_ref())?);
                }
            }
            let mut initkeys = vec![BTreeSet::new(); agents.len()];
            for (a, ks) in &sd.initkeys {
                let i = agent_pos(a)?;
                for k in ks {
                    match &keys {
                        Some(space) if space.contains(k) => {
                            initkeys[i].insert(k.clone());
                        }
                        _ => return Err(Error::UnknownKey(k.clone())),
                    }
                }
            }
            states.push(State {
                id: sd.id.clone(),
                valuation,
                locals,
                received,
                initkeys,
            });
        }

        let (points, probs) = self.derandomizers.expand(&agents)?;

        if let Some(a) = self.algorithms.keys().find(|a| !agents.contains(a)) {
            return Err(Error::UnknownAgent(a.clone()));
        }
        let mut algorithms = Vec::with_capacity(agents.len());
        for (i, a) in agents.iter().enumerate() {
            let spec = self
                .algorithms
                .get(a)
                .ok_or_else(|| Error::Schema(format!("no algorithm for agent `{a}`")))?;
            for s in spec.state_refs() {
                if !state_ids.contains_key(s) {
                    return Err(Error::UnknownState(s.to_string()));
                }
            }
            for p in spec.prop_refs() {
                if !self.propositions.iter().any(|x| x == p) {
                    return Err(Error::UnknownProposition(p.to_string()));
                }
            }
            let alg = Algorithm::Spec(spec.clone());
            check_tokens(&alg, &points, i, keys.as_ref())?;
            algorithms.push(alg);
        }

        let mut cells: Vec<BTreeMap<String, Vec<usize>>> = vec![BTreeMap::new(); agents.len()];
        for (s, st) in states.iter().enumerate() {
            for (i, l) in st.locals.iter().enumerate() {
                cells[i].entry(l.clone()).or_default().push(s);
            }
        }

        Ok(ProbabilisticStructure {
            agents,
            propositions: self.propositions.clone(),
            states,
            state_ids,
            algorithms,
            derandomizers: DerandomizerSpace::from_exact(points, probs),
            keys,
            cells,
        })
    }
}

mod formula_text {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(f: &Formula, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(f)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Formula, D::Error> {
        let text = String::deserialize(d)?;
        parse_formula(&text).map_err(serde::de::Error::custom)
    }
}
