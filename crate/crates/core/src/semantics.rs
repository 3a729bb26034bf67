//! Satisfaction at `(N, s, v)`, probabilities, and validity.
//!
//! States and derandomizer points are addressed by index. `X_i` and the
//! `Ev` operators read the answer realized at `v`; `K_i` and `Pr` quantify
//! the point away, so formulas built without a bare `X_i` or `Ev` are
//! evaluated once per state.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::dolevyao;
use crate::error::{Error, Result};
use crate::evidence::{self, EvidenceSpace};
use crate::model::{Answer, ProbabilisticStructure};
use crate::scalar::Scalar;
use crate::syntax::{AgentId, EvBound, Formula, Message};

/// `μ_{s,φ}` over the three observations.
#[derive(Clone, Debug, PartialEq)]
pub struct AnswerDistribution<T> {
    pub yes: T,
    pub no: T,
    pub unknown: T,
}

impl<T: Scalar> AnswerDistribution<T> {
    pub fn zero() -> Self {
        AnswerDistribution {
            yes: T::zero(),
            no: T::zero(),
            unknown: T::zero(),
        }
    }

    /// Point mass on one answer.
    pub fn certain(a: Answer) -> Self {
        let mut d = Self::zero();
        *d.get_mut(a) = T::one();
        d
    }

    pub fn get(&self, a: Answer) -> &T {
        match a {
            Answer::Yes => &self.yes,
            Answer::No => &self.no,
            Answer::Unknown => &self.unknown,
        }
    }

    pub fn get_mut(&mut self, a: Answer) -> &mut T {
        match a {
            Answer::Yes => &mut self.yes,
            Answer::No => &mut self.no,
            Answer::Unknown => &mut self.unknown,
        }
    }

    pub fn total(&self) -> T {
        self.yes.clone() + self.no.clone() + self.unknown.clone()
    }
}

/// Outcome of [`valid_in`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum Validity {
    Valid,
    Counterexample { state: String, point: usize, point_label: String },
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

/// Whether the truth of `f` can vary with the derandomizer point.
pub fn depends_on_point(f: &Formula) -> bool {
    match f {
        Formula::AlgKnows(..) | Formula::Ev { .. } => true,
        Formula::Not(g) => depends_on_point(g),
        Formula::And(a, b) => depends_on_point(a) || depends_on_point(b),
        Formula::Prop(_) | Formula::Has(..) | Formula::Knows(..) | Formula::Prob { .. } => false,
    }
}

type SpaceKey = (usize, Formula, String);

/// Evaluates formulas over one structure, memoizing state-level values.
/// The caches are keyed by formula, so they are shared across calls.
pub struct Evaluator<'a, T> {
    n: &'a ProbabilisticStructure<T>,
    probs: Mutex<HashMap<(Formula, usize), T>>,
    spaces: Mutex<HashMap<SpaceKey, Arc<EvidenceSpace<T>>>>,
}

impl<'a, T: Scalar> Evaluator<'a, T> {
    pub fn new(n: &'a ProbabilisticStructure<T>) -> Self {
        Evaluator {
            n,
            probs: Mutex::new(HashMap::new()),
            spaces: Mutex::new(HashMap::new()),
        }
    }

    pub fn structure(&self) -> &'a ProbabilisticStructure<T> {
        self.n
    }

    /// Rejects unknown agents and propositions, and `Ev` over formulas that
    /// are not objective.
    pub fn check(&self, f: &Formula) -> Result<()> {
        match f {
            Formula::Prop(p) => {
                if self.n.propositions().iter().any(|q| q == p) {
                    Ok(())
                } else {
                    Err(Error::UnknownProposition(p.clone()))
                }
            }
            Formula::Has(a, m) => {
                self.n.agent_index(*a)?;
                self.resolve(m).map(|_| ())
            }
            Formula::Not(g) | Formula::Prob { formula: g, .. } => self.check(g),
            Formula::And(a, b) => {
                self.check(a)?;
                self.check(b)
            }
            Formula::Knows(a, g) | Formula::AlgKnows(a, g) => {
                self.n.agent_index(*a)?;
                self.check(g)
            }
            Formula::Ev { agent, formula, .. } => {
                self.n.agent_index(*agent)?;
                if !formula.is_objective() {
                    return Err(Error::NotObjective(formula.to_string()));
                }
                self.check(formula)
            }
        }
    }

    fn check_indices(&self, s: usize, v: usize) -> Result<()> {
        if s >= self.n.state_count() {
            return Err(Error::UnknownState(s.to_string()));
        }
        if v >= self.n.derandomizers().len() {
            return Err(Error::UnknownPoint(v));
        }
        Ok(())
    }

    fn resolve(&self, m: &Message) -> Result<Message> {
        match self.n.keys() {
            Some(keys) => m.resolve(keys),
            None => Ok(m.clone()),
        }
    }

    /// `(N, s, v) ⊨ f`.
    pub fn holds(&self, s: usize, v: usize, f: &Formula) -> Result<bool> {
        self.check_indices(s, v)?;
        self.check(f)?;
        self.eval(s, v, f)
    }

    fn eval(&self, s: usize, v: usize, f: &Formula) -> Result<bool> {
        Ok(match f {
            Formula::Prop(p) => self.n.state(s).valuation.get(p).copied().unwrap_or(false),
            Formula::Has(a, m) => {
                let i = self.n.agent_index(*a)?;
                let m = self.resolve(m)?;
                let st = self.n.state(s);
                st.received[i].iter().any(|r| dolevyao::contains(&m, r))
                    || matches!(&m, Message::Key(k) if st.initkeys[i].contains(k))
            }
            Formula::Not(g) => !self.eval(s, v, g)?,
            Formula::And(a, b) => self.eval(s, v, a)? && self.eval(s, v, b)?,
            Formula::Knows(a, g) => {
                let points = if depends_on_point(g) { self.n.derandomizers().len() } else { 1 };
                for &t in self.n.indistinguishable(*a, s)? {
                    for w in 0..points {
                        if !self.eval(t, w, g)? {
                            return Ok(false);
                        }
                    }
                }
                true
            }
            Formula::AlgKnows(a, g) => self.n.run_algorithm(*a, g, s, v)? == Answer::Yes,
            Formula::Prob { formula, cmp, threshold } => {
                let p = self.prob_unchecked(s, formula)?;
                cmp.eval(&p, &T::from_rational(threshold))
            }
            Formula::Ev {
                bound,
                agent,
                formula,
                cmp,
                threshold,
            } => {
                let w = self.ev_unchecked(*agent, formula, s, v, *bound)?;
                cmp.eval(&w, &T::from_rational(threshold))
            }
        })
    }

    /// `ν({v | (N, s, v) ⊨ f})`.
    pub fn probability(&self, s: usize, f: &Formula) -> Result<T> {
        self.check_indices(s, 0)?;
        self.check(f)?;
        self.prob_unchecked(s, f)
    }

    fn prob_unchecked(&self, s: usize, f: &Formula) -> Result<T> {
        let key = (f.clone(), s);
        if let Some(p) = self.probs.lock().expect("cache lock").get(&key) {
            return Ok(p.clone());
        }
        let p = if depends_on_point(f) {
            let d = self.n.derandomizers();
            let mut acc = T::zero();
            for v in 0..d.len() {
                if self.eval(s, v, f)? {
                    acc = acc + d.prob(v).clone();
                }
            }
            acc
        } else if self.eval(s, 0, f)? {
            T::one()
        } else {
            T::zero()
        };
        self.probs.lock().expect("cache lock").insert(key, p.clone());
        Ok(p)
    }

    /// `μ_{s,f}`: the answer masses of agent `agent`'s algorithm on `f` at `s`.
    pub fn answer_distribution(&self, agent: AgentId, f: &Formula, s: usize) -> Result<AnswerDistribution<T>> {
        self.check_indices(s, 0)?;
        self.n.agent_index(agent)?;
        let d = self.n.derandomizers();
        let mut out = AnswerDistribution::<T>::zero();
        for v in 0..d.len() {
            let a = self.n.run_algorithm(agent, f, s, v)?;
            let slot = out.get_mut(a);
            *slot = slot.clone() + d.prob(v).clone();
        }
        Ok(out)
    }

    /// Every `(s, v)` in lexicographic state-id order, then point order;
    /// the first falsifying pair is reported.
    pub fn valid_in(&self, f: &Formula) -> Result<Validity> {
        self.check(f)?;
        let d = self.n.derandomizers();
        let points = if depends_on_point(f) { d.len() } else { 1 };
        for s in self.states_by_id() {
            for v in 0..points {
                if !self.eval(s, v, f)? {
                    return Ok(Validity::Counterexample {
                        state: self.n.state(s).id.clone(),
                        point: v,
                        point_label: d.label(v),
                    });
                }
            }
        }
        Ok(Validity::Valid)
    }

    /// State indices sorted by id.
    pub fn states_by_id(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n.state_count()).collect();
        order.sort_by(|&a, &b| self.n.state(a).id.cmp(&self.n.state(b).id));
        order
    }

    /// Truth value at every `(s, v)`, states in structure order.
    pub fn truth_table(&self, f: &Formula) -> Result<Vec<Vec<bool>>> {
        self.check(f)?;
        (0..self.n.state_count())
            .map(|s| (0..self.n.derandomizers().len()).map(|v| self.eval(s, v, f)).collect())
            .collect()
    }

    /// `E_{A_i, f, ℓ}`, built once per `(agent, f, ℓ)`.
    pub fn evidence_space(&self, agent: AgentId, f: &Formula, label: &str) -> Result<Arc<EvidenceSpace<T>>> {
        let i = self.n.agent_index(agent)?;
        if !f.is_objective() {
            return Err(Error::NotObjective(f.to_string()));
        }
        self.check(f)?;
        self.space_unchecked(i, agent, f, label)
    }

    fn space_unchecked(&self, i: usize, agent: AgentId, f: &Formula, label: &str) -> Result<Arc<EvidenceSpace<T>>> {
        let key = (i, f.clone(), label.to_string());
        if let Some(e) = self.spaces.lock().expect("cache lock").get(&key) {
            return Ok(e.clone());
        }
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for &s in self.n.states_with_label(agent, label)? {
            let mu = self.answer_distribution(agent, f, s)?;
            let side = if self.eval(s, 0, f)? { &mut pos } else { &mut neg };
            if !side.contains(&mu) {
                side.push(mu);
            }
        }
        let space = Arc::new(EvidenceSpace::new(
            vec![f.to_string(), Formula::not(f.clone()).to_string()],
            vec![pos, neg],
        )?);
        self.spaces.lock().expect("cache lock").insert(key, space.clone());
        Ok(space)
    }

    /// Lower or upper weight that the realized observation at `(s, v)`
    /// lends to `f` in agent `agent`'s evidence space.
    pub fn ev_value(&self, agent: AgentId, f: &Formula, s: usize, v: usize, bound: EvBound) -> Result<T> {
        self.check_indices(s, v)?;
        self.n.agent_index(agent)?;
        if !f.is_objective() {
            return Err(Error::NotObjective(f.to_string()));
        }
        self.check(f)?;
        self.ev_unchecked(agent, f, s, v, bound)
    }

    fn ev_unchecked(&self, agent: AgentId, f: &Formula, s: usize, v: usize, bound: EvBound) -> Result<T> {
        let i = self.n.agent_index(agent)?;
        let label = &self.n.state(s).locals[i];
        let space = self.space_unchecked(i, agent, f, label)?;
        let ob = self.n.run_algorithm(agent, f, s, v)?;
        Ok(match bound {
            EvBound::Lower => space.lower_weight(ob, evidence::HYPOTHESIS),
            EvBound::Upper => space.upper_weight(ob, evidence::HYPOTHESIS),
        })
    }
}

pub fn holds<T: Scalar>(n: &ProbabilisticStructure<T>, s: usize, v: usize, f: &Formula) -> Result<bool> {
    Evaluator::new(n).holds(s, v, f)
}

pub fn probability<T: Scalar>(n: &ProbabilisticStructure<T>, s: usize, f: &Formula) -> Result<T> {
    Evaluator::new(n).probability(s, f)
}

pub fn answer_distribution<T: Scalar>(
    n: &ProbabilisticStructure<T>,
    agent: AgentId,
    f: &Formula,
    s: usize,
) -> Result<AnswerDistribution<T>> {
    Evaluator::new(n).answer_distribution(agent, f, s)
}

pub fn valid_in<T: Scalar>(n: &ProbabilisticStructure<T>, f: &Formula) -> Result<Validity> {
    Evaluator::new(n).valid_in(f)
}
