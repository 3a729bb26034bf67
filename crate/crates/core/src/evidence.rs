//! Evidence spaces and weights of evidence.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Answer, ProbabilisticStructure};
use crate::scalar::Scalar;
use crate::semantics::{AnswerDistribution, Evaluator};
use crate::syntax::{AgentId, EvBound, Formula};

/// Index of `φ` in a space built for query `φ`.
pub const HYPOTHESIS: usize = 0;
/// Index of `¬φ`.
pub const COMPLEMENT: usize = 1;

/// Hypotheses, the observations Yes/No/?, and for each hypothesis a finite
/// set of measures on observations. A hypothesis may have no measure.
#[derive(Clone, Debug, PartialEq)]
pub struct EvidenceSpace<T> {
    hypotheses: Vec<String>,
    measures: Vec<Vec<AnswerDistribution<T>>>,
}

impl<T: Scalar> EvidenceSpace<T> {
    pub fn new(hypotheses: Vec<String>, measures: Vec<Vec<AnswerDistribution<T>>>) -> Result<Self> {
        if hypotheses.len() != measures.len() {
            return Err(Error::Schema("one measure set per hypothesis".into()));
        }
        if measures.iter().all(Vec::is_empty) {
            return Err(Error::Schema("every hypothesis has an empty measure set".into()));
        }
        for mu in measures.iter().flatten() {
            let ok = Answer::ALL.iter().all(|&a| mu.get(a).in_unit_interval()) && mu.total().eq_tol(&T::one());
            if !ok {
                return Err(Error::DistributionMass(mu.total().to_string()));
            }
        }
        Ok(EvidenceSpace { hypotheses, measures })
    }

    /// Space whose every hypothesis has exactly one measure.
    pub fn simple(hypotheses: Vec<String>, measures: Vec<AnswerDistribution<T>>) -> Result<Self> {
        Self::new(hypotheses, measures.into_iter().map(|m| vec![m]).collect())
    }

    pub fn hypotheses(&self) -> &[String] {
        &self.hypotheses
    }

    pub fn measures(&self, h: usize) -> &[AnswerDistribution<T>] {
        &self.measures[h]
    }

    pub fn is_simple(&self) -> bool {
        self.measures.iter().all(|m| m.len() == 1)
    }

    /// `μ_h(ob) / Σ_h′ μ_h′(ob)` for simple spaces.
    pub fn weight(&self, ob: Answer, h: usize) -> Result<T> {
        if !self.is_simple() {
            return Err(Error::NotSimple);
        }
        let denom = self
            .measures
            .iter()
            .fold(T::zero(), |acc, m| acc + m[0].get(ob).clone());
        if denom.is_zero() {
            return Err(Error::ImpossibleObservation);
        }
        Ok(self.measures[h][0].get(ob).clone() / denom)
    }

    /// All weights `ob` can lend `h` as the measures range over their sets,
    /// skipping combinations with zero denominator. Sorted, without
    /// duplicates.
    pub fn weight_set(&self, ob: Answer, h: usize) -> Vec<T> {
        if self.measures[h].is_empty() {
            return Vec::new();
        }
        // Attainable values of Σ_{h′ ≠ h} μ_h′(ob), over nonempty sets only.
        let mut rest: Vec<T> = vec![T::zero()];
        for (g, set) in self.measures.iter().enumerate() {
            if g == h || set.is_empty() {
                continue;
            }
            let mut next: Vec<T> = Vec::new();
            for r in &rest {
                for mu in set {
                    push_unique(&mut next, r.clone() + mu.get(ob).clone());
                }
            }
            rest = next;
        }
        let mut out = Vec::new();
        for mu in &self.measures[h] {
            let x = mu.get(ob).clone();
            for r in &rest {
                let denom = x.clone() + r.clone();
                if !denom.is_zero() {
                    push_unique(&mut out, x.clone() / denom);
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).expect("weights are ordered"));
        out
    }

    /// Minimum of the weight set, 0 when it is empty.
    pub fn lower_weight(&self, ob: Answer, h: usize) -> T {
        self.weight_set(ob, h).into_iter().next().unwrap_or_else(T::zero)
    }

    /// Maximum of the weight set, 0 when it is empty.
    pub fn upper_weight(&self, ob: Answer, h: usize) -> T {
        self.weight_set(ob, h).into_iter().last().unwrap_or_else(T::zero)
    }

    /// Whether some measure of some hypothesis gives `ob` positive mass.
    pub fn possible(&self, ob: Answer) -> bool {
        self.measures.iter().flatten().any(|m| *m.get(ob) > T::zero())
    }
}

fn push_unique<T: PartialEq>(v: &mut Vec<T>, x: T) {
    if !v.contains(&x) {
        v.push(x);
    }
}

/// `E_{A_i, f, ℓ}`: hypotheses `f` and `¬f`, each with the deduplicated
/// answer distributions of the states in `S_ℓ` where it holds.
pub fn build_evidence_space<T: Scalar>(
    n: &ProbabilisticStructure<T>,
    agent: AgentId,
    f: &Formula,
    label: &str,
) -> Result<Arc<EvidenceSpace<T>>> {
    Evaluator::new(n).evidence_space(agent, f, label)
}

pub fn ev_value<T: Scalar>(
    n: &ProbabilisticStructure<T>,
    agent: AgentId,
    f: &Formula,
    s: usize,
    v: usize,
    bound: EvBound,
) -> Result<T> {
    Evaluator::new(n).ev_value(agent, f, s, v, bound)
}

/// Posterior of a hypothesis with prior `prior` after evidence of weight
/// `weight`: `wp / (wp + (1−w)(1−p))`.
pub fn posterior_update<T: Scalar>(prior: &T, weight: &T) -> Result<T> {
    if !prior.in_unit_interval() || !weight.in_unit_interval() {
        return Err(Error::Unsupported("prior and weight must lie in [0,1]".into()));
    }
    let num = weight.clone() * prior.clone();
    let denom = num.clone() + (T::one() - weight.clone()) * (T::one() - prior.clone());
    if denom.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / denom)
}
