//! Reliability of randomized knowledge algorithms and the evidence bounds
//! it implies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Answer, NegationMode, ProbabilisticStructure};
use crate::scalar::Scalar;
use crate::semantics::{Evaluator, Validity};
use crate::syntax::{AgentId, Cmp, EvBound, Formula};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NegationRespect {
    Weak,
    Strong,
    No,
}

impl NegationRespect {
    pub fn respects(self) -> bool {
        self != NegationRespect::No
    }
}

/// Tight reliability pair of an algorithm for an objective formula.
#[derive(Clone, Debug, PartialEq)]
pub struct ReliabilityReport<T> {
    pub formula: Formula,
    /// Least probability of Yes over states where the formula holds; 1 if
    /// there are none.
    pub alpha_star: T,
    /// Greatest probability of Yes over states where it fails; 0 if none.
    pub beta_star: T,
    pub complete: bool,
    pub respects_negation: NegationRespect,
    pub vacuous_positive: bool,
    pub vacuous_negative: bool,
}

impl<T: Scalar> ReliabilityReport<T> {
    /// `(α, β)`-reliability, read off the tight pair.
    pub fn is_reliable(&self, alpha: &T, beta: &T) -> bool {
        alpha.in_unit_interval()
            && beta.in_unit_interval()
            && (self.vacuous_positive || alpha.le_tol(&self.alpha_star))
            && (self.vacuous_negative || beta.ge_tol(&self.beta_star))
    }
}

/// `(1−β, 1−α)`.
pub fn dual_of<T: Scalar>(alpha: &T, beta: &T) -> (T, T) {
    (T::one() - beta.clone(), T::one() - alpha.clone())
}

pub fn reliability<T: Scalar>(n: &ProbabilisticStructure<T>, agent: AgentId, f: &Formula) -> Result<ReliabilityReport<T>> {
    reliability_with(&Evaluator::new(n), agent, f)
}

pub fn reliability_with<T: Scalar>(e: &Evaluator<'_, T>, agent: AgentId, f: &Formula) -> Result<ReliabilityReport<T>> {
    let n = e.structure();
    n.agent_index(agent)?;
    if !f.is_objective() {
        return Err(Error::NotObjective(f.to_string()));
    }
    e.check(f)?;
    let neg = Formula::not(f.clone());
    let mut alpha: Option<T> = None;
    let mut beta: Option<T> = None;
    let mut complete = true;
    let (mut weak, mut strong) = (true, true);
    for s in 0..n.state_count() {
        let yes = e.answer_distribution(agent, f, s)?.yes;
        if e.holds(s, 0, f)? {
            alpha = Some(match alpha {
                Some(a) => T::min_of(a, yes),
                None => yes,
            });
        } else {
            beta = Some(match beta {
                Some(b) => T::max_of(b, yes),
                None => yes,
            });
        }
        for v in 0..n.derandomizers().len() {
            let a = n.run_algorithm(agent, f, s, v)?;
            let b = n.run_algorithm(agent, &neg, s, v)?;
            complete &= a != Answer::Unknown;
            weak &= b == NegationMode::Weak.apply(a);
            strong &= b == NegationMode::Strong.apply(a);
        }
    }
    let respects_negation = if weak {
        NegationRespect::Weak
    } else if strong {
        NegationRespect::Strong
    } else {
        NegationRespect::No
    };
    Ok(ReliabilityReport {
        formula: f.clone(),
        vacuous_positive: alpha.is_none(),
        vacuous_negative: beta.is_none(),
        alpha_star: alpha.unwrap_or_else(T::one),
        beta_star: beta.unwrap_or_else(T::zero),
        complete,
        respects_negation,
    })
}

/// Reliability pair the report implies for the negated formula.
pub fn dual_reliability<T: Scalar>(report: &ReliabilityReport<T>) -> Result<(T, T)> {
    if !report.complete {
        return Err(Error::NotComplete(report.formula.to_string()));
    }
    if !report.respects_negation.respects() {
        return Err(Error::NotNegationRespecting(report.formula.to_string()));
    }
    Ok(dual_of(&report.alpha_star, &report.beta_star))
}

/// Where a clause failed.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation<T> {
    pub state: String,
    pub point: usize,
    pub point_label: String,
    /// Offending value and the bound it broke, as `(value, cmp, bound)`.
    pub found: Vec<(String, T, Cmp, T)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClauseOutcome<T> {
    /// `yes`, `no` and their `both-` forms, each with an `-exact` variant
    /// for the degenerate pairs.
    pub name: &'static str,
    pub guard: Formula,
    /// Conclusions as `(quantity, cmp, bound)`.
    pub conclusion: Vec<(String, Cmp, T)>,
    /// Why the clause does not apply, if it does not.
    pub skipped: Option<String>,
    /// `(s, v)` pairs at which the guard held.
    pub triggered: usize,
    pub violation: Option<Violation<T>>,
}

impl<T> ClauseOutcome<T> {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Negation duality: the predicted pair against a direct computation.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCheck<T> {
    pub predicted: (T, T),
    pub direct: (T, T),
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport<T> {
    pub reliability: ReliabilityReport<T>,
    /// Pair the clauses were instantiated with.
    pub alpha: T,
    pub beta: T,
    pub clauses: Vec<ClauseOutcome<T>>,
    pub dual: Option<DualCheck<T>>,
    /// `X_i f ⇔ ¬X_i ¬f`, checked when the algorithm respects negation.
    pub negation_lemma: Option<Validity>,
    /// `EvLo_i(f) = 1 ⇒ f`.
    pub ev_one_implies: Validity,
}

impl<T> AuditReport<T> {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(ClauseOutcome::passed)
            && self.dual.as_ref().map_or(true, |d| d.agrees)
            && self.negation_lemma.as_ref().map_or(true, Validity::is_valid)
            && self.ev_one_implies.is_valid()
    }

    pub fn first_violation(&self) -> Option<(&'static str, &Violation<T>)> {
        self.clauses
            .iter()
            .find_map(|c| c.violation.as_ref().map(|v| (c.name, v)))
    }
}

/// Audits the evidence bounds with the tight reliability pair.
pub fn audit_evidence_bounds<T: Scalar>(n: &ProbabilisticStructure<T>, agent: AgentId, f: &Formula) -> Result<AuditReport<T>> {
    let e = Evaluator::new(n);
    let r = reliability_with(&e, agent, f)?;
    let (a, b) = (r.alpha_star.clone(), r.beta_star.clone());
    audit_with(&e, r, agent, f, a, b)
}

/// Audits the evidence bounds for a caller-supplied pair, which must be one
/// the algorithm is reliable for.
pub fn audit_evidence_bounds_for<T: Scalar>(
    n: &ProbabilisticStructure<T>,
    agent: AgentId,
    f: &Formula,
    alpha: T,
    beta: T,
) -> Result<AuditReport<T>> {
    let e = Evaluator::new(n);
    let r = reliability_with(&e, agent, f)?;
    if !r.is_reliable(&alpha, &beta) {
        return Err(Error::Unsupported(format!(
            "algorithm is not ({alpha}, {beta})-reliable for {f}; tight pair is ({}, {})",
            r.alpha_star, r.beta_star
        )));
    }
    audit_with(&e, r, agent, f, alpha, beta)
}

struct Clause<T> {
    name: &'static str,
    applies: bool,
    reason: &'static str,
    guard: usize,
    terms: Vec<(Term, Cmp, T)>,
}

#[derive(Clone, Copy)]
enum Term {
    LoPos,
    HiPos,
    LoNeg,
    HiNeg,
}

fn audit_with<T: Scalar>(
    e: &Evaluator<'_, T>,
    reliability: ReliabilityReport<T>,
    agent: AgentId,
    f: &Formula,
    alpha: T,
    beta: T,
) -> Result<AuditReport<T>> {
    if !reliability.complete {
        return Err(Error::NotComplete(f.to_string()));
    }
    let n = e.structure();
    let i = agent.0;
    let neg = Formula::not(f.clone());
    let guards = [
        Formula::and(Formula::alg_knows(i, f.clone()), Formula::not(Formula::knows(i, neg.clone()))),
        Formula::and(Formula::not(Formula::alg_knows(i, f.clone())), Formula::not(Formula::knows(i, f.clone()))),
        Formula::and(Formula::alg_knows(i, neg.clone()), Formula::not(Formula::knows(i, f.clone()))),
    ];
    let (zero, one) = (T::zero(), T::one());
    let half = T::from_ratio(1, 2);
    let at_origin = alpha.is_zero() && beta.is_zero();
    let at_top = alpha == one && beta == one;
    let sum = alpha.clone() + beta.clone();
    let co_sum = T::from_ratio(2, 1) - sum.clone();
    let pos_ratio = if at_origin { zero.clone() } else { alpha.clone() / sum.clone() };
    let neg_ratio = if at_origin { zero.clone() } else { beta.clone() / sum.clone() };
    let co_pos = if at_top { zero.clone() } else { (one.clone() - alpha.clone()) / co_sum.clone() };
    let co_neg = if at_top { zero.clone() } else { (one.clone() - beta.clone()) / co_sum.clone() };
    let respects = reliability.respects_negation.respects();

    let clauses = vec![
        Clause { name: "yes", applies: !at_origin, reason: "(α,β) = (0,0)", guard: 0, terms: vec![(Term::LoPos, Cmp::Ge, pos_ratio.clone())] },
        Clause { name: "yes-exact", applies: at_origin, reason: "(α,β) ≠ (0,0)", guard: 0, terms: vec![(Term::LoPos, Cmp::Eq, one.clone())] },
        Clause { name: "no", applies: !at_top, reason: "(α,β) = (1,1)", guard: 1, terms: vec![(Term::HiPos, Cmp::Le, co_pos.clone())] },
        Clause { name: "no-exact", applies: at_top, reason: "(α,β) ≠ (1,1)", guard: 1, terms: vec![(Term::HiPos, Cmp::Eq, zero.clone())] },
        Clause {
            name: "both-yes",
            applies: respects && !at_origin,
            reason: if respects { "(α,β) = (0,0)" } else { "does not respect negation" },
            guard: 0,
            terms: vec![(Term::LoPos, Cmp::Ge, pos_ratio), (Term::HiNeg, Cmp::Le, neg_ratio)],
        },
        Clause {
            name: "both-yes-exact",
            applies: respects && at_origin,
            reason: if respects { "(α,β) ≠ (0,0)" } else { "does not respect negation" },
            guard: 0,
            terms: vec![(Term::LoPos, Cmp::Eq, one.clone()), (Term::HiNeg, Cmp::Eq, zero.clone())],
        },
        Clause {
            name: "both-no",
            applies: respects && !at_top,
            reason: if respects { "(α,β) = (1,1)" } else { "does not respect negation" },
            guard: 2,
            terms: vec![(Term::LoNeg, Cmp::Ge, co_neg), (Term::HiPos, Cmp::Le, co_pos)],
        },
        Clause {
            name: "both-no-exact",
            applies: respects && at_top,
            reason: if respects { "(α,β) ≠ (1,1)" } else { "does not respect negation" },
            guard: 2,
            terms: vec![(Term::LoNeg, Cmp::Ge, half.clone()), (Term::HiPos, Cmp::Le, half)],
        },
    ];

    let term_label = |t: Term| match t {
        Term::LoPos => format!("EvLo{i}({f})"),
        Term::HiPos => format!("EvHi{i}({f})"),
        Term::LoNeg => format!("EvLo{i}({neg})"),
        Term::HiNeg => format!("EvHi{i}({neg})"),
    };

    let mut outcomes: Vec<ClauseOutcome<T>> = clauses
        .iter()
        .map(|c| ClauseOutcome {
            name: c.name,
            guard: guards[c.guard].clone(),
            conclusion: c.terms.iter().map(|(t, cmp, b)| (term_label(*t), *cmp, b.clone())).collect(),
            skipped: (!c.applies).then(|| c.reason.to_string()),
            triggered: 0,
            violation: None,
        })
        .collect();

    let d = n.derandomizers();
    for s in e.states_by_id() {
        for v in 0..d.len() {
            let guard_holds = [
                e.holds(s, v, &guards[0])?,
                e.holds(s, v, &guards[1])?,
                e.holds(s, v, &guards[2])?,
            ];
            let value = |t: Term| -> Result<T> {
                match t {
                    Term::LoPos => e.ev_value(agent, f, s, v, EvBound::Lower),
                    Term::HiPos => e.ev_value(agent, f, s, v, EvBound::Upper),
                    Term::LoNeg => e.ev_value(agent, &neg, s, v, EvBound::Lower),
                    Term::HiNeg => e.ev_value(agent, &neg, s, v, EvBound::Upper),
                }
            };
            for (c, out) in clauses.iter().zip(outcomes.iter_mut()) {
                if !c.applies || !guard_holds[c.guard] {
                    continue;
                }
                out.triggered += 1;
                if out.violation.is_some() {
                    continue;
                }
                let mut found = Vec::new();
                for (t, cmp, bound) in &c.terms {
                    let x = value(*t)?;
                    if !cmp_tol(*cmp, &x, bound) {
                        found.push((term_label(*t), x, *cmp, bound.clone()));
                    }
                }
                if !found.is_empty() {
                    out.violation = Some(Violation {
                        state: n.state(s).id.clone(),
                        point: v,
                        point_label: d.label(v),
                        found,
                    });
                }
            }
        }
    }

    let dual = if respects {
        let predicted = dual_of(&reliability.alpha_star, &reliability.beta_star);
        let direct_report = reliability_with(e, agent, &neg)?;
        let direct = (direct_report.alpha_star, direct_report.beta_star);
        let agrees = predicted.0.eq_tol(&direct.0) && predicted.1.eq_tol(&direct.1);
        Some(DualCheck { predicted, direct, agrees })
    } else {
        None
    };
    let negation_lemma = if respects {
        Some(e.valid_in(&Formula::iff(
            Formula::alg_knows(i, f.clone()),
            Formula::not(Formula::alg_knows(i, neg.clone())),
        ))?)
    } else {
        None
    };
    let ev_one_implies = e.valid_in(&Formula::implies(
        Formula::ev(EvBound::Lower, i, f.clone(), Cmp::Eq, num_traits::One::one()),
        f.clone(),
    ))?;

    Ok(AuditReport {
        reliability,
        alpha,
        beta,
        clauses: outcomes,
        dual,
        negation_lemma,
        ev_one_implies,
    })
}

fn cmp_tol<T: Scalar>(cmp: Cmp, x: &T, bound: &T) -> bool {
    match cmp {
        Cmp::Ge => x.ge_tol(bound),
        Cmp::Le => x.le_tol(bound),
        Cmp::Eq => x.eq_tol(bound),
        Cmp::Gt | Cmp::Lt => cmp.eval(x, bound),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;
    use crate::syntax::parse_formula;
    use crate::Rational;

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    #[test]
    fn coin_pair() {
        let n = scenarios::coin_structure::<Rational>();
        let r = reliability(&n, AgentId(1), &parse_formula("dh").unwrap()).unwrap();
        assert_eq!((r.alpha_star.clone(), r.beta_star.clone()), (q(1, 1), q(1, 2)));
        assert!(r.complete);
        assert_eq!(r.respects_negation, NegationRespect::Weak);
        assert!(r.is_reliable(&q(1, 2), &q(3, 4)));
        assert!(!r.is_reliable(&q(1, 1), &q(1, 4)));
    }

    #[test]
    fn sensor_pair_is_self_dual() {
        let n = scenarios::sensor_structure::<Rational>(13, 10).unwrap();
        let wall = parse_formula("wall10").unwrap();
        let r = reliability(&n, AgentId(1), &wall).unwrap();
        assert_eq!((r.alpha_star.clone(), r.beta_star.clone()), (q(3, 4), q(1, 4)));
        assert_eq!(dual_reliability(&r).unwrap(), (q(3, 4), q(1, 4)));
        let direct = reliability(&n, AgentId(1), &Formula::not(wall)).unwrap();
        assert_eq!((direct.alpha_star, direct.beta_star), (q(3, 4), q(1, 4)));
    }

    #[test]
    fn perfect_pair_is_self_dual() {
        assert_eq!(dual_of(&q(1, 1), &q(0, 1)), (q(1, 1), q(0, 1)));
        assert_eq!(dual_of(&q(1, 1), &q(1, 2)), (q(1, 2), q(0, 1)));
    }

    #[test]
    fn coin_audit_passes() {
        let n = scenarios::coin_structure::<Rational>();
        let a = audit_evidence_bounds(&n, AgentId(1), &parse_formula("dh").unwrap()).unwrap();
        assert!(a.passed(), "{a:?}");
        let yes = &a.clauses[0];
        assert_eq!(yes.name, "yes");
        assert_eq!(yes.conclusion[0].2, q(2, 3));
        assert!(yes.triggered > 0);
    }

    #[test]
    fn vacuous_sides() {
        let n = scenarios::coin_structure::<Rational>();
        let taut = parse_formula("dh | !dh").unwrap();
        let r = reliability(&n, AgentId(1), &taut).unwrap();
        assert!(r.vacuous_negative && !r.vacuous_positive);
        assert_eq!(r.beta_star, q(0, 1));
    }
}
