use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::message::Message;
use crate::scalar::{format_rational, Scalar};

/// Agent number as written in formulas (`K1`, `X2`, ...). Agents are
/// numbered from 1 in declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId(pub usize);

impl AgentId {
    /// Zero-based position in the structure's agent list.
    pub fn index(self) -> Option<usize> {
        self.0.checked_sub(1)
    }

    pub fn from_index(index: usize) -> Self {
        AgentId(index + 1)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cmp {
    Ge,
    Le,
    Eq,
    Lt,
    Gt,
}

impl Cmp {
    pub fn eval<T: PartialOrd>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            Cmp::Ge => lhs >= rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Lt => lhs < rhs,
            Cmp::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Ge => ">=",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Lt => "<",
            Cmp::Gt => ">",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvBound {
    Lower,
    Upper,
}

/// Formula of the logic. Disjunction, implication and equivalence are
/// abbreviations and never appear in the tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Prop(String),
    Has(AgentId, Message),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Knows(AgentId, Box<Formula>),
    AlgKnows(AgentId, Box<Formula>),
    Prob {
        formula: Box<Formula>,
        cmp: Cmp,
        threshold: BigRational,
    },
    Ev {
        bound: EvBound,
        agent: AgentId,
        formula: Box<Formula>,
        cmp: Cmp,
        threshold: BigRational,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub x_free: bool,
    pub pr_free: bool,
    pub objective: bool,
}

impl Formula {
    pub fn prop(name: impl Into<String>) -> Self {
        Formula::Prop(name.into())
    }

    pub fn has(agent: usize, msg: Message) -> Self {
        Formula::Has(AgentId(agent), msg)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    /// `¬(¬a ∧ ¬b)`
    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    /// `¬a ∨ b`
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(Formula::not(a), b)
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    pub fn knows(agent: usize, f: Formula) -> Self {
        Formula::Knows(AgentId(agent), Box::new(f))
    }

    pub fn alg_knows(agent: usize, f: Formula) -> Self {
        Formula::AlgKnows(AgentId(agent), Box::new(f))
    }

    pub fn prob(f: Formula, cmp: Cmp, threshold: BigRational) -> Self {
        Formula::Prob {
            formula: Box::new(f),
            cmp,
            threshold,
        }
    }

    pub fn ev(bound: EvBound, agent: usize, f: Formula, cmp: Cmp, threshold: BigRational) -> Self {
        Formula::Ev {
            bound,
            agent: AgentId(agent),
            formula: Box::new(f),
            cmp,
            threshold,
        }
    }

    /// Exact formula for a scalar threshold; `None` when the scalar has no
    /// exact rational value.
    pub fn ev_scalar<T: Scalar>(bound: EvBound, agent: usize, f: Formula, cmp: Cmp, t: &T) -> Option<Self> {
        Some(Formula::ev(bound, agent, f, cmp, t.to_rational()?))
    }

    /// Ev operators consult the knowledge algorithm and a probability
    /// distribution, so they count against both flags.
    pub fn classify(&self) -> Classification {
        let (x_free, pr_free) = self.flags();
        Classification {
            x_free,
            pr_free,
            objective: x_free && pr_free,
        }
    }

    pub fn is_objective(&self) -> bool {
        self.classify().objective
    }

    fn flags(&self) -> (bool, bool) {
        match self {
            Formula::Prop(_) | Formula::Has(..) => (true, true),
            Formula::Not(f) | Formula::Knows(_, f) => f.flags(),
            Formula::And(a, b) => {
                let (xa, pa) = a.flags();
                let (xb, pb) = b.flags();
                (xa && xb, pa && pb)
            }
            Formula::AlgKnows(_, f) => (false, f.flags().1),
            Formula::Prob { formula, .. } => (formula.flags().0, false),
            Formula::Ev { .. } => (false, false),
        }
    }

    /// Largest agent number mentioned anywhere in the formula.
    pub fn max_agent(&self) -> usize {
        match self {
            Formula::Prop(_) => 0,
            Formula::Has(a, _) => a.0,
            Formula::Not(f) | Formula::Prob { formula: f, .. } => f.max_agent(),
            Formula::And(a, b) => a.max_agent().max(b.max_agent()),
            Formula::Knows(a, f) | Formula::AlgKnows(a, f) => a.0.max(f.max_agent()),
            Formula::Ev { agent, formula, .. } => agent.0.max(formula.max_agent()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Prop(_) | Formula::Has(..) => 0,
            Formula::Not(f)
            | Formula::Knows(_, f)
            | Formula::AlgKnows(_, f)
            | Formula::Prob { formula: f, .. }
            | Formula::Ev { formula: f, .. } => 1 + f.depth(),
            Formula::And(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, level: u8) -> fmt::Result {
        const AND: u8 = 2;
        const UNARY: u8 = 3;
        match self {
            Formula::Prop(name) => f.write_str(name),
            Formula::Has(a, m) => write!(f, "has{a}({m})"),
            Formula::Not(g) => {
                f.write_str("!")?;
                g.write_at(f, UNARY)
            }
            Formula::Knows(a, g) => {
                write!(f, "K{a} ")?;
                g.write_at(f, UNARY)
            }
            Formula::AlgKnows(a, g) => {
                write!(f, "X{a} ")?;
                g.write_at(f, UNARY)
            }
            Formula::And(a, b) => {
                if level > AND {
                    f.write_str("(")?;
                }
                a.write_at(f, AND)?;
                f.write_str(" & ")?;
                b.write_at(f, UNARY)?;
                if level > AND {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Formula::Prob {
                formula,
                cmp,
                threshold,
            } => write!(f, "Pr({formula}) {} {}", cmp.symbol(), format_rational(threshold)),
            Formula::Ev {
                bound,
                agent,
                formula,
                cmp,
                threshold,
            } => {
                let op = match bound {
                    EvBound::Lower => "EvLo",
                    EvBound::Upper => "EvHi",
                };
                write!(
                    f,
                    "{op}{agent}({formula}) {} {}",
                    cmp.symbol(),
                    format_rational(threshold)
                )
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}
