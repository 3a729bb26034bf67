use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};

use algknow::dolevyao::{a_dy, a_dy_rg, all_guess_tokens, decode_guess_token, guessing_bound, AdversaryLocal, KeySpace};
use algknow::model::Answer;
use algknow::reliability::{audit_evidence_bounds, audit_evidence_bounds_for, reliability_with, AuditReport, ReliabilityReport};
use algknow::scalar::{format_rational, parse_rational};
use algknow::scenarios;
use algknow::semantics::{depends_on_point, Evaluator, Validity};
use algknow::syntax::{parse_formula, parse_message, AgentId, EvBound, Formula};
use algknow::{Rational, Scalar, Structure};

use crate::report::*;

const MAX_GUESS_TUPLES: usize = 2_000_000;

fn load(path: &Path) -> Result<Structure> {
    Structure::load(path).with_context(|| format!("loading {}", path.display()))
}

fn formula(text: &str) -> Result<Formula> {
    parse_formula(text).with_context(|| format!("parsing formula `{text}`"))
}

fn r(x: &Rational) -> String {
    format_rational(x)
}

fn point_truth(n: &Structure, state: &str, point: usize, holds: bool) -> PointTruth {
    PointTruth { state: state.to_string(), point: n.derandomizers().label(point), holds }
}

fn validity_row(n: &Structure, shown: &str, v: Validity) -> ValidityRow {
    match v {
        Validity::Valid => ValidityRow { formula: shown.to_string(), valid: true, counterexample: None },
        Validity::Counterexample { state, point, .. } => ValidityRow {
            formula: shown.to_string(),
            valid: false,
            counterexample: Some(point_truth(n, &state, point, false)),
        },
    }
}

pub fn check(model: &Path, text: &str, state: Option<&str>, point: Option<&str>) -> Result<Report> {
    let n = load(model)?;
    let f = formula(text)?;
    let e = Evaluator::new(&n);
    e.check(&f)?;
    let Some(id) = state else {
        let row = validity_row(&n, text.trim(), e.valid_in(&f)?);
        return Ok(Report::Check(CheckReport {
            query: text.trim().to_string(),
            scope: "validity".into(),
            holds: row.valid,
            points: Vec::new(),
            probability: None,
            counterexample: row.counterexample,
        }));
    };
    let s = n.state_index(id)?;
    let d = n.derandomizers();
    let (scope, points): (&str, Vec<usize>) = match point {
        Some(p) => ("point", vec![d.find(p)?]),
        None if depends_on_point(&f) => ("state", (0..d.len()).collect()),
        None => ("state", vec![0]),
    };
    let mut rows = Vec::new();
    for v in points {
        let holds = e.holds(s, v, &f)?;
        let mut row = point_truth(&n, id, v, holds);
        if scope == "state" && !depends_on_point(&f) {
            row.point = "*".into();
        }
        rows.push(row);
    }
    Ok(Report::Check(CheckReport {
        query: text.trim().to_string(),
        scope: scope.into(),
        holds: rows.iter().all(|p| p.holds),
        points: rows,
        probability: (scope == "state").then(|| e.probability(s, &f).map(|p| r(&p))).transpose()?,
        counterexample: None,
    }))
}

pub fn evidence(model: &Path, agent: &str, text: &str) -> Result<Report> {
    let n = load(model)?;
    let f = formula(text)?;
    let a = n.resolve_agent(agent)?;
    let e = Evaluator::new(&n);
    let mut labels = Vec::new();
    for label in n.labels(a)? {
        let space = e.evidence_space(a, &f, label)?;
        let (mut pos, mut negs) = (Vec::new(), Vec::new());
        for &s in n.states_with_label(a, label)? {
            let mu = e.answer_distribution(a, &f, s)?;
            let m = Measure { state: n.state(s).id.clone(), yes: r(&mu.yes), no: r(&mu.no), unknown: r(&mu.unknown) };
            if e.holds(s, 0, &f)? {
                pos.push(m);
            } else {
                negs.push(m);
            }
        }
        let observations = Answer::ALL
            .iter()
            .map(|&ob| Observation {
                observation: ob.symbol().to_string(),
                possible: space.possible(ob),
                weights: [(0, text.trim().to_string()), (1, negated(text))]
                    .iter()
                    .map(|(h, name)| Weights {
                        hypothesis: name.clone(),
                        set: space.weight_set(ob, *h).iter().map(r).collect(),
                        lower: r(&space.lower_weight(ob, *h)),
                        upper: r(&space.upper_weight(ob, *h)),
                    })
                    .collect(),
            })
            .collect();
        labels.push(LabelEvidence {
            label: label.to_string(),
            measures: vec![(text.trim().to_string(), pos), (negated(text), negs)],
            observations,
        });
    }
    Ok(Report::Evidence(EvidenceReport { query: text.trim().to_string(), agent: n.agent_name(a)?.to_string(), labels }))
}

fn rational_arg(text: &str) -> Result<Rational> {
    parse_rational(text).ok_or_else(|| anyhow!("`{text}` is not a rational number"))
}

pub fn audit(model: &Path, agent: &str, text: &str, pair: Option<(&str, &str)>) -> Result<Report> {
    let n = load(model)?;
    let f = formula(text)?;
    let a = n.resolve_agent(agent)?;
    let e = Evaluator::new(&n);
    let rel = reliability_with(&e, a, &f)?;
    let pair = pair.map(|(x, y)| Ok::<_, anyhow::Error>((rational_arg(x)?, rational_arg(y)?))).transpose()?;
    let summary = if rel.complete {
        let report = match pair {
            Some((x, y)) => audit_evidence_bounds_for(&n, a, &f, x, y)?,
            None => audit_evidence_bounds(&n, a, &f)?,
        };
        complete_summary(&n, a, text, report)?
    } else {
        incomplete_summary(&n, &e, a, &f, text, rel, pair)?
    };
    Ok(Report::Audit(summary))
}

fn negation_name(rel: &ReliabilityReport<Rational>) -> String {
    serde_json::to_value(rel.respects_negation)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn complete_summary(n: &Structure, a: AgentId, text: &str, report: AuditReport<Rational>) -> Result<AuditSummary> {
    let i = a.0;
    let clauses: Vec<ClauseRow> = report
        .clauses
        .iter()
        .map(|c| ClauseRow {
            name: c.name.to_string(),
            guard: c.guard.to_string(),
            conclusion: c.conclusion.iter().map(|(q, cmp, b)| format!("{q} {} {}", cmp.symbol(), r(b))).collect(),
            status: if c.skipped.is_some() {
                "skipped".into()
            } else if c.passed() {
                "pass".into()
            } else {
                "fail".into()
            },
            reason: c.skipped.clone(),
            triggered: c.triggered,
            witness: c.violation.as_ref().map(|v| {
                let found: Vec<String> = v
                    .found
                    .iter()
                    .map(|(q, x, cmp, b)| format!("{q} = {}, needs {} {}", r(x), cmp.symbol(), r(b)))
                    .collect();
                format!("state {}, point {}: {}", v.state, v.point_label, found.join("; "))
            }),
        })
        .collect();
    Ok(AuditSummary {
        query: text.trim().to_string(),
        agent: n.agent_name(a)?.to_string(),
        tight: (r(&report.reliability.alpha_star), r(&report.reliability.beta_star)),
        audited: (r(&report.alpha), r(&report.beta)),
        complete: true,
        negation: negation_name(&report.reliability),
        dual: report.dual.as_ref().map(|d| DualRow {
            predicted: (r(&d.predicted.0), r(&d.predicted.1)),
            direct: (r(&d.direct.0), r(&d.direct.1)),
            agrees: d.agrees,
        }),
        negation_lemma: report.negation_lemma.clone().map(|v| validity_row(n, &lemma_text(i, text), v)),
        full_evidence: validity_row(n, &full_evidence_text(i, text), report.ev_one_implies.clone()),
        passed: report.passed(),
        clauses,
    })
}

fn negated(text: &str) -> String {
    format!("!({})", text.trim())
}

fn lemma_text(i: usize, text: &str) -> String {
    format!("X{i} ({}) <=> !X{i} {}", text.trim(), negated(text))
}

fn full_evidence_text(i: usize, text: &str) -> String {
    format!("EvLo{i}({}) = 1 => {}", text.trim(), text.trim())
}

fn full_evidence_formula(i: usize, f: &Formula) -> Formula {
    Formula::implies(Formula::ev(EvBound::Lower, i, f.clone(), algknow::syntax::Cmp::Eq, Rational::from_ratio(1, 1)), f.clone())
}

fn incomplete_summary(
    n: &Structure,
    e: &Evaluator<'_, Rational>,
    a: AgentId,
    f: &Formula,
    text: &str,
    rel: ReliabilityReport<Rational>,
    pair: Option<(Rational, Rational)>,
) -> Result<AuditSummary> {
    let i = a.0;
    let neg = Formula::not(f.clone());
    let (alpha, beta) = pair.unwrap_or((rel.alpha_star.clone(), rel.beta_star.clone()));
    if !rel.is_reliable(&alpha, &beta) {
        bail!("algorithm is not ({}, {})-reliable for {f}", r(&alpha), r(&beta));
    }
    let full = full_evidence_formula(i, f);
    let full_evidence = validity_row(n, &full_evidence_text(i, text), e.valid_in(&full)?);
    let (dual, negation_lemma) = if rel.respects_negation.respects() {
        let direct = reliability_with(e, a, &neg)?;
        let predicted = algknow::reliability::dual_of(&rel.alpha_star, &rel.beta_star);
        let lemma = Formula::iff(Formula::alg_knows(i, f.clone()), Formula::not(Formula::alg_knows(i, neg.clone())));
        let row = validity_row(n, &lemma_text(i, text), e.valid_in(&lemma)?);
        let agrees = predicted.0 == direct.alpha_star && predicted.1 == direct.beta_star;
        (
            Some(DualRow {
                predicted: (r(&predicted.0), r(&predicted.1)),
                direct: (r(&direct.alpha_star), r(&direct.beta_star)),
                agrees,
            }),
            Some(row),
        )
    } else {
        (None, None)
    };
    let clauses = ["yes", "yes-exact", "no", "no-exact", "both-yes", "both-yes-exact", "both-no", "both-no-exact"]
        .iter()
        .map(|name| ClauseRow {
            name: name.to_string(),
            guard: String::new(),
            conclusion: Vec::new(),
            status: "skipped".into(),
            reason: Some("not φ-complete".into()),
            triggered: 0,
            witness: None,
        })
        .collect();
    let passed = full_evidence.valid
        && dual.as_ref().map_or(true, |d| d.agrees)
        && negation_lemma.as_ref().map_or(true, |l| l.valid);
    Ok(AuditSummary {
        query: text.trim().to_string(),
        agent: n.agent_name(a)?.to_string(),
        tight: (r(&rel.alpha_star), r(&rel.beta_star)),
        audited: (r(&alpha), r(&beta)),
        complete: false,
        negation: negation_name(&rel),
        dual,
        negation_lemma,
        full_evidence,
        clauses,
        passed,
    })
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct DyArgs {
    /// Message to derive.
    pub message: String,
    /// Take the key space and adversary view from a model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// State of the model whose view is used.
    #[arg(long, requires = "model")]
    pub state: Option<String>,
    /// Adversary agent, by name or number (default 1).
    #[arg(long, requires = "model")]
    pub agent: Option<String>,
    /// Intercepted message (repeatable).
    #[arg(long = "have", conflicts_with = "model")]
    pub have: Vec<String>,
    /// Initially known key (repeatable).
    #[arg(long = "init", conflicts_with = "model")]
    pub init: Vec<String>,
    /// Key space as `k=kinv,j,...`; keys without `=` are their own inverse.
    #[arg(long, conflicts_with = "model")]
    pub keys: Option<String>,
    /// Key space of N self-inverse keys k0 .. k(N-1).
    #[arg(long, conflicts_with_all = ["model", "keys"])]
    pub key_count: Option<usize>,
    /// Number of uniformly guessed keys.
    #[arg(long)]
    pub guess: Option<usize>,
    /// List the successful guess tuples.
    #[arg(long, requires = "guess")]
    pub enumerate: bool,
}

fn key_space(decl: &str) -> Result<KeySpace> {
    let pairs: Vec<(&str, Option<&str>)> = decl
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.split_once('=') {
            Some((k, inv)) => (k.trim(), Some(inv.trim())),
            None => (s, None),
        })
        .collect();
    let mut decls = pairs.clone();
    for (_, inv) in &pairs {
        if let Some(inv) = inv {
            if !decls.iter().any(|(k, _)| k == inv) {
                decls.push((inv, None));
            }
        }
    }
    Ok(KeySpace::new(decls)?)
}

fn sig5(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let digits = (4 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.digits$}")
}

pub fn dy(args: &DyArgs) -> Result<Report> {
    let (keys, local) = match &args.model {
        Some(path) => {
            let n = load(path)?;
            let keys = n.keys().cloned().ok_or_else(|| anyhow!("model declares no key space"))?;
            let a = match &args.agent {
                Some(t) => n.resolve_agent(t)?,
                None => AgentId(1),
            };
            let s = match &args.state {
                Some(id) => n.state_index(id)?,
                None if n.state_count() == 1 => 0,
                None => bail!("model has {} states; choose one with --state", n.state_count()),
            };
            let i = n.agent_index(a)?;
            (keys, n.state(s).adversary_local(i))
        }
        None => {
            let keys = match (&args.keys, args.key_count) {
                (Some(decl), _) => key_space(decl)?,
                (None, Some(count)) => KeySpace::symmetric(count),
                (None, None) => bail!("a key space is required: use --keys, --key-count or --model"),
            };
            let received = args
                .have
                .iter()
                .map(|t| parse_message(t, Some(&keys)).with_context(|| format!("parsing message `{t}`")))
                .collect::<Result<Vec<_>>>()?;
            for k in &args.init {
                if !keys.contains(k) {
                    bail!("initial key `{k}` is not in the key space");
                }
            }
            (keys.clone(), AdversaryLocal::new(args.init.iter().cloned(), received))
        }
    };
    let m = parse_message(&args.message, Some(&keys)).with_context(|| format!("parsing message `{}`", args.message))?;
    let query = Formula::has(1, m.clone());
    let derivable = a_dy(AgentId(1), &query, &local, &keys) == Answer::Yes;
    let guess = args.guess.map(|g| guess_report(g, &query, &local, &keys, derivable, args.enumerate)).transpose()?;
    Ok(Report::Dy(DyReport {
        message: m.to_string(),
        received: local.received.iter().map(ToString::to_string).collect(),
        initkeys: local.initkeys.iter().cloned().collect(),
        derivable,
        guess,
    }))
}

fn guess_report(
    g: usize,
    query: &Formula,
    local: &AdversaryLocal,
    keys: &KeySpace,
    derivable: bool,
    enumerate: bool,
) -> Result<GuessReport> {
    let size = keys.len();
    let tuples = u32::try_from(g)
        .ok()
        .and_then(|e| size.checked_pow(e))
        .filter(|&t| t <= MAX_GUESS_TUPLES)
        .ok_or_else(|| anyhow!("{size}^{g} guess tuples is too many to enumerate"))?;
    let mut hits = Vec::new();
    for token in all_guess_tokens(g, size) {
        if a_dy_rg(g, AgentId(1), query, local, &token, keys)? == Answer::Yes {
            hits.push(token);
        }
    }
    let mass = Rational::new((hits.len() as i64).into(), (tuples as i64).into());
    let k_used = local.keys_used();
    let mut report = GuessReport {
        guesses: g,
        keyspace: size,
        keys_used: k_used,
        tuples,
        successes: hits.len(),
        mass: r(&mass),
        bound: None,
        refused: None,
        verdict: false,
        note: String::new(),
        successful_tuples: Vec::new(),
    };
    if enumerate {
        report.successful_tuples = hits
            .iter()
            .map(|t| decode_guess_token(t, g, keys).map(|ks| format!("({})", ks.join(","))))
            .collect::<algknow::Result<_>>()?;
    }
    match guessing_bound(g, k_used, size) {
        Err(e) => {
            report.refused = Some(e.to_string());
            report.note = "the bound needs K/|K| < 1/2".into();
        }
        Ok(b) => {
            let shown = sig5(b.bound);
            report.bound = Some(shown.clone());
            if derivable {
                report.verdict = true;
                report.note = "derivable without guessing; the bound only covers messages the adversary cannot already derive".into();
            } else if k_used == 0 {
                report.verdict = hits.is_empty();
                report.note = "no keys used in the intercepted messages, so guessing cannot help".into();
            } else {
                report.verdict = mass.to_f64() < b.bound;
                report.note = format!("{} < {shown}: {}", r(&mass), if report.verdict { "holds" } else { "VIOLATED" });
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScenarioName {
    Coin,
    Sensor,
    Prime,
    Rp,
    Bpp,
    Guess,
}

#[derive(Args, Debug)]
pub struct ScenarioArgs {
    #[arg(value_enum)]
    pub name: ScenarioName,
    /// Write to this file instead of standard output.
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
    /// Number tested for primality.
    #[arg(long, default_value_t = 15)]
    pub n: u64,
    /// Largest robot distance.
    #[arg(long, default_value_t = 13)]
    pub max_distance: u32,
    /// Distance in the sensor query.
    #[arg(long, default_value_t = 10)]
    pub query_distance: u32,
    /// Number of guessed keys.
    #[arg(long, default_value_t = 2)]
    pub guesses: usize,
    /// Size of the key space.
    #[arg(long, default_value_t = 10)]
    pub keyspace: usize,
    /// Keys used in the intercepted messages.
    #[arg(long, default_value_t = 3)]
    pub used: usize,
}

pub fn scenario(args: &ScenarioArgs) -> Result<()> {
    let doc = match args.name {
        ScenarioName::Coin => scenarios::coin_document(),
        ScenarioName::Sensor => scenarios::sensor_document(args.max_distance, args.query_distance)?,
        ScenarioName::Prime => scenarios::primality_document(args.n)?,
        ScenarioName::Rp => scenarios::rp_document(),
        ScenarioName::Bpp => scenarios::bpp_document(),
        ScenarioName::Guess => scenarios::guess_document(args.guesses, args.keyspace, args.used)?,
    };
    let text = doc.to_json();
    match &args.out {
        Some(path) => std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}
