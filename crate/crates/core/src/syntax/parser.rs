//! Recursive-descent parser for formulas and messages.
//!
//! ```text
//! formula := implies
//! implies := or ("=>" implies | "<=>" or)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | "K" nat unary | "X" nat unary | atom
//! atom    := ident | "has" nat "(" msg ")" | "Pr" "(" formula ")" cmp num
//!          | "EvLo" nat "(" formula ")" cmp num | "EvHi" nat "(" formula ")" cmp num
//!          | "(" formula ")"
//! msg     := msgatom ("." msgatom)*
//! msgatom := ident | "{" msg "}_" ident | "(" msg ")"
//! ```

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::formula::{AgentId, Cmp, EvBound, Formula};
use super::message::Message;
use crate::dolevyao::KeySpace;
use crate::error::{Error, ParseError, Result};
use crate::scalar::{format_rational, parse_rational};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(BigRational),
    LParen,
    RParen,
    LBrace,
    RBraceSub,
    Dot,
    Bang,
    Amp,
    Pipe,
    Implies,
    Iff,
    Cmp(Cmp),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Num(n) => format_rational(n),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::LBrace => "{".into(),
            Tok::RBraceSub => "}_".into(),
            Tok::Dot => ".".into(),
            Tok::Bang => "!".into(),
            Tok::Amp => "&".into(),
            Tok::Pipe => "|".into(),
            Tok::Implies => "=>".into(),
            Tok::Iff => "<=>".into(),
            Tok::Cmp(c) => c.symbol().into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset: usize, expected: &[&str]| ParseError {
        offset,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found: text[offset..].chars().next().map(String::from),
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let rest = &text[i..];
        let (tok, len) = if c.is_ascii_alphabetic() || c == b'_' {
            let len = rest
                .bytes()
                .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_')
                .count();
            (Tok::Ident(rest[..len].to_string()), len)
        } else if c.is_ascii_digit() {
            let mut len = rest.bytes().take_while(u8::is_ascii_digit).count();
            let tail = &rest.as_bytes()[len..];
            if tail.len() >= 2 && (tail[0] == b'/' || tail[0] == b'.') && tail[1].is_ascii_digit() {
                len += 1 + tail[1..].iter().take_while(|b| b.is_ascii_digit()).count();
            }
            let value = parse_rational(&rest[..len]).ok_or_else(|| err(start, &["number"]))?;
            (Tok::Num(value), len)
        } else if rest.starts_with("<=>") {
            (Tok::Iff, 3)
        } else if rest.starts_with("=>") {
            (Tok::Implies, 2)
        } else if rest.starts_with(">=") {
            (Tok::Cmp(Cmp::Ge), 2)
        } else if rest.starts_with("<=") {
            (Tok::Cmp(Cmp::Le), 2)
        } else if rest.starts_with("}_") {
            (Tok::RBraceSub, 2)
        } else {
            let tok = match c {
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'{' => Tok::LBrace,
                b'.' => Tok::Dot,
                b'!' => Tok::Bang,
                b'&' => Tok::Amp,
                b'|' => Tok::Pipe,
                b'=' => Tok::Cmp(Cmp::Eq),
                b'<' => Tok::Cmp(Cmp::Lt),
                b'>' => Tok::Cmp(Cmp::Gt),
                b'}' => return Err(err(start + 1, &["_"])),
                _ => return Err(err(start, &["token"])),
            };
            (tok, 1)
        };
        out.push((tok, start));
        i += len;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

/// Operator keywords recognized from identifier shape.
enum Keyword {
    Knows(usize),
    AlgKnows(usize),
    Has(usize),
    Pr,
    Ev(EvBound, usize),
}

fn split_nat<'a>(ident: &'a str, prefix: &str) -> Option<usize> {
    let digits = ident.strip_prefix(prefix)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn keyword(ident: &str) -> Option<Keyword> {
    if ident == "Pr" {
        return Some(Keyword::Pr);
    }
    if let Some(n) = split_nat(ident, "EvLo") {
        return Some(Keyword::Ev(EvBound::Lower, n));
    }
    if let Some(n) = split_nat(ident, "EvHi") {
        return Some(Keyword::Ev(EvBound::Upper, n));
    }
    if let Some(n) = split_nat(ident, "has") {
        return Some(Keyword::Has(n));
    }
    if let Some(n) = split_nat(ident, "K") {
        return Some(Keyword::Knows(n));
    }
    split_nat(ident, "X").map(Keyword::AlgKnows)
}

/// True when `name` can be used as a proposition (it is not an operator).
pub fn is_proposition_name(name: &str) -> bool {
    let mut bytes = name.bytes();
    matches!(bytes.next(), Some(b) if b.is_ascii_alphabetic() || b == b'_')
        && bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
        && keyword(name).is_none()
}

const UNARY_START: &[&str] = &[
    "!", "K<n>", "X<n>", "has<n>", "Pr", "EvLo<n>", "EvHi<n>", "(", "proposition",
];

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail(&self, expected: &[&str]) -> ParseError {
        let found = match self.peek() {
            Tok::End => None,
            t => Some(t.describe()),
        };
        ParseError {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.fail(&[&tok.describe()]))
        }
    }

    fn finish(&self, expected: &[&str]) -> Result<(), ParseError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(self.fail(expected))
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        match self.peek() {
            Tok::Implies => {
                self.bump();
                let rhs = self.formula()?;
                Ok(Formula::implies(lhs, rhs))
            }
            Tok::Iff => {
                self.bump();
                let rhs = self.or()?;
                Ok(Formula::iff(lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) => {
                if matches!(
                    keyword(&name),
                    Some(Keyword::Knows(0) | Keyword::AlgKnows(0) | Keyword::Has(0) | Keyword::Ev(_, 0))
                ) {
                    return Err(self.fail(&["agent number ≥ 1"]).into());
                }
                self.bump();
                match keyword(&name) {
                    None => Ok(Formula::Prop(name)),
                    Some(Keyword::Knows(n)) => Ok(Formula::Knows(AgentId(n), Box::new(self.unary()?))),
                    Some(Keyword::AlgKnows(n)) => {
                        Ok(Formula::AlgKnows(AgentId(n), Box::new(self.unary()?)))
                    }
                    Some(Keyword::Has(n)) => {
                        self.expect(Tok::LParen)?;
                        let m = self.message()?;
                        self.expect(Tok::RParen)?;
                        Ok(Formula::Has(AgentId(n), m))
                    }
                    Some(Keyword::Pr) => {
                        let (formula, cmp, threshold) = self.measured()?;
                        Ok(Formula::Prob {
                            formula: Box::new(formula),
                            cmp,
                            threshold,
                        })
                    }
                    Some(Keyword::Ev(bound, n)) => {
                        let (formula, cmp, threshold) = self.measured()?;
                        Ok(Formula::Ev {
                            bound,
                            agent: AgentId(n),
                            formula: Box::new(formula),
                            cmp,
                            threshold,
                        })
                    }
                }
            }
            _ => Err(self.fail(UNARY_START).into()),
        }
    }

    /// `"(" formula ")" cmp num`
    fn measured(&mut self) -> Result<(Formula, Cmp, BigRational)> {
        self.expect(Tok::LParen)?;
        let f = self.formula()?;
        self.expect(Tok::RParen)?;
        let cmp = match self.bump() {
            Tok::Cmp(c) => c,
            _ => {
                self.pos -= 1;
                return Err(self.fail(&[">=", "<=", "=", "<", ">"]).into());
            }
        };
        let threshold = match self.bump() {
            Tok::Num(n) => n,
            _ => {
                self.pos -= 1;
                return Err(self.fail(&["number"]).into());
            }
        };
        if threshold < BigRational::zero() || threshold > BigRational::one() {
            return Err(Error::ThresholdOutOfRange(format_rational(&threshold)));
        }
        Ok((f, cmp, threshold))
    }

    fn message(&mut self) -> Result<Message, ParseError> {
        let mut lhs = self.message_atom()?;
        while *self.peek() == Tok::Dot {
            self.bump();
            let rhs = self.message_atom()?;
            lhs = Message::concat(lhs, rhs);
        }
        Ok(lhs)
    }

    fn message_atom(&mut self) -> Result<Message, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Message::Plain(name))
            }
            Tok::LBrace => {
                self.bump();
                let body = self.message()?;
                self.expect(Tok::RBraceSub)?;
                match self.bump() {
                    Tok::Ident(k) => Ok(Message::encrypt(body, k)),
                    _ => {
                        self.pos -= 1;
                        Err(self.fail(&["key name"]))
                    }
                }
            }
            Tok::LParen => {
                self.bump();
                let m = self.message()?;
                self.expect(Tok::RParen)?;
                Ok(m)
            }
            _ => Err(self.fail(&["identifier", "{", "("])),
        }
    }
}

/// Parses a formula, desugaring `|`, `=>` and `<=>`.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    p.finish(&["&", "|", "=>", "<=>", "end of input"])?;
    Ok(f)
}

/// Parses a message. With a key space, atoms naming keys become keys, every
/// encryption key must be declared, and the result is normalized.
pub fn parse_message(text: &str, keys: Option<&KeySpace>) -> Result<Message> {
    let mut p = Parser::new(text)?;
    let m = p.message()?;
    p.finish(&[".", "end of input"])?;
    match keys {
        Some(keys) => m.resolve(keys),
        None => Ok(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn knows_conjunction() {
        let f = parse_formula("K1 (p & !q)").unwrap();
        assert_eq!(
            f,
            Formula::knows(1, Formula::and(Formula::prop("p"), Formula::not(Formula::prop("q"))))
        );
    }

    #[test]
    fn probability_of_algorithmic_knowledge() {
        let f = parse_formula("Pr(X1 dh) >= 1/2").unwrap();
        assert_eq!(f, Formula::prob(Formula::alg_knows(1, Formula::prop("dh")), Cmp::Ge, q(1, 2)));
    }

    #[test]
    fn lower_evidence() {
        let f = parse_formula("EvLo1(prime) >= 2/3").unwrap();
        assert_eq!(f, Formula::ev(EvBound::Lower, 1, Formula::prop("prime"), Cmp::Ge, q(2, 3)));
    }

    #[test]
    fn decimals_are_exact() {
        let f = parse_formula("Pr(p) < 0.75").unwrap();
        assert_eq!(f, Formula::prob(Formula::prop("p"), Cmp::Lt, q(3, 4)));
    }

    #[test]
    fn sugar_is_desugared() {
        let p = Formula::prop("p");
        let r = Formula::prop("r");
        assert_eq!(parse_formula("p | r").unwrap(), Formula::or(p.clone(), r.clone()));
        assert_eq!(parse_formula("p => r").unwrap(), Formula::implies(p.clone(), r.clone()));
        assert_eq!(parse_formula("p <=> r").unwrap(), Formula::iff(p.clone(), r.clone()));
        // => is right-associative
        assert_eq!(
            parse_formula("p => r => p").unwrap(),
            Formula::implies(p.clone(), Formula::implies(r.clone(), p.clone()))
        );
        // & binds tighter than |
        assert_eq!(
            parse_formula("p | r & p").unwrap(),
            Formula::or(p.clone(), Formula::and(r, p))
        );
    }

    #[test]
    fn evidence_implication_parses() {
        let f = parse_formula("EvLo1(dh) = 1 => dh").unwrap();
        let ev = Formula::ev(EvBound::Lower, 1, Formula::prop("dh"), Cmp::Eq, q(1, 1));
        assert_eq!(f, Formula::implies(ev, Formula::prop("dh")));
    }

    #[test]
    fn threshold_out_of_range() {
        assert!(matches!(
            parse_formula("Pr(p) >= 3/2"),
            Err(Error::ThresholdOutOfRange(t)) if t == "3/2"
        ));
    }

    #[test]
    fn syntax_error_reports_offset_and_expected() {
        match parse_formula("p & ") {
            Err(Error::Parse(e)) => {
                assert_eq!(e.offset, 4);
                assert!(e.expected.contains(&"!".to_string()));
                assert_eq!(e.found, None);
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse_formula("p q") {
            Err(Error::Parse(e)) => {
                assert_eq!(e.offset, 2);
                assert_eq!(e.found.as_deref(), Some("q"));
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse_formula("Pr(p) 1/2") {
            Err(Error::Parse(e)) => assert!(e.expected.contains(&">=".to_string())),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_formula("has1 m").is_err());
        assert!(parse_formula("p } q").is_err());
    }

    #[test]
    fn messages() {
        assert_eq!(
            parse_message("{m}_k", None).unwrap(),
            Message::encrypt(Message::plain("m"), "k")
        );
        assert_eq!(
            parse_message("a.b", None).unwrap(),
            Message::concat(Message::plain("a"), Message::plain("b"))
        );
        assert_eq!(
            parse_message("a.b.c", None).unwrap(),
            Message::concat(
                Message::concat(Message::plain("a"), Message::plain("b")),
                Message::plain("c")
            )
        );
    }

    #[test]
    fn message_normalizes_with_keys() {
        let keys = KeySpace::new([("k", Some("kinv")), ("kinv", None)]).unwrap();
        assert_eq!(parse_message("{{m}_k}_kinv", Some(&keys)).unwrap(), Message::plain("m"));
        assert_eq!(parse_message("k.m", Some(&keys)).unwrap(), Message::concat(Message::key("k"), Message::plain("m")));
        assert!(matches!(parse_message("{m}_j", Some(&keys)), Err(Error::UnknownKey(k)) if k == "j"));
    }

    #[test]
    fn has_atom() {
        let f = parse_formula("has2({a.b}_k)").unwrap();
        assert_eq!(
            f,
            Formula::has(2, Message::encrypt(Message::concat(Message::plain("a"), Message::plain("b")), "k"))
        );
    }

    #[test]
    fn reserved_names() {
        assert!(is_proposition_name("wall10"));
        assert!(is_proposition_name("K"));
        assert!(!is_proposition_name("K2"));
        assert!(!is_proposition_name("Pr"));
        assert!(!is_proposition_name("has1"));
        assert!(!is_proposition_name("1p"));
    }
}
