use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dolevyao::KeySpace;
use crate::error::{Error, Result};

/// A term of the free message algebra over plaintexts and keys.
///
/// Terms produced by [`Message::resolve`] are in normal form: no
/// `{{m}_k}_k⁻¹` redex survives, so structural equality coincides with
/// equality in the quotient algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Message {
    Plain(String),
    Key(String),
    Concat(Box<Message>, Box<Message>),
    Encrypt(Box<Message>, String),
}

impl Message {
    pub fn plain(name: impl Into<String>) -> Self {
        Message::Plain(name.into())
    }

    pub fn key(name: impl Into<String>) -> Self {
        Message::Key(name.into())
    }

    pub fn concat(a: Message, b: Message) -> Self {
        Message::Concat(Box::new(a), Box::new(b))
    }

    pub fn encrypt(m: Message, key: impl Into<String>) -> Self {
        Message::Encrypt(Box::new(m), key.into())
    }

    /// Name of the atom, whether plaintext or key.
    pub fn atom_name(&self) -> Option<&str> {
        match self {
            Message::Plain(n) | Message::Key(n) => Some(n),
            _ => None,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Message::Plain(_) | Message::Key(_) => 1,
            Message::Concat(a, b) => 1 + a.size() + b.size(),
            Message::Encrypt(m, _) => 1 + m.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Message::Plain(_) | Message::Key(_) => 0,
            Message::Concat(a, b) => 1 + a.depth().max(b.depth()),
            Message::Encrypt(m, _) => 1 + m.depth(),
        }
    }

    /// Rewrites `{{m}_k}_{k⁻¹}` to `m` bottom-up. Each rewrite removes two
    /// constructors, so this terminates, and the result is the unique normal
    /// form.
    pub fn normalize(&self, keys: &KeySpace) -> Message {
        match self {
            Message::Plain(_) | Message::Key(_) => self.clone(),
            Message::Concat(a, b) => Message::concat(a.normalize(keys), b.normalize(keys)),
            Message::Encrypt(m, k) => {
                let inner = m.normalize(keys);
                if let Message::Encrypt(body, k0) = &inner {
                    if keys.inverse(k0) == Some(k.as_str()) {
                        return (**body).clone();
                    }
                }
                Message::encrypt(inner, k.clone())
            }
        }
    }

    /// Interprets atoms that name keys of `keys` as keys, checks that every
    /// encryption key is declared, and normalizes.
    pub fn resolve(&self, keys: &KeySpace) -> Result<Message> {
        fn go(m: &Message, keys: &KeySpace) -> Result<Message> {
            Ok(match m {
                Message::Plain(n) if keys.contains(n) => Message::Key(n.clone()),
                Message::Plain(_) => m.clone(),
                Message::Key(n) => {
                    if !keys.contains(n) {
                        return Err(Error::UnknownKey(n.clone()));
                    }
                    m.clone()
                }
                Message::Concat(a, b) => Message::concat(go(a, keys)?, go(b, keys)?),
                Message::Encrypt(body, k) => {
                    if !keys.contains(k) {
                        return Err(Error::UnknownKey(k.clone()));
                    }
                    Message::encrypt(go(body, keys)?, k.clone())
                }
            })
        }
        Ok(go(self, keys)?.normalize(keys))
    }

    /// Names of keys used to encrypt somewhere inside the term.
    pub fn encryption_keys(&self, out: &mut Vec<String>) {
        match self {
            Message::Plain(_) | Message::Key(_) => {}
            Message::Concat(a, b) => {
                a.encryption_keys(out);
                b.encryption_keys(out);
            }
            Message::Encrypt(m, k) => {
                if !out.contains(k) {
                    out.push(k.clone());
                }
                m.encryption_keys(out);
            }
        }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Message::Plain(n) | Message::Key(n) => f.write_str(n),
            Message::Concat(a, b) => {
                write!(f, "{a}.")?;
                if matches!(**b, Message::Concat(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Message::Encrypt(m, k) => write!(f, "{{{m}}}_{k}"),
        }
    }
}
