use std::cell::RefCell;
use std::collections::BTreeMap;

use super::{FormulaError, HyperLtlFormula, IndexedAtom, Ltl, Quantifier};

/// Declared trace arity of every atom. With [`AtomDecls::infer`] arities are
/// taken from first use and only checked for consistency.
#[derive(Clone, Debug, Default)]
pub struct AtomDecls {
    arities: BTreeMap<String, usize>,
    open: bool,
}

impl AtomDecls {
    pub fn new<I: IntoIterator<Item = (String, usize)>>(decls: I) -> Self {
        AtomDecls {
            arities: decls.into_iter().collect(),
            open: false,
        }
    }

    pub fn infer() -> Self {
        AtomDecls {
            arities: BTreeMap::new(),
            open: true,
        }
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.arities.get(name).copied()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Dot,
    Comma,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Not,
    And,
    Or,
    Implies,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, FormulaError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'.' => Tok::Dot,
            b',' => Tok::Comma,
            b'[' => Tok::LBrack,
            b']' => Tok::RBrack,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'!' => Tok::Not,
            b'&' => {
                if b.get(i + 1) == Some(&b'&') {
                    i += 1;
                }
                Tok::And
            }
            b'|' => {
                if b.get(i + 1) == Some(&b'|') {
                    i += 1;
                }
                Tok::Or
            }
            b'-' if b.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Implies
            }
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                while i + 1 < b.len() && (b[i + 1].is_ascii_alphanumeric() || b[i + 1] == b'_') {
                    i += 1;
                }
                Tok::Ident(src[start..=i].to_string())
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(FormulaError::Syntax {
                    pos: i,
                    msg: format!("unexpected '{ch}'"),
                });
            }
        };
        i += 1;
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    i: usize,
    end: usize,
    decls: RefCell<AtomDecls>,
    bound: Option<&'a [(Quantifier, String)]>,
}

/// Parses a prenex HyperLTL formula and checks that it is closed and
/// well-scoped against `decls`.
pub fn parse_hyperltl(src: &str, decls: &AtomDecls) -> Result<HyperLtlFormula, FormulaError> {
    let toks = lex(src)?;
    let mut prefix: Vec<(Quantifier, String)> = Vec::new();
    let mut i = 0;
    while let Some((pos, Tok::Ident(kw))) = toks.get(i) {
        let q = match kw.as_str() {
            "forall" => Quantifier::Forall,
            "exists" => Quantifier::Exists,
            _ => break,
        };
        let var = match toks.get(i + 1) {
            Some((_, Tok::Ident(v))) if !is_keyword(v) => v.clone(),
            _ => {
                return Err(FormulaError::Syntax {
                    pos: *pos,
                    msg: "expected trace variable".into(),
                })
            }
        };
        match toks.get(i + 2) {
            Some((_, Tok::Dot)) => {}
            _ => {
                return Err(FormulaError::Syntax {
                    pos: *pos,
                    msg: "expected '.' after trace variable".into(),
                })
            }
        }
        if prefix.iter().any(|(_, v)| *v == var) {
            return Err(FormulaError::DuplicateTrace(var));
        }
        prefix.push((q, var));
        i += 3;
    }
    let mut p = Parser {
        toks: toks[i..].to_vec(),
        i: 0,
        end: src.len(),
        decls: RefCell::new(decls.clone()),
        bound: Some(&prefix),
    };
    let body = p.parse_all()?;
    Ok(HyperLtlFormula { prefix, body })
}

/// Parses a quantifier-free body; trace variables are not checked.
pub fn parse_ltl_body(src: &str, decls: &AtomDecls) -> Result<Ltl, FormulaError> {
    let mut p = Parser {
        toks: lex(src)?,
        i: 0,
        end: src.len(),
        decls: RefCell::new(decls.clone()),
        bound: None,
    };
    p.parse_all()
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "X" | "U" | "R" | "G" | "F" | "true" | "false" | "forall" | "exists"
    )
}

impl Parser<'_> {
    fn parse_all(&mut self) -> Result<Ltl, FormulaError> {
        let f = self.implication()?;
        if let Some((pos, t)) = self.toks.get(self.i) {
            return Err(FormulaError::Syntax {
                pos: *pos,
                msg: format!("unexpected {t:?}"),
            });
        }
        Ok(f)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(_, t)| t)
    }

    fn peek_ident(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
            && !matches!(self.toks.get(self.i + 1), Some((_, Tok::LBrack)))
    }

    fn implication(&mut self) -> Result<Ltl, FormulaError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Implies) {
            self.i += 1;
            let rhs = self.implication()?;
            return Ok(Ltl::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Ltl, FormulaError> {
        let mut acc = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.i += 1;
            acc = Ltl::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Ltl, FormulaError> {
        let mut acc = self.binary_temporal()?;
        while self.peek() == Some(&Tok::And) {
            self.i += 1;
            acc = Ltl::and(acc, self.binary_temporal()?);
        }
        Ok(acc)
    }

    fn binary_temporal(&mut self) -> Result<Ltl, FormulaError> {
        let lhs = self.unary()?;
        if self.peek_ident("U") {
            self.i += 1;
            return Ok(Ltl::until(lhs, self.binary_temporal()?));
        }
        if self.peek_ident("R") {
            self.i += 1;
            return Ok(Ltl::release(lhs, self.binary_temporal()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ltl, FormulaError> {
        if self.peek() == Some(&Tok::Not) {
            self.i += 1;
            return Ok(Ltl::not(self.unary()?));
        }
        for (kw, ctor) in [
            ("X", Ltl::next as fn(Ltl) -> Ltl),
            ("G", Ltl::globally),
            ("F", Ltl::eventually),
        ] {
            if self.peek_ident(kw) {
                self.i += 1;
                return Ok(ctor(self.unary()?));
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Ltl, FormulaError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.i += 1;
                let inner = self.implication()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(FormulaError::Syntax {
                        pos: self.pos(),
                        msg: "expected ')'".into(),
                    });
                }
                self.i += 1;
                Ok(inner)
            }
            Some(Tok::Ident(s)) if (s == "forall" || s == "exists") => {
                Err(FormulaError::QuantifierInBody(pos))
            }
            Some(Tok::Ident(s)) if s == "true" => {
                self.i += 1;
                Ok(Ltl::True)
            }
            Some(Tok::Ident(s)) if s == "false" => {
                self.i += 1;
                Ok(Ltl::False)
            }
            Some(Tok::Ident(name)) => {
                self.i += 1;
                self.atom_args(name, pos)
            }
            Some(t) => Err(FormulaError::Syntax {
                pos,
                msg: format!("unexpected {t:?}"),
            }),
            None => Err(FormulaError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
        }
    }

    fn atom_args(&mut self, name: String, pos: usize) -> Result<Ltl, FormulaError> {
        if self.peek() != Some(&Tok::LBrack) {
            return Err(FormulaError::Syntax {
                pos,
                msg: format!("atom '{name}' needs trace arguments like {name}[p]"),
            });
        }
        self.i += 1;
        let mut traces = Vec::new();
        loop {
            match self.peek().cloned() {
                Some(Tok::Ident(t)) => {
                    self.i += 1;
                    traces.push(t);
                }
                _ => {
                    return Err(FormulaError::Syntax {
                        pos: self.pos(),
                        msg: "expected trace variable".into(),
                    })
                }
            }
            match self.peek() {
                Some(Tok::Comma) => self.i += 1,
                Some(Tok::RBrack) => {
                    self.i += 1;
                    break;
                }
                _ => {
                    return Err(FormulaError::Syntax {
                        pos: self.pos(),
                        msg: "expected ',' or ']'".into(),
                    })
                }
            }
        }
        if let Some(bound) = self.bound {
            if let Some(t) = traces.iter().find(|t| !bound.iter().any(|(_, v)| v == *t)) {
                return Err(FormulaError::UnboundTrace(t.clone()));
            }
        }
        let mut decls = self.decls.borrow_mut();
        let expected = match decls.arity(&name) {
            Some(a) => a,
            None if decls.open => {
                decls.arities.insert(name.clone(), traces.len());
                traces.len()
            }
            None => return Err(FormulaError::UnknownAtom(name)),
        };
        if expected != traces.len() {
            return Err(FormulaError::Arity {
                name,
                expected,
                found: traces.len(),
            });
        }
        let mut sorted = traces.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != traces.len() {
            return Err(FormulaError::RepeatedTraceArgument(name));
        }
        Ok(Ltl::Atom(IndexedAtom { name, traces }))
    }
}
