//! Reading and writing automata in the Hanoi Omega-Automata text format.
//!
//! Only explicit labels and state-based acceptance are supported, with
//! Büchi (`Inf(0)`) or Rabin-shaped (`(Fin(b) & Inf(g)) | ...`) conditions.

use std::collections::{BTreeMap, BTreeSet};

use super::{
    AutomatonError, BuchiAutomaton, Edge, Graph, Guard, RabinAutomaton, RabinPair, StateId,
};
use crate::formula::IndexedAtom;

#[derive(Clone, Debug, PartialEq)]
pub enum HoaAutomaton {
    Buchi(BuchiAutomaton),
    Rabin(RabinAutomaton),
}

impl HoaAutomaton {
    pub fn graph(&self) -> &Graph {
        match self {
            HoaAutomaton::Buchi(b) => &b.graph,
            HoaAutomaton::Rabin(r) => &r.graph,
        }
    }

    pub fn atoms(&self) -> BTreeSet<IndexedAtom> {
        self.graph()
            .edges()
            .iter()
            .flat_map(|e| e.guard.atoms())
            .collect()
    }

    /// Fails on the first atom whose name is not accepted by `known`.
    pub fn check_atoms(&self, known: impl Fn(&IndexedAtom) -> bool) -> Result<(), AutomatonError> {
        match self.atoms().into_iter().find(|a| !known(a)) {
            Some(a) => Err(AutomatonError::UnknownAp(a.to_string())),
            None => Ok(()),
        }
    }
}

/// `a3[p1,p2]` becomes an indexed atom; any other name is kept opaque.
pub fn parse_ap_name(name: &str) -> IndexedAtom {
    let name = name.trim();
    if let Some(open) = name.find('[') {
        if let Some(inner) = name[open + 1..].strip_suffix(']') {
            let base = name[..open].trim();
            let traces: Vec<String> = inner.split(',').map(|s| s.trim().to_string()).collect();
            if !base.is_empty() && traces.iter().all(|t| !t.is_empty()) {
                return IndexedAtom {
                    name: base.to_string(),
                    traces,
                };
            }
        }
    }
    IndexedAtom {
        name: name.to_string(),
        traces: Vec::new(),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(usize),
    Str(String),
    Ident(String),
    Sym(char),
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Tok>, AutomatonError> {
    let err = |msg: String| AutomatonError::HoaSyntax { line: lineno, msg };
    let mut out = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'-') {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(err("unterminated string".into())),
                    Some('"') => break,
                    Some('\\') => {
                        s.push(
                            *chars
                                .get(i + 1)
                                .ok_or_else(|| err("dangling escape".into()))?,
                        );
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push(Tok::Str(s));
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Tok::Int(
                s.parse().map_err(|_| err(format!("bad integer '{s}'")))?,
            ));
        } else if c.is_alphabetic() || c == '_' || c == '@' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '-' | '@' | '.'))
            {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "[]{}()!&|:".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(err(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct LabelParser<'a> {
    toks: &'a [Tok],
    pos: usize,
    aps: &'a [IndexedAtom],
    line: usize,
}

impl LabelParser<'_> {
    fn err(&self, msg: impl Into<String>) -> AutomatonError {
        AutomatonError::HoaSyntax {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn or(&mut self) -> Result<Guard, AutomatonError> {
        let mut parts = vec![self.and()?];
        while self.peek() == Some(&Tok::Sym('|')) {
            self.pos += 1;
            parts.push(self.and()?);
        }
        Ok(Guard::or(parts))
    }

    fn and(&mut self) -> Result<Guard, AutomatonError> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::Sym('&')) {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        Ok(Guard::and(parts))
    }

    fn unary(&mut self) -> Result<Guard, AutomatonError> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| self.err("label ends early"))?;
        self.pos += 1;
        match tok {
            Tok::Sym('!') => Ok(self.unary()?.negate()),
            Tok::Sym('(') => {
                let g = self.or()?;
                if self.peek() != Some(&Tok::Sym(')')) {
                    return Err(self.err("expected ')' in label"));
                }
                self.pos += 1;
                Ok(g)
            }
            Tok::Ident(s) if s == "t" => Ok(Guard::True),
            Tok::Ident(s) if s == "f" => Ok(Guard::False),
            Tok::Ident(s) if s.starts_with('@') => {
                Err(AutomatonError::Unsupported(format!("alias {s}")))
            }
            Tok::Int(k) => {
                let ap = self
                    .aps
                    .get(k)
                    .ok_or_else(|| self.err(format!("AP index {k} out of range")))?;
                Ok(Guard::lit(ap.clone(), true))
            }
            t => Err(self.err(format!("unexpected token {t:?} in label"))),
        }
    }
}

/// Number of acceptance sets and the `(Fin set, Inf set)` disjuncts.
type Acceptance = (usize, Vec<(Option<usize>, usize)>);

/// One Rabin-shaped disjunct: `Fin(b) & Inf(g)` or a lone `Inf(g)`.
fn parse_acceptance(
    toks: &[Tok],
    line: usize,
) -> Result<Vec<(Option<usize>, usize)>, AutomatonError> {
    let err = |msg: &str| AutomatonError::HoaSyntax {
        line,
        msg: msg.into(),
    };
    let unsupported = || {
        let text: Vec<String> = toks
            .iter()
            .map(|t| match t {
                Tok::Int(k) => k.to_string(),
                Tok::Str(s) | Tok::Ident(s) => s.clone(),
                Tok::Sym(c) => c.to_string(),
            })
            .collect();
        AutomatonError::Unsupported(format!("acceptance condition {}", text.join(" ")))
    };
    // strip redundant outer parentheses per disjunct
    let mut disjuncts: Vec<Vec<&Tok>> = vec![Vec::new()];
    let mut depth = 0i32;
    for t in toks {
        match t {
            Tok::Sym('(') => depth += 1,
            Tok::Sym(')') => depth -= 1,
            _ => {}
        }
        if depth == 0 && *t == Tok::Sym('|') {
            disjuncts.push(Vec::new());
        } else {
            disjuncts.last_mut().expect("nonempty").push(t);
        }
    }
    if depth != 0 {
        return Err(err("unbalanced parentheses in acceptance"));
    }
    let mut out = Vec::new();
    for d in disjuncts {
        let mut fin = None;
        let mut inf = None;
        let mut i = 0;
        while i < d.len() {
            match d[i] {
                Tok::Sym('(') | Tok::Sym(')') | Tok::Sym('&') => i += 1,
                Tok::Ident(kind) if kind == "Fin" || kind == "Inf" => {
                    let set = match (d.get(i + 1), d.get(i + 2), d.get(i + 3)) {
                        (Some(Tok::Sym('(')), Some(Tok::Int(k)), Some(Tok::Sym(')'))) => *k,
                        _ => return Err(unsupported()),
                    };
                    let slot = if kind == "Fin" { &mut fin } else { &mut inf };
                    if slot.replace(set).is_some() {
                        return Err(unsupported());
                    }
                    i += 4;
                }
                _ => return Err(unsupported()),
            }
        }
        match inf {
            Some(g) => out.push((fin, g)),
            None => return Err(unsupported()),
        }
    }
    Ok(out)
}

/// Parses a HOA document into a Büchi or Rabin automaton.
pub fn hoa_import(src: &str) -> Result<HoaAutomaton, AutomatonError> {
    let mut num_states: Option<usize> = None;
    let mut start: Option<usize> = None;
    let mut aps: Vec<IndexedAtom> = Vec::new();
    let mut acceptance: Option<Acceptance> = None;
    let mut saw_header = false;
    let mut in_body = false;
    let mut ended = false;
    let mut names: BTreeMap<StateId, String> = BTreeMap::new();
    let mut marks: BTreeMap<StateId, BTreeSet<usize>> = BTreeMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut current: Option<StateId> = None;

    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let err = |msg: String| AutomatonError::HoaSyntax { line, msg };
        let toks = tokenize(raw, line)?;
        if toks.is_empty() || ended {
            continue;
        }
        if !in_body {
            let key = match &toks[0] {
                Tok::Ident(k) => k.clone(),
                t => return Err(err(format!("expected header name, found {t:?}"))),
            };
            if toks.get(1) != Some(&Tok::Sym(':')) && key != "--BODY--" {
                return Err(err(format!("expected ':' after {key}")));
            }
            let rest = &toks[2.min(toks.len())..];
            match key.as_str() {
                "HOA" => {
                    if rest != [Tok::Ident("v1".into())] {
                        return Err(err("only HOA v1 is supported".into()));
                    }
                    saw_header = true;
                }
                "States" => match rest {
                    [Tok::Int(n)] => num_states = Some(*n),
                    _ => return Err(err("States expects one integer".into())),
                },
                "Start" => match rest {
                    [Tok::Int(s)] if start.is_none() => start = Some(*s),
                    [Tok::Int(_)] => {
                        return Err(AutomatonError::Unsupported(
                            "multiple initial states".into(),
                        ))
                    }
                    _ => {
                        return Err(AutomatonError::Unsupported(
                            "conjunctive initial states".into(),
                        ))
                    }
                },
                "AP" => {
                    let n = match rest.first() {
                        Some(Tok::Int(n)) => *n,
                        _ => return Err(err("AP expects a count".into())),
                    };
                    aps = rest[1..]
                        .iter()
                        .map(|t| match t {
                            Tok::Str(s) => Ok(parse_ap_name(s)),
                            _ => Err(err("AP names must be quoted".into())),
                        })
                        .collect::<Result<_, _>>()?;
                    if aps.len() != n {
                        return Err(err(format!(
                            "AP declares {n} names but lists {}",
                            aps.len()
                        )));
                    }
                }
                "Acceptance" => {
                    let n = match rest.first() {
                        Some(Tok::Int(n)) => *n,
                        _ => return Err(err("Acceptance expects a set count".into())),
                    };
                    acceptance = Some((n, parse_acceptance(&rest[1..], line)?));
                }
                "Alias" => return Err(AutomatonError::Unsupported("aliases".into())),
                "--BODY--" => {
                    if !saw_header {
                        return Err(err("missing 'HOA: v1' header".into()));
                    }
                    in_body = true;
                }
                _ => {}
            }
            continue;
        }
        match &toks[0] {
            Tok::Ident(k) if k == "--END--" => ended = true,
            Tok::Ident(k) if k == "State" => {
                let mut rest = &toks[1..];
                if rest.first() != Some(&Tok::Sym(':')) {
                    return Err(err("expected ':' after State".into()));
                }
                rest = &rest[1..];
                if rest.first() == Some(&Tok::Sym('[')) {
                    return Err(AutomatonError::Unsupported("state labels".into()));
                }
                let id = match rest.first() {
                    Some(Tok::Int(id)) => *id,
                    _ => return Err(err("State expects an id".into())),
                };
                rest = &rest[1..];
                if let Some(Tok::Str(s)) = rest.first() {
                    names.insert(id, s.clone());
                    rest = &rest[1..];
                }
                if rest.first() == Some(&Tok::Sym('{')) {
                    let close = rest
                        .iter()
                        .position(|t| *t == Tok::Sym('}'))
                        .ok_or_else(|| err("unclosed '{'".into()))?;
                    let set = marks.entry(id).or_default();
                    for t in &rest[1..close] {
                        match t {
                            Tok::Int(k) => {
                                set.insert(*k);
                            }
                            _ => return Err(err("acceptance marks must be integers".into())),
                        }
                    }
                    rest = &rest[close + 1..];
                }
                if !rest.is_empty() {
                    return Err(err("trailing tokens after state header".into()));
                }
                current = Some(id);
            }
            Tok::Sym('[') => {
                let src_state = current.ok_or_else(|| err("edge before any State".into()))?;
                let close = toks
                    .iter()
                    .position(|t| *t == Tok::Sym(']'))
                    .ok_or_else(|| err("unclosed '['".into()))?;
                let mut p = LabelParser {
                    toks: &toks[1..close],
                    pos: 0,
                    aps: &aps,
                    line,
                };
                let guard = p.or()?;
                if p.pos != p.toks.len() {
                    return Err(err("trailing tokens in label".into()));
                }
                match &toks[close + 1..] {
                    [Tok::Int(dst)] => edges.push(Edge {
                        src: src_state,
                        guard,
                        dst: *dst,
                    }),
                    [Tok::Int(_), Tok::Sym('{'), ..] => {
                        return Err(AutomatonError::Unsupported(
                            "transition-based acceptance".into(),
                        ))
                    }
                    [Tok::Int(_), Tok::Sym('&'), ..] => {
                        return Err(AutomatonError::Unsupported("universal branching".into()))
                    }
                    _ => return Err(err("expected a single destination state".into())),
                }
            }
            Tok::Int(_) => return Err(AutomatonError::Unsupported("implicit labels".into())),
            t => return Err(err(format!("unexpected token {t:?} in body"))),
        }
    }
    if !in_body {
        return Err(AutomatonError::HoaSyntax {
            line: src.lines().count(),
            msg: "missing --BODY--".into(),
        });
    }
    if !ended {
        return Err(AutomatonError::HoaSyntax {
            line: src.lines().count(),
            msg: "missing --END--".into(),
        });
    }
    let n = num_states
        .or_else(|| {
            let hi = names
                .keys()
                .chain(marks.keys())
                .copied()
                .chain(edges.iter().flat_map(|e| [e.src, e.dst]))
                .max();
            hi.map(|h| h + 1)
        })
        .unwrap_or(0);
    let start = start.ok_or_else(|| AutomatonError::HoaSyntax {
        line: 0,
        msg: "missing Start".into(),
    })?;
    let (num_sets, cond) = acceptance.ok_or_else(|| AutomatonError::HoaSyntax {
        line: 0,
        msg: "missing Acceptance".into(),
    })?;
    if let Some((&q, _)) = marks.iter().find(|(_, s)| s.iter().any(|&k| k >= num_sets)) {
        return Err(AutomatonError::HoaSyntax {
            line: 0,
            msg: format!("state {q} uses an undeclared acceptance set"),
        });
    }
    let graph =
        Graph::new(n, start, edges)?.with_names((0..n).map(|q| names.get(&q).cloned()).collect());
    let members = |k: usize| -> BTreeSet<StateId> {
        marks
            .iter()
            .filter(|(_, s)| s.contains(&k))
            .map(|(&q, _)| q)
            .collect()
    };
    if let [(None, g)] = cond.as_slice() {
        return Ok(HoaAutomaton::Buchi(BuchiAutomaton::new(
            graph,
            members(*g),
        )?));
    }
    let pairs = cond
        .iter()
        .map(|(fin, inf)| RabinPair {
            good: members(*inf),
            bad: fin.map(members).unwrap_or_default(),
        })
        .collect();
    Ok(HoaAutomaton::Rabin(RabinAutomaton::new(graph, pairs)?))
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn label(g: &Guard, index: &BTreeMap<IndexedAtom, usize>) -> String {
    match g {
        Guard::True => "t".into(),
        Guard::False => "f".into(),
        Guard::Lit(a, true) => index[a].to_string(),
        Guard::Lit(a, false) => format!("!{}", index[a]),
        Guard::And(gs) | Guard::Or(gs) => {
            let sep = if matches!(g, Guard::And(_)) {
                " & "
            } else {
                " | "
            };
            let parts: Vec<String> = gs
                .iter()
                .map(|x| match x {
                    Guard::And(_) | Guard::Or(_) => format!("({})", label(x, index)),
                    _ => label(x, index),
                })
                .collect();
            parts.join(sep)
        }
    }
}

fn export(graph: &Graph, acc_lines: &[String], marks: impl Fn(StateId) -> Vec<usize>) -> String {
    let atoms: BTreeSet<IndexedAtom> = graph.edges().iter().flat_map(|e| e.guard.atoms()).collect();
    let index: BTreeMap<IndexedAtom, usize> = atoms
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, a)| (a, i))
        .collect();
    let mut out = String::from("HOA: v1\n");
    out += &format!("States: {}\n", graph.num_states());
    if !graph.is_empty() {
        out += &format!("Start: {}\n", graph.initial());
    }
    let ap: Vec<String> = atoms.iter().map(|a| quote(&a.to_string())).collect();
    out += &format!(
        "AP: {}{}{}\n",
        atoms.len(),
        if ap.is_empty() { "" } else { " " },
        ap.join(" ")
    );
    for l in acc_lines {
        out += l;
        out.push('\n');
    }
    out += "properties: trans-labels explicit-labels state-acc\n--BODY--\n";
    for q in 0..graph.num_states() {
        out += &format!("State: {}", q);
        if let Some(name) = &graph.names()[q] {
            out += &format!(" {}", quote(name));
        }
        let m = marks(q);
        if !m.is_empty() {
            let m: Vec<String> = m.iter().map(usize::to_string).collect();
            out += &format!(" {{{}}}", m.join(" "));
        }
        out.push('\n');
        for e in graph.successors(q) {
            out += &format!("[{}] {}\n", label(&e.guard, &index), e.dst);
        }
    }
    out += "--END--\n";
    out
}

pub fn hoa_export_buchi(aut: &BuchiAutomaton) -> String {
    let acc = [
        "acc-name: Buchi".to_string(),
        "Acceptance: 1 Inf(0)".to_string(),
    ];
    export(&aut.graph, &acc, |q| {
        if aut.accepting.contains(&q) {
            vec![0]
        } else {
            Vec::new()
        }
    })
}

/// Pair `i` uses set `2i` for its bad states and `2i + 1` for its good states.
pub fn hoa_export_rabin(aut: &RabinAutomaton) -> String {
    let k = aut.pairs.len();
    let cond: Vec<String> = (0..k)
        .map(|i| format!("(Fin({}) & Inf({}))", 2 * i, 2 * i + 1))
        .collect();
    let cond = if cond.is_empty() {
        "f".to_string()
    } else {
        cond.join(" | ")
    };
    let acc = [
        format!("acc-name: Rabin {k}"),
        format!("Acceptance: {} {}", 2 * k, cond),
    ];
    export(&aut.graph, &acc, |q| {
        let mut m = Vec::new();
        for (i, p) in aut.pairs.iter().enumerate() {
            if p.bad.contains(&q) {
                m.push(2 * i);
            }
            if p.good.contains(&q) {
                m.push(2 * i + 1);
            }
        }
        m
    })
}
