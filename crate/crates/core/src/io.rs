//! Text formats: Bayesian networks (`.bn`), labelled ontologies (`.balc`),
//! concepts and contexts.
//!
//! Both file formats are line oriented with `#` comments. A line that fails
//! to parse produces a diagnostic and parsing resumes on the next line.

use std::collections::HashMap;
use std::fmt;

use crate::bayes::BayesNet;
use crate::context::{ComplexContext, PrimitiveContext, Signature};
use crate::error::{Error, Result};
use crate::ontology::{Axiom, Concept, Ontology, VAxiom};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A located message. Positions are 1-based; column 0 means the whole line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub severity: Severity,
}

impl Diagnostic {
    fn error(line: usize, column: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            line,
            column,
            message: message.into(),
            severity: Severity::Error,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {kind}: {}", self.line, self.column, self.message)
    }
}

const KEYWORDS: &[&str] = &[
    "not", "and", "or", "exists", "forall", "top", "bottom", "sub",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Punct(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Punct(c) => write!(f, "`{c}`"),
        }
    }
}

/// Splits a line into words and punctuation. With `numeric`, `.`, `+` and `-`
/// may occur inside words so that numbers stay whole.
fn tokenize(
    text: &str,
    line: usize,
    numeric: bool,
) -> std::result::Result<Vec<(Tok, usize)>, Diagnostic> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let word_char = |c: char| {
        c.is_ascii_alphanumeric() || c == '_' || (numeric && matches!(c, '.' | '+' | '-'))
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if word_char(c) {
            let start = i;
            while i < chars.len() && word_char(chars[i]) {
                i += 1;
            }
            out.push((Tok::Word(chars[start..i].iter().collect()), start + 1));
        } else if "(){},=|.!:@".contains(c) {
            out.push((Tok::Punct(c), i + 1));
            i += 1;
        } else {
            return Err(Diagnostic::error(
                line,
                i + 1,
                format!("unexpected character `{c}`"),
            ));
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    line: usize,
    end_col: usize,
}

type Parsed<T> = std::result::Result<T, Diagnostic>;

impl<'a> Cursor<'a> {
    fn new(toks: &'a [(Tok, usize)], line: usize, end_col: usize) -> Self {
        Cursor {
            toks,
            pos: 0,
            line,
            end_col,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |&(_, c)| c)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Parsed<T> {
        Err(Diagnostic::error(self.line, self.col(), msg))
    }

    fn unexpected<T>(&self, wanted: &str) -> Parsed<T> {
        match self.peek() {
            Some(t) => self.err(format!("expected {wanted}, found {t}")),
            None => self.err(format!("expected {wanted}, found end of line")),
        }
    }

    fn at_punct(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Punct(c))
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x == w)
    }

    fn eat_punct(&mut self, c: char) -> bool {
        let hit = self.at_punct(c);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_word(&mut self, w: &str) -> bool {
        let hit = self.at_word(w);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_punct(&mut self, c: char) -> Parsed<()> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            self.unexpected(&format!("`{c}`"))
        }
    }

    fn expect_word(&mut self, w: &str) -> Parsed<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            self.unexpected(&format!("`{w}`"))
        }
    }

    fn word(&mut self, what: &str) -> Parsed<String> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.unexpected(what),
        }
    }

    /// A user identifier: not a keyword, not reserved, not starting with a digit.
    fn ident(&mut self, what: &str) -> Parsed<String> {
        let col = self.col();
        let w = self.word(what)?;
        if KEYWORDS.contains(&w.as_str()) {
            return Err(Diagnostic::error(
                self.line,
                col,
                format!("keyword `{w}` used as {what}"),
            ));
        }
        if w.starts_with("__") {
            return Err(Diagnostic::error(
                self.line,
                col,
                format!("`{w}` is reserved"),
            ));
        }
        if w.starts_with(|c: char| c.is_ascii_digit()) {
            return Err(Diagnostic::error(
                self.line,
                col,
                format!("{what} `{w}` starts with a digit"),
            ));
        }
        Ok(w)
    }

    fn finish(&self) -> Parsed<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => self.err(format!("unexpected {t}")),
        }
    }

    fn concept(&mut self) -> Parsed<Concept> {
        let mut c = self.conjunction()?;
        while self.eat_word("or") {
            c = Concept::or(c, self.conjunction()?);
        }
        Ok(c)
    }

    fn conjunction(&mut self) -> Parsed<Concept> {
        let mut c = self.unary()?;
        while self.eat_word("and") {
            c = Concept::and(c, self.unary()?);
        }
        Ok(c)
    }

    fn unary(&mut self) -> Parsed<Concept> {
        if self.eat_word("not") {
            return Ok(Concept::not(self.unary()?));
        }
        for (kw, exists) in [("exists", true), ("forall", false)] {
            if self.eat_word(kw) {
                let r = self.ident("role name")?;
                self.expect_punct('.')?;
                let body = self.unary()?;
                return Ok(if exists {
                    Concept::exists(&r, body)
                } else {
                    Concept::forall(&r, body)
                });
            }
        }
        if self.eat_word("top") {
            return Ok(Concept::top());
        }
        if self.eat_word("bottom") {
            return Ok(Concept::bottom());
        }
        if self.eat_punct('(') {
            let c = self.concept()?;
            self.expect_punct(')')?;
            return Ok(c);
        }
        Ok(Concept::name(&self.ident("concept")?))
    }

    fn context(&mut self, sig: &Signature) -> Parsed<ComplexContext> {
        if self.eat_word("bottom") {
            return Ok(ComplexContext::bottom());
        }
        let mut members = vec![self.primitive(sig)?];
        while self.eat_punct('|') {
            members.push(self.primitive(sig)?);
        }
        Ok(ComplexContext::from_members(members))
    }

    fn primitive(&mut self, sig: &Signature) -> Parsed<PrimitiveContext> {
        self.expect_punct('{')?;
        let mut kappa = PrimitiveContext::empty();
        if self.eat_punct('}') {
            return Ok(kappa);
        }
        loop {
            let negated = self.eat_punct('!');
            let col = self.col();
            let var = self.word("variable")?;
            let var_idx = sig.var_index(&var).ok_or_else(|| {
                Diagnostic::error(self.line, col, format!("undeclared variable `{var}`"))
            })?;
            let value = if !negated && self.eat_punct('=') {
                let col = self.col();
                let v = self.word("value")?;
                if sig.value_index(var_idx, &v).is_none() {
                    return Err(Diagnostic::error(
                        self.line,
                        col,
                        format!("`{v}` is not a value of `{var}`"),
                    ));
                }
                v
            } else if sig.is_boolean(var_idx) {
                if negated { "f" } else { "t" }.to_string()
            } else {
                return Err(Diagnostic::error(
                    self.line,
                    col,
                    format!("`{var}` is not two-valued; write `{var}=<value>`"),
                ));
            };
            kappa.insert(sig.literal(&var, &value).expect("checked above"));
            if self.eat_punct('}') {
                return Ok(kappa);
            }
            self.expect_punct(',')?;
        }
    }
}

fn single_line<T>(
    text: &str,
    numeric: bool,
    f: impl FnOnce(&mut Cursor) -> Parsed<T>,
) -> Result<T> {
    let run = || {
        let toks = tokenize(text, 1, numeric)?;
        let mut cur = Cursor::new(&toks, 1, text.chars().count() + 1);
        let v = f(&mut cur)?;
        cur.finish()?;
        Ok(v)
    };
    run().map_err(|d| Error::Parse(vec![d]))
}

pub fn parse_concept(text: &str) -> Result<Concept> {
    single_line(text, false, |c| c.concept())
}

pub fn parse_context(text: &str, sig: &Signature) -> Result<ComplexContext> {
    single_line(text, false, |c| c.context(sig))
}

/// Canonical text of a concept; binary operands are parenthesized whenever
/// the precedence or left associativity would otherwise regroup them.
pub fn serialize_concept(c: &Concept) -> String {
    c.to_string()
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(f: &mut fmt::Formatter<'_>, c: &Concept, wrap: bool) -> fmt::Result {
            if wrap {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        }
        fn binary(c: &Concept) -> bool {
            matches!(c, Concept::And(..) | Concept::Or(..)) && !c.is_top() && !c.is_bottom()
        }
        if self.is_top() {
            return f.write_str("top");
        }
        if self.is_bottom() {
            return f.write_str("bottom");
        }
        match self {
            Concept::Name(n) => f.write_str(n),
            Concept::Not(c) => {
                f.write_str("not ")?;
                operand(f, c, binary(c))
            }
            Concept::And(c, d) => {
                operand(f, c, matches!(**c, Concept::Or(..)) && binary(c))?;
                f.write_str(" and ")?;
                operand(f, d, binary(d))
            }
            Concept::Or(c, d) => {
                operand(f, c, false)?;
                f.write_str(" or ")?;
                operand(f, d, matches!(**d, Concept::Or(..)) && binary(d))
            }
            Concept::Exists(r, c) | Concept::Forall(r, c) => {
                let kw = if matches!(self, Concept::Exists(..)) {
                    "exists"
                } else {
                    "forall"
                };
                write!(f, "{kw} {r}. ")?;
                operand(f, c, binary(c))
            }
        }
    }
}

/// Canonical text of a context: members and literals in sorted order.
pub fn serialize_context(phi: &ComplexContext, sig: &Signature) -> String {
    phi.display(sig).to_string()
}

/// Lines of `text` with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        (!l.trim().is_empty()).then_some((i + 1, l))
    })
}

/// A cpt line: line number, parent assignment, `(value, probability, column)` entries.
type RowDecl = (usize, Vec<(String, String)>, Vec<(String, String, usize)>);

struct VarDecl {
    line: usize,
    name: String,
    values: Vec<String>,
    parents: Option<(usize, Vec<String>)>,
    rows: Vec<RowDecl>,
}

pub fn parse_bn(text: &str) -> Result<BayesNet> {
    let mut diags = Vec::new();
    let mut decls: Vec<VarDecl> = Vec::new();
    let mut by_name: HashMap<String, usize> = HashMap::new();
    let mut pending_parents = Vec::new();
    let mut pending_rows = Vec::new();
    for (ln, line) in content_lines(text) {
        let parsed = tokenize(line, ln, true).and_then(|toks| {
            let mut cur = Cursor::new(&toks, ln, line.chars().count() + 1);
            let kw = cur.word("`var`, `parents` or `cpt`")?;
            match kw.as_str() {
                "var" => {
                    let col = cur.col();
                    let name = cur.ident("variable")?;
                    cur.expect_punct(':')?;
                    let mut values = Vec::new();
                    while cur.peek().is_some() {
                        values.push(cur.ident("value")?);
                    }
                    cur.finish()?;
                    if by_name.contains_key(&name) {
                        return Err(Diagnostic::error(
                            ln,
                            col,
                            format!("variable `{name}` declared twice"),
                        ));
                    }
                    if values.is_empty() {
                        return Err(Diagnostic::error(
                            ln,
                            col,
                            format!("variable `{name}` has no values"),
                        ));
                    }
                    if let Some(v) = values
                        .iter()
                        .enumerate()
                        .find_map(|(i, v)| values[..i].contains(v).then_some(v))
                    {
                        return Err(Diagnostic::error(ln, col, format!("value `{v}` repeated")));
                    }
                    by_name.insert(name.clone(), decls.len());
                    decls.push(VarDecl {
                        line: ln,
                        name,
                        values,
                        parents: None,
                        rows: Vec::new(),
                    });
                }
                "parents" => {
                    let name = cur.word("variable")?;
                    cur.expect_punct(':')?;
                    let mut ps = Vec::new();
                    while cur.peek().is_some() {
                        ps.push((cur.col(), cur.word("parent")?));
                    }
                    pending_parents.push((ln, name, ps));
                }
                "cpt" => {
                    let name = cur.word("variable")?;
                    cur.expect_punct('|')?;
                    let mut assignment = Vec::new();
                    while !cur.at_punct(':') {
                        let p = cur.word("parent assignment or `:`")?;
                        cur.expect_punct('=')?;
                        assignment.push((p, cur.word("value")?));
                    }
                    cur.expect_punct(':')?;
                    let mut entries = Vec::new();
                    while cur.peek().is_some() {
                        let col = cur.col();
                        let v = cur.word("value")?;
                        cur.expect_punct('=')?;
                        entries.push((v, cur.word("probability")?, col));
                    }
                    pending_rows.push((ln, name, assignment, entries));
                }
                other => {
                    return Err(Diagnostic::error(
                        ln,
                        1,
                        format!("unknown directive `{other}`"),
                    ));
                }
            }
            Ok(())
        });
        if let Err(d) = parsed {
            diags.push(d);
        }
    }

    for (ln, name, ps) in pending_parents {
        let Some(&x) = by_name.get(&name) else {
            diags.push(Diagnostic::error(
                ln,
                0,
                format!("undeclared variable `{name}`"),
            ));
            continue;
        };
        if let Some((prev, _)) = decls[x].parents {
            diags.push(Diagnostic::error(
                ln,
                0,
                format!("parents of `{name}` already given on line {prev}"),
            ));
            continue;
        }
        let mut ok = true;
        for (col, p) in &ps {
            if !by_name.contains_key(p) {
                diags.push(Diagnostic::error(
                    ln,
                    *col,
                    format!("undeclared parent `{p}`"),
                ));
                ok = false;
            }
        }
        if ok {
            decls[x].parents = Some((ln, ps.into_iter().map(|(_, p)| p).collect()));
        }
    }
    for (ln, name, assignment, entries) in pending_rows {
        match by_name.get(&name) {
            Some(&x) => decls[x].rows.push((ln, assignment, entries)),
            None => diags.push(Diagnostic::error(
                ln,
                0,
                format!("undeclared variable `{name}`"),
            )),
        }
    }
    if !diags.is_empty() {
        return Err(Error::Parse(diags));
    }

    let sig = Signature::new(decls.iter().map(|d| (d.name.clone(), d.values.clone())))?;
    let parents: Vec<Vec<usize>> = decls
        .iter()
        .map(|d| {
            d.parents
                .as_ref()
                .map(|(_, ps)| ps.iter().map(|p| by_name[p]).collect())
                .unwrap_or_default()
        })
        .collect();
    let skeleton = BayesNet::from_parts(sig.clone(), parents.clone(), vec![vec![]; sig.len()]);
    let mut cpts = Vec::new();
    for (x, d) in decls.iter().enumerate() {
        let rows = skeleton.row_count(x);
        let mut table: Vec<Option<Vec<f64>>> = vec![None; rows];
        for (ln, assignment, entries) in &d.rows {
            match cpt_row(&sig, x, &parents[x], assignment, entries, *ln) {
                Ok((values, probs)) => {
                    let r = skeleton.row_index(x, &values);
                    if table[r].is_some() {
                        diags.push(Diagnostic::error(
                            *ln,
                            0,
                            format!("duplicate cpt row for `{}`", d.name),
                        ));
                    }
                    table[r] = Some(probs);
                }
                Err(e) => diags.push(e),
            }
        }
        for (r, row) in table.iter().enumerate() {
            if row.is_none() {
                let label = skeleton.row_label(x, r);
                diags.push(Diagnostic::error(
                    d.line,
                    0,
                    format!("missing cpt row `{} | {}`", d.name, label),
                ));
            }
        }
        cpts.push(table.into_iter().map(Option::unwrap_or_default).collect());
    }
    if !diags.is_empty() {
        return Err(Error::Parse(diags));
    }
    let bn = BayesNet::from_parts(sig, parents, cpts);
    if let Err(violations) = bn.validate() {
        return Err(Error::Parse(
            violations
                .iter()
                .map(|v| Diagnostic::error(0, 0, v.to_string()))
                .collect(),
        ));
    }
    Ok(bn)
}

fn cpt_row(
    sig: &Signature,
    x: usize,
    parents: &[usize],
    assignment: &[(String, String)],
    entries: &[(String, String, usize)],
    ln: usize,
) -> Parsed<(Vec<usize>, Vec<f64>)> {
    let mut values = vec![None; parents.len()];
    for (p, v) in assignment {
        let pos = sig
            .var_index(p)
            .and_then(|pi| parents.iter().position(|&q| q == pi))
            .ok_or_else(|| {
                Diagnostic::error(
                    ln,
                    0,
                    format!("`{p}` is not a parent of `{}`", sig.var_name(x)),
                )
            })?;
        let vi = sig
            .value_index(parents[pos], v)
            .ok_or_else(|| Diagnostic::error(ln, 0, format!("`{v}` is not a value of `{p}`")))?;
        if values[pos].replace(vi).is_some() {
            return Err(Diagnostic::error(
                ln,
                0,
                format!("parent `{p}` assigned twice"),
            ));
        }
    }
    if let Some(pos) = values.iter().position(Option::is_none) {
        return Err(Diagnostic::error(
            ln,
            0,
            format!(
                "row does not assign parent `{}`",
                sig.var_name(parents[pos])
            ),
        ));
    }
    let mut probs = vec![None; sig.domain_size(x)];
    for (v, p, col) in entries {
        let vi = sig.value_index(x, v).ok_or_else(|| {
            Diagnostic::error(
                ln,
                *col,
                format!("`{v}` is not a value of `{}`", sig.var_name(x)),
            )
        })?;
        let prob: f64 = p
            .parse()
            .map_err(|_| Diagnostic::error(ln, *col, format!("`{p}` is not a number")))?;
        if probs[vi].replace(prob).is_some() {
            return Err(Diagnostic::error(
                ln,
                *col,
                format!("value `{v}` given twice"),
            ));
        }
    }
    if let Some(vi) = probs.iter().position(Option::is_none) {
        return Err(Diagnostic::error(
            ln,
            0,
            format!("row gives no probability for `{}`", sig.domain(x)[vi]),
        ));
    }
    Ok((
        values.into_iter().map(Option::unwrap).collect(),
        probs.into_iter().map(Option::unwrap).collect(),
    ))
}

pub fn serialize_bn(bn: &BayesNet) -> String {
    let sig = bn.signature();
    let mut out = String::new();
    for x in 0..sig.len() {
        out.push_str(&format!(
            "var {} : {}\n",
            sig.var_name(x),
            sig.domain(x).join(" ")
        ));
    }
    for x in 0..sig.len() {
        let ps = bn.parents(x);
        if !ps.is_empty() {
            let names: Vec<&str> = ps.iter().map(|&p| sig.var_name(p)).collect();
            out.push_str(&format!(
                "parents {} : {}\n",
                sig.var_name(x),
                names.join(" ")
            ));
        }
    }
    for x in 0..sig.len() {
        for (r, row) in bn.cpt(x).iter().enumerate() {
            let entries: Vec<String> = sig
                .domain(x)
                .iter()
                .zip(row)
                .map(|(v, p)| format!("{v}={p:?}"))
                .collect();
            let label = bn.row_label(x, r);
            let sep = if label.is_empty() { "" } else { " " };
            out.push_str(&format!(
                "cpt {} |{sep}{label} : {}\n",
                sig.var_name(x),
                entries.join(" ")
            ));
        }
    }
    out
}

pub fn parse_ontology(text: &str, sig: &Signature) -> Result<Ontology> {
    let mut diags = Vec::new();
    let mut axioms = Vec::new();
    for (ln, line) in content_lines(text) {
        let parsed = tokenize(line, ln, false).and_then(|toks| {
            let mut cur = Cursor::new(&toks, ln, line.chars().count() + 1);
            let axiom = match cur.word("`gci`, `assert` or `role`")?.as_str() {
                "gci" => {
                    let c = cur.concept()?;
                    cur.expect_word("sub")?;
                    Axiom::Gci(c, cur.concept()?)
                }
                "assert" => {
                    let c = cur.concept()?;
                    cur.expect_punct('(')?;
                    let a = cur.ident("individual")?;
                    cur.expect_punct(')')?;
                    Axiom::concept(c, &a)
                }
                "role" => {
                    let r = cur.ident("role name")?;
                    cur.expect_punct('(')?;
                    let a = cur.ident("individual")?;
                    cur.expect_punct(',')?;
                    let b = cur.ident("individual")?;
                    cur.expect_punct(')')?;
                    Axiom::role(&r, &a, &b)
                }
                other => {
                    return Err(Diagnostic::error(
                        ln,
                        1,
                        format!("unknown directive `{other}`"),
                    ));
                }
            };
            let label = if cur.eat_punct('@') {
                cur.context(sig)?
            } else {
                ComplexContext::top()
            };
            cur.finish()?;
            Ok(VAxiom::new(axiom, label))
        });
        match parsed {
            Ok(ax) => axioms.push(ax),
            Err(d) => diags.push(d),
        }
    }
    if diags.is_empty() {
        Ok(Ontology::new(axioms))
    } else {
        Err(Error::Parse(diags))
    }
}

pub fn serialize_axiom(ax: &VAxiom, sig: &Signature) -> String {
    let body = match &ax.axiom {
        Axiom::Gci(c, d) => format!("gci {c} sub {d}"),
        Axiom::ConceptAssertion(c, a) => match c {
            Concept::And(..) | Concept::Or(..) if !c.is_top() && !c.is_bottom() => {
                format!("assert ({c})({a})")
            }
            _ => format!("assert {c}({a})"),
        },
        Axiom::RoleAssertion(r, a, b) => format!("role {r}({a},{b})"),
    };
    format!("{body} @ {}", serialize_context(&ax.label, sig))
}

pub fn serialize_ontology(onto: &Ontology, sig: &Signature) -> String {
    onto.axioms()
        .iter()
        .map(|ax| serialize_axiom(ax, sig) + "\n")
        .collect()
}
