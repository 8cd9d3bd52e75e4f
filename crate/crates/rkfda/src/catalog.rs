//! Plain-text model catalog.
//!
//! A catalog is a TOML document with one `[[model]]` table per model:
//!
//! ```toml
//! [[model]]
//! id = "M7"
//! class0 = ["1/2: B + 3*peak(1,1)", "1/2: BB"]
//! class1 = ["B"]
//! variables = [1, 48, 100]
//!
//! [[model]]
//! id = "L1-OU"
//! marginal = "OU"
//! link = "10*X65"
//! ```
//!
//! A law is `[weight:] process [± coef*trend ...]` where process is one of
//! `B`, `BB`, `OU`, `OU(theta,sigma2)`, `sB`, `ssB`, `sB(bandwidth)` and a
//! trend is `t`, `peak(m,k)`, `hillside(t0,b)` or `slope(sd)` (random slope
//! with standard deviation `sd`). A link is a sum of products of `X_j`,
//! `X_j^p`, `|X_j|`, `log(X_j)` and `c/X_j` terms.

use serde::Deserialize;

use rkfda_core::simulate::{
    variable_time, ClassLaw, Component, Link, LinkTerm, ModelKind, ModelSpec, ProcessKind, Transform, TrendSpec,
};

use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../catalog/models.toml");

#[derive(Debug, Clone)]
pub struct Catalog {
    models: Vec<ModelSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    #[serde(default)]
    model: Vec<Entry>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Laws {
    One(String),
    Many(Vec<String>),
}

impl Laws {
    fn items(&self) -> &[String] {
        match self {
            Laws::One(s) => std::slice::from_ref(s),
            Laws::Many(v) => v,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    id: String,
    #[serde(default)]
    prior: Option<f64>,
    #[serde(default)]
    class0: Option<Laws>,
    #[serde(default)]
    class1: Option<Laws>,
    #[serde(default)]
    marginal: Option<Laws>,
    #[serde(default)]
    link: Option<String>,
    #[serde(default)]
    variables: Option<Vec<usize>>,
    #[serde(default)]
    relevant_times: Option<Vec<f64>>,
    #[serde(default)]
    exclude: Option<Vec<f64>>,
}

impl Catalog {
    /// The catalog shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("built-in catalog is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: CatalogFile = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].lines().count().max(1));
            Error::parse(line, e.message().to_string())
        })?;
        let mut models: Vec<ModelSpec> = Vec::with_capacity(file.model.len());
        for entry in file.model {
            if models.iter().any(|m| m.id == entry.id) {
                return Err(Error::parse(None, format!("duplicate model id {}", entry.id)));
            }
            models.push(build(entry)?);
        }
        Ok(Catalog { models })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, id: &str) -> Result<&ModelSpec> {
        self.models.iter().find(|m| m.id == id).ok_or_else(|| Error::Usage(format!("unknown model id {id}")))
    }

    pub fn models(&self) -> &[ModelSpec] {
        &self.models
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.models.iter().map(|m| m.id.as_str())
    }
}

fn build(e: Entry) -> Result<ModelSpec> {
    let ctx = |err: Error| match err {
        Error::Parse { line, message } => Error::Parse { line, message: format!("model {}: {message}", e.id) },
        other => other,
    };
    let law = |laws: &Laws| -> Result<ClassLaw> {
        let components = laws.items().iter().map(|s| parse_component(s)).collect::<Result<Vec<_>>>()?;
        Ok(ClassLaw { components })
    };
    let kind = match (&e.class0, &e.class1, &e.marginal, &e.link) {
        (Some(c0), Some(c1), None, None) => {
            ModelKind::TwoClass { class0: law(c0).map_err(ctx)?, class1: law(c1).map_err(ctx)? }
        }
        (None, None, Some(m), Some(l)) => {
            ModelKind::Logistic { marginal: law(m).map_err(ctx)?, link: parse_link(l).map_err(ctx)? }
        }
        _ => {
            return Err(Error::parse(
                None,
                format!("model {}: needs either class0 and class1, or marginal and link", e.id),
            ))
        }
    };
    let relevant = match (&e.relevant_times, &e.variables, &kind) {
        (Some(t), _, _) => t.clone(),
        (None, Some(v), _) => v.iter().map(|&j| variable_time(j)).collect::<core::result::Result<_, _>>()?,
        (None, None, ModelKind::Logistic { link, .. }) => {
            link.variables().into_iter().map(variable_time).collect::<core::result::Result<_, _>>()?
        }
        _ => Vec::new(),
    };
    let exclude = e.exclude.clone().unwrap_or_else(|| degenerate_times(&kind));
    let spec = ModelSpec { id: e.id.clone(), kind, prior: e.prior.unwrap_or(0.5), relevant, exclude };
    spec.validate().map_err(|err| Error::parse(None, format!("model {}: {err}", e.id)))?;
    Ok(spec)
}

/// Times at which every component process has zero variance.
fn degenerate_times(kind: &ModelKind) -> Vec<f64> {
    let laws: Vec<&ClassLaw> = match kind {
        ModelKind::TwoClass { class0, class1 } => vec![class0, class1],
        ModelKind::Logistic { marginal, .. } => vec![marginal],
    };
    let procs: Vec<ProcessKind> = laws.iter().flat_map(|l| l.components.iter().map(|c| c.process)).collect();
    let zero_at_start = |p: &ProcessKind| matches!(p, ProcessKind::Brownian | ProcessKind::Bridge);
    let zero_at_end = |p: &ProcessKind| matches!(p, ProcessKind::Bridge);
    let mut out = Vec::new();
    if procs.iter().all(zero_at_start) {
        out.push(0.0);
    }
    if procs.iter().all(zero_at_end) {
        out.push(1.0);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_digit() || chars[i] == '.' || chars[i] == 'e' || chars[i] == 'E')
            {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse().map_err(|_| Error::parse(None, format!("bad number {text:?} in {s:?}")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),|:".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::parse(None, format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        Ok(Parser { toks: tokenize(src)?, pos: 0, src })
    }

    fn err(&self, what: &str) -> Error {
        Error::parse(None, format!("{what} in {:?}", self.src))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{c}'")))
        }
    }

    fn number(&mut self) -> Result<f64> {
        let neg = self.eat('-');
        match self.next() {
            Some(Tok::Num(v)) => Ok(if neg { -v } else { v }),
            _ => Err(self.err("expected a number")),
        }
    }

    fn args(&mut self, n: usize) -> Result<Vec<f64>> {
        self.expect('(')?;
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            if i > 0 {
                self.expect(',')?;
            }
            v.push(self.number()?);
        }
        self.expect(')')?;
        Ok(v)
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

fn parse_component(s: &str) -> Result<Component> {
    let mut p = Parser::new(s)?;
    let mut weight = 1.0;
    if p.toks.contains(&Tok::Sym(':')) {
        weight = p.number()?;
        if p.eat('/') {
            weight /= p.number()?;
        }
        p.expect(':')?;
    }
    let process = match p.next() {
        Some(Tok::Ident(name)) => match name.as_str() {
            "B" => ProcessKind::Brownian,
            "BB" => ProcessKind::Bridge,
            "OU" if p.peek() == Some(&Tok::Sym('(')) => {
                let a = p.args(2)?;
                ProcessKind::OrnsteinUhlenbeck { theta: a[0], sigma2: a[1] }
            }
            "OU" => ProcessKind::OrnsteinUhlenbeck { theta: 1.0, sigma2: 1.0 },
            "sB" | "ssB" if p.peek() == Some(&Tok::Sym('(')) => {
                ProcessKind::SmoothedBrownian { bandwidth: p.args(1)?[0] }
            }
            "sB" => ProcessKind::SmoothedBrownian { bandwidth: ProcessKind::SB_BANDWIDTH },
            "ssB" => ProcessKind::SmoothedBrownian { bandwidth: ProcessKind::SSB_BANDWIDTH },
            other => return Err(p.err(&format!("unknown process {other}"))),
        },
        _ => return Err(p.err("expected a process name")),
    };
    let mut trends = Vec::new();
    while !p.done() {
        let sign = if p.eat('+') {
            1.0
        } else if p.eat('-') {
            -1.0
        } else {
            return Err(p.err("expected '+' or '-'"));
        };
        let mut coef = sign;
        if let Some(Tok::Num(_)) = p.peek() {
            coef *= p.number()?;
            p.expect('*')?;
        }
        let trend = match p.next() {
            Some(Tok::Ident(name)) => match name.as_str() {
                "t" => TrendSpec::Linear(coef),
                "peak" => {
                    let a = p.args(2)?;
                    if a[0] < 1.0 || a[0].fract() != 0.0 {
                        return Err(p.err("peak level must be a positive integer"));
                    }
                    TrendSpec::Peak { m: a[0] as u32, k: a[1], coef }
                }
                "hillside" => {
                    let a = p.args(2)?;
                    TrendSpec::Hillside { t0: a[0], b: coef * a[1] }
                }
                "slope" => {
                    let sd = p.args(1)?[0];
                    TrendSpec::RandomSlope { sd: coef.abs() * sd }
                }
                other => return Err(p.err(&format!("unknown trend {other}"))),
            },
            _ => return Err(p.err("expected a trend")),
        };
        trends.push(trend);
    }
    let trend = match trends.len() {
        0 => TrendSpec::Zero,
        1 => trends.pop().unwrap_or(TrendSpec::Zero),
        _ => TrendSpec::Sum(trends),
    };
    Ok(Component { weight, process, trend })
}

fn variable(p: &mut Parser<'_>) -> Result<usize> {
    match p.next() {
        Some(Tok::Ident(name)) if name.starts_with('X') => {
            let j: usize = name[1..].parse().map_err(|_| p.err(&format!("bad variable {name}")))?;
            variable_time(j).map_err(|e| p.err(&e.to_string()))?;
            Ok(j)
        }
        _ => Err(p.err("expected a variable X<j>")),
    }
}

fn factor(p: &mut Parser<'_>) -> Result<(usize, Transform)> {
    if p.eat('|') {
        let j = variable(p)?;
        p.expect('|')?;
        return Ok((j, Transform::Abs));
    }
    if let Some(Tok::Ident(name)) = p.peek() {
        if name == "log" {
            p.pos += 1;
            p.expect('(')?;
            let j = variable(p)?;
            p.expect(')')?;
            return Ok((j, Transform::Log));
        }
    }
    let j = variable(p)?;
    if p.eat('^') {
        let e = p.number()?;
        if e.fract() != 0.0 {
            return Err(p.err("powers must be integers"));
        }
        return Ok((j, Transform::Pow(e as i32)));
    }
    Ok((j, Transform::Identity))
}

pub fn parse_link(s: &str) -> Result<Link> {
    let mut p = Parser::new(s)?;
    let mut terms = Vec::new();
    let mut first = true;
    while !p.done() {
        let sign = if p.eat('+') {
            1.0
        } else if p.eat('-') {
            -1.0
        } else if first {
            1.0
        } else {
            return Err(p.err("expected '+' or '-'"));
        };
        first = false;
        let mut coef = sign;
        let mut factors = Vec::new();
        if let Some(Tok::Num(_)) = p.peek() {
            coef *= p.number()?;
            if p.eat('/') {
                factors.push((variable(&mut p)?, Transform::Recip));
            } else {
                p.expect('*')?;
                factors.push(factor(&mut p)?);
            }
        } else {
            factors.push(factor(&mut p)?);
        }
        while p.eat('*') {
            factors.push(factor(&mut p)?);
        }
        terms.push(LinkTerm { coef, factors });
    }
    if terms.is_empty() {
        return Err(p.err("empty link"));
    }
    Ok(Link { terms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn component_syntax() {
        let c = parse_component("1/3: B - 3*t").unwrap();
        assert!((c.weight - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.trend, TrendSpec::Linear(-3.0));
        let c = parse_component("OU(2, 0.5) + peak(2,1.25) - 5*hillside(0.5, 4)").unwrap();
        assert_eq!(c.process, ProcessKind::OrnsteinUhlenbeck { theta: 2.0, sigma2: 0.5 });
        assert_eq!(
            c.trend,
            TrendSpec::Sum(vec![
                TrendSpec::Peak { m: 2, k: 1.25, coef: 1.0 },
                TrendSpec::Hillside { t0: 0.5, b: -20.0 }
            ])
        );
        assert!(parse_component("Q + t").is_err());
        assert!(parse_component("B + wave(1)").is_err());
    }

    #[test]
    fn link_syntax() {
        let l = parse_link("20/X35 - 30*X77^3 + 10*|X50| + 0*X30^2*X85 + log(X2)").unwrap();
        assert_eq!(l.terms.len(), 5);
        assert_eq!(l.terms[0].factors, vec![(35, Transform::Recip)]);
        assert_eq!(l.terms[1].coef, -30.0);
        assert_eq!(l.terms[3].factors, vec![(30, Transform::Pow(2)), (85, Transform::Identity)]);
        assert_eq!(l.variables(), vec![2, 30, 35, 50, 77, 85]);
        assert!(parse_link("10*X101").is_err());
        assert!(parse_link("").is_err());
    }
}
