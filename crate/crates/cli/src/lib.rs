//! Command-line front end for the concordance engine.
//!
//! [`parse_expr`] reads manifold expressions such as `2*CP6 # 3*HP3`;
//! [`run`] answers a [`Query`] and renders text or JSON.

use std::fmt::Write as _;
use std::path::PathBuf;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use concordance_core::abelian::{factorize, FgAbGroup, PrimePower};
use concordance_core::engine::{DerivationTrace, Engine, EngineConfig, EngineError, ManifoldExpr};
use concordance_core::extension::{CandidateSet, ExtensionError, OracleConfig};
use concordance_core::knowledge::{default_kb, load, BlockId};

pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const KNOWLEDGE: i32 = 3;
    pub const ORACLE_BOUND: i32 = 4;
    pub const CONTRADICTION: i32 = 5;
    pub const HYPOTHESIS: i32 = 6;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("{0}")]
    Expression(EngineError),
    #[error("expected {expected} expression(s) for {verb}, got {got}")]
    Arity {
        verb: Verb,
        expected: usize,
        got: usize,
    },
    #[error("cannot read knowledge base {path}: {message}")]
    KnowledgeFile { path: String, message: String },
    #[error("{0}")]
    Engine(EngineError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Syntax { .. } | CliError::Expression(_) | CliError::Arity { .. } => {
                exit::PARSE
            }
            CliError::KnowledgeFile { .. } => exit::KNOWLEDGE,
            CliError::Engine(e) => match e {
                EngineError::EmptyExpression
                | EngineError::ZeroMultiplicity(_)
                | EngineError::DimensionMismatch { .. }
                | EngineError::DimensionTooSmall(_) => exit::PARSE,
                EngineError::Knowledge(_)
                | EngineError::Independence { .. }
                | EngineError::Template { .. } => exit::KNOWLEDGE,
                EngineError::Extension(ExtensionError::OracleBound { .. })
                | EngineError::TooLarge(_) => exit::ORACLE_BOUND,
                EngineError::Extension(ExtensionError::Contradiction { .. })
                | EngineError::Inconsistent(_) => exit::CONTRADICTION,
                EngineError::Hypothesis { .. } => exit::HYPOTHESIS,
                _ => exit::OTHER,
            },
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        CliError::Engine(e)
    }
}

/// Parses `expr := term ("#" term)*`, `term := (INT "*")? block`.
///
/// Positions in errors are 1-based character columns of `text`.
pub fn parse_expr(text: &str) -> Result<ManifoldExpr, CliError> {
    let chars: Vec<(usize, char)> = text
        .chars()
        .enumerate()
        .filter(|(_, c)| !c.is_whitespace())
        .map(|(i, c)| (i + 1, c))
        .collect();
    let end = text.chars().count() + 1;
    let mut p = Parser {
        chars: &chars,
        at: 0,
        end,
    };
    let mut terms = vec![p.term()?];
    while !p.done() {
        p.expect('#')?;
        terms.push(p.term()?);
    }
    ManifoldExpr::new(terms).map_err(CliError::Expression)
}

struct Parser<'a> {
    chars: &'a [(usize, char)],
    at: usize,
    end: usize,
}

impl Parser<'_> {
    fn done(&self) -> bool {
        self.at == self.chars.len()
    }

    fn position(&self) -> usize {
        self.chars.get(self.at).map_or(self.end, |c| c.0)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).map(|c| c.1)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, CliError> {
        Err(CliError::Syntax {
            position: self.position(),
            message: message.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), CliError> {
        match self.peek() {
            Some(d) if d == c => {
                self.at += 1;
                Ok(())
            }
            Some(d) => self.error(format!("expected '{c}', found '{d}'")),
            None => self.error(format!("expected '{c}' at end of input")),
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(|&c| f(c)) {
            s.push(c);
            self.at += 1;
        }
        s
    }

    fn term(&mut self) -> Result<(BlockId, u64), CliError> {
        let start = self.position();
        let mut k = 1;
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            let digits = self.take_while(|c| c.is_ascii_digit());
            k = digits.parse().map_err(|_| CliError::Syntax {
                position: start,
                message: format!("multiplicity {digits} is too large"),
            })?;
            self.expect('*')?;
        }
        let block_start = self.position();
        let name = self.take_while(|c| c.is_ascii_alphabetic());
        if name.is_empty() {
            return match self.peek() {
                Some(c) => self.error(format!("expected a block such as CP5, found '{c}'")),
                None => self.error("expected a block such as CP5 at end of input"),
            };
        }
        let index = self.take_while(|c| c.is_ascii_digit());
        let block = format!("{name}{index}")
            .parse::<BlockId>()
            .map_err(|e| CliError::Syntax {
                position: block_start,
                message: e.to_string(),
            })?;
        Ok((block, k))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verb {
    Compute,
    Inertia,
    HInertia,
    Ses,
    Collapse,
    Simplify,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Compute => "compute",
            Verb::Inertia => "inertia",
            Verb::HInertia => "h-inertia",
            Verb::Ses => "ses",
            Verb::Collapse => "collapse",
            Verb::Simplify => "simplify",
        }
    }

    pub fn arity(self) -> usize {
        if self == Verb::Collapse {
            2
        } else {
            1
        }
    }
}

impl std::fmt::Display for Verb {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Options {
    pub json: bool,
    pub trace: bool,
    pub kb_path: Option<PathBuf>,
    pub oracle_bound: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub verb: Verb,
    /// Unparsed expression arguments.
    pub exprs: Vec<String>,
    pub options: Options,
}

impl Query {
    pub fn new(verb: Verb, exprs: &[&str]) -> Self {
        Query {
            verb,
            exprs: exprs.iter().map(|s| s.to_string()).collect(),
            options: Options::default(),
        }
    }

    pub fn json(mut self) -> Self {
        self.options.json = true;
        self
    }

    pub fn trace(mut self) -> Self {
        self.options.trace = true;
        self
    }
}

/// What a run writes and how it exits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(q: &Query) -> Output {
    match execute(q) {
        Ok(stdout) => Output {
            status: exit::OK,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Output {
            status: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn engine(options: &Options) -> Result<Engine, CliError> {
    let kb = match &options.kb_path {
        None => default_kb(),
        Some(path) => {
            let shown = path.display().to_string();
            let text = std::fs::read_to_string(path).map_err(|e| CliError::KnowledgeFile {
                path: shown.clone(),
                message: e.to_string(),
            })?;
            load(&text).map_err(|e| CliError::KnowledgeFile {
                path: shown,
                message: e.to_string(),
            })?
        }
    };
    let mut config = EngineConfig::default();
    if let Some(bound) = options.oracle_bound {
        config.oracle = OracleConfig { bound };
    }
    Ok(Engine::with_config(kb, config))
}

fn execute(q: &Query) -> Result<String, CliError> {
    if q.exprs.len() != q.verb.arity() {
        return Err(CliError::Arity {
            verb: q.verb,
            expected: q.verb.arity(),
            got: q.exprs.len(),
        });
    }
    let exprs = q
        .exprs
        .iter()
        .map(|s| parse_expr(s))
        .collect::<Result<Vec<_>, _>>()?;
    let engine = engine(&q.options)?;
    let e = &exprs[0];
    let (text, json, trace) = match q.verb {
        Verb::Compute => {
            let d = engine.concordance_set(e)?;
            let a = &d.value;
            let mut text = render_candidates(&a.candidates);
            for m in &a.missing {
                let _ = write!(text, "\nmissing: {m}");
            }
            let json = serde_json::json!({
                "verb": q.verb.name(),
                "expr": e.to_string(),
                "resolved": a.resolved(),
                "candidates": a.candidates.iter().map(GroupJson::from).collect::<Vec<_>>(),
                "missing": a.missing,
            });
            (text, json, d.trace)
        }
        Verb::Inertia | Verb::HInertia => {
            let d = if q.verb == Verb::Inertia {
                engine.inertia_group(e)?
            } else {
                engine.homotopy_inertia_group(e)?
            };
            let g = &d.value.group;
            let text = if g.is_trivial() {
                "0 (trivial)".to_string()
            } else {
                g.to_string()
            };
            let json = serde_json::json!({
                "verb": q.verb.name(),
                "expr": e.to_string(),
                "group": GroupJson::from(g),
                "trivial": g.is_trivial(),
            });
            (text, json, d.trace)
        }
        Verb::Ses => {
            let d = engine.structure_ses(e)?;
            let ses = &d.value;
            let many = ses.scenarios.len() > 1;
            let mut lines = Vec::new();
            let mut scenarios = Vec::new();
            for (i, s) in ses.scenarios.iter().enumerate() {
                if many {
                    lines.push(format!("scenario {} of {}:", i + 1, ses.scenarios.len()));
                }
                lines.push(format!("0 -> {} -> C({e}) -> {} -> 0", s.left, s.right));
                lines.push(format!(
                    "middle: {}",
                    render_candidates(s.middle.candidates())
                ));
                scenarios.push(serde_json::json!({
                    "left": GroupJson::from(&s.left),
                    "right": GroupJson::from(&s.right),
                    "middle": candidate_json(&s.middle),
                }));
            }
            for m in &ses.missing {
                lines.push(format!("missing: {m}"));
            }
            let resolved = !many && ses.scenarios.iter().all(|s| s.middle.resolved());
            let json = serde_json::json!({
                "verb": q.verb.name(),
                "expr": e.to_string(),
                "resolved": resolved,
                "scenarios": scenarios,
                "missing": ses.missing,
            });
            (lines.join("\n"), json, d.trace)
        }
        Verb::Collapse => {
            let f = &exprs[1];
            let d = engine.collapse_map_injective(e, f)?;
            let sum = e.connected_sum(f)?;
            let text = format!(
                "C({e}) -> C({sum}) is {}",
                if d.value {
                    "injective"
                } else {
                    "not injective"
                }
            );
            let json = serde_json::json!({
                "verb": q.verb.name(),
                "expr": [e.to_string(), f.to_string()],
                "injective": d.value,
            });
            (text, json, d.trace)
        }
        Verb::Simplify => {
            let d = engine.simplify_summands(e);
            let text = d.value.to_string();
            let json = serde_json::json!({
                "verb": q.verb.name(),
                "expr": e.to_string(),
                "simplified": d.value.to_string(),
            });
            (text, json, d.trace)
        }
    };
    Ok(if q.options.json {
        let mut json = json;
        if q.options.trace {
            json["trace"] = trace_json(&trace);
        }
        let mut s = serde_json::to_string_pretty(&json).expect("json values serialize");
        s.push('\n');
        s
    } else {
        let mut s = text;
        s.push('\n');
        if q.options.trace {
            s.push_str(&render_trace(&trace));
        }
        s
    })
}

/// A single group, or `candidates: {..} — extension not determined`.
pub fn render_candidates(candidates: &[FgAbGroup]) -> String {
    match candidates {
        [g] => g.to_string(),
        _ => {
            let v: Vec<String> = candidates.iter().map(|g| g.to_string()).collect();
            format!(
                "candidates: {{{}}} — extension not determined",
                v.join(", ")
            )
        }
    }
}

pub fn render_trace(trace: &DerivationTrace) -> String {
    let mut s = String::from("trace:\n");
    for (i, step) in trace.steps().iter().enumerate() {
        let _ = writeln!(s, "  {}. {step}", i + 1);
    }
    s
}

#[derive(Serialize)]
struct TraceJson<'a> {
    rule: &'a str,
    cite: &'a str,
    output: &'a str,
}

pub fn trace_json(trace: &DerivationTrace) -> Value {
    let steps: Vec<TraceJson> = trace
        .steps()
        .iter()
        .map(|s| TraceJson {
            rule: &s.rule,
            cite: &s.cite,
            output: &s.output,
        })
        .collect();
    serde_json::to_value(steps).expect("trace serializes")
}

fn candidate_json(cs: &CandidateSet) -> Value {
    serde_json::json!({
        "resolved": cs.resolved(),
        "candidates": cs.candidates().iter().map(GroupJson::from).collect::<Vec<_>>(),
    })
}

/// JSON form of a group: primary torsion ascending by `(prime, exponent)` and
/// invariant factors largest first. Numbers beyond `u64` are strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupJson {
    pub free_rank: usize,
    pub torsion: Vec<Value>,
    pub invariant_factors: Vec<Value>,
}

fn number(n: &BigUint) -> Value {
    match n.to_u64() {
        Some(x) => Value::from(x),
        None => Value::String(n.to_string()),
    }
}

impl From<&FgAbGroup> for GroupJson {
    fn from(g: &FgAbGroup) -> Self {
        GroupJson {
            free_rank: g.free_rank(),
            torsion: g.torsion().iter().map(|p| number(&p.value())).collect(),
            invariant_factors: g.invariant_factors().iter().map(number).collect(),
        }
    }
}

impl GroupJson {
    /// Rebuilds the group from `free_rank` and `torsion`.
    pub fn to_group(&self) -> Result<FgAbGroup, String> {
        let mut parts = Vec::new();
        for v in &self.torsion {
            let n: BigUint = match v {
                Value::Number(x) => x
                    .as_u64()
                    .map(BigUint::from)
                    .ok_or_else(|| format!("bad torsion entry {x}"))?,
                Value::String(s) => s.parse().map_err(|_| format!("bad torsion entry {s}"))?,
                other => return Err(format!("bad torsion entry {other}")),
            };
            match factorize(&n).as_slice() {
                [(p, e)] => parts.push(PrimePower::new(*p, *e).map_err(|e| e.to_string())?),
                _ => return Err(format!("torsion entry {n} is not a prime power")),
            }
        }
        Ok(FgAbGroup::new(self.free_rank, parts))
    }
}
