use std::collections::HashSet;
use std::fmt;

use num_complex::Complex64 as C64;

use super::spec::*;
use crate::history::{TimeGrid, TimeLabel};
use crate::kernel::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    SyntaxError,
    UnknownOperator,
    GridMismatch,
    BadMatrix,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SyntaxError => "syntax error",
            Self::UnknownOperator => "unknown operator",
            Self::GridMismatch => "grid mismatch",
            Self::BadMatrix => "bad matrix",
        })
    }
}

/// Parse failure with the offending line (1-based) and field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}, field `{field}`: {kind}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub field: String,
    pub message: String,
}

fn err<T>(kind: ParseErrorKind, line: usize, field: &str, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { kind, line, field: field.to_string(), message: message.into() })
}

use ParseErrorKind::*;

type PResult<T> = Result<T, ParseError>;

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug, Clone)]
struct Block {
    kind: String,
    arg: Option<String>,
    line: usize,
    entries: Vec<Entry>,
}

impl Block {
    fn field(&self) -> String {
        match &self.arg {
            Some(a) => format!("{} {a}", self.kind),
            None => self.kind.clone(),
        }
    }
}

/// Splits the document into top-level entries and one-level blocks.
fn lex(text: &str) -> PResult<(Vec<Entry>, Vec<Block>)> {
    let mut top = Vec::new();
    let mut blocks = Vec::new();
    let mut open: Option<Block> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if body == "}" {
            match open.take() {
                Some(b) => blocks.push(b),
                None => return err(SyntaxError, line, "}", "closing brace without an open block"),
            }
            continue;
        }
        if let Some(header) = body.strip_suffix('{') {
            if let Some(b) = &open {
                return err(SyntaxError, line, &b.field(), "blocks do not nest");
            }
            let mut words = header.split_whitespace();
            let kind = match words.next() {
                Some(w) if is_ident(w) => w.to_string(),
                _ => return err(SyntaxError, line, header.trim(), "block header needs a kind"),
            };
            let arg = words.next().map(str::to_string);
            if words.next().is_some() {
                return err(SyntaxError, line, &kind, "block header takes at most one argument");
            }
            open = Some(Block { kind, arg, line, entries: Vec::new() });
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return err(SyntaxError, line, body, "expected `key = value`, `kind [name] {` or `}`");
        };
        let key = key.trim();
        if key.is_empty() || key.split_whitespace().count() != 1 {
            return err(SyntaxError, line, key, "key must be a single word");
        }
        let entry = Entry { key: key.to_string(), value: value.trim().to_string(), line };
        match &mut open {
            Some(b) => b.entries.push(entry),
            None => top.push(entry),
        }
    }
    if let Some(b) = open {
        return err(SyntaxError, b.line, &b.field(), "block is never closed");
    }
    Ok((top, blocks))
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// `re`, `re+imi`, `re-imi`, `imi`, `i`, `-i`.
pub fn parse_complex(s: &str) -> Option<C64> {
    let s = s.trim();
    let finite = |v: f64| v.is_finite().then_some(v);
    let real = |t: &str| -> Option<f64> {
        if t.is_empty() || t.contains(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E') {
            return None;
        }
        t.parse::<f64>().ok().and_then(finite)
    };
    let Some(body) = s.strip_suffix('i') else {
        return Some(C64::new(real(s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split =
        (1..bytes.len()).rev().find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (real(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => real(t)?,
    };
    Some(C64::new(re, im))
}

struct Fields<'a> {
    block: &'a Block,
}

impl<'a> Fields<'a> {
    fn new(block: &'a Block, allowed: &[&str]) -> PResult<Self> {
        let mut seen = HashSet::new();
        for e in &block.entries {
            if !allowed.contains(&e.key.as_str()) {
                return err(SyntaxError, e.line, &e.key, format!("unknown field in `{}`", block.field()));
            }
            if e.key != "row" && e.key != "term" && !seen.insert(e.key.as_str()) {
                return err(SyntaxError, e.line, &e.key, "field given twice");
            }
        }
        Ok(Self { block })
    }

    fn get(&mut self, key: &'a str) -> Option<&'a Entry> {
        self.block.entries.iter().find(|e| e.key == key)
    }

    fn require(&mut self, key: &'a str) -> PResult<&'a Entry> {
        let line = self.block.line;
        let field = self.block.field();
        self.get(key).map_or_else(|| err(SyntaxError, line, &format!("{field}.{key}"), "missing field"), Ok)
    }

    fn all(&self, key: &str) -> Vec<&'a Entry> {
        self.block.entries.iter().filter(|e| e.key == key).collect()
    }
}

fn parse_f64(e: &Entry) -> PResult<f64> {
    match e.value.parse::<f64>() {
        Ok(v) if v.is_finite() && !e.value.contains(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E') => Ok(v),
        _ => err(SyntaxError, e.line, &e.key, format!("`{}` is not a finite number", e.value)),
    }
}

fn parse_tol(e: Option<&Entry>, default: f64) -> PResult<f64> {
    let Some(e) = e else { return Ok(default) };
    let v = parse_f64(e)?;
    if v < 0.0 {
        return err(SyntaxError, e.line, &e.key, "tolerance must be non-negative");
    }
    Ok(v)
}

fn parse_uint(e: &Entry, max: u64) -> PResult<u64> {
    match e.value.parse::<u64>() {
        Ok(v) if v <= max => Ok(v),
        _ => err(SyntaxError, e.line, &e.key, format!("`{}` is not an integer in 0..={max}", e.value)),
    }
}

fn parse_bool(e: &Entry) -> PResult<bool> {
    match e.value.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        v => err(SyntaxError, e.line, &e.key, format!("`{v}` is not true/false")),
    }
}

fn parse_label(s: &str, line: usize, field: &str) -> PResult<TimeLabel> {
    s.parse::<TimeLabel>().or_else(|m| err(SyntaxError, line, field, m))
}

fn grid_label(grid: &TimeGrid, s: &str, line: usize, field: &str) -> PResult<TimeLabel> {
    let l = parse_label(s, line, field)?;
    if !grid.contains(l) {
        return err(GridMismatch, line, field, format!("label {l} is not on the grid {grid}"));
    }
    Ok(l)
}

fn single_word(e: &Entry) -> PResult<&str> {
    let mut w = e.value.split_whitespace();
    match (w.next(), w.next()) {
        (Some(v), None) => Ok(v),
        _ => err(SyntaxError, e.line, &e.key, "expected a single word"),
    }
}

struct Ctx {
    grid: TimeGrid,
    operators: Vec<(String, ComplexMatrix)>,
}

impl Ctx {
    fn resolve(&self, name: &str, line: usize, field: &str) -> PResult<ComplexMatrix> {
        self.operators
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m.clone())
            .or_else(|| builtin_operator(name, self.grid.dim()))
            .map_or_else(|| err(UnknownOperator, line, field, format!("`{name}` is not defined")), Ok)
    }
}

/// Parses a scenario document; every failure names its line and field.
pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, ParseError> {
    let (top, blocks) = lex(text)?;

    let mut name = None;
    for e in &top {
        match e.key.as_str() {
            "scenario" => {
                if name.is_some() {
                    return err(SyntaxError, e.line, "scenario", "given twice");
                }
                if e.value.is_empty() || e.value.contains('"') {
                    return err(SyntaxError, e.line, "scenario", "name must be non-empty text without quotes");
                }
                name = Some(e.value.clone());
            }
            "format" => {
                if e.value != FORMAT_VERSION {
                    return err(SyntaxError, e.line, "format", format!("unsupported format `{}`", e.value));
                }
            }
            _ => return err(SyntaxError, e.line, &e.key, "unknown top-level field"),
        }
    }
    let name = name.map_or_else(|| err(SyntaxError, 1, "scenario", "missing `scenario = <name>`"), Ok)?;

    let grids: Vec<&Block> = blocks.iter().filter(|b| b.kind == "grid").collect();
    let grid_block = match grids.as_slice() {
        [g] => *g,
        [] => return err(SyntaxError, 1, "grid", "missing grid block"),
        [_, g, ..] => return err(SyntaxError, g.line, "grid", "grid given twice"),
    };
    let grid = parse_grid(grid_block)?;
    let mut ctx = Ctx { grid, operators: Vec::new() };

    for b in blocks.iter().filter(|b| b.kind == "operator") {
        let (n, m) = parse_operator(b, &ctx)?;
        ctx.operators.push((n, m));
    }

    let mut bridges = vec![None; ctx.grid.len() - 1];
    let mut seen_bridges = false;
    let mut histories: Vec<HistorySpec> = Vec::new();
    let mut analyses = Vec::new();
    for b in &blocks {
        match b.kind.as_str() {
            "grid" | "operator" => {}
            "bridges" => {
                if seen_bridges {
                    return err(SyntaxError, b.line, "bridges", "bridges given twice");
                }
                seen_bridges = true;
                bridges = parse_bridges(b, &ctx)?;
            }
            "history" => {
                let h = parse_history(b, &ctx)?;
                if histories.iter().any(|o| o.name == h.name) {
                    return err(SyntaxError, b.line, &b.field(), "history defined twice");
                }
                histories.push(h);
            }
            "analysis" => analyses.push(b),
            other => return err(SyntaxError, b.line, other, "unknown block kind"),
        }
    }
    let analyses = analyses.into_iter().map(|b| parse_analysis(b, &ctx, &histories)).collect::<PResult<Vec<_>>>()?;

    Ok(ScenarioSpec { name, grid: ctx.grid, operators: ctx.operators, bridges, histories, analyses })
}

fn parse_grid(b: &Block) -> PResult<TimeGrid> {
    if b.arg.is_some() {
        return err(SyntaxError, b.line, "grid", "grid takes no name");
    }
    let mut f = Fields::new(b, &["labels", "dim"])?;
    let dim_e = f.require("dim")?;
    let dim = parse_uint(dim_e, MAX_DIM as u64)? as usize;
    if dim == 0 {
        return err(SyntaxError, dim_e.line, "grid.dim", "dimension must be at least 1");
    }
    let labels_e = f.require("labels")?;
    let labels = labels_e
        .value
        .split_whitespace()
        .map(|w| parse_label(w, labels_e.line, "grid.labels"))
        .collect::<PResult<Vec<_>>>()?;
    if labels.len() < 2 || labels.len() > MAX_TIMES {
        return err(SyntaxError, labels_e.line, "grid.labels", format!("need 2..={MAX_TIMES} labels"));
    }
    TimeGrid::new(labels, dim).or_else(|e| err(SyntaxError, labels_e.line, "grid.labels", e.to_string()))
}

fn parse_operator(b: &Block, ctx: &Ctx) -> PResult<(String, ComplexMatrix)> {
    let field = b.field();
    let name = match &b.arg {
        Some(n) if is_ident(n) && !n.contains('-') => n.clone(),
        _ => return err(SyntaxError, b.line, &field, "operator needs an identifier name"),
    };
    if is_builtin_name(&name) {
        return err(SyntaxError, b.line, &field, "name shadows a built-in operator");
    }
    if ctx.operators.iter().any(|(n, _)| *n == name) {
        return err(SyntaxError, b.line, &field, "operator defined twice");
    }
    let f = Fields::new(b, &["row"])?;
    let rows = f.all("row");
    let dim = ctx.grid.dim();
    if rows.len() != dim {
        return err(BadMatrix, b.line, &field, format!("{} rows for slot dimension {dim}", rows.len()));
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for r in rows {
        let before = entries.len();
        for w in r.value.split_whitespace() {
            match parse_complex(w) {
                Some(z) => entries.push(z),
                None => {
                    return err(BadMatrix, r.line, &format!("{field}.row"), format!("`{w}` is not a complex number"))
                }
            }
        }
        if entries.len() - before != dim {
            return err(
                BadMatrix,
                r.line,
                &format!("{field}.row"),
                format!("{} entries for slot dimension {dim}", entries.len() - before),
            );
        }
    }
    let m = ComplexMatrix::new(dim, entries).or_else(|e| err(BadMatrix, b.line, &field, e.to_string()))?;
    Ok((name, m))
}

fn parse_bridges(b: &Block, ctx: &Ctx) -> PResult<Vec<Option<BridgeSpec>>> {
    let grid = &ctx.grid;
    let mut out = vec![None; grid.len() - 1];
    let allowed: Vec<String> = grid.labels().windows(2).map(|w| format!("{}-{}", w[0], w[1])).collect();
    for e in &b.entries {
        let Some(pos) = allowed.iter().position(|k| *k == e.key) else {
            let (from, to) = e.key.split_once('-').unwrap_or((&e.key, ""));
            for part in [from, to] {
                if let Ok(l) = part.parse::<TimeLabel>() {
                    if !grid.contains(l) {
                        return err(GridMismatch, e.line, &e.key, format!("label {l} is not on the grid {grid}"));
                    }
                }
            }
            return err(GridMismatch, e.line, &e.key, "bridges join adjacent grid labels, e.g. `t0-t1`");
        };
        if out[pos].is_some() {
            return err(SyntaxError, e.line, &e.key, "bridge given twice");
        }
        let words: Vec<&str> = e.value.split_whitespace().collect();
        let spec = match words.as_slice() {
            ["unitary", op] => {
                let m = ctx.resolve(op, e.line, &e.key)?;
                if !m.is_unitary(1e-9) {
                    return err(BadMatrix, e.line, &e.key, format!("`{op}` is not unitary"));
                }
                BridgeSpec::Unitary(op.to_string())
            }
            ["hamiltonian", op, "duration", t] => {
                let m = ctx.resolve(op, e.line, &e.key)?;
                if !m.is_hermitian(1e-9) {
                    return err(BadMatrix, e.line, &e.key, format!("`{op}` is not Hermitian"));
                }
                let duration = match t.parse::<f64>() {
                    Ok(v) if v.is_finite() && v.abs() <= 1e6 => v,
                    _ => return err(SyntaxError, e.line, &e.key, format!("bad duration `{t}`")),
                };
                BridgeSpec::Hamiltonian { operator: op.to_string(), duration }
            }
            _ => return err(SyntaxError, e.line, &e.key, "expected `unitary NAME` or `hamiltonian NAME duration T`"),
        };
        out[pos] = Some(spec);
    }
    Ok(out)
}

fn parse_history(b: &Block, ctx: &Ctx) -> PResult<HistorySpec> {
    let field = b.field();
    let name = match &b.arg {
        Some(n) if is_ident(n) => n.clone(),
        _ => return err(SyntaxError, b.line, &field, "history needs a name"),
    };
    let f = Fields::new(b, &["term"])?;
    let mut labels: Option<Vec<TimeLabel>> = None;
    let mut terms = Vec::new();
    for e in f.all("term") {
        let mut words = e.value.split_whitespace();
        let amp_text = words.next().unwrap_or("");
        let Some(amp) = parse_complex(amp_text) else {
            return err(SyntaxError, e.line, "term", format!("`{amp_text}` is not a complex amplitude"));
        };
        let mut slots: Vec<(TimeLabel, String)> = Vec::new();
        for w in words {
            let Some((l, op)) = w.split_once(':') else {
                return err(SyntaxError, e.line, "term", format!("slot `{w}` must look like t<k>:NAME"));
            };
            let label = grid_label(&ctx.grid, l, e.line, "term")?;
            ctx.resolve(op, e.line, "term")?;
            if slots.iter().any(|(o, _)| *o == label) {
                return err(SyntaxError, e.line, "term", format!("label {label} appears twice"));
            }
            slots.push((label, op.to_string()));
        }
        if slots.is_empty() {
            return err(SyntaxError, e.line, "term", "term has no slots");
        }
        slots.sort_by_key(|(l, _)| *l);
        let these: Vec<TimeLabel> = slots.iter().map(|(l, _)| *l).collect();
        match &labels {
            None => labels = Some(these),
            Some(ls) if *ls != these => {
                return err(GridMismatch, e.line, "term", "every term must cover the same labels");
            }
            _ => {}
        }
        terms.push((amp, slots.into_iter().map(|(_, o)| o).collect()));
    }
    let Some(labels) = labels else {
        return err(SyntaxError, b.line, &field, "history has no terms");
    };
    Ok(HistorySpec { name, labels, terms })
}

fn require_history(histories: &[HistorySpec], name: &str, line: usize, field: &str) -> PResult<()> {
    if histories.iter().any(|h| h.name == name) {
        Ok(())
    } else {
        err(SyntaxError, line, field, format!("history `{name}` is not defined"))
    }
}

fn parse_analysis(b: &Block, ctx: &Ctx, histories: &[HistorySpec]) -> PResult<AnalysisSpec> {
    let kind = b.arg.as_deref().unwrap_or("");
    match kind {
        "consistency" => {
            let mut f = Fields::new(b, &["histories", "coefficients", "tol"])?;
            let he = f.require("histories")?;
            let names: Vec<String> = he.value.split_whitespace().map(str::to_string).collect();
            if names.is_empty() {
                return err(SyntaxError, he.line, "histories", "list at least one history");
            }
            for n in &names {
                require_history(histories, n, he.line, "histories")?;
            }
            let coefficients = match f.get("coefficients") {
                None => None,
                Some(ce) => {
                    let cs = ce
                        .value
                        .split_whitespace()
                        .map(|w| {
                            parse_complex(w)
                                .map_or_else(|| err(SyntaxError, ce.line, "coefficients", format!("bad `{w}`")), Ok)
                        })
                        .collect::<PResult<Vec<_>>>()?;
                    if cs.len() != names.len() {
                        return err(SyntaxError, ce.line, "coefficients", "one coefficient per history");
                    }
                    Some(cs)
                }
            };
            let tol = parse_tol(f.get("tol"), 1e-10)?;
            Ok(AnalysisSpec::Consistency(ConsistencySpec { histories: names, coefficients, tol }))
        }
        "reduce" => {
            let mut f =
                Fields::new(b, &["history", "trace", "basis", "target", "expect_purity", "expect_fidelity", "tol"])?;
            let he = f.require("history")?;
            let history = single_word(he)?.to_string();
            require_history(histories, &history, he.line, "history")?;
            let te = f.require("trace")?;
            let trace = te
                .value
                .split_whitespace()
                .map(|w| grid_label(&ctx.grid, w, te.line, "trace"))
                .collect::<PResult<Vec<_>>>()?;
            if trace.is_empty() {
                return err(SyntaxError, te.line, "trace", "list the labels to trace out");
            }
            let basis = match f.get("basis") {
                None => BasisSpec::MatrixUnits,
                Some(e) => match e.value.as_str() {
                    "matrix-units" => BasisSpec::MatrixUnits,
                    "computational" => BasisSpec::Computational,
                    v => {
                        let names: Vec<String> = v.split_whitespace().map(str::to_string).collect();
                        for n in &names {
                            require_history(histories, n, e.line, "basis")?;
                        }
                        BasisSpec::Histories(names)
                    }
                },
            };
            let target = match f.get("target") {
                None => None,
                Some(e) => {
                    let t = single_word(e)?.to_string();
                    require_history(histories, &t, e.line, "target")?;
                    Some(t)
                }
            };
            let expect_purity = f.get("expect_purity").map(parse_f64).transpose()?;
            let expect_fidelity = f.get("expect_fidelity").map(parse_f64).transpose()?;
            let tol = parse_tol(f.get("tol"), 1e-10)?;
            Ok(AnalysisSpec::Reduce(ReduceSpec { history, trace, basis, target, expect_purity, expect_fidelity, tol }))
        }
        "lgi" => {
            let mut f = Fields::new(
                b,
                &[
                    "mode",
                    "a1",
                    "a2",
                    "b1",
                    "b2",
                    "at",
                    "rho",
                    "expected",
                    "tol",
                    "restarts",
                    "seed",
                    "optimize_state",
                    "restrict_diagonal",
                ],
            )?;
            let mode_text = f.get("mode").map_or("settings", |e| e.value.as_str());
            let mode = match mode_text {
                "settings" => {
                    let mut names: [String; 4] = Default::default();
                    for (slot, key) in names.iter_mut().zip(["a1", "a2", "b1", "b2"]) {
                        let e = f.require(key)?;
                        let n = single_word(e)?;
                        let m = ctx.resolve(n, e.line, key)?;
                        let sq = &m * &m;
                        if !m.is_hermitian(1e-10)
                            || sq.distance(&ComplexMatrix::identity(m.dim())).map_or(true, |d| d > 1e-10)
                        {
                            return err(BadMatrix, e.line, key, format!("`{n}` is not a dichotomic observable"));
                        }
                        *slot = n.to_string();
                    }
                    LgiMode::Settings(names)
                }
                "seesaw" => LgiMode::Seesaw {
                    restarts: f.get("restarts").map_or(Ok(16), |e| parse_uint(e, 100_000))? as usize,
                    seed: f.get("seed").map_or(Ok(0), |e| parse_uint(e, u64::MAX))?,
                    optimize_state: f.get("optimize_state").map_or(Ok(false), parse_bool)?,
                    restrict_diagonal: f.get("restrict_diagonal").map_or(Ok(false), parse_bool)?,
                },
                other => {
                    let line = f.get("mode").map_or(b.line, |e| e.line);
                    return err(SyntaxError, line, "mode", format!("unknown lgi mode `{other}`"));
                }
            };
            if let LgiMode::Settings(_) = mode {
                for key in ["restarts", "seed", "optimize_state", "restrict_diagonal"] {
                    if let Some(e) = f.get(key) {
                        return err(SyntaxError, e.line, key, "only valid with mode = seesaw");
                    }
                }
            } else {
                for key in ["a1", "a2", "b1", "b2"] {
                    if let Some(e) = f.get(key) {
                        return err(SyntaxError, e.line, key, "only valid with mode = settings");
                    }
                }
            }
            let at = match f.get("at") {
                None => None,
                Some(e) => {
                    let ls: Vec<&str> = e.value.split_whitespace().collect();
                    let [a, bl] = ls.as_slice() else {
                        return err(SyntaxError, e.line, "at", "expected two labels");
                    };
                    let (a, bl) = (grid_label(&ctx.grid, a, e.line, "at")?, grid_label(&ctx.grid, bl, e.line, "at")?);
                    if a >= bl {
                        return err(GridMismatch, e.line, "at", "A must precede B");
                    }
                    Some((a, bl))
                }
            };
            let rho = match f.get("rho") {
                None => None,
                Some(e) => {
                    let n = single_word(e)?;
                    let m = ctx.resolve(n, e.line, "rho")?;
                    if !m.is_density(1e-9) {
                        return err(BadMatrix, e.line, "rho", format!("`{n}` is not a density matrix"));
                    }
                    Some(n.to_string())
                }
            };
            let expected = f.get("expected").map(parse_f64).transpose()?;
            let tol = parse_tol(f.get("tol"), 1e-6)?;
            Ok(AnalysisSpec::Lgi(LgiSpec { mode, at, rho, expected, tol }))
        }
        "monogamy" => {
            let mut f = Fields::new(b, &["dim", "restarts", "seed", "threshold", "expected", "tol"])?;
            let dim = f.get("dim").map_or(Ok(2), |e| parse_uint(e, 8))? as usize;
            if dim < 2 {
                return err(
                    SyntaxError,
                    f.get("dim").map_or(b.line, |e| e.line),
                    "dim",
                    "dimension must be at least 2",
                );
            }
            let restarts = f.get("restarts").map_or(Ok(64), |e| parse_uint(e, 100_000))? as usize;
            if restarts == 0 {
                return err(SyntaxError, f.get("restarts").map_or(b.line, |e| e.line), "restarts", "need at least one");
            }
            let seed = f.get("seed").map_or(Ok(0), |e| parse_uint(e, u64::MAX))?;
            let threshold = f.get("threshold").map_or(Ok(0.95), parse_f64)?;
            let expected = f.get("expected").map(parse_f64).transpose()?;
            let tol = parse_tol(f.get("tol"), 0.0)?;
            Ok(AnalysisSpec::Monogamy(MonogamySpec { dim, restarts, seed, threshold, expected, tol }))
        }
        "mz-demo" => {
            let mut f = Fields::new(b, &["tol"])?;
            let tol = parse_tol(f.get("tol"), 1e-10)?;
            Ok(AnalysisSpec::MzDemo(MzDemoSpec { tol }))
        }
        other => err(SyntaxError, b.line, &format!("analysis {other}"), "unknown analysis kind"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.5"), Some(C64::new(0.5, 0.0)));
        assert_eq!(parse_complex("1+2i"), Some(C64::new(1.0, 2.0)));
        assert_eq!(parse_complex("-1e-3-2.5e+1i"), Some(C64::new(-1e-3, -25.0)));
        assert_eq!(parse_complex("-i"), Some(C64::new(0.0, -1.0)));
        assert_eq!(parse_complex("3i"), Some(C64::new(0.0, 3.0)));
        assert_eq!(parse_complex("nan"), None);
        assert_eq!(parse_complex("inf"), None);
        assert_eq!(parse_complex("1+"), None);
        assert_eq!(parse_complex(""), None);
        assert_eq!(parse_complex("1+2j"), None);
    }

    const MINIMAL: &str = "
scenario = minimal
grid {
  labels = t1 t2
  dim = 2
}
analysis lgi {
  a1 = Z
  a2 = Z
  b1 = Z
  b2 = Z
  expected = 2
}
";

    #[test]
    fn minimal_document() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.name, "minimal");
        assert_eq!(s.analyses.len(), 1);
        assert_eq!(s.bridges, vec![None]);
    }

    #[test]
    fn undeclared_label_is_named() {
        let doc = MINIMAL.replace("analysis lgi {", "history h {\n  term = 1 t7:Z\n}\nanalysis lgi {");
        let e = parse_scenario(&doc).unwrap_err();
        assert_eq!(e.kind, GridMismatch);
        assert!(e.message.contains("t7"));
        assert_eq!(e.line, 8);
    }

    #[test]
    fn diagnostics_carry_kind_and_line() {
        let e = parse_scenario(&MINIMAL.replace("a2 = Z", "a2 = Q")).unwrap_err();
        assert_eq!((e.kind, e.line, e.field.as_str()), (UnknownOperator, 9, "a2"));
        let e = parse_scenario(&MINIMAL.replace("dim = 2", "dim = 2\n}\n")).unwrap_err();
        assert_eq!(e.kind, SyntaxError);
        let doc = MINIMAL.replace("analysis lgi {", "operator M {\n  row = 1 0\n}\nanalysis lgi {");
        assert_eq!(parse_scenario(&doc).unwrap_err().kind, BadMatrix);
        let e = parse_scenario(&MINIMAL.replace("expected = 2", "bogus = 1")).unwrap_err();
        assert_eq!((e.kind, e.field.as_str()), (SyntaxError, "bogus"));
    }
}
