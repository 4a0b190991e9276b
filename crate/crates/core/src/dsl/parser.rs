use std::collections::{HashMap, HashSet, VecDeque};

use thiserror::Error;

use super::{BinOp, Command, Expr, ProgramCode, Span, StateId, Transition, Value};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl ParseError {
    fn new(span: Span, message: impl Into<String>) -> Self {
        Self {
            span,
            message: message.into(),
        }
    }

    /// `file:line:col: message`
    pub fn render(&self, file: &str) -> String {
        format!("{}:{}: {}", file, self.span, self.message)
    }
}

type PResult<T> = Result<T, ParseError>;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(Value),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

// Longest symbols first so that `:=` wins over `:`.
const SYMBOLS: &[&str] = &[
    ":=", "==", "!=", "&&", "||", "(", ")", "{", "}", "[", "]", ",", ";", ":", "+", "-", "*", "%",
    "<", "=",
];

fn lex(src: &str) -> PResult<Vec<(Tok, Span)>> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let span = Span::new(line, col);
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        let rest = &src[i..];
        if rest.starts_with("//") || c == '#' {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    ident.push(c);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(ident), span));
            continue;
        }
        if c.is_ascii_digit() {
            let mut value: u64 = 0;
            while let Some(&(_, c)) = chars.peek() {
                if let Some(d) = c.to_digit(10) {
                    value = value.saturating_mul(10).saturating_add(u64::from(d));
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            let value = Value::try_from(value)
                .map_err(|_| ParseError::new(span, "integer literal too large"))?;
            out.push((Tok::Int(value), span));
            continue;
        }
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                for _ in 0..sym.len() {
                    chars.next();
                }
                col += sym.len() as u32;
                out.push((Tok::Sym(sym), span));
            }
            None => return Err(ParseError::new(span, format!("unexpected character `{c}`"))),
        }
    }
    out.push((Tok::Eof, Span::new(line, col)));
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "regs", "const", "skip", "barrier", "assume", "assert", "read", "write", "mem", "goto", "if",
    "else", "while", "choice", "or", "myrank", "nprocs",
];

/// Control point while building: either a concrete state, or a set of
/// edges whose common target has not been allocated yet.
enum Point {
    State(StateId),
    Pending(Vec<(StateId, Command, Span)>),
}

#[derive(Default)]
struct Builder {
    states: usize,
    edges: Vec<(StateId, Command, StateId, Span)>,
    eps: Vec<(StateId, StateId)>,
    labels: HashMap<String, (StateId, Span)>,
    defined: HashSet<String>,
}

impl Builder {
    fn fresh(&mut self) -> StateId {
        self.states += 1;
        self.states - 1
    }

    fn label_state(&mut self, name: &str, span: Span) -> StateId {
        if let Some(&(s, _)) = self.labels.get(name) {
            return s;
        }
        let s = self.fresh();
        self.labels.insert(name.to_string(), (s, span));
        s
    }

    fn materialize(&mut self, p: Point) -> StateId {
        match p {
            Point::State(s) => s,
            Point::Pending(edges) => {
                let t = self.fresh();
                for (src, cmd, span) in edges {
                    self.edges.push((src, cmd, t, span));
                }
                t
            }
        }
    }

    /// Connects the point to `target`: pending edges land on it directly,
    /// a concrete state gets an epsilon edge.
    fn resolve(&mut self, p: Point, target: StateId) {
        match p {
            Point::State(s) => {
                if s != target {
                    self.eps.push((s, target));
                }
            }
            Point::Pending(edges) => {
                for (src, cmd, span) in edges {
                    self.edges.push((src, cmd, target, span));
                }
            }
        }
    }

    fn emit(&mut self, p: Point, cmd: Command, span: Span) -> Point {
        let src = self.materialize(p);
        Point::Pending(vec![(src, cmd, span)])
    }

    fn join(&mut self, points: Vec<Point>) -> Point {
        if points.iter().all(|p| matches!(p, Point::Pending(_))) {
            let mut all = Vec::new();
            for p in points {
                if let Point::Pending(es) = p {
                    all.extend(es);
                }
            }
            return Point::Pending(all);
        }
        let j = self.fresh();
        for p in points {
            self.resolve(p, j);
        }
        Point::State(j)
    }

    /// Removes epsilon edges, prunes unreachable states and renumbers the
    /// rest breadth-first from the initial state.
    fn finish(self, initial: StateId, registers: Vec<String>) -> ProgramCode {
        let n = self.states;
        let mut eps_out = vec![Vec::new(); n];
        for &(a, b) in &self.eps {
            eps_out[a].push(b);
        }
        let mut direct: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, e) in self.edges.iter().enumerate() {
            direct[e.0].push(i);
        }
        // out[s] = direct edges of every state in the epsilon closure of s
        let mut out: Vec<Vec<(Command, StateId, Span)>> = vec![Vec::new(); n];
        for s in 0..n {
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([s]);
            seen[s] = true;
            while let Some(t) = queue.pop_front() {
                for &ei in &direct[t] {
                    let (_, cmd, tgt, span) = &self.edges[ei];
                    if !out[s].iter().any(|(c, g, _)| c == cmd && g == tgt) {
                        out[s].push((cmd.clone(), *tgt, *span));
                    }
                }
                for &u in &eps_out[t] {
                    if !seen[u] {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
        let mut number = vec![usize::MAX; n];
        let mut order = vec![initial];
        number[initial] = 0;
        let mut i = 0;
        while i < order.len() {
            let s = order[i];
            for (_, t, _) in &out[s] {
                if number[*t] == usize::MAX {
                    number[*t] = order.len();
                    order.push(*t);
                }
            }
            i += 1;
        }
        let mut transitions = Vec::new();
        for &s in &order {
            for (cmd, t, span) in &out[s] {
                transitions.push(Transition {
                    source: number[s],
                    command: cmd.clone(),
                    target: number[*t],
                    span: *span,
                });
            }
        }
        ProgramCode {
            state_count: order.len(),
            initial: 0,
            transitions,
            registers,
        }
    }
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    registers: Vec<String>,
    consts: HashMap<String, Value>,
    temps: usize,
    depth: usize,
    b: Builder,
}

/// Parses program text into its control automaton.
///
/// Labels, `goto`, `if`/`else`, `while` and `choice`/`or` are compiled into
/// assume-guarded edges; `assert(e)` becomes a load of every `mem[..]` read
/// in `e` followed by an `assume`.
pub fn parse_program(text: &str) -> Result<ProgramCode, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        registers: Vec::new(),
        consts: HashMap::new(),
        temps: 0,
        depth: 0,
        b: Builder::default(),
    };
    let initial = p.b.fresh();
    let mut point = Point::State(initial);
    while p.peek() != &Tok::Eof {
        point = p.statement(point)?;
    }
    let mut undefined: Vec<_> =
        p.b.labels
            .iter()
            .filter(|(name, _)| !p.b.defined.contains(*name))
            .map(|(n, (_, s))| (*s, n.clone()))
            .collect();
    undefined.sort();
    if let Some((span, name)) = undefined.into_iter().next() {
        return Err(ParseError::new(span, format!("undefined label `{name}`")));
    }
    if let Point::Pending(edges) = point {
        if !edges.is_empty() {
            p.b.materialize(Point::Pending(edges));
        }
    }
    let registers = std::mem::take(&mut p.registers);
    Ok(p.b.finish(initial, registers))
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn expect_sym(&mut self, s: &str) -> PResult<Span> {
        if self.is_sym(s) {
            Ok(self.bump().1)
        } else {
            Err(ParseError::new(
                self.span(),
                format!("expected `{s}`, found {}", self.peek().describe()),
            ))
        }
    }

    fn expect_ident(&mut self) -> PResult<(String, Span)> {
        match self.bump() {
            (Tok::Ident(s), span) if !KEYWORDS.contains(&s.as_str()) => Ok((s, span)),
            (t, span) => Err(ParseError::new(
                span,
                format!("expected identifier, found {}", t.describe()),
            )),
        }
    }

    fn expect_int(&mut self) -> PResult<Value> {
        match self.bump() {
            (Tok::Int(v), _) => Ok(v),
            (t, span) => Err(ParseError::new(
                span,
                format!("expected integer, found {}", t.describe()),
            )),
        }
    }

    fn is_register(&self, name: &str) -> bool {
        self.registers.iter().any(|r| r == name)
    }

    fn declare(&mut self, name: String, span: Span) -> PResult<()> {
        if KEYWORDS.contains(&name.as_str()) {
            return Err(ParseError::new(span, format!("`{name}` is a keyword")));
        }
        if self.is_register(&name) || self.consts.contains_key(&name) {
            return Err(ParseError::new(span, format!("`{name}` declared twice")));
        }
        Ok(())
    }

    fn block(&mut self, mut point: Point) -> PResult<Point> {
        self.expect_sym("{")?;
        self.depth += 1;
        while !self.is_sym("}") {
            if self.peek() == &Tok::Eof {
                return Err(ParseError::new(self.span(), "unclosed block, expected `}`"));
            }
            point = self.statement(point)?;
        }
        self.bump();
        self.depth -= 1;
        Ok(point)
    }

    fn statement(&mut self, point: Point) -> PResult<Point> {
        let span = self.span();
        if self.is_sym("{") {
            return self.block(point);
        }
        if self.is_sym(";") {
            self.bump();
            return Ok(point);
        }
        let word = match self.peek().clone() {
            Tok::Ident(w) => w,
            t => {
                return Err(ParseError::new(
                    span,
                    format!("expected a statement, found {}", t.describe()),
                ))
            }
        };
        match word.as_str() {
            "regs" => {
                self.bump();
                loop {
                    let (name, s) = self.expect_ident()?;
                    self.declare(name.clone(), s)?;
                    self.registers.push(name);
                    if self.is_sym(",") {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect_sym(";")?;
                Ok(point)
            }
            "const" => {
                self.bump();
                loop {
                    let (name, s) = self.expect_ident()?;
                    self.declare(name.clone(), s)?;
                    self.expect_sym("=")?;
                    let v = self.expect_int()?;
                    self.consts.insert(name, v);
                    if self.is_sym(",") {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect_sym(";")?;
                Ok(point)
            }
            "skip" => {
                self.bump();
                self.expect_sym(";")?;
                Ok(point)
            }
            "barrier" => {
                self.bump();
                self.expect_sym(";")?;
                Ok(self.b.emit(point, Command::Barrier, span))
            }
            "assume" => {
                self.bump();
                let e = self.paren_expr(false)?;
                self.expect_sym(";")?;
                Ok(self.b.emit(point, Command::Assume(e), span))
            }
            "assert" => {
                self.bump();
                self.expect_sym("(")?;
                let mut loads = Vec::new();
                let e = self.expr_with_mem(&mut loads)?;
                self.expect_sym(")")?;
                self.expect_sym(";")?;
                let mut point = point;
                for (reg, addr) in loads {
                    point = self.b.emit(point, Command::Load { reg, addr }, span);
                }
                Ok(self.b.emit(point, Command::Assume(e), span))
            }
            "read" | "write" => {
                self.bump();
                let args = self.call_args()?;
                if args.len() != 4 {
                    return Err(ParseError::new(
                        span,
                        format!(
                            "`{word}` expects 4 arguments (local, rank, remote, queue), found {}",
                            args.len()
                        ),
                    ));
                }
                self.expect_sym(";")?;
                let mut it = args.into_iter();
                let (local, rank, remote, queue) = (
                    it.next().unwrap(),
                    it.next().unwrap(),
                    it.next().unwrap(),
                    it.next().unwrap(),
                );
                let cmd = if word == "read" {
                    Command::Read {
                        local,
                        rank,
                        remote,
                        queue,
                    }
                } else {
                    Command::Write {
                        local,
                        rank,
                        remote,
                        queue,
                    }
                };
                Ok(self.b.emit(point, cmd, span))
            }
            "mem" => {
                self.bump();
                self.expect_sym("[")?;
                let addr = self.expr(false)?;
                self.expect_sym("]")?;
                self.expect_sym(":=")?;
                let value = self.expr(false)?;
                self.expect_sym(";")?;
                Ok(self.b.emit(point, Command::Store { addr, value }, span))
            }
            "goto" => {
                self.bump();
                let mut targets = Vec::new();
                loop {
                    let (name, s) = self.expect_ident()?;
                    targets.push(self.b.label_state(&name, s));
                    if self.is_sym(",") {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect_sym(";")?;
                match point {
                    Point::State(s) => {
                        for t in targets {
                            self.b.resolve(Point::State(s), t);
                        }
                    }
                    Point::Pending(edges) => {
                        for t in targets {
                            self.b.resolve(Point::Pending(edges.clone()), t);
                        }
                    }
                }
                Ok(Point::Pending(Vec::new()))
            }
            "if" => {
                self.bump();
                let cond = self.paren_expr(false)?;
                let src = self.b.materialize(point);
                let negated = Expr::bin(BinOp::Eq, cond.clone(), Expr::Const(0));
                let then_end =
                    self.block(Point::Pending(vec![(src, Command::Assume(cond), span)]))?;
                let else_start = Point::Pending(vec![(src, Command::Assume(negated), span)]);
                let else_end = if self.is_kw("else") {
                    self.bump();
                    if self.is_kw("if") {
                        self.statement(else_start)?
                    } else {
                        self.block(else_start)?
                    }
                } else {
                    else_start
                };
                Ok(self.b.join(vec![then_end, else_end]))
            }
            "while" => {
                self.bump();
                let cond = self.paren_expr(false)?;
                let head = self.b.materialize(point);
                let negated = Expr::bin(BinOp::Eq, cond.clone(), Expr::Const(0));
                let body_end =
                    self.block(Point::Pending(vec![(head, Command::Assume(cond), span)]))?;
                self.b.resolve(body_end, head);
                Ok(Point::Pending(vec![(head, Command::Assume(negated), span)]))
            }
            "choice" => {
                self.bump();
                let src = self.b.materialize(point);
                let mut ends = vec![self.block(Point::State(src))?];
                if !self.is_kw("or") {
                    return Err(ParseError::new(
                        self.span(),
                        "`choice` needs at least one `or` branch",
                    ));
                }
                while self.is_kw("or") {
                    self.bump();
                    ends.push(self.block(Point::State(src))?);
                }
                Ok(self.b.join(ends))
            }
            "else" | "or" => Err(ParseError::new(
                span,
                format!("`{word}` without a matching statement"),
            )),
            _ if self.peek_at(1) == &Tok::Sym(":") => {
                let (name, s) = self.expect_ident()?;
                self.bump();
                // A label at the very start of the program names the entry state.
                let at_entry = self.depth == 0
                    && matches!(point, Point::State(0))
                    && self.b.edges.is_empty()
                    && self.b.eps.is_empty()
                    && !self.b.labels.contains_key(&name);
                if at_entry {
                    self.b.labels.insert(name.clone(), (0, s));
                }
                let target = self.b.label_state(&name, s);
                self.b.defined.insert(name);
                match point {
                    Point::State(cur) if cur != target => {
                        self.b.eps.push((cur, target));
                    }
                    other => self.b.resolve(other, target),
                }
                Ok(Point::State(target))
            }
            _ if self.peek_at(1) == &Tok::Sym(":=") => {
                let (name, s) = self.bump();
                let Tok::Ident(name) = name else {
                    unreachable!()
                };
                if !self.is_register(&name) {
                    return Err(ParseError::new(s, format!("undeclared register `{name}`")));
                }
                self.bump();
                let cmd = if self.is_kw("mem") && self.peek_at(1) == &Tok::Sym("[") {
                    self.bump();
                    self.bump();
                    let addr = self.expr(false)?;
                    self.expect_sym("]")?;
                    Command::Load { reg: name, addr }
                } else {
                    Command::Assign {
                        reg: name,
                        value: self.expr(false)?,
                    }
                };
                self.expect_sym(";")?;
                Ok(self.b.emit(point, cmd, span))
            }
            _ => Err(ParseError::new(span, format!("unknown command `{word}`"))),
        }
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if !self.is_sym(")") {
            loop {
                args.push(self.expr(false)?);
                if self.is_sym(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        Ok(args)
    }

    fn paren_expr(&mut self, allow_mem: bool) -> PResult<Expr> {
        self.expect_sym("(")?;
        let e = self.expr(allow_mem)?;
        self.expect_sym(")")?;
        Ok(e)
    }

    fn expr_with_mem(&mut self, loads: &mut Vec<(String, Expr)>) -> PResult<Expr> {
        let e = self.expr(true)?;
        Ok(self.lower_mem(e, loads))
    }

    fn lower_mem(&mut self, e: Expr, loads: &mut Vec<(String, Expr)>) -> Expr {
        match e {
            Expr::Bin(BinOp::Mod, l, r) if matches!(*l, Expr::Reg(ref n) if n == MEM_MARKER) => {
                let addr = self.lower_mem(*r, loads);
                let name = format!("__t{}", self.temps);
                self.temps += 1;
                self.registers.push(name.clone());
                loads.push((name.clone(), addr));
                Expr::Reg(name)
            }
            Expr::Bin(op, l, r) => {
                let l = self.lower_mem(*l, loads);
                let r = self.lower_mem(*r, loads);
                Expr::bin(op, l, r)
            }
            other => other,
        }
    }

    fn expr(&mut self, allow_mem: bool) -> PResult<Expr> {
        self.binary(0, allow_mem)
    }

    fn binary(&mut self, level: usize, allow_mem: bool) -> PResult<Expr> {
        const LEVELS: &[&[(&str, BinOp)]] = &[
            &[("||", BinOp::Or)],
            &[("&&", BinOp::And)],
            &[("==", BinOp::Eq), ("!=", BinOp::Ne), ("<", BinOp::Lt)],
            &[("+", BinOp::Add), ("-", BinOp::Sub)],
            &[("*", BinOp::Mul), ("%", BinOp::Mod)],
        ];
        if level == LEVELS.len() {
            return self.atom(allow_mem);
        }
        let mut lhs = self.binary(level + 1, allow_mem)?;
        loop {
            let op = LEVELS[level]
                .iter()
                .find(|(s, _)| self.is_sym(s))
                .map(|(_, op)| *op);
            match op {
                Some(op) => {
                    self.bump();
                    let rhs = self.binary(level + 1, allow_mem)?;
                    lhs = Expr::bin(op, lhs, rhs);
                }
                None => return Ok(lhs),
            }
        }
    }

    fn atom(&mut self, allow_mem: bool) -> PResult<Expr> {
        let (tok, span) = self.bump();
        match tok {
            Tok::Int(v) => Ok(Expr::Const(v)),
            Tok::Sym("(") => {
                let e = self.expr(allow_mem)?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(w) => match w.as_str() {
                "myrank" => Ok(Expr::MyRank),
                "nprocs" => Ok(Expr::NumProcs),
                "mem" if allow_mem => {
                    self.expect_sym("[")?;
                    let addr = self.expr(true)?;
                    self.expect_sym("]")?;
                    // Placeholder node, lowered into a load by `lower_mem`.
                    Ok(Expr::bin(BinOp::Mod, Expr::Reg(MEM_MARKER.into()), addr))
                }
                "mem" => Err(ParseError::new(
                    span,
                    "memory reads are only allowed as `reg := mem[..]` or inside `assert`",
                )),
                _ if KEYWORDS.contains(&w.as_str()) => Err(ParseError::new(
                    span,
                    format!("unexpected keyword `{w}` in expression"),
                )),
                _ => {
                    if let Some(v) = self.consts.get(&w) {
                        Ok(Expr::Const(*v))
                    } else if self.is_register(&w) {
                        Ok(Expr::Reg(w))
                    } else {
                        Err(ParseError::new(span, format!("undeclared register `{w}`")))
                    }
                }
            },
            t => Err(ParseError::new(
                span,
                format!("expected an expression, found {}", t.describe()),
            )),
        }
    }
}

// Not a valid identifier, so it can never clash with a declared register.
const MEM_MARKER: &str = "<mem>";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::Command;

    #[test]
    fn empty_program_has_one_state() {
        let p = parse_program("").unwrap();
        assert_eq!(p, ProgramCode::empty());
        let p = parse_program("  // only a comment\n# another\n").unwrap();
        assert_eq!(p.state_count, 1);
    }

    #[test]
    fn onetoone_is_a_six_edge_chain() {
        let p = parse_program(crate::corpus::ONETOONE).unwrap();
        assert_eq!(p.state_count, 7);
        assert_eq!(p.transitions.len(), 6);
        for (i, t) in p.transitions.iter().enumerate() {
            assert_eq!((t.source, t.target), (i, i + 1));
        }
        assert!(matches!(p.transitions[2].command, Command::Write { .. }));
        assert!(matches!(p.transitions[3].command, Command::Barrier));
        assert!(matches!(p.transitions[4].command, Command::Load { .. }));
        assert!(matches!(p.transitions[5].command, Command::Assume(_)));
    }

    #[test]
    fn wrong_arity_is_a_syntax_error() {
        let err = parse_program("const x = 0;\nread(x);").unwrap_err();
        assert_eq!(err.span, Span::new(2, 1));
        assert!(
            err.message.contains("expects 4 arguments"),
            "{}",
            err.message
        );
    }

    #[test]
    fn undeclared_register_and_unknown_command() {
        let err = parse_program("r := 1;").unwrap_err();
        assert!(err.message.contains("undeclared register `r`"));
        let err = parse_program("regs r;\n  frob(r);").unwrap_err();
        assert_eq!(err.span, Span::new(2, 3));
        assert!(err.message.contains("unknown command `frob`"));
        let err = parse_program("regs r; r := r + q;").unwrap_err();
        assert!(err.message.contains("undeclared register `q`"));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_program("barrier\nbarrier;").unwrap_err();
        assert_eq!(err.span, Span::new(2, 1));
        let err = parse_program("goto nowhere;").unwrap_err();
        assert!(err.message.contains("undefined label"));
        let err = parse_program("mem[0] := $;").unwrap_err();
        assert_eq!(err.span, Span::new(1, 11));
    }

    #[test]
    fn while_loop_builds_a_cycle() {
        let p = parse_program("regs r; while (r == 0) { r := mem[0]; } barrier;").unwrap();
        // head -assume-> body -load-> head, head -assume(neg)-> exit -barrier-> end
        assert_eq!(p.state_count, 4);
        assert_eq!(p.transitions.len(), 4);
        let load = p
            .transitions
            .iter()
            .find(|t| matches!(t.command, Command::Load { .. }))
            .unwrap();
        assert_eq!(load.target, 0);
    }

    #[test]
    fn labels_and_goto_loop() {
        let p = parse_program("top: read(0, 1, 0, 0); goto top;").unwrap();
        assert_eq!(p.state_count, 1);
        assert_eq!(p.transitions.len(), 1);
        assert_eq!((p.transitions[0].source, p.transitions[0].target), (0, 0));
        // a label after the first command gets its own state
        let p = parse_program("barrier; top: read(0, 1, 0, 0); goto top;").unwrap();
        assert_eq!(p.state_count, 2);
        assert_eq!((p.transitions[1].source, p.transitions[1].target), (1, 1));
    }

    #[test]
    fn choice_with_empty_branch_skips() {
        let p = parse_program("choice { barrier; } or { } mem[0] := 1;").unwrap();
        // from q0: barrier to q1 and the store directly (empty branch)
        let from0: Vec<_> = p.outgoing(0).collect();
        assert_eq!(from0.len(), 2);
        assert!(!p.transitions.iter().any(|t| t.target == 0));
    }

    #[test]
    fn assert_desugars_to_load_and_assume() {
        let p = parse_program("const y = 1; assert(mem[y] == 1);").unwrap();
        assert_eq!(p.registers, vec!["__t0".to_string()]);
        assert_eq!(p.transitions.len(), 2);
        assert_eq!(
            p.transitions[0].command,
            Command::Load {
                reg: "__t0".into(),
                addr: Expr::Const(1)
            }
        );
        assert_eq!(
            p.transitions[1].command,
            Command::Assume(Expr::bin(
                BinOp::Eq,
                Expr::Reg("__t0".into()),
                Expr::Const(1)
            ))
        );
    }

    #[test]
    fn precedence() {
        let p = parse_program("regs r; r := 1 + 2 * 3 == 7 && 1;").unwrap();
        let Command::Assign { value, .. } = &p.transitions[0].command else {
            panic!()
        };
        let expected = Expr::bin(
            BinOp::And,
            Expr::bin(
                BinOp::Eq,
                Expr::bin(
                    BinOp::Add,
                    Expr::Const(1),
                    Expr::bin(BinOp::Mul, Expr::Const(2), Expr::Const(3)),
                ),
                Expr::Const(7),
            ),
            Expr::Const(1),
        );
        assert_eq!(value, &expected);
    }

    #[test]
    fn if_else_joins() {
        let p = parse_program("regs r; if (r) { mem[0] := 1; } else { mem[1] := 1; } barrier;")
            .unwrap();
        assert_eq!(p.transitions.len(), 5);
        let barrier: Vec<_> = p
            .transitions
            .iter()
            .filter(|t| t.command == Command::Barrier)
            .collect();
        assert_eq!(barrier.len(), 1);
    }
}
