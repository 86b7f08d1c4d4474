//! Expressions over angles `th1..thd`, actions `I1..Id` and the deformation parameter `eps`.

use std::f64::consts::PI;
use std::fmt;

/// Nesting deeper than this is rejected instead of recursing further.
pub const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    /// Zero-based angle index.
    Angle(usize),
    /// Zero-based action index.
    Action(usize),
    Eps,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownIdentifier(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error at line {}, column {}: {msg}", self.line, self.column),
            ParseErrorKind::UnknownIdentifier(name) => {
                write!(f, "unknown identifier `{name}` at line {}, column {}", self.line, self.column)
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    let err = |line, column, msg: String| ParseError { line, column, kind: ParseErrorKind::Syntax(msg) };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let s: String = chars[start..i].iter().collect();
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Tok::Num(v),
                _ => return Err(err(l0, c0, format!("malformed number `{s}`"))),
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => return Err(err(l0, c0, format!("unexpected character `{c}`"))),
            }
        };
        col += i - start;
        out.push(Token { tok, line: l0, column: c0 });
    }
    out.push(Token { tok: Tok::End, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    dim: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, t: &Token, msg: String) -> ParseError {
        ParseError { line: t.line, column: t.column, kind: ParseErrorKind::Syntax(msg) }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let t = self.peek().clone();
            return Err(self.syntax(&t, format!("expression nests deeper than {MAX_DEPTH} levels")));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = self.peek().tok {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = self.peek().tok {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Op('-') {
            self.bump();
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Op('^') {
            self.bump();
            self.enter()?;
            // Right operand through `unary` makes `^` right-associative and allows `2^-1`.
            let exp = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Num(v) => Ok(Expr::Num(*v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_close(&t)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    _ => None,
                };
                if let Some(func) = func {
                    let open = self.bump();
                    if open.tok != Tok::LParen {
                        return Err(self.syntax(&open, format!("expected `(` after `{name}`, found {}", describe(&open.tok))));
                    }
                    let arg = self.expr()?;
                    self.expect_close(&open)?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                self.identifier(name, &t)
            }
            other => Err(self.syntax(&t, format!("expected an operand, found {}", describe(other)))),
        }
    }

    fn expect_close(&mut self, open: &Token) -> Result<(), ParseError> {
        let t = self.bump();
        if t.tok != Tok::RParen {
            return Err(self.syntax(
                &t,
                format!("expected `)` closing the `(` at column {}, found {}", open.column, describe(&t.tok)),
            ));
        }
        Ok(())
    }

    fn identifier(&self, name: &str, t: &Token) -> Result<Expr, ParseError> {
        let unknown = || ParseError { line: t.line, column: t.column, kind: ParseErrorKind::UnknownIdentifier(name.into()) };
        match name {
            "pi" => return Ok(Expr::Pi),
            "eps" => return Ok(Expr::Eps),
            _ => {}
        }
        let (prefix, digits) = if let Some(rest) = name.strip_prefix("th") {
            ("th", rest)
        } else if let Some(rest) = name.strip_prefix('I') {
            ("I", rest)
        } else {
            return Err(unknown());
        };
        if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        match digits.parse::<usize>() {
            Ok(j) if (1..=self.dim).contains(&j) => Ok(if prefix == "th" { Expr::Angle(j - 1) } else { Expr::Action(j - 1) }),
            _ => Err(unknown()),
        }
    }
}

/// Parses `text` with angle and action identifiers limited to dimension `dim`.
pub fn parse_expression(text: &str, dim: usize) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, dim, depth: 0 };
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return Err(p.syntax(&t, format!("unexpected {} after a complete expression", describe(&t.tok))));
    }
    Ok(e)
}

impl Expr {
    pub fn eval(&self, angles: &[f64], actions: &[f64], eps: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Pi => PI,
            Expr::Angle(j) => angles[*j],
            Expr::Action(j) => actions[*j],
            Expr::Eps => eps,
            Expr::Neg(e) => -e.eval(angles, actions, eps),
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(angles, actions, eps), b.eval(angles, actions, eps));
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                }
            }
            Expr::Call(f, e) => {
                let x = e.eval(angles, actions, eps);
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                }
            }
        }
    }

    pub fn depends_on_eps(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Eps))
    }

    pub fn depends_on_angles(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Angle(_)))
    }

    fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Expr::Neg(e) | Expr::Call(_, e) => e.any(pred),
            Expr::Bin(_, a, b) => a.any(pred) || b.any(pred),
            _ => false,
        }
    }

    /// Operands of the outermost chain of `+` and `-`.
    pub fn top_level_terms(&self) -> usize {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, a, _) => a.top_level_terms() + 1,
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(e: &str) -> f64 {
        parse_expression(e, 2).unwrap().eval(&[0.25, 0.5], &[2.0, 3.0], 0.1)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(num("1 + 2 * 3"), 7.0);
        assert_eq!(num("2 ^ 3 ^ 2"), 512.0);
        assert_eq!(num("-2 ^ 2"), -4.0);
        assert_eq!(num("2 ^ -1"), 0.5);
        assert_eq!(num("8 / 4 / 2"), 1.0);
        assert_eq!(num("5 - 3 - 1"), 1.0);
        assert_eq!(num("--3"), 3.0);
        assert_eq!(num("I1 * I2 + th2 - eps"), 6.4);
        assert_eq!(num("1.5e1 + .5"), 15.5);
    }

    #[test]
    fn positions_count_lines_and_columns() {
        let e = parse_expression("1 +\n  * 2", 1).unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        let e = parse_expression("I1 + I0", 1).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("I0".into()));
        assert_eq!(e.column, 6);
    }

    #[test]
    fn malformed_inputs() {
        for bad in ["", "(", ")", "1 2", "sin 1", "sin()", "1..2", "exp(1", "2 $ 3", "1e", "th", "I01", "foo(1)"] {
            assert!(parse_expression(bad, 2).is_err(), "{bad}");
        }
        let deep = "(".repeat(10_000);
        assert!(parse_expression(&deep, 1).is_err());
        let deep = "-".repeat(10_000) + "1";
        assert!(parse_expression(&deep, 1).is_err());
    }
}
