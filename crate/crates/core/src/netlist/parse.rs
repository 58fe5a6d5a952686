// SPDX-License-Identifier: Apache-2.0

//! Parser for a small structural-Verilog subset: one module, scalar ports,
//! `input`/`output`/`wire` declarations and one gate per `assign`.

use std::collections::{HashMap, HashSet};

use super::{Gate, GateNetlist, GateOp, NetlistError};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Const(bool),
    LParen,
    RParen,
    Comma,
    Semi,
    Eq,
    Amp,
    Pipe,
    Caret,
    Tilde,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Const(b) => format!("`1'b{}`", *b as u8),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Eof => "end of input".into(),
        }
    }

    /// Tokens that can appear inside a right-hand side; a misplaced one is an
    /// unsupported expression rather than a syntax error.
    fn is_expr_token(&self) -> bool {
        matches!(
            self,
            Tok::Ident(_) | Tok::Const(_) | Tok::LParen | Tok::RParen | Tok::Amp | Tok::Pipe | Tok::Caret | Tok::Tilde
        )
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, NetlistError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '=' => Some(Tok::Eq),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Pipe),
            '^' => Some(Tok::Caret),
            '~' => Some(Tok::Tilde),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, line: tl, col: tc });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '\'') {
                i += 1;
            }
            col += i - start;
            let lit: String = chars[start..i].iter().collect();
            let tok = match lit.as_str() {
                "1'b0" => Tok::Const(false),
                "1'b1" => Tok::Const(true),
                _ => {
                    return Err(NetlistError::UnsupportedExpr {
                        line: tl,
                        col: tc,
                        msg: format!("literal `{lit}` (only 1'b0 and 1'b1 are supported)"),
                    })
                }
            };
            out.push(Spanned { tok, line: tl, col: tc });
            continue;
        }
        return Err(NetlistError::Syntax { line: tl, col: tc, msg: format!("unexpected character `{c}`") });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Decl {
    Input,
    Output,
    Wire,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, at: &Spanned, msg: impl Into<String>) -> Result<T, NetlistError> {
        Err(NetlistError::Syntax { line: at.line, col: at.col, msg: msg.into() })
    }

    fn expect(&mut self, tok: Tok) -> Result<Spanned, NetlistError> {
        let t = self.bump();
        if t.tok == tok {
            Ok(t)
        } else {
            self.syntax(&t, format!("expected {}, found {}", tok.describe(), t.tok.describe()))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), NetlistError> {
        let t = self.bump();
        match &t.tok {
            Tok::Ident(s) if s == kw => Ok(()),
            other => self.syntax(&t, format!("expected `{kw}`, found {}", other.describe())),
        }
    }

    fn ident(&mut self) -> Result<(String, Spanned), NetlistError> {
        let t = self.bump();
        match &t.tok {
            Tok::Ident(s) if !is_keyword(s) => Ok((s.clone(), t)),
            other => self.syntax(&t, format!("expected identifier, found {}", other.describe())),
        }
    }

    fn ident_list(&mut self, close: Tok) -> Result<Vec<String>, NetlistError> {
        let mut names = Vec::new();
        if self.peek().tok == close {
            self.bump();
            return Ok(names);
        }
        loop {
            names.push(self.ident()?.0);
            let t = self.bump();
            if t.tok == close {
                return Ok(names);
            }
            if t.tok != Tok::Comma {
                return self.syntax(&t, format!("expected `,` or {}, found {}", close.describe(), t.tok.describe()));
            }
        }
    }

    fn unsupported<T>(&self, at: &Spanned, msg: impl Into<String>) -> Result<T, NetlistError> {
        Err(NetlistError::UnsupportedExpr { line: at.line, col: at.col, msg: msg.into() })
    }

    fn operand(&mut self) -> Result<String, NetlistError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Ident(_) => Ok(self.ident()?.0),
            tok if tok.is_expr_token() => {
                self.unsupported(&t, format!("expected a net name, found {}", tok.describe()))
            }
            tok => self.syntax(&t, format!("expected a net name, found {}", tok.describe())),
        }
    }

    fn binop(&mut self) -> Option<GateOp> {
        let op = match self.peek().tok {
            Tok::Amp => GateOp::And,
            Tok::Pipe => GateOp::Or,
            Tok::Caret => GateOp::Xor,
            _ => return None,
        };
        self.bump();
        Some(op)
    }

    /// Right-hand side of an `assign`, up to but excluding the `;`.
    fn rhs(&mut self) -> Result<(GateOp, Vec<String>), NetlistError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Const(b) => {
                self.bump();
                Ok((if b { GateOp::Const1 } else { GateOp::Const0 }, vec![]))
            }
            Tok::Tilde => {
                self.bump();
                if self.peek().tok == Tok::LParen {
                    self.bump();
                    let a = self.operand()?;
                    let at = self.peek().clone();
                    let Some(op) = self.binop() else {
                        return self.unsupported(&at, "`~( ... )` must wrap a single binary operation");
                    };
                    let b = self.operand()?;
                    let close = self.peek().clone();
                    if close.tok != Tok::RParen {
                        if close.tok.is_expr_token() {
                            return self.unsupported(&close, "`~( ... )` must wrap a single binary operation");
                        }
                        return self.syntax(&close, format!("expected `)`, found {}", close.tok.describe()));
                    }
                    self.bump();
                    let inverted = match op {
                        GateOp::And => GateOp::Nand,
                        GateOp::Or => GateOp::Nor,
                        _ => GateOp::Xnor,
                    };
                    Ok((inverted, vec![a, b]))
                } else {
                    let a = self.operand()?;
                    Ok((GateOp::Not, vec![a]))
                }
            }
            Tok::Ident(_) => {
                let a = self.operand()?;
                match self.binop() {
                    Some(op) => {
                        let b = self.operand()?;
                        Ok((op, vec![a, b]))
                    }
                    None => Ok((GateOp::Buf, vec![a])),
                }
            }
            ref tok if tok.is_expr_token() => {
                self.unsupported(&t, format!("expression cannot start with {}", tok.describe()))
            }
            ref tok => self.syntax(&t, format!("expected an expression, found {}", tok.describe())),
        }
    }

    fn end_of_statement(&mut self) -> Result<(), NetlistError> {
        let t = self.peek().clone();
        if t.tok == Tok::Semi {
            self.bump();
            Ok(())
        } else if t.tok.is_expr_token() {
            self.unsupported(&t, "only one operation per `assign` is supported")
        } else {
            self.syntax(&t, format!("expected `;`, found {}", t.tok.describe()))
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "module" | "endmodule" | "input" | "output" | "wire" | "assign")
}

/// Parses one module of structural Verilog into a validated [`GateNetlist`].
pub fn parse_netlist(text: &str) -> Result<GateNetlist, NetlistError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    p.keyword("module")?;
    let (name, _) = p.ident()?;
    p.expect(Tok::LParen)?;
    let ports = p.ident_list(Tok::RParen)?;
    p.expect(Tok::Semi)?;

    let mut decls: HashMap<String, Decl> = HashMap::new();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut gates = Vec::new();
    loop {
        let t = p.peek().clone();
        let kw = match &t.tok {
            Tok::Ident(s) => s.clone(),
            other => return p.syntax(&t, format!("expected a declaration or `endmodule`, found {}", other.describe())),
        };
        match kw.as_str() {
            "endmodule" => {
                p.bump();
                break;
            }
            "input" | "output" | "wire" => {
                p.bump();
                let kind = match kw.as_str() {
                    "input" => Decl::Input,
                    "output" => Decl::Output,
                    _ => Decl::Wire,
                };
                for n in p.ident_list(Tok::Semi)? {
                    if decls.insert(n.clone(), kind).is_some() {
                        return Err(NetlistError::Redeclared { net: n });
                    }
                    match kind {
                        Decl::Input => inputs.push(n),
                        Decl::Output => outputs.push(n),
                        Decl::Wire => {}
                    }
                }
            }
            "assign" => {
                p.bump();
                let (lhs, _) = p.ident()?;
                p.expect(Tok::Eq)?;
                let (op, operands) = p.rhs()?;
                p.end_of_statement()?;
                gates.push(Gate { output: lhs, op, operands });
            }
            _ => return p.syntax(&t, format!("expected a declaration or `endmodule`, found `{kw}`")),
        }
    }
    let t = p.peek().clone();
    if t.tok != Tok::Eof {
        return p.syntax(&t, format!("unexpected {} after `endmodule`", t.tok.describe()));
    }

    let port_set: HashSet<&str> = ports.iter().map(String::as_str).collect();
    if port_set.len() != ports.len() {
        let dup = ports.iter().find(|p| ports.iter().filter(|q| q == p).count() > 1).unwrap();
        return Err(NetlistError::Port { net: dup.clone(), msg: "listed twice in the port list".into() });
    }
    for port in &ports {
        match decls.get(port) {
            Some(Decl::Input) | Some(Decl::Output) => {}
            _ => return Err(NetlistError::Port { net: port.clone(), msg: "not declared as input or output".into() }),
        }
    }
    for io in inputs.iter().chain(&outputs) {
        if !port_set.contains(io.as_str()) {
            return Err(NetlistError::Port { net: io.clone(), msg: "missing from the port list".into() });
        }
    }
    let driven: HashSet<&str> = gates.iter().map(|g| g.output.as_str()).collect();
    for g in &gates {
        match decls.get(&g.output) {
            None => return Err(NetlistError::Undeclared { net: g.output.clone() }),
            Some(Decl::Input) => return Err(NetlistError::MultiplyDriven { net: g.output.clone() }),
            _ => {}
        }
        for op in &g.operands {
            match decls.get(op) {
                None => return Err(NetlistError::Undeclared { net: op.clone() }),
                Some(Decl::Input) => {}
                Some(_) if !driven.contains(op.as_str()) => return Err(NetlistError::Undriven { net: op.clone() }),
                Some(_) => {}
            }
        }
    }
    GateNetlist::new(name, inputs, outputs, gates)
}
