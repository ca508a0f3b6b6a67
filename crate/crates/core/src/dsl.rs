//! The expression language.
//!
//! ```text
//! func := atom { "o" atom }
//! atom := "lin(" rat "," rat ")"
//!       | "quad(" rat "," rat "," rat ")"
//!       | "logistic(" rat ")"
//!       | "pow(" func "," nat ")"
//!       | "(" func ")"
//! rat  := [+-] int [ "/" int ] | [+-] int "." digits
//! ```
//!
//! `f o g` is `f` after `g`; chains associate to the left. Positions in
//! errors are 1-based byte columns.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::ctree::compose;
use crate::tree::CTree;
use crate::digitsys::{iterate_tree, lin_tree, logistic_tree, quad_tree};
use crate::error::{CoreError, Result};
use crate::oracle::FuncExpr;
use crate::rational::Rational;

/// Iteration counts above this are refused before any tree is built.
pub const MAX_POW: usize = 1_000_000;

pub fn parse(src: &str) -> Result<FuncExpr> {
    let mut p = Parser { src: src.as_bytes(), text: src, pos: 0 };
    let e = p.func()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("expected 'o' or end of input"));
    }
    Ok(e)
}

/// Compiles an expression into a unary continuity tree.
pub fn to_tree(e: &FuncExpr) -> Result<CTree> {
    match e {
        FuncExpr::Lin(u, v) => lin_tree(vec![u.clone()], v.clone()),
        FuncExpr::Quad(u, v, w) => quad_tree(u.clone(), v.clone(), w.clone()),
        FuncExpr::Logistic(a) => logistic_tree(a.clone()),
        FuncExpr::Comp(f, g) => compose(&to_tree(f)?, &[to_tree(g)?]),
        FuncExpr::Pow(f, n) => iterate_tree(&to_tree(f)?, *n),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> CoreError {
        CoreError::Syntax { position: self.pos + 1, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            let found = match self.src.get(self.pos) {
                Some(b) => format!("'{}'", *b as char),
                None => "end of input".to_string(),
            };
            Err(self.error(format!("expected '{}', found {found}", c as char)))
        }
    }

    fn ident(&mut self) -> &str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }

    /// Consumes a composition operator if one follows.
    fn compose_op(&mut self) -> bool {
        let save = self.pos;
        if self.ident() == "o" {
            true
        } else {
            self.pos = save;
            false
        }
    }

    fn func(&mut self) -> Result<FuncExpr> {
        let mut acc = self.atom()?;
        while self.compose_op() {
            let rhs = self.atom()?;
            acc = FuncExpr::comp(acc, rhs);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<FuncExpr> {
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let e = self.func()?;
            self.expect(b')')?;
            return Ok(e);
        }
        let start = self.pos;
        let name = self.ident().to_string();
        let e = match name.as_str() {
            "lin" => {
                self.expect(b'(')?;
                let u = self.rat()?;
                self.expect(b',')?;
                let v = self.rat()?;
                self.expect(b')')?;
                FuncExpr::Lin(u, v)
            }
            "quad" => {
                self.expect(b'(')?;
                let u = self.rat()?;
                self.expect(b',')?;
                let v = self.rat()?;
                self.expect(b',')?;
                let w = self.rat()?;
                self.expect(b')')?;
                FuncExpr::Quad(u, v, w)
            }
            "logistic" => {
                self.expect(b'(')?;
                let a = self.rat()?;
                self.expect(b')')?;
                FuncExpr::Logistic(a)
            }
            "pow" => {
                self.expect(b'(')?;
                let f = self.func()?;
                self.expect(b',')?;
                let n = self.nat()?;
                self.expect(b')')?;
                return Ok(FuncExpr::Pow(Box::new(f), n));
            }
            "" => return Err(self.error("expected an expression")),
            other => {
                self.pos = start;
                self.skip_ws();
                return Err(self.error(format!("unknown function '{other}'")));
            }
        };
        if e.validate().is_err() {
            let mut at = start;
            while self.src[at].is_ascii_whitespace() {
                at += 1;
            }
            return Err(CoreError::Range { position: at + 1, atom: self.text[at..self.pos].to_string() });
        }
        Ok(e)
    }

    fn digits(&mut self) -> Option<&str> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.text[start..self.pos])
    }

    fn rat(&mut self) -> Result<Rational> {
        let neg = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        self.skip_ws();
        let whole: BigInt = match self.digits() {
            Some(d) => d.parse().expect("ascii digits"),
            None => return Err(self.error("expected a number")),
        };
        let value = if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let Some(frac) = self.digits().map(str::to_owned) else {
                return Err(self.error("expected digits after '.'"));
            };
            let scale = num_traits::pow(BigInt::from(10), frac.len());
            let frac: BigInt = frac.parse().expect("ascii digits");
            Rational::new(whole * &scale + frac, scale)
        } else if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let at = self.pos;
            let den: BigInt = match self.digits() {
                Some(d) => d.parse().expect("ascii digits"),
                None => return Err(self.error("expected a denominator")),
            };
            if den.is_zero() {
                self.pos = at;
                return Err(self.error("zero denominator"));
            }
            Rational::new(whole, den)
        } else {
            Rational::from_integer(whole)
        };
        Ok(if neg { -value } else { value })
    }

    fn nat(&mut self) -> Result<usize> {
        self.skip_ws();
        let at = self.pos;
        let Some(d) = self.digits() else {
            return Err(self.error("expected an iteration count"));
        };
        let n = d.parse::<usize>().unwrap_or(usize::MAX);
        if n == 0 {
            self.pos = at;
            return Err(self.error("iteration count must be at least 1"));
        }
        if n > MAX_POW {
            return Err(CoreError::ResourceLimit(format!("iteration count {d} exceeds {MAX_POW}")));
        }
        Ok(n)
    }
}
