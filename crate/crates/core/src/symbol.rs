//! A tiny expression grammar for boundary symbols a(theta) and profile
//! functions f(u), used by the command-line interface.
//!
//! Grammar (whitespace ignored):
//! ```text
//! expr   := term  (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | power
//! power  := atom ('^' uint)?
//! atom   := number | 'pi' | 'theta' | 'u'
//!         | 'cos' '(' expr ')' | 'sin' '(' expr ')' | '(' expr ')'
//! ```
//! `theta` and `u` both name the single free variable.

use crate::error::{Error, Result};

/// A parsed symbol expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Cos(Box<Expr>),
    Sin(Box<Expr>),
}

impl Expr {
    /// Evaluates with the free variable bound to x.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Pow(e, k) => e.eval(x).powi(*k as i32),
            Expr::Cos(e) => e.eval(x).cos(),
            Expr::Sin(e) => e.eval(x).sin(),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn err(pos: usize) -> Error {
    Error::OutOfRange {
        what: "symbol expression parse position",
        value: pos as f64,
        lo: 0.0,
        hi: 0.0,
    }
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.eat(b'+') {
                e = Expr::Add(Box::new(e), Box::new(self.term()?));
            } else if self.eat(b'-') {
                e = Expr::Sub(Box::new(e), Box::new(self.term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.factor()?;
        while self.eat(b'*') {
            e = Expr::Mul(Box::new(e), Box::new(self.factor()?));
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let atom = self.atom()?;
        if self.eat(b'^') {
            let k = self.uint()?;
            return Ok(Expr::Pow(Box::new(atom), k));
        }
        Ok(atom)
    }

    fn uint(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(err(self.pos));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| err(start))
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(err(self.pos));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                s.parse().map(Expr::Num).map_err(|_| err(start))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match name {
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "theta" | "u" => Ok(Expr::Var),
                    "cos" | "sin" => {
                        if !self.eat(b'(') {
                            return Err(err(self.pos));
                        }
                        let inner = self.expr()?;
                        if !self.eat(b')') {
                            return Err(err(self.pos));
                        }
                        Ok(if name == "cos" {
                            Expr::Cos(Box::new(inner))
                        } else {
                            Expr::Sin(Box::new(inner))
                        })
                    }
                    _ => Err(err(start)),
                }
            }
            _ => Err(err(self.pos)),
        }
    }
}

/// Parses a symbol expression; the whole input must be consumed.
pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(err(p.pos));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_exact_vectors() {
        // these vectors are promised in the README: the parser must evaluate
        // each expression to the exact f64 produced by the native computation
        let cases: Vec<(&str, f64, f64)> = vec![
            ("cos(2*theta)", 0.7, (2.0f64 * 0.7).cos()),
            ("1", 0.3, 1.0),
            ("theta", 1.25, 1.25),
            ("theta^2", 1.25, 1.25f64 * 1.25),
            ("1-u", 0.25, 1.0 - 0.25),
            ("sin(theta)*sin(theta)", 0.9, (0.9f64).sin() * (0.9f64).sin()),
            ("cos(2*theta)+0.5*cos(4*theta)", 0.4, {
                (2.0f64 * 0.4).cos() + 0.5 * (4.0f64 * 0.4).cos()
            }),
            ("2*pi", 0.0, 2.0 * std::f64::consts::PI),
            ("-theta^2+1", 0.5, -(0.5f64 * 0.5) + 1.0),
            ("cos(theta)^3", 1.1, (1.1f64).cos().powi(3)),
        ];
        for (src, x, want) in cases {
            let e = parse(src).unwrap();
            let got = e.eval(x);
            assert!(
                got == want || (got - want).abs() <= f64::EPSILON * want.abs(),
                "{src} at {x}: got {got:?}, want {want:?}"
            );
        }
    }

    #[test]
    fn strict_bit_exactness_of_documented_vectors() {
        // the README table promises byte-for-byte equality of these values
        assert_eq!(parse("cos(2*theta)").unwrap().eval(0.7), (1.4f64).cos());
        assert_eq!(parse("1-u").unwrap().eval(0.25), 0.75);
        assert_eq!(
            parse("cos(2*theta)+0.5*cos(4*theta)").unwrap().eval(0.4),
            (0.8f64).cos() + 0.5 * (1.6f64).cos()
        );
    }

    #[test]
    fn rejects_bad_input() {
        for bad in ["", "cos", "cos(", "theta+", "2**3", "tan(theta)", "theta^", "(1", "1)"] {
            assert!(parse(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn precedence_and_unary_minus() {
        let e = parse("1+2*3").unwrap();
        assert_eq!(e.eval(0.0), 7.0);
        let e = parse("-2^2").unwrap(); // unary minus binds the power: -(2^2)
        assert_eq!(e.eval(0.0), -4.0);
        let e = parse("(1+2)*3").unwrap();
        assert_eq!(e.eval(0.0), 9.0);
        let e = parse("1-2-3").unwrap(); // left associative
        assert_eq!(e.eval(0.0), -4.0);
    }
}
