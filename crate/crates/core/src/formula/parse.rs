//! Recursive-descent parser for the formula grammar.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::ast::{Atom, Formula, Mono, Term};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Eq,
    Ne,
    Plus,
    Minus,
    Star,
    And,
    Or,
    Tilde,
    LParen,
    RParen,
    Dot,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric()
                    || bytes[i] == b'_'
                    || bytes[i] == b'\'')
            {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            out.push((start, Tok::Int(text[start..i].parse().unwrap())));
            continue;
        }
        let tok = match c {
            '=' => Tok::Eq,
            '!' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Ne
            }
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '&' => Tok::And,
            '|' => Tok::Or,
            '~' => Tok::Tilde,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '.' => Tok::Dot,
            _ => {
                return Err(Error::Syntax {
                    pos: i,
                    msg: format!("unexpected character {c:?}"),
                })
            }
        };
        i += 1;
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        if let Some(Tok::Ident(k)) = self.peek() {
            if k == "ALL" || k == "EX" {
                let universal = k == "ALL";
                self.pos += 1;
                let v = match self.peek() {
                    Some(Tok::Ident(v)) if v != "ALL" && v != "EX" => v.clone(),
                    _ => return self.err("expected variable after quantifier"),
                };
                self.pos += 1;
                self.expect(&Tok::Dot, "'.'")?;
                let body = self.formula()?;
                return Ok(if universal {
                    Formula::forall(&v, body)
                } else {
                    Formula::exists(&v, body)
                });
            }
        }
        self.disj()
    }

    fn disj(&mut self) -> Result<Formula> {
        let mut parts = vec![self.conj()?];
        while self.eat(&Tok::Or) {
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        })
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut parts = vec![self.lit()?];
        while self.eat(&Tok::And) {
            parts.push(self.lit()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        })
    }

    fn lit(&mut self) -> Result<Formula> {
        if self.eat(&Tok::Tilde) {
            return Ok(Formula::not(self.lit()?));
        }
        if self.eat(&Tok::LParen) {
            let f = self.formula()?;
            self.expect(&Tok::RParen, "')'")?;
            return Ok(f);
        }
        let lhs = self.term()?;
        let negated = match self.peek() {
            Some(Tok::Eq) => false,
            Some(Tok::Ne) => true,
            _ => return self.err("expected '=' or '!='"),
        };
        self.pos += 1;
        let rhs = self.term()?;
        let atom = Formula::Atom(Atom::new(lhs, rhs));
        Ok(if negated { Formula::not(atom) } else { atom })
    }

    fn term(&mut self) -> Result<Term> {
        let negate = self.eat(&Tok::Minus);
        let mut monos = vec![self.signed(negate)?];
        loop {
            let negate = match self.peek() {
                Some(Tok::Plus) => false,
                Some(Tok::Minus) => true,
                _ => break,
            };
            self.pos += 1;
            monos.push(self.signed(negate)?);
        }
        Ok(Term(monos))
    }

    fn signed(&mut self, negate: bool) -> Result<Mono> {
        let sign = |c: BigInt| if negate { -c } else { c };
        let coeff = match self.peek() {
            Some(Tok::Int(n)) => {
                let n = n.clone();
                self.pos += 1;
                if !self.eat(&Tok::Star) {
                    return Ok(Mono {
                        coeff: sign(n),
                        factors: vec![],
                    });
                }
                n
            }
            _ => BigInt::one(),
        };
        let mut factors = vec![self.symbol()?];
        while self.eat(&Tok::Star) {
            factors.push(self.symbol()?);
        }
        Ok(Mono {
            coeff: sign(coeff),
            factors,
        })
    }

    fn symbol(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if s != "ALL" && s != "EX" => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected symbol"),
        }
    }
}

pub fn parse(text: &str) -> Result<Formula> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        end: text.len(),
    };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

/// Parse a single atom `lhs = rhs`.
pub fn parse_atom(text: &str) -> Result<Atom> {
    match parse(text)? {
        Formula::Atom(a) => Ok(a),
        _ => Err(Error::Syntax {
            pos: 0,
            msg: "expected a single equation".into(),
        }),
    }
}

pub fn parse_term(text: &str) -> Result<Term> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        end: text.len(),
    };
    let t = p.term()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(t)
}

pub fn is_identity(t: &Term) -> bool {
    t.0.iter()
        .all(|m| m.factors.is_empty() && m.coeff.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let f = parse("EX G. 1*F1 = 2*G").unwrap();
        assert_eq!(
            f,
            Formula::exists(
                "G",
                Formula::eq(Term::scaled(1, "F1"), Term::scaled(2, "G"))
            )
        );
        let f = parse("ALL F. EX G. F = 2*G").unwrap();
        assert_eq!(
            f,
            Formula::forall(
                "F",
                Formula::exists("G", Formula::eq(Term::var("F"), Term::scaled(2, "G")))
            )
        );
        let f = parse("EX G. (F = G & F != G)").unwrap();
        assert_eq!(
            f,
            Formula::exists(
                "G",
                Formula::And(vec![
                    Formula::eq(Term::var("F"), Term::var("G")),
                    Formula::ne(Term::var("F"), Term::var("G"))
                ])
            )
        );
    }

    #[test]
    fn round_trips() {
        for s in [
            "EX G. F = 2*G",
            "ALL F. EX G. F = 2*G | ~(EX H. H != 0)",
            "c1 - 2*c2 + c3 = 0 & (c1 = c2 | c2 = c3)",
            "-1*c1 = 3 - c2*c2",
            "EX G. (EX H. G = H) & G = 0",
        ] {
            let f = parse(s).unwrap();
            assert_eq!(parse(&f.to_string()).unwrap(), f, "{s}");
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse("EX . F = G"),
            Err(Error::Syntax { pos: 3, .. })
        ));
        assert!(parse("F = ").is_err());
        assert!(parse("F = G )").is_err());
        assert!(parse("F # G").is_err());
    }
}
