//! Text form of expressions, weights and schemes.
//!
//! The syntax is functional: `sum(log(z1), log(z2))`, `chi(exp(2.0), blocki)`,
//! `max_cutoff(0.05)`. Bare identifiers may name catalog entries.

use num_complex::Complex64;

use super::chi::{ChiTable, ChiWeight};
use super::expr::Expr;
use super::sequence::{ChiFamily, SequenceScheme};
use crate::error::{LabError, Result};

#[derive(Debug, Clone)]
enum Node {
    Num(f64, usize),
    Ident(String, usize),
    Call(String, Vec<Node>, usize),
}

impl Node {
    fn pos(&self) -> usize {
        match self {
            Node::Num(_, p) | Node::Ident(_, p) | Node::Call(_, _, p) => *p,
        }
    }
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T> {
    Err(LabError::Parse { pos, msg: msg.into() })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
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

    fn node(&mut self) -> Result<Node> {
        let start = match self.peek() {
            Some(_) => self.pos,
            None => return err(self.pos, "unexpected end of input"),
        };
        let c = self.src[start];
        if c.is_ascii_digit() || c == b'-' || c == b'+' || c == b'.' {
            let mut end = start + 1;
            while end < self.src.len() {
                let d = self.src[end];
                let exp_sign = (d == b'-' || d == b'+') && matches!(self.src[end - 1], b'e' | b'E');
                if d.is_ascii_digit() || d == b'.' || d == b'e' || d == b'E' || exp_sign {
                    end += 1;
                } else {
                    break;
                }
            }
            let text = std::str::from_utf8(&self.src[start..end]).unwrap();
            self.pos = end;
            return match text.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Node::Num(v, start)),
                _ => err(start, format!("bad number `{text}`")),
            };
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut end = start + 1;
            while end < self.src.len() && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_' || self.src[end] == b'-') {
                end += 1;
            }
            let name = std::str::from_utf8(&self.src[start..end]).unwrap().to_string();
            self.pos = end;
            if self.peek() == Some(b'(') {
                self.pos += 1;
                let mut args = Vec::new();
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    return Ok(Node::Call(name, args, start));
                }
                loop {
                    args.push(self.node()?);
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return err(self.pos, "expected `,` or `)`"),
                    }
                }
                return Ok(Node::Call(name, args, start));
            }
            return Ok(Node::Ident(name, start));
        }
        err(start, format!("unexpected character `{}`", c as char))
    }

    fn parse_all(text: &'a str) -> Result<Node> {
        let mut p = Parser { src: text.as_bytes(), pos: 0 };
        let node = p.node()?;
        if p.peek().is_some() {
            return err(p.pos, "trailing input");
        }
        Ok(node)
    }
}

fn num(n: &Node) -> Result<f64> {
    match n {
        Node::Num(v, _) => Ok(*v),
        other => err(other.pos(), "expected a number"),
    }
}

fn var(n: &Node) -> Result<usize> {
    match n {
        Node::Ident(s, _) if s == "z1" => Ok(0),
        Node::Ident(s, _) if s == "z2" => Ok(1),
        other => err(other.pos(), "expected a variable z1 or z2"),
    }
}

fn arity(name: &str, args: &[Node], k: usize, pos: usize) -> Result<()> {
    if args.len() != k {
        return err(pos, format!("`{name}` takes {k} argument(s), got {}", args.len()));
    }
    Ok(())
}

fn to_expr(n: &Node) -> Result<Expr> {
    match n {
        Node::Num(v, _) => Ok(Expr::Const(*v)),
        Node::Ident(name, pos) => match super::named(name) {
            Some(spec) => Ok(spec.expr().clone()),
            None => err(*pos, format!("unknown name `{name}`")),
        },
        Node::Call(name, args, pos) => {
            let pos = *pos;
            match name.as_str() {
                "abs2" => {
                    arity(name, args, 1, pos)?;
                    Ok(Expr::ModSq(var(&args[0])?))
                }
                "log" => {
                    arity(name, args, 1, pos)?;
                    Ok(Expr::LogMod(var(&args[0])?))
                }
                "logsq" => {
                    arity(name, args, 2, pos)?;
                    let shift = num(&args[1])?;
                    if shift < 0.0 {
                        return err(args[1].pos(), "logsq shift must be nonnegative");
                    }
                    Ok(Expr::LogModSq { var: var(&args[0])?, shift })
                }
                "negsqrtlog" => {
                    arity(name, args, 1, pos)?;
                    Ok(Expr::NegSqrtNegLog(var(&args[0])?))
                }
                "re" => {
                    arity(name, args, 3, pos)?;
                    Ok(Expr::RePart { var: var(&args[0])?, coeff: Complex64::new(num(&args[1])?, num(&args[2])?) })
                }
                "loglin" => {
                    arity(name, args, 6, pos)?;
                    let v: Vec<f64> = args.iter().map(num).collect::<Result<_>>()?;
                    let coeffs = [Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])];
                    if coeffs[0].norm() == 0.0 && coeffs[1].norm() == 0.0 {
                        return err(pos, "loglin needs a nonzero linear part");
                    }
                    Ok(Expr::LogAbsLinear { coeffs, offset: Complex64::new(v[4], v[5]) })
                }
                "scale" => {
                    arity(name, args, 2, pos)?;
                    Ok(Expr::scale(num(&args[0])?, to_expr(&args[1])?))
                }
                "sum" => {
                    if args.is_empty() {
                        return err(pos, "`sum` needs at least one term");
                    }
                    Ok(Expr::sum(args.iter().map(to_expr).collect::<Result<_>>()?))
                }
                "negprod" => {
                    arity(name, args, 2, pos)?;
                    Ok(Expr::neg_product(to_expr(&args[0])?, to_expr(&args[1])?))
                }
                "max" => {
                    arity(name, args, 2, pos)?;
                    Ok(Expr::max(to_expr(&args[0])?, num(&args[1])?, None))
                }
                "smax" => {
                    arity(name, args, 3, pos)?;
                    let eps = num(&args[2])?;
                    if !(eps > 0.0) {
                        return err(args[2].pos(), "smoothing width must be positive");
                    }
                    Ok(Expr::max(to_expr(&args[0])?, num(&args[1])?, Some(eps)))
                }
                "chi" => {
                    arity(name, args, 2, pos)?;
                    Ok(Expr::chi(to_chi(&args[0])?, to_expr(&args[1])?))
                }
                other => err(pos, format!("unknown function `{other}`")),
            }
        }
    }
}

fn to_chi(n: &Node) -> Result<ChiWeight> {
    let wrap = |r: Result<ChiWeight>| r.or_else(|e| err(n.pos(), e.to_string()));
    match n {
        Node::Ident(s, _) if s == "identity" => Ok(ChiWeight::Identity),
        Node::Call(name, args, pos) => match name.as_str() {
            "phi" => {
                arity(name, args, 1, *pos)?;
                wrap(ChiWeight::PhiAlpha(num(&args[0])?).checked())
            }
            "exp" => {
                arity(name, args, 1, *pos)?;
                wrap(ChiWeight::ExpFamily(num(&args[0])?).checked())
            }
            "cutoff" => {
                let smoothing = match args.len() {
                    1 => 0.0,
                    2 => num(&args[1])?,
                    k => return err(*pos, format!("`cutoff` takes 1 or 2 arguments, got {k}")),
                };
                wrap(ChiWeight::Cutoff { level: num(&args[0])?, smoothing }.checked())
            }
            "table" => {
                if args.len() < 4 || args.len() % 2 != 0 {
                    return err(*pos, "`table` takes chi0, slope0 and one or more (knot, chi'') pairs");
                }
                let v: Vec<f64> = args.iter().map(num).collect::<Result<_>>()?;
                let knots = v[2..].iter().step_by(2).copied().collect();
                let second = v[3..].iter().step_by(2).copied().collect();
                wrap(ChiTable::new(knots, second, v[0], v[1]).map(ChiWeight::Table))
            }
            other => err(*pos, format!("unknown weight `{other}`")),
        },
        other => err(other.pos(), "expected a weight"),
    }
}

fn to_scheme(n: &Node) -> Result<SequenceScheme> {
    match n {
        Node::Ident(s, pos) => match s.as_str() {
            "max_cutoff" => Ok(SequenceScheme::MaxCutoff { smoothing: None }),
            "log_shift" => Ok(SequenceScheme::LogShift),
            "stationary" => Ok(SequenceScheme::Stationary),
            other => err(*pos, format!("unknown scheme `{other}`")),
        },
        Node::Call(name, args, pos) => match name.as_str() {
            "max_cutoff" => {
                arity(name, args, 1, *pos)?;
                let e = num(&args[0])?;
                if !(e > 0.0) {
                    return err(args[0].pos(), "smoothing width must be positive");
                }
                Ok(SequenceScheme::MaxCutoff { smoothing: Some(e) })
            }
            "mollify_scale" => {
                arity(name, args, 1, *pos)?;
                let e = num(&args[0])?;
                if !(e > 0.0) {
                    return err(args[0].pos(), "mollifier radius must be positive");
                }
                Ok(SequenceScheme::MollifyScale { epsilon0: e })
            }
            "chi_compose" => match args.first() {
                Some(Node::Ident(s, _)) if s == "exp" && args.len() == 1 => Ok(SequenceScheme::ChiCompose(ChiFamily::Exp)),
                Some(Node::Ident(s, _)) if s == "cutoff" && args.len() == 2 => {
                    Ok(SequenceScheme::ChiCompose(ChiFamily::Cutoff { smoothing: num(&args[1])? }))
                }
                Some(Node::Ident(s, _)) if s == "list" && args.len() >= 2 => Ok(SequenceScheme::ChiCompose(ChiFamily::Explicit(
                    args[1..].iter().map(to_chi).collect::<Result<_>>()?,
                ))),
                _ => err(*pos, "expected chi_compose(exp), chi_compose(cutoff, eps) or chi_compose(list, ...)"),
            },
            other => err(*pos, format!("unknown scheme `{other}`")),
        },
        Node::Num(_, pos) => err(*pos, "expected a scheme"),
    }
}

/// Parse an expression.
pub fn parse_expr(text: &str) -> Result<Expr> {
    to_expr(&Parser::parse_all(text)?)
}

/// Parse a weight such as `exp(2.0)` or `phi(0.25)`.
pub fn parse_chi(text: &str) -> Result<ChiWeight> {
    to_chi(&Parser::parse_all(text)?)
}

/// Parse a scheme such as `max_cutoff(0.05)` or `log_shift`.
pub fn parse_scheme(text: &str) -> Result<SequenceScheme> {
    to_scheme(&Parser::parse_all(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_simple() {
        let e = parse_expr("sum(log(z1), scale(0.5, logsq(z2, 0.25)), -1.5)").unwrap();
        assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn nested_catalog_name() {
        let e = parse_expr("chi(exp(1.0), blocki)").unwrap();
        assert!(matches!(e, Expr::Chi { .. }));
    }

    #[test]
    fn error_position() {
        match parse_expr("sum(log(z1), bogus(z2))") {
            Err(LabError::Parse { pos, .. }) => assert_eq!(pos, 13),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_expr("log(z3)").is_err());
        assert!(parse_expr("log(z1) x").is_err());
    }

    #[test]
    fn schemes() {
        for s in ["max_cutoff", "max_cutoff(0.05)", "log_shift", "chi_compose(exp)", "chi_compose(cutoff, 0.1)", "mollify_scale(0.3)", "stationary", "chi_compose(list, exp(1.0), identity)"] {
            let sc = parse_scheme(s).unwrap();
            assert_eq!(parse_scheme(&sc.to_string()).unwrap(), sc);
        }
    }

    #[test]
    fn exponent_numbers() {
        assert_eq!(parse_expr("1e-3").unwrap(), Expr::Const(1e-3));
        assert_eq!(parse_expr("-2.5E+2").unwrap(), Expr::Const(-250.0));
    }
}
