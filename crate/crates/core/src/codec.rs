//! Text literals for Witt vectors, ramified Witt vectors, digit expansions
//! and Fontaine sequences.
//!
//! ```text
//! W{a0;a1;...}                  W[p=P,n=N]{a0;a1;...}
//! RW[base=(<base>),N=<prec>]{W{..}|W{..}|...}
//! DIGITS[N]{a0;a1;...}
//! FONT{a0;a1;...}
//! ```
//! Entries are element expressions of the coefficient ring.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lab::FontaineElement;
use crate::ramified::{DigitExpansion, RamifiedBase, RamifiedWitt};
use crate::ring::{Elem, Ring};
use crate::witt::WittVector;

/// Splits `HEAD[header]{body}` into `(header, body)`.
fn split_literal<'a>(src: &'a str, head: &str) -> Result<(Option<&'a str>, &'a str)> {
    let s = src.trim();
    let rest = s
        .strip_prefix(head)
        .ok_or_else(|| Error::parse(s, format!("expected a {head} literal")))?
        .trim_start();
    let (header, rest) = if let Some(r) = rest.strip_prefix('[') {
        let close = matching(r, '[', ']').ok_or_else(|| Error::parse(s, "unbalanced ["))?;
        (Some(&r[..close]), r[close + 1..].trim_start())
    } else {
        (None, rest)
    };
    let body = rest
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| Error::parse(rest, "expected {...}"))?;
    Ok((header, body))
}

/// Index of the bracket closing an already opened one.
fn matching(s: &str, open: char, close: char) -> Option<usize> {
    let mut depth = 1;
    for (i, c) in s.char_indices() {
        if c == open {
            depth += 1;
        } else if c == close {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

/// Splits on `sep` outside of any brackets.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            _ if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn header_value<'a>(header: &'a str, key: &str) -> Option<&'a str> {
    split_top(header, ',').into_iter().find_map(|kv| {
        let (k, v) = kv.split_once('=')?;
        (k.trim() == key).then(|| v.trim())
    })
}

fn header_int(header: &str, key: &str) -> Result<usize> {
    header_value(header, key)
        .ok_or_else(|| Error::parse(header, format!("missing {key}=")))?
        .parse()
        .map_err(|_| Error::parse(header, format!("{key} must be an integer")))
}

fn parse_entries(ring: &Ring, body: &str) -> Result<Vec<Elem>> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    split_top(body, ';').into_iter().map(|e| ring.parse_elem(e.trim())).collect()
}

fn format_entries(ring: &Ring, xs: &[Elem]) -> String {
    xs.iter().map(|x| ring.format(x)).collect::<Vec<_>>().join(";")
}

pub fn format_witt(w: &WittVector) -> String {
    format!("W{{{}}}", format_entries(w.ring(), w.coords()))
}

pub fn format_witt_full(w: &WittVector) -> String {
    format!("W[p={},n={}]{{{}}}", w.ring().p(), w.len(), format_entries(w.ring(), w.coords()))
}

/// Parses a Witt literal; the header, when present, must agree with the
/// ring and the number of entries.
pub fn parse_witt(ring: &Arc<Ring>, src: &str) -> Result<WittVector> {
    let (header, body) = split_literal(src, "W")?;
    let coords = parse_entries(ring, body)?;
    if let Some(h) = header {
        if header_int(h, "p")? as u64 != ring.p() {
            return Err(Error::Mismatch(format!("literal prime differs from the ring's {}", ring.p())));
        }
        if header_int(h, "n")? != coords.len() {
            return Err(Error::Mismatch("literal length differs from its header".into()));
        }
    }
    WittVector::new(ring.clone(), coords)
}

pub fn format_rw(x: &RamifiedWitt) -> String {
    let parts: Vec<String> = x.coords().iter().map(format_witt).collect();
    format!("RW[base=({}),N={}]{{{}}}", x.base().name(), x.prec(), parts.join("|"))
}

/// Parses a ramified literal. The base named in the header is parsed
/// unless `base` is supplied, in which case the names must agree.
pub fn parse_rw(ring: &Arc<Ring>, base: Option<&Arc<RamifiedBase>>, src: &str) -> Result<RamifiedWitt> {
    let (header, body) = split_literal(src, "RW")?;
    let header = header.ok_or_else(|| Error::parse(src, "RW literal needs a [base=..,N=..] header"))?;
    let text = header_value(header, "base").ok_or_else(|| Error::parse(header, "missing base="))?;
    let text = text
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| Error::parse(text, "base must be parenthesized"))?;
    let base = match base {
        Some(b) if normalize(b.name()) == normalize(text) => b.clone(),
        Some(b) => return Err(Error::Mismatch(format!("literal base differs from {}", b.name()))),
        None => RamifiedBase::parse(text)?,
    };
    let prec = header_int(header, "N")?;
    let coords = split_top(body, '|')
        .into_iter()
        .map(|w| parse_witt(ring, w))
        .collect::<Result<Vec<_>>>()?;
    RamifiedWitt::new(&base, ring, coords, prec)
}

fn normalize(s: &str) -> String {
    s.split_whitespace().collect()
}

pub fn format_digits(d: &DigitExpansion) -> String {
    format!("DIGITS[{}]{{{}}}", d.digits.len(), format_entries(&d.ring, &d.digits))
}

pub fn parse_digits(ring: &Arc<Ring>, src: &str) -> Result<DigitExpansion> {
    let (header, body) = split_literal(src, "DIGITS")?;
    let digits = parse_entries(ring, body)?;
    let n: usize = header
        .ok_or_else(|| Error::parse(src, "DIGITS literal needs [N]"))?
        .trim()
        .parse()
        .map_err(|_| Error::parse(src, "digit count must be an integer"))?;
    if n != digits.len() {
        return Err(Error::Mismatch(format!("{} digits listed, header says {n}", digits.len())));
    }
    Ok(DigitExpansion { ring: ring.clone(), digits })
}

pub fn format_fontaine(x: &FontaineElement) -> String {
    format!("FONT{{{}}}", format_entries(x.ring(), x.seq()))
}

pub fn parse_fontaine(ring: &Arc<Ring>, src: &str) -> Result<FontaineElement> {
    let (header, body) = split_literal(src, "FONT")?;
    if header.is_some() {
        return Err(Error::parse(src, "FONT literals take no header"));
    }
    FontaineElement::new(ring, parse_entries(ring, body)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witt_literals() {
        let r = Ring::parse("ff p=2 e=1").unwrap();
        let w = parse_witt(&r, "W{1;0}").unwrap();
        assert_eq!(format_witt(&w.add(&w).unwrap()), "W{0;1}");
        assert_eq!(parse_witt(&r, "W[p=2,n=2]{1;0}").unwrap(), w);
        assert_eq!(format_witt_full(&w), "W[p=2,n=2]{1;0}");
        assert!(parse_witt(&r, "W[p=3,n=2]{1;0}").is_err());
        assert!(parse_witt(&r, "W{1;0").is_err());
    }

    #[test]
    fn ramified_literals() {
        let r = Ring::parse("frac base=(ff p=3 e=1) vars=x depth_p=1 depth_2=1 laurent=true").unwrap();
        let b = RamifiedBase::parse("rb p=3 e=1 E=X^2-3").unwrap();
        let x = RamifiedWitt::teichmuller(&b, &r, 4, r.parse_elem("x^(1/2) + 1").unwrap())
            .unwrap()
            .add(&RamifiedWitt::pi(&b, &r, 4).unwrap())
            .unwrap();
        let text = format_rw(&x);
        assert_eq!(text, "RW[base=(rb p=3 e=1 E=X^2-3),N=4]{W{1 + x^(1/2);0;0}|W{1;0;0}}");
        assert_eq!(parse_rw(&r, None, &text).unwrap(), x);
        let d = x.digit_expand(4).unwrap();
        assert_eq!(parse_digits(&r, &format_digits(&d)).unwrap(), d);
    }
}
