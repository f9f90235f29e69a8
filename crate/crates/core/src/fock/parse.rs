//! Recursive-descent parser for observable expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := number | '-' factor | 'N' '(' region ')' | 'I1' '(' function ')' | '(' expr ')'
//! ```
//!
//! Regions and functions are delegated to a [`LeafSyntax`], so the same
//! grammar serves the tower and the finite ground set.

use num_bigint::BigUint;

use super::observable::Observable;
use super::tower::{SimpleFunction, TowerObservable};
use crate::error::{Error, Result};
use crate::growth::GrowthSpec;
use crate::odometer::{parse_bits, Column, Rectangle, RegionSet};

/// Character cursor shared by the expression and leaf parsers.
pub struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse { offset: self.pos, message: message.into() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    pub fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    pub fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    /// Consumes `token` if it comes next.
    pub fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{token}'")))
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        self.skip_ws();
        let rest = self.rest();
        let len = rest.find(|c| !pred(c)).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    /// An unsigned decimal number with optional fraction and exponent.
    pub fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let mut text = self.take_while(|c| c.is_ascii_digit() || c == '.').to_string();
        // the range operator `..` is not part of a number
        if let Some(i) = text.find("..") {
            self.pos = start + i;
            text.truncate(i);
        }
        if self.rest().starts_with(['e', 'E']) {
            let save = self.pos;
            self.pos += 1;
            let sign = if self.rest().starts_with(['+', '-']) {
                self.pos += 1;
                &self.src[self.pos - 1..self.pos]
            } else {
                ""
            };
            let digits = self.take_while(|c| c.is_ascii_digit());
            if digits.is_empty() {
                self.pos = save;
            } else {
                text = format!("{text}e{sign}{digits}");
            }
        }
        text.parse().map_err(|_| Error::Parse { offset: start, message: "expected a number".into() })
    }

    pub fn unsigned(&mut self) -> Result<BigUint> {
        let start = self.pos;
        let digits = self.take_while(|c| c.is_ascii_digit());
        digits.parse().map_err(|_| Error::Parse { offset: start, message: "expected an integer".into() })
    }

    pub fn index(&mut self) -> Result<usize> {
        let start = self.pos;
        let digits = self.take_while(|c| c.is_ascii_digit());
        digits.parse().map_err(|_| Error::Parse { offset: start, message: "expected an index".into() })
    }

    pub fn bits(&mut self) -> Result<Vec<bool>> {
        let start = self.pos;
        let digits = self.take_while(|c| c == '0' || c == '1');
        parse_bits(digits).ok_or(Error::Parse { offset: start, message: "expected a bit string".into() })
    }
}

/// How regions (inside `N(…)`) and functions (inside `I1(…)`) are written.
pub trait LeafSyntax {
    type Region;
    type Function;

    fn region(&self, c: &mut Cursor<'_>) -> Result<Self::Region>;
    fn function(&self, c: &mut Cursor<'_>) -> Result<Self::Function>;
}

pub fn parse_with<L: LeafSyntax>(src: &str, leaves: &L) -> Result<Observable<L::Region, L::Function>>
where
    L::Region: Clone,
    L::Function: Clone,
{
    let mut c = Cursor::new(src);
    let e = expr(&mut c, leaves)?;
    if !c.at_end() {
        return Err(c.error("unexpected trailing input"));
    }
    Ok(e)
}

type Obs<L> = Observable<<L as LeafSyntax>::Region, <L as LeafSyntax>::Function>;

fn expr<L: LeafSyntax>(c: &mut Cursor<'_>, leaves: &L) -> Result<Obs<L>> {
    let mut terms = vec![term(c, leaves)?];
    loop {
        if c.eat("+") {
            terms.push(term(c, leaves)?);
        } else if c.eat("-") {
            terms.push(Observable::Scale(-1.0, Box::new(term(c, leaves)?)));
        } else {
            break;
        }
    }
    Ok(if terms.len() == 1 { terms.pop().expect("one term") } else { Observable::Sum(terms) })
}

fn term<L: LeafSyntax>(c: &mut Cursor<'_>, leaves: &L) -> Result<Obs<L>> {
    let mut factors = vec![factor(c, leaves)?];
    while c.eat("*") {
        factors.push(factor(c, leaves)?);
    }
    Ok(if factors.len() == 1 { factors.pop().expect("one factor") } else { Observable::Product(factors) })
}

fn factor<L: LeafSyntax>(c: &mut Cursor<'_>, leaves: &L) -> Result<Obs<L>> {
    if c.eat("-") {
        return Ok(match factor(c, leaves)? {
            Observable::Const(v) => Observable::Const(-v),
            f => Observable::Scale(-1.0, Box::new(f)),
        });
    }
    if c.eat("(") {
        let e = expr(c, leaves)?;
        c.expect(")")?;
        return Ok(e);
    }
    if c.eat("I1") {
        c.expect("(")?;
        let f = leaves.function(c)?;
        c.expect(")")?;
        return Ok(Observable::I1(f));
    }
    if c.eat("N") {
        c.expect("(")?;
        let r = leaves.region(c)?;
        c.expect(")")?;
        return Ok(Observable::Count(r));
    }
    match c.peek() {
        Some(ch) if ch.is_ascii_digit() || ch == '.' => Ok(Observable::Const(c.number()?)),
        Some(_) => Err(c.error("expected a number, N(...), I1(...) or '('")),
        None => Err(c.error("unexpected end of input")),
    }
}

/// Tower leaves: rectangles `C(k)[a..b]` or `P(bits)[a..b]`, regions joined
/// by `|`, functions as `c*rect + …`.
pub struct TowerSyntax<'s> {
    pub spec: &'s GrowthSpec,
}

impl TowerSyntax<'_> {
    pub fn rectangle(&self, c: &mut Cursor<'_>) -> Result<Rectangle> {
        let start = c.pos;
        let column = if c.eat("C") {
            c.expect("(")?;
            let k = c.index()?;
            c.expect(")")?;
            Column::Class(k)
        } else if c.eat("P") {
            c.expect("(")?;
            let bits = c.bits()?;
            c.expect(")")?;
            Column::from_bits(&bits)
        } else {
            return Err(c.error("expected C(k) or P(bits)"));
        };
        c.expect("[")?;
        let lo = c.unsigned()?;
        c.expect("..")?;
        let hi = c.unsigned()?;
        c.expect("]")?;
        Rectangle::new(column, lo, hi, self.spec).map_err(|e| Error::Parse { offset: start, message: e.to_string() })
    }
}

impl LeafSyntax for TowerSyntax<'_> {
    type Region = RegionSet;
    type Function = SimpleFunction;

    fn region(&self, c: &mut Cursor<'_>) -> Result<RegionSet> {
        let mut rects = vec![self.rectangle(c)?];
        while c.eat("|") || c.eat(",") {
            rects.push(self.rectangle(c)?);
        }
        Ok(RegionSet::from_overlapping(rects))
    }

    fn function(&self, c: &mut Cursor<'_>) -> Result<SimpleFunction> {
        let start = c.pos;
        let mut terms = Vec::new();
        let mut sign = 1.0;
        loop {
            let coeff = if matches!(c.peek(), Some('C' | 'P')) {
                1.0
            } else {
                let v = c.number()?;
                c.expect("*")?;
                v
            };
            terms.push((sign * coeff, self.rectangle(c)?));
            if c.eat("+") {
                sign = 1.0;
            } else if c.eat("-") {
                sign = -1.0;
            } else {
                break;
            }
        }
        SimpleFunction::new(terms).map_err(|e| Error::Parse { offset: start, message: e.to_string() })
    }
}

/// Parses an observable over the tower.
pub fn parse(src: &str, spec: &GrowthSpec) -> Result<TowerObservable> {
    parse_with(src, &TowerSyntax { spec })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_products_and_sums() {
        let spec = GrowthSpec::default();
        let f = parse("N(C(0)[1..1]) * N(C(1)[1..2]) - 2.5", &spec).unwrap();
        match f {
            Observable::Sum(ref xs) => {
                assert_eq!(xs.len(), 2);
                assert!(matches!(xs[0], Observable::Product(_)));
            }
            _ => panic!("{f:?}"),
        }
        let g = parse("I1(0.5*C(0)[1..1] + 2*P(10)[1..1])", &spec).unwrap();
        let Observable::I1(sf) = g else { panic!() };
        assert_eq!(sf.terms().len(), 2);
        assert!((sf.integral() - (0.25 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn unions_and_exponents() {
        let spec = GrowthSpec::default();
        let f = parse("1e-1 * N(C(0)[1..1] | C(1)[1..2])", &spec).unwrap();
        let Observable::Product(xs) = f else { panic!() };
        assert_eq!(xs[0], Observable::Const(0.1));
        let Observable::Count(r) = &xs[1] else { panic!() };
        assert_eq!(r.mass().to_f64(), 1.0);
    }

    #[test]
    fn display_round_trips() {
        let spec = GrowthSpec::default();
        let src = "(N(C(0)[1..1]) + -1) * I1(2*C(1)[1..2]) * -3 * N(P(1101)[1..5])";
        let f = parse(src, &spec).unwrap();
        assert_eq!(parse(&f.to_string(), &spec).unwrap(), f);
    }

    #[test]
    fn errors_carry_offsets() {
        let spec = GrowthSpec::default();
        match parse("N(C(0)[1..1]) + ", &spec) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 16),
            other => panic!("{other:?}"),
        }
        assert!(parse("N(C(0)[1..2])", &spec).is_err());
        assert!(parse("N(C(0)[1..1]) )", &spec).is_err());
        assert!(parse("I1(C(0)[1..1] + C(0)[1..1])", &spec).is_err());
    }
}
