//! Text syntax for valuations.
//!
//! ```text
//! expr    := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' ['-'] digits)?
//! primary := digits [pi-power] | pi | π | chi | vol | t | s | u
//!          | mu[k,q] | tau[k,q] | pi[k,r] | F(expr) | iota(expr) | '(' expr ')'
//! ```
//!
//! Products are Alesker products; numbers and powers of π stand for multiples
//! of the Euler characteristic. A number directly followed by `π` (as in `3π^2`)
//! is multiplied by it, which lets every rendered valuation parse back.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Result, UvalError};
use crate::poly::GradedPoly;
use crate::sl2::primitive_general;
use crate::{ExactValuation, Rational, Scalar};

pub fn parse_valspec(text: &str, n: usize) -> Result<ExactValuation> {
    let mut p = Parser { src: text, pos: 0, n };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(v)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> UvalError {
        self.error_at(self.pos, message)
    }

    fn error_at(&self, offset: usize, message: &str) -> UvalError {
        UvalError::Parse { offset, message: message.to_string() }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn constant(&self, c: Scalar) -> ExactValuation {
        ExactValuation::chi(self.n).scale(&c)
    }

    fn expr(&mut self) -> Result<ExactValuation> {
        let mut acc = self.product()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.product()?;
            } else if self.eat('-') {
                acc = &acc - &self.product()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<ExactValuation> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.multiply(&self.unary()?)?;
            } else if self.peek() == Some('/') {
                let at = self.pos;
                self.pos += 1;
                let d = self.unary()?;
                acc = acc.scale(&self.invert(&d, at)?);
            } else {
                return Ok(acc);
            }
        }
    }

    /// Inverse of a constant that is a single monomial in π.
    fn invert(&self, v: &ExactValuation, at: usize) -> Result<Scalar> {
        if v.degrees().any(|k| k != 0) {
            return Err(self.error_at(at, "can only divide by a constant"));
        }
        let c = v.coeff(0, 0);
        Scalar::one()
            .checked_div(&c)
            .map_err(|_| self.error_at(at, "divisor must be a nonzero multiple of a power of pi"))
    }

    fn unary(&mut self) -> Result<ExactValuation> {
        if self.eat('-') {
            return Ok(-&self.unary()?);
        }
        self.power()
    }

    fn exponent(&mut self) -> Result<i64> {
        let neg = self.eat('-');
        self.skip_ws();
        let at = self.pos;
        let digits = self.digits();
        if digits.is_empty() {
            return Err(self.error("expected an integer exponent"));
        }
        let e: i64 = digits.parse().map_err(|_| self.error_at(at, "exponent too large"))?;
        Ok(if neg { -e } else { e })
    }

    fn power(&mut self) -> Result<ExactValuation> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let at = self.pos;
        let e = self.exponent()?;
        self.raise(&base, e, at)
    }

    fn raise(&self, base: &ExactValuation, e: i64, at: usize) -> Result<ExactValuation> {
        let (base, e) = if e < 0 { (self.constant(self.invert(base, at)?), -e) } else { (base.clone(), e) };
        let mut out = ExactValuation::chi(self.n);
        for _ in 0..e {
            if out.is_zero() {
                break;
            }
            out = out.multiply(&base)?;
        }
        Ok(out)
    }

    fn digits(&mut self) -> &str {
        let len = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        let s = &self.src[self.pos..self.pos + len];
        self.pos += len;
        s
    }

    fn ident(&mut self) -> &str {
        let len: usize = self
            .rest()
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric() || *c == '_' || *c == 'π')
            .map(char::len_utf8)
            .sum();
        let s = &self.src[self.pos..self.pos + len];
        self.pos += len;
        s
    }

    fn index_pair(&mut self) -> Result<(usize, usize)> {
        self.expect('[')?;
        let a = self.index()?;
        self.expect(',')?;
        let b = self.index()?;
        self.expect(']')?;
        Ok((a, b))
    }

    fn index(&mut self) -> Result<usize> {
        self.skip_ws();
        let at = self.pos;
        let d = self.digits();
        if d.is_empty() {
            return Err(self.error("expected a nonnegative integer index"));
        }
        d.parse().map_err(|_| self.error_at(at, "index too large"))
    }

    fn is_pi_next(&mut self) -> bool {
        self.skip_ws();
        let r = self.rest();
        if r.starts_with('π') {
            return true;
        }
        r.starts_with("pi") && !r[2..].starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_' || c == '[')
    }

    fn primary(&mut self) -> Result<ExactValuation> {
        let start = {
            self.skip_ws();
            self.pos
        };
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let digits = self.digits().to_string();
                let value: BigInt = digits.parse().map_err(|_| self.error_at(start, "bad number"))?;
                let mut v = self.constant(Scalar::constant(Rational::from_integer(value)));
                if self.is_pi_next() {
                    let pi = self.power()?;
                    v = v.multiply(&pi)?;
                }
                Ok(v)
            }
            Some(c) if c.is_alphabetic() => {
                let name = self.ident().to_string();
                self.atom(&name, start)
            }
            Some(c) => Err(self.error(&format!("unexpected character '{c}'"))),
        }
    }

    fn atom(&mut self, name: &str, start: usize) -> Result<ExactValuation> {
        let n = self.n;
        let with_index = |r: Result<ExactValuation>| r.map_err(|e| match e {
            UvalError::IndexOutOfRange { .. } => UvalError::Parse { offset: start, message: e.to_string() },
            other => other,
        });
        match name {
            "chi" => Ok(ExactValuation::chi(n)),
            "vol" => Ok(ExactValuation::vol(n)),
            "t" => Ok(ExactValuation::from_monomial(n, &GradedPoly::t())),
            "s" => Ok(ExactValuation::from_monomial(n, &GradedPoly::s())),
            "u" => Ok(ExactValuation::from_monomial(n, &GradedPoly::u())),
            "π" => Ok(self.constant(Scalar::pi_pow(1))),
            "pi" if self.peek() != Some('[') => Ok(self.constant(Scalar::pi_pow(1))),
            "pi" => {
                let (k, r) = self.index_pair()?;
                with_index(primitive_general(n, k, r))
            }
            "mu" => {
                let (k, q) = self.index_pair()?;
                with_index(ExactValuation::mu(n, k, q))
            }
            "tau" => {
                let (k, q) = self.index_pair()?;
                with_index(ExactValuation::tau(n, k, q))
            }
            "F" | "iota" => {
                self.expect('(')?;
                let v = self.expr()?;
                self.expect(')')?;
                if name == "F" {
                    Ok(v.fourier())
                } else {
                    v.iota().map_err(|e| UvalError::Parse { offset: start, message: e.to_string() })
                }
            }
            _ => Err(self.error_at(start, &format!("unknown identifier '{name}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::q_range;
    use proptest::prelude::*;

    fn p(s: &str, n: usize) -> ExactValuation {
        parse_valspec(s, n).unwrap()
    }

    #[test]
    fn atoms() {
        assert_eq!(p("chi", 3), ExactValuation::mu(3, 0, 0).unwrap());
        assert_eq!(p("4*s - t^2", 2), p("u", 2));
        assert_eq!(p("F(tau[2,1])", 2), ExactValuation::tau(2, 2, 1).unwrap().fourier());
        assert_eq!(p("t^2", 3), p("t", 3).multiply(&p("t", 3)).unwrap());
        assert_eq!(p("pi[4,1]", 3), primitive_general(3, 4, 1).unwrap());
        assert_eq!(p("vol", 2), ExactValuation::vol(2));
        assert_eq!(p("iota(tau[2,1])", 3), ExactValuation::tau(3, 2, 1).unwrap().iota().unwrap());
    }

    #[test]
    fn scalars() {
        let mu = ExactValuation::mu(2, 2, 0).unwrap();
        assert_eq!(p("3/(8π)*mu[2,0]", 2), mu.scale(&Scalar::monomial(Rational::new(3.into(), 8.into()), -1)));
        assert_eq!(p("3π^2/4 * mu[2,0]", 2), mu.scale(&Scalar::monomial(Rational::new(3.into(), 4.into()), 2)));
        assert_eq!(p("2/pi^2", 2), p("2*pi^-2", 2));
        assert_eq!(p("-pi*chi + 1/2", 1), ExactValuation::chi(1).scale(&(&Scalar::ratio(1, 2) - &Scalar::pi_pow(1))));
        assert_eq!(p("t^0", 2), ExactValuation::chi(2));
        assert!(p("t^5", 2).is_zero());
    }

    #[test]
    fn errors_carry_offsets() {
        let off = |s: &str, n| match parse_valspec(s, n) {
            Err(UvalError::Parse { offset, .. }) => offset,
            other => panic!("{s}: {other:?}"),
        };
        assert_eq!(off("mu[2,0] + ", 2), 10);
        assert_eq!(off("mu[2,0] ) ", 2), 8);
        assert_eq!(off("chi + mu[5,0]", 2), 6);
        assert_eq!(off("foo", 2), 0);
        assert_eq!(off("t / t", 2), 2);
        assert_eq!(off("mu[2 0]", 2), 5);
        assert_eq!(off("1/(pi + 1)", 2), 1);
        assert_eq!(off("2 # 3", 2), 2);
    }

    #[test]
    fn rendered_basis_atoms_parse_back() {
        for n in 1..=4usize {
            for k in 0..=2 * n {
                for q in q_range(n, k) {
                    let v = ExactValuation::mu(n, k, q).unwrap();
                    assert_eq!(p(&format!("mu[{k},{q}]"), n), v);
                    assert_eq!(p(&v.to_string(), n), v);
                    assert_eq!(p(&v.render(crate::valuation::Basis::Tau), n), v);
                    assert_eq!(p(&v.fourier().to_string(), n), v.fourier());
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn display_roundtrips(v in crate::valuation::tests::arb_valuation(3)) {
            prop_assert_eq!(parse_valspec(&v.to_string(), 3).unwrap(), v.clone());
            prop_assert_eq!(parse_valspec(&v.render(crate::valuation::Basis::Tau), 3).unwrap(), v);
        }
    }
}
