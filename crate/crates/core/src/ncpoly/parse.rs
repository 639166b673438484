//! Recursive-descent parser for NC polynomial expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := ('+' | '-') unary | atom
//! atom   := number ['i'] | 'i' | 'z' digits | '(' expr ')' | matrix
//! matrix := '[' row (',' row)* ']'      row := '[' expr (',' expr)* ']'
//! ```
//! A 1×1 factor multiplies a larger block entrywise; matrix entries may
//! themselves be blocks.

use super::MatPoly;
use crate::error::{NcError, Result};
use crate::scalar::{cx, CMat, Real};

pub fn parse_ncpoly<T: Real>(text: &str, d: usize) -> Result<MatPoly<T>> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, d };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    d: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> NcError {
        NcError::Parse { pos: self.pos, msg: msg.to_string() }
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
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn expr<T: Real>(&mut self) -> Result<MatPoly<T>> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let at = self.pos;
                    let rhs = self.term()?;
                    acc = acc.add(&rhs).map_err(|e| NcError::Parse { pos: at, msg: e.to_string() })?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    let at = self.pos;
                    let rhs = self.term()?;
                    acc = acc.sub(&rhs).map_err(|e| NcError::Parse { pos: at, msg: e.to_string() })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term<T: Real>(&mut self) -> Result<MatPoly<T>> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let at = self.pos;
            let rhs = self.unary()?;
            acc = product(&acc, &rhs).map_err(|e| NcError::Parse { pos: at, msg: e.to_string() })?;
        }
        Ok(acc)
    }

    fn unary<T: Real>(&mut self) -> Result<MatPoly<T>> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom<T: Real>(&mut self) -> Result<MatPoly<T>> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b'[') => self.matrix(),
            Some(b'z') => {
                let start = self.pos;
                self.pos += 1;
                let digits = self.take_while(|c| c.is_ascii_digit());
                if digits.is_empty() {
                    return Err(self.err("expected variable index after 'z'"));
                }
                let k: usize = digits.parse().map_err(|_| self.err("bad variable index"))?;
                if k == 0 || k > self.d {
                    return Err(NcError::Parse {
                        pos: start,
                        msg: format!("variable z{k} out of range for d = {}", self.d),
                    });
                }
                MatPoly::var(self.d, k)
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(MatPoly::scalar(self.d, cx(0.0, 1.0)))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn take_while(&mut self, f: impl Fn(u8) -> bool) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && f(self.src[self.pos]) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number<T: Real>(&mut self) -> Result<MatPoly<T>> {
        let start = self.pos;
        let mut s = self.take_while(|c| c.is_ascii_digit() || c == b'.');
        // exponent only when followed by a digit, optionally signed
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let mut look = self.pos + 1;
            if matches!(self.src.get(look), Some(b'+') | Some(b'-')) {
                look += 1;
            }
            if self.src.get(look).is_some_and(|c| c.is_ascii_digit()) {
                s.push_str(&String::from_utf8_lossy(&self.src[self.pos..look]));
                self.pos = look;
                s.push_str(&self.take_while(|c| c.is_ascii_digit()));
            }
        }
        let v: f64 = s.parse().map_err(|_| NcError::Parse { pos: start, msg: format!("bad number '{s}'") })?;
        if self.src.get(self.pos) == Some(&b'i') {
            self.pos += 1;
            return Ok(MatPoly::scalar(self.d, cx(0.0, v)));
        }
        Ok(MatPoly::scalar(self.d, cx(v, 0.0)))
    }

    fn matrix<T: Real>(&mut self) -> Result<MatPoly<T>> {
        let start = self.pos;
        self.expect(b'[')?;
        let mut rows: Vec<MatPoly<T>> = vec![];
        loop {
            let row_start = self.pos;
            self.expect(b'[')?;
            let mut row = self.expr::<T>()?;
            while self.peek() == Some(b',') {
                self.pos += 1;
                let at = self.pos;
                let e = self.expr()?;
                row = row.hstack(&e).map_err(|_| NcError::Parse { pos: at, msg: "ragged matrix literal: entry heights differ".into() })?;
            }
            self.expect(b']')?;
            if let Some(first) = rows.first() {
                if first.cols() != row.cols() {
                    return Err(NcError::Parse { pos: row_start, msg: "ragged matrix literal: row widths differ".into() });
                }
            }
            rows.push(row);
            if self.peek() == Some(b',') {
                self.pos += 1;
                continue;
            }
            break;
        }
        self.expect(b']')?;
        let mut it = rows.into_iter();
        let mut acc = it.next().ok_or(NcError::Parse { pos: start, msg: "empty matrix".into() })?;
        for r in it {
            acc = acc.vstack(&r)?;
        }
        Ok(acc)
    }
}

/// Matrix product, with 1×1 factors acting entrywise on larger blocks.
fn product<T: Real>(a: &MatPoly<T>, b: &MatPoly<T>) -> Result<MatPoly<T>> {
    if a.cols() == b.rows() {
        return a.mul(b);
    }
    if a.shape() == (1, 1) {
        return lift(a, b.rows()).mul(b);
    }
    if b.shape() == (1, 1) {
        return a.mul(&lift(b, a.cols()));
    }
    a.mul(b)
}

fn lift<T: Real>(a: &MatPoly<T>, n: usize) -> MatPoly<T> {
    let terms = a.terms().map(|(w, m)| (w.clone(), CMat::identity(n, n) * m[(0, 0)]));
    MatPoly::from_terms(a.d(), n, n, terms).expect("lifted shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Word;

    fn p(s: &str) -> MatPoly<f64> {
        parse_ncpoly(s, 2).unwrap()
    }

    #[test]
    fn reads_terms() {
        let q = p("z1*z2 + 2*z1");
        assert_eq!(q.num_terms(), 2);
        assert_eq!(q.coeff(&Word::parse("12", 2).unwrap())[(0, 0)], cx(1.0, 0.0));
        assert_eq!(q.coeff(&Word::parse("1", 2).unwrap())[(0, 0)], cx(2.0, 0.0));
    }

    #[test]
    fn row_literal() {
        let q = p("[[z1, z2]]");
        assert_eq!(q.shape(), (1, 2));
        let c1 = q.coeff(&Word::single(1));
        let c2 = q.coeff(&Word::single(2));
        assert_eq!((c1[(0, 0)], c1[(0, 1)]), (cx(1.0, 0.0), cx(0.0, 0.0)));
        assert_eq!((c2[(0, 0)], c2[(0, 1)]), (cx(0.0, 0.0), cx(1.0, 0.0)));
    }

    #[test]
    fn cancellation_normalizes() {
        assert!(p("z1*z1 - z1*z1").is_zero());
    }

    #[test]
    fn complex_literals() {
        let q = p("(0.5+2i)*z1 - 1e-1i + 3.5e2");
        assert_eq!(q.coeff(&Word::single(1))[(0, 0)], cx(0.5, 2.0));
        assert_eq!(q.coeff(&Word::empty())[(0, 0)], cx(350.0, -0.1));
        assert_eq!(p("i*i").coeff(&Word::empty())[(0, 0)], cx(-1.0, 0.0));
    }

    #[test]
    fn block_literals_and_scalar_factors() {
        let q = p("z1*[[1, 0],[0, 2]]");
        assert_eq!(q.shape(), (2, 2));
        let b = p("[[ [[1, z1]], z2 ]]");
        assert_eq!(b.shape(), (1, 3));
        let s = p("[[1],[z2]] * 3");
        assert_eq!(s.coeff(&Word::single(2))[(1, 0)], cx(3.0, 0.0));
    }

    #[test]
    fn errors_carry_positions() {
        match parse_ncpoly::<f64>("z1 + z3", 2) {
            Err(NcError::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_ncpoly::<f64>("[[1, 2],[3]]", 2), Err(NcError::Parse { .. })));
        assert!(matches!(parse_ncpoly::<f64>("z1 +", 2), Err(NcError::Parse { pos: 4, .. })));
        assert!(matches!(parse_ncpoly::<f64>("(z1", 2), Err(NcError::Parse { .. })));
        assert!(matches!(parse_ncpoly::<f64>("z1 z2", 2), Err(NcError::Parse { pos: 3, .. })));
    }
}
