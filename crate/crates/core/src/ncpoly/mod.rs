//! Operator-valued NC polynomials and matrix points.
//!
//! Evaluation convention: `p(Z) = Σ_α Z^α ⊗ p_α`, point factor on the left, so
//! the block row index is `a * rows + i` for point row `a` and coefficient row `i`.

mod json;
mod parse;

pub use json::{from_json, to_json, JsonPoly};
pub use parse::parse_ncpoly;

use crate::error::{NcError, Result};
use crate::linalg;
use crate::scalar::{c0, c1, creal, CMat, Cx, Real};
use crate::words::Word;
use nalgebra::ComplexField;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct MatPoly<T: Real> {
    d: usize,
    rows: usize,
    cols: usize,
    coeffs: BTreeMap<Word, CMat<T>>,
}

impl<T: Real> MatPoly<T> {
    pub fn zero(d: usize, rows: usize, cols: usize) -> Self {
        MatPoly { d, rows, cols, coeffs: BTreeMap::new() }
    }

    pub fn constant(d: usize, m: CMat<T>) -> Self {
        let (rows, cols) = m.shape();
        Self::from_terms(d, rows, cols, [(Word::empty(), m)]).expect("constant has matching shape")
    }

    pub fn identity(d: usize, n: usize) -> Self {
        Self::constant(d, CMat::identity(n, n))
    }

    pub fn scalar(d: usize, c: Cx<T>) -> Self {
        Self::constant(d, CMat::from_element(1, 1, c))
    }

    /// The scalar variable `z_k`.
    pub fn var(d: usize, k: usize) -> Result<Self> {
        if k == 0 || k > d {
            return Err(NcError::LetterOutOfRange { k, d });
        }
        Ok(Self::monomial(d, Word::single(k), CMat::from_element(1, 1, c1())))
    }

    pub fn monomial(d: usize, w: Word, m: CMat<T>) -> Self {
        let (rows, cols) = m.shape();
        let mut p = Self::zero(d, rows, cols);
        p.insert_add(w, &m);
        p
    }

    pub fn from_terms<I>(d: usize, rows: usize, cols: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Word, CMat<T>)>,
    {
        let mut p = Self::zero(d, rows, cols);
        for (w, m) in terms {
            if m.shape() != (rows, cols) {
                return Err(NcError::ShapeMismatch(format!(
                    "coefficient {w} is {:?}, expected {:?}",
                    m.shape(),
                    (rows, cols)
                )));
            }
            if let Some(l) = w.letters().find(|&l| l == 0 || l > d) {
                return Err(NcError::InvalidWord { letter: l, d });
            }
            p.insert_add(w, &m);
        }
        Ok(p)
    }

    fn insert_add(&mut self, w: Word, m: &CMat<T>) {
        let entry = self.coeffs.entry(w.clone()).or_insert_with(|| CMat::zeros(m.nrows(), m.ncols()));
        *entry += m;
        if entry.iter().all(|z| *z == c0()) {
            self.coeffs.remove(&w);
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &CMat<T>)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, w: &Word) -> CMat<T> {
        self.coeffs.get(w).cloned().unwrap_or_else(|| CMat::zeros(self.rows, self.cols))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.keys().map(Word::len).max()
    }

    /// Degree of each column; `None` for a zero column.
    pub fn column_degrees(&self) -> Vec<Option<usize>> {
        (0..self.cols)
            .map(|j| {
                self.coeffs
                    .iter()
                    .filter(|(_, m)| m.column(j).iter().any(|z| *z != c0()))
                    .map(|(w, _)| w.len())
                    .max()
            })
            .collect()
    }

    fn check_same(&self, q: &Self) -> Result<()> {
        if self.d != q.d || self.shape() != q.shape() {
            return Err(NcError::ShapeMismatch(format!(
                "d={} {:?} vs d={} {:?}",
                self.d,
                self.shape(),
                q.d,
                q.shape()
            )));
        }
        Ok(())
    }

    pub fn add(&self, q: &Self) -> Result<Self> {
        self.check_same(q)?;
        let mut out = self.clone();
        for (w, m) in &q.coeffs {
            out.insert_add(w.clone(), m);
        }
        Ok(out)
    }

    pub fn sub(&self, q: &Self) -> Result<Self> {
        self.add(&q.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(-c1::<T>())
    }

    pub fn scale(&self, c: Cx<T>) -> Self {
        let mut out = Self::zero(self.d, self.rows, self.cols);
        for (w, m) in &self.coeffs {
            out.insert_add(w.clone(), &(m * c));
        }
        out
    }

    /// `(pq)_γ = Σ_{γ = αβ} p_α q_β`.
    pub fn mul(&self, q: &Self) -> Result<Self> {
        if self.d != q.d || self.cols != q.rows {
            return Err(NcError::ShapeMismatch(format!(
                "cannot multiply {:?} by {:?}",
                self.shape(),
                q.shape()
            )));
        }
        let mut out = Self::zero(self.d, self.rows, q.cols);
        for (a, pa) in &self.coeffs {
            for (b, qb) in &q.coeffs {
                out.insert_add(a.concat(b), &(pa * qb));
            }
        }
        Ok(out)
    }

    /// `α ↦ p_{reverse(α)}`.
    pub fn transpose_symbol(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|(w, m)| (w.reverse(), m.clone())).collect();
        MatPoly { d: self.d, rows: self.rows, cols: self.cols, coeffs }
    }

    /// Coefficient-wise conjugate transpose (`p_α ↦ p_α*`).
    pub fn coeff_adjoint(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|(w, m)| (w.clone(), m.adjoint())).collect();
        MatPoly { d: self.d, rows: self.cols, cols: self.rows, coeffs }
    }

    /// Row concatenation `[self | q]` (the join of symbols).
    pub fn hstack(&self, q: &Self) -> Result<Self> {
        if self.d != q.d || self.rows != q.rows {
            return Err(NcError::ShapeMismatch(format!(
                "row counts differ: {} vs {}",
                self.rows, q.rows
            )));
        }
        let mut out = Self::zero(self.d, self.rows, self.cols + q.cols);
        for w in self.coeffs.keys().chain(q.coeffs.keys()) {
            if out.coeffs.contains_key(w) {
                continue;
            }
            out.insert_add(w.clone(), &linalg::hstack(&self.coeff(w), &q.coeff(w)));
        }
        Ok(out)
    }

    pub fn vstack(&self, q: &Self) -> Result<Self> {
        if self.d != q.d || self.cols != q.cols {
            return Err(NcError::ShapeMismatch(format!(
                "column counts differ: {} vs {}",
                self.cols, q.cols
            )));
        }
        let mut out = Self::zero(self.d, self.rows + q.rows, self.cols);
        for w in self.coeffs.keys().chain(q.coeffs.keys()) {
            if out.coeffs.contains_key(w) {
                continue;
            }
            out.insert_add(w.clone(), &linalg::vstack(&self.coeff(w), &q.coeff(w)));
        }
        Ok(out)
    }

    pub fn block_diag(&self, q: &Self) -> Result<Self> {
        if self.d != q.d {
            return Err(NcError::ShapeMismatch("letter counts differ".into()));
        }
        let mut out = Self::zero(self.d, self.rows + q.rows, self.cols + q.cols);
        for w in self.coeffs.keys().chain(q.coeffs.keys()) {
            if out.coeffs.contains_key(w) {
                continue;
            }
            out.insert_add(w.clone(), &linalg::block_diag(&self.coeff(w), &q.coeff(w)));
        }
        Ok(out)
    }

    /// Sub-block of rows `r0..r0+nr` and columns `c0..c0+nc`.
    pub fn block(&self, r0: usize, nr: usize, c0_: usize, nc: usize) -> Self {
        let mut out = Self::zero(self.d, nr, nc);
        for (w, m) in &self.coeffs {
            out.insert_add(w.clone(), &m.view((r0, c0_), (nr, nc)).into_owned());
        }
        out
    }

    pub fn column(&self, j: usize) -> Self {
        self.block(0, self.rows, j, 1)
    }

    /// Right multiplication by a constant matrix.
    pub fn mul_const(&self, m: &CMat<T>) -> Result<Self> {
        self.mul(&Self::constant(self.d, m.clone()))
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.values().fold(T::zero(), |acc, m| acc.max(linalg::max_abs(m)))
    }

    /// Largest coefficient entry of `self - q`.
    pub fn distance(&self, q: &Self) -> Result<T> {
        Ok(self.sub(q)?.max_abs_coeff())
    }

    /// Drop coefficients of degree above `n`.
    pub fn truncate(&self, n: usize) -> Self {
        let coeffs = self.coeffs.iter().filter(|(w, _)| w.len() <= n).map(|(w, m)| (w.clone(), m.clone())).collect();
        MatPoly { d: self.d, rows: self.rows, cols: self.cols, coeffs }
    }

    /// Zero out entries of modulus at most `tol` and renormalize.
    pub fn chop(&self, tol: T) -> Self {
        let mut out = Self::zero(self.d, self.rows, self.cols);
        for (w, m) in &self.coeffs {
            let c = m.map(|z| if z.modulus() <= tol { c0() } else { z });
            out.insert_add(w.clone(), &c);
        }
        out
    }

    /// Make each column's first coefficient entry (graded-lex first word,
    /// then first row) with modulus above `tol` real positive.
    pub fn canonical_phase(&self, tol: T) -> Self {
        let mut phases = vec![c1::<T>(); self.cols];
        for (j, ph) in phases.iter_mut().enumerate() {
            let lead = self.coeffs.values().flat_map(|m| m.column(j).iter().copied().collect::<Vec<_>>()).find(|z| z.modulus() > tol);
            if let Some(z) = lead {
                *ph = z.conj() / creal(z.modulus());
            }
        }
        let diag = CMat::from_fn(self.cols, self.cols, |i, k| if i == k { phases[i] } else { c0() });
        self.mul_const(&diag).expect("square phase matrix")
    }

    /// `Σ_α Z^α ⊗ p_α`.
    pub fn eval_at_point(&self, z: &RowTuple<T>) -> Result<CMat<T>> {
        if z.d != self.d {
            return Err(NcError::ShapeMismatch(format!("point has d={}, symbol d={}", z.d, self.d)));
        }
        let n = z.n;
        let mut out = CMat::zeros(n * self.rows, n * self.cols);
        for (w, m) in &self.coeffs {
            out += linalg::kron(&z.word_power(w), m);
        }
        Ok(out)
    }
}

impl<T: Real> MatPoly<T> {
    /// A parseable expression; 1×1 symbols print as a plain sum, others as a
    /// matrix literal.
    pub fn to_expr(&self) -> String {
        let entry = |i: usize, j: usize| {
            let mut parts = vec![];
            for (w, m) in &self.coeffs {
                let c = m[(i, j)];
                if c == c0() {
                    continue;
                }
                let coef = format_complex(c);
                let mono: Vec<String> = w.letters().map(|l| format!("z{l}")).collect();
                parts.push(if mono.is_empty() { coef } else { format!("{coef}*{}", mono.join("*")) });
            }
            if parts.is_empty() { "0".to_string() } else { parts.join(" + ") }
        };
        if self.shape() == (1, 1) {
            return entry(0, 0);
        }
        let rows: Vec<String> = (0..self.rows)
            .map(|i| format!("[{}]", (0..self.cols).map(|j| entry(i, j)).collect::<Vec<_>>().join(", ")))
            .collect();
        format!("[{}]", rows.join(", "))
    }
}

fn format_complex<T: Real>(c: Cx<T>) -> String {
    let (a, b) = (crate::scalar::to_f64(c.re), crate::scalar::to_f64(c.im));
    if b == 0.0 {
        format!("({a:?})")
    } else if a == 0.0 {
        format!("({b:?}i)")
    } else {
        format!("({a:?}{}{:?}i)", if b < 0.0 { "-" } else { "+" }, b.abs())
    }
}

pub fn nc_add<T: Real>(p: &MatPoly<T>, q: &MatPoly<T>) -> Result<MatPoly<T>> {
    p.add(q)
}

pub fn nc_mul<T: Real>(p: &MatPoly<T>, q: &MatPoly<T>) -> Result<MatPoly<T>> {
    p.mul(q)
}

pub fn transpose_symbol<T: Real>(p: &MatPoly<T>) -> MatPoly<T> {
    p.transpose_symbol()
}

pub fn eval_at_point<T: Real>(p: &MatPoly<T>, z: &RowTuple<T>) -> Result<CMat<T>> {
    p.eval_at_point(z)
}

/// A d-tuple of n×n complex matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct RowTuple<T: Real> {
    pub d: usize,
    pub n: usize,
    pub mats: Vec<CMat<T>>,
}

impl<T: Real> RowTuple<T> {
    pub fn new(mats: Vec<CMat<T>>) -> Result<Self> {
        let d = mats.len();
        if d == 0 {
            return Err(NcError::ShapeMismatch("empty row tuple".into()));
        }
        let n = mats[0].nrows();
        if mats.iter().any(|m| m.shape() != (n, n)) {
            return Err(NcError::ShapeMismatch("row tuple entries must share a square shape".into()));
        }
        Ok(RowTuple { d, n, mats })
    }

    pub fn zeros(d: usize, n: usize) -> Self {
        RowTuple { d, n, mats: vec![CMat::zeros(n, n); d] }
    }

    /// Scalar (1×1) point.
    pub fn scalar(vals: &[Cx<T>]) -> Result<Self> {
        Self::new(vals.iter().map(|&v| CMat::from_element(1, 1, v)).collect())
    }

    /// The n × nd block `[Z_1 ... Z_d]`.
    pub fn row_block(&self) -> CMat<T> {
        let mut out = CMat::zeros(self.n, self.n * self.d);
        for (k, m) in self.mats.iter().enumerate() {
            out.view_mut((0, k * self.n), (self.n, self.n)).copy_from(m);
        }
        out
    }

    pub fn from_row_block(block: &CMat<T>, d: usize) -> Result<Self> {
        let n = block.nrows();
        if d == 0 || block.ncols() != n * d {
            return Err(NcError::ShapeMismatch(format!(
                "row block is {:?}, expected {n}x{}",
                block.shape(),
                n * d
            )));
        }
        Self::new((0..d).map(|k| block.view((0, k * n), (n, n)).into_owned()).collect())
    }

    /// Largest singular value of the row block.
    pub fn row_norm(&self) -> T {
        linalg::op_norm(&self.row_block())
    }

    /// `Σ_k Z_k Z_k*`.
    pub fn row_gram(&self) -> CMat<T> {
        self.mats.iter().fold(CMat::zeros(self.n, self.n), |acc, m| acc + m * m.adjoint())
    }

    /// `Z^α = Z_{i1} ... Z_{ik}`, `Z^∅ = I`.
    pub fn word_power(&self, w: &Word) -> CMat<T> {
        w.letters().fold(CMat::identity(self.n, self.n), |acc, l| acc * &self.mats[l - 1])
    }

    pub fn scaled(&self, c: T) -> Self {
        RowTuple { d: self.d, n: self.n, mats: self.mats.iter().map(|m| m * creal(c)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use proptest::prelude::*;

    fn p(s: &str, d: usize) -> MatPoly<f64> {
        parse_ncpoly(s, d).unwrap()
    }

    fn e(n: usize, i: usize, j: usize) -> CMat<f64> {
        let mut m = CMat::zeros(n, n);
        m[(i, j)] = cx(1.0, 0.0);
        m
    }

    #[test]
    fn add_examples() {
        let z1 = p("z1", 2);
        assert_eq!(z1.add(&p("z2", 2)).unwrap(), p("z1+z2", 2));
        assert!(z1.add(&z1.neg()).unwrap().is_zero());
        assert_eq!(z1.add(&z1).unwrap(), p("2*z1", 2));
        assert!(z1.add(&p("[[z1, z2]]", 2)).is_err());
    }

    #[test]
    fn mul_examples() {
        assert_eq!(p("z1", 2).mul(&p("z2", 2)).unwrap(), p("z1*z2", 2));
        assert_eq!(p("z1", 2).mul(&p("[[z1, z2]]", 2)).unwrap(), p("[[z1*z1, z1*z2]]", 2));
        let q = p("[[z1 + 3, z2*z1]]", 2);
        assert_eq!(p("1", 2).mul(&q).unwrap(), q);
        assert_eq!(q.degree(), Some(2));
        assert_eq!(q.column_degrees(), vec![Some(1), Some(2)]);
    }

    #[test]
    fn transpose_examples() {
        assert_eq!(p("z1*z2", 2).transpose_symbol(), p("z2*z1", 2));
        assert_eq!(p("z1+z2", 2).transpose_symbol(), p("z1+z2", 2));
    }

    #[test]
    fn eval_examples() {
        let z = RowTuple::new(vec![e(2, 0, 1), e(2, 1, 0)]).unwrap();
        assert_eq!(p("z1*z2", 2).eval_at_point(&z).unwrap(), e(2, 0, 0));
        let zero = RowTuple::zeros(2, 3);
        assert!(p("z1", 2).eval_at_point(&zero).unwrap().iter().all(|c| c.norm_sqr() == 0.0));
        // constant c evaluates to I_n ⊗ c
        let c = p("[[1, 2],[3, 4]]", 2);
        let v = c.eval_at_point(&zero).unwrap();
        assert_eq!(v, linalg::kron(&CMat::identity(3, 3), &c.coeff(&Word::empty())));
    }

    #[test]
    fn long_monomial_word() {
        let m = p("z1*z2*z2*z1*z1*z2", 2);
        let (w, _) = m.terms().next().unwrap();
        assert_eq!(w, &Word::parse("122112", 2).unwrap());
    }

    #[test]
    fn expression_round_trip() {
        for s in ["z1*z2 - 0.25i*z1 + (1.5-2i)", "[[z1, 0],[3, -z2*z1]]", "0"] {
            let q = p(s, 2);
            assert_eq!(p(&q.to_expr(), 2), q, "{}", q.to_expr());
        }
    }

    #[test]
    fn canonical_phase_makes_lead_positive() {
        let q = p("[[-i*z1, 2]]", 2).canonical_phase(1e-12);
        assert_eq!(q.coeff(&Word::single(1))[(0, 0)], cx(1.0, 0.0));
        assert_eq!(q.coeff(&Word::empty())[(0, 1)], cx(2.0, 0.0));
    }

    pub(crate) fn arb_poly(d: usize, rows: usize, cols: usize, deg: usize) -> impl Strategy<Value = MatPoly<f64>> {
        let nwords = crate::words::count_upto(d, deg);
        prop::collection::vec(
            (0..nwords, prop::collection::vec((-2i32..=2, -2i32..=2), rows * cols)),
            0..5,
        )
        .prop_map(move |terms| {
            let ts = terms.into_iter().map(|(i, ent)| {
                let m = CMat::from_row_slice(rows, cols, &ent.iter().map(|&(a, b)| cx(a as f64, b as f64)).collect::<Vec<_>>());
                (crate::words::unrank_word(i, d), m)
            });
            MatPoly::from_terms(d, rows, cols, ts).unwrap()
        })
    }

    fn arb_point(d: usize, n: usize) -> impl Strategy<Value = RowTuple<f64>> {
        prop::collection::vec(-1.0f64..1.0, 2 * n * n * d).prop_map(move |v| {
            let mats = (0..d)
                .map(|k| CMat::from_fn(n, n, |i, j| { let o = 2 * (k * n * n + i * n + j); cx(v[o], v[o + 1]) }))
                .collect();
            RowTuple::new(mats).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn mul_associative_distributive(a in arb_poly(2, 2, 2, 2), b in arb_poly(2, 2, 2, 2), c in arb_poly(2, 2, 2, 2)) {
            prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
            let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
            let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn eval_multiplicative(a in arb_poly(3, 2, 1, 2), b in arb_poly(3, 1, 2, 2), z in arb_point(3, 2)) {
            let lhs = a.mul(&b).unwrap().eval_at_point(&z).unwrap();
            let rhs = a.eval_at_point(&z).unwrap() * b.eval_at_point(&z).unwrap();
            prop_assert!(linalg::max_abs(&(lhs - rhs)) < 1e-9);
        }

        #[test]
        fn transpose_reverses_products(a in arb_poly(3, 1, 1, 3), b in arb_poly(3, 1, 1, 3)) {
            prop_assert_eq!(a.mul(&b).unwrap().transpose_symbol(), b.transpose_symbol().mul(&a.transpose_symbol()).unwrap());
            prop_assert_eq!(a.transpose_symbol().transpose_symbol(), a);
        }
    }
}
