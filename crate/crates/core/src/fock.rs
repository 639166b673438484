//! Coordinates on the truncated Fock space `H²_{d,≤N} ⊗ C^r`, shifts,
//! the transpose unitary and multiplier matrices.

use crate::error::{NcError, Result};
use crate::ncpoly::MatPoly;
use crate::scalar::{c1, CMat, CVec, Cx, Real};
use crate::words::{count_upto, rank_word, unrank_word, Word};

/// The window `H²_{d,≤degree} ⊗ C^r`; basis `(α, j)` sits at `r * rank(α) + j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Truncation {
    pub d: usize,
    pub degree: usize,
    pub r: usize,
}

impl Truncation {
    pub fn new(d: usize, degree: usize, r: usize) -> Self {
        Truncation { d, degree, r }
    }

    pub fn num_words(&self) -> usize {
        count_upto(self.d, self.degree)
    }

    pub fn dim(&self) -> usize {
        self.r * self.num_words()
    }

    pub fn index(&self, w: &Word, j: usize) -> usize {
        self.r * rank_word(w, self.d).expect("word letters checked upstream") + j
    }

    /// Inverse of `index`.
    pub fn basis(&self, i: usize) -> (Word, usize) {
        (unrank_word(i / self.r, self.d), i % self.r)
    }

    pub fn with_degree(&self, degree: usize) -> Self {
        Truncation { degree, ..*self }
    }

    pub fn with_r(&self, r: usize) -> Self {
        Truncation { r, ..*self }
    }

    /// Degree of basis vector `i`.
    pub fn degree_of(&self, i: usize) -> usize {
        self.basis(i).0.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Matrix of `F(L)` (or of a right shift) between two windows.
///
/// `limits[j]` is the largest input degree used in domain coefficient `j`;
/// inputs above it are outside the window and their columns are zero.
#[derive(Clone, Debug)]
pub struct MultMatrix<T: Real> {
    pub symbol: MatPoly<T>,
    pub side: Side,
    pub dom: Truncation,
    pub cod: Truncation,
    pub limits: Vec<usize>,
    pub matrix: CMat<T>,
    pub exact: bool,
}

impl<T: Real> MultMatrix<T> {
    /// Domain indices inside the window.
    pub fn active(&self) -> Vec<usize> {
        (0..self.dom.dim()).filter(|&i| self.is_active(i)).collect()
    }

    pub fn is_active(&self, i: usize) -> bool {
        let (w, j) = self.dom.basis(i);
        w.len() <= self.limits[j]
    }

    /// The matrix restricted to active domain columns.
    pub fn active_matrix(&self) -> CMat<T> {
        let act = self.active();
        CMat::from_fn(self.cod.dim(), act.len(), |r, c| self.matrix[(r, act[c])])
    }

    /// Embed active coordinates back into the full domain.
    pub fn embed_active(&self, x: &CMat<T>) -> CMat<T> {
        let act = self.active();
        let mut out = CMat::zeros(self.dom.dim(), x.ncols());
        for (k, &i) in act.iter().enumerate() {
            out.row_mut(i).copy_from(&x.row(k));
        }
        out
    }

    pub fn uniform(&self) -> bool {
        self.limits.iter().all(|&l| l == self.dom.degree)
    }
}

fn build<T: Real>(f: &MatPoly<T>, dom: Truncation, cod: Truncation, limits: Vec<usize>) -> MultMatrix<T> {
    let mut m = CMat::zeros(cod.dim(), dom.dim());
    let words = crate::words::words_upto(dom.d, dom.degree);
    for (bi, beta) in words.iter().enumerate() {
        for j in 0..dom.r {
            if beta.len() > limits[j] {
                continue;
            }
            let col = dom.r * bi + j;
            for (alpha, fa) in f.terms() {
                let gamma = alpha.concat(beta);
                if gamma.len() > cod.degree {
                    continue;
                }
                let row0 = cod.index(&gamma, 0);
                for i in 0..cod.r {
                    m[(row0 + i, col)] += fa[(i, j)];
                }
            }
        }
    }
    let degs = f.column_degrees();
    let exact = (0..dom.r).all(|j| limits[j] + degs[j].unwrap_or(0) <= cod.degree);
    MultMatrix { symbol: f.clone(), side: Side::Left, dom, cod, limits, matrix: m, exact }
}

/// `F(L)` from degree `n_dom` into degree `n_dom + deg F`; always exact.
pub fn multiplier_matrix<T: Real>(f: &MatPoly<T>, n_dom: usize) -> MultMatrix<T> {
    let n_cod = n_dom + f.degree().unwrap_or(0);
    let dom = Truncation::new(f.d(), n_dom, f.cols());
    let cod = Truncation::new(f.d(), n_cod, f.rows());
    build(f, dom, cod, vec![n_dom; f.cols()])
}

/// `F(L)` into the codomain window of degree `n`, column `j` taking inputs of
/// degree at most `n - deg F_j`. Exact, and every output lies in degree `≤ n`.
pub fn window_matrix<T: Real>(f: &MatPoly<T>, n: usize) -> Result<MultMatrix<T>> {
    let degs: Vec<usize> = f.column_degrees().into_iter().map(|d| d.unwrap_or(0)).collect();
    if let Some(&worst) = degs.iter().max() {
        if worst > n {
            return Err(NcError::WindowOverflow(format!("symbol column degree {worst} exceeds window degree {n}")));
        }
    }
    let limits: Vec<usize> = degs.iter().map(|&k| n - k).collect();
    let n_dom = limits.iter().copied().max().unwrap_or(n);
    let dom = Truncation::new(f.d(), n_dom, f.cols());
    let cod = Truncation::new(f.d(), n, f.rows());
    Ok(build(f, dom, cod, limits))
}

fn check_letter(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(NcError::LetterOutOfRange { k, d });
    }
    Ok(())
}

/// `L_k ⊗ I_r` from the window `t` into degree `t.degree + 1`.
pub fn left_shift_matrix<T: Real>(k: usize, t: Truncation) -> Result<MultMatrix<T>> {
    check_letter(k, t.d)?;
    let sym = MatPoly::monomial(t.d, Word::single(k), CMat::identity(t.r, t.r));
    Ok(multiplier_matrix(&sym, t.degree))
}

/// `R_k ⊗ I_r` from the window `t` into degree `t.degree + 1`.
pub fn right_shift_matrix<T: Real>(k: usize, t: Truncation) -> Result<MultMatrix<T>> {
    check_letter(k, t.d)?;
    let cod = t.with_degree(t.degree + 1);
    let tail = Word::single(k);
    let mut m = CMat::zeros(cod.dim(), t.dim());
    for i in 0..t.dim() {
        let (w, j) = t.basis(i);
        m[(cod.index(&w.concat(&tail), j), i)] = c1();
    }
    let sym = MatPoly::monomial(t.d, tail, CMat::identity(t.r, t.r));
    Ok(MultMatrix { symbol: sym, side: Side::Right, dom: t, cod, limits: vec![t.degree; t.r], matrix: m, exact: true })
}

/// `R_k ⊗ I` compressed to the square window `t` (top degree maps to zero).
pub fn compressed_right_shift<T: Real>(k: usize, t: Truncation) -> Result<CMat<T>> {
    check_letter(k, t.d)?;
    let tail = Word::single(k);
    let mut m = CMat::zeros(t.dim(), t.dim());
    for i in 0..t.dim() {
        let (w, j) = t.basis(i);
        if w.len() < t.degree {
            m[(t.index(&w.concat(&tail), j), i)] = c1();
        }
    }
    Ok(m)
}

/// Permutation `(α, j) ↦ (reverse α, j)`.
pub fn transpose_unitary_matrix<T: Real>(t: Truncation) -> CMat<T> {
    let mut m = CMat::zeros(t.dim(), t.dim());
    for i in 0..t.dim() {
        let (w, j) = t.basis(i);
        m[(t.index(&w.reverse(), j), i)] = c1();
    }
    m
}

/// Coefficient vector of a column polynomial in the window `t`.
pub fn poly_to_vec<T: Real>(p: &MatPoly<T>, t: Truncation) -> Result<CVec<T>> {
    if p.cols() != 1 || p.rows() != t.r {
        return Err(NcError::ShapeMismatch(format!("expected {}x1 symbol, got {:?}", t.r, p.shape())));
    }
    Ok(poly_to_mat(p, t)?.column(0).into_owned())
}

/// Each symbol column as a coefficient vector in the window `t`.
pub fn poly_to_mat<T: Real>(p: &MatPoly<T>, t: Truncation) -> Result<CMat<T>> {
    if p.rows() != t.r {
        return Err(NcError::ShapeMismatch(format!("symbol has {} rows, window r = {}", p.rows(), t.r)));
    }
    if let Some(deg) = p.degree() {
        if deg > t.degree {
            return Err(NcError::DegreeOverflow { degree: deg, max: t.degree });
        }
    }
    let mut m = CMat::zeros(t.dim(), p.cols());
    for (w, c) in p.terms() {
        let row0 = t.index(w, 0);
        m.view_mut((row0, 0), (t.r, p.cols())).copy_from(c);
    }
    Ok(m)
}

pub fn vec_to_poly<T: Real>(v: &CVec<T>, t: Truncation) -> MatPoly<T> {
    mat_to_poly(&CMat::from_column_slice(v.len(), 1, v.as_slice()), t)
}

/// Inverse of `poly_to_mat`: column `c` of `m` becomes symbol column `c`.
pub fn mat_to_poly<T: Real>(m: &CMat<T>, t: Truncation) -> MatPoly<T> {
    assert_eq!(m.nrows(), t.dim(), "vector length must match the window");
    let terms = (0..t.num_words()).map(|wi| {
        (unrank_word(wi, t.d), m.view((t.r * wi, 0), (t.r, m.ncols())).into_owned())
    });
    MatPoly::from_terms(t.d, t.r, m.ncols(), terms).expect("shapes agree")
}

/// Zero-pad (or cut) a coordinate matrix from window `from` into window `to`.
pub fn rewindow<T: Real>(m: &CMat<T>, from: Truncation, to: Truncation) -> CMat<T> {
    let mut out = CMat::zeros(to.dim(), m.ncols());
    let n = from.dim().min(to.dim());
    out.view_mut((0, 0), (n, m.ncols())).copy_from(&m.view((0, 0), (n, m.ncols())));
    out
}

/// CSV dump: a header line `rows,cols`, then one line per row with `re,im` pairs.
pub fn write_csv<T: Real>(m: &CMat<T>) -> String {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(vec![]);
    w.write_record([m.nrows().to_string(), m.ncols().to_string()]).expect("in-memory write");
    for i in 0..m.nrows() {
        let rec: Vec<String> = (0..m.ncols())
            .flat_map(|j| [format!("{:?}", m[(i, j)].re), format!("{:?}", m[(i, j)].im)])
            .collect();
        w.write_record(rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("ascii output")
}

pub fn read_csv<T: Real>(text: &str) -> Result<CMat<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let bad = |msg: String| NcError::Parse { pos: 0, msg };
    let mut recs = rdr.records();
    let head = recs.next().ok_or_else(|| bad("empty CSV".into()))?.map_err(|e| bad(e.to_string()))?;
    if head.len() != 2 {
        return Err(bad("header must be rows,cols".into()));
    }
    let rows: usize = head[0].parse().map_err(|_| bad("bad row count".into()))?;
    let cols: usize = head[1].parse().map_err(|_| bad("bad column count".into()))?;
    let mut m = CMat::zeros(rows, cols);
    for i in 0..rows {
        let rec = recs
            .next()
            .ok_or_else(|| bad(format!("missing row {i}")))?
            .map_err(|e| bad(e.to_string()))?;
        if rec.len() != 2 * cols {
            return Err(bad(format!("row {i} has {} fields, expected {}", rec.len(), 2 * cols)));
        }
        for j in 0..cols {
            let a: f64 = rec[2 * j].parse().map_err(|_| bad(format!("bad number in row {i}")))?;
            let b: f64 = rec[2 * j + 1].parse().map_err(|_| bad(format!("bad number in row {i}")))?;
            m[(i, j)] = Cx::new(T::from_f64(a).unwrap(), T::from_f64(b).unwrap());
        }
    }
    Ok(m)
}
