use super::MatPoly;
use crate::error::{NcError, Result};
use crate::scalar::{to_f64, CMat, Cx, Real};
use crate::words::Word;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct JsonTerm {
    pub word: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

/// Wire form of a symbol; terms sorted by word rank.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct JsonPoly {
    pub d: usize,
    pub rows: usize,
    pub cols: usize,
    pub terms: Vec<JsonTerm>,
}

impl<T: Real> From<&MatPoly<T>> for JsonPoly {
    fn from(p: &MatPoly<T>) -> Self {
        let terms = p
            .terms()
            .map(|(w, m)| JsonTerm {
                word: w.letters().collect(),
                matrix: (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| [to_f64(m[(i, j)].re), to_f64(m[(i, j)].im)]).collect())
                    .collect(),
            })
            .collect();
        JsonPoly { d: p.d(), rows: p.rows(), cols: p.cols(), terms }
    }
}

impl JsonPoly {
    pub fn to_poly<T: Real>(&self) -> Result<MatPoly<T>> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let w = Word::new(&t.word, self.d)?;
            if t.matrix.len() != self.rows || t.matrix.iter().any(|r| r.len() != self.cols) {
                return Err(NcError::ShapeMismatch(format!("term {w} does not match {}x{}", self.rows, self.cols)));
            }
            let m = CMat::from_fn(self.rows, self.cols, |i, j| {
                let [a, b] = t.matrix[i][j];
                Cx::new(T::from_f64(a).unwrap(), T::from_f64(b).unwrap())
            });
            terms.push((w, m));
        }
        MatPoly::from_terms(self.d, self.rows, self.cols, terms)
    }
}

pub fn to_json<T: Real>(p: &MatPoly<T>) -> String {
    serde_json::to_string(&JsonPoly::from(p)).expect("plain data serializes")
}

pub fn from_json<T: Real>(s: &str) -> Result<MatPoly<T>> {
    let j: JsonPoly = serde_json::from_str(s)?;
    j.to_poly()
}
