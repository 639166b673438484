//! Subspaces of a Fock window, with and without an internal norm.

use crate::error::{NcError, Result};
use crate::fock::{compressed_right_shift, Truncation};
use crate::linalg;
use crate::scalar::{creal, CMat, CVec, Real};

/// Orthonormal basis of a subspace of the window `ambient`.
///
/// `limits[j]` caps the degree carried by coefficient `j`; a graded window
/// sits inside the uniform truncation this way. Vectors never exceed it.
#[derive(Clone, Debug)]
pub struct SubspaceRep<T: Real> {
    pub ambient: Truncation,
    pub limits: Vec<usize>,
    pub basis: CMat<T>,
}

impl<T: Real> SubspaceRep<T> {
    /// Wrap orthonormal columns, fixing their phases.
    pub fn new(ambient: Truncation, mut basis: CMat<T>, tol: T) -> Self {
        linalg::canonical_columns(&mut basis, tol);
        SubspaceRep { ambient, limits: vec![ambient.degree; ambient.r], basis }
    }

    pub fn with_limits(mut self, limits: Vec<usize>) -> Self {
        assert_eq!(limits.len(), self.ambient.r);
        self.limits = limits;
        self
    }

    /// Orthonormal basis of the span of arbitrary vectors.
    pub fn span(ambient: Truncation, vectors: &CMat<T>, tol: T) -> Self {
        let cut = linalg::default_cut(vectors).max(tol);
        Self::new(ambient, linalg::orth(vectors, cut), tol)
    }

    pub fn zero(ambient: Truncation) -> Self {
        SubspaceRep { ambient, limits: vec![ambient.degree; ambient.r], basis: CMat::zeros(ambient.dim(), 0) }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Largest distance from a column of `x` to the subspace.
    pub fn residual(&self, x: &CMat<T>) -> T {
        linalg::proj_residual(&self.basis, x)
    }

    pub fn orthonormality_defect(&self) -> T {
        let g = self.basis.adjoint() * &self.basis;
        linalg::max_abs(&(g - CMat::identity(self.dim(), self.dim())))
    }

    /// Rotates the basis onto eigenvectors of the compressed degree operator,
    /// where coefficient `j` is weighted by its offset `max(limits) − limits[j]`.
    /// A graded subspace then gets a homogeneous basis; SVD bases can mix
    /// degrees when singular values tie.
    pub fn graded(mut self, tol: T) -> Self {
        if self.dim() == 0 {
            return self;
        }
        let top = self.limits.iter().copied().max().unwrap_or(0);
        let deg: Vec<T> = (0..self.ambient.dim())
            .map(|i| {
                let j = self.ambient.basis(i).1;
                T::from_usize(self.ambient.degree_of(i) + top - self.limits[j]).unwrap()
            })
            .collect();
        let db = CMat::from_fn(self.basis.nrows(), self.dim(), |i, c| self.basis[(i, c)] * creal(deg[i]));
        let (_, v) = linalg::eigh(&linalg::herm(&(self.basis.adjoint() * db)));
        self.basis = &self.basis * v;
        linalg::canonical_columns(&mut self.basis, tol);
        self
    }

    /// Ambient indices at the top allowed degree of their coefficient.
    pub fn top_indices(&self) -> Vec<usize> {
        (0..self.ambient.dim())
            .filter(|&i| {
                let (w, j) = self.ambient.basis(i);
                w.len() >= self.limits[j]
            })
            .collect()
    }

    /// Coordinates (in `basis`) of the part vanishing at the top degrees,
    /// returned with orthonormal columns.
    pub fn low_coords(&self, tol: T) -> CMat<T> {
        let top = self.top_indices();
        let rows = CMat::from_fn(top.len(), self.dim(), |r, c| self.basis[(top[r], c)]);
        let cut = linalg::default_cut(&rows).max(tol);
        linalg::null_space(&rows, cut)
    }

    /// Largest residual of `(R_k ⊗ I) v` outside the subspace, over the low part.
    pub fn invariance_defect(&self, tol: T) -> Result<T> {
        let low = &self.basis * self.low_coords(tol);
        let mut worst = T::zero();
        for k in 1..=self.ambient.d {
            let r = compressed_right_shift::<T>(k, self.ambient)?;
            worst = worst.max(self.residual(&(r * &low)));
        }
        Ok(worst)
    }

    /// Largest residual of `(R_k ⊗ I)* v` outside the subspace.
    pub fn coinvariance_defect(&self) -> Result<T> {
        let mut worst = T::zero();
        for k in 1..=self.ambient.d {
            let r = compressed_right_shift::<T>(k, self.ambient)?;
            worst = worst.max(self.residual(&(r.adjoint() * &self.basis)));
        }
        Ok(worst)
    }

    pub fn check_invariant(&self, tol: T) -> Result<()> {
        let def = self.invariance_defect(tol)?;
        if def > tol {
            return Err(NcError::Precondition(format!("subspace is not R-invariant on the window (defect {def:e})")));
        }
        Ok(())
    }
}

/// A subspace with its own Hilbert norm: `‖basis c‖² = c* gram c`.
#[derive(Clone, Debug)]
pub struct NormedSubspace<T: Real> {
    pub space: SubspaceRep<T>,
    pub gram: CMat<T>,
}

impl<T: Real> NormedSubspace<T> {
    pub fn ambient_norm(space: SubspaceRep<T>) -> Self {
        let n = space.dim();
        NormedSubspace { space, gram: CMat::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn basis(&self) -> &CMat<T> {
        &self.space.basis
    }

    /// Internal squared norm of an ambient vector assumed to lie in the space.
    pub fn norm_sq(&self, v: &CVec<T>) -> T {
        let c = self.space.basis.adjoint() * v;
        (c.adjoint() * &self.gram * c)[(0, 0)].re
    }

    /// `sup ‖v‖_ambient / ‖v‖_M`.
    pub fn embedding_norm(&self) -> T {
        if self.dim() == 0 {
            return T::zero();
        }
        T::one() / linalg::min_eig(&self.gram).max(T::zero()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::poly_to_mat;
    use crate::ncpoly::parse_ncpoly;

    #[test]
    fn shifted_space_is_invariant() {
        let t = Truncation::new(2, 3, 1);
        let gens = parse_ncpoly::<f64>("[[z1, z1*z1, z1*z2, z1*z1*z1, z1*z1*z2, z1*z2*z1, z1*z2*z2]]", 2).unwrap();
        let s = SubspaceRep::span(t, &poly_to_mat(&gens, t).unwrap(), 1e-12);
        assert_eq!(s.dim(), 7);
        assert!(s.invariance_defect(1e-12).unwrap() < 1e-14);
        let consts = SubspaceRep::span(t, &poly_to_mat(&parse_ncpoly::<f64>("1", 2).unwrap(), t).unwrap(), 1e-12);
        assert!(consts.invariance_defect(1e-12).unwrap() > 0.5);
        assert!(consts.coinvariance_defect().unwrap() < 1e-15);
    }
}
