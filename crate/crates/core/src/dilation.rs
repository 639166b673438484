//! Row contractions, the Poisson-kernel dilation, recovery of a multiplier
//! from an invariant space, and Beurling inner multipliers.

use crate::error::{NcError, Result};
use crate::fock::{compressed_right_shift, mat_to_poly, multiplier_matrix, window_matrix, Truncation};
use crate::linalg;
use crate::multops::is_inner;
use crate::ncpoly::{MatPoly, RowTuple};
use crate::scalar::{creal, to_f64, CMat, Real};
use crate::words::{rank_word, words_upto, Word};
use nalgebra::ComplexField;

pub use crate::subspace::NormedSubspace;
use crate::subspace::SubspaceRep;

/// `Σ X_k X_k* ≼ I` within `tol`; returns the row norm.
pub fn is_row_contraction<T: Real>(x: &RowTuple<T>, tol: T) -> (bool, T) {
    let top = linalg::eigh(&x.row_gram()).0.last().copied().unwrap_or(T::zero());
    (top <= T::one() + tol, top.max(T::zero()).sqrt())
}

/// `Φ(A) = Σ X_k A X_k*`.
fn phi<T: Real>(x: &RowTuple<T>, a: &CMat<T>) -> CMat<T> {
    x.mats.iter().fold(CMat::zeros(x.n, x.n), |acc, m| acc + m * a * m.adjoint())
}

/// `s_n = ‖(X*)^[n]‖ = ‖Φ^n(I)‖^{1/2}` for `n = 0..=n_max`.
pub fn purity_index<T: Real>(x: &RowTuple<T>, n_max: usize) -> Vec<T> {
    let mut a: CMat<T> = CMat::identity(x.n, x.n);
    let mut out = Vec::with_capacity(n_max + 1);
    for _ in 0..=n_max {
        out.push(linalg::op_norm::<T>(&a).sqrt());
        a = phi(x, &a);
    }
    out
}

/// `Δ = (I − Σ X_k X_k*)^{1/2}` and the clamp applied to negative eigenvalues.
pub fn defect_operator<T: Real>(x: &RowTuple<T>, tol: T) -> Result<(CMat<T>, T)> {
    let (ok, norm) = is_row_contraction(x, tol);
    if !ok {
        return Err(NcError::NotContractive { norm: to_f64(norm) });
    }
    Ok(linalg::psd_sqrt_cut(&(CMat::identity(x.n, x.n) - x.row_gram()), tol))
}

/// The isometry `h ↦ Σ_α z^α ⊗ V* Δ X_{i1}* ⋯ X_{ik}* h` into the window of
/// `H² ⊗ ran Δ`, with `V` an orthonormal basis of `ran Δ`.
#[derive(Clone, Debug)]
pub struct PoissonKernel<T: Real> {
    pub window: Truncation,
    pub defect_basis: CMat<T>,
    pub matrix: CMat<T>,
    pub purity_residual: T,
    pub isometry_defect: T,
}

pub fn poisson_kernel<T: Real>(x: &RowTuple<T>, n: usize, tol: T) -> Result<PoissonKernel<T>> {
    let (delta, _) = defect_operator(x, tol)?;
    let mut v = linalg::orth(&delta, linalg::cut(&delta, tol));
    linalg::canonical_columns(&mut v, tol);
    poisson_kernel_with_basis(x, n, &v, tol)
}

/// As `poisson_kernel` with a caller-chosen orthonormal basis of `ran Δ`.
pub fn poisson_kernel_with_basis<T: Real>(x: &RowTuple<T>, n: usize, basis: &CMat<T>, tol: T) -> Result<PoissonKernel<T>> {
    let (delta, _) = defect_operator(x, tol)?;
    let s = purity_index(x, n + 1);
    let purity_residual = s[n + 1] * s[n + 1];
    if purity_residual > tol {
        return Err(NcError::Impure { residual: to_f64(purity_residual) });
    }
    let m = basis.ncols();
    let window = Truncation::new(x.d, n, m);
    let words = words_upto(x.d, n);
    let head = basis.adjoint() * &delta;
    let mut ys: Vec<CMat<T>> = Vec::with_capacity(words.len());
    let mut k = CMat::zeros(window.dim(), x.n);
    for (wi, w) in words.iter().enumerate() {
        // Y_{iβ} = X_i* Y_β
        let y = match w.split_first() {
            None => CMat::identity(x.n, x.n),
            Some((i, tail)) => x.mats[i - 1].adjoint() * &ys[rank_word(&tail, x.d)?],
        };
        k.view_mut((m * wi, 0), (m, x.n)).copy_from(&(&head * &y));
        ys.push(y);
    }
    let isometry_defect = linalg::max_abs(&(k.adjoint() * &k - CMat::identity(x.n, x.n)));
    Ok(PoissonKernel { window, defect_basis: basis.clone(), matrix: k, purity_residual, isometry_defect })
}

/// Largest `‖(R_k* ⊗ I) K − K X_k*‖` over coefficients of degree `< N`. The
/// coefficient of `(R_k* ⊗ I) K` at `β` is the coefficient of `K` at `βk`.
pub fn intertwining_defect<T: Real>(pk: &PoissonKernel<T>, x: &RowTuple<T>) -> Result<T> {
    let t = pk.window;
    let m = t.r;
    let mut worst = T::zero();
    for beta in words_upto(x.d, t.degree.saturating_sub(1)) {
        let rhs_base = pk.matrix.rows(m * rank_word(&beta, x.d)?, m);
        for k in 1..=x.d {
            let lhs = pk.matrix.rows(m * rank_word(&beta.concat(&Word::single(k)), x.d)?, m);
            let rhs = rhs_base * x.mats[k - 1].adjoint();
            worst = worst.max(linalg::max_abs(&(lhs - rhs)));
        }
    }
    Ok(worst)
}

/// The unitary relating two dilations of the same row contraction. It acts on
/// the window as `I ⊗ U`, which commutes with every `R_k ⊗ I`.
#[derive(Clone, Debug)]
pub struct DilationEquivalence<T: Real> {
    /// `U` on the defect coordinates.
    pub unitary: CMat<T>,
    /// Rank of the coefficient row `[K(α)]_α`; equals the defect rank for a
    /// minimal dilation, which is what makes `U` unique.
    pub coefficient_rank: usize,
    pub unitarity_defect: T,
    /// `‖(I ⊗ U) K_a − K_b‖`.
    pub fix_defect: T,
}

fn coefficient_row<T: Real>(pk: &PoissonKernel<T>) -> CMat<T> {
    let (m, n, nw) = (pk.window.r, pk.matrix.ncols(), pk.window.num_words());
    let mut out = CMat::zeros(m, n * nw);
    for wi in 0..nw {
        out.view_mut((0, wi * n), (m, n)).copy_from(&pk.matrix.rows(wi * m, m));
    }
    out
}

/// Finds the shift-commuting `W = I ⊗ U` with `W K_a = K_b` by least squares on
/// the coefficient rows and reports how far it is from unitary.
pub fn dilation_equivalence<T: Real>(a: &PoissonKernel<T>, b: &PoissonKernel<T>, tol: T) -> Result<DilationEquivalence<T>> {
    if a.window != b.window || a.matrix.ncols() != b.matrix.ncols() {
        return Err(NcError::ShapeMismatch("dilations live on different windows".into()));
    }
    let ca = coefficient_row(a);
    let cb = coefficient_row(b);
    let cut = linalg::cut(&ca, tol);
    let u = &cb * linalg::pinv(&ca, cut);
    let m = u.nrows();
    let unitarity_defect = linalg::max_abs(&(u.adjoint() * &u - CMat::identity(m, m)));
    let fix_defect = linalg::max_abs(&(&u * &ca - &cb));
    Ok(DilationEquivalence { unitary: u, coefficient_rank: linalg::rank(&ca, cut), unitarity_defect, fix_defect })
}

#[derive(Clone, Debug)]
pub struct DbbReport<T: Real> {
    pub symbol: MatPoly<T>,
    /// Compression of `R ⊗ I` in orthonormal coordinates of the internal norm.
    pub x_hat: RowTuple<T>,
    pub row_norm: T,
    pub defect_rank: usize,
    pub embedding_norm: T,
    /// `‖F(L)‖` on the window of the recovered symbol.
    pub multiplier_norm: T,
    /// Largest principal-angle sine between `ran F(L)` and the space.
    pub range_defect: T,
    /// Largest entry of the difference of internal grams in the space's basis.
    pub gram_defect: T,
}

/// Recovers `F` with `M = M^L(F)` isometrically from an R-invariant normed space.
pub fn dbb_multiplier<T: Real>(m: &NormedSubspace<T>, tol: T) -> Result<DbbReport<T>> {
    let space = &m.space;
    let t = space.ambient;
    space.check_invariant(tol)?;
    let b = space.basis.clone();
    let g = linalg::herm(&m.gram);
    let k = m.dim();
    let s = space.low_coords(tol);
    let p_in = if s.ncols() == 0 {
        CMat::zeros(k, k)
    } else {
        let sgs = s.adjoint() * &g * &s;
        let inv = sgs.clone().try_inverse().ok_or_else(|| NcError::Precondition("singular internal gram".into()))?;
        &s * inv * s.adjoint() * &g
    };
    let chol = g.clone().cholesky().ok_or_else(|| NcError::Precondition("internal gram is not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l.clone().try_inverse().ok_or_else(|| NcError::Precondition("singular internal gram".into()))?;
    let l_inv_adj = l_inv.adjoint();
    let mut mats = Vec::with_capacity(t.d);
    for kk in 1..=t.d {
        let r = compressed_right_shift::<T>(kk, t)?;
        let a = b.adjoint() * r * &b * &p_in;
        mats.push(l.adjoint() * a * &l_inv_adj);
    }
    let x_hat = RowTuple { d: t.d, n: k, mats };
    let (ok, row_norm) = is_row_contraction(&x_hat, tol);
    if !ok {
        return Err(NcError::NotContractive { norm: to_f64(row_norm) });
    }
    let d2 = CMat::identity(k, k) - x_hat.row_gram();
    let (vals, vecs) = linalg::eigh(&d2);
    let keep: Vec<usize> = (0..k).filter(|&i| vals[i] > tol).collect();
    let mut cols = CMat::zeros(t.dim(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let y = vecs.column(i) * creal(vals[i].sqrt());
        cols.column_mut(c).copy_from(&(&b * (&l_inv_adj * y)));
    }
    let scale = linalg::max_abs(&cols).max(T::one());
    let symbol = mat_to_poly(&cols, t).chop(T::from_f64(64.0).unwrap() * T::default_epsilon() * scale).canonical_phase(tol);
    let embedding_norm = m.embedding_norm();
    let (multiplier_norm, range_defect, gram_defect) = if symbol.cols() == 0 {
        (T::zero(), if k == 0 { T::zero() } else { T::one() }, T::zero())
    } else {
        let rs = crate::rkhs::build_range_space(&symbol, t.degree, tol)?;
        let mn = linalg::op_norm(&rs.op.active_matrix());
        let rd = linalg::subspace_distance(rs.basis(), &b);
        let e = rs.basis().adjoint() * &b;
        let gd = if rs.dim() == k { linalg::max_abs(&(e.adjoint() * rs.gram() * &e - &g)) } else { T::one() };
        (mn, rd, gd)
    };
    Ok(DbbReport { symbol, x_hat, row_norm, defect_rank: keep.len(), embedding_norm, multiplier_norm, range_defect, gram_defect })
}

/// `K ⊖ Σ_k (R_k ⊗ I) K` on the window.
pub fn wandering_basis<T: Real>(kspace: &SubspaceRep<T>, tol: T) -> Result<SubspaceRep<T>> {
    kspace.check_invariant(tol)?;
    let t = kspace.ambient;
    let b = &kspace.basis;
    if b.ncols() == 0 {
        return Ok(kspace.clone());
    }
    let low = b * kspace.low_coords(tol);
    let mut shifted = CMat::zeros(t.dim(), 0);
    for k in 1..=t.d {
        shifted = linalg::hstack(&shifted, &(compressed_right_shift::<T>(k, t)? * &low));
    }
    let coords = b.adjoint() * shifted;
    let q = linalg::orth(&coords, linalg::cut(&coords, tol));
    let comp = linalg::complement(&q, b.ncols());
    let w = b * comp;
    Ok(SubspaceRep::new(t, w, tol).with_limits(kspace.limits.clone()).graded(tol))
}

/// Inner `Θ` with `ran Θ(L) = K`, from a wandering basis, and its isometry defect.
pub fn beurling_inner<T: Real>(kspace: &SubspaceRep<T>, tol: T) -> Result<(MatPoly<T>, T)> {
    let w = wandering_basis(kspace, tol)?;
    let t = w.ambient;
    for c in 0..w.dim() {
        for i in 0..t.dim() {
            let (word, j) = t.basis(i);
            if word.len() >= w.limits[j] && w.basis[(i, c)].modulus() > tol {
                return Err(NcError::WindowOverflow(format!(
                    "wandering vector reaches the top degree {} of its window",
                    w.limits[j]
                )));
            }
        }
    }
    let scale = linalg::max_abs(&w.basis).max(T::one());
    let theta = mat_to_poly(&w.basis, t).chop(T::from_f64(64.0).unwrap() * T::default_epsilon() * scale).canonical_phase(tol);
    if theta.cols() == 0 {
        return Ok((theta, T::zero()));
    }
    let deg = theta.degree().unwrap_or(0);
    let (_, def) = is_inner(&multiplier_matrix(&theta, t.degree.saturating_sub(deg)), tol);
    Ok((theta, def))
}

/// The window-degree check `ran Θ(L) = K` on inputs up to degree `N − deg Θ`.
pub fn beurling_range_defect<T: Real>(theta: &MatPoly<T>, kspace: &SubspaceRep<T>, tol: T) -> Result<T> {
    if theta.cols() == 0 {
        return Ok(if kspace.dim() == 0 { T::zero() } else { T::one() });
    }
    let w = window_matrix(theta, kspace.ambient.degree)?;
    let a = w.active_matrix();
    let q = linalg::orth(&a, linalg::cut(&a, tol));
    Ok(linalg::subspace_distance(&q, &kspace.basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::poly_to_mat;
    use crate::ncpoly::parse_ncpoly;
    use crate::rkhs::build_range_space;
    use crate::scalar::cx;

    fn p(s: &str, d: usize) -> MatPoly<f64> {
        parse_ncpoly(s, d).unwrap()
    }

    fn e(n: usize, i: usize, j: usize) -> CMat<f64> {
        let mut m = CMat::zeros(n, n);
        m[(i, j)] = cx(1.0, 0.0);
        m
    }

    fn scalar(x: f64) -> RowTuple<f64> {
        RowTuple::scalar(&[cx(x, 0.0)]).unwrap()
    }

    #[test]
    fn contraction_examples() {
        assert_eq!(is_row_contraction(&RowTuple::<f64>::zeros(2, 2), 1e-12), (true, 0.0));
        let x = RowTuple::new(vec![e(2, 0, 1), e(2, 1, 0)]).unwrap();
        let (ok, n) = is_row_contraction(&x, 1e-12);
        assert!(ok && (n - 1.0).abs() < 1e-14);
        assert!(!is_row_contraction(&scalar(1.1), 1e-12).0);
    }

    #[test]
    fn purity_examples() {
        let nil = RowTuple::new(vec![e(3, 0, 1) * cx(0.5, 0.0), e(3, 1, 2) * cx(0.5, 0.0)]).unwrap();
        let s = purity_index(&nil, 5);
        assert!(s[3..].iter().all(|&v| v == 0.0));
        assert!(purity_index(&scalar(1.0), 6).iter().all(|&v| (v - 1.0).abs() < 1e-15));
        for (n, v) in purity_index(&scalar(0.5), 8).into_iter().enumerate() {
            assert!((v - 0.5f64.powi(n as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn defect_examples() {
        let (d, _) = defect_operator(&RowTuple::<f64>::zeros(1, 1), 1e-12).unwrap();
        assert_eq!(d[(0, 0)], cx(1.0, 0.0));
        let x = RowTuple::new(vec![e(2, 0, 1)]).unwrap();
        let (d, _) = defect_operator(&x, 1e-12).unwrap();
        assert!(linalg::max_abs(&(d - e(2, 1, 1))) < 1e-14);
        let full = RowTuple::new(vec![e(2, 0, 1), e(2, 1, 0)]).unwrap();
        assert!(linalg::max_abs(&defect_operator(&full, 1e-12).unwrap().0) < 1e-14);
    }

    #[test]
    fn poisson_examples() {
        let pk = poisson_kernel(&RowTuple::<f64>::zeros(2, 2), 3, 1e-12).unwrap();
        assert_eq!(pk.window.r, 2);
        assert!(pk.matrix.rows(2, pk.matrix.nrows() - 2).iter().all(|z| z.norm() == 0.0));
        assert!(pk.isometry_defect < 1e-14);
        // X = E12, d = 1: K e1 = z ⊗ e2, K e2 = 1 ⊗ e2
        let x = RowTuple::new(vec![e(2, 0, 1)]).unwrap();
        let pk = poisson_kernel(&x, 3, 1e-12).unwrap();
        assert_eq!(pk.window.r, 1);
        let sym = mat_to_poly(&pk.matrix, pk.window);
        assert!(sym.distance(&p("[[z1, 1]]", 1)).unwrap() < 1e-14);
        assert!(pk.isometry_defect < 1e-14);
        assert!(intertwining_defect(&pk, &x).unwrap() < 1e-14);
        assert!(matches!(poisson_kernel(&scalar(0.9), 3, 1e-12), Err(NcError::Impure { .. })));
    }

    #[test]
    fn equivalence_of_two_bases() {
        let x = RowTuple::new(vec![e(3, 0, 1) * cx(0.5, 0.0), e(3, 1, 2) * cx(0.4, 0.3)]).unwrap();
        let a = poisson_kernel(&x, 3, 1e-12).unwrap();
        let m = a.defect_basis.ncols();
        let flip = CMat::from_fn(m, m, |i, j| if i + j == m - 1 { cx(0.0, 1.0) } else { cx(0.0, 0.0) });
        let b = poisson_kernel_with_basis(&x, 3, &(&a.defect_basis * &flip), 1e-12).unwrap();
        let eq = dilation_equivalence(&a, &b, 1e-12).unwrap();
        assert_eq!(eq.coefficient_rank, m);
        assert!(linalg::max_abs(&(eq.unitary - flip.adjoint())) < 1e-12);
        assert!(eq.unitarity_defect < 1e-12 && eq.fix_defect < 1e-12);
    }

    #[test]
    fn dbb_examples() {
        let rs = build_range_space(&p("z1", 1), 4, 1e-12).unwrap();
        let out = dbb_multiplier(&rs.space, 1e-10).unwrap();
        assert!(out.symbol.distance(&p("z1", 1)).unwrap() < 1e-12);
        let t = Truncation::new(1, 3, 1);
        let whole = NormedSubspace { space: SubspaceRep::new(t, CMat::identity(4, 4), 1e-12), gram: CMat::identity(4, 4) * cx(2.0, 0.0) };
        let out = dbb_multiplier(&whole, 1e-10).unwrap();
        assert!(out.symbol.distance(&p("0.7071067811865476", 1)).unwrap() < 1e-12);
        assert!((out.embedding_norm - out.multiplier_norm).abs() < 1e-12);
        let rs = build_range_space(&p("[[z1, z2]]", 2), 3, 1e-12).unwrap();
        let out = dbb_multiplier(&rs.space, 1e-10).unwrap();
        assert_eq!(out.symbol.shape(), (1, 2));
        assert_eq!(out.symbol.degree(), Some(1));
        assert!(crate::multops::is_inner(&multiplier_matrix(&out.symbol, 2), 1e-10).0);
        assert!(out.range_defect < 1e-10 && out.gram_defect < 1e-10);
    }

    #[test]
    fn wandering_examples() {
        let t = Truncation::new(2, 3, 1);
        let deg1 = SubspaceRep::new(t, CMat::identity(t.dim(), t.dim()).columns(1, t.dim() - 1).into_owned(), 1e-12);
        let w = wandering_basis(&deg1, 1e-12).unwrap();
        assert_eq!(w.dim(), 2);
        assert!(w.residual(&poly_to_mat(&p("[[z1, z2]]", 2), t).unwrap()) < 1e-14);
        let (theta, def) = beurling_inner(&deg1, 1e-12).unwrap();
        assert!(theta.distance(&p("[[z1, z2]]", 2)).unwrap() < 1e-14 && def < 1e-14);
        let t1 = Truncation::new(1, 5, 1);
        let z2 = SubspaceRep::new(t1, CMat::identity(6, 6).columns(2, 4).into_owned(), 1e-12);
        let (theta, _) = beurling_inner(&z2, 1e-12).unwrap();
        assert!(theta.distance(&p("z1*z1", 1)).unwrap() < 1e-14);
        assert!(beurling_range_defect(&theta, &z2, 1e-12).unwrap() < 1e-14);
        assert_eq!(wandering_basis(&SubspaceRep::<f64>::zero(t), 1e-12).unwrap().dim(), 0);
        // ker of (z, z²) gives (−z; 1)/√2
        let w = window_matrix(&p("[[z1, z1*z1]]", 1), 5).unwrap();
        let (k, _) = crate::multops::kernel_on_window(&w, 1e-12).unwrap();
        let (theta, def) = beurling_inner(&k, 1e-12).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expect = p("[[-z1],[1]]", 1).scale(cx(h, 0.0));
        assert!(theta.distance(&expect).unwrap() < 1e-12, "{theta:?}");
        assert!(def < 1e-12);
    }
}
