//! Multiplier analysis: intertwining, kernels, inner tests, range containment
//! and Douglas factorization.

use crate::error::{NcError, Result};
use crate::fock::{multiplier_matrix, poly_to_mat, right_shift_matrix, window_matrix, MultMatrix, Truncation};
use crate::linalg;
use crate::ncpoly::MatPoly;
use crate::scalar::{CMat, Real};
use crate::subspace::SubspaceRep;
use nalgebra::ComplexField;

/// Checks `M (R_k ⊗ I) = (R_k ⊗ I) M` on inputs of degree `< t_dom.degree`.
/// Returns the verdict and the largest defect.
pub fn is_left_multiplier<T: Real>(m: &CMat<T>, t_dom: Truncation, t_cod: Truncation, tol: T) -> Result<(bool, T)> {
    if m.shape() != (t_cod.dim(), t_dom.dim()) {
        return Err(NcError::ShapeMismatch(format!("matrix {:?} vs windows {}x{}", m.shape(), t_cod.dim(), t_dom.dim())));
    }
    if t_dom.degree == 0 {
        return Ok((true, T::zero()));
    }
    let small = t_dom.with_degree(t_dom.degree - 1);
    let big_cod = t_cod.with_degree(t_cod.degree + 1);
    let mut worst = T::zero();
    for k in 1..=t_dom.d {
        let rd = right_shift_matrix::<T>(k, small)?.matrix;
        let rc = right_shift_matrix::<T>(k, t_cod)?.matrix;
        let lhs = crate::fock::rewindow(&(m * &rd), t_cod, big_cod);
        let embed = crate::fock::rewindow(&CMat::identity(small.dim(), small.dim()), small, t_dom);
        let rhs = rc * m * embed;
        worst = worst.max(linalg::max_abs(&(lhs - rhs)));
    }
    Ok((worst <= tol, worst))
}

/// Null space of the window matrix and its R-invariance defect.
pub fn kernel_on_window<T: Real>(f: &MultMatrix<T>, tol: T) -> Result<(SubspaceRep<T>, T)> {
    if !f.exact {
        return Err(NcError::Precondition("kernel requires an exact window".into()));
    }
    let a = f.active_matrix();
    let ns = linalg::null_space(&a, linalg::cut(&a, tol));
    let basis = f.embed_active(&ns);
    let space = SubspaceRep::new(f.dom, basis, tol).with_limits(f.limits.clone());
    let def = space.invariance_defect(tol)?;
    Ok((space, def))
}

#[derive(Clone, Debug)]
pub struct ConstantSplit<T: Real> {
    /// Orthonormal basis of `F' = ∩_α ker F_α` in the coefficient space.
    pub subspace: CMat<T>,
    /// Whether `ker F(L) = H² ⊗ F'` on the window.
    pub reducing: bool,
    pub window_kernel_dim: usize,
}

pub fn constant_kernel_split<T: Real>(f: &MatPoly<T>, n: usize, tol: T) -> Result<ConstantSplit<T>> {
    let stacked = f.terms().fold(CMat::zeros(0, f.cols()), |acc, (_, m)| linalg::vstack(&acc, m));
    let mut sub = linalg::null_space(&stacked, linalg::cut(&stacked, tol));
    linalg::canonical_columns(&mut sub, tol);
    let w = window_matrix(f, n)?;
    let (ker, _) = kernel_on_window(&w, tol)?;
    // H² ⊗ F' restricted to the window, in the same coordinates
    let act = w.active();
    let mut gens = CMat::zeros(w.dom.dim(), 0);
    for wi in 0..w.dom.num_words() {
        let row0 = w.dom.r * wi;
        for c in 0..sub.ncols() {
            let inside = (0..w.dom.r).all(|j| sub[(j, c)].modulus() <= tol || act.contains(&(row0 + j)));
            if inside {
                let mut v = CMat::zeros(w.dom.dim(), 1);
                v.view_mut((row0, 0), (w.dom.r, 1)).copy_from(&sub.column(c));
                gens = linalg::hstack(&gens, &v);
            }
        }
    }
    let reducing = gens.ncols() == ker.dim() && ker.residual(&gens) <= tol;
    Ok(ConstantSplit { subspace: sub, reducing, window_kernel_dim: ker.dim() })
}

/// Isometry test `M*M = I` on the active window.
pub fn is_inner<T: Real>(f: &MultMatrix<T>, tol: T) -> (bool, T) {
    let a = f.active_matrix();
    let g = a.adjoint() * &a - CMat::identity(a.ncols(), a.ncols());
    let def = linalg::max_abs(&g);
    (def <= tol, def)
}

/// Column space containment `ran F ⊆ ran G`, with the largest relative residual.
pub fn range_contains<T: Real>(f: &MultMatrix<T>, g: &MultMatrix<T>, tol: T) -> Result<(bool, T)> {
    if f.cod != g.cod {
        return Err(NcError::ShapeMismatch(format!("codomain windows differ: {:?} vs {:?}", f.cod, g.cod)));
    }
    let ga = g.active_matrix();
    let q = linalg::orth(&ga, linalg::cut(&ga, tol));
    let fa = f.active_matrix();
    let mut worst = T::zero();
    for j in 0..fa.ncols() {
        let col = fa.column(j).into_owned();
        let r = (&col - &q * (q.adjoint() * &col)).norm();
        worst = worst.max(r / col.norm().max(T::one()));
    }
    Ok((worst <= tol, worst))
}

#[derive(Clone, Debug)]
pub struct Douglas<T: Real> {
    pub h: MatPoly<T>,
    /// Window estimate of `‖H(L)‖`.
    pub sigma: T,
    /// Smallest `λ²` with `FF* ≼ λ² GG*` on the window.
    pub lambda_sq: T,
    /// Least eigenvalue of `λ² GG* − FF*`.
    pub psd_floor: T,
    /// Largest least-squares residual over the columns of `F`.
    pub residual: T,
    /// Largest coefficient of `G H − F`.
    pub product_residual: T,
    /// The solution reaches the top of its window above `deg F`.
    pub boundary_touch: bool,
}

/// Solves `F = G H` column by column at the vacuum, minimum norm on the window
/// of degree `n`.
pub fn douglas_factor<T: Real>(f: &MatPoly<T>, g: &MatPoly<T>, n: usize, tol: T) -> Result<Douglas<T>> {
    if f.rows() != g.rows() || f.d() != g.d() {
        return Err(NcError::ShapeMismatch(format!("F is {:?}, G is {:?}", f.shape(), g.shape())));
    }
    let d = f.d();
    if f.is_zero() {
        return Ok(Douglas {
            h: MatPoly::zero(d, g.cols(), f.cols()),
            sigma: T::zero(),
            lambda_sq: T::zero(),
            psd_floor: T::zero(),
            residual: T::zero(),
            product_residual: T::zero(),
            boundary_touch: false,
        });
    }
    let fdeg = f.degree().unwrap_or(0);
    if fdeg > n {
        return Err(NcError::WindowOverflow(format!("deg F = {fdeg} exceeds window degree {n}")));
    }
    let gw = window_matrix(g, n)?;
    let ga = gw.active_matrix();
    let cod = Truncation::new(d, n, f.rows());
    let targets = poly_to_mat(f, cod)?;
    let gp = linalg::pinv(&ga, linalg::cut(&ga, tol));
    let x = &gp * &targets;
    let resid_mat = &ga * &x - &targets;
    let mut residual = T::zero();
    for j in 0..targets.ncols() {
        residual = residual.max(resid_mat.column(j).norm() / targets.column(j).norm().max(T::one()));
    }
    if residual > tol {
        return Err(NcError::NoFactorization { residual: crate::scalar::to_f64(residual) });
    }
    let full = gw.embed_active(&x);
    let scale = linalg::max_abs(&full).max(T::one());
    let h = crate::fock::mat_to_poly(&full, gw.dom).chop(T::from_f64(64.0).unwrap() * T::default_epsilon() * scale);
    let boundary_touch = h.terms().any(|(w, m)| {
        (0..gw.dom.r).any(|j| w.len() == gw.limits[j] && w.len() > fdeg && m.row(j).iter().any(|z| z.modulus() > tol))
    });
    let product_residual = g.mul(&h)?.distance(f)?;
    let hdeg = h.degree().unwrap_or(0);
    let sigma = linalg::op_norm(&multiplier_matrix(&h, n.saturating_sub(hdeg)).matrix);
    let fa = window_matrix(f, n)?.active_matrix();
    let xop = &gp * &fa;
    let lambda_sq = linalg::op_norm(&xop).powi(2);
    let psd = (&ga * ga.adjoint()) * crate::scalar::creal(lambda_sq) - &fa * fa.adjoint();
    let psd_floor = linalg::min_eig(&psd);
    Ok(Douglas { h, sigma, lambda_sq, psd_floor, residual, product_residual, boundary_touch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::transpose_unitary_matrix;
    use crate::ncpoly::parse_ncpoly;
    use crate::words::Word;

    fn p(s: &str, d: usize) -> MatPoly<f64> {
        parse_ncpoly(s, d).unwrap()
    }

    #[test]
    fn left_multiplier_examples() {
        let m = multiplier_matrix(&p("z1*z2", 2), 2);
        assert_eq!(is_left_multiplier(&m.matrix, m.dom, m.cod, 1e-12).unwrap(), (true, 0.0));
        let t = Truncation::new(2, 2, 1);
        let (ok, def) = is_left_multiplier(&transpose_unitary_matrix::<f64>(t), t, t, 1e-12).unwrap();
        assert!(!ok && def > 0.5);
        let c = multiplier_matrix(&p("[[1, 2i],[0, 3]]", 2), 2);
        assert!(is_left_multiplier(&c.matrix, c.dom, c.cod, 1e-12).unwrap().0);
    }

    #[test]
    fn kernel_examples() {
        for n in 1..4 {
            let w = window_matrix(&p("[[z1, z2]]", 2), n).unwrap();
            assert_eq!(kernel_on_window(&w, 1e-12).unwrap().0.dim(), 0);
        }
        let w = window_matrix(&p("[[z1, -z1]]", 2), 3).unwrap();
        let (k, def) = kernel_on_window(&w, 1e-12).unwrap();
        assert_eq!(k.dim(), crate::words::count_upto(2, 2));
        assert!(def < 1e-12);
        // (z, z²): kernel {(-z g, g)}
        let w = window_matrix(&p("[[z1, z1*z1]]", 1), 4).unwrap();
        let (k, def) = kernel_on_window(&w, 1e-12).unwrap();
        assert_eq!(k.dim(), 3);
        assert!(def < 1e-12);
        let v = crate::fock::mat_to_poly(&k.basis, k.ambient);
        let zero = p("[[z1, z1*z1]]", 1).mul(&v).unwrap();
        assert!(zero.max_abs_coeff() < 1e-12);
    }

    #[test]
    fn constant_split_examples() {
        let s = constant_kernel_split(&p("[[z1, 0]]", 2), 3, 1e-12).unwrap();
        assert_eq!(s.subspace.ncols(), 1);
        assert!((s.subspace[(1, 0)].re - 1.0).abs() < 1e-14 && s.reducing);
        let s = constant_kernel_split(&p("[[z1, -z1]]", 2), 3, 1e-12).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.subspace[(0, 0)].re - h).abs() < 1e-14 && (s.subspace[(1, 0)].re - h).abs() < 1e-14);
        assert!(s.reducing);
        let s = constant_kernel_split(&p("[[z1, z1*z1]]", 1), 4, 1e-12).unwrap();
        assert_eq!(s.subspace.ncols(), 0);
        assert!(!s.reducing && s.window_kernel_dim > 0);
    }

    #[test]
    fn inner_examples() {
        for s in ["z1", "[[z1, z2]]", "0.7071067811865476*z1 + 0.7071067811865476*z2"] {
            let (ok, def) = is_inner(&multiplier_matrix(&p(s, 2), 3), 1e-12);
            assert!(ok, "{s}: {def}");
        }
        assert!(!is_inner(&multiplier_matrix(&p("z1 + z2", 2), 3), 1e-12).0);
    }

    #[test]
    fn range_examples() {
        let z = window_matrix(&p("z1", 1), 5).unwrap();
        let z2 = window_matrix(&p("z1*z1", 1), 5).unwrap();
        assert!(range_contains(&z2, &z, 1e-12).unwrap().0);
        let (ok, r) = range_contains(&z, &z2, 1e-12).unwrap();
        assert!(!ok && r > 0.5);
        assert_eq!(range_contains(&z, &z, 1e-12).unwrap().0, true);
        let other = window_matrix(&p("z1", 1), 4).unwrap();
        assert!(range_contains(&z, &other, 1e-12).is_err());
    }

    #[test]
    fn douglas_examples() {
        let r = douglas_factor(&p("z1*z1", 1), &p("z1", 1), 5, 1e-10).unwrap();
        assert!(r.h.distance(&p("z1", 1)).unwrap() < 1e-14);
        assert!((r.sigma - 1.0).abs() < 1e-12 && (r.lambda_sq - 1.0).abs() < 1e-12);
        let f = p("[[1 + z1, 2*z2]]", 2);
        let r = douglas_factor(&f, &f, 3, 1e-10).unwrap();
        assert!(r.h.distance(&MatPoly::identity(2, 2)).unwrap() < 1e-12);
        let r = douglas_factor(&p("[[z1*z1, z1*z2]]", 2), &p("z1", 2), 3, 1e-10).unwrap();
        assert!(r.h.distance(&p("[[z1, z2]]", 2)).unwrap() < 1e-14);
        assert!(r.psd_floor > -1e-10);
        assert!(matches!(douglas_factor(&p("z1", 1), &p("z1*z1", 1), 5, 1e-10), Err(NcError::NoFactorization { .. })));
        assert!(matches!(douglas_factor(&p("z1*z1*z1", 1), &p("z1", 1), 2, 1e-10), Err(NcError::WindowOverflow(_))));
        let zero = douglas_factor(&MatPoly::zero(1, 1, 2), &p("z1", 1), 3, 1e-10).unwrap();
        assert!(zero.h.is_zero() && zero.sigma == 0.0 && zero.h.shape() == (1, 2));
    }

    #[test]
    fn douglas_with_kernel_is_min_norm() {
        // G = [1, z]: the minimum-norm solution of f1 + z f2 = z is (z/2, 1/2)
        let r = douglas_factor(&p("z1", 1), &p("[[1, z1]]", 1), 4, 1e-10).unwrap();
        let expect = p("[[0.5*z1],[0.5]]", 1);
        assert!(r.h.distance(&expect).unwrap() < 1e-12);
        assert!(r.product_residual < 1e-12);
        assert!(!r.boundary_touch);
        let _ = Word::empty();
    }
}
