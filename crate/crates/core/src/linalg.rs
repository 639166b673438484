//! Dense complex linear algebra on top of nalgebra: SVD-based rank decisions,
//! orthonormal bases, null spaces, pseudoinverses and Hermitian functions.

use crate::scalar::{c0, c1, creal, CMat, CVec, Real};
use nalgebra::{ComplexField, DMatrix};

/// Thin SVD `a = u diag(s) v*` with singular values sorted descending.
pub struct Svd<T: Real> {
    pub u: CMat<T>,
    pub s: Vec<T>,
    pub v: CMat<T>,
}

pub fn svd<T: Real>(a: &CMat<T>) -> Svd<T> {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Svd { u: CMat::zeros(m, 0), s: vec![], v: CMat::zeros(n, 0) };
    }
    assert!(a.iter().all(|z| z.re.is_finite() && z.im.is_finite()), "svd of a matrix with non-finite entries");
    let (u, sv, v) = raw_svd(a).expect("SVD failed to converge on every rotation of the input");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap_or(std::cmp::Ordering::Equal));
    let s = order.iter().map(|&i| sv[i]).collect();
    let u = CMat::from_fn(m, k, |r, c| u[(r, order[c])]);
    let v = CMat::from_fn(n, k, |r, c| v[(r, order[c])]);
    Svd { u, s, v }
}

fn tiny<T: Real>() -> T {
    T::from_f64(f64::MIN_POSITIVE).unwrap()
}

/// Attempts scoring at most `strict` are taken at once; otherwise the best
/// attempt is kept if it scores under `loose`.
fn tolerances<T: Real>(dim: usize) -> (T, T) {
    let eps = T::default_epsilon();
    (T::from_usize(64 * dim.max(4)).unwrap() * eps, eps.sqrt())
}

/// Run `attempts` in order, stopping at the first within the strict bound.
fn best_attempt<R, T: Real>(dim: usize, attempts: impl Iterator<Item = Option<(R, T)>>) -> Option<R> {
    let (strict, loose) = tolerances::<T>(dim);
    let mut best: Option<(R, T)> = None;
    for (out, err) in attempts.flatten() {
        if err <= strict {
            return Some(out);
        }
        if best.as_ref().is_none_or(|b| err < b.1) {
            best = Some((out, err));
        }
    }
    best.filter(|b| b.1 <= loose).map(|b| b.0)
}

type SvdParts<T> = (CMat<T>, Vec<T>, CMat<T>);

/// One nalgebra SVD attempt with its error score: relative reconstruction
/// error plus loss of orthonormality in the factors.
fn try_svd<T: Real>(a: &CMat<T>) -> Option<(SvdParts<T>, T)> {
    try_svd_eps(a, 5)
}

/// `ulps` scales the convergence threshold. At exactly one ulp nalgebra can
/// return a badly wrong factorization of nearly rank-one complex inputs.
fn try_svd_eps<T: Real>(a: &CMat<T>, ulps: usize) -> Option<(SvdParts<T>, T)> {
    let iters = 200 * a.nrows().max(a.ncols()) + 1000;
    let eps = T::from_usize(ulps).unwrap() * T::default_epsilon();
    let dec = nalgebra::SVD::try_new(a.clone(), true, true, eps, iters)?;
    let (u, v) = (dec.u?, dec.v_t?.adjoint());
    let s: Vec<T> = dec.singular_values.iter().copied().collect();
    let scale = s.iter().copied().fold(T::zero(), T::max).max(tiny::<T>());
    let k = s.len();
    let recon = max_abs(&(&u * real_diag(&s) * v.adjoint() - a)) / scale;
    let ortho = max_abs(&(u.adjoint() * &u - identity::<T>(k))).max(max_abs(&(v.adjoint() * &v - identity::<T>(k))));
    let err = recon.max(ortho);
    err.is_finite().then_some(((u, s, v), err))
}

/// nalgebra's implicit-shift SVD occasionally stalls or, for some complex
/// inputs, returns a wrong factorization. Each attempt is scored; the
/// fallbacks use a looser threshold, the adjoint, and `P a Q` for fixed unitaries.
fn raw_svd<T: Real>(a: &CMat<T>) -> Option<SvdParts<T>> {
    let (m, n) = a.shape();
    let direct = [5, 64].into_iter().map(|ulps| try_svd_eps(a, ulps));
    let adjoint = std::iter::once_with(|| try_svd(&a.adjoint()).map(|((u, s, v), e)| ((v, s, u), e)));
    let rotated = (1..=3).map(|seed| {
        let p = fixed_unitary::<T>(m, seed);
        let q = fixed_unitary::<T>(n, seed + 7);
        try_svd(&(&p * a * &q)).map(|((u, s, v), e)| ((p.adjoint() * u, s, q * v), e))
    });
    best_attempt(m.max(n), direct.chain(adjoint).chain(rotated))
}

/// A deterministic dense unitary, the Q factor of a fixed trigonometric matrix.
fn fixed_unitary<T: Real>(n: usize, seed: usize) -> CMat<T> {
    let g = CMat::from_fn(n, n, |i, j| {
        let x = ((i * 31 + j * 17 + seed * 7919) as f64 * 0.618_033_988_7).sin();
        let y = ((i * 13 + j * 29 + seed * 104_729) as f64 * 0.414_213_562_3).cos();
        nalgebra::Complex::new(T::from_f64(x).unwrap(), T::from_f64(y).unwrap())
    });
    g.qr().q()
}

/// `max(m, n) * eps * sigma_max`, the default rank cut.
pub fn default_cut<T: Real>(a: &CMat<T>) -> T {
    let (m, n) = a.shape();
    let smax = op_norm(a);
    T::from_usize(m.max(n).max(1)).unwrap() * T::default_epsilon() * smax
}

/// Rank cut used for derived matrices: the default cut, floored at `tol`.
pub fn cut<T: Real>(a: &CMat<T>, tol: T) -> T {
    default_cut(a).max(tol)
}

pub fn op_norm<T: Real>(a: &CMat<T>) -> T {
    if a.nrows() == 0 || a.ncols() == 0 {
        return T::zero();
    }
    svd(a).s[0]
}

pub fn max_abs<T: Real>(a: &CMat<T>) -> T {
    a.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

pub fn rank<T: Real>(a: &CMat<T>, cut: T) -> usize {
    svd(a).s.iter().filter(|&&x| x > cut).count()
}

/// Orthonormal basis of the column space, singular values above `cut`.
pub fn orth<T: Real>(a: &CMat<T>, cut: T) -> CMat<T> {
    let d = svd(a);
    let r = d.s.iter().filter(|&&x| x > cut).count();
    d.u.columns(0, r).into_owned()
}

/// Orthonormal basis of the null space (right singular vectors below `cut`).
pub fn null_space<T: Real>(a: &CMat<T>, cut: T) -> CMat<T> {
    let (m, n) = a.shape();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    if m == 0 {
        return CMat::identity(n, n);
    }
    // Pad to at least square so the SVD returns a full right basis.
    let padded = if m < n {
        let mut p = CMat::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let d = svd(&padded);
    let r = d.s.iter().filter(|&&x| x > cut).count();
    d.v.columns(r, n - r).into_owned()
}

/// Orthonormal basis of the orthogonal complement of `span(q)` in C^n,
/// where `q` has orthonormal columns.
pub fn complement<T: Real>(q: &CMat<T>, n: usize) -> CMat<T> {
    if q.ncols() == 0 {
        return CMat::identity(n, n);
    }
    null_space(&q.adjoint(), re_half())
}

fn re_half<T: Real>() -> T {
    T::from_f64(0.5).unwrap()
}

pub fn pinv<T: Real>(a: &CMat<T>, cut: T) -> CMat<T> {
    let (m, n) = a.shape();
    let d = svd(a);
    let mut out = CMat::zeros(n, m);
    for (i, &s) in d.s.iter().enumerate() {
        if s > cut {
            let vi = d.v.column(i);
            let ui = d.u.column(i);
            out += (vi * ui.adjoint()) * creal(T::one() / s);
        }
    }
    out
}

/// Hermitian part `(a + a*)/2`.
pub fn herm<T: Real>(a: &CMat<T>) -> CMat<T> {
    (a + a.adjoint()) * creal(T::from_f64(0.5).unwrap())
}

/// Eigen-decomposition of the Hermitian part, eigenvalues ascending.
pub fn eigh<T: Real>(a: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let n = a.nrows();
    if n == 0 {
        return (vec![], CMat::zeros(0, 0));
    }
    let h = herm(a);
    let direct = std::iter::once_with(|| try_eigh(&h));
    let rotated = (1..=3).map(|seed| {
        let q = fixed_unitary::<T>(n, seed);
        try_eigh(&herm(&(q.adjoint() * &h * &q))).map(|((l, v), e)| ((l, &q * v), e))
    });
    let (vals, vecs) = best_attempt(n, direct.chain(rotated)).expect("Hermitian eigensolver failed on every rotation of the input");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap_or(std::cmp::Ordering::Equal));
    let sorted = order.iter().map(|&i| vals[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, c| vecs[(r, order[c])]);
    (sorted, vecs)
}

/// One nalgebra eigen attempt, scored as in `try_svd`.
fn try_eigh<T: Real>(h: &CMat<T>) -> Option<((Vec<T>, CMat<T>), T)> {
    let n = h.nrows();
    let eps = T::from_usize(5).unwrap() * T::default_epsilon();
    let e = nalgebra::SymmetricEigen::try_new(h.clone(), eps, 200 * n + 1000)?;
    let vals: Vec<T> = e.eigenvalues.iter().copied().collect();
    let scale = vals.iter().fold(T::zero(), |acc, x| acc.max(x.abs())).max(tiny::<T>());
    let resid = max_abs(&(h * &e.eigenvectors - &e.eigenvectors * real_diag(&vals))) / scale;
    let ortho = max_abs(&(e.eigenvectors.adjoint() * &e.eigenvectors - identity::<T>(n)));
    let err = resid.max(ortho);
    err.is_finite().then_some(((vals, e.eigenvectors), err))
}

pub fn min_eig<T: Real>(a: &CMat<T>) -> T {
    eigh(a).0.first().copied().unwrap_or(T::zero())
}

/// Square root of a PSD matrix, zeroing eigenvalues at or below `cut(a, tol)`.
/// Deciding rank before the root keeps rounding-level eigenvalues from
/// surviving as their square roots. Also returns the negative-eigenvalue clamp.
pub fn psd_sqrt_cut<T: Real>(a: &CMat<T>, tol: T) -> (CMat<T>, T) {
    let h = herm(a);
    let keep = cut(&h, tol);
    let (vals, vecs) = eigh(&h);
    let clamp = vals.iter().fold(T::zero(), |acc, &l| acc.max(-l));
    let kept: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > keep).collect();
    let v = vecs.select_columns(&kept);
    let roots: Vec<T> = kept.iter().map(|&i| vals[i].sqrt()).collect();
    (&v * real_diag(&roots) * v.adjoint(), clamp)
}

/// Square root of a PSD matrix with eigenvalues clamped at zero.
/// Returns the root and the clamp magnitude (most negative eigenvalue, >= 0).
pub fn psd_sqrt<T: Real>(a: &CMat<T>) -> (CMat<T>, T) {
    let n = a.nrows();
    let (vals, vecs) = eigh(a);
    let mut clamp = T::zero();
    let mut diag = CMat::zeros(n, n);
    for (i, &l) in vals.iter().enumerate() {
        if l < T::zero() {
            clamp = clamp.max(-l);
        }
        diag[(i, i)] = creal(l.max(T::zero()).sqrt());
    }
    (&vecs * diag * vecs.adjoint(), clamp)
}

/// Inverse square root of a positive definite matrix.
pub fn pd_inv_sqrt<T: Real>(a: &CMat<T>) -> CMat<T> {
    let n = a.nrows();
    let (vals, vecs) = eigh(a);
    let diag = CMat::from_fn(n, n, |r, c| if r == c { creal(T::one() / vals[r].sqrt()) } else { c0() });
    &vecs * diag * vecs.adjoint()
}

/// Minimum-norm least squares solution of `a x = b` and the residual norm per column.
pub fn lstsq<T: Real>(a: &CMat<T>, b: &CMat<T>, cut: T) -> (CMat<T>, Vec<T>) {
    let x = pinv(a, cut) * b;
    let r = a * &x - b;
    let res = (0..r.ncols()).map(|j| r.column(j).norm()).collect();
    (x, res)
}

/// Residual of projecting the columns of `x` onto span of orthonormal `q`.
pub fn proj_residual<T: Real>(q: &CMat<T>, x: &CMat<T>) -> T {
    if x.ncols() == 0 {
        return T::zero();
    }
    let r = x - q * (q.adjoint() * x);
    (0..r.ncols()).fold(T::zero(), |acc, j| acc.max(r.column(j).norm()))
}

/// Largest sine of the principal angles between two orthonormal bases,
/// or one when the dimensions differ.
pub fn subspace_distance<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    if a.ncols() != b.ncols() {
        return T::one();
    }
    proj_residual(b, a).max(proj_residual(a, b))
}

pub fn kron<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}

pub fn hstack<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn vstack<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = CMat::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}

pub fn block_diag<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let mut out = CMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

/// Rotate each column so its first entry of modulus above `tol` is real positive.
pub fn canonical_columns<T: Real>(a: &mut CMat<T>, tol: T) {
    for j in 0..a.ncols() {
        let lead = a.column(j).iter().copied().find(|z| z.modulus() > tol);
        if let Some(z) = lead {
            let ph = z.conj() / creal(z.modulus());
            for z in a.column_mut(j).iter_mut() {
                *z *= ph;
            }
        }
    }
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    CMat::identity(n, n)
}

pub fn unit_vec<T: Real>(n: usize, i: usize) -> CVec<T> {
    let mut v = CVec::zeros(n);
    v[i] = c1();
    v
}

pub fn real_diag<T: Real>(d: &[T]) -> CMat<T> {
    DMatrix::from_fn(d.len(), d.len(), |i, j| if i == j { creal(d[i]) } else { c0() })
}
