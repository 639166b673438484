//! The NC Szegő kernel, CPNC kernels, operator-range spaces, kernel joins and
//! meets, complementary spaces and the difference-quotient inequality.
//!
//! Kernel convention: `K(Z,W)[P] = Σ_α Z^α P (W^α)*`, which is what makes
//! `⟨K{Z,y,v}, K{W,x,u}⟩ = y* K(Z,W)[v u*] x` hold with `K{Z,y,v}` defined by
//! `⟨K{Z,y,v}, f⟩ = y* f(Z) v`.

use crate::error::{NcError, Result};
use crate::fock::{compressed_right_shift, window_matrix, MultMatrix, Truncation};
use crate::linalg;
use crate::ncpoly::{MatPoly, RowTuple};
use crate::scalar::{creal, to_f64, CMat, CVec, Real};
use crate::subspace::{NormedSubspace, SubspaceRep};
use crate::words::words_upto;

#[derive(Clone, Debug)]
pub struct KernelValue<T: Real> {
    pub value: CMat<T>,
    /// Certified bound on the norm of the omitted tail.
    pub tail_bound: T,
    pub cutoff: usize,
}

fn check_ball<T: Real>(z: &RowTuple<T>) -> Result<T> {
    let a = z.row_norm();
    if a >= T::one() {
        return Err(NcError::Domain(format!("row norm {} is not < 1", to_f64(a))));
    }
    Ok(a)
}

/// Smallest cutoff with `scale (ab)^{N+1} / (1 - ab) < 1e-12`.
pub fn default_cutoff<T: Real>(ab: T, scale: T) -> usize {
    let target = T::from_f64(1e-12).unwrap();
    let mut n = 0usize;
    let mut pow = ab;
    let denom = T::one() - ab;
    while scale * pow / denom >= target && n < 100_000 {
        pow *= ab;
        n += 1;
    }
    n
}

/// `Σ_{|α|≤N} Z^α P (W^α)*` with its geometric tail bound.
pub fn szego_eval<T: Real>(z: &RowTuple<T>, w: &RowTuple<T>, p: &CMat<T>, cutoff: Option<usize>) -> Result<KernelValue<T>> {
    if z.d != w.d || p.shape() != (z.n, w.n) {
        return Err(NcError::ShapeMismatch(format!("P is {:?}, points are {} and {}", p.shape(), z.n, w.n)));
    }
    let a = check_ball(z)?;
    let b = check_ball(w)?;
    let ab = a * b;
    let pn = linalg::op_norm(p);
    let n = cutoff.unwrap_or_else(|| default_cutoff(ab, pn));
    // T_k = Σ_i Z_i T_{k-1} W_i*
    let mut layer = p.clone();
    let mut sum = p.clone();
    for _ in 0..n {
        let mut next = CMat::zeros(z.n, w.n);
        for i in 0..z.d {
            next += &z.mats[i] * &layer * w.mats[i].adjoint();
        }
        sum += &next;
        layer = next;
    }
    let tail_bound = pn * ab.powi(n as i32 + 1) / (T::one() - ab);
    Ok(KernelValue { value: sum, tail_bound, cutoff: n })
}

/// The window vector `K{Z,y,v}` with `⟨K{Z,y,v}, f⟩ = y* f(Z) v`.
/// `y` has length `n * t.r` in the evaluation block layout, `v` length `n`.
pub fn kernel_vector<T: Real>(z: &RowTuple<T>, y: &CVec<T>, v: &CVec<T>, t: Truncation) -> Result<CVec<T>> {
    check_ball(z)?;
    let n = z.n;
    if y.len() != n * t.r || v.len() != n || z.d != t.d {
        return Err(NcError::ShapeMismatch("kernel vector data does not match the window".into()));
    }
    let words = words_upto(t.d, t.degree);
    // Z^α v, built from the tail: Z^{iβ} v = Z_i (Z^β v)
    let mut pv: Vec<CVec<T>> = Vec::with_capacity(words.len());
    let mut out = CVec::zeros(t.dim());
    for (wi, w) in words.iter().enumerate() {
        let val = match w.split_first() {
            None => v.clone(),
            Some((i, tail)) => &z.mats[i - 1] * &pv[crate::words::rank_word(&tail, t.d)?],
        };
        for b in 0..t.r {
            let mut acc = crate::scalar::c0::<T>();
            for a in 0..n {
                acc += val[a].conj() * y[a * t.r + b];
            }
            out[t.r * wi + b] = acc;
        }
        pv.push(val);
    }
    Ok(out)
}

/// `F(Z) (K(Z,W)[P] ⊗ I) F(W)*`.
pub fn range_kernel_eval<T: Real>(
    f: &MatPoly<T>,
    z: &RowTuple<T>,
    w: &RowTuple<T>,
    p: &CMat<T>,
    cutoff: Option<usize>,
) -> Result<KernelValue<T>> {
    let fz = f.eval_at_point(z)?;
    let fw = f.eval_at_point(w)?;
    let scale = linalg::op_norm(&fz) * linalg::op_norm(&fw);
    let k = szego_eval(z, w, p, cutoff)?;
    let inner = linalg::kron(&k.value, &CMat::identity(f.cols(), f.cols()));
    Ok(KernelValue { value: fz * inner * fw.adjoint(), tail_bound: k.tail_bound * scale, cutoff: k.cutoff })
}

/// A completely positive NC kernel with values acting on `C^n ⊗ C^J`.
pub trait CpncKernel<T: Real> {
    fn out_dim(&self) -> usize;
    fn eval(&self, z: &RowTuple<T>, w: &RowTuple<T>, p: &CMat<T>) -> Result<CMat<T>>;
}

/// `K(Z,W)[P] ⊗ I_dim`.
#[derive(Clone, Debug)]
pub struct SzegoKernel {
    pub dim: usize,
    pub cutoff: Option<usize>,
}

impl<T: Real> CpncKernel<T> for SzegoKernel {
    fn out_dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, z: &RowTuple<T>, w: &RowTuple<T>, p: &CMat<T>) -> Result<CMat<T>> {
        let k = szego_eval(z, w, p, self.cutoff)?;
        Ok(linalg::kron(&k.value, &CMat::identity(self.dim, self.dim)))
    }
}

#[derive(Clone, Debug)]
pub struct RangeKernel<T: Real> {
    pub symbol: MatPoly<T>,
    pub cutoff: Option<usize>,
}

impl<T: Real> CpncKernel<T> for RangeKernel<T> {
    fn out_dim(&self) -> usize {
        self.symbol.rows()
    }
    fn eval(&self, z: &RowTuple<T>, w: &RowTuple<T>, p: &CMat<T>) -> Result<CMat<T>> {
        Ok(range_kernel_eval(&self.symbol, z, w, p, self.cutoff)?.value)
    }
}

#[derive(Clone, Debug)]
pub struct ZeroKernel {
    pub dim: usize,
}

impl<T: Real> CpncKernel<T> for ZeroKernel {
    fn out_dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, z: &RowTuple<T>, w: &RowTuple<T>, _p: &CMat<T>) -> Result<CMat<T>> {
        Ok(CMat::zeros(z.n * self.dim, w.n * self.dim))
    }
}

/// Pointwise sum of two kernels.
#[derive(Clone, Debug)]
pub struct JoinKernel<A, B>(pub A, pub B);

impl<T: Real, A: CpncKernel<T>, B: CpncKernel<T>> CpncKernel<T> for JoinKernel<A, B> {
    fn out_dim(&self) -> usize {
        self.0.out_dim()
    }
    fn eval(&self, z: &RowTuple<T>, w: &RowTuple<T>, p: &CMat<T>) -> Result<CMat<T>> {
        if self.0.out_dim() != self.1.out_dim() {
            return Err(NcError::ShapeMismatch("joined kernels act on different spaces".into()));
        }
        Ok(self.0.eval(z, w, p)? + self.1.eval(z, w, p)?)
    }
}

pub fn kernel_join<A, B>(a: A, b: B) -> JoinKernel<A, B> {
    JoinKernel(a, b)
}

/// One sample `(Z, y, v)` with `y ∈ C^{n J}`, `v ∈ C^n`.
pub type KernelSample<T> = (RowTuple<T>, CVec<T>, CVec<T>);

/// Gram matrix `[y_i* K(Z_i,Z_j)[v_i v_j*] y_j]`.
pub fn kernel_gram<T: Real, K: CpncKernel<T>>(k: &K, samples: &[KernelSample<T>]) -> Result<CMat<T>> {
    let m = samples.len();
    let mut g = CMat::zeros(m, m);
    for (i, (zi, yi, vi)) in samples.iter().enumerate() {
        for (j, (zj, yj, vj)) in samples.iter().enumerate() {
            let val = k.eval(zi, zj, &(vi * vj.adjoint()))?;
            g[(i, j)] = (yi.adjoint() * val * yj)[(0, 0)];
        }
    }
    Ok(g)
}

/// Least eigenvalue of the sample Gram matrix; non-negative up to rounding for CPNC kernels.
pub fn check_cpnc_psd<T: Real, K: CpncKernel<T>>(k: &K, samples: &[KernelSample<T>]) -> Result<T> {
    Ok(linalg::min_eig(&kernel_gram(k, samples)?))
}

/// `ran F(L)` on a window with the range norm `‖F x‖_F = ‖P_{ker F}^⊥ x‖`.
#[derive(Clone, Debug)]
pub struct RangeSpace<T: Real> {
    pub op: MultMatrix<T>,
    pub space: NormedSubspace<T>,
}

impl<T: Real> RangeSpace<T> {
    pub fn basis(&self) -> &CMat<T> {
        &self.space.space.basis
    }
    pub fn gram(&self) -> &CMat<T> {
        &self.space.gram
    }
    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

/// Range space of an arbitrary matrix `a` acting into `ambient`.
pub fn range_space_of_operator<T: Real>(ambient: Truncation, a: &CMat<T>, tol: T) -> NormedSubspace<T> {
    let cut = linalg::cut(a, tol);
    let mut q = linalg::orth(a, cut);
    linalg::canonical_columns(&mut q, tol);
    let pre = linalg::pinv(a, cut) * &q;
    let gram = linalg::herm(&(pre.adjoint() * pre));
    NormedSubspace { space: SubspaceRep::new(ambient, q, tol), gram }
}

/// Range space of `F(L)` on the codomain window of degree `n`, each column
/// taking inputs up to degree `n - deg F_j`.
pub fn build_range_space<T: Real>(f: &MatPoly<T>, n: usize, tol: T) -> Result<RangeSpace<T>> {
    let op = window_matrix(f, n)?;
    let space = range_space_of_operator(op.cod, &op.active_matrix(), tol);
    Ok(RangeSpace { op, space })
}

/// `M1 ∩ M2` with `‖h‖² = ‖h‖²_1 + ‖h‖²_2`.
pub fn meet_norm_gram<T: Real>(m1: &NormedSubspace<T>, m2: &NormedSubspace<T>, tol: T) -> Result<NormedSubspace<T>> {
    let amb = m1.space.ambient;
    if amb != m2.space.ambient {
        return Err(NcError::ShapeMismatch("meet of spaces in different windows".into()));
    }
    let (b1, b2) = (m1.basis(), m2.basis());
    let stacked = linalg::hstack(b1, &(-b2));
    let k = linalg::null_space(&stacked, linalg::cut(&stacked, tol));
    let v = b1 * k.rows(0, b1.ncols());
    let mut q = linalg::orth(&v, linalg::cut(&v, tol));
    linalg::canonical_columns(&mut q, tol);
    let e1 = b1.adjoint() * &q;
    let e2 = b2.adjoint() * &q;
    let gram = linalg::herm(&(e1.adjoint() * &m1.gram * &e1 + e2.adjoint() * &m2.gram * &e2));
    Ok(NormedSubspace { space: SubspaceRep::new(amb, q, tol), gram })
}

/// The splitting of `M1 ⊕ M2` into the image of `h ↦ h ⊕ -h` on the
/// intersection and its orthogonal complement, in coordinates `(c1, c2)`.
#[derive(Clone, Debug)]
pub struct DirectSum<T: Real> {
    /// Block-diagonal inner product `diag(G1, G2)` on coordinates.
    pub gram: CMat<T>,
    pub meet_part: CMat<T>,
    pub join_part: CMat<T>,
    /// Largest `|⟨meet, join⟩|`.
    pub orthogonality_defect: T,
    /// Largest `|⟨meet, sample⟩|` over normalized kernel samples `κ1 ⊕ κ2`.
    pub sample_defect: T,
    /// Distance from the join part to the span of the samples (one when too few samples).
    pub sample_span_defect: T,
}

fn g_orthonormalize<T: Real>(x: &CMat<T>, g: &CMat<T>, tol: T) -> CMat<T> {
    if x.ncols() == 0 {
        return x.clone();
    }
    let m = linalg::herm(&(x.adjoint() * g * x));
    let (vals, vecs) = linalg::eigh(&m);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > tol).collect();
    let mut out = CMat::zeros(x.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let col = x * vecs.column(i) * creal(T::one() / vals[i].sqrt());
        out.column_mut(c).copy_from(&col);
    }
    out
}

/// Kernel vector of the space `m` at a sample: `κ = G⁻¹ B* K{Z,y,v}`.
pub fn space_kernel_coords<T: Real>(m: &NormedSubspace<T>, sample: &KernelSample<T>) -> Result<CVec<T>> {
    let kv = kernel_vector(&sample.0, &sample.1, &sample.2, m.space.ambient)?;
    let rhs = m.basis().adjoint() * kv;
    Ok(linalg::pinv(&m.gram, T::default_epsilon()) * rhs)
}

pub fn decompose_direct_sum<T: Real>(
    m1: &NormedSubspace<T>,
    m2: &NormedSubspace<T>,
    samples: &[KernelSample<T>],
    tol: T,
) -> Result<DirectSum<T>> {
    let meet = meet_norm_gram(m1, m2, tol)?;
    let gram = linalg::block_diag(&m1.gram, &m2.gram);
    let c1 = m1.basis().adjoint() * meet.basis();
    let c2 = m2.basis().adjoint() * meet.basis();
    let anti = linalg::vstack(&c1, &(-c2));
    let meet_part = g_orthonormalize(&anti, &gram, tol);
    let constraint = meet_part.adjoint() * &gram;
    let comp = if meet_part.ncols() == 0 {
        CMat::identity(gram.nrows(), gram.nrows())
    } else {
        linalg::null_space(&constraint, linalg::cut(&constraint, tol))
    };
    let join_part = g_orthonormalize(&comp, &gram, tol);
    let orthogonality_defect = linalg::max_abs(&(meet_part.adjoint() * &gram * &join_part));
    let mut sample_mat = CMat::zeros(gram.nrows(), 0);
    for s in samples {
        let k = linalg::vstack(
            &CMat::from_column_slice(m1.dim(), 1, space_kernel_coords(m1, s)?.as_slice()),
            &CMat::from_column_slice(m2.dim(), 1, space_kernel_coords(m2, s)?.as_slice()),
        );
        let nrm = (k.adjoint() * &gram * &k)[(0, 0)].re.sqrt();
        if nrm > tol {
            sample_mat = linalg::hstack(&sample_mat, &(k * creal(T::one() / nrm)));
        }
    }
    let sample_defect = linalg::max_abs(&(meet_part.adjoint() * &gram * &sample_mat));
    let sample_span_defect = if join_part.ncols() == 0 {
        T::zero()
    } else {
        // distance in the G metric from the join basis to span(samples)
        let span = g_orthonormalize(&sample_mat, &gram, tol);
        let proj = &span * (span.adjoint() * &gram * &join_part);
        let r = &join_part - proj;
        let rr = linalg::herm(&(r.adjoint() * &gram * &r));
        linalg::eigh(&rr).0.last().copied().unwrap_or(T::zero()).max(T::zero()).sqrt()
    };
    Ok(DirectSum { gram, meet_part, join_part, orthogonality_defect, sample_defect, sample_span_defect })
}

/// `| ‖FF*x ⊕ GG*x‖²_{F⊕G} − ‖JJ*x‖²_{F∨G} |` with `J = [F | G]`, computed
/// through the range-space norms.
pub fn domuvee_defect<T: Real>(
    rf: &RangeSpace<T>,
    rg: &RangeSpace<T>,
    rj: &RangeSpace<T>,
    x: &CVec<T>,
) -> T {
    let (fa, ga, ja) = (rf.op.active_matrix(), rg.op.active_matrix(), rj.op.active_matrix());
    let lhs = rf.space.norm_sq(&(&fa * (fa.adjoint() * x))) + rg.space.norm_sq(&(&ga * (ga.adjoint() * x)));
    let rhs = rj.space.norm_sq(&(&ja * (ja.adjoint() * x)));
    (lhs - rhs).abs()
}

#[derive(Clone, Debug)]
pub struct Complement<T: Real> {
    pub space: NormedSubspace<T>,
    /// Magnitude of negative eigenvalues clamped in `I - TT*`.
    pub clamp: T,
    pub t_norm: T,
}

/// The range space of `(I - TT*)^{1/2}` on the codomain window.
pub fn complementary_space<T: Real>(t: &MultMatrix<T>, tol: T) -> Result<Complement<T>> {
    let a = t.active_matrix();
    let t_norm = linalg::op_norm(&a);
    if t_norm > T::one() + tol {
        return Err(NcError::NotContractive { norm: to_f64(t_norm) });
    }
    let n = a.nrows();
    let (root, clamp) = linalg::psd_sqrt_cut(&(CMat::identity(n, n) - &a * a.adjoint()), tol);
    Ok(Complement { space: range_space_of_operator(t.cod, &root, tol), clamp, t_norm })
}

/// `sup_m ‖h + m‖² − ‖m‖²_M` in closed form; `None` when unbounded
/// (then `h` is not in the complement).
pub fn complement_norm_sup<T: Real>(h: &CVec<T>, m: &NormedSubspace<T>, tol: T) -> Option<T> {
    let b = m.basis().adjoint() * h;
    let k = m.dim();
    let q = &m.gram - CMat::identity(k, k);
    if k > 0 && linalg::min_eig(&q) < -tol {
        return None;
    }
    let qp = linalg::pinv(&q, linalg::cut(&q, tol));
    let c = &qp * &b;
    if (&q * &c - &b).norm() > tol * b.norm().max(T::one()) {
        return None;
    }
    Some(h.norm_squared() + (b.adjoint() * c)[(0, 0)].re)
}

/// `‖h + Bc‖² − c* G c`, the quantity maximized by `complement_norm_sup`.
pub fn complement_objective<T: Real>(h: &CVec<T>, m: &NormedSubspace<T>, c: &CVec<T>) -> T {
    (h + m.basis() * c).norm_squared() - (c.adjoint() * &m.gram * c)[(0, 0)].re
}

#[derive(Clone, Debug)]
pub struct DqReport<T: Real> {
    pub holds: bool,
    /// Least value of `(‖h‖² − ‖h(0)‖² − ‖R*h‖²) / ‖h‖²` over the space.
    pub min_slack: T,
}

/// Checks `Σ_k ‖R_k* h‖²_H ≤ ‖h‖²_H − ‖h(0)‖²` on an R*-invariant space.
pub fn difference_quotient_check<T: Real>(h: &NormedSubspace<T>, tol: T) -> Result<DqReport<T>> {
    let def = h.space.coinvariance_defect()?;
    if def > tol {
        return Err(NcError::Precondition(format!("space is not coinvariant (defect {def:e})")));
    }
    let b = h.basis();
    let t = h.space.ambient;
    let k = h.dim();
    if k == 0 {
        return Ok(DqReport { holds: true, min_slack: T::zero() });
    }
    let e = b.rows(0, t.r).into_owned();
    let mut q = &h.gram - e.adjoint() * &e;
    for l in 1..=t.d {
        let r = compressed_right_shift::<T>(l, t)?;
        let a = b.adjoint() * r.adjoint() * b;
        q -= a.adjoint() * &h.gram * &a;
    }
    let s = linalg::pd_inv_sqrt(&h.gram);
    let min_slack = linalg::min_eig(&(&s * q * &s));
    Ok(DqReport { holds: min_slack >= -tol, min_slack })
}

#[derive(Clone, Debug)]
pub struct Containment<T: Real> {
    pub contained: bool,
    /// Distance of `A`'s basis from `B` in the ambient norm.
    pub set_residual: T,
    /// Least eigenvalue of `G_A − E* G_B E` relative to `G_A`; `≥ 0` means contractive.
    pub norm_margin: T,
}

/// Contractive containment `A ⊆ B` with `‖a‖_B ≤ ‖a‖_A`.
pub fn contractive_containment<T: Real>(a: &NormedSubspace<T>, b: &NormedSubspace<T>, tol: T) -> Containment<T> {
    let set_residual = b.space.residual(a.basis());
    if a.dim() == 0 {
        return Containment { contained: true, set_residual, norm_margin: T::zero() };
    }
    let e = b.basis().adjoint() * a.basis();
    let diff = &a.gram - e.adjoint() * &b.gram * &e;
    let s = linalg::pd_inv_sqrt(&a.gram);
    let norm_margin = linalg::min_eig(&(&s * diff * &s));
    Containment { contained: set_residual <= tol && norm_margin >= -tol, set_residual, norm_margin }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{multiplier_matrix, poly_to_mat, poly_to_vec};
    use crate::ncpoly::parse_ncpoly;
    use crate::scalar::cx;

    fn p(s: &str, d: usize) -> MatPoly<f64> {
        parse_ncpoly(s, d).unwrap()
    }

    fn pt(v: &[f64]) -> RowTuple<f64> {
        RowTuple::scalar(&v.iter().map(|&x| cx(x, 0.0)).collect::<Vec<_>>()).unwrap()
    }

    fn one() -> CMat<f64> {
        CMat::from_element(1, 1, cx(1.0, 0.0))
    }

    #[test]
    fn szego_scalar_oracles() {
        let k = szego_eval(&RowTuple::zeros(1, 1), &RowTuple::zeros(1, 1), &one(), Some(5)).unwrap();
        assert_eq!(k.value[(0, 0)], cx(1.0, 0.0));
        let k = szego_eval(&pt(&[0.3, 0.2]), &pt(&[0.1, 0.4]), &one(), None).unwrap();
        assert!((k.value[(0, 0)].re - 1.0 / (1.0 - 0.11)).abs() <= k.tail_bound + 1e-14);
        let k = szego_eval(&pt(&[0.5]), &pt(&[0.5]), &one(), Some(10)).unwrap();
        let exact: f64 = (0..=10).map(|i| 0.25f64.powi(i)).sum();
        assert!((k.value[(0, 0)].re - exact).abs() < 1e-14);
        assert!((k.value[(0, 0)].re - 4.0 / 3.0).abs() <= k.tail_bound + 1e-15);
        assert!(szego_eval(&pt(&[1.0]), &pt(&[0.1]), &one(), None).is_err());
    }

    #[test]
    fn range_kernel_examples() {
        let z = pt(&[0.5]);
        let k = range_kernel_eval(&p("z1", 1), &z, &z, &one(), None).unwrap();
        assert!((k.value[(0, 0)].re - 1.0 / 3.0).abs() < 1e-11);
        let id = range_kernel_eval(&p("1", 1), &z, &z, &one(), Some(30)).unwrap();
        let sz = szego_eval(&z, &z, &one(), Some(30)).unwrap();
        assert_eq!(id.value, sz.value);
        let zero = range_kernel_eval(&MatPoly::zero(1, 1, 1), &z, &z, &one(), None).unwrap();
        assert_eq!(zero.value[(0, 0)], cx(0.0, 0.0));
    }

    #[test]
    fn kernel_vector_at_origin_is_vacuum() {
        let t = Truncation::new(2, 3, 1);
        let y = CVec::from_vec(vec![cx(2.0, 1.0)]);
        let v = CVec::from_vec(vec![cx(1.0, -1.0)]);
        let kv = kernel_vector(&RowTuple::zeros(2, 1), &y, &v, t).unwrap();
        let f = p("3 + z1*z2", 2);
        let pair = kv.dotc(&poly_to_vec(&f, t).unwrap());
        let expect = y[0].conj() * cx(3.0, 0.0) * v[0];
        assert!((pair - expect).norm() < 1e-14);
        assert!(kv.rows(1, kv.len() - 1).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn range_space_examples() {
        let r = build_range_space(&p("[[z1, z2]]", 2), 3, 1e-12).unwrap();
        assert!(linalg::max_abs(&(r.gram() - CMat::identity(r.dim(), r.dim()))) < 1e-12);
        let r = build_range_space(&p("2*z1", 1), 4, 1e-12).unwrap();
        assert_eq!(r.dim(), 4);
        assert!(linalg::max_abs(&(r.gram() - CMat::identity(4, 4) * cx(0.25, 0.0))) < 1e-14);
        assert!((r.space.embedding_norm() - 2.0).abs() < 1e-12);
        assert_eq!(build_range_space(&MatPoly::<f64>::zero(1, 1, 1), 3, 1e-12).unwrap().dim(), 0);
    }

    #[test]
    fn meet_examples() {
        let a = build_range_space(&p("z1", 1), 5, 1e-12).unwrap();
        let b = build_range_space(&p("z1*z1", 1), 5, 1e-12).unwrap();
        let m = meet_norm_gram(&a.space, &b.space, 1e-12).unwrap();
        assert_eq!(m.dim(), 4);
        assert!(m.space.residual(b.basis()) < 1e-12);
        assert!(linalg::max_abs(&(&m.gram - CMat::identity(4, 4) * cx(2.0, 0.0))) < 1e-12);
        let a = build_range_space(&p("z1", 2), 3, 1e-12).unwrap();
        let b = build_range_space(&p("z2", 2), 3, 1e-12).unwrap();
        assert_eq!(meet_norm_gram(&a.space, &b.space, 1e-12).unwrap().dim(), 0);
        let m = meet_norm_gram(&a.space, &a.space, 1e-12).unwrap();
        assert_eq!(m.dim(), a.dim());
        assert!(linalg::max_abs(&(&m.gram - a.gram() * cx(2.0, 0.0))) < 1e-12);
    }

    #[test]
    fn direct_sum_same_space() {
        let a = build_range_space(&p("z1", 1), 4, 1e-12).unwrap();
        let samples: Vec<KernelSample<f64>> = [0.1, -0.3, 0.5, 0.2, -0.6, 0.7]
            .iter()
            .map(|&x| (pt(&[x]), CVec::from_vec(vec![cx(1.0, 0.0)]), CVec::from_vec(vec![cx(1.0, 0.0)])))
            .collect();
        let ds = decompose_direct_sum(&a.space, &a.space, &samples, 1e-10).unwrap();
        assert_eq!(ds.meet_part.ncols(), 4);
        assert_eq!(ds.join_part.ncols(), 4);
        assert!(ds.orthogonality_defect < 1e-12 && ds.sample_defect < 1e-10);
        // the meet part is anti-diagonal, the join part diagonal
        let n = a.dim();
        let top = ds.meet_part.rows(0, n).into_owned();
        let bot = ds.meet_part.rows(n, n).into_owned();
        assert!(linalg::max_abs(&(top + bot)) < 1e-12);
        let top = ds.join_part.rows(0, n).into_owned();
        let bot = ds.join_part.rows(n, n).into_owned();
        assert!(linalg::max_abs(&(top - bot)) < 1e-12);
        assert!(ds.sample_span_defect < 1e-6);
    }

    #[test]
    fn complement_examples() {
        let tz = multiplier_matrix(&p("z1", 1), 4);
        let c = complementary_space(&tz, 1e-12).unwrap();
        assert_eq!(c.space.dim(), 1);
        assert!((c.space.basis()[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((c.space.gram[(0, 0)].re - 1.0).abs() < 1e-12);
        let half = multiplier_matrix(&p("0.7071067811865476", 1), 3);
        let c = complementary_space(&half, 1e-12).unwrap();
        assert_eq!(c.space.dim(), 4);
        assert!(linalg::max_abs(&(&c.space.gram - CMat::identity(4, 4) * cx(2.0, 0.0))) < 1e-12);
        let id = multiplier_matrix(&p("1", 1), 3);
        assert_eq!(complementary_space(&id, 1e-12).unwrap().space.dim(), 0);
        let big = multiplier_matrix(&p("1.5*z1", 1), 3);
        assert!(matches!(complementary_space(&big, 1e-12), Err(NcError::NotContractive { .. })));
    }

    #[test]
    fn sup_formula_matches_complement() {
        let half = multiplier_matrix(&p("0.7071067811865476*z1", 1), 3);
        let m = range_space_of_operator(half.cod, &half.active_matrix(), 1e-12);
        let c = complementary_space(&half, 1e-12).unwrap();
        let t = half.cod;
        let h = poly_to_vec(&p("1 + 0.5*z1 - z1*z1", 1), t).unwrap();
        let sup = complement_norm_sup(&h, &m, 1e-10).unwrap();
        assert!((sup - c.space.norm_sq(&h)).abs() < 1e-10);
        let tz = multiplier_matrix(&p("z1", 1), 3);
        let mz = range_space_of_operator(tz.cod, &tz.active_matrix(), 1e-12);
        assert!(complement_norm_sup(&poly_to_vec(&p("z1", 1), tz.cod).unwrap(), &mz, 1e-10).is_none());
    }

    #[test]
    fn difference_quotient_examples() {
        let t = Truncation::new(1, 4, 1);
        let consts = NormedSubspace::ambient_norm(SubspaceRep::span(t, &poly_to_mat(&p("1", 1), t).unwrap(), 1e-12));
        let r = difference_quotient_check(&consts, 1e-12).unwrap();
        assert!(r.holds && r.min_slack.abs() < 1e-12);
        let c = complementary_space(&multiplier_matrix(&p("z1*z1", 1), 2), 1e-12).unwrap();
        assert_eq!(c.space.dim(), 2);
        let r = difference_quotient_check(&c.space, 1e-12).unwrap();
        assert!(r.holds);
        let shifted = NormedSubspace::ambient_norm(SubspaceRep::span(t, &poly_to_mat(&p("z1", 1), t).unwrap(), 1e-12));
        assert!(difference_quotient_check(&shifted, 1e-12).is_err());
    }

    #[test]
    fn complement_of_inner_linear_form() {
        // I - TT* is a projection; its rounding-level eigenvalues must not
        // enter the space through the square root
        let c = complementary_space(&multiplier_matrix(&p("0.6*z1 + 0.8i*z2", 2), 3), 1e-10).unwrap();
        assert_eq!(c.space.dim(), 31 - 15);
        assert!(linalg::max_abs(&(&c.space.gram - CMat::identity(16, 16))) < 1e-12);
        let r = difference_quotient_check(&c.space, 1e-10).unwrap();
        assert!(r.min_slack.abs() < 1e-12);
    }
}
