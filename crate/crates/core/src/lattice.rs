//! The lattice of left multipliers sharing a codomain: join, meet with its
//! Γ-factorization, equivalence, the axiom suite and right ideals.

use crate::dilation::beurling_inner;
use crate::error::{NcError, Result};
use crate::fock::window_matrix;
use crate::linalg;
use crate::multops::{douglas_factor, is_inner, kernel_on_window, range_contains, Douglas};
use crate::ncpoly::MatPoly;
use crate::rkhs::{build_range_space, meet_norm_gram, RangeSpace};
use crate::scalar::Real;
use crate::subspace::SubspaceRep;

#[derive(Clone, Debug)]
pub struct LatticeElement<T: Real> {
    pub symbol: MatPoly<T>,
    pub n: usize,
    pub range: RangeSpace<T>,
}

impl<T: Real> LatticeElement<T> {
    pub fn new(symbol: MatPoly<T>, n: usize, tol: T) -> Result<Self> {
        let range = build_range_space(&symbol, n, tol)?;
        Ok(LatticeElement { symbol, n, range })
    }

    /// The zero multiplier with one input coordinate.
    pub fn bottom(d: usize, rows: usize, n: usize, tol: T) -> Result<Self> {
        Self::new(MatPoly::zero(d, rows, 1), n, tol)
    }

    /// The constant identity multiplier.
    pub fn top(d: usize, rows: usize, n: usize, tol: T) -> Result<Self> {
        Self::new(MatPoly::identity(d, rows), n, tol)
    }

    pub fn rows(&self) -> usize {
        self.symbol.rows()
    }
}

fn check_pair<T: Real>(f: &LatticeElement<T>, g: &LatticeElement<T>) -> Result<()> {
    if f.rows() != g.rows() || f.n != g.n || f.symbol.d() != g.symbol.d() {
        return Err(NcError::ShapeMismatch(format!(
            "lattice elements differ: rows {} vs {}, window {} vs {}",
            f.rows(),
            g.rows(),
            f.n,
            g.n
        )));
    }
    Ok(())
}

/// `F ∨ G = [F | G]`.
pub fn join<T: Real>(f: &LatticeElement<T>, g: &LatticeElement<T>, tol: T) -> Result<LatticeElement<T>> {
    check_pair(f, g)?;
    LatticeElement::new(f.symbol.hstack(&g.symbol)?, f.n, tol)
}

#[derive(Clone, Debug)]
pub struct MeetCertificate<T: Real> {
    /// Largest coefficient of `diag(F,G) Γ − (H; −H)`.
    pub stacked_residual: T,
    pub gamma_isometry_defect: T,
    /// Largest coefficient of `[F | G] Γ`.
    pub gamma_kernel_residual: T,
    /// Principal-angle distance between `ran H(L)` and `ran F(L) ∩ ran G(L)`.
    pub range_residual: T,
    /// Difference between the gram of `ran H(L)` and the summed meet norm.
    pub gram_residual: T,
    /// Isometry defect of `(H; −H)`, reported when `F` and `G` are both inner.
    pub stacked_isometry_defect: Option<T>,
    pub coefficient_dim: usize,
    pub dim_bound_ok: bool,
    pub h_kernel_dim: usize,
    /// Either `F` or `G` has a nontrivial window kernel.
    pub nontrivial_input_kernels: bool,
}

#[derive(Clone, Debug)]
pub struct Meet<T: Real> {
    pub h: LatticeElement<T>,
    pub gamma: MatPoly<T>,
    pub certificate: MeetCertificate<T>,
}

pub fn meet<T: Real>(f: &LatticeElement<T>, g: &LatticeElement<T>, tol: T) -> Result<Meet<T>> {
    check_pair(f, g)?;
    let d = f.symbol.d();
    let (cf, cg) = (f.symbol.cols(), g.symbol.cols());
    let joined = f.symbol.hstack(&g.symbol)?;
    let jw = window_matrix(&joined, f.n)?;
    let (kernel, _) = kernel_on_window(&jw, tol)?;
    let (gamma, gamma_isometry_defect) = beurling_inner(&kernel, tol)?;
    let hcols = gamma.cols();
    let top = gamma.block(0, cf, 0, hcols);
    let bot = gamma.block(cf, cg, 0, hcols);
    let hsym = f.symbol.mul(&top)?;
    let h = LatticeElement::new(hsym.clone(), f.n, tol)?;
    let stacked = f.symbol.block_diag(&g.symbol)?.mul(&gamma)?;
    let expect = hsym.vstack(&hsym.neg())?;
    let stacked_residual = stacked.distance(&expect)?;
    let gamma_kernel_residual = joined.mul(&gamma)?.max_abs_coeff();
    let _ = bot;
    let m = meet_norm_gram(&f.range.space, &g.range.space, tol)?;
    let range_residual = if m.dim() == 0 && h.range.dim() == 0 {
        T::zero()
    } else {
        linalg::subspace_distance(h.range.basis(), m.basis())
    };
    let gram_residual = if h.range.dim() == m.dim() {
        let e = m.basis().adjoint() * h.range.basis();
        linalg::max_abs(&(&e * h.range.gram() * e.adjoint() - &m.gram))
    } else {
        T::one()
    };
    let f_inner = is_inner(&f.range.op, tol).0;
    let g_inner = is_inner(&g.range.op, tol).0;
    let stacked_isometry_defect = if f_inner && g_inner && hcols > 0 {
        Some(is_inner(&window_matrix(&expect, f.n)?, tol).1)
    } else {
        None
    };
    let h_kernel_dim = if hcols == 0 { 0 } else { kernel_on_window(&h.range.op, tol)?.0.dim() };
    let fk = kernel_on_window(&f.range.op, tol)?.0.dim();
    let gk = kernel_on_window(&g.range.op, tol)?.0.dim();
    let _ = d;
    Ok(Meet {
        h,
        gamma,
        certificate: MeetCertificate {
            stacked_residual,
            gamma_isometry_defect,
            gamma_kernel_residual,
            range_residual,
            gram_residual,
            stacked_isometry_defect,
            coefficient_dim: hcols,
            dim_bound_ok: hcols <= cf + cg,
            h_kernel_dim,
            nontrivial_input_kernels: fk > 0 || gk > 0,
        },
    })
}

#[derive(Clone, Debug)]
pub struct Equivalence<T: Real> {
    pub equivalent: bool,
    /// First failing stage, if any.
    pub stage: Option<String>,
    pub contain_fg: T,
    pub contain_gf: T,
    /// `F = G C`.
    pub c: Option<Douglas<T>>,
    /// `G = F D`.
    pub d: Option<Douglas<T>>,
    /// `C D = I` and `D C = I` as polynomials.
    pub strict_inverse: bool,
    pub strict_residual: T,
    /// `G (C D − I)` and `F (D C − I)`: identity modulo the kernels.
    pub kernel_inverse_residual: T,
}

impl<T: Real> Equivalence<T> {
    /// Largest residual among the checks that decide the verdict.
    pub fn residual(&self) -> T {
        let mut r = self.contain_fg.max(self.contain_gf).max(self.kernel_inverse_residual);
        for w in [&self.c, &self.d].into_iter().flatten() {
            r = r.max(w.residual).max(w.product_residual);
        }
        r
    }
}

/// `F ∼ G`: ranges contain each other and both Douglas factorizations are
/// exact polynomial identities. Strict two-sided invertibility of the witnesses
/// is reported separately.
pub fn equivalence_test<T: Real>(f: &LatticeElement<T>, g: &LatticeElement<T>, tol: T) -> Result<Equivalence<T>> {
    check_pair(f, g)?;
    let (ok_fg, contain_fg) = range_contains(&f.range.op, &g.range.op, tol)?;
    let (ok_gf, contain_gf) = range_contains(&g.range.op, &f.range.op, tol)?;
    let mut out = Equivalence {
        equivalent: false,
        stage: None,
        contain_fg,
        contain_gf,
        c: None,
        d: None,
        strict_inverse: false,
        strict_residual: T::one(),
        kernel_inverse_residual: T::zero(),
    };
    if !(ok_fg && ok_gf) {
        out.stage = Some("range containment".into());
        return Ok(out);
    }
    let c = match douglas_factor(&f.symbol, &g.symbol, f.n, tol) {
        Ok(c) => c,
        Err(e) => {
            out.stage = Some(format!("factorization F = G C: {e}"));
            return Ok(out);
        }
    };
    let dd = match douglas_factor(&g.symbol, &f.symbol, f.n, tol) {
        Ok(dd) => dd,
        Err(e) => {
            out.c = Some(c);
            out.stage = Some(format!("factorization G = F D: {e}"));
            return Ok(out);
        }
    };
    let d = f.symbol.d();
    let cd = c.h.mul(&dd.h)?;
    let dc = dd.h.mul(&c.h)?;
    let kir = g.symbol.mul(&cd)?.distance(&g.symbol)?.max(f.symbol.mul(&dc)?.distance(&f.symbol)?);
    out.kernel_inverse_residual = kir;
    if cd.shape() == dc.shape() {
        let id = MatPoly::identity(d, cd.rows());
        out.strict_residual = cd.distance(&id)?.max(dc.distance(&id)?);
        out.strict_inverse = out.strict_residual <= tol;
    }
    let exact = c.product_residual <= tol && dd.product_residual <= tol && kir <= tol;
    out.c = Some(c);
    out.d = Some(dd);
    if exact {
        out.equivalent = true;
    } else {
        out.stage = Some("polynomial identity".into());
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct AxiomCheck<T: Real> {
    pub name: String,
    pub pass: bool,
    pub residual: T,
    pub strict_inverse: bool,
    pub stage: Option<String>,
}

#[derive(Clone, Debug)]
pub struct AxiomReport<T: Real> {
    pub checks: Vec<AxiomCheck<T>>,
}

impl<T: Real> AxiomReport<T> {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
    pub fn max_residual(&self) -> T {
        self.checks.iter().fold(T::zero(), |acc, c| acc.max(c.residual))
    }
}

fn equiv_check<T: Real>(name: &str, a: &LatticeElement<T>, b: &LatticeElement<T>, tol: T) -> AxiomCheck<T> {
    match equivalence_test(a, b, tol) {
        Ok(e) => AxiomCheck {
            name: name.into(),
            pass: e.equivalent,
            residual: e.residual(),
            strict_inverse: e.strict_inverse,
            stage: e.stage.clone(),
        },
        Err(err) => AxiomCheck { name: name.into(), pass: false, residual: T::one(), strict_inverse: false, stage: Some(err.to_string()) },
    }
}

fn failed<T: Real>(name: &str, err: NcError) -> AxiomCheck<T> {
    AxiomCheck { name: name.into(), pass: false, residual: T::one(), strict_inverse: false, stage: Some(err.to_string()) }
}

/// Commutativity, associativity, absorption and the bounds, each decided by
/// `equivalence_test`; meet associativity also compares the summed norms.
pub fn verify_lattice_axioms<T: Real>(
    f: &LatticeElement<T>,
    g: &LatticeElement<T>,
    h: &LatticeElement<T>,
    tol: T,
) -> Result<AxiomReport<T>> {
    check_pair(f, g)?;
    check_pair(f, h)?;
    let (d, rows, n) = (f.symbol.d(), f.rows(), f.n);
    let mut checks = Vec::new();
    let mt = |a: &LatticeElement<T>, b: &LatticeElement<T>| meet(a, b, tol).map(|m| m.h);

    checks.push(equiv_check("join commutative", &join(f, g, tol)?, &join(g, f, tol)?, tol));
    match (mt(f, g), mt(g, f)) {
        (Ok(a), Ok(b)) => checks.push(equiv_check("meet commutative", &a, &b, tol)),
        (Err(e), _) | (_, Err(e)) => checks.push(failed("meet commutative", e)),
    }
    checks.push(equiv_check(
        "join associative",
        &join(&join(f, g, tol)?, h, tol)?,
        &join(f, &join(g, h, tol)?, tol)?,
        tol,
    ));
    let left = mt(f, g).and_then(|fg| mt(&fg, h));
    let right = mt(g, h).and_then(|gh| mt(f, &gh));
    match (left, right) {
        (Ok(a), Ok(b)) => {
            checks.push(equiv_check("meet associative", &a, &b, tol));
            let norm = if a.range.dim() == b.range.dim() {
                let e = a.range.basis().adjoint() * b.range.basis();
                linalg::max_abs(&(&e * b.range.gram() * e.adjoint() - a.range.gram()))
            } else {
                T::one()
            };
            checks.push(AxiomCheck { name: "meet associative (norm)".into(), pass: norm <= tol, residual: norm, strict_inverse: true, stage: None });
        }
        (Err(e), _) | (_, Err(e)) => checks.push(failed("meet associative", e)),
    }
    match mt(f, &join(f, g, tol)?) {
        Ok(a) => checks.push(equiv_check("absorption F ∧ (F ∨ G) ∼ F", &a, f, tol)),
        Err(e) => checks.push(failed("absorption F ∧ (F ∨ G) ∼ F", e)),
    }
    match mt(f, g) {
        Ok(fg) => checks.push(equiv_check("absorption F ∨ (F ∧ G) ∼ F", &join(f, &fg, tol)?, f, tol)),
        Err(e) => checks.push(failed("absorption F ∨ (F ∧ G) ∼ F", e)),
    }
    let zero = LatticeElement::bottom(d, rows, n, tol)?;
    checks.push(equiv_check("bottom F ∨ 0 ∼ F", &join(f, &zero, tol)?, f, tol));
    let one = LatticeElement::top(d, rows, n, tol)?;
    match mt(f, &one) {
        Ok(a) => checks.push(equiv_check("top F ∧ I ∼ F", &a, f, tol)),
        Err(e) => checks.push(failed("top F ∧ I ∼ F", e)),
    }
    Ok(AxiomReport { checks })
}

/// Window image of the right ideal generated by the entries of a row symbol.
pub fn right_ideal_basis<T: Real>(f: &MatPoly<T>, n: usize, tol: T) -> Result<SubspaceRep<T>> {
    if f.rows() != 1 {
        return Err(NcError::Precondition(format!("right ideals need a row symbol, got {} rows", f.rows())));
    }
    let w = window_matrix(f, n)?;
    Ok(SubspaceRep::span(w.cod, &w.active_matrix(), tol))
}

#[derive(Clone, Debug)]
pub struct IdealReport<T: Real> {
    pub ideal_fg: bool,
    pub ideal_gf: bool,
    pub ideal_residual_fg: T,
    pub ideal_residual_gf: T,
    pub range_fg: bool,
    pub range_gf: bool,
    /// `F = G A` for a polynomial `A`, which places every entry of `F` in `J_G`.
    pub witness_fg: bool,
    pub witness_gf: bool,
}

pub fn ideal_containment_test<T: Real>(f: &MatPoly<T>, g: &MatPoly<T>, n: usize, tol: T) -> Result<IdealReport<T>> {
    let jf = right_ideal_basis(f, n, tol)?;
    let jg = right_ideal_basis(g, n, tol)?;
    let ideal_residual_fg = jg.residual(&jf.basis);
    let ideal_residual_gf = jf.residual(&jg.basis);
    let (fw, gw) = (window_matrix(f, n)?, window_matrix(g, n)?);
    let range_fg = range_contains(&fw, &gw, tol)?.0;
    let range_gf = range_contains(&gw, &fw, tol)?.0;
    let witness = |a: &MatPoly<T>, b: &MatPoly<T>| match douglas_factor(a, b, n, tol) {
        Ok(r) => r.product_residual <= tol,
        Err(_) => false,
    };
    Ok(IdealReport {
        ideal_fg: ideal_residual_fg <= tol,
        ideal_gf: ideal_residual_gf <= tol,
        ideal_residual_fg,
        ideal_residual_gf,
        range_fg,
        range_gf,
        witness_fg: witness(f, g),
        witness_gf: witness(g, f),
    })
}
