//! Closed-form values worked out by hand, plus an f32 pass over the same paths.

use ncfock::dilation::{poisson_kernel, wandering_basis};
use ncfock::fock::{multiplier_matrix, poly_to_mat};
use ncfock::lattice::{equivalence_test, join, LatticeElement};
use ncfock::multops::douglas_factor;
use ncfock::ncpoly::parse_ncpoly;
use ncfock::rkhs::{complementary_space, difference_quotient_check, szego_eval};
use ncfock::words::{count_exact, count_upto};
use ncfock::{linalg, CMat, Cx, MatPoly, RowTuple, SubspaceRep, Truncation};

fn p(s: &str, d: usize) -> MatPoly<f64> {
    parse_ncpoly(s, d).unwrap()
}

#[test]
fn word_counts() {
    assert_eq!(count_upto(1, 5), 6);
    assert_eq!(count_upto(2, 3), 15);
    assert_eq!(count_upto(3, 2), 13);
    assert_eq!(count_exact(3, 3), 27);
    assert_eq!(Truncation::new(2, 2, 3).dim(), 21);
}

#[test]
fn szego_on_the_diagonal() {
    // K(z, z) = 1 / (1 - |z|^2)
    let z = RowTuple::<f64>::scalar(&[Cx::new(0.3, 0.4)]).unwrap();
    let k = szego_eval(&z, &z, &CMat::identity(1, 1), None).unwrap();
    assert!((k.value[(0, 0)].re - 4.0 / 3.0).abs() < 1e-12);
    // nilpotent point: the series stops after one step
    let mut n = CMat::zeros(2, 2);
    n[(0, 1)] = Cx::new(0.5, 0.0);
    let z = RowTuple::new(vec![n.clone()]).unwrap();
    let k = szego_eval(&z, &z, &CMat::identity(2, 2), Some(3)).unwrap();
    let exact = CMat::identity(2, 2) + &n * n.adjoint();
    assert!(linalg::max_abs(&(k.value - exact)) < 1e-15);
}

#[test]
fn poisson_kernel_needs_purity() {
    // X = 1/2 leaves 4^{-7} of the norm past degree 6; a nilpotent X leaves nothing
    let x = RowTuple::scalar(&[Cx::new(0.5, 0.0)]).unwrap();
    assert!(matches!(poisson_kernel(&x, 6, 1e-10), Err(ncfock::NcError::Impure { .. })));
    let mut m = CMat::zeros(2, 2);
    m[(0, 1)] = Cx::new(0.5, 0.0);
    let pk = poisson_kernel(&RowTuple::new(vec![m]).unwrap(), 2, 1e-10).unwrap();
    assert_eq!(pk.matrix.shape(), (3 * pk.defect_basis.ncols(), 2));
    assert!(pk.isometry_defect < 1e-15);
}

#[test]
fn complements_with_known_norms() {
    // T = 1/2: I - TT* = 3/4, so the complement is everything with gram 4/3
    let c = complementary_space(&multiplier_matrix(&p("0.5", 2), 2), 1e-12).unwrap();
    assert_eq!(c.space.dim(), 7);
    assert!(linalg::max_abs(&(&c.space.gram * Cx::new(0.75, 0.0) - CMat::identity(7, 7))) < 1e-14);
    // the row [z1, z2] is inner with range everything but the constants
    let c = complementary_space(&multiplier_matrix(&p("[[z1, z2]]", 2), 2), 1e-12).unwrap();
    assert_eq!(c.space.dim(), 1);
    let r = difference_quotient_check(&c.space, 1e-12).unwrap();
    assert!(r.holds && r.min_slack.abs() < 1e-14);
}

#[test]
fn planted_factorization() {
    let f = p("z1*z2 + z1", 2);
    let g = p("z1", 2);
    let fac = douglas_factor(&f, &g, 4, 1e-12).unwrap();
    assert!(fac.h.distance(&p("z2 + 1", 2)).unwrap() < 1e-12);
    // σ = ‖L2 + I‖ = 2 is not reached on a finite window but is approached
    assert!(fac.sigma <= 2.0 + 1e-12 && fac.sigma > 1.5);
}

#[test]
fn join_of_the_two_letters() {
    let a = LatticeElement::new(p("z1", 2), 3, 1e-12).unwrap();
    let b = LatticeElement::new(p("z2", 2), 3, 1e-12).unwrap();
    let j = join(&a, &b, 1e-12).unwrap();
    assert_eq!(j.range.dim(), count_upto(2, 3) - 1);
    let row = LatticeElement::new(p("[[z1, z2]]", 2), 3, 1e-12).unwrap();
    let eq = equivalence_test(&j, &row, 1e-10).unwrap();
    assert!(eq.equivalent && eq.strict_inverse);
    // scaling a symbol keeps its class
    let twice = LatticeElement::new(p("2*z1", 2), 3, 1e-12).unwrap();
    assert!(equivalence_test(&a, &twice, 1e-10).unwrap().equivalent);
}

#[test]
fn wandering_space_of_z1_range() {
    // ran z1 ⊖ (R1 ran z1 + R2 ran z1) is spanned by z1
    let t = Truncation::new(2, 3, 1);
    let f = p("z1", 2);
    let rng = multiplier_matrix(&f, 2).matrix;
    let space = SubspaceRep::span(t, &rng, 1e-12);
    let w = wandering_basis(&space, 1e-12).unwrap();
    assert_eq!(w.dim(), 1);
    let z1 = poly_to_mat(&f, t).unwrap();
    assert!((w.basis.adjoint() * z1)[(0, 0)].norm() > 1.0 - 1e-12);
}

#[test]
fn single_precision_paths() {
    let f: MatPoly<f32> = parse_ncpoly("z1 + z2", 2).unwrap();
    let m = multiplier_matrix(&f, 3);
    assert!((linalg::op_norm(&m.matrix) - 2f32.sqrt()).abs() < 1e-5);
    let z = RowTuple::<f32>::scalar(&[Cx::new(0.3, 0.0), Cx::new(0.0, 0.4)]).unwrap();
    let k = szego_eval(&z, &z, &CMat::identity(1, 1), None).unwrap();
    assert!((k.value[(0, 0)].re - 4.0 / 3.0).abs() < 1e-5);
    let c = complementary_space(&multiplier_matrix(&parse_ncpoly::<f32>("[[z1, z2]]", 2).unwrap(), 2), 1e-4).unwrap();
    assert_eq!(c.space.dim(), 1);
    let mut n = CMat::<f32>::zeros(2, 2);
    n[(0, 1)] = Cx::new(0.6, 0.0);
    let pk = poisson_kernel(&RowTuple::new(vec![n]).unwrap(), 2, 1e-4).unwrap();
    assert!(pk.isometry_defect < 1e-5);
}
