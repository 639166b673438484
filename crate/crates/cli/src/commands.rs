use crate::input::{self, usage, Usage};
use crate::report::{self, complex, matrix, num, nums, symbol};
use crate::{Cli, Cmd, Common};
use anyhow::{Context, Result};
use ncfock::dilation::{self, defect_operator, intertwining_defect, is_row_contraction, poisson_kernel, purity_index};
use ncfock::fock::{mat_to_poly, multiplier_matrix, window_matrix, write_csv};
use ncfock::lattice::{self, equivalence_test, ideal_containment_test, verify_lattice_axioms, LatticeElement};
use ncfock::multops::{douglas_factor, is_inner, is_left_multiplier, kernel_on_window, range_contains};
use ncfock::rkhs::{build_range_space, range_kernel_eval, szego_eval};
use ncfock::words::count_upto;
use ncfock::{linalg, CMat, Cx, MatPoly, NcError, NormedSubspace, RowTuple, SubspaceRep, Truncation};
use serde_json::{json, Value};

const MAX_D: usize = 9;
const MAX_N: usize = 12;
const MAX_DIM: usize = 200_000;
const DEFAULT_N: usize = 4;

/// 2 for bad input or a failed precondition, 1 for anything else.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.chain().any(|c| c.is::<Usage>() || c.is::<NcError>() || c.is::<clap::Error>()) {
        2
    } else {
        1
    }
}

impl Common {
    fn degree(&self) -> usize {
        self.n.unwrap_or(DEFAULT_N)
    }

    fn guard(&self, r: usize) -> Result<()> {
        if !(1..=MAX_D).contains(&self.d) {
            return Err(usage(format!("--d must lie in 1..={MAX_D}")));
        }
        let n = self.degree();
        if !(1..=MAX_N).contains(&n) {
            return Err(usage(format!("--N must lie in 1..={MAX_N}")));
        }
        let dim = count_upto(self.d, n).saturating_mul(r.max(1));
        if dim > MAX_DIM && !self.force {
            return Err(usage(format!("window dimension {dim} exceeds {MAX_DIM}; pass --force to proceed")));
        }
        Ok(())
    }

    fn window(&self, r: usize) -> Value {
        let n = self.degree();
        json!({"d": self.d, "N": n, "r": r, "dim": count_upto(self.d, n) * r})
    }
}

fn point(z: &RowTuple<f64>) -> Value {
    json!({"n": z.n, "mats": z.mats.iter().map(matrix).collect::<Vec<_>>()})
}

fn optional(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

fn douglas_json(dg: &ncfock::multops::Douglas<f64>) -> Value {
    json!({
        "h": symbol(&dg.h),
        "sigma": num(dg.sigma),
        "lambda_sq": num(dg.lambda_sq),
        "psd_floor": num(dg.psd_floor),
        "residual": num(dg.residual),
        "product_residual": num(dg.product_residual),
        "boundary_touch": dg.boundary_touch,
    })
}

fn emit(c: &Common, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    match &c.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn pair(c: &Common, f: &str, g: &str) -> Result<(MatPoly<f64>, MatPoly<f64>)> {
    let (f, g) = (input::symbol(f, c.d)?, input::symbol(g, c.d)?);
    if f.rows() != g.rows() {
        return Err(usage(format!("row counts differ: {} vs {}", f.rows(), g.rows())));
    }
    c.guard(f.rows().max(f.cols() + g.cols()))?;
    Ok((f, g))
}

fn element(p: &MatPoly<f64>, c: &Common) -> Result<LatticeElement<f64>> {
    Ok(LatticeElement::new(p.clone(), c.degree(), c.tol)?)
}

pub fn run(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    if !(c.tol > 0.0 && c.tol.is_finite()) {
        return Err(usage("--tol must be positive"));
    }
    let tol = c.tol;
    let v = match &cli.cmd {
        Cmd::Eval { f, z } => {
            if !(1..=MAX_D).contains(&c.d) {
                return Err(usage(format!("--d must lie in 1..={MAX_D}")));
            }
            let p = input::symbol(f, c.d)?;
            let z = input::point(z, c.d)?;
            let val = p.eval_at_point(&z)?;
            report::envelope(
                "eval",
                json!({"f": symbol(&p), "Z": point(&z)}),
                Value::Null,
                json!({"value": matrix(&val), "shape": [val.nrows(), val.ncols()]}),
                tol,
            )
        }
        Cmd::Szego { z, w, p } => {
            if !(1..=MAX_D).contains(&c.d) {
                return Err(usage(format!("--d must lie in 1..={MAX_D}")));
            }
            let z = input::point(z, c.d)?;
            let w = input::point(w, c.d)?;
            let pm = match p {
                Some(s) => input::matrix(s)?,
                None => linalg::identity(z.n.max(w.n)),
            };
            let k = szego_eval(&z, &w, &pm, c.n)?;
            let mut res = json!({
                "value": matrix(&k.value),
                "tail_bound": num(k.tail_bound),
                "cutoff": k.cutoff,
            });
            if z.n == 1 && w.n == 1 {
                // scalar points: the series sums to 1/(1 - Σ z_k conj(w_k)) P
                let s: Cx<f64> = z.mats.iter().zip(&w.mats).map(|(a, b)| a[(0, 0)] * b[(0, 0)].conj()).sum();
                let lim = (Cx::new(1.0, 0.0) - s).inv();
                let gap = linalg::max_abs(&(&k.value - &pm * lim));
                res["commuting_limit"] = complex(lim);
                res["limit_gap"] = num(gap);
            }
            report::envelope(
                "szego",
                json!({"Z": point(&z), "W": point(&w), "P": matrix(&pm)}),
                json!({"d": c.d, "cutoff": k.cutoff}),
                res,
                tol,
            )
        }
        Cmd::Mult { f, csv } => {
            let p = input::symbol(f, c.d)?;
            c.guard(p.rows().max(p.cols()))?;
            let n = c.degree();
            let m = multiplier_matrix(&p, n);
            if let Some(path) = csv {
                std::fs::write(path, write_csv(&m.matrix)).with_context(|| format!("writing {}", path.display()))?;
            }
            let (inner, inner_defect) = is_inner(&m, tol);
            let (left, left_defect) = is_left_multiplier(&m.matrix, m.dom, m.cod, tol)?;
            let (kernel, kernel_defect) = kernel_on_window(&m, tol)?;
            let range = build_range_space(&p, n, tol).ok();
            report::envelope(
                "mult",
                json!({"f": symbol(&p)}),
                json!({"d": c.d, "N": n, "dom_dim": m.dom.dim(), "cod_dim": m.cod.dim(), "cod_degree": m.cod.degree}),
                json!({
                    "exact": m.exact,
                    "norm": num(linalg::op_norm(&m.matrix)),
                    "inner": inner,
                    "inner_defect": num(inner_defect),
                    "left_multiplier": left,
                    "left_multiplier_defect": num(left_defect),
                    "kernel_dim": kernel.dim(),
                    "kernel_invariance_defect": num(kernel_defect),
                    "range_dim": range.as_ref().map(|r| r.dim()),
                    "range_embedding_norm": optional(range.as_ref().map(|r| r.space.embedding_norm())),
                }),
                tol,
            )
        }
        Cmd::Douglas { f, g } => {
            let (p, q) = pair(c, f, g)?;
            let n = c.degree();
            let contain = range_contains(&window_matrix(&p, n)?, &window_matrix(&q, n)?, tol)?;
            let dg = douglas_factor(&p, &q, n, tol)?;
            report::envelope(
                "douglas",
                json!({"f": symbol(&p), "g": symbol(&q)}),
                c.window(p.rows()),
                json!({"range_contained": contain.0, "containment_residual": num(contain.1), "factor": douglas_json(&dg)}),
                tol,
            )
        }
        Cmd::Dilate { x } => {
            c.guard(1)?;
            let n = c.degree();
            let x = input::point(x, c.d)?;
            let (contractive, row_norm) = is_row_contraction(&x, tol);
            if !contractive {
                return Err(NcError::NotContractive { norm: row_norm }.into());
            }
            let (delta, _) = defect_operator(&x, tol)?;
            let pk = poisson_kernel(&x, n, tol)?;
            let kernel_symbol = mat_to_poly(&pk.matrix, pk.window);
            report::envelope(
                "dilate",
                json!({"X": point(&x)}),
                json!({"d": c.d, "N": n, "defect_rank": pk.window.r, "dim": pk.window.dim()}),
                json!({
                    "row_norm": num(row_norm),
                    "purity": nums(&purity_index(&x, n + 1)),
                    "defect": matrix(&delta),
                    "poisson_kernel": symbol(&kernel_symbol),
                    "purity_residual": num(pk.purity_residual),
                    "isometry_defect": num(pk.isometry_defect),
                    "intertwining_defect": num(intertwining_defect(&pk, &x)?),
                }),
                tol,
            )
        }
        Cmd::Dbb { basis, gram, r } => {
            c.guard(*r)?;
            let t = Truncation::new(c.d, c.degree(), *r);
            let b = input::matrix(&basis.to_string_lossy())?;
            if b.nrows() != t.dim() {
                return Err(usage(format!("basis has {} rows, window dimension is {}", b.nrows(), t.dim())));
            }
            let g = match gram {
                Some(p) => input::matrix(&p.to_string_lossy())?,
                None => linalg::identity(b.ncols()),
            };
            if g.shape() != (b.ncols(), b.ncols()) {
                return Err(usage(format!("gram is {:?}, expected {}x{}", g.shape(), b.ncols(), b.ncols())));
            }
            let m = orthonormal_coords(t, b, g)?;
            let rep = dilation::dbb_multiplier(&m, tol)?;
            report::envelope(
                "dbb",
                json!({"basis": basis.display().to_string(), "gram": gram.as_ref().map(|p| p.display().to_string())}),
                c.window(*r),
                json!({
                    "symbol": symbol(&rep.symbol),
                    "row_norm": num(rep.row_norm),
                    "defect_rank": rep.defect_rank,
                    "embedding_norm": num(rep.embedding_norm),
                    "multiplier_norm": num(rep.multiplier_norm),
                    "range_defect": num(rep.range_defect),
                    "gram_defect": num(rep.gram_defect),
                }),
                tol,
            )
        }
        Cmd::Join { f, g } => {
            let (p, q) = pair(c, f, g)?;
            let j = lattice::join(&element(&p, c)?, &element(&q, c)?, tol)?;
            // K^{F∨G} = K^F + K^G at a few fixed scalar points
            let mut gap = 0.0f64;
            for (zs, ws) in probe_points(c.d) {
                let (z, w) = (RowTuple::scalar(&zs)?, RowTuple::scalar(&ws)?);
                let one = linalg::identity(1);
                let kj = range_kernel_eval(&j.symbol, &z, &w, &one, None)?;
                let kf = range_kernel_eval(&p, &z, &w, &one, None)?;
                let kg = range_kernel_eval(&q, &z, &w, &one, None)?;
                gap = gap.max(linalg::max_abs(&(kj.value - kf.value - kg.value)));
            }
            report::envelope(
                "join",
                json!({"f": symbol(&p), "g": symbol(&q)}),
                c.window(p.rows()),
                json!({"join": symbol(&j.symbol), "range_dim": j.range.dim(), "kernel_sum_gap": num(gap)}),
                tol,
            )
        }
        Cmd::Meet { f, g } => {
            let (p, q) = pair(c, f, g)?;
            let m = lattice::meet(&element(&p, c)?, &element(&q, c)?, tol)?;
            let cert = &m.certificate;
            report::envelope(
                "meet",
                json!({"f": symbol(&p), "g": symbol(&q)}),
                c.window(p.rows()),
                json!({
                    "h": symbol(&m.h.symbol),
                    "gamma": symbol(&m.gamma),
                    "range_dim": m.h.range.dim(),
                    "certificate": {
                        "stacked_residual": num(cert.stacked_residual),
                        "gamma_isometry_defect": num(cert.gamma_isometry_defect),
                        "gamma_kernel_residual": num(cert.gamma_kernel_residual),
                        "range_residual": num(cert.range_residual),
                        "gram_residual": num(cert.gram_residual),
                        "stacked_isometry_defect": optional(cert.stacked_isometry_defect),
                        "coefficient_dim": cert.coefficient_dim,
                        "dim_bound_ok": cert.dim_bound_ok,
                        "h_kernel_dim": cert.h_kernel_dim,
                        "nontrivial_input_kernels": cert.nontrivial_input_kernels,
                    },
                }),
                tol,
            )
        }
        Cmd::Equiv { f, g } => {
            let (p, q) = pair(c, f, g)?;
            let e = equivalence_test(&element(&p, c)?, &element(&q, c)?, tol)?;
            report::envelope(
                "equiv",
                json!({"f": symbol(&p), "g": symbol(&q)}),
                c.window(p.rows()),
                json!({
                    "equivalent": e.equivalent,
                    "stage": e.stage,
                    "residual": num(e.residual()),
                    "contain_fg": num(e.contain_fg),
                    "contain_gf": num(e.contain_gf),
                    "c": e.c.as_ref().map(douglas_json),
                    "d": e.d.as_ref().map(douglas_json),
                    "strict_inverse": e.strict_inverse,
                    "strict_residual": num(e.strict_residual),
                    "kernel_inverse_residual": num(e.kernel_inverse_residual),
                }),
                tol,
            )
        }
        Cmd::Axioms { f, g, h } => {
            let (p, q) = pair(c, f, g)?;
            let s = input::symbol(h, c.d)?;
            if s.rows() != p.rows() {
                return Err(usage("all three symbols must share a row count"));
            }
            c.guard(p.cols() + q.cols() + s.cols())?;
            let rep = verify_lattice_axioms(&element(&p, c)?, &element(&q, c)?, &element(&s, c)?, tol)?;
            let checks: Vec<Value> = rep
                .checks
                .iter()
                .map(|a| {
                    json!({
                        "name": a.name,
                        "pass": a.pass,
                        "residual": num(a.residual),
                        "strict_inverse": a.strict_inverse,
                        "stage": a.stage,
                    })
                })
                .collect();
            report::envelope(
                "axioms",
                json!({"f": symbol(&p), "g": symbol(&q), "h": symbol(&s)}),
                c.window(p.rows()),
                json!({"all_pass": rep.all_pass(), "max_residual": num(rep.max_residual()), "checks": checks}),
                tol,
            )
        }
        Cmd::Ideal { f, g } => {
            let (p, q) = pair(c, f, g)?;
            let r = ideal_containment_test(&p, &q, c.degree(), tol)?;
            report::envelope(
                "ideal",
                json!({"f": symbol(&p), "g": symbol(&q)}),
                c.window(p.rows()),
                json!({
                    "ideal_fg": r.ideal_fg,
                    "ideal_gf": r.ideal_gf,
                    "ideal_residual_fg": num(r.ideal_residual_fg),
                    "ideal_residual_gf": num(r.ideal_residual_gf),
                    "range_fg": r.range_fg,
                    "range_gf": r.range_gf,
                    "witness_fg": r.witness_fg,
                    "witness_gf": r.witness_gf,
                }),
                tol,
            )
        }
    };
    emit(c, &v)
}

/// Rewrites `(B, G)` with `B` of full column rank as an orthonormal basis and
/// the matching gram, keeping `‖Bc‖²_M = c* G c`.
fn orthonormal_coords(t: Truncation, b: CMat<f64>, g: CMat<f64>) -> Result<NormedSubspace<f64>> {
    let qr = b.qr();
    let (q, r) = (qr.q(), qr.r());
    let r_inv = r.try_inverse().ok_or_else(|| usage("basis columns are linearly dependent"))?;
    let gram = linalg::herm(&(r_inv.adjoint() * g * r_inv));
    let space = SubspaceRep { ambient: t, limits: vec![t.degree; t.r], basis: q };
    Ok(NormedSubspace { space, gram })
}

/// Fixed scalar point pairs strictly inside the unit ball.
fn probe_points(d: usize) -> Vec<(Vec<Cx<f64>>, Vec<Cx<f64>>)> {
    let s = 0.5 / (d as f64).sqrt();
    (0..3)
        .map(|i| {
            let z = (0..d).map(|k| Cx::from_polar(s, 0.7 * (i + k) as f64)).collect();
            let w = (0..d).map(|k| Cx::from_polar(0.8 * s, 1.3 * (i * 2 + k) as f64 + 0.1)).collect();
            (z, w)
        })
        .collect()
}
