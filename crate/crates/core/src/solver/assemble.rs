//! Galerkin assembly of the curl-curl and conductivity mass forms, the
//! interface right-hand side, and tangential surface projections.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::domain::Face;
use crate::error::{Error, Result};
use crate::math::GaussRule;
use crate::solver::csr::Csr;
use crate::solver::linsolve::{linear_solve_real, Factorization};
use crate::spaces::{cross_cn, CurlSpace, DirTable, SurfPoint, SurfaceQuadrature};
use crate::C64;

/// Bilinear form selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BilinearKind {
    /// (coeff curl u, curl v)
    CurlCurl,
    /// (coeff u, v)
    VectorMass,
}

/// One volume element of the space.
#[derive(Debug, Clone, Copy)]
struct ElementRef {
    local_patch: usize,
    el: [usize; 3],
}

/// List elements of the space, optionally only where `coeff` is nonzero.
fn element_list(space: &CurlSpace, coeff: &[f64]) -> Vec<ElementRef> {
    let mut out = Vec::new();
    for lp in 0..space.n_local_patches() {
        if coeff[space.patch_ids[lp]] == 0.0 {
            continue;
        }
        let dirs = space.dir_basis(lp);
        let n = [dirs[0].n_elements(), dirs[1].n_elements(), dirs[2].n_elements()];
        for e0 in 0..n[0] {
            for e1 in 0..n[1] {
                for e2 in 0..n[2] {
                    out.push(ElementRef { local_patch: lp, el: [e0, e1, e2] });
                }
            }
        }
    }
    out
}

/// Signed global dofs of one element, component-major.
fn element_dofs(space: &CurlSpace, tables: &[[DirTable; 3]], er: &ElementRef) -> Vec<(u32, f64)> {
    let p = space.degree;
    let lp = er.local_patch;
    let t = &tables[lp];
    let mut out = Vec::with_capacity(3 * p * (p + 1) * (p + 1));
    for comp in 0..3 {
        let size = |d: usize| if d == comp { p } else { p + 1 };
        let first = |d: usize| {
            if d == comp {
                t[d].d_first[er.el[d]]
            } else {
                t[d].s_first[er.el[d]]
            }
        };
        let (f0, f1, f2) = (first(0), first(1), first(2));
        for a in 0..size(0) {
            for b in 0..size(1) {
                for c in 0..size(2) {
                    out.push(space.gid_sign(lp, comp, [f0 + a, f1 + b, f2 + c]));
                }
            }
        }
    }
    out
}

/// Dense local matrix of one element for the requested form, with dof
/// signs folded in.
fn local_matrix(
    space: &CurlSpace,
    tables: &[[DirTable; 3]],
    er: &ElementRef,
    kind: BilinearKind,
    coeff: f64,
    signs: &[(u32, f64)],
) -> Vec<f64> {
    let p = space.degree;
    let lp = er.local_patch;
    let pid = space.patch_ids[lp];
    let patch = &space.domain().patches[pid];
    let t = &tables[lp];
    let q = t[0].q;
    let n_loc = signs.len();
    let mut k_loc = vec![0.0f64; n_loc * n_loc];
    let mut vecs = vec![Vector3::zeros(); n_loc];

    for g0 in 0..q {
        for g1 in 0..q {
            for g2 in 0..q {
                let xi = [
                    t[0].point(er.el[0], g0),
                    t[1].point(er.el[1], g1),
                    t[2].point(er.el[2], g2),
                ];
                let w_ref = t[0].weight(er.el[0], g0)
                    * t[1].weight(er.el[1], g1)
                    * t[2].weight(er.el[2], g2);
                let ev = patch.eval(&xi).expect("quadrature point in range");
                let det = ev.jac.determinant();

                // Scaled physical vectors per local function: the form value
                // is the plain dot product of these.
                let mut idx = 0usize;
                match kind {
                    BilinearKind::CurlCurl => {
                        let scale = (coeff * w_ref / det.abs()).sqrt();
                        for comp in 0..3 {
                            build_curl_vectors(
                                t, er, comp, p, g0, g1, g2, &ev.jac, scale, &mut vecs, &mut idx,
                            );
                        }
                    }
                    BilinearKind::VectorMass => {
                        let inv = ev.jac.try_inverse().expect("nondegenerate Jacobian");
                        let scale = (coeff * w_ref * det.abs()).sqrt();
                        for comp in 0..3 {
                            build_value_vectors(
                                t, er, comp, p, g0, g1, g2, &inv, scale, &mut vecs, &mut idx,
                            );
                        }
                    }
                }
                debug_assert_eq!(idx, n_loc);
                for (i, vi) in vecs.iter().enumerate() {
                    let svi = *vi * signs[i].1;
                    for (j, vj) in vecs.iter().enumerate().skip(i) {
                        k_loc[i * n_loc + j] += svi.dot(vj) * signs[j].1;
                    }
                }
            }
        }
    }
    // Mirror the upper triangle.
    for i in 0..n_loc {
        for j in 0..i {
            k_loc[i * n_loc + j] = k_loc[j * n_loc + i];
        }
    }
    k_loc
}

#[allow(clippy::too_many_arguments)]
fn build_curl_vectors(
    t: &[DirTable; 3],
    er: &ElementRef,
    comp: usize,
    p: usize,
    g0: usize,
    g1: usize,
    g2: usize,
    jac: &Matrix3<f64>,
    scale: f64,
    vecs: &mut [Vector3<f64>],
    idx: &mut usize,
) {
    let gs = [g0, g1, g2];
    let pick = |d: usize| -> (&[f64], &[f64]) {
        if d == comp {
            (t[d].deriv_values(er.el[d], gs[d]), t[d].deriv_derivs(er.el[d], gs[d]))
        } else {
            (t[d].scalar_values(er.el[d], gs[d]), t[d].scalar_derivs(er.el[d], gs[d]))
        }
    };
    let (v0, d0) = pick(0);
    let (v1, d1) = pick(1);
    let (v2, d2) = pick(2);
    let sz = |d: usize| if d == comp { p } else { p + 1 };
    for a in 0..sz(0) {
        for b in 0..sz(1) {
            for c in 0..sz(2) {
                let grad = Vector3::new(
                    d0[a] * v1[b] * v2[c],
                    v0[a] * d1[b] * v2[c],
                    v0[a] * v1[b] * d2[c],
                );
                // reference curl of phi e_comp is grad phi x e_comp
                let rc = match comp {
                    0 => Vector3::new(0.0, grad.z, -grad.y),
                    1 => Vector3::new(-grad.z, 0.0, grad.x),
                    _ => Vector3::new(grad.y, -grad.x, 0.0),
                };
                vecs[*idx] = jac * rc * scale;
                *idx += 1;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn build_value_vectors(
    t: &[DirTable; 3],
    er: &ElementRef,
    comp: usize,
    p: usize,
    g0: usize,
    g1: usize,
    g2: usize,
    inv: &Matrix3<f64>,
    scale: f64,
    vecs: &mut [Vector3<f64>],
    idx: &mut usize,
) {
    let gs = [g0, g1, g2];
    let pick = |d: usize| -> &[f64] {
        if d == comp {
            t[d].deriv_values(er.el[d], gs[d])
        } else {
            t[d].scalar_values(er.el[d], gs[d])
        }
    };
    let (v0, v1, v2) = (pick(0), pick(1), pick(2));
    // J^{-T} e_comp is row `comp` of J^{-1}.
    let dir = Vector3::new(inv[(comp, 0)], inv[(comp, 1)], inv[(comp, 2)]);
    let sz = |d: usize| if d == comp { p } else { p + 1 };
    for a in 0..sz(0) {
        for b in 0..sz(1) {
            for c in 0..sz(2) {
                vecs[*idx] = dir * (v0[a] * v1[b] * v2[c] * scale);
                *idx += 1;
            }
        }
    }
}

/// Assemble a symmetric bilinear form with a per-patch coefficient.
/// Quadrature is tensor Gauss with `q` points per direction per element.
pub fn assemble_operator(
    space: &CurlSpace,
    kind: BilinearKind,
    coeff: &[f64],
    q: usize,
) -> Csr<f64> {
    let rule = GaussRule::legendre(q);
    let tables: Vec<[DirTable; 3]> = (0..space.n_local_patches())
        .map(|lp| {
            let d = space.dir_basis(lp);
            [d[0].tabulate(&rule), d[1].tabulate(&rule), d[2].tabulate(&rule)]
        })
        .collect();

    let elements = element_list(space, coeff);
    let dof_lists: Vec<Vec<(u32, f64)>> = elements
        .iter()
        .map(|er| element_dofs(space, &tables, er))
        .collect();
    let plain_dofs: Vec<Vec<u32>> = dof_lists
        .iter()
        .map(|l| l.iter().map(|&(g, _)| g).collect())
        .collect();
    let mut mat = Csr::<f64>::symbolic_from_elements(space.n_dofs, &plain_dofs);

    // Batched parallel local computation, serial deterministic scatter.
    const BATCH: usize = 128;
    let mut start = 0;
    while start < elements.len() {
        let end = (start + BATCH).min(elements.len());
        let locals: Vec<Vec<f64>> = (start..end)
            .into_par_iter()
            .map(|e| {
                let er = &elements[e];
                let c = coeff[space.patch_ids[er.local_patch]];
                local_matrix(space, &tables, er, kind, c, &dof_lists[e])
            })
            .collect();
        for (e, k_loc) in (start..end).zip(locals) {
            let dofs = &dof_lists[e];
            let n_loc = dofs.len();
            for i in 0..n_loc {
                let (gi, _) = dofs[i];
                for j in 0..n_loc {
                    let v = k_loc[i * n_loc + j];
                    if v != 0.0 {
                        mat.add(gi, dofs[j].0, v);
                    }
                }
            }
        }
        start = end;
    }
    mat
}

/// Right-hand side of the reaction problem: rhs[i] = sum over interface
/// quadrature of K_g . v_i dS with v_i the mapped basis fields of the
/// parameterizing (interior) side.
pub fn assemble_interface_rhs(
    space: &CurlSpace,
    squad: &SurfaceQuadrature,
    kg: &[Vector3<C64>],
) -> Vec<C64> {
    assert_eq!(squad.points.len(), kg.len());
    let mut rhs = vec![C64::new(0.0, 0.0); space.n_dofs];
    for (pt, k) in squad.points.iter().zip(kg) {
        let inv = pt.jac.try_inverse().expect("nondegenerate Jacobian");
        space.for_each_basis_at(pt.local_patch, &pt.xi, |gid, sign, val, _grad, comp| {
            let v = Vector3::new(inv[(comp, 0)], inv[(comp, 1)], inv[(comp, 2)]) * (val * sign);
            let dot = k.x * v.x + k.y * v.y + k.z * v.z;
            rhs[gid as usize] += dot * pt.ds;
        });
    }
    rhs
}

/// L2-project a tangential target field on the interface onto the trace of
/// `space`: returns (dof, coefficient) pairs for every trace-active dof.
///
/// With `use_other_side` the basis is evaluated across the interface (for
/// spaces that live on the exterior patches while the quadrature is
/// parameterized on the interior side).
pub fn project_tangential_trace(
    space: &CurlSpace,
    squad: &SurfaceQuadrature,
    use_other_side: bool,
    target: impl Fn(usize, &SurfPoint) -> Vector3<f64>,
) -> Result<Vec<(u32, f64)>> {
    // Per-point tangential basis contributions. Functions whose cross
    // product with the normal is at rounding level are the exactly-normal
    // covariant components; dropping them keeps the mass nonsingular.
    let mut per_point: Vec<Vec<(u32, Vector3<f64>)>> = Vec::with_capacity(squad.points.len());
    for pt in &squad.points {
        let (local, xi) = side_of(space, pt, use_other_side)?;
        let jac = space.domain().patches[space.patch_ids[local]].eval(&xi)?.jac;
        let inv = jac.try_inverse().expect("nondegenerate Jacobian");
        let mut locals = Vec::new();
        space.for_each_basis_at(local, &xi, |gid, sign, val, _, comp| {
            if val == 0.0 {
                return;
            }
            let v = Vector3::new(inv[(comp, 0)], inv[(comp, 1)], inv[(comp, 2)]) * (val * sign);
            let t = v.cross(&pt.n);
            if t.norm_squared() > 1e-20 * v.norm_squared() {
                locals.push((gid, t));
            }
        });
        per_point.push(locals);
    }

    let mut active: Vec<u32> = per_point
        .iter()
        .flat_map(|l| l.iter().map(|&(g, _)| g))
        .collect();
    active.sort_unstable();
    active.dedup();
    let mut index_of = std::collections::HashMap::new();
    for (i, &g) in active.iter().enumerate() {
        index_of.insert(g, i as u32);
    }

    // Sparse tangential mass and rhs via per-point outer products.
    let mut triplets: std::collections::BTreeMap<(u32, u32), f64> = std::collections::BTreeMap::new();
    let mut b = vec![0.0f64; active.len()];
    for (pt_idx, (pt, locals)) in squad.points.iter().zip(&per_point).enumerate() {
        let tgt = target(pt_idx, pt).cross(&pt.n);
        for &(gi, ti) in locals {
            let i = index_of[&gi];
            b[i as usize] += pt.ds * tgt.dot(&ti);
            for &(gj, tj) in locals {
                let j = index_of[&gj];
                if j >= i {
                    *triplets.entry((i, j)).or_insert(0.0) += pt.ds * ti.dot(&tj);
                }
            }
        }
    }

    // Symmetrize into CSR.
    let n = active.len();
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for (&(i, j), &v) in &triplets {
        rows[i as usize].push((j, v));
        if i != j {
            rows[j as usize].push((i, v));
        }
    }
    let mut row_ptr = vec![0usize; n + 1];
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for (r, mut row) in rows.into_iter().enumerate() {
        row.sort_unstable_by_key(|&(c, _)| c);
        for (c, v) in row {
            cols.push(c);
            vals.push(v);
        }
        row_ptr[r + 1] = cols.len();
    }
    let mass = Csr { n, row_ptr, cols, vals };
    let x = linear_solve_real(&mass, &b)
        .map_err(|e| Error::SolveFailed(format!("surface mass projection: {e}")))?;
    Ok(active.into_iter().zip(x).map(|(g, v)| (g, v)).collect())
}

fn side_of(space: &CurlSpace, pt: &SurfPoint, other: bool) -> Result<(usize, [f64; 3])> {
    if other {
        let local = space
            .local_patch(pt.other_patch)
            .ok_or_else(|| Error::InvalidSpace("other-side patch not in space".into()))?;
        Ok((local, pt.xi_other))
    } else {
        Ok((pt.local_patch, pt.xi))
    }
}

/// Volume L2 projection of a vector field onto the space (mass solve).
pub fn project_volume_field(
    space: &CurlSpace,
    q: usize,
    field: impl Fn(Vector3<f64>) -> Result<Vector3<f64>> + Sync,
) -> Result<Vec<C64>> {
    let ones = vec![1.0f64; space.domain().n_patches()];
    let mass = assemble_operator(space, BilinearKind::VectorMass, &ones, q);

    // Right-hand side: integral of field . v_i.
    let rule = GaussRule::legendre(q);
    let mut b = vec![0.0f64; space.n_dofs];
    for lp in 0..space.n_local_patches() {
        let pid = space.patch_ids[lp];
        let patch = &space.domain().patches[pid];
        let dirs = space.dir_basis(lp);
        let breaks: Vec<Vec<f64>> = (0..3).map(|d| dirs[d].scalar.breakpoints()).collect();
        for e0 in breaks[0].windows(2) {
            for e1 in breaks[1].windows(2) {
                for e2 in breaks[2].windows(2) {
                    for (u, wu) in rule.mapped(e0[0], e0[1]) {
                        for (v, wv) in rule.mapped(e1[0], e1[1]) {
                            for (w, ww) in rule.mapped(e2[0], e2[1]) {
                                let xi = [u, v, w];
                                let ev = patch.eval(&xi)?;
                                let det = ev.jac.determinant().abs();
                                let inv = ev.jac.try_inverse().expect("nondegenerate");
                                let f = field(ev.point)?;
                                let wgt = wu * wv * ww * det;
                                space.for_each_basis_at(lp, &xi, |gid, sign, val, _, comp| {
                                    let vb = Vector3::new(
                                        inv[(comp, 0)],
                                        inv[(comp, 1)],
                                        inv[(comp, 2)],
                                    ) * (val * sign);
                                    b[gid as usize] += wgt * f.dot(&vb);
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    let fact = Factorization::real(&mass)?;
    let x = crate::solver::linsolve::solve_checked_real(&fact, &mass, &b)?;
    Ok(x.into_iter().map(|v| C64::new(v, 0.0)).collect())
}

/// Dirichlet trace u x n of a discrete field at a surface point,
/// evaluated on the chosen side.
pub fn trace_at(
    space: &CurlSpace,
    coeffs: &[C64],
    pt: &SurfPoint,
    use_other_side: bool,
) -> Result<Vector3<C64>> {
    let (local, xi) = side_of(space, pt, use_other_side)?;
    let (u, _) = space.eval_field(local, &xi, coeffs);
    Ok(cross_cn(&u, &pt.n))
}

/// Face list helper: tangential-trace dofs of the space on a set of faces.
pub fn collect_face_dofs(space: &CurlSpace, faces: &[(usize, Face)]) -> Vec<u32> {
    let mut out = Vec::new();
    for &(pid, face) in faces {
        if let Some(local) = space.local_patch(pid) {
            out.extend(space.face_tangential_dofs(local, face));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}
