//! Curl-conforming spline spaces on multipatch domains.
//!
//! Per patch, component k lives in the tensor space with the degree
//! reduced by one in direction k (derivative space, Curry-Schoenberg
//! scaled). Tangential face dofs are identified across conforming
//! interfaces with orientation signs; basis vectors map into physical
//! space with the covariant Piola transform.

use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};

use crate::domain::{Face, MultipatchDomain};
use crate::error::{Error, Result};
use crate::spaces::univariate::DirBasis;
use crate::spline::KnotVector;
use crate::C64;

/// Multipatch scalar spline space of degree p (the gradient-potential
/// companion of the curl space; its dofs are the vertices of the edge
/// graph used for gauging).
#[derive(Debug)]
pub struct ScalarSpace {
    pub n_dofs: usize,
    gid: Vec<Vec<u32>>,
    dims: Vec<[usize; 3]>,
}

impl ScalarSpace {
    #[inline]
    pub fn gid(&self, local_patch: usize, idx: [usize; 3]) -> u32 {
        let d = self.dims[local_patch];
        self.gid[local_patch][(idx[0] * d[1] + idx[1]) * d[2] + idx[2]]
    }

    pub fn dims(&self, local_patch: usize) -> [usize; 3] {
        self.dims[local_patch]
    }

    /// All global scalar dofs of one local patch.
    pub fn patch_dofs(&self, local_patch: usize) -> &[u32] {
        &self.gid[local_patch]
    }

    /// Scalar dofs with nonzero trace on a face.
    pub fn face_dofs(&self, local_patch: usize, face: Face) -> Vec<u32> {
        let d = self.dims[local_patch];
        let [t1, t2] = face.tangent_axes();
        let pin = face.pinned(d[face.axis]);
        let mut out = Vec::with_capacity(d[t1] * d[t2]);
        for i in 0..d[t1] {
            for j in 0..d[t2] {
                let mut idx = [0usize; 3];
                idx[face.axis] = pin;
                idx[t1] = i;
                idx[t2] = j;
                out.push(self.gid(local_patch, idx));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Discrete curl-conforming space over a subset of domain patches.
#[derive(Debug)]
pub struct CurlSpace {
    pub degree: usize,
    domain: Arc<MultipatchDomain>,
    /// Domain patch ids covered by this space, ascending.
    pub patch_ids: Vec<usize>,
    local_of: Vec<Option<usize>>,
    dirs: Vec<[DirBasis; 3]>,
    comp_dims: Vec<[[usize; 3]; 3]>,
    gid: Vec<[Vec<u32>; 3]>,
    sign: Vec<[Vec<i8>; 3]>,
    pub n_dofs: usize,
    pub scalar: ScalarSpace,
    /// Per global dof: (tail, head) scalar vertices; a discrete gradient
    /// with potential c has edge coefficient c[head] - c[tail].
    pub edge_vertices: Vec<(u32, u32)>,
}

struct SignedUnionFind {
    parent: Vec<u32>,
    sign: Vec<i8>,
}

impl SignedUnionFind {
    fn new(n: usize) -> Self {
        SignedUnionFind { parent: (0..n as u32).collect(), sign: vec![1; n] }
    }

    fn find(&mut self, x: u32) -> (u32, i8) {
        let p = self.parent[x as usize];
        if p == x {
            return (x, 1);
        }
        let (root, s) = self.find(p);
        let total = s * self.sign[x as usize];
        self.parent[x as usize] = root;
        self.sign[x as usize] = total;
        (root, total)
    }

    /// Record value_a = s_ab * value_b.
    fn union(&mut self, a: u32, b: u32, s_ab: i8) -> Result<()> {
        let (ra, sa) = self.find(a);
        let (rb, sb) = self.find(b);
        if ra == rb {
            if sa != s_ab * sb {
                return Err(Error::OrientationConflict { dof: a as usize });
            }
            return Ok(());
        }
        // value_rb = sb * sa * s_ab * value_ra  (all signs are +-1)
        self.parent[rb as usize] = ra;
        self.sign[rb as usize] = sa * s_ab * sb;
        Ok(())
    }
}

impl CurlSpace {
    /// Build the space of degree `degree` over `patch_ids` with
    /// per-domain-patch element breakpoints.
    pub fn build(
        domain: &Arc<MultipatchDomain>,
        patch_ids: &[usize],
        degree: usize,
        breaks: &[[Vec<f64>; 3]],
    ) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidSpace("degree must be at least 1".into()));
        }
        let mut patch_ids = patch_ids.to_vec();
        patch_ids.sort_unstable();
        patch_ids.dedup();
        let mut local_of = vec![None; domain.n_patches()];
        for (l, &p) in patch_ids.iter().enumerate() {
            local_of[p] = Some(l);
        }

        let mut dirs = Vec::with_capacity(patch_ids.len());
        for &p in &patch_ids {
            let mut arr = Vec::with_capacity(3);
            for d in 0..3 {
                let kv = KnotVector::from_breakpoints(degree, &breaks[p][d])?;
                arr.push(DirBasis::new(kv));
            }
            let arr: [DirBasis; 3] = arr.try_into().unwrap();
            dirs.push(arr);
        }

        // Verify interface conformity of the field knots under the
        // geometric face transforms.
        for itf in &domain.interfaces {
            let (Some(la), Some(lb)) = (local_of[itf.patch_a], local_of[itf.patch_b]) else {
                continue;
            };
            let ta = itf.face_a.tangent_axes();
            let tb = itf.face_b.tangent_axes();
            for s in 0..2 {
                let sa = if itf.transform.swap { 1 - s } else { s };
                let kva = &dirs[la][ta[sa]].scalar;
                let kvb = &dirs[lb][tb[s]].scalar;
                let ok = if itf.transform.flip[s] {
                    kv_eq(&reversed(kva), kvb)
                } else {
                    kv_eq(kva, kvb)
                };
                if !ok {
                    return Err(Error::InvalidSpace(format!(
                        "field knots not conforming across patches {} and {}",
                        itf.patch_a, itf.patch_b
                    )));
                }
            }
        }

        let scalar = build_scalar(domain, &patch_ids, &local_of, &dirs)?;
        let (comp_dims, gid, sign, n_dofs, edge_vertices) =
            build_curl_ids(domain, &patch_ids, &local_of, &dirs, &scalar)?;

        Ok(CurlSpace {
            degree,
            domain: Arc::clone(domain),
            patch_ids,
            local_of,
            dirs,
            comp_dims,
            gid,
            sign,
            n_dofs,
            scalar,
            edge_vertices,
        })
    }

    pub fn domain(&self) -> &MultipatchDomain {
        &self.domain
    }

    pub fn domain_arc(&self) -> &Arc<MultipatchDomain> {
        &self.domain
    }

    pub fn local_patch(&self, domain_patch: usize) -> Option<usize> {
        self.local_of[domain_patch]
    }

    pub fn n_local_patches(&self) -> usize {
        self.patch_ids.len()
    }

    pub fn dir_basis(&self, local_patch: usize) -> &[DirBasis; 3] {
        &self.dirs[local_patch]
    }

    pub fn comp_dims(&self, local_patch: usize, comp: usize) -> [usize; 3] {
        self.comp_dims[local_patch][comp]
    }

    #[inline]
    pub fn gid_sign(&self, local_patch: usize, comp: usize, idx: [usize; 3]) -> (u32, f64) {
        let d = self.comp_dims[local_patch][comp];
        let flat = (idx[0] * d[1] + idx[1]) * d[2] + idx[2];
        (
            self.gid[local_patch][comp][flat],
            self.sign[local_patch][comp][flat] as f64,
        )
    }

    /// Total elements across the space.
    pub fn n_elements(&self) -> usize {
        self.dirs
            .iter()
            .map(|d| d[0].n_elements() * d[1].n_elements() * d[2].n_elements())
            .sum()
    }

    /// Global ids of dofs whose tangential trace on `face` is nonzero.
    pub fn face_tangential_dofs(&self, local_patch: usize, face: Face) -> Vec<u32> {
        let mut out = Vec::new();
        let a = face.axis;
        for comp in 0..3 {
            if comp == a {
                continue;
            }
            let d = self.comp_dims[local_patch][comp];
            let pin = face.pinned(d[a]);
            let [t1, t2] = face.tangent_axes();
            for i in 0..d[t1] {
                for j in 0..d[t2] {
                    let mut idx = [0usize; 3];
                    idx[a] = pin;
                    idx[t1] = i;
                    idx[t2] = j;
                    out.push(self.gid_sign(local_patch, comp, idx).0);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Evaluate a coefficient field: physical (value, curl) at a reference
    /// point of a local patch.
    pub fn eval_field(&self, local_patch: usize, xi: &[f64; 3], coeffs: &[C64]) -> (Vector3<C64>, Vector3<C64>) {
        let (a_ref, c_ref) = self.eval_reference(local_patch, xi, coeffs);
        let ev = self.domain.patches[self.patch_ids[local_patch]]
            .eval(xi)
            .expect("reference point in range");
        physical_from_reference(&ev.jac, a_ref, c_ref)
    }

    /// Reference-frame value and curl (before the Piola transforms).
    pub fn eval_reference(
        &self,
        local_patch: usize,
        xi: &[f64; 3],
        coeffs: &[C64],
    ) -> (Vector3<C64>, Vector3<C64>) {
        let dirs = &self.dirs[local_patch];
        let mut s_first = [0usize; 3];
        let mut s_val: [Vec<f64>; 3] = Default::default();
        let mut s_der: [Vec<f64>; 3] = Default::default();
        let mut d_first = [0usize; 3];
        let mut d_val: [Vec<f64>; 3] = Default::default();
        let mut d_der: [Vec<f64>; 3] = Default::default();
        for d in 0..3 {
            let (f, v, dv) = dirs[d].eval_scalar(xi[d]);
            s_first[d] = f;
            s_val[d] = v;
            s_der[d] = dv;
            let (f, v, dv) = dirs[d].eval_deriv(xi[d]);
            d_first[d] = f;
            d_val[d] = v;
            d_der[d] = dv;
        }

        let zero = C64::new(0.0, 0.0);
        let mut a_ref = Vector3::new(zero, zero, zero);
        let mut c_ref = Vector3::new(zero, zero, zero);
        for comp in 0..3 {
            // Active ranges per direction for this component.
            let (f0, v0, g0) = if comp == 0 {
                (d_first[0], &d_val[0], &d_der[0])
            } else {
                (s_first[0], &s_val[0], &s_der[0])
            };
            let (f1, v1, g1) = if comp == 1 {
                (d_first[1], &d_val[1], &d_der[1])
            } else {
                (s_first[1], &s_val[1], &s_der[1])
            };
            let (f2, v2, g2) = if comp == 2 {
                (d_first[2], &d_val[2], &d_der[2])
            } else {
                (s_first[2], &s_val[2], &s_der[2])
            };
            for (i, (&b0, &db0)) in v0.iter().zip(g0.iter()).enumerate() {
                for (j, (&b1, &db1)) in v1.iter().zip(g1.iter()).enumerate() {
                    for (k, (&b2, &db2)) in v2.iter().zip(g2.iter()).enumerate() {
                        let idx = [f0 + i, f1 + j, f2 + k];
                        let (g, s) = self.gid_sign(local_patch, comp, idx);
                        let c = coeffs[g as usize] * s;
                        let val = b0 * b1 * b2;
                        let grad = Vector3::new(db0 * b1 * b2, b0 * db1 * b2, b0 * b1 * db2);
                        a_ref[comp] += c * val;
                        // curl(phi e_comp) = grad phi x e_comp
                        match comp {
                            0 => {
                                c_ref[1] += c * grad[2];
                                c_ref[2] -= c * grad[1];
                            }
                            1 => {
                                c_ref[0] -= c * grad[2];
                                c_ref[2] += c * grad[0];
                            }
                            _ => {
                                c_ref[0] += c * grad[1];
                                c_ref[1] -= c * grad[0];
                            }
                        }
                    }
                }
            }
        }
        (a_ref, c_ref)
    }

    /// Visit every basis function active at a reference point:
    /// (gid, sign, value, reference gradient, component).
    pub fn for_each_basis_at(
        &self,
        local_patch: usize,
        xi: &[f64; 3],
        mut f: impl FnMut(u32, f64, f64, Vector3<f64>, usize),
    ) {
        let dirs = &self.dirs[local_patch];
        let mut s_first = [0usize; 3];
        let mut s_val: [Vec<f64>; 3] = Default::default();
        let mut s_der: [Vec<f64>; 3] = Default::default();
        let mut d_first = [0usize; 3];
        let mut d_val: [Vec<f64>; 3] = Default::default();
        let mut d_der: [Vec<f64>; 3] = Default::default();
        for d in 0..3 {
            let (fi, v, dv) = dirs[d].eval_scalar(xi[d]);
            s_first[d] = fi;
            s_val[d] = v;
            s_der[d] = dv;
            let (fi, v, dv) = dirs[d].eval_deriv(xi[d]);
            d_first[d] = fi;
            d_val[d] = v;
            d_der[d] = dv;
        }
        for comp in 0..3 {
            let pick = |d: usize| -> (usize, &[f64], &[f64]) {
                if d == comp {
                    (d_first[d], &d_val[d], &d_der[d])
                } else {
                    (s_first[d], &s_val[d], &s_der[d])
                }
            };
            let (f0, v0, g0) = pick(0);
            let (f1, v1, g1) = pick(1);
            let (f2, v2, g2) = pick(2);
            for (i, (&b0, &db0)) in v0.iter().zip(g0.iter()).enumerate() {
                for (j, (&b1, &db1)) in v1.iter().zip(g1.iter()).enumerate() {
                    for (k, (&b2, &db2)) in v2.iter().zip(g2.iter()).enumerate() {
                        let idx = [f0 + i, f1 + j, f2 + k];
                        let (g, s) = self.gid_sign(local_patch, comp, idx);
                        let val = b0 * b1 * b2;
                        let grad = Vector3::new(db0 * b1 * b2, b0 * db1 * b2, b0 * b1 * db2);
                        f(g, s, val, grad, comp);
                    }
                }
            }
        }
    }

    /// Longest element diagonal over the given local patches.
    pub fn max_element_diameter(&self, local_patches: &[usize]) -> f64 {
        let mut h = 0.0f64;
        for &lp in local_patches {
            let patch = &self.domain.patches[self.patch_ids[lp]];
            let breaks: Vec<Vec<f64>> =
                (0..3).map(|d| self.dirs[lp][d].scalar.breakpoints()).collect();
            for iu in 0..breaks[0].len() - 1 {
                for iv in 0..breaks[1].len() - 1 {
                    for iw in 0..breaks[2].len() - 1 {
                        let c = [
                            [breaks[0][iu], breaks[0][iu + 1]],
                            [breaks[1][iv], breaks[1][iv + 1]],
                            [breaks[2][iw], breaks[2][iw + 1]],
                        ];
                        let mut corners = Vec::with_capacity(8);
                        for a in 0..2 {
                            for b in 0..2 {
                                for g in 0..2 {
                                    corners.push(
                                        patch
                                            .point(&[c[0][a], c[1][b], c[2][g]])
                                            .expect("corner in range"),
                                    );
                                }
                            }
                        }
                        for x in &corners {
                            for y in &corners {
                                h = h.max((x - y).norm());
                            }
                        }
                    }
                }
            }
        }
        h
    }
}

/// Map reference value and curl to physical space: covariant Piola for the
/// value, contravariant (scaled) for the curl.
pub fn physical_from_reference(
    jac: &Matrix3<f64>,
    a_ref: Vector3<C64>,
    c_ref: Vector3<C64>,
) -> (Vector3<C64>, Vector3<C64>) {
    let det = jac.determinant();
    let inv = jac.try_inverse().expect("nondegenerate geometry");
    // value: J^{-T} a_ref ; curl: J c_ref / det
    let mut a = Vector3::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    let mut c = a;
    for r in 0..3 {
        for k in 0..3 {
            a[r] += a_ref[k] * inv[(k, r)];
            c[r] += c_ref[k] * (jac[(r, k)] / det);
        }
    }
    (a, c)
}

fn kv_eq(a: &KnotVector, b: &KnotVector) -> bool {
    a.degree() == b.degree()
        && a.knots().len() == b.knots().len()
        && a.knots().iter().zip(b.knots()).all(|(x, y)| (x - y).abs() < 1e-14)
}

fn reversed(kv: &KnotVector) -> KnotVector {
    let knots: Vec<f64> = kv.knots().iter().rev().map(|&k| 1.0 - k).collect();
    KnotVector::new(kv.degree(), knots).expect("reversal preserves validity")
}

fn build_scalar(
    domain: &MultipatchDomain,
    patch_ids: &[usize],
    local_of: &[Option<usize>],
    dirs: &[[DirBasis; 3]],
) -> Result<ScalarSpace> {
    let dims: Vec<[usize; 3]> = dirs
        .iter()
        .map(|d| [d[0].n_scalar(), d[1].n_scalar(), d[2].n_scalar()])
        .collect();
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0usize, |acc, d| {
            let o = *acc;
            *acc += d[0] * d[1] * d[2];
            Some(o)
        })
        .collect();
    let total: usize = dims.iter().map(|d| d[0] * d[1] * d[2]).sum();
    let mut uf = SignedUnionFind::new(total);

    let flat = |lp: usize, idx: [usize; 3]| -> u32 {
        let d = dims[lp];
        (offsets[lp] + (idx[0] * d[1] + idx[1]) * d[2] + idx[2]) as u32
    };

    for itf in &domain.interfaces {
        let (Some(la), Some(lb)) = (local_of[itf.patch_a], local_of[itf.patch_b]) else {
            continue;
        };
        let ta = itf.face_a.tangent_axes();
        let tb = itf.face_b.tangent_axes();
        let na = [dims[la][ta[0]], dims[la][ta[1]]];
        let nb = [dims[lb][tb[0]], dims[lb][tb[1]]];
        let pin_a = itf.face_a.pinned(dims[la][itf.face_a.axis]);
        let pin_b = itf.face_b.pinned(dims[lb][itf.face_b.axis]);
        for i in 0..na[0] {
            for j in 0..na[1] {
                let [bi, bj] = itf.transform.map([i, j], nb);
                let mut ia = [0usize; 3];
                ia[itf.face_a.axis] = pin_a;
                ia[ta[0]] = i;
                ia[ta[1]] = j;
                let mut ib = [0usize; 3];
                ib[itf.face_b.axis] = pin_b;
                ib[tb[0]] = bi;
                ib[tb[1]] = bj;
                uf.union(flat(la, ia), flat(lb, ib), 1)?;
            }
        }
    }

    // Deterministic global numbering by first appearance.
    let mut root_gid = vec![u32::MAX; total];
    let mut gid = Vec::with_capacity(patch_ids.len());
    let mut next = 0u32;
    for lp in 0..patch_ids.len() {
        let d = dims[lp];
        let n = d[0] * d[1] * d[2];
        let mut ids = Vec::with_capacity(n);
        for f in 0..n {
            let (root, _) = uf.find((offsets[lp] + f) as u32);
            if root_gid[root as usize] == u32::MAX {
                root_gid[root as usize] = next;
                next += 1;
            }
            ids.push(root_gid[root as usize]);
        }
        gid.push(ids);
    }
    Ok(ScalarSpace { n_dofs: next as usize, gid, dims })
}

type CurlIds = (
    Vec<[[usize; 3]; 3]>,
    Vec<[Vec<u32>; 3]>,
    Vec<[Vec<i8>; 3]>,
    usize,
    Vec<(u32, u32)>,
);

fn build_curl_ids(
    domain: &MultipatchDomain,
    patch_ids: &[usize],
    local_of: &[Option<usize>],
    dirs: &[[DirBasis; 3]],
    scalar: &ScalarSpace,
) -> Result<CurlIds> {
    let n_local = patch_ids.len();
    let mut comp_dims = vec![[[0usize; 3]; 3]; n_local];
    for lp in 0..n_local {
        for comp in 0..3 {
            for d in 0..3 {
                comp_dims[lp][comp][d] = if d == comp {
                    dirs[lp][d].n_deriv()
                } else {
                    dirs[lp][d].n_scalar()
                };
            }
        }
    }
    // Flat offsets: per patch, per component.
    let mut offsets = vec![[0usize; 3]; n_local];
    let mut total = 0usize;
    for lp in 0..n_local {
        for comp in 0..3 {
            offsets[lp][comp] = total;
            let d = comp_dims[lp][comp];
            total += d[0] * d[1] * d[2];
        }
    }
    let flat = |lp: usize, comp: usize, idx: [usize; 3], comp_dims: &[[[usize; 3]; 3]]| -> u32 {
        let d = comp_dims[lp][comp];
        (offsets[lp][comp] + (idx[0] * d[1] + idx[1]) * d[2] + idx[2]) as u32
    };

    let mut uf = SignedUnionFind::new(total);
    for itf in &domain.interfaces {
        let (Some(la), Some(lb)) = (local_of[itf.patch_a], local_of[itf.patch_b]) else {
            continue;
        };
        let ta = itf.face_a.tangent_axes();
        let tb = itf.face_b.tangent_axes();
        for slot_a in 0..2 {
            let comp_a = ta[slot_a];
            let slot_b = if itf.transform.swap { 1 - slot_a } else { slot_a };
            let comp_b = tb[slot_b];
            let sign: i8 = if itf.transform.flip[slot_b] { -1 } else { 1 };

            let da = comp_dims[la][comp_a];
            let db = comp_dims[lb][comp_b];
            let na = [da[ta[0]], da[ta[1]]];
            let nb = [db[tb[0]], db[tb[1]]];
            let pin_a = itf.face_a.pinned(da[itf.face_a.axis]);
            let pin_b = itf.face_b.pinned(db[itf.face_b.axis]);
            for i in 0..na[0] {
                for j in 0..na[1] {
                    let [bi, bj] = itf.transform.map([i, j], nb);
                    let mut ia = [0usize; 3];
                    ia[itf.face_a.axis] = pin_a;
                    ia[ta[0]] = i;
                    ia[ta[1]] = j;
                    let mut ib = [0usize; 3];
                    ib[itf.face_b.axis] = pin_b;
                    ib[tb[0]] = bi;
                    ib[tb[1]] = bj;
                    uf.union(
                        flat(la, comp_a, ia, &comp_dims),
                        flat(lb, comp_b, ib, &comp_dims),
                        sign,
                    )?;
                }
            }
        }
    }

    let mut root_gid = vec![u32::MAX; total];
    let mut gid: Vec<[Vec<u32>; 3]> = Vec::with_capacity(n_local);
    let mut sign: Vec<[Vec<i8>; 3]> = Vec::with_capacity(n_local);
    let mut edge_vertices: Vec<(u32, u32)> = Vec::new();
    let mut next = 0u32;
    for lp in 0..n_local {
        let mut gid_p: [Vec<u32>; 3] = Default::default();
        let mut sign_p: [Vec<i8>; 3] = Default::default();
        for comp in 0..3 {
            let d = comp_dims[lp][comp];
            let n = d[0] * d[1] * d[2];
            let mut ids = Vec::with_capacity(n);
            let mut sgs = Vec::with_capacity(n);
            for f in 0..n {
                let (root, s) = uf.find((offsets[lp][comp] + f) as u32);
                if root_gid[root as usize] == u32::MAX {
                    root_gid[root as usize] = next;
                    // Edge endpoints from this occurrence, oriented by s.
                    let idx = [f / (d[1] * d[2]), (f / d[2]) % d[1], f % d[2]];
                    let mut head = idx;
                    head[comp] += 1;
                    let (vt, vh) = (scalar.gid(lp, idx), scalar.gid(lp, head));
                    edge_vertices.push(if s > 0 { (vt, vh) } else { (vh, vt) });
                    next += 1;
                }
                ids.push(root_gid[root as usize]);
                sgs.push(s);
            }
            gid_p[comp] = ids;
            sign_p[comp] = sgs;
        }
        gid.push(gid_p);
        sign.push(sign_p);
    }

    Ok((comp_dims, gid, sign, next as usize, edge_vertices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_cylinder_domain, GeometryParams, Material, PatchTag, RegionLabel};
    use crate::spline::NurbsPatch;

    fn cube_domain_two_patches() -> Arc<MultipatchDomain> {
        let kv = KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let mut make = |x0: f64| {
            let mut cps = Vec::new();
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        cps.push(Vector3::new(x0 + i as f64, j as f64, k as f64));
                    }
                }
            }
            NurbsPatch::new(vec![kv.clone(), kv.clone(), kv.clone()], cps, vec![1.0; 8]).unwrap()
        };
        let p0 = make(0.0);
        let p1 = make(1.0);
        let air = Material { mu: crate::MU_0, sigma: 0.0 };
        Arc::new(
            MultipatchDomain::from_patches(
                vec![p0, p1],
                vec![air, air],
                vec![RegionLabel::InteriorAir, RegionLabel::InteriorAir],
                vec![
                    PatchTag { layer: 0, zone: 0, quadrant: 0 },
                    PatchTag { layer: 0, zone: 1, quadrant: 0 },
                ],
            )
            .unwrap(),
        )
    }

    fn unit_breaks(n: usize, patches: usize) -> Vec<[Vec<f64>; 3]> {
        let b: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        (0..patches).map(|_| [b.clone(), b.clone(), b.clone()]).collect()
    }

    #[test]
    fn single_cube_lowest_order_has_twelve_edges() {
        let cube = NurbsPatch::unit_cube();
        let air = Material { mu: crate::MU_0, sigma: 0.0 };
        let dom = Arc::new(
            MultipatchDomain::from_patches(
                vec![cube],
                vec![air],
                vec![RegionLabel::InteriorAir],
                vec![PatchTag { layer: 0, zone: 0, quadrant: 0 }],
            )
            .unwrap(),
        );
        let space = CurlSpace::build(&dom, &[0], 1, &unit_breaks(1, 1)).unwrap();
        assert_eq!(space.n_dofs, 12);
        assert_eq!(space.scalar.n_dofs, 8);
    }

    #[test]
    fn dof_count_matches_tensor_formula_after_refinement() {
        let cube = NurbsPatch::unit_cube();
        let air = Material { mu: crate::MU_0, sigma: 0.0 };
        let dom = Arc::new(
            MultipatchDomain::from_patches(
                vec![cube],
                vec![air],
                vec![RegionLabel::InteriorAir],
                vec![PatchTag { layer: 0, zone: 0, quadrant: 0 }],
            )
            .unwrap(),
        );
        for (p, n) in [(1usize, 3usize), (2, 2), (3, 2)] {
            let space = CurlSpace::build(&dom, &[0], p, &unit_breaks(n, 1)).unwrap();
            let m = n + p;
            let expect = 3 * (m - 1) * m * m;
            assert_eq!(space.n_dofs, expect, "degree {p} with {n} elements");
        }
    }

    #[test]
    fn shared_face_dofs_counted_once() {
        let dom = cube_domain_two_patches();
        let space = CurlSpace::build(&dom, &[0, 1], 1, &unit_breaks(1, 2)).unwrap();
        // Two hexahedra sharing a face: 24 edges minus 4 shared.
        assert_eq!(space.n_dofs, 20);
        assert_eq!(space.scalar.n_dofs, 12);
        // Tangential dofs on the shared face counted once in both lists.
        let from_a = space.face_tangential_dofs(0, Face { axis: 0, upper: true });
        let from_b = space.face_tangential_dofs(1, Face { axis: 0, upper: false });
        assert_eq!(from_a, from_b);
        assert_eq!(from_a.len(), 4);
    }

    #[test]
    fn gradient_edges_reference_valid_vertices() {
        let dom = cube_domain_two_patches();
        let space = CurlSpace::build(&dom, &[0, 1], 2, &unit_breaks(2, 2)).unwrap();
        assert_eq!(space.edge_vertices.len(), space.n_dofs);
        for &(t, h) in &space.edge_vertices {
            assert!((t as usize) < space.scalar.n_dofs);
            assert!((h as usize) < space.scalar.n_dofs);
            assert_ne!(t, h);
        }
    }

    #[test]
    fn tangential_trace_continuous_across_all_interfaces() {
        // Random coefficient field on the full verification domain: the
        // tangential component of the mapped field must agree from both
        // sides of every interface, exercising flips and orientations.
        let geo = GeometryParams::verification(12e-3, 60e-3, 35e6);
        let dom = Arc::new(build_cylinder_domain(&geo).unwrap());
        let breaks = dom.field_breakpoints(&crate::domain::MeshPolicy::uniform(1));
        let all: Vec<usize> = (0..dom.n_patches()).collect();
        let space = CurlSpace::build(&dom, &all, 2, &breaks).unwrap();

        let coeffs: Vec<C64> = (0..space.n_dofs)
            .map(|i| {
                let x = (i as f64 * 0.7391 + 0.1).sin();
                C64::new(x, 0.3 * (i as f64 * 1.31).cos())
            })
            .collect();

        let mut seed = 0xabcdef12345u64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };

        for itf in &dom.interfaces {
            let la = space.local_patch(itf.patch_a).unwrap();
            let lb = space.local_patch(itf.patch_b).unwrap();
            let ta = itf.face_a.tangent_axes();
            let tb = itf.face_b.tangent_axes();
            for _ in 0..3 {
                let c = [next(), next()];
                let mut xa = [0.0; 3];
                xa[itf.face_a.axis] = if itf.face_a.upper { 1.0 } else { 0.0 };
                xa[ta[0]] = c[0];
                xa[ta[1]] = c[1];
                let cb = itf.transform.map_coords(c);
                let mut xb = [0.0; 3];
                xb[itf.face_b.axis] = if itf.face_b.upper { 1.0 } else { 0.0 };
                xb[tb[0]] = cb[0];
                xb[tb[1]] = cb[1];

                let (ua, _) = space.eval_field(la, &xa, &coeffs);
                let (ub, _) = space.eval_field(lb, &xb, &coeffs);
                // Compare tangential parts: subtract the normal component.
                let n = dom
                    .face_normal_scaled(itf.patch_a, itf.face_a, &xa)
                    .unwrap()
                    .normalize();
                let nc = C64::new(0.0, 0.0);
                let mut ta_vec = Vector3::new(nc, nc, nc);
                let mut tb_vec = ta_vec;
                let dot_a: C64 = ua.x * n.x + ua.y * n.y + ua.z * n.z;
                let dot_b: C64 = ub.x * n.x + ub.y * n.y + ub.z * n.z;
                for d in 0..3 {
                    ta_vec[d] = ua[d] - dot_a * n[d];
                    tb_vec[d] = ub[d] - dot_b * n[d];
                }
                let cnorm = |v: &Vector3<C64>| {
                    (v.x.norm_sqr() + v.y.norm_sqr() + v.z.norm_sqr()).sqrt()
                };
                let diff = cnorm(&(ta_vec - tb_vec));
                let scale = cnorm(&ta_vec).max(1e-30);
                assert!(
                    diff / scale < 1e-10,
                    "tangential mismatch {diff:e} (scale {scale:e}) at interface {itf:?}"
                );
            }
        }
    }
}
