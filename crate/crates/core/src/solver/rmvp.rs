//! The field-split solves: image problem on the exterior region, surface
//! current density on the interface, reaction problem on the full domain,
//! and total-field superposition.

use std::sync::Arc;

use nalgebra::Vector3;

use crate::analysis::{KeContext, KernelCounter};
use crate::domain::{FrequencySettings, LocateResult, MultipatchDomain};
use crate::error::{Error, Result};
use crate::solver::assemble::{
    assemble_interface_rhs, assemble_operator, collect_face_dofs, project_tangential_trace,
    project_volume_field, BilinearKind,
};
use crate::solver::csr::Csr;
use crate::solver::linsolve::{solve_checked_complex, solve_checked_real, Factorization};
use crate::source::SourceField;
use crate::spaces::{build_gauge, CurlSpace, GammaSide, SurfaceQuadrature};
use crate::C64;

/// Which field a solution vector represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRole {
    Image,
    Reaction,
}

/// Complex coefficient vector over a curl space.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    pub space: Arc<CurlSpace>,
    pub coeffs: Vec<C64>,
    pub role: FieldRole,
}

impl FieldSolution {
    pub fn zero(space: &Arc<CurlSpace>, role: FieldRole) -> Self {
        FieldSolution {
            space: Arc::clone(space),
            coeffs: vec![C64::new(0.0, 0.0); space.n_dofs],
            role,
        }
    }

    /// Physical (A, curl A) at a reference point of a domain patch.
    pub fn eval(&self, domain_patch: usize, xi: &[f64; 3]) -> Result<(Vector3<C64>, Vector3<C64>)> {
        let local = self.space.local_patch(domain_patch).ok_or_else(|| {
            Error::InvalidSpace(format!("patch {domain_patch} not covered by this solution"))
        })?;
        Ok(self.space.eval_field(local, xi, &self.coeffs))
    }
}

/// How the source contribution to the surface current is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KgMethod {
    /// Tangential part of the kernel-evaluated flux density (default).
    DirectB,
    /// Neumann trace of the volume L2 projection of the source potential.
    ProjectedA,
}

/// Surface current density K_g at the interface quadrature points.
///
/// Stored as the tangential vectors entering the duality pairing
/// <K_g, v> = integral of K_g . v over the interface, with the normal
/// pointing from the interior into the exterior region.
#[derive(Debug, Clone)]
pub struct SurfaceCurrent {
    pub values: Vec<Vector3<C64>>,
    pub method: KgMethod,
}

impl SurfaceCurrent {
    /// Largest |K_g . n| over the quadrature points (tangentiality check).
    pub fn max_normal_component(&self, squad: &SurfaceQuadrature) -> f64 {
        self.values
            .iter()
            .zip(&squad.points)
            .map(|(k, pt)| {
                (k.x * pt.n.x + k.y * pt.n.y + k.z * pt.n.z).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Assembled system matrix in real or complex arithmetic.
pub enum SystemMatrix {
    Real(Csr<f64>),
    Complex(Csr<C64>),
}

impl SystemMatrix {
    pub fn nnz(&self) -> usize {
        match self {
            SystemMatrix::Real(m) => m.nnz(),
            SystemMatrix::Complex(m) => m.nnz(),
        }
    }
}

/// Discretization context for one mesh/degree: spaces, interface
/// quadrature and frequency settings.
pub struct RmvpContext {
    pub domain: Arc<MultipatchDomain>,
    pub space_all: Arc<CurlSpace>,
    pub space_ext: Arc<CurlSpace>,
    /// Interface quadrature parameterized on the interior side, with
    /// elements of the full space and q points per direction.
    pub squad: SurfaceQuadrature,
    pub freq: FrequencySettings,
    /// Volume quadrature points per direction (p + 1).
    pub q: usize,
}

impl RmvpContext {
    pub fn new(
        domain: &Arc<MultipatchDomain>,
        degree: usize,
        breaks: &[[Vec<f64>; 3]],
        freq: FrequencySettings,
    ) -> Result<Self> {
        let all: Vec<usize> = (0..domain.n_patches()).collect();
        let space_all = Arc::new(CurlSpace::build(domain, &all, degree, breaks)?);
        let space_ext = Arc::new(CurlSpace::build(
            domain,
            &domain.exterior_patches(),
            degree,
            breaks,
        )?);
        let q = degree + 1;
        let squad =
            SurfaceQuadrature::on_gamma(&space_all, domain.interface_faces(), GammaSide::Interior, q)?;
        Ok(RmvpContext { domain: Arc::clone(domain), space_all, space_ext, squad, freq, q })
    }

    /// Inverse permeability per patch.
    fn nu(&self) -> Vec<f64> {
        self.domain.materials.iter().map(|m| 1.0 / m.mu).collect()
    }

    /// Conductivity per patch.
    fn sigma(&self) -> Vec<f64> {
        self.domain.materials.iter().map(|m| m.sigma).collect()
    }

    /// Exterior-region inverse permeability (the interface sits in air).
    fn nu0(&self) -> f64 {
        let ext = self.domain.exterior_patches();
        1.0 / self.domain.materials[ext[0]].mu
    }
}

/// Source fields evaluated once at the interface quadrature points.
pub struct GammaKernelData {
    pub a_s: Vec<Vector3<f64>>,
    pub b_s: Vec<Vector3<f64>>,
}

/// Fused kernel evaluation on the interface; one count per point.
pub fn eval_kernel_on_gamma(
    ctx: &RmvpContext,
    source: &SourceField,
    counter: &KernelCounter,
) -> Result<GammaKernelData> {
    use rayon::prelude::*;
    let counted = source.counted(counter, KeContext::Interface);
    let results: Vec<(Vector3<f64>, Vector3<f64>)> = ctx
        .squad
        .points
        .par_iter()
        .map(|pt| counted.ab_at(pt.x))
        .collect::<Result<_>>()?;
    let (a_s, b_s) = results.into_iter().unzip();
    Ok(GammaKernelData { a_s, b_s })
}

/// Curl-curl form over a space (exposed for tests and studies).
pub fn assemble_curl_curl(space: &CurlSpace, nu: &[f64], q: usize) -> SystemMatrix {
    SystemMatrix::Real(assemble_operator(space, BilinearKind::CurlCurl, nu, q))
}

/// Conductivity mass over a space.
pub fn assemble_sigma_mass(space: &CurlSpace, sigma: &[f64], q: usize) -> SystemMatrix {
    SystemMatrix::Real(assemble_operator(space, BilinearKind::VectorMass, sigma, q))
}

/// Constraint bookkeeping: values for constrained dofs, renumbering for
/// free dofs.
struct Constraints {
    reduced_of: Vec<i64>,
    free: Vec<u32>,
    values_real: Vec<f64>,
}

impl Constraints {
    fn new(n: usize, fixed: &[(u32, f64)]) -> Self {
        let mut constrained = vec![false; n];
        let mut values = vec![0.0; n];
        for &(d, v) in fixed {
            constrained[d as usize] = true;
            values[d as usize] = v;
        }
        let mut reduced_of = vec![-1i64; n];
        let mut free = Vec::with_capacity(n);
        let mut next = 0i64;
        for d in 0..n {
            if !constrained[d] {
                reduced_of[d] = next;
                next += 1;
                free.push(d as u32);
            }
        }
        Constraints { reduced_of, free, values_real: values }
    }
}

/// Solve the magnetostatic image problem on the exterior region: zero
/// tangential trace on the outer boundary, prescribed tangential trace
/// matching minus the source potential on the interface.
pub fn solve_image(ctx: &RmvpContext, kernel: &GammaKernelData) -> Result<FieldSolution> {
    let space = &ctx.space_ext;
    // Dirichlet data on the interface by tangential L2 projection of -A_s,
    // evaluated across the interface (exterior side of the quadrature).
    let lift = project_tangential_trace(space, &ctx.squad, true, |i, _| -kernel.a_s[i])?;

    // Outer boundary: zero tangential trace.
    let outer = collect_face_dofs(space, &ctx.domain.boundary_faces);
    let gamma_active: Vec<u32> = lift.iter().map(|&(d, _)| d).collect();

    // Gauge: exclude constrained dofs; merge each constrained surface's
    // vertex set.
    let mut excluded = vec![false; space.n_dofs];
    for &(d, _) in &lift {
        excluded[d as usize] = true;
    }
    for &d in &outer {
        excluded[d as usize] = true;
    }
    let gamma_vertices = gamma_scalar_vertices(space, ctx, GammaSide::Exterior);
    let outer_vertices = boundary_scalar_vertices(space, ctx);
    let gauge = build_gauge(space, &excluded, &[gamma_vertices, outer_vertices]);

    let mut fixed: Vec<(u32, f64)> = lift;
    fixed.extend(outer.iter().map(|&d| (d, 0.0)));
    fixed.extend(gauge.tree_dofs.iter().map(|&d| (d, 0.0)));
    // Keep first occurrence when a dof appears in several lists.
    fixed.sort_by_key(|&(d, _)| d);
    fixed.dedup_by_key(|&mut (d, _)| d);
    let _ = gamma_active;

    let cons = Constraints::new(space.n_dofs, &fixed);
    let k = assemble_operator(space, BilinearKind::CurlCurl, &ctx.nu(), ctx.q);
    let (k_red, correction) = k.reduce(&cons.free, &cons.reduced_of, &cons.values_real);

    let fact = Factorization::real(&k_red)
        .map_err(|e| Error::SingularSystem(format!("image system: {e}")))?;
    let x = solve_checked_real(&fact, &k_red, &correction)?;

    let mut coeffs = vec![C64::new(0.0, 0.0); space.n_dofs];
    for (d, &v) in cons.values_real.iter().enumerate() {
        coeffs[d] = C64::new(v, 0.0);
    }
    for (i, &f) in cons.free.iter().enumerate() {
        coeffs[f as usize] = C64::new(x[i], 0.0);
    }
    Ok(FieldSolution { space: Arc::clone(space), coeffs, role: FieldRole::Image })
}

/// Surface current density K_g = nu0 (curl(A_m + A_s)) x n at the
/// interface quadrature points.
pub fn compute_kg(
    ctx: &RmvpContext,
    image: &FieldSolution,
    kernel: &GammaKernelData,
    method: KgMethod,
    source: Option<(&SourceField, &KernelCounter)>,
) -> Result<SurfaceCurrent> {
    let nu0 = ctx.nu0();
    let mut values = Vec::with_capacity(ctx.squad.points.len());

    // Source contribution.
    let source_part: Vec<Vector3<f64>> = match method {
        KgMethod::DirectB => kernel
            .b_s
            .iter()
            .zip(&ctx.squad.points)
            .map(|(b, pt)| (b * nu0).cross(&pt.n))
            .collect(),
        KgMethod::ProjectedA => {
            let (field, counter) = source.ok_or_else(|| {
                Error::InvalidInput("projected-A needs the source field".into())
            })?;
            let counted = field.counted(counter, KeContext::Volume);
            let proj = project_volume_field(&ctx.space_ext, ctx.q, |x| counted.a_at(x))?;
            ctx.squad
                .points
                .iter()
                .map(|pt| {
                    let local = ctx
                        .space_ext
                        .local_patch(pt.other_patch)
                        .expect("exterior side in ext space");
                    let (_, curl) = ctx.space_ext.eval_field(local, &pt.xi_other, &proj);
                    let c = Vector3::new(curl.x.re, curl.y.re, curl.z.re) * nu0;
                    c.cross(&pt.n)
                })
                .collect()
        }
    };

    for (i, pt) in ctx.squad.points.iter().enumerate() {
        let local = ctx
            .space_ext
            .local_patch(pt.other_patch)
            .expect("exterior side in ext space");
        let (_, curl_m) = ctx.space_ext.eval_field(local, &pt.xi_other, &image.coeffs);
        let gm = crate::spaces::cross_cn(&(curl_m * C64::new(nu0, 0.0)), &pt.n);
        let s = source_part[i];
        values.push(Vector3::new(
            gm.x + C64::new(s.x, 0.0),
            gm.y + C64::new(s.y, 0.0),
            gm.z + C64::new(s.z, 0.0),
        ));
    }
    Ok(SurfaceCurrent { values, method })
}

/// Solve the reaction problem over the full domain, driven by the surface
/// current on the interface.
pub fn solve_reaction(ctx: &RmvpContext, kg: &SurfaceCurrent) -> Result<FieldSolution> {
    let space = &ctx.space_all;
    let k = assemble_operator(space, BilinearKind::CurlCurl, &ctx.nu(), ctx.q);
    let sigma = ctx.sigma();
    let m = assemble_operator(space, BilinearKind::VectorMass, &sigma, ctx.q);
    let s_jw = C64::new(0.0, ctx.freq.time_sign * ctx.freq.omega);
    let a = Csr::combine_complex(&k, C64::new(1.0, 0.0), &m, s_jw);

    let rhs = assemble_interface_rhs(space, &ctx.squad, &kg.values);

    // Boundary and gauge constraints.
    let outer = collect_face_dofs(space, &ctx.domain.boundary_faces);
    let mut excluded = vec![false; space.n_dofs];
    for &d in &outer {
        excluded[d as usize] = true;
    }
    let mut merges = vec![boundary_scalar_vertices(space, ctx)];
    let conducting = ctx.freq.omega > 0.0 && sigma.iter().any(|&s| s > 0.0);
    if conducting {
        merges.push(conductor_scalar_vertices(space, ctx));
    }
    let gauge = build_gauge(space, &excluded, &merges);

    let mut fixed: Vec<(u32, f64)> = outer.iter().map(|&d| (d, 0.0)).collect();
    fixed.extend(gauge.tree_dofs.iter().map(|&d| (d, 0.0)));
    fixed.sort_by_key(|&(d, _)| d);
    fixed.dedup_by_key(|&mut (d, _)| d);

    let cons = Constraints::new(space.n_dofs, &fixed);
    let values_c: Vec<C64> = cons.values_real.iter().map(|&v| C64::new(v, 0.0)).collect();
    let (a_red, correction) = a.reduce(&cons.free, &cons.reduced_of, &values_c);
    let b_red: Vec<C64> = cons
        .free
        .iter()
        .enumerate()
        .map(|(i, &f)| rhs[f as usize] + correction[i])
        .collect();

    let fact = Factorization::complex(&a_red)
        .map_err(|e| Error::SingularSystem(format!("reaction system: {e}")))?;
    let x = solve_checked_complex(&fact, &a_red, &b_red)?;

    let mut coeffs = vec![C64::new(0.0, 0.0); space.n_dofs];
    for (i, &f) in cons.free.iter().enumerate() {
        coeffs[f as usize] = x[i];
    }
    Ok(FieldSolution { space: Arc::clone(space), coeffs, role: FieldRole::Reaction })
}

fn gamma_scalar_vertices(space: &CurlSpace, ctx: &RmvpContext, side: GammaSide) -> Vec<u32> {
    let mut out = Vec::new();
    for gf in ctx.domain.interface_faces() {
        let (pid, face) = match side {
            GammaSide::Interior => (gf.int_patch, gf.int_face),
            GammaSide::Exterior => (gf.ext_patch, gf.ext_face),
        };
        if let Some(local) = space.local_patch(pid) {
            out.extend(space.scalar.face_dofs(local, face));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn boundary_scalar_vertices(space: &CurlSpace, ctx: &RmvpContext) -> Vec<u32> {
    let mut out = Vec::new();
    for &(pid, face) in &ctx.domain.boundary_faces {
        if let Some(local) = space.local_patch(pid) {
            out.extend(space.scalar.face_dofs(local, face));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn conductor_scalar_vertices(space: &CurlSpace, ctx: &RmvpContext) -> Vec<u32> {
    let mut out = Vec::new();
    for pid in ctx.domain.conductor_patches() {
        if let Some(local) = space.local_patch(pid) {
            out.extend_from_slice(space.scalar.patch_dofs(local));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Total-field evaluator combining the three contributions by region.
pub struct TotalField<'a> {
    pub ctx: &'a RmvpContext,
    pub image: &'a FieldSolution,
    pub reaction: &'a FieldSolution,
    pub source: &'a SourceField,
    pub counter: Option<&'a KernelCounter>,
}

impl TotalField<'_> {
    /// (A, B) at a physical point: the reaction field alone inside the
    /// interface, all three fields outside.
    pub fn at(&self, x: Vector3<f64>) -> Result<Option<(Vector3<C64>, Vector3<C64>)>> {
        let LocateResult::Inside { patch, xi } = self.ctx.domain.locate(x)? else {
            return Ok(None);
        };
        let (mut a, mut b) = self.reaction.eval(patch, &xi)?;
        if !self.ctx.domain.labels[patch].is_interior() {
            let (am, cm) = self.image.eval(patch, &xi)?;
            a += am;
            b += cm;
            let (a_s, b_s) = match self.counter {
                Some(c) => self
                    .source
                    .counted(c, KeContext::Postprocessing)
                    .ab_at(x)?,
                None => self.source.ab_at(x)?,
            };
            for d in 0..3 {
                a[d] += C64::new(a_s[d], 0.0);
                b[d] += C64::new(b_s[d], 0.0);
            }
        }
        Ok(Some((a, b)))
    }
}
