//! Assembly of the bilinear forms, sparse direct solves, and the
//! image/reaction field split.

pub mod assemble;
mod csr;
mod linsolve;
mod rmvp;

pub use assemble::{
    assemble_interface_rhs, assemble_operator, collect_face_dofs, project_tangential_trace,
    project_volume_field, trace_at, BilinearKind,
};
pub use csr::{Csr, Scalar};
pub use linsolve::{
    linear_solve_complex, linear_solve_real, solve_checked_complex, solve_checked_real,
    Factorization, SOLVE_TOL,
};
pub use rmvp::{
    assemble_curl_curl, assemble_sigma_mass, compute_kg, eval_kernel_on_gamma, solve_image,
    solve_reaction, FieldRole, FieldSolution, GammaKernelData, KgMethod, RmvpContext,
    SurfaceCurrent, SystemMatrix, TotalField,
};
