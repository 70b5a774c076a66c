//! Small numerical kernels shared by the physics modules.

pub mod convergence;
pub mod dd;
pub mod linalg;
pub mod quad;
pub mod roots;
pub mod stencil;
