pub mod error;
pub mod kernels;
pub mod linalg_geom;
pub mod par;
pub mod partition;
pub mod manifold;
pub mod reach;
pub mod smoothing;
pub mod verify;
pub mod cli;
