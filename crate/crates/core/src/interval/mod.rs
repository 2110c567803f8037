//! Interval arithmetic and the certificate for the per-edge soundness inequality.

pub mod arith;
pub mod bvn;
pub mod certificate;
pub mod soundness;
pub mod special;
pub mod taylor;

pub use arith::{Box2, Interval, PI_I, ROUNDING_MODE};
pub use bvn::{bvn_lower, bvn_point, bvn_upper, i_bvn, BVN_TOL};
pub use special::{i_pdf, i_phi, i_phi_inv, i_phi_inv_ext, phi_point, quantile_lower, quantile_upper};
pub use soundness::{
    hessian_pd_check, i_derivatives, i_pq, i_rho, i_slack, soundness_derivatives, DerivativeInput, IntervalThreshold,
    Scalar, SlackContext, SoundnessDerivatives,
};
pub use certificate::{verify_certificate, CertificateConfig, CertificateReport};
