//! ℓ0-regularized sparse Bregman decoding of probability vectors.
//!
//! Given a distribution `p` over `V` outcomes, a Bregman generator `φ` and a
//! per-entry price `λ`, decoding finds the sparse distribution `p̂` that
//! minimizes `D_φ(p̂, p) + λ‖p̂‖₀` (primal) or `D_φ(p, p̂) + λ‖p̂‖₀` (dual).
//! The optimal support is always a top-`k` set and the cost is discretely
//! convex in `k`, so decoding is a logarithmic search over `k` followed by a
//! renormalization of the kept entries.
//!
//! With the Shannon generator the renormalization is plain sum division, so
//! top-`k` sampling is the `α = 1` member of the family.
//!
//! ```
//! use sparse_bregman::{decode, DecodeConfig, Generator, ProbVector};
//!
//! let p = ProbVector::new(vec![0.6, 0.3, 0.1]).unwrap();
//! let cfg = DecodeConfig::primal(Generator::alpha(2.0).unwrap(), 0.05);
//! let r = decode(&p, &cfg).unwrap();
//! assert_eq!(r.k_star, 2);
//! assert!((r.sparse_probs[0] - 0.65).abs() < 1e-12);
//! ```

pub mod cli_io;
pub mod decoder;
pub mod error;
pub mod generators;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod renorm_dual;
pub mod renorm_primal;
pub mod rootfind;
pub mod simplex;

pub use decoder::{
    cost_at_k, cost_curve, decode, decode_batch, find_k_star, logits_processor, logits_to_probs, renormalize,
    sample, sample_n, search_k_star, select_top_k, top_k_renormalize, CostCurve, CostModel, DecodeConfig,
    DecodeResult, KSearch, Mode, Search, TopK,
};
pub use error::{Error, Result};
pub use generators::{Generator, GeneratorKind, Slope};
pub use renorm_dual::{dual_inner_solve, renorm_dual, DualInnerProblem};
pub use renorm_primal::{
    renorm_alpha1, renorm_alpha15, renorm_alpha2, renorm_minus_inf, renorm_primal, renorm_primal_generic,
    renorm_waterfill,
};
pub use rootfind::{bisect_monotone, Bracket, RootMethod, Tolerances};
pub use simplex::{ProbVector, RenormResult, SubProbVector};
