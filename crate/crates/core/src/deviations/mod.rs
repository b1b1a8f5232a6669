//! Deviation estimates: the log-integral inequality for a complex
//! Gaussian, pointwise concentration of `log|psi|`, tail bounds for
//! smoothed zero counts, hole probabilities, and the log-concave
//! polynomial variant.

mod bump;
mod lemma;
mod polylemma;
mod tail;

pub use bump::{build_bump, TestFunction};
pub use lemma::{
    lemma_check, lemma_constant, mean_log_modulus, standard_event_integral, sublevel_log_integral, LemmaEvent,
    LemmaReport, EULER_GAMMA, LITERAL_CONSTANT,
};
pub use polylemma::{polynomial_lemma_check, PolyEvent, PolyLemmaReport, RealPolynomial};
pub use tail::{
    dimensionless_disk_bound, disk_bound_constant, hole_probability, offord_bound, offord_tail, one_sided_bound,
    optimized_hole_bound, pointwise_concentration, pointwise_exact_prob, DiskBound, HoleEstimate, HoleReport, McSpec,
    PointwiseMonteCarlo, PointwiseReport, TailEstimate, TailReport,
};
