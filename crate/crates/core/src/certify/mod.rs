//! Certificates for a concatenated code: niceness of the inner code, the
//! soft-decoding condition and the smoothed min-entropy condition on the
//! outer code, and the prefix statistics of a weight distribution.

mod entropy;
mod nice;
mod pmf;
mod soft;
mod weights;

pub use entropy::{
    entropy_hypothesis, entropy_hypothesis_with, n0_scale, smooth_min_entropy,
    smooth_min_entropy_with, EntropyReport, TvConvention,
};
pub use nice::{check_nice, check_nice_with, NicenessReport};
pub use pmf::{
    d_pmf, empirical_dist, sample_d, sample_d_with, soft_bernoulli_p, Pmf, PmfSampler, PMF_SUM_TOL,
};
pub use soft::{soft_condition, soft_condition_with, soft_delta_threshold, SoftMode, SoftReport};
pub use weights::{weight_stats, WeightStats};
