//! Ordinal-pattern autocorrelation functions for long, dirty time series.
//!
//! The crate counts order patterns of two and three equally spaced values
//! (and general order up to 7), derives the up-down balance, persistence,
//! time irreversibility, up-down scaling, permutation entropy and the
//! distance to white noise, partitions that distance into its components,
//! and evaluates everything over sliding windows.
//!
//! Missing values are NaN. Ties and missing values are excluded from the
//! counts and tallied separately.

pub mod error;
pub mod functions;
pub mod inference;
pub mod io;
pub mod models;
pub mod patterns;
pub mod series;
pub mod window;

pub use error::{OrdinalError, Result};
pub use functions::{
    autocorr, beta_pairwise, check_identities, entropy_n, ordinal_values, partition,
    taylor_entropy_approx, EntropySummary, IdentityCheck, IdentityReport, OrdinalValues,
    PartitionComponents, LN_6,
};
pub use inference::{
    delta_sq_null_bound, estimate_c, median_test, median_test_counts, required_n, ErrorModel,
    MedianTestResult, NullBound, Sided, Sign,
};
pub use models::{
    disturb, generate, DisturbanceKind, DisturbanceSpec, GeneratorKind, GeneratorSpec, Waveform,
};
pub use patterns::{
    count_pairs, count_patterns3, count_patterns_n, to_frequencies, OrderNHistogram, PairCounts,
    PatternFrequencies, PatternHistogram,
};
pub use series::{cumulative_preprocess, BoundaryMode, MissingPolicy, TimeSeries};
pub use window::{
    profile, run_map, run_partition_map, run_summary, PartitionAverages, PartitionMaps, ProfileRow,
    Statistic, WindowMap, WindowPlan, WindowSummary,
};
