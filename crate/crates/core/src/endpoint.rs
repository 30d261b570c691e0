use std::fmt;

use serde::Serialize;

/// The nine endpoint estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Estimator {
    TruncatedGpd,
    TruncatedPareto,
    NonParametricGaussian,
    NonParametricOrderStatistics,
    FewLargest,
    ExtendedFewLargest,
    RobsonWhitlock,
    RobsonWhitlockCooke,
    KijkoSellevoll,
}

impl Estimator {
    pub const ALL: [Estimator; 9] = [
        Estimator::TruncatedGpd,
        Estimator::TruncatedPareto,
        Estimator::NonParametricGaussian,
        Estimator::NonParametricOrderStatistics,
        Estimator::FewLargest,
        Estimator::ExtendedFewLargest,
        Estimator::RobsonWhitlock,
        Estimator::RobsonWhitlockCooke,
        Estimator::KijkoSellevoll,
    ];

    /// Short identifier used in CSV output and on the command line.
    pub fn id(self) -> &'static str {
        match self {
            Estimator::TruncatedGpd => "trgpd",
            Estimator::TruncatedPareto => "trpareto",
            Estimator::NonParametricGaussian => "npg",
            Estimator::NonParametricOrderStatistics => "npos",
            Estimator::FewLargest => "fl",
            Estimator::ExtendedFewLargest => "efl",
            Estimator::RobsonWhitlock => "rw",
            Estimator::RobsonWhitlockCooke => "rwc",
            Estimator::KijkoSellevoll => "ks",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        let id = id.trim().to_ascii_lowercase();
        Self::ALL.into_iter().find(|e| e.id() == id)
    }

    /// Whether the estimator takes a number of top order statistics `k`.
    pub fn uses_k(self) -> bool {
        matches!(
            self,
            Estimator::TruncatedGpd
                | Estimator::TruncatedPareto
                | Estimator::FewLargest
                | Estimator::ExtendedFewLargest
        )
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// An upper confidence bound at level `alpha` (coverage `1 - alpha`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    pub alpha: f64,
    /// Possibly `+inf`.
    pub value: f64,
}

impl Bound {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Endpoint estimate for one estimator at one `k`, on the magnitude scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointResult {
    pub estimator: Estimator,
    pub k: Option<usize>,
    /// Value straight from the estimating formula, possibly `+inf`.
    pub raw: f64,
    /// `raw` clamped below at the sample maximum when clamping is enabled.
    pub estimate: f64,
    pub upper_bound: Option<Bound>,
}

impl EndpointResult {
    pub(crate) fn new(estimator: Estimator, k: Option<usize>, raw: f64, sample_max: f64, clamp: bool) -> Self {
        let estimate = if clamp && raw < sample_max { sample_max } else { raw };
        Self {
            estimator,
            k,
            raw,
            estimate,
            upper_bound: None,
        }
    }

    pub fn with_bound(mut self, bound: Bound) -> Self {
        self.upper_bound = Some(bound);
        self
    }

    /// `false` when no finite endpoint was detected.
    pub fn is_finite(&self) -> bool {
        self.estimate.is_finite()
    }
}
