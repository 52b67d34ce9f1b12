//! Summary statistics for Monte Carlo endpoints.

use crate::error::StatsError;

/// Normal quantile used for the 95% interval.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq)]
pub struct StatSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub sd: f64,
    /// `sd / mean`; `None` when the mean is zero.
    pub cv: Option<f64>,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Population moment skewness `m3 / m2^1.5`; `None` for zero variance.
    pub skewness: Option<f64>,
    /// Non-excess kurtosis `m4 / m2²` (normal = 3); `None` for zero variance.
    pub kurtosis: Option<f64>,
}

impl StatSummary {
    pub fn ci_half_width(&self) -> f64 {
        Z95 * self.sd / (self.n as f64).sqrt()
    }

    pub fn cv(&self) -> Result<f64, StatsError> {
        self.cv.ok_or(StatsError::ZeroMean)
    }

    pub fn skewness(&self) -> Result<f64, StatsError> {
        self.skewness.ok_or(StatsError::DegenerateDistribution)
    }

    pub fn kurtosis(&self) -> Result<f64, StatsError> {
        self.kurtosis.ok_or(StatsError::DegenerateDistribution)
    }
}

/// Summarizes at least two values. Shape statistics and cv are left empty
/// where undefined; the accessor methods turn those into errors.
pub fn summarize(values: &[f64]) -> Result<StatSummary, StatsError> {
    let n = values.len();
    if n < 2 {
        return Err(StatsError::TooFewValues(n));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let sd = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let half = Z95 * sd / nf.sqrt();
    let degenerate = m2 <= f64::EPSILON * f64::EPSILON * mean * mean || m2 == 0.0;
    Ok(StatSummary {
        n,
        mean,
        sd,
        cv: (mean != 0.0).then(|| sd / mean),
        ci_lo: mean - half,
        ci_hi: mean + half,
        skewness: (!degenerate).then(|| m3 / m2.powf(1.5)),
        kurtosis: (!degenerate).then(|| m4 / (m2 * m2)),
    })
}

/// Summary rebuilt from reported moments (mean, sd, n) without shape data.
pub fn summary_from_moments(mean: f64, sd: f64, n: usize) -> StatSummary {
    let half = Z95 * sd / (n as f64).sqrt();
    StatSummary {
        n,
        mean,
        sd,
        cv: (mean != 0.0).then(|| sd / mean),
        ci_lo: mean - half,
        ci_hi: mean + half,
        skewness: None,
        kurtosis: None,
    }
}
