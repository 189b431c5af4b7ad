//! Growth-rate fits, eccentricity cascades and the stability property of
//! section eccentricities.

use rayon::prelude::*;

use crate::geometry::{Mat2, Point2};
use crate::sections::{eccentricity, john_ellipsoid, EllipsoidFit, Normalization, SectionError, SectionSource};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("domain too small: {0}")]
    DomainTooSmall(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Section(#[from] SectionError),
}

/// Number of angular samples per circle.
pub const CIRCLE_SAMPLES: usize = 256;

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct GrowthFit {
    pub radii: Vec<f64>,
    pub circle_min: Vec<f64>,
    pub circle_max: Vec<f64>,
    pub circle_mean: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
}

impl GrowthFit {
    /// Spread of `value·R^{−s}` over the three largest circles, as max/min of the circle extremes.
    pub fn ratio_proxy(&self, slope_theory: f64) -> f64 {
        let n = self.radii.len();
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for k in n.saturating_sub(3)..n {
            let w = self.radii[k].powf(-slope_theory);
            hi = hi.max(self.circle_max[k] * w);
            lo = lo.min(self.circle_min[k] * w);
        }
        hi / lo
    }
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fit of `log ṽ` against `log R` on `n_circles` geometric circles about the origin,
/// with `ṽ(x) = v(x) − v(0)`.
pub fn growth_exponent<V>(v: &V, r_min: f64, r_max: f64, n_circles: usize) -> Result<GrowthFit, AnalysisError>
where
    V: Fn(Point2) -> f64 + Sync,
{
    growth_exponent_at(v, Point2::ORIGIN, Point2::ORIGIN, r_min, r_max, n_circles)
}

/// As [`growth_exponent`], with circles centered at `x0` and `ṽ(x) = v(x₀+x) − v(x₀) − ⟨p, x⟩`.
///
/// The smallest circle is reported but left out of the fit.
pub fn growth_exponent_at<V>(v: &V, x0: Point2, p: Point2, r_min: f64, r_max: f64, n_circles: usize) -> Result<GrowthFit, AnalysisError>
where
    V: Fn(Point2) -> f64 + Sync,
{
    if n_circles < 4 {
        return Err(AnalysisError::DomainTooSmall(format!("need at least 4 circles, got {n_circles}")));
    }
    if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
        return Err(AnalysisError::InvalidArgument(format!("radii must satisfy 0 < r_min < r_max, got [{r_min}, {r_max}]")));
    }
    let v0 = v(x0);
    let ratio = (r_max / r_min).powf(1.0 / (n_circles - 1) as f64);
    let radii: Vec<f64> = (0..n_circles)
        .map(|k| if k + 1 == n_circles { r_max } else { r_min * ratio.powi(k as i32) })
        .collect();
    let stats: Vec<(f64, f64, f64)> = radii
        .par_iter()
        .map(|&r| {
            let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
            for k in 0..CIRCLE_SAMPLES {
                let th = 2.0 * std::f64::consts::PI * k as f64 / CIRCLE_SAMPLES as f64;
                let x = Point2::from_polar(r, th);
                let val = v(x0 + x) - v0 - p.dot(x);
                lo = lo.min(val);
                hi = hi.max(val);
                sum += val;
            }
            (lo, hi, sum / CIRCLE_SAMPLES as f64)
        })
        .collect();
    if stats.iter().any(|&(lo, hi, m)| !(lo.is_finite() && hi.is_finite() && m > 0.0)) {
        return Err(AnalysisError::DomainTooSmall("function is not finite and positive on every circle".into()));
    }
    let xs: Vec<f64> = radii[1..].iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = stats[1..].iter().map(|s| s.2.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    Ok(GrowthFit {
        radii,
        circle_min: stats.iter().map(|s| s.0).collect(),
        circle_max: stats.iter().map(|s| s.1).collect(),
        circle_mean: stats.iter().map(|s| s.2).collect(),
        slope,
        intercept,
    })
}

/// `diag(t^{α/(1−2α)}, t^{1/2})`.
pub fn dt_matrix(t: f64, alpha: f64) -> Mat2 {
    [[t.powf(alpha / (1.0 - 2.0 * alpha)), 0.0], [0.0, t.sqrt()]]
}

/// Position of a point relative to `Γ = {|x₁|^{1/α−2} + x₂² < 1}` and its dilations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaRegion {
    /// In `(1−θ)Γ`.
    Inside,
    /// In `(1+θ)Γ` but not in `(1−θ)Γ`.
    Band,
    /// Outside `(1+θ)Γ`.
    Outside,
}

pub fn gamma_membership(x: Point2, alpha: f64, theta: f64) -> GammaRegion {
    let q = 1.0 / alpha - 2.0;
    let g = |y: Point2| y.x.abs().powf(q) + y.y * y.y;
    if g(x * (1.0 / (1.0 - theta))) < 1.0 {
        GammaRegion::Inside
    } else if g(x * (1.0 / (1.0 + theta))) >= 1.0 {
        GammaRegion::Outside
    } else {
        GammaRegion::Band
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CascadeLevel {
    pub t: f64,
    pub area: f64,
    pub fit: EllipsoidFit,
    pub eccentricity: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CascadeSeries {
    pub levels: Vec<CascadeLevel>,
    /// Least-squares slope of `log|A_t|` against `log t`.
    pub slope: f64,
}

impl CascadeSeries {
    pub fn eccentricities(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.eccentricity).collect()
    }
}

/// Geometric levels `t₀, τt₀, …` (`n` of them).
pub fn geometric_levels(t0: f64, ratio: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| t0 * ratio.powi(k as i32)).collect()
}

/// Sections at each level, their inscribed ellipses and eccentricities.
pub fn eccentricity_cascade(src: SectionSource<'_>, x0: Point2, p: Point2, levels: &[f64], norm: Normalization) -> Result<CascadeSeries, AnalysisError> {
    if levels.len() < 2 {
        return Err(AnalysisError::InvalidArgument("at least two levels are required".into()));
    }
    if levels.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(AnalysisError::InvalidArgument("levels must be increasing".into()));
    }
    let out: Result<Vec<CascadeLevel>, SectionError> = levels
        .par_iter()
        .map(|&t| {
            let s = src.section(x0, p, t)?;
            let fit = john_ellipsoid(&s.polygon, norm)?;
            Ok(CascadeLevel { t, area: s.area(), eccentricity: eccentricity(&fit), fit })
        })
        .collect();
    let levels = out?;
    let xs: Vec<f64> = levels.iter().map(|l| l.t.ln()).collect();
    let ys: Vec<f64> = levels.iter().map(|l| l.eccentricity.ln()).collect();
    let (slope, _) = least_squares(&xs, &ys);
    Ok(CascadeSeries { levels, slope })
}

fn first_bounded(series: &CascadeSeries, m: f64) -> Option<usize> {
    series.levels.iter().position(|l| l.eccentricity <= m)
}

/// True iff from the first level with `|A| ≤ M` on, every level has `|A| ≤ C₁·M`.
///
/// A series that never drops to `M` is vacuously stable.
pub fn stability_check(series: &CascadeSeries, m: f64, c1: f64) -> bool {
    match first_bounded(series, m) {
        None => true,
        Some(k) => series.levels[k..].iter().all(|l| l.eccentricity <= c1 * m),
    }
}

/// Smallest `C₁` for which [`stability_check`] holds; `None` if no level has `|A| ≤ M`.
pub fn minimal_c1(series: &CascadeSeries, m: f64) -> Option<f64> {
    first_bounded(series, m).map(|k| series.levels[k..].iter().map(|l| l.eccentricity / m).fold(0.0, f64::max))
}

/// One row of the `levels` array in an analysis report.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct LevelRecord {
    pub t: f64,
    pub area: f64,
    pub eccentricity: f64,
    pub a: Mat2,
}

/// Machine-readable summary of an analysis experiment.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct AnalysisReport {
    pub alpha: f64,
    pub slope: f64,
    pub slope_theory: f64,
    pub ratio_proxy: Option<f64>,
    pub levels: Vec<LevelRecord>,
}

impl AnalysisReport {
    pub fn from_growth(alpha: f64, fit: &GrowthFit, slope_theory: f64) -> Self {
        AnalysisReport { alpha, slope: fit.slope, slope_theory, ratio_proxy: Some(fit.ratio_proxy(slope_theory)), levels: Vec::new() }
    }

    pub fn from_cascade(alpha: f64, series: &CascadeSeries, slope_theory: f64) -> Self {
        let levels = series
            .levels
            .iter()
            .map(|l| LevelRecord { t: l.t, area: l.area, eccentricity: l.eccentricity, a: l.fit.a })
            .collect();
        AnalysisReport { alpha, slope: series.slope, slope_theory, ratio_proxy: None, levels }
    }
}
