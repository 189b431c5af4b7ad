//! Reference solutions: rotationally symmetric translators, their duals, and
//! the separable solution of the degenerate model.
//!
//! For a radial function with slope `s(r)`, `det D²v = s s' / r`. With
//! `k = 1/(2α) − 1` the two radial equations integrate once in closed form:
//!
//! * primal, `det D²u = (1+|Du|²)^{2−1/(2α)}`: `(1 + p²)^k = 1 + k r²`;
//! * dual, `det D²v = (η+|x|²)^{1/(2α)−2}`: `q² = ((η + r²)^k − η^k) / k`.
//!
//! Values are integrals of the slopes, accumulated on a geometric table.

use crate::geometry::Point2;
use crate::grid::{Domain2D, GridError, GridFunction};
use crate::quadrature;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("alpha = {0} is outside (0, 1/4)")]
    AlphaOutOfRange(f64),
    #[error("eta = {0} is outside [0, 1]")]
    EtaOutOfRange(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn check_alpha(alpha: f64) -> Result<f64, OracleError> {
    if crate::alpha_in_range(alpha) {
        Ok(0.5 / alpha - 1.0)
    } else {
        Err(OracleError::AlphaOutOfRange(alpha))
    }
}

fn check_r(r: f64) -> Result<(), OracleError> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(OracleError::InvalidArgument(format!("radius must be finite and nonnegative, got {r}")))
    }
}

fn primal_slope_k(k: f64, r: f64) -> f64 {
    ((k * r * r).ln_1p() / k).exp_m1().sqrt()
}

fn dual_slope_k(k: f64, eta: f64, r: f64) -> f64 {
    let r2 = r * r;
    if eta == 0.0 {
        (r2.powf(k) / k).sqrt()
    } else {
        (eta.powf(k) * (k * (r2 / eta).ln_1p()).exp_m1() / k).sqrt()
    }
}

/// Slope of the radial translator, `sqrt((1 + k r²)^{1/k} − 1)`.
pub fn radial_primal_slope(alpha: f64, r: f64) -> Result<f64, OracleError> {
    let k = check_alpha(alpha)?;
    check_r(r)?;
    Ok(primal_slope_k(k, r))
}

/// Slope of the radial dual solution with `η = 1`.
pub fn radial_dual_slope(alpha: f64, r: f64) -> Result<f64, OracleError> {
    let k = check_alpha(alpha)?;
    check_r(r)?;
    Ok(dual_slope_k(k, 1.0, r))
}

pub fn radial_primal_value(alpha: f64, r: f64) -> Result<f64, OracleError> {
    check_r(r)?;
    Ok(RadialProfile::primal(alpha)?.value(r))
}

pub fn radial_dual_value(alpha: f64, r: f64) -> Result<f64, OracleError> {
    check_r(r)?;
    Ok(RadialProfile::dual(alpha, 1.0)?.value(r))
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub enum ProfileKind {
    PrimalTranslator,
    DualTranslator { eta: f64 },
}

/// A radial convex profile with a cached table of `(r, slope, value)`.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    alpha: f64,
    k: f64,
    kind: ProfileKind,
    table: Vec<(f64, f64, f64)>,
}

const TABLE_R0: f64 = 1.0 / 1024.0;
const TABLE_RATIO: f64 = 1.189_207_115_002_721; // 2^{1/4}
const TABLE_RMAX: f64 = 65536.0;
const ABS_TOL: f64 = 1e-10;

impl RadialProfile {
    pub fn primal(alpha: f64) -> Result<Self, OracleError> {
        Self::build(alpha, ProfileKind::PrimalTranslator)
    }

    /// Dual profile for the right-hand side `(η + r²)^{1/(2α)−2}`.
    pub fn dual(alpha: f64, eta: f64) -> Result<Self, OracleError> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(OracleError::EtaOutOfRange(eta));
        }
        Self::build(alpha, ProfileKind::DualTranslator { eta })
    }

    fn build(alpha: f64, kind: ProfileKind) -> Result<Self, OracleError> {
        let k = check_alpha(alpha)?;
        let mut prof = RadialProfile { alpha, k, kind, table: vec![(0.0, 0.0, 0.0)] };
        let mut r = TABLE_R0;
        let mut acc = 0.0;
        let mut prev = 0.0;
        while r <= TABLE_RMAX * (1.0 + 1e-12) {
            acc += prof.integrate_slope(prev, r, acc);
            prof.table.push((r, prof.slope(r), acc));
            prev = r;
            r *= TABLE_RATIO;
        }
        Ok(prof)
    }

    fn integrate_slope(&self, a: f64, b: f64, scale: f64) -> f64 {
        let tol = ABS_TOL.max(1e-15 * scale);
        quadrature::integrate(&|s| self.slope(s), a, b, tol)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn slope(&self, r: f64) -> f64 {
        let r = r.abs();
        match self.kind {
            ProfileKind::PrimalTranslator => primal_slope_k(self.k, r),
            ProfileKind::DualTranslator { eta } => dual_slope_k(self.k, eta, r),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        if r == 0.0 {
            return 0.0;
        }
        if let ProfileKind::DualTranslator { eta } = self.kind {
            if eta == 0.0 {
                return r.powf(self.k + 1.0) / ((self.k + 1.0) * self.k.sqrt());
            }
        }
        let idx = self.table.partition_point(|e| e.0 <= r) - 1;
        let (r0, _, v0) = self.table[idx];
        if r0 == r {
            return v0;
        }
        v0 + self.integrate_slope(r0, r, v0)
    }

    /// Radial right-hand side of the profile's own equation, `s s' / r`.
    pub fn rhs(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::PrimalTranslator => {
                let p = self.slope(r);
                (1.0 + p * p).powf(1.0 - self.k)
            }
            ProfileKind::DualTranslator { eta } => (eta + r * r).powf(self.k - 1.0),
        }
    }

    /// Exponent of the power growth of the value at infinity.
    pub fn growth_exponent(&self) -> f64 {
        match self.kind {
            ProfileKind::PrimalTranslator => 1.0 / (1.0 - 2.0 * self.alpha),
            ProfileKind::DualTranslator { .. } => 0.5 / self.alpha,
        }
    }

    pub fn value_at(&self, x: Point2) -> f64 {
        self.value(x.norm())
    }

    pub fn gradient_at(&self, x: Point2) -> Point2 {
        let r = x.norm();
        if r == 0.0 {
            return Point2::ORIGIN;
        }
        x * (self.slope(r) / r)
    }

    /// The profile sampled on the lattice of a domain.
    pub fn sample(&self, domain: &Domain2D, h: f64) -> Result<GridFunction, GridError> {
        crate::grid::sample(|p| self.value_at(p), domain, h)
    }

    /// CSV rows `r,slope,value`.
    pub fn to_csv(&self, radii: &[f64]) -> String {
        let mut s = String::from("r,slope,value\n");
        for &r in radii {
            s.push_str(&format!("{},{},{}\n", r, self.slope(r), self.value(r)));
        }
        s
    }
}

/// A profile row `(r, slope, value)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileRow {
    pub r: f64,
    pub slope: f64,
    pub value: f64,
}

/// Reads the output of [`RadialProfile::to_csv`].
pub fn profile_from_csv(text: &str) -> Result<Vec<ProfileRow>, OracleError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("r,slope,value") {
        return Err(OracleError::InvalidArgument("missing header r,slope,value".into()));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            let f: Vec<f64> = l
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| OracleError::InvalidArgument(format!("line {}: bad number", k + 2)))?;
            match f[..] {
                [r, slope, value] => Ok(ProfileRow { r, slope, value }),
                _ => Err(OracleError::InvalidArgument(format!("line {}: expected 3 fields", k + 2))),
            }
        })
        .collect()
}

/// `a|x₁|^p + b x₂²` with `p = 1/α − 2` and `2abp(p−1) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SeparableSolution {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

impl SeparableSolution {
    pub fn new(alpha: f64, a: f64) -> Result<Self, OracleError> {
        check_alpha(alpha)?;
        if !(a > 0.0 && a.is_finite()) {
            return Err(OracleError::InvalidArgument(format!("coefficient a must be positive, got {a}")));
        }
        let p = 1.0 / alpha - 2.0;
        Ok(SeparableSolution { alpha, a, b: 1.0 / (2.0 * a * p * (p - 1.0)), p })
    }

    pub fn value(&self, x: Point2) -> f64 {
        self.a * x.x.abs().powf(self.p) + self.b * x.y * x.y
    }

    pub fn gradient(&self, x: Point2) -> Point2 {
        Point2::new(self.a * self.p * x.x.abs().powf(self.p - 1.0) * x.x.signum(), 2.0 * self.b * x.y)
    }

    /// Semi-axes of the sub-level set `{v ≤ t}`.
    pub fn semi_axes(&self, t: f64) -> (f64, f64) {
        ((t / self.a).powf(1.0 / self.p), (t / self.b).sqrt())
    }
}

/// `separable_value(α, a, x)`.
pub fn separable_value(alpha: f64, a: f64, x: Point2) -> Result<f64, OracleError> {
    Ok(SeparableSolution::new(alpha, a)?.value(x))
}
