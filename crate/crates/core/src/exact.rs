//! Floating-point expansion arithmetic for exact sums of products.
//!
//! An [`Expansion`] represents a real number as an unevaluated sum of
//! nonoverlapping `f64` components ordered by increasing magnitude, so sums
//! and float-scaled products are exact. Only the operations needed by the
//! discrete conjugate are provided: exact sign, exact comparison and
//! rounding toward +∞.

use std::cmp::Ordering;

#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bv = s - a;
    let av = s - bv;
    (s, (a - av) + (b - bv))
}

#[inline]
pub fn two_product(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Expansion {
    comps: Vec<f64>,
}

impl Expansion {
    pub fn zero() -> Self {
        Expansion { comps: Vec::new() }
    }

    pub fn from_f64(a: f64) -> Self {
        let mut e = Expansion::zero();
        e.add_f64(a);
        e
    }

    /// Exact `a * b`.
    pub fn product(a: f64, b: f64) -> Self {
        let (p, err) = two_product(a, b);
        let mut e = Expansion::zero();
        e.add_f64(err);
        e.add_f64(p);
        e
    }

    /// Adds a float exactly (Shewchuk's grow-expansion with zero elimination).
    pub fn add_f64(&mut self, b: f64) {
        let mut q = b;
        let mut out = Vec::with_capacity(self.comps.len() + 1);
        for &c in &self.comps {
            let (s, e) = two_sum(q, c);
            if e != 0.0 {
                out.push(e);
            }
            q = s;
        }
        if q != 0.0 || out.is_empty() {
            out.push(q);
        }
        out.retain(|&c| c != 0.0);
        self.comps = out;
    }

    pub fn add_product(&mut self, a: f64, b: f64) {
        let (p, err) = two_product(a, b);
        self.add_f64(err);
        self.add_f64(p);
    }

    pub fn add(&mut self, other: &Expansion) {
        for &c in &other.comps {
            self.add_f64(c);
        }
    }

    pub fn sub(&mut self, other: &Expansion) {
        for &c in &other.comps {
            self.add_f64(-c);
        }
    }

    pub fn negate(&mut self) {
        for c in &mut self.comps {
            *c = -*c;
        }
    }

    /// Sign of the represented value: the sign of the largest component.
    pub fn signum(&self) -> Ordering {
        match self.comps.last() {
            None => Ordering::Equal,
            Some(&c) if c > 0.0 => Ordering::Greater,
            Some(&c) if c < 0.0 => Ordering::Less,
            Some(_) => Ordering::Equal,
        }
    }

    /// Nearby float, within a couple of ulps of the exact value.
    pub fn approx(&self) -> f64 {
        self.comps.iter().sum()
    }

    /// The smallest float not below the represented value.
    pub fn round_up(&self) -> f64 {
        let mut a = self.approx();
        if !a.is_finite() {
            return a;
        }
        loop {
            let mut d = self.clone();
            d.add_f64(-a);
            match d.signum() {
                Ordering::Greater => a = a.next_up(),
                _ => {
                    let b = a.next_down();
                    let mut d2 = self.clone();
                    d2.add_f64(-b);
                    if d2.signum() != Ordering::Greater {
                        a = b;
                    } else {
                        return a;
                    }
                }
            }
        }
    }

    pub fn cmp_exact(&self, other: &Expansion) -> Ordering {
        let mut d = self.clone();
        d.sub(other);
        d.signum()
    }
}

/// Exact value of `y·x − u` for planar `x`, `y`.
pub fn affine_gap(y: [f64; 2], x: [f64; 2], u: f64) -> Expansion {
    let mut e = Expansion::product(y[0], x[0]);
    e.add_product(y[1], x[1]);
    e.add_f64(-u);
    e
}

/// Exact comparison of `y·a − ua` against `y·b − ub`.
///
/// A floating-point filter settles the common case; the expansion path is
/// taken only when the two values are within rounding distance.
pub fn cmp_affine_gap(y: [f64; 2], a: [f64; 2], ua: f64, b: [f64; 2], ub: f64) -> Ordering {
    let t = [y[0] * a[0], y[1] * a[1], y[0] * b[0], y[1] * b[1]];
    let approx = (t[0] + t[1] - ua) - (t[2] + t[3] - ub);
    let mag = t.iter().map(|v| v.abs()).sum::<f64>() + ua.abs() + ub.abs();
    let bound = 8.0 * f64::EPSILON * mag;
    if approx > bound {
        return Ordering::Greater;
    }
    if approx < -bound {
        return Ordering::Less;
    }
    let mut d = affine_gap(y, a, ua);
    d.sub(&affine_gap(y, b, ub));
    d.signum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_cancel_exactly() {
        let mut e = Expansion::from_f64(1e20);
        e.add_f64(1.0);
        e.add_f64(-1e20);
        assert_eq!(e.approx(), 1.0);
        e.add_f64(-1.0);
        assert_eq!(e.signum(), Ordering::Equal);
    }

    #[test]
    fn product_residual_is_captured() {
        let a = 1.0 + f64::EPSILON;
        let e = Expansion::product(a, a);
        let mut d = e.clone();
        d.add_f64(-(a * a));
        // (1+ε)² = 1 + 2ε + ε², the ε² term is lost by plain multiplication.
        assert_eq!(d.approx(), f64::EPSILON * f64::EPSILON);
    }

    #[test]
    fn round_up_is_directed() {
        let mut e = Expansion::from_f64(1.0);
        e.add_f64(1e-30);
        assert_eq!(e.round_up(), 1.0f64.next_up());
        let mut e = Expansion::from_f64(1.0);
        e.add_f64(-1e-30);
        assert_eq!(e.round_up(), 1.0);
        assert_eq!(Expansion::from_f64(-3.5).round_up(), -3.5);
        assert_eq!(Expansion::zero().round_up(), 0.0);
    }

    #[test]
    fn filter_agrees_with_exact_path_on_near_ties() {
        let y = [0.1, 0.7];
        let a = [0.3, 0.2];
        let b = [0.2, 0.2];
        let ua = 0.0;
        let ub = y[0] * a[0] - y[0] * b[0];
        let fast = cmp_affine_gap(y, a, ua, b, ub);
        let mut d = affine_gap(y, a, ua);
        d.sub(&affine_gap(y, b, ub));
        assert_eq!(fast, d.signum());
    }
}
