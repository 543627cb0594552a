//! Outward-rounded `f64` intervals for the irrational constants.
//!
//! Every operation rounds to nearest and then widens the result by one ulp
//! on each side (two for transcendental functions, whose library
//! implementations are accurate to within one ulp but not correctly
//! rounded). The true value of an expression therefore lies inside the
//! interval computed for it.

use num::{BigRational, ToPrimitive};

use crate::markov::Rational;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |x, _| x.next_down())
}

fn up(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |x, _| x.next_up())
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// An exactly representable value.
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Encloses pi: the `f64` constant is within one ulp of it.
    pub fn pi() -> Self {
        let x = std::f64::consts::PI;
        Interval { lo: x.next_down(), hi: x.next_up() }
    }

    pub fn from_rational(r: &Rational) -> Self {
        let x = r.to_f64().expect("rational in f64 range");
        Interval { lo: x.next_down(), hi: x.next_up() }
    }

    fn widened(lo: f64, hi: f64, ulps: u32) -> Self {
        Interval { lo: down(lo, ulps), hi: up(hi, ulps) }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        self.lo + (self.hi - self.lo) / 2.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Exact rational end points.
    pub fn to_rationals(&self) -> (Rational, Rational) {
        let conv = |x: f64| BigRational::from_float(x).expect("finite interval end");
        (conv(self.lo), conv(self.hi))
    }

    pub fn add(self, o: Self) -> Self {
        Self::widened(self.lo + o.lo, self.hi + o.hi, 1)
    }

    pub fn sub(self, o: Self) -> Self {
        Self::widened(self.lo - o.hi, self.hi - o.lo, 1)
    }

    pub fn mul(self, o: Self) -> Self {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::widened(lo, hi, 1)
    }

    pub fn div(self, o: Self) -> Self {
        assert!(o.lo > 0.0 || o.hi < 0.0, "division by an interval containing 0");
        let p = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::widened(lo, hi, 1)
    }

    pub fn scale(self, k: f64) -> Self {
        self.mul(Interval::point(k))
    }

    pub fn sqrt(self) -> Self {
        assert!(self.lo >= 0.0);
        Self::widened(self.lo.sqrt(), self.hi.sqrt(), 1)
    }

    pub fn ln(self) -> Self {
        assert!(self.lo > 0.0);
        Self::widened(self.lo.ln(), self.hi.ln(), 2)
    }

    /// `ln(1 + x)`.
    pub fn ln_1p(self) -> Self {
        assert!(self.lo > -1.0);
        Self::widened(self.lo.ln_1p(), self.hi.ln_1p(), 2)
    }

    pub fn exp(self) -> Self {
        let lo = down(self.lo.exp(), 2).max(0.0);
        Interval { lo, hi: up(self.hi.exp(), 2) }
    }

    /// `exp(x) - 1`.
    pub fn exp_m1(self) -> Self {
        Self::widened(self.lo.exp_m1(), self.hi.exp_m1(), 2)
    }

    /// `self^k` for a positive base.
    pub fn pow(self, k: Interval) -> Self {
        self.ln().mul(k).exp()
    }

    pub fn powi(self, n: u32) -> Self {
        (0..n).fold(Interval::point(1.0), |acc, _| acc.mul(self))
    }

    pub fn max(self, o: Self) -> Self {
        Interval { lo: self.lo.max(o.lo), hi: self.hi.max(o.hi) }
    }
}
