//! Extended-precision reference arithmetic for the oracle tests.

#![allow(dead_code)]

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use std::cell::RefCell;

pub const P: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

pub struct Big {
    cc: RefCell<Consts>,
}

impl Big {
    pub fn new() -> Self {
        Self {
            cc: RefCell::new(Consts::new().expect("constants cache")),
        }
    }

    pub fn f(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, P)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, P, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, P, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, P, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, P, RM)
    }

    pub fn ln(&self, a: &BigFloat) -> BigFloat {
        a.ln(P, RM, &mut self.cc.borrow_mut())
    }

    pub fn exp(&self, a: &BigFloat) -> BigFloat {
        a.exp(P, RM, &mut self.cc.borrow_mut())
    }

    pub fn pi(&self) -> BigFloat {
        self.cc.borrow_mut().pi(P, RM)
    }

    pub fn to_f64(&self, a: &BigFloat) -> f64 {
        let s = a.format(Radix::Dec, RM, &mut self.cc.borrow_mut()).expect("format");
        s.parse().unwrap_or_else(|_| panic!("unparseable {s}"))
    }

    /// `|approx - exact| / |exact|`, computed before rounding `exact`.
    pub fn rel_err(&self, approx: f64, exact: &BigFloat) -> f64 {
        let diff = self.sub(&self.f(approx), exact);
        let r = self.div(&diff, exact).abs();
        self.to_f64(&r)
    }

    /// `ln(1 + x)` for `x` in (-1, inf).
    pub fn ln_1p(&self, x: &BigFloat) -> BigFloat {
        let one = self.f(1.0);
        let s = self.add(&one, x);
        self.ln(&s)
    }

    /// Squared Euclidean distance, exact up to `P` bits.
    pub fn sq_dist(&self, a: &[f64], b: &[f64]) -> BigFloat {
        let mut acc = self.f(0.0);
        for (x, y) in a.iter().zip(b) {
            let d = self.sub(&self.f(*x), &self.f(*y));
            acc = self.add(&acc, &self.mul(&d, &d));
        }
        acc
    }
}

#[test]
fn big_round_trip() {
    let b = Big::new();
    for x in [1.0, -2.5, 1e-300, 123456.789, 1.380_998_758_458_855_2] {
        assert_eq!(b.to_f64(&b.f(x)), x);
    }
    let pi = b.pi();
    assert_eq!(b.to_f64(&pi), std::f64::consts::PI);
}
