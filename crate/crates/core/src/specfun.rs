//! Modified Bessel functions of the first and second kind, orders 0 and 1,
//! for real positive arguments.
//!
//! `I` uses the power series up to [`I_CROSSOVER`] and the Hankel asymptotic
//! expansion beyond. `K` uses the logarithmic series up to [`K_CROSSOVER`]
//! and Steed's continued fraction beyond, which stays accurate where the
//! divergent asymptotic series of `K` cannot reach 1e-10 (near x = 2 its
//! smallest term is of order e^{-4}).

use crate::error::{Error, Result};

pub const I_CROSSOVER: f64 = 15.0;
pub const K_CROSSOVER: f64 = 2.0;
/// Largest argument accepted by [`bessel_i`].
pub const I_MAX_ARG: f64 = 700.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Zero,
    One,
}

impl Order {
    pub fn from_int(n: u32) -> Result<Self> {
        match n {
            0 => Ok(Order::Zero),
            1 => Ok(Order::One),
            _ => Err(Error::InvalidParameters(format!("Bessel order {n} not supported"))),
        }
    }

    fn nu(self) -> f64 {
        match self {
            Order::Zero => 0.0,
            Order::One => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Series,
    Asymptotic,
    ContinuedFraction,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Asymptotic => "asymptotic",
            Method::ContinuedFraction => "continued-fraction",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselValue {
    pub order: Order,
    pub x: f64,
    pub value: f64,
    pub method: Method,
}

/// `I_0(x)` or `I_1(x)` with a method tag.
pub fn bessel_i_tagged(order: Order, x: f64) -> Result<BesselValue> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameters(format!("Bessel I needs x >= 0, got {x}")));
    }
    if x > I_MAX_ARG {
        return Err(Error::OverflowRange(x));
    }
    let (value, method) = if x <= I_CROSSOVER {
        (i_series(order, x), Method::Series)
    } else {
        (i_asymptotic(order, x), Method::Asymptotic)
    };
    Ok(BesselValue { order, x, value, method })
}

pub fn bessel_i(order: Order, x: f64) -> Result<f64> {
    bessel_i_tagged(order, x).map(|v| v.value)
}

/// `K_0(x)` or `K_1(x)` with a method tag.
pub fn bessel_k_tagged(order: Order, x: f64) -> Result<BesselValue> {
    if !(x > 0.0) {
        return Err(Error::InvalidParameters(format!("Bessel K needs x > 0, got {x}")));
    }
    let (value, method) = if x <= K_CROSSOVER {
        (k_series(order, x), Method::Series)
    } else {
        let (k0, k1) = k_steed(x);
        let v = match order {
            Order::Zero => k0,
            Order::One => k1,
        };
        (v, Method::ContinuedFraction)
    };
    Ok(BesselValue { order, x, value, method })
}

pub fn bessel_k(order: Order, x: f64) -> Result<f64> {
    bessel_k_tagged(order, x).map(|v| v.value)
}

/// Convenience wrappers for internal callers that have already validated `x`.
pub(crate) fn i0(x: f64) -> f64 {
    bessel_i(Order::Zero, x).expect("I0 argument validated by caller")
}
#[cfg(test)]
pub(crate) fn i1(x: f64) -> f64 {
    bessel_i(Order::One, x).expect("I1 argument validated by caller")
}
pub(crate) fn k0(x: f64) -> f64 {
    bessel_k(Order::Zero, x).expect("K0 argument validated by caller")
}
pub(crate) fn k1(x: f64) -> f64 {
    bessel_k(Order::One, x).expect("K1 argument validated by caller")
}

/// `I_1(x) / I_0(x)`, evaluated without overflow for any `x >= 0`.
pub fn ratio_i1_i0(x: f64) -> f64 {
    if x <= I_CROSSOVER {
        i_series(Order::One, x) / i_series(Order::Zero, x)
    } else {
        // the exponential prefactors cancel
        i_asymptotic_sum(Order::One, x) / i_asymptotic_sum(Order::Zero, x)
    }
}

/// `K_1(x) / K_0(x)` for `x > 0`.
pub fn ratio_k1_k0(x: f64) -> f64 {
    if x <= K_CROSSOVER {
        k_series(Order::One, x) / k_series(Order::Zero, x)
    } else {
        let (k0, k1) = k_steed(x);
        k1 / k0
    }
}

fn i_series(order: Order, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let (mut term, nu) = match order {
        Order::Zero => (1.0, 0.0),
        Order::One => (0.5 * x, 1.0),
    };
    let mut sum = term;
    for k in 1..500 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Bracketed sum of the Hankel expansion: `I_nu(x) ~ e^x / sqrt(2 pi x) * S`.
fn i_asymptotic_sum(order: Order, x: f64) -> f64 {
    let mu = 4.0 * order.nu() * order.nu();
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn i_asymptotic(order: Order, x: f64) -> f64 {
    let pre = (x - 0.5 * (2.0 * std::f64::consts::PI * x).ln()).exp();
    pre * i_asymptotic_sum(order, x)
}

fn k_series(order: Order, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let log_half = (0.5 * x).ln();
    match order {
        Order::Zero => {
            // K0 = -(ln(x/2) + gamma) I0 + sum_k H_k q^k / (k!)^2
            let mut term = 1.0;
            let mut harmonic = 0.0;
            let mut sum = 0.0;
            for k in 1..200 {
                let kf = k as f64;
                term *= q / (kf * kf);
                harmonic += 1.0 / kf;
                let add = term * harmonic;
                sum += add;
                if add < 1e-18 * sum {
                    break;
                }
            }
            -(log_half + EULER_GAMMA) * i_series(Order::Zero, x) + sum
        }
        Order::One => {
            // K1 = 1/x + ln(x/2) I1 - (x/4) sum_k [psi(k+1) + psi(k+2)] q^k / (k! (k+1)!)
            let mut term = 1.0;
            let mut psi_k1 = -EULER_GAMMA;
            let mut psi_k2 = 1.0 - EULER_GAMMA;
            let mut sum = term * (psi_k1 + psi_k2);
            for k in 1..200 {
                let kf = k as f64;
                term *= q / (kf * (kf + 1.0));
                psi_k1 += 1.0 / kf;
                psi_k2 += 1.0 / (kf + 1.0);
                let add = term * (psi_k1 + psi_k2);
                sum += add;
                if add.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            1.0 / x + log_half * i_series(Order::One, x) - 0.25 * x * sum
        }
    }
}

/// Steed's continued fraction (Temme's CF2) for `(K_0, K_1)` at `x >= 2`.
fn k_steed(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent oracles: plain truncated series with 50 terms, no shared code.
    fn oracle_i0(x: f64) -> f64 {
        let mut s = 0.0;
        let mut fact = 1.0;
        for k in 0..50 {
            if k > 0 {
                fact *= k as f64;
            }
            s += (x / 2.0).powi(2 * k) / (fact * fact);
        }
        s
    }
    fn oracle_i1(x: f64) -> f64 {
        let mut s = 0.0;
        let mut fk = 1.0;
        for k in 0..50 {
            if k > 0 {
                fk *= k as f64;
            }
            s += (x / 2.0).powi(2 * k as i32 + 1) / (fk * fk * (k as f64 + 1.0));
        }
        s
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn i_small_argument_values() {
        assert!(rel(bessel_i(Order::Zero, 1e-12).unwrap(), 1.0) < 1e-15);
        let v = bessel_i(Order::Zero, 0.25).unwrap();
        assert!(rel(v, oracle_i0(0.25)) < 1e-14);
        assert!(rel(v, 1.015_686_141_223_607_9) < 1e-14);
        let v = bessel_i(Order::One, 0.25).unwrap();
        assert!(rel(v, oracle_i1(0.25)) < 1e-14);
        assert!(rel(v, 0.125_979_108_945_467_93) < 1e-14);
    }

    #[test]
    fn k_small_argument_values() {
        // mpmath reference values at 30 digits
        assert!(rel(bessel_k(Order::Zero, 0.25).unwrap(), 1.541_506_751_248_302_8) < 1e-12);
        assert!(rel(bessel_k(Order::One, 0.25).unwrap(), 3.747_025_974_440_711_6) < 1e-12);
    }

    #[test]
    fn i_regimes_agree_at_crossover() {
        for &x in &[14.0, 15.0, 16.0, 20.0] {
            let s = i_series(Order::Zero, x);
            let a = i_asymptotic(Order::Zero, x);
            assert!(rel(a, s) < 1e-12, "I0 at {x}: {a} vs {s}");
            let s = i_series(Order::One, x);
            let a = i_asymptotic(Order::One, x);
            assert!(rel(a, s) < 1e-12, "I1 at {x}: {a} vs {s}");
        }
    }

    #[test]
    fn k_regimes_agree_at_crossover() {
        for &x in &[1.5, 2.0, 2.5, 3.0] {
            let (k0, k1) = k_steed(x);
            assert!(rel(k0, k_series(Order::Zero, x)) < 1e-12, "K0 at {x}");
            assert!(rel(k1, k_series(Order::One, x)) < 1e-12, "K1 at {x}");
        }
    }

    #[test]
    fn overflow_guard() {
        assert!(matches!(bessel_i(Order::Zero, 701.0), Err(Error::OverflowRange(_))));
        assert!(bessel_i(Order::One, 700.0).unwrap().is_finite());
    }

    #[test]
    fn k0_strictly_decreasing() {
        for &x in &[0.5, 3.0, 10.0, 40.0, 300.0] {
            assert!(k0(x) < k0(x / 2.0));
            assert!(k0(x) > 0.0 && k1(x) > 0.0);
        }
    }

    #[test]
    fn wronskian_on_log_grid() {
        let n = 200;
        for i in 0..=n {
            let x = 1e-3 * (5e4f64).powf(i as f64 / n as f64);
            let w = i0(x) * k1(x) + i1(x) * k0(x);
            assert!(rel(w, 1.0 / x) < 1e-9, "x = {x}, W = {w}");
        }
    }

    #[test]
    fn derivative_identities() {
        let step = 1e-6;
        for &x in &[0.1, 0.7, 1.9, 2.1, 5.0, 14.9, 15.1, 30.0] {
            let di0 = (i0(x + step) - i0(x - step)) / (2.0 * step);
            assert!(rel(di0, i1(x)) < 1e-6, "I0' at {x}");
            let dk0 = (k0(x + step) - k0(x - step)) / (2.0 * step);
            assert!(rel(dk0, -k1(x)) < 1e-6, "K0' at {x}");
        }
    }

    #[test]
    fn small_argument_ratio() {
        let x: f64 = 1e-3;
        let approx = x / 2.0 - x.powi(3) / 16.0;
        assert!((ratio_i1_i0(x) - approx).abs() < 1e-10);
    }

    #[test]
    fn method_tags() {
        assert_eq!(bessel_i_tagged(Order::Zero, 3.0).unwrap().method, Method::Series);
        assert_eq!(bessel_i_tagged(Order::Zero, 30.0).unwrap().method, Method::Asymptotic);
        assert_eq!(bessel_k_tagged(Order::One, 1.0).unwrap().method, Method::Series);
        assert_eq!(bessel_k_tagged(Order::One, 3.0).unwrap().method, Method::ContinuedFraction);
    }
}
