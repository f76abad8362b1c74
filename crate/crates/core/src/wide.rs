//! Helpers over the 237-bit working float.

use alloc::vec::Vec;

pub(crate) use f256::f256 as Wide;

pub(crate) const ZERO: Wide = Wide::ZERO;
pub(crate) const ONE: Wide = Wide::ONE;

/// Unit roundoff of [`Wide`], as an `f64`.
pub(crate) const EPS: f64 = 9.055_679_078_826_712e-72;

// ln 2, rounded to nearest
const LN_2: Wide = Wide::from_bits((0x3fffe62e42fefa39ef35793c7673007e, 0x5ed5e81e6864ce5316c5b141a2eb7175));

// 1/n! for n = 2..=17, rounded to nearest
const INV_FACT: [Wide; 16] = [
    Wide::from_bits((0x3fffe000000000000000000000000000, 0x0)),
    Wide::from_bits((0x3fffc555555555555555555555555555, 0x55555555555555555555555555555555)),
    Wide::from_bits((0x3fffa555555555555555555555555555, 0x55555555555555555555555555555555)),
    Wide::from_bits((0x3fff8111111111111111111111111111, 0x11111111111111111111111111111111)),
    Wide::from_bits((0x3fff56c16c16c16c16c16c16c16c16c1, 0x6c16c16c16c16c16c16c16c16c16c16c)),
    Wide::from_bits((0x3fff2a01a01a01a01a01a01a01a01a01, 0xa01a01a01a01a01a01a01a01a01a01a0)),
    Wide::from_bits((0x3ffefa01a01a01a01a01a01a01a01a01, 0xa01a01a01a01a01a01a01a01a01a01a0)),
    Wide::from_bits((0x3ffec71de3a556c7338faac1c88e5001, 0x71de3a556c7338faac1c88e500171de4)),
    Wide::from_bits((0x3ffe927e4fb7789f5c72ef016d3ea667, 0x8e4b61ddf05c2d95567d3a50ccdf4b1d)),
    Wide::from_bits((0x3ffe5ae64567f544e38fe747e4b837dc, 0x71e202b72f11b6aaac590f0129fef8e4)),
    Wide::from_bits((0x3ffe21eed8eff8d897b544da987acfe8, 0x4bec01cf74b679c71d90b4ab7154a5ed)),
    Wide::from_bits((0x3ffde6124613a86d097ca38331d23af6, 0x84d3b3757bf4471c732840d301a3425f)),
    Wide::from_bits((0x3ffda93974a8c07c9d20badf145dfa3e, 0x4ea8cd188da975d75f096ea801df2748)),
    Wide::from_bits((0x3ffd6ae7f3e733b81f11d8656b0ee8ca, 0xfe91ebd5ec707db2878187199b98b26f)),
    Wide::from_bits((0x3ffd2ae7f3e733b81f11d8656b0ee8ca, 0xfe91ebd5ec707db2878187199b98b26f)),
    Wide::from_bits((0x3ffce952c77030ad4a6b2605197771af, 0xfea7748d1ac43a117079e890927198e1)),
];

const SQUARINGS: u32 = 10;

/// `e^a` by `a = k ln 2 + r`, a Taylor series for `e^(r/2^10) − 1` and ten
/// exact-form squarings `(1 + u)² − 1 = u(2 + u)`. Several times faster than
/// the correctly rounded `f256::exp` and within a few hundred ulps of it for
/// `|a| ≤ 1e4`.
pub(crate) fn exp(a: Wide) -> Wide {
    if !a.is_finite() {
        return a.exp();
    }
    let af = to_f64(a);
    if af > 180_000.0 {
        return Wide::INFINITY;
    }
    if af < -180_000.0 {
        return ZERO;
    }
    let k = libm::round(af / core::f64::consts::LN_2);
    let s = (a - wide(k) * LN_2).div_pow2(SQUARINGS);
    let mut p = INV_FACT[15];
    for c in INV_FACT[..15].iter().rev() {
        p = p.mul_add(s, *c);
    }
    let mut u = (s * s).mul_add(p, s);
    for _ in 0..SQUARINGS {
        u = u.mul_add(u, u.mul2());
    }
    let e = ONE + u;
    if k >= 0.0 {
        e.mul_pow2(k as u32)
    } else {
        e.div_pow2((-k) as u32)
    }
}

#[inline]
pub(crate) fn wide(x: f64) -> Wide {
    Wide::from(x)
}

/// Nearest `f64`, up to one ulp.
pub(crate) fn to_f64(x: Wide) -> f64 {
    if x.eq_zero() {
        return 0.0;
    }
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_infinite() {
        return if x.is_sign_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
    }
    let hi = approx(x);
    if !hi.is_finite() {
        return hi;
    }
    hi + approx(x - wide(hi))
}

// (-1)^s * c * 2^t with c < 2^237, so the high word carries at most 109 bits.
fn approx(x: Wide) -> f64 {
    let (s, t, (hi, lo)) = x.as_sign_exp_signif();
    let c = hi as f64 * 3.402_823_669_209_385e38 + lo as f64;
    let mag = if t < -1000 {
        libm::ldexp(libm::ldexp(c, -1000), t + 1000)
    } else {
        libm::ldexp(c, t)
    };
    if s == 0 {
        mag
    } else {
        -mag
    }
}

/// Splits into `f64` limbs whose sum reproduces `x` to working precision.
pub(crate) fn limbs(x: Wide) -> [f64; 5] {
    let mut out = [0.0; 5];
    let mut r = x;
    for slot in &mut out {
        let v = to_f64(r);
        *slot = v;
        if v == 0.0 || !v.is_finite() {
            break;
        }
        r = r - wide(v);
    }
    out
}

pub(crate) fn from_limbs(v: &[f64]) -> Wide {
    v.iter().fold(ZERO, |acc, &x| acc + wide(x))
}

#[inline]
pub(crate) fn dot(a: &[Wide], b: &[Wide]) -> Wide {
    let mut acc = ZERO;
    for (x, y) in a.iter().zip(b) {
        acc = x.mul_add(*y, acc);
    }
    acc
}

/// Squared Euclidean distance, exact up to the final rounding.
#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> Wide {
    let mut acc = ZERO;
    for (x, y) in a.iter().zip(b) {
        let d = wide(*x) - wide(*y);
        acc = d.mul_add(d, acc);
    }
    acc
}

pub(crate) fn lift(v: &[f64]) -> Vec<Wide> {
    v.iter().map(|&x| wide(x)).collect()
}

pub(crate) fn lower(v: &[Wide]) -> Vec<f64> {
    v.iter().map(|&x| to_f64(x)).collect()
}
