//! Complementary error function.
//!
//! W. J. Cody's rational Chebyshev approximations (ACM TOMS Algorithm 715),
//! accurate to roughly machine precision on the whole real line.

const THRESHOLD: f64 = 0.46875;
/// `erfc(x)` is returned as exactly 0 (or 2) beyond this magnitude.
pub const SATURATION: f64 = 26.0;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

// erf on |x| <= 0.46875
const A: [f64; 5] = [
    3.161_123_743_870_565_6,
    113.864_154_151_050_16,
    377.485_237_685_302,
    3_209.377_589_138_469_5,
    0.185_777_706_184_603_15,
];
const B: [f64; 4] = [
    23.601_290_952_344_122,
    244.024_637_934_444_17,
    1_282.616_526_077_372_3,
    2_844.236_833_439_170_6,
];

// erfcx on 0.46875 < |x| <= 4
const C: [f64; 9] = [
    0.564_188_496_988_670_1,
    8.883_149_794_388_376,
    66.119_190_637_141_63,
    298.635_138_197_400_13,
    881.952_221_241_769_1,
    1_712.047_612_634_070_6,
    2_051.078_377_826_071_5,
    1_230.339_354_797_997_2,
    2.153_115_354_744_038_5e-8,
];
const D: [f64; 8] = [
    15.744_926_110_709_835,
    117.693_950_891_312_5,
    537.181_101_862_009_9,
    1_621.389_574_566_690_2,
    3_290.799_235_733_459_7,
    4_362.619_090_143_247,
    3_439.367_674_143_721_6,
    1_230.339_354_803_749_4,
];

// erfcx on |x| > 4
const P: [f64; 6] = [
    0.305_326_634_961_232_36,
    0.360_344_899_949_804_45,
    0.125_781_726_111_229_24,
    0.016_083_785_148_742_275,
    6.587_491_615_298_378e-4,
    0.016_315_387_137_302_097,
];
const Q: [f64; 5] = [
    2.568_520_192_289_822_4,
    1.872_952_849_923_460_4,
    0.527_905_102_951_428_4,
    0.060_518_341_312_441_32,
    0.002_335_204_976_268_691_8,
];

#[inline]
fn small(z: f64) -> f64 {
    ((((A[4] * z + A[0]) * z + A[1]) * z + A[2]) * z + A[3])
        / ((((z + B[0]) * z + B[1]) * z + B[2]) * z + B[3])
}

#[inline]
fn medium(y: f64) -> f64 {
    let num = C[..8].iter().fold(C[8], |acc, &c| acc * y + c);
    let den = D.iter().fold(1.0, |acc, &d| acc * y + d);
    num / den
}

#[inline]
fn large(y: f64) -> f64 {
    let z = 1.0 / (y * y);
    let num = P[..5].iter().fold(P[5], |acc, &p| acc * z + p);
    let den = Q.iter().fold(1.0, |acc, &q| acc * z + q);
    (FRAC_1_SQRT_PI - z * num / den) / y
}

/// `exp(-y^2)` with the square split so the rounding error of `y*y` does not
/// get amplified.
#[inline]
fn exp_neg_square(y: f64) -> f64 {
    let y16 = (y * 16.0).trunc() / 16.0;
    (-y16 * y16).exp() * (-(y - y16) * (y + y16)).exp()
}

/// Scaled complementary error function `exp(x^2) erfc(x)` for `x > 0.46875`.
#[inline]
fn erfcx_tail(y: f64) -> f64 {
    if y <= 4.0 {
        medium(y)
    } else {
        large(y)
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let y = x.abs();
    if y <= THRESHOLD {
        return 1.0 - x * small(y * y);
    }
    let tail = if y > SATURATION {
        0.0
    } else {
        erfcx_tail(y) * exp_neg_square(y)
    };
    if x < 0.0 {
        2.0 - tail
    } else {
        tail
    }
}

/// Error function, `1 - erfc(x)` with full relative accuracy near zero.
pub fn erf(x: f64) -> f64 {
    let y = x.abs();
    if y <= THRESHOLD {
        x * small(y * y)
    } else {
        (1.0 - erfc(y)).copysign(x)
    }
}

/// `exp(x^2) erfc(x)`, finite for all `x >= 0`.
pub fn erfcx(x: f64) -> f64 {
    let y = x.abs();
    if y <= THRESHOLD {
        let z = y * y;
        return z.exp() * (1.0 - x * small(z));
    }
    let tail = erfcx_tail(y);
    if x < 0.0 {
        2.0 * (y * y).exp() - tail
    } else {
        tail
    }
}
