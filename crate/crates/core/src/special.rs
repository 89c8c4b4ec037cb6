//! Complex log-gamma (Lanczos, g = 607/128, 15 terms) with reflection.

use num_complex::Complex64;
use std::f64::consts::PI;

const G: f64 = 607.0 / 128.0;
const COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Gamma(z)` on some branch; `exp` of it is `Gamma(z)` to ~14 digits.
/// Poles at non-positive integers yield an infinite real part.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        let s = ln_sin_pi(z);
        return Complex64::new(PI.ln(), 0.0) - s - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(COEF[0], 0.0);
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + x.ln()
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// `ln sin(pi z)`, safe for large `|Im z|`.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let y = PI * z.im;
    if y.abs() < 30.0 {
        return (z * PI).sin().ln();
    }
    // sin(pi z) = (e^{i pi z} - e^{-i pi z}) / 2i, one exponential dominates
    let x = PI * z.re;
    if y > 0.0 {
        // ~ - e^{-i pi z} / 2i = (i/2) e^{y - i x}
        Complex64::new(y - 2f64.ln(), -x + PI / 2.0)
    } else {
        // ~ e^{i pi z} / 2i = (-i/2) e^{-y + i x}
        Complex64::new(-y - 2f64.ln(), x - PI / 2.0)
    }
}
