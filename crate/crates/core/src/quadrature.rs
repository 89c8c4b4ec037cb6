//! Composite Gauss–Kronrod (7, 15) quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate and `|Kronrod - Gauss|` on one interval.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Sum of `gk15` over `panels` equal sub-intervals.
pub fn composite<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> (f64, f64) {
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    let mut e = 0.0;
    for i in 0..panels {
        let (v, err) = gk15(&mut f, a + i as f64 * h, a + (i + 1) as f64 * h);
        s += v;
        e += err;
    }
    (s, e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integral() {
        let (v, _) = composite(|x: f64| (-x * x).exp(), -8.0, 8.0, 16);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn exact_for_polynomials() {
        let (v, e) = gk15(&mut |x: f64| x.powi(12) - 3.0 * x.powi(5), 0.0, 1.0);
        assert!((v - (1.0 / 13.0 - 0.5)).abs() < 1e-15);
        assert!(e < 1e-10);
    }
}
