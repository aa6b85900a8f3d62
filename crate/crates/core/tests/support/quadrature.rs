//! Adaptive Gauss–Kronrod (7, 15) quadrature for complex integrands, used
//! as an independent oracle for closed-form transforms.

use num_complex::Complex64;

const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XK[i];
        let pair = f(c - x) + f(c + x);
        kron += pair * WK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// `∫_a^b f` to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    fn go(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64, depth: u32) -> Complex64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        go(f, a, m, tol / 2.0, depth - 1) + go(f, m, b, tol / 2.0, depth - 1)
    }
    go(f, a, b, tol, 40)
}

/// `∫_S e^{2πixt} dx` for bands given as `(lo, hi)` floats.
pub fn ft_bands(bands: &[(f64, f64)], t: f64, tol: f64) -> Complex64 {
    let f = move |x: f64| {
        // fractional turn with a single rounding
        let turns = x.mul_add(t, -(x * t).round());
        let (s, c) = (std::f64::consts::TAU * turns).sin_cos();
        Complex64::new(c, s)
    };
    bands.iter().map(|&(a, b)| integrate(&f, a, b, tol)).sum()
}
