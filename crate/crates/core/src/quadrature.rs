//! Quadrature rules shared by the curve, assembly and inversion code.

/// Two-point Gauss rule on the unit interval: `(abscissa, weight)`.
pub const GAUSS2_UNIT: [(f64, f64); 2] = [
    (0.211_324_865_405_187_1, 0.5),
    (0.788_675_134_594_812_9, 0.5),
];

/// Edge-midpoint rule on a triangle, exact for quadratics. Entries are
/// barycentric coordinates; every weight is 1/3 of the area.
pub const TRIANGLE_MIDPOINTS: [[f64; 3]; 3] = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &w)) in KRONROD_NODES.iter().zip(KRONROD_WEIGHTS.iter()).enumerate() {
        let values = if x == 0.0 {
            let v = f(center);
            (v, 0.0)
        } else {
            (f(center - half * x), f(center + half * x))
        };
        let sum = values.0 + values.1;
        kronrod += w * sum;
        if i % 2 == 1 {
            gauss += GAUSS7_WEIGHTS[i / 2] * sum;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half)
}

/// Adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]` to the
/// requested relative tolerance.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (estimate, _) = gauss_kronrod(&f, a, b);
    let scale = estimate.abs().max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (value, err) = gauss_kronrod(&f, lo, hi);
        let allowed = rel_tol * scale * ((hi - lo) / (b - a)).abs();
        if err <= allowed.max(1e-300) || depth >= 40 {
            total += value;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauss2_integrates_cubics_exactly() {
        let f = |x: f64| 4.0 * x * x * x - x * x + 2.0;
        let q: f64 = GAUSS2_UNIT.iter().map(|&(x, w)| w * f(x)).sum();
        assert!((q - (1.0 - 1.0 / 3.0 + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_smooth_and_peaked_integrands() {
        let v = integrate_adaptive(|x| x.sin(), 0.0, PI, 1e-13);
        assert!((v - 2.0).abs() < 1e-13);
        let peaked = integrate_adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12);
        let exact = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
        assert!((peaked - exact).abs() < 1e-10 * exact);
    }
}
