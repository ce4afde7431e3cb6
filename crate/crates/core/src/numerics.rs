//! Uniform-grid quadrature, differentiation and interpolation helpers.

/// Composite Simpson rule over samples spaced by `h`.
///
/// An odd number of intervals is closed with a 3/8 rule on the last three.
pub fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (f[0] + f[1]),
        2 => h / 3.0 * (f[0] + 4.0 * f[1] + f[2]),
        _ if n.is_multiple_of(2) => simpson_even(f, h),
        3 => three_eighths(&f[0..4], h),
        _ => simpson_even(&f[..n - 2], h) + three_eighths(&f[n - 3..], h),
    }
}

fn simpson_even(f: &[f64], h: f64) -> f64 {
    let n = f.len() - 1;
    debug_assert!(n.is_multiple_of(2));
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        if i % 2 == 1 {
            odd += f[i];
        } else {
            even += f[i];
        }
    }
    h / 3.0 * (f[0] + f[n] + 4.0 * odd + 2.0 * even)
}

fn three_eighths(f: &[f64], h: f64) -> f64 {
    3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3])
}

/// Running integral `I[i] = ∫_{x_0}^{x_i} f`, trapezoid with the Euler–Maclaurin
/// endpoint correction (fourth order for smooth integrands).
pub fn cumulative_integral(f: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    if f.len() < 2 {
        return out;
    }
    let df = derivative(f, h);
    let mut trap = 0.0;
    for i in 1..f.len() {
        trap += 0.5 * h * (f[i - 1] + f[i]);
        out[i] = trap - h * h / 12.0 * (df[i] - df[0]);
    }
    out
}

/// First derivative of uniformly spaced samples, fourth-order accurate
/// (one-sided stencils at both ends).
pub fn derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    if n < 5 {
        for i in 0..n {
            d[i] = if i == 0 {
                (f[1] - f[0]) / h
            } else if i == n - 1 {
                (f[n - 1] - f[n - 2]) / h
            } else {
                (f[i + 1] - f[i - 1]) / (2.0 * h)
            };
        }
        return d;
    }
    let c = 1.0 / (12.0 * h);
    d[0] = c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
    d[1] = c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
    for i in 2..n - 2 {
        d[i] = c * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
    }
    let (a, b, e, g, k) = (f[n - 1], f[n - 2], f[n - 3], f[n - 4], f[n - 5]);
    d[n - 1] = c * (25.0 * a - 48.0 * b + 36.0 * e - 16.0 * g + 3.0 * k);
    d[n - 2] = c * (3.0 * a + 10.0 * b - 18.0 * e + 6.0 * g - k);
    d
}

/// Cubic Hermite interpolation on `[0, h]` from end values and slopes.
#[inline]
pub fn hermite3(y0: f64, d0: f64, y1: f64, d1: f64, h: f64, x: f64) -> f64 {
    let t = x / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

/// Derivative of [`hermite3`] with respect to `x`.
#[inline]
pub fn hermite3_slope(y0: f64, d0: f64, y1: f64, d1: f64, h: f64, x: f64) -> f64 {
    let t = x / h;
    let t2 = t * t;
    ((6.0 * t2 - 6.0 * t) * y0
        + (3.0 * t2 - 4.0 * t + 1.0) * h * d0
        + (-6.0 * t2 + 6.0 * t) * y1
        + (3.0 * t2 - 2.0 * t) * h * d1)
        / h
}

/// Eight-point Gauss–Legendre rule on `[-1, 1]`: (node, weight).
pub const GAUSS_LEGENDRE_8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Gauss–Legendre quadrature of `f` on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GAUSS_LEGENDRE_8
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}
