//! Stationary profile checks against independent fixed-step oracles and the
//! asymptotic laws of the Emden–Fowler equation.

use exterior_nlw::emden_fowler::{
    count_sign_changes, energy_of_q, find_zeros, integrate_h, StationaryFamily, DEFAULT_TOL, SERIES_START,
};
use exterior_nlw::error::Error;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const M: u32 = 3;

/// Classical RK4 on `(h, h')` with a fixed step, started from the two-term
/// series at `SERIES_START`.
fn rk4_oracle(m: u32, s_end: f64, step: f64) -> (f64, f64) {
    let p = 2 * m as i32 - 1;
    let s0 = SERIES_START;
    let mut y = [
        s0 - s0.powi(p) / ((2 * m - 1) as f64 * (2 * m - 2) as f64),
        1.0 - s0.powi(p - 1) / (2 * m - 2) as f64,
    ];
    let f = |s: f64, y: [f64; 2]| [y[1], -y[0].powi(2 * m as i32 + 1) / s.powi(4)];
    let n = ((s_end - s0) / step).round() as usize;
    let h = (s_end - s0) / n as f64;
    for i in 0..n {
        let s = s0 + i as f64 * h;
        let k1 = f(s, y);
        let k2 = f(s + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = f(s + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = f(s + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for c in 0..2 {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
    }
    (y[0], y[1])
}

fn richardson(m: u32, s_end: f64, step: f64) -> f64 {
    let fine = rk4_oracle(m, s_end, step).0;
    let coarse = rk4_oracle(m, s_end, 2.0 * step).0;
    fine + (fine - coarse) / 15.0
}

#[test]
fn profile_starts_like_s() {
    let p = integrate_h(M, 2e-2, 1e-10).unwrap();
    for s in [SERIES_START, 2.0 * SERIES_START, 1e-2, 2e-2] {
        let ratio = p.value(s).unwrap() / s;
        assert!((1.0 - 1e-4..=1.0).contains(&ratio), "h({s})/s = {ratio}");
    }
}

#[test]
fn h_at_five_matches_fixed_step_oracle() {
    let p = integrate_h(M, 5.0, 1e-10).unwrap();
    let oracle = richardson(M, 5.0, 1e-6);
    let h = p.value(5.0).unwrap();
    assert!(((h - oracle) / oracle).abs() < 1e-8, "h(5) = {h}, oracle {oracle}");
}

#[test]
fn first_zero_matches_fixed_step_oracle() {
    let p = integrate_h(M, 10.0, DEFAULT_TOL).unwrap();
    let s0 = find_zeros(&p, 1).unwrap()[0];
    // Oracle: bisection on the sign of the fixed-step RK4 value, step 10⁻⁴.
    let (mut a, mut b) = (9.0, 10.0);
    assert!(rk4_oracle(M, a, 1e-4).0 > 0.0 && rk4_oracle(M, b, 1e-4).0 < 0.0);
    while b - a > 1e-9 {
        let mid = 0.5 * (a + b);
        if rk4_oracle(M, mid, 1e-4).0 > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let oracle = 0.5 * (a + b);
    assert!(((s0 - oracle) / oracle).abs() < 1e-8, "s0 = {s0}, oracle {oracle}");
}

#[test]
fn short_window_still_yields_two_zeros() {
    let p = integrate_h(M, 50.0, DEFAULT_TOL).unwrap();
    let z = find_zeros(&p, 2).unwrap();
    assert_eq!(z.len(), 2);
    assert!(z[0] > 0.0 && z[1] > z[0]);
}

#[test]
fn zeros_exhausted_beyond_ceiling() {
    let p = integrate_h(M, 10.0, DEFAULT_TOL).unwrap();
    // Zero spacing grows like s^{0.8}; ten thousand zeros lie far beyond 10¹².
    let r = find_zeros(&p, 10_000);
    assert!(matches!(r, Err(Error::ZerosExhausted { .. })), "{:?}", r.map(|z| z.len()));
}

#[test]
fn invalid_window_is_rejected() {
    assert!(matches!(integrate_h(M, 1e-4, DEFAULT_TOL), Err(Error::InvalidRange(_))));
}

#[test]
fn ode_residual_at_random_points() {
    let p = integrate_h(M, 1e4, DEFAULT_TOL).unwrap();
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..100 {
        let s: f64 = 10f64.powf(rng.gen_range(-1.0..4.0));
        let (h, dh) = p.eval(s).unwrap();
        let force = h.powi(2 * M as i32 + 1) / s.powi(4);
        let residual = p.second_derivative(s).unwrap() + force;
        // local scale: the amplitude sqrt(h² + (s·h')²) of the oscillation
        let amp = (h * h + (s * dh).powi(2)).sqrt();
        let scale = amp;
        assert!(residual.abs() <= 10.0 * DEFAULT_TOL * scale, "s = {s}: residual {residual:e}, scale {scale:e}");
    }
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn fowler_zero_spacing_exponent() {
    let p = integrate_h(M, 10.0, DEFAULT_TOL).unwrap();
    let zeros = find_zeros(&p, 17).unwrap();
    let p = p.extended(zeros[16] * 1.01).unwrap();
    let extrema = p.find_extrema(17).unwrap();
    // X_{j+1} is the extremum between s_j and s_{j+1}.
    let js: Vec<usize> = (5..=15).collect();
    let x: Vec<f64> = js.iter().map(|&j| extrema[j + 1].ln()).collect();
    let y: Vec<f64> = js.iter().map(|&j| (zeros[j + 1] - zeros[j]).ln()).collect();
    let expected = 8.0 / (2.0 * M as f64 + 4.0);
    let fit = slope(&x, &y);
    assert!(((fit - expected) / expected).abs() < 0.05, "slope {fit}, expected {expected}");
}

#[test]
fn fowler_amplitude_law() {
    let p = integrate_h(M, 10.0, DEFAULT_TOL).unwrap();
    let zeros = find_zeros(&p, 21).unwrap();
    let p = p.extended(zeros[20] * 1.01).unwrap();
    let extrema = p.find_extrema(21).unwrap();
    let expo = 4.0 / (2.0 * M as f64 + 4.0);
    let a: Vec<f64> = (10..=20)
        .map(|n| p.value(extrema[n]).unwrap().abs() / extrema[n].powf(expo))
        .collect();
    let (lo, hi) = a.iter().fold((f64::MAX, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
    assert!((hi - lo) / hi < 0.1, "amplitude ratios {a:?}");
}

#[test]
fn z_one_decays_like_inverse_r() {
    let p = integrate_h(M, 10.0, DEFAULT_TOL).unwrap();
    let dev: Vec<f64> = [10.0, 30.0, 100.0]
        .iter()
        .map(|&r| (r * p.sample_z(1.0, r).unwrap() - 1.0).abs())
        .collect();
    assert!(dev[0] > dev[1] && dev[1] > dev[2], "{dev:?}");
    // |rZ₁ − 1| ≤ C/r² with one constant across the three radii
    let c = dev[0] * 100.0;
    assert!(dev[1] <= c / 900.0 * 1.5 && dev[2] <= c / 1e4 * 1.5, "{dev:?}");
    let (_, dz) = p.sample_z_with_derivative(1.0, 100.0).unwrap();
    assert!((1e4 * dz + 1.0).abs() < 1e-2, "r²Z' = {}", 1e4 * dz);
}

#[test]
fn z_is_odd_in_ell() {
    let p = integrate_h(M, 10.0, DEFAULT_TOL).unwrap();
    for r in [1.5, 3.0, 20.0] {
        for ell in [0.5, 1.0, 2.0] {
            assert_eq!(p.sample_z(-ell, r).unwrap(), -p.sample_z(ell, r).unwrap());
        }
    }
}

#[test]
fn rescaled_profiles_solve_the_stationary_equation() {
    let p = integrate_h(M, 1e3, DEFAULT_TOL).unwrap();
    let d = 1e-3;
    for ell in [0.3, 1.0, 4.0] {
        for r in [1.2, 2.0, 7.0, 30.0] {
            let z = |r: f64| p.sample_z(ell, r).unwrap();
            let (z0, dz) = p.sample_z_with_derivative(ell, r).unwrap();
            let d2 = (z(r + d) - 2.0 * z0 + z(r - d)) / (d * d);
            let force = z0.powi(2 * M as i32 + 1);
            let residual = d2 + 2.0 * dz / r + force;
            let scale = d2.abs() + (2.0 * dz / r).abs() + force.abs();
            assert!(residual.abs() < 1e-5 * scale, "ell {ell}, r {r}: {residual:e} vs {scale:e}");
        }
    }
}

#[test]
fn stationary_family_m3() {
    let family = StationaryFamily::new(M, 4).unwrap();
    let mut previous = f64::NEG_INFINITY;
    for q in family.members() {
        assert_eq!(q.value(1.0), 0.0);
        assert_eq!(q.q[0], 0.0);
        assert_eq!(count_sign_changes(&q.q[1..]), q.k, "k = {}", q.k);
        let e = energy_of_q(q).unwrap();
        assert!(((e.direct - e.scaled) / e.scaled).abs() <= 1e-5, "k = {}: {e:?}", q.k);
        assert!(e.pohozaev_gap <= 1e-5, "k = {}: {e:?}", q.k);
        assert!(e.direct > previous);
        previous = e.direct;
        let analytic = q.c_k_analytic();
        assert!(((q.c_k - analytic) / analytic).abs() < 1e-4, "k = {}: c_k {} vs {analytic}", q.k, q.c_k);
    }
    // c_k = s_k^{(m−1)/m}
    let q0 = family.get(0).unwrap();
    assert!((q0.c_k_analytic() - q0.s_k.powf(2.0 / 3.0)).abs() < 1e-12);
}

#[test]
fn stationary_family_m4_energy_agreement() {
    let family = StationaryFamily::new(4, 4).unwrap();
    for q in family.members() {
        let e = energy_of_q(q).unwrap();
        assert!(((e.direct - e.scaled) / e.scaled).abs() <= 1e-5, "k = {}: {e:?}", q.k);
        assert_eq!(count_sign_changes(&q.q[1..]), q.k);
    }
}

#[test]
fn ground_state_reference_values() {
    let family = StationaryFamily::new(M, 0).unwrap();
    let q0 = family.get(0).unwrap();
    assert!((q0.s_k - 9.445785).abs() < 1e-5, "s0 = {}", q0.s_k);
    let e = energy_of_q(q0).unwrap();
    assert!((e.direct - 1.0649971714).abs() < 1e-8, "E(Q0) = {}", e.direct);
}
