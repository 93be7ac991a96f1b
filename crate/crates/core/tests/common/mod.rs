//! Shared test oracles, independent of the library's evaluation paths.

use num_complex::Complex64;

/// Adaptive RK4 (step doubling with local extrapolation) for the mode
/// equation û'' + σ²û' + (σ²+m²)û = 0 as a first-order system. The local
/// error budget is distributed proportionally to the step, targeting a
/// global error of `tol` relative to |û₀| + |û₁|.
pub fn rk4_mode_oracle(
    t_end: f64,
    xi: f64,
    m: f64,
    u0: Complex64,
    u1: Complex64,
    tol: f64,
) -> (Complex64, Complex64) {
    let e = xi * xi + m * m;
    let s2 = xi * xi;
    let f = |u: Complex64, v: Complex64| (v, -e * u - s2 * v);
    let step = |u: Complex64, v: Complex64, h: f64| {
        let (k1u, k1v) = f(u, v);
        let (k2u, k2v) = f(u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        let (k3u, k3v) = f(u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        let (k4u, k4v) = f(u + h * k3u, v + h * k3v);
        (
            u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
            v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        )
    };
    let scale = u0.norm() + u1.norm();
    if scale == 0.0 || t_end == 0.0 {
        return (u0, u1);
    }
    let mut t = 0.0;
    let mut u = u0;
    let mut v = u1;
    let mut h = (t_end / 16.0).min(0.5 / (1.0 + s2 + e.sqrt()));
    let mut guard = 0u64;
    while t < t_end {
        guard += 1;
        assert!(guard < 200_000_000, "rk4 oracle stalled at t = {t}");
        if t + h > t_end {
            h = t_end - t;
        }
        let (u_full, v_full) = step(u, v, h);
        let (u_half, v_half) = step(u, v, 0.5 * h);
        let (u_two, v_two) = step(u_half, v_half, 0.5 * h);
        let err = ((u_two - u_full).norm() + (v_two - v_full).norm()) / 15.0;
        let budget = tol * scale * (h / t_end);
        if err <= budget || h < 1e-13 {
            u = u_two + (u_two - u_full) / 15.0;
            v = v_two + (v_two - v_full) / 15.0;
            t += h;
            if err < 0.1 * budget {
                h *= 1.7;
            }
        } else {
            h *= 0.5;
        }
    }
    (u, v)
}

#[allow(dead_code)]
pub fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!(
        (got - want).abs() <= tol,
        "{what}: got {got}, want {want} (tol {tol})"
    );
}
