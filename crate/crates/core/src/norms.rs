//! Solution norms and profile-error norms by radial quadrature.
//!
//! With the unnormalized transform convention the Plancherel identity is
//! ‖u‖²_{L²(x)} = (2π)^{-n} ‖û‖²_{L²(ξ)}. All integrands here are even in
//! the signed frequency (real data give û(-ξ) = conj û(ξ)), so a single
//! radial integral over σ ≥ 0 with the |ω_n| σ^{n-1} weight covers the
//! whole space, shifted one-dimensional mixtures included.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{DatumPair, ModelParams};
use crate::mode::evolve_mode;
use crate::profile::{profile_hat, ProfileParams};
use crate::quad::{self, QuadError, QuadratureSpec};

#[derive(Debug, Error)]
pub enum NormsError {
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("profile error norm requires m > 0")]
    MasslessProfile,
}

/// One time sample of the solution norms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormSample {
    pub t: f64,
    /// ‖u(t,·)‖ and its quadrature error estimate.
    pub l2: f64,
    pub l2_err: f64,
    /// ‖∇u(t,·)‖.
    pub grad: f64,
    pub grad_err: f64,
    /// ‖u_t(t,·)‖.
    pub ut: f64,
    pub ut_err: f64,
    /// Physical energy ½(‖u_t‖² + ‖∇u‖² + m²‖u‖²).
    pub energy: f64,
    pub energy_err: f64,
}

/// Phase rate of the mode kernels in σ: |d/dσ t√(σ²+m²)| doubled for
/// squared quantities. Beyond σ = 2.6 the hint is dropped — every mode
/// with m ≤ 2 is overdamped there and does not oscillate.
fn mode_phase_rate(t: f64, m: f64) -> impl Fn(f64) -> f64 {
    move |s: f64| {
        let e = s * s + m * m;
        if e > 0.0 && s <= 2.6 {
            2.0 * t * s / e.sqrt()
        } else {
            0.0
        }
    }
}

/// Ungated variant for integrands containing the profile, whose phase
/// t√(σ²+m²) oscillates at every frequency.
pub fn profile_phase_rate(t: f64, m: f64) -> impl Fn(f64) -> f64 {
    move |s: f64| {
        let e = s * s + m * m;
        if e > 0.0 {
            2.0 * t * s / e.sqrt()
        } else {
            0.0
        }
    }
}

/// Radius below which the oscillation of a mode or profile integrand must
/// be resolved at time t: every oscillating component carries an e^{-tσ²}
/// amplitude (oscillatory modes decay like e^{-tσ²/2} squared, the profile
/// explicitly, and overdamped modes do not oscillate at all), so beyond
/// √(50/t) the oscillating mass is below e^{-50} and coarse panels with
/// plain adaptive refinement suffice.
pub fn oscillation_support(t: f64) -> Option<f64> {
    Some((50.0 / t.max(1.0)).sqrt())
}

fn sqrt_with_err(int_val: f64, int_err: f64, scale: f64) -> (f64, f64) {
    let v2 = (scale * int_val).max(0.0);
    let v = v2.sqrt();
    let err = if v > 0.0 {
        scale * int_err / (2.0 * v)
    } else {
        (scale * int_err).max(0.0).sqrt()
    };
    (v, err)
}

/// ‖u‖, ‖∇u‖, ‖u_t‖ and the total energy at one time, from exact mode
/// solutions integrated over frequency space.
pub fn solution_norms(
    t: f64,
    params: &ModelParams,
    pair: &DatumPair,
    spec: &QuadratureSpec,
) -> Result<NormSample, NormsError> {
    let m = params.m;
    let n = params.n;
    let f = |sigma: f64| -> [f64; 3] {
        let st = evolve_mode(t, sigma, m, pair.u0.hat(sigma), pair.u1.hat(sigma));
        let u2 = st.u_hat.norm_sqr();
        let ut2 = st.ut_hat.norm_sqr();
        [u2, sigma * sigma * u2, ut2]
    };
    // E₀ is non-increasing in t, so its t = 0 value bounds every component:
    // |û|² ≤ 2E₀/(σ²+m²), σ²|û|² ≤ 2E₀, |û_t|² ≤ 2E₀. For σ ≥ 1 the sum
    // is below 6E₀(0,σ).
    let e0_env = pair.energy_envelope(m);
    let envelope = move |s: f64| 6.0 * e0_env(s);
    let rate = mode_phase_rate(t, m);
    let q = quad::radial_integral_vec(
        f,
        n,
        spec,
        &quad::IntegrandShape {
            envelope: Some(&envelope),
            phase_rate: Some(&rate),
            fine_until: oscillation_support(t),
        },
    )?;
    let scale = (2.0 * PI).powi(-(n as i32));
    let (l2, l2_err) = sqrt_with_err(q.value[0], q.error[0], scale);
    let (grad, grad_err) = sqrt_with_err(q.value[1], q.error[1], scale);
    let (ut, ut_err) = sqrt_with_err(q.value[2], q.error[2], scale);
    let energy = 0.5 * scale * (q.value[2] + q.value[1] + m * m * q.value[0]);
    let energy_err = 0.5 * scale * (q.error[2] + q.error[1] + m * m * q.error[0]);
    Ok(NormSample {
        t,
        l2,
        l2_err,
        grad,
        grad_err,
        ut,
        ut_err,
        energy,
        energy_err,
    })
}

/// Squared ξ-space distance between û(t,·) and the asymptotic profile,
/// split at the low-frequency cutoff.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileErrorNorm {
    pub t: f64,
    pub total: f64,
    pub total_err: f64,
    /// Contribution of |ξ| ≤ δ₀.
    pub low: f64,
    pub low_err: f64,
    /// Contribution of |ξ| ≥ δ₀.
    pub high: f64,
    pub high_err: f64,
}

/// ∫ |û - profile|² dξ with its |ξ| ≤ δ₀ / |ξ| ≥ δ₀ split.
pub fn profile_error_norm(
    t: f64,
    params: &ModelParams,
    pair: &DatumPair,
    spec: &QuadratureSpec,
) -> Result<ProfileErrorNorm, NormsError> {
    if !(params.m > 0.0) {
        return Err(NormsError::MasslessProfile);
    }
    let m = params.m;
    let pp = ProfileParams::from_pair(pair, m).map_err(|_| NormsError::MasslessProfile)?;
    let f = |sigma: f64| -> [f64; 1] {
        let st = evolve_mode(t, sigma, m, pair.u0.hat(sigma), pair.u1.hat(sigma));
        let diff = st.u_hat - profile_hat(t, sigma, &pp);
        [diff.norm_sqr()]
    };
    let rate = profile_phase_rate(t, m);
    let fine = oscillation_support(t);
    let low =
        quad::radial_integral_vec_hinted(f, params.n, 0.0, params.delta0, spec, Some(&rate), fine)?;

    // |û - profile|² ≤ 2|û|² + 2|profile|² ≤ 4E₀(0,σ)/m² + 2e^{-tσ²}(|P₁|/m + |P₀|)².
    let e0_env = pair.energy_envelope(m);
    let prof_scale = pp.p1.abs() / m + pp.p0.abs();
    let envelope =
        move |s: f64| 4.0 * e0_env(s) / (m * m) + 2.0 * (-t * s * s).exp() * prof_scale * prof_scale;
    let radius = match spec.truncation_radius {
        Some(r) => r,
        None => quad::truncation_radius(&envelope, params.n, spec.abs_tol)?,
    };
    let high = if radius > params.delta0 {
        quad::radial_integral_vec_hinted(f, params.n, params.delta0, radius, spec, Some(&rate), fine)?
    } else {
        quad::QuadratureVec {
            value: [0.0],
            error: [0.0],
        }
    };
    Ok(ProfileErrorNorm {
        t,
        total: low.value[0] + high.value[0],
        total_err: low.error[0] + high.error[0],
        low: low.value[0],
        low_err: low.error[0],
        high: high.value[0],
        high_err: high.error[0],
    })
}

/// A labelled time series of nonnegative values with error estimates.
#[derive(Debug, Clone, Serialize)]
pub struct NormSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

impl NormSeries {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            times: Vec::new(),
            values: Vec::new(),
            errors: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, value: f64, error: f64) {
        if let Some(&last) = self.times.last() {
            assert!(t > last, "times must be strictly increasing");
        }
        self.times.push(t);
        self.values.push(value);
        self.errors.push(error);
    }

    pub fn from_columns(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>, errors: Vec<f64>) -> Self {
        assert_eq!(times.len(), values.len());
        assert_eq!(times.len(), errors.len());
        assert!(times.windows(2).all(|w| w[0] < w[1]), "times must increase");
        Self {
            label: label.into(),
            times,
            values,
            errors,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Restrict to samples with t in [lo, hi].
    pub fn window(&self, lo: f64, hi: f64) -> NormSeries {
        let mut out = NormSeries::new(self.label.clone());
        for i in 0..self.len() {
            if self.times[i] >= lo && self.times[i] <= hi {
                out.push(self.times[i], self.values[i], self.errors[i]);
            }
        }
        out
    }

    /// Map values (and errors) pointwise, e.g. to square a norm series.
    pub fn map(&self, label: impl Into<String>, f: impl Fn(f64, f64) -> (f64, f64)) -> NormSeries {
        let mut out = NormSeries::new(label);
        for i in 0..self.len() {
            let (v, e) = f(self.values[i], self.errors[i]);
            out.push(self.times[i], v, e);
        }
        out
    }
}

/// Time grids for decay measurements.
pub mod grid {
    /// Geometric grid with a fixed number of points per decade, endpoint
    /// included.
    pub fn geometric(t_min: f64, t_max: f64, points_per_decade: usize) -> Vec<f64> {
        assert!(t_min > 0.0 && t_max > t_min);
        assert!(points_per_decade >= 1);
        let decades = (t_max / t_min).log10();
        let count = (decades * points_per_decade as f64).ceil() as usize;
        let mut out: Vec<f64> = (0..=count)
            .map(|i| t_min * 10f64.powf(i as f64 / points_per_decade as f64))
            .take_while(|&t| t < t_max * (1.0 - 1e-12))
            .collect();
        out.push(t_max);
        out
    }

    /// Geometric anchors, each expanded into `samples_per_bucket` points
    /// spanning one oscillation period, so per-period aggregates are well
    /// sampled at every scale. Anchors closer than one period are merged.
    pub fn period_clustered(
        t_min: f64,
        t_max: f64,
        buckets_per_decade: usize,
        samples_per_bucket: usize,
        period: f64,
    ) -> Vec<f64> {
        assert!(period > 0.0 && samples_per_bucket >= 1);
        let anchors = geometric(t_min, t_max, buckets_per_decade);
        let dt = period / samples_per_bucket as f64;
        let mut out = Vec::with_capacity(anchors.len() * samples_per_bucket);
        let mut next_allowed = f64::NEG_INFINITY;
        for a in anchors {
            if a < next_allowed {
                continue;
            }
            for j in 0..samples_per_bucket {
                out.push(a + j as f64 * dt);
            }
            next_allowed = a + period * 1.000001;
        }
        out
    }
}

/// Norm series over a time grid; samples are independent and evaluated in
/// parallel, assembled in input order.
pub fn norm_series_over(
    times: &[f64],
    params: &ModelParams,
    pair: &DatumPair,
    spec: &QuadratureSpec,
) -> Result<Vec<NormSample>, NormsError> {
    times
        .par_iter()
        .map(|&t| solution_norms(t, params, pair, spec))
        .collect()
}

/// Profile-error series over a time grid, in parallel.
pub fn profile_error_series_over(
    times: &[f64],
    params: &ModelParams,
    pair: &DatumPair,
    spec: &QuadratureSpec,
) -> Result<Vec<ProfileErrorNorm>, NormsError> {
    times
        .par_iter()
        .map(|&t| profile_error_norm(t, params, pair, spec))
        .collect()
}

/// Scaling check for the heat-kernel moments over the unit ball:
/// (1+t)^{(k+n)/2} ∫_{|ξ|≤1} e^{-γ|ξ|²t} |ξ|^k dξ evaluated on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct HeatMomentCheck {
    pub sup: f64,
    pub t_at_sup: f64,
    pub values: Vec<(f64, f64)>,
}

pub fn heat_moment_sup(
    gamma: f64,
    k: u32,
    n: u32,
    t_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<HeatMomentCheck, NormsError> {
    assert!(gamma > 0.0, "gamma must be positive");
    let mut values = Vec::with_capacity(t_grid.len());
    let mut sup = f64::NEG_INFINITY;
    let mut t_at_sup = f64::NAN;
    for &t in t_grid {
        let q = quad::radial_integral_on(
            |s| (-gamma * t * s * s).exp() * s.powi(k as i32),
            n,
            0.0,
            1.0,
            spec,
            None,
        )?;
        let normalized = q.value * (1.0 + t).powf((k + n) as f64 / 2.0);
        values.push((t, normalized));
        if normalized > sup {
            sup = normalized;
            t_at_sup = t;
        }
    }
    Ok(HeatMomentCheck {
        sup,
        t_at_sup,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{pairs, validate_params, Datum, RawParams};

    fn params(n: u32, m: f64) -> ModelParams {
        validate_params(RawParams {
            n,
            m,
            beta: 0.1,
            delta0: None,
        })
        .unwrap()
    }

    #[test]
    fn zero_data_norms_vanish() {
        let p = params(2, 1.0);
        let pair = DatumPair_zero(2);
        let s = solution_norms(3.0, &p, &pair, &QuadratureSpec::default()).unwrap();
        assert_eq!((s.l2, s.grad, s.ut, s.energy), (0.0, 0.0, 0.0, 0.0));
    }

    fn DatumPair_zero(n: u32) -> DatumPair {
        DatumPair::new(Datum::zero(n), Datum::zero(n)).unwrap()
    }

    #[test]
    fn parseval_at_t0_matches_physical_norm() {
        // u(0,·) = e^{-x²} on the line: ‖u‖² = √(π/2).
        let p = params(1, 1.0);
        let pair = DatumPair::new(Datum::gaussian(1.0, 1.0, 1), Datum::zero(1)).unwrap();
        let s = solution_norms(0.0, &p, &pair, &QuadratureSpec::default()).unwrap();
        let want = (PI / 2.0).sqrt();
        assert!(
            (s.l2 * s.l2 - want).abs() < 1e-8 * want,
            "‖u₀‖² = {} want {}",
            s.l2 * s.l2,
            want
        );
        // ‖∇u₀‖² = ∫4x²e^{-2x²} = √(π/2) as well.
        assert!((s.grad * s.grad - want).abs() < 1e-8 * want);
        assert!(s.ut == 0.0);
    }

    #[test]
    fn parseval_in_two_dimensions() {
        // ‖e^{-|x|²}‖² over R² = π/2.
        let p = params(2, 1.0);
        let pair = DatumPair::new(Datum::gaussian(1.0, 1.0, 2), Datum::zero(2)).unwrap();
        let s = solution_norms(0.0, &p, &pair, &QuadratureSpec::default()).unwrap();
        assert!((s.l2 * s.l2 - PI / 2.0).abs() < 1e-8);
    }

    #[test]
    fn energy_is_nonincreasing_in_time() {
        let p = params(1, 1.0);
        let pair = pairs::standard(1);
        let spec = QuadratureSpec::default();
        let mut prev = f64::INFINITY;
        for t in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0] {
            let s = solution_norms(t, &p, &pair, &spec).unwrap();
            assert!(s.energy <= prev * (1.0 + 1e-9), "t = {t}");
            prev = s.energy;
        }
    }

    #[test]
    fn profile_error_zero_data() {
        let p = params(1, 1.0);
        let e = profile_error_norm(2.0, &p, &DatumPair_zero(1), &QuadratureSpec::default())
            .unwrap();
        assert_eq!(e.total, 0.0);
    }

    #[test]
    fn profile_error_requires_mass() {
        let p = params(1, 0.0);
        let r = profile_error_norm(2.0, &p, &pairs::standard(1), &QuadratureSpec::default());
        assert!(matches!(r, Err(NormsError::MasslessProfile)));
    }

    #[test]
    fn profile_error_split_is_consistent() {
        let p = params(1, 1.0);
        let pair = pairs::velocity_only(1);
        let e = profile_error_norm(50.0, &p, &pair, &QuadratureSpec::default()).unwrap();
        assert!(e.total >= 0.0 && e.low >= 0.0 && e.high >= 0.0);
        assert!((e.total - (e.low + e.high)).abs() < 1e-15 + 1e-12 * e.total);
        // At t = 50 the high-frequency part is exponentially negligible.
        assert!(e.high < 1e-6 * e.low.max(1e-300), "high {} low {}", e.high, e.low);
    }

    #[test]
    fn quadrature_self_consistency_on_norms() {
        let p = params(1, 1.0);
        let pair = pairs::standard(1);
        let mut lo = QuadratureSpec::default();
        lo.rel_tol = 1e-6;
        lo.abs_tol = 1e-10;
        let s_lo = solution_norms(7.0, &p, &pair, &lo).unwrap();
        let mut hi = lo.clone();
        hi.rel_tol = 5e-7;
        let s_hi = solution_norms(7.0, &p, &pair, &hi).unwrap();
        assert!((s_lo.l2 - s_hi.l2).abs() <= s_lo.l2_err.max(1e-14));
        assert!((s_lo.grad - s_hi.grad).abs() <= s_lo.grad_err.max(1e-14));
        assert!((s_lo.ut - s_hi.ut).abs() <= s_lo.ut_err.max(1e-14));
    }

    #[test]
    fn heat_moment_examples() {
        let spec = QuadratureSpec::default();
        // t = 0: exact monomial integral |ω_n|/(k+n).
        let c = heat_moment_sup(1.0, 0, 1, &[0.0], &spec).unwrap();
        assert!((c.sup - 2.0).abs() < 1e-10);
        let c = heat_moment_sup(1.0, 2, 3, &[0.0], &spec).unwrap();
        assert!((c.sup - quad::unit_sphere_area(3) / 5.0).abs() < 1e-10);

        // t = 100, k = 0, n = 1: ≈ √(π/100)·√101.
        let c = heat_moment_sup(1.0, 0, 1, &[100.0], &spec).unwrap();
        let want = (PI / 100.0).sqrt() * 101.0_f64.sqrt();
        assert!((c.sup - want).abs() < 1e-6, "got {} want {}", c.sup, want);

        // Finite sup attained in the interior of a long grid.
        let grid: Vec<f64> = (0..=40).map(|i| 10f64.powf(-1.0 + i as f64 * 0.125)).collect();
        let c = heat_moment_sup(0.5, 2, 2, &grid, &spec).unwrap();
        assert!(c.sup.is_finite());
        assert!(c.t_at_sup > grid[0] && c.t_at_sup < grid[grid.len() - 1]);
    }

    #[test]
    fn grids_are_strictly_increasing() {
        let g = grid::geometric(100.0, 10_000.0, 16);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!((g[0] - 100.0).abs() < 1e-9 && (g.last().unwrap() - 10_000.0).abs() < 1e-6);

        let c = grid::period_clustered(100.0, 10_000.0, 24, 8, PI);
        assert!(c.windows(2).all(|w| w[0] < w[1]), "clustered grid must increase");
        assert!(c.len() > 300);
    }
}
