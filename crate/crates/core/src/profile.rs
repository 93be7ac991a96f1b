//! Asymptotic profile and exact remainder decomposition in the
//! low-frequency region.
//!
//! For 0 < |ξ| ≤ δ₀ (oscillatory regime, D = 4(σ²+m²) - σ⁴ > 0) the exact
//! mode solution splits as
//!
//!   û(t,ξ) = P₁ φ(t,ξ) + P₀ e^{-tσ²/2} cos(t√D/2) + R₁ + R₂ + R₃,
//!
//! where φ is the sine propagator kernel, R₁ = P₀ (σ²/2) φ is the sine
//! excess hidden in the position kernel and R₂, R₃ carry the data
//! variation (A_j - iB_j) against the two kernels. Subtracting the target
//! profile
//!
//!   P₁ e^{-tσ²/2} sin(t√(σ²+m²))/√(σ²+m²) + P₀ e^{-tσ²/2} cos(t√(σ²+m²))
//!
//! leaves a tail whose mean-value expansion (in θ-parameters that are
//! never evaluated) is bounded by four explicit envelopes built from
//! |sin| ≤ 1, |cos| ≤ 1, 4(σ²+m²) - σ⁴θ ≥ 4m² - δ₀⁴ and
//! |√D - 2√(σ²+m²)| ≤ σ⁴/m.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::DatumPair;
use crate::mode::{evolve_mode, kernels};

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("frequency magnitude {xi} outside the low-frequency region (0, {delta0}]")]
    OutsideLowFrequency { xi: f64, delta0: f64 },
    #[error("profile requires a positive mass, got {0}")]
    MasslessProfile(f64),
    #[error("cutoff {delta0} violates delta0^4 < 4m^2 for m = {m}")]
    CutoffTooLarge { delta0: f64, m: f64 },
}

/// Data entering the asymptotic profile: the zeroth moments and the mass.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileParams {
    pub p0: f64,
    pub p1: f64,
    pub m: f64,
}

impl ProfileParams {
    pub fn new(p0: f64, p1: f64, m: f64) -> Result<Self, ProfileError> {
        if !(m > 0.0) {
            return Err(ProfileError::MasslessProfile(m));
        }
        Ok(Self { p0, p1, m })
    }

    pub fn from_pair(pair: &DatumPair, m: f64) -> Result<Self, ProfileError> {
        let (p0, p1) = pair.masses();
        Self::new(p0, p1, m)
    }
}

/// The Fourier-side asymptotic profile
/// P₁ e^{-tσ²/2} sin(t√(σ²+m²))/√(σ²+m²) + P₀ e^{-tσ²/2} cos(t√(σ²+m²)).
pub fn profile_hat(t: f64, xi_mag: f64, pp: &ProfileParams) -> f64 {
    let s2 = xi_mag * xi_mag;
    let freq = (s2 + pp.m * pp.m).sqrt();
    let damp = (-t * s2 / 2.0).exp();
    damp * (pp.p1 * (t * freq).sin() / freq + pp.p0 * (t * freq).cos())
}

/// The three exactly computable remainder terms.
#[derive(Debug, Clone, Copy)]
pub struct LeadingRemainders {
    /// P₀ σ² e^{-tσ²/2} sin(t√D/2)/√D — the sine excess of the position
    /// kernel (real).
    pub sine_excess: f64,
    /// (A₁ - iB₁) φ(t,ξ): first-order variation of the velocity datum.
    pub u1_variation: Complex64,
    /// (A₀ - iB₀) ψ(t,ξ): first-order variation of the position datum.
    pub u0_variation: Complex64,
}

impl LeadingRemainders {
    pub fn sum(&self) -> Complex64 {
        self.u1_variation + self.u0_variation + Complex64::new(self.sine_excess, 0.0)
    }
}

fn require_low_freq(xi: f64, delta0: f64, allow_zero: bool) -> Result<(), ProfileError> {
    let mag = xi.abs();
    if mag > delta0 || (!allow_zero && mag == 0.0) {
        return Err(ProfileError::OutsideLowFrequency { xi, delta0 });
    }
    Ok(())
}

/// Exact remainder terms at signed frequency ξ with |ξ| ≤ δ₀.
pub fn leading_remainders(
    t: f64,
    xi: f64,
    pair: &DatumPair,
    m: f64,
    delta0: f64,
) -> Result<LeadingRemainders, ProfileError> {
    require_low_freq(xi, delta0, true)?;
    let mag = xi.abs();
    let k = kernels(t, mag, m);
    let (p0, p1) = pair.masses();
    let (a0, b0) = pair.u0.ab_split(xi);
    let (a1, b1) = pair.u1.ab_split(xi);
    let _ = p1;
    Ok(LeadingRemainders {
        sine_excess: p0 * 0.5 * mag * mag * k.phi,
        u1_variation: Complex64::new(a1, -b1) * k.phi,
        u0_variation: Complex64::new(a0, -b0) * k.psi,
    })
}

/// Rebuild û(t,ξ) from moments, kernels and the exact remainders:
/// P₁φ + P₀ e^{-tσ²/2}cos(t√D/2) + R₁ + R₂ + R₃. Must agree with the
/// mode solver to rounding — the decomposition is an identity.
pub fn reconstruct_low_freq(
    t: f64,
    xi: f64,
    pair: &DatumPair,
    m: f64,
    delta0: f64,
) -> Result<Complex64, ProfileError> {
    require_low_freq(xi, delta0, false)?;
    let mag = xi.abs();
    let k = kernels(t, mag, m);
    let (p0, p1) = pair.masses();
    let rem = leading_remainders(t, xi, pair, m, delta0)?;
    let leading = p1 * k.phi + p0 * k.cos_part(mag);
    Ok(Complex64::new(leading, 0.0) + rem.sum())
}

/// û - profile - R₁ - R₂ - R₃, from exact quantities only. Equals the
/// aggregate of the four mean-value remainder terms without ever choosing
/// their θ parameters.
pub fn tail_remainder(
    t: f64,
    xi: f64,
    pair: &DatumPair,
    m: f64,
    delta0: f64,
) -> Result<Complex64, ProfileError> {
    require_low_freq(xi, delta0, false)?;
    let mag = xi.abs();
    let pp = ProfileParams::from_pair(pair, m)?;
    let u_hat = evolve_mode(t, mag, m, pair.u0.hat(xi), pair.u1.hat(xi)).u_hat;
    let rem = leading_remainders(t, xi, pair, m, delta0)?;
    Ok(u_hat - Complex64::new(profile_hat(t, mag, &pp), 0.0) - rem.sum())
}

/// Worst-case pointwise envelopes for the four mean-value tail terms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailEnvelopes {
    /// Expansion of 2/√D around 1/√(σ²+m²): 2|P₁|σ⁴e^{-tσ²/2}(4m²-δ₀⁴)^{-3/2}.
    pub dispersion: f64,
    /// Sine phase shift: |P₁| t e^{-tσ²/2} σ⁴/m².
    pub phase_sin: f64,
    /// Mixed product term: |P₁| t σ⁸ e^{-tσ²/2} / (m (4m²-δ₀⁴)^{3/2}).
    pub mixed: f64,
    /// Cosine phase shift: (|P₀|/2) t e^{-tσ²/2} σ⁴/m.
    pub phase_cos: f64,
}

impl TailEnvelopes {
    pub fn sum(&self) -> f64 {
        self.dispersion + self.phase_sin + self.mixed + self.phase_cos
    }
}

/// Evaluate the four envelopes at (t, σ).
pub fn tail_envelopes(
    t: f64,
    xi_mag: f64,
    pp: &ProfileParams,
    delta0: f64,
) -> Result<TailEnvelopes, ProfileError> {
    require_low_freq(xi_mag, delta0, true)?;
    let gap = 4.0 * pp.m * pp.m - delta0.powi(4);
    if gap <= 0.0 {
        return Err(ProfileError::CutoffTooLarge { delta0, m: pp.m });
    }
    let s2 = xi_mag * xi_mag;
    let s4 = s2 * s2;
    let damp = (-t * s2 / 2.0).exp();
    let gap32 = gap.powf(1.5);
    Ok(TailEnvelopes {
        dispersion: 2.0 * pp.p1.abs() * s4 * damp / gap32,
        phase_sin: pp.p1.abs() * t * damp * s4 / (pp.m * pp.m),
        mixed: pp.p1.abs() * t * s4 * s4 * damp / (pp.m * gap32),
        phase_cos: 0.5 * pp.p0.abs() * t * damp * s4 / pp.m,
    })
}

/// Constants (L, M) with |A_j(ξ)| ≤ L|ξ|‖u_j‖_{1,1} and
/// |B_j(ξ)| ≤ M|ξ|‖u_j‖_{1,1}: L = sup (1-cosθ)/θ found by golden-section
/// search on (0, 2π], M = sup |sinθ|/|θ| = 1 exactly.
pub fn moment_bound_constants() -> (f64, f64) {
    let g = |th: f64| (1.0 - th.cos()) / th;
    // Golden-section maximization; g rises from 0, peaks near 2.33 and
    // falls back to 0 at 2π, so it is unimodal on this bracket.
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut a = 1e-8;
    let mut b = 2.0 * std::f64::consts::PI;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    for _ in 0..80 {
        if g(c) > g(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
    }
    let theta = 0.5 * (a + b);
    (g(theta), 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::pairs;

    const DELTA0: f64 = 0.7071;

    #[test]
    fn profile_at_time_zero_is_p0() {
        let pp = ProfileParams::new(2.5, -1.0, 1.0).unwrap();
        for xi in [0.0, 0.3, 1.0] {
            assert!((profile_hat(0.0, xi, &pp) - 2.5).abs() < 1e-15);
        }
    }

    #[test]
    fn profile_at_zero_frequency_is_the_exact_mode() {
        // ξ = 0: P₁ sin(mt)/m + P₀ cos(mt).
        let pp = ProfileParams::new(0.7, 1.3, 2.0).unwrap();
        for t in [0.5_f64, 2.0, 9.0] {
            let want = 1.3 * (2.0 * t).sin() / 2.0 + 0.7 * (2.0 * t).cos();
            assert!((profile_hat(t, 0.0, &pp) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn profile_value_cross_checked_by_independent_arithmetic() {
        // P₀ = 0, P₁ = √π, m = 1, σ = 1, t = 1:
        // √π e^{-1/2} sin(√2)/√2, assembled factor by factor.
        let pp = ProfileParams::new(0.0, std::f64::consts::PI.sqrt(), 1.0).unwrap();
        let sqrt2 = 2.0_f64.sqrt();
        let want = std::f64::consts::PI.sqrt() * (-0.5_f64).exp() * sqrt2.sin() / sqrt2;
        let got = profile_hat(1.0, 1.0, &pp);
        assert!((got - want).abs() < 1e-14);
        assert!((got - 0.7505).abs() < 5e-4, "sanity magnitude: {got}");
        assert!(ProfileParams::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn remainders_vanish_with_frequency_and_data() {
        let pair = pairs::standard(1);
        let r = leading_remainders(5.0, 1e-9, &pair, 1.0, DELTA0).unwrap();
        assert!(r.sine_excess.abs() < 1e-17);

        let zero = crate::catalog::DatumPair::new(
            crate::catalog::Datum::zero(1),
            crate::catalog::Datum::zero(1),
        )
        .unwrap();
        let r = leading_remainders(5.0, 0.3, &zero, 1.0, DELTA0).unwrap();
        assert_eq!(r.sum().norm(), 0.0);
    }

    #[test]
    fn remainders_match_literal_displays() {
        use crate::mode::discriminant;
        // Independent brute-force evaluation of the defining expressions.
        let pair = pairs::shifted();
        let (m, t, xi) = (1.0, 5.0, 0.3_f64);
        let r = leading_remainders(t, xi, &pair, m, DELTA0).unwrap();

        let d = discriminant(xi, m);
        let damp = (-t * xi * xi / 2.0).exp();
        let phi = 2.0 * damp * (t * d.sqrt() / 2.0).sin() / d.sqrt();
        let psi = xi * xi * damp * (t * d.sqrt() / 2.0).sin() / d.sqrt()
            + damp * (t * d.sqrt() / 2.0).cos();
        let (p0, _) = pair.masses();
        let (a0, b0) = pair.u0.ab_split(xi);
        let (a1, b1) = pair.u1.ab_split(xi);

        let k1_ref = p0 * xi * xi * damp * (t * d.sqrt() / 2.0).sin() / d.sqrt();
        assert!((r.sine_excess - k1_ref).abs() < 1e-13);
        assert!((r.u1_variation - Complex64::new(a1, -b1) * phi).norm() < 1e-13);
        assert!((r.u0_variation - Complex64::new(a0, -b0) * psi).norm() < 1e-13);
    }

    #[test]
    fn reconstruction_is_an_identity() {
        for pair in [pairs::standard(1), pairs::shifted(), pairs::zero_mean(1)] {
            for xi in [0.05, -0.2, 0.5, DELTA0, -DELTA0] {
                for t in [0.0, 1.0, 10.0, 60.0] {
                    let recon = reconstruct_low_freq(t, xi, &pair, 1.0, DELTA0).unwrap();
                    let exact =
                        evolve_mode(t, xi.abs(), 1.0, pair.u0.hat(xi), pair.u1.hat(xi)).u_hat;
                    assert!(
                        (recon - exact).norm() <= 1e-10 * (1.0 + exact.norm()),
                        "xi={xi} t={t}: {} vs {}",
                        recon,
                        exact
                    );
                }
            }
        }
    }

    #[test]
    fn zero_mean_reconstruction_is_pure_variation() {
        // P₀ = P₁ = 0 kills the leading terms and the sine excess.
        let pair = pairs::zero_mean(1);
        let (t, xi) = (3.0, 0.4);
        let rem = leading_remainders(t, xi, &pair, 1.0, DELTA0).unwrap();
        assert_eq!(rem.sine_excess, 0.0);
        let recon = reconstruct_low_freq(t, xi, &pair, 1.0, DELTA0).unwrap();
        assert!((recon - (rem.u1_variation + rem.u0_variation)).norm() < 1e-15);
    }

    #[test]
    fn reconstruction_boundary_checks() {
        let pair = pairs::standard(1);
        assert!(reconstruct_low_freq(1.0, 0.0, &pair, 1.0, DELTA0).is_err());
        assert!(reconstruct_low_freq(1.0, DELTA0 * 1.01, &pair, 1.0, DELTA0).is_err());
        // t = 0 reproduces the initial datum.
        let r = reconstruct_low_freq(0.0, 0.3, &pair, 1.0, DELTA0).unwrap();
        assert!((r - pair.u0.hat(0.3)).norm() < 1e-13);
    }

    #[test]
    fn tail_vanishes_at_t0_and_small_frequency() {
        let pair = pairs::standard(1);
        for xi in [0.1, 0.4, DELTA0] {
            let tail = tail_remainder(0.0, xi, &pair, 1.0, DELTA0).unwrap();
            assert!(tail.norm() < 1e-10, "t=0 tail {}", tail.norm());
        }
        let tail = tail_remainder(4.0, 1e-7, &pair, 1.0, DELTA0).unwrap();
        assert!(tail.norm() < 1e-12);
    }

    #[test]
    fn tail_is_dominated_by_the_envelopes() {
        for pair in [pairs::standard(1), pairs::shifted()] {
            let pp = ProfileParams::from_pair(&pair, 1.0).unwrap();
            for xi in [0.1, 0.3, 0.5, DELTA0] {
                for t in [0.2, 1.0, 5.0, 25.0, 100.0] {
                    let tail = tail_remainder(t, xi, &pair, 1.0, DELTA0).unwrap();
                    let env = tail_envelopes(t, xi, &pp, DELTA0).unwrap();
                    assert!(
                        tail.norm() <= env.sum() + 1e-13,
                        "xi={xi} t={t}: |tail|={} > env={}",
                        tail.norm(),
                        env.sum()
                    );
                }
            }
        }
    }

    #[test]
    fn envelope_values() {
        let pp = ProfileParams::new(2.0, -3.0, 1.0).unwrap();
        let env = tail_envelopes(0.7, 0.0, &pp, DELTA0).unwrap();
        assert_eq!(env.sum(), 0.0);

        let (t, xi) = (10.0, 0.5_f64);
        let env = tail_envelopes(t, xi, &pp, DELTA0).unwrap();
        let want = 3.0 * t * (-t * xi * xi / 2.0).exp() * xi.powi(4) / 1.0;
        assert!((env.phase_sin - want).abs() < 1e-14);
        assert!(env.dispersion >= 0.0 && env.mixed >= 0.0 && env.phase_cos >= 0.0);

        // δ₀⁴ ≥ 4m² must be refused.
        let small_m = ProfileParams::new(1.0, 1.0, 0.1).unwrap();
        assert!(tail_envelopes(1.0, 0.3, &small_m, 0.9).is_err());
    }

    #[test]
    fn moment_constants() {
        let (l, m) = moment_bound_constants();
        assert_eq!(m, 1.0);
        assert!((l - 0.724611).abs() < 1e-5, "L = {l}");
        // Independent oracle: dense scan over (0, 2π].
        let mut best: f64 = 0.0;
        for i in 1..=4_000_000 {
            let th = 2.0 * std::f64::consts::PI * i as f64 / 4_000_000.0;
            best = best.max((1.0 - th.cos()) / th);
        }
        assert!((l - best).abs() < 1e-8, "L = {l}, scan = {best}");
        // A sample point strictly below the supremum.
        assert!(2.0 / std::f64::consts::PI < l);
    }

    #[test]
    fn data_splitting_obeys_first_order_bounds() {
        let (l, m_const) = moment_bound_constants();
        for datum in [
            crate::catalog::Datum::gaussian(1.0, 1.0, 1),
            crate::catalog::Datum::shifted_gaussian(1.0, 1.0, -0.75),
            crate::catalog::Datum::zero_mean_odd(1.0, 1.0, 0.5),
        ] {
            let mom = datum.moments(1e-10).unwrap();
            for xi in [0.01, 0.1, 0.5, 1.0, 3.0, 10.0] {
                let (a, b) = datum.ab_split(xi);
                assert!(a.abs() <= l * xi * mom.l11 * (1.0 + 1e-9), "A bound at {xi}");
                assert!(b.abs() <= m_const * xi * mom.l11 * (1.0 + 1e-9), "B bound at {xi}");
                // |û(ξ) - P| ≤ (L+M)|ξ|‖·‖_{1,1}
                let hat = datum.hat(xi);
                let p = datum.mass();
                assert!((hat - p).norm() <= (l + m_const) * xi * mom.l11 * (1.0 + 1e-9));
            }
        }
    }
}
