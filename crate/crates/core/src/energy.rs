//! Fourier-space energy method with explicit constants.
//!
//! For each mode the conserved-plus-dissipated quantities are
//!
//!   E₀ = ½|û_t|² + ½(σ²+m²)|û|²,
//!   E  = E₀ + βρ(σ) Re(û_t û̄) + ½βρ(σ)σ²|û|²,
//!   F  = σ²|û_t|² + βρ(σ)(σ²+m²)|û|²,
//!   R  = βρ(σ)|û_t|²,
//!
//! with the key weight ρ(σ) = σ²/(1+σ²). They satisfy dE₀/dt + σ²|û_t|² = 0
//! and dE/dt + F = R, and for β ∈ (0,1) the chain R ≤ βF, ρE ≤ MF,
//! (1-β)E₀ ≤ E ≤ (1+2β)E₀ yields the pointwise exponential certificate
//! E₀(t) ≤ C e^{-αρ(σ)t} E₀(0) with M = 1/(2β)+β/2+3/2, α = (1-β)/M and
//! C = (1+2β)/(1-β).

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{DatumPair, ModelParams};
use crate::mode::{evolve_mode, ModeState};

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("beta must lie in (0, 1), got {0}")]
    BadBeta(f64),
}

/// The frequency weight ρ(σ) = σ²/(1+σ²), increasing from 0 to 1.
pub fn rho(xi_mag: f64) -> f64 {
    let s2 = xi_mag * xi_mag;
    s2 / (1.0 + s2)
}

/// The four energy functionals of one mode state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyBreakdown {
    pub e0: f64,
    pub e: f64,
    pub f: f64,
    pub r: f64,
    pub rho: f64,
}

/// Evaluate E₀, E, F, R at a mode state.
pub fn energy_breakdown(state: &ModeState, m: f64, beta: f64) -> EnergyBreakdown {
    let s2 = state.xi_mag * state.xi_mag;
    let e_disp = s2 + m * m;
    let rho = rho(state.xi_mag);
    let ut2 = state.ut_hat.norm_sqr();
    let u2 = state.u_hat.norm_sqr();
    let cross = (state.ut_hat * state.u_hat.conj()).re;
    let e0 = 0.5 * ut2 + 0.5 * e_disp * u2;
    EnergyBreakdown {
        e0,
        e: e0 + beta * rho * cross + 0.5 * beta * rho * s2 * u2,
        f: s2 * ut2 + beta * rho * e_disp * u2,
        r: beta * rho * ut2,
        rho,
    }
}

/// Explicit constants of the pointwise decay estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayCertificate {
    pub beta: f64,
    /// M with ρE ≤ MF.
    pub m_const: f64,
    /// Decay rate α = (1-β)/M in E₀(t) ≤ C e^{-αρt} E₀(0).
    pub alpha: f64,
    /// Prefactor C = (1+2β)/(1-β).
    pub c_const: f64,
}

/// Assemble the certificate constants for a given β ∈ (0, 1).
pub fn certificate(beta: f64) -> Result<DecayCertificate, EnergyError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(EnergyError::BadBeta(beta));
    }
    let m_const = 1.0 / (2.0 * beta) + beta / 2.0 + 1.5;
    Ok(DecayCertificate {
        beta,
        m_const,
        alpha: (1.0 - beta) / m_const,
        c_const: (1.0 + 2.0 * beta) / (1.0 - beta),
    })
}

/// Outcome of checking E₀(t,σ) ≤ C e^{-αρ(σ)t} E₀(0,σ) over a grid.
///
/// `slack` is log(bound) - log(value); negative slack is a violation.
#[derive(Debug, Clone, Serialize)]
pub struct DecayMarginReport {
    /// Smallest finite slack over the grid.
    pub min_slack: f64,
    /// Grid point attaining the minimum.
    pub worst: (f64, f64),
    /// Points where the bound fails, with their slack.
    pub violations: Vec<(f64, f64, f64)>,
    /// Number of grid points checked.
    pub points: usize,
}

impl DecayMarginReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the pointwise decay certificate on a (t, σ) grid against exact
/// mode solutions of the cataloged pair. Violations are collected, not
/// thrown.
pub fn check_pointwise_decay(
    params: &ModelParams,
    pair: &DatumPair,
    t_grid: &[f64],
    xi_grid: &[f64],
) -> Result<DecayMarginReport, EnergyError> {
    let cert = certificate(params.beta)?;
    Ok(check_pointwise_decay_with(&cert, params, pair, t_grid, xi_grid))
}

/// Same check with an explicit certificate (used for fault injection).
pub fn check_pointwise_decay_with(
    cert: &DecayCertificate,
    params: &ModelParams,
    pair: &DatumPair,
    t_grid: &[f64],
    xi_grid: &[f64],
) -> DecayMarginReport {
    let mut min_slack = f64::INFINITY;
    let mut worst = (0.0, 0.0);
    let mut violations = Vec::new();
    let mut points = 0;
    for &xi in xi_grid {
        let u0 = pair.u0.hat(xi);
        let u1 = pair.u1.hat(xi);
        let e0_init = energy_breakdown(&evolve_mode(0.0, xi, params.m, u0, u1), params.m, params.beta).e0;
        for &t in t_grid {
            points += 1;
            let st = evolve_mode(t, xi, params.m, u0, u1);
            let e0 = energy_breakdown(&st, params.m, params.beta).e0;
            let bound = cert.c_const * (-cert.alpha * rho(xi) * t).exp() * e0_init;
            let slack = if e0 == 0.0 {
                f64::INFINITY
            } else if bound == 0.0 {
                f64::NEG_INFINITY
            } else {
                bound.ln() - e0.ln()
            };
            if slack < min_slack {
                min_slack = slack;
                worst = (t, xi);
            }
            if slack < 0.0 {
                violations.push((t, xi, slack));
            }
        }
    }
    DecayMarginReport {
        min_slack,
        worst,
        violations,
        points,
    }
}

/// Residual of dE₀/dt + σ²|û_t|² = 0 with the derivative from a centered
/// difference at spacing h (one-sided near t = 0), normalized by E₀(0)+1.
pub fn energy_identity_residual(
    xi_mag: f64,
    m: f64,
    pair: &DatumPair,
    t: f64,
    h: f64,
) -> f64 {
    assert!(h > 0.0, "spacing must be positive");
    let u0 = pair.u0.hat(xi_mag);
    let u1 = pair.u1.hat(xi_mag);
    let e0_at = |s: f64| {
        let st = evolve_mode(s, xi_mag, m, u0, u1);
        0.5 * st.ut_hat.norm_sqr() + 0.5 * (xi_mag * xi_mag + m * m) * st.u_hat.norm_sqr()
    };
    let de0 = if t >= h {
        (e0_at(t + h) - e0_at(t - h)) / (2.0 * h)
    } else {
        // second-order forward difference
        (-3.0 * e0_at(t) + 4.0 * e0_at(t + h) - e0_at(t + 2.0 * h)) / (2.0 * h)
    };
    let st = evolve_mode(t, xi_mag, m, u0, u1);
    (de0 + xi_mag * xi_mag * st.ut_hat.norm_sqr()).abs() / (e0_at(0.0) + 1.0)
}

/// Derivative spacing used by the identity checks: h = 1e-4 (1 + t),
/// balancing truncation against rounding in double precision.
pub fn identity_step(t: f64) -> f64 {
    1e-4 * (1.0 + t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{pairs, validate_params, RawParams};
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn rho_examples() {
        assert_eq!(rho(0.0), 0.0);
        assert_eq!(rho(1.0), 0.5);
        assert!((rho(3.0_f64.sqrt()) - 0.75).abs() < 1e-15);
        assert!(rho(1e7) < 1.0);
    }

    #[test]
    fn breakdown_direct_substitution() {
        // û_t = 1, û = 0: E₀ = ½, R = βρ, F = σ².
        for (xi, m, beta) in [(0.7, 1.0, 0.1), (3.0, 0.0, 0.4)] {
            let st = ModeState {
                u_hat: Complex64::ZERO,
                ut_hat: Complex64::ONE,
                t: 0.0,
                xi_mag: xi,
            };
            let b = energy_breakdown(&st, m, beta);
            assert!((b.e0 - 0.5).abs() < 1e-15);
            assert!((b.r - beta * rho(xi)).abs() < 1e-15);
            assert!((b.f - xi * xi).abs() < 1e-12);
        }
        // û = 1, û_t = 0, σ = 1, m = 1, β = 0.1: E₀ = 1, F = 0.1.
        let st = ModeState {
            u_hat: Complex64::ONE,
            ut_hat: Complex64::ZERO,
            t: 0.0,
            xi_mag: 1.0,
        };
        let b = energy_breakdown(&st, 1.0, 0.1);
        assert!((b.e0 - 1.0).abs() < 1e-15);
        assert!((b.f - 0.1).abs() < 1e-15);
    }

    #[test]
    fn zero_frequency_collapses_to_e0() {
        let st = ModeState {
            u_hat: Complex64::new(0.3, -0.2),
            ut_hat: Complex64::new(-1.0, 0.4),
            t: 2.0,
            xi_mag: 0.0,
        };
        let b = energy_breakdown(&st, 1.3, 0.25);
        assert_eq!(b.e, b.e0);
        assert_eq!(b.f, 0.0);
        assert_eq!(b.r, 0.0);
    }

    #[test]
    fn certificate_constants() {
        let c = certificate(0.1).unwrap();
        assert!((c.m_const - 6.55).abs() < 1e-14);
        assert!((c.alpha - 0.9 / 6.55).abs() < 1e-14);
        assert!((c.c_const - 1.2 / 0.9).abs() < 1e-14);

        // M = 1/(2β) + β/2 + 3/2 = 1 + 0.25 + 1.5 at β = 1/2.
        let c = certificate(0.5).unwrap();
        assert!((c.m_const - 2.75).abs() < 1e-14);
        assert!((c.alpha - 0.5 / 2.75).abs() < 1e-14);
        assert!((c.c_const - 4.0).abs() < 1e-14);

        // The certificate degenerates as β → 1.
        let c = certificate(0.999).unwrap();
        assert!(c.c_const > 1000.0);
        assert!(certificate(0.0).is_err());
        assert!(certificate(1.0).is_err());
        assert!(certificate(1.5).is_err());
    }

    proptest! {
        #[test]
        fn inequality_chain_on_random_states(
            xi in 0.0_f64..20.0,
            m in prop::sample::select(vec![0.0_f64, 0.5, 1.0, 2.0]),
            beta in 0.01_f64..0.99,
            re0 in -3.0_f64..3.0, im0 in -3.0_f64..3.0,
            re1 in -3.0_f64..3.0, im1 in -3.0_f64..3.0,
        ) {
            let st = ModeState {
                u_hat: Complex64::new(re0, im0),
                ut_hat: Complex64::new(re1, im1),
                t: 0.0,
                xi_mag: xi,
            };
            let b = energy_breakdown(&st, m, beta);
            let cert = certificate(beta).unwrap();
            let tol = 1e-12 * (1.0 + b.e0 + b.f);
            // R ≤ βF (reduces to ρ ≤ σ²)
            prop_assert!(b.r <= beta * b.f + tol);
            // ρE ≤ MF
            prop_assert!(b.rho * b.e <= cert.m_const * b.f + tol);
            // (1-β)E₀ ≤ E ≤ (1+2β)E₀
            prop_assert!((1.0 - beta) * b.e0 <= b.e + tol);
            prop_assert!(b.e <= (1.0 + 2.0 * beta) * b.e0 + tol);
        }
    }

    #[test]
    fn identity_residual_zero_cases() {
        let pair = pairs::standard(1);
        // ρ(0) = 0 and σ = 0 make E₀ constant in t.
        assert!(energy_identity_residual(0.0, 1.0, &pair, 3.0, 1e-4) < 1e-10);
        let zero = pairs::velocity_only(1);
        let zero = DatumPair::new(zero.u0.clone(), crate::catalog::Datum::zero(1)).unwrap();
        assert!(energy_identity_residual(1.0, 1.0, &zero, 2.0, 1e-4) == 0.0);
    }

    #[test]
    fn identity_residual_small_on_samples() {
        let pair = pairs::standard(1);
        for (xi, t) in [(1.0, 2.0), (0.3, 10.0), (4.0, 0.5), (1.0, 0.0)] {
            let r = energy_identity_residual(xi, 1.0, &pair, t, identity_step(t).min(1e-4));
            assert!(r < 1e-6, "xi={xi} t={t}: {r}");
        }
    }

    #[test]
    fn pointwise_decay_holds_on_grid() {
        let params = validate_params(RawParams {
            n: 1,
            m: 1.0,
            beta: 0.1,
            delta0: None,
        })
        .unwrap();
        let pair = pairs::standard(1);
        let t_grid: Vec<f64> = (0..=25).map(|i| 2.0 * i as f64).collect();
        let xi_grid: Vec<f64> = (0..=50).map(|i| 0.2 * i as f64).collect();
        let rep = check_pointwise_decay(&params, &pair, &t_grid, &xi_grid).unwrap();
        assert!(rep.passed(), "violations: {:?}", rep.violations);
        assert!(rep.min_slack >= 0.0);

        // A pathological β still gives a valid (weak) bound.
        let params = validate_params(RawParams {
            n: 1,
            m: 1.0,
            beta: 0.999,
            delta0: None,
        })
        .unwrap();
        let rep = check_pointwise_decay(&params, &pair, &t_grid, &xi_grid).unwrap();
        assert!(rep.passed());
    }

    #[test]
    fn e0_is_nonincreasing() {
        let pair = pairs::shifted();
        for xi in [0.0, 0.4, 1.0, 3.0, 12.0] {
            let u0 = pair.u0.hat(xi);
            let u1 = pair.u1.hat(xi);
            let mut prev = f64::INFINITY;
            for i in 0..=100 {
                let t = 0.5 * i as f64;
                let st = evolve_mode(t, xi, 1.0, u0, u1);
                let e0 = energy_breakdown(&st, 1.0, 0.1).e0;
                assert!(e0 <= prev * (1.0 + 1e-12) + 1e-300, "xi={xi} t={t}");
                prev = e0;
            }
        }
    }
}
