//! Exact evolution of a single Fourier mode.
//!
//! Applying the Fourier transform to u_tt - Δu + m²u - Δu_t = 0 reduces it,
//! for each frequency magnitude σ = |ξ|, to the damped oscillator
//!
//!   û_tt + σ² û_t + (σ² + m²) û = 0,   û(0) = û₀,  û_t(0) = û₁.
//!
//! The characteristic roots are σ_{1,2} = (-σ² ± √(σ⁴ - 4(σ²+m²)))/2 and
//! the solution is û = φ(t)û₁ + ψ(t)û₀ with the divided-difference kernels
//! φ = (e^{σ₁t}-e^{σ₂t})/(σ₁-σ₂), ψ = (σ₁e^{σ₂t}-σ₂e^{σ₁t})/(σ₁-σ₂).
//! Both are evaluated through a single real kernel s = sinh(νt)/ν with
//! ν² = σ⁴/4 - (σ²+m²), which covers the oscillatory (ν imaginary),
//! critical (ν = 0) and overdamped (ν real) regimes without cancellation;
//! a Taylor series takes over near the critical frequency where the
//! divided difference degenerates.

use num_complex::Complex64;
use serde::Serialize;

/// Discriminant D = 4(σ² + m²) - σ⁴; its sign separates mode regimes.
pub fn discriminant(xi_mag: f64, m: f64) -> f64 {
    let s2 = xi_mag * xi_mag;
    4.0 * (s2 + m * m) - s2 * s2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// D > 0: complex-conjugate roots, damped oscillation.
    Oscillatory,
    /// D ≈ 0: double real root.
    Critical,
    /// D < 0: two real roots, pure decay.
    Overdamped,
}

/// Characteristic roots of one mode.
#[derive(Debug, Clone, Copy)]
pub struct CharRoots {
    pub sigma1: Complex64,
    pub sigma2: Complex64,
    pub regime: Regime,
    /// The discriminant D = 4(σ²+m²) - σ⁴.
    pub d: f64,
}

/// Relative tolerance for classifying D ≈ 0, scaled by (σ²+m²+1)².
const REGIME_TOL: f64 = 1e-10;

/// Characteristic roots with the principal square root; the smaller
/// overdamped root comes from the product σ₁σ₂ = σ²+m² to avoid the
/// cancellation in the quadratic formula.
pub fn char_roots(xi_mag: f64, m: f64) -> CharRoots {
    let s2 = xi_mag * xi_mag;
    let e = s2 + m * m;
    let d = discriminant(xi_mag, m);
    let scale = (e + 1.0) * (e + 1.0);
    if d.abs() <= REGIME_TOL * scale {
        let r = Complex64::new(-s2 / 2.0, 0.0);
        return CharRoots {
            sigma1: r,
            sigma2: r,
            regime: Regime::Critical,
            d,
        };
    }
    if d > 0.0 {
        let b = d.sqrt() / 2.0;
        CharRoots {
            sigma1: Complex64::new(-s2 / 2.0, b),
            sigma2: Complex64::new(-s2 / 2.0, -b),
            regime: Regime::Oscillatory,
            d,
        }
    } else {
        let a = (-d).sqrt() / 2.0;
        let slow = -e / (s2 / 2.0 + a);
        let fast = -(s2 / 2.0 + a);
        CharRoots {
            sigma1: Complex64::new(slow, 0.0),
            sigma2: Complex64::new(fast, 0.0),
            regime: Regime::Overdamped,
            d,
        }
    }
}

/// The two propagator kernels and their time derivatives, all real.
#[derive(Debug, Clone, Copy)]
pub struct Kernels {
    /// φ(t): multiplies û₁.
    pub phi: f64,
    /// ψ(t): multiplies û₀.
    pub psi: f64,
    /// φ'(t).
    pub phi_t: f64,
    /// ψ'(t) = -(σ²+m²) φ(t).
    pub psi_t: f64,
}

impl Kernels {
    /// The pure cosine part e^{-tσ²/2} cos(t√D/2) of ψ (exactly
    /// ψ + μφ with μ = -σ²/2, in every regime).
    pub fn cos_part(&self, xi_mag: f64) -> f64 {
        self.psi - 0.5 * xi_mag * xi_mag * self.phi
    }
}

/// Below this value of |ν²|t² the divided differences switch to their
/// Taylor series; at 1e-8 the dropped terms are O(1e-17).
const SERIES_THRESHOLD: f64 = 1e-8;

/// Evaluate φ, ψ, φ', ψ' at time t for frequency magnitude σ and mass m.
pub fn kernels(t: f64, xi_mag: f64, m: f64) -> Kernels {
    debug_assert!(t >= 0.0, "time must be nonnegative");
    let s2 = xi_mag * xi_mag;
    let e = s2 + m * m;
    let mu = -s2 / 2.0;
    // ν² = μ² - E = -D/4
    let q = mu * mu - e;

    if q.abs() * t * t < SERIES_THRESHOLD {
        // s = sinh(νt)/ν = t(1 + w/6 + w²/120 + ...), w = ν²t²
        let w = q * t * t;
        let s = t * (1.0 + w / 6.0 + w * w / 120.0);
        let c = 1.0 + w / 2.0 + w * w / 24.0;
        let em = (mu * t).exp();
        let phi = em * s;
        return Kernels {
            phi,
            psi: em * (c - mu * s),
            phi_t: em * (mu * s + c),
            psi_t: -e * phi,
        };
    }

    if q < 0.0 {
        // Oscillatory: ν = ib, s = sin(bt)/b, matching the closed forms
        // 2e^{-tσ²/2} sin(t√D/2)/√D and its cosine companion.
        let b = (-q).sqrt();
        let s = (b * t).sin() / b;
        let c = (b * t).cos();
        let em = (mu * t).exp();
        let phi = em * s;
        Kernels {
            phi,
            psi: em * (c - mu * s),
            phi_t: em * (mu * s + c),
            psi_t: -e * phi,
        }
    } else {
        // Overdamped: everything is expressed through e^{σ₁t} (the slow
        // root) and dec = e^{(σ₂-σ₁)t} ∈ (0,1], so nothing overflows.
        let a = q.sqrt();
        let sig1 = -e / (s2 / 2.0 + a); // stable slow root
        let sig2 = mu - a;
        let e1 = (sig1 * t).exp();
        let dec = (-2.0 * a * t).exp();
        let phi = e1 * (1.0 - dec) / (2.0 * a);
        Kernels {
            phi,
            psi: e1 * ((a - mu) + (a + mu) * dec) / (2.0 * a),
            phi_t: e1 * (sig1 - sig2 * dec) / (2.0 * a),
            psi_t: -e * phi,
        }
    }
}

/// The pair (û, û_t) for one frequency magnitude at one time.
#[derive(Debug, Clone, Copy)]
pub struct ModeState {
    pub u_hat: Complex64,
    pub ut_hat: Complex64,
    pub t: f64,
    pub xi_mag: f64,
}

/// Evolve a mode from (û₀, û₁) to time t through the closed form.
pub fn evolve_mode(
    t: f64,
    xi_mag: f64,
    m: f64,
    u0_hat: Complex64,
    u1_hat: Complex64,
) -> ModeState {
    let k = kernels(t, xi_mag, m);
    ModeState {
        u_hat: k.phi * u1_hat + k.psi * u0_hat,
        ut_hat: k.phi_t * u1_hat + k.psi_t * u0_hat,
        t,
        xi_mag,
    }
}

/// Residual of the mode equation at time t, with û_tt from a centered
/// second difference of the closed form at spacing h, normalized by
/// (σ² + m² + 1)(|û₀| + |û₁|).
pub fn ode_residual(
    xi_mag: f64,
    m: f64,
    u0_hat: Complex64,
    u1_hat: Complex64,
    t: f64,
    h: f64,
) -> f64 {
    assert!(h > 0.0 && t >= h, "need t >= h > 0");
    let e = xi_mag * xi_mag + m * m;
    let um = evolve_mode(t - h, xi_mag, m, u0_hat, u1_hat);
    let u = evolve_mode(t, xi_mag, m, u0_hat, u1_hat);
    let up = evolve_mode(t + h, xi_mag, m, u0_hat, u1_hat);
    let utt = (up.u_hat - 2.0 * u.u_hat + um.u_hat) / (h * h);
    let res = (utt + e * u.u_hat + xi_mag * xi_mag * u.ut_hat).norm();
    let scale = (e + 1.0) * (u0_hat.norm() + u1_hat.norm());
    if scale == 0.0 {
        0.0
    } else {
        res / scale
    }
}

/// Step size for the residual probe: balances O(h²) truncation against
/// rounding, shrinking with frequency because the fast root scales as σ².
pub fn residual_step(t: f64, xi_mag: f64) -> f64 {
    (1e-4 / (1.0 + 0.1 * xi_mag * xi_mag)).min(t)
}
