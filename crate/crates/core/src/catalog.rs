//! Model parameters and the initial-data catalog.
//!
//! Initial data are finite mixtures of Gaussians c·e^{-a|x-x₀|²} (shifts
//! only on the line, n = 1). The Fourier transform is taken in the
//! unnormalized convention φ̂(ξ) = ∫ e^{-ix·ξ} φ(x) dx, so a mixture has
//! the closed form Σ c (π/a)^{n/2} e^{-|ξ|²/(4a)} e^{-iξ·x₀} and the zeroth
//! moment P = ∫ φ dx equals φ̂(0). With this convention the splitting
//! φ̂(ξ) = A(ξ) - iB(ξ) + P with A = ∫(cos(x·ξ)-1)φ and B = ∫ sin(x·ξ)φ
//! holds without stray (2π)^{n/2} factors; Plancherel picks up (2π)^{-n}
//! in the norms module instead.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{self, IntegrandShape, QuadError, QuadratureSpec};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("invalid parameter `{field}`: {msg}")]
    BadParams { field: &'static str, msg: String },
    #[error("invalid datum: {0}")]
    BadDatum(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Validated model parameters for u_tt - Δu + m²u - Δu_t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// Space dimension n ≥ 1.
    pub n: u32,
    /// Mass m ≥ 0.
    pub m: f64,
    /// Energy-method parameter β ∈ (0, 1).
    pub beta: f64,
    /// Low-frequency cutoff δ₀ > 0; for m > 0 it satisfies δ₀⁴ < 4m²
    /// and δ₀ ≤ 1 so the mode problem stays oscillatory below the cutoff.
    pub delta0: f64,
}

/// Unvalidated parameters as read from a config.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub n: u32,
    pub m: f64,
    pub beta: f64,
    #[serde(default)]
    pub delta0: Option<f64>,
}

/// Check parameter invariants, filling δ₀ = min(1, √(2m)/2) when absent
/// (m > 0) or δ₀ = 1/2 for the massless case.
pub fn validate_params(raw: RawParams) -> Result<ModelParams, CatalogError> {
    if raw.n < 1 {
        return Err(CatalogError::BadParams {
            field: "n",
            msg: format!("dimension must be at least 1, got {}", raw.n),
        });
    }
    if !(raw.m >= 0.0) || !raw.m.is_finite() {
        return Err(CatalogError::BadParams {
            field: "m",
            msg: format!("mass must be finite and nonnegative, got {}", raw.m),
        });
    }
    if !(raw.beta > 0.0 && raw.beta < 1.0) {
        return Err(CatalogError::BadParams {
            field: "beta",
            msg: format!("must lie in (0, 1), got {}", raw.beta),
        });
    }
    let delta0 = match raw.delta0 {
        Some(d) => d,
        None if raw.m > 0.0 => ((2.0 * raw.m).sqrt() / 2.0).min(1.0),
        None => 0.5,
    };
    if !(delta0 > 0.0) || !delta0.is_finite() {
        return Err(CatalogError::BadParams {
            field: "delta0",
            msg: format!("cutoff must be positive, got {delta0}"),
        });
    }
    if raw.m > 0.0 {
        if delta0.powi(4) >= 4.0 * raw.m * raw.m {
            return Err(CatalogError::BadParams {
                field: "delta0",
                msg: format!(
                    "requires delta0^4 < 4m^2, got {:.6} >= {:.6}",
                    delta0.powi(4),
                    4.0 * raw.m * raw.m
                ),
            });
        }
        if delta0 > 1.0 {
            return Err(CatalogError::BadParams {
                field: "delta0",
                msg: format!("cutoff must not exceed 1 when m > 0, got {delta0}"),
            });
        }
    }
    Ok(ModelParams {
        n: raw.n,
        m: raw.m,
        beta: raw.beta,
        delta0,
    })
}

/// One Gaussian component c·e^{-a|x-x₀|²}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianTerm {
    /// Amplitude.
    pub c: f64,
    /// Width parameter, a > 0.
    pub a: f64,
    /// Center along the line; must be 0 for n ≥ 2.
    #[serde(default)]
    pub x0: f64,
}

impl GaussianTerm {
    pub fn centered(c: f64, a: f64) -> Self {
        Self { c, a, x0: 0.0 }
    }

    pub fn shifted(c: f64, a: f64, x0: f64) -> Self {
        Self { c, a, x0 }
    }

    /// Zeroth moment of this term: c (π/a)^{n/2}.
    fn mass(&self, n: u32) -> f64 {
        self.c * (PI / self.a).powf(n as f64 / 2.0)
    }
}

/// A finite Gaussian mixture in dimension n; an empty term list is the
/// zero datum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Datum {
    terms: Vec<GaussianTerm>,
    n: u32,
}

impl Datum {
    pub fn new(terms: Vec<GaussianTerm>, n: u32) -> Result<Self, CatalogError> {
        if n < 1 {
            return Err(CatalogError::BadDatum(format!(
                "dimension must be at least 1, got {n}"
            )));
        }
        for (i, t) in terms.iter().enumerate() {
            if !(t.a > 0.0) || !t.a.is_finite() {
                return Err(CatalogError::BadDatum(format!(
                    "term {i}: width must be positive and finite, got {}",
                    t.a
                )));
            }
            if !t.c.is_finite() || !t.x0.is_finite() {
                return Err(CatalogError::BadDatum(format!(
                    "term {i}: non-finite amplitude or center"
                )));
            }
            if n >= 2 && t.x0 != 0.0 {
                return Err(CatalogError::BadDatum(format!(
                    "term {i}: centers must be 0 for n >= 2, got {}",
                    t.x0
                )));
            }
        }
        Ok(Self { terms, n })
    }

    pub fn zero(n: u32) -> Self {
        Self { terms: Vec::new(), n }
    }

    pub fn gaussian(c: f64, a: f64, n: u32) -> Self {
        Self::new(vec![GaussianTerm::centered(c, a)], n).expect("valid centered gaussian")
    }

    pub fn shifted_gaussian(c: f64, a: f64, x0: f64) -> Self {
        Self::new(vec![GaussianTerm::shifted(c, a, x0)], 1).expect("valid shifted gaussian")
    }

    /// Two centered Gaussians of widths 1 and 2 with amplitudes balanced
    /// so the zeroth moment vanishes exactly.
    pub fn zero_mean_centered(n: u32) -> Self {
        let c2 = -(2.0_f64).powf(n as f64 / 2.0);
        Self::new(
            vec![GaussianTerm::centered(1.0, 1.0), GaussianTerm::centered(c2, 2.0)],
            n,
        )
        .expect("valid zero-mean mixture")
    }

    /// Antisymmetric two-Gaussian difference on the line; zero mean with a
    /// first-order (odd) Fourier component, so B(ξ) grows linearly at 0.
    pub fn zero_mean_odd(c: f64, a: f64, shift: f64) -> Self {
        Self::new(
            vec![
                GaussianTerm::shifted(c, a, shift),
                GaussianTerm::shifted(-c, a, -shift),
            ],
            1,
        )
        .expect("valid odd mixture")
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest center magnitude in the mixture (0 for centered data).
    fn max_shift(&self) -> f64 {
        self.terms.iter().map(|t| t.x0.abs()).fold(0.0, f64::max)
    }

    /// Fourier transform φ̂(ξ) = Σ c (π/a)^{n/2} e^{-ξ²/(4a)} e^{-iξx₀}.
    ///
    /// `xi` is the signed coordinate along a line through the origin; for
    /// centered data the value is real and depends only on |ξ|.
    pub fn hat(&self, xi: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let radial = t.mass(self.n) * (-xi * xi / (4.0 * t.a)).exp();
            acc += radial * Complex64::new(0.0, -xi * t.x0).exp();
        }
        acc
    }

    /// Decreasing upper bound for |φ̂| at large |ξ|.
    pub fn hat_envelope(&self, sigma: f64) -> f64 {
        let a_max = self
            .terms
            .iter()
            .map(|t| t.a)
            .fold(f64::NEG_INFINITY, f64::max);
        if !a_max.is_finite() {
            return 0.0;
        }
        let scale: f64 = self.terms.iter().map(|t| t.mass(self.n).abs()).sum();
        scale * (-sigma * sigma / (4.0 * a_max)).exp()
    }

    /// Physical-space value at radius r along the shift axis (signed for
    /// n = 1).
    fn value_on_axis(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.c * (-t.a * (x - t.x0) * (x - t.x0)).exp())
            .sum()
    }

    /// Zeroth moment P = ∫ φ dx, exact.
    pub fn mass(&self) -> f64 {
        self.terms.iter().map(|t| t.mass(self.n)).sum()
    }

    /// Splitting φ̂(ξ) = A(ξ) - iB(ξ) + P: returns (A, B).
    ///
    /// A(ξ) = ∫ (cos(x·ξ) - 1) φ dx, B(ξ) = ∫ sin(x·ξ) φ dx; for centered
    /// (even) data B vanishes identically.
    pub fn ab_split(&self, xi: f64) -> (f64, f64) {
        let hat = self.hat(xi);
        (hat.re - self.mass(), -hat.im)
    }

    /// Integral norms by radial quadrature with absolute error ≤ tol.
    pub fn moments(&self, tol: f64) -> Result<DatumMoments, CatalogError> {
        assert!(tol > 0.0, "tolerance must be positive");
        if self.is_zero() {
            return Ok(DatumMoments {
                p: 0.0,
                l1: 0.0,
                l11: 0.0,
                l2: 0.0,
                h1: 0.0,
            });
        }
        let spec = QuadratureSpec {
            rel_tol: 1e-12,
            abs_tol: tol,
            ..QuadratureSpec::default()
        };
        let p = self.mass();

        let a_min = self.terms.iter().map(|t| t.a).fold(f64::INFINITY, f64::min);
        let shift = self.max_shift();
        let amp_sum: f64 = self.terms.iter().map(|t| t.c.abs()).sum();
        let phys_env = move |r: f64| {
            let d = (r - shift).max(0.0);
            amp_sum * (-a_min * d * d).exp()
        };

        // |φ| and (1+|x|)|φ| in one pass; n = 1 folds both half-lines.
        let n = self.n;
        let abs_pair = |sigma: f64| -> [f64; 2] {
            let v = if n == 1 {
                0.5 * (self.value_on_axis(sigma).abs() + self.value_on_axis(-sigma).abs())
            } else {
                self.value_on_axis(sigma).abs()
            };
            [v, (1.0 + sigma) * v]
        };
        let weighted_env = |r: f64| (1.0 + r) * phys_env(r);
        let q = quad::radial_integral_vec(
            abs_pair,
            self.n,
            &spec,
            &IntegrandShape {
                envelope: Some(&weighted_env),
                phase_rate: None,
                fine_until: None,
            },
        )?;
        let same_sign = self.terms.iter().all(|t| t.c >= 0.0)
            || self.terms.iter().all(|t| t.c <= 0.0);
        // With one sign the L¹ norm has the closed form Σ|c|(π/a)^{n/2}.
        let l1 = if same_sign {
            self.terms.iter().map(|t| t.mass(self.n).abs()).sum()
        } else {
            q.value[0]
        };
        let l11 = q.value[1];

        // ‖φ‖² and ‖∇φ‖² via Plancherel on the (even) |φ̂|.
        let hat_sq = |sigma: f64| -> [f64; 2] {
            let h = self.hat(sigma).norm_sqr();
            [h, sigma * sigma * h]
        };
        let hat_env = |sigma: f64| {
            let e = self.hat_envelope(sigma);
            (1.0 + sigma * sigma) * e * e
        };
        let qh = quad::radial_integral_vec(
            hat_sq,
            self.n,
            &spec,
            &IntegrandShape {
                envelope: Some(&hat_env),
                phase_rate: None,
                fine_until: None,
            },
        )?;
        let plancherel = (2.0 * PI).powi(-(self.n as i32));
        let l2sq = plancherel * qh.value[0];
        let gradsq = plancherel * qh.value[1];

        Ok(DatumMoments {
            p,
            l1,
            l11,
            l2: l2sq.max(0.0).sqrt(),
            h1: (l2sq + gradsq).max(0.0).sqrt(),
        })
    }
}

/// Integral norms of one datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatumMoments {
    /// Zeroth moment ∫ φ dx.
    pub p: f64,
    /// ∫ |φ| dx.
    pub l1: f64,
    /// ∫ (1+|x|) |φ| dx.
    pub l11: f64,
    /// L² norm.
    pub l2: f64,
    /// H¹ norm.
    pub h1: f64,
}

/// Initial position/velocity pair (u₀, u₁).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatumPair {
    pub u0: Datum,
    pub u1: Datum,
}

impl DatumPair {
    pub fn new(u0: Datum, u1: Datum) -> Result<Self, CatalogError> {
        if u0.n() != u1.n() {
            return Err(CatalogError::BadDatum(format!(
                "u0 and u1 disagree on dimension: {} vs {}",
                u0.n(),
                u1.n()
            )));
        }
        Ok(Self { u0, u1 })
    }

    pub fn n(&self) -> u32 {
        self.u0.n()
    }

    /// Zeroth moments (P₀, P₁).
    pub fn masses(&self) -> (f64, f64) {
        (self.u0.mass(), self.u1.mass())
    }

    /// Combined envelope bound for the conserved part of the mode energy:
    /// ½|û₁|² + ½(σ²+m²)|û₀|² ≤ env(σ) pointwise.
    pub fn energy_envelope(&self, m: f64) -> impl Fn(f64) -> f64 + '_ {
        move |sigma: f64| {
            let b0 = self.u0.hat_envelope(sigma);
            let b1 = self.u1.hat_envelope(sigma);
            0.5 * b1 * b1 + 0.5 * (sigma * sigma + m * m) * b0 * b0
        }
    }
}

/// Standard data pairs exercised by the verification suites.
pub mod pairs {
    use super::*;

    /// Centered unit Gaussians for both u₀ and u₁ (P₀, P₁ ≠ 0).
    pub fn standard(n: u32) -> DatumPair {
        DatumPair::new(Datum::gaussian(1.0, 1.0, n), Datum::gaussian(1.0, 1.0, n))
            .expect("valid pair")
    }

    /// u₀ = 0, u₁ a centered Gaussian: P₀ = 0, P₁ = π^{n/2}.
    pub fn velocity_only(n: u32) -> DatumPair {
        DatumPair::new(Datum::zero(n), Datum::gaussian(1.0, 1.0, n)).expect("valid pair")
    }

    /// Shifted Gaussians on the line; both B₀ and B₁ are nonzero, so the
    /// first-order imaginary part of the data splitting is exercised.
    pub fn shifted() -> DatumPair {
        DatumPair::new(
            Datum::shifted_gaussian(1.0, 1.0, 0.5),
            Datum::shifted_gaussian(1.0, 1.0, -0.75),
        )
        .expect("valid pair")
    }

    /// Zero-mean data: P₀ = P₁ = 0 exactly. On the line the mixtures are
    /// antisymmetric (B linear at ξ = 0); in higher dimensions centered
    /// differences (A quadratic at ξ = 0).
    pub fn zero_mean(n: u32) -> DatumPair {
        if n == 1 {
            DatumPair::new(
                Datum::zero_mean_odd(1.0, 1.0, 0.5),
                Datum::zero_mean_odd(1.0, 1.0, 0.75),
            )
            .expect("valid pair")
        } else {
            DatumPair::new(Datum::zero_mean_centered(n), Datum::zero_mean_centered(n))
                .expect("valid pair")
        }
    }
}
