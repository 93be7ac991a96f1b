//! Adaptive Gauss-Legendre quadrature for radial integrals in n dimensions.
//!
//! Integrals of the form |ω_n| ∫₀^∞ f(σ) σ^{n-1} dσ are evaluated by
//! panel-wise 15-point Gauss-Legendre with error estimates from panel
//! bisection. Oscillatory integrands supply a local phase rate so the
//! initial partition resolves every oscillation period; without that hint
//! a coarse panel can alias a rapidly oscillating integrand into something
//! smooth-looking that refinement never catches.

use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::LazyLock;

use thiserror::Error;

const GL_ORDER: usize = 15;

static GL15: LazyLock<[(f64, f64); GL_ORDER]> = LazyLock::new(|| {
    let mut out = [(0.0, 0.0); GL_ORDER];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut x = (PI * (i as f64 + 0.75) / (GL_ORDER as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_p_dp(GL_ORDER, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_p_dp(GL_ORDER, x);
        *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
    }
    out
});

/// Legendre polynomial P_n and its derivative at x, by the three-term
/// recurrence.
fn legendre_p_dp(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0_f64;
    let mut p1 = x;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// The 15-point Gauss-Legendre nodes and weights on [-1, 1].
pub fn gl15() -> &'static [(f64, f64); GL_ORDER] {
    &GL15
}

/// Surface measure of the unit sphere in R^n: |ω_n| = 2 π^{n/2} / Γ(n/2).
pub fn unit_sphere_area(n: u32) -> f64 {
    assert!(n >= 1, "dimension must be at least 1");
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Γ(k/2) for integer k ≥ 1 via the recurrence Γ(x+1) = x Γ(x).
fn gamma_half(k: u32) -> f64 {
    let mut val = if k % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut j = if k % 2 == 0 { 2 } else { 1 };
    while j + 2 <= k {
        val *= j as f64 / 2.0;
        j += 2;
    }
    val
}

/// Tolerances and budgets for one radial integral.
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    /// Relative tolerance on each component of the result.
    pub rel_tol: f64,
    /// Absolute tolerance floor.
    pub abs_tol: f64,
    /// Hard cap on the number of panels.
    pub max_panels: usize,
    /// Upper integration limit; `None` derives it from the envelope.
    pub truncation_radius: Option<f64>,
    /// Minimum Gauss-Legendre nodes per oscillation period when a phase
    /// rate is supplied.
    pub oscillation_resolution: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_panels: 20_000,
            truncation_radius: None,
            oscillation_resolution: 8.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(QuadError::BadSpec("tolerances must be positive".into()));
        }
        if self.max_panels < 1 {
            return Err(QuadError::BadSpec("max_panels must be at least 1".into()));
        }
        if !(self.oscillation_resolution >= 1.0) {
            return Err(QuadError::BadSpec(
                "oscillation_resolution must be at least 1".into(),
            ));
        }
        if let Some(r) = self.truncation_radius {
            if !(r > 0.0) {
                return Err(QuadError::BadSpec(
                    "truncation_radius must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("quadrature did not converge within {panels} panels (error {error:.3e}, target {target:.3e})")]
    NoConvergence { panels: usize, error: f64, target: f64 },
    #[error("unbounded integral needs a decaying envelope or an explicit truncation radius")]
    MissingEnvelope,
    #[error("envelope does not decay below the tolerance within a reachable radius")]
    EnvelopeDoesNotDecay,
    #[error("invalid quadrature spec: {0}")]
    BadSpec(String),
}

/// Value and error estimate of a vector-valued integral.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureVec<const K: usize> {
    pub value: [f64; K],
    pub error: [f64; K],
}

/// Scalar convenience form.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// Description of how an unbounded integrand decays and oscillates.
pub struct IntegrandShape<'a> {
    /// Decreasing upper bound for |f(σ)| at large σ, used to pick the
    /// truncation radius.
    pub envelope: Option<&'a dyn Fn(f64) -> f64>,
    /// Local bound on |dφ/dσ| for integrands containing cos φ(σ) / sin φ(σ).
    pub phase_rate: Option<&'a dyn Fn(f64) -> f64>,
    /// Beyond this point the integrand is known to be negligible and the
    /// initial partition stops resolving oscillation periods. Purely a
    /// resolution hint: adaptive refinement still corrects any error the
    /// coarse panels report.
    pub fine_until: Option<f64>,
}

impl IntegrandShape<'_> {
    pub const SMOOTH: IntegrandShape<'static> = IntegrandShape {
        envelope: None,
        phase_rate: None,
        fine_until: None,
    };
}

struct Panel<const K: usize> {
    a: f64,
    b: f64,
    fine: [f64; K],
    err: f64,
}

impl<const K: usize> PartialEq for Panel<K> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.a == other.a
    }
}
impl<const K: usize> Eq for Panel<K> {}
impl<const K: usize> PartialOrd for Panel<K> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<const K: usize> Ord for Panel<K> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err
            .total_cmp(&other.err)
            .then(self.a.total_cmp(&other.a))
    }
}

fn gl_sum<const K: usize>(f: &impl Fn(f64) -> [f64; K], a: f64, b: f64) -> [f64; K] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = [0.0; K];
    for &(x, w) in GL15.iter() {
        let vals = f(c + h * x);
        for k in 0..K {
            acc[k] += w * vals[k];
        }
    }
    for v in acc.iter_mut() {
        *v *= h;
    }
    acc
}

fn eval_panel<const K: usize>(f: &impl Fn(f64) -> [f64; K], a: f64, b: f64) -> Panel<K> {
    let coarse = gl_sum(f, a, b);
    let mid = 0.5 * (a + b);
    let left = gl_sum(f, a, mid);
    let right = gl_sum(f, mid, b);
    let mut fine = [0.0; K];
    let mut err = 0.0;
    for k in 0..K {
        fine[k] = left[k] + right[k];
        err += (coarse[k] - fine[k]).abs();
    }
    Panel { a, b, fine, err }
}

/// Adaptive integration of a vector-valued integrand over [a, b].
///
/// The initial partition honours the oscillation constraint; panels are
/// then bisected worst-error-first until every component meets
/// max(abs_tol, rel_tol·|value|) or the panel budget is exhausted.
pub fn integrate_on<const K: usize>(
    f: impl Fn(f64) -> [f64; K],
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    phase_rate: Option<&dyn Fn(f64) -> f64>,
) -> Result<QuadratureVec<K>, QuadError> {
    integrate_on_hinted(f, a, b, spec, phase_rate, None)
}

/// `integrate_on` with an additional resolution hint: the per-period
/// panel-width constraint is dropped beyond `fine_until`.
pub fn integrate_on_hinted<const K: usize>(
    f: impl Fn(f64) -> [f64; K],
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    phase_rate: Option<&dyn Fn(f64) -> f64>,
    fine_until: Option<f64>,
) -> Result<QuadratureVec<K>, QuadError> {
    spec.validate()?;
    if !(b > a) {
        return Ok(QuadratureVec {
            value: [0.0; K],
            error: [0.0; K],
        });
    }

    // Initial partition: at least 4 panels, each narrow enough that the
    // 15 nodes give `oscillation_resolution` samples per local period.
    let mut edges = vec![a];
    let base_w = (b - a) / 4.0;
    let fine_cap = fine_until.unwrap_or(f64::INFINITY);
    let mut x = a;
    while x < b {
        let mut w = base_w;
        if x < fine_cap {
            if let Some(rate) = phase_rate {
                let r = rate(x).abs().max(rate((x + base_w).min(b)).abs());
                if r > 0.0 {
                    let w_osc = GL_ORDER as f64 * (2.0 * PI / r) / spec.oscillation_resolution;
                    w = w.min(w_osc);
                }
            }
        }
        if edges.len() >= spec.max_panels {
            return Err(QuadError::NoConvergence {
                panels: edges.len(),
                error: f64::INFINITY,
                target: spec.abs_tol,
            });
        }
        x = (x + w).min(b);
        edges.push(x);
    }

    let mut heap: BinaryHeap<Panel<K>> = BinaryHeap::new();
    let mut total = [0.0_f64; K];
    let mut total_err = 0.0_f64;
    let mut n_panels = 0usize;
    for pair in edges.windows(2) {
        let p = eval_panel(&f, pair[0], pair[1]);
        for k in 0..K {
            total[k] += p.fine[k];
        }
        total_err += p.err;
        heap.push(p);
        n_panels += 1;
    }

    let target = |total: &[f64; K]| -> f64 {
        let mut t = f64::INFINITY;
        for v in total.iter() {
            t = t.min(spec.abs_tol.max(spec.rel_tol * v.abs()));
        }
        t
    };

    while total_err > target(&total) {
        if n_panels >= spec.max_panels {
            return Err(QuadError::NoConvergence {
                panels: n_panels,
                error: total_err,
                target: target(&total),
            });
        }
        let worst = heap.pop().expect("non-empty panel heap");
        // Splitting a panel at the floating-point resolution limit stalls.
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        for k in 0..K {
            total[k] -= worst.fine[k];
        }
        total_err -= worst.err;
        for (pa, pb) in [(worst.a, mid), (mid, worst.b)] {
            let p = eval_panel(&f, pa, pb);
            for k in 0..K {
                total[k] += p.fine[k];
            }
            total_err += p.err;
            heap.push(p);
        }
        n_panels += 1;
    }

    // Re-sum panels in spatial order for a deterministic, well-conditioned
    // final value and per-component error.
    let mut panels: Vec<Panel<K>> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = [0.0; K];
    let mut error = [0.0; K];
    for p in &panels {
        let coarse_minus_fine = p.err; // aggregate over components
        for k in 0..K {
            value[k] += p.fine[k];
            error[k] += coarse_minus_fine;
        }
    }
    Ok(QuadratureVec { value, error })
}

/// Pick a truncation radius R with envelope(R)·R^{n-1} < abs_tol / 10.
pub fn truncation_radius(
    envelope: &dyn Fn(f64) -> f64,
    n: u32,
    abs_tol: f64,
) -> Result<f64, QuadError> {
    let mut r = 1.0_f64;
    let bound = abs_tol / 10.0;
    for _ in 0..120 {
        let tail = envelope(r).abs() * r.powi(n as i32 - 1);
        if tail < bound {
            return Ok(r);
        }
        r *= 1.5;
    }
    Err(QuadError::EnvelopeDoesNotDecay)
}

/// |ω_n| ∫₀^∞ f(σ) σ^{n-1} dσ for a vector-valued f.
pub fn radial_integral_vec<const K: usize>(
    f: impl Fn(f64) -> [f64; K],
    n: u32,
    spec: &QuadratureSpec,
    shape: &IntegrandShape<'_>,
) -> Result<QuadratureVec<K>, QuadError> {
    let radius = match spec.truncation_radius {
        Some(r) => r,
        None => match shape.envelope {
            Some(env) => truncation_radius(env, n, spec.abs_tol)?,
            None => return Err(QuadError::MissingEnvelope),
        },
    };
    radial_integral_vec_hinted(f, n, 0.0, radius, spec, shape.phase_rate, shape.fine_until)
}

/// |ω_n| ∫_a^b f(σ) σ^{n-1} dσ over an explicit interval.
pub fn radial_integral_vec_on<const K: usize>(
    f: impl Fn(f64) -> [f64; K],
    n: u32,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    phase_rate: Option<&dyn Fn(f64) -> f64>,
) -> Result<QuadratureVec<K>, QuadError> {
    radial_integral_vec_hinted(f, n, a, b, spec, phase_rate, None)
}

/// Interval radial integral with the oscillation-support hint.
pub fn radial_integral_vec_hinted<const K: usize>(
    f: impl Fn(f64) -> [f64; K],
    n: u32,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    phase_rate: Option<&dyn Fn(f64) -> f64>,
    fine_until: Option<f64>,
) -> Result<QuadratureVec<K>, QuadError> {
    let omega = unit_sphere_area(n);
    let weighted = |sigma: f64| -> [f64; K] {
        let w = if n == 1 { 1.0 } else { sigma.powi(n as i32 - 1) };
        let mut v = f(sigma);
        for k in 0..K {
            v[k] *= w;
        }
        v
    };
    let mut q = integrate_on_hinted(weighted, a, b, spec, phase_rate, fine_until)?;
    for k in 0..K {
        q.value[k] *= omega;
        q.error[k] *= omega;
    }
    Ok(q)
}

/// Scalar radial integral |ω_n| ∫₀^∞ f(σ) σ^{n-1} dσ.
pub fn radial_integral(
    f: impl Fn(f64) -> f64,
    n: u32,
    spec: &QuadratureSpec,
    shape: &IntegrandShape<'_>,
) -> Result<Quadrature, QuadError> {
    let q = radial_integral_vec(|s| [f(s)], n, spec, shape)?;
    Ok(Quadrature {
        value: q.value[0],
        error: q.error[0],
    })
}

/// Scalar radial integral over [a, b].
pub fn radial_integral_on(
    f: impl Fn(f64) -> f64,
    n: u32,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    phase_rate: Option<&dyn Fn(f64) -> f64>,
) -> Result<Quadrature, QuadError> {
    let q = radial_integral_vec_on(|s| [f(s)], n, a, b, spec, phase_rate)?;
    Ok(Quadrature {
        value: q.value[0],
        error: q.error[0],
    })
}
