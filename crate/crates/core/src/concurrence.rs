//! Concurrence `C(τa, τb) = |κ(τa, τb)|` of the pair after first-order PMD.
//!
//! `κ` is the overlap of the waveforms carried by the slow and fast
//! polarization components,
//!
//! ```text
//! κ(τa, τb) = ∫∫ g(ta, tb) g*(ta + τa, tb + τb) dta dtb
//!           = (1/2π)² ∫∫ |f(ωa, ωb)|² exp(+i(ωa τa + ωb τb)) dωa dωb,
//! ```
//!
//! the characteristic function of the joint spectral intensity. The sign of
//! the phase follows from the transform convention in [`crate::biphoton`];
//! only `|κ|` is physically meaningful.
//!
//! Engines:
//! - frequency-domain trapezoidal quadrature ([`concurrence_numeric`], primary),
//! - time-domain overlap after spectral phase-ramp shifts ([`concurrence_time_domain`]),
//! - closed form for Gaussian spectra ([`concurrence_gaussian`]),
//! - the stationary CW-pump limit ([`concurrence_cw`]).

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::biphoton::{
    build_jsa, spectral_to_temporal, Axis, BiphotonAmplitude, GridChoice, GridSpec,
    PhotonPairSource,
};
use crate::error::{Error, Result};
use crate::profiles::SpectralProfile;

/// DGD of Alice's fiber and of Bob's compensator stage.
///
/// A positive DGD delays the slow-PSP component by `+τ/2` and advances the
/// fast one by `-τ/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmdScenario {
    pub tau_a: f64,
    pub tau_b: f64,
    /// The compensator slow axis is aligned with the partner PSP. Always true here.
    pub psp_aligned: bool,
}

impl PmdScenario {
    pub fn new(tau_a: f64, tau_b: f64) -> Result<Self> {
        if !tau_a.is_finite() || !tau_b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "DGD values must be finite (got {tau_a}, {tau_b})"
            )));
        }
        Ok(Self {
            tau_a,
            tau_b,
            psp_aligned: true,
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.tau_a == 0.0 && self.tau_b == 0.0
    }

    pub fn max_abs(&self) -> f64 {
        self.tau_a.abs().max(self.tau_b.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    GaussianAnalytic,
    FreqQuadrature,
    TimeDomain,
    CwLimit,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::GaussianAnalytic => "GaussianAnalytic",
            Method::FreqQuadrature => "FreqQuadrature",
            Method::TimeDomain => "TimeDomain",
            Method::CwLimit => "CwLimit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceResult {
    pub kappa: Complex64,
    pub concurrence: f64,
    pub method: Method,
    pub est_error: f64,
}

impl ConcurrenceResult {
    fn from_kappa(kappa: Complex64, method: Method, est_error: f64) -> Self {
        Self {
            kappa,
            concurrence: kappa.norm(),
            method,
            est_error,
        }
    }

    fn exact_unity(method: Method) -> Self {
        Self::from_kappa(Complex64::new(1.0, 0.0), method, 0.0)
    }
}

/// `Σ w(x, y) e^{i(x α + y β)} Δx Δy / (2π)²` over every `stride`-th sample,
/// renormalized by the same subsampled sum.
fn characteristic(jsa: &BiphotonAmplitude, alpha: f64, beta: f64, stride: usize) -> Complex64 {
    let grid = jsa.grid();
    let (na, nb) = (grid.first.len, grid.second.len);
    let ramp = |axis: &Axis, shift: f64| -> Vec<Complex64> {
        (0..axis.len)
            .step_by(stride)
            .map(|k| Complex64::cis(axis.coord(k) * shift))
            .collect()
    };
    let (pa, pb) = (ramp(&grid.first, alpha), ramp(&grid.second, beta));
    let w = jsa.intensity();
    let mut kappa = Complex64::new(0.0, 0.0);
    let mut norm = 0.0;
    for (ia, i) in (0..na).step_by(stride).enumerate() {
        let row = &w[i * nb..(i + 1) * nb];
        let mut acc = Complex64::new(0.0, 0.0);
        let mut racc = 0.0;
        for (jb, j) in (0..nb).step_by(stride).enumerate() {
            acc += pb[jb] * row[j];
            racc += row[j];
        }
        kappa += pa[ia] * acc;
        norm += racc;
    }
    if stride == 1 {
        // the jsa is normalized: the full sum times the cell is (2π)²
        kappa * grid.cell() / (4.0 * PI * PI)
    } else {
        kappa / norm
    }
}

/// Complex overlap `κ(τa, τb)` by frequency-domain quadrature.
pub fn overlap_kappa(jsa: &BiphotonAmplitude, scenario: &PmdScenario) -> Result<Complex64> {
    if !jsa.is_normalized() {
        return Err(Error::NotNormalized);
    }
    if scenario.is_trivial() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let (alpha, beta) = jsa.grid().layout.dual_shift(scenario.tau_a, scenario.tau_b);
    Ok(characteristic(jsa, alpha, beta, 1))
}

/// `C = |κ|` by frequency-domain quadrature. The error estimate compares the
/// full grid with every second sample.
pub fn concurrence_numeric(
    jsa: &BiphotonAmplitude,
    scenario: &PmdScenario,
) -> Result<ConcurrenceResult> {
    let kappa = overlap_kappa(jsa, scenario)?;
    if scenario.is_trivial() {
        return Ok(ConcurrenceResult::exact_unity(Method::FreqQuadrature));
    }
    let (alpha, beta) = jsa.grid().layout.dual_shift(scenario.tau_a, scenario.tau_b);
    let half = characteristic(jsa, alpha, beta, 2);
    Ok(ConcurrenceResult::from_kappa(
        kappa,
        Method::FreqQuadrature,
        (kappa.norm() - half.norm()).abs(),
    ))
}

fn time_domain_kappa(grid: &GridSpec, samples: &[Complex64], alpha: f64, beta: f64) -> Complex64 {
    let g = spectral_to_temporal(grid, samples);
    let (xs, ys) = (grid.first.coords(), grid.second.coords());
    let nb = grid.second.len;
    // g(t + τ) has spectrum f e^{-iωτ}
    let shifted: Vec<Complex64> = samples
        .iter()
        .enumerate()
        .map(|(idx, f)| f * Complex64::cis(-(xs[idx / nb] * alpha + ys[idx % nb] * beta)))
        .collect();
    let gs = spectral_to_temporal(grid, &shifted);
    let dt = grid.first.time_step() * grid.second.time_step();
    let mut kappa = Complex64::new(0.0, 0.0);
    let mut norm = 0.0;
    for (a, b) in g.iter().zip(&gs) {
        kappa += a * b.conj();
        norm += a.norm_sqr();
    }
    kappa * dt / (norm * dt)
}

fn subsampled(grid: &GridSpec, samples: &[Complex64]) -> (GridSpec, Vec<Complex64>) {
    let (na, nb) = (grid.first.len, grid.second.len);
    let half = |a: &Axis| Axis::new(a.len / 2, a.start, a.span);
    let sub = GridSpec {
        layout: grid.layout,
        first: half(&grid.first),
        second: half(&grid.second),
    };
    let mut out = Vec::with_capacity(na * nb / 4);
    for i in (0..na).step_by(2) {
        for j in (0..nb).step_by(2) {
            out.push(samples[i * nb + j]);
        }
    }
    (sub, out)
}

/// `C` from the discretized time-domain overlap. Shifts are applied as
/// spectral phase ramps before the inverse transform.
pub fn concurrence_time_domain(
    jsa: &BiphotonAmplitude,
    scenario: &PmdScenario,
) -> Result<ConcurrenceResult> {
    if !jsa.is_normalized() {
        return Err(Error::NotNormalized);
    }
    if scenario.is_trivial() {
        return Ok(ConcurrenceResult::exact_unity(Method::TimeDomain));
    }
    let grid = jsa.grid();
    let (alpha, beta) = grid.layout.dual_shift(scenario.tau_a, scenario.tau_b);
    let (wa, wb) = (grid.first.time_window(), grid.second.time_window());
    if alpha.abs() > 0.5 * wa || beta.abs() > 0.5 * wb {
        return Err(Error::ShiftExceedsSupport(format!(
            "shift ({alpha:.3e}, {beta:.3e}) vs half-windows ({:.3e}, {:.3e})",
            0.5 * wa,
            0.5 * wb
        )));
    }
    let kappa = time_domain_kappa(grid, jsa.samples(), alpha, beta);
    let est_error = if alpha.abs() <= 0.25 * wa && beta.abs() <= 0.25 * wb {
        let (sub, sub_samples) = subsampled(grid, jsa.samples());
        (kappa.norm() - time_domain_kappa(&sub, &sub_samples, alpha, beta).norm()).abs()
    } else {
        (kappa.norm() - characteristic(jsa, alpha, beta, 2).norm()).abs()
    };
    Ok(ConcurrenceResult::from_kappa(kappa, Method::TimeDomain, est_error))
}

/// Closed form for Gaussian pump and filters:
///
/// ```text
/// C = exp[-½ (τa-τb)² Ba² Bb² / D] · exp[-½ Bp² (Ba² τa² + Bb² τb²) / D],
/// D = Bp² + Ba² + Bb²
/// ```
pub fn concurrence_gaussian(b_p: f64, b_a: f64, b_b: f64, tau_a: f64, tau_b: f64) -> f64 {
    let (p2, a2, b2) = (b_p * b_p, b_a * b_a, b_b * b_b);
    let d = p2 + a2 + b2;
    let mismatch = (tau_a - tau_b).powi(2) * a2 * b2 / d;
    let pump = p2 * (a2 * tau_a * tau_a + b2 * tau_b * tau_b) / d;
    (-0.5 * (mismatch + pump)).exp()
}

fn default_cw_len() -> usize {
    1 << 12
}

/// Stationary (CW pump) limit. With a constant pump `ωb = -ωa`, so the
/// waveform depends only on `ta - tb` and
///
/// ```text
/// C = |∫ |Ha(ω)|² |Hb(-ω)|² e^{iω(τa-τb)} dω| / ∫ |Ha(ω)|² |Hb(-ω)|² dω.
/// ```
///
/// The detector-window normalization of the stationary stream cancels in the ratio.
pub fn concurrence_cw(
    filter_a: &SpectralProfile,
    filter_b: &SpectralProfile,
    tau_a: f64,
    tau_b: f64,
) -> Result<ConcurrenceResult> {
    let scenario = PmdScenario::new(tau_a, tau_b)?;
    let delta = scenario.tau_a - scenario.tau_b;
    let (a_lo, a_hi) = filter_a.support();
    let (b_lo, b_hi) = filter_b.support();
    let (lo, hi) = (a_lo.max(-b_hi), a_hi.min(-b_lo));
    if lo >= hi {
        return Err(Error::NonNormalizable(
            "filters have no overlapping CW passband".into(),
        ));
    }
    let width = filter_a.rms_bandwidth().min(filter_b.rms_bandwidth());
    let required_window = 8.0 * (8.0 / width + delta.abs());
    let mut len = default_cw_len();
    while 2.0 * PI * len as f64 / (hi - lo) < required_window {
        len *= 2;
        if len > 1 << 24 {
            return Err(Error::ResolutionCap("CW grid exceeds 2^24 points".into()));
        }
    }
    let axis = Axis::new(len, lo, hi - lo);
    let weights: Vec<f64> = axis
        .coords()
        .iter()
        .map(|&w| filter_a.intensity(w) * filter_b.intensity(-w))
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NonNormalizable("CW biphoton has zero energy".into()));
    }
    if delta == 0.0 {
        return Ok(ConcurrenceResult::exact_unity(Method::CwLimit));
    }
    let sum = |stride: usize| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut norm = 0.0;
        for k in (0..len).step_by(stride) {
            acc += Complex64::cis(axis.coord(k) * delta) * weights[k];
            norm += weights[k];
        }
        acc / norm
    };
    let kappa = sum(1);
    let est_error = (kappa.norm() - sum(2).norm()).abs();
    Ok(ConcurrenceResult::from_kappa(kappa, Method::CwLimit, est_error))
}

/// DGD error scale `τ0` around the optimum, `C(τb_opt + δ) = C_opt exp(-δ²/τ0²)`,
/// from the exact curvature of the Gaussian closed form:
/// `τ0² = 2D / (Bb² (Ba² + Bp²))`.
pub fn sensitivity_tolerance(b_p: f64, b_a: f64, b_b: f64) -> f64 {
    let (p2, a2, b2) = (b_p * b_p, b_a * b_a, b_b * b_b);
    (2.0 * (p2 + a2 + b2) / (b2 * (a2 + p2))).sqrt()
}

/// The simpler estimate `τ0 = 2 / Bp`. Infinite for a CW pump.
pub fn pump_limited_sensitivity_tolerance(b_p: f64) -> f64 {
    2.0 / b_p
}

/// Anything that can evaluate `C(τa, τb)`; lets the optimizer and sweeps run
/// on any engine.
pub trait ConcurrenceModel: Sync {
    fn evaluate(&self, scenario: &PmdScenario) -> Result<ConcurrenceResult>;
}

impl ConcurrenceModel for BiphotonAmplitude {
    fn evaluate(&self, scenario: &PmdScenario) -> Result<ConcurrenceResult> {
        concurrence_numeric(self, scenario)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianModel {
    pub b_p: f64,
    pub b_a: f64,
    pub b_b: f64,
}

impl ConcurrenceModel for GaussianModel {
    fn evaluate(&self, s: &PmdScenario) -> Result<ConcurrenceResult> {
        let c = concurrence_gaussian(self.b_p, self.b_a, self.b_b, s.tau_a, s.tau_b);
        Ok(ConcurrenceResult::from_kappa(
            Complex64::new(c, 0.0),
            Method::GaussianAnalytic,
            0.0,
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CwModel {
    pub filter_a: SpectralProfile,
    pub filter_b: SpectralProfile,
}

impl ConcurrenceModel for CwModel {
    fn evaluate(&self, s: &PmdScenario) -> Result<ConcurrenceResult> {
        concurrence_cw(&self.filter_a, &self.filter_b, s.tau_a, s.tau_b)
    }
}

/// A ready-to-evaluate engine for a source.
#[derive(Debug, Clone)]
pub enum Engine {
    Gaussian(GaussianModel),
    Freq(BiphotonAmplitude),
    Time(BiphotonAmplitude),
    Cw(CwModel),
}

impl Engine {
    /// Builds the engine for `method`, with a grid fit for DGDs up to `tau_max`.
    /// A CW pump always uses the CW engine unless the analytic one is requested.
    pub fn build(source: &PhotonPairSource, method: Method, tau_max: f64) -> Result<Self> {
        if method == Method::GaussianAnalytic {
            if !source.is_gaussian() {
                return Err(Error::AnalyticRequiresGaussian);
            }
            return Ok(Engine::Gaussian(GaussianModel {
                b_p: source.pump.bandwidth(),
                b_a: source.filter_a.rms_bandwidth(),
                b_b: source.filter_b.rms_bandwidth(),
            }));
        }
        if source.pump.cw || method == Method::CwLimit {
            return Ok(Engine::Cw(CwModel {
                filter_a: source.filter_a.clone(),
                filter_b: source.filter_b.clone(),
            }));
        }
        let jsa = build_jsa(source, GridChoice::Auto { tau_max })?;
        Ok(match method {
            Method::TimeDomain => Engine::Time(jsa),
            _ => Engine::Freq(jsa),
        })
    }

    pub fn method(&self) -> Method {
        match self {
            Engine::Gaussian(_) => Method::GaussianAnalytic,
            Engine::Freq(_) => Method::FreqQuadrature,
            Engine::Time(_) => Method::TimeDomain,
            Engine::Cw(_) => Method::CwLimit,
        }
    }

    pub fn jsa(&self) -> Option<&BiphotonAmplitude> {
        match self {
            Engine::Freq(j) | Engine::Time(j) => Some(j),
            _ => None,
        }
    }
}

impl ConcurrenceModel for Engine {
    fn evaluate(&self, s: &PmdScenario) -> Result<ConcurrenceResult> {
        match self {
            Engine::Gaussian(m) => m.evaluate(s),
            Engine::Freq(j) => concurrence_numeric(j, s),
            Engine::Time(j) => concurrence_time_domain(j, s),
            Engine::Cw(m) => m.evaluate(s),
        }
    }
}
