//! Discretized joint spectral amplitude (JSA) and temporal amplitude.
//!
//! The JSA is `f(ωa, ωb) = conj(Ha(ωa)) conj(Hb(ωb)) Ep(ωa + ωb)`, normalized so
//! that `(1/2π)² ∫∫ |f|² dωa dωb = 1`. The temporal amplitude uses the fixed
//! convention
//!
//! ```text
//! g(ta, tb) = (1/2π)² ∫∫ f(ωa, ωb) exp(-i ωa ta - i ωb tb) dωa dωb
//! ```
//!
//! so that `∫∫ |g|² dta dtb = 1` by Parseval.
//!
//! Two grid layouts are supported. [`GridLayout::Cartesian`] samples `(ωa, ωb)`
//! directly. [`GridLayout::SumFrequency`] samples `(ωa, Ω = ωa + ωb)`, which
//! resolves a narrow pump (a thin ridge along `ωa + ωb = 0`) without refining
//! the `ωa` axis. The change of variables has unit Jacobian; the dual time
//! coordinates are `(u, v) = (ta - tb, tb)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{PumpSpec, SpectralProfile};

pub const MIN_AXIS_LEN: usize = 64;
pub const MAX_AXIS_LEN: usize = 1 << 14;
/// Required ratio of the temporal window to `T_support + τmax` (Δω ≤ π / (4 (T + τ))).
const WINDOW_FACTOR: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridLayout {
    Cartesian,
    SumFrequency,
}

impl GridLayout {
    /// Maps a DGD pair to the shifts along the two dual (time) axes.
    pub fn dual_shift(self, tau_a: f64, tau_b: f64) -> (f64, f64) {
        match self {
            GridLayout::Cartesian => (tau_a, tau_b),
            GridLayout::SumFrequency => (tau_a - tau_b, tau_b),
        }
    }

    /// Physical `(ωa, ωb)` for grid coordinates `(x, y)`.
    pub fn omega_pair(self, x: f64, y: f64) -> (f64, f64) {
        match self {
            GridLayout::Cartesian => (x, y),
            GridLayout::SumFrequency => (x, y - x),
        }
    }

    /// Physical `(ta, tb)` for dual coordinates.
    pub fn time_pair(self, t1: f64, t2: f64) -> (f64, f64) {
        match self {
            GridLayout::Cartesian => (t1, t2),
            GridLayout::SumFrequency => (t1 + t2, t2),
        }
    }
}

/// Uniform periodic sampling `start + k · span / len`, `k < len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub len: usize,
    pub start: f64,
    pub span: f64,
}

impl Axis {
    pub fn new(len: usize, start: f64, span: f64) -> Self {
        Self { len, start, span }
    }

    pub fn centered(len: usize, center: f64, span: f64) -> Self {
        Self::new(len, center - 0.5 * span, span)
    }

    pub fn step(&self) -> f64 {
        self.span / self.len as f64
    }

    pub fn coord(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.coord(k)).collect()
    }

    pub fn time_step(&self) -> f64 {
        2.0 * PI / self.span
    }

    /// Length of the periodic temporal window, `2π / Δω`.
    pub fn time_window(&self) -> f64 {
        2.0 * PI / self.step()
    }

    /// Time coordinates in increasing order, `(p - len/2) · Δt`.
    pub fn times(&self) -> Vec<f64> {
        let dt = self.time_step();
        let half = (self.len / 2) as f64;
        (0..self.len).map(|p| (p as f64 - half) * dt).collect()
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.len < MIN_AXIS_LEN || !self.len.is_power_of_two() {
            return Err(Error::GridRejected(format!(
                "{name} axis length {} must be a power of two >= {MIN_AXIS_LEN}",
                self.len
            )));
        }
        if !(self.span > 0.0 && self.span.is_finite() && self.start.is_finite()) {
            return Err(Error::GridRejected(format!("{name} axis has invalid span")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub layout: GridLayout,
    /// Samples `ωa`.
    pub first: Axis,
    /// Samples `ωb` (Cartesian) or `ωa + ωb` (SumFrequency).
    pub second: Axis,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        self.first.validate("first")?;
        self.second.validate("second")
    }

    pub fn len(&self) -> usize {
        self.first.len * self.second.len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Area element `Δx Δy` (unit Jacobian in both layouts).
    pub fn cell(&self) -> f64 {
        self.first.step() * self.second.step()
    }
}

/// Acceptance thresholds for grids. The defaults are used throughout the tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridThresholds {
    /// Max `|f|²` on the grid boundary relative to the global max.
    pub boundary: f64,
    /// `|g|` relative to its peak below which the waveform counts as zero.
    pub temporal_support: f64,
}

impl Default for GridThresholds {
    fn default() -> Self {
        Self {
            boundary: 1e-8,
            temporal_support: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonPairSource {
    pub pump: PumpSpec,
    pub filter_a: SpectralProfile,
    pub filter_b: SpectralProfile,
}

impl PhotonPairSource {
    pub fn new(pump: PumpSpec, filter_a: SpectralProfile, filter_b: SpectralProfile) -> Self {
        Self {
            pump,
            filter_a,
            filter_b,
        }
    }

    /// Gaussian pump and filters with symmetric detuning: Alice's filter at
    /// `-detuning`, Bob's at `+detuning`. `b_p = 0` gives a CW pump.
    pub fn gaussian(b_p: f64, b_a: f64, b_b: f64, detuning: f64) -> Result<Self> {
        Ok(Self::new(
            PumpSpec::gaussian(b_p)?,
            SpectralProfile::gaussian(b_a, -detuning)?,
            SpectralProfile::gaussian(b_b, detuning)?,
        ))
    }

    /// All three spectra super-Gaussian of the same order.
    pub fn super_gaussian(order: u32, b_p: f64, b_a: f64, b_b: f64) -> Result<Self> {
        let pump = if b_p == 0.0 {
            PumpSpec::cw()
        } else {
            PumpSpec::pulsed(SpectralProfile::super_gaussian(order, b_p, 0.0)?)
        };
        Ok(Self::new(
            pump,
            SpectralProfile::super_gaussian(order, b_a, 0.0)?,
            SpectralProfile::super_gaussian(order, b_b, 0.0)?,
        ))
    }

    pub fn is_gaussian(&self) -> bool {
        self.pump.is_gaussian() && self.filter_a.is_gaussian() && self.filter_b.is_gaussian()
    }

    /// Swaps the roles of Alice's and Bob's filters.
    pub fn exchanged(&self) -> Self {
        Self::new(
            self.pump.clone(),
            self.filter_b.clone(),
            self.filter_a.clone(),
        )
    }

    pub fn describe(&self) -> String {
        let pump = if self.pump.cw {
            "cw".to_string()
        } else {
            self.pump.profile.descriptor()
        };
        format!(
            "pump={pump}; filter_a={}; filter_b={}",
            self.filter_a.descriptor(),
            self.filter_b.descriptor()
        )
    }

    fn amplitude(&self, omega_a: f64, omega_b: f64) -> Complex64 {
        self.filter_a.eval(omega_a).conj()
            * self.filter_b.eval(omega_b).conj()
            * self.pump.profile.eval(omega_a + omega_b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridChoice {
    /// Build the grid with [`auto_grid`] for DGD magnitudes up to `tau_max`.
    Auto { tau_max: f64 },
    /// Use this grid; reject it if the boundary-coverage check fails.
    Fixed(GridSpec),
}

/// Normalized joint spectral amplitude on a grid. Immutable once built.
#[derive(Debug, Clone)]
pub struct BiphotonAmplitude {
    grid: GridSpec,
    /// Row-major, `first` index outer.
    samples: Vec<Complex64>,
    intensity: Vec<f64>,
    normalized: bool,
    provenance: String,
}

impl BiphotonAmplitude {
    /// Wraps raw samples without normalizing them.
    pub fn from_samples(grid: GridSpec, samples: Vec<Complex64>, provenance: &str) -> Result<Self> {
        grid.validate()?;
        if samples.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        let intensity = samples.iter().map(|z| z.norm_sqr()).collect();
        Ok(Self {
            grid,
            samples,
            intensity,
            normalized: false,
            provenance: provenance.to_string(),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// `|f|²` on the grid.
    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// `(1/2π)² Σ |f|² Δx Δy`.
    pub fn discrete_norm(&self) -> f64 {
        self.intensity.iter().sum::<f64>() * self.grid.cell() / (4.0 * PI * PI)
    }

    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.discrete_norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NonNormalizable(format!(
                "joint spectral amplitude has norm {norm}"
            )));
        }
        let scale = norm.sqrt().recip();
        for z in &mut self.samples {
            *z *= scale;
        }
        let iscale = norm.recip();
        for v in &mut self.intensity {
            *v *= iscale;
        }
        self.normalized = true;
        Ok(self)
    }

    /// Largest `|f|²` on the grid edge divided by the global max.
    pub fn boundary_ratio(&self) -> f64 {
        boundary_ratio(&self.grid, &self.intensity)
    }

    /// `(ωa, ωb, |f|²)` triples in grid order.
    pub fn jsi_points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let layout = self.grid.layout;
        let (xs, ys) = (self.grid.first.coords(), self.grid.second.coords());
        let nb = self.grid.second.len;
        self.intensity.iter().enumerate().map(move |(idx, &v)| {
            let (wa, wb) = layout.omega_pair(xs[idx / nb], ys[idx % nb]);
            (wa, wb, v)
        })
    }
}

fn boundary_ratio(grid: &GridSpec, intensity: &[f64]) -> f64 {
    let (na, nb) = (grid.first.len, grid.second.len);
    let peak = intensity.iter().copied().fold(0.0, f64::max);
    let mut edge: f64 = 0.0;
    for i in 0..na {
        edge = edge.max(intensity[i * nb]).max(intensity[i * nb + nb - 1]);
    }
    for j in 0..nb {
        edge = edge.max(intensity[j]).max(intensity[(na - 1) * nb + j]);
    }
    if peak > 0.0 {
        edge / peak
    } else {
        f64::INFINITY
    }
}

fn sample(source: &PhotonPairSource, grid: &GridSpec) -> Vec<Complex64> {
    let (xs, ys) = (grid.first.coords(), grid.second.coords());
    let mut out = Vec::with_capacity(grid.len());
    for &x in &xs {
        for &y in &ys {
            let (wa, wb) = grid.layout.omega_pair(x, y);
            out.push(source.amplitude(wa, wb));
        }
    }
    out
}

pub fn build_jsa(source: &PhotonPairSource, grid: GridChoice) -> Result<BiphotonAmplitude> {
    build_jsa_with(source, grid, GridThresholds::default())
}

pub fn build_jsa_with(
    source: &PhotonPairSource,
    grid: GridChoice,
    thresholds: GridThresholds,
) -> Result<BiphotonAmplitude> {
    if source.pump.cw {
        return Err(Error::CwPump);
    }
    let grid = match grid {
        GridChoice::Auto { tau_max } => auto_grid_with(source, tau_max, thresholds)?,
        GridChoice::Fixed(g) => g,
    };
    let jsa = BiphotonAmplitude::from_samples(grid, sample(source, &grid), &source.describe())?;
    let ratio = jsa.boundary_ratio();
    if !(ratio <= thresholds.boundary) {
        return Err(Error::GridRejected(format!(
            "boundary |f|^2 is {ratio:.3e} of peak (limit {:.0e})",
            thresholds.boundary
        )));
    }
    jsa.normalize()
}

pub fn auto_grid(source: &PhotonPairSource, tau_max: f64) -> Result<GridSpec> {
    auto_grid_with(source, tau_max, GridThresholds::default())
}

/// Picks a [`GridLayout::SumFrequency`] grid covering the filter and pump
/// supports, refined until the temporal window is at least
/// `8 (T_support + τ)` along each dual axis.
pub fn auto_grid_with(
    source: &PhotonPairSource,
    tau_max: f64,
    thresholds: GridThresholds,
) -> Result<GridSpec> {
    if !(tau_max >= 0.0 && tau_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tau_max must be finite and >= 0, got {tau_max}"
        )));
    }
    if source.pump.cw {
        return Err(Error::CwPump);
    }
    let (a_lo, a_hi) = source.filter_a.support();
    let (b_lo, b_hi) = source.filter_b.support();
    let (p_lo, p_hi) = source.pump.profile.support();
    let (s_lo, s_hi) = (p_lo.max(a_lo + b_lo), p_hi.min(a_hi + b_hi));
    if s_lo >= s_hi {
        return Err(Error::GridRejected(
            "pump and filter passbands do not overlap".into(),
        ));
    }
    let layout = GridLayout::SumFrequency;
    let (shift_first, shift_second) = (2.0 * tau_max, tau_max);
    let mut first = Axis::new(MIN_AXIS_LEN, a_lo, a_hi - a_lo);
    let mut second = Axis::new(MIN_AXIS_LEN, s_lo, s_hi - s_lo);
    let mut widenings = 0;
    loop {
        let grid = GridSpec {
            layout,
            first,
            second,
        };
        let samples = sample(source, &grid);
        let intensity: Vec<f64> = samples.iter().map(|z| z.norm_sqr()).collect();
        if !(boundary_ratio(&grid, &intensity) <= thresholds.boundary) {
            // only possible for tabulated spectra that are cut off at the table edge
            widenings += 1;
            if widenings > 8 {
                return Err(Error::GridRejected(
                    "boundary coverage not reached after widening".into(),
                ));
            }
            first = widen(first);
            second = widen(second);
            continue;
        }
        let g = spectral_to_temporal(&grid, &samples);
        let need_first = axis_needs_refinement(&grid, &g, true, shift_first, thresholds);
        let need_second = axis_needs_refinement(&grid, &g, false, shift_second, thresholds);
        if !need_first && !need_second {
            return Ok(grid);
        }
        if need_first {
            first.len *= 2;
        }
        if need_second {
            second.len *= 2;
        }
        if first.len > MAX_AXIS_LEN || second.len > MAX_AXIS_LEN {
            return Err(Error::ResolutionCap(format!(
                "grid would need more than {MAX_AXIS_LEN} points per axis"
            )));
        }
    }
}

fn widen(axis: Axis) -> Axis {
    let center = axis.start + 0.5 * axis.span;
    Axis::centered(axis.len * 2, center, axis.span * 2.0)
}

/// Whether the temporal window along one dual axis is too short for the
/// waveform extent plus the largest shift.
fn axis_needs_refinement(
    grid: &GridSpec,
    g: &[Complex64],
    first: bool,
    shift: f64,
    thresholds: GridThresholds,
) -> bool {
    let (na, nb) = (grid.first.len, grid.second.len);
    let (n, axis) = if first {
        (na, grid.first)
    } else {
        (nb, grid.second)
    };
    let mut profile = vec![0.0f64; n];
    for i in 0..na {
        for j in 0..nb {
            let k = if first { i } else { j };
            profile[k] = profile[k].max(g[i * nb + j].norm());
        }
    }
    let peak = profile.iter().copied().fold(0.0, f64::max);
    let significant: Vec<bool> = profile
        .iter()
        .map(|&v| v >= thresholds.temporal_support * peak)
        .collect();
    let arc = n - largest_cyclic_gap(&significant);
    // an aliased waveform fills most of the window
    if arc * 4 > n * 3 {
        return true;
    }
    let t_support = 0.5 * arc as f64 * axis.time_step();
    axis.time_window() < WINDOW_FACTOR * (t_support + shift)
}

fn largest_cyclic_gap(significant: &[bool]) -> usize {
    let n = significant.len();
    let Some(start) = significant.iter().position(|&s| s) else {
        return n;
    };
    let mut best = 0;
    let mut run = 0;
    for k in 1..=n {
        if significant[(start + k) % n] {
            best = best.max(run);
            run = 0;
        } else {
            run += 1;
        }
    }
    best
}

/// Temporal amplitude on the dual grid, times in increasing order along each axis.
#[derive(Debug, Clone)]
pub struct TemporalAmplitude {
    pub layout: GridLayout,
    /// Dual of the first spectral axis (`ta`, or `u = ta - tb`).
    pub first_times: Vec<f64>,
    /// Dual of the second spectral axis (`tb` in both layouts).
    pub second_times: Vec<f64>,
    /// Row-major, `first_times` index outer.
    pub values: Vec<Complex64>,
}

impl TemporalAmplitude {
    pub fn time_pair(&self, i: usize, j: usize) -> (f64, f64) {
        self.layout
            .time_pair(self.first_times[i], self.second_times[j])
    }

    pub fn cell(&self) -> f64 {
        let dt1 = self.first_times[1] - self.first_times[0];
        let dt2 = self.second_times[1] - self.second_times[0];
        dt1 * dt2
    }

    /// `Σ |g|² Δt Δt`.
    pub fn discrete_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell()
    }

    /// `(ta, tb, |g|²)` triples in grid order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let nb = self.second_times.len();
        self.values.iter().enumerate().map(move |(idx, z)| {
            let (ta, tb) = self.time_pair(idx / nb, idx % nb);
            (ta, tb, z.norm_sqr())
        })
    }
}

pub fn temporal_amplitude(jsa: &BiphotonAmplitude) -> Result<TemporalAmplitude> {
    if !jsa.normalized {
        return Err(Error::NotNormalized);
    }
    Ok(TemporalAmplitude {
        layout: jsa.grid.layout,
        first_times: jsa.grid.first.times(),
        second_times: jsa.grid.second.times(),
        values: spectral_to_temporal(&jsa.grid, &jsa.samples),
    })
}

/// Evaluates `(1/2π)² Σ f e^{-i(x t1 + y t2)} Δx Δy` on the dual grid,
/// returned in increasing-time order.
pub(crate) fn spectral_to_temporal(grid: &GridSpec, spectrum: &[Complex64]) -> Vec<Complex64> {
    let (na, nb) = (grid.first.len, grid.second.len);
    let mut data = spectrum.to_vec();
    let mut planner = FftPlanner::<f64>::new();
    let row_fft = planner.plan_fft_forward(nb);
    let col_fft = planner.plan_fft_forward(na);
    for row in data.chunks_exact_mut(nb) {
        row_fft.process(row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); na];
    for j in 0..nb {
        for i in 0..na {
            column[i] = data[i * nb + j];
        }
        col_fft.process(&mut column);
        for i in 0..na {
            data[i * nb + j] = column[i];
        }
    }

    let scale = grid.cell() / (4.0 * PI * PI);
    let phase = |axis: &Axis| -> Vec<Complex64> {
        // e^{-i x0 t} for t in shifted order
        axis.times()
            .iter()
            .map(|&t| Complex64::from_polar(scale.sqrt(), -axis.start * t))
            .collect()
    };
    let (pa, pb) = (phase(&grid.first), phase(&grid.second));
    let mut out = vec![Complex64::new(0.0, 0.0); na * nb];
    for p in 0..na {
        let i = (p + na / 2) % na;
        for q in 0..nb {
            let j = (q + nb / 2) % nb;
            out[p * nb + q] = data[i * nb + j] * pa[p] * pb[q];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::Table;

    fn gaussian(b_p: f64, b: f64) -> PhotonPairSource {
        PhotonPairSource::gaussian(b_p, b, b, 0.0).unwrap()
    }

    fn cartesian(n: usize, half: f64) -> GridSpec {
        GridSpec {
            layout: GridLayout::Cartesian,
            first: Axis::centered(n, 0.0, 2.0 * half),
            second: Axis::centered(n, 0.0, 2.0 * half),
        }
    }

    /// Weighted second moments `(var_x, var_y, cov)` of a density on points.
    fn moments(points: impl Iterator<Item = (f64, f64, f64)>) -> (f64, f64, f64) {
        let pts: Vec<_> = points.collect();
        let w: f64 = pts.iter().map(|p| p.2).sum();
        let mx = pts.iter().map(|p| p.0 * p.2).sum::<f64>() / w;
        let my = pts.iter().map(|p| p.1 * p.2).sum::<f64>() / w;
        let vx = pts.iter().map(|p| (p.0 - mx).powi(2) * p.2).sum::<f64>() / w;
        let vy = pts.iter().map(|p| (p.1 - my).powi(2) * p.2).sum::<f64>() / w;
        let c = pts.iter().map(|p| (p.0 - mx) * (p.1 - my) * p.2).sum::<f64>() / w;
        (vx, vy, c)
    }

    #[test]
    fn normalized_after_build() {
        let jsa = build_jsa(&gaussian(1.0, 1.0), GridChoice::Auto { tau_max: 1.0 }).unwrap();
        assert!(jsa.is_normalized());
        assert!((jsa.discrete_norm() - 1.0).abs() < 1e-10);
        assert!(jsa.boundary_ratio() <= 1e-8);
    }

    #[test]
    fn gaussian_jsi_correlation() {
        // oracle: direct evaluation of the product form on a fine Cartesian grid
        let src = gaussian(1.0, 1.0);
        let oracle = {
            let h = 0.02;
            let pts = (0..1200).flat_map(|i| {
                (0..1200).map(move |j| {
                    let (x, y) = (-12.0 + h * i as f64, -12.0 + h * j as f64);
                    (x, y, (-(x * x) / 2.0 - y * y / 2.0 - (x + y).powi(2) / 2.0).exp())
                })
            });
            moments(pts)
        };
        let jsa = build_jsa(&src, GridChoice::Auto { tau_max: 0.0 }).unwrap();
        let (vx, vy, c) = moments(jsa.jsi_points());
        assert!((vx - oracle.0).abs() < 1e-6 && (vy - oracle.1).abs() < 1e-6);
        let rho = c / (vx * vy).sqrt();
        let rho_oracle = oracle.2 / (oracle.0 * oracle.1).sqrt();
        assert!((rho - rho_oracle).abs() < 1e-6);
        assert!((rho + 0.5).abs() < 1e-6);
        // sum-frequency direction is narrower than the difference direction
        let var_sum = vx + vy + 2.0 * c;
        let var_diff = vx + vy - 2.0 * c;
        assert!(var_sum < var_diff);
    }

    #[test]
    fn constant_pump_factorizes() {
        let flat = Table::new(vec![(-1e3, 1.0.into()), (1e3, 1.0.into())]).unwrap();
        let src = PhotonPairSource::new(
            PumpSpec::pulsed(SpectralProfile::tabulated(flat).unwrap()),
            SpectralProfile::gaussian(1.0, 0.0).unwrap(),
            SpectralProfile::super_gaussian(3, 0.7, 0.3).unwrap(),
        );
        let jsa = build_jsa(&src, GridChoice::Fixed(cartesian(64, 8.0))).unwrap();
        let f = jsa.intensity();
        let n = 64;
        let peak = f.iter().copied().fold(0.0, f64::max);
        for (i, k) in [(10, 40), (31, 33), (5, 60)] {
            for (j, l) in [(20, 30), (32, 35)] {
                let lhs = f[i * n + j] * f[k * n + l];
                let rhs = f[i * n + l] * f[k * n + j];
                assert!((lhs - rhs).abs() <= 1e-12 * peak * peak);
            }
        }
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let err = build_jsa(&gaussian(1.0, 1.0), GridChoice::Fixed(cartesian(64, 3.0)));
        assert!(matches!(err, Err(Error::GridRejected(_))));
        let err = build_jsa(&gaussian(1.0, 1.0), GridChoice::Fixed(cartesian(48, 8.0)));
        assert!(matches!(err, Err(Error::GridRejected(_))));
    }

    #[test]
    fn cw_pump_has_no_jsa() {
        let src = gaussian(0.0, 1.0);
        assert!(matches!(
            build_jsa(&src, GridChoice::Auto { tau_max: 1.0 }),
            Err(Error::CwPump)
        ));
    }

    #[test]
    fn auto_grid_rules() {
        let g0 = auto_grid(&gaussian(1.0, 1.0), 0.0).unwrap();
        assert!(g0.first.start <= -8.0 && g0.first.start + g0.first.span >= 8.0);
        assert!(g0.second.start <= -8.0 && g0.second.start + g0.second.span >= 8.0);
        let g10 = auto_grid(&gaussian(1.0, 1.0), 10.0).unwrap();
        assert!(g10.first.step() < g0.first.step());
        assert!(g10.second.step() < g0.second.step());
        // a narrow pump does not shrink the ωa span
        let g = auto_grid(&gaussian(0.1, 1.0), 1.0).unwrap();
        assert!(g.first.span >= 16.0);
        assert!(g.second.span <= 1.61);
    }

    #[test]
    fn narrow_pump_leaves_marginal_governed_by_filters() {
        // oracle: marginal rms width of ωa from the JSI equals the filter-limited
        // width sqrt(Ba² (Bb² + Bp²) / D) computed from the Gaussian covariance
        let jsa = build_jsa(&gaussian(0.1, 1.0), GridChoice::Auto { tau_max: 0.0 }).unwrap();
        let (vx, _, _) = moments(jsa.jsi_points());
        let d: f64 = 0.01 + 2.0;
        let expected = (1.01 / d).sqrt();
        assert!((vx.sqrt() - expected).abs() < 1e-6, "{}", vx.sqrt());
    }

    #[test]
    fn temporal_widths_match_gaussian_transform() {
        // |g|² has covariance P/4 with P = [[1/Ba²+1/Bp², 1/Bp²], [1/Bp², 1/Bb²+1/Bp²]]
        for (b_p, b_a, b_b) in [(1.0, 1.0, 1.0), (0.5, 1.0, 2.0)] {
            let src = PhotonPairSource::gaussian(b_p, b_a, b_b, 0.0).unwrap();
            let jsa = build_jsa(&src, GridChoice::Auto { tau_max: 0.0 }).unwrap();
            let g = temporal_amplitude(&jsa).unwrap();
            assert!((g.discrete_norm() - 1.0).abs() < 1e-8);
            let (va, vb, c) = moments(g.points());
            let ip = 1.0 / (b_p * b_p);
            let (pa, pb) = (1.0 / (b_a * b_a) + ip, 1.0 / (b_b * b_b) + ip);
            assert!((va - pa / 4.0).abs() < 1e-6, "{va}");
            assert!((vb - pb / 4.0).abs() < 1e-6, "{vb}");
            assert!((c - ip / 4.0).abs() < 1e-6, "{c}");
        }
    }

    #[test]
    fn quasi_cw_waveform_is_stationary() {
        let src = gaussian(0.01, 1.0);
        let jsa = build_jsa(&src, GridChoice::Auto { tau_max: 0.0 }).unwrap();
        let g = temporal_amplitude(&jsa).unwrap();
        let (va, vb, c) = moments(g.points());
        let along_sum = (va + vb + 2.0 * c) / 2.0;
        let along_diff = (va + vb - 2.0 * c) / 2.0;
        assert!(along_sum > 100.0 * along_diff, "{along_sum} vs {along_diff}");
    }

    #[test]
    fn cartesian_and_sum_frequency_transforms_agree() {
        let src = PhotonPairSource::gaussian(0.7, 1.0, 1.3, 0.5).unwrap();
        let cart = build_jsa(&src, GridChoice::Fixed(cartesian(256, 12.0))).unwrap();
        let tc = temporal_amplitude(&cart).unwrap();
        let mc = moments(tc.points());
        let sf = build_jsa(&src, GridChoice::Auto { tau_max: 0.0 }).unwrap();
        let ms = moments(temporal_amplitude(&sf).unwrap().points());
        assert!((mc.0 - ms.0).abs() < 1e-6 && (mc.1 - ms.1).abs() < 1e-6);
        assert!((mc.2 - ms.2).abs() < 1e-6);
    }

    #[test]
    fn exchange_transposes_cartesian_jsa() {
        let src = PhotonPairSource::new(
            PumpSpec::gaussian(0.8).unwrap(),
            SpectralProfile::gaussian(1.0, -0.4).unwrap(),
            SpectralProfile::super_gaussian(3, 1.5, 0.4).unwrap(),
        );
        let grid = cartesian(128, 14.0);
        let f = build_jsa(&src, GridChoice::Fixed(grid)).unwrap();
        let ft = build_jsa(&src.exchanged(), GridChoice::Fixed(grid)).unwrap();
        let n = 128;
        for i in 0..n {
            for j in 0..n {
                let d = f.samples()[i * n + j] - ft.samples()[j * n + i];
                assert!(d.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unnormalized_amplitude_is_refused() {
        let grid = cartesian(64, 8.0);
        let raw = BiphotonAmplitude::from_samples(grid, vec![Complex64::new(1.0, 0.0); 64 * 64], "raw")
            .unwrap();
        assert!(matches!(temporal_amplitude(&raw), Err(Error::NotNormalized)));
    }
}
