//! Pump and filter spectral profiles.
//!
//! Frequencies are angular (rad/s) throughout. A profile is a complex *field*
//! amplitude; its bandwidth `B` is the rms width of the intensity `|P(ω)|²`.
//!
//! Parametric shapes share one family: the intensity is
//! `exp(-((ω - c)² / 2σ²)ⁿ)`, so the field is its square root. `n = 1` is the
//! Gaussian, for which `σ = B` and the field reduces to `exp(-(ω - c)²/4B²)`.
//! For `n > 1` (super-Gaussian, flat-top) `σ` is calibrated so the intensity
//! rms width equals the requested `B`.
//!
//! Tabulated profiles interpolate linearly between samples and are zero
//! outside the table.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quadrature;

/// Parametric profiles are treated as zero beyond this many rms widths when a
/// finite support is needed (grid construction).
pub const SUPPORT_RMS_WIDTHS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Gaussian,
    SuperGaussian { order: u32 },
    Tabulated(Table),
}

/// Samples of a complex field on a strictly increasing frequency axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    omega: Vec<f64>,
    amplitude: Vec<Complex64>,
}

impl Table {
    pub fn new(points: Vec<(f64, Complex64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter(
                "table needs at least two samples".into(),
            ));
        }
        let (omega, amplitude): (Vec<f64>, Vec<Complex64>) = points.into_iter().unzip();
        if omega.iter().any(|w| !w.is_finite())
            || amplitude.iter().any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::InvalidParameter("table has non-finite entries".into()));
        }
        if omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "table frequencies must be strictly increasing".into(),
            ));
        }
        Ok(Self { omega, amplitude })
    }

    /// Reads `omega_rad_s,re,im` rows. A non-numeric first line is taken as a header.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!(
                    "table line {}: expected 3 columns, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                fields.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(v) => points.push((v[0], Complex64::new(v[1], v[2]))),
                Err(_) if points.is_empty() => continue, // header
                Err(e) => {
                    return Err(Error::Parse(format!("table line {}: {e}", lineno + 1)));
                }
            }
        }
        Self::new(points)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], *self.omega.last().expect("nonempty"))
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.omega.iter().copied().zip(self.amplitude.iter().copied())
    }

    fn eval(&self, w: f64) -> Complex64 {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&w) {
            return Complex64::new(0.0, 0.0);
        }
        let k = self.omega.partition_point(|&x| x <= w);
        if k == self.omega.len() {
            return self.amplitude[k - 1];
        }
        let (w0, w1) = (self.omega[k - 1], self.omega[k]);
        let t = (w - w0) / (w1 - w0);
        self.amplitude[k - 1] * (1.0 - t) + self.amplitude[k] * t
    }

    /// Exact integrals of `ωᵖ |P(ω)|²` (p = 0, 1, 2) for the piecewise-linear field.
    fn intensity_moments(&self) -> [f64; 3] {
        // 3-point Gauss-Legendre is exact for the degree-4 integrands here.
        let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
        let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let mut m = [0.0; 3];
        for k in 1..self.omega.len() {
            let (w0, w1) = (self.omega[k - 1], self.omega[k]);
            let (a0, a1) = (self.amplitude[k - 1], self.amplitude[k]);
            let half = 0.5 * (w1 - w0);
            for (x, wt) in nodes.iter().zip(weights) {
                let t = 0.5 * (1.0 + x);
                let w = w0 + (w1 - w0) * t;
                let i = (a0 * (1.0 - t) + a1 * t).norm_sqr() * wt * half;
                m[0] += i;
                m[1] += w * i;
                m[2] += w * w * i;
            }
        }
        m
    }

    fn dilated(&self, center: f64, factor: f64) -> Self {
        Self {
            omega: self
                .omega
                .iter()
                .map(|w| center + factor * (w - center))
                .collect(),
            amplitude: self.amplitude.clone(),
        }
    }
}

/// A field spectrum with calibrated rms bandwidth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    shape: Shape,
    /// Peak position for parametric shapes, intensity centroid for tables.
    center: f64,
    rms_bandwidth: f64,
    /// Internal width σ of the parametric family; unused for tables.
    width: f64,
}

impl SpectralProfile {
    pub fn gaussian(rms_bandwidth: f64, center: f64) -> Result<Self> {
        Self::super_gaussian(1, rms_bandwidth, center)
    }

    /// Super-Gaussian of the given order whose intensity rms width is `rms_bandwidth`.
    pub fn super_gaussian(order: u32, rms_bandwidth: f64, center: f64) -> Result<Self> {
        check_center(center)?;
        let width = calibrate_supergaussian(rms_bandwidth, order)?;
        Ok(Self {
            shape: shape_for_order(order),
            center,
            rms_bandwidth,
            width,
        })
    }

    /// Super-Gaussian specified by its raw width σ instead of its rms bandwidth.
    pub fn super_gaussian_raw(order: u32, width: f64, center: f64) -> Result<Self> {
        check_center(center)?;
        if !(width > 0.0 && width.is_finite()) || order == 0 {
            return Err(Error::InvalidParameter(format!(
                "super-Gaussian needs order >= 1 and width > 0 (got n={order}, σ={width})"
            )));
        }
        Ok(Self {
            shape: shape_for_order(order),
            center,
            rms_bandwidth: width / supergaussian_width_ratio(order),
            width,
        })
    }

    pub fn tabulated(table: Table) -> Result<Self> {
        let [m0, m1, m2] = table.intensity_moments();
        if !(m0 > 0.0 && m0.is_finite()) {
            return Err(Error::NonNormalizable("table has zero energy".into()));
        }
        let mean = m1 / m0;
        let var = (m2 / m0 - mean * mean).max(0.0);
        if !(var > 0.0) {
            return Err(Error::NonNormalizable("table has zero rms width".into()));
        }
        Ok(Self {
            shape: Shape::Tabulated(table),
            center: mean,
            rms_bandwidth: var.sqrt(),
            width: 0.0,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// The calibrated (nominal) rms bandwidth.
    pub fn rms_bandwidth(&self) -> f64 {
        self.rms_bandwidth
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.shape, Shape::Gaussian)
    }

    /// Same shape, re-centered.
    pub fn with_center(&self, center: f64) -> Self {
        match &self.shape {
            Shape::Tabulated(t) => {
                let shift = center - self.center;
                let moved = Table {
                    omega: t.omega.iter().map(|w| w + shift).collect(),
                    amplitude: t.amplitude.clone(),
                };
                Self {
                    shape: Shape::Tabulated(moved),
                    center,
                    ..self.clone()
                }
            }
            _ => Self {
                center,
                ..self.clone()
            },
        }
    }

    /// Frequency axis stretched by `factor` about the profile center.
    pub fn dilated(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dilation factor must be positive, got {factor}"
            )));
        }
        let shape = match &self.shape {
            Shape::Tabulated(t) => Shape::Tabulated(t.dilated(self.center, factor)),
            s => s.clone(),
        };
        Ok(Self {
            shape,
            center: self.center,
            rms_bandwidth: self.rms_bandwidth * factor,
            width: self.width * factor,
        })
    }

    /// Field amplitude at `omega`.
    pub fn eval(&self, omega: f64) -> Complex64 {
        match &self.shape {
            Shape::Tabulated(t) => t.eval(omega),
            _ => Complex64::new(self.intensity(omega).sqrt(), 0.0),
        }
    }

    pub fn intensity(&self, omega: f64) -> f64 {
        match self.shape {
            Shape::Gaussian => {
                let x = omega - self.center;
                (-x * x / (2.0 * self.width * self.width)).exp()
            }
            Shape::SuperGaussian { order } => {
                let x = omega - self.center;
                (-(x * x / (2.0 * self.width * self.width)).powi(order as i32)).exp()
            }
            Shape::Tabulated(ref t) => t.eval(omega).norm_sqr(),
        }
    }

    /// Interval outside which the profile is treated as zero.
    pub fn support(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Tabulated(t) => t.range(),
            _ => {
                let half = SUPPORT_RMS_WIDTHS * self.rms_bandwidth;
                (self.center - half, self.center + half)
            }
        }
    }

    /// Numerically integrated intensity rms width.
    pub fn measure_rms_bandwidth(&self) -> Result<f64> {
        let [m0, m1, m2] = match &self.shape {
            Shape::Tabulated(t) => t.intensity_moments(),
            _ => {
                let c = self.center;
                // integrate the centered moments on each half-line separately
                let reach = 12.0 * self.width.max(self.rms_bandwidth);
                let moment = |p: i32| {
                    let f = |w: f64| (w - c).powi(p) * self.intensity(w);
                    quadrature::integrate(f, c - reach, c, 0.0, 1e-14)
                        + quadrature::integrate(f, c, c + reach, 0.0, 1e-14)
                };
                let (z0, z1, z2) = (moment(0), moment(1), moment(2));
                // back to raw moments so both branches share the formula below
                [z0, z1 + c * z0, z2 + 2.0 * c * z1 + c * c * z0]
            }
        };
        if !(m0 > 0.0 && m0.is_finite() && m2.is_finite()) {
            return Err(Error::NonNormalizable(format!(
                "zeroth intensity moment is {m0}"
            )));
        }
        let mean = m1 / m0;
        let var = m2 / m0 - mean * mean;
        if !(var > 0.0) {
            return Err(Error::NonNormalizable("zero rms width".into()));
        }
        Ok(var.sqrt())
    }

    /// Short human-readable descriptor, same grammar as [`FromStr`].
    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SpectralProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shape {
            Shape::Gaussian => write!(f, "gaussian:B={}", self.rms_bandwidth)?,
            Shape::SuperGaussian { order } => {
                write!(f, "supergauss:n={order},B={}", self.rms_bandwidth)?
            }
            Shape::Tabulated(ref t) => {
                return write!(
                    f,
                    "table:{}samples,B={},center={}",
                    t.omega.len(),
                    self.rms_bandwidth,
                    self.center
                )
            }
        }
        if self.center != 0.0 {
            write!(f, ",offset={}", self.center)?;
        }
        Ok(())
    }
}

fn shape_for_order(order: u32) -> Shape {
    if order == 1 {
        Shape::Gaussian
    } else {
        Shape::SuperGaussian { order }
    }
}

fn check_center(center: f64) -> Result<()> {
    if center.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("non-finite center {center}")))
    }
}

/// σ / B for intensity `exp(-((ω/σ)²/2)ⁿ)`:
/// the second moment is `2σ² Γ(3/2n) / Γ(1/2n)`.
fn supergaussian_width_ratio(order: u32) -> f64 {
    let n = order as f64;
    1.0 / (2.0 * gamma(1.5 / n) / gamma(0.5 / n)).sqrt()
}

/// Width σ that gives intensity `exp(-((ω/σ)²/2)ⁿ)` an rms width of `target_rms`.
pub fn calibrate_supergaussian(target_rms: f64, order: u32) -> Result<f64> {
    if !(target_rms > 0.0 && target_rms.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "rms bandwidth must be positive, got {target_rms}"
        )));
    }
    if order == 0 {
        return Err(Error::InvalidParameter("super-Gaussian order must be >= 1".into()));
    }
    if order == 1 {
        return Ok(target_rms);
    }
    Ok(target_rms * supergaussian_width_ratio(order))
}

pub fn eval_spectrum(profile: &SpectralProfile, omega: f64) -> Complex64 {
    profile.eval(omega)
}

pub fn rms_bandwidth(profile: &SpectralProfile) -> Result<f64> {
    profile.measure_rms_bandwidth()
}

/// Pump spectrum. The pump is always centered at zero frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    pub profile: SpectralProfile,
    /// Continuous-wave pump: the profile bandwidth is ignored.
    pub cw: bool,
}

impl PumpSpec {
    pub fn pulsed(profile: SpectralProfile) -> Self {
        Self { profile, cw: false }
    }

    pub fn cw() -> Self {
        Self {
            // placeholder profile; never evaluated for a CW pump
            profile: SpectralProfile::gaussian(1.0, 0.0).expect("valid"),
            cw: true,
        }
    }

    pub fn gaussian(rms_bandwidth: f64) -> Result<Self> {
        if rms_bandwidth == 0.0 {
            return Ok(Self::cw());
        }
        Ok(Self::pulsed(SpectralProfile::gaussian(rms_bandwidth, 0.0)?))
    }

    pub fn bandwidth(&self) -> f64 {
        if self.cw {
            0.0
        } else {
            self.profile.rms_bandwidth()
        }
    }

    pub fn is_gaussian(&self) -> bool {
        self.cw || self.profile.is_gaussian()
    }
}

/// Unit conversion for the profile grammar: bandwidth values and offsets.
pub trait FrequencyUnits {
    fn parse_frequency(&self, text: &str) -> Result<f64>;
}

/// Profile descriptor grammar:
///
/// ```text
/// gaussian:B=<freq>[,offset=<freq>]
/// supergauss:n=<int>,B=<freq>[,offset=<freq>]
/// table:<path.csv>
/// ```
///
/// Frequencies are parsed by `units`. Table paths are read from disk.
pub fn parse_profile(text: &str, units: &dyn FrequencyUnits) -> Result<SpectralProfile> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("profile '{text}': expected <kind>:<params>")))?;
    match kind.trim() {
        "table" => {
            let table = Table::from_csv_path(Path::new(rest.trim()))?;
            SpectralProfile::tabulated(table)
        }
        "gaussian" | "supergauss" => {
            let mut order: Option<u32> = None;
            let mut bandwidth: Option<f64> = None;
            let mut offset = 0.0;
            for item in rest.split(',') {
                let (key, value) = item.split_once('=').ok_or_else(|| {
                    Error::Parse(format!("profile '{text}': expected key=value, got '{item}'"))
                })?;
                match key.trim() {
                    "B" => bandwidth = Some(units.parse_frequency(value.trim())?),
                    "offset" => offset = units.parse_frequency(value.trim())?,
                    "n" => {
                        order = Some(value.trim().parse().map_err(|_| {
                            Error::Parse(format!("profile '{text}': bad order '{value}'"))
                        })?)
                    }
                    other => {
                        return Err(Error::Parse(format!(
                            "profile '{text}': unknown key '{other}'"
                        )))
                    }
                }
            }
            let bandwidth = bandwidth
                .ok_or_else(|| Error::Parse(format!("profile '{text}': missing B=")))?;
            let order = match kind.trim() {
                "gaussian" => {
                    if order.is_some() {
                        return Err(Error::Parse(format!(
                            "profile '{text}': gaussian takes no order"
                        )));
                    }
                    1
                }
                _ => order
                    .ok_or_else(|| Error::Parse(format!("profile '{text}': missing n=")))?,
            };
            SpectralProfile::super_gaussian(order, bandwidth, offset)
        }
        other => Err(Error::Parse(format!("unknown profile kind '{other}'"))),
    }
}

/// Pump descriptor: `cw`, or a profile descriptor without offset (the pump
/// is centered at zero frequency).
pub fn parse_pump(text: &str, units: &dyn FrequencyUnits) -> Result<PumpSpec> {
    if text.trim() == "cw" {
        return Ok(PumpSpec::cw());
    }
    let profile = parse_profile(text, units)?;
    if profile.center() != 0.0 {
        return Err(Error::Parse(format!(
            "pump '{text}': the pump is centered at zero, offset is not allowed"
        )));
    }
    Ok(PumpSpec::pulsed(profile))
}

/// Bare numbers, already in rad/s.
pub struct RawUnits;

impl FrequencyUnits for RawUnits {
    fn parse_frequency(&self, text: &str) -> Result<f64> {
        text.parse()
            .map_err(|_| Error::Parse(format!("bad number '{text}'")))
    }
}

impl FromStr for SpectralProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_profile(s, &RawUnits)
    }
}
