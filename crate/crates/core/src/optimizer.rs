//! Optimal compensator DGD and concurrence sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biphoton::PhotonPairSource;
use crate::concurrence::{ConcurrenceModel, Engine, Method, PmdScenario};
use crate::error::{Error, Result};
use crate::profiles::{PumpSpec, SpectralProfile};

const COARSE_POINTS: usize = 33;
const MAX_ITERATIONS: usize = 200;
/// 1/φ
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Closed-form optimum for Gaussian spectra:
/// `τb_opt = τa / (1 + Bp²/Ba²)`, `C_opt = exp[-½ τa² / (Bp⁻² + Ba⁻²)]`.
/// Independent of Bob's filter bandwidth.
pub fn optimal_dgd_gaussian(b_p: f64, b_a: f64, tau_a: f64) -> (f64, f64) {
    if b_p == 0.0 {
        return (tau_a, 1.0);
    }
    let tau_b = tau_a / (1.0 + (b_p * b_p) / (b_a * b_a));
    let c = (-0.5 * tau_a * tau_a / (1.0 / (b_p * b_p) + 1.0 / (b_a * b_a))).exp();
    (tau_b, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub tau_b_opt: f64,
    pub c_opt: f64,
    pub iterations: usize,
    /// Final bracket around the maximizer.
    pub bracket: (f64, f64),
    pub converged: bool,
}

/// Default search interval: `[0, 2τa]`, mirrored for negative `τa`.
pub fn default_bracket(tau_a: f64) -> (f64, f64) {
    if tau_a >= 0.0 {
        (0.0, 2.0 * tau_a)
    } else {
        (2.0 * tau_a, 0.0)
    }
}

/// Maximizes `C(τa, ·)` over `bracket`: a 33-point scan picks the best
/// sub-interval, then golden-section search narrows it to `tol`.
///
/// Hitting the iteration cap is not an error; `converged` is false and the
/// best point so far is returned.
pub fn optimize_compensator(
    model: &dyn ConcurrenceModel,
    tau_a: f64,
    bracket: Option<(f64, f64)>,
    tol: f64,
) -> Result<OptimizationResult> {
    let (lo, hi) = bracket.unwrap_or_else(|| default_bracket(tau_a));
    if !(tol > 0.0) || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need lo <= hi and tol > 0 (got [{lo}, {hi}], tol {tol})"
        )));
    }
    let eval = |tau_b: f64| -> Result<f64> {
        Ok(model.evaluate(&PmdScenario::new(tau_a, tau_b)?)?.concurrence)
    };
    if lo == hi {
        return Ok(OptimizationResult {
            tau_b_opt: lo,
            c_opt: eval(lo)?,
            iterations: 0,
            bracket: (lo, hi),
            converged: true,
        });
    }

    let step = (hi - lo) / (COARSE_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..COARSE_POINTS)
        .map(|k| if k + 1 == COARSE_POINTS { hi } else { lo + k as f64 * step })
        .collect();
    let values = grid.iter().map(|&x| eval(x)).collect::<Result<Vec<_>>>()?;
    let best = (0..COARSE_POINTS)
        .max_by(|&i, &j| values[i].total_cmp(&values[j]).then(j.cmp(&i)))
        .expect("nonempty");
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(COARSE_POINTS - 1)];

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    let mut iterations = 0;
    while 0.5 * (b - a) > tol && iterations < MAX_ITERATIONS {
        iterations += 1;
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2)?;
        }
    }
    let converged = 0.5 * (b - a) <= tol;
    let mid = 0.5 * (a + b);
    let candidates = [
        (mid, eval(mid)?),
        (x1, f1),
        (x2, f2),
        (grid[best], values[best]),
    ];
    let (tau_b_opt, c_opt) = candidates
        .into_iter()
        .fold((mid, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
    Ok(OptimizationResult {
        tau_b_opt,
        c_opt,
        iterations,
        bracket: (a.min(tau_b_opt), b.max(tau_b_opt)),
        converged,
    })
}

/// Ordered `(x, C)` points with a description of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub variable: String,
    /// Fixed parameters, in insertion order.
    pub metadata: Vec<(String, String)>,
    pub points: Vec<(f64, f64)>,
}

impl SweepCurve {
    pub fn new(variable: &str, metadata: Vec<(String, String)>, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidParameter("sweep x must be strictly increasing".into()));
        }
        if let Some(p) = points.iter().find(|p| !(p.1 >= 0.0 && p.1 <= 1.0 + 1e-9)) {
            return Err(Error::InvalidParameter(format!(
                "concurrence {} at x = {} is outside [0, 1]",
                p.1, p.0
            )));
        }
        Ok(Self {
            variable: variable.to_string(),
            metadata,
            points,
        })
    }

    /// Point with the largest concurrence (first one on ties).
    pub fn peak(&self) -> Option<(f64, f64)> {
        self.points
            .iter()
            .copied()
            .fold(None, |acc: Option<(f64, f64)>, p| match acc {
                Some(a) if a.1 >= p.1 => Some(a),
                _ => Some(p),
            })
    }

    /// Largest increase between consecutive points (0 for a non-increasing curve).
    pub fn max_rise(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1].1 - w[0].1)
            .fold(0.0, f64::max)
    }
}

fn check_grid(grid: &[f64], name: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(format!(
            "{name} grid must be finite and strictly increasing"
        )));
    }
    Ok(())
}

/// `C(τa, τb)` over a τb grid. `x` is `τb/τa`, or `τb` when `τa = 0`.
pub fn sweep_taub(model: &dyn ConcurrenceModel, tau_a: f64, tau_b_grid: &[f64]) -> Result<SweepCurve> {
    check_grid(tau_b_grid, "tau_b")?;
    let values: Vec<f64> = tau_b_grid
        .par_iter()
        .enumerate()
        .map(|(index, &tau_b)| {
            PmdScenario::new(tau_a, tau_b)
                .and_then(|s| model.evaluate(&s))
                .map(|r| r.concurrence)
                .map_err(|e| Error::SweepPoint {
                    index,
                    source: Box::new(e),
                })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let variable = if tau_a != 0.0 { "tau_b/tau_a" } else { "tau_b" };
    let mut points: Vec<(f64, f64)> = tau_b_grid
        .iter()
        .map(|&t| if tau_a != 0.0 { t / tau_a } else { t })
        .zip(values)
        .collect();
    if tau_a < 0.0 {
        points.reverse();
    }
    SweepCurve::new(
        variable,
        vec![("tau_a".to_string(), format!("{tau_a:e}"))],
        points,
    )
}

/// Pump family used when sweeping the pump bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PumpShape {
    Gaussian,
    SuperGaussian { order: u32 },
}

impl PumpShape {
    pub fn pump(self, b_p: f64) -> Result<PumpSpec> {
        if b_p == 0.0 {
            return Ok(PumpSpec::cw());
        }
        let order = match self {
            PumpShape::Gaussian => 1,
            PumpShape::SuperGaussian { order } => order,
        };
        Ok(PumpSpec::pulsed(SpectralProfile::super_gaussian(order, b_p, 0.0)?))
    }
}

/// Best achievable `C` versus pump bandwidth; each point rebuilds the
/// biphoton amplitude and runs [`optimize_compensator`]. `Bp = 0` is the CW limit.
pub fn sweep_pump_bandwidth(
    filter_a: &SpectralProfile,
    filter_b: &SpectralProfile,
    pump_shape: PumpShape,
    tau_a: f64,
    b_p_grid: &[f64],
    tol: f64,
) -> Result<SweepCurve> {
    check_grid(b_p_grid, "B_p")?;
    if b_p_grid[0] < 0.0 {
        return Err(Error::InvalidParameter("pump bandwidths must be >= 0".into()));
    }
    let tau_max = 2.0 * tau_a.abs();
    let values: Vec<f64> = b_p_grid
        .par_iter()
        .enumerate()
        .map(|(index, &b_p)| {
            let run = || -> Result<f64> {
                let source =
                    PhotonPairSource::new(pump_shape.pump(b_p)?, filter_a.clone(), filter_b.clone());
                let engine = Engine::build(&source, Method::FreqQuadrature, tau_max)?;
                Ok(optimize_compensator(&engine, tau_a, None, tol)?.c_opt)
            };
            run().map_err(|e| Error::SweepPoint {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    SweepCurve::new(
        "B_p",
        vec![
            ("tau_a".to_string(), format!("{tau_a:e}")),
            ("filter_a".to_string(), filter_a.descriptor()),
            ("filter_b".to_string(), filter_b.descriptor()),
            ("pump_shape".to_string(), format!("{pump_shape:?}")),
        ],
        b_p_grid.iter().copied().zip(values).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biphoton::{build_jsa, GridChoice};
    use crate::concurrence::{concurrence_gaussian, GaussianModel};

    fn gaussian_engine(b_p: f64, b_a: f64, b_b: f64, tau_max: f64) -> Engine {
        let src = PhotonPairSource::gaussian(b_p, b_a, b_b, 0.0).unwrap();
        Engine::build(&src, Method::FreqQuadrature, tau_max).unwrap()
    }

    #[test]
    fn closed_form_optimum() {
        assert_eq!(optimal_dgd_gaussian(0.0, 1.0, 1.0), (1.0, 1.0));
        let (t, c) = optimal_dgd_gaussian(1.0, 1.0, 1.0);
        assert!((t - 0.5).abs() < 1e-15);
        assert!((c - (-0.25f64).exp()).abs() < 1e-15);
        // the optimum of the closed form, found by brute-force scan
        let (t, c) = optimal_dgd_gaussian(0.7, 1.3, 1.1);
        let (mut bt, mut bc) = (0.0, 0.0);
        for k in 0..=200_000 {
            let tb = k as f64 * 1e-5;
            let v = concurrence_gaussian(0.7, 1.3, 0.4, 1.1, tb);
            if v > bc {
                (bt, bc) = (tb, v);
            }
        }
        assert!((bt - t).abs() < 2e-5 && (bc - c).abs() < 1e-10);
    }

    #[test]
    fn physical_units() {
        let b = 2.0 * std::f64::consts::PI * 100e9;
        let (_, c) = optimal_dgd_gaussian(b, b, 1e-12);
        assert!((c - 0.906).abs() < 1e-3, "{c}");
    }

    #[test]
    fn numeric_optimum_matches_closed_form() {
        let e = gaussian_engine(1.0, 1.0, 1.0, 2.0);
        let r = optimize_compensator(&e, 1.0, None, 1e-4).unwrap();
        assert!(r.converged);
        assert!((r.tau_b_opt - 0.5).abs() < 1e-4);
        assert!((r.c_opt - 0.778_800_783_071_404_9).abs() < 1e-6);
        assert!(r.bracket.0 <= r.tau_b_opt && r.tau_b_opt <= r.bracket.1);

        let e = gaussian_engine(0.1, 1.0, 1.0, 2.0);
        let r = optimize_compensator(&e, 1.0, None, 1e-4).unwrap();
        assert!((r.tau_b_opt - 1.0 / 1.01).abs() < 1e-4);
    }

    #[test]
    fn no_pmd_needs_no_compensation() {
        let e = gaussian_engine(1.0, 1.0, 1.0, 1.0);
        let r = optimize_compensator(&e, 0.0, None, 1e-4).unwrap();
        assert_eq!((r.tau_b_opt, r.c_opt), (0.0, 1.0));
    }

    #[test]
    fn negative_dgd_uses_mirrored_bracket() {
        let m = GaussianModel { b_p: 1.0, b_a: 1.0, b_b: 1.0 };
        let r = optimize_compensator(&m, -1.0, None, 1e-6).unwrap();
        assert!((r.tau_b_opt + 0.5).abs() < 1e-6);
    }

    #[test]
    fn iteration_cap_reports_unconverged() {
        let m = GaussianModel { b_p: 1.0, b_a: 1.0, b_b: 1.0 };
        let r = optimize_compensator(&m, 1.0, None, 1e-300).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 200);
        assert!((r.tau_b_opt - 0.5).abs() < 1e-6);
    }

    #[test]
    fn bad_bracket_is_an_error() {
        let m = GaussianModel { b_p: 1.0, b_a: 1.0, b_b: 1.0 };
        assert!(optimize_compensator(&m, 1.0, Some((1.0, 0.0)), 1e-4).is_err());
        assert!(optimize_compensator(&m, 1.0, None, 0.0).is_err());
    }

    #[test]
    fn coarse_scan_and_golden_section_agree() {
        let models: Vec<Box<dyn ConcurrenceModel>> = vec![
            Box::new(gaussian_engine(0.5, 1.0, 2.0, 2.0)),
            Box::new(
                Engine::build(
                    &PhotonPairSource::super_gaussian(3, 1.0, 1.0, 1.0).unwrap(),
                    Method::FreqQuadrature,
                    2.0,
                )
                .unwrap(),
            ),
        ];
        for m in &models {
            let grid: Vec<f64> = (0..33).map(|k| 2.0 * k as f64 / 32.0).collect();
            let curve = sweep_taub(m.as_ref(), 1.0, &grid).unwrap();
            let (x_coarse, c_coarse) = curve.peak().unwrap();
            let r = optimize_compensator(m.as_ref(), 1.0, None, 1e-5).unwrap();
            assert!(r.c_opt >= c_coarse);
            assert!((r.tau_b_opt - x_coarse).abs() <= 2.0 / 32.0 + 1e-5);
        }
    }

    #[test]
    fn optimum_is_independent_of_bob_filter() {
        let reference = optimal_dgd_gaussian(0.8, 1.0, 1.0);
        for b_b in [0.5, 1.0, 2.0] {
            let e = gaussian_engine(0.8, 1.0, b_b, 2.0);
            let r = optimize_compensator(&e, 1.0, None, 1e-5).unwrap();
            assert!((r.c_opt - reference.1).abs() < 1e-6);
            assert!((r.tau_b_opt - reference.0).abs() < 1e-4);
        }
    }

    #[test]
    fn taub_sweep() {
        let src = PhotonPairSource::gaussian(0.1, 1.0, 1.0, 0.0).unwrap();
        let jsa = build_jsa(&src, GridChoice::Auto { tau_max: 2.0 }).unwrap();
        let grid: Vec<f64> = (0..=200).map(|k| k as f64 * 0.01).collect();
        let curve = sweep_taub(&jsa, 1.0, &grid).unwrap();
        let (x, c) = curve.peak().unwrap();
        assert!((x - 0.99).abs() <= 0.01);
        assert!((c - 0.995).abs() < 1e-3);

        let single = sweep_taub(&jsa, 0.0, &[0.0]).unwrap();
        assert_eq!(single.points, vec![(0.0, 1.0)]);
        assert!(sweep_taub(&jsa, 1.0, &[]).is_err());
        assert!(sweep_taub(&jsa, 1.0, &[0.5, 0.2]).is_err());
    }

    #[test]
    fn taub_sweep_with_negative_tau_a_keeps_x_increasing() {
        let m = GaussianModel { b_p: 1.0, b_a: 1.0, b_b: 1.0 };
        let grid = [-1.0, -0.5, 0.0];
        let curve = sweep_taub(&m, -1.0, &grid).unwrap();
        let xs: Vec<f64> = curve.points.iter().map(|p| p.0).collect();
        assert_eq!(xs, vec![-0.0, 0.5, 1.0]);
        let expected = concurrence_gaussian(1.0, 1.0, 1.0, -1.0, -0.5);
        assert_eq!(curve.points[1].1, expected);
        assert_eq!(curve.points[0].1, concurrence_gaussian(1.0, 1.0, 1.0, -1.0, 0.0));
    }

    #[test]
    fn pump_bandwidth_sweep() {
        let g = SpectralProfile::gaussian(1.0, 0.0).unwrap();
        let grid = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];
        let curve = sweep_pump_bandwidth(&g, &g, PumpShape::Gaussian, 1.0, &grid, 1e-5).unwrap();
        assert!(curve.max_rise() <= 1e-6);
        assert!((curve.points[0].1 - 1.0).abs() < 1e-9);
        assert!((curve.points[3].1 - (-0.25f64).exp()).abs() < 1e-6);
        for &(b_p, c) in &curve.points {
            assert!((c - optimal_dgd_gaussian(b_p, 1.0, 1.0).1).abs() < 1e-6);
        }
    }

    #[test]
    fn sweep_failure_reports_index() {
        let g = SpectralProfile::gaussian(1.0, -20.0).unwrap();
        let err = sweep_pump_bandwidth(&g, &g, PumpShape::Gaussian, 1.0, &[0.0, 1.0], 1e-4)
            .unwrap_err();
        assert!(matches!(err, Error::SweepPoint { index: 0, .. }));
    }
}
