//! Built-in acceptance matrix: oracle agreement, engine equivalence, Wootters
//! cross-check, figure-shape checks and determinism.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::biphoton::{build_jsa, BiphotonAmplitude, GridChoice, PhotonPairSource};
use crate::concurrence::{
    concurrence_cw, concurrence_gaussian, concurrence_numeric, concurrence_time_domain,
    overlap_kappa, pump_limited_sensitivity_tolerance, sensitivity_tolerance, ConcurrenceModel,
    Engine, Method, PmdScenario,
};
use crate::error::Result;
use crate::io::sweep_csv_string;
use crate::optimizer::{
    optimal_dgd_gaussian, optimize_compensator, sweep_pump_bandwidth, sweep_taub, PumpShape,
};
use crate::polarization::{density_matrix_from_overlap, wootters_concurrence};
use crate::profiles::SpectralProfile;

/// Seed for the randomized scenario set.
pub const SCENARIO_SEED: u64 = 0x5eed_2b1f;

const ORACLE_TOL: f64 = 1e-6;
const WOOTTERS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub detail: String,
    /// Informational findings that are reported but not asserted.
    pub notes: Vec<String>,
}

impl CheckOutcome {
    fn new(id: &str, description: &str) -> Self {
        Self {
            id: id.to_string(),
            description: description.to_string(),
            passed: true,
            detail: String::new(),
            notes: Vec::new(),
        }
    }

    /// Records a sub-check; the outcome passes only if every sub-check does.
    fn check(&mut self, ok: bool, what: String) {
        if !ok {
            self.passed = false;
        }
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        if !ok {
            self.detail.push_str("FAIL ");
        }
        self.detail.push_str(&what);
    }

    fn error(mut self, e: crate::error::Error) -> Self {
        self.check(false, format!("error: {e}"));
        self
    }

    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("[{status}] {} {}: {}", self.id, self.description, self.detail)
    }
}

/// Knobs for exercising the harness itself.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ValidationOptions {
    /// Added to every Gaussian closed-form oracle value. Nonzero only when
    /// testing that the harness detects a wrong oracle.
    pub analytic_perturbation: f64,
}

impl ValidationOptions {
    fn oracle(&self, b_p: f64, b_a: f64, b_b: f64, tau_a: f64, tau_b: f64) -> f64 {
        concurrence_gaussian(b_p, b_a, b_b, tau_a, tau_b) + self.analytic_perturbation
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k + 1 == n {
                b
            } else {
                a + (b - a) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn gaussian_jsa(b_p: f64, b_a: f64, b_b: f64, tau_max: f64) -> Result<BiphotonAmplitude> {
    let src = PhotonPairSource::gaussian(b_p, b_a, b_b, 0.0)?;
    build_jsa(&src, GridChoice::Auto { tau_max })
}

const CLOSED_FORM_PUMPS: [f64; 5] = [0.01, 0.1, 0.5, 1.0, 2.0];

fn closed_form_taus() -> Vec<f64> {
    linspace(-2.0, 2.0, 5)
}

/// Numeric frequency-domain concurrence against the Gaussian closed form on a
/// 5×5×5 grid of `(Bp, τa, τb)`, `Ba = Bb = 1`.
pub fn check_closed_form(opts: &ValidationOptions) -> CheckOutcome {
    let mut out = CheckOutcome::new(
        "1",
        "Gaussian closed form vs frequency quadrature (5x5x5, tol 1e-6)",
    );
    let taus = closed_form_taus();
    let mut worst = (0.0f64, 0.0, 0.0, 0.0);
    for &b_p in &CLOSED_FORM_PUMPS {
        let jsa = match gaussian_jsa(b_p, 1.0, 1.0, 2.0) {
            Ok(j) => j,
            Err(e) => return out.error(e),
        };
        for &ta in &taus {
            for &tb in &taus {
                let c = match PmdScenario::new(ta, tb).and_then(|s| concurrence_numeric(&jsa, &s)) {
                    Ok(r) => r.concurrence,
                    Err(e) => return out.error(e),
                };
                let err = (c - opts.oracle(b_p, 1.0, 1.0, ta, tb)).abs();
                if err > worst.0 {
                    worst = (err, b_p, ta, tb);
                }
            }
        }
    }
    out.check(
        worst.0 <= ORACLE_TOL,
        format!(
            "max |dC| = {:.3e} at Bp={}, ta={}, tb={}",
            worst.0, worst.1, worst.2, worst.3
        ),
    );
    out
}

pub const OPTIMUM_PUMP_RATIOS: [f64; 5] = [0.0, 0.1, 0.5, 1.0, 2.0];

/// Numeric optimizer against the closed-form optimum for `Bp/Ba` in
/// [`OPTIMUM_PUMP_RATIOS`], `Ba = Bb = 1`, `τa = 1`.
pub fn check_optimum(_opts: &ValidationOptions) -> CheckOutcome {
    let mut out = CheckOutcome::new(
        "2",
        "numeric optimizer vs closed-form optimum (tau_b 1e-4*tau_a, C 1e-6)",
    );
    let tau_a = 1.0;
    for &r in &OPTIMUM_PUMP_RATIOS {
        let run = || -> Result<_> {
            let src = PhotonPairSource::gaussian(r, 1.0, 1.0, 0.0)?;
            let engine = Engine::build(&src, Method::FreqQuadrature, 2.0 * tau_a)?;
            optimize_compensator(&engine, tau_a, None, 1e-7)
        };
        let res = match run() {
            Ok(r) => r,
            Err(e) => return out.error(e),
        };
        let (t_ref, c_ref) = optimal_dgd_gaussian(r, 1.0, tau_a);
        let dt = (res.tau_b_opt - t_ref).abs();
        let dc = (res.c_opt - c_ref).abs();
        out.check(
            dt <= 1e-4 * tau_a && dc <= ORACLE_TOL,
            format!("Bp/Ba={r}: tb_opt={:.6} (ref {t_ref:.6}), C={:.9} (dC {dc:.1e})", res.tau_b_opt, res.c_opt),
        );
    }
    out
}

/// Matched DGD with a nearly monochromatic pump, and the exact CW engine.
pub fn check_decoherence_free(_opts: &ValidationOptions) -> CheckOutcome {
    let mut out = CheckOutcome::new(
        "3",
        "decoherence-free limit (Bp=1e-3: C>=0.9999; CW engine: 1 within 1e-10)",
    );
    let jsa = match gaussian_jsa(1e-3, 1.0, 1.0, 2.0) {
        Ok(j) => j,
        Err(e) => return out.error(e),
    };
    for tau in [0.5, 1.0, 2.0] {
        match PmdScenario::new(tau, tau).and_then(|s| concurrence_numeric(&jsa, &s)) {
            Ok(r) => out.check(r.concurrence >= 0.9999, format!("Bp=1e-3 ta=tb={tau}: C={:.8}", r.concurrence)),
            Err(e) => return out.error(e),
        }
    }
    let filters = [
        SpectralProfile::gaussian(1.0, 0.0),
        SpectralProfile::super_gaussian(3, 1.0, 0.0),
    ];
    for f in filters {
        let f = match f {
            Ok(f) => f,
            Err(e) => return out.error(e),
        };
        for tau in [0.5, 1.0, 2.0] {
            match concurrence_cw(&f, &f, tau, tau) {
                Ok(r) => out.check(
                    (r.concurrence - 1.0).abs() <= 1e-10,
                    format!("CW {} ta=tb={tau}: C={}", f.descriptor(), r.concurrence),
                ),
                Err(e) => return out.error(e),
            }
        }
    }
    out
}

/// A randomized source plus one DGD scenario.
#[derive(Debug, Clone)]
pub struct RandomCase {
    pub source: PhotonPairSource,
    pub scenario: PmdScenario,
}

/// The 25 seeded scenarios shared by the Wootters and engine-equivalence checks.
pub fn random_cases() -> Result<Vec<RandomCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SCENARIO_SEED);
    (0..25)
        .map(|k| {
            let b_p = rng.gen_range(0.05..2.0);
            let b_a = rng.gen_range(0.5..2.0);
            let b_b = rng.gen_range(0.5..2.0);
            let tau_a = rng.gen_range(-2.0..2.0);
            let tau_b = rng.gen_range(-2.0..2.0);
            let source = if k % 2 == 0 {
                PhotonPairSource::gaussian(b_p, b_a, b_b, 0.0)?
            } else {
                PhotonPairSource::super_gaussian(2 + (k as u32 / 2) % 2, b_p, b_a, b_b)?
            };
            Ok(RandomCase {
                source,
                scenario: PmdScenario::new(tau_a, tau_b)?,
            })
        })
        .collect()
}

fn case_jsa(case: &RandomCase) -> Result<BiphotonAmplitude> {
    build_jsa(
        &case.source,
        GridChoice::Auto {
            tau_max: case.scenario.max_abs(),
        },
    )
}

/// Wootters concurrence of the constructed density matrix equals `|κ|`.
pub fn check_wootters(_opts: &ValidationOptions) -> CheckOutcome {
    let mut out = CheckOutcome::new("4", "Wootters concurrence of rho equals |kappa| (25 random, tol 1e-9)");
    let cases = match random_cases() {
        Ok(c) => c,
        Err(e) => return out.error(e),
    };
    let mut worst = 0.0f64;
    for case in &cases {
        let kappa = match case_jsa(case).and_then(|j| overlap_kappa(&j, &case.scenario)) {
            Ok(k) => k,
            Err(e) => return out.error(e),
        };
        let c = match density_matrix_from_overlap(kappa) {
            Ok(rho) => wootters_concurrence(&rho),
            Err(e) => return out.error(e),
        };
        worst = worst.max((c - kappa.norm()).abs());
    }
    out.check(worst <= WOOTTERS_TOL, format!("max |C_W - |kappa|| = {worst:.3e} over {} cases", cases.len()));
    out
}

fn super_gaussian_sweep(b_p: f64) -> Result<(f64, f64)> {
    let src = PhotonPairSource::super_gaussian(3, b_p, 1.0, 1.0)?;
    let engine = Engine::build(&src, Method::FreqQuadrature, 2.0)?;
    let curve = sweep_taub(&engine, 1.0, &linspace(0.0, 2.0, 201))?;
    Ok(curve.peak().expect("nonempty sweep"))
}

/// Shape of the τb sweep for super-Gaussian (n=3) spectra, `B = 1`, `τa = 1`.
pub fn check_taub_sweep_shape(_opts: &ValidationOptions) -> CheckOutcome {
    let mut out = CheckOutcome::new("5", "super-Gaussian n=3 tau_b sweep peak location and height");
    match super_gaussian_sweep(0.1) {
        Ok((x, c)) => out.check(
            (x - 0.99).abs() <= 0.03 && c >= 0.99,
            format!("Bp=0.1: peak at tb/ta={x:.3} C={c:.5} (want 0.99+-0.03, C>=0.99)"),
        ),
        Err(e) => return out.error(e),
    }
    match super_gaussian_sweep(1.0) {
        Ok((x, c)) => out.check(
            x < 0.75 && c <= 0.85,
            format!("Bp=1: peak at tb/ta={x:.3} C={c:.5} (want <0.75, C<=0.85)"),
        ),
        Err(e) => return out.error(e),
    }
    out
}

pub const PUMP_SWEEP: [f64; 10] = [0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0];

/// Best achievable `C` versus pump bandwidth: monotone, with the large-`Bp`
/// plateau `exp(-B²τa²/2)`. Gated on Gaussian spectra; the super-Gaussian
/// curves are reported as notes.
pub fn check_pump_bandwidth_curve(_opts: &ValidationOptions) -> CheckOutcome {
    let mut out = CheckOutcome::new(
        "6",
        "max-C vs Bp: non-increasing, plateaus exp(-B^2/2) +-0.05 for B=1,2 (Gaussian)",
    );
    let mut plateaus = Vec::new();
    for b in [1.0, 2.0] {
        let run = || -> Result<_> {
            let f = SpectralProfile::gaussian(b, 0.0)?;
            sweep_pump_bandwidth(&f, &f, PumpShape::Gaussian, 1.0, &PUMP_SWEEP, 1e-6)
        };
        let curve = match run() {
            Ok(c) => c,
            Err(e) => return out.error(e),
        };
        let plateau = curve.points.last().expect("nonempty").1;
        let target = (-0.5 * b * b).exp();
        out.check(curve.max_rise() <= 1e-6, format!("B={b}: max rise {:.1e}", curve.max_rise()));
        out.check(
            (plateau - target).abs() <= 0.05,
            format!("B={b}: C(Bp=50)={plateau:.4} (target {target:.4})"),
        );
        plateaus.push(plateau);
    }
    out.check(plateaus[0] > plateaus[1], format!("plateau B=1 {:.4} > B=2 {:.4}", plateaus[0], plateaus[1]));

    for b in [1.0, 2.0] {
        let run = || -> Result<_> {
            let f = SpectralProfile::super_gaussian(3, b, 0.0)?;
            sweep_pump_bandwidth(&f, &f, PumpShape::SuperGaussian { order: 3 }, 1.0, &PUMP_SWEEP, 1e-6)
        };
        match run() {
            Ok(curve) => out.notes.push(format!(
                "super-Gaussian n=3, B={b}: C(Bp=50)={:.4}, max rise {:.2e} (flat-top filters do not reach exp(-B^2/2))",
                curve.points.last().expect("nonempty").1,
                curve.max_rise()
            )),
            Err(e) => out.notes.push(format!("super-Gaussian B={b}: error {e}")),
        }
    }
    out
}

/// Finite-difference curvature of the numeric `C(τb)` at the optimum against
/// `C'' = -2 C_opt / τ0²`.
pub fn check_sensitivity(_opts: &ValidationOptions) -> CheckOutcome {
    let mut out = CheckOutcome::new("7", "curvature at optimum matches tau0 within 1%");
    let tau_a = 1.0;
    for (b_p, b_a, b_b) in [(0.1, 1.0, 1.0), (0.5, 1.0, 1.0), (1.0, 1.0, 1.0), (2.0, 1.0, 0.5)] {
        let run = || -> Result<f64> {
            let jsa = gaussian_jsa(b_p, b_a, b_b, 2.0 * tau_a + 1.0)?;
            let (t_opt, _) = optimal_dgd_gaussian(b_p, b_a, tau_a);
            let h = 0.02 * sensitivity_tolerance(b_p, b_a, b_b);
            let c = |tb: f64| -> Result<f64> { Ok(jsa.evaluate(&PmdScenario::new(tau_a, tb)?)?.concurrence) };
            let (cm, c0, cp) = (c(t_opt - h)?, c(t_opt)?, c(t_opt + h)?);
            let curvature = (cp + cm - 2.0 * c0) / (h * h);
            Ok((-2.0 * c0 / curvature).sqrt())
        };
        let fd = match run() {
            Ok(v) => v,
            Err(e) => return out.error(e),
        };
        let tau0 = sensitivity_tolerance(b_p, b_a, b_b);
        let rel = (fd - tau0).abs() / tau0;
        out.check(rel <= 0.01, format!("Bp={b_p},Ba={b_a},Bb={b_b}: tau0 fd={fd:.5} formula={tau0:.5} ({rel:.1e})"));
        out.notes.push(format!(
            "Bp={b_p},Ba={b_a},Bb={b_b}: 2/Bp gives {:.5}, ratio to curvature value {:.3}",
            pump_limited_sensitivity_tolerance(b_p),
            pump_limited_sensitivity_tolerance(b_p) / tau0
        ));
    }
    out
}

/// Physical units: `Bp = Ba = Bb = 2π·100 GHz`.
pub fn check_physical_units(_opts: &ValidationOptions) -> CheckOutcome {
    let mut out = CheckOutcome::new("8", "physical units: C_opt(1 ps)=0.906+-0.001, 0.95 crossing at 0.72+-0.01 ps");
    let b = 2.0 * PI * 100e9;
    let (_, c_opt) = optimal_dgd_gaussian(b, b, 1e-12);
    out.check((c_opt - 0.906).abs() <= 0.001, format!("closed form C_opt(1 ps)={c_opt:.5}"));

    let run = || -> Result<f64> {
        let src = PhotonPairSource::gaussian(b, b, b, 0.0)?;
        let engine = Engine::build(&src, Method::FreqQuadrature, 2e-12)?;
        Ok(optimize_compensator(&engine, 1e-12, None, 1e-19)?.c_opt)
    };
    match run() {
        Ok(c) => out.check((c - c_opt).abs() <= ORACLE_TOL, format!("numeric C_opt(1 ps)={c:.7}")),
        Err(e) => return out.error(e),
    }

    // C_opt(τa) is decreasing in τa; bisect for C_opt = 0.95.
    let c_of = |t: f64| optimal_dgd_gaussian(b, b, t).1;
    let (mut lo, mut hi) = (0.0, 10e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if c_of(mid) > 0.95 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let crossing = 0.5 * (lo + hi);
    out.check(
        (crossing - 0.72e-12).abs() <= 0.01e-12,
        format!("C_opt=0.95 at ta={:.4} ps", crossing * 1e12),
    );
    out.notes.push(format!(
        "C_opt stays above 0.95 only for ta < {:.3} ps; C_opt(2 ps)={:.4}, C_opt(3 ps)={:.4}, so 0.95 is not maintained at DGDs of a few ps",
        crossing * 1e12,
        c_of(2e-12),
        c_of(3e-12)
    ));
    out
}

fn sweep_csv_with_threads(threads: usize) -> Result<(String, String)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::error::Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| {
        let src = PhotonPairSource::super_gaussian(3, 0.5, 1.0, 1.0)?;
        let engine = Engine::build(&src, Method::FreqQuadrature, 2.0)?;
        let taub = sweep_taub(&engine, 1.0, &linspace(0.0, 2.0, 41))?;
        let f = SpectralProfile::gaussian(1.0, 0.0)?;
        let bp = sweep_pump_bandwidth(&f, &f, PumpShape::Gaussian, 1.0, &[0.0, 0.5, 1.0, 2.0], 1e-6)?;
        Ok((sweep_csv_string(&taub), sweep_csv_string(&bp)))
    })
}

/// Frequency vs time-domain engines on every scenario above, and byte-identical
/// sweep CSVs from 1 and 4 worker threads.
pub fn check_engines_and_determinism(_opts: &ValidationOptions) -> CheckOutcome {
    let mut out = CheckOutcome::new("9", "freq vs time engine <= 1e-6; CSV identical across thread counts");
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut compare = |jsa: &BiphotonAmplitude, s: &PmdScenario| -> Result<()> {
        let f = concurrence_numeric(jsa, s)?.concurrence;
        let t = concurrence_time_domain(jsa, s)?.concurrence;
        worst = worst.max((f - t).abs());
        count += 1;
        Ok(())
    };
    let taus = closed_form_taus();
    for &b_p in &CLOSED_FORM_PUMPS {
        let res = gaussian_jsa(b_p, 1.0, 1.0, 2.0).and_then(|jsa| {
            for &ta in &taus {
                for &tb in &taus {
                    compare(&jsa, &PmdScenario::new(ta, tb)?)?;
                }
            }
            Ok(())
        });
        if let Err(e) = res {
            return out.error(e);
        }
    }
    let res = random_cases().and_then(|cases| {
        for case in &cases {
            compare(&case_jsa(case)?, &case.scenario)?;
        }
        Ok(())
    });
    if let Err(e) = res {
        return out.error(e);
    }
    out.check(worst <= ORACLE_TOL, format!("max |C_freq - C_time| = {worst:.3e} over {count} scenarios"));

    match (sweep_csv_with_threads(1), sweep_csv_with_threads(4)) {
        (Ok(a), Ok(b)) => out.check(a == b, format!("1-thread vs 4-thread CSV identical: {}", a == b)),
        (Err(e), _) | (_, Err(e)) => return out.error(e),
    }
    out
}

/// Every check in order.
pub fn run_all(opts: &ValidationOptions) -> Vec<CheckOutcome> {
    let checks: [fn(&ValidationOptions) -> CheckOutcome; 9] = [
        check_closed_form,
        check_optimum,
        check_decoherence_free,
        check_wootters,
        check_taub_sweep_shape,
        check_pump_bandwidth_curve,
        check_sensitivity,
        check_physical_units,
        check_engines_and_determinism,
    ];
    checks.iter().map(|c| c(opts)).collect()
}
