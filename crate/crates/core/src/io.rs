//! CSV output: sweep curves, spectral and temporal intensity grids, density matrices.
//!
//! All files use LF line endings, `#`-prefixed metadata lines, one header row,
//! and floats with 17 significant digits so output is byte-reproducible.

use std::io::Write;

use crate::biphoton::{BiphotonAmplitude, TemporalAmplitude};
use crate::error::Result;
use crate::optimizer::SweepCurve;
use crate::polarization::TwoQubitState;

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_sweep_csv<W: Write>(curve: &SweepCurve, mut out: W) -> Result<()> {
    writeln!(out, "# x: {}", curve.variable)?;
    for (k, v) in &curve.metadata {
        writeln!(out, "# {k}: {v}")?;
    }
    writeln!(out, "x,concurrence")?;
    for &(x, c) in &curve.points {
        writeln!(out, "{},{}", fmt_f64(x), fmt_f64(c))?;
    }
    Ok(())
}

pub fn sweep_csv_string(curve: &SweepCurve) -> String {
    let mut buf = Vec::new();
    write_sweep_csv(curve, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

fn write_grid<W: Write>(
    mut out: W,
    axes: (&str, &str, &str),
    points: impl Iterator<Item = (f64, f64, f64)>,
) -> Result<()> {
    writeln!(out, "# axis1: {}", axes.0)?;
    writeln!(out, "# axis2: {}", axes.1)?;
    writeln!(out, "# value: {}", axes.2)?;
    writeln!(out, "axis1,axis2,value")?;
    for (a, b, v) in points {
        writeln!(out, "{},{},{}", fmt_f64(a), fmt_f64(b), fmt_f64(v))?;
    }
    Ok(())
}

/// `|f(ωa, ωb)|²` at every grid sample.
pub fn write_jsi_csv<W: Write>(jsa: &BiphotonAmplitude, out: W) -> Result<()> {
    write_grid(out, ("omega_a", "omega_b", "|f|^2"), jsa.jsi_points())
}

/// `|g(ta, tb)|²` at every grid sample.
pub fn write_temporal_csv<W: Write>(g: &TemporalAmplitude, out: W) -> Result<()> {
    write_grid(out, ("t_a", "t_b", "|g|^2"), g.points())
}

pub fn write_rho_csv<W: Write>(state: &TwoQubitState, mut out: W) -> Result<()> {
    writeln!(out, "# basis: |sa sb>, |sa s'b>, |s'a sb>, |s'a s'b>")?;
    writeln!(out, "row,col,re,im")?;
    for (i, j, re, im) in state.entries() {
        writeln!(out, "{i},{j},{},{}", fmt_f64(re), fmt_f64(im))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_format() {
        let curve = SweepCurve::new(
            "tau_b/tau_a",
            vec![("tau_a".into(), "1".into())],
            vec![(0.0, 1.0), (0.5, 0.25)],
        )
        .unwrap();
        let s = sweep_csv_string(&curve);
        assert_eq!(
            s,
            "# x: tau_b/tau_a\n# tau_a: 1\nx,concurrence\n\
             0.0000000000000000e0,1.0000000000000000e0\n\
             5.0000000000000000e-1,2.5000000000000000e-1\n"
        );
    }

    #[test]
    fn rho_format() {
        let s = TwoQubitState::bell_phi_plus();
        let mut buf = Vec::new();
        write_rho_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 18);
        assert!(text.contains("0,3,5.0000000000000000e-1,0.0000000000000000e0"));
    }
}
