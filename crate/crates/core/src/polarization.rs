//! Two-qubit polarization state after tracing out the arrival times, and the
//! Wootters concurrence as an independent check of `C = |κ|`.
//!
//! Basis order for 4×4 matrices is fixed:
//! `{|sa sb⟩, |sa s'b⟩, |s'a sb⟩, |s'a s'b⟩}`.

use nalgebra::{Matrix2, Matrix4, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
/// Absorbs roundoff from quadrature-computed overlaps.
const PSD_TOL: f64 = 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Unit-norm polarization state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JonesVector([Complex64; 2]);

impl JonesVector {
    /// Normalizes `(c1, c2)`; fails on the zero vector.
    pub fn new(c1: Complex64, c2: Complex64) -> Result<Self> {
        let n = (c1.norm_sqr() + c2.norm_sqr()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter("zero Jones vector".into()));
        }
        Ok(Self([c1 / n, c2 / n]))
    }

    pub fn components(&self) -> [Complex64; 2] {
        self.0
    }

    /// The orthogonal state `(-c2*, c1*)`.
    pub fn orthogonal(&self) -> Self {
        let [a, b] = self.0;
        Self([-b.conj(), a.conj()])
    }

    pub fn norm(&self) -> f64 {
        (self.0[0].norm_sqr() + self.0[1].norm_sqr()).sqrt()
    }

    fn as_vector(&self) -> Vector2<Complex64> {
        Vector2::new(self.0[0], self.0[1])
    }
}

/// Validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: Matrix4<Complex64>,
}

impl TwoQubitState {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(rho: Matrix4<Complex64>) -> Result<Self> {
        let asym = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (|ρ-ρ†| = {asym:.2e})")));
        }
        let tr = rho.trace();
        if (tr - c(1.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let min_eig = rho
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self { rho })
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.rho
    }

    /// Eigenvalues in decreasing order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mut e: Vec<f64> = self.rho.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(|a, b| b.total_cmp(a));
        [e[0], e[1], e[2], e[3]]
    }

    pub fn bell_phi_plus() -> Self {
        density_matrix_from_overlap(c(1.0)).expect("valid")
    }

    pub fn maximally_mixed() -> Self {
        Self {
            rho: Matrix4::identity() * c(0.25),
        }
    }

    /// `(row, col, re, im)` entries in basis order.
    pub fn entries(&self) -> Vec<(usize, usize, f64, f64)> {
        let mut out = Vec::with_capacity(16);
        for i in 0..4 {
            for j in 0..4 {
                let z = self.rho[(i, j)];
                out.push((i, j, z.re, z.im));
            }
        }
        out
    }
}

/// `ρ = ½(|sa sb⟩⟨sa sb| + |s'a s'b⟩⟨s'a s'b| + κ |sa sb⟩⟨s'a s'b| + κ* |s'a s'b⟩⟨sa sb|)`.
pub fn density_matrix_from_overlap(kappa: Complex64) -> Result<TwoQubitState> {
    if !(kappa.norm() <= 1.0 + 1e-9) {
        return Err(Error::NonPhysicalOverlap(kappa.norm()));
    }
    let mut rho = Matrix4::<Complex64>::zeros();
    rho[(0, 0)] = c(0.5);
    rho[(3, 3)] = c(0.5);
    rho[(0, 3)] = kappa * 0.5;
    rho[(3, 0)] = kappa.conj() * 0.5;
    TwoQubitState::new(rho)
}

/// Positive square root of a Hermitian PSD matrix; tiny negative eigenvalues are clamped.
fn sqrt_psd(m: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let eig = m.symmetric_eigen();
    let roots = eig.eigenvalues.map(|e| c(e.max(0.0).sqrt()));
    let v = &eig.eigenvectors;
    v * Matrix4::from_diagonal(&roots) * v.adjoint()
}

fn sigma_y_sigma_y() -> Matrix4<Complex64> {
    // σy ⊗ σy has ones on the anti-diagonal with signs (-1, 1, 1, -1)
    let mut m = Matrix4::<Complex64>::zeros();
    m[(0, 3)] = c(-1.0);
    m[(1, 2)] = c(1.0);
    m[(2, 1)] = c(1.0);
    m[(3, 0)] = c(-1.0);
    m
}

/// Wootters concurrence `max(0, λ1 - λ2 - λ3 - λ4)`.
///
/// The `λi` are the square roots of the eigenvalues of the Hermitian
/// `√ρ (σy⊗σy) ρ* (σy⊗σy) √ρ`, obtained directly as the singular values of
/// `√ρ (σy⊗σy) √ρ*` so no square root of a near-zero eigenvalue is taken.
pub fn wootters_concurrence(state: &TwoQubitState) -> f64 {
    let root = sqrt_psd(&state.rho);
    let yy = sigma_y_sigma_y();
    let product = root * yy * root.map(|z| z.conj());
    let mut lambda: Vec<f64> = product.singular_values().iter().copied().collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    (lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0)
}

/// Bob's polarization conditioned on Alice's photon collapsing onto `s_a`,
/// for the two-photon state `Σ M_ij |i⟩|j⟩`: `s_b ∝ Mᵀ conj(s_a)`.
///
/// In the basis `{s_a, s'_a} ⊗ {s_b, s'_b}` the state then has no
/// `|s_a s'_b⟩` or `|s'_a s_b⟩` component.
pub fn conditioned_partner_state(
    m: &Matrix2<Complex64>,
    s_a: &JonesVector,
) -> Result<JonesVector> {
    let gram = m * m.adjoint();
    let dev = (gram - Matrix2::identity() * c(0.5))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if dev > 1e-9 {
        return Err(Error::NotMaximallyEntangled(format!(
            "M M† deviates from I/2 by {dev:.2e}"
        )));
    }
    let v = m.transpose() * s_a.as_vector().map(|z| z.conj());
    JonesVector::new(v[0], v[1])
}

/// Coefficients of the state `Σ M_ij |i⟩|j⟩` in the basis
/// `{|sa sb⟩, |sa s'b⟩, |s'a sb⟩, |s'a s'b⟩}`.
pub fn coefficients_in_basis(
    m: &Matrix2<Complex64>,
    s_a: &JonesVector,
    s_b: &JonesVector,
) -> [Complex64; 4] {
    let basis_a = [s_a.as_vector(), s_a.orthogonal().as_vector()];
    let basis_b = [s_b.as_vector(), s_b.orthogonal().as_vector()];
    let mut out = [c(0.0); 4];
    for (p, a) in basis_a.iter().enumerate() {
        for (q, b) in basis_b.iter().enumerate() {
            // ⟨a b|ψ⟩ = a† M conj(b)
            out[2 * p + q] = (a.adjoint() * m * b.map(|z| z.conj()))[(0, 0)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn phi_plus() -> Matrix2<Complex64> {
        Matrix2::identity() * c(FRAC_1_SQRT_2)
    }

    #[test]
    fn limits_of_overlap() {
        let pure = density_matrix_from_overlap(c(1.0)).unwrap();
        let e = pure.eigenvalues();
        assert!((e[0] - 1.0).abs() < 1e-12 && e[1].abs() < 1e-12);
        let mixed = density_matrix_from_overlap(c(0.0)).unwrap();
        let m = mixed.matrix();
        assert_eq!(m[(0, 0)], c(0.5));
        assert_eq!(m[(3, 3)], c(0.5));
        assert_eq!(m[(0, 3)], c(0.0));
    }

    #[test]
    fn eigenvalues_of_partial_coherence() {
        let k = (-0.25f64).exp();
        let e = density_matrix_from_overlap(c(k)).unwrap().eigenvalues();
        assert!((e[0] - 0.889_400_391_535_702_5).abs() < 1e-12);
        assert!((e[1] - 0.110_599_608_464_297_5).abs() < 1e-12);
        assert!(e[2].abs() < 1e-12 && e[3].abs() < 1e-12);
    }

    #[test]
    fn overlap_beyond_unity_is_rejected() {
        assert!(matches!(
            density_matrix_from_overlap(c(1.01)),
            Err(Error::NonPhysicalOverlap(_))
        ));
    }

    #[test]
    fn wootters_examples() {
        assert!((wootters_concurrence(&TwoQubitState::bell_phi_plus()) - 1.0).abs() < 1e-12);
        assert!(wootters_concurrence(&TwoQubitState::maximally_mixed()).abs() < 1e-12);
        let k = (-1.0f64 / 3.0).exp();
        let w = wootters_concurrence(&density_matrix_from_overlap(c(k)).unwrap());
        assert!((w - 0.716_531_310_573_789_3).abs() < 1e-9);
    }

    #[test]
    fn wootters_on_non_x_state() {
        // |ψ⟩ = cos θ |00⟩ + sin θ |11⟩ rotated locally on Alice: C = sin 2θ
        let theta: f64 = 0.3;
        let (ct, st) = (theta.cos(), theta.sin());
        let (u0, u1) = (c(0.6), Complex64::new(0.0, 0.8));
        // Alice basis |0'⟩ = u0|0⟩ + u1|1⟩, |1'⟩ = -u1*|0⟩ + u0*|1⟩
        let psi = [ct * u0, c(0.0), ct * u1, c(0.0)];
        let psi = [
            psi[0],
            st * (-u1.conj()),
            psi[2],
            st * u0.conj(),
        ];
        let v = nalgebra::Vector4::from_column_slice(&psi);
        let rho = TwoQubitState::new(v * v.adjoint()).unwrap();
        assert!((wootters_concurrence(&rho) - (2.0 * theta).sin()).abs() < 1e-9);
    }

    #[test]
    fn invalid_states_are_rejected() {
        let mut m = Matrix4::<Complex64>::identity() * c(0.25);
        m[(0, 1)] = c(0.1);
        assert!(TwoQubitState::new(m).is_err());
        let m = Matrix4::<Complex64>::identity() * c(0.3);
        assert!(TwoQubitState::new(m).is_err());
        let m = Matrix4::from_diagonal(&nalgebra::Vector4::new(c(0.6), c(0.6), c(-0.1), c(-0.1)));
        assert!(TwoQubitState::new(m).is_err());
    }

    #[test]
    fn partner_state_examples() {
        let s_a = JonesVector::new(c(1.0), c(0.0)).unwrap();
        let s_b = conditioned_partner_state(&phi_plus(), &s_a).unwrap();
        assert_eq!(s_b.components(), [c(1.0), c(0.0)]);

        let s_a = JonesVector::new(c(1.0), Complex64::new(0.0, 1.0)).unwrap();
        let s_b = conditioned_partner_state(&phi_plus(), &s_a).unwrap();
        let [b1, b2] = s_b.components();
        assert!((b1 - c(FRAC_1_SQRT_2)).norm() < 1e-12);
        assert!((b2 - Complex64::new(0.0, -FRAC_1_SQRT_2)).norm() < 1e-12);
        let coeffs = coefficients_in_basis(&phi_plus(), &s_a, &s_b);
        assert!(coeffs[1].norm() < 1e-12);
    }

    #[test]
    fn partial_entanglement_has_no_aligned_basis() {
        let m = Matrix2::new(c(0.9), c(0.0), c(0.0), c(0.19f64.sqrt()));
        let s_a = JonesVector::new(c(1.0), c(0.0)).unwrap();
        assert!(matches!(
            conditioned_partner_state(&m, &s_a),
            Err(Error::NotMaximallyEntangled(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn unitary(a: f64, b: f64, phi: f64, chi: f64) -> Matrix2<Complex64> {
            let (ca, sa) = (a.cos(), a.sin());
            let e = |x: f64| Complex64::cis(x);
            Matrix2::new(
                e(b) * ca,
                e(phi) * sa,
                -e(chi - phi) * sa,
                e(chi - b) * ca,
            )
        }

        proptest! {
            #[test]
            fn wootters_equals_modulus_of_overlap(r in 0.0f64..1.0, phase in -3.2f64..3.2) {
                let k = Complex64::from_polar(r, phase);
                let w = wootters_concurrence(&density_matrix_from_overlap(k).unwrap());
                prop_assert!((w - r).abs() < 1e-9);
            }

            #[test]
            fn aligned_basis_exists_for_any_maximally_entangled_state(
                a in 0.0f64..3.2, b in -3.2f64..3.2, phi in -3.2f64..3.2, chi in -3.2f64..3.2,
                x in -2.0f64..2.0, y in -2.0f64..2.0, z in -2.0f64..2.0,
            ) {
                let m = unitary(a, b, phi, chi) * c(FRAC_1_SQRT_2);
                let s_a = JonesVector::new(Complex64::new(x, y), Complex64::new(z, 1.0)).unwrap();
                let s_b = conditioned_partner_state(&m, &s_a).unwrap();
                prop_assert!((s_b.norm() - 1.0).abs() < 1e-12);
                let coeffs = coefficients_in_basis(&m, &s_a, &s_b);
                prop_assert!(coeffs[1].norm() < 1e-10);
                prop_assert!(coeffs[2].norm() < 1e-10);
                prop_assert!((coeffs[0].norm() - FRAC_1_SQRT_2).abs() < 1e-10);
                prop_assert!((coeffs[3].norm() - FRAC_1_SQRT_2).abs() < 1e-10);
            }
        }
    }
}
