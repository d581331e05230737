//! The generating functional `Z(psi_i -> psi_e) = exp(<psi_e| e^{-iHt/hbar} |psi_i> - 1)`.
//!
//! [`z_closed_form`] is the production path. [`z_from_mode_product`] rebuilds
//! the same number as a product of per-energy-mode factors and is kept as an
//! independent cross-check.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Result;
use crate::hilbert::{
    check_dim, check_unitary, evolve, spectral_decompose, to_energy_coefficients, CMatrix, Hamiltonian,
    SpectralDecomposition, StateVector,
};

/// Lower bound `e^{-2}` on `|Z|` for normalized endpoints.
pub const Z_ABS_MIN: f64 = 0.135_335_283_236_612_7;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub z: C64,
    pub overlap: C64,
    pub mode_factors: Option<Vec<C64>>,
}

impl FunctionalValue {
    pub fn from_overlap(overlap: C64) -> Self {
        Self { z: (overlap - 1.0).exp(), overlap, mode_factors: None }
    }

    pub fn abs(&self) -> f64 {
        self.z.norm()
    }
}

/// `<psi_e| exp(-iHt/hbar) |psi_i>` with `t = t_e - t_i`.
pub fn overlap(psi_e: &StateVector, h: &Hamiltonian, psi_i: &StateVector, t: f64) -> Result<C64> {
    check_dim(psi_i.dim(), psi_e.dim())?;
    psi_e.inner(&evolve(h, psi_i, t)?)
}

pub fn z_closed_form(psi_i: &StateVector, psi_e: &StateVector, h: &Hamiltonian, t: f64) -> Result<FunctionalValue> {
    Ok(FunctionalValue::from_overlap(overlap(psi_e, h, psi_i, t)?))
}

/// Single-mode factor
/// `exp(-(|a_e|^2 + |a_i|^2)/2) * exp(exp(-i E t / hbar) conj(a_e) a_i)`.
pub fn z_mode_factor(a_i: C64, a_e: C64, energy: f64, t: f64, hbar: f64) -> C64 {
    let damping = (-0.5 * (a_e.norm_sqr() + a_i.norm_sqr())).exp();
    let phase = C64::from_polar(1.0, -energy * t / hbar);
    (phase * a_e.conj() * a_i).exp() * damping
}

/// `prod_j Z_j` over the energy modes of `spectrum`.
pub fn z_from_mode_product(
    psi_i: &StateVector,
    psi_e: &StateVector,
    spectrum: &SpectralDecomposition,
    t: f64,
) -> Result<FunctionalValue> {
    let a_i = to_energy_coefficients(psi_i, spectrum)?;
    let a_e = to_energy_coefficients(psi_e, spectrum)?;
    let factors: Vec<C64> = spectrum
        .energies
        .iter()
        .enumerate()
        .map(|(j, &e)| z_mode_factor(a_i[j], a_e[j], e, t, spectrum.hbar))
        .collect();
    let overlap = spectrum
        .energies
        .iter()
        .enumerate()
        .map(|(j, &e)| C64::from_polar(1.0, -e * t / spectrum.hbar) * a_e[j].conj() * a_i[j])
        .sum();
    let z = factors.iter().product();
    Ok(FunctionalValue { z, overlap, mode_factors: Some(factors) })
}

/// `|Z - Z'|` where `Z'` is recomputed after conjugating both states and the
/// Hamiltonian by `basis`.
pub fn basis_invariance_check(
    psi_i: &StateVector,
    psi_e: &StateVector,
    h: &Hamiltonian,
    t: f64,
    basis: &CMatrix,
) -> Result<f64> {
    check_unitary(basis)?;
    check_dim(h.dim(), basis.nrows())?;
    let original = z_closed_form(psi_i, psi_e, h, t)?;

    let rotate = |s: &StateVector| StateVector::normalized(basis * s.amplitudes());
    let m = basis * h.matrix() * basis.adjoint();
    let m = CMatrix::from_fn(m.nrows(), m.ncols(), |j, k| (m[(j, k)] + m[(k, j)].conj()) * 0.5);
    let h_rot = Hamiltonian::with_hbar(m, h.hbar())?;
    let rotated = z_closed_form(&rotate(psi_i)?, &rotate(psi_e)?, &h_rot, t)?;
    Ok((original.z - rotated.z).norm())
}

/// [`z_from_mode_product`] with the decomposition computed on the fly.
pub fn z_mode_product_for(psi_i: &StateVector, psi_e: &StateVector, h: &Hamiltonian, t: f64) -> Result<FunctionalValue> {
    z_from_mode_product(psi_i, psi_e, &spectral_decompose(h), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{random_hamiltonian, random_state, random_unitary, CVector};
    use std::f64::consts::{E, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn plus() -> StateVector {
        StateVector::normalized(CVector::from_vec(vec![c(1., 0.), c(1., 0.)])).unwrap()
    }

    #[test]
    fn lower_bound_constant() {
        assert!((Z_ABS_MIN - (-2.0f64).exp()).abs() < 1e-17);
    }

    #[test]
    fn overlap_examples() {
        let h = random_hamiltonian(3, 4, 1.0);
        let psi_i = random_state(3, 8);
        let evolved = evolve(&h, &psi_i, 0.9).unwrap();
        assert!((overlap(&evolved, &h, &psi_i, 0.9).unwrap() - c(1.0, 0.0)).norm() < 1e-14);

        // orthogonal to the evolved state in dim 2
        let h2 = Hamiltonian::diagonal(&[0.2, 1.1]).unwrap();
        let psi_i = random_state(2, 3);
        let ev = evolve(&h2, &psi_i, 0.4).unwrap();
        let a = ev.amplitudes();
        let perp = StateVector::normalized(CVector::from_vec(vec![-a[1].conj(), a[0].conj()])).unwrap();
        assert!(overlap(&perp, &h2, &psi_i, 0.4).unwrap().norm() < 1e-15);

        let e = 2.0;
        let h = Hamiltonian::diagonal(&[0.0, e]).unwrap();
        assert!(overlap(&plus(), &h, &plus(), PI / e).unwrap().norm() < 1e-15);

        assert!(overlap(&random_state(2, 1), &h, &random_state(3, 1), 1.0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let h = random_hamiltonian(4, 2, 1.0);
        let psi_i = random_state(4, 6);
        let ev = evolve(&h, &psi_i, 1.3).unwrap();
        let max = z_closed_form(&psi_i, &ev, &h, 1.3).unwrap();
        assert!((max.z - c(1.0, 0.0)).norm() < 1e-14);

        assert!((FunctionalValue::from_overlap(c(0.0, 0.0)).abs() - 1.0 / E).abs() < 1e-16);

        let anti = z_closed_form(&psi_i, &ev.with_phase(PI), &h, 1.3).unwrap();
        assert!((anti.abs() - Z_ABS_MIN).abs() < 1e-14);
    }

    #[test]
    fn mode_factor_examples() {
        assert!((z_mode_factor(c(1., 0.), c(1., 0.), 0.0, 3.0, 1.0) - c(1.0, 0.0)).norm() < 1e-15);
        let a_e = c(0.3, -0.8);
        let f = z_mode_factor(c(0., 0.), a_e, 1.7, 2.0, 1.0);
        assert!((f - c((-0.5 * a_e.norm_sqr()).exp(), 0.0)).norm() < 1e-15);
        // e^{-1/2} * exp(e^{-i pi} * 1/2) = e^{-1}
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = z_mode_factor(c(s, 0.), c(s, 0.), 1.0, PI, 1.0);
        assert!((f - c(1.0 / E, 0.0)).norm() < 1e-15);
        // hbar enters only through E t / hbar
        let f2 = z_mode_factor(c(s, 0.), c(s, 0.), 1.0, 2.0 * PI, 2.0);
        assert!((f - f2).norm() < 1e-15);
    }

    #[test]
    fn mode_product_examples() {
        let h = Hamiltonian::new(CMatrix::from_element(1, 1, c(0.8, 0.0))).unwrap();
        let psi_i = random_state(1, 1);
        let psi_e = random_state(1, 2);
        let a = z_mode_product_for(&psi_i, &psi_e, &h, 0.6).unwrap();
        let b = z_closed_form(&psi_i, &psi_e, &h, 0.6).unwrap();
        assert!((a.z - b.z).norm() < 1e-15);
        assert_eq!(a.mode_factors.as_ref().unwrap().len(), 1);

        let e = 1.5;
        let h = Hamiltonian::diagonal(&[0.0, e]).unwrap();
        let a = z_mode_product_for(&plus(), &plus(), &h, PI / e).unwrap();
        assert!((a.z - c(1.0 / E, 0.0)).norm() < 1e-15);
        let b = z_closed_form(&plus(), &plus(), &h, PI / e).unwrap();
        assert!((a.z - b.z).norm() < 1e-15);

        let h = random_hamiltonian(8, 13, 1.0);
        let psi_i = random_state(8, 13);
        let psi_e = random_state(8, 14);
        let a = z_mode_product_for(&psi_i, &psi_e, &h, 0.77).unwrap();
        let b = z_closed_form(&psi_i, &psi_e, &h, 0.77).unwrap();
        assert!((a.z - b.z).norm() <= 1e-10);
        assert!((a.overlap - b.overlap).norm() <= 1e-12);
    }

    #[test]
    fn basis_invariance_examples() {
        let h = random_hamiltonian(4, 5, 1.0);
        let psi_i = random_state(4, 1);
        let psi_e = random_state(4, 2);
        let id = CMatrix::identity(4, 4);
        assert!(basis_invariance_check(&psi_i, &psi_e, &h, 0.5, &id).unwrap() < 1e-14);

        let hd = Hamiltonian::diagonal(&[0.1, -0.4, 2.0, 0.9]).unwrap();
        let mut perm = CMatrix::zeros(4, 4);
        for (j, k) in [(0, 2), (1, 0), (2, 3), (3, 1)] {
            perm[(j, k)] = c(1.0, 0.0);
        }
        assert!(basis_invariance_check(&psi_i, &psi_e, &hd, 0.5, &perm).unwrap() <= 1e-12);

        let h = random_hamiltonian(8, 31, 1.0);
        let u = random_unitary(8, 77);
        let d = basis_invariance_check(&random_state(8, 3), &random_state(8, 4), &h, 1.1, &u).unwrap();
        assert!(d <= 1e-10, "{d}");

        let bad = CMatrix::identity(4, 4) * c(1.1, 0.0);
        assert!(basis_invariance_check(&psi_i, &psi_e, &h, 0.5, &bad).is_err());
    }
}
