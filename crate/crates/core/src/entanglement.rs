//! Two-site reduced states and Wootters' entanglement of formation.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator, StateVector, C64};

const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;
/// Eigenvalues of rho below this are treated as exact zeros when forming sqrt(rho).
const RANK_CUTOFF: f64 = 1e-12;

/// `sigma_y x sigma_y` is real and anti-diagonal: row `i` holds `YY_SIGN[i]`
/// in column `3 - i`.
const YY_SIGN: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];

/// Reduced density matrix of a site pair `(A, B)` in the basis
/// `|00>, |01>, |10>, |11>` (first label is `A`).
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSiteDensity {
    matrix: ComplexMatrix,
}

impl TwoSiteDensity {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: matrix.dim(),
            });
        }
        let h = HermitianOperator::new(matrix)?;
        let trace: f64 = (0..4).map(|i| h.matrix()[(i, i)].re).sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace is {trace}, not 1"
            )));
        }
        let lowest = h.eig()?.eigenvalues()[0];
        if lowest < -PSD_TOL {
            return Err(Error::NotPositive { eigenvalue: lowest });
        }
        Ok(Self {
            matrix: h.matrix().clone(),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Partial trace of a single-excitation state over every site except `a` and `b`.
pub fn reduce_two_sites(psi: &StateVector, a: usize, b: usize) -> Result<TwoSiteDensity> {
    let dim = psi.dim();
    for index in [a, b] {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
    }
    if a == b {
        return Err(Error::InvalidParameter(format!(
            "sites must differ, got ({a}, {a})"
        )));
    }
    let amp_a = psi.amplitude(a);
    let amp_b = psi.amplitude(b);
    let vacuum: f64 = psi
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != a && k != b)
        .map(|(_, z)| z.norm_sqr())
        .sum();

    let mut rho = ComplexMatrix::zeros(4);
    rho[(0, 0)] = C64::new(vacuum, 0.0);
    rho[(1, 1)] = C64::new(amp_b.norm_sqr(), 0.0);
    rho[(2, 2)] = C64::new(amp_a.norm_sqr(), 0.0);
    rho[(1, 2)] = amp_b * amp_a.conj();
    rho[(2, 1)] = rho[(1, 2)].conj();
    TwoSiteDensity::new(rho)
}

/// `(sigma_y x sigma_y) rho* (sigma_y x sigma_y)`.
pub fn spin_flip(rho: &TwoSiteDensity) -> TwoSiteDensity {
    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            out[(i, j)] = m[(3 - i, 3 - j)].conj() * (YY_SIGN[i] * YY_SIGN[j]);
        }
    }
    TwoSiteDensity { matrix: out }
}

/// Wootters concurrence `max(l1 - l2 - l3 - l4, 0)`, where `l_i` are the
/// square roots of the eigenvalues of `rho rho~`, taken in descending order.
///
/// `rho rho~` has the same spectrum as `X X^dagger` with
/// `X = sqrt(rho) (sigma_y x sigma_y) sqrt(rho)*`, so the `l_i` are the
/// singular values of `X`. They are read off as the non-negative eigenvalues
/// of the Hermitian dilation `[[0, X], [X^dagger, 0]]`, which avoids taking
/// square roots of round-off sized eigenvalues.
pub fn concurrence(rho: &TwoSiteDensity) -> Result<f64> {
    let spec = HermitianOperator::new(rho.matrix().clone())?.eig()?;
    let lowest = spec.eigenvalues()[0];
    if lowest < -PSD_TOL {
        return Err(Error::NotPositive { eigenvalue: lowest });
    }
    let mut sqrt_rho = ComplexMatrix::zeros(4);
    for (j, &p) in spec.eigenvalues().iter().enumerate() {
        if p <= RANK_CUTOFF {
            continue;
        }
        let s = p.sqrt();
        for r in 0..4 {
            let vr = spec.eigenvectors()[(r, j)] * s;
            for c in 0..4 {
                sqrt_rho[(r, c)] += vr * spec.eigenvectors()[(c, j)].conj();
            }
        }
    }
    let mut flip_conj = ComplexMatrix::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            flip_conj[(i, j)] = sqrt_rho[(3 - i, j)].conj() * YY_SIGN[i];
        }
    }
    let x = sqrt_rho.matmul(&flip_conj)?;

    let mut dilation = ComplexMatrix::zeros(8);
    for i in 0..4 {
        for j in 0..4 {
            dilation[(i, 4 + j)] = x[(i, j)];
            dilation[(4 + j, i)] = x[(i, j)].conj();
        }
    }
    let spectrum = HermitianOperator::new(dilation)?.eig()?;
    let mut lambdas: Vec<f64> = spectrum.eigenvalues()[4..]
        .iter()
        .map(|l| l.abs())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Entanglement of formation, in ebits.
pub fn eof(rho: &TwoSiteDensity) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence(rho)?))
}

pub fn eof_from_concurrence(c: f64) -> f64 {
    let tangle = (c * c).min(1.0);
    let x = 0.5 * (1.0 + (1.0 - tangle).sqrt());
    binary_entropy(x).clamp(0.0, 1.0)
}

fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

impl Default for TwoSiteDensity {
    /// The maximally mixed state.
    fn default() -> Self {
        let mut m = ComplexMatrix::zeros(4);
        for i in 0..4 {
            m[(i, i)] = C64::new(0.25, 0.0);
        }
        Self { matrix: m }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::phase_kick;
    use crate::linalg::ZERO;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn pure(amps: [C64; 4]) -> TwoSiteDensity {
        let mut m = ComplexMatrix::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = amps[i] * amps[j].conj();
            }
        }
        TwoSiteDensity::new(m).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Binary-entropy EOF of a single-excitation pure state, from the
    /// closed-form concurrence `2 |a_A| |a_B|`.
    fn closed_form(a: C64, b: C64) -> f64 {
        let t = 4.0 * a.norm_sqr() * b.norm_sqr();
        let x = (1.0 + (1.0 - t).max(0.0).sqrt()) / 2.0;
        let h = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
        h(x) + h(1.0 - x)
    }

    #[test]
    fn localized_excitation() {
        let rho = reduce_two_sites(&StateVector::basis(6, 0).unwrap(), 0, 3).unwrap();
        let want = pure([ZERO, ZERO, C64::new(1.0, 0.0), ZERO]);
        assert!(rho.matrix().max_abs_diff(want.matrix()).unwrap() < 1e-15);
        assert_eq!(eof(&rho).unwrap(), 0.0);
    }

    #[test]
    fn split_excitation_is_a_bell_pair() {
        let r = c(-FRAC_1_SQRT_2, 0.0);
        let psi = StateVector::new(vec![ZERO, ZERO, r, ZERO, ZERO, r]).unwrap();
        let rho = reduce_two_sites(&psi, 2, 5).unwrap();
        let s = c(FRAC_1_SQRT_2, 0.0);
        let want = pure([ZERO, s, s, ZERO]);
        assert!(rho.matrix().max_abs_diff(want.matrix()).unwrap() < 1e-15);
        assert!((eof(&rho).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entangler_state_reduces_to_pure_pair() {
        let z = ZERO;
        let psi = StateVector::new(vec![c(0.5, 0.5), z, z, c(0.5, -0.5), z, z]).unwrap();
        let rho = reduce_two_sites(&psi, 0, 3).unwrap();
        let want = pure([z, c(0.5, -0.5), c(0.5, 0.5), z]);
        assert!(rho.matrix().max_abs_diff(want.matrix()).unwrap() < 1e-15);
        assert!((eof(&rho).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduce_validation() {
        let psi = StateVector::basis(6, 0).unwrap();
        assert!(reduce_two_sites(&psi, 1, 1).is_err());
        assert!(matches!(
            reduce_two_sites(&psi, 0, 6),
            Err(Error::IndexOutOfRange { index: 6, dim: 6 })
        ));
    }

    #[test]
    fn spin_flip_cases() {
        let mixed = TwoSiteDensity::default();
        assert!(
            spin_flip(&mixed)
                .matrix()
                .max_abs_diff(mixed.matrix())
                .unwrap()
                < 1e-16
        );

        let one = C64::new(1.0, 0.0);
        let flipped = spin_flip(&pure([one, ZERO, ZERO, ZERO]));
        let want = pure([ZERO, ZERO, ZERO, one]);
        assert!(flipped.matrix().max_abs_diff(want.matrix()).unwrap() < 1e-16);

        let s = c(FRAC_1_SQRT_2, 0.0);
        let triplet = pure([ZERO, s, s, ZERO]);
        assert!(
            spin_flip(&triplet)
                .matrix()
                .max_abs_diff(triplet.matrix())
                .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn unequal_split_eof() {
        // C = 2 sqrt(0.8 * 0.2) = 0.8, x = 0.8, h(0.8) = 0.7219280948873623
        let z = ZERO;
        let psi = StateVector::new(vec![
            c(0.8f64.sqrt(), 0.0),
            z,
            z,
            c(0.2f64.sqrt(), 0.0),
            z,
            z,
        ])
        .unwrap();
        let rho = reduce_two_sites(&psi, 0, 3).unwrap();
        assert!((concurrence(&rho).unwrap() - 0.8).abs() < 1e-12);
        assert!((eof(&rho).unwrap() - 0.721_928_094_887_362_3).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_positive_density() {
        let mut m = ComplexMatrix::zeros(4);
        m[(0, 0)] = c(1.5, 0.0);
        m[(1, 1)] = c(-0.5, 0.0);
        assert!(matches!(
            TwoSiteDensity::new(m),
            Err(Error::NotPositive { .. })
        ));
        let mut m = ComplexMatrix::zeros(4);
        m[(0, 0)] = c(0.5, 0.0);
        assert!(TwoSiteDensity::new(m).is_err());
    }

    fn arb_state() -> impl Strategy<Value = StateVector> {
        (2usize..=8).prop_flat_map(|d| {
            prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d)
                .prop_filter("nonzero", |v| {
                    v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3)
                })
                .prop_map(|v| {
                    StateVector::normalized(v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
                        .unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn matches_closed_form(psi in arb_state(), pick in any::<(usize, usize)>()) {
            let d = psi.dim();
            let a = pick.0 % d;
            let b = (a + 1 + pick.1 % (d - 1)) % d;
            let rho = reduce_two_sites(&psi, a, b).unwrap();
            let e = eof(&rho).unwrap();
            prop_assert!((0.0..=1.0).contains(&e));
            let want = closed_form(psi.amplitude(a), psi.amplitude(b));
            prop_assert!((e - want).abs() < 1e-9, "{} vs {}", e, want);
        }

        #[test]
        fn local_phases_leave_eof_unchanged(psi in arb_state(), site in any::<usize>(), theta in -7.0..7.0f64) {
            let d = psi.dim();
            let kicked = phase_kick(&psi, site % d, theta).unwrap();
            let (a, b) = (0, d - 1);
            let before = eof(&reduce_two_sites(&psi, a, b).unwrap()).unwrap();
            let after = eof(&reduce_two_sites(&kicked, a, b).unwrap()).unwrap();
            prop_assert!((before - after).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_when_either_site_is_empty() {
        let z = ZERO;
        let psi = StateVector::normalized(vec![c(0.3, 0.1), z, c(0.5, -0.2), c(0.1, 0.1)]).unwrap();
        assert_eq!(eof(&reduce_two_sites(&psi, 0, 1).unwrap()).unwrap(), 0.0);
        assert_eq!(eof(&reduce_two_sites(&psi, 1, 3).unwrap()).unwrap(), 0.0);
    }
}
