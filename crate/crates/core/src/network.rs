//! Single-excitation Hamiltonians for chains and unitary-coupled networks,
//! plus static disorder.
//!
//! In the single-excitation subspace the XY Hamiltonian reduces to a
//! tight-binding matrix: coupling `J_ij` sits at `(i, j)` and `(j, i)`, on-site
//! energy `eps_i` on the diagonal. Site indices are zero-based throughout the
//! library; the CLI and config files use one-based labels.

use std::f64::consts::FRAC_1_SQRT_2;

use rand_core::RngCore;
use rand_distr::{Distribution as _, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{similarity_transform, ComplexMatrix, HermitianOperator, C64};

/// Entries below this fraction of the coupling scale count as absent.
const MASK_TOL: f64 = 1e-12;

/// Standard deviation of the flat window `[-0.5, 0.5]`, `1 / (2 sqrt 3)`.
pub const FLAT_WIDTH: f64 = 0.288_675_134_594_812_9;

#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec {
    pub couplings: Vec<f64>,
    pub onsite: Vec<f64>,
}

impl ChainSpec {
    /// `n` sites, all couplings `j`, zero on-site energies.
    pub fn uniform(n: usize, j: f64) -> Self {
        Self {
            couplings: vec![j; n.saturating_sub(1)],
            onsite: vec![0.0; n],
        }
    }

    pub fn n_sites(&self) -> usize {
        self.onsite.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    #[serde(alias = "uniform")]
    Flat,
    #[serde(alias = "gauss")]
    Gaussian,
}

impl Distribution {
    pub fn name(self) -> &'static str {
        match self {
            Distribution::Flat => "flat",
            Distribution::Gaussian => "gaussian",
        }
    }
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "flat" | "uniform" => Ok(Distribution::Flat),
            "gaussian" | "gauss" | "normal" => Ok(Distribution::Gaussian),
            other => Err(invalid(format!(
                "unknown distribution '{other}' (expected flat or gaussian)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderKind {
    /// On-site energies.
    #[serde(alias = "diag")]
    Diagonal,
    /// Couplings.
    #[serde(alias = "offdiag")]
    OffDiagonal,
}

impl DisorderKind {
    pub fn name(self) -> &'static str {
        match self {
            DisorderKind::Diagonal => "diagonal",
            DisorderKind::OffDiagonal => "off_diagonal",
        }
    }
}

impl std::str::FromStr for DisorderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "diagonal" | "diag" => Ok(DisorderKind::Diagonal),
            "off_diagonal" | "offdiagonal" | "offdiag" | "off_diag" => {
                Ok(DisorderKind::OffDiagonal)
            }
            other => Err(invalid(format!(
                "unknown disorder kind '{other}' (expected diagonal or off_diagonal)"
            ))),
        }
    }
}

/// Static disorder of scale `error_scale`, in units of the largest coupling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub error_scale: f64,
    pub distribution: Distribution,
    pub kind: DisorderKind,
}

impl DisorderSpec {
    pub fn new(error_scale: f64, distribution: Distribution, kind: DisorderKind) -> Result<Self> {
        if !(error_scale >= 0.0 && error_scale.is_finite()) {
            return Err(invalid(format!(
                "error scale must be finite and >= 0, got {error_scale}"
            )));
        }
        Ok(Self {
            error_scale,
            distribution,
            kind,
        })
    }

    /// Standard deviation of a single draw `d`.
    pub fn width(&self) -> f64 {
        FLAT_WIDTH
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkHamiltonian {
    operator: HermitianOperator,
    coupling_mask: Vec<(usize, usize)>,
    base_scale: f64,
}

impl NetworkHamiltonian {
    /// Wraps an operator, reading the coupling pattern off its nonzero
    /// off-diagonal entries. `base_scale` is the largest coupling modulus
    /// (zero only for a network without couplings).
    pub fn from_operator(operator: HermitianOperator) -> Self {
        let m = operator.matrix();
        let n = m.dim();
        let mut base_scale: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                base_scale = base_scale.max(m[(i, j)].norm());
            }
        }
        let cutoff = MASK_TOL * base_scale;
        let mut coupling_mask = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if m[(i, j)].norm() > cutoff {
                    coupling_mask.push((i, j));
                }
            }
        }
        Self {
            operator,
            coupling_mask,
            base_scale,
        }
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// Coupled pairs `(i, j)` with `i < j`, in row-major order.
    pub fn coupling_mask(&self) -> &[(usize, usize)] {
        &self.coupling_mask
    }

    pub fn base_scale(&self) -> f64 {
        self.base_scale
    }

    /// Block-diagonal union of two networks with no coupling between them.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let offset = self.dim();
        let matrix = self.operator.matrix().direct_sum(other.operator.matrix());
        let mut coupling_mask = self.coupling_mask.clone();
        coupling_mask.extend(
            other
                .coupling_mask
                .iter()
                .map(|&(i, j)| (i + offset, j + offset)),
        );
        Self {
            operator: HermitianOperator::from_matrix_symmetrized(&matrix),
            coupling_mask,
            base_scale: self.base_scale.max(other.base_scale),
        }
    }

    /// `U H U^-1`; the coupling pattern is re-read from the result.
    pub fn connect(&self, u: &ComplexMatrix) -> Result<Self> {
        Ok(Self::from_operator(similarity_transform(
            &self.operator,
            u,
        )?))
    }
}

pub fn build_chain(spec: &ChainSpec) -> Result<NetworkHamiltonian> {
    let n = spec.n_sites();
    if n < 2 {
        return Err(invalid(format!("a chain needs at least 2 sites, got {n}")));
    }
    if spec.couplings.len() != n - 1 {
        return Err(invalid(format!(
            "{n} sites need {} couplings, got {}",
            n - 1,
            spec.couplings.len()
        )));
    }
    let mut m = ComplexMatrix::zeros(n);
    for (i, &e) in spec.onsite.iter().enumerate() {
        m[(i, i)] = C64::new(e, 0.0);
    }
    for (i, &j) in spec.couplings.iter().enumerate() {
        m[(i, i + 1)] = C64::new(j, 0.0);
        m[(i + 1, i)] = C64::new(j, 0.0);
    }
    // rejects non-finite values
    let m = ComplexMatrix::new(n, m.entries().to_vec())?;
    Ok(NetworkHamiltonian::from_operator(HermitianOperator::new(
        m,
    )?))
}

/// Two identical, uncoupled uniform trimers on sites `0..3` and `3..6`.
pub fn build_uncoupled_pair(j: f64) -> Result<NetworkHamiltonian> {
    if j == 0.0 || !j.is_finite() {
        return Err(invalid(format!(
            "coupling must be finite and nonzero, got {j}"
        )));
    }
    let trimer = build_chain(&ChainSpec::uniform(3, j))?;
    Ok(trimer.direct_sum(&trimer))
}

/// Identity except for a Hadamard block on `pair`. Self-inverse.
pub fn hadamard_connector(dim: usize, pair: (usize, usize)) -> Result<ComplexMatrix> {
    let (a, b) = pair;
    for index in [a, b] {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
    }
    if a == b {
        return Err(invalid(format!(
            "connector pair must be two distinct sites, got ({a}, {a})"
        )));
    }
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let mut u = ComplexMatrix::identity(dim);
    u[(a, a)] = h;
    u[(a, b)] = h;
    u[(b, a)] = h;
    u[(b, b)] = -h;
    Ok(u)
}

/// The six-site network: two trimers joined by a Hadamard on sites 3 and 6
/// (zero-based 2 and 5).
pub fn designed_network(j: f64) -> Result<NetworkHamiltonian> {
    build_uncoupled_pair(j)?.connect(&hadamard_connector(6, (2, 5))?)
}

/// One unscaled disorder draw `d`: uniform on `[-0.5, 0.5]` or a zero-mean
/// normal of the same standard deviation.
pub fn sample_disorder<R: RngCore + ?Sized>(spec: &DisorderSpec, rng: &mut R) -> f64 {
    match spec.distribution {
        Distribution::Flat => Uniform::new_inclusive(-0.5, 0.5)
            .expect("valid bounds")
            .sample(rng),
        Distribution::Gaussian => Normal::new(0.0, FLAT_WIDTH)
            .expect("valid width")
            .sample(rng),
    }
}

/// Adds `E * base_scale * d` to every coupled pair (off-diagonal) or every
/// site energy (diagonal), one independent draw each.
pub fn apply_disorder<R: RngCore + ?Sized>(
    h: &NetworkHamiltonian,
    spec: &DisorderSpec,
    rng: &mut R,
) -> NetworkHamiltonian {
    let scale = spec.error_scale * h.base_scale;
    let mut out = h.clone();
    let m = out.operator.matrix_mut();
    match spec.kind {
        DisorderKind::OffDiagonal => {
            for &(i, j) in &h.coupling_mask {
                let delta = scale * sample_disorder(spec, rng);
                m[(i, j)] += delta;
                m[(j, i)] = m[(i, j)].conj();
            }
        }
        DisorderKind::Diagonal => {
            for i in 0..h.dim() {
                let delta = scale * sample_disorder(spec, rng);
                m[(i, i)] += delta;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{evolve, StateVector};
    use crate::rng::substream;
    use proptest::prelude::*;
    use std::f64::consts::{PI, SQRT_2};

    fn designed_matrix(j: f64) -> ComplexMatrix {
        let r = j * FRAC_1_SQRT_2;
        #[rustfmt::skip]
        let m = [
            0.0, j,   0.0, 0.0, 0.0, 0.0,
            j,   0.0, r,   0.0, 0.0, r,
            0.0, r,   0.0, 0.0, r,   0.0,
            0.0, 0.0, 0.0, 0.0, j,   0.0,
            0.0, 0.0, r,   j,   0.0, -r,
            0.0, r,   0.0, 0.0, -r,  0.0,
        ];
        ComplexMatrix::from_real(6, &m).unwrap()
    }

    #[test]
    fn trimer_matrix() {
        let h = build_chain(&ChainSpec::uniform(3, 1.0)).unwrap();
        let want = ComplexMatrix::from_real(3, &[0., 1., 0., 1., 0., 1., 0., 1., 0.]).unwrap();
        assert_eq!(h.operator().matrix(), &want);
        assert_eq!(h.coupling_mask(), &[(0, 1), (1, 2)]);
        assert_eq!(h.base_scale(), 1.0);
    }

    #[test]
    fn zero_coupling_dimer_is_zero() {
        let h = build_chain(&ChainSpec::uniform(2, 0.0)).unwrap();
        assert_eq!(h.operator().matrix(), &ComplexMatrix::zeros(2));
        assert!(h.coupling_mask().is_empty());
    }

    #[test]
    fn chain_validation() {
        assert!(build_chain(&ChainSpec::uniform(1, 1.0)).is_err());
        let bad = ChainSpec {
            couplings: vec![1.0],
            onsite: vec![0.0; 3],
        };
        assert!(build_chain(&bad).is_err());
        let nan = ChainSpec {
            couplings: vec![f64::NAN],
            onsite: vec![0.0; 2],
        };
        assert!(build_chain(&nan).is_err());
    }

    #[test]
    fn onsite_energies_on_diagonal() {
        let spec = ChainSpec {
            couplings: vec![1.0, 2.0],
            onsite: vec![0.5, -0.25, 0.0],
        };
        let m = build_chain(&spec).unwrap();
        let m = m.operator().matrix();
        assert_eq!(m[(0, 0)].re, 0.5);
        assert_eq!(m[(1, 1)].re, -0.25);
        assert_eq!(m[(1, 2)].re, 2.0);
        assert_eq!(m[(2, 1)].re, 2.0);
    }

    #[test]
    fn uncoupled_pair_matrix_and_spectrum() {
        let h = build_uncoupled_pair(1.0).unwrap();
        let m = h.operator().matrix();
        for i in 0..6 {
            for j in 0..6 {
                let coupled = matches!((i.min(j), i.max(j)), (0, 1) | (1, 2) | (3, 4) | (4, 5));
                assert_eq!(m[(i, j)].re, if coupled { 1.0 } else { 0.0 });
            }
        }
        let ev = h.operator().eig().unwrap();
        let want = [-SQRT_2, -SQRT_2, 0.0, 0.0, SQRT_2, SQRT_2];
        for (a, b) in ev.eigenvalues().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(build_uncoupled_pair(0.0).is_err());
    }

    #[test]
    fn second_trimer_transfers_perfectly() {
        let h = build_uncoupled_pair(1.0).unwrap();
        let out = evolve(
            h.operator(),
            &StateVector::basis(6, 3).unwrap(),
            PI / SQRT_2,
        )
        .unwrap();
        assert!((out.amplitude(5) + 1.0).norm() < 1e-12);
    }

    #[test]
    fn hadamard_connector_shape() {
        let u = hadamard_connector(6, (2, 5)).unwrap();
        let r = FRAC_1_SQRT_2;
        #[rustfmt::skip]
        let want = ComplexMatrix::from_real(6, &[
            1., 0., 0., 0., 0., 0.,
            0., 1., 0., 0., 0., 0.,
            0., 0., r,  0., 0., r,
            0., 0., 0., 1., 0., 0.,
            0., 0., 0., 0., 1., 0.,
            0., 0., r,  0., 0., -r,
        ]).unwrap();
        assert_eq!(u, want);
        let uu = u.matmul(&u).unwrap();
        assert!(uu.max_abs_diff(&ComplexMatrix::identity(6)).unwrap() < 1e-12);
        assert!(matches!(
            hadamard_connector(6, (2, 6)),
            Err(Error::IndexOutOfRange { index: 6, dim: 6 })
        ));
        assert!(hadamard_connector(6, (2, 2)).is_err());
    }

    #[test]
    fn designed_network_matches_closed_form() {
        for j in [1.0, 0.3, 2.5, -1.7] {
            let h = designed_network(j).unwrap();
            assert!(
                h.operator()
                    .matrix()
                    .max_abs_diff(&designed_matrix(j))
                    .unwrap()
                    < 1e-12
            );
            assert!((h.base_scale() - j.abs()).abs() < 1e-15);
        }
    }

    #[test]
    fn designed_network_has_six_couplings() {
        let h = designed_network(1.0).unwrap();
        assert_eq!(
            h.coupling_mask(),
            &[(0, 1), (1, 2), (1, 5), (2, 4), (3, 4), (4, 5)]
        );
    }

    #[test]
    fn flat_draws_are_bounded_and_centred() {
        let spec = DisorderSpec::new(1.0, Distribution::Flat, DisorderKind::Diagonal).unwrap();
        let mut rng = substream(11, &[0]);
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let d = sample_disorder(&spec, &mut rng);
            assert!((-0.5..=0.5).contains(&d));
            sum += d;
        }
        assert!((sum / n as f64).abs() < 0.002);
    }

    #[test]
    fn gaussian_draws_match_flat_width() {
        let spec = DisorderSpec::new(1.0, Distribution::Gaussian, DisorderKind::Diagonal).unwrap();
        let mut rng = substream(12, &[0]);
        let n = 1_000_000;
        let v: Vec<f64> = (0..n).map(|_| sample_disorder(&spec, &mut rng)).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.002);
        assert!((var.sqrt() - 0.288675).abs() < 0.002, "{}", var.sqrt());
        assert!((FLAT_WIDTH - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-16);
    }

    #[test]
    fn zero_scale_leaves_network_unchanged() {
        let h = designed_network(1.0).unwrap();
        for kind in [DisorderKind::Diagonal, DisorderKind::OffDiagonal] {
            for dist in [Distribution::Flat, Distribution::Gaussian] {
                let spec = DisorderSpec::new(0.0, dist, kind).unwrap();
                let out = apply_disorder(&h, &spec, &mut substream(1, &[2]));
                assert_eq!(
                    out.operator()
                        .matrix()
                        .max_abs_diff(h.operator().matrix())
                        .unwrap(),
                    0.0
                );
            }
        }
        assert!(DisorderSpec::new(-0.1, Distribution::Flat, DisorderKind::Diagonal).is_err());
    }

    #[test]
    fn off_diagonal_uses_one_draw_per_coupling() {
        let h = designed_network(1.0).unwrap();
        let spec = DisorderSpec::new(0.2, Distribution::Flat, DisorderKind::OffDiagonal).unwrap();
        let mut rng = substream(3, &[0]);
        let out = apply_disorder(&h, &spec, &mut rng);
        assert_eq!(rng.position(), 6);

        let mut replay = substream(3, &[0]);
        let base = h.operator().matrix();
        let m = out.operator().matrix();
        for &(i, j) in h.coupling_mask() {
            let d = sample_disorder(&spec, &mut replay);
            assert!((m[(i, j)] - base[(i, j)] - 0.2 * d).norm() < 1e-15);
        }
        for i in 0..6 {
            assert_eq!(m[(i, i)], base[(i, i)]);
            for j in (i + 1)..6 {
                if !h.coupling_mask().contains(&(i, j)) {
                    assert_eq!(m[(i, j)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn diagonal_disorder_spread() {
        // entries eps_i = E * d_i, so std = 0.1 / (2 sqrt 3)
        let h = designed_network(1.0).unwrap();
        let spec = DisorderSpec::new(0.1, Distribution::Gaussian, DisorderKind::Diagonal).unwrap();
        let mut samples = Vec::new();
        for r in 0..20_000u64 {
            let out = apply_disorder(&h, &spec, &mut substream(8, &[r]));
            let m = out.operator().matrix();
            for i in 0..6 {
                samples.push(m[(i, i)].re);
            }
            assert_eq!(m[(0, 1)].re, 1.0);
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((sd - 0.1 * FLAT_WIDTH).abs() < 5e-4, "{sd}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn disorder_keeps_hermiticity_and_sparsity(
            seed in any::<u64>(),
            scale in 0.0..1.0f64,
            gaussian in any::<bool>(),
            diagonal in any::<bool>(),
        ) {
            let h = designed_network(1.0).unwrap();
            let spec = DisorderSpec::new(
                scale,
                if gaussian { Distribution::Gaussian } else { Distribution::Flat },
                if diagonal { DisorderKind::Diagonal } else { DisorderKind::OffDiagonal },
            ).unwrap();
            let out = apply_disorder(&h, &spec, &mut substream(seed, &[]));
            prop_assert!(HermitianOperator::new(out.operator().matrix().clone()).is_ok());
            let m = out.operator().matrix();
            for i in 0..6 {
                for j in (i + 1)..6 {
                    if !h.coupling_mask().contains(&(i, j)) {
                        prop_assert_eq!(m[(i, j)].norm(), 0.0);
                    }
                }
            }
        }
    }
}
