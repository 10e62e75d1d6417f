//! Two-qubit state representations.
//!
//! Conventions: computational basis ordered |00>, |01>, |10>, |11> with
//! qubit 1 as the left tensor factor; sigma_1 = X, sigma_2 = Y, sigma_3 = Z.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, tol, CMatrix};

/// `PAULI_PRODUCTS[4*i + j] = sigma_i (x) sigma_j`, i, j in 0..4 with index 0 the identity.
static PAULI_PRODUCTS: LazyLock<Vec<CMatrix>> = LazyLock::new(|| {
    let mut out = Vec::with_capacity(16);
    for i in 0..4 {
        for j in 0..4 {
            out.push(linalg::kron(&linalg::pauli(i), &linalg::pauli(j)));
        }
    }
    out
});

fn pauli_product(i: usize, j: usize) -> &'static CMatrix {
    &PAULI_PRODUCTS[4 * i + j]
}

/// Two-qubit state as local Bloch vectors `x`, `y` and correlation matrix `t`,
/// with `t[i][j] = Tr[rho (sigma_i (x) sigma_j)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochTwoQubit {
    pub x: [f64; 3],
    pub y: [f64; 3],
    #[serde(rename = "T")]
    pub t: [[f64; 3]; 3],
}

impl BlochTwoQubit {
    pub fn new(x: [f64; 3], y: [f64; 3], t: [[f64; 3]; 3]) -> Self {
        Self { x, y, t }
    }

    /// The maximally mixed state I/4.
    pub fn maximally_mixed() -> Self {
        Self::new([0.0; 3], [0.0; 3], [[0.0; 3]; 3])
    }

    pub fn diagonal(x: [f64; 3], y: [f64; 3], diag: [f64; 3]) -> Self {
        let mut t = [[0.0; 3]; 3];
        for (k, d) in diag.into_iter().enumerate() {
            t[k][k] = d;
        }
        Self::new(x, y, t)
    }

    /// Scales x by `sx`, y by `sy` and every t_ij by `st`.
    pub fn scaled(&self, sx: f64, sy: f64, st: f64) -> Self {
        Self {
            x: self.x.map(|v| sx * v),
            y: self.y.map(|v| sy * v),
            t: self.t.map(|row| row.map(|v| st * v)),
        }
    }

    pub fn in_bloch_balls(&self) -> bool {
        norm3(&self.x) <= 1.0 + tol::CONSTRUCTION && norm3(&self.y) <= 1.0 + tol::CONSTRUCTION
    }

    /// Largest absolute difference over all 15 parameters.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..3 {
            worst = worst.max((self.x[k] - other.x[k]).abs());
            worst = worst.max((self.y[k] - other.y[k]).abs());
            for l in 0..3 {
                worst = worst.max((self.t[k][l] - other.t[k][l]).abs());
            }
        }
        worst
    }

    pub fn to_density(&self) -> DensityMatrix {
        bloch_to_density(self)
    }
}

fn norm3(v: &[f64; 3]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// A `dim x dim` complex matrix meant to be a density operator. Validity
/// (Hermitian, unit trace, PSD) is reported by [`validate_state`], not enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::Dimension {
                expected: entries.nrows().max(1),
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        Ok(Self { entries })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            entries: linalg::identity(dim) * linalg::real(1.0 / dim as f64),
        }
    }

    /// |psi><psi| for a normalized ket.
    pub fn pure(amplitudes: &[num_complex::Complex64]) -> Self {
        Self {
            entries: linalg::projector(&linalg::ket(amplitudes)),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        linalg::max_abs_diff(&self.entries, &other.entries)
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &Self, w: f64) -> Self {
        Self {
            entries: &self.entries * linalg::real(w) + &other.entries * linalg::real(1.0 - w),
        }
    }
}

/// Expands the Pauli sum (1/4)[I(x)I + sum x_i sigma_i(x)I + sum y_i I(x)sigma_i + sum t_ij sigma_i(x)sigma_j].
pub fn bloch_to_density(s: &BlochTwoQubit) -> DensityMatrix {
    let mut m = pauli_product(0, 0).clone();
    for i in 0..3 {
        m += pauli_product(i + 1, 0) * linalg::real(s.x[i]);
        m += pauli_product(0, i + 1) * linalg::real(s.y[i]);
        for j in 0..3 {
            m += pauli_product(i + 1, j + 1) * linalg::real(s.t[i][j]);
        }
    }
    DensityMatrix {
        entries: m * linalg::real(0.25),
    }
}

/// Inverse of [`bloch_to_density`] via Pauli-trace projections.
pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochTwoQubit> {
    let m = rho.matrix();
    if m.nrows() != 4 || m.ncols() != 4 {
        return Err(Error::Dimension {
            expected: 4,
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let mut worst_imag = 0.0_f64;
    let mut project = |i: usize, j: usize| {
        // Tr[rho P] with P Hermitian; no need to form the product
        let p = pauli_product(i, j);
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for r in 0..4 {
            for c in 0..4 {
                acc += m[(r, c)] * p[(c, r)];
            }
        }
        worst_imag = worst_imag.max(acc.im.abs());
        acc.re
    };
    let mut s = BlochTwoQubit::maximally_mixed();
    for i in 0..3 {
        s.x[i] = project(i + 1, 0);
        s.y[i] = project(0, i + 1);
        for j in 0..3 {
            s.t[i][j] = project(i + 1, j + 1);
        }
    }
    if worst_imag > tol::IMAG {
        return Err(Error::NonHermitian {
            residual: worst_imag,
        });
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityReport {
    pub hermitian_residual: f64,
    pub trace_residual: f64,
    pub min_eigenvalue: f64,
    pub valid: bool,
}

pub fn validate_state(rho: &DensityMatrix) -> ValidityReport {
    let m = rho.matrix();
    let hermitian_residual = linalg::hermitian_residual(m);
    let trace_residual = (linalg::trace(m) - linalg::real(1.0)).norm();
    let min_eigenvalue = linalg::min_eigenvalue(m);
    ValidityReport {
        hermitian_residual,
        trace_residual,
        min_eigenvalue,
        valid: hermitian_residual <= tol::HERMITIAN
            && trace_residual <= tol::TRACE
            && min_eigenvalue >= -tol::PSD,
    }
}

/// Weight of the maximally coherent state in a MCS/MIS mixture.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct MixParam(f64);

impl MixParam {
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(Error::MixParam(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// |MCS> = (|00> + |01> + |10> + |11>)/2.
pub fn mcs_projector() -> DensityMatrix {
    DensityMatrix::pure(&[linalg::real(0.5); 4])
}

/// p |MCS><MCS| + (1 - p) I/4 in Bloch form.
pub fn mcs_mis_mixture(m: MixParam) -> BlochTwoQubit {
    let p = m.value();
    BlochTwoQubit::diagonal([p, 0.0, 0.0], [p, 0.0, 0.0], [p, 0.0, 0.0])
}

/// The four Bell states in the order used by [`BellProbs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];

    pub fn amplitudes(self) -> [num_complex::Complex64; 4] {
        let s = linalg::real(FRAC_1_SQRT_2);
        let z = linalg::ZERO;
        match self {
            BellState::PhiPlus => [s, z, z, s],
            BellState::PhiMinus => [s, z, z, -s],
            BellState::PsiPlus => [z, s, s, z],
            BellState::PsiMinus => [z, s, -s, z],
        }
    }

    pub fn projector(self) -> DensityMatrix {
        DensityMatrix::pure(&self.amplitudes())
    }
}

/// Bell-diagonal mixing weights, `p[k]` weighting `BellState::ALL[k]`,
/// i.e. the order (Phi+, Phi-, Psi+, Psi-). This is the labeling under which
/// the beta-coordinate correlation matrix `diag[sqrt2(b2-b3), -2 b1, sqrt2(b2+b3)]` holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellProbs {
    p: [f64; 4],
}

impl BellProbs {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        let sum: f64 = p.iter().sum();
        let ok = p.iter().all(|v| v.is_finite() && *v >= -tol::TRACE)
            && (sum - 1.0).abs() <= tol::TRACE;
        if ok {
            Ok(Self { p })
        } else {
            Err(Error::InvalidProbabilities { probs: p })
        }
    }

    pub fn probs(&self) -> [f64; 4] {
        self.p
    }

    /// sum_k p_k |B_k><B_k|.
    pub fn to_density(&self) -> DensityMatrix {
        let mut m = CMatrix::zeros(4, 4);
        for (w, b) in self.p.iter().zip(BellState::ALL) {
            m += b.projector().into_matrix() * linalg::real(*w);
        }
        DensityMatrix { entries: m }
    }
}

/// Bell-diagonal coordinates; beta0 is the implicit constant 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaCoords {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
}

impl BetaCoords {
    pub const BETA0: f64 = 0.5;

    pub fn new(beta1: f64, beta2: f64, beta3: f64) -> Self {
        Self {
            beta1,
            beta2,
            beta3,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.beta1, self.beta2, self.beta3]
    }
}

pub fn beta0(bp: &BellProbs) -> f64 {
    bp.p.iter().sum::<f64>() / 2.0
}

pub fn beta_from_probs(bp: &BellProbs) -> BetaCoords {
    let [p1, p2, p3, p4] = bp.p;
    BetaCoords {
        beta1: (p1 - p2 - p3 + p4) / 2.0,
        beta2: (p1 - p4) / SQRT_2,
        beta3: (p2 - p3) / SQRT_2,
    }
}

/// Raw inverse of [`beta_from_probs`]; entries may be negative outside the tetrahedron.
pub fn raw_probs_from_beta(b: &BetaCoords) -> [f64; 4] {
    let h = BetaCoords::BETA0;
    [
        (h + b.beta1 + SQRT_2 * b.beta2) / 2.0,
        (h - b.beta1 + SQRT_2 * b.beta3) / 2.0,
        (h - b.beta1 - SQRT_2 * b.beta3) / 2.0,
        (h + b.beta1 - SQRT_2 * b.beta2) / 2.0,
    ]
}

/// Inverse beta transform. Out-of-tetrahedron inputs give negative weights;
/// use [`in_tetrahedron`] to test membership.
pub fn probs_from_beta(b: &BetaCoords) -> BellProbs {
    BellProbs {
        p: raw_probs_from_beta(b),
    }
}

pub fn in_tetrahedron(b: &BetaCoords) -> bool {
    raw_probs_from_beta(b).iter().all(|p| *p >= -tol::TRACE)
}

pub fn bds_to_bloch(b: &BetaCoords) -> Result<BlochTwoQubit> {
    if !in_tetrahedron(b) {
        return Err(Error::OutsideTetrahedron(b.beta1, b.beta2, b.beta3));
    }
    Ok(BlochTwoQubit::diagonal(
        [0.0; 3],
        [0.0; 3],
        [
            SQRT_2 * (b.beta2 - b.beta3),
            -2.0 * b.beta1,
            SQRT_2 * (b.beta2 + b.beta3),
        ],
    ))
}

/// A Bell-diagonal state is separable iff no weight exceeds 1/2.
pub fn is_separable_bds(bp: &BellProbs) -> bool {
    bp.p.iter().all(|p| *p <= 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    fn approx_matrix(m: &DensityMatrix, expected: &[[f64; 4]; 4], eps: f64) {
        for (r, row) in expected.iter().enumerate() {
            for (c, want) in row.iter().enumerate() {
                let e = m.matrix()[(r, c)];
                assert!(
                    (e.re - want).abs() <= eps && e.im.abs() <= eps,
                    "entry ({r},{c}) = {e}, expected {want}"
                );
            }
        }
    }

    #[test]
    fn zero_parameters_give_maximally_mixed() {
        let rho = bloch_to_density(&BlochTwoQubit::maximally_mixed());
        assert!(rho.max_abs_diff(&DensityMatrix::maximally_mixed(4)) == 0.0);
    }

    #[test]
    fn full_mixture_is_the_uniform_projector() {
        let rho = bloch_to_density(&mcs_mis_mixture(MixParam::new(1.0).unwrap()));
        approx_matrix(&rho, &[[0.25; 4]; 4], 1e-15);
    }

    #[test]
    fn phi_plus_from_correlations() {
        let s = BlochTwoQubit::diagonal([0.0; 3], [0.0; 3], [1.0, -1.0, 1.0]);
        let mut want = [[0.0; 4]; 4];
        want[0][0] = 0.5;
        want[0][3] = 0.5;
        want[3][0] = 0.5;
        want[3][3] = 0.5;
        approx_matrix(&bloch_to_density(&s), &want, 1e-15);

        let back = density_to_bloch(&BellState::PhiPlus.projector()).unwrap();
        assert!(back.max_abs_diff(&s) < 1e-15);
    }

    #[test]
    fn density_to_bloch_of_identity() {
        let s = density_to_bloch(&DensityMatrix::maximally_mixed(4)).unwrap();
        assert_eq!(s, BlochTwoQubit::maximally_mixed());
    }

    #[test]
    fn density_to_bloch_rejects_wrong_dimension() {
        let err = density_to_bloch(&DensityMatrix::maximally_mixed(2)).unwrap_err();
        assert!(matches!(err, Error::Dimension { expected: 4, .. }));
    }

    #[test]
    fn density_to_bloch_rejects_non_hermitian() {
        let mut m = DensityMatrix::maximally_mixed(4).into_matrix();
        m[(0, 1)] = linalg::real(0.2);
        let err = density_to_bloch(&DensityMatrix::new(m).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NonHermitian { .. }));
    }

    #[test]
    fn validity_reports() {
        let mixed = validate_state(&DensityMatrix::maximally_mixed(4));
        assert!(mixed.valid);
        assert!((mixed.min_eigenvalue - 0.25).abs() < 1e-14);

        // product of pure states needs T = x (x) y; T = 0 is unphysical
        let bad = BlochTwoQubit::new([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [[0.0; 3]; 3]);
        let r = validate_state(&bloch_to_density(&bad));
        assert!(!r.valid);
        assert!(r.min_eigenvalue < -0.1);
        assert!(r.hermitian_residual <= 1e-15 && r.trace_residual <= 1e-15);

        let bell = validate_state(&BellState::PhiPlus.projector());
        assert!(bell.valid);
        assert!(bell.min_eigenvalue.abs() < 1e-14);
    }

    #[test]
    fn mixture_endpoints_and_midpoint() {
        assert_eq!(
            mcs_mis_mixture(MixParam::new(0.0).unwrap()),
            BlochTwoQubit::maximally_mixed()
        );
        let one = mcs_mis_mixture(MixParam::new(1.0).unwrap());
        assert_eq!(one.x, [1.0, 0.0, 0.0]);
        assert_eq!(one.y, [1.0, 0.0, 0.0]);
        assert_eq!(one.t[0][0], 1.0);

        let half = bloch_to_density(&mcs_mis_mixture(MixParam::new(0.5).unwrap()));
        let direct = mcs_projector().mix(&DensityMatrix::maximally_mixed(4), 0.5);
        assert!(half.max_abs_diff(&direct) <= 1e-14);
    }

    #[test]
    fn mix_param_domain() {
        assert!(MixParam::new(-0.01).is_err());
        assert!(MixParam::new(1.01).is_err());
        assert!(MixParam::new(f64::NAN).is_err());
    }

    #[test]
    fn beta_transform_examples() {
        let b = beta_from_probs(&BellProbs::new([1.0, 0.0, 0.0, 0.0]).unwrap());
        assert!((b.beta1 - 0.5).abs() < 1e-15);
        assert!((b.beta2 - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(b.beta3, 0.0);

        let b = beta_from_probs(&BellProbs::new([0.25; 4]).unwrap());
        assert_eq!(b.as_array(), [0.0; 3]);

        let b = beta_from_probs(&BellProbs::new([0.0, 0.5, 0.5, 0.0]).unwrap());
        assert_eq!(b.as_array(), [-0.5, 0.0, 0.0]);
    }

    #[test]
    fn bell_probs_rejects_bad_vectors() {
        assert!(BellProbs::new([0.5, 0.5, 0.5, 0.0]).is_err());
        assert!(BellProbs::new([1.5, -0.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn inverse_beta_examples() {
        assert_eq!(
            probs_from_beta(&BetaCoords::new(0.0, 0.0, 0.0)).probs(),
            [0.25; 4]
        );
        // local table row (0.2, -0.2) ends where p4 reaches zero
        let p = probs_from_beta(&BetaCoords::new(0.2, 0.495, -0.2)).probs();
        assert!((p[3] - (0.7 - SQRT_2 * 0.495) / 2.0).abs() < 1e-15);
        assert!(p[3].abs() < 5e-4);
    }

    #[test]
    fn tetrahedron_membership() {
        assert!(in_tetrahedron(&BetaCoords::new(0.0, 0.0, 0.0)));
        assert!(!in_tetrahedron(&BetaCoords::new(0.2, 0.50, -0.2)));
        assert!(in_tetrahedron(&BetaCoords::new(0.5, FRAC_1_SQRT_2, 0.0)));
    }

    #[test]
    fn bds_correlations() {
        let s = bds_to_bloch(&BetaCoords::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(s, BlochTwoQubit::maximally_mixed());

        let s = bds_to_bloch(&BetaCoords::new(0.5, FRAC_1_SQRT_2, 0.0)).unwrap();
        assert!(s.max_abs_diff(&BlochTwoQubit::diagonal([0.0; 3], [0.0; 3], [1.0, -1.0, 1.0])) < 1e-15);
        assert!(bloch_to_density(&s).max_abs_diff(&BellState::PhiPlus.projector()) < 1e-15);

        // beta1 = -1/2 splits weight evenly between Phi- and Psi+
        let s = bds_to_bloch(&BetaCoords::new(-0.5, 0.0, 0.0)).unwrap();
        assert_eq!(s.t, [[0.0; 3], [0.0, 1.0, 0.0], [0.0; 3]]);
        let expected = BellState::PhiMinus
            .projector()
            .mix(&BellState::PsiPlus.projector(), 0.5);
        assert!(bloch_to_density(&s).max_abs_diff(&expected) < 1e-15);

        assert!(matches!(
            bds_to_bloch(&BetaCoords::new(0.2, 0.5, -0.2)),
            Err(Error::OutsideTetrahedron(..))
        ));
    }

    #[test]
    fn vertices_are_bell_projectors() {
        for (k, bell) in BellState::ALL.into_iter().enumerate() {
            let mut p = [0.0; 4];
            p[k] = 1.0;
            let probs = BellProbs::new(p).unwrap();
            let b = beta_from_probs(&probs);
            let rho = bloch_to_density(&bds_to_bloch(&b).unwrap());
            assert!(rho.max_abs_diff(&bell.projector()) <= 1e-14, "{bell:?}");
            assert!(rho.max_abs_diff(&probs.to_density()) <= 1e-14);
        }
    }

    #[test]
    fn separability_rule() {
        assert!(is_separable_bds(&BellProbs::new([0.25; 4]).unwrap()));
        assert!(!is_separable_bds(&BellProbs::new([1.0, 0.0, 0.0, 0.0]).unwrap()));
        assert!(is_separable_bds(&BellProbs::new([0.5, 0.5, 0.0, 0.0]).unwrap()));
    }

    #[test]
    fn pure_constructor_normalized() {
        let rho = DensityMatrix::pure(&[linalg::real(1.0), ZERO, ZERO, ZERO]);
        assert!(validate_state(&rho).valid);
    }
}
