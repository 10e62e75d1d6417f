//! l1-norm coherence and its closed-form expansion for Bloch-parameterized
//! two-qubit states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, tol, CMatrix};
use crate::states::{BellState, BlochTwoQubit, DensityMatrix};

/// Basis in which coherence is measured.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisSpec {
    Computational,
    /// Columns are the basis vectors.
    Unitary(CMatrix),
}

impl BasisSpec {
    pub fn unitary(u: CMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::Dimension {
                expected: u.nrows(),
                rows: u.nrows(),
                cols: u.ncols(),
            });
        }
        let residual = linalg::unitary_residual(&u);
        if residual > tol::UNITARY {
            return Err(Error::NonUnitaryBasis { residual });
        }
        Ok(Self::Unitary(u))
    }

    /// Bell basis with columns Phi+, Phi-, Psi+, Psi-.
    pub fn bell() -> Self {
        let mut u = CMatrix::zeros(4, 4);
        for (col, b) in BellState::ALL.into_iter().enumerate() {
            for (row, a) in b.amplitudes().into_iter().enumerate() {
                u[(row, col)] = a;
            }
        }
        Self::Unitary(u)
    }
}

/// Sum of |m_ij| over i != j.
pub fn off_diagonal_l1(m: &CMatrix) -> f64 {
    let mut total = 0.0;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if r != c {
                total += m[(r, c)].norm();
            }
        }
    }
    total
}

/// C(rho) = sum_{i != j} |<i|U^dagger rho U|j>|.
pub fn l1_coherence(rho: &DensityMatrix, basis: &BasisSpec) -> Result<f64> {
    match basis {
        BasisSpec::Computational => Ok(off_diagonal_l1(rho.matrix())),
        BasisSpec::Unitary(u) => {
            if u.nrows() != rho.dim() {
                return Err(Error::Dimension {
                    expected: rho.dim(),
                    rows: u.nrows(),
                    cols: u.ncols(),
                });
            }
            let residual = linalg::unitary_residual(u);
            if residual > tol::UNITARY {
                return Err(Error::NonUnitaryBasis { residual });
            }
            Ok(off_diagonal_l1(&(u.adjoint() * rho.matrix() * u)))
        }
    }
}

/// Computational-basis l1 coherence of a Bloch state, via its density matrix.
pub fn coherence_of(s: &BlochTwoQubit) -> f64 {
    off_diagonal_l1(s.to_density().matrix())
}

/// Closed-form coherence terms of a two-qubit state.
///
/// `a1` collects the |00>-|11> and |01>-|10> coherences, `a2` the pairs that
/// flip qubit 1 only, `a3` those that flip qubit 2 only. `b1..b3` are the
/// same terms for the locally cloned pair `{mu x, mu y, mu^2 T}` and stay
/// zero unless the breakdown came from [`local_clone_breakdown`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherenceBreakdown {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub total: f64,
}

impl CoherenceBreakdown {
    /// a1 + a2 + a3, twice the coherence.
    pub fn aggregate(&self) -> f64 {
        self.a1 + self.a2 + self.a3
    }

    pub fn output_total(&self) -> f64 {
        (self.b1 + self.b2 + self.b3) / 2.0
    }
}

fn pair_distance(u: f64, v: f64, p: f64, q: f64) -> f64 {
    (u - p).hypot(v - q) + (u + p).hypot(v + q)
}

/// `(a1, a2, a3)` for x, y, T after scaling T's in-plane entries by `t_scale`.
fn terms(s: &BlochTwoQubit, t_scale: f64) -> [f64; 3] {
    let t = &s.t;
    // |<00|rho|11>| and |<01|rho|10>|; the first radicand pairs t12 with t21
    let a1 = (t[0][1] + t[1][0]).hypot(t[0][0] - t[1][1]) + (t[0][1] - t[1][0]).hypot(t[0][0] + t[1][1]);
    let a2 = pair_distance(t_scale * t[0][2], t_scale * t[1][2], s.x[0], s.x[1]);
    let a3 = pair_distance(t_scale * t[2][0], t_scale * t[2][1], s.y[0], s.y[1]);
    [a1, a2, a3]
}

pub fn closed_form_coherence(s: &BlochTwoQubit) -> CoherenceBreakdown {
    let [a1, a2, a3] = terms(s, 1.0);
    CoherenceBreakdown {
        a1,
        a2,
        a3,
        b1: 0.0,
        b2: 0.0,
        b3: 0.0,
        total: (a1 + a2 + a3) / 2.0,
    }
}

/// Breakdown of `s` together with the terms of `{mu x, mu y, mu^2 T}`.
pub fn local_clone_breakdown(s: &BlochTwoQubit, mu: f64) -> CoherenceBreakdown {
    let mut out = closed_form_coherence(s);
    let [_, b2, b3] = terms(s, mu);
    out.b1 = mu * mu * out.a1;
    out.b2 = mu * b2;
    out.b3 = mu * b3;
    out
}

/// Checks the three path inequalities for a point `d` strictly inside triangle `abc`:
/// |AC|+|BC| > |AD|+|BD|, |AB|+|AC| > |BD|+|DC|, |BC|+|BA| > |DC|+|DA|.
pub fn triangle_path_inequality(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Result<bool> {
    let cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let area = cross.abs() / 2.0;
    if area <= 1e-12 {
        return Err(Error::DegenerateTriangle { area });
    }
    let bary = barycentric(a, b, c, d, cross);
    if bary.iter().any(|w| *w <= 1e-12) {
        return Err(Error::ExteriorPoint);
    }
    let dist = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).hypot(p[1] - q[1]);
    let (ab, ac, bc) = (dist(a, b), dist(a, c), dist(b, c));
    let (ad, bd, cd) = (dist(a, d), dist(b, d), dist(c, d));
    Ok(ac + bc > ad + bd && ab + ac > bd + cd && bc + ab > cd + ad)
}

fn barycentric(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2], cross: f64) -> [f64; 3] {
    let sub = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    [sub(d, b, c) / cross, sub(a, d, c) / cross, sub(a, b, d) / cross]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{mcs_mis_mixture, mcs_projector, MixParam};
    use crate::linalg::{real, ZERO};

    #[test]
    fn computational_basis_examples() {
        let mixed = DensityMatrix::maximally_mixed(4);
        assert_eq!(l1_coherence(&mixed, &BasisSpec::Computational).unwrap(), 0.0);
        let c = l1_coherence(&mcs_projector(), &BasisSpec::Computational).unwrap();
        assert!((c - 3.0).abs() < 1e-14);
    }

    #[test]
    fn ket_00_is_coherent_in_bell_basis() {
        let rho = DensityMatrix::pure(&[real(1.0), ZERO, ZERO, ZERO]);
        assert_eq!(l1_coherence(&rho, &BasisSpec::Computational).unwrap(), 0.0);
        let c = l1_coherence(&rho, &BasisSpec::bell()).unwrap();
        assert!((c - 1.0).abs() < 1e-14);
        // the maximally mixed state stays incoherent
        let c = l1_coherence(&DensityMatrix::maximally_mixed(4), &BasisSpec::bell()).unwrap();
        assert!(c < 1e-15);
    }

    #[test]
    fn rejects_non_unitary_basis() {
        let m = linalg::identity(4) * real(2.0);
        assert!(matches!(BasisSpec::unitary(m.clone()), Err(Error::NonUnitaryBasis { .. })));
        let err = l1_coherence(&DensityMatrix::maximally_mixed(4), &BasisSpec::Unitary(m)).unwrap_err();
        assert!(matches!(err, Error::NonUnitaryBasis { .. }));
    }

    #[test]
    fn closed_form_examples() {
        let zero = closed_form_coherence(&BlochTwoQubit::maximally_mixed());
        assert_eq!((zero.a1, zero.a2, zero.a3, zero.total), (0.0, 0.0, 0.0, 0.0));

        for p in [0.0, 0.3, 0.75, 1.0] {
            let b = closed_form_coherence(&mcs_mis_mixture(MixParam::new(p).unwrap()));
            assert!((b.a1 - 2.0 * p).abs() < 1e-15);
            assert!((b.a2 - 2.0 * p).abs() < 1e-15);
            assert!((b.a3 - 2.0 * p).abs() < 1e-15);
            assert!((b.total - 3.0 * p).abs() < 1e-15);
        }

        let phi = BlochTwoQubit::diagonal([0.0; 3], [0.0; 3], [1.0, -1.0, 1.0]);
        let b = closed_form_coherence(&phi);
        assert!((b.a1 - 2.0).abs() < 1e-15 && b.a2 == 0.0 && b.a3 == 0.0);
        assert!((b.total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn first_radicand_pairs_t12_with_t21() {
        // only t12 = t21 = 0.3 and t13 nonzero: |<00|rho|11>| = |t12 + t21|/4
        let mut s = BlochTwoQubit::maximally_mixed();
        s.t[0][1] = 0.3;
        s.t[1][0] = 0.3;
        s.t[0][2] = 0.2;
        let m = s.to_density();
        let direct = m.matrix()[(0, 3)].norm();
        assert!((direct - 0.6 / 4.0).abs() < 1e-15);
        let b = closed_form_coherence(&s);
        assert!((b.total - coherence_of(&s)).abs() < 1e-15);
    }

    #[test]
    fn local_breakdown_matches_scaled_state() {
        let s = BlochTwoQubit::new(
            [0.1, -0.2, 0.05],
            [0.0, 0.3, -0.1],
            [[0.2, 0.1, -0.15], [0.05, -0.1, 0.2], [0.1, 0.12, 0.3]],
        );
        let mu = 0.7;
        let br = local_clone_breakdown(&s, mu);
        let cloned = s.scaled(mu, mu, mu * mu);
        assert!((br.output_total() - coherence_of(&cloned)).abs() < 1e-14);
        assert!(br.b1 < br.a1 && br.b2 < br.a2 && br.b3 < br.a3);
    }

    #[test]
    fn triangle_symmetric_case() {
        let ok = triangle_path_inequality([0.0, 2.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 2.0 / 3.0]).unwrap();
        assert!(ok);
    }

    #[test]
    fn triangle_errors() {
        let e = triangle_path_inequality([0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [1.0, 1.0]);
        assert!(matches!(e, Err(Error::DegenerateTriangle { .. })));
        let e = triangle_path_inequality([0.0, 2.0], [1.0, 0.0], [-1.0, 0.0], [3.0, 3.0]);
        assert!(matches!(e, Err(Error::ExteriorPoint)));
        // a vertex is not strictly interior
        let e = triangle_path_inequality([0.0, 2.0], [1.0, 0.0], [-1.0, 0.0], [1.0, 0.0]);
        assert!(matches!(e, Err(Error::ExteriorPoint)));
    }
}
