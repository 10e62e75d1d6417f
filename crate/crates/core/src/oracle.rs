//! Brute-force cloning: the Buzek-Hillery transformation built as an explicit
//! isometry, applied to a two-qubit density matrix and reduced by partial
//! traces. Used to cross-check the closed-form maps in [`crate::cloning`].
//!
//! The machine register is an orthonormal basis `{m_j}` of dimension M with
//! `X_ii = m_i` and `Y_ij = X_jj`, so
//!
//! ```text
//! V|i> = c |i, i, m_i> + d * sum_{j != i} (|i, j> + |j, i>) |m_j>,   c^2 = 1 - 2(M-1) lambda, d^2 = lambda.
//! ```
//!
//! Factor order of the joint output is (copy 1, copy 2, machine).

use serde::Serialize;

use crate::cloning::{clone, MachineParam, Mode};
use crate::coherence::off_diagonal_l1;
use crate::error::{Error, Result};
use crate::linalg::{self, tol, CMatrix};
use crate::states::{bloch_to_density, BlochTwoQubit, DensityMatrix};

#[derive(Debug, Clone)]
pub struct Isometry {
    dim: usize,
    lambda: f64,
    c: f64,
    d: f64,
    matrix: CMatrix,
}

impl Isometry {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// `M^3 x M`, rows indexed by `(a0 * M + a1) * M + machine`.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// max |(V^dagger V - I)_ij|.
    pub fn orthonormality_residual(&self) -> f64 {
        linalg::unitary_residual(&self.matrix)
    }

    /// c^2 + 2(M-1)d^2 - 1.
    pub fn normalization_residual(&self) -> f64 {
        (self.c * self.c + 2.0 * (self.dim as f64 - 1.0) * self.d * self.d - 1.0).abs()
    }

    /// Bloch shrinking of a single copy for this machine-vector choice:
    /// 2cd + (M-2)d^2.
    pub fn first_copy_shrinking(&self) -> f64 {
        2.0 * self.c * self.d + (self.dim as f64 - 2.0) * self.d * self.d
    }
}

/// Largest lambda for which c^2 = 1 - 2(M-1)lambda stays nonnegative.
pub fn max_constructible_lambda(dim: usize) -> f64 {
    1.0 / (2.0 * (dim as f64 - 1.0))
}

pub fn build_bh_isometry(dim: usize, lambda: f64) -> Result<Isometry> {
    if dim != 2 && dim != 4 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let max = max_constructible_lambda(dim);
    if !(0.0..=max).contains(&lambda) {
        return Err(Error::NotConstructible { dim, lambda, max });
    }
    let c = (1.0 - 2.0 * (dim as f64 - 1.0) * lambda).max(0.0).sqrt();
    let d = lambda.sqrt();
    let row = |a0: usize, a1: usize, m: usize| (a0 * dim + a1) * dim + m;
    let mut matrix = CMatrix::zeros(dim * dim * dim, dim);
    for i in 0..dim {
        matrix[(row(i, i, i), i)] += linalg::real(c);
        for j in (0..dim).filter(|&j| j != i) {
            matrix[(row(i, j, j), i)] += linalg::real(d);
            matrix[(row(j, i, j), i)] += linalg::real(d);
        }
    }
    Ok(Isometry {
        dim,
        lambda,
        c,
        d,
        matrix,
    })
}

/// Density operator on a tensor product with explicit factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiDensity {
    dims: Vec<usize>,
    entries: CMatrix,
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut out = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        out[k] = out[k + 1] * dims[k + 1];
    }
    out
}

/// Flat offsets of every configuration of the selected factors.
fn offsets(dims: &[usize], strides: &[usize], factors: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &f in factors {
        out = out
            .iter()
            .flat_map(|base| (0..dims[f]).map(move |v| base + v * strides[f]))
            .collect();
    }
    out
}

impl MultiDensity {
    pub fn new(dims: Vec<usize>, entries: CMatrix) -> Result<Self> {
        let size: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) || entries.nrows() != size || entries.ncols() != size {
            return Err(Error::FactorMismatch {
                dims,
                size: entries.nrows(),
            });
        }
        Ok(Self { dims, entries })
    }

    pub fn from_density(rho: &DensityMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::new(dims, rho.matrix().clone())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn kron(&self, other: &MultiDensity) -> MultiDensity {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        MultiDensity {
            dims,
            entries: linalg::kron(&self.entries, &other.entries),
        }
    }

    /// Reduced state on `keep`; kept factors stay in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<MultiDensity> {
        let n = self.dims.len();
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.len() != keep.len() || kept.iter().any(|&k| k >= n) {
            return Err(Error::InvalidKeep {
                keep: keep.to_vec(),
                factors: n,
            });
        }
        let traced: Vec<usize> = (0..n).filter(|k| !kept.contains(k)).collect();
        let st = strides(&self.dims);
        let keep_off = offsets(&self.dims, &st, &kept);
        let trace_off = offsets(&self.dims, &st, &traced);
        let size = keep_off.len();
        let mut out = CMatrix::zeros(size, size);
        for (r, &kr) in keep_off.iter().enumerate() {
            for (c, &kc) in keep_off.iter().enumerate() {
                out[(r, c)] = trace_off
                    .iter()
                    .map(|&t| self.entries[(kr + t, kc + t)])
                    .sum();
            }
        }
        let dims = if kept.is_empty() {
            vec![1]
        } else {
            kept.iter().map(|&k| self.dims[k]).collect()
        };
        Ok(MultiDensity { dims, entries: out })
    }

    /// Reorders factors so that new factor `k` is old factor `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<MultiDensity> {
        let n = self.dims.len();
        let mut check = order.to_vec();
        check.sort_unstable();
        if check != (0..n).collect::<Vec<_>>() {
            return Err(Error::InvalidKeep {
                keep: order.to_vec(),
                factors: n,
            });
        }
        let old_st = strides(&self.dims);
        let new_dims: Vec<usize> = order.iter().map(|&k| self.dims[k]).collect();
        let new_st: Vec<usize> = order.iter().map(|&k| old_st[k]).collect();
        // offsets over the new factor order, expressed in old flat indices
        let map = offsets(&new_dims, &new_st, &(0..n).collect::<Vec<_>>());
        let size = map.len();
        let out = CMatrix::from_fn(size, size, |i, j| self.entries[(map[i], map[j])]);
        Ok(MultiDensity {
            dims: new_dims,
            entries: out,
        })
    }

    pub fn into_density(self) -> DensityMatrix {
        DensityMatrix::new(self.entries).expect("square by construction")
    }
}

/// Oracle outputs as density matrices.
#[derive(Debug, Clone)]
pub struct OracleOutputs {
    pub rho12: DensityMatrix,
    pub rho34: DensityMatrix,
    pub rho13: DensityMatrix,
    pub rho24: DensityMatrix,
    /// Joint state over (1, 2, 3, 4, machine...) before reduction.
    pub joint: MultiDensity,
}

impl OracleOutputs {
    pub fn pairs(&self) -> [&DensityMatrix; 4] {
        [&self.rho12, &self.rho34, &self.rho13, &self.rho24]
    }
}

/// Largest lambda the oracle can realize for a cloning mode.
pub fn oracle_max_lambda(mode: Mode) -> f64 {
    max_constructible_lambda(mode.cloner_dim())
}

/// Applies the cloner and returns all four pairwise reductions.
///
/// Non-local: one M=4 cloner on (1,2) writing copy 2 into (3,4).
/// Local: an M=2 cloner per qubit, 1 -> (1,3) with machine A and
/// 2 -> (2,4) with machine B, reordered from (1,3,A,2,4,B) to (1,2,3,4,A,B).
pub fn oracle_clone(s: &BlochTwoQubit, mode: Mode, lambda: f64) -> Result<OracleOutputs> {
    let rho = bloch_to_density(s);
    let joint = match mode {
        Mode::Nonlocal => {
            let v = build_bh_isometry(4, lambda)?;
            let m = v.matrix();
            MultiDensity::new(vec![2, 2, 2, 2, 4], m * rho.matrix() * m.adjoint())?
        }
        Mode::Local => {
            let v = build_bh_isometry(2, lambda)?;
            let w = linalg::kron(v.matrix(), v.matrix());
            let raw = MultiDensity::new(vec![2; 6], &w * rho.matrix() * w.adjoint())?;
            raw.permute(&[0, 3, 1, 4, 2, 5])?
        }
    };
    let reduce = |keep: &[usize]| joint.partial_trace(keep).map(MultiDensity::into_density);
    Ok(OracleOutputs {
        rho12: reduce(&[0, 1])?,
        rho34: reduce(&[2, 3])?,
        rho13: reduce(&[0, 2])?,
        rho24: reduce(&[1, 3])?,
        joint,
    })
}

/// Oracle vs closed-form deviations for one input state.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub mode: Mode,
    pub lambda: f64,
    /// Whether lambda is the state-independent point of the mode.
    pub state_independent: bool,
    /// Max entrywise deviation for pairs (12, 34, 13, 24).
    pub pair_deviation: [f64; 4],
    /// |C_oracle - C_closed| for pairs (12, 34, 13, 24).
    pub coherence_deviation: [f64; 4],
    pub max_deviation: f64,
    pub within_tolerance: bool,
}

pub fn compare_with_closed_form(s: &BlochTwoQubit, mode: Mode, lambda: f64) -> Result<ComparisonReport> {
    let oracle = oracle_clone(s, mode, lambda)?;
    let closed = clone(s, &MachineParam::new(mode, lambda)?);
    let mut pair_deviation = [0.0; 4];
    let mut coherence_deviation = [0.0; 4];
    for (k, (rho_o, (_, bloch))) in oracle.pairs().into_iter().zip(closed.pairs()).enumerate() {
        let rho_c = bloch_to_density(bloch);
        pair_deviation[k] = rho_o.max_abs_diff(&rho_c);
        coherence_deviation[k] = (off_diagonal_l1(rho_o.matrix()) - off_diagonal_l1(rho_c.matrix())).abs();
    }
    let max_deviation = pair_deviation
        .iter()
        .chain(coherence_deviation.iter())
        .copied()
        .fold(0.0, f64::max);
    Ok(ComparisonReport {
        mode,
        lambda,
        state_independent: (lambda - mode.si_lambda()).abs() <= 1e-12,
        pair_deviation,
        coherence_deviation,
        max_deviation,
        within_tolerance: max_deviation <= tol::ORACLE,
    })
}
