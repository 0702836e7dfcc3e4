//! Intersecting-membrane background.
//!
//! Two membranes share one `N`-level Fock representation, so `P1 = P2 = P`
//! and `Q1 = Q2 = Q` as matrices:
//!
//! ```text
//! X1 = diag(P sin, P sin)   X2 = diag(P cos, -P cos)   X3 = diag(Q, Q)
//! ```
//!
//! The relative coordinates entering the fluctuation operator are realised as
//! one canonical pair with `[Qrel, Prel] = 2 pi i z^2`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::linalg::block2;
use crate::oscillator::{commutator, make_qp, InteriorProjector, TruncatedOperator};
use crate::{Error, Params, Result, C64};

/// Smallest truncation accepted for a background.
pub const MIN_BACKGROUND_TRUNCATION: usize = 4;

#[derive(Debug, Clone)]
pub struct BraneBackground {
    params: Params,
    n: usize,
    x: [TruncatedOperator; 3],
    q_rel: TruncatedOperator,
    p_rel: TruncatedOperator,
}

impl BraneBackground {
    pub fn params(&self) -> Params {
        self.params
    }

    /// Fock truncation per block.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Background matrix `X_{i+1}` (dimension `2N`).
    pub fn x(&self, i: usize) -> &TruncatedOperator {
        &self.x[i]
    }

    pub fn xs(&self) -> &[TruncatedOperator; 3] {
        &self.x
    }

    pub fn q_rel(&self) -> &TruncatedOperator {
        &self.q_rel
    }

    pub fn p_rel(&self) -> &TruncatedOperator {
        &self.p_rel
    }
}

pub fn build_background(params: Params, n: usize) -> Result<BraneBackground> {
    if n < MIN_BACKGROUND_TRUNCATION {
        return Err(Error::TruncationTooSmall { got: n, min: MIN_BACKGROUND_TRUNCATION });
    }
    // Params::new already applied the angle guard; z2 > 0 is enforced here.
    let (q, p) = make_qp(n, params.z2)?;
    let (s, c) = params.theta.sin_cos();
    let zero = DMatrix::<C64>::zeros(n, n);

    let ps = p.matrix() * C64::new(s, 0.0);
    let pc = p.matrix() * C64::new(c, 0.0);
    let x1 = block2(&ps, &zero, &zero, &ps);
    let x2 = block2(&pc, &zero, &zero, &(-&pc));
    let x3 = block2(q.matrix(), &zero, &zero, q.matrix());

    Ok(BraneBackground {
        params,
        n,
        x: [
            TruncatedOperator::new(x1)?,
            TruncatedOperator::new(x2)?,
            TruncatedOperator::new(x3)?,
        ],
        q_rel: q,
        p_rel: p,
    })
}

/// Off-diagonal blocks `T1, T2, T3` of the fluctuation `A_i = [[0, T_i], [T_i^dagger, 0]]`.
#[derive(Debug, Clone)]
pub struct OffDiagonalFluctuation {
    t: [TruncatedOperator; 3],
}

impl OffDiagonalFluctuation {
    pub fn new(t1: TruncatedOperator, t2: TruncatedOperator, t3: TruncatedOperator) -> Result<Self> {
        for t in [&t2, &t3] {
            if t.dim() != t1.dim() {
                return Err(Error::DimensionMismatch { left: t1.dim(), right: t.dim() });
            }
        }
        Ok(Self { t: [t1, t2, t3] })
    }

    pub fn n(&self) -> usize {
        self.t[0].dim()
    }

    pub fn t(&self, i: usize) -> &TruncatedOperator {
        &self.t[i]
    }

    pub fn ts(&self) -> &[TruncatedOperator; 3] {
        &self.t
    }

    /// The `2N x 2N` Hermitian block matrix `A_{i+1}`.
    pub fn block(&self, i: usize) -> TruncatedOperator {
        let t = self.t[i].matrix();
        let zero = DMatrix::zeros(t.nrows(), t.ncols());
        TruncatedOperator::from_matrix(block2(&zero, t, &t.adjoint(), &zero))
    }

    pub fn blocks(&self) -> [TruncatedOperator; 3] {
        [self.block(0), self.block(1), self.block(2)]
    }
}

/// Identity-proportionality of one background commutator `[X_i, X_j]`.
#[derive(Debug, Clone, Serialize)]
pub struct BlockCommutator {
    pub i: usize,
    pub j: usize,
    /// Interior proportionality constant of the upper block (`[P1 ..., Q1]` side).
    pub upper: C64,
    pub lower: C64,
    /// Largest interior deviation of either block from `constant * I`.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorReport {
    pub margin: usize,
    pub pairs: Vec<BlockCommutator>,
    /// `2 * sum_{i<j} upper^2`, the per-interior-level coefficient of
    /// `sum_ij Tr [X_i, X_j]^2`; expected `-8 pi^2 z^4` for every angle.
    pub squared_sum_per_level: C64,
    pub expected_squared_sum: f64,
    /// The closed-form total quoted for `Tr [X_i,X_j][X_i,X_j]`, `-16 pi z^4`;
    /// carried for comparison only. It does not equal the per-level value and a
    /// truncated trace grows with `N`.
    pub quoted_trace_value: f64,
    pub max_residual: f64,
}

/// Measures the block constants of `[X_i, X_j]` for `i < j` on the interior (margin 1).
pub fn check_background_commutators(bg: &BraneBackground) -> CommutatorReport {
    const MARGIN: usize = 1;
    let n = bg.n();
    // margin < n holds because n >= MIN_BACKGROUND_TRUNCATION
    let proj = InteriorProjector::new(n, MARGIN).expect("margin below truncation");
    let levels = proj.levels();

    let mut pairs = Vec::with_capacity(3);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let k = commutator(bg.x(i), bg.x(j)).expect("background blocks share a dimension");
        let mut constants = [C64::new(0.0, 0.0); 2];
        let mut residual: f64 = 0.0;
        for (b, constant) in constants.iter_mut().enumerate() {
            let off = b * n;
            let block = k.matrix().view((off, off), (n, n)).into_owned();
            let block = TruncatedOperator::from_matrix(block);
            let mean = (0..levels).map(|l| block.matrix()[(l, l)]).sum::<C64>() / levels as f64;
            *constant = mean;
            residual = residual.max(proj.deviation_from_identity(&block, mean).unwrap());
            // the off-diagonal blocks of a block-diagonal commutator vanish exactly
            let cross = k.matrix().view((off, n - off), (n, n));
            residual = residual.max(cross.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        pairs.push(BlockCommutator {
            i: i + 1,
            j: j + 1,
            upper: constants[0],
            lower: constants[1],
            residual,
        });
    }

    let squared_sum_per_level = pairs.iter().map(|p| p.upper * p.upper).sum::<C64>() * 2.0;
    let z4 = bg.params().z2 * bg.params().z2;
    let max_residual = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
    CommutatorReport {
        margin: MARGIN,
        pairs,
        squared_sum_per_level,
        expected_squared_sum: -8.0 * PI * PI * z4,
        quoted_trace_value: -16.0 * PI * z4,
        max_residual,
    }
}
