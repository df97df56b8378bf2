//! Per-iteration linear system of the rotation-constrained ICP.
//!
//! With `λ_i = M_{k-1} p_i − q_i` held fixed, the linearised error
//! `Σ λ_iᵀ (M p_i − q_i)` becomes `Σ λ'_iᵀ (UQ s_i − d_i)` where
//! `λ'_iᵀ = λ_iᵀ X⁻¹`, `s_i = X p_i` and `d_i = X q_i`. Each correspondence
//! contributes one row that is affine in `φ`.

use nalgebra::{DMatrix, DVector};

use crate::display_model::ViewpointShift;
use crate::error::{Error, Result};
use crate::geometry::{transform_point4, Mat4, RigidTransform, Vec3};

/// Relative singular-value threshold below which the system is rank deficient.
const RANK_TOL: f64 = 1e-10;

/// Stacked rows `A x = b` in the unknown `x = (φ₁, φ₂, φ₃)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearSystem {
    pub a: Vec<[f64; 3]>,
    pub b: Vec<f64>,
}

impl LinearSystem {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn push(&mut self, row: [f64; 3], rhs: f64) {
        self.a.push(row);
        self.b.push(rhs);
    }
}

/// Builds one row per `(p_i, q_i)` correspondence (source point, matched target point).
pub fn assemble_system(
    correspondences: &[(Vec3, Vec3)],
    m_prev: &Mat4,
    x: &RigidTransform,
    phi4_tilde: f64,
) -> LinearSystem {
    // λ' = (λᵀ X⁻¹)ᵀ restricted to xyz; λ is a direction so only X⁻¹'s 3×3 block acts
    let pullback = x.inverse().rotation.matrix().transpose();
    let mut sys = LinearSystem { a: Vec::with_capacity(correspondences.len()), b: Vec::with_capacity(correspondences.len()) };
    for (p, q) in correspondences {
        let lambda = transform_point4(m_prev, p) - q;
        let lp = pullback * lambda;
        let s = x.transform_point(p);
        let d = x.transform_point(q);
        let scale = 1.0 - phi4_tilde * s.z;
        sys.push(
            [
                -lp.x * scale,
                -lp.y * scale,
                -(phi4_tilde * (lp.x * s.x + lp.y * s.y) + lp.z),
            ],
            (d - s).dot(&lp),
        );
    }
    sys
}

/// Least-squares solution of the stacked system via SVD.
pub fn solve_system(sys: &LinearSystem) -> Result<ViewpointShift> {
    if sys.is_empty() {
        return Err(Error::InvalidInput("empty linear system".into()));
    }
    if sys.a.len() != sys.b.len() {
        return Err(Error::InvalidInput("row count mismatch between A and b".into()));
    }
    let a = DMatrix::from_fn(sys.len(), 3, |r, c| sys.a[r][c]);
    let b = DVector::from_column_slice(&sys.b);
    let svd = a.svd(true, true);
    let sigma = &svd.singular_values;
    let max = sigma.max();
    let min = sigma.min();
    if sys.len() < 3 || !(max > 0.0) || min <= RANK_TOL * max {
        return Err(Error::DegenerateGeometry(format!(
            "linear system is rank deficient (singular values {:?})",
            sigma.as_slice()
        )));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::DegenerateGeometry(format!("SVD solve failed: {e}")))?;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::DegenerateGeometry("non-finite least-squares solution".into()));
    }
    Ok(ViewpointShift::new(x[0], x[1], x[2]))
}
