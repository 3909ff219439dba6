//! Truncated Fock-space and multi-level operator algebra.
//!
//! Every [`Operator`] and [`QuantumState`] carries the [`HilbertLayout`] it
//! lives on; combining objects from different layouts is rejected.

mod layout;
pub mod linalg;
mod state;

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;

pub use layout::HilbertLayout;
pub use state::QuantumState;

use crate::{Error, Result, C64};

/// Tolerance for Hamiltonian Hermiticity (largest entry of `H - H†`).
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex square matrix on a Hilbert layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    layout: HilbertLayout,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(layout: &HilbertLayout, matrix: DMatrix<C64>) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidLayout(format!(
                "matrix is {}x{}, layout {layout} has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Operator {
            layout: layout.clone(),
            matrix,
        })
    }

    pub fn identity(layout: &HilbertLayout) -> Self {
        let d = layout.dim();
        Operator {
            layout: layout.clone(),
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn zeros(layout: &HilbertLayout) -> Self {
        let d = layout.dim();
        Operator {
            layout: layout.clone(),
            matrix: DMatrix::zeros(d, d),
        }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Operator {
            layout: self.layout.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Operator {
            layout: self.layout.clone(),
            matrix: &self.matrix * factor,
        }
    }

    pub fn try_compose(&self, rhs: &Operator) -> Result<Operator> {
        self.layout.ensure_same(&rhs.layout)?;
        Ok(Operator {
            layout: self.layout.clone(),
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    pub fn try_add(&self, rhs: &Operator) -> Result<Operator> {
        self.layout.ensure_same(&rhs.layout)?;
        Ok(Operator {
            layout: self.layout.clone(),
            matrix: &self.matrix + &rhs.matrix,
        })
    }

    pub fn commutator(&self, rhs: &Operator) -> Result<Operator> {
        self.layout.ensure_same(&rhs.layout)?;
        Ok(Operator {
            layout: self.layout.clone(),
            matrix: &self.matrix * &rhs.matrix - &rhs.matrix * &self.matrix,
        })
    }

    /// Largest entry of `|M - M†|`.
    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.matrix)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() <= HERMITIAN_TOL
    }

    /// Largest entry of `|U†U - 1|`.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        linalg::max_abs(&(self.matrix.adjoint() * &self.matrix - DMatrix::identity(d, d)))
    }

    /// Unitarity defect restricted to basis states whose Fock levels are all
    /// at least `excluded_top` below the cutoff of their mode.
    pub fn interior_unitarity_error(&self, excluded_top: usize) -> f64 {
        let keep: Vec<usize> = (0..self.dim())
            .filter(|&i| {
                let (_, fock) = self.layout.decompose(i);
                fock.iter()
                    .zip(self.layout.mode_cutoffs())
                    .all(|(&n, &c)| n + excluded_top < c)
            })
            .collect();
        let gram = self.matrix.adjoint() * &self.matrix;
        let mut worst = 0.0f64;
        for &i in &keep {
            for &j in &keep {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

impl Add<&Operator> for &Operator {
    type Output = Operator;

    /// Panics on layout mismatch; use [`Operator::try_add`] to get an error.
    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operator layouts differ")
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(mut self, rhs: Operator) -> Operator {
        self += &rhs;
        self
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        assert_eq!(self.layout, rhs.layout, "operator layouts differ");
        self.matrix += &rhs.matrix;
    }
}

impl AddAssign for Operator {
    fn add_assign(&mut self, rhs: Operator) {
        *self += &rhs;
    }
}

impl SubAssign<&Operator> for Operator {
    fn sub_assign(&mut self, rhs: &Operator) {
        assert_eq!(self.layout, rhs.layout, "operator layouts differ");
        self.matrix -= &rhs.matrix;
    }
}

impl SubAssign for Operator {
    fn sub_assign(&mut self, rhs: Operator) {
        *self -= &rhs;
    }
}

impl Sub<&Operator> for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.layout, rhs.layout, "operator layouts differ");
        Operator {
            layout: self.layout.clone(),
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Mul<&Operator> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.try_compose(rhs).expect("operator layouts differ")
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

impl Mul<C64> for Operator {
    type Output = Operator;
    fn mul(mut self, rhs: C64) -> Operator {
        self.matrix *= rhs;
        self
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(mut self, rhs: f64) -> Operator {
        self.matrix *= C64::new(rhs, 0.0);
        self
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(mut self) -> Operator {
        self.matrix.neg_mut();
        self
    }
}

/// Truncated ladder matrix `a` on `cutoff` Fock states: `⟨n-1|a|n⟩ = √n`.
pub fn ladder_matrix(cutoff: usize) -> DMatrix<C64> {
    DMatrix::from_fn(cutoff, cutoff, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `exp(i (z a + z* a†))` on a single mode of `cutoff` states, computed on an
/// enlarged space of `cutoff + 2` states and projected back.
pub fn displacement_matrix(cutoff: usize, z: C64) -> DMatrix<C64> {
    let big = cutoff + 2;
    let a = ladder_matrix(big);
    let generator = &a * z + a.adjoint() * z.conj();
    let full = linalg::hermitian_function(&generator, |lambda| C64::new(0.0, lambda).exp());
    full.view((0, 0), (cutoff, cutoff)).into_owned()
}

/// Kronecker product of one matrix per tensor factor (internal first).
pub fn tensor_embed(layout: &HilbertLayout, factors: &[DMatrix<C64>]) -> Result<Operator> {
    let dims = layout.factor_dims();
    if factors.len() != dims.len() {
        return Err(Error::InvalidLayout(format!(
            "expected {} factors, got {}",
            dims.len(),
            factors.len()
        )));
    }
    for (f, &d) in factors.iter().zip(&dims) {
        if f.nrows() != d || f.ncols() != d {
            return Err(Error::InvalidLayout(format!(
                "factor is {}x{}, expected {d}x{d}",
                f.nrows(),
                f.ncols()
            )));
        }
    }
    Operator::from_matrix(layout, linalg::kron_all(factors))
}

fn embed_on_mode(layout: &HilbertLayout, mode: usize, local: DMatrix<C64>) -> Result<Operator> {
    layout.check_mode(mode)?;
    let factors: Vec<DMatrix<C64>> = layout
        .factor_dims()
        .into_iter()
        .enumerate()
        .map(|(k, d)| {
            if k == mode + 1 {
                local.clone()
            } else {
                DMatrix::identity(d, d)
            }
        })
        .collect();
    tensor_embed(layout, &factors)
}

/// Annihilation operator of one motional mode, identity elsewhere.
pub fn annihilation(layout: &HilbertLayout, mode: usize) -> Result<Operator> {
    let cutoff = layout.check_mode(mode)?;
    embed_on_mode(layout, mode, ladder_matrix(cutoff))
}

pub fn creation(layout: &HilbertLayout, mode: usize) -> Result<Operator> {
    Ok(annihilation(layout, mode)?.adjoint())
}

/// `a†a` of one mode; built directly so that it is exactly diagonal.
pub fn number(layout: &HilbertLayout, mode: usize) -> Result<Operator> {
    let cutoff = layout.check_mode(mode)?;
    let local = DMatrix::from_fn(cutoff, cutoff, |i, j| {
        C64::new(if i == j { i as f64 } else { 0.0 }, 0.0)
    });
    embed_on_mode(layout, mode, local)
}

/// `|i⟩⟨j|` on the internal factor, identity on every mode.
pub fn transition(layout: &HilbertLayout, i: usize, j: usize) -> Result<Operator> {
    layout.check_internal(i)?;
    layout.check_internal(j)?;
    let n = layout.internal_dim();
    let mut local = DMatrix::zeros(n, n);
    local[(i, j)] = C64::new(1.0, 0.0);
    internal_operator(layout, local)
}

/// Embeds an `internal_dim × internal_dim` matrix with identity on the modes.
pub fn internal_operator(layout: &HilbertLayout, local: DMatrix<C64>) -> Result<Operator> {
    let mut factors = vec![local];
    factors.extend(
        layout
            .mode_cutoffs()
            .iter()
            .map(|&c| DMatrix::<C64>::identity(c, c)),
    );
    tensor_embed(layout, &factors)
}

/// `exp(i (z a + z* a†))` on one mode, identity elsewhere.
///
/// For `z = η e^{-iνt}` this is the traveling-wave recoil factor
/// `exp(iη[a e^{-iνt} + a† e^{iνt}])`.
pub fn displacement_factor(layout: &HilbertLayout, mode: usize, z: C64) -> Result<Operator> {
    let cutoff = layout.check_mode(mode)?;
    embed_on_mode(layout, mode, displacement_matrix(cutoff, z))
}

pub fn adjoint(op: &Operator) -> Operator {
    op.adjoint()
}

/// `⟨ψ|O|ψ⟩` for kets, `tr(ρ O)` for density matrices.
pub fn expectation(state: &QuantumState, op: &Operator) -> Result<C64> {
    state.layout().ensure_same(op.layout())?;
    Ok(state.expect_matrix(op.matrix()))
}
