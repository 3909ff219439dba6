use nalgebra::{DMatrix, DVector};

use super::{linalg, HilbertLayout};
use crate::{Error, Result, C64};

const KET_NORM_TOL: f64 = 1e-10;
const RHO_HERMITIAN_TOL: f64 = 1e-10;
const RHO_TRACE_TOL: f64 = 1e-8;
const RHO_POSITIVITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Ket(DVector<C64>),
    Density(DMatrix<C64>),
}

/// Pure ket or density matrix on a [`HilbertLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    layout: HilbertLayout,
    repr: Repr,
}

impl QuantumState {
    pub fn ket(layout: &HilbertLayout, v: DVector<C64>) -> Result<Self> {
        if v.len() != layout.dim() {
            return Err(Error::InvalidState(format!(
                "ket length {} != dimension {}",
                v.len(),
                layout.dim()
            )));
        }
        let norm = linalg::norm_sqr(&v).sqrt();
        if (norm - 1.0).abs() > KET_NORM_TOL {
            return Err(Error::InvalidState(format!("ket norm {norm} is not 1")));
        }
        Ok(Self::ket_unchecked(layout, v))
    }

    pub(crate) fn ket_unchecked(layout: &HilbertLayout, v: DVector<C64>) -> Self {
        QuantumState {
            layout: layout.clone(),
            repr: Repr::Ket(v),
        }
    }

    pub fn density(layout: &HilbertLayout, m: DMatrix<C64>) -> Result<Self> {
        let d = layout.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::InvalidState(format!(
                "density matrix is {}x{}, dimension {d}",
                m.nrows(),
                m.ncols()
            )));
        }
        let herm = linalg::hermiticity_error(&m);
        if herm > RHO_HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix not Hermitian ({herm:.2e})"
            )));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > RHO_TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_eig = linalg::min_hermitian_eigenvalue(&m);
        if min_eig < -RHO_POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self::density_unchecked(layout, m))
    }

    pub(crate) fn density_unchecked(layout: &HilbertLayout, m: DMatrix<C64>) -> Self {
        QuantumState {
            layout: layout.clone(),
            repr: Repr::Density(m),
        }
    }

    /// Basis ket `|internal⟩ ⊗ |fock...⟩`.
    pub fn basis(layout: &HilbertLayout, internal: usize, fock: &[usize]) -> Result<Self> {
        let idx = layout.index(internal, fock)?;
        let mut v = DVector::zeros(layout.dim());
        v[idx] = C64::new(1.0, 0.0);
        Ok(Self::ket_unchecked(layout, v))
    }

    /// `|internal⟩ ⊗ |fock...⟩` for an arbitrary normalized internal vector.
    pub fn product(layout: &HilbertLayout, internal: &DVector<C64>, fock: &[usize]) -> Result<Self> {
        if internal.len() != layout.internal_dim() {
            return Err(Error::InvalidState(format!(
                "internal vector length {} != {}",
                internal.len(),
                layout.internal_dim()
            )));
        }
        let mut v = DVector::zeros(layout.dim());
        for (i, &amp) in internal.iter().enumerate() {
            v[layout.index(i, fock)?] = amp;
        }
        Self::ket(layout, v)
    }

    /// `|internal⟩⟨internal| ⊗ ρ_th(n̄_0) ⊗ ρ_th(n̄_1) ...`, each thermal
    /// distribution truncated to the mode cutoff and renormalized.
    pub fn thermal(layout: &HilbertLayout, internal: &DVector<C64>, mean_n: &[f64]) -> Result<Self> {
        if mean_n.len() != layout.modes() {
            return Err(Error::InvalidState(format!(
                "{} thermal occupations for {} modes",
                mean_n.len(),
                layout.modes()
            )));
        }
        if internal.len() != layout.internal_dim() {
            return Err(Error::InvalidState("internal vector length".into()));
        }
        let mut factors = vec![internal * internal.adjoint()];
        for (&nbar, &cut) in mean_n.iter().zip(layout.mode_cutoffs()) {
            if !(nbar >= 0.0) || !nbar.is_finite() {
                return Err(Error::param("mean_n", format!("{nbar} is not a valid occupation")));
            }
            let weights: Vec<f64> = if nbar == 0.0 {
                (0..cut).map(|n| if n == 0 { 1.0 } else { 0.0 }).collect()
            } else {
                let q = nbar / (1.0 + nbar);
                (0..cut).map(|n| q.powi(n as i32)).collect()
            };
            let total: f64 = weights.iter().sum();
            factors.push(DMatrix::from_fn(cut, cut, |i, j| {
                C64::new(if i == j { weights[i] / total } else { 0.0 }, 0.0)
            }));
        }
        Self::density(layout, linalg::kron_all(&factors))
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn is_ket(&self) -> bool {
        matches!(self.repr, Repr::Ket(_))
    }

    pub fn as_ket(&self) -> Option<&DVector<C64>> {
        match &self.repr {
            Repr::Ket(v) => Some(v),
            Repr::Density(_) => None,
        }
    }

    pub fn as_density(&self) -> Option<&DMatrix<C64>> {
        match &self.repr {
            Repr::Density(m) => Some(m),
            Repr::Ket(_) => None,
        }
    }

    pub fn to_density(&self) -> QuantumState {
        match &self.repr {
            Repr::Ket(v) => Self::density_unchecked(&self.layout, v * v.adjoint()),
            Repr::Density(_) => self.clone(),
        }
    }

    pub fn density_matrix(&self) -> DMatrix<C64> {
        match &self.repr {
            Repr::Ket(v) => v * v.adjoint(),
            Repr::Density(m) => m.clone(),
        }
    }

    /// Diagonal of the density matrix in the product basis.
    pub fn populations(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Ket(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            Repr::Density(m) => (0..m.nrows()).map(|i| m[(i, i)].re).collect(),
        }
    }

    /// Reduced Fock distribution `P(n)` of one mode.
    pub fn fock_distribution(&self, mode: usize) -> Result<Vec<f64>> {
        let cutoff = self.layout.check_mode(mode)?;
        let digits = self.layout.fock_digits(mode);
        let mut p = vec![0.0; cutoff];
        for (pop, n) in self.populations().into_iter().zip(digits) {
            p[n] += pop;
        }
        Ok(p)
    }

    pub fn trace(&self) -> f64 {
        self.populations().iter().sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        match &self.repr {
            Repr::Ket(_) => 0.0,
            Repr::Density(m) => linalg::hermiticity_error(m),
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match &self.repr {
            Repr::Ket(_) => 0.0,
            Repr::Density(m) => linalg::min_hermitian_eigenvalue(m),
        }
    }

    /// Probability of the internal+Fock pure state `target`.
    pub fn overlap_population(&self, target: &DVector<C64>) -> f64 {
        match &self.repr {
            Repr::Ket(v) => target.dotc(v).norm_sqr(),
            Repr::Density(m) => target.dotc(&(m * target)).re,
        }
    }

    pub(crate) fn expect_matrix(&self, op: &DMatrix<C64>) -> C64 {
        match &self.repr {
            Repr::Ket(v) => v.dotc(&(op * v)),
            Repr::Density(m) => {
                // tr(ρ O) = Σ_ij ρ_ij O_ji
                let d = m.nrows();
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..d {
                    for i in 0..d {
                        acc += m[(i, j)] * op[(j, i)];
                    }
                }
                acc
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ket_validation() {
        let l = HilbertLayout::single_mode(2, 3).unwrap();
        let mut v = DVector::zeros(6);
        v[0] = C64::new(0.5, 0.0);
        assert!(QuantumState::ket(&l, v.clone()).is_err());
        v[1] = C64::new(0.0, 0.75f64.sqrt());
        assert!(QuantumState::ket(&l, v).is_ok());
    }

    #[test]
    fn density_validation() {
        let l = HilbertLayout::single_mode(2, 2).unwrap();
        let mut m = DMatrix::<C64>::identity(4, 4) * C64::new(0.25, 0.0);
        assert!(QuantumState::density(&l, m.clone()).is_ok());
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(QuantumState::density(&l, m.clone()).is_err());
        m[(0, 1)] = C64::new(0.0, 0.0);
        m[(0, 0)] = C64::new(0.5, 0.0);
        assert!(QuantumState::density(&l, m.clone()).is_err());
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(QuantumState::density(&l, m).is_err());
    }

    #[test]
    fn thermal_mean() {
        let l = HilbertLayout::single_mode(2, 60).unwrap();
        let down = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let s = QuantumState::thermal(&l, &down, &[2.0]).unwrap();
        let p = s.fock_distribution(0).unwrap();
        let mean: f64 = p.iter().enumerate().map(|(n, w)| n as f64 * w).sum();
        assert!((mean - 2.0).abs() < 1e-8);
        assert!((p[1] / p[0] - 2.0 / 3.0).abs() < 1e-12);
    }
}
