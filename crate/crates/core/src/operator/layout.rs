use std::fmt;

use crate::{Error, Result};

/// Tensor-product layout `internal ⊗ mode_0 ⊗ mode_1 ⊗ ...`.
///
/// The internal factor is the most significant index; each motional mode is
/// truncated to Fock states `|0⟩..|cutoff-1⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HilbertLayout {
    internal_dim: usize,
    mode_cutoffs: Vec<usize>,
}

impl HilbertLayout {
    pub fn new(internal_dim: usize, mode_cutoffs: Vec<usize>) -> Result<Self> {
        if internal_dim < 2 {
            return Err(Error::InvalidLayout(format!(
                "internal dimension {internal_dim} < 2"
            )));
        }
        if let Some(c) = mode_cutoffs.iter().find(|&&c| c < 2) {
            return Err(Error::InvalidLayout(format!("Fock cutoff {c} < 2")));
        }
        Ok(HilbertLayout {
            internal_dim,
            mode_cutoffs,
        })
    }

    pub fn single_mode(internal_dim: usize, cutoff: usize) -> Result<Self> {
        Self::new(internal_dim, vec![cutoff])
    }

    pub fn internal_dim(&self) -> usize {
        self.internal_dim
    }

    pub fn mode_cutoffs(&self) -> &[usize] {
        &self.mode_cutoffs
    }

    pub fn modes(&self) -> usize {
        self.mode_cutoffs.len()
    }

    /// Dimension of the motional part alone.
    pub fn phonon_dim(&self) -> usize {
        self.mode_cutoffs.iter().product()
    }

    pub fn dim(&self) -> usize {
        self.internal_dim * self.phonon_dim()
    }

    /// Dimensions of every tensor factor, internal first.
    pub fn factor_dims(&self) -> Vec<usize> {
        std::iter::once(self.internal_dim)
            .chain(self.mode_cutoffs.iter().copied())
            .collect()
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<usize> {
        self.mode_cutoffs
            .get(mode)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                what: "mode",
                index: mode,
                bound: self.modes(),
            })
    }

    pub(crate) fn check_internal(&self, level: usize) -> Result<()> {
        if level < self.internal_dim {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                what: "internal level",
                index: level,
                bound: self.internal_dim,
            })
        }
    }

    /// Flat basis index of `|internal⟩ ⊗ |fock_0⟩ ⊗ |fock_1⟩ ...`.
    pub fn index(&self, internal: usize, fock: &[usize]) -> Result<usize> {
        self.check_internal(internal)?;
        if fock.len() != self.modes() {
            return Err(Error::InvalidLayout(format!(
                "expected {} Fock indices, got {}",
                self.modes(),
                fock.len()
            )));
        }
        let mut idx = internal;
        for (&n, &c) in fock.iter().zip(&self.mode_cutoffs) {
            if n >= c {
                return Err(Error::IndexOutOfRange {
                    what: "Fock level",
                    index: n,
                    bound: c,
                });
            }
            idx = idx * c + n;
        }
        Ok(idx)
    }

    /// Inverse of [`HilbertLayout::index`].
    pub fn decompose(&self, mut index: usize) -> (usize, Vec<usize>) {
        let mut fock = vec![0; self.modes()];
        for (slot, &c) in fock.iter_mut().zip(&self.mode_cutoffs).rev() {
            *slot = index % c;
            index /= c;
        }
        (index, fock)
    }

    /// Fock level of `mode` for every flat basis index.
    pub(crate) fn fock_digits(&self, mode: usize) -> Vec<usize> {
        let stride: usize = self.mode_cutoffs[mode + 1..].iter().product();
        let cutoff = self.mode_cutoffs[mode];
        (0..self.dim()).map(|i| (i / stride) % cutoff).collect()
    }

    pub(crate) fn ensure_same(&self, other: &HilbertLayout) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::LayoutMismatch {
                left: self.clone(),
                right: other.clone(),
            })
        }
    }
}

impl fmt::Display for HilbertLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.internal_dim)?;
        for c in &self.mode_cutoffs {
            write!(f, "x{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_factors() {
        assert!(HilbertLayout::new(1, vec![4]).is_err());
        assert!(HilbertLayout::new(3, vec![4, 1]).is_err());
        assert!(HilbertLayout::new(3, vec![]).is_ok());
    }

    #[test]
    fn index_roundtrip() {
        let l = HilbertLayout::new(3, vec![7, 6, 5]).unwrap();
        assert_eq!(l.dim(), 630);
        for idx in [0, 1, 29, 210, 629] {
            let (i, f) = l.decompose(idx);
            assert_eq!(l.index(i, &f).unwrap(), idx);
        }
        assert_eq!(l.index(1, &[0, 0, 0]).unwrap(), 210);
        assert!(l.index(3, &[0, 0, 0]).is_err());
        assert!(l.index(0, &[7, 0, 0]).is_err());
    }

    #[test]
    fn digit_tables() {
        let l = HilbertLayout::new(2, vec![3, 2]).unwrap();
        assert_eq!(l.fock_digits(0), vec![0, 0, 1, 1, 2, 2, 0, 0, 1, 1, 2, 2]);
        assert_eq!(l.fock_digits(1), vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
        assert_eq!(l.decompose(6).0, 1);
    }
}
