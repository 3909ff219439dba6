use nalgebra::{DMatrix, DVector};

use crate::operator::HilbertLayout;
use crate::C64;

fn level_names(internal_dim: usize) -> Vec<String> {
    match internal_dim {
        2 => vec!["down".into(), "up".into()],
        3 => vec!["g1".into(), "g2".into(), "e".into()],
        n => (0..n).map(|k| format!("l{k}")).collect(),
    }
}

/// Channel names in the order produced by [`Observer`]:
/// `n{m}` and `top{m}` per mode, `p_{level}` per internal level, then the
/// dressed populations `p_plus`, `p_minus` of levels 0 and 1.
pub fn channel_names(layout: &HilbertLayout) -> Vec<String> {
    let mut names = Vec::new();
    for m in 0..layout.modes() {
        names.push(format!("n{m}"));
    }
    for m in 0..layout.modes() {
        names.push(format!("top{m}"));
    }
    for l in level_names(layout.internal_dim()) {
        names.push(format!("p_{l}"));
    }
    names.push("p_plus".into());
    names.push("p_minus".into());
    names
}

/// Evaluates the standard channels from populations and the reduced
/// internal coherence `ρ_{01}`.
#[derive(Clone, Debug)]
pub struct Observer {
    internal_dim: usize,
    phonon_dim: usize,
    cutoffs: Vec<usize>,
    /// `digits[m][k]` is the Fock number of mode `m` in phonon index `k`.
    digits: Vec<Vec<usize>>,
}

impl Observer {
    pub fn new(layout: &HilbertLayout) -> Self {
        let phonon_dim = layout.phonon_dim();
        let cutoffs = layout.mode_cutoffs().to_vec();
        let mut digits = Vec::with_capacity(cutoffs.len());
        let mut stride = phonon_dim;
        for &cut in &cutoffs {
            stride /= cut;
            digits.push((0..phonon_dim).map(|k| (k / stride) % cut).collect());
        }
        Observer {
            internal_dim: layout.internal_dim(),
            phonon_dim,
            cutoffs,
            digits,
        }
    }

    pub fn modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn len(&self) -> usize {
        2 * self.modes() + self.internal_dim + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn assemble(&self, pops: impl Fn(usize) -> f64, coherence01: C64) -> Vec<f64> {
        let modes = self.modes();
        let mut out = vec![0.0; self.len()];
        for i in 0..self.internal_dim {
            let mut p_level = 0.0;
            for k in 0..self.phonon_dim {
                let p = pops(i * self.phonon_dim + k);
                p_level += p;
                for m in 0..modes {
                    let n = self.digits[m][k];
                    out[m] += n as f64 * p;
                    if n + 1 == self.cutoffs[m] {
                        out[modes + m] += p;
                    }
                }
            }
            out[2 * modes + i] = p_level;
        }
        let p0 = out[2 * modes];
        let p1 = out[2 * modes + 1];
        out[2 * modes + self.internal_dim] = 0.5 * (p0 + p1) + coherence01.re;
        out[2 * modes + self.internal_dim + 1] = 0.5 * (p0 + p1) - coherence01.re;
        out
    }

    /// Channels of `ψ/‖ψ‖`.
    pub fn ket(&self, psi: &DVector<C64>) -> Vec<f64> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let inv = 1.0 / norm2;
        let p = self.phonon_dim;
        let mut coh = C64::new(0.0, 0.0);
        for k in 0..p {
            coh += psi[k] * psi[p + k].conj();
        }
        self.assemble(|idx| psi[idx].norm_sqr() * inv, coh * inv)
    }

    pub fn density(&self, rho: &DMatrix<C64>) -> Vec<f64> {
        let p = self.phonon_dim;
        let mut coh = C64::new(0.0, 0.0);
        for k in 0..p {
            coh += rho[(k, p + k)];
        }
        self.assemble(|idx| rho[(idx, idx)].re, coh)
    }

    /// Top-level populations out of a channel vector.
    pub fn tops<'a>(&self, channels: &'a [f64]) -> &'a [f64] {
        &channels[self.modes()..2 * self.modes()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{dressed_minus, dressed_plus};
    use crate::operator::QuantumState;

    #[test]
    fn channels_of_product_states() {
        let l = HilbertLayout::new(3, vec![3, 4]).unwrap();
        let obs = Observer::new(&l);
        assert_eq!(channel_names(&l).len(), obs.len());
        let s = QuantumState::product(&l, &dressed_minus(3), &[2, 1]).unwrap();
        let v = obs.ket(s.as_ket().unwrap());
        let names = channel_names(&l);
        let get = |n: &str| v[names.iter().position(|x| x == n).unwrap()];
        assert!((get("n0") - 2.0).abs() < 1e-14);
        assert!((get("n1") - 1.0).abs() < 1e-14);
        assert!((get("top0") - 1.0).abs() < 1e-14);
        assert_eq!(get("top1"), 0.0);
        assert!((get("p_g1") - 0.5).abs() < 1e-14);
        assert!((get("p_minus") - 1.0).abs() < 1e-14);
        assert!(get("p_plus").abs() < 1e-14);
        let rho = s.density_matrix();
        let w = obs.density(&rho);
        for (a, b) in v.iter().zip(&w) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn ket_channels_normalize() {
        let l = HilbertLayout::single_mode(2, 3).unwrap();
        let obs = Observer::new(&l);
        let s = QuantumState::product(&l, &dressed_plus(2), &[1]).unwrap();
        let psi = s.as_ket().unwrap() * C64::new(0.3, 0.0);
        let v = obs.ket(&psi);
        assert!((v[0] - 1.0).abs() < 1e-14);
        assert!((v[v.len() - 2] - 1.0).abs() < 1e-14);
    }
}
