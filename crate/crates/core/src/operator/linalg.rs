//! Dense complex linear algebra shared by the solvers.

use nalgebra::{DMatrix, DVector};

use crate::C64;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential of a general complex matrix by [13/13] Padé
/// approximation with scaling and squaring.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    assert!(a.is_square(), "expm of a non-square matrix");
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = one_norm(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * C64::new(2f64.powi(-squarings), 0.0);
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let id = DMatrix::<C64>::identity(n, n);

    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular for scaled arguments");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Applies `f` to the spectrum of a Hermitian matrix: `V f(Λ) V†`.
pub fn hermitian_function(h: &DMatrix<C64>, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (mut col, &lambda) in scaled.column_iter_mut().zip(eig.eigenvalues.iter()) {
        col *= f(lambda);
    }
    scaled * v.adjoint()
}

pub fn min_hermitian_eigenvalue(h: &DMatrix<C64>) -> f64 {
    h.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Largest entry of `|m - m†|`.
pub fn hermiticity_error(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(m + m†) / 2` in place.
pub fn symmetrize(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)].im = 0.0;
        for i in 0..j {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn kron_all(factors: &[DMatrix<C64>]) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::identity(1, 1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

pub fn norm_sqr(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor_expm(a: &DMatrix<C64>) -> DMatrix<C64> {
        let n = a.nrows();
        let mut term = DMatrix::<C64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &term * a / C64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn expm_matches_taylor_for_moderate_norm() {
        let a = DMatrix::from_fn(5, 5, |i, j| {
            C64::new(((i * 7 + j * 3) % 5) as f64 * 0.3 - 0.5, (i as f64 - j as f64) * 0.2)
        });
        let got = expm(&a);
        let want = taylor_expm(&a);
        assert!(max_abs(&(got - want)) < 1e-11);
    }

    #[test]
    fn expm_scales_large_arguments() {
        // exp(i θ σ_x) for θ = 40 needs squaring
        let theta = 40.0;
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(0.0, theta), C64::new(0.0, theta), C64::new(0.0, 0.0)],
        );
        let got = expm(&a);
        assert!((got[(0, 0)] - C64::new(theta.cos(), 0.0)).norm() < 1e-12);
        assert!((got[(0, 1)] - C64::new(0.0, theta.sin())).norm() < 1e-12);
    }

    #[test]
    fn hermitian_route_agrees_with_pade() {
        let h = DMatrix::from_fn(6, 6, |i, j| {
            let re = ((i + j) as f64).sin();
            let im = if i == j { 0.0 } else { (i as f64 - j as f64) * 0.1 };
            C64::new(re, im)
        });
        let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        let via_eig = hermitian_function(&h, |l| C64::new(0.0, -0.7 * l).exp());
        let via_pade = expm(&(&h * C64::new(0.0, -0.7)));
        assert!(max_abs(&(via_eig - via_pade)) < 1e-12);
    }

    #[test]
    fn symmetrize_makes_hermitian() {
        let mut m = DMatrix::from_fn(4, 4, |i, j| C64::new(i as f64, j as f64));
        symmetrize(&mut m);
        assert_eq!(hermiticity_error(&m), 0.0);
    }
}
