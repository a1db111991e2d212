//! Dense decompositions backed by `faer`.

use faer::{Mat, Side};

use crate::{CMatrix, Error, Result};

fn to_faer(m: &CMatrix) -> Mat<crate::C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, crate::C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD `m = U diag(s) V†` with `s` in descending order.
pub(crate) fn svd(m: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    let svd = to_faer(m)
        .thin_svd()
        .map_err(|e| Error::InvalidState(format!("SVD failed: {e:?}")))?;
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((from_faer(svd.U()), s, from_faer(svd.V()).adjoint()))
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `m`.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let h = (m + m.adjoint()) * crate::C64::new(0.5, 0.0);
    let eig = to_faer(&h)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::InvalidState(format!("eigendecomposition failed: {e:?}")))?;
    let values = eig.S().column_vector().iter().map(|z| z.re).collect();
    Ok((values, from_faer(eig.U())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::test_util::{max_abs_diff, rng};
    use crate::C64;
    use proptest::prelude::*;
    use rand::Rng;

    fn check_svd(m: &CMatrix) {
        let (u, s, vt) = svd(m).unwrap();
        let k = s.len();
        assert_eq!(k, m.nrows().min(m.ncols()));
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        let sigma = CMatrix::from_fn(k, k, |i, j| if i == j { C64::new(s[i], 0.0) } else { C64::new(0.0, 0.0) });
        assert!(max_abs_diff(&(&u * sigma * &vt), m) < 1e-13);
        assert!(max_abs_diff(&(u.adjoint() * &u), &CMatrix::identity(k, k)) < 1e-13);
        assert!(max_abs_diff(&(&vt * vt.adjoint()), &CMatrix::identity(k, k)) < 1e-13);
    }

    #[test]
    fn rank_one_block_with_rounding_noise() {
        // a two-site block from an MPS run, rank one up to ~1e-16 entries
        const B: [(f64, f64); 16] = [
            (3.630750404757266e-16, 0.0),
            (3.696379044902716e-16, 0.0),
            (0.0, 3.1920215991823126e-16),
            (0.0, 2.386839136376308e-16),
            (0.05820314885247077, 0.0),
            (0.20899718207626583, 0.0),
            (0.0, 0.2871251475360795),
            (0.0, -0.04236582619989212),
            (0.14970732373374274, 0.0),
            (0.5375724408972962, 0.0),
            (0.0, 0.7385294139881844),
            (0.0, -0.1089713285827743),
            (2.317818409469464e-16, 0.0),
            (7.761087093729956e-18, 0.0),
            (0.0, -3.965987390444415e-16),
            (0.0, -5.418885227447353e-16),
        ];
        let m = CMatrix::from_fn(4, 4, |i, j| C64::new(B[4 * i + j].0, B[4 * i + j].1));
        check_svd(&m);
        let (_, s, _) = svd(&m).unwrap();
        assert!((s[0] - m.norm()).abs() < 1e-14);
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let mut r = rng(3);
        let g = CMatrix::from_fn(6, 6, |_, _| C64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5));
        let h = &g + g.adjoint();
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = CMatrix::from_fn(6, 6, |i, j| if i == j { C64::new(vals[i], 0.0) } else { C64::new(0.0, 0.0) });
        assert!(max_abs_diff(&(&vecs * d * vecs.adjoint()), &h) < 1e-13);
    }

    proptest! {
        #[test]
        fn svd_reconstructs(rows in 1usize..9, cols in 1usize..9, seed in any::<u64>(), rank_one in any::<bool>()) {
            let mut r = rng(seed);
            let mut entry = || C64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5);
            let m = if rank_one {
                let (a, b) = (CMatrix::from_fn(rows, 1, |_, _| entry()), CMatrix::from_fn(1, cols, |_, _| entry()));
                a * b
            } else {
                CMatrix::from_fn(rows, cols, |_, _| entry())
            };
            check_svd(&m);
        }
    }
}
