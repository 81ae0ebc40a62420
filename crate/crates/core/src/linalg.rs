//! Dense symmetric linear algebra for the random-matrix oracle: just enough
//! to build Haar-orthogonal conjugations and extract eigenvalue spectra.
//!
//! Matrices are row-major `n x n` slices of `f64`.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

/// `C = A * B^T`; with `B = A` this is the Gram matrix. The transposed
/// layout keeps both inner loops running over contiguous rows.
#[cfg(test)]
pub fn gemm_nt(a: &[f64], b: &[f64], n: usize, c: &mut [f64]) {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * n);
    debug_assert_eq!(c.len(), n * n);
    for i in 0..n {
        let ra = &a[i * n..(i + 1) * n];
        for j in 0..n {
            let rb = &b[j * n..(j + 1) * n];
            let mut acc = 0.0;
            for k in 0..n {
                acc += ra[k] * rb[k];
            }
            c[i * n + j] = acc;
        }
    }
}

/// Adds `Q * diag(d) * Q^T` to `s`, exploiting symmetry of the product.
pub fn add_conjugated_diagonal(s: &mut [f64], q: &[f64], d: &[f64], n: usize) {
    // rows of B = Q * diag(d) are the rows of Q scaled entrywise by d,
    // so (Q diag(d) Q^T)_{ij} = sum_k q_{ik} d_k q_{jk}
    let mut scaled = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            scaled[i * n + k] = q[i * n + k] * d[k];
        }
    }
    for i in 0..n {
        let rs = &scaled[i * n..(i + 1) * n];
        for j in i..n {
            let rq = &q[j * n..(j + 1) * n];
            let mut acc = 0.0;
            for k in 0..n {
                acc += rs[k] * rq[k];
            }
            s[i * n + j] += acc;
            if j != i {
                s[j * n + i] += acc;
            }
        }
    }
}

/// Orthogonal matrix obtained from the QR decomposition of `a` (destroyed),
/// with the sign convention `R_kk > 0`. Feeding i.i.d. Gaussian entries
/// yields a Haar-distributed orthogonal matrix.
///
/// Internally the buffer is read column-major so every Householder vector
/// and every updated column is a contiguous slice; for statistical purposes
/// the reinterpretation is a transpose, which preserves both Gaussianity of
/// the input and Haar distribution of the output.
pub fn haar_q_from_gaussian(a: &mut [f64], n: usize) -> Vec<f64> {
    // Householder vectors stored below the diagonal of `a`, scalars in tau
    let mut tau = vec![0.0; n];
    let mut rkk_sign = vec![1.0f64; n];
    for k in 0..n {
        let colk = &mut a[k * n..(k + 1) * n];
        let mut norm_sq = 0.0;
        for &v in &colk[k..] {
            norm_sq += v * v;
        }
        let norm = norm_sq.sqrt();
        if norm == 0.0 {
            tau[k] = 0.0;
            continue;
        }
        // v = x + sign(alpha) ||x|| e_1 avoids cancellation
        let alpha = colk[k];
        let beta = if alpha >= 0.0 { norm } else { -norm };
        colk[k] = alpha + beta;
        // ||v||^2 = 2 beta (alpha + beta), both factors share beta's sign
        tau[k] = 1.0 / (beta * colk[k]);
        // R_kk after reflection is -beta
        rkk_sign[k] = if -beta >= 0.0 { 1.0 } else { -1.0 };
        let (left, right) = a.split_at_mut((k + 1) * n);
        let v = &left[k * n + k..];
        let t = tau[k];
        for j in 0..n - k - 1 {
            let colj = &mut right[j * n + k..j * n + n];
            let mut dot = 0.0;
            for (vi, cj) in v.iter().zip(colj.iter()) {
                dot += vi * cj;
            }
            let s = t * dot;
            for (vi, cj) in v.iter().zip(colj.iter_mut()) {
                *cj -= s * vi;
            }
        }
    }
    // accumulate Q = H_0 H_1 ... H_{n-1} applied to the identity, backwards;
    // q is column-major like `a`, so reflections act on contiguous slices
    let mut q = vec![0.0; n * n];
    for j in 0..n {
        q[j * n + j] = 1.0;
    }
    for k in (0..n).rev() {
        if tau[k] == 0.0 {
            continue;
        }
        let v = &a[k * n + k..(k + 1) * n];
        let t = tau[k];
        for j in k..n {
            let colj = &mut q[j * n + k..j * n + n];
            let mut dot = 0.0;
            for (vi, cj) in v.iter().zip(colj.iter()) {
                dot += vi * cj;
            }
            let s = t * dot;
            for (vi, cj) in v.iter().zip(colj.iter_mut()) {
                *cj -= s * vi;
            }
        }
    }
    for c in 0..n {
        if rkk_sign[c] < 0.0 {
            for val in &mut q[c * n..(c + 1) * n] {
                *val = -*val;
            }
        }
    }
    q
}

/// Eigenvalues of a symmetric matrix (destroyed), ascending.
///
/// Householder tridiagonalization followed by implicit-shift QL on the
/// tridiagonal pair; no eigenvectors are accumulated.
pub fn symmetric_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    let (mut d, mut e) = tridiagonalize(a, n);
    ql_implicit(&mut d, &mut e, n);
    d.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
    d
}

fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    // Full-storage Householder reduction: at step k the reflector is built
    // from row k (equal to column k by symmetry, and contiguous), and the
    // trailing block gets the symmetric rank-2 update A -= v w^T + w v^T.
    // Every inner loop runs over a contiguous row segment.
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 0 {
        return (d, e);
    }
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let row = &a[k * n + k + 1..(k + 1) * n];
        let mut scale = 0.0f64;
        for &x in row {
            scale = scale.max(x.abs());
        }
        if scale == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let mut norm_sq = 0.0;
        for (vi, &x) in v[..m].iter_mut().zip(row) {
            *vi = x / scale;
            norm_sq += *vi * *vi;
        }
        let norm = norm_sq.sqrt();
        // v = x + sign(x_1) ||x|| e_1 avoids cancellation; H x = -beta e_1
        let alpha = v[0];
        let beta = if alpha >= 0.0 { norm } else { -norm };
        e[k] = -beta * scale;
        v[0] = alpha + beta;
        // ||v||^2 = 2 beta (alpha + beta), both factors share beta's sign
        let tau = 1.0 / (beta * v[0]);
        // w = tau A22 v - (tau^2/2) (v^T A22 v) v
        for i in 0..m {
            let arow = &a[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            let mut acc = 0.0;
            for (aij, vj) in arow.iter().zip(&v[..m]) {
                acc += aij * vj;
            }
            w[i] = tau * acc;
        }
        let mut pv = 0.0;
        for i in 0..m {
            pv += w[i] * v[i];
        }
        let c = 0.5 * tau * pv;
        for i in 0..m {
            w[i] -= c * v[i];
        }
        for i in 0..m {
            let (vi, wi) = (v[i], w[i]);
            let arow = &mut a[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            for ((aij, &vj), &wj) in arow.iter_mut().zip(&v[..m]).zip(&w[..m]) {
                *aij -= vi * wj + wi * vj;
            }
        }
    }
    if n >= 2 {
        e[n - 2] = a[(n - 2) * n + n - 1];
    }
    for i in 0..n {
        d[i] = a[i * n + i];
    }
    e[n - 1] = 0.0;
    (d, e)
}

fn ql_implicit(d: &mut [f64], e: &mut [f64], n: usize) {
    // absolute deflation floor: matrices with a cluster of eigenvalues near
    // zero (tiny d's flanking a rounding-level e) never satisfy a purely
    // relative test, so couplings below eps * ||T|| split unconditionally
    let anorm = d
        .iter()
        .zip(e.iter())
        .map(|(x, y)| x.abs() + y.abs())
        .fold(0.0f64, f64::max);
    let floor = f64::EPSILON * anorm;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd + floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 50, "QL iteration budget exceeded");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    // recover gracefully from an exact-zero rotation
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if !underflow {
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
    }
}

fn hypot(a: f64, b: f64) -> f64 {
    libm::hypot(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> (Vec<f64>, usize) {
        let n = rows.len();
        let mut m = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n);
            m.extend_from_slice(r);
        }
        (m, n)
    }

    #[test]
    fn eigenvalues_3x3_known() {
        // eigenvalues of [[2,1,0],[1,2,1],[0,1,2]] are 2 and 2 -+ sqrt(2)
        let (mut a, n) = mat(&[&[2.0, 1.0, 0.0], &[1.0, 2.0, 1.0], &[0.0, 1.0, 2.0]]);
        let ev = symmetric_eigenvalues(&mut a, n);
        let s2 = core::f64::consts::SQRT_2;
        let want = [2.0 - s2, 2.0, 2.0 + s2];
        for (g, w) in ev.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn eigenvalues_diagonal() {
        let (mut a, n) = mat(&[
            &[3.0, 0.0, 0.0, 0.0],
            &[0.0, -1.0, 0.0, 0.0],
            &[0.0, 0.0, 7.0, 0.0],
            &[0.0, 0.0, 0.0, 0.5],
        ]);
        let ev = symmetric_eigenvalues(&mut a, n);
        assert_eq!(ev, alloc::vec![-1.0, 0.5, 3.0, 7.0]);
    }

    #[test]
    fn eigenvalue_sum_and_product_match_trace_det() {
        // symmetric matrix with known trace; determinant via 2x2 blocks
        let (mut a, n) = mat(&[
            &[4.0, 1.0, -2.0],
            &[1.0, 3.0, 0.5],
            &[-2.0, 0.5, 1.0],
        ]);
        let det = 4.0 * (3.0 * 1.0 - 0.25) - 1.0 * (1.0 + 1.0) + (-2.0) * (0.5 + 6.0);
        let ev = symmetric_eigenvalues(&mut a, n);
        let trace: f64 = ev.iter().sum();
        let prod: f64 = ev.iter().product();
        assert!((trace - 8.0).abs() < 1e-12);
        assert!((prod - det).abs() < 1e-10, "prod={prod} det={det}");
    }

    #[test]
    fn haar_q_is_orthogonal() {
        // fixed pseudo-random entries; orthogonality is what matters here
        let n = 12;
        let mut a: Vec<f64> = (0..n * n)
            .map(|i| ((i as f64 * 12.9898).sin() * 43758.5453).fract() - 0.5)
            .collect();
        let q = haar_q_from_gaussian(&mut a, n);
        let mut qtq = vec![0.0; n * n];
        // Q^T Q via gemm on the transpose: (Q^T Q)_{ij} = col_i . col_j
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += q[k * n + i] * q[k * n + j];
                }
                qtq[i * n + j] = acc;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[i * n + j] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn conjugated_diagonal_preserves_spectrum() {
        let n = 10;
        let mut g: Vec<f64> = (0..n * n)
            .map(|i| ((i as f64 * 7.131).cos() * 991.7).fract())
            .collect();
        let q = haar_q_from_gaussian(&mut g, n);
        let d: Vec<f64> = (0..n).map(|i| i as f64 - 4.5).collect();
        let mut s = vec![0.0; n * n];
        add_conjugated_diagonal(&mut s, &q, &d, n);
        let ev = symmetric_eigenvalues(&mut s.clone(), n);
        let mut want = d.clone();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, w) in ev.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10, "{ev:?}");
        }
    }

    #[test]
    fn multiple_zero_eigenvalues_deflate() {
        // sum of two conjugated +-1 reflections with unbalanced signatures:
        // rank counting forces eigenvalue 0 with multiplicity >= 10, which
        // once exercised a purely relative deflation test forever (tiny
        // diagonal neighbors, rounding-level coupling)
        let n = 40;
        let mut g: Vec<f64> = (0..n * n)
            .map(|i| ((i as f64 * 3.917).sin() * 517.3).fract())
            .collect();
        let q = haar_q_from_gaussian(&mut g, n);
        let sig = |k: usize, plus: usize| if k < plus { 1.0 } else { -1.0 };
        // +1-space of the first (dim 25) must meet the -1-space of the
        // second (dim 25) in dimension >= 10, pinning eigenvalue 0 there
        let d1: Vec<f64> = (0..n).map(|k| sig(k, 25)).collect();
        let d2: Vec<f64> = (0..n).map(|k| sig(k, 15)).collect();
        let mut s = vec![0.0; n * n];
        for k in 0..n {
            s[k * n + k] = d1[k];
        }
        add_conjugated_diagonal(&mut s, &q, &d2, n);
        let ev = symmetric_eigenvalues(&mut s, n);
        let zeros = ev.iter().filter(|v| v.abs() < 1e-10).count();
        assert!(zeros >= 10, "zeros={zeros} ev={ev:?}");
        assert!(ev.iter().all(|v| v.abs() <= 2.0 + 1e-10));
    }

    #[test]
    fn gemm_nt_small() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [0.5, -1.0, 2.0, 0.0];
        let mut c = [0.0; 4];
        gemm_nt(&a, &b, 2, &mut c);
        // C = A * B^T
        assert_eq!(c, [-1.5, 2.0, -2.5, 6.0]);
    }
}
