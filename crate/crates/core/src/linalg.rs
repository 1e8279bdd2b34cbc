//! Thin numerical helpers: a deterministic, sign-normalized thin SVD and a
//! few weighted-centering utilities shared by the ordination, selection and
//! diagnostics modules. The SVD itself is delegated to `faer`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative threshold below which singular values are treated as zero.
pub const RANK_TOL: f64 = 1e-12;

/// Thin singular value decomposition `m = u * diag(s) * vᵀ`, truncated to the
/// numerical rank.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

/// Computes the thin SVD of `m` with singular values sorted nonincreasing,
/// components whose singular value is below `RANK_TOL * s_max` dropped, and
/// each right singular vector oriented so that its largest-magnitude entry is
/// positive.
pub fn svd(m: &DMatrix<f64>) -> Svd {
    let (nr, nc) = m.shape();
    if nr == 0 || nc == 0 {
        return Svd {
            u: DMatrix::zeros(nr, 0),
            s: DVector::zeros(0),
            v: DMatrix::zeros(nc, 0),
        };
    }
    let (u, sv, v) = thin_svd(m);

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let smax = order.first().map(|&i| sv[i]).unwrap_or(0.0);
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| smax > 0.0 && sv[i] > RANK_TOL * smax)
        .collect();

    let k = keep.len();
    let mut uu = DMatrix::zeros(nr, k);
    let mut vv = DMatrix::zeros(nc, k);
    let mut ss = DVector::zeros(k);
    for (dst, &src) in keep.iter().enumerate() {
        ss[dst] = sv[src];
        let mut vcol: Vec<f64> = (0..nc).map(|j| v[(j, src)]).collect();
        let mut ucol: Vec<f64> = (0..nr).map(|i| u[(i, src)]).collect();
        let mut pivot = 0;
        for j in 1..nc {
            if vcol[j].abs() > vcol[pivot].abs() + 1e-14 {
                pivot = j;
            }
        }
        if vcol[pivot] < 0.0 {
            vcol.iter_mut().for_each(|x| *x = -*x);
            ucol.iter_mut().for_each(|x| *x = -*x);
        }
        for j in 0..nc {
            vv[(j, dst)] = vcol[j];
        }
        for i in 0..nr {
            uu[(i, dst)] = ucol[i];
        }
    }
    Svd { u: uu, s: ss, v: vv }
}

/// Sum of singular values.
pub fn nuclear_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    thin_svd(m).1.iter().sum()
}

/// Unsorted thin SVD `(u, s, v)` from `faer`.
fn thin_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (nr, nc) = m.shape();
    let fm = faer::Mat::<f64>::from_fn(nr, nc, |i, j| m[(i, j)]);
    let dec = fm.thin_svd().expect("SVD of a finite matrix converges");
    let k = nr.min(nc);
    let (fu, fs, fv) = (dec.U(), dec.S(), dec.V());
    let u = DMatrix::from_fn(nr, k, |i, j| fu[(i, j)]);
    let v = DMatrix::from_fn(nc, k, |i, j| fv[(i, j)]);
    let s = (0..k).map(|i| fs[i]).collect();
    (u, s, v)
}

/// Subtracts the weighted column means (weights `row_masses`, summing to 1).
pub fn center_columns(m: &DMatrix<f64>, row_masses: &[f64]) -> (DMatrix<f64>, Vec<f64>) {
    let (nr, nc) = m.shape();
    let means: Vec<f64> = (0..nc)
        .map(|j| (0..nr).map(|i| row_masses[i] * m[(i, j)]).sum())
        .collect();
    let centered = DMatrix::from_fn(nr, nc, |i, j| m[(i, j)] - means[j]);
    (centered, means)
}

/// Unweighted column centering.
pub fn center_columns_uniform(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 {
        return m.clone();
    }
    let masses = vec![1.0 / n as f64; n];
    center_columns(m, &masses).0
}

/// Moore-Penrose pseudo-inverse of a symmetric positive semidefinite matrix,
/// discarding eigenvalues at or below `rel_tol` times the largest one.
/// Returns the inverse together with the retained rank.
pub fn psd_pinv(g: &DMatrix<f64>, rel_tol: f64) -> (DMatrix<f64>, usize) {
    let n = g.nrows();
    if n == 0 {
        return (DMatrix::zeros(0, 0), 0);
    }
    let eig = SymmetricEigen::new(g.clone());
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let mut out = DMatrix::zeros(n, n);
    let mut rank = 0;
    if lmax <= 0.0 {
        return (out, 0);
    }
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > rel_tol * lmax {
            rank += 1;
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / l;
        }
    }
    (out, rank)
}

/// Population covariance matrix (divisor `n`) of the columns of `m`.
pub fn covariance(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows() as f64;
    let c = center_columns_uniform(m);
    (c.transpose() * &c) / n
}
