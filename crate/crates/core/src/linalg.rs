//! Dense complex linear algebra on top of nalgebra's Schur decomposition.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

/// Right eigenvectors of a general complex matrix, normalised so that
/// Σ_n v_n² = 1 (bilinear, not sesquilinear).
pub(crate) struct Eigen {
    pub values: Vec<C64>,
    pub vectors: DMatrix<C64>,
    /// Groups of indices whose eigenvalues are closer than the cluster gap.
    pub clusters: Vec<Vec<usize>>,
    /// Some vector had a vanishing bilinear norm (exceptional point).
    pub self_orthogonal: bool,
}

pub(crate) const CLUSTER_GAP: f64 = 1e-10;

fn schur(m: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    nalgebra::linalg::Schur::new(m.clone()).unpack()
}

/// Above this size the eigenproblem is handed to faer's blocked solver;
/// below it the Schur route keeps exactly degenerate blocks well separated.
const LARGE: usize = 160;

/// Full eigen-decomposition (bilinearly normalised right eigenvectors).
pub(crate) fn eigen(m: &DMatrix<C64>) -> Eigen {
    let (values, vectors, tol) = if let Some((q, t)) = triangular_schur(m) {
        schur_vectors(&q, &t)
    } else if m.nrows() > LARGE {
        raw_eigen_blocked(m)
    } else {
        raw_eigen_schur(m)
    };
    finish(values, vectors, tol)
}

/// A triangular matrix is its own Schur form (lower ones after reversing
/// the basis), so its eigenvalues are the diagonal entries exactly. A
/// general solver would smear defective blocks, e.g. fully directional
/// chains, by ~ε^{1/N}.
fn triangular_schur(m: &DMatrix<C64>) -> Option<(DMatrix<C64>, DMatrix<C64>)> {
    let n = m.nrows();
    let zero = C64::new(0.0, 0.0);
    let upper = (0..n).all(|i| (0..i).all(|j| m[(i, j)] == zero));
    if upper {
        return Some((DMatrix::identity(n, n), m.clone()));
    }
    let lower = (0..n).all(|i| (i + 1..n).all(|j| m[(i, j)] == zero));
    if lower {
        let reverse = DMatrix::from_fn(n, n, |i, j| if i + j + 1 == n { C64::new(1.0, 0.0) } else { zero });
        let t = DMatrix::from_fn(n, n, |i, j| m[(n - 1 - i, n - 1 - j)]);
        return Some((reverse, t));
    }
    None
}

fn raw_eigen_blocked(m: &DMatrix<C64>) -> (Vec<C64>, DMatrix<C64>, f64) {
    let n = m.nrows();
    let fm = faer::Mat::<C64>::from_fn(n, n, |i, j| m[(i, j)]);
    match fm.eigen() {
        Ok(evd) => {
            let s = evd.S().column_vector();
            let u = evd.U();
            let values: Vec<C64> = (0..n).map(|i| s[i]).collect();
            let vectors = DMatrix::from_fn(n, n, |i, j| u[(i, j)]);
            let scale = values.iter().map(|v| v.norm()).fold(1.0, f64::max);
            (values, vectors, CLUSTER_GAP * scale)
        }
        Err(_) => raw_eigen_schur(m),
    }
}

/// Schur form and triangular back-substitution.
fn raw_eigen_schur(m: &DMatrix<C64>) -> (Vec<C64>, DMatrix<C64>, f64) {
    let (q, t) = schur(m);
    schur_vectors(&q, &t)
}

/// Eigenpairs from a Schur factorisation m = Q T Q*.
fn schur_vectors(q: &DMatrix<C64>, t: &DMatrix<C64>) -> (Vec<C64>, DMatrix<C64>, f64) {
    let n = t.nrows();
    let scale = (0..n).map(|i| t[(i, i)].norm()).fold(1.0, f64::max);
    let tol = CLUSTER_GAP * scale;
    let smin = f64::EPSILON * scale;

    let mut vectors = DMatrix::<C64>::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let lam = t[(k, k)];
        let mut y = DVector::<C64>::zeros(n);
        y[k] = C64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for l in j + 1..=k {
                s += t[(j, l)] * y[l];
            }
            let mut d = t[(j, j)] - lam;
            if d.norm() < tol {
                // Inside a degenerate cluster the block is λI up to rounding.
                continue;
            }
            if d.norm() < smin {
                d = C64::new(smin, 0.0);
            }
            y[j] = -s / d;
        }
        vectors.set_column(k, &(q * y));
        values.push(lam);
    }
    (values, vectors, tol)
}

fn finish(values: Vec<C64>, mut vectors: DMatrix<C64>, tol: f64) -> Eigen {
    let clusters = cluster(&values, tol);
    let mut self_orthogonal = false;
    // Bilinear Gram–Schmidt inside each cluster, then bilinear normalisation.
    for group in &clusters {
        for (a, &k) in group.iter().enumerate() {
            let mut v = vectors.column(k).into_owned();
            for &j in &group[..a] {
                let u = vectors.column(j);
                let proj = u.iter().zip(v.iter()).map(|(x, y)| x * y).sum::<C64>();
                v -= u * proj;
            }
            if !normalise_bilinear(&mut v) {
                self_orthogonal = true;
            }
            vectors.set_column(k, &v);
        }
    }
    Eigen { values, vectors, clusters, self_orthogonal }
}

/// Scale v so that vᵀv = 1; returns false if vᵀv vanishes.
pub(crate) fn normalise_bilinear(v: &mut DVector<C64>) -> bool {
    let s: C64 = v.iter().map(|x| x * x).sum();
    let h = v.norm_squared();
    if h == 0.0 {
        return false;
    }
    if s.norm() < 1e-12 * h {
        *v /= C64::new(h.sqrt(), 0.0);
        return false;
    }
    let r = s.sqrt();
    *v /= r;
    // Fix the overall sign so the largest component has positive real part.
    let (imax, _) = v.iter().enumerate().fold((0, 0.0), |acc, (i, x)| {
        if x.norm() > acc.1 { (i, x.norm()) } else { acc }
    });
    if v[imax].re < 0.0 {
        *v = -v.clone();
    }
    true
}

/// Group indices whose values are closer than `tol` (transitively).
pub(crate) fn cluster(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut i = i;
        while p[i] != r {
            let next = p[i];
            p[i] = r;
            i = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() < tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_of[r] == usize::MAX {
            root_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_of[r]].push(i);
    }
    groups
}

/// Inverse of (ω − H); errors when the LU factorisation is singular.
pub(crate) fn resolvent(h: &DMatrix<C64>, omega: C64) -> Result<DMatrix<C64>> {
    let n = h.nrows();
    let a = DMatrix::<C64>::identity(n, n) * omega - h;
    let lu = a.lu();
    let u = lu.u();
    let scale = h.iter().map(|x| x.norm()).fold(omega.norm(), f64::max).max(1.0);
    let (imin, dmin) = (0..n)
        .map(|i| (i, u[(i, i)].norm()))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    if dmin < 1e-13 * scale {
        return Err(Error::Singular { omega, pole: omega - u[(imin, imin)] });
    }
    lu.try_inverse().ok_or(Error::Singular { omega, pole: omega })
}

/// Pair resolvent diagonal block Σ_mn = i [(H⊗1 + 1⊗H − 2ε)⁻¹]_{(mm),(nn)},
/// solved as N Sylvester equations in Schur form.
pub(crate) fn pair_sigma(h: &DMatrix<C64>, eps: C64) -> Result<DMatrix<C64>> {
    let n = h.nrows();
    let (q, t) = schur(h);
    let scale = (0..n).map(|i| t[(i, i)].norm()).fold(eps.norm(), f64::max).max(1.0);
    for i in 0..n {
        for j in 0..n {
            let d = t[(i, i)] + t[(j, j)] - eps * 2.0;
            if d.norm() < 1e-13 * scale {
                return Err(Error::Singular { omega: eps * 2.0, pole: t[(i, i)] + t[(j, j)] });
            }
        }
    }
    let mut sigma = DMatrix::<C64>::zeros(n, n);
    for col in 0..n {
        // Right-hand side Q* E_cc conj(Q) = u uᵀ with u_i = conj(Q_ci).
        let u: Vec<C64> = (0..n).map(|i| q[(col, i)].conj()).collect();
        let mut y = DMatrix::<C64>::zeros(n, n);
        for j in (0..n).rev() {
            let mut rhs: Vec<C64> = (0..n).map(|i| u[i] * u[j]).collect();
            for k in j + 1..n {
                let tjk = t[(j, k)];
                if tjk != C64::new(0.0, 0.0) {
                    for i in 0..n {
                        rhs[i] -= y[(i, k)] * tjk;
                    }
                }
            }
            let shift = t[(j, j)] - eps * 2.0;
            // Back-substitute (T + shift) y_j = rhs.
            for i in (0..n).rev() {
                let mut s = rhs[i];
                for l in i + 1..n {
                    s -= t[(i, l)] * y[(l, j)];
                }
                y[(i, j)] = s / (t[(i, i)] + shift);
            }
        }
        // X = Q Y Qᵀ; only the diagonal is needed.
        let qy = &q * &y;
        for m in 0..n {
            let mut x = C64::new(0.0, 0.0);
            for j in 0..n {
                x += qy[(m, j)] * q[(m, j)];
            }
            sigma[(m, col)] = crate::I * x;
        }
    }
    Ok(sigma)
}

/// Inverse with an explicit singularity error.
pub(crate) fn inverse(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    m.clone().try_inverse().ok_or(Error::Singular { omega: C64::new(0.0, 0.0), pole: C64::new(0.0, 0.0) })
}
