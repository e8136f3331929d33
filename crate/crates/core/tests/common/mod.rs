#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tenfill_core::{qr_thin, Mask, Mat, Observation, Tensor};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_tensor(rng: &mut ChaCha8Rng, dims: &[usize]) -> Tensor {
    Tensor::from_fn(dims, |_| rng.random_range(-1.0..1.0)).unwrap()
}

/// Tucker tensor `G ×₁ U₁ ×₂ U₂ ×₃ …` with a random core of the given ranks.
pub fn tucker(rng: &mut ChaCha8Rng, dims: &[usize], ranks: &[usize]) -> Tensor {
    let mut t = random_tensor(rng, ranks);
    for (k, (&d, &r)) in dims.iter().zip(ranks).enumerate() {
        let u = random_matrix(rng, d, r);
        t = t.mode_n_product(&u, k + 1).unwrap();
    }
    t
}

pub fn bernoulli_mask(rng: &mut ChaCha8Rng, dims: &[usize], rate: f64) -> Mask {
    let n: usize = dims.iter().product();
    Mask::new(
        dims.to_vec(),
        (0..n).map(|_| rng.random::<f64>() < rate).collect(),
    )
    .unwrap()
}

pub fn observe(gt: &Tensor, mask: Mask) -> Observation<f64> {
    Observation::sample(gt, mask).unwrap()
}

pub fn relative_error(x: &Tensor, gt: &Tensor) -> f64 {
    x.zip_map(gt, |a, b| a - b).unwrap().frobenius_norm() / gt.frobenius_norm()
}

/// Column-major entry `(i, j)` of a plain `Vec<Vec<f64>>` of columns.
fn col_major(a: &Mat) -> Vec<Vec<f64>> {
    (0..a.cols()).map(|j| a.col(j).to_vec()).collect()
}

/// One-sided Jacobi SVD: returns `(σ, U, V)` with `a = U·diag(σ)·Vᵀ`,
/// singular values unsorted. Only for small test matrices with `rows ≥ cols`.
pub fn jacobi_svd(a: &Mat) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = a.cols();
    let mut w = col_major(a);
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let dotv = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dotv(&w[p], &w[p]);
                let beta = dotv(&w[q], &w[q]);
                let gamma = dotv(&w[p], &w[q]);
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for cols in [&mut w, &mut v] {
                    let (wp, wq) = (cols[p].clone(), cols[q].clone());
                    for i in 0..wp.len() {
                        cols[p][i] = c * wp[i] - s * wq[i];
                        cols[q][i] = s * wp[i] + c * wq[i];
                    }
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let sigma: Vec<f64> = w.iter().map(|c| dotv(c, c).sqrt()).collect();
    let u = w
        .iter()
        .zip(&sigma)
        .map(|(c, &s)| {
            c.iter()
                .map(|x| if s > 0.0 { x / s } else { 0.0 })
                .collect()
        })
        .collect();
    (sigma, u, v)
}

/// Naive mode-`n` unfolding: entry `(i_n, j)` with
/// `j = Σ_{k≠n} (i_k − 1)·Π_{m<k, m≠n} I_m`, enumerated by nested loops
/// over every multi-index.
pub fn unfold_by_definition(t: &Tensor, mode: usize) -> Vec<Vec<f64>> {
    let dims = t.dims();
    let rows = dims[mode - 1];
    let cols = t.len() / rows;
    let mut out = vec![vec![f64::NAN; cols]; rows];
    let mut index = vec![1usize; dims.len()];
    loop {
        let mut j = 0;
        let mut stride = 1;
        for k in 0..dims.len() {
            if k + 1 == mode {
                continue;
            }
            j += (index[k] - 1) * stride;
            stride *= dims[k];
        }
        out[index[mode - 1] - 1][j] = t.get(&index).unwrap();
        // odometer, first index fastest
        let mut k = 0;
        loop {
            if k == dims.len() {
                return out;
            }
            index[k] += 1;
            if index[k] <= dims[k] {
                break;
            }
            index[k] = 1;
            k += 1;
        }
    }
}

/// Prox objective `τ‖L‖_{2,1} + ½‖L − C‖²_F`.
pub fn prox_objective(l: &[f64], c: &Mat, tau: f64) -> f64 {
    let m = c.rows();
    let mut f = 0.0;
    for j in 0..c.cols() {
        let col = &l[j * m..(j + 1) * m];
        f += tau * col.iter().map(|v| v * v).sum::<f64>().sqrt();
        f += 0.5
            * col
                .iter()
                .zip(c.col(j))
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>();
    }
    f
}

/// Damped Newton on the smoothed objective `τ Σ sqrt(‖l_j‖² + δ²) + ½‖L − C‖²`,
/// treating all entries as one vector with a dense Hessian; `δ` is driven
/// from `1e−2` down to `1e−12` with warm starts.
pub fn numerical_prox(c: &Mat, tau: f64) -> Vec<f64> {
    let (m, n) = c.shape();
    let dim = m * n;
    let mut l = c.as_slice().to_vec();
    for e in 2..=12 {
        let delta = 10f64.powi(-e);
        let smooth = |l: &[f64]| {
            let mut f = 0.0;
            for j in 0..n {
                let col = &l[j * m..(j + 1) * m];
                f += tau * (col.iter().map(|v| v * v).sum::<f64>() + delta * delta).sqrt();
                f += 0.5
                    * col
                        .iter()
                        .zip(c.col(j))
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>();
            }
            f
        };
        for _ in 0..200 {
            let mut g = vec![0.0; dim];
            let mut h = vec![0.0; dim * dim];
            for j in 0..n {
                let col = &l[j * m..(j + 1) * m];
                let s = (col.iter().map(|v| v * v).sum::<f64>() + delta * delta).sqrt();
                for a in 0..m {
                    let ia = j * m + a;
                    g[ia] = tau * col[a] / s + (col[a] - c.col(j)[a]);
                    for b in 0..m {
                        let eye = if a == b { 1.0 } else { 0.0 };
                        h[ia * dim + j * m + b] =
                            tau * (eye / s - col[a] * col[b] / s.powi(3)) + eye;
                    }
                }
            }
            if g.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-14 {
                break;
            }
            let step = solve_dense(h, g.clone(), dim);
            let f0 = smooth(&l);
            let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
            let mut t = 1.0;
            let next = loop {
                let trial: Vec<f64> = l.iter().zip(&step).map(|(x, d)| x - t * d).collect();
                if smooth(&trial) <= f0 - 1e-4 * t * slope || t < 1e-12 {
                    break trial;
                }
                t *= 0.5;
            };
            l = next;
        }
    }
    l
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Vec<f64> {
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| a[x * n + k].abs().total_cmp(&a[y * n + k].abs()))
            .unwrap();
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            b.swap(k, p);
        }
        for r in k + 1..n {
            let f = a[r * n + k] / a[k * n + k];
            for c in k..n {
                a[r * n + c] -= f * a[k * n + c];
            }
            b[r] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|c| a[k * n + c] * x[c]).sum();
        x[k] = (b[k] - s) / a[k * n + k];
    }
    x
}

/// `Σ max(σ_k − μ, 0)·u_k v_kᵀ` from the Jacobi SVD.
pub fn svt_by_definition(y: &Mat, mu: f64) -> Mat {
    let (sigma, u, v) = jacobi_svd(y);
    Mat::from_fn(y.rows(), y.cols(), |i, j| {
        sigma
            .iter()
            .enumerate()
            .map(|(k, &s)| (s - mu).max(0.0) * u[k][i] * v[k][j])
            .sum()
    })
}

/// `U·diag(σ)·Vᵀ` with orthonormal `U`, `V` from QR of random matrices.
pub fn with_singular_values(r: &mut ChaCha8Rng, m: usize, n: usize, sigma: &[f64]) -> Mat {
    let k = sigma.len();
    let (u, _) = qr_thin(&random_matrix(r, m, k), k).unwrap();
    let (v, _) = qr_thin(&random_matrix(r, n, k), k).unwrap();
    u.matmul(&Mat::from_diagonal(sigma))
        .unwrap()
        .matmul_t(&v)
        .unwrap()
}
