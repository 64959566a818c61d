use std::fmt::Write as _;
use std::io;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::operator::{weighted_dot, weighted_norm, Adjointness, DiscreteOperator};
use crate::error::QuantizeError;

/// Default relative residual tolerance.
pub const DEFAULT_SPECTRUM_TOLERANCE: f64 = 1e-8;
/// Default iteration cap of the subspace iteration.
pub const DEFAULT_MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub k: usize,
    /// Bound on `‖Hv - λv‖_w / (|λ| + 1)` for every returned pair.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
    /// Subspace dimension; defaults to `max(2k, k + 8)`.
    pub block_size: Option<usize>,
    pub eigenvectors: bool,
}

impl SpectrumOptions {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            tolerance: DEFAULT_SPECTRUM_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seed: 1,
            block_size: None,
            eigenvectors: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Lowest eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Relative residual of each pair.
    pub residuals: Vec<f64>,
    /// W-orthonormal eigenvectors, when requested.
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub iterations: usize,
    pub max_residual: f64,
    /// Shift of the factorized pencil.
    pub shift: f64,
}

impl SpectrumResult {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `index,eigenvalue,residual` table.
    pub fn table(&self) -> String {
        let mut out = String::from("index,eigenvalue,residual\n");
        for (i, (l, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            let _ = writeln!(out, "{i},{l:.15e},{r:.3e}");
        }
        out
    }

    pub fn write_table<W: io::Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(self.table().as_bytes())
    }
}

/// A group of eigenvalues closer than the clustering gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    pub mean: f64,
    pub multiplicity: usize,
}

/// Groups sorted eigenvalues whose successive differences are at most `gap`.
pub fn cluster_eigenvalues(values: &[f64], gap: f64) -> Vec<EigenCluster> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut clusters: Vec<(f64, usize, f64)> = Vec::new();
    for v in sorted {
        match clusters.last_mut() {
            Some((sum, count, last)) if v - *last <= gap => {
                *sum += v;
                *count += 1;
                *last = v;
            }
            _ => clusters.push((v, 1, v)),
        }
    }
    clusters
        .into_iter()
        .map(|(sum, count, _)| EigenCluster {
            mean: sum / count as f64,
            multiplicity: count,
        })
        .collect()
}

/// Cholesky factor of a symmetric positive definite band matrix, stored by
/// rows: entry `(i, j)`, `i - b ≤ j ≤ i`, lives at `i (b + 1) + j + b - i`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    b: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    /// Factors the band matrix given by its lower band in the same layout.
    pub fn factor(n: usize, b: usize, mut l: Vec<f64>) -> Result<Self, QuantizeError> {
        assert_eq!(l.len(), n * (b + 1));
        let w = b + 1;
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(b));
                let (head, row_i) = l.split_at_mut(i * w);
                let row_i = &mut row_i[..w];
                let ri = &row_i[k0 + b - i..j + b - i];
                let dot: f64 = if j < i {
                    let row_j = &head[j * w..(j + 1) * w];
                    ri.iter().zip(&row_j[k0 + b - j..b]).map(|(x, y)| x * y).sum()
                } else {
                    ri.iter().map(|x| x * x).sum()
                };
                let s = row_i[j + b - i] - dot;
                if j < i {
                    row_i[j + b - i] = s / head[j * w + b];
                } else {
                    if !(s > 0.0) {
                        return Err(QuantizeError::NotPositiveDefinite { row: i, pivot: s });
                    }
                    row_i[b] = s.sqrt();
                }
            }
        }
        Ok(Self { n, b, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.b
    }

    /// Solves `L Lᵀ x = r` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, b, w) = (self.n, self.b, self.b + 1);
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            let row = &self.l[i * w..(i + 1) * w];
            let dot: f64 = row[j0 + b - i..b].iter().zip(&x[j0..i]).map(|(a, c)| a * c).sum();
            x[i] = (x[i] - dot) / row[b];
        }
        for i in (0..n).rev() {
            let j0 = i.saturating_sub(b);
            let row = &self.l[i * w..(i + 1) * w];
            x[i] /= row[b];
            let xi = x[i];
            for (xj, a) in x[j0..i].iter_mut().zip(&row[j0 + b - i..b]) {
                *xj -= a * xi;
            }
        }
    }

    /// Solves for `m` right-hand sides stored row-major, `x[i m + r]`.
    pub fn solve_block_in_place(&self, x: &mut [f64], m: usize) {
        let (n, b, w) = (self.n, self.b, self.b + 1);
        assert_eq!(x.len(), n * m);
        let mut acc = vec![0.0; m];
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            let row = &self.l[i * w..(i + 1) * w];
            acc.iter_mut().for_each(|a| *a = 0.0);
            for j in j0..i {
                let l = row[j + b - i];
                for (a, xj) in acc.iter_mut().zip(&x[j * m..(j + 1) * m]) {
                    *a += l * xj;
                }
            }
            let d = row[b];
            for (xi, a) in x[i * m..(i + 1) * m].iter_mut().zip(&acc) {
                *xi = (*xi - a) / d;
            }
        }
        for i in (0..n).rev() {
            let j0 = i.saturating_sub(b);
            let row = &self.l[i * w..(i + 1) * w];
            let d = row[b];
            let (head, tail) = x.split_at_mut(i * m);
            let xi = &mut tail[..m];
            xi.iter_mut().for_each(|v| *v /= d);
            for j in j0..i {
                let l = row[j + b - i];
                for (xj, v) in head[j * m..(j + 1) * m].iter_mut().zip(xi.iter()) {
                    *xj -= l * v;
                }
            }
        }
    }
}

/// Factor of `W H - σ W` in a bandwidth-reducing node order.
struct ShiftedFactor {
    perm: Vec<usize>,
    chol: BandCholesky,
}

impl ShiftedFactor {
    fn new(op: &DiscreteOperator, shift: f64) -> Result<Self, QuantizeError> {
        let n = op.dim();
        let perm: Vec<usize> = match op.ordering() {
            Some(p) => p.to_vec(),
            None => sprs::linalg::reverse_cuthill_mckee(op.matrix().view()).perm.vec(),
        };
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut b = 0;
        for (_, (r, c)) in op.matrix().iter() {
            b = b.max(inv[r].abs_diff(inv[c]));
        }
        let w = op.weights();
        let mut band = vec![0.0; n * (b + 1)];
        for (&val, (r, c)) in op.matrix().iter() {
            let (i, j) = (inv[r], inv[c]);
            if j <= i {
                // W H is symmetric; average both triangles against rounding.
                band[i * (b + 1) + j + b - i] += 0.5 * w[r] * val;
            }
            if i <= j {
                band[j * (b + 1) + i + b - j] += 0.5 * w[r] * val;
            }
        }
        for (old, &wi) in w.iter().enumerate() {
            let i = inv[old];
            band[i * (b + 1) + b] -= shift * wi;
        }
        let chol = BandCholesky::factor(n, b, band)?;
        Ok(Self { perm, chol })
    }

    /// `X ← (W H - σ W)⁻¹ W X` for every column of `X`.
    fn apply_block(&self, w: &[f64], x: &mut DMatrix<f64>, scratch: &mut Vec<f64>) {
        let m = x.ncols();
        scratch.resize(self.perm.len() * m, 0.0);
        for (new, &old) in self.perm.iter().enumerate() {
            for r in 0..m {
                scratch[new * m + r] = w[old] * x[(old, r)];
            }
        }
        self.chol.solve_block_in_place(scratch, m);
        for (new, &old) in self.perm.iter().enumerate() {
            for r in 0..m {
                x[(old, r)] = scratch[new * m + r];
            }
        }
    }
}

/// Gershgorin lower bound of the operator's spectrum.
fn gershgorin_lower_bound(op: &DiscreteOperator) -> (f64, f64) {
    let m = op.matrix();
    let mut lower = f64::INFINITY;
    let mut inf_norm: f64 = 0.0;
    for (row, vec) in m.outer_iterator().enumerate() {
        let mut diag = 0.0;
        let mut off = 0.0;
        for (col, &val) in vec.iter() {
            if col == row {
                diag += val;
            } else {
                off += val.abs();
            }
        }
        lower = lower.min(diag - off);
        inf_norm = inf_norm.max(diag.abs() + off);
    }
    (lower, inf_norm)
}

/// W-orthonormalizes the columns by modified Gram-Schmidt applied twice;
/// collapsed columns are replaced by fresh random vectors.
fn w_orthonormalize(q: &mut DMatrix<f64>, w: &[f64], rng: &mut ChaCha8Rng) {
    let m = q.ncols();
    for j in 0..m {
        for _attempt in 0..4 {
            let before = weighted_norm(w, q.column(j).as_slice());
            for _pass in 0..2 {
                for i in 0..j {
                    let (qi, mut qj) = q.columns_range_pair_mut(i, j);
                    let c = weighted_dot(w, qi.as_slice(), qj.as_slice());
                    qj.axpy(-c, &qi, 1.0);
                }
            }
            let after = weighted_norm(w, q.column(j).as_slice());
            if after > 1e-10 * before && after > 0.0 {
                q.column_mut(j).scale_mut(1.0 / after);
                break;
            }
            for v in q.column_mut(j).iter_mut() {
                *v = StandardNormal.sample(rng);
            }
        }
    }
}

/// Lowest `k` eigenpairs with the default options.
pub fn spectrum(op: &DiscreteOperator, k: usize, tolerance: f64) -> Result<SpectrumResult, QuantizeError> {
    spectrum_with(
        op,
        &SpectrumOptions {
            tolerance,
            ..SpectrumOptions::new(k)
        },
    )
}

/// Lowest eigenpairs of a W-self-adjoint operator by block inverse
/// subspace iteration with a shifted band Cholesky factor and Rayleigh-Ritz
/// projection.
pub fn spectrum_with(op: &DiscreteOperator, options: &SpectrumOptions) -> Result<SpectrumResult, QuantizeError> {
    let n = op.dim();
    let k = options.k;
    if op.adjointness() != Adjointness::SelfAdjoint {
        return Err(QuantizeError::InvalidRequest(format!(
            "operator `{}` is not self-adjoint",
            op.name()
        )));
    }
    if k == 0 || 4 * k > n {
        return Err(QuantizeError::InvalidRequest(format!(
            "k = {k} must satisfy 1 <= k <= dimension/4 = {}",
            n / 4
        )));
    }
    if !(options.tolerance > 0.0) {
        return Err(QuantizeError::InvalidRequest(format!(
            "tolerance {} must be positive",
            options.tolerance
        )));
    }
    let m = options.block_size.unwrap_or((2 * k).max(k + 8)).clamp(k, n);

    let (lower, inf_norm) = gershgorin_lower_bound(op);
    let delta = (1e-9 * inf_norm).max(1e-12);
    let shift = lower - delta;
    let factor = ShiftedFactor::new(op, shift)?;
    let w = op.weights();

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut q = DMatrix::from_fn(n, m, |_, _| StandardNormal.sample(&mut rng));
    let mut scratch = Vec::new();
    let mut hq = DMatrix::zeros(n, m);
    let mut max_residual = f64::INFINITY;

    for iteration in 1..=options.max_iterations {
        factor.apply_block(w, &mut q, &mut scratch);
        w_orthonormalize(&mut q, w, &mut rng);
        for j in 0..m {
            op.apply_into(q.column(j).as_slice(), hq.column_mut(j).as_mut_slice());
        }
        let mut whq = hq.clone();
        for mut col in whq.column_iter_mut() {
            for (v, wi) in col.iter_mut().zip(w) {
                *v *= wi;
            }
        }
        let t = q.transpose() * &whq;
        let t = (&t + t.transpose()) * 0.5;
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let v = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
        q = &q * &v;
        hq = &hq * &v;

        let residuals: Vec<f64> = (0..k)
            .map(|j| {
                let r: Vec<f64> = hq
                    .column(j)
                    .iter()
                    .zip(q.column(j).iter())
                    .map(|(h, x)| h - theta[j] * x)
                    .collect();
                weighted_norm(w, &r) / (theta[j].abs() + 1.0)
            })
            .collect();
        max_residual = residuals.iter().copied().fold(0.0, f64::max);
        if residuals.iter().any(|r| r.is_nan()) {
            max_residual = f64::NAN;
            break;
        }
        if max_residual <= options.tolerance {
            let eigenvectors = options
                .eigenvectors
                .then(|| (0..k).map(|j| q.column(j).iter().copied().collect()).collect());
            return Ok(SpectrumResult {
                eigenvalues: theta[..k].to_vec(),
                residuals,
                eigenvectors,
                iterations: iteration,
                max_residual,
                shift,
            });
        }
    }
    Err(QuantizeError::NoConvergence {
        iterations: options.max_iterations,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sprs::TriMat;

    fn dense_band(n: usize, b: usize) -> (Vec<f64>, DMatrix<f64>) {
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(b)..=i {
                let v = if i == j { 4.0 + i as f64 * 0.01 } else { -1.0 / (1 + i - j) as f64 };
                dense[(i, j)] = v;
                dense[(j, i)] = v;
            }
        }
        let mut band = vec![0.0; n * (b + 1)];
        for i in 0..n {
            for j in i.saturating_sub(b)..=i {
                band[i * (b + 1) + j + b - i] = dense[(i, j)];
            }
        }
        (band, dense)
    }

    #[test]
    fn band_cholesky_solves_against_dense() {
        let (n, b) = (30, 3);
        let (band, dense) = dense_band(n, b);
        let chol = BandCholesky::factor(n, b, band).unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = rhs.clone();
        chol.solve_in_place(&mut x);
        let back = &dense * nalgebra::DVector::from_vec(x.clone());
        for (a, r) in back.iter().zip(&rhs) {
            assert!((a - r).abs() < 1e-12);
        }
        let mut block: Vec<f64> = rhs.iter().flat_map(|&r| [r, 2.0 * r]).collect();
        chol.solve_block_in_place(&mut block, 2);
        for (i, xi) in x.iter().enumerate() {
            assert!((block[2 * i] - xi).abs() < 1e-14);
            assert!((block[2 * i + 1] - 2.0 * xi).abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let (n, b) = (5, 1);
        let mut band = vec![0.0; n * (b + 1)];
        for i in 0..n {
            band[i * (b + 1) + b] = if i == 3 { -1.0 } else { 1.0 };
        }
        assert!(matches!(
            BandCholesky::factor(n, b, band),
            Err(QuantizeError::NotPositiveDefinite { row: 3, .. })
        ));
    }

    fn path_laplacian(n: usize) -> DiscreteOperator {
        // Periodic second difference with unit weights; eigenvalues 2 - 2cos(2πk/n).
        let mut tri = TriMat::new((n, n));
        for i in 0..n {
            tri.add_triplet(i, i, 2.0);
            tri.add_triplet(i, (i + 1) % n, -1.0);
            tri.add_triplet(i, (i + n - 1) % n, -1.0);
        }
        DiscreteOperator::new("ring", tri.to_csr(), vec![1.0; n].into(), Adjointness::SelfAdjoint)
    }

    #[test]
    fn ring_spectrum_without_ordering_hint() {
        let n = 64;
        let result = spectrum(&path_laplacian(n), 5, 1e-10).unwrap();
        let exact = |k: f64| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k / n as f64).cos();
        let expected = [0.0, exact(1.0), exact(1.0), exact(2.0), exact(2.0)];
        for (l, e) in result.eigenvalues.iter().zip(expected) {
            assert!((l - e).abs() < 1e-9, "{l} vs {e}");
        }
        let clusters = cluster_eigenvalues(&result.eigenvalues, 1e-7);
        let mult: Vec<usize> = clusters.iter().map(|c| c.multiplicity).collect();
        assert_eq!(mult, vec![1, 2, 2]);
    }

    #[test]
    fn requests_are_validated() {
        let op = path_laplacian(16);
        assert!(matches!(spectrum(&op, 5, 1e-8), Err(QuantizeError::InvalidRequest(_))));
        assert!(matches!(spectrum(&op, 0, 1e-8), Err(QuantizeError::InvalidRequest(_))));
        let skew = op.skew_symmetrized();
        assert!(matches!(spectrum(&skew, 2, 1e-8), Err(QuantizeError::InvalidRequest(_))));
    }

    #[test]
    fn table_has_header_and_rows() {
        let result = spectrum(&path_laplacian(32), 3, 1e-10).unwrap();
        let table = result.table();
        assert!(table.starts_with("index,eigenvalue,residual\n"));
        assert_eq!(table.lines().count(), 4);
    }
}
