//! Dense helpers at desk scale: orthonormal frames, projections, a Jacobi
//! eigensolver for the herding seeds, and one-dimensional null spaces for
//! the polytope-vertex enumeration.

use rand::Rng;

/// Columns of an orthonormal frame in `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub dim: usize,
    pub cols: Vec<Vec<f64>>,
}

impl Frame {
    pub fn empty(dim: usize) -> Self {
        Frame { dim, cols: Vec::new() }
    }

    pub fn k(&self) -> usize {
        self.cols.len()
    }

    /// Modified Gram-Schmidt with a re-orthogonalization pass; collapsed
    /// columns are replaced by random directions so the frame keeps its
    /// column count.
    pub fn orthonormalize<R: Rng>(dim: usize, mut cols: Vec<Vec<f64>>, rng: &mut R) -> Self {
        let mut kept: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
        let want = cols.len();
        let mut attempts = 0;
        let mut idx = 0;
        while kept.len() < want && attempts < 8 * want + 16 {
            attempts += 1;
            let mut v = if idx < cols.len() {
                let v = std::mem::take(&mut cols[idx]);
                idx += 1;
                v
            } else {
                (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect()
            };
            for _ in 0..2 {
                for u in &kept {
                    let d = dot(u, &v);
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= d * ui;
                    }
                }
            }
            let n = norm2(&v);
            if n > 1e-10 {
                for vi in &mut v {
                    *vi /= n;
                }
                kept.push(v);
            }
        }
        Frame { dim, cols: kept }
    }

    pub fn coordinate(dim: usize, indices: &[usize]) -> Self {
        let cols = indices
            .iter()
            .map(|&i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                e
            })
            .collect();
        Frame { dim, cols }
    }

    pub fn random<R: Rng>(dim: usize, k: usize, rng: &mut R) -> Self {
        let cols = (0..k)
            .map(|_| (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
            .collect();
        Self::orthonormalize(dim, cols, rng)
    }

    /// `Q^T x`.
    pub fn coeffs(&self, x: &[f64]) -> Vec<f64> {
        self.cols.iter().map(|c| dot(c, x)).collect()
    }

    /// `Q a`.
    pub fn expand(&self, a: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (c, ai) in self.cols.iter().zip(a) {
            for (o, ci) in out.iter_mut().zip(c) {
                *o += ai * ci;
            }
        }
        out
    }

    /// `x - Q Q^T x`: projection onto the orthogonal complement.
    pub fn project_out(&self, x: &[f64]) -> Vec<f64> {
        let a = self.coeffs(x);
        let mut out = x.to_vec();
        for (c, ai) in self.cols.iter().zip(&a) {
            for (o, ci) in out.iter_mut().zip(c) {
                *o -= ai * ci;
            }
        }
        out
    }

    /// `Q Q^T x`: projection onto the span.
    pub fn project_in(&self, x: &[f64]) -> Vec<f64> {
        self.expand(&self.coeffs(x))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Top-`k` eigenvectors of the scatter matrix of the points, by cyclic
/// Jacobi. Used for herding seeds only, so plain accuracy suffices.
pub fn principal_frame<R: Rng>(points: &[Vec<f64>], dim: usize, k: usize, rng: &mut R) -> Frame {
    let mut cov = vec![vec![0.0f64; dim]; dim];
    for p in points {
        for i in 0..dim {
            for j in 0..dim {
                cov[i][j] += p[i] * p[j];
            }
        }
    }
    let (vals, vecs) = jacobi_eigen(&mut cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|a, b| vals[*b].total_cmp(&vals[*a]));
    let cols: Vec<Vec<f64>> =
        order.iter().take(k).map(|&j| (0..dim).map(|i| vecs[i][j]).collect()).collect();
    Frame::orthonormalize(dim, cols, rng)
}

/// Cyclic Jacobi on a symmetric matrix; returns (eigenvalues, eigenvectors
/// as columns). Destroys the input.
fn jacobi_eigen(a: &mut [Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0f64; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let (aip, aiq) = (a[i][p], a[i][q]);
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let (apj, aqj) = (a[p][j], a[q][j]);
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let (vip, viq) = (v[i][p], v[i][q]);
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a[i][i]).collect();
    (vals, v)
}

/// A null vector of the `rows × cols` matrix (rows ≤ cols expected), or
/// `None` when the matrix has full column rank. Gaussian elimination with
/// partial pivoting.
pub fn null_vector(mat: &[Vec<f64>], cols: usize) -> Option<Vec<f64>> {
    let rows = mat.len();
    let mut a: Vec<Vec<f64>> = mat.to_vec();
    let mut pivot_col: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let mut best = r;
        for i in (r + 1)..rows {
            if a[i][c].abs() > a[best][c].abs() {
                best = i;
            }
        }
        if a[best][c].abs() < 1e-12 {
            continue;
        }
        a.swap(r, best);
        let piv = a[r][c];
        for v in &mut a[r] {
            *v /= piv;
        }
        for i in 0..rows {
            if i != r && a[i][c].abs() > 0.0 {
                let f = a[i][c];
                for j in 0..cols {
                    let sub = f * a[r][j];
                    a[i][j] -= sub;
                }
            }
        }
        pivot_col.push(c);
        r += 1;
    }
    if pivot_col.len() == cols {
        return None;
    }
    let free = (0..cols).find(|c| !pivot_col.contains(c))?;
    let mut x = vec![0.0; cols];
    x[free] = 1.0;
    for (row, &pc) in pivot_col.iter().enumerate() {
        x[pc] = -a[row][free];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frames_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = Frame::random(6, 3, &mut rng);
        assert_eq!(f.k(), 3);
        for i in 0..3 {
            for j in 0..3 {
                let d = dot(&f.cols[i], &f.cols[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-10);
            }
        }
        let x = vec![1.0, -2.0, 0.5, 0.0, 3.0, -1.0];
        let out = f.project_out(&x);
        for c in &f.cols {
            assert!(dot(c, &out).abs() < 1e-9);
        }
    }

    #[test]
    fn null_vector_finds_kernel() {
        // Kernel of [1 1 0; 0 1 1] contains (1, -1, 1).
        let m = vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]];
        let v = null_vector(&m, 3).unwrap();
        for row in &m {
            assert!(dot(row, &v).abs() < 1e-12);
        }
        assert!(norm2(&v) > 1e-12);
        // Full-rank square matrix has none.
        let m = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(null_vector(&m, 2).is_none());
    }

    #[test]
    fn principal_frame_finds_dominant_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let axis = [0.6, 0.8, 0.0, 0.0];
        let points: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let t = (i as f64 / 5.0).sin() * 3.0;
                axis.iter().map(|a| a * t).collect()
            })
            .collect();
        let f = principal_frame(&points, 4, 1, &mut rng);
        let overlap = dot(&f.cols[0], &axis.to_vec()).abs();
        assert!(overlap > 0.999, "overlap {overlap}");
    }
}
