//! Dense 4×4 complex linear algebra for two-qubit states.
//!
//! Everything here is sized for the probe pair, so matrices are plain arrays
//! and the solvers are small, self-contained iterations:
//!
//! * [`eigvals4`]: general eigenvalues (Hessenberg reduction + shifted QR).
//! * [`hermitian_eigen4`]: cyclic Jacobi for Hermitian input.
//! * [`singular_values4`]: one-sided Jacobi, accurate in the absolute sense
//!   for every singular value including the tiny ones.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major 4×4 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix4(pub [[C64; 4]; 4]);

impl Matrix4 {
    pub fn zeros() -> Self {
        Matrix4([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Self::from_fn(|r, c| if r == c { ONE } else { ZERO })
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros();
        for r in 0..4 {
            for c in 0..4 {
                m.0[r][c] = f(r, c);
            }
        }
        m
    }

    pub fn from_real(rows: [[f64; 4]; 4]) -> Self {
        Self::from_fn(|r, c| C64::new(rows[r][c], 0.0))
    }

    /// Diagonal matrix.
    pub fn diag(d: [C64; 4]) -> Self {
        Self::from_fn(|r, c| if r == c { d[r] } else { ZERO })
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[C64; 4], v: &[C64; 4]) -> Self {
        Self::from_fn(|r, c| u[r] * v[c].conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|r, c| self.0[c][r].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|r, c| self.0[c][r])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(|r, c| self.0[r][c].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_fn(|r, c| self.0[r][c] * s)
    }

    pub fn hadamard(&self, other: &Self) -> Self {
        Self::from_fn(|r, c| self.0[r][c] * other.0[r][c])
    }

    pub fn trace(&self) -> C64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..4 {
            for c in r..4 {
                worst = worst.max((self.0[r][c] - self.0[c][r].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.iter().flatten().zip(other.0.iter().flatten()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn apply(&self, v: &[C64; 4]) -> [C64; 4] {
        let mut out = [ZERO; 4];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|c| self.0[r][c] * v[c]).sum();
        }
        out
    }
}

impl Index<(usize, usize)> for Matrix4 {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for Matrix4 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.0[r][c]
    }
}

impl Mul for Matrix4 {
    type Output = Matrix4;
    fn mul(self, rhs: Matrix4) -> Matrix4 {
        Matrix4::from_fn(|r, c| (0..4).map(|k| self.0[r][k] * rhs.0[k][c]).sum())
    }
}

impl Add for Matrix4 {
    type Output = Matrix4;
    fn add(self, rhs: Matrix4) -> Matrix4 {
        Matrix4::from_fn(|r, c| self.0[r][c] + rhs.0[r][c])
    }
}

impl Sub for Matrix4 {
    type Output = Matrix4;
    fn sub(self, rhs: Matrix4) -> Matrix4 {
        Matrix4::from_fn(|r, c| self.0[r][c] - rhs.0[r][c])
    }
}

/// Iteration budget per eigenvalue for the QR sweep.
const QR_BUDGET: usize = 60;

/// Eigenvalues of a general complex 4×4 matrix, in no particular order.
///
/// Householder reduction to upper Hessenberg form followed by single-shift
/// complex QR with Wilkinson shifts and deflation. Exceptional shifts are
/// injected every 10 stalled iterations so that symmetric spectra (±a) cannot
/// cycle forever.
pub fn eigvals4(m: &Matrix4) -> Result<[C64; 4]> {
    if !m.is_finite() {
        return Err(Error::param("matrix", "entries must be finite"));
    }
    let mut h = hessenberg(m);
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let mut out = [ZERO; 4];
    let mut hi = 3usize;
    let mut stalled = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            out[0] = h[(0, 0)];
            break;
        }
        // find the lowest negligible subdiagonal at or below `hi`, relative to
        // its neighbours or, for a numerically zero block, to the whole matrix
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let local = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let local = if local == 0.0 { scale } else { local };
            if sub <= f64::EPSILON * local || sub <= f64::EPSILON * scale {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            out[hi] = h[(hi, hi)];
            hi -= 1;
            stalled = 0;
            continue;
        }
        stalled += 1;
        total += 1;
        if stalled > QR_BUDGET {
            return Err(Error::NotConverged { iterations: total });
        }
        let shift = if stalled.is_multiple_of(10) {
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.4 * h[(hi, hi - 1)].norm())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_step(&mut h, lo, hi, shift);
    }
    Ok(out)
}

fn hessenberg(m: &Matrix4) -> Matrix4 {
    let mut a = *m;
    for col in 0..2 {
        let x: Vec<C64> = (col + 1..4).map(|r| a[(r, col)]).collect();
        let alpha_norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
        let mut v = x.clone();
        v[0] += phase * alpha_norm;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // A <- P A P with P = I - 2 v v†, acting on rows/cols col+1..4
        for c in 0..4 {
            let dot: C64 = (0..v.len()).map(|i| v[i].conj() * a[(col + 1 + i, c)]).sum();
            for i in 0..v.len() {
                a[(col + 1 + i, c)] -= v[i] * dot * 2.0;
            }
        }
        for r in 0..4 {
            let dot: C64 = (0..v.len()).map(|i| a[(r, col + 1 + i)] * v[i]).sum();
            for i in 0..v.len() {
                a[(r, col + 1 + i)] -= dot * v[i].conj() * 2.0;
            }
        }
    }
    a
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let e1 = half_tr + root;
    let e2 = half_tr - root;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

/// One shifted QR step on the active block `lo..=hi` of a Hessenberg matrix,
/// applied to the whole matrix so the similarity is exact.
fn qr_step(h: &mut Matrix4, lo: usize, hi: usize, shift: C64) {
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        // rows k, k+1
        for col in 0..4 {
            let x = h[(k, col)];
            let y = h[(k + 1, col)];
            h[(k, col)] = x * c + y * s.conj();
            h[(k + 1, col)] = -x * s + y * c;
        }
        rotations.push((k, c, s));
    }
    for &(k, c, s) in &rotations {
        // columns k, k+1 with the adjoint rotation
        for row in 0..4 {
            let x = h[(row, k)];
            let y = h[(row, k + 1)];
            h[(row, k)] = x * c + y * s;
            h[(row, k + 1)] = -x * s.conj() + y * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

/// Rotation `[[c, s̄], [-s, c]]` (c real) mapping `(x, y)` to `(r, 0)`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ny = y.norm();
    if ny == 0.0 {
        return (1.0, ZERO);
    }
    let nx = x.norm();
    if nx == 0.0 {
        return (0.0, y / ny);
    }
    let r = nx.hypot(ny);
    (nx / r, x.conj() * y / (nx * r))
}

/// Eigen-decomposition of a Hermitian 4×4 matrix.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as the columns of the second result.
pub fn hermitian_eigen4(m: &Matrix4) -> Result<([f64; 4], Matrix4)> {
    if !m.is_finite() {
        return Err(Error::param("matrix", "entries must be finite"));
    }
    let mut a = *m;
    let mut v = Matrix4::identity();
    let scale = m.norm();
    const MAX_SWEEPS: usize = 50;
    let floor = 1e-18 * scale;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..3 {
            for q in p + 1..4 {
                let apq = a[(p, q)];
                let mag = apq.norm();
                let diag = (a[(p, p)].re * a[(q, q)].re).abs().sqrt();
                if mag <= floor || mag <= f64::EPSILON * diag {
                    continue;
                }
                rotated = true;
                let phase = apq / mag;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if theta == 0.0 { 1.0 } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = D·P with D = diag(1, conj(phase)) on (p, q)
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = phase.conj() * -s;
                let jqq = phase.conj() * c;
                // A <- A J (columns)
                for r in 0..4 {
                    let x = a[(r, p)];
                    let y = a[(r, q)];
                    a[(r, p)] = x * jpp + y * jqp;
                    a[(r, q)] = x * jpq + y * jqq;
                    let x = v[(r, p)];
                    let y = v[(r, q)];
                    v[(r, p)] = x * jpp + y * jqp;
                    v[(r, q)] = x * jpq + y * jqq;
                }
                // A <- J† A (rows)
                for col in 0..4 {
                    let x = a[(p, col)];
                    let y = a[(q, col)];
                    a[(p, col)] = jpp.conj() * x + jqp.conj() * y;
                    a[(q, col)] = jpq.conj() * x + jqq.conj() * y;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged { iterations: MAX_SWEEPS });
    }
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let values = order.map(|i| a[(i, i)].re);
    let vectors = Matrix4::from_fn(|r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

/// Singular values in descending order, via one-sided (Hestenes) Jacobi.
///
/// Column orthogonalisation keeps every singular value accurate to roughly
/// machine precision times the largest one; forming `M†M` instead would lose
/// half the digits of the small ones.
#[allow(clippy::needless_range_loop)]
pub fn singular_values4(m: &Matrix4) -> Result<[f64; 4]> {
    if !m.is_finite() {
        return Err(Error::param("matrix", "entries must be finite"));
    }
    let mut cols: [[C64; 4]; 4] = std::array::from_fn(|c| std::array::from_fn(|r| m[(r, c)]));
    // column pairs whose overlap is below rounding of the whole matrix are left alone
    let floor = (f64::EPSILON * m.norm()).powi(2);
    const MAX_SWEEPS: usize = 60;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..3 {
            for q in p + 1..4 {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let g: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let gm = g.norm();
                if gm <= floor || gm <= 4.0 * f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = g / gm;
                let zeta = (beta - alpha) / (2.0 * gm);
                let t = if zeta == 0.0 { 1.0 } else { zeta.signum() / (zeta.abs() + (zeta * zeta + 1.0).sqrt()) };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..4 {
                    let x = cols[p][r];
                    let y = cols[q][r] * phase.conj();
                    cols[p][r] = x * c - y * s;
                    cols[q][r] = x * s + y * c;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged { iterations: MAX_SWEEPS });
    }
    let mut sv = cols.map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}
