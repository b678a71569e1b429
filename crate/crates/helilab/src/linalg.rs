//! Minimal sparse linear algebra: CSR matrices, Jacobi-preconditioned
//! conjugate gradients, and a shifted inverse iteration for the smallest
//! eigenpair of a generalized symmetric problem `K u = lambda M u` with
//! diagonal `M`.

/// Compressed sparse row matrix (square, f64).
#[derive(Debug, Clone)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    /// Assemble from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Csr {
        let mut counts = vec![0usize; n + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut col = vec![0usize; triplets.len()];
        let mut val = vec![0.0; triplets.len()];
        let mut next = counts.clone();
        for &(i, j, v) in triplets {
            let k = next[i];
            col[k] = j;
            val[k] = v;
            next[i] += 1;
        }
        // Sort each row by column and merge duplicates in place.
        let mut row_ptr = vec![0usize; n + 1];
        let mut out_col = Vec::with_capacity(col.len());
        let mut out_val = Vec::with_capacity(val.len());
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            scratch.clear();
            for k in counts[i]..counts[i + 1] {
                scratch.push((col[k], val[k]));
            }
            scratch.sort_unstable_by_key(|&(c, _)| c);
            let mut iter = scratch.iter().peekable();
            while let Some(&(c, v)) = iter.next() {
                let mut sum = v;
                while let Some(&&(c2, v2)) = iter.peek() {
                    if c2 == c {
                        sum += v2;
                        iter.next();
                    } else {
                        break;
                    }
                }
                out_col.push(c);
                out_val.push(sum);
            }
            row_ptr[i + 1] = out_col.len();
        }
        Csr { n, row_ptr, col: out_col, val: out_val }
    }

    /// Iterate the stored entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |idx| (r, self.col[idx], self.val[idx]))
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col.len()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.val[k] * x[self.col[k]];
            }
            y[i] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col[k] == i {
                    d[i] = self.val[k];
                }
            }
        }
        d
    }

    /// Largest absolute row sum; a cheap bound on the spectral radius.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| self.val[k].abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Abstract symmetric operator for iterative solvers.
pub trait LinOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinOp for Csr {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }
}

/// `D^{-1/2} K D^{-1/2} - shift I` for diagonal mass `D`; the symmetric
/// form of the generalized pencil used by the eigensolver.
struct ScaledShifted<'a> {
    k: &'a Csr,
    inv_sqrt_mass: &'a [f64],
    shift: f64,
}

impl LinOp for ScaledShifted<'_> {
    fn dim(&self) -> usize {
        self.k.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.k.dim();
        let mut scaled = vec![0.0; n];
        for i in 0..n {
            scaled[i] = x[i] * self.inv_sqrt_mass[i];
        }
        self.k.matvec(&scaled, y);
        for i in 0..n {
            y[i] = y[i] * self.inv_sqrt_mass[i] - self.shift * x[i];
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CgOutcome {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Set when a direction of nonpositive curvature was met, i.e. the
    /// operator is not positive definite.
    pub indefinite: bool,
}

/// Jacobi-preconditioned conjugate gradients for symmetric positive
/// definite operators.  `x` holds the initial guess on entry and the
/// solution on exit.  Detects indefiniteness instead of diverging.
pub fn cg_solve(
    op: &dyn LinOp,
    b: &[f64],
    x: &mut [f64],
    precond_diag: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> CgOutcome {
    let n = op.dim();
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let inv_diag: Vec<f64> = match precond_diag {
        Some(d) => d.iter().map(|&v| if v.abs() > 1e-300 { 1.0 / v } else { 1.0 }).collect(),
        None => vec![1.0; n],
    };
    let bnorm = norm(b).max(1e-300);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(&ri, &di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let rnorm = norm(&r);
        if rnorm <= tol * bnorm {
            return CgOutcome { iterations: it, residual: rnorm / bnorm, converged: true, indefinite: false };
        }
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return CgOutcome {
                iterations: it,
                residual: rnorm / bnorm,
                converged: false,
                indefinite: true,
            };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rnorm = norm(&r);
    CgOutcome { iterations: max_iter, residual: rnorm / bnorm, converged: rnorm <= tol * bnorm, indefinite: false }
}

/// MINRES for symmetric (possibly indefinite) systems; used by the Newton
/// refinement of saddle-point equilibria, where the Hessian has negative
/// eigenvalues and CG is not applicable.
pub fn minres_solve(
    op: &dyn LinOp,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> CgOutcome {
    let n = op.dim();
    // Lanczos vectors.
    let mut v_prev = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut r0 = vec![0.0; n];
    op.apply(x, &mut r0);
    for i in 0..n {
        v[i] = b[i] - r0[i];
    }
    let bnorm = norm(b).max(1e-300);
    let mut beta = norm(&v);
    if beta <= tol * bnorm {
        return CgOutcome { iterations: 0, residual: beta / bnorm, converged: true, indefinite: false };
    }
    for vi in v.iter_mut() {
        *vi /= beta;
    }
    // Givens rotation state.
    let (mut c_prev, mut s_prev) = (1.0f64, 0.0f64);
    let (mut c_curr, mut s_curr) = (1.0f64, 0.0f64);
    let mut eta = beta;
    let mut w_prev = vec![0.0; n];
    let mut w_curr = vec![0.0; n];
    let mut av = vec![0.0; n];
    let mut residual = beta;
    for it in 0..max_iter {
        op.apply(&v, &mut av);
        let alpha = dot(&v, &av);
        for i in 0..n {
            av[i] -= alpha * v[i] + beta * v_prev[i];
        }
        let beta_next = norm(&av);

        // Apply previous rotations to the new tridiagonal column.
        let delta = c_curr * alpha - c_prev * s_curr * beta;
        let gamma1 = (delta * delta + beta_next * beta_next).sqrt();
        let eps = s_prev * beta;
        let delta2 = s_curr * alpha + c_prev * c_curr * beta;
        if gamma1 < 1e-300 {
            break;
        }
        let c_next = delta / gamma1;
        let s_next = beta_next / gamma1;

        for i in 0..n {
            let w_new = (v[i] - delta2 * w_curr[i] - eps * w_prev[i]) / gamma1;
            x[i] += c_next * eta * w_new;
            w_prev[i] = w_curr[i];
            w_curr[i] = w_new;
        }
        eta = -s_next * eta;
        residual = eta.abs();
        if residual <= tol * bnorm {
            return CgOutcome {
                iterations: it + 1,
                residual: residual / bnorm,
                converged: true,
                indefinite: false,
            };
        }
        // Advance Lanczos and rotation history.
        if beta_next < 1e-300 {
            break;
        }
        for i in 0..n {
            let next = av[i] / beta_next;
            v_prev[i] = v[i];
            v[i] = next;
        }
        beta = beta_next;
        c_prev = c_curr;
        s_prev = s_curr;
        c_curr = c_next;
        s_curr = s_next;
    }
    CgOutcome {
        iterations: max_iter,
        residual: residual / bnorm,
        converged: residual <= tol * bnorm,
        indefinite: false,
    }
}

/// Smallest eigenpair of `K u = lambda M u` with symmetric `K` and diagonal
/// positive `M`, by shifted inverse iteration on the symmetrized operator.
///
/// Returns `(lambda, u)` with `u` mass-normalized (`u^T M u = 1`).  The
/// shift starts at a Gershgorin lower bound (safe for indefinite `K`) and
/// tracks the Rayleigh quotient from below; loss of positive definiteness
/// in the inner CG solve triggers a shift back-off.
pub fn smallest_generalized_eigenpair(
    k: &Csr,
    mass_diag: &[f64],
    tol: f64,
    max_outer: usize,
) -> (f64, Vec<f64>) {
    let n = k.dim();
    assert_eq!(mass_diag.len(), n);
    assert!(n > 0, "empty eigenproblem");
    let inv_sqrt_mass: Vec<f64> = mass_diag.iter().map(|&m| 1.0 / m.max(1e-300).sqrt()).collect();

    // Gershgorin lower bound for B = D^{-1/2} K D^{-1/2}.
    let mut lower = f64::INFINITY;
    for i in 0..n {
        let mut diag = 0.0;
        let mut off = 0.0;
        for idx in k.row_ptr[i]..k.row_ptr[i + 1] {
            let j = k.col[idx];
            let b = k.val[idx] * inv_sqrt_mass[i] * inv_sqrt_mass[j];
            if j == i {
                diag = b;
            } else {
                off += b.abs();
            }
        }
        lower = lower.min(diag - off);
    }
    if !lower.is_finite() {
        lower = -1.0;
    }

    // Deterministic pseudo-random start vector to avoid symmetry traps.
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            let s = (i as u64).wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            1.0 + 0.5 * ((s >> 33) as f64 / (1u64 << 31) as f64 - 0.5)
        })
        .collect();
    normalize(&mut x);

    let scale = k.inf_norm().max(1.0);
    let mut shift = lower - 1e-3 * scale;
    let mut rho = rayleigh(k, &inv_sqrt_mass, &x);
    let mut y = vec![0.0; n];
    let precond: Vec<f64> = {
        let d = k.diagonal();
        (0..n).map(|i| (d[i] * inv_sqrt_mass[i] * inv_sqrt_mass[i] - shift).max(1e-12)).collect()
    };
    for _ in 0..max_outer {
        let op = ScaledShifted { k, inv_sqrt_mass: &inv_sqrt_mass, shift };
        y.copy_from_slice(&x);
        let out = cg_solve(&op, &x, &mut y, Some(&precond), 1e-10, 8 * n + 200);
        if out.indefinite {
            // The shift crossed the smallest eigenvalue: retreat halfway
            // toward the last safe Rayleigh estimate.
            shift = shift - (rho - shift).abs().max(1e-3 * scale);
            continue;
        }
        normalize(&mut y);
        x.copy_from_slice(&y);
        let rho_new = rayleigh(k, &inv_sqrt_mass, &x);
        // Residual of the symmetrized problem measures convergence.
        let op_res = residual_norm(k, &inv_sqrt_mass, &x, rho_new);
        let done = op_res <= tol * scale.max(rho_new.abs());
        let stagnant = (rho_new - rho).abs() <= 0.1 * tol * rho_new.abs().max(1.0);
        rho = rho_new;
        if done && stagnant {
            break;
        }
        // Creep the shift toward (but never onto) the eigenvalue estimate.
        let gap = (rho - shift).abs();
        shift = rho - (0.25 * gap).max(1e-6 * scale);
    }
    // Return the eigenvector in generalized coordinates, mass-normalized.
    let mut u: Vec<f64> = x.iter().zip(&inv_sqrt_mass).map(|(&xi, &s)| xi * s).collect();
    let m_norm: f64 = u
        .iter()
        .zip(mass_diag)
        .map(|(&ui, &mi)| ui * ui * mi)
        .sum::<f64>()
        .sqrt();
    for v in &mut u {
        *v /= m_norm;
    }
    (rho, u)
}

fn rayleigh(k: &Csr, inv_sqrt_mass: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    let mut tmp = vec![0.0; n];
    let op = ScaledShifted { k, inv_sqrt_mass, shift: 0.0 };
    op.apply(x, &mut tmp);
    dot(x, &tmp) / dot(x, x)
}

fn residual_norm(k: &Csr, inv_sqrt_mass: &[f64], x: &[f64], rho: f64) -> f64 {
    let n = x.len();
    let mut tmp = vec![0.0; n];
    let op = ScaledShifted { k, inv_sqrt_mass, shift: 0.0 };
    op.apply(x, &mut tmp);
    let mut acc = 0.0;
    for i in 0..n {
        let r = tmp[i] - rho * x[i];
        acc += r * r;
    }
    acc.sqrt() / norm(x)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let n = norm(a).max(1e-300);
    for v in a.iter_mut() {
        *v /= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// 1D Dirichlet Laplacian on n interior nodes of a unit interval.
    fn laplacian_1d(n: usize) -> Csr {
        let h = 1.0 / (n + 1) as f64;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 / h));
            if i + 1 < n {
                t.push((i, i + 1, -1.0 / h));
                t.push((i + 1, i, -1.0 / h));
            }
        }
        Csr::from_triplets(n, &t)
    }

    #[test]
    fn triplets_merge_and_sort() {
        let m = Csr::from_triplets(2, &[(0, 1, 1.0), (0, 1, 2.0), (0, 0, 5.0), (1, 1, 1.0)]);
        assert_eq!(m.nnz(), 3);
        let mut y = vec![0.0, 0.0];
        m.matvec(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![8.0, 1.0]);
        assert_eq!(m.diagonal(), vec![5.0, 1.0]);
    }

    #[test]
    fn cg_matches_direct_solve() {
        let a = laplacian_1d(50);
        let b = vec![1.0; 50];
        let mut x = vec![0.0; 50];
        let out = cg_solve(&a, &b, &mut x, Some(&a.diagonal()), 1e-12, 1000);
        assert!(out.converged, "residual {}", out.residual);
        let mut ax = vec![0.0; 50];
        a.matvec(&x, &mut ax);
        for i in 0..50 {
            assert_relative_eq!(ax[i], 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn cg_flags_indefinite_operator() {
        let a = Csr::from_triplets(2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        let mut x = vec![0.0, 0.0];
        let out = cg_solve(&a, &[1.0, 1.0], &mut x, None, 1e-10, 100);
        assert!(out.indefinite);
    }

    #[test]
    fn minres_solves_indefinite_systems() {
        // Diagonal with mixed signs: CG fails here, MINRES must not.
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, if i % 3 == 0 { -2.0 - i as f64 } else { 1.0 + i as f64 }));
        }
        let a = Csr::from_triplets(n, &t);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 1.1).collect();
        let mut x = vec![0.0; n];
        let out = minres_solve(&a, &b, &mut x, 1e-12, 400);
        assert!(out.converged, "residual {}", out.residual);
        let mut ax = vec![0.0; n];
        a.matvec(&x, &mut ax);
        for i in 0..n {
            assert_relative_eq!(ax[i], b[i], epsilon = 1e-8);
        }
        // Also agree with CG on an SPD system.
        let spd = laplacian_1d(30);
        let rhs = vec![1.0; 30];
        let mut x1 = vec![0.0; 30];
        let mut x2 = vec![0.0; 30];
        cg_solve(&spd, &rhs, &mut x1, None, 1e-12, 500);
        minres_solve(&spd, &rhs, &mut x2, 1e-12, 500);
        for i in 0..30 {
            assert_relative_eq!(x1[i], x2[i], epsilon = 1e-7);
        }
    }

    #[test]
    fn smallest_eigenvalue_of_interval_laplacian() {
        // K = h * tridiag(-1, 2, -1)/h^2, M = h I: smallest generalized
        // eigenvalue approximates pi^2 with O(h^2) error.
        let n = 200;
        let h = 1.0 / (n + 1) as f64;
        let a = laplacian_1d(n);
        let mass = vec![h; n];
        let (lam, u) = smallest_generalized_eigenpair(&a, &mass, 1e-10, 400);
        let exact = (2.0 / h / h) * (1.0 - (PI * h).cos());
        assert_relative_eq!(lam, exact, epsilon = 1e-7);
        assert_relative_eq!(lam, PI * PI, max_relative = 1e-3);
        // Eigenvector is mass-normalized and sine-shaped (no sign flips).
        let m_norm: f64 = u.iter().map(|&v| v * v * h).sum::<f64>();
        assert_relative_eq!(m_norm, 1.0, epsilon = 1e-8);
        let signs: Vec<f64> = u.iter().map(|&v| v.signum()).collect();
        assert!(signs.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn indefinite_pencil_finds_negative_eigenvalue() {
        // Shifted Laplacian K - c*M with c above the fundamental tone has a
        // negative smallest eigenvalue equal to lambda_1 - c.
        let n = 150;
        let h = 1.0 / (n + 1) as f64;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 / h - 20.0 * h));
            if i + 1 < n {
                t.push((i, i + 1, -1.0 / h));
                t.push((i + 1, i, -1.0 / h));
            }
        }
        let a = Csr::from_triplets(n, &t);
        let mass = vec![h; n];
        let (lam, _) = smallest_generalized_eigenpair(&a, &mass, 1e-10, 400);
        assert_relative_eq!(lam, PI * PI - 20.0, max_relative = 2e-3);
        assert!(lam < 0.0);
    }

    #[test]
    fn nonuniform_mass_matrix() {
        // Same operator, doubled mass everywhere: eigenvalue halves.
        let n = 120;
        let h = 1.0 / (n + 1) as f64;
        let a = laplacian_1d(n);
        let (lam1, _) = smallest_generalized_eigenpair(&a, &vec![h; n], 1e-10, 400);
        let (lam2, _) = smallest_generalized_eigenpair(&a, &vec![2.0 * h; n], 1e-10, 400);
        assert_relative_eq!(lam2, lam1 / 2.0, max_relative = 1e-6);
    }
}
