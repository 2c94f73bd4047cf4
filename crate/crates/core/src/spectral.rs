//! Eigenvalues of dense real nonsymmetric matrices.
//!
//! The matrix is reduced to upper Hessenberg form by Householder reflections
//! and then iterated with the Francis double-shift QR step, deflating a
//! subdiagonal entry once `|h[i+1][i]| <= tol * (|h[i][i]| + |h[i+1][i+1]|)`.
//! The QR sweep follows the EISPACK `hqr` routine.
//!
//! [`charpoly_roots_oracle`] is an independent route for matrices up to
//! 4x4 (Faddeev–LeVerrier coefficients plus polynomial root finding) used to
//! cross-check the iterative solver.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;
use crate::matrix::Matrix;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// QR iterations allowed per eigenvalue before giving up.
pub const DEFAULT_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Diagonal similarity scaling before the reduction.
    pub balance: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            balance: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    /// Total QR sweeps performed.
    pub iterations: usize,
    pub converged: bool,
}

impl Spectrum {
    pub fn abscissa(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_real_part(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalue attaining the spectral abscissa (upper half-plane member of
    /// a conjugate pair).
    pub fn rightmost(&self) -> Option<Complex64> {
        self.eigenvalues.iter().copied().reduce(|best, z| {
            if z.re > best.re || (z.re == best.re && z.im > best.im) {
                z
            } else {
                best
            }
        })
    }
}

/// All eigenvalues of `m` with default options.
pub fn eigenvalues(m: &Matrix) -> Result<Spectrum> {
    eigenvalues_with(m, EigenOptions::default())
}

/// All eigenvalues of `m`. Returns `converged = false` instead of an error
/// when the iteration cap is hit; unconverged eigenvalues are then NaN.
pub fn eigenvalues_with(m: &Matrix, opts: EigenOptions) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    if m.rows() == 0 {
        return Err(Error::InvalidArgument(
            "matrix must have dimension at least 1",
        ));
    }
    if !m.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let mut h = m.clone();
    if opts.balance {
        balance(&mut h);
    }
    reduce_to_hessenberg(&mut h);
    Ok(hessenberg_qr(&mut h, opts.tolerance, opts.max_iterations))
}

/// Largest real part over the spectrum; fails if the solver does not converge.
pub fn spectral_abscissa(m: &Matrix) -> Result<f64> {
    let s = eigenvalues(m)?;
    if !s.converged {
        return Err(Error::EigensolverFailure {
            iterations: s.iterations,
        });
    }
    Ok(s.abscissa())
}

/// Parlett–Reinsch balancing by powers of two (EISPACK `balanc` without
/// permutations).
fn balance(a: &mut Matrix) {
    const RADIX: f64 = 2.0;
    let n = a.rows();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += math::abs(a[(j, i)]);
                    r += math::abs(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / RADIX;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form. Entries below the
/// first subdiagonal are set to zero.
fn reduce_to_hessenberg(a: &mut Matrix) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let scale: f64 = (k + 1..n).map(|i| math::abs(a[(i, k)])).sum();
        if scale == 0.0 {
            continue;
        }
        let mut norm2 = 0.0;
        for i in k + 1..n {
            v[i] = a[(i, k)] / scale;
            norm2 += v[i] * v[i];
        }
        let alpha = -math::copysign(math::sqrt(norm2), v[k + 1]);
        // v = x - alpha e1, H = I - 2 v v^T / (v^T v)
        v[k + 1] -= alpha;
        let vtv: f64 = (k + 1..n).map(|i| v[i] * v[i]).sum();
        if vtv == 0.0 {
            continue;
        }
        let beta = 2.0 / vtv;
        // A <- H A
        for j in k..n {
            let s: f64 = (k + 1..n).map(|i| v[i] * a[(i, j)]).sum::<f64>() * beta;
            for i in k + 1..n {
                a[(i, j)] -= s * v[i];
            }
        }
        // A <- A H
        for i in 0..n {
            let s: f64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum::<f64>() * beta;
            for j in k + 1..n {
                a[(i, j)] -= s * v[j];
            }
        }
        a[(k + 1, k)] = alpha * scale;
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
#[allow(clippy::many_single_char_names)]
fn hessenberg_qr(h: &mut Matrix, tol: f64, max_iterations: usize) -> Spectrum {
    let n = h.rows() as isize;
    let mut wr = vec![0.0; n as usize];
    let mut wi = vec![0.0; n as usize];
    let mut total = 0usize;

    // isize indexing keeps the EISPACK loop bounds readable
    macro_rules! a {
        ($i:expr, $j:expr) => {
            h[(($i) as usize, ($j) as usize)]
        };
    }

    let mut anorm = 0.0;
    for i in 0..n {
        for j in (i - 1).max(0)..n {
            anorm += math::abs(a!(i, j));
        }
    }

    let mut nn = n - 1;
    let mut t = 0.0;
    let (mut p, mut q, mut r) = (0.0f64, 0.0f64, 0.0f64);
    let (mut x, mut y, mut z, mut w): (f64, f64, f64, f64);
    while nn >= 0 {
        let mut its = 0usize;
        let mut l;
        loop {
            l = nn;
            while l > 0 {
                let mut s = math::abs(a!(l - 1, l - 1)) + math::abs(a!(l, l));
                if s == 0.0 {
                    s = anorm;
                }
                if math::abs(a!(l, l - 1)) <= tol * s {
                    a!(l, l - 1) = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a!(nn, nn);
            if l == nn {
                wr[nn as usize] = x + t;
                wi[nn as usize] = 0.0;
                nn -= 1;
                break;
            }
            y = a!(nn - 1, nn - 1);
            w = a!(nn, nn - 1) * a!(nn - 1, nn);
            if l == nn - 1 {
                p = 0.5 * (y - x);
                q = p * p + w;
                z = math::sqrt(math::abs(q));
                x += t;
                let (i0, i1) = ((nn - 1) as usize, nn as usize);
                if q >= 0.0 {
                    z = p + math::copysign(z, p);
                    wr[i0] = x + z;
                    wr[i1] = if z != 0.0 { x - w / z } else { x + z };
                    wi[i0] = 0.0;
                    wi[i1] = 0.0;
                } else {
                    wr[i0] = x + p;
                    wr[i1] = x + p;
                    wi[i0] = z;
                    wi[i1] = -z;
                }
                nn -= 2;
                break;
            }
            if its == max_iterations {
                for i in 0..=nn as usize {
                    wr[i] = f64::NAN;
                    wi[i] = f64::NAN;
                }
                return Spectrum {
                    eigenvalues: collect(&wr, &wi),
                    iterations: total,
                    converged: false,
                };
            }
            if its > 0 && its.is_multiple_of(10) {
                // exceptional shift
                t += x;
                for i in 0..=nn {
                    a!(i, i) -= x;
                }
                let s = math::abs(a!(nn, nn - 1)) + math::abs(a!(nn - 1, nn - 2));
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            total += 1;

            let mut m = nn - 2;
            while m >= l {
                z = a!(m, m);
                r = x - z;
                let s0 = y - z;
                p = (r * s0 - w) / a!(m + 1, m) + a!(m, m + 1);
                q = a!(m + 1, m + 1) - z - r - s0;
                r = a!(m + 2, m + 1);
                let s = math::abs(p) + math::abs(q) + math::abs(r);
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = math::abs(a!(m, m - 1)) * (math::abs(q) + math::abs(r));
                let v = math::abs(p)
                    * (math::abs(a!(m - 1, m - 1)) + math::abs(z) + math::abs(a!(m + 1, m + 1)));
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m..nn - 1 {
                a!(i + 2, i) = 0.0;
                if i != m {
                    a!(i + 2, i - 1) = 0.0;
                }
            }
            let mut k = m;
            while k < nn {
                if k != m {
                    p = a!(k, k - 1);
                    q = a!(k + 1, k - 1);
                    r = if k + 1 != nn { a!(k + 2, k - 1) } else { 0.0 };
                    x = math::abs(p) + math::abs(q) + math::abs(r);
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = math::copysign(math::sqrt(p * p + q * q + r * r), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a!(k, k - 1) = -a!(k, k - 1);
                        }
                    } else {
                        a!(k, k - 1) = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        p = a!(k, j) + q * a!(k + 1, j);
                        if k + 1 != nn {
                            p += r * a!(k + 2, j);
                            a!(k + 2, j) -= p * z;
                        }
                        a!(k + 1, j) -= p * y;
                        a!(k, j) -= p * x;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l..=mmin {
                        p = x * a!(i, k) + y * a!(i, k + 1);
                        if k + 1 != nn {
                            p += z * a!(i, k + 2);
                            a!(i, k + 2) -= p * r;
                        }
                        a!(i, k + 1) -= p * q;
                        a!(i, k) -= p;
                    }
                }
                k += 1;
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Spectrum {
        eigenvalues: collect(&wr, &wi),
        iterations: total,
        converged: true,
    }
}

fn collect(wr: &[f64], wi: &[f64]) -> Vec<Complex64> {
    wr.iter()
        .zip(wi)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect()
}

/// Characteristic polynomial coefficients `[c0, c1, ..., c_{n-1}, 1]` of
/// `det(lambda I - m)` by the Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(m: &Matrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let n = m.rows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut mk = Matrix::zeros(n, n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k) / k
        let mut next = m.matmul(&mk)?;
        for i in 0..n {
            next[(i, i)] += coeffs[n - k + 1];
        }
        let am = m.matmul(&next)?;
        coeffs[n - k] = -am.trace() / k as f64;
        mk = next;
    }
    Ok(coeffs)
}

/// Eigenvalues of a matrix of dimension at most 4 via its characteristic
/// polynomial. Independent of the QR path; intended as a test oracle.
pub fn charpoly_roots_oracle(m: &Matrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let n = m.rows();
    if n > 4 {
        return Err(Error::DimensionTooLarge(n));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let coeffs = characteristic_polynomial(m)?;
    Ok(polynomial_roots(&coeffs))
}

/// Roots of the monic polynomial with ascending coefficients `coeffs`
/// (last entry 1). Closed form up to degree 2, Aberth–Ehrlich iteration
/// followed by Newton polishing above.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len().saturating_sub(1);
    match deg {
        0 => Vec::new(),
        1 => vec![Complex64::new(-coeffs[0] / coeffs[1], 0.0)],
        2 => quadratic_roots(coeffs[1] / coeffs[2], coeffs[0] / coeffs[2]).to_vec(),
        _ => aberth(coeffs),
    }
}

/// Roots of `x^2 + b x + c`, avoiding cancellation.
pub fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let q = -0.5 * (b + math::copysign(math::sqrt(disc), b));
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        [Complex64::new(q, 0.0), Complex64::new(c / q, 0.0)]
    } else {
        let im = 0.5 * math::sqrt(-disc);
        [Complex64::new(-0.5 * b, im), Complex64::new(-0.5 * b, -im)]
    }
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn aberth(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let c: Vec<f64> = coeffs.iter().map(|v| v / lead).collect();
    // Cauchy bound on root modulus
    let radius = 1.0
        + c[..deg]
            .iter()
            .fold(0.0f64, |acc, v| acc.max(math::abs(*v)));
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let theta = 2.0 * core::f64::consts::PI * (k as f64 + 0.25) / deg as f64;
            Complex64::from_polar(0.5 * radius, theta)
        })
        .collect();
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..deg {
            let (p, dp) = horner(&c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_step < 1e-16 {
            break;
        }
    }
    for zi in &mut z {
        for _ in 0..3 {
            let (p, dp) = horner(&c, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            let next = *zi - p / dp;
            if !(next.re.is_finite() && next.im.is_finite()) {
                break;
            }
            let (pn, _) = horner(&c, next);
            if pn.norm() <= p.norm() {
                *zi = next;
            } else {
                break;
            }
        }
        // real coefficients: snap numerically real roots onto the axis
        if math::abs(zi.im) <= 1e-14 * (1.0 + zi.norm()) {
            zi.im = 0.0;
        }
    }
    z
}

/// Largest distance in an optimal pairing of two equally long eigenvalue
/// lists (greedy nearest-neighbour pairing, exact search for length <= 6).
pub fn max_pairing_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    if a.len() <= 6 {
        let mut idx: Vec<usize> = (0..b.len()).collect();
        let mut best = f64::INFINITY;
        permute(&mut idx, 0, &mut |perm| {
            let d = a
                .iter()
                .zip(perm)
                .map(|(x, &j)| (x - b[j]).norm())
                .fold(0.0, f64::max);
            best = best.min(d);
        });
        return best;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, c| {
                if c.1 < acc.1 {
                    c
                } else {
                    acc
                }
            });
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn permute(idx: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == idx.len() {
        f(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, f);
        idx.swap(k, i);
    }
}
