//! Comparison-matrix certificates.
//!
//! For a pivot node `p` and sector constants `(k1, k2)` the comparison
//! matrix is the `2(N-1)` square block matrix
//!
//! ```text
//!     M = [ B   alpha I ]      B = -(alpha - alpha |a|) I - k1 K + (k2 - k1) A1 + k2 A2
//!         [ I   -mu0 I  ]
//! ```
//!
//! where `K` holds the degrees of the non-pivot nodes and `A1`, `A2` come
//! from [`Topology::aux_matrices`]. `M` is Metzler, so `z' = M z` is a
//! positive system; if `M` is Hurwitz every synchronization error decays
//! exponentially.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::ChuaParams;
use crate::spectral;
use crate::topology::Topology;

/// A matrix certifies only if its spectral abscissa is below `-DEFAULT_MARGIN`.
pub const DEFAULT_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub m: Matrix,
    pub eigenvalues: Vec<Complex64>,
    pub spectral_abscissa: f64,
    pub min_real_part: f64,
    pub hurwitz: bool,
    /// Reference node, when the matrix was built from a network.
    pub pivot: Option<usize>,
    pub margin_tolerance: f64,
    pub iterations: usize,
}

impl Certificate {
    /// The eigenvalue that sets the spectral abscissa.
    pub fn worst_eigenvalue(&self) -> Complex64 {
        self.eigenvalues
            .iter()
            .copied()
            .reduce(|best, z| {
                if z.re > best.re || (z.re == best.re && z.im > best.im) {
                    z
                } else {
                    best
                }
            })
            .unwrap_or_default()
    }

    /// Number of error pairs `(sigma_i, chi_i)`, i.e. `N - 1`.
    pub fn error_count(&self) -> usize {
        self.m.rows() / 2
    }
}

/// Assembles the comparison matrix for `pivot`. Rows `0..N-1` are the
/// `sigma` components of the non-pivot nodes in ascending index, rows
/// `N-1..2(N-1)` the matching `chi` components.
pub fn build_m(p: &ChuaParams, t: &Topology, pivot: usize, k1: f64, k2: f64) -> Result<Matrix> {
    if !(k1.is_finite() && k2.is_finite() && k1 >= 0.0 && k2 >= k1) {
        return Err(Error::InvalidSector { k1, k2 });
    }
    let aux = t.aux_matrices(pivot)?;
    let mu0 = p.mu0()?;
    let n = aux.nodes.len();
    let alpha = p.alpha();
    let base = alpha - alpha * p.lipschitz_constant();

    let mut m = Matrix::zeros(2 * n, 2 * n);
    for (r, &node) in aux.nodes.iter().enumerate() {
        let kappa = t.degree(node)? as f64;
        for c in 0..n {
            m[(r, c)] = (k2 - k1) * aux.a1[(r, c)] + k2 * aux.a2[(r, c)];
        }
        m[(r, r)] = -base - k1 * kappa;
        m[(r, n + r)] = alpha;
        m[(n + r, r)] = 1.0;
        m[(n + r, n + r)] = -mu0;
    }
    Ok(m)
}

/// Computes the spectrum of `m` and decides Hurwitz stability with the
/// given margin.
pub fn assess(m: &Matrix, margin_tolerance: f64) -> Result<Certificate> {
    let s = spectral::eigenvalues(m)?;
    if !s.converged {
        return Err(Error::EigensolverFailure {
            iterations: s.iterations,
        });
    }
    let spectral_abscissa = s.abscissa();
    Ok(Certificate {
        m: m.clone(),
        min_real_part: s.min_real_part(),
        hurwitz: spectral_abscissa < -margin_tolerance,
        spectral_abscissa,
        eigenvalues: s.eigenvalues,
        pivot: None,
        margin_tolerance,
        iterations: s.iterations,
    })
}

/// [`build_m`] followed by [`assess`].
pub fn certify(
    p: &ChuaParams,
    t: &Topology,
    pivot: usize,
    k1: f64,
    k2: f64,
    margin_tolerance: f64,
) -> Result<Certificate> {
    let m = build_m(p, t, pivot, k1, k2)?;
    let mut cert = assess(&m, margin_tolerance)?;
    cert.pivot = Some(pivot);
    Ok(cert)
}

/// Smallest linear gain `k` for which two linearly coupled oscillators are
/// certified: `alpha (|a| + 1/mu0 - 1)`.
pub fn two_node_threshold(p: &ChuaParams) -> Result<f64> {
    let mu0 = p.mu0()?;
    Ok(p.alpha() * (p.lipschitz_constant() + 1.0 / mu0 - 1.0))
}

/// Routh–Hurwitz test of the 2x2 comparison matrix for linear gain `k`:
/// both coefficients of `lambda^2 + c1 lambda + c0` strictly positive.
pub fn routh_hurwitz_2x2(p: &ChuaParams, k: f64) -> bool {
    let Ok(mu0) = p.mu0() else {
        return false;
    };
    let d = p.alpha() - p.alpha() * p.lipschitz_constant() + k;
    let c1 = mu0 + d;
    let c0 = d * mu0 - p.alpha();
    c1 > 0.0 && c0 > 0.0
}

/// Certificate with the smallest spectral abscissa over all pivot choices;
/// ties go to the lowest pivot. The result may be non-Hurwitz.
pub fn best_pivot(
    p: &ChuaParams,
    t: &Topology,
    k1: f64,
    k2: f64,
    margin_tolerance: f64,
) -> Result<Certificate> {
    if t.len() < 2 {
        return Err(Error::TooFewNodes(t.len()));
    }
    let mut best: Option<Certificate> = None;
    for pivot in 0..t.len() {
        let cert = certify(p, t, pivot, k1, k2, margin_tolerance)?;
        if best
            .as_ref()
            .is_none_or(|b| cert.spectral_abscissa < b.spectral_abscissa)
        {
            best = Some(cert);
        }
    }
    Ok(best.expect("at least two pivots evaluated"))
}

/// Result of [`min_linear_gain`].
#[derive(Debug, Clone, PartialEq)]
pub struct GainSearch {
    /// Smallest certified gain found (upper end of the final bracket).
    pub gain: f64,
    /// Certificate at `gain`.
    pub certificate: Certificate,
    /// `gain` re-checked as Hurwitz by a direct call.
    pub verified_at_gain: bool,
    /// `gain - resolution` re-checked as not Hurwitz (vacuous when
    /// `gain <= resolution`).
    pub verified_below: bool,
    /// A gain above a certified one failed to certify.
    pub non_monotone: bool,
    pub evaluations: usize,
}

/// Smallest `k` in `(0, k_max]`, up to `resolution`, for which the
/// comparison matrix with `k1 = k2 = k` is Hurwitz. Doubling scan from
/// `resolution`, then bisection. The gains `2k` and `k_max` above the first
/// certified one are probed as well. `None` if no `k <= k_max` certifies.
///
/// Monotonicity in `k` is not guaranteed for `N > 2`; the returned gain is
/// re-verified and `non_monotone` flags scans that observed a reversal.
pub fn min_linear_gain(
    p: &ChuaParams,
    t: &Topology,
    pivot: usize,
    k_max: f64,
    resolution: f64,
    margin_tolerance: f64,
) -> Result<Option<GainSearch>> {
    if !(k_max.is_finite() && k_max > 0.0) {
        return Err(Error::InvalidArgument("k_max must be positive"));
    }
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::InvalidArgument("resolution must be positive"));
    }
    let mut evaluations = 0usize;
    let mut hurwitz_at = |k: f64| -> Result<bool> {
        evaluations += 1;
        Ok(certify(p, t, pivot, k, k, margin_tolerance)?.hurwitz)
    };

    let mut lo = 0.0;
    let mut hi = None;
    let mut k = resolution.min(k_max);
    loop {
        if hurwitz_at(k)? {
            hi = Some(k);
            break;
        }
        lo = k;
        if k >= k_max {
            break;
        }
        k = (2.0 * k).min(k_max);
    }
    let Some(mut hi) = hi else {
        return Ok(None);
    };
    // probe above the first certified gain for a reversal
    let mut non_monotone = false;
    for probe in [2.0 * hi, k_max] {
        if probe > hi && probe <= k_max && !hurwitz_at(probe)? {
            non_monotone = true;
        }
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if hurwitz_at(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let certificate = certify(p, t, pivot, hi, hi, margin_tolerance)?;
    let verified_at_gain = certificate.hurwitz;
    let verified_below = if hi > resolution {
        !hurwitz_at(hi - resolution)?
    } else {
        true
    };
    if !verified_below {
        non_monotone = true;
    }
    Ok(Some(GainSearch {
        gain: hi,
        certificate,
        verified_at_gain,
        verified_below,
        non_monotone,
        evaluations: evaluations + 1,
    }))
}

/// State `(sigma, chi)` of the comparison system for the `N - 1` non-pivot
/// nodes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonState {
    pub sigma: Vec<f64>,
    pub chi: Vec<f64>,
}

impl ComparisonState {
    pub fn zeros(n: usize) -> Self {
        ComparisonState {
            sigma: alloc::vec![0.0; n],
            chi: alloc::vec![0.0; n],
        }
    }

    /// Stacked vector `[sigma, chi]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.sigma.clone();
        v.extend_from_slice(&self.chi);
        v
    }

    pub fn from_stacked(z: &[f64]) -> Result<Self> {
        if !z.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: z.len() + 1,
                found: z.len(),
            });
        }
        let (s, c) = z.split_at(z.len() / 2);
        Ok(ComparisonState {
            sigma: s.to_vec(),
            chi: c.to_vec(),
        })
    }

    pub fn is_nonnegative(&self) -> bool {
        self.sigma.iter().chain(&self.chi).all(|&v| v >= 0.0)
    }
}

/// `M z` for the stacked comparison state.
pub fn comparison_rhs(m: &Matrix, z: &ComparisonState) -> Result<ComparisonState> {
    if z.sigma.len() != z.chi.len() {
        return Err(Error::DimensionMismatch {
            expected: z.sigma.len(),
            found: z.chi.len(),
        });
    }
    let stacked = z.to_vec();
    if !m.is_square() || m.rows() != stacked.len() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: stacked.len(),
        });
    }
    ComparisonState::from_stacked(&m.mul_vec(&stacked)?)
}
