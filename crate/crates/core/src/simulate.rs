//! Fixed-step simulation of coupled networks, their error dynamics and the
//! comparison system.
//!
//! Integration is classical fourth-order Runge–Kutta with a constant step so
//! that runs are bit-reproducible. The nonlinearity has kinks at `|x1| = 1`;
//! no event location is done there, the small step absorbs the local loss of
//! order.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::certificate::ComparisonState;
use crate::coupling::SectorCoupling;
use crate::error::{Error, Result};
use crate::math;
use crate::matrix::Matrix;
use crate::model::{chua_nonlinearity, node_vector_field, ChuaParams, NodeState};
use crate::topology::Topology;

/// Any coordinate beyond this magnitude aborts integration.
pub const DIVERGENCE_LIMIT: f64 = 1e12;
pub const DEFAULT_DT: f64 = 1e-3;
/// Error norms below this are treated as numerical noise by
/// [`fit_decay_rate`].
pub const DECAY_FIT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub nodes: Vec<NodeState>,
}

impl NetworkState {
    pub fn synchronized(n: usize, s: NodeState) -> Self {
        NetworkState { nodes: vec![s; n] }
    }

    /// Independent uniform draws on `[-1, 1]^3` per node from a seeded ChaCha8
    /// stream.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = (0..n)
            .map(|_| {
                NodeState::new(
                    rng.gen_range(-1.0..=1.0),
                    rng.gen_range(-1.0..=1.0),
                    rng.gen_range(-1.0..=1.0),
                )
            })
            .collect();
        NetworkState { nodes }
    }

    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if !x.len().is_multiple_of(3) {
            return Err(Error::DimensionMismatch {
                expected: 3 * (x.len() / 3 + 1),
                found: x.len(),
            });
        }
        Ok(NetworkState {
            nodes: x
                .chunks_exact(3)
                .map(|c| NodeState::new(c[0], c[1], c[2]))
                .collect(),
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.nodes.iter().flat_map(|s| s.to_array()).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Input injected into node `i`: `-sum_j alpha_ij k(x1_i - x1_j)`.
#[inline]
fn coupling_input(x: &[f64], i: usize, t: &Topology, c: &SectorCoupling) -> f64 {
    let n = t.len();
    let row = &t.adjacency()[i * n..(i + 1) * n];
    let yi = x[3 * i];
    let mut u = 0.0;
    for (j, &a) in row.iter().enumerate() {
        if a != 0 {
            u -= c.eval(yi - x[3 * j]);
        }
    }
    u
}

fn network_rhs_flat(x: &[f64], dx: &mut [f64], p: &ChuaParams, t: &Topology, c: &SectorCoupling) {
    for i in 0..t.len() {
        let s = NodeState::new(x[3 * i], x[3 * i + 1], x[3 * i + 2]);
        let d = node_vector_field(s, coupling_input(x, i, t, c), p);
        dx[3 * i] = d.x1;
        dx[3 * i + 1] = d.x2;
        dx[3 * i + 2] = d.x3;
    }
}

/// Derivative of every node of the coupled network; coupling acts on the
/// first coordinate only.
pub fn network_rhs(
    s: &NetworkState,
    p: &ChuaParams,
    t: &Topology,
    c: &SectorCoupling,
) -> Result<NetworkState> {
    if s.len() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            found: s.len(),
        });
    }
    let x = s.to_flat();
    let mut dx = vec![0.0; x.len()];
    network_rhs_flat(&x, &mut dx, p, t, c);
    NetworkState::from_flat(&dx)
}

/// Synchronization error of one non-pivot node: `e = x1_i - x1_p` and
/// `eta = (x2_i - x2_p, x3_i - x3_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeError {
    pub e: f64,
    pub eta: [f64; 2],
}

impl NodeError {
    pub fn between(node: NodeState, pivot: NodeState) -> Self {
        NodeError {
            e: node.x1 - pivot.x1,
            eta: [node.x2 - pivot.x2, node.x3 - pivot.x3],
        }
    }

    pub fn eta_norm(&self) -> f64 {
        math::sqrt(self.eta[0] * self.eta[0] + self.eta[1] * self.eta[1])
    }
}

fn check_error_inputs(errors: &[NodeError], t: &Topology, pivot: usize) -> Result<()> {
    if pivot >= t.len() {
        return Err(Error::IndexOutOfRange {
            index: pivot,
            len: t.len(),
        });
    }
    if errors.len() + 1 != t.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len() - 1,
            found: errors.len(),
        });
    }
    Ok(())
}

/// First error coordinate of every node, with zero at the pivot.
fn full_errors(errors: &[NodeError], n: usize, pivot: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    let mut it = errors.iter();
    for (i, slot) in e.iter_mut().enumerate() {
        if i != pivot {
            *slot = it.next().expect("length checked").e;
        }
    }
    e
}

fn eta_rhs(err: &NodeError, p: &ChuaParams) -> [f64; 2] {
    [
        err.e - err.eta[0] + err.eta[1],
        -p.beta() * err.eta[0] - p.gamma() * err.eta[1],
    ]
}

/// Error dynamics relative to `pivot`, written directly in the error
/// coordinates:
///
/// ```text
/// e_i'   = -alpha e_i - alpha f~(e_i) + alpha eta_i1
///          - sum_j (alpha_ij k(e_i - e_j) - alpha_pj k(-e_j))
/// eta_i' = (e_i, 0) + A0 eta_i
/// ```
///
/// with `f~(e) = f(z1 + e) - f(z1)` and `z1` the pivot's first coordinate.
/// `errors` lists the non-pivot nodes in ascending index.
pub fn error_rhs(
    errors: &[NodeError],
    z1: f64,
    p: &ChuaParams,
    t: &Topology,
    c: &SectorCoupling,
    pivot: usize,
) -> Result<Vec<NodeError>> {
    check_error_inputs(errors, t, pivot)?;
    let n = t.len();
    let e = full_errors(errors, n, pivot);
    let f_pivot = chua_nonlinearity(z1, p);
    let alpha = p.alpha();
    let nodes = t.non_pivot_nodes(pivot);
    Ok(nodes
        .iter()
        .zip(errors)
        .map(|(&i, err)| {
            let f_tilde = chua_nonlinearity(z1 + err.e, p) - f_pivot;
            let mut coupling = 0.0;
            for j in 0..n {
                coupling += f64::from(t.entry(i, j)) * c.eval(e[i] - e[j])
                    - f64::from(t.entry(pivot, j)) * c.eval(-e[j]);
            }
            NodeError {
                e: -alpha * err.e - alpha * f_tilde + alpha * err.eta[0] - coupling,
                eta: eta_rhs(err, p),
            }
        })
        .collect())
}

/// Same dynamics as [`error_rhs`], expanded around the upper sector slope
/// with residual connectivity coefficients:
///
/// ```text
/// e_i' = -(alpha + kappa_i k2) e_i - alpha f~(e_i) + alpha eta_i1
///        - sum_j (alpha_ij (k~(e_i - e_j) + k~(e_j)) + alpha~_ij k(e_j))
/// ```
pub fn error_rhs_residual_form(
    errors: &[NodeError],
    z1: f64,
    p: &ChuaParams,
    t: &Topology,
    c: &SectorCoupling,
    pivot: usize,
) -> Result<Vec<NodeError>> {
    check_error_inputs(errors, t, pivot)?;
    let n = t.len();
    let e = full_errors(errors, n, pivot);
    let residual = t.residual_coefficients(pivot)?;
    let f_pivot = chua_nonlinearity(z1, p);
    let alpha = p.alpha();
    let k2 = c.k2();
    let nodes = t.non_pivot_nodes(pivot);
    let mut out = Vec::with_capacity(errors.len());
    for (&i, err) in nodes.iter().zip(errors) {
        let kappa = t.degree(i)? as f64;
        let f_tilde = chua_nonlinearity(z1 + err.e, p) - f_pivot;
        let mut sum = 0.0;
        for j in 0..n {
            sum += f64::from(t.entry(i, j)) * (c.tilde(e[i] - e[j]) + c.tilde(e[j]))
                + f64::from(residual.get(i, j)) * c.eval(e[j]);
        }
        out.push(NodeError {
            e: -(alpha + kappa * k2) * err.e - alpha * f_tilde + alpha * err.eta[0] - sum,
            eta: eta_rhs(err, p),
        });
    }
    Ok(out)
}

/// Uniformly sampled solution of an autonomous or time-dependent ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    dim: usize,
    data: Vec<f64>,
    /// Integration step.
    pub dt: f64,
    /// Integration steps between stored samples.
    pub sample_every: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// State of node `i` at sample `k`, for network trajectories.
    pub fn node(&self, k: usize, i: usize) -> NodeState {
        let s = self.state(k);
        NodeState::new(s[3 * i], s[3 * i + 1], s[3 * i + 2])
    }

    pub fn node_count(&self) -> usize {
        self.dim / 3
    }

    pub fn sample_interval(&self) -> f64 {
        self.dt * self.sample_every as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.times
            .iter()
            .copied()
            .zip(self.data.chunks_exact(self.dim.max(1)))
    }
}

fn check_step(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument("dt must be positive"));
    }
    if !(t_end.is_finite() && t_end >= dt) {
        return Err(Error::InvalidArgument("t_end must be at least dt"));
    }
    Ok(libm::round(t_end / dt) as usize)
}

/// Reusable RK4 stage buffers.
struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(dim: usize) -> Self {
        Rk4 {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    fn step<F: FnMut(f64, &[f64], &mut [f64])>(
        &mut self,
        rhs: &mut F,
        t: f64,
        x: &mut [f64],
        dt: f64,
    ) {
        let half = 0.5 * dt;
        rhs(t, x, &mut self.k1);
        for ((tmp, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k1) {
            *tmp = xi + half * k;
        }
        rhs(t + half, &self.tmp, &mut self.k2);
        for ((tmp, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k2) {
            *tmp = xi + half * k;
        }
        rhs(t + half, &self.tmp, &mut self.k3);
        for ((tmp, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k3) {
            *tmp = xi + dt * k;
        }
        rhs(t + dt, &self.tmp, &mut self.k4);
        let sixth = dt / 6.0;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Classical RK4 from `t = 0` to `t_end` (rounded to a whole number of
/// steps), storing every step.
pub fn integrate<F>(rhs: F, initial: &[f64], dt: f64, t_end: f64) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    integrate_sampled(rhs, initial, dt, t_end, 1)
}

/// Classical RK4, storing every `sample_every`-th step plus the initial
/// state. Fails with [`Error::NonFiniteState`] once a coordinate exceeds
/// [`DIVERGENCE_LIMIT`] or becomes non-finite.
pub fn integrate_sampled<F>(
    mut rhs: F,
    initial: &[f64],
    dt: f64,
    t_end: f64,
    sample_every: usize,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let steps = check_step(dt, t_end)?;
    if sample_every == 0 {
        return Err(Error::InvalidArgument("sample_every must be positive"));
    }
    let dim = initial.len();
    let samples = steps / sample_every + 1;
    let mut times = Vec::with_capacity(samples);
    let mut data = Vec::with_capacity(samples * dim);
    let mut x = initial.to_vec();
    times.push(0.0);
    data.extend_from_slice(&x);
    let mut rk = Rk4::new(dim);
    for step in 0..steps {
        let t = step as f64 * dt;
        rk.step(&mut rhs, t, &mut x, dt);
        if x.iter()
            .any(|v| v.is_nan() || math::abs(*v) > DIVERGENCE_LIMIT)
        {
            return Err(Error::NonFiniteState { time: t + dt });
        }
        if (step + 1) % sample_every == 0 {
            times.push((step + 1) as f64 * dt);
            data.extend_from_slice(&x);
        }
    }
    Ok(Trajectory {
        times,
        dim,
        data,
        dt,
        sample_every,
    })
}

/// Integrates the coupled network from `initial`.
pub fn simulate_network(
    p: &ChuaParams,
    t: &Topology,
    c: &SectorCoupling,
    initial: &NetworkState,
    dt: f64,
    t_end: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    if initial.len() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            found: initial.len(),
        });
    }
    integrate_sampled(
        |_, x, dx| network_rhs_flat(x, dx, p, t, c),
        &initial.to_flat(),
        dt,
        t_end,
        sample_every,
    )
}

/// Euclidean norms `||x_j - x_pivot||` over time for every non-pivot node.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub times: Vec<f64>,
    /// Original index of each column.
    pub nodes: Vec<usize>,
    norms: Vec<f64>,
}

impl ErrorSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Norms of all non-pivot nodes at sample `k`.
    pub fn norms_at(&self, k: usize) -> &[f64] {
        let w = self.nodes.len();
        &self.norms[k * w..(k + 1) * w]
    }

    pub fn max_norm_at(&self, k: usize) -> f64 {
        self.norms_at(k).iter().copied().fold(0.0, f64::max)
    }

    pub fn final_max_norm(&self) -> f64 {
        self.max_norm_at(self.len() - 1)
    }

    /// Builds a series from explicit per-sample norms (row-major, one row
    /// per time).
    pub fn from_norms(times: Vec<f64>, nodes: Vec<usize>, norms: Vec<f64>) -> Result<Self> {
        if norms.len() != times.len() * nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len() * nodes.len(),
                found: norms.len(),
            });
        }
        Ok(ErrorSeries {
            times,
            nodes,
            norms,
        })
    }
}

pub fn error_series(traj: &Trajectory, pivot: usize) -> Result<ErrorSeries> {
    let n = traj.node_count();
    if pivot >= n {
        return Err(Error::IndexOutOfRange {
            index: pivot,
            len: n,
        });
    }
    let nodes: Vec<usize> = (0..n).filter(|&i| i != pivot).collect();
    let mut norms = Vec::with_capacity(traj.len() * nodes.len());
    for k in 0..traj.len() {
        let xp = traj.node(k, pivot);
        norms.extend(nodes.iter().map(|&j| (traj.node(k, j) - xp).norm()));
    }
    Ok(ErrorSeries {
        times: traj.times.clone(),
        nodes,
        norms,
    })
}

/// Least-squares slope of `ln(max_j ||e_j||)` against `t` over samples with
/// `window.0 <= t <= window.1`.
pub fn fit_decay_rate(es: &ErrorSeries, window: (f64, f64)) -> Result<f64> {
    let (t0, t1) = window;
    let mut n = 0.0;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..es.len() {
        let t = es.times[k];
        if t < t0 || t > t1 {
            continue;
        }
        let m = es.max_norm_at(k);
        if m.is_nan() || m <= DECAY_FIT_FLOOR {
            return Err(Error::DegenerateWindow);
        }
        let y = math::ln(m);
        n += 1.0;
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
    }
    let denom = n * sxx - sx * sx;
    if n < 2.0 || denom <= 0.0 {
        return Err(Error::DegenerateWindow);
    }
    Ok((n * sxy - sx * sy) / denom)
}

/// Outcome of [`dominance_check`]. Violations are `|e_i| - sigma_i` and
/// `||eta_i|| - chi_i`, maximized over time and nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceReport {
    pub worst: f64,
    pub worst_sigma: f64,
    pub worst_chi: f64,
    /// Time of the overall worst violation.
    pub worst_time: f64,
    /// Largest initial comparison component, `max_i max(|e_i(0)|, ||eta_i(0)||)`.
    pub initial_scale: f64,
}

impl DominanceReport {
    /// `worst / initial_scale`, or `worst` itself for zero initial errors.
    pub fn relative(&self) -> f64 {
        if self.initial_scale > 0.0 {
            self.worst / self.initial_scale
        } else {
            self.worst
        }
    }
}

/// Integrates `z' = M z` from `sigma_i(0) = |e_i(0)|`, `chi_i(0) = ||eta_i(0)||`
/// with the trajectory's own step and compares it with the simulated errors
/// at every stored sample.
pub fn dominance_check(traj: &Trajectory, m: &Matrix, pivot: usize) -> Result<DominanceReport> {
    let n = traj.node_count();
    if pivot >= n {
        return Err(Error::IndexOutOfRange {
            index: pivot,
            len: n,
        });
    }
    if !m.is_square() || m.rows() != 2 * (n - 1) {
        return Err(Error::DimensionMismatch {
            expected: 2 * (n - 1),
            found: m.rows(),
        });
    }
    let nodes: Vec<usize> = (0..n).filter(|&i| i != pivot).collect();
    let errors_at = |k: usize| -> Vec<NodeError> {
        let xp = traj.node(k, pivot);
        nodes
            .iter()
            .map(|&j| NodeError::between(traj.node(k, j), xp))
            .collect()
    };

    let e0 = errors_at(0);
    let z0 = ComparisonState {
        sigma: e0.iter().map(|e| math::abs(e.e)).collect(),
        chi: e0.iter().map(NodeError::eta_norm).collect(),
    };
    let initial_scale = z0.sigma.iter().chain(&z0.chi).copied().fold(0.0, f64::max);
    let mut z = z0.to_vec();
    let w = nodes.len();
    let mut rk = Rk4::new(z.len());
    let mut rhs = |_: f64, x: &[f64], dx: &mut [f64]| {
        m.mul_vec_into(x, dx).expect("dimensions checked");
    };

    let mut report = DominanceReport {
        worst: f64::NEG_INFINITY,
        worst_sigma: f64::NEG_INFINITY,
        worst_chi: f64::NEG_INFINITY,
        worst_time: 0.0,
        initial_scale,
    };
    let mut step = 0usize;
    for k in 0..traj.len() {
        let target = k * traj.sample_every;
        while step < target {
            rk.step(&mut rhs, step as f64 * traj.dt, &mut z, traj.dt);
            step += 1;
        }
        for (r, err) in errors_at(k).iter().enumerate() {
            let vs = math::abs(err.e) - z[r];
            let vc = err.eta_norm() - z[w + r];
            report.worst_sigma = report.worst_sigma.max(vs);
            report.worst_chi = report.worst_chi.max(vc);
            if vs.max(vc) > report.worst {
                report.worst = vs.max(vc);
                report.worst_time = traj.times[k];
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::build_m;
    use proptest::prelude::*;

    fn example1() -> ChuaParams {
        ChuaParams::new(15.61, 25.581, 0.0, -1.142, -0.715).unwrap()
    }

    fn example2() -> ChuaParams {
        ChuaParams::new(10.0, 15.0, 0.1, -1.31, -0.75).unwrap()
    }

    #[test]
    fn synchronized_state_has_uncoupled_derivative() {
        let p = example1();
        let c = SectorCoupling::linear_plus_arctan(3.0).unwrap();
        let s = NodeState::new(0.3, -0.2, 0.7);
        let d = network_rhs(
            &NetworkState::synchronized(5, s),
            &p,
            &Topology::complete(5),
            &c,
        )
        .unwrap();
        assert!(d.nodes.iter().all(|n| *n == node_vector_field(s, 0.0, &p)));

        let single = network_rhs(
            &NetworkState::synchronized(1, s),
            &p,
            &Topology::empty(1),
            &c,
        )
        .unwrap();
        assert_eq!(single.nodes[0], node_vector_field(s, 0.0, &p));
    }

    #[test]
    fn two_node_coupling_by_hand() {
        let p = example2();
        let c = SectorCoupling::linear_plus_arctan(2.0).unwrap();
        let delta = 0.4;
        let a = NodeState::new(0.1, 0.2, -0.3);
        let b = NodeState::new(0.1 + delta, 0.2, -0.3);
        let state = NetworkState { nodes: vec![a, b] };
        let d = network_rhs(&state, &p, &Topology::complete(2), &c).unwrap();
        let kd = 2.0 * delta + delta.atan();
        let fa = node_vector_field(a, 0.0, &p);
        let fb = node_vector_field(b, 0.0, &p);
        // node 0 sees k(y0 - y1) = k(-delta) = -k(delta)
        assert!((d.nodes[0].x1 - (fa.x1 + kd)).abs() < 1e-14);
        assert!((d.nodes[1].x1 - (fb.x1 - kd)).abs() < 1e-14);
        assert_eq!((d.nodes[0].x2, d.nodes[0].x3), (fa.x2, fa.x3));
        assert!(network_rhs(&state, &p, &Topology::complete(3), &c).is_err());
    }

    #[test]
    fn zero_errors_are_stationary() {
        let p = example1();
        let c = SectorCoupling::linear_plus_arctan(3.0).unwrap();
        let t = Topology::ring(5);
        let zero = vec![NodeError::default(); 4];
        let d = error_rhs(&zero, 0.7, &p, &t, &c, 2).unwrap();
        assert!(d.iter().all(|e| *e == NodeError::default()));
        assert!(error_rhs(&zero[..3], 0.7, &p, &t, &c, 2).is_err());
        assert!(error_rhs(&zero, 0.7, &p, &t, &c, 5).is_err());
    }

    #[test]
    fn rk4_scalar_decay() {
        let traj = integrate(|_, x, dx| dx[0] = -x[0], &[1.0], 0.01, 1.0).unwrap();
        assert_eq!(traj.len(), 101);
        assert!((traj.last_state()[0] - (-1.0f64).exp()).abs() < 1e-9);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
    }

    #[test]
    fn rk4_constant_and_errors() {
        let traj = integrate(|_, _, dx| dx.fill(0.0), &[2.0, -3.0], 0.1, 1.0).unwrap();
        assert!(traj.iter().all(|(_, s)| s == [2.0, -3.0]));
        assert!(integrate(|_, _, dx| dx.fill(0.0), &[0.0], 0.0, 1.0).is_err());
        assert!(integrate(|_, _, dx| dx.fill(0.0), &[0.0], 0.1, 0.05).is_err());
        let blowup = integrate(|_, x, dx| dx[0] = x[0] * x[0], &[1.0], 0.01, 2.0);
        assert!(matches!(blowup, Err(Error::NonFiniteState { time }) if time > 0.9 && time < 1.2));
    }

    #[test]
    fn rk4_harmonic_energy_drift() {
        let traj = integrate(
            |_, x, dx| {
                dx[0] = x[1];
                dx[1] = -x[0];
            },
            &[1.0, 0.0],
            0.01,
            100.0,
        )
        .unwrap();
        let drift = traj
            .iter()
            .map(|(_, s)| (0.5 * (s[0] * s[0] + s[1] * s[1]) - 0.5).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-6, "{drift}");
    }

    #[test]
    fn sampled_trajectory_matches_full() {
        let rhs = |_: f64, x: &[f64], dx: &mut [f64]| dx[0] = -2.0 * x[0] + 1.0;
        let full = integrate(rhs, &[0.3], 0.01, 1.0).unwrap();
        let sparse = integrate_sampled(rhs, &[0.3], 0.01, 1.0, 10).unwrap();
        assert_eq!(sparse.len(), 11);
        for k in 0..sparse.len() {
            assert_eq!(sparse.state(k), full.state(10 * k));
            assert_eq!(sparse.times[k], full.times[10 * k]);
        }
    }

    #[test]
    fn identical_initial_conditions_stay_synchronized() {
        let p = example1();
        let c = SectorCoupling::linear_plus_arctan(3.0).unwrap();
        let init = NetworkState::synchronized(4, NodeState::new(0.1, 0.0, 0.0));
        let traj =
            simulate_network(&p, &Topology::complete(4), &c, &init, 1e-3, 100.0, 100).unwrap();
        let es = error_series(&traj, 0).unwrap();
        assert!((0..es.len()).all(|k| es.max_norm_at(k) < 1e-10));
        assert!(error_series(&traj, 4).is_err());
    }

    #[test]
    fn decay_fit_on_synthetic_series() {
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        let exp: Vec<f64> = times.iter().map(|t| (-2.0 * t).exp()).collect();
        let es = ErrorSeries::from_norms(times.clone(), vec![1], exp).unwrap();
        assert!((fit_decay_rate(&es, (0.0, 10.0)).unwrap() + 2.0).abs() < 1e-6);

        let flat = ErrorSeries::from_norms(times.clone(), vec![1], vec![0.5; 101]).unwrap();
        assert!(fit_decay_rate(&flat, (0.0, 10.0)).unwrap().abs() < 1e-12);

        let zero = ErrorSeries::from_norms(times, vec![1], vec![0.0; 101]).unwrap();
        assert_eq!(
            fit_decay_rate(&zero, (0.0, 10.0)),
            Err(Error::DegenerateWindow)
        );
        assert_eq!(
            fit_decay_rate(&flat, (20.0, 30.0)),
            Err(Error::DegenerateWindow)
        );
    }

    #[test]
    fn dominance_trivial_for_zero_errors() {
        let p = example2();
        let c = SectorCoupling::linear(21.3).unwrap();
        let t = Topology::complete(2);
        let init = NetworkState::synchronized(2, NodeState::new(0.2, 0.1, -0.1));
        let traj = simulate_network(&p, &t, &c, &init, 1e-3, 5.0, 10).unwrap();
        let m = build_m(&p, &t, 0, 21.3, 21.3).unwrap();
        let r = dominance_check(&traj, &m, 0).unwrap();
        assert_eq!((r.worst, r.initial_scale, r.relative()), (0.0, 0.0, 0.0));
        assert!(dominance_check(&traj, &Matrix::identity(3), 0).is_err());
    }

    #[test]
    fn comparison_flow_stays_nonnegative() {
        let p = example1();
        let t = Topology::path(5);
        let m = build_m(&p, &t, 0, 2.0, 3.0).unwrap();
        let z0: Vec<f64> = (0..8).map(|i| (i % 3) as f64 * 0.5).collect();
        let traj = integrate(|_, x, dx| m.mul_vec_into(x, dx).unwrap(), &z0, 1e-3, 1.0).unwrap();
        assert!(traj.iter().all(|(_, s)| s.iter().all(|&v| v >= 0.0)));
    }

    #[test]
    fn random_initial_states_are_reproducible() {
        let a = NetworkState::random(20, 7);
        assert_eq!(a, NetworkState::random(20, 7));
        assert_ne!(a, NetworkState::random(20, 8));
        assert!(a.to_flat().iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    fn arb_case() -> impl Strategy<Value = (Topology, usize, Vec<f64>)> {
        (2usize..=10).prop_flat_map(|n| {
            (
                proptest::collection::vec(0u8..2, n * n),
                0..n,
                proptest::collection::vec(-3.0f64..3.0, 3 * n),
            )
                .prop_map(move |(mut adj, pivot, x)| {
                    for i in 0..n {
                        adj[i * n + i] = 0;
                    }
                    (Topology::from_matrix(n, adj).unwrap(), pivot, x)
                })
        })
    }

    proptest! {
        #[test]
        fn error_rhs_is_difference_of_network_rhs((t, pivot, x) in arb_case()) {
            let p = example1();
            for c in [SectorCoupling::linear_plus_arctan(3.0).unwrap(), SectorCoupling::saturated_linear(4.0, 0.7).unwrap()] {
                let s = NetworkState::from_flat(&x).unwrap();
                let d = network_rhs(&s, &p, &t, &c).unwrap();
                let xp = s.nodes[pivot];
                let errs: Vec<NodeError> = t.non_pivot_nodes(pivot).iter()
                    .map(|&i| NodeError::between(s.nodes[i], xp)).collect();
                let direct = error_rhs(&errs, xp.x1, &p, &t, &c, pivot).unwrap();
                let expanded = error_rhs_residual_form(&errs, xp.x1, &p, &t, &c, pivot).unwrap();
                for ((&i, de), ex) in t.non_pivot_nodes(pivot).iter().zip(&direct).zip(&expanded) {
                    let diff = NodeError::between(d.nodes[i], d.nodes[pivot]);
                    prop_assert!((de.e - diff.e).abs() < 1e-12, "{} vs {}", de.e, diff.e);
                    prop_assert!((de.eta[0] - diff.eta[0]).abs() < 1e-12);
                    prop_assert!((de.eta[1] - diff.eta[1]).abs() < 1e-12);
                    prop_assert!((ex.e - de.e).abs() < 1e-12, "{} vs {}", ex.e, de.e);
                    prop_assert_eq!(ex.eta, de.eta);
                }
            }
        }
    }

    fn terminal_state(init: &NetworkState, dt: f64) -> Vec<f64> {
        let c = SectorCoupling::linear_plus_arctan(3.0).unwrap();
        let traj = simulate_network(&example1(), &Topology::ring(5), &c, init, dt, 1.0, 1).unwrap();
        traj.last_state().to_vec()
    }

    fn convergence_ratio(init: &NetworkState, dt: f64) -> (f64, f64) {
        let reference = terminal_state(init, dt / 8.0);
        let coarse = distance(&terminal_state(init, dt), &reference);
        let fine = distance(&terminal_state(init, dt / 2.0), &reference);
        (coarse, fine)
    }

    fn distance(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn rk4_is_fourth_order_on_the_network() {
        // small states stay inside |x1| < 1 where the vector field is smooth
        let init = NetworkState {
            nodes: (0..5)
                .map(|i| NodeState::new(0.01 * i as f64, 0.0, 0.0))
                .collect(),
        };
        for dt in [0.01, 0.004] {
            let (coarse, fine) = convergence_ratio(&init, dt);
            let ratio = coarse / fine;
            assert!((14.0..=18.0).contains(&ratio), "dt {dt}: ratio {ratio}");
        }
    }

    #[test]
    fn rk4_converges_across_breakpoints() {
        // crossing |x1| = 1 costs the formal order, but errors still shrink
        let init = NetworkState::random(5, 3);
        let (coarse, fine) = convergence_ratio(&init, 0.01);
        assert!(coarse / fine > 2.0, "{coarse} {fine}");
        assert!(fine < 1e-4);
    }

    #[test]
    fn coupled_example1_stays_bounded() {
        let c = SectorCoupling::linear_plus_arctan(3.0).unwrap();
        for seed in [1, 2, 3] {
            let init = NetworkState::random(20, seed);
            let traj = simulate_network(
                &example1(),
                &Topology::complete(20),
                &c,
                &init,
                1e-3,
                100.0,
                100,
            )
            .unwrap();
            let peak = traj
                .iter()
                .flat_map(|(_, s)| s.iter().map(|v| v.abs()))
                .fold(0.0, f64::max);
            assert!(peak < 10.0, "seed {seed}: {peak}");
            // still moving on the attractor, not collapsed to an equilibrium
            let es = error_series(&traj, 0).unwrap();
            assert!(es.final_max_norm() < 1e-6);
            let tail: Vec<f64> = traj
                .iter()
                .filter(|(t, _)| *t >= 90.0)
                .map(|(_, s)| s[0])
                .collect();
            let spread = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - tail.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(spread > 0.1, "seed {seed}: {spread}");
        }
    }
}
