//! Sector-bounded coupling functions.
//!
//! A coupling `k` is odd, continuous and locally Lipschitz, and lies in the
//! sector `k1 |e| <= |k(e)| <= k2 |e|` with `k2 >= k1 >= 0`. Built-in
//! couplings carry analytically known sector constants:
//!
//! * `linear`: `k(e) = g e`, sector `(g, g)`.
//! * `linear_plus_arctan`: `k(e) = c e + atan(e)`. Since `0 <= atan(e)/e <= 1`
//!   for `e != 0`, the sector is `(c, c + 1)`.
//! * `saturated_linear`: `k(e) = g clamp(e, -s, s)`. The ratio `k(e)/e` falls
//!   from `g` to `0` as `|e|` grows, so the sector is `(0, g)`.
//!
//! Anything else enters through [`SectorCoupling::custom`] with an explicit
//! claim that [`verify_sector`] can audit by sampling. Sampling never proves
//! global sector membership.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math;

/// Default half-width of the sampling interval used by [`verify_sector`].
pub const DEFAULT_SAMPLING_RANGE: f64 = 1e3;

const SECTOR_SEED: u64 = 0x5EC7_0A11;
const LEMMA_SEED: u64 = 0x1E_77A1;

pub type CouplingFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum CouplingKind {
    Linear { gain: f64 },
    LinearPlusArctan { slope: f64 },
    SaturatedLinear { gain: f64, limit: f64 },
    Custom { name: String, func: CouplingFn },
}

impl fmt::Debug for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingKind::Linear { gain } => f.debug_struct("Linear").field("gain", gain).finish(),
            CouplingKind::LinearPlusArctan { slope } => f
                .debug_struct("LinearPlusArctan")
                .field("slope", slope)
                .finish(),
            CouplingKind::SaturatedLinear { gain, limit } => f
                .debug_struct("SaturatedLinear")
                .field("gain", gain)
                .field("limit", limit)
                .finish(),
            CouplingKind::Custom { name, .. } => f
                .debug_struct("Custom")
                .field("name", name)
                .finish_non_exhaustive(),
        }
    }
}

/// A coupling function together with its claimed sector constants.
#[derive(Clone, Debug)]
pub struct SectorCoupling {
    kind: CouplingKind,
    k1: f64,
    k2: f64,
}

fn check_sector(k1: f64, k2: f64) -> Result<()> {
    if k1.is_finite() && k2.is_finite() && k1 >= 0.0 && k2 >= k1 {
        Ok(())
    } else {
        Err(Error::InvalidSector { k1, k2 })
    }
}

fn check_gain(g: f64) -> Result<()> {
    if g.is_finite() && g > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveGain(g))
    }
}

impl SectorCoupling {
    pub fn linear(gain: f64) -> Result<Self> {
        check_gain(gain)?;
        Ok(SectorCoupling {
            kind: CouplingKind::Linear { gain },
            k1: gain,
            k2: gain,
        })
    }

    pub fn linear_plus_arctan(slope: f64) -> Result<Self> {
        check_gain(slope)?;
        Ok(SectorCoupling {
            kind: CouplingKind::LinearPlusArctan { slope },
            k1: slope,
            k2: slope + 1.0,
        })
    }

    pub fn saturated_linear(gain: f64, limit: f64) -> Result<Self> {
        check_gain(gain)?;
        if !(limit.is_finite() && limit > 0.0) {
            return Err(Error::InvalidArgument("saturation limit must be positive"));
        }
        Ok(SectorCoupling {
            kind: CouplingKind::SaturatedLinear { gain, limit },
            k1: 0.0,
            k2: gain,
        })
    }

    /// User-supplied coupling with claimed sector `(k1, k2)`. The function
    /// must be odd, continuous and locally Lipschitz; the claim is not
    /// checked here, see [`verify_sector`].
    pub fn custom(
        name: impl Into<String>,
        func: impl Fn(f64) -> f64 + Send + Sync + 'static,
        k1: f64,
        k2: f64,
    ) -> Result<Self> {
        check_sector(k1, k2)?;
        Ok(SectorCoupling {
            kind: CouplingKind::Custom {
                name: name.into(),
                func: Arc::new(func),
            },
            k1,
            k2,
        })
    }

    /// Replaces the sector claim, keeping the function.
    pub fn with_sector(self, k1: f64, k2: f64) -> Result<Self> {
        check_sector(k1, k2)?;
        Ok(SectorCoupling { k1, k2, ..self })
    }

    #[inline]
    pub fn eval(&self, e: f64) -> f64 {
        match &self.kind {
            CouplingKind::Linear { gain } => gain * e,
            CouplingKind::LinearPlusArctan { slope } => slope * e + math::atan(e),
            CouplingKind::SaturatedLinear { gain, limit } => gain * e.clamp(-limit, *limit),
            CouplingKind::Custom { func, .. } => func(e),
        }
    }

    /// `k~(e) = k(e) - k2 e`; lies in the second/fourth quadrants.
    #[inline]
    pub fn tilde(&self, e: f64) -> f64 {
        self.eval(e) - self.k2 * e
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn kind(&self) -> &CouplingKind {
        &self.kind
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            CouplingKind::Linear { .. } => "linear",
            CouplingKind::LinearPlusArctan { .. } => "linear_plus_arctan",
            CouplingKind::SaturatedLinear { .. } => "saturated_linear",
            CouplingKind::Custom { name, .. } => name,
        }
    }

    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        match &self.kind {
            CouplingKind::Linear { gain } => vec![("gain", *gain)],
            CouplingKind::LinearPlusArctan { slope } => vec![("slope", *slope)],
            CouplingKind::SaturatedLinear { gain, limit } => {
                vec![("gain", *gain), ("limit", *limit)]
            }
            CouplingKind::Custom { .. } => Vec::new(),
        }
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 3] = ["linear", "linear_plus_arctan", "saturated_linear"];

/// Looks up a built-in coupling by name. Parameters are matched by name
/// (`gain`, `slope`, `limit`); unknown or missing ones are rejected.
pub fn builtin(name: &str, params: &[(&str, f64)]) -> Result<SectorCoupling> {
    let expected: &[&str] = match name {
        "linear" => &["gain"],
        "linear_plus_arctan" => &["slope"],
        "saturated_linear" => &["gain", "limit"],
        _ => return Err(Error::InvalidArgument("unknown coupling name")),
    };
    if params.iter().any(|(k, _)| !expected.contains(k)) {
        return Err(Error::InvalidArgument("unexpected coupling parameter"));
    }
    let get = |key: &str| {
        params
            .iter()
            .find(|(k, _)| *k == key)
            .map(|&(_, v)| v)
            .ok_or(Error::InvalidArgument("missing coupling parameter"))
    };
    match name {
        "linear" => SectorCoupling::linear(get("gain")?),
        "linear_plus_arctan" => SectorCoupling::linear_plus_arctan(get("slope")?),
        _ => SectorCoupling::saturated_linear(get("gain")?, get("limit")?),
    }
}

/// Outcome of [`verify_sector`]. Violations are normalized by `max(1, |e|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorReport {
    pub verified: bool,
    pub worst_violation: f64,
    pub samples_tested: usize,
    pub violating_input: Option<f64>,
}

impl SectorReport {
    /// Combines reports of disjoint sample batches.
    pub fn merge(self, other: SectorReport, tolerance: f64) -> SectorReport {
        let (worst, input) = if other.worst_violation > self.worst_violation {
            (other.worst_violation, other.violating_input)
        } else {
            (self.worst_violation, self.violating_input)
        };
        SectorReport {
            verified: worst <= tolerance,
            worst_violation: worst,
            samples_tested: self.samples_tested + other.samples_tested,
            violating_input: if worst > tolerance { input } else { None },
        }
    }
}

/// Largest violation at `e` of the sign, oddness and sector inequalities.
/// Positive means violated.
fn sector_violation(c: &SectorCoupling, e: f64) -> f64 {
    let k = c.eval(e);
    let scale = 1.0f64.max(math::abs(e));
    let sign = -(k * e) / (scale * scale);
    let odd = math::abs(c.eval(-e) + k) / scale;
    let lower = (c.k1 * math::abs(e) - math::abs(k)) / scale;
    let upper = (math::abs(k) - c.k2 * math::abs(e)) / scale;
    sign.max(odd).max(lower).max(upper)
}

/// Samples the three sector inequalities on a uniform grid plus fixed-seed
/// pseudorandom points in `[-range, range]`; half of `samples` go to each.
pub fn verify_sector(
    c: &SectorCoupling,
    range: f64,
    samples: usize,
    tolerance: f64,
) -> Result<SectorReport> {
    if !(range.is_finite() && range > 0.0) {
        return Err(Error::InvalidArgument("sampling range must be positive"));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("at least two samples required"));
    }
    let grid = samples / 2;
    let random = samples - grid;
    let mut rng = ChaCha8Rng::seed_from_u64(SECTOR_SEED);
    let grid_points = (0..grid).map(|i| -range + 2.0 * range * i as f64 / (grid.max(2) - 1) as f64);
    let random_points = (0..random).map(|_| rng.gen_range(-range..=range));

    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = 0.0;
    for e in grid_points.chain(random_points) {
        let v = sector_violation(c, e);
        if v > worst || v.is_nan() {
            worst = if v.is_nan() { f64::INFINITY } else { v };
            worst_at = e;
        }
    }
    let verified = worst <= tolerance;
    Ok(SectorReport {
        verified,
        worst_violation: worst,
        samples_tested: samples,
        violating_input: if verified { None } else { Some(worst_at) },
    })
}

/// Residual of `|k~(ei - ej) + k~(ej)| <= (k2 - k1)(|ei| + |ej|)`, divided by
/// `1 + |ei| + |ej|`. Nonpositive when the inequality holds.
pub fn lemma1_residual(c: &SectorCoupling, ei: f64, ej: f64) -> f64 {
    let lhs = math::abs(c.tilde(ei - ej) + c.tilde(ej));
    let rhs = (c.k2 - c.k1) * (math::abs(ei) + math::abs(ej));
    (lhs - rhs) / (1.0 + math::abs(ei) + math::abs(ej))
}

/// Largest [`lemma1_residual`] over `pairs` fixed-seed pairs in
/// `[-range, range]^2`, with the origin always included.
pub fn check_lemma1(c: &SectorCoupling, pairs: usize, range: f64) -> Result<f64> {
    if pairs == 0 {
        return Err(Error::InvalidArgument("at least one pair required"));
    }
    if !(range.is_finite() && range > 0.0) {
        return Err(Error::InvalidArgument("sampling range must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(LEMMA_SEED);
    let mut worst = lemma1_residual(c, 0.0, 0.0);
    for _ in 1..pairs {
        let ei = rng.gen_range(-range..=range);
        let ej = rng.gen_range(-range..=range);
        let r = lemma1_residual(c, ei, ej);
        worst = if r.is_nan() {
            f64::INFINITY
        } else {
            worst.max(r)
        };
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn builtin_lookup() {
        for name in BUILTIN_NAMES {
            let params: &[(&str, f64)] = match name {
                "saturated_linear" => &[("gain", 2.0), ("limit", 1.0)],
                "linear" => &[("gain", 2.0)],
                _ => &[("slope", 2.0)],
            };
            let c = builtin(name, params).unwrap();
            assert_eq!(c.name(), name);
            assert_eq!(c.parameters(), params.to_vec());
        }
        assert!(builtin("cubic", &[]).is_err());
        assert!(builtin("linear", &[]).is_err());
        assert!(builtin("linear", &[("slope", 1.0)]).is_err());
        assert!(builtin("linear", &[("gain", -1.0)]).is_err());
    }

    fn registry() -> Vec<SectorCoupling> {
        vec![
            SectorCoupling::linear(2.0).unwrap(),
            SectorCoupling::linear(21.3).unwrap(),
            SectorCoupling::linear_plus_arctan(3.0).unwrap(),
            SectorCoupling::saturated_linear(5.0, 0.5).unwrap(),
        ]
    }

    #[test]
    fn linear_values() {
        assert_eq!(SectorCoupling::linear(21.3).unwrap().eval(1.0), 21.3);
        assert_eq!(SectorCoupling::linear(5.0).unwrap().eval(0.0), 0.0);
        assert_eq!(SectorCoupling::linear(2.0).unwrap().eval(-3.0), -6.0);
        let c = SectorCoupling::linear(21.3).unwrap();
        assert_eq!((c.k1(), c.k2()), (21.3, 21.3));
        assert_eq!(
            SectorCoupling::linear(0.0).unwrap_err(),
            Error::NonPositiveGain(0.0)
        );
        assert!(SectorCoupling::linear(-1.0).is_err());
    }

    #[test]
    fn arctan_values() {
        let c = SectorCoupling::linear_plus_arctan(3.0).unwrap();
        assert_eq!((c.k1(), c.k2()), (3.0, 4.0));
        assert_eq!(c.eval(0.0), 0.0);
        assert!((c.eval(1.0) - 3.785_398_163_397_448).abs() < 1e-12);
        assert!((c.tilde(1.0) - (-0.214_601_836_602_551_7)).abs() < 1e-12);
        assert!(SectorCoupling::linear_plus_arctan(0.0).is_err());
    }

    #[test]
    fn tilde_vanishes_for_linear_and_at_origin() {
        let lin = SectorCoupling::linear(7.0).unwrap();
        for e in [-3.0, -0.1, 0.0, 2.5, 1e3] {
            assert_eq!(lin.tilde(e), 0.0);
        }
        for c in registry() {
            assert_eq!(c.tilde(0.0), 0.0);
        }
    }

    #[test]
    fn sector_claims_verify() {
        let lin = verify_sector(&SectorCoupling::linear(2.0).unwrap(), 50.0, 1000, 1e-12).unwrap();
        assert!(lin.verified);
        assert!(lin.worst_violation <= 0.0);

        let atan = SectorCoupling::linear_plus_arctan(3.0).unwrap();
        let r = verify_sector(&atan, 100.0, 100_000, 1e-12).unwrap();
        assert!(r.verified, "{r:?}");
        assert_eq!(r.samples_tested, 100_000);
        assert_eq!(r.violating_input, None);
    }

    #[test]
    fn overclaimed_lower_slope_is_caught() {
        let c = SectorCoupling::linear_plus_arctan(3.0)
            .unwrap()
            .with_sector(5.0, 5.0)
            .unwrap();
        let r = verify_sector(&c, 100.0, 10_000, 1e-12).unwrap();
        assert!(!r.verified);
        let e = r.violating_input.unwrap();
        assert!(e.abs() > 2f64.tan().abs(), "{e}");
    }

    #[test]
    fn saturation_breaks_positive_lower_bound() {
        let c = SectorCoupling::saturated_linear(5.0, 0.5).unwrap();
        assert!(verify_sector(&c, 10.0, 1000, 1e-12).unwrap().verified);
        let claimed = c.with_sector(1.0, 5.0).unwrap();
        assert!(!verify_sector(&claimed, 10.0, 1000, 1e-12).unwrap().verified);
    }

    #[test]
    fn non_odd_custom_coupling_fails() {
        let c = SectorCoupling::custom(
            "shifted",
            |e| 2.0 * e + if e > 0.0 { 0.1 } else { 0.0 },
            2.0,
            3.0,
        )
        .unwrap();
        assert!(!verify_sector(&c, 10.0, 1000, 1e-12).unwrap().verified);
    }

    #[test]
    fn verify_sector_argument_errors() {
        let c = SectorCoupling::linear(1.0).unwrap();
        assert!(verify_sector(&c, 0.0, 10, 1e-12).is_err());
        assert!(verify_sector(&c, 1.0, 1, 1e-12).is_err());
        assert!(SectorCoupling::custom("x", |e| e, 2.0, 1.0).is_err());
        assert!(SectorCoupling::custom("x", |e| e, -1.0, 1.0).is_err());
    }

    #[test]
    fn reports_are_reproducible_and_mergeable() {
        let c = SectorCoupling::linear_plus_arctan(3.0)
            .unwrap()
            .with_sector(3.5, 4.0)
            .unwrap();
        let a = verify_sector(&c, 100.0, 500, 1e-12).unwrap();
        assert_eq!(a, verify_sector(&c, 100.0, 500, 1e-12).unwrap());
        let ok = verify_sector(&SectorCoupling::linear(1.0).unwrap(), 1.0, 10, 1e-12).unwrap();
        let merged = ok.merge(a, 1e-12);
        assert!(!merged.verified);
        assert_eq!(merged.samples_tested, 510);
        assert_eq!(merged.worst_violation, a.worst_violation);
        assert_eq!(merged.violating_input, a.violating_input);
        let swapped = a.merge(ok, 1e-12);
        assert_eq!(
            (swapped.worst_violation, swapped.verified),
            (merged.worst_violation, false)
        );
    }

    #[test]
    fn lemma1_examples() {
        let lin = SectorCoupling::linear(4.0).unwrap();
        assert_eq!(check_lemma1(&lin, 1000, 10.0).unwrap(), 0.0);
        assert_eq!(lemma1_residual(&lin, 0.0, 0.0), 0.0);
        let atan = SectorCoupling::linear_plus_arctan(3.0).unwrap();
        assert!(check_lemma1(&atan, 100_000, 10.0).unwrap() <= 0.0 + 1e-15);
        assert_eq!(lemma1_residual(&atan, 0.0, 0.0), 0.0);
        assert!(check_lemma1(&atan, 0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn registered_couplings_are_odd(e in -1e3f64..1e3) {
            for c in registry() {
                prop_assert!((c.eval(-e) + c.eval(e)).abs() <= 1e-15 * (1.0 + e.abs()));
            }
        }

        #[test]
        fn tilde_in_second_and_fourth_quadrants(e in -1e3f64..1e3) {
            for c in registry() {
                prop_assert!(c.tilde(e) * e <= 1e-12 * (1.0 + e * e));
            }
        }

        #[test]
        fn lemma1_holds_for_registry(ei in -1e3f64..1e3, ej in -1e3f64..1e3) {
            for c in registry() {
                prop_assert!(lemma1_residual(&c, ei, ej) <= 1e-12);
            }
        }
    }
}
