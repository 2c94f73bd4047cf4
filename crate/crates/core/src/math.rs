// Float helpers routed through libm so the crate builds without std.

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn atan(x: f64) -> f64 {
    libm::atan(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// `|a|` with the sign of `b`.
#[inline]
pub(crate) fn copysign(a: f64, b: f64) -> f64 {
    libm::copysign(a, b)
}
