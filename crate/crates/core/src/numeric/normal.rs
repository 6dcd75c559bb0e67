//! Standard normal density and distribution function.

use crate::scalar::Scalar;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn norm_pdf<T: Scalar>(u: T) -> T {
    let u = u.as_f64();
    T::lit(INV_SQRT_2PI * (-0.5 * u * u).exp())
}

/// `Phi(u) = erfc(-u / sqrt 2) / 2`, evaluated through the complementary error
/// function so both tails keep full relative accuracy.
pub fn norm_cdf<T: Scalar>(u: T) -> T {
    let u = u.as_f64();
    T::lit(0.5 * libm::erfc(-u * std::f64::consts::FRAC_1_SQRT_2))
}
