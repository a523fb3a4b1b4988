//! Float method shim so the crate builds without `std`.
//!
//! Under `std` the inherent `f64` methods are used; under `no_std` + `libm`
//! the trait below supplies the same names, so call sites are identical.

#[cfg(not(feature = "std"))]
pub(crate) trait FloatFuncs: Sized {
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn ln(self) -> Self;
    fn ln_1p(self) -> Self;
    fn exp(self) -> Self;
    fn cos(self) -> Self;
    fn sin(self) -> Self;
    fn acos(self) -> Self;
    fn asin(self) -> Self;
    fn atan2(self, other: Self) -> Self;
    fn hypot(self, other: Self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: Self) -> Self;
    fn floor(self) -> Self;
    fn log2(self) -> Self;
}

#[cfg(not(feature = "std"))]
impl FloatFuncs for f64 {
    fn abs(self) -> f64 {
        libm::fabs(self)
    }
    fn sqrt(self) -> f64 {
        libm::sqrt(self)
    }
    fn ln(self) -> f64 {
        libm::log(self)
    }
    fn ln_1p(self) -> f64 {
        libm::log1p(self)
    }
    fn exp(self) -> f64 {
        libm::exp(self)
    }
    fn cos(self) -> f64 {
        libm::cos(self)
    }
    fn sin(self) -> f64 {
        libm::sin(self)
    }
    fn acos(self) -> f64 {
        libm::acos(self)
    }
    fn asin(self) -> f64 {
        libm::asin(self)
    }
    fn atan2(self, other: f64) -> f64 {
        libm::atan2(self, other)
    }
    fn hypot(self, other: f64) -> f64 {
        libm::hypot(self, other)
    }
    fn powi(self, n: i32) -> f64 {
        libm::pow(self, n as f64)
    }
    fn powf(self, p: f64) -> f64 {
        libm::pow(self, p)
    }
    fn floor(self) -> f64 {
        libm::floor(self)
    }
    fn log2(self) -> f64 {
        libm::log2(self)
    }
}
