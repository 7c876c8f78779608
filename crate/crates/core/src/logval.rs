//! Nonnegative reals stored by their natural logarithm.
//!
//! Partition sums, fiber sums and potential values grow or decay
//! exponentially in the word length, so every such quantity is carried as a
//! [`LogValue`]. Zero is represented by `-inf`.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Div, Mul};

use crate::math::{self, CompensatedSum};

/// A nonnegative real `exp(self.0)`.
#[derive(Clone, Copy, PartialEq, Default)]
#[repr(transparent)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);

    /// Wraps a logarithm. `NaN` and `+inf` are rejected by debug assertions.
    #[inline]
    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan() && ln != f64::INFINITY, "bad log value {ln}");
        LogValue(ln)
    }

    #[inline]
    pub fn from_linear(x: f64) -> Self {
        debug_assert!(x >= 0.0, "negative value {x}");
        if x == 0.0 {
            Self::ZERO
        } else {
            LogValue(math::ln(x))
        }
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn linear(self) -> f64 {
        math::exp(self.0)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// `self^s` for `s > 0`; zero stays zero.
    #[inline]
    pub fn powf(self, s: f64) -> Self {
        if self.is_zero() {
            self
        } else {
            LogValue(self.0 * s)
        }
    }

    /// Quotient with the `0/0 = 0` convention.
    #[inline]
    pub fn ratio(self, rhs: Self) -> Self {
        if self.is_zero() {
            Self::ZERO
        } else {
            LogValue(self.0 - rhs.0)
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            Self::ZERO
        } else {
            LogValue(self.0 + rhs.0)
        }
    }
}

impl Div for LogValue {
    type Output = LogValue;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        self.ratio(rhs)
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl fmt::Debug for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})", self.0)
    }
}

/// Streaming log-sum-exp. The running maximum is factored out and the scaled
/// terms are added with compensation, so the result depends only on the
/// order in which terms arrive.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    scaled: CompensatedSum,
}

impl Default for LogSum {
    fn default() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            scaled: CompensatedSum::default(),
        }
    }
}

impl LogSum {
    #[inline]
    pub fn add(&mut self, v: LogValue) {
        let x = v.0;
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            if self.max != f64::NEG_INFINITY {
                let rescale = math::exp(self.max - x);
                let prev = self.scaled.value() * rescale;
                self.scaled = CompensatedSum::default();
                self.scaled.add(prev);
            }
            self.scaled.add(1.0);
            self.max = x;
        } else {
            self.scaled.add(math::exp(x - self.max));
        }
    }

    #[inline]
    pub fn value(&self) -> LogValue {
        if self.max == f64::NEG_INFINITY {
            LogValue::ZERO
        } else {
            LogValue(self.max + math::ln(self.scaled.value()))
        }
    }
}

/// Two-pass log-sum-exp over a slice.
pub fn log_sum_exp(values: &[LogValue]) -> LogValue {
    let max = values
        .iter()
        .map(|v| v.0)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogValue::ZERO;
    }
    let s = math::compensated_sum(values.iter().map(|v| math::exp(v.0 - max)));
    LogValue(max + math::ln(s))
}

/// `ln(exp(a) + exp(b))` for raw logarithms.
#[inline]
pub fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + math::ln_1p(math::exp(lo - hi))
}
