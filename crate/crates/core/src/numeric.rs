//! Small numerically stable primitives shared by the oracles and the bounds.

/// Probabilities at or below this are treated as zero in likelihood-ratio audits.
pub const TINY_PROB: f64 = 1e-300;

/// `log(sum(exp(xs)))`, returning `-inf` for an empty or all-`-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// `log(1 + exp(-x))` for `x >= 0`; underflows cleanly to 0 for large `x`.
pub fn log1p_exp_neg(x: f64) -> f64 {
    if x == f64::INFINITY {
        0.0
    } else {
        (-x).exp().ln_1p()
    }
}

/// Neumaier-compensated sum.
pub fn stable_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `log C(n + k, k)`.
///
/// Sums `log1p(n / i)` over the smaller of the two arguments, which keeps full
/// relative precision where a difference of log-gamma values would cancel.
/// Falls back to log-gamma when the smaller argument exceeds 2^24.
pub fn log_binomial_stars(n: u64, k: u64) -> f64 {
    let (big, small) = if n >= k { (n, k) } else { (k, n) };
    if small == 0 {
        return 0.0;
    }
    if small <= 1 << 24 {
        let b = big as f64;
        stable_sum((1..=small).map(|i| (b / i as f64).ln_1p()))
    } else {
        use statrs::function::gamma::ln_gamma;
        ln_gamma((n + k) as f64 + 1.0) - ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0)
    }
}

/// `log(k!)`.
pub fn ln_factorial(k: u64) -> f64 {
    statrs::function::factorial::ln_factorial(k)
}

/// Serializes `f64` as a JSON number when finite and as the strings
/// `"infinity"`, `"-infinity"` or `"nan"` otherwise.
pub mod extended_f64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("infinity")
        } else {
            s.serialize_str("-infinity")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "infinity" | "inf" => Ok(f64::INFINITY),
                "-infinity" | "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!("invalid number '{other}'"))),
            },
        }
    }
}
