//! Extended-real arithmetic on `f64`.
//!
//! All criterion functionals live in `[0, +inf]`. The conventions are
//! `0 * inf = 0`, `inf / inf = 0`, `0 / 0 = 0`, and `x^p` with the usual
//! limits at `0` and `inf`. Plain `f64` arithmetic produces NaN in exactly
//! the cases these conventions resolve, so every product/quotient/power of
//! possibly-infinite quantities goes through the helpers below.

pub const INF: f64 = f64::INFINITY;

/// Product with `0 * inf = 0`.
pub fn xmul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// Quotient with `0 / 0 = 0` and `inf / inf = 0`.
pub fn xdiv(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        INF
    } else if a.is_infinite() && b.is_infinite() {
        0.0
    } else {
        a / b
    }
}

/// `a^p` for `a in [0, inf]`, `p` real, with `0^0 = inf^0 = 1`.
pub fn xpow(a: f64, p: f64) -> f64 {
    if p == 0.0 {
        return 1.0;
    }
    if a == 0.0 {
        return if p > 0.0 { 0.0 } else { INF };
    }
    if a.is_infinite() {
        return if p > 0.0 { INF } else { 0.0 };
    }
    a.powf(p)
}

/// Reciprocal with `1/0 = inf` and `1/inf = 0`.
pub fn xinv(a: f64) -> f64 {
    xdiv(1.0, a)
}

/// Relative agreement check that treats two infinities as equal.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Serde adapter mapping `+inf` to the string `"inf"` in JSON reports.
pub mod inf_str {
    use serde::de::{self, Deserializer, Unexpected};
    use serde::ser::Serializer;
    use serde::Deserialize;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) => Err(de::Error::invalid_value(
                Unexpected::Str(&s),
                &"a number or \"inf\"",
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conventions() {
        assert_eq!(xmul(0.0, INF), 0.0);
        assert_eq!(xmul(INF, 0.0), 0.0);
        assert_eq!(xmul(2.0, INF), INF);
        assert_eq!(xdiv(0.0, 0.0), 0.0);
        assert_eq!(xdiv(INF, INF), 0.0);
        assert_eq!(xdiv(1.0, 0.0), INF);
        assert_eq!(xpow(0.0, -2.0), INF);
        assert_eq!(xpow(INF, -0.5), 0.0);
        assert_eq!(xpow(0.0, 0.0), 1.0);
        assert_eq!(xinv(0.0), INF);
    }
}
