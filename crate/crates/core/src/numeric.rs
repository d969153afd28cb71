//! Log-domain helpers.

/// `ln(e^a + e^b)` without overflow; `-inf` is the additive identity.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 - e^a)` for `a <= 0`, accurate on both ends of the range.
pub fn log1m_exp(a: f64) -> f64 {
    if a > -std::f64::consts::LN_2 {
        (-a.exp_m1()).ln()
    } else {
        (-a.exp()).ln_1p()
    }
}

/// `ln(1 + n)` for an index that may exceed the f64 range, given `ln n`.
pub fn log1p_index(n: f64, ln_n: f64) -> f64 {
    if n.is_finite() {
        n.ln_1p()
    } else {
        ln_n
    }
}

/// Serde adapter writing non-finite floats as the strings `"inf"`, `"-inf"`
/// and `"nan"`, since JSON has no literal for them.
pub mod ext_f64 {
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn to_repr(v: f64) -> serde_json::Value {
        if v.is_finite() {
            serde_json::json!(v)
        } else if v.is_nan() {
            serde_json::json!("nan")
        } else if v > 0.0 {
            serde_json::json!("inf")
        } else {
            serde_json::json!("-inf")
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }

    pub mod vec {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            use serde::ser::SerializeSeq;
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&super::to_repr(*x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            #[derive(Deserialize)]
            struct Wrap(#[serde(with = "super")] f64);
            let items: Vec<Wrap> = Vec::deserialize(d)?;
            Ok(items.into_iter().map(|w| w.0).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_exp_matches_naive() {
        for &(a, b) in &[(0.0, 0.0), (-1.0, -3.0), (-700.0, -701.0), (2.0, -40.0)] {
            let naive = (f64::exp(a) + f64::exp(b)).ln();
            assert!((log_add_exp(a, b) - naive).abs() < 1e-14);
        }
        assert_eq!(log_add_exp(f64::NEG_INFINITY, -2.0), -2.0);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        // far below the f64 range in linear form
        assert!((log_add_exp(-2000.0, -2000.0) - (-2000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn log1m_exp_both_branches() {
        for &a in &[-1e-10, -0.1, -0.69, -0.7, -5.0, -50.0] {
            // 1 - e^a rounds to one below a ≈ -37
            let naive = if a < -30.0 { -f64::exp(a) } else { (1.0 - f64::exp(a)).ln() };
            let rel = ((log1m_exp(a) - naive) / naive).abs();
            assert!(rel < 1e-6, "a = {a}");
        }
        assert_eq!(log1m_exp(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn ext_f64_round_trip() {
        #[derive(serde::Serialize, serde::Deserialize)]
        struct T {
            #[serde(with = "ext_f64")]
            a: f64,
            #[serde(with = "ext_f64::vec")]
            v: Vec<f64>,
        }
        let t = T { a: f64::NEG_INFINITY, v: vec![1.5, f64::INFINITY] };
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"a":"-inf","v":[1.5,"inf"]}"#);
        let back: T = serde_json::from_str(&s).unwrap();
        assert_eq!(back.a, f64::NEG_INFINITY);
        assert_eq!(back.v, vec![1.5, f64::INFINITY]);
    }
}
