use num_bigint::BigInt;
use num_rational::BigRational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::PiLaurent;

#[derive(Serialize, Deserialize)]
struct TermJson {
    pi: i32,
    num: String,
    den: String,
}

impl Serialize for PiLaurent<BigRational> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<TermJson> = self
            .terms()
            .map(|(e, c)| TermJson {
                pi: e,
                num: c.numer().to_string(),
                den: c.denom().to_string(),
            })
            .collect();
        terms.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PiLaurent<BigRational> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let terms = Vec::<TermJson>::deserialize(deserializer)?;
        let mut parsed = Vec::with_capacity(terms.len());
        for t in terms {
            let num: BigInt = t.num.parse().map_err(D::Error::custom)?;
            let den: BigInt = t.den.parse().map_err(D::Error::custom)?;
            if den == BigInt::from(0) {
                return Err(D::Error::custom("zero denominator"));
            }
            parsed.push((t.pi, BigRational::new(num, den)));
        }
        Ok(PiLaurent::from_terms(parsed))
    }
}

#[cfg(test)]
mod tests {
    use crate::Scalar;
    use proptest::prelude::*;

    #[test]
    fn json_shape() {
        let s = &Scalar::ratio(3, 8).shift_pi(-1) + &Scalar::from_int(2);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(
            json,
            r#"[{"pi":-1,"num":"3","den":"8"},{"pi":0,"num":"2","den":"1"}]"#
        );
    }

    proptest! {
        #[test]
        fn json_roundtrip(terms in proptest::collection::vec((-6i32..6, -50i64..50, 1i64..40), 0..6)) {
            let s = Scalar::from_terms(terms.into_iter().map(|(e, n, d)| (e, crate::Rational::new(n.into(), d.into()))));
            let json = serde_json::to_string(&s).unwrap();
            let back: Scalar = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(serde_json::to_string(&back).unwrap(), json);
        }
    }
}
