//! JSON helpers for arbitrary-precision integers written as bare numbers.

use std::str::FromStr;

use num_bigint::BigInt;
use serde_json::Number;

use crate::error::{Error, Result};

pub fn big_to_number(x: &BigInt) -> Number {
    Number::from_str(&x.to_string()).expect("decimal integer is a valid JSON number")
}

pub fn big_from_number(x: &Number) -> Result<BigInt> {
    BigInt::from_str(&x.to_string()).map_err(|_| Error::Parse(format!("not an integer: {x}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn huge_values_survive() {
        let x = BigInt::from(3u8).pow(200) * -1;
        let json = serde_json::to_string(&big_to_number(&x)).unwrap();
        assert!(!json.contains('"'));
        let back: Number = serde_json::from_str(&json).unwrap();
        assert_eq!(big_from_number(&back).unwrap(), x);
        let frac: Number = serde_json::from_str("1.5").unwrap();
        assert!(big_from_number(&frac).is_err());
    }
}
