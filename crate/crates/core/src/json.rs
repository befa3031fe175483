//! Hand-rolled JSON emission with 17 significant digits per number, so that
//! every serialized double parses back to the identical bit pattern.

pub fn number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

pub fn array(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| number(x)).collect();
    format!("[{}]", items.join(","))
}

pub fn string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_bit_exactly() {
        for x in [0.0, 1.0 / 3.0, 100.0 / 3.0, 1e-300, 123456789.123456789, f64::MAX] {
            let text = number(x);
            let back: f64 = serde_json::from_str(&text).unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{text}");
        }
        assert_eq!(number(f64::NAN), "null");
    }
}
