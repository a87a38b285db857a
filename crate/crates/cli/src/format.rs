//! Number formatting for reports.

use serde_json::{Number, Value};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits; `-0` becomes `0`.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let s = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let y: f64 = s.parse().expect("formatted float parses");
    if y == 0.0 {
        0.0
    } else {
        y
    }
}

/// Rounds every floating-point number in `v` in place. Integers are untouched.
pub fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            *v = Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}
