//! Number formatting for the CSV outputs.

/// Formats `v` with `digits` significant digits, like C's `%.{digits}g`.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let digits = digits.max(1);
    // round first so the exponent reflects carries such as 9.99 -> 10.0
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, v)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(format_sig(0.0, 9), "0");
        assert_eq!(format_sig(1.0, 9), "1");
        assert_eq!(format_sig(-2.5, 9), "-2.5");
        assert_eq!(format_sig(0.123456789123, 9), "0.123456789");
        assert_eq!(format_sig(38.8495559215, 9), "38.8495559");
        assert_eq!(format_sig(9.9999999999, 9), "10");
        assert_eq!(format_sig(1.5e-7, 9), "1.5e-7");
        assert_eq!(format_sig(1234567890.0, 9), "1.23456789e9");
        assert_eq!(format_sig(0.1 + 0.2, 17), "0.30000000000000004");
    }
}
