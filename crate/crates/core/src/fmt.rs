//! Number formatting shared by the CSV writers.

/// Formats `v` with `digits` significant digits in plain decimal notation,
/// falling back to exponent notation outside `1e-5 ..= 1e15`.
pub fn sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let digits = digits.max(1);
    let exp = v.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        return format!("{:.*e}", digits - 1, v);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, v);
    // Rounding can carry into a new leading digit (9.99.. -> 10.0); re-derive once.
    let rounded: f64 = s.parse().unwrap_or(v);
    let exp2 = rounded.abs().log10().floor() as i32;
    let s = if exp2 != exp {
        let decimals = (digits as i32 - 1 - exp2).max(0) as usize;
        format!("{:.*}", decimals, v)
    } else {
        s
    };
    if s.starts_with("-") && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig(0.5, 10), "0.5000000000");
        assert_eq!(sig(-3.0, 10), "-3.000000000");
        assert_eq!(sig(0.123456789012, 10), "0.1234567890");
        assert_eq!(sig(0.0, 10), "0");
        assert_eq!(sig(9.9999999999, 10), "10.00000000");
        assert_eq!(sig(1.5e-9, 10), "1.500000000e-9");
    }
}
