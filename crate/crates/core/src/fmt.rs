//! Number formatting shared by reports and CSV output.

/// Formats `x` with 9 significant digits in the style of C's `%.9g`.
pub fn real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
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
    use super::real;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(real(4.0), "4");
        assert_eq!(real(40.8), "40.8");
        assert_eq!(real(1.0 / 3.0), "0.333333333");
        assert_eq!(real(123456789.4), "123456789");
        assert_eq!(real(1234567890.0), "1.23456789e+09");
        assert_eq!(real(0.000012345), "1.2345e-05");
        assert_eq!(real(-2.5), "-2.5");
        assert_eq!(real(0.0), "0");
    }
}
