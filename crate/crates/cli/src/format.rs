//! Number formatting for CSV and the `--exact` hex-float fields.

/// Shortest round-trip decimal; scientific outside `[1e-5, 1e16)`.
pub fn decimal(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// C99 style hex float (`0x1.8p+1`), exact for every double.
pub fn hex_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 && frac == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 {
        (0, -1022)
    } else {
        (1, exp - 1023)
    };
    let mut digits = format!("{frac:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    let dot = if digits.is_empty() {
        String::new()
    } else {
        format!(".{digits}")
    };
    let esign = if e < 0 { '-' } else { '+' };
    format!("{sign}0x{lead}{dot}p{esign}{}", e.abs())
}

/// Inverse of [`hex_float`].
pub fn parse_hex_float(s: &str) -> Option<f64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let v = if body == "inf" {
        f64::INFINITY
    } else {
        let body = body.strip_prefix("0x")?;
        let (mant, exp) = body.split_once('p')?;
        let e: i32 = exp.parse().ok()?;
        let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
        let mut m = u64::from_str_radix(int, 16).ok()? as f64;
        let mut scale = 1.0 / 16.0;
        for c in frac.chars() {
            m += c.to_digit(16)? as f64 * scale;
            scale /= 16.0;
        }
        // Two steps keep subnormal exponents in range.
        m * 2f64.powi(e / 2) * 2f64.powi(e - e / 2)
    };
    Some(if neg { -v } else { v })
}
