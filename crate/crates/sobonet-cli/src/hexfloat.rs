//! Lossless text form for f64 values: C-style lowercase hex floats.
//!
//! The writer emits a canonical form (`0x1.8p+1`, `-0x0p+0`, subnormals as
//! `0x0.0000000000001p-1022`) and the parser accepts the general syntax, so
//! files written here round-trip to the exact bit pattern.

/// Formats a finite value as a hex-float string. The sign of zero is kept.
pub fn format_hex(v: f64) -> String {
    assert!(v.is_finite(), "only finite weights are serialized");
    let bits = v.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if biased == 0 && frac == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if biased == 0 { (0u8, -1022i64) } else { (1u8, biased - 1023) };
    let mut digits = String::new();
    for i in 0..13 {
        let nibble = (frac >> (48 - 4 * i)) & 0xf;
        digits.push(char::from_digit(nibble as u32, 16).unwrap());
    }
    while digits.ends_with('0') {
        digits.pop();
    }
    if digits.is_empty() {
        format!("{sign}0x{lead}p{exp:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{exp:+}")
    }
}

/// Parses a hex-float string back to f64. Mantissas longer than 28 hex
/// digits are rejected rather than silently rounded twice.
pub fn parse_hex(s: &str) -> Result<f64, String> {
    let err = |m: &str| Err(format!("bad hex float {s:?}: {m}"));
    let mut rest = s;
    let mut negative = false;
    if let Some(r) = rest.strip_prefix('-') {
        negative = true;
        rest = r;
    } else if let Some(r) = rest.strip_prefix('+') {
        rest = r;
    }
    let Some(r) = rest.strip_prefix("0x").or_else(|| rest.strip_prefix("0X")) else {
        return err("missing 0x prefix");
    };
    rest = r;
    let mut mantissa: u128 = 0;
    let mut digits = 0usize;
    let mut frac_digits = 0usize;
    let mut seen_dot = false;
    let mut seen_digit = false;
    let bytes = rest.as_bytes();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos] as char;
        if c == '.' {
            if seen_dot {
                return err("two decimal points");
            }
            seen_dot = true;
        } else if let Some(d) = c.to_digit(16) {
            seen_digit = true;
            digits += 1;
            if digits > 28 {
                return err("mantissa too long");
            }
            mantissa = mantissa * 16 + d as u128;
            if seen_dot {
                frac_digits += 1;
            }
        } else {
            break;
        }
        pos += 1;
    }
    if !seen_digit {
        return err("no mantissa digits");
    }
    if pos >= bytes.len() || (bytes[pos] != b'p' && bytes[pos] != b'P') {
        return err("missing binary exponent");
    }
    let exp: i32 = match rest[pos + 1..].parse() {
        Ok(e) if (-6000..=6000).contains(&e) => e,
        _ => return err("bad exponent"),
    };
    let scaled = mul_pow2(mantissa as f64, exp - 4 * frac_digits as i32);
    Ok(if negative { -scaled } else { scaled })
}

/// x · 2^e without an intermediate overflow for exponents past the f64
/// range; each partial factor is an exact power of two.
fn mul_pow2(mut x: f64, mut e: i32) -> f64 {
    while e > 1023 {
        x *= 2f64.powi(1023);
        e -= 1023;
    }
    while e < -1023 {
        x *= 2f64.powi(-1023);
        e += 1023;
    }
    x * 2f64.powi(e)
}
