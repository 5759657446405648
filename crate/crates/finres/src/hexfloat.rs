//! Lowercase hexadecimal floating-point literals with bit-exact round trip.
//!
//! All file formats in this crate serialize `f64` endpoints as C99-style hex
//! float literals (`0x1.91eb851eb851fp+1`, `-0x1.4p+3`, `0x0p+0`). Formatting
//! and parsing are exact: `parse(&format(x)) == x` bit for bit, including
//! signed zeros and subnormals.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HexFloatError {
    #[error("invalid hex float literal `{0}`")]
    Invalid(String),
    #[error("hex float literal `{0}` does not fit a finite f64")]
    OutOfRange(String),
}

const FRAC_BITS: u32 = 52;
const FRAC_MASK: u64 = (1 << FRAC_BITS) - 1;
const EXP_MASK: u64 = 0x7ff;

/// Formats a finite `f64` as a lowercase hex float literal.
///
/// Normals print as `0x1.<frac>p<exp>`, subnormals as `0x0.<frac>p-1022`,
/// zeros as `0x0p+0`; trailing zero digits of the fraction are trimmed.
pub fn format(x: f64) -> String {
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_bits = (bits >> FRAC_BITS) & EXP_MASK;
    let frac = bits & FRAC_MASK;

    if exp_bits == EXP_MASK {
        // Not produced by any invariant-respecting value; kept total anyway.
        return if frac != 0 {
            "nan".to_string()
        } else {
            format!("{sign}inf")
        };
    }

    if exp_bits == 0 && frac == 0 {
        return format!("{sign}0x0p+0");
    }

    let (lead, exp) = if exp_bits == 0 {
        ('0', -1022i32)
    } else {
        ('1', exp_bits as i32 - 1023)
    };

    let digits = format!("{frac:013x}");
    let digits = digits.trim_end_matches('0');
    if digits.is_empty() {
        format!("{sign}0x{lead}p{exp:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{exp:+}")
    }
}

/// Parses a hex float literal back into an `f64`.
///
/// Accepts the grammar emitted by [`format`] plus arbitrary leading hex
/// digits; values with more significant bits than an `f64` holds are rounded
/// to nearest, ties to even.
pub fn parse(s: &str) -> Result<f64, HexFloatError> {
    let err = || HexFloatError::Invalid(s.to_string());
    let mut rest = s.trim();
    let neg = if let Some(r) = rest.strip_prefix('-') {
        rest = r;
        true
    } else {
        false
    };
    rest = rest.strip_prefix("0x").ok_or_else(err)?;

    let p = rest.find(['p', 'P']).ok_or_else(err)?;
    let (mantissa, exp_str) = (&rest[..p], &rest[p + 1..]);
    let exp: i32 = exp_str.parse().map_err(|_| err())?;

    let (int_part, frac_part) = match mantissa.find('.') {
        Some(dot) => (&mantissa[..dot], &mantissa[dot + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(err());
    }
    if !frac_part.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(err());
    }

    let mut digits = u128::from_str_radix(int_part, 16).map_err(|_| err())?;
    let mut frac_len = 0i64;
    for b in frac_part.bytes() {
        let d = (b as char).to_digit(16).unwrap() as u128;
        digits = digits.checked_mul(16).ok_or_else(err)?;
        digits = digits.checked_add(d).ok_or_else(err)?;
        frac_len += 1;
    }

    let value = assemble(digits, exp as i64 - 4 * frac_len)
        .ok_or_else(|| HexFloatError::OutOfRange(s.to_string()))?;
    Ok(if neg { -value } else { value })
}

/// Builds `digits * 2^exp` with a single round-to-nearest-even step.
fn assemble(digits: u128, exp: i64) -> Option<f64> {
    if digits == 0 {
        return Some(0.0);
    }
    let top = 127 - digits.leading_zeros() as i64; // position of the highest set bit
    let unbiased = top + exp; // value = 1.xxx * 2^unbiased
    if unbiased > 1023 {
        return None;
    }

    // Target precision: 53 bits for normals, fewer as we sink into subnormals.
    let precision = if unbiased >= -1022 {
        53
    } else {
        let p = 53 + (unbiased + 1022); // one bit lost per step below 2^-1022
        if p < 1 {
            // Below half the smallest subnormal: rounds to zero (or the
            // smallest subnormal exactly at the halfway point with a set tail,
            // which cannot arise from finitely many digits at p = 0 only when
            // everything beyond is zero -- handle via p == 0 check below).
            if p == 0 {
                // value in [2^-1075, 2^-1074): rounds to 2^-1074 iff above midpoint
                let shift = top; // bits below the leading one
                let tail = digits & ((1u128 << shift) - 1);
                return Some(if tail != 0 { f64::from_bits(1) } else { 0.0 });
            }
            return Some(0.0);
        }
        p
    };

    // Round `digits` to `precision` significant bits.
    let keep = precision - 1; // bits kept below the leading one
    let drop = top - keep;
    let mut mant = if drop <= 0 {
        digits << (-drop) as u32
    } else {
        let d = drop as u32;
        let kept = digits >> d;
        let round_bit = (digits >> (d - 1)) & 1;
        let sticky = digits & ((1u128 << (d - 1)) - 1);
        if round_bit == 1 && (sticky != 0 || kept & 1 == 1) {
            kept + 1
        } else {
            kept
        }
    };

    // Rounding may have carried into one more bit.
    let mut unbiased = unbiased;
    if mant >> (precision as u32) != 0 {
        mant >>= 1;
        unbiased += 1;
        if unbiased > 1023 {
            return None;
        }
    }

    let bits = if unbiased >= -1022 {
        debug_assert!(mant >> 52 == 1);
        (((unbiased + 1023) as u64) << FRAC_BITS) | (mant as u64 & FRAC_MASK)
    } else {
        mant as u64 // subnormal: biased exponent 0, mantissa already aligned
    };
    Some(f64::from_bits(bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_literals() {
        assert_eq!(format(1.0), "0x1p+0");
        assert_eq!(format(-1.4), "-0x1.6666666666666p+0");
        assert_eq!(format(0.0), "0x0p+0");
        assert_eq!(format(-0.0), "-0x0p+0");
        assert_eq!(format(f64::MIN_POSITIVE), "0x1p-1022");
        assert_eq!(format(f64::from_bits(1)), "0x0.0000000000001p-1022");
        assert_eq!(parse("0x1.8p+1").unwrap(), 3.0);
        assert_eq!(parse("-0x1.4p+3").unwrap(), -10.0);
        assert_eq!(parse("0xap-1").unwrap(), 5.0);
    }

    #[test]
    fn signed_zero_round_trip() {
        assert_eq!(parse(&format(-0.0)).unwrap().to_bits(), (-0.0f64).to_bits());
        assert_eq!(parse(&format(0.0)).unwrap().to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "0x", "1.5", "0x1.zp+0", "0x1p", "0x.5p+0", "p+3"] {
            assert!(parse(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn rounds_excess_digits_to_nearest_even() {
        // 53 significant bits + a trailing 1 half-ulp: ties to even.
        assert_eq!(parse("0x1.00000000000008p+0").unwrap(), 1.0);
        assert_eq!(
            parse("0x1.00000000000018p+0").unwrap(),
            f64::from_bits(1.0f64.to_bits() + 2)
        );
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let s = format(x);
            prop_assert_eq!(parse(&s).unwrap().to_bits(), x.to_bits(), "{}", s);
        }
    }
}
