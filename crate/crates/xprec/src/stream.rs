//! Sample-stream serialization: raw little-endian binary64, decimal
//! text at 17 significant digits, and hex-float text. All three
//! formats round-trip values bit for bit; the text decoders report the
//! byte offset of the first malformed entry.

use std::fmt;
use std::io::{self, Read, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// Raw IEEE 754 binary64, little-endian, no header or framing.
    Binary,
    /// One decimal per line, `{:.16e}` (17 significant digits, enough
    /// to reproduce the exact binary64 value on parse).
    Text,
    /// One hex float per line, e.g. `0x1.599880ae4c416p-2`; exact by
    /// construction.
    Hex,
}

#[derive(Debug)]
pub enum StreamError {
    Io(io::Error),
    /// Undecodable content starting at `offset` bytes into the stream.
    Malformed { offset: u64, detail: String },
}

impl fmt::Display for StreamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamError::Io(e) => write!(f, "stream I/O error: {e}"),
            StreamError::Malformed { offset, detail } => {
                write!(f, "malformed stream at byte {offset}: {detail}")
            }
        }
    }
}

impl std::error::Error for StreamError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            StreamError::Io(e) => Some(e),
            StreamError::Malformed { .. } => None,
        }
    }
}

impl From<io::Error> for StreamError {
    fn from(e: io::Error) -> Self {
        StreamError::Io(e)
    }
}

/// Writes one sample in the given format. Refuses non-finite values:
/// they cannot occur in a well-formed sample stream.
pub fn write_value<W: Write>(w: &mut W, v: f64, format: Format) -> io::Result<()> {
    if !v.is_finite() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, format!("non-finite value {v}")));
    }
    match format {
        Format::Binary => w.write_all(&v.to_le_bytes()),
        Format::Text => writeln!(w, "{v:.16e}"),
        Format::Hex => writeln!(w, "{}", format_hex(v)),
    }
}

/// Writes a whole slice of samples; see [`write_value`].
pub fn write_stream<W: Write>(w: &mut W, values: &[f64], format: Format) -> io::Result<()> {
    for &v in values {
        write_value(w, v, format)?;
    }
    Ok(())
}

/// Reads an entire stream of samples in the given format.
pub fn read_stream<R: Read>(r: R, format: Format) -> Result<Vec<f64>, StreamError> {
    match format {
        Format::Binary => read_binary(r),
        Format::Text | Format::Hex => read_lines(r, format),
    }
}

fn read_binary<R: Read>(mut r: R) -> Result<Vec<f64>, StreamError> {
    let mut values = Vec::new();
    let mut offset = 0u64;
    let mut buf = [0u8; 8];
    loop {
        let mut filled = 0;
        while filled < 8 {
            match r.read(&mut buf[filled..]) {
                Ok(0) => break,
                Ok(n) => filled += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(StreamError::Io(e)),
            }
        }
        if filled == 0 {
            return Ok(values);
        }
        if filled < 8 {
            return Err(StreamError::Malformed {
                offset,
                detail: format!("{filled} trailing bytes do not form a value"),
            });
        }
        let v = f64::from_le_bytes(buf);
        if !v.is_finite() {
            return Err(StreamError::Malformed { offset, detail: format!("non-finite value {v}") });
        }
        values.push(v);
        offset += 8;
    }
}

fn read_lines<R: Read>(mut r: R, format: Format) -> Result<Vec<f64>, StreamError> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut values = Vec::new();
    let mut offset = 0u64;
    for line in text.split('\n') {
        let piece = line.trim();
        if !piece.is_empty() {
            let parsed = match format {
                Format::Text => piece.parse::<f64>().ok(),
                Format::Hex => parse_hex(piece),
                Format::Binary => unreachable!("binary streams are not line-oriented"),
            };
            match parsed {
                Some(v) if v.is_finite() => values.push(v),
                Some(v) => {
                    return Err(StreamError::Malformed {
                        offset,
                        detail: format!("non-finite value {v}"),
                    })
                }
                None => {
                    return Err(StreamError::Malformed {
                        offset,
                        detail: format!("cannot parse {piece:?}"),
                    })
                }
            }
        }
        offset += line.len() as u64 + 1;
    }
    Ok(values)
}

const MANT_MASK: u64 = (1 << 52) - 1;

/// Formats a finite binary64 as a hex float: sign, `0x1.` plus the 52
/// fraction bits as 13 hex digits, and the power-of-two exponent
/// (`0x0.…p-1022` for subnormals, `0x0p+0` for zero).
fn format_hex(v: f64) -> String {
    let bits = v.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & MANT_MASK;
    if exp_field == 0 {
        if mant == 0 {
            format!("{sign}0x0p+0")
        } else {
            format!("{sign}0x0.{mant:013x}p-1022")
        }
    } else {
        format!("{sign}0x1.{mant:013x}p{:+}", exp_field - 1023)
    }
}

/// Parses a hex float exactly, reconstructing the binary64 bits with
/// integer arithmetic only. Returns `None` for syntax errors and for
/// values a binary64 cannot hold exactly (too many significant bits,
/// overflow, or digits lost off the subnormal bottom): a stream format
/// that promises bit fidelity must not silently round.
fn parse_hex(s: &str) -> Option<f64> {
    let bytes = s.as_bytes();
    let mut i = 0;
    let neg = match bytes.first()? {
        b'-' => {
            i += 1;
            true
        }
        b'+' => {
            i += 1;
            false
        }
        _ => false,
    };
    if bytes.len() < i + 2 || bytes[i] != b'0' || bytes[i + 1] | 0x20 != b'x' {
        return None;
    }
    i += 2;
    let mut digits: u128 = 0;
    let mut ndigits = 0usize;
    let mut seen_digit = false;
    let mut in_frac = false;
    let mut frac_len = 0i64;
    while i < bytes.len() {
        match bytes[i] {
            b'.' => {
                if in_frac {
                    return None;
                }
                in_frac = true;
            }
            b'p' | b'P' => break,
            b => {
                let d = (b as char).to_digit(16)? as u128;
                seen_digit = true;
                if digits != 0 || d != 0 {
                    ndigits += 1;
                    if ndigits > 28 {
                        return None;
                    }
                    digits = digits * 16 + d;
                }
                if in_frac {
                    frac_len += 1;
                }
            }
        }
        i += 1;
    }
    if !seen_digit || i >= bytes.len() || bytes[i] | 0x20 != b'p' {
        return None;
    }
    let exp: i64 = s[i + 1..].parse().ok()?;
    let sign_bit = (neg as u64) << 63;
    if digits == 0 {
        return Some(f64::from_bits(sign_bit));
    }
    let scale = exp - 4 * frac_len;
    let nbits = 128 - digits.leading_zeros() as i64;
    let e = nbits - 1 + scale;
    // Normalize to a 53-bit significand with the leading bit at 52.
    let shift = nbits - 53;
    let mant = if shift > 0 {
        if digits & ((1u128 << shift) - 1) != 0 {
            return None;
        }
        (digits >> shift) as u64
    } else {
        (digits as u64) << (-shift)
    };
    if e > 1023 {
        return None;
    }
    let bits = if e < -1022 {
        let drop = -1022 - e;
        if drop > 52 || mant & ((1u64 << drop) - 1) != 0 {
            return None;
        }
        // Subnormal: the leading bit slides into the stored fraction.
        mant >> drop
    } else {
        (((e + 1023) as u64) << 52) | (mant & MANT_MASK)
    };
    Some(f64::from_bits(bits | sign_bit))
}
