//! Packed boolean masks, serialized as base64 with the least significant bit first.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;

use crate::error::{Error, Result};

pub fn encode(mask: &[bool]) -> String {
    let mut bytes = vec![0u8; mask.len().div_ceil(8)];
    for (k, &b) in mask.iter().enumerate() {
        if b {
            bytes[k / 8] |= 1 << (k % 8);
        }
    }
    STANDARD.encode(bytes)
}

pub fn decode(text: &str, len: usize) -> Result<Vec<bool>> {
    let bytes = STANDARD
        .decode(text)
        .map_err(|e| Error::InvalidConfig(format!("bad mask encoding: {e}")))?;
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::InvalidConfig(format!("mask holds {} bytes, expected {}", bytes.len(), len.div_ceil(8))));
    }
    Ok((0..len).map(|k| bytes[k / 8] >> (k % 8) & 1 == 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m: Vec<bool> = (0..37).map(|k| k % 3 == 0 || k == 36).collect();
        assert_eq!(decode(&encode(&m), 37).unwrap(), m);
        assert!(decode(&encode(&m), 50).is_err());
    }
}
