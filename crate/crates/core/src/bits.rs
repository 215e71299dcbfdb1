// SPDX-License-Identifier: Apache-2.0

//! Two-state bit-vector helpers. Values are stored in the low `width` bits of
//! a `u64`; every supported signal is at most [`MAX_WIDTH`] bits wide.

pub const MAX_WIDTH: u32 = 64;

/// All-ones mask of `width` bits.
#[inline]
pub fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Mask covering bits `lo .. lo + width`.
#[inline]
pub fn field_mask(lo: u32, width: u32) -> u64 {
    if lo >= 64 {
        0
    } else {
        mask(width) << lo
    }
}

#[inline]
pub fn shl(value: u64, amount: u64) -> u64 {
    if amount >= 64 {
        0
    } else {
        value << amount
    }
}

#[inline]
pub fn shr(value: u64, amount: u64) -> u64 {
    if amount >= 64 {
        0
    } else {
        value >> amount
    }
}

/// Renders `value` as a `width`-digit binary string, MSB first.
pub fn to_binary(value: u64, width: u32) -> String {
    (0..width)
        .rev()
        .map(|i| if (value >> i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks() {
        assert_eq!(mask(0), 0);
        assert_eq!(mask(4), 0xf);
        assert_eq!(mask(64), u64::MAX);
        assert_eq!(field_mask(2, 3), 0b11100);
        assert_eq!(field_mask(64, 3), 0);
    }

    #[test]
    fn binary_rendering() {
        assert_eq!(to_binary(0b1010, 4), "1010");
        assert_eq!(to_binary(1, 3), "001");
        assert_eq!(shl(1, 70), 0);
        assert_eq!(shr(u64::MAX, 63), 1);
    }
}
