//! Binary codes behind the Barnes–Wall and Leech constructions.
//!
//! Codewords are stored as bit masks, bit `i` for coordinate `i`.

use crate::error::{Error, Result};

/// All 4096 words of the extended binary Golay code `[24, 12, 8]`.
///
/// Built from the cyclic `[23, 12, 7]` code with generator polynomial
/// `1 + x² + x⁴ + x⁵ + x⁶ + x¹⁰ + x¹¹`, extended by an overall parity bit.
/// The weight enumerator `1, 759, 2576, 759, 1` is checked before returning.
pub fn golay_codewords() -> Result<Vec<u32>> {
    const GENERATOR: u32 = (1 << 0)
        | (1 << 2)
        | (1 << 4)
        | (1 << 5)
        | (1 << 6)
        | (1 << 10)
        | (1 << 11);
    let rows: Vec<u32> = (0..12)
        .map(|shift| {
            let word = GENERATOR << shift;
            let parity = word.count_ones() & 1;
            word | (parity << 23)
        })
        .collect();
    let words = span(&rows);

    let mut weights = [0usize; 25];
    for w in &words {
        weights[w.count_ones() as usize] += 1;
    }
    let expected = [(0, 1), (8, 759), (12, 2576), (16, 759), (24, 1)];
    let total: usize = expected.iter().map(|&(_, n)| n).sum();
    if words.len() != total || expected.iter().any(|&(w, n)| weights[w] != n) {
        return Err(Error::Integrity(format!(
            "Golay weight distribution is off: {weights:?}"
        )));
    }
    Ok(words)
}

/// First-order Reed–Muller code `RM(1, 4)`: affine Boolean functions on
/// `F₂⁴`, evaluated at the 16 points (32 words).
pub fn reed_muller_1_4() -> Vec<u32> {
    let mut rows = Vec::with_capacity(5);
    rows.push(0xffff);
    for bit in 0..4 {
        let mut word = 0u32;
        for x in 0..16u32 {
            if (x >> bit) & 1 == 1 {
                word |= 1 << x;
            }
        }
        rows.push(word);
    }
    span(&rows)
}

/// Every XOR combination of `rows` (rows assumed independent).
fn span(rows: &[u32]) -> Vec<u32> {
    (0u32..1 << rows.len())
        .map(|mask| {
            rows.iter()
                .enumerate()
                .filter(|(i, _)| (mask >> i) & 1 == 1)
                .fold(0, |acc, (_, r)| acc ^ r)
        })
        .collect()
}
