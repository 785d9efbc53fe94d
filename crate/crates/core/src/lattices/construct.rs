//! Shortest-vector sets of the supported lattices, as flat coordinate
//! buffers of unit vectors.
//!
//! Integer-coordinate constructions are generated first and normalized at the
//! end, so that zero coordinates and exact negations survive as exact values.

use super::codes::{golay_codewords, reed_muller_1_4};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

pub(super) fn integer_lattice(d: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * d * d);
    for i in 0..d {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; d];
            v[i] = sign;
            out.extend(v);
        }
    }
    out
}

/// Roots `±e_i ± e_j` of `D_d`.
pub(super) fn d_lattice(d: usize) -> Vec<f64> {
    let mut raw = Vec::with_capacity(2 * d * (d - 1));
    push_pairs(&mut raw, d, 1);
    normalize_integer(&raw, d)
}

/// Roots `e_i − e_j` of `A_d` inside the hyperplane `Σx = 0` of `R^{d+1}`,
/// written in the orthonormal basis that Gram–Schmidt produces from
/// `e₁−e₂, …, e_d−e_{d+1}`.
pub(super) fn a_lattice(d: usize) -> Result<Vec<f64>> {
    let n = d + 1;
    let mut simple = Matrix::zeros(n, d);
    for k in 0..d {
        simple[(k, k)] = 1.0;
        simple[(k + 1, k)] = -1.0;
    }
    let basis = linalg::gram_schmidt(&simple)?;
    let basis_rows: Vec<Vec<f64>> = (0..d).map(|k| basis.column(k)).collect();

    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * n * d);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            // coordinates of (e_i − e_j)/√2 in the hyperplane basis
            out.extend(basis_rows.iter().map(|b| (b[i] - b[j]) * scale));
        }
    }
    Ok(out)
}

/// `E₈` roots in doubled integer coordinates (norm² 8): `±2e_i ± 2e_j` and
/// `(±1)⁸` with an even number of minus signs.
fn e8_doubled() -> Vec<Vec<i32>> {
    let mut roots = Vec::with_capacity(240);
    for i in 0..8 {
        for j in i + 1..8 {
            for (si, sj) in [(2, 2), (2, -2), (-2, 2), (-2, -2)] {
                let mut v = vec![0; 8];
                v[i] = si;
                v[j] = sj;
                roots.push(v);
            }
        }
    }
    for mask in 0u32..256 {
        if mask.count_ones() % 2 == 0 {
            roots.push((0..8).map(|k| if (mask >> k) & 1 == 1 { -1 } else { 1 }).collect());
        }
    }
    roots
}

pub(super) fn e8_lattice() -> Vec<f64> {
    normalize_integer(&e8_doubled(), 8)
}

/// `E₇`: the `E₈` roots orthogonal to one fixed root.
pub(super) fn e7_lattice() -> Result<Vec<f64>> {
    e8_subsystem(&[vec![2, 2, 0, 0, 0, 0, 0, 0]])
}

/// `E₆`: the `E₈` roots orthogonal to two roots at 60°, which span an `A₂`.
pub(super) fn e6_lattice() -> Result<Vec<f64>> {
    e8_subsystem(&[vec![2, 2, 0, 0, 0, 0, 0, 0], vec![0, 2, 2, 0, 0, 0, 0, 0]])
}

fn e8_subsystem(excluded: &[Vec<i32>]) -> Result<Vec<f64>> {
    let kept: Vec<Vec<i32>> = e8_doubled()
        .into_iter()
        .filter(|v| excluded.iter().all(|r| int_dot(v, r) == 0))
        .collect();
    let dirs: Vec<Vec<f64>> = excluded
        .iter()
        .map(|r| r.iter().map(|&x| f64::from(x)).collect())
        .collect();
    let basis = complement_basis(&dirs, 8)?;
    let scale = 1.0 / 8f64.sqrt();
    let mut out = Vec::with_capacity(kept.len() * basis.len());
    for v in &kept {
        let vf: Vec<f64> = v.iter().map(|&x| f64::from(x) * scale).collect();
        out.extend(basis.iter().map(|b| linalg::dot(b, &vf)));
    }
    Ok(out)
}

/// Orthonormal basis of the orthogonal complement of `dirs` in `R^n`,
/// obtained by Gram–Schmidt on `dirs` followed by the standard basis.
fn complement_basis(dirs: &[Vec<f64>], n: usize) -> Result<Vec<Vec<f64>>> {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut basis = Vec::with_capacity(n - dirs.len());
    let candidates = dirs.iter().cloned().map(|v| (v, false)).chain((0..n).map(|k| {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        (e, true)
    }));
    for (mut v, is_standard) in candidates {
        let original = linalg::norm(&v);
        for _ in 0..2 {
            for q in &kept {
                let c = linalg::dot(q, &v);
                for (x, qi) in v.iter_mut().zip(q) {
                    *x -= c * qi;
                }
            }
        }
        let len = linalg::norm(&v);
        if len <= 1e-8 * original {
            if !is_standard {
                return Err(Error::Degeneracy("excluded roots are dependent".into()));
            }
            continue;
        }
        v.iter_mut().for_each(|x| *x /= len);
        kept.push(v.clone());
        if is_standard {
            basis.push(v);
        }
    }
    if basis.len() != n - dirs.len() {
        return Err(Error::Integrity("complement basis has the wrong size".into()));
    }
    Ok(basis)
}

/// Barnes–Wall `Λ₁₆` minimal vectors (norm² 8 in integer coordinates):
/// `(±2)² 0¹⁴` and `(±1)⁸ 0⁸` supported on a weight-8 word of `RM(1, 4)` with
/// an even number of minus signs. 480 + 3840 = 4320.
pub(super) fn barnes_wall_16() -> Vec<f64> {
    let mut raw = Vec::with_capacity(4320);
    push_pairs(&mut raw, 16, 2);
    for word in reed_muller_1_4().into_iter().filter(|w| w.count_ones() == 8) {
        push_signed_support(&mut raw, 16, word, 1);
    }
    normalize_integer(&raw, 16)
}

/// Leech lattice minimal vectors (norm² 32 in integer coordinates):
/// `(±4)² 0²²`; `(±2)⁸ 0¹⁶` on a Golay octad with an even number of minus
/// signs; `(∓3, ±1²³)`, i.e. `(−3, 1²³)` with the signs of a Golay codeword's
/// support flipped. 1104 + 97152 + 98304 = 196560.
pub(super) fn leech() -> Result<Vec<f64>> {
    let golay = golay_codewords()?;
    let mut raw = Vec::with_capacity(196_560);
    push_pairs(&mut raw, 24, 4);
    for &octad in golay.iter().filter(|w| w.count_ones() == 8) {
        push_signed_support(&mut raw, 24, octad, 2);
    }
    for &word in &golay {
        for pos in 0..24 {
            let v: Vec<i32> = (0..24)
                .map(|j| {
                    let base = if j == pos { -3 } else { 1 };
                    if (word >> j) & 1 == 1 {
                        -base
                    } else {
                        base
                    }
                })
                .collect();
            raw.push(v);
        }
    }
    Ok(normalize_integer(&raw, 24))
}

/// `±a e_i ± a e_j` for all `i < j`.
fn push_pairs(raw: &mut Vec<Vec<i32>>, n: usize, a: i32) {
    for i in 0..n {
        for j in i + 1..n {
            for (si, sj) in [(a, a), (a, -a), (-a, a), (-a, -a)] {
                let mut v = vec![0; n];
                v[i] = si;
                v[j] = sj;
                raw.push(v);
            }
        }
    }
}

/// Value `±a` on the support of `word`, zero elsewhere, over all sign
/// patterns with an even number of minus signs.
fn push_signed_support(raw: &mut Vec<Vec<i32>>, n: usize, word: u32, a: i32) {
    let support: Vec<usize> = (0..n).filter(|&j| (word >> j) & 1 == 1).collect();
    for signs in 0u32..1 << support.len() {
        if signs.count_ones() % 2 == 1 {
            continue;
        }
        let mut v = vec![0; n];
        for (k, &j) in support.iter().enumerate() {
            v[j] = if (signs >> k) & 1 == 1 { -a } else { a };
        }
        raw.push(v);
    }
}

fn int_dot(a: &[i32], b: &[i32]) -> i32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Scale integer vectors of common norm to unit length.
fn normalize_integer(raw: &[Vec<i32>], d: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len() * d);
    for v in raw {
        let n2: i32 = int_dot(v, v);
        let inv = 1.0 / f64::from(n2).sqrt();
        out.extend(v.iter().map(|&x| f64::from(x) * inv));
    }
    out
}
