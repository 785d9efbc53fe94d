//! Minimal distance of large sets via verified coordinate symmetries.
//!
//! If a group of signed permutations maps the set onto itself, every pair
//! `(v, w)` can be moved so that `v` becomes the representative of its orbit
//! without changing the distance. The minimum over all pairs therefore equals
//! the minimum over pairs that contain an orbit representative. Each candidate
//! generator is checked against the set before use, so the result is exact
//! for whatever input is given.

use std::collections::HashMap;

use super::codes::golay_codewords;
use super::PointSet;
use crate::error::{Error, Result};

/// `(g v)[perm[i]] = signs[i] · v[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<f64>,
}

impl SignedPermutation {
    pub fn new(perm: Vec<usize>, signs: Vec<f64>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::param("not a permutation"));
            }
        }
        if signs.len() != n || signs.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::param("signs must be ±1, one per coordinate"));
        }
        Ok(SignedPermutation { perm, signs })
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        for ((&p, &s), &x) in self.perm.iter().zip(&self.signs).zip(v) {
            out[p] = s * x;
        }
    }
}

/// Symmetries of the Leech minimal vectors in the coordinates used here:
/// sign changes on the twelve Golay generator words, the cyclic shift of
/// positions `0..23` and the multiplier `i ↦ 2i (mod 23)`, both fixing
/// position 23.
pub fn leech_generators() -> Result<Vec<SignedPermutation>> {
    let golay = golay_codewords()?;
    let identity: Vec<usize> = (0..24).collect();
    let mut gens = Vec::new();
    for k in 0..12 {
        // the span enumerates words by mask, so word 2^k is the k-th generator
        let word = golay[1 << k];
        let signs = (0..24)
            .map(|j| if (word >> j) & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        gens.push(SignedPermutation::new(identity.clone(), signs)?);
    }
    let map = |f: &dyn Fn(usize) -> usize| (0..24).map(|i| if i == 23 { 23 } else { f(i) }).collect();
    for perm in [map(&|i| (i + 1) % 23), map(&|i| (2 * i) % 23)] {
        gens.push(SignedPermutation::new(perm, vec![1.0; 24])?);
    }
    Ok(gens)
}

fn key(v: &[f64]) -> Vec<u64> {
    // +0.0 and −0.0 must collide
    v.iter().map(|&x| (x + 0.0).to_bits()).collect()
}

/// Orbit representatives under the group generated by `gens`, after
/// checking that every generator maps `ps` onto itself exactly.
pub fn orbit_representatives(ps: &PointSet, gens: &[SignedPermutation]) -> Result<Vec<usize>> {
    let d = ps.dim();
    if gens.iter().any(|g| g.perm.len() != d) {
        return Err(Error::param("generator dimension differs from the point set"));
    }
    let index: HashMap<Vec<u64>, usize> =
        ps.iter().enumerate().map(|(i, v)| (key(v), i)).collect();
    if index.len() != ps.len() {
        return Err(Error::Integrity("point set has repeated vectors".into()));
    }
    let mut images = vec![vec![0usize; ps.len()]; gens.len()];
    let mut buf = vec![0.0; d];
    for (g, img) in gens.iter().zip(&mut images) {
        for (i, v) in ps.iter().enumerate() {
            g.apply_into(v, &mut buf);
            img[i] = *index.get(&key(&buf)).ok_or_else(|| {
                Error::Integrity(format!("generator does not preserve '{}'", ps.name()))
            })?;
        }
    }
    let mut orbit = vec![usize::MAX; ps.len()];
    let mut reps = Vec::new();
    let mut stack = Vec::new();
    for start in 0..ps.len() {
        if orbit[start] != usize::MAX {
            continue;
        }
        orbit[start] = reps.len();
        reps.push(start);
        stack.push(start);
        while let Some(i) = stack.pop() {
            for img in &images {
                let j = img[i];
                if orbit[j] == usize::MAX {
                    orbit[j] = orbit[start];
                    stack.push(j);
                }
            }
        }
    }
    Ok(reps)
}

/// Exact minimal distance using the symmetries `gens`.
pub fn min_distance_by_orbits(ps: &PointSet, gens: &[SignedPermutation]) -> Result<f64> {
    if ps.len() < 2 {
        return Err(Error::param("minimal distance needs at least two points"));
    }
    let reps = orbit_representatives(ps, gens)?;
    let mut best = f64::INFINITY;
    for &r in &reps {
        let v = ps.vector(r);
        for (j, w) in ps.iter().enumerate() {
            if j != r {
                let d2: f64 = v.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum();
                best = best.min(d2);
            }
        }
    }
    Ok(best.sqrt())
}
