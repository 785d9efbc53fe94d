//! Normalized shortest-vector sets of lattices and their geometry.

mod codes;
mod construct;
mod design;
mod io;
mod symmetry;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

pub use codes::{golay_codewords, reed_muller_1_4};
pub use design::{sampled_monomials, verify_t_design, verify_t_design_on};
pub use io::{load_pointset, parse_pointset, save_pointset, write_pointset};
pub use symmetry::{leech_generators, min_distance_by_orbits, orbit_representatives, SignedPermutation};

/// Tolerance on unit norms and on antipodal matching.
pub const UNIT_TOL: f64 = 1e-12;
/// Magnitude below which a coordinate counts as zero when splitting `V⁺`.
pub const ZERO_COORD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LatticeFamily {
    Zd,
    Ad,
    Dd,
    E6,
    E7,
    E8,
    Bw16,
    Leech,
}

impl LatticeFamily {
    pub const ALL: [LatticeFamily; 8] = [
        LatticeFamily::Zd,
        LatticeFamily::Ad,
        LatticeFamily::Dd,
        LatticeFamily::E6,
        LatticeFamily::E7,
        LatticeFamily::E8,
        LatticeFamily::Bw16,
        LatticeFamily::Leech,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LatticeFamily::Zd => "zd",
            LatticeFamily::Ad => "ad",
            LatticeFamily::Dd => "dd",
            LatticeFamily::E6 => "e6",
            LatticeFamily::E7 => "e7",
            LatticeFamily::E8 => "e8",
            LatticeFamily::Bw16 => "bw16",
            LatticeFamily::Leech => "leech",
        }
    }

    /// Dimension of the families that exist in one dimension only.
    pub fn fixed_dim(self) -> Option<usize> {
        match self {
            LatticeFamily::E6 => Some(6),
            LatticeFamily::E7 => Some(7),
            LatticeFamily::E8 => Some(8),
            LatticeFamily::Bw16 => Some(16),
            LatticeFamily::Leech => Some(24),
            _ => None,
        }
    }

    pub fn min_dim(self) -> usize {
        match self {
            LatticeFamily::Zd => 1,
            LatticeFamily::Ad | LatticeFamily::Dd => 2,
            other => other.fixed_dim().unwrap_or(1),
        }
    }

    /// Lattice with the largest known kissing number in dimension `d`, for
    /// the dimensions where one is available here.
    pub fn max_kissing(d: usize) -> Option<LatticeFamily> {
        Some(match d {
            2 | 3 => LatticeFamily::Ad,
            4 | 5 => LatticeFamily::Dd,
            6 => LatticeFamily::E6,
            7 => LatticeFamily::E7,
            8 => LatticeFamily::E8,
            16 => LatticeFamily::Bw16,
            24 => LatticeFamily::Leech,
            _ => return None,
        })
    }

    /// Number of shortest vectors in dimension `d`.
    pub fn kissing_number(self, d: usize) -> usize {
        match self {
            LatticeFamily::Zd => 2 * d,
            LatticeFamily::Ad => d * (d + 1),
            LatticeFamily::Dd => 2 * d * (d - 1),
            LatticeFamily::E6 => 72,
            LatticeFamily::E7 => 126,
            LatticeFamily::E8 => 240,
            LatticeFamily::Bw16 => 4320,
            LatticeFamily::Leech => 196_560,
        }
    }

    /// Highest `t` for which the shortest-vector set is a spherical
    /// `t`-design.
    pub fn design_strength(self, d: usize) -> u32 {
        match self {
            LatticeFamily::Zd => 3,
            LatticeFamily::Ad if d == 2 => 5,
            LatticeFamily::Ad => 3,
            LatticeFamily::Dd if d == 4 => 5,
            LatticeFamily::Dd => 3,
            LatticeFamily::E6 | LatticeFamily::E7 => 5,
            LatticeFamily::E8 | LatticeFamily::Bw16 => 7,
            LatticeFamily::Leech => 11,
        }
    }
}

impl fmt::Display for LatticeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LatticeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        LatticeFamily::ALL
            .into_iter()
            .find(|f| f.name() == lower)
            .ok_or_else(|| Error::param(format!("unknown lattice family '{s}'")))
    }
}

/// Family name with an optional dimension suffix for the generic families:
/// `e8`, `leech`, `dd`, or `d16` (= `dd` in dimension 16).
pub fn parse_family_spec(s: &str) -> Result<(LatticeFamily, Option<usize>)> {
    let lower = s.trim().to_ascii_lowercase();
    if let Ok(f) = lower.parse::<LatticeFamily>() {
        return Ok((f, f.fixed_dim()));
    }
    let family = match lower.chars().next() {
        Some('z') => LatticeFamily::Zd,
        Some('a') => LatticeFamily::Ad,
        Some('d') => LatticeFamily::Dd,
        _ => return Err(Error::param(format!("unknown lattice family '{s}'"))),
    };
    let d: usize = lower[1..]
        .parse()
        .map_err(|_| Error::param(format!("unknown lattice family '{s}'")))?;
    Ok((family, Some(d)))
}

/// Finite set of unit vectors on `S^{d−1}`.
#[derive(Clone)]
pub struct PointSet {
    name: String,
    dim: usize,
    coords: Vec<f64>,
    centrally_symmetric: bool,
    d_min: OnceLock<f64>,
}

impl PointSet {
    /// Validate unit norms (within [`UNIT_TOL`]) and record central symmetry.
    /// The minimal distance is computed on first use and cached.
    pub fn new(name: impl Into<String>, dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("point set dimension must be at least 1"));
        }
        if coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::param(format!(
                "{} coordinates do not form vectors of dimension {dim}",
                coords.len()
            )));
        }
        for (i, v) in coords.chunks_exact(dim).enumerate() {
            let n = linalg::norm(v);
            if !((n - 1.0).abs() <= UNIT_TOL) {
                return Err(Error::param(format!("vector {i} has norm {n}, not 1")));
            }
        }
        let mut ps = PointSet {
            name: name.into(),
            dim,
            coords,
            centrally_symmetric: false,
            d_min: OnceLock::new(),
        };
        ps.centrally_symmetric = ps.antipode_indices().is_some();
        Ok(ps)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn is_centrally_symmetric(&self) -> bool {
        self.centrally_symmetric
    }

    /// Cached minimal pairwise distance; `None` for a singleton.
    pub fn d_min(&self) -> Option<f64> {
        if self.len() < 2 {
            return None;
        }
        Some(*self.d_min.get_or_init(|| compute_min_distance(self)))
    }

    /// `Tv` for every `v`.
    pub fn rotated(&self, t: &Matrix) -> Result<PointSet> {
        if t.rows() != self.dim || t.cols() != self.dim {
            return Err(Error::param("rotation has the wrong shape"));
        }
        let mut coords = vec![0.0; self.coords.len()];
        for (src, dst) in self.iter().zip(coords.chunks_exact_mut(self.dim)) {
            t.mul_vec_into(src, dst);
        }
        PointSet::new(format!("{}-rotated", self.name), self.dim, coords)
    }

    /// For each vector the index of its antipode, if every vector has one.
    pub fn antipode_indices(&self) -> Option<Vec<usize>> {
        let key = |v: &[f64]| -> Vec<i64> {
            v.iter().map(|x| (x * (1u64 << 30) as f64).round() as i64).collect()
        };
        let mut index: HashMap<Vec<i64>, Vec<usize>> = HashMap::with_capacity(self.len());
        for (i, v) in self.iter().enumerate() {
            index.entry(key(v)).or_default().push(i);
        }
        let mut out = Vec::with_capacity(self.len());
        for v in self.iter() {
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            let found = index.get(&key(&neg))?.iter().copied().find(|&j| {
                self.vector(j)
                    .iter()
                    .zip(&neg)
                    .all(|(a, b)| (a - b).abs() <= UNIT_TOL)
            })?;
            out.push(found);
        }
        Some(out)
    }

    /// Indices of `V⁺`: vectors whose first coordinate of magnitude above
    /// [`ZERO_COORD_TOL`] is positive.
    pub fn positive_half_indices(&self) -> Result<Vec<usize>> {
        if !self.centrally_symmetric {
            return Err(Error::param(format!(
                "point set '{}' is not centrally symmetric",
                self.name
            )));
        }
        let idx: Vec<usize> = self
            .iter()
            .enumerate()
            .filter(|(_, v)| {
                v.iter()
                    .find(|x| x.abs() > ZERO_COORD_TOL)
                    .is_some_and(|&x| x > 0.0)
            })
            .map(|(i, _)| i)
            .collect();
        if 2 * idx.len() != self.len() {
            return Err(Error::Integrity(format!(
                "positive half of '{}' has {} of {} vectors",
                self.name,
                idx.len(),
                self.len()
            )));
        }
        Ok(idx)
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointSet")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("len", &self.len())
            .field("centrally_symmetric", &self.centrally_symmetric)
            .finish()
    }
}

/// Shortest-vector set of `family` in dimension `d`, with construction
/// self-checks (cardinality, central symmetry, and minimal distance for sets
/// small enough to scan).
pub fn build_pointset(family: LatticeFamily, d: usize) -> Result<PointSet> {
    if let Some(fixed) = family.fixed_dim() {
        if d != fixed {
            return Err(Error::param(format!("{family} lives in dimension {fixed}, not {d}")));
        }
    } else if d < family.min_dim() {
        return Err(Error::param(format!("{family} needs d >= {}", family.min_dim())));
    }
    let coords = match family {
        LatticeFamily::Zd => construct::integer_lattice(d),
        LatticeFamily::Ad => construct::a_lattice(d)?,
        LatticeFamily::Dd => construct::d_lattice(d),
        LatticeFamily::E6 => construct::e6_lattice()?,
        LatticeFamily::E7 => construct::e7_lattice()?,
        LatticeFamily::E8 => construct::e8_lattice(),
        LatticeFamily::Bw16 => construct::barnes_wall_16(),
        LatticeFamily::Leech => construct::leech()?,
    };
    let name = match family.fixed_dim() {
        Some(_) => family.name().to_string(),
        None => format!("{}{d}", &family.name()[..1]),
    };
    let ps = PointSet::new(name, d, coords)
        .map_err(|e| Error::Integrity(format!("{family} construction: {e}")))?;

    let expected = family.kissing_number(d);
    if ps.len() != expected {
        return Err(Error::Integrity(format!(
            "{family} in dimension {d} has {} vectors, expected {expected}",
            ps.len()
        )));
    }
    if !ps.is_centrally_symmetric() {
        return Err(Error::Integrity(format!("{family} set is not centrally symmetric")));
    }
    if ps.len() >= 2 {
        let target = match family {
            LatticeFamily::Zd if d == 1 => 2.0,
            // D₂ is a rotated square lattice
            LatticeFamily::Zd | LatticeFamily::Dd if d == 2 => 2f64.sqrt(),
            LatticeFamily::Zd => 2f64.sqrt(),
            _ => 1.0,
        };
        let dm = ps.d_min().unwrap_or(target);
        if (dm - target).abs() > UNIT_TOL {
            return Err(Error::Integrity(format!(
                "{family} minimal distance {dm} differs from {target}"
            )));
        }
    }
    Ok(ps)
}

/// Exact minimal pairwise Euclidean distance.
pub fn min_distance(ps: &PointSet) -> Result<f64> {
    ps.d_min()
        .ok_or_else(|| Error::param("minimal distance needs at least two points"))
}

/// `V⁺` as its own point set.
pub fn positive_half(ps: &PointSet) -> Result<PointSet> {
    let idx = ps.positive_half_indices()?;
    let coords = idx.iter().flat_map(|&i| ps.vector(i).iter().copied()).collect();
    PointSet::new(format!("{}+", ps.name()), ps.dim(), coords)
}

/// Upper bound on the variance of the rotated-set cap estimator for a region
/// of measure `pi_a` split into `pieces` parts, each of diameter below
/// `d_min(V)`: `π − π² + (N/|V| − 1)·π`.
pub fn variance_upper_bound(pi_a: f64, pieces: usize, card_v: usize) -> f64 {
    assert!(pieces >= 1 && card_v >= 1);
    pi_a - pi_a * pi_a + (pieces as f64 / card_v as f64 - 1.0) * pi_a
}

/// Large 24-dimensional sets are first tried against the Leech symmetries,
/// which is exact whenever they preserve the set; anything else is scanned.
fn compute_min_distance(ps: &PointSet) -> f64 {
    if ps.dim() == 24 && ps.len() > 20_000 {
        if let Ok(dm) = leech_generators().and_then(|g| min_distance_by_orbits(ps, &g)) {
            return dm;
        }
    }
    scan_min_distance(ps)
}

/// Tiled O(n²) scan using `|v−w|² = |v|² + |w|² − 2 v·w`.
fn scan_min_distance(ps: &PointSet) -> f64 {
    const TILE: usize = 256;
    let n = ps.len();
    let d = ps.dim();
    let norms: Vec<f64> = ps.iter().map(|v| linalg::dot(v, v)).collect();
    // Coordinate-major copy so the inner loop runs over contiguous points.
    let mut by_coord = vec![0.0; n * d];
    for (i, v) in ps.iter().enumerate() {
        for (k, &x) in v.iter().enumerate() {
            by_coord[k * n + i] = x;
        }
    }
    let mut best = f64::INFINITY;
    let mut acc = [0.0f64; TILE];
    for i in 0..n {
        let v = ps.vector(i);
        let mut start = i + 1;
        while start < n {
            let end = (start + TILE).min(n);
            let width = end - start;
            let acc = &mut acc[..width];
            acc.fill(0.0);
            for (k, &vk) in v.iter().enumerate() {
                let col = &by_coord[k * n + start..k * n + end];
                for (a, &w) in acc.iter_mut().zip(col) {
                    *a += vk * w;
                }
            }
            for (off, &ip) in acc.iter().enumerate() {
                let d2 = norms[i] + norms[start + off] - 2.0 * ip;
                if d2 < best {
                    best = d2;
                }
            }
            start = end;
        }
    }
    best.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randsrc::RandomStream;

    fn brute_min_distance(ps: &PointSet) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..ps.len() {
            for j in i + 1..ps.len() {
                let d: f64 = ps
                    .vector(i)
                    .iter()
                    .zip(ps.vector(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                best = best.min(d.sqrt());
            }
        }
        best
    }

    #[test]
    fn family_specs() {
        assert_eq!(parse_family_spec("E8").unwrap(), (LatticeFamily::E8, Some(8)));
        assert_eq!(parse_family_spec("dd").unwrap(), (LatticeFamily::Dd, None));
        assert_eq!(parse_family_spec("a2").unwrap(), (LatticeFamily::Ad, Some(2)));
        assert_eq!(parse_family_spec("z16").unwrap(), (LatticeFamily::Zd, Some(16)));
        assert!(parse_family_spec("q3").is_err());
        assert!(parse_family_spec("dx").is_err());
    }

    #[test]
    fn cardinalities_match_kissing_numbers() {
        let cases = [
            (LatticeFamily::Ad, 2, 6),
            (LatticeFamily::Ad, 3, 12),
            (LatticeFamily::Dd, 4, 24),
            (LatticeFamily::Dd, 5, 40),
            (LatticeFamily::E6, 6, 72),
            (LatticeFamily::E7, 7, 126),
            (LatticeFamily::E8, 8, 240),
            (LatticeFamily::Bw16, 16, 4320),
            (LatticeFamily::Zd, 16, 32),
            (LatticeFamily::Ad, 16, 272),
            (LatticeFamily::Dd, 16, 480),
        ];
        for (f, d, n) in cases {
            let ps = build_pointset(f, d).unwrap();
            assert_eq!(ps.len(), n, "{f} d={d}");
            assert!(ps.is_centrally_symmetric());
        }
    }

    #[test]
    fn a2_matches_hexagon() {
        let ps = build_pointset(LatticeFamily::Ad, 2).unwrap();
        // Six unit vectors at multiples of 60°: each has exactly two
        // neighbours at inner product 1/2 and one antipode.
        for v in ps.iter() {
            let ips: Vec<f64> = ps.iter().map(|w| linalg::dot(v, w)).collect();
            assert_eq!(ips.iter().filter(|&&x| (x - 0.5).abs() < 1e-14).count(), 2);
            assert_eq!(ips.iter().filter(|&&x| (x + 0.5).abs() < 1e-14).count(), 2);
            assert_eq!(ips.iter().filter(|&&x| (x + 1.0).abs() < 1e-14).count(), 1);
        }
        assert!((min_distance(&ps).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn z4_is_signed_basis() {
        let ps = build_pointset(LatticeFamily::Zd, 4).unwrap();
        assert_eq!(ps.len(), 8);
        for v in ps.iter() {
            assert_eq!(v.iter().filter(|x| x.abs() == 1.0).count(), 1);
            assert_eq!(v.iter().filter(|x| **x == 0.0).count(), 3);
        }
    }

    #[test]
    fn min_distance_examples() {
        let z2 = build_pointset(LatticeFamily::Zd, 2).unwrap();
        assert!((min_distance(&z2).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let a2 = build_pointset(LatticeFamily::Ad, 2).unwrap();
        assert!((min_distance(&a2).unwrap() - 1.0).abs() < 1e-12);
        let e8 = build_pointset(LatticeFamily::E8, 8).unwrap();
        assert!((min_distance(&e8).unwrap() - 1.0).abs() < 1e-12);
        assert!((brute_min_distance(&e8) - 1.0).abs() < 1e-12);

        let single = PointSet::new("one", 3, vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(min_distance(&single), Err(Error::Parameter(_))));
    }

    #[test]
    fn tiled_scan_matches_brute_force_on_random_sets() {
        let mut s = RandomStream::new(12, 0);
        for n in [2, 3, 255, 256, 257, 700] {
            let coords: Vec<f64> = (0..n).flat_map(|_| s.sphere(5)).collect();
            let ps = PointSet::new("rand", 5, coords).unwrap();
            assert!((min_distance(&ps).unwrap() - brute_min_distance(&ps)).abs() < 1e-12);
        }
    }

    #[test]
    fn root_sets_have_unit_minimal_distance() {
        for (f, d) in [
            (LatticeFamily::Ad, 5),
            (LatticeFamily::Dd, 7),
            (LatticeFamily::E6, 6),
            (LatticeFamily::E7, 7),
            (LatticeFamily::Bw16, 16),
        ] {
            let ps = build_pointset(f, d).unwrap();
            assert!((min_distance(&ps).unwrap() - 1.0).abs() < 1e-12, "{f}");
        }
        for d in 2..=6 {
            let z = build_pointset(LatticeFamily::Zd, d).unwrap();
            assert!((min_distance(&z).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn positive_half_examples() {
        let z3 = build_pointset(LatticeFamily::Zd, 3).unwrap();
        let half = positive_half(&z3).unwrap();
        let mut vs: Vec<Vec<f64>> = half.iter().map(<[f64]>::to_vec).collect();
        vs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(
            vs,
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]
        );
        assert_eq!(positive_half(&build_pointset(LatticeFamily::Ad, 2).unwrap()).unwrap().len(), 3);
        assert_eq!(positive_half(&build_pointset(LatticeFamily::E8, 8).unwrap()).unwrap().len(), 120);
    }

    #[test]
    fn positive_half_and_its_negation_partition_the_set() {
        for (f, d) in [(LatticeFamily::Ad, 4), (LatticeFamily::E7, 7), (LatticeFamily::Dd, 5)] {
            let ps = build_pointset(f, d).unwrap();
            let idx = ps.positive_half_indices().unwrap();
            let anti = ps.antipode_indices().unwrap();
            let mut seen = vec![false; ps.len()];
            for &i in &idx {
                assert!(!seen[i] && !seen[anti[i]]);
                seen[i] = true;
                seen[anti[i]] = true;
            }
            assert!(seen.iter().all(|&b| b));
        }
    }

    #[test]
    fn positive_half_rejects_asymmetric_sets() {
        let ps = PointSet::new("tri", 2, vec![1.0, 0.0, -0.5, 0.75f64.sqrt(), -0.5, -(0.75f64.sqrt())]).unwrap();
        assert!(!ps.is_centrally_symmetric());
        assert!(matches!(positive_half(&ps), Err(Error::Parameter(_))));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(matches!(build_pointset(LatticeFamily::E8, 7), Err(Error::Parameter(_))));
        assert!(matches!(build_pointset(LatticeFamily::Ad, 1), Err(Error::Parameter(_))));
        assert!(build_pointset(LatticeFamily::Zd, 1).is_ok());
    }

    #[test]
    fn rotation_preserves_minimal_distance() {
        let mut s = RandomStream::new(13, 0);
        for (f, d) in [(LatticeFamily::E8, 8), (LatticeFamily::Dd, 5), (LatticeFamily::Ad, 3)] {
            let ps = build_pointset(f, d).unwrap();
            let base = min_distance(&ps).unwrap();
            for _ in 0..5 {
                let t = s.haar_orthogonal(d);
                let rotated = ps.rotated(&t).unwrap();
                assert!((min_distance(&rotated).unwrap() - base).abs() < 1e-10);
                assert!(rotated.is_centrally_symmetric());
            }
        }
    }

    #[test]
    fn variance_bound_examples() {
        let b = variance_upper_bound(0.001, 1, 240);
        assert!((b - (0.001 / 240.0 - 1e-6)).abs() < 1e-18);
        assert!((b - 3.1667e-6).abs() < 1e-9);
        let p = 0.3;
        assert!((variance_upper_bound(p, 50, 50) - (p - p * p)).abs() < 1e-16);
        assert_eq!(variance_upper_bound(0.5, 2, 4), 0.0);
    }

    #[test]
    fn family_names_round_trip() {
        for f in LatticeFamily::ALL {
            assert_eq!(f.name().parse::<LatticeFamily>().unwrap(), f);
        }
        assert!("e9".parse::<LatticeFamily>().is_err());
        assert_eq!(LatticeFamily::max_kissing(8), Some(LatticeFamily::E8));
        assert_eq!(LatticeFamily::max_kissing(9), None);
    }
}
