//! Integration regions, ray intersection and radial χ integrals.
//!
//! All regions are closed. Ray intersections are returned as merged lists of
//! intervals of positive length; touching a region at a single radius carries
//! no probability and is dropped.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::randsrc::RandomStream;
use crate::specfun::ChiCdf;

/// Axis-aligned box `∏ [lo_j, hi_j]`; bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::param("box needs matching, non-empty bound lists"));
        }
        for (j, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if l.is_nan() || h.is_nan() || l == f64::INFINITY || h == f64::NEG_INFINITY || l >= h {
                return Err(Error::param(format!("box axis {j} has invalid bounds [{l}, {h}]")));
            }
        }
        Ok(AxisBox { lo, hi })
    }

    /// `[lo, hi]^d`.
    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self> {
        AxisBox::new(vec![lo; d], vec![hi; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    #[inline]
    fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&v, (&l, &h))| l <= v && v <= h)
    }

    /// Whether the interiors of `self` and `other` intersect.
    fn interiors_meet(&self, other: &AxisBox) -> bool {
        (0..self.dim()).all(|j| {
            self.lo[j].max(other.lo[j]) < self.hi[j].min(other.hi[j])
        })
    }

    fn negated(&self) -> AxisBox {
        AxisBox {
            lo: self.hi.iter().map(|h| -h).collect(),
            hi: self.lo.iter().map(|l| -l).collect(),
        }
    }

    /// `{r ≥ 0 : mu + r w ∈ box}` as `(a, b)`, or `None` if empty or a point.
    fn ray(&self, mu: &[f64], w: &[f64]) -> Option<(f64, f64)> {
        let mut a = 0.0f64;
        let mut b = f64::INFINITY;
        for j in 0..self.dim() {
            let (l, h, m, wj) = (self.lo[j], self.hi[j], mu[j], w[j]);
            if wj == 0.0 {
                if m < l || m > h {
                    return None;
                }
                continue;
            }
            let (t0, t1) = if wj > 0.0 {
                ((l - m) / wj, (h - m) / wj)
            } else {
                ((h - m) / wj, (l - m) / wj)
            };
            a = a.max(t0);
            b = b.min(t1);
            if a >= b {
                return None;
            }
        }
        Some((a, b))
    }
}

/// Ball `{x : ‖x − center‖ ≤ radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("ball center must be a finite, non-empty vector"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    #[inline]
    fn contains(&self, x: &[f64]) -> bool {
        let d2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        d2 <= self.radius * self.radius
    }

    fn ray(&self, mu: &[f64], w: &[f64]) -> Option<(f64, f64)> {
        // ‖(mu − b) + r w‖² ≤ c²  ⇔  a r² + 2 h r + k ≤ 0
        let mut a = 0.0;
        let mut h = 0.0;
        let mut k = -self.radius * self.radius;
        for ((&m, &b), &wj) in mu.iter().zip(&self.center).zip(w) {
            let e = m - b;
            a += wj * wj;
            h += e * wj;
            k += e * e;
        }
        let disc = h * h - a * k;
        if disc <= 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        // stable roots of a r² + 2 h r + k
        let q = -(h + h.signum() * sq);
        let (r0, r1) = if q == 0.0 {
            (-sq / a, sq / a)
        } else {
            let x = q / a;
            let y = k / q;
            (x.min(y), x.max(y))
        };
        let lo = r0.max(0.0);
        (lo < r1).then_some((lo, r1))
    }
}

type Indicator = dyn Fn(&[f64]) -> bool + Send + Sync;

/// User-supplied region known only through its indicator.
#[derive(Clone)]
pub struct CustomRegion {
    name: String,
    dim: usize,
    indicator: Arc<Indicator>,
}

impl fmt::Debug for CustomRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomRegion")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Region {
    Box(AxisBox),
    Ball(Ball),
    /// Boxes with pairwise disjoint interiors.
    BoxUnion(Vec<AxisBox>),
    Custom(CustomRegion),
}

impl Region {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Ok(Region::Box(AxisBox::new(lo, hi)?))
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Ok(Region::Ball(Ball::new(center, radius)?))
    }

    pub fn union(boxes: Vec<AxisBox>) -> Result<Self> {
        let d = boxes
            .first()
            .ok_or_else(|| Error::param("box union needs at least one box"))?
            .dim();
        if boxes.iter().any(|b| b.dim() != d) {
            return Err(Error::param("box union members differ in dimension"));
        }
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                if boxes[i].interiors_meet(&boxes[j]) {
                    return Err(Error::param(format!("box union members {i} and {j} overlap")));
                }
            }
        }
        Ok(Region::BoxUnion(boxes))
    }

    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        indicator: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        Region::Custom(CustomRegion {
            name: name.into(),
            dim,
            indicator: Arc::new(indicator),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Box(b) => b.dim(),
            Region::Ball(e) => e.dim(),
            Region::BoxUnion(bs) => bs[0].dim(),
            Region::Custom(c) => c.dim,
        }
    }

    /// Whether the radial integral has a closed form for this region.
    pub fn has_radial_form(&self) -> bool {
        !matches!(self, Region::Custom(_))
    }

    /// Membership test; `x` must have the region's dimension.
    #[inline]
    pub fn indicator(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            Region::Box(b) => b.contains(x),
            Region::Ball(e) => e.contains(x),
            Region::BoxUnion(bs) => bs.iter().any(|b| b.contains(x)),
            Region::Custom(c) => (c.indicator)(x),
        }
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x.len())?;
        Ok(self.indicator(x))
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::param(format!(
                "vector of dimension {d} used with a region of dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// `{r ≥ 0 : mu + r w ∈ A}`.
    pub fn ray_intervals(&self, mu: &[f64], w: &[f64]) -> Result<IntervalList> {
        let mut out = IntervalList::default();
        self.ray_intervals_into(mu, w, &mut out)?;
        Ok(out)
    }

    /// As [`Region::ray_intervals`], reusing `out`.
    pub fn ray_intervals_into(&self, mu: &[f64], w: &[f64], out: &mut IntervalList) -> Result<()> {
        self.check_dim(mu.len())?;
        self.check_dim(w.len())?;
        if w.iter().all(|&x| x == 0.0) {
            return Err(Error::param("ray direction is zero"));
        }
        out.clear();
        match self {
            Region::Box(b) => out.extend(b.ray(mu, w)),
            Region::Ball(e) => out.extend(e.ray(mu, w)),
            Region::BoxUnion(bs) => {
                for b in bs {
                    out.extend(b.ray(mu, w));
                }
                out.normalize();
            }
            Region::Custom(c) => {
                return Err(Error::Unsupported(format!(
                    "region '{}' has no ray intersection",
                    c.name
                )))
            }
        }
        Ok(())
    }

    /// `f_A(u) = P{r u ∈ Ã}` for `r ~ χ(d)`, i.e. the χ mass of the ray from
    /// `mu` along `gamma · u`.
    pub fn radial_integral(&self, mu: &[f64], gamma: &Matrix, u: &[f64]) -> Result<f64> {
        self.check_dim(u.len())?;
        let n = linalg::norm(u);
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::param(format!("direction has norm {n}, not 1")));
        }
        let w = gamma.mul_vec(u);
        let chi = ChiCdf::new(self.dim());
        Ok(self.ray_intervals(mu, &w)?.chi_mass(&chi))
    }

    /// Whether the interiors of `A` and `−A` are disjoint.
    pub fn is_centrally_antisymmetric(&self) -> Result<bool> {
        match self {
            Region::Box(b) => Ok(!b.interiors_meet(&b.negated())),
            Region::Ball(e) => Ok(linalg::norm(&e.center) >= e.radius),
            Region::BoxUnion(bs) => Ok(bs
                .iter()
                .all(|a| bs.iter().all(|b| !a.interiors_meet(&b.negated())))),
            Region::Custom(c) => Err(Error::Unsupported(format!(
                "no antisymmetry test for region '{}'",
                c.name
            ))),
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn num(x: f64) -> String {
            if x == f64::INFINITY {
                "inf".into()
            } else if x == f64::NEG_INFINITY {
                "-inf".into()
            } else {
                format!("{x}")
            }
        }
        fn write_box(f: &mut fmt::Formatter<'_>, b: &AxisBox) -> fmt::Result {
            let axes: Vec<String> = b
                .lo
                .iter()
                .zip(&b.hi)
                .map(|(l, h)| format!("{},{}", num(*l), num(*h)))
                .collect();
            write!(f, "box:{}", axes.join(";"))
        }
        match self {
            Region::Box(b) => write_box(f, b),
            Region::Ball(e) => {
                let c: Vec<String> = e.center.iter().map(|x| num(*x)).collect();
                write!(f, "ell:{};{}", c.join(","), num(e.radius))
            }
            Region::BoxUnion(bs) => {
                f.write_str("union:")?;
                for (i, b) in bs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    write_box(f, b)?;
                }
                Ok(())
            }
            Region::Custom(c) => write!(f, "custom:{}", c.name),
        }
    }
}

/// Sorted, disjoint, merged intervals `[a, b]` with `0 ≤ a < b ≤ ∞`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntervalList {
    items: Vec<(f64, f64)>,
}

impl IntervalList {
    /// Build from arbitrary intervals; empty and reversed ones are dropped.
    pub fn from_intervals(items: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut out = IntervalList::default();
        out.extend(items.into_iter().filter(|(a, b)| a < b));
        out.normalize();
        out
    }

    pub fn as_slice(&self) -> &[(f64, f64)] {
        &self.items
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, r: f64) -> bool {
        self.items.iter().any(|&(a, b)| a <= r && r <= b)
    }

    /// χ probability of the union.
    pub fn chi_mass(&self, chi: &ChiCdf) -> f64 {
        let total: f64 = self.items.iter().map(|&(a, b)| chi.mass(a, b)).sum();
        total.clamp(0.0, 1.0)
    }

    fn clear(&mut self) {
        self.items.clear();
    }

    fn extend(&mut self, items: impl IntoIterator<Item = (f64, f64)>) {
        self.items.extend(items);
    }

    fn normalize(&mut self) {
        if self.items.len() < 2 {
            return;
        }
        self.items.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(self.items.len());
        for &(a, b) in &self.items {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        self.items = merged;
    }
}

/// Labels of the benchmark regions.
pub const STANDARD_LABELS: [&str; 10] = ["E1", "E2", "E3", "O1", "O2", "O3", "R1", "R2", "R3", "S"];

/// Benchmark regions: balls of radius 1 centred at `(1,0,…)`, `(0.5,0,…)`
/// and `(1,…,1)`; orthants bounded above by 0, 1, −1; cubes `[−1,1]^d`,
/// `[0,2]^d`, `[0.5,1.5]^d`; and the two-slab set `S`.
pub fn standard_region(label: &str, d: usize) -> Result<Region> {
    if d == 0 {
        return Err(Error::param("dimension must be at least 1"));
    }
    let inf = f64::INFINITY;
    let first_axis = |x: f64| {
        let mut c = vec![0.0; d];
        c[0] = x;
        c
    };
    match label.to_ascii_uppercase().as_str() {
        "E1" => Region::ball(first_axis(1.0), 1.0),
        "E2" => Region::ball(first_axis(0.5), 1.0),
        "E3" => Region::ball(vec![1.0; d], 1.0),
        "O1" => Region::boxed(vec![-inf; d], vec![0.0; d]),
        "O2" => Region::boxed(vec![-inf; d], vec![1.0; d]),
        "O3" => Region::boxed(vec![-inf; d], vec![-1.0; d]),
        "R1" => Ok(Region::Box(AxisBox::cube(d, -1.0, 1.0)?)),
        "R2" => Ok(Region::Box(AxisBox::cube(d, 0.0, 2.0)?)),
        "R3" => Ok(Region::Box(AxisBox::cube(d, 0.5, 1.5)?)),
        "S" => {
            if d < 2 {
                return Err(Error::param("region S needs d >= 2"));
            }
            let slab = |a: f64, b: f64| {
                let mut lo = vec![-1.0; d];
                let mut hi = vec![1.0; d];
                lo[0] = a;
                hi[0] = b;
                AxisBox::new(lo, hi)
            };
            Region::union(vec![slab(-1.0, -0.5)?, slab(0.0, 0.5)?])
        }
        _ => Err(Error::param(format!("unknown region label '{label}'"))),
    }
}

/// Parse a region for dimension `d`: a standard label, `box:lo,hi;lo,hi;…`,
/// `ell:c1,…,cd;radius` or `union:box:…|box:…`.
pub fn parse_region(text: &str, d: usize) -> Result<Region> {
    let text = text.trim();
    let region = if let Some(rest) = text.strip_prefix("union:") {
        let boxes = rest
            .split('|')
            .map(|part| match parse_region(part, d)? {
                Region::Box(b) => Ok(b),
                _ => Err(Error::param("union members must be boxes")),
            })
            .collect::<Result<Vec<_>>>()?;
        Region::union(boxes)?
    } else if let Some(rest) = text.strip_prefix("box:") {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for axis in rest.split(';') {
            let vals = parse_numbers(axis)?;
            if vals.len() != 2 {
                return Err(Error::param(format!("box axis '{axis}' needs 'lo,hi'")));
            }
            lo.push(vals[0]);
            hi.push(vals[1]);
        }
        Region::boxed(lo, hi)?
    } else if let Some(rest) = text.strip_prefix("ell:") {
        let (center, radius) = rest
            .split_once(';')
            .ok_or_else(|| Error::param("ellipsoid needs 'c1,...,cd;radius'"))?;
        let radius = parse_numbers(radius)?;
        if radius.len() != 1 {
            return Err(Error::param("ellipsoid needs a single radius"));
        }
        Region::ball(parse_numbers(center)?, radius[0])?
    } else {
        return standard_region(text, d);
    };
    if region.dim() != d {
        return Err(Error::param(format!(
            "region '{text}' has dimension {}, expected {d}",
            region.dim()
        )));
    }
    Ok(region)
}

fn parse_numbers(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            match tok {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => tok
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::param(format!("invalid number '{tok}'"))),
            }
        })
        .collect()
}

/// Number of `n_dirs` uniform directions `u` for which the rays from `mu`
/// along both `Γu` and `−Γu` meet the region.
pub fn ray_antisymmetry_diagnostic(
    region: &Region,
    mu: &[f64],
    gamma: &Matrix,
    n_dirs: usize,
    s: &mut RandomStream,
) -> Result<usize> {
    let d = region.dim();
    let mut u = vec![0.0; d];
    let mut w = vec![0.0; d];
    let mut plus = IntervalList::default();
    let mut minus = IntervalList::default();
    let mut violations = 0;
    for _ in 0..n_dirs {
        s.fill_sphere(&mut u);
        gamma.mul_vec_into(&u, &mut w);
        region.ray_intervals_into(mu, &w, &mut plus)?;
        w.iter_mut().for_each(|x| *x = -*x);
        region.ray_intervals_into(mu, &w, &mut minus)?;
        if !plus.is_empty() && !minus.is_empty() {
            violations += 1;
        }
    }
    Ok(violations)
}
