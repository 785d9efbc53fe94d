//! The five built-in estimators.

use super::{check_point_set, Context, Estimator, EstimatorKind, Problem, Scratch};
use crate::error::{Error, Result};
use crate::lattices::PointSet;
use crate::randsrc::RandomStream;

/// `I_A(μ + Γz)` for one Gaussian `z`.
pub struct Crude;

/// `(I_A(μ + Γz) + I_A(μ − Γz)) / 2`.
pub struct CrudeAntithetic;

/// `|V|⁻¹ Σ_v I_A(μ + r_v ΓTv)` with independent `r_v ~ χ(d)`.
pub struct Spherical;

/// `|V|⁻¹ Σ_{v∈V⁺} [I_A(μ + r_v ΓTv) + I_A(μ − r_v ΓTv)]`, one radius per
/// antipodal pair.
pub struct SphericalAntithetic;

/// `|V|⁻¹ Σ_v f_A(Tv)`, the radial integral in closed form.
pub struct SphericalStar;

/// `x = μ + scale · w`.
#[inline]
fn shift(x: &mut [f64], mu: &[f64], w: &[f64], scale: f64) {
    for ((xi, &m), &wi) in x.iter_mut().zip(mu).zip(w) {
        *xi = m + scale * wi;
    }
}

impl Estimator for Crude {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Crude
    }

    fn replicate(&self, ctx: &Context<'_>, s: &mut RandomStream, sc: &mut Scratch) -> f64 {
        let p = ctx.problem();
        s.fill_normal(&mut sc.z);
        p.gamma().mul_vec_into(&sc.z, &mut sc.w);
        shift(&mut sc.x, p.mu(), &sc.w, 1.0);
        f64::from(u8::from(p.region().indicator(&sc.x)))
    }
}

impl Estimator for CrudeAntithetic {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::CrudeAt
    }

    fn replicate(&self, ctx: &Context<'_>, s: &mut RandomStream, sc: &mut Scratch) -> f64 {
        let p = ctx.problem();
        s.fill_normal(&mut sc.z);
        p.gamma().mul_vec_into(&sc.z, &mut sc.w);
        shift(&mut sc.x, p.mu(), &sc.w, 1.0);
        shift(&mut sc.y, p.mu(), &sc.w, -1.0);
        let hits = u8::from(p.region().indicator(&sc.x)) + u8::from(p.region().indicator(&sc.y));
        0.5 * f64::from(hits)
    }
}

impl Estimator for Spherical {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Sph
    }

    fn replicate(&self, ctx: &Context<'_>, s: &mut RandomStream, sc: &mut Scratch) -> f64 {
        let p = ctx.problem();
        let v = ctx.points();
        sc.draw_rotation(p.gamma(), s);
        let mut hits = 0usize;
        for u in v.iter() {
            let r = ctx.chi_sampler().sample(s);
            sc.apply_map(u);
            shift(&mut sc.x, p.mu(), &sc.w, r);
            hits += usize::from(p.region().indicator(&sc.x));
        }
        hits as f64 / v.len() as f64
    }
}

/// Pair sums `I_A(μ + r ΓTv) + I_A(μ − r ΓTv)` over `V⁺`, in draw order.
fn antithetic_pairs(ctx: &Context<'_>, s: &mut RandomStream, sc: &mut Scratch, mut each: impl FnMut(u8)) {
    let p = ctx.problem();
    let v = ctx.points();
    sc.draw_rotation(p.gamma(), s);
    for &i in ctx.positive_half() {
        let r = ctx.chi_sampler().sample(s);
        sc.apply_map(v.vector(i));
        shift(&mut sc.x, p.mu(), &sc.w, r);
        shift(&mut sc.y, p.mu(), &sc.w, -r);
        each(u8::from(p.region().indicator(&sc.x)) + u8::from(p.region().indicator(&sc.y)));
    }
}

impl Estimator for SphericalAntithetic {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::SphAt
    }

    fn needs_positive_half(&self) -> bool {
        true
    }

    fn validate(&self, problem: &Problem, points: Option<&PointSet>) -> Result<()> {
        check_point_set(self.name(), problem, points)?;
        if let Some(v) = points {
            if !v.is_centrally_symmetric() {
                return Err(Error::param(format!(
                    "sph-at needs a centrally symmetric point set; '{}' is not",
                    v.name()
                )));
            }
        }
        Ok(())
    }

    fn replicate(&self, ctx: &Context<'_>, s: &mut RandomStream, sc: &mut Scratch) -> f64 {
        let mut hits = 0usize;
        antithetic_pairs(ctx, s, sc, |k| hits += usize::from(k));
        hits as f64 / ctx.points().len() as f64
    }
}

impl Estimator for SphericalStar {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::SphStar
    }

    fn chi_cdf_uncounted(&self) -> bool {
        true
    }

    fn validate(&self, problem: &Problem, points: Option<&PointSet>) -> Result<()> {
        check_point_set(self.name(), problem, points)?;
        if !problem.region().has_radial_form() {
            return Err(Error::Unsupported(
                "sph-star needs a region with a closed-form radial integral".into(),
            ));
        }
        Ok(())
    }

    fn replicate(&self, ctx: &Context<'_>, s: &mut RandomStream, sc: &mut Scratch) -> f64 {
        let p = ctx.problem();
        let v = ctx.points();
        sc.draw_rotation(p.gamma(), s);
        let mut total = 0.0;
        for u in v.iter() {
            sc.apply_map(u);
            p.region()
                .ray_intervals_into(p.mu(), &sc.w, &mut sc.intervals)
                .expect("validated region and nonzero direction");
            total += sc.intervals.chi_mass(ctx.chi_cdf());
        }
        total / v.len() as f64
    }
}

/// Counts of antipodal-pair sums `0`, `1`, `2` over `m` replicates of
/// `sph-at`, drawn exactly as [`SphericalAntithetic`] draws them.
pub fn antipodal_pair_histogram(
    problem: &Problem,
    v: &PointSet,
    m: usize,
    stream: &RandomStream,
) -> Result<[u64; 3]> {
    SphericalAntithetic.validate(problem, Some(v))?;
    let ctx = Context::new(problem, Some(v), true)?;
    let mut counts = [0u64; 3];
    let mut sc = Scratch::new(problem.dim());
    for i in 0..m {
        let mut s = stream.substream(i as u64);
        antithetic_pairs(&ctx, &mut s, &mut sc, |k| counts[usize::from(k)] += 1);
    }
    Ok(counts)
}
