//! Reward realization as separability of visitation vectors.
//!
//! A scalar feasibility reward exists iff the hulls of the good and bad
//! visitations are disjoint; a `d`-dimensional one exists iff no bad
//! visitation lies in the hull of the good ones. Strict separation is encoded
//! with a margin of 1, which loses nothing because `(r, c)` can be rescaled.

use num::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::{check_feasible, dot, FarkasCertificate, Feasibility, LinearProgram, Sense, VarBound};
use crate::mdp::{compute_visitations, enumerate_deterministic_policies, MarkovEnv, Policy, VisitationVector};
use crate::numeric::{NumericMode, Rational};
use crate::reward::RewardSpec;
use crate::soap::{check_consistency, Soap};
use crate::verifier::{verify_realization, RealizationReport};

/// Named visitation vectors of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    names: Vec<String>,
    points: Vec<VisitationVector>,
}

impl PointSet {
    pub fn new(names: Vec<String>, points: Vec<VisitationVector>) -> Result<Self> {
        if names.len() != points.len() {
            return Err(Error::Malformed(format!("{} names for {} points", names.len(), points.len())));
        }
        if let Some(first) = points.first() {
            if let Some(p) = points.iter().position(|p| p.len() != first.len()) {
                return Err(Error::Malformed(format!(
                    "point {:?} has dimension {}, expected {}",
                    names[p],
                    points[p].len(),
                    first.len()
                )));
            }
        }
        Ok(PointSet { names, points })
    }

    /// Visitations of `policies` in `env`.
    pub fn from_policies(env: &MarkovEnv, policies: &[Policy], mode: NumericMode) -> Result<Self> {
        let points = compute_visitations(env, policies, mode)?;
        PointSet::new(policies.iter().map(|p| p.name.clone()).collect(), points)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn points(&self) -> &[VisitationVector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Common dimension, `None` when empty.
    pub fn dimension(&self) -> Option<usize> {
        self.points.first().map(VisitationVector::len)
    }

    /// `Σ λ_i ρ_i`.
    pub fn combine(&self, weights: &[Rational]) -> VisitationVector {
        let n = self.dimension().unwrap_or(0);
        let mut acc = vec![Rational::zero(); n];
        for (w, p) in weights.iter().zip(&self.points) {
            if w.is_zero() {
                continue;
            }
            for (a, x) in acc.iter_mut().zip(p.entries()) {
                *a += w * x;
            }
        }
        VisitationVector::new(acc)
    }

    fn label(&self, weights: Vec<Rational>) -> Vec<(String, Rational)> {
        self.names.iter().cloned().zip(weights).collect()
    }

    fn subset(&self, indices: &[usize]) -> Vec<&VisitationVector> {
        indices.iter().map(|&i| &self.points[i]).collect()
    }
}

fn check_dimensions(a: Option<usize>, b: Option<usize>) -> Result<()> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(Error::Malformed(format!("dimension mismatch: {x} vs {y}"))),
        _ => Ok(()),
    }
}

/// Half-space pair `{x : normal·x ≥ offset}` (kept side) and
/// `{x : normal·x ≤ offset − 1}` (excluded side).
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

impl Hyperplane {
    pub fn value(&self, x: &VisitationVector) -> Rational {
        dot(&self.normal, x.entries())
    }

    pub fn keeps(&self, x: &VisitationVector, mode: NumericMode) -> bool {
        mode.approx_ge(&self.value(x), &self.offset)
    }

    /// On the excluded side with the full margin.
    pub fn excludes(&self, x: &VisitationVector, mode: NumericMode) -> bool {
        mode.approx_ge(&(&self.offset - Rational::one()), &self.value(x))
    }

    /// Strictly below the offset, i.e. infeasible under the row.
    pub fn cuts(&self, x: &VisitationVector, mode: NumericMode) -> bool {
        !mode.approx_ge(&self.value(x), &self.offset)
    }

    fn separates(&self, keep: &[&VisitationVector], exclude: &[&VisitationVector], mode: NumericMode) -> bool {
        keep.iter().all(|x| self.keeps(x, mode)) && exclude.iter().all(|x| self.excludes(x, mode))
    }

    fn from_lp_point(x: &[Rational], n: usize) -> Self {
        Hyperplane {
            normal: x[..n].to_vec(),
            offset: x[n].clone(),
        }
    }
}

/// Find `(r, c)` with `r·ρ ≥ c` on `keep` and `r·ρ ≤ c − 1` on `exclude`.
pub fn margin_hyperplane(keep: &[&VisitationVector], exclude: &[&VisitationVector], mode: NumericMode) -> Result<Option<Hyperplane>> {
    let n = keep
        .first()
        .or(exclude.first())
        .map(|p| p.len())
        .ok_or_else(|| Error::Malformed("margin LP needs at least one point".into()))?;
    if let Some(p) = keep.iter().chain(exclude).find(|p| p.len() != n) {
        return Err(Error::Malformed(format!("dimension mismatch: {} vs {n}", p.len())));
    }
    let mut lp = LinearProgram::new(n + 1);
    for j in 0..=n {
        lp.set_bounds(j, VarBound::free());
    }
    let row = |p: &VisitationVector| {
        let mut coeffs = p.entries().to_vec();
        coeffs.push(-Rational::one());
        coeffs
    };
    for p in keep {
        lp.add_row(row(p), Sense::Ge, Rational::zero());
    }
    for p in exclude {
        lp.add_row(row(p), Sense::Le, -Rational::one());
    }
    match check_feasible(&lp, mode)? {
        Feasibility::Feasible(x) => {
            let h = Hyperplane::from_lp_point(&x, n);
            if !h.separates(keep, exclude, mode) {
                return Err(Error::Numerical("margin LP returned a non-separating hyperplane".into()));
            }
            Ok(Some(h))
        }
        Feasibility::Infeasible(_) => Ok(None),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    /// Convex weights `λ` with `Σ λ_i ρ_i = target`.
    Member { coefficients: Vec<Rational> },
    /// Hull on the kept side, target on the excluded side.
    Outside { separator: Hyperplane },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullQuery {
    pub target: VisitationVector,
    pub membership: Membership,
}

impl HullQuery {
    pub fn is_member(&self) -> bool {
        matches!(self.membership, Membership::Member { .. })
    }

    pub fn coefficients(&self) -> Option<&[Rational]> {
        match &self.membership {
            Membership::Member { coefficients } => Some(coefficients),
            Membership::Outside { .. } => None,
        }
    }

    pub fn separator(&self) -> Option<&Hyperplane> {
        match &self.membership {
            Membership::Outside { separator } => Some(separator),
            Membership::Member { .. } => None,
        }
    }
}

/// Rows `Σ_i w_i ρ_i[j]` for `j < n` over the given column blocks, each
/// block scaled by its sign.
fn combination_rows(n: usize, blocks: &[(&[VisitationVector], Rational)]) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|j| {
            blocks
                .iter()
                .flat_map(|(pts, sign)| pts.iter().map(move |p| sign * &p.entries()[j]))
                .collect()
        })
        .collect()
}

fn simplex_row(total: usize, range: std::ops::Range<usize>) -> Vec<Rational> {
    (0..total)
        .map(|j| if range.contains(&j) { Rational::one() } else { Rational::zero() })
        .collect()
}

fn check_weights(weights: &[Rational], mode: NumericMode) -> Result<()> {
    let zero = Rational::zero();
    let total: Rational = weights.iter().sum();
    if weights.iter().any(|w| !mode.approx_ge(w, &zero)) || !mode.approx_eq(&total, &Rational::one()) {
        return Err(Error::Numerical("LP returned weights outside the simplex".into()));
    }
    Ok(())
}

/// Whether `target` lies in the convex hull of `hull`. Non-members come with
/// a separating hyperplane read off the Farkas certificate.
pub fn in_convex_hull(target: &VisitationVector, hull: &PointSet, mode: NumericMode) -> Result<HullQuery> {
    check_dimensions(Some(target.len()), hull.dimension())?;
    let n = target.len();
    let k = hull.len();
    if k == 0 {
        let separator = Hyperplane {
            normal: vec![Rational::zero(); n],
            offset: Rational::one(),
        };
        return Ok(HullQuery {
            target: target.clone(),
            membership: Membership::Outside { separator },
        });
    }
    let mut lp = LinearProgram::new(k);
    for (row, t) in combination_rows(n, &[(hull.points(), Rational::one())]).into_iter().zip(target.entries()) {
        lp.add_row(row, Sense::Eq, t.clone());
    }
    lp.add_row(simplex_row(k, 0..k), Sense::Eq, Rational::one());
    let membership = match check_feasible(&lp, mode)? {
        Feasibility::Feasible(lambda) => {
            check_weights(&lambda, mode)?;
            if mode.is_exact() && &hull.combine(&lambda) != target {
                return Err(Error::Numerical("hull weights do not reproduce the target".into()));
            }
            Membership::Member { coefficients: lambda }
        }
        Feasibility::Infeasible(farkas) => {
            let hull_refs: Vec<&VisitationVector> = hull.points().iter().collect();
            let separator = separator_from_farkas(&farkas, n, target)
                .filter(|h| h.separates(&hull_refs, &[target], mode));
            let separator = match separator {
                Some(h) => h,
                None => margin_hyperplane(&hull_refs, &[target], mode)?
                    .ok_or_else(|| Error::Numerical("hull LP infeasible but no separating hyperplane".into()))?,
            };
            Membership::Outside { separator }
        }
    };
    Ok(HullQuery {
        target: target.clone(),
        membership,
    })
}

/// From `y = (w, y₀)` with `w·ρ_i + y₀ ≤ 0 < w·t + y₀ = δ`:
/// `r = −w/δ`, `c = y₀/δ`.
fn separator_from_farkas(farkas: &FarkasCertificate, n: usize, target: &VisitationVector) -> Option<Hyperplane> {
    let y = &farkas.multipliers;
    let w = &y[..n];
    let delta = dot(w, target.entries()) + &y[n];
    if delta <= Rational::zero() {
        return None;
    }
    Some(Hyperplane {
        normal: w.iter().map(|wi| -wi / &delta).collect(),
        offset: &y[n] / &delta,
    })
}

/// A point in both hulls.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonPoint {
    pub point: VisitationVector,
    pub a_coefficients: Vec<(String, Rational)>,
    pub b_coefficients: Vec<(String, Rational)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HullIntersection {
    Intersect(CommonPoint),
    /// `a` on the kept side, `b` on the excluded side.
    Disjoint { separator: Hyperplane },
}

impl HullIntersection {
    pub fn intersects(&self) -> bool {
        matches!(self, HullIntersection::Intersect(_))
    }
}

/// Whether `conv(a) ∩ conv(b)` is nonempty.
pub fn hulls_intersect(a: &PointSet, b: &PointSet, mode: NumericMode) -> Result<HullIntersection> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Malformed("hull intersection needs two nonempty point sets".into()));
    }
    check_dimensions(a.dimension(), b.dimension())?;
    let n = a.dimension().unwrap_or(0);
    let (ka, kb) = (a.len(), b.len());
    let mut lp = LinearProgram::new(ka + kb);
    for row in combination_rows(n, &[(a.points(), Rational::one()), (b.points(), -Rational::one())]) {
        lp.add_row(row, Sense::Eq, Rational::zero());
    }
    lp.add_row(simplex_row(ka + kb, 0..ka), Sense::Eq, Rational::one());
    lp.add_row(simplex_row(ka + kb, ka..ka + kb), Sense::Eq, Rational::one());
    match check_feasible(&lp, mode)? {
        Feasibility::Feasible(x) => {
            let (lambda, mu) = x.split_at(ka);
            check_weights(lambda, mode)?;
            check_weights(mu, mode)?;
            let point = a.combine(lambda);
            if mode.is_exact() && b.combine(mu) != point {
                return Err(Error::Numerical("hull weights disagree on the common point".into()));
            }
            Ok(HullIntersection::Intersect(CommonPoint {
                point,
                a_coefficients: a.label(lambda.to_vec()),
                b_coefficients: b.label(mu.to_vec()),
            }))
        }
        Feasibility::Infeasible(farkas) => {
            let keep: Vec<&VisitationVector> = a.points().iter().collect();
            let exclude: Vec<&VisitationVector> = b.points().iter().collect();
            let y = &farkas.multipliers;
            let delta = &y[n] + &y[n + 1];
            let from_farkas = (delta > Rational::zero())
                .then(|| Hyperplane {
                    normal: y[..n].iter().map(|wi| -wi / &delta).collect(),
                    offset: &y[n] / &delta,
                })
                .filter(|h| h.separates(&keep, &exclude, mode));
            let separator = match from_farkas {
                Some(h) => h,
                None => margin_hyperplane(&keep, &exclude, mode)?
                    .ok_or_else(|| Error::Numerical("hull LP infeasible but no separating hyperplane".into()))?,
            };
            Ok(HullIntersection::Disjoint { separator })
        }
    }
}

/// Why a SOAP cannot be realized.
#[derive(Debug, Clone, PartialEq)]
pub enum Obstruction {
    /// A bad visitation is a convex combination of good ones.
    BadPointInGoodHull {
        bad: String,
        point: VisitationVector,
        coefficients: Vec<(String, Rational)>,
    },
    /// The good and bad hulls share a point.
    HullsIntersect(CommonPoint),
    /// The optimality LP is infeasible.
    NoOptimalReward { certificate: FarkasCertificate },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DesignOutcome {
    Realized { spec: RewardSpec, report: RealizationReport },
    Obstructed(Obstruction),
}

impl DesignOutcome {
    pub fn is_realizable(&self) -> bool {
        matches!(self, DesignOutcome::Realized { .. })
    }

    pub fn spec(&self) -> Option<&RewardSpec> {
        match self {
            DesignOutcome::Realized { spec, .. } => Some(spec),
            DesignOutcome::Obstructed(_) => None,
        }
    }

    pub fn obstruction(&self) -> Option<&Obstruction> {
        match self {
            DesignOutcome::Obstructed(o) => Some(o),
            DesignOutcome::Realized { .. } => None,
        }
    }

    /// Achieved reward dimension.
    pub fn dimension(&self) -> Option<usize> {
        self.spec().map(RewardSpec::dimension)
    }
}

struct Prepared {
    good: PointSet,
    bad: PointSet,
}

fn prepare(env: &MarkovEnv, soap: &Soap, mode: NumericMode) -> Result<Prepared> {
    if soap.bad().is_empty() {
        return Err(Error::Malformed("design needs at least one bad policy".into()));
    }
    let report = check_consistency(env, soap, mode)?;
    if !report.consistent {
        return Err(Error::Inconsistent {
            witnesses: report.witnesses,
        });
    }
    Ok(Prepared {
        good: PointSet::from_policies(env, soap.good(), mode)?,
        bad: PointSet::from_policies(env, soap.bad(), mode)?,
    })
}

fn realized(env: &MarkovEnv, soap: &Soap, spec: RewardSpec, mode: NumericMode) -> Result<DesignOutcome> {
    let report = verify_realization(env, soap, &spec, mode)?;
    if !report.realized {
        return Err(Error::Numerical("synthesized reward fails verification".into()));
    }
    Ok(DesignOutcome::Realized { spec, report })
}

fn spec_from(rows: Vec<Hyperplane>) -> Result<RewardSpec> {
    let (matrix, bounds) = rows.into_iter().map(|h| (h.normal, h.offset)).unzip();
    RewardSpec::new(matrix, bounds)
}

/// Scalar (`d = 1`) feasibility reward, or the common point of the two hulls.
pub fn design_scalar(env: &MarkovEnv, soap: &Soap, mode: NumericMode) -> Result<DesignOutcome> {
    let Prepared { good, bad } = prepare(env, soap, mode)?;
    let keep: Vec<_> = good.points().iter().collect();
    let exclude: Vec<_> = bad.points().iter().collect();
    if let Some(h) = margin_hyperplane(&keep, &exclude, mode)? {
        return realized(env, soap, spec_from(vec![h])?, mode);
    }
    if good.is_empty() {
        return Err(Error::Numerical("margin LP infeasible with no good points".into()));
    }
    match hulls_intersect(&good, &bad, mode)? {
        HullIntersection::Intersect(common) => Ok(DesignOutcome::Obstructed(Obstruction::HullsIntersect(common))),
        HullIntersection::Disjoint { .. } => Err(Error::Numerical("margin LP infeasible but hulls are disjoint".into())),
    }
}

/// Multidimensional feasibility reward with `d ≤ |Π_B|`, or a bad point in
/// the good hull. With `reduce`, hyperplanes are merged greedily.
pub fn design_multi(env: &MarkovEnv, soap: &Soap, mode: NumericMode, reduce: bool) -> Result<DesignOutcome> {
    let Prepared { good, bad } = prepare(env, soap, mode)?;
    let keep: Vec<_> = good.points().iter().collect();
    let singles = bad
        .points()
        .par_iter()
        .map(|b| margin_hyperplane(&keep, &[b], mode))
        .collect::<Result<Vec<_>>>()?;
    if let Some(i) = singles.iter().position(Option::is_none) {
        let target = &bad.points()[i];
        let query = in_convex_hull(target, &good, mode)?;
        let Membership::Member { coefficients } = query.membership else {
            return Err(Error::Numerical("margin LP infeasible but the bad point is outside the good hull".into()));
        };
        return Ok(DesignOutcome::Obstructed(Obstruction::BadPointInGoodHull {
            bad: bad.names()[i].clone(),
            point: target.clone(),
            coefficients: good.label(coefficients),
        }));
    }
    let singles: Vec<Hyperplane> = singles.into_iter().flatten().collect();
    let rows = if reduce {
        greedy_cover(&keep, &bad, &singles, mode)?
    } else {
        singles
    };
    realized(env, soap, spec_from(rows)?, mode)
}

fn squared_distance(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            &d * &d
        })
        .sum()
}

fn centroid(points: &[&VisitationVector]) -> Vec<Rational> {
    let k = Rational::from_integer(points.len().into());
    let n = points[0].len();
    (0..n)
        .map(|j| points.iter().map(|p| &p.entries()[j]).sum::<Rational>() / &k)
        .collect()
}

/// Repeatedly add the hyperplane that cuts the most still-uncovered bad
/// points. Each candidate grows from one seed, trying the remaining points
/// nearest the subset centroid first and keeping each that leaves the
/// single-hyperplane LP feasible. Ties go to the lowest seed.
fn greedy_cover(keep: &[&VisitationVector], bad: &PointSet, singles: &[Hyperplane], mode: NumericMode) -> Result<Vec<Hyperplane>> {
    let mut uncovered: Vec<usize> = (0..bad.len()).collect();
    let mut rows = Vec::new();
    while !uncovered.is_empty() {
        let mut best: Option<(Hyperplane, Vec<usize>)> = None;
        for &seed in &uncovered {
            let mut subset = vec![seed];
            let mut plane = singles[seed].clone();
            let mut candidates: Vec<usize> = uncovered.iter().copied().filter(|&i| i != seed).collect();
            while !candidates.is_empty() {
                let center = centroid(&bad.subset(&subset));
                let (pos, _) = candidates
                    .iter()
                    .enumerate()
                    .map(|(pos, &i)| (pos, squared_distance(&center, bad.points()[i].entries())))
                    .min_by(|x, y| x.1.cmp(&y.1))
                    .expect("nonempty");
                let next = candidates.remove(pos);
                subset.push(next);
                match margin_hyperplane(keep, &bad.subset(&subset), mode)? {
                    Some(h) => plane = h,
                    None => {
                        subset.pop();
                    }
                }
            }
            let covered: Vec<usize> = uncovered
                .iter()
                .copied()
                .filter(|&i| plane.cuts(&bad.points()[i], mode))
                .collect();
            if best.as_ref().is_none_or(|(_, c)| covered.len() > c.len()) {
                let all = covered.len() == uncovered.len();
                best = Some((plane, covered));
                if all {
                    break;
                }
            }
        }
        let (plane, covered) = best.expect("uncovered is nonempty");
        if covered.is_empty() {
            return Err(Error::Numerical("greedy reduction made no progress".into()));
        }
        uncovered.retain(|i| !covered.contains(i));
        rows.push(plane);
    }
    Ok(rows)
}

/// How the good policies relate to the shared value `v` in
/// [`check_scalar_optimality`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OptimalitySemantics {
    /// Every good policy attains `v` and no deterministic policy exceeds it.
    #[default]
    Equal,
    /// Every good policy reaches at least `v`, every bad one at most `v − 1`.
    Range,
}

/// Scalar reward under which every good policy is optimal and every bad one
/// is not, decided by enumerating the deterministic policies of `env`.
/// Returns `r` with `c = v`. Does not require a consistent SOAP: an
/// inconsistent one is simply not realizable.
pub fn check_scalar_optimality(
    env: &MarkovEnv,
    soap: &Soap,
    mode: NumericMode,
    limit: u128,
    semantics: OptimalitySemantics,
) -> Result<DesignOutcome> {
    if !soap.all_deterministic() {
        return Err(Error::Unsupported(
            "optimality-based realization is only checked for deterministic policies".into(),
        ));
    }
    let all = match semantics {
        OptimalitySemantics::Equal => enumerate_deterministic_policies(env, limit)?,
        OptimalitySemantics::Range => Vec::new(),
    };
    let good = compute_visitations(env, soap.good(), mode)?;
    let bad = compute_visitations(env, soap.bad(), mode)?;
    let every = compute_visitations(env, &all, mode)?;
    let n = env.num_pairs();
    let mut lp = LinearProgram::new(n + 1);
    for j in 0..=n {
        lp.set_bounds(j, VarBound::free());
    }
    let row = |p: &VisitationVector| {
        let mut coeffs = p.entries().to_vec();
        coeffs.push(-Rational::one());
        coeffs
    };
    let good_sense = match semantics {
        OptimalitySemantics::Equal => Sense::Eq,
        OptimalitySemantics::Range => Sense::Ge,
    };
    for p in &good {
        lp.add_row(row(p), good_sense, Rational::zero());
    }
    for p in &every {
        lp.add_row(row(p), Sense::Le, Rational::zero());
    }
    for p in &bad {
        lp.add_row(row(p), Sense::Le, -Rational::one());
    }
    match check_feasible(&lp, mode)? {
        Feasibility::Feasible(x) => {
            let h = Hyperplane::from_lp_point(&x, n);
            if every.iter().any(|p| !mode.approx_ge(&h.offset, &h.value(p))) {
                return Err(Error::Numerical("synthesized reward has a policy above the optimum".into()));
            }
            realized(env, soap, spec_from(vec![h])?, mode)
        }
        Feasibility::Infeasible(certificate) => Ok(DesignOutcome::Obstructed(Obstruction::NoOptimalReward { certificate })),
    }
}
