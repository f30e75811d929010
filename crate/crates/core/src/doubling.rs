//! Large-scale doubling checks.
//!
//! `U` is `(N, R)`-large scale doubling when for every `x` and every
//! `r >= R`, `B_{2r}(x) ∩ U` is covered by `N` open `r`-balls centered
//! anywhere in `X`. Each inner question is a small set-cover instance,
//! decided exactly by branch and bound.

use std::collections::HashMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{is_r_disjoint, union_of, CoverWitness, PointSet};
use crate::metric::{space_diameter, Metric};
use crate::rational::{half, int, Rational};
use crate::report::{VerificationReport, Violation, ViolationKind};

/// Largest ball count the exact search accepts unless raised explicitly.
pub const DEFAULT_MAX_BALLS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DoublingParams {
    pub balls: usize,
    pub scale: Rational,
}

impl DoublingParams {
    pub fn new(balls: usize, scale: Rational) -> Result<Self> {
        if balls == 0 {
            return Err(Error::Precondition("ball count N must be at least 1".into()));
        }
        if scale <= Rational::zero() {
            return Err(Error::Precondition("scale R must be positive".into()));
        }
        Ok(Self { balls, scale })
    }
}

/// Which radii `r >= R` to test.
#[derive(Debug, Clone, PartialEq)]
pub enum RGrid {
    /// `R, 2R, 4R, ...` up to the diameter of the space.
    Geometric,
    /// Every radius at which the answer can change, plus one beyond all of them.
    Exhaustive,
    /// A caller-supplied list; entries below the scale are an error.
    Explicit(Vec<Rational>),
}

impl RGrid {
    pub fn radii<M: Metric + ?Sized>(&self, space: &M, scale: Rational) -> Result<Vec<Rational>> {
        match self {
            RGrid::Geometric => Ok(geometric_grid(space, scale)),
            RGrid::Exhaustive => Ok(exhaustive_grid(space, scale)),
            RGrid::Explicit(values) => {
                if let Some(bad) = values.iter().find(|r| **r < scale) {
                    return Err(Error::Precondition(format!("grid radius {bad} is below the scale {scale}")));
                }
                let mut v = values.clone();
                v.sort();
                v.dedup();
                Ok(v)
            }
        }
    }

    /// The same grid re-anchored at a larger scale.
    fn rescaled<M: Metric + ?Sized>(&self, space: &M, scale: Rational) -> Vec<Rational> {
        match self {
            RGrid::Explicit(values) => {
                let mut v: Vec<Rational> = values.iter().copied().filter(|r| *r >= scale).collect();
                v.push(scale);
                v.sort();
                v.dedup();
                v
            }
            other => other.radii(space, scale).expect("generated grids are valid"),
        }
    }
}

pub fn geometric_grid<M: Metric + ?Sized>(space: &M, scale: Rational) -> Vec<Rational> {
    let diam = space_diameter(space);
    let mut out = vec![scale];
    let mut r = scale * int(2);
    while r <= diam {
        out.push(r);
        r *= int(2);
    }
    out
}

/// Both `B_{2r}(x)` and the open `r`-balls only change as `r` passes a
/// realized distance `d` or its half, so the predicate is constant on each
/// interval `(c_i, c_{i+1}]` between consecutive critical values.
pub fn exhaustive_grid<M: Metric + ?Sized>(space: &M, scale: Rational) -> Vec<Rational> {
    let n = space.len();
    let mut critical = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = space.dist(i, j);
            critical.push(d);
            critical.push(half(&d));
        }
    }
    critical.sort();
    critical.dedup();
    let mut out = vec![scale];
    out.extend(critical.iter().copied().filter(|c| *c > scale));
    let top = critical.last().copied().unwrap_or_else(Rational::zero).max(scale);
    out.push(top + int(1));
    out.dedup();
    out
}

/// Fixed-width bitset over the targets of one cover instance.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn is_subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
    fn and_not(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }
    fn and_count(&self, other: &Bits) -> usize {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
}

/// Can `targets` be covered by at most `balls` open balls of `radius` centered in `space`?
pub fn ball_cover_exists<M: Metric + ?Sized>(space: &M, targets: &[usize], radius: Rational, balls: usize) -> bool {
    ball_cover(space, targets, radius, balls).is_some()
}

/// A covering set of centers, if one of size at most `balls` exists.
pub fn ball_cover<M: Metric + ?Sized>(space: &M, targets: &[usize], radius: Rational, balls: usize) -> Option<Vec<usize>> {
    if targets.is_empty() {
        return Some(Vec::new());
    }
    if balls == 0 {
        return None;
    }
    let t = targets.len();
    let mut candidates: Vec<(usize, Bits)> = (0..space.len())
        .map(|c| {
            let mut bits = Bits::new(t);
            for (k, &u) in targets.iter().enumerate() {
                if space.dist(c, u) < radius {
                    bits.set(k);
                }
            }
            (c, bits)
        })
        .filter(|(_, b)| !b.is_empty())
        .collect();

    // Drop candidates whose coverage is contained in another's.
    candidates.sort_by_key(|(c, b)| (std::cmp::Reverse(b.count()), *c));
    let mut kept: Vec<(usize, Bits)> = Vec::new();
    for (c, b) in candidates {
        if !kept.iter().any(|(_, k)| b.is_subset_of(k)) {
            kept.push((c, b));
        }
    }

    let mut all = Bits::new(t);
    for k in 0..t {
        all.set(k);
    }

    // Greedy pass: accepts most instances without search.
    let mut uncovered = all.clone();
    let mut chosen = Vec::new();
    while !uncovered.is_empty() && chosen.len() < balls {
        let (c, b) = kept
            .iter()
            .max_by_key(|(c, b)| (b.and_count(&uncovered), std::cmp::Reverse(*c)))
            .expect("nonempty");
        if b.and_count(&uncovered) == 0 {
            break;
        }
        chosen.push(*c);
        uncovered = uncovered.and_not(b);
    }
    if uncovered.is_empty() {
        return Some(chosen);
    }

    let max_cover = kept.first().map(|(_, b)| b.count()).unwrap_or(0);
    let mut picked = Vec::new();
    search(&kept, &all, balls, max_cover, &mut picked).then_some(picked)
}

fn search(kept: &[(usize, Bits)], uncovered: &Bits, budget: usize, max_cover: usize, picked: &mut Vec<usize>) -> bool {
    let remaining = uncovered.count();
    if remaining == 0 {
        return true;
    }
    if budget == 0 || budget * max_cover < remaining {
        return false;
    }
    // Branch on the uncovered target with the fewest covering candidates.
    let mut best: Option<(usize, usize)> = None;
    for target in (0..uncovered.0.len() * 64).filter(|&k| uncovered.get(k)) {
        let options = kept.iter().filter(|(_, b)| b.get(target)).count();
        if options == 0 {
            return false;
        }
        if best.is_none_or(|(_, o)| options < o) {
            best = Some((target, options));
        }
    }
    let (target, _) = best.expect("some target is uncovered");
    for (c, b) in kept.iter().filter(|(_, b)| b.get(target)) {
        picked.push(*c);
        if search(kept, &uncovered.and_not(b), budget - 1, max_cover, picked) {
            return true;
        }
        picked.pop();
    }
    false
}

fn check_budget(params: &DoublingParams, max_balls: usize) -> Result<()> {
    if params.balls > max_balls {
        return Err(Error::Budget(format!(
            "N = {} exceeds the exact-search limit of {max_balls}",
            params.balls
        )));
    }
    Ok(())
}

/// Dense copy of a small space so the many distance lookups in a check are
/// table reads rather than recomputed tree or product distances.
struct Dense<'a, M: ?Sized> {
    space: &'a M,
    n: usize,
    rows: Option<Vec<Rational>>,
}

const DENSE_LIMIT: usize = 2048;

impl<'a, M: Metric + ?Sized> Dense<'a, M> {
    fn new(space: &'a M) -> Self {
        let n = space.len();
        let rows = (n <= DENSE_LIMIT).then(|| {
            (0..n)
                .into_par_iter()
                .flat_map_iter(|i| (0..n).map(move |j| space.dist(i, j)))
                .collect()
        });
        Self { space, n, rows }
    }
}

impl<M: Metric + ?Sized> Metric for Dense<'_, M> {
    fn len(&self) -> usize {
        self.n
    }
    fn dist(&self, i: usize, j: usize) -> Rational {
        match &self.rows {
            Some(rows) => rows[i * self.n + j],
            None => self.space.dist(i, j),
        }
    }
    fn label(&self, i: usize) -> String {
        self.space.label(i)
    }
}

/// Distinct cover instances `(radius index, B_2r(x) ∩ U)` and, per case
/// `(x, ri)` in order, the instance it reduces to.
fn lsd_instances<M: Metric + ?Sized>(
    space: &M,
    set: &[usize],
    radii: &[Rational],
) -> (Vec<(usize, Vec<usize>)>, Vec<usize>) {
    let keyed: Vec<(usize, Vec<usize>)> = (0..space.len() * radii.len())
        .into_par_iter()
        .map(|c| {
            let (x, ri) = (c / radii.len(), c % radii.len());
            let reach = radii[ri] * int(2);
            (ri, set.iter().copied().filter(|&u| space.dist(x, u) < reach).collect())
        })
        .collect();
    let mut ids = HashMap::new();
    let mut unique = Vec::new();
    let case_ids = keyed
        .into_iter()
        .map(|key| {
            *ids.entry(key.clone()).or_insert_with(|| {
                unique.push(key);
                unique.len() - 1
            })
        })
        .collect();
    (unique, case_ids)
}

fn lsd_violations<M: Metric + ?Sized>(space: &M, set: &[usize], balls: usize, radii: &[Rational]) -> Vec<Violation> {
    let (unique, case_ids) = lsd_instances(space, set, radii);
    let ok: Vec<bool> = unique
        .par_iter()
        .map(|(ri, inside)| ball_cover_exists(space, inside, radii[*ri], balls))
        .collect();
    case_ids
        .into_iter()
        .enumerate()
        .filter(|&(_, id)| !ok[id])
        .map(|(c, _)| {
            let (x, ri) = (c / radii.len(), c % radii.len());
            Violation::new(ViolationKind::NotDoubling)
                .points(vec![space.label(x)])
                .measured(radii[ri])
                .detail(format!("B_2r(x) ∩ U needs more than {balls} balls of radius r"))
        })
        .collect()
}

fn lsd_holds<M: Metric + ?Sized>(space: &M, set: &[usize], balls: usize, radii: &[Rational]) -> bool {
    let (unique, _) = lsd_instances(space, set, radii);
    unique
        .par_iter()
        .all(|(ri, inside)| ball_cover_exists(space, inside, radii[*ri], balls))
}

/// Checks `U` against `(N, R)` at every radius of the grid.
pub fn is_lsd_subset<M: Metric + ?Sized>(
    space: &M,
    set: &[usize],
    params: &DoublingParams,
    grid: &RGrid,
) -> Result<VerificationReport> {
    is_lsd_subset_with_limit(space, set, params, grid, DEFAULT_MAX_BALLS)
}

pub fn is_lsd_subset_with_limit<M: Metric + ?Sized>(
    space: &M,
    set: &[usize],
    params: &DoublingParams,
    grid: &RGrid,
    max_balls: usize,
) -> Result<VerificationReport> {
    if set.is_empty() {
        return Err(Error::EmptySet("large-scale doubling is checked on nonempty sets".into()));
    }
    check_budget(params, max_balls)?;
    let radii = grid.radii(space, params.scale)?;
    let space = &Dense::new(space);
    Ok(VerificationReport::from_violations(lsd_violations(space, set, params.balls, &radii)))
}

/// Outcome for one finite union in the uniform check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnionScale {
    /// Member indices forming the union.
    pub members: Vec<usize>,
    /// Smallest tried `R'` at which the union is `(N, R')`-doubling.
    #[serde(with = "crate::rational::option")]
    pub scale: Option<Rational>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LsdReport {
    pub report: VerificationReport,
    pub unions: Vec<UnionScale>,
}

impl LsdReport {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

fn check_members<M: Metric + ?Sized>(
    space: &M,
    family: &[PointSet],
    params: &DoublingParams,
    radii: &[Rational],
) -> Result<VerificationReport> {
    let mut report = VerificationReport::pass();
    for (i, set) in family.iter().enumerate() {
        if set.is_empty() {
            return Err(Error::EmptySet(format!("member {i}")));
        }
        let violations = lsd_violations(space, set, params.balls, radii)
            .into_iter()
            .map(|v| v.sets(vec![i]))
            .collect();
        report.merge(VerificationReport::from_violations(violations));
    }
    Ok(report)
}

/// Clause (a) only: every member is `(N, R)`-doubling.
pub fn is_weakly_uniformly_lsd<M: Metric + ?Sized>(
    space: &M,
    family: &[PointSet],
    params: &DoublingParams,
    grid: &RGrid,
) -> Result<VerificationReport> {
    weakly_inner(&Dense::new(space), family, params, grid)
}

fn weakly_inner<M: Metric + ?Sized>(
    space: &M,
    family: &[PointSet],
    params: &DoublingParams,
    grid: &RGrid,
) -> Result<VerificationReport> {
    check_budget(params, DEFAULT_MAX_BALLS)?;
    if family.is_empty() {
        return Err(Error::Precondition("family must be nonempty".into()));
    }
    let radii = grid.radii(space, params.scale)?;
    check_members(space, family, params, &radii)
}

/// Clause (a) plus: every union of at most `union_budget` members is
/// `(N, R')`-doubling for some `R'` from `R, 2R, 4R, ...`, stopping at the
/// first value beyond the diameter of the space.
pub fn is_uniformly_lsd<M: Metric + ?Sized>(
    space: &M,
    family: &[PointSet],
    params: &DoublingParams,
    union_budget: usize,
    grid: &RGrid,
) -> Result<LsdReport> {
    uniformly_inner(&Dense::new(space), family, params, union_budget, grid)
}

fn uniformly_inner<M: Metric + ?Sized>(
    space: &M,
    family: &[PointSet],
    params: &DoublingParams,
    union_budget: usize,
    grid: &RGrid,
) -> Result<LsdReport> {
    let mut report = weakly_inner(space, family, params, grid)?;
    let diam = space_diameter(space);
    let mut scales = vec![params.scale];
    while *scales.last().expect("nonempty") <= diam {
        let next = *scales.last().expect("nonempty") * int(2);
        scales.push(next);
    }
    let mut unions = Vec::new();
    for size in 2..=union_budget.min(family.len()) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let union = union_of(combo.iter().map(|&i| &family[i]));
            let found = scales.iter().copied().find(|&scale| {
                let radii = grid.rescaled(space, scale);
                lsd_holds(space, &union, params.balls, &radii)
            });
            if found.is_none() {
                report.push(
                    Violation::new(ViolationKind::NoDoublingScale)
                        .sets(combo.clone())
                        .detail("no tried scale makes this union doubling"),
                );
            }
            unions.push(UnionScale {
                members: combo.clone(),
                scale: found,
            });
            if !next_combination(&mut combo, family.len()) {
                break;
            }
        }
    }
    Ok(LsdReport { report, unions })
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// How the doubling requirement of a (weak) hyperbolic cover is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HpcReading {
    /// All members of all families, taken together as one family.
    UnionFamily,
    /// Each family on its own.
    PerFamily,
}

/// Checks a cover witness whose families are disjoint at their separations,
/// jointly cover the space, and satisfy the doubling requirement under the
/// chosen reading. `weak` drops the finite-union clause.
pub fn check_hpc_witness<M: Metric + ?Sized>(
    space: &M,
    witness: &CoverWitness,
    params: &DoublingParams,
    union_budget: usize,
    grid: &RGrid,
    reading: HpcReading,
    weak: bool,
) -> Result<LsdReport> {
    let space = &Dense::new(space);
    let mut report = VerificationReport::pass();
    for (i, family) in witness.families.iter().enumerate() {
        report.merge(is_r_disjoint(space, family.sets(), family.separation).in_family(i));
    }
    let covered = union_of(witness.families.iter().flat_map(|f| f.sets()));
    if covered.len() != space.len() {
        let missing = (0..space.len())
            .filter(|p| covered.binary_search(p).is_err())
            .map(|p| space.label(p))
            .collect();
        report.push(Violation::new(ViolationKind::Uncovered).points(missing));
    }
    let groups: Vec<(Option<usize>, Vec<PointSet>)> = match reading {
        HpcReading::UnionFamily => vec![(None, witness.all_sets())],
        HpcReading::PerFamily => witness
            .families
            .iter()
            .enumerate()
            .filter(|(_, f)| !f.is_empty())
            .map(|(i, f)| (Some(i), f.sets().to_vec()))
            .collect(),
    };
    let mut unions = Vec::new();
    for (family, sets) in groups {
        if sets.is_empty() {
            continue;
        }
        let tag = |r: VerificationReport| match family {
            Some(i) => r.in_family(i),
            None => r,
        };
        if weak {
            report.merge(tag(weakly_inner(space, &sets, params, grid)?));
        } else {
            let lsd = uniformly_inner(space, &sets, params, union_budget, grid)?;
            report.merge(tag(lsd.report));
            unions.extend(lsd.unions);
        }
    }
    Ok(LsdReport { report, unions })
}
