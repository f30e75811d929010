//! Subset families, cover witnesses and their verifier.
//!
//! The verifier here is the oracle every builder in the crate is checked
//! against: strict `d(A,B) > R` disjointness, mesh against the claimed
//! bound, and exact coverage of the ambient point set.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::{diameter, set_distance, Metric};
use crate::rational::Rational;
use crate::report::{VerificationReport, Violation, ViolationKind};

/// Sorted, duplicate-free list of point indices.
pub type PointSet = Vec<usize>;

pub fn normalize(mut set: PointSet) -> PointSet {
    set.sort_unstable();
    set.dedup();
    set
}

/// Sorted intersection of two normalized sets.
pub fn intersect(a: &[usize], b: &[usize]) -> PointSet {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Sorted difference `a \ b` of two normalized sets.
pub fn difference(a: &[usize], b: &[usize]) -> PointSet {
    let mut j = 0;
    let mut out = Vec::new();
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j >= b.len() || b[j] != x {
            out.push(x);
        }
    }
    out
}

/// Sorted union of many sets.
pub fn union_of<'a>(sets: impl IntoIterator<Item = &'a PointSet>) -> PointSet {
    normalize(sets.into_iter().flatten().copied().collect())
}

/// Claimed upper bound on member diameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshBound {
    Bounded(Rational),
    Unbounded,
}

impl std::fmt::Display for MeshBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshBound::Bounded(v) => write!(f, "at most {v}"),
            MeshBound::Unbounded => f.write_str("unbounded"),
        }
    }
}

impl MeshBound {
    pub fn admits(&self, value: &Rational) -> bool {
        match self {
            MeshBound::Bounded(bound) => value <= bound,
            MeshBound::Unbounded => true,
        }
    }

    pub fn max(self, other: MeshBound) -> MeshBound {
        match (self, other) {
            (MeshBound::Bounded(a), MeshBound::Bounded(b)) => MeshBound::Bounded(a.max(b)),
            _ => MeshBound::Unbounded,
        }
    }

    pub fn value(&self) -> Option<Rational> {
        match self {
            MeshBound::Bounded(v) => Some(*v),
            MeshBound::Unbounded => None,
        }
    }
}

/// A family of nonempty point sets with its claimed separation and mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetFamily {
    sets: Vec<PointSet>,
    pub separation: Rational,
    pub mesh_bound: MeshBound,
}

impl SubsetFamily {
    /// Empty member sets are rejected; an empty family is fine.
    pub fn new(sets: Vec<PointSet>, separation: Rational, mesh_bound: MeshBound) -> Result<Self> {
        let mut normalized = Vec::with_capacity(sets.len());
        for (i, set) in sets.into_iter().enumerate() {
            if set.is_empty() {
                return Err(Error::EmptySet(format!("member {i} of a subset family")));
            }
            normalized.push(normalize(set));
        }
        Ok(Self {
            sets: normalized,
            separation,
            mesh_bound,
        })
    }

    /// Like [`SubsetFamily::new`] but silently drops empty members.
    pub fn dropping_empty(sets: Vec<PointSet>, separation: Rational, mesh_bound: MeshBound) -> Self {
        let sets = sets.into_iter().filter(|s| !s.is_empty()).collect();
        Self::new(sets, separation, mesh_bound).expect("empties removed")
    }

    pub fn empty(separation: Rational) -> Self {
        Self {
            sets: Vec::new(),
            separation,
            mesh_bound: MeshBound::Bounded(Rational::zero()),
        }
    }

    pub fn sets(&self) -> &[PointSet] {
        &self.sets
    }

    pub fn into_sets(self) -> Vec<PointSet> {
        self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn union(&self) -> PointSet {
        union_of(&self.sets)
    }

    /// Intersects every member with `points` (sorted), dropping empties.
    pub fn restrict_to(&self, points: &[usize]) -> Self {
        let sets = self.sets.iter().map(|s| intersect(s, points)).collect();
        Self::dropping_empty(sets, self.separation, self.mesh_bound)
    }
}

/// `sup { diam U }`; zero for an empty family.
pub fn mesh<M: Metric + ?Sized>(space: &M, sets: &[PointSet]) -> Rational {
    sets.par_iter()
        .map(|s| diameter(space, s))
        .reduce(Rational::zero, |a, b| a.max(b))
}

fn out_of_range<M: Metric + ?Sized>(space: &M, sets: &[PointSet]) -> Vec<Violation> {
    let n = space.len();
    sets.iter()
        .enumerate()
        .filter(|(_, s)| s.iter().any(|&p| p >= n))
        .map(|(i, s)| {
            Violation::new(ViolationKind::OutOfRange)
                .sets(vec![i])
                .detail(format!("indices {:?} exceed the {n}-point space", s.iter().filter(|&&p| p >= n).collect::<Vec<_>>()))
        })
        .collect()
}

/// Checks `d(A,B) > R` for every pair of distinct members.
///
/// Each failing pair of member sets is reported once with its exact set distance.
pub fn is_r_disjoint<M: Metric + ?Sized>(space: &M, sets: &[PointSet], separation: Rational) -> VerificationReport {
    let bad_range = out_of_range(space, sets);
    if !bad_range.is_empty() {
        return VerificationReport::from_violations(bad_range);
    }
    if let Some(i) = sets.iter().position(|s| s.is_empty()) {
        return VerificationReport::from_violations(vec![Violation::new(ViolationKind::EmptyMember).sets(vec![i])]);
    }

    let mut memberships: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, set) in sets.iter().enumerate() {
        for &p in set {
            memberships.entry(p).or_default().push(i);
        }
    }
    let points: Vec<(usize, Vec<usize>)> = memberships.into_iter().collect();

    let failing: Vec<(usize, usize)> = points
        .par_iter()
        .enumerate()
        .flat_map_iter(|(k, (p, in_p))| {
            let mut local = Vec::new();
            // A point shared by two members puts them at distance zero.
            for (x, &a) in in_p.iter().enumerate() {
                for &b in &in_p[x + 1..] {
                    local.push((a.min(b), a.max(b)));
                }
            }
            for (q, in_q) in &points[k + 1..] {
                if in_p.len() == 1 && in_q.len() == 1 && in_p[0] == in_q[0] {
                    continue;
                }
                if space.dist(*p, *q) <= separation {
                    for &a in in_p {
                        for &b in in_q {
                            if a != b {
                                local.push((a.min(b), a.max(b)));
                            }
                        }
                    }
                }
            }
            local
        })
        .collect();

    let mut pairs = failing;
    pairs.sort_unstable();
    pairs.dedup();
    let violations = pairs
        .into_iter()
        .map(|(a, b)| {
            let measured = set_distance(space, &sets[a], &sets[b]).expect("members are nonempty");
            Violation::new(ViolationKind::NotRDisjoint)
                .sets(vec![a, b])
                .measured(measured)
                .required(separation)
                .detail("set distance must be strictly greater than the separation")
        })
        .collect();
    VerificationReport::from_violations(violations)
}

/// Member-wise diameter check against a claimed bound.
pub fn check_mesh<M: Metric + ?Sized>(space: &M, sets: &[PointSet], bound: MeshBound) -> VerificationReport {
    let violations = sets
        .par_iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let d = diameter(space, s);
            (!bound.admits(&d)).then(|| {
                Violation::new(ViolationKind::MeshExceeded)
                    .sets(vec![i])
                    .measured(d)
                    .required(bound.value().unwrap_or_default())
            })
        })
        .collect();
    VerificationReport::from_violations(violations)
}

/// A schedule `R_0 <= ... <= R_n` with one family per entry.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverWitness {
    pub families: Vec<SubsetFamily>,
}

impl CoverWitness {
    pub fn new(families: Vec<SubsetFamily>) -> Self {
        Self { families }
    }

    pub fn schedule(&self) -> Vec<Rational> {
        self.families.iter().map(|f| f.separation).collect()
    }

    pub fn mesh_bound(&self) -> MeshBound {
        self.families
            .iter()
            .fold(MeshBound::Bounded(Rational::zero()), |acc, f| acc.max(f.mesh_bound))
    }

    /// Restricts every family to `points`; the result lives on the same index space.
    pub fn restrict_to(&self, points: &[usize]) -> Self {
        Self::new(self.families.iter().map(|f| f.restrict_to(points)).collect())
    }

    /// All member sets from all families.
    pub fn all_sets(&self) -> Vec<PointSet> {
        self.families.iter().flat_map(|f| f.sets().iter().cloned()).collect()
    }
}

/// Every family disjoint at its separation, within its mesh bound, and the union covers `points`.
pub fn verify_cover_of<M: Metric + ?Sized>(space: &M, witness: &CoverWitness, points: &[usize]) -> VerificationReport {
    let mut report = VerificationReport::pass();
    let schedule = witness.schedule();
    for (i, pair) in schedule.windows(2).enumerate() {
        if pair[1] < pair[0] {
            report.push(
                Violation::new(ViolationKind::Schedule)
                    .family(i + 1)
                    .measured(pair[1])
                    .required(pair[0])
                    .detail("schedule must be nondecreasing"),
            );
        }
    }
    for (i, r) in schedule.iter().enumerate() {
        if *r <= Rational::zero() {
            report.push(
                Violation::new(ViolationKind::Schedule)
                    .family(i)
                    .measured(*r)
                    .detail("separations must be positive"),
            );
        }
    }
    for (i, family) in witness.families.iter().enumerate() {
        let disjoint = is_r_disjoint(space, family.sets(), family.separation);
        let range_failed = disjoint
            .violations()
            .iter()
            .any(|v| v.kind == ViolationKind::OutOfRange);
        report.merge(disjoint.in_family(i));
        if !range_failed {
            report.merge(check_mesh(space, family.sets(), family.mesh_bound).in_family(i));
        }
    }
    let n = space.len();
    let mut covered = vec![false; n];
    for family in &witness.families {
        for set in family.sets() {
            for &p in set {
                if p < n {
                    covered[p] = true;
                }
            }
        }
    }
    let uncovered: Vec<String> = points
        .iter()
        .filter(|&&p| p >= n || !covered[p])
        .map(|&p| if p < n { space.label(p) } else { format!("#{p}") })
        .collect();
    if !uncovered.is_empty() {
        report.push(
            Violation::new(ViolationKind::Uncovered)
                .points(uncovered)
                .detail("points not covered by any family"),
        );
    }
    report
}

/// Verifies a witness against the whole space.
pub fn verify_cover_witness<M: Metric + ?Sized>(space: &M, witness: &CoverWitness) -> VerificationReport {
    let all: Vec<usize> = (0..space.len()).collect();
    verify_cover_of(space, witness, &all)
}

/// `n+1` families per space, all at one separation and one mesh bound.
#[derive(Debug, Clone, PartialEq)]
pub struct AsdimWitness {
    pub dimension: usize,
    pub separation: Rational,
    pub mesh: Rational,
    /// `per_space[alpha][i]` is family `i` for member `alpha`.
    pub per_space: Vec<Vec<Vec<PointSet>>>,
}

impl AsdimWitness {
    pub fn new(dimension: usize, separation: Rational, mesh: Rational, per_space: Vec<Vec<Vec<PointSet>>>) -> Result<Self> {
        if mesh < Rational::zero() {
            return Err(Error::Precondition("asdim witness mesh must be nonnegative".into()));
        }
        for (alpha, families) in per_space.iter().enumerate() {
            if families.len() != dimension + 1 {
                return Err(Error::Precondition(format!(
                    "member {alpha} has {} families, expected {}",
                    families.len(),
                    dimension + 1
                )));
            }
        }
        Ok(Self {
            dimension,
            separation,
            mesh,
            per_space,
        })
    }

    /// Checks the witness against the member sets it claims to cover.
    pub fn verify<M: Metric + ?Sized>(&self, space: &M, members: &[PointSet]) -> VerificationReport {
        let mut report = VerificationReport::pass();
        if members.len() != self.per_space.len() {
            report.push(Violation::new(ViolationKind::MissingWitness).detail(format!(
                "{} members but families for {}",
                members.len(),
                self.per_space.len()
            )));
            return report;
        }
        for (alpha, (member, families)) in members.iter().zip(&self.per_space).enumerate() {
            let witness = CoverWitness::new(
                families
                    .iter()
                    .map(|sets| SubsetFamily {
                        sets: sets.iter().cloned().map(normalize).collect(),
                        separation: self.separation,
                        mesh_bound: MeshBound::Bounded(self.mesh),
                    })
                    .collect(),
            );
            report.merge(verify_cover_of(space, &witness, member).with_context(&format!("member {alpha}")));
        }
        report
    }
}
