//! Decomposition chains `X -R0-> V_0 -R1-> ... -Rn-> V_n` and the two ways
//! of building them: from a uniform asymptotic-dimension witness, and by
//! peeling the families of a (weakly) hyperbolic cover off a space and
//! finishing with the first construction.

use std::collections::HashMap;

use num_traits::Zero;

use crate::doubling::{is_weakly_uniformly_lsd, DoublingParams, RGrid};
use crate::error::{Error, Result};
use crate::family::{difference, intersect, is_r_disjoint, mesh, normalize, union_of, AsdimWitness, CoverWitness, MeshBound, PointSet};
use crate::metric::Metric;
use crate::product::check_schedule;
use crate::rational::Rational;
use crate::report::{VerificationReport, Violation, ViolationKind};
use crate::tree::{tree_asdim1_witness, RootedTree};

/// One arrow of a chain: every set of the previous family splits into two
/// `R`-disjoint subfamilies of `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionStep {
    pub separation: Rational,
    pub target: Vec<PointSet>,
    /// `witness[s] = (U1, U2)` for source set `s`, as indices into `target`.
    pub witness: Vec<(Vec<usize>, Vec<usize>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionChain {
    pub root: Vec<PointSet>,
    pub steps: Vec<DecompositionStep>,
    /// Claimed mesh of the last family.
    pub terminal_mesh: Rational,
}

impl DecompositionChain {
    pub fn schedule(&self) -> Vec<Rational> {
        self.steps.iter().map(|s| s.separation).collect()
    }

    pub fn terminal(&self) -> &[PointSet] {
        self.steps.last().map(|s| s.target.as_slice()).unwrap_or(&self.root)
    }
}

fn dedup_sets(sets: &[PointSet]) -> Vec<&PointSet> {
    let mut seen = std::collections::HashSet::new();
    sets.iter().filter(|s| seen.insert(*s)).collect()
}

/// `X = ∪(U1 ∪ U2)` with both subfamilies `R`-disjoint and drawn from `target`.
pub fn check_decomposition_step<M: Metric + ?Sized>(
    space: &M,
    source: &[usize],
    separation: Rational,
    u1: &[PointSet],
    u2: &[PointSet],
    target: &[PointSet],
) -> VerificationReport {
    let mut report = VerificationReport::pass();
    for (which, family) in [(1usize, u1), (2, u2)] {
        let distinct: Vec<PointSet> = dedup_sets(family).into_iter().cloned().collect();
        report.merge(is_r_disjoint(space, &distinct, separation).with_context(&format!("U{which}")));
        let members: std::collections::HashSet<&PointSet> = target.iter().collect();
        for (i, set) in family.iter().enumerate() {
            if !members.contains(set) {
                report.push(
                    Violation::new(ViolationKind::NotInTarget)
                        .sets(vec![i])
                        .points(set.iter().map(|&p| space.label(p)).collect())
                        .detail(format!("member {i} of U{which} is not in the target family")),
                );
            }
        }
    }
    let covered = union_of(u1.iter().chain(u2));
    let source = normalize(source.to_vec());
    let missing = difference(&source, &covered);
    if !missing.is_empty() {
        report.push(
            Violation::new(ViolationKind::Uncovered)
                .points(missing.iter().map(|&p| space.label(p)).collect())
                .detail("source set not covered by U1 ∪ U2"),
        );
    }
    let extra = difference(&covered, &source);
    if !extra.is_empty() {
        report.push(
            Violation::new(ViolationKind::ExtraPoints)
                .points(extra.iter().map(|&p| space.label(p)).collect())
                .detail("U1 ∪ U2 reaches outside the source set"),
        );
    }
    report
}

/// Every step decomposes its predecessor, the schedule is nondecreasing,
/// and the last family respects the claimed mesh.
pub fn verify_sfdc_chain<M: Metric + ?Sized>(space: &M, chain: &DecompositionChain) -> VerificationReport {
    let mut report = VerificationReport::pass();
    if chain.steps.is_empty() {
        report.push(Violation::new(ViolationKind::Schedule).detail("a chain needs at least one step"));
        return report;
    }
    if let Err(e) = check_schedule(&chain.schedule(), false) {
        report.push(Violation::new(ViolationKind::Schedule).detail(e.to_string()));
    }
    let n = space.len();
    let mut previous = &chain.root;
    for (k, step) in chain.steps.iter().enumerate() {
        if let Some(bad) = step.target.iter().flatten().chain(previous.iter().flatten()).find(|&&p| p >= n) {
            report.push(Violation::new(ViolationKind::OutOfRange).family(k).detail(format!("point index {bad}")));
            return report;
        }
        if step.witness.len() != previous.len() {
            report.push(Violation::new(ViolationKind::MissingWitness).family(k).detail(format!(
                "{} source sets but {} witness pairs",
                previous.len(),
                step.witness.len()
            )));
            previous = &step.target;
            continue;
        }
        for (s, (source, (i1, i2))) in previous.iter().zip(&step.witness).enumerate() {
            let lookup = |ids: &[usize]| -> Option<Vec<PointSet>> {
                ids.iter().map(|&i| step.target.get(i).cloned()).collect()
            };
            let (Some(u1), Some(u2)) = (lookup(i1), lookup(i2)) else {
                report.push(
                    Violation::new(ViolationKind::NotInTarget)
                        .family(k)
                        .sets(vec![s])
                        .detail("witness index outside the target family"),
                );
                continue;
            };
            let sub = check_decomposition_step(space, source, step.separation, &u1, &u2, &step.target);
            report.merge(sub.with_context(&format!("step {k}, source {s}")).in_family(k));
        }
        previous = &step.target;
    }
    let measured = mesh(space, chain.terminal());
    if measured > chain.terminal_mesh {
        report.push(
            Violation::new(ViolationKind::MeshExceeded)
                .family(chain.steps.len() - 1)
                .measured(measured)
                .required(chain.terminal_mesh)
                .detail("terminal family exceeds the claimed mesh"),
        );
    }
    report
}

/// Interns sets so each target family lists every distinct set once.
#[derive(Default)]
struct Target {
    sets: Vec<PointSet>,
    index: HashMap<PointSet, usize>,
}

impl Target {
    fn add(&mut self, set: &PointSet) -> usize {
        if let Some(&i) = self.index.get(set) {
            return i;
        }
        self.sets.push(set.clone());
        self.index.insert(set.clone(), self.sets.len() - 1);
        self.sets.len() - 1
    }
}

/// Carves `families[alpha][k]` out of the running remainder of member
/// `alpha` at step `k`. Pieces carved earlier ride along as one-set
/// subfamilies; the last remainder must be empty.
fn peel(members: &[PointSet], families: &[Vec<Vec<PointSet>>], schedule: &[Rational]) -> Result<Vec<DecompositionStep>> {
    let mut remainders: Vec<PointSet> = members.iter().cloned().map(normalize).collect();
    let mut carved: Vec<PointSet> = Vec::new();
    let mut carved_index: HashMap<PointSet, ()> = HashMap::new();
    let mut previous: Vec<PointSet> = members.to_vec();
    let mut steps = Vec::with_capacity(schedule.len());

    for (k, &separation) in schedule.iter().enumerate() {
        let mut target = Target::default();
        for set in &carved {
            target.add(set);
        }
        let mut pieces: Vec<Vec<PointSet>> = Vec::with_capacity(members.len());
        let mut next_remainders = Vec::with_capacity(members.len());
        for (alpha, rem) in remainders.iter().enumerate() {
            let new: Vec<PointSet> = families[alpha][k]
                .iter()
                .map(|u| intersect(rem, &normalize(u.clone())))
                .filter(|s| !s.is_empty())
                .collect();
            let left = difference(rem, &union_of(&new));
            for set in &new {
                target.add(set);
            }
            if !left.is_empty() {
                target.add(&left);
            }
            pieces.push(new);
            next_remainders.push(left);
        }

        let mut witness = Vec::with_capacity(previous.len());
        for source in &previous {
            if carved_index.contains_key(source) {
                witness.push((vec![target.add(source)], Vec::new()));
                continue;
            }
            let alpha = remainders
                .iter()
                .position(|r| r == source)
                .ok_or_else(|| Error::Precondition(format!("step {k}: source set is neither carved nor a remainder")))?;
            let u1 = pieces[alpha].iter().map(|s| target.add(s)).collect();
            let u2 = if next_remainders[alpha].is_empty() {
                Vec::new()
            } else {
                vec![target.add(&next_remainders[alpha])]
            };
            witness.push((u1, u2));
        }

        for new in pieces.into_iter().flatten() {
            if carved_index.insert(new.clone(), ()).is_none() {
                carved.push(new);
            }
        }
        remainders = next_remainders;
        previous = target.sets.clone();
        steps.push(DecompositionStep {
            separation,
            target: target.sets,
            witness,
        });
    }
    if let Some(alpha) = remainders.iter().position(|r| !r.is_empty()) {
        return Err(Error::Precondition(format!(
            "families do not cover member {alpha}: {} points left after the last step",
            remainders[alpha].len()
        )));
    }
    Ok(steps)
}

/// Chain of length `n + 1` from a shared asdim witness at separation `R_n`.
///
/// Step `k` splits each remainder into its intersections with the members
/// of family `k` plus the new remainder; earlier pieces carry over. The last
/// family consists of subsets of witness sets, so its mesh is at most `D`.
pub fn asdim_to_sfdc_chain<M: Metric + ?Sized>(
    space: &M,
    members: &[PointSet],
    witness: &AsdimWitness,
    schedule: &[Rational],
) -> Result<DecompositionChain> {
    check_schedule(schedule, false)?;
    if schedule.len() != witness.dimension + 1 {
        return Err(Error::Schedule(format!(
            "an asdim {} witness needs {} schedule entries, got {}",
            witness.dimension,
            witness.dimension + 1,
            schedule.len()
        )));
    }
    let last = schedule[witness.dimension];
    if witness.separation < last {
        return Err(Error::Precondition(format!(
            "witness separation {} is below R_n = {last}",
            witness.separation
        )));
    }
    let check = witness.verify(space, members);
    if !check.passed() {
        let first = &check.violations()[0];
        return Err(Error::Precondition(format!(
            "asdim witness fails its own claims ({:?}: {})",
            first.kind, first.detail
        )));
    }
    let steps = peel(members, &witness.per_space, schedule)?;
    Ok(DecompositionChain {
        root: members.to_vec(),
        steps,
        terminal_mesh: witness.mesh,
    })
}

/// Supplies a uniform asdim witness for the family left at the end of the peeling.
pub trait AsdimProvider {
    fn dimension(&self) -> usize;

    fn provide(&self, space: &dyn Metric, members: &[PointSet], separation: Rational) -> Result<AsdimWitness>;
}

/// Dimension 0: each member is its own cover. Valid whenever the members are bounded.
pub struct BoundedMembers;

impl AsdimProvider for BoundedMembers {
    fn dimension(&self) -> usize {
        0
    }

    fn provide(&self, space: &dyn Metric, members: &[PointSet], separation: Rational) -> Result<AsdimWitness> {
        let d = mesh(space, members);
        AsdimWitness::new(0, separation, d, members.iter().map(|m| vec![vec![m.clone()]]).collect())
    }
}

/// Builds a whole-space witness at the requested separation and restricts it to each member.
pub struct RestrictingProvider<'a> {
    dimension: usize,
    build: Box<dyn Fn(Rational) -> Result<CoverWitness> + 'a>,
}

impl<'a> RestrictingProvider<'a> {
    pub fn new(dimension: usize, build: impl Fn(Rational) -> Result<CoverWitness> + 'a) -> Self {
        Self {
            dimension,
            build: Box::new(build),
        }
    }

    /// Asdim 1 from the even/odd band witness of a tree.
    pub fn tree(tree: &'a RootedTree) -> Self {
        Self::new(1, move |r| tree_asdim1_witness(tree, r))
    }
}

impl AsdimProvider for RestrictingProvider<'_> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn provide(&self, _space: &dyn Metric, members: &[PointSet], separation: Rational) -> Result<AsdimWitness> {
        let whole = (self.build)(separation)?;
        if whole.families.len() != self.dimension + 1 {
            return Err(Error::Provider(format!(
                "expected {} families, got {}",
                self.dimension + 1,
                whole.families.len()
            )));
        }
        let d = whole
            .mesh_bound()
            .value()
            .ok_or_else(|| Error::ExternalInputRequired("provided witness has no finite mesh".into()))?;
        let per_space = members
            .iter()
            .map(|member| {
                whole
                    .families
                    .iter()
                    .map(|f| f.sets().iter().map(|u| intersect(u, member)).filter(|s| !s.is_empty()).collect())
                    .collect()
            })
            .collect();
        AsdimWitness::new(self.dimension, separation, d, per_space)
    }
}

/// Chain from a cover whose families are `R_i`-disjoint: the families are
/// peeled off `X` one by one, then the last family is finished with an asdim
/// chain over `extension`.
///
/// Without a provider the bounded-members witness is used, which requires
/// every family to claim a finite mesh.
pub fn hpc_to_sfdc_chain<M: Metric>(
    space: &M,
    witness: &CoverWitness,
    doubling: Option<(&DoublingParams, &RGrid)>,
    extension: &[Rational],
    provider: Option<&dyn AsdimProvider>,
) -> Result<DecompositionChain> {
    let schedule = witness.schedule();
    check_schedule(&schedule, false)?;
    for (i, family) in witness.families.iter().enumerate() {
        let report = is_r_disjoint(space, family.sets(), family.separation);
        if !report.passed() {
            return Err(Error::Precondition(format!("family {i} is not {}-disjoint", family.separation)));
        }
    }
    if let Some((params, grid)) = doubling {
        let sets = witness.all_sets();
        if !sets.is_empty() && !is_weakly_uniformly_lsd(space, &sets, params, grid)?.passed() {
            return Err(Error::Precondition(
                "cover is not weakly uniformly large scale doubling at the given (N, R)".into(),
            ));
        }
    }

    let all: PointSet = (0..space.len()).collect();
    let families: Vec<Vec<PointSet>> = witness.families.iter().map(|f| f.sets().to_vec()).collect();
    let prefix = peel(std::slice::from_ref(&all), &[families], &schedule)?;
    let terminal = prefix.last().expect("schedule is nonempty").target.clone();

    let fallback = BoundedMembers;
    let provider: &dyn AsdimProvider = match provider {
        Some(p) => p,
        None if witness.mesh_bound() != MeshBound::Unbounded => &fallback,
        None => {
            return Err(Error::ExternalInputRequired(
                "the peeled family is not known to be bounded; supply an asdim witness for it".into(),
            ))
        }
    };
    let needed = provider.dimension() + 1;
    if extension.len() < needed {
        return Err(Error::Schedule(format!(
            "the asdim {} finish needs {needed} more schedule entries, got {}",
            provider.dimension(),
            extension.len()
        )));
    }
    let extension = &extension[..needed];
    let last = *schedule.last().expect("nonempty");
    if extension[0] < last {
        return Err(Error::Schedule(format!(
            "extension must continue the schedule: {} follows {last}",
            extension[0]
        )));
    }
    let asdim = provider.provide(space, &terminal, extension[needed - 1])?;
    let suffix = asdim_to_sfdc_chain(space, &terminal, &asdim, extension)?;

    let mut steps = prefix;
    steps.extend(suffix.steps);
    Ok(DecompositionChain {
        root: vec![all],
        steps,
        terminal_mesh: suffix.terminal_mesh,
    })
}

/// Single-member asdim witness from a cover witness with `n + 1` families.
pub fn asdim_from_cover(cover: &CoverWitness, mesh_bound: Rational) -> Result<AsdimWitness> {
    let separation = cover
        .families
        .iter()
        .map(|f| f.separation)
        .min()
        .unwrap_or_else(Rational::zero);
    let families = cover.families.iter().map(|f| f.sets().to_vec()).collect();
    AsdimWitness::new(cover.families.len() - 1, separation, mesh_bound, vec![families])
}
