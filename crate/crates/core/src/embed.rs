//! Coarse embeddings on finite samples: empirical distortion envelopes,
//! pulling cover witnesses back along a map, and the appended embedding of
//! a restricted product of factor spaces into a restricted product of trees.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{normalize, verify_cover_witness, CoverWitness, MeshBound, PointSet, SubsetFamily};
use crate::metric::{Metric, MetricSpace};
use crate::product::{check_schedule, RestrictedPoint, RestrictedProduct, SupProduct};
use crate::rational::{ceil_int, int, Rational};
use crate::report::{VerificationReport, Violation, ViolationKind};
use crate::tree::RootedTree;

/// Step-function control pair on the realized distances of a sample.
///
/// Both functions are nondecreasing and evaluated left-constant: the value
/// at `t` is the value at the largest breakpoint not above `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionEnvelope {
    #[serde(with = "breakpoints")]
    rho_minus: Vec<(Rational, Rational)>,
    #[serde(with = "breakpoints")]
    rho_plus: Vec<(Rational, Rational)>,
}

mod breakpoints {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::rational::{format_rational, parse_rational, Rational};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Num {
        Int(i64),
        Text(String),
    }

    fn out(v: &Rational) -> Num {
        if v.is_integer() {
            Num::Int(*v.numer())
        } else {
            Num::Text(format_rational(v))
        }
    }

    fn back(n: Num) -> Result<Rational, String> {
        match n {
            Num::Int(i) => Ok(Rational::from_integer(i)),
            Num::Text(s) => parse_rational(&s).map_err(|e| e.to_string()),
        }
    }

    pub fn serialize<S: Serializer>(points: &[(Rational, Rational)], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<(Num, Num)> = points.iter().map(|(t, v)| (out(t), out(v))).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(Rational, Rational)>, D::Error> {
        let rows = Vec::<(Num, Num)>::deserialize(d)?;
        rows.into_iter()
            .map(|(t, v)| Ok((back(t)?, back(v)?)))
            .collect::<Result<_, String>>()
            .map_err(serde::de::Error::custom)
    }
}

fn evaluate(points: &[(Rational, Rational)], t: Rational) -> Rational {
    let i = points.partition_point(|(s, _)| *s <= t);
    if i == 0 {
        Rational::zero()
    } else {
        points[i - 1].1
    }
}

impl DistortionEnvelope {
    /// Builds from raw per-distance `(min, max)` image distances.
    fn from_raw(raw: &BTreeMap<Rational, (Rational, Rational)>) -> Self {
        let mut rho_plus = Vec::with_capacity(raw.len());
        let mut running = Rational::zero();
        for (&t, &(_, hi)) in raw {
            running = running.max(hi);
            rho_plus.push((t, running));
        }
        let mut rho_minus = Vec::with_capacity(raw.len());
        let mut running: Option<Rational> = None;
        for (&t, &(lo, _)) in raw.iter().rev() {
            let v = running.map_or(lo, |r| r.min(lo));
            running = Some(v);
            rho_minus.push((t, v));
        }
        rho_minus.reverse();
        Self { rho_minus, rho_plus }
    }

    pub fn rho_minus(&self, t: Rational) -> Rational {
        evaluate(&self.rho_minus, t)
    }

    pub fn rho_plus(&self, t: Rational) -> Rational {
        evaluate(&self.rho_plus, t)
    }

    pub fn minus_breakpoints(&self) -> &[(Rational, Rational)] {
        &self.rho_minus
    }

    pub fn plus_breakpoints(&self) -> &[(Rational, Rational)] {
        &self.rho_plus
    }

    /// Largest realized distance.
    pub fn max_distance(&self) -> Rational {
        self.rho_plus.last().map_or_else(Rational::zero, |p| p.0)
    }

    /// Finite-scale properness diagnostic: `rho_minus` at the largest
    /// sampled distance exceeds `threshold`.
    pub fn exceeds_at_max(&self, threshold: Rational) -> bool {
        self.rho_minus.last().is_some_and(|p| p.1 > threshold)
    }

    /// Largest realized `t` with `rho_minus(t) <= bound`.
    pub fn preimage_diameter(&self, bound: Rational) -> Rational {
        self.rho_minus
            .iter()
            .rev()
            .find(|(_, v)| *v <= bound)
            .map_or_else(Rational::zero, |p| p.0)
    }

    /// Checks `rho_minus(d) <= image <= rho_plus(d)` on every pair.
    pub fn check_sandwich<X: Metric + ?Sized, Y: Metric + ?Sized>(&self, x: &X, y: &Y, image: &[usize]) -> VerificationReport {
        let bad: Vec<Violation> = (0..x.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                (i + 1..x.len()).filter_map(move |j| {
                    let t = x.dist(i, j);
                    let fd = y.dist(image[i], image[j]);
                    let (lo, hi) = (self.rho_minus(t), self.rho_plus(t));
                    (fd < lo || fd > hi).then(|| {
                        Violation::new(ViolationKind::Domination)
                            .points(vec![x.label(i), x.label(j)])
                            .measured(fd)
                            .detail(format!("image distance outside [{lo}, {hi}] at distance {t}"))
                    })
                })
            })
            .collect();
        VerificationReport::from_violations(bad)
    }

    /// Pointwise maximum of `rho_plus` over `envelopes`, on the union of their grids.
    fn running_max_plus(envelopes: &[&DistortionEnvelope]) -> Vec<(Rational, Rational)> {
        let mut grid: Vec<Rational> = envelopes.iter().flat_map(|e| e.rho_plus.iter().map(|p| p.0)).collect();
        grid.sort_unstable();
        grid.dedup();
        grid.into_iter()
            .map(|t| (t, envelopes.iter().map(|e| e.rho_plus(t)).max().unwrap_or_else(Rational::zero)))
            .collect()
    }
}

/// Envelope of `f: x -> y` given by `image[i] = f(i)`, from a scan of all pairs.
pub fn empirical_envelope<X: Metric + ?Sized, Y: Metric + ?Sized>(x: &X, y: &Y, image: &[usize]) -> Result<DistortionEnvelope> {
    if x.is_empty() {
        return Err(Error::EmptySet("domain of the map".into()));
    }
    check_map(x, y, image)?;
    let raw = (0..x.len())
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<Rational, (Rational, Rational)>, i| {
            for j in i..x.len() {
                let t = x.dist(i, j);
                let fd = y.dist(image[i], image[j]);
                acc.entry(t)
                    .and_modify(|(lo, hi)| {
                        *lo = (*lo).min(fd);
                        *hi = (*hi).max(fd);
                    })
                    .or_insert((fd, fd));
            }
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (t, (lo, hi)) in b {
                a.entry(t)
                    .and_modify(|(l, h)| {
                        *l = (*l).min(lo);
                        *h = (*h).max(hi);
                    })
                    .or_insert((lo, hi));
            }
            a
        });
    Ok(DistortionEnvelope::from_raw(&raw))
}

fn check_map<X: Metric + ?Sized, Y: Metric + ?Sized>(x: &X, y: &Y, image: &[usize]) -> Result<()> {
    if image.len() != x.len() {
        return Err(Error::Embedding(format!(
            "map is defined on {} points but the domain has {}",
            image.len(),
            x.len()
        )));
    }
    if let Some(&bad) = image.iter().find(|&&v| v >= y.len()) {
        return Err(Error::PointOutOfRange { index: bad, len: y.len() });
    }
    Ok(())
}

/// Pulls a cover witness of `y` back along `f` to separations `targets` on `x`.
///
/// Family `i` must have been built at a separation of at least
/// `rho_plus(targets[i])`. A bounded family of mesh `D` pulls back to mesh at
/// most the largest sampled `t` with `rho_minus(t) <= D`.
pub fn pullback_witness<X: Metric + ?Sized, Y: Metric + ?Sized>(
    x: &X,
    y: &Y,
    image: &[usize],
    envelope: &DistortionEnvelope,
    witness: &CoverWitness,
    targets: &[Rational],
) -> Result<CoverWitness> {
    check_map(x, y, image)?;
    if targets.len() != witness.families.len() {
        return Err(Error::Schedule(format!(
            "{} target separations for {} families",
            targets.len(),
            witness.families.len()
        )));
    }
    check_schedule(targets, false)?;
    for (index, (family, &r)) in witness.families.iter().zip(targets).enumerate() {
        let needed = envelope.rho_plus(r);
        if family.separation < needed {
            return Err(Error::SeparationTooSmall {
                index,
                built: family.separation,
                needed,
            });
        }
    }
    let check = verify_cover_witness(y, witness);
    if !check.passed() {
        return Err(Error::Precondition(format!(
            "witness on the target does not verify ({} violations)",
            check.violations().len()
        )));
    }

    let mut preimage: Vec<Vec<usize>> = vec![Vec::new(); y.len()];
    for (i, &v) in image.iter().enumerate() {
        preimage[v].push(i);
    }
    let mut families = Vec::with_capacity(targets.len());
    for (index, (family, &r)) in witness.families.iter().zip(targets).enumerate() {
        let mesh_bound = match family.mesh_bound {
            MeshBound::Unbounded => MeshBound::Unbounded,
            MeshBound::Bounded(d) => {
                if !envelope.exceeds_at_max(d) {
                    return Err(Error::PreimageMesh(format!(
                        "family {index} has mesh {d} but rho_minus never exceeds it on the sample"
                    )));
                }
                MeshBound::Bounded(envelope.preimage_diameter(d))
            }
        };
        let sets: Vec<PointSet> = family
            .sets()
            .iter()
            .map(|v| normalize(v.iter().flat_map(|&p| preimage[p].iter().copied()).collect()))
            .collect();
        families.push(SubsetFamily::dropping_empty(sets, r, mesh_bound));
    }
    Ok(CoverWitness::new(families))
}

/// Strictly increasing `K(1) = 1 < K(2) < ...`; factor `i` owns trees `K(i)..K(i+1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct BlockPartition {
    k: Vec<usize>,
}

impl TryFrom<Vec<usize>> for BlockPartition {
    type Error = Error;

    fn try_from(k: Vec<usize>) -> Result<Self> {
        Self::new(k)
    }
}

impl From<BlockPartition> for Vec<usize> {
    fn from(b: BlockPartition) -> Self {
        b.k
    }
}

impl BlockPartition {
    pub fn new(k: Vec<usize>) -> Result<Self> {
        if k.first() != Some(&1) {
            return Err(Error::Embedding("K(1) must be 1".into()));
        }
        if let Some(w) = k.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Embedding(format!("K is not strictly increasing: {} then {}", w[0], w[1])));
        }
        Ok(Self { k })
    }

    /// Consecutive blocks of the given sizes, then singleton blocks up to `len` entries.
    pub fn from_sizes(sizes: &[usize], len: usize) -> Result<Self> {
        let mut k = vec![1];
        for &s in sizes {
            if s == 0 {
                return Err(Error::Embedding("blocks must be nonempty".into()));
            }
            k.push(k.last().unwrap() + s);
        }
        while k.len() < len {
            k.push(k.last().unwrap() + 1);
        }
        Self::new(k)
    }

    /// `K(i)`, 1-based.
    pub fn at(&self, i: usize) -> Result<usize> {
        i.checked_sub(1).and_then(|j| self.k.get(j)).copied().ok_or(Error::BlockIndex(i))
    }

    /// Tree coordinates `K(i)..=K(i+1)-1` of factor `i`.
    pub fn block(&self, i: usize) -> Result<std::ops::Range<usize>> {
        Ok(self.at(i)?..self.at(i + 1)?)
    }

    pub fn values(&self) -> &[usize] {
        &self.k
    }
}

/// One factor `(G_i, e_i)` with an injective map into the sup product of its tree block.
#[derive(Debug, Clone)]
pub struct FactorEmbedding {
    pub domain: MetricSpace,
    pub base: usize,
    /// `images[x]` lists one vertex per tree of the block.
    pub images: Vec<Vec<usize>>,
}

/// Factor embeddings with their adjusted envelopes, ready to be appended.
pub struct EmbeddingSpec<'t> {
    trees: &'t [RootedTree],
    blocks: BlockPartition,
    factors: Vec<FactorEmbedding>,
    envelopes: Vec<DistortionEnvelope>,
}

impl<'t> EmbeddingSpec<'t> {
    /// Validates the maps and derives envelopes: `rho_plus` becomes a running
    /// maximum over factors and `rho_minus` is raised to 1 from `t = 1` on.
    pub fn new(trees: &'t [RootedTree], blocks: BlockPartition, factors: Vec<FactorEmbedding>) -> Result<Self> {
        let mut raw = Vec::with_capacity(factors.len());
        for (pos, factor) in factors.iter().enumerate() {
            let i = pos + 1;
            let range = blocks.block(i)?;
            if range.end - 1 > trees.len() {
                return Err(Error::Embedding(format!(
                    "factor {i} needs trees up to {} but only {} are declared",
                    range.end - 1,
                    trees.len()
                )));
            }
            let block: Vec<&dyn Metric> = trees[range.start - 1..range.end - 1].iter().map(|t| t as &dyn Metric).collect();
            let target = SupProduct::new(block)?;
            let width = range.len();
            if factor.base >= factor.domain.len() {
                return Err(Error::PointOutOfRange { index: factor.base, len: factor.domain.len() });
            }
            let mut image = Vec::with_capacity(factor.images.len());
            for tuple in &factor.images {
                if tuple.len() != width {
                    return Err(Error::Embedding(format!("factor {i}: image tuple of length {} for a block of {width}", tuple.len())));
                }
                for (&v, tree) in tuple.iter().zip(&trees[range.start - 1..]) {
                    if v >= tree.len() {
                        return Err(Error::PointOutOfRange { index: v, len: tree.len() });
                    }
                }
                image.push(target.index(tuple));
            }
            let roots: Vec<usize> = trees[range.start - 1..range.end - 1].iter().map(RootedTree::root).collect();
            if factor.images.get(factor.base) != Some(&roots) {
                return Err(Error::Embedding(format!("factor {i}: base point must map to the tree roots")));
            }
            let mut seen = image.clone();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Embedding(format!("factor {i}: map is not injective")));
            }
            let d = &factor.domain;
            let below_one = (0..d.len()).any(|a| (a + 1..d.len()).any(|b| d.dist(a, b) < Rational::one()));
            if below_one {
                return Err(Error::Embedding(format!("factor {i}: distinct points closer than 1")));
            }
            raw.push(empirical_envelope(d, &target, &image)?);
        }

        let mut envelopes = Vec::with_capacity(raw.len());
        for i in 0..raw.len() {
            let prefix: Vec<&DistortionEnvelope> = raw[..=i].iter().collect();
            let rho_plus = DistortionEnvelope::running_max_plus(&prefix);
            let rho_minus = raw[i]
                .rho_minus
                .iter()
                .map(|&(t, v)| (t, if t >= Rational::one() { v.max(Rational::one()) } else { v }))
                .collect();
            envelopes.push(DistortionEnvelope { rho_minus, rho_plus });
        }
        Ok(Self {
            trees,
            blocks,
            factors,
            envelopes,
        })
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, i: usize) -> &FactorEmbedding {
        &self.factors[i - 1]
    }

    pub fn blocks(&self) -> &BlockPartition {
        &self.blocks
    }

    /// Adjusted envelope of factor `i`; past the last factor the last one repeats.
    pub fn envelope(&self, i: usize) -> &DistortionEnvelope {
        &self.envelopes[i.min(self.envelopes.len()) - 1]
    }

    /// The restricted product of the factor spaces, based at the declared base points.
    pub fn domain(&self) -> Result<RestrictedProduct<'_>> {
        RestrictedProduct::new(self.factors.iter().map(|f| (&f.domain as &dyn Metric, f.base)).collect())
    }

    pub fn target(&self) -> RestrictedProduct<'t> {
        RestrictedProduct::of_trees(self.trees)
    }

    /// Image distance `d(f_i(a), f_i(b))` in the sup metric of the block.
    fn image_distance(&self, i: usize, a: usize, b: usize) -> Rational {
        let start = self.blocks.k[i - 1];
        let f = &self.factors[i - 1];
        f.images[a]
            .iter()
            .zip(&f.images[b])
            .enumerate()
            .map(|(j, (&u, &v))| self.trees[start + j - 1].dist(u, v))
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// `F(x)`: each supported `x_i` is replaced by the tuple `f_i(x_i)` placed on block `i`.
pub fn append_embedding(spec: &EmbeddingSpec<'_>, x: &RestrictedPoint) -> Result<RestrictedPoint> {
    let mut entries = Vec::new();
    for (&i, &v) in x.support() {
        if i > spec.factors.len() {
            return Err(Error::Embedding(format!("no factor map for coordinate {i}")));
        }
        let factor = &spec.factors[i - 1];
        if v >= factor.domain.len() {
            return Err(Error::PointOutOfRange { index: v, len: factor.domain.len() });
        }
        let start = spec.blocks.k[i - 1];
        entries.extend(factor.images[v].iter().enumerate().map(|(j, &t)| (start + j, t)));
    }
    spec.target().point(entries)
}

fn block_for(spec: &EmbeddingSpec<'_>, t: Rational) -> Result<usize> {
    if t < Rational::zero() {
        return Err(Error::Precondition(format!("negative distance {t}")));
    }
    spec.blocks.at(ceil_int(&t) as usize + 1)
}

/// `M^3 * rho_plus^M(t)` with `M = K(ceil(t) + 1)`.
pub fn rho_plus_bound(spec: &EmbeddingSpec<'_>, t: Rational) -> Result<Rational> {
    let m = block_for(spec, t)?;
    let m3 = int(m as i64).pow(3);
    Ok(m3 * spec.envelope(m).rho_plus(t))
}

/// Every link of the upper estimate for one pair `(x, y)`, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityChain {
    pub distance: Rational,
    pub m: usize,
    /// `d(F(x), F(y))`.
    pub measured: Rational,
    /// `sum_i (K(i+1)-1)(K(i+1)-K(i)) d(f_i x_i, f_i y_i)`.
    pub block_weighted: Rational,
    /// `M^2 sum_{i<=M} d(f_i x_i, f_i y_i)`.
    pub image_sum: Rational,
    /// `M^2 sum_{i<=M} rho_plus^i(d_i)`.
    pub envelope_sum: Rational,
    /// `M^2 sum_{i<=M} rho_plus^M(d_i)`.
    pub uniform_sum: Rational,
    /// `M^3 rho_plus^M(d(x, y))`.
    pub bound: Rational,
}

impl InequalityChain {
    pub fn links(&self) -> [(&'static str, Rational); 6] {
        [
            ("measured", self.measured),
            ("block-weighted", self.block_weighted),
            ("image-sum", self.image_sum),
            ("envelope-sum", self.envelope_sum),
            ("uniform-envelope-sum", self.uniform_sum),
            ("bound", self.bound),
        ]
    }

    /// First adjacent pair that breaks the chain.
    pub fn first_failure(&self) -> Option<(&'static str, &'static str)> {
        self.links().windows(2).find(|w| w[0].1 > w[1].1).map(|w| (w[0].0, w[1].0))
    }

    pub fn holds(&self) -> bool {
        self.first_failure().is_none()
    }
}

pub fn inequality_chain(spec: &EmbeddingSpec<'_>, x: &RestrictedPoint, y: &RestrictedPoint) -> Result<InequalityChain> {
    let domain = spec.domain()?;
    domain.validate(x)?;
    domain.validate(y)?;
    let distance = domain.distance_unchecked(x, y);
    let m = block_for(spec, distance)?;
    let mm = int(m as i64);
    let measured = spec.target().distance_unchecked(&append_embedding(spec, x)?, &append_embedding(spec, y)?);

    let mut block_weighted = Rational::zero();
    let mut image = Rational::zero();
    let mut envelope = Rational::zero();
    let mut uniform = Rational::zero();
    for i in 1..=spec.factor_count() {
        let (a, b) = (domain.coordinate(x, i), domain.coordinate(y, i));
        let di = spec.factors[i - 1].domain.dist(a, b);
        let fi = spec.image_distance(i, a, b);
        let (ki, kn) = (spec.blocks.at(i)?, spec.blocks.at(i + 1)?);
        block_weighted += int(((kn - 1) * (kn - ki)) as i64) * fi;
        if i <= m {
            image += fi;
            envelope += spec.envelope(i).rho_plus(di);
            uniform += spec.envelope(m).rho_plus(di);
        }
    }
    let m2 = mm * mm;
    Ok(InequalityChain {
        distance,
        m,
        measured,
        block_weighted,
        image_sum: m2 * image,
        envelope_sum: m2 * envelope,
        uniform_sum: m2 * uniform,
        bound: rho_plus_bound(spec, distance)?,
    })
}

/// `sum_i i * rho_minus^i(d_i(x_i, y_i))`.
pub fn weighted_minus(spec: &EmbeddingSpec<'_>, domain: &RestrictedProduct<'_>, x: &RestrictedPoint, y: &RestrictedPoint) -> Rational {
    (1..=spec.factor_count())
        .map(|i| {
            let d = spec.factors[i - 1].domain.dist(domain.coordinate(x, i), domain.coordinate(y, i));
            int(i as i64) * spec.envelope(i).rho_minus(d)
        })
        .sum()
}

fn sample_pairs(sample: &[RestrictedPoint]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..sample.len()).flat_map(move |i| (i + 1..sample.len()).map(move |j| (i, j)))
}

/// Sample surrogate of the lower control: the minimum of the weighted
/// `rho_minus` sum over sampled pairs at distance at least `t`.
pub fn rho_minus_min(spec: &EmbeddingSpec<'_>, sample: &[RestrictedPoint], t: Rational) -> Result<Rational> {
    let domain = spec.domain()?;
    for p in sample {
        domain.validate(p)?;
    }
    sample_pairs(sample)
        .filter(|&(i, j)| domain.distance_unchecked(&sample[i], &sample[j]) >= t)
        .map(|(i, j)| weighted_minus(spec, &domain, &sample[i], &sample[j]))
        .min()
        .ok_or_else(|| Error::Precondition(format!("no sampled pair at distance at least {t}")))
}

/// `rho_minus_min` at every realized sample distance, ascending.
pub fn sample_rho_minus(spec: &EmbeddingSpec<'_>, sample: &[RestrictedPoint]) -> Result<Vec<(Rational, Rational)>> {
    let domain = spec.domain()?;
    let mut by_distance: BTreeMap<Rational, Rational> = BTreeMap::new();
    for (i, j) in sample_pairs(sample) {
        let d = domain.distance_unchecked(&sample[i], &sample[j]);
        let w = weighted_minus(spec, &domain, &sample[i], &sample[j]);
        by_distance.entry(d).and_modify(|v| *v = (*v).min(w)).or_insert(w);
    }
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(by_distance.len());
    let mut running: Option<Rational> = None;
    for (&d, &w) in by_distance.iter().rev() {
        let v = running.map_or(w, |r| r.min(w));
        running = Some(v);
        out.push((d, v));
    }
    out.reverse();
    Ok(out)
}

/// Checks `rho_minus_min(d(x,y)) <= sum_i i rho_minus^i(d_i) <= d(F(x), F(y))` on every sampled pair.
pub fn check_domination(spec: &EmbeddingSpec<'_>, sample: &[RestrictedPoint]) -> Result<VerificationReport> {
    let domain = spec.domain()?;
    let target = spec.target();
    let lower = sample_rho_minus(spec, sample)?;
    let images: Vec<RestrictedPoint> = sample.iter().map(|p| append_embedding(spec, p)).collect::<Result<_>>()?;
    let mut report = VerificationReport::pass();
    for (i, j) in sample_pairs(sample) {
        let d = domain.distance_unchecked(&sample[i], &sample[j]);
        let fd = target.distance_unchecked(&images[i], &images[j]);
        let w = weighted_minus(spec, &domain, &sample[i], &sample[j]);
        let r = evaluate(&lower, d);
        if w > fd || r > fd {
            report.push(
                Violation::new(ViolationKind::Domination)
                    .points(vec![domain.label(&sample[i]), domain.label(&sample[j])])
                    .measured(fd)
                    .required(w.max(r))
                    .detail("lower control exceeds the image distance"),
            );
        }
    }
    Ok(report)
}
