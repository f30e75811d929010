//! Sup-metric products, finitely supported restricted products, and the
//! combiner that turns cover witnesses of two factors into one for their
//! product.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::family::{CoverWitness, MeshBound, PointSet, SubsetFamily};
use crate::metric::{space_diameter, Metric, MetricSpace};
use crate::rational::{int, Rational};
use crate::tree::{tree_asdim1_witness, RootedTree};

/// Lazy product of finitely many spaces under the sup metric.
///
/// Point `(x_1, ..., x_k)` has index `x_1 * |X_2|...|X_k| + ... + x_k`.
pub struct SupProduct<'a> {
    factors: Vec<&'a dyn Metric>,
    len: usize,
}

impl<'a> SupProduct<'a> {
    pub fn new(factors: Vec<&'a dyn Metric>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Precondition("a product needs at least one factor".into()));
        }
        let len = factors
            .iter()
            .try_fold(1usize, |acc, f| acc.checked_mul(f.len()))
            .ok_or_else(|| Error::Budget("product point count overflows".into()))?;
        Ok(Self { factors, len })
    }

    pub fn coordinates(&self, mut index: usize) -> Vec<usize> {
        let mut coords = vec![0; self.factors.len()];
        for (slot, f) in coords.iter_mut().zip(&self.factors).rev() {
            *slot = index % f.len();
            index /= f.len();
        }
        coords
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&c, f)| acc * f.len() + c)
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }
}

impl Metric for SupProduct<'_> {
    fn len(&self) -> usize {
        self.len
    }

    fn dist(&self, i: usize, j: usize) -> Rational {
        let (a, b) = (self.coordinates(i), self.coordinates(j));
        self.factors
            .iter()
            .zip(a.iter().zip(&b))
            .map(|(f, (&x, &y))| f.dist(x, y))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    fn label(&self, i: usize) -> String {
        let parts: Vec<String> = self
            .coordinates(i)
            .iter()
            .zip(&self.factors)
            .map(|(&c, f)| f.label(c))
            .collect();
        format!("({})", parts.join(","))
    }
}

/// Materialized sup product; refuses to build more than `budget` points.
pub fn sup_product(spaces: &[&dyn Metric], budget: usize) -> Result<MetricSpace> {
    let product = SupProduct::new(spaces.to_vec())?;
    if product.len() > budget {
        return Err(Error::Budget(format!(
            "sup product has {} points, budget is {budget}",
            product.len()
        )));
    }
    MetricSpace::materialize(&product)
}

/// `{ U x V }` for every pair of members, as point sets of `X x Y` with `|Y| = y_len`.
pub fn product_sets(u: &[PointSet], v: &[PointSet], y_len: usize) -> Vec<PointSet> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for a in u {
        for b in v {
            let mut set: PointSet = Vec::with_capacity(a.len() * b.len());
            for &x in a {
                for &y in b {
                    set.push(x * y_len + y);
                }
            }
            out.push(set);
        }
    }
    out
}

/// A point of a restricted product: the coordinates (1-based) where it leaves the base point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RestrictedPoint {
    support: BTreeMap<usize, usize>,
}

impl RestrictedPoint {
    pub fn base() -> Self {
        Self::default()
    }

    pub fn support(&self) -> &BTreeMap<usize, usize> {
        &self.support
    }
}

/// Pointed factor spaces `(X_i, x_i)` for `i = 1..=n`, with metric `sum_i i * d_i`.
pub struct RestrictedProduct<'a> {
    factors: Vec<&'a dyn Metric>,
    bases: Vec<usize>,
}

impl<'a> RestrictedProduct<'a> {
    pub fn new(factors: Vec<(&'a dyn Metric, usize)>) -> Result<Self> {
        for (i, (f, base)) in factors.iter().enumerate() {
            if *base >= f.len() {
                return Err(Error::PointOutOfRange { index: *base, len: f.len() })
                    .map_err(|e| Error::Precondition(format!("base point of factor {}: {e}", i + 1)));
            }
        }
        let (factors, bases) = factors.into_iter().unzip();
        Ok(Self { factors, bases })
    }

    /// Trees as factors, each based at its root.
    pub fn of_trees(trees: &'a [RootedTree]) -> Self {
        Self {
            factors: trees.iter().map(|t| t as &dyn Metric).collect(),
            bases: trees.iter().map(RootedTree::root).collect(),
        }
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, coord: usize) -> &'a dyn Metric {
        self.factors[coord - 1]
    }

    pub fn base(&self, coord: usize) -> usize {
        self.bases[coord - 1]
    }

    /// Builds a point from `(coordinate, factor point)` entries; base entries are dropped.
    pub fn point(&self, entries: impl IntoIterator<Item = (usize, usize)>) -> Result<RestrictedPoint> {
        let mut support = BTreeMap::new();
        for (coord, value) in entries {
            self.check_coord(coord)?;
            let len = self.factors[coord - 1].len();
            if value >= len {
                return Err(Error::PointOutOfRange { index: value, len });
            }
            if value != self.bases[coord - 1] {
                support.insert(coord, value);
            } else {
                support.remove(&coord);
            }
        }
        Ok(RestrictedPoint { support })
    }

    /// Same as [`RestrictedProduct::point`] with factor labels.
    pub fn point_from_labels<S: AsRef<str>>(&self, entries: &[(usize, S)]) -> Result<RestrictedPoint> {
        let mut resolved = Vec::with_capacity(entries.len());
        for (coord, label) in entries {
            self.check_coord(*coord)?;
            let f = self.factors[coord - 1];
            let v = f
                .index_of(label.as_ref())
                .ok_or_else(|| Error::UnknownLabel(label.as_ref().to_string()))?;
            resolved.push((*coord, v));
        }
        self.point(resolved)
    }

    fn check_coord(&self, coord: usize) -> Result<()> {
        if coord == 0 || coord > self.factors.len() {
            return Err(Error::CoordinateOutOfRange {
                coord,
                factors: self.factors.len(),
            });
        }
        Ok(())
    }

    pub fn validate(&self, point: &RestrictedPoint) -> Result<()> {
        for (&coord, &value) in &point.support {
            self.check_coord(coord)?;
            let len = self.factors[coord - 1].len();
            if value >= len {
                return Err(Error::PointOutOfRange { index: value, len });
            }
            if value == self.bases[coord - 1] {
                return Err(Error::Precondition(format!("support entry at coordinate {coord} equals the base point")));
            }
        }
        Ok(())
    }

    /// Value of `point` at coordinate `coord` (1-based).
    pub fn coordinate(&self, point: &RestrictedPoint, coord: usize) -> usize {
        point
            .support
            .get(&coord)
            .copied()
            .unwrap_or(self.bases[coord - 1])
    }

    pub fn label(&self, point: &RestrictedPoint) -> String {
        let parts: Vec<String> = point
            .support
            .iter()
            .map(|(&c, &v)| format!("{c}:{}", self.factors[c - 1].label(v)))
            .collect();
        format!("{{{}}}", parts.join(","))
    }

    /// Distance without validation; callers guarantee both points are valid.
    pub(crate) fn distance_unchecked(&self, a: &RestrictedPoint, b: &RestrictedPoint) -> Rational {
        let mut total = Rational::zero();
        let mut coords: Vec<usize> = a.support.keys().chain(b.support.keys()).copied().collect();
        coords.sort_unstable();
        coords.dedup();
        for c in coords {
            let d = self.factors[c - 1].dist(self.coordinate(a, c), self.coordinate(b, c));
            total += int(c as i64) * d;
        }
        total
    }
}

/// `sum_i i * d_i(a_i, b_i)`.
pub fn restricted_metric(a: &RestrictedPoint, b: &RestrictedPoint, product: &RestrictedProduct<'_>) -> Result<Rational> {
    product.validate(a)?;
    product.validate(b)?;
    Ok(product.distance_unchecked(a, b))
}

/// A finite set of restricted points viewed as a metric space.
pub struct RestrictedSample<'p, 'a> {
    product: &'p RestrictedProduct<'a>,
    points: Vec<RestrictedPoint>,
}

impl<'p, 'a> RestrictedSample<'p, 'a> {
    /// Duplicate points are rejected since they would sit at distance zero.
    pub fn new(product: &'p RestrictedProduct<'a>, points: Vec<RestrictedPoint>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for p in &points {
            product.validate(p)?;
            if !seen.insert(p) {
                return Err(Error::Precondition(format!("duplicate point {}", product.label(p))));
            }
        }
        Ok(Self { product, points })
    }

    pub fn points(&self) -> &[RestrictedPoint] {
        &self.points
    }

    pub fn product(&self) -> &'p RestrictedProduct<'a> {
        self.product
    }
}

impl Metric for RestrictedSample<'_, '_> {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn dist(&self, i: usize, j: usize) -> Rational {
        self.product.distance_unchecked(&self.points[i], &self.points[j])
    }

    fn label(&self, i: usize) -> String {
        self.product.label(&self.points[i])
    }
}

/// Bijection between positions `1, 2, ...` and pairs `(m, n)` of positive integers.
#[derive(Debug, Clone)]
pub enum Reindex {
    /// Cantor pairing along anti-diagonals: 1 -> (1,1), 2 -> (2,1), 3 -> (1,2), ...
    Cantor,
    /// Explicit finite table: `pairs[j - 1]` is the pair at position `j`.
    Table {
        pairs: Vec<(usize, usize)>,
        inverse: HashMap<(usize, usize), usize>,
    },
}

impl Reindex {
    pub fn table(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut inverse = HashMap::with_capacity(pairs.len());
        for (k, &(m, n)) in pairs.iter().enumerate() {
            if m == 0 || n == 0 {
                return Err(Error::NotBijective(format!("pair ({m},{n}) has a zero index")));
            }
            if let Some(prev) = inverse.insert((m, n), k + 1) {
                return Err(Error::NotBijective(format!(
                    "positions {prev} and {} both map to ({m},{n})",
                    k + 1
                )));
            }
        }
        Ok(Reindex::Table { pairs, inverse })
    }

    pub fn pair(&self, position: usize) -> Result<(usize, usize)> {
        if position == 0 {
            return Err(Error::NotBijective("positions start at 1".into()));
        }
        match self {
            Reindex::Cantor => {
                let j = (position - 1) as u64;
                let mut w = ((((8 * j + 1) as f64).sqrt() - 1.0) / 2.0) as u64;
                while w * (w + 1) / 2 > j {
                    w -= 1;
                }
                while (w + 1) * (w + 2) / 2 <= j {
                    w += 1;
                }
                let y = j - w * (w + 1) / 2;
                let x = w - y;
                Ok((x as usize + 1, y as usize + 1))
            }
            Reindex::Table { pairs, .. } => pairs
                .get(position - 1)
                .copied()
                .ok_or_else(|| Error::NotBijective(format!("position {position} is not in the table"))),
        }
    }

    pub fn position(&self, m: usize, n: usize) -> Result<usize> {
        if m == 0 || n == 0 {
            return Err(Error::NotBijective(format!("pair ({m},{n}) has a zero index")));
        }
        match self {
            Reindex::Cantor => {
                let (x, y) = (m - 1, n - 1);
                let w = x + y;
                Ok(w * (w + 1) / 2 + y + 1)
            }
            Reindex::Table { inverse, .. } => inverse
                .get(&(m, n))
                .copied()
                .ok_or_else(|| Error::NotBijective(format!("pair ({m},{n}) has no position"))),
        }
    }
}

/// A separation sequence queried by 0-based position.
pub trait Schedule {
    fn at(&self, i: usize) -> Result<Rational>;
}

/// Finite nondecreasing prefix, continued by repeating its last value.
#[derive(Debug, Clone)]
pub struct ExtendedSchedule {
    values: Vec<Rational>,
}

impl ExtendedSchedule {
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        check_schedule(&values, false)?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }
}

impl Schedule for ExtendedSchedule {
    fn at(&self, i: usize) -> Result<Rational> {
        Ok(self.values[i.min(self.values.len() - 1)])
    }
}

/// Positive and nondecreasing (or strictly increasing when `strict`).
pub fn check_schedule(values: &[Rational], strict: bool) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Schedule("schedule is empty".into()));
    }
    if let Some(r) = values.iter().find(|r| **r <= Rational::zero()) {
        return Err(Error::Schedule(format!("entry {r} is not positive")));
    }
    for (i, w) in values.windows(2).enumerate() {
        if w[1] < w[0] || (strict && w[1] == w[0]) {
            let rel = if strict { "strictly increasing" } else { "nondecreasing" };
            return Err(Error::Schedule(format!(
                "schedule must be {rel}: entry {} ({}) follows {}",
                i + 1,
                w[1],
                w[0]
            )));
        }
    }
    Ok(())
}

/// Answers a schedule with a witness whose family `i` claims separation `schedule.at(i)`.
pub trait WitnessProvider {
    fn witness(&self, schedule: &dyn Schedule) -> Result<CoverWitness>;
}

/// Two-family witness for a tree from the even/odd band construction.
pub struct TreeProvider<'a>(pub &'a RootedTree);

impl WitnessProvider for TreeProvider<'_> {
    fn witness(&self, schedule: &dyn Schedule) -> Result<CoverWitness> {
        let (r0, r1) = (schedule.at(0)?, schedule.at(1)?);
        let mut witness = tree_asdim1_witness(self.0, r0.max(r1))?;
        witness.families[0].separation = r0;
        witness.families[1].separation = r1;
        Ok(witness)
    }
}

/// A finite space is bounded, so the whole space is a one-family witness.
pub struct BoundedProvider<'a>(pub &'a dyn Metric);

impl WitnessProvider for BoundedProvider<'_> {
    fn witness(&self, schedule: &dyn Schedule) -> Result<CoverWitness> {
        let all: PointSet = (0..self.0.len()).collect();
        let family = SubsetFamily::new(vec![all], schedule.at(0)?, MeshBound::Bounded(space_diameter(self.0)))?;
        Ok(CoverWitness::new(vec![family]))
    }
}

/// A precomputed witness, usable for any schedule it dominates entry by entry.
pub struct StoredProvider(pub CoverWitness);

impl WitnessProvider for StoredProvider {
    fn witness(&self, schedule: &dyn Schedule) -> Result<CoverWitness> {
        let mut out = self.0.clone();
        for (i, family) in out.families.iter_mut().enumerate() {
            let needed = schedule.at(i)?;
            if family.separation < needed {
                return Err(Error::Provider(format!(
                    "stored family {i} has separation {} but {needed} is requested",
                    family.separation
                )));
            }
            family.separation = needed;
        }
        Ok(out)
    }
}

/// Where each product family `W_{m,n}` landed in the combined witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub position: usize,
    pub m: usize,
    pub n: usize,
}

#[derive(Debug, Clone)]
pub struct CombinedCover {
    /// Family `j - 1` answers schedule entry `R_j`; gaps hold empty families.
    pub witness: CoverWitness,
    pub placements: Vec<Placement>,
    /// The schedule handed to the `X` provider (running maxima of the per-row maxima).
    pub x_schedule: Vec<Rational>,
}

struct RowSchedule<'s> {
    base: &'s ExtendedSchedule,
    reindex: &'s Reindex,
    row: usize,
}

impl Schedule for RowSchedule<'_> {
    fn at(&self, i: usize) -> Result<Rational> {
        let position = self.reindex.position(self.row, i + 1)?;
        self.base.at(position - 1)
    }
}

struct Rows<'s> {
    base: &'s ExtendedSchedule,
    reindex: &'s Reindex,
    y: &'s dyn WitnessProvider,
    witnesses: RefCell<Vec<CoverWitness>>,
}

impl Rows<'_> {
    fn ensure(&self, rows: usize) -> Result<()> {
        while self.witnesses.borrow().len() < rows {
            let row = self.witnesses.borrow().len() + 1;
            let schedule = RowSchedule {
                base: self.base,
                reindex: self.reindex,
                row,
            };
            let witness = self.y.witness(&schedule)?;
            if witness.families.is_empty() {
                return Err(Error::Provider(format!("Y provider returned no families for row {row}")));
            }
            for (i, family) in witness.families.iter().enumerate() {
                let needed = schedule.at(i)?;
                if family.separation < needed {
                    return Err(Error::Provider(format!(
                        "Y family {i} of row {row} claims separation {} below the requested {needed}",
                        family.separation
                    )));
                }
            }
            self.witnesses.borrow_mut().push(witness);
        }
        Ok(())
    }

    /// `max_n R_{m,n}` over the families actually used in row `m`.
    fn row_max(&self, row: usize) -> Result<Rational> {
        self.ensure(row)?;
        let witnesses = self.witnesses.borrow();
        let schedule = RowSchedule {
            base: self.base,
            reindex: self.reindex,
            row,
        };
        let mut best = Rational::zero();
        for i in 0..witnesses[row - 1].families.len() {
            best = best.max(schedule.at(i)?);
        }
        Ok(best)
    }
}

struct XSchedule<'r, 's> {
    rows: &'r Rows<'s>,
    used: RefCell<usize>,
}

impl Schedule for XSchedule<'_, '_> {
    fn at(&self, i: usize) -> Result<Rational> {
        // Running maximum keeps the X schedule nondecreasing even when a
        // later row needs fewer Y families than an earlier one.
        let mut best = Rational::zero();
        for row in 1..=i + 1 {
            best = best.max(self.rows.row_max(row)?);
        }
        let mut used = self.used.borrow_mut();
        *used = (*used).max(i + 1);
        Ok(best)
    }
}

/// Cover witness for `X x Y` (sup metric) from witnesses of the factors.
///
/// Row `m` of the reindexed schedule goes to `Y`; the row maxima go to `X`;
/// `W_{m,n} = { U x V : U in U_m, V in V^m_n }` is placed at the position of
/// `(m, n)`, and positions no pair reaches hold empty families.
pub fn combine_product_covers(
    x: &dyn Metric,
    y: &dyn Metric,
    schedule: &ExtendedSchedule,
    reindex: &Reindex,
    x_provider: &dyn WitnessProvider,
    y_provider: &dyn WitnessProvider,
) -> Result<CombinedCover> {
    let rows = Rows {
        base: schedule,
        reindex,
        y: y_provider,
        witnesses: RefCell::new(Vec::new()),
    };
    let x_schedule = XSchedule {
        rows: &rows,
        used: RefCell::new(0),
    };
    let x_witness = x_provider.witness(&x_schedule)?;
    if x_witness.families.is_empty() {
        return Err(Error::Provider("X provider returned no families".into()));
    }
    let k = x_witness.families.len();
    for family in &x_witness.families {
        if let Some(&bad) = family.sets().iter().flatten().find(|&&p| p >= x.len()) {
            return Err(Error::Provider(format!("X provider returned point {bad} outside a {}-point space", x.len())));
        }
    }
    rows.ensure(k)?;
    let mut x_values = Vec::with_capacity(k);
    for (i, family) in x_witness.families.iter().enumerate() {
        let needed = x_schedule.at(i)?;
        if family.separation < needed {
            return Err(Error::Provider(format!(
                "X family {i} claims separation {} below the requested {needed}",
                family.separation
            )));
        }
        x_values.push(needed);
    }

    let y_witnesses = rows.witnesses.into_inner();
    let y_len = y.len();
    let mut placed: BTreeMap<usize, (SubsetFamily, Placement)> = BTreeMap::new();
    for m in 1..=k {
        let u = &x_witness.families[m - 1];
        for (idx, v) in y_witnesses[m - 1].families.iter().enumerate() {
            let n = idx + 1;
            let position = reindex.position(m, n)?;
            if reindex.pair(position)? != (m, n) {
                return Err(Error::NotBijective(format!("position {position} does not map back to ({m},{n})")));
            }
            let separation = schedule.at(position - 1)?;
            let family = SubsetFamily::new(
                product_sets(u.sets(), v.sets(), y_len),
                separation,
                u.mesh_bound.max(v.mesh_bound),
            )?;
            if placed
                .insert(position, (family, Placement { position, m, n }))
                .is_some()
            {
                return Err(Error::NotBijective(format!("two pairs share position {position}")));
            }
        }
    }
    let last = *placed.keys().next_back().expect("at least one family");
    let mut families = Vec::with_capacity(last);
    let mut placements = Vec::with_capacity(placed.len());
    for position in 1..=last {
        match placed.remove(&position) {
            Some((family, placement)) => {
                families.push(family);
                placements.push(placement);
            }
            None => families.push(SubsetFamily::empty(schedule.at(position - 1)?)),
        }
    }
    Ok(CombinedCover {
        witness: CoverWitness::new(families),
        placements,
        x_schedule: x_values,
    })
}
