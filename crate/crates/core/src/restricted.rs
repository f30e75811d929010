//! Cover witnesses for finite samples of restricted products of trees.
//!
//! Coordinates `1..=k` are cut radially into bands of period `2^m S`
//! (the `C` and `D` families), coordinates `k+1..=k+m` use their
//! two-family tree witnesses combined through `psi` (the `W` families), and
//! all coordinates past `k+m` are frozen. The result has `1 + k 2^k`
//! families.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::family::{CoverWitness, MeshBound, PointSet, SubsetFamily};
use crate::metric::Metric;
use crate::product::{check_schedule, RestrictedPoint, RestrictedProduct, RestrictedSample, SupProduct};
use crate::rational::{int, Rational};
use crate::tree::{refine_annuli, tree_asdim1_witness, Annulus, RootedTree};

/// Separation schedule and the integers `k`, `m` with `R_0 < k` and `R_{k 2^k} < m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeProductSchedule {
    radii: Vec<Rational>,
    k: usize,
    m: usize,
    /// `psi[l - 1]` encodes the bit vector `psi(l)`; bit `j - 1` is coordinate `j`.
    psi: Vec<usize>,
    phi: Vec<usize>,
}

fn check_permutation(name: &str, perm: &[usize], bits: usize) -> Result<()> {
    let size = 1usize << bits;
    if perm.len() != size {
        return Err(Error::Schedule(format!("{name} must list {size} codes, got {}", perm.len())));
    }
    let mut seen = vec![false; size];
    for &code in perm {
        if code >= size || std::mem::replace(&mut seen[code], true) {
            return Err(Error::Schedule(format!("{name} is not a bijection onto {{0,1}}^{bits}")));
        }
    }
    Ok(())
}

impl TreeProductSchedule {
    /// `psi` and `phi` default to the binary expansion of `l - 1` and `t - 1`.
    pub fn new(
        radii: Vec<Rational>,
        k: usize,
        m: usize,
        psi: Option<Vec<usize>>,
        phi: Option<Vec<usize>>,
    ) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::Schedule("k and m must be positive integers".into()));
        }
        if k > 8 || m > 12 {
            return Err(Error::Budget(format!("k = {k}, m = {m} would need too many families")));
        }
        check_schedule(&radii, true)?;
        let big = k << k;
        if radii.len() <= big {
            return Err(Error::Schedule(format!(
                "need R_0..R_{big} ({} entries), got {}",
                big + 1,
                radii.len()
            )));
        }
        if radii[0] >= int(k as i64) {
            return Err(Error::Schedule(format!("R_0 < k violated: R_0 = {}, k = {k}", radii[0])));
        }
        if radii[big] >= int(m as i64) {
            return Err(Error::Schedule(format!(
                "R_{{k2^k}} < m violated: R_{big} = {}, m = {m}",
                radii[big]
            )));
        }
        let psi = psi.unwrap_or_else(|| (0..1 << m).collect());
        let phi = phi.unwrap_or_else(|| (0..1 << k).collect());
        check_permutation("psi", &psi, m)?;
        check_permutation("phi", &phi, k)?;
        Ok(Self { radii, k, m, psi, phi })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn radii(&self) -> &[Rational] {
        &self.radii
    }

    pub fn psi(&self) -> &[usize] {
        &self.psi
    }

    pub fn phi(&self) -> &[usize] {
        &self.phi
    }

    pub fn r0(&self) -> Rational {
        self.radii[0]
    }

    /// `R_{k 2^k}`.
    pub fn big(&self) -> Rational {
        self.radii[self.k << self.k]
    }

    /// `S = R_0 + R_{k 2^k}`.
    pub fn period_unit(&self) -> Rational {
        self.r0() + self.big()
    }

    /// Number of covering families, `1 + k 2^k`.
    pub fn family_count(&self) -> usize {
        1 + (self.k << self.k)
    }

    pub fn psi_bit(&self, l: usize, j: usize) -> usize {
        (self.psi[l - 1] >> (j - 1)) & 1
    }

    pub fn phi_bit(&self, t: usize, i: usize) -> usize {
        (self.phi[t - 1] >> (i - 1)) & 1
    }

    fn psi_inverse(&self, code: usize) -> usize {
        self.psi.iter().position(|&c| c == code).expect("bijection") + 1
    }
}

/// The per-coordinate families behind the restricted cover.
#[derive(Debug, Clone)]
pub struct CdwFamilies {
    /// `c[i - 1][l - 1]`, an `R_0`-disjoint refinement on tree `i <= k`.
    pub c: Vec<Vec<SubsetFamily>>,
    /// `d[i - 1][l - 1]`, an `R_{k2^k}`-disjoint refinement of the gaps of `c`.
    pub d: Vec<Vec<SubsetFamily>>,
    /// `v[i - 1] = [V_0, V_1]` for every tree `i <= k + m`, with disjoint unions.
    pub v: Vec<[SubsetFamily; 2]>,
    /// `w[l - 1]`: each member lists, for `j = 1..=m`, a set index into
    /// `v[k + j - 1][psi(l)_j]`.
    pub w: Vec<Vec<Vec<usize>>>,
    k: usize,
    m: usize,
}

impl CdwFamilies {
    /// `W_l` as point sets of the sup product of trees `k+1..=k+m`.
    pub fn w_sets(&self, schedule: &TreeProductSchedule, l: usize, middle: &SupProduct<'_>) -> Vec<PointSet> {
        self.w[l - 1]
            .iter()
            .map(|member| {
                let components: Vec<&PointSet> = member
                    .iter()
                    .enumerate()
                    .map(|(j, &idx)| &self.v[self.k + j][schedule.psi_bit(l, j + 1)].sets()[idx])
                    .collect();
                let mut set = Vec::new();
                let mut coords = vec![0usize; components.len()];
                cartesian(&components, 0, &mut coords, &mut |c| set.push(middle.index(c)));
                set.sort_unstable();
                set
            })
            .collect()
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

fn cartesian(components: &[&PointSet], depth: usize, coords: &mut Vec<usize>, emit: &mut dyn FnMut(&[usize])) {
    if depth == components.len() {
        emit(coords);
        return;
    }
    for &v in components[depth] {
        coords[depth] = v;
        cartesian(components, depth + 1, coords, emit);
    }
}

/// Builds `C^i_l`, `D^i_l` (for `i <= k`), the tree witnesses `V^i` and `W_l`.
///
/// `trees` must hold at least `k + m` trees, each with two or more vertices.
pub fn build_cdw(schedule: &TreeProductSchedule, trees: &[RootedTree]) -> Result<CdwFamilies> {
    let (k, m) = (schedule.k, schedule.m);
    if trees.len() < k + m {
        return Err(Error::Precondition(format!("need {} trees, got {}", k + m, trees.len())));
    }
    if let Some(i) = trees[..k + m].iter().position(|t| t.len() < 2) {
        return Err(Error::Precondition(format!("tree {} has fewer than two vertices; pad it first", i + 1)));
    }
    let r0 = schedule.r0();
    let big = schedule.big();
    let s = schedule.period_unit();
    let period = 1i64 << m;

    let mut c = Vec::with_capacity(k);
    let mut d = Vec::with_capacity(k);
    for tree in &trees[..k] {
        let depth_limit = int(tree.max_depth() as i64);
        let mut c_row = Vec::with_capacity(1 << m);
        let mut d_row = Vec::with_capacity(1 << m);
        for l in 1..=period {
            let l_r = int(l);
            let mut c_bands = vec![Annulus::new(int(0), (int(period) + l_r) * s - r0)?];
            let mut d_bands = Vec::new();
            let mut n = 1i64;
            loop {
                let start = (int(period * n) + l_r) * s;
                let gap = start - r0;
                if gap > depth_limit {
                    break;
                }
                d_bands.push(Annulus::new(gap, start)?);
                c_bands.push(Annulus::new(start, (int(period * (n + 1)) + l_r) * s - r0)?);
                n += 1;
            }
            c_row.push(refine_annuli(tree, &c_bands, r0)?);
            d_row.push(refine_annuli(tree, &d_bands, big)?);
        }
        c.push(c_row);
        d.push(d_row);
    }

    let v: Vec<[SubsetFamily; 2]> = trees[..k + m]
        .iter()
        .map(|tree| {
            let w = tree_asdim1_witness(tree, big)?;
            let mut it = w.families.into_iter();
            Ok([it.next().expect("two families"), it.next().expect("two families")])
        })
        .collect::<Result<_>>()?;

    let mut w = Vec::with_capacity(1 << m);
    for l in 1..=1usize << m {
        let choices: Vec<usize> = (1..=m)
            .map(|j| v[k + j - 1][schedule.psi_bit(l, j)].len())
            .collect();
        let mut members = Vec::new();
        let mut current = vec![0usize; m];
        enumerate_indices(&choices, 0, &mut current, &mut members);
        w.push(members);
    }
    Ok(CdwFamilies { c, d, v, w, k, m })
}

fn enumerate_indices(choices: &[usize], depth: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if depth == choices.len() {
        out.push(current.clone());
        return;
    }
    for idx in 0..choices[depth] {
        current[depth] = idx;
        enumerate_indices(choices, depth + 1, current, out);
    }
}

/// Vertex -> (member index) lookup for one family.
fn membership(family: &SubsetFamily, len: usize) -> Vec<Option<usize>> {
    let mut out = vec![None; len];
    for (idx, set) in family.sets().iter().enumerate() {
        for &v in set {
            out[v] = Some(idx);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct RestrictedCover {
    /// Witness on the sample, family `j` at separation `R_j`.
    pub witness: CoverWitness,
    pub cdw: CdwFamilies,
    /// Coordinates whose tree was padded with an extra leaf (or added outright
    /// when the product has fewer than `k + m` factors).
    pub padded: Vec<usize>,
}

/// Cover witness for the finite sample `points` of the restricted product of `trees`.
///
/// Each point is assigned to at most one member per family by looking up
/// its coordinates in the `C`, `D`, `V` and `W` families; members are the
/// resulting groups, so they are exactly the product sets intersected with
/// the sample.
pub fn restricted_tree_cover(
    trees: &[RootedTree],
    schedule: &TreeProductSchedule,
    points: &[RestrictedPoint],
) -> Result<RestrictedCover> {
    let (k, m) = (schedule.k, schedule.m);
    let product = RestrictedProduct::of_trees(trees);
    for p in points {
        product.validate(p)?;
    }

    let mut padded = Vec::new();
    let mut working: Vec<RootedTree> = Vec::with_capacity(k + m);
    for i in 1..=k + m {
        let (tree, was_padded) = match trees.get(i - 1) {
            Some(t) => t.padded(),
            None => RootedTree::from_edges::<&str>("x", &[]).expect("single vertex").padded(),
        };
        if was_padded {
            padded.push(i);
        }
        working.push(tree);
    }
    let cdw = build_cdw(schedule, &working)?;

    let coordinate = |p: &RestrictedPoint, i: usize| -> usize { p.support().get(&i).copied().unwrap_or(0) };

    let c_member: Vec<Vec<Vec<Option<usize>>>> = (0..k)
        .map(|i| cdw.c[i].iter().map(|f| membership(f, working[i].len())).collect())
        .collect();
    let d_member: Vec<Vec<Vec<Option<usize>>>> = (0..k)
        .map(|i| cdw.d[i].iter().map(|f| membership(f, working[i].len())).collect())
        .collect();
    // Each vertex lies in exactly one of V_0, V_1.
    let v_member: Vec<Vec<(usize, usize)>> = (0..k + m)
        .map(|i| {
            let mut out = vec![(usize::MAX, usize::MAX); working[i].len()];
            for bit in 0..2 {
                for (idx, set) in cdw.v[i][bit].sets().iter().enumerate() {
                    for &vertex in set {
                        out[vertex] = (bit, idx);
                    }
                }
            }
            out
        })
        .collect();

    type Key = (Vec<(usize, usize)>, Vec<usize>);
    let families_count = schedule.family_count();
    let mut groups: Vec<BTreeMap<Key, PointSet>> = vec![BTreeMap::new(); families_count];

    for (index, p) in points.iter().enumerate() {
        let tail: Vec<(usize, usize)> = p.support().range(k + m + 1..).map(|(&c, &v)| (c, v)).collect();
        let mut code = 0usize;
        let mut w_key = Vec::with_capacity(m);
        for j in 1..=m {
            let (bit, idx) = v_member[k + j - 1][coordinate(p, k + j)];
            debug_assert!(bit < 2, "tree witnesses cover every vertex");
            code |= bit << (j - 1);
            w_key.push(idx);
        }
        let l = schedule.psi_inverse(code);

        let c_key: Option<Vec<usize>> = (1..=k).map(|i| c_member[i - 1][l - 1][coordinate(p, i)]).collect();
        if let Some(c_key) = c_key {
            let mut key = vec![l];
            key.extend(c_key);
            key.extend(&w_key);
            groups[0].entry((tail.clone(), key)).or_default().push(index);
        }

        for s in 1..=k {
            let Some(d_idx) = d_member[s - 1][l - 1][coordinate(p, s)] else {
                continue;
            };
            for t in 1..=1usize << k {
                let mut key = vec![l, d_idx];
                let mut inside = true;
                for i in (1..=k).filter(|&i| i != s) {
                    let (bit, idx) = v_member[i - 1][coordinate(p, i)];
                    if bit != schedule.phi_bit(t, i) {
                        inside = false;
                        break;
                    }
                    key.push(idx);
                }
                if inside {
                    key.extend(&w_key);
                    let j = (1 << k) * (s - 1) + t;
                    groups[j].entry((tail.clone(), key)).or_default().push(index);
                }
            }
        }
    }

    // Sum over coordinates of i * (largest claimed component mesh).
    let mut mesh = Rational::from_integer(0);
    for i in 1..=k + m {
        let mut bound = MeshBound::Bounded(int(0));
        for f in &cdw.v[i - 1] {
            bound = bound.max(f.mesh_bound);
        }
        if i <= k {
            for f in cdw.c[i - 1].iter().chain(&cdw.d[i - 1]) {
                bound = bound.max(f.mesh_bound);
            }
        }
        mesh += int(i as i64) * bound.value().expect("tree families are bounded");
    }

    let families = groups
        .into_iter()
        .enumerate()
        .map(|(j, g)| SubsetFamily::new(g.into_values().collect(), schedule.radii[j], MeshBound::Bounded(mesh)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RestrictedCover {
        witness: CoverWitness::new(families),
        cdw,
        padded,
    })
}

/// Convenience: the sample as a metric space for verification.
pub fn sample_space<'p, 'a>(product: &'p RestrictedProduct<'a>, points: &[RestrictedPoint]) -> Result<RestrictedSample<'p, 'a>> {
    RestrictedSample::new(product, points.to_vec())
}
