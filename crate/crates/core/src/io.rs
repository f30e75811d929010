//! JSON file formats for spaces, witnesses, chains, schedules, maps and reports.
//!
//! Every artifact written by this crate carries `"schema_version": 1` and a
//! `"kind"` tag. Rationals are JSON integers or `"p/q"` strings; point sets
//! are arrays of labels.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::doubling::UnionScale;
use crate::embed::DistortionEnvelope;
use crate::error::{Error, Result};
use crate::family::{normalize, CoverWitness, MeshBound, PointSet, SubsetFamily};
use crate::metric::{Edge, Metric, MetricSpace};
use crate::product::{sup_product, RestrictedPoint, RestrictedProduct};
use crate::rational::Rational;
use crate::report::VerificationReport;
use crate::restricted::{sample_space, TreeProductSchedule};
use crate::sfdc::{DecompositionChain, DecompositionStep};
use crate::tree::RootedTree;

pub const SCHEMA_VERSION: u32 = 1;

/// Largest number of points a composite space may expand to.
pub const DEFAULT_POINT_BUDGET: usize = 4096;

/// A rational inside JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Q(#[serde(with = "crate::rational")] pub Rational);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeFile {
    pub root: String,
    pub edges: Vec<(String, String)>,
}

impl TreeFile {
    pub fn from_tree(tree: &RootedTree) -> Self {
        Self {
            root: tree.label(tree.root()),
            edges: tree.edges(),
        }
    }

    pub fn to_tree(&self) -> Result<RootedTree> {
        RootedTree::from_edges(&self.root, &self.edges)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointFile {
    /// Coordinate (1-based) to factor label; absent coordinates sit at the base point.
    pub support: BTreeMap<usize, String>,
}

impl PointFile {
    pub fn from_point(product: &RestrictedProduct<'_>, point: &RestrictedPoint) -> Self {
        Self {
            support: point
                .support()
                .iter()
                .map(|(&c, &v)| (c, product.factor(c).label(v)))
                .collect(),
        }
    }

    pub fn to_point(&self, product: &RestrictedProduct<'_>) -> Result<RestrictedPoint> {
        let entries: Vec<(usize, &str)> = self.support.iter().map(|(&c, l)| (c, l.as_str())).collect();
        product.point_from_labels(&entries)
    }
}

/// Trees of a restricted product together with a finite sample of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedInstance {
    pub trees: Vec<TreeFile>,
    pub points: Vec<PointFile>,
}

impl RestrictedInstance {
    pub fn load(&self) -> Result<(Vec<RootedTree>, Vec<RestrictedPoint>)> {
        let trees: Vec<RootedTree> = self.trees.iter().map(TreeFile::to_tree).collect::<Result<_>>()?;
        let product = RestrictedProduct::of_trees(&trees);
        let points = self.points.iter().map(|p| p.to_point(&product)).collect::<Result<_>>()?;
        Ok((trees, points))
    }
}

/// Any space the command line accepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceFile {
    Tree(TreeFile),
    Graph {
        labels: Vec<String>,
        edges: Vec<(String, String, Q)>,
    },
    Matrix {
        labels: Vec<String>,
        dist: Vec<Vec<Q>>,
    },
    SupProduct {
        sup_product: Vec<SpaceFile>,
    },
    Restricted {
        restricted: RestrictedInstance,
    },
}

fn shape_error(what: &str, e: serde_json::Error) -> Error {
    Error::Parse(format!("{what}: {e}"))
}

impl SpaceFile {
    /// Dispatches on the keys present so errors name the intended format.
    pub fn from_value(value: Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("a space must be a JSON object".into()))?;
        if obj.contains_key("root") {
            return serde_json::from_value(value.clone()).map(SpaceFile::Tree).map_err(|e| shape_error("tree", e));
        }
        if obj.contains_key("sup_product") {
            let parts = obj["sup_product"]
                .as_array()
                .ok_or_else(|| Error::Parse("`sup_product` must be an array of spaces".into()))?;
            let parts = parts.iter().cloned().map(SpaceFile::from_value).collect::<Result<_>>()?;
            return Ok(SpaceFile::SupProduct { sup_product: parts });
        }
        if obj.contains_key("restricted") {
            let restricted = serde_json::from_value(obj["restricted"].clone()).map_err(|e| shape_error("restricted sample", e))?;
            return Ok(SpaceFile::Restricted { restricted });
        }
        if obj.contains_key("dist") {
            #[derive(Deserialize)]
            struct M {
                labels: Vec<String>,
                dist: Vec<Vec<Q>>,
            }
            let m: M = serde_json::from_value(value).map_err(|e| shape_error("distance matrix", e))?;
            return Ok(SpaceFile::Matrix {
                labels: m.labels,
                dist: m.dist,
            });
        }
        if obj.contains_key("edges") && obj.contains_key("labels") {
            #[derive(Deserialize)]
            struct G {
                labels: Vec<String>,
                edges: Vec<(String, String, Q)>,
            }
            let g: G = serde_json::from_value(value).map_err(|e| shape_error("weighted graph", e))?;
            return Ok(SpaceFile::Graph {
                labels: g.labels,
                edges: g.edges,
            });
        }
        Err(Error::Parse(
            "unrecognized space: expected `root`, `labels`+`edges`, `labels`+`dist`, `sup_product` or `restricted`".into(),
        ))
    }

    pub fn load(&self, budget: usize) -> Result<Space> {
        match self {
            SpaceFile::Tree(t) => Ok(Space::Tree(t.to_tree()?)),
            SpaceFile::Graph { labels, edges } => {
                let edges: Vec<Edge> = edges.iter().map(|(u, v, w)| Edge::new(u.as_str(), v.as_str(), w.0)).collect();
                Ok(Space::Plain(MetricSpace::from_graph(labels.clone(), &edges)?))
            }
            SpaceFile::Matrix { labels, dist } => {
                let rows = dist.iter().map(|r| r.iter().map(|q| q.0).collect()).collect();
                Ok(Space::Plain(MetricSpace::from_matrix(labels.clone(), rows)?))
            }
            SpaceFile::SupProduct { sup_product: parts } => {
                let loaded: Vec<Space> = parts.iter().map(|p| p.load(budget)).collect::<Result<_>>()?;
                let refs: Vec<&dyn Metric> = loaded.iter().map(|s| s as &dyn Metric).collect();
                Ok(Space::Plain(sup_product(&refs, budget)?))
            }
            SpaceFile::Restricted { restricted } => {
                if restricted.points.len() > budget {
                    return Err(Error::Budget(format!("{} sample points exceed the budget of {budget}", restricted.points.len())));
                }
                let (trees, points) = restricted.load()?;
                let product = RestrictedProduct::of_trees(&trees);
                let sample = sample_space(&product, &points)?;
                Ok(Space::Plain(MetricSpace::materialize(&sample)?))
            }
        }
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("space files serialize")
    }
}

/// A loaded space; trees keep their structure for tree-specific builders.
#[derive(Debug, Clone)]
pub enum Space {
    Plain(MetricSpace),
    Tree(RootedTree),
}

impl Space {
    pub fn as_tree(&self) -> Option<&RootedTree> {
        match self {
            Space::Tree(t) => Some(t),
            Space::Plain(_) => None,
        }
    }

    fn inner(&self) -> &dyn Metric {
        match self {
            Space::Plain(m) => m,
            Space::Tree(t) => t,
        }
    }
}

impl Metric for Space {
    fn len(&self) -> usize {
        self.inner().len()
    }

    fn dist(&self, i: usize, j: usize) -> Rational {
        self.inner().dist(i, j)
    }

    fn label(&self, i: usize) -> String {
        self.inner().label(i)
    }

    fn index_of(&self, label: &str) -> Option<usize> {
        self.inner().index_of(label)
    }
}

/// Label lookup built once per file.
pub struct Labels {
    index: HashMap<String, usize>,
    names: Vec<String>,
}

impl Labels {
    pub fn of<M: Metric + ?Sized>(space: &M) -> Self {
        let names: Vec<String> = (0..space.len()).map(|i| space.label(i)).collect();
        let index = names.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Self { index, names }
    }

    pub fn set(&self, labels: &[String]) -> Result<PointSet> {
        let ids = labels
            .iter()
            .map(|l| self.index.get(l).copied().ok_or_else(|| Error::UnknownLabel(l.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(normalize(ids))
    }

    pub fn names(&self, set: &[usize]) -> Vec<String> {
        set.iter().map(|&i| self.names[i].clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    /// `null` marks a family with no finite mesh claim.
    #[serde(with = "crate::rational::option")]
    pub mesh: Option<Rational>,
    pub sets: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub schema_version: u32,
    pub kind: String,
    #[serde(with = "crate::rational::vec")]
    pub schedule: Vec<Rational>,
    pub families: Vec<FamilyFile>,
    /// Points the witness claims to cover; absent means the whole space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<Value>,
}

pub const WITNESS_KIND: &str = "cover-witness";
pub const CHAIN_KIND: &str = "sfdc-chain";

impl WitnessFile {
    pub fn from_witness<M: Metric + ?Sized>(space: &M, witness: &CoverWitness, points: Option<&[usize]>, inline: Option<Value>) -> Self {
        let labels = Labels::of(space);
        Self {
            schema_version: SCHEMA_VERSION,
            kind: WITNESS_KIND.into(),
            schedule: witness.schedule(),
            families: witness
                .families
                .iter()
                .map(|f| FamilyFile {
                    mesh: f.mesh_bound.value(),
                    sets: f.sets().iter().map(|s| labels.names(s)).collect(),
                })
                .collect(),
            points: points.map(|p| labels.names(p)),
            space: inline,
        }
    }

    /// Resolves labels against `space`; empty members are rejected.
    pub fn to_witness<M: Metric + ?Sized>(&self, space: &M) -> Result<(CoverWitness, Option<PointSet>)> {
        if self.schedule.len() != self.families.len() {
            return Err(Error::Parse(format!(
                "{} schedule entries for {} families",
                self.schedule.len(),
                self.families.len()
            )));
        }
        let labels = Labels::of(space);
        let families = self
            .families
            .iter()
            .zip(&self.schedule)
            .map(|(f, &r)| {
                let sets = f.sets.iter().map(|s| labels.set(s)).collect::<Result<Vec<_>>>()?;
                let bound = f.mesh.map_or(MeshBound::Unbounded, MeshBound::Bounded);
                SubsetFamily::new(sets, r, bound)
            })
            .collect::<Result<Vec<_>>>()?;
        let points = self.points.as_ref().map(|p| labels.set(p)).transpose()?;
        Ok((CoverWitness::new(families), points))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessPairFile {
    pub u1: Vec<usize>,
    pub u2: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFile {
    pub separation: Q,
    pub target: Vec<Vec<String>>,
    pub witness: Vec<WitnessPairFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFile {
    pub schema_version: u32,
    pub kind: String,
    pub root: Vec<Vec<String>>,
    pub steps: Vec<StepFile>,
    pub terminal_mesh: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<Value>,
}

impl ChainFile {
    pub fn from_chain<M: Metric + ?Sized>(space: &M, chain: &DecompositionChain, inline: Option<Value>) -> Self {
        let labels = Labels::of(space);
        let names = |family: &[PointSet]| family.iter().map(|s| labels.names(s)).collect();
        Self {
            schema_version: SCHEMA_VERSION,
            kind: CHAIN_KIND.into(),
            root: names(&chain.root),
            steps: chain
                .steps
                .iter()
                .map(|s| StepFile {
                    separation: Q(s.separation),
                    target: names(&s.target),
                    witness: s
                        .witness
                        .iter()
                        .map(|(u1, u2)| WitnessPairFile {
                            u1: u1.clone(),
                            u2: u2.clone(),
                        })
                        .collect(),
                })
                .collect(),
            terminal_mesh: Q(chain.terminal_mesh),
            space: inline,
        }
    }

    pub fn to_chain<M: Metric + ?Sized>(&self, space: &M) -> Result<DecompositionChain> {
        let labels = Labels::of(space);
        let sets = |family: &[Vec<String>]| family.iter().map(|s| labels.set(s)).collect::<Result<Vec<_>>>();
        let steps = self
            .steps
            .iter()
            .map(|s| {
                Ok(DecompositionStep {
                    separation: s.separation.0,
                    target: sets(&s.target)?,
                    witness: s.witness.iter().map(|w| (w.u1.clone(), w.u2.clone())).collect(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(DecompositionChain {
            root: sets(&self.root)?,
            steps,
            terminal_mesh: self.terminal_mesh.0,
        })
    }
}

/// Radii and parameters for the restricted tree product cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedScheduleFile {
    #[serde(rename = "R", with = "crate::rational::vec")]
    pub radii: Vec<Rational>,
    pub k: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<usize>>,
}

impl RestrictedScheduleFile {
    pub fn to_schedule(&self) -> Result<TreeProductSchedule> {
        TreeProductSchedule::new(self.radii.clone(), self.k, self.m, self.psi.clone(), self.phi.clone())
    }
}

/// A map between finite spaces as an explicit list of `(x, f(x))` label pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapFile {
    pub pairs: Vec<(String, String)>,
}

impl MapFile {
    /// `image[i] = f(i)`; the map must be total and single-valued.
    pub fn to_image<X: Metric + ?Sized, Y: Metric + ?Sized>(&self, x: &X, y: &Y) -> Result<Vec<usize>> {
        let (lx, ly) = (Labels::of(x), Labels::of(y));
        let mut image: Vec<Option<usize>> = vec![None; x.len()];
        for (a, b) in &self.pairs {
            let i = lx.set(std::slice::from_ref(a))?[0];
            let j = ly.set(std::slice::from_ref(b))?[0];
            if image[i].is_some_and(|k| k != j) {
                return Err(Error::Parse(format!("`{a}` is mapped twice")));
            }
            image[i] = Some(j);
        }
        image
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::Parse(format!("map is undefined at `{}`", x.label(i)))))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFile {
    pub schema_version: u32,
    pub kind: String,
    #[serde(flatten)]
    pub envelope: DistortionEnvelope,
}

#[derive(Serialize)]
pub struct ReportFile<'a> {
    pub schema_version: u32,
    pub kind: &'static str,
    pub subject: &'a str,
    #[serde(flatten)]
    pub report: &'a VerificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unions: Option<&'a [UnionScale]>,
}

impl<'a> ReportFile<'a> {
    pub fn new(subject: &'a str, report: &'a VerificationReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: "verification-report",
            subject,
            report,
            unions: None,
        }
    }
}

pub fn read_value(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_value(read_value(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}
