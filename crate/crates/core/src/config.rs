//! Scenario documents: a graph of groups, named groups and subgroups,
//! budgets and an experiment list. The on-disk format is TOML; see
//! `docs/scenario-format.md`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::GroupLike;
use crate::error::{Error, Result};
use crate::gog::{Edge, GraphOfGroups, Vertex};
use crate::groups::{Group, GroupDef, GroupKind, DEFAULT_BUDGET};
use crate::rd::GStrategy;
use crate::subgroup::{Membership, OracleSpec, SubgroupOracle};

fn default_radius() -> usize {
    4
}

fn default_samples() -> usize {
    200
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    /// Default scale for every experiment that does not set its own `radius`.
    #[serde(default = "default_radius")]
    pub radius: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Cap on enumerated elements per ball or breadth-first search.
    #[serde(default = "default_budget")]
    pub budget_elements: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { radius: default_radius(), samples: default_samples(), seed: 0, budget_elements: default_budget() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDef {
    pub name: String,
    pub group: GroupDef,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDef {
    pub name: String,
    pub from: String,
    pub to: String,
    pub group: GroupDef,
    /// Images of the edge-group basis in the `to` group.
    pub iota: Vec<String>,
    /// Images of the edge-group basis in the `from` group.
    pub iota_bar: Vec<String>,
    pub oracle: OracleSpec,
    pub oracle_bar: OracleSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgroupDef {
    /// A name from `[groups]` or a vertex name.
    pub group: String,
    pub domain: GroupDef,
    pub images: Vec<String>,
    pub oracle: OracleSpec,
}

fn is_true(b: &bool) -> bool {
    *b
}

fn yes() -> bool {
    true
}

/// One experiment. `radius` is the experiment's main scale and falls back to
/// `budgets.radius`; its meaning per kind is listed in the format notes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    /// Exact Disto curve from ambient balls up to `radius`.
    Disto {
        subgroup: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<usize>,
    },
    /// Witness Disto curve from `template` with `{k}` and `{-k}` for `k <= radius`.
    DistoWitness {
        subgroup: String,
        template: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<usize>,
    },
    /// Witness Disto curve in the fundamental group: `W^k core W^-k` for
    /// `k <= radius`, with `W` and `core` loops at the base vertex and the
    /// subgroup living in the base vertex group.
    Pi1Disto {
        subgroup: String,
        conjugator: String,
        core: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<usize>,
    },
    /// `L_G` of loops at the base vertex, by breadth-first search up to `radius`.
    Pi1Length {
        elements: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<usize>,
    },
    /// Checks `L_Gamma(template) = L_Gamma(reference) / divisor + offset` and
    /// that both loops agree in the fundamental group, for `n_min <= n <= radius`.
    /// Placeholders: `{p}` is `2^n`, `{q}` is `2^(n-2)`.
    LengthIdentity {
        template: String,
        reference: String,
        n_min: u32,
        divisor: usize,
        offset: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<u32>,
    },
    /// Seemingly distortion ratios over reduced edge paths of length `<= radius`.
    Seemingly {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edge_radius: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<usize>,
    },
    /// Tight-dynamics scan on an edge; `radius` bounds the closest-point search.
    Tight {
        edge: String,
        #[serde(default = "yes", skip_serializing_if = "is_true")]
        forward: bool,
        k_max: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<usize>,
    },
    /// Linear separation of named subgroups of one group, over ball radius `radius`.
    Separation {
        subgroups: Vec<String>,
        us: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<usize>,
    },
    /// Sampled convolution ratios for `1 <= r <= radius`.
    Rd {
        group: String,
        strategy: GStrategy,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<usize>,
    },
    /// Amenable lower bounds at `R = factor * r` for `1 <= r <= radius`.
    Amenable {
        group: String,
        factor: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<usize>,
    },
    /// Dynamics of a hyperbolic matrix on Z^2; `radius` is the largest power `n`.
    Anosov {
        matrix: [[i64; 2]; 2],
        gammas: Vec<[i64; 2]>,
        eta: [i64; 2],
        j_range: i64,
        box_bound: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<usize>,
    },
    /// Norm pairs for random functions supported in `B_{L_G}(radius)`.
    Magic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<usize>,
    },
    /// Lift of ball indicators and the lift-length curve up to `radius`.
    Hat {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<usize>,
    },
    /// Local Bass-Serre tree fragment of depth `radius`.
    LocalTree {
        rep_cutoff: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<usize>,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Disto { .. } => "disto",
            Experiment::DistoWitness { .. } => "disto_witness",
            Experiment::Pi1Disto { .. } => "pi1_disto",
            Experiment::Pi1Length { .. } => "pi1_length",
            Experiment::LengthIdentity { .. } => "length_identity",
            Experiment::Seemingly { .. } => "seemingly",
            Experiment::Tight { .. } => "tight",
            Experiment::Separation { .. } => "separation",
            Experiment::Rd { .. } => "rd",
            Experiment::Amenable { .. } => "amenable",
            Experiment::Anosov { .. } => "anosov",
            Experiment::Magic { .. } => "magic",
            Experiment::Hat { .. } => "hat",
            Experiment::LocalTree { .. } => "local_tree",
        }
    }

    /// Whether the experiment needs the graph of groups.
    pub fn needs_graph(&self) -> bool {
        matches!(
            self,
            Experiment::Pi1Disto { .. }
                | Experiment::Pi1Length { .. }
                | Experiment::LengthIdentity { .. }
                | Experiment::Seemingly { .. }
                | Experiment::Tight { .. }
                | Experiment::Magic { .. }
                | Experiment::Hat { .. }
                | Experiment::LocalTree { .. }
        )
    }

    pub fn radius(&self, budgets: &Budgets) -> usize {
        let r = match self {
            Experiment::LengthIdentity { radius, .. } => radius.map(|r| r as usize),
            Experiment::Disto { radius, .. }
            | Experiment::DistoWitness { radius, .. }
            | Experiment::Pi1Disto { radius, .. }
            | Experiment::Pi1Length { radius, .. }
            | Experiment::Seemingly { radius, .. }
            | Experiment::Tight { radius, .. }
            | Experiment::Separation { radius, .. }
            | Experiment::Rd { radius, .. }
            | Experiment::Amenable { radius, .. }
            | Experiment::Anosov { radius, .. }
            | Experiment::Magic { radius, .. }
            | Experiment::Hat { radius, .. }
            | Experiment::LocalTree { radius, .. } => *radius,
        };
        r.unwrap_or(budgets.radius)
    }

    pub fn set_radius(&mut self, r: usize) {
        match self {
            Experiment::LengthIdentity { radius, .. } => *radius = Some(r as u32),
            Experiment::Disto { radius, .. }
            | Experiment::DistoWitness { radius, .. }
            | Experiment::Pi1Disto { radius, .. }
            | Experiment::Pi1Length { radius, .. }
            | Experiment::Seemingly { radius, .. }
            | Experiment::Tight { radius, .. }
            | Experiment::Separation { radius, .. }
            | Experiment::Rd { radius, .. }
            | Experiment::Amenable { radius, .. }
            | Experiment::Anosov { radius, .. }
            | Experiment::Magic { radius, .. }
            | Experiment::Hat { radius, .. }
            | Experiment::LocalTree { radius, .. } => *radius = Some(r),
        }
    }

    pub fn samples(&self, budgets: &Budgets) -> usize {
        let s = match self {
            Experiment::Seemingly { samples, .. }
            | Experiment::Tight { samples, .. }
            | Experiment::Rd { samples, .. }
            | Experiment::Anosov { samples, .. }
            | Experiment::Magic { samples, .. } => *samples,
            _ => None,
        };
        s.unwrap_or(budgets.samples)
    }

    pub fn set_samples(&mut self, n: usize) {
        match self {
            Experiment::Seemingly { samples, .. }
            | Experiment::Tight { samples, .. }
            | Experiment::Rd { samples, .. }
            | Experiment::Anosov { samples, .. }
            | Experiment::Magic { samples, .. } => *samples = Some(n),
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    pub description: String,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertices: Vec<VertexDef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeDef>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub groups: BTreeMap<String, GroupDef>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub subgroups: BTreeMap<String, SubgroupDef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub experiments: Vec<Experiment>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn has_graph(&self) -> bool {
        !self.vertices.is_empty()
    }

    /// A group from `[groups]` or a vertex group, with the scenario budget.
    pub fn group(&self, name: &str) -> Result<Group> {
        let def = self
            .groups
            .get(name)
            .or_else(|| self.vertices.iter().find(|v| v.name == name).map(|v| &v.group))
            .ok_or_else(|| Error::ConfigParse(format!("unknown group {name:?}")))?;
        Group::build_with_budget(def.clone(), self.budgets.budget_elements)
    }

    pub fn subgroup(&self, name: &str) -> Result<SubgroupOracle> {
        let def = self.subgroups.get(name).ok_or_else(|| Error::ConfigParse(format!("unknown subgroup {name:?}")))?;
        self.subgroup_in(def, &self.group(&def.group)?)
    }

    /// Builds a subgroup definition against an already built ambient group.
    pub fn subgroup_in(&self, def: &SubgroupDef, ambient: &Group) -> Result<SubgroupOracle> {
        let domain = Group::build(def.domain.clone())?;
        let images = def.images.iter().map(|w| ambient.parse(w)).collect::<Result<Vec<_>>>()?;
        SubgroupOracle::new(ambient, &domain, images, &def.oracle)
    }

    /// Builds the graph of groups, failing on the first diagnostic.
    pub fn build_graph(&self) -> Result<GraphOfGroups> {
        let (graph, diagnostics) = self.build_graph_checked();
        match diagnostics.into_iter().next() {
            Some(e) => Err(e),
            None => graph.ok_or_else(|| Error::GraphIllFormed("no vertices".into())),
        }
    }

    /// Every diagnostic of the configuration; empty when it is sound.
    pub fn validate(&self) -> Vec<Error> {
        let mut out = self.build_graph_checked().1;
        for (name, def) in &self.groups {
            if let Err(e) = Group::build(def.clone()) {
                out.push(Error::ConfigParse(format!("group {name}: {e}")));
            }
        }
        for (name, def) in &self.subgroups {
            if let Err(e) = self.subgroup(name) {
                out.push(Error::ConfigParse(format!("subgroup {name}: {e}")));
                continue;
            }
            if let Some(gens) = &def.oracle.generators {
                if let Ok(amb) = self.group(&def.group) {
                    if let Some(e) = oracle_generator_mismatch(&amb, name, gens, &def.images) {
                        out.push(e);
                    }
                }
            }
        }
        if !self.has_graph() && self.experiments.iter().any(|e| e.needs_graph()) {
            out.push(Error::GraphIllFormed("experiment needs a graph of groups but no vertices are declared".into()));
        }
        out
    }

    fn build_graph_checked(&self) -> (Option<GraphOfGroups>, Vec<Error>) {
        let mut diags = Vec::new();
        if !self.has_graph() {
            if !self.edges.is_empty() {
                diags.push(Error::GraphIllFormed("edges declared without vertices".into()));
            }
            return (None, diags);
        }
        let mut vertices = Vec::new();
        for v in &self.vertices {
            if vertices.iter().any(|w: &Vertex| w.name == v.name) {
                diags.push(Error::GraphIllFormed(format!("duplicate vertex {}", v.name)));
                continue;
            }
            match Group::build_with_budget(v.group.clone(), self.budgets.budget_elements) {
                Ok(group) => vertices.push(Vertex { name: v.name.clone(), group }),
                Err(e) => diags.push(Error::GraphIllFormed(format!("vertex {}: {e}", v.name))),
            }
        }
        if !diags.is_empty() {
            return (None, diags);
        }
        let mut edges = Vec::new();
        for e in &self.edges {
            match self.build_edge(e, &vertices) {
                Ok(edge) => edges.push(edge),
                Err(errs) => diags.extend(errs),
            }
        }
        if !diags.is_empty() {
            return (None, diags);
        }
        match GraphOfGroups::new(self.id.clone(), vertices, edges) {
            Ok(mut g) => {
                g.state_budget = self.budgets.budget_elements;
                (Some(g), diags)
            }
            Err(e) => (None, vec![e]),
        }
    }

    fn build_edge(&self, e: &EdgeDef, vertices: &[Vertex]) -> std::result::Result<Edge, Vec<Error>> {
        let ill = |s: String| vec![Error::GraphIllFormed(format!("edge {}: {s}", e.name))];
        let find = |n: &str| vertices.iter().position(|v| v.name == n);
        let (Some(from), Some(to)) = (find(&e.from), find(&e.to)) else {
            return Err(ill(format!("unknown endpoint in {} -> {}", e.from, e.to)));
        };
        let group = Group::build(e.group.clone()).map_err(|x| ill(x.to_string()))?;
        let rank = match group.kind() {
            GroupKind::Free { rank } | GroupKind::FreeAbelian { rank } => *rank,
            _ => return Err(ill("edge groups must be free or free abelian".into())),
        };
        let mut diags = Vec::new();
        let mut side = |words: &[String], spec: &OracleSpec, v: usize, label: &str| -> Option<SubgroupOracle> {
            let ambient = &vertices[v].group;
            if words.len() != rank {
                diags.push(Error::GraphIllFormed(format!("edge {label}: {} images for a rank {rank} edge group", words.len())));
                return None;
            }
            let images = match words.iter().map(|w| ambient.parse(w)).collect::<Result<Vec<_>>>() {
                Ok(i) => i,
                Err(x) => {
                    diags.push(Error::GraphIllFormed(format!(
                        "edge {label}: images do not live in the {} group ({x})",
                        vertices[v].name
                    )));
                    return None;
                }
            };
            if let GroupKind::FreeAbelian { .. } = group.kind() {
                for i in 0..images.len() {
                    for j in i + 1..images.len() {
                        let (a, b) = (&images[i], &images[j]);
                        if ambient.mul(a, b) != ambient.mul(b, a) {
                            diags.push(Error::GraphIllFormed(format!(
                                "edge {label}: images {} and {} do not commute",
                                words[i], words[j]
                            )));
                        }
                    }
                }
            }
            if let Some(gens) = &spec.generators {
                if let Some(err) = oracle_generator_mismatch(ambient, label, gens, words) {
                    diags.push(err);
                    return None;
                }
            }
            let oracle = match SubgroupOracle::new(ambient, &group, images.clone(), spec) {
                Ok(o) => o,
                Err(x) => {
                    diags.push(Error::GraphIllFormed(format!("edge {label}: {x}")));
                    return None;
                }
            };
            for (w, g) in words.iter().zip(&images) {
                if !matches!(oracle.contains(g), Ok(Membership::In)) {
                    diags.push(Error::EmbeddingOracleMismatch { edge: label.to_string(), image: w.clone() });
                }
            }
            if oracle.injective() == Some(false) {
                diags.push(Error::GraphIllFormed(format!("edge {label}: images do not form a basis, the map is not injective")));
            }
            Some(oracle)
        };
        let iota = side(&e.iota, &e.oracle, to, &e.name);
        let iota_bar = side(&e.iota_bar, &e.oracle_bar, from, &format!("{}bar", e.name));
        match (iota, iota_bar) {
            (Some(iota), Some(iota_bar)) if diags.is_empty() => {
                Ok(Edge { name: e.name.clone(), from, to, group, iota, iota_bar })
            }
            _ => Err(diags),
        }
    }
}

/// Declared oracle generators must be the embedding images, in order.
fn oracle_generator_mismatch(ambient: &Group, label: &str, gens: &[String], images: &[String]) -> Option<Error> {
    for (i, w) in images.iter().enumerate() {
        let declared = gens.get(i).and_then(|g| ambient.parse(g).ok());
        let image = ambient.parse(w).ok();
        if declared.is_none() || declared != image {
            return Some(Error::EmbeddingOracleMismatch { edge: label.to_string(), image: w.clone() });
        }
    }
    if gens.len() != images.len() {
        return Some(Error::EmbeddingOracleMismatch { edge: label.to_string(), image: gens[images.len()..].join(", ") });
    }
    None
}
