//! Constraint-graph substructure patterns and structural feature extraction.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::molgraph::{aromatize, BondOrder, BondStereo, Element, MoleculeGraph};

const BUILTIN: &str = include_str!("../../data/features.txt");

pub const AROMATIC_RING: &str = "aromatic_ring";
pub const ALIPHATIC_RING: &str = "aliphatic_ring";
pub const FUSED_RING_SYSTEM: &str = "fused_ring_system";
pub const STEREOCENTER: &str = "stereocenter";
pub const DOUBLE_BOND_STEREO: &str = "double_bond_stereo";

/// Feature names derived from rings and stereo tags rather than patterns.
pub const SYNTHETIC_FEATURES: [(&str, Category); 5] = [
    (AROMATIC_RING, Category::RingSystem),
    (ALIPHATIC_RING, Category::RingSystem),
    (FUSED_RING_SYSTEM, Category::RingSystem),
    (STEREOCENTER, Category::Stereo),
    (DOUBLE_BOND_STEREO, Category::Stereo),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    FunctionalGroup,
    RingSystem,
    Stereo,
}

impl Category {
    fn parse(s: &str) -> Option<Category> {
        match s {
            "functional_group" => Some(Category::FunctionalGroup),
            "ring_system" => Some(Category::RingSystem),
            "stereo" => Some(Category::Stereo),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AtomPattern {
    /// Allowed elements; empty means any.
    pub elements: Vec<Element>,
    pub aromatic: Option<bool>,
    pub charge: Option<i8>,
    pub min_degree: Option<usize>,
    pub max_degree: Option<usize>,
    pub min_h: Option<u32>,
    pub max_h: Option<u32>,
    pub in_ring: Option<bool>,
}

impl AtomPattern {
    pub fn matches(&self, g: &MoleculeGraph, atom: usize) -> bool {
        let a = g.atom(atom);
        if !self.elements.is_empty() && !self.elements.contains(&a.element) {
            return false;
        }
        if self.aromatic.is_some_and(|ar| ar != a.aromatic) {
            return false;
        }
        if self.charge.is_some_and(|q| q != a.formal_charge) {
            return false;
        }
        let deg = g.heavy_degree(atom);
        if self.min_degree.is_some_and(|d| deg < d) || self.max_degree.is_some_and(|d| deg > d) {
            return false;
        }
        let h = g.total_hydrogens(atom);
        if self.min_h.is_some_and(|m| h < m) || self.max_h.is_some_and(|m| h > m) {
            return false;
        }
        if self.in_ring.is_some_and(|r| r != g.is_ring_atom(atom)) {
            return false;
        }
        true
    }

    fn has_constraint(&self) -> bool {
        *self != AtomPattern::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondConstraint {
    Order(BondOrder),
    Any,
}

impl BondConstraint {
    fn accepts(self, order: BondOrder) -> bool {
        match self {
            BondConstraint::Any => true,
            BondConstraint::Order(o) => o == order,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubstructurePattern {
    pub name: String,
    pub category: Category,
    pub nodes: Vec<AtomPattern>,
    pub edges: Vec<(usize, usize, BondConstraint)>,
    pub core: Vec<usize>,
    pub suppresses: Vec<String>,
    pub exemplar: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("feature library line {line}: {message}")]
pub struct PatternError {
    pub line: usize,
    pub message: String,
}

/// An injective map from pattern node index to graph atom index.
pub type Mapping = Vec<usize>;

impl SubstructurePattern {
    /// All mappings that satisfy every node and edge constraint, without
    /// deduplication.
    pub fn all_mappings(&self, g: &MoleculeGraph) -> Vec<Mapping> {
        let n = self.nodes.len();
        if n == 0 || n > g.atom_count() {
            return Vec::new();
        }
        let order = self.search_order();
        let mut adj: Vec<Vec<(usize, BondConstraint)>> = vec![Vec::new(); n];
        for &(i, j, c) in &self.edges {
            adj[i].push((j, c));
            adj[j].push((i, c));
        }
        let mut out = Vec::new();
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; g.atom_count()];
        self.extend(g, &adj, &order, 0, &mut map, &mut used, &mut out);
        out
    }

    /// Mappings deduplicated by the set of atoms they cover, in ascending
    /// order of that set.
    pub fn find_matches(&self, g: &MoleculeGraph) -> Vec<Mapping> {
        let mut seen: BTreeMap<Vec<usize>, Mapping> = BTreeMap::new();
        for m in self.all_mappings(g) {
            let mut key = m.clone();
            key.sort_unstable();
            seen.entry(key).or_insert(m);
        }
        seen.into_values().collect()
    }

    /// Independent re-check of a mapping against every constraint.
    pub fn satisfied_by(&self, g: &MoleculeGraph, m: &[usize]) -> bool {
        if m.len() != self.nodes.len() {
            return false;
        }
        let distinct: HashSet<usize> = m.iter().copied().collect();
        if distinct.len() != m.len() || m.iter().any(|&a| a >= g.atom_count()) {
            return false;
        }
        self.nodes.iter().zip(m).all(|(p, &a)| p.matches(g, a))
            && self.edges.iter().all(|&(i, j, c)| {
                g.bond_between(m[i], m[j])
                    .is_some_and(|b| c.accepts(b.order))
            })
    }

    fn search_order(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut order = vec![0];
        let mut placed = vec![false; n];
        placed[0] = true;
        let mut head = 0;
        while order.len() < n {
            if head == order.len() {
                // disconnected pattern node; validated against at load time
                let next = (0..n).find(|&i| !placed[i]).unwrap();
                placed[next] = true;
                order.push(next);
                continue;
            }
            let u = order[head];
            head += 1;
            for &(i, j, _) in &self.edges {
                let v = if i == u {
                    j
                } else if j == u {
                    i
                } else {
                    continue;
                };
                if !placed[v] {
                    placed[v] = true;
                    order.push(v);
                }
            }
        }
        order
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        g: &MoleculeGraph,
        adj: &[Vec<(usize, BondConstraint)>],
        order: &[usize],
        depth: usize,
        map: &mut [usize],
        used: &mut [bool],
        out: &mut Vec<Mapping>,
    ) {
        if depth == order.len() {
            out.push(map.to_vec());
            return;
        }
        let p = order[depth];
        let anchor = adj[p].iter().find(|&&(q, _)| map[q] != usize::MAX);
        let candidates: Vec<usize> = match anchor {
            Some(&(q, _)) => g.neighbors(map[q]).iter().map(|&(v, _)| v).collect(),
            None => (0..g.atom_count()).collect(),
        };
        for a in candidates {
            if used[a] || !self.nodes[p].matches(g, a) {
                continue;
            }
            let bonds_ok = adj[p].iter().all(|&(q, c)| {
                map[q] == usize::MAX
                    || g.bond_between(a, map[q]).is_some_and(|b| c.accepts(b.order))
            });
            if !bonds_ok {
                continue;
            }
            map[p] = a;
            used[a] = true;
            self.extend(g, adj, order, depth + 1, map, used, out);
            map[p] = usize::MAX;
            used[a] = false;
        }
    }
}

/// The set of feature types present in a molecule or mentioned in text,
/// with occurrence counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FeatureSet {
    counts: BTreeMap<String, usize>,
}

impl FeatureSet {
    pub fn new() -> FeatureSet {
        FeatureSet::default()
    }

    /// Add `count` occurrences; a zero count is ignored.
    pub fn add(&mut self, name: &str, count: usize) {
        if count > 0 {
            *self.counts.entry(name.to_string()).or_default() += count;
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.counts.contains_key(name)
    }

    pub fn count(&self, name: &str) -> usize {
        self.counts.get(name).copied().unwrap_or(0)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &BTreeMap<String, usize> {
        &self.counts
    }
}

impl<S: AsRef<str>> FromIterator<S> for FeatureSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut f = FeatureSet::new();
        for s in iter {
            f.add(s.as_ref(), 1);
        }
        f
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .counts
            .iter()
            .map(|(k, v)| format!("{k}:{v}"))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Debug, Clone)]
pub struct Library {
    patterns: Vec<SubstructurePattern>,
}

impl Library {
    pub fn parse(text: &str) -> Result<Library, PatternError> {
        let mut patterns: Vec<SubstructurePattern> = Vec::new();
        let mut names = HashSet::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let p = parse_record(line).map_err(|message| PatternError { line: k + 1, message })?;
            if !names.insert(p.name.clone()) {
                return Err(PatternError {
                    line: k + 1,
                    message: format!("duplicate pattern name {}", p.name),
                });
            }
            patterns.push(p);
        }
        if patterns.is_empty() {
            return Err(PatternError {
                line: 0,
                message: "library has no patterns".into(),
            });
        }
        for p in &patterns {
            for s in &p.suppresses {
                if !names.contains(s) {
                    return Err(PatternError {
                        line: 0,
                        message: format!("{} suppresses unknown pattern {s}", p.name),
                    });
                }
            }
        }
        Ok(Library { patterns })
    }

    pub fn from_file(path: &Path) -> Result<Library, PatternError> {
        let text = std::fs::read_to_string(path).map_err(|e| PatternError {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        Library::parse(&text)
    }

    pub fn patterns(&self) -> &[SubstructurePattern] {
        &self.patterns
    }

    pub fn get(&self, name: &str) -> Option<&SubstructurePattern> {
        self.patterns.iter().find(|p| p.name == name)
    }

    /// Every feature name this library can report, including the synthetic
    /// ring and stereo features.
    pub fn feature_names(&self) -> BTreeSet<String> {
        self.patterns
            .iter()
            .map(|p| p.name.clone())
            .chain(SYNTHETIC_FEATURES.iter().map(|(n, _)| n.to_string()))
            .collect()
    }
}

/// The shipped feature library.
pub fn builtin_library() -> Library {
    Library::parse(BUILTIN).expect("shipped feature library is valid")
}

/// Raw text of the shipped library, for `config dump` and overrides.
pub fn builtin_library_text() -> &'static str {
    BUILTIN
}

fn parse_record(line: &str) -> Result<SubstructurePattern, String> {
    let fields: Vec<&str> = line.split('|').map(str::trim).collect();
    if fields.len() < 4 {
        return Err("expected name | category | nodes | edges".into());
    }
    let name = fields[0];
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("bad pattern name {name:?}"));
    }
    let category = Category::parse(fields[1]).ok_or_else(|| format!("unknown category {:?}", fields[1]))?;
    let nodes = fields[2]
        .split_whitespace()
        .map(parse_node)
        .collect::<Result<Vec<_>, _>>()?;
    if nodes.is_empty() {
        return Err("pattern has no nodes".into());
    }
    let mut edges = Vec::new();
    let mut pairs = HashSet::new();
    for tok in fields[3].split_whitespace() {
        let e = parse_edge(tok)?;
        if e.0 >= nodes.len() || e.1 >= nodes.len() || e.0 == e.1 {
            return Err(format!("edge {tok} out of range"));
        }
        if !pairs.insert((e.0.min(e.1), e.0.max(e.1))) {
            return Err(format!("duplicate edge {tok}"));
        }
        edges.push(e);
    }
    let mut p = SubstructurePattern {
        name: name.to_string(),
        category,
        core: (0..nodes.len()).collect(),
        nodes,
        edges,
        suppresses: Vec::new(),
        exemplar: None,
    };
    for extra in &fields[4..] {
        let (key, value) = extra
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {extra:?}"))?;
        match key.trim() {
            "core" => {
                p.core = value
                    .split(',')
                    .map(|s| s.trim().parse::<usize>().map_err(|_| format!("bad core index {s:?}")))
                    .collect::<Result<_, _>>()?;
                if p.core.is_empty() || p.core.iter().any(|&c| c >= p.nodes.len()) {
                    return Err("core index out of range".into());
                }
            }
            "suppresses" => {
                p.suppresses = value.split(',').map(|s| s.trim().to_string()).collect();
            }
            "exemplar" => p.exemplar = Some(value.trim().to_string()),
            other => return Err(format!("unknown key {other:?}")),
        }
    }
    if !is_connected(p.nodes.len(), &p.edges) {
        return Err("pattern graph is not connected".into());
    }
    Ok(p)
}

fn is_connected(n: usize, edges: &[(usize, usize, BondConstraint)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &(i, j, _) in edges {
            for (x, y) in [(i, j), (j, i)] {
                if x == u && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn parse_node(tok: &str) -> Result<AtomPattern, String> {
    let body = tok
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| format!("node {tok:?} must be bracketed"))?;
    let mut parts = body.split(';');
    let mut p = AtomPattern::default();
    let head = parts.next().unwrap_or("");
    if head != "*" {
        for sym in head.split(',') {
            let e = Element::from_symbol(sym).ok_or_else(|| format!("unknown element {sym:?}"))?;
            p.elements.push(e);
        }
    }
    for c in parts {
        let num = |s: &str| s.parse::<i64>().map_err(|_| format!("bad number in {c:?}"));
        match c {
            "a" => p.aromatic = Some(true),
            "A" => p.aromatic = Some(false),
            "ring" => p.in_ring = Some(true),
            "!ring" => p.in_ring = Some(false),
            _ => {
                let (key, op, value) = split_comparison(c).ok_or_else(|| format!("bad constraint {c:?}"))?;
                let v = num(value)?;
                match (key, op) {
                    ("q", "=") => p.charge = Some(v as i8),
                    ("h", "=") => {
                        p.min_h = Some(v as u32);
                        p.max_h = Some(v as u32);
                    }
                    ("h", ">=") => p.min_h = Some(v as u32),
                    ("h", "<=") => p.max_h = Some(v as u32),
                    ("deg", "=") => {
                        p.min_degree = Some(v as usize);
                        p.max_degree = Some(v as usize);
                    }
                    ("deg", ">=") => p.min_degree = Some(v as usize),
                    ("deg", "<=") => p.max_degree = Some(v as usize),
                    _ => return Err(format!("bad constraint {c:?}")),
                }
                if v < 0 && key != "q" {
                    return Err(format!("negative count in {c:?}"));
                }
            }
        }
    }
    if !p.has_constraint() {
        return Err(format!("node {tok:?} has no constraint"));
    }
    Ok(p)
}

fn split_comparison(c: &str) -> Option<(&str, &str, &str)> {
    for op in [">=", "<=", "="] {
        if let Some((k, v)) = c.split_once(op) {
            return Some((k, op, v.trim_start_matches('+')));
        }
    }
    None
}

fn parse_edge(tok: &str) -> Result<(usize, usize, BondConstraint), String> {
    let bad = || format!("bad edge {tok:?}");
    let (ends, order) = tok.split_once(':').ok_or_else(bad)?;
    let (i, j) = ends.split_once('-').ok_or_else(bad)?;
    let i = i.parse().map_err(|_| bad())?;
    let j = j.parse().map_err(|_| bad())?;
    let c = match order {
        "1" => BondConstraint::Order(BondOrder::Single),
        "2" => BondConstraint::Order(BondOrder::Double),
        "3" => BondConstraint::Order(BondOrder::Triple),
        "a" => BondConstraint::Order(BondOrder::Aromatic),
        "~" => BondConstraint::Any,
        _ => return Err(bad()),
    };
    Ok((i, j, c))
}

/// Pattern matches with precedence applied: a match of pattern P is hidden
/// when some match of a pattern that suppresses P covers all of P's core
/// atoms. Returned per pattern name in library order.
pub fn resolved_matches(g: &MoleculeGraph, library: &Library) -> Vec<(String, Vec<Mapping>)> {
    let raw: Vec<Vec<Mapping>> = library.patterns.iter().map(|p| p.find_matches(g)).collect();
    let covers: Vec<Vec<BTreeSet<usize>>> = raw
        .iter()
        .map(|ms| ms.iter().map(|m| m.iter().copied().collect()).collect())
        .collect();
    library
        .patterns
        .iter()
        .enumerate()
        .map(|(pi, p)| {
            let suppressors: Vec<usize> = library
                .patterns
                .iter()
                .enumerate()
                .filter(|(_, q)| q.suppresses.contains(&p.name))
                .map(|(qi, _)| qi)
                .collect();
            let kept = raw[pi]
                .iter()
                .filter(|m| {
                    let core: Vec<usize> = p.core.iter().map(|&c| m[c]).collect();
                    !suppressors.iter().any(|&qi| {
                        covers[qi]
                            .iter()
                            .any(|cover| core.iter().all(|a| cover.contains(a)))
                    })
                })
                .cloned()
                .collect();
            (p.name.clone(), kept)
        })
        .collect()
}

/// S_actual: functional groups after precedence, plus ring and stereo
/// features. Kekulé-written aromatic rings are normalised before matching.
pub fn extract_features(g: &MoleculeGraph, library: &Library) -> FeatureSet {
    let g = &*aromatize(g);
    let mut fs = FeatureSet::new();
    for (name, ms) in resolved_matches(g, library) {
        fs.add(&name, ms.len());
    }
    let rings = g.rings();
    let aromatic = rings
        .iter()
        .filter(|r| r.iter().all(|&a| g.atom(a).aromatic))
        .count();
    fs.add(AROMATIC_RING, aromatic);
    fs.add(ALIPHATIC_RING, rings.len() - aromatic);
    let sets: Vec<HashSet<usize>> = rings.iter().map(|r| r.iter().copied().collect()).collect();
    let mut fused = 0;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if sets[i].intersection(&sets[j]).count() >= 2 {
                fused += 1;
            }
        }
    }
    fs.add(FUSED_RING_SYSTEM, fused);
    fs.add(
        STEREOCENTER,
        g.atoms().iter().filter(|a| a.chirality.is_set()).count(),
    );
    fs.add(
        DOUBLE_BOND_STEREO,
        g.bonds().iter().filter(|b| b.stereo != BondStereo::None).count(),
    );
    fs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn lib() -> Library {
        builtin_library()
    }

    fn features(s: &str) -> Vec<String> {
        extract_features(&parse_smiles(s).unwrap(), &lib())
            .names()
            .map(str::to_string)
            .collect()
    }

    fn count(pattern: &str, s: &str) -> usize {
        lib().get(pattern).unwrap().find_matches(&parse_smiles(s).unwrap()).len()
    }

    #[test]
    fn library_shape() {
        let l = lib();
        assert!(l.patterns().len() >= 20);
        for name in [
            "hydroxyl", "carboxylic_acid", "ester", "ether", "amide", "primary_amine",
            "secondary_amine", "tertiary_amine", "nitro", "nitrile", "halogen", "sulfonamide",
            "thiol", "thioether", "ketone", "aldehyde", "guanidinium", "phenol", "urea",
            "carbamate",
        ] {
            assert!(l.get(name).is_some(), "{name}");
        }
    }

    #[test]
    fn exemplars_match() {
        for p in lib().patterns() {
            let ex = p.exemplar.as_ref().unwrap_or_else(|| panic!("{} lacks exemplar", p.name));
            let g = parse_smiles(ex).unwrap();
            assert!(!p.find_matches(&g).is_empty(), "{} vs {ex}", p.name);
        }
    }

    #[test]
    fn spec_matches() {
        assert_eq!(count("hydroxyl", "CCO"), 1);
        assert_eq!(count("carboxylic_acid", "CC(=O)O"), 1);
        let bace = "ClC1=CC(=CC(Cl)=C1NC(=O)C)CNC(=[NH2+1])NC(=O)CN2C3=C(C=CC=C3)C=C2";
        assert!(count("amide", bace) >= 2);
        assert_eq!(count("ether", "COC"), 1, "symmetric mappings collapse");
        let g = parse_smiles("C").unwrap();
        assert!(lib().patterns().iter().all(|p| p.find_matches(&g).is_empty()));
    }

    #[test]
    fn precedence() {
        assert_eq!(features("c1ccccc1"), vec!["aromatic_ring"]);
        assert_eq!(features("CC(=O)O"), vec!["carboxylic_acid"]);
        assert_eq!(
            features("OCC(N)C(=O)O"),
            vec!["carboxylic_acid", "hydroxyl", "primary_amine"]
        );
        assert_eq!(features("CC(=O)OC"), vec!["ester"]);
        assert_eq!(features("CC(=O)NC"), vec!["amide"]);
        assert_eq!(features("CC(=O)C"), vec!["ketone"]);
        assert_eq!(features("Oc1ccccc1"), vec!["aromatic_ring", "phenol"]);
        assert_eq!(features("OC1=CC=CC=C1"), vec!["aromatic_ring", "phenol"]);
    }

    #[test]
    fn ring_and_stereo_features() {
        let f = features("c1ccc2ccccc2c1");
        assert!(f.contains(&"fused_ring_system".to_string()));
        let f = features("C[C@H](N)C(=O)O");
        assert!(f.contains(&"stereocenter".to_string()));
        let f = features("F/C=C/F");
        assert!(f.contains(&"double_bond_stereo".to_string()));
        assert!(features("C1CCCCC1").contains(&"aliphatic_ring".to_string()));
    }

    #[test]
    fn rejects_bad_records() {
        for bad in [
            "x | functional_group | [O] [C] | ",
            "x | nope | [O] | ",
            "x | functional_group | [Xx] | ",
            "x | functional_group | [O] | 0-1:1",
            "x | functional_group | [*] | ",
            "x | functional_group | [O;h=1] | | colour=red",
            "x | functional_group | [O] | | suppresses=missing",
        ] {
            assert!(Library::parse(bad).is_err(), "{bad}");
        }
        let err = Library::parse("# c\n\nx | functional_group | O | ").unwrap_err();
        assert_eq!(err.line, 3);
    }
}
