use std::collections::{BTreeSet, HashMap};

use super::{hydrogen_count, BondOrder, BondStereo, Chirality, Element, MoleculeGraph};

/// Directional mark for a single bond, expressed as "seen going from
/// `.0` to `.1`, the bond is `/` when `.2`".
type Mark = (usize, usize, bool);

struct Layout {
    children: Vec<Vec<(usize, usize)>>,
    /// Ring-closure bonds per atom, in the order their digits are written.
    closures: Vec<Vec<usize>>,
    /// For every closure bond: (opener, closer).
    closure_ends: HashMap<usize, (usize, usize)>,
    roots: Vec<usize>,
}

/// Write a (non-canonical) SMILES string that re-parses to a graph
/// isomorphic to `graph`, keeping aromatic flags, charges, isotopes,
/// hydrogen counts, chirality and cis/trans marks.
pub fn write_smiles(graph: &MoleculeGraph) -> String {
    let layout = traverse(graph);
    let marks = stereo_marks(graph);
    let mut writer = Writer {
        graph,
        layout: &layout,
        marks,
        out: String::new(),
        digits: HashMap::new(),
        free: (1..=99).collect(),
    };
    for (k, &root) in layout.roots.iter().enumerate() {
        if k > 0 {
            writer.out.push('.');
        }
        writer.emit(root, None);
    }
    writer.out
}

fn traverse(graph: &MoleculeGraph) -> Layout {
    let n = graph.atom_count();
    let mut visited = vec![false; n];
    let mut bond_seen = vec![false; graph.bond_count()];
    let mut layout = Layout {
        children: vec![Vec::new(); n],
        closures: vec![Vec::new(); n],
        closure_ends: HashMap::new(),
        roots: Vec::new(),
    };
    for root in 0..n {
        if visited[root] {
            continue;
        }
        layout.roots.push(root);
        visited[root] = true;
        // (atom, sorted neighbours, cursor)
        let mut stack: Vec<(usize, Vec<(usize, usize)>, usize)> =
            vec![(root, sorted_neighbors(graph, root), 0)];
        while let Some((u, nbrs, cursor)) = stack.last_mut() {
            let u = *u;
            if *cursor == nbrs.len() {
                stack.pop();
                continue;
            }
            let (v, b) = nbrs[*cursor];
            *cursor += 1;
            if bond_seen[b] {
                continue;
            }
            bond_seen[b] = true;
            if visited[v] {
                // v is an ancestor that is already written: it opens the ring
                layout.closures[v].push(b);
                layout.closures[u].push(b);
                layout.closure_ends.insert(b, (v, u));
            } else {
                visited[v] = true;
                layout.children[u].push((v, b));
                stack.push((v, sorted_neighbors(graph, v), 0));
            }
        }
    }
    layout
}

fn sorted_neighbors(graph: &MoleculeGraph, atom: usize) -> Vec<(usize, usize)> {
    let mut v = graph.neighbors(atom).to_vec();
    v.sort_unstable();
    v
}

fn stereo_marks(graph: &MoleculeGraph) -> HashMap<usize, Mark> {
    let mut marks: HashMap<usize, Mark> = HashMap::new();
    let view = |marks: &HashMap<usize, Mark>, bond: usize, from: usize| {
        marks
            .get(&bond)
            .map(|&(f, _, up)| if f == from { up } else { !up })
    };
    for ds in graph.double_bond_stereo() {
        let bond = &graph.bonds()[ds.bond];
        let trans = match bond.stereo {
            BondStereo::Trans => true,
            BondStereo::Cis => false,
            BondStereo::None => continue,
        };
        let (a, b) = (bond.a, bond.b);
        let find = |x: usize, y: usize| {
            graph
                .neighbors(x)
                .iter()
                .find(|&&(v, _)| v == y)
                .map(|&(_, i)| i)
        };
        let (Some(xa), Some(by)) = (find(ds.ref_a, a), find(b, ds.ref_b)) else {
            continue;
        };
        let dir_a = view(&marks, xa, ds.ref_a);
        let dir_b = view(&marks, by, b);
        match (dir_a, dir_b) {
            (None, None) => {
                marks.insert(xa, (ds.ref_a, a, true));
                marks.insert(by, (b, ds.ref_b, trans));
            }
            (Some(d), None) => {
                marks.insert(by, (b, ds.ref_b, if trans { d } else { !d }));
            }
            (None, Some(d)) => {
                marks.insert(xa, (ds.ref_a, a, if trans { d } else { !d }));
            }
            (Some(_), Some(_)) => {}
        }
    }
    marks
}

struct Writer<'a> {
    graph: &'a MoleculeGraph,
    layout: &'a Layout,
    marks: HashMap<usize, Mark>,
    out: String,
    digits: HashMap<usize, u8>,
    free: BTreeSet<u8>,
}

impl Writer<'_> {
    fn emit(&mut self, u: usize, parent: Option<usize>) {
        let g = self.graph;
        // ring digits: closes first, then opens
        let mut closes = Vec::new();
        let mut opens = Vec::new();
        for &b in &self.layout.closures[u] {
            let (opener, _) = self.layout.closure_ends[&b];
            if opener == u {
                opens.push(b);
            } else {
                closes.push(b);
            }
        }
        let mut ring_text = String::new();
        let mut ring_partners = Vec::new();
        let mut released = Vec::new();
        for &b in &closes {
            let d = self.digits.remove(&b).expect("opened before close");
            ring_text.push_str(&digit_text(d));
            released.push(d);
            ring_partners.push(g.bonds()[b].other(u));
        }
        for &b in &opens {
            let d = *self.free.iter().next().expect("at most 99 open rings");
            self.free.remove(&d);
            self.digits.insert(b, d);
            let other = g.bonds()[b].other(u);
            ring_text.push_str(&self.bond_text(b, u, other));
            ring_text.push_str(&digit_text(d));
            ring_partners.push(other);
        }
        self.free.extend(released);

        let children = &self.layout.children[u];
        let bracket = needs_bracket(g, u);
        let mut chirality = g.atom(u).chirality;
        if chirality.is_set() {
            if let Some(original) = g.stereo_order(u) {
                let mut written: Vec<Option<usize>> = Vec::new();
                if let Some(p) = parent {
                    written.push(Some(p));
                }
                if g.implicit_hydrogens(u) > 0 {
                    written.push(None);
                }
                written.extend(ring_partners.iter().map(|&p| Some(p)));
                written.extend(children.iter().map(|&(c, _)| Some(c)));
                if let Some(odd) = permutation_is_odd(original, &written) {
                    if odd {
                        chirality = chirality.inverted();
                    }
                }
            }
        }
        self.out.push_str(&atom_text(g, u, bracket, chirality));
        self.out.push_str(&ring_text);

        let last = children.len().saturating_sub(1);
        for (k, &(c, b)) in children.iter().enumerate() {
            let text = self.bond_text(b, u, c);
            if k < last {
                self.out.push('(');
                self.out.push_str(&text);
                self.emit(c, Some(u));
                self.out.push(')');
            } else {
                self.out.push_str(&text);
                self.emit(c, Some(u));
            }
        }
    }

    fn bond_text(&self, bond: usize, from: usize, to: usize) -> String {
        let g = self.graph;
        let both_aromatic = g.atom(from).aromatic && g.atom(to).aromatic;
        match g.bonds()[bond].order {
            BondOrder::Single => {
                if let Some(&(f, _, up)) = self.marks.get(&bond) {
                    let up = if f == from { up } else { !up };
                    return if up { "/" } else { "\\" }.to_string();
                }
                if both_aromatic { "-" } else { "" }.to_string()
            }
            BondOrder::Double => "=".to_string(),
            BondOrder::Triple => "#".to_string(),
            BondOrder::Aromatic => if both_aromatic { "" } else { ":" }.to_string(),
        }
    }
}

fn digit_text(d: u8) -> String {
    if d < 10 {
        d.to_string()
    } else {
        format!("%{d:02}")
    }
}

fn needs_bracket(g: &MoleculeGraph, i: usize) -> bool {
    let a = g.atom(i);
    if !a.element.is_organic_subset()
        || a.formal_charge != 0
        || a.isotope.is_some()
        || a.chirality.is_set()
    {
        return true;
    }
    if a.aromatic
        && !matches!(
            a.element,
            Element::B | Element::C | Element::N | Element::O | Element::P | Element::S
        )
    {
        return true;
    }
    let mut bare = a.clone();
    bare.bracket = false;
    bare.explicit_h = 0;
    let orders = g.neighbors(i).iter().map(|&(_, b)| g.bonds()[b].order);
    match hydrogen_count(&bare, orders) {
        Ok(h) => h != g.implicit_hydrogens(i),
        Err(_) => true,
    }
}

fn atom_text(g: &MoleculeGraph, i: usize, bracket: bool, chirality: Chirality) -> String {
    let a = g.atom(i);
    let symbol = if a.aromatic {
        a.element.symbol().to_ascii_lowercase()
    } else {
        a.element.symbol().to_string()
    };
    if !bracket {
        return symbol;
    }
    let mut s = String::from("[");
    if let Some(iso) = a.isotope {
        s.push_str(&iso.to_string());
    }
    s.push_str(&symbol);
    match chirality {
        Chirality::None => {}
        Chirality::CounterClockwise => s.push('@'),
        Chirality::Clockwise => s.push_str("@@"),
    }
    match g.implicit_hydrogens(i) {
        0 => {}
        1 => s.push('H'),
        h => {
            s.push('H');
            s.push_str(&h.to_string());
        }
    }
    match a.formal_charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        q if q > 0 => s.push_str(&format!("+{q}")),
        q => s.push_str(&format!("-{}", -q)),
    }
    s.push(']');
    s
}

/// Parity of the permutation taking `from` to `to`; `None` if the two lists
/// are not rearrangements of each other.
fn permutation_is_odd(from: &[Option<usize>], to: &[Option<usize>]) -> Option<bool> {
    if from.len() != to.len() {
        return None;
    }
    let mut idx: Vec<usize> = Vec::with_capacity(to.len());
    let mut used = vec![false; from.len()];
    for t in to {
        let pos = (0..from.len()).find(|&k| !used[k] && from[k] == *t)?;
        used[pos] = true;
        idx.push(pos);
    }
    let mut inversions = 0;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            if idx[i] > idx[j] {
                inversions += 1;
            }
        }
    }
    Some(inversions % 2 == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{is_isomorphic, parse_smiles};

    fn roundtrip(s: &str) -> (MoleculeGraph, MoleculeGraph, String) {
        let g = parse_smiles(s).unwrap();
        let w = write_smiles(&g);
        let g2 = parse_smiles(&w).unwrap_or_else(|e| panic!("{s} -> {w}: {e}"));
        (g, g2, w)
    }

    #[test]
    fn simple_roundtrips() {
        for s in [
            "CCO",
            "c1ccccc1O",
            "ClC1=CC(=CC(Cl)=C1NC(=O)C)CNC(=[NH2+1])NC(=O)CN2C3=C(C=CC=C3)C=C2",
            "c1ccccc1-c1ccccc1",
            "[Na+].[Cl-]",
            "C1CC2CCC1CC2",
            "[2H]C([2H])([2H])O",
            "c1cc[nH]c1",
            "O=[N+]([O-])c1ccccc1",
            "C12C3C4C1C5C2C3C45",
        ] {
            let (g, g2, w) = roundtrip(s);
            assert!(is_isomorphic(&g, &g2), "{s} -> {w}");
        }
    }

    #[test]
    fn keeps_charges_and_aromaticity() {
        let (_, g2, _) = roundtrip("c1ccccc1O");
        assert_eq!(g2.atoms().iter().filter(|a| a.aromatic).count(), 6);
        let (_, g2, w) = roundtrip("CNC(=[NH2+1])N");
        assert!(w.contains("[NH2+]"), "{w}");
        assert_eq!(g2.atoms().iter().map(|a| a.formal_charge as i32).sum::<i32>(), 1);
    }

    #[test]
    fn chirality_survives_reordering() {
        // the same centre written with a different neighbour order
        let (g, g2, w) = roundtrip("C[C@H](N)C(=O)O");
        assert!(is_isomorphic(&g, &g2));
        let centre = g2.atoms().iter().find(|a| a.chirality.is_set()).unwrap();
        assert!(w.contains('@'));
        // permuting neighbours by one swap must flip the tag
        let g = parse_smiles("N[C@H](C)C(=O)O").unwrap();
        let w = write_smiles(&g);
        assert_eq!(w, "N[C@H](C)C(=O)O");
        let _ = centre;
    }

    #[test]
    fn cis_trans_survives() {
        for s in ["F/C=C/F", r"F/C=C\F", "C(/F)=C/F", r"CC/C=C/C=C\C"] {
            let (g, g2, w) = roundtrip(s);
            let st = |g: &MoleculeGraph| {
                let mut v: Vec<_> = g
                    .bonds()
                    .iter()
                    .filter(|b| b.order == BondOrder::Double)
                    .map(|b| format!("{:?}", b.stereo))
                    .collect();
                v.sort();
                v
            };
            assert_eq!(st(&g), st(&g2), "{s} -> {w}");
        }
    }

    #[test]
    fn parity() {
        let a = [Some(0), None, Some(2), Some(3)];
        assert_eq!(permutation_is_odd(&a, &a), Some(false));
        assert_eq!(
            permutation_is_odd(&a, &[None, Some(0), Some(2), Some(3)]),
            Some(true)
        );
        assert_eq!(permutation_is_odd(&a, &[Some(9)]), None);
    }
}
