use std::collections::HashMap;

use super::MoleculeGraph;

type Label = (u8, bool, i8, Option<u16>, u32);

fn atom_label(g: &MoleculeGraph, i: usize) -> Label {
    let a = g.atom(i);
    (
        a.element.atomic_number(),
        a.aromatic,
        a.formal_charge,
        a.isotope,
        g.total_hydrogens(i),
    )
}

/// Colour refinement over both graphs at once so that colours are
/// comparable between them.
fn refine(g1: &MoleculeGraph, g2: &MoleculeGraph) -> (Vec<usize>, Vec<usize>) {
    let n1 = g1.atom_count();
    let graphs = [g1, g2];
    let mut colors: Vec<usize> = {
        let labels: Vec<Label> = graphs
            .iter()
            .flat_map(|g| (0..g.atom_count()).map(move |i| atom_label(g, i)))
            .collect();
        let mut uniq = labels.clone();
        uniq.sort();
        uniq.dedup();
        labels
            .iter()
            .map(|l| uniq.binary_search(l).unwrap())
            .collect()
    };
    let mut classes = colors.iter().collect::<std::collections::HashSet<_>>().len();
    loop {
        let sigs: Vec<(usize, Vec<(u8, usize)>)> = graphs
            .iter()
            .enumerate()
            .flat_map(|(gi, g)| {
                let colors = &colors;
                (0..g.atom_count()).map(move |i| {
                    let off = if gi == 0 { 0 } else { n1 };
                    let mut nb: Vec<(u8, usize)> = g
                        .neighbors(i)
                        .iter()
                        .map(|&(v, b)| (g.bonds()[b].order.code(), colors[off + v]))
                        .collect();
                    nb.sort_unstable();
                    (colors[off + i], nb)
                })
            })
            .collect();
        let mut uniq = sigs.clone();
        uniq.sort();
        uniq.dedup();
        let next: Vec<usize> = sigs
            .iter()
            .map(|s| uniq.binary_search(s).unwrap())
            .collect();
        let count = uniq.len();
        colors = next;
        if count == classes {
            break;
        }
        classes = count;
    }
    let c2 = colors.split_off(n1);
    (colors, c2)
}

/// Graph isomorphism respecting element, aromatic flag, formal charge,
/// isotope, hydrogen count and bond order.
pub fn is_isomorphic(g1: &MoleculeGraph, g2: &MoleculeGraph) -> bool {
    if g1.atom_count() != g2.atom_count() || g1.bond_count() != g2.bond_count() {
        return false;
    }
    let n = g1.atom_count();
    if n == 0 {
        return true;
    }
    let (c1, c2) = refine(g1, g2);
    let mut h1: HashMap<usize, usize> = HashMap::new();
    let mut h2: HashMap<usize, usize> = HashMap::new();
    for &c in &c1 {
        *h1.entry(c).or_default() += 1;
    }
    for &c in &c2 {
        *h2.entry(c).or_default() += 1;
    }
    if h1 != h2 {
        return false;
    }

    // match order: BFS over g1, starting from the rarest colour
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let start = (0..n)
            .filter(|&i| !placed[i])
            .min_by_key(|&i| (h1[&c1[i]], i))
            .unwrap();
        placed[start] = true;
        let mut head = order.len();
        order.push(start);
        while head < order.len() {
            let u = order[head];
            head += 1;
            let mut nbrs: Vec<usize> = g1.neighbors(u).iter().map(|&(v, _)| v).collect();
            nbrs.sort_by_key(|&v| (h1[&c1[v]], v));
            for v in nbrs {
                if !placed[v] {
                    placed[v] = true;
                    order.push(v);
                }
            }
        }
    }

    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    search(g1, g2, &c1, &c2, &order, 0, &mut map, &mut used)
}

#[allow(clippy::too_many_arguments)]
fn search(
    g1: &MoleculeGraph,
    g2: &MoleculeGraph,
    c1: &[usize],
    c2: &[usize],
    order: &[usize],
    depth: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let u = order[depth];
    // if some mapped neighbour exists, candidates are restricted to its image's neighbours
    let anchor = g1
        .neighbors(u)
        .iter()
        .find(|&&(v, _)| map[v] != usize::MAX)
        .map(|&(v, _)| map[v]);
    let candidates: Vec<usize> = match anchor {
        Some(img) => g2.neighbors(img).iter().map(|&(w, _)| w).collect(),
        None => (0..g2.atom_count()).collect(),
    };
    for w in candidates {
        if used[w] || c2[w] != c1[u] {
            continue;
        }
        let consistent = g1.neighbors(u).iter().all(|&(v, b)| {
            let mv = map[v];
            if mv == usize::MAX {
                return true;
            }
            match g2.bond_between(w, mv) {
                Some(b2) => b2.order == g1.bonds()[b].order,
                None => false,
            }
        });
        if !consistent {
            continue;
        }
        map[u] = w;
        used[w] = true;
        if search(g1, g2, c1, c2, order, depth + 1, map, used) {
            return true;
        }
        map[u] = usize::MAX;
        used[w] = false;
    }
    false
}
