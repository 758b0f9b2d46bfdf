use std::collections::{HashSet, VecDeque};

use super::MoleculeGraph;

/// Smallest set of smallest rings.
///
/// Candidate cycles come from every vertex's shortest-path tree (Horton's
/// construction) plus the shortest cycle through every edge; candidates are
/// then taken shortest-first while they stay linearly independent over
/// GF(2). The result always has `|bonds| - |atoms| + |components|` rings.
/// Each ring is listed starting from its smallest atom index, walking toward
/// the smaller of its two neighbours.
pub fn perceive_rings(graph: &MoleculeGraph) -> Vec<Vec<usize>> {
    let n = graph.atom_count();
    let m = graph.bond_count();
    let cyclomatic = (m + graph.fragment_count()).saturating_sub(n);
    if cyclomatic == 0 {
        return Vec::new();
    }

    let ring_bond = cycle_bonds(graph);
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut candidates: Vec<(Vec<usize>, Vec<u64>)> = Vec::new();
    let words = m.div_ceil(64);

    let mut push = |cycle: Vec<usize>, seen: &mut HashSet<Vec<u64>>| {
        let mut bits = vec![0u64; words];
        let k = cycle.len();
        for i in 0..k {
            let b = graph
                .neighbors(cycle[i])
                .iter()
                .find(|&&(nb, _)| nb == cycle[(i + 1) % k])
                .map(|&(_, b)| b)
                .expect("cycle follows bonds");
            bits[b / 64] |= 1 << (b % 64);
        }
        if seen.insert(bits.clone()) {
            candidates.push((canonical_cycle(cycle), bits));
        }
    };

    for root in 0..n {
        if !graph.neighbors(root).iter().any(|&(_, b)| ring_bond[b]) {
            continue;
        }
        let (dist, parent) = bfs(graph, root, None);
        for (b, bond) in graph.bonds().iter().enumerate() {
            if !ring_bond[b] {
                continue;
            }
            let (x, y) = (bond.a, bond.b);
            if dist[x] == usize::MAX || dist[y] == usize::MAX {
                continue;
            }
            if parent[x] == Some(y) || parent[y] == Some(x) {
                continue;
            }
            let px = path_to_root(&parent, x);
            let py = path_to_root(&parent, y);
            let sx: HashSet<usize> = px[..px.len() - 1].iter().copied().collect();
            if py[..py.len() - 1].iter().any(|v| sx.contains(v)) {
                continue;
            }
            // root .. x, y .. (root excluded)
            let mut cycle: Vec<usize> = px.iter().rev().copied().collect();
            cycle.extend(py[..py.len() - 1].iter().copied());
            push(cycle, &mut seen);
        }
    }
    for (b, bond) in graph.bonds().iter().enumerate() {
        if !ring_bond[b] {
            continue;
        }
        let (dist, parent) = bfs(graph, bond.a, Some(b));
        if dist[bond.b] == usize::MAX {
            continue;
        }
        let path = path_to_root(&parent, bond.b);
        push(path, &mut seen);
    }

    candidates.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));

    let mut basis: Vec<Vec<u64>> = Vec::new();
    let mut rings = Vec::new();
    for (cycle, bits) in candidates {
        if rings.len() == cyclomatic {
            break;
        }
        if reduce(&basis, bits.clone()).iter().any(|&w| w != 0) {
            insert_reduced(&mut basis, bits);
            rings.push(cycle);
        }
    }
    debug_assert_eq!(rings.len(), cyclomatic);
    rings
}

/// Bonds that lie on at least one cycle (i.e. are not bridges).
fn cycle_bonds(graph: &MoleculeGraph) -> Vec<bool> {
    let n = graph.atom_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_cycle = vec![true; graph.bond_count()];
    let mut timer = 0;
    for start in 0..n {
        if disc[start] != usize::MAX {
            continue;
        }
        // iterative Tarjan bridge finding: (vertex, parent bond, next neighbour idx)
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(start, None, 0)];
        disc[start] = timer;
        low[start] = timer;
        timer += 1;
        while let Some(&mut (u, pb, ref mut idx)) = stack.last_mut() {
            if *idx < graph.neighbors(u).len() {
                let (v, b) = graph.neighbors(u)[*idx];
                *idx += 1;
                if Some(b) == pb {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, Some(b), 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let (Some(&(p, _, _)), Some(b)) = (stack.last(), pb) {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        on_cycle[b] = false;
                    }
                }
            }
        }
    }
    on_cycle
}

fn bfs(
    graph: &MoleculeGraph,
    root: usize,
    skip_bond: Option<usize>,
) -> (Vec<usize>, Vec<Option<usize>>) {
    let n = graph.atom_count();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![None; n];
    let mut queue = VecDeque::new();
    dist[root] = 0;
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        let mut nbrs: Vec<(usize, usize)> = graph.neighbors(u).to_vec();
        nbrs.sort_unstable();
        for (v, b) in nbrs {
            if Some(b) == skip_bond || dist[v] != usize::MAX {
                continue;
            }
            dist[v] = dist[u] + 1;
            parent[v] = Some(u);
            queue.push_back(v);
        }
    }
    (dist, parent)
}

/// Path from `v` back to the BFS root, inclusive at both ends.
fn path_to_root(parent: &[Option<usize>], mut v: usize) -> Vec<usize> {
    let mut path = vec![v];
    while let Some(p) = parent[v] {
        path.push(p);
        v = p;
    }
    path
}

fn canonical_cycle(cycle: Vec<usize>) -> Vec<usize> {
    let k = cycle.len();
    let start = (0..k).min_by_key(|&i| cycle[i]).unwrap();
    let fwd = cycle[(start + 1) % k];
    let back = cycle[(start + k - 1) % k];
    if fwd <= back {
        (0..k).map(|i| cycle[(start + i) % k]).collect()
    } else {
        (0..k).map(|i| cycle[(start + k - i) % k]).collect()
    }
}

fn leading_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .rev()
        .find(|(_, &w)| w != 0)
        .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
}

fn reduce(basis: &[Vec<u64>], mut v: Vec<u64>) -> Vec<u64> {
    for row in basis {
        let lead = leading_bit(row).unwrap();
        if v[lead / 64] >> (lead % 64) & 1 == 1 {
            for (a, b) in v.iter_mut().zip(row) {
                *a ^= b;
            }
        }
    }
    v
}

/// Keep `basis` in echelon form sorted by descending leading bit.
fn insert_reduced(basis: &mut Vec<Vec<u64>>, v: Vec<u64>) {
    let v = reduce(basis, v);
    let lead = leading_bit(&v).unwrap();
    for row in basis.iter_mut() {
        if row[lead / 64] >> (lead % 64) & 1 == 1 {
            for (a, b) in row.iter_mut().zip(&v) {
                *a ^= b;
            }
        }
    }
    let pos = basis
        .iter()
        .position(|r| leading_bit(r).unwrap() < lead)
        .unwrap_or(basis.len());
    basis.insert(pos, v);
}

#[cfg(test)]
mod tests {
    use crate::molgraph::parse_smiles;

    fn ring_sizes(smiles: &str) -> Vec<usize> {
        let g = parse_smiles(smiles).unwrap();
        let mut s: Vec<usize> = g.rings().iter().map(Vec::len).collect();
        s.sort_unstable();
        s
    }

    #[test]
    fn small_cases() {
        assert_eq!(ring_sizes("C1CC1"), vec![3]);
        assert_eq!(ring_sizes("CCO"), Vec::<usize>::new());
        // bicyclo[2.2.2]octane: 9 bonds - 8 atoms + 1
        assert_eq!(ring_sizes("C1CC2CCC1CC2"), vec![6, 6]);
        assert_eq!(ring_sizes("c1ccc2ccccc2c1"), vec![6, 6]);
        // cubane: 12 - 8 + 1 = 5 four-membered rings
        assert_eq!(ring_sizes("C12C3C4C1C5C2C3C45"), vec![4, 4, 4, 4, 4]);
        assert_eq!(ring_sizes("C1CC1.C1CCC1"), vec![3, 4]);
        // spiro
        assert_eq!(ring_sizes("C1CCC11CCCC1"), vec![4, 5]);
        // adamantane has cyclomatic number 3
        assert_eq!(ring_sizes("C1C2CC3CC1CC(C2)C3"), vec![6, 6, 6]);
    }

    #[test]
    fn ring_listing_is_canonical() {
        let g = parse_smiles("C1CC1").unwrap();
        assert_eq!(g.rings()[0], vec![0, 1, 2]);
    }
}
