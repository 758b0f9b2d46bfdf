use std::borrow::Cow;
use std::collections::HashSet;

use super::{BondOrder, BondStereo, Element, MoleculeGraph};

/// Rings written in Kekulé form that a reader would call aromatic: five- and
/// six-membered SSSR rings carrying six pi electrons, where every carbon
/// takes part in exactly one double bond that lies in the ring itself or in
/// a fused ring already accepted. A five-membered ring needs one neutral N,
/// O or S without a double bond to donate its lone pair.
///
/// Returns the indices (into `g.rings()`) of such rings. Rings already
/// written in aromatic notation are not reported.
pub fn kekule_aromatic_rings(g: &MoleculeGraph) -> Vec<usize> {
    let rings = g.rings();
    let ring_bonds: Vec<HashSet<usize>> = rings.iter().map(|r| bonds_of(g, r)).collect();
    let mut accepted = vec![false; rings.len()];
    loop {
        let mut changed = false;
        for (ri, ring) in rings.iter().enumerate() {
            if accepted[ri] || !(ring.len() == 5 || ring.len() == 6) {
                continue;
            }
            if ring.iter().any(|&a| g.atom(a).aromatic) {
                continue;
            }
            let electrons: Option<u32> = ring
                .iter()
                .map(|&a| pi_electrons(g, a, ri, &ring_bonds, &accepted))
                .sum();
            if electrons == Some(6) {
                accepted[ri] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..rings.len()).filter(|&r| accepted[r]).collect()
}

fn bonds_of(g: &MoleculeGraph, ring: &[usize]) -> HashSet<usize> {
    let k = ring.len();
    (0..k)
        .filter_map(|i| {
            let (a, b) = (ring[i], ring[(i + 1) % k]);
            g.neighbors(a).iter().find(|&&(v, _)| v == b).map(|&(_, bond)| bond)
        })
        .collect()
}

fn pi_electrons(
    g: &MoleculeGraph,
    atom: usize,
    ring: usize,
    ring_bonds: &[HashSet<usize>],
    accepted: &[bool],
) -> Option<u32> {
    let a = g.atom(atom);
    let doubles: Vec<usize> = g
        .neighbors(atom)
        .iter()
        .filter(|&&(_, b)| g.bonds()[b].order == BondOrder::Double)
        .map(|&(_, b)| b)
        .collect();
    if g
        .neighbors(atom)
        .iter()
        .any(|&(_, b)| matches!(g.bonds()[b].order, BondOrder::Triple | BondOrder::Aromatic))
    {
        return None;
    }
    match doubles.as_slice() {
        [b] => {
            let in_ring = ring_bonds[ring].contains(b);
            let fused = (0..ring_bonds.len()).any(|r| accepted[r] && ring_bonds[r].contains(b));
            matches!(a.element, Element::C | Element::N).then_some(())?;
            (in_ring || fused).then_some(1)
        }
        [] => {
            let donor = a.formal_charge == 0
                && match a.element {
                    Element::N => g.degree(atom) + g.implicit_hydrogens(atom) as usize == 3,
                    Element::O | Element::S => g.degree(atom) == 2,
                    _ => false,
                };
            donor.then_some(2)
        }
        _ => None,
    }
}

/// `g` with Kekulé-written aromatic rings rewritten in aromatic form
/// (aromatic atoms, aromatic bonds). Hydrogen counts are preserved exactly;
/// cis/trans marks on converted bonds are dropped. Borrows `g` unchanged
/// when there is nothing to convert.
pub fn aromatize(g: &MoleculeGraph) -> Cow<'_, MoleculeGraph> {
    let accepted = kekule_aromatic_rings(g);
    if accepted.is_empty() {
        return Cow::Borrowed(g);
    }
    let mut atom_flags = vec![false; g.atom_count()];
    let mut bond_flags = vec![false; g.bond_count()];
    for &r in &accepted {
        let ring = &g.rings()[r];
        for &a in ring {
            atom_flags[a] = true;
        }
        for b in bonds_of(g, ring) {
            bond_flags[b] = true;
        }
    }
    let atoms = g
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, atom)| {
            let mut atom = atom.clone();
            if atom_flags[i] {
                atom.aromatic = true;
                if !atom.bracket {
                    atom.bracket = true;
                    atom.explicit_h = g.implicit_hydrogens(i);
                }
            }
            atom
        })
        .collect();
    let bonds = g
        .bonds()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let mut b = b.clone();
            if bond_flags[i] {
                b.order = BondOrder::Aromatic;
                b.stereo = BondStereo::None;
            }
            b
        })
        .collect();
    let stereo_order = (0..g.atom_count())
        .map(|i| g.stereo_order(i).map(<[_]>::to_vec))
        .collect();
    let dbs = g
        .double_bond_stereo()
        .iter()
        .filter(|d| !bond_flags[d.bond])
        .cloned()
        .collect();
    Cow::Owned(
        MoleculeGraph::from_parts(atoms, bonds, stereo_order, dbs)
            .expect("aromatic rewrite keeps valences"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{is_isomorphic, parse_smiles};

    fn count(s: &str) -> usize {
        kekule_aromatic_rings(&parse_smiles(s).unwrap()).len()
    }

    #[test]
    fn recognises_kekule_rings() {
        assert_eq!(count("C1=CC=CC=C1"), 1);
        assert_eq!(count("C1=CC=C2C=CC=CC2=C1"), 2);
        assert_eq!(count("C1=CNC=C1"), 1);
        assert_eq!(count("C1=COC=C1"), 1);
        assert_eq!(count("C1=CSC=C1"), 1);
        assert_eq!(count("C1=CC=NC=C1"), 1);
        let bace = "ClC1=CC(=CC(Cl)=C1NC(=O)C)CNC(=[NH2+1])NC(=O)CN2C3=C(C=CC=C3)C=C2";
        assert_eq!(count(bace), 3);
    }

    #[test]
    fn rejects_non_aromatic_rings() {
        assert_eq!(count("C1=CCC=C1"), 0);
        assert_eq!(count("C1CCCCC1"), 0);
        assert_eq!(count("O=C1C=CC(=O)C=C1"), 0);
        assert_eq!(count("C1=CC=CC=CC=C1"), 0);
        assert_eq!(count("c1ccccc1"), 0, "already aromatic");
    }

    #[test]
    fn rewrite_matches_aromatic_notation() {
        for (kek, aro) in [
            ("C1=CC=CC=C1O", "c1ccccc1O"),
            ("C1=CNC=C1", "c1cc[nH]c1"),
            ("C1=CC=C2C=CC=CC2=C1", "c1ccc2ccccc2c1"),
            ("CN1C=CC=C1", "Cn1cccc1"),
        ] {
            let a = aromatize(&parse_smiles(kek).unwrap()).into_owned();
            let b = parse_smiles(aro).unwrap();
            assert!(is_isomorphic(&a, &b), "{kek}");
        }
    }
}
