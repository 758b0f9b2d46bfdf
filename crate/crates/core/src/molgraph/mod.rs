//! Molecular graphs parsed from SMILES.
//!
//! Aromaticity is taken from the notation only (lowercase atoms and `:`
//! bonds). Implicit hydrogens follow the organic-subset valence model;
//! bracket atoms carry their hydrogen count verbatim.

mod aromatic;
mod element;
mod iso;
mod parse;
mod rings;
mod write;

pub use aromatic::{aromatize, kekule_aromatic_rings};
pub use element::Element;
pub use iso::is_isomorphic;
pub use parse::parse_smiles;
pub use rings::perceive_rings;
pub use write::write_smiles;

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Chirality {
    #[default]
    None,
    /// `@@`
    Clockwise,
    /// `@`
    CounterClockwise,
}

impl Chirality {
    pub fn is_set(self) -> bool {
        self != Chirality::None
    }

    pub fn inverted(self) -> Chirality {
        match self {
            Chirality::None => Chirality::None,
            Chirality::Clockwise => Chirality::CounterClockwise,
            Chirality::CounterClockwise => Chirality::Clockwise,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub index: usize,
    pub element: Element,
    pub aromatic: bool,
    pub formal_charge: i8,
    pub isotope: Option<u16>,
    /// Hydrogen count written inside brackets; 0 for organic-subset atoms.
    pub explicit_h: u8,
    pub chirality: Chirality,
    /// Whether the atom was written in bracket form.
    pub bracket: bool,
    /// Connected-component label, numbered in order of first appearance.
    pub fragment: usize,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            index: 0,
            element,
            aromatic: false,
            formal_charge: 0,
            isotope: None,
            explicit_h: 0,
            chirality: Chirality::None,
            bracket: false,
            fragment: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Valence units contributed to each endpoint (aromatic counts as 1).
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BondStereo {
    #[default]
    None,
    Cis,
    Trans,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    pub stereo: BondStereo,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// Reference neighbours that give a cis/trans double bond its meaning:
/// `ref_a` is bonded to `bonds[bond].a`, `ref_b` to `bonds[bond].b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleBondStereo {
    pub bond: usize,
    pub ref_a: usize,
    pub ref_b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmilesErrorKind {
    Empty,
    UnexpectedChar(char),
    UnmatchedParenthesis,
    EmptyBranch,
    UnclosedRing(u16),
    RingBondMismatch,
    UnknownElement(String),
    InvalidBracket,
    InvalidCharge,
    DanglingBond,
    SelfBond,
    DuplicateBond,
    ValenceViolation { atom: usize, valence: u8 },
    Unsupported(char),
}

impl SmilesErrorKind {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            SmilesErrorKind::Empty => "empty_input",
            SmilesErrorKind::UnexpectedChar(_) => "syntax_error",
            SmilesErrorKind::UnmatchedParenthesis => "unmatched_parenthesis",
            SmilesErrorKind::EmptyBranch => "empty_branch",
            SmilesErrorKind::UnclosedRing(_) => "unmatched_ring_closure",
            SmilesErrorKind::RingBondMismatch => "ring_bond_mismatch",
            SmilesErrorKind::UnknownElement(_) => "unknown_element",
            SmilesErrorKind::InvalidBracket => "invalid_bracket_atom",
            SmilesErrorKind::InvalidCharge => "invalid_charge",
            SmilesErrorKind::DanglingBond => "dangling_bond",
            SmilesErrorKind::SelfBond => "self_bond",
            SmilesErrorKind::DuplicateBond => "duplicate_bond",
            SmilesErrorKind::ValenceViolation { .. } => "valence_violation",
            SmilesErrorKind::Unsupported(_) => "unsupported_construct",
        }
    }
}

impl fmt::Display for SmilesErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmilesErrorKind::Empty => write!(f, "empty SMILES"),
            SmilesErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            SmilesErrorKind::UnmatchedParenthesis => write!(f, "unmatched parenthesis"),
            SmilesErrorKind::EmptyBranch => write!(f, "empty branch"),
            SmilesErrorKind::UnclosedRing(d) => write!(f, "ring closure {d} never closed"),
            SmilesErrorKind::RingBondMismatch => write!(f, "ring closure bond symbols disagree"),
            SmilesErrorKind::UnknownElement(s) => write!(f, "unknown element {s:?}"),
            SmilesErrorKind::InvalidBracket => write!(f, "malformed bracket atom"),
            SmilesErrorKind::InvalidCharge => write!(f, "formal charge out of range"),
            SmilesErrorKind::DanglingBond => write!(f, "bond symbol without a following atom"),
            SmilesErrorKind::SelfBond => write!(f, "atom bonded to itself"),
            SmilesErrorKind::DuplicateBond => write!(f, "duplicate bond between the same atoms"),
            SmilesErrorKind::ValenceViolation { atom, valence } => {
                write!(f, "atom {atom} exceeds allowed valence ({valence})")
            }
            SmilesErrorKind::Unsupported(c) => write!(f, "unsupported SMILES construct {c:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at byte {offset}")]
pub struct SmilesError {
    pub offset: usize,
    pub kind: SmilesErrorKind,
}

impl SmilesError {
    pub fn new(offset: usize, kind: SmilesErrorKind) -> SmilesError {
        SmilesError { offset, kind }
    }

    pub fn code(&self) -> &'static str {
        self.kind.code()
    }
}

/// A parsed molecule: atoms, bonds, perceived rings and implicit hydrogens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoleculeGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    rings: Vec<Vec<usize>>,
    implicit_h: Vec<u8>,
    adjacency: Vec<Vec<(usize, usize)>>,
    /// Neighbour order that the chirality tag of each atom refers to;
    /// `None` entries stand for the atom's own bracket hydrogen.
    stereo_order: Vec<Option<Vec<Option<usize>>>>,
    double_bond_stereo: Vec<DoubleBondStereo>,
    fragments: usize,
}

impl MoleculeGraph {
    /// Assemble a graph from atoms and bonds, validating endpoints and
    /// valences, then perceiving rings and implicit hydrogens.
    ///
    /// Errors carry atom indices in `offset` for valence problems.
    pub fn from_parts(
        mut atoms: Vec<Atom>,
        bonds: Vec<Bond>,
        stereo_order: Vec<Option<Vec<Option<usize>>>>,
        double_bond_stereo: Vec<DoubleBondStereo>,
    ) -> Result<MoleculeGraph, SmilesError> {
        let n = atoms.len();
        let mut adjacency = vec![Vec::new(); n];
        for (i, bond) in bonds.iter().enumerate() {
            if bond.a == bond.b {
                return Err(SmilesError::new(bond.a, SmilesErrorKind::SelfBond));
            }
            if bond.a >= n || bond.b >= n {
                return Err(SmilesError::new(i, SmilesErrorKind::DanglingBond));
            }
            if adjacency[bond.a].iter().any(|&(nb, _)| nb == bond.b) {
                return Err(SmilesError::new(bond.a, SmilesErrorKind::DuplicateBond));
            }
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }
        for (i, atom) in atoms.iter_mut().enumerate() {
            atom.index = i;
            if atom.formal_charge.abs() > 4 {
                return Err(SmilesError::new(i, SmilesErrorKind::InvalidCharge));
            }
        }
        let fragments = label_fragments(&mut atoms, &adjacency);
        let mut implicit_h = Vec::with_capacity(n);
        for (i, atom) in atoms.iter().enumerate() {
            let h = hydrogen_count(atom, adjacency[i].iter().map(|&(_, b)| bonds[b].order))
                .map_err(|valence| {
                    SmilesError::new(i, SmilesErrorKind::ValenceViolation { atom: i, valence })
                })?;
            implicit_h.push(h);
        }
        let mut stereo_order = stereo_order;
        stereo_order.resize(n, None);
        let mut graph = MoleculeGraph {
            atoms,
            bonds,
            rings: Vec::new(),
            implicit_h,
            adjacency,
            stereo_order,
            double_bond_stereo,
            fragments,
        };
        graph.rings = perceive_rings(&graph);
        Ok(graph)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, index: usize) -> &Atom {
        &self.atoms[index]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    /// Smallest set of smallest rings, each as an atom cycle.
    pub fn rings(&self) -> &[Vec<usize>] {
        &self.rings
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn fragment_count(&self) -> usize {
        self.fragments
    }

    /// `(neighbour, bond index)` pairs in bond-creation order.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.adjacency[a]
            .iter()
            .find(|&&(nb, _)| nb == b)
            .map(|&(_, i)| &self.bonds[i])
    }

    /// Hydrogens implied by the valence model for organic-subset atoms, or
    /// the bracket count for bracket atoms.
    pub fn implicit_hydrogens(&self, atom: usize) -> u8 {
        self.implicit_h[atom]
    }

    /// Implicit plus any explicit `[H]` neighbours.
    pub fn total_hydrogens(&self, atom: usize) -> u32 {
        let attached = self.adjacency[atom]
            .iter()
            .filter(|&&(nb, _)| self.atoms[nb].element == Element::H)
            .count() as u32;
        self.implicit_h[atom] as u32 + attached
    }

    pub fn heavy_degree(&self, atom: usize) -> usize {
        self.adjacency[atom]
            .iter()
            .filter(|&&(nb, _)| self.atoms[nb].element != Element::H)
            .count()
    }

    pub fn is_ring_atom(&self, atom: usize) -> bool {
        self.rings.iter().any(|r| r.contains(&atom))
    }

    pub fn is_ring_bond(&self, bond: usize) -> bool {
        let Bond { a, b, .. } = self.bonds[bond];
        self.rings.iter().any(|r| {
            let k = r.len();
            (0..k).any(|i| {
                let (x, y) = (r[i], r[(i + 1) % k]);
                (x == a && y == b) || (x == b && y == a)
            })
        })
    }

    pub fn stereo_order(&self, atom: usize) -> Option<&[Option<usize>]> {
        self.stereo_order[atom].as_deref()
    }

    pub fn double_bond_stereo(&self) -> &[DoubleBondStereo] {
        &self.double_bond_stereo
    }

    /// Renumber atoms so that old atom `i` becomes `perm[i]`.
    ///
    /// Panics if `perm` is not a permutation of `0..atom_count()`.
    pub fn permuted(&self, perm: &[usize]) -> MoleculeGraph {
        let n = self.atoms.len();
        assert_eq!(perm.len(), n, "permutation length mismatch");
        let mut seen = vec![false; n];
        for &p in perm {
            assert!(p < n && !seen[p], "not a permutation");
            seen[p] = true;
        }
        let mut atoms = vec![Atom::new(Element::C); n];
        for (old, atom) in self.atoms.iter().enumerate() {
            atoms[perm[old]] = atom.clone();
        }
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                ..b.clone()
            })
            .collect();
        let mut stereo_order = vec![None; n];
        for (old, order) in self.stereo_order.iter().enumerate() {
            stereo_order[perm[old]] = order
                .as_ref()
                .map(|o| o.iter().map(|s| s.map(|x| perm[x])).collect());
        }
        let double_bond_stereo = self
            .double_bond_stereo
            .iter()
            .map(|d| DoubleBondStereo {
                bond: d.bond,
                ref_a: perm[d.ref_a],
                ref_b: perm[d.ref_b],
            })
            .collect();
        MoleculeGraph::from_parts(atoms, bonds, stereo_order, double_bond_stereo)
            .expect("permutation preserves validity")
    }
}

fn label_fragments(atoms: &mut [Atom], adjacency: &[Vec<(usize, usize)>]) -> usize {
    let mut label = vec![usize::MAX; atoms.len()];
    let mut next = 0;
    for start in 0..atoms.len() {
        if label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = next;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adjacency[u] {
                if label[v] == usize::MAX {
                    label[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    for (atom, l) in atoms.iter_mut().zip(label) {
        atom.fragment = l;
    }
    next
}

/// Hydrogen count for an atom given the orders of its bonds. `Err` carries
/// the offending valence sum.
pub(crate) fn hydrogen_count(
    atom: &Atom,
    orders: impl Iterator<Item = BondOrder>,
) -> Result<u8, u8> {
    let orders: Vec<BondOrder> = orders.collect();
    let sum: u8 = orders.iter().map(|o| o.valence()).sum();
    if atom.bracket {
        check_bracket_valence(atom, sum)?;
        return Ok(atom.explicit_h);
    }
    let Some(valences) = atom.element.default_valences() else {
        return Ok(0);
    };
    let max = *valences.last().unwrap();
    if sum > max {
        return Err(sum);
    }
    if atom.aromatic {
        // atoms contributing one electron to the pi system use one valence
        // unit for it; o and s donate a lone pair instead
        let bonus = u8::from(matches!(
            atom.element,
            Element::B | Element::C | Element::N | Element::P
        ));
        let has_exocyclic_double = orders.contains(&BondOrder::Double);
        let lowest = valences[0];
        if !has_exocyclic_double && sum + bonus <= lowest {
            return Ok(lowest - sum - bonus);
        }
    }
    let target = valences.iter().copied().find(|&v| v >= sum).unwrap_or(max);
    Ok(target - sum)
}

fn check_bracket_valence(atom: &Atom, sum: u8) -> Result<(), u8> {
    let total = sum + atom.explicit_h;
    let q = atom.formal_charge;
    let max = match atom.element {
        Element::C => {
            if q == 0 {
                4
            } else {
                3
            }
        }
        Element::N => match q {
            0 => 5,
            1 => 4,
            -1 => 2,
            _ => return Ok(()),
        },
        Element::O => match q {
            0 => 2,
            1 => 3,
            -1 => 1,
            _ => return Ok(()),
        },
        _ => return Ok(()),
    };
    if total > max {
        Err(total)
    } else {
        Ok(())
    }
}
