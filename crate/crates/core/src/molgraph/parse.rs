use std::collections::BTreeMap;

use super::{
    Atom, Bond, BondOrder, BondStereo, Chirality, DoubleBondStereo, Element, MoleculeGraph,
    SmilesError, SmilesErrorKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BondSymbol {
    Single,
    Double,
    Triple,
    Aromatic,
    Up,
    Down,
}

impl BondSymbol {
    fn order(self) -> BondOrder {
        match self {
            BondSymbol::Single | BondSymbol::Up | BondSymbol::Down => BondOrder::Single,
            BondSymbol::Double => BondOrder::Double,
            BondSymbol::Triple => BondOrder::Triple,
            BondSymbol::Aromatic => BondOrder::Aromatic,
        }
    }

    fn direction(self) -> Option<bool> {
        match self {
            BondSymbol::Up => Some(true),
            BondSymbol::Down => Some(false),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Atom(usize),
    Hydrogen,
    Ring(u16),
}

struct RingOpen {
    atom: usize,
    symbol: Option<BondSymbol>,
    offset: usize,
    slot: usize,
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    atom_offsets: Vec<usize>,
    bonds: Vec<Bond>,
    /// (from, to, up) for every bond written with `/` or `\`.
    directions: Vec<Option<(usize, usize, bool)>>,
    slots: Vec<Vec<Slot>>,
    rings: BTreeMap<u16, RingOpen>,
}

/// Parse a SMILES string into a [`MoleculeGraph`].
///
/// Supports the Daylight subset used by common benchmark files: organic and
/// bracket atoms, branches, ring closures (including `%nn`), all bond
/// symbols except `$`, tetrahedral `@`/`@@` and `/` `\` double-bond stereo,
/// and `.`-separated fragments. Wildcards and reaction arrows are rejected.
pub fn parse_smiles(text: &str) -> Result<MoleculeGraph, SmilesError> {
    let trimmed = text.trim_end_matches(['\n', '\r']);
    if trimmed.is_empty() {
        return Err(SmilesError::new(0, SmilesErrorKind::Empty));
    }
    let mut parser = Parser {
        input: trimmed.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        atom_offsets: Vec::new(),
        bonds: Vec::new(),
        directions: Vec::new(),
        slots: Vec::new(),
        rings: BTreeMap::new(),
    };
    parser.run()?;
    parser.finish()
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn err<T>(&self, offset: usize, kind: SmilesErrorKind) -> Result<T, SmilesError> {
        Err(SmilesError::new(offset, kind))
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        let mut prev: Option<usize> = None;
        let mut pending: Option<(BondSymbol, usize)> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();
        // set right after '(' so that ')' immediately following is caught
        let mut branch_open = false;
        let mut fragment_start = true;

        while let Some(c) = self.peek() {
            let offset = self.pos;
            match c {
                b'(' => {
                    let Some(p) = prev else {
                        return self.err(offset, SmilesErrorKind::UnexpectedChar('('));
                    };
                    if pending.is_some() {
                        return self.err(offset, SmilesErrorKind::DanglingBond);
                    }
                    branches.push((p, offset));
                    branch_open = true;
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return self.err(offset, SmilesErrorKind::DanglingBond);
                    }
                    if branch_open {
                        return self.err(offset, SmilesErrorKind::EmptyBranch);
                    }
                    let Some((p, _)) = branches.pop() else {
                        return self.err(offset, SmilesErrorKind::UnmatchedParenthesis);
                    };
                    prev = Some(p);
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() {
                        return self.err(offset, SmilesErrorKind::DanglingBond);
                    }
                    if !branches.is_empty() {
                        let (_, open) = *branches.last().unwrap();
                        return self.err(open, SmilesErrorKind::UnmatchedParenthesis);
                    }
                    if fragment_start {
                        return self.err(offset, SmilesErrorKind::UnexpectedChar('.'));
                    }
                    prev = None;
                    fragment_start = true;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if pending.is_some() || prev.is_none() {
                        return self.err(offset, SmilesErrorKind::UnexpectedChar(c as char));
                    }
                    let symbol = match c {
                        b'-' => BondSymbol::Single,
                        b'=' => BondSymbol::Double,
                        b'#' => BondSymbol::Triple,
                        b':' => BondSymbol::Aromatic,
                        b'/' => BondSymbol::Up,
                        _ => BondSymbol::Down,
                    };
                    pending = Some((symbol, offset));
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(p) = prev else {
                        return self.err(offset, SmilesErrorKind::UnexpectedChar(c as char));
                    };
                    if branch_open {
                        return self.err(offset, SmilesErrorKind::UnexpectedChar(c as char));
                    }
                    let digit = self.ring_number()?;
                    self.ring_closure(p, digit, pending.take().map(|(s, _)| s), offset)?;
                }
                b'*' | b'>' | b'$' | b'&' | b'?' => {
                    return self.err(offset, SmilesErrorKind::Unsupported(c as char));
                }
                _ => {
                    let atom = self.atom()?;
                    if let Some(p) = prev {
                        let symbol = pending.take().map(|(s, _)| s);
                        self.add_bond(p, atom, symbol, offset)?;
                        self.slots[atom].insert(0, Slot::Atom(p));
                        self.slots[p].push(Slot::Atom(atom));
                    } else if let Some((_, off)) = pending {
                        return self.err(off, SmilesErrorKind::DanglingBond);
                    }
                    prev = Some(atom);
                    branch_open = false;
                    fragment_start = false;
                }
            }
        }
        if let Some((_, off)) = pending {
            return self.err(off, SmilesErrorKind::DanglingBond);
        }
        if let Some(&(_, open)) = branches.last() {
            return self.err(open, SmilesErrorKind::UnmatchedParenthesis);
        }
        if let Some((&digit, open)) = self.rings.iter().min_by_key(|(_, r)| r.offset) {
            return self.err(open.offset, SmilesErrorKind::UnclosedRing(digit));
        }
        if fragment_start {
            return self.err(self.input.len(), SmilesErrorKind::UnexpectedChar('.'));
        }
        Ok(())
    }

    fn ring_number(&mut self) -> Result<u16, SmilesError> {
        let offset = self.pos;
        if self.peek() == Some(b'%') {
            let digits = self.input.get(offset + 1..offset + 3);
            match digits {
                Some([a, b]) if a.is_ascii_digit() && b.is_ascii_digit() => {
                    self.pos += 3;
                    Ok(((a - b'0') * 10 + (b - b'0')) as u16)
                }
                _ => self.err(offset, SmilesErrorKind::UnexpectedChar('%')),
            }
        } else {
            let d = self.input[offset] - b'0';
            self.pos += 1;
            Ok(d as u16)
        }
    }

    fn ring_closure(
        &mut self,
        atom: usize,
        digit: u16,
        symbol: Option<BondSymbol>,
        offset: usize,
    ) -> Result<(), SmilesError> {
        match self.rings.remove(&digit) {
            None => {
                let slot = self.slots[atom].len();
                self.slots[atom].push(Slot::Ring(digit));
                self.rings.insert(
                    digit,
                    RingOpen {
                        atom,
                        symbol,
                        offset,
                        slot,
                    },
                );
                Ok(())
            }
            Some(open) => {
                let chosen = match (open.symbol, symbol) {
                    (Some(a), Some(b)) if a.order() != b.order() => {
                        return self.err(offset, SmilesErrorKind::RingBondMismatch)
                    }
                    (Some(a), None) => Some((a, open.atom, atom)),
                    (_, Some(b)) => Some((b, atom, open.atom)),
                    (None, None) => None,
                };
                if open.atom == atom {
                    return self.err(offset, SmilesErrorKind::SelfBond);
                }
                let (sym, from, to) = match chosen {
                    Some((s, f, t)) => (Some(s), f, t),
                    None => (None, open.atom, atom),
                };
                self.add_bond(from, to, sym, offset)?;
                // the bond was recorded as (from, to); keep a/b as written
                self.slots[open.atom][open.slot] = Slot::Atom(atom);
                self.slots[atom].push(Slot::Atom(open.atom));
                Ok(())
            }
        }
    }

    fn add_bond(
        &mut self,
        from: usize,
        to: usize,
        symbol: Option<BondSymbol>,
        offset: usize,
    ) -> Result<(), SmilesError> {
        if from == to {
            return self.err(offset, SmilesErrorKind::SelfBond);
        }
        if self
            .bonds
            .iter()
            .any(|b| (b.a == from && b.b == to) || (b.a == to && b.b == from))
        {
            return self.err(offset, SmilesErrorKind::DuplicateBond);
        }
        let order = match symbol {
            Some(s) => s.order(),
            None if self.atoms[from].aromatic && self.atoms[to].aromatic => BondOrder::Aromatic,
            None => BondOrder::Single,
        };
        self.bonds.push(Bond {
            a: from,
            b: to,
            order,
            stereo: BondStereo::None,
        });
        self.directions
            .push(symbol.and_then(|s| s.direction()).map(|up| (from, to, up)));
        Ok(())
    }

    fn push_atom(&mut self, atom: Atom, offset: usize) -> usize {
        let index = self.atoms.len();
        self.atoms.push(atom);
        self.atom_offsets.push(offset);
        self.slots.push(Vec::new());
        index
    }

    fn atom(&mut self) -> Result<usize, SmilesError> {
        let offset = self.pos;
        let c = self.input[offset];
        if c == b'[' {
            return self.bracket_atom();
        }
        let two = self.input.get(offset..offset + 2);
        let (element, aromatic, len) = match (c, two) {
            (b'C', Some(b"Cl")) => (Element::CL, false, 2),
            (b'B', Some(b"Br")) => (Element::BR, false, 2),
            (b'B', _) => (Element::B, false, 1),
            (b'C', _) => (Element::C, false, 1),
            (b'N', _) => (Element::N, false, 1),
            (b'O', _) => (Element::O, false, 1),
            (b'P', _) => (Element::P, false, 1),
            (b'S', _) => (Element::S, false, 1),
            (b'F', _) => (Element::F, false, 1),
            (b'I', _) => (Element::I, false, 1),
            (b'b', _) => (Element::B, true, 1),
            (b'c', _) => (Element::C, true, 1),
            (b'n', _) => (Element::N, true, 1),
            (b'o', _) => (Element::O, true, 1),
            (b'p', _) => (Element::P, true, 1),
            (b's', _) => (Element::S, true, 1),
            _ if c.is_ascii_alphabetic() => {
                let mut end = offset + 1;
                if self.input.get(end).is_some_and(|b| b.is_ascii_lowercase()) {
                    end += 1;
                }
                let sym = String::from_utf8_lossy(&self.input[offset..end]).into_owned();
                return self.err(offset, SmilesErrorKind::UnknownElement(sym));
            }
            _ => {
                let ch = std::str::from_utf8(&self.input[offset..])
                    .ok()
                    .and_then(|s| s.chars().next())
                    .unwrap_or(c as char);
                return self.err(offset, SmilesErrorKind::UnexpectedChar(ch));
            }
        };
        self.pos += len;
        let mut atom = Atom::new(element);
        atom.aromatic = aromatic;
        Ok(self.push_atom(atom, offset))
    }

    fn bracket_atom(&mut self) -> Result<usize, SmilesError> {
        let start = self.pos;
        let Some(rel_end) = self.input[start..].iter().position(|&b| b == b']') else {
            return self.err(start, SmilesErrorKind::InvalidBracket);
        };
        let body = &self.input[start + 1..start + rel_end];
        let mut i = 0;
        let at = |i: usize| body.get(i).copied();

        let mut isotope: Option<u16> = None;
        while let Some(d) = at(i).filter(u8::is_ascii_digit) {
            let v = isotope.unwrap_or(0) as u32 * 10 + (d - b'0') as u32;
            if v > 999 {
                return self.err(start + 1 + i, SmilesErrorKind::InvalidBracket);
            }
            isotope = Some(v as u16);
            i += 1;
        }

        let sym_off = start + 1 + i;
        let (element, aromatic) = match at(i) {
            Some(b'*') => return self.err(sym_off, SmilesErrorKind::Unsupported('*')),
            Some(u) if u.is_ascii_uppercase() => {
                let two = at(i + 1)
                    .filter(u8::is_ascii_lowercase)
                    .and_then(|l| {
                        let s = [u, l];
                        Element::from_symbol(std::str::from_utf8(&s).ok()?)
                    });
                if let Some(e) = two {
                    i += 2;
                    (e, false)
                } else {
                    let s = [u];
                    let Some(e) = Element::from_symbol(std::str::from_utf8(&s).unwrap()) else {
                        return self.err(
                            sym_off,
                            SmilesErrorKind::UnknownElement((u as char).to_string()),
                        );
                    };
                    i += 1;
                    (e, false)
                }
            }
            Some(l) if l.is_ascii_lowercase() => {
                let two = at(i + 1).filter(u8::is_ascii_lowercase).and_then(|l2| {
                    let s = [l.to_ascii_uppercase(), l2];
                    Element::from_symbol(std::str::from_utf8(&s).ok()?)
                        .filter(|e| e.can_be_aromatic())
                });
                if let Some(e) = two {
                    i += 2;
                    (e, true)
                } else {
                    let s = [l.to_ascii_uppercase()];
                    match Element::from_symbol(std::str::from_utf8(&s).unwrap())
                        .filter(|e| e.can_be_aromatic())
                    {
                        Some(e) => {
                            i += 1;
                            (e, true)
                        }
                        None => {
                            return self.err(
                                sym_off,
                                SmilesErrorKind::UnknownElement((l as char).to_string()),
                            )
                        }
                    }
                }
            }
            _ => return self.err(sym_off, SmilesErrorKind::InvalidBracket),
        };

        let mut chirality = Chirality::None;
        if at(i) == Some(b'@') {
            i += 1;
            if at(i) == Some(b'@') {
                i += 1;
                chirality = Chirality::Clockwise;
            } else if body[i..].starts_with(b"TH1") {
                i += 3;
                chirality = Chirality::CounterClockwise;
            } else if body[i..].starts_with(b"TH2") {
                i += 3;
                chirality = Chirality::Clockwise;
            } else if at(i).is_some_and(|b| b.is_ascii_uppercase() && b != b'H') {
                return self.err(start + 1 + i, SmilesErrorKind::Unsupported('@'));
            } else {
                chirality = Chirality::CounterClockwise;
            }
        }

        let mut h = 0u8;
        if at(i) == Some(b'H') {
            i += 1;
            h = 1;
            if let Some(d) = at(i).filter(u8::is_ascii_digit) {
                h = d - b'0';
                i += 1;
            }
        }

        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = at(i) {
            let unit = if sign == b'+' { 1 } else { -1 };
            i += 1;
            if let Some(d) = at(i).filter(u8::is_ascii_digit) {
                let mut v = (d - b'0') as i32;
                i += 1;
                if let Some(d2) = at(i).filter(u8::is_ascii_digit) {
                    v = v * 10 + (d2 - b'0') as i32;
                    i += 1;
                }
                charge = unit * v;
            } else {
                charge = unit;
                while at(i) == Some(sign) {
                    charge += unit;
                    i += 1;
                }
            }
        }
        if charge.abs() > 4 {
            return self.err(start + 1 + i, SmilesErrorKind::InvalidCharge);
        }

        // atom class, ignored
        if at(i) == Some(b':') {
            i += 1;
            let digits = body[i..].iter().take_while(|b| b.is_ascii_digit()).count();
            if digits == 0 {
                return self.err(start + 1 + i, SmilesErrorKind::InvalidBracket);
            }
            i += digits;
        }
        if i != body.len() {
            let off = start + 1 + i;
            return self.err(off, SmilesErrorKind::InvalidBracket);
        }

        self.pos = start + rel_end + 1;
        let mut atom = Atom::new(element);
        atom.aromatic = aromatic;
        atom.isotope = isotope;
        atom.explicit_h = h;
        atom.formal_charge = charge as i8;
        atom.chirality = chirality;
        atom.bracket = true;
        let index = self.push_atom(atom, start);
        if h > 0 {
            self.slots[index].push(Slot::Hydrogen);
        }
        Ok(index)
    }

    fn finish(mut self) -> Result<MoleculeGraph, SmilesError> {
        let double_bond_stereo = self.assign_double_bond_stereo();
        let stereo_order = self
            .atoms
            .iter()
            .zip(&self.slots)
            .map(|(atom, slots)| {
                atom.chirality.is_set().then(|| {
                    slots
                        .iter()
                        .filter_map(|s| match *s {
                            Slot::Atom(a) => Some(Some(a)),
                            Slot::Hydrogen => Some(None),
                            Slot::Ring(_) => None,
                        })
                        .collect()
                })
            })
            .collect();
        let offsets = self.atom_offsets;
        MoleculeGraph::from_parts(self.atoms, self.bonds, stereo_order, double_bond_stereo)
            .map_err(|mut e| {
                if let SmilesErrorKind::ValenceViolation { atom, .. } = e.kind {
                    e.offset = offsets[atom];
                }
                e
            })
    }

    fn assign_double_bond_stereo(&mut self) -> Vec<DoubleBondStereo> {
        let mut out = Vec::new();
        for i in 0..self.bonds.len() {
            if self.bonds[i].order != BondOrder::Double {
                continue;
            }
            let (a, b) = (self.bonds[i].a, self.bonds[i].b);
            let Some((x, dir_a)) = self.reference(a, b, true) else {
                continue;
            };
            let Some((y, dir_b)) = self.reference(b, a, false) else {
                continue;
            };
            self.bonds[i].stereo = if dir_a == dir_b {
                BondStereo::Trans
            } else {
                BondStereo::Cis
            };
            out.push(DoubleBondStereo {
                bond: i,
                ref_a: x,
                ref_b: y,
            });
        }
        out
    }

    /// First directional bond on `end` (excluding the double bond partner),
    /// with its direction normalised to "neighbour -> end" when `incoming`,
    /// else "end -> neighbour".
    fn reference(&self, end: usize, partner: usize, incoming: bool) -> Option<(usize, bool)> {
        self.bonds
            .iter()
            .zip(&self.directions)
            .filter_map(|(bond, dir)| {
                let (from, to, up) = (*dir)?;
                let touches = bond.a == end || bond.b == end;
                let other = bond.other(end);
                if !touches || other == partner {
                    return None;
                }
                let written_into_end = to == end && from == other;
                let dir = if written_into_end == incoming { up } else { !up };
                Some((other, dir))
            })
            .next()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BACE: &str = "ClC1=CC(=CC(Cl)=C1NC(=O)C)CNC(=[NH2+1])NC(=O)CN2C3=C(C=CC=C3)C=C2";

    #[test]
    fn methane() {
        let g = parse_smiles("C").unwrap();
        assert_eq!(g.atom_count(), 1);
        assert_eq!(g.bond_count(), 0);
        assert_eq!(g.implicit_hydrogens(0), 4);
    }

    #[test]
    fn benzene() {
        let g = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(g.atom_count(), 6);
        assert!(g.atoms().iter().all(|a| a.aromatic && a.element == Element::C));
        assert_eq!(g.rings().len(), 1);
        assert_eq!(g.rings()[0].len(), 6);
        assert!((0..6).all(|i| g.implicit_hydrogens(i) == 1));
        assert!(g.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
    }

    #[test]
    fn bace_molecule() {
        let g = parse_smiles(BACE).unwrap();
        let cl = g.atoms().iter().filter(|a| a.element == Element::CL).count();
        assert_eq!(cl, 2);
        let charged: Vec<_> = g.atoms().iter().filter(|a| a.formal_charge != 0).collect();
        assert_eq!(charged.len(), 1);
        assert_eq!(charged[0].element, Element::N);
        assert_eq!(charged[0].formal_charge, 1);
        assert_eq!(charged[0].explicit_h, 2);
        assert!(g.rings().len() >= 3);
    }

    #[test]
    fn positioned_errors() {
        let e = parse_smiles("C(").unwrap_err();
        assert_eq!(e.kind, SmilesErrorKind::UnmatchedParenthesis);
        assert_eq!(e.offset, 1);
        let e = parse_smiles("CC)").unwrap_err();
        assert_eq!((e.code(), e.offset), ("unmatched_parenthesis", 2));
        let e = parse_smiles("C1CC").unwrap_err();
        assert_eq!((e.code(), e.offset), ("unmatched_ring_closure", 1));
        let e = parse_smiles("CXC").unwrap_err();
        assert_eq!((e.code(), e.offset), ("unknown_element", 1));
        let e = parse_smiles("C*C").unwrap_err();
        assert_eq!((e.code(), e.offset), ("unsupported_construct", 1));
        let e = parse_smiles("CC>CC").unwrap_err();
        assert_eq!((e.code(), e.offset), ("unsupported_construct", 2));
        let e = parse_smiles("[Xy]").unwrap_err();
        assert_eq!((e.code(), e.offset), ("unknown_element", 1));
        let e = parse_smiles("C=").unwrap_err();
        assert_eq!((e.code(), e.offset), ("dangling_bond", 1));
        let e = parse_smiles("").unwrap_err();
        assert_eq!(e.code(), "empty_input");
        let e = parse_smiles("C()C").unwrap_err();
        assert_eq!((e.code(), e.offset), ("empty_branch", 2));
        let e = parse_smiles("[C").unwrap_err();
        assert_eq!((e.code(), e.offset), ("invalid_bracket_atom", 0));
        let e = parse_smiles("C11").unwrap_err();
        assert_eq!(e.code(), "self_bond");
        let e = parse_smiles("C12CC12").unwrap_err();
        assert_eq!(e.code(), "duplicate_bond");
        let e = parse_smiles("C=1CC-1").unwrap_err();
        assert_eq!(e.code(), "ring_bond_mismatch");
        let e = parse_smiles("CCC(C)(C)(C)C").unwrap_err();
        assert_eq!((e.code(), e.offset), ("valence_violation", 2));
    }

    #[test]
    fn bracket_atoms() {
        let g = parse_smiles("[13CH3][O-]").unwrap();
        assert_eq!(g.atom(0).isotope, Some(13));
        assert_eq!(g.atom(0).explicit_h, 3);
        assert_eq!(g.atom(1).formal_charge, -1);
        let g = parse_smiles("[Fe++]").unwrap();
        assert_eq!(g.atom(0).formal_charge, 2);
        let g = parse_smiles("[NH4+:12]").unwrap();
        assert_eq!(g.atom(0).explicit_h, 4);
        let g = parse_smiles("c1cc[se]c1").unwrap();
        assert_eq!(g.atom(3).element.symbol(), "Se");
        assert!(g.atom(3).aromatic);
        let g = parse_smiles("[Cu]").unwrap();
        assert_eq!(g.atom(0).element.symbol(), "Cu");
    }

    #[test]
    fn ring_closure_percent_and_bond_symbols() {
        let g = parse_smiles("C%10CC%10").unwrap();
        assert_eq!(g.rings().len(), 1);
        let g = parse_smiles("C=1CCCC1").unwrap();
        assert_eq!(g.bond_between(0, 4).unwrap().order, BondOrder::Double);
        let g = parse_smiles("c1ccccc1-c1ccccc1").unwrap();
        assert_eq!(g.bond_between(5, 6).unwrap().order, BondOrder::Single);
    }

    #[test]
    fn stereo_tags() {
        let g = parse_smiles("N[C@@H](C)C(=O)O").unwrap();
        assert_eq!(g.atom(1).chirality, Chirality::Clockwise);
        assert_eq!(g.stereo_order(1).unwrap(), &[Some(0), None, Some(2), Some(3)]);
        let g = parse_smiles("F/C=C/F").unwrap();
        assert_eq!(g.bond_between(1, 2).unwrap().stereo, BondStereo::Trans);
        let g = parse_smiles(r"F/C=C\F").unwrap();
        assert_eq!(g.bond_between(1, 2).unwrap().stereo, BondStereo::Cis);
        let g = parse_smiles("C(/F)=C/F").unwrap();
        assert_eq!(g.bond_between(0, 2).unwrap().stereo, BondStereo::Cis);
        let g = parse_smiles("FC=CF").unwrap();
        assert_eq!(g.bond_between(1, 2).unwrap().stereo, BondStereo::None);
    }

    #[test]
    fn deterministic() {
        assert_eq!(parse_smiles(BACE).unwrap(), parse_smiles(BACE).unwrap());
    }
}
