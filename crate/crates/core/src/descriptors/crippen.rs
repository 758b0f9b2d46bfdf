use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use crate::molgraph::{aromatize, BondOrder, Element, MoleculeGraph};

use super::DescriptorError;

const BUILTIN: &str = include_str!("../../data/crippen.txt");

/// Every type name `classify` can return.
pub const ATOM_TYPES: &[&str] = &[
    "C_sp3", "C_sp3_branched", "C_sp3_hetero", "C_benzylic", "C_eq_hetero", "C_alkene",
    "C_alkyne", "C_other", "c_H", "c_fused", "c_sub", "c_N", "c_O", "c_exo", "N_primary",
    "N_secondary", "N_tertiary", "N_sp2", "N_nitrile", "N_cation_H", "N_cation", "N_other", "n",
    "n_cation", "o", "O_hydroxyl", "O_acid_hydroxyl", "O_ether", "O_aryl_ether", "O_carbonyl",
    "O_carbonyl_conj", "O_carbonyl_hetero", "O_on_N", "O_on_S", "O_carboxylate", "O_anion",
    "O_other", "F", "Cl", "Br", "I", "ion", "P", "S", "S_oxidized", "s", "other",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    pub heavy: f64,
    pub per_h: f64,
}

#[derive(Debug, Clone)]
pub struct CrippenTable {
    pub version: u32,
    entries: HashMap<String, Contribution>,
}

impl CrippenTable {
    pub fn parse(text: &str) -> Result<CrippenTable, DescriptorError> {
        let mut version = None;
        let mut entries = HashMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |m: &str| DescriptorError::Table {
                line: k + 1,
                message: m.to_string(),
            };
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols[0] == "version" {
                version = Some(cols.get(1).and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad version"))?);
                continue;
            }
            if cols.len() != 3 {
                return Err(bad("expected: type heavy per_h"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
            let c = Contribution {
                heavy: num(cols[1])?,
                per_h: num(cols[2])?,
            };
            if entries.insert(cols[0].to_string(), c).is_some() {
                return Err(bad("duplicate type"));
            }
        }
        let version = version.ok_or(DescriptorError::Table {
            line: 0,
            message: "missing version line".into(),
        })?;
        for t in ATOM_TYPES {
            if !entries.contains_key(*t) {
                return Err(DescriptorError::Table {
                    line: 0,
                    message: format!("missing atom type {t}"),
                });
            }
        }
        Ok(CrippenTable { version, entries })
    }

    pub fn from_file(path: &Path) -> Result<CrippenTable, DescriptorError> {
        let text = std::fs::read_to_string(path).map_err(|e| DescriptorError::Table {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        CrippenTable::parse(&text)
    }

    pub fn builtin() -> &'static CrippenTable {
        static TABLE: OnceLock<CrippenTable> = OnceLock::new();
        TABLE.get_or_init(|| CrippenTable::parse(BUILTIN).expect("shipped crippen table is valid"))
    }

    pub fn get(&self, atom_type: &str) -> Contribution {
        self.entries[atom_type]
    }

    /// LogP as the sum of per-atom contributions, hydrogens included.
    pub fn logp(&self, g: &MoleculeGraph) -> f64 {
        let g = &*aromatize(g);
        super::ordered_sum((0..g.atom_count()).map(|i| self.atom_contribution(g, i)))
    }

    pub fn atom_contribution(&self, g: &MoleculeGraph, i: usize) -> f64 {
        // explicit hydrogen atoms are folded into their neighbour's H count
        if g.atom(i).element == Element::H {
            return 0.0;
        }
        let c = self.get(classify(g, i));
        c.heavy + c.per_h * g.total_hydrogens(i) as f64
    }
}

/// LogP under the shipped table.
pub fn crippen_logp(g: &MoleculeGraph) -> f64 {
    CrippenTable::builtin().logp(g)
}

fn is_hetero(e: Element) -> bool {
    matches!(e, Element::N | Element::O | Element::P | Element::S) || e.is_halogen()
}

/// Heavy neighbours as (atom, bond order, ring bond).
fn heavy_neighbors(g: &MoleculeGraph, i: usize) -> Vec<(usize, BondOrder, bool)> {
    g.neighbors(i)
        .iter()
        .filter(|&&(v, _)| g.atom(v).element != Element::H)
        .map(|&(v, b)| (v, g.bonds()[b].order, g.is_ring_bond(b)))
        .collect()
}

fn has_double_to(g: &MoleculeGraph, i: usize, pred: impl Fn(Element) -> bool) -> bool {
    g.neighbors(i)
        .iter()
        .any(|&(v, b)| g.bonds()[b].order == BondOrder::Double && pred(g.atom(v).element))
}

/// Reduced atom typing, first matching rule wins.
pub fn classify(g: &MoleculeGraph, i: usize) -> &'static str {
    let a = g.atom(i);
    let nbrs = heavy_neighbors(g, i);
    let h = g.total_hydrogens(i);
    match a.element {
        Element::C if a.aromatic => {
            if nbrs.iter().any(|&(_, o, _)| o == BondOrder::Double) {
                return "c_exo";
            }
            if h > 0 {
                return "c_H";
            }
            match nbrs.iter().find(|&&(_, _, ring)| !ring) {
                None => "c_fused",
                Some(&(v, _, _)) => match g.atom(v).element {
                    Element::N => "c_N",
                    Element::O => "c_O",
                    _ => "c_sub",
                },
            }
        }
        Element::C => {
            if nbrs.iter().any(|&(_, o, _)| o == BondOrder::Triple) {
                return "C_alkyne";
            }
            let double: Vec<usize> = nbrs
                .iter()
                .filter(|&&(_, o, _)| o == BondOrder::Double)
                .map(|&(v, _, _)| v)
                .collect();
            if double
                .iter()
                .any(|&v| g.atom(v).element != Element::C && !g.atom(v).aromatic)
            {
                return "C_eq_hetero";
            }
            if !double.is_empty() {
                return "C_alkene";
            }
            if nbrs.iter().any(|&(_, o, _)| o == BondOrder::Aromatic) {
                return "C_other";
            }
            if nbrs.iter().any(|&(v, _, _)| g.atom(v).aromatic) {
                return "C_benzylic";
            }
            if nbrs.iter().any(|&(v, _, _)| is_hetero(g.atom(v).element)) {
                return "C_sp3_hetero";
            }
            if h >= 2 {
                "C_sp3"
            } else {
                "C_sp3_branched"
            }
        }
        Element::N if a.aromatic => {
            if a.formal_charge > 0 {
                "n_cation"
            } else {
                "n"
            }
        }
        Element::N => {
            if a.formal_charge > 0 {
                return if h > 0 { "N_cation_H" } else { "N_cation" };
            }
            if a.formal_charge < 0 {
                return "N_other";
            }
            if nbrs.iter().any(|&(_, o, _)| o == BondOrder::Triple) {
                return "N_nitrile";
            }
            if nbrs.iter().any(|&(_, o, _)| o == BondOrder::Double) {
                return "N_sp2";
            }
            match (nbrs.len(), h) {
                (1, 2) => "N_primary",
                (2, 1) => "N_secondary",
                (3, 0) => "N_tertiary",
                _ => "N_other",
            }
        }
        Element::O if a.aromatic => "o",
        Element::O => classify_oxygen(g, i, &nbrs, h),
        Element::F | Element::CL | Element::BR | Element::I => {
            if a.formal_charge != 0 {
                return "ion";
            }
            match a.element {
                Element::F => "F",
                Element::CL => "Cl",
                Element::BR => "Br",
                _ => "I",
            }
        }
        Element::P => "P",
        Element::S if a.aromatic => "s",
        Element::S => {
            let oxidised = a.formal_charge != 0
                || has_double_to(g, i, |e| {
                    matches!(e, Element::N | Element::O | Element::P | Element::S)
                });
            if oxidised {
                "S_oxidized"
            } else {
                "S"
            }
        }
        // alkali metal cations
        e if a.formal_charge > 0 && matches!(e.atomic_number(), 3 | 11 | 19 | 37 | 55) => "ion",
        _ => "other",
    }
}

fn classify_oxygen(
    g: &MoleculeGraph,
    i: usize,
    nbrs: &[(usize, BondOrder, bool)],
    h: u32,
) -> &'static str {
    let a = g.atom(i);
    if a.formal_charge < 0 {
        let Some(&(v, _, _)) = nbrs.first() else {
            return "O_anion";
        };
        return match g.atom(v).element {
            Element::N => "O_on_N",
            Element::S => "O_on_S",
            Element::C if has_double_to(g, v, |e| e == Element::O) => "O_carboxylate",
            _ => "O_anion",
        };
    }
    if let Some(&(v, _, _)) = nbrs.iter().find(|&&(_, o, _)| o == BondOrder::Double) {
        let partner = g.atom(v);
        return match partner.element {
            Element::N | Element::O => "O_on_N",
            Element::S => "O_on_S",
            Element::C if partner.aromatic => "O_carbonyl_conj",
            Element::C => {
                let others: Vec<usize> = heavy_neighbors(g, v)
                    .into_iter()
                    .map(|(w, _, _)| w)
                    .filter(|&w| w != i)
                    .collect();
                if others.len() == 2 && others.iter().all(|&w| g.atom(w).element != Element::C) {
                    "O_carbonyl_hetero"
                } else if others.iter().any(|&w| g.atom(w).aromatic) {
                    "O_carbonyl_conj"
                } else {
                    "O_carbonyl"
                }
            }
            _ => "O_other",
        };
    }
    if h > 0 {
        // H on an O whose neighbour carries a double bond (acids, enols) or
        // on a peroxide/sulfur-bound O
        let acidic = nbrs.iter().any(|&(v, _, _)| {
            let e = g.atom(v).element;
            matches!(e, Element::O | Element::S)
                || (e == Element::C && !g.atom(v).aromatic && has_double_to(g, v, |_| true))
        });
        return if acidic { "O_acid_hydroxyl" } else { "O_hydroxyl" };
    }
    if nbrs.len() == 2 {
        return if nbrs.iter().any(|&(v, _, _)| g.atom(v).aromatic) {
            "O_aryl_ether"
        } else {
            "O_ether"
        };
    }
    "O_other"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn logp(s: &str) -> f64 {
        crippen_logp(&parse_smiles(s).unwrap())
    }

    #[test]
    fn methane_is_a_table_constant() {
        let t = CrippenTable::builtin();
        let c = t.get("C_sp3");
        assert_eq!(logp("C"), c.heavy + 4.0 * c.per_h);
        assert!((logp("C") - 0.6361).abs() < 1e-12);
    }

    #[test]
    fn types() {
        let g = parse_smiles("CC(=O)O").unwrap();
        let t: Vec<_> = (0..4).map(|i| classify(&g, i)).collect();
        assert_eq!(t, ["C_sp3", "C_eq_hetero", "O_carbonyl", "O_acid_hydroxyl"]);
        let g = parse_smiles("Oc1ccccc1").unwrap();
        assert_eq!(classify(&g, 0), "O_hydroxyl");
        assert_eq!(classify(&g, 1), "c_O");
        assert_eq!(classify(&g, 2), "c_H");
        let g = parse_smiles("c1ccc2ccccc2c1").unwrap();
        assert_eq!(classify(&g, 3), "c_fused");
        let g = parse_smiles("[Na+].[Cl-]").unwrap();
        assert_eq!(classify(&g, 0), "ion");
        assert_eq!(classify(&g, 1), "ion");
    }

    #[test]
    fn ordering() {
        assert!(logp("CCCCCCCC") > logp("CO"));
        assert!(logp("CO") < 0.0);
        assert!((logp("c1ccccc1") - 1.6866).abs() < 1e-9);
    }

    #[test]
    fn table_rejects_missing_types() {
        assert!(CrippenTable::parse("version 1\nC_sp3 0.1 0.1\n").is_err());
        assert!(CrippenTable::parse("C_sp3 0.1 0.1\n").is_err());
    }
}
