//! Fingerprints, similarity and physicochemical descriptors.

mod crippen;
mod fingerprint;

pub use crippen::{classify as crippen_type, crippen_logp, Contribution, CrippenTable, ATOM_TYPES};
pub use fingerprint::{
    morgan_fingerprint, tanimoto, Fingerprint, DEFAULT_RADIUS, DEFAULT_WIDTH, HASH_VERSION,
};

use serde::{Deserialize, Serialize};

use crate::molgraph::{aromatize, BondOrder, Element, MoleculeGraph};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DescriptorError {
    #[error("fingerprint width {0} is not a power of two >= 64")]
    BadWidth(usize),
    #[error("fingerprint widths differ ({0} vs {1})")]
    WidthMismatch(usize, usize),
    #[error("descriptor table line {line}: {message}")]
    Table { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorReport {
    pub logp: f64,
    pub mol_weight: f64,
    pub hbd: u32,
    pub hba: u32,
    pub aromatic_rings: u32,
    pub aliphatic_rings: u32,
    pub stereocenters: u32,
    pub heavy_atoms: u32,
}

pub const LIPINSKI_MAX_MW: f64 = 500.0;
pub const LIPINSKI_MAX_LOGP: f64 = 5.0;
pub const LIPINSKI_MAX_HBD: u32 = 5;
pub const LIPINSKI_MAX_HBA: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LipinskiReport {
    pub mol_weight_ok: bool,
    pub logp_ok: bool,
    pub hbd_ok: bool,
    pub hba_ok: bool,
    pub pass: bool,
}

const H_MASS: f64 = 1.008;

/// Nitrogen bonded to a carbon that carries a C=O.
fn is_amide_nitrogen(g: &MoleculeGraph, i: usize) -> bool {
    g.neighbors(i).iter().any(|&(c, b)| {
        g.bonds()[b].order == BondOrder::Single
            && g.atom(c).element == Element::C
            && g.neighbors(c).iter().any(|&(o, b2)| {
                g.bonds()[b2].order == BondOrder::Double && g.atom(o).element == Element::O
            })
    })
}

/// Aromatic nitrogen whose lone pair is part of the ring: [nH] or n with
/// three heavy connections.
fn is_pyrrole_nitrogen(g: &MoleculeGraph, i: usize) -> bool {
    let a = g.atom(i);
    a.aromatic && a.element == Element::N && (g.total_hydrogens(i) > 0 || g.heavy_degree(i) == 3)
}

pub fn is_hbond_acceptor(g: &MoleculeGraph, i: usize) -> bool {
    match g.atom(i).element {
        Element::O => true,
        Element::N => !is_pyrrole_nitrogen(g, i) && !is_amide_nitrogen(g, i),
        _ => false,
    }
}

pub fn is_hbond_donor(g: &MoleculeGraph, i: usize) -> bool {
    matches!(g.atom(i).element, Element::O | Element::N) && g.total_hydrogens(i) >= 1
}

/// Sums in sorted order so the result does not depend on atom numbering.
pub(crate) fn ordered_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = xs.collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

pub fn descriptor_report(g: &MoleculeGraph) -> DescriptorReport {
    descriptor_report_with(g, CrippenTable::builtin())
}

/// Kekulé-written aromatic rings are normalised first, see [`aromatize`].
pub fn descriptor_report_with(g: &MoleculeGraph, table: &CrippenTable) -> DescriptorReport {
    let g = &*aromatize(g);
    let n = g.atom_count();
    let mol_weight = ordered_sum((0..n).map(|i| g.atom(i).element.atomic_mass() + H_MASS * g.implicit_hydrogens(i) as f64));
    let aromatic_rings = g
        .rings()
        .iter()
        .filter(|r| r.iter().all(|&a| g.atom(a).aromatic))
        .count() as u32;
    DescriptorReport {
        logp: table.logp(g),
        mol_weight,
        hbd: (0..n).filter(|&i| is_hbond_donor(g, i)).count() as u32,
        hba: (0..n).filter(|&i| is_hbond_acceptor(g, i)).count() as u32,
        aromatic_rings,
        aliphatic_rings: g.rings().len() as u32 - aromatic_rings,
        stereocenters: g.atoms().iter().filter(|a| a.chirality.is_set()).count() as u32,
        heavy_atoms: g.atoms().iter().filter(|a| a.element != Element::H).count() as u32,
    }
}

pub fn lipinski_report(r: &DescriptorReport) -> LipinskiReport {
    let mol_weight_ok = r.mol_weight <= LIPINSKI_MAX_MW;
    let logp_ok = r.logp <= LIPINSKI_MAX_LOGP;
    let hbd_ok = r.hbd <= LIPINSKI_MAX_HBD;
    let hba_ok = r.hba <= LIPINSKI_MAX_HBA;
    LipinskiReport {
        mol_weight_ok,
        logp_ok,
        hbd_ok,
        hba_ok,
        pass: mol_weight_ok && logp_ok && hbd_ok && hba_ok,
    }
}
