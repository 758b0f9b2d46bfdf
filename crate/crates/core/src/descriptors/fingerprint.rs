use serde::{Deserialize, Serialize};

use crate::molgraph::{aromatize, Element, MoleculeGraph};

use super::DescriptorError;

/// Bumped whenever identifier hashing changes; stored in example-store
/// headers so stale fingerprints are rejected rather than compared.
pub const HASH_VERSION: u32 = 1;
pub const DEFAULT_RADIUS: u32 = 2;
pub const DEFAULT_WIDTH: usize = 2048;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over little-endian encoded words.
fn fnv1a(words: &[u64]) -> u64 {
    let mut h = FNV_OFFSET;
    for w in words {
        for byte in w.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    width: usize,
    radius: u32,
    words: Vec<u64>,
}

impl Fingerprint {
    pub fn empty(width: usize, radius: u32) -> Result<Fingerprint, DescriptorError> {
        if !width.is_power_of_two() || width < 64 {
            return Err(DescriptorError::BadWidth(width));
        }
        Ok(Fingerprint {
            width,
            radius,
            words: vec![0; width / 64],
        })
    }

    pub fn from_words(width: usize, radius: u32, words: Vec<u64>) -> Result<Fingerprint, DescriptorError> {
        let mut fp = Fingerprint::empty(width, radius)?;
        if words.len() != fp.words.len() {
            return Err(DescriptorError::BadWidth(width));
        }
        fp.words = words;
        Ok(fp)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn set(&mut self, bit: usize) {
        let bit = bit % self.width;
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.width && self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn popcount(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn on_bits(&self) -> Vec<usize> {
        (0..self.width).filter(|&b| self.get(b)).collect()
    }
}

fn initial_invariant(g: &MoleculeGraph, i: usize) -> u64 {
    let a = g.atom(i);
    fnv1a(&[
        a.element.atomic_number() as u64,
        g.heavy_degree(i) as u64,
        a.formal_charge as i64 as u64,
        g.total_hydrogens(i) as u64,
        g.is_ring_atom(i) as u64,
        a.aromatic as u64,
    ])
}

/// Circular (Morgan/ECFP-style) fingerprint.
///
/// Round 0 hashes (Z, heavy degree, charge, total H, in-ring, aromatic).
/// Each later round hashes (round, own id, sorted (bond code, neighbour id)).
/// Identifiers of every round 0..=radius are folded in as `id mod width`.
/// Kekulé-written aromatic rings are normalised first.
pub fn morgan_fingerprint(g: &MoleculeGraph, radius: u32, width: usize) -> Result<Fingerprint, DescriptorError> {
    let mut fp = Fingerprint::empty(width, radius)?;
    let g = &*aromatize(g);
    let heavy: Vec<usize> = (0..g.atom_count())
        .filter(|&i| g.atom(i).element != Element::H)
        .collect();
    let mut ids: Vec<u64> = (0..g.atom_count()).map(|i| initial_invariant(g, i)).collect();
    for &i in &heavy {
        fp.set((ids[i] % width as u64) as usize);
    }
    for round in 1..=radius {
        let next: Vec<u64> = (0..g.atom_count())
            .map(|i| {
                let mut env: Vec<(u64, u64)> = g
                    .neighbors(i)
                    .iter()
                    .filter(|&&(v, _)| g.atom(v).element != Element::H)
                    .map(|&(v, b)| (g.bonds()[b].order.code() as u64, ids[v]))
                    .collect();
                env.sort_unstable();
                let mut words = vec![round as u64, ids[i]];
                for (code, id) in env {
                    words.push(code);
                    words.push(id);
                }
                fnv1a(&words)
            })
            .collect();
        ids = next;
        for &i in &heavy {
            fp.set((ids[i] % width as u64) as usize);
        }
    }
    Ok(fp)
}

/// |a ∧ b| / |a ∨ b|; two empty fingerprints score 0.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, DescriptorError> {
    if a.width != b.width {
        return Err(DescriptorError::WidthMismatch(a.width, b.width));
    }
    let (mut both, mut either) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        both += (x & y).count_ones();
        either += (x | y).count_ones();
    }
    Ok(if either == 0 {
        0.0
    } else {
        both as f64 / either as f64
    })
}
