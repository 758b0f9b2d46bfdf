use chemreward::descriptors::{
    crippen_logp, descriptor_report, lipinski_report, morgan_fingerprint, tanimoto, Fingerprint,
};
use chemreward::molgraph::parse_smiles;
use proptest::prelude::*;

const LOGP_TOLERANCE: f64 = 0.7;

fn reference_panel() -> Vec<(String, String, f64)> {
    let text = include_str!("fixtures/logp_reference.csv");
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].to_string(), r[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn logp_tracks_reference_panel() {
    let panel = reference_panel();
    assert_eq!(panel.len(), 20);
    for (name, smiles, reference) in panel {
        let ours = crippen_logp(&parse_smiles(&smiles).unwrap());
        println!("{name:16} ours {ours:8.4} reference {reference:8.4} delta {:+.4}", ours - reference);
        assert!((ours - reference).abs() <= LOGP_TOLERANCE, "{name}: {ours} vs {reference}");
    }
}

// (smiles, hbd, hba, formula) with the weight summed by hand from standard
// atomic masses: C 12.011, H 1.008, N 14.007, O 15.999.
const HAND: &[(&str, u32, u32, [u32; 4])] = &[
    ("CCO", 1, 1, [2, 6, 0, 1]),
    ("CC(=O)Oc1ccccc1C(=O)O", 1, 4, [9, 8, 0, 4]),
    ("CC(=O)Nc1ccc(O)cc1", 2, 2, [8, 9, 1, 2]),
    ("Cn1cnc2c1c(=O)n(C)c(=O)n2C", 0, 3, [8, 10, 4, 2]),
    ("c1ccncc1", 0, 1, [5, 5, 1, 0]),
    ("c1cc[nH]c1", 1, 0, [4, 5, 1, 0]),
    ("NC(N)=O", 2, 1, [1, 4, 2, 1]),
    ("CN(C)C(=N)NC(=N)N", 4, 5, [4, 11, 5, 0]),
];

#[test]
fn donors_acceptors_and_weight_match_hand_counts() {
    for &(s, hbd, hba, [c, h, n, o]) in HAND {
        let r = descriptor_report(&parse_smiles(s).unwrap());
        let mw = c as f64 * 12.011 + h as f64 * 1.008 + n as f64 * 14.007 + o as f64 * 15.999;
        assert_eq!((r.hbd, r.hba), (hbd, hba), "{s}");
        assert!((r.mol_weight - mw).abs() < 1e-9, "{s}: {} vs {mw}", r.mol_weight);
    }
}

#[test]
fn kekule_and_aromatic_forms_agree() {
    let a = descriptor_report(&parse_smiles("c1ccccc1O").unwrap());
    let k = descriptor_report(&parse_smiles("C1=CC=CC=C1O").unwrap());
    assert_eq!(a, k);
}

#[test]
fn lipinski_weight_boundary_is_inclusive() {
    let mut r = descriptor_report(&parse_smiles("CCO").unwrap());
    r.mol_weight = 500.0;
    assert!(lipinski_report(&r).mol_weight_ok);
    r.mol_weight = f64::from_bits(500.0f64.to_bits() + 1);
    let l = lipinski_report(&r);
    assert!(!l.mol_weight_ok && !l.pass);
    r.mol_weight = 499.999;
    r.hbd = 6;
    let l = lipinski_report(&r);
    assert!(l.mol_weight_ok && !l.hbd_ok && !l.pass);
}

fn corpus_smiles() -> Vec<String> {
    include_str!("fixtures/corpus.smi")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').nth(1).unwrap().to_string())
        .collect()
}

fn fp(s: &str) -> Fingerprint {
    morgan_fingerprint(&parse_smiles(s).unwrap(), 2, 2048).unwrap()
}

proptest! {
    #[test]
    fn tanimoto_is_a_similarity(a in proptest::sample::select(corpus_smiles()), b in proptest::sample::select(corpus_smiles())) {
        let (fa, fb) = (fp(&a), fp(&b));
        let ab = tanimoto(&fa, &fb).unwrap();
        prop_assert_eq!(ab, tanimoto(&fb, &fa).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(tanimoto(&fa, &fa).unwrap(), 1.0);
    }

    #[test]
    fn fingerprint_ignores_atom_order(s in proptest::sample::select(corpus_smiles()), seed in any::<u64>()) {
        let g = parse_smiles(&s).unwrap();
        let n = g.atom_count();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut x = seed | 1;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (x >> 33) as usize % (i + 1));
        }
        let p = g.permuted(&perm);
        prop_assert_eq!(morgan_fingerprint(&g, 2, 1024).unwrap(), morgan_fingerprint(&p, 2, 1024).unwrap());
        prop_assert_eq!(descriptor_report(&g), descriptor_report(&p));
    }
}
