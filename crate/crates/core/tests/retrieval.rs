use chemreward::descriptors::Fingerprint;
use chemreward::molgraph::{aromatize, is_isomorphic, parse_smiles, MoleculeGraph};
use chemreward::retrieval::{build_store, ExampleStore, LabeledMolecule, RetrievalError};
use proptest::prelude::*;

const FRAGMENTS: &[&str] = &[
    "C", "CC", "O", "N", "c1ccccc1", "C(=O)", "C1CCCCC1", "C(C)C", "N(C)", "S", "c1ccncc1", "C(F)(F)", "OC",
];

struct Lcg(u64);

impl Lcg {
    fn next(&mut self, n: usize) -> usize {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 33) as usize % n
    }
}

/// Small molecules built by chaining fragments. Duplicates are kept on
/// purpose so equal similarities occur.
fn synthetic_rows(n: usize, seed: u64, task: &str) -> Vec<LabeledMolecule> {
    let mut rng = Lcg(seed);
    (0..n)
        .map(|_| {
            let len = 1 + rng.next(5);
            let smiles: String = (0..len).map(|_| FRAGMENTS[rng.next(FRAGMENTS.len())]).collect();
            LabeledMolecule { smiles, label: rng.next(2) == 1, task: task.into() }
        })
        .collect()
}

fn tanimoto_oracle(a: &Fingerprint, b: &Fingerprint) -> f64 {
    let both: u32 = a.words().iter().zip(b.words()).map(|(x, y)| (x & y).count_ones()).sum();
    let either: u32 = a.words().iter().zip(b.words()).map(|(x, y)| (x | y).count_ones()).sum();
    if either == 0 {
        1.0
    } else {
        both as f64 / either as f64
    }
}

/// Full scan: skip isomorphic records, sort by similarity then ordinal.
fn scan(store: &ExampleStore, graphs: &[MoleculeGraph], query: &str, k: usize, task: &str) -> Vec<(u32, f64)> {
    let q = parse_smiles(query).unwrap();
    let qa = aromatize(&q);
    let qfp = chemreward::descriptors::morgan_fingerprint(&q, store.params().radius, store.params().width).unwrap();
    let mut all: Vec<(u32, f64)> = store
        .records()
        .iter()
        .zip(graphs)
        .filter(|(r, _)| r.task == task)
        .filter(|(_, g)| !is_isomorphic(g, &qa))
        .map(|(r, _)| r)
        .map(|r| (r.ordinal, tanimoto_oracle(&qfp, &r.fingerprint)))
        .collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

#[test]
fn top_k_matches_exhaustive_scan() {
    let mut rows = synthetic_rows(1000, 11, "bace");
    rows.extend(synthetic_rows(200, 12, "bbbp"));
    let (store, report) = build_store(&rows, 2, 2048).unwrap();
    assert_eq!(report.stored, 1200);
    let graphs: Vec<MoleculeGraph> =
        store.records().iter().map(|r| aromatize(&parse_smiles(&r.smiles).unwrap()).into_owned()).collect();
    let queries = synthetic_rows(100, 99, "bace");
    for q in &queries {
        let got: Vec<(u32, f64)> = store
            .top_k(&parse_smiles(&q.smiles).unwrap(), 5, "bace")
            .unwrap()
            .iter()
            .map(|n| (n.record.ordinal, n.similarity))
            .collect();
        assert_eq!(got, scan(&store, &graphs, &q.smiles, 5, "bace"), "query {}", q.smiles);
    }
}

#[test]
fn tasks_are_separate_and_unknown_task_errors() {
    let mut rows = synthetic_rows(50, 1, "a");
    rows.extend(synthetic_rows(50, 2, "b"));
    let (store, _) = build_store(&rows, 2, 1024).unwrap();
    let q = parse_smiles("CCOc1ccccc1").unwrap();
    assert!(store.top_k(&q, 5, "b").unwrap().iter().all(|n| n.record.task == "b"));
    assert!(matches!(store.top_k(&q, 5, "zzz"), Err(RetrievalError::UnknownTask(_))));
    assert!(matches!(store.top_k(&q, 0, "a"), Err(RetrievalError::ZeroK)));
}

#[test]
fn query_molecule_is_never_its_own_neighbour() {
    let rows: Vec<_> = ["c1ccccc1O", "Oc1ccccc1", "C1=CC=CC=C1O", "c1ccccc1N", "CCO"]
        .iter()
        .map(|s| LabeledMolecule { smiles: s.to_string(), label: true, task: "t".into() })
        .collect();
    let (store, _) = build_store(&rows, 2, 2048).unwrap();
    let hits = store.top_k(&parse_smiles("Oc1ccccc1").unwrap(), 5, "t").unwrap();
    let smiles: Vec<&str> = hits.iter().map(|n| n.record.smiles.as_str()).collect();
    assert_eq!(smiles, ["c1ccccc1N", "CCO"]);
}

#[test]
fn store_file_round_trip_and_rejects_garbage() {
    let (store, _) = build_store(&synthetic_rows(100, 5, "t"), 2, 512).unwrap();
    let mut bytes = Vec::new();
    store.write_to(&mut bytes).unwrap();
    assert_eq!(ExampleStore::read_from(&mut bytes.as_slice()).unwrap(), store);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.crxs");
    store.save(&path).unwrap();
    assert_eq!(ExampleStore::load(&path).unwrap(), store);

    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(ExampleStore::read_from(&mut bad.as_slice()), Err(RetrievalError::Format(_))));
    let truncated = &bytes[..bytes.len() - 3];
    assert!(ExampleStore::read_from(&mut &truncated[..]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn results_sorted_bounded_and_deterministic(seed in any::<u64>(), k in 1usize..12) {
        let (store, _) = build_store(&synthetic_rows(150, seed, "t"), 2, 1024).unwrap();
        let q = &synthetic_rows(1, seed ^ 0xabc, "t")[0];
        let g = parse_smiles(&q.smiles).unwrap();
        let a = store.top_k(&g, k, "t").unwrap();
        prop_assert!(a.len() <= k);
        for w in a.windows(2) {
            prop_assert!(w[0].similarity > w[1].similarity
                || (w[0].similarity == w[1].similarity && w[0].record.ordinal < w[1].record.ordinal));
        }
        prop_assert_eq!(a, store.top_k(&g, k, "t").unwrap());
    }
}
