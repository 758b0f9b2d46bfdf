use chemreward::dataset::{
    ingest_bytes, ingest_dataset, parse_label, sample_training_subset, stratified_quotas, ColumnNames, DatasetError,
    DatasetTable,
};
use proptest::prelude::*;

const CSV: &str = "id,SMILES,Label\n1,CCO,1\n2,c1ccccc1,0\n3,CC(=O)O,true\n4,CCN,2\n5,C1CC,0\n6,CCC\n";

fn table(task: &str, n: usize) -> DatasetTable {
    let body: String = (0..n).map(|i| format!("{},{}\n", "C".repeat(i % 30 + 1), i % 2)).collect();
    ingest_bytes(format!("smiles,label\n{body}").as_bytes(), task, task, &ColumnNames::default()).unwrap()
}

#[test]
fn ingest_skips_and_counts() {
    let t = ingest_bytes(CSV.as_bytes(), "mem", "bace", &ColumnNames::default()).unwrap();
    let labels: Vec<bool> = t.rows.iter().map(|r| r.label).collect();
    assert_eq!(labels, [true, false, true]);
    assert!(t.rows.iter().all(|r| r.task == "bace"));
    let s = t.provenance.skipped;
    assert_eq!((s.bad_label, s.bad_smiles, s.short_row), (1, 1, 1));
    assert_eq!(t.provenance.rows, 3);
    assert_eq!(t.provenance.sha256.len(), 64);
}

#[test]
fn file_ingest_hash_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.csv");
    std::fs::write(&p, CSV).unwrap();
    let a = ingest_dataset(&p, "t", &ColumnNames::default()).unwrap();
    let b = ingest_dataset(&p, "t", &ColumnNames::default()).unwrap();
    assert_eq!(a.provenance.sha256, b.provenance.sha256);
    assert_eq!(a.rows, b.rows);
    assert!(matches!(
        ingest_dataset(&dir.path().join("nope.csv"), "t", &ColumnNames::default()),
        Err(DatasetError::Io { .. })
    ));
}

#[test]
fn missing_column_and_empty_input() {
    let cols = ColumnNames { smiles: "smiles".into(), label: "active".into() };
    assert!(matches!(ingest_bytes(CSV.as_bytes(), "m", "t", &cols), Err(DatasetError::MissingColumn(c)) if c == "active"));
    assert!(matches!(
        ingest_bytes(b"smiles,label\nC1CC,1\n", "m", "t", &ColumnNames::default()),
        Err(DatasetError::NoRows(_))
    ));
}

#[test]
fn labels() {
    for (s, want) in [("1", Some(true)), (" TRUE ", Some(true)), ("no", Some(false)), ("0", Some(false)), ("2", None), ("", None)] {
        assert_eq!(parse_label(s), want, "{s:?}");
    }
}

#[test]
fn quotas() {
    assert_eq!(stratified_quotas(&[10, 10], 4), Some(vec![2, 2]));
    assert_eq!(stratified_quotas(&[5000; 4], 4000), Some(vec![1000; 4]));
    assert_eq!(stratified_quotas(&[1, 100], 10), Some(vec![1, 9]));
    assert_eq!(stratified_quotas(&[3, 3], 7), None);
}

#[test]
fn subset_is_seeded_and_stratified() {
    let tables = [table("a", 60), table("b", 60)];
    let x = sample_training_subset(&tables, 20, 9).unwrap();
    assert_eq!(x.rows, sample_training_subset(&tables, 20, 9).unwrap().rows);
    assert_eq!(x.rows.iter().filter(|r| r.task == "a").count(), 10);
    assert!(x.rows.iter().take(10).all(|r| r.task == "a"));
    assert!((0..20).any(|s| sample_training_subset(&tables, 20, s).unwrap().rows != x.rows));
    assert!(matches!(
        sample_training_subset(&tables, 121, 0),
        Err(DatasetError::Insufficient { wanted: 121, available: 120 })
    ));
}

proptest! {
    #[test]
    fn quotas_sum_and_respect_capacity(caps in proptest::collection::vec(0usize..50, 1..6), n in 0usize..200) {
        match stratified_quotas(&caps, n) {
            Some(q) => {
                prop_assert_eq!(q.iter().sum::<usize>(), n);
                prop_assert!(q.iter().zip(&caps).all(|(a, c)| a <= c));
                // no task is starved while another with room gets two more
                for i in 0..q.len() {
                    for j in 0..q.len() {
                        prop_assert!(q[i] == caps[i] || q[j] <= q[i] + 1);
                    }
                }
            }
            None => prop_assert!(caps.iter().sum::<usize>() < n),
        }
    }
}
