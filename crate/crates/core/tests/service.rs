use chemreward::config::{Engine, EngineConfig};
use chemreward::retrieval::{build_store, LabeledMolecule};
use chemreward::service::{handle_line, process_batch, serve_stream};
use serde_json::{json, Value};

const RESPONSES: &[&str] = &[
    "<think>The amide and the phenol suggest activity.</think><answer>True</answer>",
    "<think>Too lipophilic, unlikely to bind.</think><answer>False</answer>",
    "no tags at all, just True",
    "<answer>True</answer><think>backwards</think>",
];

const MOLECULES: &[&str] = &["CCO", "CC(=O)Nc1ccc(O)cc1", "c1ccncc1", "CC(=O)Oc1ccccc1C(=O)O", "C1CC"];

fn request_lines(n: usize) -> String {
    (0..n)
        .map(|i| {
            let mut line = json!({
                "id": i,
                "smiles": MOLECULES[i % MOLECULES.len()],
                "label": i % 3 == 0,
                "response": RESPONSES[i % RESPONSES.len()],
            })
            .to_string();
            if i % 97 == 50 {
                line = "{not json".into();
            }
            line + "\n"
        })
        .collect()
}

#[test]
fn thousand_requests_keep_order_and_ids() {
    let engine = Engine::builtin();
    let input = request_lines(1000);
    let out = process_batch(&engine, input.as_bytes(), 6);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 1000);
    for (i, l) in lines.iter().enumerate() {
        let v: Value = serde_json::from_str(l).unwrap();
        if i % 97 == 50 {
            assert_eq!(v["error"]["code"], "bad_request");
            assert_eq!(v["error"]["line"], i + 1);
        } else if i % MOLECULES.len() == 4 {
            assert_eq!(v["error"]["code"], "bad_smiles");
            assert_eq!(v["id"], i);
        } else {
            assert_eq!(v["id"], i, "line {i}");
            assert!(v["r_total"].is_number());
        }
        // same text as scoring the line alone
        let single = handle_line(&engine, i + 1, input.lines().nth(i).unwrap());
        assert_eq!(*l, single);
    }
}

#[test]
fn output_is_byte_identical_across_worker_counts() {
    let engine = Engine::builtin();
    let input = request_lines(300);
    let reference = process_batch(&engine, input.as_bytes(), 1);
    for workers in [2, 3, 8, 16] {
        let mut out = Vec::new();
        let n = serve_stream(&engine, input.as_bytes(), &mut out, workers).unwrap();
        assert_eq!(n, 300);
        assert_eq!(String::from_utf8(out).unwrap(), reference, "{workers} workers");
    }
}

#[test]
fn blank_lines_count_toward_positions() {
    let engine = Engine::builtin();
    let out = process_batch(&engine, b"\n\n{\"id\":\"x\"}\n", 1);
    let v: Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["error"]["line"], 3);
    assert_eq!(v["id"], "x");
}

#[test]
fn missing_fewshot_is_filled_from_the_store() {
    let rows: Vec<LabeledMolecule> = ["CC(=O)Nc1ccc(O)cc1", "CC(=O)Nc1ccccc1", "CCCCCCCCO"]
        .iter()
        .map(|s| LabeledMolecule { smiles: s.to_string(), label: true, task: "bace".into() })
        .collect();
    let (store, _) = build_store(&rows, 2, 2048).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.crxs");
    store.save(&path).unwrap();
    let with_store = Engine::load(EngineConfig { store: Some(path), top_k: 2, ..EngineConfig::default() }).unwrap();
    let plain = Engine::builtin();

    let response = "<think>Compared with CC(=O)Nc1ccc(O)cc1 the methoxy group adds bulk.</think><answer>True</answer>";
    let req = json!({"id": 1, "task": "bace", "smiles": "CC(=O)Nc1ccc(OC)cc1", "label": true, "response": response}).to_string();
    let a: Value = serde_json::from_str(&handle_line(&with_store, 1, &req)).unwrap();
    let b: Value = serde_json::from_str(&handle_line(&plain, 1, &req)).unwrap();
    assert_eq!(a["r_comp"], 1.0);
    assert_eq!(b["r_comp"], 0.0);

    // explicit few-shot rows win over the store
    let explicit = json!({"id": 2, "task": "bace", "smiles": "CC(=O)Nc1ccc(OC)cc1", "label": true,
        "response": response, "fewshot": []})
    .to_string();
    let c: Value = serde_json::from_str(&handle_line(&with_store, 1, &explicit)).unwrap();
    assert_eq!(c["r_comp"], 0.0);

    let unknown = json!({"task": "nope", "smiles": "CCO", "label": 1, "response": ""}).to_string();
    let d: Value = serde_json::from_str(&handle_line(&with_store, 4, &unknown)).unwrap();
    assert_eq!(d["error"]["code"], "retrieval");
    assert_eq!(d["error"]["line"], 4);
}

#[test]
fn version_and_label_errors() {
    let engine = Engine::builtin();
    let v: Value = serde_json::from_str(&handle_line(
        &engine,
        1,
        r#"{"id":7,"protocol_version":2,"smiles":"C","label":true,"response":""}"#,
    ))
    .unwrap();
    assert_eq!((v["error"]["code"].as_str(), v["id"].as_i64()), (Some("protocol_version"), Some(7)));
    let v: Value =
        serde_json::from_str(&handle_line(&engine, 1, r#"{"smiles":"C","label":"maybe","response":""}"#)).unwrap();
    assert_eq!(v["error"]["code"], "bad_label");
    let v: Value = serde_json::from_str(&handle_line(
        &engine,
        1,
        r#"{"smiles":"C","label":1,"response":"","weights":{"lambda1":-1,"lambda2":0,"lambda3":0}}"#,
    ))
    .unwrap();
    assert_eq!(v["error"]["code"], "bad_weights", "{v}");
}
