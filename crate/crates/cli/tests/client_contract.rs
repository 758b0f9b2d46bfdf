//! What a trainer-side client relies on: the line service and the one-shot
//! CLI give the same answer for the same request, errors included, and
//! advantages pass through unchanged.

use std::io::Write;
use std::process::{Command, Stdio};

use serde_json::{json, Value};

const MOLECULES: &[&str] = &["CCO", "CC(=O)Nc1ccc(O)cc1", "c1ccncc1", "CC(=O)Oc1ccccc1C(=O)O", "C1CC", "Clc1ccccc1"];
const RESPONSES: &[&str] = &[
    "<think>The phenol is a donor and the ring is aromatic, similar to CC(=O)Nc1ccccc1.</think><answer>True</answer>",
    "<think>Hydrophobic and small.</think><answer>False</answer>",
    "just False",
];

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_chemreward"));
    c.env_remove("CHEMREWARD_CONFIG");
    c
}

struct Case {
    id: String,
    smiles: &'static str,
    label: &'static str,
    response: &'static str,
    fewshot: Option<(&'static str, &'static str)>,
}

fn cases() -> Vec<Case> {
    (0..100)
        .map(|i| Case {
            id: format!("r{i}"),
            smiles: MOLECULES[i % MOLECULES.len()],
            label: ["True", "False", "1", "maybe"][i % 4],
            response: RESPONSES[i % RESPONSES.len()],
            fewshot: (i % 7 < 3).then_some(("CC(=O)Nc1ccccc1", "True")),
        })
        .collect()
}

fn service_line(c: &Case) -> String {
    let mut v = json!({"id": c.id, "task": "bace", "smiles": c.smiles, "label": c.label, "response": c.response});
    if let Some((s, l)) = c.fewshot {
        v["fewshot"] = json!([{"smiles": s, "label": l}]);
    }
    v.to_string()
}

#[test]
fn batch_matches_one_shot_cli() {
    let cases = cases();
    let input: String = cases.iter().map(|c| service_line(c) + "\n").collect();
    let mut child = bin().arg("serve").stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    let batch: Vec<Value> = String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(batch.len(), cases.len());

    let dir = tempfile::tempdir().unwrap();
    let mut errors = 0;
    for (c, from_batch) in cases.iter().zip(&batch) {
        let rf = dir.path().join(format!("{}.txt", c.id));
        std::fs::write(&rf, c.response).unwrap();
        let mut cmd = bin();
        cmd.args(["reward", "eval", "--task", "bace", "--molecule", c.smiles, "--label", c.label, "--id", &c.id]);
        if let Some((s, l)) = c.fewshot {
            cmd.arg("--fewshot").arg(format!("{s}={l}"));
        }
        let one = cmd.arg("--response-file").arg(&rf).output().unwrap();
        let from_cli: Value = if one.status.success() {
            serde_json::from_slice(&one.stdout).unwrap()
        } else {
            errors += 1;
            serde_json::from_slice(&one.stderr).unwrap()
        };
        assert_eq!(from_batch["id"], c.id.as_str());
        if from_batch.get("error").is_some() {
            // positions differ (line n vs 1); everything else must agree
            assert_eq!(from_batch["error"]["code"], from_cli["error"]["code"], "{}", c.id);
            assert_eq!(from_batch["error"]["message"], from_cli["error"]["message"], "{}", c.id);
            assert_eq!(from_batch["id"], from_cli["id"]);
        } else {
            assert_eq!(from_batch, &from_cli, "{}", c.id);
        }
    }
    // "maybe" labels and the unparseable ring both surface as errors
    assert!(errors >= 25, "{errors}");
}

#[test]
fn advantages_pass_through_exactly() {
    let groups = [("a", vec![1.0f64, 0.0, 1.0, 0.0]), ("b", vec![0.25, 0.25, 0.25]), ("c", vec![0.1, 2.9, 1.7])];
    let input: String = groups.iter().map(|(p, r)| json!({"prompt_id": p, "rewards": r}).to_string() + "\n").collect();
    let mut child = bin().args(["grpo", "advantages"]).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    for ((p, r), line) in groups.iter().zip(String::from_utf8(out.stdout).unwrap().lines()) {
        let v: Value = serde_json::from_str(line).unwrap();
        let direct = chemreward::grpo::advantages(&chemreward::grpo::RolloutGroup::new(p, r.clone())).unwrap();
        let via_cli: Vec<f64> = v["advantages"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert_eq!(
            via_cli.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            direct.values.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }
}

#[test]
fn version_mismatch_is_reported_per_item() {
    let lines = [
        json!({"id": 1, "protocol_version": 1, "smiles": "CCO", "label": true, "response": ""}).to_string(),
        json!({"id": 2, "protocol_version": 9, "smiles": "CCO", "label": true, "response": ""}).to_string(),
    ];
    let mut child = bin().arg("serve").stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all((lines.join("\n") + "\n").as_bytes()).unwrap();
    let out = String::from_utf8(child.wait_with_output().unwrap().stdout).unwrap();
    let v: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(v[0]["r_total"].is_number());
    assert_eq!(v[1]["error"]["code"], "protocol_version");
    assert_eq!(v[1]["id"], 2);
}
