//! Newline-delimited JSON reward protocol shared by `serve`, the HTTP
//! endpoint and `reward eval`.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};
use std::sync::{mpsc, Mutex};
use std::thread;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Engine;
use crate::dataset::parse_label;
use crate::molgraph::parse_smiles;
use crate::promptkit::label_word;
use crate::reward::{RewardError, RewardRequest, RewardWeights};
use crate::PROTOCOL_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireExample {
    pub smiles: String,
    pub label: Value,
}

/// One request line. `label` accepts true/false, 1/0 or the strings
/// understood by [`parse_label`]. Without `fewshot`, examples are retrieved
/// from the configured store when both a store and a task are present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceRequest {
    #[serde(default)]
    pub id: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    pub smiles: String,
    pub label: Value,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fewshot: Option<Vec<WireExample>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<RewardWeights<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceResponse {
    pub protocol_version: u32,
    pub id: Value,
    pub r_ans: f64,
    pub r_fmt: f64,
    pub r_cons: f64,
    pub r_comp: f64,
    pub r_prin: f64,
    pub r_struct: f64,
    pub r_total: f64,
    pub answer: Option<String>,
    pub format_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceError {
    pub protocol_version: u32,
    pub id: Value,
    pub error: ErrorBody,
}

fn label_value(v: &Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(*b),
        Value::Number(n) => match n.as_u64() {
            Some(1) => Some(true),
            Some(0) => Some(false),
            _ => None,
        },
        Value::String(s) => parse_label(s),
        _ => None,
    }
}

fn fail(id: &Value, code: &str, message: String, line: usize) -> ServiceError {
    ServiceError {
        protocol_version: PROTOCOL_VERSION,
        id: id.clone(),
        error: ErrorBody {
            code: code.to_string(),
            message,
            line,
        },
    }
}

/// Scores one request. `line` is only used to position errors.
pub fn evaluate_request(engine: &Engine, req: &ServiceRequest, line: usize) -> Result<ServiceResponse, ServiceError> {
    let id = &req.id;
    if let Some(v) = req.protocol_version {
        if v != PROTOCOL_VERSION {
            return Err(fail(id, "protocol_version", format!("client speaks {v}, engine speaks {PROTOCOL_VERSION}"), line));
        }
    }
    let label = label_value(&req.label).ok_or_else(|| fail(id, "bad_label", format!("label {} is not True/False", req.label), line))?;
    let fewshot = match &req.fewshot {
        Some(rows) => rows
            .iter()
            .map(|e| {
                label_value(&e.label)
                    .map(|l| (e.smiles.clone(), l))
                    .ok_or_else(|| fail(id, "bad_label", format!("few-shot label {} is not True/False", e.label), line))
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => match (&engine.store, &req.task) {
            (Some(store), Some(task)) => {
                let g = parse_smiles(&req.smiles).map_err(|e| fail(id, "bad_smiles", e.to_string(), line))?;
                store
                    .top_k(&g, engine.config.top_k, task)
                    .map_err(|e| fail(id, "retrieval", e.to_string(), line))?
                    .into_iter()
                    .map(|n| (n.record.smiles.clone(), n.record.label))
                    .collect()
            }
            _ => Vec::new(),
        },
    };
    let rr = RewardRequest {
        molecule: req.smiles.clone(),
        label,
        response_text: req.response.clone(),
        fewshot,
        weights: req.weights.unwrap_or(engine.reward.config().weights),
    };
    let (b, parsed) = engine.reward.evaluate_detailed(&rr).map_err(|e| match e {
        RewardError::Molecule(_) => fail(id, "bad_smiles", e.to_string(), line),
        RewardError::Weights(_) => fail(id, "bad_weights", e.to_string(), line),
    })?;
    Ok(ServiceResponse {
        protocol_version: PROTOCOL_VERSION,
        id: id.clone(),
        r_ans: b.r_ans,
        r_fmt: b.r_fmt,
        r_cons: b.r_cons,
        r_comp: b.r_comp,
        r_prin: b.r_prin,
        r_struct: b.r_struct,
        r_total: b.r_total,
        answer: parsed.answer.map(|a| label_word(a).to_string()),
        format_ok: parsed.format_ok,
    })
}

/// One JSON line in, one JSON line out (without the newline).
pub fn handle_line(engine: &Engine, line_no: usize, line: &str) -> String {
    let out = match serde_json::from_str::<ServiceRequest>(line) {
        Ok(req) => match evaluate_request(engine, &req, line_no) {
            Ok(r) => serde_json::to_string(&r),
            Err(e) => serde_json::to_string(&e),
        },
        Err(e) => {
            // echo the id when the line is JSON but not a valid request
            let id = serde_json::from_str::<Value>(line)
                .ok()
                .and_then(|v| v.get("id").cloned())
                .unwrap_or(Value::Null);
            serde_json::to_string(&fail(&id, "bad_request", e.to_string(), line_no))
        }
    };
    out.expect("response serialises")
}

/// Reads request lines, scores them on `workers` threads and writes the
/// responses in request order. Blank lines are skipped but still count
/// toward line numbers. Returns the number of responses written.
pub fn serve_stream<R: BufRead, W: Write + Send>(engine: &Engine, mut input: R, output: W, workers: usize) -> io::Result<usize> {
    let workers = workers.max(1);
    let (job_tx, job_rx) = mpsc::sync_channel::<(usize, usize, String)>(workers * 4);
    let (out_tx, out_rx) = mpsc::sync_channel::<(usize, String)>(workers * 4);
    let job_rx = Mutex::new(job_rx);
    thread::scope(|s| {
        for _ in 0..workers {
            let (job_rx, out_tx) = (&job_rx, out_tx.clone());
            s.spawn(move || loop {
                let job = job_rx.lock().expect("job queue").recv();
                let Ok((seq, line_no, text)) = job else { break };
                if out_tx.send((seq, handle_line(engine, line_no, &text))).is_err() {
                    break;
                }
            });
        }
        drop(out_tx);
        let writer = s.spawn(move || -> io::Result<usize> {
            let mut out = output;
            let mut pending = BTreeMap::new();
            let mut next = 0;
            for (seq, resp) in out_rx {
                pending.insert(seq, resp);
                while let Some(r) = pending.remove(&next) {
                    out.write_all(r.as_bytes())?;
                    out.write_all(b"\n")?;
                    next += 1;
                }
                out.flush()?;
            }
            Ok(next)
        });

        let mut buf = Vec::new();
        let (mut seq, mut line_no) = (0, 0);
        let read_result = loop {
            buf.clear();
            match input.read_until(b'\n', &mut buf) {
                Ok(0) => break Ok(()),
                Ok(_) => {}
                Err(e) => break Err(e),
            }
            line_no += 1;
            let text = String::from_utf8_lossy(&buf);
            let text = text.trim();
            if text.is_empty() {
                continue;
            }
            if job_tx.send((seq, line_no, text.to_string())).is_err() {
                break Ok(());
            }
            seq += 1;
        };
        drop(job_tx);
        let written = writer.join().expect("writer thread");
        read_result?;
        written
    })
}

/// Whole NDJSON body in, whole NDJSON body out.
pub fn process_batch(engine: &Engine, body: &[u8], workers: usize) -> String {
    let mut out = Vec::new();
    serve_stream(engine, body, &mut out, workers).expect("in-memory streams do not fail");
    String::from_utf8(out).expect("responses are UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> Engine {
        Engine::builtin()
    }

    #[test]
    fn valid_line() {
        let e = engine();
        let out = handle_line(
            &e,
            1,
            r#"{"id":"a1","smiles":"CCO","label":true,"response":"<think>x</think><answer>True</answer>"}"#,
        );
        let r: ServiceResponse = serde_json::from_str(&out).unwrap();
        assert_eq!(r.r_total, 2.0);
        assert_eq!(r.answer.as_deref(), Some("True"));
        assert_eq!(r.id, Value::String("a1".into()));
        assert_eq!(r.protocol_version, PROTOCOL_VERSION);
    }

    #[test]
    fn errors_carry_line_and_id() {
        let e = engine();
        let err: ServiceError = serde_json::from_str(&handle_line(&e, 7, "{not json")).unwrap();
        assert_eq!((err.error.line, err.error.code.as_str()), (7, "bad_request"));
        let err: ServiceError =
            serde_json::from_str(&handle_line(&e, 3, r#"{"id":5,"smiles":"C1CC","label":1,"response":""}"#)).unwrap();
        assert_eq!((err.error.code.as_str(), err.id.clone()), ("bad_smiles", Value::from(5)));
        let err: ServiceError =
            serde_json::from_str(&handle_line(&e, 3, r#"{"id":5,"smiles":"C","label":"maybe","response":""}"#)).unwrap();
        assert_eq!(err.error.code, "bad_label");
        let err: ServiceError = serde_json::from_str(&handle_line(
            &e,
            3,
            r#"{"id":5,"smiles":"C","label":1,"response":"","protocol_version":9}"#,
        ))
        .unwrap();
        assert_eq!(err.error.code, "protocol_version");
        let err: ServiceError =
            serde_json::from_str(&handle_line(&e, 2, r#"{"id":"q","smiles":"C","label":1,"response":"","extra":1}"#)).unwrap();
        assert_eq!((err.error.code.as_str(), err.id.clone()), ("bad_request", Value::from("q")));
    }

    #[test]
    fn stream_keeps_order() {
        let e = engine();
        let mut body = String::new();
        for i in 0..200 {
            let ans = if i % 2 == 0 { "True" } else { "False" };
            body.push_str(&format!(
                "{{\"id\":{i},\"smiles\":\"c1ccccc1O\",\"label\":true,\"response\":\"<think>phenol</think><answer>{ans}</answer>\"}}\n"
            ));
            if i == 50 {
                body.push_str("\n garbage\n");
            }
        }
        let out = process_batch(&e, body.as_bytes(), 8);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 201);
        let v: Value = serde_json::from_str(lines[51]).unwrap();
        assert_eq!(v["error"]["line"], 53);
        let ids: Vec<u64> = lines
            .iter()
            .filter_map(|l| serde_json::from_str::<ServiceResponse>(l).ok())
            .map(|r| r.id.as_u64().unwrap())
            .collect();
        assert_eq!(ids, (0..200).collect::<Vec<_>>());
        assert_eq!(out, process_batch(&e, body.as_bytes(), 1));
    }
}
