//! HTTP face of the reward service: POST an NDJSON body, get NDJSON back
//! in the same order. GET /health reports versions.

use serde_json::json;
use tiny_http::{Header, Method, Response, Server};

use chemreward::config::Engine;
use chemreward::service::process_batch;
use chemreward::{ENGINE_VERSION, PROTOCOL_VERSION};

fn header(k: &str, v: &str) -> Header {
    Header::from_bytes(k.as_bytes(), v.as_bytes()).expect("static header")
}

pub fn serve_http(engine: &Engine, bind: &str, workers: usize) -> Result<(), String> {
    let server = Server::http(bind).map_err(|e| format!("{bind}: {e}"))?;
    // tests bind port 0 and read the real address from here
    eprintln!("{}", json!({"listening": server.server_addr().to_string()}));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| {
                while let Ok(mut req) = server.recv() {
                    let resp = match (req.method(), req.url()) {
                        (Method::Get, "/health") => Response::from_string(
                            json!({"status": "ok", "protocol_version": PROTOCOL_VERSION, "engine_version": ENGINE_VERSION})
                                .to_string(),
                        )
                        .with_header(header("Content-Type", "application/json")),
                        (Method::Post, "/" | "/reward") => {
                            let mut body = Vec::new();
                            match req.as_reader().read_to_end(&mut body) {
                                Ok(_) => Response::from_string(process_batch(engine, &body, 1))
                                    .with_header(header("Content-Type", "application/x-ndjson")),
                                Err(e) => Response::from_string(e.to_string()).with_status_code(400),
                            }
                        }
                        _ => Response::from_string(
                            json!({"protocol_version": PROTOCOL_VERSION,
                                "error": {"code": "not_found", "message": "POST /reward or GET /health"}})
                            .to_string(),
                        )
                        .with_status_code(404),
                    };
                    let _ = req.respond(resp);
                }
            });
        }
    });
    Ok(())
}
