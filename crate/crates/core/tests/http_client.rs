use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use progfc::handlers::{
    CompletionClient, HandlerError, HttpCompletionClient, LmEndpointConfig, SamplingParams,
};

/// Serves canned `(status, body)` responses in order, one per connection,
/// recording each request body.
fn serve(responses: Vec<(u16, String)>) -> (String, Arc<AtomicUsize>, Arc<Mutex<Vec<String>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let hits = Arc::new(AtomicUsize::new(0));
    let bodies = Arc::new(Mutex::new(Vec::new()));
    let (h, b) = (hits.clone(), bodies.clone());
    thread::spawn(move || {
        for (status, body) in responses {
            let Ok((mut stream, _)) = listener.accept() else {
                return;
            };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut req = vec![0; len];
            reader.read_exact(&mut req).unwrap();
            b.lock().unwrap().push(String::from_utf8(req).unwrap());
            h.fetch_add(1, Ordering::SeqCst);
            let reply = format!(
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
        }
    });
    (format!("http://{addr}/v1"), hits, bodies)
}

fn config(base_url: String, max_retries: u32) -> LmEndpointConfig {
    LmEndpointConfig {
        base_url,
        max_retries,
        retry_backoff_ms: vec![1],
        timeout_secs: 5.0,
        ..Default::default()
    }
}

fn params() -> SamplingParams {
    SamplingParams {
        temperature: 0.7,
        max_tokens: 32,
        stop: vec!["\n\n".into()],
        n: 2,
    }
}

#[test]
fn retries_rate_limits_then_succeeds() {
    let ok = r#"{"choices":[{"text":"second","index":1},{"text":"first","index":0}]}"#.to_string();
    let (url, hits, bodies) = serve(vec![(429, "{}".into()), (429, "{}".into()), (200, ok)]);
    let client = HttpCompletionClient::new(config(url, 3)).unwrap();
    let out = client.complete("Q: who?", &params()).unwrap();
    assert_eq!(out, ["first", "second"]);
    assert_eq!(hits.load(Ordering::SeqCst), 3);
    let sent: serde_json::Value = serde_json::from_str(&bodies.lock().unwrap()[2]).unwrap();
    assert_eq!(sent["prompt"], "Q: who?");
    assert_eq!(sent["n"], 2);
    assert_eq!(sent["max_tokens"], 32);
    assert_eq!(sent["stop"][0], "\n\n");
}

#[test]
fn gives_up_after_max_retries() {
    let (url, hits, _) = serve(vec![(503, "{}".into()); 3]);
    let client = HttpCompletionClient::new(config(url, 2)).unwrap();
    let err = client.complete("p", &params()).unwrap_err();
    assert!(
        matches!(
            err,
            HandlerError::Transport {
                status: Some(503),
                attempts: 3,
                ..
            }
        ),
        "{err:?}"
    );
    assert_eq!(hits.load(Ordering::SeqCst), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let (url, hits, _) = serve(vec![(400, "bad prompt".into()), (200, "{}".into())]);
    let client = HttpCompletionClient::new(config(url, 3)).unwrap();
    let err = client.complete("p", &params()).unwrap_err();
    assert!(
        matches!(
            err,
            HandlerError::Transport {
                status: Some(400),
                attempts: 1,
                ..
            }
        ),
        "{err:?}"
    );
    assert_eq!(hits.load(Ordering::SeqCst), 1);
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let client =
        HttpCompletionClient::new(config(format!("http://127.0.0.1:{port}/v1"), 1)).unwrap();
    let err = client.complete("p", &params()).unwrap_err();
    assert!(
        matches!(
            err,
            HandlerError::Transport {
                status: None,
                attempts: 2,
                ..
            }
        ),
        "{err:?}"
    );
}

#[test]
fn rejects_invalid_config() {
    let bad = LmEndpointConfig {
        temperature: 1.5,
        ..Default::default()
    };
    assert!(matches!(
        HttpCompletionClient::new(bad),
        Err(HandlerError::Config(_))
    ));
}
