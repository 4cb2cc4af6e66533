//! HTTP backend against a loopback server speaking just enough HTTP/1.1.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;

use tabref_core::llm::{CompletionRequest, HttpBackend, HttpConfig, LlmClient, LlmError, RetryPolicy};

struct Seen {
    path: String,
    authorization: Option<String>,
    body: serde_json::Value,
}

/// Serves `replies` (status, body) to consecutive connections and reports
/// each request it saw.
fn stub(replies: Vec<(u16, String)>) -> (String, mpsc::Receiver<Seen>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}/v1", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for (status, reply) in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let path = request_line.split_whitespace().nth(1).unwrap_or_default().to_string();
            let mut length = 0;
            let mut authorization = None;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let (name, value) = line.split_once(':').unwrap();
                match name.to_ascii_lowercase().as_str() {
                    "content-length" => length = value.trim().parse().unwrap(),
                    "authorization" => authorization = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            let mut body = vec![0; length];
            reader.read_exact(&mut body).unwrap();
            tx.send(Seen {
                path,
                authorization,
                body: serde_json::from_slice(&body).unwrap(),
            })
            .unwrap();
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                reply.len()
            )
            .unwrap();
        }
    });
    (base, rx)
}

fn completion(text: &str, usage: Option<(u64, u64)>) -> String {
    let mut v = serde_json::json!({
        "id": "x",
        "object": "chat.completion",
        "choices": [{ "index": 0, "message": { "role": "assistant", "content": text }, "finish_reason": "stop" }],
    });
    if let Some((p, c)) = usage {
        v["usage"] = serde_json::json!({ "prompt_tokens": p, "completion_tokens": c, "total_tokens": p + c });
    }
    v.to_string()
}

#[test]
fn posts_chat_completion_and_records_usage() {
    let (base, seen) = stub(vec![(200, completion("Conclusion: [Correct]", Some((120, 7))))]);
    let mut config = HttpConfig::new(base, "tiny-model");
    config.api_key = Some("sk-test".into());
    let client = LlmClient::with_options(HttpBackend::new(config), RetryPolicy::no_delay(), 1);
    let r = client.complete("judge", &CompletionRequest::new("", "is it right?")).unwrap();
    assert_eq!(r.text, "Conclusion: [Correct]");
    assert_eq!((r.input_tokens, r.output_tokens), (120, 7));
    assert_eq!(r.backend_id, "http:tiny-model");

    let req = seen.recv().unwrap();
    assert_eq!(req.path, "/v1/chat/completions");
    assert_eq!(req.authorization.as_deref(), Some("Bearer sk-test"));
    assert_eq!(req.body["model"], "tiny-model");
    assert_eq!(req.body["temperature"], 0.0);
    assert_eq!(req.body["stream"], false);
    let messages = req.body["messages"].as_array().unwrap();
    assert_eq!(messages.len(), 1, "empty system text is not sent");
    assert_eq!(messages[0]["role"], "user");

    let usage = client.ledger().per_agent()["judge"];
    assert_eq!((usage.calls, usage.input_tokens, usage.output_tokens), (1, 120, 7));
}

#[test]
fn retries_rate_limits_and_server_errors() {
    let (base, seen) = stub(vec![
        (429, "{}".into()),
        (503, "busy".into()),
        (200, completion("ok", None)),
    ]);
    let client = LlmClient::with_options(HttpBackend::new(HttpConfig::new(base, "m")), RetryPolicy::no_delay(), 1);
    let r = client.complete("critic", &CompletionRequest::new("", "abcdefgh")).unwrap();
    assert_eq!(r.text, "ok");
    // no usage block: synthetic counts
    assert_eq!((r.input_tokens, r.output_tokens), (2, 1));
    assert_eq!(seen.iter().take(3).count(), 3);
    assert_eq!(client.ledger().total().calls, 1, "failed attempts are not billed");
}

#[test]
fn client_errors_are_not_retried() {
    let (base, _seen) = stub(vec![(400, r#"{"error":"bad"}"#.into())]);
    let client = LlmClient::with_options(HttpBackend::new(HttpConfig::new(base, "m")), RetryPolicy::no_delay(), 1);
    match client.complete("critic", &CompletionRequest::new("", "x")) {
        Err(LlmError::Api { status, body }) => {
            assert_eq!(status, 400);
            assert!(body.contains("bad"));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn malformed_body_is_invalid_response() {
    let (base, _seen) = stub(vec![(200, r#"{"choices":[]}"#.into())]);
    let client = LlmClient::with_options(HttpBackend::new(HttpConfig::new(base, "m")), RetryPolicy::no_delay(), 1);
    assert!(matches!(
        client.complete("critic", &CompletionRequest::new("", "x")),
        Err(LlmError::InvalidResponse(_))
    ));
}

#[test]
fn unreachable_server_is_transport_error() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let client = LlmClient::with_options(
        HttpBackend::new(HttpConfig::new(format!("http://127.0.0.1:{port}/v1"), "m")),
        RetryPolicy::no_delay(),
        1,
    );
    assert!(matches!(
        client.complete("critic", &CompletionRequest::new("", "x")),
        Err(LlmError::Transport(_))
    ));
}
