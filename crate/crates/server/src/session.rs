//! Per-connection handling of the newline-delimited protocol.

use std::time::Duration;

use launcher_client::protocol::encode_line;
use launcher_client::{Command, Request, Response, MAX_FRAME_BYTES};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::TcpStream;
use tokio::sync::broadcast::error::RecvError;

use crate::controller::ControllerHandle;

/// Outcome of one inbound frame.
pub(crate) struct Handled {
    pub response: Response,
    /// The connection should close after this response.
    pub close: bool,
}

fn rejection(ctrl: &ControllerHandle, id: Option<u64>, error: String) -> Response {
    let snap = ctrl.snapshot();
    Response {
        id,
        ok: false,
        state: snap.state,
        feed: snap.feed,
        t_monotonic_s: snap.t_monotonic_s,
        event: None,
        error: Some(error),
    }
}

/// Parses and executes one frame. Malformed frames get an error response
/// carrying the id when one can be read.
pub(crate) async fn handle_frame(ctrl: &ControllerHandle, frame: &[u8], budget: Duration) -> Handled {
    let request: Request = match serde_json::from_slice(frame) {
        Ok(r) => r,
        Err(e) => {
            let id = serde_json::from_slice::<serde_json::Value>(frame)
                .ok()
                .and_then(|v| v.get("id").and_then(|id| id.as_u64()));
            return Handled {
                response: rejection(ctrl, id, format!("bad request: {e}")),
                close: false,
            };
        }
    };
    let id = request.id;
    let shutdown = matches!(request.command, Command::Shutdown);
    match tokio::time::timeout(budget, ctrl.call(request)).await {
        Ok(Some(response)) => Handled {
            close: shutdown && response.ok,
            response,
        },
        Ok(None) => Handled {
            response: rejection(ctrl, Some(id), "server is shutting down".into()),
            close: true,
        },
        Err(_) => Handled {
            response: rejection(
                ctrl,
                Some(id),
                format!("no controller answer within {} ms", budget.as_millis()),
            ),
            close: false,
        },
    }
}

fn strip(line: &[u8]) -> &[u8] {
    let line = line.strip_suffix(b"\n").unwrap_or(line);
    line.strip_suffix(b"\r").unwrap_or(line)
}

/// Serves one TCP client until it disconnects or the server stops.
pub(crate) async fn serve_tcp(mut stream: TcpStream, ctrl: ControllerHandle, budget: Duration) {
    let _ = stream.set_nodelay(true);
    let (mut rd, mut wr) = stream.split();
    let mut notes = ctrl.subscribe();
    let mut stopped = ctrl.stopped();
    let mut buf: Vec<u8> = Vec::new();
    let mut chunk = vec![0u8; 8192];
    loop {
        while let Some(pos) = buf.iter().position(|&b| b == b'\n') {
            let line: Vec<u8> = buf.drain(..=pos).collect();
            let frame = strip(&line);
            if frame.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let h = handle_frame(&ctrl, frame, budget).await;
            if wr.write_all(encode_line(&h.response).as_bytes()).await.is_err() || h.close {
                let _ = wr.shutdown().await;
                return;
            }
        }
        if buf.len() >= MAX_FRAME_BYTES {
            let r = rejection(
                &ctrl,
                None,
                format!("frame exceeds {MAX_FRAME_BYTES} bytes without a newline"),
            );
            let _ = wr.write_all(encode_line(&r).as_bytes()).await;
            let _ = wr.shutdown().await;
            return;
        }
        if *stopped.borrow() {
            let _ = wr.shutdown().await;
            return;
        }
        tokio::select! {
            n = rd.read(&mut chunk) => match n {
                Ok(0) | Err(_) => return,
                Ok(n) => buf.extend_from_slice(&chunk[..n]),
            },
            note = notes.recv() => match note {
                Ok(n) => {
                    if wr.write_all(encode_line(&n).as_bytes()).await.is_err() {
                        return;
                    }
                }
                Err(RecvError::Lagged(k)) => tracing::warn!("session skipped {k} notifications"),
                Err(RecvError::Closed) => {}
            },
            _ = stopped.changed() => {}
        }
    }
}
