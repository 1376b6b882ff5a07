//! WebSocket, snapshot endpoint and static assets.

use std::net::SocketAddr;
use std::time::Duration;

use futures::{SinkExt, StreamExt};
use launcher_client::{Response, ServerFrame, Snapshot};
use launcher_server::{serve, ServerConfig};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio_tungstenite::tungstenite::Message;

/// Minimal HTTP/1.1 GET; returns status code and body.
async fn get(addr: SocketAddr, path: &str) -> (u16, String) {
    let mut s = tokio::net::TcpStream::connect(addr).await.unwrap();
    let req = format!("GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n");
    s.write_all(req.as_bytes()).await.unwrap();
    let mut raw = Vec::new();
    s.read_to_end(&mut raw).await.unwrap();
    let text = String::from_utf8_lossy(&raw).to_string();
    let status: u16 = text.split_whitespace().nth(1).unwrap().parse().unwrap();
    let body = text.split_once("\r\n\r\n").map(|(_, b)| b.to_string()).unwrap_or_default();
    (status, body)
}

async fn next_text<S>(ws: &mut S) -> String
where
    S: StreamExt<Item = Result<Message, tokio_tungstenite::tungstenite::Error>> + Unpin,
{
    loop {
        let m = tokio::time::timeout(Duration::from_secs(5), ws.next())
            .await
            .expect("frame in time")
            .expect("stream open")
            .unwrap();
        if let Message::Text(t) = m {
            return t;
        }
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn websocket_speaks_the_protocol_and_pushes_snapshots() {
    let h = serve(ServerConfig::ephemeral()).await.unwrap();
    let url = format!("ws://{}/ws", h.gateway_addr);
    let (mut ws, _) = tokio_tungstenite::connect_async(url).await.unwrap();

    ws.send(Message::Text(
        r#"{"id":4,"cmd":"set_orientation","azimuth_deg":-3.0,"altitude_deg":22.0}"#.into(),
    ))
    .await
    .unwrap();
    let resp = loop {
        if let ServerFrame::Response(r) = serde_json::from_str(&next_text(&mut ws).await).unwrap() {
            break r;
        }
    };
    assert_eq!(resp.id, Some(4));
    assert!(resp.ok);
    assert_eq!(resp.state.azimuth_deg(), -3.0);

    ws.send(Message::Text("garbage".into())).await.unwrap();
    let bad: Response = loop {
        if let ServerFrame::Response(r) = serde_json::from_str(&next_text(&mut ws).await).unwrap() {
            break r;
        }
    };
    assert!(!bad.ok);
    assert_eq!(bad.id, None);

    // snapshots arrive at about 5 Hz
    let t0 = tokio::time::Instant::now();
    let mut snaps = 0;
    while snaps < 5 {
        if let ServerFrame::Snapshot(s) = serde_json::from_str(&next_text(&mut ws).await).unwrap() {
            assert_eq!(s.snapshot.state.altitude_deg(), 22.0);
            snaps += 1;
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt > 0.5 && dt < 1.6, "five snapshots took {dt} s");

    // the state the socket set is visible over TCP
    let (status, body) = get(h.gateway_addr, "/state").await;
    assert_eq!(status, 200);
    let snap: Snapshot = serde_json::from_str(&body).unwrap();
    assert_eq!(snap.state.azimuth_deg(), -3.0);

    h.shutdown().await;
    h.wait().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn websocket_sees_launch_events() {
    let mut cfg = ServerConfig::ephemeral();
    cfg.sim.feed.tick = 0.002;
    let h = serve(cfg).await.unwrap();
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{}/ws", h.gateway_addr))
        .await
        .unwrap();
    ws.send(Message::Text(r#"{"id":1,"cmd":"launch"}"#.into()))
        .await
        .unwrap();
    let deadline = tokio::time::Instant::now() + Duration::from_secs(5);
    let mut launched = false;
    while tokio::time::Instant::now() < deadline && !launched {
        if let ServerFrame::Notification(n) = serde_json::from_str(&next_text(&mut ws).await).unwrap() {
            launched = matches!(n.event, launcher_client::Event::Launched { request_id: 1, .. });
        }
    }
    assert!(launched);
    h.shutdown().await;
    h.wait().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn placeholder_index_without_assets() {
    let h = serve(ServerConfig::ephemeral()).await.unwrap();
    let (status, body) = get(h.gateway_addr, "/").await;
    assert_eq!(status, 200);
    assert!(body.contains("/ws"));
    let (status, _) = get(h.gateway_addr, "/missing.js").await;
    assert_eq!(status, 404);
    h.shutdown().await;
    h.wait().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn serves_console_assets() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>console</html>").unwrap();
    std::fs::create_dir(dir.path().join("assets")).unwrap();
    std::fs::write(dir.path().join("assets/app.js"), "console.log(1)").unwrap();
    let cfg = ServerConfig {
        static_dir: Some(dir.path().to_path_buf()),
        ..ServerConfig::ephemeral()
    };
    let h = serve(cfg).await.unwrap();
    assert_eq!(get(h.gateway_addr, "/").await, (200, "<html>console</html>".into()));
    assert_eq!(get(h.gateway_addr, "/assets/app.js").await, (200, "console.log(1)".into()));
    assert_eq!(get(h.gateway_addr, "/nope").await.0, 404);
    // API routes win over files
    let (status, body) = get(h.gateway_addr, "/state").await;
    assert_eq!(status, 200);
    assert!(serde_json::from_str::<Snapshot>(&body).is_ok());
    h.shutdown().await;
    h.wait().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn shutdown_closes_websockets() {
    let h = serve(ServerConfig::ephemeral()).await.unwrap();
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{}/ws", h.gateway_addr))
        .await
        .unwrap();
    ws.send(Message::Text(r#"{"id":1,"cmd":"shutdown"}"#.into()))
        .await
        .unwrap();
    let mut got_reply = false;
    let closed = tokio::time::timeout(Duration::from_secs(5), async {
        while let Some(m) = ws.next().await {
            match m {
                Ok(Message::Text(t)) => {
                    if let Ok(ServerFrame::Response(r)) = serde_json::from_str(&t) {
                        got_reply |= r.id == Some(1) && r.ok;
                    }
                }
                Ok(Message::Close(_)) | Err(_) => break,
                _ => {}
            }
        }
    })
    .await;
    assert!(closed.is_ok());
    assert!(got_reply);
    tokio::time::timeout(Duration::from_secs(5), h.wait())
        .await
        .expect("server stops");
}
