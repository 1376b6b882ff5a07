//! Control server for the launcher.
//!
//! A single controller task owns the backend (the simulator, or hardware
//! behind the [`Backend`] trait) and serializes every state change. Clients
//! talk newline-delimited JSON over TCP; the gateway carries the same frames
//! over WebSocket for the operator console, serves `GET /state` and the
//! console assets.

pub mod backend;
pub mod config;
pub mod controller;
pub mod error;
mod gateway;
mod session;

use std::net::SocketAddr;
use std::time::Duration;

use launcher_client::Command;
use launcher_core::sim::LauncherState;
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

pub use backend::{Backend, BackendEvent, LaunchData, SimBackend, Starved};
pub use config::{BackendKind, ServerConfig, StirPolicy};
pub use controller::{ControllerHandle, EMPTY_TICKS_BEFORE_STIR, SUPERVISION_PERIOD};
pub use error::{Result, ServerError};

/// A running server.
#[derive(Debug)]
pub struct ServerHandle {
    pub tcp_addr: SocketAddr,
    pub gateway_addr: SocketAddr,
    controller: ControllerHandle,
    tasks: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn controller(&self) -> &ControllerHandle {
        &self.controller
    }

    /// Asks the controller to stop; sessions close after their final
    /// responses.
    pub async fn shutdown(&self) {
        let _ = self.controller.request(Command::Shutdown).await;
    }

    /// Resolves when the controller, the acceptor and the gateway are done.
    pub async fn wait(self) {
        for t in self.tasks {
            let _ = t.await;
        }
    }
}

/// Starts the server with the backend named in `cfg`.
pub async fn serve(cfg: ServerConfig) -> Result<ServerHandle> {
    cfg.validate()?;
    match cfg.backend {
        BackendKind::Sim => {
            let backend = SimBackend::new(cfg.sim.clone())?;
            serve_with(cfg, backend).await
        }
        BackendKind::External => Err(ServerError::UnsupportedBackend),
    }
}

/// Starts the server around an already built backend.
pub async fn serve_with<B: Backend>(cfg: ServerConfig, backend: B) -> Result<ServerHandle> {
    cfg.validate()?;
    let tcp_at = format!("{}:{}", cfg.host, cfg.tcp_port);
    let gw_at = format!("{}:{}", cfg.host, cfg.gateway_port);
    let tcp = TcpListener::bind(&tcp_at)
        .await
        .map_err(|e| ServerError::bind("tcp", tcp_at.clone(), e))?;
    let gw = TcpListener::bind(&gw_at)
        .await
        .map_err(|e| ServerError::bind("gateway", gw_at.clone(), e))?;
    let tcp_addr = tcp.local_addr()?;
    let gateway_addr = gw.local_addr()?;

    let (ctrl, ctrl_task) = controller::spawn(backend, LauncherState::default(), cfg.stir)?;
    let budget = Duration::from_millis(cfg.max_latency_budget_ms);

    let acceptor = {
        let ctrl = ctrl.clone();
        let mut stopped = ctrl.stopped();
        tokio::spawn(async move {
            let mut sessions = tokio::task::JoinSet::new();
            loop {
                tokio::select! {
                    conn = tcp.accept() => match conn {
                        Ok((stream, _)) => {
                            sessions.spawn(session::serve_tcp(stream, ctrl.clone(), budget));
                        }
                        Err(e) => tracing::warn!("accept failed: {e}"),
                    },
                    _ = stopped.changed() => break,
                }
            }
            drop(tcp);
            while sessions.join_next().await.is_some() {}
        })
    };

    let app = gateway::router(
        ctrl.clone(),
        budget,
        Duration::from_secs_f64(1.0 / cfg.snapshot_hz),
        cfg.static_dir.clone(),
    );
    let gateway = {
        let mut stopped = ctrl.stopped();
        tokio::spawn(async move {
            let stop = async move {
                while !*stopped.borrow() {
                    if stopped.changed().await.is_err() {
                        break;
                    }
                }
            };
            if let Err(e) = axum::serve(gw, app).with_graceful_shutdown(stop).await {
                tracing::warn!("gateway stopped: {e}");
            }
        })
    };

    tracing::info!("listening on tcp {tcp_addr}, gateway {gateway_addr}");
    Ok(ServerHandle {
        tcp_addr,
        gateway_addr,
        controller: ctrl,
        tasks: vec![ctrl_task, acceptor, gateway],
    })
}
