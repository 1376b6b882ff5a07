#![allow(dead_code)]

use std::net::SocketAddr;

use launcher_core::sim::{FeedConfig, SimConfig};
use launcher_server::{serve, ServerConfig, ServerHandle};
use tokio::runtime::Runtime;

/// A server on its own runtime, for blocking clients.
pub struct Running {
    pub tcp: SocketAddr,
    pub gateway: SocketAddr,
    pub rt: Runtime,
    handle: Option<ServerHandle>,
}

impl Running {
    pub fn start(cfg: ServerConfig) -> Self {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .unwrap();
        let handle = rt.block_on(serve(cfg)).expect("server starts");
        Self {
            tcp: handle.tcp_addr,
            gateway: handle.gateway_addr,
            rt,
            handle: Some(handle),
        }
    }

    pub fn handle(&self) -> &ServerHandle {
        self.handle.as_ref().unwrap()
    }

    /// Blocks until every server task has finished.
    pub fn join(mut self) {
        let h = self.handle.take().unwrap();
        self.rt.block_on(h.wait());
    }
}

impl Drop for Running {
    fn drop(&mut self) {
        if let Some(h) = self.handle.take() {
            self.rt.block_on(async {
                h.shutdown().await;
                h.wait().await;
            });
        }
    }
}

/// Feed ticking five times faster than the hardware, so launch tests run
/// in a fraction of the real time.
pub fn fast_config() -> ServerConfig {
    let feed = FeedConfig {
        tick: 0.002,
        refill_interval: 0.05,
        stir_duration: 0.08,
        ..FeedConfig::default()
    };
    ServerConfig {
        sim: SimConfig {
            feed,
            ..SimConfig::default()
        },
        ..ServerConfig::ephemeral()
    }
}
