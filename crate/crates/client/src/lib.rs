//! Wire protocol of the launcher control server and a blocking client for
//! it.

pub mod client;
pub mod error;
pub mod protocol;

pub use client::{Client, LaunchReport};
pub use error::{ClientError, Result};
pub use protocol::{
    Command, Event, Notification, Request, Response, ServerFrame, Snapshot, SnapshotFrame,
    StirReason, DEFAULT_GATEWAY_PORT, DEFAULT_PORT, ENDPOINT_ENV, MAX_FRAME_BYTES,
};
