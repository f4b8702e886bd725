//! Live engine host. A single conductor thread owns the [`Session`] and
//! paces it against the wall clock. UDP OSC, WebSocket clients and the frame
//! analysis worker talk to it only through its input queue.
//!
//! [`Session`]: mr4mr::conductor::Session

mod conductor;
mod http;
pub mod json;

use std::net::SocketAddr;
use std::path::PathBuf;

use thiserror::Error;

use mr4mr::conductor::{ConductorError, EngineConfig};
use mr4mr::osc::TransportError;
use mr4mr::room::RoomGeometry;

pub use conductor::Bridge;
pub use json::{from_json, parse_lines, to_json};

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("json: {0}")]
    Json(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Conductor(#[from] ConductorError),
    #[error("conductor thread stopped unexpectedly")]
    Stopped,
}

#[derive(Debug, Clone)]
pub struct BridgeOptions {
    pub config: EngineConfig,
    pub geometry: RoomGeometry,
    /// UDP address for inbound OSC.
    pub osc_bind: SocketAddr,
    /// Where outbound OSC goes. `None` disables UDP output.
    pub emit: Option<SocketAddr>,
    /// HTTP address for `/ws` and static assets.
    pub http_bind: SocketAddr,
    /// Directory served at `/`.
    pub assets: Option<PathBuf>,
}

impl BridgeOptions {
    /// Ports and hosts taken from the config; binds on all interfaces.
    pub fn from_config(config: EngineConfig, geometry: RoomGeometry) -> Result<Self, BridgeError> {
        use std::net::ToSocketAddrs;
        let emit = (config.emit_host.as_str(), config.emit_port)
            .to_socket_addrs()?
            .next();
        Ok(BridgeOptions {
            osc_bind: SocketAddr::from(([0, 0, 0, 0], config.listen_port)),
            http_bind: SocketAddr::from(([0, 0, 0, 0], config.bridge_port)),
            emit,
            assets: None,
            config,
            geometry,
        })
    }
}
