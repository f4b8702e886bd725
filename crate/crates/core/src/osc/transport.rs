//! UDP transport for OSC packets.

use std::io;
use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::Sender;
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use thiserror::Error;

use super::codec::{decode_packet, encode_packet, CodecError, OscPacket};

/// Largest payload that fits a single IPv4 UDP datagram.
pub const MAX_DATAGRAM: usize = 65507;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("packet of {0} bytes exceeds the {MAX_DATAGRAM}-byte datagram limit")]
    TooLarge(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub struct OscSender {
    socket: UdpSocket,
    target: SocketAddr,
}

impl OscSender {
    pub fn new(target: impl ToSocketAddrs) -> Result<Self, TransportError> {
        let target = target
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "no target address"))?;
        let bind: SocketAddr = if target.is_ipv4() {
            "0.0.0.0:0".parse().unwrap()
        } else {
            "[::]:0".parse().unwrap()
        };
        Ok(OscSender {
            socket: UdpSocket::bind(bind)?,
            target,
        })
    }

    pub fn target(&self) -> SocketAddr {
        self.target
    }

    pub fn send(&self, packet: &OscPacket) -> Result<(), TransportError> {
        let bytes = encode_packet(packet)?;
        if bytes.len() > MAX_DATAGRAM {
            return Err(TransportError::TooLarge(bytes.len()));
        }
        self.socket.send_to(&bytes, self.target)?;
        Ok(())
    }
}

/// One received datagram, decoded or not.
#[derive(Debug)]
pub struct Received {
    pub from: SocketAddr,
    pub packet: Result<OscPacket, CodecError>,
}

/// Background receiver: decodes every datagram and pushes it into an ordered
/// channel. Dropping the handle stops the thread.
pub struct OscReceiver {
    local: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl OscReceiver {
    pub fn spawn<T: From<Received> + Send + 'static>(
        bind: impl ToSocketAddrs,
        queue: Sender<T>,
    ) -> Result<Self, TransportError> {
        let socket = UdpSocket::bind(bind)?;
        socket.set_read_timeout(Some(Duration::from_millis(50)))?;
        let local = socket.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = stop.clone();
        let thread = std::thread::Builder::new()
            .name("osc-recv".into())
            .spawn(move || {
                let mut buf = vec![0u8; MAX_DATAGRAM];
                while !flag.load(Ordering::Relaxed) {
                    match socket.recv_from(&mut buf) {
                        Ok((n, from)) => {
                            let packet = decode_packet(&buf[..n]);
                            if queue.send(Received { from, packet }.into()).is_err() {
                                break;
                            }
                        }
                        Err(e)
                            if e.kind() == io::ErrorKind::WouldBlock
                                || e.kind() == io::ErrorKind::TimedOut => {}
                        Err(e) => {
                            log::warn!("osc receiver: {e}");
                        }
                    }
                }
            })?;
        Ok(OscReceiver {
            local,
            stop,
            thread: Some(thread),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.local
    }
}

impl Drop for OscReceiver {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
