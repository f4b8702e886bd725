//! Open Sound Control: codec, routing and UDP transport.

mod codec;
mod dispatch;
mod transport;

pub use codec::{
    decode_bundle, decode_message, decode_packet, encode_bundle, encode_message, encode_packet,
    CodecError, OscArg, OscBundle, OscMessage, OscPacket, IMMEDIATELY,
};
pub use dispatch::{dispatch, pattern_matches, Route, Router};
pub use transport::{OscReceiver, OscSender, Received, TransportError, MAX_DATAGRAM};

impl From<OscMessage> for OscPacket {
    fn from(m: OscMessage) -> Self {
        OscPacket::Message(m)
    }
}

impl From<OscBundle> for OscPacket {
    fn from(b: OscBundle) -> Self {
        OscPacket::Bundle(b)
    }
}

impl OscPacket {
    /// Flattens nested bundles into messages in wire order.
    pub fn into_messages(self) -> Vec<OscMessage> {
        match self {
            OscPacket::Message(m) => vec![m],
            OscPacket::Bundle(b) => b
                .elements
                .into_iter()
                .flat_map(OscPacket::into_messages)
                .collect(),
        }
    }
}
