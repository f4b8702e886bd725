//! OSC 1.0 binary encoding.
//!
//! Supported argument tags are `i` (int32), `f` (float32), `s` (string) and
//! `b` (blob). All multi-byte values are big-endian and every field is padded
//! with zero bytes to a 4-byte boundary.

use thiserror::Error;

const BUNDLE_TAG: &[u8; 8] = b"#bundle\0";

/// Timetag value meaning "execute immediately".
pub const IMMEDIATELY: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum OscArg {
    Int(i32),
    Float(f32),
    Str(String),
    Blob(Vec<u8>),
}

impl OscArg {
    pub fn tag(&self) -> char {
        match self {
            OscArg::Int(_) => 'i',
            OscArg::Float(_) => 'f',
            OscArg::Str(_) => 's',
            OscArg::Blob(_) => 'b',
        }
    }

    pub fn as_int(&self) -> Option<i32> {
        match self {
            OscArg::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_float(&self) -> Option<f32> {
        match self {
            OscArg::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            OscArg::Str(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_blob(&self) -> Option<&[u8]> {
        match self {
            OscArg::Blob(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscMessage {
    pub address: String,
    pub args: Vec<OscArg>,
}

impl OscMessage {
    pub fn new(address: impl Into<String>, args: Vec<OscArg>) -> Self {
        OscMessage {
            address: address.into(),
            args,
        }
    }

    /// Tag string without the leading comma, e.g. `"iff"`.
    pub fn tags(&self) -> String {
        self.args.iter().map(OscArg::tag).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscBundle {
    /// 64-bit NTP fixed point: upper 32 bits seconds, lower 32 bits fraction.
    pub timetag: u64,
    pub elements: Vec<OscPacket>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OscPacket {
    Message(OscMessage),
    Bundle(OscBundle),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("buffer length {0} is not 4-aligned")]
    NotAligned(usize),
    #[error("truncated buffer at byte {offset}: needed {needed} more bytes")]
    Truncated { offset: usize, needed: usize },
    #[error("unterminated string at byte {0}")]
    Unterminated(usize),
    #[error("non-zero padding at byte {0}")]
    BadPadding(usize),
    #[error("string at byte {0} is not valid UTF-8")]
    InvalidUtf8(usize),
    #[error("type tag string at byte {0} does not start with ','")]
    MissingTagPrefix(usize),
    #[error("unsupported type tag '{tag}' at byte {offset}")]
    UnsupportedTag { tag: char, offset: usize },
    #[error("address {0:?} must start with '/'")]
    BadAddress(String),
    #[error("string contains an interior NUL byte")]
    InteriorNul,
    #[error("bundle element size {size} at byte {offset} exceeds remaining {remaining} bytes")]
    ElementSize {
        size: usize,
        offset: usize,
        remaining: usize,
    },
    #[error("missing #bundle header at byte {0}")]
    NotBundle(usize),
    #[error("{0} trailing bytes after message arguments")]
    TrailingBytes(usize),
}

fn pad_len(n: usize) -> usize {
    (4 - n % 4) % 4
}

fn write_str(out: &mut Vec<u8>, s: &str) -> Result<(), CodecError> {
    if s.as_bytes().contains(&0) {
        return Err(CodecError::InteriorNul);
    }
    out.extend_from_slice(s.as_bytes());
    // at least one NUL terminator, then pad to 4
    out.push(0);
    out.resize(out.len() + pad_len(s.len() + 1), 0);
    Ok(())
}

pub fn encode_message(msg: &OscMessage) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::with_capacity(msg.address.len() + 8 + msg.args.len() * 4);
    write_message(&mut out, msg)?;
    Ok(out)
}

fn write_message(out: &mut Vec<u8>, msg: &OscMessage) -> Result<(), CodecError> {
    if !msg.address.starts_with('/') {
        return Err(CodecError::BadAddress(msg.address.clone()));
    }
    write_str(out, &msg.address)?;
    let mut tags = String::with_capacity(msg.args.len() + 1);
    tags.push(',');
    tags.extend(msg.args.iter().map(OscArg::tag));
    write_str(out, &tags)?;
    for arg in &msg.args {
        match arg {
            OscArg::Int(v) => out.extend_from_slice(&v.to_be_bytes()),
            OscArg::Float(v) => out.extend_from_slice(&v.to_bits().to_be_bytes()),
            OscArg::Str(s) => write_str(out, s)?,
            OscArg::Blob(b) => {
                out.extend_from_slice(&(b.len() as u32).to_be_bytes());
                out.extend_from_slice(b);
                out.resize(out.len() + pad_len(b.len()), 0);
            }
        }
    }
    Ok(())
}

pub fn encode_bundle(bundle: &OscBundle) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::new();
    write_bundle(&mut out, bundle)?;
    Ok(out)
}

fn write_bundle(out: &mut Vec<u8>, bundle: &OscBundle) -> Result<(), CodecError> {
    out.extend_from_slice(BUNDLE_TAG);
    out.extend_from_slice(&bundle.timetag.to_be_bytes());
    for element in &bundle.elements {
        let size_at = out.len();
        out.extend_from_slice(&[0; 4]);
        match element {
            OscPacket::Message(m) => write_message(out, m)?,
            OscPacket::Bundle(b) => write_bundle(out, b)?,
        }
        let size = (out.len() - size_at - 4) as u32;
        out[size_at..size_at + 4].copy_from_slice(&size.to_be_bytes());
    }
    Ok(())
}

pub fn encode_packet(packet: &OscPacket) -> Result<Vec<u8>, CodecError> {
    match packet {
        OscPacket::Message(m) => encode_message(m),
        OscPacket::Bundle(b) => encode_bundle(b),
    }
}

/// Cursor over a 4-aligned buffer; `base` is the absolute offset of `buf[0]`
/// so errors inside nested bundles report positions in the outer datagram.
struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    base: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], base: usize) -> Self {
        Reader { buf, pos: 0, base }
    }

    fn offset(&self) -> usize {
        self.base + self.pos
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.remaining() < n {
            return Err(CodecError::Truncated {
                offset: self.offset(),
                needed: n - self.remaining(),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u64(&mut self) -> Result<u64, CodecError> {
        let hi = self.u32()? as u64;
        let lo = self.u32()? as u64;
        Ok(hi << 32 | lo)
    }

    fn padding(&mut self, n: usize) -> Result<(), CodecError> {
        let start = self.offset();
        let pad = self.take(n)?;
        if let Some(i) = pad.iter().position(|&b| b != 0) {
            return Err(CodecError::BadPadding(start + i));
        }
        Ok(())
    }

    fn string(&mut self) -> Result<&'a str, CodecError> {
        let start = self.offset();
        let rest = &self.buf[self.pos..];
        let len = rest
            .iter()
            .position(|&b| b == 0)
            .ok_or(CodecError::Unterminated(start))?;
        let bytes = &rest[..len];
        self.pos += len + 1;
        self.padding(pad_len(len + 1))?;
        std::str::from_utf8(bytes).map_err(|_| CodecError::InvalidUtf8(start))
    }
}

pub fn decode_message(bytes: &[u8]) -> Result<OscMessage, CodecError> {
    if !bytes.len().is_multiple_of(4) {
        return Err(CodecError::NotAligned(bytes.len()));
    }
    read_message(bytes, 0)
}

fn read_message(bytes: &[u8], base: usize) -> Result<OscMessage, CodecError> {
    let mut r = Reader::new(bytes, base);
    let address = r.string()?;
    if !address.starts_with('/') {
        return Err(CodecError::BadAddress(address.to_string()));
    }
    let tags_at = r.offset();
    if r.remaining() == 0 {
        return Err(CodecError::Truncated {
            offset: tags_at,
            needed: 4,
        });
    }
    let tags = r.string()?;
    let mut chars = tags.chars();
    if chars.next() != Some(',') {
        return Err(CodecError::MissingTagPrefix(tags_at));
    }
    let mut args = Vec::with_capacity(tags.len().saturating_sub(1));
    for (i, tag) in chars.enumerate() {
        let arg = match tag {
            'i' => OscArg::Int(r.u32()? as i32),
            'f' => OscArg::Float(f32::from_bits(r.u32()?)),
            's' => OscArg::Str(r.string()?.to_string()),
            'b' => {
                let len = r.u32()? as usize;
                let data = r.take(len)?.to_vec();
                r.padding(pad_len(len))?;
                OscArg::Blob(data)
            }
            other => {
                return Err(CodecError::UnsupportedTag {
                    tag: other,
                    offset: tags_at + 1 + i,
                })
            }
        };
        args.push(arg);
    }
    if r.remaining() != 0 {
        return Err(CodecError::TrailingBytes(r.remaining()));
    }
    Ok(OscMessage {
        address: address.to_string(),
        args,
    })
}

pub fn decode_bundle(bytes: &[u8]) -> Result<OscBundle, CodecError> {
    if !bytes.len().is_multiple_of(4) {
        return Err(CodecError::NotAligned(bytes.len()));
    }
    read_bundle(bytes, 0)
}

fn read_bundle(bytes: &[u8], base: usize) -> Result<OscBundle, CodecError> {
    let mut r = Reader::new(bytes, base);
    if r.take(8).map_err(|_| CodecError::NotBundle(base))? != BUNDLE_TAG {
        return Err(CodecError::NotBundle(base));
    }
    let timetag = r.u64()?;
    let mut elements = Vec::new();
    while r.remaining() > 0 {
        let size_at = r.offset();
        let size = r.u32()? as usize;
        if size > r.remaining() {
            return Err(CodecError::ElementSize {
                size,
                offset: size_at,
                remaining: r.remaining(),
            });
        }
        if !size.is_multiple_of(4) {
            return Err(CodecError::NotAligned(size));
        }
        let at = r.offset();
        let body = r.take(size)?;
        elements.push(read_packet(body, at)?);
    }
    Ok(OscBundle { timetag, elements })
}

fn read_packet(bytes: &[u8], base: usize) -> Result<OscPacket, CodecError> {
    if bytes.starts_with(BUNDLE_TAG) {
        read_bundle(bytes, base).map(OscPacket::Bundle)
    } else {
        read_message(bytes, base).map(OscPacket::Message)
    }
}

/// Decodes either a message or a bundle, depending on the leading bytes.
pub fn decode_packet(bytes: &[u8]) -> Result<OscPacket, CodecError> {
    if !bytes.len().is_multiple_of(4) {
        return Err(CodecError::NotAligned(bytes.len()));
    }
    read_packet(bytes, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_int_message_bytes() {
        let msg = OscMessage::new("/a", vec![OscArg::Int(1)]);
        let bytes = encode_message(&msg).unwrap();
        assert_eq!(
            bytes,
            [0x2F, 0x61, 0x00, 0x00, 0x2C, 0x69, 0x00, 0x00, 0x00, 0x00, 0x00, 0x01]
        );
        assert_eq!(decode_message(&bytes).unwrap(), msg);
    }

    #[test]
    fn empty_args_message_bytes() {
        let bytes = encode_message(&OscMessage::new("/a", vec![])).unwrap();
        assert_eq!(bytes, b"/a\0\0,\0\0\0");
    }

    #[test]
    fn address_of_length_four_gets_full_pad_word() {
        let bytes = encode_message(&OscMessage::new("/abc", vec![])).unwrap();
        assert_eq!(&bytes[..8], b"/abc\0\0\0\0");
        assert_eq!(bytes.len(), 12);
    }

    #[test]
    fn collision_message_roundtrip() {
        let msg = OscMessage::new(
            "/mr4mr/collision",
            vec![
                OscArg::Int(2),
                OscArg::Float(1.5),
                OscArg::Float(0.0),
                OscArg::Float(0.0),
                OscArg::Float(0.0),
            ],
        );
        let bytes = encode_message(&msg).unwrap();
        assert_eq!(bytes.len() % 4, 0);
        assert_eq!(decode_message(&bytes).unwrap(), msg);
    }

    #[test]
    fn blob_and_string_padding() {
        let msg = OscMessage::new(
            "/x",
            vec![OscArg::Blob(vec![1, 2, 3, 4, 5]), OscArg::Str("hey".into())],
        );
        let bytes = encode_message(&msg).unwrap();
        // "/x" 4 + ",bs" 4 + size 4 + blob 8 + "hey\0" 4
        assert_eq!(bytes.len(), 24);
        assert_eq!(&bytes[12..20], &[1, 2, 3, 4, 5, 0, 0, 0]);
        assert_eq!(decode_message(&bytes).unwrap(), msg);
    }

    #[test]
    fn rejects_unaligned() {
        assert_eq!(decode_message(&[0; 7]), Err(CodecError::NotAligned(7)));
        assert!(decode_message(&[0; 7])
            .unwrap_err()
            .to_string()
            .contains("not 4-aligned"));
    }

    #[test]
    fn rejects_missing_comma() {
        let err = decode_message(b"/a\0\0i\0\0\0").unwrap_err();
        assert_eq!(err, CodecError::MissingTagPrefix(4));
    }

    #[test]
    fn rejects_unknown_tag_with_its_name() {
        let err = decode_message(b"/a\0\0,d\0\0\0\0\0\0\0\0\0\0").unwrap_err();
        assert_eq!(
            err,
            CodecError::UnsupportedTag {
                tag: 'd',
                offset: 5
            }
        );
        assert!(err.to_string().contains("'d'"));
    }

    #[test]
    fn rejects_nonzero_padding() {
        let err = decode_message(b"/a\0x,\0\0\0").unwrap_err();
        assert_eq!(err, CodecError::BadPadding(3));
    }

    #[test]
    fn rejects_truncated_int() {
        let err = decode_message(b"/a\0\0,i\0\0").unwrap_err();
        assert_eq!(
            err,
            CodecError::Truncated {
                offset: 8,
                needed: 4
            }
        );
    }

    #[test]
    fn encode_rejects_bad_address_and_nul() {
        assert!(matches!(
            encode_message(&OscMessage::new("a", vec![])),
            Err(CodecError::BadAddress(_))
        ));
        assert_eq!(
            encode_message(&OscMessage::new("/a", vec![OscArg::Str("x\0y".into())])),
            Err(CodecError::InteriorNul)
        );
    }

    #[test]
    fn bundle_sizes() {
        let b = OscBundle {
            timetag: IMMEDIATELY,
            elements: vec![OscPacket::Message(OscMessage::new(
                "/a",
                vec![OscArg::Int(1)],
            ))],
        };
        let bytes = encode_bundle(&b).unwrap();
        assert_eq!(bytes.len(), 32);
        assert_eq!(&bytes[..8], b"#bundle\0");
        assert_eq!(&bytes[8..16], &[0, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(&bytes[16..20], &[0, 0, 0, 12]);
        assert_eq!(decode_bundle(&bytes).unwrap(), b);

        let empty = OscBundle {
            timetag: IMMEDIATELY,
            elements: vec![],
        };
        assert_eq!(encode_bundle(&empty).unwrap().len(), 16);
    }

    #[test]
    fn nested_bundle_roundtrip() {
        let inner = OscBundle {
            timetag: 0xDEAD_BEEF_0000_0001,
            elements: vec![OscPacket::Message(OscMessage::new(
                "/in",
                vec![OscArg::Float(0.25)],
            ))],
        };
        let outer = OscBundle {
            timetag: IMMEDIATELY,
            elements: vec![
                OscPacket::Bundle(inner),
                OscPacket::Message(OscMessage::new("/out", vec![])),
            ],
        };
        let bytes = encode_bundle(&outer).unwrap();
        assert_eq!(decode_packet(&bytes).unwrap(), OscPacket::Bundle(outer));
    }

    #[test]
    fn oversized_element_prefix() {
        let mut bytes = encode_bundle(&OscBundle {
            timetag: 1,
            elements: vec![OscPacket::Message(OscMessage::new("/a", vec![]))],
        })
        .unwrap();
        bytes[19] = 64;
        assert_eq!(
            decode_bundle(&bytes),
            Err(CodecError::ElementSize {
                size: 64,
                offset: 16,
                remaining: 8
            })
        );
    }
}
