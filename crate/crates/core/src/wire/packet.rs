use std::fmt;

use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"DIRP";
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 12;
pub const MAX_PAYLOAD: usize = u16::MAX as usize;

const KIND_EXEC: u8 = 0x01;
const KIND_REPLY: u8 = 0x02;
const KIND_BREAK: u8 = 0x03;
const KIND_ERROR: u8 = 0x04;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u16)]
pub enum ErrorCode {
    Parse = 1,
    UnknownLabel = 2,
    PlacementInBatch = 3,
    NestedPlacement = 4,
    UnknownIdentifier = 5,
    ArrayBounds = 6,
    NotInteractive = 7,
    BadCondition = 8,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 8] = [
        ErrorCode::Parse,
        ErrorCode::UnknownLabel,
        ErrorCode::PlacementInBatch,
        ErrorCode::NestedPlacement,
        ErrorCode::UnknownIdentifier,
        ErrorCode::ArrayBounds,
        ErrorCode::NotInteractive,
        ErrorCode::BadCondition,
    ];

    pub fn from_u16(code: u16) -> Option<ErrorCode> {
        ErrorCode::ALL.iter().copied().find(|c| *c as u16 == code)
    }

    pub fn as_u16(self) -> u16 {
        self as u16
    }

    pub fn describe(self) -> &'static str {
        match self {
            ErrorCode::Parse => "parse error",
            ErrorCode::UnknownLabel => "unknown label",
            ErrorCode::PlacementInBatch => "placement outside interactive mode",
            ErrorCode::NestedPlacement => "nested placement",
            ErrorCode::UnknownIdentifier => "unknown identifier",
            ErrorCode::ArrayBounds => "array index out of bounds",
            ErrorCode::NotInteractive => "not interactive",
            ErrorCode::BadCondition => "condition not 1 or -1",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.describe(), self.as_u16())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PacketBody {
    /// Controller program text.
    Exec(String),
    Reply(i64),
    /// Code of the label that broke.
    BreakEvent(i64),
    Error(ErrorCode),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DirectionPacket {
    pub seq: u32,
    pub body: PacketBody,
}

impl DirectionPacket {
    pub fn exec(seq: u32, program: impl Into<String>) -> Self {
        DirectionPacket {
            seq,
            body: PacketBody::Exec(program.into()),
        }
    }

    pub fn reply(seq: u32, value: i64) -> Self {
        DirectionPacket {
            seq,
            body: PacketBody::Reply(value),
        }
    }

    pub fn break_event(seq: u32, code: i64) -> Self {
        DirectionPacket {
            seq,
            body: PacketBody::BreakEvent(code),
        }
    }

    pub fn error(seq: u32, code: ErrorCode) -> Self {
        DirectionPacket {
            seq,
            body: PacketBody::Error(code),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("truncated packet: need {needed} bytes, have {got}")]
    Truncated { needed: usize, got: usize },
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("unknown packet kind {0}")]
    BadKind(u8),
    #[error("payload length {len} invalid for packet kind {kind}")]
    BadLength { kind: u8, len: usize },
    #[error("EXEC payload is not UTF-8")]
    BadUtf8,
    #[error("unknown error code {0}")]
    BadErrorCode(u16),
    #[error("{0} trailing bytes after packet")]
    TrailingBytes(usize),
    #[error("payload of {0} bytes exceeds 65535")]
    Oversize(usize),
}

impl WireError {
    /// Whether the stream can no longer be trusted to be aligned on packet
    /// boundaries.
    pub fn is_fatal(&self) -> bool {
        matches!(self, WireError::BadMagic(_) | WireError::BadVersion(_))
    }
}

pub fn encode_packet(p: &DirectionPacket) -> Result<Vec<u8>, WireError> {
    let (kind, payload): (u8, Vec<u8>) = match &p.body {
        PacketBody::Exec(s) => (KIND_EXEC, s.as_bytes().to_vec()),
        PacketBody::Reply(n) => (KIND_REPLY, n.to_be_bytes().to_vec()),
        PacketBody::BreakEvent(n) => (KIND_BREAK, n.to_be_bytes().to_vec()),
        PacketBody::Error(c) => (KIND_ERROR, c.as_u16().to_be_bytes().to_vec()),
    };
    if payload.len() > MAX_PAYLOAD {
        return Err(WireError::Oversize(payload.len()));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(kind);
    out.extend_from_slice(&p.seq.to_be_bytes());
    out.extend_from_slice(&(payload.len() as u16).to_be_bytes());
    out.extend_from_slice(&payload);
    Ok(out)
}

/// Checks magic and version and returns the full packet length.
pub(crate) fn check_header(h: &[u8]) -> Result<usize, WireError> {
    if h.len() < HEADER_LEN {
        return Err(WireError::Truncated {
            needed: HEADER_LEN,
            got: h.len(),
        });
    }
    let magic: [u8; 4] = h[0..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(WireError::BadMagic(magic));
    }
    if h[4] != VERSION {
        return Err(WireError::BadVersion(h[4]));
    }
    Ok(HEADER_LEN + u16::from_be_bytes([h[10], h[11]]) as usize)
}

/// Decodes exactly one packet occupying all of `bytes`.
pub fn decode_packet(bytes: &[u8]) -> Result<DirectionPacket, WireError> {
    let total = check_header(bytes)?;
    if bytes.len() < total {
        return Err(WireError::Truncated {
            needed: total,
            got: bytes.len(),
        });
    }
    if bytes.len() > total {
        return Err(WireError::TrailingBytes(bytes.len() - total));
    }
    let kind = bytes[5];
    let seq = u32::from_be_bytes(bytes[6..10].try_into().unwrap());
    let payload = &bytes[HEADER_LEN..];
    let numeral = || -> Result<i64, WireError> {
        let b: [u8; 8] = payload.try_into().map_err(|_| WireError::BadLength {
            kind,
            len: payload.len(),
        })?;
        Ok(i64::from_be_bytes(b))
    };
    let body = match kind {
        KIND_EXEC => {
            PacketBody::Exec(String::from_utf8(payload.to_vec()).map_err(|_| WireError::BadUtf8)?)
        }
        KIND_REPLY => PacketBody::Reply(numeral()?),
        KIND_BREAK => PacketBody::BreakEvent(numeral()?),
        KIND_ERROR => {
            let b: [u8; 2] = payload.try_into().map_err(|_| WireError::BadLength {
                kind,
                len: payload.len(),
            })?;
            let raw = u16::from_be_bytes(b);
            PacketBody::Error(ErrorCode::from_u16(raw).ok_or(WireError::BadErrorCode(raw))?)
        }
        other => return Err(WireError::BadKind(other)),
    };
    Ok(DirectionPacket { seq, body })
}
