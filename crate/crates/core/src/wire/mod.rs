//! Direction packets and their byte-stream framing.
//!
//! ```text
//! "DIRP" | version 0x01 | kind | seq: u32 BE | len: u16 BE | payload
//! ```

mod framing;
mod packet;

pub use framing::FrameDecoder;
pub use packet::{
    decode_packet, encode_packet, DirectionPacket, ErrorCode, PacketBody, WireError, HEADER_LEN,
    MAGIC, MAX_PAYLOAD, VERSION,
};
