use std::collections::VecDeque;

use super::packet::{check_header, decode_packet, DirectionPacket, WireError, HEADER_LEN};

/// Splits a reliable byte stream into packets using the header length.
///
/// A bad magic or version means the stream has lost alignment; the decoder
/// then reports that error once and yields nothing further. Other malformed
/// packets are consumed whole and reported without disturbing the stream.
#[derive(Debug, Default)]
pub struct FrameDecoder {
    buf: VecDeque<u8>,
    failed: bool,
}

impl FrameDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        if !self.failed {
            self.buf.extend(bytes);
        }
    }

    pub fn is_failed(&self) -> bool {
        self.failed
    }

    /// Bytes received but not yet part of a complete packet.
    pub fn pending(&self) -> usize {
        self.buf.len()
    }

    pub fn next_packet(&mut self) -> Option<Result<DirectionPacket, WireError>> {
        if self.failed || self.buf.len() < HEADER_LEN {
            return None;
        }
        let header: Vec<u8> = self.buf.range(..HEADER_LEN).copied().collect();
        let total = match check_header(&header) {
            Ok(n) => n,
            Err(e) => {
                self.failed = true;
                self.buf.clear();
                return Some(Err(e));
            }
        };
        if self.buf.len() < total {
            return None;
        }
        let frame: Vec<u8> = self.buf.drain(..total).collect();
        Some(decode_packet(&frame))
    }

    /// Pushes `bytes` and returns every packet that became complete.
    pub fn feed(&mut self, bytes: &[u8]) -> Vec<Result<DirectionPacket, WireError>> {
        self.push(bytes);
        std::iter::from_fn(|| self.next_packet()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wire::{encode_packet, ErrorCode};

    fn stream() -> (Vec<DirectionPacket>, Vec<u8>) {
        let ps = vec![
            DirectionPacket::exec(1, "print"),
            DirectionPacket::reply(1, -5),
            DirectionPacket::error(2, ErrorCode::Parse),
        ];
        let bytes = ps.iter().flat_map(|p| encode_packet(p).unwrap()).collect();
        (ps, bytes)
    }

    #[test]
    fn empty_stream() {
        assert!(FrameDecoder::new().feed(&[]).is_empty());
    }

    #[test]
    fn one_read_many_packets() {
        let (ps, bytes) = stream();
        let got: Vec<_> = FrameDecoder::new()
            .feed(&bytes)
            .into_iter()
            .map(Result::unwrap)
            .collect();
        assert_eq!(got, ps);
    }

    #[test]
    fn byte_at_a_time() {
        let (ps, bytes) = stream();
        let mut d = FrameDecoder::new();
        let mut got = Vec::new();
        for b in bytes {
            got.extend(d.feed(&[b]).into_iter().map(Result::unwrap));
        }
        assert_eq!(got, ps);
        assert_eq!(d.pending(), 0);
    }

    #[test]
    fn bad_body_is_skipped() {
        let mut bytes = b"DIRP\x01\x09\x00\x00\x00\x01\x00\x01z".to_vec();
        bytes.extend(encode_packet(&DirectionPacket::reply(3, 1)).unwrap());
        let got = FrameDecoder::new().feed(&bytes);
        assert_eq!(got[0], Err(WireError::BadKind(9)));
        assert_eq!(got[1], Ok(DirectionPacket::reply(3, 1)));
    }

    #[test]
    fn desync_is_fatal() {
        let mut d = FrameDecoder::new();
        let got = d.feed(b"HTTP/1.1 200 OK\r\n");
        assert!(matches!(got[..], [Err(WireError::BadMagic(_))]));
        assert!(d.is_failed());
        assert!(d
            .feed(&encode_packet(&DirectionPacket::reply(1, 1)).unwrap())
            .is_empty());
    }
}
