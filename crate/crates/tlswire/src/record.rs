//! Record layer over stream and datagram transports, plus the handshake
//! channel that frames, fragments, reassembles, and transcribes handshake
//! messages.

use std::collections::VecDeque;
use std::io::{Read, Write};
use std::net::{TcpStream, UdpSocket};
use std::time::{Duration, Instant};

use crate::crypto::{CipherState, MAX_CIPHERTEXT};
use crate::msgs::{CT_ALERT, CT_APPLICATION_DATA, CT_CHANGE_CIPHER_SPEC, CT_HANDSHAKE};
use crate::wire::{Reader, Writer};
use crate::{Version, WireError};

const MAX_PLAINTEXT: usize = 16384;
const MAX_DATAGRAM: usize = 60000;

fn map_io(e: std::io::Error) -> WireError {
    use std::io::ErrorKind::*;
    match e.kind() {
        WouldBlock | TimedOut => WireError::Timeout,
        UnexpectedEof | ConnectionReset | ConnectionAborted | ConnectionRefused | BrokenPipe
        | NotConnected => WireError::PeerClosed,
        _ => WireError::Io(e.to_string()),
    }
}

fn remaining(deadline: Instant) -> Result<Duration, WireError> {
    let now = Instant::now();
    if now >= deadline {
        Err(WireError::Timeout)
    } else {
        Ok(deadline - now)
    }
}

struct StreamIo {
    stream: TcpStream,
    buf: Vec<u8>,
}

impl StreamIo {
    fn read_exactly(&mut self, n: usize, deadline: Instant) -> Result<Vec<u8>, WireError> {
        while self.buf.len() < n {
            let budget = remaining(deadline)?;
            self.stream.set_read_timeout(Some(budget)).map_err(map_io)?;
            let mut tmp = [0u8; 4096];
            match self.stream.read(&mut tmp) {
                Ok(0) => return Err(WireError::PeerClosed),
                Ok(k) => self.buf.extend_from_slice(&tmp[..k]),
                Err(e) => return Err(map_io(e)),
            }
        }
        Ok(self.buf.drain(..n).collect())
    }
}

struct DatagramIo {
    socket: UdpSocket,
    /// Fixed peer for an unconnected socket; datagrams from anyone else are
    /// dropped. `None` means the socket is already connected.
    peer: Option<std::net::SocketAddr>,
    parsed: VecDeque<RawRecord>,
}

impl DatagramIo {
    fn send(&self, buf: &[u8]) -> std::io::Result<usize> {
        match self.peer {
            Some(peer) => self.socket.send_to(buf, peer),
            None => self.socket.send(buf),
        }
    }

    fn enqueue(&mut self, datagram: &[u8]) {
        let mut r = Reader::new(datagram);
        while r.remaining() >= 13 {
            let ct = r.u8().expect("length checked");
            let ver = r.u16().expect("length checked");
            let epoch = r.u16().expect("length checked");
            let seq = r.u48().expect("length checked");
            let body = match r.vec16() {
                Ok(b) => b.to_vec(),
                Err(_) => return,
            };
            self.parsed.push_back(RawRecord { content_type: ct, wire_version: ver, epoch, seq, body });
        }
    }

    fn next_record(&mut self, deadline: Instant) -> Result<RawRecord, WireError> {
        loop {
            if let Some(rec) = self.parsed.pop_front() {
                return Ok(rec);
            }
            let budget = remaining(deadline)?;
            self.socket.set_read_timeout(Some(budget)).map_err(map_io)?;
            let mut buf = [0u8; 65536];
            match self.peer {
                Some(peer) => match self.socket.recv_from(&mut buf) {
                    Ok((n, from)) if from == peer => self.enqueue(&buf[..n]),
                    Ok(_) => continue,
                    Err(e) => return Err(map_io(e)),
                },
                None => match self.socket.recv(&mut buf) {
                    Ok(n) => self.enqueue(&buf[..n]),
                    Err(e) => return Err(map_io(e)),
                },
            }
        }
    }
}

struct RawRecord {
    content_type: u8,
    #[allow(dead_code)]
    wire_version: u16,
    epoch: u16,
    seq: u64,
    body: Vec<u8>,
}

enum Io {
    Stream(StreamIo),
    Datagram(DatagramIo),
}

/// Encrypting/decrypting record transport shared by client and server.
pub struct RecordLayer {
    io: Io,
    datagram: bool,
    /// Version stamped on outgoing record headers.
    pub wire_version: u16,
    write_cipher: CipherState,
    read_cipher: CipherState,
    write_seq: u64,
    write_epoch: u16,
    read_seq: u64,
    read_epoch: u16,
    out: Vec<u8>,
    last_flight: Vec<u8>,
}

impl RecordLayer {
    pub fn stream(stream: TcpStream) -> RecordLayer {
        RecordLayer {
            io: Io::Stream(StreamIo { stream, buf: Vec::new() }),
            datagram: false,
            wire_version: Version::Tls10.wire(),
            write_cipher: CipherState::plaintext(),
            read_cipher: CipherState::plaintext(),
            write_seq: 0,
            write_epoch: 0,
            read_seq: 0,
            read_epoch: 0,
            out: Vec::new(),
            last_flight: Vec::new(),
        }
    }

    /// Datagram transport over a connected socket; `initial` carries a
    /// datagram that was already received while accepting.
    pub fn datagram(socket: UdpSocket, initial: Option<&[u8]>) -> RecordLayer {
        RecordLayer::datagram_io(socket, None, initial)
    }

    /// Datagram transport over an unconnected socket pinned to one peer,
    /// for servers that keep their listening socket shared.
    pub fn datagram_to(
        socket: UdpSocket,
        peer: std::net::SocketAddr,
        initial: Option<&[u8]>,
    ) -> RecordLayer {
        RecordLayer::datagram_io(socket, Some(peer), initial)
    }

    fn datagram_io(
        socket: UdpSocket,
        peer: Option<std::net::SocketAddr>,
        initial: Option<&[u8]>,
    ) -> RecordLayer {
        let mut io = DatagramIo { socket, peer, parsed: VecDeque::new() };
        if let Some(bytes) = initial {
            io.enqueue(bytes);
        }
        RecordLayer {
            io: Io::Datagram(io),
            datagram: true,
            wire_version: 0xFEFF,
            write_cipher: CipherState::plaintext(),
            read_cipher: CipherState::plaintext(),
            write_seq: 0,
            write_epoch: 0,
            read_seq: 0,
            read_epoch: 0,
            out: Vec::new(),
            last_flight: Vec::new(),
        }
    }

    pub fn is_datagram(&self) -> bool {
        self.datagram
    }

    /// Seals a record and queues it for the next flush.
    pub fn send_record(&mut self, content_type: u8, payload: &[u8]) {
        debug_assert!(payload.len() <= MAX_PLAINTEXT);
        let seq = if self.datagram {
            ((self.write_epoch as u64) << 48) | self.write_seq
        } else {
            self.write_seq
        };
        let sealed = self
            .write_cipher
            .seal(seq, content_type, self.wire_version, payload);
        let mut w = Writer::new();
        w.u8(content_type);
        w.u16(self.wire_version);
        if self.datagram {
            w.u16(self.write_epoch);
            w.u48(self.write_seq);
        }
        w.vec16(&sealed);
        self.out.extend_from_slice(&w.into_bytes());
        self.write_seq += 1;
    }

    /// Writes all queued records: one datagram on UDP, a plain write on TCP.
    pub fn flush(&mut self) -> Result<(), WireError> {
        if self.out.is_empty() {
            return Ok(());
        }
        let bytes = std::mem::take(&mut self.out);
        match &mut self.io {
            Io::Stream(s) => s.stream.write_all(&bytes).map_err(map_io)?,
            Io::Datagram(d) => {
                debug_assert!(bytes.len() <= MAX_DATAGRAM);
                d.send(&bytes).map_err(map_io)?;
                self.last_flight = bytes;
            }
        }
        Ok(())
    }

    /// Re-sends the last flushed datagram flight.
    pub fn retransmit(&mut self) -> Result<(), WireError> {
        if let (Io::Datagram(d), false) = (&mut self.io, self.last_flight.is_empty()) {
            d.send(&self.last_flight).map_err(map_io)?;
        }
        Ok(())
    }

    /// Receives and deciphers one record.
    pub fn recv_record(&mut self, timeout: Duration) -> Result<(u8, Vec<u8>), WireError> {
        let deadline = Instant::now() + timeout;
        match &mut self.io {
            Io::Stream(s) => {
                let header = s.read_exactly(5, deadline)?;
                let content_type = header[0];
                if !(20..=23).contains(&content_type) || header[1] != 3 {
                    return Err(WireError::Decode("not a TLS record".into()));
                }
                let len = u16::from_be_bytes([header[3], header[4]]) as usize;
                if len > MAX_CIPHERTEXT {
                    return Err(WireError::Decode("oversized record".into()));
                }
                let body = s.read_exactly(len, deadline)?;
                let plain =
                    self.read_cipher
                        .open(self.read_seq, content_type, self.wire_version, &body)?;
                self.read_seq += 1;
                Ok((content_type, plain))
            }
            Io::Datagram(d) => loop {
                let rec = d.next_record(deadline)?;
                if !(20..=23).contains(&rec.content_type) {
                    continue;
                }
                if rec.epoch < self.read_epoch {
                    return Err(WireError::PeerRetransmit);
                }
                if rec.epoch > self.read_epoch {
                    return Err(WireError::Decode("record from a future epoch".into()));
                }
                let seq = ((rec.epoch as u64) << 48) | rec.seq;
                match self
                    .read_cipher
                    .open(seq, rec.content_type, self.wire_version, &rec.body)
                {
                    Ok(plain) => return Ok((rec.content_type, plain)),
                    Err(_) => continue,
                }
            },
        }
    }

    /// Installs the write cipher agreed in the handshake; sequence numbers
    /// restart and (on datagram transports) the epoch advances.
    pub fn change_write_cipher(&mut self, cipher: CipherState) {
        self.write_cipher = cipher;
        self.write_seq = 0;
        self.write_epoch += 1;
    }

    /// Installs the read cipher agreed in the handshake.
    pub fn change_read_cipher(&mut self, cipher: CipherState) {
        self.read_cipher = cipher;
        self.read_seq = 0;
        self.read_epoch += 1;
    }
}

/// One decoded event from the peer.
#[derive(Debug)]
pub enum Incoming {
    Msg { handshake_type: u8, body: Vec<u8> },
    ChangeCipher,
    Alert { level: u8, code: u8 },
    AppData(Vec<u8>),
}

/// Handshake message framing over a [`RecordLayer`], including the running
/// transcript used for Finished and CertificateVerify computations.
pub struct HandshakeChannel {
    pub rl: RecordLayer,
    transcript: Vec<u8>,
    stream_in: Vec<u8>,
    next_recv_seq: u16,
    next_send_seq: u16,
    reassembly: Option<Reassembly>,
}

struct Reassembly {
    handshake_type: u8,
    seq: u16,
    total: usize,
    have: usize,
    body: Vec<u8>,
}

impl HandshakeChannel {
    pub fn new(rl: RecordLayer) -> HandshakeChannel {
        HandshakeChannel {
            rl,
            transcript: Vec::new(),
            stream_in: Vec::new(),
            next_recv_seq: 0,
            next_send_seq: 0,
            reassembly: None,
        }
    }

    pub fn transcript(&self) -> &[u8] {
        &self.transcript
    }

    /// Drops transcript state accumulated before a datagram cookie exchange.
    pub fn reset_transcript(&mut self) {
        self.transcript.clear();
    }

    /// Frames and queues one handshake message. Messages excluded from the
    /// transcript (datagram cookie exchange) pass `in_transcript = false`.
    pub fn send_msg(&mut self, handshake_type: u8, body: &[u8], in_transcript: bool) {
        if self.rl.is_datagram() {
            let mut w = Writer::new();
            w.u8(handshake_type);
            w.u24(body.len() as u32);
            w.u16(self.next_send_seq);
            w.u24(0);
            w.u24(body.len() as u32);
            w.bytes(body);
            let framed = w.into_bytes();
            if in_transcript {
                self.transcript.extend_from_slice(&framed);
            }
            self.rl.send_record(CT_HANDSHAKE, &framed);
        } else {
            let mut w = Writer::new();
            w.u8(handshake_type);
            w.u24(body.len() as u32);
            w.bytes(body);
            let framed = w.into_bytes();
            if in_transcript {
                self.transcript.extend_from_slice(&framed);
            }
            for chunk in framed.chunks(MAX_PLAINTEXT) {
                self.rl.send_record(CT_HANDSHAKE, chunk);
            }
        }
        self.next_send_seq = self.next_send_seq.wrapping_add(1);
    }

    pub fn send_change_cipher(&mut self) {
        self.rl.send_record(CT_CHANGE_CIPHER_SPEC, &[1]);
    }

    pub fn send_alert(&mut self, level: u8, code: u8) -> Result<(), WireError> {
        self.rl.send_record(CT_ALERT, &[level, code]);
        self.rl.flush()
    }

    fn pop_stream_msg(&mut self) -> Option<(u8, Vec<u8>)> {
        if self.stream_in.len() < 4 {
            return None;
        }
        let len = u32::from_be_bytes([0, self.stream_in[1], self.stream_in[2], self.stream_in[3]])
            as usize;
        if self.stream_in.len() < 4 + len {
            return None;
        }
        let handshake_type = self.stream_in[0];
        let raw: Vec<u8> = self.stream_in.drain(..4 + len).collect();
        self.transcript.extend_from_slice(&raw);
        Some((handshake_type, raw[4..].to_vec()))
    }

    fn ingest_datagram_fragment(&mut self, payload: &[u8]) -> Result<Option<(u8, Vec<u8>)>, WireError> {
        let mut r = Reader::new(payload);
        while !r.is_empty() {
            let handshake_type = r.u8()?;
            let total = r.u24()? as usize;
            let seq = r.u16()?;
            let offset = r.u24()? as usize;
            let frag_len = r.u24()? as usize;
            let frag = r.take(frag_len)?;
            if seq < self.next_recv_seq {
                return Err(WireError::PeerRetransmit);
            }
            if seq > self.next_recv_seq {
                return Err(WireError::Decode("handshake message out of order".into()));
            }
            let entry = self.reassembly.get_or_insert_with(|| Reassembly {
                handshake_type,
                seq,
                total,
                have: 0,
                body: vec![0u8; total],
            });
            if entry.handshake_type != handshake_type || entry.total != total || entry.seq != seq {
                return Err(WireError::Decode("inconsistent handshake fragments".into()));
            }
            if offset != entry.have || offset + frag_len > total {
                return Err(WireError::Decode("non-contiguous handshake fragment".into()));
            }
            entry.body[offset..offset + frag_len].copy_from_slice(frag);
            entry.have += frag_len;
            if entry.have == total {
                let entry = self.reassembly.take().expect("just inserted");
                let mut w = Writer::new();
                w.u8(entry.handshake_type);
                w.u24(total as u32);
                w.u16(entry.seq);
                w.u24(0);
                w.u24(total as u32);
                w.bytes(&entry.body);
                self.transcript.extend_from_slice(&w.into_bytes());
                self.next_recv_seq = self.next_recv_seq.wrapping_add(1);
                return Ok(Some((entry.handshake_type, entry.body)));
            }
        }
        Ok(None)
    }

    /// Returns the next peer event, reassembling handshake messages.
    pub fn recv(&mut self, timeout: Duration) -> Result<Incoming, WireError> {
        let deadline = Instant::now() + timeout;
        loop {
            if !self.rl.is_datagram() {
                if let Some((handshake_type, body)) = self.pop_stream_msg() {
                    return Ok(Incoming::Msg { handshake_type, body });
                }
            }
            let budget = remaining(deadline)?;
            let (content_type, payload) = self.rl.recv_record(budget)?;
            match content_type {
                CT_HANDSHAKE => {
                    if self.rl.is_datagram() {
                        if let Some((handshake_type, body)) =
                            self.ingest_datagram_fragment(&payload)?
                        {
                            return Ok(Incoming::Msg { handshake_type, body });
                        }
                    } else {
                        self.stream_in.extend_from_slice(&payload);
                    }
                }
                CT_CHANGE_CIPHER_SPEC => {
                    if payload != [1] {
                        return Err(WireError::Decode("bad cipher-change record".into()));
                    }
                    return Ok(Incoming::ChangeCipher);
                }
                CT_ALERT => {
                    if payload.len() != 2 {
                        return Err(WireError::Decode("bad alert record".into()));
                    }
                    return Ok(Incoming::Alert { level: payload[0], code: payload[1] });
                }
                CT_APPLICATION_DATA => return Ok(Incoming::AppData(payload)),
                _ => return Err(WireError::Decode("unknown record type".into())),
            }
        }
    }
}
