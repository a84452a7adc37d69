//! Application-data exchange on an established connection.

use std::time::Duration;

use crate::alert::{CLOSE_NOTIFY, LEVEL_WARNING};
use crate::msgs::{CT_APPLICATION_DATA, HT_HELLO_REQUEST};
use crate::record::{HandshakeChannel, Incoming};
use crate::WireError;

const MAX_CHUNK: usize = 16384;

/// An established connection carrying application data.
pub struct Session {
    hs: HandshakeChannel,
    peer_closed: bool,
}

impl Session {
    pub(crate) fn new(hs: HandshakeChannel) -> Session {
        Session { hs, peer_closed: false }
    }

    /// Sends application data, splitting oversized payloads across records.
    pub fn send(&mut self, data: &[u8]) -> Result<(), WireError> {
        for chunk in data.chunks(MAX_CHUNK) {
            self.hs.rl.send_record(CT_APPLICATION_DATA, chunk);
        }
        self.hs.rl.flush()
    }

    /// Receives the next application payload. `Ok(None)` means the peer
    /// closed the connection, cleanly or not.
    pub fn recv(&mut self, timeout: Duration) -> Result<Option<Vec<u8>>, WireError> {
        if self.peer_closed {
            return Ok(None);
        }
        loop {
            match self.hs.recv(timeout) {
                Ok(Incoming::AppData(data)) => return Ok(Some(data)),
                Ok(Incoming::Alert { code: CLOSE_NOTIFY, .. }) => {
                    self.peer_closed = true;
                    return Ok(None);
                }
                Ok(Incoming::Alert { level: LEVEL_WARNING, .. }) => continue,
                Ok(Incoming::Alert { level, code }) => {
                    self.peer_closed = true;
                    return Err(WireError::Alert { level, code });
                }
                Ok(Incoming::Msg { handshake_type: HT_HELLO_REQUEST, .. }) => continue,
                Ok(Incoming::Msg { .. }) | Ok(Incoming::ChangeCipher) => {
                    return Err(WireError::Decode("unexpected renegotiation".into()))
                }
                Err(WireError::PeerRetransmit) => {
                    self.hs.rl.retransmit()?;
                    continue;
                }
                Err(WireError::PeerClosed) => {
                    self.peer_closed = true;
                    return Ok(None);
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Announces an orderly shutdown.
    pub fn close(&mut self) {
        let _ = self.hs.send_alert(LEVEL_WARNING, CLOSE_NOTIFY);
    }
}
