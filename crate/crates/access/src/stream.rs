//! Byte-budgeted reading shared by the access checks.

use std::io::{ErrorKind, Read};

/// Why a read stopped short of its goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ReadStop {
    /// The peer closed or reset the connection.
    Eof,
    /// The stream's read timeout fired.
    Timeout,
    /// The byte budget ran out.
    BudgetExhausted,
}

/// Wraps a stream so reads never consume more than `budget` bytes in total
/// and the consumed count is tracked exactly.
pub(crate) struct CountingReader<R: Read> {
    inner: R,
    budget: u64,
    consumed: u64,
}

impl<R: Read> CountingReader<R> {
    pub(crate) fn new(inner: R, budget: u64) -> Self {
        CountingReader {
            inner,
            budget,
            consumed: 0,
        }
    }

    pub(crate) fn consumed(&self) -> u64 {
        self.consumed
    }

    pub(crate) fn budget_left(&self) -> u64 {
        self.budget - self.consumed
    }

    /// Reads exactly `buf.len()` bytes or reports why it could not.
    pub(crate) fn read_exact_or_stop(&mut self, buf: &mut [u8]) -> Result<(), ReadStop> {
        let mut filled = 0;
        while filled < buf.len() {
            if self.budget_left() == 0 {
                return Err(ReadStop::BudgetExhausted);
            }
            let max = (buf.len() - filled).min(self.budget_left() as usize);
            match self.inner.read(&mut buf[filled..filled + max]) {
                Ok(0) => return Err(ReadStop::Eof),
                Ok(n) => {
                    filled += n;
                    self.consumed += n as u64;
                }
                Err(e) if e.kind() == ErrorKind::Interrupted => continue,
                Err(e) => return Err(classify_error(&e)),
            }
        }
        Ok(())
    }

    pub(crate) fn read_u8(&mut self) -> Result<u8, ReadStop> {
        let mut byte = [0u8; 1];
        self.read_exact_or_stop(&mut byte)?;
        Ok(byte[0])
    }

    /// Reads up to `buf.len()` bytes within the budget; `Ok(0)` is EOF.
    pub(crate) fn read_some(&mut self, buf: &mut [u8]) -> Result<usize, ReadStop> {
        if self.budget_left() == 0 {
            return Err(ReadStop::BudgetExhausted);
        }
        let max = buf.len().min(self.budget_left() as usize);
        loop {
            match self.inner.read(&mut buf[..max]) {
                Ok(n) => {
                    self.consumed += n as u64;
                    return Ok(n);
                }
                Err(e) if e.kind() == ErrorKind::Interrupted => continue,
                Err(e) => return Err(classify_error(&e)),
            }
        }
    }
}

/// Maps an I/O error to the stop reason the verdicts distinguish.
pub(crate) fn classify_error(error: &std::io::Error) -> ReadStop {
    match error.kind() {
        ErrorKind::TimedOut | ErrorKind::WouldBlock => ReadStop::Timeout,
        _ => ReadStop::Eof,
    }
}
