use std::io::{ErrorKind, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::sync::mpsc::{channel, Receiver, Sender};

use super::{TlsError, FRAME_HEADER_LEN, MAX_FRAME_LEN};
use crate::bench::{Clock, FakeClock};

/// Carries whole frames between the two ends of a handshake.
pub trait Transport: Send {
    fn send(&mut self, frame: &[u8]) -> Result<(), TlsError>;
    /// `None` once the peer has closed its end.
    fn recv(&mut self) -> Result<Option<Vec<u8>>, TlsError>;
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn send(&mut self, frame: &[u8]) -> Result<(), TlsError> {
        (**self).send(frame)
    }

    fn recv(&mut self) -> Result<Option<Vec<u8>>, TlsError> {
        (**self).recv()
    }
}

/// One end of an in-process duplex channel.
#[derive(Debug)]
pub struct MemoryTransport {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    sent: u64,
    received: u64,
}

impl MemoryTransport {
    pub fn pair() -> (MemoryTransport, MemoryTransport) {
        let (a_tx, b_rx) = channel();
        let (b_tx, a_rx) = channel();
        (
            MemoryTransport {
                tx: a_tx,
                rx: a_rx,
                sent: 0,
                received: 0,
            },
            MemoryTransport {
                tx: b_tx,
                rx: b_rx,
                sent: 0,
                received: 0,
            },
        )
    }

    pub fn bytes_sent(&self) -> u64 {
        self.sent
    }

    pub fn bytes_received(&self) -> u64 {
        self.received
    }
}

impl Transport for MemoryTransport {
    fn send(&mut self, frame: &[u8]) -> Result<(), TlsError> {
        self.tx.send(frame.to_vec()).map_err(|_| TlsError::PeerClosed)?;
        self.sent += frame.len() as u64;
        Ok(())
    }

    fn recv(&mut self) -> Result<Option<Vec<u8>>, TlsError> {
        match self.rx.recv() {
            Ok(frame) => {
                self.received += frame.len() as u64;
                Ok(Some(frame))
            }
            Err(_) => Ok(None),
        }
    }
}

/// Frames over a TCP stream, with the same framing as in memory.
#[derive(Debug)]
pub struct TcpTransport {
    stream: TcpStream,
}

impl TcpTransport {
    pub fn connect<A: ToSocketAddrs>(addr: A) -> Result<Self, TlsError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(TcpTransport { stream })
    }

    pub fn from_stream(stream: TcpStream) -> Self {
        TcpTransport { stream }
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, frame: &[u8]) -> Result<(), TlsError> {
        self.stream.write_all(frame)?;
        Ok(())
    }

    fn recv(&mut self) -> Result<Option<Vec<u8>>, TlsError> {
        let mut header = [0u8; FRAME_HEADER_LEN];
        match self.stream.read_exact(&mut header) {
            Ok(()) => {}
            Err(e) if matches!(e.kind(), ErrorKind::UnexpectedEof | ErrorKind::ConnectionReset) => {
                return Ok(None)
            }
            Err(e) => return Err(e.into()),
        }
        let len = u32::from_be_bytes(header[1..].try_into().unwrap()) as usize;
        if len > MAX_FRAME_LEN {
            return Err(TlsError::LengthOverflow(len));
        }
        let mut frame = header.to_vec();
        frame.resize(FRAME_HEADER_LEN + len, 0);
        self.stream.read_exact(&mut frame[FRAME_HEADER_LEN..])?;
        Ok(Some(frame))
    }
}

/// Advances a fake clock by a fixed cost on every send and receive.
pub struct ClockedTransport<T> {
    inner: T,
    clock: FakeClock,
    cost_ns: u64,
}

impl<T: Transport> ClockedTransport<T> {
    pub fn new(inner: T, clock: FakeClock, cost_ns: u64) -> Self {
        ClockedTransport { inner, clock, cost_ns }
    }

    pub fn now_ns(&self) -> u64 {
        self.clock.now_ns()
    }
}

impl<T: Transport> Transport for ClockedTransport<T> {
    fn send(&mut self, frame: &[u8]) -> Result<(), TlsError> {
        self.clock.advance(self.cost_ns);
        self.inner.send(frame)
    }

    fn recv(&mut self) -> Result<Option<Vec<u8>>, TlsError> {
        let out = self.inner.recv();
        self.clock.advance(self.cost_ns);
        out
    }
}
