//! Desk-scale post-quantum toolkit: toy versions of each scheme family, a
//! liboqs-style benchmark harness, and a TLS 1.3-shaped handshake simulator
//! with exact byte accounting.

pub mod api;
pub mod bench;
pub mod bits;
pub mod codecrypt;
pub mod hash;
pub mod hashsig;
pub mod kex;
pub mod lattice;
pub mod mq;
pub mod registry;
pub mod sigma;
pub mod tlssim;
pub mod wire;
