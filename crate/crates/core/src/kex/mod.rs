//! Elliptic-curve Diffie-Hellman over small prime fields, the uniform KEM
//! and signature contracts, and adapters that turn bit-encryption schemes
//! into KEMs.

mod adapters;
mod curve;
mod instances;

pub use adapters::{
    kem_from_encryption, BitEncryption, EcdhKem, EncryptionKem, IdentityBits, LweBits,
    McElieceBits, StubKem, StubSig,
};
pub use curve::{
    builtin_curves, ecdh_exchange, ecdh_exchange_with_scalars, enumerate_points, parse_curves,
    point_add, point_neg, point_order, scalar_mul, CurveFixture, CurveParams, EcdhTranscript,
    Point, CURVES_TXT,
};
pub use instances::{
    kem_by_name, sig_by_name, FsDlogSig, LamportSig, MssSig, UovSig, WotsSig, KEM_NAMES,
    SIG_NAMES,
};

use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KexError {
    #[error("point is not on the curve")]
    PointNotOnCurve,
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("invalid key: {0}")]
    InvalidKey(String),
    #[error("decapsulation failed: {0}")]
    DecapsFailure(String),
    #[error("signing failed: {0}")]
    SignFailure(String),
}

/// Key encapsulation: `decaps(sk, ct)` returns the secret `encaps(pk)` produced.
pub trait Kem: Send + Sync {
    fn name(&self) -> &str;
    /// Returns `(public key, secret key)`.
    fn keypair(&self, rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError>;
    /// Returns `(ciphertext, shared secret)`.
    fn encaps(&self, pk: &[u8], rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError>;
    fn decaps(&self, sk: &[u8], ct: &[u8]) -> Result<Vec<u8>, KexError>;
}

/// Signatures: `verify(pk, m, sign(sk, m))` holds for every message.
pub trait SigScheme: Send + Sync {
    fn name(&self) -> &str;
    /// Returns `(public key, secret key)`.
    fn keypair(&self, rng: &mut dyn RngCore) -> Result<(Vec<u8>, Vec<u8>), KexError>;
    fn sign(&self, sk: &[u8], msg: &[u8], rng: &mut dyn RngCore) -> Result<Vec<u8>, KexError>;
    /// Malformed keys or signatures verify as false.
    fn verify(&self, pk: &[u8], msg: &[u8], sig: &[u8]) -> bool;
}
