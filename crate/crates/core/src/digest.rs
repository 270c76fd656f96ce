//! Content hashes of input matrices for report provenance.

use alloc::string::String;
use core::fmt::Write;

use sha2::{Digest, Sha256};

use crate::matrices::Matrix;

fn feed(hasher: &mut Sha256, m: &Matrix) {
    let (rows, cols) = m.dims();
    hasher.update((rows as u64).to_le_bytes());
    hasher.update((cols as u64).to_le_bytes());
    match m {
        Matrix::Float(f) => {
            hasher.update(b"f");
            for z in f.entries() {
                hasher.update(z.re.to_bits().to_le_bytes());
                hasher.update(z.im.to_bits().to_le_bytes());
            }
        }
        Matrix::Exact(e) => {
            hasher.update(b"x");
            for z in e.entries() {
                hasher.update(z.re.to_signed_bytes_le());
                hasher.update(b",");
                hasher.update(z.im.to_signed_bytes_le());
                hasher.update(b";");
            }
        }
    }
}

/// `sha256:<hex>` over the dimensions and entry bits of every input, in order.
pub(crate) fn inputs_digest(inputs: &[&Matrix]) -> String {
    let mut hasher = Sha256::new();
    for m in inputs {
        feed(&mut hasher, m);
    }
    let mut out = String::from("sha256:");
    for byte in hasher.finalize() {
        let _ = write!(out, "{byte:02x}");
    }
    out
}
