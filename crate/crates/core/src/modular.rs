//! Exact Gaussian-integer permanents by multi-modular Ryser.
//!
//! Each entry is reduced into `Z[i]/p` for a handful of 62-bit primes, the
//! Ryser sum is evaluated in Montgomery form for every prime, and the
//! residues are lifted back to `Z[i]` with Garner's CRT. The number of primes
//! is chosen from the bound `|per(A)| <= prod_i sum_j (|Re a_ij| + |Im a_ij|)`
//! so that the symmetric residue range always covers the true value.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::matrices::{ExactMatrix, GaussianInt};
use crate::{Error, Result};

/// The 48 largest primes below 2^62.
const PRIMES: [u64; 48] = [
    0x3fffffffffffffc7,
    0x3fffffffffffffa9,
    0x3fffffffffffff8b,
    0x3fffffffffffff71,
    0x3fffffffffffff67,
    0x3fffffffffffff59,
    0x3fffffffffffff55,
    0x3fffffffffffff3d,
    0x3fffffffffffff35,
    0x3ffffffffffffeef,
    0x3ffffffffffffee1,
    0x3ffffffffffffec3,
    0x3ffffffffffffe45,
    0x3ffffffffffffe1d,
    0x3ffffffffffffe11,
    0x3ffffffffffffdc1,
    0x3ffffffffffffdbb,
    0x3ffffffffffffda5,
    0x3ffffffffffffd87,
    0x3ffffffffffffd69,
    0x3ffffffffffffd03,
    0x3ffffffffffffcfb,
    0x3ffffffffffffcf7,
    0x3ffffffffffffce9,
    0x3ffffffffffffcd3,
    0x3ffffffffffffcc1,
    0x3ffffffffffffc65,
    0x3ffffffffffffc2b,
    0x3ffffffffffffc1f,
    0x3ffffffffffffc17,
    0x3ffffffffffffc11,
    0x3ffffffffffffc07,
    0x3ffffffffffffb53,
    0x3ffffffffffffb27,
    0x3ffffffffffffaf3,
    0x3ffffffffffffab7,
    0x3ffffffffffffa67,
    0x3ffffffffffffa15,
    0x3ffffffffffff9ef,
    0x3ffffffffffff9d9,
    0x3ffffffffffff9d3,
    0x3ffffffffffff9c5,
    0x3ffffffffffff9af,
    0x3ffffffffffff977,
    0x3ffffffffffff95f,
    0x3ffffffffffff95b,
    0x3ffffffffffff959,
    0x3ffffffffffff8e1,
];

/// Every prime exceeds 2^61, so k primes cover 61·k bits.
const BITS_PER_PRIME: u64 = 61;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Montgomery {
    p: u64,
    neg_inv: u64,
    r2: u64,
}

impl Montgomery {
    pub(crate) fn new(p: u64) -> Self {
        debug_assert!(p % 2 == 1 && p < 1 << 62);
        let mut inv = p;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        Self {
            p,
            neg_inv: inv.wrapping_neg(),
            r2,
        }
    }

    /// `t · 2^-64 mod p` for `t < 2^126`; output in `[0, p)`.
    #[inline(always)]
    fn reduce(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline(always)]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn mont(&self, x: u64) -> u64 {
        self.reduce(x as u128 * self.r2 as u128)
    }

    fn unmont(&self, x: u64) -> u64 {
        self.reduce(x as u128)
    }

    fn residue(&self, x: &BigInt) -> u64 {
        let p = BigInt::from(self.p);
        x.mod_floor(&p).to_u64().expect("residue below p")
    }

    #[inline(always)]
    fn add_zi(&self, a: Zi, b: Zi) -> Zi {
        Zi {
            re: self.add(a.re, b.re),
            im: self.add(a.im, b.im),
        }
    }

    #[inline(always)]
    fn sub_zi(&self, a: Zi, b: Zi) -> Zi {
        Zi {
            re: self.sub(a.re, b.re),
            im: self.sub(a.im, b.im),
        }
    }

    #[inline(always)]
    fn mul_zi(&self, a: Zi, b: Zi) -> Zi {
        let p2 = self.p as u128 * self.p as u128;
        let re = a.re as u128 * b.re as u128 + (p2 - a.im as u128 * b.im as u128);
        let im = a.re as u128 * b.im as u128 + a.im as u128 * b.re as u128;
        Zi {
            re: self.reduce(re),
            im: self.reduce(im),
        }
    }

    fn encode(&self, z: &GaussianInt) -> Zi {
        Zi {
            re: self.mont(self.residue(&z.re)),
            im: self.mont(self.residue(&z.im)),
        }
    }

    fn decode(&self, z: Zi) -> (u64, u64) {
        (self.unmont(z.re), self.unmont(z.im))
    }

    fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        // plain (non-Montgomery) residues
        let mut acc = 1u64;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = ((acc as u128 * base as u128) % self.p as u128) as u64;
            }
            base = ((base as u128 * base as u128) % self.p as u128) as u64;
            exp >>= 1;
        }
        acc
    }

    fn inverse(&self, x: u64) -> u64 {
        self.pow(x, self.p - 2)
    }
}

/// Element of `Z[i]/p` in Montgomery form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Zi {
    re: u64,
    im: u64,
}

/// Number of bits needed to hold `prod_i max(1, sum_j |Re a_ij| + |Im a_ij|)`
/// over the selected rows/columns.
pub(crate) fn permanent_bound_bits(m: &ExactMatrix) -> u64 {
    let mut bound = BigUint::one();
    for i in 0..m.rows() {
        let mut row = BigUint::zero();
        for j in 0..m.cols() {
            let z = m.get(i, j);
            row += z.re.magnitude() + z.im.magnitude();
        }
        if row.is_zero() {
            row = BigUint::one();
        }
        bound *= row;
    }
    bound.bits()
}

/// `m` reduced modulo enough primes to reconstruct the permanent of it, or of
/// any of its square submatrices.
pub(crate) struct ResidueMatrix {
    n: usize,
    fields: Vec<Montgomery>,
    /// `data[k]` holds the row-major residues modulo `fields[k]`.
    data: Vec<Vec<Zi>>,
}

impl ResidueMatrix {
    pub(crate) fn new(m: &ExactMatrix) -> Result<Self> {
        let n = m.require_square()?;
        let bits = permanent_bound_bits(m) + 2;
        let count = bits.div_ceil(BITS_PER_PRIME) as usize;
        if count > PRIMES.len() {
            return Err(Error::ExactRangeExceeded { bits });
        }
        let fields: Vec<Montgomery> = PRIMES[..count.max(1)]
            .iter()
            .map(|&p| Montgomery::new(p))
            .collect();
        let data = fields
            .iter()
            .map(|f| m.entries().iter().map(|z| f.encode(z)).collect())
            .collect();
        Ok(Self { n, fields, data })
    }

    /// Permanent of the submatrix with row `skip_row` and column `skip_col`
    /// removed (`None` keeps everything).
    pub(crate) fn permanent(&self, skip: Option<(usize, usize)>) -> GaussianInt {
        let (rows, cols): (Vec<usize>, Vec<usize>) = match skip {
            None => ((0..self.n).collect(), (0..self.n).collect()),
            Some((r, c)) => (
                (0..self.n).filter(|&i| i != r).collect(),
                (0..self.n).filter(|&j| j != c).collect(),
            ),
        };
        let residues: Vec<(u64, u64)> = self
            .fields
            .iter()
            .zip(&self.data)
            .map(|(f, data)| {
                let k = rows.len();
                let mut sub = Vec::with_capacity(k * k);
                for &i in &rows {
                    for &j in &cols {
                        sub.push(data[i * self.n + j]);
                    }
                }
                f.decode(ryser_mod(f, k, &sub))
            })
            .collect();
        GaussianInt::new(
            self.crt(residues.iter().map(|r| r.0)),
            self.crt(residues.iter().map(|r| r.1)),
        )
    }

    /// `per(A(i, col))` for every row `i`, from one Ryser pass over the
    /// columns other than `col`.
    pub(crate) fn column_minor_permanents(&self, col: usize) -> Vec<GaussianInt> {
        let per_field: Vec<Vec<(u64, u64)>> = self
            .fields
            .iter()
            .zip(&self.data)
            .map(|(f, data)| {
                column_minors_mod(f, self.n, data, col)
                    .into_iter()
                    .map(|z| f.decode(z))
                    .collect()
            })
            .collect();
        (0..self.n)
            .map(|i| {
                GaussianInt::new(
                    self.crt(per_field.iter().map(|r| r[i].0)),
                    self.crt(per_field.iter().map(|r| r[i].1)),
                )
            })
            .collect()
    }

    /// Garner reconstruction into the symmetric range `(-M/2, M/2]`.
    fn crt(&self, residues: impl Iterator<Item = u64>) -> BigInt {
        let mut x = BigInt::zero();
        let mut modulus = BigInt::one();
        for (f, r) in self.fields.iter().zip(residues) {
            let p = BigInt::from(f.p);
            let x_mod = x.mod_floor(&p).to_u64().expect("below p");
            let m_mod = modulus.mod_floor(&p).to_u64().expect("below p");
            let diff = if r >= x_mod {
                r - x_mod
            } else {
                r + f.p - x_mod
            };
            let t = (diff as u128 * f.inverse(m_mod) as u128 % f.p as u128) as u64;
            x += &modulus * BigInt::from(t);
            modulus *= p;
        }
        if &x + &x > modulus {
            x -= modulus;
        }
        x
    }
}

/// Ryser's formula with Gray-code column updates over `Z[i]/p`:
/// `per(A) = (-1)^n sum_{S ⊆ cols} (-1)^|S| prod_i sum_{j in S} a_ij`.
fn ryser_mod(f: &Montgomery, n: usize, a: &[Zi]) -> Zi {
    let mut row_sums = alloc::vec![Zi::default(); n];
    let mut total_plus = Zi::default();
    let mut total_minus = Zi::default();
    let one = Zi {
        re: f.mont(1),
        im: 0,
    };
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        gray ^= 1 << j;
        if gray & (1 << j) != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s = f.add_zi(*s, a[i * n + j]);
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s = f.sub_zi(*s, a[i * n + j]);
            }
        }
        let prod = row_sums.iter().fold(one, |acc, &s| f.mul_zi(acc, s));
        if gray.count_ones() % 2 == 0 {
            total_plus = f.add_zi(total_plus, prod);
        } else {
            total_minus = f.add_zi(total_minus, prod);
        }
    }
    if n % 2 == 0 {
        f.sub_zi(total_plus, total_minus)
    } else {
        f.sub_zi(total_minus, total_plus)
    }
}

/// All `per(A(i, col))` at once. For each subset `S` of the remaining
/// columns, `prod_{k != i} r_k(S)` is `prefix[i] · suffix[i + 1]`.
fn column_minors_mod(f: &Montgomery, n: usize, a: &[Zi], col: usize) -> Vec<Zi> {
    let others: Vec<usize> = (0..n).filter(|&j| j != col).collect();
    let m = others.len();
    let one = Zi {
        re: f.mont(1),
        im: 0,
    };
    let mut row_sums = alloc::vec![Zi::default(); n];
    let mut prefix = alloc::vec![one; n + 1];
    let mut suffix = alloc::vec![one; n + 1];
    let mut plus = alloc::vec![Zi::default(); n];
    let mut minus = alloc::vec![Zi::default(); n];
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << m) {
        let bit = k.trailing_zeros() as usize;
        let j = others[bit];
        gray ^= 1 << bit;
        if gray & (1 << bit) != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s = f.add_zi(*s, a[i * n + j]);
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s = f.sub_zi(*s, a[i * n + j]);
            }
        }
        for i in 0..n {
            prefix[i + 1] = f.mul_zi(prefix[i], row_sums[i]);
        }
        for i in (0..n).rev() {
            suffix[i] = f.mul_zi(suffix[i + 1], row_sums[i]);
        }
        let acc = if gray.count_ones() % 2 == 0 {
            &mut plus
        } else {
            &mut minus
        };
        for i in 0..n {
            acc[i] = f.add_zi(acc[i], f.mul_zi(prefix[i], suffix[i + 1]));
        }
    }
    // minors have order m = n - 1
    (0..n)
        .map(|i| {
            if m % 2 == 0 {
                f.sub_zi(plus[i], minus[i])
            } else {
                f.sub_zi(minus[i], plus[i])
            }
        })
        .collect()
}
