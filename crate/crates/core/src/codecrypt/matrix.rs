use std::fmt;

use rand::{Rng, RngCore};

use crate::bits::BitVec;

/// Dense matrix over GF(2); each row is a packed [`BitVec`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    cols: usize,
    rows: Vec<BitVec>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BinaryMatrix {
            cols,
            rows: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    /// Panics if the rows have different lengths.
    pub fn from_rows(rows: Vec<BitVec>) -> Self {
        let cols = rows.first().map_or(0, BitVec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        BinaryMatrix { cols, rows }
    }

    pub fn random<R: RngCore + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols);
        for row in &mut m.rows {
            for c in 0..cols {
                if rng.gen::<bool>() {
                    row.set(c, true);
                }
            }
        }
        m
    }

    /// The matrix with a single 1 per row at `(i, perm[i])`, so `x·P` moves
    /// coordinate `i` of `x` to position `perm[i]`.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut m = Self::zeros(n, n);
        for (i, &p) in perm.iter().enumerate() {
            m.rows[i].set(p, true);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn row_vecs(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.rows())
    }

    /// Row vector times matrix: XOR of the rows selected by `v`.
    pub fn vec_mul(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.rows(), "vector length must equal row count");
        let mut out = BitVec::zeros(self.cols);
        for i in v.iter_ones() {
            out.xor_assign(&self.rows[i]);
        }
        out
    }

    pub fn mul(&self, other: &BinaryMatrix) -> BinaryMatrix {
        assert_eq!(self.cols, other.rows(), "inner dimensions differ");
        BinaryMatrix {
            cols: other.cols,
            rows: self.rows.iter().map(|r| other.vec_mul(r)).collect(),
        }
    }

    pub fn transpose(&self) -> BinaryMatrix {
        let mut t = Self::zeros(self.cols, self.rows());
        for (i, row) in self.rows.iter().enumerate() {
            for j in row.iter_ones() {
                t.rows[j].set(i, true);
            }
        }
        t
    }

    /// Row echelon form in place; returns the rank.
    fn eliminate(rows: &mut [BitVec], cols: usize, mut companion: Option<&mut [BitVec]>) -> usize {
        let mut rank = 0;
        for c in 0..cols {
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r].get(c)) else {
                continue;
            };
            rows.swap(rank, pivot);
            if let Some(comp) = companion.as_deref_mut() {
                comp.swap(rank, pivot);
            }
            for r in 0..rows.len() {
                if r != rank && rows[r].get(c) {
                    let (p, t) = pick(rows, rank, r);
                    t.xor_assign(p);
                    if let Some(comp) = companion.as_deref_mut() {
                        let (p, t) = pick(comp, rank, r);
                        t.xor_assign(p);
                    }
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        Self::eliminate(&mut rows, self.cols, None)
    }

    /// Gauss-Jordan inverse; `None` when singular or not square.
    pub fn inverse(&self) -> Option<BinaryMatrix> {
        if self.rows() != self.cols {
            return None;
        }
        let mut rows = self.rows.clone();
        let mut inv = Self::identity(self.cols);
        let rank = Self::eliminate(&mut rows, self.cols, Some(&mut inv.rows));
        (rank == self.cols).then_some(inv)
    }
}

/// Borrows row `src` immutably and row `dst` mutably.
fn pick(rows: &mut [BitVec], src: usize, dst: usize) -> (&BitVec, &mut BitVec) {
    if src < dst {
        let (a, b) = rows.split_at_mut(dst);
        (&a[src], &mut b[0])
    } else {
        let (a, b) = rows.split_at_mut(src);
        (&b[0], &mut a[dst])
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{} [", self.rows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn naive_mul(a: &BinaryMatrix, b: &BinaryMatrix) -> BinaryMatrix {
        let mut out = BinaryMatrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let bit = (0..a.cols()).fold(false, |acc, k| acc ^ (a.get(i, k) & b.get(k, j)));
                out.set(i, j, bit);
            }
        }
        out
    }

    #[test]
    fn small_inverse_and_rank() {
        let m = BinaryMatrix::from_rows(vec![
            "110".parse().unwrap(),
            "011".parse().unwrap(),
            "001".parse().unwrap(),
        ]);
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).is_identity());
        assert_eq!(m.rank(), 3);
        let singular = BinaryMatrix::from_rows(vec!["11".parse().unwrap(), "11".parse().unwrap()]);
        assert_eq!(singular.rank(), 1);
        assert!(singular.inverse().is_none());
    }

    #[test]
    fn permutation_matrix_is_orthogonal() {
        let perm = [3, 0, 4, 1, 2];
        let p = BinaryMatrix::permutation(&perm);
        assert!(p.mul(&p.transpose()).is_identity());
        let x: BitVec = "10100".parse().unwrap();
        let y = p.vec_mul(&x);
        for i in 0..5 {
            assert_eq!(y.get(perm[i]), x.get(i));
        }
    }

    proptest! {
        #[test]
        fn packed_mul_matches_naive(seed in any::<u64>(), r in 1usize..20, k in 1usize..80, c in 1usize..80) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let a = BinaryMatrix::random(r, k, &mut rng);
            let b = BinaryMatrix::random(k, c, &mut rng);
            prop_assert_eq!(a.mul(&b), naive_mul(&a, &b));
        }

        #[test]
        fn transpose_involution(seed in any::<u64>(), r in 1usize..70, c in 1usize..70) {
            let a = BinaryMatrix::random(r, c, &mut ChaCha20Rng::seed_from_u64(seed));
            prop_assert_eq!(a.transpose().transpose(), a);
        }

        #[test]
        fn inverse_when_full_rank(seed in any::<u64>(), n in 1usize..40) {
            let a = BinaryMatrix::random(n, n, &mut ChaCha20Rng::seed_from_u64(seed));
            match a.inverse() {
                Some(inv) => {
                    prop_assert_eq!(a.rank(), n);
                    prop_assert!(a.mul(&inv).is_identity());
                    prop_assert!(inv.mul(&a).is_identity());
                }
                None => prop_assert!(a.rank() < n),
            }
        }
    }
}
