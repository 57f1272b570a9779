//! Dense exact matrices over ℚ(i) and ℚ(i)[a].

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{GaussRat, Scalar};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<GaussRat>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![GaussRat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, GaussRat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<GaussRat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> &GaussRat {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: GaussRat) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[GaussRat] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<GaussRat> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Self {
        let mut m = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(c, r, self.get(r, c).clone());
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.conj()).collect() }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        self.transpose().conj()
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "shape mismatch in product");
        let mut m = Matrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let x = self.get(i, k);
                if x.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let y = o.get(k, j);
                    if y.is_zero() {
                        continue;
                    }
                    let v = m.get(i, j) + &(x * y);
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    pub fn apply(&self, v: &[GaussRat]) -> Vec<GaussRat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = GaussRat::zero();
                for (j, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        acc += &(self.get(i, j) * x);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &GaussRat) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn vstack(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.cols);
        let mut data = self.data.clone();
        data.extend(o.data.iter().cloned());
        Matrix { rows: self.rows + o.rows, cols: self.cols, data }
    }

    pub fn hstack(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.rows, o.rows);
        let mut m = Matrix::zeros(self.rows, self.cols + o.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(r, c, self.get(r, c).clone());
            }
            for c in 0..o.cols {
                m.set(r, self.cols + c, o.get(r, c).clone());
            }
        }
        m
    }

    /// Block-diagonal sum.
    pub fn block_diag(blocks: &[Matrix]) -> Matrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Matrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for r in 0..b.rows {
                for c in 0..b.cols {
                    m.set(r0 + r, c0 + c, b.get(r, c).clone());
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    pub fn kron(&self, o: &Matrix) -> Matrix {
        let mut m = Matrix::zeros(self.rows * o.rows, self.cols * o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let x = self.get(i, j);
                if x.is_zero() {
                    continue;
                }
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        m.set(i * o.rows + k, j * o.cols + l, x * o.get(k, l));
                    }
                }
            }
        }
        m
    }

    pub fn is_hermitian(&self) -> bool {
        self.rows == self.cols && *self == self.dagger()
    }

    /// Rank by fraction-free elimination over ℤ[i].
    pub fn rank(&self) -> usize {
        bareiss_rank(self)
    }

    /// Reduced row echelon form over ℚ(i); returns the pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else { continue };
            m.swap_rows(r, p);
            let inv = m.get(r, c).inv().expect("nonzero pivot");
            for j in c..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = m.get(i, j) - &(&f * m.get(r, j));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    /// Basis of the right null space, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<GaussRat>> {
        let (m, pivots) = self.rref();
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![GaussRat::zero(); self.cols];
            v[free] = GaussRat::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m.get(r, free);
            }
            out.push(v);
        }
        out
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::Degree("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let (m, pivots) = self.hstack(&Matrix::identity(n)).rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::DivisionByZero);
        }
        let mut inv = Matrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                inv.set(r, c, m.get(r, n + c).clone());
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Leading principal minors (for positive-definiteness of Hermitian matrices).
    pub fn leading_minors(&self) -> Vec<GaussRat> {
        (1..=self.rows)
            .map(|k| {
                let mut sub = Matrix::zeros(k, k);
                for r in 0..k {
                    for c in 0..k {
                        sub.set(r, c, self.get(r, c).clone());
                    }
                }
                sub.det()
            })
            .collect()
    }

    pub fn det(&self) -> GaussRat {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let mut det = GaussRat::one();
        for c in 0..m.cols {
            let Some(p) = (c..m.rows).find(|&i| !m.get(i, c).is_zero()) else { return GaussRat::zero() };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det = &det * &piv;
            let inv = piv.inv().expect("nonzero pivot");
            for i in c + 1..m.rows {
                let f = m.get(i, c) * &inv;
                if f.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = m.get(i, j) - &(&f * m.get(c, j));
                    m.set(i, j, v);
                }
            }
        }
        det
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct GaussInt {
    re: BigInt,
    im: BigInt,
}

impl GaussInt {
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn mul(&self, o: &GaussInt) -> GaussInt {
        GaussInt { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
    fn sub(&self, o: &GaussInt) -> GaussInt {
        GaussInt { re: &self.re - &o.re, im: &self.im - &o.im }
    }
    fn exact_div(&self, o: &GaussInt) -> GaussInt {
        let n = &o.re * &o.re + &o.im * &o.im;
        let re = &self.re * &o.re + &self.im * &o.im;
        let im = &self.im * &o.re - &self.re * &o.im;
        let (qr, rr) = re.div_rem(&n);
        let (qi, ri) = im.div_rem(&n);
        debug_assert!(rr.is_zero() && ri.is_zero(), "Bareiss division not exact");
        GaussInt { re: qr, im: qi }
    }
}

fn integer_rows(m: &Matrix) -> Vec<Vec<GaussInt>> {
    (0..m.rows)
        .map(|r| {
            let row = m.row(r);
            let mut l = BigInt::one();
            for x in row {
                l = l.lcm(x.re.denom()).lcm(x.im.denom());
            }
            row.iter()
                .map(|x| GaussInt {
                    re: (x.re.numer() * &l) / x.re.denom(),
                    im: (x.im.numer() * &l) / x.im.denom(),
                })
                .collect()
        })
        .collect()
}

fn bareiss_rank(m: &Matrix) -> usize {
    let mut a = integer_rows(m);
    let rows = m.rows;
    let cols = m.cols;
    let mut prev = GaussInt { re: BigInt::one(), im: BigInt::zero() };
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let piv = a[r][c].clone();
        for i in r + 1..rows {
            let f = a[i][c].clone();
            for j in c + 1..cols {
                let v = piv.mul(&a[i][j]).sub(&f.mul(&a[r][j]));
                a[i][j] = v.exact_div(&prev);
            }
            a[i][c] = GaussInt { re: BigInt::zero(), im: BigInt::zero() };
        }
        prev = piv;
        r += 1;
    }
    r
}

/// Matrix with entries in ℚ(i)[a].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Scalar>,
}

impl SMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SMatrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn specialize(&self, alpha: &GaussRat) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(r, c, self.get(r, c).evaluate_alpha(alpha));
            }
        }
        m
    }

    /// Highest power of `a` present.
    pub fn a_degree(&self) -> usize {
        self.data.iter().filter_map(|x| x.degree()).max().unwrap_or(0)
    }

    pub fn mul(&self, o: &SMatrix) -> SMatrix {
        assert_eq!(self.cols, o.rows);
        let mut m = SMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let x = self.get(i, k);
                if x.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let y = o.get(k, j);
                    if y.is_zero() {
                        continue;
                    }
                    let v = m.get(i, j) + &(x * y);
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    pub fn sub(&self, o: &SMatrix) -> SMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        SMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }

    /// Conjugate transpose, treating `a` as real.
    pub fn dagger(&self) -> SMatrix {
        let mut m = SMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(c, r, self.get(r, c).conj());
            }
        }
        m
    }

    pub fn from_matrix(m: &Matrix) -> SMatrix {
        let mut s = SMatrix::zeros(m.rows, m.cols);
        for r in 0..m.rows {
            for c in 0..m.cols {
                s.set(r, c, Scalar::constant(m.get(r, c).clone()));
            }
        }
        s
    }

    /// Nonzero entries as (row, col, value).
    pub fn nonzero_entries(&self) -> Vec<(usize, usize, &Scalar)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.get(r, c);
                if !v.is_zero() {
                    out.push((r, c, v));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g(re: i64, im: i64) -> GaussRat {
        GaussRat::from_ints(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize, rank: usize) -> Matrix {
        let mut gen = |r, c| {
            let mut m = Matrix::zeros(r, c);
            for i in 0..r {
                for j in 0..c {
                    let v = GaussRat::new(
                        crate::scalar::rat(rng.gen_range(-3..4), rng.gen_range(1..4)),
                        crate::scalar::rat(rng.gen_range(-3..4), rng.gen_range(1..4)),
                    );
                    m.set(i, j, v);
                }
            }
            m
        };
        let a = gen(r, rank);
        let b = gen(rank, c);
        a.mul(&b)
    }

    #[test]
    fn bareiss_matches_rref() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let r = rng.gen_range(1..7);
            let c = rng.gen_range(1..7);
            let k = rng.gen_range(0..=r.min(c));
            let m = random_matrix(&mut rng, r, c, k);
            let (_, piv) = m.rref();
            assert_eq!(m.rank(), piv.len());
            assert!(m.rank() <= k);
            for v in m.nullspace() {
                assert!(m.apply(&v).iter().all(|x| x.is_zero()));
            }
            assert_eq!(m.nullspace().len() + m.rank(), c);
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let m = Matrix::from_rows(vec![vec![g(1, 1), g(2, 0)], vec![g(0, 1), g(3, -1)]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(2));
        assert_eq!(m.det(), &(&g(1, 1) * &g(3, -1)) - &(&g(2, 0) * &g(0, 1)));
    }

    #[test]
    fn singular_inverse_fails() {
        let m = Matrix::from_rows(vec![vec![g(1, 1), g(2, 2)], vec![g(1, 0), g(2, 0)]]);
        assert!(m.inverse().is_err());
        assert_eq!(m.rank(), 2 - 1 + (m.det() != GaussRat::zero()) as usize);
    }
}

/// Prime with p ≡ 1 mod 4, so −1 has a square root in F_p.
pub const MOD_P: u64 = 1_000_000_009;

fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1u64;
    b %= MOD_P;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % MOD_P;
        }
        b = b * b % MOD_P;
        e >>= 1;
    }
    r
}

/// The image of i in F_p.
pub fn sqrt_minus_one() -> u64 {
    (2..)
        .map(|g| pow_mod(g, (MOD_P - 1) / 4))
        .find(|&x| x * x % MOD_P == MOD_P - 1)
        .expect("p ≡ 1 mod 4")
}

fn bigint_mod(x: &BigInt) -> u64 {
    let m = BigInt::from(MOD_P);
    let r = x.mod_floor(&m);
    r.try_into().expect("reduced residue")
}

/// Reduction of a Gaussian rational under ℤ[i] → F_p, i ↦ `iota`.
/// `None` if a denominator vanishes mod p.
pub fn gauss_mod_p(g: &GaussRat, iota: u64) -> Option<u64> {
    let part = |r: &crate::scalar::Rat| -> Option<u64> {
        let d = bigint_mod(r.denom());
        if d == 0 {
            return None;
        }
        Some(bigint_mod(r.numer()) * pow_mod(d, MOD_P - 2) % MOD_P)
    };
    Some((part(&g.re)? + part(&g.im)? * iota) % MOD_P)
}

/// Rank over F_p of a row-major matrix with entries already reduced.
pub fn rank_mod_p(rows: usize, cols: usize, mut a: Vec<u64>) -> usize {
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| a[i * cols + c] != 0) else { continue };
        if piv != r {
            for j in 0..cols {
                a.swap(piv * cols + j, r * cols + j);
            }
        }
        let inv = pow_mod(a[r * cols + c], MOD_P - 2);
        for i in r + 1..rows {
            let f = a[i * cols + c] * inv % MOD_P;
            if f == 0 {
                continue;
            }
            for j in c..cols {
                a[i * cols + j] = (a[i * cols + j] + MOD_P - f * a[r * cols + j] % MOD_P) % MOD_P;
            }
        }
        r += 1;
    }
    r
}

impl Matrix {
    /// Entries reduced mod p, row-major; `None` if some denominator vanishes.
    pub fn to_mod_p(&self, iota: u64) -> Option<Vec<u64>> {
        self.data.iter().map(|g| gauss_mod_p(g, iota)).collect()
    }

    /// A lower bound for the rank over ℚ(i), from the rank mod p.
    pub fn rank_lower_bound(&self) -> usize {
        let iota = sqrt_minus_one();
        match self.to_mod_p(iota) {
            Some(v) => rank_mod_p(self.rows, self.cols, v),
            None => 0,
        }
    }
}
