//! Kernels, ranks, cohomology and harmonic dimensions of the invariant
//! D̄-complex, Serre/Euler summaries and the principal-symbol scan.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{gauss_mod_p, rank_mod_p, sqrt_minus_one, Matrix, MOD_P};
use crate::qcomplex::{symbol_dbar, QComplex, QSection};
use crate::scalar::Scalar;
use crate::scalar::GaussRat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeDims {
    pub p: usize,
    pub dim: usize,
    pub ker: usize,
    pub rank: usize,
    pub h: usize,
    pub harmonic: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyReport {
    pub model: String,
    pub alpha_prime: GaussRat,
    pub diagonal: bool,
    pub degrees: Vec<DegreeDims>,
    pub serre_pairs: Vec<(usize, usize, bool)>,
    pub euler: i64,
}

impl CohomologyReport {
    pub fn h(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.h).collect()
    }
    pub fn harmonic(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.harmonic).collect()
    }
    pub fn serre(&self) -> bool {
        self.serre_pairs.iter().all(|x| x.2)
    }
    pub fn hodge_identity(&self) -> bool {
        self.degrees.iter().all(|d| d.h == d.harmonic)
    }
}

/// D̄ and D̄* of one model specialized at a fixed α′.
pub struct Specialized<'a> {
    pub q: &'a QComplex,
    pub alpha: GaussRat,
    /// `d[p]`: Q^{0,p} → Q^{0,p+1}, p = 0..=n.
    pub d: Vec<Matrix>,
}

impl<'a> Specialized<'a> {
    /// Fails with the anomaly residual if D̄² ≠ 0 at this α′.
    pub fn new(q: &'a QComplex, alpha: &GaussRat) -> Result<Self> {
        let n = q.n;
        let sym: Vec<_> = (0..=n).into_par_iter().map(|p| q.dbar_matrix(p)).collect();
        for p in 0..n {
            let sq = sym[p + 1].mul(&sym[p]).specialize(alpha);
            if !sq.is_zero() {
                let m = q.model.with_alpha_prime(alpha.clone());
                let f2 = m.check_heterotic_system()?.f2;
                return Err(Error::NotNilpotent(format!(
                    "D̄² ≠ 0 on {} at α′ = {} (degree {}); anomaly residual 2i∂∂̄ω − α′(trF∧F − trR∧R) = {}",
                    q.model.name, alpha, p, f2
                )));
            }
        }
        Ok(Specialized { q, alpha: alpha.clone(), d: sym.iter().map(|m| m.specialize(alpha)).collect() })
    }

    pub fn dstar(&self, p: usize) -> Result<Matrix> {
        let g_prev = self.q.gram(p - 1).inverse()?;
        Ok(g_prev.mul(&self.d[p - 1].dagger()).mul(&self.q.gram(p)))
    }

    pub fn dim(&self, p: usize) -> usize {
        self.d[p].cols
    }

    pub fn rank(&self, p: usize) -> usize {
        if self.d[p].rows == 0 { 0 } else { self.d[p].rank() }
    }

    pub fn harmonic(&self, p: usize) -> Result<usize> {
        let mut st = self.d[p].clone();
        if p > 0 {
            st = st.vstack(&self.dstar(p)?);
        }
        Ok(self.dim(p) - if st.rows == 0 { 0 } else { st.rank() })
    }
}

/// `(ker, rank, h)` at degree p.
pub fn betti(q: &QComplex, p: usize, alpha: &GaussRat) -> Result<(usize, usize, usize)> {
    let s = Specialized::new(q, alpha)?;
    let rank = s.rank(p);
    let ker = s.dim(p) - rank;
    let prev = if p == 0 { 0 } else { s.rank(p - 1) };
    Ok((ker, rank, ker - prev))
}

pub fn harmonic(q: &QComplex, p: usize, alpha: &GaussRat) -> Result<usize> {
    Specialized::new(q, alpha)?.harmonic(p)
}

pub fn cohomology(q: &QComplex, alpha: &GaussRat) -> Result<CohomologyReport> {
    let n = q.n;
    let s = Specialized::new(q, alpha)?;
    let per: Vec<(usize, usize)> = (0..=n)
        .into_par_iter()
        .map(|p| Ok((s.rank(p), s.harmonic(p)?)))
        .collect::<Result<_>>()?;
    let mut degrees = Vec::new();
    for p in 0..=n {
        let dim = s.dim(p);
        let (rank, harmonic) = per[p];
        let ker = dim - rank;
        let h = ker - if p == 0 { 0 } else { per[p - 1].0 };
        degrees.push(DegreeDims { p, dim, ker, rank, h, harmonic });
    }
    let serre_pairs = (0..=n).map(|p| (p, n - p, degrees[p].h == degrees[n - p].h)).collect();
    let euler = degrees.iter().map(|d| if d.p % 2 == 0 { d.h as i64 } else { -(d.h as i64) }).sum();
    Ok(CohomologyReport {
        model: q.model.name.clone(),
        alpha_prime: alpha.clone(),
        diagonal: q.opts.diagonal,
        degrees,
        serre_pairs,
        euler,
    })
}

/// All ξ with components in {0, ±1, ±i, 1±i}, excluding ξ = 0.
pub fn symbol_samples(n: usize) -> Vec<Vec<GaussRat>> {
    let vals = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1)];
    let mut out = Vec::new();
    let total = vals.len().pow(n as u32);
    for mut idx in 0..total {
        let mut xi = Vec::with_capacity(n);
        for _ in 0..n {
            let (re, im) = vals[idx % vals.len()];
            xi.push(GaussRat::from_ints(re, im));
            idx /= vals.len();
        }
        if xi.iter().any(|x| !x.is_zero()) {
            out.push(xi);
        }
    }
    out
}

/// σ(ξ) is real-linear in ξ: `σ(ξ) = Σ_k ξ̄_k A_k + Σ_k ξ_k B_k`, and its
/// Gram adjoint is `Σ_k ξ_k A_k* + Σ_k ξ̄_k B_k*`. The pieces are extracted
/// once per degree.
struct SymbolPieces {
    a: Vec<Matrix>,
    b: Vec<Matrix>,
}

impl SymbolPieces {
    fn new(q: &QComplex, p: usize, alpha: &GaussRat) -> Result<Self> {
        let n = q.n;
        let unit = |k: usize, v: GaussRat| {
            let mut xi = vec![GaussRat::zero(); n];
            xi[k] = v;
            xi
        };
        let mut a = Vec::new();
        let mut b = Vec::new();
        for k in 0..n {
            // ξ_k = 1 gives A_k + B_k; ξ_k = i gives −iA_k + iB_k.
            let s1 = symbol_dbar(q, p, &unit(k, GaussRat::from(1)), alpha)?;
            let si = symbol_dbar(q, p, &unit(k, GaussRat::i()), alpha)?.scale(&-GaussRat::i());
            let half = GaussRat::frac(1, 2);
            a.push(s1.sub(&si).scale(&half));
            b.push(s1.add(&si).scale(&half));
        }
        Ok(SymbolPieces { a, b })
    }

    fn adjoint(&self, g_src_inv: &Matrix, g_dst: &Matrix) -> SymbolPieces {
        let adj = |m: &Matrix| g_src_inv.mul(&m.dagger()).mul(g_dst);
        SymbolPieces { a: self.a.iter().map(adj).collect(), b: self.b.iter().map(adj).collect() }
    }

    #[cfg(test)]
    fn at(&self, xi: &[GaussRat]) -> Matrix {
        let mut m = self.a[0].scale(&GaussRat::zero());
        for (k, x) in xi.iter().enumerate() {
            m = m.add(&self.a[k].scale(&x.conj())).add(&self.b[k].scale(x));
        }
        m
    }
}

/// Symbol pieces reduced mod p.
struct ModPieces {
    rows: usize,
    cols: usize,
    a: Vec<Vec<u64>>,
    b: Vec<Vec<u64>>,
}

impl ModPieces {
    fn new(s: &SymbolPieces, iota: u64) -> Option<Self> {
        let red = |v: &Vec<Matrix>| v.iter().map(|m| m.to_mod_p(iota)).collect::<Option<Vec<_>>>();
        Some(ModPieces { rows: s.a[0].rows, cols: s.a[0].cols, a: red(&s.a)?, b: red(&s.b)? })
    }

    /// `Σ ca[k] A_k + cb[k] B_k`, appended to `out`.
    fn combine(&self, ca: &[u64], cb: &[u64], out: &mut Vec<u64>) {
        let len = self.rows * self.cols;
        let start = out.len();
        out.resize(start + len, 0);
        for k in 0..ca.len() {
            for (x, c) in [(&self.a[k], ca[k]), (&self.b[k], cb[k])] {
                if c == 0 {
                    continue;
                }
                for (o, v) in out[start..].iter_mut().zip(x) {
                    *o = (*o + c * v) % MOD_P;
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolFailure {
    pub xi: Vec<GaussRat>,
    pub degree: usize,
    pub rank: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolReport {
    pub model: String,
    pub alpha_prime: GaussRat,
    pub samples: usize,
    pub injective: bool,
    pub first_failure: Option<SymbolFailure>,
}

/// Full stacked symbol `[σ_D̄(ξ); σ_D̄*(ξ)]` on Q^{0,p}.
pub fn symbol_matrix(q: &QComplex, p: usize, xi: &[GaussRat], alpha: &GaussRat) -> Result<Matrix> {
    crate::qcomplex::symbol_stack(q, p, xi, alpha)
}

/// Injectivity of the stacked symbol at every degree for the first
/// `samples` points of the sample set plus `extra`. Full column rank is
/// certified mod p (a lower bound for the rank over ℚ(i)); a deficient
/// reduction is rechecked exactly.
pub fn injectivity_scan(
    q: &QComplex,
    alpha: &GaussRat,
    samples: usize,
    extra: &[Vec<GaussRat>],
) -> Result<SymbolReport> {
    let n = q.n;
    let mut xs: Vec<Vec<GaussRat>> = symbol_samples(n).into_iter().take(samples).collect();
    for x in extra {
        if x.len() != n || x.iter().all(|c| c.is_zero()) {
            return Err(Error::Degree("ξ must be a nonzero covector with n components".into()));
        }
        xs.push(x.clone());
    }
    let iota = sqrt_minus_one();
    let pieces: Vec<SymbolPieces> = (0..=n).map(|p| SymbolPieces::new(q, p, alpha)).collect::<Result<_>>()?;
    let mut adjoints = vec![None];
    for p in 1..=n {
        let ginv = q.gram(p - 1).inverse()?;
        adjoints.push(Some(pieces[p - 1].adjoint(&ginv, &q.gram(p))));
    }
    let modp: Vec<Option<(ModPieces, Option<ModPieces>)>> = (0..=n)
        .map(|p| {
            let top = ModPieces::new(&pieces[p], iota)?;
            let bottom = match &adjoints[p] {
                Some(a) => Some(ModPieces::new(a, iota)?),
                None => None,
            };
            Some((top, bottom))
        })
        .collect();
    let check = |xi: &Vec<GaussRat>| -> Result<Option<SymbolFailure>> {
        let x: Option<Vec<u64>> = xi.iter().map(|c| gauss_mod_p(c, iota)).collect();
        let xc: Option<Vec<u64>> = xi.iter().map(|c| gauss_mod_p(&c.conj(), iota)).collect();
        for p in 0..=n {
            if let (Some(x), Some(xc), Some((top, bottom))) = (&x, &xc, &modp[p]) {
                let mut buf = Vec::new();
                top.combine(xc, x, &mut buf);
                let mut rows = top.rows;
                if let Some(b) = bottom {
                    b.combine(x, xc, &mut buf);
                    rows += b.rows;
                }
                if rank_mod_p(rows, top.cols, buf) == top.cols {
                    continue;
                }
            }
            let st = symbol_matrix(q, p, xi, alpha)?;
            let rank = st.rank();
            if rank < st.cols {
                return Ok(Some(SymbolFailure { xi: xi.clone(), degree: p, rank, dim: st.cols }));
            }
        }
        Ok(None)
    };
    let failures: Vec<Option<SymbolFailure>> = xs.par_iter().map(check).collect::<Result<_>>()?;
    let first_failure = failures.into_iter().flatten().next();
    Ok(SymbolReport {
        model: q.model.name.clone(),
        alpha_prime: alpha.clone(),
        samples: xs.len(),
        injective: first_failure.is_none(),
        first_failure,
    })
}

/// Nonzero entries of D̄_{p+1}D̄_p at α′, labelled `row <- column`.
pub fn dbar_squared_entries(q: &QComplex, p: usize, alpha: &GaussRat) -> Vec<(String, String, GaussRat)> {
    let sq = q.dbar_matrix(p + 1).mul(&q.dbar_matrix(p)).specialize(alpha);
    let rows = q.basis(p + 2).labels();
    let cols = q.basis(p).labels();
    let mut out = Vec::new();
    for i in 0..sq.rows {
        for j in 0..sq.cols {
            if !sq.get(i, j).is_zero() {
                out.push((rows[i].clone(), cols[j].clone(), sq.get(i, j).clone()));
            }
        }
    }
    out
}

fn columns(m: &Matrix, from: usize) -> Matrix {
    let mut sub = Matrix::zeros(m.rows, m.cols - from);
    for i in 0..m.rows {
        for j in from..m.cols {
            sub.set(i, j - from, m.get(i, j).clone());
        }
    }
    sub
}

fn random_combination(rng: &mut ChaCha8Rng, dim: usize, offset: usize, basis: &[Vec<GaussRat>]) -> Vec<Scalar> {
    let mut c = vec![GaussRat::zero(); dim];
    for v in basis {
        let k = GaussRat::from(rng.gen_range(-3i64..=3));
        for (j, x) in v.iter().enumerate() {
            c[offset + j] += &(x * &k);
        }
    }
    c.into_iter().map(Scalar::constant).collect()
}

/// Both sides of the duality identity `(u, ℋ*w) = (−1)^{n−p}(ℋu, w)` for
/// `pairs` random pairs: u ∈ Q₁ of degree n−p−1 with D̄₁u = 0, w ∈ T of
/// degree p with ∂̄w = 0. Degrees are visited round-robin.
pub fn duality_samples(q: &QComplex, alpha: &GaussRat, pairs: usize, seed: u64) -> Result<Vec<(GaussRat, GaussRat)>> {
    let n = q.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spaces = Vec::new();
    for p in 0..n {
        let up = n - p - 1;
        let bu = q.basis(up);
        let (k1, _, _) = bu.block_sizes();
        let nu = columns(&q.operator_matrix(up, |s| q.d1(s)).specialize(alpha), k1).nullspace();
        let bw = q.basis(p);
        let (a1, a2, _) = bw.block_sizes();
        let dw = q.operator_matrix(p, |s| {
            let mut o = QSection::zero(n, q.r, s.p + 1);
            o.w = q.dbar_t(&s.w);
            o
        });
        let nw = columns(&dw.specialize(alpha), a1 + a2).nullspace();
        if !nu.is_empty() && !nw.is_empty() {
            spaces.push((bu, k1, nu, bw, a1 + a2, nw));
        }
    }
    if spaces.is_empty() {
        return Err(Error::Degree("no closed pairs in any degree".into()));
    }
    let mut out = Vec::with_capacity(pairs);
    for i in 0..pairs {
        let (bu, k1, nu, bw, off, nw) = &spaces[i % spaces.len()];
        let u = bu.section(&random_combination(&mut rng, bu.dim(), *k1, nu));
        let w = bw.section(&random_combination(&mut rng, bw.dim(), *off, nw));
        let (l, r) = q.duality_sides(&u, &w);
        out.push((l.evaluate_alpha(alpha), r.evaluate_alpha(alpha)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::*;
    use crate::qcomplex::QOptions;

    #[test]
    fn sample_count() {
        assert_eq!(symbol_samples(3).len(), 342);
        assert_eq!(symbol_samples(1).len(), 6);
    }

    #[test]
    fn torus_dims_are_binomial() {
        let q = QComplex::new(&build_torus(), QOptions::default()).unwrap();
        let r = cohomology(&q, &GaussRat::from(1)).unwrap();
        assert_eq!(r.h(), vec![9, 27, 27, 9]);
        assert_eq!(r.harmonic(), r.h());
        assert_eq!(r.euler, 0);
    }

    #[test]
    fn iwasawa_refuses_off_anomaly() {
        let q = QComplex::new(&build_iwasawa(), QOptions::default()).unwrap();
        match betti(&q, 1, &GaussRat::from(1)) {
            Err(Error::NotNilpotent(msg)) => assert!(msg.contains("anomaly residual")),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn symbol_pieces_reconstruct() {
        let q = QComplex::new(&build_calabi_eckmann(), QOptions::default()).unwrap();
        let a = GaussRat::from(2);
        let pieces = SymbolPieces::new(&q, 1, &a).unwrap();
        let xi = vec![GaussRat::from_ints(1, -1), GaussRat::from(0), GaussRat::from_ints(0, 1)];
        assert_eq!(pieces.at(&xi), symbol_dbar(&q, 1, &xi, &a).unwrap());
    }

    #[test]
    fn modular_scan_agrees_with_exact_ranks() {
        let q = QComplex::new(&build_calabi_eckmann(), QOptions::default()).unwrap();
        let a = GaussRat::from(3);
        let xi = vec![GaussRat::from_ints(1, 1), GaussRat::from(-1), GaussRat::from(0)];
        for p in 0..=3 {
            let st = symbol_matrix(&q, p, &xi, &a).unwrap();
            assert_eq!(st.rank(), st.cols);
            assert_eq!(st.rank_lower_bound(), st.cols);
        }
        assert!(injectivity_scan(&q, &a, 5, &[xi]).unwrap().injective);
    }

    #[test]
    fn zero_covector_rejected() {
        let q = QComplex::new(&build_torus(), QOptions::default()).unwrap();
        assert!(symbol_matrix(&q, 1, &[GaussRat::zero(), GaussRat::zero(), GaussRat::zero()], &GaussRat::zero()).is_err());
    }
}
