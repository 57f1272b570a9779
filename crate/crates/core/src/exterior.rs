//! Invariant differential forms over a complex coframe α¹…αⁿ, ᾱ¹…ᾱⁿ.
//!
//! A basis monomial is a bitmask over the 2n generators: bit `x < n` is
//! α^{x+1}, bit `n + k` is ᾱ^{k+1}. Coefficients are stored against the
//! increasing ordering of set bits, so holomorphic legs always sit to the
//! left of antiholomorphic ones.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{GaussRat, Scalar};

pub type Mask = u32;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    /// 1-based, strictly increasing.
    pub holo: Vec<usize>,
    pub anti: Vec<usize>,
}

impl MultiIndex {
    pub fn new(holo: Vec<usize>, anti: Vec<usize>) -> Self {
        debug_assert!(holo.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(anti.windows(2).all(|w| w[0] < w[1]));
        MultiIndex { holo, anti }
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.holo.len(), self.anti.len())
    }

    pub fn mask(&self, n: usize) -> Mask {
        let mut m = 0;
        for &h in &self.holo {
            m |= 1 << (h - 1);
        }
        for &a in &self.anti {
            m |= 1 << (n + a - 1);
        }
        m
    }

    pub fn from_mask(mask: Mask, n: usize) -> Self {
        let holo = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect();
        let anti = (0..n).filter(|i| mask & (1 << (n + i)) != 0).map(|i| i + 1).collect();
        MultiIndex { holo, anti }
    }
}

/// Sign of the shuffle that sorts the concatenation of two disjoint masks.
pub fn shuffle_sign(a: Mask, b: Mask) -> i32 {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let bit = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += (a >> (bit + 1)).count_ones();
    }
    if inversions % 2 == 0 { 1 } else { -1 }
}

/// Sign of the permutation sorting a list of distinct generator indices.
pub fn perm_sign(xs: &[usize]) -> i32 {
    let mut s = 1;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if xs[i] > xs[j] {
                s = -s;
            }
        }
    }
    s
}

pub fn bits(mask: Mask) -> impl Iterator<Item = usize> {
    let mut rest = mask;
    std::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(b)
        }
    })
}

pub fn mask_bidegree(mask: Mask, n: usize) -> (usize, usize) {
    let low = (1u32 << n) - 1;
    ((mask & low).count_ones() as usize, (mask >> n).count_ones() as usize)
}

/// Scalar-valued invariant form, possibly of mixed degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Form {
    pub n: usize,
    terms: BTreeMap<Mask, Scalar>,
}

impl Form {
    pub fn zero(n: usize) -> Self {
        Form { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        Form::monomial(n, 0, Scalar::from(1))
    }

    pub fn constant(n: usize, c: Scalar) -> Self {
        Form::monomial(n, 0, c)
    }

    pub fn monomial(n: usize, mask: Mask, c: Scalar) -> Self {
        let mut f = Form::zero(n);
        f.add_term(mask, c);
        f
    }

    /// α^{a} (1-based).
    pub fn alpha(n: usize, a: usize) -> Self {
        Form::monomial(n, 1 << (a - 1), Scalar::from(1))
    }

    /// ᾱ^{a} (1-based).
    pub fn alpha_bar(n: usize, a: usize) -> Self {
        Form::monomial(n, 1 << (n + a - 1), Scalar::from(1))
    }

    /// Generator by 0-based index in the 2n-frame.
    pub fn generator(n: usize, x: usize) -> Self {
        Form::monomial(n, 1 << x, Scalar::from(1))
    }

    pub fn from_index(n: usize, idx: &MultiIndex, c: Scalar) -> Self {
        Form::monomial(n, idx.mask(n), c)
    }

    pub fn add_term(&mut self, mask: Mask, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(mask).or_insert_with(Scalar::zero);
        *e += &c;
        if e.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mask, &Scalar)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn coeff(&self, mask: Mask) -> Scalar {
        self.terms.get(&mask).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Form) -> Form {
        assert_eq!(self.n, o.n);
        let mut f = self.clone();
        for (m, c) in o.terms() {
            f.add_term(m, c.clone());
        }
        f
    }

    pub fn sub(&self, o: &Form) -> Form {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Form {
        self.scale(&Scalar::from(-1))
    }

    pub fn scale(&self, s: &Scalar) -> Form {
        let mut f = Form::zero(self.n);
        if s.is_zero() {
            return f;
        }
        for (m, c) in self.terms() {
            f.add_term(m, c * s);
        }
        f
    }

    pub fn scale_g(&self, s: &GaussRat) -> Form {
        self.scale(&Scalar::constant(s.clone()))
    }

    pub fn wedge(&self, o: &Form) -> Form {
        assert_eq!(self.n, o.n, "wedge of forms over different coframes");
        let mut f = Form::zero(self.n);
        for (a, x) in self.terms() {
            for (b, y) in o.terms() {
                if a & b != 0 {
                    continue;
                }
                let s = shuffle_sign(a, b);
                let c = x * y;
                f.add_term(a | b, if s < 0 { -c } else { c });
            }
        }
        f
    }

    /// Complex conjugate, treating `a` as real.
    pub fn conjugate(&self) -> Form {
        let n = self.n;
        let low = (1u32 << n) - 1;
        let mut f = Form::zero(n);
        for (m, c) in self.terms() {
            let h = m & low;
            let a = m >> n;
            // ᾱ^I ∧ α^J reordered to α^J ∧ ᾱ^I
            let s = shuffle_sign(h << n, a);
            let c = c.conj();
            f.add_term(a | (h << n), if s < 0 { -c } else { c });
        }
        f
    }

    /// Component of pure bidegree (p, q).
    pub fn part(&self, p: usize, q: usize) -> Form {
        let mut f = Form::zero(self.n);
        for (m, c) in self.terms() {
            if mask_bidegree(m, self.n) == (p, q) {
                f.add_term(m, c.clone());
            }
        }
        f
    }

    /// All bidegrees present.
    pub fn bidegrees(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = self.terms.keys().map(|&m| mask_bidegree(m, self.n)).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn bidegree(&self) -> Option<(usize, usize)> {
        let b = self.bidegrees();
        if b.len() == 1 { Some(b[0]) } else { None }
    }

    /// Interior product with the dual frame vector E_x (removes θ^x from the left).
    pub fn interior(&self, x: usize) -> Form {
        let mut f = Form::zero(self.n);
        for (m, c) in self.terms() {
            if m & (1 << x) == 0 {
                continue;
            }
            let below = (m & ((1u32 << x) - 1)).count_ones();
            f.add_term(m & !(1 << x), if below % 2 == 0 { c.clone() } else { -c });
        }
        f
    }

    /// Evaluation on frame vectors E_{x_1}, …, E_{x_k}.
    pub fn eval(&self, xs: &[usize]) -> Scalar {
        let mut mask = 0;
        for &x in xs {
            if mask & (1 << x) != 0 {
                return Scalar::zero();
            }
            mask |= 1 << x;
        }
        let c = self.coeff(mask);
        if perm_sign(xs) < 0 { -c } else { c }
    }

    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar) -> Form {
        let mut out = Form::zero(self.n);
        for (m, c) in self.terms() {
            out.add_term(m, f(c));
        }
        out
    }

    pub fn specialize(&self, alpha: &GaussRat) -> Form {
        self.map_coeffs(|c| Scalar::constant(c.evaluate_alpha(alpha)))
    }

    /// The top form α^{1…n}∧ᾱ^{1…n} coefficient.
    pub fn top_coeff(&self) -> Scalar {
        self.coeff((1u32 << (2 * self.n)) - 1)
    }

    pub fn fmt_index(mask: Mask, n: usize) -> String {
        let idx = MultiIndex::from_mask(mask, n);
        let h: String = idx.holo.iter().map(|i| i.to_string()).collect();
        let a: String = idx.anti.iter().map(|i| i.to_string()).collect();
        match (h.is_empty(), a.is_empty()) {
            (true, true) => String::new(),
            (false, true) => format!("a^{{{h}}}"),
            (true, false) => format!("ā^{{{a}}}"),
            (false, false) => format!("a^{{{h}}}∧ā^{{{a}}}"),
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(m, c)| {
                let cs = c.to_string();
                let cs = if cs.contains(' ') { format!("({cs})") } else { cs };
                let idx = Form::fmt_index(m, self.n);
                if idx.is_empty() { cs } else { format!("{cs} · {idx}") }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Value space of a valued form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueTag {
    Scalar,
    /// T^{1,0}: components in the frame V_1..V_n.
    Tangent,
    /// (T^{1,0})*: components in the frame α^1..α^n.
    Cotangent,
    /// r×r matrices, row-major.
    End(usize),
}

/// Form with values in a finite-dimensional space, one scalar form per
/// value component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VForm {
    pub tag: ValueTag,
    pub comps: Vec<Form>,
}

impl VForm {
    pub fn zero(tag: ValueTag, n: usize) -> Self {
        let k = match tag {
            ValueTag::Scalar => 1,
            ValueTag::Tangent | ValueTag::Cotangent => n,
            ValueTag::End(r) => r * r,
        };
        VForm { tag, comps: vec![Form::zero(n); k] }
    }

    pub fn n(&self) -> usize {
        self.comps[0].n
    }

    pub fn add(&self, o: &VForm) -> Result<VForm> {
        if self.tag != o.tag {
            return Err(Error::TagMismatch(format!("{:?} + {:?}", self.tag, o.tag)));
        }
        Ok(VForm { tag: self.tag, comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect() })
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Scalar form wedged on the left of every component.
    pub fn prewedge(&self, x: &Form) -> VForm {
        VForm { tag: self.tag, comps: self.comps.iter().map(|c| x.wedge(c)).collect() }
    }

    /// Matrix product of End-valued forms, wedging entries.
    pub fn matmul(&self, o: &VForm) -> Result<VForm> {
        let (ValueTag::End(r), ValueTag::End(s)) = (self.tag, o.tag) else {
            return Err(Error::TagMismatch("matrix product needs End-valued forms".into()));
        };
        if r != s {
            return Err(Error::TagMismatch("rank mismatch".into()));
        }
        let n = self.n();
        let mut out = VForm::zero(ValueTag::End(r), n);
        for i in 0..r {
            for j in 0..r {
                let mut acc = Form::zero(n);
                for k in 0..r {
                    acc = acc.add(&self.comps[i * r + k].wedge(&o.comps[k * r + j]));
                }
                out.comps[i * r + j] = acc;
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Result<Form> {
        let ValueTag::End(r) = self.tag else {
            return Err(Error::TagMismatch("trace needs End-valued form".into()));
        };
        let mut acc = Form::zero(self.n());
        for i in 0..r {
            acc = acc.add(&self.comps[i * r + i]);
        }
        Ok(acc)
    }
}

/// V⌟κ: pairs the vector leg against the covector leg and wedges the form
/// legs in the order (V-form, κ-form).
pub fn contract(v: &VForm, kappa: &VForm) -> Result<Form> {
    if v.tag != ValueTag::Tangent || kappa.tag != ValueTag::Cotangent {
        return Err(Error::TagMismatch(format!("contract({:?}, {:?})", v.tag, kappa.tag)));
    }
    let mut acc = Form::zero(v.n());
    for (a, b) in v.comps.iter().zip(&kappa.comps) {
        acc = acc.add(&a.wedge(b));
    }
    Ok(acc)
}

/// κ(W): same pairing with the form legs in the order (κ-form, W-form).
pub fn contract_rev(kappa: &VForm, w: &VForm) -> Result<Form> {
    if w.tag != ValueTag::Tangent || kappa.tag != ValueTag::Cotangent {
        return Err(Error::TagMismatch(format!("contract_rev({:?}, {:?})", kappa.tag, w.tag)));
    }
    let mut acc = Form::zero(w.n());
    for (a, b) in kappa.comps.iter().zip(&w.comps) {
        acc = acc.add(&a.wedge(b));
    }
    Ok(acc)
}

/// All masks of bidegree (p, q) in increasing order.
pub fn masks_of_bidegree(n: usize, p: usize, q: usize) -> Vec<Mask> {
    let mut out: Vec<Mask> = (0..(1u32 << (2 * n))).filter(|&m| mask_bidegree(m, n) == (p, q)).collect();
    out.sort_by_key(|&m| (bits(m).collect::<Vec<_>>(), m));
    out
}

/// (0,p) masks in lexicographic order of their antiholomorphic indices.
pub fn anti_masks(n: usize, p: usize) -> Vec<Mask> {
    masks_of_bidegree(n, 0, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_form(rng: &mut ChaCha8Rng, n: usize) -> Form {
        let mut f = Form::zero(n);
        for _ in 0..rng.gen_range(0..5) {
            let mask = rng.gen_range(0..(1u32 << (2 * n)));
            f.add_term(mask, Scalar::constant(GaussRat::from_ints(rng.gen_range(-3..4), rng.gen_range(-3..4))));
        }
        f
    }

    fn homogeneous(f: &Form, deg: usize) -> Form {
        let mut g = Form::zero(f.n);
        for (m, c) in f.terms() {
            if m.count_ones() as usize == deg {
                g.add_term(m, c.clone());
            }
        }
        g
    }

    #[test]
    fn repeated_index_vanishes() {
        assert!(Form::alpha(3, 1).wedge(&Form::alpha(3, 1)).is_zero());
    }

    #[test]
    fn iwasawa_2_2_form() {
        let n = 3;
        let x = Form::alpha(n, 1).wedge(&Form::alpha(n, 2));
        let y = Form::alpha_bar(n, 1).wedge(&Form::alpha_bar(n, 2));
        let z = x.wedge(&y);
        assert_eq!(z.coeff(MultiIndex::new(vec![1, 2], vec![1, 2]).mask(n)), Scalar::from(1));
        assert_eq!(z.len(), 1);
    }

    #[test]
    fn omega_cubed_by_brute_force() {
        let n = 3;
        let mut omega = Form::zero(n);
        for a in 1..=3 {
            omega = omega.add(&Form::alpha(n, a).wedge(&Form::alpha_bar(n, a)).scale(&Scalar::constant(GaussRat::new(crate::scalar::rat(0, 1), crate::scalar::rat(1, 2)))));
        }
        let cube = omega.wedge(&omega).wedge(&omega);
        // (i/2)^3 · 3! · α¹ᾱ¹α²ᾱ²α³ᾱ³, reordered: sign of moving to α¹²³ᾱ¹²³ is (-1)^3
        let expected = GaussRat::new(crate::scalar::rat(0, 1), crate::scalar::rat(-1, 8)).scale(&crate::scalar::rat(6, 1));
        let expected = -expected;
        assert_eq!(cube.top_coeff(), Scalar::constant(expected));
    }

    #[test]
    fn conjugation_examples() {
        let n = 3;
        assert_eq!(Form::alpha(n, 1).conjugate(), Form::alpha_bar(n, 1));
        let x = Form::alpha(n, 1).wedge(&Form::alpha_bar(n, 2)).scale(&Scalar::i());
        // conj = -i ᾱ¹∧α² = i α²∧ᾱ¹
        let expected = Form::alpha(n, 2).wedge(&Form::alpha_bar(n, 1)).scale(&Scalar::i());
        assert_eq!(x.conjugate(), expected);
        let t = Form::alpha(n, 1).wedge(&Form::alpha(n, 2)).wedge(&Form::alpha_bar(n, 3)).scale(&Scalar::frac(-1, 2));
        let tb = Form::alpha_bar(n, 1).wedge(&Form::alpha_bar(n, 2)).wedge(&Form::alpha(n, 3)).scale(&Scalar::frac(-1, 2));
        assert_eq!(t.conjugate(), tb);
    }

    #[test]
    fn algebra_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let (a, b, c) = (random_form(&mut rng, 3), random_form(&mut rng, 3), random_form(&mut rng, 3));
            assert_eq!(a.wedge(&b).wedge(&c), a.wedge(&b.wedge(&c)));
            assert_eq!(a.conjugate().conjugate(), a);
            for p in 0..=6 {
                for q in 0..=6 {
                    let (x, y) = (homogeneous(&a, p), homogeneous(&b, q));
                    let s = if (p * q) % 2 == 0 { Scalar::from(1) } else { Scalar::from(-1) };
                    assert_eq!(x.wedge(&y), y.wedge(&x).scale(&s));
                    if p % 2 == 1 {
                        assert!(x.wedge(&x).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn contract_examples() {
        let n = 3;
        let mut v = VForm::zero(ValueTag::Tangent, n);
        let mut k = VForm::zero(ValueTag::Cotangent, n);
        v.comps[0] = Form::one(n);
        k.comps[0] = Form::one(n);
        assert_eq!(contract(&v, &k).unwrap(), Form::one(n));
        v.comps[0] = Form::alpha_bar(n, 1);
        k.comps[0] = Form::alpha_bar(n, 2);
        assert_eq!(contract(&v, &k).unwrap(), Form::alpha_bar(n, 1).wedge(&Form::alpha_bar(n, 2)));
        v.comps[0] = Form::alpha_bar(n, 2);
        k.comps[0] = Form::alpha_bar(n, 1);
        assert_eq!(contract(&v, &k).unwrap(), Form::alpha_bar(n, 1).wedge(&Form::alpha_bar(n, 2)).neg());
        assert!(contract(&k, &v).is_err());
    }

    #[test]
    fn printing() {
        let n = 3;
        let t = Form::alpha(n, 1).wedge(&Form::alpha(n, 2)).wedge(&Form::alpha_bar(n, 3)).scale(&Scalar::frac(-1, 2));
        assert_eq!(t.to_string(), "-1/2 · a^{12}∧ā^{3}");
    }
}
