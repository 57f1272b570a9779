//! Polynomial forms on a coordinate chart, the radial ∂̄-homotopy,
//! Chern–Simons forms, and the local trivialization φ of D̄.
//!
//! Chart generators follow the invariant convention: bit a < n is dz_{a+1},
//! bit n + a is dz̄_{a+1}. Polynomials live in z_1..z_n, z̄_1..z̄_n.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::{bits, shuffle_sign, Form, Mask};
use crate::geometry::HomogeneousModel;
use crate::qcomplex::{QOptions, QSection};
use crate::scalar::GaussRat;

/// Polynomial in z, z̄ with Gaussian rational coefficients. Exponent
/// vectors have length 2n: z_1..z_n then z̄_1..z̄_n.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    pub n: usize,
    terms: BTreeMap<Vec<u8>, GaussRat>,
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Poly { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: GaussRat) -> Self {
        let mut p = Poly::zero(n);
        p.add_term(vec![0; 2 * n], c);
        p
    }

    pub fn one(n: usize) -> Self {
        Poly::constant(n, GaussRat::one())
    }

    /// Variable `v`: z_{v+1} for v < n, z̄_{v−n+1} otherwise.
    pub fn var(n: usize, v: usize) -> Self {
        let mut e = vec![0; 2 * n];
        e[v] = 1;
        Poly::monomial(n, e, GaussRat::one())
    }

    pub fn monomial(n: usize, exps: Vec<u8>, c: GaussRat) -> Self {
        let mut p = Poly::zero(n);
        p.add_term(exps, c);
        p
    }

    fn add_term(&mut self, e: Vec<u8>, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        let v = self.terms.remove(&e).map(|x| x + c.clone()).unwrap_or(c);
        if !v.is_zero() {
            self.terms.insert(e, v);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &GaussRat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(&-GaussRat::one()))
    }

    pub fn scale(&self, s: &GaussRat) -> Poly {
        let mut p = Poly::zero(self.n);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), c * s);
        }
        p
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut p = Poly::zero(self.n);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    pub fn deriv(&self, v: usize) -> Poly {
        let mut p = Poly::zero(self.n);
        for (e, c) in &self.terms {
            if e[v] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[v] -= 1;
            p.add_term(e2, c * &GaussRat::from(e[v] as i64));
        }
        p
    }

    pub fn conj(&self) -> Poly {
        let n = self.n;
        let mut p = Poly::zero(n);
        for (e, c) in &self.terms {
            let mut e2 = e[n..].to_vec();
            e2.extend_from_slice(&e[..n]);
            p.add_term(e2, c.conj());
        }
        p
    }

    /// Total degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|e| e.iter().map(|&x| x as usize).sum()).max()
    }

    /// Holomorphic: no z̄ appears.
    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|e| e[self.n..].iter().all(|&x| x == 0))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let n = self.n;
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut vars = Vec::new();
                for (v, &k) in e.iter().enumerate() {
                    if k == 0 {
                        continue;
                    }
                    let name = if v < n { format!("z{}", v + 1) } else { format!("zb{}", v - n + 1) };
                    vars.push(if k == 1 { name } else { format!("{name}^{k}") });
                }
                if vars.is_empty() {
                    format!("({c})")
                } else if c.is_one() {
                    vars.join(" ")
                } else {
                    format!("({c}) {}", vars.join(" "))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Differential form on the chart with polynomial coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChartForm {
    pub n: usize,
    terms: BTreeMap<Mask, Poly>,
}

impl ChartForm {
    pub fn zero(n: usize) -> Self {
        ChartForm { n, terms: BTreeMap::new() }
    }

    pub fn function(p: Poly) -> Self {
        let mut f = ChartForm::zero(p.n);
        f.add_term(0, p);
        f
    }

    pub fn monomial(n: usize, mask: Mask, p: Poly) -> Self {
        let mut f = ChartForm::zero(n);
        f.add_term(mask, p);
        f
    }

    /// dz_{a+1}.
    pub fn dz(n: usize, a: usize) -> Self {
        ChartForm::monomial(n, 1 << a, Poly::one(n))
    }

    /// dz̄_{a+1}.
    pub fn dzb(n: usize, a: usize) -> Self {
        ChartForm::monomial(n, 1 << (n + a), Poly::one(n))
    }

    pub fn add_term(&mut self, mask: Mask, p: Poly) {
        if p.is_zero() {
            return;
        }
        let v = match self.terms.remove(&mask) {
            Some(q) => q.add(&p),
            None => p,
        };
        if !v.is_zero() {
            self.terms.insert(mask, v);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mask, &Poly)> {
        self.terms.iter().map(|(m, p)| (*m, p))
    }

    pub fn coeff(&self, mask: Mask) -> Poly {
        self.terms.get(&mask).cloned().unwrap_or_else(|| Poly::zero(self.n))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &ChartForm) -> ChartForm {
        let mut f = self.clone();
        for (m, p) in &o.terms {
            f.add_term(*m, p.clone());
        }
        f
    }

    pub fn sub(&self, o: &ChartForm) -> ChartForm {
        self.add(&o.scale(&-GaussRat::one()))
    }

    pub fn neg(&self) -> ChartForm {
        self.scale(&-GaussRat::one())
    }

    pub fn scale(&self, s: &GaussRat) -> ChartForm {
        let mut f = ChartForm::zero(self.n);
        for (m, p) in &self.terms {
            f.add_term(*m, p.scale(s));
        }
        f
    }

    pub fn mul_poly(&self, q: &Poly) -> ChartForm {
        let mut f = ChartForm::zero(self.n);
        for (m, p) in &self.terms {
            f.add_term(*m, p.mul(q));
        }
        f
    }

    pub fn wedge(&self, o: &ChartForm) -> ChartForm {
        let mut f = ChartForm::zero(self.n);
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                if a & b != 0 {
                    continue;
                }
                let pr = x.mul(y);
                f.add_term(a | b, if shuffle_sign(*a, *b) < 0 { pr.scale(&-GaussRat::one()) } else { pr });
            }
        }
        f
    }

    fn apply_d(&self, vars: std::ops::Range<usize>) -> ChartForm {
        let n = self.n;
        let mut f = ChartForm::zero(n);
        for v in vars {
            let dv = ChartForm::monomial(n, 1 << v, Poly::one(n));
            for (m, p) in &self.terms {
                let c = p.deriv(v);
                if !c.is_zero() {
                    f = f.add(&dv.wedge(&ChartForm::monomial(n, *m, c)));
                }
            }
        }
        f
    }

    /// ∂̄ = Σ dz̄_k ∧ ∂/∂z̄_k.
    pub fn dbar(&self) -> ChartForm {
        self.apply_d(self.n..2 * self.n)
    }

    /// ∂ = Σ dz_k ∧ ∂/∂z_k.
    pub fn del(&self) -> ChartForm {
        self.apply_d(0..self.n)
    }

    pub fn d(&self) -> ChartForm {
        self.del().add(&self.dbar())
    }

    pub fn conjugate(&self) -> ChartForm {
        let n = self.n;
        let low = (1u32 << n) - 1;
        let mut f = ChartForm::zero(n);
        for (m, p) in &self.terms {
            let h = m & low;
            let a = m >> n;
            let s = shuffle_sign(h << n, a);
            let c = p.conj();
            f.add_term(a | (h << n), if s < 0 { c.scale(&-GaussRat::one()) } else { c });
        }
        f
    }

    /// Interior product with ∂/∂z_{x+1} (x < n) or ∂/∂z̄ (x ≥ n).
    pub fn interior(&self, x: usize) -> ChartForm {
        let mut f = ChartForm::zero(self.n);
        for (m, p) in &self.terms {
            if m & (1 << x) == 0 {
                continue;
            }
            let below = (m & ((1u32 << x) - 1)).count_ones();
            f.add_term(m & !(1 << x), if below % 2 == 0 { p.clone() } else { p.scale(&-GaussRat::one()) });
        }
        f
    }

    /// Antiholomorphic degree of every term, if homogeneous.
    pub fn anti_degrees(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.terms.keys().map(|m| (m >> self.n).count_ones() as usize).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Pull-back of an invariant form along a coframe `α^a ↦ coframe[a]`.
    pub fn pullback(f: &Form, coframe: &[ChartForm]) -> Result<ChartForm> {
        let n = f.n;
        let conj: Vec<ChartForm> = coframe.iter().map(|c| c.conjugate()).collect();
        let mut out = ChartForm::zero(n);
        for (mask, c) in f.terms() {
            if !c.is_constant() {
                return Err(Error::Unsupported("pull-back of an α′-dependent form".into()));
            }
            let mut t = ChartForm::function(Poly::constant(n, c.constant_term()));
            for g in bits(mask) {
                t = t.wedge(if g < n { &coframe[g] } else { &conj[g - n] });
            }
            out = out.add(&t);
        }
        Ok(out)
    }
}

impl fmt::Display for ChartForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let n = self.n;
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, p)| {
                let gens: Vec<String> = bits(*m)
                    .map(|g| if g < n { format!("dz{}", g + 1) } else { format!("dzb{}", g - n + 1) })
                    .collect();
                if gens.is_empty() {
                    format!("[{p}]")
                } else {
                    format!("[{p}] {}", gens.join("^"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Parses a polynomial 1-form such as `-dz3 + z1 dz2` or `1/2 i zb1^2 dz1`.
pub fn parse_chart_one_form(s: &str, n: usize) -> Result<ChartForm> {
    let err = |m: &str| Error::Parse(format!("chart form {s:?}: {m}"));
    let spaced = s.replace('+', " + ").replace('-', " - ");
    let mut out = ChartForm::zero(n);
    let mut sign = GaussRat::one();
    let mut coeff = GaussRat::one();
    let mut poly = Poly::one(n);
    let mut seen = false;
    let index = |t: &str, prefix: &str| -> Result<usize> {
        let k: usize = t[prefix.len()..].parse().map_err(|_| err("bad index"))?;
        if k == 0 || k > n {
            return Err(err("index out of range"));
        }
        Ok(k - 1)
    };
    for tok in spaced.split_whitespace() {
        match tok {
            "+" | "-" => {
                if seen {
                    return Err(err("term without differential"));
                }
                if tok == "-" {
                    sign = -sign;
                }
            }
            "i" => coeff = coeff.mul_i(),
            t if t.starts_with("dzb") || t.starts_with("dz") => {
                let (anti, k) = if t.starts_with("dzb") { (true, index(t, "dzb")?) } else { (false, index(t, "dz")?) };
                let g = if anti { n + k } else { k };
                out = out.add(&ChartForm::monomial(n, 1 << g, poly.scale(&(&sign * &coeff))));
                sign = GaussRat::one();
                coeff = GaussRat::one();
                poly = Poly::one(n);
                seen = false;
                continue;
            }
            t if t.starts_with('z') => {
                let (base, pow) = match t.split_once('^') {
                    Some((b, p)) => (b, p.parse::<u32>().map_err(|_| err("bad exponent"))?),
                    None => (t, 1),
                };
                let v = if base.starts_with("zb") { n + index(base, "zb")? } else { index(base, "z")? };
                for _ in 0..pow {
                    poly = poly.mul(&Poly::var(n, v));
                }
            }
            t => {
                let g: GaussRat = t.parse().map_err(|_| err("bad coefficient"))?;
                coeff = &coeff * &g;
            }
        }
        seen = true;
    }
    if seen {
        return Err(err("trailing term without differential"));
    }
    Ok(out)
}

/// η with ∂̄η = x for ∂̄-closed x of positive antiholomorphic degree, via the
/// radial homotopy `η = Σ_w (1/w) ι_R̄ x_w`, R̄ = Σ z̄_k ∂/∂z̄_k, where w is the
/// z̄-degree plus the antiholomorphic form degree.
pub fn dbar_homotopy(x: &ChartForm) -> Result<ChartForm> {
    let n = x.n;
    if !x.dbar().is_zero() {
        return Err(Error::NotClosed(format!("∂̄x ≠ 0 for x = {x}")));
    }
    if x.anti_degrees().contains(&0) {
        return Err(Error::Degree("homotopy needs antiholomorphic degree ≥ 1".into()));
    }
    let mut out = ChartForm::zero(n);
    for (mask, p) in x.terms() {
        let q = (mask >> n).count_ones() as usize;
        for (e, c) in p.terms() {
            let w = q + e[n..].iter().map(|&k| k as usize).sum::<usize>();
            let c = c * &GaussRat::frac(1, w as i64);
            for k in 0..n {
                let g = n + k;
                if mask & (1 << g) == 0 {
                    continue;
                }
                let below = (mask & ((1u32 << g) - 1)).count_ones();
                let mut e2 = e.clone();
                e2[n + k] += 1;
                let c2 = if below % 2 == 0 { c.clone() } else { -c.clone() };
                out.add_term(mask & !(1 << g), Poly::monomial(n, e2, c2));
            }
        }
    }
    Ok(out)
}

/// r×r matrix of chart forms, row-major.
pub type ChartMatrix = Vec<ChartForm>;

fn mat_wedge(a: &ChartMatrix, b: &ChartMatrix, r: usize) -> ChartMatrix {
    let n = a[0].n;
    (0..r * r)
        .map(|ij| {
            let (i, j) = (ij / r, ij % r);
            let mut acc = ChartForm::zero(n);
            for k in 0..r {
                acc = acc.add(&a[i * r + k].wedge(&b[k * r + j]));
            }
            acc
        })
        .collect()
}

fn trace(a: &ChartMatrix, r: usize) -> ChartForm {
    let mut acc = ChartForm::zero(a[0].n);
    for i in 0..r {
        acc = acc.add(&a[i * r + i]);
    }
    acc
}

/// `CS(A) = tr(A∧dA + ⅔ A∧A∧A)` for a matrix of 1-forms.
pub fn chern_simons(a: &ChartMatrix, r: usize) -> ChartForm {
    let da: ChartMatrix = a.iter().map(|x| x.d()).collect();
    let aa = mat_wedge(a, a, r);
    let aaa = mat_wedge(&aa, a, r);
    trace(&mat_wedge(a, &da, r), r).add(&trace(&aaa, r).scale(&GaussRat::frac(2, 3)))
}

/// `dA + A∧A`.
pub fn curvature_of(a: &ChartMatrix, r: usize) -> ChartMatrix {
    let aa = mat_wedge(a, a, r);
    a.iter().zip(aa).map(|(x, y)| x.d().add(&y)).collect()
}

/// Q-valued (0,p)-form on the chart in the coordinate frame.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChartSection {
    pub kappa: Vec<ChartForm>,
    pub gamma: Vec<ChartForm>,
    pub w: Vec<ChartForm>,
}

impl ChartSection {
    pub fn zero(n: usize, r: usize) -> Self {
        ChartSection {
            kappa: vec![ChartForm::zero(n); n],
            gamma: vec![ChartForm::zero(n); r * r],
            w: vec![ChartForm::zero(n); n],
        }
    }

    pub fn add(&self, o: &ChartSection) -> ChartSection {
        let z = |a: &[ChartForm], b: &[ChartForm]| a.iter().zip(b).map(|(x, y)| x.add(y)).collect();
        ChartSection { kappa: z(&self.kappa, &o.kappa), gamma: z(&self.gamma, &o.gamma), w: z(&self.w, &o.w) }
    }

    pub fn sub(&self, o: &ChartSection) -> ChartSection {
        let z = |a: &[ChartForm], b: &[ChartForm]| a.iter().zip(b).map(|(x, y)| x.sub(y)).collect();
        ChartSection { kappa: z(&self.kappa, &o.kappa), gamma: z(&self.gamma, &o.gamma), w: z(&self.w, &o.w) }
    }

    pub fn dbar(&self) -> ChartSection {
        let z = |a: &[ChartForm]| a.iter().map(|x| x.dbar()).collect();
        ChartSection { kappa: z(&self.kappa), gamma: z(&self.gamma), w: z(&self.w) }
    }

    pub fn is_zero(&self) -> bool {
        self.kappa.iter().chain(&self.gamma).chain(&self.w).all(|x| x.is_zero())
    }
}

/// The model's T, F and coframe on its polynomial chart, with α′ fixed.
#[derive(Clone, Debug)]
pub struct ChartModel {
    pub n: usize,
    pub r: usize,
    pub alpha: GaussRat,
    pub coframe: Vec<ChartForm>,
    /// `p[a][b]`: coefficient of dz_b in α^a.
    pub p: Vec<Vec<Poly>>,
    /// Inverse of `p` (polynomial because det p is constant).
    pub p_inv: Vec<Vec<Poly>>,
    pub torsion: ChartForm,
    pub f: ChartMatrix,
    /// `t_lj = ι_j ι_l T`, a (0,1)-form.
    pub t_lj: Vec<Vec<ChartForm>>,
    /// `f_j = ι_j F`, matrices of (0,1)-forms.
    pub f_j: Vec<ChartMatrix>,
}

fn poly_det(m: &[Vec<Poly>]) -> Poly {
    let k = m.len();
    if k == 0 {
        return Poly::one(0);
    }
    let n = m[0][0].n;
    if k == 1 {
        return m[0][0].clone();
    }
    let mut acc = Poly::zero(n);
    for c in 0..k {
        let minor: Vec<Vec<Poly>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| x.clone()).collect()).collect();
        let t = m[0][c].mul(&poly_det(&minor));
        acc = if c % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}

fn poly_inverse(m: &[Vec<Poly>]) -> Result<Vec<Vec<Poly>>> {
    let k = m.len();
    let n = m[0][0].n;
    let det = poly_det(m);
    let d = match det.degree() {
        Some(0) => det.terms().next().map(|(_, c)| c.clone()).expect("nonzero"),
        _ => return Err(Error::Unsupported("coframe pull-back has non-constant determinant".into())),
    };
    let dinv = d.inv()?;
    let mut inv = vec![vec![Poly::zero(n); k]; k];
    for i in 0..k {
        for j in 0..k {
            let minor: Vec<Vec<Poly>> = m
                .iter()
                .enumerate()
                .filter(|(r, _)| *r != j)
                .map(|(_, row)| row.iter().enumerate().filter(|(c, _)| *c != i).map(|(_, x)| x.clone()).collect())
                .collect();
            let c = poly_det(&minor).scale(&dinv);
            inv[i][j] = if (i + j) % 2 == 0 { c } else { c.scale(&-GaussRat::one()) };
        }
    }
    Ok(inv)
}

impl ChartModel {
    pub fn new(m: &HomogeneousModel) -> Result<Self> {
        let n = m.n;
        let spec = m.chart.as_ref().ok_or_else(|| Error::NoChart(m.name.clone()))?;
        let coframe: Vec<ChartForm> =
            spec.coframe_pullback.iter().map(|s| parse_chart_one_form(s, n)).collect::<Result<_>>()?;
        for (a, c) in coframe.iter().enumerate() {
            if c.terms().any(|(mask, _)| mask >> n != 0 || mask.count_ones() != 1) {
                return Err(Error::InvalidModel(vec![format!("chart: α^{} must pull back to a (1,0)-form", a + 1)]));
            }
            let dpull = ChartForm::pullback(&m.d_coframe[a], &coframe)?;
            if c.d() != dpull {
                return Err(Error::InvalidModel(vec![format!("chart: d of α^{} does not match its structure equation", a + 1)]));
            }
        }
        let p: Vec<Vec<Poly>> = coframe.iter().map(|c| (0..n).map(|b| c.coeff(1 << b)).collect()).collect();
        let p_inv = poly_inverse(&p)?;
        let chern = m.chern_connection()?;
        if !m.curvature(&chern).is_zero() {
            return Err(Error::Unsupported("chart trivialization implemented for Chern-flat models (Γ = 0 potential)".into()));
        }
        let torsion = ChartForm::pullback(&m.torsion(), &coframe)?;
        let r = m.rank;
        let f: ChartMatrix = m.f.comps.iter().map(|c| ChartForm::pullback(c, &coframe)).collect::<Result<_>>()?;
        let t_lj = (0..n).map(|l| (0..n).map(|j| torsion.interior(l).interior(j)).collect()).collect();
        let f_j = (0..n).map(|j| f.iter().map(|x| x.interior(j)).collect()).collect();
        Ok(ChartModel { n, r, alpha: m.alpha_prime.clone(), coframe, p, p_inv, torsion, f, t_lj, f_j })
    }

    /// D̄ on chart sections (𝓡∇⁺ vanishes: R = 0).
    pub fn dbar_op(&self, s: &ChartSection) -> ChartSection {
        let (n, r) = (self.n, self.r);
        let mut out = s.dbar();
        for j in 0..n {
            let mut acc = ChartForm::zero(n);
            for a in 0..r {
                for b in 0..r {
                    acc = acc.add(&self.f_j[j][a * r + b].wedge(&s.gamma[b * r + a]));
                }
            }
            out.kappa[j] = out.kappa[j].add(&acc.scale(&self.alpha));
            for l in 0..n {
                out.kappa[j] = out.kappa[j].add(&self.t_lj[l][j].wedge(&s.w[l]));
            }
        }
        for ab in 0..r * r {
            for j in 0..n {
                out.gamma[ab] = out.gamma[ab].add(&self.f_j[j][ab].wedge(&s.w[j]));
            }
        }
        out
    }

    /// Invariant section written in the coordinate frame.
    pub fn pull_section(&self, s: &QSection) -> Result<ChartSection> {
        let n = self.n;
        let pf = |f: &Form| ChartForm::pullback(f, &self.coframe);
        let mut out = ChartSection::zero(n, self.r);
        for a in 0..n {
            let ka = pf(&s.kappa.comps[a])?;
            let wa = pf(&s.w.comps[a])?;
            for b in 0..n {
                out.kappa[b] = out.kappa[b].add(&ka.mul_poly(&self.p[a][b]));
                out.w[b] = out.w[b].add(&wa.mul_poly(&self.p_inv[b][a]));
            }
        }
        out.gamma = s.gamma.comps.iter().map(pf).collect::<Result<_>>()?;
        Ok(out)
    }
}

/// Sign relating the tensor A_j to the dz_j coefficient of the matrix of
/// (1,0)-forms A: `A_j = −(coefficient)`, so that `∂̄A_j = ι_j F`.
pub const A_TENSOR_SIGN: i64 = -1;

#[derive(Clone, Debug)]
pub struct TrivializationData {
    pub cm: ChartModel,
    /// Matrix of (1,0)-forms with ∂̄A = F.
    pub a_form: ChartMatrix,
    /// `a_t[j]`: the r×r matrix of functions A_j.
    pub a_t: Vec<Vec<Poly>>,
    /// Chern potential Γ (zero; R = 0).
    pub gamma_chart: Vec<ChartForm>,
    /// `tau[j][l]`, with ∂̄τ̃_{jl} = T_{jl} + α′ tr(A_j F_l).
    pub tau: Vec<Vec<Poly>>,
}

impl TrivializationData {
    fn from_potential(cm: &ChartModel, a_form: ChartMatrix, tau_shift: &[Vec<Poly>]) -> Result<Self> {
        let (n, r) = (cm.n, cm.r);
        let sgn = GaussRat::from(A_TENSOR_SIGN);
        let a_t: Vec<Vec<Poly>> = (0..n).map(|j| a_form.iter().map(|x| x.coeff(1 << j).scale(&sgn)).collect()).collect();
        let mut tau = vec![vec![Poly::zero(n); n]; n];
        for j in 0..n {
            for l in 0..n {
                let mut rhs = cm.t_lj[l][j].clone();
                let mut tr = ChartForm::zero(n);
                for a in 0..r {
                    for b in 0..r {
                        tr = tr.add(&cm.f_j[l][b * r + a].mul_poly(&a_t[j][a * r + b]));
                    }
                }
                rhs = rhs.add(&tr.scale(&cm.alpha));
                let eta = if rhs.is_zero() { ChartForm::zero(n) } else { dbar_homotopy(&rhs)? };
                tau[j][l] = eta.coeff(0).add(&tau_shift[j][l]);
            }
        }
        Ok(TrivializationData { cm: cm.clone(), a_form, a_t, gamma_chart: vec![ChartForm::zero(n); n * n], tau })
    }

    /// Potentials from the homotopy applied to F entry by entry.
    pub fn build(m: &HomogeneousModel) -> Result<Self> {
        let cm = ChartModel::new(m)?;
        let a_form: ChartMatrix = cm
            .f
            .iter()
            .map(|x| if x.is_zero() { Ok(ChartForm::zero(cm.n)) } else { dbar_homotopy(x) })
            .collect::<Result<_>>()?;
        let zero = vec![vec![Poly::zero(cm.n); cm.n]; cm.n];
        Self::from_potential(&cm, a_form, &zero)
    }

    /// Another trivialization with `A + hol` and τ̃ shifted by a holomorphic
    /// `shift` after re-solving the τ̃ equation.
    pub fn variant(&self, hol: &ChartMatrix, shift: &[Vec<Poly>]) -> Result<Self> {
        let a_form = self.a_form.iter().zip(hol).map(|(a, h)| a.add(h)).collect();
        Self::from_potential(&self.cm, a_form, shift)
    }

    pub fn dbar_a_residual(&self) -> Vec<ChartForm> {
        self.a_form.iter().zip(&self.cm.f).map(|(a, f)| a.dbar().sub(f)).collect()
    }

    /// ∂̄τ̃_{jl} − T_{jl} − α′tr(A_j F_l) + α′tr(Γ_j R_l) over all (j, l).
    pub fn tau_residual(&self) -> Vec<ChartForm> {
        let (n, r) = (self.cm.n, self.cm.r);
        let mut out = Vec::new();
        for j in 0..n {
            for l in 0..n {
                let mut tr = ChartForm::zero(n);
                for a in 0..r {
                    for b in 0..r {
                        tr = tr.add(&self.cm.f_j[l][b * r + a].mul_poly(&self.a_t[j][a * r + b]));
                    }
                }
                let res = ChartForm::function(self.tau[j][l].clone()).dbar().sub(&self.cm.t_lj[l][j]).sub(&tr.scale(&self.cm.alpha));
                out.push(res);
            }
        }
        out
    }

    /// `d CS(A) − tr(F∧F)`.
    pub fn chern_simons_residual(&self) -> ChartForm {
        let r = self.cm.r;
        chern_simons(&self.a_form, r).d().sub(&trace(&mat_wedge(&self.cm.f, &self.cm.f, r), r))
    }

    /// Action of A on the γ leg: `(Aγ)_j = tr(A_j γ)`.
    fn a_on_gamma(&self, g: &[ChartForm]) -> Vec<ChartForm> {
        let (n, r) = (self.cm.n, self.cm.r);
        (0..n)
            .map(|j| {
                let mut acc = ChartForm::zero(n);
                for a in 0..r {
                    for b in 0..r {
                        acc = acc.add(&g[b * r + a].mul_poly(&self.a_t[j][a * r + b]));
                    }
                }
                acc
            })
            .collect()
    }

    /// Action of A on the W leg: `(AW) = Σ_j A_j W^j`.
    fn a_on_w(&self, w: &[ChartForm]) -> Vec<ChartForm> {
        let (n, r) = (self.cm.n, self.cm.r);
        (0..r * r)
            .map(|ab| {
                let mut acc = ChartForm::zero(n);
                for j in 0..n {
                    acc = acc.add(&w[j].mul_poly(&self.a_t[j][ab]));
                }
                acc
            })
            .collect()
    }

    fn tau_on_w(&self, w: &[ChartForm]) -> Vec<ChartForm> {
        let n = self.cm.n;
        (0..n)
            .map(|j| {
                let mut acc = ChartForm::zero(n);
                for l in 0..n {
                    acc = acc.add(&w[l].mul_poly(&self.tau[j][l]));
                }
                acc
            })
            .collect()
    }

    pub fn phi(&self, s: &ChartSection) -> ChartSection {
        let ag = self.a_on_gamma(&s.gamma);
        let tw = self.tau_on_w(&s.w);
        let aw = self.a_on_w(&s.w);
        let al = &self.cm.alpha;
        ChartSection {
            kappa: (0..self.cm.n).map(|j| s.kappa[j].add(&ag[j].scale(al)).add(&tw[j])).collect(),
            gamma: s.gamma.iter().zip(&aw).map(|(g, x)| g.add(x)).collect(),
            w: s.w.clone(),
        }
    }

    /// φ⁻¹ with the α′ A·A entry.
    pub fn phi_inv(&self, s: &ChartSection) -> ChartSection {
        let ag = self.a_on_gamma(&s.gamma);
        let tw = self.tau_on_w(&s.w);
        let aw = self.a_on_w(&s.w);
        let aaw = self.a_on_gamma(&aw);
        let al = &self.cm.alpha;
        ChartSection {
            kappa: (0..self.cm.n).map(|j| s.kappa[j].sub(&ag[j].scale(al)).add(&aaw[j].scale(al)).sub(&tw[j])).collect(),
            gamma: s.gamma.iter().zip(&aw).map(|(g, x)| g.sub(x)).collect(),
            w: s.w.clone(),
        }
    }

    /// `D̄s − φ⁻¹∂̄(φs)`.
    pub fn verify(&self, s: &ChartSection) -> ChartSection {
        self.cm.dbar_op(s).sub(&self.phi_inv(&self.phi(s).dbar()))
    }
}

/// Monomial Q-sections `z^I z̄^J dz̄^K ⊗ e` with polynomial degree ≤ `degree`,
/// every form degree, and e running over T*, trace-free End(E) and T.
pub fn monomial_sections(n: usize, r: usize, degree: usize) -> Vec<ChartSection> {
    let mut exps: Vec<Vec<u8>> = vec![vec![]];
    for _ in 0..2 * n {
        exps = exps.into_iter().flat_map(|e| (0..=degree as u8).map(move |k| [e.clone(), vec![k]].concat())).collect();
    }
    exps.retain(|e| e.iter().map(|&k| k as usize).sum::<usize>() <= degree);
    let mut out = Vec::new();
    for e in &exps {
        for k in 0u32..(1 << n) {
            let f = ChartForm::monomial(n, k << n, Poly::monomial(n, e.clone(), GaussRat::one()));
            for j in 0..n {
                let mut s = ChartSection::zero(n, r);
                s.kappa[j] = f.clone();
                out.push(s.clone());
                let mut s = ChartSection::zero(n, r);
                s.w[j] = f.clone();
                out.push(s);
            }
            for a in 0..r {
                for b in 0..r {
                    if a == r - 1 && b == r - 1 {
                        continue;
                    }
                    let mut s = ChartSection::zero(n, r);
                    s.gamma[a * r + b] = f.clone();
                    if a == b {
                        s.gamma[(r - 1) * r + r - 1] = f.neg();
                    }
                    out.push(s);
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionReport {
    pub name: String,
    pub sections: usize,
    pub holomorphic: bool,
    pub cocycle: bool,
}

/// ψ = φ₁∘φ₂⁻¹: checks `∂̄ψ = ψ∂̄` and `ψ₁₂∘ψ₂₁ = id` on monomial sections.
pub fn transition_check(name: &str, t1: &TrivializationData, t2: &TrivializationData, degree: usize) -> TransitionReport {
    let secs = monomial_sections(t1.cm.n, t1.cm.r, degree);
    let psi12 = |s: &ChartSection| t1.phi(&t2.phi_inv(s));
    let psi21 = |s: &ChartSection| t2.phi(&t1.phi_inv(s));
    let (hol, coc) = secs
        .par_iter()
        .map(|s| (psi12(&s.dbar()) == psi12(s).dbar(), psi12(&psi21(s)) == *s))
        .reduce(|| (true, true), |a, b| (a.0 && b.0, a.1 && b.1));
    TransitionReport { name: name.into(), sections: secs.len(), holomorphic: hol, cocycle: coc }
}

#[derive(Clone, Debug)]
pub struct TrivializationReport {
    pub model: String,
    pub alpha_prime: GaussRat,
    pub degree: usize,
    pub sections: usize,
    pub dbar_a_minus_f: bool,
    pub tau_residual_zero: bool,
    pub chern_simons_residual_zero: bool,
    pub phi_inverse: bool,
    pub residual_zero: bool,
    pub first_nonzero: Option<String>,
    pub transitions: Vec<TransitionReport>,
    pub a_form: Vec<String>,
    pub tau_tilde: Vec<String>,
}

impl TrivializationReport {
    pub fn all_pass(&self) -> bool {
        self.dbar_a_minus_f
            && self.tau_residual_zero
            && self.chern_simons_residual_zero
            && self.phi_inverse
            && self.residual_zero
            && self.transitions.iter().all(|t| t.holomorphic && t.cocycle)
    }
}

/// Three alternative potentials: A shifted by a holomorphic diagonal form,
/// τ̃ shifted by a constant, and both shifted by non-constant holomorphic data.
pub fn standard_pairs(t: &TrivializationData) -> Result<Vec<(String, TrivializationData)>> {
    let (n, r) = (t.cm.n, t.cm.r);
    let diag = |f: ChartForm| -> ChartMatrix {
        let mut m = vec![ChartForm::zero(n); r * r];
        m[0] = f.clone();
        m[(r - 1) * r + r - 1] = f.neg();
        m
    };
    let zero = vec![vec![Poly::zero(n); n]; n];
    let mut shift = zero.clone();
    shift[0][n - 1] = Poly::one(n);
    let mut shift2 = zero.clone();
    shift2[n - 1][0] = Poly::var(n, 0);
    let last = n - 1;
    Ok(vec![
        ("A + diag(dz1, -dz1)".into(), t.variant(&diag(ChartForm::dz(n, 0)), &zero)?),
        (format!("tau_1{} + 1", n), t.variant(&vec![ChartForm::zero(n); r * r], &shift)?),
        (
            format!("A + diag(z2 dz{0}, -z2 dz{0}), tau_{0}1 + z1", n),
            t.variant(&diag(ChartForm::dz(n, last).mul_poly(&Poly::var(n, 1.min(last)))), &shift2)?,
        ),
    ])
}

pub fn trivialize(m: &HomogeneousModel, degree: usize) -> Result<TrivializationReport> {
    let t = TrivializationData::build(m)?;
    let (n, r) = (t.cm.n, t.cm.r);
    let secs = monomial_sections(n, r, degree);
    let results: Vec<(bool, Option<String>)> = secs
        .par_iter()
        .map(|s| {
            let inv = t.phi(&t.phi_inv(s)) == *s && t.phi_inv(&t.phi(s)) == *s;
            let res = t.verify(s);
            (inv, if res.is_zero() { None } else { Some(format!("{:?}", res)) })
        })
        .collect();
    let phi_inverse = results.iter().all(|x| x.0);
    let first_nonzero = results.iter().find_map(|x| x.1.clone());
    let transitions = standard_pairs(&t)?
        .iter()
        .map(|(name, t2)| transition_check(name, &t, t2, degree))
        .collect();
    Ok(TrivializationReport {
        model: m.name.clone(),
        alpha_prime: t.cm.alpha.clone(),
        degree,
        sections: secs.len(),
        dbar_a_minus_f: t.dbar_a_residual().iter().all(|x| x.is_zero()),
        tau_residual_zero: t.tau_residual().iter().all(|x| x.is_zero()),
        chern_simons_residual_zero: t.chern_simons_residual().is_zero(),
        phi_inverse,
        residual_zero: first_nonzero.is_none(),
        first_nonzero,
        transitions,
        a_form: t.a_form.iter().map(|x| x.to_string()).collect(),
        tau_tilde: t.tau.iter().flatten().map(|x| x.to_string()).collect(),
    })
}

/// Chart D̄ against the invariant D̄ on every invariant basis section.
pub fn invariant_agreement(m: &HomogeneousModel) -> Result<bool> {
    let cm = ChartModel::new(m)?;
    let q = crate::qcomplex::QComplex::new(m, QOptions::default())?;
    for p in 0..m.n {
        let b = q.basis(p);
        for i in 0..b.dim() {
            let s = b.basis_section(i);
            let lhs = cm.dbar_op(&cm.pull_section(&s)?);
            let rhs = cm.pull_section(&q.dbar(&s).specialize(&m.alpha_prime))?;
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_iwasawa;

    fn zb(n: usize, k: usize) -> Poly {
        Poly::var(n, n + k)
    }

    #[test]
    fn dbar_basics() {
        let n = 3;
        let x = ChartForm::dz(n, 0).mul_poly(&zb(n, 0));
        assert_eq!(x.dbar(), ChartForm::dz(n, 0).wedge(&ChartForm::dzb(n, 0)).neg());
        assert!(ChartForm::function(Poly::var(n, 0).mul(&Poly::var(n, 1))).dbar().is_zero());
        let a3 = parse_chart_one_form("-dz3 + z1 dz2", n).unwrap();
        assert!(a3.dbar().is_zero());
        assert_eq!(a3.d(), ChartForm::dz(n, 0).wedge(&ChartForm::dz(n, 1)));
    }

    #[test]
    fn homotopy_right_inverse() {
        let n = 3;
        let e = dbar_homotopy(&ChartForm::dzb(n, 0)).unwrap();
        assert_eq!(e, ChartForm::function(zb(n, 0)));
        let x = ChartForm::dzb(n, 0).mul_poly(&zb(n, 1)).add(&ChartForm::dzb(n, 1).mul_poly(&zb(n, 0)));
        assert_eq!(dbar_homotopy(&x).unwrap().dbar(), x);
        let y = ChartForm::dzb(n, 0).wedge(&ChartForm::dzb(n, 1)).mul_poly(&Poly::var(n, 2));
        assert_eq!(dbar_homotopy(&y).unwrap().dbar(), y);
        let bad = ChartForm::dzb(n, 0).mul_poly(&zb(n, 1));
        assert!(matches!(dbar_homotopy(&bad), Err(Error::NotClosed(_))));
    }

    #[test]
    fn iwasawa_potential() {
        let t = TrivializationData::build(&build_iwasawa()).unwrap();
        let n = 3;
        let q = GaussRat::frac(1, 4).mul_i();
        let x = ChartForm::dz(n, 0).mul_poly(&zb(n, 0)).neg().add(&ChartForm::dz(n, 1).mul_poly(&zb(n, 1)));
        assert_eq!(t.a_form[0], x.scale(&q));
        assert_eq!(t.a_form[3], x.scale(&-q));
        assert!(t.dbar_a_residual().iter().all(|r| r.is_zero()));
        assert!(t.tau_residual().iter().all(|r| r.is_zero()));
        assert!(t.chern_simons_residual().is_zero());
    }

    #[test]
    fn chart_operator_matches_invariant() {
        assert!(invariant_agreement(&build_iwasawa()).unwrap());
    }

    #[test]
    fn trivialization_degree_one() {
        let r = trivialize(&build_iwasawa(), 1).unwrap();
        assert!(r.all_pass(), "{:?}", r.first_nonzero);
    }

    #[test]
    fn non_holomorphic_shift_breaks_transition() {
        let t = TrivializationData::build(&build_iwasawa()).unwrap();
        let n = 3;
        let mut shift = vec![vec![Poly::zero(n); n]; n];
        shift[0][2] = zb(n, 0);
        let bad = t.variant(&vec![ChartForm::zero(n); 4], &shift).unwrap();
        let rep = transition_check("bad", &t, &bad, 1);
        assert!(!rep.holomorphic && rep.cocycle);
        assert!(standard_pairs(&t).unwrap().iter().all(|(name, t2)| {
            let r = transition_check(name, &t, t2, 1);
            r.holomorphic && r.cocycle
        }));
    }

    #[test]
    fn parse_errors() {
        assert!(parse_chart_one_form("z1", 3).is_err());
        assert!(parse_chart_one_form("dz4", 3).is_err());
        let f = parse_chart_one_form("1/2 i zb1^2 dz1 - dzb2", 3).unwrap();
        assert_eq!(f.coeff(1), Poly::monomial(3, vec![0, 0, 0, 2, 0, 0], GaussRat::frac(1, 2).mul_i()));
        assert_eq!(f.coeff(1 << 4), Poly::constant(3, -GaussRat::one()));
    }

    #[test]
    fn chern_simons_of_abelian() {
        let n = 3;
        let a = vec![ChartForm::dz(n, 0).mul_poly(&zb(n, 1))];
        let cs = chern_simons(&a, 1);
        assert_eq!(cs.d(), curvature_of(&a, 1)[0].wedge(&curvature_of(&a, 1)[0]));
    }
}
