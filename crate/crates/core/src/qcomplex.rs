//! The bundle Q = T* ⊕ End(E) ⊕ T over the invariant complex, the operators
//! 𝓕, 𝓣, 𝓡∇⁺, the deformation operator D̄, its adjoint and the Ω-pairings.
//!
//! A Q-valued (0,p)-form is stored leg by leg: `kappa` holds κ_j (the
//! coefficient (0,p)-forms of α^j), `gamma` the r×r matrix of (0,p)-forms,
//! and `w` the W^j. New antiholomorphic legs produced by an operator are
//! wedged on the left.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exterior::{anti_masks, bits, contract, contract_rev, Form, Mask, ValueTag, VForm};
use crate::geometry::{s2g, ConnectionData, HomogeneousModel};
use crate::linalg::{Matrix, SMatrix};
use crate::scalar::{GaussRat, Scalar};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QOptions {
    /// Drop 𝓕, 𝓣 and 𝓡∇⁺, leaving the block-diagonal ∂̄.
    pub diagonal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSection {
    pub p: usize,
    pub kappa: VForm,
    pub gamma: VForm,
    pub w: VForm,
}

impl QSection {
    pub fn zero(n: usize, r: usize, p: usize) -> Self {
        QSection {
            p,
            kappa: VForm::zero(ValueTag::Cotangent, n),
            gamma: VForm::zero(ValueTag::End(r), n),
            w: VForm::zero(ValueTag::Tangent, n),
        }
    }

    pub fn add(&self, o: &QSection) -> QSection {
        QSection {
            p: self.p,
            kappa: self.kappa.add(&o.kappa).expect("same tag"),
            gamma: self.gamma.add(&o.gamma).expect("same tag"),
            w: self.w.add(&o.w).expect("same tag"),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.kappa.is_zero() && self.gamma.is_zero() && self.w.is_zero()
    }

    pub fn specialize(&self, alpha: &GaussRat) -> QSection {
        let sp = |v: &VForm| VForm { tag: v.tag, comps: v.comps.iter().map(|c| c.specialize(alpha)).collect() };
        QSection { p: self.p, kappa: sp(&self.kappa), gamma: sp(&self.gamma), w: sp(&self.w) }
    }
}

/// Ordered basis of invariant Q-valued (0,p)-forms.
#[derive(Clone, Debug)]
pub struct QBasis {
    pub n: usize,
    pub r: usize,
    pub p: usize,
    pub masks: Vec<Mask>,
    /// Trace-free End(E) basis: e_lm for l ≠ m, e_ll − e_rr for l < r.
    pub end_basis: Vec<(usize, usize)>,
}

impl QBasis {
    pub fn new(n: usize, r: usize, p: usize) -> Self {
        let masks = if p <= n { anti_masks(n, p) } else { Vec::new() };
        let mut end_basis = Vec::new();
        for l in 0..r {
            for m in 0..r {
                if !(l == r - 1 && m == r - 1) {
                    end_basis.push((l, m));
                }
            }
        }
        QBasis { n, r, p, masks, end_basis }
    }

    pub fn block_sizes(&self) -> (usize, usize, usize) {
        let k = self.masks.len();
        (self.n * k, self.end_basis.len() * k, self.n * k)
    }

    pub fn dim(&self) -> usize {
        let (a, b, c) = self.block_sizes();
        a + b + c
    }

    pub fn end_matrix(&self, idx: usize) -> Matrix {
        let r = self.r;
        let (l, m) = self.end_basis[idx];
        let mut e = Matrix::zeros(r, r);
        e.set(l, m, GaussRat::one());
        if l == m {
            e.set(r - 1, r - 1, -GaussRat::one());
        }
        e
    }

    fn abar_label(&self, mask: Mask) -> String {
        bits(mask).map(|x| (x - self.n + 1).to_string()).collect::<Vec<_>>().join("")
    }

    /// Labels `e1:a^j:abar{K}`, `e2:E(l,m):abar{K}`, `e3:V^j:abar{K}`.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for j in 0..self.n {
            for &k in &self.masks {
                out.push(format!("e1:a^{}:abar{{{}}}", j + 1, self.abar_label(k)));
            }
        }
        for &(l, m) in &self.end_basis {
            for &k in &self.masks {
                out.push(format!("e2:E({},{}):abar{{{}}}", l + 1, m + 1, self.abar_label(k)));
            }
        }
        for j in 0..self.n {
            for &k in &self.masks {
                out.push(format!("e3:V^{}:abar{{{}}}", j + 1, self.abar_label(k)));
            }
        }
        out
    }

    pub fn section(&self, coords: &[Scalar]) -> QSection {
        let (n, r) = (self.n, self.r);
        let nk = self.masks.len();
        let mut s = QSection::zero(n, r, self.p);
        let mut it = coords.iter();
        for j in 0..n {
            for &k in &self.masks {
                let c = it.next().expect("coordinate count");
                s.kappa.comps[j].add_term(k, c.clone());
            }
        }
        for (idx, &(l, m)) in self.end_basis.iter().enumerate() {
            for (ki, &k) in self.masks.iter().enumerate() {
                let c = &coords[n * nk + idx * nk + ki];
                s.gamma.comps[l * r + m].add_term(k, c.clone());
                if l == m {
                    s.gamma.comps[(r - 1) * r + (r - 1)].add_term(k, -c);
                }
            }
        }
        let off = n * nk + self.end_basis.len() * nk;
        for j in 0..n {
            for (ki, &k) in self.masks.iter().enumerate() {
                s.w.comps[j].add_term(k, coords[off + j * nk + ki].clone());
            }
        }
        s
    }

    pub fn basis_section(&self, i: usize) -> QSection {
        let mut v = vec![Scalar::zero(); self.dim()];
        v[i] = Scalar::one();
        self.section(&v)
    }

    pub fn coords(&self, s: &QSection) -> Vec<Scalar> {
        let r = self.r;
        let mut out = Vec::with_capacity(self.dim());
        for j in 0..self.n {
            for &k in &self.masks {
                out.push(s.kappa.comps[j].coeff(k));
            }
        }
        for &(l, m) in &self.end_basis {
            for &k in &self.masks {
                out.push(s.gamma.comps[l * r + m].coeff(k));
            }
        }
        for j in 0..self.n {
            for &k in &self.masks {
                out.push(s.w.comps[j].coeff(k));
            }
        }
        out
    }
}

fn sc(g: &GaussRat) -> Scalar {
    Scalar::constant(g.clone())
}

/// D̄ and friends for one model.
pub struct QComplex {
    pub model: HomogeneousModel,
    pub opts: QOptions,
    pub n: usize,
    pub r: usize,
    pub chern: ConnectionData,
    pub bismut: ConnectionData,
    /// `rk[k][j] = R_{k̄j}` as an n×n matrix `[l][m]`.
    pub rk: Vec<Vec<Matrix>>,
    /// `tc[l][j][k] = c_{lj k̄}`.
    pub tc: Vec<Vec<Vec<GaussRat>>>,
    /// `fjk[j][k] = F_{jk̄}`.
    pub fjk: Vec<Vec<Matrix>>,
    pub g_t: Matrix,
    pub g_ts: Matrix,
    pub g01: Matrix,
}

impl QComplex {
    pub fn new(model: &HomogeneousModel, opts: QOptions) -> Result<Self> {
        let n = model.n;
        let chern = model.chern_connection()?;
        let bismut = model.bismut();
        let holo = model.bismut_holo_via_torsion(&chern);
        if (0..n).any(|l| holo[l] != bismut.holo_block(l)) {
            return Err(Error::RouteMismatch(format!("Bismut connection of {}", model.name)));
        }
        let curv = model.curvature(&chern);
        let rk = (0..n).map(|k| (0..n).map(|j| curv.r_kbar_j(k, j)).collect()).collect();
        let tc = (0..n)
            .map(|l| (0..n).map(|j| (0..n).map(|k| model.torsion_coeff(l, j, k)).collect()).collect())
            .collect();
        let fjk = (0..n).map(|j| (0..n).map(|k| model.f_coeff(j, k)).collect()).collect();
        let hinv = model.h.inverse()?;
        Ok(QComplex {
            model: model.clone(),
            opts,
            n,
            r: model.rank,
            chern,
            bismut,
            rk,
            tc,
            fjk,
            g_t: model.h.transpose(),
            g_ts: hinv.clone(),
            g01: hinv.transpose(),
        })
    }

    pub fn basis(&self, p: usize) -> QBasis {
        QBasis::new(self.n, self.r, p)
    }

    fn abar(&self, k: usize) -> Form {
        Form::alpha_bar(self.n, k + 1)
    }

    fn zero_t(&self) -> VForm {
        VForm::zero(ValueTag::Tangent, self.n)
    }
    fn zero_ts(&self) -> VForm {
        VForm::zero(ValueTag::Cotangent, self.n)
    }
    fn zero_end(&self) -> VForm {
        VForm::zero(ValueTag::End(self.r), self.n)
    }

    /// ∂̄ on scalar (0,p)-forms.
    pub fn dbar_form(&self, f: &Form) -> Form {
        self.model.dbar(f)
    }

    /// Holomorphic-structure ∂̄ on T-valued forms.
    pub fn dbar_t(&self, w: &VForm) -> VForm {
        let n = self.n;
        let mut out = self.zero_t();
        for b in 0..n {
            let mut acc = self.dbar_form(&w.comps[b]);
            for a in 0..n {
                for c in 0..n {
                    let g = self.chern.gamma[n + c].get(b, a);
                    if !g.is_zero() {
                        acc = acc.add(&self.abar(c).wedge(&w.comps[a]).scale(&sc(g)));
                    }
                }
            }
            out.comps[b] = acc;
        }
        out
    }

    /// Holomorphic-structure ∂̄ on T*-valued forms.
    pub fn dbar_ts(&self, kappa: &VForm) -> VForm {
        let n = self.n;
        let mut out = self.zero_ts();
        for b in 0..n {
            let mut acc = self.dbar_form(&kappa.comps[b]);
            for a in 0..n {
                for c in 0..n {
                    let g = self.chern.gamma[n + c].get(a, b);
                    if !g.is_zero() {
                        acc = acc.sub(&self.abar(c).wedge(&kappa.comps[a]).scale(&sc(g)));
                    }
                }
            }
            out.comps[b] = acc;
        }
        out
    }

    /// ∂̄_E, coefficient-wise in the gauge frame.
    pub fn dbar_end(&self, gamma: &VForm) -> VForm {
        VForm { tag: gamma.tag, comps: gamma.comps.iter().map(|c| self.dbar_form(c)).collect() }
    }

    /// 𝓕γ: `(𝓕γ)_j = Σ_k ᾱ^k ∧ tr(F_{jk̄} γ)`.
    pub fn f_gamma(&self, gamma: &VForm) -> VForm {
        let (n, r) = (self.n, self.r);
        let mut out = self.zero_ts();
        for j in 0..n {
            for k in 0..n {
                let f = &self.fjk[j][k];
                let mut tr = Form::zero(n);
                for a in 0..r {
                    for b in 0..r {
                        let c = f.get(a, b);
                        if !c.is_zero() {
                            tr = tr.add(&gamma.comps[b * r + a].scale(&sc(c)));
                        }
                    }
                }
                out.comps[j] = out.comps[j].add(&self.abar(k).wedge(&tr));
            }
        }
        out
    }

    /// 𝓕W: `Σ_{j,k} F_{jk̄} ᾱ^k ∧ W^j`.
    pub fn f_w(&self, w: &VForm) -> VForm {
        let (n, r) = (self.n, self.r);
        let mut out = self.zero_end();
        for j in 0..n {
            for k in 0..n {
                let f = &self.fjk[j][k];
                if f.is_zero() {
                    continue;
                }
                let leg = self.abar(k).wedge(&w.comps[j]);
                for a in 0..r {
                    for b in 0..r {
                        let c = f.get(a, b);
                        if !c.is_zero() {
                            out.comps[a * r + b] = out.comps[a * r + b].add(&leg.scale(&sc(c)));
                        }
                    }
                }
            }
        }
        out
    }

    /// 𝓣W: `(𝓣W)_j = Σ_{l,k} c_{lj k̄} ᾱ^k ∧ W^l`.
    pub fn t_w(&self, w: &VForm) -> VForm {
        let n = self.n;
        let mut out = self.zero_ts();
        for j in 0..n {
            for l in 0..n {
                for k in 0..n {
                    let c = &self.tc[l][j][k];
                    if !c.is_zero() {
                        out.comps[j] = out.comps[j].add(&self.abar(k).wedge(&w.comps[l]).scale(&sc(c)));
                    }
                }
            }
        }
        out
    }

    /// Covariant derivative of a scalar form along E_x (Chern on every leg).
    pub fn nabla_form(&self, x: usize, f: &Form) -> Form {
        let n = self.n;
        let gam = &self.chern.gamma[x];
        let mut out = Form::zero(n);
        for (mask, c) in f.terms() {
            let gens: Vec<usize> = bits(mask).collect();
            for (pos, &z) in gens.iter().enumerate() {
                let left: Mask = gens[..pos].iter().fold(0, |m, &g| m | (1 << g));
                let right: Mask = gens[pos + 1..].iter().fold(0, |m, &g| m | (1 << g));
                let mut dz = Form::zero(n);
                for y in 0..2 * n {
                    let g = gam.get(z, y);
                    if !g.is_zero() {
                        dz.add_term(1 << y, sc(&-g.clone()));
                    }
                }
                let t = Form::monomial(n, left, c.clone()).wedge(&dz).wedge(&Form::monomial(n, right, Scalar::one()));
                out = out.add(&t);
            }
        }
        out
    }

    /// ∇⁺ along E_x on T-valued forms: Bismut on the vector leg, Chern on forms.
    pub fn nabla_plus(&self, x: usize, w: &VForm) -> VForm {
        let n = self.n;
        let gp = &self.bismut.gamma[x];
        let mut out = self.zero_t();
        for m in 0..n {
            let mut acc = self.nabla_form(x, &w.comps[m]);
            for a in 0..n {
                let g = gp.get(m, a);
                if !g.is_zero() {
                    acc = acc.add(&w.comps[a].scale(&sc(g)));
                }
            }
            out.comps[m] = acc;
        }
        out
    }

    /// 𝓡∇⁺W: `(𝓡∇⁺W)_j = Σ R_{k̄j}{}^l{}_m ᾱ^k ∧ (∇⁺_l W)^m`.
    pub fn r_nabla_plus(&self, w: &VForm) -> VForm {
        let n = self.n;
        let mut out = self.zero_ts();
        let nw: Vec<VForm> = (0..n).map(|l| self.nabla_plus(l, w)).collect();
        for j in 0..n {
            for k in 0..n {
                let rm = &self.rk[k][j];
                if rm.is_zero() {
                    continue;
                }
                let mut inner = Form::zero(n);
                for l in 0..n {
                    for m in 0..n {
                        let c = rm.get(l, m);
                        if !c.is_zero() {
                            inner = inner.add(&nw[l].comps[m].scale(&sc(c)));
                        }
                    }
                }
                out.comps[j] = out.comps[j].add(&self.abar(k).wedge(&inner));
            }
        }
        out
    }

    /// 𝓔W = 𝓣W + a 𝓡∇⁺W.
    pub fn e_op(&self, w: &VForm) -> VForm {
        let rn = self.r_nabla_plus(w);
        let rn = VForm { tag: rn.tag, comps: rn.comps.iter().map(|c| c.scale(&Scalar::a())).collect() };
        self.t_w(w).add(&rn).expect("same tag")
    }

    fn scale_a(v: &VForm) -> VForm {
        VForm { tag: v.tag, comps: v.comps.iter().map(|c| c.scale(&Scalar::a())).collect() }
    }

    pub fn dbar(&self, s: &QSection) -> QSection {
        let mut kappa = self.dbar_ts(&s.kappa);
        let mut gamma = self.dbar_end(&s.gamma);
        if !self.opts.diagonal {
            kappa = kappa.add(&Self::scale_a(&self.f_gamma(&s.gamma))).unwrap().add(&self.e_op(&s.w)).unwrap();
            gamma = gamma.add(&self.f_w(&s.w)).unwrap();
        }
        QSection { p: s.p + 1, kappa, gamma, w: self.dbar_t(&s.w) }
    }

    /// D̄₁ on Q₁ = End(E) ⊕ T (κ ignored).
    pub fn d1(&self, s: &QSection) -> QSection {
        let mut out = QSection::zero(self.n, self.r, s.p + 1);
        out.gamma = self.dbar_end(&s.gamma).add(&self.f_w(&s.w)).unwrap();
        out.w = self.dbar_t(&s.w);
        out
    }

    /// D̄₂ on Q₁* = T* ⊕ End(E) (W ignored).
    pub fn d2(&self, s: &QSection) -> QSection {
        let mut out = QSection::zero(self.n, self.r, s.p + 1);
        out.kappa = self.dbar_ts(&s.kappa).add(&Self::scale_a(&self.f_gamma(&s.gamma))).unwrap();
        out.gamma = self.dbar_end(&s.gamma);
        out
    }

    /// ℋ(γ, W) = a𝓕γ + 𝓔W, landing in the κ leg.
    pub fn h_op(&self, s: &QSection) -> QSection {
        let mut out = QSection::zero(self.n, self.r, s.p + 1);
        out.kappa = Self::scale_a(&self.f_gamma(&s.gamma)).add(&self.e_op(&s.w)).unwrap();
        out
    }

    /// ℋ*(W) = (𝓔W, 𝓕W).
    pub fn h_star(&self, s: &QSection) -> QSection {
        let mut out = QSection::zero(self.n, self.r, s.p + 1);
        out.kappa = self.e_op(&s.w);
        out.gamma = self.f_w(&s.w);
        out
    }

    pub fn operator_matrix(&self, p: usize, f: impl Fn(&QSection) -> QSection) -> SMatrix {
        let src = self.basis(p);
        let dst = self.basis(p + 1);
        let mut m = SMatrix::zeros(dst.dim(), src.dim());
        for i in 0..src.dim() {
            let img = f(&src.basis_section(i));
            for (row, c) in dst.coords(&img).into_iter().enumerate() {
                if !c.is_zero() {
                    m.set(row, i, c);
                }
            }
        }
        m
    }

    /// D̄ : Q^{0,p} → Q^{0,p+1}, symbolic in a.
    pub fn dbar_matrix(&self, p: usize) -> SMatrix {
        self.operator_matrix(p, |s| self.dbar(s))
    }

    /// Block-diagonal ∂̄ part only.
    pub fn dbar_diag_matrix(&self, p: usize) -> SMatrix {
        self.operator_matrix(p, |s| QSection {
            p: s.p + 1,
            kappa: self.dbar_ts(&s.kappa),
            gamma: self.dbar_end(&s.gamma),
            w: self.dbar_t(&s.w),
        })
    }

    /// Gram matrix of the invariant basis at degree p: `⟨x, y⟩ = x† G y`.
    pub fn gram(&self, p: usize) -> Matrix {
        let b = self.basis(p);
        let nk = b.masks.len();
        let mut gl = Matrix::zeros(nk, nk);
        for (i, &k1) in b.masks.iter().enumerate() {
            for (j, &k2) in b.masks.iter().enumerate() {
                let r1: Vec<usize> = bits(k1).map(|x| x - self.n).collect();
                let r2: Vec<usize> = bits(k2).map(|x| x - self.n).collect();
                let mut sub = Matrix::zeros(r1.len(), r2.len());
                for (a, &x) in r1.iter().enumerate() {
                    for (c, &y) in r2.iter().enumerate() {
                        sub.set(a, c, self.g01.get(x, y).clone());
                    }
                }
                gl.set(i, j, if r1.is_empty() { GaussRat::one() } else { sub.det() });
            }
        }
        let ne = b.end_basis.len();
        let mut ge = Matrix::zeros(ne, ne);
        for i in 0..ne {
            let ei = b.end_matrix(i).dagger();
            for j in 0..ne {
                let prod = ei.mul(&b.end_matrix(j));
                let mut tr = GaussRat::zero();
                for d in 0..self.r {
                    tr += prod.get(d, d);
                }
                ge.set(i, j, tr);
            }
        }
        Matrix::block_diag(&[self.g_ts.kron(&gl), ge.kron(&gl), self.g_t.kron(&gl)])
    }

    /// D̄* : Q^{0,p} → Q^{0,p−1} as the Gram adjoint `G_{p−1}⁻¹ D̄_{p−1}† G_p`.
    pub fn dstar_gram(&self, p: usize) -> Result<SMatrix> {
        if p == 0 {
            return Err(Error::Degree("D̄* needs p ≥ 1".into()));
        }
        let d = self.dbar_matrix(p - 1);
        let ginv = SMatrix::from_matrix(&self.gram(p - 1).inverse()?);
        let g = SMatrix::from_matrix(&self.gram(p));
        Ok(ginv.mul(&d.dagger()).mul(&g))
    }

    /// Adjoint of ᾱ^k∧ on scalar forms: `Σ_m g01[k][m] ι_{ᾱ^m}`.
    pub fn wedge_adjoint(&self, k: usize, f: &Form) -> Form {
        let n = self.n;
        let mut out = Form::zero(n);
        for m in 0..n {
            let g = self.g01.get(k, m);
            if !g.is_zero() {
                out = out.add(&f.interior(n + m).scale(&sc(g)));
            }
        }
        out
    }

    fn wedge_adjoint_v(&self, k: usize, v: &VForm) -> VForm {
        VForm { tag: v.tag, comps: v.comps.iter().map(|c| self.wedge_adjoint(k, c)).collect() }
    }

    /// 𝓕*κ: Hermitian transpose on End, index raised with g.
    pub fn f_star_kappa(&self, kappa: &VForm) -> VForm {
        let (n, r) = (self.n, self.r);
        let mut out = self.zero_end();
        for k in 0..n {
            let kk = self.wedge_adjoint_v(k, kappa);
            for j in 0..n {
                let fd = self.fjk[j][k].dagger();
                if fd.is_zero() {
                    continue;
                }
                for jp in 0..n {
                    let g = self.g_ts.get(j, jp);
                    if g.is_zero() {
                        continue;
                    }
                    for a in 0..r {
                        for b in 0..r {
                            let c = g * fd.get(a, b);
                            if !c.is_zero() {
                                out.comps[a * r + b] = out.comps[a * r + b].add(&kk.comps[jp].scale(&sc(&c)));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// 𝓕*γ: `W'^{j'} = Σ_j (G_T⁻¹)[j'][j] Σ_k tr(F_{jk̄}† (ᾱ^k∧)*γ)`.
    pub fn f_star_gamma(&self, gamma: &VForm) -> VForm {
        let (n, r) = (self.n, self.r);
        let gti = self.g_t.inverse().expect("positive metric");
        let mut out = self.zero_t();
        for k in 0..n {
            let gk = self.wedge_adjoint_v(k, gamma);
            for j in 0..n {
                let fd = self.fjk[j][k].dagger();
                if fd.is_zero() {
                    continue;
                }
                let mut tr = Form::zero(n);
                for a in 0..r {
                    for b in 0..r {
                        let c = fd.get(a, b);
                        if !c.is_zero() {
                            tr = tr.add(&gk.comps[b * r + a].scale(&sc(c)));
                        }
                    }
                }
                for jp in 0..n {
                    let g = gti.get(jp, j);
                    if !g.is_zero() {
                        out.comps[jp] = out.comps[jp].add(&tr.scale(&sc(g)));
                    }
                }
            }
        }
        out
    }

    /// Fiber adjoint `G_A⁻¹ M† G_B` of a map with matrix M from A to B.
    fn fiber_adjoint(m: &Matrix, ga: &Matrix, gb: &Matrix) -> Matrix {
        ga.inverse().expect("positive Gram").mul(&m.dagger()).mul(gb)
    }

    fn apply_matrix(&self, m: &Matrix, v: &[Form]) -> Vec<Form> {
        (0..m.rows)
            .map(|i| {
                let mut acc = Form::zero(self.n);
                for (j, f) in v.iter().enumerate() {
                    let c = m.get(i, j);
                    if !c.is_zero() {
                        acc = acc.add(&f.scale(&sc(c)));
                    }
                }
                acc
            })
            .collect()
    }

    /// 𝓣*κ, with `M_k[j][l] = c_{lj k̄}` raised through the metric.
    pub fn t_star(&self, kappa: &VForm) -> VForm {
        let n = self.n;
        let mut out = self.zero_t();
        for k in 0..n {
            let mut mk = Matrix::zeros(n, n);
            for j in 0..n {
                for l in 0..n {
                    mk.set(j, l, self.tc[l][j][k].clone());
                }
            }
            if mk.is_zero() {
                continue;
            }
            let adj = Self::fiber_adjoint(&mk, &self.g_t, &self.g_ts);
            let kk = self.wedge_adjoint_v(k, kappa);
            let img = self.apply_matrix(&adj, &kk.comps);
            for (j, f) in img.into_iter().enumerate() {
                out.comps[j] = out.comps[j].add(&f);
            }
        }
        out
    }

    /// (∇⁺)*𝓡*κ. 𝓡* is the pointwise adjoint of the curvature contraction;
    /// (∇⁺)* moves the derivative by parts, `(∇_{V_l})* = −∇_{V̄_l}`, which is
    /// exact on invariant sections because ∇⁺ is metric.
    pub fn r_nabla_star(&self, kappa: &VForm) -> VForm {
        let n = self.n;
        // T⊗T* value space indexed by (m, l) ↦ m*n + l.
        let g_tts = self.g_t.kron(&self.g_ts);
        let mut y: Vec<Form> = vec![Form::zero(n); n * n];
        for k in 0..n {
            let mut lk = Matrix::zeros(n, n * n);
            for j in 0..n {
                for l in 0..n {
                    for m in 0..n {
                        lk.set(j, m * n + l, self.rk[k][j].get(l, m).clone());
                    }
                }
            }
            if lk.is_zero() {
                continue;
            }
            let adj = Self::fiber_adjoint(&lk, &g_tts, &self.g_ts);
            let kk = self.wedge_adjoint_v(k, kappa);
            for (i, f) in self.apply_matrix(&adj, &kk.comps).into_iter().enumerate() {
                y[i] = y[i].add(&f);
            }
        }
        let mut out = self.zero_t();
        for l in 0..n {
            for lp in 0..n {
                let g = self.g_ts.get(l, lp);
                if g.is_zero() {
                    continue;
                }
                let ylp = VForm { tag: ValueTag::Tangent, comps: (0..n).map(|m| y[m * n + lp].clone()).collect() };
                let d = self.nabla_plus(n + l, &ylp);
                for m in 0..n {
                    out.comps[m] = out.comps[m].sub(&d.comps[m].scale(&sc(g)));
                }
            }
        }
        out
    }

    /// Adjoint of the block-diagonal ∂̄ (defined through the Gram matrices).
    fn dbar_star_diag(&self, p: usize) -> Result<SMatrix> {
        let d = self.dbar_diag_matrix(p - 1);
        let ginv = SMatrix::from_matrix(&self.gram(p - 1).inverse()?);
        let g = SMatrix::from_matrix(&self.gram(p));
        Ok(ginv.mul(&d.dagger()).mul(&g))
    }

    /// D̄* assembled from the closed formulas for 𝓕*, 𝓣*, (∇⁺)*𝓡*.
    pub fn dstar_formula(&self, p: usize) -> Result<SMatrix> {
        if p == 0 {
            return Err(Error::Degree("D̄* needs p ≥ 1".into()));
        }
        let mut m = self.dbar_star_diag(p)?;
        if self.opts.diagonal {
            return Ok(m);
        }
        let src = self.basis(p);
        let dst = self.basis(p - 1);
        for i in 0..src.dim() {
            let s = src.basis_section(i);
            let mut t = QSection::zero(self.n, self.r, p - 1);
            t.gamma = Self::scale_a(&self.f_star_kappa(&s.kappa));
            t.w = self
                .t_star(&s.kappa)
                .add(&Self::scale_a(&self.r_nabla_star(&s.kappa)))
                .unwrap()
                .add(&self.f_star_gamma(&s.gamma))
                .unwrap();
            for (row, c) in dst.coords(&t).into_iter().enumerate() {
                if !c.is_zero() {
                    let v = m.get(row, i) + &c;
                    m.set(row, i, v);
                }
            }
        }
        Ok(m)
    }

    /// `⟨D̄x, y⟩ − ⟨x, D̄*y⟩` over all basis pairs, as a matrix.
    pub fn adjointness_residual(&self, p: usize, alpha: &GaussRat) -> Result<Matrix> {
        let d = self.dbar_matrix(p - 1).specialize(alpha);
        let ds = self.dstar_formula(p)?.specialize(alpha);
        let lhs = d.dagger().mul(&self.gram(p));
        let rhs = self.gram(p - 1).mul(&ds);
        Ok(lhs.sub(&rhs))
    }

    /// Pointwise pairing `⟨(β, V), (κ, γ)⟩ = V⌟κ − a tr(β∧γ)`.
    pub fn q1_pairing(&self, u: &QSection, v: &QSection) -> Form {
        let r = self.r;
        let mut tr = Form::zero(self.n);
        for i in 0..r {
            for j in 0..r {
                tr = tr.add(&u.gamma.comps[i * r + j].wedge(&v.gamma.comps[j * r + i]));
            }
        }
        contract(&u.w, &v.kappa).expect("tags").sub(&tr.scale(&Scalar::a()))
    }

    /// `∫ f ∧ Ω` for a (0,n)-form, normalized so the invariant volume has integral 1.
    pub fn integrate(&self, f: &Form) -> Scalar {
        f.wedge(&self.model.big_omega()).top_coeff()
    }

    /// Both sides of `(u, ℋ*_p w) = (−1)^{n−p} (ℋ_{n−p−1} u, w)`.
    pub fn duality_sides(&self, u: &QSection, w: &QSection) -> (Scalar, Scalar) {
        let n = self.n;
        let p = w.p;
        let lhs = self.integrate(&self.q1_pairing(u, &self.h_star(w)));
        let hu = self.h_op(u);
        let mut rhs = self.integrate(&contract_rev(&hu.kappa, &w.w).expect("tags"));
        if (n - p) % 2 == 1 {
            rhs = -rhs;
        }
        (lhs, rhs)
    }

    /// Residual of `∂̄(∇⁺_l W) − R_j{}^k{}_l W^j − ∇⁺_l ∂̄W` for each l; ∂̄ on
    /// ∇⁺W acts on the T*⊗T-valued form including its α^l leg.
    pub fn commute_residual(&self, w: &VForm) -> Vec<VForm> {
        let n = self.n;
        let nw: Vec<VForm> = (0..n).map(|l| self.nabla_plus(l, w)).collect();
        let dw = self.dbar_t(w);
        (0..n)
            .map(|l| {
                let mut acc = self.dbar_t(&nw[l]);
                for lp in 0..n {
                    for c in 0..n {
                        let g = self.chern.gamma[n + c].get(lp, l);
                        if !g.is_zero() {
                            let t = nw[lp].prewedge(&self.abar(c));
                            acc = acc.add(&scale_v(&t, &sc(&-g.clone()))).unwrap();
                        }
                    }
                }
                let mut rw = self.zero_t();
                for k in 0..n {
                    for q in 0..n {
                        for j in 0..n {
                            let c = self.rk[q][j].get(k, l);
                            if !c.is_zero() {
                                rw.comps[k] = rw.comps[k].add(&self.abar(q).wedge(&w.comps[j]).scale(&sc(c)));
                            }
                        }
                    }
                }
                let rhs = rw.add(&self.nabla_plus(l, &dw)).unwrap();
                acc.add(&scale_v(&rhs, &-Scalar::one())).unwrap()
            })
            .collect()
    }

    /// `R_{k̄q}{}^m{}_ℓ − R_{k̄ℓ}{}^m{}_q − (∂̄T)_{k̄}{}^m{}_{ℓq}` over all index tuples,
    /// with `T^m{}_{ℓq} = Σ_p h^{mp̄} c_{ℓq p̄}`.
    pub fn chern_symmetry_residual(&self) -> Vec<GaussRat> {
        let n = self.n;
        let t = self.model.torsion_raised();
        let gam = |k: usize, a: usize, b: usize| self.chern.gamma[n + k].get(a, b).clone();
        let mut out = Vec::new();
        for k in 0..n {
            for m in 0..n {
                for l in 0..n {
                    for q in 0..n {
                        let mut dt = GaussRat::zero();
                        for b in 0..n {
                            dt += &(gam(k, m, b) * t[b][l][q].clone());
                            dt -= &(gam(k, b, l) * t[m][b][q].clone());
                            dt -= &(gam(k, b, q) * t[m][l][b].clone());
                        }
                        let v = &(self.rk[k][q].get(m, l) - self.rk[k][l].get(m, q)) - &dt;
                        out.push(v);
                    }
                }
            }
        }
        out
    }
}

pub fn scale_v(v: &VForm, s: &Scalar) -> VForm {
    VForm { tag: v.tag, comps: v.comps.iter().map(|c| c.scale(s)).collect() }
}

/// Symbol `σ(ξ)` of D̄ at degree p: `ξ^{0,1}∧` on every block plus
/// `a R_{k̄j}{}^l{}_m ξ_l ᾱ^k ∧ W^m` in the top-right entry.
pub fn symbol_dbar(q: &QComplex, p: usize, xi: &[GaussRat], alpha: &GaussRat) -> Result<Matrix> {
    let n = q.n;
    if xi.len() != n || xi.iter().all(|x| x.is_zero()) {
        return Err(Error::Degree("ξ must be a nonzero covector with n components".into()));
    }
    let mut x01 = Form::zero(n);
    for (k, x) in xi.iter().enumerate() {
        x01.add_term(1 << (n + k), sc(&x.conj()));
    }
    let m = q.operator_matrix(p, |s| {
        let mut kappa = s.kappa.prewedge(&x01);
        if !q.opts.diagonal {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        for mm in 0..n {
                            let c = q.rk[k][j].get(l, mm) * &xi[l];
                            if !c.is_zero() {
                                let t = q.abar(k).wedge(&s.w.comps[mm]).scale(&(Scalar::a() * sc(&c)));
                                kappa.comps[j] = kappa.comps[j].add(&t);
                            }
                        }
                    }
                }
            }
        }
        QSection { p: s.p + 1, kappa, gamma: s.gamma.prewedge(&x01), w: s.w.prewedge(&x01) }
    });
    Ok(m.specialize(alpha))
}

/// Stacked symbol `[σ_D̄(ξ); σ_D̄*(ξ)]` on Q^{0,p}, with σ_D̄* the Gram adjoint.
pub fn symbol_stack(q: &QComplex, p: usize, xi: &[GaussRat], alpha: &GaussRat) -> Result<Matrix> {
    let top = symbol_dbar(q, p, xi, alpha)?;
    if p == 0 {
        return Ok(top);
    }
    let prev = symbol_dbar(q, p - 1, xi, alpha)?;
    let adj = q.gram(p - 1).inverse()?.mul(&prev.dagger()).mul(&q.gram(p));
    Ok(top.vstack(&adj))
}

/// Scalar value of a constant coefficient.
pub fn scalar_value(s: &Scalar) -> GaussRat {
    s2g(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::*;

    #[test]
    fn basis_round_trip() {
        let b = QBasis::new(3, 2, 1);
        assert_eq!(b.dim(), 27);
        for i in 0..b.dim() {
            let s = b.basis_section(i);
            let mut e = vec![Scalar::zero(); b.dim()];
            e[i] = Scalar::one();
            assert_eq!(b.coords(&s), e);
        }
        assert_eq!(b.labels()[0], "e1:a^1:abar{1}");
        assert_eq!(b.labels()[9], "e2:E(1,1):abar{1}");
    }

    #[test]
    fn iwasawa_script_f_and_t() {
        let q = QComplex::new(&build_iwasawa(), QOptions::default()).unwrap();
        let mut w = VForm::zero(ValueTag::Tangent, 3);
        w.comps[0] = Form::one(3);
        let fw = q.f_w(&w);
        let ab1 = Form::alpha_bar(3, 1);
        assert_eq!(fw.comps[0], ab1.scale(&"1/4 i".parse().unwrap()));
        assert_eq!(fw.comps[3], ab1.scale(&"-1/4 i".parse().unwrap()));
        let mut w3 = VForm::zero(ValueTag::Tangent, 3);
        w3.comps[2] = Form::one(3);
        assert!(q.f_w(&w3).is_zero());
        // 𝓣(V₁⊗ᾱ¹) = −½ α²⊗ᾱ³∧ᾱ¹
        let mut w1 = VForm::zero(ValueTag::Tangent, 3);
        w1.comps[0] = ab1.clone();
        let tw = q.t_w(&w1);
        let expect = Form::alpha_bar(3, 3).wedge(&ab1).scale(&Scalar::frac(-1, 2));
        assert_eq!(tw.comps[1], expect);
        assert!(tw.comps[0].is_zero() && tw.comps[2].is_zero());
        assert!(q.t_w(&w3.prewedge(&ab1)).is_zero());
    }

    #[test]
    fn formula_adjoint_equals_gram_adjoint() {
        for m in builtins() {
            let q = QComplex::new(&m, QOptions::default()).unwrap();
            for p in 1..=3 {
                assert_eq!(q.dstar_formula(p).unwrap(), q.dstar_gram(p).unwrap(), "{} p = {p}", m.name);
            }
        }
    }

    #[test]
    fn dbar_squared_vanishes_on_anomaly_locus() {
        for m in builtins() {
            let q = QComplex::new(&m, QOptions::default()).unwrap();
            for p in 0..2 {
                let sq = q.dbar_matrix(p + 1).mul(&q.dbar_matrix(p));
                assert!(sq.specialize(&m.alpha_prime).is_zero(), "{}", m.name);
            }
        }
    }
}
