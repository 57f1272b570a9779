//! Homogeneous complex models: structure equations, connections,
//! curvature, torsion, and the heterotic system residuals.
//!
//! Frame conventions. `E_0..E_{2n-1}` is the frame dual to
//! `α^1..α^n, ᾱ^1..ᾱ^n`, so `E_a = V_{a+1}` and `E_{n+a} = V̄_{a+1}`.
//! A connection stores one `2n×2n` matrix per direction with
//! `∇_{E_x} E_y = Σ_w Γ(x)[w][y] E_w`. The metric is `h_{ab̄} = H[a][b]`,
//! `ω = i Σ H[a][b] α^a∧ᾱ^b` and `g(V_a, V̄_b) = H[a][b]`.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exterior::{bits, Form, Mask, ValueTag, VForm};
use crate::linalg::Matrix;
use crate::scalar::{GaussRat, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousModel {
    pub name: String,
    pub n: usize,
    /// dα^a for a = 1..n.
    pub d_coframe: Vec<Form>,
    pub h: Matrix,
    pub omega_coeff: GaussRat,
    pub rank: usize,
    /// End(E)-valued (1,1)-form, row-major r×r.
    pub f: VForm,
    pub alpha_prime: GaussRat,
    pub chart: Option<ChartSpec>,
}

/// Polynomial chart: pull-back of each α^a as text such as `-dz3 + z1 dz2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartSpec {
    pub coframe_pullback: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConnectionKind {
    LeviCivita,
    Chern,
    Bismut,
}

/// Invariant connection on the complexified tangent bundle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionData {
    pub kind: ConnectionKind,
    pub n: usize,
    pub gamma: Vec<Matrix>,
}

impl ConnectionData {
    /// Γ(x) restricted to T^{1,0}: `∇_{E_x} V_b = Σ_c [c][b] V_c`.
    pub fn holo_block(&self, x: usize) -> Matrix {
        let n = self.n;
        let mut m = Matrix::zeros(n, n);
        for c in 0..n {
            for b in 0..n {
                m.set(c, b, self.gamma[x].get(c, b).clone());
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.gamma.iter().all(|m| m.is_zero())
    }

    /// Whether the connection preserves T^{1,0} and T^{0,1}.
    pub fn preserves_type(&self) -> bool {
        let n = self.n;
        self.gamma.iter().all(|m| {
            (0..n).all(|i| (n..2 * n).all(|j| m.get(i, j).is_zero() && m.get(j, i).is_zero()))
        })
    }
}

/// Curvature 2-form of an invariant connection: `R(E_x, E_y)` for x < y.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curvature {
    pub n: usize,
    values: Vec<Vec<Matrix>>,
}

impl Curvature {
    pub fn at(&self, x: usize, y: usize) -> Matrix {
        if x == y {
            return Matrix::zeros(2 * self.n, 2 * self.n);
        }
        if x < y {
            self.values[x][y].clone()
        } else {
            self.values[y][x].scale(&GaussRat::from(-1))
        }
    }

    /// `R_{k̄j}{}^l{}_m = R(V̄_k, V_j)^l{}_m` (0-based k, j), an n×n matrix.
    pub fn r_kbar_j(&self, k: usize, j: usize) -> Matrix {
        let n = self.n;
        let full = self.at(n + k, j);
        let mut m = Matrix::zeros(n, n);
        for l in 0..n {
            for mm in 0..n {
                m.set(l, mm, full.get(l, mm).clone());
            }
        }
        m
    }

    /// End(T^{1,0})-valued 2-form `Σ_{x<y} R(E_x,E_y)|_{T^{1,0}} θ^x∧θ^y`.
    pub fn to_vform(&self) -> VForm {
        let n = self.n;
        let mut out = VForm::zero(ValueTag::End(n), n);
        for x in 0..2 * n {
            for y in x + 1..2 * n {
                let m = &self.values[x][y];
                for l in 0..n {
                    for mm in 0..n {
                        let c = m.get(l, mm);
                        if !c.is_zero() {
                            out.comps[l * n + mm].add_term((1 << x) | (1 << y), Scalar::constant(c.clone()));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(|m| m.is_zero())
    }

    /// Whether the T^{1,0}-block has only (1,1) components.
    pub fn is_type_11(&self) -> bool {
        let n = self.n;
        (0..2 * n).all(|x| {
            (x + 1..2 * n).all(|y| {
                let mixed = (x < n) != (y < n);
                mixed || (0..n).all(|l| (0..n).all(|m| self.values[x][y].get(l, m).is_zero()))
            })
        })
    }
}

/// Residuals of the four heterotic equations.
#[derive(Clone, Debug)]
pub struct SystemReport {
    pub alpha_prime: GaussRat,
    pub f1: Form,
    /// F2 residual with α′ kept symbolic.
    pub f2_symbolic: Form,
    pub f2: Form,
    pub d1: VForm,
    /// d(ω∧ω); D2 with constant |Ω|_ω.
    pub d2: Form,
    pub omega_norm_sq: GaussRat,
}

impl SystemReport {
    pub fn f1_pass(&self) -> bool {
        self.f1.is_zero()
    }
    pub fn f2_pass(&self) -> bool {
        self.f2.is_zero()
    }
    pub fn d1_pass(&self) -> bool {
        self.d1.is_zero()
    }
    pub fn d2_pass(&self) -> bool {
        self.d2.is_zero()
    }
    pub fn all_pass(&self) -> bool {
        self.f1_pass() && self.f2_pass() && self.d1_pass() && self.d2_pass()
    }
    /// Both sides of the anomaly vanish for every α′.
    pub fn alpha_arbitrary(&self) -> bool {
        self.f2_symbolic.is_zero()
    }
}

pub(crate) fn g2s(g: &GaussRat) -> Scalar {
    Scalar::constant(g.clone())
}

pub(crate) fn s2g(s: &Scalar) -> GaussRat {
    assert!(s.is_constant(), "geometric coefficient depends on a");
    s.constant_term()
}

/// Levi-Civita connection of a constant metric `g` on a Lie algebra with
/// brackets `[E_x,E_y] = Σ_z br[x][y][z] E_z` (Koszul formula).
pub fn koszul(brackets: &[Vec<Vec<GaussRat>>], g: &Matrix) -> Vec<Matrix> {
    let d = g.rows;
    let ginv = g.inverse().expect("nondegenerate metric");
    let gb = |x: usize, y: usize, z: usize| -> GaussRat {
        let mut acc = GaussRat::zero();
        for (w, c) in brackets[x][y].iter().enumerate() {
            if !c.is_zero() {
                acc += &(c * g.get(w, z));
            }
        }
        acc
    };
    let half = GaussRat::frac(1, 2);
    (0..d)
        .map(|x| {
            let mut m = Matrix::zeros(d, d);
            for y in 0..d {
                // K_z = g(∇_x E_y, E_z)
                let k: Vec<GaussRat> = (0..d)
                    .map(|z| &(&(&gb(x, y, z) - &gb(y, z, x)) + &gb(z, x, y)) * &half)
                    .collect();
                for w in 0..d {
                    let mut acc = GaussRat::zero();
                    for (z, kz) in k.iter().enumerate() {
                        acc += &(kz * ginv.get(z, w));
                    }
                    m.set(w, y, acc);
                }
            }
            m
        })
        .collect()
}

impl HomogeneousModel {
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// dθ^x for generator x of the 2n-frame.
    pub fn d_generator(&self, x: usize) -> Form {
        if x < self.n {
            self.d_coframe[x].clone()
        } else {
            self.d_coframe[x - self.n].conjugate()
        }
    }

    fn d_mask(&self, mask: Mask) -> Form {
        let n = self.n;
        let mut out = Form::zero(n);
        let gens: Vec<usize> = bits(mask).collect();
        for (pos, &x) in gens.iter().enumerate() {
            let left: Mask = gens[..pos].iter().fold(0, |m, &g| m | (1 << g));
            let right: Mask = gens[pos + 1..].iter().fold(0, |m, &g| m | (1 << g));
            let term = Form::monomial(n, left, Scalar::one())
                .wedge(&self.d_generator(x))
                .wedge(&Form::monomial(n, right, Scalar::one()));
            out = if pos % 2 == 0 { out.add(&term) } else { out.sub(&term) };
        }
        out
    }

    /// Exterior derivative of an invariant form (constants are closed).
    pub fn d(&self, f: &Form) -> Form {
        let mut out = Form::zero(self.n);
        for (m, c) in f.terms() {
            out = out.add(&self.d_mask(m).scale(c));
        }
        out
    }

    /// (∂x, ∂̄x), applied bidegree by bidegree.
    pub fn dolbeault_split(&self, f: &Form) -> Result<(Form, Form)> {
        let mut del = Form::zero(self.n);
        let mut dbar = Form::zero(self.n);
        for (p, q) in f.bidegrees() {
            let dx = self.d(&f.part(p, q));
            for (pp, qq) in dx.bidegrees() {
                if (pp, qq) == (p + 1, q) {
                    del = del.add(&dx.part(pp, qq));
                } else if (pp, qq) == (p, q + 1) {
                    dbar = dbar.add(&dx.part(pp, qq));
                } else {
                    return Err(Error::InvalidModel(vec![format!(
                        "non-integrable: d of a ({p},{q})-form has a ({pp},{qq}) component"
                    )]));
                }
            }
        }
        Ok((del, dbar))
    }

    pub fn del(&self, f: &Form) -> Form {
        self.dolbeault_split(f).expect("validated model").0
    }

    pub fn dbar(&self, f: &Form) -> Form {
        self.dolbeault_split(f).expect("validated model").1
    }

    /// d^c = i(∂ − ∂̄); on Calabi–Eckmann d^cω = e123 + e456.
    pub fn dc(&self, f: &Form) -> Form {
        let (del, dbar) = self.dolbeault_split(f).expect("validated model");
        del.sub(&dbar).scale(&Scalar::i())
    }

    pub fn omega(&self) -> Form {
        let n = self.n;
        let mut w = Form::zero(n);
        for a in 0..n {
            for b in 0..n {
                let c = self.h.get(a, b);
                if !c.is_zero() {
                    let t = Form::alpha(n, a + 1).wedge(&Form::alpha_bar(n, b + 1));
                    w = w.add(&t.scale(&g2s(&c.mul_i())));
                }
            }
        }
        w
    }

    pub fn big_omega(&self) -> Form {
        Form::monomial(self.n, (1 << self.n) - 1, g2s(&self.omega_coeff))
    }

    /// T = i∂ω, bidegree (2,1).
    pub fn torsion(&self) -> Form {
        self.del(&self.omega()).scale(&Scalar::i())
    }

    /// `c_{lj k̄}`: coefficient of α^l∧α^j∧ᾱ^k in T, antisymmetric in (l, j).
    pub fn torsion_coeff(&self, l: usize, j: usize, k: usize) -> GaussRat {
        let n = self.n;
        if l == j {
            return GaussRat::zero();
        }
        let t = self.torsion();
        let mask = (1 << l) | (1 << j) | (1 << (n + k));
        let c = s2g(&t.coeff(mask));
        if l < j { c } else { -c }
    }

    /// `h^{m p̄}` with `h^{mp̄} h_{qp̄} = δ^m_q`.
    pub fn h_inv_upper(&self, m: usize, p: usize) -> GaussRat {
        let hinv = self.h.inverse().expect("positive metric");
        hinv.get(p, m).clone()
    }

    /// Raised torsion `T^m{}_{lq} = Σ_p h^{mp̄} c_{lq p̄}`.
    pub fn torsion_raised(&self) -> Vec<Vec<Vec<GaussRat>>> {
        let n = self.n;
        let hinv = self.h.inverse().expect("positive metric");
        let t = self.torsion();
        let coeff = |l: usize, j: usize, k: usize| -> GaussRat {
            if l == j {
                return GaussRat::zero();
            }
            let c = s2g(&t.coeff((1 << l) | (1 << j) | (1 << (n + k))));
            if l < j { c } else { -c }
        };
        (0..n)
            .map(|m| {
                (0..n)
                    .map(|l| {
                        (0..n)
                            .map(|q| {
                                let mut acc = GaussRat::zero();
                                for p in 0..n {
                                    acc += &(hinv.get(p, m) * &coeff(l, q, p));
                                }
                                acc
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// `[E_x, E_y] = Σ_z c[z] E_z` with `c[z] = −dθ^z(E_x, E_y)`.
    pub fn brackets(&self) -> Vec<Vec<Vec<GaussRat>>> {
        let d = self.dim();
        let dgen: Vec<Form> = (0..d).map(|z| self.d_generator(z)).collect();
        (0..d)
            .map(|x| {
                (0..d)
                    .map(|y| (0..d).map(|z| -s2g(&dgen[z].eval(&[x, y]))).collect())
                    .collect()
            })
            .collect()
    }

    /// Complex-bilinear metric on the 2n-frame.
    pub fn metric2(&self) -> Matrix {
        let n = self.n;
        let mut g = Matrix::zeros(2 * n, 2 * n);
        for a in 0..n {
            for b in 0..n {
                g.set(a, n + b, self.h.get(a, b).clone());
                g.set(n + b, a, self.h.get(a, b).clone());
            }
        }
        g
    }

    pub fn levi_civita(&self) -> ConnectionData {
        ConnectionData { kind: ConnectionKind::LeviCivita, n: self.n, gamma: koszul(&self.brackets(), &self.metric2()) }
    }

    /// Multiplication by J on the frame: `J E_x = ±i E_x`.
    fn j_factor(&self, x: usize) -> GaussRat {
        if x < self.n { GaussRat::i() } else { -GaussRat::i() }
    }

    /// Chern connection from g(∇_XY,Z) = g(∇^g_XY,Z) − ½dω(JX,Y,Z).
    pub fn chern_via_levi_civita(&self) -> ConnectionData {
        let d = self.dim();
        let g = self.metric2();
        let ginv = g.inverse().expect("nondegenerate metric");
        let lc = self.levi_civita();
        let domega = self.d(&self.omega());
        let half = GaussRat::frac(1, 2);
        let gamma = (0..d)
            .map(|x| {
                let mut m = Matrix::zeros(d, d);
                for y in 0..d {
                    let k: Vec<GaussRat> = (0..d)
                        .map(|z| {
                            let mut lcz = GaussRat::zero();
                            for w in 0..d {
                                lcz += &(lc.gamma[x].get(w, y) * g.get(w, z));
                            }
                            let tor = &(&self.j_factor(x) * &s2g(&domega.eval(&[x, y, z]))) * &half;
                            &lcz - &tor
                        })
                        .collect();
                    for w in 0..d {
                        let mut acc = GaussRat::zero();
                        for (z, kz) in k.iter().enumerate() {
                            acc += &(kz * ginv.get(z, w));
                        }
                        m.set(w, y, acc);
                    }
                }
                m
            })
            .collect();
        ConnectionData { kind: ConnectionKind::Chern, n: self.n, gamma }
    }

    /// `m^a_{d c̄}`: coefficient of α^d∧ᾱ^c in dα^a (0-based).
    pub fn frame_dbar_coeff(&self, a: usize, d: usize, c: usize) -> GaussRat {
        s2g(&self.d_coframe[a].coeff((1 << d) | (1 << (self.n + c))))
    }

    /// Chern connection from the frame ∂̄-matrix and h-compatibility.
    pub fn chern_via_dbar(&self) -> ConnectionData {
        let n = self.n;
        let hinv = self.h.inverse().expect("positive metric");
        // (0,1) directions: ∇_{V̄_c} V_a = Σ_b m^b_{a c̄} V_b
        let mut low: Vec<Matrix> = Vec::new();
        for c in 0..n {
            let mut m = Matrix::zeros(n, n);
            for a in 0..n {
                for b in 0..n {
                    m.set(b, a, self.frame_dbar_coeff(b, a, c));
                }
            }
            low.push(m);
        }
        // (1,0) directions: Σ_e Γ_c[e][a] H[e][b] = −Σ_d H[a][d] conj(low_c[d][b])
        let mut high: Vec<Matrix> = Vec::new();
        for c in 0..n {
            let mut rhs = Matrix::zeros(n, n);
            for a in 0..n {
                for b in 0..n {
                    let mut acc = GaussRat::zero();
                    for dd in 0..n {
                        acc -= &(self.h.get(a, dd) * &low[c].get(dd, b).conj());
                    }
                    rhs.set(a, b, acc);
                }
            }
            high.push(rhs.mul(&hinv).transpose());
        }
        let d = 2 * n;
        let gamma = (0..d)
            .map(|x| {
                let (hol, anti) = if x < n {
                    (high[x].clone(), low[x].clone())
                } else {
                    (low[x - n].clone(), high[x - n].clone())
                };
                // conjugate block: ∇_{E_x} V̄_b = conj(∇_{conj E_x} V_b)
                let mut m = Matrix::zeros(d, d);
                for i in 0..n {
                    for j in 0..n {
                        m.set(i, j, hol.get(i, j).clone());
                        m.set(n + i, n + j, anti.get(i, j).conj());
                    }
                }
                m
            })
            .collect();
        ConnectionData { kind: ConnectionKind::Chern, n, gamma }
    }

    /// Chern connection; both construction routes must agree.
    pub fn chern_connection(&self) -> Result<ConnectionData> {
        let a = self.chern_via_levi_civita();
        let b = self.chern_via_dbar();
        if a != b {
            return Err(Error::RouteMismatch(format!("Chern connection of {}", self.name)));
        }
        Ok(b)
    }

    /// Torsion `Tor(E_x,E_y) = ∇_x E_y − ∇_y E_x − [E_x,E_y]`, as `tor[x][y][w]`.
    pub fn torsion_of(&self, c: &ConnectionData) -> Vec<Vec<Vec<GaussRat>>> {
        let d = self.dim();
        let br = self.brackets();
        (0..d)
            .map(|x| {
                (0..d)
                    .map(|y| {
                        (0..d)
                            .map(|w| &(c.gamma[x].get(w, y) - c.gamma[y].get(w, x)) - &br[x][y][w])
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn curvature(&self, c: &ConnectionData) -> Curvature {
        let d = self.dim();
        let br = self.brackets();
        let mut values = vec![vec![Matrix::zeros(d, d); d]; d];
        for x in 0..d {
            for y in x + 1..d {
                let mut r = c.gamma[x].mul(&c.gamma[y]).sub(&c.gamma[y].mul(&c.gamma[x]));
                for (z, cz) in br[x][y].iter().enumerate() {
                    if !cz.is_zero() {
                        r = r.sub(&c.gamma[z].scale(cz));
                    }
                }
                values[x][y] = r;
            }
        }
        Curvature { n: self.n, values }
    }

    /// Bismut connection ∇^g − ½g⁻¹d^cω with `(g⁻¹H)(X)^i_j = H(E_i, E_j, X)`,
    /// i.e. g(∇⁺_XY,Z) = g(∇^g_XY,Z) + ½d^cω(X,Y,Z).
    pub fn bismut(&self) -> ConnectionData {
        let d = self.dim();
        let g = self.metric2();
        let ginv = g.inverse().expect("nondegenerate metric");
        let lc = self.levi_civita();
        let h = self.dc(&self.omega());
        let half = GaussRat::frac(1, 2);
        let gamma = (0..d)
            .map(|x| {
                let mut m = Matrix::zeros(d, d);
                for y in 0..d {
                    for w in 0..d {
                        let mut acc = lc.gamma[x].get(w, y).clone();
                        for z in 0..d {
                            let hz = s2g(&h.eval(&[x, y, z]));
                            if !hz.is_zero() {
                                acc += &(&(&hz * &half) * ginv.get(z, w));
                            }
                        }
                        m.set(w, y, acc);
                    }
                }
                m
            })
            .collect();
        ConnectionData { kind: ConnectionKind::Bismut, n: self.n, gamma }
    }

    /// (1,0)-directional Bismut coefficients `∇⁺_{V_l} V_m = ∇_{V_l}V_m − Tor(V_l,V_m)`,
    /// as `Γ⁺(l)` n×n matrices acting on T^{1,0}.
    pub fn bismut_holo_via_torsion(&self, chern: &ConnectionData) -> Vec<Matrix> {
        let n = self.n;
        let tor = self.torsion_of(chern);
        (0..n)
            .map(|l| {
                let mut m = chern.holo_block(l);
                for mm in 0..n {
                    for k in 0..n {
                        let v = m.get(k, mm) - &tor[l][mm][k];
                        m.set(k, mm, v);
                    }
                }
                m
            })
            .collect()
    }

    pub fn tr_f_wedge_f(&self) -> Form {
        self.f.matmul(&self.f).and_then(|x| x.trace()).expect("End-valued F")
    }

    pub fn tr_r_wedge_r(&self, r: &Curvature) -> Form {
        let rv = r.to_vform();
        rv.matmul(&rv).and_then(|x| x.trace()).expect("End-valued R")
    }

    /// `s² = |Ω|²_ω` from `i^{n²} Ω∧Ω̄ = s² ω^n/n!`.
    pub fn omega_norm_sq(&self) -> GaussRat {
        let n = self.n;
        let om = self.big_omega();
        let top = om.wedge(&om.conjugate()).top_coeff();
        let mut wn = Form::one(n);
        let w = self.omega();
        let mut fact = 1i64;
        for k in 1..=n {
            wn = wn.wedge(&w);
            fact *= k as i64;
        }
        let vol = s2g(&wn.top_coeff()) * GaussRat::frac(1, fact);
        let mut ipow = GaussRat::one();
        for _ in 0..(n * n) % 4 {
            ipow = ipow.mul_i();
        }
        (ipow * s2g(&top)) / vol
    }

    pub fn check_heterotic_system(&self) -> Result<SystemReport> {
        let n = self.n;
        let chern = self.chern_connection()?;
        let r = self.curvature(&chern);
        let omega = self.omega();
        let ddbar = self.del(&self.dbar(&omega)).scale(&Scalar::constant(GaussRat::from_ints(0, 2)));
        let anomaly = self.tr_f_wedge_f().sub(&self.tr_r_wedge_r(&r));
        let f2_symbolic = ddbar.sub(&anomaly.scale(&Scalar::a()));
        let f2 = f2_symbolic.specialize(&self.alpha_prime);
        let w2 = omega.wedge(&omega);
        let d1 = VForm { tag: self.f.tag, comps: self.f.comps.iter().map(|c| c.wedge(&w2)).collect() };
        Ok(SystemReport {
            alpha_prime: self.alpha_prime.clone(),
            f1: self.d(&self.big_omega()),
            f2_symbolic,
            f2,
            d1,
            d2: self.d(&w2),
            omega_norm_sq: if n > 0 { self.omega_norm_sq() } else { GaussRat::one() },
        })
    }

    pub fn with_alpha_prime(&self, alpha: GaussRat) -> Self {
        let mut m = self.clone();
        m.alpha_prime = alpha;
        m
    }

    /// Same model with F scaled by a constant.
    pub fn with_scaled_f(&self, s: &GaussRat) -> Self {
        let mut m = self.clone();
        m.f = VForm { tag: m.f.tag, comps: m.f.comps.iter().map(|c| c.scale_g(s)).collect() };
        m
    }

    /// F_{jk̄}: r×r coefficient matrix of α^j∧ᾱ^k (0-based).
    pub fn f_coeff(&self, j: usize, k: usize) -> Matrix {
        let r = self.rank;
        let mask = (1 << j) | (1 << (self.n + k));
        let mut m = Matrix::zeros(r, r);
        for a in 0..r {
            for b in 0..r {
                m.set(a, b, s2g(&self.f.comps[a * r + b].coeff(mask)));
            }
        }
        m
    }
}

/// A real Lie algebra given by `de_i`, stored as forms over 2n generators
/// `e_1..e_{2n}` (the holomorphic/antiholomorphic split is ignored).
#[derive(Clone, Debug)]
pub struct RealLieAlgebra {
    pub dim: usize,
    pub de: Vec<Form>,
}

impl RealLieAlgebra {
    /// `de_i = Σ c e_j∧e_k` from (i, j, k, c) with 1-based indices.
    pub fn from_constants(dim: usize, terms: &[(usize, usize, usize, GaussRat)]) -> Self {
        let half = dim / 2;
        let mut de = vec![Form::zero(half); dim];
        for (i, j, k, c) in terms {
            let t = Form::generator(half, j - 1).wedge(&Form::generator(half, k - 1));
            de[i - 1] = de[i - 1].add(&t.scale_g(c));
        }
        RealLieAlgebra { dim, de }
    }

    pub fn brackets(&self) -> Vec<Vec<Vec<GaussRat>>> {
        let d = self.dim;
        (0..d)
            .map(|x| (0..d).map(|y| (0..d).map(|z| -s2g(&self.de[z].eval(&[x, y]))).collect()).collect())
            .collect()
    }

    pub fn check_d_squared(&self) -> bool {
        let half = self.dim / 2;
        let d = |f: &Form| -> Form {
            let mut out = Form::zero(half);
            for (mask, c) in f.terms() {
                let gens: Vec<usize> = bits(mask).collect();
                for (pos, &x) in gens.iter().enumerate() {
                    let left: Mask = gens[..pos].iter().fold(0, |m, &g| m | (1 << g));
                    let right: Mask = gens[pos + 1..].iter().fold(0, |m, &g| m | (1 << g));
                    let t = Form::monomial(half, left, c.clone())
                        .wedge(&self.de[x])
                        .wedge(&Form::monomial(half, right, Scalar::one()));
                    out = if pos % 2 == 0 { out.add(&t) } else { out.sub(&t) };
                }
            }
            out
        };
        self.de.iter().all(|f| d(f).is_zero())
    }

    /// Structure equations of the complex coframe `α^a = Σ_i p[a][i] e_i`.
    pub fn complex_structure_equations(&self, p: &Matrix) -> Result<Vec<Form>> {
        let n = p.rows;
        let d = self.dim;
        if p.cols != d || d != 2 * n {
            return Err(Error::Degree("coframe matrix must be n×2n".into()));
        }
        let full = p.vstack(&p.conj());
        let inv = full.inverse()?;
        // e_i = Σ_x inv[i][x] θ^x
        let e: Vec<Form> = (0..d)
            .map(|i| {
                let mut f = Form::zero(n);
                for x in 0..d {
                    f = f.add(&Form::generator(n, x).scale_g(inv.get(i, x)));
                }
                f
            })
            .collect();
        let de_complex: Vec<Form> = self
            .de
            .iter()
            .map(|f| {
                let mut out = Form::zero(n);
                for (mask, c) in f.terms() {
                    let mut t = Form::constant(n, c.clone());
                    for g in bits(mask) {
                        t = t.wedge(&e[g]);
                    }
                    out = out.add(&t);
                }
                out
            })
            .collect();
        Ok((0..n)
            .map(|a| {
                let mut out = Form::zero(n);
                for i in 0..d {
                    out = out.add(&de_complex[i].scale_g(p.get(a, i)));
                }
                out
            })
            .collect())
    }

    /// Real form Σ c e_I rewritten in the complex coframe.
    pub fn to_complex(&self, f: &Form, p: &Matrix) -> Result<Form> {
        let n = p.rows;
        let full = p.vstack(&p.conj());
        let inv = full.inverse()?;
        let mut out = Form::zero(n);
        for (mask, c) in f.terms() {
            let mut t = Form::constant(n, c.clone());
            for g in bits(mask) {
                let mut eg = Form::zero(n);
                for x in 0..2 * n {
                    eg = eg.add(&Form::generator(n, x).scale_g(inv.get(g, x)));
                }
                t = t.wedge(&eg);
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    pub fn levi_civita(&self) -> Vec<Matrix> {
        koszul(&self.brackets(), &Matrix::identity(self.dim))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::*;

    fn e(i: usize) -> Form {
        Form::generator(3, i - 1)
    }
    fn s(x: &str) -> Scalar {
        x.parse().unwrap()
    }
    fn real_to_ce(f: &Form) -> Form {
        su2_su2().to_complex(f, &calabi_eckmann_coframe()).unwrap()
    }

    #[test]
    fn iwasawa_torsion() {
        let m = build_iwasawa();
        let t = Form::alpha(3, 1).wedge(&Form::alpha(3, 2)).wedge(&Form::alpha_bar(3, 3)).scale(&s("-1/2"));
        assert_eq!(m.torsion(), t);
    }

    #[test]
    fn ce_torsion_matches_real_expression() {
        let m = build_calabi_eckmann();
        let lhs = e(1).add(&e(4).scale(&s("i")));
        let rhs = e(2).wedge(&e(3)).sub(&e(5).wedge(&e(6)).scale(&s("i")));
        let t = real_to_ce(&lhs.wedge(&rhs).scale(&s("1/2")));
        assert_eq!(m.torsion(), t);
        let a12 = Form::alpha(3, 1).wedge(&Form::alpha(3, 2));
        let a13 = Form::alpha(3, 1).wedge(&Form::alpha(3, 3));
        let expect = a12.wedge(&Form::alpha_bar(3, 2)).scale(&s("1/4 i")).add(&a13.wedge(&Form::alpha_bar(3, 3)).scale(&s("1/4")));
        assert_eq!(m.torsion(), expect);
    }

    #[test]
    fn levi_civita_is_torsion_free_and_metric() {
        for m in builtins() {
            let lc = m.levi_civita();
            assert!(m.torsion_of(&lc).iter().flatten().flatten().all(|c| c.is_zero()));
            let g = m.metric2();
            for x in 0..6 {
                let gx = &lc.gamma[x];
                assert!(gx.transpose().mul(&g).add(&g.mul(gx)).is_zero());
            }
        }
    }

    #[test]
    fn real_levi_civita_of_su2() {
        // connection 1-form entry (1,2) on the first factor is ½e_3
        let lc = su2_su2().levi_civita();
        let half = GaussRat::frac(1, 2);
        assert_eq!(lc[2].get(0, 1), &half);
        assert_eq!(lc[0].get(0, 1), &GaussRat::zero());
        assert_eq!(lc[1].get(0, 2), &-half);
    }

    #[test]
    fn chern_routes_and_types() {
        for m in builtins() {
            let c = m.chern_connection().unwrap();
            assert!(c.preserves_type());
            assert!(m.curvature(&c).is_type_11(), "{}", m.name);
        }
        let iw = build_iwasawa();
        assert!(iw.curvature(&iw.chern_connection().unwrap()).is_zero());
    }

    #[test]
    fn ce_chern_connection_matrix() {
        let m = build_calabi_eckmann();
        let c = m.chern_connection().unwrap();
        let i = |f: Form| f.scale(&s("i"));
        let half = s("1/2");
        let expect = [
            [Form::zero(3), e(3).add(&i(e(2))), e(5).neg().add(&i(e(6)))],
            [e(3).neg().add(&i(e(2))), e(1).scale(&s("-2i")), Form::zero(3)],
            [e(5).add(&i(e(6))), Form::zero(3), e(4).scale(&s("-2i"))],
        ];
        for a in 0..3 {
            for b in 0..3 {
                let mut ours = Form::zero(3);
                for x in 0..6 {
                    ours = ours.add(&Form::generator(3, x).scale_g(c.gamma[x].get(a, b)));
                }
                assert_eq!(ours, real_to_ce(&expect[a][b].scale(&half)), "Γ[{a}][{b}]");
            }
        }
    }

    #[test]
    fn ce_curvature_matrix() {
        let m = build_calabi_eckmann();
        let r = m.curvature(&m.chern_connection().unwrap()).to_vform();
        let e23 = e(2).wedge(&e(3));
        let e56 = e(5).wedge(&e(6));
        let i = |f: Form| f.scale(&s("i"));
        let m2i = s("-2i");
        let expect = [
            [e23.scale(&m2i).add(&e56.scale(&m2i)), Form::zero(3), Form::zero(3)],
            [Form::zero(3), e23.scale(&m2i), e(3).neg().add(&i(e(2))).wedge(&e(5).neg().add(&i(e(6))))],
            [Form::zero(3), e(3).add(&i(e(2))).wedge(&e(5).add(&i(e(6)))).neg(), e56.scale(&m2i)],
        ];
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(r.comps[a * 3 + b], real_to_ce(&expect[a][b].scale(&s("1/4"))), "R[{a}][{b}]");
            }
        }
        let curv = m.curvature(&m.chern_connection().unwrap());
        assert!(m.tr_r_wedge_r(&curv).is_zero());
    }

    #[test]
    fn bismut_routes() {
        for m in builtins() {
            let c = m.chern_connection().unwrap();
            let b = m.bismut();
            let via = m.bismut_holo_via_torsion(&c);
            for l in 0..3 {
                assert_eq!(b.holo_block(l), via[l], "{}", m.name);
            }
        }
        assert!(build_calabi_eckmann().bismut().is_zero());
        let ce = build_calabi_eckmann();
        assert_eq!(ce.dc(&ce.omega()), real_to_ce(&e(1).wedge(&e(2)).wedge(&e(3)).add(&e(4).wedge(&e(5)).wedge(&e(6)))));
    }

    #[test]
    fn raised_torsion_is_minus_chern_torsion() {
        for m in builtins() {
            let c = m.chern_connection().unwrap();
            let tor = m.torsion_of(&c);
            let t = m.torsion_raised();
            for a in 0..3 {
                for l in 0..3 {
                    for q in 0..3 {
                        assert_eq!(t[a][l][q], -tor[l][q][a].clone());
                    }
                }
            }
        }
    }

    #[test]
    fn iwasawa_anomaly_fixes_alpha_prime() {
        let m = build_iwasawa();
        let r = m.check_heterotic_system().unwrap();
        assert!(r.all_pass());
        assert!(!r.alpha_arbitrary());
        let full = Form::alpha(3, 1).wedge(&Form::alpha(3, 2)).wedge(&Form::alpha_bar(3, 1)).wedge(&Form::alpha_bar(3, 2));
        let expect = full.scale(&(Scalar::constant(GaussRat::one()) + Scalar::a().scale(&GaussRat::frac(1, 4))));
        assert_eq!(r.f2_symbolic, expect);
        for a in [GaussRat::from(-3), GaussRat::frac(-7, 2)] {
            assert!(!m.with_alpha_prime(a).check_heterotic_system().unwrap().f2_pass());
        }
        assert_eq!(r.omega_norm_sq, GaussRat::from(8));
    }

    #[test]
    fn ce_system_residuals() {
        let m = build_calabi_eckmann();
        let r = m.check_heterotic_system().unwrap();
        let theta = real_to_ce(&e(4).sub(&e(1)));
        assert_eq!(r.f1, theta.wedge(&m.big_omega()));
        let w = m.omega();
        assert_eq!(r.d2, theta.wedge(&w).wedge(&w));
        assert!(r.f2_pass() && r.d1_pass() && r.alpha_arbitrary());
        assert!(m.del(&m.dbar(&w)).is_zero());
        assert_eq!(w, real_to_ce(&e(2).wedge(&e(3)).add(&e(5).wedge(&e(6))).add(&e(1).wedge(&e(4)))));
    }
}
