//! Exact arithmetic over the Gaussian rationals and polynomials in the
//! formal anomaly variable `a`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Element of ℚ(i).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussRat {
    pub re: Rat,
    pub im: Rat,
}

impl GaussRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        GaussRat { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussRat::new(rat(re, 1), rat(im, 1))
    }

    pub fn real(re: Rat) -> Self {
        GaussRat::new(re, Rat::zero())
    }

    pub fn frac(n: i64, d: i64) -> Self {
        GaussRat::real(rat(n, d))
    }

    pub fn i() -> Self {
        GaussRat::from_ints(0, 1)
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn inv(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(GaussRat::new(&self.re / &n, -&self.im / &n))
    }

    pub fn scale(&self, r: &Rat) -> Self {
        GaussRat::new(&self.re * r, &self.im * r)
    }

    pub fn mul_i(&self) -> Self {
        GaussRat::new(-self.im.clone(), self.re.clone())
    }
}

impl Zero for GaussRat {
    fn zero() -> Self {
        GaussRat::new(Rat::zero(), Rat::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRat {
    fn one() -> Self {
        GaussRat::new(Rat::one(), Rat::zero())
    }
}

impl From<i64> for GaussRat {
    fn from(v: i64) -> Self {
        GaussRat::from_ints(v, 0)
    }
}

impl<'a> Add<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, o: GaussRat) -> GaussRat {
        &self + &o
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, o: GaussRat) -> GaussRat {
        &self - &o
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, o: GaussRat) -> GaussRat {
        &self * &o
    }
}

impl Div for GaussRat {
    type Output = GaussRat;
    fn div(self, o: GaussRat) -> GaussRat {
        &self * &o.inv().expect("division by zero in ℚ(i)")
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re, -self.im)
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }
}

impl AddAssign<&GaussRat> for GaussRat {
    fn add_assign(&mut self, o: &GaussRat) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&GaussRat> for GaussRat {
    fn sub_assign(&mut self, o: &GaussRat) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&GaussRat> for GaussRat {
    fn mul_assign(&mut self, o: &GaussRat) {
        *self = &*self * o;
    }
}

fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_unsigned_im(r: &Rat) -> String {
    if r.is_one() {
        "i".to_string()
    } else {
        format!("{} i", fmt_rat(r))
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rat(&self.re)),
            (true, false) => {
                if self.im.is_negative() {
                    write!(f, "-{}", fmt_unsigned_im(&-self.im.clone()))
                } else {
                    write!(f, "{}", fmt_unsigned_im(&self.im))
                }
            }
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(
                    f,
                    "{} {} {}",
                    fmt_rat(&self.re),
                    sign,
                    fmt_unsigned_im(&self.im.abs())
                )
            }
        }
    }
}

/// Element of ℚ(i)[a]; `coeffs[k]` multiplies `a^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    coeffs: Vec<GaussRat>,
}

impl Scalar {
    pub fn from_coeffs(mut coeffs: Vec<GaussRat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Scalar { coeffs }
    }

    pub fn constant(c: GaussRat) -> Self {
        Scalar::from_coeffs(vec![c])
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Scalar::constant(GaussRat::frac(n, d))
    }

    pub fn i() -> Self {
        Scalar::constant(GaussRat::i())
    }

    /// The formal anomaly variable `a`.
    pub fn a() -> Self {
        Scalar::from_coeffs(vec![GaussRat::zero(), GaussRat::one()])
    }

    pub fn coeffs(&self) -> &[GaussRat] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> GaussRat {
        self.coeffs.get(k).cloned().unwrap_or_else(GaussRat::zero)
    }

    /// Degree in `a`; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn constant_term(&self) -> GaussRat {
        self.coeff(0)
    }

    pub fn conj(&self) -> Self {
        Scalar::from_coeffs(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        if c.is_zero() {
            return Scalar::zero();
        }
        Scalar::from_coeffs(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn evaluate_alpha(&self, alpha0: &GaussRat) -> GaussRat {
        debug_assert!(alpha0.is_real(), "alpha must be real");
        let mut acc = GaussRat::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * alpha0) + c;
        }
        acc
    }

    /// Division by a unit (nonzero constant).
    pub fn div(&self, d: &Scalar) -> Result<Self> {
        if d.coeffs.len() != 1 {
            return Err(Error::NonUnitDivision(d.to_string()));
        }
        Ok(self.scale(&d.coeffs[0].inv()?))
    }
}

impl From<GaussRat> for Scalar {
    fn from(c: GaussRat) -> Self {
        Scalar::constant(c)
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::constant(GaussRat::from(v))
    }
}

impl Zero for Scalar {
    fn zero() -> Self {
        Scalar { coeffs: Vec::new() }
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl One for Scalar {
    fn one() -> Self {
        Scalar::constant(GaussRat::one())
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        let len = self.coeffs.len().max(o.coeffs.len());
        Scalar::from_coeffs((0..len).map(|k| &self.coeff(k) + &o.coeff(k)).collect())
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        let len = self.coeffs.len().max(o.coeffs.len());
        Scalar::from_coeffs((0..len).map(|k| &self.coeff(k) - &o.coeff(k)).collect())
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        if self.is_zero() || o.is_zero() {
            return Scalar::zero();
        }
        let mut out = vec![GaussRat::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in o.coeffs.iter().enumerate() {
                out[i + j] += &(x * y);
            }
        }
        Scalar::from_coeffs(out)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        &self + &o
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, o: Scalar) -> Scalar {
        &self - &o
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, o: Scalar) -> Scalar {
        &self * &o
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::from_coeffs(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -(self.clone())
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, o: &Scalar) {
        *self = &*self + o;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, o: &Scalar) {
        *self = &*self - o;
    }
}

fn fmt_power(k: usize) -> String {
    match k {
        1 => "a".to_string(),
        _ => format!("a^{k}"),
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mixed = !c.re.is_zero() && !c.im.is_zero();
            let (neg, body) = if k == 0 {
                let s = c.to_string();
                match s.strip_prefix('-') {
                    Some(rest) if !mixed => (true, rest.to_string()),
                    _ => (false, s),
                }
            } else if mixed {
                (false, format!("({c}) {}", fmt_power(k)))
            } else {
                let s = c.to_string();
                let (neg, mag) = match s.strip_prefix('-') {
                    Some(rest) => (true, rest.to_string()),
                    None => (false, s),
                };
                if mag == "1" {
                    (neg, fmt_power(k))
                } else {
                    (neg, format!("{mag} {}", fmt_power(k)))
                }
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        write!(f, "{out}")
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rat),
    I,
    A,
    Plus,
    Minus,
    Caret,
    LParen,
    RParen,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { chars: src.char_indices().peekable(), src }
    }

    fn tokens(mut self) -> Result<Vec<Tok>> {
        let mut out = Vec::new();
        while let Some(&(pos, ch)) = self.chars.peek() {
            match ch {
                ' ' | '\t' | '*' => {
                    self.chars.next();
                }
                '+' => {
                    self.chars.next();
                    out.push(Tok::Plus);
                }
                '-' => {
                    self.chars.next();
                    out.push(Tok::Minus);
                }
                '^' => {
                    self.chars.next();
                    out.push(Tok::Caret);
                }
                '(' => {
                    self.chars.next();
                    out.push(Tok::LParen);
                }
                ')' => {
                    self.chars.next();
                    out.push(Tok::RParen);
                }
                'i' => {
                    self.chars.next();
                    out.push(Tok::I);
                }
                'a' => {
                    self.chars.next();
                    out.push(Tok::A);
                }
                c if c.is_ascii_digit() => {
                    let start = pos;
                    let mut end = pos;
                    while let Some(&(p, c)) = self.chars.peek() {
                        if c.is_ascii_digit() || c == '/' {
                            end = p + c.len_utf8();
                            self.chars.next();
                        } else {
                            break;
                        }
                    }
                    out.push(Tok::Num(parse_rat(&self.src[start..end])?));
                }
                _ => return Err(Error::Parse(format!("unexpected '{ch}' in scalar {:?}", self.src))),
            }
        }
        Ok(out)
    }
}

fn parse_rat(s: &str) -> Result<Rat> {
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    let mut parts = s.split('/');
    let n: BigInt = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let d: BigInt = match parts.next() {
        Some(d) => d.parse().map_err(|_| bad())?,
        None => BigInt::one(),
    };
    if parts.next().is_some() || d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn sum(&mut self) -> Result<Scalar> {
        let mut acc = Scalar::zero();
        let mut first = true;
        loop {
            let neg = match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    false
                }
                Some(Tok::Minus) => {
                    self.bump();
                    true
                }
                None | Some(Tok::RParen) if !first => break,
                _ if first => false,
                Some(t) => return Err(Error::Parse(format!("unexpected token {t:?}"))),
                None => break,
            };
            let t = self.term()?;
            acc = if neg { &acc - &t } else { &acc + &t };
            first = false;
            if matches!(self.peek(), None | Some(Tok::RParen)) {
                break;
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Scalar> {
        let mut acc = Scalar::one();
        let mut any = false;
        loop {
            match self.peek() {
                Some(Tok::Num(_)) => {
                    if let Some(Tok::Num(r)) = self.bump() {
                        acc = acc.scale(&GaussRat::real(r));
                    }
                }
                Some(Tok::I) => {
                    self.bump();
                    acc = acc.scale(&GaussRat::i());
                }
                Some(Tok::A) => {
                    self.bump();
                    let mut k = 1usize;
                    if self.peek() == Some(&Tok::Caret) {
                        self.bump();
                        match self.bump() {
                            Some(Tok::Num(r)) if r.is_integer() && !r.is_negative() => {
                                k = r.to_integer().try_into().map_err(|_| Error::Parse("exponent too large".into()))?;
                            }
                            _ => return Err(Error::Parse("bad exponent".into())),
                        }
                    }
                    let mut p = Scalar::one();
                    for _ in 0..k {
                        p = &p * &Scalar::a();
                    }
                    acc = &acc * &p;
                }
                Some(Tok::LParen) => {
                    self.bump();
                    let inner = self.sum()?;
                    if self.bump() != Some(Tok::RParen) {
                        return Err(Error::Parse("unbalanced parenthesis".into()));
                    }
                    acc = &acc * &inner;
                }
                _ => break,
            }
            any = true;
        }
        if !any {
            return Err(Error::Parse("empty term".into()));
        }
        Ok(acc)
    }
}

impl FromStr for Scalar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let toks = Lexer::new(s.trim()).tokens()?;
        if toks.is_empty() {
            return Err(Error::Parse("empty scalar".into()));
        }
        let mut p = Parser { toks, pos: 0 };
        let v = p.sum()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!("trailing input in scalar {s:?}")));
        }
        Ok(v)
    }
}

impl FromStr for GaussRat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let v: Scalar = s.parse()?;
        if !v.is_constant() {
            return Err(Error::Parse(format!("{s:?} depends on a")));
        }
        Ok(v.constant_term())
    }
}

/// Parses a real rational such as `-4` or `1/7`.
pub fn parse_real(s: &str) -> Result<GaussRat> {
    let v: GaussRat = s.parse()?;
    if !v.is_real() {
        return Err(Error::Parse(format!("{s:?} is not real")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Scalar {
        x.parse().unwrap()
    }

    #[test]
    fn spec_examples() {
        let x = &Scalar::a().scale(&GaussRat::frac(1, 2)) * &Scalar::i();
        assert_eq!(x, Scalar::from_coeffs(vec![GaussRat::zero(), GaussRat::new(rat(0, 1), rat(1, 2))]));
        let z = &Scalar::a() - &Scalar::a();
        assert!(z.coeffs().is_empty());
        let p = &s("1 + i") * &s("1 - i");
        assert_eq!(p, Scalar::from(2));
    }

    #[test]
    fn evaluation() {
        let m4 = GaussRat::from(-4);
        assert_eq!(s("a^2").evaluate_alpha(&m4), GaussRat::from(16));
        assert_eq!(s("2 + a").evaluate_alpha(&GaussRat::zero()), GaussRat::from(2));
        assert_eq!((-Scalar::a().scale(&GaussRat::frac(1, 2))).evaluate_alpha(&m4), GaussRat::from(2));
    }

    #[test]
    fn round_trip() {
        for t in [
            "0", "1", "-1", "1/2", "-1/2 i", "i", "-i", "1/2 + 1/3 i", "3 - i", "a", "-a",
            "-1/2 a^2", "1/4 i a", "(1/2 - 1/3 i) a^3", "1 - a + (2 + i) a^2",
        ] {
            let v = s(t);
            assert_eq!(v.to_string(), t, "printing {t}");
            assert_eq!(s(&v.to_string()), v);
        }
    }

    #[test]
    fn non_unit_division_is_error() {
        assert!(Scalar::one().div(&Scalar::a()).is_err());
        assert_eq!(Scalar::one().div(&Scalar::from(2)).unwrap(), Scalar::frac(1, 2));
    }
}
