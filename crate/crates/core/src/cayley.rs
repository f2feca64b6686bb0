//! Exact exterior algebra on R^8 and finite groups of phase matrices on C^4.
//!
//! Real forms carry rational coefficients. Complex forms live in the basis
//! `dz_1..dz_4, dzbar_1..dzbar_4` with coefficients in a cyclotomic field,
//! so elements with irrational real matrices can still be checked exactly.

use crate::coeff::{gauss_int, GaussQ, Q};
use num::{One, Signed, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CayleyError {
    #[error("wedge of degrees {0} and {1} exceeds 8")]
    DegreeOverflow(usize, usize),
    #[error("index {0} outside 1..=8")]
    BadIndex(usize),
    #[error("indices of a term must be strictly increasing")]
    NotIncreasing,
    #[error("term of length {got} in a form of degree {degree}")]
    WrongDegree { degree: usize, got: usize },
    #[error("pairing does not use each real axis exactly once")]
    BadPairing,
    #[error("permutation {0:?} is not a bijection of 0..4")]
    NotAPermutation([usize; 4]),
    #[error("modulus must be positive, got {0}")]
    BadModulus(i64),
    #[error("moduli {0} and {1} differ")]
    ModulusMismatch(i64, i64),
    #[error("the field of order {0} does not contain i")]
    NoImaginaryUnit(i64),
    #[error("coefficient is not rational")]
    NotReal,
    #[error("group exceeds {0} elements")]
    GroupTooLarge(usize),
    #[error("no generators")]
    NoGenerators,
}

// ---------------------------------------------------------------- cyclotomics

/// Coefficients of the cyclotomic polynomial `Phi_n`, lowest degree first.
fn cyclotomic_poly(n: i64) -> Vec<i64> {
    // x^n - 1 divided by Phi_d for every proper divisor d
    let mut p = vec![0i64; n as usize + 1];
    p[0] = -1;
    p[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            p = exact_div(&p, &cyclotomic_poly(d));
        }
    }
    p
}

fn exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let mut out = vec![0i64; r.len() - dd];
    for i in (0..out.len()).rev() {
        let c = r[i + dd];
        out[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            r[i + j] -= c * dj;
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0));
    out
}

/// The field Q(zeta_n).
#[derive(Clone, Debug)]
pub struct CycloField {
    n: i64,
    phi: Arc<Vec<i64>>,
}

impl PartialEq for CycloField {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}
impl Eq for CycloField {}

impl CycloField {
    pub fn new(n: i64) -> Result<Self, CayleyError> {
        if n <= 0 {
            return Err(CayleyError::BadModulus(n));
        }
        Ok(CycloField { n, phi: Arc::new(cyclotomic_poly(n)) })
    }

    pub fn order(&self) -> i64 {
        self.n
    }

    fn dim(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn zero(&self) -> Cyclo {
        Cyclo { field: self.clone(), c: vec![Q::zero(); self.dim()] }
    }

    pub fn rational(&self, x: Q) -> Cyclo {
        let mut z = self.zero();
        z.c[0] = x;
        z
    }

    pub fn one(&self) -> Cyclo {
        self.rational(Q::one())
    }

    /// `zeta^k`.
    pub fn zeta(&self, k: i64) -> Cyclo {
        let mut raw = vec![Q::zero(); self.n as usize];
        raw[k.rem_euclid(self.n) as usize] = Q::one();
        self.reduce(raw)
    }

    pub fn i(&self) -> Result<Cyclo, CayleyError> {
        if self.n % 4 != 0 {
            return Err(CayleyError::NoImaginaryUnit(self.n));
        }
        Ok(self.zeta(self.n / 4))
    }

    fn reduce(&self, mut raw: Vec<Q>) -> Cyclo {
        let d = self.dim();
        for top in (d..raw.len()).rev() {
            let c = raw[top];
            if c.is_zero() {
                continue;
            }
            // phi is monic of degree d
            for (j, &pj) in self.phi.iter().enumerate() {
                raw[top - d + j] -= c * Q::from_integer(pj);
            }
        }
        raw.resize(d, Q::zero());
        Cyclo { field: self.clone(), c: raw }
    }
}

/// An element of Q(zeta_n), stored reduced modulo `Phi_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cyclo {
    field: CycloField,
    c: Vec<Q>,
}

impl Cyclo {
    pub fn field(&self) -> &CycloField {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn as_rational(&self) -> Option<Q> {
        self.c[1..].iter().all(|x| x.is_zero()).then_some(self.c[0])
    }

    pub fn add(&self, o: &Cyclo) -> Cyclo {
        Cyclo { field: self.field.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn neg(&self) -> Cyclo {
        Cyclo { field: self.field.clone(), c: self.c.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, x: Q) -> Cyclo {
        Cyclo { field: self.field.clone(), c: self.c.iter().map(|a| a * x).collect() }
    }

    pub fn mul(&self, o: &Cyclo) -> Cyclo {
        let mut raw = vec![Q::zero(); self.c.len() + o.c.len()];
        for (i, a) in self.c.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in o.c.iter().enumerate() {
                raw[i + j] += a * b;
            }
        }
        self.field.reduce(raw)
    }

    /// Complex conjugate: `zeta^k -> zeta^-k`.
    pub fn conj(&self) -> Cyclo {
        let n = self.field.n as usize;
        let mut raw = vec![Q::zero(); n];
        for (k, a) in self.c.iter().enumerate() {
            raw[(n - k) % n] += a;
        }
        self.field.reduce(raw)
    }

    /// Embed a Gaussian rational; needs `4 | n` unless it is real.
    pub fn from_gauss(field: &CycloField, g: GaussQ) -> Result<Cyclo, CayleyError> {
        let re = field.rational(g.re);
        if g.im.is_zero() {
            return Ok(re);
        }
        Ok(re.add(&field.i()?.scale(g.im)))
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(k, a)| match k {
                0 => format!("{a}"),
                1 => format!("{a}*z"),
                _ => format!("{a}*z^{k}"),
            })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

// --------------------------------------------------------------------- forms

/// Sign of moving the basis elements of `b` past those of `a`, or `None`
/// when they overlap.
fn merge_sign(a: u8, b: u8) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0u32;
    for j in 0..8 {
        if b & (1 << j) != 0 {
            inversions += (a as u32 >> (j + 1)).count_ones();
        }
    }
    Some(inversions % 2 == 1)
}

/// A real 4-form or k-form on R^8 with rational coefficients. Indices are
/// 1-based as in `dx_1 .. dx_8`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiForm {
    degree: usize,
    terms: BTreeMap<u8, Q>,
}

fn mask_of_indices(idx: &[usize]) -> Result<u8, CayleyError> {
    let mut m = 0u8;
    let mut last = 0;
    for &i in idx {
        if !(1..=8).contains(&i) {
            return Err(CayleyError::BadIndex(i));
        }
        if i <= last {
            return Err(CayleyError::NotIncreasing);
        }
        last = i;
        m |= 1 << (i - 1);
    }
    Ok(m)
}

fn indices_of_mask(m: u8) -> Vec<usize> {
    (0..8).filter(|j| m & (1 << j) != 0).map(|j| j + 1).collect()
}

impl MultiForm {
    pub fn zero(degree: usize) -> Self {
        MultiForm { degree, terms: BTreeMap::new() }
    }

    pub fn from_terms(degree: usize, terms: &[(&[usize], i64)]) -> Result<Self, CayleyError> {
        let mut f = MultiForm::zero(degree);
        for (idx, c) in terms {
            f.add_term(idx, Q::from_integer(*c))?;
        }
        Ok(f)
    }

    pub fn add_term(&mut self, idx: &[usize], c: Q) -> Result<(), CayleyError> {
        if idx.len() != self.degree {
            return Err(CayleyError::WrongDegree { degree: self.degree, got: idx.len() });
        }
        let m = mask_of_indices(idx)?;
        let e = self.terms.entry(m).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficient(&self, idx: &[usize]) -> Q {
        mask_of_indices(idx).ok().and_then(|m| self.terms.get(&m).copied()).unwrap_or_else(Q::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in lexicographic order of their index lists.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, Q)> {
        let mut v: Vec<(Vec<usize>, Q)> = self.terms.iter().map(|(&m, &c)| (indices_of_mask(m), c)).collect();
        v.sort();
        v.into_iter()
    }

    pub fn add(&self, o: &MultiForm) -> MultiForm {
        let mut out = self.clone();
        for (&m, &c) in &o.terms {
            let e = out.terms.entry(m).or_insert_with(Q::zero);
            *e += c;
            if e.is_zero() {
                out.terms.remove(&m);
            }
        }
        out
    }

    pub fn scale(&self, x: Q) -> MultiForm {
        if x.is_zero() {
            return MultiForm::zero(self.degree);
        }
        MultiForm { degree: self.degree, terms: self.terms.iter().map(|(&m, &c)| (m, c * x)).collect() }
    }
}

impl fmt::Display for MultiForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, c) in self.terms() {
            let name: String = idx.iter().map(|i| i.to_string()).collect();
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            let mag = if mag.is_one() { String::new() } else { format!("{mag}*") };
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{sign}{mag}dx{name}")?;
            first = false;
        }
        Ok(())
    }
}

pub fn wedge(a: &MultiForm, b: &MultiForm) -> Result<MultiForm, CayleyError> {
    if a.degree + b.degree > 8 {
        return Err(CayleyError::DegreeOverflow(a.degree, b.degree));
    }
    let mut out = MultiForm::zero(a.degree + b.degree);
    for (&ma, &ca) in &a.terms {
        for (&mb, &cb) in &b.terms {
            if let Some(neg) = merge_sign(ma, mb) {
                let c = if neg { -(ca * cb) } else { ca * cb };
                let e = out.terms.entry(ma | mb).or_insert_with(Q::zero);
                *e += c;
            }
        }
    }
    out.terms.retain(|_, c| !c.is_zero());
    Ok(out)
}

/// The Cayley 4-form on R^8.
pub fn cayley_form() -> MultiForm {
    MultiForm::from_terms(
        4,
        &[
            (&[1, 2, 3, 4], 1),
            (&[1, 2, 5, 6], 1),
            (&[1, 2, 7, 8], 1),
            (&[1, 3, 5, 7], 1),
            (&[1, 3, 6, 8], -1),
            (&[1, 4, 5, 8], -1),
            (&[1, 4, 6, 7], -1),
            (&[2, 3, 5, 8], -1),
            (&[2, 3, 6, 7], -1),
            (&[2, 4, 5, 7], -1),
            (&[2, 4, 6, 8], 1),
            (&[3, 4, 5, 6], 1),
            (&[3, 4, 7, 8], 1),
            (&[5, 6, 7, 8], 1),
        ],
    )
    .expect("static form")
}

/// A form in the complex basis: bits 0..4 are `dz_1..dz_4`, bits 4..8 are
/// `dzbar_1..dzbar_4`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CForm {
    degree: usize,
    field: CycloField,
    terms: BTreeMap<u8, Cyclo>,
}

impl CForm {
    pub fn zero(degree: usize, field: &CycloField) -> Self {
        CForm { degree, field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn field(&self) -> &CycloField {
        &self.field
    }

    /// Coefficient of a basis monomial given as a bit mask.
    pub fn coefficient(&self, mask: u8) -> Cyclo {
        self.terms.get(&mask).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn push(&mut self, m: u8, c: Cyclo) {
        match self.terms.get_mut(&m) {
            Some(e) => {
                *e = e.add(&c);
                if e.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                if !c.is_zero() {
                    self.terms.insert(m, c);
                }
            }
        }
    }

    pub fn add(&self, o: &CForm) -> CForm {
        let mut out = self.clone();
        for (&m, c) in &o.terms {
            out.push(m, c.clone());
        }
        out
    }

    pub fn scale(&self, x: &Cyclo) -> CForm {
        let mut out = CForm::zero(self.degree, &self.field);
        for (&m, c) in &self.terms {
            out.push(m, c.mul(x));
        }
        out
    }

    /// Complex conjugate: conjugates coefficients and swaps `dz` with `dzbar`.
    pub fn conj(&self) -> CForm {
        let images: Vec<Vec<(u8, Cyclo)>> =
            (0..8).map(|b| vec![((b + 4) % 8, self.field.one())]).collect();
        let mut out = CForm::zero(self.degree, &self.field);
        for (&m, c) in &self.terms {
            for (tm, tc) in expand_monomial(m, &images, &self.field) {
                out.push(tm, tc.mul(&c.conj()));
            }
        }
        out
    }

    pub fn wedge(&self, o: &CForm) -> Result<CForm, CayleyError> {
        if self.degree + o.degree > 8 {
            return Err(CayleyError::DegreeOverflow(self.degree, o.degree));
        }
        let mut out = CForm::zero(self.degree + o.degree, &self.field);
        for (&ma, ca) in &self.terms {
            for (&mb, cb) in &o.terms {
                if let Some(neg) = merge_sign(ma, mb) {
                    let c = ca.mul(cb);
                    out.push(ma | mb, if neg { c.neg() } else { c });
                }
            }
        }
        Ok(out)
    }
}

/// Substitute a linear image for every basis 1-form in a monomial.
fn expand_monomial(m: u8, images: &[Vec<(u8, Cyclo)>], field: &CycloField) -> Vec<(u8, Cyclo)> {
    let mut acc: Vec<(u8, Cyclo)> = vec![(0, field.one())];
    for b in 0..8u8 {
        if m & (1 << b) == 0 {
            continue;
        }
        let mut next: BTreeMap<u8, Cyclo> = BTreeMap::new();
        for (am, ac) in &acc {
            for (t, tc) in &images[b as usize] {
                let tm = 1u8 << t;
                if let Some(neg) = merge_sign(*am, tm) {
                    let c = ac.mul(tc);
                    let c = if neg { c.neg() } else { c };
                    let e = next.entry(am | tm).or_insert_with(|| field.zero());
                    *e = e.add(&c);
                }
            }
        }
        acc = next.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    }
    acc
}

// ------------------------------------------------------------------ pairings

/// One complex coordinate `z = s_re * x_re + i * s_im * x_im`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AxisPair {
    pub re: usize,
    pub re_sign: i8,
    pub im: usize,
    pub im_sign: i8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinatePairing {
    pairs: [AxisPair; 4],
}

impl CoordinatePairing {
    pub fn new(pairs: [AxisPair; 4]) -> Result<Self, CayleyError> {
        let mut seen = 0u8;
        for p in &pairs {
            for (i, s) in [(p.re, p.re_sign), (p.im, p.im_sign)] {
                if !(1..=8).contains(&i) || s.abs() != 1 || seen & (1 << (i - 1)) != 0 {
                    return Err(CayleyError::BadPairing);
                }
                seen |= 1 << (i - 1);
            }
        }
        Ok(CoordinatePairing { pairs })
    }

    pub fn pairs(&self) -> &[AxisPair; 4] {
        &self.pairs
    }

    /// `(x1 + i x2, x3 + i x4, x5 + i x6, x7 + i x8)`.
    pub fn z() -> Self {
        let p = |a| AxisPair { re: a, re_sign: 1, im: a + 1, im_sign: 1 };
        CoordinatePairing::new([p(1), p(3), p(5), p(7)]).expect("static pairing")
    }

    /// `(-x1 + i x3, x2 + i x4, -x5 + i x7, x6 + i x8)`.
    pub fn w() -> Self {
        let p = |re, s, im| AxisPair { re, re_sign: s, im, im_sign: 1 };
        CoordinatePairing::new([p(1, -1, 3), p(2, 1, 4), p(5, -1, 7), p(6, 1, 8)]).expect("static pairing")
    }

    /// Multiply coordinate `a` by `i`: `i z = -s_im x_im + i s_re x_re`.
    pub fn rotate_quarter(&self, a: usize) -> Self {
        let mut pairs = self.pairs;
        let p = pairs[a];
        pairs[a] = AxisPair { re: p.im, re_sign: -p.im_sign, im: p.re, im_sign: p.re_sign };
        CoordinatePairing { pairs }
    }

    fn locate(&self, axis: usize) -> (usize, bool, Q) {
        for (a, p) in self.pairs.iter().enumerate() {
            if p.re == axis {
                return (a, false, Q::from_integer(p.re_sign as i64));
            }
            if p.im == axis {
                return (a, true, Q::from_integer(p.im_sign as i64));
            }
        }
        unreachable!("validated pairing covers every axis")
    }
}

/// Rewrite a real form in the complex basis of a pairing.
pub fn to_complex(f: &MultiForm, p: &CoordinatePairing, field: &CycloField) -> Result<CForm, CayleyError> {
    let i = field.i()?;
    let half = Q::new(1, 2);
    // dx_re = s (dz + dzbar) / 2, dx_im = -i s (dz - dzbar) / 2
    let images: Vec<Vec<(u8, Cyclo)>> = (1..=8)
        .map(|axis| {
            let (a, is_im, s) = p.locate(axis);
            let a = a as u8;
            if is_im {
                let c = i.scale(-s * half);
                vec![(a, c.clone()), (a + 4, c.neg())]
            } else {
                let c = field.rational(s * half);
                vec![(a, c.clone()), (a + 4, c)]
            }
        })
        .collect();
    let mut out = CForm::zero(f.degree, field);
    for (&m, &c) in &f.terms {
        for (tm, tc) in expand_monomial(m, &images, field) {
            out.push(tm, tc.scale(c));
        }
    }
    Ok(out)
}

/// Rewrite a complex-basis form in real coordinates; fails unless every
/// resulting coefficient is rational.
pub fn to_real(f: &CForm, p: &CoordinatePairing) -> Result<MultiForm, CayleyError> {
    let field = &f.field;
    let i = field.i()?;
    // dz = s_re dx_re + i s_im dx_im, dzbar its conjugate
    let mut images: Vec<Vec<(u8, Cyclo)>> = vec![Vec::new(); 8];
    for (a, pr) in p.pairs.iter().enumerate() {
        let re = field.rational(Q::from_integer(pr.re_sign as i64));
        let im = i.scale(Q::from_integer(pr.im_sign as i64));
        images[a] = vec![((pr.re - 1) as u8, re.clone()), ((pr.im - 1) as u8, im.clone())];
        images[a + 4] = vec![((pr.re - 1) as u8, re), ((pr.im - 1) as u8, im.neg())];
    }
    let mut acc = CForm::zero(f.degree, field);
    for (&m, c) in &f.terms {
        for (tm, tc) in expand_monomial(m, &images, field) {
            acc.push(tm, tc.mul(c));
        }
    }
    let mut out = MultiForm::zero(f.degree);
    for (&m, c) in &acc.terms {
        out.terms.insert(m, c.as_rational().ok_or(CayleyError::NotReal)?);
    }
    Ok(out)
}

/// Kahler form `(i/2) sum dz_a ^ dzbar_a` of a pairing, in real coordinates.
pub fn kahler_form(p: &CoordinatePairing) -> MultiForm {
    let mut f = MultiForm::zero(2);
    for pr in &p.pairs {
        let (lo, hi, s) = if pr.re < pr.im { (pr.re, pr.im, 1) } else { (pr.im, pr.re, -1) };
        let c = Q::from_integer((pr.re_sign * pr.im_sign) as i64 * s);
        f.add_term(&[lo, hi], c).expect("valid indices");
    }
    f
}

/// `Re(dz_1 ^ dz_2 ^ dz_3 ^ dz_4)` of a pairing, in real coordinates.
pub fn holomorphic_volume_real_part(p: &CoordinatePairing) -> MultiForm {
    let field = CycloField::new(4).expect("positive");
    let mut theta = CForm::zero(4, &field);
    theta.push(0b1111, field.one());
    let re = theta.add(&theta.conj()).scale(&field.rational(Q::new(1, 2)));
    to_real(&re, p).expect("real part is real")
}

/// `(1/2) omega ^ omega + Re(theta)` for the flat SU(4) structure of a pairing.
pub fn su4_induced_form(p: &CoordinatePairing) -> MultiForm {
    let w = kahler_form(p);
    let ww = wedge(&w, &w).expect("degree 4").scale(Q::new(1, 2));
    ww.add(&holomorphic_volume_real_part(p))
}

// ------------------------------------------------------------ phase matrices

/// The map `(g z)_i = zeta^{e_i} * C(z_{perm[i]})` on C^4, where `zeta` is a
/// primitive `modulus`-th root of unity and `C` is complex conjugation when
/// `conjugates` is set. Indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhaseMatrix {
    perm: [usize; 4],
    exps: [i64; 4],
    conjugates: bool,
    modulus: i64,
}

impl PhaseMatrix {
    pub fn new(perm: [usize; 4], exps: [i64; 4], conjugates: bool, modulus: i64) -> Result<Self, CayleyError> {
        if modulus <= 0 {
            return Err(CayleyError::BadModulus(modulus));
        }
        let mut seen = [false; 4];
        for &p in &perm {
            if p >= 4 || seen[p] {
                return Err(CayleyError::NotAPermutation(perm));
            }
            seen[p] = true;
        }
        Ok(PhaseMatrix { perm, exps: exps.map(|e| e.rem_euclid(modulus)), conjugates, modulus })
    }

    pub fn identity(modulus: i64) -> Self {
        PhaseMatrix { perm: [0, 1, 2, 3], exps: [0; 4], conjugates: false, modulus }
    }

    pub fn perm(&self) -> [usize; 4] {
        self.perm
    }
    pub fn exps(&self) -> [i64; 4] {
        self.exps
    }
    pub fn conjugates(&self) -> bool {
        self.conjugates
    }
    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    pub fn is_identity(&self) -> bool {
        *self == PhaseMatrix::identity(self.modulus)
    }

    /// `self` after `h`: `(self . h)(z) = self(h(z))`.
    pub fn compose(&self, h: &PhaseMatrix) -> Result<PhaseMatrix, CayleyError> {
        if self.modulus != h.modulus {
            return Err(CayleyError::ModulusMismatch(self.modulus, h.modulus));
        }
        let mut perm = [0; 4];
        let mut exps = [0; 4];
        for i in 0..4 {
            let j = self.perm[i];
            perm[i] = h.perm[j];
            exps[i] = if self.conjugates { self.exps[i] - h.exps[j] } else { self.exps[i] + h.exps[j] };
        }
        PhaseMatrix::new(perm, exps, self.conjugates ^ h.conjugates, self.modulus)
    }

    pub fn apply(&self, z: &[Cyclo; 4]) -> [Cyclo; 4] {
        let field = z[0].field().clone();
        std::array::from_fn(|i| {
            let src = &z[self.perm[i]];
            let src = if self.conjugates { src.conj() } else { src.clone() };
            field.zeta(self.exps[i]).mul(&src)
        })
    }

    /// Real 8x8 matrix in the coordinates of a pairing, when every phase is
    /// a fourth root of unity. Row `r`, column `c` is the `x_{r+1}` entry of
    /// the image of the `c+1`-th unit vector.
    pub fn real_matrix(&self, p: &CoordinatePairing) -> Option<[[Q; 8]; 8]> {
        if 4 % self.modulus != 0 {
            return None;
        }
        let unit = |k: i64| -> GaussQ {
            match (k * (4 / self.modulus)).rem_euclid(4) {
                0 => gauss_int(1, 0),
                1 => gauss_int(0, 1),
                2 => gauss_int(-1, 0),
                _ => gauss_int(0, -1),
            }
        };
        let mut m = [[Q::zero(); 8]; 8];
        for col in 1..=8 {
            let mut z = [GaussQ::new(Q::zero(), Q::zero()); 4];
            let (a, is_im, s) = p.locate(col);
            z[a] = if is_im { GaussQ::new(Q::zero(), s) } else { GaussQ::new(s, Q::zero()) };
            for i in 0..4 {
                let src = z[self.perm[i]];
                let src = if self.conjugates { src.conj() } else { src };
                let v = unit(self.exps[i]) * src;
                let pr = p.pairs[i];
                m[pr.re - 1][col - 1] = v.re * Q::from_integer(pr.re_sign as i64);
                m[pr.im - 1][col - 1] = v.im * Q::from_integer(pr.im_sign as i64);
            }
        }
        Some(m)
    }
}

impl fmt::Display for PhaseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..4)
            .map(|i| {
                let bar = if self.conjugates { "~" } else { "" };
                format!("z^{}{}{}", self.exps[i], bar, self.perm[i] + 1)
            })
            .collect();
        write!(f, "({}) mod {}", parts.join(", "), self.modulus)
    }
}

/// Pullback on the complex basis: `g^* dz_i = zeta^{e_i} dz_{perm(i)}`, with
/// `dzbar` in place of `dz` when `g` conjugates.
pub fn pullback_complex(g: &PhaseMatrix, f: &CForm) -> Result<CForm, CayleyError> {
    if f.field.order() != g.modulus {
        return Err(CayleyError::ModulusMismatch(f.field.order(), g.modulus));
    }
    let field = &f.field;
    let mut images: Vec<Vec<(u8, Cyclo)>> = vec![Vec::new(); 8];
    for i in 0..4 {
        let p = g.perm[i] as u8;
        let (hol, anti) = if g.conjugates { (p + 4, p) } else { (p, p + 4) };
        images[i] = vec![(hol, field.zeta(g.exps[i]))];
        images[i + 4] = vec![(anti, field.zeta(-g.exps[i]))];
    }
    let mut out = CForm::zero(f.degree, field);
    for (&m, c) in &f.terms {
        for (tm, tc) in expand_monomial(m, &images, field) {
            out.push(tm, tc.mul(c));
        }
    }
    Ok(out)
}

/// Pullback of a real form, with C^4 identified with R^8 by the z-pairing.
pub fn pullback(g: &PhaseMatrix, f: &MultiForm) -> Result<MultiForm, CayleyError> {
    let n = if g.modulus % 4 == 0 { g.modulus } else { g.modulus * 4 / num::integer::gcd(g.modulus, 4) };
    let field = CycloField::new(n)?;
    let lifted = PhaseMatrix { exps: g.exps.map(|e| e * (n / g.modulus)), modulus: n, ..g.clone() };
    let p = CoordinatePairing::z();
    to_real(&pullback_complex(&lifted, &to_complex(f, &p, &field)?)?, &p)
}

/// Does `g` pull `f` back to itself, checked over Q(zeta_N) in the
/// complex basis of the z-pairing?
pub fn preserves(g: &PhaseMatrix, f: &MultiForm) -> Result<bool, CayleyError> {
    let n = if g.modulus % 4 == 0 { g.modulus } else { g.modulus * 4 / num::integer::gcd(g.modulus, 4) };
    let field = CycloField::new(n)?;
    let lifted = PhaseMatrix { exps: g.exps.map(|e| e * (n / g.modulus)), modulus: n, ..g.clone() };
    let c = to_complex(f, &CoordinatePairing::z(), &field)?;
    Ok(pullback_complex(&lifted, &c)? == c)
}

// -------------------------------------------------------------------- groups

pub const GROUP_CAP: usize = 10_000;

#[derive(Clone, Debug)]
pub struct GroupTable {
    pub elements: Vec<PhaseMatrix>,
    /// `table[a][b]` is the index of `elements[a] . elements[b]`.
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
    /// Indices of the generators in `elements`.
    pub generators: Vec<usize>,
}

impl GroupTable {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn index_of(&self, g: &PhaseMatrix) -> Option<usize> {
        self.elements.iter().position(|e| e == g)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn power(&self, a: usize, k: usize) -> usize {
        (0..k).fold(self.identity, |acc, _| self.table[acc][a])
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.table[x][a];
            k += 1;
        }
        k
    }

    pub fn inverse(&self, a: usize) -> Option<usize> {
        let inv: Vec<usize> = (0..self.order()).filter(|&b| self.table[a][b] == self.identity).collect();
        (inv.len() == 1 && self.table[inv[0]][a] == self.identity).then(|| inv[0])
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..self.order()).all(|b| self.table[a][b] == self.table[b][a]))
    }

    pub fn is_cyclic(&self) -> bool {
        (0..self.order()).any(|a| self.element_order(a) == self.order())
    }

    /// Associativity on every triple; only sensible for small groups.
    pub fn is_associative(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| {
            (0..n).all(|b| (0..n).all(|c| self.table[self.table[a][b]][c] == self.table[a][self.table[b][c]]))
        })
    }
}

pub fn generate_group(gens: &[PhaseMatrix]) -> Result<GroupTable, CayleyError> {
    let first = gens.first().ok_or(CayleyError::NoGenerators)?;
    let n = first.modulus;
    if let Some(g) = gens.iter().find(|g| g.modulus != n) {
        return Err(CayleyError::ModulusMismatch(n, g.modulus));
    }
    let mut elements = vec![PhaseMatrix::identity(n)];
    let mut index: HashMap<PhaseMatrix, usize> = HashMap::new();
    index.insert(elements[0].clone(), 0);
    let mut frontier = 0;
    while frontier < elements.len() {
        let x = elements[frontier].clone();
        for g in gens {
            let y = x.compose(g)?;
            if !index.contains_key(&y) {
                if elements.len() >= GROUP_CAP {
                    return Err(CayleyError::GroupTooLarge(GROUP_CAP));
                }
                index.insert(y.clone(), elements.len());
                elements.push(y);
            }
        }
        frontier += 1;
    }
    let mut table = vec![vec![0; elements.len()]; elements.len()];
    for (a, x) in elements.iter().enumerate() {
        for (b, y) in elements.iter().enumerate() {
            table[a][b] = index[&x.compose(y)?];
        }
    }
    let generators = gens.iter().map(|g| index[g]).collect();
    Ok(GroupTable { elements, table, identity: 0, generators })
}

/// The order 8 group: `alpha = i * id`, `beta(z) = (zbar2, -zbar1, zbar4, -zbar3)`.
pub fn group_g_generators() -> [PhaseMatrix; 2] {
    [
        PhaseMatrix::new([0, 1, 2, 3], [1, 1, 1, 1], false, 4).expect("static"),
        PhaseMatrix::new([1, 0, 3, 2], [0, 2, 0, 2], true, 4).expect("static"),
    ]
}

/// The order `8n` family for odd `n`, over `zeta_{4n}`.
pub fn group_gn_generators(n: i64) -> Result<[PhaseMatrix; 3], CayleyError> {
    let m = 4 * n;
    Ok([
        PhaseMatrix::new([0, 1, 2, 3], [4, -4, 4, -4], false, m)?,
        PhaseMatrix::new([0, 1, 2, 3], [n, n, n, n], false, m)?,
        PhaseMatrix::new([1, 0, 3, 2], [0, 2 * n, 0, 2 * n], true, m)?,
    ])
}

/// A nonzero vector fixed by a group element.
#[derive(Clone, Debug)]
pub struct FixedWitness {
    pub element: usize,
    pub vector: [Cyclo; 4],
}

#[derive(Clone, Debug)]
pub struct FreenessReport {
    pub free: bool,
    pub witness: Option<FixedWitness>,
}

/// A nonzero fixed vector of a single element, if any.
pub fn fixed_vector(g: &PhaseMatrix) -> Option<[Cyclo; 4]> {
    let field = CycloField::new(if g.modulus % 4 == 0 { g.modulus } else { 4 * g.modulus }).ok()?;
    let g = {
        let k = field.order() / g.modulus;
        PhaseMatrix { exps: g.exps.map(|e| e * k), modulus: field.order(), ..g.clone() }
    };
    if !g.conjugates {
        // a cycle with total phase 0 carries a fixed vector
        let mut done = [false; 4];
        for start in 0..4 {
            if done[start] {
                continue;
            }
            let mut cycle = vec![start];
            done[start] = true;
            let mut j = g.perm[start];
            while j != start {
                cycle.push(j);
                done[j] = true;
                j = g.perm[j];
            }
            let total: i64 = cycle.iter().map(|&i| g.exps[i]).sum();
            if total.rem_euclid(g.modulus) == 0 {
                let mut v: [Cyclo; 4] = std::array::from_fn(|_| field.zero());
                v[start] = field.one();
                // (g z)_i = zeta^{e_i} z_{p(i)} = z_i  =>  z_{p(i)} = zeta^{-e_i} z_i
                let mut i = start;
                while g.perm[i] != start {
                    v[g.perm[i]] = field.zeta(-g.exps[i]).mul(&v[i]);
                    i = g.perm[i];
                }
                return Some(v);
            }
        }
        return None;
    }
    // g antilinear: it restricts to an antilinear involution on the fixed
    // space of g^2, which has fixed vectors whenever that space is nonzero
    let g2 = g.compose(&g).ok()?;
    let base = if g2.is_identity() {
        std::array::from_fn(|k| if k == 0 { field.one() } else { field.zero() })
    } else {
        fixed_vector(&g2)?
    };
    let i = field.i().ok()?;
    for scale in [field.one(), i] {
        let v: [Cyclo; 4] = std::array::from_fn(|k| base[k].mul(&scale));
        let gv = g.apply(&v);
        let w: [Cyclo; 4] = std::array::from_fn(|k| v[k].add(&gv[k]));
        if w.iter().any(|c| !c.is_zero()) {
            return Some(w);
        }
    }
    None
}

pub fn acts_freely(group: &GroupTable) -> FreenessReport {
    for (idx, g) in group.elements.iter().enumerate() {
        if idx == group.identity {
            continue;
        }
        if let Some(vector) = fixed_vector(g) {
            return FreenessReport { free: false, witness: Some(FixedWitness { element: idx, vector }) };
        }
    }
    FreenessReport { free: true, witness: None }
}
