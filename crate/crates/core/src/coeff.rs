//! Exact scalars: Gaussian rationals for equation coefficients and
//! rational turns for phases.

use num::rational::Ratio;
use num::{Complex, Integer, One, Signed, Zero};
use std::fmt;

pub type Q = Ratio<i64>;
pub type GaussQ = Complex<Q>;

pub fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

pub fn gauss(re: Q, im: Q) -> GaussQ {
    Complex::new(re, im)
}

pub fn gauss_int(re: i64, im: i64) -> GaussQ {
    Complex::new(Q::from_integer(re), Q::from_integer(im))
}

/// Reduce a turn into `[0, 1)`.
pub fn turn(x: Q) -> Q {
    x - x.floor()
}

pub fn norm_sq(c: &GaussQ) -> Q {
    c.re * c.re + c.im * c.im
}

/// Argument of a Gaussian rational as a rational turn, when it is one.
///
/// The roots of unity in Q(i) are the fourth roots, so `c / conj(c)` is a
/// root of unity only when `c` lies on one of the eight axes or diagonals.
pub fn gauss_arg(c: &GaussQ) -> Option<Q> {
    let (re, im) = (c.re, c.im);
    if re.is_zero() && im.is_zero() {
        return None;
    }
    let t = if im.is_zero() {
        if re.is_positive() { q(0, 1) } else { q(1, 2) }
    } else if re.is_zero() {
        if im.is_positive() { q(1, 4) } else { q(3, 4) }
    } else if re.abs() == im.abs() {
        match (re.is_positive(), im.is_positive()) {
            (true, true) => q(1, 8),
            (false, true) => q(3, 8),
            (false, false) => q(5, 8),
            (true, false) => q(7, 8),
        }
    } else {
        return None;
    };
    Some(t)
}

/// `e^{2 pi i t}` for turns that are multiples of a quarter.
pub fn quarter_unit(t: Q) -> Option<GaussQ> {
    let t = turn(t);
    let four = t * Q::from_integer(4);
    if !four.is_integer() {
        return None;
    }
    Some(match four.to_integer() {
        0 => gauss_int(1, 0),
        1 => gauss_int(0, 1),
        2 => gauss_int(-1, 0),
        _ => gauss_int(0, -1),
    })
}

/// Coefficient of a Fermat term: an exact Gaussian rational or a symbolic
/// generic marker assumed nonzero and free of accidental relations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Coef {
    Exact(GaussQ),
    Generic,
}

impl Coef {
    pub fn one() -> Self {
        Coef::Exact(GaussQ::one())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coef::Exact(c) if c.is_zero())
    }

    pub fn exact(&self) -> Option<GaussQ> {
        match self {
            Coef::Exact(c) => Some(*c),
            Coef::Generic => None,
        }
    }

    pub fn conj(&self) -> Coef {
        match self {
            Coef::Exact(c) => Coef::Exact(c.conj()),
            Coef::Generic => Coef::Generic,
        }
    }

    pub fn mul(&self, other: &Coef) -> Coef {
        match (self, other) {
            (Coef::Exact(a), Coef::Exact(b)) => Coef::Exact(a * b),
            _ => Coef::Generic,
        }
    }

    /// `self - f * other` where `f` is a ratio of coefficients; any generic
    /// input gives a generic (nonzero) result.
    pub fn sub_scaled(&self, num: &Coef, den: &Coef, other: &Coef) -> Coef {
        match (self, num, den, other) {
            (Coef::Exact(a), Coef::Exact(n), Coef::Exact(d), Coef::Exact(b)) => {
                Coef::Exact(a - n / d * b)
            }
            _ => Coef::Generic,
        }
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coef::Generic => write!(f, "~"),
            Coef::Exact(c) => write!(f, "{}", fmt_gauss(c)),
        }
    }
}

pub fn fmt_gauss(c: &GaussQ) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => format!("{}", c.re),
        (true, false) => format!("{}i", c.im),
        _ => {
            let sign = if c.im.is_negative() { "-" } else { "+" };
            format!("({}{}{}i)", c.re, sign, c.im.abs())
        }
    }
}

/// Highest common factor of a list; 0 for an empty list.
pub fn hcf_all<I: IntoIterator<Item = i64>>(xs: I) -> i64 {
    xs.into_iter().fold(0, |acc, x| acc.gcd(&x))
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(mat: &mut [Vec<GaussQ>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..mat.len()).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(row, p);
        let inv = GaussQ::one() / mat[row][col];
        for x in mat[row].iter_mut() {
            *x *= inv;
        }
        for r in 0..mat.len() {
            if r != row && !mat[r][col].is_zero() {
                let f = mat[r][col];
                let pivot = mat[row].clone();
                for (x, p) in mat[r].iter_mut().zip(&pivot).take(ncols) {
                    *x -= f * *p;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == mat.len() {
            break;
        }
    }
    pivots
}

pub fn rank(mat: &[Vec<GaussQ>], ncols: usize) -> usize {
    let mut m = mat.to_vec();
    rref(&mut m, ncols).len()
}

/// A basis of the right kernel of `mat`.
pub fn kernel(mat: &[Vec<GaussQ>], ncols: usize) -> Vec<Vec<GaussQ>> {
    let mut m = mat.to_vec();
    let pivots = rref(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![GaussQ::zero(); ncols];
            v[f] = GaussQ::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f];
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn args_on_axes_and_diagonals() {
        assert_eq!(gauss_arg(&gauss_int(-3, 0)), Some(q(1, 2)));
        assert_eq!(gauss_arg(&gauss_int(0, 2)), Some(q(1, 4)));
        assert_eq!(gauss_arg(&gauss_int(-1, -1)), Some(q(5, 8)));
        assert_eq!(gauss_arg(&gauss_int(1, 2)), None);
    }

    #[test]
    fn kernel_of_two_octic_tails() {
        // rows z4^2 - z5^2 and z4^2 - z6^2 in the monomial coordinates
        let m = vec![
            vec![gauss_int(1, 0), gauss_int(-1, 0), gauss_int(0, 0)],
            vec![gauss_int(1, 0), gauss_int(0, 0), gauss_int(-1, 0)],
        ];
        assert_eq!(rank(&m, 3), 2);
        let k = kernel(&m, 3);
        assert_eq!(k.len(), 1);
        assert_eq!(k[0], vec![gauss_int(1, 0); 3]);
    }

    #[test]
    fn quarter_units_round_trip() {
        for k in 0..4 {
            let t = q(k, 4);
            assert_eq!(gauss_arg(&quarter_unit(t).unwrap()), Some(t));
        }
        assert!(quarter_unit(q(1, 8)).is_none());
    }
}
