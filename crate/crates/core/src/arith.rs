//! Exact arithmetic: arbitrary-precision rationals, the extended reals
//! `{-inf} ∪ Q ∪ {+inf}` and small dense matrices over Q.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational number, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// Builds the rational `n`.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Builds the rational `n / d`. Panics if `d == 0`.
pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses an integer (`-12`), a fraction (`3/4`, `-3/4`) or an exact decimal
/// (`0.5`, `-1.25e3` is not accepted). Decimals are converted exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse {
        line: 0,
        column: 0,
        message: format!("invalid rational literal `{text}`"),
    };
    if s.is_empty() {
        return Err(bad());
    }
    let (neg, body) = match s.as_bytes()[0] {
        b'-' => (true, s[1..].trim_start()),
        b'+' => (false, s[1..].trim_start()),
        _ => (false, s),
    };
    let value = if let Some((n, d)) = body.split_once('/') {
        let n = parse_digits(n.trim()).ok_or_else(bad)?;
        let d = parse_digits(d.trim()).ok_or_else(bad)?;
        if d.is_zero() {
            return Err(Error::Parse {
                line: 0,
                column: 0,
                message: format!("zero denominator in `{text}`"),
            });
        }
        Rational::new(n, d)
    } else if let Some((whole, fracpart)) = body.split_once('.') {
        if whole.is_empty() && fracpart.is_empty() {
            return Err(bad());
        }
        let w = if whole.is_empty() {
            BigInt::zero()
        } else {
            parse_digits(whole).ok_or_else(bad)?
        };
        let f = if fracpart.is_empty() {
            BigInt::zero()
        } else {
            parse_digits(fracpart).ok_or_else(bad)?
        };
        let scale = num_traits::pow(BigInt::from(10), fracpart.len());
        Rational::new(w * &scale + f, scale)
    } else {
        Rational::from_integer(parse_digits(body).ok_or_else(bad)?)
    };
    Ok(if neg { -value } else { value })
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(s).ok()
}

/// Prints `p` or `p/q`.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// An element of the complete linear order `R ∪ {-inf, +inf}` restricted to
/// rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtRational {
    NegInf,
    Fin(Rational),
    PosInf,
}

impl ExtRational {
    pub fn fin(q: Rational) -> Self {
        ExtRational::Fin(q)
    }

    pub fn from_int(n: i64) -> Self {
        ExtRational::Fin(int(n))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRational::Fin(_))
    }

    pub fn is_neg_inf(&self) -> bool {
        matches!(self, ExtRational::NegInf)
    }

    pub fn is_pos_inf(&self) -> bool {
        matches!(self, ExtRational::PosInf)
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Fin(q) => Some(q),
            _ => None,
        }
    }

    /// Addition of a finite rational; infinities absorb.
    pub fn add_finite(&self, q: &Rational) -> ExtRational {
        match self {
            ExtRational::Fin(p) => ExtRational::Fin(p + q),
            other => other.clone(),
        }
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtRational::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Fin(a), Fin(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Rational> for ExtRational {
    fn from(q: Rational) -> Self {
        ExtRational::Fin(q)
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::NegInf => f.write_str("-inf"),
            ExtRational::PosInf => f.write_str("inf"),
            ExtRational::Fin(q) => f.write_str(&format_rational(q)),
        }
    }
}

impl FromStr for ExtRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" => Ok(ExtRational::PosInf),
            "-inf" => Ok(ExtRational::NegInf),
            other => parse_rational(other).map(ExtRational::Fin),
        }
    }
}

impl Serialize for ExtRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Dense rational matrix in row-major order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Builds a matrix from explicit rows; every row must have `cols` entries.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Rational>>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend(row.iter().cloned());
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Convenience constructor from small integers.
    pub fn from_ints(cols: usize, rows: &[&[i64]]) -> Result<Self> {
        Matrix::from_rows(
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&v| int(v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Rational]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "matrix with {} columns applied to vector of length {}",
                self.cols,
                x.len()
            )));
        }
        Ok(self.row_iter().map(|r| dot(r, x)).collect())
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] = &out.data[idx] + a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "cannot stack {} columns over {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, k: &Rational) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let v = self.get(i, j);
                    if i == j {
                        v.is_one()
                    } else {
                        v.is_zero()
                    }
                })
            })
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub fn vec_add(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn ints(values: &[i64]) -> Vec<Rational> {
    values.iter().map(|&v| int(v)).collect()
}

impl Add<&Rational> for &ExtRational {
    type Output = ExtRational;

    fn add(self, rhs: &Rational) -> ExtRational {
        self.add_finite(rhs)
    }
}

impl Neg for ExtRational {
    type Output = ExtRational;

    fn neg(self) -> ExtRational {
        match self {
            ExtRational::NegInf => ExtRational::PosInf,
            ExtRational::PosInf => ExtRational::NegInf,
            ExtRational::Fin(q) => ExtRational::Fin(-q),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!(parse_rational("12").unwrap(), int(12));
        assert_eq!(parse_rational("-3/6").unwrap(), frac(-1, 2));
        assert_eq!(parse_rational("0.5").unwrap(), frac(1, 2));
        assert_eq!(parse_rational("-1.25").unwrap(), frac(-5, 4));
        assert_eq!(parse_rational(".75").unwrap(), frac(3, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn ext_order_is_total() {
        let mut v = vec![
            ExtRational::PosInf,
            ExtRational::from_int(3),
            ExtRational::NegInf,
            ExtRational::fin(frac(-1, 2)),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                ExtRational::NegInf,
                ExtRational::fin(frac(-1, 2)),
                ExtRational::from_int(3),
                ExtRational::PosInf
            ]
        );
    }

    #[test]
    fn ext_display_roundtrip() {
        for s in ["inf", "-inf", "7", "-7/3"] {
            let e: ExtRational = s.parse().unwrap();
            assert_eq!(e.to_string(), s);
        }
    }

    #[test]
    fn matrix_dimensions_are_checked() {
        let a = Matrix::from_ints(2, &[&[1, 2], &[3, 4]]).unwrap();
        assert!(a.mul_vec(&ints(&[1, 2, 3])).is_err());
        assert_eq!(a.mul_vec(&ints(&[1, 1])).unwrap(), ints(&[3, 7]));
        let b = Matrix::from_ints(3, &[&[1, 0, 0]]).unwrap();
        assert!(a.mul(&b).is_err());
        assert!(Matrix::from_ints(2, &[&[1]]).is_err());
        assert_eq!(a.mul(&Matrix::identity(2)).unwrap(), a);
    }
}
