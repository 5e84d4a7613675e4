//! Template linear constraint domains.
//!
//! A template is a fixed m×n matrix `T`; an abstract value `d` in
//! `(Q ∪ {±inf})^m` stands for the polyhedron `{x | T x <= d}`.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{dot, ExtRational, Matrix, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    matrix: Matrix,
    labels: Vec<String>,
}

impl Template {
    /// Builds a template. Rejects zero-row templates, label count mismatches
    /// and duplicated rows.
    pub fn new(matrix: Matrix, labels: Vec<String>) -> Result<Self> {
        if matrix.rows() == 0 {
            return Err(Error::InvalidTemplate("a template needs at least one row".into()));
        }
        if labels.len() != matrix.rows() {
            return Err(Error::InvalidTemplate(format!(
                "{} labels for {} rows",
                labels.len(),
                matrix.rows()
            )));
        }
        for i in 0..matrix.rows() {
            for j in (i + 1)..matrix.rows() {
                if matrix.row(i) == matrix.row(j) {
                    return Err(Error::DuplicateTemplateRow { first: i, second: j });
                }
            }
        }
        Ok(Template { matrix, labels })
    }

    /// Template with generated labels of the form `c1*x1 + ...`.
    pub fn from_matrix(matrix: Matrix, var_names: &[String]) -> Result<Self> {
        let labels = matrix.row_iter().map(|r| row_label(r, var_names)).collect();
        Template::new(matrix, labels)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        self.matrix.row(i)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of template rows (m).
    pub fn len(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.rows() == 0
    }

    /// Number of program variables (n).
    pub fn num_vars(&self) -> usize {
        self.matrix.cols()
    }
}

/// Renders a template row as a linear form, e.g. `x1 - x2`.
pub fn row_label(row: &[Rational], var_names: &[String]) -> String {
    use num_traits::{One, Signed};
    let mut out = String::new();
    for (j, c) in row.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let name = var_names.get(j).cloned().unwrap_or_else(|| format!("x{}", j + 1));
        let mag = c.abs();
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        if !mag.is_one() {
            out.push_str(&crate::arith::format_rational(&mag));
            out.push('*');
        }
        out.push_str(&name);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Element of the template domain: one bound per template row.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbstractValue(pub Vec<ExtRational>);

impl AbstractValue {
    pub fn bottom(m: usize) -> Self {
        AbstractValue(vec![ExtRational::NegInf; m])
    }

    pub fn top(m: usize) -> Self {
        AbstractValue(vec![ExtRational::PosInf; m])
    }

    pub fn from_finite(values: Vec<Rational>) -> Self {
        AbstractValue(values.into_iter().map(ExtRational::Fin).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> &ExtRational {
        &self.0[i]
    }

    /// Componentwise order.
    pub fn le(&self, other: &AbstractValue) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn join(&self, other: &AbstractValue) -> AbstractValue {
        AbstractValue(self.0.iter().zip(&other.0).map(|(a, b)| a.max(b).clone()).collect())
    }

    pub fn meet(&self, other: &AbstractValue) -> AbstractValue {
        AbstractValue(self.0.iter().zip(&other.0).map(|(a, b)| a.min(b).clone()).collect())
    }

    /// Some component is `-inf`, so the concretization is empty.
    pub fn has_neg_inf(&self) -> bool {
        self.0.iter().any(ExtRational::is_neg_inf)
    }
}

impl fmt::Display for AbstractValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// α(R^n): each row is unbounded unless it is identically zero.
pub fn alpha_of_universe(tpl: &Template) -> AbstractValue {
    AbstractValue(
        tpl.matrix
            .row_iter()
            .map(|r| {
                if r.iter().all(Zero::is_zero) {
                    ExtRational::Fin(Rational::zero())
                } else {
                    ExtRational::PosInf
                }
            })
            .collect(),
    )
}

/// Membership of a concrete point in γ(d).
pub fn gamma_contains(tpl: &Template, d: &AbstractValue, x: &[Rational]) -> Result<bool> {
    if d.len() != tpl.len() || x.len() != tpl.num_vars() {
        return Err(Error::Dimension(format!(
            "template is {}x{}, value has {} rows, point has {} entries",
            tpl.len(),
            tpl.num_vars(),
            d.len(),
            x.len()
        )));
    }
    Ok(tpl.matrix.row_iter().zip(&d.0).all(|(row, bound)| match bound {
        ExtRational::PosInf => true,
        ExtRational::NegInf => false,
        ExtRational::Fin(b) => dot(row, x) <= *b,
    }))
}
