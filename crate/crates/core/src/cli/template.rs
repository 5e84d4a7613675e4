use crate::arith::{parse_rational, Matrix, Rational};
use crate::domain::{row_label, Template};
use crate::error::{Error, Result};

use num_traits::{One, Zero};

fn unit(n: usize, entries: &[(usize, i64)]) -> Vec<Rational> {
    let mut r = vec![Rational::zero(); n];
    for &(i, s) in entries {
        r[i] = if s < 0 { -Rational::one() } else { Rational::one() };
    }
    r
}

/// Built-in templates: `interval` (rows `-x_i` then `x_i`), `zone`
/// (interval rows plus `x_i - x_j` for `i != j`) and `octagon` (interval
/// rows plus `±x_i ± x_j` for `i < j`).
pub fn template_preset(name: &str, var_names: &[String]) -> Result<Template> {
    let n = var_names.len();
    let mut rows: Vec<Vec<Rational>> = (0..n).map(|i| unit(n, &[(i, -1)])).collect();
    rows.extend((0..n).map(|i| unit(n, &[(i, 1)])));
    match name {
        "interval" => {}
        "zone" => {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        rows.push(unit(n, &[(i, 1), (j, -1)]));
                    }
                }
            }
        }
        "octagon" => {
            for i in 0..n {
                for j in (i + 1)..n {
                    for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                        rows.push(unit(n, &[(i, si), (j, sj)]));
                    }
                }
            }
        }
        other => {
            return Err(Error::InvalidTemplate(format!(
                "unknown template preset `{other}` (expected interval, zone, octagon or custom=<file>)"
            )))
        }
    }
    Template::from_matrix(Matrix::from_rows(n, rows)?, var_names)
}

/// One row per line: `n` rationals, optionally followed by a label. Blank
/// lines and `#` comments are ignored.
pub fn parse_template(text: &str, var_names: &[String]) -> Result<Template> {
    let n = var_names.len();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < n {
            return Err(Error::Parse {
                line: k + 1,
                column: 1,
                message: format!("expected {n} coefficients, found {}", fields.len()),
            });
        }
        let row = fields[..n]
            .iter()
            .map(|f| {
                parse_rational(f).map_err(|_| Error::Parse {
                    line: k + 1,
                    column: raw.find(f).map_or(1, |c| c + 1),
                    message: format!("invalid coefficient `{f}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let label = fields[n..].join(" ");
        labels.push(if label.is_empty() { row_label(&row, var_names) } else { label });
        rows.push(row);
    }
    Template::new(Matrix::from_rows(n, rows)?, labels)
}
