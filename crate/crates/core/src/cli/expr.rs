//! Small expression language for targets and data functions.
//!
//! An expression is a sum (`+`) of builtin terms:
//!
//! | term | value |
//! |---|---|
//! | `gaussian(A, W)` | `A exp(-|x|^2 / W)` |
//! | `monomial(c, p1, p2)` | `c x1^p1 x2^p2` on states, `c s^p1` on data |
//! | `eigen(re, im, p)` | `s^p exp(lambda r)`, sampled along characteristics |
//! | `const(re, im)` or a bare number | constant |

use std::fmt;

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Const(Complex64),
    Gaussian { amplitude: f64, width: f64 },
    Monomial { coeff: f64, powers: Vec<f64> },
    Eigen { lambda: Complex64, power: f64 },
}

/// A parsed sum of terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExprError(pub String);

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ExprError {}

fn split_top_level(src: &str) -> Result<Vec<&str>, ExprError> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = src.as_bytes();
    for (k, &ch) in bytes.iter().enumerate() {
        match ch {
            b'(' => depth += 1,
            b')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(ExprError(format!("unbalanced ')' at column {}", k + 1)));
                }
            }
            // a '+' right after an exponent marker belongs to a number
            b'+' if depth == 0 && !(k > 0 && matches!(bytes[k - 1], b'e' | b'E') && k > 1 && bytes[k - 2].is_ascii_digit()) => {
                parts.push(&src[start..k]);
                start = k + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(ExprError("unbalanced '('".into()));
    }
    parts.push(&src[start..]);
    Ok(parts)
}

fn parse_term(raw: &str) -> Result<Term, ExprError> {
    let s = raw.trim();
    if s.is_empty() {
        return Err(ExprError("empty term".into()));
    }
    if let Ok(v) = s.parse::<f64>() {
        return Ok(Term::Const(Complex64::new(v, 0.0)));
    }
    let open = s
        .find('(')
        .ok_or_else(|| ExprError(format!("expected name(args) in `{s}`")))?;
    if !s.ends_with(')') {
        return Err(ExprError(format!("missing ')' in `{s}`")));
    }
    let name = s[..open].trim();
    let args = s[open + 1..s.len() - 1]
        .split(',')
        .map(|a| {
            a.trim()
                .parse::<f64>()
                .map_err(|_| ExprError(format!("bad number `{}` in `{s}`", a.trim())))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let arity = |lo: usize, hi: usize| {
        if args.len() < lo || args.len() > hi {
            Err(ExprError(format!(
                "`{name}` takes {lo}..={hi} arguments, got {}",
                args.len()
            )))
        } else {
            Ok(())
        }
    };
    match name {
        "gaussian" => {
            arity(2, 2)?;
            if !(args[1] > 0.0) {
                return Err(ExprError("gaussian width must be positive".into()));
            }
            Ok(Term::Gaussian {
                amplitude: args[0],
                width: args[1],
            })
        }
        "monomial" => {
            arity(1, 3)?;
            Ok(Term::Monomial {
                coeff: args[0],
                powers: args[1..].to_vec(),
            })
        }
        "eigen" => {
            arity(2, 3)?;
            Ok(Term::Eigen {
                lambda: Complex64::new(args[0], args[1]),
                power: args.get(2).copied().unwrap_or(0.0),
            })
        }
        "const" => {
            arity(1, 2)?;
            Ok(Term::Const(Complex64::new(args[0], args.get(1).copied().unwrap_or(0.0))))
        }
        other => Err(ExprError(format!("unknown function `{other}`"))),
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let terms = split_top_level(src)?
            .into_iter()
            .map(parse_term)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Expr { terms })
    }

    /// Whether the expression needs characteristic coordinates `(s, r)`.
    pub fn uses_characteristics(&self) -> bool {
        self.terms.iter().any(|t| matches!(t, Term::Eigen { .. }))
    }

    /// Value at state `x` reached at time `r` from data parameter `s`.
    pub fn eval_target(&self, s: f64, r: f64, x: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| match t {
                Term::Const(c) => *c,
                Term::Gaussian { amplitude, width } => {
                    let r2: f64 = x.iter().map(|v| v * v).sum();
                    Complex64::new(amplitude * (-r2 / width).exp(), 0.0)
                }
                Term::Monomial { coeff, powers } => {
                    let v = powers
                        .iter()
                        .zip(x)
                        .fold(*coeff, |acc, (p, xi)| acc * xi.powf(*p));
                    Complex64::new(v, 0.0)
                }
                Term::Eigen { lambda, power } => (lambda * r).exp() * s.powf(*power),
            })
            .sum()
    }

    /// Value as a data function of the manifold parameter.
    pub fn eval_data(&self, s: f64) -> Result<Complex64, ExprError> {
        self.terms
            .iter()
            .map(|t| match t {
                Term::Const(c) => Ok(*c),
                Term::Monomial { coeff, powers } => {
                    if powers.len() > 1 {
                        return Err(ExprError("data monomials take one power".into()));
                    }
                    Ok(Complex64::new(coeff * s.powf(powers.first().copied().unwrap_or(0.0)), 0.0))
                }
                _ => Err(ExprError(
                    "data functions support const and monomial terms only".into(),
                )),
            })
            .sum()
    }

    /// Checks that [`Expr::eval_data`] accepts this expression.
    pub fn validate_data(&self) -> Result<(), ExprError> {
        self.eval_data(1.0).map(|_| ())
    }
}
