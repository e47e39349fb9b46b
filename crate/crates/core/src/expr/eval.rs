//! Floating-point evaluation, including the exponential integral.

use super::{Expression, Node, Point};
use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub(super) fn eval(e: &Expression, p: &Point) -> Result<f64> {
    let v = match e.node() {
        Node::Const(r) => r.to_f64(),
        Node::Var(n) | Node::Param(n) => p
            .get(n)
            .ok_or_else(|| Error::Unbound(n.clone()))?,
        Node::Add(terms) => {
            let mut acc = 0.0;
            for t in terms {
                acc += eval(t, p)?;
            }
            acc
        }
        Node::Mul(factors) => {
            let mut acc = 1.0;
            for f in factors {
                acc *= eval(f, p)?;
            }
            acc
        }
        Node::Pow(base, r) => {
            let b = eval(base, p)?;
            if r.is_integer() {
                let n = r.num();
                if n < 0 && b == 0.0 {
                    return Err(Error::Domain("division by zero".into()));
                }
                b.powi(n.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
            } else {
                if b < 0.0 {
                    return Err(Error::Domain(format!(
                        "fractional power of negative base {b}"
                    )));
                }
                b.powf(r.to_f64())
            }
        }
        Node::Exp(u) => eval(u, p)?.exp(),
        Node::Ln(u) => {
            let x = eval(u, p)?;
            if x <= 0.0 {
                return Err(Error::Domain(format!("ln of nonpositive value {x}")));
            }
            x.ln()
        }
        Node::Sinh(u) => eval(u, p)?.sinh(),
        Node::Cosh(u) => eval(u, p)?.cosh(),
        Node::Sin(u) => eval(u, p)?.sin(),
        Node::Cos(u) => eval(u, p)?.cos(),
        Node::ExpInt1(u) => expint1(eval(u, p)?)?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("non-finite result {v}")))
    }
}

/// Evaluation with a first-order propagated roundoff bound: returns the
/// value together with an upper estimate of the absolute f64 error
/// accumulated while computing it. The bound is what makes zero-testing of
/// expressions with large cancelling terms (e.g. products of e^{10x})
/// reliable: a residual below the bound is indistinguishable from zero.
pub(super) fn eval_err(e: &Expression, p: &Point) -> Result<(f64, f64)> {
    const EPS: f64 = f64::EPSILON;
    let (v, err) = match e.node() {
        Node::Const(r) => {
            let v = r.to_f64();
            (v, EPS * v.abs())
        }
        Node::Var(n) | Node::Param(n) => {
            let v = p.get(n).ok_or_else(|| Error::Unbound(n.clone()))?;
            (v, EPS * v.abs())
        }
        Node::Add(terms) => {
            let mut acc = 0.0f64;
            let mut err = 0.0f64;
            for t in terms {
                let (tv, te) = eval_err(t, p)?;
                acc += tv;
                err += te + EPS * tv.abs();
            }
            (acc, err)
        }
        Node::Mul(factors) => {
            let mut acc = 1.0f64;
            let mut err = 0.0f64;
            for f in factors {
                let (fv, fe) = eval_err(f, p)?;
                err = acc.abs() * fe + fv.abs() * err + EPS * (acc * fv).abs();
                acc *= fv;
            }
            (acc, err)
        }
        Node::Pow(base, r) => {
            let (b, be) = eval_err(base, p)?;
            let v = eval(e, p)?;
            let deriv = if b != 0.0 {
                (r.to_f64() * v / b).abs()
            } else {
                0.0
            };
            (v, deriv * be + EPS * v.abs())
        }
        Node::Exp(u) => {
            let (uv, ue) = eval_err(u, p)?;
            let v = uv.exp();
            (v, v.abs() * (ue + EPS))
        }
        Node::Ln(u) => {
            let (uv, ue) = eval_err(u, p)?;
            if uv <= 0.0 {
                return Err(Error::Domain(format!("ln of nonpositive value {uv}")));
            }
            let v = uv.ln();
            (v, ue / uv + EPS * v.abs())
        }
        Node::Sinh(u) => {
            let (uv, ue) = eval_err(u, p)?;
            (uv.sinh(), uv.cosh() * (ue + EPS))
        }
        Node::Cosh(u) => {
            let (uv, ue) = eval_err(u, p)?;
            (uv.cosh(), uv.cosh() * (ue + EPS))
        }
        Node::Sin(u) => {
            let (uv, ue) = eval_err(u, p)?;
            (uv.sin(), ue + EPS)
        }
        Node::Cos(u) => {
            let (uv, ue) = eval_err(u, p)?;
            (uv.cos(), ue + EPS)
        }
        Node::ExpInt1(u) => {
            let (uv, ue) = eval_err(u, p)?;
            let v = expint1(uv)?;
            // |E1'(u)| = e^{-u} / |u|
            ((v), ((-uv).exp() / uv.abs()) * ue + EPS * v.abs())
        }
    };
    if v.is_finite() && err.is_finite() {
        Ok((v, err))
    } else {
        Err(Error::Domain(format!(
            "non-finite evaluation (value {v}, error bound {err})"
        )))
    }
}

/// Exponential integral E1 extended to negative arguments by the real
/// principal value: `expint1(u) = E1(u)` for `u > 0` and `-Ei(-u)` (Cauchy
/// principal value) for `u < 0`. `u = 0` is a domain error.
///
/// Numeric method: convergent power series for `|u| <= 4`, modified Lentz
/// continued fraction for `u > 4`, and the all-positive Ei series for
/// `u < -4` (it converges for every argument; only speed varies).
pub fn expint1(u: f64) -> Result<f64> {
    if u == 0.0 || !u.is_finite() {
        return Err(Error::Domain(format!("Ei1 of invalid argument {u}")));
    }
    if u > 4.0 {
        return Ok(e1_continued_fraction(u));
    }
    // E1(u) = -gamma - ln|u| + sum_{k>=1} (-1)^{k+1} u^k / (k*k!)
    // For u < 0 the same series computes -Ei(-u) (principal value), since
    // Ei(w) = gamma + ln(w) + sum w^k/(k*k!) for w > 0.
    let mut sum = 0.0f64;
    let mut term = 1.0f64; // u^k / k!
    for k in 1..=200 {
        term *= u / k as f64;
        let contrib = if k % 2 == 1 { term } else { -term } / k as f64;
        sum += contrib;
        if contrib.abs() < 1e-17 * (1.0 + sum.abs()) {
            break;
        }
    }
    Ok(-EULER_GAMMA - u.abs().ln() + sum)
}

/// E1 via the continued fraction e^{-u}/(u+1- 1/(u+3- 4/(u+5- 9/(...)))),
/// evaluated with the modified Lentz algorithm. Accurate for u > 4.
fn e1_continued_fraction(u: f64) -> f64 {
    let tiny = 1e-300;
    // b0 = u + 1, a_k = -k^2, b_k = u + 2k + 1
    let mut b = u + 1.0;
    let mut a;
    let mut f = b;
    let mut c = f;
    let mut d = 0.0f64;
    for k in 1..200 {
        a = -((k * k) as f64);
        b = u + (2 * k + 1) as f64;
        d = b + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-u).exp() / f
}
