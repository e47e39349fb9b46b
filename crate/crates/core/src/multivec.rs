//! Graded algebra of multivector fields on a coordinate chart.
//!
//! Components are stored on strictly increasing index tuples with no 1/k!
//! factor, so a table component like `(1-e^{-(b+1)y}) dx^dy` is read
//! directly as the (x,y) entry and `pair2(L, dx, dy)` returns it verbatim.
//!
//! Two independent Schouten-Nijenhuis implementations are provided: a
//! recursion on the defining axioms and a direct coordinate (Grassmann
//! calculus) formula. They must agree; the test suites enforce it.
//!
//! Sign convention: the bracket is normalized so that a Jacobi pair
//! satisfies `[L,L] = 2 E^L` with the Kirillov bracket's sign choices. It
//! differs from the convention generated literally by the recursion axioms
//! by a factor `(-1)^{(p-1)(q-1)}`; for `p <= 1` or `q <= 1` the two agree,
//! so `[X,f] = X(f)` and `[X,Y]` is the Lie bracket in both.

use crate::error::{Error, Result};
use crate::expr::{Expression, SamplingBox};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Coordinate chart: ordered coordinates, declared parameters, default box.
#[derive(Clone, Debug)]
pub struct Chart {
    pub coords: Vec<String>,
    pub params: Vec<String>,
    pub sampling_box: SamplingBox,
}

pub type ChartRef = Arc<Chart>;

impl Chart {
    pub fn new(coords: Vec<String>, params: Vec<String>) -> ChartRef {
        assert!(!coords.is_empty(), "chart dimension must be >= 1");
        let mut uniq = coords.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), coords.len(), "coordinate names must be distinct");
        assert!(
            !coords.iter().any(|c| c == "t") && !params.iter().any(|p| p == "t"),
            "`t` is reserved for time coefficients"
        );
        let sampling_box = SamplingBox::default_for(&coords);
        Arc::new(Chart {
            coords,
            params,
            sampling_box,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn parse_ctx(&self) -> crate::expr::ParseCtx {
        crate::expr::ParseCtx::new(self.coords.clone(), self.params.clone())
    }
}

fn same_chart(a: &ChartRef, b: &ChartRef) -> Result<()> {
    if Arc::ptr_eq(a, b) || a.coords == b.coords {
        Ok(())
    } else {
        Err(Error::ChartMismatch(format!(
            "{:?} vs {:?}",
            a.coords, b.coords
        )))
    }
}

/// Sort an index tuple, returning the permutation sign; `None` on repeats.
pub fn sort_sign(mut idx: Vec<usize>) -> Option<(Vec<usize>, i64)> {
    let mut sign = 1i64;
    for i in 0..idx.len() {
        for j in 0..idx.len().saturating_sub(1 + i) {
            if idx[j] > idx[j + 1] {
                idx.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    for w in idx.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((idx, sign))
}

/// Degree-k antisymmetric contravariant field; components on strictly
/// increasing k-tuples. Degree 0 is a single scalar stored at the empty key.
#[derive(Clone, Debug)]
pub struct MultiVectorField {
    pub chart: ChartRef,
    pub degree: usize,
    comps: BTreeMap<Vec<usize>, Expression>,
}

impl MultiVectorField {
    pub fn zero(chart: &ChartRef, degree: usize) -> MultiVectorField {
        MultiVectorField {
            chart: chart.clone(),
            degree,
            comps: BTreeMap::new(),
        }
    }

    pub fn scalar(chart: &ChartRef, f: Expression) -> MultiVectorField {
        let mut comps = BTreeMap::new();
        if !f.is_zero_const() {
            comps.insert(Vec::new(), f);
        }
        MultiVectorField {
            chart: chart.clone(),
            degree: 0,
            comps,
        }
    }

    /// Build from (increasing tuple, component) pairs; validates indices.
    pub fn from_components(
        chart: &ChartRef,
        degree: usize,
        comps: Vec<(Vec<usize>, Expression)>,
    ) -> Result<MultiVectorField> {
        let n = chart.dim();
        if degree > n {
            return Err(Error::Degree(format!("degree {degree} exceeds dim {n}")));
        }
        let mut map = BTreeMap::new();
        for (idx, e) in comps {
            if idx.len() != degree {
                return Err(Error::Degree(format!(
                    "tuple {idx:?} has wrong length for degree {degree}"
                )));
            }
            if !idx.windows(2).all(|w| w[0] < w[1]) || idx.iter().any(|i| *i >= n) {
                return Err(Error::Degree(format!(
                    "tuple {idx:?} is not strictly increasing in range"
                )));
            }
            if !e.is_zero_const() {
                map.insert(idx, e);
            }
        }
        Ok(MultiVectorField {
            chart: chart.clone(),
            degree,
            comps: map,
        })
    }

    /// The coordinate basis vector field for coordinate `i`.
    pub fn basis_vector(chart: &ChartRef, i: usize) -> MultiVectorField {
        MultiVectorField::from_components(chart, 1, vec![(vec![i], Expression::one())])
            .expect("basis index valid")
    }

    pub fn components(&self) -> &BTreeMap<Vec<usize>, Expression> {
        &self.comps
    }

    /// Stored component (increasing tuple), zero if absent.
    pub fn comp(&self, idx: &[usize]) -> Expression {
        self.comps
            .get(idx)
            .cloned()
            .unwrap_or_else(Expression::zero)
    }

    /// Antisymmetric extension: component for an arbitrary tuple.
    pub fn comp_signed(&self, idx: &[usize]) -> Expression {
        match sort_sign(idx.to_vec()) {
            None => Expression::zero(),
            Some((sorted, sign)) => {
                let c = self.comp(&sorted);
                if sign == 1 {
                    c
                } else {
                    Expression::neg(c)
                }
            }
        }
    }

    fn insert_add(&mut self, idx: Vec<usize>, e: Expression, sign: i64) {
        let e = if sign == 1 { e } else { Expression::neg(e) };
        let cur = self.comps.remove(&idx);
        let sum = match cur {
            Some(c) => Expression::add(vec![c, e]),
            None => e,
        };
        if !sum.is_zero_const() {
            self.comps.insert(idx, sum);
        }
    }

    pub fn add(&self, other: &MultiVectorField) -> Result<MultiVectorField> {
        same_chart(&self.chart, &other.chart)?;
        if self.degree != other.degree {
            return Err(Error::Degree(format!(
                "cannot add degrees {} and {}",
                self.degree, other.degree
            )));
        }
        let mut out = self.clone();
        for (k, v) in &other.comps {
            out.insert_add(k.clone(), v.clone(), 1);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MultiVectorField) -> Result<MultiVectorField> {
        self.add(&other.scale(Expression::int(-1)))
    }

    pub fn scale(&self, c: Expression) -> MultiVectorField {
        if c.is_zero_const() {
            return MultiVectorField::zero(&self.chart, self.degree);
        }
        let comps = self
            .comps
            .iter()
            .map(|(k, v)| (k.clone(), Expression::mul(vec![c.clone(), v.clone()])))
            .collect();
        MultiVectorField {
            chart: self.chart.clone(),
            degree: self.degree,
            comps,
        }
    }

    /// Apply a degree-1 field to a scalar: X(f) = sum_i X^i d_i f.
    pub fn apply(&self, f: &Expression) -> Result<Expression> {
        if self.degree != 1 {
            return Err(Error::Degree(format!(
                "apply requires degree 1, got {}",
                self.degree
            )));
        }
        let mut terms = Vec::new();
        for (idx, v) in &self.comps {
            let d = f.diff(&self.chart.coords[idx[0]]);
            terms.push(Expression::mul(vec![v.clone(), d]));
        }
        Ok(Expression::add(terms))
    }

    /// Serialization map "i,j,..." (comma-joined coordinate names) -> string.
    pub fn to_string_map(&self) -> BTreeMap<String, String> {
        self.comps
            .iter()
            .map(|(idx, e)| {
                let key = idx
                    .iter()
                    .map(|i| self.chart.coords[*i].clone())
                    .collect::<Vec<_>>()
                    .join(",");
                (key, e.render())
            })
            .collect()
    }

    /// Human-readable rendering like `(expr) dx^dy + (expr) dy^dz`.
    pub fn pretty(&self) -> String {
        if self.comps.is_empty() {
            return "0".to_string();
        }
        self.comps
            .iter()
            .map(|(idx, e)| {
                if idx.is_empty() {
                    e.render()
                } else {
                    let basis = idx
                        .iter()
                        .map(|i| format!("d/d{}", self.chart.coords[*i]))
                        .collect::<Vec<_>>()
                        .join("^");
                    format!("{} {}", e.render(), basis)
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// One-form on a chart; hosts differentials df.
#[derive(Clone, Debug)]
pub struct OneForm {
    pub chart: ChartRef,
    pub comps: BTreeMap<usize, Expression>,
}

impl OneForm {
    pub fn new(chart: &ChartRef, comps: BTreeMap<usize, Expression>) -> OneForm {
        OneForm {
            chart: chart.clone(),
            comps,
        }
    }

    /// The differential df.
    pub fn d(chart: &ChartRef, f: &Expression) -> OneForm {
        let comps = chart
            .coords
            .iter()
            .enumerate()
            .filter_map(|(i, c)| {
                let d = f.diff(c);
                if d.is_zero_const() {
                    None
                } else {
                    Some((i, d))
                }
            })
            .collect();
        OneForm {
            chart: chart.clone(),
            comps,
        }
    }

    pub fn comp(&self, i: usize) -> Expression {
        self.comps.get(&i).cloned().unwrap_or_else(Expression::zero)
    }
}

/// Wedge product, graded-commutative and associative.
pub fn wedge(p: &MultiVectorField, q: &MultiVectorField) -> Result<MultiVectorField> {
    same_chart(&p.chart, &q.chart)?;
    let deg = p.degree + q.degree;
    if deg > p.chart.dim() {
        // Degree overflow: identically zero in the exterior algebra, but the
        // operation contract rejects it so callers notice misuse.
        return Err(Error::Degree(format!(
            "wedge degree {deg} exceeds chart dimension {}",
            p.chart.dim()
        )));
    }
    let mut out = MultiVectorField::zero(&p.chart, deg);
    for (ka, va) in &p.comps {
        for (kb, vb) in &q.comps {
            let mut idx = ka.clone();
            idx.extend_from_slice(kb);
            if let Some((sorted, sign)) = sort_sign(idx) {
                out.insert_add(
                    sorted,
                    Expression::mul(vec![va.clone(), vb.clone()]),
                    sign,
                );
            }
        }
    }
    Ok(out)
}

/// Wedge that treats degree overflow as the zero multivector (internal use
/// by the bracket recursion and axiom checks, where overflow legitimately
/// means zero).
pub(crate) fn wedge_or_zero(p: &MultiVectorField, q: &MultiVectorField) -> MultiVectorField {
    let deg = p.degree + q.degree;
    if deg > p.chart.dim() {
        return MultiVectorField::zero(&p.chart, deg.min(p.chart.dim()));
    }
    wedge(p, q).expect("same chart")
}

/// Lie bracket of two vector fields (coordinate formula).
fn lie_bracket(x: &MultiVectorField, y: &MultiVectorField) -> MultiVectorField {
    let chart = &x.chart;
    let mut out = MultiVectorField::zero(chart, 1);
    for (ki, xi) in &x.comps {
        let k = ki[0];
        for (ji, yj) in &y.comps {
            let j = ji[0];
            // X^k d_k Y^j on slot j
            out.insert_add(
                vec![j],
                Expression::mul(vec![xi.clone(), yj.diff(&chart.coords[k])]),
                1,
            );
            // -Y^j d_j X^k on slot k
            out.insert_add(
                vec![k],
                Expression::mul(vec![yj.clone(), xi.diff(&chart.coords[j])]),
                -1,
            );
        }
    }
    out
}

/// Bracket degree: p + q - 1 (clamped at 0 for the (0,0) edge never used).
fn bracket_degree(p: usize, q: usize) -> usize {
    (p + q).saturating_sub(1)
}

fn twist_sign(p: usize, q: usize) -> i64 {
    // (-1)^{(p-1)(q-1)} with the p=0 / q=0 cases giving the same parity as
    // |p-1||q-1| (the exponent is a product of two integers; only parity
    // matters and (0-1)(q-1) has the parity of (q-1)).
    let a = (p as i64) - 1;
    let b = (q as i64) - 1;
    if (a * b).rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Schouten-Nijenhuis bracket via recursion on the defining axioms.
///
/// The recursion computes the literal-axiom bracket; the published-table
/// normalization (see module docs) multiplies by `(-1)^{(p-1)(q-1)}`.
pub fn schouten(p: &MultiVectorField, q: &MultiVectorField) -> Result<MultiVectorField> {
    same_chart(&p.chart, &q.chart)?;
    if p.degree + q.degree < 1 {
        return Err(Error::Degree("schouten requires deg P + deg Q >= 1".into()));
    }
    let lit = sn_literal(p, q);
    Ok(if twist_sign(p.degree, q.degree) == 1 {
        lit
    } else {
        lit.scale(Expression::int(-1))
    })
}

fn sn_literal(p: &MultiVectorField, q: &MultiVectorField) -> MultiVectorField {
    let chart = &p.chart;
    let (dp, dq) = (p.degree, q.degree);
    // clamp: brackets above the chart dimension are identically zero
    let out_deg = bracket_degree(dp, dq).min(chart.dim());
    // bilinearity over monomials
    if p.comps.len() > 1 || q.comps.len() > 1 {
        let mut acc = MultiVectorField::zero(chart, out_deg);
        for (kp, vp) in &p.comps {
            let pm = MultiVectorField {
                chart: chart.clone(),
                degree: dp,
                comps: [(kp.clone(), vp.clone())].into(),
            };
            for (kq, vq) in &q.comps {
                let qm = MultiVectorField {
                    chart: chart.clone(),
                    degree: dq,
                    comps: [(kq.clone(), vq.clone())].into(),
                };
                acc = acc.add(&sn_literal(&pm, &qm)).expect("degree consistent");
            }
        }
        return acc;
    }
    if p.comps.is_empty() || q.comps.is_empty() {
        return MultiVectorField::zero(chart, out_deg);
    }
    if dq >= 2 {
        // Q = Y ^ R with Y the coefficient times the first basis factor:
        // [P, Y^R] = [P,Y]^R + (-1)^{(p-1)*1} Y^[P,R]
        let (kq, vq) = q.comps.iter().next().expect("single monomial");
        let y = MultiVectorField {
            chart: chart.clone(),
            degree: 1,
            comps: [(vec![kq[0]], vq.clone())].into(),
        };
        let r = MultiVectorField {
            chart: chart.clone(),
            degree: dq - 1,
            comps: [(kq[1..].to_vec(), Expression::one())].into(),
        };
        let t1 = wedge_or_zero(&sn_literal(p, &y), &r);
        let t2 = wedge_or_zero(&y, &sn_literal(p, &r));
        let sgn = if (dp as i64 - 1).rem_euclid(2) == 0 { 1 } else { -1 };
        return t1
            .add(&t2.scale(Expression::int(sgn)))
            .expect("degree consistent");
    }
    // q <= 1 from here
    if dp >= 2 || (dp == 0 && dq == 1) {
        // graded antisymmetry: [P,Q] = -(-1)^{(p-1)(q-1)} [Q,P]
        let s = -twist_sign(dp, dq);
        return sn_literal(q, p).scale(Expression::int(s));
    }
    if dp == 1 && dq == 0 {
        let f = q.comps.values().next().expect("single monomial");
        let xf = p.apply(f).expect("degree 1");
        return MultiVectorField::scalar(chart, xf);
    }
    if dp == 1 && dq == 1 {
        return lie_bracket(p, q);
    }
    unreachable!("(0,0) excluded by precondition");
}

/// Schouten-Nijenhuis bracket via the direct Grassmann-calculus formula:
///
/// `[P,Q]_lit = (-1)^{p+1} sum_i (dP/dxi_i)^(d_i Q)
///              - (-1)^{p(q-1)} sum_i (dQ/dxi_i)^(d_i P)`
///
/// where `dP/dxi_i` is the left Grassmann derivative on slot i and `d_i`
/// differentiates coefficients only; the same normalization twist is then
/// applied. Independent of the recursive route; the property suites check
/// their agreement.
pub fn schouten_direct(p: &MultiVectorField, q: &MultiVectorField) -> Result<MultiVectorField> {
    same_chart(&p.chart, &q.chart)?;
    if p.degree + q.degree < 1 {
        return Err(Error::Degree("schouten requires deg P + deg Q >= 1".into()));
    }
    let chart = &p.chart;
    let n = chart.dim();
    let (dp, dq) = (p.degree, q.degree);
    let out_deg = bracket_degree(dp, dq);
    let mut out = MultiVectorField::zero(chart, out_deg.min(n));
    let e1 = if (dp + 1) % 2 == 0 { 1i64 } else { -1 };
    let e2 = {
        let exp = (dp as i64) * (dq as i64 - 1);
        if exp.rem_euclid(2) == 0 {
            -1i64
        } else {
            1
        }
    };
    for i in 0..n {
        // empty terms (degree-0 operands have no Grassmann slots) carry a
        // meaningless degree tag and must not be added
        let t1 = wedge_or_zero(&grassmann_deriv(p, i), &coeff_diff(q, i));
        if !t1.components().is_empty() {
            out = out.add(&t1.scale(Expression::int(e1))).expect("degree");
        }
        let t2 = wedge_or_zero(&grassmann_deriv(q, i), &coeff_diff(p, i));
        if !t2.components().is_empty() {
            out = out.add(&t2.scale(Expression::int(e2))).expect("degree");
        }
    }
    if out_deg > n {
        // identically zero; normalize the degree tag
        return Ok(MultiVectorField::zero(chart, n));
    }
    Ok(if twist_sign(dp, dq) == 1 {
        out
    } else {
        out.scale(Expression::int(-1))
    })
}

/// Left Grassmann derivative on slot `i`: drops index i with sign
/// `(-1)^{position}`.
fn grassmann_deriv(p: &MultiVectorField, i: usize) -> MultiVectorField {
    let mut out = MultiVectorField::zero(&p.chart, p.degree.saturating_sub(1));
    for (idx, v) in &p.comps {
        if let Some(pos) = idx.iter().position(|j| *j == i) {
            let mut rest = idx.clone();
            rest.remove(pos);
            let sign = if pos % 2 == 0 { 1 } else { -1 };
            out.insert_add(rest, v.clone(), sign);
        }
    }
    out
}

/// Differentiate all coefficients by coordinate `i`, keeping the basis.
fn coeff_diff(p: &MultiVectorField, i: usize) -> MultiVectorField {
    let name = &p.chart.coords[i];
    let mut out = MultiVectorField::zero(&p.chart, p.degree);
    for (idx, v) in &p.comps {
        let d = v.diff(name);
        if !d.is_zero_const() {
            out.insert_add(idx.clone(), d, 1);
        }
    }
    out
}

/// Lie derivative of a multivector along a vector field (coordinate
/// formula); agrees with `schouten(X, P)`.
pub fn lie_derivative(x: &MultiVectorField, p: &MultiVectorField) -> Result<MultiVectorField> {
    same_chart(&x.chart, &p.chart)?;
    if x.degree != 1 {
        return Err(Error::Degree(format!(
            "lie_derivative requires a degree-1 field, got {}",
            x.degree
        )));
    }
    let chart = &x.chart;
    if p.degree == 0 {
        let f = p.comp(&[]);
        return Ok(MultiVectorField::scalar(chart, x.apply(&f)?));
    }
    let n = chart.dim();
    let mut out = MultiVectorField::zero(chart, p.degree);
    for (idx, v) in &p.comps {
        // X^k d_k P^I
        for (ki, xk) in &x.comps {
            out.insert_add(
                idx.clone(),
                Expression::mul(vec![xk.clone(), v.diff(&chart.coords[ki[0]])]),
                1,
            );
        }
        // - sum over slots m: P^{i1..l..ik} d_l X^{i_m}
        for (m, &im) in idx.iter().enumerate() {
            for l in 0..n {
                let dxim = match x.comps.get(&vec![im]) {
                    Some(c) => c.diff(&chart.coords[l]),
                    None => Expression::zero(),
                };
                if dxim.is_zero_const() {
                    continue;
                }
                let mut subst = idx.clone();
                subst[m] = l;
                let pc = p.comp_signed(&subst);
                if pc.is_zero_const() {
                    continue;
                }
                out.insert_add(idx.clone(), Expression::mul(vec![pc, dxim]), -1);
            }
        }
    }
    Ok(out)
}

/// Musical map: `sharp(L, a)^v = sum_mu L^{mu v} a_mu` (antisymmetric
/// extension of the stored components).
pub fn sharp(lambda: &MultiVectorField, alpha: &OneForm) -> Result<MultiVectorField> {
    if lambda.degree != 2 {
        return Err(Error::Degree(format!(
            "sharp requires a bivector, got degree {}",
            lambda.degree
        )));
    }
    same_chart(&lambda.chart, &alpha.chart)?;
    let n = lambda.chart.dim();
    let mut out = MultiVectorField::zero(&lambda.chart, 1);
    for v in 0..n {
        let mut terms = Vec::new();
        for (mu, amu) in &alpha.comps {
            let l = lambda.comp_signed(&[*mu, v]);
            if !l.is_zero_const() {
                terms.push(Expression::mul(vec![l, amu.clone()]));
            }
        }
        let e = Expression::add(terms);
        if !e.is_zero_const() {
            out.insert_add(vec![v], e, 1);
        }
    }
    Ok(out)
}

/// Pairing `L(alpha, beta)`; bilinear and antisymmetric.
pub fn pair2(lambda: &MultiVectorField, alpha: &OneForm, beta: &OneForm) -> Result<Expression> {
    if lambda.degree != 2 {
        return Err(Error::Degree(format!(
            "pair2 requires a bivector, got degree {}",
            lambda.degree
        )));
    }
    same_chart(&lambda.chart, &alpha.chart)?;
    same_chart(&lambda.chart, &beta.chart)?;
    let mut terms = Vec::new();
    for (idx, l) in &lambda.comps {
        let (mu, nu) = (idx[0], idx[1]);
        // L^{mu nu} (a_mu b_nu - a_nu b_mu)
        terms.push(Expression::mul(vec![
            l.clone(),
            Expression::sub(
                Expression::mul(vec![alpha.comp(mu), beta.comp(nu)]),
                Expression::mul(vec![alpha.comp(nu), beta.comp(mu)]),
            ),
        ]));
    }
    Ok(Expression::add(terms))
}

/// Interior product (contraction on the first slot): `i_phi P`.
pub fn interior(phi: &OneForm, p: &MultiVectorField) -> Result<MultiVectorField> {
    if p.degree == 0 {
        return Err(Error::Degree("interior of a degree-0 field".into()));
    }
    same_chart(&phi.chart, &p.chart)?;
    let mut out = MultiVectorField::zero(&p.chart, p.degree - 1);
    for (idx, v) in &p.comps {
        // contract slot 0: phi_{i1} P^{i1 i2..ik}; expanding the
        // antisymmetric sum over which stored index is hit gives
        // alternating signs.
        for (pos, i) in idx.iter().enumerate() {
            let a = phi.comp(*i);
            if a.is_zero_const() {
                continue;
            }
            let mut rest = idx.clone();
            rest.remove(pos);
            let sign = if pos % 2 == 0 { 1 } else { -1 };
            out.insert_add(rest, Expression::mul(vec![a, v.clone()]), sign);
        }
    }
    Ok(out)
}

/// Random multivector with small polynomial/exponential coefficients, for
/// property suites and benchmarks.
pub fn random_multivector(
    chart: &ChartRef,
    degree: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> MultiVectorField {
    use rand::Rng;
    let n = chart.dim();
    assert!(degree <= n);
    // enumerate increasing tuples
    fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for first in 0..n {
            for rest in tuples(n, k - 1) {
                if rest.iter().all(|r| *r > first) {
                    let mut t = vec![first];
                    t.extend(rest);
                    out.push(t);
                }
            }
        }
        out
    }
    let mut comps = Vec::new();
    for idx in tuples(n, degree) {
        if degree > 0 && rng.gen_bool(0.3) {
            continue; // sparse components
        }
        let mut factors = vec![Expression::int(rng.gen_range(-3i64..=3))];
        for _ in 0..rng.gen_range(0usize..=2) {
            let v = Expression::var(&chart.coords[rng.gen_range(0..n)]);
            if rng.gen_bool(0.25) {
                factors.push(Expression::exp(v));
            } else {
                factors.push(v);
            }
        }
        comps.push((idx, Expression::mul(factors)));
    }
    MultiVectorField::from_components(chart, degree, comps).expect("valid random components")
}

/// Commutator of two vector fields (public alias of the Lie bracket).
pub fn commutator(x: &MultiVectorField, y: &MultiVectorField) -> Result<MultiVectorField> {
    same_chart(&x.chart, &y.chart)?;
    if x.degree != 1 || y.degree != 1 {
        return Err(Error::Degree("commutator requires two vector fields".into()));
    }
    Ok(lie_bracket(x, y))
}
