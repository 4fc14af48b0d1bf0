//! Exterior algebra on a four-dimensional chart.
//!
//! Forms are stored densely: a k-form keeps all `4^k` components, kept
//! exactly antisymmetric by construction. With the dimension fixed at four
//! this wastes little space and makes every contraction a direct loop with
//! no index bookkeeping.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::chart::{Chart, Point};
use crate::error::{Error, Result};
use crate::linalg::{inv_spd, Mat4};

/// Default relative half-width for finite-difference stencils. The actual
/// step along coordinate `i` is `step * max(1, |x_i|)`.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// A differential form value at a single point.
#[derive(Clone, Debug)]
pub struct FormValue {
    degree: usize,
    /// Dense components, length `4^degree`, index order
    /// `c[i1*4^(k-1) + i2*4^(k-2) + ... + ik]`.
    c: Vec<f64>,
}

fn flatten(idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * 4 + i)
}

/// Sign of the permutation sorting `idx`; zero if an index repeats.
fn perm_sign(idx: &[usize]) -> i32 {
    let mut sign = 1;
    for a in 0..idx.len() {
        for b in (a + 1)..idx.len() {
            if idx[a] == idx[b] {
                return 0;
            }
            if idx[a] > idx[b] {
                sign = -sign;
            }
        }
    }
    sign
}

/// All strictly increasing multi-indices of length `k` drawn from `0..4`.
pub fn increasing_tuples(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut stack = vec![(Vec::new(), 0usize)];
    while let Some((prefix, start)) = stack.pop() {
        if prefix.len() == k {
            out.push(prefix);
            continue;
        }
        for i in (start..4).rev() {
            let mut next = prefix.clone();
            next.push(i);
            stack.push((next, i + 1));
        }
    }
    out
}

fn permutations(idx: &[usize]) -> Vec<(Vec<usize>, i32)> {
    if idx.is_empty() {
        return vec![(vec![], 1)];
    }
    let mut out = Vec::new();
    for (pos, &head) in idx.iter().enumerate() {
        let mut rest: Vec<usize> = idx.to_vec();
        rest.remove(pos);
        let head_sign = if pos % 2 == 0 { 1 } else { -1 };
        for (tail, tail_sign) in permutations(&rest) {
            let mut perm = vec![head];
            perm.extend(tail);
            out.push((perm, head_sign * tail_sign));
        }
    }
    out
}

impl FormValue {
    pub fn zero(degree: usize) -> Self {
        assert!(degree <= 4, "form degree exceeds dimension");
        FormValue {
            degree,
            c: vec![0.0; 4usize.pow(degree as u32)],
        }
    }

    pub fn scalar(x: f64) -> Self {
        FormValue {
            degree: 0,
            c: vec![x],
        }
    }

    pub fn one_form(comps: [f64; 4]) -> Self {
        FormValue {
            degree: 1,
            c: comps.to_vec(),
        }
    }

    /// Two-form from its matrix of components; the antisymmetric part of
    /// `m` is taken, i.e. `a_{ij} = (m_{ij} - m_{ji}) / 2`.
    pub fn two_form_from_matrix(m: &Mat4) -> Self {
        let mut a = FormValue::zero(2);
        for i in 0..4 {
            for j in 0..4 {
                a.c[flatten(&[i, j])] = 0.5 * (m[i][j] - m[j][i]);
            }
        }
        a
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Component for an arbitrary multi-index.
    pub fn comp(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.degree);
        self.c[flatten(idx)]
    }

    /// Set the component on an increasing multi-index, filling every
    /// permutation with the matching sign.
    pub fn set_antisym(&mut self, idx: &[usize], value: f64) {
        debug_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        for (perm, sign) in permutations(idx) {
            self.c[flatten(&perm)] = f64::from(sign) * value;
        }
    }

    /// Maximum absolute component; a crude but metric-free magnitude.
    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Exterior product. Errors when the combined degree exceeds four.
    pub fn wedge(&self, other: &FormValue) -> Result<FormValue> {
        let (p, q) = (self.degree, other.degree);
        if p + q > 4 {
            return Err(Error::DegreeOverflow(p, q));
        }
        let mut out = FormValue::zero(p + q);
        let subsets = increasing_tuples(p);
        for idx in increasing_tuples(p + q) {
            let mut value = 0.0;
            // Sum over (p, q)-shuffles of the output index set.
            for left in &subsets {
                if !left.iter().all(|i| idx.contains(i)) {
                    continue;
                }
                let right: Vec<usize> = idx.iter().copied().filter(|i| !left.contains(i)).collect();
                let mut arranged = left.clone();
                arranged.extend(&right);
                // Sign of the shuffle relative to the increasing order.
                let sign = perm_sign(&arranged);
                value += f64::from(sign) * self.comp(left) * other.comp(&right);
            }
            out.set_antisym(&idx, value);
        }
        Ok(out)
    }

    /// Interior product with the vector `v` (contraction on the first slot).
    pub fn interior(&self, v: &[f64; 4]) -> Result<FormValue> {
        if self.degree == 0 {
            return Err(Error::InteriorOfScalar);
        }
        let mut out = FormValue::zero(self.degree - 1);
        for idx in increasing_tuples(self.degree - 1) {
            let mut value = 0.0;
            let mut full = vec![0usize; self.degree];
            full[1..].copy_from_slice(&idx);
            for (i, &vi) in v.iter().enumerate() {
                full[0] = i;
                value += vi * self.c[flatten(&full)];
            }
            out.set_antisym(&idx, value);
        }
        Ok(out)
    }

    /// All indices raised with `ginv`.
    fn raised(&self, ginv: &Mat4) -> FormValue {
        let k = self.degree;
        let mut out = FormValue::zero(k);
        for idx in increasing_tuples(k) {
            let mut value = 0.0;
            // Contract against every (not necessarily increasing) tuple.
            let mut tuple = vec![0usize; k];
            loop {
                let mut weight = 1.0;
                for m in 0..k {
                    weight *= ginv[idx[m]][tuple[m]];
                }
                value += weight * self.c[flatten(&tuple)];
                // Advance odometer.
                let mut m = k;
                loop {
                    if m == 0 {
                        break;
                    }
                    m -= 1;
                    tuple[m] += 1;
                    if tuple[m] < 4 {
                        break;
                    }
                    tuple[m] = 0;
                }
                if tuple.iter().all(|&t| t == 0) {
                    break;
                }
            }
            out.set_antisym(&idx, value);
        }
        if k == 0 {
            out.c[0] = self.c[0];
        }
        out
    }

    /// Hodge star with respect to the metric `g`. `orientation` is `+1`
    /// when the chart coordinate order is positively oriented for the
    /// volume form in use and `-1` otherwise.
    pub fn hodge(&self, g: &Mat4, orientation: f64) -> Result<FormValue> {
        let (ginv, det) = inv_spd(g)?;
        let sqrt_det = det.sqrt();
        let k = self.degree;
        let up = self.raised(&ginv);
        let mut out = FormValue::zero(4 - k);
        let kfact: f64 = (1..=k).map(|m| m as f64).product::<f64>().max(1.0);
        for jdx in increasing_tuples(4 - k) {
            let mut value = 0.0;
            for idx_perm in all_tuples(k) {
                let mut eps_idx = idx_perm.clone();
                eps_idx.extend(&jdx);
                let sign = perm_sign(&eps_idx);
                if sign == 0 {
                    continue;
                }
                value += f64::from(sign) * up.c[flatten(&idx_perm)];
            }
            out.set_antisym(&jdx, orientation * sqrt_det * value / kfact);
        }
        if k == 4 {
            // Degree-0 output: the loop above already wrote c[0] via
            // set_antisym on the empty tuple.
        }
        Ok(out)
    }

    /// Pointwise metric norm squared, `<a, a> = (1/k!) a_I a^I`.
    pub fn norm_sq(&self, g: &Mat4) -> Result<f64> {
        let (ginv, _) = inv_spd(g)?;
        let up = self.raised(&ginv);
        let kfact: f64 = (1..=self.degree)
            .map(|m| m as f64)
            .product::<f64>()
            .max(1.0);
        let mut total = 0.0;
        for (a, b) in self.c.iter().zip(up.c.iter()) {
            total += a * b;
        }
        Ok(total / kfact)
    }

    /// Evaluate the form on `degree` many vectors.
    pub fn apply(&self, vectors: &[[f64; 4]]) -> f64 {
        debug_assert_eq!(vectors.len(), self.degree);
        if self.degree == 0 {
            return self.c[0];
        }
        let mut total = 0.0;
        for tuple in all_tuples(self.degree) {
            let mut weight = self.c[flatten(&tuple)];
            if weight == 0.0 {
                continue;
            }
            for (m, &i) in tuple.iter().enumerate() {
                weight *= vectors[m][i];
            }
            total += weight;
        }
        total
    }
}

fn all_tuples(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * 4);
        for t in &out {
            for i in 0..4 {
                let mut u = t.clone();
                u.push(i);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

impl Add for &FormValue {
    type Output = FormValue;
    fn add(self, rhs: &FormValue) -> FormValue {
        assert_eq!(self.degree, rhs.degree, "degree mismatch in form addition");
        let mut out = self.clone();
        for (a, b) in out.c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
        out
    }
}

impl Sub for &FormValue {
    type Output = FormValue;
    fn sub(self, rhs: &FormValue) -> FormValue {
        assert_eq!(
            self.degree, rhs.degree,
            "degree mismatch in form subtraction"
        );
        let mut out = self.clone();
        for (a, b) in out.c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        out
    }
}

impl Mul<f64> for &FormValue {
    type Output = FormValue;
    fn mul(self, rhs: f64) -> FormValue {
        let mut out = self.clone();
        for a in out.c.iter_mut() {
            *a *= rhs;
        }
        out
    }
}

impl Neg for &FormValue {
    type Output = FormValue;
    fn neg(self) -> FormValue {
        self * -1.0
    }
}

/// Lower an index: the one-form `g(v, .)`.
pub fn flat(v: &[f64; 4], g: &Mat4) -> FormValue {
    FormValue::one_form(crate::linalg::matvec(g, v))
}

/// Raise an index: the vector `g^{-1} a` of a one-form.
pub fn sharp(a: &FormValue, g: &Mat4) -> Result<[f64; 4]> {
    if a.degree() != 1 {
        return Err(Error::DegreeMismatch(a.degree(), 1));
    }
    let (ginv, _) = inv_spd(g)?;
    let comps = [a.comp(&[0]), a.comp(&[1]), a.comp(&[2]), a.comp(&[3])];
    Ok(crate::linalg::matvec(&ginv, &comps))
}

/// A k-form-valued field on a chart, evaluated pointwise.
#[derive(Clone)]
pub struct FormField {
    degree: usize,
    eval: Arc<dyn Fn(&Point) -> FormValue + Send + Sync>,
}

impl FormField {
    pub fn new(degree: usize, eval: impl Fn(&Point) -> FormValue + Send + Sync + 'static) -> Self {
        FormField {
            degree,
            eval: Arc::new(eval),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn at(&self, p: &Point) -> FormValue {
        let v = (self.eval)(p);
        debug_assert_eq!(v.degree(), self.degree);
        v
    }
}

/// Five-point central-difference partial derivative of a form field along
/// coordinate `i` (stencil `x ± h, x ± 2h`, fourth-order accurate).
fn fd_partial(
    field: &FormField,
    p: &Point,
    chart: &Chart,
    i: usize,
    step: f64,
) -> Result<FormValue> {
    let h = step * p.coords[i].abs().max(1.0);
    if chart.margin(&p.coords, i) < 2.0 * h {
        return Err(Error::StencilLeavesChart { step: h });
    }
    let f1p = field.at(&p.shifted(i, h));
    let f1m = field.at(&p.shifted(i, -h));
    let f2p = field.at(&p.shifted(i, 2.0 * h));
    let f2m = field.at(&p.shifted(i, -2.0 * h));
    let term1 = &(&f1p - &f1m) * (8.0 / (12.0 * h));
    let term2 = &(&f2p - &f2m) * (1.0 / (12.0 * h));
    Ok(&term1 - &term2)
}

/// Numerical exterior derivative `d` of a form field at `p`, built from
/// central differences of each component field:
/// `d f = sum_i dx^i wedge (partial_i f)`.
pub fn exterior_derivative(
    field: &FormField,
    p: &Point,
    chart: &Chart,
    step: f64,
) -> Result<FormValue> {
    if field.degree() == 4 {
        return Ok(FormValue::zero(4)); // top degree: d vanishes identically
    }
    let mut out = FormValue::zero(field.degree() + 1);
    for i in 0..4 {
        let partial = fd_partial(field, p, chart, i, step)?;
        let mut dxi = [0.0; 4];
        dxi[i] = 1.0;
        out = &out + &FormValue::one_form(dxi).wedge(&partial)?;
    }
    Ok(out)
}

/// Central-difference gradient (coordinate partials) of a scalar field.
pub fn fd_gradient(
    f: &dyn Fn(&Point) -> f64,
    p: &Point,
    chart: &Chart,
    step: f64,
) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (i, slot) in out.iter_mut().enumerate() {
        let h = step * p.coords[i].abs().max(1.0);
        if chart.margin(&p.coords, i) < 2.0 * h {
            return Err(Error::StencilLeavesChart { step: h });
        }
        let f1 = f(&p.shifted(i, h)) - f(&p.shifted(i, -h));
        let f2 = f(&p.shifted(i, 2.0 * h)) - f(&p.shifted(i, -2.0 * h));
        *slot = (8.0 * f1 - f2) / (12.0 * h);
    }
    Ok(out)
}
