//! Measure-consistent orthonormal polynomial bases, Gauss quadrature rules,
//! and expectations of triple products of basis polynomials.
//!
//! Classical recurrence coefficients are used where they exist (probabilists'
//! Hermite for the Gaussian, Laguerre for the unit-rate exponential, Legendre
//! for the uniform), after affine standardization of the marginal. All other
//! measures go through a discretized Stieltjes procedure on composite
//! Gauss-Legendre panels.
//!
//! Polynomials follow the positive-leading-coefficient convention produced by
//! the three-term recurrence, so e.g. the degree-one Laguerre basis element is
//! `z - 1`, not `1 - z`.

use crate::distributions::Marginal;
use crate::special::factorial;
use crate::{Error, Result};

/// Classical family tag for a recurrence table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Hermite,
    Laguerre,
    Legendre,
    /// Numerically constructed (Stieltjes) basis.
    Custom,
}

/// Three-term recurrence coefficients of the orthonormal basis of one
/// marginal, in standardized coordinates.
#[derive(Debug, Clone)]
pub struct RecurrenceTable {
    marginal: Marginal,
    shift: f64,
    scale: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    m_max: usize,
    family: Family,
}

/// Gauss quadrature rule in physical coordinates; weights are probability
/// weights summing to one.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub n: usize,
}

impl QuadratureRule {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Builds the recurrence table of the orthonormal basis for `marginal` up to
/// degree `m_max`.
pub fn build_recurrence(marginal: &Marginal, m_max: usize) -> Result<RecurrenceTable> {
    let (shift, scale) = marginal.standardization();
    let (family, alpha, beta) = match marginal {
        Marginal::Gaussian { .. } => {
            let alpha = vec![0.0; m_max + 1];
            let mut beta = vec![1.0; m_max + 1];
            for (j, b) in beta.iter_mut().enumerate().skip(1) {
                *b = j as f64;
            }
            (Family::Hermite, alpha, beta)
        }
        Marginal::Exponential { .. } => {
            let mut alpha = vec![0.0; m_max + 1];
            let mut beta = vec![1.0; m_max + 1];
            for j in 0..=m_max {
                alpha[j] = (2 * j + 1) as f64;
                if j >= 1 {
                    beta[j] = (j * j) as f64;
                }
            }
            (Family::Laguerre, alpha, beta)
        }
        Marginal::Uniform { .. } => {
            let alpha = vec![0.0; m_max + 1];
            let mut beta = vec![1.0; m_max + 1];
            for (j, b) in beta.iter_mut().enumerate().skip(1) {
                let jj = (j * j) as f64;
                *b = jj / (4.0 * jj - 1.0);
            }
            (Family::Legendre, alpha, beta)
        }
        _ => {
            let (alpha, beta) = stieltjes(marginal, m_max)?;
            (Family::Custom, alpha, beta)
        }
    };
    Ok(RecurrenceTable { marginal: marginal.clone(), shift, scale, alpha, beta, m_max, family })
}

impl RecurrenceTable {
    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn marginal(&self) -> &Marginal {
        &self.marginal
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Whether the standardized measure is symmetric about zero, which forces
    /// odd-total-degree product expectations to vanish identically.
    pub fn symmetric_measure(&self) -> bool {
        matches!(
            self.marginal,
            Marginal::Gaussian { .. }
                | Marginal::Uniform { .. }
                | Marginal::TruncatedGaussian { .. }
        )
    }

    fn standardize(&self, x: f64) -> f64 {
        (x - self.shift) / self.scale
    }

    /// Evaluates the single orthonormal basis polynomial of the given degree.
    pub fn eval_orthonormal(&self, degree: usize, x: f64) -> Result<f64> {
        if degree > self.m_max {
            return Err(Error::DegreeExceedsTable { degree, m_max: self.m_max });
        }
        let mut buf = vec![0.0; degree + 1];
        self.eval_all(x, degree, &mut buf);
        Ok(buf[degree])
    }

    /// Fills `buf[j] = psi_j(x)` for `j = 0..=up_to` by forward recurrence.
    /// `buf` must have at least `up_to + 1` entries; `up_to <= m_max`.
    pub fn eval_all(&self, x: f64, up_to: usize, buf: &mut [f64]) {
        debug_assert!(up_to <= self.m_max);
        let z = self.standardize(x);
        buf[0] = 1.0;
        if up_to == 0 {
            return;
        }
        buf[1] = (z - self.alpha[0]) / self.beta[1].sqrt();
        for j in 1..up_to {
            buf[j + 1] = ((z - self.alpha[j]) * buf[j] - self.beta[j].sqrt() * buf[j - 1])
                / self.beta[j + 1].sqrt();
        }
    }

    /// Gauss rule with `n` nodes: eigen-decomposition of the Jacobi matrix
    /// built from the recurrence coefficients, nodes mapped back to physical
    /// coordinates.
    pub fn gauss_rule(&self, n: usize) -> Result<QuadratureRule> {
        if n == 0 || n > self.m_max {
            return Err(Error::OrderExceedsTable { n, m_max: self.m_max });
        }
        let mut d: Vec<f64> = self.alpha[..n].to_vec();
        let mut e: Vec<f64> = (1..n).map(|j| self.beta[j].sqrt()).collect();
        e.push(0.0);
        let mut first_row = vec![0.0; n];
        first_row[0] = 1.0;
        tridiagonal_ql(&mut d, &mut e, &mut first_row)?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let nodes: Vec<f64> = order.iter().map(|&k| self.shift + self.scale * d[k]).collect();
        let weights: Vec<f64> =
            order.iter().map(|&k| self.beta[0] * first_row[k] * first_row[k]).collect();
        for w in nodes.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::EigenNonConvergence { sweeps: QL_SWEEP_BOUND });
            }
        }
        Ok(QuadratureRule { nodes, weights, n })
    }
}

const QL_SWEEP_BOUND: usize = 50;

/// Implicit-shift QL iteration for a symmetric tridiagonal matrix, rotating a
/// single accumulator row (the first row of the eigenvector matrix), which is
/// all the Golub-Welsch weight formula needs.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_SWEEP_BOUND {
                return Err(Error::EigenNonConvergence { sweeps: QL_SWEEP_BOUND });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut underflowed = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflowed = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflowed {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre_unit(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=q {
                let jj = j as f64;
                let p2 = ((2.0 * jj - 1.0) * x * p1 - (jj - 1.0) * p0) / jj;
                p0 = p1;
                p1 = p2;
            }
            dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    (nodes, weights)
}

const STIELTJES_GL_POINTS: usize = 20;
const STIELTJES_INITIAL_PANELS: usize = 10;
const STIELTJES_MAX_DOUBLINGS: usize = 8;
const STIELTJES_TOL: f64 = 1e-10;

/// Discretized Stieltjes procedure on the standardized measure. Unbounded
/// supports are truncated at the 1e-14 probability quantiles; the panel count
/// doubles until the recurrence coefficients stabilize. Measures with an
/// algebraic endpoint singularity (Weibull at the origin) get a geometric
/// panel grading toward that endpoint, which plain equal panels cannot
/// resolve to the stabilization tolerance.
fn stieltjes(marginal: &Marginal, m_max: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (shift, scale) = marginal.standardization();
    let (sup_lo, sup_hi) = marginal.support();
    let lo = if sup_lo.is_finite() { sup_lo } else { marginal.quantile(1e-14) };
    let hi = if sup_hi.is_finite() { sup_hi } else { upper_truncation(marginal, m_max) };
    let (zlo, zhi) = ((lo - shift) / scale, (hi - shift) / scale);
    let graded_origin = matches!(marginal, Marginal::Weibull { .. });

    let (gl_nodes, gl_weights) = gauss_legendre_unit(STIELTJES_GL_POINTS);
    let weight_fn = |z: f64| marginal.pdf(shift + scale * z) * scale;

    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut panels = STIELTJES_INITIAL_PANELS;
    for _ in 0..=STIELTJES_MAX_DOUBLINGS {
        let mut edges = Vec::with_capacity(panels + 40);
        let width = (zhi - zlo) / panels as f64;
        edges.push(zlo);
        if graded_origin {
            // Subdivide the first panel geometrically toward the endpoint.
            for g in (0..30).rev() {
                edges.push(zlo + width * 0.25_f64.powi(g + 1));
            }
        }
        for p in 1..=panels {
            edges.push(zlo + width * p as f64);
        }

        let mut t = Vec::with_capacity(edges.len() * STIELTJES_GL_POINTS);
        let mut om = Vec::with_capacity(edges.len() * STIELTJES_GL_POINTS);
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (&u, &w) in gl_nodes.iter().zip(&gl_weights) {
                let z = mid + half * u;
                t.push(z);
                om.push(w * half * weight_fn(z));
            }
        }

        let coeffs = stieltjes_recurrence(&t, &om, m_max)?;
        if let Some((pa, pb)) = &previous {
            let delta = coeffs
                .0
                .iter()
                .zip(pa)
                .chain(coeffs.1.iter().zip(pb))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if delta <= STIELTJES_TOL {
                return Ok(coeffs);
            }
        }
        previous = Some(coeffs);
        panels *= 2;
    }
    Err(Error::EigenNonConvergence { sweeps: STIELTJES_MAX_DOUBLINGS })
}

/// Upper truncation point for an unbounded support. The recurrence
/// coefficients up to degree `m_max` are fixed by the moments up to order
/// `2 m_max`, so the cut must leave the tail contribution to that moment
/// below the stabilization tolerance; a bare probability quantile is not
/// enough for heavy-tailed measures.
fn upper_truncation(marginal: &Marginal, m_max: usize) -> f64 {
    let order = (2 * m_max + 2) as f64;
    match *marginal {
        Marginal::Lognormal { .. } => {
            let (mu_t, sig_t) = marginal.lognormal_tilde().unwrap();
            (mu_t + (order * sig_t + 8.5) * sig_t).exp()
        }
        Marginal::Weibull { scale, shape } => {
            // Solve u = q ln(u) - ln(eps * Gamma(1 + q)) by fixed point, with
            // q = order / shape; the tail mass of x^order beyond
            // scale * u^(1/shape) is then below eps relative.
            let q = order / shape;
            let log_eps_gamma = -14.0 * std::f64::consts::LN_10 + crate::special::ln_gamma(1.0 + q);
            let mut u = 40.0f64;
            for _ in 0..40 {
                u = (q * u.ln() - log_eps_gamma).max(35.0);
            }
            scale * u.powf(1.0 / shape)
        }
        _ => marginal.quantile(1.0 - 1e-14),
    }
}

/// Runs the Stieltjes recurrence on a discrete measure `{(t_i, om_i)}`.
fn stieltjes_recurrence(t: &[f64], om: &[f64], m_max: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = t.len();
    let mut alpha = vec![0.0; m_max + 1];
    let mut beta = vec![0.0; m_max + 1];
    let mut p_prev = vec![0.0; n];
    let mut p_cur = vec![1.0; n];

    let mut norm_cur: f64 = om.iter().sum();
    beta[0] = norm_cur;
    for j in 0..=m_max {
        if !(norm_cur > 0.0) || !norm_cur.is_finite() {
            return Err(Error::MeasureNotPositiveDefinite { degree: j, beta: norm_cur });
        }
        let mut weighted_t = 0.0;
        for i in 0..n {
            weighted_t += om[i] * t[i] * p_cur[i] * p_cur[i];
        }
        alpha[j] = weighted_t / norm_cur;
        if j == m_max {
            break;
        }
        let beta_j = if j == 0 { 0.0 } else { beta[j] };
        let mut norm_next = 0.0;
        for i in 0..n {
            let next = (t[i] - alpha[j]) * p_cur[i] - beta_j * p_prev[i];
            p_prev[i] = p_cur[i];
            p_cur[i] = next;
            norm_next += om[i] * next * next;
        }
        beta[j + 1] = norm_next / norm_cur;
        if !(beta[j + 1] > 0.0) || !beta[j + 1].is_finite() {
            return Err(Error::MeasureNotPositiveDefinite { degree: j + 1, beta: beta[j + 1] });
        }
        norm_cur = norm_next;
    }
    Ok((alpha, beta))
}

/// Expectation `E[psi_j1 psi_j2 psi_j3]` of three basis polynomials of one
/// marginal. Selection-rule zeros (triangle inequality, odd totals under a
/// symmetric measure) are returned exactly as zero; Hermite and Laguerre use
/// closed forms validated against the quadrature oracle, everything else uses
/// the quadrature oracle directly.
pub fn triple_product(table: &RecurrenceTable, j1: usize, j2: usize, j3: usize) -> Result<f64> {
    let t = triple_table(table, j1, j2, j3)?;
    Ok(t.get(j1, j2, j3))
}

/// Dense table of `E[psi_a psi_b psi_c]` for `a <= amax`, `b <= bmax`,
/// `c <= cmax`.
#[derive(Debug, Clone)]
pub struct TripleTable {
    amax: usize,
    bmax: usize,
    cmax: usize,
    values: Vec<f64>,
}

impl TripleTable {
    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        debug_assert!(a <= self.amax && b <= self.bmax && c <= self.cmax);
        self.values[(a * (self.bmax + 1) + b) * (self.cmax + 1) + c]
    }
}

/// Builds the triple-product table for one marginal basis.
pub fn triple_table(
    table: &RecurrenceTable,
    amax: usize,
    bmax: usize,
    cmax: usize,
) -> Result<TripleTable> {
    let needed_degree = amax.max(bmax).max(cmax);
    let oracle_n = (amax + bmax + cmax).div_ceil(2) + 1;
    let extended;
    let source = if table.m_max >= needed_degree.max(oracle_n) {
        table
    } else {
        extended = build_recurrence(&table.marginal, needed_degree.max(oracle_n))?;
        &extended
    };

    let rule = source.gauss_rule(oracle_n)?;
    let dmax = needed_degree;
    let mut psi = vec![0.0; rule.n * (dmax + 1)];
    let mut buf = vec![0.0; dmax + 1];
    for (k, &x) in rule.nodes.iter().enumerate() {
        source.eval_all(x, dmax, &mut buf);
        psi[k * (dmax + 1)..(k + 1) * (dmax + 1)].copy_from_slice(&buf);
    }

    let symmetric = source.symmetric_measure();
    let mut out = TripleTable {
        amax,
        bmax,
        cmax,
        values: vec![0.0; (amax + 1) * (bmax + 1) * (cmax + 1)],
    };
    for a in 0..=amax {
        for b in 0..=bmax {
            for c in 0..=cmax {
                let v = if selection_zero(symmetric, a, b, c) {
                    0.0
                } else {
                    let mut acc = 0.0;
                    for k in 0..rule.n {
                        let row = &psi[k * (dmax + 1)..];
                        acc += rule.weights[k] * row[a] * row[b] * row[c];
                    }
                    acc
                };
                out.values[(a * (bmax + 1) + b) * (cmax + 1) + c] = v;
            }
        }
    }

    // Closed forms replace the quadrature entries only after they validate
    // against it.
    let closed_form = match source.family {
        Family::Hermite => Some(hermite_triple as fn(usize, usize, usize) -> f64),
        Family::Laguerre => Some(laguerre_triple as fn(usize, usize, usize) -> f64),
        _ => None,
    };
    if let Some(f) = closed_form {
        if closed_form_validates(&out, f) {
            for a in 0..=amax {
                for b in 0..=bmax {
                    for c in 0..=cmax {
                        out.values[(a * (bmax + 1) + b) * (cmax + 1) + c] = f(a, b, c);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn selection_zero(symmetric: bool, a: usize, b: usize, c: usize) -> bool {
    let hi = a.max(b).max(c);
    if 2 * hi > a + b + c {
        return true;
    }
    symmetric && (a + b + c) % 2 == 1
}

fn closed_form_validates(table: &TripleTable, f: fn(usize, usize, usize) -> f64) -> bool {
    let cap = 8;
    for a in 0..=table.amax.min(cap) {
        for b in 0..=table.bmax.min(cap) {
            for c in 0..=table.cmax.min(cap) {
                let oracle = table.get(a, b, c);
                if (f(a, b, c) - oracle).abs() > 1e-9 * oracle.abs().max(1.0) {
                    return false;
                }
            }
        }
    }
    true
}

/// Closed form for orthonormal probabilists' Hermite polynomials.
pub fn hermite_triple(j1: usize, j2: usize, j3: usize) -> f64 {
    let s = j1 + j2 + j3;
    if s % 2 == 1 {
        return 0.0;
    }
    let q = s / 2;
    if q < j1.max(j2).max(j3) {
        return 0.0;
    }
    (factorial(j1) * factorial(j2) * factorial(j3)).sqrt()
        / (factorial(q - j1) * factorial(q - j2) * factorial(q - j3))
}

/// Closed form for orthonormal Laguerre polynomials in the
/// positive-leading-coefficient convention.
pub fn laguerre_triple(j1: usize, j2: usize, j3: usize) -> f64 {
    if j3 > j1 + j2 || j3 < j1.abs_diff(j2) {
        return 0.0;
    }
    let excess = j1 + j2 - j3; // >= 0 within the triangle
    let v_min = excess.div_ceil(2);
    let v_max = j1.min(j2).min(excess);
    let mut acc = 0.0;
    for v in v_min..=v_max {
        let shift = 2 * v - excess; // j3 - j1 - j2 + 2v >= 0
        let term = factorial(j1 + j2 - v) * 2f64.powi(shift as i32)
            / (factorial(v) * factorial(j1 - v) * factorial(j2 - v));
        let choose = factorial(v) / (factorial(shift) * factorial(v - shift));
        acc += term * choose;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn all_kinds() -> Vec<Marginal> {
        vec![
            Marginal::gaussian(0.4, 1.3).unwrap(),
            Marginal::exponential(0.7).unwrap(),
            Marginal::lognormal(2.0, 0.5).unwrap(),
            Marginal::truncated_gaussian(1.0, 0.4, 1.1).unwrap(),
            Marginal::weibull(1.5, 2.2).unwrap(),
            Marginal::uniform(-0.5, 2.0).unwrap(),
        ]
    }

    #[test]
    fn classical_recurrences() {
        let h = build_recurrence(&Marginal::gaussian(0.0, 1.0).unwrap(), 3).unwrap();
        assert_eq!(h.alpha(), &[0.0; 4]);
        assert_eq!(h.beta(), &[1.0, 1.0, 2.0, 3.0]);

        let l = build_recurrence(&Marginal::uniform(-1.0, 1.0).unwrap(), 1).unwrap();
        assert_eq!(l.alpha()[0], 0.0);
        assert_abs_diff_eq!(l.beta()[1], 1.0 / 3.0, epsilon = 1e-15);

        let e = build_recurrence(&Marginal::exponential(1.0).unwrap(), 1).unwrap();
        assert_eq!(e.alpha()[0], 1.0);
    }

    #[test]
    fn orthonormal_evaluation() {
        let h = build_recurrence(&Marginal::gaussian(0.0, 1.0).unwrap(), 4).unwrap();
        assert_abs_diff_eq!(h.eval_orthonormal(1, 2.0).unwrap(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.eval_orthonormal(2, 1.0).unwrap(), 0.0, epsilon = 1e-14);
        for m in all_kinds() {
            let t = build_recurrence(&m, 4).unwrap();
            assert_eq!(t.eval_orthonormal(0, 0.7).unwrap(), 1.0);
        }
        assert!(h.eval_orthonormal(9, 0.0).is_err());
    }

    #[test]
    fn gauss_rule_small_cases() {
        let h = build_recurrence(&Marginal::gaussian(0.0, 1.0).unwrap(), 4).unwrap();
        let r2 = h.gauss_rule(2).unwrap();
        assert_abs_diff_eq!(r2.nodes[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r2.nodes[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r2.weights[0], 0.5, epsilon = 1e-12);

        let r3 = h.gauss_rule(3).unwrap();
        let m4 = r3.integrate(|x| x.powi(4));
        assert_abs_diff_eq!(m4, 3.0, epsilon = 1e-10);

        let u = build_recurrence(&Marginal::uniform(-1.0, 1.0).unwrap(), 2).unwrap();
        let r1 = u.gauss_rule(1).unwrap();
        assert_abs_diff_eq!(r1.nodes[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r1.weights[0], 1.0, epsilon = 1e-14);
    }

    /// Gram matrix of the basis under its own Gauss rule is the identity.
    #[test]
    fn orthonormality_for_every_kind() {
        for m in all_kinds() {
            let deg = 9;
            let t = build_recurrence(&m, deg + 1).unwrap();
            let rule = t.gauss_rule(deg + 1).unwrap();
            let mut buf = vec![0.0; deg + 1];
            let mut gram = vec![0.0; (deg + 1) * (deg + 1)];
            for (k, &x) in rule.nodes.iter().enumerate() {
                t.eval_all(x, deg, &mut buf);
                for i in 0..=deg {
                    for j in 0..=deg {
                        gram[i * (deg + 1) + j] += rule.weights[k] * buf[i] * buf[j];
                    }
                }
            }
            for i in 0..=deg {
                for j in 0..=deg {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (gram[i * (deg + 1) + j] - want).abs() < 1e-8,
                        "{}: gram[{i}][{j}] = {}",
                        m.kind_name(),
                        gram[i * (deg + 1) + j]
                    );
                }
            }
        }
    }

    /// Degree 2n-1 exactness against the analytic raw moments.
    #[test]
    fn quadrature_exactness_for_every_kind() {
        for m in all_kinds() {
            let t = build_recurrence(&m, 10).unwrap();
            for n in 1..=9usize {
                let rule = t.gauss_rule(n).unwrap();
                assert_abs_diff_eq!(rule.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
                for order in 0..=(2 * n - 1) as u32 {
                    let est = rule.integrate(|x| x.powi(order as i32));
                    let exact = m.raw_moment(order).unwrap();
                    let scale = exact.abs().max(1e-300);
                    assert!(
                        (est - exact).abs() / scale < 1e-10,
                        "{} n={n} order={order}: {est} vs {exact}",
                        m.kind_name()
                    );
                }
            }
        }
    }

    #[test]
    fn triple_product_reference_values() {
        let h = build_recurrence(&Marginal::gaussian(0.0, 1.0).unwrap(), 8).unwrap();
        assert_abs_diff_eq!(
            triple_product(&h, 1, 1, 2).unwrap(),
            std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
        assert_eq!(triple_product(&h, 1, 2, 4).unwrap(), 0.0);

        let u = build_recurrence(&Marginal::uniform(-1.0, 1.0).unwrap(), 8).unwrap();
        assert_abs_diff_eq!(
            triple_product(&u, 1, 1, 2).unwrap(),
            2.0 / 5.0f64.sqrt(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn triple_product_symmetry_under_permutations() {
        let m = Marginal::lognormal(2.0, 0.5).unwrap();
        let t = build_recurrence(&m, 8).unwrap();
        let tab = triple_table(&t, 4, 4, 4).unwrap();
        for a in 0..=4usize {
            for b in 0..=4usize {
                for c in 0..=4usize {
                    let v = tab.get(a, b, c);
                    for &(x, y, z) in
                        &[(a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]
                    {
                        assert_abs_diff_eq!(tab.get(x, y, z), v, epsilon = 1e-9);
                    }
                }
            }
        }
    }

    /// The Hermite and Laguerre closed forms agree with the quadrature oracle
    /// for all degree triples up to 8.
    #[test]
    fn closed_forms_match_oracle() {
        let cases = [
            (Marginal::gaussian(0.0, 1.0).unwrap(), hermite_triple as fn(usize, usize, usize) -> f64),
            (Marginal::exponential(1.0).unwrap(), laguerre_triple as fn(usize, usize, usize) -> f64),
        ];
        for (m, f) in cases {
            let t = build_recurrence(&m, 16).unwrap();
            let rule = t.gauss_rule((8 * 3) / 2 + 1).unwrap();
            let mut buf = vec![0.0; 9];
            for a in 0..=8usize {
                for b in 0..=8usize {
                    for c in 0..=8usize {
                        let mut oracle = 0.0;
                        for (k, &x) in rule.nodes.iter().enumerate() {
                            t.eval_all(x, 8, &mut buf);
                            oracle += rule.weights[k] * buf[a] * buf[b] * buf[c];
                        }
                        assert!(
                            (f(a, b, c) - oracle).abs() < 1e-9 * oracle.abs().max(1.0),
                            "{} ({a},{b},{c}): closed {} vs oracle {}",
                            m.kind_name(),
                            f(a, b, c),
                            oracle
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn laguerre_triple_spot_values() {
        // E[psi1 psi1 psi2] over the unit exponential equals 2; odd-total
        // combinations do not vanish for the asymmetric measure.
        assert_abs_diff_eq!(laguerre_triple(1, 1, 2), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(laguerre_triple(1, 1, 1), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(laguerre_triple(2, 2, 2), 10.0, epsilon = 1e-12);
    }
}
