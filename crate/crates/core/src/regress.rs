//! Polynomial least squares with pairwise interactions.
//!
//! The model is `b + Σ wᵢxᵢ + Σ_{i<j} wᵢⱼxᵢxⱼ + Σ_{k=2..order} Σ wᵢₖxᵢᵏ`.
//! Mixed higher-order products such as `x₁²x₂` are not part of the basis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ridge added to every non-intercept diagonal entry of the normal equations.
pub const RIDGE: f64 = 1e-8;
pub const MAX_ORDER: usize = 4;
const REFINEMENT_STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    Intercept,
    Linear { feature: usize },
    Interaction { a: usize, b: usize },
    Power { feature: usize, power: u32 },
}

impl Term {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Term::Intercept => 1.0,
            Term::Linear { feature } => x[feature],
            Term::Interaction { a, b } => x[a] * x[b],
            Term::Power { feature, power } => x[feature].powi(power as i32),
        }
    }
}

/// Number of basis terms for `p` features at polynomial `order`.
pub fn term_count(p: usize, order: usize) -> usize {
    1 + p + p * p.saturating_sub(1) / 2 + p * order.saturating_sub(1)
}

/// Basis terms in their canonical order: intercept, linear terms, pairwise
/// products in lexicographic order, then pure powers grouped by exponent.
pub fn terms(p: usize, order: usize) -> Vec<Term> {
    let mut out = Vec::with_capacity(term_count(p, order));
    out.push(Term::Intercept);
    out.extend((0..p).map(|feature| Term::Linear { feature }));
    for a in 0..p {
        for b in a + 1..p {
            out.push(Term::Interaction { a, b });
        }
    }
    for power in 2..=order as u32 {
        out.extend((0..p).map(|feature| Term::Power { feature, power }));
    }
    out
}

/// Evaluates the basis of `terms(x.len(), order)` at `x`.
pub fn expand_features(x: &[f64], order: usize) -> Vec<f64> {
    terms(x.len(), order).iter().map(|t| t.eval(x)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    order: usize,
    n_features: usize,
    terms: Vec<Term>,
    weights: Vec<f64>,
    n_train: usize,
}

impl RegressionModel {
    /// Builds a model from explicit weights aligned with `terms(n_features, order)`.
    pub fn from_weights(n_features: usize, order: usize, weights: Vec<f64>) -> Result<Self> {
        let terms = terms(n_features, order);
        if weights.len() != terms.len() {
            return Err(Error::Shape {
                expected: terms.len(),
                actual: weights.len(),
            });
        }
        Ok(Self {
            order,
            n_features,
            terms,
            weights,
            n_train: 0,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Fewer training rows than basis terms; the ridge term alone pins the fit.
    pub fn is_underdetermined(&self) -> bool {
        self.n_train > 0 && self.n_train < self.terms.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::Shape {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * t.eval(x))
            .sum())
    }
}

/// Ridge-stabilised least squares on the expanded basis.
pub fn fit_regression(x: &[Vec<f64>], y: &[f64], order: usize) -> Result<RegressionModel> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::Config(format!("order must lie in 1..={MAX_ORDER}, got {order}")));
    }
    if x.is_empty() {
        return Err(Error::Fit("no training rows".into()));
    }
    if x.len() != y.len() {
        return Err(Error::Shape {
            expected: x.len(),
            actual: y.len(),
        });
    }
    let p = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != p) {
        return Err(Error::Shape {
            expected: p,
            actual: bad.len(),
        });
    }
    let terms = terms(p, order);
    let m = terms.len();

    let mut gram = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    let mut row = vec![0.0; m];
    for (xi, &yi) in x.iter().zip(y) {
        for (r, t) in row.iter_mut().zip(&terms) {
            *r = t.eval(xi);
        }
        for a in 0..m {
            rhs[a] += row[a] * yi;
            for b in 0..=a {
                gram[a * m + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            gram[b * m + a] = gram[a * m + b];
        }
    }
    let mut factor = gram.clone();
    for a in 1..m {
        factor[a * m + a] += RIDGE;
    }
    if !cholesky_factor(&mut factor, m) {
        return Err(Error::Fit(format!(
            "normal equations are singular (order {order}, {m} terms)"
        )));
    }
    let mut weights = cholesky_solve(&factor, &rhs, m);
    // the ridge only stabilises the factorisation; refinement against the
    // unregularised system removes its bias when the system is well posed
    for _ in 0..REFINEMENT_STEPS {
        let residual: Vec<f64> = (0..m)
            .map(|a| rhs[a] - (0..m).map(|b| gram[a * m + b] * weights[b]).sum::<f64>())
            .collect();
        let step = cholesky_solve(&factor, &residual, m);
        for (w, d) in weights.iter_mut().zip(step) {
            *w += d;
        }
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Fit("non-finite weights".into()));
    }
    Ok(RegressionModel {
        order,
        n_features: p,
        terms,
        weights,
        n_train: x.len(),
    })
}

/// In-place lower Cholesky factor of a row-major SPD matrix. Returns false
/// when a pivot is not positive.
fn cholesky_factor(a: &mut [f64], m: usize) -> bool {
    for j in 0..m {
        let mut d = a[j * m + j];
        for k in 0..j {
            d -= a[j * m + k] * a[j * m + k];
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        a[j * m + j] = d;
        for i in j + 1..m {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= a[i * m + k] * a[j * m + k];
            }
            a[i * m + j] = s / d;
        }
    }
    true
}

fn cholesky_solve(l: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut z = vec![0.0; m];
    for i in 0..m {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * m + k] * z[k];
        }
        z[i] = s / l[i * m + i];
    }
    let mut w = vec![0.0; m];
    for i in (0..m).rev() {
        let mut s = z[i];
        for k in i + 1..m {
            s -= l[k * m + i] * w[k];
        }
        w[i] = s / l[i * m + i];
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rows(n: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (0..p).map(|_| rng.random::<f64>()).collect()).collect()
    }

    #[test]
    fn term_counts_for_four_features() {
        assert_eq!(expand_features(&[0.1, 0.2, 0.3, 0.4], 1).len(), 11);
        assert_eq!(expand_features(&[0.1, 0.2, 0.3, 0.4], 2).len(), 15);
        assert_eq!(expand_features(&[0.1, 0.2, 0.3, 0.4], 3).len(), 19);
    }

    #[test]
    fn term_count_closed_form_exhaustive() {
        for p in 1..=6 {
            for order in 1..=4 {
                let t = terms(p, order);
                assert_eq!(t.len(), term_count(p, order));
                let pairs = t.iter().filter(|t| matches!(t, Term::Interaction { .. })).count();
                assert_eq!(pairs, p * (p - 1) / 2);
            }
        }
    }

    #[test]
    fn zero_input_expands_to_unit_vector() {
        for order in 1..=4 {
            let e = expand_features(&[0.0; 4], order);
            assert_eq!(e[0], 1.0);
            assert!(e[1..].iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn recovers_known_coefficients() {
        let x = random_rows(60, 4, 11);
        let y: Vec<f64> = x.iter().map(|r| 3.0 * r[0] + 2.0 * r[1] * r[2] - 1.0).collect();
        let m = fit_regression(&x, &y, 1).unwrap();
        let t = m.terms();
        for (term, w) in t.iter().zip(m.weights()) {
            let expected = match term {
                Term::Intercept => -1.0,
                Term::Linear { feature: 0 } => 3.0,
                Term::Interaction { a: 1, b: 2 } => 2.0,
                _ => 0.0,
            };
            assert!((w - expected).abs() < 1e-6, "{term:?}: {w} vs {expected}");
        }
    }

    #[test]
    fn constant_target_gives_intercept_only() {
        let x = random_rows(40, 4, 5);
        let y = vec![0.37; 40];
        let m = fit_regression(&x, &y, 2).unwrap();
        assert!((m.weights()[0] - 0.37).abs() < 1e-8);
        assert!(m.weights()[1..].iter().all(|w| w.abs() < 1e-8));
    }

    #[test]
    fn representable_target_is_interpolated() {
        let x = random_rows(50, 4, 9);
        let y: Vec<f64> = x
            .iter()
            .map(|r| 0.5 + r[3] - 0.7 * r[0] * r[1] + 1.3 * r[2].powi(3))
            .collect();
        let m = fit_regression(&x, &y, 3).unwrap();
        let pred: Vec<f64> = x.iter().map(|r| m.predict(r).unwrap()).collect();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let rss: f64 = y.iter().zip(&pred).map(|(a, b)| (a - b).powi(2)).sum();
        let tss: f64 = y.iter().map(|a| (a - mean).powi(2)).sum();
        assert!(1.0 - rss / tss > 1.0 - 1e-9);
        for (a, b) in y.iter().zip(&pred) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}: {}", (a - b).abs());
        }
    }

    #[test]
    fn prediction_edge_cases() {
        let zero = RegressionModel::from_weights(4, 2, vec![0.0; 15]).unwrap();
        let mut w = vec![0.0; 15];
        w[0] = 2.5;
        let intercept = RegressionModel::from_weights(4, 2, w).unwrap();
        for x in random_rows(10, 4, 1) {
            assert_eq!(zero.predict(&x).unwrap(), 0.0);
            assert_eq!(intercept.predict(&x).unwrap(), 2.5);
        }
        assert!(zero.predict(&[0.0; 3]).is_err());
        assert!(RegressionModel::from_weights(4, 2, vec![0.0; 14]).is_err());
    }

    #[test]
    fn invalid_order_and_underdetermined() {
        let x = random_rows(5, 4, 2);
        let y = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(matches!(fit_regression(&x, &y, 0), Err(Error::Config(_))));
        assert!(matches!(fit_regression(&x, &y, 5), Err(Error::Config(_))));
        let m = fit_regression(&x, &y, 1).unwrap();
        assert!(m.is_underdetermined());
    }

    proptest::proptest! {
        #[test]
        fn prediction_is_linear_in_weights(
            w1 in proptest::collection::vec(-5.0f64..5.0, 15),
            w2 in proptest::collection::vec(-5.0f64..5.0, 15),
            x in proptest::collection::vec(0.0f64..1.0, 4),
        ) {
            let sum: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
            let m1 = RegressionModel::from_weights(4, 2, w1).unwrap();
            let m2 = RegressionModel::from_weights(4, 2, w2).unwrap();
            let ms = RegressionModel::from_weights(4, 2, sum).unwrap();
            let lhs = ms.predict(&x).unwrap();
            let rhs = m1.predict(&x).unwrap() + m2.predict(&x).unwrap();
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }
    }
}
