//! Dynamical degrees bookkeeping: admissible exponent sets for split
//! polarized systems, the symbolic derivative formula, the approximation
//! sequence of pullback divisors, and the semiabelian special case.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{rational_pow, Rational};

/// Split system with s factors of weights q_1 ≤ … ≤ q_s acting on a variety
/// of dimension d; `deg` is the degree scaling of the distinguished divisor
/// class under one pullback.
#[derive(Clone, Debug)]
pub struct DynamicalData {
    pub q: Vec<Rational>,
    pub d: usize,
    pub deg: Rational,
    /// optional exact intersection numbers (Ē·Π_i D̄_i^{a_i}) by exponent
    pub table: Option<BTreeMap<Vec<u32>, Rational>>,
    /// optional exact geometric numbers (Π_i D_i^{a_i}) by exponent
    pub geom_table: Option<BTreeMap<Vec<u32>, Rational>>,
    /// optional exact (D^d)
    pub d_power: Option<Rational>,
}

impl DynamicalData {
    pub fn new(q: Vec<Rational>, d: usize, deg: Rational) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::EmptyInput);
        }
        if d == 0 {
            return Err(Error::Semantic("dimension must be positive".into()));
        }
        let one = Rational::one();
        for w in &q {
            if *w <= one {
                return Err(Error::Semantic("weights must exceed 1".into()));
            }
        }
        if q.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Semantic("weights must be sorted ascending".into()));
        }
        if !deg.is_positive() {
            return Err(Error::Semantic("degree must be positive".into()));
        }
        Ok(DynamicalData {
            q,
            d,
            deg,
            table: None,
            geom_table: None,
            d_power: None,
        })
    }

    pub fn s(&self) -> usize {
        self.q.len()
    }
}

/// Exponents a ∈ ℕ^s with Σ a_i = d and Π q_i^{a_i} = deg, sorted.
pub fn index_set(data: &DynamicalData) -> Vec<Vec<u32>> {
    let s = data.s();
    let mut out = Vec::new();
    let mut a = vec![0u32; s];
    enumerate_compositions(data.d as u32, 0, &mut a, &mut |a| {
        let prod: Rational = a
            .iter()
            .zip(&data.q)
            .map(|(e, q)| rational_pow(q, *e))
            .product();
        if prod == data.deg {
            out.push(a.to_vec());
        }
    });
    out.sort();
    out
}

fn enumerate_compositions(
    remaining: u32,
    i: usize,
    a: &mut Vec<u32>,
    f: &mut impl FnMut(&[u32]),
) {
    if i + 1 == a.len() {
        a[i] = remaining;
        f(a);
        return;
    }
    for v in 0..=remaining {
        a[i] = v;
        enumerate_compositions(remaining - v, i + 1, a, f);
    }
}

fn multinomial(d: usize, a: &[u32]) -> Rational {
    let mut num = BigInt::one();
    for k in 1..=d {
        num *= k;
    }
    let mut den = BigInt::one();
    for e in a {
        for k in 1..=*e {
            den *= k;
        }
    }
    Rational::new(num, den)
}

#[derive(Clone, Debug)]
pub struct FormulaTerm {
    pub exponents: Vec<u32>,
    pub coefficient: Rational,
    pub symbol: String,
    pub value: Option<Rational>,
}

#[derive(Clone, Debug)]
pub struct DerivativeFormula {
    pub terms: Vec<FormulaTerm>,
    pub normalizer_symbol: String,
    pub normalizer_value: Option<Rational>,
    /// evaluated derivative when every ingredient is numeric
    pub total: Option<Rational>,
}

fn term_symbol(a: &[u32]) -> String {
    let mut s = String::from("(E");
    for (i, e) in a.iter().enumerate() {
        if *e == 0 {
            continue;
        }
        s.push_str(&format!("·D{}", i + 1));
        if *e > 1 {
            s.push_str(&format!("^{e}"));
        }
    }
    s.push(')');
    s
}

/// Derivative of the essential minimum of the dynamical height along Ē:
/// ∂ = (1/(D^d))·Σ_{a ∈ I} (d choose a)·(Ē·Π_i D̄_i^{a_i}).
/// Consistency of a supplied geometric table against (D^d) is enforced.
pub fn derivative_formula(data: &DynamicalData) -> Result<DerivativeFormula> {
    let idx = index_set(data);
    if let (Some(geom), Some(dp)) = (&data.geom_table, &data.d_power) {
        let mut sum = Rational::zero();
        for a in &idx {
            let g = geom.get(a).ok_or_else(|| {
                Error::Semantic(format!("geometric table is missing exponent {a:?}"))
            })?;
            sum += multinomial(data.d, a) * g;
        }
        if sum != *dp {
            return Err(Error::Semantic(
                "geometric table is inconsistent with the supplied (D^d)".into(),
            ));
        }
    }
    let mut terms = Vec::new();
    let mut numeric_sum = Some(Rational::zero());
    for a in &idx {
        let coefficient = multinomial(data.d, a);
        let value = data.table.as_ref().and_then(|t| t.get(a).cloned());
        numeric_sum = match (numeric_sum, &value) {
            (Some(acc), Some(v)) => Some(acc + &coefficient * v),
            _ => None,
        };
        terms.push(FormulaTerm {
            exponents: a.clone(),
            coefficient,
            symbol: term_symbol(a),
            value,
        });
    }
    let total = match (&numeric_sum, &data.d_power) {
        (Some(sum), Some(dp)) if !dp.is_zero() => Some(sum / dp),
        _ => None,
    };
    Ok(DerivativeFormula {
        terms,
        normalizer_symbol: "(D^d)".into(),
        normalizer_value: data.d_power.clone(),
        total,
    })
}

#[derive(Clone, Debug)]
pub struct ApproxStep {
    pub n: u32,
    /// pullback coefficients (q_i/q_s)^n of the split pieces
    pub coefficients: Vec<Rational>,
    /// lower bound (q_1/q_s)^n on the inradius scale of the rescaled polytope
    pub inradius_lower: Rational,
    /// overall rescaling q_s^{−n}
    pub abs_min_scale: Rational,
    /// |μabs|-controlled bound −μabs/q_1^n when μabs is known
    pub ratio_bound: Option<Rational>,
}

/// The rescaled pullback sequence Q_n: exact coefficients and the Lemma-style
/// decay bounds, for n = 0..n_max.
pub fn approximation_sequence(
    data: &DynamicalData,
    n_max: u32,
    mu_abs: Option<&Rational>,
) -> Vec<ApproxStep> {
    let q1 = &data.q[0];
    let qs = &data.q[data.s() - 1];
    (0..=n_max)
        .map(|n| ApproxStep {
            n,
            coefficients: data
                .q
                .iter()
                .map(|qi| rational_pow(&(qi / qs), n))
                .collect(),
            inradius_lower: rational_pow(&(q1 / qs), n),
            abs_min_scale: rational_pow(&qs.recip(), n),
            ratio_bound: mu_abs.map(|m| -m / rational_pow(q1, n)),
        })
        .collect()
}

/// Semiabelian system G_m^r × A^g with multiplication by ℓ: weights ℓ on the
/// torus part and ℓ² on the abelian part, total degree ℓ^{r+2g}.
pub fn semiabelian(r: u32, g: u32, ell: u64) -> Result<DynamicalData> {
    if ell < 2 {
        return Err(Error::Semantic("multiplication factor must be at least 2".into()));
    }
    if r == 0 && g == 0 {
        return Err(Error::Semantic("variety must have positive dimension".into()));
    }
    let l = Rational::from_integer((ell as i64).into());
    let l2 = &l * &l;
    let q = if r == 0 {
        vec![l2.clone()]
    } else if g == 0 {
        vec![l.clone()]
    } else {
        vec![l.clone(), l2.clone()]
    };
    let deg = rational_pow(&l, r + 2 * g);
    DynamicalData::new(q, (r + g) as usize, deg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    #[test]
    fn semiabelian_index_is_unique() {
        for r in 0..=4u32 {
            for g in 0..=4u32 {
                if r + g == 0 {
                    continue;
                }
                for ell in [2u64, 3, 5] {
                    let data = semiabelian(r, g, ell).unwrap();
                    let idx = index_set(&data);
                    let expected: Vec<u32> = if r == 0 {
                        vec![g]
                    } else if g == 0 {
                        vec![r]
                    } else {
                        vec![r, g]
                    };
                    assert_eq!(idx, vec![expected], "r={r} g={g} ell={ell}");
                }
            }
        }
    }

    #[test]
    fn empty_index_set() {
        // no way to reach degree 5 from weights 2 and 4
        let data = DynamicalData::new(vec![rat_int(2), rat_int(4)], 2, rat_int(5)).unwrap();
        assert!(index_set(&data).is_empty());
    }

    #[test]
    fn formula_with_table() {
        // G_m × A, ℓ = 2: I = {(1,1)}, coefficient 2
        let mut data = semiabelian(1, 1, 2).unwrap();
        let mut table = BTreeMap::new();
        table.insert(vec![1u32, 1], rat(3, 2));
        data.table = Some(table);
        data.d_power = Some(rat_int(6));
        let mut geom = BTreeMap::new();
        geom.insert(vec![1u32, 1], rat_int(3));
        data.geom_table = Some(geom);
        let f = derivative_formula(&data).unwrap();
        assert_eq!(f.terms.len(), 1);
        assert_eq!(f.terms[0].coefficient, rat_int(2));
        assert_eq!(f.terms[0].symbol, "(E·D1·D2)");
        assert_eq!(f.total, Some(rat(1, 2)));
        // inconsistent geometric table is rejected
        let mut bad = data.clone();
        bad.geom_table
            .as_mut()
            .unwrap()
            .insert(vec![1u32, 1], rat_int(4));
        assert!(derivative_formula(&bad).is_err());
    }

    #[test]
    fn approximation_decay() {
        let data = semiabelian(1, 1, 2).unwrap();
        let steps = approximation_sequence(&data, 3, Some(&rat(-1, 2)));
        assert_eq!(steps[0].coefficients, vec![rat_int(1), rat_int(1)]);
        assert_eq!(steps[2].coefficients, vec![rat(1, 4), rat_int(1)]);
        assert_eq!(steps[3].inradius_lower, rat(1, 8));
        assert_eq!(steps[3].abs_min_scale, rat(1, 64));
        assert_eq!(steps[3].ratio_bound, Some(rat(1, 16)));
        // monotone decay
        for w in steps.windows(2) {
            assert!(w[1].inradius_lower < w[0].inradius_lower);
            assert!(w[1].ratio_bound < w[0].ratio_bound);
        }
    }
}
